//! Subcommand bodies.

use std::path::{Path, PathBuf};

use msstgarch::evaluation::{self, DescriptiveStats, DmOptions, ForecastComparison};
use msstgarch::inference::{posterior_summary, run_gibbs, PosteriorSummary};
use msstgarch::{stability_report, ModelSpec, ReturnSeries};
use serde::Serialize;

use crate::config::{reference_spec, RunConfig};
use crate::error::{CliError, CliResult};
use crate::ingest::ingest;
use crate::output::{float, to_json, write_json, write_text, Table};

fn load_data(cfg: &RunConfig) -> CliResult<ReturnSeries> {
    let path = cfg
        .data
        .path
        .as_deref()
        .ok_or_else(|| CliError::config("no input data: pass --data or set [data] path"))?;
    ingest(path, cfg.data.mode, cfg.data.column.as_deref())
}

fn require_split(cfg: &RunConfig, len: usize) -> CliResult<usize> {
    let split = cfg
        .data
        .split
        .ok_or_else(|| CliError::config("no train/test split: pass --split or set [data] split"))?;
    if split == 0 || split >= len {
        return Err(CliError::config(format!("split {split} must lie in 1..{len}")));
    }
    Ok(split)
}

fn spec_or_reference(cfg: &RunConfig) -> CliResult<ModelSpec> {
    Ok(cfg.explicit_spec()?.unwrap_or_else(reference_spec))
}

fn date_label(series: &ReturnSeries, t: usize) -> String {
    series
        .timestamps()
        .map_or_else(|| (t + 1).to_string(), |ts| ts[t].clone())
}

pub fn simulate(cfg: &RunConfig) -> CliResult<()> {
    let spec = spec_or_reference(cfg)?;
    let sim = msstgarch::simulate(&spec, cfg.simulate.length, cfg.seed, cfg.simulate.burn_in)?;
    let mut header = vec!["t".to_string(), "return".into(), "state".into()];
    header.extend((1..=spec.k()).map(|j| format!("h_{j}")));
    let mut table = Table::new(&header);
    for (t, &y) in sim.returns.values().iter().enumerate() {
        let mut row = vec![(t + 1).to_string(), float(y), (sim.states[t] + 1).to_string()];
        row.extend(sim.variances.iter().map(|h| float(h[t])));
        table.row(&row);
    }
    let path = write_text(&cfg.out, "simulated.csv", &table.finish())?;
    write_text(&cfg.out, "simulate_config.toml", &cfg.with_spec(&spec).to_toml()?)?;
    println!("simulated {} observations -> {}", sim.returns.len(), path.display());
    Ok(())
}

#[derive(Serialize)]
struct FitSummary<'a> {
    model: String,
    k: usize,
    observations: usize,
    failed_sweeps: usize,
    dic: f64,
    posterior: &'a PosteriorSummary,
    mcmc: &'a msstgarch::McmcConfig,
}

fn summary_text(model: &str, s: &PosteriorSummary, dic: f64) -> String {
    let mut out = format!("{model}  draws: {}  DIC: {dic:.3}\n", s.draws);
    out.push_str(&format!(
        "{:<8} {:>8} {:>8} {:>8} {:>8} {:>8}\n",
        "param", "mean", "sd", "5%", "50%", "95%"
    ));
    for p in &s.params {
        out.push_str(&format!(
            "{:<8} {:>8.3} {:>8.3} {:>8.3} {:>8.3} {:>8.3}\n",
            p.name, p.mean, p.sd, p.q05, p.q50, p.q95
        ));
    }
    out.push_str(&format!("identification rate: {:.3}\n", s.identification_rate));
    out
}

pub fn fit(cfg: &RunConfig) -> CliResult<()> {
    let series = load_data(cfg)?;
    let train = match cfg.data.split {
        Some(_) => &series.values()[..require_split(cfg, series.len())?],
        None => series.values(),
    };
    let priors = cfg.priors();
    let draws = run_gibbs(train, &priors, &cfg.mcmc)?;
    let summary = posterior_summary(&draws)?;
    let dic = evaluation::dic(&draws, train)?;
    let label = cfg.model.variant.label().to_string();

    let mut header = draws.param_names();
    header.push("loglik".into());
    let mut table = Table::new(&header);
    for i in 0..draws.len() {
        let mut row: Vec<String> = draws.row(i).into_iter().map(float).collect();
        row.push(float(draws.log_likelihood[i]));
        table.row(&row);
    }
    write_text(&cfg.out, "draws.csv", &table.finish())?;

    let mut header = vec!["t".to_string()];
    header.extend((1..=draws.k).map(|j| format!("p_{j}")));
    let mut table = Table::new(&header);
    for (t, freq) in draws.state_frequencies.iter().enumerate() {
        let mut row = vec![date_label(&series, t)];
        row.extend(freq.iter().map(|f| float(*f)));
        table.row(&row);
    }
    write_text(&cfg.out, "states.csv", &table.finish())?;

    let body = FitSummary {
        model: label.clone(),
        k: draws.k,
        observations: train.len(),
        failed_sweeps: draws.failed_sweeps,
        dic,
        posterior: &summary,
        mcmc: &cfg.mcmc,
    };
    write_json(&cfg.out, "summary.json", &body)?;
    let text = summary_text(&label, &summary, dic);
    write_text(&cfg.out, "summary.txt", &text)?;
    let fitted = cfg.with_spec(&draws.posterior_mean_spec()?);
    write_text(&cfg.out, "fitted.toml", &fitted.to_toml()?)?;
    print!("{text}");
    Ok(())
}

pub fn stability(cfg: &RunConfig) -> CliResult<()> {
    let spec = spec_or_reference(cfg)?;
    let report = stability_report(&spec, cfg.evaluation.delta)?;
    let json = to_json(&report)?;
    write_text(&cfg.out, "stability.json", &json)?;
    print!("{json}");
    Ok(())
}

struct Walk {
    series: ReturnSeries,
    split: usize,
    forecasts: Vec<evaluation::DayForecast>,
}

fn walk(cfg: &RunConfig, spec: &ModelSpec) -> CliResult<Walk> {
    let series = load_data(cfg)?;
    let split = require_split(cfg, series.len())?;
    let forecasts = evaluation::rolling_forecast(spec, series.values(), split)?;
    Ok(Walk {
        series,
        split,
        forecasts,
    })
}

pub fn forecast(cfg: &RunConfig) -> CliResult<()> {
    let spec = cfg.require_spec()?;
    let w = walk(cfg, &spec)?;
    let levels = &cfg.evaluation.levels;
    let mut header = vec![
        "t".to_string(),
        "return".into(),
        "squared_return".into(),
        "variance".into(),
    ];
    header.extend(levels.iter().map(|l| format!("var_{l}")));
    let mut table = Table::new(&header);
    for (i, f) in w.forecasts.iter().enumerate() {
        let t = w.split + i;
        let y = w.series.values()[t];
        let mut row = vec![date_label(&w.series, t), float(y), float(y * y), float(f.variance)];
        for &l in levels {
            row.push(float(f.distribution.quantile(1.0 - l)?));
        }
        table.row(&row);
    }
    let path = write_text(&cfg.out, "forecast.csv", &table.finish())?;
    println!("{} one-step forecasts -> {}", w.forecasts.len(), path.display());
    Ok(())
}

pub fn backtest(cfg: &RunConfig) -> CliResult<()> {
    let spec = cfg.require_spec()?;
    let w = walk(cfg, &spec)?;
    let dists: Vec<_> = w.forecasts.into_iter().map(|f| f.distribution).collect();
    let report = evaluation::backtest(
        cfg.model.variant.label(),
        &dists,
        &w.series.values()[w.split..],
        &cfg.evaluation.levels,
    )?;
    write_json(&cfg.out, "backtest.json", &report)?;
    let text = report.to_text();
    write_text(&cfg.out, "backtest.txt", &text)?;
    print!("{text}");
    Ok(())
}

#[derive(Serialize)]
struct CompareOutput {
    days: usize,
    models: Vec<String>,
    comparisons: Vec<ForecastComparison>,
}

fn model_name(path: &Path, cfg: &RunConfig, taken: &[String]) -> String {
    let base = cfg.model.variant.label().to_string();
    if !taken.contains(&base) {
        return base;
    }
    path.file_stem()
        .map_or(base.clone(), |s| format!("{base} ({})", s.to_string_lossy()))
}

pub fn compare(cfg: &RunConfig, models: &[PathBuf]) -> CliResult<()> {
    if models.len() < 2 {
        return Err(CliError::config(
            "compare needs at least two fitted configs via --models",
        ));
    }
    let mut names = Vec::new();
    let mut forecasts = Vec::new();
    let mut walk_data = None;
    for path in models {
        let model_cfg = RunConfig::load(path)?;
        let spec = model_cfg.require_spec()?;
        let name = model_name(path, &model_cfg, &names);
        let w = walk(cfg, &spec)?;
        forecasts.push(w.forecasts.iter().map(|f| f.variance).collect::<Vec<f64>>());
        names.push(name);
        walk_data = Some((w.series, w.split));
    }
    let (series, split) = walk_data.expect("at least two models");
    let realized = &series.values()[split..];
    let options = DmOptions {
        lag: cfg.evaluation.dm_lag,
        hln: cfg.evaluation.dm_hln,
        horizon: 1,
    };
    let mut comparisons = Vec::new();
    for i in 0..names.len() {
        for j in i + 1..names.len() {
            comparisons.push(ForecastComparison::new(
                [names[i].as_str(), names[j].as_str()],
                &forecasts[i],
                &forecasts[j],
                realized,
                &options,
            )?);
        }
    }

    let mut header = vec!["t".to_string(), "squared_return".into()];
    header.extend(names.iter().cloned());
    let mut table = Table::new(&header);
    for (i, y) in realized.iter().enumerate() {
        let mut row = vec![date_label(&series, split + i), float(y * y)];
        row.extend(forecasts.iter().map(|f| float(f[i])));
        table.row(&row);
    }
    write_text(&cfg.out, "series.csv", &table.finish())?;

    let text: String = comparisons.iter().map(|c| c.to_text()).collect::<Vec<_>>().join("\n");
    write_text(&cfg.out, "compare.txt", &text)?;
    write_json(
        &cfg.out,
        "compare.json",
        &CompareOutput {
            days: realized.len(),
            models: names,
            comparisons,
        },
    )?;
    print!("{text}");
    Ok(())
}

pub fn summary(cfg: &RunConfig) -> CliResult<()> {
    let series = load_data(cfg)?;
    let stats: DescriptiveStats = evaluation::descriptive_stats(series.values())?;
    write_json(&cfg.out, "descriptive.json", &stats)?;
    let text = stats.to_text();
    write_text(&cfg.out, "descriptive.txt", &text)?;
    print!("{text}");
    Ok(())
}
