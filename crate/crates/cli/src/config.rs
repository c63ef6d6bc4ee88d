//! Run configuration: a TOML file with one section per concern, overridden
//! by command-line flags.

use std::path::{Path, PathBuf};

use msstgarch::inference::PriorSpec;
use msstgarch::{McmcConfig, ModelSpec, RegimeParams, TransitionMatrix, Variant};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::ingest::Mode;

pub const DEFAULT_LEVELS: [f64; 6] = [0.99, 0.95, 0.9, 0.1, 0.05, 0.01];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub variant: Variant,
    pub k: Option<usize>,
    /// Named parameter preset, used when `regimes` is absent.
    pub preset: Option<String>,
    pub regimes: Option<Vec<RegimeParams>>,
    pub transition: Option<Vec<Vec<f64>>>,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            variant: Variant::MsStGarch,
            k: None,
            preset: None,
            regimes: None,
            transition: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataSection {
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub mode: Mode,
    pub column: Option<String>,
    pub split: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateSection {
    pub length: usize,
    pub burn_in: usize,
}

impl Default for SimulateSection {
    fn default() -> Self {
        Self {
            length: 2500,
            burn_in: msstgarch::model::DEFAULT_BURN_IN,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluationSection {
    pub levels: Vec<f64>,
    pub delta: f64,
    /// Bartlett lag for the Diebold-Mariano variance.
    pub dm_lag: usize,
    pub dm_hln: bool,
}

impl Default for EvaluationSection {
    fn default() -> Self {
        Self {
            levels: DEFAULT_LEVELS.to_vec(),
            delta: msstgarch::DEFAULT_DELTA,
            dm_lag: 0,
            dm_hln: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub out: PathBuf,
    pub model: ModelSection,
    pub priors: Option<PriorSpec>,
    pub mcmc: McmcConfig,
    pub data: DataSection,
    pub simulate: SimulateSection,
    pub evaluation: EvaluationSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            out: PathBuf::from("out"),
            model: ModelSection::default(),
            priors: None,
            mcmc: McmcConfig::default(),
            data: DataSection::default(),
            simulate: SimulateSection::default(),
            evaluation: EvaluationSection::default(),
        }
    }
}

/// Partial config as read from a file; every section optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    seed: Option<u64>,
    out: Option<PathBuf>,
    model: Option<ModelSection>,
    priors: Option<PriorSpec>,
    mcmc: Option<McmcConfig>,
    data: Option<DataSection>,
    simulate: Option<SimulateSection>,
    evaluation: Option<EvaluationSection>,
}

/// Parameters of the built-in two-regime reference model.
pub fn reference_spec() -> ModelSpec {
    ModelSpec::new(
        vec![
            RegimeParams::new(0.3, 0.2, 0.05, 0.5, 1.5).expect("valid preset"),
            RegimeParams::new(1.9, 0.7, 0.1, 0.25, 0.5).expect("valid preset"),
        ],
        TransitionMatrix::two_state(0.97, 0.85).expect("valid preset"),
    )
    .expect("valid preset")
}

pub const PRESETS: [&str; 1] = ["reference"];

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::input(path, e))?;
        Self::from_toml(&text).map_err(|e| CliError::config(format!("{}: {}", path.display(), e.message)))
    }

    pub fn from_toml(text: &str) -> CliResult<Self> {
        let file: FileConfig = toml::from_str(text).map_err(|e| CliError::config(e.to_string()))?;
        let d = Self::default();
        let mut cfg = Self {
            seed: file.seed.unwrap_or(d.seed),
            out: file.out.unwrap_or(d.out),
            model: file.model.unwrap_or(d.model),
            priors: file.priors,
            mcmc: file.mcmc.unwrap_or(d.mcmc),
            data: file.data.unwrap_or(d.data),
            simulate: file.simulate.unwrap_or(d.simulate),
            evaluation: file.evaluation.unwrap_or(d.evaluation),
        };
        if file.seed.is_some() {
            cfg.mcmc.seed = cfg.seed;
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> CliResult<String> {
        toml::to_string(self).map_err(|e| CliError::config(e.to_string()))
    }

    pub fn k(&self) -> usize {
        self.model.k.unwrap_or_else(|| self.model.variant.default_regimes())
    }

    pub fn validate(&self) -> CliResult<()> {
        self.mcmc.validate()?;
        if let Some(l) = self.evaluation.levels.iter().find(|l| !(**l > 0.0 && **l < 1.0)) {
            return Err(CliError::config(format!("VaR level {l} outside (0, 1)")));
        }
        if self.k() == 0 {
            return Err(CliError::config("k must be at least 1"));
        }
        if !self.model.variant.is_switching() && self.k() != 1 {
            return Err(CliError::config(format!(
                "{} has a single regime, got k = {}",
                self.model.variant,
                self.k()
            )));
        }
        Ok(())
    }

    /// Explicit model parameters, or the named preset.
    pub fn explicit_spec(&self) -> CliResult<Option<ModelSpec>> {
        match (&self.model.regimes, &self.model.preset) {
            (Some(regimes), _) => {
                let k = regimes.len();
                let rows = match &self.model.transition {
                    Some(rows) => rows.clone(),
                    None if k == 1 => vec![vec![1.0]],
                    None => {
                        return Err(CliError::config(
                            "model.transition is required with more than one regime",
                        ))
                    }
                };
                let transition = TransitionMatrix::new(rows)?;
                Ok(Some(ModelSpec::new(regimes.clone(), transition)?))
            }
            (None, Some(name)) if name == "reference" => Ok(Some(reference_spec())),
            (None, Some(name)) => Err(CliError::config(format!(
                "unknown preset `{name}` (available: {})",
                PRESETS.join(", ")
            ))),
            (None, None) => Ok(None),
        }
    }

    pub fn require_spec(&self) -> CliResult<ModelSpec> {
        self.explicit_spec()?.ok_or_else(|| {
            CliError::config("no model parameters: set [model] regimes/transition, a preset, or use a fitted config")
        })
    }

    pub fn priors(&self) -> PriorSpec {
        self.priors
            .clone()
            .unwrap_or_else(|| PriorSpec::for_variant(self.model.variant, self.k()))
    }

    /// Copy of this config carrying `spec` as explicit parameters.
    pub fn with_spec(&self, spec: &ModelSpec) -> Self {
        let mut c = self.clone();
        c.model.k = Some(spec.k());
        c.model.preset = None;
        c.model.regimes = Some(spec.regimes().to_vec());
        c.model.transition = Some(spec.transition().rows());
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_default() {
        assert_eq!(RunConfig::from_toml("").unwrap(), RunConfig::default());
    }

    #[test]
    fn roundtrip_with_spec() {
        let cfg = RunConfig::default().with_spec(&reference_spec());
        let text = cfg.to_toml().unwrap();
        let back = RunConfig::from_toml(&text).unwrap();
        assert_eq!(back.require_spec().unwrap(), reference_spec());
    }

    #[test]
    fn sections_parse() {
        let cfg = RunConfig::from_toml(
            r#"
seed = 9
[model]
variant = "garch"
regimes = [{ a0 = 0.3, a1 = 0.2, a2 = 0.2, b = 0.5, gamma = 0.0 }]
[mcmc]
iterations = 100
burn_in = 10
grid_size = 9
[evaluation]
levels = [0.9]
"#,
        )
        .unwrap();
        assert_eq!(cfg.mcmc.seed, 9);
        assert_eq!(cfg.k(), 1);
        assert_eq!(cfg.require_spec().unwrap().k(), 1);
        cfg.validate().unwrap();
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(RunConfig::from_toml("[model]\nvariant = \"garch\"\nbogus = 1\n").is_err());
    }

    #[test]
    fn bad_levels_rejected() {
        let mut cfg = RunConfig::default();
        cfg.evaluation.levels = vec![0.9, 1.0];
        assert!(cfg.validate().is_err());
    }
}
