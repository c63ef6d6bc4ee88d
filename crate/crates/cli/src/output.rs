//! File writers. Floats in CSV carry 17 significant digits.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::output(dir, e))
}

pub fn write_text(dir: &Path, name: &str, contents: &str) -> CliResult<PathBuf> {
    ensure_dir(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| CliError::output(&path, e))?;
    Ok(path)
}

#[derive(Serialize)]
struct Versioned<'a, T: Serialize> {
    schema_version: u32,
    #[serde(flatten)]
    body: &'a T,
}

pub fn to_json<T: Serialize>(body: &T) -> CliResult<String> {
    let v = Versioned {
        schema_version: SCHEMA_VERSION,
        body,
    };
    serde_json::to_string_pretty(&v)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| CliError::new(crate::error::Code::Output, e.to_string()))
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, body: &T) -> CliResult<PathBuf> {
    write_text(dir, name, &to_json(body)?)
}

pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

/// CSV text built from rows of already formatted cells.
pub struct Table {
    writer: csv::Writer<Vec<u8>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        let mut t = Self {
            writer: csv::Writer::from_writer(Vec::new()),
        };
        t.row(header);
        t
    }

    pub fn row<S: AsRef<str>>(&mut self, cells: &[S]) {
        self.writer
            .write_record(cells.iter().map(|c| c.as_ref()))
            .expect("writing to memory");
    }

    pub fn finish(self) -> String {
        let bytes = self.writer.into_inner().expect("flushing to memory");
        String::from_utf8(bytes).expect("cells are UTF-8")
    }
}
