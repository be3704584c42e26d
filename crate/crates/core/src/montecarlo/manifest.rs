use std::fs::{self, OpenOptions};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::McEstimate;
use crate::error::Result;
use crate::exact::LambdaContext;

/// Everything needed to rerun a command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub code_version: String,
    pub command: String,
    pub config: Value,
    pub lambda: String,
    pub lambda_digest: String,
}

impl RunManifest {
    pub fn new(command: &str, config: Value, ctx: &LambdaContext) -> Self {
        Self {
            tool: "hdbp".into(),
            code_version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config,
            lambda: ctx.decimal(30),
            lambda_digest: ctx.digest(),
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }
}

pub const RESULTS_LOG_HEADER: [&str; 9] = [
    "command",
    "target",
    "shape",
    "p",
    "n",
    "base_seed",
    "mean",
    "std_error",
    "successes",
];

/// Appends one row per estimate, writing the header when the file is new.
pub fn append_results_log(
    path: &Path,
    command: &str,
    target: &str,
    shape: &str,
    p: f64,
    estimates: &[&McEstimate],
) -> Result<()> {
    let fresh = !path.exists() || fs::metadata(path)?.len() == 0;
    let file = OpenOptions::new().create(true).append(true).open(path)?;
    let mut w = csv::Writer::from_writer(file);
    if fresh {
        w.write_record(RESULTS_LOG_HEADER)?;
    }
    for e in estimates {
        w.write_record([
            command.to_string(),
            target.to_string(),
            shape.to_string(),
            p.to_string(),
            e.n.to_string(),
            e.base_seed.to_string(),
            e.mean.to_string(),
            e.std_error.to_string(),
            e.successes.map(|s| s.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
