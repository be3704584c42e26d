//! `hdbp`: command-line front end for `hdbp-core`.
//!
//! Exit codes: 0 success, 1 usage error, 2 numeric failure or guard
//! violation, 3 a requested check disagreed.

mod args;
mod commands;

use std::fmt;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use hdbp_core::montecarlo::RunManifest;

use args::{Cli, Format, RunSpec};

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Numeric(String),
    Mismatch(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Numeric(_) => 2,
            Failure::Mismatch(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "error: {m}"),
            Failure::Numeric(m) => write!(f, "error: {m}"),
            Failure::Mismatch(m) => write!(f, "check failed: {m}"),
        }
    }
}

impl From<hdbp_core::Error> for Failure {
    fn from(e: hdbp_core::Error) -> Self {
        Failure::Numeric(e.to_string())
    }
}

fn write_file(path: &PathBuf, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Numeric(format!("cannot write {}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<(), Failure> {
    let spec = match (cli.run_spec, cli.command) {
        (Some(_), Some(_)) => {
            return Err(Failure::Usage(
                "--run-spec replaces the subcommand; give one or the other".into(),
            ))
        }
        (Some(path), None) => {
            let text = fs::read_to_string(&path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            RunSpec::from_json(&text)?
        }
        (None, Some(cmd)) => RunSpec::new(cli.global, cmd),
        (None, None) => return Err(Failure::Usage("no subcommand given (see --help)".into())),
    };
    if cli.dry_run {
        println!("{}", serde_json::to_string_pretty(&spec).expect("serializable"));
        return Ok(());
    }
    if let Some(t) = spec.threads {
        if t == 0 {
            return Err(Failure::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Failure::Numeric(e.to_string()))?;
    }
    let ctx = commands::context(spec.precision_bits)?;

    let manifest_path = cli.manifest.unwrap_or_else(|| match &spec.out {
        Some(out) => {
            let mut s = out.clone().into_os_string();
            s.push(".manifest.json");
            s.into()
        }
        None => PathBuf::from("hdbp-manifest.json"),
    });
    let config = serde_json::to_value(&spec).expect("serializable");
    RunManifest::new(spec.command.name(), config, &ctx)
        .write(&manifest_path)
        .map_err(|e| Failure::Numeric(format!("cannot write manifest {}: {e}", manifest_path.display())))?;

    let outcome = commands::execute(&spec, &ctx)?;
    let text = match spec.format {
        Format::Json => serde_json::to_string_pretty(&outcome.json).expect("serializable") + "\n",
        Format::Csv => outcome.csv,
    };
    match &spec.out {
        Some(path) => write_file(path, &text)?,
        None => print!("{text}"),
    }
    match outcome.mismatch {
        Some(m) => Err(Failure::Mismatch(m)),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{f}");
            ExitCode::from(f.code())
        }
    }
}
