use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hdbp_core::exact::{PcVariant, DEFAULT_PRECISION_BITS};
use hdbp_core::GridShape;
use serde::{Deserialize, Serialize};

use crate::Failure;

#[derive(Parser, Debug)]
#[command(name = "hdbp", version, about = "Two-neighbour bootstrap percolation on [n]^d")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,

    /// Rerun a saved run spec, or the `config` of a run manifest.
    #[arg(long, value_name = "FILE")]
    pub run_spec: Option<PathBuf>,

    /// Print the run spec as JSON and exit without running.
    #[arg(long, global = true)]
    pub dry_run: bool,

    /// Where to write the run manifest. Defaults to `<out>.manifest.json`,
    /// or `hdbp-manifest.json` when the report goes to stdout.
    #[arg(long, global = true, value_name = "FILE")]
    pub manifest: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Args, Debug)]
pub struct GlobalArgs {
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Report file; stdout when absent.
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<PathBuf>,

    /// Worker threads for the oracle and Monte Carlo code.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// λ is computed with series tolerance 2^-bits.
    #[arg(long, global = true, default_value_t = DEFAULT_PRECISION_BITS)]
    pub precision_bits: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

/// Everything that determines a run's output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub command: Command,
    pub seed: u64,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub precision_bits: u32,
}

impl RunSpec {
    pub fn new(global: GlobalArgs, command: Command) -> Self {
        Self {
            command,
            seed: global.seed,
            format: global.format,
            out: global.out,
            threads: global.threads,
            precision_bits: global.precision_bits,
        }
    }

    /// Parses a run spec, or a manifest carrying one under `config`.
    pub fn from_json(text: &str) -> Result<Self, Failure> {
        let v: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Failure::Usage(format!("run spec is not JSON: {e}")))?;
        let v = match v.get("config") {
            Some(c) if v.get("tool").is_some() => c.clone(),
            _ => v,
        };
        serde_json::from_value(v).map_err(|e| Failure::Usage(format!("invalid run spec: {e}")))
    }
}

#[derive(Subcommand, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Compute λ, the smallest positive root of sum_m (-1)^{m+1} a_m = 1
    Lambda(LambdaArgs),
    /// Emit |S(l)| and the P*, R*, Y* tables
    Tables(TablesArgs),
    /// Brute-force enumeration over subsets of [2]^dim
    Oracle(OracleArgs),
    /// Monte Carlo estimate of a spanning probability or droplet count
    Simulate(SimulateArgs),
    /// Bisection for the critical probability of a grid
    Pc(PcArgs),
    /// A minimal percolating set of [n]^d
    Minset(MinsetArgs),
    /// Closed-form critical-probability expressions and small-p bounds
    Predict(PredictArgs),
    /// Evaluate the f(l) recursion for given g and h
    Techlemma(TechlemmaArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Lambda(_) => "lambda",
            Command::Tables(_) => "tables",
            Command::Oracle(_) => "oracle",
            Command::Simulate(_) => "simulate",
            Command::Pc(_) => "pc",
            Command::Minset(_) => "minset",
            Command::Predict(_) => "predict",
            Command::Techlemma(_) => "techlemma",
        }
    }
}

/// Either `--sides a,b,c` or `--n` with `--d`.
#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapeArgs {
    /// Side length of a uniform grid [n]^d.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
    /// Per-axis side lengths.
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["n", "d"])]
    pub sides: Option<Vec<usize>>,
}

impl ShapeArgs {
    /// `n` defaults to 2; `d` falls back to `default_d`.
    pub fn resolve(&self, default_d: Option<usize>) -> Result<GridShape, Failure> {
        let shape = match &self.sides {
            Some(s) => GridShape::new(s.clone()),
            None => {
                let d = self
                    .d
                    .or(default_d)
                    .ok_or_else(|| Failure::Usage("give --d (with --n) or --sides".into()))?;
                GridShape::uniform(self.n.unwrap_or(2), d)
            }
        };
        shape.map_err(|e| Failure::Usage(e.to_string()))
    }
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LambdaArgs {
    /// Series tolerance; defaults to 2^-precision_bits.
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Decimal places printed.
    #[arg(long, default_value_t = 10)]
    pub digits: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Which {
    S,
    Stars,
    All,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TablesArgs {
    /// Largest l; star tables cover dimensions up to 2l+1.
    #[arg(long, default_value_t = 7)]
    pub ell_max: usize,
    #[arg(long, value_enum, default_value_t = Which::All)]
    pub which: Which,
    /// Compare against the embedded published values; exit 3 on a mismatch.
    #[arg(long)]
    pub check_published: bool,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleArgs {
    #[arg(long)]
    pub dim: usize,
    /// Subset size; defaults to ceil(dim/2) + 1.
    #[arg(long)]
    pub size: Option<usize>,
    #[arg(long, default_value_t = 64)]
    pub shards: usize,
    /// Largest number of subsets enumerated.
    #[arg(long, default_value_t = hdbp_core::oracle::DEFAULT_GUARD)]
    pub guard: u64,
    #[arg(long)]
    pub allow_dim7: bool,
    #[arg(long, value_name = "FILE")]
    pub checkpoint: Option<PathBuf>,
    /// Also check the final-pair structure of every spanning set.
    #[arg(long)]
    pub structure_checks: bool,
    /// Include the P(dim,p) and R(dim,p) coefficient vectors (dim <= 4).
    #[arg(long)]
    pub polynomials: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimTarget {
    /// The closure is the whole grid.
    FullGrid,
    /// The corner [2]^cube_dim is internally spanned.
    Cube,
    /// The corner [2]^{2l} is sequentially spanned.
    SequentialCube,
    /// Number of sequentially spanned [2]^{2l} subcubes.
    Droplets,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub shape: ShapeArgs,
    #[arg(long, value_enum, default_value_t = SimTarget::FullGrid)]
    pub target: SimTarget,
    #[arg(long, default_value_t = 2)]
    pub l: usize,
    #[arg(long)]
    pub cube_dim: Option<usize>,
    #[arg(long)]
    pub p: f64,
    #[arg(long, default_value_t = 10_000)]
    pub samples: u64,
    #[arg(long, default_value_t = 1)]
    pub replicas: u32,
    #[arg(long, default_value_t = 2)]
    pub r: u32,
    /// Compare with the exact value where one is available; exit 3 if
    /// |z| > 3.
    #[arg(long)]
    pub compare_exact: bool,
    /// Append the estimate to this CSV log.
    #[arg(long, value_name = "FILE")]
    pub results_log: Option<PathBuf>,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PcArgs {
    #[command(flatten)]
    pub shape: ShapeArgs,
    #[arg(long, default_value_t = 2)]
    pub r: u32,
    /// Percolation probability sought.
    #[arg(long, default_value_t = 0.5)]
    pub target: f64,
    #[arg(long, default_value_t = 10_000)]
    pub samples_per_probe: u64,
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
    #[arg(long, default_value_t = 40)]
    pub max_probes: usize,
    #[arg(long, default_value_t = 1)]
    pub replicas: u32,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MinsetArgs {
    #[command(flatten)]
    pub shape: ShapeArgs,
    #[arg(long, default_value_t = 2)]
    pub r: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VariantArg {
    HypercubeLower,
    HypercubeUpper,
    GridUpper,
    GridLower,
    Sharp,
}

impl From<VariantArg> for PcVariant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::HypercubeLower => PcVariant::HypercubeLower,
            VariantArg::HypercubeUpper => PcVariant::HypercubeUpper,
            VariantArg::GridUpper => PcVariant::GridUpper,
            VariantArg::GridLower => PcVariant::GridLower,
            VariantArg::Sharp => PcVariant::Sharp,
        }
    }
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictArgs {
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long)]
    pub d: usize,
    /// One formula; all of them when absent.
    #[arg(long, value_enum)]
    pub variant: Option<VariantArg>,
    /// Also report the smallest d0 from which the hypercube lower formula
    /// stays below the upper one, searching up to this d.
    #[arg(long)]
    pub order_threshold: Option<usize>,
    /// With `--p`, the small-p bounds on P(2l,p) and P(2l+1,p).
    #[arg(long, requires = "p")]
    pub ell: Option<usize>,
    #[arg(long, requires = "ell")]
    pub p: Option<f64>,
    #[arg(long, default_value_t = hdbp_core::exact::DEFAULT_DELTA)]
    pub delta: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Schedule {
    /// g(m) = c/m^2 + 2^-m for m >= 3, g(1) = g(2) = c.
    Inductive,
    /// g(m) = c/m^2.
    InverseSquare,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HChoice {
    /// h = 1 + g.
    Upper,
    /// h = 1.
    Lower,
    /// h = 1 + g/2.
    Mid,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TechlemmaArgs {
    #[arg(long, default_value_t = 100)]
    pub ell: usize,
    #[arg(long, value_enum, default_value_t = Schedule::InverseSquare)]
    pub schedule: Schedule,
    #[arg(long, default_value_t = 0.01)]
    pub c: f64,
    #[arg(long, value_enum, default_value_t = HChoice::Upper)]
    pub h: HChoice,
    /// JSON file `{"g": [...], "h": [...]}` overriding the schedule.
    #[arg(long, value_name = "FILE")]
    pub input: Option<PathBuf>,
}
