use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fsl_core::config::FieldConfig;
use fsl_core::estimators::geometric_t_grid;
use fsl_core::models::{build_model, parse_params, Params, SpaceKind};
use fsl_core::{ProcessModel, SimulationConfig};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "FSL_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "fsl-out";

pub const DEFAULT_BIAS_BUDGET: f64 = 0.02;
pub const DEFAULT_K_RADIUS: f64 = 2.0;
/// First observation time of the default grid for stochastic models.
pub const DEFAULT_T0: f64 = 0.01;
/// Noise-free models only carry the O(t) bias, so they start much closer to zero.
pub const DEFAULT_T0_DETERMINISTIC: f64 = 1e-7;
pub const DEFAULT_T_COUNT: usize = 4;
pub const DEFAULT_SAMPLES: usize = 1_000_000;
/// Step for noise-free models in `verify` when no `--dt` is given: their only error is the
/// O(dt²) trapezoid bias, which has to sit below the deterministic tolerance.
pub const DEFAULT_DETERMINISTIC_DT: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Simulate,
    Symbol,
    Characteristics,
    Verify,
    Compare,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Symbol => "symbol",
            Command::Characteristics => "characteristics",
            Command::Verify => "verify",
            Command::Compare => "compare",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    #[default]
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "fsl",
    version,
    about = "Symbols, paths and generator checks for Feller and Itô processes with killing"
)]
struct Cli {
    #[command(subcommand)]
    command: CommandArgs,
}

#[derive(Debug, Subcommand)]
enum CommandArgs {
    /// Simulate paths and write one file per path.
    Simulate(RunArgs),
    /// Monte Carlo estimate of the probabilistic symbol.
    Symbol(RunArgs),
    /// Semimartingale characteristics along simulated paths.
    Characteristics(RunArgs),
    /// Run named invariant checks.
    Verify(RunArgs),
    /// Estimated against analytic symbol over an (x, ξ) grid.
    Compare(RunArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Experiment file (TOML); flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Registry model name.
    #[arg(long)]
    pub model: Option<String>,
    /// Model parameter, repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    pub params: Vec<String>,
    /// Start points: `a,b,c` in one dimension, `x1,x2;y1,y2` otherwise.
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<String>,
    /// Frequencies, same syntax as `--x`.
    #[arg(long, allow_hyphen_values = true)]
    pub xi: Option<String>,
    /// `geom:T0:COUNT` or an explicit list of times.
    #[arg(long = "t-grid")]
    pub t_grid: Option<String>,
    /// Number of simulated paths
    #[arg(long)]
    pub paths: Option<usize>,
    /// Euler / grid step
    #[arg(long)]
    pub dt: Option<f64>,
    /// Simulation horizon T
    #[arg(long)]
    pub horizon: Option<f64>,
    /// Master seed; path i uses substream i
    #[arg(long)]
    pub seed: Option<u64>,
    /// Radius of the stopping ball K around the start
    #[arg(long = "k-radius")]
    pub k_radius: Option<f64>,
    /// Output directory (default: $FSL_OUT_DIR, else ./fsl-out)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Report format
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write paths in the binary format instead of CSV.
    #[arg(long)]
    pub binary: bool,
    /// Comma-separated check names for `verify`; `all` selects every check.
    #[arg(long)]
    pub checks: Option<String>,
    /// Relative bias allowance in the symbol comparison band.
    #[arg(long = "bias-budget")]
    pub bias_budget: Option<f64>,
    /// Multiply the diffusion part of the reference symbol (sensitivity runs).
    #[arg(long = "analytic-q-scale")]
    pub analytic_q_scale: Option<f64>,
    /// Random samples per inequality check in `verify`.
    #[arg(long)]
    pub samples: Option<usize>,
}

/// Experiment file; every key is optional and yields to the command line.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ExperimentFile {
    pub model: Option<String>,
    #[serde(default)]
    pub params: BTreeMap<String, toml::Value>,
    /// Inline field definition, used instead of a registry model.
    pub field: Option<FieldConfig>,
    pub x: Option<toml::Value>,
    pub xi: Option<toml::Value>,
    pub t_grid: Option<toml::Value>,
    pub paths: Option<usize>,
    pub dt: Option<f64>,
    pub horizon: Option<f64>,
    pub seed: Option<u64>,
    pub k_radius: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub binary: Option<bool>,
    pub checks: Option<Vec<String>>,
    pub bias_budget: Option<f64>,
    pub analytic_q_scale: Option<f64>,
    pub samples: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "source", rename_all = "kebab-case")]
pub enum ModelSource {
    Registry { name: String, params: Params },
    Field { config: Box<FieldConfig> },
}

impl ModelSource {
    pub fn build(&self) -> CliResult<ProcessModel> {
        Ok(match self {
            ModelSource::Registry { name, params } => build_model(name, params)?,
            ModelSource::Field { config } => config.build_model()?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSpec {
    pub command: Command,
    pub model: ModelSource,
    /// False when `verify` fell back to the built-in model set.
    pub explicit_model: bool,
    pub x: Vec<Vec<f64>>,
    pub xi: Vec<Vec<f64>>,
    pub t_grid: Vec<f64>,
    pub sim: SimulationConfig,
    /// Time step used for deterministic models by `verify`.
    pub deterministic_dt: f64,
    /// Radius of the stopping neighbourhood for symbol estimates and Dynkin checks.
    pub k_radius: f64,
    #[serde(skip)]
    pub out_dir: PathBuf,
    pub format: Format,
    pub binary: bool,
    pub checks: Vec<String>,
    pub bias_budget: f64,
    pub analytic_q_scale: f64,
    pub samples: usize,
}

/// Parses `fsl <command> [flags]` (the first item is the program name).
pub fn parse_args<I, T>(args: I) -> Result<ExperimentSpec, ParseOutcome>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(ParseOutcome::Clap)?;
    let (command, run) = match cli.command {
        CommandArgs::Simulate(a) => (Command::Simulate, a),
        CommandArgs::Symbol(a) => (Command::Symbol, a),
        CommandArgs::Characteristics(a) => (Command::Characteristics, a),
        CommandArgs::Verify(a) => (Command::Verify, a),
        CommandArgs::Compare(a) => (Command::Compare, a),
    };
    let file = match &run.config {
        None => ExperimentFile::default(),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| ParseOutcome::Error(CliError::io(p, e)))?;
            toml::from_str(&text).map_err(|e| ParseOutcome::Error(CliError::usage(format!("{}: {e}", p.display()))))?
        }
    };
    let out_default = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from);
    ExperimentSpec::resolve(command, &run, &file, out_default).map_err(ParseOutcome::Error)
}

/// Why argument parsing stopped: help/version output or a usage error from clap, or an invalid experiment.
#[derive(Debug)]
pub enum ParseOutcome {
    Clap(clap::Error),
    Error(CliError),
}

fn toml_scalar(v: &toml::Value) -> String {
    match v {
        toml::Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Points from CLI text; in one dimension both `,` and `;` separate points.
pub fn parse_points(text: &str, dim: usize) -> CliResult<Vec<Vec<f64>>> {
    let number = |s: &str| {
        s.trim().parse::<f64>().map_err(|_| CliError::usage(format!("'{}' is not a number in '{text}'", s.trim())))
    };
    let pieces: Vec<&str> = if dim == 1 {
        text.split([',', ';']).filter(|s| !s.trim().is_empty()).collect()
    } else {
        text.split(';').filter(|s| !s.trim().is_empty()).collect()
    };
    let mut out = Vec::new();
    for p in pieces {
        let v: Vec<f64> =
            if dim == 1 { vec![number(p)?] } else { p.split(',').map(number).collect::<CliResult<_>>()? };
        if v.len() != dim {
            return Err(CliError::usage(format!("point '{p}' has {} coordinates, the model has {dim}", v.len())));
        }
        out.push(v);
    }
    if out.is_empty() {
        return Err(CliError::usage(format!("no points in '{text}'")));
    }
    Ok(out)
}

fn points_from_toml(v: &toml::Value, dim: usize, what: &str) -> CliResult<Vec<Vec<f64>>> {
    let bad = || CliError::usage(format!("{what}: expected a list of numbers or of {dim}-vectors"));
    let num = |v: &toml::Value| match v {
        toml::Value::Float(f) => Ok(*f),
        toml::Value::Integer(i) => Ok(*i as f64),
        _ => Err(bad()),
    };
    match v {
        toml::Value::String(s) => parse_points(s, dim),
        toml::Value::Array(items) => {
            let mut out = Vec::new();
            for item in items {
                let p = match item {
                    toml::Value::Array(c) => c.iter().map(num).collect::<CliResult<Vec<f64>>>()?,
                    other => vec![num(other)?],
                };
                if p.len() != dim {
                    return Err(bad());
                }
                out.push(p);
            }
            Ok(out)
        }
        _ => Err(bad()),
    }
}

/// `geom:T0:COUNT` or a comma list of positive times.
pub fn parse_t_grid(text: &str) -> CliResult<Vec<f64>> {
    let bad = || CliError::usage(format!("t-grid '{text}': expected geom:T0:COUNT or a list of times"));
    let grid = if let Some(rest) = text.strip_prefix("geom:") {
        let (t0, count) = rest.split_once(':').ok_or_else(bad)?;
        let t0: f64 = t0.trim().parse().map_err(|_| bad())?;
        let count: usize = count.trim().parse().map_err(|_| bad())?;
        if count == 0 || count > 62 {
            return Err(bad());
        }
        geometric_t_grid(t0, count)
    } else {
        text.split(',').map(|s| s.trim().parse::<f64>().map_err(|_| bad())).collect::<CliResult<Vec<f64>>>()?
    };
    if grid.is_empty() || grid.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
        return Err(bad());
    }
    Ok(grid)
}

fn default_point(model: &ProcessModel) -> Vec<f64> {
    match model.space().kind() {
        SpaceKind::AllOfRd => vec![0.0; model.dim()],
        SpaceKind::OpenInterval { a, b } => vec![0.5 * (a + b)],
        SpaceKind::OpenBox { lo, hi } => lo.iter().zip(hi).map(|(l, h)| 0.5 * (l + h)).collect(),
        SpaceKind::PositiveHalfline => vec![1.0],
    }
}

fn default_frequencies(dim: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for s in [-2.0, -1.0, 1.0, 2.0] {
        for k in 0..dim {
            let mut v = vec![0.0; dim];
            v[k] = s;
            out.push(v);
        }
    }
    out
}

fn default_paths(command: Command) -> usize {
    match command {
        Command::Simulate | Command::Characteristics => 10,
        Command::Symbol | Command::Compare | Command::Verify => 10_000,
    }
}

impl ExperimentSpec {
    pub fn resolve(
        command: Command,
        run: &RunArgs,
        file: &ExperimentFile,
        out_default: Option<PathBuf>,
    ) -> CliResult<Self> {
        let model = match (&run.model, &file.model, &file.field) {
            (Some(name), _, _) | (None, Some(name), None) => {
                let mut params: Params = file.params.iter().map(|(k, v)| (k.clone(), toml_scalar(v))).collect();
                params.extend(parse_params(run.params.iter().map(String::as_str))?);
                ModelSource::Registry { name: name.clone(), params }
            }
            (None, None, Some(config)) => {
                if !run.params.is_empty() || !file.params.is_empty() {
                    return Err(CliError::usage("--param applies to registry models, not to an inline field"));
                }
                ModelSource::Field { config: Box::new(config.clone()) }
            }
            (None, Some(_), Some(_)) => {
                return Err(CliError::usage("the experiment file names both a model and a field"))
            }
            (None, None, None) if command == Command::Verify => {
                ModelSource::Registry { name: "levy".into(), params: Params::new() }
            }
            (None, None, None) => return Err(CliError::usage("no model given (use --model or --config)")),
        };
        let explicit_model = run.model.is_some() || file.model.is_some() || file.field.is_some();
        let built = model.build()?;
        let dim = built.dim();

        let x = match (&run.x, &file.x) {
            (Some(s), _) => parse_points(s, dim)?,
            (None, Some(v)) => points_from_toml(v, dim, "x")?,
            (None, None) => vec![default_point(&built)],
        };
        let xi = match (&run.xi, &file.xi) {
            (Some(s), _) => parse_points(s, dim)?,
            (None, Some(v)) => points_from_toml(v, dim, "xi")?,
            (None, None) => default_frequencies(dim),
        };
        let t_grid = match (&run.t_grid, &file.t_grid) {
            (Some(s), _) => parse_t_grid(s)?,
            (None, Some(toml::Value::String(s))) => parse_t_grid(s)?,
            (None, Some(v)) => points_from_toml(v, 1, "t-grid")?.into_iter().map(|p| p[0]).collect(),
            (None, None) => {
                let t0 = if built.is_deterministic() { DEFAULT_T0_DETERMINISTIC } else { DEFAULT_T0 };
                geometric_t_grid(t0, DEFAULT_T_COUNT)
            }
        };
        if t_grid.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return Err(CliError::usage("t-grid entries must be positive"));
        }

        let defaults = SimulationConfig::default();
        let k_radius = run.k_radius.or(file.k_radius).unwrap_or(DEFAULT_K_RADIUS);
        let sim = SimulationConfig {
            horizon: run.horizon.or(file.horizon).unwrap_or(defaults.horizon),
            dt: run.dt.or(file.dt).unwrap_or(defaults.dt),
            n_paths: run.paths.or(file.paths).unwrap_or_else(|| default_paths(command)),
            seed: run.seed.or(file.seed).unwrap_or(defaults.seed),
            k_radius: match command {
                Command::Simulate | Command::Characteristics => run.k_radius.or(file.k_radius),
                _ => Some(k_radius),
            },
            ..defaults
        };
        sim.validate()?;
        let deterministic_dt = run.dt.or(file.dt).unwrap_or(DEFAULT_DETERMINISTIC_DT);

        let checks = match (&run.checks, &file.checks) {
            (Some(s), _) => s.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect(),
            (None, Some(v)) => v.clone(),
            (None, None) => vec!["all".to_string()],
        };
        let bias_budget = run.bias_budget.or(file.bias_budget).unwrap_or(DEFAULT_BIAS_BUDGET);
        if !(bias_budget >= 0.0 && bias_budget.is_finite()) {
            return Err(CliError::usage("bias budget must be finite and nonnegative"));
        }
        let analytic_q_scale = run.analytic_q_scale.or(file.analytic_q_scale).unwrap_or(1.0);
        if !(analytic_q_scale > 0.0 && analytic_q_scale.is_finite()) {
            return Err(CliError::usage("analytic-q-scale must be positive"));
        }
        let samples = run.samples.or(file.samples).unwrap_or(DEFAULT_SAMPLES);
        if samples == 0 {
            return Err(CliError::usage("samples must be at least 1"));
        }

        Ok(Self {
            command,
            model,
            explicit_model,
            x,
            xi,
            t_grid,
            sim,
            deterministic_dt,
            k_radius,
            out_dir: run
                .out
                .clone()
                .or_else(|| file.out.clone())
                .or(out_default)
                .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR)),
            format: run.format.or(file.format).unwrap_or_default(),
            binary: run.binary || file.binary.unwrap_or(false),
            checks,
            bias_budget,
            analytic_q_scale,
            samples,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> ExperimentSpec {
        parse_args(std::iter::once("fsl").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn flags_and_defaults() {
        let s = parse(&["compare", "--model", "superdrift", "--x", "0.5,1,2", "--xi", "-2,-1,0,1,2", "--out", "o"]);
        assert_eq!(s.command, Command::Compare);
        assert_eq!(s.x, vec![vec![0.5], vec![1.0], vec![2.0]]);
        assert_eq!(s.xi.len(), 5);
        assert_eq!(s.t_grid[0], DEFAULT_T0_DETERMINISTIC);
        assert_eq!(s.sim.k_radius, Some(DEFAULT_K_RADIUS));
        let s = parse(&["symbol", "--model", "levy", "--t-grid", "geom:0.02:3", "--param", "variance=2"]);
        assert_eq!(s.t_grid, vec![0.02, 0.01, 0.005]);
        assert_eq!(s.xi, default_frequencies(1));
        assert!(matches!(&s.model, ModelSource::Registry { params, .. } if params["variance"] == "2"));
    }

    #[test]
    fn points_in_two_dimensions() {
        assert_eq!(parse_points("0,1;2,3", 2).unwrap(), vec![vec![0.0, 1.0], vec![2.0, 3.0]]);
        assert!(parse_points("0,1,2", 2).is_err());
        assert!(parse_points("a", 1).is_err());
        assert!(parse_points("", 1).is_err());
    }

    #[test]
    fn t_grid_forms() {
        assert_eq!(parse_t_grid("0.1, 0.05").unwrap(), vec![0.1, 0.05]);
        assert!(parse_t_grid("geom:0.1").is_err());
        assert!(parse_t_grid("0.1,-1").is_err());
    }

    #[test]
    fn zero_paths_is_an_argument_error() {
        let r = parse_args(["fsl", "simulate", "--model", "superdrift", "--paths", "0"]);
        match r {
            Err(ParseOutcome::Error(e)) => assert_eq!(e.exit_code(), 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn file_values_yield_to_flags() {
        let file: ExperimentFile =
            toml::from_str("model = \"levy\"\nx = [0.0, 1.0]\ndt = 0.01\nseed = 5\n[params]\nvariance = 2\n").unwrap();
        let run = RunArgs { seed: Some(9), ..Default::default() };
        let s = ExperimentSpec::resolve(Command::Symbol, &run, &file, None).unwrap();
        assert_eq!((s.sim.dt, s.sim.seed), (0.01, 9));
        assert_eq!(s.x, vec![vec![0.0], vec![1.0]]);
        assert!(matches!(&s.model, ModelSource::Registry { params, .. } if params["variance"] == "2"));
        assert_eq!(s.out_dir, PathBuf::from(DEFAULT_OUT_DIR));
        assert!(toml::from_str::<ExperimentFile>("bogus = 1").is_err());
    }
}
