//! Run configuration: defaults, config-file parsing, flag merging and the
//! reproducibility echo.
//!
//! The config file is a flat `key=value` format mirroring the long flag
//! names; flags override file keys. Every run echoes its fully resolved
//! configuration as `# key=value` lines, and those lines re-parse to the
//! identical configuration (an output header is itself a valid config file).

use std::path::{Path, PathBuf};

use fracbs::model::{GridSpec, MarketParams, UpperBoundary};
use fracbs::stability::optimal_theta;

pub const OUTPUT_DIR_ENV: &str = "FRACBS_OUTPUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Price,
    Bs,
    McCompare,
    Stability,
    Converge,
    ErrorGrid,
    AlphaSweep,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Price => "price",
            CommandKind::Bs => "bs",
            CommandKind::McCompare => "mc-compare",
            CommandKind::Stability => "stability",
            CommandKind::Converge => "converge",
            CommandKind::ErrorGrid => "error-grid",
            CommandKind::AlphaSweep => "alpha-sweep",
        }
    }

    #[cfg(test)]
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "price" => CommandKind::Price,
            "bs" => CommandKind::Bs,
            "mc-compare" => CommandKind::McCompare,
            "stability" => CommandKind::Stability,
            "converge" => CommandKind::Converge,
            "error-grid" => CommandKind::ErrorGrid,
            "alpha-sweep" => CommandKind::AlphaSweep,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum OutputFormat {
    /// Human-readable table, 6 significant digits.
    #[default]
    Human,
    /// Machine CSV, 17 significant digits.
    Csv,
    /// Machine JSON, 17 significant digits.
    Json,
}

impl OutputFormat {
    fn name(self) -> &'static str {
        match self {
            OutputFormat::Human => "human",
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

/// A usage problem, always carrying the offending key.
#[derive(Debug)]
pub struct UsageError {
    pub key: String,
    pub message: String,
}

impl UsageError {
    fn new(key: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            key: key.into(),
            message: message.into(),
        }
    }
}

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "invalid value for `{}`: {}", self.key, self.message)
    }
}

/// Unresolved option set: every field optional, merged flags-over-file.
#[derive(Debug, Clone, Default)]
pub struct RawOpts {
    pub command: Option<String>,
    pub sigma: Option<f64>,
    pub rate: Option<f64>,
    pub strike: Option<f64>,
    pub maturity: Option<f64>,
    pub spot: Option<f64>,
    pub alpha: Option<f64>,
    pub x_min: Option<f64>,
    pub x_max: Option<f64>,
    pub n: Option<usize>,
    pub time_steps: Option<usize>,
    pub theta: Option<String>,
    pub samples: Option<u64>,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    pub format: Option<OutputFormat>,
    pub upper_boundary: Option<UpperBoundary>,
    pub verbose: Option<bool>,
    // Study-protocol overrides.
    pub variable: Option<String>,
    pub reference_n: Option<usize>,
    pub reference_steps: Option<usize>,
    pub thetas: Option<Vec<f64>>,
    pub cells: Option<Vec<(usize, usize)>>,
    pub alphas: Option<Vec<f64>>,
    pub maturities: Option<Vec<f64>>,
    pub strikes: Option<Vec<f64>>,
    pub mc_samples: Option<u64>,
}

impl RawOpts {
    /// Prefers the values of `self`, then `fallback`.
    pub fn or(self, fallback: RawOpts) -> RawOpts {
        RawOpts {
            command: self.command.or(fallback.command),
            sigma: self.sigma.or(fallback.sigma),
            rate: self.rate.or(fallback.rate),
            strike: self.strike.or(fallback.strike),
            maturity: self.maturity.or(fallback.maturity),
            spot: self.spot.or(fallback.spot),
            alpha: self.alpha.or(fallback.alpha),
            x_min: self.x_min.or(fallback.x_min),
            x_max: self.x_max.or(fallback.x_max),
            n: self.n.or(fallback.n),
            time_steps: self.time_steps.or(fallback.time_steps),
            theta: self.theta.or(fallback.theta),
            samples: self.samples.or(fallback.samples),
            seed: self.seed.or(fallback.seed),
            output: self.output.or(fallback.output),
            format: self.format.or(fallback.format),
            upper_boundary: self.upper_boundary.or(fallback.upper_boundary),
            verbose: self.verbose.or(fallback.verbose),
            variable: self.variable.or(fallback.variable),
            reference_n: self.reference_n.or(fallback.reference_n),
            reference_steps: self.reference_steps.or(fallback.reference_steps),
            thetas: self.thetas.or(fallback.thetas),
            cells: self.cells.or(fallback.cells),
            alphas: self.alphas.or(fallback.alphas),
            maturities: self.maturities.or(fallback.maturities),
            strikes: self.strikes.or(fallback.strikes),
            mc_samples: self.mc_samples.or(fallback.mc_samples),
        }
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), UsageError> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, UsageError> {
            value
                .parse()
                .map_err(|_| UsageError::new(key, format!("cannot parse `{value}`")))
        }
        match key {
            "command" => self.command = Some(value.to_string()),
            "sigma" => self.sigma = Some(num(key, value)?),
            "rate" => self.rate = Some(num(key, value)?),
            "strike" => self.strike = Some(num(key, value)?),
            "maturity" => self.maturity = Some(num(key, value)?),
            "spot" => self.spot = Some(num(key, value)?),
            "alpha" => self.alpha = Some(num(key, value)?),
            "x-min" => self.x_min = Some(num(key, value)?),
            "x-max" => self.x_max = Some(num(key, value)?),
            "n" => self.n = Some(num(key, value)?),
            "N" => self.time_steps = Some(num(key, value)?),
            "theta" => self.theta = Some(value.to_string()),
            "samples" => self.samples = Some(num(key, value)?),
            "seed" => self.seed = Some(num(key, value)?),
            "output" => self.output = Some(PathBuf::from(value)),
            "format" => {
                self.format = Some(match value {
                    "human" => OutputFormat::Human,
                    "csv" => OutputFormat::Csv,
                    "json" => OutputFormat::Json,
                    _ => return Err(UsageError::new(key, "expected human, csv or json")),
                })
            }
            "upper-boundary" => {
                self.upper_boundary = Some(match value {
                    "payoff-compatible" => UpperBoundary::PayoffCompatible,
                    "remaining-time" => UpperBoundary::RemainingTime,
                    _ => {
                        return Err(UsageError::new(
                            key,
                            "expected payoff-compatible or remaining-time",
                        ))
                    }
                })
            }
            "verbose" => {
                self.verbose = Some(
                    value
                        .parse()
                        .map_err(|_| UsageError::new(key, "expected true or false"))?,
                )
            }
            "variable" => self.variable = Some(value.to_string()),
            "ref-n" => self.reference_n = Some(num(key, value)?),
            "ref-N" => self.reference_steps = Some(num(key, value)?),
            "thetas" => self.thetas = Some(parse_list(key, value)?),
            "cells" => self.cells = Some(parse_cells(key, value)?),
            "alphas" => self.alphas = Some(parse_list(key, value)?),
            "maturities" => self.maturities = Some(parse_list(key, value)?),
            "strikes" => self.strikes = Some(parse_list(key, value)?),
            "mc-samples" => self.mc_samples = Some(num(key, value)?),
            _ => return Err(UsageError::new(key, "unknown configuration key")),
        }
        Ok(())
    }
}

pub fn parse_list(key: &str, value: &str) -> Result<Vec<f64>, UsageError> {
    value
        .split(',')
        .map(|item| {
            item.trim()
                .parse()
                .map_err(|_| UsageError::new(key, format!("cannot parse `{item}` as a number")))
        })
        .collect()
}

/// Parses mesh cells of the form `500x50,100x20`.
pub fn parse_cells(key: &str, value: &str) -> Result<Vec<(usize, usize)>, UsageError> {
    value
        .split(',')
        .map(|item| {
            let (n, steps) = item
                .trim()
                .split_once(['x', 'X'])
                .ok_or_else(|| UsageError::new(key, format!("expected nxN, got `{item}`")))?;
            Ok((
                n.parse()
                    .map_err(|_| UsageError::new(key, format!("cannot parse `{n}`")))?,
                steps
                    .parse()
                    .map_err(|_| UsageError::new(key, format!("cannot parse `{steps}`")))?,
            ))
        })
        .collect()
}

/// Parses flat `key=value` text. Lines may carry a leading `#` (so an output
/// header is accepted verbatim); lines without `=` are ignored.
pub fn parse_kv_text(text: &str) -> Result<RawOpts, UsageError> {
    let mut opts = RawOpts::default();
    for line in text.lines() {
        let line = line.trim().trim_start_matches('#').trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            continue;
        };
        opts.set(key.trim(), value.trim())?;
    }
    Ok(opts)
}

pub fn parse_config_file(path: &Path) -> Result<RawOpts, UsageError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| UsageError::new("config", format!("cannot read {}: {e}", path.display())))?;
    parse_kv_text(&text)
}

/// Fully resolved run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: CommandKind,
    pub market: MarketParams,
    pub grid: GridSpec,
    pub theta: f64,
    pub samples: u64,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub format: OutputFormat,
    pub upper_boundary: UpperBoundary,
    pub verbose: bool,
}

fn map_param_error(err: fracbs::Error) -> UsageError {
    match err {
        fracbs::Error::InvalidParameter { name, message } => UsageError::new(name, message),
        fracbs::Error::GridTooCoarse { min, got } => {
            UsageError::new("n", format!("need at least {min} space intervals, got {got}"))
        }
        other => UsageError::new("config", other.to_string()),
    }
}

/// Applies the run defaults (the reference experiment: σ = 1, r = 0.04,
/// K = 2, T = 4, Z₀ = 1, α = 0.999 on [−20, 10] with a (500, 50) mesh) and
/// validates everything, naming the offending key on failure.
pub fn resolve(command: CommandKind, opts: &RawOpts) -> Result<RunConfig, UsageError> {
    let market = MarketParams::new(
        opts.sigma.unwrap_or(1.0),
        opts.rate.unwrap_or(0.04),
        opts.strike.unwrap_or(2.0),
        opts.maturity.unwrap_or(4.0),
        opts.spot.unwrap_or(1.0),
        opts.alpha.unwrap_or(0.999),
    )
    .map_err(map_param_error)?;

    let grid = GridSpec::new(
        opts.x_min.unwrap_or(-20.0),
        opts.x_max.unwrap_or(10.0),
        opts.n.unwrap_or(500),
        opts.time_steps.unwrap_or(50),
    )
    .map_err(map_param_error)?;

    let theta = match opts.theta.as_deref() {
        None | Some("optimal") => optimal_theta(market.alpha),
        Some(text) => {
            let value: f64 = text.parse().map_err(|_| {
                UsageError::new("theta", format!("expected a number or `optimal`, got `{text}`"))
            })?;
            if !(0.0..=1.0).contains(&value) {
                return Err(UsageError::new(
                    "theta",
                    format!("must lie in [0, 1], got {value}"),
                ));
            }
            value
        }
    };

    let output_dir = opts
        .output
        .clone()
        .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));

    Ok(RunConfig {
        command,
        market,
        grid,
        theta,
        samples: opts.samples.unwrap_or(100_000),
        seed: opts.seed.unwrap_or(0),
        output_dir,
        format: opts.format.unwrap_or_default(),
        upper_boundary: opts.upper_boundary.unwrap_or_default(),
        verbose: opts.verbose.unwrap_or(false),
    })
}

fn full(v: f64) -> String {
    format!("{v:.16e}")
}

impl RunConfig {
    /// Resolved configuration as `key=value` pairs; prefixed with `# ` these
    /// form the header of every output and re-parse to the same RunConfig.
    pub fn echo(&self) -> Vec<(String, String)> {
        let boundary = match self.upper_boundary {
            UpperBoundary::PayoffCompatible => "payoff-compatible",
            UpperBoundary::RemainingTime => "remaining-time",
        };
        vec![
            ("command".into(), self.command.name().into()),
            ("sigma".into(), full(self.market.sigma)),
            ("rate".into(), full(self.market.rate)),
            ("strike".into(), full(self.market.strike)),
            ("maturity".into(), full(self.market.maturity)),
            ("spot".into(), full(self.market.spot)),
            ("alpha".into(), full(self.market.alpha)),
            ("x-min".into(), full(self.grid.x_min)),
            ("x-max".into(), full(self.grid.x_max)),
            ("n".into(), self.grid.space_intervals.to_string()),
            ("N".into(), self.grid.time_steps.to_string()),
            ("theta".into(), full(self.theta)),
            ("samples".into(), self.samples.to_string()),
            ("seed".into(), self.seed.to_string()),
            ("output".into(), self.output_dir.display().to_string()),
            ("format".into(), self.format.name().into()),
            ("upper-boundary".into(), boundary.into()),
            ("verbose".into(), self.verbose.to_string()),
        ]
    }

    /// Re-parses an echoed header (or any `key=value` text) into the run
    /// configuration it came from.
    #[cfg(test)]
    pub fn from_echo(text: &str) -> Result<RunConfig, UsageError> {
        let opts = parse_kv_text(text)?;
        let command = opts
            .command
            .as_deref()
            .ok_or_else(|| UsageError::new("command", "missing from header"))?;
        let command = CommandKind::from_name(command)
            .ok_or_else(|| UsageError::new("command", format!("unknown command `{command}`")))?;
        resolve(command, &opts)
    }
}
