//! Command-line front end: parse a run configuration, dispatch to the solver,
//! oracles or study harness, and emit tables.
//!
//! Exit status contract: 0 success (stability warnings go to stderr without
//! changing it), 2 usage error, 3 numerical failure, 4 I/O failure.

mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use config::{
    parse_config_file, resolve, CommandKind, OutputFormat, RawOpts, RunConfig, UsageError,
};
use fracbs::closed_form::bs_quote;
use fracbs::harness::{
    run_alpha_sweep, run_error_grid, run_spatial_study, run_temporal_study, AlphaSweepProtocol,
    ErrorGridProtocol, SpatialProtocol, TemporalProtocol,
};
use fracbs::mc::mc_price;
use fracbs::report::{Report, StudyRow};
use fracbs::scheme::{solve_surface, SchemeConfig};
use fracbs::stability::verdict;

#[derive(Parser)]
#[command(name = "fracbs", version, about = "European option pricing under a subdiffusive Black-Scholes model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Price a European call with the finite-difference solver
    Price(CommonArgs),
    /// Classical closed-form call/put quote
    Bs(CommonArgs),
    /// Compare the finite-difference price against the Monte Carlo estimate
    McCompare(CommonArgs),
    /// Evaluate the stability verdict for a scheme configuration
    Stability(CommonArgs),
    /// Measure the empirical convergence order in time or space
    Converge(ConvergeArgs),
    /// Error/time grid over theta rows and mesh columns
    ErrorGrid(ErrorGridArgs),
    /// Price sweep over maturities, fractional orders and strikes
    AlphaSweep(AlphaSweepArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Flat key=value configuration file; flags override file keys
    #[arg(long)]
    config: Option<PathBuf>,
    /// Volatility per sqrt-year
    #[arg(long)]
    sigma: Option<f64>,
    /// Risk-free rate per year
    #[arg(long)]
    rate: Option<f64>,
    /// Strike
    #[arg(long)]
    strike: Option<f64>,
    /// Maturity in years
    #[arg(long)]
    maturity: Option<f64>,
    /// Spot price
    #[arg(long)]
    spot: Option<f64>,
    /// Subdiffusion exponent in (0, 1]; the PDE path needs alpha < 1
    #[arg(long)]
    alpha: Option<f64>,
    /// Lower log-price truncation
    #[arg(long = "x-min", allow_hyphen_values = true)]
    x_min: Option<f64>,
    /// Upper log-price truncation
    #[arg(long = "x-max", allow_hyphen_values = true)]
    x_max: Option<f64>,
    /// Number of space intervals
    #[arg(long = "n")]
    n: Option<usize>,
    /// Number of time steps
    #[arg(long = "N")]
    time_steps: Option<usize>,
    /// Scheme weight in [0, 1], or `optimal`
    #[arg(long)]
    theta: Option<String>,
    /// Monte Carlo sample count
    #[arg(long)]
    samples: Option<u64>,
    /// Monte Carlo seed
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for study files (default: $FRACBS_OUTPUT_DIR or .)
    #[arg(long)]
    output: Option<PathBuf>,
    /// Stdout format
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    /// Discount clock of the upper boundary
    #[arg(long = "upper-boundary", value_enum)]
    upper_boundary: Option<BoundaryArg>,
    #[arg(long)]
    verbose: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BoundaryArg {
    /// q(0) matches the payoff at the corner
    PayoffCompatible,
    /// discount by the remaining time T - t
    RemainingTime,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum VariableArg {
    Time,
    Space,
}

#[derive(Args)]
struct ConvergeArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Which step is refined
    #[arg(long, value_enum)]
    variable: Option<VariableArg>,
    /// Reference space intervals (spatial study)
    #[arg(long = "ref-n")]
    reference_n: Option<usize>,
    /// Reference time steps
    #[arg(long = "ref-N")]
    reference_steps: Option<usize>,
}

#[derive(Args)]
struct ErrorGridArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Comma-separated theta rows (default 0,0.25,0.5,0.6,0.9)
    #[arg(long, value_delimiter = ',')]
    thetas: Option<Vec<f64>>,
    /// Comma-separated mesh cells as nxN (default the study table)
    #[arg(long)]
    cells: Option<String>,
}

#[derive(Args)]
struct AlphaSweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Comma-separated fractional orders
    #[arg(long, value_delimiter = ',')]
    alphas: Option<Vec<f64>>,
    /// Comma-separated maturities
    #[arg(long, value_delimiter = ',')]
    maturities: Option<Vec<f64>>,
    /// Comma-separated strikes
    #[arg(long, value_delimiter = ',')]
    strikes: Option<Vec<f64>>,
    /// Enable the Monte Carlo overlay with this many draws
    #[arg(long = "mc-samples")]
    mc_samples: Option<u64>,
}

/// Failure modes mapped onto the exit-status contract.
enum Failure {
    Usage(String),
    Numerical(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Numerical(_) => 3,
            Failure::Io(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Numerical(m) | Failure::Io(m) => m,
        }
    }
}

impl From<UsageError> for Failure {
    fn from(e: UsageError) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<fracbs::Error> for Failure {
    fn from(e: fracbs::Error) -> Self {
        match e {
            fracbs::Error::InvalidParameter { .. } | fracbs::Error::GridTooCoarse { .. } => {
                Failure::Usage(e.to_string())
            }
            fracbs::Error::Io(inner) => Failure::Io(inner.to_string()),
            other => Failure::Numerical(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.code())
        }
    }
}

fn gather(common: &CommonArgs, kind: CommandKind) -> Result<(RunConfig, RawOpts), Failure> {
    let flag_opts = RawOpts {
        sigma: common.sigma,
        rate: common.rate,
        strike: common.strike,
        maturity: common.maturity,
        spot: common.spot,
        alpha: common.alpha,
        x_min: common.x_min,
        x_max: common.x_max,
        n: common.n,
        time_steps: common.time_steps,
        theta: common.theta.clone(),
        samples: common.samples,
        seed: common.seed,
        output: common.output.clone(),
        format: common.format,
        upper_boundary: common.upper_boundary.map(|b| match b {
            BoundaryArg::PayoffCompatible => fracbs::UpperBoundary::PayoffCompatible,
            BoundaryArg::RemainingTime => fracbs::UpperBoundary::RemainingTime,
        }),
        verbose: common.verbose.then_some(true),
        ..RawOpts::default()
    };
    let merged = match &common.config {
        Some(path) => flag_opts.or(parse_config_file(path)?),
        None => flag_opts,
    };
    let resolved = resolve(kind, &merged)?;
    Ok((resolved, merged))
}

/// Prints the echo header and rows in the configured format; 6 significant
/// digits for the human table, 17 for machine formats.
fn emit(cfg: &RunConfig, rows: Vec<StudyRow>, human: &[String]) -> Result<(), Failure> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let render = |r: Result<(), fracbs::Error>| r.map_err(Failure::from);
    match cfg.format {
        OutputFormat::Human => {
            for (key, value) in cfg.echo() {
                writeln!(out, "# {key}={value}").map_err(|e| Failure::Io(e.to_string()))?;
            }
            for line in human {
                writeln!(out, "{line}").map_err(|e| Failure::Io(e.to_string()))?;
            }
            Ok(())
        }
        OutputFormat::Csv => render(Report::new(cfg.echo(), rows).write_csv(&mut out)),
        OutputFormat::Json => render(Report::new(cfg.echo(), rows).write_json(&mut out)),
    }
}

/// Study commands persist CSV plus its JSON mirror and report the paths.
fn persist(cfg: &RunConfig, rows: &[StudyRow], study: &str) -> Result<(), Failure> {
    let report = Report::new(cfg.echo(), rows.to_vec());
    let (csv, json) = report
        .write_files(&cfg.output_dir, study)
        .map_err(Failure::from)?;
    eprintln!("wrote {} and {}", csv.display(), json.display());
    Ok(())
}

fn sig6(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let magnitude = v.abs().log10().floor() as i32;
    if !(-3..=8).contains(&magnitude) {
        return format!("{v:.5e}");
    }
    let decimals = (5 - magnitude).max(0) as usize;
    format!("{v:.decimals$}")
}

fn warn_if_unstable(cfg: &RunConfig) {
    let v = verdict(
        cfg.theta,
        cfg.market.alpha,
        &cfg.market.coefficients(),
        cfg.grid.dt(cfg.market.maturity),
        cfg.grid.dx(),
    );
    if !v.stable() {
        eprintln!(
            "warning: configuration fails the stability test (theta {}, alpha {}); \
             results may blow up",
            cfg.theta, cfg.market.alpha
        );
    }
}

fn scheme_config(cfg: &RunConfig) -> Result<SchemeConfig, Failure> {
    Ok(SchemeConfig::new(cfg.theta, cfg.grid, cfg.market)?.with_upper_boundary(cfg.upper_boundary))
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Price(common) => {
            let (cfg, _) = gather(&common, CommandKind::Price)?;
            warn_if_unstable(&cfg);
            let started = std::time::Instant::now();
            let price = solve_surface(&scheme_config(&cfg)?)?.price_at_spot(cfg.market.spot)?;
            let row = StudyRow {
                study: "price".into(),
                alpha: cfg.market.alpha,
                theta: cfg.theta,
                n: cfg.grid.space_intervals,
                time_steps: cfg.grid.time_steps,
                value: price,
                error: None,
                seconds: started.elapsed().as_secs_f64(),
            };
            emit(&cfg, vec![row], &[format!("call price: {}", sig6(price))])
        }
        Command::Bs(common) => {
            let (cfg, _) = gather(&common, CommandKind::Bs)?;
            let m = &cfg.market;
            let quote = bs_quote(m.spot, m.strike, m.maturity, m.rate, m.sigma)?;
            let mk = |study: &str, value: f64| StudyRow {
                study: study.into(),
                alpha: 1.0,
                theta: cfg.theta,
                n: 0,
                time_steps: 0,
                value,
                error: None,
                seconds: 0.0,
            };
            emit(
                &cfg,
                vec![mk("bs_call", quote.call), mk("bs_put", quote.put)],
                &[
                    format!("call: {}", sig6(quote.call)),
                    format!("put: {}", sig6(quote.put)),
                    format!("d+: {}", sig6(quote.d_plus)),
                    format!("d-: {}", sig6(quote.d_minus)),
                ],
            )
        }
        Command::McCompare(common) => {
            let (cfg, _) = gather(&common, CommandKind::McCompare)?;
            warn_if_unstable(&cfg);
            let started = std::time::Instant::now();
            let fd = solve_surface(&scheme_config(&cfg)?)?.price_at_spot(cfg.market.spot)?;
            let fd_secs = started.elapsed().as_secs_f64();
            let started = std::time::Instant::now();
            let mc = mc_price(&cfg.market, cfg.samples, cfg.seed)?;
            let mc_secs = started.elapsed().as_secs_f64();
            let gap_se = (fd - mc.mean).abs() / mc.std_error;
            let mk = |study: &str, value: f64, error: Option<f64>, seconds: f64| StudyRow {
                study: study.into(),
                alpha: cfg.market.alpha,
                theta: cfg.theta,
                n: cfg.grid.space_intervals,
                time_steps: cfg.grid.time_steps,
                value,
                error,
                seconds,
            };
            emit(
                &cfg,
                vec![
                    mk("mc_compare_fd", fd, None, fd_secs),
                    mk("mc_compare_mc", mc.mean, Some(mc.std_error), mc_secs),
                ],
                &[
                    format!("finite difference: {}", sig6(fd)),
                    format!(
                        "monte carlo: {} (std error {}, M = {})",
                        sig6(mc.mean),
                        sig6(mc.std_error),
                        mc.samples
                    ),
                    format!("|difference| = {} standard errors", sig6(gap_se)),
                ],
            )
        }
        Command::Stability(common) => {
            let (cfg, _) = gather(&common, CommandKind::Stability)?;
            let v = verdict(
                cfg.theta,
                cfg.market.alpha,
                &cfg.market.coefficients(),
                cfg.grid.dt(cfg.market.maturity),
                cfg.grid.dx(),
            );
            if !v.stable() {
                eprintln!("warning: configuration is outside both stability regimes");
            }
            let row = StudyRow {
                study: "stability".into(),
                alpha: cfg.market.alpha,
                theta: cfg.theta,
                n: cfg.grid.space_intervals,
                time_steps: cfg.grid.time_steps,
                value: if v.stable() { 1.0 } else { 0.0 },
                error: None,
                seconds: 0.0,
            };
            emit(
                &cfg,
                vec![row],
                &[
                    format!("unconditional: {}", v.unconditional),
                    format!("conditional: {}", v.conditional),
                    format!("verdict: {}", if v.stable() { "stable" } else { "unstable" }),
                ],
            )
        }
        Command::Converge(args) => {
            let (cfg, merged) = gather(&args.common, CommandKind::Converge)?;
            let variable = args
                .variable
                .map(|v| match v {
                    VariableArg::Time => "time".to_string(),
                    VariableArg::Space => "space".to_string(),
                })
                .or(merged.variable)
                .unwrap_or_else(|| "time".to_string());
            // The order studies default to the implicit scheme; only an
            // explicit --theta (or config key) overrides that.
            let theta_override = merged.theta.is_some().then_some(cfg.theta);
            let report = match variable.as_str() {
                "time" => {
                    let mut proto = TemporalProtocol::new(cfg.market.alpha);
                    if let Some(theta) = theta_override {
                        proto.theta = theta;
                    }
                    if let Some(n) = merged.n {
                        proto.space_intervals = n;
                    }
                    if let Some(steps) = merged.time_steps {
                        proto.coarse_steps = Some(steps);
                    }
                    if let Some(steps) = args.reference_steps.or(merged.reference_steps) {
                        proto.reference_steps = steps;
                    }
                    run_temporal_study(cfg.market.alpha, &proto)?
                }
                "space" => {
                    let mut proto = SpatialProtocol::new(cfg.market.alpha);
                    if let Some(theta) = theta_override {
                        proto.theta = theta;
                    }
                    if let Some(n) = merged.n {
                        proto.coarse_intervals = n;
                    }
                    if let Some(steps) = merged.time_steps {
                        proto.time_steps = steps;
                    }
                    if let Some(n) = args.reference_n.or(merged.reference_n) {
                        proto.reference_intervals = n;
                    }
                    if let Some(steps) = args.reference_steps.or(merged.reference_steps) {
                        proto.reference_time_steps = steps;
                    }
                    run_spatial_study(cfg.market.alpha, &proto)?
                }
                other => {
                    return Err(Failure::Usage(format!(
                        "invalid value for `variable`: expected time or space, got `{other}`"
                    )))
                }
            };
            let rows = vec![StudyRow::from(&report)];
            persist(&cfg, &rows, &rows[0].study.clone())?;
            emit(
                &cfg,
                rows,
                &[format!(
                    "empirical order: {} (theoretical {}, relative error {})",
                    sig6(report.empirical_order),
                    sig6(report.theoretical_order),
                    sig6(report.relative_error)
                )],
            )
        }
        Command::ErrorGrid(args) => {
            let (cfg, merged) = gather(&args.common, CommandKind::ErrorGrid)?;
            let mut proto = ErrorGridProtocol::new();
            proto.market = cfg.market;
            proto.x_min = cfg.grid.x_min;
            proto.x_max = cfg.grid.x_max;
            proto.upper_boundary = cfg.upper_boundary;
            if let Some(thetas) = args.thetas.or(merged.thetas) {
                proto.thetas = thetas;
            }
            if let Some(raw) = args.cells {
                proto.cells = config::parse_cells("cells", &raw)?;
            } else if let Some(cells) = merged.cells {
                proto.cells = cells;
            }
            let cells = run_error_grid(&proto)?;
            let rows: Vec<StudyRow> = cells.iter().map(|c| c.to_row(cfg.market.alpha)).collect();
            persist(&cfg, &rows, "error_grid")?;
            let mut human = Vec::new();
            for cell in &cells {
                human.push(format!(
                    "theta {} ({}, {}): price {} error {}% in {}s{}",
                    sig6(cell.theta),
                    cell.space_intervals,
                    cell.time_steps,
                    sig6(cell.price),
                    sig6(cell.relative_error * 100.0),
                    sig6(cell.seconds),
                    if cell.stable { "" } else { " [unstable]" },
                ));
            }
            emit(&cfg, rows, &human)
        }
        Command::AlphaSweep(args) => {
            let (cfg, merged) = gather(&args.common, CommandKind::AlphaSweep)?;
            let mut proto = AlphaSweepProtocol::new();
            proto.market = cfg.market;
            proto.x_min = cfg.grid.x_min;
            proto.x_max = cfg.grid.x_max;
            proto.seed = cfg.seed;
            if merged.n.is_some() {
                proto.space_intervals = cfg.grid.space_intervals;
            }
            if merged.time_steps.is_some() {
                proto.time_steps = cfg.grid.time_steps;
            }
            if let Some(alphas) = args.alphas.or(merged.alphas) {
                proto.alphas = alphas;
            }
            if let Some(maturities) = args.maturities.or(merged.maturities) {
                proto.maturities = maturities;
            }
            if let Some(strikes) = args.strikes.or(merged.strikes) {
                proto.strikes = strikes;
            }
            proto.mc_samples = args.mc_samples.or(merged.mc_samples);
            // A fixed --theta overrides the optimal-per-alpha default.
            if merged.theta.as_deref().is_some_and(|t| t != "optimal") {
                proto.theta = Some(cfg.theta);
            }
            let points = run_alpha_sweep(&proto)?;
            let rows: Vec<StudyRow> = points
                .iter()
                .flat_map(|p| p.to_rows(proto.space_intervals, proto.time_steps))
                .collect();
            persist(&cfg, &rows, "alpha_sweep")?;
            let human = points
                .iter()
                .map(|p| {
                    let mc_part = match p.mc {
                        Some(mc) => format!(
                            " mc {} (se {})",
                            sig6(mc.mean),
                            sig6(mc.std_error)
                        ),
                        None => String::new(),
                    };
                    format!(
                        "T {} K {} alpha {} theta {}: price {}{}",
                        sig6(p.maturity),
                        sig6(p.strike),
                        sig6(p.alpha),
                        sig6(p.theta),
                        sig6(p.price),
                        mc_part
                    )
                })
                .collect::<Vec<_>>();
            emit(&cfg, rows, &human)
        }
    }
}
