//! Empirical convergence-order measurement and the desk-scale study runners
//! behind the `converge`, `error-grid` and `alpha-sweep` commands.
//!
//! Orders are measured with the refinement ratio
//! `p ≈ log₂((ũ(h) − u)/(ũ(h/2) − u))`, where `u` is approximated by a
//! fine-grid reference solution. Reference resolutions are part of each
//! protocol and default to the desk-scale study values.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::closed_form::bs_call;
use crate::error::{Error, Result};
use crate::mc::{mc_price, McEstimate};
use crate::model::{GridSpec, MarketParams, UpperBoundary};
use crate::scheme::{solve_surface, SchemeConfig, SolutionSurface};
use crate::stability::optimal_theta;

/// Which mesh parameter a study refines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RefinedVariable {
    Time,
    Space,
}

/// Result of one order-of-convergence measurement.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct OrderReport {
    pub variable: RefinedVariable,
    pub alpha: f64,
    pub theta: f64,
    pub empirical_order: f64,
    pub theoretical_order: f64,
    /// |empirical − theoretical| / theoretical
    pub relative_error: f64,
    /// Coarse grid of the measurement (n, N).
    pub coarse_grid: (usize, usize),
    pub seconds: f64,
}

/// Refinement-ratio order estimate from point values at step h, h/2 and a
/// fine reference.
pub fn empirical_order(u_h: f64, u_h2: f64, u_ref: f64) -> Result<f64> {
    let coarse = u_h - u_ref;
    let fine = u_h2 - u_ref;
    if coarse == 0.0 || fine == 0.0 {
        return Err(Error::DegenerateRefinement(
            "a refinement level coincides with the reference; grids are too fine or too coarse"
                .to_string(),
        ));
    }
    let ratio = coarse / fine;
    if ratio <= 0.0 {
        return Err(Error::DegenerateRefinement(format!(
            "refinement errors change sign (ratio {ratio:.3e}); not in the asymptotic regime"
        )));
    }
    Ok(ratio.log2())
}

/// Temporal-order protocol: fixed coarse space grid, the time step is halved
/// once and compared against a fine-in-time reference.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TemporalProtocol {
    pub theta: f64,
    pub market: MarketParams,
    pub x_min: f64,
    pub x_max: f64,
    pub space_intervals: usize,
    /// Coarse step count; `None` picks the per-α study default.
    pub coarse_steps: Option<usize>,
    pub reference_steps: usize,
    /// Point where solutions are compared (interpolated).
    pub eval_x: f64,
}

impl TemporalProtocol {
    /// Study defaults: T = 1, K = 2, Z₀ = σ = 1, r = 0.04 on [−1, 1] with
    /// Δx = 0.2, reference at Δt = 1/2600, read-out at x = −0.01.
    pub fn new(alpha: f64) -> Self {
        Self {
            theta: 0.0,
            market: MarketParams::new(1.0, 0.04, 2.0, 1.0, 1.0, alpha)
                .expect("study defaults are valid"),
            x_min: -1.0,
            x_max: 1.0,
            space_intervals: 10,
            coarse_steps: None,
            reference_steps: 2600,
            eval_x: -0.01,
        }
    }
}

/// Per-α coarse step counts of the temporal study (Δt of 1/100 .. 1/800).
pub fn default_temporal_steps(alpha: f64) -> usize {
    let table = [(0.1, 800), (0.3, 720), (0.5, 600), (0.7, 450), (0.99, 100)];
    table
        .iter()
        .min_by(|a, b| {
            (a.0 - alpha)
                .abs()
                .partial_cmp(&(b.0 - alpha).abs())
                .unwrap()
        })
        .unwrap()
        .1
}

fn solve_study_surface(
    theta: f64,
    market: &MarketParams,
    x_min: f64,
    x_max: f64,
    n: usize,
    steps: usize,
) -> Result<SolutionSurface> {
    let grid = GridSpec::new(x_min, x_max, n, steps)?;
    let cfg = SchemeConfig::new(theta, grid, *market)?;
    solve_surface(&cfg)
}

/// Measures the empirical temporal order for one α.
pub fn run_temporal_study(alpha: f64, proto: &TemporalProtocol) -> Result<OrderReport> {
    let started = Instant::now();
    let mut market = proto.market;
    market.alpha = alpha;
    let coarse_steps = proto.coarse_steps.unwrap_or_else(|| default_temporal_steps(alpha));

    let read = |steps: usize| -> Result<f64> {
        let surf = solve_study_surface(
            proto.theta,
            &market,
            proto.x_min,
            proto.x_max,
            proto.space_intervals,
            steps,
        )?;
        surf.interpolate(proto.eval_x, steps)
    };

    let u_h = read(coarse_steps)?;
    let u_h2 = read(2 * coarse_steps)?;
    let u_ref = read(proto.reference_steps)?;

    let empirical = empirical_order(u_h, u_h2, u_ref)?;
    let theoretical = 2.0 - alpha;
    Ok(OrderReport {
        variable: RefinedVariable::Time,
        alpha,
        theta: proto.theta,
        empirical_order: empirical,
        theoretical_order: theoretical,
        relative_error: (empirical - theoretical).abs() / theoretical,
        coarse_grid: (proto.space_intervals, coarse_steps),
        seconds: started.elapsed().as_secs_f64(),
    })
}

/// Spatial-order protocol: fixed time step for the two coarse solves, the
/// space step is halved once and compared against a reference that is fine in
/// both variables. Solutions are read at the upper edge (the last interior
/// node of each grid).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpatialProtocol {
    pub theta: f64,
    pub market: MarketParams,
    pub x_min: f64,
    pub x_max: f64,
    pub time_steps: usize,
    pub coarse_intervals: usize,
    pub reference_intervals: usize,
    pub reference_time_steps: usize,
}

impl SpatialProtocol {
    /// Study defaults: [−1, 10] with Δx = 11/200, Δt = 0.05; the reference
    /// uses Δx = 11/600 and Δt = 1/300.
    pub fn new(alpha: f64) -> Self {
        Self {
            theta: 0.0,
            market: MarketParams::new(1.0, 0.04, 2.0, 1.0, 1.0, alpha)
                .expect("study defaults are valid"),
            x_min: -1.0,
            x_max: 10.0,
            time_steps: 20,
            coarse_intervals: 200,
            reference_intervals: 600,
            reference_time_steps: 300,
        }
    }
}

/// Measures the empirical spatial order for one α.
pub fn run_spatial_study(alpha: f64, proto: &SpatialProtocol) -> Result<OrderReport> {
    let started = Instant::now();
    let mut market = proto.market;
    market.alpha = alpha;

    let read = |n: usize, steps: usize| -> Result<f64> {
        let surf = solve_study_surface(proto.theta, &market, proto.x_min, proto.x_max, n, steps)?;
        Ok(surf.value(n - 1, steps))
    };

    let u_h = read(proto.coarse_intervals, proto.time_steps)?;
    let u_h2 = read(2 * proto.coarse_intervals, proto.time_steps)?;
    let u_ref = read(proto.reference_intervals, proto.reference_time_steps)?;

    let empirical = empirical_order(u_h, u_h2, u_ref)?;
    Ok(OrderReport {
        variable: RefinedVariable::Space,
        alpha,
        theta: proto.theta,
        empirical_order: empirical,
        theoretical_order: 2.0,
        relative_error: (empirical - 2.0).abs() / 2.0,
        coarse_grid: (proto.coarse_intervals, proto.time_steps),
        seconds: started.elapsed().as_secs_f64(),
    })
}

/// Error/time grid over θ and mesh sizes against the closed-form reference.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErrorGridProtocol {
    pub market: MarketParams,
    pub x_min: f64,
    pub x_max: f64,
    pub thetas: Vec<f64>,
    /// (space intervals, time steps) per column.
    pub cells: Vec<(usize, usize)>,
    pub upper_boundary: UpperBoundary,
}

impl ErrorGridProtocol {
    /// Defaults: α = 0.999, σ = 1, r = 0.04, T = 4, K = 2, Z₀ = 1 on
    /// [−20, 10]; the θ rows and mesh columns of the error/time study.
    pub fn new() -> Self {
        Self {
            market: MarketParams::new(1.0, 0.04, 2.0, 4.0, 1.0, 0.999)
                .expect("study defaults are valid"),
            x_min: -20.0,
            x_max: 10.0,
            thetas: vec![0.0, 0.25, 0.5, 0.6, 0.9],
            cells: vec![
                (5000, 140),
                (3000, 100),
                (500, 50),
                (100, 20),
                (200, 200),
                (50, 1300),
            ],
            upper_boundary: UpperBoundary::default(),
        }
    }
}

impl Default for ErrorGridProtocol {
    fn default() -> Self {
        Self::new()
    }
}

/// One cell of the error grid.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ErrorGridCell {
    pub theta: f64,
    pub space_intervals: usize,
    pub time_steps: usize,
    pub price: f64,
    /// |price − reference| / reference against the closed-form price.
    pub relative_error: f64,
    pub seconds: f64,
    pub stable: bool,
}

/// Runs every (θ, mesh) cell; unstable cells report their blown-up errors.
pub fn run_error_grid(proto: &ErrorGridProtocol) -> Result<Vec<ErrorGridCell>> {
    let m = &proto.market;
    let reference = bs_call(m.spot, m.strike, m.maturity, m.rate, m.sigma)?;
    let mut cells = Vec::with_capacity(proto.thetas.len() * proto.cells.len());
    for &theta in &proto.thetas {
        for &(n, steps) in &proto.cells {
            let started = Instant::now();
            let grid = GridSpec::new(proto.x_min, proto.x_max, n, steps)?;
            let cfg = SchemeConfig::new(theta, grid, *m)?.with_upper_boundary(proto.upper_boundary);
            let surf = solve_surface(&cfg)?;
            let price = surf.price_at_spot(m.spot)?;
            cells.push(ErrorGridCell {
                theta,
                space_intervals: n,
                time_steps: steps,
                price,
                relative_error: (price - reference).abs() / reference,
                seconds: started.elapsed().as_secs_f64(),
                stable: surf.stability().stable(),
            });
        }
    }
    Ok(cells)
}

/// Price sweep over maturities, fractional orders and strikes, with an
/// optional Monte Carlo overlay.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlphaSweepProtocol {
    pub market: MarketParams,
    pub x_min: f64,
    pub x_max: f64,
    pub space_intervals: usize,
    pub time_steps: usize,
    pub maturities: Vec<f64>,
    pub alphas: Vec<f64>,
    pub strikes: Vec<f64>,
    /// Fixed weight; `None` resolves the optimal θ per α.
    pub theta: Option<f64>,
    /// Draw count of the Monte Carlo overlay; `None` disables it.
    pub mc_samples: Option<u64>,
    pub seed: u64,
}

impl AlphaSweepProtocol {
    /// Defaults: Z₀ = σ = 1, r = 0.04, K = 2 on a (1000, 140) mesh with the
    /// optimal weight per α.
    pub fn new() -> Self {
        Self {
            market: MarketParams::new(1.0, 0.04, 2.0, 4.0, 1.0, 0.5)
                .expect("study defaults are valid"),
            x_min: -20.0,
            x_max: 10.0,
            space_intervals: 1000,
            time_steps: 140,
            maturities: vec![0.5, 1.0, 2.0, 4.0],
            alphas: vec![0.3, 0.5, 0.7, 0.9],
            strikes: vec![2.0],
            theta: None,
            mc_samples: None,
            seed: 0,
        }
    }
}

impl Default for AlphaSweepProtocol {
    fn default() -> Self {
        Self::new()
    }
}

/// One sweep cell: FD price and optional MC estimate.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SweepPoint {
    pub maturity: f64,
    pub alpha: f64,
    pub theta: f64,
    pub strike: f64,
    pub price: f64,
    pub seconds: f64,
    pub mc: Option<McEstimate>,
}

pub fn run_alpha_sweep(proto: &AlphaSweepProtocol) -> Result<Vec<SweepPoint>> {
    let mut points = Vec::new();
    for &maturity in &proto.maturities {
        for &alpha in &proto.alphas {
            for &strike in &proto.strikes {
                let started = Instant::now();
                let mut market = proto.market;
                market.maturity = maturity;
                market.alpha = alpha;
                market.strike = strike;
                market.validate()?;
                let theta = proto.theta.unwrap_or_else(|| optimal_theta(alpha));
                let grid = GridSpec::new(
                    proto.x_min,
                    proto.x_max,
                    proto.space_intervals,
                    proto.time_steps,
                )?;
                let cfg = SchemeConfig::new(theta, grid, market)?;
                let price = solve_surface(&cfg)?.price_at_spot(market.spot)?;
                let mc = match proto.mc_samples {
                    Some(samples) => Some(mc_price(&market, samples, proto.seed)?),
                    None => None,
                };
                points.push(SweepPoint {
                    maturity,
                    alpha,
                    theta,
                    strike,
                    price,
                    seconds: started.elapsed().as_secs_f64(),
                    mc,
                });
            }
        }
    }
    Ok(points)
}
