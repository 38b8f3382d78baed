//! Weighted finite-difference scheme for the fractional pricing equation.
//!
//! Space is discretized with central differences on the interior nodes
//! i = 1..n−1, time with the L1 quadrature. Each step solves the tridiagonal
//! system `C u^{k+1} = rhs(history, boundaries, θ B u^k)` where
//! `C = θ I + (1−θ) A`, `A` is the implicit stencil matrix and `B = I − A` its
//! explicit counterpart. θ = 0 is the fully implicit scheme, θ = 1 the fully
//! explicit one and θ = 1/2 the Crank–Nicolson analogue.

use crate::caputo::{build_weights, L1Weights};
use crate::error::{Error, Result};
use crate::model::{
    call_payoff, lower_boundary, put_payoff, upper_boundary, GridSpec, MarketParams, UpperBoundary,
};
use crate::stability::{self, StabilityVerdict};

/// Tridiagonal matrix stored by diagonals.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    /// Sub-diagonal, length m − 1.
    pub lower: Vec<f64>,
    /// Main diagonal, length m.
    pub diag: Vec<f64>,
    /// Super-diagonal, length m − 1.
    pub upper: Vec<f64>,
}

impl Tridiagonal {
    pub fn identity(m: usize) -> Self {
        Self {
            lower: vec![0.0; m.saturating_sub(1)],
            diag: vec![1.0; m],
            upper: vec![0.0; m.saturating_sub(1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// y = M·v
    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        let m = self.dim();
        debug_assert_eq!(v.len(), m);
        let mut y = vec![0.0; m];
        for i in 0..m {
            let mut acc = self.diag[i] * v[i];
            if i > 0 {
                acc += self.lower[i - 1] * v[i - 1];
            }
            if i + 1 < m {
                acc += self.upper[i] * v[i + 1];
            }
            y[i] = acc;
        }
        y
    }

    /// Thomas elimination for M·y = rhs.
    ///
    /// No pivoting; a vanishing pivot reports the offending row instead of
    /// propagating NaNs.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let m = self.dim();
        if rhs.len() != m {
            return Err(Error::ShapeMismatch(format!(
                "rhs length {} does not match system size {m}",
                rhs.len()
            )));
        }
        if m == 0 {
            return Ok(Vec::new());
        }

        let mut c_prime = vec![0.0; m - 1];
        let mut d_prime = vec![0.0; m];

        let mut pivot = self.diag[0];
        if pivot == 0.0 || !pivot.is_finite() {
            return Err(Error::SingularSystem { row: 0 });
        }
        if m > 1 {
            c_prime[0] = self.upper[0] / pivot;
        }
        d_prime[0] = rhs[0] / pivot;

        for i in 1..m {
            pivot = self.diag[i] - self.lower[i - 1] * c_prime[i - 1];
            if pivot == 0.0 || !pivot.is_finite() {
                return Err(Error::SingularSystem { row: i });
            }
            if i < m - 1 {
                c_prime[i] = self.upper[i] / pivot;
            }
            d_prime[i] = (rhs[i] - self.lower[i - 1] * d_prime[i - 1]) / pivot;
        }

        let mut y = d_prime;
        for i in (0..m - 1).rev() {
            y[i] -= c_prime[i] * y[i + 1];
        }
        Ok(y)
    }
}

/// Weighted-scheme configuration: weight, mesh and market data.
#[derive(Debug, Clone, Copy)]
pub struct SchemeConfig {
    pub theta: f64,
    pub grid: GridSpec,
    pub params: MarketParams,
    pub upper_boundary: UpperBoundary,
}

impl SchemeConfig {
    pub fn new(theta: f64, grid: GridSpec, params: MarketParams) -> Result<Self> {
        if !(0.0..=1.0).contains(&theta) {
            return Err(Error::invalid(
                "theta",
                format!("must lie in [0, 1], got {theta}"),
            ));
        }
        params.validate_for_pde()?;
        Ok(Self {
            theta,
            grid,
            params,
            upper_boundary: UpperBoundary::default(),
        })
    }

    pub fn with_upper_boundary(mut self, convention: UpperBoundary) -> Self {
        self.upper_boundary = convention;
        self
    }

    fn weights(&self) -> Result<L1Weights> {
        build_weights(
            self.params.alpha,
            self.grid.time_steps,
            self.grid.dt(self.params.maturity),
        )
    }

    /// Stability verdict of this configuration.
    pub fn stability(&self) -> StabilityVerdict {
        stability::verdict(
            self.theta,
            self.params.alpha,
            &self.params.coefficients(),
            self.grid.dt(self.params.maturity),
            self.grid.dx(),
        )
    }
}

/// Stencil entries shared by the matrices and the boundary vector.
#[derive(Debug, Clone, Copy)]
struct Stencil {
    /// ad/Δx² − bd/(2Δx): couples to the left neighbor.
    left: f64,
    /// ad/Δx² + bd/(2Δx): couples to the right neighbor.
    right: f64,
    /// 2ad/Δx² + cd
    center: f64,
}

fn stencil(cfg: &SchemeConfig, weights: &L1Weights) -> Stencil {
    let coeffs = cfg.params.coefficients();
    let d = weights.scale();
    let dx = cfg.grid.dx();
    let diffuse = coeffs.diffusion * d / (dx * dx);
    let convect = coeffs.drift * d / (2.0 * dx);
    Stencil {
        left: diffuse - convect,
        right: diffuse + convect,
        center: 2.0 * diffuse + coeffs.reaction * d,
    }
}

/// Implicit-scheme matrix A: diag 1 + 2ad/Δx² + cd, off-diagonals
/// −(ad/Δx² ∓ bd/(2Δx)).
pub fn implicit_matrix(cfg: &SchemeConfig, weights: &L1Weights) -> Result<Tridiagonal> {
    let n = cfg.grid.space_intervals;
    if n < 3 {
        return Err(Error::GridTooCoarse { min: 3, got: n });
    }
    let m = n - 1;
    let s = stencil(cfg, weights);
    Ok(Tridiagonal {
        lower: vec![-s.left; m - 1],
        diag: vec![1.0 + s.center; m],
        upper: vec![-s.right; m - 1],
    })
}

/// Explicit-scheme matrix B with diagonal −(2ad/Δx² + cd) and off-diagonals
/// ad/Δx² ± bd/(2Δx). Assembled as the complement of A so that A + B = I
/// holds entrywise without rounding residue.
pub fn explicit_matrix(cfg: &SchemeConfig, weights: &L1Weights) -> Result<Tridiagonal> {
    let a = implicit_matrix(cfg, weights)?;
    Ok(Tridiagonal {
        lower: a.lower.iter().map(|v| -v).collect(),
        diag: a.diag.iter().map(|v| 1.0 - v).collect(),
        upper: a.upper.iter().map(|v| -v).collect(),
    })
}

/// Weighted matrix C = θI + (1−θ)A.
pub fn weighted_matrix(theta: f64, a: &Tridiagonal) -> Tridiagonal {
    let blend = |v: &[f64]| v.iter().map(|x| (1.0 - theta) * x).collect::<Vec<_>>();
    Tridiagonal {
        lower: blend(&a.lower),
        diag: a.diag.iter().map(|x| theta + (1.0 - theta) * x).collect(),
        upper: blend(&a.upper),
    }
}

/// Boundary contribution vector G at one time level, from the boundary
/// values u_0 = p(t) and u_n = q(t).
pub fn boundary_vector(
    cfg: &SchemeConfig,
    weights: &L1Weights,
    lower_value: f64,
    upper_value: f64,
) -> Vec<f64> {
    let m = cfg.grid.space_intervals - 1;
    let s = stencil(cfg, weights);
    let mut g = vec![0.0; m];
    g[0] = s.left * lower_value;
    g[m - 1] = s.right * upper_value;
    g
}

/// Full space-time solution with boundary columns attached.
#[derive(Debug, Clone)]
pub struct SolutionSurface {
    /// Row-major (N+1) × (n+1): row k holds u(x_0..x_n, t_k).
    values: Vec<f64>,
    grid: GridSpec,
    maturity: f64,
    stability: StabilityVerdict,
}

impl SolutionSurface {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn maturity(&self) -> f64 {
        self.maturity
    }

    pub fn stability(&self) -> StabilityVerdict {
        self.stability
    }

    /// u(x_i, t_k)
    pub fn value(&self, i: usize, k: usize) -> f64 {
        self.values[k * (self.grid.space_intervals + 1) + i]
    }

    pub fn level(&self, k: usize) -> &[f64] {
        let w = self.grid.space_intervals + 1;
        &self.values[k * w..(k + 1) * w]
    }

    /// Linear interpolation in x at time level k.
    pub fn interpolate(&self, x: f64, k: usize) -> Result<f64> {
        let g = &self.grid;
        if x < g.x_min || x > g.x_max {
            return Err(Error::invalid(
                "x",
                format!("{x} outside the grid [{}, {}]", g.x_min, g.x_max),
            ));
        }
        let dx = g.dx();
        let pos = (x - g.x_min) / dx;
        let i = (pos.floor() as usize).min(g.space_intervals - 1);
        let w = pos - i as f64;
        Ok((1.0 - w) * self.value(i, k) + w * self.value(i + 1, k))
    }

    /// Price read-out: u(ln spot, T).
    pub fn price_at_spot(&self, spot: f64) -> Result<f64> {
        let x = crate::model::to_log_coords(spot)?;
        self.interpolate(x, self.grid.time_steps)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Solves the scheme for a user-supplied initial condition `f(x)` and
/// boundary data `p(t)`, `q(t)`.
pub fn solve_with(
    cfg: &SchemeConfig,
    f: impl Fn(f64) -> f64,
    p: impl Fn(f64) -> f64,
    q: impl Fn(f64) -> f64,
) -> Result<SolutionSurface> {
    cfg.params.validate_for_pde()?;
    let n = cfg.grid.space_intervals;
    let steps = cfg.grid.time_steps;
    let dt = cfg.grid.dt(cfg.params.maturity);
    let theta = cfg.theta;
    let m = n - 1;

    let weights = cfg.weights()?;
    let a = implicit_matrix(cfg, &weights)?;
    let b = explicit_matrix(cfg, &weights)?;
    let c = weighted_matrix(theta, &a);

    let g_at = |k: usize| {
        let t = k as f64 * dt;
        boundary_vector(cfg, &weights, p(t), q(t))
    };

    let initial: Vec<f64> = (1..n).map(|i| f(cfg.grid.node(i))).collect();
    let mut levels: Vec<Vec<f64>> = Vec::with_capacity(steps + 1);
    levels.push(initial);

    let mut g_curr = g_at(0);
    for k in 0..steps {
        let mut rhs = if k == 0 {
            levels[0].clone()
        } else {
            weights.history_combination(&levels[..=k])?
        };
        let g_next = g_at(k + 1);
        for i in 0..m {
            rhs[i] += (1.0 - theta) * g_next[i] + theta * g_curr[i];
        }
        if theta != 0.0 {
            let bv = b.matvec(&levels[k]);
            for i in 0..m {
                rhs[i] += theta * bv[i];
            }
        }
        levels.push(c.solve(&rhs)?);
        g_curr = g_next;
    }

    // Assemble the full surface; level 0 is the initial condition on all
    // nodes, later levels take their boundary columns from p and q.
    let width = n + 1;
    let mut values = vec![0.0; (steps + 1) * width];
    for (i, v) in values[..width].iter_mut().enumerate() {
        *v = f(cfg.grid.node(i));
    }
    for k in 1..=steps {
        let t = k as f64 * dt;
        let row = &mut values[k * width..(k + 1) * width];
        row[0] = p(t);
        row[width - 1] = q(t);
        row[1..width - 1].copy_from_slice(&levels[k]);
    }

    Ok(SolutionSurface {
        values,
        grid: cfg.grid,
        maturity: cfg.params.maturity,
        stability: cfg.stability(),
    })
}

/// Solves the call problem: payoff initial data, zero lower boundary,
/// discounted-strike upper boundary.
pub fn solve_surface(cfg: &SchemeConfig) -> Result<SolutionSurface> {
    let params = cfg.params;
    let x_max = cfg.grid.x_max;
    let convention = cfg.upper_boundary;
    solve_with(
        cfg,
        |x| call_payoff(x, params.strike),
        lower_boundary,
        move |t| upper_boundary(t, &params, x_max, convention),
    )
}

/// Solves the put problem used by the parity check. At the lower truncation
/// the put is worth its discounted intrinsic value K e^{−rt} − e^{x_min};
/// at the upper truncation it is worthless.
pub fn solve_put_surface(cfg: &SchemeConfig) -> Result<SolutionSurface> {
    let params = cfg.params;
    let x_min = cfg.grid.x_min;
    solve_with(
        cfg,
        |x| put_payoff(x, params.strike),
        move |t| params.strike * (-params.rate * t).exp() - x_min.exp(),
        |_t| 0.0,
    )
}

/// FD call price: solve and read out at the spot.
pub fn price_call(cfg: &SchemeConfig) -> Result<f64> {
    solve_surface(cfg)?.price_at_spot(cfg.params.spot)
}
