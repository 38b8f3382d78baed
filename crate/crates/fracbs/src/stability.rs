//! Stability predicates of the weighted scheme and the optimal-θ selector.
//!
//! The scheme is stable when either the weight is small enough for the given
//! fractional order (unconditional regime) or a mesh-dependent inequality
//! holds (conditional regime). Both tests come from the von Neumann analysis
//! of the error recursion; the conditional form bounds the worst Fourier mode.

use serde::{Deserialize, Serialize};

use crate::model::PdeCoefficients;
use crate::special::gamma;

/// b_0 − b_1 = 2 − 2^{1−α}, the first weight gap of the L1 sequence.
fn first_weight_gap(alpha: f64) -> f64 {
    2.0 - (1.0 - alpha).exp2()
}

/// Outcome of the stability test for one configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StabilityVerdict {
    /// Weight-only test: stable for every mesh.
    pub unconditional: bool,
    /// Mesh-dependent inequality at the given Δt, Δx.
    pub conditional: bool,
}

impl StabilityVerdict {
    pub fn stable(&self) -> bool {
        self.unconditional || self.conditional
    }
}

/// Mesh-independent stability test: θ − (1−θ)(2 − 2^{1−α}) ≤ 0, equivalently
/// 1 − log₂(2 − θ/(1−θ)) ≤ α on the domain where the logarithm exists.
///
/// θ ≥ 2/3 can never satisfy it (the log form leaves its domain there) and
/// θ = 1 is always false; both fall out of the algebraic form directly.
pub fn unconditional_predicate(theta: f64, alpha: f64) -> bool {
    theta - (1.0 - theta) * first_weight_gap(alpha) <= 0.0
}

/// Mesh-dependent stability test:
/// d·(θ − (1−θ)(b₀−b₁))·((4a/Δx² + c)² + (b/Δx)²) ≤ 2c(b₀−b₁)
/// with d = Γ(2−α)·Δt^α.
pub fn conditional_predicate(
    theta: f64,
    alpha: f64,
    coeffs: &PdeCoefficients,
    dt: f64,
    dx: f64,
) -> bool {
    let gap = first_weight_gap(alpha);
    let d = gamma(2.0 - alpha) * dt.powf(alpha);
    let mode_bound = (4.0 * coeffs.diffusion / (dx * dx) + coeffs.reaction).powi(2)
        + (coeffs.drift / dx).powi(2);
    d * (theta - (1.0 - theta) * gap) * mode_bound <= 2.0 * coeffs.reaction * gap
}

/// Combined verdict for one (θ, α, mesh) configuration.
pub fn verdict(
    theta: f64,
    alpha: f64,
    coeffs: &PdeCoefficients,
    dt: f64,
    dx: f64,
) -> StabilityVerdict {
    StabilityVerdict {
        unconditional: unconditional_predicate(theta, alpha),
        conditional: conditional_predicate(theta, alpha, coeffs, dt, dx),
    }
}

/// Largest weight that keeps the scheme unconditionally stable:
/// θ̂_α = (2 − 2^{1−α})/(3 − 2^{1−α}). Increases from 0 at α → 0 to 1/2 at
/// α = 1, where the scheme becomes the classical Crank–Nicolson method.
pub fn optimal_theta(alpha: f64) -> f64 {
    assert!(
        alpha > 0.0 && alpha <= 1.0,
        "optimal theta needs alpha in (0, 1]"
    );
    let pow = (1.0 - alpha).exp2();
    (2.0 - pow) / (3.0 - pow)
}
