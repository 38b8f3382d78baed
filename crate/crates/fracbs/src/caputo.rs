//! L1 quadrature of the Caputo time derivative.
//!
//! The derivative of order α ∈ (0, 1) is discretized with the piecewise-linear
//! kernel quadrature whose weights are `b_j = (j+1)^{1−α} − j^{1−α}` and whose
//! scale is `d = Γ(2−α)·Δt^α`. Every time step of the solver consumes the full
//! history through the combination
//! `Σ_{j=0}^{k−1} (b_j − b_{j+1}) u^{k−j} + b_k u^0`.

use crate::error::{Error, Result};
use crate::special::gamma;

/// Precomputed L1 weights for a fixed fractional order and step count.
#[derive(Debug, Clone)]
pub struct L1Weights {
    alpha: f64,
    /// b_0 .. b_{N−1}
    weights: Vec<f64>,
    /// Γ(2−α)·Δt^α
    scale: f64,
}

/// Builds the weight sequence b_0..b_{N−1} and the scale d.
///
/// The increments are evaluated as `j^{1−α}·expm1((1−α)·ln(1 + 1/j))` instead
/// of the naive power difference; the naive form loses significance once
/// 1 − α is small and j is large.
pub fn build_weights(alpha: f64, steps: usize, dt: f64) -> Result<L1Weights> {
    if !alpha.is_finite() || alpha <= 0.0 || alpha >= 1.0 {
        return Err(Error::invalid(
            "alpha",
            format!("L1 weights need alpha in (0, 1), got {alpha}"),
        ));
    }
    if steps == 0 {
        return Err(Error::invalid("steps", "need at least one time step".to_string()));
    }
    if !dt.is_finite() || dt <= 0.0 {
        return Err(Error::invalid("dt", format!("must be > 0, got {dt}")));
    }

    let s = 1.0 - alpha;
    let weights = (0..steps)
        .map(|j| {
            if j == 0 {
                1.0
            } else {
                let j = j as f64;
                (s * j.ln()).exp() * (s * (1.0 / j).ln_1p()).exp_m1()
            }
        })
        .collect();

    Ok(L1Weights {
        alpha,
        weights,
        scale: gamma(2.0 - alpha) * dt.powf(alpha),
    })
}

impl L1Weights {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// d = Γ(2−α)·Δt^α
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// b_j
    pub fn weight(&self, j: usize) -> f64 {
        self.weights[j]
    }

    /// History combination consumed by the time stepper.
    ///
    /// `levels` holds u^0..u^k (k = levels.len() − 1 ≥ 1, k < N); the result is
    /// `Σ_{j=0}^{k−1} (b_j − b_{j+1})·u^{k−j} + b_k·u^0`, elementwise.
    pub fn history_combination(&self, levels: &[Vec<f64>]) -> Result<Vec<f64>> {
        let k = levels.len().checked_sub(1).filter(|&k| k >= 1).ok_or_else(|| {
            Error::ShapeMismatch("history combination needs levels u^0..u^k with k ≥ 1".to_string())
        })?;
        if k >= self.weights.len() {
            return Err(Error::ShapeMismatch(format!(
                "level {k} exceeds the {} precomputed weights",
                self.weights.len()
            )));
        }
        let m = levels[0].len();
        if levels.iter().any(|level| level.len() != m) {
            return Err(Error::ShapeMismatch(
                "history levels differ in length".to_string(),
            ));
        }

        let mut out = vec![0.0; m];
        for j in 0..k {
            let w = self.weights[j] - self.weights[j + 1];
            let level = &levels[k - j];
            for (o, v) in out.iter_mut().zip(level) {
                *o += w * v;
            }
        }
        let w0 = self.weights[k];
        for (o, v) in out.iter_mut().zip(&levels[0]) {
            *o += w0 * v;
        }
        Ok(out)
    }
}
