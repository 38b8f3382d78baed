//! Market parameters, the log-price transform, PDE coefficients, payoffs and
//! boundary data for the pricing problem.
//!
//! In log coordinates `x = ln z` the option value `u(x, t)` (with `t` counted
//! from the payoff, i.e. `u(·, 0)` is the payoff itself) satisfies a
//! fractional-in-time convection-diffusion-reaction equation with constant
//! coefficients `a = σ²/2`, `b = r − σ²/2`, `c = r` on a truncated domain
//! `[x_min, x_max]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default log-price truncation used by the experiments.
pub const DEFAULT_X_MIN: f64 = -20.0;
pub const DEFAULT_X_MAX: f64 = 10.0;

/// Market and contract parameters of the pricing problem.
///
/// `alpha` is the subdiffusion exponent: values in `(0, 1)` are accepted by
/// the PDE solver, `alpha = 1` only by the closed-form module.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketParams {
    /// Volatility per sqrt-year, > 0.
    pub sigma: f64,
    /// Risk-free rate per year, ≥ 0.
    pub rate: f64,
    /// Strike, > 0.
    pub strike: f64,
    /// Maturity in years, > 0.
    pub maturity: f64,
    /// Spot price, > 0.
    pub spot: f64,
    /// Subdiffusion exponent in (0, 1].
    pub alpha: f64,
}

impl MarketParams {
    pub fn new(
        sigma: f64,
        rate: f64,
        strike: f64,
        maturity: f64,
        spot: f64,
        alpha: f64,
    ) -> Result<Self> {
        let params = Self {
            sigma,
            rate,
            strike,
            maturity,
            spot,
            alpha,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &'static str, value: f64| -> Result<()> {
            if value.is_finite() && value > 0.0 {
                Ok(())
            } else {
                Err(Error::invalid(name, format!("must be > 0, got {value}")))
            }
        };
        positive("sigma", self.sigma)?;
        positive("strike", self.strike)?;
        positive("maturity", self.maturity)?;
        positive("spot", self.spot)?;
        if !self.rate.is_finite() || self.rate < 0.0 {
            return Err(Error::invalid("rate", format!("must be ≥ 0, got {}", self.rate)));
        }
        if !self.alpha.is_finite() || self.alpha <= 0.0 || self.alpha > 1.0 {
            return Err(Error::invalid(
                "alpha",
                format!("must lie in (0, 1], got {}", self.alpha),
            ));
        }
        Ok(())
    }

    /// The finite-difference path additionally needs `alpha < 1`.
    pub fn validate_for_pde(&self) -> Result<()> {
        self.validate()?;
        if self.alpha >= 1.0 {
            return Err(Error::invalid(
                "alpha",
                format!("the PDE solver requires alpha < 1, got {}", self.alpha),
            ));
        }
        Ok(())
    }

    /// Constant PDE coefficients in log coordinates.
    pub fn coefficients(&self) -> PdeCoefficients {
        let a = 0.5 * self.sigma * self.sigma;
        PdeCoefficients {
            diffusion: a,
            drift: self.rate - a,
            reaction: self.rate,
        }
    }
}

/// Coefficients of the log-price equation: `a u_xx + b u_x − c u`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PdeCoefficients {
    /// a = σ²/2
    pub diffusion: f64,
    /// b = r − σ²/2
    pub drift: f64,
    /// c = r
    pub reaction: f64,
}

/// Space-time mesh: `n` space intervals over `[x_min, x_max]`, `N` time steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    /// Number of space intervals n (nodes are 0..=n).
    pub space_intervals: usize,
    /// Number of time steps N (levels are 0..=N).
    pub time_steps: usize,
}

impl GridSpec {
    pub fn new(x_min: f64, x_max: f64, space_intervals: usize, time_steps: usize) -> Result<Self> {
        if !x_min.is_finite() || !x_max.is_finite() || x_min >= x_max {
            return Err(Error::invalid(
                "x_min",
                format!("x_min must be below x_max, got [{x_min}, {x_max}]"),
            ));
        }
        if space_intervals < 3 {
            return Err(Error::GridTooCoarse {
                min: 3,
                got: space_intervals,
            });
        }
        if time_steps < 1 {
            return Err(Error::invalid("time_steps", "must be ≥ 1".to_string()));
        }
        Ok(Self {
            x_min,
            x_max,
            space_intervals,
            time_steps,
        })
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.space_intervals as f64
    }

    pub fn dt(&self, maturity: f64) -> f64 {
        maturity / self.time_steps as f64
    }

    /// x-coordinate of node i.
    pub fn node(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }
}

/// Which discount clock the upper boundary uses.
///
/// `PayoffCompatible` discounts by the elapsed time of the reversed clock, so
/// the boundary meets the initial condition at the corner: q(0) = payoff(x_max)
/// whenever e^{x_max} > K. `RemainingTime` discounts by T − t instead; it is
/// kept for reproduction studies but is discontinuous against the payoff at
/// t = 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum UpperBoundary {
    #[default]
    PayoffCompatible,
    RemainingTime,
}

/// Natural-log transform of a price.
pub fn to_log_coords(z: f64) -> Result<f64> {
    if !z.is_finite() || z <= 0.0 {
        return Err(Error::invalid("z", format!("price must be > 0, got {z}")));
    }
    Ok(z.ln())
}

/// Call payoff in log coordinates: max(e^x − K, 0).
pub fn call_payoff(x: f64, strike: f64) -> f64 {
    (x.exp() - strike).max(0.0)
}

/// Put payoff in log coordinates: max(K − e^x, 0).
pub fn put_payoff(x: f64, strike: f64) -> f64 {
    (strike - x.exp()).max(0.0)
}

/// Lower boundary of the call problem: identically zero.
pub fn lower_boundary(_t: f64) -> f64 {
    0.0
}

/// Upper boundary of the call problem at reversed-clock time `t`.
pub fn upper_boundary(t: f64, params: &MarketParams, x_max: f64, convention: UpperBoundary) -> f64 {
    let discount_time = match convention {
        UpperBoundary::PayoffCompatible => t,
        UpperBoundary::RemainingTime => params.maturity - t,
    };
    x_max.exp() - params.strike * (-params.rate * discount_time).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn table3_params(alpha: f64) -> MarketParams {
        MarketParams::new(1.0, 0.04, 2.0, 4.0, 1.0, alpha).unwrap()
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn log_transform_known_points() {
        assert_eq!(to_log_coords(1.0).unwrap(), 0.0);
        assert_relative_eq!(to_log_coords(std::f64::consts::E).unwrap(), 1.0, max_relative = 1e-15);
        // Frozen reference value of ln 2, independent of the implementation.
        assert_relative_eq!(
            to_log_coords(2.0).unwrap(),
            0.693_147_180_559_945_3,
            max_relative = 1e-15
        );
        assert!(to_log_coords(0.0).is_err());
        assert!(to_log_coords(-1.0).is_err());
    }

    #[test]
    fn payoff_anchors() {
        let k = 3.7f64;
        // At-the-money boundary; exp(ln K) can land one ulp above K.
        assert!(call_payoff(k.ln(), k) <= 1e-15);
        assert_relative_eq!(call_payoff((2.0 * k).ln(), k), k, max_relative = 1e-12);
        assert_eq!(call_payoff(0.0, 2.0), 0.0);
        assert_eq!(put_payoff(0.0, 2.0), 1.0);
    }

    #[test]
    fn boundaries() {
        let p = table3_params(0.5);
        assert_eq!(lower_boundary(0.0), 0.0);
        assert_eq!(lower_boundary(p.maturity), 0.0);

        // t = 0 meets the payoff; e^10 − 2 exactly.
        let q0 = upper_boundary(0.0, &p, 10.0, UpperBoundary::PayoffCompatible);
        assert_relative_eq!(q0, 10.0f64.exp() - 2.0, max_relative = 1e-14);
        assert_relative_eq!(q0, call_payoff(10.0, p.strike), max_relative = 1e-14);

        // No discounting when r = 0.
        let p0 = MarketParams::new(1.0, 0.0, 2.0, 4.0, 1.0, 0.5).unwrap();
        for t in [0.0, 1.3, 4.0] {
            assert_relative_eq!(
                upper_boundary(t, &p0, 10.0, UpperBoundary::PayoffCompatible),
                10.0f64.exp() - 2.0,
                max_relative = 1e-14
            );
        }

        // Direct evaluation at t = 4, r = 0.04.
        let q4 = upper_boundary(4.0, &p, 10.0, UpperBoundary::PayoffCompatible);
        assert_relative_eq!(
            q4,
            10.0f64.exp() - 2.0 * (-0.16f64).exp(),
            max_relative = 1e-14
        );

        // The remaining-time convention swaps the discount argument.
        let q_rt = upper_boundary(0.0, &p, 10.0, UpperBoundary::RemainingTime);
        assert_relative_eq!(
            q_rt,
            10.0f64.exp() - 2.0 * (-0.16f64).exp(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn coefficient_map() {
        let c = table3_params(0.5).coefficients();
        assert_relative_eq!(c.diffusion, 0.5, max_relative = 1e-15);
        assert_relative_eq!(c.drift, -0.46, max_relative = 1e-15);
        assert_relative_eq!(c.reaction, 0.04, max_relative = 1e-15);

        // r = σ²/2 cancels the drift.
        let c = MarketParams::new(1.0, 0.5, 2.0, 4.0, 1.0, 0.5)
            .unwrap()
            .coefficients();
        assert_eq!(c.drift, 0.0);

        let c = MarketParams::new(2.0, 0.0, 2.0, 4.0, 1.0, 0.5)
            .unwrap()
            .coefficients();
        assert_relative_eq!(c.diffusion, 2.0, max_relative = 1e-15);
        assert_relative_eq!(c.drift, -2.0, max_relative = 1e-15);
        assert_eq!(c.reaction, 0.0);
    }

    #[test]
    fn coefficients_invert_to_market_inputs() {
        for (sigma, rate) in [(0.7, 0.03), (1.4, 0.0), (2.2, 0.11)] {
            let c = MarketParams::new(sigma, rate, 2.0, 4.0, 1.0, 0.5)
                .unwrap()
                .coefficients();
            assert_relative_eq!((2.0 * c.diffusion).sqrt(), sigma, max_relative = 1e-14);
            assert_relative_eq!(c.reaction, rate, max_relative = 1e-15);
            assert_relative_eq!(c.drift, rate - sigma * sigma / 2.0, max_relative = 1e-14);
        }
    }

    #[test]
    fn parameter_validation() {
        assert!(MarketParams::new(0.0, 0.04, 2.0, 4.0, 1.0, 0.5).is_err());
        assert!(MarketParams::new(1.0, 0.04, 2.0, 4.0, 1.0, 1.5).is_err());
        assert!(MarketParams::new(1.0, 0.04, 2.0, 4.0, 1.0, 0.0).is_err());
        // alpha = 1 is fine in general but rejected by the PDE path.
        let p = MarketParams::new(1.0, 0.04, 2.0, 4.0, 1.0, 1.0).unwrap();
        assert!(p.validate_for_pde().is_err());
        assert!(GridSpec::new(0.0, 1.0, 2, 10).is_err());
        assert!(GridSpec::new(1.0, 0.0, 10, 10).is_err());
        assert!(GridSpec::new(-1.0, 1.0, 10, 0).is_err());
    }

    proptest! {
        #[test]
        fn log_exp_round_trip(z in 1e-8f64..1e8) {
            let x = to_log_coords(z).unwrap();
            prop_assert!((x.exp() - z).abs() <= 1e-14 * z);
        }

        #[test]
        fn payoff_monotone_in_x(x in -10.0f64..10.0, dx in 0.0f64..2.0, k in 0.1f64..10.0) {
            prop_assert!(call_payoff(x + dx, k) >= call_payoff(x, k));
        }

        #[test]
        fn corner_compatibility(
            sigma in 0.05f64..3.0,
            rate in 0.0f64..0.2,
            strike in 0.1f64..10.0,
            x_max in 3.0f64..12.0,
        ) {
            let p = MarketParams::new(sigma, rate, strike, 4.0, 1.0, 0.5).unwrap();
            prop_assume!(x_max.exp() > strike);
            let q0 = upper_boundary(0.0, &p, x_max, UpperBoundary::PayoffCompatible);
            prop_assert!((q0 - call_payoff(x_max, strike)).abs() <= 1e-12 * q0.abs().max(1.0));
        }
    }
}
