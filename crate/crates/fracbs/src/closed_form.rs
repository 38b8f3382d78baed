//! Classical Black–Scholes prices: the α → 1 reference for the solver and the
//! integrand of the Monte Carlo representation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use crate::special::normal_cdf;

/// Call and put quote with the standardized moneyness terms.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BsQuote {
    pub call: f64,
    pub put: f64,
    pub d_plus: f64,
    pub d_minus: f64,
}

fn validate(z0: f64, strike: f64, t: f64, sigma: f64) -> Result<()> {
    if z0 <= 0.0 || z0.is_nan() {
        return Err(Error::invalid("spot", format!("must be > 0, got {z0}")));
    }
    if strike <= 0.0 || strike.is_nan() {
        return Err(Error::invalid("strike", format!("must be > 0, got {strike}")));
    }
    if sigma <= 0.0 || sigma.is_nan() {
        return Err(Error::invalid("sigma", format!("must be > 0, got {sigma}")));
    }
    if t < 0.0 || t.is_nan() {
        return Err(Error::invalid("t", format!("must be ≥ 0, got {t}")));
    }
    Ok(())
}

/// Full quote. The put comes from its own formula rather than from parity, so
/// the parity identity stays a meaningful consistency check.
pub fn bs_quote(z0: f64, strike: f64, t: f64, rate: f64, sigma: f64) -> Result<BsQuote> {
    validate(z0, strike, t, sigma)?;
    if t == 0.0 {
        // d± are singular at expiry; both legs collapse to their payoffs.
        return Ok(BsQuote {
            call: (z0 - strike).max(0.0),
            put: (strike - z0).max(0.0),
            d_plus: f64::INFINITY * (z0 - strike).signum(),
            d_minus: f64::INFINITY * (z0 - strike).signum(),
        });
    }
    let vol = sigma * t.sqrt();
    let d_plus = ((z0 / strike).ln() + (rate + 0.5 * sigma * sigma) * t) / vol;
    let d_minus = d_plus - vol;
    let discounted_strike = strike * (-rate * t).exp();
    Ok(BsQuote {
        call: z0 * normal_cdf(d_plus) - discounted_strike * normal_cdf(d_minus),
        put: discounted_strike * normal_cdf(-d_minus) - z0 * normal_cdf(-d_plus),
        d_plus,
        d_minus,
    })
}

/// Classical call price.
pub fn bs_call(z0: f64, strike: f64, t: f64, rate: f64, sigma: f64) -> Result<f64> {
    Ok(bs_quote(z0, strike, t, rate, sigma)?.call)
}

/// Put price implied by put–call parity: P = C − Z₀ + K e^{−rt}.
pub fn bs_put_via_parity(call: f64, z0: f64, strike: f64, t: f64, rate: f64) -> f64 {
    call - z0 + strike * (-rate * t).exp()
}
