//! Monte Carlo pricing of the subdiffusive call.
//!
//! The price admits the representation v(T) = E[h(S_α(T))] where h is the
//! classical Black–Scholes price as a function of time and S_α is the inverse
//! α-stable subordinator. For a European payoff only the marginal of S_α(T)
//! matters, and self-similarity of the subordinator gives the exact identity
//! S_α(t) =ᵈ (t / V)^α with V = U_α(1), so no path simulation is needed.
//!
//! V is drawn with the Kanter construction for totally skewed positive stable
//! variables, normalized so that E[e^{−k V}] = e^{−k^α}.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::closed_form::bs_quote;
use crate::error::{Error, Result};
use crate::model::MarketParams;

/// Samples drawn per RNG substream; estimates are invariant to how the
/// substreams are distributed over workers.
const STREAM_CHUNK: u64 = 8192;

/// Monte Carlo price estimate.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: u64,
    pub seed: u64,
}

fn open_unit(u: f64) -> f64 {
    u.clamp(1e-12, 1.0 - 1e-12)
}

/// One draw of the positive stable variable V with E[e^{−kV}] = e^{−k^α}.
pub fn sample_positive_stable(alpha: f64, rng: &mut impl Rng) -> f64 {
    debug_assert!(alpha > 0.0 && alpha < 1.0);
    let u = open_unit(rng.random::<f64>()) * PI;
    let w = -open_unit(rng.random::<f64>()).ln();
    let s1 = (alpha * u).sin() / u.sin().powf(1.0 / alpha);
    let s2 = (((1.0 - alpha) * u).sin() / w).powf((1.0 - alpha) / alpha);
    s1 * s2
}

/// One draw of the inverse subordinator marginal S_α(t) =ᵈ (t / V)^α.
pub fn sample_inverse_subordinator(alpha: f64, t: f64, rng: &mut impl Rng) -> f64 {
    debug_assert!(t > 0.0);
    (t / sample_positive_stable(alpha, rng)).powf(alpha)
}

/// Streaming mean/variance accumulator (Welford), mergeable across chunks.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if self.count == 0 {
            return other;
        }
        if other.count == 0 {
            return self;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        let mean = self.mean + delta * other.count as f64 / count as f64;
        let m2 = self.m2
            + other.m2
            + delta * delta * (self.count as f64 * other.count as f64) / count as f64;
        Moments { count, mean, m2 }
    }

    fn std_error(&self) -> f64 {
        ((self.m2 / (self.count as f64 - 1.0)).max(0.0) / self.count as f64).sqrt()
    }
}

/// Prices the call by averaging h(S_α(T)) over `samples` draws.
///
/// Sampling is split into fixed-size RNG substreams keyed off one seed, so
/// the estimate is bit-identical however many workers consume the streams.
pub fn mc_price(params: &MarketParams, samples: u64, seed: u64) -> Result<McEstimate> {
    params.validate_for_pde()?;
    if samples < 2 {
        return Err(Error::invalid(
            "samples",
            format!("standard error needs at least 2 samples, got {samples}"),
        ));
    }

    let h = |operational_time: f64| -> f64 {
        if operational_time <= 0.0 {
            return (params.spot - params.strike).max(0.0);
        }
        bs_quote(
            params.spot,
            params.strike,
            operational_time,
            params.rate,
            params.sigma,
        )
        .expect("validated parameters")
        .call
    };

    let streams = samples.div_ceil(STREAM_CHUNK);
    let mut total = Moments::default();
    for stream in 0..streams {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let in_stream = STREAM_CHUNK.min(samples - stream * STREAM_CHUNK);
        let mut local = Moments::default();
        for _ in 0..in_stream {
            let s = sample_inverse_subordinator(params.alpha, params.maturity, &mut rng);
            local.push(h(s));
        }
        total = total.merge(local);
    }

    Ok(McEstimate {
        mean: total.mean,
        std_error: total.std_error(),
        samples,
        seed,
    })
}
