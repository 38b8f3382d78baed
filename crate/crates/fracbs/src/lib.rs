//! European option pricing under a subdiffusive Black–Scholes model.
//!
//! The underlying follows a time-changed geometric Brownian motion whose
//! operational clock is an inverse α-stable subordinator; the fair call price
//! solves a fractional-in-time pricing PDE. This crate provides:
//!
//! - a weighted (θ) finite-difference solver for that PDE, built on the L1
//!   quadrature of the Caputo derivative ([`scheme`], [`caputo`]);
//! - stability predicates for the scheme and the optimal-θ selector
//!   ([`stability`]);
//! - the classical Black–Scholes closed form, which the solver reproduces as
//!   α → 1 ([`closed_form`]);
//! - an independent Monte Carlo pricer using exact sampling of the inverse
//!   subordinator marginal ([`mc`]);
//! - convergence-order and error/time studies with CSV/JSON emission
//!   ([`harness`], [`report`]).

pub mod caputo;
pub mod closed_form;
pub mod error;
pub mod harness;
pub mod mc;
pub mod model;
pub mod report;
pub mod scheme;
pub mod special;
pub mod stability;

pub use error::{Error, Result};
pub use model::{GridSpec, MarketParams, PdeCoefficients, UpperBoundary};
pub use scheme::{price_call, solve_surface, SchemeConfig, SolutionSurface};
pub use stability::optimal_theta;
