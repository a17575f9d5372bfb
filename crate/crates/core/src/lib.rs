//! Lifetimes of time-changed Markov processes.
//!
//! A base process `X` killed on leaving a domain is run on two random clocks
//! built from a Bernstein symbol `Φ`: the subordinator `H` with Laplace
//! exponent `Φ` and its inverse `L_t = inf{s ≥ 0 : H_s > t}`. The crate
//! estimates the lifetimes `ζ^H` and `ζ^L` by Monte Carlo, evaluates the
//! closed forms they should match, and decides whether the clock delays or
//! rushes the base process.
//!
//! The analytic layer ([`symbols`], [`specfun`], [`formulas`], [`operators`],
//! [`quad`]) is generic over the scalar type through [`Real`]; the Monte Carlo
//! layer works in `f64`. Concrete aliases for the common case live at the
//! crate root.

pub mod classify;
pub mod config;
pub mod error;
pub mod estimate;
pub mod experiments;
pub mod formulas;
pub mod operators;
pub mod processes;
pub mod quad;
pub mod real;
pub mod sampling;
pub mod specfun;
pub mod symbols;

pub use classify::{Evidence, Label, Verdict};
pub use error::{Error, Result};
pub use estimate::MonteCarloEstimate;
pub use processes::{BaseProcess, Domain, LifetimeMethod, LifetimeSample};
pub use real::Real;
pub use sampling::{FbmPath, RngStream, SubordinatorPath};
pub use symbols::BernsteinSymbol;

/// Bernstein symbol over `f64`.
pub type Symbol = symbols::BernsteinSymbol<f64>;
/// Bernstein symbol over `f32`.
pub type Symbol32 = symbols::BernsteinSymbol<f32>;
/// Sampled function over `f64`, the input of the `D^Φ` operator.
pub type SampledFn = operators::SampledFunction<f64>;
/// Mittag-Leffler parameters over `f64`.
pub type MlParams = specfun::MlParams<f64>;
/// Closed-form record over `f64`.
pub type ClosedForm = formulas::ClosedForm<f64>;
