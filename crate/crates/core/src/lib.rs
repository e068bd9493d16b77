//! Conditional limit laws for random pairs with a polar representation
//! `X = R·u(T)`, `Y = R·v(T)`.
//!
//! The crate is organised around the pipeline of a verification run:
//!
//! - [`model`]: radial/angular laws and shape functions, builtin families,
//!   grid validation of the regularity assumptions, and the key–value
//!   config format.
//! - [`asymptotics`]: the normalizers `ψ(x)`, `φ_σ(x)`, `φ*(x)`, the mixture
//!   weights `p_σ`, `q_σ`, and the closed-form tail asymptotic.
//! - [`limitlaw`]: limit densities, exact limit samplers and the bivariate
//!   pushforward maps.
//! - [`montecarlo`]: exact conditional sampling given `{X > x}`.
//! - [`oracle`]: Γ, adaptive quadrature and quadrature ground truth.
//! - [`stats`]: KS / χ² distances and convergence tables.

// Node and weight tables keep their published digits; NaN-rejecting range
// checks are written as negated comparisons on purpose.
#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod error;
pub mod limitlaw;
pub mod model;
pub mod montecarlo;
pub mod oracle;
pub mod rng;
pub mod stats;

pub use asymptotics::Normalizers;
pub use error::{Error, Result};
pub use limitlaw::{CorollaryCase, LimitLawOneSided, LimitLawTwoSided, SignLaw};
pub use model::{PolarModel, Sidedness, Sign};
pub use montecarlo::{Condition, ConditionalSample, NormScale};
pub use oracle::QuadratureResult;
pub use rng::SeedStream;
