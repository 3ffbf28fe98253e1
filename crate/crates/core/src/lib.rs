//! Numerical laboratory for Bayesian learning on quasi-regular statistical
//! models.
//!
//! A quasi-regular model is singular (the parameter-to-distribution map is
//! not one-to-one) yet behaves like a regular model of dimension g under
//! Bayes estimation: its real log canonical threshold λ and singular
//! fluctuation ν both equal g/2, the pole multiplicity is m = d - g + 1,
//! and the generalization and training errors are symmetric,
//! E[G_n] ≈ g/(2n) and E[T_n] ≈ -g/(2n).
//!
//! The crate verifies those identities numerically at desk scale:
//!
//! * [`model`] — the model zoo (true distribution, density, prior, exact
//!   K(w) evaluator) and the block-product map of the quasi-regular
//!   condition;
//! * [`mcmc`] — adaptive random-walk Metropolis sampling of the tempered
//!   posterior, with optional parallel tempering;
//! * [`estimators`] — the four per-training-set statistics G_n, T_n, V_n,
//!   and E_w[K_n];
//! * [`invariants`] — (λ, ν, m) three independent ways: symbolically from
//!   the block structure, from a two-temperature linear solve, and by
//!   regression on the Laplace integral of K;
//! * [`harness`] — a config-driven replication engine with explicit
//!   tolerance checks, CSV/JSON/gnuplot exports, and reproducible seeding.
//!
//! The numerical core is generic over the scalar type via [`real::Real`];
//! the aliases below pin the `f64` instantiation used by the harness and
//! the CLI.

pub mod blocks;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod invariants;
pub mod mcmc;
pub mod model;
pub mod quad;
pub mod real;
pub mod report;
pub mod seed;
pub mod stats;

pub use blocks::BlockStructure;
pub use error::{Error, Result};
pub use real::Real;

/// Default scalar of the experiment pipeline.
pub type Scalar = f64;

pub type Model = model::Model<Scalar>;
pub type Dataset = model::Dataset<Scalar>;
pub type PosteriorDraws = mcmc::PosteriorDraws<Scalar>;
pub type GaussHermite = quad::GaussHermite<Scalar>;
