//! Random nodal sets of spectral ensembles on model manifolds.
//!
//! The crate builds orthonormal eigenbases of the Laplacian below a threshold
//! `L` on the circle, the flat 2-torus and the round 2-sphere, draws Gaussian
//! random sections over them, and measures their nodal sets three independent
//! ways:
//!
//! * direct simulation - sign-change counting on the circle, marching squares
//!   plus Newton-refined tangency detection on surfaces ([`nodal`]);
//! * the exact finite-`L` expected-density formula driven by the spectral
//!   kernel's jet covariance and Schur-complement conditioning ([`density`]);
//! * closed-form asymptotic constants assembled from the moment constants of
//!   the symbol body and expected `|det|` of trace-coupled random symmetric
//!   matrices ([`symbols`], [`randmat`], [`density`]).
//!
//! All stochastic entry points take explicit seeds and are deterministic for a
//! fixed seed regardless of worker count. Start with the runnable programs in
//! `examples/`.

pub mod density;
pub mod ensembles;
pub mod error;
pub mod experiment;
pub mod nodal;
pub mod randmat;
pub mod symbols;

pub use error::{Error, Result};
