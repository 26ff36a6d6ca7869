//! Numerical laboratory for quadratic-Wasserstein convergence experiments on
//! compact homogeneous spaces where every spectral quantity is exactly
//! computable: the circle R/Z, flat tori R^d/Z^d, SU(2) and SO(3).
//!
//! The crate supplies four layers:
//!
//! - [`space`] / [`spectrum`]: exact metric and Laplace spectral data
//!   (eigenvalue slices, heat-kernel sums with certified truncation tails,
//!   dispersion integrals).
//! - [`measure`] / [`process`]: symbolic measure specifications, reproducible
//!   samplers for i.i.d., teleport-mixing, random-walk and two-island
//!   processes, and analytic mixing budgets.
//! - [`fourier`] / [`wigner`] / [`lps`]: Fourier coefficients of measures on
//!   tori, irreducible unitary representations of SU(2), spectral radius of
//!   the associated Markov operator, and the quaternion generator sets of
//!   Lubotzky, Phillips and Sarnak.
//! - [`transport`] / [`bounds`]: an exact network-simplex transport solver
//!   with dual optimality certificates, an exact 1-D circular solver,
//!   semi-discrete estimation, Monte Carlo drivers, and evaluators for the
//!   explicit W2 upper bounds (smoothing inequality, mixing empirical bounds,
//!   spectral-gap bounds, stretched-exponential walk decay, quantization
//!   floors).
//!
//! All functions are pure given their inputs; samplers are deterministic in
//! `(spec, seed)` and replicate substreams are independent by construction.

pub mod bounds;
pub mod error;
pub mod fourier;
pub mod lps;
pub mod measure;
pub mod process;
pub mod quad;
pub mod quaternion;
pub mod space;
pub mod spectrum;
pub mod transport;
pub mod wigner;

pub use error::{Error, Result};
pub use space::{Point, SpaceModel};
