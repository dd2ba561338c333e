//! Finite-dimensional Gaussian Malliavin calculus.
//!
//! Smooth functionals `F = f(W(e₁),…,W(eₙ))` of an n-dimensional standard
//! Gaussian are represented by exact polynomials (or numeric evaluators).
//! The crate computes Malliavin derivative tensors, Wiener-chaos
//! decompositions, the Ornstein–Uhlenbeck semigroup and Gaussian Sobolev
//! norms, and ships a verifier that checks the quantitative inequalities
//! relating these objects over seeded corpora.

pub mod constants;
pub mod error;
pub mod functional;
pub mod hermite;
pub mod integrate;
pub mod malliavin;
pub mod ou;
pub mod poly;
pub mod verify;

pub use error::{Error, Result};
pub use functional::{NumericFunctional, PolyFunctional};
pub use integrate::{IntegralResult, QuadratureConfig};
pub use poly::{MultiIndex, Poly, QPoly};
