//! Symbolic-numeric toolkit for the special functions attached to a complex
//! lattice: Eisenstein functions and series, Kronecker coefficients, shuffle
//! Hopf algebras, numerically evaluated iterated integrals, regularized
//! gamma functions, elliptic hyperlogarithms, an exact differential algebra
//! with constructive reduction modulo derivatives, and uniformization of
//! branch triples.

pub mod diffalg;
pub mod error;
pub mod exact;
pub mod config;
pub mod gamma;
pub mod hyperlog;
pub mod itint;
pub mod kronecker;
pub mod lattice;
pub mod quad;
pub mod shuffle;
pub mod uniformize;

pub use error::{Error, Result};

/// Double-precision complex scalar used by every numeric evaluator.
pub type C64 = num_complex::Complex64;
