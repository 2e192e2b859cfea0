//! Exact symbolic differential algebra in the Weierstrass model: canonical
//! polynomials in `P = wp`, `Q = wp'`, `X = g_1` over the scalar ring
//! `Q(i)[e2, g2, g3]`, with the pole-order filtration, graded symbols, the
//! constructive reduction modulo derivatives, and its additive multi-point
//! extension.

mod poly;
mod reduce;
mod scalar;

pub use poly::{e_poly, ebar_poly, g_poly, EllipticPoly, PolyMono};
pub use reduce::{
    reduce_mod_derivative, reduce_multipoint, MultiPointElement, MultiPointReduction,
    ReductionResult,
};
pub use scalar::{e_sym, Scalar, ScalarMono};
