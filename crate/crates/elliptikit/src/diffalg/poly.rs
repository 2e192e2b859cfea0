//! Canonical elements of the differential algebra generated by the
//! Weierstrass functions and `g_1`: polynomials in `P`, `Q`, `X` with
//! scalar coefficients, reduced so that the `Q`-degree is at most one via
//! the curve equation `Q^2 = 4 P^3 - g2 P - g3`.
//!
//! The derivation is `dP = Q`, `dQ = 6 P^2 - g2/2`, `dX = -(P + e2)`; the
//! filtration weight of `P^a Q^b X^j` is `2a + 3b + j` (pole order at the
//! origin plus degree in `g_1`).

use super::scalar::{e_sym, Scalar};
use crate::config::EvalContext;
use crate::error::Result;
use crate::exact::{QC, XyPoly};
use crate::C64;
use std::collections::BTreeMap;
use std::fmt;

/// exponents of (P, Q, X) with Q-degree <= 1 in canonical form
pub type PolyMono = (u16, u16, u16);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EllipticPoly {
    pub terms: BTreeMap<PolyMono, Scalar>,
}

impl EllipticPoly {
    pub fn zero() -> Self {
        EllipticPoly {
            terms: BTreeMap::new(),
        }
    }

    pub fn one() -> Self {
        EllipticPoly::constant(Scalar::one())
    }

    pub fn constant(c: Scalar) -> Self {
        let mut p = EllipticPoly::zero();
        p.insert((0, 0, 0), c);
        p
    }

    pub fn p() -> Self {
        EllipticPoly::monomial((1, 0, 0), Scalar::one())
    }

    pub fn q() -> Self {
        EllipticPoly::monomial((0, 1, 0), Scalar::one())
    }

    pub fn x() -> Self {
        EllipticPoly::monomial((0, 0, 1), Scalar::one())
    }

    pub fn monomial(m: PolyMono, c: Scalar) -> Self {
        let mut p = EllipticPoly::zero();
        p.insert_reduced(m, c);
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn insert(&mut self, m: PolyMono, c: Scalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(v) => {
                let s = v.add(&c);
                if s.is_zero() {
                    self.terms.remove(&m);
                } else {
                    *v = s;
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    /// Insert a monomial, rewriting `Q^2 -> 4 P^3 - g2 P - g3` until the
    /// Q-degree is at most one.
    fn insert_reduced(&mut self, m: PolyMono, c: Scalar) {
        if c.is_zero() {
            return;
        }
        if m.1 <= 1 {
            self.insert(m, c);
            return;
        }
        let rest = (m.0, m.1 - 2, m.2);
        // * 4 P^3
        self.insert_reduced((rest.0 + 3, rest.1, rest.2), c.scale_qc(&QC::from_int(4)));
        // - g2 P
        self.insert_reduced(
            (rest.0 + 1, rest.1, rest.2),
            c.mul(&Scalar::g2()).neg(),
        );
        // - g3
        self.insert_reduced(rest, c.mul(&Scalar::g3()).neg());
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.insert(*m, c.clone());
        }
        out
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.insert(*m, c.neg());
        }
        out
    }

    pub fn neg(&self) -> Self {
        EllipticPoly {
            terms: self.terms.iter().map(|(m, c)| (*m, c.neg())).collect(),
        }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let mut out = EllipticPoly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                out.insert_reduced(
                    (m1.0 + m2.0, m1.1 + m2.1, m1.2 + m2.2),
                    c1.mul(c2),
                );
            }
        }
        out
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        let mut out = EllipticPoly::zero();
        for (m, v) in &self.terms {
            out.insert(*m, v.mul(c));
        }
        out
    }

    pub fn scale_qc(&self, c: &QC) -> Self {
        let mut out = EllipticPoly::zero();
        for (m, v) in &self.terms {
            out.insert(*m, v.scale_qc(c));
        }
        out
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = EllipticPoly::one();
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    /// The derivation extending `d/dz` through `P = wp(z)`, `Q = wp'(z)`,
    /// `X = g_1(z)`.
    pub fn derive(&self) -> Self {
        let dq = EllipticPoly::monomial((2, 0, 0), Scalar::from_int(6)).add(
            &EllipticPoly::constant(Scalar::g2().div_int(2).neg()),
        );
        let dx = EllipticPoly::p().neg().add(&EllipticPoly::constant(
            Scalar::e2().neg(),
        ));
        let mut out = EllipticPoly::zero();
        for (&(a, b, j), c) in &self.terms {
            // d(P^a) term: a P^{a-1} Q * rest
            if a > 0 {
                out = out.add(&EllipticPoly::monomial(
                    (a - 1, b + 1, j),
                    c.scale_qc(&QC::from_int(a as i64)),
                ));
            }
            // d(Q^b): b Q^{b-1} dQ (b <= 1 in canonical form)
            if b > 0 {
                let base = EllipticPoly::monomial(
                    (a, b - 1, j),
                    c.scale_qc(&QC::from_int(b as i64)),
                );
                out = out.add(&base.mul(&dq));
            }
            // d(X^j): j X^{j-1} dX
            if j > 0 {
                let base = EllipticPoly::monomial(
                    (a, b, j - 1),
                    c.scale_qc(&QC::from_int(j as i64)),
                );
                out = out.add(&base.mul(&dx));
            }
        }
        out
    }

    /// Max filtration weight `2a + 3b + j`; None for the zero element.
    pub fn filtration_degree(&self) -> Option<u32> {
        self.terms
            .keys()
            .map(|&(a, b, j)| 2 * a as u32 + 3 * b as u32 + j as u32)
            .max()
    }

    /// Weight-`w` part of the symbol under `P -> Y^2`, `Q -> -2 Y^3`,
    /// `X -> X` (scalars carry weight zero).
    pub fn graded_symbol_at(&self, w: u32) -> XyPoly<Scalar> {
        let mut out = XyPoly::zero();
        for (&(a, b, j), c) in &self.terms {
            let weight = 2 * a as u32 + 3 * b as u32 + j as u32;
            if weight == w {
                let ydeg = 2 * a as u32 + 3 * b as u32;
                let coeff = if b % 2 == 1 {
                    c.scale_qc(&QC::from_int(-(1i64 << b)))
                } else {
                    c.scale_qc(&QC::from_int(1i64 << b))
                };
                out.insert(j as u32, ydeg, coeff);
            }
        }
        out
    }

    /// Symbol of the top-weight part.
    pub fn graded_symbol(&self) -> XyPoly<Scalar> {
        match self.filtration_degree() {
            None => XyPoly::zero(),
            Some(d) => self.graded_symbol_at(d),
        }
    }

    /// Numeric evaluation against the lattice functions.
    pub fn eval(&self, ec: &EvalContext, z: C64) -> Result<C64> {
        let p = ec.ctx.wp(z)?;
        let q = ec.ctx.wp_prime(z)?;
        let x = ec.ctx.eisenstein_function(1, z)?;
        let mut total = C64::new(0.0, 0.0);
        for (&(a, b, j), c) in &self.terms {
            total += c.eval(&ec.ctx)
                * p.powu(a as u32)
                * q.powu(b as u32)
                * x.powu(j as u32);
        }
        Ok(total)
    }
}

/// `E_r` as an element of the algebra: `E_2 = P + e2` and
/// `E_{r+1} = -E_r' / r`.
pub fn e_poly(r: u32) -> EllipticPoly {
    assert!(r >= 2);
    let mut e = EllipticPoly::p().add(&EllipticPoly::constant(Scalar::e2()));
    let mut k = 2;
    while k < r {
        e = e.derive().scale_qc(&QC::from_ratio(-1, k as i64));
        k += 1;
    }
    e
}

/// `E_r - e_r` as an element of the algebra.
pub fn ebar_poly(r: u32) -> EllipticPoly {
    e_poly(r).sub(&EllipticPoly::constant(e_sym(r)))
}

impl crate::exact::CoeffField for EllipticPoly {
    fn zero() -> Self {
        EllipticPoly::zero()
    }
    fn one() -> Self {
        EllipticPoly::one()
    }
    fn is_zero(&self) -> bool {
        EllipticPoly::is_zero(self)
    }
    fn add(&self, rhs: &Self) -> Self {
        EllipticPoly::add(self, rhs)
    }
    fn sub(&self, rhs: &Self) -> Self {
        EllipticPoly::sub(self, rhs)
    }
    fn mul(&self, rhs: &Self) -> Self {
        EllipticPoly::mul(self, rhs)
    }
    fn neg(&self) -> Self {
        EllipticPoly::neg(self)
    }
    fn div_int(&self, n: i64) -> Self {
        self.scale_qc(&QC::from_ratio(1, n))
    }
    fn mul_int(&self, n: i64) -> Self {
        self.scale_qc(&QC::from_int(n))
    }
}

/// `g_n` as an exact element of the algebra, through the truncated
/// exponential of `X alpha - sum_{r>=2} (-1)^r alpha^r (E_r - e_r)/r`.
pub fn g_poly(n: u32) -> EllipticPoly {
    let size = n as usize + 1;
    let mut a = vec![EllipticPoly::zero(); size];
    if n >= 1 {
        a[1] = EllipticPoly::x();
    }
    for r in 2..=(n as usize) {
        let sign = if r % 2 == 0 { -1 } else { 1 };
        a[r] = ebar_poly(r as u32).scale_qc(&QC::from_ratio(sign, r as i64));
    }
    crate::exact::series_exp(&a)[n as usize].clone()
}

impl fmt::Display for EllipticPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&(a, b, j), c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({})", c)?;
            for (name, e) in [("P", a), ("Q", b), ("X", j)] {
                if e == 1 {
                    write!(f, "*{}", name)?;
                } else if e > 1 {
                    write!(f, "*{}^{}", name, e)?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
pub(crate) mod testutil {
    use super::*;
    use rand::Rng;
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn random_poly(rng: &mut ChaCha8Rng, max_weight: u32) -> EllipticPoly {
        let mut p = EllipticPoly::zero();
        let n_terms = rng.gen_range(1..=4);
        for _ in 0..n_terms {
            loop {
                let a = rng.gen_range(0..=2u16);
                let b = rng.gen_range(0..=1u16);
                let j = rng.gen_range(0..=3u16);
                if 2 * a as u32 + 3 * b as u32 + j as u32 <= max_weight {
                    let num = rng.gen_range(-4i64..=4);
                    let den = rng.gen_range(1i64..=3);
                    let im = rng.gen_range(-2i64..=2);
                    let c = QC::new(
                        num_rational::BigRational::new(num.into(), den.into()),
                        num_rational::BigRational::new(im.into(), 2.into()),
                    );
                    p = p.add(&EllipticPoly::monomial((a, b, j), Scalar::from_qc(c)));
                    break;
                }
            }
        }
        p
    }
}

#[cfg(test)]
mod tests {
    use super::testutil::random_poly;
    use super::*;
    use crate::config::Punctures;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn env() -> EvalContext {
        EvalContext::new(C64::new(0.0, 1.0), Punctures::origin_only(), 8).unwrap()
    }

    #[test]
    fn q_squared_reduces_to_cubic() {
        let qq = EllipticPoly::q().mul(&EllipticPoly::q());
        let want = EllipticPoly::monomial((3, 0, 0), Scalar::from_int(4))
            .add(&EllipticPoly::p().scale(&Scalar::g2()).neg())
            .add(&EllipticPoly::constant(Scalar::g3()).neg());
        assert_eq!(qq, want);
    }

    #[test]
    fn one_is_multiplicative_unit() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let u = random_poly(&mut rng, 6);
            assert_eq!(u.mul(&EllipticPoly::one()), u);
        }
    }

    #[test]
    fn binomial_square_without_q() {
        let s = EllipticPoly::p().add(&EllipticPoly::x());
        let sq = s.mul(&s);
        let want = EllipticPoly::monomial((2, 0, 0), Scalar::one())
            .add(&EllipticPoly::monomial((1, 0, 1), Scalar::from_int(2)))
            .add(&EllipticPoly::monomial((0, 0, 2), Scalar::one()));
        assert_eq!(sq, want);
    }

    #[test]
    fn derivation_basics() {
        // dX = -P - e2
        let dx = EllipticPoly::x().derive();
        let want = EllipticPoly::p()
            .neg()
            .add(&EllipticPoly::constant(Scalar::e2().neg()));
        assert_eq!(dx, want);
        // dP = Q
        assert_eq!(EllipticPoly::p().derive(), EllipticPoly::q());
        // the curve relation is a constant of the derivation
        let rel = EllipticPoly::q()
            .mul(&EllipticPoly::q())
            .sub(&EllipticPoly::monomial((3, 0, 0), Scalar::from_int(4)))
            .add(&EllipticPoly::p().scale(&Scalar::g2()))
            .add(&EllipticPoly::constant(Scalar::g3()));
        assert!(rel.is_zero());
        // and d(Q^2 - 4P^3 + g2 P + g3) = 0 computed without reduction:
        // d(Q)*2Q == d(4P^3 - g2 P - g3) after canonicalization
        let dq = EllipticPoly::q().derive();
        let lhs = dq.mul(&EllipticPoly::q()).scale_qc(&QC::from_int(2));
        let rhs = EllipticPoly::monomial((2, 0, 0), Scalar::from_int(12))
            .sub(&EllipticPoly::constant(Scalar::g2()))
            .mul(&EllipticPoly::q());
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn leibniz_rule_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..8 {
            let u = random_poly(&mut rng, 6);
            let v = random_poly(&mut rng, 6);
            let lhs = u.mul(&v).derive();
            let rhs = u.derive().mul(&v).add(&u.mul(&v.derive()));
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn e_poly_low_cases() {
        // E_3 = -Q/2
        assert_eq!(
            e_poly(3),
            EllipticPoly::q().scale_qc(&QC::from_ratio(-1, 2))
        );
        // E_4 = P^2 - g2/12
        let want = EllipticPoly::monomial((2, 0, 0), Scalar::one())
            .sub(&EllipticPoly::constant(Scalar::g2().div_int(12)));
        assert_eq!(e_poly(4), want);
    }

    #[test]
    fn g_poly_small_cases() {
        assert_eq!(g_poly(0), EllipticPoly::one());
        assert_eq!(g_poly(1), EllipticPoly::x());
        // g_2 = (X^2 - P)/2
        let want = EllipticPoly::monomial((0, 0, 2), Scalar::from_ratio(1, 2))
            .sub(&EllipticPoly::p().scale_qc(&QC::from_ratio(1, 2)));
        assert_eq!(g_poly(2), want);
    }

    #[test]
    fn filtration_degrees_and_symbols() {
        assert_eq!(EllipticPoly::x().filtration_degree(), Some(1));
        assert_eq!(EllipticPoly::p().filtration_degree(), Some(2));
        assert_eq!(EllipticPoly::q().filtration_degree(), Some(3));
        // symbol of X is X, symbol of P is Y^2, symbol of Q is -2 Y^3
        let sx = EllipticPoly::x().graded_symbol();
        assert_eq!(sx.coeff(1, 0), Scalar::one());
        let sp = EllipticPoly::p().graded_symbol();
        assert_eq!(sp.coeff(0, 2), Scalar::one());
        let sq = EllipticPoly::q().graded_symbol();
        assert_eq!(sq.coeff(0, 3), Scalar::from_int(-2));
    }

    #[test]
    fn g_poly_symbol_matches_closed_form() {
        for n in 0..=8u32 {
            let sym = g_poly(n).graded_symbol();
            let want = crate::kronecker::graded_symbol_closed_form(n);
            // compare coefficientwise after lifting the rational target
            assert_eq!(g_poly(n).filtration_degree(), Some(n));
            for (&(i, j), c) in &want.terms {
                let got = sym.coeff(i, j);
                assert_eq!(
                    got.as_qc().map(|q| q.re),
                    Some(c.clone()),
                    "n={} coeff ({},{})",
                    n,
                    i,
                    j
                );
            }
            assert_eq!(sym.terms.len(), want.terms.len(), "n={}", n);
        }
    }

    #[test]
    fn symbol_multiplicative_when_degrees_add() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..10 {
            let u = random_poly(&mut rng, 5);
            let v = random_poly(&mut rng, 5);
            let (du, dv) = match (u.filtration_degree(), v.filtration_degree()) {
                (Some(a), Some(b)) => (a, b),
                _ => continue,
            };
            let uv = u.mul(&v);
            assert!(uv.filtration_degree().unwrap_or(0) <= du + dv);
            if uv.filtration_degree() == Some(du + dv) {
                let prod = u.graded_symbol().mul(&v.graded_symbol());
                assert_eq!(uv.graded_symbol(), prod);
            }
        }
    }

    #[test]
    fn numeric_consistency() {
        let ec = env();
        let zs = [C64::new(0.31, 0.21), C64::new(0.52, 0.66), C64::new(0.18, 0.43)];
        // E_r polynomials match the lattice evaluator
        for r in 2..=6u32 {
            let poly = e_poly(r);
            for &z in &zs {
                let sym = poly.eval(&ec, z).unwrap();
                let num = ec.ctx.eisenstein_function(r, z).unwrap();
                assert!(
                    (sym - num).norm() < 1e-8 * num.norm().max(1.0),
                    "r={} z={} {} vs {}",
                    r,
                    z,
                    sym,
                    num
                );
            }
        }
        // g_n polynomials match the Kronecker evaluator
        for n in 0..=6u32 {
            let poly = g_poly(n);
            for &z in &zs {
                let sym = poly.eval(&ec, z).unwrap();
                let num = ec.table.g(n, z).unwrap();
                assert!(
                    (sym - num).norm() < 1e-8 * num.norm().max(1.0),
                    "n={} z={}",
                    n,
                    z
                );
            }
        }
    }
}
