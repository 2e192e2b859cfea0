//! The exact scalar ring of the differential algebra: polynomials over the
//! Gaussian rationals in the three opaque transcendentals `e2`, `g2`, `g3`.
//! Treating them symbolically keeps every reduction step exact; numeric
//! values enter only when a result is evaluated against the lattice.

use crate::exact::{q0, q1, QC};
use crate::lattice::LatticeContext;
use crate::C64;
use num_bigint::BigInt;
use num_rational::BigRational;
use std::collections::BTreeMap;
use std::fmt;

/// exponents of (e2, g2, g3)
pub type ScalarMono = [u16; 3];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scalar {
    pub terms: BTreeMap<ScalarMono, QC>,
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar {
            terms: BTreeMap::new(),
        }
    }

    pub fn one() -> Self {
        Scalar::from_qc(QC::one())
    }

    pub fn from_qc(c: QC) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert([0, 0, 0], c);
        }
        Scalar { terms }
    }

    pub fn from_int(n: i64) -> Self {
        Scalar::from_qc(QC::from_int(n))
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        Scalar::from_qc(QC::from_ratio(num, den))
    }

    pub fn e2() -> Self {
        Scalar::monomial([1, 0, 0], QC::one())
    }

    pub fn g2() -> Self {
        Scalar::monomial([0, 1, 0], QC::one())
    }

    pub fn g3() -> Self {
        Scalar::monomial([0, 0, 1], QC::one())
    }

    pub fn monomial(m: ScalarMono, c: QC) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Scalar { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The constant term, when the scalar is a plain Gaussian rational.
    pub fn as_qc(&self) -> Option<QC> {
        if self.terms.is_empty() {
            return Some(QC::zero());
        }
        if self.terms.len() == 1 {
            if let Some(c) = self.terms.get(&[0, 0, 0]) {
                return Some(c.clone());
            }
        }
        None
    }

    fn insert(&mut self, m: ScalarMono, c: QC) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(v) => {
                let s = &*v + &c;
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
            out.insert(*m, -c);
        }
        out
    }

    pub fn neg(&self) -> Self {
        Scalar {
            terms: self.terms.iter().map(|(m, c)| (*m, -c)).collect(),
        }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let mut out = Scalar::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                let m = [m1[0] + m2[0], m1[1] + m2[1], m1[2] + m2[2]];
                out.insert(m, c1 * c2);
            }
        }
        out
    }

    pub fn scale_qc(&self, c: &QC) -> Self {
        if c.is_zero() {
            return Scalar::zero();
        }
        Scalar {
            terms: self.terms.iter().map(|(m, v)| (*m, v * c)).collect(),
        }
    }

    pub fn div_int(&self, n: i64) -> Self {
        self.scale_qc(&QC::from_ratio(1, n))
    }

    pub fn eval(&self, ctx: &LatticeContext) -> C64 {
        let e2 = ctx.e2();
        let g2 = ctx.g2();
        let g3 = ctx.g3();
        let mut total = C64::new(0.0, 0.0);
        for (m, c) in &self.terms {
            total += c.to_complex()
                * e2.powu(m[0] as u32)
                * g2.powu(m[1] as u32)
                * g3.powu(m[2] as u32);
        }
        total
    }
}

/// The even lattice sums as exact elements of `Q[g2, g3]`:
/// `e4 = g2/60`, `e6 = g3/140`, and for `2n >= 8` the convolution
/// recursion `(2n+1)(2n-1)(n-3) e_{2n} = 3 sum (2m-1)(2n-2m-1) e_{2m} e_{2n-2m}`.
/// Odd indices give zero; the index 2 gives the opaque symbol `e2`.
pub fn e_sym(r: u32) -> Scalar {
    assert!(r >= 1);
    if r % 2 == 1 {
        return Scalar::zero();
    }
    match r {
        2 => Scalar::e2(),
        4 => Scalar::g2().div_int(60),
        6 => Scalar::g3().div_int(140),
        _ => {
            let n = (r / 2) as i64;
            let denom = (2 * n + 1) * (2 * n - 1) * (n - 3);
            let mut sum = Scalar::zero();
            for m in 2..=(n - 2) {
                let c = 3 * (2 * m - 1) * (2 * n - 2 * m - 1);
                let term = e_sym(2 * m as u32).mul(&e_sym((2 * n - 2 * m) as u32));
                sum = sum.add(&term.scale_qc(&QC::from_int(c)));
            }
            sum.div_int(denom)
        }
    }
}

impl crate::exact::CoeffField for Scalar {
    fn zero() -> Self {
        Scalar::zero()
    }
    fn one() -> Self {
        Scalar::one()
    }
    fn is_zero(&self) -> bool {
        Scalar::is_zero(self)
    }
    fn add(&self, rhs: &Self) -> Self {
        Scalar::add(self, rhs)
    }
    fn sub(&self, rhs: &Self) -> Self {
        Scalar::sub(self, rhs)
    }
    fn mul(&self, rhs: &Self) -> Self {
        Scalar::mul(self, rhs)
    }
    fn neg(&self) -> Self {
        Scalar::neg(self)
    }
    fn div_int(&self, n: i64) -> Self {
        Scalar::div_int(self, n)
    }
    fn mul_int(&self, n: i64) -> Self {
        self.scale_qc(&QC::from_int(n))
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let names = ["e2", "g2", "g3"];
        let mut first = true;
        for (m, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({})", c)?;
            for (i, &e) in m.iter().enumerate() {
                if e == 1 {
                    write!(f, "*{}", names[i])?;
                } else if e > 1 {
                    write!(f, "*{}^{}", names[i], e)?;
                }
            }
        }
        Ok(())
    }
}

// q0/q1 are kept for future exact manipulations on the rational parts.
#[allow(dead_code)]
fn rational_helpers() -> (BigRational, BigRational) {
    (q0(), q1())
}

#[allow(dead_code)]
fn bigint_one() -> BigInt {
    BigInt::from(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ring_identities() {
        let a = Scalar::e2().add(&Scalar::from_int(2));
        let b = Scalar::g2().sub(&Scalar::e2());
        let ab = a.mul(&b);
        let ba = b.mul(&a);
        assert_eq!(ab, ba);
        assert_eq!(a.sub(&a), Scalar::zero());
        assert_eq!(a.mul(&Scalar::one()), a);
    }

    #[test]
    fn e_sym_low_cases() {
        assert_eq!(e_sym(3), Scalar::zero());
        assert_eq!(e_sym(4), Scalar::g2().div_int(60));
        assert_eq!(e_sym(6), Scalar::g3().div_int(140));
        // e8 = 3/7 e4^2 = g2^2 / 8400
        let e8 = e_sym(8);
        let want = Scalar::g2().mul(&Scalar::g2()).div_int(8400);
        assert_eq!(e8, want);
    }

    #[test]
    fn e_sym_matches_numeric_series() {
        let ctx = LatticeContext::new(C64::new(0.3, 1.2)).unwrap();
        for r in (4..=16u32).step_by(2) {
            let sym = e_sym(r).eval(&ctx);
            let num = ctx.eisenstein_series(r).unwrap();
            assert!(
                (sym - num).norm() < 1e-12 * num.norm().max(1.0),
                "r={} sym {} num {}",
                r,
                sym,
                num
            );
        }
    }
}
