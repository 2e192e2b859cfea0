//! Exact scalar arithmetic: Gaussian rationals and homogeneous bivariate
//! polynomials used for graded symbols.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub(crate) fn q0() -> BigRational {
    <BigRational as Zero>::zero()
}

pub(crate) fn q1() -> BigRational {
    <BigRational as One>::one()
}
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// A complex number with exact rational real and imaginary parts.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QC {
    pub re: BigRational,
    pub im: BigRational,
}

impl QC {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        QC { re, im }
    }

    pub fn from_int(n: i64) -> Self {
        QC {
            re: BigRational::from_integer(BigInt::from(n)),
            im: q0(),
        }
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        QC {
            re: BigRational::new(BigInt::from(num), BigInt::from(den)),
            im: q0(),
        }
    }

    pub fn from_rational(r: BigRational) -> Self {
        QC {
            re: r,
            im: q0(),
        }
    }

    pub fn i() -> Self {
        QC {
            re: q0(),
            im: q1(),
        }
    }

    pub fn zero() -> Self {
        QC {
            re: q0(),
            im: q0(),
        }
    }

    pub fn one() -> Self {
        QC {
            re: q1(),
            im: q0(),
        }
    }

    pub fn is_zero(&self) -> bool {
        Zero::is_zero(&self.re) && Zero::is_zero(&self.im)
    }

    pub fn recip(&self) -> QC {
        let n = &self.re * &self.re + &self.im * &self.im;
        assert!(!Zero::is_zero(&n), "division by zero Gaussian rational");
        QC {
            re: &self.re / &n,
            im: -(&self.im / &n),
        }
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(rational_to_f64(&self.re), rational_to_f64(&self.im))
    }

    pub fn scale(&self, r: &BigRational) -> QC {
        QC {
            re: &self.re * r,
            im: &self.im * r,
        }
    }
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    // Exact for the small numerators/denominators that appear here; falls
    // back to a quotient of big-integer floats otherwise.
    let num = r.numer();
    let den = r.denom();
    let nf = bigint_to_f64(num);
    let df = bigint_to_f64(den);
    nf / df
}

fn bigint_to_f64(n: &BigInt) -> f64 {
    use num_traits::ToPrimitive;
    n.to_f64().unwrap_or(f64::NAN)
}

impl Add for &QC {
    type Output = QC;
    fn add(self, rhs: &QC) -> QC {
        QC {
            re: &self.re + &rhs.re,
            im: &self.im + &rhs.im,
        }
    }
}

impl Sub for &QC {
    type Output = QC;
    fn sub(self, rhs: &QC) -> QC {
        QC {
            re: &self.re - &rhs.re,
            im: &self.im - &rhs.im,
        }
    }
}

impl Mul for &QC {
    type Output = QC;
    fn mul(self, rhs: &QC) -> QC {
        QC {
            re: &self.re * &rhs.re - &self.im * &rhs.im,
            im: &self.re * &rhs.im + &self.im * &rhs.re,
        }
    }
}

impl Neg for &QC {
    type Output = QC;
    fn neg(self) -> QC {
        QC {
            re: -self.re.clone(),
            im: -self.im.clone(),
        }
    }
}

impl fmt::Display for QC {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if Zero::is_zero(&self.im) {
            write!(f, "{}", self.re)
        } else if Zero::is_zero(&self.re) {
            write!(f, "{}i", self.im)
        } else if self.im.is_negative() {
            write!(f, "{}{}i", self.re, self.im)
        } else {
            write!(f, "{}+{}i", self.re, self.im)
        }
    }
}

/// Coefficient ring abstraction shared by the shuffle algebra and the power
/// series helpers: a commutative ring with division by integers.
pub trait CoeffField: Clone + PartialEq {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    fn div_int(&self, n: i64) -> Self;
    fn mul_int(&self, n: i64) -> Self;
}

impl CoeffField for QC {
    fn zero() -> Self {
        QC::zero()
    }
    fn one() -> Self {
        QC::one()
    }
    fn is_zero(&self) -> bool {
        QC::is_zero(self)
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn neg(&self) -> Self {
        -self
    }
    fn div_int(&self, n: i64) -> Self {
        self.scale(&BigRational::new(BigInt::one(), BigInt::from(n)))
    }
    fn mul_int(&self, n: i64) -> Self {
        self.scale(&BigRational::from_integer(BigInt::from(n)))
    }
}

impl CoeffField for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn neg(&self) -> Self {
        -self
    }
    fn div_int(&self, n: i64) -> Self {
        self / (n as f64)
    }
    fn mul_int(&self, n: i64) -> Self {
        self * (n as f64)
    }
}

impl CoeffField for BigRational {
    fn zero() -> Self {
        <BigRational as Zero>::zero()
    }
    fn one() -> Self {
        <BigRational as One>::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn neg(&self) -> Self {
        -self
    }
    fn div_int(&self, n: i64) -> Self {
        self / BigRational::from_integer(BigInt::from(n))
    }
    fn mul_int(&self, n: i64) -> Self {
        self * BigRational::from_integer(BigInt::from(n))
    }
}

/// Truncated power series exponential: given `a` with `a[0] = 0`, returns `b`
/// with `b = exp(a)` up to and including degree `a.len() - 1`.
pub fn series_exp<K: CoeffField>(a: &[K]) -> Vec<K> {
    let n = a.len();
    let mut b = vec![K::zero(); n];
    if n == 0 {
        return b;
    }
    debug_assert!(a[0].is_zero(), "series_exp requires vanishing constant term");
    b[0] = K::one();
    for k in 1..n {
        // b_k = (1/k) sum_j j a_j b_{k-j}
        let mut s = K::zero();
        for j in 1..=k {
            s = s.add(&a[j].mul(&b[k - j]).mul_int(j as i64));
        }
        b[k] = s.div_int(k as i64);
    }
    b
}

/// Bivariate polynomial in `X`, `Y` with coefficients in an exact ring,
/// used for graded symbols of filtered elements.
#[derive(Clone, Debug, PartialEq)]
pub struct XyPoly<K> {
    /// map (i, j) -> coefficient of X^i Y^j
    pub terms: BTreeMap<(u32, u32), K>,
}

impl<K: CoeffField> XyPoly<K> {
    pub fn zero() -> Self {
        XyPoly {
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: K) -> Self {
        let mut p = XyPoly::zero();
        p.insert(0, 0, c);
        p
    }

    pub fn monomial(i: u32, j: u32, c: K) -> Self {
        let mut p = XyPoly::zero();
        p.insert(i, j, c);
        p
    }

    pub fn insert(&mut self, i: u32, j: u32, c: K) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&(i, j)) {
            Some(v) => {
                let s = v.add(&c);
                if s.is_zero() {
                    self.terms.remove(&(i, j));
                } else {
                    *v = s;
                }
            }
            None => {
                self.terms.insert((i, j), c);
            }
        }
    }

    pub fn coeff(&self, i: u32, j: u32) -> K {
        self.terms.get(&(i, j)).cloned().unwrap_or_else(K::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let mut out = self.clone();
        for (&(i, j), c) in &rhs.terms {
            out.insert(i, j, c.clone());
        }
        out
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        let mut out = self.clone();
        for (&(i, j), c) in &rhs.terms {
            out.insert(i, j, c.neg());
        }
        out
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let mut out = XyPoly::zero();
        for (&(i1, j1), c1) in &self.terms {
            for (&(i2, j2), c2) in &rhs.terms {
                out.insert(i1 + i2, j1 + j2, c1.mul(c2));
            }
        }
        out
    }

    pub fn scale(&self, c: &K) -> Self {
        let mut out = XyPoly::zero();
        for (&(i, j), v) in &self.terms {
            out.insert(i, j, v.mul(c));
        }
        out
    }

    /// Total degree, or None for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|&(i, j)| i + j).max()
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut deg = None;
        for &(i, j) in self.terms.keys() {
            match deg {
                None => deg = Some(i + j),
                Some(d) => {
                    if d != i + j {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// True when the polynomial lies in C.X^n + Y^2.C[X,Y] (no bare-Y terms).
    pub fn no_linear_y(&self) -> bool {
        self.terms.keys().all(|&(_, j)| j != 1)
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = XyPoly::constant(K::one());
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }
}

impl<K: CoeffField + fmt::Display> fmt::Display for XyPoly<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&(i, j), c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({})", c)?;
            if i > 0 {
                write!(f, "*X^{}", i)?;
            }
            if j > 0 {
                write!(f, "*Y^{}", j)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qc_field_ops() {
        let a = QC::from_ratio(1, 2);
        let b = QC::i();
        let p = &a * &b;
        assert_eq!(p, QC::new(q0(), BigRational::new(1.into(), 2.into())));
        let r = p.recip();
        assert_eq!(&p * &r, QC::one());
    }

    #[test]
    fn exp_series_matches_exponential() {
        // exp(x) truncated: coefficients 1/k!
        let mut a = vec![q0(); 6];
        a[1] = q1();
        let b = series_exp(&a);
        let mut fact = q1();
        for k in 1..6 {
            fact = &fact * &BigRational::from_integer(k.into());
            assert_eq!(b[k as usize], q1() / &fact);
        }
    }

    #[test]
    fn xy_poly_pow_binomial() {
        // (X + Y)^2 = X^2 + 2XY + Y^2
        let mut p: XyPoly<BigRational> = XyPoly::zero();
        p.insert(1, 0, q1());
        p.insert(0, 1, q1());
        let q = p.pow(2);
        assert_eq!(q.coeff(1, 1), BigRational::from_integer(2.into()));
        assert!(q.is_homogeneous());
    }
}
