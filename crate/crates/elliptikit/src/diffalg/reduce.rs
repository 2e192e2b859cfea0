//! Constructive reduction modulo the derivation: every element decomposes
//! uniquely as `constant + span{g_n} + d(something)`, and the multi-point
//! extension decomposes sums of puncture translates the same way.
//!
//! At each top weight `m` the symbol is split as a multiple of the symbol
//! of `g_m` plus a `Y^2`-divisible rest; the rest is matched by the graded
//! image of the derivation, whose matrix on the monomial basis is produced
//! by deriving the basis lifts themselves (so the linear step can never
//! drift out of sync with the derivation).

use super::poly::{e_poly, g_poly, EllipticPoly};
use super::scalar::Scalar;
use crate::config::EvalContext;
use crate::error::{Error, Result};
use crate::exact::{QC, XyPoly};
use crate::C64;
use num_rational::BigRational;
use num_traits::Zero;
use std::collections::BTreeMap;

/// Exact decomposition `input = c + sum_n lambda_n g_n + d(primitive)`.
#[derive(Clone, Debug)]
pub struct ReductionResult {
    pub c: Scalar,
    pub lambdas: BTreeMap<u32, Scalar>,
    pub primitive: EllipticPoly,
}

impl ReductionResult {
    /// Reassemble the decomposed element (used by the round-trip checks).
    pub fn reassemble(&self) -> EllipticPoly {
        let mut out = EllipticPoly::constant(self.c.clone());
        for (&n, lam) in &self.lambdas {
            out = out.add(&g_poly(n).scale(lam));
        }
        out.add(&self.primitive.derive())
    }

    pub fn eval_c(&self, ec: &EvalContext) -> C64 {
        self.c.eval(&ec.ctx)
    }
}

/// Basis monomial of the weight-`w` source space `C X^w + Y^2 C[X,Y]_{w-2}`:
/// either the pure `X^w` or `Y^a X^b` with `a >= 2`.
#[derive(Clone, Copy, Debug, PartialEq)]
struct SymBasis {
    x: u32,
    y: u32,
}

fn source_basis(w: u32) -> Vec<SymBasis> {
    let mut out = Vec::new();
    if w >= 1 {
        out.push(SymBasis { x: w, y: 0 });
    }
    for y in 2..=w {
        out.push(SymBasis { x: w - y, y });
    }
    out
}

fn target_basis(w: u32) -> Vec<SymBasis> {
    (2..=w).map(|y| SymBasis { x: w - y, y }).collect()
}

/// Lift `Y^a X^b` to `E_a X^b` (and `X^w` to itself); the symbol of the
/// lift is the requested monomial.
fn lift(b: SymBasis) -> EllipticPoly {
    if b.y == 0 {
        EllipticPoly::monomial((0, 0, b.x as u16), Scalar::one())
    } else {
        e_poly(b.y).mul(&EllipticPoly::monomial((0, 0, b.x as u16), Scalar::one()))
    }
}

fn qc_to_rationals(c: &QC) -> Option<(BigRational, BigRational)> {
    Some((c.re.clone(), c.im.clone()))
}

/// Extract the rational entry of a symbol coefficient; the graded matrix of
/// the derivation is rational by construction.
fn rational_entry(s: &Scalar) -> Result<BigRational> {
    match s.as_qc() {
        Some(c) => {
            let (re, im) = qc_to_rationals(&c).unwrap();
            if !im.is_zero() {
                return Err(Error::SingularReduction);
            }
            Ok(re)
        }
        None => Err(Error::SingularReduction),
    }
}

/// Solve the square rational system `M x = rhs` with scalar right-hand
/// sides by fraction-free Gaussian elimination over the rationals.
fn solve_rational_system(
    mut m: Vec<Vec<BigRational>>,
    mut rhs: Vec<Scalar>,
) -> Result<Vec<Scalar>> {
    let n = m.len();
    for col in 0..n {
        // pivot
        let piv = (col..n)
            .find(|&r| !m[r][col].is_zero())
            .ok_or(Error::SingularReduction)?;
        m.swap(col, piv);
        rhs.swap(col, piv);
        let pivot = m[col][col].clone();
        for r in 0..n {
            if r == col || m[r][col].is_zero() {
                continue;
            }
            let factor = &m[r][col] / &pivot;
            for c in col..n {
                let sub = &m[col][c] * &factor;
                m[r][c] = &m[r][c] - &sub;
            }
            let adj = rhs[col].scale_qc(&QC::from_rational(factor));
            rhs[r] = rhs[r].sub(&adj);
        }
    }
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let inv = QC::from_rational(BigRational::new(
            m[i][i].denom().clone(),
            m[i][i].numer().clone(),
        ));
        out.push(rhs[i].scale_qc(&inv));
    }
    Ok(out)
}

/// One homogeneous step: match the weight-`m` symbol `sigma` by
/// `mu * symbol(g_m) + d(lift)`, returning `(mu, lift)`.
fn match_top_symbol(sigma: &XyPoly<Scalar>, m: u32) -> Result<(Scalar, EllipticPoly)> {
    // coefficient of X^m in symbol(g_m) is 1/m!
    let mut mfact = 1i64;
    for k in 2..=m as i64 {
        mfact *= k;
    }
    let mu = sigma.coeff(m, 0).scale_qc(&QC::from_int(mfact));
    let g_sym = lift_rational_symbol(&crate::kronecker::graded_symbol_closed_form(m));
    let rho = sigma.sub(&g_sym.scale(&mu));
    // rho must be Y^2-divisible of degree m
    for &(i, j) in rho.terms.keys() {
        debug_assert_eq!(i + j, m);
        if j < 2 {
            return Err(Error::SingularReduction);
        }
    }
    let src = source_basis(m - 1);
    let tgt = target_basis(m);
    if src.is_empty() {
        return Ok((mu, EllipticPoly::zero()));
    }
    debug_assert_eq!(src.len(), tgt.len());
    // matrix of the graded derivation on the basis lifts
    let mut mat = vec![vec![BigRational::zero(); src.len()]; tgt.len()];
    let mut lifts = Vec::with_capacity(src.len());
    for (jcol, &b) in src.iter().enumerate() {
        let l = lift(b);
        let image = l.derive().graded_symbol_at(m);
        for (irow, &t) in tgt.iter().enumerate() {
            let entry = image.coeff(t.x, t.y);
            if !entry.is_zero() {
                mat[irow][jcol] = rational_entry(&entry)?;
            }
        }
        lifts.push(l);
    }
    let rhs: Vec<Scalar> = tgt.iter().map(|&t| rho.coeff(t.x, t.y)).collect();
    let coeffs = solve_rational_system(mat, rhs)?;
    let mut v = EllipticPoly::zero();
    for (c, l) in coeffs.iter().zip(&lifts) {
        v = v.add(&l.scale(c));
    }
    Ok((mu, v))
}

fn lift_rational_symbol(p: &XyPoly<BigRational>) -> XyPoly<Scalar> {
    let mut out = XyPoly::zero();
    for (&(i, j), c) in &p.terms {
        out.insert(i, j, Scalar::from_qc(QC::from_rational(c.clone())));
    }
    out
}

/// Exact decomposition of an element as
/// `constant + sum lambda_n g_n + derivative`.
pub fn reduce_mod_derivative(u: &EllipticPoly) -> Result<ReductionResult> {
    let mut rest = u.clone();
    let mut lambdas = BTreeMap::new();
    let mut primitive = EllipticPoly::zero();
    loop {
        match rest.filtration_degree() {
            None => {
                return Ok(ReductionResult {
                    c: Scalar::zero(),
                    lambdas,
                    primitive,
                });
            }
            Some(0) => {
                let c = rest.terms.get(&(0, 0, 0)).cloned().unwrap_or_else(Scalar::zero);
                return Ok(ReductionResult {
                    c,
                    lambdas,
                    primitive,
                });
            }
            Some(m) => {
                let sigma = rest.graded_symbol_at(m);
                let (mu, v) = match_top_symbol(&sigma, m)?;
                if !mu.is_zero() {
                    lambdas
                        .entry(m)
                        .and_modify(|l: &mut Scalar| *l = l.add(&mu))
                        .or_insert_with(|| mu.clone());
                }
                rest = rest.sub(&g_poly(m).scale(&mu)).sub(&v.derive());
                primitive = primitive.add(&v);
                debug_assert!(
                    rest.filtration_degree().map(|d| d < m).unwrap_or(true),
                    "reduction failed to lower the degree at weight {}",
                    m
                );
            }
        }
    }
}

/// A finite sum of puncture translates of algebra elements; component `s`
/// stands for the translate of its value by the puncture representative.
#[derive(Clone, Debug, Default)]
pub struct MultiPointElement {
    pub components: BTreeMap<u16, EllipticPoly>,
}

impl MultiPointElement {
    pub fn new() -> Self {
        MultiPointElement {
            components: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, s: u16, p: EllipticPoly) {
        match self.components.get_mut(&s) {
            Some(v) => *v = v.add(&p),
            None => {
                self.components.insert(s, p);
            }
        }
    }

    /// Numeric value: each component evaluated at `z - rep(s)`.
    pub fn eval(&self, ec: &EvalContext, z: C64) -> Result<C64> {
        let mut total = C64::new(0.0, 0.0);
        for (&s, p) in &self.components {
            total += p.eval(ec, z - ec.punctures.rep(s))?;
        }
        Ok(total)
    }
}

/// Result of the componentwise multi-point reduction: one global constant,
/// translate coefficients per puncture and index, and a primitive of the
/// same multi-point shape.
#[derive(Clone, Debug)]
pub struct MultiPointReduction {
    pub c: Scalar,
    pub lambdas: BTreeMap<(u16, u32), Scalar>,
    pub primitive: MultiPointElement,
}

impl MultiPointReduction {
    /// Numeric value of `c + sum lambda_{s,n} T_s(g_n) + d(primitive)` at z.
    pub fn eval(&self, ec: &EvalContext, z: C64) -> Result<C64> {
        let mut total = self.c.eval(&ec.ctx);
        for (&(s, n), lam) in &self.lambdas {
            let rep = ec.punctures.rep(s);
            total += lam.eval(&ec.ctx) * ec.table.g(n, z - rep)?;
        }
        for (&s, p) in &self.primitive.components {
            total += p.derive().eval(ec, z - ec.punctures.rep(s))?;
        }
        Ok(total)
    }
}

pub fn reduce_multipoint(m: &MultiPointElement) -> Result<MultiPointReduction> {
    let mut c = Scalar::zero();
    let mut lambdas = BTreeMap::new();
    let mut primitive = MultiPointElement::new();
    for (&s, p) in &m.components {
        let r = reduce_mod_derivative(p)?;
        c = c.add(&r.c);
        for (n, lam) in r.lambdas {
            lambdas
                .entry((s, n))
                .and_modify(|l: &mut Scalar| *l = l.add(&lam))
                .or_insert(lam);
        }
        primitive.insert(s, r.primitive);
    }
    Ok(MultiPointReduction {
        c,
        lambdas,
        primitive,
    })
}
