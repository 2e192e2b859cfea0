//! The coefficients `g_n` of the Kronecker generating series, evaluated
//! numerically from the Eisenstein functions, together with an exact
//! symbolic expansion used for the filtration and graded-symbol checks.
//!
//! Both evaluators share one code path: the truncated power-series
//! exponential of
//! `alpha*E_1 - sum_{r>=2} (-1)^r alpha^r (E_r - e_r)/r`,
//! with complex coefficients for numbers and exact rational coefficients
//! for symbols.

use crate::error::Result;
use crate::exact::{q0, q1, series_exp, XyPoly};
use crate::lattice::LatticeContext;
use crate::C64;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::collections::BTreeMap;
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

/// Memoizing evaluator for the family `g_n`.
///
/// The memo is internally synchronized; a shared reference can be queried
/// concurrently. Keys are exact bit patterns of the query point (rounding
/// is configurable through `key_digits`).
pub struct KroneckerTable {
    ctx: Arc<LatticeContext>,
    max_n: u32,
    key_digits: Option<u32>,
    memo: Mutex<HashMap<(u64, u64), Arc<Vec<C64>>>>,
}

impl KroneckerTable {
    pub fn new(ctx: Arc<LatticeContext>, max_n: u32) -> Self {
        KroneckerTable {
            ctx,
            max_n,
            key_digits: None,
            memo: Mutex::new(HashMap::new()),
        }
    }

    /// Round memo keys to the given number of decimal digits instead of
    /// keying on exact bit patterns.
    pub fn with_key_rounding(mut self, digits: u32) -> Self {
        self.key_digits = Some(digits);
        self
    }

    pub fn ctx(&self) -> &LatticeContext {
        &self.ctx
    }

    pub fn max_n(&self) -> u32 {
        self.max_n
    }

    fn key(&self, z: C64) -> (u64, u64) {
        match self.key_digits {
            None => (z.re.to_bits(), z.im.to_bits()),
            Some(d) => {
                let s = 10f64.powi(d as i32);
                (
                    ((z.re * s).round() / s).to_bits(),
                    ((z.im * s).round() / s).to_bits(),
                )
            }
        }
    }

    /// `g_n(z)`; `g_0 = 1` for every `z`, `g_1 = E_1`.
    pub fn g(&self, n: u32, z: C64) -> Result<C64> {
        Ok(self.g_all(z)?[n as usize])
    }

    /// All of `g_0..g_max(n,max_n)` at `z` in one series pass.
    pub fn g_all(&self, z: C64) -> Result<Arc<Vec<C64>>> {
        let key = self.key(z);
        if let Some(hit) = self.memo.lock().unwrap().get(&key) {
            return Ok(hit.clone());
        }
        let vals = Arc::new(g_values(&self.ctx, self.max_n, z)?);
        self.memo.lock().unwrap().insert(key, vals.clone());
        Ok(vals)
    }
}

/// Direct (un-memoized) evaluation of `g_0..g_nmax` at `z`.
///
/// Near a lattice point the generating series is factored as
/// `(1 + alpha/u) * exp(regular part)` so that the pole of `g_1` is split
/// off analytically; the naive expansion would otherwise lose precision to
/// cancellation between `E_1^k` and `E_k` terms.
pub fn g_values(ctx: &LatticeContext, nmax: u32, z: C64) -> Result<Vec<C64>> {
    let n = nmax as usize;
    let scale = ctx.tau().norm().min(1.0);
    let radius = if nmax <= 12 { 0.02 } else { 0.008 } * scale;

    // nearest parallelogram corner and total tau-shift back to z
    let p = ctx.reduce(z);
    let mut best = f64::INFINITY;
    let mut u = p.reduced;
    let mut n_shift = p.shift.1;
    for dm in 0..=1i64 {
        for dn in 0..=1i64 {
            let corner = C64::new(dm as f64, 0.0) + (dn as f64) * ctx.tau();
            let d = (p.reduced - corner).norm();
            if d < best {
                best = d;
                u = p.reduced - corner;
                n_shift = p.shift.1 + dn;
            }
        }
    }

    if best < radius {
        if best < ctx.eps_sing() {
            return Err(crate::error::Error::NearSingularity {
                z,
                nearest: z - u,
                radius: ctx.eps_sing(),
            });
        }
        let mut a = vec![C64::new(0.0, 0.0); n + 1];
        if n >= 1 {
            a[1] = e_reg_taylor(ctx, 1, u)?;
        }
        for r in 2..=n {
            let sign = if r % 2 == 0 { -1.0 } else { 1.0 };
            let er_reg = e_reg_taylor(ctx, r as u32, u)?;
            let es = ctx.eisenstein_series(r as u32)?;
            a[r] = sign * (er_reg - es) / (r as f64);
        }
        let reg = series_exp(&a);
        // multiply by (1 + alpha/u)
        let mut b = vec![C64::new(0.0, 0.0); n + 1];
        for k in 0..=n {
            b[k] = reg[k];
            if k >= 1 {
                b[k] += reg[k - 1] / u;
            }
        }
        if n_shift != 0 {
            // g-series at u + m + N tau = exp(-2 pi i N alpha) * g-series at u
            let w = C64::new(0.0, -2.0 * std::f64::consts::PI) * (n_shift as f64);
            let mut shifted = vec![C64::new(0.0, 0.0); n + 1];
            for (k, sk) in shifted.iter_mut().enumerate() {
                for (j, bj) in b.iter().enumerate().take(k + 1) {
                    let mut fact = 1.0;
                    for i in 1..=(k - j) {
                        fact *= i as f64;
                    }
                    *sk += bj * w.powu((k - j) as u32) / fact;
                }
            }
            return Ok(shifted);
        }
        return Ok(b);
    }

    let mut a = vec![C64::new(0.0, 0.0); n + 1];
    if n >= 1 {
        a[1] = ctx.eisenstein_function(1, z)?;
    }
    for r in 2..=n {
        let sign = if r % 2 == 0 { -1.0 } else { 1.0 };
        let er = ctx.eisenstein_function(r as u32, z)?;
        let es = ctx.eisenstein_series(r as u32)?;
        a[r] = sign * (er - es) / (r as f64);
    }
    Ok(series_exp(&a))
}

/// `E_r(u) - u^{-r}` via the Taylor expansion
/// `sum_{j>=0} (-1)^j C(r+j-1, j) e_{r+j} u^j`, valid near the origin.
fn e_reg_taylor(ctx: &LatticeContext, r: u32, u: C64) -> Result<C64> {
    let mut s = C64::new(0.0, 0.0);
    let mut up = C64::new(1.0, 0.0);
    for j in 0..=(crate::lattice::R_MAX - r) {
        let e = ctx.eisenstein_series(r + j)?;
        if !(e.re == 0.0 && e.im == 0.0) {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            s += sign * binom_f64(r + j - 1, j) * e * up;
        }
        up *= u;
    }
    Ok(s)
}

fn binom_f64(n: u32, k: u32) -> f64 {
    let mut v = 1.0f64;
    for i in 0..k {
        v = v * ((n - i) as f64) / ((i + 1) as f64);
    }
    v
}

/// Monomial in the free symbolic expansion: exponent of `X` (standing for
/// `g_1 = E_1`) and exponents of `Ebar_r = E_r - e_r` for `r = 2..`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct SymMono {
    pub x_exp: u32,
    /// ebar_exps[k] is the exponent of Ebar_{k+2}
    pub ebar_exps: Vec<u32>,
}

impl SymMono {
    fn one(len: usize) -> Self {
        SymMono {
            x_exp: 0,
            ebar_exps: vec![0; len],
        }
    }

    /// Filtration weight: X has weight 1 and Ebar_r has weight r.
    pub fn weight(&self) -> u32 {
        self.x_exp
            + self
                .ebar_exps
                .iter()
                .enumerate()
                .map(|(k, &e)| (k as u32 + 2) * e)
                .sum::<u32>()
    }
}

/// Exact polynomial identity for `g_n` in the commuting indeterminates
/// `X` and `Ebar_r`, `2 <= r <= n`.
#[derive(Clone, Debug, PartialEq)]
pub struct FreeSymbolicG {
    pub n: u32,
    pub poly: BTreeMap<SymMono, BigRational>,
}

type SymPoly = BTreeMap<SymMono, BigRational>;

fn sym_add_term(p: &mut SymPoly, m: SymMono, c: BigRational) {
    if c.is_zero() {
        return;
    }
    let entry = p.entry(m).or_insert_with(BigRational::zero);
    *entry += c;
    if entry.is_zero() {
        // re-fetch key to remove; BTreeMap has no entry-remove, so collect
        let zeroed: Vec<SymMono> = p
            .iter()
            .filter(|(_, v)| v.is_zero())
            .map(|(k, _)| k.clone())
            .collect();
        for k in zeroed {
            p.remove(&k);
        }
    }
}

#[derive(Clone, PartialEq)]
struct SymRing(SymPoly, usize);

impl crate::exact::CoeffField for SymRing {
    fn zero() -> Self {
        SymRing(BTreeMap::new(), 0)
    }
    fn one() -> Self {
        let mut p = BTreeMap::new();
        p.insert(SymMono::one(0), q1());
        SymRing(p, 0)
    }
    fn is_zero(&self) -> bool {
        self.0.is_empty()
    }
    fn add(&self, rhs: &Self) -> Self {
        let mut out = self.0.clone();
        for (m, c) in &rhs.0 {
            sym_add_term(&mut out, m.clone(), c.clone());
        }
        SymRing(out, self.1.max(rhs.1))
    }
    fn sub(&self, rhs: &Self) -> Self {
        let mut out = self.0.clone();
        for (m, c) in &rhs.0 {
            sym_add_term(&mut out, m.clone(), -c.clone());
        }
        SymRing(out, self.1.max(rhs.1))
    }
    fn mul(&self, rhs: &Self) -> Self {
        let len = self.1.max(rhs.1);
        let mut out = BTreeMap::new();
        for (m1, c1) in &self.0 {
            for (m2, c2) in &rhs.0 {
                let mut e = vec![0u32; len];
                for (k, v) in m1.ebar_exps.iter().enumerate() {
                    e[k] += v;
                }
                for (k, v) in m2.ebar_exps.iter().enumerate() {
                    e[k] += v;
                }
                let m = SymMono {
                    x_exp: m1.x_exp + m2.x_exp,
                    ebar_exps: e,
                };
                sym_add_term(&mut out, m, c1 * c2);
            }
        }
        SymRing(out, len)
    }
    fn neg(&self) -> Self {
        SymRing(
            self.0.iter().map(|(m, c)| (m.clone(), -c.clone())).collect(),
            self.1,
        )
    }
    fn div_int(&self, n: i64) -> Self {
        let d = BigRational::from_integer(BigInt::from(n));
        SymRing(
            self.0.iter().map(|(m, c)| (m.clone(), c / &d)).collect(),
            self.1,
        )
    }
    fn mul_int(&self, n: i64) -> Self {
        let d = BigRational::from_integer(BigInt::from(n));
        SymRing(
            self.0.iter().map(|(m, c)| (m.clone(), c * &d)).collect(),
            self.1,
        )
    }
}

/// Exact expansion of `g_n` as a polynomial in `X` and the `Ebar_r`.
pub fn g_symbolic(n: u32) -> FreeSymbolicG {
    let len = if n >= 2 { (n - 1) as usize } else { 0 };
    let size = n as usize + 1;
    let mut a = vec![SymRing(BTreeMap::new(), len); size];
    if n >= 1 {
        let mut p = BTreeMap::new();
        p.insert(
            SymMono {
                x_exp: 1,
                ebar_exps: vec![0; len],
            },
            q1(),
        );
        a[1] = SymRing(p, len);
    }
    for r in 2..=(n as usize) {
        // coefficient of alpha^r: -(-1)^r Ebar_r / r
        let mut e = vec![0u32; len];
        e[r - 2] = 1;
        let sign = if r % 2 == 0 {
            -q1()
        } else {
            q1()
        };
        let mut p = BTreeMap::new();
        p.insert(
            SymMono {
                x_exp: 0,
                ebar_exps: e,
            },
            sign / BigRational::from_integer(BigInt::from(r)),
        );
        a[r] = SymRing(p, len);
    }
    let b = series_exp(&a);
    let mut poly = b[n as usize].0.clone();
    // normalize monomial vector lengths
    poly = poly
        .into_iter()
        .map(|(mut m, c)| {
            m.ebar_exps.resize(len, 0);
            (m, c)
        })
        .collect();
    FreeSymbolicG { n, poly }
}

impl FreeSymbolicG {
    /// Substitute `X -> E_1(z)` and `Ebar_r -> E_r(z) - e_r`.
    pub fn eval(&self, ctx: &LatticeContext, z: C64) -> Result<C64> {
        let e1 = if self.n >= 1 {
            ctx.eisenstein_function(1, z)?
        } else {
            C64::new(0.0, 0.0)
        };
        let mut ebars = Vec::new();
        for r in 2..=self.n {
            ebars.push(ctx.eisenstein_function(r, z)? - ctx.eisenstein_series(r)?);
        }
        let mut total = C64::new(0.0, 0.0);
        for (m, c) in &self.poly {
            let mut term = C64::new(crate::exact::rational_to_f64(c), 0.0);
            term *= e1.powu(m.x_exp);
            for (k, &e) in m.ebar_exps.iter().enumerate() {
                if e > 0 {
                    term *= ebars[k].powu(e);
                }
            }
            total += term;
        }
        Ok(total)
    }

    /// Every monomial has filtration weight at most `n`.
    pub fn max_weight(&self) -> u32 {
        self.poly.keys().map(|m| m.weight()).max().unwrap_or(0)
    }

    /// Weight-`n` homogeneous part under `X -> X`, `Ebar_r -> Y^r`.
    pub fn graded_symbol(&self) -> XyPoly<BigRational> {
        let mut out = XyPoly::zero();
        for (m, c) in &self.poly {
            if m.weight() == self.n {
                let ydeg: u32 = m
                    .ebar_exps
                    .iter()
                    .enumerate()
                    .map(|(k, &e)| (k as u32 + 2) * e)
                    .sum();
                out.insert(m.x_exp, ydeg, c.clone());
            }
        }
        out
    }
}

/// The weight-`n` graded symbol of `g_n`, equal to
/// `(X - Y)^{n-1} (X + (n-1) Y) / n!` in exact arithmetic.
pub fn graded_symbol_of_g(n: u32) -> XyPoly<BigRational> {
    g_symbolic(n).graded_symbol()
}

/// The closed-form target `(X - Y)^{n-1} (X + (n-1) Y) / n!`.
pub fn graded_symbol_closed_form(n: u32) -> XyPoly<BigRational> {
    if n == 0 {
        return XyPoly::constant(q1());
    }
    let mut xmy: XyPoly<BigRational> = XyPoly::zero();
    xmy.insert(1, 0, q1());
    xmy.insert(0, 1, -q1());
    let mut lin: XyPoly<BigRational> = XyPoly::zero();
    lin.insert(1, 0, q1());
    lin.insert(0, 1, BigRational::from_integer(BigInt::from(n as i64 - 1)));
    let mut fact = q1();
    for k in 2..=n as i64 {
        fact *= BigRational::from_integer(BigInt::from(k));
    }
    xmy.pow(n - 1).mul(&lin).scale(&(q1() / fact))
}
