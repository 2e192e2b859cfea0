//! Numeric evaluation of the lattice-attached special functions: the
//! Eisenstein functions `E_r`, the Eisenstein series `e_r`, and the
//! Weierstrass functions, together with a brute-force double-sum oracle.
//!
//! The fast evaluator realizes Eisenstein summation through the cotangent
//! identity: the inner sum over `m` collapses to `pi*cot(pi w)` (and its
//! derivatives for r >= 2), and the remaining symmetric sum over `n`
//! converges geometrically in `q = exp(2 pi i tau)`.

use crate::error::{Error, Result};
use crate::C64;
use std::f64::consts::PI;

/// Largest index for which `e_r` is cached at context construction.
pub const R_MAX: u32 = 24;

/// Immutable evaluation environment for a fixed lattice `Z + Z*tau`.
///
/// All caches are filled at construction, so a shared reference can be used
/// concurrently; every operation is a pure function of its inputs.
#[derive(Debug, Clone)]
pub struct LatticeContext {
    tau: C64,
    q: C64,
    /// e_cache[r-1] = e_r for r in 1..=R_MAX
    e_cache: Vec<C64>,
    series_truncation: usize,
    oracle_truncation: (usize, usize),
    tolerance: f64,
    eps_sing: f64,
}

/// Decomposition of a point as `z = reduced + m + n*tau` with `reduced` in
/// the half-open fundamental parallelogram `[0,1) + [0,1)*tau`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticePoint {
    pub z: C64,
    pub reduced: C64,
    pub shift: (i64, i64),
}

impl LatticeContext {
    pub fn new(tau: C64) -> Result<Self> {
        Self::with_options(tau, 64, (200, 200), 1e-8)
    }

    /// `series_truncation` caps the number of `tau`-shifts retained in the
    /// fast evaluator; the sum is stopped earlier once the tail is below
    /// 1e-17 relative to unit scale, so the default cap of 64 keeps
    /// |q|^truncation well under 1e-16 for every tau with Im tau >= 0.05.
    pub fn with_options(
        tau: C64,
        series_truncation: usize,
        oracle_truncation: (usize, usize),
        tolerance: f64,
    ) -> Result<Self> {
        if !(tau.im > 0.0) || !tau.is_finite() {
            return Err(Error::InvalidTau(tau));
        }
        let q = (C64::new(0.0, 2.0 * PI) * tau).exp();
        let eps_sing = 1e-6 * tau.norm().min(1.0);
        let mut ctx = LatticeContext {
            tau,
            q,
            e_cache: Vec::new(),
            series_truncation,
            oracle_truncation,
            tolerance,
            eps_sing,
        };
        let mut cache = Vec::with_capacity(R_MAX as usize);
        for r in 1..=R_MAX {
            cache.push(ctx.compute_e(r));
        }
        ctx.e_cache = cache;
        Ok(ctx)
    }

    pub fn tau(&self) -> C64 {
        self.tau
    }

    pub fn q(&self) -> C64 {
        self.q
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn eps_sing(&self) -> f64 {
        self.eps_sing
    }

    pub fn oracle_truncation(&self) -> (usize, usize) {
        self.oracle_truncation
    }

    pub fn e2(&self) -> C64 {
        self.e_cache[1]
    }

    /// Weierstrass invariant g2 = 60 e_4.
    pub fn g2(&self) -> C64 {
        60.0 * self.e_cache[3]
    }

    /// Weierstrass invariant g3 = 140 e_6.
    pub fn g3(&self) -> C64 {
        140.0 * self.e_cache[5]
    }

    /// Eisenstein series `e_r`; exact 0 for odd `r`.
    pub fn eisenstein_series(&self, r: u32) -> Result<C64> {
        if r == 0 {
            return Err(Error::InvalidEisensteinIndex);
        }
        if r <= R_MAX {
            Ok(self.e_cache[(r - 1) as usize])
        } else {
            Ok(self.compute_e(r))
        }
    }

    fn compute_e(&self, r: u32) -> C64 {
        if r % 2 == 1 {
            return C64::new(0.0, 0.0);
        }
        // e_r = 2 zeta(r) + 2 sum_{n>=1} C_r(n tau), with the inner m-sum
        // taken first (realized in closed form by C_r).
        let mut s = C64::new(2.0 * zeta_even(r), 0.0);
        for n in 1..=self.series_truncation.max(8) {
            let t = 2.0 * c_r_useries(r, (n as f64) * self.tau);
            s += t;
            if t.norm() < 1e-18 && n > 3 {
                break;
            }
        }
        s
    }

    /// Reduce `z` to the fundamental parallelogram.
    pub fn reduce(&self, z: C64) -> LatticePoint {
        let beta = z.im / self.tau.im;
        let alpha = z.re - beta * self.tau.re;
        let m = alpha.floor() as i64;
        let n = beta.floor() as i64;
        let reduced = z - C64::new(m as f64, 0.0) - (n as f64) * self.tau;
        LatticePoint {
            z,
            reduced,
            shift: (m, n),
        }
    }

    /// Distance from `z` to the lattice, together with the nearest point.
    pub fn distance_to_lattice(&self, z: C64) -> (f64, C64) {
        let p = self.reduce(z);
        let mut best = f64::INFINITY;
        let mut nearest = C64::new(0.0, 0.0);
        for dm in 0..=1 {
            for dn in 0..=1 {
                let corner = C64::new(dm as f64, 0.0) + (dn as f64) * self.tau;
                let d = (p.reduced - corner).norm();
                if d < best {
                    best = d;
                    nearest = z - p.reduced + corner;
                }
            }
        }
        (best, nearest)
    }

    fn check_regular(&self, z: C64) -> Result<()> {
        let (d, nearest) = self.distance_to_lattice(z);
        if d < self.eps_sing {
            Err(Error::NearSingularity {
                z,
                nearest,
                radius: self.eps_sing,
            })
        } else {
            Ok(())
        }
    }

    /// Eisenstein function `E_r(z)`; Eisenstein summation for r = 1, 2.
    pub fn eisenstein_function(&self, r: u32, z: C64) -> Result<C64> {
        if r == 0 {
            return Err(Error::InvalidEisensteinIndex);
        }
        self.check_regular(z)?;
        let p = self.reduce(z);
        let w0 = p.reduced;
        let mut s = self.c_r(r, w0);
        for n in 1..=self.series_truncation.max(8) {
            let t = self.c_r(r, w0 + (n as f64) * self.tau) + self.c_r(r, w0 - (n as f64) * self.tau);
            s += t;
            if t.norm() < 1e-18 && n > 2 {
                break;
            }
        }
        if r == 1 {
            // E_1(w + n tau) = E_1(w) - 2 pi i n
            s -= C64::new(0.0, 2.0 * PI) * (p.shift.1 as f64);
        }
        Ok(s)
    }

    /// `E_1(z) - 1/z`, stable near the origin.
    pub fn e1_minus_pole(&self, z: C64) -> Result<C64> {
        let scale = self.tau.norm().min(1.0);
        if z.norm() < 1e-3 * scale {
            // E_1(z) = 1/z - sum_{k>=1} e_{2k} z^{2k-1} near 0
            let mut s = C64::new(0.0, 0.0);
            let z2 = z * z;
            let mut zp = z;
            for k in 1..=(R_MAX / 2) {
                s -= self.e_cache[(2 * k - 1) as usize] * zp;
                zp *= z2;
            }
            Ok(s)
        } else {
            Ok(self.eisenstein_function(1, z)? - 1.0 / z)
        }
    }

    /// Sum over m in closed form: `C_r(w) = sum_m 1/(w+m)^r`.
    fn c_r(&self, r: u32, w: C64) -> C64 {
        if w.im > 0.05 {
            c_r_useries(r, w)
        } else if w.im < -0.05 {
            let v = c_r_useries(r, -w);
            if r % 2 == 0 {
                v
            } else {
                -v
            }
        } else {
            c_r_trig(r, w)
        }
    }

    /// Weierstrass p-function `wp = E_2 - e_2`.
    pub fn wp(&self, z: C64) -> Result<C64> {
        Ok(self.eisenstein_function(2, z)? - self.e2())
    }

    /// Derivative of the Weierstrass p-function, `wp' = -2 E_3`.
    pub fn wp_prime(&self, z: C64) -> Result<C64> {
        Ok(-2.0 * self.eisenstein_function(3, z)?)
    }
}

/// `sum_{d>=1} d^{r-1} u^d` prefactored; valid for `Im w > 0`.
fn c_r_useries(r: u32, w: C64) -> C64 {
    debug_assert!(w.im > 0.0);
    let u = (C64::new(0.0, 2.0 * PI) * w).exp();
    if r == 1 {
        return C64::new(0.0, -PI) - C64::new(0.0, 2.0 * PI) * u / (1.0 - u);
    }
    let mut pref = C64::new(1.0, 0.0);
    let m2pii = C64::new(0.0, -2.0 * PI);
    for k in 1..=r {
        pref *= m2pii;
        if k >= 2 {
            pref /= (k - 1) as f64;
        }
    }
    let mut s = C64::new(0.0, 0.0);
    let mut uk = u;
    let mut k = 1u64;
    loop {
        let term = (k as f64).powi((r - 1) as i32) * uk;
        s += term;
        if term.norm() < 1e-19 && k > 2 {
            break;
        }
        uk *= u;
        k += 1;
        if k > 20_000 {
            break;
        }
    }
    pref * s
}

/// Central term via trigonometry: `C_r(w) = pi^r p_r(cot(pi w))` where
/// `p_1 = c` and `p_{r+1} = (1 + c^2) p_r' / r`.
fn c_r_trig(r: u32, w: C64) -> C64 {
    let c = (PI * w).cos() / (PI * w).sin();
    let mut p = vec![0.0f64, 1.0];
    for k in 1..r {
        let dp: Vec<f64> = (1..p.len()).map(|i| p[i] * i as f64).collect();
        let mut q = vec![0.0f64; dp.len() + 2];
        for (i, a) in dp.iter().enumerate() {
            q[i] += a;
            q[i + 2] += a;
        }
        for v in q.iter_mut() {
            *v /= k as f64;
        }
        p = q;
    }
    let mut val = C64::new(0.0, 0.0);
    for coeff in p.iter().rev() {
        val = val * c + coeff;
    }
    val * C64::new(PI, 0.0).powu(r)
}

/// zeta(r) for even r up to R_MAX, from the Bernoulli closed form.
fn zeta_even(r: u32) -> f64 {
    // B_2..B_24 as (numerator, denominator)
    const B: [(f64, f64); 12] = [
        (1.0, 6.0),
        (-1.0, 30.0),
        (1.0, 42.0),
        (-1.0, 30.0),
        (5.0, 66.0),
        (-691.0, 2730.0),
        (7.0, 6.0),
        (-3617.0, 510.0),
        (43867.0, 798.0),
        (-174611.0, 330.0),
        (854513.0, 138.0),
        (-236364091.0, 2730.0),
    ];
    assert!(r % 2 == 0 && r >= 2 && r <= 24);
    let k = (r / 2) as usize;
    let b = B[k - 1].0 / B[k - 1].1;
    let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
    let mut fact = 1.0f64;
    for i in 2..=r {
        fact *= i as f64;
    }
    sign * b * (2.0 * PI).powi(r as i32) / (2.0 * fact)
}

/// Brute-force oracle for `E_r(z)`: symmetric double sum, the inner sum over
/// `m` completed by its Euler-Maclaurin tail so that the finite truncation
/// realizes the Eisenstein ordering (m first, then n). O(N*M); tests only.
pub fn oracle_eisenstein_function(tau: C64, r: u32, z: C64, n_max: usize, m_max: usize) -> C64 {
    let mut s = C64::new(0.0, 0.0);
    for n in -(n_max as i64)..=(n_max as i64) {
        let w = z + (n as f64) * tau;
        s += inner_row(r, w, m_max, false);
    }
    s
}

/// Brute-force oracle for `e_r`: as above with the origin excluded.
pub fn oracle_eisenstein_series(tau: C64, r: u32, n_max: usize, m_max: usize) -> C64 {
    let mut s = C64::new(0.0, 0.0);
    for n in -(n_max as i64)..=(n_max as i64) {
        let w = (n as f64) * tau;
        s += inner_row(r, w, m_max, n == 0);
    }
    s
}

/// `sum_{m=-M..M} 1/(w+m)^r` plus the analytic tail for |m| > M.
fn inner_row(r: u32, w: C64, m_max: usize, skip_origin: bool) -> C64 {
    let mut s = C64::new(0.0, 0.0);
    for m in -(m_max as i64)..=(m_max as i64) {
        if skip_origin && m == 0 {
            continue;
        }
        let d = w + C64::new(m as f64, 0.0);
        s += d.powi(-(r as i32));
    }
    s + inner_tail(r, w, m_max)
}

/// Euler-Maclaurin completion of `sum_{|m| > M} 1/(w+m)^r`.
fn inner_tail(r: u32, w: C64, m_max: usize) -> C64 {
    let a = (m_max + 1) as f64;
    // f(x) = (w+x)^-r + (w-x)^-r, with
    // d^j/dx^j (w+x)^-r = (-1)^j (r)_j (w+x)^{-r-j} and
    // d^j/dx^j (w-x)^-r = (r)_j (w-x)^{-r-j}.
    let f = |j: u32, x: f64| -> C64 {
        let mut ph = 1.0f64;
        for i in 0..j {
            ph *= (r + i) as f64;
        }
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        sign * ph * (w + x).powi(-((r + j) as i32)) + ph * (w - x).powi(-((r + j) as i32))
    };
    let integral = if r == 1 {
        // int_a^inf [1/(w+x) + 1/(w-x)] dx = ln((a-w)/(a+w))
        ((a - w) / (a + w)).ln()
    } else {
        let rm1 = (r - 1) as f64;
        ((w + a).powi(-((r - 1) as i32)) + if r % 2 == 0 {
            (a - w).powi(-((r - 1) as i32))
        } else {
            -(a - w).powi(-((r - 1) as i32))
        }) / rm1
    };
    integral + f(0, a) / 2.0 - f(1, a) / 12.0 + f(3, a) / 720.0 - f(5, a) / 30240.0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx_i() -> LatticeContext {
        LatticeContext::new(C64::new(0.0, 1.0)).unwrap()
    }

    #[test]
    fn rejects_lower_half_plane() {
        assert!(LatticeContext::new(C64::new(0.0, -1.0)).is_err());
        assert!(LatticeContext::new(C64::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn rejects_r_zero() {
        let ctx = ctx_i();
        assert!(ctx.eisenstein_series(0).is_err());
        assert!(ctx.eisenstein_function(0, C64::new(0.3, 0.1)).is_err());
    }

    #[test]
    fn odd_series_vanish_exactly() {
        let ctx = ctx_i();
        assert_eq!(ctx.eisenstein_series(3).unwrap(), C64::new(0.0, 0.0));
        assert_eq!(ctx.eisenstein_series(5).unwrap(), C64::new(0.0, 0.0));
    }

    #[test]
    fn e2_of_square_lattice_is_pi() {
        // classical value for tau = i
        let ctx = ctx_i();
        assert!((ctx.e2() - C64::new(std::f64::consts::PI, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn lemniscatic_g3_vanishes() {
        let ctx = ctx_i();
        assert!(ctx.g3().norm() < 1e-12);
        assert!((ctx.g2() - C64::new(189.07272012923384, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn even_series_recursion() {
        // e_8 = 3 e_4^2 / 7 for any lattice
        let ctx = LatticeContext::new(C64::new(0.5, 1.5)).unwrap();
        let e4 = ctx.eisenstein_series(4).unwrap();
        let e8 = ctx.eisenstein_series(8).unwrap();
        assert!((e8 - 3.0 * e4 * e4 / 7.0).norm() < 1e-12);
    }

    #[test]
    fn series_match_oracle() {
        let tau = C64::new(0.0, 1.0);
        let ctx = ctx_i();
        let e2o = oracle_eisenstein_series(tau, 2, 2000, 2000);
        assert!(
            (ctx.e2() - e2o).norm() < 1e-8,
            "e2 {} vs oracle {}",
            ctx.e2(),
            e2o
        );
        let e4o = oracle_eisenstein_series(tau, 4, 400, 400);
        assert!((ctx.eisenstein_series(4).unwrap() - e4o).norm() < 1e-10);
    }

    #[test]
    fn function_matches_oracle() {
        let tau = C64::new(0.0, 1.0);
        let ctx = ctx_i();
        let z = C64::new(0.3, 0.1);
        for r in 1..=2u32 {
            let fast = ctx.eisenstein_function(r, z).unwrap();
            let oracle = oracle_eisenstein_function(tau, r, z, 2000, 2000);
            assert!((fast - oracle).norm() < 1e-8, "r={} {} {}", r, fast, oracle);
        }
        for r in 3..=6u32 {
            let fast = ctx.eisenstein_function(r, z).unwrap();
            let oracle = oracle_eisenstein_function(tau, r, z, 400, 400);
            assert!((fast - oracle).norm() < 1e-10, "r={}", r);
        }
    }

    #[test]
    fn oracle_cauchy_consistency() {
        // doubling the truncation moves the oracle by less than 1e-8
        let tau = C64::new(0.0, 1.0);
        let z = C64::new(0.23, 0.37);
        let a = oracle_eisenstein_function(tau, 4, z, 200, 200);
        let b = oracle_eisenstein_function(tau, 4, z, 400, 400);
        assert!((a - b).norm() < 1e-8);
    }

    #[test]
    fn oracle_symmetries() {
        let tau = C64::new(0.0, 1.0);
        // real on the real axis of the square lattice
        let v = oracle_eisenstein_function(tau, 1, C64::new(0.5, 0.0), 400, 400);
        let v2 = oracle_eisenstein_function(tau, 1, C64::new(0.5, 0.0), 800, 800);
        assert!(v.im.abs() < 1e-10);
        assert!((v - v2).norm() < 1e-10);
        // odd symmetry for r = 3
        let z = C64::new(0.21, 0.34);
        let a = oracle_eisenstein_function(tau, 3, z, 150, 150);
        let b = oracle_eisenstein_function(tau, 3, -z, 150, 150);
        assert!((a + b).norm() < 1e-10);
    }

    #[test]
    fn quasi_periodicity() {
        let ctx = ctx_i();
        let tau = ctx.tau();
        let z = C64::new(0.31, 0.17);
        let e1 = ctx.eisenstein_function(1, z).unwrap();
        let e1p = ctx.eisenstein_function(1, z + 1.0).unwrap();
        assert!((e1p - e1).norm() < 1e-11);
        // T_tau E_1 = E_1 + 2 pi i, i.e. E_1(z + tau) = E_1(z) - 2 pi i
        let e1t = ctx.eisenstein_function(1, z + tau).unwrap();
        assert!((e1t - e1 + C64::new(0.0, 2.0 * PI)).norm() < 1e-11);
        for r in 2..=4u32 {
            let a = ctx.eisenstein_function(r, z).unwrap();
            let b = ctx.eisenstein_function(r, z + tau).unwrap();
            let c = ctx.eisenstein_function(r, z + 1.0).unwrap();
            assert!((a - b).norm() < 1e-11);
            assert!((a - c).norm() < 1e-11);
        }
    }

    #[test]
    fn even_function_symmetry() {
        let ctx = ctx_i();
        let z = C64::new(0.3, 0.1);
        let a = ctx.eisenstein_function(2, z).unwrap();
        let b = ctx.eisenstein_function(2, -z).unwrap();
        assert!((a - b).norm() < 1e-12);
    }

    #[test]
    fn derivative_recursion_by_finite_differences() {
        let ctx = ctx_i();
        let z = C64::new(0.27, 0.22);
        let h = 1e-5;
        for r in 1..=5u32 {
            let d = (ctx.eisenstein_function(r, z + h).unwrap()
                - ctx.eisenstein_function(r, z - h).unwrap())
                / (2.0 * h);
            let expect = -(r as f64) * ctx.eisenstein_function(r + 1, z).unwrap();
            assert!(
                (d - expect).norm() / expect.norm() < 1e-6,
                "r={} rel {}",
                r,
                (d - expect).norm() / expect.norm()
            );
        }
    }

    #[test]
    fn weierstrass_definitions() {
        let ctx = ctx_i();
        let z = C64::new(0.23, 0.31);
        let wp = ctx.wp(z).unwrap();
        assert_eq!(wp, ctx.eisenstein_function(2, z).unwrap() - ctx.e2());
        let wpp = ctx.wp_prime(z).unwrap();
        assert_eq!(wpp, -2.0 * ctx.eisenstein_function(3, z).unwrap());
    }

    #[test]
    fn weierstrass_cubic() {
        let ctx = ctx_i();
        let tau = ctx.tau();
        let z = C64::new(0.23, 0.31);
        let p = ctx.wp(z).unwrap();
        let pp = ctx.wp_prime(z).unwrap();
        let h1 = ctx.wp(C64::new(0.5, 0.0)).unwrap();
        let h2 = ctx.wp(tau / 2.0).unwrap();
        let h3 = ctx.wp((tau + 1.0) / 2.0).unwrap();
        let res = pp * pp - 4.0 * (p - h1) * (p - h2) * (p - h3);
        assert!(res.norm() < 1e-8, "residual {}", res.norm());
        let res2 = pp * pp - (4.0 * p * p * p - ctx.g2() * p - ctx.g3());
        assert!(res2.norm() < 1e-8);
    }

    #[test]
    fn singularity_guard() {
        let ctx = ctx_i();
        let z = C64::new(1e-9, 0.0);
        match ctx.eisenstein_function(2, z) {
            Err(Error::NearSingularity { nearest, .. }) => {
                assert!(nearest.norm() < 1e-8);
            }
            other => panic!("expected singularity error, got {:?}", other),
        }
    }

    #[test]
    fn e1_minus_pole_is_smooth() {
        let ctx = ctx_i();
        // Taylor branch and direct branch agree in the overlap region
        let z = C64::new(8e-4, 3e-4);
        let taylor = ctx.e1_minus_pole(z).unwrap();
        let direct = ctx.eisenstein_function(1, z).unwrap() - 1.0 / z;
        assert!((taylor - direct).norm() < 1e-10);
    }

    #[test]
    fn reduction_invariants() {
        let ctx = LatticeContext::new(C64::new(0.5, 1.5)).unwrap();
        let z = C64::new(17.3, -4.2);
        let p = ctx.reduce(z);
        let back = p.reduced + C64::new(p.shift.0 as f64, 0.0) + (p.shift.1 as f64) * ctx.tau();
        assert!((back - z).norm() < 1e-12 * z.norm().max(1.0));
        let beta = p.reduced.im / ctx.tau().im;
        let alpha = p.reduced.re - beta * ctx.tau().re;
        assert!((0.0..1.0).contains(&alpha));
        assert!((0.0..1.0).contains(&beta));
    }
}
