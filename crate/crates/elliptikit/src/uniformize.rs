//! Inversion of the uniformization: given three pairwise distinct branch
//! points, find a period ratio and an affine map carrying the half-period
//! values of the Weierstrass function onto them, and realize the resulting
//! isomorphism onto the cubic curve.

use crate::error::{Error, Result};
use crate::lattice::LatticeContext;
use crate::C64;
use serde::Serialize;
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug)]
pub struct BranchTriple {
    pub a1: C64,
    pub a2: C64,
    pub a3: C64,
}

impl BranchTriple {
    pub fn new(a1: C64, a2: C64, a3: C64) -> Result<Self> {
        let min_sep = (a1 - a2)
            .norm()
            .min((a2 - a3).norm())
            .min((a1 - a3).norm());
        if min_sep < 1e-12 * (a1.norm() + a2.norm() + a3.norm()).max(1.0) {
            return Err(Error::DegenerateBranchPoints);
        }
        Ok(BranchTriple { a1, a2, a3 })
    }

    /// The affine invariant `(a2 - a1)/(a3 - a1)`, never 0 or 1.
    pub fn lambda_target(&self) -> C64 {
        (self.a2 - self.a1) / (self.a3 - self.a1)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct UniformizationResult {
    pub tau: [f64; 2],
    pub a: [f64; 2],
    pub b: [f64; 2],
    /// the recorded square root of a^3 (principal branch); flipping its
    /// sign flips the Y coordinate of the isomorphism
    pub a_three_halves: [f64; 2],
    pub lambda: [f64; 2],
    pub j: [f64; 2],
    /// matching residuals at the three half-periods
    pub residuals: [f64; 3],
}

impl UniformizationResult {
    pub fn tau_c(&self) -> C64 {
        C64::new(self.tau[0], self.tau[1])
    }

    pub fn a_c(&self) -> C64 {
        C64::new(self.a[0], self.a[1])
    }

    pub fn b_c(&self) -> C64 {
        C64::new(self.b[0], self.b[1])
    }

    pub fn a32_c(&self) -> C64 {
        C64::new(self.a_three_halves[0], self.a_three_halves[1])
    }
}

#[derive(Clone, Copy, Debug)]
pub struct UniformizeOpts {
    pub grid: usize,
    pub q_max: f64,
    pub newton_tol: f64,
    pub max_newton: usize,
    pub residual_tol: f64,
}

impl Default for UniformizeOpts {
    fn default() -> Self {
        UniformizeOpts {
            grid: 64,
            q_max: 0.6,
            newton_tol: 1e-13,
            max_newton: 60,
            residual_tol: 1e-8,
        }
    }
}

fn tau_of_q(q: C64) -> C64 {
    // principal branch: Re tau in (-1/2, 1/2]
    q.ln() / C64::new(0.0, 2.0 * PI)
}

/// Half-period values of the Weierstrass function for the lattice of `tau`.
fn half_period_values(tau: C64) -> Result<(C64, C64, C64)> {
    let ctx = LatticeContext::with_options(tau, 256, (8, 8), 1e-10)?;
    let h1 = ctx.wp(C64::new(0.5, 0.0))?;
    let h2 = ctx.wp(tau / 2.0)?;
    let h3 = ctx.wp((tau + 1.0) / 2.0)?;
    Ok((h1, h2, h3))
}

/// The modular lambda in the half-period-ratio normalization
/// `(wp(tau/2) - wp(1/2)) / (wp((1+tau)/2) - wp(1/2))`.
pub fn lambda_of_tau(tau: C64) -> Result<C64> {
    let (h1, h2, h3) = half_period_values(tau)?;
    Ok((h2 - h1) / (h3 - h1))
}

/// Klein invariant from lambda: `256 (1 - l + l^2)^3 / (l^2 (1 - l)^2)`.
pub fn j_of_lambda(l: C64) -> C64 {
    let num = (1.0 - l + l * l).powu(3) * 256.0;
    let den = l * l * (1.0 - l) * (1.0 - l);
    num / den
}

/// The six-element orbit of lambda under the anharmonic group.
pub fn lambda_orbit(l: C64) -> [C64; 6] {
    let one = C64::new(1.0, 0.0);
    [
        l,
        one - l,
        one / l,
        one - one / l,
        one / (one - l),
        l / (l - one),
    ]
}

fn lambda_of_q(q: C64) -> Result<C64> {
    lambda_of_tau(tau_of_q(q))
}

/// Solve `lambda(tau) = lambda_target` by a coarse grid scan in the nome
/// followed by damped Newton, then recover the affine map.
pub fn uniformize(t: &BranchTriple, opts: &UniformizeOpts) -> Result<UniformizationResult> {
    let target = t.lambda_target();
    // grid scan for seeds
    let mut seeds: Vec<(f64, C64)> = Vec::new();
    let n = opts.grid;
    for i in 0..n {
        for k in 0..n {
            let re = -opts.q_max + 2.0 * opts.q_max * (i as f64 + 0.5) / n as f64;
            let im = -opts.q_max + 2.0 * opts.q_max * (k as f64 + 0.5) / n as f64;
            let q = C64::new(re, im);
            if q.norm() > opts.q_max || q.norm() < 1e-4 {
                continue;
            }
            if let Ok(l) = lambda_of_q(q) {
                let d = (l - target).norm();
                seeds.push((d, q));
            }
        }
    }
    seeds.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    let mut solution: Option<C64> = None;
    for &(_, seed) in seeds.iter().take(6) {
        if let Some(q) = newton_in_q(seed, target, opts) {
            solution = Some(q);
            break;
        }
    }
    let q = solution.ok_or(Error::NewtonFailure(target))?;
    let tau = tau_of_q(q);
    let (h1, h2, h3) = half_period_values(tau)?;
    let a = (t.a1 - t.a3) / (h1 - h3);
    let b = t.a1 - a * h1;
    let residuals = [
        (a * h1 + b - t.a1).norm(),
        (a * h2 + b - t.a2).norm(),
        (a * h3 + b - t.a3).norm(),
    ];
    for &r in &residuals {
        if r > opts.residual_tol * (1.0 + t.a1.norm() + t.a2.norm() + t.a3.norm()) {
            return Err(Error::NewtonFailure(target));
        }
    }
    let lambda = lambda_of_tau(tau)?;
    let j = j_of_lambda(lambda);
    let a32 = (C64::new(1.5, 0.0) * a.ln()).exp();
    Ok(UniformizationResult {
        tau: [tau.re, tau.im],
        a: [a.re, a.im],
        b: [b.re, b.im],
        a_three_halves: [a32.re, a32.im],
        lambda: [lambda.re, lambda.im],
        j: [j.re, j.im],
        residuals,
    })
}

fn newton_in_q(seed: C64, target: C64, opts: &UniformizeOpts) -> Option<C64> {
    let mut q = seed;
    for _ in 0..opts.max_newton {
        let f = match lambda_of_q(q) {
            Ok(l) => l - target,
            Err(_) => return None,
        };
        if f.norm() < opts.newton_tol * (1.0 + target.norm()) {
            return Some(q);
        }
        let h = 1e-7 * q.norm().max(1e-3);
        let fp = lambda_of_q(q + C64::new(h, 0.0)).ok()?;
        let fm = lambda_of_q(q - C64::new(h, 0.0)).ok()?;
        let df = (fp - fm) / (2.0 * h);
        if df.norm() == 0.0 {
            return None;
        }
        let mut step = f / df;
        // damping: keep the iterate inside the annulus
        for _ in 0..30 {
            let cand = q - step;
            if cand.norm() < 0.98 && cand.norm() > 1e-8 {
                q = cand;
                break;
            }
            step *= 0.5;
        }
    }
    let f = lambda_of_q(q).ok()? - target;
    if f.norm() < 1e-10 * (1.0 + target.norm()) {
        Some(q)
    } else {
        None
    }
}

/// Image of a point under the isomorphism onto the cubic: the projective
/// triple `[a wp(z) + b : a^{3/2} wp'(z)/2 : 1]`, and `[0 : 1 : 0]` on the
/// lattice.
pub fn iso_point(
    u: &UniformizationResult,
    ctx: &LatticeContext,
    z: C64,
) -> Result<[C64; 3]> {
    debug_assert!((ctx.tau() - u.tau_c()).norm() < 1e-12);
    let (d, _) = ctx.distance_to_lattice(z);
    if d < ctx.eps_sing() {
        return Ok([C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
    }
    let x = u.a_c() * ctx.wp(z)? + u.b_c();
    let y = u.a32_c() * ctx.wp_prime(z)? / 2.0;
    Ok([x, y, C64::new(1.0, 0.0)])
}

/// Residual of the curve equation `Y^2 T = prod (X - a_i T)` at a
/// projective triple, scale-invariantly normalized.
pub fn curve_residual(t: &BranchTriple, p: &[C64; 3]) -> f64 {
    let norm = p[0].norm().max(p[1].norm()).max(p[2].norm());
    if norm == 0.0 {
        return f64::INFINITY;
    }
    let x = p[0] / norm;
    let y = p[1] / norm;
    let tt = p[2] / norm;
    let lhs = y * y * tt;
    let rhs = (x - t.a1 * tt) * (x - t.a2 * tt) * (x - t.a3 * tt);
    (lhs - rhs).norm()
}
