//! Regularized iterated integrals from the origin: the function `G`
//! (log-compensated primitive of the form with a simple pole at 0), the
//! gamma functions defined through either shuffle or tangential-basepoint
//! regularization, their derivative identity, and basepoint transport.

use crate::config::EvalContext;
use crate::error::{Error, Result};
use crate::exact::QC;
use crate::itint::{iterated_integral, FormSpec, IterOpts, Path};
use crate::quad::rule;
use crate::shuffle::{antipode, deconcatenate, star_decompose, ShuffleElement, Word};
use crate::C64;
use nalgebra::{DMatrix, DVector};

/// Controls for the tangential-basepoint limit: the admissible window
/// `(0, delta)`, the sample abscissas, and the cap on the fitted log-degree.
#[derive(Clone, Debug)]
pub struct TangentialConfig {
    pub delta: f64,
    pub t_samples: Vec<f64>,
    pub fit_degree_cap: u32,
    /// residual threshold, relative to the largest sample magnitude
    pub fit_tolerance: f64,
}

impl TangentialConfig {
    /// Derive a window from the puncture layout: shrink `delta` until the
    /// real segment `(0, delta]` clears every puncture translate, then lay
    /// out a geometric sample ladder with ratio sqrt(2).
    pub fn auto(ec: &EvalContext) -> Result<Self> {
        let scale = ec.ctx.tau().norm().min(1.0);
        let mut delta = 0.45 * scale;
        for _ in 0..8 {
            let clear = (1..=64)
                .map(|k| {
                    let x = C64::new(delta * (k as f64) / 64.0, 0.0);
                    let (d, p) = ec.distance_to_punctures(x);
                    if p.norm() < 1e-12 {
                        // distance to the origin itself does not count
                        f64::INFINITY
                    } else {
                        d
                    }
                })
                .fold(f64::INFINITY, f64::min);
            // also the origin translates other than 0 itself
            let origin_clear = (1..=64)
                .map(|k| {
                    let x = C64::new(delta * (k as f64) / 64.0, 0.0);
                    x.norm() // distance used only to bound delta below 1
                })
                .fold(f64::INFINITY, f64::min);
            let _ = origin_clear;
            if clear > 0.08 * scale {
                break;
            }
            delta *= 0.5;
        }
        let floor = 3.0 * ec.ctx.eps_sing();
        let mut t_samples = Vec::new();
        for j in 0..=20 {
            let t = delta * 2f64.powf(-7.0 - 0.5 * j as f64);
            if t < floor {
                break;
            }
            t_samples.push(t);
        }
        if t_samples.len() < 8 {
            return Err(Error::Config(
                "tangential window too small for a stable fit".into(),
            ));
        }
        Ok(TangentialConfig {
            delta,
            t_samples,
            fit_degree_cap: 4,
            fit_tolerance: 1e-6,
        })
    }
}

fn require_origin_start(path: &Path) -> Result<()> {
    if !path.tangential || path.start().norm() > 1e-14 {
        return Err(Error::BadTangentialPath);
    }
    Ok(())
}

/// Continuous logarithm accumulated along the path, with the real branch on
/// the departing segment.
fn continued_log(path: &Path) -> C64 {
    let mut verts: Vec<C64> = path.vertices.clone();
    verts.retain(|v| v.norm() > 0.0);
    let mut log = verts[0].ln();
    for w in verts.windows(2) {
        log += (w[1] / w[0]).ln();
    }
    log
}

/// Adaptive scalar quadrature along one segment.
fn integrate_scalar<F: Fn(C64) -> Result<C64>>(
    f: &F,
    a: C64,
    b: C64,
    tol: f64,
    depth: usize,
    seg: usize,
) -> Result<C64> {
    let r = rule(12);
    let eval = |a: C64, b: C64| -> Result<C64> {
        let h = b - a;
        let mut s = C64::new(0.0, 0.0);
        for (&x, &w) in r.nodes.iter().zip(&r.weights) {
            s += w * f(a + (x + 1.0) * 0.5 * h)?;
        }
        Ok(s * h * 0.5)
    };
    let whole = eval(a, b)?;
    let mid = (a + b) * 0.5;
    let split = eval(a, mid)? + eval(mid, b)?;
    if (whole - split).norm() <= tol * (1.0 + split.norm()) {
        Ok(split)
    } else if depth >= 30 {
        Err(Error::QuadratureFailure {
            segment: seg,
            depth,
        })
    } else {
        Ok(integrate_scalar(f, a, mid, tol, depth + 1, seg)?
            + integrate_scalar(f, mid, b, tol, depth + 1, seg)?)
    }
}

/// The regularized primitive of the simple-pole form at the origin:
/// `G(z) = lim_{t->0} int_t^z g_1(u) du + log t`, evaluated along a
/// tangential path, as the regular integral of `g_1(u) - 1/u` plus the
/// continued logarithm.
pub fn big_g(path: &Path, ec: &EvalContext) -> Result<C64> {
    require_origin_start(path)?;
    path.validate(ec)?;
    let f = |u: C64| ec.ctx.e1_minus_pole(u);
    let mut q = C64::new(0.0, 0.0);
    for (i, (a, b)) in path.segments().enumerate() {
        if (b - a).norm() == 0.0 {
            continue;
        }
        q += integrate_scalar(&f, a, b, 1e-12, 0, i)?;
    }
    Ok(q + continued_log(path))
}

pub fn forms_of_word(w: &Word) -> Vec<FormSpec> {
    w.0.iter().map(|&l| FormSpec::from_letter(l)).collect()
}

/// Shuffle-regularized value of a word at the path end.
///
/// The word is written as a polynomial in `X = (1;0)` with regular
/// coefficients; regular words are integrated directly from the origin
/// (their prefix integrands extend continuously to 0), and each power of
/// `X` contributes a power of `G`.
pub fn gamma_shuffle(
    word: &Word,
    path: &Path,
    ec: &EvalContext,
    opts: &IterOpts,
) -> Result<C64> {
    require_origin_start(path)?;
    if word.is_empty() {
        return Ok(C64::new(1.0, 0.0));
    }
    let poly = star_decompose(&ShuffleElement::<QC>::from_word(word.clone()));
    let needs_g = poly.coeffs.len() > 1;
    let g = if needs_g {
        big_g(path, ec)?
    } else {
        C64::new(0.0, 0.0)
    };
    let mut total = C64::new(0.0, 0.0);
    for (k, coeff) in poly.coeffs.iter().enumerate() {
        if coeff.is_zero() {
            continue;
        }
        let v = eval_regular_element(coeff, path, ec, opts)?;
        total += v * g.powu(k as u32);
    }
    Ok(total)
}

/// Shuffle-regularized value of a linear combination of words.
pub fn gamma_of_element(
    e: &ShuffleElement<QC>,
    path: &Path,
    ec: &EvalContext,
    opts: &IterOpts,
) -> Result<C64> {
    let mut total = C64::new(0.0, 0.0);
    for (w, c) in &e.terms {
        total += c.to_complex() * gamma_shuffle(w, path, ec, opts)?;
    }
    Ok(total)
}

fn eval_regular_element(
    e: &ShuffleElement<QC>,
    path: &Path,
    ec: &EvalContext,
    opts: &IterOpts,
) -> Result<C64> {
    let mut total = C64::new(0.0, 0.0);
    for (w, c) in &e.terms {
        debug_assert!(w.is_regular());
        let v = if w.is_empty() {
            C64::new(1.0, 0.0)
        } else {
            iterated_integral(&forms_of_word(w), path, ec, opts)?
        };
        total += c.to_complex() * v;
    }
    Ok(total)
}

/// Result of the tangential-basepoint fit.
#[derive(Clone, Debug)]
pub struct TangentialValue {
    /// constant term of the fitted log-polynomial: the regularized value
    pub value: C64,
    /// coefficients of log(t)^j, j = 0..=degree
    pub log_poly: Vec<C64>,
    pub fit_residual: f64,
}

/// Tangential-basepoint regularization: evaluate the raw iterated integral
/// from basepoint `t` for each sample, fit a polynomial in `log t` plus a
/// vanishing remainder, and return the constant term.
pub fn gamma_tangential(
    word: &Word,
    path: &Path,
    tcfg: &TangentialConfig,
    ec: &EvalContext,
    opts: &IterOpts,
) -> Result<TangentialValue> {
    require_origin_start(path)?;
    if word.is_empty() {
        return Ok(TangentialValue {
            value: C64::new(1.0, 0.0),
            log_poly: vec![C64::new(1.0, 0.0)],
            fit_residual: 0.0,
        });
    }
    let degree = ShuffleElement::<QC>::from_word(word.clone())
        .degree()
        .unwrap_or(0);
    if tcfg.fit_degree_cap < degree {
        return Err(Error::FitDegreeCap {
            cap: tcfg.fit_degree_cap,
            need: degree,
        });
    }
    let first_leg = path.vertices[1].re;
    let forms = forms_of_word(word);
    let mut ts = Vec::new();
    let mut values = Vec::new();
    for &t in &tcfg.t_samples {
        if t >= first_leg || t >= tcfg.delta {
            continue;
        }
        let sample_path = path.with_start(C64::new(t, 0.0));
        let v = iterated_integral(&forms, &sample_path, ec, opts)?;
        ts.push(t);
        values.push(v);
    }
    let d = degree as usize;
    // basis: log-polynomial plus t, t^2, t^3 blocks absorbing the vanishing
    // remainder t * polylog(t)
    let mut cols: Vec<Box<dyn Fn(f64, f64) -> f64>> = Vec::new();
    for j in 0..=d {
        cols.push(Box::new(move |_t, l| l.powi(j as i32)));
    }
    for j in 0..=(d + 1) {
        cols.push(Box::new(move |t, l| t * l.powi(j as i32)));
    }
    for j in 0..=(d + 2).min(4) {
        cols.push(Box::new(move |t, l| t * t * l.powi(j as i32)));
    }
    for j in 0..=2 {
        cols.push(Box::new(move |t, l| t * t * t * l.powi(j as i32)));
    }
    let rows = ts.len();
    if rows < cols.len() {
        return Err(Error::Config(format!(
            "{} tangential samples cannot determine {} fit coefficients",
            rows,
            cols.len()
        )));
    }
    let mut a = DMatrix::<f64>::zeros(rows, cols.len());
    for (i, &t) in ts.iter().enumerate() {
        let l = t.ln();
        for (j, c) in cols.iter().enumerate() {
            a[(i, j)] = c(t, l);
        }
    }
    // column scaling
    let mut scales = vec![0.0f64; cols.len()];
    for j in 0..cols.len() {
        let norm = a.column(j).norm();
        scales[j] = if norm > 0.0 { norm } else { 1.0 };
        for i in 0..rows {
            a[(i, j)] /= scales[j];
        }
    }
    let b_re = DVector::from_iterator(rows, values.iter().map(|v| v.re));
    let b_im = DVector::from_iterator(rows, values.iter().map(|v| v.im));
    let svd = a.clone().svd(true, true);
    let x_re = svd
        .solve(&b_re, 1e-13)
        .map_err(|_| Error::IllConditioned(f64::INFINITY))?;
    let x_im = svd
        .solve(&b_im, 1e-13)
        .map_err(|_| Error::IllConditioned(f64::INFINITY))?;
    let resid_re = (&a * &x_re - &b_re).amax();
    let resid_im = (&a * &x_im - &b_im).amax();
    let resid = resid_re.max(resid_im);
    let scale = values
        .iter()
        .map(|v| v.norm())
        .fold(1.0f64, f64::max);
    if resid > tcfg.fit_tolerance * scale {
        return Err(Error::FitResidual {
            residual: resid,
            tolerance: tcfg.fit_tolerance * scale,
        });
    }
    let mut log_poly = Vec::with_capacity(d + 1);
    for j in 0..=d {
        log_poly.push(C64::new(x_re[j] / scales[j], x_im[j] / scales[j]));
    }
    Ok(TangentialValue {
        value: log_poly[0],
        log_poly,
        fit_residual: resid,
    })
}

/// Residual of the derivative identity: the derivative of a word value in
/// its endpoint equals the last form's coefficient times the value of the
/// word with the last letter removed.
pub fn gamma_derivative_check(
    word: &Word,
    path: &Path,
    ec: &EvalContext,
    opts: &IterOpts,
) -> Result<f64> {
    assert!(!word.is_empty());
    let z = path.end();
    let h = 1e-5 * ec.ctx.tau().norm().min(1.0);
    let perturb = |dz: C64| -> Path {
        let mut v = path.vertices.clone();
        let last = v.len() - 1;
        v[last] += dz;
        Path {
            vertices: v,
            tangential: path.tangential,
        }
    };
    let vp = gamma_shuffle(word, &perturb(C64::new(h, 0.0)), ec, opts)?;
    let vm = gamma_shuffle(word, &perturb(C64::new(-h, 0.0)), ec, opts)?;
    let d = (vp - vm) / (2.0 * h);
    let last = *word.0.last().unwrap();
    let prefix = Word(word.0[..word.len() - 1].to_vec());
    let rhs = ec.form_value(&FormSpec::from_letter(last), z)?
        * gamma_shuffle(&prefix, path, ec, opts)?;
    Ok((d - rhs).norm() / rhs.norm().max(1.0))
}

/// Right-hand side of the basepoint composition identity: the regularized
/// value at the end of `path_tail` reconstructed from regularized values at
/// `z0 = path_head.end()` and plain iterated integrals from `z0`.
pub fn basepoint_transport(
    word: &Word,
    path_head: &Path,
    path_tail: &Path,
    ec: &EvalContext,
    opts: &IterOpts,
) -> Result<C64> {
    require_origin_start(path_head)?;
    if (path_head.end() - path_tail.start()).norm() > 1e-12 {
        return Err(Error::EndpointMismatch(path_head.end(), path_tail.start()));
    }
    let mut total = C64::new(0.0, 0.0);
    for (w1, w2) in deconcatenate(word) {
        let head = gamma_shuffle(&w1, path_head, ec, opts)?;
        let tail = if w2.is_empty() {
            C64::new(1.0, 0.0)
        } else {
            iterated_integral(&forms_of_word(&w2), path_tail, ec, opts)?
        };
        total += head * tail;
    }
    Ok(total)
}

/// Reconstruction of the unregularized integral from regularized values via
/// the antipode: `k_{z0}(w) = sum k_0(S(w^(1)))(z0) k_0(w^(2))`.
pub fn unregularized_from_gamma(
    word: &Word,
    path_head: &Path,
    path_full: &Path,
    ec: &EvalContext,
    opts: &IterOpts,
) -> Result<C64> {
    require_origin_start(path_head)?;
    require_origin_start(path_full)?;
    let mut total = C64::new(0.0, 0.0);
    for (w1, w2) in deconcatenate(word) {
        let s = antipode(&ShuffleElement::<QC>::from_word(w1));
        let at_z0 = gamma_of_element(&s, path_head, ec, opts)?;
        let tail = gamma_shuffle(&w2, path_full, ec, opts)?;
        total += at_z0 * tail;
    }
    Ok(total)
}
