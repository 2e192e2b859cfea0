//! Elliptic hyperlogarithms over the extended alphabet (the puncture set
//! plus a star letter), the explicit relations between them and the
//! regularized gamma functions in the one-puncture setting, residue
//! utilities, and a numeric linear-independence refuter.

use crate::config::EvalContext;
use crate::error::{Error, Result};
use crate::gamma::{forms_of_word, gamma_shuffle};
use crate::itint::{iterated_integral, FormSpec, IterOpts, Path};
use crate::shuffle::{Letter, Word};
use crate::C64;
use nalgebra::DMatrix;

/// Letter of the hyperlogarithm alphabet: the star stands for `dz`, the
/// origin puncture for `E_2 dz`, and any other puncture `s` for
/// `(T_s - id)(g_1) dz`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HLLetter {
    Star,
    Punct(u16),
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct HLWord(pub Vec<HLLetter>);

impl HLWord {
    pub fn forms(&self) -> Vec<FormSpec> {
        self.0.iter().map(|l| hl_form(*l)).collect()
    }
}

pub fn hl_form(l: HLLetter) -> FormSpec {
    match l {
        HLLetter::Star => FormSpec::Dz,
        HLLetter::Punct(0) => FormSpec::E2Dz,
        HLLetter::Punct(s) => FormSpec::AlphaS { s },
    }
}

/// Iterated integral of the alphabet forms along a path from the
/// hyperlogarithm basepoint.
pub fn hl_eval(word: &HLWord, path: &Path, ec: &EvalContext, opts: &IterOpts) -> Result<C64> {
    iterated_integral(&word.forms(), path, ec, opts)
}

/// Identity from the one-puncture catalog relating hyperlogarithms and
/// regularized gamma values.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CatalogId {
    /// star powers against the Taylor monomials from 0
    StarPowers,
    /// single `E_2 dz` letter against `-g_1 + g_1(z0)`
    BetaIsG1,
    /// depth-one gamma against `-L_{ba} + g_1(z0) L_a + const`
    GammaOne,
    /// powers of g_1 against beta-power hyperlogarithms
    G1Powers,
    /// depth-one weight-two gamma against weight-three hyperlogarithms
    GammaTwo,
}

pub const CATALOG: [CatalogId; 5] = [
    CatalogId::StarPowers,
    CatalogId::BetaIsG1,
    CatalogId::GammaOne,
    CatalogId::G1Powers,
    CatalogId::GammaTwo,
];

impl CatalogId {
    pub fn name(&self) -> &'static str {
        match self {
            CatalogId::StarPowers => "star-powers",
            CatalogId::BetaIsG1 => "beta-is-g1",
            CatalogId::GammaOne => "gamma-one",
            CatalogId::G1Powers => "g1-powers",
            CatalogId::GammaTwo => "gamma-two",
        }
    }

    /// Human-readable statement of the identity being checked.
    pub fn anchor(&self) -> &'static str {
        match self {
            CatalogId::StarPowers => {
                "L_{a..a}(z) = sum_j (-z0)^{n-j}/(n-j)! * Gamma(0^j; z)"
            }
            CatalogId::BetaIsG1 => "L_b = -g_1 + g_1(z0)",
            CatalogId::GammaOne => "Gamma(1;-) = -L_{ba} + g_1(z0) L_a + Gamma(1;z0)",
            CatalogId::G1Powers => {
                "g_1^n = sum_k (-1)^k n!/(n-k)! g_1^{n-k}(z0) L_{b^k}"
            }
            CatalogId::GammaTwo => {
                "Gamma(2;-) = L_{bba} - g_1(z0) L_{ba} + (e_2+g_1^2(z0))/2 L_a - L_b/2 + Gamma(2;z0)"
            }
        }
    }
}

/// Paths tying the two basepoints together: a tangential path to `z0`, its
/// continuation to `z`, and the plain leg from `z0` to `z`.
pub struct BasepointPaths {
    pub head: Path,
    pub leg: Path,
    pub full: Path,
}

impl BasepointPaths {
    pub fn new(head: Path, leg: Path) -> Result<Self> {
        if (head.end() - leg.start()).norm() > 1e-12 {
            return Err(Error::EndpointMismatch(head.end(), leg.start()));
        }
        let mut vertices = head.vertices.clone();
        vertices.extend_from_slice(&leg.vertices[1..]);
        let full = Path {
            vertices,
            tangential: head.tangential,
        };
        Ok(BasepointPaths {
            head,
            leg,
            full,
        })
    }

    pub fn z0(&self) -> C64 {
        self.head.end()
    }

    pub fn z(&self) -> C64 {
        self.leg.end()
    }
}

/// Residual of one catalog identity, evaluated coherently along the given
/// path system. Requires the one-puncture configuration.
pub fn verify_catalog_identity(
    id: CatalogId,
    paths: &BasepointPaths,
    ec: &EvalContext,
    opts: &IterOpts,
) -> Result<f64> {
    if ec.punctures.len() != 1 {
        return Err(Error::WrongConfiguration(
            "exactly one puncture (the origin)".into(),
        ));
    }
    let z0 = paths.z0();
    let z = paths.z();
    let g1z0 = ec.table.g(1, z0)?;
    let g1z = ec.table.g(1, z)?;
    let gamma_w = |letters: &[(u32, u16)], path: &Path| -> Result<C64> {
        let w = Word(letters.iter().map(|&(n, a)| Letter::new(n, a)).collect());
        gamma_shuffle(&w, path, ec, opts)
    };
    let hl = |letters: &[HLLetter]| -> Result<C64> {
        hl_eval(&HLWord(letters.to_vec()), &paths.leg, ec, opts)
    };
    use HLLetter::{Punct, Star};
    let residual = match id {
        CatalogId::StarPowers => {
            let n = 3usize;
            let lhs = hl(&vec![Star; n])?;
            let mut rhs = C64::new(0.0, 0.0);
            for j in 0..=n {
                let mut fact = 1.0;
                for i in 1..=(n - j) {
                    fact *= i as f64;
                }
                let gamma_zeros = gamma_w(&vec![(0u32, 0u16); j], &paths.full)?;
                rhs += (-z0).powu((n - j) as u32) / fact * gamma_zeros;
            }
            (lhs - rhs).norm()
        }
        CatalogId::BetaIsG1 => {
            let lhs = hl(&[Punct(0)])?;
            (lhs - (g1z0 - g1z)).norm()
        }
        CatalogId::GammaOne => {
            let lhs = gamma_w(&[(1, 0)], &paths.full)?;
            let rhs = -hl(&[Punct(0), Star])? + g1z0 * hl(&[Star])?
                + gamma_w(&[(1, 0)], &paths.head)?;
            (lhs - rhs).norm()
        }
        CatalogId::G1Powers => {
            let n = 3u32;
            let lhs = g1z.powu(n);
            let mut rhs = C64::new(0.0, 0.0);
            for k in 0..=n {
                let mut num = 1.0; // n! / (n-k)!
                for i in (n - k + 1)..=n {
                    num *= i as f64;
                }
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                let betas = hl(&vec![Punct(0); k as usize])?;
                rhs += sign * num * g1z0.powu(n - k) * betas;
            }
            (lhs - rhs).norm()
        }
        CatalogId::GammaTwo => {
            let lhs = gamma_w(&[(2, 0)], &paths.full)?;
            let e2 = ec.ctx.e2();
            let rhs = hl(&[Punct(0), Punct(0), Star])? - g1z0 * hl(&[Punct(0), Star])?
                + (e2 + g1z0 * g1z0) / 2.0 * hl(&[Star])?
                - hl(&[Punct(0)])? / 2.0
                + gamma_w(&[(2, 0)], &paths.head)?;
            (lhs - rhs).norm()
        }
    };
    Ok(residual)
}

/// Residue of a function at `center` by a 16-point trapezoidal contour.
pub fn residue_at<F: Fn(C64) -> Result<C64>>(f: F, center: C64, radius: f64) -> Result<C64> {
    let n = 16;
    let mut s = C64::new(0.0, 0.0);
    for k in 0..n {
        let theta = 2.0 * std::f64::consts::PI * (k as f64) / (n as f64);
        let dir = C64::new(theta.cos(), theta.sin());
        s += f(center + radius * dir)? * dir;
    }
    Ok(s * radius / (n as f64))
}

/// Report of the numeric rank probe.
#[derive(Clone, Debug)]
pub struct RankReport {
    pub singular_values: Vec<f64>,
    pub rank: usize,
    pub candidates: usize,
    /// ratio across the numerical rank cut (infinite when full rank)
    pub gap: f64,
    pub independent: bool,
    pub threshold_ratio: f64,
}

/// Singular-value probe of candidate function columns sampled at common
/// points. This is a refuter, not a proof: a small singular value exhibits
/// a numerical relation at the sampled resolution, while an `independent`
/// verdict only reports the absence of one.
pub fn rank_report(columns: &[Vec<C64>], threshold_ratio: f64) -> Result<RankReport> {
    let cols = columns.len();
    assert!(cols > 0);
    let rows = columns[0].len();
    if rows < 2 * cols {
        return Err(Error::WrongConfiguration(format!(
            "at least {} sample points for {} candidates",
            2 * cols,
            cols
        )));
    }
    for c in columns {
        assert_eq!(c.len(), rows);
    }
    // duplicate sample rows make the probe meaningless
    for i in 0..rows {
        for j in (i + 1)..rows {
            let same = columns
                .iter()
                .all(|c| (c[i] - c[j]).norm() < 1e-14 * (c[i].norm() + 1.0));
            if same {
                return Err(Error::IllConditioned(f64::INFINITY));
            }
        }
    }
    // column normalization, then the real 2x2-block embedding of the
    // complex matrix (every singular value appears twice)
    let mut m = DMatrix::<f64>::zeros(2 * rows, 2 * cols);
    for (j, col) in columns.iter().enumerate() {
        let norm = col.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        let s = if norm > 0.0 { 1.0 / norm } else { 1.0 };
        for (i, v) in col.iter().enumerate() {
            m[(i, 2 * j)] = v.re * s;
            m[(rows + i, 2 * j)] = v.im * s;
            m[(i, 2 * j + 1)] = -v.im * s;
            m[(rows + i, 2 * j + 1)] = v.re * s;
        }
    }
    let svd = m.svd(false, false);
    let mut sv: Vec<f64> = svd.singular_values.iter().cloned().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    // collapse the doubled spectrum
    let sv: Vec<f64> = sv.into_iter().step_by(2).collect();
    let smax = sv[0].max(f64::MIN_POSITIVE);
    let threshold = threshold_ratio * smax;
    let rank = sv.iter().filter(|&&s| s >= threshold).count();
    let gap = if rank < sv.len() && sv[rank] > 0.0 {
        sv[rank - 1] / sv[rank]
    } else {
        f64::INFINITY
    };
    Ok(RankReport {
        independent: rank == cols,
        rank,
        candidates: cols,
        gap,
        singular_values: sv,
        threshold_ratio,
    })
}

/// O_S multiplier used when probing for module relations: the identity, a
/// translated Eisenstein function, or a puncture difference form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PhiSpec {
    One,
    /// `T_s(E_k)` with `k >= 2`
    TE { k: u32, s: u16 },
    /// `(T_s - id)(g_1)` with `s != 0`
    AlphaS { s: u16 },
}

impl PhiSpec {
    pub fn eval(&self, ec: &EvalContext, z: C64) -> Result<C64> {
        match *self {
            PhiSpec::One => Ok(C64::new(1.0, 0.0)),
            PhiSpec::TE { k, s } => {
                let rep = ec.punctures.rep(s);
                ec.ctx.eisenstein_function(k, z - rep)
            }
            PhiSpec::AlphaS { s } => {
                ec.form_value(&FormSpec::AlphaS { s }, z)
            }
        }
    }

    /// The spanning set of the function algebra up to the pole-order cap.
    pub fn spanning_set(ec: &EvalContext, pole_degree_cap: u32) -> Vec<PhiSpec> {
        let mut out = vec![PhiSpec::One];
        for s in ec.punctures.ids() {
            for k in 2..=pole_degree_cap {
                out.push(PhiSpec::TE { k, s });
            }
        }
        for s in ec.punctures.ids().skip(1) {
            out.push(PhiSpec::AlphaS { s });
        }
        out
    }
}

/// Build the value columns `phi * g_1^i * Gamma(w)` over the sample points;
/// `paths[p]` must run from the origin to `samples[p]`.
pub fn gamma_family_columns(
    ec: &EvalContext,
    opts: &IterOpts,
    words: &[Word],
    g1_pow_max: u32,
    phis: &[PhiSpec],
    samples: &[C64],
    paths: &[Path],
) -> Result<Vec<Vec<C64>>> {
    assert_eq!(samples.len(), paths.len());
    // gamma values per (word, sample)
    let mut gvals = vec![vec![C64::new(0.0, 0.0); samples.len()]; words.len()];
    for (wi, w) in words.iter().enumerate() {
        for (p, path) in paths.iter().enumerate() {
            gvals[wi][p] = gamma_shuffle(w, path, ec, opts)?;
        }
    }
    let mut g1s = Vec::with_capacity(samples.len());
    for &z in samples {
        g1s.push(ec.table.g(1, z)?);
    }
    let mut columns = Vec::new();
    for w_i in 0..words.len() {
        for i in 0..=g1_pow_max {
            for phi in phis {
                let mut col = Vec::with_capacity(samples.len());
                for (p, &z) in samples.iter().enumerate() {
                    col.push(phi.eval(ec, z)? * g1s[p].powu(i) * gvals[w_i][p]);
                }
                columns.push(col);
            }
        }
    }
    Ok(columns)
}
