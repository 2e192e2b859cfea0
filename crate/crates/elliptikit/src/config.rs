//! Run configuration, the puncture table, and the shared evaluation
//! environment handed to the numeric operators.

use crate::error::{Error, Result};
use crate::kronecker::KroneckerTable;
use crate::lattice::LatticeContext;
use crate::C64;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Environment variable consulted for a config path when none is given.
pub const CONFIG_ENV: &str = "ELLIPTIKIT_CONFIG";

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct PunctureSpec {
    pub label: String,
    pub z: [f64; 2],
}

/// One JSON config file drives every subcommand; flags override fields.
#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(default)]
pub struct RunConfig {
    pub tau: [f64; 2],
    /// Puncture representatives; the origin (label "0") must come first.
    pub punctures: Vec<PunctureSpec>,
    /// Cap on the number of tau-shifts retained by the fast evaluator;
    /// chosen so |q|^cap is far below 1e-16 at unit scale.
    pub series_truncation: usize,
    pub oracle_truncation: [usize; 2],
    pub tolerance: f64,
    /// Default hyperlogarithm basepoint.
    pub z0: [f64; 2],
    /// Tangential window; auto-derived from the puncture layout when null.
    pub delta: Option<f64>,
    pub seed: u64,
    /// Depth of the Kronecker coefficient table.
    pub max_n: u32,
    pub output: OutputMode,
}

#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum OutputMode {
    Json,
    Text,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            tau: [0.0, 1.0],
            punctures: vec![PunctureSpec {
                label: "0".to_string(),
                z: [0.0, 0.0],
            }],
            series_truncation: 64,
            oracle_truncation: [200, 200],
            tolerance: 1e-8,
            z0: [0.31, 0.47],
            delta: None,
            seed: 7771,
            max_n: 12,
            output: OutputMode::Json,
        }
    }
}

impl RunConfig {
    pub fn from_str(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let s = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {}", path.display(), e)))?;
        Self::from_str(&s)
    }

    /// Load from an explicit path, else from `ELLIPTIKIT_CONFIG`, else the
    /// defaults.
    pub fn load(path: Option<&std::path::Path>) -> Result<Self> {
        if let Some(p) = path {
            return Self::from_file(p);
        }
        if let Ok(p) = std::env::var(CONFIG_ENV) {
            return Self::from_file(std::path::Path::new(&p));
        }
        Ok(Self::default())
    }

    pub fn tau_c(&self) -> C64 {
        C64::new(self.tau[0], self.tau[1])
    }

    pub fn z0_c(&self) -> C64 {
        C64::new(self.z0[0], self.z0[1])
    }

    /// Validate and assemble the shared evaluation environment.
    pub fn build(&self) -> Result<EvalContext> {
        let ctx = Arc::new(LatticeContext::with_options(
            self.tau_c(),
            self.series_truncation,
            (self.oracle_truncation[0], self.oracle_truncation[1]),
            self.tolerance,
        )?);
        if self.punctures.is_empty() {
            return Err(Error::Config("puncture list must contain the origin".into()));
        }
        let mut reps = Vec::new();
        let mut labels = Vec::new();
        for (i, p) in self.punctures.iter().enumerate() {
            let raw = C64::new(p.z[0], p.z[1]);
            let rep = ctx.reduce(raw).reduced;
            if i == 0 && rep.norm() > 1e-12 {
                return Err(Error::Config(
                    "the first puncture must be the origin".into(),
                ));
            }
            for (j, &other) in reps.iter().enumerate() {
                let d = ctx.distance_to_lattice(rep - other).0;
                if d < 10.0 * ctx.eps_sing() {
                    return Err(Error::Config(format!(
                        "punctures {} and {} coincide modulo the lattice",
                        self.punctures[j].label, p.label
                    )));
                }
            }
            reps.push(rep);
            labels.push(p.label.clone());
        }
        let punctures = Punctures { reps, labels };
        let table = KroneckerTable::new(ctx.clone(), self.max_n.max(4));
        Ok(EvalContext {
            ctx,
            table,
            punctures,
        })
    }
}

/// Canonical representatives of the puncture set, id 0 being the origin.
#[derive(Clone, Debug)]
pub struct Punctures {
    reps: Vec<C64>,
    labels: Vec<String>,
}

impl Punctures {
    pub fn origin_only() -> Self {
        Punctures {
            reps: vec![C64::new(0.0, 0.0)],
            labels: vec!["0".to_string()],
        }
    }

    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    pub fn rep(&self, id: u16) -> C64 {
        self.reps[id as usize]
    }

    pub fn label(&self, id: u16) -> &str {
        &self.labels[id as usize]
    }

    pub fn ids(&self) -> impl Iterator<Item = u16> + '_ {
        (0..self.reps.len() as u16).into_iter()
    }

    pub fn by_label(&self, label: &str) -> Option<u16> {
        self.labels.iter().position(|l| l == label).map(|i| i as u16)
    }

    /// Resolve a literal point to a configured puncture id.
    pub fn by_point(&self, z: C64, tol: f64) -> Option<u16> {
        self.reps
            .iter()
            .position(|&r| (r - z).norm() < tol)
            .map(|i| i as u16)
    }
}

/// Shared evaluation environment: lattice caches, the synchronized
/// Kronecker memo, and the puncture table.
pub struct EvalContext {
    pub ctx: Arc<LatticeContext>,
    pub table: KroneckerTable,
    pub punctures: Punctures,
}

impl EvalContext {
    pub fn new(tau: C64, punctures: Punctures, max_n: u32) -> Result<Self> {
        let ctx = Arc::new(LatticeContext::new(tau)?);
        let table = KroneckerTable::new(ctx.clone(), max_n);
        Ok(EvalContext {
            ctx,
            table,
            punctures,
        })
    }

    /// Distance from `z` to the full preimage of the puncture set, along
    /// with the offending translate.
    pub fn distance_to_punctures(&self, z: C64) -> (f64, C64) {
        let mut best = f64::INFINITY;
        let mut nearest = C64::new(0.0, 0.0);
        for id in self.punctures.ids() {
            let rep = self.punctures.rep(id);
            let (d, near) = self.ctx.distance_to_lattice(z - rep);
            if d < best {
                best = d;
                nearest = near + rep;
            }
        }
        (best, nearest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips_through_json() {
        let cfg = RunConfig::default();
        let s = serde_json::to_string(&cfg).unwrap();
        let back = RunConfig::from_str(&s).unwrap();
        assert_eq!(back.tau, cfg.tau);
        assert_eq!(back.seed, cfg.seed);
    }

    #[test]
    fn build_validates_origin_first() {
        let mut cfg = RunConfig::default();
        cfg.punctures[0].z = [0.3, 0.3];
        assert!(cfg.build().is_err());
    }

    #[test]
    fn build_rejects_coincident_punctures() {
        let mut cfg = RunConfig::default();
        cfg.punctures.push(PunctureSpec {
            label: "s".into(),
            z: [1.0, 1.0], // == origin mod lattice for tau = i
        });
        assert!(cfg.build().is_err());
    }

    #[test]
    fn punctures_reduce_to_fundamental_domain() {
        let mut cfg = RunConfig::default();
        cfg.punctures.push(PunctureSpec {
            label: "s".into(),
            z: [1.3, 2.2],
        });
        let ec = cfg.build().unwrap();
        let rep = ec.punctures.rep(1);
        assert!((rep - C64::new(0.3, 0.2)).norm() < 1e-12);
        assert_eq!(ec.punctures.by_label("s"), Some(1));
    }
}
