//! Gauss-Legendre quadrature rules with a spectral integration matrix,
//! used to advance the coupled prefix system of iterated integrals across
//! a panel in one pass.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// A Gauss-Legendre rule on [-1, 1] of order `m`, together with the
/// integration matrix `s[i][j] = int_{-1}^{x_i} l_j(t) dt` for the Lagrange
/// basis at the nodes.
#[derive(Debug)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub integ: Vec<Vec<f64>>,
}

fn legendre_and_deriv(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn legendre_value(n: usize, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    legendre_and_deriv(n, x).0
}

fn build_rule(m: usize) -> Rule {
    assert!(m >= 2);
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m {
        // Newton from the Chebyshev-like initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        for _ in 0..60 {
            let (p, d) = legendre_and_deriv(m, x);
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_and_deriv(m, x);
        nodes[m - 1 - i] = x;
        weights[m - 1 - i] = 2.0 / ((1.0 - x * x) * d * d);
    }

    // Values-to-Legendre-coefficients via discrete orthogonality, then
    // antiderivative in the Legendre basis:
    //   int_{-1}^x P_0 = P_1 + P_0,  int_{-1}^x P_l = (P_{l+1} - P_{l-1}) / (2l+1).
    let mut integ = vec![vec![0.0; m]; m];
    for j in 0..m {
        // basis vector: l_j has value 1 at node j and 0 elsewhere
        let mut coeff = vec![0.0; m];
        for (l, c) in coeff.iter_mut().enumerate() {
            *c = (2.0 * l as f64 + 1.0) / 2.0 * weights[j] * legendre_value(l, nodes[j]);
        }
        for (i, row) in integ.iter_mut().enumerate() {
            let x = nodes[i];
            let mut v = coeff[0] * (legendre_value(1, x) + 1.0);
            for (l, cl) in coeff.iter().enumerate().skip(1) {
                v += cl * (legendre_value(l + 1, x) - legendre_value(l - 1, x))
                    / (2.0 * l as f64 + 1.0);
            }
            row[j] = v;
        }
    }
    Rule {
        nodes,
        weights,
        integ,
    }
}

/// Shared, lazily-built rule cache.
pub fn rule(m: usize) -> Arc<Rule> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Rule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap();
    guard.entry(m).or_insert_with(|| Arc::new(build_rule(m))).clone()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two() {
        for m in [2, 4, 8, 12, 16] {
            let r = rule(m);
            let s: f64 = r.weights.iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "m={} sum={}", m, s);
        }
    }

    #[test]
    fn integrates_polynomials_exactly() {
        let r = rule(6);
        // degree 11 is integrated exactly by a 6-point rule
        let f = |x: f64| 3.0 * x.powi(11) - x.powi(4) + 2.0;
        let got: f64 = r
            .nodes
            .iter()
            .zip(&r.weights)
            .map(|(&x, &w)| w * f(x))
            .sum();
        let want = -2.0 / 5.0 + 4.0; // int_{-1}^{1}
        assert!((got - want).abs() < 1e-12);
    }

    #[test]
    fn integration_matrix_partial_integrals() {
        let r = rule(8);
        // int_{-1}^{x_i} t^3 dt = (x_i^4 - 1)/4, reproduced by the matrix
        let values: Vec<f64> = r.nodes.iter().map(|&x| x * x * x).collect();
        for i in 0..8 {
            let got: f64 = (0..8).map(|j| r.integ[i][j] * values[j]).sum();
            let want = (r.nodes[i].powi(4) - 1.0) / 4.0;
            assert!((got - want).abs() < 1e-13);
        }
    }
}
