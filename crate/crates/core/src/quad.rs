//! Gauss–Jacobi quadrature.
//!
//! Nodes come from the Golub–Welsch eigenproblem, are polished with two
//! Newton steps on `P_n^{(α,β)}`, and the weights are then recomputed from
//! the closed form
//! `w_i = 2^{α+β+1} Γ(n+α+1)Γ(n+β+1) / (Γ(n+α+β+1) n! (1-x_i²) P_n'(x_i)²)`.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{domain, Result};
use crate::specfun::{log_gamma, JacobiRecurrence, OrthoPolyParams};

/// Nodes and weights for `∫_{-1}^{1} f(t) (1-t)^α (1+t)^β dt`.
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&t, &w)| w * f(t)).sum()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }
}

pub fn gauss_jacobi(npts: usize, alpha: f64, beta: f64) -> Result<GaussRule> {
    if npts == 0 {
        return Err(domain("gauss_jacobi npts", 0.0));
    }
    let params = OrthoPolyParams::jacobi(alpha, beta)?;
    let ab = alpha + beta;

    let mut jm = DMatrix::<f64>::zeros(npts, npts);
    for k in 0..npts {
        let kf = k as f64;
        let s = 2.0 * kf + ab;
        let diag = if k == 0 { (beta - alpha) / (ab + 2.0) } else { (beta * beta - alpha * alpha) / (s * (s + 2.0)) };
        jm[(k, k)] = diag;
        if k + 1 < npts {
            let j = kf + 1.0;
            let sj = 2.0 * j + ab;
            let off2 = if k == 0 {
                4.0 * (1.0 + alpha) * (1.0 + beta) / ((2.0 + ab).powi(2) * (3.0 + ab))
            } else {
                4.0 * j * (j + alpha) * (j + beta) * (j + ab) / (sj * sj * (sj + 1.0) * (sj - 1.0))
            };
            let off = off2.sqrt();
            jm[(k, k + 1)] = off;
            jm[(k + 1, k)] = off;
        }
    }
    let eig = SymmetricEigen::new(jm);
    let mut nodes: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    nodes.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));

    let rec = JacobiRecurrence::new(params, npts);
    let dparams = OrthoPolyParams::jacobi(alpha + 1.0, beta + 1.0)?;
    let drec = JacobiRecurrence::new(dparams, npts.max(1));
    let dscale = (npts as f64 + ab + 1.0) / 2.0;
    let deriv = |t: f64| dscale * drec.eval(npts - 1, t);

    for x in nodes.iter_mut() {
        for _ in 0..2 {
            let d = deriv(*x);
            if d != 0.0 {
                let step = rec.eval(npts, *x) / d;
                let cand = *x - step;
                if cand.abs() < 1.0 {
                    *x = cand;
                }
            }
        }
    }

    let nf = npts as f64;
    let ln_c = (ab + 1.0) * std::f64::consts::LN_2 + log_gamma(nf + alpha + 1.0)? + log_gamma(nf + beta + 1.0)?
        - log_gamma(nf + ab + 1.0)?
        - log_gamma(nf + 1.0)?;
    let c = ln_c.exp();
    let weights = nodes
        .iter()
        .map(|&x| {
            let d = deriv(x);
            c / ((1.0 - x * x) * d * d)
        })
        .collect();
    Ok(GaussRule { nodes, weights })
}

/// Rule for a zonal integral on `S^n` with the probability measure:
/// `∫ f dσ = ∫_{-1}^1 g(t) (1-t²)^{(n-2)/2} dt / ∫_{-1}^1 (1-t²)^{(n-2)/2} dt`.
/// Weights are normalised to sum to one.
pub fn zonal_rule(n: usize, npts: usize) -> Result<GaussRule> {
    if n < 2 {
        return Err(domain("zonal_rule dimension", n as f64));
    }
    let a = (n as f64 - 2.0) / 2.0;
    let mut rule = gauss_jacobi(npts, a, a)?;
    let total: f64 = rule.total_weight();
    for w in rule.weights.iter_mut() {
        *w /= total;
    }
    Ok(rule)
}
