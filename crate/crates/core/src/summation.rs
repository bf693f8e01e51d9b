//! Summation methods acting on finitely supported coefficient sequences.
//!
//! A sequence `a_k` stands for the projections `proj_k f(x)` at a fixed
//! point, so every method is a finite weighted sum `Σ w_k a_k`.

use std::f64::consts::LN_2;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::specfun::{cesaro_number, cesaro_numbers, gamma_ratio_series, gen_binomial, log_gamma};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Cesaro,
    Riesz,
    ShiftedRiesz,
    QuadraticRiesz,
    BochnerRiesz,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Cesaro => "cesaro",
            Method::Riesz => "riesz",
            Method::ShiftedRiesz => "shifted_riesz",
            Method::QuadraticRiesz => "quadratic_riesz",
            Method::BochnerRiesz => "bochner_riesz",
        }
    }
}

/// A summation method with its order, shift and cutoff.
///
/// `cutoff` is the integer `N` for Cesàro means and the radius `R`
/// otherwise. `n` only matters for Bochner–Riesz means, whose cutoff is on
/// the eigenvalue `k(k+n-1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummationSpec {
    pub method: Method,
    pub delta: f64,
    pub c: f64,
    pub cutoff: f64,
    pub n: usize,
}

impl SummationSpec {
    pub fn cesaro(delta: f64, big_n: u64) -> Self {
        Self { method: Method::Cesaro, delta, c: 0.0, cutoff: big_n as f64, n: 0 }
    }

    pub fn riesz(delta: f64, r: f64) -> Self {
        Self { method: Method::Riesz, delta, c: 0.0, cutoff: r, n: 0 }
    }

    pub fn shifted_riesz(delta: f64, c: f64, r: f64) -> Self {
        Self { method: Method::ShiftedRiesz, delta, c, cutoff: r, n: 0 }
    }

    pub fn quadratic_riesz(delta: f64, c: f64, r: f64) -> Self {
        Self { method: Method::QuadraticRiesz, delta, c, cutoff: r, n: 0 }
    }

    pub fn bochner_riesz(n: usize, delta: f64, r: f64) -> Self {
        Self { method: Method::BochnerRiesz, delta, c: 0.0, cutoff: r, n }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSpec(msg));
        if !self.delta.is_finite() || !self.c.is_finite() || !self.cutoff.is_finite() {
            return bad("non-finite parameter".into());
        }
        match self.method {
            Method::Cesaro => {
                if self.delta <= -1.0 {
                    return bad(format!("Cesàro order {} must exceed -1", self.delta));
                }
                if self.cutoff < 0.0 || self.cutoff.fract() != 0.0 {
                    return bad(format!("Cesàro cutoff {} must be a nonnegative integer", self.cutoff));
                }
            }
            _ => {
                if self.delta <= 0.0 {
                    return bad(format!("Riesz-type order {} must be positive", self.delta));
                }
                if self.cutoff <= 0.0 {
                    return bad(format!("radius {} must be positive", self.cutoff));
                }
                if self.method == Method::QuadraticRiesz && self.c < 0.0 {
                    return bad(format!("quadratic Riesz shift {} must be nonnegative", self.c));
                }
                if self.method == Method::BochnerRiesz && self.n < 2 {
                    return bad(format!("Bochner-Riesz dimension {} must be at least 2", self.n));
                }
                if self.method == Method::Riesz && self.c != 0.0 {
                    return bad("plain Riesz means take no shift".into());
                }
            }
        }
        Ok(())
    }

    /// Riesz-type weight of index `k`; zero when `k` is excluded.
    fn weight(&self, k: usize) -> f64 {
        let kf = k as f64;
        let r = self.cutoff;
        match self.method {
            Method::Cesaro => unreachable!("Cesàro weights depend on the whole cutoff"),
            Method::Riesz | Method::ShiftedRiesz => {
                let s = kf + self.c;
                if s < r {
                    ((r - s) / r).powf(self.delta)
                } else {
                    0.0
                }
            }
            Method::QuadraticRiesz => {
                let s = kf + self.c;
                if s < r {
                    ((r - s) * (r + s) / (r * r)).powf(self.delta)
                } else {
                    0.0
                }
            }
            Method::BochnerRiesz => {
                let ev = kf * (kf + self.n as f64 - 1.0);
                if ev < r * r {
                    ((r * r - ev) / (r * r)).powf(self.delta)
                } else {
                    0.0
                }
            }
        }
    }

    /// Whether index `k` takes part in the mean.
    pub fn includes(&self, k: usize) -> bool {
        let kf = k as f64;
        match self.method {
            Method::Cesaro => kf <= self.cutoff,
            Method::Riesz | Method::ShiftedRiesz | Method::QuadraticRiesz => kf + self.c < self.cutoff,
            Method::BochnerRiesz => kf * (kf + self.n as f64 - 1.0) < self.cutoff * self.cutoff,
        }
    }
}

/// Coefficients `a_0, …, a_K`; everything beyond is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffSequence {
    values: Vec<f64>,
}

impl CoeffSequence {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, k: usize) -> f64 {
        self.values.get(k).copied().unwrap_or(0.0)
    }

    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { values: self.values.iter().map(|v| s * v).collect() }
    }
}

impl From<Vec<f64>> for CoeffSequence {
    fn from(values: Vec<f64>) -> Self {
        Self::new(values)
    }
}

/// The exact finite sum `Σ_k w_k a_k` for `spec`.
pub fn apply(spec: &SummationSpec, a: &CoeffSequence) -> Result<f64> {
    spec.validate()?;
    if spec.method == Method::Cesaro {
        let w = cesaro_weights_prefix(spec.delta, spec.cutoff as usize, a.len());
        return Ok(w.iter().zip(a.values()).map(|(w, v)| w * v).sum());
    }
    Ok(a.values().iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(k, v)| spec.weight(k) * v).sum())
}

/// `A_{N-k}^δ / A_N^δ` for `k < min(len, N+1)`.
fn cesaro_weights_prefix(delta: f64, big_n: usize, len: usize) -> Vec<f64> {
    let upto = len.min(big_n + 1);
    let mut w = Vec::with_capacity(upto);
    let mut cur = 1.0;
    for k in 0..upto {
        if k > 0 {
            let j = (big_n - k + 1) as f64;
            cur *= j / (j + delta);
        }
        w.push(cur);
    }
    w
}

/// Every Cesàro mean `S_0^δ, …, S_N^δ` of `a`.
pub fn cesaro_means(a: &CoeffSequence, delta: f64, big_n: usize) -> Result<Vec<f64>> {
    (0..=big_n).map(|m| apply(&SummationSpec::cesaro(delta, m as u64), a)).collect()
}

/// Both sides of `A_N^{δ+ρ} = Σ_{ℓ≤N} A_ℓ^{ρ-1} A_{N-ℓ}^δ`.
pub fn cesaro_convolution_identity(delta: f64, rho: f64, big_n: usize) -> Result<(f64, f64)> {
    if !(rho > 0.0) {
        return Err(Error::InvalidSpec(format!("lift order {rho} must be positive")));
    }
    let lhs = cesaro_number(delta + rho, big_n as u64)?;
    let p = cesaro_numbers(rho - 1.0, big_n)?;
    let q = cesaro_numbers(delta, big_n)?;
    let rhs = (0..=big_n).map(|l| p[l] * q[big_n - l]).sum();
    Ok((lhs, rhs))
}

/// `S_N^{δ+ρ}` assembled from the lower-order means,
/// `(1/A_N^{δ+ρ}) Σ_ℓ A_ℓ^{ρ-1} A_{N-ℓ}^δ S_{N-ℓ}^δ`.
pub fn delta_lift(a: &CoeffSequence, delta: f64, rho: f64, big_n: usize) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(Error::InvalidSpec(format!("lift order {rho} must be positive")));
    }
    if !(delta > -1.0) {
        return Err(Error::InvalidSpec(format!("Cesàro order {delta} must exceed -1")));
    }
    let lower = cesaro_means(a, delta, big_n)?;
    let p = cesaro_numbers(rho - 1.0, big_n)?;
    let q = cesaro_numbers(delta, big_n)?;
    let top = cesaro_number(delta + rho, big_n as u64)?;
    let s: f64 = (0..=big_n).map(|l| p[l] * q[big_n - l] * lower[big_n - l]).sum();
    Ok(s / top)
}

/// Both sides of `S̃_R^{δ,c} = (1 - c/R)^δ S̃_{R-c}^δ`.
pub fn shifted_riesz_identity_check(delta: f64, c: f64, r: f64, a: &CoeffSequence) -> Result<(f64, f64)> {
    if !(r > c) || !(r > 0.0) {
        return Err(Error::InvalidSpec(format!("radius {r} must exceed the shift {c} and zero")));
    }
    let lhs = apply(&SummationSpec::shifted_riesz(delta, c, r), a)?;
    let inner = apply(&SummationSpec::riesz(delta, r - c), a)?;
    Ok((lhs, ((r - c) / r).powf(delta) * inner))
}

/// Both sides of `B_R^δ = (1 + c²/R²)^δ B^{δ,c}_{√(R²+c²)}`, `c = (n-1)/2`.
pub fn bochner_riesz_reduction(n: usize, delta: f64, r: f64, a: &CoeffSequence) -> Result<(f64, f64)> {
    let lhs = apply(&SummationSpec::bochner_riesz(n, delta, r), a)?;
    let c = (n as f64 - 1.0) / 2.0;
    let big_r = (r * r + c * c).sqrt();
    let rhs = (1.0 + c * c / (r * r)).powf(delta) * apply(&SummationSpec::quadratic_riesz(delta, c, big_r), a)?;
    Ok((lhs, rhs))
}

/// `S̃_R^{δ+ρ,c}`, the mean for `φ(t) = t^{δ+ρ}`.
pub fn phi_mean(a: &CoeffSequence, delta: f64, c: f64, r: f64, rho: f64) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(Error::InvalidSpec(format!("lift order {rho} must be positive")));
    }
    apply(&SummationSpec::shifted_riesz(delta + rho, c, r), a)
}

/// `sup_{0 < r ≤ R} |S̃_r^{δ,c}(a)|`.
///
/// The mean is continuous in `r` for `δ > 0` and smooth between the jump
/// points `k + c`; each piece is sampled and the best sample refined by
/// golden-section search. Requires `c ≥ 0` (for `c < 0` the mean is
/// unbounded as `r → 0`).
pub fn shifted_riesz_sup(a: &CoeffSequence, delta: f64, c: f64, r_max: f64) -> Result<f64> {
    if c < 0.0 {
        return Err(Error::InvalidSpec(format!("supremum over small radii diverges for shift {c}")));
    }
    if !(r_max > 0.0) {
        return Err(Error::InvalidSpec(format!("radius {r_max} must be positive")));
    }
    let eval = |r: f64| apply(&SummationSpec::shifted_riesz(delta, c, r), a).map(f64::abs);
    let mut breaks: Vec<f64> = (0..a.len()).map(|k| k as f64 + c).filter(|&b| b > 0.0 && b < r_max).collect();
    breaks.insert(0, 0.0);
    breaks.push(r_max);
    let mut best = eval(r_max)?;
    const SAMPLES: usize = 24;
    for w in breaks.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi <= lo {
            continue;
        }
        let h = (hi - lo) / SAMPLES as f64;
        let mut arg = hi;
        let mut piece = eval(hi)?;
        for i in 1..SAMPLES {
            let r = lo + h * i as f64;
            let v = eval(r)?;
            if v > piece {
                piece = v;
                arg = r;
            }
        }
        // golden-section on the bracket around the best sample
        let (mut x0, mut x3) = ((arg - h).max(lo + 1e-12 * hi), (arg + h).min(hi));
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let mut x1 = x3 - g * (x3 - x0);
        let mut x2 = x0 + g * (x3 - x0);
        let (mut f1, mut f2) = (eval(x1)?, eval(x2)?);
        for _ in 0..60 {
            if f1 > f2 {
                x3 = x2;
                x2 = x1;
                f2 = f1;
                x1 = x3 - g * (x3 - x0);
                f1 = eval(x1)?;
            } else {
                x0 = x1;
                x1 = x2;
                f1 = f2;
                x2 = x0 + g * (x3 - x0);
                f2 = eval(x2)?;
            }
        }
        best = best.max(piece).max(f1).max(f2);
    }
    Ok(best)
}

fn min_norm_solve(mat: DMatrix<f64>, rhs: DVector<f64>) -> Vec<f64> {
    let svd = mat.svd(true, true);
    let tol = 1e-12 * svd.singular_values.max();
    svd.solve(&rhs, tol).expect("SVD with both factors").iter().copied().collect()
}

/// `c_1, …, c_m`, `m = ⌈δ⌉ + 2`, with
/// `A_k^δ = Σ_j c_j (k + j/m)^δ + O(k^{-2})`.
///
/// The `m` equations match the coefficients of `k^δ, k^{δ-1}, …, k^{δ-m+1}`;
/// a degenerate system (integer `δ`) is resolved by its minimum-norm
/// solution.
pub fn ingham_b_coeffs(delta: f64) -> Result<Vec<f64>> {
    if !(delta > 0.0) || delta > 14.0 {
        return Err(Error::InvalidSpec(format!("Ingham order {delta} must lie in (0, 14]")));
    }
    let m = delta.ceil() as usize + 2;
    let e = gamma_ratio_series(delta + 1.0, 1.0, m);
    let g = log_gamma(delta + 1.0)?.exp();
    let mut mat = DMatrix::zeros(m, m);
    let mut rhs = DVector::zeros(m);
    for i in 0..m {
        let b = gen_binomial(delta, i as u64);
        for j in 1..=m {
            mat[(i, j - 1)] = b * (j as f64 / m as f64).powi(i as i32);
        }
        rhs[i] = e[i] / g;
    }
    Ok(min_norm_solve(mat, rhs))
}

/// `sup_{k ∈ [k_lo, k_hi]} k² |A_k^δ - Σ_j c_j (k + j/m)^δ|`.
pub fn ingham_b_residual(delta: f64, coeffs: &[f64], k_lo: u64, k_hi: u64) -> Result<f64> {
    let m = coeffs.len() as f64;
    let mut worst = 0.0f64;
    for k in k_lo..=k_hi {
        let kf = k as f64;
        let approx: f64 = coeffs.iter().enumerate().map(|(j, c)| c * (kf + (j + 1) as f64 / m).powf(delta)).sum();
        worst = worst.max(kf * kf * (cesaro_number(delta, k)? - approx).abs());
    }
    Ok(worst)
}

/// `p_0(ε), …, p_m(ε)`, `m = ⌈δ⌉ + 1`, with
/// `(k+ε)^δ = Σ_j p_j(ε) A_{k-j}^δ + O(k^{-2})`, matched through the
/// orders `k^δ, …, k^{δ-m}`.
pub fn ingham_a_polys(delta: f64, eps: f64) -> Result<Vec<f64>> {
    if !(delta > 0.0) || delta > 14.0 {
        return Err(Error::InvalidSpec(format!("Ingham order {delta} must lie in (0, 14]")));
    }
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::InvalidSpec(format!("offset {eps} must lie in (0, 1]")));
    }
    let m = delta.ceil() as usize + 1;
    let g = log_gamma(delta + 1.0)?.exp();
    let mut mat = DMatrix::zeros(m + 1, m + 1);
    let mut rhs = DVector::zeros(m + 1);
    for j in 0..=m {
        // A_{k-j}^δ = Γ(k-j+δ+1) / (Γ(k-j+1) Γ(δ+1))
        let f = gamma_ratio_series(delta + 1.0 - j as f64, 1.0 - j as f64, m);
        for i in 0..=m {
            mat[(i, j)] = f[i] / g;
        }
    }
    for i in 0..=m {
        rhs[i] = gen_binomial(delta, i as u64) * eps.powi(i as i32);
    }
    Ok(min_norm_solve(mat, rhs))
}

/// `sup_{k ∈ [k_lo, k_hi]} k² |(k+ε)^δ - Σ_j p_j A_{k-j}^δ|`.
pub fn ingham_a_residual(delta: f64, eps: f64, polys: &[f64], k_lo: u64, k_hi: u64) -> Result<f64> {
    let mut worst = 0.0f64;
    for k in k_lo..=k_hi {
        let kf = k as f64;
        let mut approx = 0.0;
        for (j, p) in polys.iter().enumerate() {
            if (j as u64) <= k {
                approx += p * cesaro_number(delta, k - j as u64)?;
            }
        }
        worst = worst.max(kf * kf * ((kf + eps).powf(delta) - approx).abs());
    }
    Ok(worst)
}

/// Cesàro, Riesz and projection suprema of one sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Comparison {
    /// `sup_{N ≤ H} |S_N^δ|`
    pub cesaro_sup: f64,
    /// `sup_{0 < R ≤ H+1} |S̃_R^δ|`
    pub riesz_sup: f64,
    /// `sup_k |a_k| / (k+1)^δ`
    pub projection_sup: f64,
}

impl Comparison {
    /// Ratio controlled by the Cesàro-from-Riesz bound.
    pub fn cesaro_ratio(&self) -> f64 {
        self.cesaro_sup / (self.riesz_sup + self.projection_sup)
    }

    /// Ratio controlled by the Riesz-from-Cesàro bound.
    pub fn riesz_ratio(&self) -> f64 {
        self.riesz_sup / (self.cesaro_sup + self.projection_sup)
    }
}

/// The Riesz range reaches one past the horizon because Cesàro means at
/// `N` are expressed through Riesz means at radii in `(N, N+1]`.
pub fn compare_methods(a: &CoeffSequence, delta: f64, horizon: f64) -> Result<Comparison> {
    if !(delta > 0.0) {
        return Err(Error::InvalidSpec(format!("comparison order {delta} must be positive")));
    }
    if !(horizon >= 0.0) {
        return Err(Error::InvalidSpec(format!("horizon {horizon} must be nonnegative")));
    }
    let big_n = horizon.floor() as usize;
    let cesaro_sup = cesaro_means(a, delta, big_n)?.into_iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let riesz_sup = shifted_riesz_sup(a, delta, 0.0, horizon + 1.0)?;
    let projection_sup =
        a.values().iter().enumerate().map(|(k, v)| v.abs() / (k as f64 + 1.0).powf(delta)).fold(0.0, f64::max);
    Ok(Comparison { cesaro_sup, riesz_sup, projection_sup })
}

/// Both sides of `B^{δ,c}_R = 2^δ S̃^{δ,c}_R + 2^δ Σ_{1≤ℓ≤L} C(δ,ℓ)(-1)^ℓ 2^{-ℓ} S̃^{δ+ℓ,c}_R`.
pub fn bochner_riesz_series(a: &CoeffSequence, delta: f64, c: f64, r: f64, terms: usize) -> Result<(f64, f64)> {
    let lhs = apply(&SummationSpec::quadratic_riesz(delta, c, r), a)?;
    let two = (delta * LN_2).exp();
    let mut rhs = apply(&SummationSpec::shifted_riesz(delta, c, r), a)?;
    for l in 1..=terms {
        let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
        let coeff = gen_binomial(delta, l as u64) * sign * 0.5f64.powi(l as i32);
        if coeff != 0.0 {
            rhs += coeff * apply(&SummationSpec::shifted_riesz(delta + l as f64, c, r), a)?;
        }
    }
    Ok((lhs, two * rhs))
}

/// `(|B^{δ,c}_R - 2^δ S̃^{δ,c}_R|, sup_{r≤R} |S̃^{δ+1,c}_r|)`.
pub fn bochner_riesz_remainder(a: &CoeffSequence, delta: f64, c: f64, r: f64) -> Result<(f64, f64)> {
    let b = apply(&SummationSpec::quadratic_riesz(delta, c, r), a)?;
    let s = apply(&SummationSpec::shifted_riesz(delta, c, r), a)?;
    let rem = (b - (delta * LN_2).exp() * s).abs();
    Ok((rem, shifted_riesz_sup(a, delta + 1.0, c, r)?))
}
