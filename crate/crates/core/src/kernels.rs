//! Zonal and Cesàro kernels on `S^n` as functions of `(N, θ)`.
//!
//! At the critical index `δ₀ = (n-1)/2` the Cesàro kernel splits into a
//! Jacobi main term near the pole, a correction series in higher-order
//! Cesàro kernels, and the part beyond `π/2`:
//! `K_N = K̃_N^{(0)} + E_N^{(0)} + K_N^{(π)}`.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{domain, Error, Result};
use crate::specfun::{
    cesaro_number, gegenbauer_sequence, gen_binomial, jacobi_eval, log_gamma, JacobiRecurrence, OrthoPolyParams,
};
use crate::sphere::{distance_unchecked, AtomicMeasure, SpherePoint};

/// Default number of terms kept in the correction series.
pub const DEFAULT_TRUNC: usize = 40;

/// The critical index `(n-1)/2`.
pub fn critical_index(n: usize) -> f64 {
    (n as f64 - 1.0) / 2.0
}

fn lambda(n: usize) -> f64 {
    (n as f64 - 1.0) / 2.0
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(domain("sphere dimension", n as f64));
    }
    Ok(())
}

fn check_theta(theta: f64) -> Result<()> {
    if !(0.0..=PI).contains(&theta) {
        return Err(domain("geodesic angle", theta));
    }
    Ok(())
}

/// `dim H_k^n = C(k+n, k) - C(k-2+n, k-2)`, computed in floating point.
pub fn harmonic_dimension(n: usize, k: u64) -> f64 {
    let nf = n as f64;
    let kf = k as f64;
    // (2k+n-1)(k+n-2)! / (k!(n-1)!)
    if k == 0 {
        return 1.0;
    }
    let mut prod = (2.0 * kf + nf - 1.0) / (nf - 1.0);
    for j in 1..=(n - 2) {
        prod *= (kf + j as f64) / j as f64;
    }
    prod
}

/// `Z_k(θ) = ((k+λ)/λ) C_k^λ(cos θ)`, `λ = (n-1)/2`.
pub fn zonal_kernel(n: usize, k: u64, theta: f64) -> Result<f64> {
    check_n(n)?;
    check_theta(theta)?;
    let l = lambda(n);
    let c = gegenbauer_sequence(l, k as usize, theta.cos());
    Ok((k as f64 + l) / l * c[k as usize])
}

/// `Z_0(θ), …, Z_kmax(θ)`.
pub fn zonal_sequence(n: usize, kmax: usize, theta: f64) -> Result<Vec<f64>> {
    check_n(n)?;
    check_theta(theta)?;
    let l = lambda(n);
    let mut c = gegenbauer_sequence(l, kmax, theta.cos());
    for (k, v) in c.iter_mut().enumerate() {
        *v *= (k as f64 + l) / l;
    }
    Ok(c)
}

/// Normalised Cesàro weights `A_{N-k}^δ / A_N^δ` for `k = 0..=N`.
pub fn cesaro_weights(delta: f64, big_n: usize) -> Result<Vec<f64>> {
    if !(delta > -1.0) {
        return Err(domain("Cesàro order", delta));
    }
    let mut w = Vec::with_capacity(big_n + 1);
    let mut cur = 1.0;
    w.push(cur);
    for k in 0..big_n {
        let j = (big_n - k) as f64;
        cur *= j / (j + delta);
        w.push(cur);
    }
    Ok(w)
}

/// `K_N^δ(θ) = Σ_{k≤N} (A_{N-k}^δ / A_N^δ) Z_k(θ)`, summed directly.
pub fn cesaro_kernel(n: usize, delta: f64, big_n: u64, theta: f64) -> Result<f64> {
    let z = zonal_sequence(n, big_n as usize, theta)?;
    cesaro_from_zonal(&z, delta, big_n as usize)
}

pub(crate) fn cesaro_from_zonal(z: &[f64], delta: f64, big_n: usize) -> Result<f64> {
    let w = cesaro_weights(delta, big_n)?;
    Ok(w.iter().zip(z).map(|(a, b)| a * b).sum())
}

/// `K_N^δ(θ)` for every `N ≤ nmax`, sharing one zonal sequence.
pub fn cesaro_kernel_sequence(n: usize, delta: f64, nmax: usize, theta: f64) -> Result<Vec<f64>> {
    let z = zonal_sequence(n, nmax, theta)?;
    (0..=nmax).map(|big_n| cesaro_from_zonal(&z, delta, big_n)).collect()
}

/// Szegő coefficient `C_N` of the critical-index expansion,
/// `C_N = √π 2^{1-n} Γ(N+(3n-1)/2) Γ(2N+(3n+1)/2)
///        / (Γ((n+1)/2) Γ(N+n/2) Γ(2N+2n) A_N^{δ₀})`.
pub fn szego_coefficient(n: usize, big_n: u64) -> Result<f64> {
    check_n(n)?;
    if big_n == 0 {
        return Err(domain("Szegő coefficient order", 0.0));
    }
    let nf = n as f64;
    let nn = big_n as f64;
    let ln = 0.5 * PI.ln()
        + (1.0 - nf) * std::f64::consts::LN_2
        + log_gamma(nn + (3.0 * nf - 1.0) / 2.0)?
        + log_gamma(2.0 * nn + (3.0 * nf + 1.0) / 2.0)?
        - log_gamma((nf + 1.0) / 2.0)?
        - log_gamma(nn + nf / 2.0)?
        - log_gamma(2.0 * nn + 2.0 * nf)?;
    Ok(ln.exp() / cesaro_number(critical_index(n), big_n)?)
}

/// `lim C_N N^{-1/2} = √π 2^{-3(n-1)/2}` for [`szego_coefficient`].
pub fn szego_limit(n: usize) -> f64 {
    PI.sqrt() * 2f64.powf(-1.5 * (n as f64 - 1.0))
}

/// The coefficient exactly as it is usually displayed,
/// `1 / (A_N^{δ₀} 2^{n-1} Γ(n/2) Γ(N+n/2) Γ(2N+2n-1) / (Γ(N+3n/2-1) Γ(2N+3n/2)))`.
/// It does not satisfy the expansion identity; kept for comparison.
pub fn szego_coefficient_displayed(n: usize, big_n: u64) -> Result<f64> {
    check_n(n)?;
    if big_n == 0 {
        return Err(domain("Szegő coefficient order", 0.0));
    }
    let nf = n as f64;
    let nn = big_n as f64;
    let ln = (nf - 1.0) * std::f64::consts::LN_2
        + log_gamma(nf / 2.0)?
        + log_gamma(nn + nf / 2.0)?
        + log_gamma(2.0 * nn + 2.0 * nf - 1.0)?
        - log_gamma(nn + 1.5 * nf - 1.0)?
        - log_gamma(2.0 * nn + 1.5 * nf)?;
    Ok((-ln).exp() / cesaro_number(critical_index(n), big_n)?)
}

/// `2^{-(3n-4)/2} Γ((n+1)/2) / Γ(n/2)`, the displayed limit of `C_N N^{-1/2}`.
pub fn szego_limit_displayed(n: usize) -> f64 {
    let nf = n as f64;
    let lg = log_gamma((nf + 1.0) / 2.0).expect("positive") - log_gamma(nf / 2.0).expect("positive");
    2f64.powf(-(3.0 * nf - 4.0) / 2.0) * lg.exp()
}

/// `k(θ) = π^{-1/2} (sin θ/2)^{-n} (sin (π-θ)/2)^{-(n-1)/2}`.
pub fn amplitude(n: usize, theta: f64) -> Result<f64> {
    check_n(n)?;
    if !(theta > 0.0 && theta < PI) {
        return Err(Error::Singular { distance: theta });
    }
    let nf = n as f64;
    let s = (0.5 * theta).sin();
    let c = (0.5 * theta).cos();
    Ok(s.powf(-nf) * c.powf(-(nf - 1.0) / 2.0) / PI.sqrt())
}

/// Jacobi parameters `(n - 1/2, (n-2)/2)` of the main term.
pub fn main_params(n: usize) -> OrthoPolyParams {
    let nf = n as f64;
    OrthoPolyParams::jacobi(nf - 0.5, (nf - 2.0) / 2.0).expect("valid Jacobi parameters")
}

/// `C_N P_N^{(n-1/2,(n-2)/2)}(cos θ)` for `θ ≤ π/2`, zero beyond.
pub fn main_term(n: usize, big_n: u64, theta: f64) -> Result<f64> {
    check_theta(theta)?;
    if theta > FRAC_PI_2 {
        check_n(n)?;
        return Ok(0.0);
    }
    let c = szego_coefficient(n, big_n)?;
    Ok(c * jacobi_eval(main_params(n), big_n, theta.cos())?)
}

/// Leading asymptotic form of the main term,
/// `C_N N^{-1/2} k(θ) cos((N + (3n-1)/4) θ - nπ/2)`.
pub fn main_term_asymptotic(n: usize, big_n: u64, theta: f64) -> Result<f64> {
    let nn = big_n as f64;
    let phase = (nn + (3.0 * n as f64 - 1.0) / 4.0) * theta - n as f64 * FRAC_PI_2;
    Ok(szego_coefficient(n, big_n)? / nn.sqrt() * amplitude(n, theta)? * phase.cos())
}

/// Coefficients `c_ℓ` with `E_N = Σ_{ℓ≥1} c_ℓ K_N^{δ₀+ℓ}`:
/// `c_ℓ = -(-1)^ℓ C(δ₀, ℓ) (N+(n+1)/2)_ℓ / (2N+(3n+1)/2)_ℓ`.
pub fn error_coefficients(n: usize, big_n: u64, trunc: usize) -> Vec<f64> {
    let (a, b) = error_shifts(n, big_n);
    let d0 = critical_index(n);
    let mut ratio = 1.0;
    (1..=trunc)
        .map(|l| {
            let i = (l - 1) as f64;
            ratio *= (a + i) / (b + i);
            let sign = if l % 2 == 0 { -1.0 } else { 1.0 };
            sign * gen_binomial(d0, l as u64) * ratio
        })
        .collect()
}

fn error_shifts(n: usize, big_n: u64) -> (f64, f64) {
    let nf = n as f64;
    let nn = big_n as f64;
    (nn + (nf + 1.0) / 2.0, 2.0 * nn + (3.0 * nf + 1.0) / 2.0)
}

/// `Σ_{ℓ>trunc} |c_ℓ|`, summed until the remainder is negligible. For odd
/// `n` the binomial vanishes past `δ₀` and the tail is exactly zero.
pub fn error_tail_weight(n: usize, big_n: u64, trunc: usize) -> f64 {
    let (a, b) = error_shifts(n, big_n);
    let d0 = critical_index(n);
    // |c_ℓ| ~ ℓ^{-p}
    let p = 1.0 + d0 + b - a;
    let mut ratio = 1.0;
    let mut binom = 1.0;
    let mut tail = 0.0;
    for l in 1..=2_000_000usize {
        let lf = l as f64;
        ratio *= (a + lf - 1.0) / (b + lf - 1.0);
        binom *= (d0 - lf + 1.0) / lf;
        if binom == 0.0 {
            return tail;
        }
        let term = (binom * ratio).abs();
        if l > trunc {
            tail += term;
            let rest = term * lf / (p - 1.0);
            if rest <= 1e-17 * tail {
                return tail + rest;
            }
        }
    }
    tail
}

/// Truncated correction series with a bound on what was left out.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorSeries {
    pub value: f64,
    /// `K_N^{δ₀+1}(0) Σ_{ℓ>L} |c_ℓ|`, which dominates the neglected terms
    /// because `|K_N^δ(θ)| ≤ K_N^δ(0)` and `K_N^δ(0)` decreases in `δ`.
    pub tail_bound: f64,
}

/// `E_N(θ)` through `ℓ = trunc`.
pub fn error_series(n: usize, big_n: u64, theta: f64, trunc: usize) -> Result<ErrorSeries> {
    check_n(n)?;
    if trunc == 0 {
        return Err(domain("error series truncation", 0.0));
    }
    if !(0.0..=FRAC_PI_2).contains(&theta) {
        return Err(domain("error series angle", theta));
    }
    let nmax = big_n as usize;
    let z = zonal_sequence(n, nmax, theta)?;
    error_series_from_zonal(n, big_n, &z, trunc)
}

fn error_series_from_zonal(n: usize, big_n: u64, z: &[f64], trunc: usize) -> Result<ErrorSeries> {
    let nmax = big_n as usize;
    let d0 = critical_index(n);
    let coeffs = error_coefficients(n, big_n, trunc);
    let mut value = 0.0;
    for (l, c) in coeffs.iter().enumerate() {
        if *c != 0.0 {
            value += c * cesaro_from_zonal(z, d0 + (l + 1) as f64, nmax)?;
        }
    }
    let dims: Vec<f64> = (0..=big_n).map(|k| harmonic_dimension(n, k)).collect();
    let k_pole = cesaro_from_zonal(&dims, d0 + 1.0, nmax)?;
    Ok(ErrorSeries { value, tail_bound: k_pole * error_tail_weight(n, big_n, trunc) })
}

/// `K_N = K̃_N^{(0)} + E_N^{(0)} + K_N^{(π)}` at one angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelDecomposition {
    pub main: f64,
    pub error: f64,
    pub antipodal: f64,
    pub big_n: u64,
    pub theta: f64,
    pub trunc: usize,
    /// The directly summed critical-index kernel.
    pub full: f64,
    pub tail_bound: f64,
}

impl KernelDecomposition {
    pub fn total(&self) -> f64 {
        self.main + self.error + self.antipodal
    }
}

pub fn decompose(n: usize, big_n: u64, theta: f64, trunc: usize) -> Result<KernelDecomposition> {
    check_n(n)?;
    check_theta(theta)?;
    if big_n == 0 {
        return Err(domain("decomposition order", 0.0));
    }
    if trunc == 0 {
        return Err(domain("error series truncation", 0.0));
    }
    let z = zonal_sequence(n, big_n as usize, theta)?;
    let full = cesaro_from_zonal(&z, critical_index(n), big_n as usize)?;
    if theta > FRAC_PI_2 {
        return Ok(KernelDecomposition {
            main: 0.0,
            error: 0.0,
            antipodal: full,
            big_n,
            theta,
            trunc,
            full,
            tail_bound: 0.0,
        });
    }
    let main = main_term(n, big_n, theta)?;
    let es = error_series_from_zonal(n, big_n, &z, trunc)?;
    Ok(KernelDecomposition {
        main,
        error: es.value,
        antipodal: 0.0,
        big_n,
        theta,
        trunc,
        full,
        tail_bound: es.tail_bound,
    })
}

/// Szegő main term for all `N = 1..=nmax` at one angle, via the Jacobi
/// recurrence and a running coefficient table.
pub struct MainTermTable {
    coeffs: Vec<f64>,
    rec: JacobiRecurrence,
}

impl MainTermTable {
    pub fn new(n: usize, nmax: usize) -> Result<Self> {
        check_n(n)?;
        let coeffs = (0..=nmax)
            .map(|k| if k == 0 { Ok(0.0) } else { szego_coefficient(n, k as u64) })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { coeffs, rec: JacobiRecurrence::new(main_params(n), nmax) })
    }

    pub fn nmax(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coefficient(&self, big_n: usize) -> f64 {
        self.coeffs[big_n]
    }

    /// Writes `C_N P_N(cos θ)` into `out[N]` (`out[0] = 0`), ignoring the
    /// `π/2` cutoff.
    pub fn fill(&self, theta: f64, out: &mut [f64]) {
        self.rec.fill(theta.cos(), out);
        for (v, c) in out.iter_mut().zip(&self.coeffs) {
            *v *= c;
        }
    }
}

/// `Σ_j w_j kernel(N, |x - y_j|)`.
pub fn convolve_atomic<F>(kernel: F, mu: &AtomicMeasure, x: &SpherePoint, big_n: u64) -> Result<f64>
where
    F: Fn(u64, f64) -> Result<f64>,
{
    if x.dim() != mu.dim() {
        return Err(Error::DimensionMismatch { left: mu.dim(), right: x.dim() });
    }
    let mut s = 0.0;
    for (y, w) in mu.atoms() {
        s += w * kernel(big_n, distance_unchecked(x.coords(), y.coords()))?;
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::zonal_rule;
    use crate::sphere::{sample_uniform, SpherePoint};
    use proptest::prelude::*;

    #[test]
    fn zonal_examples() {
        assert!((zonal_kernel(2, 0, 1.234).unwrap() - 1.0).abs() < 1e-15);
        for k in 0..50 {
            assert!((zonal_kernel(2, k, 0.0).unwrap() - (2 * k + 1) as f64).abs() < 1e-11);
        }
        assert_eq!(zonal_kernel(2, 2, 0.0).unwrap(), 5.0);
        assert!(zonal_kernel(1, 2, 0.0).is_err());
    }

    #[test]
    fn dimension_formula() {
        fn binom(a: u64, b: u64) -> f64 {
            (0..b).fold(1.0, |acc, i| acc * (a - i) as f64 / (i + 1) as f64)
        }
        for n in 2..6usize {
            for k in 0..=100u64 {
                let want = binom(k + n as u64, k) - if k >= 2 { binom(k - 2 + n as u64, k - 2) } else { 0.0 };
                assert_eq!(harmonic_dimension(n, k).round(), want.round(), "n={n} k={k}");
            }
        }
    }

    #[test]
    fn cesaro_examples() {
        assert_eq!(cesaro_kernel(3, 0.7, 0, 2.0).unwrap(), 1.0);
        assert!((cesaro_kernel(2, 0.0, 1, 0.0).unwrap() - 4.0).abs() < 1e-15);
        let rule = zonal_rule(3, 60).unwrap();
        for &(d, nn) in &[(0.0, 10u64), (1.0, 30), (2.5, 50)] {
            let q = rule.integrate(|t| cesaro_kernel(3, d, nn, t.clamp(-1.0, 1.0).acos()).unwrap());
            assert!((q - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sequence_matches_direct() {
        let seq = cesaro_kernel_sequence(2, 0.5, 30, 0.8).unwrap();
        for (nn, v) in seq.iter().enumerate() {
            assert!((v - cesaro_kernel(2, 0.5, nn as u64, 0.8).unwrap()).abs() < 1e-12 * (1.0 + v.abs()));
        }
    }

    #[test]
    fn szego_coefficient_limits() {
        // frozen values of C_N N^{-1/2}
        let frozen =
            [(2usize, 16u64, 0.65304), (2, 256, 0.62834), (2, 4096, 0.62676), (3, 16, 0.25018), (3, 4096, 0.22167)];
        for (n, nn, want) in frozen {
            let got = szego_coefficient(n, nn).unwrap() / (nn as f64).sqrt();
            assert!((got - want).abs() < 1e-5, "n={n} N={nn}: {got}");
        }
        assert!((szego_limit(2) - 0.626657).abs() < 1e-6);
        assert!((szego_limit_displayed(2) - PI.sqrt() / 4.0).abs() < 1e-15);
        let mut prev = f64::INFINITY;
        for e in 4..=12 {
            let nn = 1u64 << e;
            let gap = (szego_coefficient(2, nn).unwrap() / (nn as f64).sqrt() - szego_limit(2)).abs();
            assert!(gap < prev);
            prev = gap;
        }
    }

    #[test]
    fn displayed_coefficient_misses_identity() {
        // the displayed normalisation leaves an O(1) residual
        let (n, nn, th) = (3, 20u64, 0.7);
        let full = cesaro_kernel(n, 1.0, nn, th).unwrap();
        let e = error_series(n, nn, th, 40).unwrap().value;
        let p = jacobi_eval(main_params(n), nn, th.cos()).unwrap();
        let good = full - szego_coefficient(n, nn).unwrap() * p - e;
        let bad = full - szego_coefficient_displayed(n, nn).unwrap() * p - e;
        assert!(good.abs() < 1e-10 * (1.0 + full.abs()));
        assert!(bad.abs() > 1e-3);
    }

    #[test]
    fn amplitude_examples() {
        let want = 2.0 * 2f64.powf(0.25) / PI.sqrt();
        assert!((amplitude(2, FRAC_PI_2).unwrap() - want).abs() < 1e-14);
        assert!(matches!(amplitude(2, 0.0), Err(Error::Singular { .. })));
        assert!(amplitude(2, PI).is_err());
        for &t in &[0.01, 0.3, 1.0, FRAC_PI_2] {
            assert!(amplitude(3, t).unwrap() >= t.powi(-3) / PI.sqrt());
        }
        let near = PI - 1e-4;
        let ratio = amplitude(3, near).unwrap() * (PI - near);
        let ratio2 = amplitude(3, PI - 1e-5).unwrap() * 1e-5;
        assert!((ratio / ratio2 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn main_term_examples() {
        assert_eq!(main_term(2, 7, 3.0 * PI / 4.0).unwrap(), 0.0);
        let c1 = szego_coefficient(2, 1).unwrap();
        assert!((main_term(2, 1, 0.0).unwrap() - 2.5 * c1).abs() < 1e-14);
    }

    #[test]
    fn szego_identity_n3_is_exact() {
        for &nn in &[5u64, 20, 100] {
            for &th in &[0.3, 0.7, 1.2] {
                let d = decompose(3, nn, th, DEFAULT_TRUNC).unwrap();
                assert!((d.full - d.total()).abs() <= 1e-10 * (1.0 + d.full.abs()));
                assert_eq!(d.tail_bound, 0.0);
            }
        }
    }

    #[test]
    fn szego_identity_n2_within_tail() {
        for &nn in &[5u64, 20, 100] {
            for &th in &[0.3, 0.7, 1.2] {
                let d = decompose(2, nn, th, DEFAULT_TRUNC).unwrap();
                let resid = (d.full - d.total()).abs();
                assert!(
                    resid <= d.tail_bound + 1e-11 * (1.0 + d.full.abs()),
                    "N={nn} θ={th}: {resid} > {}",
                    d.tail_bound
                );
            }
        }
    }

    #[test]
    fn decomposition_cutoff() {
        let d = decompose(2, 12, 2.0, 10).unwrap();
        assert_eq!((d.main, d.error), (0.0, 0.0));
        assert_eq!(d.antipodal, d.full);
        let d = decompose(2, 12, 1.0, 10).unwrap();
        assert_eq!(d.antipodal, 0.0);
    }

    #[test]
    fn tail_bound_decreases() {
        for &nn in &[10u64, 40, 200] {
            let tails: Vec<f64> = (1..=20).map(|l| error_tail_weight(2, nn, l)).collect();
            for w in tails.windows(2) {
                assert!(w[1] < 0.75 * w[0], "N={nn}: {tails:?}");
            }
        }
        assert_eq!(error_tail_weight(3, 10, 1), 0.0);
    }

    #[test]
    fn leading_error_term_sign() {
        let c = error_coefficients(2, 30, 1);
        let k = cesaro_kernel(2, 1.5, 30, 0.2).unwrap();
        assert!(k > 0.0);
        assert!(c[0] * k > 0.0 && -gen_binomial(0.5, 1) * k < 0.0);
    }

    #[test]
    fn main_term_table_matches() {
        let table = MainTermTable::new(2, 64).unwrap();
        let mut out = vec![0.0; 65];
        table.fill(0.9, &mut out);
        for nn in [1usize, 7, 64] {
            assert!((out[nn] - main_term(2, nn as u64, 0.9).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn reproducing_identity() {
        for n in [2usize, 3] {
            let rule = zonal_rule(n, 60).unwrap();
            for k in [0u64, 3, 17, 40] {
                for l in [0u64, 3, 40] {
                    let q = rule.integrate(|t| {
                        let th = t.clamp(-1.0, 1.0).acos();
                        zonal_kernel(n, k, th).unwrap() * zonal_kernel(n, l, th).unwrap()
                    });
                    let want = if k == l { harmonic_dimension(n, k) } else { 0.0 };
                    assert!((q - want).abs() < 1e-9 * want.max(1.0), "n={n} k={k} l={l}");
                }
            }
        }
    }

    #[test]
    fn convolution_examples() {
        let y = SpherePoint::basis(2, 0).unwrap();
        let x = SpherePoint::at_angle(2, 0.4).unwrap();
        let k = |nn: u64, th: f64| cesaro_kernel(2, 0.5, nn, th);
        let direct = k(9, 0.4).unwrap();
        let conv = convolve_atomic(k, &AtomicMeasure::dirac(y), &x, 9).unwrap();
        assert!((direct - conv).abs() < 1e-13);

        let mu = AtomicMeasure::uniform(2, sample_uniform(2, 9, 3).unwrap()).unwrap();
        assert!((convolve_atomic(k, &mu, &x, 0).unwrap() - 1.0).abs() < 1e-14);

        let sing = |_: u64, th: f64| amplitude(2, th);
        assert!(convolve_atomic(sing, &AtomicMeasure::dirac(x.clone()), &x, 1).is_err());
    }

    proptest! {
        #[test]
        fn convolution_is_linear(a in -2.0f64..2.0, b in -2.0f64..2.0, seed in 0u64..1000, nn in 0u64..40) {
            let m1 = AtomicMeasure::uniform(2, sample_uniform(2, 3, seed).unwrap()).unwrap();
            let m2 = AtomicMeasure::uniform(2, sample_uniform(2, 4, seed + 1).unwrap()).unwrap();
            let x = sample_uniform(2, 1, seed + 2).unwrap().remove(0);
            let k = |nn: u64, th: f64| cesaro_kernel(2, 0.5, nn, th);
            let lhs = convolve_atomic(k, &AtomicMeasure::combine(a, &m1, b, &m2).unwrap(), &x, nn).unwrap();
            let rhs = a * convolve_atomic(k, &m1, &x, nn).unwrap() + b * convolve_atomic(k, &m2, &x, nn).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()));
        }

        #[test]
        fn kernel_bounded_by_pole_value(delta in 0.0f64..4.0, nn in 0u64..60, th in 0.0f64..PI) {
            let pole = cesaro_kernel(3, delta, nn, 0.0).unwrap();
            prop_assert!(cesaro_kernel(3, delta, nn, th).unwrap().abs() <= pole * (1.0 + 1e-12));
        }
    }
}
