//! Divergence machinery at the critical index.
//!
//! Projections of atomic measures, the Kronecker limsup target of the
//! main-term convolution, running-supremum scans over `N`, the smoothing
//! `f = S^{δ₀+1}_{N₁} μ`, and the staged construction of a function whose
//! Cesàro means grow on most of a grid.
//!
//! All `N`-indexed Cesàro means of a fixed spectral sequence `b_k` are
//! obtained at once from the linear convolution `Σ_k A_{N-k}^δ b_k`,
//! computed directly for small `N` and by FFT beyond.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::kernels::{amplitude, cesaro_kernel, critical_index, szego_limit, MainTermTable};
use crate::specfun::{cesaro_number, cesaro_numbers};
use crate::sphere::{
    ball_measure, ball_radius_for_measure, distance_unchecked, greedy_packing, low_discrepancy_grid,
    remove_antipodal_pairs, AtomicMeasure, QuadEstimate, SpherePoint, ANTIPODAL_TOL, ATOM_TOL,
};

fn check_dims(mu: &AtomicMeasure, x: &SpherePoint) -> Result<()> {
    if mu.dim() != x.dim() {
        return Err(Error::DimensionMismatch { left: mu.dim(), right: x.dim() });
    }
    Ok(())
}

/// Adds `w · C_k^λ(t)` for `k = 0..out.len()` into `out`.
fn add_gegenbauer(lambda: f64, t: f64, w: f64, out: &mut [f64]) {
    let len = out.len();
    if len == 0 {
        return;
    }
    let mut prev = 1.0;
    out[0] += w;
    if len == 1 {
        return;
    }
    let mut cur = 2.0 * lambda * t;
    out[1] += w * cur;
    for k in 1..len - 1 {
        let kf = k as f64;
        let next = (2.0 * (kf + lambda) * t * cur - (kf + 2.0 * lambda - 1.0) * prev) / (kf + 1.0);
        out[k + 1] += w * next;
        prev = cur;
        cur = next;
    }
}

fn projections_into(mu: &AtomicMeasure, x: &SpherePoint, out: &mut [f64]) {
    out.iter_mut().for_each(|v| *v = 0.0);
    let lambda = critical_index(mu.dim());
    for (y, w) in mu.atoms() {
        let t = distance_unchecked(x.coords(), y.coords()).cos();
        add_gegenbauer(lambda, t, *w, out);
    }
    for (k, v) in out.iter_mut().enumerate() {
        *v *= (k as f64 + lambda) / lambda;
    }
}

/// `(proj_k μ)(x) = Σ_j w_j Z_k(|x - y_j|)`.
pub fn measure_projection(mu: &AtomicMeasure, k: u64, x: &SpherePoint) -> Result<f64> {
    Ok(measure_projections(mu, k as usize, x)?[k as usize])
}

/// `(proj_k μ)(x)` for `k = 0..=kmax`.
pub fn measure_projections(mu: &AtomicMeasure, kmax: usize, x: &SpherePoint) -> Result<Vec<f64>> {
    check_dims(mu, x)?;
    let mut out = vec![0.0; kmax + 1];
    projections_into(mu, x, &mut out);
    Ok(out)
}

/// Kronecker limsup of `|K̃_N^{(0)} * μ(x)|`: `C_∞ Σ_j |w_j| k(|x - y_j|)`
/// over atoms within `π/2`, with `C_∞ = lim C_N N^{-1/2}`.
///
/// The dimension is taken from `μ`.
pub fn kronecker_target(mu: &AtomicMeasure, x: &SpherePoint) -> Result<f64> {
    check_dims(mu, x)?;
    let n = mu.dim();
    let mut s = 0.0;
    for (y, w) in mu.atoms() {
        let d = distance_unchecked(x.coords(), y.coords());
        if d < ATOM_TOL || PI - d < ANTIPODAL_TOL {
            return Err(Error::Singular { distance: d });
        }
        if d <= FRAC_PI_2 {
            s += w.abs() * amplitude(n, d)?;
        }
    }
    Ok(szego_limit(n) * s)
}

/// Running supremum of the main-term convolution at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    pub x: SpherePoint,
    /// `max_{1≤N≤N_max} |K̃_N^{(0)} * μ(x)|`.
    pub sup_abs: f64,
    pub argmax_n: usize,
    /// Kronecker limsup; `+∞` when `x` is an atom or antipodal to one.
    pub target: f64,
    pub n_max: usize,
}

/// Evaluates `K̃_N^{(0)} * μ(x)` for all `N ≤ N_max`, reusing one table of
/// Szegő coefficients.
pub struct Scanner {
    n: usize,
    table: MainTermTable,
}

impl Scanner {
    pub fn new(n: usize, n_max: usize) -> Result<Self> {
        if n_max == 0 {
            return Err(domain("scan horizon", 0.0));
        }
        Ok(Self { n, table: MainTermTable::new(n, n_max)? })
    }

    pub fn n_max(&self) -> usize {
        self.table.nmax()
    }

    /// `K̃_N^{(0)} * μ(x)` at index `N` for `N = 0..=N_max`.
    pub fn values(&self, mu: &AtomicMeasure, x: &SpherePoint) -> Result<Vec<f64>> {
        check_dims(mu, x)?;
        if mu.dim() != self.n {
            return Err(Error::DimensionMismatch { left: self.n, right: mu.dim() });
        }
        let len = self.n_max() + 1;
        let mut acc = vec![0.0; len];
        let mut buf = vec![0.0; len];
        for (y, w) in mu.atoms() {
            let d = distance_unchecked(x.coords(), y.coords());
            if d > FRAC_PI_2 {
                continue;
            }
            self.table.fill(d, &mut buf);
            for (a, b) in acc.iter_mut().zip(&buf) {
                *a += w * b;
            }
        }
        Ok(acc)
    }

    pub fn scan(&self, mu: &AtomicMeasure, x: &SpherePoint) -> Result<ScanResult> {
        let vals = self.values(mu, x)?;
        let (mut argmax_n, mut sup_abs) = (1, 0.0);
        for (big_n, v) in vals.iter().enumerate().skip(1) {
            if v.abs() > sup_abs {
                sup_abs = v.abs();
                argmax_n = big_n;
            }
        }
        let target = match kronecker_target(mu, x) {
            Ok(t) => t,
            Err(Error::Singular { .. }) => f64::INFINITY,
            Err(e) => return Err(e),
        };
        Ok(ScanResult { x: x.clone(), sup_abs, argmax_n, target, n_max: self.n_max() })
    }
}

/// `max_{1≤N≤N_max} |K̃_N^{(0)} * μ(x)|` together with the Kronecker target.
pub fn scan_sup(mu: &AtomicMeasure, x: &SpherePoint, n_max: usize) -> Result<ScanResult> {
    Scanner::new(mu.dim(), n_max)?.scan(mu, x)
}

/// [`scan_sup`] over many points; results are in input order.
pub fn scan_grid(mu: &AtomicMeasure, points: &[SpherePoint], n_max: usize) -> Result<Vec<ScanResult>> {
    let scanner = Scanner::new(mu.dim(), n_max)?;
    points.par_iter().map(|x| scanner.scan(mu, x)).collect()
}

const DIRECT_HORIZON: usize = 64;

/// All Cesàro means `(1/A_N^δ) Σ_{k≤N} A_{N-k}^δ b_k`, `N ≤ horizon`, of
/// a spectral sequence `b`.
pub struct CesaroConvolver {
    horizon: usize,
    a: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    a_hat: Vec<Complex<f64>>,
    scratch_len: usize,
}

impl CesaroConvolver {
    pub fn new(delta: f64, horizon: usize) -> Result<Self> {
        let a = cesaro_numbers(delta, horizon)?;
        let size = (2 * horizon + 2).next_power_of_two();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(size);
        let inverse = planner.plan_fft_inverse(size);
        let mut a_hat: Vec<Complex<f64>> = (0..size).map(|i| Complex::new(*a.get(i).unwrap_or(&0.0), 0.0)).collect();
        forward.process(&mut a_hat);
        let scratch_len = forward.get_inplace_scratch_len().max(inverse.get_inplace_scratch_len());
        Ok(Self { horizon, a, forward, inverse, a_hat, scratch_len })
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Means for `N = 0..=horizon`; `b` may be shorter (missing entries are
    /// zero) but not longer than `horizon + 1`.
    pub fn means(&self, b: &[f64]) -> Vec<f64> {
        let mut work = ConvolverWork::default();
        self.means_with(b, &mut work)
    }

    fn means_with(&self, b: &[f64], work: &mut ConvolverWork) -> Vec<f64> {
        assert!(b.len() <= self.horizon + 1, "spectral sequence longer than horizon");
        let h = self.horizon;
        let mut out = vec![0.0; h + 1];
        let direct = h.min(DIRECT_HORIZON);
        for (big_n, o) in out.iter_mut().enumerate().take(direct + 1) {
            let s: f64 = (0..=big_n.min(b.len().saturating_sub(1))).map(|k| self.a[big_n - k] * b[k]).sum();
            *o = s / self.a[big_n];
        }
        if h > direct && !b.is_empty() {
            let size = self.a_hat.len();
            work.buf.clear();
            work.buf.extend((0..size).map(|i| Complex::new(*b.get(i).unwrap_or(&0.0), 0.0)));
            work.scratch.resize(self.scratch_len, Complex::new(0.0, 0.0));
            self.forward.process_with_scratch(&mut work.buf, &mut work.scratch);
            for (v, a) in work.buf.iter_mut().zip(&self.a_hat) {
                *v *= a;
            }
            self.inverse.process_with_scratch(&mut work.buf, &mut work.scratch);
            let scale = 1.0 / size as f64;
            for big_n in direct + 1..=h {
                out[big_n] = work.buf[big_n].re * scale / self.a[big_n];
            }
        }
        out
    }
}

#[derive(Default)]
struct ConvolverWork {
    buf: Vec<Complex<f64>>,
    scratch: Vec<Complex<f64>>,
}

/// `K_N * μ(x)` for `N = 0..=nmax`, with `K_N` the critical-index kernel.
pub fn kernel_means(mu: &AtomicMeasure, x: &SpherePoint, nmax: usize) -> Result<Vec<f64>> {
    let p = measure_projections(mu, nmax, x)?;
    Ok(CesaroConvolver::new(critical_index(mu.dim()), nmax)?.means(&p))
}

/// `max_{1≤N≤N_max} |(K_N - K̃_N^{(0)}) * μ(x)|`.
pub fn decomposition_residual_sup(
    mu: &AtomicMeasure,
    x: &SpherePoint,
    scanner: &Scanner,
    conv: &CesaroConvolver,
) -> Result<f64> {
    let nmax = scanner.n_max().min(conv.horizon());
    let p = measure_projections(mu, nmax, x)?;
    let full = conv.means(&p);
    let main = scanner.values(mu, x)?;
    Ok((1..=nmax).map(|big_n| (full[big_n] - main[big_n]).abs()).fold(0.0, f64::max))
}

/// `f = S^{δ₀+1}_{N₁} μ` held spectrally: `f̂_k = (A^{δ₀+1}_{N₁-k}/A^{δ₀+1}_{N₁}) proj_k μ`.
#[derive(Debug, Clone)]
pub struct SmoothedMeasure {
    mu: AtomicMeasure,
    n1: usize,
    weights: Vec<f64>,
}

pub fn smooth_to_polynomial(mu: &AtomicMeasure, n1: usize) -> Result<SmoothedMeasure> {
    let weights = crate::kernels::cesaro_weights(critical_index(mu.dim()) + 1.0, n1)?;
    Ok(SmoothedMeasure { mu: mu.clone(), n1, weights })
}

impl SmoothedMeasure {
    pub fn n(&self) -> usize {
        self.mu.dim()
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn measure(&self) -> &AtomicMeasure {
        &self.mu
    }

    /// Spectral multiplier on `proj_k μ`; zero for `k > N₁`.
    pub fn weight(&self, k: usize) -> f64 {
        self.weights.get(k).copied().unwrap_or(0.0)
    }

    /// `f̂_k(x)` for `k = 0..=min(kmax, N₁)`.
    pub fn spectrum(&self, x: &SpherePoint, kmax: usize) -> Result<Vec<f64>> {
        let mut p = measure_projections(&self.mu, kmax.min(self.n1), x)?;
        for (k, v) in p.iter_mut().enumerate() {
            *v *= self.weights[k];
        }
        Ok(p)
    }

    /// `K_N * f(x)` by the direct spectral sum.
    pub fn kernel_convolution(&self, x: &SpherePoint, big_n: usize) -> Result<f64> {
        let b = self.spectrum(x, big_n)?;
        let c = crate::kernels::cesaro_weights(critical_index(self.n()), big_n)?;
        Ok(b.iter().zip(&c).map(|(u, v)| u * v).sum())
    }

    /// `K_N * f(x)` for `N = 0..=conv.horizon()`.
    pub fn kernel_convolutions(&self, x: &SpherePoint, conv: &CesaroConvolver) -> Result<Vec<f64>> {
        Ok(conv.means(&self.spectrum(x, conv.horizon())?))
    }

    /// `f(x) = Σ_j w_j K^{δ₀+1}_{N₁}(|x - y_j|)`.
    pub fn eval(&self, x: &SpherePoint) -> Result<f64> {
        Ok(self.spectrum(x, self.n1)?.iter().sum())
    }

    /// Monte-Carlo `∫|f| dσ` against the normalised surface measure.
    ///
    /// Half the samples are uniform, half are drawn from caps of radius
    /// `6/(N₁+1)` around the atoms, where `f` concentrates; the estimator is
    /// `|f|/q` with `q` the mixture density. `f` is evaluated through a
    /// tabulated zonal profile with cubic interpolation.
    pub fn l1_norm(&self, samples: usize, seed: u64) -> Result<QuadEstimate> {
        if samples < 2 {
            return Err(domain("Monte-Carlo samples", samples as f64));
        }
        let n = self.n();
        let profile = ZonalProfile::smoothing_kernel(n, self.n1)?;
        let rho = (6.0 / (self.n1 as f64 + 1.0)).min(FRAC_PI_2);
        let cap = ball_measure(n, rho)?;
        let atoms = self.mu.atoms();
        let total_w: f64 = atoms.iter().map(|(_, w)| w.abs()).sum();
        if total_w == 0.0 {
            return Ok(QuadEstimate { estimate: 0.0, stderr: 0.0 });
        }
        let mut cumulative = Vec::with_capacity(atoms.len());
        let mut acc = 0.0;
        for (_, w) in atoms {
            acc += w.abs() / total_w;
            cumulative.push(acc);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts: Vec<SpherePoint> = (0..samples)
            .map(|_| {
                if rng.random::<bool>() {
                    Ok(uniform_point(n, &mut rng))
                } else {
                    let u: f64 = rng.random();
                    let j = cumulative.partition_point(|&c| c < u).min(atoms.len() - 1);
                    let theta = ball_radius_for_measure(n, rng.random::<f64>() * cap)?;
                    cap_point(&atoms[j].0, theta, &mut rng)
                }
            })
            .collect::<Result<_>>()?;
        let ratios: Vec<f64> = pts
            .par_iter()
            .map(|x| {
                let mut f = 0.0;
                let mut inside = 0.0;
                for (y, w) in atoms {
                    let d = distance_unchecked(x.coords(), y.coords());
                    f += w * profile.eval(d);
                    if d < rho {
                        inside += w.abs() / total_w;
                    }
                }
                let q = 0.5 + 0.5 * inside / cap;
                f.abs() / q
            })
            .collect();
        let m = ratios.len() as f64;
        let mean = ratios.iter().sum::<f64>() / m;
        let var = ratios.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / (m - 1.0);
        Ok(QuadEstimate { estimate: mean, stderr: (var / m).sqrt() })
    }
}

fn uniform_point(n: usize, rng: &mut ChaCha8Rng) -> SpherePoint {
    loop {
        let v: Vec<f64> = (0..=n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        if let Ok(p) = SpherePoint::from_ambient(v) {
            return p;
        }
    }
}

/// Point at geodesic distance `theta` from `y` in a uniform random direction.
fn cap_point(y: &SpherePoint, theta: f64, rng: &mut ChaCha8Rng) -> Result<SpherePoint> {
    let yc = y.coords();
    loop {
        let mut v: Vec<f64> = yc.iter().map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let dot: f64 = v.iter().zip(yc).map(|(a, b)| a * b).sum();
        v.iter_mut().zip(yc).for_each(|(a, b)| *a -= dot * b);
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 1e-9 {
            let (s, c) = theta.sin_cos();
            let p: Vec<f64> = yc.iter().zip(&v).map(|(a, b)| c * a + s * b / norm).collect();
            return SpherePoint::from_ambient(p);
        }
    }
}

/// Uniform table of a zonal profile on `[0, π]` with four-point Lagrange
/// interpolation.
struct ZonalProfile {
    step: f64,
    values: Vec<f64>,
}

impl ZonalProfile {
    fn smoothing_kernel(n: usize, n1: usize) -> Result<Self> {
        let nodes = 12 * (n1 + 1) + 4;
        let step = PI / nodes as f64;
        let delta = critical_index(n) + 1.0;
        let values = (0..=nodes)
            .into_par_iter()
            .map(|i| cesaro_kernel(n, delta, n1 as u64, (i as f64 * step).min(PI)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { step, values })
    }

    fn eval(&self, theta: f64) -> f64 {
        let last = self.values.len() - 1;
        let s = theta / self.step;
        let i = (s.floor() as usize).clamp(1, last - 2);
        let t = s - i as f64;
        let (f0, f1, f2, f3) = (self.values[i - 1], self.values[i], self.values[i + 1], self.values[i + 2]);
        // nodes at -1, 0, 1, 2
        -t * (t - 1.0) * (t - 2.0) / 6.0 * f0 + (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0 * f1
            - (t + 1.0) * t * (t - 2.0) / 2.0 * f2
            + (t + 1.0) * t * (t - 1.0) / 6.0 * f3
    }
}

/// `(1 - A^{δ₀+1}_{N₁-N₀}/A^{δ₀+1}_{N₁}) Σ_{k≤N₀} ‖Z_k‖_∞`, the smoothing
/// error bound for `N ≤ N₀ ≤ N₁`.
pub fn smoothing_bound(n: usize, n0: usize, n1: usize) -> Result<f64> {
    if n0 > n1 {
        return Err(domain("smoothing bound N0 (must not exceed N1)", n0 as f64));
    }
    let d = critical_index(n) + 1.0;
    let ratio = cesaro_number(d, (n1 - n0) as u64)? / cesaro_number(d, n1 as u64)?;
    // Σ_{k≤N₀} dim H_k = dim of polynomials of degree ≤ N₀ = C(N₀+n, n) + C(N₀+n-1, n)
    let total = binom(n0 + n, n) + if n0 >= 1 { binom(n0 + n - 1, n) } else { 0.0 };
    Ok((1.0 - ratio) * total)
}

fn binom(a: usize, b: usize) -> f64 {
    (0..b).fold(1.0, |acc, i| acc * (a - i) as f64 / (i + 1) as f64)
}

/// `‖K_N‖_∞` two ways: the pole value and a maximum over a θ-grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelSupNorm {
    /// `K_N(0) = (A^{n+δ₀}_N + A^{n+δ₀}_{N-1}) / A^{δ₀}_N`.
    pub at_pole: f64,
    pub grid_max: f64,
    pub grid_argmax: f64,
}

/// `K_N(0)` for the critical-index kernel.
///
/// The dimensions `dim H_k^n` are the coefficients of `(1+z)(1-z)^{-n}`
/// and `A^δ_k` those of `(1-z)^{-δ-1}`, so the Cesàro sum of dimensions
/// collapses to two Cesàro numbers of order `n + δ₀`.
pub fn kernel_pole_value(n: usize, big_n: u64) -> Result<f64> {
    if n < 2 {
        return Err(domain("sphere dimension", n as f64));
    }
    let d0 = critical_index(n);
    let hi = d0 + n as f64;
    let num = cesaro_number(hi, big_n)? + if big_n >= 1 { cesaro_number(hi, big_n - 1)? } else { 0.0 };
    Ok(num / cesaro_number(d0, big_n)?)
}

/// `max_{N≤nmax} ‖K_N‖_∞`, using that the maximum sits at the pole.
pub fn max_pole_value(n: usize, nmax: u64) -> Result<f64> {
    (0..=nmax).map(|k| kernel_pole_value(n, k)).try_fold(0.0f64, |m, v| Ok(m.max(v?)))
}

pub fn kernel_sup_norm(n: usize, big_n: u64) -> Result<KernelSupNorm> {
    let at_pole = kernel_pole_value(n, big_n)?;
    let d0 = critical_index(n);
    let scale = PI / (big_n as f64 + 1.0);
    let mut thetas: Vec<f64> = (0..=64).map(|i| scale * i as f64 / 64.0).collect();
    thetas.extend((1..=512).map(|i| PI * i as f64 / 512.0));
    let vals = thetas
        .par_iter()
        .map(|&t| cesaro_kernel(n, d0, big_n, t.min(PI)).map(|v| (v.abs(), t)))
        .collect::<Result<Vec<_>>>()?;
    let (grid_max, grid_argmax) = vals.into_iter().fold((0.0, 0.0), |a, b| if b.0 > a.0 { b } else { a });
    Ok(KernelSupNorm { at_pole, grid_max, grid_argmax })
}

/// Order statistics of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quantiles {
    pub min: f64,
    pub q10: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub q90: f64,
    pub max: f64,
}

impl Quantiles {
    /// Nearest-rank quantiles; `None` for an empty sample.
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let q = |p: f64| v[((p * (v.len() - 1) as f64).round() as usize).min(v.len() - 1)];
        Some(Self {
            min: v[0],
            q10: q(0.1),
            q25: q(0.25),
            median: q(0.5),
            q75: q(0.75),
            q90: q(0.9),
            max: v[v.len() - 1],
        })
    }
}

/// Desk-scale caps for the staged construction.
pub const MAX_STAGES: usize = 4;
pub const MAX_HORIZON: usize = 4096;
pub const MAX_ATOMS: usize = 5000;

#[derive(Debug, Clone, PartialEq)]
pub struct StagedConfig {
    pub n: usize,
    pub stages: usize,
    pub grid: usize,
    pub seed: u64,
    /// Candidate `(r, N_j)` pairs examined per stage.
    pub budget: usize,
    /// Packing radii tried in order; should decrease.
    pub radii: Vec<f64>,
    /// Divergence horizons `N_j` tried in order for each radius.
    pub horizons: Vec<usize>,
    /// `N₁ = smoothing_factor · N_j`.
    pub smoothing_factor: usize,
    pub l1_samples: usize,
}

impl StagedConfig {
    pub fn new(n: usize, stages: usize, grid: usize, seed: u64) -> Self {
        Self {
            n,
            stages,
            grid,
            seed,
            budget: 9,
            radii: vec![0.4, 0.2, 0.1],
            horizons: vec![256, 1024, 4096],
            smoothing_factor: 2,
            l1_samples: 20_000,
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if !(2..=4).contains(&self.n) {
            return bad("staged construction needs 2 <= n <= 4");
        }
        if self.stages == 0 || self.stages > MAX_STAGES {
            return bad("stages must be between 1 and 4");
        }
        if self.grid == 0 {
            return bad("grid must be positive");
        }
        if self.radii.is_empty() || self.horizons.is_empty() || self.budget == 0 {
            return bad("empty candidate ladder");
        }
        if self.radii.iter().any(|r| !(*r > 0.0 && *r <= PI)) {
            return bad("packing radius outside (0, pi]");
        }
        if self.horizons.iter().any(|&h| h == 0 || h > MAX_HORIZON) {
            return bad("horizon outside 1..=4096");
        }
        if self.smoothing_factor == 0 || self.l1_samples < 2 {
            return bad("smoothing factor and sample count must be positive");
        }
        Ok(())
    }
}

/// One summand `η_j f_j` with `f_j = S^{δ₀+1}_{N₁} μ_j / ‖S^{δ₀+1}_{N₁} μ_j‖_{L¹}`.
#[derive(Debug, Clone)]
pub struct Stage {
    pub eta: f64,
    pub r: f64,
    pub nj: usize,
    pub smoothed: SmoothedMeasure,
    /// Monte-Carlo L¹ norm used for normalisation (estimate plus two
    /// standard errors).
    pub l1_scale: f64,
}

impl Stage {
    fn spectrum(&self, x: &SpherePoint, kmax: usize) -> Result<Vec<f64>> {
        let mut b = self.smoothed.spectrum(x, kmax)?;
        let s = self.eta / self.l1_scale;
        b.iter_mut().for_each(|v| *v *= s);
        Ok(b)
    }
}

/// `F = Σ_j η_j f_j`.
#[derive(Debug, Clone)]
pub struct StagedFunction {
    pub n: usize,
    pub stages: Vec<Stage>,
}

impl StagedFunction {
    pub fn degree(&self) -> usize {
        self.stages.iter().map(|s| s.smoothed.n1()).max().unwrap_or(0)
    }

    /// Spectrum `F̂_k(x)`, `k = 0..=kmax`.
    pub fn spectrum(&self, x: &SpherePoint, kmax: usize) -> Result<Vec<f64>> {
        let mut out = vec![0.0; kmax + 1];
        for s in &self.stages {
            for (o, v) in out.iter_mut().zip(s.spectrum(x, kmax)?) {
                *o += v;
            }
        }
        Ok(out)
    }

    pub fn eval(&self, x: &SpherePoint) -> Result<f64> {
        Ok(self.spectrum(x, self.degree())?.iter().sum())
    }

    /// Checks `η_j ≤ η_{j-1}/2` and `η_j max_{N≤N_{j-1}} ‖K_N‖_∞ ≤ 1` with
    /// `η_0 = 1`, `N_0 = 0`.
    pub fn check_constraints(&self) -> Result<()> {
        let (mut eta_prev, mut n_prev) = (1.0, 0usize);
        for (j, s) in self.stages.iter().enumerate() {
            if !(s.eta > 0.0 && s.eta <= eta_prev / 2.0) {
                return Err(Error::InvalidSpec(format!("stage {}: eta halving violated", j + 1)));
            }
            if s.eta * max_pole_value(self.n, n_prev as u64)? > 1.0 {
                return Err(Error::InvalidSpec(format!("stage {}: eta times kernel norm exceeds 1", j + 1)));
            }
            eta_prev = s.eta;
            n_prev = s.nj;
        }
        Ok(())
    }
}

/// Per-stage record of the staged construction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageReport {
    pub stage: usize,
    pub eta: f64,
    pub r: f64,
    pub m: usize,
    #[serde(rename = "N1")]
    pub n1: usize,
    #[serde(rename = "Nj")]
    pub nj: usize,
    /// `sup_N ‖K_N * F_{j-1}‖_∞ + j` on the grid and previous atoms.
    pub threshold: f64,
    pub grid_fraction: f64,
    pub required_fraction: f64,
    pub passed: bool,
    pub candidates_tried: usize,
    pub l1_norm: f64,
    /// `η_j max_{N≤N_j} |K_N * f_j(x)|` over the grid.
    pub stage_sup: Quantiles,
    /// `max_{N≤N_j} |K_N * F_j(x)|` over the grid, `F_j = Σ_{i≤j} η_i f_i`.
    pub cumulative_sup: Quantiles,
    /// Grid indices where the stage inequality holds.
    pub passing: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct StagedOutcome {
    pub function: StagedFunction,
    pub reports: Vec<StageReport>,
    pub complete: bool,
    pub diagnostic: Option<String>,
}

struct Candidate {
    stage: Stage,
    fraction: f64,
    stage_sup: Vec<f64>,
    passing: Vec<usize>,
    m: usize,
}

fn stage_seed(seed: u64, stage: usize, idx: usize) -> u64 {
    seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add((stage as u64) << 32 | idx as u64)
}

/// `sup_{N≤H} |K_N * F(x)|` over `points`, plus `|F(x)|` as the `N → ∞`
/// limit; `H = 2 deg F`.
fn partial_sup(f: &StagedFunction, points: &[SpherePoint]) -> Result<f64> {
    if f.stages.is_empty() {
        return Ok(0.0);
    }
    let deg = f.degree();
    let conv = CesaroConvolver::new(critical_index(f.n), 2 * deg)?;
    let sups = points
        .par_iter()
        .map_init(ConvolverWork::default, |work, x| {
            let b = f.spectrum(x, deg)?;
            let limit: f64 = b.iter().sum();
            let means = conv.means_with(&b, work);
            Ok(means.iter().fold(limit.abs(), |m, v| m.max(v.abs())))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(sups.into_iter().fold(0.0, f64::max))
}

/// Runs the inductive construction for up to `config.stages` stages.
///
/// At stage `j`, `η_j` is half the largest value allowed by
/// `η_j ≤ η_{j-1}/2` and `η_j max_{N≤N_{j-1}} K_N(0) ≤ 1`. Candidates
/// `(r, N_j)` are tried in ladder order; the first whose grid fraction
/// satisfying `η_j max_{N≤N_j} |K_N * f_j| > threshold` is positive and at
/// least `1 - 1/j` is accepted. When the budget runs out the best
/// candidate is reported, the construction stops and `complete` is false.
pub fn build_staged(config: &StagedConfig) -> Result<StagedOutcome> {
    config.validate()?;
    let n = config.n;
    let d0 = critical_index(n);
    let grid = low_discrepancy_grid(n, config.grid, config.seed)?;
    let mut function = StagedFunction { n, stages: Vec::new() };
    let mut reports = Vec::new();
    let (mut eta_prev, mut n_prev) = (1.0f64, 0usize);

    let ladder: Vec<(f64, usize)> =
        config.radii.iter().flat_map(|&r| config.horizons.iter().map(move |&h| (r, h))).collect();

    for j in 1..=config.stages {
        let eta = 0.5 * (eta_prev / 2.0).min(1.0 / max_pole_value(n, n_prev as u64)?);
        let mut probe: Vec<SpherePoint> = grid.clone();
        for s in &function.stages {
            probe.extend(s.smoothed.measure().points().cloned());
        }
        let threshold = partial_sup(&function, &probe)? + j as f64;
        let required = 1.0 - 1.0 / j as f64;

        let mut best: Option<Candidate> = None;
        let mut tried = 0;
        let mut notes = Vec::new();
        for (idx, &(r, nj)) in ladder.iter().enumerate() {
            if tried >= config.budget {
                break;
            }
            if nj < n_prev {
                continue;
            }
            tried += 1;
            // ‖K_N * f‖_∞ ≤ ‖K_N‖_∞ ‖f‖_{L¹} with ‖f‖_{L¹} ≤ 1
            let ceiling = eta * max_pole_value(n, nj as u64)?;
            if ceiling <= threshold {
                notes.push(format!("r={r} Nj={nj}: eta*max K_N(0) = {ceiling:.3e} <= threshold {threshold:.3e}"));
                continue;
            }
            let packing = greedy_packing(n, r, stage_seed(config.seed, j, idx))?;
            if packing.len() > MAX_ATOMS {
                notes.push(format!("r={r}: {} atoms exceed cap", packing.len()));
                continue;
            }
            let mu = remove_antipodal_pairs(&packing, r / 8.0)?;
            let n1 = config.smoothing_factor * nj;
            let smoothed = smooth_to_polynomial(&mu, n1)?;
            let l1 = smoothed.l1_norm(config.l1_samples, stage_seed(config.seed, j, idx) ^ 0x11)?;
            let l1_scale = l1.estimate + 2.0 * l1.stderr;
            let stage = Stage { eta, r, nj, smoothed, l1_scale };
            let conv = CesaroConvolver::new(d0, nj)?;
            let stage_sup = grid
                .par_iter()
                .map_init(ConvolverWork::default, |work, x| {
                    let b = stage.spectrum(x, nj)?;
                    Ok(conv.means_with(&b, work).iter().fold(0.0f64, |m, v| m.max(v.abs())))
                })
                .collect::<Result<Vec<f64>>>()?;
            let passing: Vec<usize> = (0..grid.len()).filter(|&i| stage_sup[i] > threshold).collect();
            let fraction = passing.len() as f64 / grid.len() as f64;
            let cand = Candidate { stage, fraction, stage_sup, passing, m: mu.len() };
            let accept = fraction > 0.0 && fraction >= required;
            if best.as_ref().is_none_or(|b| cand.fraction > b.fraction) || accept {
                best = Some(cand);
            }
            if accept {
                break;
            }
        }

        let Some(cand) = best else {
            let diag = format!("stage {j}: no candidate evaluated ({})", notes.join("; "));
            return Ok(StagedOutcome { function, reports, complete: false, diagnostic: Some(diag) });
        };
        let passed = cand.fraction > 0.0 && cand.fraction >= required;
        let nj = cand.stage.nj;
        let mut trial = function.clone();
        trial.stages.push(cand.stage.clone());
        let conv = CesaroConvolver::new(d0, nj)?;
        let cumulative = grid
            .par_iter()
            .map_init(ConvolverWork::default, |work, x| {
                let b = trial.spectrum(x, nj)?;
                Ok(conv.means_with(&b, work).iter().fold(0.0f64, |m, v| m.max(v.abs())))
            })
            .collect::<Result<Vec<f64>>>()?;
        reports.push(StageReport {
            stage: j,
            eta,
            r: cand.stage.r,
            m: cand.m,
            n1: cand.stage.smoothed.n1(),
            nj,
            threshold,
            grid_fraction: cand.fraction,
            required_fraction: required,
            passed,
            candidates_tried: tried,
            l1_norm: cand.stage.l1_scale,
            stage_sup: Quantiles::of(&cand.stage_sup).expect("nonempty grid"),
            cumulative_sup: Quantiles::of(&cumulative).expect("nonempty grid"),
            passing: cand.passing,
        });
        if !passed {
            let mut diag = format!(
                "stage {j}: budget of {} candidates exhausted; best grid fraction {:.4} (need > 0 and >= {:.4}) against threshold {:.4e} with eta {:.4e}",
                config.budget, cand.fraction, required, threshold, eta
            );
            if !notes.is_empty() {
                diag.push_str(&format!("; skipped: {}", notes.join("; ")));
            }
            return Ok(StagedOutcome { function, reports, complete: false, diagnostic: Some(diag) });
        }
        function = trial;
        function.check_constraints()?;
        eta_prev = eta;
        n_prev = nj;
    }
    Ok(StagedOutcome { function, reports, complete: true, diagnostic: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{cesaro_weights, harmonic_dimension, main_term, szego_limit, zonal_kernel};
    use crate::sphere::{low_discrepancy_grid, sample_uniform};
    use proptest::prelude::*;
    use rand::Rng;

    fn random_measure(n: usize, m: usize, seed: u64) -> AtomicMeasure {
        let pts = sample_uniform(n, m, seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 7);
        let atoms = pts.into_iter().map(|p| (p, rng.random_range(-1.0..1.0))).collect();
        AtomicMeasure::new(n, atoms).unwrap()
    }

    #[test]
    fn projection_examples() {
        let mu = random_measure(3, 5, 1);
        let x = sample_uniform(3, 1, 2).unwrap().remove(0);
        assert!((measure_projection(&mu, 0, &x).unwrap() - mu.total_mass()).abs() < 1e-14);
        let p = SpherePoint::basis(2, 0).unwrap();
        let dirac = AtomicMeasure::dirac(p.clone());
        for k in 0..40u64 {
            assert_eq!(measure_projection(&dirac, k, &p).unwrap(), (2 * k + 1) as f64);
        }
    }

    #[test]
    fn projection_matches_zonal_kernel() {
        let mu = random_measure(2, 4, 3);
        let x = sample_uniform(2, 1, 4).unwrap().remove(0);
        let p = measure_projections(&mu, 30, &x).unwrap();
        for k in [0usize, 1, 7, 30] {
            let want: f64 = mu
                .atoms()
                .iter()
                .map(|(y, w)| w * zonal_kernel(2, k as u64, distance_unchecked(x.coords(), y.coords())).unwrap())
                .sum();
            assert!((p[k] - want).abs() < 1e-12 * (1.0 + want.abs()));
        }
    }

    proptest! {
        #[test]
        fn projection_is_linear(seed in 0u64..500, a in -2.0f64..2.0, b in -2.0f64..2.0) {
            let mu = random_measure(2, 3, seed);
            let nu = random_measure(2, 2, seed + 1000);
            let x = sample_uniform(2, 1, seed + 2000).unwrap().remove(0);
            let both = AtomicMeasure::combine(a, &mu, b, &nu).unwrap();
            for k in [0u64, 3, 11] {
                let lhs = measure_projection(&both, k, &x).unwrap();
                let rhs = a * measure_projection(&mu, k, &x).unwrap() + b * measure_projection(&nu, k, &x).unwrap();
                prop_assert!((lhs - rhs).abs() < 1e-11 * (1.0 + rhs.abs()));
            }
        }
    }

    #[test]
    fn target_examples() {
        let x = SpherePoint::basis(2, 0).unwrap();
        let far = AtomicMeasure::dirac(SpherePoint::at_angle(2, 2.0).unwrap());
        assert_eq!(kronecker_target(&far, &x).unwrap(), 0.0);
        let edge = AtomicMeasure::dirac(SpherePoint::at_angle(2, FRAC_PI_2 - 1e-12).unwrap());
        let t = kronecker_target(&edge, &x).unwrap();
        assert!((t - szego_limit(2) * amplitude(2, FRAC_PI_2).unwrap()).abs() < 1e-10);
        let on = AtomicMeasure::dirac(x.clone());
        assert!(matches!(kronecker_target(&on, &x), Err(Error::Singular { .. })));
        let anti = AtomicMeasure::dirac(crate::sphere::antipode(&x));
        assert!(matches!(kronecker_target(&anti, &x), Err(Error::Singular { .. })));
    }

    #[test]
    fn scanner_matches_main_term() {
        let mu = random_measure(3, 6, 9);
        let x = sample_uniform(3, 1, 10).unwrap().remove(0);
        let sc = Scanner::new(3, 50).unwrap();
        let vals = sc.values(&mu, &x).unwrap();
        for big_n in [1u64, 2, 17, 50] {
            let want = crate::kernels::convolve_atomic(|nn, t| main_term(3, nn, t), &mu, &x, big_n).unwrap();
            assert!((vals[big_n as usize] - want).abs() < 1e-10 * (1.0 + want.abs()));
        }
    }

    #[test]
    fn scan_sup_monotone_in_horizon() {
        let mu = random_measure(2, 5, 11);
        let x = sample_uniform(2, 1, 12).unwrap().remove(0);
        let mut last = 0.0;
        for nmax in [1usize, 10, 100, 1000] {
            let s = scan_sup(&mu, &x, nmax).unwrap();
            assert!(s.sup_abs >= last);
            assert!(s.argmax_n >= 1 && s.argmax_n <= nmax);
            last = s.sup_abs;
        }
    }

    #[test]
    fn convolver_matches_direct_sums() {
        for &(delta, h) in &[(0.5, 300usize), (1.0, 100), (1.5, 700)] {
            let mut rng = ChaCha8Rng::seed_from_u64(h as u64);
            let b: Vec<f64> = (0..=h).map(|k| rng.random_range(-1.0..1.0) * (1.0 + k as f64)).collect();
            let conv = CesaroConvolver::new(delta, h).unwrap();
            let got = conv.means(&b);
            for big_n in [0usize, 1, 63, 64, 65, h / 2, h] {
                let w = cesaro_weights(delta, big_n).unwrap();
                let want: f64 = w.iter().zip(&b).map(|(u, v)| u * v).sum();
                let scale: f64 = w.iter().zip(&b).map(|(u, v)| (u * v).abs()).sum();
                assert!((got[big_n] - want).abs() < 1e-11 * (1.0 + scale), "δ={delta} N={big_n}");
            }
        }
    }

    #[test]
    fn kernel_means_match_cesaro_kernel() {
        let mu = random_measure(2, 3, 21);
        let x = sample_uniform(2, 1, 22).unwrap().remove(0);
        let means = kernel_means(&mu, &x, 200).unwrap();
        for big_n in [5u64, 120, 200] {
            let want = crate::kernels::convolve_atomic(|nn, t| cesaro_kernel(2, 0.5, nn, t), &mu, &x, big_n).unwrap();
            assert!((means[big_n as usize] - want).abs() < 1e-9 * (1.0 + want.abs()));
        }
    }

    #[test]
    fn smoothing_examples() {
        let mu = random_measure(2, 4, 31);
        let x = sample_uniform(2, 1, 32).unwrap().remove(0);
        let f0 = smooth_to_polynomial(&mu, 0).unwrap();
        assert!((f0.eval(&x).unwrap() - mu.total_mass()).abs() < 1e-14);
        let f = smooth_to_polynomial(&mu, 40).unwrap();
        let direct = crate::kernels::convolve_atomic(|nn, t| cesaro_kernel(2, 1.5, nn, t), &mu, &x, 40).unwrap();
        assert!((f.eval(&x).unwrap() - direct).abs() < 1e-11 * (1.0 + direct.abs()));
        let conv = CesaroConvolver::new(0.5, 100).unwrap();
        let all = f.kernel_convolutions(&x, &conv).unwrap();
        for big_n in [0usize, 10, 40, 100] {
            let one = f.kernel_convolution(&x, big_n).unwrap();
            assert!((all[big_n] - one).abs() < 1e-10 * (1.0 + one.abs()));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn smoothing_error_below_bound(seed in 0u64..1000, n0 in 1usize..40, extra in 0usize..80, frac in 0.0f64..1.0) {
            let n = 2 + (seed % 2) as usize;
            let m = 2 + (seed % 5) as usize;
            let pts = sample_uniform(n, m, seed).unwrap();
            let mu = AtomicMeasure::uniform(n, pts).unwrap();
            let x = sample_uniform(n, 1, seed + 1).unwrap().remove(0);
            let n1 = n0 + extra;
            let big_n = ((n0 as f64) * frac) as usize;
            let f = smooth_to_polynomial(&mu, n1).unwrap();
            let c = cesaro_weights(critical_index(n), big_n).unwrap();
            let p = measure_projections(&mu, big_n, &x).unwrap();
            let k_mu: f64 = c.iter().zip(&p).map(|(a, b)| a * b).sum();
            let diff = (k_mu - f.kernel_convolution(&x, big_n).unwrap()).abs();
            prop_assert!(diff <= smoothing_bound(n, n0, n1).unwrap() * (1.0 + 1e-12) + 1e-12);
        }
    }

    #[test]
    fn smoothing_bound_dimension_sum() {
        // Σ_{k≤N₀} dim H_k^n against the closed form used in the bound
        for n in 2..=4 {
            for n0 in 0..30usize {
                let direct: f64 = (0..=n0 as u64).map(|k| harmonic_dimension(n, k)).sum();
                let d = critical_index(n) + 1.0;
                let n1 = n0 + 5;
                let ratio = cesaro_number(d, 5).unwrap() / cesaro_number(d, n1 as u64).unwrap();
                let want = (1.0 - ratio) * direct;
                let got = smoothing_bound(n, n0, n1).unwrap();
                assert!((got - want).abs() < 1e-12 * want.max(1.0));
            }
        }
    }

    #[test]
    fn zonal_profile_interpolates() {
        let prof = ZonalProfile::smoothing_kernel(2, 64).unwrap();
        for &t in &[0.0, 1e-3, 0.05, 0.7, 2.9, PI] {
            let want = cesaro_kernel(2, 1.5, 64, t).unwrap();
            assert!((prof.eval(t) - want).abs() < 1e-4 * (1.0 + want.abs()), "θ={t}");
        }
    }

    #[test]
    fn l1_norm_of_constant_and_dirac() {
        let mu = AtomicMeasure::dirac(SpherePoint::basis(2, 0).unwrap());
        let f0 = smooth_to_polynomial(&mu, 0).unwrap();
        let e = f0.l1_norm(2000, 1).unwrap();
        assert!((e.estimate - 1.0).abs() < 4.0 * e.stderr + 1e-12);
        // single-atom smoothing: ‖K^{δ₀+1}_{N₁}‖_{L¹} by 1-D quadrature
        let f = smooth_to_polynomial(&mu, 64).unwrap();
        let mc = f.l1_norm(40_000, 2).unwrap();
        let rule = crate::quad::zonal_rule(2, 400).unwrap();
        let exact = rule.integrate(|t| cesaro_kernel(2, 1.5, 64, t.clamp(-1.0, 1.0).acos()).unwrap().abs());
        assert!((mc.estimate - exact).abs() < 4.0 * mc.stderr + 1e-3, "{} vs {exact}", mc.estimate);
    }

    #[test]
    fn pole_value_examples() {
        assert_eq!(kernel_pole_value(2, 0).unwrap(), 1.0);
        assert!((kernel_pole_value(2, 1).unwrap() - 3.0).abs() < 1e-14);
        for n in 2..=4 {
            let d0 = critical_index(n);
            for big_n in [0u64, 1, 2, 9, 50, 333] {
                let w = cesaro_weights(d0, big_n as usize).unwrap();
                let direct: f64 = w.iter().enumerate().map(|(k, c)| c * harmonic_dimension(n, k as u64)).sum();
                let closed = kernel_pole_value(n, big_n).unwrap();
                assert!((closed - direct).abs() < 1e-12 * direct, "n={n} N={big_n}");
            }
        }
    }

    #[test]
    fn sup_norm_attained_at_pole() {
        for n in 2..=3 {
            for big_n in [0u64, 1, 5, 40, 300] {
                let s = kernel_sup_norm(n, big_n).unwrap();
                assert!((s.grid_max - s.at_pole).abs() <= 1e-10 * s.at_pole, "n={n} N={big_n}: {s:?}");
                assert_eq!(s.grid_argmax, 0.0);
            }
        }
    }

    #[test]
    fn quantiles_nearest_rank() {
        let v: Vec<f64> = (0..=100).map(|i| i as f64).collect();
        let q = Quantiles::of(&v).unwrap();
        assert_eq!((q.min, q.q10, q.median, q.max), (0.0, 10.0, 50.0, 100.0));
        assert!(Quantiles::of(&[]).is_none());
    }

    #[test]
    fn target_bounds_scan_on_packing() {
        let mu = greedy_packing(2, 0.4, 5).unwrap();
        let mu = remove_antipodal_pairs(&mu, 0.05).unwrap();
        let grid = low_discrepancy_grid(2, 60, 3).unwrap();
        let res = scan_grid(&mu, &grid, 1024).unwrap();
        for r in res {
            let near = mu.distances_from(&r.x).unwrap().into_iter().fold(PI, f64::min);
            if near >= 0.05 {
                assert!(r.sup_abs <= r.target * 1.05 + 0.5, "{} vs {}", r.sup_abs, r.target);
            }
        }
    }

    #[test]
    fn staged_single_stage_runs() {
        let mut cfg = StagedConfig::new(2, 1, 200, 4);
        cfg.radii = vec![0.5];
        cfg.horizons = vec![64];
        cfg.l1_samples = 2000;
        let out = build_staged(&cfg).unwrap();
        assert_eq!(out.reports.len(), 1);
        let rep = &out.reports[0];
        assert_eq!(rep.eta, 0.25);
        assert_eq!(rep.threshold, 1.0);
        if out.complete {
            out.function.check_constraints().unwrap();
            assert!(rep.grid_fraction > 0.0);
        }
    }

    #[test]
    fn staged_config_caps() {
        let mut cfg = StagedConfig::new(2, 5, 10, 0);
        assert!(matches!(build_staged(&cfg), Err(Error::Config(_))));
        cfg.stages = 2;
        cfg.horizons = vec![8192];
        assert!(matches!(build_staged(&cfg), Err(Error::Config(_))));
    }
}
