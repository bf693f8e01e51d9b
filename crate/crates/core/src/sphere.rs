//! Points, atomic measures and geometry on `S^n ⊂ R^{n+1}`.
//!
//! The sphere carries its normalised (probability) surface measure, so
//! `ball_measure(n, π) = 1` and every integral below is an average.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{domain, Error, Result};
use crate::quad::{gauss_jacobi, GaussRule};
use crate::specfun::log_gamma;

/// Distance below which a point is treated as sitting on an atom.
pub const ATOM_TOL: f64 = 1e-12;

/// Pairs with `|x - ŷ|` below this are treated as antipodal.
pub const ANTIPODAL_TOL: f64 = 1e-6;

/// A unit vector in `R^{n+1}`, `n ≥ 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpherePoint {
    coords: Vec<f64>,
}

impl SpherePoint {
    /// Accepts coordinates that already have unit norm (within 1e-12).
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        check_dim(coords.len().saturating_sub(1))?;
        let norm = norm2(&coords);
        if (norm - 1.0).abs() > 1e-12 {
            return Err(domain("SpherePoint norm", norm));
        }
        Ok(Self { coords })
    }

    /// Normalises an arbitrary nonzero ambient vector onto the sphere.
    pub fn from_ambient(mut v: Vec<f64>) -> Result<Self> {
        check_dim(v.len().saturating_sub(1))?;
        let norm = norm2(&v);
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(domain("SpherePoint ambient norm", norm));
        }
        v.iter_mut().for_each(|c| *c /= norm);
        Ok(Self { coords: v })
    }

    /// Standard basis vector `e_i` of `R^{n+1}`.
    pub fn basis(n: usize, i: usize) -> Result<Self> {
        check_dim(n)?;
        if i > n {
            return Err(domain("basis index", i as f64));
        }
        let mut v = vec![0.0; n + 1];
        v[i] = 1.0;
        Ok(Self { coords: v })
    }

    /// Point at polar angle `theta` from `e_0`, tilted towards `e_1`.
    pub fn at_angle(n: usize, theta: f64) -> Result<Self> {
        check_dim(n)?;
        let mut v = vec![0.0; n + 1];
        v[0] = theta.cos();
        v[1] = theta.sin();
        Ok(Self { coords: v })
    }

    pub fn dim(&self) -> usize {
        self.coords.len() - 1
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dot(&self, other: &SpherePoint) -> f64 {
        self.coords.iter().zip(&other.coords).map(|(a, b)| a * b).sum()
    }
}

fn check_dim(n: usize) -> Result<()> {
    if n < 2 {
        return Err(domain("sphere dimension", n as f64));
    }
    Ok(())
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

/// Great-circle distance in `[0, π]`.
///
/// Uses `2 atan2(|x - y|, |x + y|)`, which keeps full relative accuracy
/// near `0` and `π` where `acos` of the inner product does not.
pub fn geodesic_distance(x: &SpherePoint, y: &SpherePoint) -> Result<f64> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch { left: x.dim(), right: y.dim() });
    }
    Ok(distance_unchecked(x.coords(), y.coords()))
}

pub(crate) fn distance_unchecked(x: &[f64], y: &[f64]) -> f64 {
    let mut diff = 0.0;
    let mut sum = 0.0;
    for (a, b) in x.iter().zip(y) {
        diff += (a - b) * (a - b);
        sum += (a + b) * (a + b);
    }
    2.0 * diff.sqrt().atan2(sum.sqrt())
}

pub fn antipode(x: &SpherePoint) -> SpherePoint {
    SpherePoint { coords: x.coords.iter().map(|c| -c).collect() }
}

fn gl32() -> &'static GaussRule {
    static RULE: OnceLock<GaussRule> = OnceLock::new();
    RULE.get_or_init(|| gauss_jacobi(32, 0.0, 0.0).expect("Gauss-Legendre rule"))
}

fn gl_on(a: f64, b: f64, f: &impl Fn(f64) -> f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    half * gl32().integrate(|t| f(mid + half * t))
}

fn adaptive_gl(a: f64, b: f64, f: &impl Fn(f64) -> f64, whole: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let left = gl_on(a, m, f);
    let right = gl_on(m, b, f);
    let both = left + right;
    if depth == 0 || (both - whole).abs() <= 1e-15 * both.abs().max(f64::MIN_POSITIVE) {
        return both;
    }
    adaptive_gl(a, m, f, left, depth - 1) + adaptive_gl(m, b, f, right, depth - 1)
}

/// `∫_0^π sin^{n-1} t dt = √π Γ(n/2) / Γ((n+1)/2)`.
fn sphere_normaliser(n: usize) -> f64 {
    let nf = n as f64;
    (0.5 * PI.ln() + log_gamma(nf / 2.0).expect("positive") - log_gamma((nf + 1.0) / 2.0).expect("positive")).exp()
}

/// Normalised measure of a geodesic ball of radius `r` on `S^n`.
pub fn ball_measure(n: usize, r: f64) -> Result<f64> {
    check_dim(n)?;
    if !(0.0..=PI).contains(&r) {
        return Err(domain("ball_measure radius", r));
    }
    Ok(ball_measure_unchecked(n, r))
}

pub(crate) fn ball_measure_unchecked(n: usize, r: f64) -> f64 {
    match n {
        2 => {
            let s = (0.5 * r).sin();
            s * s
        }
        3 => {
            let x = 2.0 * r;
            let num = if x < 0.2 {
                let x2 = x * x;
                x * x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0 * (1.0 - x2 / 72.0 * (1.0 - x2 / 110.0))))
            } else {
                x - x.sin()
            };
            (num / (2.0 * PI)).min(1.0)
        }
        _ => {
            if r == 0.0 {
                return 0.0;
            }
            let p = (n - 1) as i32;
            let f = move |t: f64| t.sin().powi(p);
            let whole = gl_on(0.0, r, &f);
            (adaptive_gl(0.0, r, &f, whole, 12) / sphere_normaliser(n)).min(1.0)
        }
    }
}

/// Inverse of [`ball_measure`] in the radius: the polar angle whose cap
/// has normalised measure `u`.
pub fn ball_radius_for_measure(n: usize, u: f64) -> Result<f64> {
    check_dim(n)?;
    if !(0.0..=1.0).contains(&u) {
        return Err(domain("ball measure", u));
    }
    if n == 2 {
        return Ok(2.0 * u.sqrt().asin());
    }
    let (mut lo, mut hi) = (0.0f64, PI);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ball_measure_unchecked(n, mid) < u {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-16 * hi.max(1e-300) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Finitely supported signed measure on `S^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomicMeasure {
    dim: usize,
    atoms: Vec<(SpherePoint, f64)>,
    separation: Option<f64>,
}

impl AtomicMeasure {
    pub fn new(dim: usize, atoms: Vec<(SpherePoint, f64)>) -> Result<Self> {
        check_dim(dim)?;
        for (p, w) in &atoms {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch { left: dim, right: p.dim() });
            }
            if !w.is_finite() {
                return Err(domain("atom weight", *w));
            }
        }
        Ok(Self { dim, atoms, separation: None })
    }

    /// Uniform probability measure on `points`.
    pub fn uniform(dim: usize, points: Vec<SpherePoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(domain("uniform measure atom count", 0.0));
        }
        let w = 1.0 / points.len() as f64;
        Self::new(dim, points.into_iter().map(|p| (p, w)).collect())
    }

    pub fn dirac(point: SpherePoint) -> Self {
        Self { dim: point.dim(), atoms: vec![(point, 1.0)], separation: None }
    }

    pub fn with_separation(mut self, r: f64) -> Self {
        self.separation = Some(r);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> &[(SpherePoint, f64)] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Separation recorded by the constructor that produced the measure.
    pub fn separation(&self) -> Option<f64> {
        self.separation
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|(_, w)| w).sum()
    }

    /// `‖ν‖ = Σ |w_j|`.
    pub fn total_variation(&self) -> f64 {
        self.atoms.iter().map(|(_, w)| w.abs()).sum()
    }

    /// True iff every weight equals `1/m`.
    pub fn is_probability(&self) -> bool {
        let m = self.atoms.len();
        m > 0 && {
            let w = 1.0 / m as f64;
            self.atoms.iter().all(|(_, x)| (x - w).abs() <= 1e-15 * w)
        }
    }

    /// `a μ + b ν` as the concatenated atom list.
    pub fn combine(a: f64, mu: &AtomicMeasure, b: f64, nu: &AtomicMeasure) -> Result<Self> {
        if mu.dim != nu.dim {
            return Err(Error::DimensionMismatch { left: mu.dim, right: nu.dim });
        }
        let atoms = mu
            .atoms
            .iter()
            .map(|(p, w)| (p.clone(), a * w))
            .chain(nu.atoms.iter().map(|(p, w)| (p.clone(), b * w)))
            .collect();
        Self::new(mu.dim, atoms)
    }

    pub fn points(&self) -> impl Iterator<Item = &SpherePoint> {
        self.atoms.iter().map(|(p, _)| p)
    }

    /// Minimum pairwise geodesic distance (`π` for fewer than two atoms).
    pub fn min_pairwise_distance(&self) -> f64 {
        let mut best = PI;
        for i in 0..self.atoms.len() {
            for j in i + 1..self.atoms.len() {
                best = best.min(distance_unchecked(self.atoms[i].0.coords(), self.atoms[j].0.coords()));
            }
        }
        best
    }

    /// Minimum over pairs of `|y_i - ŷ_j| = π - |y_i - y_j|`.
    pub fn min_antipodal_gap(&self) -> f64 {
        PI - self.max_pairwise_distance()
    }

    fn max_pairwise_distance(&self) -> f64 {
        let mut best = 0.0f64;
        for i in 0..self.atoms.len() {
            for j in i + 1..self.atoms.len() {
                best = best.max(distance_unchecked(self.atoms[i].0.coords(), self.atoms[j].0.coords()));
            }
        }
        best
    }

    fn check_point(&self, x: &SpherePoint) -> Result<()> {
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch { left: self.dim, right: x.dim() });
        }
        Ok(())
    }

    /// Geodesic distances from `x` to every atom, in atom order.
    pub fn distances_from(&self, x: &SpherePoint) -> Result<Vec<f64>> {
        self.check_point(x)?;
        Ok(self.atoms.iter().map(|(p, _)| distance_unchecked(x.coords(), p.coords())).collect())
    }
}

/// Uniform hash grid over ambient coordinates for fixed-radius neighbour
/// queries. A query of chord radius at most `cell` only has to look at
/// the `3^{n+1}` surrounding cells.
pub(crate) struct PointIndex {
    cell: f64,
    dim: usize,
    buckets: HashMap<Vec<i32>, Vec<usize>>,
    points: Vec<Vec<f64>>,
}

impl PointIndex {
    pub(crate) fn new(dim: usize, cell: f64) -> Self {
        Self { cell: cell.max(1e-6), dim, buckets: HashMap::new(), points: Vec::new() }
    }

    fn key(&self, p: &[f64]) -> Vec<i32> {
        p.iter().map(|c| (c / self.cell).floor() as i32).collect()
    }

    pub(crate) fn insert(&mut self, p: &[f64]) {
        let key = self.key(p);
        self.buckets.entry(key).or_default().push(self.points.len());
        self.points.push(p.to_vec());
    }

    /// Smallest geodesic distance from `p` to an indexed point whose chord
    /// distance is within one cell; `None` if there is no such point.
    pub(crate) fn nearest_within_cell(&self, p: &[f64]) -> Option<f64> {
        let base = self.key(p);
        let mut offs = vec![-1i32; self.dim + 1];
        let mut best: Option<f64> = None;
        let mut key = base.clone();
        loop {
            for (k, (b, o)) in key.iter_mut().zip(base.iter().zip(&offs)) {
                *k = b + o;
            }
            if let Some(ids) = self.buckets.get(&key) {
                for &i in ids {
                    let d = distance_unchecked(p, &self.points[i]);
                    best = Some(best.map_or(d, |b: f64| b.min(d)));
                }
            }
            // odometer over {-1,0,1}^{n+1}
            let mut i = 0;
            loop {
                if i == offs.len() {
                    return best;
                }
                offs[i] += 1;
                if offs[i] <= 1 {
                    break;
                }
                offs[i] = -1;
                i += 1;
            }
        }
    }
}

fn chord(r: f64) -> f64 {
    2.0 * (0.5 * r.min(PI)).sin()
}

/// Points of the radially projected cube surface whose geodesic covering
/// radius is at most `mesh`.
pub fn covering_grid(n: usize, mesh: f64) -> Result<Vec<SpherePoint>> {
    check_dim(n)?;
    if !(mesh > 0.0) {
        return Err(domain("grid mesh", mesh));
    }
    // a face point lies within s√n/2 (ambient) of a grid node, radial
    // projection from |p| ≥ 1 is 1-Lipschitz, so the geodesic covering
    // radius is at most 2 asin(s√n/4).
    let s = 4.0 * (0.5 * mesh.min(PI)).sin() / (n as f64).sqrt();
    let per_side = ((2.0 / s).ceil() as usize + 1).max(2);
    let step = 2.0 / (per_side - 1) as f64;
    let mut out = Vec::new();
    let mut idx = vec![0usize; n];
    for axis in 0..=n {
        for sign in [-1.0, 1.0] {
            idx.iter_mut().for_each(|i| *i = 0);
            loop {
                let mut v = Vec::with_capacity(n + 1);
                let mut it = idx.iter();
                for a in 0..=n {
                    if a == axis {
                        v.push(sign);
                    } else {
                        v.push(-1.0 + step * *it.next().expect("face coordinate") as f64);
                    }
                }
                out.push(SpherePoint::from_ambient(v)?);
                let mut i = 0;
                loop {
                    if i == n {
                        break;
                    }
                    idx[i] += 1;
                    if idx[i] < per_side {
                        break;
                    }
                    idx[i] = 0;
                    i += 1;
                }
                if i == n {
                    break;
                }
            }
        }
    }
    Ok(out)
}

/// Outcome of re-checking a packing.
#[derive(Debug, Clone, PartialEq)]
pub struct PackingCertificate {
    pub separated: bool,
    pub maximal_on_grid: bool,
    pub grid_points: usize,
    pub mesh: f64,
}

impl PackingCertificate {
    pub fn passed(&self) -> bool {
        self.separated && self.maximal_on_grid
    }
}

/// Greedy maximal `r`-separated set with its uniform probability measure.
///
/// Candidates are the nodes of a covering grid of mesh `r/4` together with
/// seeded uniform draws. Starting from a seeded random point, the candidate
/// farthest from the accepted set is added while that distance is `≥ r`.
/// On exit every candidate, hence every grid node, lies within `< r` of the
/// set.
pub fn greedy_packing(n: usize, r: f64, seed: u64) -> Result<AtomicMeasure> {
    check_dim(n)?;
    if !(r > 0.0 && r <= PI) {
        return Err(domain("packing separation", r));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pool: Vec<SpherePoint> = covering_grid(n, r / 4.0)?;
    let extra = pool.len() / 4;
    pool.extend((0..extra).map(|_| random_point(n, &mut rng)));
    let first = random_point(n, &mut rng);
    // track max inner product instead of min distance
    let mut near: Vec<f64> = pool.iter().map(|p| p.dot(&first)).collect();
    let mut points = vec![first];
    let cos_r = r.cos();
    loop {
        let (i, &c) =
            near.iter().enumerate().min_by(|a, b| a.1.partial_cmp(b.1).expect("finite")).expect("nonempty pool");
        if c > cos_r {
            break;
        }
        let p = pool[i].clone();
        for (v, q) in near.iter_mut().zip(&pool) {
            *v = v.max(q.dot(&p));
        }
        points.push(p);
    }
    Ok(AtomicMeasure::uniform(n, points)?.with_separation(r))
}

/// Re-verifies separation and grid maximality of a packing.
pub fn certify_packing(mu: &AtomicMeasure, r: f64) -> Result<PackingCertificate> {
    let n = mu.dim();
    let mut index = PointIndex::new(n, chord(r));
    let mut separated = true;
    for p in mu.points() {
        if let Some(d) = index.nearest_within_cell(p.coords()) {
            if d < r {
                separated = false;
            }
        }
        index.insert(p.coords());
    }
    let mesh = r / 4.0;
    let grid = covering_grid(n, mesh)?;
    let maximal_on_grid = grid.iter().all(|g| matches!(index.nearest_within_cell(g.coords()), Some(d) if d < r));
    Ok(PackingCertificate { separated, maximal_on_grid, grid_points: grid.len(), mesh })
}

/// `max(m r^n, 1/(m r^n))`: the smallest `C` with `r^{-n}/C ≤ m ≤ C r^{-n}`.
pub fn cardinality_constant(n: usize, r: f64, m: usize) -> f64 {
    let q = m as f64 * r.powi(n as i32);
    q.max(1.0 / q)
}

/// Unit tangent vector at `y` chosen from the basis vector least aligned
/// with `y`.
fn tangent_direction(y: &[f64]) -> Vec<f64> {
    let (k, _) =
        y.iter().enumerate().min_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).expect("finite")).expect("nonempty");
    let mut v: Vec<f64> = y.iter().map(|c| -c * y[k]).collect();
    v[k] += 1.0;
    let norm = norm2(&v);
    v.iter_mut().for_each(|c| *c /= norm);
    v
}

/// Moves one member of every (near-)antipodal pair by geodesic distance
/// `eps` along a fixed tangent direction.
pub fn remove_antipodal_pairs(mu: &AtomicMeasure, eps: f64) -> Result<AtomicMeasure> {
    if !(eps > 0.0) {
        return Err(domain("antipodal perturbation", eps));
    }
    if let Some(r) = mu.separation() {
        if eps >= 0.5 * r {
            return Err(domain("antipodal perturbation (must be below half the separation)", eps));
        }
    }
    let mut atoms: Vec<(SpherePoint, f64)> = mu.atoms().to_vec();
    for _round in 0..4 {
        let mut moved = false;
        for i in 0..atoms.len() {
            for j in i + 1..atoms.len() {
                let d = distance_unchecked(atoms[i].0.coords(), atoms[j].0.coords());
                if PI - d < ANTIPODAL_TOL {
                    let y = atoms[j].0.coords().to_vec();
                    let v = tangent_direction(&y);
                    let (s, c) = eps.sin_cos();
                    let moved_pt: Vec<f64> = y.iter().zip(&v).map(|(a, b)| c * a + s * b).collect();
                    atoms[j].0 = SpherePoint::from_ambient(moved_pt)?;
                    moved = true;
                }
            }
        }
        if !moved {
            break;
        }
    }
    let mut out = AtomicMeasure::new(mu.dim(), atoms)?;
    if let Some(r) = mu.separation() {
        out = out.with_separation(r - 2.0 * eps);
    }
    Ok(out)
}

/// `(1/m) Σ_j |x - y_j|^{-n}` for the uniform measure on the atoms of `mu`.
/// Returns `+∞` when `x` sits on an atom.
pub fn riemann_sum(mu: &AtomicMeasure, x: &SpherePoint) -> Result<f64> {
    let n = mu.dim() as i32;
    let ds = mu.distances_from(x)?;
    if ds.iter().any(|&d| d < ATOM_TOL) {
        return Ok(f64::INFINITY);
    }
    Ok(ds.iter().map(|d| d.powi(-n)).sum::<f64>() / ds.len() as f64)
}

/// Hardy–Littlewood maximal function of an atomic measure, computed
/// exactly: the supremum over radii is approached just above an atom
/// distance, so it is the largest `|ν|(B(x, d]) / |B(x, d)|` over the
/// distinct atom distances `d`. `+∞` when `x` is an atom.
pub fn hl_maximal(nu: &AtomicMeasure, x: &SpherePoint) -> Result<f64> {
    let n = nu.dim();
    let ds = nu.distances_from(x)?;
    let mut pairs: Vec<(f64, f64)> = ds.into_iter().zip(nu.atoms().iter().map(|(_, w)| w.abs())).collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite distance"));
    if pairs.first().is_some_and(|(d, w)| *d < ATOM_TOL && *w > 0.0) {
        return Ok(f64::INFINITY);
    }
    let mut best = 0.0f64;
    let mut cum = 0.0;
    let mut i = 0;
    while i < pairs.len() {
        let d = pairs[i].0;
        while i < pairs.len() && pairs[i].0 == d {
            cum += pairs[i].1;
            i += 1;
        }
        if d > 0.0 {
            best = best.max(cum / ball_measure_unchecked(n, d));
        }
    }
    // radii beyond π cover the sphere
    Ok(best.max(cum))
}

/// Searches for a nonzero integer vector `q`, `max |q_i| ≤ height`, with
/// `|Σ q_i v_i| < 1e-9 · height`. Up to four values are searched
/// exhaustively, longer inputs go through LLL reduction. `None` only means
/// that no small relation was found.
pub fn integer_relation_probe(values: &[f64], height: u32) -> Option<Vec<i64>> {
    if values.is_empty() || height == 0 {
        return None;
    }
    let tol = 1e-9 * height as f64;
    if values.len() <= 4 {
        exhaustive_relation(values, height as i64, tol)
    } else {
        lll_relation(values, height as i64, tol)
    }
}

fn normalise_relation(mut q: Vec<i64>) -> Vec<i64> {
    fn gcd(a: i64, b: i64) -> i64 {
        if b == 0 {
            a.abs()
        } else {
            gcd(b, a % b)
        }
    }
    let g = q.iter().fold(0, |acc, &x| gcd(acc, x));
    if g > 1 {
        q.iter_mut().for_each(|x| *x /= g);
    }
    if let Some(first) = q.iter().find(|&&x| x != 0) {
        if *first < 0 {
            q.iter_mut().for_each(|x| *x = -*x);
        }
    }
    q
}

fn exhaustive_relation(values: &[f64], h: i64, tol: f64) -> Option<Vec<i64>> {
    let len = values.len();
    let last = values[len - 1];
    let mut best: Option<(i64, f64, Vec<i64>)> = None;
    let consider = |q: Vec<i64>, best: &mut Option<(i64, f64, Vec<i64>)>| {
        if q.iter().all(|&x| x == 0) {
            return;
        }
        let resid: f64 = q.iter().zip(values).map(|(&a, &v)| a as f64 * v).sum::<f64>().abs();
        if resid < tol {
            let size = q.iter().map(|x| x.abs()).max().unwrap_or(0);
            let better = match best {
                None => true,
                Some((s, r, _)) => size < *s || (size == *s && resid < *r),
            };
            if better {
                *best = Some((size, resid, q));
            }
        }
    };
    let mut head = vec![-h; len - 1];
    loop {
        let partial: f64 = head.iter().zip(values).map(|(&a, &v)| a as f64 * v).sum();
        if last.abs() > 0.0 {
            let c = (-partial / last).round();
            for dc in [-1.0, 0.0, 1.0] {
                let q_last = c + dc;
                if q_last.abs() <= h as f64 {
                    let mut q = head.clone();
                    q.push(q_last as i64);
                    consider(q, &mut best);
                }
            }
        } else {
            let mut q = vec![0; len];
            q[len - 1] = 1;
            consider(q, &mut best);
        }
        let mut i = 0;
        loop {
            if i == head.len() {
                return best.map(|(_, _, q)| normalise_relation(q));
            }
            head[i] += 1;
            if head[i] <= h {
                break;
            }
            head[i] = -h;
            i += 1;
        }
    }
}

fn lll_relation(values: &[f64], h: i64, tol: f64) -> Option<Vec<i64>> {
    let len = values.len();
    let weight = 1.0 / tol;
    let mut basis: Vec<Vec<f64>> = (0..len)
        .map(|i| {
            let mut row = vec![0.0; len + 1];
            row[i] = 1.0;
            row[len] = weight * values[i];
            row
        })
        .collect();
    lll_reduce(&mut basis, 0.99);
    let mut best: Option<(i64, Vec<i64>)> = None;
    for row in &basis {
        let q: Vec<i64> = row[..len].iter().map(|x| x.round() as i64).collect();
        if q.iter().all(|&x| x == 0) {
            continue;
        }
        let size = q.iter().map(|x| x.abs()).max().unwrap_or(0);
        let resid: f64 = q.iter().zip(values).map(|(&a, &v)| a as f64 * v).sum::<f64>().abs();
        if size <= h && resid < tol && best.as_ref().is_none_or(|(s, _)| size < *s) {
            best = Some((size, q));
        }
    }
    best.map(|(_, q)| normalise_relation(q))
}

/// In-place LLL reduction of row vectors with floating Gram–Schmidt.
pub(crate) fn lll_reduce(b: &mut [Vec<f64>], delta: f64) {
    let n = b.len();
    if n == 0 {
        return;
    }
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, c)| a * c).sum::<f64>();
    let gso = |b: &[Vec<f64>]| {
        let mut bstar: Vec<Vec<f64>> = Vec::with_capacity(n);
        let mut mu = vec![vec![0.0; n]; n];
        let mut norms = vec![0.0; n];
        for i in 0..n {
            let mut v = b[i].clone();
            for j in 0..i {
                mu[i][j] = if norms[j] > 0.0 { dot(&b[i], &bstar[j]) / norms[j] } else { 0.0 };
                for (vk, bk) in v.iter_mut().zip(&bstar[j]) {
                    *vk -= mu[i][j] * bk;
                }
            }
            norms[i] = dot(&v, &v);
            bstar.push(v);
        }
        (mu, norms)
    };
    let (mut mu, mut norms) = gso(b);
    let mut k = 1;
    let mut iters = 0;
    while k < n && iters < 100_000 {
        iters += 1;
        for j in (0..k).rev() {
            let q = mu[k][j].round();
            if q != 0.0 {
                let bj = b[j].clone();
                for (x, y) in b[k].iter_mut().zip(&bj) {
                    *x -= q * y;
                }
                let (m2, n2) = gso(b);
                mu = m2;
                norms = n2;
            }
        }
        if norms[k] >= (delta - mu[k][k - 1] * mu[k][k - 1]) * norms[k - 1] {
            k += 1;
        } else {
            b.swap(k, k - 1);
            let (m2, n2) = gso(b);
            mu = m2;
            norms = n2;
            k = (k - 1).max(1);
        }
    }
}

fn random_point<R: Rng>(n: usize, rng: &mut R) -> SpherePoint {
    loop {
        let v: Vec<f64> = (0..=n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let norm = norm2(&v);
        if norm > 1e-12 {
            return SpherePoint { coords: v.into_iter().map(|c| c / norm).collect() };
        }
    }
}

/// I.i.d. uniform points from normalised Gaussian vectors.
pub fn sample_uniform(n: usize, count: usize, seed: u64) -> Result<Vec<SpherePoint>> {
    check_dim(n)?;
    if count == 0 {
        return Err(domain("sample count", 0.0));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count).map(|_| random_point(n, &mut rng)).collect())
}

/// Maps `u ∈ [0,1)^n` onto `S^n` preserving measure: the polar angle from
/// the inverse cap measure, the remaining direction recursively on
/// `S^{n-1}`, down to an angle on the circle.
pub fn map_unit_cube(n: usize, u: &[f64]) -> Result<SpherePoint> {
    check_dim(n)?;
    if u.len() != n {
        return Err(Error::DimensionMismatch { left: n, right: u.len() });
    }
    let mut v = vec![0.0; n + 1];
    let mut scale = 1.0;
    for (level, k) in (2..=n).rev().enumerate() {
        let theta = ball_radius_for_measure(k, u[level].clamp(0.0, 1.0))?;
        v[level] = scale * theta.cos();
        scale *= theta.sin();
    }
    let phi = 2.0 * PI * u[n - 1];
    v[n - 1] = scale * phi.cos();
    v[n] = scale * phi.sin();
    SpherePoint::from_ambient(v)
}

/// Seeded low-discrepancy grid: a shifted Kronecker sequence with
/// irrational steps `frac(√p)`, pushed onto the sphere by [`map_unit_cube`].
pub fn low_discrepancy_grid(n: usize, count: usize, seed: u64) -> Result<Vec<SpherePoint>> {
    check_dim(n)?;
    const PRIMES: [f64; 8] = [2.0, 3.0, 5.0, 7.0, 11.0, 13.0, 17.0, 19.0];
    if n > PRIMES.len() {
        return Err(domain("grid dimension", n as f64));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    let steps: Vec<f64> = PRIMES[..n].iter().map(|p| p.sqrt().fract()).collect();
    (1..=count)
        .map(|k| {
            let u: Vec<f64> = steps.iter().zip(&shift).map(|(a, s)| (k as f64 * a + s).fract()).collect();
            map_unit_cube(n, &u)
        })
        .collect()
}

/// Integrand for [`sphere_quadrature`].
pub enum Integrand<'a> {
    /// Function of the geodesic distance to a fixed pole.
    Zonal(&'a dyn Fn(f64) -> f64),
    General(&'a dyn Fn(&SpherePoint) -> f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadEstimate {
    pub estimate: f64,
    pub stderr: f64,
}

const QUADRATURE_SEED: u64 = 0x5ee_d0f5_ca1e;

/// Integral against the probability measure of `S^n`.
///
/// Zonal integrands use Gauss–Jacobi in `t = cos θ` with `⌊budget/2⌋ + 1`
/// nodes (exact for polynomials in `t` of degree ≤ budget); the reported
/// error is the change against a rule with eight more nodes, floored at
/// the rounding level. General integrands use `budget` seeded Monte-Carlo
/// samples and report the sample standard error.
pub fn sphere_quadrature(n: usize, f: Integrand<'_>, budget: usize) -> Result<QuadEstimate> {
    check_dim(n)?;
    if budget < 100 {
        return Err(domain("quadrature budget", budget as f64));
    }
    match f {
        Integrand::Zonal(g) => {
            let npts = budget / 2 + 1;
            let eval = |rule: &crate::quad::GaussRule| {
                let mut s = 0.0;
                let mut abs = 0.0;
                for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
                    let v = w * g(t.clamp(-1.0, 1.0).acos());
                    s += v;
                    abs += v.abs();
                }
                (s, abs)
            };
            let (est, abs) = eval(&crate::quad::zonal_rule(n, npts)?);
            let (est2, _) = eval(&crate::quad::zonal_rule(n, npts + 8)?);
            Ok(QuadEstimate { estimate: est, stderr: (est - est2).abs().max(1e-15 * abs.max(1.0)) })
        }
        Integrand::General(g) => {
            let pts = sample_uniform(n, budget, QUADRATURE_SEED)?;
            let vals: Vec<f64> = pts.iter().map(g).collect();
            let m = vals.len() as f64;
            let mean = vals.iter().sum::<f64>() / m;
            let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (m - 1.0);
            Ok(QuadEstimate { estimate: mean, stderr: (var / m).sqrt() })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(n: usize, i: usize) -> SpherePoint {
        SpherePoint::basis(n, i).unwrap()
    }

    #[test]
    fn distance_examples() {
        let x = e(2, 0);
        assert_eq!(geodesic_distance(&x, &x).unwrap(), 0.0);
        assert!((geodesic_distance(&x, &antipode(&x)).unwrap() - PI).abs() < 1e-15);
        assert!((geodesic_distance(&e(2, 0), &e(2, 1)).unwrap() - PI / 2.0).abs() < 1e-15);
        assert!(geodesic_distance(&e(2, 0), &e(3, 0)).is_err());
    }

    #[test]
    fn point_validation() {
        assert!(SpherePoint::new(vec![1.0, 0.0]).is_err());
        assert!(SpherePoint::new(vec![1.0, 0.1, 0.0]).is_err());
        assert!(SpherePoint::from_ambient(vec![0.0, 0.0, 0.0]).is_err());
        let p = SpherePoint::from_ambient(vec![3.0, 4.0, 0.0]).unwrap();
        assert!((p.coords()[0] - 0.6).abs() < 1e-16);
    }

    #[test]
    fn antipode_is_involution() {
        let p = SpherePoint::from_ambient(vec![0.3, -0.2, 0.9, 0.1]).unwrap();
        assert_eq!(antipode(&antipode(&p)), p);
        assert_eq!(antipode(&e(2, 0)).coords(), &[-1.0, -0.0, -0.0]);
    }

    #[test]
    fn ball_measure_examples() {
        assert!((ball_measure(2, PI).unwrap() - 1.0).abs() < 1e-15);
        assert!((ball_measure(2, PI / 2.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((ball_measure(2, PI / 3.0).unwrap() - 0.25).abs() < 1e-15);
        assert!(ball_measure(2, -0.1).is_err());
        assert!(ball_measure(2, 3.5).is_err());
    }

    #[test]
    fn ball_measure_closed_forms_match_quadrature() {
        // S^3: (r - sin r cos r)/π ; S^4: (2 - 3cos r + cos^3 r)/4
        for &r in &[1e-4, 0.01, 0.09, 0.11, 0.7, 2.0, PI] {
            let s3 = (r - r.sin() * r.cos()) / PI;
            assert!((ball_measure(3, r).unwrap() - s3).abs() < 1e-13 * s3.max(1e-3));
            let c = r.cos();
            let s4 = (2.0 - 3.0 * c + c * c * c) / 4.0;
            // the closed form cancels badly for small r
            assert!((ball_measure(4, r).unwrap() - s4).abs() < 1e-12 * s4 + 1e-15, "r={r}");
        }
        // small-r accuracy in S^3 against the leading term r^3 · 2/(3π)
        let r: f64 = 1e-5;
        assert!((ball_measure(3, r).unwrap() / (2.0 * r.powi(3) / (3.0 * PI)) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn inverse_ball_measure() {
        for n in 2..=4 {
            for &u in &[0.0, 1e-6, 0.3, 0.5, 0.99, 1.0] {
                let r = ball_radius_for_measure(n, u).unwrap();
                assert!((ball_measure(n, r).unwrap() - u).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn packing_small_cases() {
        let m = greedy_packing(2, PI, 3).unwrap();
        assert!(m.len() == 1 || m.len() == 2);
        for seed in 0..5 {
            assert_eq!(greedy_packing(2, 2.1, seed).unwrap().len(), 2);
        }
        assert!(greedy_packing(2, 0.0, 1).is_err());
    }

    #[test]
    fn packing_certificate_and_cardinality() {
        let mu = greedy_packing(2, 0.2, 7).unwrap();
        assert!(mu.is_probability());
        let cert = certify_packing(&mu, 0.2).unwrap();
        assert!(cert.passed(), "{cert:?}");
        assert!(mu.min_pairwise_distance() >= 0.2);
        let c = cardinality_constant(2, 0.2, mu.len());
        assert!(c <= 8.0, "m = {}, C = {c}", mu.len());
    }

    #[test]
    fn packing_is_deterministic() {
        let a = greedy_packing(3, 0.5, 11).unwrap();
        let b = greedy_packing(3, 0.5, 11).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn antipodal_removal() {
        let mu = AtomicMeasure::uniform(2, vec![e(2, 0), antipode(&e(2, 0))]).unwrap();
        let out = remove_antipodal_pairs(&mu, 0.01).unwrap();
        let y1 = &out.atoms()[0].0;
        let y2 = &out.atoms()[1].0;
        let gap = geodesic_distance(y1, &antipode(y2)).unwrap();
        assert!((gap - 0.01).abs() < 1e-12);
        assert!((geodesic_distance(&mu.atoms()[1].0, y2).unwrap() - 0.01).abs() < 1e-12);

        let clean = AtomicMeasure::uniform(2, vec![e(2, 0), e(2, 1)]).unwrap();
        assert_eq!(remove_antipodal_pairs(&clean, 0.01).unwrap(), clean);

        let sep = greedy_packing(2, 0.5, 2).unwrap();
        assert!(remove_antipodal_pairs(&sep, 0.3).is_err());
        let fixed = remove_antipodal_pairs(&sep, 0.05).unwrap();
        assert!(fixed.min_antipodal_gap() > 0.0);
        assert!(fixed.min_pairwise_distance() >= 0.5 - 2.0 * 0.05);
    }

    #[test]
    fn riemann_sum_examples() {
        let mu = AtomicMeasure::dirac(e(2, 0));
        let v = riemann_sum(&mu, &e(2, 1)).unwrap();
        assert!((v - (PI / 2.0).powi(-2)).abs() < 1e-14);
        assert_eq!(riemann_sum(&mu, &e(2, 0)).unwrap(), f64::INFINITY);

        let pts = sample_uniform(2, 7, 5).unwrap();
        let x = SpherePoint::from_ambient(vec![0.1, 0.2, 0.97]).unwrap();
        let a = riemann_sum(&AtomicMeasure::uniform(2, pts.clone()).unwrap(), &x).unwrap();
        let mut rev = pts;
        rev.reverse();
        let b = riemann_sum(&AtomicMeasure::uniform(2, rev).unwrap(), &x).unwrap();
        assert!((a - b).abs() < 1e-12 * a);
    }

    #[test]
    fn hl_maximal_examples() {
        let y = e(2, 0);
        let nu = AtomicMeasure::dirac(y.clone());
        assert!((hl_maximal(&nu, &antipode(&y)).unwrap() - 1.0).abs() < 1e-12);
        for &d in &[0.1, 0.5, 1.3, 2.9] {
            let x = SpherePoint::at_angle(2, d).unwrap();
            let want = 2.0 / (1.0 - d.cos());
            assert!((hl_maximal(&nu, &x).unwrap() - want).abs() < 1e-12 * want);
        }
        assert_eq!(hl_maximal(&nu, &y).unwrap(), f64::INFINITY);
    }

    fn brute_force_maximal(nu: &AtomicMeasure, x: &SpherePoint, radii: usize) -> f64 {
        let ds = nu.distances_from(x).unwrap();
        let mut rs: Vec<f64> = (1..=radii).map(|i| PI * i as f64 / radii as f64).collect();
        // radii just past each atom distance
        rs.extend(ds.iter().map(|d| (d * (1.0 + 1e-14) + 1e-15).min(PI)));
        rs.iter()
            .map(|&r| {
                let mass: f64 = ds.iter().zip(nu.atoms()).filter(|(d, _)| **d < r).map(|(_, (_, w))| w.abs()).sum();
                mass / ball_measure(nu.dim(), r).unwrap()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn hl_maximal_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for trial in 0..20u64 {
            let pts = sample_uniform(2, 1 + (trial as usize % 5), trial).unwrap();
            let atoms = pts.into_iter().map(|p| (p, rng.random::<f64>() - 0.3)).collect();
            let nu = AtomicMeasure::new(2, atoms).unwrap();
            let x = sample_uniform(2, 1, 1000 + trial).unwrap().remove(0);
            let exact = hl_maximal(&nu, &x).unwrap();
            let brute = brute_force_maximal(&nu, &x, 100_000);
            assert!(brute <= exact * (1.0 + 1e-12));
            assert!((exact - brute).abs() <= 1e-9 * exact, "trial {trial}: {exact} vs {brute}");
        }
    }

    #[test]
    fn relation_probe_examples() {
        assert_eq!(integer_relation_probe(&[PI, PI / 2.0], 2), Some(vec![1, -2]));
        assert_eq!(integer_relation_probe(&[PI, 1.0], 50), None);
        assert_eq!(integer_relation_probe(&[0.7, 0.7], 3), Some(vec![1, -1]));
    }

    #[test]
    fn relation_probe_lattice_path() {
        // 3·a - 2·b + c = 0 hidden among independent values
        let (a, b) = (2f64.sqrt(), 3f64.sqrt());
        let vals = [a, b, 2.0 * b - 3.0 * a, PI, 5f64.ln()];
        let q = integer_relation_probe(&vals, 10).expect("relation");
        let resid: f64 = q.iter().zip(&vals).map(|(&c, v)| c as f64 * v).sum();
        assert!(resid.abs() < 1e-8 && q.iter().all(|c| c.abs() <= 10));
        assert_eq!(integer_relation_probe(&[PI, 2f64.sqrt(), 3f64.sqrt(), 5f64.ln(), 7f64.sqrt()], 20), None);
    }

    #[test]
    fn uniform_samples() {
        let pts = sample_uniform(3, 4000, 42).unwrap();
        assert!(pts.iter().all(|p| (norm2(p.coords()) - 1.0).abs() < 1e-12));
        for i in 0..4 {
            let mean = pts.iter().map(|p| p.coords()[i]).sum::<f64>() / 4000.0;
            assert!(mean.abs() < 4.0 / 4000f64.sqrt());
        }
        assert_eq!(pts, sample_uniform(3, 4000, 42).unwrap());
    }

    #[test]
    fn low_discrepancy_grid_is_balanced() {
        for n in [2usize, 3] {
            let g = low_discrepancy_grid(n, 2000, 1).unwrap();
            // hemisphere counts close to half
            let up = g.iter().filter(|p| p.coords()[n] > 0.0).count() as f64 / 2000.0;
            assert!((up - 0.5).abs() < 0.02, "n={n}: {up}");
        }
    }

    #[test]
    fn covering_grid_mesh_holds() {
        let mesh = 0.3;
        let grid = covering_grid(2, mesh).unwrap();
        let probes = sample_uniform(2, 500, 8).unwrap();
        for p in probes {
            let d = grid.iter().map(|g| geodesic_distance(&p, g).unwrap()).fold(PI, f64::min);
            assert!(d <= mesh);
        }
    }

    #[test]
    fn quadrature_constant_and_orthogonality() {
        let one = sphere_quadrature(3, Integrand::Zonal(&|_| 1.0), 100).unwrap();
        assert!((one.estimate - 1.0).abs() < 1e-14);
        // Z_1 on S^2 is 3 cos θ: mean zero, mean square 3
        let z1 = |t: f64| 3.0 * t.cos();
        let q = sphere_quadrature(2, Integrand::Zonal(&z1), 100).unwrap();
        assert!(q.estimate.abs() <= 3.0 * q.stderr);
        let sq = |t: f64| z1(t) * z1(t);
        let q2 = sphere_quadrature(2, Integrand::Zonal(&sq), 100).unwrap();
        assert!((q2.estimate - 3.0).abs() < 1e-12);
        let pole = e(2, 2);
        let general = |x: &SpherePoint| 3.0 * x.dot(&pole);
        let mc = sphere_quadrature(2, Integrand::General(&general), 20_000).unwrap();
        assert!(mc.estimate.abs() <= 3.0 * mc.stderr);
        assert!(sphere_quadrature(2, Integrand::Zonal(&|_| 1.0), 50).is_err());
    }
}
