//! Commands of the `sumlab` binary and the files they write.
//!
//! Every CSV opens with a `#` line carrying the tool version, the config
//! hash and the seed. Floats are written with 17 significant digits so the
//! files round-trip exactly, and rows come out in index order whatever the
//! thread count.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::PathBuf;

use serde::Serialize;

use crate::config::RunConfig;
use crate::divergence::{build_staged, measure_projections, scan_grid, StageReport, StagedConfig, MAX_HORIZON};
use crate::error::{Error, Result};
use crate::kernels::{critical_index, decompose, KernelDecomposition};
use crate::sphere::{greedy_packing, low_discrepancy_grid, AtomicMeasure, SpherePoint};
use crate::summation::{apply, CoeffSequence, SummationSpec};
use crate::verify::{run_suite, witness_measure, Check};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Verify,
    Kernel,
    Pack,
    Scan,
    Summability,
    Stage,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Verify => "verify",
            Command::Kernel => "kernel",
            Command::Pack => "pack",
            Command::Scan => "scan",
            Command::Summability => "summability",
            Command::Stage => "stage",
        }
    }
}

/// What a command produced.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    /// Paths of the files written.
    pub files: Vec<PathBuf>,
    /// Lines for standard output.
    pub report: Vec<String>,
    /// Some invariant failed (`verify` only).
    pub invariant_failed: bool,
    /// The command ran out of budget before finishing its artifact.
    pub budget_exhausted: bool,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.budget_exhausted {
            3
        } else if self.invariant_failed {
            4
        } else {
            0
        }
    }
}

/// Exit code for an error that stopped a command.
pub fn error_exit_code(e: &Error) -> i32 {
    match e {
        Error::BudgetExhausted(_) => 3,
        _ => 2,
    }
}

pub fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

fn metadata(cfg: &RunConfig, cmd: Command) -> String {
    format!("# sumlab version={VERSION} config={} seed={} command={}\n", cfg.hash(), cfg.seed, cmd.name())
}

fn write_artifact(cfg: &RunConfig, name: &str, body: &str, out: &mut Outcome) -> Result<()> {
    std::fs::create_dir_all(&cfg.out)?;
    let path = cfg.out.join(name);
    std::fs::write(&path, body)?;
    out.files.push(path);
    Ok(())
}

pub fn run(cmd: Command, cfg: &RunConfig) -> Result<Outcome> {
    cfg.validate()?;
    let mut out = Outcome::default();
    match cmd {
        Command::Verify => verify(cfg, &mut out)?,
        Command::Kernel => {
            let body = kernel_csv(cfg)?;
            write_artifact(cfg, "kernel.csv", &body, &mut out)?;
        }
        Command::Pack => {
            let mu = greedy_packing(cfg.n, cfg.r, cfg.seed)?;
            out.report.push(format!("{} atoms at separation {}", mu.len(), cfg.r));
            write_artifact(cfg, "packing.csv", &packing_csv(cfg, &mu), &mut out)?;
        }
        Command::Scan => {
            let body = scan_csv(cfg)?;
            write_artifact(cfg, "scan.csv", &body, &mut out)?;
        }
        Command::Summability => {
            let body = summability_csv(cfg)?;
            write_artifact(cfg, "summability.csv", &body, &mut out)?;
        }
        Command::Stage => {
            let (body, complete, diagnostic) = stage_json(cfg)?;
            write_artifact(cfg, "stage.json", &body, &mut out)?;
            if !complete {
                out.budget_exhausted = true;
                out.report.push(format!("incomplete: {}", diagnostic.unwrap_or_default()));
            }
        }
    }
    Ok(out)
}

fn verify(cfg: &RunConfig, out: &mut Outcome) -> Result<()> {
    for (group, checks) in run_suite(cfg.seed)? {
        out.report.push(format!("== {group}"));
        for c in &checks {
            out.report.push(check_line(c));
            out.invariant_failed |= !c.passed;
        }
    }
    Ok(())
}

fn check_line(c: &Check) -> String {
    match c.fitted {
        Some(v) => format!("{c} [C = {v:.6e}]"),
        None => c.to_string(),
    }
}

/// `N` runs over the powers of two up to `nmax` (and `nmax` itself), `θ`
/// over `grid` midpoints of `(0, π)`.
pub fn kernel_rows(cfg: &RunConfig) -> Result<Vec<KernelDecomposition>> {
    let mut orders: Vec<u64> =
        std::iter::successors(Some(1u64), |&k| Some(2 * k)).take_while(|&k| k <= cfg.nmax as u64).collect();
    if orders.last() != Some(&(cfg.nmax as u64)) {
        orders.push(cfg.nmax as u64);
    }
    let mut rows = Vec::with_capacity(orders.len() * cfg.grid);
    for &big_n in &orders {
        for i in 0..cfg.grid {
            let theta = PI * (i as f64 + 0.5) / cfg.grid as f64;
            rows.push(decompose(cfg.n, big_n, theta, cfg.trunc)?);
        }
    }
    Ok(rows)
}

pub fn kernel_csv(cfg: &RunConfig) -> Result<String> {
    let mut s = metadata(cfg, Command::Kernel);
    s.push_str("N,theta,K_full,K_main,K_error,K_antipodal,trunc_bound\n");
    for d in kernel_rows(cfg)? {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            d.big_n,
            fmt_f(d.theta),
            fmt_f(d.full),
            fmt_f(d.main),
            fmt_f(d.error),
            fmt_f(d.antipodal),
            fmt_f(d.tail_bound)
        );
    }
    Ok(s)
}

/// Header `# dim=<n> sep=<r> seed=<s>` followed by the version and config
/// hash, then one row of coordinates and weight per atom.
pub fn packing_csv(cfg: &RunConfig, mu: &AtomicMeasure) -> String {
    let mut s =
        format!("# dim={} sep={} seed={} version={VERSION} config={}\n", mu.dim(), fmt_f(cfg.r), cfg.seed, cfg.hash());
    for (p, w) in mu.atoms() {
        let row: Vec<String> = p.coords().iter().map(|&c| fmt_f(c)).chain(std::iter::once(fmt_f(*w))).collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

/// A packing read back from its CSV.
#[derive(Debug, Clone)]
pub struct PackingFile {
    pub dim: usize,
    pub sep: f64,
    pub seed: u64,
    pub measure: AtomicMeasure,
}

pub fn read_packing(text: &str) -> Result<PackingFile> {
    let parse_err = |m: String| Error::Parse(m);
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| parse_err("empty packing file".into()))?;
    let header = header.strip_prefix('#').ok_or_else(|| parse_err("missing `#` header".into()))?;
    let (mut dim, mut sep, mut seed) = (None, None, None);
    for tok in header.split_whitespace() {
        if let Some((k, v)) = tok.split_once('=') {
            let bad = || parse_err(format!("bad header field {tok:?}"));
            match k {
                "dim" => dim = Some(v.parse::<usize>().map_err(|_| bad())?),
                "sep" => sep = Some(v.parse::<f64>().map_err(|_| bad())?),
                "seed" => seed = Some(v.parse::<u64>().map_err(|_| bad())?),
                _ => {}
            }
        }
    }
    let (Some(dim), Some(sep), Some(seed)) = (dim, sep, seed) else {
        return Err(parse_err("header needs dim, sep and seed".into()));
    };
    let mut atoms = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let vals: Vec<f64> = line
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| parse_err(format!("row {}: not a number", i + 1)))?;
        if vals.len() != dim + 2 {
            return Err(parse_err(format!("row {}: expected {} columns, got {}", i + 1, dim + 2, vals.len())));
        }
        let w = vals[dim + 1];
        atoms.push((SpherePoint::new(vals[..=dim].to_vec())?, w));
    }
    let measure = AtomicMeasure::new(dim, atoms)?.with_separation(sep);
    Ok(PackingFile { dim, sep, seed, measure })
}

pub fn scan_csv(cfg: &RunConfig) -> Result<String> {
    let mu = witness_measure(cfg.n, cfg.r, cfg.seed)?;
    let points = low_discrepancy_grid(cfg.n, cfg.grid, cfg.seed)?;
    let results = scan_grid(&mu, &points, cfg.nmax)?;
    let mut s = metadata(cfg, Command::Scan);
    let coords: Vec<String> = (0..=cfg.n).map(|i| format!("x{i}")).collect();
    let _ = writeln!(s, "point_index,{},sup_abs,argmax_N,target,r,m,N_max,seed", coords.join(","));
    for (i, res) in results.iter().enumerate() {
        let xs: Vec<String> = res.x.coords().iter().map(|&c| fmt_f(c)).collect();
        let _ = writeln!(
            s,
            "{i},{},{},{},{},{},{},{},{}",
            xs.join(","),
            fmt_f(res.sup_abs),
            res.argmax_n,
            fmt_f(res.target),
            fmt_f(cfg.r),
            mu.len(),
            res.n_max,
            cfg.seed
        );
    }
    Ok(s)
}

/// One row of the method comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct SummabilityRow {
    pub method: &'static str,
    pub delta: f64,
    pub c: f64,
    pub cutoff: f64,
    pub value: f64,
}

/// Every method applied to the Laplace series of the witness packing at one
/// seeded point, at `grid` cutoffs spread over `1..=nmax`.
pub fn summability_rows(cfg: &RunConfig) -> Result<Vec<SummabilityRow>> {
    let delta = cfg.delta.unwrap_or_else(|| critical_index(cfg.n));
    let mu = witness_measure(cfg.n, cfg.r, cfg.seed)?;
    let x = low_discrepancy_grid(cfg.n, 1, cfg.seed)?.remove(0);
    let a = CoeffSequence::new(measure_projections(&mu, cfg.nmax, &x)?);
    let count = cfg.grid.min(cfg.nmax);
    let cutoffs: Vec<u64> = (1..=count).map(|i| ((i * cfg.nmax) / count) as u64).collect();
    let c = cfg.shift;
    let mut rows = Vec::new();
    let mut push = |spec: SummationSpec| -> Result<()> {
        let value = apply(&spec, &a)?;
        rows.push(SummabilityRow {
            method: spec.method.name(),
            delta: spec.delta,
            c: spec.c,
            cutoff: spec.cutoff,
            value,
        });
        Ok(())
    };
    for &big_n in &cutoffs {
        push(SummationSpec::cesaro(delta, big_n))?;
    }
    for &big_n in &cutoffs {
        push(SummationSpec::riesz(delta, big_n as f64))?;
    }
    for &big_n in &cutoffs {
        push(SummationSpec::shifted_riesz(delta, c, big_n as f64 + c))?;
    }
    for &big_n in &cutoffs {
        push(SummationSpec::quadratic_riesz(delta, c, big_n as f64 + c))?;
    }
    for &big_n in &cutoffs {
        push(SummationSpec::bochner_riesz(cfg.n, delta, big_n as f64))?;
    }
    Ok(rows)
}

pub fn summability_csv(cfg: &RunConfig) -> Result<String> {
    let mut s = metadata(cfg, Command::Summability);
    s.push_str("method,delta,c,cutoff,value\n");
    for row in summability_rows(cfg)? {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            row.method,
            fmt_f(row.delta),
            fmt_f(row.c),
            fmt_f(row.cutoff),
            fmt_f(row.value)
        );
    }
    Ok(s)
}

#[derive(Serialize)]
struct StageFile<'a> {
    version: &'static str,
    config: String,
    seed: u64,
    complete: bool,
    diagnostic: Option<&'a str>,
    stages: &'a [StageReport],
}

/// The radius ladder starts at `r` and halves; horizons are capped by
/// `nmax`.
pub fn staged_config(cfg: &RunConfig) -> Result<StagedConfig> {
    let mut sc = StagedConfig::new(cfg.n, cfg.stages, cfg.grid, cfg.seed);
    sc.radii = vec![cfg.r, cfg.r / 2.0, cfg.r / 4.0];
    sc.horizons.retain(|&h| h <= cfg.nmax.min(MAX_HORIZON));
    if sc.horizons.is_empty() {
        return Err(Error::Config(format!("stage needs nmax >= {}", StagedConfig::new(2, 1, 1, 0).horizons[0])));
    }
    Ok(sc)
}

pub fn stage_json(cfg: &RunConfig) -> Result<(String, bool, Option<String>)> {
    let outcome = build_staged(&staged_config(cfg)?)?;
    let file = StageFile {
        version: VERSION,
        config: cfg.hash(),
        seed: cfg.seed,
        complete: outcome.complete,
        diagnostic: outcome.diagnostic.as_deref(),
        stages: &outcome.reports,
    };
    let mut body = serde_json::to_string_pretty(&file).map_err(|e| Error::Io(e.to_string()))?;
    body.push('\n');
    Ok((body, outcome.complete, outcome.diagnostic))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> RunConfig {
        RunConfig { nmax: 64, grid: 12, ..RunConfig::default() }
    }

    #[test]
    fn float_format_round_trips() {
        for x in [0.1, PI, -1e-300, 6.02214076e23, 1.0 / 3.0] {
            assert_eq!(fmt_f(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_f(0.25), "2.5000000000000000e-1");
    }

    #[test]
    fn packing_round_trip() {
        let cfg = RunConfig { r: 0.5, ..small() };
        let mu = greedy_packing(2, 0.5, 1).unwrap();
        let text = packing_csv(&cfg, &mu);
        assert!(text.starts_with("# dim=2 sep=5.0000000000000000e-1 seed=1 "));
        let back = read_packing(&text).unwrap();
        assert_eq!(back.dim, 2);
        assert_eq!(back.sep, 0.5);
        assert_eq!(back.seed, 1);
        assert_eq!(back.measure.atoms(), mu.atoms());
    }

    #[test]
    fn packing_parse_errors() {
        assert!(read_packing("").is_err());
        assert!(read_packing("dim=2\n").is_err());
        assert!(read_packing("# dim=2 sep=0.5\n").is_err());
        assert!(read_packing("# dim=2 sep=0.5 seed=1\n1,0,0\n").is_err());
        assert!(read_packing("# dim=2 sep=0.5 seed=1\n1,0,0.5,abc\n").is_err());
    }

    #[test]
    fn kernel_rows_cover_orders() {
        let cfg = RunConfig { nmax: 12, grid: 3, ..small() };
        let rows = kernel_rows(&cfg).unwrap();
        let orders: Vec<u64> = rows.iter().map(|d| d.big_n).step_by(3).collect();
        assert_eq!(orders, vec![1, 2, 4, 8, 12]);
        assert!(rows.iter().all(|d| (d.full - d.total()).abs() <= d.tail_bound + 1e-12 * (1.0 + d.full.abs())));
    }

    #[test]
    fn csv_headers() {
        let cfg = small();
        let k = kernel_csv(&cfg).unwrap();
        let mut lines = k.lines();
        assert!(lines.next().unwrap().starts_with("# sumlab version="));
        assert_eq!(lines.next().unwrap(), "N,theta,K_full,K_main,K_error,K_antipodal,trunc_bound");
        let s = summability_csv(&cfg).unwrap();
        assert_eq!(s.lines().nth(1).unwrap(), "method,delta,c,cutoff,value");
        assert_eq!(s.lines().count(), 2 + 5 * 12);
        let sc = scan_csv(&cfg).unwrap();
        assert_eq!(sc.lines().nth(1).unwrap(), "point_index,x0,x1,x2,sup_abs,argmax_N,target,r,m,N_max,seed");
        assert_eq!(sc.lines().count(), 2 + 12);
    }

    #[test]
    fn summability_cutoffs() {
        let rows = summability_rows(&small()).unwrap();
        let ces: Vec<f64> = rows.iter().filter(|r| r.method == "cesaro").map(|r| r.cutoff).collect();
        assert_eq!(ces.len(), 12);
        assert_eq!(ces[0], 5.0);
        assert_eq!(*ces.last().unwrap(), 64.0);
        let shifted = rows.iter().find(|r| r.method == "shifted_riesz").unwrap();
        assert_eq!((shifted.c, shifted.cutoff), (1.0, 6.0));
        assert!(rows.iter().all(|r| r.value.is_finite()));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(error_exit_code(&Error::Config("x".into())), 2);
        assert_eq!(error_exit_code(&Error::BudgetExhausted("x".into())), 3);
        let o = Outcome { invariant_failed: true, ..Outcome::default() };
        assert_eq!(o.exit_code(), 4);
        assert_eq!(Outcome::default().exit_code(), 0);
    }

    #[test]
    fn stage_horizons_respect_nmax() {
        let cfg = RunConfig { nmax: 1024, ..small() };
        assert_eq!(staged_config(&cfg).unwrap().horizons, vec![256, 1024]);
        let cfg = RunConfig { nmax: 100, ..small() };
        assert!(matches!(staged_config(&cfg), Err(Error::Config(_))));
    }
}
