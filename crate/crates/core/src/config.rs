//! Run configuration for the `sumlab` harness.
//!
//! Files hold one `key = value` per line; `#` starts a comment. Values set
//! on the command line override the file, which overrides the defaults.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 4;
pub const MAX_NMAX: usize = 1 << 16;
pub const MAX_GRID: usize = 100_000;
pub const MAX_TRUNC: usize = 200;
pub const MAX_STAGES: usize = crate::divergence::MAX_STAGES;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n: usize,
    pub r: f64,
    pub seed: u64,
    pub nmax: usize,
    pub grid: usize,
    pub trunc: usize,
    pub stages: usize,
    pub out: PathBuf,
    /// Summation order for `summability`; the critical index when unset.
    pub delta: Option<f64>,
    /// Shift used by the shifted and quadratic Riesz rows of `summability`.
    pub shift: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n: 2,
            r: 0.4,
            seed: 1,
            nmax: 1024,
            grid: 200,
            trunc: crate::kernels::DEFAULT_TRUNC,
            stages: 3,
            out: PathBuf::from("."),
            delta: None,
            shift: 1.0,
        }
    }
}

fn bad<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::Config(format!("{key}: cannot parse {value:?}")))
}

impl RunConfig {
    /// Sets one field from its textual form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "n" => self.n = parse_value(key, value)?,
            "r" => self.r = parse_value(key, value)?,
            "seed" => self.seed = parse_value(key, value)?,
            "nmax" => self.nmax = parse_value(key, value)?,
            "grid" => self.grid = parse_value(key, value)?,
            "trunc" => self.trunc = parse_value(key, value)?,
            "stages" => self.stages = parse_value(key, value)?,
            "out" => self.out = PathBuf::from(value),
            "delta" => self.delta = Some(parse_value(key, value)?),
            "shift" => self.shift = parse_value(key, value)?,
            _ => return bad(format!("unknown key {key:?}")),
        }
        Ok(())
    }

    /// Applies every `key = value` line of `text` on top of `self`.
    pub fn merge_str(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return bad(format!("line {}: expected `key = value`", i + 1));
            };
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }

    pub fn merge_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        self.merge_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if !(2..=MAX_DIM).contains(&self.n) {
            return bad(format!("n = {} outside 2..={MAX_DIM}", self.n));
        }
        if !(self.r > 0.0 && self.r <= std::f64::consts::PI) {
            return bad(format!("r = {} outside (0, pi]", self.r));
        }
        if !(1..=MAX_NMAX).contains(&self.nmax) {
            return bad(format!("nmax = {} outside 1..={MAX_NMAX}", self.nmax));
        }
        if !(1..=MAX_GRID).contains(&self.grid) {
            return bad(format!("grid = {} outside 1..={MAX_GRID}", self.grid));
        }
        if !(1..=MAX_TRUNC).contains(&self.trunc) {
            return bad(format!("trunc = {} outside 1..={MAX_TRUNC}", self.trunc));
        }
        if !(1..=MAX_STAGES).contains(&self.stages) {
            return bad(format!("stages = {} outside 1..={MAX_STAGES}", self.stages));
        }
        if let Some(d) = self.delta {
            if !(d > 0.0 && d.is_finite()) {
                return bad(format!("delta = {d} must be positive"));
            }
        }
        if !(self.shift.is_finite() && self.shift >= 0.0) {
            return bad(format!("shift = {} must be nonnegative", self.shift));
        }
        Ok(())
    }

    /// Every field that affects results, one `key = value` per line in a
    /// fixed order. The output directory is left out.
    pub fn canonical(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "n = {}", self.n);
        let _ = writeln!(s, "r = {:.16e}", self.r);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "nmax = {}", self.nmax);
        let _ = writeln!(s, "grid = {}", self.grid);
        let _ = writeln!(s, "trunc = {}", self.trunc);
        let _ = writeln!(s, "stages = {}", self.stages);
        if let Some(d) = self.delta {
            let _ = writeln!(s, "delta = {d:.16e}");
        }
        let _ = writeln!(s, "shift = {:.16e}", self.shift);
        s
    }

    /// First 16 hex digits of the SHA-256 of [`canonical`](Self::canonical).
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}
