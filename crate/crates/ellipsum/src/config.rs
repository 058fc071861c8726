//! Run configuration: plain key=value text files with flag overrides, a
//! canonical serialized form that round-trips, and the matrix/kernel spec
//! parsers shared by the CLI.

use crate::error::{Error, Result};
use serde::Serialize;
use std::fmt::Write as _;

fn invalid(reason: impl Into<String>) -> Error {
    Error::InvalidConfig {
        reason: reason.into(),
    }
}

/// Complete description of one run. String-valued specs (matrix, alpha,
/// kernel) are kept verbatim so the canonical form is stable.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub matrix: String,
    pub alpha: String,
    pub pmax: u64,
    pub rmax: f64,
    pub t: f64,
    pub k: u64,
    pub zeta: f64,
    pub gamma: f64,
    pub p: u64,
    pub eps: f64,
    pub qmax: u64,
    pub kernel: String,
    pub out: String,
    pub cache_dir: String,
    pub workers: usize,
    pub assume_property_1: bool,
}

impl Default for RunConfig {
    fn default() -> RunConfig {
        RunConfig {
            command: String::new(),
            matrix: "diag:1".to_string(),
            alpha: "0".to_string(),
            pmax: 10_000,
            rmax: 100.0,
            t: 50.0,
            k: 20,
            zeta: 0.5,
            gamma: 0.5,
            p: 10_000,
            eps: 0.1,
            qmax: 100_000,
            kernel: "bump:1,2".to_string(),
            out: String::new(),
            cache_dir: String::new(),
            workers: 1,
            assume_property_1: false,
        }
    }
}

impl RunConfig {
    /// Apply one key=value assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |k: &str, v: &str| invalid(format!("bad value for {k}: {v}"));
        match key {
            "command" => self.command = value.to_string(),
            "matrix" => self.matrix = value.to_string(),
            "alpha" => self.alpha = value.to_string(),
            "pmax" => self.pmax = value.parse().map_err(|_| bad(key, value))?,
            "rmax" => self.rmax = value.parse().map_err(|_| bad(key, value))?,
            "t" => self.t = value.parse().map_err(|_| bad(key, value))?,
            "k" => self.k = value.parse().map_err(|_| bad(key, value))?,
            "zeta" => self.zeta = value.parse().map_err(|_| bad(key, value))?,
            "gamma" => self.gamma = value.parse().map_err(|_| bad(key, value))?,
            "p" => self.p = value.parse().map_err(|_| bad(key, value))?,
            "eps" => self.eps = value.parse().map_err(|_| bad(key, value))?,
            "qmax" => self.qmax = value.parse().map_err(|_| bad(key, value))?,
            "kernel" => self.kernel = value.to_string(),
            "out" => self.out = value.to_string(),
            "cache_dir" => self.cache_dir = value.to_string(),
            "workers" => self.workers = value.parse().map_err(|_| bad(key, value))?,
            "assume_property_1" => {
                self.assume_property_1 = value.parse().map_err(|_| bad(key, value))?
            }
            _ => return Err(invalid(format!("unknown config key: {key}"))),
        }
        Ok(())
    }

    /// Parse key=value lines on top of the defaults. `#` starts a comment.
    pub fn parse(text: &str) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| invalid(format!("line {}: expected key=value", i + 1)))?;
            cfg.set(key.trim(), value.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.pmax == 0 || self.k == 0 || self.p == 0 || self.qmax == 0 {
            return Err(invalid("integer bounds must be positive"));
        }
        for (name, v) in [("rmax", self.rmax), ("t", self.t), ("eps", self.eps)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(format!("{name} must be positive and finite")));
            }
        }
        if !(self.zeta > 0.0 && self.zeta <= 2.0) {
            return Err(invalid("zeta must lie in (0, 2]"));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(invalid("gamma must lie in (0, 1)"));
        }
        if self.workers == 0 {
            return Err(invalid("workers must be positive"));
        }
        Ok(())
    }

    /// Canonical text form: fixed key order, floats with 17 significant
    /// digits. `parse(canonical(c)) == c`.
    pub fn canonical(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "command={}", self.command);
        let _ = writeln!(s, "matrix={}", self.matrix);
        let _ = writeln!(s, "alpha={}", self.alpha);
        let _ = writeln!(s, "pmax={}", self.pmax);
        let _ = writeln!(s, "rmax={:.17e}", self.rmax);
        let _ = writeln!(s, "t={:.17e}", self.t);
        let _ = writeln!(s, "k={}", self.k);
        let _ = writeln!(s, "zeta={:.17e}", self.zeta);
        let _ = writeln!(s, "gamma={:.17e}", self.gamma);
        let _ = writeln!(s, "p={}", self.p);
        let _ = writeln!(s, "eps={:.17e}", self.eps);
        let _ = writeln!(s, "qmax={}", self.qmax);
        let _ = writeln!(s, "kernel={}", self.kernel);
        let _ = writeln!(s, "out={}", self.out);
        let _ = writeln!(s, "cache_dir={}", self.cache_dir);
        let _ = writeln!(s, "workers={}", self.workers);
        let _ = writeln!(s, "assume_property_1={}", self.assume_property_1);
        s
    }
}

/// Parse a kernel spec: `bump:c0,c1` with 0 < c0 < c1.
pub fn parse_kernel(spec: &str) -> Result<(f64, f64)> {
    let body = spec.strip_prefix("bump:").ok_or_else(|| Error::BadToken {
        token: spec.to_string(),
    })?;
    let (a, b) = body.split_once(',').ok_or_else(|| Error::BadToken {
        token: spec.to_string(),
    })?;
    let c0: f64 = a.trim().parse().map_err(|_| Error::BadToken {
        token: a.trim().to_string(),
    })?;
    let c1: f64 = b.trim().parse().map_err(|_| Error::BadToken {
        token: b.trim().to_string(),
    })?;
    if !(c0 > 0.0 && c1 > c0 && c1.is_finite()) {
        return Err(Error::InvalidConfig {
            reason: format!("kernel support must satisfy 0 < c0 < c1, got [{c0}, {c1}]"),
        });
    }
    Ok((c0, c1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_roundtrip() {
        let mut cfg = RunConfig::default();
        cfg.command = "meansq".to_string();
        cfg.matrix = "full:[[2,1],[1,2]]".to_string();
        cfg.alpha = "sqrt2-1,sqrt3-1".to_string();
        cfg.t = 817.25;
        cfg.zeta = 0.1234567890123456_f64;
        cfg.assume_property_1 = true;
        let text = cfg.canonical();
        let back = RunConfig::parse(&text).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.canonical(), text);
    }

    #[test]
    fn comments_and_overrides() {
        let cfg = RunConfig::parse("pmax=500 # truncation\n\nworkers=4\n").unwrap();
        assert_eq!(cfg.pmax, 500);
        assert_eq!(cfg.workers, 4);
        assert!(RunConfig::parse("nonsense").is_err());
        assert!(RunConfig::parse("color=red").is_err());
    }

    #[test]
    fn validation_bounds() {
        for bad in ["zeta=0", "zeta=2.5", "gamma=0", "gamma=1", "pmax=0", "t=-1", "workers=0"] {
            assert!(RunConfig::parse(bad).is_err(), "{bad} should fail");
        }
        assert!(RunConfig::parse("zeta=2").is_ok());
        assert!(RunConfig::parse("gamma=0.99").is_ok());
    }

    #[test]
    fn kernel_specs() {
        assert_eq!(parse_kernel("bump:1,2").unwrap(), (1.0, 2.0));
        assert!(parse_kernel("bump:2,1").is_err());
        assert!(parse_kernel("bump:0,1").is_err());
        assert!(parse_kernel("tophat:1,2").is_err());
    }
}
