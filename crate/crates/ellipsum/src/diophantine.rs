//! Shift vectors with extended-precision components and empirical
//! diophantine-type estimation.
//!
//! A shift α enters every statistic through phases m·α and radii |m−α|_M;
//! components are held in double-double so those survive |m| up to 10⁶
//! with comfortable margin.

use crate::dd::{self, Dd};
use crate::error::{Error, Result};
use serde::Serialize;

/// A shift vector α with extended-precision components, reproducible from
/// its textual spec.
#[derive(Clone, Debug)]
pub struct ShiftVector {
    pub n: usize,
    pub comps: Vec<Dd>,
    pub spec: String,
}

impl ShiftVector {
    /// The zero shift in dimension n.
    pub fn zero(n: usize) -> ShiftVector {
        ShiftVector {
            n,
            comps: vec![Dd::ZERO; n],
            spec: vec!["0"; n].join(","),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|c| c.hi == 0.0 && c.lo == 0.0)
    }

    /// Componentwise negation (used for conjugate-symmetry checks).
    pub fn negated(&self) -> ShiftVector {
        ShiftVector {
            n: self.n,
            comps: self.comps.iter().map(|c| c.neg()).collect(),
            spec: format!("neg({})", self.spec),
        }
    }
}

/// Empirical diophantine-type report for a shift vector.
#[derive(Clone, Debug, Serialize)]
pub struct DioReport {
    pub q_max: u64,
    /// max over q of 1 + log(1/d(q))/log q; d = Euclidean distance of qα
    /// to the nearest integer vector.
    pub kappa_hat: f64,
    pub worst_q: u64,
    pub worst_dist: f64,
    pub rational_hit: bool,
    /// Norm convention used for d(q).
    pub norm: &'static str,
}

fn parse_token(token: &str) -> Result<Dd> {
    let bad = || Error::BadToken {
        token: token.to_string(),
    };
    let t = token.trim();
    if t == "phi-1" {
        // (sqrt 5 - 1)/2
        return Ok(dd::sqrt_int(5).sub(Dd::ONE).div(Dd::from_f64(2.0)));
    }
    if t == "e-2" {
        return Ok(Dd::E.sub(Dd::from_f64(2.0)));
    }
    if t == "pi-3" {
        return Ok(Dd::PI.sub(Dd::from_f64(3.0)));
    }
    if let Some(rest) = t.strip_prefix("sqrt") {
        let (k_str, off) = match rest.split_once('-') {
            Some((k, o)) => (k, Some(o)),
            None => (rest, None),
        };
        let k: u64 = k_str.parse().map_err(|_| bad())?;
        let mut v = dd::sqrt_int(k);
        if let Some(o) = off {
            let o: i64 = o.parse().map_err(|_| bad())?;
            v = v.sub(Dd::from_i64(o));
        }
        return Ok(v);
    }
    dd::parse_decimal(t).ok_or_else(bad)
}

/// Parse a comma-separated shift spec (`decimal | sqrt<k> | sqrt<k>-<int> |
/// phi-1 | e-2 | pi-3`) into a shift vector of dimension n.
pub fn parse_shift(spec: &str, n: usize) -> Result<ShiftVector> {
    let comps: Vec<Dd> = spec
        .split(',')
        .map(parse_token)
        .collect::<Result<Vec<_>>>()?;
    if comps.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: comps.len(),
        });
    }
    Ok(ShiftVector {
        n,
        comps,
        spec: spec.to_string(),
    })
}

/// Distance of qα to the nearest integer vector, in double-double.
fn dist_to_lattice(alpha: &ShiftVector, q: u64) -> f64 {
    let qd = Dd::from_i64(q as i64);
    let mut s = Dd::ZERO;
    for &c in &alpha.comps {
        let f = qd.mul(c).fract_centered();
        s = s.add(f.mul(f));
    }
    s.sqrt().to_f64()
}

/// Scan q = 2..q_max and report the empirical type exponent
/// kappa_hat = 1 + log(1/d_min)/log(q_max), where d_min is the record
/// distance of qα to the integer lattice over the scan. Measuring the
/// record against the scan bound (rather than each q individually) stops
/// tiny denominators from dominating: for the golden ratio the estimate
/// then settles near the true type 2 instead of the q=2 artifact ≈3.1.
pub fn estimate_type(alpha: &ShiftVector, q_max: u64) -> DioReport {
    assert!(q_max >= 2);
    let mut worst_q = 2u64;
    let mut worst_dist = f64::INFINITY;
    let mut rational_hit = false;
    for q in 2..=q_max {
        let d = dist_to_lattice(alpha, q);
        if d < 1e-25 {
            rational_hit = true;
            worst_q = q;
            worst_dist = d;
            break;
        }
        if d < worst_dist {
            worst_dist = d;
            worst_q = q;
        }
    }
    let kappa_hat = if rational_hit {
        f64::INFINITY
    } else {
        1.0 + (1.0 / worst_dist).ln() / (q_max as f64).ln()
    };
    DioReport {
        q_max,
        kappa_hat,
        worst_q,
        worst_dist,
        rational_hit,
        norm: "euclidean",
    }
}

/// Result of the bounded integer-relation search over c·(α,1) = 0.
#[derive(Clone, Debug, Serialize)]
pub enum IndependenceScan {
    NoRelationFound { coeff_bound: i64 },
    Relation { witness: Vec<i64> },
}

/// Exhaustive search for integer relations c·(α₁,…,αₙ,1) = 0 with
/// |c_i| ≤ coeff_bound, tolerance 1e−24.
pub fn independence_scan(alpha: &ShiftVector, coeff_bound: i64) -> Result<IndependenceScan> {
    assert!(coeff_bound >= 1);
    let n = alpha.n;
    let width = (2 * coeff_bound + 1) as u128;
    let size = width.pow(n as u32 + 1);
    if size > 1_000_000_000 {
        return Err(Error::SearchSpaceTooLarge { size });
    }
    let mut c = vec![-coeff_bound; n + 1];
    loop {
        if c.iter().any(|&v| v != 0) {
            let mut s = Dd::ZERO;
            for i in 0..n {
                s = s.add(Dd::from_i64(c[i]).mul(alpha.comps[i]));
            }
            s = s.add(Dd::from_i64(c[n]));
            if s.to_f64().abs() <= 1e-24 {
                return Ok(IndependenceScan::Relation { witness: c });
            }
        }
        // odometer increment
        let mut i = 0;
        loop {
            if i > n {
                return Ok(IndependenceScan::NoRelationFound { coeff_bound });
            }
            if c[i] < coeff_bound {
                c[i] += 1;
                break;
            }
            c[i] = -coeff_bound;
            i += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_standard_tokens() {
        let a = parse_shift("sqrt2-1,sqrt3-1", 2).unwrap();
        assert!((a.comps[0].to_f64() - (2.0f64.sqrt() - 1.0)).abs() < 1e-15);
        assert!((a.comps[1].to_f64() - (3.0f64.sqrt() - 1.0)).abs() < 1e-15);
        let h = parse_shift("0.5,0.5", 2).unwrap();
        assert_eq!(h.comps[0].hi, 0.5);
        let p = parse_shift("phi-1", 1).unwrap();
        assert!((p.comps[0].to_f64() - 0.6180339887498949).abs() < 1e-16);
        // golden ratio satisfies x^2 + x - 1 = 0
        let x = p.comps[0];
        let r = x.mul(x).add(x).sub(Dd::ONE);
        assert!(r.to_f64().abs() < 1e-30);
        assert!(parse_shift("sqrtx", 1).is_err());
        assert!(matches!(
            parse_shift("0.5", 2),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn golden_ratio_type_two() {
        // Continued-fraction oracle: for phi-1 = [0;1,1,1,...] the best
        // approximations are F_{k-1}/F_k with |alpha - p/q| ~ 1/(sqrt5 q^2),
        // so kappa_hat must approach 2 from below and stay under 2.05.
        let a = parse_shift("phi-1", 1).unwrap();
        let rep = estimate_type(&a, 10_000);
        assert!(
            rep.kappa_hat >= 2.0 && rep.kappa_hat <= 2.05,
            "kappa_hat = {}",
            rep.kappa_hat
        );
        assert!(!rep.rational_hit);
        // worst q should be a Fibonacci number (best approximation denominator)
        let fib = [2u64, 3, 5, 8, 13, 21, 34, 55, 89, 144, 233, 377, 610, 987, 1597, 2584, 4181, 6765];
        assert!(fib.contains(&rep.worst_q), "worst_q = {}", rep.worst_q);
    }

    #[test]
    fn rational_hit_detected() {
        // a 16-digit approximation of 1/3 misses the lattice by ~1e-17,
        // well above the 1e-25 rational cutoff
        let a = parse_shift("0.3333333333333333", 1).unwrap();
        let rep = estimate_type(&a, 100);
        assert!(!rep.rational_hit);
        // ...but an exact dyadic rational is
        let b = parse_shift("0.25", 1).unwrap();
        let rep = estimate_type(&b, 10);
        assert!(rep.rational_hit);
        assert_eq!(rep.worst_q, 4);
    }

    #[test]
    fn pair_shift_estimates_below_two() {
        // (sqrt2-1, sqrt3-1) admits good simultaneous approximations, so
        // the empirical exponent stays well under 2 at every scan size
        let a = parse_shift("sqrt2-1,sqrt3-1", 2).unwrap();
        for q_max in [100, 1_000, 10_000] {
            let rep = estimate_type(&a, q_max);
            assert!(rep.kappa_hat >= 1.0 && rep.kappa_hat < 2.0, "{rep:?}");
        }
    }

    #[test]
    fn independence_scan_examples() {
        let a = parse_shift("sqrt2-1,sqrt3-1", 2).unwrap();
        assert!(matches!(
            independence_scan(&a, 50).unwrap(),
            IndependenceScan::NoRelationFound { .. }
        ));
        let b = parse_shift("0.5,0.5", 2).unwrap();
        match independence_scan(&b, 2).unwrap() {
            IndependenceScan::Relation { witness } => {
                // witness must annihilate (1/2, 1/2, 1): e.g. (1,-1,0) or (2,0,-1)
                let v = witness[0] as f64 * 0.5 + witness[1] as f64 * 0.5 + witness[2] as f64;
                assert!(v.abs() < 1e-24);
            }
            other => panic!("expected relation, got {other:?}"),
        }
        let c = parse_shift("sqrt2-1", 1).unwrap();
        assert!(matches!(
            independence_scan(&c, 10).unwrap(),
            IndependenceScan::NoRelationFound { .. }
        ));
    }

    #[test]
    fn search_space_guard() {
        let a = parse_shift("sqrt2-1,sqrt3-1,sqrt5-2", 3).unwrap();
        assert!(matches!(
            independence_scan(&a, 1000),
            Err(Error::SearchSpaceTooLarge { .. })
        ));
    }

    #[test]
    fn doubled_precision_stability() {
        // recomputing d(q) with plain f64 vs double-double changes kappa_hat
        // by far less than 1e-6 at this scale
        let a = parse_shift("sqrt2-1", 1).unwrap();
        let rep = estimate_type(&a, 10_000);
        let alpha = 2.0f64.sqrt() - 1.0;
        let mut d_min = f64::INFINITY;
        for q in 2..=10_000u64 {
            let x = q as f64 * alpha;
            let d = (x - x.round()).abs();
            if d > 0.0 {
                d_min = d_min.min(d);
            }
        }
        let kappa_f64 = 1.0 + (1.0 / d_min).ln() / 10_000f64.ln();
        assert!((rep.kappa_hat - kappa_f64).abs() < 1e-6);
    }
}
