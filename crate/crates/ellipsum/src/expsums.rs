//! Twisted exponential-sum series over exact shells:
//! r(p) = Σ_{Q_M(m)=p} e(m·α), its cumulative mean square R(N), the
//! variance series 𝔄 built from the adjugate form, and dyadic block
//! diagnostics.

use crate::dd::Dd;
use crate::diophantine::ShiftVector;
use crate::error::{Error, Result};
use crate::lattice::{self, ShellBuckets};
use crate::quadform::QuadFormCtx;
use num_complex::Complex64;
use serde::Serialize;

/// The series r(p), p ∈ [1, p_max], together with cumulative R(N).
#[derive(Clone, Debug, PartialEq)]
pub struct ExpSumSeries {
    pub matrix_digest: [u8; 32],
    pub alpha_spec: String,
    pub n: usize,
    pub p_max: u64,
    /// r(p) at index p−1.
    pub r: Vec<Complex64>,
    /// R(N) = Σ_{p≤N} |r(p)|² at index N−1, accumulated in double-double.
    pub r_cum: Vec<f64>,
}

impl ExpSumSeries {
    pub fn from_shells(ctx: &QuadFormCtx, alpha: &ShiftVector, shells: ShellBuckets) -> ExpSumSeries {
        let mut r_cum = Vec::with_capacity(shells.sums.len());
        let mut acc = Dd::ZERO;
        for s in &shells.sums {
            acc = acc.add(Dd::from_f64(s.norm_sqr()));
            r_cum.push(acc.to_f64());
        }
        ExpSumSeries {
            matrix_digest: lattice::build_digest(ctx, &alpha.spec, shells.p_max as f64),
            alpha_spec: alpha.spec.clone(),
            n: ctx.n,
            p_max: shells.p_max,
            r: shells.sums,
            r_cum,
        }
    }

    #[inline]
    pub fn r_at(&self, p: u64) -> Complex64 {
        self.r[(p - 1) as usize]
    }

    /// R(N) = Σ_{p≤N} |r(p)|².
    #[inline]
    pub fn r_cum_at(&self, n: u64) -> f64 {
        self.r_cum[(n - 1) as usize]
    }
}

/// Build the series by enumerating shells up to p_max.
pub fn rep_sums(ctx: &QuadFormCtx, alpha: &ShiftVector, p_max: u64) -> Result<ExpSumSeries> {
    let shells = lattice::bucket_shells(ctx, alpha, p_max)?;
    Ok(ExpSumSeries::from_shells(ctx, alpha, shells))
}

/// One row of the normalized mean-square trace.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct TraceRow {
    pub n_checkpoint: u64,
    /// R(N) / N^{n/2}.
    pub ratio: f64,
    /// The limit value |E^M|.
    pub target: f64,
}

/// Emit R(N)/N^{n/2} at the given checkpoints, against the target |E^M|.
pub fn mean_square_trace(
    series: &ExpSumSeries,
    ctx: &QuadFormCtx,
    checkpoints: &[u64],
) -> Result<Vec<TraceRow>> {
    checkpoints
        .iter()
        .map(|&ncp| {
            if ncp < 1 || ncp > series.p_max {
                return Err(Error::CheckpointOutOfRange {
                    n: ncp,
                    p_max: series.p_max,
                });
            }
            Ok(TraceRow {
                n_checkpoint: ncp,
                ratio: series.r_cum_at(ncp) / (ncp as f64).powf(ctx.n as f64 / 2.0),
                target: ctx.volume,
            })
        })
        .collect()
}

/// Variance series 𝔄 = (detM)^{(n−1)/2} Σ_{p≤P} |r[M̂,α](p)|² p^{−(n+1)/2}
/// plus a dyadic tail heuristic.
///
/// `adj_series` must be the series for the *adjugate* form M̂; `ctx` is the
/// original form M (supplying detM and n).
pub fn variance_series(
    ctx: &QuadFormCtx,
    adj_series: &ExpSumSeries,
    p_trunc: u64,
) -> Result<(f64, f64)> {
    if p_trunc < 1 || p_trunc > adj_series.p_max {
        return Err(Error::CheckpointOutOfRange {
            n: p_trunc,
            p_max: adj_series.p_max,
        });
    }
    let n = ctx.n as f64;
    let det_pow = (ctx.det as f64).powf((n - 1.0) / 2.0);
    let expo = -(n + 1.0) / 2.0;
    let mut acc = Dd::ZERO;
    for p in 1..=p_trunc {
        let term = adj_series.r_at(p).norm_sqr() * (p as f64).powf(expo);
        acc = acc.add(Dd::from_f64(term));
    }
    let a_value = det_pow * acc.to_f64();

    // Tail heuristic: per dyadic block [2^k, 2^{k+1}), the block sum of
    // |r|² p^{−(n+1)/2} should be ≲ C·(block start)^{−1/2}; take the
    // empirical max C over complete blocks and charge C·P^{−1/2} for the tail.
    let mut c_emp = 0.0f64;
    let mut k = 0u32;
    loop {
        let start = 1u64 << k;
        let end = (start << 1).min(p_trunc + 1);
        if start > p_trunc {
            break;
        }
        let mut block = 0.0;
        for p in start..end {
            block += det_pow * adj_series.r_at(p).norm_sqr() * (p as f64).powf(expo);
        }
        c_emp = c_emp.max(block * (start as f64).sqrt());
        k += 1;
    }
    let tail_bound = c_emp / (p_trunc as f64).sqrt();
    Ok((a_value, tail_bound))
}

/// Dyadic-block decay report for Σ |r(p)|² p^{−b}.
#[derive(Clone, Debug, Serialize)]
pub struct AbelReport {
    pub b: f64,
    /// Fitted C = max_k block_sum_k / 2^{k(n/2−b)}.
    pub fitted_c: f64,
    /// (block start, block sum) pairs.
    pub blocks: Vec<(u64, f64)>,
}

/// Verify the Abel-summation decay profile over dyadic blocks.
pub fn abel_block_check(series: &ExpSumSeries, b: f64) -> AbelReport {
    let n = series.n as f64;
    let mut blocks = Vec::new();
    let mut fitted_c = 0.0f64;
    let mut k = 0u32;
    loop {
        let start = 1u64 << k;
        if start > series.p_max {
            break;
        }
        let end = (start << 1).min(series.p_max + 1);
        let mut sum = 0.0;
        for p in start..end {
            sum += series.r_at(p).norm_sqr() * (p as f64).powf(-b);
        }
        blocks.push((start, sum));
        let scale = (start as f64).powf(n / 2.0 - b);
        if scale > 0.0 {
            fitted_c = fitted_c.max(sum / scale);
        }
        k += 1;
    }
    AbelReport {
        b,
        fitted_c,
        blocks,
    }
}
