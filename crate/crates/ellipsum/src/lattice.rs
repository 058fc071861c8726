//! Ellipsoid lattice-point enumeration (Fincke–Pohst style recursive
//! descent on the Cholesky-triangular coordinates) and the two derived
//! stores: sorted radii multisets and per-shell exponential-sum buckets.
//!
//! Floating point only *guides* the search; membership is always settled
//! exactly — integer arithmetic when the center is zero, double-double
//! radii otherwise. Parallel builds split the outermost coordinate into a
//! fixed number of chunks and merge worker output in chunk order, so the
//! result is bit-identical for any worker count (and equal to the serial
//! traversal order).

use crate::dd::Dd;
use crate::diophantine::ShiftVector;
use crate::error::{Error, Result};
use crate::quadform::QuadFormCtx;
use num_complex::Complex64;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

/// Default cap on the estimated point count volume·Rⁿ.
pub const DEFAULT_BUDGET_CAP: f64 = 5e8;

/// Number of outer-coordinate chunks for parallel builds. Fixed (never
/// derived from the worker count) so that output is scheduling-independent.
const OUTER_CHUNKS: usize = 64;

/// Sorted multiset of elliptic radii |m − α|_M for all lattice points with
/// radius ≤ R_max.
#[derive(Clone, Debug, PartialEq)]
pub struct RadiiMultiset {
    /// Digest of (M, α spec, R_max) identifying the build inputs.
    pub ctx_digest: [u8; 32],
    pub r_max: f64,
    /// Ascending radii, binary64 roundings of double-double values.
    pub radii: Vec<f64>,
    pub count: u64,
}

/// Shell-indexed accumulators: counts[p−1] = r[M,0](p) and
/// sums[p−1] = Σ_{Q_M(m)=p} e(m·α), p ∈ [1, p_max].
#[derive(Clone, Debug, PartialEq)]
pub struct ShellBuckets {
    pub p_max: u64,
    pub sums: Vec<Complex64>,
    pub counts: Vec<u32>,
}

impl ShellBuckets {
    #[inline]
    pub fn sum(&self, p: u64) -> Complex64 {
        self.sums[(p - 1) as usize]
    }

    #[inline]
    pub fn count(&self, p: u64) -> u32 {
        self.counts[(p - 1) as usize]
    }
}

/// Exact Q-value reported to enumeration visitors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum QVal {
    /// Center 0: exact integer Q_M(m).
    Int(i128),
    /// Shifted center: binary64 rounding of the double-double Q_M(m−α).
    Real(f64),
}

/// Digest identifying (matrix, shift spec, bound) for caches and stores.
pub fn build_digest(ctx: &QuadFormCtx, alpha_spec: &str, bound: f64) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update((ctx.n as u64).to_le_bytes());
    for &e in &ctx.m {
        h.update(e.to_le_bytes());
    }
    h.update((alpha_spec.len() as u64).to_le_bytes());
    h.update(alpha_spec.as_bytes());
    h.update(bound.to_le_bytes());
    h.finalize().into()
}

fn budget_check(ctx: &QuadFormCtx, r: f64, cap: f64) -> Result<()> {
    let estimate = ctx.volume * r.powi(ctx.n as i32);
    if estimate > cap {
        return Err(Error::BudgetExceeded { estimate, cap });
    }
    Ok(())
}

/// Candidate generator: walks the pruned search tree and yields every
/// integer vector whose floating-point radius is within the guard band;
/// callers apply the exact membership test.
struct EnumCore<'a> {
    n: usize,
    /// Upper-triangular factor R = Lᵀ (row-major full matrix; entries
    /// below the diagonal unused).
    rfac: Vec<f64>,
    center: Vec<f64>,
    /// Inflated squared radius for pruning (guard band included).
    bound_sq: f64,
    /// Inclusive outer-coordinate range for this worker.
    outer: (i64, i64),
    _marker: std::marker::PhantomData<&'a ()>,
}

impl<'a> EnumCore<'a> {
    fn new(ctx: &'a QuadFormCtx, center: &[f64], r: f64, outer: (i64, i64)) -> EnumCore<'a> {
        let n = ctx.n;
        let mut rfac = vec![0f64; n * n];
        for i in 0..n {
            for j in i..n {
                rfac[i * n + j] = ctx.chol[j * n + i];
            }
        }
        // Guard band 1e−9 on the radius plus absolute/relative float slack;
        // overshoot candidates are culled by the exact test.
        let r_guard = r + 1e-9;
        let bound_sq = r_guard * r_guard * (1.0 + 1e-12) + 1e-9;
        EnumCore {
            n,
            rfac,
            center: center.to_vec(),
            bound_sq,
            outer,
            _marker: std::marker::PhantomData,
        }
    }

    /// Full outer range for the given radius (used to define chunking).
    fn outer_range(ctx: &QuadFormCtx, center: &[f64], r: f64) -> (i64, i64) {
        let n = ctx.n;
        let rii = ctx.chol[(n - 1) * n + (n - 1)];
        let half = (r + 1e-9) / rii + 1e-9;
        let c = center[n - 1];
        (((c - half).ceil() - 1.0) as i64, ((c + half).floor() + 1.0) as i64)
    }

    fn run<F: FnMut(&[i64])>(&self, visit: &mut F) {
        let mut xs = vec![0i64; self.n];
        self.descend(self.n - 1, 0.0, &mut xs, visit);
    }

    fn descend<F: FnMut(&[i64])>(&self, level: usize, partial: f64, xs: &mut [i64], visit: &mut F) {
        let n = self.n;
        let rem = self.bound_sq - partial;
        if rem < 0.0 {
            return;
        }
        let b = rem.sqrt();
        let rii = self.rfac[level * n + level];
        let mut s = 0.0;
        for j in level + 1..n {
            s += self.rfac[level * n + j] * (xs[j] as f64 - self.center[j]);
        }
        let c = self.center[level];
        let mut lo = (c + (-b - s) / rii - 1e-9).ceil() as i64;
        let mut hi = (c + (b - s) / rii + 1e-9).floor() as i64;
        if level == n - 1 {
            lo = lo.max(self.outer.0);
            hi = hi.min(self.outer.1);
        }
        for x in lo..=hi {
            let y = rii * (x as f64 - c) + s;
            let next = partial + y * y;
            xs[level] = x;
            if level == 0 {
                if next <= self.bound_sq {
                    visit(xs);
                }
            } else {
                self.descend(level - 1, next, xs, visit);
            }
        }
    }
}

fn chunk_ranges(lo: i64, hi: i64) -> Vec<(i64, i64)> {
    if hi < lo {
        return vec![];
    }
    let len = (hi - lo + 1) as usize;
    let chunks = OUTER_CHUNKS.min(len);
    let base = len / chunks;
    let extra = len % chunks;
    let mut out = Vec::with_capacity(chunks);
    let mut start = lo;
    for i in 0..chunks {
        let sz = base + usize::from(i < extra);
        out.push((start, start + sz as i64 - 1));
        start += sz as i64;
    }
    out
}

/// Exact squared radius Q_M(m − α) in double-double.
fn shifted_qval(ctx: &QuadFormCtx, alpha: &ShiftVector, m: &[i64]) -> Dd {
    let n = ctx.n;
    let d: Vec<Dd> = (0..n)
        .map(|i| Dd::from_i64(m[i]).sub(alpha.comps[i]))
        .collect();
    let mut q = Dd::ZERO;
    for i in 0..n {
        q = q.add(d[i].mul(d[i]).mul(Dd::from_i64(ctx.m[i * n + i])));
        for j in i + 1..n {
            let cross = d[i].mul(d[j]).mul(Dd::from_i64(2 * ctx.m[i * n + j]));
            q = q.add(cross);
        }
    }
    q
}

/// Visit every integer vector m with Q_M(m − center) ≤ R², exactly once,
/// in deterministic lexicographic traversal order of the triangular
/// recursion. Returns the count.
pub fn enumerate<F: FnMut(&[i64], QVal)>(
    ctx: &QuadFormCtx,
    center: Option<&ShiftVector>,
    r: f64,
    mut visit: F,
) -> Result<u64> {
    assert!(r > 0.0, "radius must be positive");
    budget_check(ctx, r, DEFAULT_BUDGET_CAP)?;
    let c: Vec<f64> = match center {
        Some(a) => {
            if a.n != ctx.n {
                return Err(Error::DimensionMismatch {
                    expected: ctx.n,
                    got: a.n,
                });
            }
            a.comps.iter().map(|v| v.to_f64()).collect()
        }
        None => vec![0.0; ctx.n],
    };
    let rr = Dd::from_f64(r).mul(Dd::from_f64(r));
    let outer = EnumCore::outer_range(ctx, &c, r);
    let core = EnumCore::new(ctx, &c, r, outer);
    let mut count = 0u64;
    match center {
        None => core.run(&mut |m: &[i64]| {
            let q = ctx.qform_int(m).expect("dimension validated");
            if Dd::from_i128(q).le(rr) {
                count += 1;
                visit(m, QVal::Int(q));
            }
        }),
        Some(alpha) => core.run(&mut |m: &[i64]| {
            let q = shifted_qval(ctx, alpha, m);
            if q.le(rr) {
                count += 1;
                visit(m, QVal::Real(q.to_f64()));
            }
        }),
    }
    Ok(count)
}

/// Build the sorted radii multiset for radius bound `r_max`.
///
/// Parallel over fixed outer-coordinate chunks; each chunk emits radii in
/// traversal order and the merge concatenates chunks in order before the
/// final sort, so output is identical to a serial build.
pub fn build_radii(ctx: &QuadFormCtx, alpha: &ShiftVector, r_max: f64) -> Result<RadiiMultiset> {
    assert!(r_max > 0.0);
    if alpha.n != ctx.n {
        return Err(Error::DimensionMismatch {
            expected: ctx.n,
            got: alpha.n,
        });
    }
    budget_check(ctx, r_max, DEFAULT_BUDGET_CAP)?;
    let c: Vec<f64> = alpha.comps.iter().map(|v| v.to_f64()).collect();
    let outer = EnumCore::outer_range(ctx, &c, r_max);
    let chunks = chunk_ranges(outer.0, outer.1);
    let rr = Dd::from_f64(r_max).mul(Dd::from_f64(r_max));
    let per_chunk: Vec<Vec<f64>> = chunks
        .par_iter()
        .map(|&range| {
            let core = EnumCore::new(ctx, &c, r_max, range);
            let mut out = Vec::new();
            core.run(&mut |m: &[i64]| {
                let q = shifted_qval(ctx, alpha, m);
                if q.le(rr) {
                    out.push(q.sqrt().to_f64());
                }
            });
            out
        })
        .collect();
    let mut radii: Vec<f64> = per_chunk.into_iter().flatten().collect();
    radii.sort_unstable_by(f64::total_cmp);
    let count = radii.len() as u64;
    Ok(RadiiMultiset {
        ctx_digest: build_digest(ctx, &alpha.spec, r_max),
        r_max,
        radii,
        count,
    })
}

/// Number of radii ≤ t (closed ball).
pub fn count_upto(rm: &RadiiMultiset, t: f64) -> Result<u64> {
    if !(0.0..=rm.r_max).contains(&t) {
        return Err(Error::RadiusOutOfRange {
            t,
            r_max: rm.r_max,
        });
    }
    Ok(rm.radii.partition_point(|&r| r <= t) as u64)
}

fn bucket_shells_impl(
    ctx: &QuadFormCtx,
    alpha: &ShiftVector,
    p_max: u64,
    parallel: bool,
) -> Result<ShellBuckets> {
    assert!(p_max >= 1);
    if alpha.n != ctx.n {
        return Err(Error::DimensionMismatch {
            expected: ctx.n,
            got: alpha.n,
        });
    }
    let r = (p_max as f64).sqrt();
    budget_check(ctx, r, DEFAULT_BUDGET_CAP)?;
    let zero_alpha = alpha.is_zero();
    let c = vec![0.0; ctx.n];
    let outer = EnumCore::outer_range(ctx, &c, r);
    let chunks = chunk_ranges(outer.0, outer.1);

    let worker = |&range: &(i64, i64)| -> Vec<(u32, f64, f64)> {
        let core = EnumCore::new(ctx, &c, r, range);
        let mut out = Vec::new();
        core.run(&mut |m: &[i64]| {
            let q = ctx.qform_int(m).expect("dimension validated");
            if q >= 1 && q <= p_max as i128 {
                let (re, im) = if zero_alpha {
                    (1.0, 0.0)
                } else {
                    // e(m·α) = exp(−2πi m·α); reduce the phase mod 1 in
                    // double-double before trig evaluation
                    let mut dot = Dd::ZERO;
                    for i in 0..ctx.n {
                        dot = dot.add(Dd::from_i64(m[i]).mul(alpha.comps[i]));
                    }
                    let frac = dot.fract_centered().to_f64();
                    let theta = -2.0 * std::f64::consts::PI * frac;
                    (theta.cos(), theta.sin())
                };
                out.push((q as u32, re, im));
            }
        });
        out
    };

    let per_chunk: Vec<Vec<(u32, f64, f64)>> = if parallel {
        chunks.par_iter().map(worker).collect()
    } else {
        chunks.iter().map(worker).collect()
    };

    let mut sums = vec![Complex64::new(0.0, 0.0); p_max as usize];
    let mut counts = vec![0u32; p_max as usize];
    for chunk in per_chunk {
        for (p, re, im) in chunk {
            let idx = (p - 1) as usize;
            sums[idx] += Complex64::new(re, im);
            counts[idx] += 1;
        }
    }
    Ok(ShellBuckets {
        p_max,
        sums,
        counts,
    })
}

/// Accumulate e(m·α) over exact integer shells Q_M(m) = p ≤ p_max.
pub fn bucket_shells(ctx: &QuadFormCtx, alpha: &ShiftVector, p_max: u64) -> Result<ShellBuckets> {
    bucket_shells_impl(ctx, alpha, p_max, true)
}

/// Serial reference build (identical output; used by determinism checks).
pub fn bucket_shells_serial(
    ctx: &QuadFormCtx,
    alpha: &ShiftVector,
    p_max: u64,
) -> Result<ShellBuckets> {
    bucket_shells_impl(ctx, alpha, p_max, false)
}

/// Brute-force reference enumeration over the bounding box
/// |x_i − c_i| ≤ R·√(adj_ii/det). Exact; O(Rⁿ) — test oracle only.
pub fn box_scan_points(
    ctx: &QuadFormCtx,
    center: Option<&ShiftVector>,
    r: f64,
) -> Vec<Vec<i64>> {
    let n = ctx.n;
    let c: Vec<f64> = match center {
        Some(a) => a.comps.iter().map(|v| v.to_f64()).collect(),
        None => vec![0.0; n],
    };
    let rr = Dd::from_f64(r).mul(Dd::from_f64(r));
    let mut ranges = Vec::with_capacity(n);
    for i in 0..n {
        let half = r * (ctx.adj[i * n + i] as f64 / ctx.det as f64).sqrt() + 1.0;
        ranges.push(((c[i] - half).floor() as i64, (c[i] + half).ceil() as i64));
    }
    let mut out = Vec::new();
    let mut xs = vec![0i64; n];
    fn rec(
        ctx: &QuadFormCtx,
        center: Option<&ShiftVector>,
        rr: Dd,
        ranges: &[(i64, i64)],
        level: usize,
        xs: &mut Vec<i64>,
        out: &mut Vec<Vec<i64>>,
    ) {
        if level == ctx.n {
            let inside = match center {
                None => {
                    let q = ctx.qform_int(xs).unwrap();
                    Dd::from_i128(q).le(rr)
                }
                Some(a) => shifted_qval(ctx, a, xs).le(rr),
            };
            if inside {
                out.push(xs.clone());
            }
            return;
        }
        for x in ranges[level].0..=ranges[level].1 {
            xs[level] = x;
            rec(ctx, center, rr, ranges, level + 1, xs, out);
        }
    }
    rec(ctx, center, rr, &ranges, 0, &mut xs, &mut out);
    out
}
