//! Smooth averaging operator ⟨f⟩_T = ∫ f(t)·μ(t/T)/T dt and the statistics
//! built on it: means and variances of the deviation functionals, the
//! closed-form average of the step count, and the diagonal shell-variance
//! diagnostic.

use crate::counting::{DeviationEvaluator, Mollifier};
use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::expsums::ExpSumSeries;
use crate::lattice::RadiiMultiset;
use crate::numeric::{composite_gl8, GL4_W, GL4_X, GL8_W, GL8_X};
use crate::quadform::QuadFormCtx;
use serde::Serialize;

const CDF_GRID: usize = 4096;
const MAX_MOMENT: usize = 12;

/// Smooth compactly supported probability density on [c0, c1] ⊂ (0, ∞),
/// with cached CDF and moments.
#[derive(Clone, Debug)]
pub struct AveragingKernel {
    pub c0: f64,
    pub c1: f64,
    /// multiplicative normalization applied to the raw bump
    norm: f64,
    /// CDF samples at c0 + i·(c1−c0)/CDF_GRID
    cdf_grid: Vec<f64>,
    /// ∫ s^k μ(s) ds for k = 0..=MAX_MOMENT
    moments: Vec<f64>,
}

fn raw_bump(c0: f64, c1: f64, s: f64) -> f64 {
    // exp(−1/(1−x²)) with x mapping [c0,c1] → [−1,1]
    let x = (2.0 * s - (c0 + c1)) / (c1 - c0);
    if x.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - x * x)).exp()
    }
}

impl AveragingKernel {
    /// The default kernel: the standard bump recentered to [1, 2].
    pub fn bump() -> AveragingKernel {
        AveragingKernel::bump_on(1.0, 2.0)
    }

    pub fn bump_on(c0: f64, c1: f64) -> AveragingKernel {
        assert!(c0 > 0.0 && c1 > c0, "support must lie in (0, ∞)");
        let mass = composite_gl8(&|s| raw_bump(c0, c1, s), c0, c1, 64);
        let norm = 1.0 / mass;
        let h = (c1 - c0) / CDF_GRID as f64;
        let mut cdf_grid = Vec::with_capacity(CDF_GRID + 1);
        let mut acc = Dd::ZERO;
        cdf_grid.push(0.0);
        for i in 0..CDF_GRID {
            let a = c0 + i as f64 * h;
            let cell = composite_gl8(&|s| norm * raw_bump(c0, c1, s), a, a + h, 1);
            acc = acc.add(Dd::from_f64(cell));
            cdf_grid.push(acc.to_f64());
        }
        // pin the endpoint so cdf(c1) = 1 exactly
        let total = *cdf_grid.last().unwrap();
        debug_assert!((total - 1.0).abs() < 1e-12);
        for v in cdf_grid.iter_mut() {
            *v /= total;
        }
        let moments = (0..=MAX_MOMENT)
            .map(|k| composite_gl8(&|s| norm / total * raw_bump(c0, c1, s) * s.powi(k as i32), c0, c1, 64))
            .collect();
        AveragingKernel {
            c0,
            c1,
            norm: norm / total,
            cdf_grid,
            moments,
        }
    }

    /// μ(s); zero outside the support.
    pub fn density(&self, s: f64) -> f64 {
        self.norm * raw_bump(self.c0, self.c1, s)
    }

    /// ∫_{c0}^{s} μ; cubic Hermite interpolation of the cached grid with
    /// exact slopes μ at the nodes (error O(h⁴) ≈ 1e−14 here).
    pub fn cdf(&self, s: f64) -> f64 {
        if s <= self.c0 {
            return 0.0;
        }
        if s >= self.c1 {
            return 1.0;
        }
        let h = (self.c1 - self.c0) / CDF_GRID as f64;
        let x = (s - self.c0) / h;
        let i = (x.floor() as usize).min(CDF_GRID - 1);
        let u = x - i as f64;
        let (y0, y1) = (self.cdf_grid[i], self.cdf_grid[i + 1]);
        let s0 = self.c0 + i as f64 * h;
        let (d0, d1) = (self.density(s0) * h, self.density(s0 + h) * h);
        let h00 = (1.0 + 2.0 * u) * (1.0 - u) * (1.0 - u);
        let h10 = u * (1.0 - u) * (1.0 - u);
        let h01 = u * u * (3.0 - 2.0 * u);
        let h11 = u * u * (u - 1.0);
        h00 * y0 + h10 * d0 + h01 * y1 + h11 * d1
    }

    /// Inverse CDF by bisection; cdf(inv_cdf(q)) = q to ~1e−15.
    pub fn inv_cdf(&self, q: f64) -> f64 {
        assert!((0.0..=1.0).contains(&q));
        let (mut lo, mut hi) = (self.c0, self.c1);
        for _ in 0..70 {
            let mid = 0.5 * (lo + hi);
            if self.cdf(mid) < q {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// k-th moment ∫ s^k μ(s) ds, k ≤ 12.
    pub fn moment(&self, k: usize) -> f64 {
        self.moments[k]
    }
}

/// Result of one smoothed average, with the quadrature error estimate.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct AverageResult {
    pub t_scale: f64,
    pub value: f64,
    /// Summed Gauss-rule residual estimates (8-point vs embedded 4-point).
    pub est_error: f64,
    /// Number of integrand breakpoints inside the averaging window.
    pub breakpoint_count: u64,
}

/// Average several integrands in one sweep. `f(t, out)` must fill `out`
/// (length `k`) with the integrand values at `t`; the integrands must be
/// smooth between consecutive `breakpoints` (sorted ascending). Integration
/// is event-driven: exact on each sub-interval up to the Gauss-rule error,
/// accumulated in order (deterministic).
pub fn average_piecewise_multi<F: Fn(f64, &mut [f64])>(
    f: &F,
    k: usize,
    breakpoints: &[f64],
    t_scale: f64,
    kernel: &AveragingKernel,
) -> Vec<AverageResult> {
    let lo = kernel.c0 * t_scale;
    let hi = kernel.c1 * t_scale;
    let i0 = breakpoints.partition_point(|&r| r <= lo);
    let i1 = breakpoints.partition_point(|&r| r < hi);
    let mut vals = vec![Dd::ZERO; k];
    let mut errs = vec![0.0f64; k];
    let mut buf = vec![0.0f64; k];
    let mut g8 = vec![0.0f64; k];
    let mut g4 = vec![0.0f64; k];
    let mut a = lo;
    let mut idx = i0;
    loop {
        let b = if idx < i1 { breakpoints[idx] } else { hi };
        if b > a {
            // cap the panel width so the kernel itself is always resolved,
            // even when the integrand has few or no breakpoints
            let h_max = (kernel.c1 - kernel.c0) * t_scale / 256.0;
            let panels = ((b - a) / h_max).ceil().max(1.0) as usize;
            let w_panel = (b - a) / panels as f64;
            for s in 0..panels {
                let pa = a + s as f64 * w_panel;
                let c = pa + 0.5 * w_panel;
                let r = 0.5 * w_panel;
                for v in g8.iter_mut() {
                    *v = 0.0;
                }
                for v in g4.iter_mut() {
                    *v = 0.0;
                }
                for (x, w) in GL8_X.iter().zip(GL8_W.iter()) {
                    let t = c + r * x;
                    let mu = kernel.density(t / t_scale) / t_scale;
                    f(t, &mut buf);
                    for (gi, bi) in g8.iter_mut().zip(buf.iter()) {
                        *gi += w * mu * bi;
                    }
                }
                for (x, w) in GL4_X.iter().zip(GL4_W.iter()) {
                    let t = c + r * x;
                    let mu = kernel.density(t / t_scale) / t_scale;
                    f(t, &mut buf);
                    for (gi, bi) in g4.iter_mut().zip(buf.iter()) {
                        *gi += w * mu * bi;
                    }
                }
                for j in 0..k {
                    vals[j] = vals[j].add(Dd::from_f64(r * g8[j]));
                    errs[j] += (r * (g8[j] - g4[j])).abs();
                }
            }
        }
        if idx >= i1 {
            break;
        }
        a = a.max(b);
        idx += 1;
    }
    (0..k)
        .map(|j| AverageResult {
            t_scale,
            value: vals[j].to_f64(),
            est_error: errs[j],
            breakpoint_count: (i1 - i0) as u64,
        })
        .collect()
}

/// Single-integrand convenience wrapper.
pub fn average_piecewise<F: Fn(f64) -> f64>(
    f: &F,
    breakpoints: &[f64],
    t_scale: f64,
    kernel: &AveragingKernel,
) -> AverageResult {
    average_piecewise_multi(&|t, out: &mut [f64]| out[0] = f(t), 1, breakpoints, t_scale, kernel)
        .pop()
        .unwrap()
}

fn check_support(r_max: f64, t_scale: f64, kernel: &AveragingKernel, headroom: f64) -> Result<()> {
    let hi = kernel.c1 * t_scale + headroom;
    if hi > r_max {
        return Err(Error::SupportExceedsRadii {
            lo: kernel.c0 * t_scale,
            hi,
            r_max,
        });
    }
    Ok(())
}

/// ⟨F⟩_T and ⟨F²⟩_T in one sweep.
pub fn mean_var_f(
    ev: &DeviationEvaluator,
    t_scale: f64,
    kernel: &AveragingKernel,
) -> Result<(AverageResult, AverageResult)> {
    check_support(ev.rm.r_max, t_scale, kernel, 0.0)?;
    let f = |t: f64, out: &mut [f64]| {
        let v = crate::lattice::count_upto(ev.rm, t).expect("t inside support") as f64;
        let n = ev.n as f64;
        let fv = (v - ev.volume * t.powf(n)) / t.powf((n - 1.0) / 2.0);
        out[0] = fv;
        out[1] = fv * fv;
    };
    let mut res = average_piecewise_multi(&f, 2, &ev.rm.radii, t_scale, kernel);
    let var = res.pop().unwrap();
    let mean = res.pop().unwrap();
    Ok((mean, var))
}

/// ⟨S(·,ε)⟩_T and ⟨|S(·,ε)|²⟩_T in one sweep; breakpoints are the radii and
/// the radii shifted down by ε (each r enters the shell statistic at t = r−ε
/// and leaves at t = r).
pub fn mean_var_s(
    ev: &DeviationEvaluator,
    t_scale: f64,
    eps: f64,
    kernel: &AveragingKernel,
) -> Result<(AverageResult, AverageResult)> {
    if eps <= 0.0 {
        return Err(Error::NonpositiveEps { eps });
    }
    check_support(ev.rm.r_max, t_scale, kernel, eps)?;
    let lo = kernel.c0 * t_scale;
    let hi = kernel.c1 * t_scale;
    let mut bps: Vec<f64> = ev
        .rm
        .radii
        .iter()
        .flat_map(|&r| [r, r - eps])
        .filter(|&b| b > lo && b < hi)
        .collect();
    bps.sort_unstable_by(f64::total_cmp);
    let f = |t: f64, out: &mut [f64]| {
        let sv = ev.s(t, eps).expect("t inside support");
        out[0] = sv;
        out[1] = sv * sv;
    };
    let mut res = average_piecewise_multi(&f, 2, &bps, t_scale, kernel);
    let var = res.pop().unwrap();
    let mean = res.pop().unwrap();
    Ok((mean, var))
}

/// ⟨N⟩_T by the closed form Σ_j (1 − CDF(r_j / T)) over the radii multiset.
pub fn mean_count_closed(
    rm: &RadiiMultiset,
    t_scale: f64,
    kernel: &AveragingKernel,
) -> Result<AverageResult> {
    check_support(rm.r_max, t_scale, kernel, 0.0)?;
    let lo = kernel.c0 * t_scale;
    let hi = kernel.c1 * t_scale;
    let below = rm.radii.partition_point(|&r| r <= lo);
    let i1 = rm.radii.partition_point(|&r| r < hi);
    let mut acc = Dd::from_i64(below as i64);
    for &r in &rm.radii[below..i1] {
        acc = acc.add(Dd::from_f64(1.0 - kernel.cdf(r / t_scale)));
    }
    Ok(AverageResult {
        t_scale,
        value: acc.to_f64(),
        est_error: 1e-13 * i1 as f64,
        breakpoint_count: (i1 - below) as u64,
    })
}

/// Variance target 𝔄/(2π²) from the adjugate series (see
/// `expsums::variance_series`); returns (target, tail bound on the target).
pub fn variance_target(
    ctx: &QuadFormCtx,
    adj_series: &ExpSumSeries,
    p_trunc: u64,
) -> Result<(f64, f64)> {
    let (a, tail) = crate::expsums::variance_series(ctx, adj_series, p_trunc)?;
    let c = 2.0 * std::f64::consts::PI * std::f64::consts::PI;
    Ok((a / c, tail / c))
}

/// Diagonal part of the mollified shell variance:
/// S^D(ε,K) = (2(detM)^{(n−1)/2}/(επ²)) Σ_{p≤⌊K^{2+ζ}⌋}
///            sin²(πε√p/√detM)·|r[M̂,α](p)|²·p^{−(n+1)/2}·φ̂(√p/(K√detM))².
pub fn diag_shell_variance(
    ctx: &QuadFormCtx,
    adj_series: &ExpSumSeries,
    eps: f64,
    k: f64,
    zeta: f64,
    mollifier: &Mollifier,
) -> Result<f64> {
    if eps <= 0.0 {
        return Err(Error::NonpositiveEps { eps });
    }
    let p_cut = k.powf(2.0 + zeta).floor() as u64;
    if p_cut > adj_series.p_max {
        return Err(Error::TruncationExceedsSeries {
            p_cut,
            p_max: adj_series.p_max,
        });
    }
    let n = ctx.n as f64;
    let det = ctx.det as f64;
    let sqrt_det = det.sqrt();
    let pi = std::f64::consts::PI;
    let mut acc = Dd::ZERO;
    for p in 1..=p_cut {
        let r2 = adj_series.r_at(p).norm_sqr();
        if r2 == 0.0 {
            continue;
        }
        let sp = (p as f64).sqrt();
        let hat = mollifier.hat(sp / (k * sqrt_det));
        let term = (pi * eps * sp / sqrt_det).sin().powi(2)
            * r2
            * (p as f64).powf(-(n + 1.0) / 2.0)
            * hat
            * hat;
        acc = acc.add(Dd::from_f64(term));
    }
    Ok(2.0 * det.powf((n - 1.0) / 2.0) / (eps * pi * pi) * acc.to_f64())
}

/// Shell block sum Σ_{N1 ≤ ε²p < N2} εⁿ|r[M,α](p)|² and its small-ε limit
/// |E^M|(N2^{n/2} − N1^{n/2}). `series` is for the form M itself.
pub fn shell_block(
    ctx: &QuadFormCtx,
    series: &ExpSumSeries,
    eps: f64,
    n1: f64,
    n2: f64,
) -> Result<(f64, f64)> {
    if eps <= 0.0 {
        return Err(Error::NonpositiveEps { eps });
    }
    assert!(0.0 <= n1 && n1 < n2);
    let p_hi = (n2 / (eps * eps)).ceil() as u64;
    if p_hi > series.p_max {
        return Err(Error::CheckpointOutOfRange {
            n: p_hi,
            p_max: series.p_max,
        });
    }
    let n = ctx.n as f64;
    let scale = eps.powf(n);
    let mut acc = Dd::ZERO;
    for p in 1..=series.p_max {
        let x = eps * eps * p as f64;
        if x < n1 {
            continue;
        }
        if x >= n2 {
            break;
        }
        acc = acc.add(Dd::from_f64(scale * series.r_at(p).norm_sqr()));
    }
    let target = ctx.volume * (n2.powf(n / 2.0) - n1.powf(n / 2.0));
    Ok((acc.to_f64(), target))
}

/// Stratified-quantile approximation of ⟨f⟩_T: the exact identity
/// ⟨f⟩_T = ∫₀¹ f(T·CDF⁻¹(q)) dq evaluated by the midpoint rule on
/// `samples` equal quantile strata. Suitable for integrands too oscillatory
/// for the event-driven path.
pub fn sampled_average<F: Fn(f64) -> f64>(
    f: &F,
    t_scale: f64,
    kernel: &AveragingKernel,
    samples: usize,
) -> f64 {
    assert!(samples > 0);
    let mut acc = Dd::ZERO;
    for i in 0..samples {
        let q = (i as f64 + 0.5) / samples as f64;
        acc = acc.add(Dd::from_f64(f(t_scale * kernel.inv_cdf(q))));
    }
    acc.to_f64() / samples as f64
}
