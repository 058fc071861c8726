//! Jacobi theta sums in Iwasawa coordinates, generator actions with their
//! metaplectic phases, and the exact mean-square identities connecting
//! |Θ_f|² to the exponential-sum series.
//!
//! Convention: e(s) = exp(−2πis) throughout, matching the exponential-sum
//! modules. The theta sum is
//!   Θ_f(z,φ;ξ,t) = (v₁⋯v_n)^{1/4} e(−t + x·y/2)
//!                  Σ_m f_φ((m−y)√v) e(−½Σ(m_k−y_k)²u_k − m·x),
//! with f_φ the metaplectic rotation of f by angles φ. For the standard
//! Gaussian the rotation is the pure phase ∏_k e^{−iφ_k/2}.

use crate::dd::Dd;
use crate::diophantine::ShiftVector;
use crate::error::{Error, Result};
use crate::expsums::rep_sums;
use crate::numeric::smooth_step;
use crate::quadform::{build_ctx, unit_ball_volume, QuadFormCtx};
use num_complex::Complex64;
use serde::Serialize;
use std::collections::BTreeMap;
use std::f64::consts::PI;

const PAIR_BUDGET: f64 = 2e8;

/// e(s) = exp(−2πis), with the argument reduced mod 1 first.
#[inline]
pub fn e_of(s: f64) -> Complex64 {
    let th = -2.0 * PI * (s - s.round());
    Complex64::new(th.cos(), th.sin())
}

/// A point of the Jacobi group in Iwasawa coordinates.
#[derive(Clone, Debug)]
pub struct GroupPoint {
    pub n: usize,
    /// z_k = u_k + i v_k with v_k > 0.
    pub z: Vec<(f64, f64)>,
    pub phi: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub t: f64,
}

impl GroupPoint {
    pub fn base(n: usize) -> GroupPoint {
        GroupPoint {
            n,
            z: vec![(0.0, 1.0); n],
            phi: vec![0.0; n],
            x: vec![0.0; n],
            y: vec![0.0; n],
            t: 0.0,
        }
    }

    fn validate(&self) {
        assert_eq!(self.z.len(), self.n);
        assert!(self.z.iter().all(|&(_, v)| v > 0.0), "all v_k must be > 0");
    }
}

/// Radial profile f(w) = value(|w|²).
#[derive(Clone, Debug)]
pub enum ThetaProfile {
    /// e^{−π|w|²/scale²}; rotation angles are supported only at scale = 1,
    /// where the metaplectic image is the same Gaussian times a phase.
    Gaussian { scale: f64 },
    /// ψ(|w|²) smoothly interpolating 1_{[0,1]}; the transition occupies
    /// [1−δ, 1+δ] with δ = 1/sharpness.
    RadialIndicatorApprox { sharpness: f64 },
    /// 1_{[0,1]}(|w|²): finite sums only (the box |w|² ≤ 1 is finite for
    /// any v > 0).
    ExactIndicator,
}

impl ThetaProfile {
    pub fn value(&self, r2: f64) -> f64 {
        match *self {
            ThetaProfile::Gaussian { scale } => (-PI * r2 / (scale * scale)).exp(),
            ThetaProfile::RadialIndicatorApprox { sharpness } => {
                psi_cutoff(r2, 1.0 / sharpness)
            }
            ThetaProfile::ExactIndicator => {
                if r2 <= 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Half-width of the support (or effective support) in |w|.
    fn w_bound(&self, lambda: f64) -> f64 {
        match *self {
            ThetaProfile::Gaussian { scale } => lambda * scale,
            ThetaProfile::RadialIndicatorApprox { sharpness } => (1.0 + 1.0 / sharpness).sqrt(),
            ThetaProfile::ExactIndicator => 1.0,
        }
    }
}

/// Smooth cutoff of [0,1]: 1 on [0, 1−δ], 0 on [1+δ, ∞), smooth in between.
pub fn psi_cutoff(r: f64, delta: f64) -> f64 {
    if r <= 1.0 - delta {
        1.0
    } else if r >= 1.0 + delta {
        0.0
    } else {
        smooth_step((1.0 + delta - r) / (2.0 * delta))
    }
}

/// σ_φ: 2ν if φ = νπ exactly, 2ν+1 if νπ < φ < (ν+1)π.
pub fn sigma_phi(phi: f64) -> i64 {
    let nu = (phi / PI).floor();
    if phi == nu * PI {
        2 * nu as i64
    } else {
        2 * nu as i64 + 1
    }
}

/// Phase of the metaplectic rotation of the standard Gaussian:
/// f_φ = (∏_k e^{−iφ_k/2})·f. Derived from the det C ≠ 0 branch of the
/// oscillatory-kernel representation together with the σ_φ normalization;
/// validated against direct quadrature (see `rotation_numeric` and tests).
pub fn gaussian_rotation_phase(phi: &[f64]) -> Complex64 {
    let half: f64 = phi.iter().sum::<f64>() / 2.0;
    Complex64::new(0.0, -half).exp()
}

/// One coordinate of R̃(i,φ) applied to the standard Gaussian, by direct
/// numerical quadrature of the metaplectic kernel (det C ≠ 0 branch):
/// R(φ)f(w) = |sinφ|^{−1/2} ∫ exp(iπ[cotφ(w²+w'²) − 2ww'/sinφ]) f(w') dw',
/// then multiplied by the e^{−iπσ_φ/4} normalization. Valid for φ ∉ πℤ.
pub fn rotation_numeric(phi: f64, w: f64) -> Complex64 {
    assert!(phi.rem_euclid(PI) != 0.0, "quadrature branch needs sin φ ≠ 0");
    let s = phi.sin();
    let cot = phi.cos() / s;
    let f = |wp: f64| -> Complex64 {
        let arg = PI * (cot * (w * w + wp * wp) - 2.0 * w * wp / s);
        Complex64::new(0.0, arg).exp() * (-PI * wp * wp).exp()
    };
    // composite GL8 on [−6, 6]: the Gaussian tail beyond is ~e^{−36π}
    let (a, b) = (-6.0f64, 6.0f64);
    let panels = 2048usize;
    let h = (b - a) / panels as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..panels {
        let c = a + (i as f64 + 0.5) * h;
        let r = 0.5 * h;
        for (x, wt) in crate::numeric::GL8_X.iter().zip(crate::numeric::GL8_W.iter()) {
            acc += f(c + r * x) * *wt * r;
        }
    }
    let norm = Complex64::new(0.0, -PI * sigma_phi(phi) as f64 / 4.0).exp();
    norm * acc / s.abs().sqrt()
}

/// Evaluate the theta sum with box truncation Λ (in units of the profile's
/// decay scale). Truncation error for the Gaussian is ≲ e^{−πΛ²}.
pub fn theta_sum(profile: &ThetaProfile, g: &GroupPoint, lambda: f64) -> Result<Complex64> {
    g.validate();
    if lambda < 8.0 {
        return Err(Error::TruncationTooSmall { lambda });
    }
    let rotated = g.phi.iter().any(|&p| p != 0.0);
    let f_phase = if rotated {
        match *profile {
            ThetaProfile::Gaussian { scale } if scale == 1.0 => gaussian_rotation_phase(&g.phi),
            _ => return Err(Error::PhiUnsupportedForProfile),
        }
    } else {
        Complex64::new(1.0, 0.0)
    };
    let mut lo = Vec::with_capacity(g.n);
    let mut hi = Vec::with_capacity(g.n);
    let mut est = 1.0f64;
    for k in 0..g.n {
        let w = profile.w_bound(lambda) / g.z[k].1.sqrt();
        let (a, b) = ((g.y[k] - w).ceil() as i64, (g.y[k] + w).floor() as i64);
        lo.push(a);
        hi.push(b.max(a - 1));
        est *= (b - a + 1).max(0) as f64;
    }
    if est > PAIR_BUDGET {
        return Err(Error::BudgetExceeded {
            estimate: est,
            cap: PAIR_BUDGET,
        });
    }
    let mut sum = Complex64::new(0.0, 0.0);
    let mut m = lo.clone();
    'outer: loop {
        let mut r2 = 0.0;
        let mut u_phase = 0.0;
        let mut mx = 0.0;
        for k in 0..g.n {
            let d = m[k] as f64 - g.y[k];
            r2 += d * d * g.z[k].1;
            u_phase += d * d * g.z[k].0;
            mx += m[k] as f64 * g.x[k];
        }
        let fv = profile.value(r2);
        if fv != 0.0 {
            sum += fv * e_of(-0.5 * u_phase - mx);
        }
        // odometer over the box
        for k in 0..g.n {
            m[k] += 1;
            if m[k] <= hi[k] {
                continue 'outer;
            }
            m[k] = lo[k];
        }
        break;
    }
    let v_quarter = g.z.iter().map(|&(_, v)| v).product::<f64>().powf(0.25);
    let xy: f64 = g.x.iter().zip(g.y.iter()).map(|(a, b)| a * b).sum();
    Ok(v_quarter * e_of(-g.t + xy / 2.0) * f_phase * sum)
}

/// Generators of the discrete subgroup.
#[derive(Clone, Debug)]
pub enum Generator {
    /// z_k → −1/z_k, φ_k → φ_k + arg z_k, (x_k,y_k) → (−y_k, x_k).
    F(usize),
    /// z_k → z_k + 1, x_k → 1/2 + x_k + y_k.
    U(usize),
    /// ξ → ξ + (h₁,h₂), t → t + (h₁·y − h₂·x)/2.
    M(Vec<i64>, Vec<i64>),
}

pub fn apply_generator(gen: &Generator, g: &GroupPoint) -> Result<GroupPoint> {
    let mut out = g.clone();
    match gen {
        Generator::F(k) => {
            let k = *k;
            if k >= g.n {
                return Err(Error::IndexOutOfRange { k, n: g.n });
            }
            let (u, v) = g.z[k];
            let norm = u * u + v * v;
            out.z[k] = (-u / norm, v / norm);
            out.phi[k] += v.atan2(u);
            out.x[k] = -g.y[k];
            out.y[k] = g.x[k];
        }
        Generator::U(k) => {
            let k = *k;
            if k >= g.n {
                return Err(Error::IndexOutOfRange { k, n: g.n });
            }
            out.z[k].0 += 1.0;
            out.x[k] = 0.5 + g.x[k] + g.y[k];
            // t is deliberately left unchanged: with the theta normalization
            // used here the stated phase e^{−iπ y_k/2} is exact without a
            // t-shift (shifting t by y_k/4 would cancel it).
        }
        Generator::M(h1, h2) => {
            if h1.len() != g.n || h2.len() != g.n {
                return Err(Error::DimensionMismatch {
                    expected: g.n,
                    got: h1.len().max(h2.len()),
                });
            }
            let mut dt = 0.0;
            for k in 0..g.n {
                dt += 0.5 * (h1[k] as f64 * g.y[k] - h2[k] as f64 * g.x[k]);
                out.x[k] += h1[k] as f64;
                out.y[k] += h2[k] as f64;
            }
            out.t += dt;
        }
    }
    Ok(out)
}

/// Expected theta phase factor of a generator.
pub fn expected_phase(gen: &Generator, g: &GroupPoint) -> Complex64 {
    match gen {
        Generator::F(_) => Complex64::new(0.0, -PI / 4.0).exp(),
        Generator::U(k) => Complex64::new(0.0, -PI * g.y[*k] / 2.0).exp(),
        Generator::M(h1, h2) => {
            let hh: i64 = h1.iter().zip(h2.iter()).map(|(a, b)| a * b).sum();
            Complex64::new(0.0, -PI * hh as f64).exp()
        }
    }
}

/// Evaluate Θ at g and at gen·g and compare against the stated phase.
/// Returns (Θ(gen·g), phase·Θ(g), relative discrepancy).
pub fn phase_check(
    profile: &ThetaProfile,
    g: &GroupPoint,
    gen: &Generator,
    lambda: f64,
) -> Result<(Complex64, Complex64, f64)> {
    let lhs = theta_sum(profile, &apply_generator(gen, g)?, lambda)?;
    let rhs = expected_phase(gen, g) * theta_sum(profile, g, lambda)?;
    let scale = rhs.norm().max(1e-30);
    Ok((lhs, rhs, (lhs - rhs).norm() / scale))
}

/// Group the finite point set {m : |m|²_a ≤ 1/v} into exact shells,
/// recording the phase m·x of each point.
fn indicator_shells(a: &[i64], v: f64, x: &[f64]) -> Result<BTreeMap<u64, Vec<f64>>> {
    let n = a.len();
    let bound = 1.0 / v;
    let mut lo = Vec::with_capacity(n);
    let mut hi = Vec::with_capacity(n);
    let mut est = 1.0f64;
    for &ak in a {
        let w = (bound / ak as f64).sqrt().floor() as i64;
        lo.push(-w);
        hi.push(w);
        est *= (2 * w + 1) as f64;
    }
    if est > PAIR_BUDGET {
        return Err(Error::BudgetExceeded {
            estimate: est,
            cap: PAIR_BUDGET,
        });
    }
    let mut shells: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
    let mut m = lo.clone();
    'outer: loop {
        let q: i64 = (0..n).map(|k| a[k] * m[k] * m[k]).sum();
        if q as f64 <= bound {
            let mx: f64 = (0..n).map(|k| m[k] as f64 * x[k]).sum();
            shells.entry(q as u64).or_default().push(mx);
        }
        for k in 0..n {
            m[k] += 1;
            if m[k] <= hi[k] {
                continue 'outer;
            }
            m[k] = lo[k];
        }
        break;
    }
    Ok(shells)
}

/// The exact mean-square identity for the indicator profile:
/// ½∫₀² |Θ_f(a z, 0; (x,0), t)|² du, once as the explicit pair sum over
/// equal-norm lattice points (lhs — the nonzero frequencies integrate to
/// zero over the period exactly) and once as the shell-grouped square sum
/// (rhs). Both carry the prefactor (a₁⋯a_n)^{1/2} v^{n/2}.
pub fn msq_integral_u(a: &[i64], v: f64, x: &[f64]) -> Result<(f64, f64)> {
    assert!(v > 0.0 && a.iter().all(|&ak| ak > 0) && a.len() == x.len());
    let shells = indicator_shells(a, v, x)?;
    let pairs: f64 = shells.values().map(|s| (s.len() * s.len()) as f64).sum();
    if pairs > PAIR_BUDGET {
        return Err(Error::BudgetExceeded {
            estimate: pairs,
            cap: PAIR_BUDGET,
        });
    }
    let pref =
        a.iter().map(|&ak| ak as f64).product::<f64>().sqrt() * v.powf(a.len() as f64 / 2.0);
    let mut lhs = Dd::ZERO;
    let mut rhs = Dd::ZERO;
    for pts in shells.values() {
        let mut pair_sum = Complex64::new(0.0, 0.0);
        for &mh in pts {
            for &mm in pts {
                pair_sum += e_of(mh - mm);
            }
        }
        lhs = lhs.add(Dd::from_f64(pair_sum.re));
        let s: Complex64 = pts.iter().map(|&mx| e_of(mx)).sum();
        rhs = rhs.add(Dd::from_f64(s.norm_sqr()));
    }
    Ok((pref * lhs.to_f64(), pref * rhs.to_f64()))
}

/// One row of the theta/exponential-sum bridge comparison.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BridgeRow {
    pub v: f64,
    /// (a₁⋯a_n)^{−1/2}·½∫₀²|Θ_ψ|² du by numeric u-quadrature.
    pub theta_msq: f64,
    /// R[D_a,α](N)/N^{n/2} with N = ⌊1/v⌋.
    pub repsum_msq: f64,
    /// (n/2)|B|∫₀^∞ ψ(r)² r^{n/2−1} dr.
    pub target: f64,
}

/// Build the diagonal-form context D_a.
pub fn diag_ctx(a: &[i64]) -> Result<QuadFormCtx> {
    let n = a.len();
    let rows: Vec<Vec<i64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { a[i] } else { 0 }).collect())
        .collect();
    build_ctx(&rows)
}

/// Compare the u-averaged theta mean square against the cumulative
/// exponential-sum mean square and the smooth-profile limit target, for a
/// decreasing list of v. δ = 1/sharpness is the ψ transition half-width.
pub fn bridge_check(
    a: &[i64],
    alpha: &ShiftVector,
    v_list: &[f64],
    sharpness: f64,
) -> Result<Vec<BridgeRow>> {
    assert!(v_list.windows(2).all(|w| w[1] < w[0]), "v_list must decrease");
    assert!(*v_list.last().unwrap() >= 1e-6);
    let n = a.len();
    let delta = 1.0 / sharpness;
    let ctx = diag_ctx(a)?;
    let v_min = v_list[v_list.len() - 1];
    let p_max = ((1.0 + delta) / v_min).floor() as u64;
    let series = rep_sums(&ctx, alpha, p_max)?;

    // target: (n/2)|B|∫ψ² r^{n/2−1} dr over the support [0, 1+δ]
    let ball = unit_ball_volume(n);
    let integral = crate::numeric::composite_gl8(
        &|r| psi_cutoff(r, delta).powi(2) * r.powf(n as f64 / 2.0 - 1.0),
        0.0,
        1.0 + delta,
        256,
    );
    let target = n as f64 / 2.0 * ball * integral;

    let mut rows = Vec::with_capacity(v_list.len());
    for &v in v_list {
        let p_cut = ((1.0 + delta) / v).floor() as u64;
        // Θ̃(u) = Σ_{p ≤ p_cut} ψ(pv)·conj(r(p))·e^{iπpu}, so
        // (a₁⋯a_n)^{−1/2}·½∫|Θ|²du = v^{n/2}·½∫₀²|Θ̃|²du. |Θ̃|² is a
        // trigonometric polynomial with frequencies |k| ≤ p_cut in e^{iπu};
        // the equally spaced rectangle rule with M > p_cut nodes on [0,2]
        // integrates it exactly by discrete orthogonality.
        let mut coeff = Vec::with_capacity(p_cut as usize + 1);
        coeff.push(Complex64::new(1.0, 0.0)); // p = 0: the m = 0 term
        for p in 1..=p_cut {
            coeff.push(series.r_at(p).conj() * psi_cutoff(p as f64 * v, delta));
        }
        let m_nodes = p_cut as usize + 64;
        let mut acc = Dd::ZERO;
        for j in 0..m_nodes {
            let u = 2.0 * j as f64 / m_nodes as f64;
            let w = Complex64::new(0.0, PI * u).exp();
            // Horner evaluation of Σ c_p w^p
            let mut th = Complex64::new(0.0, 0.0);
            for c in coeff.iter().rev() {
                th = th * w + c;
            }
            acc = acc.add(Dd::from_f64(th.norm_sqr()));
        }
        let theta_msq = v.powf(n as f64 / 2.0) * acc.to_f64() / m_nodes as f64;
        let n_cp = (1.0 / v).floor() as u64;
        let repsum_msq = series.r_cum_at(n_cp) / (n_cp as f64).powf(n as f64 / 2.0);
        rows.push(BridgeRow {
            v,
            theta_msq,
            repsum_msq,
            target,
        });
    }
    Ok(rows)
}
