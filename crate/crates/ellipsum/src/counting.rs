//! Deviation functionals of the lattice count and their truncated spectral
//! approximation.
//!
//! F(t) = (N(t) − |E|tⁿ)/t^{(n−1)/2} is the normalized counting deviation,
//! S(t,ε) the corresponding shell statistic, and F_K0 the truncated
//! oscillatory sum over dual shells that approximates F after mollification
//! at scale 1/K.

use crate::error::{Error, Result};
use crate::expsums::ExpSumSeries;
use crate::lattice::{self, RadiiMultiset};
use crate::quadform::QuadFormCtx;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Mollifier profile, exposed through its radial Fourier transform φ̂.
///
/// The default Gaussian φ(x) = e^{−π|x|²} gives φ̂(s) = e^{−πs²} in closed
/// form. The compactly supported bump φ(x) ∝ exp(−1/(1−|x|²)) on the unit
/// ball is available for fidelity runs; its transform is computed on demand
/// by Hankel quadrature (absolute error well below 1e−10).
#[derive(Clone, Debug)]
pub enum Mollifier {
    Gaussian,
    Bump { dim: usize },
}

/// Λ_n(u) = Γ(n/2)·(u/2)^{−(n/2−1)}·J_{n/2−1}(u), the radial Fourier kernel
/// in dimension n, normalized so Λ_n(0) = 1.
fn radial_kernel(n: usize, u: f64) -> f64 {
    debug_assert!(n >= 1 && u >= 0.0);
    if u <= 8.0 {
        // power series: Γ(n/2) Σ_k (−1)^k (u/2)^{2k} / (k! Γ(k+n/2))
        let q = 0.25 * u * u;
        let mut term = 1.0; // Γ(n/2)/(0!·Γ(0+n/2))
        let mut sum = 1.0;
        for k in 1..60 {
            term *= -q / (k as f64 * (k as f64 - 1.0 + n as f64 / 2.0));
            sum += term;
            if term.abs() < 1e-18 * sum.abs().max(1.0) {
                break;
            }
        }
        return sum;
    }
    let half = n as f64 / 2.0;
    gamma_half(n) * (u / 2.0).powf(-(half - 1.0)) * bessel_j_half(n as i64 - 2, u)
}

/// Γ(n/2) for integer n ≥ 1.
fn gamma_half(n: usize) -> f64 {
    let mut g = if n % 2 == 0 { 1.0 } else { PI.sqrt() };
    let mut a = if n % 2 == 0 { 1.0 } else { 0.5 };
    while a < n as f64 / 2.0 - 0.25 {
        g *= a;
        a += 1.0;
    }
    g
}

/// J_{m/2}(x) for integer m (so order is an integer or half-integer), x > 0.
///
/// Integer orders go to libm; half-integer orders start from the
/// trigonometric closed forms for J_{±1/2} and recurse upward (stable here
/// because this path is only taken for x > 8 > order).
fn bessel_j_half(m: i64, x: f64) -> f64 {
    if m % 2 == 0 {
        let nu = (m / 2) as i32;
        return if nu >= 0 {
            libm::jn(nu, x)
        } else if nu % 2 == 0 {
            libm::jn(-nu, x)
        } else {
            -libm::jn(-nu, x)
        };
    }
    let c = (2.0 / (PI * x)).sqrt();
    let mut jm = c * x.cos(); // J_{−1/2}
    let mut j = c * x.sin(); // J_{1/2}
    if m == -1 {
        return jm;
    }
    let mut two_nu = 1i64; // 2ν for the current j = J_ν
    while two_nu < m {
        let next = (two_nu as f64 / x) * j - jm;
        jm = j;
        j = next;
        two_nu += 2;
    }
    j
}

impl Mollifier {
    /// φ̂ evaluated at |ξ| = s; φ̂(0) = 1 by normalization.
    pub fn hat(&self, s: f64) -> f64 {
        debug_assert!(s >= 0.0);
        match self {
            Mollifier::Gaussian => (-PI * s * s).exp(),
            Mollifier::Bump { dim } => bump_hat(*dim, s),
        }
    }
}

/// Hankel transform of the unit-ball bump, normalized to 1 at s = 0:
/// hat(s) = ∫₀¹ e^{−1/(1−r²)} Λ_n(2πrs) r^{n−1} dr / (same at s = 0).
fn bump_hat(n: usize, s: f64) -> f64 {
    let integrand = |r: f64, s: f64| -> f64 {
        if r >= 1.0 {
            return 0.0;
        }
        (-1.0 / (1.0 - r * r)).exp() * radial_kernel(n, 2.0 * PI * r * s) * r.powi(n as i32 - 1)
    };
    // ≥ 4 Gauss panels per oscillation period keeps the rule far below 1e−12
    let panels = (4.0 * s).ceil().max(16.0) as usize;
    let num = crate::numeric::composite_gl8(&|r| integrand(r, s), 0.0, 1.0, panels);
    let den = crate::numeric::composite_gl8(&|r| integrand(r, 0.0), 0.0, 1.0, 16);
    num / den
}

/// Read-only evaluator for the counting deviations F and S over a
/// precomputed radii multiset.
pub struct DeviationEvaluator<'a> {
    pub rm: &'a RadiiMultiset,
    pub n: usize,
    /// |E^M|, the volume of the unit ellipsoid of the form.
    pub volume: f64,
    pub t_max: f64,
}

impl<'a> DeviationEvaluator<'a> {
    pub fn new(ctx: &QuadFormCtx, rm: &'a RadiiMultiset) -> DeviationEvaluator<'a> {
        DeviationEvaluator {
            rm,
            n: ctx.n,
            volume: ctx.volume,
            t_max: rm.r_max,
        }
    }

    /// N(t): closed-ball lattice count at radius t.
    pub fn count(&self, t: f64) -> Result<u64> {
        lattice::count_upto(self.rm, t)
    }

    /// F(t) = (N(t) − |E|tⁿ)/t^{(n−1)/2}.
    pub fn f(&self, t: f64) -> Result<f64> {
        if !(t > 0.0 && t <= self.t_max) {
            return Err(Error::RadiusOutOfRange {
                t,
                r_max: self.t_max,
            });
        }
        let nt = lattice::count_upto(self.rm, t)? as f64;
        let n = self.n as f64;
        Ok((nt - self.volume * t.powf(n)) / t.powf((n - 1.0) / 2.0))
    }

    /// S(t,ε) = (N(t+ε) − N(t) − |E|((t+ε)ⁿ − tⁿ)) / (√ε · t^{(n−1)/2}).
    pub fn s(&self, t: f64, eps: f64) -> Result<f64> {
        if eps <= 0.0 {
            return Err(Error::NonpositiveEps { eps });
        }
        if !(t > 0.0 && t + eps <= self.t_max) {
            return Err(Error::RadiusOutOfRange {
                t: t + eps,
                r_max: self.t_max,
            });
        }
        let shell = lattice::count_upto(self.rm, t + eps)? as f64
            - lattice::count_upto(self.rm, t)? as f64;
        let n = self.n as f64;
        let smooth = self.volume * ((t + eps).powf(n) - t.powf(n));
        Ok((shell - smooth) / (eps.sqrt() * t.powf((n - 1.0) / 2.0)))
    }

    /// The cross term P(t,ε) in the decomposition
    /// S(t,ε) = (F(t+ε) − F(t))/√ε + P(t,ε),
    /// P(t,ε) = ε^{−1/2}·(((t+ε)/t)^{(n−1)/2} − 1)·F(t+ε).
    pub fn p_cross(&self, t: f64, eps: f64) -> Result<f64> {
        if eps <= 0.0 {
            return Err(Error::NonpositiveEps { eps });
        }
        let exp = (self.n as f64 - 1.0) / 2.0;
        Ok((((t + eps) / t).powf(exp) - 1.0) / eps.sqrt() * self.f(t + eps)?)
    }
}

/// Truncated spectral approximation
/// F_K0(t) = (1/π)(detM)^{(n−1)/4} Σ_{p≤p_cut} Re[r[M̂,α](p)]·
///           cos(2πt√p/√detM + φ₀)·p^{−(n+1)/4}·φ̂(√p/(K√detM)),
/// with φ₀ = −(n+1)π/4 and p_cut = ⌊K^{2+ζ}⌋.
pub struct SpectralEvaluator {
    pub n: usize,
    pub k: f64,
    pub zeta: f64,
    pub p_cut: u64,
    /// Global prefactor (1/π)·(detM)^{(n−1)/4}.
    pref: f64,
    /// Phase offset φ₀ = −(n+1)π/4.
    phi0: f64,
    /// (angular frequency 2π√p/√detM, r(p)·p^{−(n+1)/4}·φ̂(√p/(K√detM)))
    /// for every p ≤ p_cut with a nonvanishing coefficient.
    terms: Vec<(f64, Complex64)>,
}

impl SpectralEvaluator {
    /// `adj_series` must be the exponential-sum series of the adjugate form
    /// M̂; `ctx` is the original form M.
    pub fn new(
        ctx: &QuadFormCtx,
        adj_series: &ExpSumSeries,
        k: f64,
        zeta: f64,
        mollifier: &Mollifier,
    ) -> Result<SpectralEvaluator> {
        if !(k >= 1.0) {
            return Err(Error::InvalidConfig {
                reason: format!("smoothing parameter K must be ≥ 1, got {k}"),
            });
        }
        if !(zeta > 0.0) {
            return Err(Error::InvalidConfig {
                reason: format!("truncation exponent zeta must be > 0, got {zeta}"),
            });
        }
        debug_assert!((mollifier.hat(0.0) - 1.0).abs() < 1e-12);
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
        let mut terms = Vec::new();
        for p in 1..=p_cut {
            let r = adj_series.r_at(p);
            if r == Complex64::new(0.0, 0.0) {
                continue;
            }
            let sp = (p as f64).sqrt();
            let w = (p as f64).powf(-(n + 1.0) / 4.0) * mollifier.hat(sp / (k * sqrt_det));
            terms.push((2.0 * PI * sp / sqrt_det, r * w));
        }
        Ok(SpectralEvaluator {
            n: ctx.n,
            k,
            zeta,
            p_cut,
            pref: det.powf((n - 1.0) / 4.0) / PI,
            phi0: -(n + 1.0) * PI / 4.0,
            terms,
        })
    }

    /// Evaluate F_K0(t) with deterministic pairwise summation.
    pub fn f_k0(&self, t: f64) -> f64 {
        assert!(t > 0.0, "t must be positive");
        let total = pairwise_eval(&self.terms, t, self.phi0);
        // r(p) is real up to roundoff (shells are symmetric under m ↔ −m),
        // so the imaginary residue only measures accumulated noise.
        debug_assert!(
            total.im.abs() * self.pref < 1e-9,
            "imaginary residue {} too large",
            total.im * self.pref
        );
        self.pref * total.re
    }
}

/// Pairwise sum of c_p·cos(ω_p t + φ₀) without materializing the terms;
/// the split points depend only on the term count, so the result is
/// bit-identical across repeated evaluations.
fn pairwise_eval(terms: &[(f64, Complex64)], t: f64, phi0: f64) -> Complex64 {
    if terms.len() <= 64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &(omega, c) in terms {
            acc += c * (omega * t + phi0).cos();
        }
        return acc;
    }
    let mid = terms.len() / 2;
    pairwise_eval(&terms[..mid], t, phi0) + pairwise_eval(&terms[mid..], t, phi0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diophantine::{parse_shift, ShiftVector};
    use crate::expsums::rep_sums;
    use crate::lattice::build_radii;
    use crate::quadform::build_ctx;
    use rand::{Rng, SeedableRng};

    fn i2() -> QuadFormCtx {
        build_ctx(&[vec![1, 0], vec![0, 1]]).unwrap()
    }

    #[test]
    fn f_matches_hand_values() {
        let ctx = i2();
        let rm = build_radii(&ctx, &ShiftVector::zero(2), 10.0).unwrap();
        let ev = DeviationEvaluator::new(&ctx, &rm);
        assert!((ev.f(1.0).unwrap() - (5.0 - PI)).abs() < 1e-12);
        let expect = (1.0 - PI / 4.0) / 0.5f64.sqrt();
        assert!((ev.f(0.5).unwrap() - expect).abs() < 1e-12);
        assert!(matches!(ev.f(0.0), Err(Error::RadiusOutOfRange { .. })));
        assert!(matches!(ev.f(11.0), Err(Error::RadiusOutOfRange { .. })));
    }

    #[test]
    fn f_jump_equals_multiplicity() {
        let ctx = i2();
        let rm = build_radii(&ctx, &ShiftVector::zero(2), 10.0).unwrap();
        let ev = DeviationEvaluator::new(&ctx, &rm);
        // radius √2 has multiplicity 4 ((±1,±1))
        let t = 2.0f64.sqrt();
        let h = 1e-9;
        let jump = ev.f(t).unwrap() - ev.f(t - h).unwrap();
        assert!((jump - 4.0 / t.powf(0.5)).abs() < 1e-6);
    }

    #[test]
    fn s_hand_value_and_identity() {
        let ctx = i2();
        let rm = build_radii(&ctx, &ShiftVector::zero(2), 10.0).unwrap();
        let ev = DeviationEvaluator::new(&ctx, &rm);
        let (t, eps) = (0.5f64, 0.6f64);
        let expect = (4.0 - PI * (1.21 - 0.25)) / (eps.sqrt() * t.sqrt());
        assert!((ev.s(t, eps).unwrap() - expect).abs() < 1e-12);
        // S·√ε·t^{(n−1)/2} + |E|((t+ε)ⁿ−tⁿ) = N(t+ε) − N(t)
        let lhs = ev.s(t, eps).unwrap() * eps.sqrt() * t.sqrt()
            + PI * ((t + eps).powi(2) - t.powi(2));
        let rhs = (ev.count(t + eps).unwrap() - ev.count(t).unwrap()) as f64;
        assert!((lhs - rhs).abs() < 1e-10 * rhs.max(1.0));
        assert!(matches!(ev.s(0.5, 0.0), Err(Error::NonpositiveEps { .. })));
        assert!(matches!(
            ev.s(9.9, 0.5),
            Err(Error::RadiusOutOfRange { .. })
        ));
    }

    #[test]
    fn s_decomposition_randomized() {
        let ctx = i2();
        let alpha = parse_shift("sqrt2-1,sqrt3-1", 2).unwrap();
        let rm = build_radii(&ctx, &alpha, 30.0).unwrap();
        let ev = DeviationEvaluator::new(&ctx, &rm);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let t = rng.gen_range(1.0..25.0);
            let eps = rng.gen_range(1e-3..4.0);
            let direct = ev.s(t, eps).unwrap();
            let decomp = (ev.f(t + eps).unwrap() - ev.f(t).unwrap()) / eps.sqrt()
                + ev.p_cross(t, eps).unwrap();
            assert!(
                (direct - decomp).abs() <= 1e-9 * direct.abs().max(1.0),
                "t={t} eps={eps}: {direct} vs {decomp}"
            );
        }
    }

    #[test]
    fn mollifier_values() {
        let g = Mollifier::Gaussian;
        assert_eq!(g.hat(0.0), 1.0);
        assert!((g.hat(1.0) - (-PI).exp()).abs() < 1e-15);
        for dim in [1usize, 2, 3, 5] {
            let b = Mollifier::Bump { dim };
            assert!((b.hat(0.0) - 1.0).abs() < 1e-10, "dim={dim}");
            // decay: well below 1 by s = 3
            assert!(b.hat(3.0).abs() < 0.05, "dim={dim}");
        }
    }

    #[test]
    fn bump_hat_matches_direct_quadrature_1d() {
        // n=1: Λ₁(u) = cos u, so hat(s) = ∫φ cos(2πrs)dr / ∫φ dr; compare
        // against a dense Simpson oracle.
        let b = Mollifier::Bump { dim: 1 };
        for &s in &[0.5, 1.0, 2.5, 6.0, 12.0] {
            let f = |r: f64| {
                if r >= 1.0 {
                    0.0
                } else {
                    (-1.0 / (1.0 - r * r)).exp() * (2.0 * PI * r * s).cos()
                }
            };
            let m = 200_000;
            let h = 1.0 / m as f64;
            let mut num = f(0.0) + f(1.0);
            let mut den = 1.0f64.exp().recip() + 0.0;
            for i in 1..m {
                let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                let r = i as f64 * h;
                num += w * f(r);
                den += w * (-1.0 / (1.0 - r * r)).exp();
            }
            let oracle = num / den;
            assert!(
                (b.hat(s) - oracle).abs() < 1e-9,
                "s={s}: {} vs {oracle}",
                b.hat(s)
            );
        }
    }

    #[test]
    fn radial_kernel_branches_agree() {
        // closed forms: Λ₁(u) = cos u, Λ₂(u) = J₀(u),
        // Λ₃(u) = sin(u)/u — exercised on both sides of the u = 8 branch switch
        for &u in &[0.5, 4.0, 7.9, 8.1, 12.0, 30.0] {
            assert!((radial_kernel(1, u) - u.cos()).abs() < 1e-10, "n=1 u={u}");
            assert!((radial_kernel(2, u) - libm::j0(u)).abs() < 1e-10, "n=2 u={u}");
            assert!((radial_kernel(3, u) - u.sin() / u).abs() < 1e-10, "n=3 u={u}");
        }
        // higher half-integer order via recurrence:
        // Λ₅(u) = 3(sin u − u cos u)/u³ · ... check against the explicit
        // J_{3/2} form: Λ₅(u) = Γ(5/2)(u/2)^{−3/2} J_{3/2}(u)
        for &u in &[9.0, 20.0] {
            let j32 = (2.0 / (PI * u)).sqrt() * (u.sin() / u - u.cos());
            let expect = gamma_half(5) * (u / 2.0).powf(-1.5) * j32;
            assert!((radial_kernel(5, u) - expect).abs() < 1e-10, "n=5 u={u}");
        }
    }

    #[test]
    fn f_k0_single_term_and_zero() {
        let ctx = i2();
        // synthetic series: r(1) = 1, nothing else
        let base = rep_sums(&ctx, &ShiftVector::zero(2), 4).unwrap();
        let series = ExpSumSeries {
            r: vec![
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
            ],
            r_cum: vec![1.0; 4],
            ..base.clone()
        };
        let sp = SpectralEvaluator::new(&ctx, &series, 1.0, 0.5, &Mollifier::Gaussian).unwrap();
        // cos(2πt + φ₀) = 1 at t = 3/8 (φ₀ = −3π/4)
        let got = sp.f_k0(0.375);
        let expect = (-PI).exp() / PI;
        assert!((got - expect).abs() < 1e-14, "{got} vs {expect}");
        // all-zero series → 0
        let zero = ExpSumSeries {
            r: vec![Complex64::new(0.0, 0.0); 4],
            r_cum: vec![0.0; 4],
            ..base
        };
        let spz = SpectralEvaluator::new(&ctx, &zero, 1.0, 0.5, &Mollifier::Gaussian).unwrap();
        assert_eq!(spz.f_k0(1.0), 0.0);
    }

    #[test]
    fn f_k0_deterministic_and_guarded() {
        let ctx = i2();
        let alpha = parse_shift("sqrt2-1,sqrt3-1", 2).unwrap();
        let adj = rep_sums(&ctx.adjugate_ctx().unwrap(), &alpha, 2000).unwrap();
        let sp = SpectralEvaluator::new(&ctx, &adj, 10.0, 0.5, &Mollifier::Gaussian).unwrap();
        assert_eq!(sp.p_cut, 316);
        let a = sp.f_k0(123.456);
        let b = sp.f_k0(123.456);
        assert!(a.to_bits() == b.to_bits());
        assert!(matches!(
            SpectralEvaluator::new(&ctx, &adj, 100.0, 0.5, &Mollifier::Gaussian),
            Err(Error::TruncationExceedsSeries { .. })
        ));
        assert!(matches!(
            SpectralEvaluator::new(&ctx, &adj, 0.5, 0.5, &Mollifier::Gaussian),
            Err(Error::InvalidConfig { .. })
        ));
    }

    #[test]
    fn f_k0_tracks_f_on_average() {
        // crude Lemma-4.2-style check: the K=20 approximation is closer to F
        // in mean square than the K=5 one over t ∈ [20, 40]
        let ctx = i2();
        let alpha = parse_shift("sqrt2-1,sqrt3-1", 2).unwrap();
        let rm = build_radii(&ctx, &alpha, 45.0).unwrap();
        let ev = DeviationEvaluator::new(&ctx, &rm);
        let adj = rep_sums(&ctx, &alpha, 20_000).unwrap();
        let m = Mollifier::Gaussian;
        let sp5 = SpectralEvaluator::new(&ctx, &adj, 5.0, 0.5, &m).unwrap();
        let sp20 = SpectralEvaluator::new(&ctx, &adj, 20.0, 0.5, &m).unwrap();
        let (mut e5, mut e20) = (0.0, 0.0);
        let samples = 400;
        for i in 0..samples {
            let t = 20.0 + 20.0 * (i as f64 + 0.5) / samples as f64;
            let f = ev.f(t).unwrap();
            e5 += (f - sp5.f_k0(t)).powi(2);
            e20 += (f - sp20.f_k0(t)).powi(2);
        }
        assert!(e20 < e5, "mean-square errors: K=20 {e20} vs K=5 {e5}");
    }
}
