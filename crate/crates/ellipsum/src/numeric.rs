//! Shared numeric utilities: deterministic pairwise summation and fixed
//! Gauss–Legendre rules used by the averaging and theta quadratures.

use num_complex::Complex64;

/// Pairwise (cascade) summation. Deterministic for a fixed slice, with
/// error growing like O(log n) rather than O(n).
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 64 {
        let mut s = 0.0;
        for &x in xs {
            s += x;
        }
        s
    } else {
        let mid = xs.len() / 2;
        pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
    }
}

/// Pairwise summation for complex values.
pub fn pairwise_sum_complex(xs: &[Complex64]) -> Complex64 {
    if xs.len() <= 64 {
        let mut s = Complex64::new(0.0, 0.0);
        for &x in xs {
            s += x;
        }
        s
    } else {
        let mid = xs.len() / 2;
        pairwise_sum_complex(&xs[..mid]) + pairwise_sum_complex(&xs[mid..])
    }
}

/// 8-point Gauss–Legendre abscissae on [-1, 1].
pub const GL8_X: [f64; 8] = [
    -0.960_289_856_497_536_2,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329_0,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329_0,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_2,
];

/// 8-point Gauss–Legendre weights.
pub const GL8_W: [f64; 8] = [
    0.101_228_536_290_376_26,
    0.222_381_034_453_374_47,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362_0,
    0.362_683_783_378_362_0,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_47,
    0.101_228_536_290_376_26,
];

/// 4-point Gauss–Legendre abscissae on [-1, 1] (residual estimation).
pub const GL4_X: [f64; 4] = [
    -0.861_136_311_594_052_6,
    -0.339_981_043_584_856_3,
    0.339_981_043_584_856_3,
    0.861_136_311_594_052_6,
];

/// 4-point Gauss–Legendre weights.
pub const GL4_W: [f64; 4] = [
    0.347_854_845_137_453_85,
    0.652_145_154_862_546_2,
    0.652_145_154_862_546_2,
    0.347_854_845_137_453_85,
];

/// Integrate `f` on [a, b] with the 8-point rule; returns (value, |G8-G4|).
pub fn gl8_with_residual<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut s8 = 0.0;
    for i in 0..8 {
        s8 += GL8_W[i] * f(c + h * GL8_X[i]);
    }
    let mut s4 = 0.0;
    for i in 0..4 {
        s4 += GL4_W[i] * f(c + h * GL4_X[i]);
    }
    (h * s8, (h * (s8 - s4)).abs())
}

/// Composite 8-point Gauss–Legendre with `panels` equal panels on [a, b].
pub fn composite_gl8<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, panels: usize) -> f64 {
    let panels = panels.max(1);
    let step = (b - a) / panels as f64;
    let vals: Vec<f64> = (0..panels)
        .map(|k| {
            let lo = a + k as f64 * step;
            gl8_with_residual(f, lo, lo + step).0
        })
        .collect();
    pairwise_sum(&vals)
}

/// Smooth monotone transition h: [0,1] -> [0,1], C^infinity, with
/// h(0)=0, h(1)=1, all derivatives vanishing at both ends.
pub fn smooth_step(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else if s >= 1.0 {
        1.0
    } else {
        let g = |t: f64| (-1.0 / t).exp();
        g(s) / (g(s) + g(1.0 - s))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_naive_on_smooth_data() {
        let xs: Vec<f64> = (0..10_000).map(|i| ((i as f64) * 0.1).sin()).collect();
        let naive: f64 = xs.iter().sum();
        assert!((pairwise_sum(&xs) - naive).abs() < 1e-9);
    }

    #[test]
    fn gl8_exact_for_low_degree() {
        // degree-9 polynomial integrated exactly by 8-point Gauss
        let f = |x: f64| 3.0 * x.powi(9) - x.powi(4) + 2.0;
        let (v, _) = gl8_with_residual(&f, 0.0, 1.0);
        let exact = 3.0 / 10.0 - 1.0 / 5.0 + 2.0;
        assert!((v - exact).abs() < 1e-14);
    }

    #[test]
    fn composite_gl8_oscillatory() {
        let f = |x: f64| (20.0 * x).cos();
        let v = composite_gl8(&f, 0.0, 1.0, 64);
        let exact = (20.0f64).sin() / 20.0;
        assert!((v - exact).abs() < 1e-12);
    }

    #[test]
    fn smooth_step_endpoints_and_symmetry() {
        assert_eq!(smooth_step(-1.0), 0.0);
        assert_eq!(smooth_step(2.0), 1.0);
        assert!((smooth_step(0.5) - 0.5).abs() < 1e-15);
        assert!((smooth_step(0.3) + smooth_step(0.7) - 1.0).abs() < 1e-15);
    }
}
