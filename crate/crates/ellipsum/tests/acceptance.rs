//! Acceptance suite: one test per criterion, each printing a single
//! pass/fail line with its runtime. Tolerances are asserted; runtimes are
//! printed for information only.

use ellipsum::averaging::{
    average_piecewise, diag_shell_variance, mean_var_f, mean_var_s, sampled_average, shell_block,
    variance_target, AveragingKernel,
};
use ellipsum::counting::{DeviationEvaluator, Mollifier, SpectralEvaluator};
use ellipsum::diophantine::{parse_shift, ShiftVector};
use ellipsum::expsums::{mean_square_trace, rep_sums, ExpSumSeries};
use ellipsum::lattice::{
    box_scan_points, bucket_shells, bucket_shells_serial, build_radii, enumerate, RadiiMultiset,
};
use ellipsum::quadform::{build_ctx, QuadFormCtx};
use ellipsum::theta::{
    bridge_check, gaussian_rotation_phase, msq_integral_u, phase_check, rotation_numeric,
    Generator, GroupPoint, ThetaProfile,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::sync::OnceLock;
use std::time::Instant;

fn report(criterion: u32, pass: bool, started: Instant, detail: &str) {
    println!(
        "criterion {criterion}: {} ({:.1}s) {detail}",
        if pass { "PASS" } else { "FAIL" },
        started.elapsed().as_secs_f64()
    );
    assert!(pass, "criterion {criterion}: {detail}");
}

fn i2() -> QuadFormCtx {
    build_ctx(&[vec![1, 0], vec![0, 1]]).unwrap()
}

fn diag12() -> QuadFormCtx {
    build_ctx(&[vec![1, 0], vec![0, 2]]).unwrap()
}

fn alpha2() -> ShiftVector {
    parse_shift("sqrt2-1,sqrt3-1", 2).unwrap()
}

/// I₂ series for α = (√2−1, √3−1), deep enough for every consumer here:
/// criterion 2 reads N = 10⁶, criterion 9 needs 80^2.5, criterion 10 needs
/// 500^2.5 (I₂ is self-adjugate).
fn i2_series() -> &'static ExpSumSeries {
    static S: OnceLock<ExpSumSeries> = OnceLock::new();
    S.get_or_init(|| {
        let p_max = 500f64.powf(2.5).floor() as u64;
        rep_sums(&i2(), &alpha2(), p_max).unwrap()
    })
}

/// I₂ radii to 1600 (with margin) for the T ≤ 800 averaging windows.
fn i2_radii() -> &'static RadiiMultiset {
    static R: OnceLock<RadiiMultiset> = OnceLock::new();
    R.get_or_init(|| build_radii(&i2(), &alpha2(), 1601.0).unwrap())
}

/// ⟨F⟩_T and ⟨F²⟩_T for I₂ at the four criterion scales.
fn i2_f_sweep() -> &'static Vec<(f64, f64, f64)> {
    static S: OnceLock<Vec<(f64, f64, f64)>> = OnceLock::new();
    S.get_or_init(|| {
        let ctx = i2();
        let ev = DeviationEvaluator::new(&ctx, i2_radii());
        let kernel = AveragingKernel::bump();
        [100.0, 200.0, 400.0, 800.0]
            .iter()
            .map(|&t| {
                let (mean, var) = mean_var_f(&ev, t, &kernel).unwrap();
                (t, mean.value, var.value)
            })
            .collect()
    })
}

#[test]
fn c01_mean_square_dimension_one() {
    let started = Instant::now();
    let ctx = build_ctx(&[vec![1]]).unwrap();
    let alpha = parse_shift("sqrt2-1", 1).unwrap();
    let series = rep_sums(&ctx, &alpha, 1_000_000).unwrap();
    let rows = mean_square_trace(&series, &ctx, &[10_000, 1_000_000]).unwrap();
    let (r4, r6) = (rows[0].ratio, rows[1].ratio);
    let pass = (1.8..=2.2).contains(&r6) && (r6 - 2.0).abs() < (r4 - 2.0).abs();
    report(
        1,
        pass,
        started,
        &format!("R/√N = {r4:.4} at 10⁴, {r6:.4} at 10⁶ (limit 2)"),
    );
}

#[test]
fn c02_mean_square_dimension_two() {
    let started = Instant::now();
    let ctx = i2();
    let rows = mean_square_trace(i2_series(), &ctx, &[1_000_000]).unwrap();
    let ratio_i2 = rows[0].ratio;
    let ok_i2 = (ratio_i2 - PI).abs() / PI < 0.10;

    let ctx12 = diag12();
    let series12 = rep_sums(&ctx12, &alpha2(), 1_000_000).unwrap();
    let rows12 = mean_square_trace(&series12, &ctx12, &[1_000_000]).unwrap();
    let target12 = PI / 2.0f64.sqrt();
    let ratio_12 = rows12[0].ratio;
    let ok_12 = (ratio_12 - target12).abs() / target12 < 0.10;
    report(
        2,
        ok_i2 && ok_12,
        started,
        &format!(
            "I₂: {ratio_i2:.4} vs π = {PI:.4}; diag(1,2): {ratio_12:.4} vs {target12:.4}"
        ),
    );
}

#[test]
fn c03_deviation_mean_vanishes() {
    let started = Instant::now();
    let sweep = i2_f_sweep();
    let m100 = sweep[0].1;
    let m800 = sweep[3].1;
    let pass = m800.abs() < 0.1 && m800.abs() < m100.abs();
    report(
        3,
        pass,
        started,
        &format!("⟨F⟩_100 = {m100:.3e}, ⟨F⟩_800 = {m800:.3e}"),
    );
}

#[test]
fn c04_deviation_variance_matches_series() {
    let started = Instant::now();
    let ctx = i2();
    let var_i2 = i2_f_sweep()[3].2;
    let (target_i2, _) = variance_target(&ctx, i2_series(), 100_000).unwrap();
    let ratio_i2 = var_i2 / target_i2;

    let ctx12 = diag12();
    let rm12 = build_radii(&ctx12, &alpha2(), 1601.0).unwrap();
    let ev12 = DeviationEvaluator::new(&ctx12, &rm12);
    let (_, var12) = mean_var_f(&ev12, 800.0, &AveragingKernel::bump()).unwrap();
    let adj12 = ctx12.adjugate_ctx().unwrap();
    let adj_series12 = rep_sums(&adj12, &alpha2(), 100_000).unwrap();
    let (target12, _) = variance_target(&ctx12, &adj_series12, 100_000).unwrap();
    let ratio12 = var12.value / target12;

    let pass = (0.8..=1.2).contains(&ratio_i2) && (0.8..=1.2).contains(&ratio12);
    report(
        4,
        pass,
        started,
        &format!("⟨F²⟩/(𝔄/2π²): I₂ {ratio_i2:.3}, diag(1,2) {ratio12:.3}"),
    );
}

#[test]
fn c05_shell_statistic_moments() {
    let started = Instant::now();
    let ctx = i2();
    let ev = DeviationEvaluator::new(&ctx, i2_radii());
    let t = 800.0f64;
    let eps = t.powf(-0.5);
    let (mean_s, var_s) = mean_var_s(&ev, t, eps, &AveragingKernel::bump()).unwrap();
    let target = ctx.n as f64 * ctx.volume; // 2π for I₂
    let ratio = var_s.value / target;
    let pass = (0.8..=1.2).contains(&ratio) && mean_s.value.abs() < 0.15;
    report(
        5,
        pass,
        started,
        &format!("⟨S⟩ = {:.3e}, ⟨S²⟩/2π = {ratio:.3}", mean_s.value),
    );
}

#[test]
fn c06_exact_mean_square_identity() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let n = rng.gen_range(1..=3usize);
        let a: Vec<i64> = (0..n).map(|_| rng.gen_range(1..5i64)).collect();
        let v = rng.gen_range(1e-3..0.5);
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let (lhs, rhs) = msq_integral_u(&a, v, &x).unwrap();
        worst = worst.max((lhs - rhs).abs());
    }
    let pass = worst < 1e-12;
    report(6, pass, started, &format!("max |lhs − rhs| = {worst:.2e} over 50 draws"));
}

#[test]
fn c07_theta_generator_phases() {
    let started = Instant::now();
    // validate the Gaussian rotation closed form against kernel quadrature
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let mut rot_err = 0.0f64;
    for i in 0..20 {
        let phi = if i % 2 == 0 {
            rng.gen_range(0.1..PI - 0.1)
        } else {
            rng.gen_range(PI + 0.1..2.0 * PI - 0.1)
        };
        let w = rng.gen_range(-1.5..1.5);
        let closed = gaussian_rotation_phase(&[phi]) * (-PI * w * w).exp();
        rot_err = rot_err.max((rotation_numeric(phi, w) - closed).norm());
    }

    let gaussian = ThetaProfile::Gaussian { scale: 1.0 };
    let (mut err_u, mut err_m, mut err_f) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..8 {
        let mut g = GroupPoint::base(2);
        for k in 0..2 {
            g.z[k] = (rng.gen_range(-0.5..0.5), rng.gen_range(0.6..1.6));
            g.x[k] = rng.gen_range(-0.5..0.5);
            g.y[k] = rng.gen_range(-0.5..0.5);
        }
        g.t = rng.gen_range(-1.0..1.0);
        for k in 0..2 {
            err_u = err_u.max(phase_check(&gaussian, &g, &Generator::U(k), 10.0).unwrap().2);
            err_f = err_f.max(phase_check(&gaussian, &g, &Generator::F(k), 10.0).unwrap().2);
        }
        let h1 = vec![rng.gen_range(-2..3i64), rng.gen_range(-2..3i64)];
        let h2 = vec![rng.gen_range(-2..3i64), rng.gen_range(-2..3i64)];
        err_m = err_m.max(
            phase_check(&gaussian, &g, &Generator::M(h1, h2), 10.0)
                .unwrap()
                .2,
        );
    }
    let pass = rot_err < 1e-8 && err_u < 1e-10 && err_m < 1e-10 && err_f < 1e-8;
    report(
        7,
        pass,
        started,
        &format!("rotation {rot_err:.1e}, U {err_u:.1e}, M {err_m:.1e}, F {err_f:.1e}"),
    );
}

#[test]
fn c08_theta_repsum_bridge() {
    let started = Instant::now();
    let rows = bridge_check(&[1, 1], &alpha2(), &[1e-4], 20.0).unwrap();
    let row = rows[0];
    let rel = |x: f64, y: f64| (x - y).abs() / y.abs();
    let pass = rel(row.theta_msq, row.repsum_msq) < 0.10
        && rel(row.theta_msq, row.target) < 0.10
        && rel(row.repsum_msq, row.target) < 0.10
        && rel(row.target, PI) < 0.10;
    report(
        8,
        pass,
        started,
        &format!(
            "θ-side {:.4}, R-side {:.4}, target {:.4}, π = {PI:.4}",
            row.theta_msq, row.repsum_msq, row.target
        ),
    );
}

#[test]
fn c09_spectral_truncation_trend() {
    let started = Instant::now();
    let ctx = i2();
    let ev = DeviationEvaluator::new(&ctx, i2_radii());
    let kernel = AveragingKernel::bump();
    let t = 100.0;
    let ks = [10.0f64, 20.0, 40.0, 80.0];
    let errs: Vec<f64> = ks
        .iter()
        .map(|&k| {
            let spec =
                SpectralEvaluator::new(&ctx, i2_series(), k, 0.5, &Mollifier::Gaussian).unwrap();
            sampled_average(
                &|tt| {
                    let d = ev.f(tt).unwrap() - spec.f_k0(tt);
                    d * d
                },
                t,
                &kernel,
                2000,
            )
        })
        .collect();
    let decreasing = errs.windows(2).all(|w| w[1] < w[0]);
    // single fitted constant for err ≈ C·T^{n−1}/K (n = 2)
    let cs: Vec<f64> = ks.iter().zip(&errs).map(|(&k, &e)| e * k / t).collect();
    let log_mean = cs.iter().map(|c| c.ln()).sum::<f64>() / cs.len() as f64;
    let c_fit = log_mean.exp();
    let within = cs.iter().all(|&c| c / c_fit <= 3.0 && c_fit / c <= 3.0);
    let pass = decreasing && within;
    report(
        9,
        pass,
        started,
        &format!(
            "⟨|F−F^K0|²⟩ = {}, fitted C = {c_fit:.3}",
            errs.iter().map(|e| format!("{e:.3e}")).collect::<Vec<_>>().join(", ")
        ),
    );
}

#[test]
fn c10_shell_diagnostics() {
    let started = Instant::now();
    let ctx = i2();
    let (block, block_target) = shell_block(&ctx, i2_series(), 0.01, 1.0, 4.0).unwrap();
    let ok_block = (block - block_target).abs() / block_target < 0.10;

    let diag = diag_shell_variance(&ctx, i2_series(), 0.02, 500.0, 0.5, &Mollifier::Gaussian)
        .unwrap();
    let target = 2.0 * PI;
    let ok_diag = (diag - target).abs() / target < 0.15;
    let pass = ok_block && ok_diag;
    report(
        10,
        pass,
        started,
        &format!(
            "block {block:.3} vs {block_target:.3}; S^D {diag:.3} vs 2π = {target:.3}"
        ),
    );
}

#[test]
fn c11_property_suite() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1111);
    let mut detail = String::new();
    let mut pass = true;

    // enumeration vs brute-force box scan, n ≤ 3, R ≤ 20
    let cases: Vec<(Vec<Vec<i64>>, &str)> = vec![
        (vec![vec![2, 1], vec![1, 2]], "sqrt2-1,sqrt3-1"),
        (vec![vec![1, 0], vec![0, 3]], "0.25,0.125"),
        (
            vec![vec![2, 1, 0], vec![1, 2, 0], vec![0, 0, 3]],
            "sqrt2-1,0,0.5",
        ),
    ];
    for (rows, spec) in &cases {
        let ctx = build_ctx(rows).unwrap();
        let alpha = parse_shift(spec, ctx.n).unwrap();
        let r = rng.gen_range(10.0..20.0);
        let mut fast: BTreeSet<Vec<i64>> = BTreeSet::new();
        enumerate(&ctx, Some(&alpha), r, |pt, _| {
            fast.insert(pt.to_vec());
        })
        .unwrap();
        let slow: BTreeSet<Vec<i64>> =
            box_scan_points(&ctx, Some(&alpha), r).into_iter().collect();
        if fast != slow {
            pass = false;
            detail.push_str("enumeration≠boxscan ");
        }
    }

    // M·adjM = detM·I exactly, over random LLᵀ forms
    for _ in 0..50 {
        let n = rng.gen_range(1..=4usize);
        let mut l = vec![0i64; n * n];
        for i in 0..n {
            for j in 0..=i {
                l[i * n + j] = if i == j {
                    rng.gen_range(1..6)
                } else {
                    rng.gen_range(-3..4)
                };
            }
        }
        let rows: Vec<Vec<i64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (0..n).map(|k| l[i * n + k] * l[j * n + k]).sum())
                    .collect()
            })
            .collect();
        let ctx = build_ctx(&rows).unwrap();
        for i in 0..n {
            for j in 0..n {
                let prod: i128 = (0..n)
                    .map(|k| ctx.m[i * n + k] as i128 * ctx.adj[k * n + j])
                    .sum();
                let expect = if i == j { ctx.det } else { 0 };
                if prod != expect {
                    pass = false;
                    detail.push_str("adjugate ");
                }
            }
        }
    }

    // ⟨1⟩_T = 1 to 1e−10
    let one = average_piecewise(&|_| 1.0, &i2_radii().radii, 817.0, &AveragingKernel::bump());
    if (one.value - 1.0).abs() >= 1e-10 {
        pass = false;
        detail.push_str(&format!("⟨1⟩={} ", one.value));
    }

    // S-decomposition identity to 1e−9
    let ctx = i2();
    let ev = DeviationEvaluator::new(&ctx, i2_radii());
    let mut worst = 0.0f64;
    for _ in 0..500 {
        let t = rng.gen_range(1.0..1000.0);
        let eps = rng.gen_range(1e-3..2.0);
        let lhs = ev.s(t, eps).unwrap();
        let rhs = (ev.f(t + eps).unwrap() - ev.f(t).unwrap()) / eps.sqrt()
            + ev.p_cross(t, eps).unwrap();
        worst = worst.max((lhs - rhs).abs());
    }
    if worst >= 1e-9 {
        pass = false;
        detail.push_str(&format!("eq5.1 err={worst:.1e} "));
    }

    // deterministic parallel vs serial shell buckets, bit for bit
    let par = bucket_shells(&ctx, &alpha2(), 20_000).unwrap();
    let ser = bucket_shells_serial(&ctx, &alpha2(), 20_000).unwrap();
    if par != ser {
        pass = false;
        detail.push_str("parallel≠serial ");
    }

    if detail.is_empty() {
        detail = format!("all identities hold (eq5.1 worst {worst:.1e})");
    }
    report(11, pass, started, &detail);
}
