//! Acceptance suite: one test per criterion, each printing a single
//! `criterion N: PASS|FAIL ...` line before asserting.

use std::time::{Duration, Instant};

use kaon_bell::bell::{cp_bell_test, lhv_max, LhvStrategy};
use kaon_bell::dynamics::{
    build_lindblad, choi_matrix, effective_propagator, integrate_master_samples, ExtendedDensity,
    DEFAULT_STEP,
};
use kaon_bell::linalg::{c, hermitian_eigenvalues, max_abs_diff, partial_trace_second, Mat2};
use kaon_bell::optimize::{
    maximize_chsh, maximize_strangeness, maximize_strangeness_times, scan_times,
    strangeness_search_config, OptimizerConfig, PureStateParams, ScanMode, TimeGrid,
};
use kaon_bell::pair::{joint_probabilities, singlet};
use kaon_bell::physics::{real_epsilon_from_delta, KaonPhysics, Quasispin};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TSIRELSON: f64 = 2.0 * std::f64::consts::SQRT_2;

fn report(n: u32, pass: bool, detail: String) {
    println!(
        "criterion {n}: {} {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {n} failed: {detail}");
}

#[test]
fn criterion_01_singlet_strangeness_never_exceeds_two() {
    let start = Instant::now();
    let opt = maximize_strangeness_times(
        &singlet(),
        &KaonPhysics::default(),
        &TimeGrid::default(),
        &OptimizerConfig::default(),
    )
    .unwrap();
    let elapsed = start.elapsed();
    let pass = opt.s_max <= 2.0 + 1e-6 && elapsed < Duration::from_secs(60);
    report(
        1,
        pass,
        format!(
            "singlet S_max = {:.10} at times {:?} (bound 2 + 1e-6), {:.2?}",
            opt.s_max, opt.times, elapsed
        ),
    );
}

#[test]
fn criterion_02_partially_entangled_state_violates() {
    let start = Instant::now();
    let config = strangeness_search_config(&OptimizerConfig::default());
    let opt = maximize_strangeness(&KaonPhysics::default(), &config).unwrap();
    let elapsed = start.elapsed();
    let purity = opt.state.reduced_purity();
    let pass = (2.0..=2.2).contains(&opt.s_max)
        && purity - 0.5 > 1e-3
        && elapsed < Duration::from_secs(300);
    let a = opt.state.amplitudes();
    report(
        2,
        pass,
        format!(
            "S_max = {:.6} at times {:?}, reduced purity {:.4}, state [{:.4}, {:.4}, {:.4}, {:.4}], {:.2?}",
            opt.s_max, opt.times, purity, a[0], a[1], a[2], a[3], elapsed
        ),
    );
}

#[test]
fn criterion_03_decay_free_tsirelson() {
    let start = Instant::now();
    let opt = maximize_chsh(
        [0.0; 4],
        &KaonPhysics::default(),
        &OptimizerConfig::default(),
    )
    .unwrap();
    let err = (opt.s_max - TSIRELSON).abs();
    report(
        3,
        err < 1e-4,
        format!(
            "S_max = {:.10}, |S - 2√2| = {err:.2e}, {:.2?}",
            opt.s_max,
            start.elapsed()
        ),
    );
}

#[test]
fn criterion_04_cp_bell_test() {
    let verdict = |delta: f64| {
        let eps = real_epsilon_from_delta(delta).unwrap();
        cp_bell_test(&KaonPhysics::with_epsilon(c(eps, 0.0)).unwrap())
    };
    let measured = verdict(3.27e-3);
    let zero = verdict(0.0);
    let negative = verdict(-1e-3);
    let pass = measured.violated && !zero.violated && !negative.violated;
    report(
        4,
        pass,
        format!(
            "δ=3.27e-3 → violated={} (δ recovered {:.6e}); δ=0 → {}; δ=-1e-3 → {}",
            measured.violated, measured.delta, zero.violated, negative.violated
        ),
    );
}

#[test]
fn criterion_05_open_system_equivalence() {
    let start = Instant::now();
    let physics = KaonPhysics::with_epsilon(c(1.635e-3, 0.0)).unwrap();
    let bundle = build_lindblad(&physics, &[]).unwrap();
    let rho0 = Mat2::new(c(0.6, 0.0), c(0.1, 0.3), c(0.1, -0.3), c(0.4, 0.0));
    let samples = integrate_master_samples(
        &bundle,
        &ExtendedDensity::surviving(rho0).unwrap(),
        5.0,
        DEFAULT_STEP,
    )
    .unwrap();

    let mut prop_err = 0.0f64;
    let mut trace_err = 0.0f64;
    let mut sf = 0.0f64;
    for (t, d) in &samples {
        let u = effective_propagator(&physics, *t).unwrap();
        prop_err = prop_err.max((d.rho_ss - u * rho0 * u.adjoint()).norm());
        trace_err = trace_err.max((d.trace_surviving() + d.trace_final() - 1.0).abs());
        sf = sf.max(d.rho_sf.norm());
    }

    let n = samples.len() - 1;
    let h = samples[1].0 - samples[0].0;
    let mut integral = Mat2::zeros();
    for (i, (_, d)) in samples.iter().enumerate() {
        let w = if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        integral += d.rho_ss * c(w * h / 3.0, 0.0);
    }
    let b = bundle.decay_map();
    let ff_err = (samples[n].1.rho_ff - b * integral * b.adjoint()).norm();

    let pass =
        prop_err < 1e-8 && trace_err < 1e-10 && sf < 1e-12 && ff_err < 1e-8 && n.is_multiple_of(2);
    report(
        5,
        pass,
        format!(
            "ρ_ss vs propagator {prop_err:.2e}, trace drift {trace_err:.2e}, |ρ_sf| {sf:.2e}, ρ_ff vs B∫ρ_ss B† {ff_err:.2e}, {:.2?}",
            start.elapsed()
        ),
    );
}

#[test]
fn criterion_06_complete_positivity() {
    let bundle = build_lindblad(&KaonPhysics::default(), &[]).unwrap();
    let mut details = Vec::new();
    let mut pass = true;
    for t in [0.5, 1.0, 2.0] {
        let choi = choi_matrix(&bundle, t).unwrap();
        let min_eig = hermitian_eigenvalues(&choi)[0];
        let tp = max_abs_diff(&partial_trace_second(&choi, 4, 4), &DMatrix::identity(4, 4));
        pass &= min_eig >= -1e-8 && tp < 1e-8;
        details.push(format!("t={t}: λ_min {min_eig:.2e}, TP defect {tp:.2e}"));
    }
    report(6, pass, details.join("; "));
}

#[test]
fn criterion_07_lhv_bound() {
    let count = LhvStrategy::all().count();
    let max = lhv_max();
    report(
        7,
        count == 16 && max == 2,
        format!("{count} strategies, classical maximum {max}"),
    );
}

#[test]
fn criterion_08_scan_orderings() {
    let physics = KaonPhysics::default();
    // The 14-parameter simplex stalls on some grid points at the default
    // 3 × 2000 budget; this budget resolves the zeros-mode maxima to round-off.
    let config = OptimizerConfig {
        restarts: 10,
        max_iterations: 10_000,
        ..OptimizerConfig::default()
    };
    let grid: Vec<f64> = (1..=20).map(|i| i as f64 * 0.1).collect();
    let values = |mode| -> Vec<f64> {
        scan_times(mode, &grid, &physics, &config)
            .into_iter()
            .map(|p| p.outcome.unwrap().s_max)
            .collect()
    };
    let red = values(ScanMode::ZerosFirst);
    let blue = values(ScanMode::ZerosSecond);
    let equal = values(ScanMode::Equal);

    let worst_gap = red
        .iter()
        .zip(&blue)
        .map(|(r, b)| r - b)
        .fold(f64::NEG_INFINITY, f64::max);
    let ordering = worst_gap <= 1e-3;

    // first grid index from which every later equal-mode value is ≤ 2
    let threshold = (0..grid.len()).find(|&i| equal[i..].iter().all(|&s| s <= 2.0 + 1e-6));
    let pass = ordering && threshold.is_some();
    report(
        8,
        pass,
        format!(
            "max(red - blue) = {worst_gap:.2e} (≤ 1e-3: {ordering}); equal-mode threshold {}; equal S_max at T=1.0 {:.6}, T=2.0 {:.6}",
            threshold.map_or("none on [0.1, 2]".to_string(), |i| format!("T = {:.1}", grid[i])),
            equal[9],
            equal[19]
        ),
    );
}

#[test]
fn criterion_09_no_signalling() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let physics = KaonPhysics::with_epsilon(c(1.635e-3, 0.4e-3)).unwrap();
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let params: Vec<f64> = (0..6)
            .map(|_| rng.gen_range(0.0..std::f64::consts::TAU))
            .collect();
        let state = PureStateParams::from_slice(&params).to_state();
        let mut k = || {
            Quasispin::from_angles(
                rng.gen_range(0.0..std::f64::consts::PI),
                rng.gen_range(0.0..std::f64::consts::TAU),
            )
        };
        let (kl, kr1, kr2) = (k(), k(), k());
        let (tl, tr1, tr2) = (
            rng.gen_range(0.0..6.0),
            rng.gen_range(0.0..6.0),
            rng.gen_range(0.0..6.0),
        );
        let a = joint_probabilities(&state, &physics, &kl, tl, &kr1, tr1).unwrap();
        let b = joint_probabilities(&state, &physics, &kl, tl, &kr2, tr2).unwrap();
        worst = worst.max((a.p_y_left - b.p_y_left).abs());
    }
    report(
        9,
        worst < 1e-12,
        format!("max left-marginal change over 100 samples {worst:.2e}"),
    );
}

#[test]
fn criterion_10_oscillation_point() {
    let p = KaonPhysics::default();
    let t = 1.0;
    let u = effective_propagator(&p, t).unwrap();
    let got = u[(1, 0)].norm_sqr();
    let (gs, gl, dm) = (p.gamma_s(), p.gamma_l(), p.delta_m());
    let oracle = 0.25
        * ((-gs * t).exp() + (-gl * t).exp() - 2.0 * (-(gs + gl) * t / 2.0).exp() * (dm * t).cos());
    let err = (got - oracle).abs();
    report(
        10,
        err < 1e-10,
        format!("P(K⁰→K̄⁰, t=1) = {got:.12}, closed form {oracle:.12}, |Δ| {err:.2e}"),
    );
}
