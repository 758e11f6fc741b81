use kaon_bell::bell::{chsh_value, strangeness_chsh, BellSetting, TSIRELSON_BOUND};
use kaon_bell::optimize::{
    maximize_chsh, nelder_mead, scan_times, within_tsirelson, OptimizerConfig, PureStateParams,
    QuasispinParams, ScanMode,
};
use kaon_bell::pair::singlet;
use kaon_bell::KaonPhysics;

fn strong() -> OptimizerConfig {
    OptimizerConfig {
        restarts: 10,
        max_iterations: 10_000,
        ..OptimizerConfig::default()
    }
}

fn strangeness_objective(p: &[f64]) -> f64 {
    let times = [p[0].abs(), p[1].abs(), p[2].abs(), p[3].abs()];
    let state = PureStateParams::from_slice(&p[4..]).to_state();
    strangeness_chsh(times, &state, &KaonPhysics::default()).unwrap()
}

#[test]
fn smooth_quadratic() {
    let r = nelder_mead(
        |x: &[f64]| -x.iter().map(|v| (v - 1.0).powi(2)).sum::<f64>(),
        3,
        &OptimizerConfig::default(),
    )
    .unwrap();
    assert!(r.converged);
    assert!(r.best_value.abs() < 1e-6);
    assert!(r.best_params.iter().all(|v| (v - 1.0).abs() < 1e-3));
}

#[test]
fn singlet_quasispins_at_zero_times_reach_tsirelson() {
    let physics = KaonPhysics::default();
    let f = |p: &[f64]| {
        let ks = [0, 1, 2, 3].map(|i| {
            QuasispinParams {
                theta: p[2 * i],
                phi: p[2 * i + 1],
            }
            .to_quasispin()
        });
        chsh_value(
            &BellSetting::new(ks, [0.0; 4]).unwrap(),
            &singlet(),
            &physics,
        )
        .unwrap()
    };
    let r = nelder_mead(
        f,
        8,
        &OptimizerConfig {
            restarts: 5,
            ..OptimizerConfig::default()
        },
    )
    .unwrap();
    assert!(
        (r.best_value - TSIRELSON_BOUND).abs() < 1e-4,
        "{}",
        r.best_value
    );
}

#[test]
fn zero_time_optimum_is_maximally_entangled() {
    let opt = maximize_chsh(
        [0.0; 4],
        &KaonPhysics::default(),
        &OptimizerConfig::default(),
    )
    .unwrap();
    assert!((opt.s_max - TSIRELSON_BOUND).abs() < 1e-4);
    assert!((opt.state.reduced_purity() - 0.5).abs() < 1e-3);
    let lead = opt
        .state
        .amplitudes()
        .into_iter()
        .find(|a| a.norm() > 1e-12)
        .unwrap();
    assert!(lead.im == 0.0 && lead.re > 0.0);
}

#[test]
fn more_restarts_never_worse_on_strangeness() {
    let one = nelder_mead(
        strangeness_objective,
        10,
        &OptimizerConfig {
            restarts: 1,
            seed: 7,
            ..Default::default()
        },
    )
    .unwrap();
    let three = nelder_mead(
        strangeness_objective,
        10,
        &OptimizerConfig {
            restarts: 3,
            seed: 7,
            ..Default::default()
        },
    )
    .unwrap();
    assert!(three.best_value >= one.best_value);
    assert_eq!(three.runs[0].best_params, one.runs[0].best_params);
    let spread = three.spread();
    println!(
        "3 restarts: max {:.6}, spread {spread:.3e}",
        three.best_value
    );
}

#[test]
fn run_history_is_monotone() {
    let r = nelder_mead(strangeness_objective, 10, &OptimizerConfig::default()).unwrap();
    for run in &r.runs {
        assert!(run.history.windows(2).all(|w| w[1] >= w[0]));
    }
}

#[test]
fn identical_seeds_are_bit_identical() {
    let cfg = OptimizerConfig {
        seed: 42,
        ..Default::default()
    };
    let grid = [0.0, 0.7, 1.3];
    let a = scan_times(ScanMode::ZerosFirst, &grid, &KaonPhysics::default(), &cfg);
    let b = scan_times(ScanMode::ZerosFirst, &grid, &KaonPhysics::default(), &cfg);
    assert_eq!(a, b);
    let ra = nelder_mead(strangeness_objective, 10, &cfg).unwrap();
    let rb = nelder_mead(strangeness_objective, 10, &cfg).unwrap();
    for (x, y) in ra.runs.iter().zip(&rb.runs) {
        assert_eq!(
            x.best_params
                .iter()
                .map(|v| v.to_bits())
                .collect::<Vec<_>>(),
            y.best_params
                .iter()
                .map(|v| v.to_bits())
                .collect::<Vec<_>>()
        );
        assert_eq!(
            x.history.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            y.history.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
    }
}

#[test]
fn every_mode_at_zero_gives_tsirelson() {
    for mode in [ScanMode::Equal, ScanMode::ZerosFirst, ScanMode::ZerosSecond] {
        let p = scan_times(
            mode,
            &[0.0],
            &KaonPhysics::default(),
            &OptimizerConfig::default(),
        );
        let s = p[0].outcome.as_ref().unwrap().s_max;
        assert!((s - TSIRELSON_BOUND).abs() < 1e-4, "{} {s}", mode.name());
    }
}

#[test]
fn zeros_second_at_least_zeros_first() {
    let grid: Vec<f64> = (5..=20).map(|i| i as f64 * 0.1).collect();
    let physics = KaonPhysics::default();
    let red = scan_times(ScanMode::ZerosFirst, &grid, &physics, &strong());
    let blue = scan_times(ScanMode::ZerosSecond, &grid, &physics, &strong());
    for (r, b) in red.iter().zip(&blue) {
        let (r, b) = (
            r.outcome.as_ref().unwrap().s_max,
            b.outcome.as_ref().unwrap().s_max,
        );
        assert!(b >= r - 1e-3, "T: red {r} blue {b}");
    }
}

#[test]
fn scans_respect_tsirelson() {
    let grid: Vec<f64> = (0..=10).map(|i| i as f64 * 0.3).collect();
    for mode in [ScanMode::Equal, ScanMode::ZerosFirst, ScanMode::ZerosSecond] {
        for p in scan_times(
            mode,
            &grid,
            &KaonPhysics::default(),
            &OptimizerConfig::default(),
        ) {
            assert!(within_tsirelson(p.outcome.unwrap().s_max));
        }
    }
}

#[test]
fn equal_mode_excess_is_small_and_shrinking() {
    let physics = KaonPhysics::default();
    let s: Vec<f64> = [2.0, 3.0, 4.0, 5.0]
        .iter()
        .map(|&t| maximize_chsh([t; 4], &physics, &strong()).unwrap().s_max)
        .collect();
    assert!((s[0] - 2.0813).abs() < 1e-3, "{s:?}");
    assert!(s.windows(2).all(|w| w[1] < w[0]));
    assert!(s[2] > 2.0 && s[2] - 2.0 < 2e-3, "{s:?}");
}

#[test]
#[ignore = "the true maximum at equal times T = 4 is 2.00096, above 2; see equal_mode_excess_is_small_and_shrinking"]
fn equal_times_beyond_four_lifetimes_do_not_violate() {
    for t in [4.0, 5.0, 6.0] {
        let s = maximize_chsh([t; 4], &KaonPhysics::default(), &strong())
            .unwrap()
            .s_max;
        assert!(s <= 2.0 + 1e-6, "T={t}: S_max={s}");
    }
}

#[test]
#[ignore = "the equal-mode excess over 2 decays exponentially in T but stays positive on [0, 3]"]
fn equal_scan_has_threshold() {
    let grid: Vec<f64> = (0..=30).map(|i| i as f64 * 0.1).collect();
    let s: Vec<f64> = scan_times(ScanMode::Equal, &grid, &KaonPhysics::default(), &strong())
        .into_iter()
        .map(|p| p.outcome.unwrap().s_max)
        .collect();
    assert!(
        (0..s.len()).any(|i| s[i..].iter().all(|&v| v <= 2.0 + 1e-6)),
        "{s:?}"
    );
}
