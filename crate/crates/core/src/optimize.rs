//! Restarted Nelder–Mead maximization of CHSH values.
//!
//! Quasi-spins are parametrized by two Bloch angles and pure two-kaon states
//! by three hyperspherical magnitude angles plus three relative phases, so
//! every parameter vector is valid and the search is unconstrained. Times are
//! taken as absolute values of their parameters.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bell::{chsh_combination, correlators, BellSetting, TSIRELSON_BOUND};
use crate::dynamics::check_time;
use crate::error::{Error, Result};
use crate::linalg::{c, C64};
use crate::pair::{singlet, BipartiteState};
use crate::physics::{KaonPhysics, Quasispin};

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, TAU};

/// Edge length of the initial simplex around a start point.
const INITIAL_STEP: f64 = 0.5;

/// Bloch angles of a quasi-spin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuasispinParams {
    pub theta: f64,
    pub phi: f64,
}

impl QuasispinParams {
    pub fn to_quasispin(&self) -> Quasispin {
        Quasispin::from_angles(self.theta, self.phi)
    }

    pub fn from_quasispin(k: &Quasispin) -> Self {
        let theta = 2.0 * k.beta().norm().atan2(k.alpha().norm());
        let phi = (k.beta().arg() - k.alpha().arg()).rem_euclid(TAU);
        Self { theta, phi }
    }
}

/// Hyperspherical parametrization of a normalized four-amplitude state.
///
/// Magnitudes are (cos a, sin a cos b, sin a sin b cos c, sin a sin b sin c)
/// and the phases multiply amplitudes 1..3; amplitude 0 stays real.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureStateParams {
    pub magnitudes: [f64; 3],
    pub phases: [f64; 3],
}

impl PureStateParams {
    pub fn from_slice(p: &[f64]) -> Self {
        Self {
            magnitudes: [p[0], p[1], p[2]],
            phases: [p[3], p[4], p[5]],
        }
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.magnitudes
            .iter()
            .chain(self.phases.iter())
            .copied()
            .collect()
    }

    pub fn to_state(&self) -> BipartiteState {
        let [a, b, cc] = self.magnitudes;
        let (sa, ca) = a.sin_cos();
        let (sb, cb) = b.sin_cos();
        let (sc, ccc) = cc.sin_cos();
        let m = [ca, sa * cb, sa * sb * ccc, sa * sb * sc];
        let amps = [
            c(m[0], 0.0),
            C64::from_polar(m[1], self.phases[0]),
            C64::from_polar(m[2], self.phases[1]),
            C64::from_polar(m[3], self.phases[2]),
        ];
        // Unit norm up to rounding; renormalize so the state invariant holds.
        BipartiteState::normalized(amps).expect("hyperspherical amplitudes are nonzero")
    }

    /// Canonical parameters of a state, after fixing the global phase so the
    /// first nonzero amplitude is real and positive.
    pub fn from_state(state: &BipartiteState) -> Self {
        let amps = state.with_canonical_phase().amplitudes();
        let r = amps.map(|a| a.norm());
        let a = r[0].min(1.0).acos();
        let b = (r[2].hypot(r[3])).atan2(r[1]);
        let cc = r[3].atan2(r[2]);
        let arg = |z: C64| if z.norm() > 1e-15 { z.arg() } else { 0.0 };
        Self {
            magnitudes: [a, b, cc],
            phases: [arg(amps[1]), arg(amps[2]), arg(amps[3])],
        }
    }
}

/// Settings of the restarted simplex search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    pub restarts: usize,
    pub max_iterations: usize,
    pub tolerance: f64,
    pub seed: u64,
    pub reflection: f64,
    pub expansion: f64,
    pub contraction: f64,
    pub shrink: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            restarts: 3,
            max_iterations: 2000,
            tolerance: 1e-8,
            seed: 0,
            reflection: 1.0,
            expansion: 2.0,
            contraction: 0.5,
            shrink: 0.5,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts < 1 {
            return Err(Error::InvalidOptimizer(
                "restarts must be at least 1".into(),
            ));
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(Error::InvalidOptimizer(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidOptimizer(
                "max_iterations must be positive".into(),
            ));
        }
        let coeffs_ok = self.reflection > 0.0
            && self.expansion > 1.0
            && self.expansion > self.reflection
            && (0.0..1.0).contains(&self.contraction)
            && self.contraction > 0.0
            && (0.0..1.0).contains(&self.shrink)
            && self.shrink > 0.0;
        if !coeffs_ok {
            return Err(Error::InvalidOptimizer(
                "invalid simplex coefficients".into(),
            ));
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// One simplex run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexRun {
    pub best_params: Vec<f64>,
    pub best_value: f64,
    /// Simplex diameter dropped below the tolerance before the iteration cap.
    pub converged: bool,
    pub iterations: usize,
    pub evaluations: usize,
    /// Best value after each iteration, starting with the initial simplex.
    pub history: Vec<f64>,
}

/// Best of several simplex runs.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationResult {
    pub best_params: Vec<f64>,
    pub best_value: f64,
    pub converged: bool,
    pub runs: Vec<SimplexRun>,
}

impl OptimizationResult {
    /// max − min of the per-restart best values.
    pub fn spread(&self) -> f64 {
        let (lo, hi) = self
            .runs
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
                (lo.min(r.best_value), hi.max(r.best_value))
            });
        hi - lo
    }

    fn from_runs(runs: Vec<SimplexRun>) -> Self {
        let best = runs
            .iter()
            .reduce(|a, b| if b.best_value > a.best_value { b } else { a })
            .expect("at least one run");
        Self {
            best_params: best.best_params.clone(),
            best_value: best.best_value,
            converged: best.converged,
            runs,
        }
    }
}

fn score<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64]) -> f64 {
    let v = f(x);
    if v.is_nan() {
        f64::NEG_INFINITY
    } else {
        v
    }
}

/// Maximizes `objective` with a single Nelder–Mead run from `start`.
pub fn simplex_run<F>(objective: &F, start: &[f64], config: &OptimizerConfig) -> Result<SimplexRun>
where
    F: Fn(&[f64]) -> f64,
{
    config.validate()?;
    let dim = start.len();
    if dim == 0 {
        return Err(Error::InvalidOptimizer(
            "dimension must be at least 1".into(),
        ));
    }

    let mut vertices: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    vertices.push(start.to_vec());
    for i in 0..dim {
        let mut v = start.to_vec();
        v[i] += INITIAL_STEP;
        vertices.push(v);
    }
    let mut values: Vec<f64> = vertices.iter().map(|v| score(objective, v)).collect();
    let mut evaluations = dim + 1;

    let mut order: Vec<usize> = (0..=dim).collect();
    let sort = |order: &mut Vec<usize>, values: &[f64]| {
        order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    };
    sort(&mut order, &values);

    let mut history = vec![values[order[0]]];
    let mut converged = false;
    let mut iterations = 0;

    let point = |base: &[f64], dir: &[f64], coeff: f64| -> Vec<f64> {
        base.iter()
            .zip(dir)
            .map(|(b, d)| b + coeff * (d - b))
            .collect()
    };

    while iterations < config.max_iterations {
        if diameter(&vertices, order[0]) < config.tolerance {
            converged = true;
            break;
        }
        iterations += 1;

        let worst = order[dim];
        let second_worst = order[dim - 1];
        let best = order[0];

        let mut centroid = vec![0.0; dim];
        for &idx in &order[..dim] {
            for (c, x) in centroid.iter_mut().zip(&vertices[idx]) {
                *c += x;
            }
        }
        centroid.iter_mut().for_each(|c| *c /= dim as f64);

        // x_r = centroid + α (centroid − worst)
        let reflected = point(&centroid, &vertices[worst], -config.reflection);
        let f_r = score(objective, &reflected);
        evaluations += 1;

        if f_r > values[best] {
            let expanded = point(
                &centroid,
                &vertices[worst],
                -config.reflection * config.expansion,
            );
            let f_e = score(objective, &expanded);
            evaluations += 1;
            if f_e > f_r {
                vertices[worst] = expanded;
                values[worst] = f_e;
            } else {
                vertices[worst] = reflected;
                values[worst] = f_r;
            }
        } else if f_r > values[second_worst] {
            vertices[worst] = reflected;
            values[worst] = f_r;
        } else {
            // Outside contraction must beat the reflected point, inside
            // contraction the worst vertex.
            let (candidate, threshold) = if f_r > values[worst] {
                (point(&centroid, &reflected, config.contraction), f_r)
            } else {
                (
                    point(&centroid, &vertices[worst], config.contraction),
                    values[worst],
                )
            };
            let f_c = score(objective, &candidate);
            evaluations += 1;
            if f_c >= threshold && f_c > values[worst] {
                vertices[worst] = candidate;
                values[worst] = f_c;
            } else {
                let anchor = vertices[best].clone();
                for &idx in &order[1..] {
                    vertices[idx] = point(&anchor, &vertices[idx], config.shrink);
                    values[idx] = score(objective, &vertices[idx]);
                }
                evaluations += dim;
            }
        }
        sort(&mut order, &values);
        history.push(values[order[0]]);
    }
    if !converged && diameter(&vertices, order[0]) < config.tolerance {
        converged = true;
    }

    Ok(SimplexRun {
        best_params: vertices[order[0]].clone(),
        best_value: values[order[0]],
        converged,
        iterations,
        evaluations,
        history,
    })
}

fn diameter(vertices: &[Vec<f64>], best: usize) -> f64 {
    vertices
        .iter()
        .map(|v| {
            v.iter()
                .zip(&vertices[best])
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
        })
        .fold(0.0, f64::max)
}

/// Start points for `restarts` runs: the warm start if given, then uniform
/// angles in [0, 2π) drawn from the seeded stream.
pub fn start_points(
    dim: usize,
    config: &OptimizerConfig,
    warm_start: Option<&[f64]>,
) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut starts = Vec::with_capacity(config.restarts);
    if let Some(w) = warm_start {
        starts.push(w.to_vec());
    }
    while starts.len() < config.restarts {
        starts.push((0..dim).map(|_| rng.gen_range(0.0..TAU)).collect());
    }
    starts
}

/// Maximizes `objective` over `dim` unconstrained parameters using
/// `config.restarts` seeded random starts.
pub fn nelder_mead<F>(
    objective: F,
    dim: usize,
    config: &OptimizerConfig,
) -> Result<OptimizationResult>
where
    F: Fn(&[f64]) -> f64,
{
    nelder_mead_from(objective, dim, config, None)
}

/// Like [`nelder_mead`], with the first restart taken from `warm_start`.
pub fn nelder_mead_from<F>(
    objective: F,
    dim: usize,
    config: &OptimizerConfig,
    warm_start: Option<&[f64]>,
) -> Result<OptimizationResult>
where
    F: Fn(&[f64]) -> f64,
{
    config.validate()?;
    if dim == 0 {
        return Err(Error::InvalidOptimizer(
            "dimension must be at least 1".into(),
        ));
    }
    if let Some(w) = warm_start {
        if w.len() != dim {
            return Err(Error::InvalidOptimizer(format!(
                "warm start has {} parameters, expected {dim}",
                w.len()
            )));
        }
    }
    let runs = start_points(dim, config, warm_start)
        .iter()
        .map(|s| simplex_run(&objective, s, config))
        .collect::<Result<Vec<_>>>()?;
    Ok(OptimizationResult::from_runs(runs))
}

/// Number of free parameters in [`maximize_chsh`]: two angles for each of the
/// four quasi-spins and six for the state.
pub const CHSH_PARAMETERS: usize = 14;

fn quasispins_from(p: &[f64]) -> [Quasispin; 4] {
    [0, 1, 2, 3].map(|i| Quasispin::from_angles(p[2 * i], p[2 * i + 1]))
}

/// Parameter vector of the decay-free optimum: singlet state, Alice at Bloch
/// angles 0 and π/2, Bob at π/4 and 3π/4, all in one great circle.
pub fn decay_free_optimum_params() -> Vec<f64> {
    let mut p = vec![
        0.0,
        0.0,
        FRAC_PI_4,
        0.0,
        FRAC_PI_2,
        0.0,
        3.0 * FRAC_PI_4,
        0.0,
    ];
    p.extend(PureStateParams::from_state(&singlet()).to_vec());
    p
}

/// Result of a CHSH maximization over quasi-spins and initial state.
#[derive(Debug, Clone, PartialEq)]
pub struct ChshOptimum {
    pub s_max: f64,
    pub state: BipartiteState,
    /// (k_n, k_m, k_n', k_m').
    pub quasispins: [Quasispin; 4],
    pub times: [f64; 4],
    pub converged: bool,
    pub restart_values: Vec<f64>,
}

impl ChshOptimum {
    pub fn setting(&self) -> BellSetting {
        BellSetting::new(self.quasispins, self.times).expect("optimizer settings are valid")
    }
}

fn check_times(times: &[f64; 4]) -> Result<()> {
    times.iter().try_for_each(|&t| check_time(t))
}

/// Maximizes the CHSH value at fixed times (t_n, t_m, t_n', t_m') over all
/// four quasi-spins and the initial pure state.
pub fn maximize_chsh(
    times: [f64; 4],
    physics: &KaonPhysics,
    config: &OptimizerConfig,
) -> Result<ChshOptimum> {
    check_times(&times)?;
    let objective = |p: &[f64]| {
        let ks = quasispins_from(&p[..8]);
        let state = PureStateParams::from_slice(&p[8..]).to_state();
        let setting = BellSetting {
            k_n: ks[0],
            k_m: ks[1],
            k_np: ks[2],
            k_mp: ks[3],
            t_n: times[0],
            t_m: times[1],
            t_np: times[2],
            t_mp: times[3],
        };
        chsh_combination(correlators(&setting, &state, physics))
    };
    let warm = decay_free_optimum_params();
    let result = nelder_mead_from(objective, CHSH_PARAMETERS, config, Some(&warm))?;
    let p = &result.best_params;
    Ok(ChshOptimum {
        s_max: result.best_value,
        state: PureStateParams::from_slice(&p[8..])
            .to_state()
            .with_canonical_phase(),
        quasispins: quasispins_from(&p[..8]),
        times,
        converged: result.converged,
        restart_values: result.runs.iter().map(|r| r.best_value).collect(),
    })
}

/// Result of a strangeness CHSH maximization over detection times.
#[derive(Debug, Clone, PartialEq)]
pub struct StrangenessOptimum {
    pub s_max: f64,
    /// (t_n, t_m, t_n', t_m').
    pub times: [f64; 4],
    pub state: BipartiteState,
    pub converged: bool,
    pub restart_values: Vec<f64>,
}

impl StrangenessOptimum {
    pub fn spread(&self) -> f64 {
        let hi = self
            .restart_values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let lo = self
            .restart_values
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        hi - lo
    }
}

fn abs_times(p: &[f64]) -> [f64; 4] {
    [p[0].abs(), p[1].abs(), p[2].abs(), p[3].abs()]
}

fn strangeness_value(times: [f64; 4], state: &BipartiteState, physics: &KaonPhysics) -> f64 {
    let k = Quasispin::k0bar();
    let setting = BellSetting {
        k_n: k,
        k_m: k,
        k_np: k,
        k_mp: k,
        t_n: times[0],
        t_m: times[1],
        t_np: times[2],
        t_mp: times[3],
    };
    chsh_combination(correlators(&setting, state, physics))
}

/// Regular grid of detection times used to seed the time search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t_max: f64,
    pub step: f64,
}

impl Default for TimeGrid {
    fn default() -> Self {
        Self {
            t_max: 5.0,
            step: 0.25,
        }
    }
}

impl TimeGrid {
    pub fn nodes(&self) -> Vec<f64> {
        let n = (self.t_max / self.step).round() as usize;
        (0..=n).map(|i| i as f64 * self.step).collect()
    }
}

/// Strangeness CHSH of a fixed state, maximized over the four times: every
/// node of `grid`⁴ is evaluated, and the best `config.restarts` nodes seed
/// simplex refinements.
pub fn maximize_strangeness_times(
    state: &BipartiteState,
    physics: &KaonPhysics,
    grid: &TimeGrid,
    config: &OptimizerConfig,
) -> Result<StrangenessOptimum> {
    config.validate()?;
    if !(grid.step > 0.0 && grid.t_max >= 0.0 && grid.t_max.is_finite()) {
        return Err(Error::InvalidOptimizer(
            "time grid needs a positive step".into(),
        ));
    }
    let nodes = grid.nodes();
    let n = nodes.len();
    let mut scored: Vec<(f64, [f64; 4])> = (0..n * n * n * n)
        .into_par_iter()
        .map(|idx| {
            let times = [
                nodes[idx / (n * n * n)],
                nodes[(idx / (n * n)) % n],
                nodes[(idx / n) % n],
                nodes[idx % n],
            ];
            (strangeness_value(times, state, physics), times)
        })
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));

    let objective = |p: &[f64]| strangeness_value(abs_times(p), state, physics);
    let runs = scored
        .iter()
        .take(config.restarts)
        .map(|(_, t)| simplex_run(&objective, t, config))
        .collect::<Result<Vec<_>>>()?;
    let result = OptimizationResult::from_runs(runs);
    Ok(StrangenessOptimum {
        s_max: result.best_value,
        times: abs_times(&result.best_params),
        state: *state,
        converged: result.converged,
        restart_values: result.runs.iter().map(|r| r.best_value).collect(),
    })
}

/// Strangeness CHSH maximized jointly over the four times and the initial
/// pure state (ten parameters).
pub fn maximize_strangeness(
    physics: &KaonPhysics,
    config: &OptimizerConfig,
) -> Result<StrangenessOptimum> {
    let objective = |p: &[f64]| {
        let state = PureStateParams::from_slice(&p[4..]).to_state();
        strangeness_value(abs_times(p), &state, physics)
    };
    let result = nelder_mead(objective, 10, config)?;
    let p = &result.best_params;
    Ok(StrangenessOptimum {
        s_max: result.best_value,
        times: abs_times(p),
        state: PureStateParams::from_slice(&p[4..])
            .to_state()
            .with_canonical_phase(),
        converged: result.converged,
        restart_values: result.runs.iter().map(|r| r.best_value).collect(),
    })
}

/// The joint time/state strangeness landscape has a wide plateau at S = 2
/// (product states and fully decayed pairs), so a far larger start budget is
/// needed than for a fixed-time CHSH maximization.
pub const STRANGENESS_MIN_RESTARTS: usize = 100;
pub const STRANGENESS_MIN_ITERATIONS: usize = 20_000;

/// Raises restarts and iterations of `base` to the strangeness search minimum.
pub fn strangeness_search_config(base: &OptimizerConfig) -> OptimizerConfig {
    OptimizerConfig {
        restarts: base.restarts.max(STRANGENESS_MIN_RESTARTS),
        max_iterations: base.max_iterations.max(STRANGENESS_MIN_ITERATIONS),
        ..*base
    }
}

/// Time pattern of a scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScanMode {
    /// t_n = t_m = t_n' = t_m' = T.
    Equal,
    /// t_n = t_m' = T, t_m = t_n' = 0.
    ZerosFirst,
    /// t_n = t_m' = 0, t_m = t_n' = T.
    ZerosSecond,
}

impl ScanMode {
    /// (t_n, t_m, t_n', t_m') for a given T.
    pub fn times(&self, t: f64) -> [f64; 4] {
        match self {
            ScanMode::Equal => [t; 4],
            ScanMode::ZerosFirst => [t, 0.0, 0.0, t],
            ScanMode::ZerosSecond => [0.0, t, t, 0.0],
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ScanMode::Equal => "equal",
            ScanMode::ZerosFirst => "zeros_first",
            ScanMode::ZerosSecond => "zeros_second",
        }
    }
}

impl std::str::FromStr for ScanMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "equal" => Ok(ScanMode::Equal),
            "zeros_first" | "zeros-first" => Ok(ScanMode::ZerosFirst),
            "zeros_second" | "zeros-second" => Ok(ScanMode::ZerosSecond),
            other => Err(Error::InvalidConfig(format!(
                "unknown scan mode `{other}` (expected equal, zeros_first or zeros_second)"
            ))),
        }
    }
}

/// One grid point of a scan.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanPoint {
    pub t: f64,
    pub outcome: Result<ChshOptimum>,
}

/// Seed for grid point `index`, independent of evaluation order.
pub fn point_seed(master: u64, index: usize) -> u64 {
    // splitmix64 finalizer
    let mut z = master ^ (index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs [`maximize_chsh`] for every T of the grid with the mode's time
/// pattern. Points run in parallel; the output follows grid order.
pub fn scan_times(
    mode: ScanMode,
    grid: &[f64],
    physics: &KaonPhysics,
    config: &OptimizerConfig,
) -> Vec<ScanPoint> {
    grid.par_iter()
        .enumerate()
        .map(|(i, &t)| {
            let cfg = config.with_seed(point_seed(config.seed, i));
            ScanPoint {
                t,
                outcome: maximize_chsh(mode.times(t), physics, &cfg),
            }
        })
        .collect()
}

/// CHSH values above this are numerically impossible and indicate a bug.
pub fn within_tsirelson(s: f64) -> bool {
    s <= TSIRELSON_BOUND + 1e-9
}
