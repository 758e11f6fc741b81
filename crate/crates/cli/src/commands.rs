use kaon_bell::bell::{cp_bell_test, CP_TEST_CAVEAT};
use kaon_bell::dynamics::{
    build_lindblad, effective_propagator, integrate_master, ExtendedDensity, DEFAULT_STEP,
};
use kaon_bell::optimize::{
    maximize_strangeness, maximize_strangeness_times, scan_times, strangeness_search_config,
    OptimizerConfig, ScanMode, TimeGrid,
};
use kaon_bell::pair::singlet;
use kaon_bell::physics::real_epsilon_from_delta;
use kaon_bell::{KaonPhysics, Quasispin, C64};

use crate::table::{Cell, Table};
use crate::CliError;

/// K_S mean lifetime in seconds, used only for physical-unit display.
pub const TAU_S_SECONDS: f64 = 0.8954e-10;

/// Measured leptonic asymmetry δ and its uncertainty.
pub const MEASURED_DELTA: f64 = 3.27e-3;
pub const MEASURED_DELTA_SIGMA: f64 = 0.12e-3;

pub const OSCILLATION_COLUMNS: [&str; 5] = [
    "t",
    "p_k0_to_k0",
    "p_k0_to_k0bar",
    "trace_rho_ss",
    "trace_rho_ff",
];
pub const SCAN_COLUMNS: [&str; 4] = ["T", "S_max", "reduced_purity", "converged"];
pub const STRANGENESS_COLUMNS: [&str; 17] = [
    "S_max",
    "t_n",
    "t_m",
    "t_np",
    "t_mp",
    "c00_re",
    "c00_im",
    "c01_re",
    "c01_im",
    "c10_re",
    "c10_im",
    "c11_re",
    "c11_im",
    "reduced_purity",
    "restart_spread",
    "singlet_S_max",
    "converged",
];
pub const CP_COLUMNS: [&str; 7] = [
    "delta",
    "violated",
    "margin",
    "measured_delta",
    "measured_sigma",
    "verdict",
    "caveat",
];

fn grid(t_max: f64, step: f64, allow_zero: bool) -> Result<Vec<f64>, CliError> {
    if !(t_max.is_finite() && (t_max > 0.0 || allow_zero && t_max == 0.0)) {
        let bound = if allow_zero {
            "non-negative"
        } else {
            "positive"
        };
        return Err(CliError::Config(format!(
            "t_max must be {bound}, got {t_max}"
        )));
    }
    if !(step.is_finite() && step > 0.0) {
        return Err(CliError::Config(format!(
            "step must be positive, got {step}"
        )));
    }
    let n = (t_max / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| i as f64 * step).collect())
}

fn with_seconds(mut table: Table, time_column: &str, name: &str) -> Table {
    let idx = table.column(time_column).expect("time column");
    table.columns.push(name.to_string());
    for row in &mut table.rows {
        let seconds = match row[idx] {
            Cell::Real(t) => t * TAU_S_SECONDS,
            _ => f64::NAN,
        };
        row.push(Cell::Real(seconds));
    }
    table
}

/// Strangeness oscillation of an initial K⁰: transition probabilities from
/// the analytic propagator, surviving and decayed weights from the
/// master equation.
pub fn cmd_oscillation(
    physics: &KaonPhysics,
    t_max: f64,
    step: f64,
    physical_units: bool,
) -> Result<Table, CliError> {
    let times = grid(t_max, step, false)?;
    let bundle = build_lindblad(physics, &[])?;
    let mut rho = ExtendedDensity::pure_surviving(&Quasispin::k0());
    let mut table = Table::new(&OSCILLATION_COLUMNS);
    let mut last_t = 0.0;
    for &t in &times {
        rho = integrate_master(&bundle, &rho, t - last_t, DEFAULT_STEP)?;
        last_t = t;
        let u = effective_propagator(physics, t)?;
        table.push(vec![
            Cell::Real(t),
            Cell::Real(u[(0, 0)].norm_sqr()),
            Cell::Real(u[(1, 0)].norm_sqr()),
            Cell::Real(rho.trace_surviving()),
            Cell::Real(rho.trace_final()),
        ]);
    }
    Ok(if physical_units {
        with_seconds(table, "t", "t_seconds")
    } else {
        table
    })
}

/// CHSH maximized over quasi-spins and state along one time pattern.
pub fn cmd_scan(
    physics: &KaonPhysics,
    config: &OptimizerConfig,
    mode: ScanMode,
    t_max: f64,
    step: f64,
    physical_units: bool,
) -> Result<Table, CliError> {
    config.validate()?;
    let times = grid(t_max, step, true)?;
    let mut table = Table::new(&SCAN_COLUMNS);
    for point in scan_times(mode, &times, physics, config) {
        let row = match point.outcome {
            Ok(opt) => vec![
                Cell::Real(point.t),
                Cell::Real(opt.s_max),
                Cell::Real(opt.state.reduced_purity()),
                Cell::Bool(opt.converged),
            ],
            Err(_) => vec![
                Cell::Real(point.t),
                Cell::Real(f64::NAN),
                Cell::Real(f64::NAN),
                Cell::Bool(false),
            ],
        };
        table.push(row);
    }
    Ok(if physical_units {
        with_seconds(table, "T", "T_seconds")
    } else {
        table
    })
}

/// Strangeness CHSH (all quasi-spins K̄⁰) maximized over the four times and the
/// initial pure state, with the singlet's best value for contrast.
pub fn cmd_strangeness_opt(
    physics: &KaonPhysics,
    config: &OptimizerConfig,
) -> Result<Table, CliError> {
    config.validate()?;
    let search = strangeness_search_config(config);
    let free = maximize_strangeness(physics, &search)?;
    let pinned = maximize_strangeness_times(&singlet(), physics, &TimeGrid::default(), config)?;

    let mut row = vec![Cell::Real(free.s_max)];
    row.extend(free.times.iter().map(|t| Cell::Real(*t)));
    for a in free.state.amplitudes() {
        row.push(Cell::Real(a.re));
        row.push(Cell::Real(a.im));
    }
    row.push(Cell::Real(free.state.reduced_purity()));
    row.push(Cell::Real(free.spread()));
    row.push(Cell::Real(pinned.s_max));
    row.push(Cell::Bool(free.converged));
    let mut table = Table::new(&STRANGENESS_COLUMNS);
    table.push(row);
    Ok(table)
}

/// Which CP parameter the user supplied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CpInput {
    Delta(f64),
    Epsilon(f64),
}

impl CpInput {
    pub fn from_flags(delta: Option<f64>, epsilon: Option<f64>) -> Result<Self, CliError> {
        match (delta, epsilon) {
            (Some(d), None) => Ok(CpInput::Delta(d)),
            (None, Some(e)) => Ok(CpInput::Epsilon(e)),
            _ => Err(CliError::Config(
                "provide exactly one of --delta or --epsilon".into(),
            )),
        }
    }
}

/// The δ ≤ 0 test for a given δ or real ε.
pub fn cmd_cp_check(physics: &KaonPhysics, input: CpInput) -> Result<Table, CliError> {
    let epsilon = match input {
        CpInput::Delta(d) => real_epsilon_from_delta(d)?,
        CpInput::Epsilon(e) => e,
    };
    let physics = KaonPhysics::new(
        physics.gamma_s(),
        physics.gamma_l(),
        physics.delta_m(),
        C64::new(epsilon, 0.0),
    )?;
    let verdict = cp_bell_test(&physics);
    let text = if verdict.violated {
        format!("VIOLATED, margin {:+.2e}", verdict.margin)
    } else if verdict.delta == 0.0 {
        format!("not violated (boundary), margin {:+.2e}", verdict.margin)
    } else {
        format!("not violated, margin {:+.2e}", verdict.margin)
    };
    let mut table = Table::new(&CP_COLUMNS);
    table.push(vec![
        Cell::Real(verdict.delta),
        Cell::Bool(verdict.violated),
        Cell::Real(verdict.margin),
        Cell::Real(MEASURED_DELTA),
        Cell::Real(MEASURED_DELTA_SIGMA),
        Cell::Text(text),
        Cell::Text(CP_TEST_CAVEAT.to_string()),
    ]);
    Ok(table)
}
