//! CHSH-type Bell expressions for kaon pairs.
//!
//! Alice measures the left kaon with (k_n, t_n) or (k_n', t_n'), Bob the right
//! one with (k_m, t_m) or (k_m', t_m'), and
//!
//! S = |E(n, m) − E(n, m')| + |E(n', m) + E(n', m')|.
//!
//! Local realistic theories obey S ≤ 2.

use crate::dynamics::check_time;
use crate::error::Result;
use crate::pair::{joint_from_arms, Arm, BipartiteState};
use crate::physics::{KaonPhysics, Quasispin};

/// Upper bound on S for any quantum state, 2√2.
pub const TSIRELSON_BOUND: f64 = 2.0 * std::f64::consts::SQRT_2;

/// Four measurement settings, two per observer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BellSetting {
    pub k_n: Quasispin,
    pub k_m: Quasispin,
    pub k_np: Quasispin,
    pub k_mp: Quasispin,
    pub t_n: f64,
    pub t_m: f64,
    pub t_np: f64,
    pub t_mp: f64,
}

impl BellSetting {
    /// Quasi-spins in the order (k_n, k_m, k_n', k_m') and times in the same order.
    pub fn new(quasispins: [Quasispin; 4], times: [f64; 4]) -> Result<Self> {
        for k in &quasispins {
            Quasispin::new(k.alpha(), k.beta())?;
        }
        for &t in &times {
            check_time(t)?;
        }
        let [k_n, k_m, k_np, k_mp] = quasispins;
        let [t_n, t_m, t_np, t_mp] = times;
        Ok(Self {
            k_n,
            k_m,
            k_np,
            k_mp,
            t_n,
            t_m,
            t_np,
            t_mp,
        })
    }

    /// All quasi-spins set to K̄⁰; only the times vary.
    pub fn strangeness(times: [f64; 4]) -> Result<Self> {
        Self::new([Quasispin::k0bar(); 4], times)
    }

    pub fn times(&self) -> [f64; 4] {
        [self.t_n, self.t_m, self.t_np, self.t_mp]
    }

    pub fn quasispins(&self) -> [Quasispin; 4] {
        [self.k_n, self.k_m, self.k_np, self.k_mp]
    }
}

/// The four correlators (E(n,m), E(n,m'), E(n',m), E(n',m')).
pub fn correlators(
    setting: &BellSetting,
    state: &BipartiteState,
    physics: &KaonPhysics,
) -> [f64; 4] {
    let m = state.coefficients();
    let n = Arm::new(physics, &setting.k_n, setting.t_n);
    let np = Arm::new(physics, &setting.k_np, setting.t_np);
    let bob_m = Arm::new(physics, &setting.k_m, setting.t_m);
    let bob_mp = Arm::new(physics, &setting.k_mp, setting.t_mp);
    [
        joint_from_arms(&m, &n, &bob_m).expectation(),
        joint_from_arms(&m, &n, &bob_mp).expectation(),
        joint_from_arms(&m, &np, &bob_m).expectation(),
        joint_from_arms(&m, &np, &bob_mp).expectation(),
    ]
}

pub fn chsh_combination(e: [f64; 4]) -> f64 {
    (e[0] - e[1]).abs() + (e[2] + e[3]).abs()
}

/// CHSH value of a setting on a state.
pub fn chsh_value(
    setting: &BellSetting,
    state: &BipartiteState,
    physics: &KaonPhysics,
) -> Result<f64> {
    // Settings built through `new` are already valid; re-check fields that are
    // public and may have been edited.
    let setting = BellSetting::new(setting.quasispins(), setting.times())?;
    Ok(chsh_combination(correlators(&setting, state, physics)))
}

/// CHSH value with every quasi-spin fixed to K̄⁰, times in the order
/// (t_n, t_m, t_n', t_m').
pub fn strangeness_chsh(
    times: [f64; 4],
    state: &BipartiteState,
    physics: &KaonPhysics,
) -> Result<f64> {
    chsh_value(&BellSetting::strangeness(times)?, state, physics)
}

/// A deterministic local strategy: fixed ±1 answers for each of the four
/// settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LhvStrategy {
    pub a1: i8,
    pub a2: i8,
    pub b1: i8,
    pub b2: i8,
}

impl LhvStrategy {
    pub fn new(a1: i8, a2: i8, b1: i8, b2: i8) -> Option<Self> {
        [a1, a2, b1, b2]
            .iter()
            .all(|v| *v == 1 || *v == -1)
            .then_some(Self { a1, a2, b1, b2 })
    }

    /// All 16 deterministic strategies.
    pub fn all() -> impl Iterator<Item = LhvStrategy> {
        (0u8..16).map(|bits| {
            let s = |b: u8| if bits & (1 << b) == 0 { 1 } else { -1 };
            LhvStrategy {
                a1: s(0),
                a2: s(1),
                b1: s(2),
                b2: s(3),
            }
        })
    }

    /// |a1 b1 − a1 b2| + |a2 b1 + a2 b2|.
    pub fn value(&self) -> i32 {
        let (a1, a2, b1, b2) = (
            i32::from(self.a1),
            i32::from(self.a2),
            i32::from(self.b1),
            i32::from(self.b2),
        );
        (a1 * b1 - a1 * b2).abs() + (a2 * b1 + a2 * b2).abs()
    }
}

/// Classical CHSH bound by enumeration of deterministic strategies.
pub fn lhv_max() -> i32 {
    LhvStrategy::all().map(|s| s.value()).max().unwrap_or(0)
}

/// Outcome of the δ ≤ 0 test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CpBellVerdict {
    pub delta: f64,
    pub violated: bool,
    /// δ − 0; positive means violation.
    pub margin: f64,
}

/// Expectation values entering the CP form use K_S and K₁, which no
/// experiment can tell apart directly.
pub const CP_TEST_CAVEAT: &str =
    "K_S and K_1 are experimentally indistinguishable; the underlying expectation values are not directly measurable";

/// Local realism with CP-violating mixing requires δ ≤ 0.
pub fn cp_bell_test(physics: &KaonPhysics) -> CpBellVerdict {
    let delta = physics.delta();
    CpBellVerdict {
        delta,
        violated: delta > 0.0,
        margin: delta,
    }
}
