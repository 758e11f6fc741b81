//! Two-kaon states and their joint detection statistics.
//!
//! A measurement asks "is the kaon in quasi-spin |k⟩ at time t?". NO lumps
//! together a surviving kaon orthogonal to |k⟩ and a kaon that has already
//! decayed, so all probabilities are computed on the unnormalized surviving
//! amplitude.

use nalgebra::DMatrix;

use crate::dynamics::{build_lindblad, check_time, propagator_unchecked, PairLindblad};
use crate::error::{Error, Result};
use crate::linalg::{c, kron, Mat2, C64, ZERO};
use crate::physics::{KaonPhysics, Quasispin, NORM_TOLERANCE};

/// Pure two-kaon state with amplitudes on |K⁰K⁰⟩, |K⁰K̄⁰⟩, |K̄⁰K⁰⟩, |K̄⁰K̄⁰⟩
/// (left factor first).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BipartiteState {
    amplitudes: [C64; 4],
}

impl BipartiteState {
    pub fn new(amplitudes: [C64; 4]) -> Result<Self> {
        let norm_sq: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if !norm_sq.is_finite() || (norm_sq - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotNormalized { norm_sq });
        }
        Ok(Self { amplitudes })
    }

    pub fn normalized(amplitudes: [C64; 4]) -> Result<Self> {
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::NotNormalized {
                norm_sq: norm * norm,
            });
        }
        Ok(Self {
            amplitudes: amplitudes.map(|a| a / norm),
        })
    }

    pub fn amplitudes(&self) -> [C64; 4] {
        self.amplitudes
    }

    pub fn c00(&self) -> C64 {
        self.amplitudes[0]
    }

    pub fn c01(&self) -> C64 {
        self.amplitudes[1]
    }

    pub fn c10(&self) -> C64 {
        self.amplitudes[2]
    }

    pub fn c11(&self) -> C64 {
        self.amplitudes[3]
    }

    /// Coefficient matrix M with ψ = Σ M_ij |i⟩_l |j⟩_r.
    pub fn coefficients(&self) -> Mat2 {
        let a = self.amplitudes;
        Mat2::new(a[0], a[1], a[2], a[3])
    }

    /// Applies U_l ⊗ U_r, renormalizing the result.
    pub fn transformed(&self, u_left: &Mat2, u_right: &Mat2) -> Result<Self> {
        let m = u_left * self.coefficients() * u_right.transpose();
        Self::normalized([m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]])
    }

    /// Same ray with the first nonzero amplitude made real and positive.
    pub fn with_canonical_phase(&self) -> Self {
        match self.amplitudes.iter().find(|a| a.norm() > 1e-15) {
            Some(lead) => {
                let phase = lead.conj() / lead.norm();
                Self {
                    amplitudes: self.amplitudes.map(|a| a * phase),
                }
            }
            None => *self,
        }
    }

    /// |⟨self|other⟩|².
    pub fn fidelity(&self, other: &BipartiteState) -> f64 {
        self.amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| a.conj() * b)
            .sum::<C64>()
            .norm_sqr()
    }

    /// Reduced density matrix of the left kaon.
    pub fn reduced_left(&self) -> Mat2 {
        let m = self.coefficients();
        m * m.adjoint()
    }

    /// Tr ρ_l²: 1/2 for maximally entangled states, 1 for product states.
    pub fn reduced_purity(&self) -> f64 {
        let r = self.reduced_left();
        (r * r).trace().re
    }
}

/// (|K⁰K̄⁰⟩ − |K̄⁰K⁰⟩)/√2.
pub fn singlet() -> BipartiteState {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    BipartiteState {
        amplitudes: [ZERO, c(h, 0.0), c(-h, 0.0), ZERO],
    }
}

/// Probabilities of YES on both sides and of YES on each side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointOutcome {
    pub p_yy: f64,
    pub p_y_left: f64,
    pub p_y_right: f64,
}

impl JointOutcome {
    /// E = P(YY) − P(YN) − P(NY) + P(NN).
    pub fn expectation(&self) -> f64 {
        1.0 - 2.0 * self.p_y_left - 2.0 * self.p_y_right + 4.0 * self.p_yy
    }
}

/// One side of a measurement: the tested quasi-spin and the propagator to the
/// detection time.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Arm {
    bra: [C64; 2],
    propagator: Mat2,
}

impl Arm {
    pub(crate) fn new(physics: &KaonPhysics, k: &Quasispin, t: f64) -> Self {
        Self {
            bra: [k.alpha().conj(), k.beta().conj()],
            propagator: propagator_unchecked(physics, t),
        }
    }

    /// ⟨k| U(t) as a row vector.
    fn projected(&self) -> [C64; 2] {
        let u = &self.propagator;
        [
            self.bra[0] * u[(0, 0)] + self.bra[1] * u[(1, 0)],
            self.bra[0] * u[(0, 1)] + self.bra[1] * u[(1, 1)],
        ]
    }
}

pub(crate) fn joint_from_arms(m: &Mat2, left: &Arm, right: &Arm) -> JointOutcome {
    let l = left.projected();
    let r = right.projected();
    // a_j = Σ_i l_i M_ij,  b_i = Σ_j M_ij r_j
    let a = [
        l[0] * m[(0, 0)] + l[1] * m[(1, 0)],
        l[0] * m[(0, 1)] + l[1] * m[(1, 1)],
    ];
    let b = [
        m[(0, 0)] * r[0] + m[(0, 1)] * r[1],
        m[(1, 0)] * r[0] + m[(1, 1)] * r[1],
    ];
    let yy = a[0] * r[0] + a[1] * r[1];
    JointOutcome {
        p_yy: yy.norm_sqr(),
        p_y_left: a[0].norm_sqr() + a[1].norm_sqr(),
        p_y_right: b[0].norm_sqr() + b[1].norm_sqr(),
    }
}

fn check_quasispin(k: &Quasispin) -> Result<()> {
    Quasispin::new(k.alpha(), k.beta()).map(|_| ())
}

/// Joint YES probabilities from the factorized effective propagators.
pub fn joint_probabilities(
    state: &BipartiteState,
    physics: &KaonPhysics,
    k_left: &Quasispin,
    t_left: f64,
    k_right: &Quasispin,
    t_right: f64,
) -> Result<JointOutcome> {
    check_time(t_left)?;
    check_time(t_right)?;
    check_quasispin(k_left)?;
    check_quasispin(k_right)?;
    Ok(joint_from_arms(
        &state.coefficients(),
        &Arm::new(physics, k_left, t_left),
        &Arm::new(physics, k_right, t_right),
    ))
}

/// Correlation E in [−1, 1] under the lumped-NO convention.
pub fn expectation(
    state: &BipartiteState,
    physics: &KaonPhysics,
    k_left: &Quasispin,
    t_left: f64,
    k_right: &Quasispin,
    t_right: f64,
) -> Result<f64> {
    joint_probabilities(state, physics, k_left, t_left, k_right, t_right).map(|o| o.expectation())
}

/// The same probabilities obtained by integrating the two-kaon Lindblad
/// equation on the 16-dimensional enlarged space and projecting with
/// (P_k ⊕ 0) on each side. Much slower; used to cross-check
/// [`joint_probabilities`].
pub fn joint_probabilities_open_system(
    state: &BipartiteState,
    physics: &KaonPhysics,
    k_left: &Quasispin,
    t_left: f64,
    k_right: &Quasispin,
    t_right: f64,
    step: f64,
) -> Result<JointOutcome> {
    check_quasispin(k_left)?;
    check_quasispin(k_right)?;
    let bundle = build_lindblad(physics, &[])?;
    let pair = PairLindblad::new(&bundle);

    // strangeness index i of a surviving kaon sits at enlarged index i
    let mut psi = DMatrix::<C64>::zeros(16, 1);
    for (idx, amp) in state.amplitudes().iter().enumerate() {
        let (l, r) = (idx / 2, idx % 2);
        psi[(l * 4 + r, 0)] = *amp;
    }
    let rho0 = &psi * psi.adjoint();
    let rho = pair.evolve(&rho0, t_left, t_right, step)?;

    let projector = |k: &Quasispin| {
        let mut p = DMatrix::<C64>::zeros(4, 4);
        let v = [k.alpha(), k.beta()];
        for i in 0..2 {
            for j in 0..2 {
                p[(i, j)] = v[i] * v[j].conj();
            }
        }
        p
    };
    let id = DMatrix::<C64>::identity(4, 4);
    let pl = projector(k_left);
    let pr = projector(k_right);
    let expect = |op: DMatrix<C64>| (op * &rho).trace().re;
    Ok(JointOutcome {
        p_yy: expect(kron(&pl, &pr)),
        p_y_left: expect(kron(&pl, &id)),
        p_y_right: expect(kron(&id, &pr)),
    })
}
