//! Kaon constants and the strangeness, mass and CP bases.
//!
//! Times are measured in units of the K_S lifetime, so with the defaults
//! `gamma_s = 1` and every rate below is a ratio to Γ_S.

use nalgebra::Vector2;

use crate::error::{Error, Result};
use crate::linalg::{c, Mat2, Vec2, C64, I, ONE, ZERO};

/// Normalization tolerance on |α|² + |β|².
pub const NORM_TOLERANCE: f64 = 1e-12;

/// Physical constants of the neutral kaon system.
///
/// Only the mass difference `delta_m = m_L - m_S` is stored; the absolute
/// mass scale contributes a global phase and never enters a probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KaonPhysics {
    gamma_s: f64,
    gamma_l: f64,
    delta_m: f64,
    epsilon: C64,
}

impl Default for KaonPhysics {
    fn default() -> Self {
        Self {
            gamma_s: 1.0,
            gamma_l: 1.0 / 600.0,
            delta_m: 0.474,
            epsilon: ZERO,
        }
    }
}

impl KaonPhysics {
    pub fn new(gamma_s: f64, gamma_l: f64, delta_m: f64, epsilon: C64) -> Result<Self> {
        let physics = Self {
            gamma_s,
            gamma_l,
            delta_m,
            epsilon,
        };
        physics.validate()?;
        Ok(physics)
    }

    /// Default constants with a different CP parameter.
    pub fn with_epsilon(epsilon: C64) -> Result<Self> {
        let d = Self::default();
        Self::new(d.gamma_s, d.gamma_l, d.delta_m, epsilon)
    }

    fn validate(&self) -> Result<()> {
        let finite = [
            self.gamma_s,
            self.gamma_l,
            self.delta_m,
            self.epsilon.re,
            self.epsilon.im,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidPhysics("non-finite constant".into()));
        }
        if self.gamma_s <= 0.0 || self.gamma_l <= 0.0 {
            return Err(Error::InvalidPhysics(
                "decay widths must be positive".into(),
            ));
        }
        if self.gamma_s <= self.gamma_l {
            return Err(Error::InvalidPhysics(format!(
                "gamma_s ({}) must exceed gamma_l ({})",
                self.gamma_s, self.gamma_l
            )));
        }
        let x = self.x();
        if !(x.is_finite() && x > 0.0) {
            return Err(Error::InvalidPhysics(format!(
                "x = delta_m / gamma must be finite and positive, got {x}"
            )));
        }
        if self.delta().abs() >= 1.0 {
            return Err(Error::InvalidPhysics("|delta| must be below 1".into()));
        }
        Ok(())
    }

    pub fn gamma_s(&self) -> f64 {
        self.gamma_s
    }

    pub fn gamma_l(&self) -> f64 {
        self.gamma_l
    }

    pub fn delta_m(&self) -> f64 {
        self.delta_m
    }

    pub fn epsilon(&self) -> C64 {
        self.epsilon
    }

    /// CP violation in mixing, δ = 2 Re ε / (1 + |ε|²).
    pub fn delta(&self) -> f64 {
        delta_from_epsilon(self.epsilon)
    }

    /// Oscillation-to-decay ratio Δm / Γ with Γ = (Γ_S + Γ_L) / 2.
    pub fn x(&self) -> f64 {
        self.delta_m / (0.5 * (self.gamma_s + self.gamma_l))
    }

    /// (K_S, K_L) with K_S ∝ (1+ε)|K⁰⟩ + (1−ε)|K̄⁰⟩ and
    /// K_L ∝ (1+ε)|K⁰⟩ − (1−ε)|K̄⁰⟩.
    pub fn mass_eigenstates(&self) -> (Quasispin, Quasispin) {
        let p = ONE + self.epsilon;
        let q = ONE - self.epsilon;
        let norm = (2.0 * (1.0 + self.epsilon.norm_sqr())).sqrt();
        (
            Quasispin::raw(p / norm, q / norm),
            Quasispin::raw(p / norm, -q / norm),
        )
    }

    /// Complex eigenvalues λ_{S/L} = m_{S/L} − (i/2) Γ_{S/L} of the effective
    /// Hamiltonian, with the mass origin fixed at m_S = 0.
    pub fn eigenvalues(&self) -> (C64, C64) {
        (
            c(0.0, -0.5 * self.gamma_s),
            c(self.delta_m, -0.5 * self.gamma_l),
        )
    }

    /// Matrix whose columns are K_S and K_L in the strangeness basis.
    pub fn mass_basis(&self) -> Mat2 {
        let (ks, kl) = self.mass_eigenstates();
        Mat2::from_columns(&[ks.to_vector(), kl.to_vector()])
    }

    /// Split H_eff = H − (i/2)Γ into its Hermitian mass and decay parts.
    pub fn effective_hamiltonian(&self) -> Result<EffectiveHamiltonian> {
        let v = self.mass_basis();
        let v_inv = v
            .try_inverse()
            .ok_or_else(|| Error::InvalidPhysics("mass eigenstates are degenerate".into()))?;
        let (ls, ll) = self.eigenvalues();
        let h_eff = v * Mat2::from_diagonal(&Vector2::new(ls, ll)) * v_inv;
        let h_eff_dag = h_eff.adjoint();
        let mass = (h_eff + h_eff_dag) * c(0.5, 0.0);
        let decay = (h_eff - h_eff_dag) * I;
        let decay = (decay + decay.adjoint()) * c(0.5, 0.0);
        let min = decay
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if min < -1e-12 * self.gamma_s {
            return Err(Error::IndefiniteDecayMatrix {
                min_eigenvalue: min,
            });
        }
        Ok(EffectiveHamiltonian { mass, decay })
    }
}

pub fn delta_from_epsilon(epsilon: C64) -> f64 {
    2.0 * epsilon.re / (1.0 + epsilon.norm_sqr())
}

/// Real ε reproducing a given δ; picks the root with |ε| ≤ 1.
pub fn real_epsilon_from_delta(delta: f64) -> Result<f64> {
    if !delta.is_finite() || delta.abs() >= 1.0 {
        return Err(Error::InvalidPhysics(format!(
            "|delta| must be below 1, got {delta}"
        )));
    }
    if delta == 0.0 {
        return Ok(0.0);
    }
    // δ ε² − 2ε + δ = 0, small root written to avoid cancellation.
    Ok(delta / (1.0 + (1.0 - delta * delta).sqrt()))
}

/// The two Hermitian parts of the effective Hamiltonian, in the strangeness
/// basis (K⁰, K̄⁰).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveHamiltonian {
    pub mass: Mat2,
    pub decay: Mat2,
}

impl EffectiveHamiltonian {
    pub fn h_eff(&self) -> Mat2 {
        self.mass - self.decay * c(0.0, 0.5)
    }
}

/// A yes/no quasi-spin test α|K⁰⟩ + β|K̄⁰⟩.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quasispin {
    alpha: C64,
    beta: C64,
}

impl Quasispin {
    pub fn new(alpha: C64, beta: C64) -> Result<Self> {
        let norm_sq = alpha.norm_sqr() + beta.norm_sqr();
        if !norm_sq.is_finite() || (norm_sq - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotNormalized { norm_sq });
        }
        Ok(Self { alpha, beta })
    }

    /// Rescales to unit norm. Fails only for the zero vector.
    pub fn normalized(alpha: C64, beta: C64) -> Result<Self> {
        let norm = (alpha.norm_sqr() + beta.norm_sqr()).sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::NotNormalized {
                norm_sq: norm * norm,
            });
        }
        Ok(Self {
            alpha: alpha / norm,
            beta: beta / norm,
        })
    }

    pub(crate) fn raw(alpha: C64, beta: C64) -> Self {
        Self { alpha, beta }
    }

    pub fn k0() -> Self {
        Self::raw(ONE, ZERO)
    }

    pub fn k0bar() -> Self {
        Self::raw(ZERO, ONE)
    }

    /// cos(θ/2)|K⁰⟩ + e^{iφ} sin(θ/2)|K̄⁰⟩; unit norm for every real input.
    pub fn from_angles(theta: f64, phi: f64) -> Self {
        let (s, co) = (0.5 * theta).sin_cos();
        Self::raw(c(co, 0.0), C64::from_polar(s, phi))
    }

    pub fn alpha(&self) -> C64 {
        self.alpha
    }

    pub fn beta(&self) -> C64 {
        self.beta
    }

    pub fn to_vector(&self) -> Vec2 {
        Vec2::new(self.alpha, self.beta)
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &Quasispin) -> C64 {
        self.alpha.conj() * other.alpha + self.beta.conj() * other.beta
    }

    /// Bloch vector with +z along K⁰.
    pub fn bloch_vector(&self) -> [f64; 3] {
        let off = self.alpha.conj() * self.beta;
        [
            2.0 * off.re,
            2.0 * off.im,
            self.alpha.norm_sqr() - self.beta.norm_sqr(),
        ]
    }
}

/// (K₁, K₂): CP-even and CP-odd combinations under CP|K⁰⟩ = |K̄⁰⟩.
pub fn cp_eigenstates() -> (Quasispin, Quasispin) {
    let h = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    (Quasispin::raw(h, h), Quasispin::raw(h, -h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const EPS_MEASURED: f64 = 1.635e-3;

    #[test]
    fn symmetric_mass_eigenstates() {
        let (ks, kl) = KaonPhysics::default().mass_eigenstates();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(ks.alpha().re, h, epsilon = 1e-15);
        assert_abs_diff_eq!(ks.beta().re, h, epsilon = 1e-15);
        assert_abs_diff_eq!(kl.alpha().re, h, epsilon = 1e-15);
        assert_abs_diff_eq!(kl.beta().re, -h, epsilon = 1e-15);
        assert_eq!(ks.inner(&kl).norm(), 0.0);
    }

    #[test]
    fn measured_epsilon_gives_measured_delta() {
        let p = KaonPhysics::with_epsilon(c(EPS_MEASURED, 0.0)).unwrap();
        assert_abs_diff_eq!(p.delta(), 3.27e-3, epsilon = 1e-8);
    }

    #[test]
    fn mass_eigenstate_overlap_is_delta_squared() {
        // |⟨K_S|K_L⟩|² expanded by hand:
        // (|1+ε|² − |1−ε|²) / (2(1+|ε|²)) = 4 Re ε / (2(1+|ε|²)) = δ.
        for &(re, im) in &[(1.635e-3, 0.0), (1.6e-3, 1.5e-3), (-0.02, 0.3), (0.4, -0.1)] {
            let eps = c(re, im);
            let p = KaonPhysics::with_epsilon(eps).unwrap();
            let (ks, kl) = p.mass_eigenstates();
            let expected = 2.0 * re / (1.0 + re * re + im * im);
            assert_abs_diff_eq!(
                ks.inner(&kl).norm_sqr(),
                expected * expected,
                epsilon = 1e-15
            );
            assert_abs_diff_eq!(ks.inner(&ks).re, 1.0, epsilon = 1e-15);
            assert_abs_diff_eq!(kl.inner(&kl).re, 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn cp_states_orthogonal_and_match_ks_at_zero_epsilon() {
        let (k1, k2) = cp_eigenstates();
        assert_eq!(k1.inner(&k2).norm(), 0.0);
        let (ks, _) = KaonPhysics::default().mass_eigenstates();
        assert_abs_diff_eq!(ks.inner(&k1).norm_sqr(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn ks_differs_from_k1_with_cp_violation() {
        let p = KaonPhysics::with_epsilon(c(EPS_MEASURED, 0.0)).unwrap();
        let (ks, _) = p.mass_eigenstates();
        let (k1, _) = cp_eigenstates();
        // ⟨K₁|K_S⟩ = ((1+ε)+(1−ε)) / (2 sqrt(1+ε²)) = 1/sqrt(1+ε²) for real ε.
        let overlap = ks.inner(&k1).norm_sqr();
        let expected = 1.0 / (1.0 + EPS_MEASURED * EPS_MEASURED);
        assert_abs_diff_eq!(overlap, expected, epsilon = 1e-15);
        assert!(overlap < 1.0);
    }

    #[test]
    fn decay_matrix_spectrum_at_zero_epsilon() {
        let eh = KaonPhysics::default().effective_hamiltonian().unwrap();
        let mut ev: Vec<f64> = eh.decay.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        assert_abs_diff_eq!(ev[0], 1.0 / 600.0, epsilon = 1e-15);
        assert_abs_diff_eq!(ev[1], 1.0, epsilon = 1e-15);
        // K⁰ ↔ K̄⁰ exchange symmetry.
        for m in [eh.mass, eh.decay] {
            assert!((m[(0, 0)] - m[(1, 1)]).norm() < 1e-15);
            assert!((m[(0, 1)] - m[(1, 0)]).norm() < 1e-15);
        }
    }

    #[test]
    fn effective_hamiltonian_round_trip() {
        for eps in [ZERO, c(EPS_MEASURED, 0.0), c(1.6e-3, 1.5e-3)] {
            let p = KaonPhysics::with_epsilon(eps).unwrap();
            let eh = p.effective_hamiltonian().unwrap();
            assert!((eh.mass - eh.mass.adjoint()).norm() < 1e-15);
            assert!((eh.decay - eh.decay.adjoint()).norm() < 1e-15);
            let h_eff = eh.h_eff();
            let (ks, kl) = p.mass_eigenstates();
            let (ls, ll) = p.eigenvalues();
            assert!((h_eff * ks.to_vector() - ks.to_vector() * ls).norm() < 1e-12);
            assert!((h_eff * kl.to_vector() - kl.to_vector() * ll).norm() < 1e-12);

            // Recover (Δm, Γ_S, Γ_L) from the eigenvalues of H_eff directly.
            let tr = h_eff.trace();
            let det = h_eff.determinant();
            let disc = (tr * tr - det * 4.0).sqrt();
            let mut roots = [(tr + disc) * 0.5, (tr - disc) * 0.5];
            roots.sort_by(|a, b| a.im.total_cmp(&b.im));
            let (short, long) = (roots[0], roots[1]);
            assert_abs_diff_eq!(-2.0 * short.im, p.gamma_s(), epsilon = 1e-10);
            assert_abs_diff_eq!(-2.0 * long.im, p.gamma_l(), epsilon = 1e-10);
            assert_abs_diff_eq!(long.re - short.re, p.delta_m(), epsilon = 1e-10);
        }
    }

    #[test]
    fn indefinite_decay_matrix_rejected() {
        // Nearly parallel K_S and K_L with very different widths cannot come
        // from a positive decay matrix.
        let err = KaonPhysics::with_epsilon(c(0.9, 0.0))
            .unwrap()
            .effective_hamiltonian()
            .unwrap_err();
        assert!(matches!(err, Error::IndefiniteDecayMatrix { .. }));
    }

    #[test]
    fn delta_monotone_near_zero() {
        assert_eq!(delta_from_epsilon(ZERO), 0.0);
        let mut last = f64::NEG_INFINITY;
        for k in -100..=100 {
            let d = delta_from_epsilon(c(k as f64 * 1e-4, 2e-3));
            assert!(d > last);
            last = d;
        }
    }

    #[test]
    fn epsilon_delta_inverse() {
        for d in [-0.5, -1e-4, 0.0, 3.27e-3, 0.9] {
            let e = real_epsilon_from_delta(d).unwrap();
            assert_abs_diff_eq!(delta_from_epsilon(c(e, 0.0)), d, epsilon = 1e-15);
        }
        assert!(real_epsilon_from_delta(1.0).is_err());
    }

    #[test]
    fn invalid_physics_rejected() {
        assert!(KaonPhysics::new(1.0, 2.0, 0.474, ZERO).is_err());
        assert!(KaonPhysics::new(0.0, -1.0, 0.474, ZERO).is_err());
        assert!(KaonPhysics::new(1.0, 0.1, 0.0, ZERO).is_err());
        assert!(KaonPhysics::new(1.0, 0.1, f64::NAN, ZERO).is_err());
        assert!(KaonPhysics::new(1.0, 0.1, 0.5, c(1.0, 0.0)).is_err());
    }

    #[test]
    fn default_x_is_about_one() {
        let x = KaonPhysics::default().x();
        assert_abs_diff_eq!(x, 0.474 / (0.5 * (1.0 + 1.0 / 600.0)), epsilon = 1e-15);
        assert!((0.9..1.0).contains(&x));
    }

    #[test]
    fn quasispin_normalization_enforced() {
        assert!(Quasispin::new(ONE, ONE).is_err());
        assert!(Quasispin::new(c(0.6, 0.0), c(0.0, 0.8)).is_ok());
        let q = Quasispin::normalized(ONE, c(0.0, 1.0)).unwrap();
        assert_abs_diff_eq!(q.inner(&q).re, 1.0, epsilon = 1e-15);
        assert!(Quasispin::normalized(ZERO, ZERO).is_err());
    }

    #[test]
    fn bloch_vectors_of_basis_states() {
        assert_eq!(Quasispin::k0().bloch_vector(), [0.0, 0.0, 1.0]);
        assert_eq!(Quasispin::k0bar().bloch_vector(), [0.0, 0.0, -1.0]);
        let (k1, _) = cp_eigenstates();
        let b = k1.bloch_vector();
        assert_abs_diff_eq!(b[0], 1.0, epsilon = 1e-15);
    }
}
