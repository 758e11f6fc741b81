//! Single-kaon time evolution.
//!
//! Two routes are provided. [`effective_propagator`] is the analytic
//! non-Hermitian evolution of the surviving component. [`build_lindblad`]
//! and [`integrate_master`] embed the same physics as a trace-preserving
//! Lindblad equation on the enlarged space H_s ⊕ H_f, where decay is a
//! jump from the surviving sector into the final one. Ordering of the
//! enlarged basis is (K⁰_s, K̄⁰_s, K⁰_f, K̄⁰_f).

use nalgebra::{DMatrix, Vector2};

use crate::error::{Error, Result};
use crate::linalg::{
    anticommutator, c, commutator, hermitian_eigenvalues, hermitian_sqrt2, kron, mat4_from_dynamic,
    max_abs, to_dynamic, Mat2, Mat4, C64, I, ZERO,
};
use crate::physics::{KaonPhysics, Quasispin};

/// Default RK4 step in units of τ_S.
pub const DEFAULT_STEP: f64 = 1e-3;

/// Eigenvalues below this are treated as an integration failure rather than
/// round-off.
pub const POSITIVITY_TOLERANCE: f64 = -1e-8;

/// Tolerance on the trace of an [`ExtendedDensity`].
pub const TRACE_TOLERANCE: f64 = 1e-10;

/// Analytic U_eff(t) = exp(−i H_eff t), built from the K_S/K_L
/// eigendecomposition.
pub fn effective_propagator(physics: &KaonPhysics, t: f64) -> Result<Mat2> {
    check_time(t)?;
    Ok(propagator_unchecked(physics, t))
}

pub(crate) fn propagator_unchecked(physics: &KaonPhysics, t: f64) -> Mat2 {
    let v = physics.mass_basis();
    // K_S and K_L are never parallel for a valid KaonPhysics.
    let v_inv = v.try_inverse().expect("mass basis is invertible");
    let (ls, ll) = physics.eigenvalues();
    let phase = |l: C64| (-I * l * t).exp();
    v * Mat2::from_diagonal(&Vector2::new(phase(ls), phase(ll))) * v_inv
}

pub(crate) fn check_time(t: f64) -> Result<()> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    if !t.is_finite() {
        return Err(Error::InvalidPhysics(format!(
            "time must be finite, got {t}"
        )));
    }
    Ok(())
}

fn check_step(step: f64) -> Result<()> {
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::InvalidStep(step));
    }
    Ok(())
}

/// Density matrix of the surviving component alone; its trace is the survival
/// probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurvivingDensity(Mat2);

impl SurvivingDensity {
    pub fn new(rho_ss: Mat2) -> Result<Self> {
        let d = to_dynamic(&rho_ss);
        check_hermitian_psd(&d)?;
        let tr = rho_ss.trace().re;
        if !(-TRACE_TOLERANCE..=1.0 + TRACE_TOLERANCE).contains(&tr) {
            return Err(Error::InvalidDensity(format!("trace {tr} outside [0, 1]")));
        }
        Ok(Self(rho_ss))
    }

    pub fn pure(k: &Quasispin) -> Self {
        let v = k.to_vector();
        Self(v * v.adjoint())
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    /// U_eff ρ U_eff†.
    pub fn evolve(&self, physics: &KaonPhysics, t: f64) -> Result<Self> {
        let u = effective_propagator(physics, t)?;
        Ok(Self(u * self.0 * u.adjoint()))
    }
}

fn check_hermitian_psd(m: &DMatrix<C64>) -> Result<()> {
    let defect = crate::linalg::hermiticity_defect(m);
    if defect > 1e-12 {
        return Err(Error::InvalidDensity(format!(
            "not Hermitian (defect {defect:e})"
        )));
    }
    let min = hermitian_eigenvalues(m)[0];
    if min < POSITIVITY_TOLERANCE {
        return Err(Error::InvalidDensity(format!(
            "negative eigenvalue {min:e}"
        )));
    }
    Ok(())
}

/// Density matrix on H_s ⊕ H_f in 2×2 blocks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtendedDensity {
    pub rho_ss: Mat2,
    pub rho_sf: Mat2,
    pub rho_fs: Mat2,
    pub rho_ff: Mat2,
}

impl ExtendedDensity {
    /// Validates Hermiticity, positivity and unit total trace.
    pub fn new(rho_ss: Mat2, rho_sf: Mat2, rho_ff: Mat2) -> Result<Self> {
        let d = Self {
            rho_ss,
            rho_sf,
            rho_fs: rho_sf.adjoint(),
            rho_ff,
        };
        d.validate(POSITIVITY_TOLERANCE)?;
        Ok(d)
    }

    /// A kaon that has not decayed yet: ρ_sf = ρ_ff = 0.
    pub fn surviving(rho_ss: Mat2) -> Result<Self> {
        Self::new(rho_ss, Mat2::zeros(), Mat2::zeros())
    }

    pub fn pure_surviving(k: &Quasispin) -> Self {
        let v = k.to_vector();
        Self {
            rho_ss: v * v.adjoint(),
            rho_sf: Mat2::zeros(),
            rho_fs: Mat2::zeros(),
            rho_ff: Mat2::zeros(),
        }
    }

    pub fn from_matrix(m: &Mat4) -> Self {
        Self {
            rho_ss: m.fixed_view::<2, 2>(0, 0).into_owned(),
            rho_sf: m.fixed_view::<2, 2>(0, 2).into_owned(),
            rho_fs: m.fixed_view::<2, 2>(2, 0).into_owned(),
            rho_ff: m.fixed_view::<2, 2>(2, 2).into_owned(),
        }
    }

    pub fn to_matrix(&self) -> Mat4 {
        let mut m = Mat4::zeros();
        m.fixed_view_mut::<2, 2>(0, 0).copy_from(&self.rho_ss);
        m.fixed_view_mut::<2, 2>(0, 2).copy_from(&self.rho_sf);
        m.fixed_view_mut::<2, 2>(2, 0).copy_from(&self.rho_fs);
        m.fixed_view_mut::<2, 2>(2, 2).copy_from(&self.rho_ff);
        m
    }

    pub fn trace_surviving(&self) -> f64 {
        self.rho_ss.trace().re
    }

    pub fn trace_final(&self) -> f64 {
        self.rho_ff.trace().re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigenvalues(&to_dynamic(&self.to_matrix()))[0]
    }

    fn validate(&self, positivity_tolerance: f64) -> Result<()> {
        let m = to_dynamic(&self.to_matrix());
        let defect = crate::linalg::hermiticity_defect(&m);
        if defect > 1e-12 {
            return Err(Error::InvalidDensity(format!(
                "not Hermitian (defect {defect:e})"
            )));
        }
        let tr = self.trace_surviving() + self.trace_final();
        if (tr - 1.0).abs() > TRACE_TOLERANCE {
            return Err(Error::InvalidDensity(format!(
                "total trace {tr} differs from 1"
            )));
        }
        let min = hermitian_eigenvalues(&m)[0];
        if min < positivity_tolerance {
            return Err(Error::InvalidDensity(format!(
                "negative eigenvalue {min:e}"
            )));
        }
        Ok(())
    }
}

/// A Lindblad operator on the enlarged single-kaon space.
#[derive(Debug, Clone, PartialEq)]
pub struct LindbladGenerator {
    pub label: String,
    pub matrix: Mat4,
}

impl LindbladGenerator {
    /// Embeds A acting on H_s as A ⊕ 0.
    pub fn on_surviving(label: impl Into<String>, a: Mat2) -> Self {
        let mut m = Mat4::zeros();
        m.fixed_view_mut::<2, 2>(0, 0).copy_from(&a);
        Self {
            label: label.into(),
            matrix: m,
        }
    }

    /// The decay jump A₀, with B: H_s → H_f in the lower-left block.
    pub fn decay(b: Mat2) -> Self {
        let mut m = Mat4::zeros();
        m.fixed_view_mut::<2, 2>(2, 0).copy_from(&b);
        Self {
            label: "decay".into(),
            matrix: m,
        }
    }

    /// Arbitrary operator on the enlarged space; [`build_lindblad`] rejects it
    /// unless it only touches the surviving block.
    pub fn raw(label: impl Into<String>, matrix: Mat4) -> Self {
        Self {
            label: label.into(),
            matrix,
        }
    }

    pub fn surviving_block(&self) -> Mat2 {
        self.matrix.fixed_view::<2, 2>(0, 0).into_owned()
    }

    fn acts_only_on_surviving(&self) -> bool {
        self.matrix.iter().enumerate().all(|(idx, v)| {
            // column-major: idx = col * 4 + row
            let (row, col) = (idx % 4, idx / 4);
            (row < 2 && col < 2) || *v == ZERO
        })
    }
}

/// Pure dephasing in the K_S/K_L basis, √λ·diag(1, −1).
pub fn dephasing_generator(physics: &KaonPhysics, lambda: f64) -> LindbladGenerator {
    let v = physics.mass_basis();
    let v_inv = v.try_inverse().expect("mass basis is invertible");
    let a = v
        * Mat2::from_diagonal(&Vector2::new(c(1.0, 0.0), c(-1.0, 0.0)))
        * v_inv
        * c(lambda.sqrt(), 0.0);
    LindbladGenerator::on_surviving(format!("dephasing(lambda={lambda})"), a)
}

/// Generic Lindblad equation dρ/dt = −i[H, ρ] − ½ Σ (A†Aρ + ρA†A − 2AρA†).
#[derive(Debug, Clone, PartialEq)]
pub struct LindbladSystem {
    hamiltonian: DMatrix<C64>,
    jumps: Vec<DMatrix<C64>>,
    // Σ A†A, cached.
    loss: DMatrix<C64>,
}

impl LindbladSystem {
    pub fn new(hamiltonian: DMatrix<C64>, jumps: Vec<DMatrix<C64>>) -> Self {
        let n = hamiltonian.nrows();
        let loss = jumps
            .iter()
            .fold(DMatrix::zeros(n, n), |acc, a| acc + a.adjoint() * a);
        Self {
            hamiltonian,
            jumps,
            loss,
        }
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.nrows()
    }

    pub fn rhs(&self, rho: &DMatrix<C64>) -> DMatrix<C64> {
        let mut out = commutator(&self.hamiltonian, rho) * (-I)
            - anticommutator(&self.loss, rho) * c(0.5, 0.0);
        for a in &self.jumps {
            out += a * rho * a.adjoint();
        }
        out
    }

    /// Fixed-step classical RK4 from 0 to `t`. The step is shortened so that
    /// an integer number of steps lands exactly on `t`.
    pub fn evolve(&self, rho: &DMatrix<C64>, t: f64, step: f64) -> DMatrix<C64> {
        let mut out = rho.clone();
        let (n, h) = step_count(t, step);
        for _ in 0..n {
            out = self.rk4_step(&out, h);
        }
        out
    }

    pub fn rk4_step(&self, rho: &DMatrix<C64>, h: f64) -> DMatrix<C64> {
        let hc = c(h, 0.0);
        let half = c(0.5 * h, 0.0);
        let k1 = self.rhs(rho);
        let k2 = self.rhs(&(rho + &k1 * half));
        let k3 = self.rhs(&(rho + &k2 * half));
        let k4 = self.rhs(&(rho + &k3 * hc));
        rho + (k1 + k2 * c(2.0, 0.0) + k3 * c(2.0, 0.0) + k4) * c(h / 6.0, 0.0)
    }
}

fn step_count(t: f64, step: f64) -> (usize, f64) {
    if t == 0.0 {
        return (0, 0.0);
    }
    let n = (t / step).ceil().max(1.0) as usize;
    (n, t / n as f64)
}

/// Everything needed to integrate the single-kaon master equation.
#[derive(Debug, Clone, PartialEq)]
pub struct LindbladBundle {
    physics: KaonPhysics,
    mass: Mat2,
    decay_map: Mat2,
    generators: Vec<LindbladGenerator>,
    system: LindbladSystem,
}

impl LindbladBundle {
    pub fn physics(&self) -> &KaonPhysics {
        &self.physics
    }

    /// 𝓗 = H ⊕ 0.
    pub fn hamiltonian(&self) -> Mat4 {
        let mut m = Mat4::zeros();
        m.fixed_view_mut::<2, 2>(0, 0).copy_from(&self.mass);
        m
    }

    /// B: H_s → H_f with B†B = Γ.
    pub fn decay_map(&self) -> &Mat2 {
        &self.decay_map
    }

    /// A₀ first, then the user generators in the order given.
    pub fn generators(&self) -> &[LindbladGenerator] {
        &self.generators
    }

    pub fn system(&self) -> &LindbladSystem {
        &self.system
    }
}

/// Builds 𝓗 = H ⊕ 0, the decay jump A₀ with B the principal square root of
/// Γ, and appends the extra generators, which must act on H_s only.
pub fn build_lindblad(
    physics: &KaonPhysics,
    extra: &[LindbladGenerator],
) -> Result<LindbladBundle> {
    if let Some(bad) = extra.iter().find(|g| !g.acts_only_on_surviving()) {
        return Err(Error::GeneratorOnFinalSpace(bad.label.clone()));
    }
    let eh = physics.effective_hamiltonian()?;
    let b = hermitian_sqrt2(&eh.decay, 1e-12)
        .map_err(|min_eigenvalue| Error::IndefiniteDecayMatrix { min_eigenvalue })?;
    let mut generators = Vec::with_capacity(extra.len() + 1);
    generators.push(LindbladGenerator::decay(b));
    generators.extend(extra.iter().cloned());

    let mut hamiltonian = Mat4::zeros();
    hamiltonian.fixed_view_mut::<2, 2>(0, 0).copy_from(&eh.mass);
    let system = LindbladSystem::new(
        to_dynamic(&hamiltonian),
        generators.iter().map(|g| to_dynamic(&g.matrix)).collect(),
    );
    Ok(LindbladBundle {
        physics: *physics,
        mass: eh.mass,
        decay_map: b,
        generators,
        system,
    })
}

/// RK4 integration of the enlarged-space master equation up to `t`.
///
/// The result is checked for Hermiticity and positivity; an eigenvalue below
/// [`POSITIVITY_TOLERANCE`] is reported as [`Error::IntegrationAccuracy`].
pub fn integrate_master(
    bundle: &LindbladBundle,
    initial: &ExtendedDensity,
    t: f64,
    step: f64,
) -> Result<ExtendedDensity> {
    check_time(t)?;
    check_step(step)?;
    initial.validate(POSITIVITY_TOLERANCE)?;
    let rho = bundle
        .system
        .evolve(&to_dynamic(&initial.to_matrix()), t, step);
    finish(ExtendedDensity::from_matrix(&mat4_from_dynamic(&rho)))
}

/// Like [`integrate_master`] but keeps every RK4 node, starting with `(0, initial)`.
pub fn integrate_master_samples(
    bundle: &LindbladBundle,
    initial: &ExtendedDensity,
    t: f64,
    step: f64,
) -> Result<Vec<(f64, ExtendedDensity)>> {
    check_time(t)?;
    check_step(step)?;
    initial.validate(POSITIVITY_TOLERANCE)?;
    let (n, h) = step_count(t, step);
    let mut rho = to_dynamic(&initial.to_matrix());
    let mut out = Vec::with_capacity(n + 1);
    out.push((0.0, *initial));
    for i in 1..=n {
        rho = bundle.system.rk4_step(&rho, h);
        out.push((
            i as f64 * h,
            ExtendedDensity::from_matrix(&mat4_from_dynamic(&rho)),
        ));
    }
    if let Some((_, last)) = out.last() {
        finish(*last)?;
    }
    Ok(out)
}

fn finish(d: ExtendedDensity) -> Result<ExtendedDensity> {
    let min = d.min_eigenvalue();
    if min < POSITIVITY_TOLERANCE {
        return Err(Error::IntegrationAccuracy {
            min_eigenvalue: min,
        });
    }
    d.validate(f64::NEG_INFINITY)?;
    Ok(d)
}

/// Choi matrix Σ_ij |i⟩⟨j| ⊗ Φ_t(|i⟩⟨j|) of the single-kaon evolution map on
/// the enlarged space, with rows indexed by `input * 4 + output`.
pub fn choi_matrix(bundle: &LindbladBundle, t: f64) -> Result<DMatrix<C64>> {
    choi_matrix_with_step(bundle, t, DEFAULT_STEP)
}

pub fn choi_matrix_with_step(bundle: &LindbladBundle, t: f64, step: f64) -> Result<DMatrix<C64>> {
    check_time(t)?;
    check_step(step)?;
    let mut choi = DMatrix::zeros(16, 16);
    for i in 0..4 {
        for j in 0..4 {
            let mut unit = DMatrix::zeros(4, 4);
            unit[(i, j)] = c(1.0, 0.0);
            let image = bundle.system.evolve(&unit, t, step);
            if image.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
                return Err(Error::IntegrationAccuracy {
                    min_eigenvalue: f64::NAN,
                });
            }
            for k in 0..4 {
                for l in 0..4 {
                    choi[(i * 4 + k, j * 4 + l)] = image[(k, l)];
                }
            }
        }
    }
    Ok(choi)
}

/// Two-kaon Lindblad equations on (H_s ⊕ H_f)^{⊗2}, one per stage of a
/// measurement schedule: both kaons evolving, or only one of them.
#[derive(Debug, Clone)]
pub struct PairLindblad {
    both: LindbladSystem,
    left_only: LindbladSystem,
    right_only: LindbladSystem,
}

impl PairLindblad {
    /// Uses 𝓗⊗1 + 1⊗𝓗 and one jump A⊗1, 1⊗A for every single-kaon
    /// generator, so each kaon decays independently.
    pub fn new(bundle: &LindbladBundle) -> Self {
        let id = DMatrix::<C64>::identity(4, 4);
        let h = to_dynamic(&bundle.hamiltonian());
        let h_left = kron(&h, &id);
        let h_right = kron(&id, &h);
        let jumps_left: Vec<_> = bundle
            .generators
            .iter()
            .map(|g| kron(&to_dynamic(&g.matrix), &id))
            .collect();
        let jumps_right: Vec<_> = bundle
            .generators
            .iter()
            .map(|g| kron(&id, &to_dynamic(&g.matrix)))
            .collect();
        let both = LindbladSystem::new(
            &h_left + &h_right,
            jumps_left
                .iter()
                .chain(jumps_right.iter())
                .cloned()
                .collect(),
        );
        Self {
            both,
            left_only: LindbladSystem::new(h_left, jumps_left),
            right_only: LindbladSystem::new(h_right, jumps_right),
        }
    }

    /// Evolves the left kaon for `t_left` and the right kaon for `t_right`.
    pub fn evolve(
        &self,
        rho: &DMatrix<C64>,
        t_left: f64,
        t_right: f64,
        step: f64,
    ) -> Result<DMatrix<C64>> {
        check_time(t_left)?;
        check_time(t_right)?;
        check_step(step)?;
        let common = t_left.min(t_right);
        let rho = self.both.evolve(rho, common, step);
        let rho = if t_left > common {
            self.left_only.evolve(&rho, t_left - common, step)
        } else {
            self.right_only.evolve(&rho, t_right - common, step)
        };
        if max_abs(&rho).is_nan() {
            return Err(Error::IntegrationAccuracy {
                min_eigenvalue: f64::NAN,
            });
        }
        Ok(rho)
    }
}
