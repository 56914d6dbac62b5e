//! Effective dynamics of a single mode under passive coherent feedback.
//!
//! The mode couples to `l + m` ports with equal rate `γ`. The `l` outputs
//! of the first interfaces pass, together with `n_anc` thermal ancillas,
//! through an interferometer `Z = [[E, F], [G, H]]`; the first `m` outputs
//! of `Z` are fed back into the remaining `m` inputs. Tracing out the
//! ancillas and eliminating the outputs through the boundary condition
//! `r_out = √γ r − r_in` leaves an ordinary open system with
//!
//! ```text
//! C_cf = (C_l − C_m E | C_m F)
//! H_cf = H_S + C_m E Γ_l + Γ_lᵀ Eᵀ C_mᵀ
//! ```
//!
//! where `C_k = √γ (Ωᵀ … Ωᵀ)` and `Γ_k = √γ (1₂ … 1₂)ᵀ`.

use nalgebra::Complex;
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    check_nbar, check_rate, diffusion_matrix, drift_matrix, is_hurwitz, CouplingMatrix,
    CovarianceMatrix, OpenSystem, QuadraticHamiltonian, DEFAULT_STABILITY_MARGIN,
};
use crate::symplectic::{
    epsilon_sum, omega_matrix, MatrixRecord, PassiveTransform, DEFAULT_TOLERANCE,
};
use crate::{Error, Matrix, Result};

/// Port and ancilla counts of a feedback loop.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeedbackTopology {
    /// `l`: ports fed by the environment whose outputs enter `Z`.
    pub direct_ports: usize,
    /// `m`: ports whose inputs are outputs of `Z`.
    pub feedback_ports: usize,
    /// `n_anc`: thermal ancilla modes entering `Z`.
    pub ancillas: usize,
    /// Coupling rate `γ` shared by every port.
    pub gamma: f64,
}

impl FeedbackTopology {
    pub fn new(
        direct_ports: usize,
        feedback_ports: usize,
        ancillas: usize,
        gamma: f64,
    ) -> Result<Self> {
        check_rate("coupling rate γ", gamma)?;
        if direct_ports == 0 || feedback_ports == 0 {
            return Err(Error::InvalidDimension(
                "a feedback loop needs at least one direct and one fed-back port".into(),
            ));
        }
        if feedback_ports > direct_ports + ancillas {
            return Err(Error::InvalidDimension(format!(
                "{feedback_ports} fed-back ports exceed the {} interferometer outputs",
                direct_ports + ancillas
            )));
        }
        Ok(Self {
            direct_ports,
            feedback_ports,
            ancillas,
            gamma,
        })
    }

    /// One direct port, one fed-back port, one ancilla.
    pub fn simple(gamma: f64) -> Result<Self> {
        Self::new(1, 1, 1, gamma)
    }

    /// Modes the interferometer acts on, `l + n_anc`.
    pub fn interferometer_modes(&self) -> usize {
        self.direct_ports + self.ancillas
    }

    /// `l + m`.
    pub fn total_ports(&self) -> usize {
        self.direct_ports + self.feedback_ports
    }
}

/// `C_k = √γ (Ωᵀ … Ωᵀ)` and `Γ_k = √γ (1₂ … 1₂)ᵀ`.
#[derive(Clone, Debug, PartialEq)]
pub struct StackMatrices {
    pub coupling: Matrix,
    pub boundary: Matrix,
}

impl StackMatrices {
    pub fn new(k: usize, gamma: f64) -> Self {
        let s = gamma.sqrt();
        let wt = omega_matrix(1).transpose();
        let mut coupling = Matrix::zeros(2, 2 * k);
        let mut boundary = Matrix::zeros(2 * k, 2);
        for j in 0..k {
            coupling.view_mut((0, 2 * j), (2, 2)).copy_from(&(&wt * s));
            boundary.view_mut((2 * j, 0), (2, 2)).fill_with_identity();
        }
        boundary *= s;
        Self { coupling, boundary }
    }
}

/// Effective open system of a coherent-feedback loop plus its scalars.
#[derive(Clone, Debug, PartialEq)]
pub struct FeedbackLoop {
    topology: FeedbackTopology,
    transform: PassiveTransform,
    nbar: f64,
    coupling: Matrix,
    hamiltonian: Matrix,
    drift: Matrix,
    diffusion: Matrix,
    epsilon: f64,
    delta: f64,
    beta: f64,
    stable: bool,
}

/// Builds the loop for interferometer `z` and pre-feedback Hamiltonian `h_s`.
///
/// `z` must act on `l + n_anc` modes; its column split is reset to `l`.
pub fn build_feedback(
    topology: FeedbackTopology,
    z: &PassiveTransform,
    h_s: &QuadraticHamiltonian,
    nbar: f64,
) -> Result<FeedbackLoop> {
    check_nbar(nbar)?;
    let FeedbackTopology {
        direct_ports: l,
        feedback_ports: m,
        gamma,
        ..
    } = topology;
    if z.modes() != topology.interferometer_modes() {
        return Err(Error::InvalidDimension(format!(
            "interferometer acts on {} modes but the topology needs {}",
            z.modes(),
            topology.interferometer_modes()
        )));
    }
    if h_s.modes() != 1 {
        return Err(Error::InvalidDimension(format!(
            "feedback loops act on one system mode, Hamiltonian has {}",
            h_s.modes()
        )));
    }
    let deviation = z.deviation();
    if deviation > DEFAULT_TOLERANCE {
        return Err(Error::NotPassive { deviation });
    }
    let z = z.clone().with_ports(l)?;
    let blocks = z.blocks(m)?;

    let direct = StackMatrices::new(l, gamma);
    let fed = StackMatrices::new(m, gamma);
    let cm_e = &fed.coupling * &blocks.e;

    let mut coupling = Matrix::zeros(2, 2 * topology.interferometer_modes());
    coupling
        .view_mut((0, 0), (2, 2 * l))
        .copy_from(&(&direct.coupling - &cm_e));
    coupling
        .view_mut((0, 2 * l), (2, blocks.f.ncols()))
        .copy_from(&(&fed.coupling * &blocks.f));

    let shift = &cm_e * &direct.boundary;
    let hamiltonian = h_s.matrix() + &shift + shift.transpose();

    let system = OpenSystem::new(
        QuadraticHamiltonian::new(hamiltonian)?,
        CouplingMatrix::new(coupling)?,
        nbar,
    )?;
    let drift = drift_matrix(&system);
    let diffusion = diffusion_matrix(&system);
    let epsilon = epsilon_sum(&blocks.e);
    let stable = is_hurwitz(&drift, DEFAULT_STABILITY_MARGIN);

    Ok(FeedbackLoop {
        topology,
        transform: z,
        nbar,
        coupling: system.coupling().matrix().clone(),
        hamiltonian: system.hamiltonian().matrix().clone(),
        drift,
        diffusion,
        epsilon,
        delta: diffusion_eigenvalue(&topology, epsilon, nbar),
        beta: drift_trace_shift(&topology, epsilon),
        stable,
    })
}

impl FeedbackLoop {
    pub fn topology(&self) -> &FeedbackTopology {
        &self.topology
    }

    pub fn transform(&self) -> &PassiveTransform {
        &self.transform
    }

    pub fn nbar(&self) -> f64 {
        self.nbar
    }

    /// `C_cf`, a `2×2(l+n_anc)` matrix.
    pub fn coupling(&self) -> &Matrix {
        &self.coupling
    }

    /// `H_cf`.
    pub fn hamiltonian(&self) -> &Matrix {
        &self.hamiltonian
    }

    pub fn drift(&self) -> &Matrix {
        &self.drift
    }

    pub fn diffusion(&self) -> &Matrix {
        &self.diffusion
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// `δ = N̄γ(l + m − 2ε)`.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `β = γ(2ε − l − m)/2`.
    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn is_stable(&self) -> bool {
        self.stable
    }

    /// The effective open system seen by the mode.
    pub fn system(&self) -> Result<OpenSystem> {
        OpenSystem::new(
            QuadraticHamiltonian::new(self.hamiltonian.clone())?,
            CouplingMatrix::new(self.coupling.clone())?,
            self.nbar,
        )
    }

    pub fn drift_eigenvalues(&self) -> Vec<Complex<f64>> {
        self.drift.complex_eigenvalues().iter().copied().collect()
    }

    pub fn steady_state(&self) -> Result<CovarianceMatrix> {
        crate::dynamics::lyapunov_steady_state(&self.drift, &self.diffusion)
    }

    pub fn to_record(&self) -> FeedbackLoopRecord {
        FeedbackLoopRecord {
            topology: self.topology,
            nbar: self.nbar,
            z: MatrixRecord::interleaved(self.transform.matrix()),
            c_cf: MatrixRecord::interleaved(&self.coupling),
            h_cf: MatrixRecord::interleaved(&self.hamiltonian),
            epsilon: self.epsilon,
            delta: self.delta,
            beta: self.beta,
            stable: self.stable,
            steady_state: self
                .steady_state()
                .ok()
                .map(|s| MatrixRecord::interleaved(s.matrix())),
        }
    }
}

/// JSON form of a [`FeedbackLoop`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeedbackLoopRecord {
    pub topology: FeedbackTopology,
    pub nbar: f64,
    pub z: MatrixRecord,
    pub c_cf: MatrixRecord,
    pub h_cf: MatrixRecord,
    pub epsilon: f64,
    pub delta: f64,
    pub beta: f64,
    pub stable: bool,
    pub steady_state: Option<MatrixRecord>,
}

/// `δ = N̄γ(l + m − 2ε)`, the single eigenvalue of the loop's diffusion matrix.
pub fn diffusion_eigenvalue(topology: &FeedbackTopology, epsilon: f64, nbar: f64) -> f64 {
    nbar * topology.gamma * (topology.total_ports() as f64 - 2.0 * epsilon)
}

/// `β = γ(2ε − l − m)/2`; the loop's drift matrix has trace `2β`.
pub fn drift_trace_shift(topology: &FeedbackTopology, epsilon: f64) -> f64 {
    topology.gamma * (2.0 * epsilon - topology.total_ports() as f64) / 2.0
}

/// Smallest steady-state eigenvalue against the `N̄/2` bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCertificate {
    pub min_eig: f64,
    pub bound: f64,
    pub margin: f64,
}

impl BoundCertificate {
    pub fn holds(&self) -> bool {
        self.margin > 0.0
    }
}

/// Certifies `min eig σ∞ > N̄/2` for a stable loop.
pub fn verify_3db_certificate(lp: &FeedbackLoop) -> Result<BoundCertificate> {
    if !lp.stable {
        return Err(Error::Unstable {
            max_real: crate::dynamics::max_real_eigenvalue(&lp.drift),
        });
    }
    let min_eig = lp.steady_state()?.min_eigenvalue();
    let bound = lp.nbar / 2.0;
    Ok(BoundCertificate {
        min_eig,
        bound,
        margin: min_eig - bound,
    })
}

/// `σ₁₁ = N̄γ(1−√η)/(χ/2 + γ(1−√η))` for the single lossy loop.
pub fn simple_loop_closed_form(chi: f64, gamma: f64, eta: f64, nbar: f64) -> Result<f64> {
    check_rate("coupling rate γ", gamma)?;
    check_nbar(nbar)?;
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::OutOfRange(format!(
            "loop transmissivity must lie in [0, 1], got {eta}"
        )));
    }
    let damping = gamma * (1.0 - eta.sqrt());
    // Drift eigenvalues are -damping ∓ χ/2.
    if !(damping > chi.abs() / 2.0) {
        return Err(Error::Unstable {
            max_real: chi.abs() / 2.0 - damping,
        });
    }
    Ok(nbar * damping / (chi / 2.0 + damping))
}

/// `η = (1 − χ/(2γ) − margin)²`, just inside the stable region.
pub fn optimal_eta(chi: f64, gamma: f64, margin: f64) -> Result<f64> {
    check_rate("coupling rate γ", gamma)?;
    if !(chi > 0.0 && chi < 2.0 * gamma) {
        return Err(Error::OutOfRange(format!(
            "optimal loop needs 0 < χ < 2γ, got χ = {chi}, γ = {gamma}"
        )));
    }
    if !(margin > 0.0) {
        return Err(Error::OutOfRange(format!(
            "margin must be positive, got {margin}"
        )));
    }
    let root = 1.0 - chi / (2.0 * gamma) - margin;
    if !(0.0..1.0).contains(&root) {
        return Err(Error::OutOfRange(format!(
            "margin {margin} pushes √η = {root} outside [0, 1)"
        )));
    }
    Ok(root * root)
}
