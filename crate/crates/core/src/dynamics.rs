//! Drift and diffusion of a Gaussian open system, stability, and steady
//! states of `σ̇ = Aσ + σAᵀ + D`.

use serde::{Deserialize, Serialize};

use crate::symplectic::omega_matrix;
use crate::{max_norm, symmetrize, Error, Matrix, Result};

/// Eigenvalues with real part in `(-margin, 0)` count as unstable.
pub const DEFAULT_STABILITY_MARGIN: f64 = 1e-9;

/// Negative slack allowed on the smallest eigenvalue of `σ + iΩ`.
pub const PHYSICALITY_SLACK: f64 = 1e-9;

const SYMMETRY_TOLERANCE: f64 = 1e-9;

pub(crate) fn check_rate(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::OutOfRange(format!(
            "{name} must be positive, got {value}"
        )))
    }
}

pub(crate) fn check_nbar(nbar: f64) -> Result<()> {
    if nbar.is_finite() && nbar >= 1.0 {
        Ok(())
    } else {
        Err(Error::OutOfRange(format!(
            "noise level N̄ must be at least 1, got {nbar}"
        )))
    }
}

fn phase_space_modes(m: &Matrix, what: &str) -> Result<usize> {
    if m.nrows() != m.ncols() || m.nrows() == 0 || !m.nrows().is_multiple_of(2) {
        return Err(Error::InvalidDimension(format!(
            "{what} must be square with even positive dimension, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(m.nrows() / 2)
}

/// `Ĥ = ½ r̂ᵀ H r̂`; the matrix is symmetrized on construction.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticHamiltonian {
    matrix: Matrix,
}

impl QuadraticHamiltonian {
    pub fn new(matrix: Matrix) -> Result<Self> {
        phase_space_modes(&matrix, "Hamiltonian matrix")?;
        Ok(Self {
            matrix: symmetrize(&matrix),
        })
    }

    /// `H = -(χ/2) σ_x`, which squeezes the x quadrature.
    pub fn squeezing(chi: f64) -> Self {
        Self {
            matrix: Matrix::from_row_slice(2, 2, &[0.0, -chi / 2.0, -chi / 2.0, 0.0]),
        }
    }

    pub fn zero(modes: usize) -> Self {
        Self {
            matrix: Matrix::zeros(2 * modes, 2 * modes),
        }
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn modes(&self) -> usize {
        self.matrix.nrows() / 2
    }
}

/// `2n×2m` coupling between `n` system modes and `m` input ports.
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingMatrix {
    matrix: Matrix,
}

impl CouplingMatrix {
    pub fn new(matrix: Matrix) -> Result<Self> {
        if !matrix.nrows().is_multiple_of(2)
            || !matrix.ncols().is_multiple_of(2)
            || matrix.nrows() == 0
        {
            return Err(Error::InvalidDimension(format!(
                "coupling matrix needs even dimensions, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { matrix })
    }

    /// Excitation-exchange coupling `√γ Ω₁ᵀ` to one port.
    pub fn exchange(gamma: f64) -> Result<Self> {
        check_rate("coupling rate γ", gamma)?;
        Ok(Self {
            matrix: omega_matrix(1).transpose() * gamma.sqrt(),
        })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn ports(&self) -> usize {
        self.matrix.ncols() / 2
    }
}

/// System Hamiltonian, coupling, and white input noise `σ_in = N̄·1`.
#[derive(Clone, Debug, PartialEq)]
pub struct OpenSystem {
    hamiltonian: QuadraticHamiltonian,
    coupling: CouplingMatrix,
    nbar: f64,
}

impl OpenSystem {
    pub fn new(
        hamiltonian: QuadraticHamiltonian,
        coupling: CouplingMatrix,
        nbar: f64,
    ) -> Result<Self> {
        check_nbar(nbar)?;
        if coupling.matrix.nrows() != hamiltonian.matrix.nrows() {
            return Err(Error::InvalidDimension(format!(
                "coupling has {} rows but the Hamiltonian acts on {} phase-space coordinates",
                coupling.matrix.nrows(),
                hamiltonian.matrix.nrows()
            )));
        }
        Ok(Self {
            hamiltonian,
            coupling,
            nbar,
        })
    }

    /// Single mode, squeezing Hamiltonian, one exchange port.
    pub fn no_control(chi: f64, gamma: f64, nbar: f64) -> Result<Self> {
        Self::new(
            QuadraticHamiltonian::squeezing(chi),
            CouplingMatrix::exchange(gamma)?,
            nbar,
        )
    }

    pub fn hamiltonian(&self) -> &QuadraticHamiltonian {
        &self.hamiltonian
    }

    pub fn coupling(&self) -> &CouplingMatrix {
        &self.coupling
    }

    pub fn nbar(&self) -> f64 {
        self.nbar
    }

    pub fn modes(&self) -> usize {
        self.hamiltonian.modes()
    }

    pub fn drift(&self) -> Matrix {
        drift_matrix(self)
    }

    pub fn diffusion(&self) -> Matrix {
        diffusion_matrix(self)
    }

    pub fn steady_state(&self) -> Result<CovarianceMatrix> {
        lyapunov_steady_state(&self.drift(), &self.diffusion())
    }
}

/// Flat key-value description of the single-mode squeezing system.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub chi: f64,
    pub gamma: f64,
    #[serde(default = "default_nbar")]
    pub nbar: f64,
}

fn default_nbar() -> f64 {
    1.0
}

impl SystemConfig {
    /// Parses `key = value` lines. Unknown keys are ignored so one file can
    /// also carry run settings.
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_system(&self) -> Result<OpenSystem> {
        OpenSystem::no_control(self.chi, self.gamma, self.nbar)
    }
}

/// Second-moment matrix in vacuum units.
#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceMatrix {
    sigma: Matrix,
}

impl CovarianceMatrix {
    /// Accepts a square, even-dimensional, symmetric matrix that satisfies
    /// the uncertainty principle within [`PHYSICALITY_SLACK`].
    pub fn new(sigma: Matrix) -> Result<Self> {
        phase_space_modes(&sigma, "covariance matrix")?;
        let asym = max_norm(&(&sigma - sigma.transpose()));
        if asym > SYMMETRY_TOLERANCE * (1.0 + max_norm(&sigma)) {
            return Err(Error::OutOfRange(format!(
                "covariance matrix is not symmetric (deviation {asym:e})"
            )));
        }
        let cov = Self {
            sigma: symmetrize(&sigma),
        };
        let min = cov.uncertainty_min_eigenvalue();
        if min < -PHYSICALITY_SLACK {
            return Err(Error::OutOfRange(format!(
                "covariance matrix violates the uncertainty principle (min eigenvalue {min:e})"
            )));
        }
        Ok(cov)
    }

    /// `N̄·1`, a thermal state of every mode.
    pub fn thermal(modes: usize, nbar: f64) -> Self {
        Self {
            sigma: Matrix::identity(2 * modes, 2 * modes) * nbar,
        }
    }

    /// Symmetrizes without checking physicality. Solver outputs go through
    /// here because generic `(A, D)` pairs need not describe a quantum state.
    pub(crate) fn from_symmetric(sigma: Matrix) -> Self {
        Self {
            sigma: symmetrize(&sigma),
        }
    }

    pub fn matrix(&self) -> &Matrix {
        &self.sigma
    }

    pub fn into_matrix(self) -> Matrix {
        self.sigma
    }

    pub fn modes(&self) -> usize {
        self.sigma.nrows() / 2
    }

    /// Shorthand for `σ₁₁`.
    pub fn sigma11(&self) -> f64 {
        self.sigma[(0, 0)]
    }

    pub fn sigma22(&self) -> f64 {
        self.sigma[(1, 1)]
    }

    pub fn sigma12(&self) -> f64 {
        self.sigma[(0, 1)]
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.sigma.symmetric_eigenvalues().min()
    }

    /// Smallest eigenvalue of the Hermitian matrix `σ + iΩ`, computed through
    /// its real embedding `[[σ, -Ω], [Ω, σ]]`.
    pub fn uncertainty_min_eigenvalue(&self) -> f64 {
        let d = self.sigma.nrows();
        let w = omega_matrix(d / 2);
        let mut emb = Matrix::zeros(2 * d, 2 * d);
        emb.view_mut((0, 0), (d, d)).copy_from(&self.sigma);
        emb.view_mut((d, d), (d, d)).copy_from(&self.sigma);
        emb.view_mut((0, d), (d, d)).copy_from(&(-&w));
        emb.view_mut((d, 0), (d, d)).copy_from(&w);
        emb.symmetric_eigenvalues().min()
    }

    pub fn is_physical(&self) -> bool {
        self.uncertainty_min_eigenvalue() >= -PHYSICALITY_SLACK
    }
}

/// `A = Ω H + ½ Ω C Ω Cᵀ`.
pub fn drift_matrix(sys: &OpenSystem) -> Matrix {
    let w = omega_matrix(sys.modes());
    let c = sys.coupling.matrix();
    let w_ports = omega_matrix(sys.coupling.ports());
    &w * sys.hamiltonian.matrix() + (&w * c * w_ports * c.transpose()) * 0.5
}

/// `D = Ω C σ_in Cᵀ Ωᵀ` with `σ_in = N̄·1`.
pub fn diffusion_matrix(sys: &OpenSystem) -> Matrix {
    let w = omega_matrix(sys.modes());
    let c = sys.coupling.matrix();
    symmetrize(&(&w * c * c.transpose() * w.transpose() * sys.nbar))
}

/// Largest real part among the eigenvalues of a square matrix.
pub fn max_real_eigenvalue(a: &Matrix) -> f64 {
    assert_eq!(a.nrows(), a.ncols(), "eigenvalues need a square matrix");
    a.complex_eigenvalues()
        .iter()
        .fold(f64::NEG_INFINITY, |acc, l| acc.max(l.re))
}

/// Smallest real part among the eigenvalues of a square matrix.
pub fn min_real_eigenvalue(a: &Matrix) -> f64 {
    assert_eq!(a.nrows(), a.ncols(), "eigenvalues need a square matrix");
    a.complex_eigenvalues()
        .iter()
        .fold(f64::INFINITY, |acc, l| acc.min(l.re))
}

/// True iff every eigenvalue has real part below `-margin`.
pub fn is_hurwitz(a: &Matrix, margin: f64) -> bool {
    max_real_eigenvalue(a) < -margin
}

/// `‖Aσ + σAᵀ + D‖_max`.
pub fn lyapunov_residual(a: &Matrix, d: &Matrix, sigma: &Matrix) -> f64 {
    max_norm(&(a * sigma + sigma * a.transpose() + d))
}

/// Unique solution of `Aσ + σAᵀ + D = 0` for Hurwitz `A`.
///
/// Solved as the vectorized system `(1 ⊗ A + A ⊗ 1) vec σ = -vec D` with one
/// step of iterative refinement.
pub fn lyapunov_steady_state(a: &Matrix, d: &Matrix) -> Result<CovarianceMatrix> {
    let n = a.nrows();
    if a.ncols() != n || d.nrows() != n || d.ncols() != n {
        return Err(Error::InvalidDimension(format!(
            "Lyapunov solve needs square A and D of equal size, got {}x{} and {}x{}",
            a.nrows(),
            a.ncols(),
            d.nrows(),
            d.ncols()
        )));
    }
    let max_real = max_real_eigenvalue(a);
    if max_real >= -DEFAULT_STABILITY_MARGIN {
        return Err(Error::Unstable { max_real });
    }
    let eye = Matrix::identity(n, n);
    let k = eye.kronecker(a) + a.kronecker(&eye);
    let lu = k.clone().lu();
    let rhs = nalgebra::DVector::from_column_slice((-d).as_slice());
    let mut x = lu
        .solve(&rhs)
        .ok_or_else(|| Error::Singular("Lyapunov operator".into()))?;
    let correction = lu
        .solve(&(&rhs - &k * &x))
        .ok_or_else(|| Error::Singular("Lyapunov operator".into()))?;
    x += correction;
    let sigma = Matrix::from_column_slice(n, n, x.as_slice());
    Ok(CovarianceMatrix::from_symmetric(sigma))
}

fn lyapunov_rhs(a: &Matrix, d: &Matrix, sigma: &Matrix) -> Matrix {
    a * sigma + sigma * a.transpose() + d
}

/// Integrates `σ̇ = Aσ + σAᵀ + D` with classical RK4 steps of at most `dt`,
/// symmetrizing after every step. The final step is shortened to land on
/// `t_final`.
pub fn evolve_covariance(
    sigma0: &CovarianceMatrix,
    a: &Matrix,
    d: &Matrix,
    t_final: f64,
    dt: f64,
) -> Result<CovarianceMatrix> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::OutOfRange(format!(
            "time step must be positive, got {dt}"
        )));
    }
    if !(t_final >= 0.0 && t_final.is_finite()) {
        return Err(Error::OutOfRange(format!(
            "final time must be nonnegative, got {t_final}"
        )));
    }
    let n = sigma0.sigma.nrows();
    if a.nrows() != n || a.ncols() != n || d.nrows() != n || d.ncols() != n {
        return Err(Error::InvalidDimension(
            "covariance, drift and diffusion must share one dimension".into(),
        ));
    }
    let steps = (t_final / dt).ceil() as usize;
    let mut sigma = sigma0.sigma.clone();
    let mut t = 0.0;
    for i in 0..steps {
        let h = if i + 1 == steps { t_final - t } else { dt };
        if h <= 0.0 {
            break;
        }
        let k1 = lyapunov_rhs(a, d, &sigma);
        let k2 = lyapunov_rhs(a, d, &(&sigma + &k1 * (h / 2.0)));
        let k3 = lyapunov_rhs(a, d, &(&sigma + &k2 * (h / 2.0)));
        let k4 = lyapunov_rhs(a, d, &(&sigma + &k3 * h));
        sigma += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        sigma = symmetrize(&sigma);
        t += h;
    }
    Ok(CovarianceMatrix::from_symmetric(sigma))
}

/// Noise reduction below vacuum in decibels, `-10 log₁₀ σ`.
pub fn squeezing_db(sigma_element: f64) -> Result<f64> {
    if !(sigma_element > 0.0) {
        return Err(Error::OutOfRange(format!(
            "variance must be positive, got {sigma_element}"
        )));
    }
    Ok(-10.0 * sigma_element.log10())
}

fn check_no_control(chi: f64, gamma: f64, nbar: f64) -> Result<()> {
    check_rate("coupling rate γ", gamma)?;
    check_nbar(nbar)?;
    if !(chi.abs() < gamma) {
        // Eigenvalues of A are -(γ+χ)/2 and (χ-γ)/2.
        return Err(Error::Unstable {
            max_real: (chi.abs() - gamma) / 2.0,
        });
    }
    Ok(())
}

/// Steady `σ₁₁ = N̄γ/(χ+γ)` with no control, for `|χ| < γ`.
pub fn no_control_squeezing(chi: f64, gamma: f64, nbar: f64) -> Result<f64> {
    check_no_control(chi, gamma, nbar)?;
    Ok(nbar * gamma / (chi + gamma))
}

/// Steady `σ₂₂ = N̄γ/(γ-χ)` with no control.
pub fn no_control_antisqueezing(chi: f64, gamma: f64, nbar: f64) -> Result<f64> {
    check_no_control(chi, gamma, nbar)?;
    Ok(nbar * gamma / (gamma - chi))
}
