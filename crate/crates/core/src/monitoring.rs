//! Conditional steady states under continuous general-dyne monitoring.
//!
//! Monitoring the output field turns the covariance equation into
//!
//! ```text
//! σ̇ = Ãσ + σÃᵀ + D̃ − σBBᵀσ
//! Ã = A + GBᵀ,  D̃ = D − GGᵀ
//! B = CΩ(σ_in + σ_m)^{-1/2},  G = ΩCσ_in(σ_in + σ_m)^{-1/2}
//! ```
//!
//! Homodyne detection of `x` with efficiency `ζ` is the limit `z → 0` of
//! `σ_m = diag((z+1−ζ)/ζ, (1/z+1−ζ)/ζ)`. In that limit each port contributes
//! `(σ_in + σ_m)^{-1/2} = diag(√κ, 0)` with `κ = ζ/(1 + (N̄−1)ζ)`, which is
//! what [`GeneralDyneMeasurement::Homodyne`] uses directly.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    check_nbar, check_rate, is_hurwitz, lyapunov_steady_state, CovarianceMatrix, OpenSystem,
    DEFAULT_STABILITY_MARGIN,
};
use crate::symplectic::omega_matrix;
use crate::{max_norm, symmetrize, Error, Matrix, Result};

/// Default stopping threshold on `‖σ̇‖_max`.
pub const RICCATI_TOLERANCE: f64 = 1e-12;

/// Measurement applied to every output port.
#[derive(Clone, Debug, PartialEq)]
pub enum GeneralDyneMeasurement {
    /// Finite measurement covariance `σ_m` (`2m×2m` for `m` ports).
    Covariance(Matrix),
    /// x-quadrature homodyne detection with efficiency `ζ ∈ (0, 1]`,
    /// taken in the exact `z → 0` limit.
    Homodyne { efficiency: f64 },
}

fn check_efficiency(zeta: f64) -> Result<()> {
    if zeta > 0.0 && zeta <= 1.0 {
        Ok(())
    } else {
        Err(Error::OutOfRange(format!(
            "detection efficiency must lie in (0, 1], got {zeta}"
        )))
    }
}

impl GeneralDyneMeasurement {
    pub fn homodyne(efficiency: f64) -> Result<Self> {
        check_efficiency(efficiency)?;
        Ok(Self::Homodyne { efficiency })
    }

    /// Homodyne covariance at finite regularizer `z`, repeated over `ports`.
    pub fn homodyne_regularized(efficiency: f64, z: f64, ports: usize) -> Result<Self> {
        check_efficiency(efficiency)?;
        if !(z > 0.0) {
            return Err(Error::OutOfRange(format!(
                "regularizer must be positive, got {z}"
            )));
        }
        let zeta = efficiency;
        let mut m = Matrix::zeros(2 * ports, 2 * ports);
        for j in 0..ports {
            m[(2 * j, 2 * j)] = (z + 1.0 - zeta) / zeta;
            m[(2 * j + 1, 2 * j + 1)] = (1.0 / z + 1.0 - zeta) / zeta;
        }
        Ok(Self::Covariance(m))
    }

    /// `(σ_in + σ_m)^{-1/2}` for `σ_in = N̄·1` over `ports` ports.
    fn inverse_sqrt_weight(&self, nbar: f64, ports: usize) -> Result<Matrix> {
        match self {
            Self::Homodyne { efficiency } => {
                check_efficiency(*efficiency)?;
                let kappa = efficiency / (1.0 + (nbar - 1.0) * efficiency);
                let mut w = Matrix::zeros(2 * ports, 2 * ports);
                for j in 0..ports {
                    w[(2 * j, 2 * j)] = kappa.sqrt();
                }
                Ok(w)
            }
            Self::Covariance(sigma_m) => {
                if sigma_m.nrows() != 2 * ports || sigma_m.ncols() != 2 * ports {
                    return Err(Error::InvalidDimension(format!(
                        "measurement covariance is {}x{} but the system has {ports} ports",
                        sigma_m.nrows(),
                        sigma_m.ncols()
                    )));
                }
                let total = symmetrize(&(sigma_m + Matrix::identity(2 * ports, 2 * ports) * nbar));
                let eig = total.symmetric_eigen();
                if eig.eigenvalues.iter().any(|&l| !(l > 0.0)) {
                    return Err(Error::Singular(
                        "σ_in + σ_m is not positive definite".into(),
                    ));
                }
                let inv_sqrt = eig.eigenvalues.map(|l| 1.0 / l.sqrt());
                Ok(&eig.eigenvectors
                    * Matrix::from_diagonal(&inv_sqrt)
                    * eig.eigenvectors.transpose())
            }
        }
    }
}

/// Coefficients of the monitored covariance equation.
#[derive(Clone, Debug, PartialEq)]
pub struct RiccatiSystem {
    /// `Ã`
    pub drift: Matrix,
    /// `D̃`
    pub diffusion: Matrix,
    /// `B`
    pub measurement: Matrix,
    /// Characteristic coupling rate, `tr(CCᵀ)/2n`; sets the default time cap.
    pub rate: f64,
}

impl RiccatiSystem {
    /// `Ãσ + σÃᵀ + D̃ − σBBᵀσ`.
    pub fn rhs(&self, sigma: &Matrix) -> Matrix {
        let bb = &self.measurement * self.measurement.transpose();
        &self.drift * sigma + sigma * self.drift.transpose() + &self.diffusion - sigma * bb * sigma
    }

    pub fn residual(&self, sigma: &Matrix) -> f64 {
        max_norm(&self.rhs(sigma))
    }
}

pub fn riccati_matrices(sys: &OpenSystem, meas: &GeneralDyneMeasurement) -> Result<RiccatiSystem> {
    let c = sys.coupling().matrix();
    let ports = sys.coupling().ports();
    let nbar = sys.nbar();
    let weight = meas.inverse_sqrt_weight(nbar, ports)?;
    let w_sys = omega_matrix(sys.modes());
    let w_ports = omega_matrix(ports);

    let b = c * w_ports * &weight;
    let g = &w_sys * c * &weight * nbar;
    let drift = sys.drift() + &g * b.transpose();
    let diffusion = symmetrize(&(sys.diffusion() - &g * g.transpose()));
    let rate = (c * c.transpose()).trace() / (2 * sys.modes()) as f64;
    Ok(RiccatiSystem {
        drift,
        diffusion,
        measurement: b,
        rate,
    })
}

/// Converged conditional covariance and its Riccati residual.
#[derive(Clone, Debug, PartialEq)]
pub struct MonitoredSteadyState {
    pub sigma: CovarianceMatrix,
    pub residual: f64,
    /// Integration time needed to reach the stopping threshold.
    pub time: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RiccatiOptions {
    /// Stop once `‖σ̇‖_max` falls below this.
    pub tolerance: f64,
    /// Time cap; `None` means `10⁴ / rate`.
    pub max_time: Option<f64>,
    /// Fixed RK4 step; `None` picks one from the coefficient norms.
    pub dt: Option<f64>,
}

impl Default for RiccatiOptions {
    fn default() -> Self {
        Self {
            tolerance: RICCATI_TOLERANCE,
            max_time: None,
            dt: None,
        }
    }
}

/// Integrates the Riccati equation from `sigma0` to its fixed point.
pub fn riccati_steady_state(
    rs: &RiccatiSystem,
    sigma0: &CovarianceMatrix,
) -> Result<MonitoredSteadyState> {
    riccati_steady_state_with(rs, sigma0, &RiccatiOptions::default())
}

fn inf_norm(m: &Matrix) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn riccati_steady_state_with(
    rs: &RiccatiSystem,
    sigma0: &CovarianceMatrix,
    opts: &RiccatiOptions,
) -> Result<MonitoredSteadyState> {
    let n = rs.drift.nrows();
    if sigma0.matrix().nrows() != n {
        return Err(Error::InvalidDimension(format!(
            "initial covariance is {}x{} but the system is {n}x{n}",
            sigma0.matrix().nrows(),
            sigma0.matrix().ncols()
        )));
    }
    let bb = &rs.measurement * rs.measurement.transpose();
    let scale = inf_norm(&rs.drift) + 2.0 * inf_norm(&bb) * inf_norm(sigma0.matrix()).max(1.0);
    let dt = opts.dt.unwrap_or(0.1 / scale.max(f64::MIN_POSITIVE));
    let max_time = opts
        .max_time
        .unwrap_or(1e4 / rs.rate.max(f64::MIN_POSITIVE));

    let mut sigma = sigma0.matrix().clone();
    let mut t = 0.0;
    loop {
        let k1 = rs.rhs(&sigma);
        let residual = max_norm(&k1);
        if !residual.is_finite() {
            return Err(Error::Divergence { residual, time: t });
        }
        if residual < opts.tolerance {
            let cov = CovarianceMatrix::from_symmetric(sigma);
            if !(cov.min_eigenvalue() > 0.0) {
                return Err(Error::OutOfRange(
                    "conditional covariance is not strictly positive".into(),
                ));
            }
            return Ok(MonitoredSteadyState {
                sigma: cov,
                residual,
                time: t,
            });
        }
        if t >= max_time {
            return Err(Error::Divergence { residual, time: t });
        }
        let k2 = rs.rhs(&(&sigma + &k1 * (dt / 2.0)));
        let k3 = rs.rhs(&(&sigma + &k2 * (dt / 2.0)));
        let k4 = rs.rhs(&(&sigma + &k3 * dt));
        sigma += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
        sigma = symmetrize(&sigma);
        t += dt;
    }
}

/// The unmonitored steady state when it exists, otherwise `N̄·1`.
pub fn default_initial_state(sys: &OpenSystem) -> CovarianceMatrix {
    let a = sys.drift();
    if is_hurwitz(&a, DEFAULT_STABILITY_MARGIN) {
        if let Ok(s) = lyapunov_steady_state(&a, &sys.diffusion()) {
            return s;
        }
    }
    CovarianceMatrix::thermal(sys.modes(), sys.nbar())
}

/// Riccati matrices plus integration from [`default_initial_state`].
pub fn monitor(sys: &OpenSystem, meas: &GeneralDyneMeasurement) -> Result<MonitoredSteadyState> {
    let rs = riccati_matrices(sys, meas)?;
    riccati_steady_state(&rs, &default_initial_state(sys))
}

/// Numerical homodyne steady state of the single-port squeezing system.
pub fn homodyne_riccati(
    chi: f64,
    gamma: f64,
    zeta: f64,
    nbar: f64,
) -> Result<MonitoredSteadyState> {
    check_homodyne(chi, gamma, zeta, nbar)?;
    let sys = OpenSystem::no_control(chi, gamma, nbar)?;
    monitor(&sys, &GeneralDyneMeasurement::homodyne(zeta)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomodyneSteadyState {
    pub sigma11: f64,
    pub sigma22: f64,
}

fn check_homodyne(chi: f64, gamma: f64, zeta: f64, nbar: f64) -> Result<()> {
    check_rate("coupling rate γ", gamma)?;
    check_nbar(nbar)?;
    check_efficiency(zeta)?;
    if !(chi.abs() < gamma) {
        return Err(Error::Unstable {
            max_real: (chi.abs() - gamma) / 2.0,
        });
    }
    Ok(())
}

/// Positive root of the monitored steady-state equations:
/// `σ₁₁ = (a + √(a² + b))/(2ζ)` with
/// `a = 2N̄ζ − (1 + (N̄−1)ζ)(1 + χ/γ)`, `b = 4N̄ζ(1−ζ)`, and
/// `σ₂₂ = N̄/(1 − χ/γ)`.
pub fn homodyne_closed_form(
    chi: f64,
    gamma: f64,
    zeta: f64,
    nbar: f64,
) -> Result<HomodyneSteadyState> {
    check_homodyne(chi, gamma, zeta, nbar)?;
    let ratio = chi / gamma;
    let a = 2.0 * nbar * zeta - (1.0 + (nbar - 1.0) * zeta) * (1.0 + ratio);
    let b = 4.0 * nbar * zeta * (1.0 - zeta);
    let root = (a * a + b).sqrt();
    // For a < 0 the numerator cancels; use its rationalized form.
    let sigma11 = if a >= 0.0 {
        (a + root) / (2.0 * zeta)
    } else {
        2.0 * nbar * (1.0 - zeta) / (root - a)
    };
    Ok(HomodyneSteadyState {
        sigma11,
        sigma22: nbar / (1.0 - ratio),
    })
}

/// Efficiency above which homodyne monitoring beats the best passive
/// coherent loop, `ζ* = 2(γ−χ)/(2(γ−χ) + N̄(2χ−γ))`.
///
/// `None` when the denominator is not positive or `ζ* > 1`, i.e. no
/// detector can win. Accepts `0 < χ ≤ γ`; at `χ = γ` the threshold is 0.
pub fn efficiency_threshold(chi: f64, gamma: f64, nbar: f64) -> Result<Option<f64>> {
    check_rate("coupling rate γ", gamma)?;
    check_nbar(nbar)?;
    if !(chi > 0.0 && chi <= gamma) {
        return Err(Error::OutOfRange(format!(
            "threshold needs 0 < χ ≤ γ, got χ = {chi}, γ = {gamma}"
        )));
    }
    let num = 2.0 * (gamma - chi);
    let den = num + nbar * (2.0 * chi - gamma);
    if !(den > 0.0) {
        return Ok(None);
    }
    let zeta = num / den;
    Ok((zeta <= 1.0).then_some(zeta))
}

/// True iff perfect homodyne monitoring squeezes below vacuum,
/// `N̄(1 − χ/γ) < 1`.
pub fn monitored_stable_squeezing_condition(chi: f64, gamma: f64, nbar: f64) -> bool {
    nbar * (1.0 - chi / gamma) < 1.0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MonitoringSource {
    ClosedForm,
    Riccati,
}

impl MonitoringSource {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::ClosedForm => "closed_form",
            Self::Riccati => "riccati",
        }
    }
}

/// One monitored steady state, as written to the monitoring CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonitoringRow {
    pub chi: f64,
    pub gamma: f64,
    pub zeta: f64,
    pub nbar: f64,
    pub sigma11_m: f64,
    pub sigma22_m: f64,
    pub threshold: Option<f64>,
    pub source: MonitoringSource,
}

impl MonitoringRow {
    pub const CSV_HEADER: [&'static str; 8] = [
        "chi",
        "gamma",
        "zeta",
        "nbar",
        "sigma11_m",
        "sigma22_m",
        "threshold",
        "source",
    ];

    pub fn csv_fields(&self) -> Vec<String> {
        vec![
            self.chi.to_string(),
            self.gamma.to_string(),
            self.zeta.to_string(),
            self.nbar.to_string(),
            self.sigma11_m.to_string(),
            self.sigma22_m.to_string(),
            self.threshold.map(|t| t.to_string()).unwrap_or_default(),
            self.source.as_str().to_string(),
        ]
    }
}

/// Closed-form and Riccati rows for every `(χ, ζ, N̄)` grid point, in grid
/// order (χ outermost). Points outside `|χ| < γ` are skipped.
pub fn monitoring_rows(
    chi_grid: &[f64],
    gamma: f64,
    zeta_grid: &[f64],
    nbar_grid: &[f64],
) -> Result<Vec<MonitoringRow>> {
    let points: Vec<(f64, f64, f64)> = chi_grid
        .iter()
        .flat_map(|&chi| {
            zeta_grid
                .iter()
                .flat_map(move |&zeta| nbar_grid.iter().map(move |&nbar| (chi, zeta, nbar)))
        })
        .filter(|&(chi, _, _)| chi.abs() < gamma)
        .collect();
    let per_point: Vec<Result<[MonitoringRow; 2]>> = points
        .par_iter()
        .map(|&(chi, zeta, nbar)| {
            let closed = homodyne_closed_form(chi, gamma, zeta, nbar)?;
            let numeric = homodyne_riccati(chi, gamma, zeta, nbar)?;
            let threshold = if chi > 0.0 {
                efficiency_threshold(chi, gamma, nbar)?
            } else {
                None
            };
            let row = |source, s11, s22| MonitoringRow {
                chi,
                gamma,
                zeta,
                nbar,
                sigma11_m: s11,
                sigma22_m: s22,
                threshold,
                source,
            };
            Ok([
                row(MonitoringSource::ClosedForm, closed.sigma11, closed.sigma22),
                row(
                    MonitoringSource::Riccati,
                    numeric.sigma.sigma11(),
                    numeric.sigma.sigma22(),
                ),
            ])
        })
        .collect();
    let mut rows = Vec::with_capacity(2 * per_point.len());
    for pair in per_point {
        rows.extend(pair?);
    }
    Ok(rows)
}
