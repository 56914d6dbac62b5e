//! Symplectic forms and passive (orthogonal symplectic) transformations.
//!
//! Matrices act on interleaved phase-space vectors `(x₁, p₁, …, x_n, p_n)`.
//! The grouped ordering `(x₁, …, x_n, p₁, …, p_n)` only appears while
//! sampling, where a unitary `U = X + iY` is first written as
//! `[[X, Y], [-Y, X]]` and then permuted.

use nalgebra::{Complex, DMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::{max_norm, Error, Matrix, Result};

/// Absolute max-norm tolerance used when validating passive transforms.
pub const DEFAULT_TOLERANCE: f64 = 1e-12;

/// The symplectic form `Ω_n = ⊕ Ω₁`, `Ω₁ = [[0, 1], [-1, 0]]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymplecticForm {
    modes: usize,
    matrix: Matrix,
}

impl SymplecticForm {
    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> Matrix {
        self.matrix
    }
}

/// Builds `Ω_n`. Rejects `n = 0`.
pub fn omega(n: usize) -> Result<SymplecticForm> {
    if n == 0 {
        return Err(Error::InvalidDimension(
            "symplectic form needs at least one mode".into(),
        ));
    }
    Ok(SymplecticForm {
        modes: n,
        matrix: omega_matrix(n),
    })
}

/// `Ω_n` as a bare matrix; `n = 0` gives the empty matrix so that
/// zero-ancilla block products stay well formed.
pub(crate) fn omega_matrix(n: usize) -> Matrix {
    let mut m = Matrix::zeros(2 * n, 2 * n);
    for j in 0..n {
        m[(2 * j, 2 * j + 1)] = 1.0;
        m[(2 * j + 1, 2 * j)] = -1.0;
    }
    m
}

fn even_square(s: &Matrix) -> Result<usize> {
    if s.nrows() != s.ncols() {
        return Err(Error::InvalidDimension(format!(
            "expected a square matrix, got {}x{}",
            s.nrows(),
            s.ncols()
        )));
    }
    if !s.nrows().is_multiple_of(2) || s.nrows() == 0 {
        return Err(Error::InvalidDimension(format!(
            "phase-space dimension must be even and positive, got {}",
            s.nrows()
        )));
    }
    Ok(s.nrows() / 2)
}

fn symplectic_deviation(s: &Matrix, n: usize) -> f64 {
    let w = omega_matrix(n);
    max_norm(&(s * &w * s.transpose() - &w))
}

fn orthogonal_deviation(s: &Matrix) -> f64 {
    max_norm(&(s * s.transpose() - Matrix::identity(s.nrows(), s.ncols())))
}

/// True iff `‖SΩSᵀ − Ω‖_max ≤ tol`.
pub fn is_symplectic(s: &Matrix, tol: f64) -> Result<bool> {
    let n = even_square(s)?;
    Ok(symplectic_deviation(s, n) <= tol)
}

/// True iff `S` is symplectic and orthogonal, both to `tol` in max-norm.
pub fn is_passive(s: &Matrix, tol: f64) -> Result<bool> {
    let n = even_square(s)?;
    Ok(symplectic_deviation(s, n) <= tol && orthogonal_deviation(s) <= tol)
}

/// Phase-space ordering of a matrix or vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ordering {
    /// `(x₁, p₁, x₂, p₂, …)`
    Interleaved,
    /// `(x₁, …, x_n, p₁, …, p_n)`
    Grouped,
}

/// Ordering tag together with the permutation taking grouped indices to
/// interleaved ones: `interleaved[i] = grouped[permutation[i]]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderingConvention {
    pub tag: Ordering,
    pub permutation: Vec<usize>,
}

impl OrderingConvention {
    pub fn new(tag: Ordering, modes: usize) -> Self {
        let mut permutation = vec![0; 2 * modes];
        for j in 0..modes {
            permutation[2 * j] = j;
            permutation[2 * j + 1] = modes + j;
        }
        Self { tag, permutation }
    }

    pub fn inverse(&self) -> Vec<usize> {
        let mut inv = vec![0; self.permutation.len()];
        for (i, &p) in self.permutation.iter().enumerate() {
            inv[p] = i;
        }
        inv
    }
}

fn permute_square(m: &Matrix, perm: &[usize]) -> Matrix {
    Matrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(perm[i], perm[j])])
}

/// Reorders a grouped `2n×2n` matrix into interleaved ordering.
pub fn grouped_to_interleaved(m: &Matrix) -> Result<Matrix> {
    let n = even_square(m)?;
    let conv = OrderingConvention::new(Ordering::Interleaved, n);
    Ok(permute_square(m, &conv.permutation))
}

/// Reorders an interleaved `2n×2n` matrix into grouped ordering.
pub fn interleaved_to_grouped(m: &Matrix) -> Result<Matrix> {
    let n = even_square(m)?;
    let conv = OrderingConvention::new(Ordering::Grouped, n);
    Ok(permute_square(m, &conv.inverse()))
}

/// The four blocks of `Z = [[E, F], [G, H]]`.
///
/// Rows are split after the `2m` fed-back outputs, columns after the `2l`
/// port inputs.
#[derive(Clone, Debug, PartialEq)]
pub struct Blocks {
    pub e: Matrix,
    pub f: Matrix,
    pub g: Matrix,
    pub h: Matrix,
}

/// An orthogonal symplectic matrix acting on `l` output ports followed by
/// `n_anc` ancilla modes.
#[derive(Clone, Debug, PartialEq)]
pub struct PassiveTransform {
    matrix: Matrix,
    port_modes: usize,
}

impl PassiveTransform {
    /// Validates `matrix` at [`DEFAULT_TOLERANCE`] and records the column split.
    pub fn new(matrix: Matrix, port_modes: usize) -> Result<Self> {
        Self::with_tolerance(matrix, port_modes, DEFAULT_TOLERANCE)
    }

    pub fn with_tolerance(matrix: Matrix, port_modes: usize, tol: f64) -> Result<Self> {
        let n = even_square(&matrix)?;
        if port_modes > n {
            return Err(Error::InvalidDimension(format!(
                "{port_modes} port modes exceed the {n} modes of the transform"
            )));
        }
        let deviation = symplectic_deviation(&matrix, n).max(orthogonal_deviation(&matrix));
        if deviation > tol {
            return Err(Error::NotPassive { deviation });
        }
        Ok(Self { matrix, port_modes })
    }

    /// Same matrix, different port/ancilla split.
    pub fn with_ports(self, port_modes: usize) -> Result<Self> {
        if port_modes > self.modes() {
            return Err(Error::InvalidDimension(format!(
                "{port_modes} port modes exceed the {} modes of the transform",
                self.modes()
            )));
        }
        Ok(Self { port_modes, ..self })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn modes(&self) -> usize {
        self.matrix.nrows() / 2
    }

    /// `l`, the number of output-port modes entering the interferometer.
    pub fn port_modes(&self) -> usize {
        self.port_modes
    }

    pub fn ancilla_modes(&self) -> usize {
        self.modes() - self.port_modes
    }

    /// Largest violation of `ZZᵀ = 1` and `ZΩZᵀ = Ω`.
    pub fn deviation(&self) -> f64 {
        symplectic_deviation(&self.matrix, self.modes()).max(orthogonal_deviation(&self.matrix))
    }

    pub fn blocks(&self, fed_back: usize) -> Result<Blocks> {
        block_decompose(self, fed_back)
    }
}

/// Haar-random passive transform on `modes` modes, deterministic in `seed`.
pub fn random_passive(modes: usize, seed: u64) -> Result<PassiveTransform> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_passive_with(modes, &mut rng)
}

/// As [`random_passive`], drawing from a caller-supplied generator.
pub fn random_passive_with<R: Rng + ?Sized>(modes: usize, rng: &mut R) -> Result<PassiveTransform> {
    if modes == 0 {
        return Err(Error::InvalidDimension(
            "random passive transform needs at least one mode".into(),
        ));
    }
    let u = haar_unitary(modes, rng);
    let n = modes;
    let mut grouped = Matrix::zeros(2 * n, 2 * n);
    for j in 0..n {
        for k in 0..n {
            let (x, y) = (u[(j, k)].re, u[(j, k)].im);
            grouped[(j, k)] = x;
            grouped[(j, n + k)] = y;
            grouped[(n + j, k)] = -y;
            grouped[(n + j, n + k)] = x;
        }
    }
    let matrix = grouped_to_interleaved(&grouped)?;
    PassiveTransform::new(matrix, modes)
}

/// Ginibre matrix, Householder QR, then the phases of `diag(R)` moved into
/// `Q` so that the result is Haar distributed.
fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<Complex<f64>> {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let ginibre = DMatrix::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex::new(re * scale, im * scale)
    });
    let qr = ginibre.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        let d = r[(j, j)];
        let norm = d.norm();
        let phase = if norm > 0.0 {
            d / norm
        } else {
            Complex::new(1.0, 0.0)
        };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Beam splitter of transmissivity `η` mixing one port with one ancilla.
///
/// `E = √η·1₂`, `F = √(1-η)·1₂`, completed by `G = -√(1-η)·1₂`, `H = √η·1₂`.
pub fn beam_splitter(eta: f64) -> Result<PassiveTransform> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::OutOfRange(format!(
            "beam splitter transmissivity must lie in [0, 1], got {eta}"
        )));
    }
    let t = eta.sqrt();
    let r = (1.0 - eta).sqrt();
    let mut z = Matrix::zeros(4, 4);
    for i in 0..2 {
        z[(i, i)] = t;
        z[(i, i + 2)] = r;
        z[(i + 2, i)] = -r;
        z[(i + 2, i + 2)] = t;
    }
    PassiveTransform::new(z, 1)
}

/// Splits `Z` into `E` (`2m×2l`), `F` (`2m×2n_anc`), `G` and `H`.
pub fn block_decompose(z: &PassiveTransform, fed_back: usize) -> Result<Blocks> {
    let dim = z.matrix.nrows();
    if 2 * fed_back > dim {
        return Err(Error::InvalidDimension(format!(
            "{fed_back} fed-back modes exceed the {} modes of the transform",
            z.modes()
        )));
    }
    let rows = 2 * fed_back;
    let cols = 2 * z.port_modes;
    let m = &z.matrix;
    Ok(Blocks {
        e: m.view((0, 0), (rows, cols)).into_owned(),
        f: m.view((0, cols), (rows, dim - cols)).into_owned(),
        g: m.view((rows, 0), (dim - rows, cols)).into_owned(),
        h: m.view((rows, cols), (dim - rows, dim - cols)).into_owned(),
    })
}

/// Sums of the `(1,1)` and `(2,2)` entries over all `2×2` submatrices.
pub fn block_diagonal_sums(e: &Matrix) -> (f64, f64) {
    assert!(
        e.nrows().is_multiple_of(2) && e.ncols().is_multiple_of(2),
        "block sums need even dimensions, got {}x{}",
        e.nrows(),
        e.ncols()
    );
    let mut upper = 0.0;
    let mut lower = 0.0;
    for j in (0..e.nrows()).step_by(2) {
        for k in (0..e.ncols()).step_by(2) {
            upper += e[(j, k)];
            lower += e[(j + 1, k + 1)];
        }
    }
    (upper, lower)
}

/// `ε = Σ_jk E^{jk}_{11}`.
///
/// # Panics
///
/// If `e` has an odd dimension.
pub fn epsilon_sum(e: &Matrix) -> f64 {
    block_diagonal_sums(e).0
}

/// Largest violation of the `[[x, y], [-y, x]]` form over all `2×2`
/// submatrices.
pub fn submatrix_structure_deviation(m: &Matrix) -> f64 {
    let mut dev = 0.0_f64;
    for j in (0..m.nrows()).step_by(2) {
        for k in (0..m.ncols()).step_by(2) {
            dev = dev
                .max((m[(j, k)] - m[(j + 1, k + 1)]).abs())
                .max((m[(j, k + 1)] + m[(j + 1, k)]).abs());
        }
    }
    dev
}

/// JSON form of a matrix: row-major rows plus the ordering tag.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixRecord {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Vec<f64>>,
    pub ordering: Ordering,
}

impl MatrixRecord {
    pub fn interleaved(m: &Matrix) -> Self {
        Self {
            rows: m.nrows(),
            cols: m.ncols(),
            data: m.row_iter().map(|r| r.iter().copied().collect()).collect(),
            ordering: Ordering::Interleaved,
        }
    }

    /// Rebuilds the matrix in interleaved ordering.
    pub fn to_matrix(&self) -> Result<Matrix> {
        if self.data.len() != self.rows || self.data.iter().any(|r| r.len() != self.cols) {
            return Err(Error::InvalidDimension(format!(
                "record declares {}x{} but data does not match",
                self.rows, self.cols
            )));
        }
        let m = Matrix::from_fn(self.rows, self.cols, |i, j| self.data[i][j]);
        match self.ordering {
            Ordering::Interleaved => Ok(m),
            Ordering::Grouped => grouped_to_interleaved(&m),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn omega_single_mode() {
        let w = omega(1).unwrap();
        assert_eq!(
            w.matrix(),
            &Matrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0])
        );
    }

    #[test]
    fn omega_two_modes_is_block_diagonal() {
        let w = omega(2).unwrap().into_matrix();
        let mut expected = Matrix::zeros(4, 4);
        expected[(0, 1)] = 1.0;
        expected[(1, 0)] = -1.0;
        expected[(2, 3)] = 1.0;
        expected[(3, 2)] = -1.0;
        assert_eq!(w, expected);
    }

    #[test]
    fn omega_squares_to_minus_identity() {
        let w = omega(3).unwrap().into_matrix();
        assert_eq!(&w * &w, -Matrix::identity(6, 6));
        assert_eq!(w.transpose(), -&w);
        assert_eq!(&w * w.transpose(), Matrix::identity(6, 6));
    }

    #[test]
    fn omega_rejects_zero_modes() {
        assert!(matches!(omega(0), Err(Error::InvalidDimension(_))));
    }

    #[test]
    fn symplectic_checks() {
        assert!(is_symplectic(&Matrix::identity(2, 2), 0.0).unwrap());
        assert!(is_symplectic(&omega_matrix(1), 0.0).unwrap());
        assert!(!is_symplectic(&Matrix::from_diagonal_element(2, 2, 2.0), 1e-12).unwrap());
        assert!(is_symplectic(&Matrix::identity(3, 3), 0.0).is_err());
        assert!(is_passive(&Matrix::zeros(2, 3), 0.0).is_err());
    }

    #[test]
    fn rotation_is_passive_squeezer_is_not() {
        let th = 0.7_f64;
        let rot = Matrix::from_row_slice(2, 2, &[th.cos(), th.sin(), -th.sin(), th.cos()]);
        assert!(is_passive(&rot, 1e-12).unwrap());
        let r = 0.4_f64;
        let sq = Matrix::from_diagonal(&nalgebra::DVector::from_vec(vec![r.exp(), (-r).exp()]));
        assert!(is_symplectic(&sq, 1e-12).unwrap());
        assert!(!is_passive(&sq, 1e-12).unwrap());
    }

    #[test]
    fn beam_splitter_limits() {
        let bs = beam_splitter(1.0).unwrap();
        assert_eq!(bs.matrix(), &Matrix::identity(4, 4));
        let b = bs.blocks(1).unwrap();
        assert_eq!(b.e, Matrix::identity(2, 2));

        let b0 = beam_splitter(0.0).unwrap().blocks(1).unwrap();
        assert_eq!(b0.e, Matrix::zeros(2, 2));
        assert_eq!(b0.f, Matrix::identity(2, 2));

        let q = beam_splitter(0.25).unwrap();
        assert!(is_passive(q.matrix(), 1e-12).unwrap());
        assert_abs_diff_eq!(epsilon_sum(&q.blocks(1).unwrap().e), 0.5, epsilon = 1e-15);

        assert!(beam_splitter(-0.1).is_err());
        assert!(beam_splitter(1.5).is_err());
    }

    #[test]
    fn identity_block_decomposition() {
        let z = PassiveTransform::new(Matrix::identity(4, 4), 1).unwrap();
        let b = block_decompose(&z, 1).unwrap();
        assert_eq!(b.e, Matrix::identity(2, 2));
        assert_eq!(b.f, Matrix::zeros(2, 2));
        assert!(block_decompose(&z, 3).is_err());
    }

    #[test]
    fn beam_splitter_e_block() {
        let eta: f64 = 0.36;
        let b = beam_splitter(eta).unwrap().blocks(1).unwrap();
        assert_abs_diff_eq!(b.e, Matrix::identity(2, 2) * eta.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn epsilon_examples() {
        assert_eq!(epsilon_sum(&Matrix::identity(2, 2)), 1.0);
        assert_eq!(epsilon_sum(&omega_matrix(1)), 0.0);
        assert_abs_diff_eq!(
            epsilon_sum(&(Matrix::identity(2, 2) * 0.81_f64.sqrt())),
            0.9,
            epsilon = 1e-15
        );
    }

    #[test]
    fn random_passive_is_deterministic_and_passive() {
        let a = random_passive(2, 17).unwrap();
        let b = random_passive(2, 17).unwrap();
        assert_eq!(a, b);
        assert!(is_passive(a.matrix(), 1e-12).unwrap());
        assert_ne!(a, random_passive(2, 18).unwrap());
        assert!(random_passive(0, 1).is_err());
    }

    #[test]
    fn non_passive_matrix_rejected() {
        let m = Matrix::from_diagonal_element(2, 2, 2.0);
        assert!(matches!(
            PassiveTransform::new(m, 1),
            Err(Error::NotPassive { .. })
        ));
    }

    #[test]
    fn ordering_permutation() {
        let c = OrderingConvention::new(Ordering::Interleaved, 3);
        assert_eq!(c.permutation, vec![0, 3, 1, 4, 2, 5]);
        let inv = c.inverse();
        for (i, &p) in inv.iter().enumerate() {
            assert_eq!(c.permutation[p], i);
        }
    }

    #[test]
    fn grouped_symplectic_form_maps_to_omega() {
        let n = 3;
        let mut j = Matrix::zeros(2 * n, 2 * n);
        for k in 0..n {
            j[(k, n + k)] = 1.0;
            j[(n + k, k)] = -1.0;
        }
        assert_eq!(grouped_to_interleaved(&j).unwrap(), omega_matrix(n));
    }

    #[test]
    fn matrix_record_roundtrip() {
        let z = random_passive(2, 5).unwrap();
        let rec = MatrixRecord::interleaved(z.matrix());
        assert_eq!(rec.to_matrix().unwrap(), *z.matrix());

        let grouped = MatrixRecord {
            ordering: Ordering::Grouped,
            ..MatrixRecord::interleaved(&interleaved_to_grouped(z.matrix()).unwrap())
        };
        assert_eq!(grouped.to_matrix().unwrap(), *z.matrix());
    }
}
