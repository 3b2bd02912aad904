//! Dense complex matrices, Hermitian eigendecomposition and the real
//! symmetric embedding used to hand complex PSD constraints to the conic
//! solver.
//!
//! Matrices are thin newtypes over `nalgebra` storage. A [`HermitianMatrix`]
//! is symmetrized on construction, so every consumer can rely on exact
//! conjugate symmetry and a real diagonal.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Complex column vector.
pub type CVector = DVector<Complex64>;

/// Default absolute tolerance on the smallest eigenvalue for PSD tests.
pub const PSD_TOL: f64 = 1e-8;

const EIG_MAX_ITER: usize = 10_000;
const EIG_RESIDUAL_TOL: f64 = 1e-10;

/// Imaginary unit.
pub const J: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// General dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<Complex64>);

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self(DMatrix::zeros(rows, cols))
    }

    /// Builds a matrix from row-major entries.
    pub fn from_row_slice(rows: usize, cols: usize, entries: &[Complex64]) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: format!("{} entries", rows * cols),
                found: format!("{} entries", entries.len()),
            });
        }
        Self::from_matrix(DMatrix::from_row_slice(rows, cols, entries))
    }

    pub fn from_matrix(m: DMatrix<Complex64>) -> Result<Self> {
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
        }
        Ok(Self(m))
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn as_matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.0
    }

    /// Row `i` as a column vector (no conjugation).
    pub fn row_vector(&self, i: usize) -> CVector {
        self.0.row(i).transpose()
    }

    pub fn column_vector(&self, j: usize) -> CVector {
        self.0.column(j).into_owned()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[(i, j)]
    }
}

/// Complex Hermitian matrix. Construction averages `A` and `A^H`, so
/// `A[i][j] == conj(A[j][i])` holds bit-for-bit and the diagonal is real.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(DMatrix<Complex64>);

impl HermitianMatrix {
    pub fn zeros(n: usize) -> Self {
        Self(DMatrix::zeros(n, n))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = DMatrix::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(d, 0.0);
        }
        Self(m)
    }

    /// Symmetrizes `m` as `(m + m^H) / 2`.
    pub fn new(m: DMatrix<Complex64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch {
                expected: "square matrix".into(),
                found: format!("{}x{}", m.nrows(), m.ncols()),
            });
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
        }
        Ok(Self::symmetrize(m))
    }

    fn symmetrize(m: DMatrix<Complex64>) -> Self {
        let n = m.nrows();
        let mut out = DMatrix::zeros(n, n);
        for j in 0..n {
            out[(j, j)] = Complex64::new(m[(j, j)].re, 0.0);
            for i in (j + 1)..n {
                let v = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
                out[(i, j)] = v;
                out[(j, i)] = v.conj();
            }
        }
        Self(out)
    }

    /// `v v^H`.
    pub fn outer(v: &CVector) -> Self {
        Self::symmetrize(v * v.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.0[(i, i)].re).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_same_dim(self.dim(), other.dim())?;
        Ok(Self::symmetrize(&self.0 + &other.0))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_same_dim(self.dim(), other.dim())?;
        Ok(Self::symmetrize(&self.0 - &other.0))
    }

    pub fn scale(&self, k: f64) -> Self {
        Self::symmetrize(&self.0 * Complex64::new(k, 0.0))
    }

    /// `U A U^H`.
    pub fn congruence(&self, u: &DMatrix<Complex64>) -> Result<Self> {
        if u.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: format!("{} columns", self.dim()),
                found: format!("{} columns", u.ncols()),
            });
        }
        Ok(Self::symmetrize(u * &self.0 * u.adjoint()))
    }
}

fn check_same_dim(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch {
            expected: format!("dimension {a}"),
            found: format!("dimension {b}"),
        });
    }
    Ok(())
}

/// Eigendecomposition `A = U diag(values) U^H` with eigenvalues sorted in
/// descending order.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<Complex64>,
}

impl HermitianEigen {
    pub fn vector(&self, k: usize) -> CVector {
        self.vectors.column(k).into_owned()
    }

    pub fn min_value(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }
}

pub fn hermitian_eig(a: &HermitianMatrix) -> Result<HermitianEigen> {
    let n = a.dim();
    if n == 0 {
        return Ok(HermitianEigen {
            values: Vec::new(),
            vectors: DMatrix::zeros(0, 0),
        });
    }
    let eig = SymmetricEigen::try_new(a.0.clone(), 1e-15, EIG_MAX_ITER).ok_or_else(|| {
        Error::NonConvergence {
            what: "hermitian eigendecomposition".into(),
            residual: f64::NAN,
        }
    })?;

    let mut order: Vec<usize> = (0..n).collect();
    // Stable sort keeps the solver's order on ties.
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }

    let out = HermitianEigen { values, vectors };
    let residual = reconstruction_residual(a, &out);
    if residual > EIG_RESIDUAL_TOL {
        return Err(Error::NonConvergence {
            what: "hermitian eigendecomposition".into(),
            residual,
        });
    }
    Ok(out)
}

/// `‖A − U diag(λ) U^H‖_F / max(1, ‖A‖_F)`.
pub fn reconstruction_residual(a: &HermitianMatrix, eig: &HermitianEigen) -> f64 {
    let n = a.dim();
    let mut rebuilt = DMatrix::<Complex64>::zeros(n, n);
    for (k, &lam) in eig.values.iter().enumerate() {
        let u = eig.vectors.column(k);
        rebuilt += (&u * u.adjoint()) * Complex64::new(lam, 0.0);
    }
    let diff: f64 = (&a.0 - rebuilt).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    diff / a.frobenius_norm().max(1.0)
}

/// Real symmetric matrix `[[Re A, −Im A], [Im A, Re A]]` of order `2n`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealSymmetricEmbedding(DMatrix<f64>);

impl RealSymmetricEmbedding {
    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    /// Recovers the Hermitian matrix from the top-left and bottom-left blocks.
    pub fn to_hermitian(&self) -> HermitianMatrix {
        let n = self.dim() / 2;
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = Complex64::new(self.0[(i, j)], self.0[(n + i, j)]);
            }
        }
        HermitianMatrix::symmetrize(m)
    }
}

pub fn real_embed(a: &HermitianMatrix) -> RealSymmetricEmbedding {
    let n = a.dim();
    let mut e = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = a.0[(i, j)];
            e[(i, j)] = z.re;
            e[(n + i, n + j)] = z.re;
            e[(i, n + j)] = -z.im;
            e[(n + i, j)] = z.im;
        }
    }
    RealSymmetricEmbedding(e)
}

/// `a^H A a`. The imaginary part of the result is checked against round-off
/// and dropped.
pub fn quadratic_form(a: &CVector, m: &HermitianMatrix) -> Result<f64> {
    check_same_dim(m.dim(), a.len())?;
    let v = (a.adjoint() * &m.0 * a)[(0, 0)];
    let scale = m.frobenius_norm() * a.norm_squared();
    debug_assert!(v.im.abs() <= 1e-12 * scale.max(1.0), "quadratic form imaginary part {}", v.im);
    Ok(v.re)
}

pub fn is_psd(a: &HermitianMatrix, tol: f64) -> Result<bool> {
    if a.dim() == 0 {
        return Ok(true);
    }
    Ok(hermitian_eig(a)?.min_value() >= -tol)
}

/// Smallest eigenvalue, `+inf` for an empty matrix.
pub fn min_eigenvalue(a: &HermitianMatrix) -> Result<f64> {
    if a.dim() == 0 {
        return Ok(f64::INFINITY);
    }
    Ok(hermitian_eig(a)?.min_value())
}

/// Principal square root of a PSD matrix; negative round-off eigenvalues are
/// clamped to zero.
pub fn psd_sqrt(a: &HermitianMatrix) -> Result<DMatrix<Complex64>> {
    let eig = hermitian_eig(a)?;
    let n = a.dim();
    let mut out = DMatrix::zeros(n, n);
    for (k, &lam) in eig.values.iter().enumerate() {
        let u = eig.vectors.column(k);
        out += (&u * u.adjoint()) * Complex64::new(lam.max(0.0).sqrt(), 0.0);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> HermitianMatrix {
        let m = DMatrix::from_fn(n, n, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        HermitianMatrix::new(m).unwrap()
    }

    #[test]
    fn eig_identity() {
        let e = hermitian_eig(&HermitianMatrix::identity(3)).unwrap();
        for v in &e.values {
            assert_abs_diff_eq!(*v, 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn eig_diagonal_sorted() {
        let e = hermitian_eig(&HermitianMatrix::from_real_diagonal(&[1.0, 3.0])).unwrap();
        assert_abs_diff_eq!(e.values[0], 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e.values[1], 1.0, epsilon = 1e-14);
        // top eigenvector is e_2 up to phase
        assert_abs_diff_eq!(e.vectors[(1, 0)].norm(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e.vectors[(0, 0)].norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn eig_rank_one() {
        let s = 1.0 / 2f64.sqrt();
        let v = CVector::from_vec(vec![c(s, 0.0), c(0.0, s)]);
        let e = hermitian_eig(&HermitianMatrix::outer(&v)).unwrap();
        assert_abs_diff_eq!(e.values[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e.values[1], 0.0, epsilon = 1e-14);
        let overlap = (e.vector(0).adjoint() * &v)[(0, 0)].norm();
        assert_abs_diff_eq!(overlap, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn hermitian_construction_is_exact() {
        let m = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.3), c(2.0, 1.0), c(0.0, 0.0), c(4.0, -2.0)]);
        let h = HermitianMatrix::new(m).unwrap();
        assert_eq!(h.get(0, 1), h.get(1, 0).conj());
        assert_eq!(h.get(0, 0).im, 0.0);
        assert_eq!(h.get(1, 1).im, 0.0);
    }

    #[test]
    fn embed_examples() {
        let e = real_embed(&HermitianMatrix::from_real_diagonal(&[5.0]));
        assert_eq!(e.as_matrix(), &DMatrix::from_diagonal_element(2, 2, 5.0));

        let id = real_embed(&HermitianMatrix::identity(3));
        assert_eq!(id.as_matrix(), &DMatrix::<f64>::identity(6, 6));

        let y = HermitianMatrix::new(DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)]))
            .unwrap();
        let emb = real_embed(&y);
        let mut ev: Vec<f64> = emb.as_matrix().clone().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        for (got, want) in ev.iter().zip([-1.0, -1.0, 1.0, 1.0]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
        assert_eq!(emb.to_hermitian(), y);
    }

    #[test]
    fn quadratic_form_examples() {
        let ones = CVector::from_element(4, c(1.0, 0.0));
        assert_abs_diff_eq!(quadratic_form(&ones, &HermitianMatrix::identity(4)).unwrap(), 4.0);
        assert_eq!(quadratic_form(&ones, &HermitianMatrix::zeros(4)).unwrap(), 0.0);
        let a = CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 1.0)]);
        let m = HermitianMatrix::from_real_diagonal(&[1.0, 2.0]);
        assert_abs_diff_eq!(quadratic_form(&a, &m).unwrap(), 3.0, epsilon = 1e-15);
        assert!(matches!(
            quadratic_form(&ones, &HermitianMatrix::identity(2)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn psd_examples() {
        assert!(is_psd(&HermitianMatrix::identity(3), 0.0).unwrap());
        assert!(!is_psd(&HermitianMatrix::from_real_diagonal(&[1.0, -0.1]), 1e-8).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let v = CVector::from_fn(5, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        assert!(is_psd(&HermitianMatrix::outer(&v), 1e-8).unwrap());
    }

    #[test]
    fn eig_reconstruction_on_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [1, 2, 5, 12, 36] {
            let a = random_hermitian(n, &mut rng);
            let e = hermitian_eig(&a).unwrap();
            assert!(reconstruction_residual(&a, &e) <= 1e-10);
            assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
            let unitarity = (&e.vectors.adjoint() * &e.vectors - DMatrix::<Complex64>::identity(n, n)).norm();
            assert!(unitarity < 1e-10);
        }
    }

    #[test]
    fn embedding_preserves_psd_both_ways() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for trial in 0..20 {
            let n = 2 + trial % 4;
            let g = DMatrix::from_fn(n, n, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            let psd = HermitianMatrix::new(&g * g.adjoint()).unwrap();
            let indefinite = random_hermitian(n, &mut rng).sub(&HermitianMatrix::identity(n).scale(2.0)).unwrap();
            for a in [psd, indefinite] {
                let emb = real_embed(&a);
                let lam_min = emb.as_matrix().clone().symmetric_eigenvalues().min();
                assert_eq!(is_psd(&a, 1e-10).unwrap(), lam_min >= -1e-10);
                assert_abs_diff_eq!(emb.trace(), 2.0 * a.trace(), epsilon = 1e-12);
                let asym = (emb.as_matrix() - emb.as_matrix().transpose()).amax();
                assert_eq!(asym, 0.0);
            }
        }
    }

    #[test]
    fn psd_sqrt_squares_back() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let g = DMatrix::from_fn(4, 4, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let a = HermitianMatrix::new(&g * g.adjoint()).unwrap();
        let r = psd_sqrt(&a).unwrap();
        assert!((&r * &r - a.as_matrix()).norm() < 1e-10);
    }
}
