//! Dense symmetric-matrix primitives.
//!
//! Everything downstream (coherence matrices, signal covariances, whitening
//! transforms) is a small dense symmetric matrix, so this module keeps one
//! storage type, [`SymMatrix`], and a handful of spectral operations on it.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Default relative eigenvalue floor for positive-definiteness checks.
pub const DEFAULT_REL_TOL: f64 = 1e-10;

/// Relative floor below which a negative eigenvalue is treated as a genuine
/// PSD violation rather than rounding noise.
pub const PSD_NEG_TOL: f64 = 1e-10;

/// Square symmetric matrix. Construction always produces exactly symmetric
/// storage: `get(i, j) == get(j, i)` bit for bit.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix(DMatrix<f64>);

impl SymMatrix {
    pub fn identity(order: usize) -> Self {
        SymMatrix(DMatrix::identity(order, order))
    }

    pub fn zeros(order: usize) -> Self {
        SymMatrix(DMatrix::zeros(order, order))
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        SymMatrix(DMatrix::from_fn(
            n,
            n,
            |i, j| if i == j { diag[i] } else { 0.0 },
        ))
    }

    /// Builds from the upper triangle of `f(i, j)` (`i <= j`), mirroring it.
    pub fn from_upper_fn(order: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = DMatrix::zeros(order, order);
        for j in 0..order {
            for i in 0..=j {
                let v = f(i, j);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        SymMatrix(m)
    }

    /// Row-major entries. Rejects inputs whose asymmetry exceeds rounding
    /// level; accepted inputs are symmetrized by averaging.
    pub fn from_row_major(order: usize, entries: &[f64]) -> Result<Self> {
        if order == 0 {
            return Err(Error::invalid("matrix order must be at least 1"));
        }
        if entries.len() != order * order {
            return Err(Error::invalid(format!(
                "expected {} entries for order {order}, got {}",
                order * order,
                entries.len()
            )));
        }
        Self::from_matrix(DMatrix::from_row_slice(order, order, entries))
    }

    /// Wraps a square matrix after checking it is symmetric to rounding level.
    pub fn from_matrix(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::invalid(format!(
                "matrix is {}x{}, not square",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.nrows() == 0 {
            return Err(Error::invalid("matrix order must be at least 1"));
        }
        let scale = m.iter().fold(0.0f64, |acc, v| acc.max(v.abs())).max(1.0);
        for j in 0..m.ncols() {
            for i in 0..j {
                let (a, b) = (m[(i, j)], m[(j, i)]);
                if (a - b).abs() > 1e-12 * scale || a.is_nan() != b.is_nan() {
                    return Err(Error::invalid(format!(
                        "matrix not symmetric at ({i},{j}): {a} vs {b}"
                    )));
                }
            }
        }
        Ok(Self::symmetrize(m))
    }

    /// Averages `m` with its transpose. For results of floating-point products
    /// that are symmetric in exact arithmetic.
    pub fn symmetrize(m: DMatrix<f64>) -> Self {
        let n = m.nrows();
        Self::from_upper_fn(n, |i, j| {
            if i == j {
                m[(i, i)]
            } else {
                0.5 * (m[(i, j)] + m[(j, i)])
            }
        })
    }

    pub fn order(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    /// `self - other` (both symmetric, so the result is too).
    pub fn sub(&self, other: &SymMatrix) -> SymMatrix {
        SymMatrix(&self.0 - &other.0)
    }

    /// Congruence `T * self * T^T`.
    pub fn congruence(&self, t: &DMatrix<f64>) -> SymMatrix {
        Self::symmetrize(t * &self.0 * t.transpose())
    }

    /// Symmetric permutation: `out[a][b] = self[perm[a]][perm[b]]`.
    pub fn permuted(&self, perm: &[usize]) -> SymMatrix {
        Self::from_upper_fn(perm.len(), |a, b| self.0[(perm[a], perm[b])])
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }
}

/// Eigenvalues in descending order with matching orthonormal eigenvectors
/// (column `k` of `vectors` belongs to `values[k]`).
#[derive(Clone, Debug)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl EigenPairs {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn vector(&self, k: usize) -> nalgebra::DVectorView<'_, f64> {
        self.vectors.column(k)
    }

    /// `U diag(f(lambda)) U^T`.
    pub fn compose(&self, f: impl Fn(f64) -> f64) -> SymMatrix {
        let mut scaled = self.vectors.clone();
        for (k, mut col) in scaled.column_iter_mut().enumerate() {
            col *= f(self.values[k]);
        }
        SymMatrix::symmetrize(scaled * self.vectors.transpose())
    }

    pub fn reconstruct(&self) -> SymMatrix {
        self.compose(|v| v)
    }
}

/// Full symmetric eigendecomposition, eigenvalues descending.
///
/// Ties keep the order the underlying QR iteration produced, which is
/// deterministic for identical input.
pub fn sym_eig(a: &SymMatrix) -> Result<EigenPairs> {
    if !a.is_finite() {
        return Err(Error::invalid("matrix has non-finite entries"));
    }
    let eig = SymmetricEigen::new(a.as_matrix().clone());
    let n = a.order();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&x, &y| eig.eigenvalues[y].total_cmp(&eig.eigenvalues[x]));
    let values = idx.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, idx[j])]);
    Ok(EigenPairs { values, vectors })
}

/// Symmetric inverse square root of a positive definite matrix.
///
/// Fails with [`Error::SingularMatrix`] when the smallest eigenvalue is not
/// above `rel_tol` times the largest.
pub fn inv_sqrt_psd(a: &SymMatrix, rel_tol: f64) -> Result<SymMatrix> {
    let eig = sym_eig(a)?;
    let max = eig.values[0];
    let min = *eig.values.last().expect("order >= 1");
    if max <= 0.0 || min <= rel_tol * max {
        return Err(Error::SingularMatrix {
            min_eig: min,
            max_eig: max,
            rel_tol,
        });
    }
    Ok(eig.compose(|v| 1.0 / v.sqrt()))
}

/// Symmetric square root of a PSD matrix; tiny negative eigenvalues are
/// clamped to zero.
pub fn sqrt_psd(a: &SymMatrix) -> Result<SymMatrix> {
    let eig = sym_eig(a)?;
    let max = eig.values[0];
    let min = *eig.values.last().expect("order >= 1");
    let scale = max.abs().max(min.abs());
    if min < -PSD_NEG_TOL * scale {
        return Err(Error::NotPsd {
            min_eig: min,
            max_eig: max,
        });
    }
    Ok(eig.compose(|v| v.max(0.0).sqrt()))
}

/// Smallest eigenvalue test used for PSD validation without building a root.
pub fn is_psd(a: &SymMatrix) -> Result<bool> {
    let eig = sym_eig(a)?;
    let max = eig.values[0];
    let min = *eig.values.last().expect("order >= 1");
    Ok(min >= -PSD_NEG_TOL * max.abs().max(min.abs()))
}

pub fn standard_normal_matrix<R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    rng: &mut R,
) -> DMatrix<f64> {
    // Column-major fill order, fixed so results are reproducible.
    let data: Vec<f64> = (0..rows * cols)
        .map(|_| rng.sample(StandardNormal))
        .collect();
    DMatrix::from_vec(rows, cols, data)
}

/// Haar-distributed orthogonal matrix: QR of an i.i.d. Gaussian matrix with
/// the columns of Q sign-corrected so that diag(R) > 0.
pub fn random_orthogonal<R: Rng + ?Sized>(order: usize, rng: &mut R) -> DMatrix<f64> {
    let g = standard_normal_matrix(order, order, rng);
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..order {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// `m` i.i.d. zero-mean Gaussian columns with covariance `cov`.
pub fn sample_gaussian<R: Rng + ?Sized>(
    cov: &SymMatrix,
    m: usize,
    rng: &mut R,
) -> Result<DMatrix<f64>> {
    let root = sqrt_psd(cov)?;
    let z = standard_normal_matrix(cov.order(), m, rng);
    Ok(root.as_matrix() * z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use proptest::prelude::*;

    fn random_symmetric(order: usize, seed: u64) -> SymMatrix {
        let mut rng = RngStream::new(seed);
        let g = standard_normal_matrix(order, order, &mut rng);
        SymMatrix::symmetrize(&g + g.transpose())
    }

    fn random_spd(order: usize, seed: u64) -> SymMatrix {
        let mut rng = RngStream::new(seed);
        let g = standard_normal_matrix(order, order + 3, &mut rng);
        SymMatrix::symmetrize(&g * g.transpose() + DMatrix::identity(order, order) * 0.1)
    }

    // Bisection on the k=3 hollow characteristic polynomial
    // -x^3 + x (a^2 + b^2 + c^2) + 2abc; independent of any eigen solver.
    fn k3_positive_root(a: f64, b: f64, c: f64) -> f64 {
        let f = |x: f64| -x * x * x + x * (a * a + b * b + c * c) + 2.0 * a * b * c;
        let (mut lo, mut hi) = (0.0, 3.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn identity_spectrum() {
        let e = sym_eig(&SymMatrix::identity(3)).unwrap();
        assert_eq!(e.values, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn two_by_two_correlation() {
        let a = SymMatrix::from_row_major(2, &[1.0, 0.7, 0.7, 1.0]).unwrap();
        let e = sym_eig(&a).unwrap();
        assert!((e.values[0] - 1.7).abs() < 1e-14);
        assert!((e.values[1] - 0.3).abs() < 1e-14);
    }

    #[test]
    fn three_by_three_matches_bisection() {
        let a =
            SymMatrix::from_row_major(3, &[1.0, 0.5, 0.6, 0.5, 1.0, 0.6, 0.6, 0.6, 1.0]).unwrap();
        let expected = 1.0 + k3_positive_root(0.5, 0.6, 0.6);
        assert!((expected - 2.134).abs() < 1e-3);
        let e = sym_eig(&a).unwrap();
        assert!((e.values[0] - expected).abs() < 1e-12);
    }

    #[test]
    fn non_finite_rejected() {
        let a = SymMatrix::from_diagonal(&[1.0, f64::NAN]);
        assert!(matches!(sym_eig(&a), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn asymmetric_rejected() {
        assert!(SymMatrix::from_row_major(2, &[1.0, 0.5, 0.4, 1.0]).is_err());
        assert!(SymMatrix::from_row_major(2, &[1.0, 0.5, 0.5]).is_err());
    }

    #[test]
    fn inv_sqrt_diagonal() {
        let b = inv_sqrt_psd(&SymMatrix::from_diagonal(&[4.0, 9.0]), DEFAULT_REL_TOL).unwrap();
        assert!((b.get(0, 0) - 0.5).abs() < 1e-15);
        assert!((b.get(1, 1) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(b.get(0, 1), 0.0);
        let i = inv_sqrt_psd(&SymMatrix::identity(4), DEFAULT_REL_TOL).unwrap();
        assert_eq!(i, SymMatrix::identity(4));
    }

    #[test]
    fn inv_sqrt_singular() {
        let a = SymMatrix::from_diagonal(&[1.0, 1e-12]);
        assert!(matches!(
            inv_sqrt_psd(&a, DEFAULT_REL_TOL),
            Err(Error::SingularMatrix { .. })
        ));
        assert!(inv_sqrt_psd(&SymMatrix::zeros(2), DEFAULT_REL_TOL).is_err());
    }

    #[test]
    fn sqrt_examples() {
        assert_eq!(
            sqrt_psd(&SymMatrix::identity(3)).unwrap(),
            SymMatrix::identity(3)
        );
        let s = sqrt_psd(&SymMatrix::from_diagonal(&[4.0, 0.0])).unwrap();
        assert!((s.get(0, 0) - 2.0).abs() < 1e-15);
        assert_eq!(s.get(1, 1), 0.0);
        let bad = SymMatrix::from_row_major(2, &[1.0, 2.0, 2.0, 1.0]).unwrap();
        assert!(matches!(sqrt_psd(&bad), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn orthogonal_order_one() {
        let mut rng = RngStream::new(1);
        let q = random_orthogonal(1, &mut rng);
        assert_eq!(q[(0, 0)].abs(), 1.0);
    }

    #[test]
    fn orthogonal_first_entry_symmetric() {
        let mut rng = RngStream::new(99);
        let draws = 10_000;
        let positive = (0..draws)
            .filter(|_| random_orthogonal(3, &mut rng)[(0, 0)] > 0.0)
            .count();
        // Sign test: under symmetry the count is Bin(10^4, 1/2), sd = 50.
        assert!(
            (positive as f64 - 5000.0).abs() < 250.0,
            "positive = {positive}"
        );
    }

    #[test]
    fn gaussian_identity_covariance() {
        let mut rng = RngStream::new(5);
        let m = 100_000;
        let x = sample_gaussian(&SymMatrix::identity(3), m, &mut rng).unwrap();
        let cov = &x * x.transpose() / m as f64;
        for i in 0..3 {
            for j in 0..3 {
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((cov[(i, j)] - target).abs() < 0.05);
            }
        }
    }

    #[test]
    fn gaussian_zero_covariance() {
        let mut rng = RngStream::new(5);
        let x = sample_gaussian(&SymMatrix::zeros(2), 10, &mut rng).unwrap();
        assert!(x.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn gaussian_correlated_pair() {
        let mut rng = RngStream::new(11);
        let cov = SymMatrix::from_row_major(2, &[1.0, 0.7, 0.7, 1.0]).unwrap();
        let m = 100_000;
        let x = sample_gaussian(&cov, m, &mut rng).unwrap();
        let c = &x * x.transpose();
        let r = c[(0, 1)] / (c[(0, 0)] * c[(1, 1)]).sqrt();
        assert!((r - 0.7).abs() < 0.02, "r = {r}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn eigen_reconstruction(order in 1usize..=40, seed in any::<u64>()) {
            let a = random_symmetric(order, seed);
            let e = sym_eig(&a).unwrap();
            let resid = e.reconstruct().sub(&a).frobenius_norm();
            prop_assert!(resid <= 1e-9 * a.frobenius_norm().max(f64::MIN_POSITIVE));
            for w in e.values.windows(2) {
                prop_assert!(w[0] >= w[1]);
            }
            let gram = e.vectors.transpose() * &e.vectors;
            let err = (gram - DMatrix::<f64>::identity(order, order)).norm();
            prop_assert!(err <= 1e-9);
        }

        #[test]
        fn inv_sqrt_whitens(order in 1usize..=12, seed in any::<u64>()) {
            let a = random_spd(order, seed);
            let b = inv_sqrt_psd(&a, DEFAULT_REL_TOL).unwrap();
            let w = b.as_matrix() * a.as_matrix() * b.as_matrix();
            prop_assert!((w - DMatrix::<f64>::identity(order, order)).norm() <= 1e-8);

            let mut expected: Vec<f64> = sym_eig(&a).unwrap().values.iter().map(|v| v.powf(-0.5)).collect();
            expected.sort_by(|x, y| y.total_cmp(x));
            let got = sym_eig(&b).unwrap().values;
            for (g, e) in got.iter().zip(&expected) {
                prop_assert!((g - e).abs() <= 1e-8 * e.max(1.0));
            }
        }

        #[test]
        fn sqrt_of_gram(order in 1usize..=12, rank in 1usize..=12, seed in any::<u64>()) {
            let mut rng = RngStream::new(seed);
            let g = standard_normal_matrix(order, rank, &mut rng);
            let a = SymMatrix::symmetrize(&g * g.transpose());
            let s = sqrt_psd(&a).unwrap();
            let back = s.as_matrix() * s.as_matrix().transpose();
            prop_assert!((back - a.as_matrix()).norm() <= 1e-8 * a.frobenius_norm().max(1.0));
        }

        #[test]
        fn orthogonal_contract(order in 1usize..=20, seed in any::<u64>()) {
            let mut rng = RngStream::new(seed);
            let q = random_orthogonal(order, &mut rng);
            let err = (q.transpose() * &q - DMatrix::<f64>::identity(order, order)).norm();
            prop_assert!(err <= 1e-9);
            for col in q.column_iter() {
                prop_assert!((col.norm() - 1.0).abs() <= 1e-12);
            }
        }
    }
}
