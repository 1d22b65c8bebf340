//! Composite coherence matrices `C = R_D^{-1/2} R R_D^{-1/2}`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{composite_signal_cov, CorrelationProfile};
use crate::numerics::{inv_sqrt_psd, sym_eig, EigenPairs, SymMatrix, DEFAULT_REL_TOL};
use crate::synth::MultiDataset;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Sample,
    Population,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoherenceOptions {
    /// Relative eigenvalue floor for each per-set covariance.
    pub rel_tol: f64,
    /// Subtract per-row sample means before forming covariances.
    pub center: bool,
}

impl Default for CoherenceOptions {
    fn default() -> Self {
        Self {
            rel_tol: DEFAULT_REL_TOL,
            center: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CoherenceDecomposition {
    pub p_sets: usize,
    pub dim: usize,
    pub matrix: SymMatrix,
    pub eigen: EigenPairs,
    pub source: Source,
}

impl CoherenceDecomposition {
    fn new(p_sets: usize, dim: usize, matrix: SymMatrix, source: Source) -> Result<Self> {
        let eigen = sym_eig(&matrix)?;
        Ok(Self {
            p_sets,
            dim,
            matrix,
            eigen,
            source,
        })
    }

    pub fn order(&self) -> usize {
        self.p_sets * self.dim
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigen.values
    }
}

/// Eigenvector `component_index` split into `P` consecutive length-`n` parts.
#[derive(Clone, Debug)]
pub struct EigvecPartition {
    pub component_index: usize,
    pub subvectors: Vec<DVector<f64>>,
}

impl EigvecPartition {
    pub fn squared_norms(&self) -> Vec<f64> {
        self.subvectors.iter().map(|v| v.norm_squared()).collect()
    }
}

/// Whitens a composite covariance block-wise. `r` is `nP x nP` with the
/// sets stacked in order.
pub fn whiten_blocks(
    r: &DMatrix<f64>,
    p_sets: usize,
    dim: usize,
    rel_tol: f64,
) -> Result<SymMatrix> {
    let order = p_sets * dim;
    let mut w = DMatrix::zeros(order, order);
    for p in 0..p_sets {
        let rpp = SymMatrix::symmetrize(r.view((p * dim, p * dim), (dim, dim)).into_owned());
        let wp = inv_sqrt_psd(&rpp, rel_tol)?;
        w.view_mut((p * dim, p * dim), (dim, dim))
            .copy_from(wp.as_matrix());
    }
    Ok(SymMatrix::symmetrize(&w * r * &w))
}

/// Sample coherence of an `nP x M` stacked data matrix, `1/M` normalized.
pub fn coherence_of_stacked(
    x: &DMatrix<f64>,
    p_sets: usize,
    dim: usize,
    opts: &CoherenceOptions,
) -> Result<SymMatrix> {
    let m = x.ncols();
    if m == 0 {
        return Err(Error::invalid("no samples"));
    }
    let centered;
    let x = if opts.center {
        let mut c = x.clone();
        for mut row in c.row_iter_mut() {
            let mean = row.mean();
            row.add_scalar_mut(-mean);
        }
        centered = c;
        &centered
    } else {
        x
    };
    let order = x.nrows();
    let xt = x.transpose();
    let mut r = DMatrix::zeros(order, order);
    r.gemm_tr(1.0 / m as f64, &xt, &xt, 0.0);
    whiten_blocks(&r, p_sets, dim, opts.rel_tol)
}

/// Sample composite coherence and its eigenstructure.
pub fn sample_coherence(
    data: &MultiDataset,
    opts: &CoherenceOptions,
) -> Result<CoherenceDecomposition> {
    if data.samples() <= data.dim() {
        log::warn!(
            "M = {} is not larger than n = {}; per-set covariances are singular",
            data.samples(),
            data.dim()
        );
    }
    let c = coherence_of_stacked(&data.stacked(), data.p_sets(), data.dim(), opts)?;
    CoherenceDecomposition::new(data.p_sets(), data.dim(), c, Source::Sample)
}

/// Population coherence `F R_ss F^T` with `F_p = (A_p A_p^T)^{-1/2} A_p`.
pub fn population_coherence(
    profile: &CorrelationProfile,
    mixing: &[DMatrix<f64>],
) -> Result<CoherenceDecomposition> {
    let (p_sets, n) = (profile.p_sets(), profile.n_components());
    if mixing.len() != p_sets {
        return Err(Error::invalid(format!(
            "{} mixing matrices for {p_sets} data sets",
            mixing.len()
        )));
    }
    let mut f = DMatrix::zeros(n * p_sets, n * p_sets);
    for (p, a) in mixing.iter().enumerate() {
        if a.shape() != (n, n) {
            return Err(Error::invalid(format!(
                "mixing matrix {} is {}x{}, expected {n}x{n}",
                p + 1,
                a.nrows(),
                a.ncols()
            )));
        }
        let gram = SymMatrix::symmetrize(a * a.transpose());
        let fp = inv_sqrt_psd(&gram, DEFAULT_REL_TOL)?.as_matrix() * a;
        f.view_mut((p * n, p * n), (n, n)).copy_from(&fp);
    }
    let (r_ss, _) = composite_signal_cov(profile)?;
    CoherenceDecomposition::new(p_sets, n, r_ss.congruence(&f), Source::Population)
}

/// Population coherence with identity mixing, i.e. the stacked signal
/// covariance itself.
pub fn population_coherence_identity(
    profile: &CorrelationProfile,
) -> Result<CoherenceDecomposition> {
    let n = profile.n_components();
    let eye = vec![DMatrix::identity(n, n); profile.p_sets()];
    population_coherence(profile, &eye)
}

/// Splits eigenvector `k` (0-based, descending eigenvalue order) into
/// per-set subvectors.
pub fn partition_eigvec(dec: &CoherenceDecomposition, k: usize) -> Result<EigvecPartition> {
    partition_vector(&dec.eigen, k, dec.p_sets, dec.dim)
}

pub(crate) fn partition_vector(
    eig: &EigenPairs,
    k: usize,
    p_sets: usize,
    dim: usize,
) -> Result<EigvecPartition> {
    if k >= eig.len() {
        return Err(Error::invalid(format!(
            "eigenvector index {k} out of range 0..{}",
            eig.len()
        )));
    }
    let v = eig.vector(k);
    let subvectors = (0..p_sets)
        .map(|p| v.rows(p * dim, dim).into_owned())
        .collect();
    Ok(EigvecPartition {
        component_index: k,
        subvectors,
    })
}
