//! Bootstrap tests for the correlated-subspace dimension and for the
//! correlation map.
//!
//! [`corr_dim`] tests `H0: d = s` for `s = 0, 1, ...` using the statistic
//! `T(s) = sum_{i=s+1}^{s+P} (lambda_i - 1)^2` on the sample coherence
//! spectrum. [`corr_struct`] then tests, for each of the top `d_hat`
//! eigenvectors and each data set `p`, whether the subvector `u_p` is zero,
//! using `T = ||u_p||^2`. Both null distributions come from the same kind of
//! bootstrap: columns are resampled with replacement, jointly across sets.
//!
//! Bootstrap eigenvectors are matched to observed ones purely by eigenvalue
//! rank.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coherence::{coherence_of_stacked, CoherenceOptions};
use crate::error::{Error, Result};
use crate::model::{pair_count, PairMap, PairMapDoc};
use crate::numerics::{sym_eig, EigenPairs, DEFAULT_REL_TOL};
use crate::rng::RngStream;
use crate::synth::MultiDataset;

pub const DEFAULT_BOOTSTRAPS: usize = 1000;
pub const DEFAULT_PFA: f64 = 0.05;
pub const DEFAULT_SEED: u64 = 20190417;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DetectConfig {
    pub bootstraps: usize,
    pub pfa: f64,
    pub seed: u64,
    /// Gap under which consecutive bootstrap eigenvalues among the top
    /// `d_hat` are reported as rank-unstable.
    pub eig_tol: f64,
    pub rel_tol: f64,
    pub center: bool,
    /// Reuse the dimension test's resamples for the structure test.
    pub shared_resamples: bool,
}

impl Default for DetectConfig {
    fn default() -> Self {
        Self {
            bootstraps: DEFAULT_BOOTSTRAPS,
            pfa: DEFAULT_PFA,
            seed: DEFAULT_SEED,
            eig_tol: 1e-6,
            rel_tol: DEFAULT_REL_TOL,
            center: false,
            shared_resamples: true,
        }
    }
}

impl DetectConfig {
    pub fn validate(&self) -> Result<()> {
        if self.bootstraps < 1 {
            return Err(Error::invalid("bootstraps must be >= 1"));
        }
        if !(self.pfa > 0.0 && self.pfa < 1.0) {
            return Err(Error::invalid(format!(
                "pfa must lie in (0, 1), got {}",
                self.pfa
            )));
        }
        Ok(())
    }

    fn coherence_options(&self) -> CoherenceOptions {
        CoherenceOptions {
            rel_tol: self.rel_tol,
            center: self.center,
        }
    }

    fn dim_stream(&self) -> RngStream {
        RngStream::new(self.seed).child(0)
    }

    fn struct_stream(&self) -> RngStream {
        RngStream::new(self.seed).child(if self.shared_resamples { 0 } else { 1 })
    }
}

/// Fraction of bootstrap statistics with `|t_b - t_obs| >= t_obs`.
pub fn pvalue(t_obs: f64, t_boot: &[f64]) -> f64 {
    if t_boot.is_empty() {
        return f64::NAN;
    }
    let hits = t_boot
        .iter()
        .filter(|&&tb| t_obs <= (tb - t_obs).abs())
        .count();
    hits as f64 / t_boot.len() as f64
}

/// `sum_{i=s}^{s+P-1} (eigs[i] - 1)^2` over a descending spectrum.
pub fn stat_dim(eigs: &[f64], s: usize, p_sets: usize) -> Result<f64> {
    if s + p_sets > eigs.len() {
        return Err(Error::invalid(format!(
            "s + P = {} exceeds spectrum length {}",
            s + p_sets,
            eigs.len()
        )));
    }
    Ok(eigs[s..s + p_sets].iter().map(|v| (v - 1.0).powi(2)).sum())
}

/// `M` column indices drawn uniformly with replacement.
pub fn draw_indices<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Vec<usize> {
    (0..m).map(|_| rng.random_range(0..m)).collect()
}

/// One bootstrap resample; the same index vector is applied to every set.
pub fn bootstrap_resample(data: &MultiDataset, rng: &mut RngStream) -> Result<MultiDataset> {
    let idx = draw_indices(data.samples(), rng);
    data.select_columns(&idx)
}

/// Resample index vectors for `count` bootstraps, resample `b` drawn from
/// child stream `b`.
pub fn resample_indices(m: usize, count: usize, stream: &RngStream) -> Vec<Vec<usize>> {
    (0..count)
        .map(|b| draw_indices(m, &mut stream.child(b as u64)))
        .collect()
}

fn spectra_for_indices(
    data: &MultiDataset,
    indices: &[Vec<usize>],
    opts: &CoherenceOptions,
) -> Result<Vec<EigenPairs>> {
    let x = data.stacked();
    let (p_sets, dim) = (data.p_sets(), data.dim());
    indices
        .par_iter()
        .map(|idx| {
            let xb = x.select_columns(idx);
            sym_eig(&coherence_of_stacked(&xb, p_sets, dim, opts)?)
        })
        .collect()
}

fn bootstrap_spectra(
    data: &MultiDataset,
    cfg: &DetectConfig,
    stream: &RngStream,
) -> Result<Vec<EigenPairs>> {
    let x = data.stacked();
    let (p_sets, dim, m) = (data.p_sets(), data.dim(), data.samples());
    let opts = cfg.coherence_options();
    (0..cfg.bootstraps)
        .into_par_iter()
        .map(|b| {
            let idx = draw_indices(m, &mut stream.child(b as u64));
            let xb = x.select_columns(&idx);
            sym_eig(&coherence_of_stacked(&xb, p_sets, dim, &opts)?)
        })
        .collect()
}

fn observed_spectrum(data: &MultiDataset, cfg: &DetectConfig) -> Result<EigenPairs> {
    sym_eig(&coherence_of_stacked(
        &data.stacked(),
        data.p_sets(),
        data.dim(),
        &cfg.coherence_options(),
    )?)
}

fn check_shapes(data: &MultiDataset) -> Result<()> {
    if data.p_sets() < 2 {
        return Err(Error::invalid("need at least 2 data sets"));
    }
    if data.samples() <= data.dim() {
        log::warn!(
            "M = {} <= n = {}: sample covariances will be singular",
            data.samples(),
            data.dim()
        );
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct DimResult {
    pub d_hat: usize,
    /// `P(s)` for `s = 0..n`.
    pub pvalues: Vec<f64>,
    /// Observed `T(s)` for `s = 0..n`.
    pub statistics: Vec<f64>,
    /// `T_b(s)`, indexed `[s][b]`.
    pub bootstrap_statistics: Vec<Vec<f64>>,
}

fn dim_from_spectra(
    observed: &EigenPairs,
    boot: &[EigenPairs],
    p_sets: usize,
    dim: usize,
    pfa: f64,
) -> Result<DimResult> {
    let mut pvalues = Vec::with_capacity(dim);
    let mut statistics = Vec::with_capacity(dim);
    let mut bootstrap_statistics = Vec::with_capacity(dim);
    for s in 0..dim {
        let t = stat_dim(&observed.values, s, p_sets)?;
        let tb = boot
            .iter()
            .map(|e| stat_dim(&e.values, s, p_sets))
            .collect::<Result<Vec<_>>>()?;
        pvalues.push(pvalue(t, &tb));
        statistics.push(t);
        bootstrap_statistics.push(tb);
    }
    let d_hat = pvalues.iter().position(|&p| p >= pfa).unwrap_or(dim - 1);
    Ok(DimResult {
        d_hat,
        pvalues,
        statistics,
        bootstrap_statistics,
    })
}

/// Estimates the number of correlated components.
pub fn corr_dim(data: &MultiDataset, cfg: &DetectConfig) -> Result<DimResult> {
    cfg.validate()?;
    check_shapes(data)?;
    let observed = observed_spectrum(data, cfg)?;
    let boot = bootstrap_spectra(data, cfg, &cfg.dim_stream())?;
    dim_from_spectra(&observed, &boot, data.p_sets(), data.dim(), cfg.pfa)
}

/// [`corr_dim`] with caller-supplied resample index vectors (one per
/// bootstrap) in place of drawn ones.
pub fn corr_dim_with_indices(
    data: &MultiDataset,
    indices: &[Vec<usize>],
    cfg: &DetectConfig,
) -> Result<DimResult> {
    check_shapes(data)?;
    if indices.is_empty() {
        return Err(Error::invalid("need at least one resample"));
    }
    let observed = observed_spectrum(data, cfg)?;
    let boot = spectra_for_indices(data, indices, &cfg.coherence_options())?;
    dim_from_spectra(&observed, &boot, data.p_sets(), data.dim(), cfg.pfa)
}

#[derive(Clone, Debug, PartialEq)]
pub struct StructResult {
    pub map: PairMap,
    /// `[i][p]` p-value of `H0: u_p^(i) = 0`.
    pub pvalues: Vec<Vec<f64>>,
    /// Observed `||u_p^(i)||^2`, `[i][p]`.
    pub statistics: Vec<Vec<f64>>,
}

fn subvector_sq_norm(eig: &EigenPairs, rank: usize, p: usize, dim: usize) -> f64 {
    eig.vector(rank).rows(p * dim, dim).norm_squared()
}

fn struct_from_spectra(
    observed: &EigenPairs,
    boot: &[EigenPairs],
    d_hat: usize,
    p_sets: usize,
    dim: usize,
    pfa: f64,
) -> StructResult {
    let mut map = PairMap::ones(d_hat, p_sets);
    let mut pvalues = vec![vec![0.0; p_sets]; d_hat];
    let mut statistics = vec![vec![0.0; p_sets]; d_hat];
    for i in 0..d_hat {
        for p in 0..p_sets {
            let t = subvector_sq_norm(observed, i, p, dim);
            let tb: Vec<f64> = boot
                .iter()
                .map(|e| subvector_sq_norm(e, i, p, dim))
                .collect();
            let pv = pvalue(t, &tb);
            pvalues[i][p] = pv;
            statistics[i][p] = t;
            if pv >= pfa {
                for q in (0..p_sets).filter(|&q| q != p) {
                    map.set(i, p, q, false);
                }
            }
        }
    }
    StructResult {
        map,
        pvalues,
        statistics,
    }
}

/// Estimates which data sets each of the top `d_hat` components spans.
pub fn corr_struct(data: &MultiDataset, d_hat: usize, cfg: &DetectConfig) -> Result<StructResult> {
    cfg.validate()?;
    check_shapes(data)?;
    if d_hat > data.dim() - 1 {
        return Err(Error::invalid(format!(
            "d_hat = {d_hat} exceeds n - 1 = {}",
            data.dim() - 1
        )));
    }
    if d_hat == 0 {
        return Ok(StructResult {
            map: PairMap::zeros(0, data.p_sets()),
            pvalues: Vec::new(),
            statistics: Vec::new(),
        });
    }
    let observed = observed_spectrum(data, cfg)?;
    let boot = bootstrap_spectra(data, cfg, &cfg.struct_stream())?;
    Ok(struct_from_spectra(
        &observed,
        &boot,
        d_hat,
        data.p_sets(),
        data.dim(),
        cfg.pfa,
    ))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Diagnostic {
    /// Resamples in which two consecutive eigenvalues among the top `d_hat`
    /// (and the next one) were closer than `tol`; rank matching of
    /// eigenvectors is unreliable there.
    RankInstability {
        resamples: usize,
        bootstraps: usize,
        tol: f64,
    },
    /// Observed eigenvalues among the top `d_hat` closer than `tol`
    /// (1-based ranks).
    NearDegenerateSpectrum { ranks: Vec<usize>, tol: f64 },
    /// The dimension test stopped at its cap without retaining `H0`.
    DimensionCapped { d_hat: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct DetectionReport {
    pub d_hat: usize,
    pub pvalues_dim: Vec<f64>,
    pub map: PairMap,
    pub pvalues_struct: Vec<Vec<f64>>,
    pub diagnostics: Vec<Diagnostic>,
    pub eigenvalues: Vec<f64>,
    pub seed: u64,
    pub bootstraps: usize,
    pub pfa: f64,
}

/// JSON form of a [`DetectionReport`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReportDoc {
    pub d_hat: usize,
    pub pvalues_dim: Vec<f64>,
    pub map: PairMapDoc,
    pub pvalues_struct: Vec<Vec<f64>>,
    pub diagnostics: Vec<Diagnostic>,
    pub seed: u64,
    pub bootstraps: usize,
    pub pfa: f64,
}

impl DetectionReport {
    pub fn to_doc(&self) -> ReportDoc {
        ReportDoc {
            d_hat: self.d_hat,
            pvalues_dim: self.pvalues_dim.clone(),
            map: self.map.to_doc(),
            pvalues_struct: self.pvalues_struct.clone(),
            diagnostics: self.diagnostics.clone(),
            seed: self.seed,
            bootstraps: self.bootstraps,
            pfa: self.pfa,
        }
    }
}

fn diagnose(
    observed: &EigenPairs,
    boot: &[EigenPairs],
    d_hat: usize,
    dim: usize,
    tol: f64,
) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    if d_hat == dim - 1 && d_hat > 0 {
        out.push(Diagnostic::DimensionCapped { d_hat });
    }
    if d_hat == 0 {
        return out;
    }
    let close = |v: &[f64]| {
        (0..d_hat)
            .filter(|&k| (v[k] - v[k + 1]).abs() < tol)
            .collect::<Vec<_>>()
    };
    let unstable = boot.iter().filter(|e| !close(&e.values).is_empty()).count();
    if unstable > 0 {
        out.push(Diagnostic::RankInstability {
            resamples: unstable,
            bootstraps: boot.len(),
            tol,
        });
    }
    let obs = close(&observed.values);
    if !obs.is_empty() {
        let mut ranks: Vec<usize> = obs.iter().flat_map(|&k| [k + 1, k + 2]).collect();
        ranks.dedup();
        out.push(Diagnostic::NearDegenerateSpectrum { ranks, tol });
    }
    out
}

/// Full pipeline: dimension test, then structure test on the same data.
pub fn detect(data: &MultiDataset, cfg: &DetectConfig) -> Result<DetectionReport> {
    cfg.validate()?;
    check_shapes(data)?;
    let (p_sets, dim) = (data.p_sets(), data.dim());
    let observed = observed_spectrum(data, cfg)?;
    let boot_dim = bootstrap_spectra(data, cfg, &cfg.dim_stream())?;
    let dim_res = dim_from_spectra(&observed, &boot_dim, p_sets, dim, cfg.pfa)?;
    let d_hat = dim_res.d_hat;

    let boot_struct_owned;
    let boot_struct = if cfg.shared_resamples || d_hat == 0 {
        &boot_dim
    } else {
        boot_struct_owned = bootstrap_spectra(data, cfg, &cfg.struct_stream())?;
        &boot_struct_owned
    };
    let st = struct_from_spectra(&observed, boot_struct, d_hat, p_sets, dim, cfg.pfa);
    let diagnostics = diagnose(&observed, boot_struct, d_hat, dim, cfg.eig_tol);
    debug_assert_eq!(st.map.cols(), pair_count(p_sets));
    Ok(DetectionReport {
        d_hat,
        pvalues_dim: dim_res.pvalues,
        map: st.map,
        pvalues_struct: st.pvalues,
        diagnostics,
        eigenvalues: observed.values,
        seed: cfg.seed,
        bootstraps: cfg.bootstraps,
        pfa: cfg.pfa,
    })
}
