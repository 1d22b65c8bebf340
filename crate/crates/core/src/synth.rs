//! Synthetic multi-set data: `x_p = A_p s_p + n_p`.
//!
//! Signals have unit variance and follow a [`CorrelationProfile`]; mixing
//! matrices are Haar orthogonal by default; noise is white Gaussian with a
//! common variance set from the per-component SNR.

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{composite_signal_cov, CorrelationProfile, ProfileFile};
use crate::numerics::{random_orthogonal, sample_gaussian, standard_normal_matrix};
use crate::rng::RngStream;

/// Noise variance giving `snr_db` against a signal of variance `signal_var`.
/// `+inf` dB yields zero noise.
pub fn snr_to_noise_var(snr_db: f64, signal_var: f64) -> f64 {
    signal_var / 10f64.powf(snr_db / 10.0)
}

/// Ground truth carried alongside generated data.
#[derive(Clone, Debug)]
pub struct Truth {
    pub profile: CorrelationProfile,
    pub mixing: Vec<DMatrix<f64>>,
}

/// `P` observation blocks of shape `n x M`; column `m` of every block is one
/// joint sample.
#[derive(Clone, Debug)]
pub struct MultiDataset {
    dim: usize,
    samples: usize,
    blocks: Vec<DMatrix<f64>>,
    truth: Option<Truth>,
}

impl MultiDataset {
    pub fn new(blocks: Vec<DMatrix<f64>>) -> Result<Self> {
        let first = blocks
            .first()
            .ok_or_else(|| Error::invalid("need at least one data set"))?;
        let (dim, samples) = first.shape();
        if dim == 0 || samples == 0 {
            return Err(Error::invalid("data blocks must be non-empty"));
        }
        if let Some((p, b)) = blocks
            .iter()
            .enumerate()
            .find(|(_, b)| b.shape() != (dim, samples))
        {
            return Err(Error::invalid(format!(
                "block {} is {}x{}, expected {dim}x{samples}",
                p + 1,
                b.nrows(),
                b.ncols()
            )));
        }
        if blocks.iter().any(|b| b.iter().any(|v| !v.is_finite())) {
            return Err(Error::invalid("data contains non-finite values"));
        }
        Ok(Self {
            dim,
            samples,
            blocks,
            truth: None,
        })
    }

    pub fn with_truth(mut self, truth: Truth) -> Self {
        self.truth = Some(truth);
        self
    }

    pub fn p_sets(&self) -> usize {
        self.blocks.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn blocks(&self) -> &[DMatrix<f64>] {
        &self.blocks
    }

    pub fn block(&self, p: usize) -> &DMatrix<f64> {
        &self.blocks[p]
    }

    pub fn truth(&self) -> Option<&Truth> {
        self.truth.as_ref()
    }

    /// Composite `nP x M` matrix, sets stacked vertically.
    pub fn stacked(&self) -> DMatrix<f64> {
        let n = self.dim;
        let mut x = DMatrix::zeros(n * self.p_sets(), self.samples);
        for (p, b) in self.blocks.iter().enumerate() {
            x.rows_mut(p * n, n).copy_from(b);
        }
        x
    }

    /// Dataset built from columns `indices` of this one (repeats allowed),
    /// applied identically to every block. Truth is carried over.
    pub fn select_columns(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::invalid("no columns selected"));
        }
        if let Some(&bad) = indices.iter().find(|&&j| j >= self.samples) {
            return Err(Error::invalid(format!(
                "column {bad} out of range 0..{}",
                self.samples
            )));
        }
        let blocks = self
            .blocks
            .iter()
            .map(|b| b.select_columns(indices))
            .collect();
        Ok(Self {
            dim: self.dim,
            samples: indices.len(),
            blocks,
            truth: self.truth.clone(),
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MixingKind {
    /// Haar-random orthogonal `A_p`.
    #[default]
    Orthogonal,
    /// i.i.d. standard Gaussian `A_p` (full rank almost surely).
    Gaussian,
}

#[derive(Clone, Debug)]
pub struct GenConfig {
    pub profile: CorrelationProfile,
    /// Per-component SNR in dB; `f64::INFINITY` disables noise.
    pub snr_db: f64,
    pub samples: usize,
    pub seed: u64,
    pub mixing: MixingKind,
}

impl GenConfig {
    pub fn new(profile: CorrelationProfile, snr_db: f64, samples: usize, seed: u64) -> Self {
        Self {
            profile,
            snr_db,
            samples,
            seed,
            mixing: MixingKind::Orthogonal,
        }
    }
}

/// Draws one dataset. Uses child streams 0 (signals), 1 (mixing) and 2
/// (noise) of `rng`, so changing the SNR alone leaves signals and mixing
/// unchanged.
pub fn generate(cfg: &GenConfig, rng: &RngStream) -> Result<MultiDataset> {
    if cfg.samples < 1 {
        return Err(Error::invalid("samples must be >= 1"));
    }
    if cfg.snr_db.is_nan() {
        return Err(Error::invalid("snr_db is NaN"));
    }
    let profile = &cfg.profile;
    // Fails early on any non-PSD block.
    composite_signal_cov(profile)?;

    let (p_sets, n, m) = (profile.p_sets(), profile.n_components(), cfg.samples);
    let mut signal_rng = rng.child(0);
    let mut signals = vec![DMatrix::zeros(n, m); p_sets];
    for i in 0..n {
        let draws = sample_gaussian(profile.block(i), m, &mut signal_rng)?;
        for (p, s) in signals.iter_mut().enumerate() {
            s.row_mut(i).copy_from(&draws.row(p));
        }
    }

    let mut mixing_rng = rng.child(1);
    let mixing: Vec<DMatrix<f64>> = (0..p_sets)
        .map(|_| match cfg.mixing {
            MixingKind::Orthogonal => random_orthogonal(n, &mut mixing_rng),
            MixingKind::Gaussian => standard_normal_matrix(n, n, &mut mixing_rng),
        })
        .collect();

    let noise_sd = snr_to_noise_var(cfg.snr_db, 1.0).sqrt();
    let mut noise_rng = rng.child(2);
    let blocks = signals
        .iter()
        .zip(&mixing)
        .map(|(s, a)| {
            let mut x = a * s;
            if noise_sd > 0.0 {
                x += standard_normal_matrix(n, m, &mut noise_rng) * noise_sd;
            }
            x
        })
        .collect();

    Ok(MultiDataset::new(blocks)?.with_truth(Truth {
        profile: profile.clone(),
        mixing,
    }))
}

/// [`generate`] with the stream seeded from `cfg.seed`.
pub fn generate_seeded(cfg: &GenConfig) -> Result<MultiDataset> {
    generate(cfg, &RngStream::new(cfg.seed))
}

/// `manifest.json` of a dataset directory.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    #[serde(rename = "P")]
    pub p_sets: usize,
    pub n: usize,
    #[serde(rename = "M")]
    pub samples: usize,
    /// `None` when no noise was added.
    pub snr_db: Option<f64>,
    pub seed: Option<u64>,
    pub files: Vec<String>,
    pub truth_profile: Option<ProfileFile>,
}

pub const MANIFEST_FILE: &str = "manifest.json";

/// Writes `manifest.json` plus one headerless CSV per set (`M` rows, `n`
/// columns).
pub fn write_dataset(
    dir: &Path,
    data: &MultiDataset,
    snr_db: Option<f64>,
    seed: Option<u64>,
) -> Result<Manifest> {
    fs::create_dir_all(dir)?;
    let mut files = Vec::with_capacity(data.p_sets());
    for (p, block) in data.blocks().iter().enumerate() {
        let name = format!("x{}.csv", p + 1);
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .from_path(dir.join(&name))?;
        for col in block.column_iter() {
            w.write_record(col.iter().map(|v| v.to_string()))?;
        }
        w.flush()?;
        files.push(name);
    }
    let manifest = Manifest {
        p_sets: data.p_sets(),
        n: data.dim(),
        samples: data.samples(),
        snr_db: snr_db.filter(|s| s.is_finite()),
        seed,
        files,
        truth_profile: data.truth().map(|t| t.profile.to_file_doc()),
    };
    let f = fs::File::create(dir.join(MANIFEST_FILE))?;
    serde_json::to_writer_pretty(f, &manifest)?;
    Ok(manifest)
}

/// Reads a directory written by [`write_dataset`]. Truth profile (without
/// mixing) is attached when present.
pub fn read_dataset(dir: &Path) -> Result<(MultiDataset, Manifest)> {
    let manifest: Manifest = serde_json::from_reader(std::io::BufReader::new(fs::File::open(
        dir.join(MANIFEST_FILE),
    )?))?;
    if manifest.files.len() != manifest.p_sets {
        return Err(Error::invalid(format!(
            "manifest lists {} files for P = {}",
            manifest.files.len(),
            manifest.p_sets
        )));
    }
    let mut blocks = Vec::with_capacity(manifest.p_sets);
    for name in &manifest.files {
        let path: PathBuf = dir.join(name);
        let mut r = csv::ReaderBuilder::new()
            .has_headers(false)
            .from_path(&path)?;
        let mut values = Vec::with_capacity(manifest.n * manifest.samples);
        let mut rows = 0;
        for rec in r.records() {
            let rec = rec?;
            if rec.len() != manifest.n {
                return Err(Error::invalid(format!(
                    "{}: row {} has {} columns, expected {}",
                    path.display(),
                    rows + 1,
                    rec.len(),
                    manifest.n
                )));
            }
            for field in rec.iter() {
                values.push(field.trim().parse::<f64>().map_err(|e| {
                    Error::invalid(format!("{}: bad number {field:?}: {e}", path.display()))
                })?);
            }
            rows += 1;
        }
        if rows != manifest.samples {
            return Err(Error::invalid(format!(
                "{}: {rows} rows, manifest says M = {}",
                path.display(),
                manifest.samples
            )));
        }
        // Rows of the file are samples, i.e. columns of the block.
        blocks.push(DMatrix::from_vec(manifest.n, rows, values));
    }
    let mut data = MultiDataset::new(blocks)?;
    if let Some(doc) = &manifest.truth_profile {
        data = data.with_truth(Truth {
            profile: CorrelationProfile::from_file_doc(doc)?,
            mixing: Vec::new(),
        });
    }
    Ok((data, manifest))
}
