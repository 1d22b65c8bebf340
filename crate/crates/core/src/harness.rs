//! Monte Carlo runner: generate, detect, score, aggregate.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detect::{detect, DetectConfig};
use crate::error::{Error, Result};
use crate::model::{
    derived_orders, pairs, presets, CorrelationProfile, GroundTruthMap, PairMap, ProfileFile,
};
use crate::rng::RngStream;
use crate::synth::{generate, GenConfig, MixingKind};

/// Full-scale SNR grid (dB).
pub const FULL_SNR_GRID: [f64; 9] = [-10.0, -7.0, -4.0, -1.0, 2.0, 5.0, 8.0, 11.0, 14.0];
pub const FULL_RHO_GRID: [f64; 9] = [0.88, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2, 0.1];
pub const FULL_TRIALS: usize = 500;
pub const FULL_BOOTSTRAPS: usize = 1000;
pub const DESK_TRIALS: usize = 50;
pub const DESK_BOOTSTRAPS: usize = 500;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    AccD,
    AccDall,
    Precision,
    Recall,
    CellwiseHeatmap,
}

fn all_metrics() -> Vec<Metric> {
    vec![
        Metric::AccD,
        Metric::AccDall,
        Metric::Precision,
        Metric::Recall,
        Metric::CellwiseHeatmap,
    ]
}

/// A coefficient swept by `rho_grid`: 1-based `(component, p, q)`.
pub type RhoTarget = [usize; 3];

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub profile: CorrelationProfile,
    pub snr_grid: Vec<f64>,
    pub rho_grid: Option<Vec<f64>>,
    pub rho_targets: Vec<RhoTarget>,
    pub samples: usize,
    pub trials: usize,
    pub seed: u64,
    pub mixing: MixingKind,
    pub detect: DetectConfig,
    pub metrics: Vec<Metric>,
}

/// JSON form of a [`ScenarioConfig`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScenarioFile {
    #[serde(default)]
    pub name: String,
    pub profile: ProfileFile,
    pub snr_grid: Vec<f64>,
    #[serde(default)]
    pub rho_grid: Option<Vec<f64>>,
    #[serde(default)]
    pub rho_targets: Vec<RhoTarget>,
    pub samples: usize,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub mixing: MixingKind,
    #[serde(default)]
    pub detect: DetectConfig,
    #[serde(default = "all_metrics")]
    pub metrics: Vec<Metric>,
}

fn default_trials() -> usize {
    DESK_TRIALS
}

fn default_seed() -> u64 {
    crate::detect::DEFAULT_SEED
}

impl ScenarioConfig {
    pub fn from_file_doc(doc: &ScenarioFile) -> Result<Self> {
        let cfg = Self {
            name: doc.name.clone(),
            profile: CorrelationProfile::from_file_doc(&doc.profile)?,
            snr_grid: doc.snr_grid.clone(),
            rho_grid: doc.rho_grid.clone(),
            rho_targets: doc.rho_targets.clone(),
            samples: doc.samples,
            trials: doc.trials,
            seed: doc.seed,
            mixing: doc.mixing,
            detect: doc.detect.clone(),
            metrics: doc.metrics.clone(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_file_doc(&self) -> ScenarioFile {
        ScenarioFile {
            name: self.name.clone(),
            profile: self.profile.to_file_doc(),
            snr_grid: self.snr_grid.clone(),
            rho_grid: self.rho_grid.clone(),
            rho_targets: self.rho_targets.clone(),
            samples: self.samples,
            trials: self.trials,
            seed: self.seed,
            mixing: self.mixing,
            detect: self.detect.clone(),
            metrics: self.metrics.clone(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let doc: ScenarioFile = serde_json::from_str(&fs::read_to_string(path)?)?;
        Self::from_file_doc(&doc)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(Error::invalid("trials must be >= 1"));
        }
        if self.snr_grid.is_empty() {
            return Err(Error::invalid("snr_grid is empty"));
        }
        if let Some(g) = &self.rho_grid {
            if g.is_empty() {
                return Err(Error::invalid("rho_grid is empty"));
            }
            if self.rho_targets.is_empty() {
                return Err(Error::invalid("rho_grid given without rho_targets"));
            }
        }
        if self.samples <= self.profile.n_components() {
            return Err(Error::invalid(format!(
                "samples = {} must exceed n = {}",
                self.samples,
                self.profile.n_components()
            )));
        }
        self.detect.validate()?;
        for &rho in self.rho_grid.iter().flatten() {
            self.profile_at(Some(rho))?;
        }
        Ok(())
    }

    /// Full-scale settings: 500 trials, B = 1000 and, for SNR sweeps, the
    /// -10..14 dB grid.
    pub fn full_scale(mut self) -> Self {
        self.trials = FULL_TRIALS;
        self.detect.bootstraps = FULL_BOOTSTRAPS;
        if self.rho_grid.is_none() {
            self.snr_grid = FULL_SNR_GRID.to_vec();
        }
        self
    }

    fn profile_at(&self, rho: Option<f64>) -> Result<CorrelationProfile> {
        let Some(rho) = rho else {
            return Ok(self.profile.clone());
        };
        let mut profile = self.profile.clone();
        for &[i, p, q] in &self.rho_targets {
            if i == 0 || p == 0 || q == 0 {
                return Err(Error::invalid("rho_targets are 1-based"));
            }
            profile = profile.with_rho(i - 1, p - 1, q - 1, rho)?;
        }
        Ok(profile)
    }

    fn sweep_points(&self) -> Vec<SweepPoint> {
        let mut out = Vec::new();
        for &snr_db in &self.snr_grid {
            match &self.rho_grid {
                None => out.push(SweepPoint { snr_db, rho: None }),
                Some(g) => out.extend(g.iter().map(|&r| SweepPoint {
                    snr_db,
                    rho: Some(r),
                })),
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub snr_db: f64,
    pub rho: Option<f64>,
}

impl SweepPoint {
    pub fn label(&self) -> String {
        match self.rho {
            None => format!("{}", self.snr_db),
            Some(r) => format!("{}@{}", self.snr_db, r),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricsRecord {
    pub sweep: SweepPoint,
    pub acc_d: f64,
    pub acc_dall: f64,
    pub precision: f64,
    pub recall: f64,
    /// Fraction of trials in which each ground-truth cell was detected,
    /// `n x C(P,2)`.
    pub cell_accuracy: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MapScore {
    pub precision: f64,
    pub recall: f64,
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    /// `assignment[t]` is the estimated row matched to truth row `t`.
    pub assignment: Vec<Option<usize>>,
    /// Per truth cell: whether the matched estimated row has a 1 there.
    pub cell_hits: Vec<Vec<bool>>,
}

fn ratio_or_one(num: usize, den: usize) -> f64 {
    if den == 0 {
        1.0
    } else {
        num as f64 / den as f64
    }
}

/// Scores an estimated map against the truth. Estimated rows are matched to
/// truth rows by the assignment maximizing total cell agreement, ties
/// broken by true positives.
pub fn score_map(estimated: &PairMap, truth: &GroundTruthMap) -> Result<MapScore> {
    if estimated.cols() != truth.cols() {
        return Err(Error::invalid(format!(
            "column mismatch: {} vs {}",
            estimated.cols(),
            truth.cols()
        )));
    }
    let cols = truth.cols();
    let (ne, nt) = (estimated.rows(), truth.rows());
    let pair_score = |e: usize, t: usize| -> (usize, usize) {
        let (a, b) = (estimated.row(e), truth.row(t));
        let agree = a.iter().zip(b).filter(|(x, y)| x == y).count();
        let tp = a.iter().zip(b).filter(|(x, y)| **x && **y).count();
        (agree, tp)
    };

    // All-zero truth rows are interchangeable; the search runs over a mask of
    // nonzero truth rows plus a count of zero rows consumed.
    let nonzero: Vec<usize> = (0..nt)
        .filter(|&t| truth.row(t).iter().any(|&c| c))
        .collect();
    let zero_rows: Vec<usize> = (0..nt)
        .filter(|&t| !truth.row(t).iter().any(|&c| c))
        .collect();
    let k = nonzero.len();
    if k > 20 {
        return Err(Error::invalid("more than 20 nonzero truth rows"));
    }
    let matched = ne.min(nt);
    let zero_score =
        |e: usize| -> (usize, usize) { (estimated.row(e).iter().filter(|&&c| !c).count(), 0) };
    let assignment_rows: Vec<Option<usize>> = if ne <= nt {
        let plan = assign_rows(ne, &nonzero, zero_rows.len(), &pair_score, &zero_score);
        let mut zi = 0;
        plan.into_iter()
            .map(|slot| {
                Some(match slot {
                    Some(j) => nonzero[j],
                    None => {
                        zi += 1;
                        zero_rows[zi - 1]
                    }
                })
            })
            .collect()
    } else {
        // More estimated rows than truth rows: choose which to leave out.
        let mut best: Option<(Score, Vec<Option<usize>>)> = None;
        for keep in subsets(ne, matched) {
            let rows: Vec<Vec<bool>> = keep.iter().map(|&e| estimated.row(e).to_vec()).collect();
            let s = score_map(&PairMap::from_rows(estimated.p_sets(), &rows)?, truth)?;
            let total = s
                .assignment
                .iter()
                .enumerate()
                .filter_map(|(t, a)| a.map(|e| pair_score(keep[e], t)))
                .fold((0, 0), |acc, v| (acc.0 + v.0, acc.1 + v.1));
            if best.as_ref().is_none_or(|(b, _)| total > *b) {
                let mut rows = vec![None; ne];
                for (t, a) in s.assignment.iter().enumerate() {
                    if let Some(e) = a {
                        rows[keep[*e]] = Some(t);
                    }
                }
                best = Some((total, rows));
            }
        }
        best.expect("at least one subset").1
    };

    let mut assignment = vec![None; nt];
    for (e, t) in assignment_rows.iter().enumerate() {
        if let Some(t) = t {
            assignment[*t] = Some(e);
        }
    }
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    let mut cell_hits = vec![vec![false; cols]; nt];
    for (t, hits) in cell_hits.iter_mut().enumerate() {
        for (c, hit) in hits.iter_mut().enumerate() {
            let truth_c = truth.cell(t, c);
            let est_c = assignment[t].is_some_and(|e| estimated.cell(e, c));
            *hit = est_c;
            match (est_c, truth_c) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fn_ += 1,
                _ => {}
            }
        }
    }
    for (e, t) in assignment_rows.iter().enumerate() {
        if t.is_none() {
            fp += estimated.row(e).iter().filter(|&&c| c).count();
        }
    }
    Ok(MapScore {
        precision: ratio_or_one(tp, tp + fp),
        recall: ratio_or_one(tp, tp + fn_),
        tp,
        fp,
        fn_,
        assignment,
        cell_hits,
    })
}

type Score = (usize, usize);
type Memo = Vec<Vec<Option<(Score, Option<usize>)>>>;

struct AssignCtx<'a> {
    ne: usize,
    nonzero: &'a [usize],
    zero_count: usize,
    pair_score: &'a dyn Fn(usize, usize) -> Score,
    zero_score: &'a dyn Fn(usize) -> Score,
}

impl AssignCtx<'_> {
    /// Best total score for rows `e..` given the nonzero truth rows in
    /// `mask` are taken; records the choice at `e` in `memo`.
    fn go(&self, e: usize, mask: usize, memo: &mut Memo) -> Option<Score> {
        if e == self.ne {
            return Some((0, 0));
        }
        if let Some((v, _)) = memo[e][mask] {
            return Some(v);
        }
        let mut best: Option<(Score, Option<usize>)> = None;
        let mut offer = |s: Score, rest: Score, choice: Option<usize>| {
            let total = (s.0 + rest.0, s.1 + rest.1);
            if best.is_none_or(|(b, _)| total > b) {
                best = Some((total, choice));
            }
        };
        for (j, &t) in self.nonzero.iter().enumerate() {
            if mask & (1 << j) == 0 {
                if let Some(rest) = self.go(e + 1, mask | (1 << j), memo) {
                    offer((self.pair_score)(e, t), rest, Some(j));
                }
            }
        }
        if e - (mask.count_ones() as usize) < self.zero_count {
            if let Some(rest) = self.go(e + 1, mask, memo) {
                offer((self.zero_score)(e), rest, None);
            }
        }
        memo[e][mask] = best;
        best.map(|(v, _)| v)
    }
}

/// Assigns each of `ne` estimated rows to a distinct nonzero truth row
/// (`Some(j)`, index into `nonzero`) or to one of `zero_count` all-zero rows
/// (`None`), maximizing the summed score. Requires `ne <= nonzero.len() +
/// zero_count`.
fn assign_rows(
    ne: usize,
    nonzero: &[usize],
    zero_count: usize,
    pair_score: &dyn Fn(usize, usize) -> Score,
    zero_score: &dyn Fn(usize) -> Score,
) -> Vec<Option<usize>> {
    let ctx = AssignCtx {
        ne,
        nonzero,
        zero_count,
        pair_score,
        zero_score,
    };
    let mut memo: Memo = vec![vec![None; 1 << nonzero.len()]; ne + 1];
    ctx.go(0, 0, &mut memo).expect("feasible assignment");
    let mut mask = 0;
    (0..ne)
        .map(|e| {
            let (_, choice) = memo[e][mask].expect("solved");
            if let Some(j) = choice {
                mask |= 1 << j;
            }
            choice
        })
        .collect()
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    (0u32..1 << n)
        .filter(|m| m.count_ones() as usize == k)
        .map(|m| (0..n).filter(|i| m & (1 << i) != 0).collect())
        .collect()
}

/// Number of all-ones rows.
pub fn estimate_dall(map: &PairMap) -> usize {
    (0..map.rows())
        .filter(|&r| map.row(r).iter().all(|&c| c))
        .count()
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialOutcome {
    pub d_hat: usize,
    pub dall_hat: usize,
    pub score: MapScore,
}

/// One generate/detect/score cycle. `stream` should be a trial-indexed
/// child of the master stream.
pub fn run_trial(
    profile: &CorrelationProfile,
    snr_db: f64,
    samples: usize,
    mixing: MixingKind,
    detect_cfg: &DetectConfig,
    stream: &RngStream,
) -> Result<TrialOutcome> {
    let gen = GenConfig {
        mixing,
        ..GenConfig::new(profile.clone(), snr_db, samples, stream.child(0).seed())
    };
    let data = generate(&gen, &stream.child(0))?;
    let cfg = DetectConfig {
        seed: stream.child(1).seed(),
        ..detect_cfg.clone()
    };
    let report = detect(&data, &cfg)?;
    let score = score_map(&report.map, &profile.ground_truth_map())?;
    Ok(TrialOutcome {
        d_hat: report.d_hat,
        dall_hat: estimate_dall(&report.map),
        score,
    })
}

/// Runs every sweep point. Trial `t` uses master child stream `t` at every
/// sweep point, so sweeps share random numbers across points.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<Vec<MetricsRecord>> {
    cfg.validate()?;
    let master = RngStream::new(cfg.seed);
    let mut records = Vec::new();
    for point in cfg.sweep_points() {
        let profile = cfg.profile_at(point.rho)?;
        let orders = derived_orders(&profile);
        let outcomes: Vec<TrialOutcome> = (0..cfg.trials)
            .into_par_iter()
            .map(|t| {
                run_trial(
                    &profile,
                    point.snr_db,
                    cfg.samples,
                    cfg.mixing,
                    &cfg.detect,
                    &master.child(t as u64),
                )
            })
            .collect::<Result<_>>()?;
        let n_trials = outcomes.len() as f64;
        let mean =
            |f: &dyn Fn(&TrialOutcome) -> f64| outcomes.iter().map(f).sum::<f64>() / n_trials;
        let truth = profile.ground_truth_map();
        let mut cell_accuracy = vec![vec![0.0; truth.cols()]; truth.rows()];
        for o in &outcomes {
            for (row, hits) in cell_accuracy.iter_mut().zip(&o.score.cell_hits) {
                for (acc, &h) in row.iter_mut().zip(hits) {
                    *acc += f64::from(u8::from(h)) / n_trials;
                }
            }
        }
        let rec = MetricsRecord {
            sweep: point,
            acc_d: mean(&|o| f64::from(u8::from(o.d_hat == orders.d))),
            acc_dall: mean(&|o| f64::from(u8::from(o.dall_hat == orders.d_all))),
            precision: mean(&|o| o.score.precision),
            recall: mean(&|o| o.score.recall),
            cell_accuracy,
        };
        log::info!(
            "{} {}: acc_d={:.3} acc_dall={:.3} precision={:.3} recall={:.3}",
            cfg.name,
            point.label(),
            rec.acc_d,
            rec.acc_dall,
            rec.precision,
            rec.recall
        );
        records.push(rec);
    }
    Ok(records)
}

/// Fixed 6-significant-digit rendering.
pub fn fmt_sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    let decimals = (5 - mag).max(0) as usize;
    format!("{x:.decimals$}")
}

pub fn metrics_csv(records: &[MetricsRecord]) -> Result<String> {
    if records.is_empty() {
        return Err(Error::invalid("no records"));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["sweep", "acc_d", "acc_dall", "precision", "recall"])?;
    for r in records {
        w.write_record([
            r.sweep.label(),
            fmt_sig6(r.acc_d),
            fmt_sig6(r.acc_dall),
            fmt_sig6(r.precision),
            fmt_sig6(r.recall),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("ascii"))
}

pub fn emit_csv(records: &[MetricsRecord], path: &Path) -> Result<()> {
    fs::write(path, metrics_csv(records)?)?;
    Ok(())
}

const CELL: usize = 40;
const MARGIN: usize = 48;

fn gray(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// SVG grid, one cell per (row, pair); fill is linear grayscale with 0
/// black and 1 white. Columns are labelled by 1-based pair, rows by
/// 1-based component.
pub fn render_heatmap(cells: &[Vec<f64>], p_sets: usize) -> Result<String> {
    let cols = crate::model::pair_count(p_sets);
    if let Some(bad) = cells.iter().find(|r| r.len() != cols) {
        return Err(Error::invalid(format!(
            "row has {} cells, expected {cols}",
            bad.len()
        )));
    }
    let (w, h) = (MARGIN + cols * CELL + 4, MARGIN + cells.len() * CELL + 4);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(
        s,
        r#"<rect width="{w}" height="{h}" fill="rgb(230,230,230)"/>"#
    );
    for (c, (p, q)) in pairs(p_sets).enumerate() {
        let x = MARGIN + c * CELL + CELL / 2;
        let _ = writeln!(
            s,
            r#"<text x="{x}" y="{}" font-size="12" text-anchor="middle">{}{}</text>"#,
            MARGIN - 10,
            p + 1,
            q + 1
        );
    }
    for (r, row) in cells.iter().enumerate() {
        let y = MARGIN + r * CELL;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="12" text-anchor="end">{}</text>"#,
            MARGIN - 8,
            y + CELL / 2 + 4,
            r + 1
        );
        for (c, &v) in row.iter().enumerate() {
            let g = gray(v);
            let _ = writeln!(
                s,
                r#"<rect class="cell" data-row="{r}" data-col="{c}" data-value="{}" x="{}" y="{y}" width="{CELL}" height="{CELL}" fill="rgb({g},{g},{g})" stroke="rgb(128,128,128)" stroke-width="1"/>"#,
                fmt_sig6(v),
                MARGIN + c * CELL
            );
        }
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn emit_heatmap(cells: &[Vec<f64>], p_sets: usize, path: &Path) -> Result<()> {
    fs::write(path, render_heatmap(cells, p_sets)?)?;
    Ok(())
}

pub fn heatmap_of_map(map: &PairMap) -> Vec<Vec<f64>> {
    (0..map.rows())
        .map(|r| map.row(r).iter().map(|&c| f64::from(u8::from(c))).collect())
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub crate_version: String,
    pub seed: u64,
    pub trials: usize,
    pub scenario: ScenarioFile,
    pub files: Vec<String>,
}

fn file_label(label: &str) -> String {
    label
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '.' || c == '@' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// Writes `metrics.csv`, `heatmap_<sweep>.svg` (when requested) and
/// `run-manifest.json` into `dir`. Returns the written paths.
pub fn write_outputs(
    cfg: &ScenarioConfig,
    records: &[MetricsRecord],
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let csv_path = dir.join("metrics.csv");
    emit_csv(records, &csv_path)?;
    written.push(csv_path);
    if cfg.metrics.contains(&Metric::CellwiseHeatmap) {
        for r in records {
            let path = dir.join(format!("heatmap_{}.svg", file_label(&r.sweep.label())));
            emit_heatmap(&r.cell_accuracy, cfg.profile.p_sets(), &path)?;
            written.push(path);
        }
    }
    let manifest_path = dir.join("run-manifest.json");
    let manifest = RunManifest {
        crate_version: env!("CARGO_PKG_VERSION").to_string(),
        seed: cfg.seed,
        trials: cfg.trials,
        scenario: cfg.to_file_doc(),
        files: written
            .iter()
            .filter_map(|p| p.file_name().map(|f| f.to_string_lossy().into_owned()))
            .collect(),
    };
    fs::write(&manifest_path, serde_json::to_string_pretty(&manifest)?)?;
    written.push(manifest_path);
    Ok(written)
}

/// Desk-scale versions of the four simulation scenarios.
pub mod scenarios {
    use super::*;

    fn base(
        name: &str,
        profile: CorrelationProfile,
        snr_grid: Vec<f64>,
        samples: usize,
    ) -> ScenarioConfig {
        ScenarioConfig {
            name: name.to_string(),
            profile,
            snr_grid,
            rho_grid: None,
            rho_targets: Vec::new(),
            samples,
            trials: DESK_TRIALS,
            seed: crate::detect::DEFAULT_SEED,
            mixing: MixingKind::Orthogonal,
            detect: DetectConfig {
                bootstraps: DESK_BOOTSTRAPS,
                ..Default::default()
            },
            metrics: all_metrics(),
        }
    }

    /// Four sets, `n = 7`, `M = 350`, three components correlated across
    /// all sets.
    pub fn all_sets() -> ScenarioConfig {
        base(
            "i",
            presets::all_sets_scenario(7),
            FULL_SNR_GRID.to_vec(),
            350,
        )
    }

    /// As [`all_sets`] but components 2 and 3 span subsets.
    pub fn subsets() -> ScenarioConfig {
        base(
            "ii",
            presets::subset_scenario(7),
            FULL_SNR_GRID.to_vec(),
            350,
        )
    }

    /// Five sets, two components; the coefficients between set 1 and the
    /// others are swept. `n = 7`, `M = 350`.
    pub fn threshold_sweep() -> ScenarioConfig {
        let mut cfg = base(
            "iii",
            presets::threshold_sweep_scenario(7, 0.7).expect("static profile"),
            vec![-2.5, 0.0],
            350,
        );
        cfg.rho_grid = Some(FULL_RHO_GRID.to_vec());
        cfg.rho_targets = (1..=2)
            .flat_map(|i| (2..=5).map(move |q| [i, 1, q]))
            .collect();
        cfg
    }

    /// Five sets, `n = 4`, `M = 250`, mixed full and subset cliques.
    pub fn structure() -> ScenarioConfig {
        base(
            "iv",
            presets::structure_scenario(),
            FULL_SNR_GRID.to_vec(),
            250,
        )
    }

    pub fn by_name(name: &str) -> Option<ScenarioConfig> {
        match name {
            "i" | "all-sets" => Some(all_sets()),
            "ii" | "subsets" => Some(subsets()),
            "iii" | "threshold-sweep" => Some(threshold_sweep()),
            "iv" | "structure" => Some(structure()),
            _ => None,
        }
    }
}
