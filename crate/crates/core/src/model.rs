//! Ground-truth correlation structures.
//!
//! A [`CorrelationProfile`] holds, for each component index `i`, the `P x P`
//! correlation matrix of the `i`th signal components across data sets. The
//! support of each matrix is expected to be a disjoint union of cliques; that
//! and positive semidefiniteness are checked by [`validate_profile`] rather
//! than enforced at construction, so ill-posed profiles can still be loaded
//! and inspected.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{self, SymMatrix};

/// Number of unordered data-set pairs, `C(P, 2)`.
pub fn pair_count(p_sets: usize) -> usize {
    p_sets * p_sets.saturating_sub(1) / 2
}

/// Column of the pair `(p, q)` (0-based, `p < q`) in lexicographic order
/// `(0,1), (0,2), ..., (P-2, P-1)`.
pub fn pair_index(p: usize, q: usize, p_sets: usize) -> usize {
    debug_assert!(p < q && q < p_sets);
    p * (2 * p_sets - p - 1) / 2 + (q - p - 1)
}

/// All pairs in column order.
pub fn pairs(p_sets: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..p_sets).flat_map(move |p| (p + 1..p_sets).map(move |q| (p, q)))
}

#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationProfile {
    p_sets: usize,
    blocks: Vec<SymMatrix>,
}

/// One component's nonzero correlations, data sets 1-indexed with `p < q`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentSpec {
    pub index: usize,
    pub pairs: Vec<(usize, usize, f64)>,
}

/// On-disk profile document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileFile {
    #[serde(rename = "P")]
    pub p_sets: usize,
    pub n: usize,
    pub components: Vec<ComponentSpec>,
}

impl CorrelationProfile {
    /// All components uncorrelated.
    pub fn uncorrelated(p_sets: usize, n_components: usize) -> Result<Self> {
        Self::from_pairs(p_sets, n_components, &[])
    }

    /// Builds from per-component pair lists (1-indexed components and data
    /// sets). Components not mentioned are uncorrelated.
    pub fn from_pairs(
        p_sets: usize,
        n_components: usize,
        components: &[ComponentSpec],
    ) -> Result<Self> {
        if p_sets < 2 {
            return Err(Error::invalid(format!(
                "need at least 2 data sets, got {p_sets}"
            )));
        }
        if n_components < 1 {
            return Err(Error::invalid("need at least 1 component"));
        }
        let mut dense = vec![vec![0.0; p_sets * p_sets]; n_components];
        let mut seen_index = BTreeSet::new();
        for comp in components {
            if comp.index < 1 || comp.index > n_components {
                return Err(Error::invalid(format!(
                    "component index {} outside 1..={n_components}",
                    comp.index
                )));
            }
            if !seen_index.insert(comp.index) {
                return Err(Error::invalid(format!(
                    "component {} listed twice",
                    comp.index
                )));
            }
            let m = &mut dense[comp.index - 1];
            for &(p, q, rho) in &comp.pairs {
                if !(1 <= p && p < q && q <= p_sets) {
                    return Err(Error::invalid(format!(
                        "component {}: pair ({p},{q}) must satisfy 1 <= p < q <= {p_sets}",
                        comp.index
                    )));
                }
                if !(0.0..=1.0).contains(&rho) {
                    return Err(Error::invalid(format!(
                        "component {}: rho_{p}{q} = {rho} outside [0, 1]",
                        comp.index
                    )));
                }
                let (a, b) = (p - 1, q - 1);
                if m[a * p_sets + b] != 0.0 {
                    return Err(Error::invalid(format!(
                        "component {}: pair ({p},{q}) given twice",
                        comp.index
                    )));
                }
                m[a * p_sets + b] = rho;
                m[b * p_sets + a] = rho;
            }
        }
        let blocks = dense
            .into_iter()
            .map(|m| {
                SymMatrix::from_upper_fn(
                    p_sets,
                    |i, j| if i == j { 1.0 } else { m[i * p_sets + j] },
                )
            })
            .collect();
        Ok(Self { p_sets, blocks })
    }

    /// Builds from explicit `P x P` blocks. Each block must have unit
    /// diagonal and off-diagonal entries in `[0, 1]`.
    pub fn from_blocks(blocks: Vec<SymMatrix>) -> Result<Self> {
        let first = blocks
            .first()
            .ok_or_else(|| Error::invalid("need at least 1 component"))?;
        let p_sets = first.order();
        if p_sets < 2 {
            return Err(Error::invalid("need at least 2 data sets"));
        }
        for (i, b) in blocks.iter().enumerate() {
            if b.order() != p_sets {
                return Err(Error::invalid(format!(
                    "block {} has order {}, expected {p_sets}",
                    i + 1,
                    b.order()
                )));
            }
            for r in 0..p_sets {
                if b.get(r, r) != 1.0 {
                    return Err(Error::invalid(format!(
                        "block {} diagonal entry {r} is not 1",
                        i + 1
                    )));
                }
                for c in r + 1..p_sets {
                    let v = b.get(r, c);
                    if !(0.0..=1.0).contains(&v) {
                        return Err(Error::invalid(format!(
                            "block {} entry ({r},{c}) = {v} outside [0,1]",
                            i + 1
                        )));
                    }
                }
            }
        }
        Ok(Self { p_sets, blocks })
    }

    pub fn from_file_doc(doc: &ProfileFile) -> Result<Self> {
        Self::from_pairs(doc.p_sets, doc.n, &doc.components)
    }

    pub fn to_file_doc(&self) -> ProfileFile {
        let components = self
            .blocks
            .iter()
            .enumerate()
            .filter_map(|(i, b)| {
                let pairs: Vec<_> = pairs(self.p_sets)
                    .filter(|&(p, q)| b.get(p, q) != 0.0)
                    .map(|(p, q)| (p + 1, q + 1, b.get(p, q)))
                    .collect();
                (!pairs.is_empty()).then_some(ComponentSpec {
                    index: i + 1,
                    pairs,
                })
            })
            .collect();
        ProfileFile {
            p_sets: self.p_sets,
            n: self.blocks.len(),
            components,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let doc: ProfileFile =
            serde_json::from_reader(std::io::BufReader::new(std::fs::File::open(path)?))?;
        Self::from_file_doc(&doc)
    }

    pub fn p_sets(&self) -> usize {
        self.p_sets
    }

    pub fn n_components(&self) -> usize {
        self.blocks.len()
    }

    /// `R^(i)` for 0-based component `i`.
    pub fn block(&self, i: usize) -> &SymMatrix {
        &self.blocks[i]
    }

    pub fn blocks(&self) -> &[SymMatrix] {
        &self.blocks
    }

    /// Correlation between data sets `p` and `q` (0-based) on component `i`.
    pub fn rho(&self, i: usize, p: usize, q: usize) -> f64 {
        self.blocks[i].get(p, q)
    }

    pub fn is_correlated(&self, i: usize) -> bool {
        pairs(self.p_sets).any(|(p, q)| self.rho(i, p, q) != 0.0)
    }

    /// Connected components (size >= 2) of the support graph of `R^(i)`,
    /// each sorted, 0-based, listed by smallest member.
    pub fn support_groups(&self, i: usize) -> Vec<Vec<usize>> {
        let p_sets = self.p_sets;
        let mut label = vec![usize::MAX; p_sets];
        let mut groups = Vec::new();
        for start in 0..p_sets {
            if label[start] != usize::MAX {
                continue;
            }
            let mut members = vec![start];
            label[start] = groups.len();
            let mut head = 0;
            while head < members.len() {
                let u = members[head];
                head += 1;
                for v in 0..p_sets {
                    if v != u && label[v] == usize::MAX && self.rho(i, u, v) != 0.0 {
                        label[v] = groups.len();
                        members.push(v);
                    }
                }
            }
            members.sort_unstable();
            groups.push(members);
        }
        groups.into_iter().filter(|g| g.len() >= 2).collect()
    }

    /// Binary ground-truth map: `n` rows, one column per data-set pair.
    pub fn ground_truth_map(&self) -> PairMap {
        let mut map = PairMap::zeros(self.blocks.len(), self.p_sets);
        for i in 0..self.blocks.len() {
            for (p, q) in pairs(self.p_sets) {
                if self.rho(i, p, q) > 0.0 {
                    map.set(i, p, q, true);
                }
            }
        }
        map
    }

    /// Profile whose support is `map` with every nonzero entry set to `rho`.
    pub fn from_map(map: &PairMap, rho: f64) -> Result<Self> {
        let comps: Vec<ComponentSpec> = (0..map.rows())
            .map(|i| ComponentSpec {
                index: i + 1,
                pairs: pairs(map.p_sets())
                    .filter(|&(p, q)| map.get(i, p, q))
                    .map(|(p, q)| (p + 1, q + 1, rho))
                    .collect(),
            })
            .collect();
        Self::from_pairs(map.p_sets(), map.rows(), &comps)
    }

    /// Copy with `rho_{pq}^{(i)}` replaced (0-based indices).
    pub fn with_rho(&self, i: usize, p: usize, q: usize, rho: f64) -> Result<Self> {
        if i >= self.blocks.len() || p >= self.p_sets || q >= self.p_sets || p == q {
            return Err(Error::invalid(format!("no entry ({i},{p},{q}) in profile")));
        }
        if !(0.0..=1.0).contains(&rho) {
            return Err(Error::invalid(format!("rho {rho} outside [0,1]")));
        }
        let mut out = self.clone();
        let b = &out.blocks[i];
        out.blocks[i] = SymMatrix::from_upper_fn(self.p_sets, |r, c| {
            if (r, c) == (p.min(q), p.max(q)) {
                rho
            } else {
                b.get(r, c)
            }
        });
        Ok(out)
    }
}

/// Binary matrix over (component row, data-set pair). Used both for ground
/// truth and for detected correlation maps.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairMap {
    p_sets: usize,
    rows: usize,
    cells: Vec<bool>,
}

pub type GroundTruthMap = PairMap;

/// Serialized form: `{rows, cols, entries}` with `entries` a row list of 0/1.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PairMapDoc {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<Vec<u8>>,
}

impl PairMap {
    pub fn zeros(rows: usize, p_sets: usize) -> Self {
        Self {
            p_sets,
            rows,
            cells: vec![false; rows * pair_count(p_sets)],
        }
    }

    pub fn ones(rows: usize, p_sets: usize) -> Self {
        Self {
            p_sets,
            rows,
            cells: vec![true; rows * pair_count(p_sets)],
        }
    }

    /// From explicit rows of length `C(P, 2)`.
    pub fn from_rows(p_sets: usize, rows: &[Vec<bool>]) -> Result<Self> {
        let cols = pair_count(p_sets);
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::invalid(format!(
                "row has {} columns, expected {cols}",
                bad.len()
            )));
        }
        Ok(Self {
            p_sets,
            rows: rows.len(),
            cells: rows.concat(),
        })
    }

    pub fn p_sets(&self) -> usize {
        self.p_sets
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        pair_count(self.p_sets)
    }

    pub fn cell(&self, row: usize, col: usize) -> bool {
        self.cells[row * self.cols() + col]
    }

    pub fn set_cell(&mut self, row: usize, col: usize, v: bool) {
        let cols = self.cols();
        self.cells[row * cols + col] = v;
    }

    /// Entry for the unordered pair `{p, q}` (0-based).
    pub fn get(&self, row: usize, p: usize, q: usize) -> bool {
        self.cell(row, pair_index(p.min(q), p.max(q), self.p_sets))
    }

    pub fn set(&mut self, row: usize, p: usize, q: usize, v: bool) {
        self.set_cell(row, pair_index(p.min(q), p.max(q), self.p_sets), v)
    }

    pub fn row(&self, row: usize) -> &[bool] {
        let cols = self.cols();
        &self.cells[row * cols..(row + 1) * cols]
    }

    pub fn count_ones(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    pub fn to_doc(&self) -> PairMapDoc {
        PairMapDoc {
            rows: self.rows,
            cols: self.cols(),
            entries: (0..self.rows)
                .map(|r| self.row(r).iter().map(|&c| u8::from(c)).collect())
                .collect(),
        }
    }

    pub fn from_doc(doc: &PairMapDoc) -> Result<Self> {
        let p_sets = (0..=doc.cols + 1)
            .find(|&p| pair_count(p) == doc.cols && p >= 2)
            .ok_or_else(|| {
                Error::invalid(format!("{} columns is not C(P,2) for any P", doc.cols))
            })?;
        if doc.entries.len() != doc.rows {
            return Err(Error::invalid("entries length does not match rows"));
        }
        let rows: Vec<Vec<bool>> = doc
            .entries
            .iter()
            .map(|r| r.iter().map(|&v| v != 0).collect())
            .collect();
        Self::from_rows(p_sets, &rows)
    }
}

/// `((k - 1) / k)^2`: every nonzero correlation in a clique of size `k >= 4`
/// must exceed this for the clique to contribute exactly one eigenvalue
/// above one.
pub fn epsilon_threshold(k: usize) -> Result<f64> {
    if k < 2 {
        return Err(Error::invalid(format!("clique size must be >= 2, got {k}")));
    }
    let r = (k as f64 - 1.0) / k as f64;
    Ok(r * r)
}

#[derive(Clone, Debug, Serialize)]
pub struct ComponentValidation {
    /// 1-based component index.
    pub index: usize,
    /// Largest clique (support group) size; 1 when uncorrelated.
    pub k: usize,
    /// 1-based members of each support group.
    pub groups: Vec<Vec<usize>>,
    pub psd: bool,
    pub min_eigenvalue: f64,
    pub transitive: bool,
    /// True unless some group of size >= 4 has a nonzero rho at or below
    /// its threshold.
    pub threshold_ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub components: Vec<ComponentValidation>,
    pub d: usize,
    pub theorem_assumptions_met: bool,
    pub warnings: Vec<String>,
}

pub fn validate_profile(profile: &CorrelationProfile) -> ValidationReport {
    let mut warnings = Vec::new();
    let mut components = Vec::with_capacity(profile.n_components());
    for i in 0..profile.n_components() {
        let block = profile.block(i);
        let groups = profile.support_groups(i);
        let transitive = groups.iter().all(|g| {
            g.iter()
                .all(|&p| g.iter().all(|&q| p == q || profile.rho(i, p, q) != 0.0))
        });
        let mut threshold_ok = true;
        for g in groups.iter().filter(|g| g.len() >= 4) {
            let eps = epsilon_threshold(g.len()).expect("len >= 4");
            for (a, &p) in g.iter().enumerate() {
                for &q in &g[a + 1..] {
                    let rho = profile.rho(i, p, q);
                    if rho != 0.0 && rho <= eps {
                        threshold_ok = false;
                    }
                }
            }
        }
        let eig = numerics::sym_eig(block).expect("profile entries are finite");
        let min_eigenvalue = *eig.values.last().expect("P >= 2");
        let psd = numerics::is_psd(block).expect("profile entries are finite");
        if !psd {
            warnings.push(format!(
                "component {}: correlation matrix is not PSD (min eigenvalue {min_eigenvalue:.3e})",
                i + 1
            ));
        }
        if !transitive {
            warnings.push(format!(
                "component {}: correlations are not transitive",
                i + 1
            ));
        }
        if !threshold_ok {
            warnings.push(format!(
                "component {}: a clique of size >= 4 has correlations at or below ((k-1)/k)^2",
                i + 1
            ));
        }
        if groups.len() > 1 {
            warnings.push(format!(
                "component {}: {} disjoint correlated groups; eigenvector structure recovery is not characterized for this case",
                i + 1,
                groups.len()
            ));
        }
        components.push(ComponentValidation {
            index: i + 1,
            k: groups.iter().map(Vec::len).max().unwrap_or(1),
            groups: groups
                .iter()
                .map(|g| g.iter().map(|p| p + 1).collect())
                .collect(),
            psd,
            min_eigenvalue,
            transitive,
            threshold_ok,
        });
    }
    let orders = derived_orders(profile);
    let n = profile.n_components();
    if orders.d > n.saturating_sub(1) {
        warnings.push(format!(
            "d = {} exceeds n - 1 = {}; the dimension test cannot report more than n - 1",
            orders.d,
            n.saturating_sub(1)
        ));
    }
    let theorem_assumptions_met = components
        .iter()
        .all(|c| c.psd && c.transitive && c.threshold_ok);
    ValidationReport {
        components,
        d: orders.d,
        theorem_assumptions_met,
        warnings,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DerivedOrders {
    /// Components correlated between at least one pair of data sets.
    pub d: usize,
    /// Components correlated between every pair of data sets.
    pub d_all: usize,
    /// `d_pq[p][q]`: components correlated between sets `p` and `q`
    /// (0-based, symmetric, zero diagonal).
    pub d_pq: Vec<Vec<usize>>,
}

pub fn derived_orders(profile: &CorrelationProfile) -> DerivedOrders {
    let p_sets = profile.p_sets();
    let mut d_pq = vec![vec![0; p_sets]; p_sets];
    let (mut d, mut d_all) = (0, 0);
    for i in 0..profile.n_components() {
        let mut any = false;
        let mut all = true;
        for (p, q) in pairs(p_sets) {
            if profile.rho(i, p, q) != 0.0 {
                any = true;
                d_pq[p][q] += 1;
                d_pq[q][p] += 1;
            } else {
                all = false;
            }
        }
        d += usize::from(any);
        d_all += usize::from(all);
    }
    DerivedOrders { d, d_all, d_pq }
}

/// Covariance of the stacked signal `[s_1; ...; s_P]` (entry `p*n + i` is the
/// `i`th component of set `p`) and the permutation `perm` such that
/// `r_ss.permuted(&perm)` is `blkdiag(R^(1), ..., R^(n))`.
pub fn composite_signal_cov(profile: &CorrelationProfile) -> Result<(SymMatrix, Vec<usize>)> {
    for (i, b) in profile.blocks().iter().enumerate() {
        if !numerics::is_psd(b)? {
            let eig = numerics::sym_eig(b)?;
            log::debug!("component {} fails PSD", i + 1);
            return Err(Error::NotPsd {
                min_eig: *eig.values.last().expect("P >= 2"),
                max_eig: eig.values[0],
            });
        }
    }
    let (p_sets, n) = (profile.p_sets(), profile.n_components());
    let r_ss = SymMatrix::from_upper_fn(n * p_sets, |a, b| {
        let (p, i) = (a / n, a % n);
        let (q, j) = (b / n, b % n);
        if i == j {
            profile.rho(i, p, q).max(if p == q { 1.0 } else { 0.0 })
        } else {
            0.0
        }
    });
    Ok((r_ss, block_permutation(p_sets, n)))
}

/// `perm[i*P + p] = p*n + i`: maps component-major order to set-major order.
pub fn block_permutation(p_sets: usize, n: usize) -> Vec<usize> {
    let mut perm = vec![0; n * p_sets];
    for i in 0..n {
        for p in 0..p_sets {
            perm[i * p_sets + p] = p * n + i;
        }
    }
    perm
}

/// Components whose block is the all-ones matrix (perfect correlation across
/// every data set), 0-based.
pub fn perfectly_correlated_components(profile: &CorrelationProfile) -> Vec<usize> {
    (0..profile.n_components())
        .filter(|&i| pairs(profile.p_sets()).all(|(p, q)| profile.rho(i, p, q) == 1.0))
        .collect()
}

/// Profiles used in worked examples and simulation scenarios.
pub mod presets {
    use super::*;

    fn spec(index: usize, pairs: &[(usize, usize, f64)]) -> ComponentSpec {
        ComponentSpec {
            index,
            pairs: pairs.to_vec(),
        }
    }

    /// Three sets, five components, `d = 4`, `d_all = 1`.
    pub fn three_set_example() -> CorrelationProfile {
        CorrelationProfile::from_pairs(
            3,
            5,
            &[
                spec(1, &[(1, 2, 0.5), (1, 3, 0.6), (2, 3, 0.6)]),
                spec(2, &[(1, 2, 0.7)]),
                spec(3, &[(2, 3, 0.8)]),
                spec(4, &[(1, 3, 0.4)]),
            ],
        )
        .expect("static profile")
    }

    /// Four sets, four components, `d = 4`, `d_all = 0`. Component 1 is
    /// correlated over sets 2..4 and component 2 over sets 1, 3, 4.
    pub fn four_set_example() -> CorrelationProfile {
        CorrelationProfile::from_pairs(
            4,
            4,
            &[
                spec(1, &[(2, 3, 0.7), (2, 4, 0.2), (3, 4, 0.8)]),
                spec(2, &[(1, 3, 0.6), (1, 4, 0.4), (3, 4, 0.5)]),
                spec(3, &[(1, 2, 0.5)]),
                spec(4, &[(1, 2, 0.5)]),
            ],
        )
        .expect("static profile")
    }

    const FULL_CLIQUE_RHOS: [[f64; 6]; 3] = [
        [0.63, 0.78, 0.69, 0.81, 0.64, 0.91],
        [0.62, 0.67, 0.74, 0.71, 0.82, 0.91],
        [0.84, 0.81, 0.72, 0.57, 0.71, 0.62],
    ];

    /// Four sets of dimension `n`; components 1..3 correlated across all sets
    /// with heterogeneous coefficients, the rest uncorrelated.
    pub fn all_sets_scenario(n: usize) -> CorrelationProfile {
        let comps: Vec<ComponentSpec> = FULL_CLIQUE_RHOS
            .iter()
            .enumerate()
            .map(|(i, rhos)| {
                let pairs: Vec<_> = super::pairs(4)
                    .zip(rhos)
                    .map(|((p, q), &r)| (p + 1, q + 1, r))
                    .collect();
                ComponentSpec {
                    index: i + 1,
                    pairs,
                }
            })
            .collect();
        CorrelationProfile::from_pairs(4, n, &comps).expect("static profile")
    }

    /// Four sets of dimension `n`: component 1 across all sets, component 2
    /// across sets 2..4, component 3 between sets 2 and 4. Coefficients are
    /// taken from the all-sets scenario's rows for the pairs that remain.
    pub fn subset_scenario(n: usize) -> CorrelationProfile {
        let keep: [&dyn Fn(usize, usize) -> bool; 3] =
            [&|_, _| true, &|p, _| p != 0, &|p, q| (p, q) == (1, 3)];
        let comps: Vec<ComponentSpec> = FULL_CLIQUE_RHOS
            .iter()
            .enumerate()
            .map(|(i, rhos)| {
                let pairs: Vec<_> = super::pairs(4)
                    .zip(rhos)
                    .filter(|((p, q), _)| keep[i](*p, *q))
                    .map(|((p, q), &r)| (p + 1, q + 1, r))
                    .collect();
                ComponentSpec {
                    index: i + 1,
                    pairs,
                }
            })
            .collect();
        CorrelationProfile::from_pairs(4, n, &comps).expect("static profile")
    }

    /// Five sets of dimension `n`; components 1 and 2 correlated across all
    /// sets, 0.7 among sets 2..5 and `rho` between set 1 and every other.
    pub fn threshold_sweep_scenario(n: usize, rho: f64) -> Result<CorrelationProfile> {
        let pairs: Vec<_> = super::pairs(5)
            .map(|(p, q)| (p + 1, q + 1, if p == 0 { rho } else { 0.7 }))
            .collect();
        CorrelationProfile::from_pairs(
            5,
            n,
            &[
                ComponentSpec {
                    index: 1,
                    pairs: pairs.clone(),
                },
                ComponentSpec { index: 2, pairs },
            ],
        )
    }

    /// Five sets, `n = 4`, all nonzero coefficients 0.7: component 1 across
    /// all sets, component 2 across all but set 4, component 3 across sets
    /// 1, 4, 5, component 4 uncorrelated.
    pub fn structure_scenario() -> CorrelationProfile {
        let clique = |index: usize, members: &[usize]| {
            let mut pairs = Vec::new();
            for (a, &p) in members.iter().enumerate() {
                for &q in &members[a + 1..] {
                    pairs.push((p, q, 0.7));
                }
            }
            ComponentSpec { index, pairs }
        };
        CorrelationProfile::from_pairs(
            5,
            4,
            &[
                clique(1, &[1, 2, 3, 4, 5]),
                clique(2, &[1, 2, 3, 5]),
                clique(3, &[1, 4, 5]),
            ],
        )
        .expect("static profile")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn pair_indexing_is_lexicographic() {
        let all: Vec<_> = pairs(4).collect();
        assert_eq!(all, vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        for (k, &(p, q)) in all.iter().enumerate() {
            assert_eq!(pair_index(p, q, 4), k);
        }
        assert_eq!(pair_count(5), 10);
    }

    #[test]
    fn epsilon_values() {
        assert_eq!(epsilon_threshold(2).unwrap(), 0.25);
        assert_eq!(epsilon_threshold(4).unwrap(), 0.5625);
        assert!((epsilon_threshold(5).unwrap() - 0.64).abs() < 1e-15);
        assert!(epsilon_threshold(1).is_err());
        assert!(epsilon_threshold(0).is_err());
    }

    #[test]
    fn three_set_example_orders() {
        let p = presets::three_set_example();
        let o = derived_orders(&p);
        assert_eq!((o.d, o.d_all), (4, 1));
        for (a, b) in pairs(3) {
            assert_eq!(o.d_pq[a][b], 2);
        }
        let v = validate_profile(&p);
        assert!(v.theorem_assumptions_met);
        assert!(v.components.iter().all(|c| c.k <= 3));
    }

    #[test]
    fn four_set_example_orders() {
        let o = derived_orders(&presets::four_set_example());
        assert_eq!((o.d, o.d_all), (4, 0));
        // d_pq is the number of nonzero entries in each column.
        assert_eq!(o.d_pq[0][1], 2);
        assert_eq!(o.d_pq[2][3], 2);
        assert_eq!(o.d_pq[1][2], 1);
    }

    #[test]
    fn identity_profile() {
        let p = CorrelationProfile::uncorrelated(3, 4).unwrap();
        let o = derived_orders(&p);
        assert_eq!((o.d, o.d_all), (0, 0));
        assert!(o.d_pq.iter().flatten().all(|&v| v == 0));
        let v = validate_profile(&p);
        assert!(v.theorem_assumptions_met);
        assert_eq!(v.d, 0);
        let (r, _) = composite_signal_cov(&p).unwrap();
        assert_eq!(r, SymMatrix::identity(12));
    }

    #[test]
    fn homogeneous_five_clique_below_threshold() {
        let map = PairMap::ones(1, 5);
        let p = CorrelationProfile::from_map(&map, 0.5).unwrap();
        let v = validate_profile(&p);
        assert_eq!(v.components[0].k, 5);
        assert!(!v.components[0].threshold_ok);
        assert!(!v.theorem_assumptions_met);
        // d = 1 > n - 1 = 0 is also warned about.
        assert!(v.warnings.iter().any(|w| w.contains("n - 1")));
    }

    #[test]
    fn intransitive_flagged() {
        let p = CorrelationProfile::from_pairs(
            3,
            2,
            &[ComponentSpec {
                index: 1,
                pairs: vec![(1, 2, 0.5), (2, 3, 0.5)],
            }],
        )
        .unwrap();
        let v = validate_profile(&p);
        assert!(!v.components[0].transitive);
        assert!(!v.theorem_assumptions_met);
    }

    #[test]
    fn non_psd_is_warning_then_error() {
        // rho_12 = rho_13 = 1 forces rho_23 = 1; 0.1 is infeasible.
        let p = CorrelationProfile::from_pairs(
            3,
            2,
            &[ComponentSpec {
                index: 1,
                pairs: vec![(1, 2, 1.0), (1, 3, 1.0), (2, 3, 0.1)],
            }],
        )
        .unwrap();
        let v = validate_profile(&p);
        assert!(!v.components[0].psd);
        assert!(matches!(
            composite_signal_cov(&p),
            Err(Error::NotPsd { .. })
        ));
    }

    #[test]
    fn malformed_pairs_rejected() {
        let bad = |pairs: Vec<(usize, usize, f64)>| {
            CorrelationProfile::from_pairs(3, 2, &[ComponentSpec { index: 1, pairs }]).is_err()
        };
        assert!(bad(vec![(2, 1, 0.5)]));
        assert!(bad(vec![(1, 4, 0.5)]));
        assert!(bad(vec![(0, 1, 0.5)]));
        assert!(bad(vec![(1, 2, 1.5)]));
        assert!(bad(vec![(1, 2, -0.1)]));
        assert!(bad(vec![(1, 2, 0.5), (1, 2, 0.4)]));
        assert!(CorrelationProfile::from_pairs(
            3,
            2,
            &[ComponentSpec {
                index: 3,
                pairs: vec![]
            }]
        )
        .is_err());
        assert!(CorrelationProfile::from_pairs(1, 2, &[]).is_err());
    }

    #[test]
    fn single_component_is_block_up_to_interleaving() {
        let p = CorrelationProfile::from_pairs(
            3,
            1,
            &[ComponentSpec {
                index: 1,
                pairs: vec![(1, 2, 0.3), (1, 3, 0.4), (2, 3, 0.5)],
            }],
        )
        .unwrap();
        let (r, perm) = composite_signal_cov(&p).unwrap();
        assert_eq!(perm, vec![0, 1, 2]);
        assert_eq!(&r, p.block(0));
    }

    #[test]
    fn composite_spectrum_is_block_union() {
        let p = presets::three_set_example();
        let (r, perm) = composite_signal_cov(&p).unwrap();
        let mut expected: Vec<f64> = p
            .blocks()
            .iter()
            .flat_map(|b| numerics::sym_eig(b).unwrap().values)
            .collect();
        expected.sort_by(|a, b| b.total_cmp(a));
        let got = numerics::sym_eig(&r).unwrap().values;
        for (g, e) in got.iter().zip(&expected) {
            assert!((g - e).abs() < 1e-10);
        }
        for k in 0..r.order() {
            assert_eq!(r.get(k, k), 1.0);
        }
        // Permuted matrix is exactly block diagonal.
        let bd = r.permuted(&perm);
        let (ps, n) = (p.p_sets(), p.n_components());
        for a in 0..ps * n {
            for b in 0..ps * n {
                let (ia, ib) = (a / ps, b / ps);
                let expect = if ia == ib {
                    p.block(ia).get(a % ps, b % ps)
                } else {
                    0.0
                };
                assert_eq!(bd.get(a, b), expect);
            }
        }
    }

    #[test]
    fn profile_doc_round_trip() {
        let p = presets::four_set_example();
        let json = serde_json::to_string(&p.to_file_doc()).unwrap();
        assert!(json.contains("\"P\":4"));
        let doc: ProfileFile = serde_json::from_str(&json).unwrap();
        assert_eq!(CorrelationProfile::from_file_doc(&doc).unwrap(), p);
        let parsed: ProfileFile =
            serde_json::from_str(r#"{"P":3,"n":2,"components":[{"index":1,"pairs":[[1,2,0.7]]}]}"#)
                .unwrap();
        let q = CorrelationProfile::from_file_doc(&parsed).unwrap();
        assert_eq!(q.rho(0, 0, 1), 0.7);
        assert_eq!(q.rho(0, 1, 0), 0.7);
    }

    #[test]
    fn structure_scenario_truth() {
        let p = presets::structure_scenario();
        let o = derived_orders(&p);
        assert_eq!((o.d, o.d_all), (3, 1));
        let map = p.ground_truth_map();
        assert_eq!(map.rows(), 4);
        assert_eq!(map.row(0).iter().filter(|&&c| c).count(), 10);
        assert_eq!(map.row(1).iter().filter(|&&c| c).count(), 6);
        assert_eq!(map.row(2).iter().filter(|&&c| c).count(), 3);
        assert!(map.row(3).iter().all(|&c| !c));
        assert!(validate_profile(&p).theorem_assumptions_met);
    }

    #[test]
    fn scenario_presets_valid() {
        for p in [presets::all_sets_scenario(7), presets::subset_scenario(7)] {
            assert!(validate_profile(&p).theorem_assumptions_met);
        }
        let o = derived_orders(&presets::subset_scenario(7));
        assert_eq!((o.d, o.d_all), (3, 1));
        let o = derived_orders(&presets::all_sets_scenario(7));
        assert_eq!((o.d, o.d_all), (3, 3));
        let low = presets::threshold_sweep_scenario(7, 0.1).unwrap();
        assert!(!validate_profile(&low).theorem_assumptions_met);
        let high = presets::threshold_sweep_scenario(7, 0.88).unwrap();
        assert!(validate_profile(&high).theorem_assumptions_met);
    }

    #[test]
    fn pair_map_doc_round_trip() {
        let map = presets::structure_scenario().ground_truth_map();
        let back = PairMap::from_doc(&map.to_doc()).unwrap();
        assert_eq!(back, map);
    }

    proptest! {
        #[test]
        fn permutation_is_invertible(p_sets in 2usize..7, n in 1usize..7) {
            let perm = block_permutation(p_sets, n);
            let mut inv = vec![0; perm.len()];
            for (a, &b) in perm.iter().enumerate() {
                inv[b] = a;
            }
            for a in 0..perm.len() {
                prop_assert_eq!(perm[inv[a]], a);
                prop_assert_eq!(inv[perm[a]], a);
            }
        }

        #[test]
        fn map_round_trips_with_support(
            p_sets in 2usize..6,
            n in 1usize..5,
            bits in proptest::collection::vec(any::<bool>(), 60),
            rho in 0.05f64..1.0,
        ) {
            let cols = pair_count(p_sets);
            let rows: Vec<Vec<bool>> = (0..n).map(|r| bits[r * cols..(r + 1) * cols].to_vec()).collect();
            let map = PairMap::from_rows(p_sets, &rows).unwrap();
            let profile = CorrelationProfile::from_map(&map, rho).unwrap();
            prop_assert_eq!(profile.ground_truth_map(), map);
            let d = derived_orders(&profile).d;
            let non_identity = profile.blocks().iter().filter(|b| **b != SymMatrix::identity(p_sets)).count();
            prop_assert_eq!(d, non_identity);
        }
    }
}
