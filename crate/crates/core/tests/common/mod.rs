#![allow(dead_code)]

use corrmap::model::{epsilon_threshold, ComponentSpec, CorrelationProfile};
use corrmap::numerics::{is_psd, SymMatrix};
use corrmap::RngStream;
use rand::seq::SliceRandom;
use rand::Rng;

/// Random profile with one clique per correlated component. Cliques of size
/// `k >= 4` keep every coefficient above `((k-1)/k)^2`; every block is PSD.
pub fn random_valid_profile(seed: u64) -> CorrelationProfile {
    let mut rng = RngStream::new(seed);
    let p_sets = rng.random_range(2..=6usize);
    let n = rng.random_range(1..=6usize);
    let mut specs = Vec::new();
    for i in 0..n {
        if rng.random_bool(0.3) {
            continue;
        }
        let k = rng.random_range(2..=p_sets);
        let mut sets: Vec<usize> = (0..p_sets).collect();
        sets.shuffle(&mut rng);
        let mut members = sets[..k].to_vec();
        members.sort_unstable();
        let pairs = clique_coefficients(&members, &mut rng);
        specs.push(ComponentSpec {
            index: i + 1,
            pairs: pairs
                .into_iter()
                .map(|(p, q, r)| (p + 1, q + 1, r))
                .collect(),
        });
    }
    CorrelationProfile::from_pairs(p_sets, n, &specs).expect("generated profile is valid")
}

fn clique_coefficients(members: &[usize], rng: &mut RngStream) -> Vec<(usize, usize, f64)> {
    let k = members.len();
    let floor = if k >= 4 {
        epsilon_threshold(k).unwrap()
    } else {
        0.0
    };
    loop {
        let rho: Vec<Vec<f64>> = if rng.random_bool(0.5) {
            // Rank-one loadings: rho_pq = a_p a_q.
            let lo = if k >= 4 { floor.sqrt() + 0.01 } else { 0.2 };
            let a: Vec<f64> = (0..k).map(|_| rng.random_range(lo..1.0)).collect();
            (0..k)
                .map(|x| (0..k).map(|y| a[x] * a[y]).collect())
                .collect()
        } else {
            let lo = if k >= 4 { floor + 0.01 } else { 0.05 };
            let mut m = vec![vec![0.0; k]; k];
            for x in 0..k {
                for y in x + 1..k {
                    let v = rng.random_range(lo..0.99);
                    m[x][y] = v;
                    m[y][x] = v;
                }
            }
            m
        };
        let block = SymMatrix::from_upper_fn(k, |x, y| if x == y { 1.0 } else { rho[x][y] });
        if !is_psd(&block).unwrap() {
            continue;
        }
        let mut out = Vec::new();
        for x in 0..k {
            for y in x + 1..k {
                out.push((members[x], members[y], rho[x][y]));
            }
        }
        return out;
    }
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for &t in &idx[i..=j] {
                r[t] = avg;
            }
            i = j + 1;
        }
        r
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}
