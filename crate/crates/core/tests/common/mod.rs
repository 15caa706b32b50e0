//! Reference implementations used only by tests. Each one takes the most
//! direct route to the answer and shares no code with the library.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;

/// Window counts by enumerating every (target occurrence, signed offset).
/// Returns ((target, context) -> count, target -> positions).
pub fn brute_force_count(
    tokens: &[String],
    targets: &[String],
    contexts: &[String],
    side_length: usize,
    gap: usize,
) -> (BTreeMap<(String, String), u64>, BTreeMap<String, u64>) {
    let mut counts = BTreeMap::new();
    let mut positions: BTreeMap<String, u64> = targets.iter().map(|t| (t.clone(), 0)).collect();
    let target_set: BTreeSet<&String> = targets.iter().collect();
    let context_set: BTreeSet<&String> = contexts.iter().collect();
    let reach = (gap + side_length) as i64;
    for (p, word) in tokens.iter().enumerate() {
        if !target_set.contains(word) {
            continue;
        }
        for offset in -reach..=reach {
            if offset.unsigned_abs() as usize <= gap {
                continue;
            }
            let q = p as i64 + offset;
            if q < 0 || q >= tokens.len() as i64 {
                continue;
            }
            *positions.get_mut(word).unwrap() += 1;
            let other = &tokens[q as usize];
            if context_set.contains(other) {
                *counts.entry((word.clone(), other.clone())).or_insert(0) += 1;
            }
        }
    }
    (counts, positions)
}

/// Rank of each value = 1 + (number strictly smaller) + (ties - 1) / 2.
pub fn naive_ranks(x: &[f64]) -> Vec<f64> {
    x.iter()
        .map(|&v| {
            let smaller = x.iter().filter(|&&w| w < v).count() as f64;
            let equal = x.iter().filter(|&&w| w == v).count() as f64;
            1.0 + smaller + (equal - 1.0) / 2.0
        })
        .collect()
}

pub fn naive_pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx: f64 = x.iter().sum::<f64>() / n;
    let my: f64 = y.iter().sum::<f64>() / n;
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx.sqrt() * vy.sqrt())
}

pub fn naive_spearman(x: &[f64], y: &[f64]) -> f64 {
    naive_pearson(&naive_ranks(x), &naive_ranks(y))
}

/// 1 - 6 sum d^2 / (m (m^2 - 1)), valid only without ties.
pub fn classical_spearman(x: &[f64], y: &[f64]) -> f64 {
    let (rx, ry) = (naive_ranks(x), naive_ranks(y));
    let m = x.len() as f64;
    let d2: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - b).powi(2)).sum();
    1.0 - 6.0 * d2 / (m * (m * m - 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleLinkage {
    Single,
    Complete,
    Average,
}

/// Agglomeration that recomputes every inter-cluster distance from the leaf
/// distances at each step. Returns (left node, right node, height) per merge,
/// with the same node numbering and tie rule as the library contract.
pub fn brute_force_agglomerate(d: &[Vec<f64>], linkage: OracleLinkage) -> Vec<(usize, usize, f64)> {
    let n = d.len();
    // (node id, leaves)
    let mut clusters: Vec<(usize, BTreeSet<usize>)> =
        (0..n).map(|i| (i, BTreeSet::from([i]))).collect();
    let mut out = Vec::new();
    let mut next_id = n;
    while clusters.len() > 1 {
        let mut best: Option<(f64, (usize, usize), usize, usize)> = None;
        for a in 0..clusters.len() {
            for b in a + 1..clusters.len() {
                let pairs: Vec<f64> = clusters[a]
                    .1
                    .iter()
                    .flat_map(|&i| clusters[b].1.iter().map(move |&j| d[i][j]))
                    .collect();
                let dist = match linkage {
                    OracleLinkage::Single => pairs.iter().cloned().fold(f64::INFINITY, f64::min),
                    OracleLinkage::Complete => pairs.iter().cloned().fold(0.0, f64::max),
                    OracleLinkage::Average => pairs.iter().sum::<f64>() / pairs.len() as f64,
                };
                let (ia, ib) = (clusters[a].0, clusters[b].0);
                let key = (ia.min(ib), ia.max(ib));
                let better = match best {
                    None => true,
                    Some((bd, bk, _, _)) => dist < bd || (dist == bd && key < bk),
                };
                if better {
                    best = Some((dist, key, a, b));
                }
            }
        }
        let (dist, _, a, b) = best.unwrap();
        let (ca, cb) = (clusters[a].clone(), clusters[b].clone());
        let (left, right) = if ca.1.first() < cb.1.first() { (ca, cb) } else { (cb, ca) };
        out.push((left.0, right.0, dist));
        let merged: BTreeSet<usize> = left.1.union(&right.1).copied().collect();
        clusters.remove(b);
        clusters.remove(a);
        clusters.push((next_id, merged));
        next_id += 1;
    }
    out
}

#[allow(clippy::needless_range_loop)]
pub fn random_distance_matrix<R: Rng>(rng: &mut R, n: usize) -> Vec<Vec<f64>> {
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let x: f64 = rng.random_range(0.0..10.0);
            d[i][j] = x;
            d[j][i] = x;
        }
    }
    d
}

pub fn random_corpus<R: Rng>(rng: &mut R, len: usize, vocab: usize) -> Vec<String> {
    // Skewed draws so that frequencies, and therefore top-n sets, differ.
    (0..len)
        .map(|_| {
            let u: f64 = rng.random();
            let w = ((u * u) * vocab as f64) as usize;
            format!("w{}", w.min(vocab - 1))
        })
        .collect()
}
