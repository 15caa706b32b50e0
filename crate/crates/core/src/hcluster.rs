//! Agglomerative hierarchical clustering, dendrogram cutting and export.
//!
//! Leaves are nodes `0..L`; the merge at step `t` creates node `L + t`.
//! Each merge stores the child whose smallest leaf id is lower as `left`.

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::DistanceMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Linkage {
    Single,
    Complete,
    #[default]
    Average,
}

impl Linkage {
    /// Lance–Williams update: distance from the union of `a` and `b` to a
    /// third cluster, given its distances to `a` and `b`.
    pub fn update(self, d_a: f64, d_b: f64, size_a: usize, size_b: usize) -> f64 {
        match self {
            Linkage::Single => d_a.min(d_b),
            Linkage::Complete => d_a.max(d_b),
            Linkage::Average => {
                (size_a as f64 * d_a + size_b as f64 * d_b) / (size_a + size_b) as f64
            }
        }
    }
}

impl fmt::Display for Linkage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Linkage::Single => "single",
            Linkage::Complete => "complete",
            Linkage::Average => "average",
        })
    }
}

impl FromStr for Linkage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Linkage> {
        match s {
            "single" => Ok(Linkage::Single),
            "complete" => Ok(Linkage::Complete),
            "average" | "upgma" => Ok(Linkage::Average),
            _ => Err(Error::InvalidArgument(format!("unknown linkage {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub id: usize,
}

/// A binary merge tree over labelled leaves.
#[derive(Debug, Clone, PartialEq)]
pub struct Dendrogram {
    labels: Vec<String>,
    merges: Vec<Merge>,
}

impl Dendrogram {
    /// Validates and wraps a merge list: `L - 1` merges with consecutive ids,
    /// each child used once and created before its parent, non-decreasing
    /// heights.
    pub fn from_merges(labels: Vec<String>, merges: Vec<Merge>) -> Result<Dendrogram> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::InvalidArgument("dendrogram needs at least one leaf".into()));
        }
        if merges.len() != n - 1 {
            return Err(Error::InvalidArgument(format!(
                "{} leaves need {} merges, got {}",
                n,
                n - 1,
                merges.len()
            )));
        }
        let mut used = vec![false; 2 * n - 1];
        let mut prev = f64::NEG_INFINITY;
        for (t, m) in merges.iter().enumerate() {
            let invalid = |what: &str| Error::InvalidArgument(format!("merge {t}: {what}"));
            if m.id != n + t {
                return Err(invalid("node ids must be consecutive"));
            }
            for child in [m.left, m.right] {
                if child >= m.id {
                    return Err(invalid("child created after parent"));
                }
                if std::mem::replace(&mut used[child], true) {
                    return Err(invalid("child merged twice"));
                }
            }
            if m.left == m.right {
                return Err(invalid("node merged with itself"));
            }
            if m.height.is_nan() || m.height < prev {
                return Err(invalid("heights must be non-decreasing"));
            }
            prev = m.height;
        }
        Ok(Dendrogram { labels, merges })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    pub fn num_leaves(&self) -> usize {
        self.labels.len()
    }

    pub fn root(&self) -> usize {
        2 * self.labels.len() - 2
    }

    /// Height of a node; leaves sit at 0.
    pub fn height(&self, node: usize) -> f64 {
        let n = self.labels.len();
        if node < n {
            0.0
        } else {
            self.merges[node - n].height
        }
    }

    /// Children of an internal node, `None` for leaves.
    pub fn children(&self, node: usize) -> Option<(usize, usize)> {
        let n = self.labels.len();
        (node >= n).then(|| {
            let m = &self.merges[node - n];
            (m.left, m.right)
        })
    }

    /// Leaf ids under `node`, in left-to-right order.
    pub fn leaves_under(&self, node: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![node];
        while let Some(x) = stack.pop() {
            match self.children(x) {
                Some((l, r)) => {
                    stack.push(r);
                    stack.push(l);
                }
                None => out.push(x),
            }
        }
        out
    }

    /// Newick with branch length = parent height - child height.
    pub fn to_newick(&self) -> String {
        let mut out = String::new();
        self.write_newick(self.root(), None, &mut out);
        out.push(';');
        out
    }

    fn write_newick(&self, node: usize, parent_height: Option<f64>, out: &mut String) {
        match self.children(node) {
            Some((l, r)) => {
                let h = self.height(node);
                out.push('(');
                self.write_newick(l, Some(h), out);
                out.push(',');
                self.write_newick(r, Some(h), out);
                out.push(')');
            }
            None => out.push_str(&newick_label(&self.labels[node])),
        }
        if let Some(ph) = parent_height {
            let _ = write!(out, ":{}", ph - self.height(node));
        }
    }

    /// Nested JSON tree: leaves are `{id, label, height}`, internal nodes
    /// `{id, children: [left, right], height}`.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.json_node(self.root())).expect("tree serializes")
    }

    fn json_node(&self, node: usize) -> JsonNode {
        match self.children(node) {
            Some((l, r)) => JsonNode {
                id: node,
                label: None,
                children: Some(vec![self.json_node(l), self.json_node(r)]),
                height: self.height(node),
            },
            None => JsonNode {
                id: node,
                label: Some(self.labels[node].clone()),
                children: None,
                height: 0.0,
            },
        }
    }

    pub fn from_json(text: &str) -> Result<Dendrogram> {
        // Single-linkage chains nest as deep as there are leaves.
        let mut de = serde_json::Deserializer::from_str(text);
        de.disable_recursion_limit();
        let root = JsonNode::deserialize(&mut de)?;
        de.end()?;
        let mut leaves: Vec<(usize, String)> = Vec::new();
        let mut merges: Vec<Merge> = Vec::new();
        let mut stack = vec![&root];
        while let Some(node) = stack.pop() {
            match (&node.label, &node.children) {
                (Some(label), None) => leaves.push((node.id, label.clone())),
                (None, Some(children)) if children.len() == 2 => {
                    merges.push(Merge {
                        left: children[0].id,
                        right: children[1].id,
                        height: node.height,
                        id: node.id,
                    });
                    stack.extend(children.iter());
                }
                _ => {
                    return Err(Error::Parse(format!(
                        "node {} must have either a label or two children",
                        node.id
                    )))
                }
            }
        }
        leaves.sort_by_key(|(id, _)| *id);
        if leaves.iter().enumerate().any(|(i, (id, _))| i != *id) {
            return Err(Error::Parse("leaf ids must be 0..L".into()));
        }
        merges.sort_by_key(|m| m.id);
        Dendrogram::from_merges(leaves.into_iter().map(|(_, l)| l).collect(), merges)
    }

    /// Indented rendering for terminal inspection.
    pub fn to_ascii(&self) -> String {
        let mut out = String::new();
        let mut stack = vec![(self.root(), 0usize)];
        while let Some((node, depth)) = stack.pop() {
            let indent = "  ".repeat(depth);
            match self.children(node) {
                Some((l, r)) => {
                    let _ = writeln!(out, "{indent}+ {:.6}", self.height(node));
                    stack.push((r, depth + 1));
                    stack.push((l, depth + 1));
                }
                None => {
                    let _ = writeln!(out, "{indent}- {}", self.labels[node]);
                }
            }
        }
        out
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonNode {
    id: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    label: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    children: Option<Vec<JsonNode>>,
    height: f64,
}

fn newick_label(label: &str) -> String {
    let plain = !label.is_empty()
        && label
            .chars()
            .all(|c| !c.is_whitespace() && !"()[]':;,".contains(c));
    if plain {
        label.to_string()
    } else {
        format!("'{}'", label.replace('\'', "''"))
    }
}

/// Agglomerates clusters bottom-up, always merging the closest pair.
///
/// Equal distances are resolved by the smallest `(min node id, max node id)`
/// of the pair.
pub fn agglomerate(d: &DistanceMatrix, linkage: Linkage) -> Result<Dendrogram> {
    let n = d.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!("clustering needs at least 2 labels, got {n}")));
    }
    for i in 0..n {
        for j in i + 1..n {
            if !d.get(i, j).is_finite() {
                return Err(Error::NonFinite(i, j));
            }
        }
    }
    // Slot i starts as leaf i; a merged cluster takes the lower slot of its
    // two children, so a slot index is always the cluster's smallest leaf.
    let mut dist: Vec<f64> = (0..n).flat_map(|i| d.row(i).to_vec()).collect();
    let mut node = (0..n).collect::<Vec<_>>();
    let mut size = vec![1usize; n];
    let mut active: Vec<usize> = (0..n).collect();
    let mut merges = Vec::with_capacity(n - 1);
    let mut last_height = f64::NEG_INFINITY;

    for step in 0..n - 1 {
        let mut best: Option<(f64, (usize, usize), usize, usize)> = None;
        for (ai, &a) in active.iter().enumerate() {
            for &b in &active[ai + 1..] {
                let dab = dist[a * n + b];
                let key = (node[a].min(node[b]), node[a].max(node[b]));
                let better = match best {
                    None => true,
                    Some((bd, bkey, _, _)) => dab < bd || (dab == bd && key < bkey),
                };
                if better {
                    best = Some((dab, key, a, b));
                }
            }
        }
        let (dab, _, a, b) = best.expect("at least two active clusters");
        // a < b because active is sorted
        for &k in &active {
            if k != a && k != b {
                let updated = linkage.update(dist[a * n + k], dist[b * n + k], size[a], size[b]);
                dist[a * n + k] = updated;
                dist[k * n + a] = updated;
            }
        }
        // Roundoff in the average update can dip below the previous height.
        let height = dab.max(last_height);
        last_height = height;
        let id = n + step;
        merges.push(Merge { left: node[a], right: node[b], height, id });
        node[a] = id;
        size[a] += size[b];
        active.retain(|&k| k != b);
    }
    Dendrogram::from_merges(d.labels().to_vec(), merges)
}

/// A flat clustering of labelled items.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    labels: Vec<String>,
    assignment: Vec<usize>,
    k: usize,
}

impl Partition {
    /// Builds a partition, renumbering clusters densely in order of first
    /// appearance.
    pub fn new(labels: Vec<String>, assignment: Vec<usize>) -> Result<Partition> {
        if labels.len() != assignment.len() {
            return Err(Error::DimensionMismatch { left: labels.len(), right: assignment.len() });
        }
        let mut remap = std::collections::HashMap::new();
        let assignment: Vec<usize> = assignment
            .into_iter()
            .map(|c| {
                let next = remap.len();
                *remap.entry(c).or_insert(next)
            })
            .collect();
        Ok(Partition { labels, k: remap.len(), assignment })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn cluster_of(&self, label: &str) -> Option<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(|i| self.assignment[i])
    }

    /// Member labels of each cluster, indexed by cluster id.
    pub fn clusters(&self) -> Vec<Vec<&str>> {
        let mut out = vec![Vec::new(); self.k];
        for (l, &c) in self.labels.iter().zip(&self.assignment) {
            out[c].push(l.as_str());
        }
        out
    }

    /// `label<TAB>cluster` lines in label order.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (l, c) in self.labels.iter().zip(&self.assignment) {
            let _ = writeln!(out, "{l}\t{c}");
        }
        out
    }

    pub fn from_tsv(text: &str) -> Result<Partition> {
        let mut labels = Vec::new();
        let mut assignment = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let bad = || Error::Parse(format!("partition line {}: {line:?}", i + 1));
            let (l, c) = line.split_once('\t').ok_or_else(bad)?;
            labels.push(l.to_string());
            assignment.push(c.parse::<usize>().map_err(|_| bad())?);
        }
        Partition::new(labels, assignment)
    }
}

/// Undoes the last `k - 1` merges. Cluster ids follow the smallest leaf id
/// each cluster contains.
pub fn cut(tree: &Dendrogram, k: usize) -> Result<Partition> {
    let n = tree.num_leaves();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("cut k must be in 1..={n}, got {k}")));
    }
    // Union the leaves of the first n - k merges.
    let mut parent: Vec<usize> = (0..2 * n - 1).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for m in &tree.merges[..n - k] {
        let l = find(&mut parent, m.left);
        let r = find(&mut parent, m.right);
        parent[l] = m.id;
        parent[r] = m.id;
    }
    let roots: Vec<usize> = (0..n).map(|leaf| find(&mut parent, leaf)).collect();
    // Scanning leaves in id order numbers clusters by their smallest leaf.
    Partition::new(tree.labels.clone(), roots)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    fn abc() -> DistanceMatrix {
        DistanceMatrix::new(
            labels(&["A", "B", "C"]),
            vec![0.0, 1.0, 4.0, 1.0, 0.0, 5.0, 4.0, 5.0, 0.0],
        )
        .unwrap()
    }

    #[test]
    fn worked_example_average() {
        let t = agglomerate(&abc(), Linkage::Average).unwrap();
        assert_eq!(
            t.merges(),
            [
                Merge { left: 0, right: 1, height: 1.0, id: 3 },
                Merge { left: 3, right: 2, height: 4.5, id: 4 },
            ]
        );
        assert_eq!(t.to_newick(), "((A:1,B:1):3.5,C:4.5);");
    }

    #[test]
    fn worked_example_single_and_complete() {
        let t = agglomerate(&abc(), Linkage::Single).unwrap();
        assert_eq!(t.merges()[1].height, 4.0);
        let t = agglomerate(&abc(), Linkage::Complete).unwrap();
        assert_eq!(t.merges()[1].height, 5.0);
    }

    #[test]
    fn two_leaves() {
        let m = DistanceMatrix::new(labels(&["X", "Y"]), vec![0.0, 2.0, 2.0, 0.0]).unwrap();
        for linkage in [Linkage::Single, Linkage::Complete, Linkage::Average] {
            let t = agglomerate(&m, linkage).unwrap();
            assert_eq!(t.merges().len(), 1);
            assert_eq!(t.merges()[0].height, 2.0);
            assert_eq!(t.to_newick(), "(X:2,Y:2);");
        }
    }

    #[test]
    fn rejects_non_finite_and_tiny_inputs() {
        let m = DistanceMatrix::new(
            labels(&["X", "Y"]),
            vec![0.0, f64::INFINITY, f64::INFINITY, 0.0],
        )
        .unwrap();
        assert!(matches!(agglomerate(&m, Linkage::Average), Err(Error::NonFinite(0, 1))));
        let one = DistanceMatrix::new(labels(&["X"]), vec![0.0]).unwrap();
        assert!(agglomerate(&one, Linkage::Average).is_err());
    }

    #[test]
    fn ties_prefer_smallest_node_ids() {
        // Every pair ties at 1. After (0,1) becomes node 4, the candidates
        // are (2,3), (2,4) and (3,4); (2,3) has the smallest key.
        let m = DistanceMatrix::from_fn(labels(&["a", "b", "c", "d"]), |_, _| Ok(1.0)).unwrap();
        let t = agglomerate(&m, Linkage::Average).unwrap();
        let pairs: Vec<(usize, usize)> = t.merges().iter().map(|m| (m.left, m.right)).collect();
        assert_eq!(pairs, [(0, 1), (2, 3), (4, 5)]);
    }

    #[test]
    fn cut_examples() {
        let t = agglomerate(&abc(), Linkage::Average).unwrap();
        assert_eq!(cut(&t, 1).unwrap().assignment(), [0, 0, 0]);
        assert_eq!(cut(&t, 3).unwrap().assignment(), [0, 1, 2]);
        let p = cut(&t, 2).unwrap();
        assert_eq!(p.assignment(), [0, 0, 1]);
        assert_eq!(p.clusters(), vec![vec!["A", "B"], vec!["C"]]);
        assert!(cut(&t, 0).is_err());
        assert!(cut(&t, 4).is_err());
    }

    #[test]
    fn cluster_ids_follow_smallest_leaf() {
        // C and D merge first, then A and B; the 2-cut keeps {A,B} as 0.
        let m = DistanceMatrix::new(
            labels(&["A", "B", "C", "D"]),
            vec![
                0.0, 2.0, 9.0, 9.0, //
                2.0, 0.0, 9.0, 9.0, //
                9.0, 9.0, 0.0, 1.0, //
                9.0, 9.0, 1.0, 0.0,
            ],
        )
        .unwrap();
        let t = agglomerate(&m, Linkage::Average).unwrap();
        assert_eq!(t.merges()[0].left, 2);
        assert_eq!(cut(&t, 2).unwrap().assignment(), [0, 0, 1, 1]);
        assert_eq!(t.to_newick(), "((A:2,B:2):7,(C:1,D:1):8);");
    }

    #[test]
    fn json_round_trip_and_validation() {
        let t = agglomerate(&abc(), Linkage::Average).unwrap();
        let json = t.to_json();
        assert_eq!(Dendrogram::from_json(&json).unwrap(), t);
        assert!(Dendrogram::from_json(r#"{"id":0,"height":0}"#).is_err());
        assert!(Dendrogram::from_json(
            r#"{"id":2,"height":1,"children":[{"id":0,"label":"a","height":0},{"id":0,"label":"b","height":0}]}"#
        )
        .is_err());
    }

    #[test]
    fn from_merges_rejects_bad_trees() {
        let l = labels(&["a", "b", "c"]);
        let m = |left, right, height, id| Merge { left, right, height, id };
        assert!(Dendrogram::from_merges(l.clone(), vec![m(0, 1, 1.0, 3)]).is_err());
        assert!(Dendrogram::from_merges(l.clone(), vec![m(0, 1, 2.0, 3), m(3, 2, 1.0, 4)]).is_err());
        assert!(Dendrogram::from_merges(l.clone(), vec![m(0, 1, 1.0, 3), m(0, 2, 2.0, 4)]).is_err());
        assert!(Dendrogram::from_merges(l, vec![m(0, 1, 1.0, 3), m(3, 2, 2.0, 4)]).is_ok());
    }

    #[test]
    fn newick_quotes_awkward_labels() {
        assert_eq!(newick_label("o'clock"), "'o''clock'");
        assert_eq!(newick_label("friday"), "friday");
        assert_eq!(newick_label("a b"), "'a b'");
    }

    #[test]
    fn ascii_lists_every_leaf() {
        let t = agglomerate(&abc(), Linkage::Average).unwrap();
        let text = t.to_ascii();
        assert_eq!(text, "+ 4.500000\n  + 1.000000\n    - A\n    - B\n  - C\n");
    }

    #[test]
    fn partition_tsv_round_trip() {
        let p = Partition::new(labels(&["x", "y", "z"]), vec![7, 3, 7]).unwrap();
        assert_eq!(p.assignment(), [0, 1, 0]);
        assert_eq!(p.k(), 2);
        assert_eq!(Partition::from_tsv(&p.to_tsv()).unwrap(), p);
    }
}
