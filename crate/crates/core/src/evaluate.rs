//! Scoring partitions and per-occurrence labelings against gold groupings.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hcluster::Partition;

const TABLE1_JSON: &str = include_str!("../data/table1.json");

/// Named word groups. Groups may overlap.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GoldGroups {
    groups: BTreeMap<String, BTreeSet<String>>,
}

impl GoldGroups {
    pub fn new<I, N, W>(groups: I) -> GoldGroups
    where
        I: IntoIterator<Item = (N, Vec<W>)>,
        N: Into<String>,
        W: Into<String>,
    {
        GoldGroups {
            groups: groups
                .into_iter()
                .map(|(n, ws)| (n.into(), ws.into_iter().map(Into::into).collect()))
                .collect(),
        }
    }

    /// Parses `{"group name": ["word", ...], ...}`.
    pub fn from_json(text: &str) -> Result<GoldGroups> {
        let groups: BTreeMap<String, Vec<String>> = serde_json::from_str(text)?;
        Ok(GoldGroups::new(groups))
    }

    /// The semantic groupings found in the Lund and Trollope corpora.
    pub fn table1() -> GoldGroups {
        GoldGroups::from_json(TABLE1_JSON).expect("bundled table1.json parses")
    }

    pub fn table1_json() -> &'static str {
        TABLE1_JSON
    }

    pub fn groups(&self) -> impl Iterator<Item = (&str, &BTreeSet<String>)> + '_ {
        self.groups.iter().map(|(n, ws)| (n.as_str(), ws))
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    /// Union of all group members.
    pub fn words(&self) -> BTreeSet<&str> {
        self.groups
            .values()
            .flat_map(|ws| ws.iter().map(String::as_str))
            .collect()
    }

    /// Keeps only words for which `present` holds. Returns the filtered groups
    /// and a warning for each dropped word and each group left empty.
    pub fn filter<F: Fn(&str) -> bool>(&self, present: F) -> (GoldGroups, Vec<String>) {
        let mut warnings = Vec::new();
        let mut groups = BTreeMap::new();
        for (name, words) in &self.groups {
            let kept: BTreeSet<String> = words.iter().filter(|w| present(w)).cloned().collect();
            for w in words.iter().filter(|w| !present(w)) {
                warnings.push(format!("gold word {w:?} ({name}) not found; ignored"));
            }
            if kept.is_empty() {
                warnings.push(format!("gold group {name:?} has no words left; dropped"));
            } else {
                groups.insert(name.clone(), kept);
            }
        }
        (GoldGroups { groups }, warnings)
    }
}

/// Clusters restricted to gold words: cluster id -> member words.
fn gold_clusters<'a>(
    partition: &'a Partition,
    gold_words: &BTreeSet<&str>,
) -> Result<BTreeMap<usize, BTreeSet<&'a str>>> {
    let mut clusters: BTreeMap<usize, BTreeSet<&str>> = BTreeMap::new();
    for (label, &c) in partition.labels().iter().zip(partition.assignment()) {
        if gold_words.contains(label.as_str()) {
            clusters.entry(c).or_default().insert(label.as_str());
        }
    }
    if clusters.is_empty() {
        return Err(Error::InsufficientData("no gold words in the partition".into()));
    }
    Ok(clusters)
}

/// Fraction of gold words that fall in their cluster's best-matching group,
/// counted over gold words only. Gold words absent from the partition are
/// ignored.
pub fn purity(partition: &Partition, gold: &GoldGroups) -> Result<f64> {
    let words = gold.words();
    let clusters = gold_clusters(partition, &words)?;
    let mut matched = 0usize;
    let mut total = 0usize;
    for members in clusters.values() {
        total += members.len();
        matched += gold
            .groups
            .values()
            .map(|g| members.iter().filter(|w| g.contains(**w)).count())
            .max()
            .unwrap_or(0);
    }
    Ok(matched as f64 / total as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupF1 {
    /// Best F1 per group, keyed by group name.
    pub per_group: BTreeMap<String, f64>,
    pub macro_f1: f64,
}

/// For each group, the best F1 against any cluster (clusters restricted to
/// gold words), plus the macro average.
pub fn group_f1(partition: &Partition, gold: &GoldGroups) -> Result<GroupF1> {
    let words = gold.words();
    let clusters = gold_clusters(partition, &words)?;
    let present: BTreeSet<&str> = clusters.values().flatten().copied().collect();
    let mut per_group = BTreeMap::new();
    for (name, group) in &gold.groups {
        let size = group.iter().filter(|w| present.contains(w.as_str())).count();
        if size == 0 {
            continue;
        }
        let best = clusters
            .values()
            .map(|members| {
                let overlap = members.iter().filter(|w| group.contains(**w)).count();
                if overlap == 0 {
                    return 0.0;
                }
                let precision = overlap as f64 / members.len() as f64;
                let recall = overlap as f64 / size as f64;
                2.0 * precision * recall / (precision + recall)
            })
            .fold(0.0, f64::max);
        per_group.insert(name.clone(), best);
    }
    let macro_f1 = per_group.values().sum::<f64>() / per_group.len() as f64;
    Ok(GroupF1 { per_group, macro_f1 })
}

/// Maps each unit to its majority gold category (ties to the
/// lexicographically first category) and scores the occurrences that agree.
pub fn category_accuracy<S: AsRef<str>>(labels: &[usize], gold: &[S]) -> Result<f64> {
    if labels.len() != gold.len() {
        return Err(Error::DimensionMismatch { left: labels.len(), right: gold.len() });
    }
    if labels.is_empty() {
        return Err(Error::InsufficientData("no occurrences to score".into()));
    }
    let majority = majority_categories(labels, gold);
    let correct = labels
        .iter()
        .zip(gold)
        .filter(|(unit, cat)| majority[unit] == cat.as_ref())
        .count();
    Ok(correct as f64 / labels.len() as f64)
}

/// Majority gold category of each unit.
pub fn majority_categories<S: AsRef<str>>(labels: &[usize], gold: &[S]) -> BTreeMap<usize, String> {
    let mut tally: BTreeMap<usize, BTreeMap<&str, usize>> = BTreeMap::new();
    for (&unit, cat) in labels.iter().zip(gold) {
        *tally.entry(unit).or_default().entry(cat.as_ref()).or_default() += 1;
    }
    tally
        .into_iter()
        .map(|(unit, cats)| {
            let mut best: Option<(&str, usize)> = None;
            for (c, n) in cats {
                if best.is_none_or(|(_, bn)| n > bn) {
                    best = Some((c, n));
                }
            }
            (unit, best.expect("non-empty tally").0.to_string())
        })
        .collect()
}

/// Named metric values, rendered as JSON and as aligned text.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Report {
    #[serde(flatten)]
    pub metrics: BTreeMap<String, serde_json::Value>,
}

impl Report {
    pub fn insert<V: Into<serde_json::Value>>(&mut self, key: &str, value: V) {
        self.metrics.insert(key.to_string(), value.into());
    }

    pub fn get(&self, key: &str) -> Option<&serde_json::Value> {
        self.metrics.get(key)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let width = self.metrics.keys().map(String::len).max().unwrap_or(0);
        let mut out = String::new();
        for (k, v) in &self.metrics {
            let _ = writeln!(out, "{k:<width$}  {v}");
        }
        out
    }
}
