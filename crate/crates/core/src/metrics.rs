//! Dissimilarities between context vectors.

use std::fmt;
use std::io::{self, BufRead, Write};
use std::str::FromStr;

use crate::cooccur::ContextVectorSet;
use crate::error::{Error, Result};
use crate::numfmt::g17;

fn check_dims(u: &[f64], v: &[f64], min: usize) -> Result<()> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch { left: u.len(), right: v.len() });
    }
    if u.len() < min {
        return Err(Error::InvalidArgument(format!(
            "vectors need at least {min} components, got {}",
            u.len()
        )));
    }
    Ok(())
}

pub fn euclidean(u: &[f64], v: &[f64]) -> Result<f64> {
    check_dims(u, v, 1)?;
    Ok(squared_euclidean(u, v).sqrt())
}

pub(crate) fn squared_euclidean(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// Fractional ranks starting at 1; tied values share the mean of the ranks
/// they span.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1 ..= end
        let rank = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman's rank correlation with average ranks for ties, computed as the
/// Pearson correlation of the ranks.
pub fn spearman_rho(u: &[f64], v: &[f64]) -> Result<f64> {
    check_dims(u, v, 2)?;
    if u.iter().chain(v).any(|x| x.is_nan()) {
        return Err(Error::InvalidArgument("NaN component".into()));
    }
    let ru = average_ranks(u);
    let rv = average_ranks(v);
    match pearson(&ru, &rv) {
        Some(rho) => Ok(rho),
        None if ru.iter().all(|&r| r == ru[0]) => Err(Error::ConstantVector("first argument")),
        None => Err(Error::ConstantVector("second argument")),
    }
}

/// `1 - rho`, in `[0, 2]`.
pub fn spearman_distance(u: &[f64], v: &[f64]) -> Result<f64> {
    Ok(1.0 - spearman_rho(u, v)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    #[default]
    Euclidean,
    Spearman,
}

impl Metric {
    pub fn distance(self, u: &[f64], v: &[f64]) -> Result<f64> {
        match self {
            Metric::Euclidean => euclidean(u, v),
            Metric::Spearman => spearman_distance(u, v),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::Euclidean => "euclidean",
            Metric::Spearman => "spearman",
        })
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Metric> {
        match s {
            "euclidean" => Ok(Metric::Euclidean),
            "spearman" => Ok(Metric::Spearman),
            _ => Err(Error::InvalidArgument(format!("unknown metric {s:?}"))),
        }
    }
}

/// A labelled symmetric dissimilarity matrix with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    labels: Vec<String>,
    data: Vec<f64>,
}

impl DistanceMatrix {
    /// Builds a matrix from row-major `data`. Negative entries, a non-zero
    /// diagonal or asymmetry are rejected. Non-finite entries are allowed
    /// here and rejected by clustering.
    pub fn new(labels: Vec<String>, data: Vec<f64>) -> Result<DistanceMatrix> {
        let n = labels.len();
        if data.len() != n * n {
            return Err(Error::DimensionMismatch { left: data.len(), right: n * n });
        }
        for i in 0..n {
            if data[i * n + i] != 0.0 {
                return Err(Error::InvalidArgument(format!("non-zero diagonal at {i}")));
            }
            for j in 0..i {
                let (a, b) = (data[i * n + j], data[j * n + i]);
                if a < 0.0 {
                    return Err(Error::InvalidArgument(format!("negative distance at ({i}, {j})")));
                }
                if a != b && !(a.is_nan() && b.is_nan()) {
                    return Err(Error::InvalidArgument(format!("asymmetric at ({i}, {j})")));
                }
            }
        }
        Ok(DistanceMatrix { labels, data })
    }

    /// Builds a matrix from a function of the index pair, evaluated for `i < j`.
    pub fn from_fn<F>(labels: Vec<String>, mut f: F) -> Result<DistanceMatrix>
    where
        F: FnMut(usize, usize) -> Result<f64>,
    {
        let n = labels.len();
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let d = f(i, j)?;
                data[i * n + j] = d;
                data[j * n + i] = d;
            }
        }
        DistanceMatrix::new(labels, data)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.labels.len() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.labels.len();
        &self.data[i * n..(i + 1) * n]
    }

    /// Tab-separated square table with a header row and a label column.
    pub fn write_tsv<W: Write>(&self, mut w: W) -> io::Result<()> {
        for l in &self.labels {
            write!(w, "\t{l}")?;
        }
        writeln!(w)?;
        for (i, l) in self.labels.iter().enumerate() {
            write!(w, "{l}")?;
            for d in self.row(i) {
                write!(w, "\t{}", g17(*d))?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn read_tsv<R: BufRead>(r: R) -> Result<DistanceMatrix> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty distance matrix file".into()))??;
        let labels: Vec<String> = header.split('\t').skip(1).map(str::to_string).collect();
        let mut data = Vec::with_capacity(labels.len() * labels.len());
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split('\t');
            let label = fields.next().unwrap_or_default();
            if labels.get(i).map(String::as_str) != Some(label) {
                return Err(Error::Parse(format!("row {i} label {label:?} does not match header")));
            }
            for f in fields {
                data.push(
                    f.parse::<f64>()
                        .map_err(|_| Error::Parse(format!("bad distance {f:?} in row {i}")))?,
                );
            }
        }
        DistanceMatrix::new(labels, data)
    }
}

/// Distances between every pair of usable (non-flagged) rows.
pub fn pairwise(vectors: &ContextVectorSet, metric: Metric) -> Result<DistanceMatrix> {
    let usable: Vec<usize> = vectors.usable().collect();
    if usable.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "need at least 2 targets with context, have {}",
            usable.len()
        )));
    }
    let labels = usable
        .iter()
        .map(|&i| vectors.targets().words()[i].clone())
        .collect();
    DistanceMatrix::from_fn(labels, |a, b| {
        metric.distance(vectors.row(usable[a]), vectors.row(usable[b]))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cooccur::{count, to_vectors, WindowConfig};
    use crate::corpus::WordSet;

    #[test]
    fn euclidean_examples() {
        let u = [0.3, 0.7, 0.0];
        assert_eq!(euclidean(&u, &u).unwrap(), 0.0);
        assert_eq!(euclidean(&[0.0, 1.0, 0.0], &[0.0; 3]).unwrap(), 1.0);
        let d = euclidean(&[3.0 / 5.0, 2.0 / 5.0, 0.0], &[0.0, 1.0, 0.0]).unwrap();
        assert!((d - 18f64.sqrt() / 5.0).abs() < 1e-15);
        assert!((d - 0.848528).abs() < 1e-6);
        assert!(matches!(euclidean(&[1.0], &[1.0, 2.0]), Err(Error::DimensionMismatch { .. })));
        assert!(euclidean(&[], &[]).is_err());
    }

    #[test]
    fn average_ranks_share_ties() {
        assert_eq!(average_ranks(&[0.0, 0.0, 1.0]), [1.5, 1.5, 3.0]);
        assert_eq!(average_ranks(&[5.0, 1.0, 5.0, 5.0]), [3.0, 1.0, 3.0, 3.0]);
    }

    #[test]
    fn spearman_examples() {
        let u = [0.1, 0.5, 0.2, 0.0];
        assert!((spearman_rho(&u, &u).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(spearman_rho(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(), -1.0);
        let rho = spearman_rho(&[0.0, 0.0, 1.0], &[0.0, 1.0, 0.0]).unwrap();
        assert!((rho + 0.5).abs() < 1e-15);
        assert!(matches!(
            spearman_rho(&[2.0, 2.0], &[1.0, 3.0]),
            Err(Error::ConstantVector(_))
        ));
        assert!(spearman_rho(&[1.0], &[1.0]).is_err());
    }

    #[test]
    fn spearman_distance_examples() {
        let u = [0.1, 0.5, 0.2];
        assert!(spearman_distance(&u, &u).unwrap().abs() < 1e-15);
        assert_eq!(spearman_distance(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(), 2.0);
        // ranks (1,2,3,4) vs (2,4,1,3): sum d^2 = 10, rho = 1 - 60/60 = 0
        let d = spearman_distance(&[1.0, 2.0, 3.0, 4.0], &[2.0, 4.0, 1.0, 3.0]).unwrap();
        assert!((d - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pairwise_matches_per_pair_calls() {
        let tokens = ["a", "b", "c", "a", "c", "b", "b", "a", "c", "a"];
        let words = WordSet::new(["a", "b", "c"]);
        let v = to_vectors(&count(&tokens, &words, &words, WindowConfig::default()));
        let m = pairwise(&v, Metric::Euclidean).unwrap();
        assert_eq!(m.labels(), ["a", "b", "c"]);
        for i in 0..3 {
            assert_eq!(m.get(i, i), 0.0);
            for j in 0..3 {
                if i != j {
                    assert_eq!(m.get(i, j), euclidean(v.row(i), v.row(j)).unwrap());
                }
            }
        }
    }

    #[test]
    fn pairwise_needs_two_usable_rows() {
        let words = WordSet::new(["a", "z"]);
        let v = to_vectors(&count(&["a", "a"], &words, &words, WindowConfig::default()));
        assert!(matches!(pairwise(&v, Metric::Euclidean), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn identical_rows_give_zero_distance() {
        let tokens = ["x", "a", "x", "b", "x"];
        let targets = WordSet::new(["a", "b"]);
        let contexts = WordSet::new(["x", "a", "b"]);
        let v = to_vectors(&count(&tokens, &targets, &contexts, WindowConfig::default()));
        let m = pairwise(&v, Metric::Euclidean).unwrap();
        assert_eq!(m.get(0, 1), 0.0);
    }

    #[test]
    fn matrix_validation_and_tsv() {
        let labels = vec!["a".to_string(), "b".to_string()];
        assert!(DistanceMatrix::new(labels.clone(), vec![0.0, 1.0, 2.0, 0.0]).is_err());
        assert!(DistanceMatrix::new(labels.clone(), vec![1.0, 1.0, 1.0, 0.0]).is_err());
        assert!(DistanceMatrix::new(labels.clone(), vec![0.0, -1.0, -1.0, 0.0]).is_err());
        let m = DistanceMatrix::new(labels, vec![0.0, 0.1, 0.1, 0.0]).unwrap();
        let mut buf = Vec::new();
        m.write_tsv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone()).unwrap(),
            "\ta\tb\na\t0\t0.10000000000000001\nb\t0.10000000000000001\t0\n"
        );
        assert_eq!(DistanceMatrix::read_tsv(&buf[..]).unwrap(), m);
    }

    #[test]
    fn metric_names() {
        assert_eq!("spearman".parse::<Metric>().unwrap(), Metric::Spearman);
        assert_eq!(Metric::Euclidean.to_string(), "euclidean");
        assert!("cosine".parse::<Metric>().is_err());
    }
}
