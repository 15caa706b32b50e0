//! Python bindings for `wordgroup`.
//!
//! Word sets cross the boundary as lists of strings, vectors as lists of
//! floats, partitions as `{word: cluster}` dicts and gold groups as
//! `{group: [words]}` dicts.

use std::collections::BTreeMap;

use pyo3::exceptions::{PyIOError, PyIndexError, PyValueError};
use pyo3::prelude::*;

use wordgroup::compnet::{self, NetworkConfig};
use wordgroup::cooccur::{self, WindowConfig};
use wordgroup::corpus::{self, WordSet};
use wordgroup::evaluate::{self, GoldGroups};
use wordgroup::hcluster::{self, Linkage, Partition};
use wordgroup::metrics::{self, Metric};
use wordgroup::{elman, Error};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io(e) => PyIOError::new_err(e.to_string()),
        e => PyValueError::new_err(e.to_string()),
    }
}

fn window(side_length: usize, gap: usize) -> PyResult<WindowConfig> {
    WindowConfig::new(side_length, gap).map_err(py_err)
}

fn partition_from(assignment: BTreeMap<String, usize>) -> PyResult<Partition> {
    let (labels, ids) = assignment.into_iter().unzip();
    Partition::new(labels, ids).map_err(py_err)
}

/// Lowercased word tokens of `text`.
#[pyfunction]
fn tokenize(text: &str) -> Vec<String> {
    corpus::tokenize(text).into_iter().map(|t| t.into_string()).collect()
}

/// Word frequencies, ordered by count (descending) then word.
#[pyclass(module = "pywordgroup", frozen)]
struct Vocabulary {
    inner: corpus::Vocabulary,
}

#[pymethods]
impl Vocabulary {
    #[new]
    fn new(tokens: Vec<String>) -> Self {
        Vocabulary { inner: corpus::build_vocabulary(&tokens) }
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __contains__(&self, word: &str) -> bool {
        self.inner.id(word).is_some()
    }

    fn __repr__(&self) -> String {
        format!("Vocabulary(words={}, tokens={})", self.inner.len(), self.inner.total())
    }

    #[getter]
    fn total(&self) -> u64 {
        self.inner.total()
    }

    fn count(&self, word: &str) -> u64 {
        self.inner.count(word)
    }

    fn id(&self, word: &str) -> Option<usize> {
        self.inner.id(word)
    }

    fn word(&self, id: usize) -> PyResult<String> {
        self.inner
            .word(id)
            .map(str::to_string)
            .ok_or_else(|| PyIndexError::new_err(format!("no word with id {id}")))
    }

    fn items(&self) -> Vec<(String, u64)> {
        self.inner.iter().map(|(w, n)| (w.to_string(), n)).collect()
    }

    /// The `n` most frequent words.
    fn top(&self, n: usize) -> PyResult<Vec<String>> {
        Ok(corpus::select_top(&self.inner, n).map_err(py_err)?.words().to_vec())
    }

    fn to_tsv(&self) -> String {
        let mut buf = Vec::new();
        self.inner.write_tsv(&mut buf).expect("in-memory write");
        String::from_utf8(buf).expect("utf-8")
    }
}

/// Window counts for target words against context words.
#[pyclass(module = "pywordgroup", frozen)]
struct CooccurrenceTable {
    inner: cooccur::CooccurrenceTable,
}

#[pymethods]
impl CooccurrenceTable {
    #[getter]
    fn targets(&self) -> Vec<String> {
        self.inner.targets().words().to_vec()
    }

    #[getter]
    fn contexts(&self) -> Vec<String> {
        self.inner.contexts().words().to_vec()
    }

    fn get(&self, target: &str, context: &str) -> u64 {
        self.inner.count_words(target, context)
    }

    /// In-corpus window positions seen around all occurrences of `target`.
    fn positions(&self, target: &str) -> u64 {
        self.inner.positions_of(target)
    }

    fn to_tsv(&self) -> String {
        let mut buf = Vec::new();
        self.inner.write_tsv(&mut buf).expect("in-memory write");
        String::from_utf8(buf).expect("utf-8")
    }

    fn vectors(&self) -> ContextVectors {
        ContextVectors { inner: cooccur::to_vectors(&self.inner) }
    }
}

#[pyfunction]
#[pyo3(signature = (tokens, targets, contexts, side_length = 1, gap = 0))]
fn count(
    tokens: Vec<String>,
    targets: Vec<String>,
    contexts: Vec<String>,
    side_length: usize,
    gap: usize,
) -> PyResult<CooccurrenceTable> {
    let w = window(side_length, gap)?;
    let table = cooccur::count(&tokens, &WordSet::new(targets), &WordSet::new(contexts), w);
    Ok(CooccurrenceTable { inner: table })
}

/// Per-target context probabilities. Targets with no window positions are
/// flagged and left out of distance computations.
#[pyclass(module = "pywordgroup", frozen)]
struct ContextVectors {
    inner: cooccur::ContextVectorSet,
}

#[pymethods]
impl ContextVectors {
    #[getter]
    fn targets(&self) -> Vec<String> {
        self.inner.targets().words().to_vec()
    }

    #[getter]
    fn contexts(&self) -> Vec<String> {
        self.inner.contexts().words().to_vec()
    }

    #[getter]
    fn flagged(&self) -> Vec<String> {
        let words = self.inner.targets().words();
        (0..words.len())
            .filter(|&t| self.inner.is_flagged(t))
            .map(|t| words[t].clone())
            .collect()
    }

    fn row(&self, target: &str) -> PyResult<Vec<f64>> {
        let t = self
            .inner
            .targets()
            .index_of(target)
            .ok_or_else(|| PyValueError::new_err(format!("{target:?} is not a target")))?;
        Ok(self.inner.row(t).to_vec())
    }

    fn rows(&self) -> Vec<Vec<f64>> {
        self.inner.rows().to_vec()
    }

    #[pyo3(signature = (metric = "euclidean"))]
    fn distances(&self, metric: &str) -> PyResult<DistanceMatrix> {
        let metric: Metric = metric.parse().map_err(py_err)?;
        let inner = metrics::pairwise(&self.inner, metric).map_err(py_err)?;
        Ok(DistanceMatrix { inner })
    }
}

#[pyfunction]
fn euclidean(u: Vec<f64>, v: Vec<f64>) -> PyResult<f64> {
    metrics::euclidean(&u, &v).map_err(py_err)
}

/// Rank correlation with average ranks for ties.
#[pyfunction]
fn spearman_rho(u: Vec<f64>, v: Vec<f64>) -> PyResult<f64> {
    metrics::spearman_rho(&u, &v).map_err(py_err)
}

#[pyfunction]
fn spearman_distance(u: Vec<f64>, v: Vec<f64>) -> PyResult<f64> {
    metrics::spearman_distance(&u, &v).map_err(py_err)
}

#[pyclass(module = "pywordgroup", frozen)]
struct DistanceMatrix {
    inner: metrics::DistanceMatrix,
}

#[pymethods]
impl DistanceMatrix {
    /// Builds a matrix from labels and a square list of rows.
    #[new]
    fn new(labels: Vec<String>, rows: Vec<Vec<f64>>) -> PyResult<Self> {
        let n = labels.len();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(PyValueError::new_err(format!("expected a {n}x{n} matrix")));
        }
        let inner = metrics::DistanceMatrix::new(labels, rows.concat()).map_err(py_err)?;
        Ok(DistanceMatrix { inner })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn labels(&self) -> Vec<String> {
        self.inner.labels().to_vec()
    }

    fn get(&self, i: usize, j: usize) -> PyResult<f64> {
        let n = self.inner.len();
        if i >= n || j >= n {
            return Err(PyIndexError::new_err(format!("({i}, {j}) outside {n}x{n}")));
        }
        Ok(self.inner.get(i, j))
    }

    fn to_list(&self) -> Vec<Vec<f64>> {
        (0..self.inner.len()).map(|i| self.inner.row(i).to_vec()).collect()
    }
}

/// Binary merge tree. Leaves are nodes `0..n`; merge `t` creates node `n + t`.
#[pyclass(module = "pywordgroup", frozen)]
struct Dendrogram {
    inner: hcluster::Dendrogram,
}

#[pymethods]
impl Dendrogram {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Dendrogram { inner: hcluster::Dendrogram::from_json(text).map_err(py_err)? })
    }

    #[getter]
    fn labels(&self) -> Vec<String> {
        self.inner.labels().to_vec()
    }

    /// `(left, right, height, node)` per merge, in merge order.
    #[getter]
    fn merges(&self) -> Vec<(usize, usize, f64, usize)> {
        self.inner
            .merges()
            .iter()
            .map(|m| (m.left, m.right, m.height, m.id))
            .collect()
    }

    fn to_newick(&self) -> String {
        self.inner.to_newick()
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn to_ascii(&self) -> String {
        self.inner.to_ascii()
    }

    /// Flat `{label: cluster}` assignment with `k` clusters.
    fn cut(&self, k: usize) -> PyResult<BTreeMap<String, usize>> {
        let p = hcluster::cut(&self.inner, k).map_err(py_err)?;
        Ok(p.labels().iter().cloned().zip(p.assignment().iter().copied()).collect())
    }

    fn __eq__(&self, other: &Dendrogram) -> bool {
        self.inner == other.inner
    }
}

#[pyfunction]
#[pyo3(signature = (distances, linkage = "average"))]
fn agglomerate(distances: &DistanceMatrix, linkage: &str) -> PyResult<Dendrogram> {
    let linkage: Linkage = linkage.parse().map_err(py_err)?;
    let inner = hcluster::agglomerate(&distances.inner, linkage).map_err(py_err)?;
    Ok(Dendrogram { inner })
}

/// One dense input per target occurrence: one-hot word block followed by the
/// normalized context bag.
#[pyfunction]
#[pyo3(signature = (tokens, targets, contexts, side_length = 1, gap = 0))]
fn encode_occurrences(
    tokens: Vec<String>,
    targets: Vec<String>,
    contexts: Vec<String>,
    side_length: usize,
    gap: usize,
) -> PyResult<Vec<(usize, Vec<f64>)>> {
    let w = window(side_length, gap)?;
    let occ =
        compnet::encode_occurrences(&tokens, &WordSet::new(targets), &WordSet::new(contexts), w);
    Ok(occ.iter().map(|o| (o.position, o.dense())).collect())
}

/// Online winner-take-all network.
#[pyclass(module = "pywordgroup")]
struct CompetitiveNetwork {
    inner: compnet::CompetitiveNetwork,
}

#[pymethods]
impl CompetitiveNetwork {
    /// Seeds each unit from a randomly chosen sample.
    #[new]
    #[pyo3(signature = (
        samples,
        num_units = 2,
        learning_rate_initial = 0.3,
        learning_rate_final = 0.01,
        epochs = 3,
        seed = 0,
        unit_norm = true,
    ))]
    fn new(
        samples: Vec<Vec<f64>>,
        num_units: usize,
        learning_rate_initial: f64,
        learning_rate_final: f64,
        epochs: usize,
        seed: u64,
        unit_norm: bool,
    ) -> PyResult<Self> {
        let config = NetworkConfig {
            num_units,
            learning_rate_initial,
            learning_rate_final,
            epochs,
            seed,
            unit_norm,
        };
        let dim = samples.first().map_or(0, Vec::len);
        let inner = compnet::CompetitiveNetwork::init(config, dim, &samples).map_err(py_err)?;
        Ok(CompetitiveNetwork { inner })
    }

    #[getter]
    fn weights(&self) -> Vec<Vec<f64>> {
        self.inner.weights().to_vec()
    }

    #[getter]
    fn step(&self) -> u64 {
        self.inner.step()
    }

    fn winner(&self, x: Vec<f64>) -> PyResult<usize> {
        self.inner.winner(&x).map_err(py_err)
    }

    fn train_step(&mut self, x: Vec<f64>) -> PyResult<usize> {
        self.inner.train_step(&x).map_err(py_err)
    }

    /// Trains for the configured epochs; returns winner counts per epoch.
    fn train(&mut self, stream: Vec<Vec<f64>>) -> PyResult<Vec<Vec<u64>>> {
        let log = self.inner.train(&stream).map_err(py_err)?;
        Ok(log.epochs.into_iter().map(|e| e.winner_counts).collect())
    }

    fn classify(&self, stream: Vec<Vec<f64>>) -> PyResult<Vec<usize>> {
        self.inner.classify(&stream).map_err(py_err)
    }

    fn snapshot_json(&self) -> String {
        self.inner.snapshot_json()
    }
}

/// Template-grammar noun/verb corpus: `(tokens, labels)`.
#[pyfunction]
#[pyo3(signature = (num_sentences, seed = 0, boundary_marker = None))]
fn generate_elman(
    num_sentences: usize,
    seed: u64,
    boundary_marker: Option<&str>,
) -> PyResult<(Vec<String>, Vec<String>)> {
    let mut corpus = elman::generate(&elman::default_grammar(), num_sentences, seed).map_err(py_err)?;
    if let Some(marker) = boundary_marker {
        corpus = corpus.with_boundary_marker(marker).map_err(py_err)?;
    }
    Ok((corpus.tokens, corpus.labels))
}

/// `{category: [words]}` of the built-in grammar.
#[pyfunction]
fn default_grammar() -> BTreeMap<String, Vec<String>> {
    elman::default_grammar().categories().iter().cloned().collect()
}

#[pyfunction]
fn purity(
    partition: BTreeMap<String, usize>,
    gold: BTreeMap<String, Vec<String>>,
) -> PyResult<f64> {
    evaluate::purity(&partition_from(partition)?, &GoldGroups::new(gold)).map_err(py_err)
}

/// `(macro_f1, {group: f1})`.
#[pyfunction]
fn group_f1(
    partition: BTreeMap<String, usize>,
    gold: BTreeMap<String, Vec<String>>,
) -> PyResult<(f64, BTreeMap<String, f64>)> {
    let f1 = evaluate::group_f1(&partition_from(partition)?, &GoldGroups::new(gold)).map_err(py_err)?;
    Ok((f1.macro_f1, f1.per_group))
}

#[pyfunction]
fn category_accuracy(units: Vec<usize>, gold: Vec<String>) -> PyResult<f64> {
    evaluate::category_accuracy(&units, &gold).map_err(py_err)
}

/// The bundled semantic word groups.
#[pyfunction]
fn table1() -> BTreeMap<String, Vec<String>> {
    GoldGroups::table1()
        .groups()
        .map(|(name, words)| (name.to_string(), words.iter().cloned().collect()))
        .collect()
}

#[pymodule]
fn pywordgroup(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Vocabulary>()?;
    m.add_class::<CooccurrenceTable>()?;
    m.add_class::<ContextVectors>()?;
    m.add_class::<DistanceMatrix>()?;
    m.add_class::<Dendrogram>()?;
    m.add_class::<CompetitiveNetwork>()?;
    m.add_function(wrap_pyfunction!(tokenize, m)?)?;
    m.add_function(wrap_pyfunction!(count, m)?)?;
    m.add_function(wrap_pyfunction!(euclidean, m)?)?;
    m.add_function(wrap_pyfunction!(spearman_rho, m)?)?;
    m.add_function(wrap_pyfunction!(spearman_distance, m)?)?;
    m.add_function(wrap_pyfunction!(agglomerate, m)?)?;
    m.add_function(wrap_pyfunction!(encode_occurrences, m)?)?;
    m.add_function(wrap_pyfunction!(generate_elman, m)?)?;
    m.add_function(wrap_pyfunction!(default_grammar, m)?)?;
    m.add_function(wrap_pyfunction!(purity, m)?)?;
    m.add_function(wrap_pyfunction!(group_f1, m)?)?;
    m.add_function(wrap_pyfunction!(category_accuracy, m)?)?;
    m.add_function(wrap_pyfunction!(table1, m)?)?;
    Ok(())
}
