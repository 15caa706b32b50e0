//! Online winner-take-all competitive network over per-occurrence inputs.
//!
//! Each input is one token occurrence: a one-hot block for the word followed
//! by the L1-normalized bag of context words inside its window. The unit
//! nearest (Euclidean) to an input wins and moves toward it; nothing else
//! changes.
//!
//! With [`NetworkConfig::unit_norm`] set (the default), unit weights are kept
//! at length 1 after initialization and after every update, so units compete
//! on the direction of an input rather than its length. Without it a unit
//! seeded from a single occurrence keeps that word's one-hot weight and ends
//! up winning only that word, while the other unit takes everything else.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cooccur::WindowConfig;
use crate::corpus::WordSet;
use crate::error::{Error, Result};
use crate::metrics::squared_euclidean;
use crate::numfmt::g17;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub num_units: usize,
    pub learning_rate_initial: f64,
    pub learning_rate_final: f64,
    pub epochs: usize,
    pub seed: u64,
    /// Rescale the winner's weights to unit length after each update.
    #[serde(default = "default_unit_norm")]
    pub unit_norm: bool,
}

fn default_unit_norm() -> bool {
    true
}

impl Default for NetworkConfig {
    fn default() -> Self {
        NetworkConfig {
            num_units: 2,
            learning_rate_initial: 0.3,
            learning_rate_final: 0.01,
            epochs: 3,
            seed: 0,
            unit_norm: true,
        }
    }
}

impl NetworkConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidArgument(msg.to_string()));
        if self.num_units < 2 {
            return bad("num_units must be >= 2");
        }
        if !(self.learning_rate_initial > 0.0 && self.learning_rate_initial <= 1.0) {
            return bad("learning_rate_initial must be in (0, 1]");
        }
        if !(self.learning_rate_final >= 0.0
            && self.learning_rate_final <= self.learning_rate_initial)
        {
            return bad("learning_rate_final must be in [0, learning_rate_initial]");
        }
        if self.epochs == 0 {
            return bad("epochs must be >= 1");
        }
        Ok(())
    }
}

/// Anything that can be presented to the network as a dense input vector.
pub trait NetworkInput {
    fn dim(&self) -> usize;

    /// Writes the dense encoding into `buf`, which has length `dim()`.
    fn fill(&self, buf: &mut [f64]);
}

impl NetworkInput for [f64] {
    fn dim(&self) -> usize {
        self.len()
    }

    fn fill(&self, buf: &mut [f64]) {
        buf.copy_from_slice(self);
    }
}

impl NetworkInput for Vec<f64> {
    fn dim(&self) -> usize {
        self.len()
    }

    fn fill(&self, buf: &mut [f64]) {
        buf.copy_from_slice(self);
    }
}

/// One target occurrence: the word's one-hot index and the normalized
/// context bag, stored sparsely.
#[derive(Debug, Clone, PartialEq)]
pub struct OccurrenceInput {
    /// Token position in the corpus.
    pub position: usize,
    /// Index of the word in the target set.
    pub word: usize,
    /// `(context index, weight)` pairs, sorted by index, weights summing to 1.
    pub context: Vec<(usize, f64)>,
    num_targets: usize,
    num_contexts: usize,
}

impl OccurrenceInput {
    pub fn dense(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.dim()];
        self.fill(&mut v);
        v
    }
}

impl NetworkInput for OccurrenceInput {
    fn dim(&self) -> usize {
        self.num_targets + self.num_contexts
    }

    fn fill(&self, buf: &mut [f64]) {
        buf.fill(0.0);
        buf[self.word] = 1.0;
        for &(c, w) in &self.context {
            buf[self.num_targets + c] = w;
        }
    }
}

/// Encodes every occurrence of a target word, in corpus order.
pub fn encode_occurrences<T: AsRef<str>>(
    tokens: &[T],
    targets: &WordSet,
    contexts: &WordSet,
    window: WindowConfig,
) -> Vec<OccurrenceInput> {
    let ctx: Vec<Option<usize>> = tokens
        .iter()
        .map(|t| contexts.index_of(t.as_ref()))
        .collect();
    let mut out = Vec::new();
    for (p, tok) in tokens.iter().enumerate() {
        let Some(word) = targets.index_of(tok.as_ref()) else {
            continue;
        };
        let mut bag: Vec<usize> = window
            .positions(p, tokens.len())
            .filter_map(|q| ctx[q])
            .collect();
        bag.sort_unstable();
        let total = bag.len() as f64;
        let mut context: Vec<(usize, f64)> = Vec::new();
        for c in bag {
            match context.last_mut() {
                Some((last, n)) if *last == c => *n += 1.0,
                _ => context.push((c, 1.0)),
            }
        }
        for (_, w) in &mut context {
            *w /= total;
        }
        out.push(OccurrenceInput {
            position: p,
            word,
            context,
            num_targets: targets.len(),
            num_contexts: contexts.len(),
        });
    }
    out
}

/// Winner counts and a weight snapshot taken at the end of each epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochLog {
    pub epoch: usize,
    pub winner_counts: Vec<u64>,
    pub snapshot: Vec<Vec<f64>>,
    pub step: u64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainingLog {
    pub epochs: Vec<EpochLog>,
}

impl TrainingLog {
    pub fn total_events(&self) -> u64 {
        self.epochs
            .iter()
            .flat_map(|e| e.winner_counts.iter())
            .sum()
    }

    /// `epoch<TAB>unit<TAB>winner_count` lines, epochs numbered from 1.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for e in &self.epochs {
            for (unit, n) in e.winner_counts.iter().enumerate() {
                let _ = writeln!(out, "{}\t{unit}\t{n}", e.epoch);
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompetitiveNetwork {
    config: NetworkConfig,
    dim: usize,
    weights: Vec<Vec<f64>>,
    step: u64,
    scheduled_steps: u64,
}

impl CompetitiveNetwork {
    /// Seeds each unit with a distinct training sample drawn at random.
    /// Samples with distinct values are preferred so that no two units start
    /// at the same point; duplicates are used only when there are not enough
    /// distinct values.
    pub fn init<T: NetworkInput>(
        config: NetworkConfig,
        input_dim: usize,
        samples: &[T],
    ) -> Result<CompetitiveNetwork> {
        config.validate()?;
        if input_dim == 0 {
            return Err(Error::InvalidArgument("input dimension must be >= 1".into()));
        }
        if samples.len() < config.num_units {
            return Err(Error::InsufficientData(format!(
                "{} units need at least as many samples, got {}",
                config.num_units,
                samples.len()
            )));
        }
        let mut order: Vec<usize> = (0..samples.len()).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(config.seed));

        let mut weights: Vec<Vec<f64>> = Vec::with_capacity(config.num_units);
        let mut duplicates = Vec::new();
        let mut buf = vec![0.0; input_dim];
        for &i in &order {
            if weights.len() == config.num_units {
                break;
            }
            check_dim(input_dim, samples[i].dim())?;
            samples[i].fill(&mut buf);
            if weights.contains(&buf) {
                if duplicates.len() < config.num_units {
                    duplicates.push(buf.clone());
                }
            } else {
                weights.push(buf.clone());
            }
        }
        let missing = config.num_units - weights.len();
        weights.extend(duplicates.into_iter().take(missing));
        if config.unit_norm {
            weights.iter_mut().for_each(|w| normalize(w));
        }

        Ok(CompetitiveNetwork {
            config,
            dim: input_dim,
            weights,
            step: 0,
            scheduled_steps: 1,
        })
    }

    /// Rebuilds a network from stored weights, e.g. a snapshot file.
    pub fn from_weights(config: NetworkConfig, weights: Vec<Vec<f64>>, step: u64) -> Result<Self> {
        config.validate()?;
        if weights.len() != config.num_units {
            return Err(Error::DimensionMismatch { left: weights.len(), right: config.num_units });
        }
        let dim = weights[0].len();
        for w in &weights {
            check_dim(dim, w.len())?;
            if w.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidArgument("weights must be finite".into()));
            }
        }
        Ok(CompetitiveNetwork { config, dim, weights, step, scheduled_steps: step.max(1) })
    }

    pub fn config(&self) -> &NetworkConfig {
        &self.config
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    /// Sets the total number of steps over which the learning rate decays.
    pub fn set_schedule(&mut self, total_steps: u64) {
        self.scheduled_steps = total_steps.max(1);
    }

    /// Learning rate at step `t`: linear from the initial to the final rate
    /// over the scheduled steps, then held at the final rate.
    pub fn learning_rate_at(&self, t: u64) -> f64 {
        let (a, b) = (self.config.learning_rate_initial, self.config.learning_rate_final);
        if self.scheduled_steps <= 1 {
            return a;
        }
        let last = (self.scheduled_steps - 1) as f64;
        let frac = (t as f64 / last).min(1.0);
        a + (b - a) * frac
    }

    fn winner_dense(&self, x: &[f64]) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (k, w) in self.weights.iter().enumerate() {
            let d = squared_euclidean(w, x);
            if d < best_d {
                best = k;
                best_d = d;
            }
        }
        best
    }

    /// Nearest unit; ties go to the lowest id.
    pub fn winner<T: NetworkInput + ?Sized>(&self, x: &T) -> Result<usize> {
        check_dim(self.dim, x.dim())?;
        let mut buf = vec![0.0; self.dim];
        x.fill(&mut buf);
        Ok(self.winner_dense(&buf))
    }

    fn step_dense(&mut self, x: &[f64]) -> usize {
        let k = self.winner_dense(x);
        let eta = self.learning_rate_at(self.step);
        for (w, xi) in self.weights[k].iter_mut().zip(x) {
            *w += eta * (xi - *w);
        }
        if self.config.unit_norm {
            normalize(&mut self.weights[k]);
        }
        self.step += 1;
        k
    }

    /// Moves the winner toward `x` by the current learning rate (then rescales
    /// it when `unit_norm` is set) and returns it.
    pub fn train_step<T: NetworkInput + ?Sized>(&mut self, x: &T) -> Result<usize> {
        check_dim(self.dim, x.dim())?;
        let mut buf = vec![0.0; self.dim];
        x.fill(&mut buf);
        Ok(self.step_dense(&buf))
    }

    /// Presents the stream in order once per configured epoch. The learning
    /// rate decays across all `epochs * stream.len()` steps.
    pub fn train<T: NetworkInput>(&mut self, stream: &[T]) -> Result<TrainingLog> {
        if stream.is_empty() {
            return Err(Error::InsufficientData("training stream is empty".into()));
        }
        for x in stream {
            check_dim(self.dim, x.dim())?;
        }
        let total = self.config.epochs as u64 * stream.len() as u64;
        self.set_schedule(self.step + total);
        let mut log = TrainingLog::default();
        let mut buf = vec![0.0; self.dim];
        for epoch in 1..=self.config.epochs {
            let mut counts = vec![0u64; self.weights.len()];
            for x in stream {
                x.fill(&mut buf);
                counts[self.step_dense(&buf)] += 1;
            }
            log.epochs.push(EpochLog {
                epoch,
                winner_counts: counts,
                snapshot: self.weights.clone(),
                step: self.step,
            });
        }
        Ok(log)
    }

    /// Winning unit per input, without learning.
    pub fn classify<T: NetworkInput>(&self, stream: &[T]) -> Result<Vec<usize>> {
        let mut buf = vec![0.0; self.dim];
        stream
            .iter()
            .map(|x| {
                check_dim(self.dim, x.dim())?;
                x.fill(&mut buf);
                Ok(self.winner_dense(&buf))
            })
            .collect()
    }

    /// JSON weight snapshot with reals printed at 17 significant digits.
    pub fn snapshot_json(&self) -> String {
        snapshot_json(self.dim, self.config.seed, self.step, &self.weights)
    }
}

/// Formats `{dims, K, seed, step, weights}` as JSON.
pub fn snapshot_json(dims: usize, seed: u64, step: u64, weights: &[Vec<f64>]) -> String {
    let mut out = String::new();
    let _ = write!(
        out,
        "{{\n  \"dims\": {dims},\n  \"K\": {},\n  \"seed\": {seed},\n  \"step\": {step},\n  \"weights\": [",
        weights.len()
    );
    for (k, w) in weights.iter().enumerate() {
        out.push_str(if k == 0 { "\n    [" } else { ",\n    [" });
        for (j, x) in w.iter().enumerate() {
            if j > 0 {
                out.push_str(", ");
            }
            out.push_str(&g17(*x));
        }
        out.push(']');
    }
    out.push_str("\n  ]\n}\n");
    out
}

/// Parsed form of [`snapshot_json`].
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct Snapshot {
    pub dims: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub seed: u64,
    pub step: u64,
    pub weights: Vec<Vec<f64>>,
}

impl Snapshot {
    pub fn parse(text: &str) -> Result<Snapshot> {
        let s: Snapshot = serde_json::from_str(text)?;
        if s.weights.len() != s.k || s.weights.iter().any(|w| w.len() != s.dims) {
            return Err(Error::Parse("snapshot shape does not match dims/K".into()));
        }
        Ok(s)
    }
}

/// Scales `w` to unit Euclidean length; the zero vector is left alone.
fn normalize(w: &mut [f64]) {
    let len = w.iter().map(|x| x * x).sum::<f64>().sqrt();
    if len > 0.0 {
        w.iter_mut().for_each(|x| *x /= len);
    }
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        Err(Error::DimensionMismatch { left: expected, right: got })
    } else {
        Ok(())
    }
}
