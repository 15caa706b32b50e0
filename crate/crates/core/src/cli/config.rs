use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};

use crate::compnet::NetworkConfig;
use crate::cooccur::WindowConfig;
use crate::hcluster::Linkage;
use crate::metrics::Metric;

use super::CliError;

/// Fully resolved run settings. Written to every output directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub corpus: Vec<PathBuf>,
    pub n_targets: usize,
    pub n_contexts: usize,
    pub side_length: usize,
    pub gap: usize,
    pub metric: Metric,
    pub linkage: Linkage,
    pub k: Option<usize>,
    pub gold: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    pub num_units: usize,
    pub learning_rate_initial: f64,
    pub learning_rate_final: f64,
    pub epochs: usize,
    pub seed: u64,
    pub unit_norm: bool,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let net = NetworkConfig::default();
        RunConfig {
            corpus: Vec::new(),
            n_targets: 1000,
            n_contexts: 1000,
            side_length: 1,
            gap: 0,
            metric: Metric::Euclidean,
            linkage: Linkage::Average,
            k: None,
            gold: None,
            labels: None,
            num_units: net.num_units,
            learning_rate_initial: net.learning_rate_initial,
            learning_rate_final: net.learning_rate_final,
            epochs: net.epochs,
            seed: 0,
            unit_norm: net.unit_norm,
            out: None,
        }
    }
}

/// Optional settings, from the command line or a JSON config file with the
/// same flat snake_case keys. Command-line values win.
#[derive(Debug, Clone, Default, PartialEq, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    /// Corpus text file(s), read as one token stream in the order given
    #[arg(long, num_args = 1..)]
    pub corpus: Option<Vec<PathBuf>>,
    /// Number of most frequent words used as targets
    #[arg(long)]
    pub n_targets: Option<usize>,
    /// Number of most frequent words used as context words (defaults to n-targets)
    #[arg(long)]
    pub n_contexts: Option<usize>,
    /// Window positions on each side of the target
    #[arg(long)]
    pub side_length: Option<usize>,
    /// Excluded positions adjacent to the target, per side
    #[arg(long)]
    pub gap: Option<usize>,
    /// euclidean | spearman
    #[arg(long)]
    pub metric: Option<Metric>,
    /// single | complete | average
    #[arg(long)]
    pub linkage: Option<Linkage>,
    /// Number of flat clusters to cut the dendrogram into
    #[arg(long)]
    pub k: Option<usize>,
    /// Gold word groups, JSON {group: [words]}
    #[arg(long)]
    pub gold: Option<PathBuf>,
    /// Per-token category labels, TSV token<TAB>category
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Competitive network output units
    #[arg(long)]
    pub num_units: Option<usize>,
    #[arg(long)]
    pub learning_rate_initial: Option<f64>,
    #[arg(long)]
    pub learning_rate_final: Option<f64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Keep competitive unit weights at unit length (true | false)
    #[arg(long)]
    pub unit_norm: Option<bool>,
    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl Overrides {
    pub fn from_json_file(path: &Path) -> Result<Overrides, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))
    }

    /// Values set here take precedence over `base`.
    pub fn over(self, base: Overrides) -> Overrides {
        macro_rules! pick {
            ($($f:ident),*) => { Overrides { $($f: self.$f.or(base.$f)),* } };
        }
        pick!(
            corpus, n_targets, n_contexts, side_length, gap, metric, linkage, k, gold, labels,
            num_units, learning_rate_initial, learning_rate_final, epochs, seed, unit_norm, out
        )
    }

    pub fn resolve(self) -> RunConfig {
        let d = RunConfig::default();
        let n_targets = self.n_targets.unwrap_or(d.n_targets);
        RunConfig {
            corpus: self.corpus.unwrap_or(d.corpus),
            n_targets,
            n_contexts: self.n_contexts.unwrap_or(n_targets),
            side_length: self.side_length.unwrap_or(d.side_length),
            gap: self.gap.unwrap_or(d.gap),
            metric: self.metric.unwrap_or(d.metric),
            linkage: self.linkage.unwrap_or(d.linkage),
            k: self.k.or(d.k),
            gold: self.gold.or(d.gold),
            labels: self.labels.or(d.labels),
            num_units: self.num_units.unwrap_or(d.num_units),
            learning_rate_initial: self.learning_rate_initial.unwrap_or(d.learning_rate_initial),
            learning_rate_final: self.learning_rate_final.unwrap_or(d.learning_rate_final),
            epochs: self.epochs.unwrap_or(d.epochs),
            seed: self.seed.unwrap_or(d.seed),
            unit_norm: self.unit_norm.unwrap_or(d.unit_norm),
            out: self.out.or(d.out),
        }
    }
}

impl RunConfig {
    pub fn window(&self) -> Result<WindowConfig, CliError> {
        WindowConfig::new(self.side_length, self.gap).map_err(|e| CliError::Usage(e.to_string()))
    }

    pub fn network(&self) -> NetworkConfig {
        NetworkConfig {
            num_units: self.num_units,
            learning_rate_initial: self.learning_rate_initial,
            learning_rate_final: self.learning_rate_final,
            epochs: self.epochs,
            seed: self.seed,
            unit_norm: self.unit_norm,
        }
    }

    /// Checks everything that can be checked before touching the data.
    pub fn validate(&self, needs_network: bool) -> Result<(), CliError> {
        let usage = |m: String| Err(CliError::Usage(m));
        if self.corpus.is_empty() {
            return usage("no corpus given (--corpus)".into());
        }
        for p in self.corpus.iter().chain(&self.gold).chain(&self.labels) {
            if !p.exists() {
                return usage(format!("{} does not exist", p.display()));
            }
        }
        if self.n_targets == 0 || self.n_contexts == 0 {
            return usage("n_targets and n_contexts must be >= 1".into());
        }
        if self.k == Some(0) {
            return usage("k must be >= 1".into());
        }
        if self.out.is_none() {
            return usage("no output directory given (--out)".into());
        }
        self.window()?;
        if needs_network {
            self.network()
                .validate()
                .map_err(|e| CliError::Usage(e.to_string()))?;
        }
        Ok(())
    }
}
