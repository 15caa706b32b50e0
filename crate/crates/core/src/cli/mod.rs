//! The `wordgroup` command-line driver.
//!
//! Every command builds its artifacts in memory, writes them to a temporary
//! sibling of the output directory and renames it into place, so a failed
//! run leaves nothing behind.

mod config;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::compnet::{encode_occurrences, snapshot_json, CompetitiveNetwork};
use crate::cooccur::{count, to_vectors};
use crate::corpus::{build_vocabulary, select_top, tokenize_bytes, Token};
use crate::elman::{default_grammar, generate, parse_labels_tsv};
use crate::evaluate::{category_accuracy, group_f1, majority_categories, purity, GoldGroups, Report};
use crate::hcluster::{agglomerate, cut, Partition};
use crate::metrics::pairwise;

pub use config::{Overrides, RunConfig};

#[derive(Error, Debug)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

#[derive(Parser, Debug)]
#[command(name = "wordgroup", version, about = "Group words by the statistics of their contexts")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Context vectors, distance matrix and dendrogram for the top-n words
    Cluster(RunArgs),
    /// Train the competitive network on per-occurrence inputs and label every occurrence
    Nn(RunArgs),
    /// Generate a labelled artificial noun/verb corpus
    Elman(ElmanArgs),
    /// Score a partition or a per-occurrence labelling against gold data
    Eval(EvalArgs),
}

#[derive(Args, Debug)]
pub struct RunArgs {
    /// JSON config file with flat keys; command-line flags override it
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Replace the output directory if it already exists
    #[arg(long)]
    pub force: bool,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Args, Debug)]
pub struct ElmanArgs {
    #[arg(long)]
    pub num_sentences: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Append this token after every sentence
    #[arg(long)]
    pub boundary_marker: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub force: bool,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// Partition TSV (word<TAB>cluster) to score against gold groups
    #[arg(long, requires = "gold_source")]
    pub partition: Option<PathBuf>,
    /// Per-occurrence assignments TSV (position<TAB>word<TAB>unit), scored against --labels
    #[arg(long, requires = "labels")]
    pub assignments: Option<PathBuf>,
    /// Gold groups JSON {group: [words]}
    #[arg(long, group = "gold_source")]
    pub gold: Option<PathBuf>,
    /// Per-token labels TSV (token<TAB>category)
    #[arg(long, group = "gold_source")]
    pub labels: Option<PathBuf>,
    /// Also write report.json here
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Output file name -> contents.
pub type Artifacts = BTreeMap<String, Vec<u8>>;

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(summary) => {
            print!("{summary}");
            0
        }
        Err(e) => {
            eprintln!("wordgroup: {e}");
            e.exit_code()
        }
    }
}

fn execute(command: Command) -> Result<String, CliError> {
    match command {
        Command::Cluster(args) => {
            let (config, force) = resolve(args)?;
            config.validate(false)?;
            let artifacts = cmd_cluster(&config)?;
            let out = config.out.as_deref().expect("validated");
            write_atomically(out, &artifacts, force)?;
            Ok(String::from_utf8_lossy(&artifacts["report.txt"]).into_owned())
        }
        Command::Nn(args) => {
            let (config, force) = resolve(args)?;
            config.validate(true)?;
            let artifacts = cmd_nn(&config)?;
            let out = config.out.as_deref().expect("validated");
            write_atomically(out, &artifacts, force)?;
            Ok(String::from_utf8_lossy(&artifacts["report.txt"]).into_owned())
        }
        Command::Elman(args) => {
            let artifacts =
                cmd_elman(args.num_sentences, args.seed, args.boundary_marker.as_deref())?;
            write_atomically(&args.out, &artifacts, args.force)?;
            Ok(format!("wrote {} sentences to {}\n", args.num_sentences, args.out.display()))
        }
        Command::Eval(args) => {
            let report = cmd_eval(&args)?;
            if let Some(out) = &args.out {
                let mut artifacts = Artifacts::new();
                artifacts.insert("report.json".into(), report.to_json().into_bytes());
                write_atomically(out, &artifacts, true)?;
            }
            Ok(report.to_text())
        }
    }
}

fn resolve(args: RunArgs) -> Result<(RunConfig, bool), CliError> {
    let base = match &args.config {
        Some(path) => Overrides::from_json_file(path)?,
        None => Overrides::default(),
    };
    Ok((args.overrides.over(base).resolve(), args.force))
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))
}

fn read_corpus(paths: &[PathBuf]) -> Result<Vec<Token>, CliError> {
    let mut tokens = Vec::new();
    for p in paths {
        let bytes =
            fs::read(p).map_err(|e| CliError::Data(format!("cannot read {}: {e}", p.display())))?;
        tokens.extend(tokenize_bytes(&bytes));
    }
    if tokens.is_empty() {
        return Err(CliError::Data("corpus contains no tokens".into()));
    }
    Ok(tokens)
}

/// Per-token categories aligned with the tokenized corpus.
fn read_token_labels(path: &Path, tokens: &[Token]) -> Result<Vec<String>, CliError> {
    let pairs = parse_labels_tsv(&read_text(path)?)?;
    if pairs.len() != tokens.len() {
        return Err(CliError::Data(format!(
            "{} has {} labels but the corpus has {} tokens",
            path.display(),
            pairs.len(),
            tokens.len()
        )));
    }
    for (i, ((word, _), tok)) in pairs.iter().zip(tokens).enumerate() {
        if word != tok.as_str() {
            return Err(CliError::Data(format!(
                "label {} is for {word:?} but token {i} is {tok:?}",
                i + 1
            )));
        }
    }
    Ok(pairs.into_iter().map(|(_, c)| c).collect())
}

/// Gold groups from either a groups file or a token-label file
/// (category -> words carrying that category).
fn load_gold(gold: Option<&Path>, labels: Option<&Path>) -> Result<Option<GoldGroups>, CliError> {
    if let Some(path) = gold {
        return Ok(Some(GoldGroups::from_json(&read_text(path)?)?));
    }
    if let Some(path) = labels {
        let mut groups: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for (word, cat) in parse_labels_tsv(&read_text(path)?)? {
            groups.entry(cat).or_default().push(word);
        }
        return Ok(Some(GoldGroups::new(groups)));
    }
    Ok(None)
}

fn config_json(config: &RunConfig) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(config).expect("config serializes");
    s.push('\n');
    s.into_bytes()
}

fn tsv_bytes<F>(write: F) -> Vec<u8>
where
    F: FnOnce(&mut Vec<u8>) -> std::io::Result<()>,
{
    let mut buf = Vec::new();
    write(&mut buf).expect("writing to memory");
    buf
}

/// Runs tokenization through clustering and returns every output file.
pub fn cmd_cluster(config: &RunConfig) -> Result<Artifacts, CliError> {
    let window = config.window()?;
    let tokens = read_corpus(&config.corpus)?;
    let vocab = build_vocabulary(&tokens);
    let targets = select_top(&vocab, config.n_targets)?;
    let contexts = select_top(&vocab, config.n_contexts)?;
    let table = count(&tokens, &targets, &contexts, window);
    let vectors = to_vectors(&table);
    let distances = pairwise(&vectors, config.metric)?;
    let tree = agglomerate(&distances, config.linkage)?;

    let mut report = Report::default();
    report.insert("tokens", tokens.len());
    report.insert("vocabulary", vocab.len());
    report.insert("targets", targets.len());
    report.insert("contexts", contexts.len());
    report.insert("usable_targets", distances.len());
    report.insert("flagged_targets", vectors.flagged().iter().filter(|&&f| f).count());
    report.insert("side_length", config.side_length);
    report.insert("gap", config.gap);
    report.insert("metric", config.metric.to_string());
    report.insert("linkage", config.linkage.to_string());

    let mut artifacts = Artifacts::new();
    let gold = load_gold(config.gold.as_deref(), config.labels.as_deref())?;
    let mut k = config.k;
    if let Some(gold) = gold {
        let (gold, warnings) = gold.filter(|w| distances.labels().iter().any(|l| l == w));
        if gold.is_empty() {
            return Err(CliError::Data("no gold word is among the clustered targets".into()));
        }
        let k_eval = k.unwrap_or(gold.len()).min(tree.num_leaves());
        k = Some(k_eval);
        let partition = cut(&tree, k_eval)?;
        let f1 = group_f1(&partition, &gold)?;
        report.insert("purity", purity(&partition, &gold)?);
        report.insert("macro_f1", f1.macro_f1);
        report.insert("group_f1", serde_json::to_value(&f1.per_group).expect("f1 serializes"));
        report.insert("gold_groups", gold.len());
        report.insert("gold_warnings", warnings.len());
        if !warnings.is_empty() {
            artifacts.insert("gold_warnings.txt".into(), (warnings.join("\n") + "\n").into_bytes());
        }
    }
    if let Some(k) = k {
        let k = k.min(tree.num_leaves());
        report.insert("k", k);
        artifacts.insert("partition.tsv".into(), cut(&tree, k)?.to_tsv().into_bytes());
    }

    artifacts.insert("config.json".into(), config_json(config));
    artifacts.insert("vocab.tsv".into(), tsv_bytes(|b| vocab.write_tsv(b)));
    artifacts.insert("counts.tsv".into(), tsv_bytes(|b| table.write_tsv(b)));
    artifacts.insert("vectors.tsv".into(), tsv_bytes(|b| vectors.write_tsv(b)));
    artifacts.insert("distances.tsv".into(), tsv_bytes(|b| distances.write_tsv(b)));
    artifacts.insert("tree.nwk".into(), format!("{}\n", tree.to_newick()).into_bytes());
    artifacts.insert("tree.json".into(), format!("{}\n", tree.to_json()).into_bytes());
    artifacts.insert("tree.txt".into(), tree.to_ascii().into_bytes());
    artifacts.insert("report.json".into(), report.to_json().into_bytes());
    artifacts.insert("report.txt".into(), report.to_text().into_bytes());
    Ok(artifacts)
}

/// Trains the competitive network and labels every target occurrence.
pub fn cmd_nn(config: &RunConfig) -> Result<Artifacts, CliError> {
    let window = config.window()?;
    let net_config = config.network();
    net_config.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let tokens = read_corpus(&config.corpus)?;
    let vocab = build_vocabulary(&tokens);
    let targets = select_top(&vocab, config.n_targets)?;
    let contexts = select_top(&vocab, config.n_contexts)?;
    let occurrences = encode_occurrences(&tokens, &targets, &contexts, window);
    let dim = targets.len() + contexts.len();

    let mut net = CompetitiveNetwork::init(net_config, dim, &occurrences)?;
    let log = net.train(&occurrences)?;
    let units = net.classify(&occurrences)?;

    let mut artifacts = Artifacts::new();
    for e in &log.epochs {
        artifacts.insert(
            format!("snapshots/epoch-{:03}.json", e.epoch),
            snapshot_json(dim, config.seed, e.step, &e.snapshot).into_bytes(),
        );
    }
    artifacts.insert("weights.json".into(), net.snapshot_json().into_bytes());
    artifacts.insert("training_log.tsv".into(), log.to_tsv().into_bytes());

    let mut assignments = String::new();
    for (occ, unit) in occurrences.iter().zip(&units) {
        assignments.push_str(&format!("{}\t{}\t{unit}\n", occ.position, tokens[occ.position]));
    }
    artifacts.insert("assignments.tsv".into(), assignments.into_bytes());

    // Words placed in more than one unit across their occurrences.
    let mut units_per_word: BTreeMap<usize, std::collections::BTreeSet<usize>> = BTreeMap::new();
    for (occ, &unit) in occurrences.iter().zip(&units) {
        units_per_word.entry(occ.word).or_default().insert(unit);
    }
    let mut unit_sizes = vec![0u64; net.weights().len()];
    for &u in &units {
        unit_sizes[u] += 1;
    }

    let mut report = Report::default();
    report.insert("tokens", tokens.len());
    report.insert("occurrences", occurrences.len());
    report.insert("targets", targets.len());
    report.insert("contexts", contexts.len());
    report.insert("num_units", config.num_units);
    report.insert("epochs", config.epochs);
    report.insert("steps", net.step());
    report.insert("unit_sizes", unit_sizes);
    report.insert(
        "multi_unit_words",
        units_per_word.values().filter(|s| s.len() > 1).count(),
    );
    if let Some(path) = &config.labels {
        let categories = read_token_labels(path, &tokens)?;
        let gold: Vec<&str> = occurrences
            .iter()
            .map(|o| categories[o.position].as_str())
            .collect();
        report.insert("category_accuracy", category_accuracy(&units, &gold)?);
        let majority: BTreeMap<String, String> = majority_categories(&units, &gold)
            .into_iter()
            .map(|(u, c)| (u.to_string(), c))
            .collect();
        report.insert("unit_categories", serde_json::to_value(majority).expect("map serializes"));
    }
    artifacts.insert("config.json".into(), config_json(config));
    artifacts.insert("report.json".into(), report.to_json().into_bytes());
    artifacts.insert("report.txt".into(), report.to_text().into_bytes());
    Ok(artifacts)
}

/// Generates the artificial corpus and its label file.
pub fn cmd_elman(
    num_sentences: usize,
    seed: u64,
    boundary_marker: Option<&str>,
) -> Result<Artifacts, CliError> {
    if num_sentences == 0 {
        return Err(CliError::Usage("num_sentences must be >= 1".into()));
    }
    let mut corpus = generate(&default_grammar(), num_sentences, seed)?;
    if let Some(marker) = boundary_marker {
        corpus = corpus
            .with_boundary_marker(marker)
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let mut artifacts = Artifacts::new();
    artifacts.insert("corpus.txt".into(), corpus.corpus_text().into_bytes());
    artifacts.insert("labels.tsv".into(), corpus.labels_tsv().into_bytes());
    Ok(artifacts)
}

fn cmd_eval(args: &EvalArgs) -> Result<Report, CliError> {
    let mut report = Report::default();
    match (&args.partition, &args.assignments) {
        (Some(path), None) => {
            let partition = Partition::from_tsv(&read_text(path)?)?;
            let gold = load_gold(args.gold.as_deref(), args.labels.as_deref())?
                .ok_or_else(|| CliError::Usage("--partition needs --gold or --labels".into()))?;
            let (gold, warnings) = gold.filter(|w| partition.cluster_of(w).is_some());
            if gold.is_empty() {
                return Err(CliError::Data("no gold word appears in the partition".into()));
            }
            for w in &warnings {
                eprintln!("warning: {w}");
            }
            let f1 = group_f1(&partition, &gold)?;
            report.insert("k", partition.k());
            report.insert("purity", purity(&partition, &gold)?);
            report.insert("macro_f1", f1.macro_f1);
            report.insert("group_f1", serde_json::to_value(&f1.per_group).expect("f1 serializes"));
            report.insert("gold_groups", gold.len());
        }
        (None, Some(path)) => {
            let labels_path = args.labels.as_deref().expect("clap requires --labels");
            let categories = parse_labels_tsv(&read_text(labels_path)?)?;
            let mut units = Vec::new();
            let mut gold = Vec::new();
            for (i, line) in read_text(path)?.lines().enumerate() {
                let fields: Vec<&str> = line.split('\t').collect();
                let bad = || CliError::Data(format!("assignments line {}: {line:?}", i + 1));
                let [pos, word, unit] = fields[..] else {
                    return Err(bad());
                };
                let pos: usize = pos.parse().map_err(|_| bad())?;
                let unit: usize = unit.parse().map_err(|_| bad())?;
                match categories.get(pos) {
                    Some((w, c)) if w == word => gold.push(c.clone()),
                    _ => return Err(CliError::Data(format!("position {pos} ({word}) not in labels"))),
                }
                units.push(unit);
            }
            report.insert("occurrences", units.len());
            report.insert("category_accuracy", category_accuracy(&units, &gold)?);
        }
        _ => {
            return Err(CliError::Usage(
                "give exactly one of --partition or --assignments".into(),
            ))
        }
    }
    Ok(report)
}

/// Writes `artifacts` into a fresh temporary directory next to `out`, then
/// renames it to `out`.
pub fn write_atomically(out: &Path, artifacts: &Artifacts, force: bool) -> Result<(), CliError> {
    let io_err = |what: &str, p: &Path, e: std::io::Error| {
        CliError::Data(format!("{what} {}: {e}", p.display()))
    };
    let occupied = out.exists()
        && (!out.is_dir() || fs::read_dir(out).map_err(|e| io_err("cannot read", out, e))?.next().is_some());
    if occupied && !force {
        return Err(CliError::Usage(format!(
            "{} already exists (use --force to replace it)",
            out.display()
        )));
    }
    let parent = match out.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&parent).map_err(|e| io_err("cannot create", &parent, e))?;
    let name = out.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = tempfile::Builder::new()
        .prefix(&format!(".{name}.tmp"))
        .tempdir_in(&parent)
        .map_err(|e| io_err("cannot create a temporary directory in", &parent, e))?;
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        fs::set_permissions(tmp.path(), fs::Permissions::from_mode(0o755))
            .map_err(|e| io_err("cannot set permissions on", tmp.path(), e))?;
    }
    for (file, bytes) in artifacts {
        let path = tmp.path().join(file);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(|e| io_err("cannot create", dir, e))?;
        }
        fs::write(&path, bytes).map_err(|e| io_err("cannot write", &path, e))?;
    }
    if out.exists() {
        if out.is_dir() {
            fs::remove_dir_all(out).map_err(|e| io_err("cannot remove", out, e))?;
        } else {
            fs::remove_file(out).map_err(|e| io_err("cannot remove", out, e))?;
        }
    }
    let tmp = tmp.keep();
    fs::rename(&tmp, out).map_err(|e| {
        let _ = fs::remove_dir_all(&tmp);
        io_err("cannot move output to", out, e)
    })
}
