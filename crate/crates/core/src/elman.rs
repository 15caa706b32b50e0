//! Template-grammar artificial corpus with per-token category labels.

use std::collections::HashSet;
use std::fmt::Write as _;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::Token;
use crate::error::{Error, Result};

/// Label given to sentence boundary markers.
pub const BOUNDARY_LABEL: &str = "BOUNDARY";

/// Disjoint named word categories and sentence templates over them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grammar {
    categories: Vec<(String, Vec<String>)>,
    templates: Vec<Vec<String>>,
}

impl Grammar {
    pub fn new(categories: Vec<(String, Vec<String>)>, templates: Vec<Vec<String>>) -> Result<Grammar> {
        let invalid = |msg: String| Err(Error::InvalidArgument(msg));
        let mut seen_words = HashSet::new();
        let mut seen_names = HashSet::new();
        for (name, words) in &categories {
            if !seen_names.insert(name.as_str()) {
                return invalid(format!("category {name} defined twice"));
            }
            if words.is_empty() {
                return invalid(format!("category {name} is empty"));
            }
            for w in words {
                if Token::new(w).is_none() {
                    return invalid(format!("{w:?} is not a single lowercase token"));
                }
                if !seen_words.insert(w.as_str()) {
                    return invalid(format!("word {w} belongs to more than one category"));
                }
            }
        }
        if templates.is_empty() {
            return invalid("grammar needs at least one template".into());
        }
        for t in &templates {
            if t.is_empty() {
                return invalid("templates must not be empty".into());
            }
            if let Some(slot) = t.iter().find(|s| !seen_names.contains(s.as_str())) {
                return invalid(format!("template uses undefined category {slot}"));
            }
        }
        Ok(Grammar { categories, templates })
    }

    pub fn categories(&self) -> &[(String, Vec<String>)] {
        &self.categories
    }

    pub fn templates(&self) -> &[Vec<String>] {
        &self.templates
    }

    pub fn category(&self, name: &str) -> Option<&[String]> {
        self.categories
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, w)| w.as_slice())
    }

    pub fn category_of(&self, word: &str) -> Option<&str> {
        self.categories
            .iter()
            .find(|(_, ws)| ws.iter().any(|w| w == word))
            .map(|(n, _)| n.as_str())
    }
}

/// Eight nouns, six verbs, and the sentence shapes `NOUN VERB` and
/// `NOUN VERB NOUN`.
pub fn default_grammar() -> Grammar {
    let words = |ws: &[&str]| ws.iter().map(|w| w.to_string()).collect::<Vec<_>>();
    Grammar::new(
        vec![
            (
                "NOUN".into(),
                words(&["man", "woman", "boy", "girl", "cat", "dog", "book", "rock"]),
            ),
            ("VERB".into(), words(&["see", "chase", "eat", "like", "break", "move"])),
        ],
        vec![words(&["NOUN", "VERB"]), words(&["NOUN", "VERB", "NOUN"])],
    )
    .expect("default grammar is valid")
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LabeledCorpus {
    pub tokens: Vec<String>,
    pub labels: Vec<String>,
    /// Token count of each sentence, in order.
    pub sentence_lengths: Vec<usize>,
}

impl LabeledCorpus {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn sentences(&self) -> impl Iterator<Item = &[String]> + '_ {
        let mut start = 0;
        self.sentence_lengths.iter().map(move |&n| {
            let s = &self.tokens[start..start + n];
            start += n;
            s
        })
    }

    /// Appends `marker` (labelled [`BOUNDARY_LABEL`]) to every sentence.
    pub fn with_boundary_marker(&self, marker: &str) -> Result<LabeledCorpus> {
        if Token::new(marker).is_none() {
            return Err(Error::InvalidArgument(format!("{marker:?} is not a single lowercase token")));
        }
        let mut out = LabeledCorpus::default();
        let mut start = 0;
        for &n in &self.sentence_lengths {
            out.tokens.extend_from_slice(&self.tokens[start..start + n]);
            out.labels.extend_from_slice(&self.labels[start..start + n]);
            out.tokens.push(marker.to_string());
            out.labels.push(BOUNDARY_LABEL.to_string());
            out.sentence_lengths.push(n + 1);
            start += n;
        }
        Ok(out)
    }

    /// One sentence per line, words separated by single spaces.
    pub fn corpus_text(&self) -> String {
        let mut out = String::new();
        for s in self.sentences() {
            out.push_str(&s.join(" "));
            out.push('\n');
        }
        out
    }

    /// `token<TAB>category` per token, in order.
    pub fn labels_tsv(&self) -> String {
        let mut out = String::new();
        for (t, l) in self.tokens.iter().zip(&self.labels) {
            let _ = writeln!(out, "{t}\t{l}");
        }
        out
    }
}

/// Reads a `token<TAB>category` file.
pub fn parse_labels_tsv(text: &str) -> Result<Vec<(String, String)>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, line)| {
            line.split_once('\t')
                .map(|(t, c)| (t.to_string(), c.to_string()))
                .ok_or_else(|| Error::Parse(format!("labels line {}: {line:?}", i + 1)))
        })
        .collect()
}

/// Draws `num_sentences` sentences: a uniform template, then a uniform word
/// for each slot.
pub fn generate(grammar: &Grammar, num_sentences: usize, seed: u64) -> Result<LabeledCorpus> {
    if num_sentences == 0 {
        return Err(Error::InvalidArgument("num_sentences must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = LabeledCorpus::default();
    for _ in 0..num_sentences {
        let template = &grammar.templates[rng.random_range(0..grammar.templates.len())];
        for slot in template {
            let words = grammar.category(slot).expect("validated template");
            out.tokens.push(words[rng.random_range(0..words.len())].clone());
            out.labels.push(slot.clone());
        }
        out.sentence_lengths.push(template.len());
    }
    Ok(out)
}
