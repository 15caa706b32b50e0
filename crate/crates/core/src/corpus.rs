//! Tokenization, vocabulary construction and target/context word selection.

use std::borrow::Borrow;
use std::collections::HashMap;
use std::fmt;
use std::io::{self, BufRead, Write};

use crate::error::{Error, Result};

/// A lowercased word: a maximal run of letters, digits and internal apostrophes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Token(String);

impl Token {
    /// Wraps `surface` if it is already a well-formed token.
    pub fn new(surface: &str) -> Option<Token> {
        let mut tokens = tokenize(surface);
        if tokens.len() == 1 && tokens[0].0 == surface {
            tokens.pop()
        } else {
            None
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn into_string(self) -> String {
        self.0
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for Token {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl Borrow<str> for Token {
    fn borrow(&self) -> &str {
        &self.0
    }
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric()
}

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '\u{2019}'
}

/// Splits text into lowercase tokens. Everything that is not a letter, digit
/// or apostrophe separates tokens; apostrophes at either end of a run are
/// dropped, and the typographic apostrophe is normalized to `'`.
pub fn tokenize(text: &str) -> Vec<Token> {
    let mut out = Vec::new();
    let mut current = String::new();
    for c in text.chars() {
        if is_word_char(c) {
            // Some characters lowercase into sequences that include combining
            // marks; keep only what would survive a second pass.
            for lc in c.to_lowercase() {
                if is_word_char(lc) {
                    current.push(lc);
                }
            }
        } else if is_apostrophe(c) {
            current.push('\'');
        } else {
            flush(&mut current, &mut out);
        }
    }
    flush(&mut current, &mut out);
    out
}

fn flush(current: &mut String, out: &mut Vec<Token>) {
    let trimmed = current.trim_matches('\'');
    if !trimmed.is_empty() {
        out.push(Token(trimmed.to_string()));
    }
    current.clear();
}

/// Tokenizes raw bytes, silently dropping invalid UTF-8 sequences.
pub fn tokenize_bytes(bytes: &[u8]) -> Vec<Token> {
    let mut text = String::with_capacity(bytes.len());
    for chunk in bytes.utf8_chunks() {
        text.push_str(chunk.valid());
    }
    tokenize(&text)
}

/// Word frequencies, ordered by count descending then word ascending.
/// A word's id is its position in that order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocabulary {
    entries: Vec<(String, u64)>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    pub fn from_counts<I, S>(counts: I) -> Vocabulary
    where
        I: IntoIterator<Item = (S, u64)>,
        S: Into<String>,
    {
        let mut merged: HashMap<String, u64> = HashMap::new();
        for (word, count) in counts {
            if count > 0 {
                *merged.entry(word.into()).or_default() += count;
            }
        }
        let mut entries: Vec<(String, u64)> = merged.into_iter().collect();
        entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        let index = entries
            .iter()
            .enumerate()
            .map(|(id, (w, _))| (w.clone(), id))
            .collect();
        Vocabulary { entries, index }
    }

    /// Merges the counts of two vocabularies, e.g. from two corpus chunks.
    pub fn merge(&self, other: &Vocabulary) -> Vocabulary {
        Vocabulary::from_counts(
            self.entries
                .iter()
                .chain(other.entries.iter())
                .map(|(w, c)| (w.as_str(), *c)),
        )
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn id(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn word(&self, id: usize) -> Option<&str> {
        self.entries.get(id).map(|(w, _)| w.as_str())
    }

    pub fn count(&self, word: &str) -> u64 {
        self.id(word).map_or(0, |id| self.entries[id].1)
    }

    pub fn total(&self) -> u64 {
        self.entries.iter().map(|(_, c)| c).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> + '_ {
        self.entries.iter().map(|(w, c)| (w.as_str(), *c))
    }

    /// Writes `word<TAB>count` lines in vocabulary order.
    pub fn write_tsv<W: Write>(&self, mut w: W) -> io::Result<()> {
        for (word, count) in self.iter() {
            writeln!(w, "{word}\t{count}")?;
        }
        Ok(())
    }

    pub fn read_tsv<R: BufRead>(r: R) -> Result<Vocabulary> {
        let mut counts = Vec::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let parse_err = || Error::Parse(format!("vocabulary line {}: {line:?}", lineno + 1));
            let (word, count) = line.split_once('\t').ok_or_else(parse_err)?;
            let count: u64 = count.parse().map_err(|_| parse_err())?;
            counts.push((word.to_string(), count));
        }
        Ok(Vocabulary::from_counts(counts))
    }
}

/// Counts every distinct token.
pub fn build_vocabulary<T: AsRef<str>>(tokens: &[T]) -> Vocabulary {
    let mut counts: HashMap<&str, u64> = HashMap::new();
    for t in tokens {
        *counts.entry(t.as_ref()).or_default() += 1;
    }
    Vocabulary::from_counts(counts)
}

/// An ordered set of words with constant-time membership lookup.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WordSet {
    words: Vec<String>,
    index: HashMap<String, usize>,
}

impl WordSet {
    /// Builds a set from `words`, keeping first occurrences only.
    pub fn new<I, S>(words: I) -> WordSet
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut set = WordSet::default();
        for w in words {
            let w = w.into();
            if !set.index.contains_key(&w) {
                set.index.insert(w.clone(), set.words.len());
                set.words.push(w);
            }
        }
        set
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn get(&self, i: usize) -> Option<&str> {
        self.words.get(i).map(String::as_str)
    }
}

/// The `n` most frequent words, in vocabulary order.
pub fn select_top(vocab: &Vocabulary, n: usize) -> Result<WordSet> {
    if n == 0 {
        return Err(Error::InvalidArgument("select_top needs n >= 1".into()));
    }
    Ok(WordSet::new(vocab.iter().take(n).map(|(w, _)| w)))
}
