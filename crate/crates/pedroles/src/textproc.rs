//! Deterministic sentence splitting, tokenization, and TF-IDF features.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::corpus::Document;
use crate::error::{Error, Result};

/// Tokens that block a sentence break after a trailing period. Matched
/// case-insensitively against the text ending at the period, on a word
/// boundary, so "et al." is guarded while "digital." is not.
const ABBREVIATIONS: [&str; 16] = [
    "dr", "mr", "mrs", "ms", "prof", "st", "no", "vs", "cf", "etc", "e.g", "i.e", "et al", "fig",
    "eq", "sec",
];

/// Split text into sentences.
///
/// Rule-based: a break happens after `.`, `!`, or `?` when the next
/// non-whitespace character is an uppercase letter or digit, unless the text
/// before a `.` ends in a guarded abbreviation. Whitespace-only segments are
/// dropped; every non-whitespace character of the input survives in exactly
/// one sentence.
pub fn split_sentences(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut sentences = Vec::new();
    let mut start = 0;

    for i in 0..chars.len() {
        let c = chars[i];
        if c != '.' && c != '!' && c != '?' {
            continue;
        }
        if !matches!(chars.get(i + 1), Some(next) if next.is_whitespace()) {
            continue;
        }
        let mut j = i + 1;
        while j < chars.len() && chars[j].is_whitespace() {
            j += 1;
        }
        let starts_sentence = matches!(chars.get(j), Some(n) if n.is_uppercase() || n.is_ascii_digit());
        if !starts_sentence {
            continue;
        }
        if c == '.' && ends_with_abbreviation(&chars[start..i]) {
            continue;
        }
        push_trimmed(&mut sentences, &chars[start..=i]);
        start = j;
    }
    if start < chars.len() {
        push_trimmed(&mut sentences, &chars[start..]);
    }
    sentences
}

fn push_trimmed(sentences: &mut Vec<String>, chars: &[char]) {
    let sentence: String = chars.iter().collect::<String>().trim().to_string();
    if !sentence.is_empty() {
        sentences.push(sentence);
    }
}

/// Does the text (up to, not including, a `.`) end in a guarded abbreviation?
fn ends_with_abbreviation(before: &[char]) -> bool {
    let lowered: String = before.iter().flat_map(|c| c.to_lowercase()).collect();
    ABBREVIATIONS.iter().any(|abbr| {
        if !lowered.ends_with(abbr) {
            return false;
        }
        match lowered[..lowered.len() - abbr.len()].chars().next_back() {
            None => true,
            Some(prev) => !prev.is_alphanumeric(),
        }
    })
}

/// Lowercased maximal runs of alphanumeric characters.
pub fn tokenize(sentence: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for c in sentence.chars() {
        if c.is_alphanumeric() {
            current.extend(c.to_lowercase());
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

/// All terms of a document: title tokens plus every sentence's tokens.
pub fn document_terms(doc: &Document) -> Vec<String> {
    let mut terms = tokenize(&doc.title);
    for sentence in &doc.sentences {
        terms.extend(tokenize(sentence));
    }
    terms
}

/// TF-IDF vocabulary and document frequencies, restricted to terms appearing
/// in 10%-90% of the fitted documents (bounds inclusive).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TfidfModel {
    /// Lexicographically sorted vocabulary.
    pub vocabulary: Vec<String>,
    /// Document frequency per vocabulary term.
    pub df: Vec<usize>,
    pub n_docs: usize,
    pub min_df: f64,
    pub max_df: f64,
}

pub const DEFAULT_MIN_DF: f64 = 0.10;
pub const DEFAULT_MAX_DF: f64 = 0.90;

/// Sparse vector of (term index, weight), indices strictly increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseVector {
    pub entries: Vec<(u32, f64)>,
}

impl SparseVector {
    pub fn l2_norm(&self) -> f64 {
        self.entries.iter().map(|(_, w)| w * w).sum::<f64>().sqrt()
    }

    pub fn to_dense(&self, len: usize) -> Vec<f64> {
        let mut dense = vec![0.0; len];
        for &(idx, w) in &self.entries {
            dense[idx as usize] = w;
        }
        dense
    }
}

/// Fit a TF-IDF model over tokenized documents.
pub fn tfidf_fit(docs_terms: &[Vec<String>]) -> Result<TfidfModel> {
    tfidf_fit_bounded(docs_terms, DEFAULT_MIN_DF, DEFAULT_MAX_DF)
}

pub fn tfidf_fit_bounded(
    docs_terms: &[Vec<String>],
    min_df: f64,
    max_df: f64,
) -> Result<TfidfModel> {
    if docs_terms.is_empty() {
        return Err(Error::Config("tfidf_fit requires at least one document".into()));
    }
    let n_docs = docs_terms.len();
    let mut doc_freq: BTreeMap<&str, usize> = BTreeMap::new();
    for terms in docs_terms {
        let unique: BTreeSet<&str> = terms.iter().map(String::as_str).collect();
        for term in unique {
            *doc_freq.entry(term).or_insert(0) += 1;
        }
    }
    let mut vocabulary = Vec::new();
    let mut df = Vec::new();
    for (term, count) in doc_freq {
        let fraction = count as f64 / n_docs as f64;
        if fraction >= min_df && fraction <= max_df {
            vocabulary.push(term.to_string());
            df.push(count);
        }
    }
    if vocabulary.is_empty() {
        return Err(Error::Input("no terms within df bounds".into()));
    }
    Ok(TfidfModel {
        vocabulary,
        df,
        n_docs,
        min_df,
        max_df,
    })
}

impl TfidfModel {
    /// Smoothed inverse document frequency: `ln((1+n)/(1+df)) + 1`, always > 0.
    pub fn idf(&self, term_index: usize) -> f64 {
        ((1 + self.n_docs) as f64 / (1 + self.df[term_index]) as f64).ln() + 1.0
    }

    fn term_index(&self, term: &str) -> Option<usize> {
        self.vocabulary.binary_search_by(|t| t.as_str().cmp(term)).ok()
    }
}

/// Transform a tokenized document into an L2-normalized TF-IDF vector.
///
/// Out-of-vocabulary terms are ignored; a document with no in-vocabulary
/// terms maps to the zero vector.
pub fn tfidf_transform(model: &TfidfModel, terms: &[String]) -> SparseVector {
    let mut tf: BTreeMap<usize, usize> = BTreeMap::new();
    for term in terms {
        if let Some(idx) = model.term_index(term) {
            *tf.entry(idx).or_insert(0) += 1;
        }
    }
    let mut entries: Vec<(u32, f64)> = tf
        .into_iter()
        .map(|(idx, count)| (idx as u32, count as f64 * model.idf(idx)))
        .collect();
    let norm = entries.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
    if norm > 0.0 {
        for (_, w) in &mut entries {
            *w /= norm;
        }
    }
    SparseVector { entries }
}
