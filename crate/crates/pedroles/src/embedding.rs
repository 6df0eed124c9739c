//! Sentence vectors: load precomputed per-document vector files (the
//! stand-in for an external neural encoder) or compute deterministic
//! hashing-based embeddings in process.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Document;
use crate::error::{Error, Result};
use crate::rng::SplitMix64;
use crate::textproc::tokenize;

/// Where sentence vectors come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EncoderKind {
    /// Read `<vec_dir>/<doc_id>.vec` files written by an external encoder.
    ExternalFile,
    /// Signed feature hashing of token unigrams and bigrams.
    BuiltinHash,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EncoderSpec {
    pub kind: EncoderKind,
    pub dim: usize,
    pub seed: u64,
}

/// Default dimensionality of the builtin encoder.
pub const BUILTIN_DIM: usize = 256;

/// Sentence vectors for a set of documents, all of one dimensionality.
#[derive(Debug, Clone)]
pub struct VectorSet {
    dim: usize,
    docs: BTreeMap<String, Vec<Vec<f64>>>,
    /// Sentences that produced no tokens (zero vectors) during encoding.
    pub empty_sentences: usize,
}

impl VectorSet {
    pub fn new(dim: usize) -> VectorSet {
        VectorSet {
            dim,
            docs: BTreeMap::new(),
            empty_sentences: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn insert(&mut self, doc_id: String, vectors: Vec<Vec<f64>>) -> Result<()> {
        for v in &vectors {
            if v.len() != self.dim {
                return Err(Error::Input(format!(
                    "dimension mismatch: doc {doc_id} has a vector of dim {}, expected {}",
                    v.len(),
                    self.dim
                )));
            }
        }
        self.docs.insert(doc_id, vectors);
        Ok(())
    }

    pub fn get(&self, doc_id: &str) -> Option<&[Vec<f64>]> {
        self.docs.get(doc_id).map(Vec::as_slice)
    }

    /// (doc_id, vectors) in doc_id order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &[Vec<f64>])> {
        self.docs.iter().map(|(id, v)| (id.as_str(), v.as_slice()))
    }
}

/// Load one vector file per document from `vec_dir`.
///
/// File format: a `<n_sentences> <dim>` header line, then one line of
/// space-separated decimals per sentence, in sentence order. The per-file
/// sentence count must match the document and the dimension must be uniform
/// across files.
pub fn load_vectors(vec_dir: &Path, documents: &[Document]) -> Result<VectorSet> {
    let mut set: Option<VectorSet> = None;
    let mut first_doc = String::new();
    for doc in documents {
        let path = vec_dir.join(format!("{}.vec", doc.doc_id));
        if !path.is_file() {
            return Err(Error::Input(format!(
                "vector file not found for doc {}: {}",
                doc.doc_id,
                path.display()
            )));
        }
        let (n, dim, vectors) = read_vector_file(&path)?;
        if n != doc.sentences.len() {
            return Err(Error::Input(format!(
                "sentence count mismatch for doc {}: file has {n} vectors, document has {} sentences",
                doc.doc_id,
                doc.sentences.len()
            )));
        }
        match &mut set {
            None => {
                let mut s = VectorSet::new(dim);
                s.insert(doc.doc_id.clone(), vectors)?;
                first_doc = doc.doc_id.clone();
                set = Some(s);
            }
            Some(s) => {
                if dim != s.dim() {
                    return Err(Error::Input(format!(
                        "dimension mismatch: doc {first_doc} has dim {}, doc {} has dim {dim}",
                        s.dim(),
                        doc.doc_id
                    )));
                }
                s.insert(doc.doc_id.clone(), vectors)?;
            }
        }
    }
    set.ok_or_else(|| Error::Input("no documents to load vectors for".into()))
}

fn read_vector_file(path: &Path) -> Result<(usize, usize, Vec<Vec<f64>>)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Input(format!("{}: empty vector file", path.display())))?;
    let mut parts = header.split_whitespace();
    let parse_field = |s: Option<&str>| -> Result<usize> {
        s.and_then(|v| v.parse().ok()).ok_or_else(|| {
            Error::Input(format!("{}: malformed header {header:?}", path.display()))
        })
    };
    let n = parse_field(parts.next())?;
    let dim = parse_field(parts.next())?;
    if dim == 0 {
        return Err(Error::Input(format!("{}: zero dimension", path.display())));
    }

    let mut vectors = Vec::with_capacity(n);
    for (i, line) in lines.enumerate().take(n) {
        let mut vector = Vec::with_capacity(dim);
        for value in line.split_whitespace() {
            let x: f64 = value.parse().map_err(|_| {
                Error::Input(format!("{}: bad value {value:?} on line {}", path.display(), i + 2))
            })?;
            if !x.is_finite() {
                return Err(Error::Input(format!(
                    "{}: non-finite value on line {}",
                    path.display(),
                    i + 2
                )));
            }
            vector.push(x);
        }
        if vector.len() != dim {
            return Err(Error::Input(format!(
                "{}: line {} has {} values, expected {dim}",
                path.display(),
                i + 2,
                vector.len()
            )));
        }
        vectors.push(vector);
    }
    if vectors.len() != n {
        return Err(Error::Input(format!(
            "{}: header promises {n} vectors, file has {}",
            path.display(),
            vectors.len()
        )));
    }
    Ok((n, dim, vectors))
}

/// Write one `.vec` file per document, 9 significant digits per value.
pub fn save_vectors(vec_dir: &Path, set: &VectorSet) -> Result<()> {
    fs::create_dir_all(vec_dir).map_err(|e| Error::io(vec_dir, e))?;
    for (doc_id, vectors) in set.iter() {
        let mut out = String::new();
        writeln!(out, "{} {}", vectors.len(), set.dim()).expect("string write");
        for vector in vectors {
            let mut first = true;
            for value in vector {
                if !first {
                    out.push(' ');
                }
                first = false;
                write!(out, "{value:.8e}").expect("string write");
            }
            out.push('\n');
        }
        let path = vec_dir.join(format!("{doc_id}.vec"));
        fs::write(&path, out).map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

/// Deterministic sentence embedding: signed feature hashing of token
/// unigrams and bigrams into `dim` buckets, L2-normalized.
///
/// A sentence with no tokens maps to the zero vector. Identical input, seed,
/// and dim always produce bit-identical vectors.
pub fn builtin_encode(sentence: &str, spec: &EncoderSpec) -> Vec<f64> {
    let tokens = tokenize(sentence);
    let mut vector = vec![0.0f64; spec.dim];
    let mut add = |feature: &str| {
        let mixed = SplitMix64::new(fnv1a64(feature.as_bytes()) ^ spec.seed).next_u64();
        let bucket = (((mixed >> 1) as u128 * spec.dim as u128) >> 63) as usize;
        let sign = if mixed & 1 == 0 { 1.0 } else { -1.0 };
        vector[bucket] += sign;
    };
    for token in &tokens {
        add(token);
    }
    for pair in tokens.windows(2) {
        add(&format!("{} {}", pair[0], pair[1]));
    }
    let norm = vector.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        for x in &mut vector {
            *x /= norm;
        }
    }
    vector
}

/// FNV-1a 64-bit hash.
fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Encode every sentence of every document with the builtin encoder.
pub fn encode_corpus(documents: &[Document], spec: &EncoderSpec) -> Result<VectorSet> {
    if spec.kind != EncoderKind::BuiltinHash {
        return Err(Error::Config(
            "encode_corpus requires the builtin encoder; external vectors are loaded from files"
                .into(),
        ));
    }
    if spec.dim == 0 {
        return Err(Error::Config("encoder dim must be at least 1".into()));
    }
    let encoded: Vec<(String, Vec<Vec<f64>>, usize)> = documents
        .par_iter()
        .map(|doc| {
            let vectors: Vec<Vec<f64>> = doc
                .sentences
                .iter()
                .map(|s| builtin_encode(s, spec))
                .collect();
            let empties = vectors
                .iter()
                .filter(|v| v.iter().all(|&x| x == 0.0))
                .count();
            (doc.doc_id.clone(), vectors, empties)
        })
        .collect();

    let mut set = VectorSet::new(spec.dim);
    for (doc_id, vectors, empties) in encoded {
        set.empty_sentences += empties;
        set.insert(doc_id, vectors)?;
    }
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn doc(id: &str, sentences: &[&str]) -> Document {
        Document {
            doc_id: id.to_string(),
            title: String::new(),
            sentences: sentences.iter().map(|s| s.to_string()).collect(),
            source_tag: String::new(),
        }
    }

    fn spec(dim: usize, seed: u64) -> EncoderSpec {
        EncoderSpec {
            kind: EncoderKind::BuiltinHash,
            dim,
            seed,
        }
    }

    #[test]
    fn load_happy_path() {
        let tmp = tempfile::tempdir().unwrap();
        let mut body = String::from("2 3\n");
        body.push_str("1.0 2.0 3.0\n-1.0 0.5 0.25\n");
        fs::write(tmp.path().join("d1.vec"), body).unwrap();
        let docs = [doc("d1", &["One.", "Two."])];
        let set = load_vectors(tmp.path(), &docs).unwrap();
        assert_eq!(set.dim(), 3);
        assert_eq!(set.get("d1").unwrap().len(), 2);
        assert_eq!(set.get("d1").unwrap()[1], vec![-1.0, 0.5, 0.25]);
    }

    #[test]
    fn sentence_count_mismatch_is_an_error() {
        let tmp = tempfile::tempdir().unwrap();
        fs::write(tmp.path().join("d1.vec"), "1 2\n0.0 0.0\n").unwrap();
        let docs = [doc("d1", &["One.", "Two."])];
        let err = load_vectors(tmp.path(), &docs).unwrap_err();
        assert!(err.to_string().contains("sentence count mismatch"), "{err}");
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let tmp = tempfile::tempdir().unwrap();
        fs::write(tmp.path().join("a.vec"), "1 2\n0.0 0.0\n").unwrap();
        fs::write(tmp.path().join("b.vec"), "1 3\n0.0 0.0 0.0\n").unwrap();
        let docs = [doc("a", &["One."]), doc("b", &["One."])];
        let err = load_vectors(tmp.path(), &docs).unwrap_err();
        assert!(err.to_string().contains("dimension mismatch"), "{err}");
    }

    #[test]
    fn builtin_is_deterministic() {
        let s = spec(64, 7);
        let a = builtin_encode("The quick brown fox.", &s);
        let b = builtin_encode("The quick brown fox.", &s);
        assert_eq!(a, b);
        // A different seed changes the embedding.
        let c = builtin_encode("The quick brown fox.", &spec(64, 8));
        assert_ne!(a, c);
    }

    #[test]
    fn builtin_is_bigram_order_sensitive() {
        let s = spec(64, 7);
        assert_ne!(builtin_encode("a b", &s), builtin_encode("b a", &s));
    }

    #[test]
    fn builtin_norm_is_one() {
        let s = spec(128, 3);
        for text in ["Tokens here.", "k-means 300", "x"] {
            let v = builtin_encode(text, &s);
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-6, "norm {norm} for {text:?}");
        }
    }

    #[test]
    fn builtin_empty_sentence_is_zero_vector() {
        let v = builtin_encode("...!!!", &spec(32, 1));
        assert!(v.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn encode_corpus_is_reproducible_and_flags_empties() {
        let docs = [doc("a", &["Alpha beta.", "---"]), doc("b", &["Gamma."])];
        let s = spec(32, 5);
        let first = encode_corpus(&docs, &s).unwrap();
        let second = encode_corpus(&docs, &s).unwrap();
        assert_eq!(first.empty_sentences, 1);
        for (id, vectors) in first.iter() {
            assert_eq!(second.get(id).unwrap(), vectors);
        }
    }

    proptest! {
        #[test]
        fn save_load_round_trip(values in proptest::collection::vec(-1e6f64..1e6, 1..12)) {
            let tmp = tempfile::tempdir().unwrap();
            let dim = values.len();
            let mut set = VectorSet::new(dim);
            set.insert("d1".into(), vec![values.clone()]).unwrap();
            save_vectors(tmp.path(), &set).unwrap();
            let docs = [doc("d1", &["One."])];
            let loaded = load_vectors(tmp.path(), &docs).unwrap();
            let got = &loaded.get("d1").unwrap()[0];
            for (a, b) in values.iter().zip(got) {
                // 9 significant digits of text precision.
                prop_assert!((a - b).abs() <= a.abs().max(1e-300) * 5e-9);
            }
        }
    }
}
