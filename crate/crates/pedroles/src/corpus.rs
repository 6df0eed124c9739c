//! Corpus ingestion, majority-label resolution, and corpus statistics.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roles::{Role, RoleSet};
use crate::textproc::split_sentences;

/// Subset id marking the internally annotated supplementary set. Its records
/// carry a single annotator and bypass majority voting.
pub const INTERNAL_SUBSET: &str = "internal";

/// One corpus text: id, title, and the ordered sentences of its body.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: String,
    pub title: String,
    pub sentences: Vec<String>,
    pub source_tag: String,
}

/// One annotator's role selection for one document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub doc_id: String,
    pub annotator_id: String,
    pub subset_id: String,
    pub roles: RoleSet,
}

/// Loaded documents plus their raw annotation records.
#[derive(Debug, Clone)]
pub struct RawCorpus {
    /// Sorted by doc_id.
    pub documents: Vec<Document>,
    /// In file order.
    pub records: Vec<AnnotationRecord>,
}

impl RawCorpus {
    pub fn document(&self, doc_id: &str) -> Option<&Document> {
        self.documents
            .binary_search_by(|d| d.doc_id.as_str().cmp(doc_id))
            .ok()
            .map(|i| &self.documents[i])
    }
}

/// A document with its resolved ground-truth roles.
#[derive(Debug, Clone)]
pub struct LabeledDoc {
    pub doc: Document,
    pub roles: RoleSet,
    /// Distinct annotators behind the resolution (1 for the internal set).
    pub n_annotators: usize,
}

/// Resolved corpus: every retained document has at least one role.
#[derive(Debug, Clone, Default)]
pub struct LabeledCorpus {
    /// Sorted by doc_id.
    pub docs: Vec<LabeledDoc>,
    /// Documents dropped because no role reached the majority threshold.
    pub filtered_out: usize,
    /// Loaded documents that carried no annotation records.
    pub unannotated: usize,
}

impl LabeledCorpus {
    pub fn get(&self, doc_id: &str) -> Option<&LabeledDoc> {
        self.docs
            .binary_search_by(|d| d.doc.doc_id.as_str().cmp(doc_id))
            .ok()
            .map(|i| &self.docs[i])
    }

    pub fn truth_map(&self) -> BTreeMap<String, RoleSet> {
        self.docs
            .iter()
            .map(|d| (d.doc.doc_id.clone(), d.roles))
            .collect()
    }
}

#[derive(Deserialize)]
struct RawRecordLine {
    doc_id: String,
    annotator_id: String,
    subset_id: String,
    roles: Vec<String>,
}

/// Load documents from `doc_dir` (one `<doc_id>.txt` per document, first line
/// is the title) and newline-delimited JSON annotation records.
///
/// Every record must reference a loaded document; documents whose body yields
/// no sentences are rejected.
pub fn load_corpus(doc_dir: &Path, annotations_file: &Path) -> Result<RawCorpus> {
    if !doc_dir.is_dir() {
        return Err(Error::Input(format!(
            "document directory not found: {}",
            doc_dir.display()
        )));
    }
    if !annotations_file.is_file() {
        return Err(Error::Input(format!(
            "annotations file not found: {}",
            annotations_file.display()
        )));
    }

    let mut documents = Vec::new();
    let entries = fs::read_dir(doc_dir).map_err(|e| Error::io(doc_dir, e))?;
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(doc_dir, e))?;
        let path = entry.path();
        if path.extension().and_then(|e| e.to_str()) != Some("txt") {
            continue;
        }
        let doc_id = path
            .file_stem()
            .and_then(|s| s.to_str())
            .ok_or_else(|| Error::Input(format!("non-UTF-8 file name: {}", path.display())))?
            .to_string();
        documents.push(load_document(&path, doc_id)?);
    }
    documents.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));

    let doc_ids: BTreeSet<&str> = documents.iter().map(|d| d.doc_id.as_str()).collect();
    let records = load_annotations(annotations_file, &doc_ids)?;
    Ok(RawCorpus { documents, records })
}

fn load_document(path: &Path, doc_id: String) -> Result<Document> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let text = text.strip_prefix('\u{feff}').unwrap_or(&text);
    let (title, body) = match text.split_once('\n') {
        Some((first, rest)) => (first.trim().to_string(), rest),
        None => (text.trim().to_string(), ""),
    };
    let sentences = split_sentences(body);
    if sentences.is_empty() {
        return Err(Error::Input(format!(
            "document {doc_id} has no sentences after the title line"
        )));
    }
    Ok(Document {
        doc_id,
        title,
        sentences,
        source_tag: String::new(),
    })
}

fn load_annotations(path: &Path, doc_ids: &BTreeSet<&str>) -> Result<Vec<AnnotationRecord>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut records = Vec::new();
    let mut seen: BTreeSet<(String, String)> = BTreeSet::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let raw: RawRecordLine = serde_json::from_str(line).map_err(|e| {
            Error::Input(format!(
                "{}:{}: invalid annotation record: {e}",
                path.display(),
                lineno + 1
            ))
        })?;
        let mut roles = RoleSet::new();
        for name in &raw.roles {
            roles.insert(Role::parse(name).map_err(|e| {
                Error::Input(format!("{}:{}: {e}", path.display(), lineno + 1))
            })?);
        }
        if roles.is_empty() {
            return Err(Error::Input(format!(
                "{}:{}: record for doc {} has an empty role set",
                path.display(),
                lineno + 1,
                raw.doc_id
            )));
        }
        if !doc_ids.contains(raw.doc_id.as_str()) {
            return Err(Error::Input(format!(
                "{}:{}: annotation references unknown doc_id {}",
                path.display(),
                lineno + 1,
                raw.doc_id
            )));
        }
        if !seen.insert((raw.doc_id.clone(), raw.annotator_id.clone())) {
            return Err(Error::Input(format!(
                "{}:{}: duplicate annotation for (doc {}, annotator {})",
                path.display(),
                lineno + 1,
                raw.doc_id,
                raw.annotator_id
            )));
        }
        records.push(AnnotationRecord {
            doc_id: raw.doc_id,
            annotator_id: raw.annotator_id,
            subset_id: raw.subset_id,
            roles,
        });
    }
    Ok(records)
}

/// Outcome of majority resolution for one document.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MajorityOutcome {
    Resolved(RoleSet),
    /// No role reached the threshold; the document is dropped.
    Filtered,
}

/// Keep the roles marked by at least `ceil((n+1)/2)` of `n_annotators`
/// (2 of 3 for the triple-annotated set; everything passes for n = 1).
pub fn resolve_majority(
    records: &[AnnotationRecord],
    n_annotators: usize,
) -> Result<MajorityOutcome> {
    let first = records
        .first()
        .ok_or_else(|| Error::Input("resolve_majority called with zero records".into()))?;
    if records.iter().any(|r| r.doc_id != first.doc_id) {
        return Err(Error::Input(format!(
            "resolve_majority got records for multiple documents (doc {})",
            first.doc_id
        )));
    }
    if n_annotators == 0 {
        return Err(Error::Config("n_annotators must be positive".into()));
    }
    let threshold = n_annotators / 2 + 1;
    let mut majority = RoleSet::new();
    for role in Role::ALL {
        let votes = records.iter().filter(|r| r.roles.contains(role)).count();
        if votes >= threshold {
            majority.insert(role);
        }
    }
    if majority.is_empty() {
        Ok(MajorityOutcome::Filtered)
    } else {
        Ok(MajorityOutcome::Resolved(majority))
    }
}

/// Resolve ground-truth labels for every annotated document of a raw corpus.
pub fn resolve_labels(raw: &RawCorpus) -> Result<LabeledCorpus> {
    let mut by_doc: BTreeMap<&str, Vec<&AnnotationRecord>> = BTreeMap::new();
    for record in &raw.records {
        by_doc.entry(record.doc_id.as_str()).or_default().push(record);
    }

    let mut corpus = LabeledCorpus::default();
    for doc in &raw.documents {
        let Some(records) = by_doc.get(doc.doc_id.as_str()) else {
            corpus.unannotated += 1;
            continue;
        };
        let annotators: BTreeSet<&str> =
            records.iter().map(|r| r.annotator_id.as_str()).collect();
        let owned: Vec<AnnotationRecord> = records.iter().map(|r| (*r).clone()).collect();
        match resolve_majority(&owned, annotators.len())? {
            MajorityOutcome::Resolved(roles) => corpus.docs.push(LabeledDoc {
                doc: doc.clone(),
                roles,
                n_annotators: annotators.len(),
            }),
            MajorityOutcome::Filtered => corpus.filtered_out += 1,
        }
    }
    Ok(corpus)
}

/// Corpus statistics: role counts, the roles-per-document histogram, and
/// multi-role combination counts.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct StatsReport {
    pub doc_count: usize,
    pub filtered_out: usize,
    pub role_annotation_total: usize,
    pub role_counts: BTreeMap<String, usize>,
    pub roles_per_doc_histogram: BTreeMap<usize, usize>,
    pub combination_counts: BTreeMap<String, usize>,
}

pub fn corpus_stats(corpus: &LabeledCorpus) -> StatsReport {
    let mut role_counts: BTreeMap<String, usize> = Role::ALL
        .into_iter()
        .map(|r| (r.name().to_string(), 0))
        .collect();
    let mut histogram: BTreeMap<usize, usize> = BTreeMap::new();
    let mut combinations: BTreeMap<String, usize> = BTreeMap::new();
    let mut total = 0;

    for labeled in &corpus.docs {
        let k = labeled.roles.len();
        total += k;
        *histogram.entry(k).or_insert(0) += 1;
        for role in labeled.roles.iter() {
            *role_counts.get_mut(role.name()).unwrap() += 1;
        }
        if k >= 2 {
            *combinations.entry(labeled.roles.label()).or_insert(0) += 1;
        }
    }

    StatsReport {
        doc_count: corpus.docs.len(),
        filtered_out: corpus.filtered_out,
        role_annotation_total: total,
        role_counts,
        roles_per_doc_histogram: histogram,
        combination_counts: combinations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::io::Write;

    pub(crate) fn record(
        doc_id: &str,
        annotator_id: &str,
        subset_id: &str,
        roles: &[Role],
    ) -> AnnotationRecord {
        AnnotationRecord {
            doc_id: doc_id.to_string(),
            annotator_id: annotator_id.to_string(),
            subset_id: subset_id.to_string(),
            roles: roles.iter().copied().collect(),
        }
    }

    fn write_fixture(dir: &Path, docs: &[(&str, &str)], annotations: &str) -> std::path::PathBuf {
        let docs_dir = dir.join("docs");
        fs::create_dir_all(&docs_dir).unwrap();
        for (id, text) in docs {
            fs::write(docs_dir.join(format!("{id}.txt")), text).unwrap();
        }
        let ann = dir.join("annotations.jsonl");
        let mut f = fs::File::create(&ann).unwrap();
        writeln!(f, "{}", annotations.trim()).unwrap();
        docs_dir
    }

    const DOC_TEXT: &str = "Some Title\nFirst sentence here. Second one follows.";

    fn ann_line(doc: &str, annotator: &str, subset: &str, roles: &[&str]) -> String {
        let roles = roles
            .iter()
            .map(|r| format!("{r:?}"))
            .collect::<Vec<_>>()
            .join(",");
        format!(
            r#"{{"doc_id":"{doc}","annotator_id":"{annotator}","subset_id":"{subset}","roles":[{roles}]}}"#
        )
    }

    #[test]
    fn loads_documents_and_records() {
        let tmp = tempfile::tempdir().unwrap();
        let mut lines = Vec::new();
        for doc in ["d1", "d2", "d3"] {
            for annotator in ["a1", "a2", "a3"] {
                lines.push(ann_line(doc, annotator, "s1", &["Tutorial"]));
            }
        }
        let docs_dir = write_fixture(
            tmp.path(),
            &[("d1", DOC_TEXT), ("d2", DOC_TEXT), ("d3", DOC_TEXT)],
            &lines.join("\n"),
        );
        let raw = load_corpus(&docs_dir, &tmp.path().join("annotations.jsonl")).unwrap();
        assert_eq!(raw.documents.len(), 3);
        assert_eq!(raw.records.len(), 9);
        assert_eq!(raw.document("d2").unwrap().title, "Some Title");
        assert_eq!(raw.document("d2").unwrap().sentences.len(), 2);
    }

    #[test]
    fn missing_document_is_an_error() {
        let tmp = tempfile::tempdir().unwrap();
        let docs_dir = write_fixture(
            tmp.path(),
            &[("d1", DOC_TEXT)],
            &ann_line("X7", "a1", "s1", &["Survey"]),
        );
        let err = load_corpus(&docs_dir, &tmp.path().join("annotations.jsonl")).unwrap_err();
        assert!(err.to_string().contains("unknown doc_id X7"), "{err}");
    }

    #[test]
    fn unknown_role_is_an_error() {
        let tmp = tempfile::tempdir().unwrap();
        let docs_dir = write_fixture(
            tmp.path(),
            &[("d1", DOC_TEXT)],
            r#"{"doc_id":"d1","annotator_id":"a1","subset_id":"s1","roles":["Sciencey"]}"#,
        );
        let err = load_corpus(&docs_dir, &tmp.path().join("annotations.jsonl")).unwrap_err();
        assert!(err.to_string().contains("unknown role name"), "{err}");
    }

    #[test]
    fn empty_body_document_is_rejected() {
        let tmp = tempfile::tempdir().unwrap();
        let docs_dir = write_fixture(
            tmp.path(),
            &[("d1", "Only a title\n   \n")],
            &ann_line("d1", "a1", "s1", &["Survey"]),
        );
        let err = load_corpus(&docs_dir, &tmp.path().join("annotations.jsonl")).unwrap_err();
        assert!(err.to_string().contains("no sentences"), "{err}");
    }

    #[test]
    fn duplicate_annotator_is_an_error() {
        let tmp = tempfile::tempdir().unwrap();
        let lines = [
            ann_line("d1", "a1", "s1", &["Survey"]),
            ann_line("d1", "a1", "s1", &["Tutorial"]),
        ];
        let docs_dir = write_fixture(tmp.path(), &[("d1", DOC_TEXT)], &lines.join("\n"));
        let err = load_corpus(&docs_dir, &tmp.path().join("annotations.jsonl")).unwrap_err();
        assert!(err.to_string().contains("duplicate annotation"), "{err}");
    }

    #[test]
    fn majority_keeps_two_of_three() {
        let records = [
            record("d", "a1", "s1", &[Role::Tutorial]),
            record("d", "a2", "s1", &[Role::Tutorial, Role::Resource]),
            record("d", "a3", "s1", &[Role::Tutorial]),
        ];
        let outcome = resolve_majority(&records, 3).unwrap();
        assert_eq!(
            outcome,
            MajorityOutcome::Resolved(RoleSet::singleton(Role::Tutorial))
        );
    }

    #[test]
    fn no_majority_is_filtered() {
        let records = [
            record("d", "a1", "s1", &[Role::Survey]),
            record("d", "a2", "s1", &[Role::Tutorial]),
            record("d", "a3", "s1", &[Role::Resource]),
        ];
        assert_eq!(resolve_majority(&records, 3).unwrap(), MajorityOutcome::Filtered);
    }

    #[test]
    fn single_annotator_passes_through() {
        let records = [record("d", "a1", INTERNAL_SUBSET, &[Role::Survey, Role::Resource])];
        let expected: RoleSet = [Role::Survey, Role::Resource].into_iter().collect();
        assert_eq!(
            resolve_majority(&records, 1).unwrap(),
            MajorityOutcome::Resolved(expected)
        );
    }

    #[test]
    fn zero_records_is_an_error() {
        assert!(resolve_majority(&[], 3).is_err());
    }

    #[test]
    fn stats_on_two_single_role_docs() {
        let corpus = LabeledCorpus {
            docs: vec![
                LabeledDoc {
                    doc: Document {
                        doc_id: "a".into(),
                        title: String::new(),
                        sentences: vec!["One.".into()],
                        source_tag: String::new(),
                    },
                    roles: RoleSet::singleton(Role::Other),
                    n_annotators: 3,
                },
                LabeledDoc {
                    doc: Document {
                        doc_id: "b".into(),
                        title: String::new(),
                        sentences: vec!["Two.".into()],
                        source_tag: String::new(),
                    },
                    roles: RoleSet::singleton(Role::Other),
                    n_annotators: 3,
                },
            ],
            filtered_out: 0,
            unannotated: 0,
        };
        let stats = corpus_stats(&corpus);
        assert_eq!(stats.role_counts["Other"], 2);
        assert_eq!(stats.roles_per_doc_histogram[&1], 2);
        assert_eq!(stats.role_annotation_total, 2);
        assert!(stats.combination_counts.is_empty());
    }

    #[test]
    fn stats_reload_is_byte_identical() {
        let tmp = tempfile::tempdir().unwrap();
        let mut lines = Vec::new();
        for (doc, roles) in [("d1", ["Survey", "Tutorial"]), ("d2", ["Other", "Other"])] {
            for (i, annotator) in ["a1", "a2", "a3"].iter().enumerate() {
                let role = roles[i % 2];
                lines.push(ann_line(doc, annotator, "s1", &[role]));
            }
        }
        let docs_dir = write_fixture(
            tmp.path(),
            &[("d1", DOC_TEXT), ("d2", DOC_TEXT)],
            &lines.join("\n"),
        );
        let ann = tmp.path().join("annotations.jsonl");
        let load = || {
            let raw = load_corpus(&docs_dir, &ann).unwrap();
            let labeled = resolve_labels(&raw).unwrap();
            serde_json::to_string(&corpus_stats(&labeled)).unwrap()
        };
        assert_eq!(load(), load());
    }

    fn arb_roleset() -> impl Strategy<Value = RoleSet> {
        (1u8..=127).prop_map(|bits| {
            Role::ALL
                .into_iter()
                .enumerate()
                .filter(|(i, _)| bits & (1 << i) != 0)
                .map(|(_, r)| r)
                .collect()
        })
    }

    proptest! {
        #[test]
        fn majority_is_order_independent(
            sets in proptest::collection::vec(arb_roleset(), 3),
            perm in Just([1usize, 2, 0])
        ) {
            let records: Vec<AnnotationRecord> = sets
                .iter()
                .enumerate()
                .map(|(i, s)| AnnotationRecord {
                    doc_id: "d".into(),
                    annotator_id: format!("a{i}"),
                    subset_id: "s1".into(),
                    roles: *s,
                })
                .collect();
            let shuffled: Vec<AnnotationRecord> =
                perm.iter().map(|&i| records[i].clone()).collect();
            prop_assert_eq!(
                resolve_majority(&records, 3).unwrap(),
                resolve_majority(&shuffled, 3).unwrap()
            );
        }

        #[test]
        fn role_counts_sum_to_roleset_sizes(
            sets in proptest::collection::vec(arb_roleset(), 1..20)
        ) {
            let corpus = LabeledCorpus {
                docs: sets
                    .iter()
                    .enumerate()
                    .map(|(i, s)| LabeledDoc {
                        doc: Document {
                            doc_id: format!("d{i}"),
                            title: String::new(),
                            sentences: vec!["X.".into()],
                            source_tag: String::new(),
                        },
                        roles: *s,
                        n_annotators: 3,
                    })
                    .collect(),
                filtered_out: 0,
                unannotated: 0,
            };
            let stats = corpus_stats(&corpus);
            let count_sum: usize = stats.role_counts.values().sum();
            let size_sum: usize = sets.iter().map(|s| s.len()).sum();
            prop_assert_eq!(count_sum, size_sum);
            prop_assert_eq!(count_sum, stats.role_annotation_total);
            let hist_sum: usize = stats.roles_per_doc_histogram.values().sum();
            prop_assert_eq!(hist_sum, sets.len());
        }
    }
}
