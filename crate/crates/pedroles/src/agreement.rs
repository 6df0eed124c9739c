//! Inter-annotator agreement: Fleiss' kappa averaged per annotation subset,
//! and the majority-vs-third-annotator confusion matrix.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::{resolve_majority, AnnotationRecord, MajorityOutcome, INTERNAL_SUBSET};
use crate::error::{Error, Result};
use crate::roles::{Role, RoleSet, ROLE_COUNT};

/// Fleiss' kappa over binary items plus a degeneracy flag.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct KappaResult {
    pub value: f64,
    /// True when expected chance agreement is 1 (zero variance across the
    /// table); the value is then 1.0 by convention.
    pub degenerate: bool,
}

/// Fleiss' kappa for binary ratings.
///
/// `positive_votes[i]` is the number of the `n_raters` raters who marked item
/// `i` positive. Items here are (document, role) pairs, which reduces the
/// multi-label annotation task to well-defined binary ratings.
pub fn fleiss_kappa(positive_votes: &[usize], n_raters: usize) -> Result<KappaResult> {
    if positive_votes.is_empty() {
        return Err(Error::Input("fleiss_kappa requires at least one item".into()));
    }
    if n_raters < 2 {
        return Err(Error::Config(format!(
            "fleiss_kappa requires at least 2 raters, got {n_raters}"
        )));
    }
    if let Some(bad) = positive_votes.iter().find(|&&v| v > n_raters) {
        return Err(Error::Input(format!(
            "item has {bad} positive votes but only {n_raters} raters"
        )));
    }

    let n = n_raters as f64;
    let n_items = positive_votes.len() as f64;

    // Per-item agreement P_i and the overall positive-category share.
    let mut p_bar = 0.0;
    let mut positive_total = 0usize;
    for &votes in positive_votes {
        let yes = votes as f64;
        let no = n - yes;
        p_bar += (yes * yes + no * no - n) / (n * (n - 1.0));
        positive_total += votes;
    }
    p_bar /= n_items;

    let p_yes = positive_total as f64 / (n_items * n);
    let p_no = 1.0 - p_yes;
    let p_expected = p_yes * p_yes + p_no * p_no;

    if (1.0 - p_expected).abs() < f64::EPSILON {
        // All ratings identical across the whole table.
        return Ok(KappaResult {
            value: 1.0,
            degenerate: true,
        });
    }
    Ok(KappaResult {
        value: (p_bar - p_expected) / (1.0 - p_expected),
        degenerate: false,
    })
}

/// Per-subset kappas and their unweighted mean.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AgreementReport {
    pub per_subset_kappa: BTreeMap<String, f64>,
    pub mean_kappa: f64,
    pub warnings: Vec<String>,
}

/// Average Fleiss' kappa over annotation subsets.
///
/// Records are grouped by `subset_id`; the internal supplementary set is
/// excluded. Within a subset, every document must carry the same number of
/// distinct annotators, and each (document, role) pair becomes one binary
/// item.
pub fn average_subset_kappa(records: &[AnnotationRecord]) -> Result<AgreementReport> {
    let mut subsets: BTreeMap<&str, BTreeMap<&str, Vec<&AnnotationRecord>>> = BTreeMap::new();
    for record in records {
        if record.subset_id == INTERNAL_SUBSET {
            continue;
        }
        subsets
            .entry(record.subset_id.as_str())
            .or_default()
            .entry(record.doc_id.as_str())
            .or_default()
            .push(record);
    }
    if subsets.is_empty() {
        return Err(Error::Input(
            "no non-internal annotation subsets to compute kappa over".into(),
        ));
    }

    let mut report = AgreementReport {
        per_subset_kappa: BTreeMap::new(),
        mean_kappa: 0.0,
        warnings: Vec::new(),
    };
    for (subset_id, docs) in &subsets {
        let n_raters = docs.values().next().map_or(0, |r| distinct_annotators(r));
        let mut items = Vec::with_capacity(docs.len() * ROLE_COUNT);
        for (doc_id, doc_records) in docs {
            let annotators = distinct_annotators(doc_records);
            if annotators != n_raters {
                return Err(Error::Input(format!(
                    "subset {subset_id}: document {doc_id} has {annotators} annotators, expected {n_raters}"
                )));
            }
            for role in Role::ALL {
                let votes = doc_records.iter().filter(|r| r.roles.contains(role)).count();
                items.push(votes);
            }
        }
        let kappa = fleiss_kappa(&items, n_raters)?;
        if kappa.degenerate {
            report
                .warnings
                .push(format!("subset {subset_id}: zero-variance table, kappa 1.0 by convention"));
        }
        report.per_subset_kappa.insert(subset_id.to_string(), kappa.value);
    }
    report.mean_kappa = report.per_subset_kappa.values().sum::<f64>()
        / report.per_subset_kappa.len() as f64;
    Ok(report)
}

fn distinct_annotators(records: &[&AnnotationRecord]) -> usize {
    let mut ids: Vec<&str> = records.iter().map(|r| r.annotator_id.as_str()).collect();
    ids.sort_unstable();
    ids.dedup();
    ids.len()
}

/// Majority-role rows versus the third annotator's columns, built only from
/// triple-annotated documents with exactly one majority role.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnnotatorConfusion {
    /// `counts[majority_role][annotated_role]`.
    pub counts: [[u64; ROLE_COUNT]; ROLE_COUNT],
    pub total_pairs: u64,
    pub docs_used: u64,
}

/// Build the annotator confusion matrix.
///
/// For each qualifying document, the "third annotator" is the one whose role
/// set differs most (largest symmetric difference) from the majority
/// singleton, ties broken by smallest annotator id; each of that annotator's
/// roles contributes one (majority, annotated) pair.
pub fn third_annotator_confusion(records: &[AnnotationRecord]) -> Result<AnnotatorConfusion> {
    let mut by_doc: BTreeMap<&str, Vec<&AnnotationRecord>> = BTreeMap::new();
    for record in records {
        by_doc.entry(record.doc_id.as_str()).or_default().push(record);
    }

    let mut confusion = AnnotatorConfusion {
        counts: [[0; ROLE_COUNT]; ROLE_COUNT],
        total_pairs: 0,
        docs_used: 0,
    };
    for doc_records in by_doc.values() {
        let mut per_annotator: BTreeMap<&str, RoleSet> = BTreeMap::new();
        for record in doc_records {
            let entry = per_annotator.entry(record.annotator_id.as_str()).or_default();
            *entry = entry.union(record.roles);
        }
        if per_annotator.len() != 3 {
            continue;
        }
        let owned: Vec<AnnotationRecord> = doc_records.iter().map(|r| (*r).clone()).collect();
        let MajorityOutcome::Resolved(majority) = resolve_majority(&owned, 3)? else {
            continue;
        };
        let Some(majority_role) = majority.as_singleton() else {
            continue;
        };
        let majority_set = RoleSet::singleton(majority_role);
        let third = per_annotator
            .iter()
            .max_by(|(id_a, set_a), (id_b, set_b)| {
                set_a
                    .symmetric_difference_len(majority_set)
                    .cmp(&set_b.symmetric_difference_len(majority_set))
                    // On equal difference prefer the smaller id, which wins a
                    // max_by when treated as greater.
                    .then_with(|| id_b.cmp(id_a))
            })
            .map(|(_, set)| *set)
            .expect("three annotators present");

        confusion.docs_used += 1;
        for role in third.iter() {
            confusion.counts[majority_role.index()][role.index()] += 1;
            confusion.total_pairs += 1;
        }
    }
    Ok(confusion)
}

impl AnnotatorConfusion {
    pub fn row_total(&self, row: usize) -> u64 {
        self.counts[row].iter().sum()
    }

    pub fn col_total(&self, col: usize) -> u64 {
        self.counts.iter().map(|row| row[col]).sum()
    }
}
