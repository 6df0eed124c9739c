//! Keyphrase baseline: match curated phrases in a document's opening window.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::corpus::Document;
use crate::error::{Error, Result};
use crate::roles::{Role, RoleSet};

/// Per-role phrase lists. Phrases are stored lowercase and matched
/// case-insensitively at word boundaries.
#[derive(Debug, Clone)]
pub struct KeyphraseRules {
    rules: Vec<(Role, Vec<String>)>,
}

impl KeyphraseRules {
    /// The curated defaults: software-manual phrases and "tutorial".
    pub fn defaults() -> KeyphraseRules {
        KeyphraseRules {
            rules: vec![
                (
                    Role::SoftwareManual,
                    vec![
                        "software manual".to_string(),
                        "manual".to_string(),
                        "technical manual".to_string(),
                    ],
                ),
                (Role::Tutorial, vec!["tutorial".to_string()]),
            ],
        }
    }

    /// Load rules from a JSON object mapping role names to phrase arrays.
    pub fn from_json_file(path: &Path) -> Result<KeyphraseRules> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let raw: BTreeMap<String, Vec<String>> = serde_json::from_str(&text)
            .map_err(|e| Error::Input(format!("{}: invalid keyphrase file: {e}", path.display())))?;
        let mut rules = Vec::new();
        for (name, phrases) in raw {
            let role = Role::parse(&name)
                .map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
            let mut cleaned = Vec::new();
            for phrase in phrases {
                let lowered = phrase.trim().to_lowercase();
                if lowered.is_empty() {
                    return Err(Error::Input(format!(
                        "{}: empty phrase for role {name}",
                        path.display()
                    )));
                }
                cleaned.push(lowered);
            }
            rules.push((role, cleaned));
        }
        rules.sort_by_key(|(role, _)| role.index());
        Ok(KeyphraseRules { rules })
    }

    pub fn roles(&self) -> impl Iterator<Item = Role> + '_ {
        self.rules.iter().map(|(r, _)| *r)
    }
}

/// Predict roles by phrase presence in the title or the first four body
/// sentences (the title counts as the first of five).
pub fn keyphrase_predict(rules: &KeyphraseRules, doc: &Document) -> RoleSet {
    let mut window: Vec<String> = Vec::with_capacity(5);
    window.push(doc.title.to_lowercase());
    for sentence in doc.sentences.iter().take(4) {
        window.push(sentence.to_lowercase());
    }

    let mut predicted = RoleSet::new();
    for (role, phrases) in &rules.rules {
        let hit = phrases
            .iter()
            .any(|phrase| window.iter().any(|text| contains_word_bounded(text, phrase)));
        if hit {
            predicted.insert(*role);
        }
    }
    predicted
}

/// Substring match where both ends fall on word boundaries, so "manual" does
/// not match "manually". Both arguments must already be lowercase.
fn contains_word_bounded(text: &str, phrase: &str) -> bool {
    for (start, _) in text.match_indices(phrase) {
        let before_ok = text[..start]
            .chars()
            .next_back()
            .map_or(true, |c| !c.is_alphanumeric());
        let after_ok = text[start + phrase.len()..]
            .chars()
            .next()
            .map_or(true, |c| !c.is_alphanumeric());
        if before_ok && after_ok {
            return true;
        }
    }
    false
}
