//! JSON documents for lexicons and histories.
//!
//! ```json
//! {
//!   "version": 1,
//!   "states": ["NoHeat", "Heat"],
//!   "entries": [
//!     { "utterance": "", "pairs": [ { "a": "Heat", "c": "Heat" } ] }
//!   ]
//! }
//! ```
//!
//! Silence is the empty utterance. Entries are sorted by utterance and each
//! pair list keeps the meaning's order, so equal lexicons export to
//! identical bytes.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{HistoryEntry, RuleLabel};
use crate::semantics::{AcPair, ActionSpace, Lexicon, Meaning, SemanticsError, Utterance};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PersistenceError {
    #[error("malformed document: {0}")]
    Malformed(String),
    #[error("unsupported document version {found} (expected {FORMAT_VERSION})")]
    Version { found: u32 },
    #[error("invalid states: {0}")]
    States(SemanticsError),
    #[error("unknown state `{state}` in entry `{utterance}`")]
    UnknownState { utterance: String, state: String },
    #[error("soundness violation: `{utterance}` maps antecedent `{antecedent}` twice")]
    DuplicateAntecedent { utterance: String, antecedent: String },
    #[error("utterance `{0}` appears in more than one entry")]
    DuplicateUtterance(String),
    #[error("invalid utterance `{utterance}`: {source}")]
    Utterance {
        utterance: String,
        source: SemanticsError,
    },
    #[error("history entry {index}: {reason}")]
    History { index: usize, reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairDocument {
    pub a: String,
    pub c: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntryDocument {
    pub utterance: String,
    pub pairs: Vec<PairDocument>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LexiconDocument {
    pub version: u32,
    pub states: Vec<String>,
    pub entries: Vec<EntryDocument>,
}

impl LexiconDocument {
    pub fn from_lexicon(lexicon: &Lexicon, space: &ActionSpace) -> Self {
        let entries = lexicon
            .iter()
            .map(|(u, m)| EntryDocument {
                utterance: u.as_str().to_string(),
                pairs: m
                    .pairs()
                    .iter()
                    .map(|p| PairDocument {
                        a: space.label(p.antecedent).to_string(),
                        c: space.label(p.consequent).to_string(),
                    })
                    .collect(),
            })
            .collect();
        Self {
            version: FORMAT_VERSION,
            states: space.labels().to_vec(),
            entries,
        }
    }

    /// Validates the document and rebuilds the lexicon.
    pub fn to_lexicon(&self) -> Result<(Lexicon, ActionSpace), PersistenceError> {
        if self.version != FORMAT_VERSION {
            return Err(PersistenceError::Version { found: self.version });
        }
        let space = ActionSpace::new(&self.states).map_err(PersistenceError::States)?;
        let mut lexicon = Lexicon::new();
        for entry in &self.entries {
            let utterance = Utterance::new(&entry.utterance).map_err(|source| {
                PersistenceError::Utterance {
                    utterance: entry.utterance.clone(),
                    source,
                }
            })?;
            let mut meaning = Meaning::new();
            for pair in &entry.pairs {
                let lookup = |label: &str| {
                    space.state(label).map_err(|_| PersistenceError::UnknownState {
                        utterance: entry.utterance.clone(),
                        state: label.to_string(),
                    })
                };
                let p = AcPair::new(lookup(&pair.a)?, lookup(&pair.c)?);
                meaning = meaning.extend(p, &space).map_err(|_| {
                    PersistenceError::DuplicateAntecedent {
                        utterance: entry.utterance.clone(),
                        antecedent: pair.a.clone(),
                    }
                })?;
            }
            if lexicon.insert(utterance, meaning).is_some() {
                return Err(PersistenceError::DuplicateUtterance(entry.utterance.clone()));
            }
        }
        Ok((lexicon, space))
    }
}

pub fn export_lexicon(lexicon: &Lexicon, space: &ActionSpace) -> String {
    to_json(&LexiconDocument::from_lexicon(lexicon, space))
}

pub fn import_lexicon(text: &str) -> Result<(Lexicon, ActionSpace), PersistenceError> {
    let doc: LexiconDocument =
        serde_json::from_str(text).map_err(|e| PersistenceError::Malformed(e.to_string()))?;
    doc.to_lexicon()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistoryRecord {
    pub t: usize,
    pub k: Option<usize>,
    pub utterance: String,
    pub a: String,
    pub c: String,
    pub rule: String,
}

impl HistoryRecord {
    pub fn from_entry(e: &HistoryEntry, space: &ActionSpace) -> Self {
        Self {
            t: e.t,
            k: e.k,
            utterance: e.utterance.as_str().to_string(),
            a: space.label(e.pair.antecedent).to_string(),
            c: space.label(e.pair.consequent).to_string(),
            rule: e.rule.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistoryDocument {
    pub version: u32,
    pub states: Vec<String>,
    pub entries: Vec<HistoryRecord>,
}

pub fn export_history(entries: &[HistoryEntry], space: &ActionSpace) -> String {
    to_json(&HistoryDocument {
        version: FORMAT_VERSION,
        states: space.labels().to_vec(),
        entries: entries.iter().map(|e| HistoryRecord::from_entry(e, space)).collect(),
    })
}

/// Parses a history document. Checks labels and time stamps; the entries are
/// for inspection and are not fed back into a session.
pub fn import_history(text: &str) -> Result<(Vec<HistoryEntry>, ActionSpace), PersistenceError> {
    let doc: HistoryDocument =
        serde_json::from_str(text).map_err(|e| PersistenceError::Malformed(e.to_string()))?;
    if doc.version != FORMAT_VERSION {
        return Err(PersistenceError::Version { found: doc.version });
    }
    let space = ActionSpace::new(&doc.states).map_err(PersistenceError::States)?;
    doc.entries
        .iter()
        .enumerate()
        .map(|(index, r)| {
            let bad = |reason: String| PersistenceError::History { index, reason };
            if r.t != index {
                return Err(bad(format!("time stamp {} out of sequence", r.t)));
            }
            let rule: RuleLabel = r.rule.parse().map_err(bad)?;
            if (rule == RuleLabel::R3) != r.k.is_none() {
                return Err(bad("iteration must be absent exactly on R3 entries".into()));
            }
            let utterance = Utterance::new(&r.utterance).map_err(|e| bad(e.to_string()))?;
            let a = space.state(&r.a).map_err(|e| bad(e.to_string()))?;
            let c = space.state(&r.c).map_err(|e| bad(e.to_string()))?;
            Ok(HistoryEntry {
                t: r.t,
                k: r.k,
                utterance,
                pair: AcPair::new(a, c),
                rule,
            })
        })
        .collect::<Result<Vec<_>, _>>()
        .map(|entries| (entries, space))
}

fn to_json<T: Serialize>(doc: &T) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("document types always serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{parse_scenario, replay};

    fn m1() -> (Lexicon, ActionSpace) {
        let space = ActionSpace::new(["NoHeat", "Heat"]).unwrap();
        let h = space.state("Heat").unwrap();
        let lex = Lexicon::new().upsert(
            Utterance::silence(),
            Meaning::from_pairs([AcPair::new(h, h)], &space).unwrap(),
        );
        (lex, space)
    }

    #[test]
    fn exports_single_entry() {
        let (lex, space) = m1();
        let text = export_lexicon(&lex, &space);
        let doc: LexiconDocument = serde_json::from_str(&text).unwrap();
        assert_eq!(doc.version, 1);
        assert_eq!(doc.states, ["NoHeat", "Heat"]);
        assert_eq!(
            doc.entries,
            vec![EntryDocument {
                utterance: String::new(),
                pairs: vec![PairDocument { a: "Heat".into(), c: "Heat".into() }],
            }]
        );
        assert!(text.ends_with("}\n"));
    }

    #[test]
    fn exports_empty_lexicon() {
        let (_, space) = m1();
        let doc: LexiconDocument = serde_json::from_str(&export_lexicon(&Lexicon::new(), &space)).unwrap();
        assert!(doc.entries.is_empty());
    }

    #[test]
    fn import_errors_are_distinct() {
        let dup = r#"{"version":1,"states":["NoHeat","Heat"],"entries":[{"utterance":"x","pairs":[{"a":"Heat","c":"NoHeat"},{"a":"Heat","c":"Heat"}]}]}"#;
        assert_eq!(
            import_lexicon(dup).unwrap_err(),
            PersistenceError::DuplicateAntecedent { utterance: "x".into(), antecedent: "Heat".into() }
        );
        let unknown = r#"{"version":1,"states":["NoHeat","Heat"],"entries":[{"utterance":"x","pairs":[{"a":"Semi","c":"Heat"}]}]}"#;
        assert_eq!(
            import_lexicon(unknown).unwrap_err(),
            PersistenceError::UnknownState { utterance: "x".into(), state: "Semi".into() }
        );
        let version = r#"{"version":2,"states":["NoHeat","Heat"],"entries":[]}"#;
        assert_eq!(import_lexicon(version).unwrap_err(), PersistenceError::Version { found: 2 });
        let twice = r#"{"version":1,"states":["a","b"],"entries":[{"utterance":"x","pairs":[]},{"utterance":" x","pairs":[]}]}"#;
        assert_eq!(import_lexicon(twice).unwrap_err(), PersistenceError::DuplicateUtterance(" x".into()));
        assert!(matches!(import_lexicon("{"), Err(PersistenceError::Malformed(_))));
        let one_state = r#"{"version":1,"states":["a"],"entries":[]}"#;
        assert!(matches!(import_lexicon(one_state), Err(PersistenceError::States(_))));
    }

    #[test]
    fn history_round_trip() {
        let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/scenario2.scn")).unwrap();
        let trace = replay(&parse_scenario(&text).unwrap()).unwrap();
        let doc = export_history(trace.history.entries(), &trace.space);
        let (entries, space) = import_history(&doc).unwrap();
        assert_eq!(space, trace.space);
        assert_eq!(entries.as_slice(), trace.history.entries());
    }

    #[test]
    fn history_import_checks_sequence() {
        let bad = r#"{"version":1,"states":["a","b"],"entries":[{"t":1,"k":0,"utterance":"","a":"a","c":"a","rule":"R1a"}]}"#;
        assert!(matches!(import_history(bad), Err(PersistenceError::History { index: 0, .. })));
        let bad = r#"{"version":1,"states":["a","b"],"entries":[{"t":0,"k":null,"utterance":"","a":"a","c":"a","rule":"R1a"}]}"#;
        assert!(matches!(import_history(bad), Err(PersistenceError::History { index: 0, .. })));
    }
}
