//! Request and response bodies.

use semiotics_core::persistence::{HistoryRecord, PairDocument};
use semiotics_core::{AcPair, ActionSpace, LexiconChange, StepReport};
use serde::{Deserialize, Serialize};

fn default_selector() -> String {
    "cyclic".to_string()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CreateSession {
    pub states: Vec<String>,
    pub initial: String,
    #[serde(default = "default_selector")]
    pub selector: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImportSession {
    pub lexicon: semiotics_core::persistence::LexiconDocument,
    pub initial: String,
    #[serde(default = "default_selector")]
    pub selector: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionCreated {
    pub session: String,
    pub state: String,
    pub states: Vec<String>,
    pub selector: String,
}

/// Exactly one of `text` (non-blank) or `silence: true`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct PostUtterance {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub silence: bool,
}

impl PostUtterance {
    pub fn text(text: impl Into<String>) -> Self {
        Self {
            text: Some(text.into()),
            silence: false,
        }
    }

    pub fn silence() -> Self {
        Self {
            text: None,
            silence: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChangeWire {
    pub utterance: String,
    pub old: Option<PairDocument>,
    pub new: PairDocument,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepResponse {
    pub session: String,
    pub k: usize,
    pub utterance: String,
    pub silence: bool,
    pub antecedent: String,
    pub consequent: String,
    pub rule: String,
    /// Primary entry first, then revisions.
    pub entries: Vec<HistoryRecord>,
    pub lexicon_changes: Vec<ChangeWire>,
    pub state: String,
}

fn pair_doc(p: AcPair, space: &ActionSpace) -> PairDocument {
    PairDocument {
        a: space.label(p.antecedent).to_string(),
        c: space.label(p.consequent).to_string(),
    }
}

impl StepResponse {
    pub fn from_report(session: &str, report: &StepReport, space: &ActionSpace) -> Self {
        let change = |c: &LexiconChange| ChangeWire {
            utterance: c.utterance.as_str().to_string(),
            old: c.old.map(|p| pair_doc(p, space)),
            new: pair_doc(c.new, space),
        };
        Self {
            session: session.to_string(),
            k: report.k,
            utterance: report.utterance.as_str().to_string(),
            silence: report.utterance.is_silence(),
            antecedent: space.label(report.antecedent).to_string(),
            consequent: space.label(report.consequent).to_string(),
            rule: report.fired_rule.to_string(),
            entries: report
                .appended
                .iter()
                .map(|e| HistoryRecord::from_entry(e, space))
                .collect(),
            lexicon_changes: report.lexicon_changes.iter().map(change).collect(),
            state: space.label(report.consequent).to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateResponse {
    pub session: String,
    pub state: String,
    pub states: Vec<String>,
    pub selector: String,
    /// Next iteration number.
    pub k: usize,
    /// Number of history entries written.
    pub t: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistoryResponse {
    pub session: String,
    pub entries: Vec<HistoryRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    pub message: String,
    #[serde(default)]
    pub retry: bool,
}
