//! Learning machine-relevant meanings of utterances.
//!
//! Meanings are partial functions over a finite space of epistemic states.
//! Silence confirms the current state, any other utterance is read as
//! dissent, and a run of unaccepted transitions is revised at once when the
//! user finally gets what they asked for.
//!
//! - [`semantics`]: action spaces, utterances, meanings, lexicons
//! - [`selector`]: named strategies for picking a consequent on dissent
//! - [`engine`]: the step loop, history, revision
//! - [`scenario`]: scenario files, replay, trace rendering
//! - [`persistence`]: JSON lexicon and history documents

pub mod engine;
pub mod persistence;
pub mod scenario;
pub mod selector;
pub mod semantics;

pub use engine::{mras, last_update, EngineError, History, HistoryEntry, LexiconChange, RuleLabel, Session, StepReport};
pub use persistence::{export_lexicon, import_lexicon, PersistenceError};
pub use scenario::{format_trace, parse_scenario, replay, ParseError, Scenario, Trace, TraceStyle};
pub use selector::{ConsequentSelector, SelectorError, SelectorRegistry, SelectorSpec};
pub use semantics::{AcPair, ActionSpace, Lexicon, Meaning, SemanticsError, State, Ump, Utterance};
