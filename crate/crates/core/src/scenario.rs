//! Scenario files and trace rendering.
//!
//! A scenario file looks like this:
//!
//! ```text
//! # comment
//! states: NoHeat, Heat
//! initial: Heat
//! selector: cyclic
//! steps:
//! <silence>
//! I go to grandma now
//! ```
//!
//! The three headers may come in any order but must all precede `steps:`.
//! Every non-blank line after `steps:` is one utterance; `<silence>` is the
//! empty utterance. Lines whose first non-blank character is `#` are
//! comments everywhere; on header lines a `#` also ends the value.

use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::engine::{EngineError, History, HistoryEntry, Session, StepReport};
use crate::selector::{SelectorRegistry, SelectorSpec};
use crate::semantics::{ActionSpace, Lexicon, SemanticsError, State, Utterance};

pub const SILENCE_TOKEN: &str = "<silence>";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("missing `{0}:` header")]
    MissingHeader(&'static str),
    #[error("duplicate `{0}:` header")]
    DuplicateHeader(&'static str),
    #[error("expected a header, got `{0}`")]
    UnexpectedLine(String),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("duplicate state label `{0}`")]
    DuplicateState(String),
    #[error("invalid states: {0}")]
    InvalidStates(SemanticsError),
    #[error("unknown selector kind `{0}`")]
    UnknownSelector(String),
    #[error("invalid selector: {0}")]
    InvalidSelector(String),
    #[error("invalid utterance: {0}")]
    InvalidUtterance(SemanticsError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind} at line {line}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EmitError {
    #[error("utterance `{0}` cannot be written as a scenario step")]
    Utterance(String),
    #[error("state label `{0}` cannot be written in a states header")]
    StateLabel(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    pub space: ActionSpace,
    pub initial: State,
    pub selector: SelectorSpec,
    pub utterances: Vec<Utterance>,
}

/// Parses with the built-in selector kinds.
pub fn parse_scenario(text: &str) -> Result<Scenario, ParseError> {
    parse_scenario_with(text, &SelectorRegistry::with_builtins())
}

pub fn parse_scenario_with(text: &str, registry: &SelectorRegistry) -> Result<Scenario, ParseError> {
    let mut states: Option<(usize, String)> = None;
    let mut initial: Option<(usize, String)> = None;
    let mut selector: Option<(usize, String)> = None;
    let mut steps_line: Option<usize> = None;
    let mut utterances = Vec::new();
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if steps_line.is_some() {
            let u = if trimmed == SILENCE_TOKEN {
                Utterance::silence()
            } else {
                Utterance::new(trimmed).map_err(|e| ParseError {
                    line,
                    kind: ParseErrorKind::InvalidUtterance(e),
                })?
            };
            utterances.push(u);
            continue;
        }
        let value_part = trimmed.split('#').next().unwrap_or("").trim();
        let Some((key, value)) = value_part.split_once(':') else {
            return Err(ParseError {
                line,
                kind: ParseErrorKind::UnexpectedLine(trimmed.to_string()),
            });
        };
        let value = value.trim().to_string();
        let (slot, name) = match key.trim() {
            "states" => (&mut states, "states"),
            "initial" => (&mut initial, "initial"),
            "selector" => (&mut selector, "selector"),
            "steps" => {
                if !value.is_empty() {
                    return Err(ParseError {
                        line,
                        kind: ParseErrorKind::UnexpectedLine(trimmed.to_string()),
                    });
                }
                steps_line = Some(line);
                continue;
            }
            _ => {
                return Err(ParseError {
                    line,
                    kind: ParseErrorKind::UnexpectedLine(trimmed.to_string()),
                })
            }
        };
        if slot.is_some() {
            return Err(ParseError {
                line,
                kind: ParseErrorKind::DuplicateHeader(name),
            });
        }
        *slot = Some((line, value));
    }

    let eof = last_line.max(1);
    let missing = |name| ParseError {
        line: steps_line.unwrap_or(eof),
        kind: ParseErrorKind::MissingHeader(name),
    };
    let (states_line, states) = states.ok_or_else(|| missing("states"))?;
    let (initial_line, initial) = initial.ok_or_else(|| missing("initial"))?;
    let (selector_line, selector) = selector.ok_or_else(|| missing("selector"))?;
    if steps_line.is_none() {
        return Err(ParseError {
            line: eof,
            kind: ParseErrorKind::MissingHeader("steps"),
        });
    }

    let labels: Vec<&str> = states.split(',').map(str::trim).collect();
    let space = ActionSpace::new(&labels).map_err(|e| ParseError {
        line: states_line,
        kind: match e {
            SemanticsError::DuplicateState(s) => ParseErrorKind::DuplicateState(s),
            other => ParseErrorKind::InvalidStates(other),
        },
    })?;
    let initial = space.state(&initial).map_err(|_| ParseError {
        line: initial_line,
        kind: ParseErrorKind::UnknownState(initial.clone()),
    })?;
    let selector: SelectorSpec = selector.parse().map_err(|e: crate::selector::SelectorError| ParseError {
        line: selector_line,
        kind: ParseErrorKind::InvalidSelector(e.to_string()),
    })?;
    if !registry.contains(&selector.kind) {
        return Err(ParseError {
            line: selector_line,
            kind: ParseErrorKind::UnknownSelector(selector.kind),
        });
    }
    registry.build(&selector, &space).map_err(|e| ParseError {
        line: selector_line,
        kind: ParseErrorKind::InvalidSelector(e.to_string()),
    })?;

    Ok(Scenario {
        space,
        initial,
        selector,
        utterances,
    })
}

impl Scenario {
    /// Renders the scenario in the file format accepted by [`parse_scenario`].
    pub fn to_text(&self) -> Result<String, EmitError> {
        for label in self.space.labels() {
            if label.contains([',', '#']) {
                return Err(EmitError::StateLabel(label.clone()));
            }
        }
        let mut out = String::new();
        let _ = writeln!(out, "states: {}", self.space.labels().join(", "));
        let _ = writeln!(out, "initial: {}", self.space.label(self.initial));
        let _ = writeln!(out, "selector: {}", self.selector);
        out.push_str("steps:\n");
        for u in &self.utterances {
            if u.is_silence() {
                out.push_str(SILENCE_TOKEN);
            } else if u.as_str() == SILENCE_TOKEN || u.as_str().starts_with('#') {
                return Err(EmitError::Utterance(u.as_str().to_string()));
            } else {
                out.push_str(u.as_str());
            }
            out.push('\n');
        }
        Ok(out)
    }
}

/// Result of replaying a scenario.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub space: ActionSpace,
    pub reports: Vec<StepReport>,
    pub lexicon: Lexicon,
    pub history: History,
    pub final_state: State,
}

pub fn replay(scenario: &Scenario) -> Result<Trace, EngineError> {
    replay_with(scenario, &SelectorRegistry::with_builtins())
}

pub fn replay_with(scenario: &Scenario, registry: &SelectorRegistry) -> Result<Trace, EngineError> {
    let mut session = Session::from_spec(
        scenario.space.clone(),
        scenario.initial,
        &scenario.selector,
        registry,
    )?;
    let reports = scenario
        .utterances
        .iter()
        .map(|u| session.step(u.clone()))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Trace {
        space: scenario.space.clone(),
        reports,
        lexicon: session.lexicon().clone(),
        history: session.history().clone(),
        final_state: session.current(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceStyle {
    Table,
    Records,
}

impl std::str::FromStr for TraceStyle {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "table" => Ok(TraceStyle::Table),
            "records" => Ok(TraceStyle::Records),
            other => Err(format!("unknown trace format `{other}` (expected table or records)")),
        }
    }
}

impl fmt::Display for TraceStyle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TraceStyle::Table => "table",
            TraceStyle::Records => "records",
        })
    }
}

pub fn format_trace(trace: &Trace, style: TraceStyle) -> String {
    match style {
        TraceStyle::Records => format_records(&trace.space, trace.history.entries()),
        TraceStyle::Table => format_table(&trace.space, trace.history.entries()),
    }
}

pub const RECORDS_HEADER: &str = "t\tk\tutterance\tantecedent\tconsequent\trule";

pub fn utterance_token(u: &Utterance) -> &str {
    if u.is_silence() {
        SILENCE_TOKEN
    } else {
        u.as_str()
    }
}

/// Tab-separated records, one line per history entry, LF-terminated.
pub fn format_records(space: &ActionSpace, entries: &[HistoryEntry]) -> String {
    let mut out = String::from(RECORDS_HEADER);
    out.push('\n');
    for e in entries {
        out.push_str(&format_record(space, e));
        out.push('\n');
    }
    out
}

pub fn format_record(space: &ActionSpace, e: &HistoryEntry) -> String {
    format!(
        "{}\t{}\t{}\t{}\t{}\t{}",
        e.t,
        e.k.map(|k| k.to_string()).unwrap_or_default(),
        utterance_token(&e.utterance),
        space.label(e.pair.antecedent),
        space.label(e.pair.consequent),
        e.rule
    )
}

/// Aligned table with columns k, t, a, b, c, UMP, rule. Revision rows leave
/// k, a, b and c blank.
pub fn format_table(space: &ActionSpace, entries: &[HistoryEntry]) -> String {
    let header = ["k", "t", "a", "b", "c", "UMP", "rule"].map(String::from);
    let mut rows = vec![header];
    for e in entries {
        let ump = format!(
            "({}, {{({}, {})}})",
            utterance_token(&e.utterance),
            space.label(e.pair.antecedent),
            space.label(e.pair.consequent)
        );
        let revision = e.k.is_none();
        let blank_unless = |s: String| if revision { String::new() } else { s };
        rows.push([
            e.k.map(|k| k.to_string()).unwrap_or_default(),
            e.t.to_string(),
            blank_unless(space.label(e.pair.antecedent).to_string()),
            blank_unless(utterance_token(&e.utterance).to_string()),
            blank_unless(space.label(e.pair.consequent).to_string()),
            ump,
            e.rule.to_string(),
        ]);
    }
    let mut widths = [0usize; 7];
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    for row in &rows {
        let mut line = String::new();
        for (i, (cell, w)) in row.iter().zip(widths).enumerate() {
            if i > 0 {
                line.push_str("  ");
            }
            // Numeric columns right-aligned.
            if i < 2 {
                let _ = write!(line, "{cell:>w$}");
            } else {
                let _ = write!(line, "{cell:<w$}");
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::RuleLabel;
    use proptest::prelude::*;

    const S1: &str = "\
# two-state
states: NoHeat, Heat
initial: Heat
selector: cyclic
steps:
<silence>
I go to grandma now

<silence>
";

    #[test]
    fn parses_basic_file() {
        let sc = parse_scenario(S1).unwrap();
        assert_eq!(sc.space.labels(), ["NoHeat", "Heat"]);
        assert_eq!(sc.space.label(sc.initial), "Heat");
        assert_eq!(sc.selector, SelectorSpec::cyclic());
        assert_eq!(sc.utterances.len(), 3);
        assert!(sc.utterances[0].is_silence());
        assert_eq!(sc.utterances[1].as_str(), "I go to grandma now");
    }

    #[test]
    fn unknown_initial_reports_line() {
        let err = parse_scenario("states: NoHeat, Heat\ninitial: S\nselector: cyclic\nsteps:\n").unwrap_err();
        assert_eq!(err.line, 2);
        assert_eq!(err.kind, ParseErrorKind::UnknownState("S".into()));
        assert_eq!(err.to_string(), "unknown state `S` at line 2");
    }

    #[test]
    fn empty_steps_section_is_valid() {
        let sc = parse_scenario("states: a, b\ninitial: a\nselector: random 3\nsteps:\n").unwrap();
        assert!(sc.utterances.is_empty());
        let trace = replay(&sc).unwrap();
        assert!(trace.reports.is_empty());
        assert!(trace.lexicon.is_empty());
        assert_eq!(format_trace(&trace, TraceStyle::Records), format!("{RECORDS_HEADER}\n"));
        assert_eq!(format_trace(&trace, TraceStyle::Table).lines().count(), 1);
    }

    #[test]
    fn diagnostics() {
        let cases: &[(&str, usize, ParseErrorKind)] = &[
            ("initial: a\nselector: cyclic\nsteps:\n", 3, ParseErrorKind::MissingHeader("states")),
            ("states: a, b\ninitial: a\nselector: cyclic\n", 3, ParseErrorKind::MissingHeader("steps")),
            ("states: a, b\ninitial: a\nselector: mdp\nsteps:\n", 3, ParseErrorKind::UnknownSelector("mdp".into())),
            ("states: a, a\ninitial: a\nselector: cyclic\nsteps:\n", 1, ParseErrorKind::DuplicateState("a".into())),
            ("states: a, b\nstates: a, b\n", 2, ParseErrorKind::DuplicateHeader("states")),
            ("hello\n", 1, ParseErrorKind::UnexpectedLine("hello".into())),
        ];
        for (text, line, kind) in cases {
            let err = parse_scenario(text).unwrap_err();
            assert_eq!((&err.line, &err.kind), (line, kind), "{text:?}");
        }
        let err = parse_scenario("states: a, b\ninitial: a\nselector: random x\nsteps:\n").unwrap_err();
        assert_eq!(err.line, 3);
        assert!(matches!(err.kind, ParseErrorKind::InvalidSelector(_)));
    }

    #[test]
    fn header_comments_and_order() {
        let sc = parse_scenario(
            "selector: scripted b # only dissent once\ninitial: a\nstates: a, b # binary\nsteps:\n  # nothing yet\nhi\n",
        )
        .unwrap();
        assert_eq!(sc.selector, SelectorSpec::new("scripted", "b"));
        assert_eq!(sc.utterances, vec![Utterance::new("hi").unwrap()]);
    }

    #[test]
    fn table_blanks_revision_rows() {
        let sc = parse_scenario(
            "states: NoHeat, Heat\ninitial: Heat\nselector: cyclic\nsteps:\n<silence>\ngrandma\n<silence>\ngrandma\nno!\n",
        )
        .unwrap();
        let trace = replay(&sc).unwrap();
        assert_eq!(trace.history.get(5).unwrap().rule, RuleLabel::R3);
        let table = format_trace(&trace, TraceStyle::Table);
        let row5 = table.lines().nth(6).unwrap();
        let cells: Vec<&str> = row5.split("  ").filter(|c| !c.trim().is_empty()).map(str::trim).collect();
        assert_eq!(cells, ["5", "(grandma, {(NoHeat, NoHeat)})", "R3"]);
    }

    #[test]
    fn emit_refuses_ambiguous_utterances() {
        let mut sc = parse_scenario(S1).unwrap();
        sc.utterances.push(Utterance::new("#tag").unwrap());
        assert_eq!(sc.to_text().unwrap_err(), EmitError::Utterance("#tag".into()));
    }

    fn arb_scenario() -> impl Strategy<Value = Scenario> {
        let word = "[a-zA-Z!?' ]{0,12}";
        (
            prop::collection::hash_set("[A-Za-z][A-Za-z0-9]{0,5}", 2..6),
            any::<prop::sample::Index>(),
            prop_oneof![
                Just(SelectorSpec::cyclic()),
                any::<u64>().prop_map(SelectorSpec::random),
            ],
            prop::collection::vec(word, 0..20),
        )
            .prop_map(|(labels, init, selector, words)| {
                let labels: Vec<String> = labels.into_iter().collect();
                let space = ActionSpace::new(&labels).unwrap();
                let initial = space.state_at(init.index(labels.len())).unwrap();
                let utterances = words.iter().map(|w| Utterance::new(w).unwrap()).collect();
                Scenario {
                    space,
                    initial,
                    selector,
                    utterances,
                }
            })
    }

    proptest! {
        #[test]
        fn emit_then_parse_round_trips(sc in arb_scenario()) {
            let text = sc.to_text().unwrap();
            prop_assert_eq!(parse_scenario(&text).unwrap(), sc);
        }

        #[test]
        fn records_have_one_line_per_entry(sc in arb_scenario()) {
            let trace = replay(&sc).unwrap();
            let records = format_trace(&trace, TraceStyle::Records);
            prop_assert_eq!(records.lines().count(), trace.history.len() + 1);
            let concatenated: Vec<HistoryEntry> =
                trace.reports.iter().flat_map(|r| r.appended.iter().cloned()).collect();
            prop_assert_eq!(concatenated.as_slice(), trace.history.entries());
        }
    }
}
