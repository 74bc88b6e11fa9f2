//! The learning loop.
//!
//! A [`Session`] holds the action space, the lexicon, the append-only
//! [`History`] and the current epistemic state. Each call to
//! [`Session::step`] interprets one utterance:
//!
//! | rule    | utterance known | pair for current state | silent | effect                       |
//! |---------|-----------------|------------------------|--------|------------------------------|
//! | `R1a`   | no              | -                      | yes    | learn `(a, a)`               |
//! | `R1b`   | no              | -                      | no     | learn `(a, c)`, `c` selected |
//! | `R2a`   | yes             | yes                    | -      | apply the stored transition  |
//! | `R2bi`  | yes             | no                     | yes    | extend with `(a, a)`         |
//! | `R2bii` | yes             | no                     | no     | extend with `(a, c)`         |
//!
//! Whenever the resulting transition is not a fixed point, every pair touched
//! since the most recently accepted state is rewritten to the new consequent
//! and logged as `R3`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::selector::{ConsequentSelector, SelectorError, SelectorRegistry, SelectorSpec};
use crate::semantics::{AcPair, ActionSpace, Lexicon, Meaning, SemanticsError, State, Utterance};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
    #[error(transparent)]
    Selector(#[from] SelectorError),
    #[error("selector `{kind}` returned invalid consequent for `{current}`")]
    InvalidSelection { kind: &'static str, current: String },
    #[error("initial state index {0} is not part of the action space")]
    InitialOutsideSpace(usize),
    #[error("lexicon entry `{0}` does not fit the action space")]
    LexiconOutsideSpace(String),
    #[error("lexicon entry `{0}` maps one antecedent to two consequents")]
    UnsoundLexicon(String),
    #[error("silence must only hold fixed-point pairs, found ({0}, {1})")]
    SilenceNotIdentity(String, String),
    #[error("revision trigger at t={0} is missing or a fixed point")]
    InvalidRevisionTrigger(usize),
    #[error("internal inconsistency: {0}")]
    Inconsistent(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RuleLabel {
    /// Unknown silence: agree.
    R1a,
    /// Unknown utterance: disagree.
    R1b,
    /// Known utterance with a pair for the current state: apply.
    R2a,
    /// Known silence without a pair for the current state: agree.
    R2bi,
    /// Known utterance without a pair for the current state: disagree.
    R2bii,
    /// Revision of an earlier pair.
    R3,
}

impl RuleLabel {
    pub const ALL: [RuleLabel; 6] = [
        RuleLabel::R1a,
        RuleLabel::R1b,
        RuleLabel::R2a,
        RuleLabel::R2bi,
        RuleLabel::R2bii,
        RuleLabel::R3,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RuleLabel::R1a => "R1a",
            RuleLabel::R1b => "R1b",
            RuleLabel::R2a => "R2a",
            RuleLabel::R2bi => "R2bi",
            RuleLabel::R2bii => "R2bii",
            RuleLabel::R3 => "R3",
        }
    }
}

impl fmt::Display for RuleLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RuleLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RuleLabel::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| format!("unknown rule label `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HistoryEntry {
    pub t: usize,
    /// Iteration that wrote the entry; `None` for revisions.
    pub k: Option<usize>,
    pub utterance: Utterance,
    pub pair: AcPair,
    pub rule: RuleLabel,
}

/// Append-only log of learned, applied and revised pairs. Entry `t` sits at
/// position `t`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct History {
    entries: Vec<HistoryEntry>,
}

impl History {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[HistoryEntry] {
        &self.entries
    }

    pub fn get(&self, t: usize) -> Option<&HistoryEntry> {
        self.entries.get(t)
    }

    /// Largest written time index.
    pub fn tau(&self) -> Option<usize> {
        self.entries.len().checked_sub(1)
    }

    fn append(&mut self, k: Option<usize>, utterance: Utterance, pair: AcPair, rule: RuleLabel) -> HistoryEntry {
        let entry = HistoryEntry {
            t: self.entries.len(),
            k,
            utterance,
            pair,
            rule,
        };
        self.entries.push(entry.clone());
        entry
    }
}

/// Time index of the most recently accepted state at or before `t0`: the
/// latest non-revision entry whose pair is a fixed point. `None` means no
/// such entry exists, and the revision range then starts at the beginning.
pub fn mras(history: &History, t0: usize) -> Option<usize> {
    let end = (t0 + 1).min(history.len());
    history.entries[..end]
        .iter()
        .rposition(|e| e.rule != RuleLabel::R3 && e.pair.is_fixed_point())
}

/// Pair of the latest history entry for `utterance` at or before `before`.
pub fn last_update(history: &History, utterance: &Utterance, before: usize) -> Option<AcPair> {
    let end = (before + 1).min(history.len());
    history.entries[..end]
        .iter()
        .rev()
        .find(|e| &e.utterance == utterance)
        .map(|e| e.pair)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexiconChange {
    pub utterance: Utterance,
    /// Pair being replaced; `None` when a new pair was added.
    pub old: Option<AcPair>,
    pub new: AcPair,
}

/// Everything one call to [`Session::step`] did.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepReport {
    pub k: usize,
    pub utterance: Utterance,
    pub antecedent: State,
    pub consequent: State,
    pub fired_rule: RuleLabel,
    /// The primary entry followed by any `R3` entries, in append order.
    pub appended: Vec<HistoryEntry>,
    pub lexicon_changes: Vec<LexiconChange>,
}

impl StepReport {
    pub fn revisions(&self) -> &[HistoryEntry] {
        &self.appended[1..]
    }
}

pub struct Session {
    space: ActionSpace,
    lexicon: Lexicon,
    history: History,
    initial: State,
    current: State,
    selector: Box<dyn ConsequentSelector>,
    k: usize,
}

impl fmt::Debug for Session {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Session")
            .field("space", &self.space)
            .field("current", &self.current)
            .field("k", &self.k)
            .field("selector", &self.selector.kind())
            .field("lexicon", &self.lexicon)
            .field("history", &self.history.len())
            .finish()
    }
}

impl Session {
    pub fn new(
        space: ActionSpace,
        initial: State,
        selector: Box<dyn ConsequentSelector>,
    ) -> Result<Self, EngineError> {
        Self::with_lexicon(space, initial, selector, Lexicon::new())
    }

    /// Builds the selector from `spec` via `registry`.
    pub fn from_spec(
        space: ActionSpace,
        initial: State,
        spec: &SelectorSpec,
        registry: &SelectorRegistry,
    ) -> Result<Self, EngineError> {
        let selector = registry.build(spec, &space)?;
        Self::new(space, initial, selector)
    }

    /// Resumes from a pre-trained lexicon with an empty history.
    pub fn with_lexicon(
        space: ActionSpace,
        initial: State,
        selector: Box<dyn ConsequentSelector>,
        lexicon: Lexicon,
    ) -> Result<Self, EngineError> {
        if !space.contains(initial) {
            return Err(EngineError::InitialOutsideSpace(initial.index()));
        }
        for (u, m) in lexicon.iter() {
            let fits = m
                .pairs()
                .iter()
                .all(|p| space.contains(p.antecedent) && space.contains(p.consequent));
            if !fits {
                return Err(EngineError::LexiconOutsideSpace(u.to_string()));
            }
            if !m.is_functional() {
                return Err(EngineError::UnsoundLexicon(u.to_string()));
            }
            if u.is_silence() {
                if let Some(p) = m.pairs().iter().find(|p| !p.is_fixed_point()) {
                    return Err(EngineError::SilenceNotIdentity(
                        space.label(p.antecedent).to_string(),
                        space.label(p.consequent).to_string(),
                    ));
                }
            }
        }
        Ok(Self {
            space,
            lexicon,
            history: History::new(),
            initial,
            current: initial,
            selector,
            k: 0,
        })
    }

    pub fn space(&self) -> &ActionSpace {
        &self.space
    }

    pub fn lexicon(&self) -> &Lexicon {
        &self.lexicon
    }

    pub fn history(&self) -> &History {
        &self.history
    }

    pub fn initial(&self) -> State {
        self.initial
    }

    pub fn current(&self) -> State {
        self.current
    }

    pub fn iteration(&self) -> usize {
        self.k
    }

    pub fn selector_kind(&self) -> &'static str {
        self.selector.kind()
    }

    /// Normalizes `text` and steps with it.
    pub fn step_text(&mut self, text: &str) -> Result<StepReport, EngineError> {
        let u = Utterance::new(text)?;
        self.step(u)
    }

    pub fn step(&mut self, u: Utterance) -> Result<StepReport, EngineError> {
        let a = self.current;
        let known = self.lexicon.get(&u).cloned();
        let (c, rule) = match known.as_ref().and_then(|m| m.apply(a)) {
            Some(c) => (c, RuleLabel::R2a),
            None => {
                let c = if u.is_silence() { a } else { self.dissent(a)? };
                let rule = match (known.is_some(), u.is_silence()) {
                    (false, true) => RuleLabel::R1a,
                    (false, false) => RuleLabel::R1b,
                    (true, true) => RuleLabel::R2bi,
                    (true, false) => RuleLabel::R2bii,
                };
                (c, rule)
            }
        };

        let pair = AcPair::new(a, c);
        let mut lexicon_changes = Vec::new();
        if rule != RuleLabel::R2a {
            let meaning = known.unwrap_or_else(Meaning::new).extend(pair, &self.space)?;
            self.lexicon.insert(u.clone(), meaning);
            lexicon_changes.push(LexiconChange {
                utterance: u.clone(),
                old: None,
                new: pair,
            });
        }

        let k = self.k;
        let primary = self.history.append(Some(k), u.clone(), pair, rule);
        let tau = primary.t;
        let mut appended = vec![primary];
        if c != a {
            for (entry, stale) in self.revise_tracked(tau, c)? {
                lexicon_changes.push(LexiconChange {
                    utterance: entry.utterance.clone(),
                    old: Some(AcPair::new(entry.pair.antecedent, stale)),
                    new: entry.pair,
                });
                appended.push(entry);
            }
        }

        self.current = c;
        self.k += 1;
        Ok(StepReport {
            k,
            utterance: u,
            antecedent: a,
            consequent: c,
            fired_rule: rule,
            appended,
            lexicon_changes,
        })
    }

    fn dissent(&mut self, a: State) -> Result<State, EngineError> {
        let c = self.selector.select(&self.space, a)?;
        if c == a || !self.space.contains(c) {
            return Err(EngineError::InvalidSelection {
                kind: self.selector.kind(),
                current: self.space.label(a).to_string(),
            });
        }
        Ok(c)
    }

    /// Rewrites every pair touched after the most recently accepted state so
    /// that its antecedent maps to `target`.
    ///
    /// Pairs are grouped by (utterance, antecedent) and processed in order of
    /// their latest occurrence. Pairs already mapping to `target` are left
    /// alone. Returns the appended `R3` entries.
    pub fn revise(&mut self, tau: usize, target: State) -> Result<Vec<HistoryEntry>, EngineError> {
        Ok(self.revise_tracked(tau, target)?.into_iter().map(|(e, _)| e).collect())
    }

    /// Like [`Session::revise`], also returning each overwritten consequent.
    fn revise_tracked(
        &mut self,
        tau: usize,
        target: State,
    ) -> Result<Vec<(HistoryEntry, State)>, EngineError> {
        match self.history.get(tau) {
            Some(e) if !e.pair.is_fixed_point() => {}
            _ => return Err(EngineError::InvalidRevisionTrigger(tau)),
        }
        let start = mras(&self.history, tau).map_or(0, |s| s + 1);

        let mut latest: HashMap<(Utterance, State), usize> = HashMap::new();
        for e in &self.history.entries[start..=tau] {
            latest.insert((e.utterance.clone(), e.pair.antecedent), e.t);
        }
        let mut keys: Vec<((Utterance, State), usize)> = latest.into_iter().collect();
        keys.sort_by_key(|(_, q)| *q);

        let mut out = Vec::new();
        for ((u, antecedent), _) in keys {
            let meaning = self.lexicon.get(&u).ok_or_else(|| {
                EngineError::Inconsistent(format!("utterance `{u}` missing from lexicon"))
            })?;
            let current = meaning.apply(antecedent).ok_or_else(|| {
                EngineError::Inconsistent(format!(
                    "`{u}` lost antecedent `{}`",
                    self.space.label(antecedent)
                ))
            })?;
            if current == target {
                continue;
            }
            let revised = meaning.revise(antecedent, target, &self.space)?;
            self.lexicon.insert(u.clone(), revised);
            let entry = self.history.append(None, u, AcPair::new(antecedent, target), RuleLabel::R3);
            out.push((entry, current));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::selector::Cyclic;

    const GRANDMA: &str = "I go to grandma now";

    fn session(labels: &[&str], initial: &str) -> Session {
        let space = ActionSpace::new(labels).unwrap();
        let initial = space.state(initial).unwrap();
        Session::new(space, initial, Box::new(Cyclic)).unwrap()
    }

    fn run(s: &mut Session, utterances: &[&str]) -> Vec<StepReport> {
        utterances.iter().map(|u| s.step_text(u).unwrap()).collect()
    }

    fn pair(s: &Session, a: &str, c: &str) -> AcPair {
        AcPair::new(s.space().state(a).unwrap(), s.space().state(c).unwrap())
    }

    #[test]
    fn first_steps_of_two_state_scenario() {
        let mut s = session(&["NoHeat", "Heat"], "Heat");
        let r0 = s.step(Utterance::silence()).unwrap();
        assert_eq!(r0.fired_rule, RuleLabel::R1a);
        assert_eq!(r0.appended.len(), 1);
        assert_eq!(r0.appended[0].pair, pair(&s, "Heat", "Heat"));

        let r1 = s.step_text(GRANDMA).unwrap();
        assert_eq!(r1.fired_rule, RuleLabel::R1b);
        assert_eq!(r1.appended.len(), 1);
        assert_eq!(r1.appended[0].pair, pair(&s, "Heat", "NoHeat"));
        assert_eq!(s.space().label(s.current()), "NoHeat");
    }

    #[test]
    fn dissent_triggers_single_revision() {
        let mut s = session(&["NoHeat", "Heat"], "Heat");
        run(&mut s, &["", GRANDMA, "", GRANDMA]);
        let r = s.step_text("no!").unwrap();
        assert_eq!(r.k, 4);
        assert_eq!(r.fired_rule, RuleLabel::R1b);
        let got: Vec<_> = r.appended.iter().map(|e| (e.t, e.utterance.as_str().to_string(), e.pair, e.rule)).collect();
        assert_eq!(
            got,
            vec![
                (4, "no!".to_string(), pair(&s, "Heat", "NoHeat"), RuleLabel::R1b),
                (5, GRANDMA.to_string(), pair(&s, "NoHeat", "NoHeat"), RuleLabel::R3),
            ]
        );
        assert_eq!(
            r.lexicon_changes[1],
            LexiconChange {
                utterance: Utterance::new(GRANDMA).unwrap(),
                old: Some(pair(&s, "NoHeat", "Heat")),
                new: pair(&s, "NoHeat", "NoHeat"),
            }
        );
    }

    #[test]
    fn three_state_double_revision() {
        let mut s = session(&["NoHeat", "Semi", "Heat"], "Heat");
        run(&mut s, &["", GRANDMA, "", GRANDMA, "no!"]);
        assert_eq!(mras(s.history(), 6), Some(2));
        let r = s.step_text("no!").unwrap();
        assert_eq!(r.fired_rule, RuleLabel::R2bii);
        let got: Vec<_> = r.appended.iter().map(|e| (e.t, e.utterance.as_str().to_string(), e.pair, e.rule)).collect();
        assert_eq!(
            got,
            vec![
                (6, "no!".to_string(), pair(&s, "Heat", "NoHeat"), RuleLabel::R2bii),
                (7, "no!".to_string(), pair(&s, "Semi", "NoHeat"), RuleLabel::R3),
                (8, GRANDMA.to_string(), pair(&s, "NoHeat", "NoHeat"), RuleLabel::R3),
            ]
        );
        assert_eq!(mras(s.history(), 6), Some(2));
    }

    #[test]
    fn mras_and_last_update_on_three_state_history() {
        let mut s = session(&["NoHeat", "Semi", "Heat"], "Heat");
        run(
            &mut s,
            &["", GRANDMA, "", GRANDMA, "no!", "no!", "", "heat!", GRANDMA, GRANDMA],
        );
        let h = s.history();
        assert_eq!(h.len(), 16);
        assert_eq!(mras(h, 6), Some(2));
        assert_eq!(mras(h, 13), Some(9));
        let no = Utterance::new("no!").unwrap();
        let heat = Utterance::new("heat!").unwrap();
        assert_eq!(last_update(h, &no, 5), Some(pair(&s, "Semi", "Heat")));
        assert_eq!(last_update(h, &heat, 12), Some(pair(&s, "NoHeat", "Heat")));
        assert_eq!(last_update(h, &Utterance::new("hello").unwrap(), 15), None);
        assert_eq!(mras(&History::new(), 0), None);
    }

    #[test]
    fn revision_order_follows_latest_occurrence() {
        let mut s = session(&["NoHeat", "Semi", "Heat"], "Heat");
        run(&mut s, &["", GRANDMA, "", GRANDMA, "no!", "no!", "", "heat!", GRANDMA]);
        let r = s.step_text(GRANDMA).unwrap();
        let revs: Vec<_> = r.revisions().iter().map(|e| (e.t, e.utterance.as_str().to_string(), e.pair)).collect();
        assert_eq!(
            revs,
            vec![
                (14, GRANDMA.to_string(), pair(&s, "Semi", "NoHeat")),
                (15, "heat!".to_string(), pair(&s, "NoHeat", "NoHeat")),
            ]
        );
    }

    #[test]
    fn no_revision_right_after_acceptance() {
        let mut s = session(&["NoHeat", "Heat"], "Heat");
        s.step(Utterance::silence()).unwrap();
        let before = s.lexicon().clone();
        let r = s.step_text("heat!").unwrap();
        assert!(r.revisions().is_empty());
        assert_eq!(s.revise(1, s.current()).unwrap(), vec![]);
        assert_eq!(s.lexicon().len(), before.len() + 1);
    }

    #[test]
    fn revise_rejects_fixed_point_trigger() {
        let mut s = session(&["NoHeat", "Heat"], "Heat");
        s.step(Utterance::silence()).unwrap();
        let h = s.space().state("Heat").unwrap();
        assert_eq!(s.revise(0, h).unwrap_err(), EngineError::InvalidRevisionTrigger(0));
        assert_eq!(s.revise(9, h).unwrap_err(), EngineError::InvalidRevisionTrigger(9));
    }

    #[test]
    fn without_accepted_state_range_covers_whole_history() {
        // No silence at all: nothing is ever accepted, so entry 0 is revisable.
        let mut s = session(&["NoHeat", "Heat"], "Heat");
        run(&mut s, &["heat!"]);
        let r = s.step_text("off").unwrap();
        assert_eq!(mras(s.history(), 1), None);
        assert_eq!(r.revisions().len(), 1);
        assert_eq!(r.revisions()[0].utterance.as_str(), "heat!");
        assert_eq!(r.revisions()[0].pair, pair(&s, "Heat", "Heat"));
    }

    #[test]
    fn session_construction_errors() {
        let space = ActionSpace::new(["NoHeat", "Heat"]).unwrap();
        let big = ActionSpace::new(["a", "b", "c"]).unwrap();
        let err = Session::new(space.clone(), big.state("c").unwrap(), Box::new(Cyclic)).unwrap_err();
        assert_eq!(err, EngineError::InitialOutsideSpace(2));

        let nh = space.state("NoHeat").unwrap();
        let h = space.state("Heat").unwrap();
        let bad_silence = Lexicon::new().upsert(
            Utterance::silence(),
            Meaning::from_pairs([AcPair::new(h, nh)], &space).unwrap(),
        );
        let err = Session::with_lexicon(space.clone(), h, Box::new(Cyclic), bad_silence).unwrap_err();
        assert_eq!(err, EngineError::SilenceNotIdentity("Heat".into(), "NoHeat".into()));

        let foreign = Lexicon::new().upsert(
            Utterance::new("x").unwrap(),
            Meaning::from_pairs([AcPair::new(big.state("c").unwrap(), big.state("a").unwrap())], &big).unwrap(),
        );
        let err = Session::with_lexicon(space, h, Box::new(Cyclic), foreign).unwrap_err();
        assert_eq!(err, EngineError::LexiconOutsideSpace("x".into()));
    }

    #[test]
    fn selector_failure_leaves_session_untouched() {
        let space = ActionSpace::new(["NoHeat", "Heat"]).unwrap();
        let h = space.state("Heat").unwrap();
        let reg = SelectorRegistry::with_builtins();
        let mut s = Session::from_spec(space, h, &SelectorSpec::scripted(["NoHeat"]), &reg).unwrap();
        s.step_text("off").unwrap();
        s.step_text("").unwrap();
        let lexicon = s.lexicon().clone();
        let err = s.step_text("on").unwrap_err();
        assert_eq!(err, EngineError::Selector(SelectorError::Exhausted(1)));
        assert_eq!(s.lexicon(), &lexicon);
        assert_eq!(s.history().len(), 2);
        assert_eq!(s.iteration(), 2);
    }

    #[test]
    fn control_characters_are_rejected() {
        let mut s = session(&["NoHeat", "Heat"], "Heat");
        assert!(matches!(
            s.step_text("he\u{1b}at"),
            Err(EngineError::Semantics(SemanticsError::ControlCharacter(_)))
        ));
        assert!(s.history().is_empty());
    }

    #[test]
    fn rule_labels_round_trip() {
        for r in RuleLabel::ALL {
            assert_eq!(r.as_str().parse::<RuleLabel>().unwrap(), r);
        }
        assert!("R4".parse::<RuleLabel>().is_err());
    }
}
