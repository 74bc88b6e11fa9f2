//! Domain types of dynamic semantics: action spaces, utterances, meanings and
//! the mental lexicon.
//!
//! A meaning is a partial function on the epistemic states of an
//! [`ActionSpace`], stored as an ordered list of antecedent-consequent pairs.
//! Insertion order is the total order of the pairs and is preserved by
//! revision.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error("action space needs at least 2 states, got {0}")]
    SpaceTooSmall(usize),
    #[error("duplicate state label `{0}`")]
    DuplicateState(String),
    #[error("empty state label")]
    EmptyState,
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("state index {0} is outside the action space")]
    StateOutOfRange(usize),
    #[error("meaning already maps antecedent `{0}`")]
    DuplicateAntecedent(String),
    #[error("meaning has no pair with antecedent `{0}`")]
    MissingAntecedent(String),
    #[error("utterance contains control character {0:?}")]
    ControlCharacter(char),
}

/// One element of an [`ActionSpace`], identified by its position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct State(usize);

impl State {
    pub fn index(self) -> usize {
        self.0
    }
}

/// The finite, ordered set of operation modes an agent can be in.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ActionSpace {
    labels: Vec<String>,
}

impl ActionSpace {
    pub fn new<I, S>(labels: I) -> Result<Self, SemanticsError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut out: Vec<String> = Vec::new();
        for label in labels {
            let label = label.as_ref().trim();
            if label.is_empty() {
                return Err(SemanticsError::EmptyState);
            }
            if out.iter().any(|l| l == label) {
                return Err(SemanticsError::DuplicateState(label.to_string()));
            }
            out.push(label.to_string());
        }
        if out.len() < 2 {
            return Err(SemanticsError::SpaceTooSmall(out.len()));
        }
        Ok(Self { labels: out })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn states(&self) -> impl Iterator<Item = State> + '_ {
        (0..self.labels.len()).map(State)
    }

    pub fn state(&self, label: &str) -> Result<State, SemanticsError> {
        let label = label.trim();
        self.labels
            .iter()
            .position(|l| l == label)
            .map(State)
            .ok_or_else(|| SemanticsError::UnknownState(label.to_string()))
    }

    pub fn state_at(&self, index: usize) -> Result<State, SemanticsError> {
        if index < self.labels.len() {
            Ok(State(index))
        } else {
            Err(SemanticsError::StateOutOfRange(index))
        }
    }

    pub fn contains(&self, state: State) -> bool {
        state.0 < self.labels.len()
    }

    /// Label of `state`. Panics if the state belongs to a larger space.
    pub fn label(&self, state: State) -> &str {
        &self.labels[state.0]
    }

    /// Cyclic successor in declaration order, wrapping at the end.
    pub fn successor(&self, state: State) -> State {
        State((state.0 + 1) % self.labels.len())
    }
}

/// A transcribed utterance. The empty text is silence.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Utterance(String);

impl Utterance {
    /// Trims surrounding whitespace; matching stays case-sensitive.
    pub fn new(text: &str) -> Result<Self, SemanticsError> {
        let text = text.trim();
        if let Some(c) = text.chars().find(|c| c.is_control()) {
            return Err(SemanticsError::ControlCharacter(c));
        }
        Ok(Self(text.to_string()))
    }

    pub fn silence() -> Self {
        Self(String::new())
    }

    pub fn is_silence(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Utterance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_silence() {
            f.write_str("ε")
        } else {
            f.write_str(&self.0)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AcPair {
    pub antecedent: State,
    pub consequent: State,
}

impl AcPair {
    pub fn new(antecedent: State, consequent: State) -> Self {
        Self {
            antecedent,
            consequent,
        }
    }

    pub fn is_fixed_point(&self) -> bool {
        self.antecedent == self.consequent
    }
}

/// Ordered, functional list of antecedent-consequent pairs.
///
/// No two pairs share an antecedent. The only ways to change a meaning are
/// [`Meaning::extend`] (appends a new maximum) and [`Meaning::revise`]
/// (replaces one consequent in place).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Meaning {
    pairs: Vec<AcPair>,
}

impl Meaning {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a meaning pair by pair, rejecting duplicate antecedents.
    pub fn from_pairs<I>(pairs: I, space: &ActionSpace) -> Result<Self, SemanticsError>
    where
        I: IntoIterator<Item = AcPair>,
    {
        let mut meaning = Self::new();
        for pair in pairs {
            for s in [pair.antecedent, pair.consequent] {
                if !space.contains(s) {
                    return Err(SemanticsError::StateOutOfRange(s.index()));
                }
            }
            meaning = meaning.extend(pair, space)?;
        }
        Ok(meaning)
    }

    pub fn pairs(&self) -> &[AcPair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// The pair added last, i.e. the maximum of the total order.
    pub fn max(&self) -> Option<AcPair> {
        self.pairs.last().copied()
    }

    pub fn apply(&self, a: State) -> Option<State> {
        self.pairs
            .iter()
            .find(|p| p.antecedent == a)
            .map(|p| p.consequent)
    }

    /// `a` is a fixed point of the meaning.
    pub fn accepts(&self, a: State) -> bool {
        self.apply(a) == Some(a)
    }

    pub fn contains(&self, pair: &AcPair) -> bool {
        self.pairs.contains(pair)
    }

    pub fn extend(&self, pair: AcPair, space: &ActionSpace) -> Result<Self, SemanticsError> {
        if self.apply(pair.antecedent).is_some() {
            return Err(SemanticsError::DuplicateAntecedent(
                space.label(pair.antecedent).to_string(),
            ));
        }
        let mut pairs = self.pairs.clone();
        pairs.push(pair);
        Ok(Self { pairs })
    }

    pub fn revise(
        &self,
        a: State,
        new_consequent: State,
        space: &ActionSpace,
    ) -> Result<Self, SemanticsError> {
        let pos = self
            .pairs
            .iter()
            .position(|p| p.antecedent == a)
            .ok_or_else(|| SemanticsError::MissingAntecedent(space.label(a).to_string()))?;
        let mut pairs = self.pairs.clone();
        pairs[pos].consequent = new_consequent;
        Ok(Self { pairs })
    }

    pub fn is_functional(&self) -> bool {
        self.pairs
            .iter()
            .enumerate()
            .all(|(i, p)| self.pairs[..i].iter().all(|q| q.antecedent != p.antecedent))
    }
}

/// An utterance together with its meaning.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ump {
    pub utterance: Utterance,
    pub meaning: Meaning,
}

/// The mental lexicon: at most one meaning per utterance.
///
/// Entries are kept sorted by utterance so iteration and serialization are
/// deterministic.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Lexicon {
    entries: BTreeMap<Utterance, Meaning>,
}

impl Lexicon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, u: &Utterance) -> Option<&Meaning> {
        self.entries.get(u)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Utterance, &Meaning)> {
        self.entries.iter()
    }

    pub fn umps(&self) -> impl Iterator<Item = Ump> + '_ {
        self.entries.iter().map(|(u, m)| Ump {
            utterance: u.clone(),
            meaning: m.clone(),
        })
    }

    pub fn contains_utterance(&self, u: &Utterance) -> bool {
        self.entries.contains_key(u)
    }

    pub fn contains_meaning(&self, m: &Meaning) -> bool {
        self.entries.values().any(|v| v == m)
    }

    pub fn contains_pair(&self, p: &AcPair) -> bool {
        self.entries.values().any(|v| v.contains(p))
    }

    pub fn upsert(&self, u: Utterance, m: Meaning) -> Self {
        let mut next = self.clone();
        next.insert(u, m);
        next
    }

    /// In-place variant of [`Lexicon::upsert`].
    pub fn insert(&mut self, u: Utterance, m: Meaning) -> Option<Meaning> {
        self.entries.insert(u, m)
    }

    pub fn is_sound(&self) -> bool {
        self.entries.values().all(Meaning::is_functional)
    }
}

impl FromIterator<(Utterance, Meaning)> for Lexicon {
    fn from_iter<T: IntoIterator<Item = (Utterance, Meaning)>>(iter: T) -> Self {
        Self {
            entries: iter.into_iter().collect(),
        }
    }
}
