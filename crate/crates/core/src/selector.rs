//! Consequent selection on dissent.
//!
//! When the user speaks up and the lexicon has no answer, the agent must move
//! to some state other than the current one. How it picks that state is a
//! strategy: each strategy implements [`ConsequentSelector`] and is
//! registered by name in a [`SelectorRegistry`], so scenario files, the CLI
//! and the service can pick one at runtime with a [`SelectorSpec`] such as
//! `cyclic`, `random 7` or `scripted Semi,Heat`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::semantics::{ActionSpace, SemanticsError, State};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SelectorError {
    #[error("unknown selector kind `{0}`")]
    UnknownKind(String),
    #[error("empty selector specification")]
    Empty,
    #[error("invalid arguments for selector `{kind}`: {reason}")]
    InvalidArgs { kind: String, reason: String },
    #[error("scripted selector exhausted after {0} choices")]
    Exhausted(usize),
    #[error("selector chose `{0}`, which equals the current state")]
    ChoseCurrent(String),
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
}

/// Picks the consequent `c != a` for a dissenting utterance.
pub trait ConsequentSelector: Send {
    fn kind(&self) -> &'static str;

    fn select(&mut self, space: &ActionSpace, current: State) -> Result<State, SelectorError>;
}

/// Builds a selector bound to an action space from the argument part of a
/// [`SelectorSpec`].
pub type SelectorFactory =
    fn(args: &str, space: &ActionSpace) -> Result<Box<dyn ConsequentSelector>, SelectorError>;

/// A selector kind plus its (possibly empty) argument text.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SelectorSpec {
    pub kind: String,
    pub args: String,
}

impl SelectorSpec {
    pub fn new(kind: impl Into<String>, args: impl Into<String>) -> Self {
        Self {
            kind: kind.into(),
            args: args.into(),
        }
    }

    pub fn cyclic() -> Self {
        Self::new("cyclic", "")
    }

    pub fn random(seed: u64) -> Self {
        Self::new("random", seed.to_string())
    }

    pub fn scripted<I, S>(labels: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let joined: Vec<String> = labels.into_iter().map(|s| s.as_ref().to_string()).collect();
        Self::new("scripted", joined.join(","))
    }
}

impl FromStr for SelectorSpec {
    type Err = SelectorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Err(SelectorError::Empty);
        }
        let (kind, args) = match s.split_once(char::is_whitespace) {
            Some((k, rest)) => (k, rest.trim()),
            None => (s, ""),
        };
        Ok(Self::new(kind, args))
    }
}

impl fmt::Display for SelectorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.args.is_empty() {
            f.write_str(&self.kind)
        } else {
            write!(f, "{} {}", self.kind, self.args)
        }
    }
}

/// Name-keyed table of selector factories.
#[derive(Clone)]
pub struct SelectorRegistry {
    factories: BTreeMap<String, SelectorFactory>,
}

impl SelectorRegistry {
    pub fn empty() -> Self {
        Self {
            factories: BTreeMap::new(),
        }
    }

    /// Registry with the built-in `cyclic`, `random` and `scripted` kinds.
    pub fn with_builtins() -> Self {
        let mut reg = Self::empty();
        reg.register("cyclic", Cyclic::build);
        reg.register("random", Random::build);
        reg.register("scripted", Scripted::build);
        reg
    }

    /// Registers `factory` under `kind`, replacing any previous one.
    pub fn register(&mut self, kind: &str, factory: SelectorFactory) {
        self.factories.insert(kind.to_string(), factory);
    }

    pub fn kinds(&self) -> impl Iterator<Item = &str> {
        self.factories.keys().map(String::as_str)
    }

    pub fn contains(&self, kind: &str) -> bool {
        self.factories.contains_key(kind)
    }

    pub fn build(
        &self,
        spec: &SelectorSpec,
        space: &ActionSpace,
    ) -> Result<Box<dyn ConsequentSelector>, SelectorError> {
        let factory = self
            .factories
            .get(&spec.kind)
            .ok_or_else(|| SelectorError::UnknownKind(spec.kind.clone()))?;
        factory(&spec.args, space)
    }
}

impl Default for SelectorRegistry {
    fn default() -> Self {
        Self::with_builtins()
    }
}

impl fmt::Debug for SelectorRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.factories.keys()).finish()
    }
}

fn no_args(kind: &str, args: &str) -> Result<(), SelectorError> {
    if args.trim().is_empty() {
        Ok(())
    } else {
        Err(SelectorError::InvalidArgs {
            kind: kind.to_string(),
            reason: format!("takes no arguments, got `{}`", args.trim()),
        })
    }
}

/// Successor in declaration order. Over a two-state space this is the
/// binary complement.
#[derive(Debug, Clone, Copy, Default)]
pub struct Cyclic;

impl Cyclic {
    fn build(args: &str, _space: &ActionSpace) -> Result<Box<dyn ConsequentSelector>, SelectorError> {
        no_args("cyclic", args)?;
        Ok(Box::new(Cyclic))
    }
}

impl ConsequentSelector for Cyclic {
    fn kind(&self) -> &'static str {
        "cyclic"
    }

    fn select(&mut self, space: &ActionSpace, current: State) -> Result<State, SelectorError> {
        Ok(space.successor(current))
    }
}

/// Uniform draw from every state except the current one.
#[derive(Debug, Clone)]
pub struct Random {
    rng: ChaCha8Rng,
}

impl Random {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    fn build(args: &str, _space: &ActionSpace) -> Result<Box<dyn ConsequentSelector>, SelectorError> {
        let seed = args.trim().parse::<u64>().map_err(|_| SelectorError::InvalidArgs {
            kind: "random".into(),
            reason: format!("expected an unsigned integer seed, got `{}`", args.trim()),
        })?;
        Ok(Box::new(Random::new(seed)))
    }
}

impl ConsequentSelector for Random {
    fn kind(&self) -> &'static str {
        "random"
    }

    fn select(&mut self, space: &ActionSpace, current: State) -> Result<State, SelectorError> {
        let others = (space.len() - 1) as u32;
        let mut idx = self.rng.random_range(0..others) as usize;
        if idx >= current.index() {
            idx += 1;
        }
        Ok(space.state_at(idx)?)
    }
}

/// Replays a fixed list of consequents, one per dissent.
#[derive(Debug, Clone)]
pub struct Scripted {
    script: Vec<State>,
    next: usize,
}

impl Scripted {
    pub fn new(script: Vec<State>) -> Self {
        Self { script, next: 0 }
    }

    fn build(args: &str, space: &ActionSpace) -> Result<Box<dyn ConsequentSelector>, SelectorError> {
        let script = args
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|label| space.state(label))
            .collect::<Result<Vec<_>, _>>()?;
        if script.is_empty() {
            return Err(SelectorError::InvalidArgs {
                kind: "scripted".into(),
                reason: "expected a comma-separated list of states".into(),
            });
        }
        Ok(Box::new(Scripted::new(script)))
    }
}

impl ConsequentSelector for Scripted {
    fn kind(&self) -> &'static str {
        "scripted"
    }

    fn select(&mut self, space: &ActionSpace, current: State) -> Result<State, SelectorError> {
        let choice = *self
            .script
            .get(self.next)
            .ok_or(SelectorError::Exhausted(self.script.len()))?;
        if choice == current {
            return Err(SelectorError::ChoseCurrent(space.label(choice).to_string()));
        }
        self.next += 1;
        Ok(choice)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn three() -> ActionSpace {
        ActionSpace::new(["NoHeat", "Semi", "Heat"]).unwrap()
    }

    #[test]
    fn cyclic_examples() {
        let space = three();
        let mut sel = Cyclic;
        let pick = |sel: &mut Cyclic, l: &str| {
            let s = sel.select(&space, space.state(l).unwrap()).unwrap();
            space.label(s).to_string()
        };
        assert_eq!(pick(&mut sel, "NoHeat"), "Semi");
        assert_eq!(pick(&mut sel, "Semi"), "Heat");
        assert_eq!(pick(&mut sel, "Heat"), "NoHeat");

        let two = ActionSpace::new(["NoHeat", "Heat"]).unwrap();
        let c = sel.select(&two, two.state("Heat").unwrap()).unwrap();
        assert_eq!(two.label(c), "NoHeat");
    }

    #[test]
    fn spec_parsing() {
        assert_eq!("cyclic".parse::<SelectorSpec>().unwrap(), SelectorSpec::cyclic());
        assert_eq!(" random   42 ".parse::<SelectorSpec>().unwrap(), SelectorSpec::random(42));
        assert_eq!(
            "scripted Semi, Heat".parse::<SelectorSpec>().unwrap(),
            SelectorSpec::new("scripted", "Semi, Heat")
        );
        assert_eq!("".parse::<SelectorSpec>().unwrap_err(), SelectorError::Empty);
        assert_eq!(SelectorSpec::random(7).to_string(), "random 7");
    }

    #[test]
    fn registry_rejects_bad_specs() {
        let reg = SelectorRegistry::with_builtins();
        let space = three();
        let err = |s: &str| reg.build(&s.parse().unwrap(), &space).err().unwrap();
        assert_eq!(err("mdp"), SelectorError::UnknownKind("mdp".into()));
        assert!(matches!(err("random"), SelectorError::InvalidArgs { .. }));
        assert!(matches!(err("random -3"), SelectorError::InvalidArgs { .. }));
        assert!(matches!(err("cyclic 3"), SelectorError::InvalidArgs { .. }));
        assert!(matches!(err("scripted"), SelectorError::InvalidArgs { .. }));
        assert!(matches!(err("scripted Warm"), SelectorError::Semantics(_)));
    }

    #[test]
    fn registry_accepts_plugins() {
        #[derive(Debug)]
        struct AlwaysFirstOther;
        impl ConsequentSelector for AlwaysFirstOther {
            fn kind(&self) -> &'static str {
                "first-other"
            }
            fn select(&mut self, space: &ActionSpace, current: State) -> Result<State, SelectorError> {
                Ok(space.states().find(|s| *s != current).unwrap())
            }
        }
        let mut reg = SelectorRegistry::with_builtins();
        reg.register("first-other", |_, _| Ok(Box::new(AlwaysFirstOther)));
        let space = three();
        let mut sel = reg.build(&"first-other".parse().unwrap(), &space).unwrap();
        assert_eq!(sel.select(&space, space.state_at(0).unwrap()).unwrap().index(), 1);
        assert_eq!(reg.kinds().collect::<Vec<_>>(), ["cyclic", "first-other", "random", "scripted"]);
    }

    #[test]
    fn scripted_runs_out_and_refuses_current() {
        let space = three();
        let reg = SelectorRegistry::with_builtins();
        let mut sel = reg.build(&SelectorSpec::scripted(["Semi", "Semi"]), &space).unwrap();
        let nh = space.state("NoHeat").unwrap();
        let semi = space.state("Semi").unwrap();
        assert_eq!(sel.select(&space, nh).unwrap(), semi);
        assert_eq!(
            sel.select(&space, semi).unwrap_err(),
            SelectorError::ChoseCurrent("Semi".into())
        );
        assert_eq!(sel.select(&space, nh).unwrap(), semi);
        assert_eq!(sel.select(&space, nh).unwrap_err(), SelectorError::Exhausted(2));
    }

    proptest! {
        #[test]
        fn never_selects_current(n in 2usize..8, seed: u64, starts in prop::collection::vec(0usize..8, 1..50)) {
            let space = ActionSpace::new((0..n).map(|i| format!("s{i}"))).unwrap();
            let mut random = Random::new(seed);
            let mut cyclic = Cyclic;
            for s in starts {
                let a = space.state_at(s % n).unwrap();
                prop_assert_ne!(random.select(&space, a).unwrap(), a);
                prop_assert_ne!(cyclic.select(&space, a).unwrap(), a);
            }
        }

        #[test]
        fn cyclic_is_a_permutation(n in 2usize..10, start in 0usize..10) {
            let space = ActionSpace::new((0..n).map(|i| format!("s{i}"))).unwrap();
            let mut s = space.state_at(start % n).unwrap();
            let mut seen = vec![false; n];
            for _ in 0..n {
                prop_assert!(!seen[s.index()]);
                seen[s.index()] = true;
                s = Cyclic.select(&space, s).unwrap();
            }
            prop_assert!(seen.into_iter().all(|v| v));
            prop_assert_eq!(s.index(), start % n);
        }

        #[test]
        fn random_replays_with_same_seed(n in 2usize..8, seed: u64, starts in prop::collection::vec(0usize..8, 1..50)) {
            let space = ActionSpace::new((0..n).map(|i| format!("s{i}"))).unwrap();
            let (mut x, mut y) = (Random::new(seed), Random::new(seed));
            for s in starts {
                let a = space.state_at(s % n).unwrap();
                prop_assert_eq!(x.select(&space, a).unwrap(), y.select(&space, a).unwrap());
            }
        }
    }
}
