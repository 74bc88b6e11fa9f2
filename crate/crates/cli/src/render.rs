use std::fmt::Write as _;

use semiotics_core::scenario::utterance_token;
use semiotics_core::{ActionSpace, Lexicon};

/// Human-readable listing of a lexicon, one utterance per line.
pub fn lexicon_table(lexicon: &Lexicon, space: &ActionSpace) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "states: {}", space.labels().join(", "));
    let rows: Vec<(String, String)> = lexicon
        .iter()
        .map(|(u, m)| {
            let name = utterance_token(u);
            let pairs: Vec<String> = m
                .pairs()
                .iter()
                .map(|p| format!("{} -> {}", space.label(p.antecedent), space.label(p.consequent)))
                .collect();
            (name.to_string(), pairs.join(", "))
        })
        .collect();
    let width = rows
        .iter()
        .map(|(u, _)| u.chars().count())
        .chain(std::iter::once("utterance".len()))
        .max()
        .unwrap_or(0);
    let _ = writeln!(out, "{:<width$}  meaning", "utterance");
    for (u, pairs) in rows {
        let _ = writeln!(out, "{u:<width$}  {pairs}");
    }
    out
}
