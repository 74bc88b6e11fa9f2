//! Interactive training loop.
//!
//! Every input line is an utterance; an empty line or `<silence>` is silence.
//! Lines starting with `:` are meta-commands.

use std::io::{self, BufRead, Write};
use std::path::Path;

use semiotics_core::persistence::export_lexicon;
use semiotics_core::scenario::{format_records, utterance_token, SILENCE_TOKEN};
use semiotics_core::{Session, StepReport, Utterance};

use crate::render::lexicon_table;

const HELP: &str = "\
type an utterance, or an empty line / <silence> for silence
:lexicon        show the lexicon
:history        print the history as records
:save <path>    export the lexicon
:quit           exit";

pub fn run<R: BufRead, W: Write>(session: &mut Session, input: R, out: &mut W, interactive: bool) -> io::Result<()> {
    if interactive {
        writeln!(out, "{HELP}")?;
    }
    let mut lines = input.lines();
    loop {
        if interactive {
            write!(out, "[{}]> ", session.space().label(session.current()))?;
            out.flush()?;
        }
        let Some(line) = lines.next() else { break };
        let line = line?;
        let trimmed = line.trim();
        if let Some(cmd) = trimmed.strip_prefix(':') {
            let (name, arg) = cmd.split_once(char::is_whitespace).unwrap_or((cmd, ""));
            match name {
                "quit" | "q" => break,
                "lexicon" => write!(out, "{}", lexicon_table(session.lexicon(), session.space()))?,
                "history" => write!(out, "{}", format_records(session.space(), session.history().entries()))?,
                "save" if !arg.trim().is_empty() => {
                    let path = Path::new(arg.trim());
                    match std::fs::write(path, export_lexicon(session.lexicon(), session.space())) {
                        Ok(()) => writeln!(out, "saved lexicon to {}", path.display())?,
                        Err(e) => writeln!(out, "error: cannot write {}: {e}", path.display())?,
                    }
                }
                "help" => writeln!(out, "{HELP}")?,
                _ => writeln!(out, "error: unknown command `:{cmd}` (try :help)")?,
            }
            continue;
        }
        let utterance = if trimmed == SILENCE_TOKEN {
            Ok(Utterance::silence())
        } else {
            Utterance::new(trimmed)
        };
        let result = utterance.map_err(Into::into).and_then(|u| session.step(u));
        match result {
            Ok(report) => echo(session, &report, out)?,
            Err(e) => writeln!(out, "error: {e}")?,
        }
    }
    Ok(())
}

fn echo<W: Write>(session: &Session, r: &StepReport, out: &mut W) -> io::Result<()> {
    let space = session.space();
    writeln!(
        out,
        "{:<5} {} -> {}",
        r.fired_rule.as_str(),
        space.label(r.antecedent),
        space.label(r.consequent)
    )?;
    for change in r.lexicon_changes.iter().filter(|c| c.old.is_some()) {
        let old = change.old.expect("filtered");
        writeln!(
            out,
            "R3    revised ({}, {} -> {}) to {}",
            utterance_token(&change.utterance),
            space.label(old.antecedent),
            space.label(old.consequent),
            space.label(change.new.consequent)
        )?;
    }
    Ok(())
}
