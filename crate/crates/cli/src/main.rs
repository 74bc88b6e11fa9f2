//! `semiotics` command-line tool.
//!
//! Exit status: 0 on success, 1 on a usage error, 2 on a data error
//! (missing or malformed input, engine failure).

mod render;
mod repl;

use std::io::{self, IsTerminal, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use semiotics_core::scenario::{parse_scenario, TraceStyle};
use semiotics_core::{
    export_lexicon, format_trace, import_lexicon, replay, ActionSpace, Lexicon, SelectorRegistry, SelectorSpec,
    Session,
};
use semiotics_service::{serve, SessionService};
use thiserror::Error;

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}

type CliResult = Result<(), CliError>;

#[derive(Debug, Parser)]
#[command(name = "semiotics", version, about = "Learn utterance meanings as partial functions over a finite action space")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Replay a scenario file and print its trace.
    Replay {
        file: PathBuf,
        /// `table` for the aligned human view, `records` for the tab-separated golden format.
        #[arg(long, default_value = "table")]
        format: TraceStyle,
        /// Write the trace here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train a lexicon interactively, one utterance per line.
    Repl {
        /// Comma-separated state labels; taken from the lexicon when `--load` is given.
        #[arg(long)]
        states: Option<String>,
        #[arg(long)]
        initial: String,
        /// Selector kind, optionally with arguments (`cyclic`, `random 7`, `scripted A,B`).
        #[arg(long, default_value = "cyclic")]
        selector: String,
        /// Seed for the `random` selector.
        #[arg(long)]
        seed: Option<u64>,
        /// Start from a saved lexicon.
        #[arg(long)]
        load: Option<PathBuf>,
    },
    /// Run the HTTP session service.
    Serve {
        /// 0 picks a free port; the bound address is printed on startup.
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        bind: String,
    },
    /// Inspect, produce, or validate lexicon documents.
    #[command(subcommand)]
    Lexicon(LexiconCommand),
}

#[derive(Debug, Subcommand)]
enum LexiconCommand {
    /// Print a lexicon document as a table.
    Show { path: PathBuf },
    /// Replay a scenario and write the resulting lexicon.
    Export {
        scenario: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Validate a lexicon document, optionally rewriting it in canonical form.
    Import {
        path: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(command: Command) -> CliResult {
    match command {
        Command::Replay { file, format, out } => cmd_replay(&file, format, out.as_deref()),
        Command::Repl { states, initial, selector, seed, load } => {
            cmd_repl(states.as_deref(), &initial, &selector, seed, load.as_deref())
        }
        Command::Serve { port, bind } => cmd_serve(&bind, port),
        Command::Lexicon(LexiconCommand::Show { path }) => cmd_lexicon_show(&path),
        Command::Lexicon(LexiconCommand::Export { scenario, out }) => cmd_lexicon_export(&scenario, out.as_deref()),
        Command::Lexicon(LexiconCommand::Import { path, out }) => cmd_lexicon_import(&path, out.as_deref()),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => CliError::Data(format!("file not found: {}", path.display())),
        _ => CliError::Data(format!("cannot read {}: {e}", path.display())),
    })
}

fn emit(text: &str, out: Option<&Path>) -> CliResult {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display()))),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Data(format!("cannot write stdout: {e}"))),
    }
}

fn replay_file(path: &Path) -> Result<semiotics_core::Trace, CliError> {
    let text = read(path)?;
    let scenario = parse_scenario(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    replay(&scenario).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn cmd_replay(path: &Path, style: TraceStyle, out: Option<&Path>) -> CliResult {
    let trace = replay_file(path)?;
    emit(&format_trace(&trace, style), out)
}

fn load_lexicon(path: &Path) -> Result<(Lexicon, ActionSpace), CliError> {
    let text = read(path)?;
    import_lexicon(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn selector_spec(selector: &str, seed: Option<u64>) -> Result<SelectorSpec, CliError> {
    let mut spec: SelectorSpec = selector
        .parse()
        .map_err(|e| CliError::Usage(format!("--selector: {e}")))?;
    if let Some(seed) = seed {
        if spec.kind != "random" || !spec.args.is_empty() {
            return Err(CliError::Usage("--seed only applies to `--selector random`".into()));
        }
        spec.args = seed.to_string();
    }
    Ok(spec)
}

fn cmd_repl(
    states: Option<&str>,
    initial: &str,
    selector: &str,
    seed: Option<u64>,
    load: Option<&Path>,
) -> CliResult {
    let spec = selector_spec(selector, seed)?;
    let requested = states
        .map(|s| ActionSpace::new(s.split(',').map(str::trim)).map_err(|e| CliError::Usage(format!("--states: {e}"))))
        .transpose()?;
    let (lexicon, space) = match (load, requested) {
        (Some(path), requested) => {
            let (lexicon, space) = load_lexicon(path)?;
            if let Some(requested) = requested {
                if requested != space {
                    return Err(CliError::Data(format!(
                        "--states {} does not match the lexicon's states {}",
                        requested.labels().join(","),
                        space.labels().join(",")
                    )));
                }
            }
            (lexicon, space)
        }
        (None, Some(space)) => (Lexicon::new(), space),
        (None, None) => return Err(CliError::Usage("--states is required unless --load is given".into())),
    };
    let initial = space.state(initial).map_err(|e| CliError::Usage(format!("--initial: {e}")))?;
    let selector = SelectorRegistry::with_builtins()
        .build(&spec, &space)
        .map_err(|e| CliError::Usage(format!("--selector: {e}")))?;
    let mut session =
        Session::with_lexicon(space, initial, selector, lexicon).map_err(|e| CliError::Data(e.to_string()))?;

    let stdin = io::stdin();
    let interactive = stdin.is_terminal();
    repl::run(&mut session, stdin.lock(), &mut io::stdout().lock(), interactive)
        .map_err(|e| CliError::Data(format!("i/o: {e}")))
}

fn cmd_serve(bind: &str, port: u16) -> CliResult {
    let addr: SocketAddr = format!("{bind}:{port}")
        .parse()
        .map_err(|e| CliError::Usage(format!("--bind {bind}: {e}")))?;
    let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError::Data(format!("runtime: {e}")))?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .map_err(|e| CliError::Data(format!("cannot bind {addr}: {e}")))?;
        let local = listener
            .local_addr()
            .map_err(|e| CliError::Data(format!("cannot read bound address: {e}")))?;
        println!("listening on http://{local}");
        let _ = io::stdout().flush();
        tokio::select! {
            result = serve(listener, Arc::new(SessionService::default())) => {
                result.map_err(|e| CliError::Data(format!("server: {e}")))
            }
            _ = tokio::signal::ctrl_c() => Ok(()),
        }
    })
}

fn cmd_lexicon_show(path: &Path) -> CliResult {
    let (lexicon, space) = load_lexicon(path)?;
    emit(&render::lexicon_table(&lexicon, &space), None)
}

fn cmd_lexicon_export(scenario: &Path, out: Option<&Path>) -> CliResult {
    let trace = replay_file(scenario)?;
    emit(&export_lexicon(&trace.lexicon, &trace.space), out)
}

fn cmd_lexicon_import(path: &Path, out: Option<&Path>) -> CliResult {
    let (lexicon, space) = load_lexicon(path)?;
    match out {
        Some(out) => emit(&export_lexicon(&lexicon, &space), Some(out)),
        None => {
            println!(
                "ok: {} utterance(s) over states {}",
                lexicon.len(),
                space.labels().join(", ")
            );
            Ok(())
        }
    }
}
