use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Duration;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use lpdiag::bounds;
use lpdiag::commands::{self, Status};
use lpdiag::diagnosis::Algorithm;
use lpdiag::script;
use lpdiag::service::{self, AppState, Config};
use lpdiag::terminal::TerminalOracle;
use lpdiag::BUNDLED_SPEC;
use lpdiag_core::spec::{Oracle, ScriptedOracle, SpecOracle};

/// Run, trace and diagnose pure logic programs.
#[derive(Debug, Parser)]
#[command(name = "lpdiag", version)]
struct Cli {
    /// Bound overrides such as `max_depth=64,max_answers=10`; applied after
    /// the LPDIAG_BOUNDS environment variable. May be repeated.
    #[arg(long, global = true, value_name = "KEY=VALUE,...")]
    bounds: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print every answer of a query, then a summary.
    Run { program: PathBuf, query: String },
    /// Print the top-level trace table of a query.
    Trace {
        program: PathBuf,
        query: String,
        /// Also print the four-port event lines.
        #[arg(long)]
        events: bool,
    },
    /// Locate the clause responsible for a wrong or missing answer.
    Diagnose {
        program: PathBuf,
        query: String,
        /// alg4, alg5, tree or missing.
        #[arg(long, short)]
        algorithm: Algorithm,
        /// alg5: start the scan from the incorrect answer.
        #[arg(long)]
        from_answer: bool,
        /// spec, script=PATH or interactive.
        #[arg(long, default_value = "spec")]
        oracle: OracleArg,
        /// Specification file; defaults to the bundled one for the
        /// insertion-sort fixtures.
        #[arg(long)]
        spec: Option<PathBuf>,
    },
    /// Serve diagnosis sessions over HTTP.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: String,
        /// Seconds of inactivity before a session is dropped.
        #[arg(long, default_value_t = 3600)]
        idle_timeout: u64,
    },
}

#[derive(Clone, Debug)]
enum OracleArg {
    Spec,
    Script(PathBuf),
    Interactive,
}

impl FromStr for OracleArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "spec" => Ok(OracleArg::Spec),
            "interactive" => Ok(OracleArg::Interactive),
            _ => match s.strip_prefix("script=") {
                Some(p) if !p.is_empty() => Ok(OracleArg::Script(PathBuf::from(p))),
                _ => Err(format!("unknown oracle `{s}` (expected spec, script=PATH or interactive)")),
            },
        }
    }
}

fn read(path: &Path) -> Result<String, commands::CliError> {
    std::fs::read_to_string(path).map_err(|source| commands::CliError::Read {
        path: path.display().to_string(),
        source,
    })
}

fn execute(cli: Cli) -> Result<Status> {
    let env = std::env::var(bounds::ENV_VAR).ok();
    let bounds = bounds::resolve(env.as_deref(), &cli.bounds).context("bounds")?;
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let status = match cli.command {
        Command::Run { program, query } => {
            let p = commands::load_program(&read(&program)?)?;
            commands::cmd_run(&p, &commands::load_query(&query)?, bounds, &mut out)?
        }
        Command::Trace { program, query, events } => {
            let p = commands::load_program(&read(&program)?)?;
            commands::cmd_trace(&p, &commands::load_query(&query)?, bounds, events, &mut out)?
        }
        Command::Diagnose {
            program,
            query,
            algorithm,
            from_answer,
            oracle,
            spec,
        } => {
            let p = commands::load_program(&read(&program)?)?;
            let q = commands::load_query(&query)?;
            let mut oracle = match oracle {
                OracleArg::Spec => {
                    let text = match &spec {
                        Some(path) => read(path)?,
                        None => BUNDLED_SPEC.to_string(),
                    };
                    Oracle::new(SpecOracle::new(commands::load_spec(&text)?))
                }
                OracleArg::Script(path) => Oracle::new(ScriptedOracle::new(script::parse(&read(&path)?)?)),
                OracleArg::Interactive => Oracle::new(TerminalOracle::new(BufReader::new(io::stdin()), io::stdout())),
            };
            commands::cmd_diagnose(&p, &q, algorithm, from_answer, &mut oracle, bounds, &mut out)?
        }
        Command::Serve { bind, idle_timeout } => {
            let config = Config {
                bounds,
                idle_timeout: Duration::from_secs(idle_timeout),
                log: true,
            };
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(async {
                let listener = tokio::net::TcpListener::bind(&bind).await.with_context(|| format!("cannot bind {bind}"))?;
                eprintln!("listening on {}", listener.local_addr()?);
                tokio::select! {
                    r = service::serve(listener, AppState::new(config)) => r?,
                    _ = tokio::signal::ctrl_c() => {}
                }
                anyhow::Ok(())
            })?;
            Status::Ok
        }
    };
    out.flush()?;
    Ok(status)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(status) => ExitCode::from(status.code() as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(Status::Error.code() as u8)
        }
    }
}
