//! Implementations of the `run`, `trace` and `diagnose` subcommands. Each
//! writes its report to the given writer and returns an exit status.

use std::io::{self, Write};

use lpdiag_core::diagnose::{DiagnoseError, Step};
use lpdiag_core::engine::Outcome;
use lpdiag_core::spec::{Oracle, OracleError, SpecError, Specification};
use lpdiag_core::trace::{event_lines, TraceBuilder};
use lpdiag_core::{parse_program, parse_query, Answer, Atom, Bounds, EngineError, ParseError, Program, SolveOptions, Solver};
use thiserror::Error;

use crate::diagnosis::{self, Algorithm};
use crate::script::ScriptError;

/// Process exit statuses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    /// Finished; for `diagnose`, a verdict was found.
    Ok = 0,
    /// Any error reported through [`CliError`].
    Error = 1,
    /// Bad command line.
    Usage = 2,
    /// `diagnose`: the query shows no symptom.
    NotASymptom = 3,
    /// `diagnose`: aborted, or the oracle's answers do not settle it.
    Inconclusive = 4,
}

impl Status {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Read { path: String, source: io::Error },
    #[error("{what}: {source}")]
    Parse { what: &'static str, source: ParseError },
    #[error("specification: {0}")]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Script(#[from] ScriptError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Diagnose(DiagnoseError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub fn load_program(text: &str) -> Result<Program, CliError> {
    parse_program(text).map_err(|source| CliError::Parse { what: "program", source })
}

pub fn load_query(text: &str) -> Result<Atom, CliError> {
    parse_query(text).map_err(|source| CliError::Parse { what: "query", source })
}

pub fn load_spec(text: &str) -> Result<Specification, CliError> {
    Ok(Specification::parse(text)?)
}

/// `L = [2,3,1]`, with named query variables in order of appearance; `true`
/// when there are none.
pub fn answer_line(query: &Atom, answer: &Answer) -> String {
    let parts: Vec<String> = query
        .vars()
        .iter()
        .filter(|v| v.name.as_deref().is_some_and(|n| !n.starts_with('_')))
        .filter_map(|v| answer.substitution.get(v).map(|t| format!("{v} = {t}")))
        .collect();
    if parts.is_empty() {
        "true".to_string()
    } else {
        parts.join(", ")
    }
}

fn summary(count: usize, outcome: Option<Outcome>) -> String {
    let mut s = match count {
        0 => "no answers".to_string(),
        1 => "1 answer".to_string(),
        n => format!("{n} answers"),
    };
    if let Some(Outcome::Truncated(b)) = outcome {
        s.push_str(&format!(" (truncated at {b})"));
    }
    s
}

/// Prints the answers one per line as they are found, then a summary.
pub fn cmd_run(program: &Program, query: &Atom, bounds: Bounds, out: &mut dyn Write) -> Result<Status, CliError> {
    let mut solver = Solver::new(program, query, bounds, SolveOptions::quiet());
    let mut count = 0;
    while let Some(s) = solver.next_solution()? {
        writeln!(out, "{}", answer_line(query, &s.answer))?;
        count += 1;
    }
    writeln!(out, "{}", summary(count, solver.outcome()))?;
    Ok(Status::Ok)
}

/// Prints the top-level trace table; with `events`, the four-port lines
/// first.
pub fn cmd_trace(program: &Program, query: &Atom, bounds: Bounds, events: bool, out: &mut dyn Write) -> Result<Status, CliError> {
    let options = SolveOptions {
        record_events: true,
        build_proofs: false,
        ..SolveOptions::default()
    };
    let mut solver = Solver::new(program, query, bounds, options);
    let mut builder = TraceBuilder::new();
    let mut answers = Vec::new();
    let mut lines = Vec::new();
    let outcome = loop {
        match solver.next_output() {
            Ok(lpdiag_core::engine::Output::Event(e)) => {
                builder.observe(&e);
                if events {
                    lines.push(e);
                }
            }
            Ok(lpdiag_core::engine::Output::Answer(s)) => answers.push(s.answer),
            Ok(lpdiag_core::engine::Output::Done(o)) => break o,
            Err(e) => {
                out.write_all(event_lines(&lines).as_bytes())?;
                return Err(e.into());
            }
        }
    };
    if events {
        out.write_all(event_lines(&lines).as_bytes())?;
        writeln!(out)?;
    }
    let trace = builder.finish(query.clone(), answers, outcome);
    write!(out, "{trace}")?;
    Ok(Status::Ok)
}

/// Prints the diagnosis transcript, ending with the verdict when one is
/// found.
#[allow(clippy::too_many_arguments)]
pub fn cmd_diagnose(
    program: &Program,
    query: &Atom,
    algorithm: Algorithm,
    from_answer: bool,
    oracle: &mut Oracle,
    bounds: Bounds,
    out: &mut dyn Write,
) -> Result<Status, CliError> {
    let run = diagnosis::run(program, query, algorithm, from_answer, oracle, bounds);
    write_steps(&run.steps, out)?;
    match run.result {
        Ok(_) => Ok(Status::Ok),
        Err(DiagnoseError::NotASymptom(q)) => {
            writeln!(out, "not a symptom: {q}")?;
            Ok(Status::NotASymptom)
        }
        Err(e @ (DiagnoseError::Inconclusive(_) | DiagnoseError::Oracle(OracleError::Aborted))) => {
            writeln!(out, "no verdict: {e}")?;
            Ok(Status::Inconclusive)
        }
        Err(e) => Err(CliError::Diagnose(e)),
    }
}

pub fn write_steps(steps: &[Step], out: &mut dyn Write) -> io::Result<()> {
    for s in steps {
        writeln!(out, "{s}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const INC: &str = include_str!("../../../fixtures/inc.isort.pl");
    const INS: &str = include_str!("../../../fixtures/ins.isort.pl");

    fn run_text(src: &str, q: &str) -> String {
        let mut out = Vec::new();
        let status = cmd_run(&load_program(src).unwrap(), &load_query(q).unwrap(), Bounds::default(), &mut out).unwrap();
        assert_eq!(status, Status::Ok);
        String::from_utf8(out).unwrap()
    }

    #[test]
    fn run_examples() {
        assert!(run_text(INC, "isort([2,1,3],L)").starts_with("L = [2,3,1]\n"));
        assert_eq!(run_text(INS, "isort([3,2,1],L)"), "no answers\n");
        assert_eq!(run_text(INC, "isort([],L)"), "L = []\n1 answer\n");
        assert_eq!(run_text(INC, "isort([],[])"), "true\n1 answer\n");
    }

    #[test]
    fn run_reports_truncation() {
        let mut out = Vec::new();
        let b = Bounds::new(512, 1, 1_000_000).unwrap();
        cmd_run(&load_program("p(1).\np(2).").unwrap(), &load_query("p(X)").unwrap(), b, &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "X = 1\n1 answer (truncated at max_answers)\n");
    }

    #[test]
    fn trace_of_failing_insert_is_empty() {
        let mut out = Vec::new();
        cmd_trace(&load_program(INS).unwrap(), &load_query("insert(1,[],Z)").unwrap(), Bounds::default(), false, &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap().trim_end(), "query   answers");
    }

    #[test]
    fn trace_events_use_port_lines() {
        let mut out = Vec::new();
        cmd_trace(&load_program(INC).unwrap(), &load_query("isort([1],L)").unwrap(), Bounds::default(), true, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("1      1 Call: isort([1],L)\n"), "{text}");
        assert!(text.contains("\nquery "));
    }

    #[test]
    fn parse_errors_carry_positions() {
        let e = load_program("p(X) :- q(X\n").unwrap_err();
        assert!(e.to_string().starts_with("program: syntax error at 2:1"), "{e}");
    }
}
