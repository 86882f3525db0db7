//! One entry point for the four diagnosis strategies, shared by the CLI and
//! the service.

use std::fmt;
use std::str::FromStr;

use lpdiag_core::diagnose::{DiagnoseError, Diagnoser, Diagnosis, Step};
use lpdiag_core::spec::Oracle;
use lpdiag_core::{Atom, Bounds, Program};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    /// Descent along success traces.
    Alg4,
    /// Eager scan of top-level traces.
    Alg5,
    /// Automatic proof-tree navigation.
    Tree,
    /// Missing-answer descent.
    Missing,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::Alg4, Algorithm::Alg5, Algorithm::Tree, Algorithm::Missing];

    pub fn as_str(&self) -> &'static str {
        match self {
            Algorithm::Alg4 => "alg4",
            Algorithm::Alg5 => "alg5",
            Algorithm::Tree => "tree",
            Algorithm::Missing => "missing",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| format!("unknown algorithm `{s}` (expected alg4, alg5, tree or missing)"))
    }
}

pub struct Run {
    /// Every step taken, including those before a failure.
    pub steps: Vec<Step>,
    pub result: Result<Diagnosis, DiagnoseError>,
}

/// Establishes the symptom of `query` and diagnoses it.
pub fn run(
    program: &Program,
    query: &Atom,
    algorithm: Algorithm,
    from_answer: bool,
    oracle: &mut Oracle,
    bounds: Bounds,
) -> Run {
    let mut d = Diagnoser::new(program, oracle, bounds);
    let result = strategy(&mut d, query, algorithm, from_answer);
    Run {
        steps: d.transcript().to_vec(),
        result,
    }
}

fn strategy(d: &mut Diagnoser<'_>, query: &Atom, algorithm: Algorithm, from_answer: bool) -> Result<Diagnosis, DiagnoseError> {
    if algorithm == Algorithm::Missing {
        let symptom = d.missing_answer_symptom(query)?;
        return d.missing_descent(&symptom);
    }
    let symptom = d.wrong_answer_symptom(query)?;
    match algorithm {
        Algorithm::Alg4 => d.success_trace_descent(&symptom),
        Algorithm::Alg5 => d.eager_descent(&symptom, from_answer),
        _ => d.tree_descent(&symptom),
    }
}
