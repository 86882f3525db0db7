//! Execution, tracing and declarative diagnosis of pure logic programs.
//!
//! The crate is `no_std` (it needs `alloc`). Modules, bottom-up:
//!
//! - [`term`]: terms, substitutions, unification.
//! - [`parser`] and [`program`]: the clause syntax.
//! - [`engine`]: SLD resolution emitting four-port events and proof trees.
//! - [`trace`]: top-level traces and top-level success traces.
//! - [`spec`]: correctness/completeness specifications and oracles.
//! - [`diagnose`]: locating incorrect clauses and uncovered atoms.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod diagnose;
pub mod engine;
pub mod parser;
pub mod program;
pub mod spec;
pub mod term;
pub mod trace;

pub use engine::{solve, Answer, Bounds, EngineError, Outcome, Port, ProofTree, Rule, SolveOptions, Solver, TraceEvent};
pub use parser::{parse_program, parse_query, ParseError};
pub use program::{Clause, ClauseRef, Program};
pub use term::{Atom, PredKey, Substitution, Term, Var};
