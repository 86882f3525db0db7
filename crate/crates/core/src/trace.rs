//! Top-level traces and top-level success traces.
//!
//! A top-level trace lists the direct subgoal calls made while resolving a
//! query, every one of them with its full list of answers, including calls
//! made after the query's first answer. A success trace lists the body atoms
//! of the root clause application behind one particular answer.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::{self, Write};

use crate::engine::{proof_tree, Answer, Bounds, EngineError, Outcome, Output, Port, ProofTree, Rule, SolveOptions, Solver, TraceEvent};
use crate::program::{ClauseRef, Program};
use crate::term::Atom;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceEntry {
    pub invocation: u32,
    pub call: Atom,
    pub answers: Vec<Answer>,
    /// No answers and the search for this call finitely failed.
    pub failed: bool,
    /// Root clause whose body made the call.
    pub clause: Option<ClauseRef>,
    /// The run stopped at a bound before this call's search was closed.
    pub truncated: bool,
}

impl TraceEntry {
    fn answer_atoms(&self) -> impl Iterator<Item = &Atom> {
        self.answers.iter().map(|a| &a.atom)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TopLevelTrace {
    pub query: Atom,
    pub entries: Vec<TraceEntry>,
    /// Answers of the query itself.
    pub answers: Vec<Answer>,
    pub outcome: Outcome,
}

impl TopLevelTrace {
    /// Rows of the two-column table; `(none)` marks an empty answer list.
    pub fn rows(&self) -> Vec<(String, Vec<String>)> {
        self.entries
            .iter()
            .map(|e| {
                let mut answers: Vec<String> = e.answer_atoms().map(|a| alloc::format!("{a}")).collect();
                if answers.is_empty() {
                    answers.push(String::from("(none)"));
                }
                (alloc::format!("{}", e.call), answers)
            })
            .collect()
    }

    pub fn entry(&self, call: &Atom) -> Option<&TraceEntry> {
        self.entries.iter().find(|e| e.call.is_variant_of(call))
    }
}

impl fmt::Display for TopLevelTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows = self.rows();
        let width = rows
            .iter()
            .map(|(q, _)| q.chars().count())
            .chain(core::iter::once("query".len()))
            .max()
            .unwrap_or(0);
        writeln!(f, "{:<width$}   answers", "query")?;
        for (query, answers) in &rows {
            for (i, a) in answers.iter().enumerate() {
                let left = if i == 0 { query.as_str() } else { "" };
                writeln!(f, "{left:<width$}   {a}")?;
            }
        }
        if let Outcome::Truncated(b) = self.outcome {
            writeln!(f, "(truncated at {b})")?;
        }
        Ok(())
    }
}

/// Folds an event stream into top-level entries.
#[derive(Clone, Debug, Default)]
pub struct TraceBuilder {
    entries: Vec<TraceEntry>,
    closed: Vec<bool>,
}

impl TraceBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records one event; returns the index of the entry it touched.
    pub fn observe(&mut self, event: &TraceEvent) -> Option<usize> {
        if event.depth != 2 {
            return None;
        }
        match event.port {
            Port::Call => {
                self.entries.push(TraceEntry {
                    invocation: event.invocation,
                    call: event.goal.clone(),
                    answers: Vec::new(),
                    failed: false,
                    clause: event.within.clone(),
                    truncated: false,
                });
                self.closed.push(false);
                Some(self.entries.len() - 1)
            }
            port => {
                let i = self.entries.iter().rposition(|e| e.invocation == event.invocation)?;
                let entry = &mut self.entries[i];
                match port {
                    Port::Exit => entry.answers.push(Answer::for_instance(&entry.call, &event.goal)),
                    Port::Fail => {
                        entry.failed = entry.answers.is_empty();
                        self.closed[i] = true;
                    }
                    _ => {}
                }
                Some(i)
            }
        }
    }

    pub fn entries(&self) -> &[TraceEntry] {
        &self.entries
    }

    pub fn finish(mut self, query: Atom, answers: Vec<Answer>, outcome: Outcome) -> TopLevelTrace {
        if outcome.is_truncated() {
            for (e, closed) in self.entries.iter_mut().zip(self.closed.iter()) {
                e.truncated = !closed;
            }
        }
        TopLevelTrace {
            query,
            entries: self.entries,
            answers,
            outcome,
        }
    }
}

/// Builds the top-level trace of `query` by running it to the end.
pub fn top_level_trace(program: &Program, query: &Atom, bounds: Bounds, occurs_check: bool) -> Result<TopLevelTrace, EngineError> {
    let options = SolveOptions {
        occurs_check,
        record_events: true,
        build_proofs: false,
        ..SolveOptions::default()
    };
    let mut solver = Solver::new(program, query, bounds, options);
    let mut builder = TraceBuilder::new();
    let mut answers = Vec::new();
    loop {
        match solver.next_output()? {
            Output::Event(e) => {
                builder.observe(&e);
            }
            Output::Answer(s) => answers.push(s.answer),
            Output::Done(outcome) => return Ok(builder.finish(query.clone(), answers, outcome)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuccessItem {
    pub atom: Atom,
    /// The goal as it was called.
    pub call: Atom,
    pub builtin: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuccessTrace {
    pub answer: Atom,
    pub clause: Option<ClauseRef>,
    pub items: Vec<SuccessItem>,
}

impl SuccessTrace {
    pub fn from_proof(tree: &ProofTree) -> SuccessTrace {
        SuccessTrace {
            answer: tree.atom.clone(),
            clause: match &tree.rule {
                Rule::Clause(c) => Some(c.clone()),
                Rule::Builtin => None,
            },
            items: tree
                .children
                .iter()
                .map(|c| SuccessItem {
                    atom: c.atom.clone(),
                    call: c.call.clone(),
                    builtin: c.is_builtin(),
                })
                .collect(),
        }
    }

    pub fn atoms(&self) -> impl Iterator<Item = &Atom> {
        self.items.iter().map(|i| &i.atom)
    }
}

/// Success trace of `answer`, an answer of `query`.
pub fn success_trace(
    program: &Program,
    query: &Atom,
    answer: &Atom,
    bounds: Bounds,
    occurs_check: bool,
) -> Result<SuccessTrace, EngineError> {
    proof_tree(program, query, answer, bounds, occurs_check).map(|t| SuccessTrace::from_proof(&t))
}

/// Transcript text, one event per line.
pub fn event_lines(events: &[TraceEvent]) -> String {
    let mut s = String::new();
    for e in events {
        let _ = writeln!(s, "{e}");
    }
    s
}

/// Renumbers the leading invocation numbers of transcript lines by order of
/// first appearance. Lines without a leading number are left alone.
pub fn normalize_invocations(text: &str) -> String {
    let mut seen: Vec<&str> = Vec::new();
    let mut out = String::with_capacity(text.len());
    for line in text.split_inclusive('\n') {
        let digits = line.len() - line.trim_start_matches(|c: char| c.is_ascii_digit()).len();
        if digits == 0 {
            out.push_str(line);
            continue;
        }
        let (num, rest) = line.split_at(digits);
        let n = match seen.iter().position(|s| *s == num) {
            Some(i) => i + 1,
            None => {
                seen.push(num);
                seen.len()
            }
        };
        // Keep the depth column aligned to the original field width.
        let rest = rest.trim_start_matches(' ');
        let depth_len = rest.len() - rest.trim_start_matches(|c: char| c.is_ascii_digit()).len();
        let (depth, tail) = rest.split_at(depth_len);
        let _ = write!(out, "{n}{depth:>7}{tail}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_program, parse_query};
    use alloc::string::ToString;
    use alloc::vec;

    const INC: &str = "isort([X|Xs],Ys) :- isort(Xs,Zs), insert(X,Zs,Ys).
isort([],[]).
insert(X,[],[X]).
insert(X,[Y|Ys],[X,Y|Ys]) :- X =< Y.
insert(X,[Y|Ys],[Y|Zs]) :- Y > X, insert(X,Ys,Zs).
";
    const INS: &str = "isort([X|Xs],Ys) :- isort(Xs,Zs), insert(X,Zs,Ys).
isort([],[]).
insert(X,[Y|Ys],[Y|Zs]) :- X > Y, insert(X,Ys,Zs).
insert(X,[Y|Ys],[X,Y|Ys]) :- X =< Y.
";

    fn tlt(src: &str, q: &str) -> TopLevelTrace {
        top_level_trace(&parse_program(src).unwrap(), &parse_query(q).unwrap(), Bounds::default(), true).unwrap()
    }

    fn summary(t: &TopLevelTrace) -> Vec<(String, Vec<String>)> {
        t.entries
            .iter()
            .map(|e| (e.call.canonical_text(), e.answers.iter().map(|a| a.atom.to_string()).collect()))
            .collect()
    }

    #[test]
    fn ins_fixture_traces() {
        assert!(tlt(INS, "insert(1,[],Z)").entries.is_empty());
        let t = tlt(INS, "isort([1],L)");
        assert_eq!(
            summary(&t),
            vec![
                ("isort([],A)".to_string(), vec!["isort([],[])".to_string()]),
                ("insert(1,[],A)".to_string(), vec![]),
            ]
        );
        assert!(t.entries[1].failed && !t.entries[0].failed);
    }

    #[test]
    fn entries_carry_root_clause() {
        let t = tlt(INC, "isort([2,1,3],L)");
        assert!(t.entries.iter().all(|e| e.clause.as_ref().unwrap().index == 1));
    }

    #[test]
    fn table_rendering() {
        let t = tlt(INS, "isort([1],L)");
        let text = t.to_string();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0].split_whitespace().collect::<Vec<_>>(), vec!["query", "answers"]);
        assert!(lines[2].ends_with("(none)"));
        assert!(lines[1].ends_with("isort([],[])"));
    }

    #[test]
    fn success_trace_flags_builtins() {
        let p = parse_program(INC).unwrap();
        let st = success_trace(
            &p,
            &parse_query("insert(1,[3],Z)").unwrap(),
            &parse_query("insert(1,[3],[3,1])").unwrap(),
            Bounds::default(),
            true,
        )
        .unwrap();
        let items: Vec<(String, bool)> = st.items.iter().map(|i| (i.atom.to_string(), i.builtin)).collect();
        assert_eq!(items, vec![("3>1".to_string(), true), ("insert(1,[],[1])".to_string(), false)]);
        assert_eq!(st.clause.unwrap().index, 3);
    }

    #[test]
    fn normalization_renumbers_by_first_appearance() {
        let text = "7      1 Call: p\n9      2 Call: q\n9      2 Exit: q\n7      1 Exit: p\nanswer\n";
        assert_eq!(
            normalize_invocations(text),
            "1      1 Call: p\n2      2 Call: q\n2      2 Exit: q\n1      1 Exit: p\nanswer\n"
        );
        assert_eq!(normalize_invocations(&normalize_invocations(text)), normalize_invocations(text));
    }
}
