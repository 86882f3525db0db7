//! SLD resolution with Prolog's search rule.
//!
//! Leftmost goal selection, clauses in textual order, depth-first search
//! with chronological backtracking. The solver is a pull-based state
//! machine: every call to [`Solver::next_output`] yields the next four-port
//! trace event, computed answer, or the final outcome.
//!
//! Box protocol per invocation: `Call (Exit Redo)* (Exit | Fail)`. A choice
//! point is only kept when a later clause head actually unifies with the
//! goal, so deterministic calls never show a spurious `Redo`. Built-ins
//! produce no events but are recorded as proof-tree leaves.

use alloc::collections::VecDeque;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::program::{ClauseRef, Program};
use crate::term::{
    resolve, resolve_atom, unify_atoms_in, Atom, Bindings, PredKey, Substitution, Term, Var, VarSource,
};

/// Resource limits for one run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Bounds {
    pub max_depth: u32,
    pub max_answers: u32,
    pub max_steps: u64,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds {
            max_depth: 512,
            max_answers: 256,
            max_steps: 1_000_000,
        }
    }
}

impl Bounds {
    /// All three limits must be positive.
    pub fn new(max_depth: u32, max_answers: u32, max_steps: u64) -> Option<Self> {
        (max_depth > 0 && max_answers > 0 && max_steps > 0).then_some(Bounds {
            max_depth,
            max_answers,
            max_steps,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Port {
    Call,
    Exit,
    Redo,
    Fail,
}

impl fmt::Display for Port {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Port::Call => "Call",
            Port::Exit => "Exit",
            Port::Redo => "Redo",
            Port::Fail => "Fail",
        })
    }
}

/// One debugger line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceEvent {
    pub invocation: u32,
    pub depth: u32,
    pub port: Port,
    pub goal: Atom,
    /// Invocation number of the calling goal; `None` for the query itself.
    pub parent: Option<u32>,
    /// Clause the parent was executing when this event happened.
    pub within: Option<ClauseRef>,
}

impl fmt::Display for TraceEvent {
    /// `<invocation><depth right-aligned to 7> <Port>: <goal>`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{:>7} {}: {}", self.invocation, self.depth, self.port, self.goal)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bound {
    Depth,
    Answers,
    Steps,
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Bound::Depth => "max_depth",
            Bound::Answers => "max_answers",
            Bound::Steps => "max_steps",
        })
    }
}

/// How a run ended. Truncation is not an error, but it is never finite failure.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Exhausted,
    Truncated(Bound),
}

impl Outcome {
    pub fn is_truncated(&self) -> bool {
        matches!(self, Outcome::Truncated(_))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EngineError {
    /// A comparison met an unbound operand.
    Instantiation { goal: Atom },
    /// A comparison met a bound operand that is not an integer.
    Type { goal: Atom },
    UnknownPredicate { key: PredKey },
    /// The answer was not produced by re-running the query.
    AnswerNotFound { answer: Atom },
}

impl fmt::Display for EngineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EngineError::Instantiation { goal } => write!(f, "instantiation error in {goal}"),
            EngineError::Type { goal } => write!(f, "type error in {goal}: integers expected"),
            EngineError::UnknownPredicate { key } => write!(f, "unknown procedure {key}"),
            EngineError::AnswerNotFound { answer } => write!(f, "{answer} is not an answer of the query"),
        }
    }
}

impl core::error::Error for EngineError {}

/// A computed answer: the query instance and the bindings of query variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Answer {
    pub substitution: Substitution,
    pub atom: Atom,
}

impl Answer {
    /// Recovers the answer substitution of `call` that yields `instance`.
    pub fn for_instance(call: &Atom, instance: &Atom) -> Answer {
        let vars = call.vars();
        let substitution = crate::term::unify_atoms(call, instance, true)
            .map(|s| s.restrict(&vars))
            .unwrap_or_default();
        Answer {
            substitution,
            atom: instance.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Rule {
    Clause(ClauseRef),
    Builtin,
}

/// Derivation of one computed answer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProofTree {
    /// Node atom under the final answer substitution.
    pub atom: Atom,
    /// The goal as it was when called.
    pub call: Atom,
    pub rule: Rule,
    pub children: Vec<ProofTree>,
}

impl ProofTree {
    pub fn is_builtin(&self) -> bool {
        self.rule == Rule::Builtin
    }

    pub fn at(&self, path: &[usize]) -> Option<&ProofTree> {
        path.iter().try_fold(self, |node, &i| node.children.get(i))
    }

    pub fn size(&self) -> usize {
        1 + self.children.iter().map(ProofTree::size).sum::<usize>()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Solution {
    pub answer: Answer,
    pub proof: Option<ProofTree>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Output {
    Event(TraceEvent),
    Answer(Solution),
    Done(Outcome),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SolveOptions {
    pub occurs_check: bool,
    pub record_events: bool,
    pub build_proofs: bool,
    /// `integer(X)` with `X` unbound raises an instantiation error instead of
    /// failing. Used when a failure would silently lose answers.
    pub strict_type_tests: bool,
    /// A comparison of ground non-integers fails instead of raising a type
    /// error.
    pub type_errors_fail: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            occurs_check: true,
            record_events: true,
            build_proofs: true,
            strict_type_tests: false,
            type_errors_fail: false,
        }
    }
}

impl SolveOptions {
    /// No events, no proofs: answers only.
    pub fn quiet() -> Self {
        SolveOptions {
            record_events: false,
            build_proofs: false,
            ..SolveOptions::default()
        }
    }
}

/// Evaluates a comparison built-in or `integer/1`.
pub fn eval_builtin(atom: &Atom) -> Result<bool, EngineError> {
    eval_builtin_with(atom, &SolveOptions::default())
}

fn eval_builtin_with(atom: &Atom, options: &SolveOptions) -> Result<bool, EngineError> {
    if &*atom.name == "integer" && atom.arity() == 1 {
        return match &atom.args[0] {
            Term::Var(_) if options.strict_type_tests => Err(EngineError::Instantiation { goal: atom.clone() }),
            t => Ok(matches!(t, Term::Int(_))),
        };
    }
    let (l, r) = match (&atom.args[0], &atom.args[1]) {
        (Term::Int(l), Term::Int(r)) => (*l, *r),
        (l, r) if !l.is_ground() || !r.is_ground() => return Err(EngineError::Instantiation { goal: atom.clone() }),
        _ if options.type_errors_fail => return Ok(false),
        _ => return Err(EngineError::Type { goal: atom.clone() }),
    };
    Ok(match &*atom.name {
        "=<" => l <= r,
        ">" => l > r,
        "<" => l < r,
        ">=" => l >= r,
        "=:=" => l == r,
        "=\\=" => l != r,
        _ => return Err(EngineError::UnknownPredicate { key: atom.key() }),
    })
}

// ---------------------------------------------------------------------------

#[derive(Default)]
struct Store {
    slots: Vec<Option<Term>>,
    trail: Vec<u32>,
}

impl Bindings for Store {
    fn lookup(&self, v: &Var) -> Option<Term> {
        self.slots.get(v.serial as usize).cloned().flatten()
    }

    fn bind(&mut self, v: &Var, t: Term) {
        let i = v.serial as usize;
        if i >= self.slots.len() {
            self.slots.resize(i + 1, None);
        }
        self.slots[i] = Some(t);
        self.trail.push(v.serial);
    }
}

impl Store {
    fn undo_to(&mut self, trail_len: usize, slots_len: usize) {
        while self.trail.len() > trail_len {
            let s = self.trail.pop().unwrap() as usize;
            if s < self.slots.len() {
                self.slots[s] = None;
            }
        }
        self.slots.truncate(slots_len);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Status {
    Open,
    Exited,
    Closed,
}

struct Node {
    atom: Atom,
    call: Option<Atom>,
    parent: Option<usize>,
    depth: u32,
    invocation: Option<u32>,
    status: Status,
    clause: Option<ClauseRef>,
    children: Vec<usize>,
}

enum Goal {
    Call { atom: Atom, parent: Option<usize> },
    Exit(usize),
}

struct Cell {
    goal: Goal,
    next: Cont,
}

#[derive(Clone, Default)]
struct Cont(Option<Arc<Cell>>);

impl Cont {
    fn push(self, goal: Goal) -> Cont {
        Cont(Some(Arc::new(Cell { goal, next: self })))
    }
}

struct ChoicePoint {
    owner: usize,
    next_clause: usize,
    cont: Cont,
    trail_len: usize,
    slots_len: u32,
}

enum State {
    Start,
    Running,
    Backtrack,
    Done(Outcome),
    Failed(EngineError),
}

/// One resolution run of a query against a program.
pub struct Solver<'p> {
    program: &'p Program,
    query: Atom,
    query_vars: Vec<Var>,
    bounds: Bounds,
    options: SolveOptions,
    store: Store,
    vars: VarSource,
    nodes: Vec<Node>,
    open: Vec<usize>,
    choices: Vec<ChoicePoint>,
    cont: Cont,
    pending: VecDeque<Output>,
    state: State,
    next_invocation: u32,
    steps: u64,
    answers: u32,
}

impl<'p> Solver<'p> {
    pub fn new(program: &'p Program, query: &Atom, bounds: Bounds, options: SolveOptions) -> Self {
        let base = query.max_serial().map_or(0, |s| s + 1);
        Solver {
            program,
            query: query.clone(),
            query_vars: query.vars(),
            bounds,
            options,
            store: Store {
                slots: alloc::vec![None; base as usize],
                trail: Vec::new(),
            },
            vars: VarSource::starting_at(base),
            nodes: Vec::new(),
            open: Vec::new(),
            choices: Vec::new(),
            cont: Cont::default(),
            pending: VecDeque::new(),
            state: State::Start,
            next_invocation: 1,
            steps: 0,
            answers: 0,
        }
    }

    /// Next event, answer, or the final outcome (repeated once reached).
    pub fn next_output(&mut self) -> Result<Output, EngineError> {
        loop {
            if let Some(out) = self.pending.pop_front() {
                return Ok(out);
            }
            match &self.state {
                State::Done(outcome) => return Ok(Output::Done(*outcome)),
                State::Failed(e) => return Err(e.clone()),
                _ => {}
            }
            if let Err(e) = self.advance() {
                self.state = State::Failed(e);
            }
        }
    }

    /// Skips events up to the next answer; `None` once the run is over.
    pub fn next_solution(&mut self) -> Result<Option<Solution>, EngineError> {
        loop {
            match self.next_output()? {
                Output::Answer(s) => return Ok(Some(s)),
                Output::Done(_) => return Ok(None),
                Output::Event(_) => {}
            }
        }
    }

    /// The outcome, once the run has ended.
    pub fn outcome(&self) -> Option<Outcome> {
        match self.state {
            State::Done(o) => Some(o),
            _ => None,
        }
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    fn advance(&mut self) -> Result<(), EngineError> {
        match self.state {
            State::Start => {
                self.cont = Cont::default().push(Goal::Call {
                    atom: self.query.clone(),
                    parent: None,
                });
                self.state = State::Running;
                Ok(())
            }
            State::Running => self.step(),
            State::Backtrack => self.backtrack(),
            State::Done(_) | State::Failed(_) => Ok(()),
        }
    }

    fn step(&mut self) -> Result<(), EngineError> {
        let Some(cell) = self.cont.0.clone() else {
            self.answer();
            return Ok(());
        };
        self.cont = cell.next.clone();
        match &cell.goal {
            Goal::Exit(n) => {
                let n = *n;
                self.nodes[n].status = Status::Exited;
                debug_assert_eq!(self.open.last(), Some(&n));
                self.open.pop();
                self.emit(n, Port::Exit);
                Ok(())
            }
            Goal::Call { atom, parent } => self.call(atom.clone(), *parent),
        }
    }

    fn answer(&mut self) {
        self.answers += 1;
        if self.answers > self.bounds.max_answers {
            self.state = State::Done(Outcome::Truncated(Bound::Answers));
            return;
        }
        let substitution = Substitution::from_pairs(
            self.query_vars
                .iter()
                .map(|v| (v.clone(), resolve(&self.store, &Term::Var(v.clone())))),
        );
        let atom = resolve_atom(&self.store, &self.query);
        let proof = self.options.build_proofs.then(|| self.proof(0));
        self.pending.push_back(Output::Answer(Solution {
            answer: Answer { substitution, atom },
            proof,
        }));
        self.state = State::Backtrack;
    }

    fn proof(&self, n: usize) -> ProofTree {
        let node = &self.nodes[n];
        let atom = resolve_atom(&self.store, &node.atom);
        ProofTree {
            call: node.call.clone().unwrap_or_else(|| atom.clone()),
            atom,
            rule: match &node.clause {
                Some(c) => Rule::Clause(c.clone()),
                None => Rule::Builtin,
            },
            children: node.children.iter().map(|&c| self.proof(c)).collect(),
        }
    }

    fn call(&mut self, atom: Atom, parent: Option<usize>) -> Result<(), EngineError> {
        self.steps += 1;
        if self.steps > self.bounds.max_steps {
            self.state = State::Done(Outcome::Truncated(Bound::Steps));
            return Ok(());
        }
        let depth = parent.map_or(1, |p| self.nodes[p].depth + 1);
        if depth > self.bounds.max_depth {
            self.state = State::Done(Outcome::Truncated(Bound::Depth));
            return Ok(());
        }
        let id = self.nodes.len();
        let keep_call = self.options.record_events || self.options.build_proofs;
        let builtin = atom.is_builtin();
        let resolved = (builtin || keep_call).then(|| resolve_atom(&self.store, &atom));
        self.nodes.push(Node {
            atom,
            call: if keep_call { resolved.clone() } else { None },
            parent,
            depth,
            invocation: None,
            status: Status::Open,
            clause: None,
            children: Vec::new(),
        });
        if let Some(p) = parent {
            self.nodes[p].children.push(id);
        }

        if builtin {
            self.nodes[id].status = Status::Exited;
            if !eval_builtin_with(resolved.as_ref().unwrap(), &self.options)? {
                self.state = State::Backtrack;
            }
            return Ok(());
        }

        self.nodes[id].invocation = Some(self.next_invocation);
        self.next_invocation += 1;
        self.open.push(id);
        self.emit(id, Port::Call);
        let key = self.nodes[id].atom.key();
        if !self.program.defines(&key) {
            return Err(EngineError::UnknownPredicate { key });
        }
        let rest = self.cont.clone();
        self.try_clauses(id, 0, rest);
        Ok(())
    }

    /// Does clause `i` of the goal's procedure have a head unifying with the goal?
    fn head_unifies(&mut self, goal: &Atom, i: usize) -> bool {
        let clause = self.program.nth_clause(&goal.key(), i).unwrap();
        let (trail_len, slots_len) = (self.store.trail.len(), self.vars.peek());
        let renamed = clause.rename_apart(&mut self.vars);
        let ok = unify_atoms_in(&mut self.store, goal, &renamed.head, self.options.occurs_check);
        self.store.undo_to(trail_len, slots_len as usize);
        self.vars = VarSource::starting_at(slots_len);
        ok
    }

    fn try_clauses(&mut self, id: usize, from: usize, rest: Cont) {
        let goal = self.nodes[id].atom.clone();
        let key = goal.key();
        let count = self.program.procedure_len(&key);
        let Some(first) = (from..count).find(|&i| self.head_unifies(&goal, i)) else {
            self.fail_node(id);
            self.state = State::Backtrack;
            return;
        };
        if let Some(next) = (first + 1..count).find(|&j| self.head_unifies(&goal, j)) {
            self.choices.push(ChoicePoint {
                owner: id,
                next_clause: next,
                cont: rest.clone(),
                trail_len: self.store.trail.len(),
                slots_len: self.vars.peek(),
            });
        }
        let clause = self.program.nth_clause(&key, first).unwrap().rename_apart(&mut self.vars);
        let unified = unify_atoms_in(&mut self.store, &goal, &clause.head, self.options.occurs_check);
        debug_assert!(unified);
        self.nodes[id].clause = Some(clause.origin.clone());
        let mut cont = rest.push(Goal::Exit(id));
        for b in clause.body.into_iter().rev() {
            cont = cont.push(Goal::Call {
                atom: b,
                parent: Some(id),
            });
        }
        self.cont = cont;
        self.state = State::Running;
    }

    fn fail_node(&mut self, id: usize) {
        self.emit(id, Port::Fail);
        self.nodes[id].status = Status::Closed;
        if self.open.last() == Some(&id) {
            self.open.pop();
        }
    }

    fn backtrack(&mut self) -> Result<(), EngineError> {
        let Some(cp) = self.choices.pop() else {
            while let Some(n) = self.open.pop() {
                self.emit(n, Port::Fail);
                self.nodes[n].status = Status::Closed;
            }
            self.state = State::Done(Outcome::Exhausted);
            return Ok(());
        };
        let owner = cp.owner;
        while let Some(&n) = self.open.last() {
            if n <= owner {
                break;
            }
            self.open.pop();
            self.emit(n, Port::Fail);
            self.nodes[n].status = Status::Closed;
        }
        let mut chain = Vec::new();
        let mut cur = Some(owner);
        while let Some(n) = cur {
            chain.push(n);
            cur = self.nodes[n].parent;
        }
        chain.reverse();
        for &n in &chain {
            if self.nodes[n].status == Status::Exited {
                self.emit(n, Port::Redo);
                self.nodes[n].status = Status::Open;
            }
        }
        self.open = chain.clone();

        self.store.undo_to(cp.trail_len, cp.slots_len as usize);
        self.vars = VarSource::starting_at(cp.slots_len);
        self.nodes.truncate(owner + 1);
        for &n in &chain {
            self.nodes[n].children.retain(|&c| c <= owner);
        }
        self.nodes[owner].children.clear();
        self.nodes[owner].clause = None;
        self.cont = cp.cont.clone();
        self.try_clauses(owner, cp.next_clause, cp.cont);
        Ok(())
    }

    fn emit(&mut self, n: usize, port: Port) {
        if !self.options.record_events {
            return;
        }
        let node = &self.nodes[n];
        let Some(invocation) = node.invocation else {
            return;
        };
        let goal = match (port, &node.call) {
            (Port::Call | Port::Fail, Some(call)) => call.clone(),
            _ => resolve_atom(&self.store, &node.atom),
        };
        let (parent, within) = match node.parent {
            Some(p) => (self.nodes[p].invocation, self.nodes[p].clause.clone()),
            None => (None, None),
        };
        self.pending.push_back(Output::Event(TraceEvent {
            invocation,
            depth: node.depth,
            port,
            goal,
            parent,
            within,
        }));
    }
}

/// Everything one run produced.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolveResult {
    pub solutions: Vec<Solution>,
    pub events: Vec<TraceEvent>,
    pub outcome: Outcome,
}

impl SolveResult {
    pub fn answers(&self) -> impl Iterator<Item = &Answer> {
        self.solutions.iter().map(|s| &s.answer)
    }
}

/// Runs a query to the end (or to a bound).
pub fn solve(program: &Program, query: &Atom, bounds: Bounds, options: SolveOptions) -> Result<SolveResult, EngineError> {
    let mut solver = Solver::new(program, query, bounds, options);
    let mut solutions = Vec::new();
    let mut events = Vec::new();
    loop {
        match solver.next_output()? {
            Output::Event(e) => events.push(e),
            Output::Answer(s) => solutions.push(s),
            Output::Done(outcome) => {
                return Ok(SolveResult {
                    solutions,
                    events,
                    outcome,
                })
            }
        }
    }
}

/// Re-runs the query and returns the derivation of the given answer.
pub fn proof_tree(
    program: &Program,
    query: &Atom,
    answer: &Atom,
    bounds: Bounds,
    occurs_check: bool,
) -> Result<ProofTree, EngineError> {
    let options = SolveOptions {
        occurs_check,
        record_events: false,
        ..SolveOptions::default()
    };
    let mut solver = Solver::new(program, query, bounds, options);
    while let Some(s) = solver.next_solution()? {
        if s.answer.atom.is_variant_of(answer) {
            return Ok(s.proof.unwrap());
        }
    }
    Err(EngineError::AnswerNotFound { answer: answer.clone() })
}

/// Replays the clause choices recorded in a proof tree against the query.
/// Returns the answer substitution they produce, or `None` if the recorded
/// derivation does not go through.
pub fn replay_proof(program: &Program, query: &Atom, tree: &ProofTree) -> Option<Substitution> {
    struct Replay<'a> {
        program: &'a Program,
        store: alloc::collections::BTreeMap<Var, Term>,
        vars: VarSource,
    }

    impl Replay<'_> {
        fn go(&mut self, goal: &Atom, node: &ProofTree) -> bool {
            match &node.rule {
                Rule::Builtin => {
                    node.children.is_empty()
                        && eval_builtin(&resolve_atom(&self.store, goal)).unwrap_or(false)
                }
                Rule::Clause(origin) => {
                    let Some(clause) = self.program.clause(origin) else {
                        return false;
                    };
                    if clause.head.key() != goal.key() {
                        return false;
                    }
                    let renamed = clause.rename_apart(&mut self.vars);
                    if !unify_atoms_in(&mut self.store, goal, &renamed.head, true)
                        || renamed.body.len() != node.children.len()
                    {
                        return false;
                    }
                    renamed
                        .body
                        .iter()
                        .zip(node.children.iter())
                        .all(|(b, child)| self.go(b, child))
                }
            }
        }
    }

    let mut r = Replay {
        program,
        store: alloc::collections::BTreeMap::new(),
        vars: VarSource::starting_at(query.max_serial().map_or(0, |s| s + 1)),
    };
    if !r.go(query, tree) {
        return None;
    }
    let vars = query.vars();
    Some(Substitution::from_pairs(
        vars.iter().map(|v| (v.clone(), resolve(&r.store, &Term::Var(v.clone())))),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_program, parse_query};
    use alloc::string::{String, ToString};
    use alloc::vec;

    const INC: &str = "isort([X|Xs],Ys) :- isort(Xs,Zs), insert(X,Zs,Ys).
isort([],[]).
insert(X,[],[X]).
insert(X,[Y|Ys],[X,Y|Ys]) :- X =< Y.
insert(X,[Y|Ys],[Y|Zs]) :- Y > X, insert(X,Ys,Zs).
";

    fn answers(src: &str, q: &str) -> Vec<String> {
        let p = parse_program(src).unwrap();
        let q = parse_query(q).unwrap();
        let r = solve(&p, &q, Bounds::default(), SolveOptions::default()).unwrap();
        r.answers().map(|a| a.atom.to_string()).collect()
    }

    #[test]
    fn builtin_comparisons() {
        let a = |s: &str| eval_builtin(&parse_query(s).unwrap());
        assert_eq!(a("2 =< 3"), Ok(true));
        assert_eq!(a("3 > 1"), Ok(true));
        assert_eq!(a("1 > 2"), Ok(false));
        assert_eq!(a("1 >= 1"), Ok(true));
        assert_eq!(a("1 =:= 2"), Ok(false));
        assert_eq!(a("1 =\\= 2"), Ok(true));
        assert!(matches!(a("X > 2"), Err(EngineError::Instantiation { .. })));
        assert!(matches!(a("a > 2"), Err(EngineError::Type { .. })));
        assert_eq!(a("integer(3)"), Ok(true));
        assert_eq!(a("integer(X)"), Ok(false));
    }

    #[test]
    fn insert_has_two_answers_under_the_buggy_guard() {
        assert_eq!(answers(INC, "insert(1,[3],Z)"), vec!["insert(1,[3],[1,3])", "insert(1,[3],[3,1])"]);
    }

    #[test]
    fn first_answer_is_the_wrong_one() {
        let got = answers(INC, "isort([2,1,3],L)");
        assert_eq!(got[0], "isort([2,1,3],[2,3,1])");
    }

    #[test]
    fn empty_list_sorts_once() {
        assert_eq!(answers(INC, "isort([],L)"), vec!["isort([],[])"]);
    }

    #[test]
    fn arithmetic_error_is_not_failure() {
        let p = parse_program("p(X) :- X > 1.").unwrap();
        let q = parse_query("p(Y)").unwrap();
        let err = solve(&p, &q, Bounds::default(), SolveOptions::default()).unwrap_err();
        assert!(matches!(err, EngineError::Instantiation { .. }));
    }

    #[test]
    fn unknown_predicate_is_reported() {
        let p = parse_program("p :- q.").unwrap();
        let q = parse_query("p").unwrap();
        let err = solve(&p, &q, Bounds::default(), SolveOptions::default()).unwrap_err();
        assert_eq!(err, EngineError::UnknownPredicate { key: PredKey::new("q", 0) });
    }

    #[test]
    fn bounds_truncate_instead_of_failing() {
        let p = parse_program("nat(0).\nnat(s(X)) :- nat(X).").unwrap();
        let q = parse_query("nat(N)").unwrap();
        let b = Bounds::new(512, 3, 1_000_000).unwrap();
        let r = solve(&p, &q, b, SolveOptions::default()).unwrap();
        assert_eq!(r.solutions.len(), 3);
        assert_eq!(r.outcome, Outcome::Truncated(Bound::Answers));

        let loop_ = parse_program("p :- p.").unwrap();
        let r = solve(&loop_, &parse_query("p").unwrap(), Bounds::new(50, 1, 1000).unwrap(), SolveOptions::default())
            .unwrap();
        assert_eq!(r.outcome, Outcome::Truncated(Bound::Depth));
        let r = solve(&loop_, &parse_query("p").unwrap(), Bounds::new(5000, 1, 100).unwrap(), SolveOptions::default())
            .unwrap();
        assert_eq!(r.outcome, Outcome::Truncated(Bound::Steps));
    }

    #[test]
    fn exactly_max_answers_is_not_truncated() {
        let p = parse_program("c(a).\nc(b).").unwrap();
        let r = solve(&p, &parse_query("c(X)").unwrap(), Bounds::new(10, 2, 100).unwrap(), SolveOptions::default())
            .unwrap();
        assert_eq!(r.outcome, Outcome::Exhausted);
    }

    #[test]
    fn event_line_format() {
        let e = TraceEvent {
            invocation: 4,
            depth: 2,
            port: Port::Exit,
            goal: parse_query("insert(2,[3,1],[2,3,1])").unwrap(),
            parent: Some(1),
            within: None,
        };
        assert_eq!(e.to_string(), "4      2 Exit: insert(2,[3,1],[2,3,1])");
    }

    #[test]
    fn deterministic_call_has_no_redo() {
        let p = parse_program(INC).unwrap();
        let r = solve(&p, &parse_query("isort([],L)").unwrap(), Bounds::default(), SolveOptions::default()).unwrap();
        let lines: Vec<String> = r.events.iter().map(|e| e.to_string()).collect();
        assert_eq!(lines, vec!["1      1 Call: isort([],L)", "1      1 Exit: isort([],[])"]);
    }

    #[test]
    fn proof_tree_of_the_wrong_answer() {
        let p = parse_program(INC).unwrap();
        let q = parse_query("isort([2,1,3],L)").unwrap();
        let t = proof_tree(&p, &q, &parse_query("isort([2,1,3],[2,3,1])").unwrap(), Bounds::default(), true).unwrap();
        let kids: Vec<String> = t.children.iter().map(|c| c.atom.to_string()).collect();
        assert_eq!(kids, vec!["isort([1,3],[3,1])", "insert(2,[3,1],[2,3,1])"]);
        let bad = t.at(&[0, 1]).unwrap();
        assert_eq!(bad.atom.to_string(), "insert(1,[3],[3,1])");
        let leaves: Vec<String> = bad.children.iter().map(|c| c.atom.to_string()).collect();
        assert_eq!(leaves, vec!["3>1", "insert(1,[],[1])"]);
        assert!(bad.children[0].is_builtin());
        assert_eq!(bad.rule, Rule::Clause(p.nth_clause(&PredKey::new("insert", 3), 2).unwrap().origin.clone()));

        let fact = proof_tree(&p, &parse_query("isort([],L)").unwrap(), &parse_query("isort([],[])").unwrap(), Bounds::default(), true)
            .unwrap();
        assert_eq!(fact.size(), 1);
    }

    #[test]
    fn proof_tree_for_non_answer_is_an_error() {
        let p = parse_program(INC).unwrap();
        let q = parse_query("isort([2,1,3],L)").unwrap();
        let err = proof_tree(&p, &q, &parse_query("isort([2,1,3],[1,2,3])").unwrap(), Bounds::default(), true);
        assert!(matches!(err, Err(EngineError::AnswerNotFound { .. })));
    }

    #[test]
    fn replaying_a_proof_reproduces_the_answer() {
        let p = parse_program(INC).unwrap();
        let q = parse_query("isort([2,1,3],L)").unwrap();
        let r = solve(&p, &q, Bounds::default(), SolveOptions::default()).unwrap();
        for s in &r.solutions {
            let replayed = replay_proof(&p, &q, s.proof.as_ref().unwrap()).unwrap();
            assert_eq!(replayed.apply_atom(&q), s.answer.atom);
        }
    }
}
