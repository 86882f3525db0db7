//! Locating errors.
//!
//! Wrong answers lead to an incorrect clause instance: a node of the answer's
//! proof tree that the oracle judges incorrect while all its children are
//! correct. Missing answers lead to an uncovered atom: a failing or
//! incomplete call none of whose direct subgoal calls is itself failing or
//! incomplete.
//!
//! Three searches find incorrect clause instances: descent along success
//! traces, an eager scan of the event stream that jumps into the first
//! incorrect answer, and proof-tree browsing (by a person through
//! [`TreeBrowser`], or automatically). One search finds uncovered atoms.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::engine::{eval_builtin, proof_tree, Answer, Bound, Bounds, EngineError, Output, Port, ProofTree, Rule, SolveOptions, Solver};
use crate::program::{Clause, Program};
use crate::spec::{Asked, Oracle, OracleError, Question, Reply, Specification};
use crate::term::{subsumes, Atom, PredKey};
use crate::trace::TraceBuilder;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Evidence {
    FiniteFailure,
    IncompleteAnswers(Vec<Atom>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Symptom {
    WrongAnswer { query: Atom, answer: Answer },
    MissingAnswer { query: Atom, evidence: Evidence },
}

impl Symptom {
    pub fn query(&self) -> &Atom {
        match self {
            Symptom::WrongAnswer { query, .. } | Symptom::MissingAnswer { query, .. } => query,
        }
    }
}

impl fmt::Display for Symptom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symptom::WrongAnswer { query, answer } => write!(f, "wrong answer {} to {query}", answer.atom),
            Symptom::MissingAnswer {
                query,
                evidence: Evidence::FiniteFailure,
            } => write!(f, "missing answer: {query} fails"),
            Symptom::MissingAnswer {
                query,
                evidence: Evidence::IncompleteAnswers(answers),
            } => {
                write!(f, "missing answer: {query} has only")?;
                write_set(f, answers)
            }
        }
    }
}

fn write_set(f: &mut fmt::Formatter<'_>, atoms: &[Atom]) -> fmt::Result {
    f.write_str(" {")?;
    for (i, a) in atoms.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{a}")?;
    }
    f.write_str("}")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BodyInstance {
    pub atom: Atom,
    pub builtin: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    IncorrectClause {
        clause: Clause,
        head: Atom,
        body: Vec<BodyInstance>,
    },
    UncoveredAtom {
        atom: Atom,
        procedure: PredKey,
        /// A specified instance of the atom, when known.
        witness: Option<Atom>,
    },
}

impl Verdict {
    fn from_node(program: &Program, node: &ProofTree) -> Result<Verdict, DiagnoseError> {
        let Rule::Clause(origin) = &node.rule else {
            return Err(DiagnoseError::Inconclusive(format!("{} is a built-in", node.atom)));
        };
        let clause = program
            .clause(origin)
            .ok_or_else(|| DiagnoseError::Inconclusive(format!("{origin} is not in the program")))?;
        Ok(Verdict::IncorrectClause {
            clause: clause.clone(),
            head: node.atom.clone(),
            body: node
                .children
                .iter()
                .map(|c| BodyInstance {
                    atom: c.atom.clone(),
                    builtin: c.is_builtin(),
                })
                .collect(),
        })
    }

    /// `head :- b1, b2.` for incorrect clauses.
    pub fn instance_text(&self) -> Option<String> {
        let Verdict::IncorrectClause { head, body, .. } = self else {
            return None;
        };
        let mut s = format!("{head}");
        for (i, b) in body.iter().enumerate() {
            s.push_str(if i == 0 { " :- " } else { ", " });
            s.push_str(&format!("{}", b.atom));
        }
        s.push('.');
        Some(s)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::IncorrectClause { clause, .. } => {
                writeln!(f, "incorrect clause: {}, line {}", clause.origin, clause.origin.line)?;
                writeln!(f, "  {clause}")?;
                writeln!(f, "instance:")?;
                write!(f, "  {}", self.instance_text().unwrap_or_default())
            }
            Verdict::UncoveredAtom {
                atom,
                procedure,
                witness,
            } => {
                writeln!(f, "uncovered atom: {atom}")?;
                write!(f, "procedure: {procedure}")?;
                if let Some(w) = witness {
                    write!(f, "\nspecified instance: {w}")?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Move {
    Child,
    Left,
    Right,
    Parent,
}

impl Move {
    pub const ALL: [Move; 4] = [Move::Child, Move::Left, Move::Right, Move::Parent];

    pub fn symbol(&self) -> &'static str {
        match self {
            Move::Child => "v",
            Move::Left => "<",
            Move::Right => ">",
            Move::Parent => "^",
        }
    }

    pub fn parse(s: &str) -> Option<Move> {
        Self::ALL.into_iter().find(|m| m.symbol() == s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Judgment {
    Correct,
    Incorrect,
}

impl Judgment {
    pub fn as_str(&self) -> &'static str {
        match self {
            Judgment::Correct => "correct",
            Judgment::Incorrect => "incorrect",
        }
    }
}

/// One line of a diagnosis transcript.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Step {
    Symptom(Symptom),
    Ask(Asked),
    Descend { call: Atom, answer: Option<Atom> },
    Move { mv: Move, to: Atom },
    Judge { atom: Atom, judgment: Judgment },
    ShowError,
    Verdict(Verdict),
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Step::Symptom(s) => write!(f, "symptom: {s}"),
            Step::Ask(a) => {
                write!(f, "ask {} | {}", a.question, a.answered.reply)?;
                if !a.fresh {
                    f.write_str(" (cached)")?;
                }
                Ok(())
            }
            Step::Descend { call, answer: Some(a) } => write!(f, "descend: {call} -> {a}"),
            Step::Descend { call, answer: None } => write!(f, "descend: {call}"),
            Step::Move { mv, to } => write!(f, "move {}: {to}", mv.symbol()),
            Step::Judge { atom, judgment } => write!(f, "judge {}: {atom}", judgment.as_str()),
            Step::ShowError => f.write_str("show error"),
            Step::Verdict(v) => write!(f, "verdict: {v}"),
        }
    }
}

/// Transcript text, one step per line.
pub fn transcript_text(steps: &[Step]) -> String {
    let mut s = String::new();
    for step in steps {
        s.push_str(&format!("{step}\n"));
    }
    s
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TreeError {
    NoSuchMove(Move),
    /// The node already carries the opposite judgment.
    Conflict { atom: Atom },
    BuiltinIncorrect { atom: Atom },
    RootCorrect,
    /// Show-error before every non-built-in child of the focus is judged
    /// correct.
    Unjudged { children: Vec<Atom> },
    Finished,
}

impl fmt::Display for TreeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TreeError::NoSuchMove(m) => write!(f, "move {} is not available here", m.symbol()),
            TreeError::Conflict { atom } => write!(f, "{atom} was already judged the other way"),
            TreeError::BuiltinIncorrect { atom } => write!(f, "built-in {atom} is true and cannot be incorrect"),
            TreeError::RootCorrect => f.write_str("the root is the symptom and cannot be judged correct"),
            TreeError::Unjudged { children } => {
                f.write_str("children not yet judged correct:")?;
                for c in children {
                    write!(f, " {c}")?;
                }
                Ok(())
            }
            TreeError::Finished => f.write_str("the diagnosis is finished"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DiagnoseError {
    NotASymptom(Atom),
    Inconclusive(String),
    Truncated(Bound),
    Engine(EngineError),
    Oracle(OracleError),
    Tree(TreeError),
}

impl fmt::Display for DiagnoseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DiagnoseError::NotASymptom(q) => write!(f, "{q} shows no symptom"),
            DiagnoseError::Inconclusive(m) => write!(f, "inconclusive: {m}"),
            DiagnoseError::Truncated(b) => {
                write!(f, "search truncated at {b}: missing and undiscovered answers cannot be told apart")
            }
            DiagnoseError::Engine(e) => write!(f, "{e}"),
            DiagnoseError::Oracle(e) => write!(f, "{e}"),
            DiagnoseError::Tree(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for DiagnoseError {}

impl From<EngineError> for DiagnoseError {
    fn from(e: EngineError) -> Self {
        DiagnoseError::Engine(e)
    }
}

impl From<OracleError> for DiagnoseError {
    fn from(e: OracleError) -> Self {
        DiagnoseError::Oracle(e)
    }
}

impl From<TreeError> for DiagnoseError {
    fn from(e: TreeError) -> Self {
        DiagnoseError::Tree(e)
    }
}

// ---------------------------------------------------------------------------
// Proof-tree browsing

/// Navigation state over one proof tree. The root is the symptom and starts
/// out incorrect; judging another node incorrect moves the focus there.
#[derive(Clone, Debug)]
pub struct TreeBrowser {
    program: Program,
    tree: ProofTree,
    cursor: Vec<usize>,
    focus: Vec<usize>,
    judgments: BTreeMap<Vec<usize>, Judgment>,
    transcript: Vec<Step>,
    verdict: Option<Verdict>,
}

impl TreeBrowser {
    pub fn new(program: &Program, tree: ProofTree) -> Self {
        let mut judgments = BTreeMap::new();
        judgments.insert(Vec::new(), Judgment::Incorrect);
        TreeBrowser {
            program: program.clone(),
            tree,
            cursor: Vec::new(),
            focus: Vec::new(),
            judgments,
            transcript: Vec::new(),
            verdict: None,
        }
    }

    pub fn tree(&self) -> &ProofTree {
        &self.tree
    }

    pub fn cursor(&self) -> &[usize] {
        &self.cursor
    }

    pub fn focus(&self) -> &[usize] {
        &self.focus
    }

    pub fn current(&self) -> &ProofTree {
        self.tree.at(&self.cursor).expect("cursor addresses a node")
    }

    pub fn judgment(&self, path: &[usize]) -> Option<Judgment> {
        self.judgments.get(path).copied()
    }

    pub fn judgments(&self) -> impl Iterator<Item = (&Vec<usize>, &Judgment)> {
        self.judgments.iter()
    }

    pub fn verdict(&self) -> Option<&Verdict> {
        self.verdict.as_ref()
    }

    pub fn transcript(&self) -> &[Step] {
        &self.transcript
    }

    pub fn record(&mut self, step: Step) {
        self.transcript.push(step);
    }

    fn siblings(&self) -> usize {
        match self.cursor.split_last() {
            Some((_, parent)) => self.tree.at(parent).map_or(0, |p| p.children.len()),
            None => 1,
        }
    }

    /// Moves available at the cursor.
    pub fn moves(&self) -> Vec<Move> {
        let mut out = Vec::new();
        if !self.current().children.is_empty() {
            out.push(Move::Child);
        }
        if let Some(&i) = self.cursor.last() {
            if i > 0 {
                out.push(Move::Left);
            }
            if i + 1 < self.siblings() {
                out.push(Move::Right);
            }
            out.push(Move::Parent);
        }
        out
    }

    pub fn go(&mut self, mv: Move) -> Result<(), TreeError> {
        self.live()?;
        if !self.moves().contains(&mv) {
            return Err(TreeError::NoSuchMove(mv));
        }
        match mv {
            Move::Child => self.cursor.push(0),
            Move::Left => *self.cursor.last_mut().unwrap() -= 1,
            Move::Right => *self.cursor.last_mut().unwrap() += 1,
            Move::Parent => {
                self.cursor.pop();
            }
        }
        let to = self.current().atom.clone();
        self.transcript.push(Step::Move { mv, to });
        Ok(())
    }

    /// Judges the node under the cursor.
    pub fn judge(&mut self, judgment: Judgment) -> Result<(), TreeError> {
        self.live()?;
        let node = self.current();
        let atom = node.atom.clone();
        if node.is_builtin() && judgment == Judgment::Incorrect {
            return Err(TreeError::BuiltinIncorrect { atom });
        }
        if self.cursor.is_empty() && judgment == Judgment::Correct {
            return Err(TreeError::RootCorrect);
        }
        match self.judgments.get(&self.cursor) {
            Some(j) if *j != judgment => return Err(TreeError::Conflict { atom }),
            _ => {}
        }
        self.judgments.insert(self.cursor.clone(), judgment);
        if judgment == Judgment::Incorrect {
            self.focus = self.cursor.clone();
        }
        self.transcript.push(Step::Judge { atom, judgment });
        Ok(())
    }

    /// Children of the focus node still lacking a `correct` judgment.
    pub fn unjudged(&self) -> Vec<Atom> {
        let focus = self.tree.at(&self.focus).unwrap();
        focus
            .children
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_builtin())
            .filter(|(i, _)| {
                let mut p = self.focus.clone();
                p.push(*i);
                self.judgments.get(&p) != Some(&Judgment::Correct)
            })
            .map(|(_, c)| c.atom.clone())
            .collect()
    }

    /// Reports the focus node's clause instance, once all its children are
    /// known to be correct.
    pub fn show_error(&mut self) -> Result<&Verdict, TreeError> {
        self.live()?;
        let children = self.unjudged();
        if !children.is_empty() {
            return Err(TreeError::Unjudged { children });
        }
        let focus = self.tree.at(&self.focus).unwrap();
        let verdict = Verdict::from_node(&self.program, focus).map_err(|_| TreeError::Finished)?;
        self.transcript.push(Step::ShowError);
        self.transcript.push(Step::Verdict(verdict.clone()));
        self.verdict = Some(verdict);
        Ok(self.verdict.as_ref().unwrap())
    }

    fn live(&self) -> Result<(), TreeError> {
        if self.verdict.is_some() {
            Err(TreeError::Finished)
        } else {
            Ok(())
        }
    }
}

// ---------------------------------------------------------------------------
// The searches

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnosis {
    pub verdict: Verdict,
    /// Atoms the search descended through, symptom first.
    pub path: Vec<Atom>,
    pub transcript: Vec<Step>,
}

/// Runs diagnoses of one program against one oracle.
pub struct Diagnoser<'a> {
    program: &'a Program,
    oracle: &'a mut Oracle,
    bounds: Bounds,
    occurs_check: bool,
    transcript: Vec<Step>,
    path: Vec<Atom>,
}

impl<'a> Diagnoser<'a> {
    pub fn new(program: &'a Program, oracle: &'a mut Oracle, bounds: Bounds) -> Self {
        Diagnoser {
            program,
            oracle,
            bounds,
            occurs_check: true,
            transcript: Vec::new(),
            path: Vec::new(),
        }
    }

    pub fn occurs_check(mut self, on: bool) -> Self {
        self.occurs_check = on;
        self
    }

    /// Steps so far; still available after an error.
    pub fn transcript(&self) -> &[Step] {
        &self.transcript
    }

    pub fn oracle(&self) -> &Oracle {
        self.oracle
    }

    fn ask(&mut self, q: Question) -> Result<Reply, DiagnoseError> {
        let asked = self.oracle.ask(q)?;
        let reply = asked.answered.reply;
        self.transcript.push(Step::Ask(asked));
        Ok(reply)
    }

    fn options(&self, events: bool, proofs: bool) -> SolveOptions {
        SolveOptions {
            occurs_check: self.occurs_check,
            record_events: events,
            build_proofs: proofs,
            ..SolveOptions::default()
        }
    }

    fn finish(&mut self, verdict: Verdict) -> Diagnosis {
        self.transcript.push(Step::Verdict(verdict.clone()));
        Diagnosis {
            verdict,
            path: core::mem::take(&mut self.path),
            transcript: self.transcript.clone(),
        }
    }

    /// The first answer of `query` the oracle judges incorrect.
    pub fn wrong_answer_symptom(&mut self, query: &Atom) -> Result<Symptom, DiagnoseError> {
        let mut solver = Solver::new(self.program, query, self.bounds, self.options(false, false));
        while let Some(s) = solver.next_solution()? {
            if self.ask(Question::correct(s.answer.atom.clone()))? == Reply::No {
                let symptom = Symptom::WrongAnswer {
                    query: query.clone(),
                    answer: s.answer,
                };
                self.transcript.push(Step::Symptom(symptom.clone()));
                return Ok(symptom);
            }
        }
        Err(DiagnoseError::NotASymptom(query.clone()))
    }

    /// Confirms that `query` fails or misses answers. Truncated runs are
    /// refused.
    pub fn missing_answer_symptom(&mut self, query: &Atom) -> Result<Symptom, DiagnoseError> {
        let mut solver = Solver::new(self.program, query, self.bounds, self.options(false, false));
        let mut answers = Vec::new();
        while let Some(s) = solver.next_solution()? {
            answers.push(s.answer.atom);
        }
        if let Some(crate::engine::Outcome::Truncated(b)) = solver.outcome() {
            return Err(DiagnoseError::Truncated(b));
        }
        let evidence = if answers.is_empty() {
            match self.ask(Question::satisfiable(query.clone()))? {
                Reply::Yes => Evidence::FiniteFailure,
                Reply::No => return Err(DiagnoseError::NotASymptom(query.clone())),
                Reply::Deferred => match self.ask(Question::complete(query.clone(), Vec::new()))? {
                    Reply::No => Evidence::FiniteFailure,
                    Reply::Yes => return Err(DiagnoseError::NotASymptom(query.clone())),
                    Reply::Deferred => return Err(DiagnoseError::Inconclusive(format!("no judgment on {query}"))),
                },
            }
        } else {
            match self.ask(Question::complete(query.clone(), answers.clone()))? {
                Reply::No => Evidence::IncompleteAnswers(answers),
                Reply::Yes => return Err(DiagnoseError::NotASymptom(query.clone())),
                Reply::Deferred => return Err(DiagnoseError::Inconclusive(format!("no judgment on {query}"))),
            }
        };
        let symptom = Symptom::MissingAnswer {
            query: query.clone(),
            evidence,
        };
        self.transcript.push(Step::Symptom(symptom.clone()));
        Ok(symptom)
    }

    fn wrong(symptom: &Symptom) -> Result<(&Atom, &Answer), DiagnoseError> {
        match symptom {
            Symptom::WrongAnswer { query, answer } => Ok((query, answer)),
            Symptom::MissingAnswer { query, .. } => Err(DiagnoseError::NotASymptom(query.clone())),
        }
    }

    /// Descent along success traces: ask about the items of the incorrect
    /// answer's success trace in body order and move into the first
    /// incorrect one, until every item is correct.
    pub fn success_trace_descent(&mut self, symptom: &Symptom) -> Result<Diagnosis, DiagnoseError> {
        let (query, answer) = Self::wrong(symptom)?;
        let tree = proof_tree(self.program, query, &answer.atom, self.bounds, self.occurs_check)?;
        let mut node = &tree;
        self.path.push(node.atom.clone());
        'descend: loop {
            let mut deferred = false;
            for child in node.children.iter().filter(|c| !c.is_builtin()) {
                match self.ask(Question::correct(child.atom.clone()))? {
                    Reply::No => {
                        self.transcript.push(Step::Descend {
                            call: child.call.clone(),
                            answer: Some(child.atom.clone()),
                        });
                        self.path.push(child.atom.clone());
                        node = child;
                        continue 'descend;
                    }
                    Reply::Deferred => deferred = true,
                    Reply::Yes => {}
                }
            }
            if deferred {
                return Err(DiagnoseError::Inconclusive(format!("unjudged items below {}", node.atom)));
            }
            let verdict = Verdict::from_node(self.program, node)?;
            return Ok(self.finish(verdict));
        }
    }

    /// Eager scan: while the query runs, every answer of a direct subgoal is
    /// judged as soon as it appears, and the first incorrect one is
    /// diagnosed at once through its call. With `from_answer` the scan
    /// starts from the incorrect answer itself instead of the query.
    pub fn eager_descent(&mut self, symptom: &Symptom, from_answer: bool) -> Result<Diagnosis, DiagnoseError> {
        let (query, answer) = Self::wrong(symptom)?;
        let start = if from_answer { answer.atom.clone() } else { query.clone() };
        let target = answer.atom.clone();
        let verdict = self.eager(&start, &target)?;
        Ok(self.finish(verdict))
    }

    fn eager(&mut self, query: &Atom, target: &Atom) -> Result<Verdict, DiagnoseError> {
        self.path.push(target.clone());
        let mut solver = Solver::new(self.program, query, self.bounds, self.options(true, true));
        let mut calls: BTreeMap<u32, Atom> = BTreeMap::new();
        loop {
            match solver.next_output()? {
                Output::Event(e) if e.depth == 2 => match e.port {
                    Port::Call => {
                        calls.insert(e.invocation, e.goal.clone());
                    }
                    Port::Exit => {
                        if self.ask(Question::correct(e.goal.clone()))? == Reply::No {
                            let call = calls[&e.invocation].clone();
                            self.transcript.push(Step::Descend {
                                call: call.clone(),
                                answer: Some(e.goal.clone()),
                            });
                            return self.eager(&call, &e.goal);
                        }
                    }
                    _ => {}
                },
                Output::Event(_) => {}
                Output::Answer(s) if s.answer.atom.is_variant_of(target) => {
                    let proof = s.proof.expect("proofs are built");
                    for child in proof.children.iter().filter(|c| !c.is_builtin()) {
                        if self.ask(Question::correct(child.atom.clone()))? != Reply::Yes {
                            return Err(DiagnoseError::Inconclusive(format!("unjudged items below {target}")));
                        }
                    }
                    return Verdict::from_node(self.program, &proof);
                }
                Output::Answer(_) => {}
                Output::Done(_) => {
                    return Err(DiagnoseError::Inconclusive(format!("{target} was not reproduced")));
                }
            }
        }
    }

    /// Automatic proof-tree browsing: go down to the children of the
    /// current incorrect node, judge them left to right, enter the first
    /// incorrect one; when all are correct, show the error.
    pub fn tree_descent(&mut self, symptom: &Symptom) -> Result<Diagnosis, DiagnoseError> {
        let (query, answer) = Self::wrong(symptom)?;
        let tree = proof_tree(self.program, query, &answer.atom, self.bounds, self.occurs_check)?;
        let mut browser = TreeBrowser::new(self.program, tree);
        self.path.push(browser.current().atom.clone());
        let result = self.navigate(&mut browser);
        self.transcript.extend(browser.transcript().iter().cloned());
        let verdict = result?;
        self.path.extend(self.tree_path(&browser));
        let d = Diagnosis {
            verdict,
            path: core::mem::take(&mut self.path),
            transcript: self.transcript.clone(),
        };
        Ok(d)
    }

    fn tree_path(&self, browser: &TreeBrowser) -> Vec<Atom> {
        (1..=browser.focus().len())
            .map(|n| browser.tree().at(&browser.focus()[..n]).unwrap().atom.clone())
            .collect()
    }

    fn navigate(&mut self, browser: &mut TreeBrowser) -> Result<Verdict, DiagnoseError> {
        'node: loop {
            if browser.current().children.is_empty() {
                return Ok(browser.show_error()?.clone());
            }
            browser.go(Move::Child)?;
            let mut deferred = false;
            loop {
                let node = browser.current();
                if !node.is_builtin() {
                    let asked = self.oracle.ask(Question::correct(node.atom.clone()))?;
                    let reply = asked.answered.reply;
                    browser.record(Step::Ask(asked));
                    match reply {
                        Reply::No => {
                            browser.judge(Judgment::Incorrect)?;
                            continue 'node;
                        }
                        Reply::Yes => browser.judge(Judgment::Correct)?,
                        Reply::Deferred => deferred = true,
                    }
                }
                if browser.moves().contains(&Move::Right) {
                    browser.go(Move::Right)?;
                } else {
                    break;
                }
            }
            browser.go(Move::Parent)?;
            if deferred {
                return Err(DiagnoseError::Inconclusive(format!("unjudged children of {}", browser.current().atom)));
            }
            return Ok(browser.show_error()?.clone());
        }
    }

    /// Missing-answer descent. The direct subgoal calls of the symptom are
    /// scanned as the query runs; a call failing without answers is asked
    /// about satisfiability at once and entered if satisfiable. Only when
    /// no such call is found are answer sets asked about, in trace order.
    pub fn missing_descent(&mut self, symptom: &Symptom) -> Result<Diagnosis, DiagnoseError> {
        let Symptom::MissingAnswer { query, .. } = symptom else {
            return Err(DiagnoseError::NotASymptom(symptom.query().clone()));
        };
        let verdict = self.missing(query)?;
        Ok(self.finish(verdict))
    }

    fn missing(&mut self, query: &Atom) -> Result<Verdict, DiagnoseError> {
        self.path.push(query.clone());
        let mut solver = Solver::new(self.program, query, self.bounds, self.options(true, false));
        let mut builder = TraceBuilder::new();
        let mut deferred = Vec::new();
        let mut unsatisfiable = Vec::new();
        loop {
            match solver.next_output()? {
                Output::Event(e) => {
                    let Some(i) = builder.observe(&e) else { continue };
                    if e.port != Port::Fail || !builder.entries()[i].failed {
                        continue;
                    }
                    let call = builder.entries()[i].call.clone();
                    match self.ask(Question::satisfiable(call.clone()))? {
                        Reply::Yes => {
                            self.transcript.push(Step::Descend { call: call.clone(), answer: None });
                            return self.missing(&call);
                        }
                        Reply::No => unsatisfiable.push(i),
                        Reply::Deferred => deferred.push(i),
                    }
                }
                Output::Answer(_) => {}
                Output::Done(crate::engine::Outcome::Truncated(b)) => return Err(DiagnoseError::Truncated(b)),
                Output::Done(_) => break,
            }
        }
        let entries = builder.entries().to_vec();
        for (i, entry) in entries.iter().enumerate() {
            if unsatisfiable.contains(&i) {
                continue;
            }
            let answers: Vec<Atom> = entry.answers.iter().map(|a| a.atom.clone()).collect();
            if self.ask(Question::complete(entry.call.clone(), answers))? == Reply::No {
                self.transcript.push(Step::Descend {
                    call: entry.call.clone(),
                    answer: None,
                });
                return self.missing(&entry.call);
            }
        }
        let witness = self
            .oracle
            .log()
            .iter()
            .rev()
            .filter(|a| a.question.atom.is_variant_of(query))
            .find_map(|a| a.answered.witness.clone());
        Ok(Verdict::UncoveredAtom {
            atom: query.clone(),
            procedure: query.key(),
            witness,
        })
    }
}

// ---------------------------------------------------------------------------
// Post-hoc checks

/// Checks an incorrect-clause verdict independently of how it was found:
/// the instance is an instance of the clause, the head is incorrect, every
/// non-built-in body atom is correct and every built-in is true.
pub fn check_incorrect_clause(verdict: &Verdict, oracle: &mut Oracle) -> Result<bool, DiagnoseError> {
    let Verdict::IncorrectClause { clause, head, body } = verdict else {
        return Ok(false);
    };
    let wrap = |h: &Atom, b: &mut dyn Iterator<Item = &Atom>| {
        let mut args = alloc::vec![h.to_term()];
        args.extend(b.map(Atom::to_term));
        Atom::new("$clause", args)
    };
    let general = wrap(&clause.head, &mut clause.body.iter());
    let instance = wrap(head, &mut body.iter().map(|b| &b.atom));
    if clause.body.len() != body.len() || !subsumes(&general, &instance) {
        return Ok(false);
    }
    if oracle.ask(Question::correct(head.clone()))?.answered.reply != Reply::No {
        return Ok(false);
    }
    for b in body {
        let ok = if b.builtin {
            eval_builtin(&b.atom).unwrap_or(false)
        } else {
            oracle.ask(Question::correct(b.atom.clone()))?.answered.reply == Reply::Yes
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Finds a domain grounding of an uncovered-atom verdict that is in Sp⁰ yet
/// produced by no clause instance with its body in Sp⁰. The verdict's
/// witness is tried first.
pub fn find_uncovered_instance(
    program: &Program,
    verdict: &Verdict,
    spec: &Specification,
) -> Result<Option<Atom>, DiagnoseError> {
    let Verdict::UncoveredAtom { atom, witness, .. } = verdict else {
        return Ok(None);
    };
    let uncovered = |g: &Atom| -> Result<bool, DiagnoseError> {
        Ok(spec.in_sp0(g)? && spec.covers(program, g)? == Some(false))
    };
    if let Some(w) = witness {
        if subsumes(atom, w) && uncovered(w)? {
            return Ok(Some(w.clone()));
        }
    }
    let Some(candidates) = spec.sp0_instances(atom)? else {
        return Err(DiagnoseError::Inconclusive(format!("too many groundings of {atom}")));
    };
    for g in candidates {
        if spec.covers(program, &g)? == Some(false) {
            return Ok(Some(g));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_program, parse_query};
    use alloc::string::ToString;
    use alloc::vec;

    const INC: &str = include_str!("../../../fixtures/inc.isort.pl");
    const INS: &str = include_str!("../../../fixtures/ins.isort.pl");
    const SPEC: &str = include_str!("../../../fixtures/isort.spec.pl");

    fn q(s: &str) -> Atom {
        parse_query(s).unwrap()
    }

    fn oracle() -> Oracle {
        Oracle::from_spec(Specification::parse(SPEC).unwrap())
    }

    fn expected_instance(v: &Verdict) -> (usize, String) {
        match v {
            Verdict::IncorrectClause { clause, .. } => (clause.origin.index, v.instance_text().unwrap()),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn success_trace_descent_on_inc() {
        let p = parse_program(INC).unwrap();
        let mut o = oracle();
        let mut d = Diagnoser::new(&p, &mut o, Bounds::default());
        let s = d.wrong_answer_symptom(&q("isort([2,1,3],L)")).unwrap();
        let diag = d.success_trace_descent(&s).unwrap();
        assert_eq!(
            expected_instance(&diag.verdict),
            (3, "insert(1,[3],[3,1]) :- 3>1, insert(1,[],[1]).".to_string())
        );
        let path: Vec<String> = diag.path.iter().map(|a| a.to_string()).collect();
        assert_eq!(path, vec!["isort([2,1,3],[2,3,1])", "isort([1,3],[3,1])", "insert(1,[3],[3,1])"]);
    }

    #[test]
    fn eager_descent_enters_the_two_calls() {
        let p = parse_program(INC).unwrap();
        let mut o = oracle();
        let mut d = Diagnoser::new(&p, &mut o, Bounds::default());
        let s = d.wrong_answer_symptom(&q("isort([2,1,3],L)")).unwrap();
        let diag = d.eager_descent(&s, false).unwrap();
        assert_eq!(expected_instance(&diag.verdict).0, 3);
        let calls: Vec<String> = diag
            .transcript
            .iter()
            .filter_map(|s| match s {
                Step::Descend { call, .. } => Some(call.canonical_text()),
                _ => None,
            })
            .collect();
        assert_eq!(calls, vec!["isort([1,3],A)", "insert(1,[3],A)"]);
    }

    #[test]
    fn single_clause_program() {
        let p = parse_program("p :- q.\nq.").unwrap();
        let spec = Specification::parse(":- specify(p, 0).\n'$spec$q'.").unwrap();
        let mut o = Oracle::from_spec(spec);
        let mut d = Diagnoser::new(&p, &mut o, Bounds::default());
        let s = d.wrong_answer_symptom(&q("p")).unwrap();
        let diag = d.success_trace_descent(&s).unwrap();
        assert_eq!(diag.verdict.instance_text().unwrap(), "p :- q.");
    }

    #[test]
    fn correct_query_is_not_a_symptom() {
        let p = parse_program(INC).unwrap();
        let mut o = oracle();
        let mut d = Diagnoser::new(&p, &mut o, Bounds::default());
        assert!(matches!(d.wrong_answer_symptom(&q("isort([],L)")), Err(DiagnoseError::NotASymptom(_))));
        assert!(matches!(d.missing_answer_symptom(&q("isort([],L)")), Err(DiagnoseError::NotASymptom(_))));
    }

    #[test]
    fn browser_moves_and_errors() {
        let p = parse_program(INC).unwrap();
        let tree = proof_tree(&p, &q("isort([2,1,3],L)"), &q("isort([2,1,3],[2,3,1])"), Bounds::default(), true).unwrap();
        let mut b = TreeBrowser::new(&p, tree);
        assert_eq!(b.moves(), vec![Move::Child]);
        b.go(Move::Child).unwrap();
        assert_eq!(b.current().atom, q("isort([1,3],[3,1])"));
        assert_eq!(b.moves(), vec![Move::Child, Move::Right, Move::Parent]);
        b.go(Move::Right).unwrap();
        assert_eq!(b.go(Move::Right), Err(TreeError::NoSuchMove(Move::Right)));
        b.judge(Judgment::Correct).unwrap();
        assert!(matches!(b.judge(Judgment::Incorrect), Err(TreeError::Conflict { .. })));
        assert!(matches!(b.show_error(), Err(TreeError::Unjudged { .. })));
        b.go(Move::Parent).unwrap();
        assert_eq!(b.judge(Judgment::Correct), Err(TreeError::RootCorrect));
    }

    #[test]
    fn human_style_browsing_reaches_the_verdict() {
        let p = parse_program(INC).unwrap();
        let tree = proof_tree(&p, &q("isort([2,1,3],L)"), &q("isort([2,1,3],[2,3,1])"), Bounds::default(), true).unwrap();
        let mut b = TreeBrowser::new(&p, tree);
        b.go(Move::Child).unwrap();
        b.judge(Judgment::Incorrect).unwrap();
        b.go(Move::Child).unwrap();
        b.judge(Judgment::Correct).unwrap();
        b.go(Move::Right).unwrap();
        b.judge(Judgment::Incorrect).unwrap();
        b.go(Move::Child).unwrap();
        assert!(matches!(b.judge(Judgment::Incorrect), Err(TreeError::BuiltinIncorrect { .. })));
        b.go(Move::Right).unwrap();
        b.judge(Judgment::Correct).unwrap();
        let v = b.show_error().unwrap().clone();
        assert_eq!(v.instance_text().unwrap(), "insert(1,[3],[3,1]) :- 3>1, insert(1,[],[1]).");
        assert_eq!(b.go(Move::Parent), Err(TreeError::Finished));
    }

    #[test]
    fn missing_descent_on_ins() {
        let p = parse_program(INS).unwrap();
        let mut o = oracle();
        let mut d = Diagnoser::new(&p, &mut o, Bounds::default());
        let s = d.missing_answer_symptom(&q("isort([3,2,1],L)")).unwrap();
        let diag = d.missing_descent(&s).unwrap();
        let Verdict::UncoveredAtom { atom, procedure, witness } = &diag.verdict else {
            panic!()
        };
        assert!(atom.is_variant_of(&q("insert(1,[],B)")));
        assert_eq!(*procedure, PredKey::new("insert", 3));
        assert_eq!(witness.as_ref(), Some(&q("insert(1,[],[1])")));
        let path: Vec<String> = diag.path.iter().map(|a| a.canonical_text()).collect();
        assert_eq!(path, vec!["isort([3,2,1],A)", "isort([2,1],A)", "isort([1],A)", "insert(1,[],A)"]);
        assert_eq!(o.fresh_count(crate::spec::QuestionKind::Complete), 0);
    }

    #[test]
    fn chain_of_missing_answers() {
        let p = parse_program("q :- r.\nr :- 1 > 2.").unwrap();
        let spec = Specification::parse("'$spec$q'.\n'$spec$r'.").unwrap();
        let mut o = Oracle::from_spec(spec);
        let mut d = Diagnoser::new(&p, &mut o, Bounds::default());
        let s = d.missing_answer_symptom(&q("q")).unwrap();
        let diag = d.missing_descent(&s).unwrap();
        assert!(matches!(&diag.verdict, Verdict::UncoveredAtom { atom, .. } if *atom == q("r")));
    }

    #[test]
    fn truncation_is_refused() {
        let p = parse_program("p(X) :- p(X).").unwrap();
        let spec = Specification::parse("'$spec$p'(1).").unwrap();
        let mut o = Oracle::from_spec(spec);
        let mut d = Diagnoser::new(&p, &mut o, Bounds::new(64, 10, 10_000).unwrap());
        assert_eq!(d.missing_answer_symptom(&q("p(1)")), Err(DiagnoseError::Truncated(Bound::Depth)));
    }

    #[test]
    fn post_hoc_checks() {
        let p = parse_program(INC).unwrap();
        let mut o = oracle();
        let mut d = Diagnoser::new(&p, &mut o, Bounds::default());
        let s = d.wrong_answer_symptom(&q("isort([2,1,3],L)")).unwrap();
        let v = d.success_trace_descent(&s).unwrap().verdict;
        assert!(check_incorrect_clause(&v, &mut oracle()).unwrap());

        let ins = parse_program(INS).unwrap();
        let spec = Specification::parse(SPEC).unwrap();
        let v = Verdict::UncoveredAtom {
            atom: q("insert(1,[],B)"),
            procedure: PredKey::new("insert", 3),
            witness: None,
        };
        assert_eq!(find_uncovered_instance(&ins, &v, &spec).unwrap(), Some(q("insert(1,[],[1])")));
        let covered = Verdict::UncoveredAtom {
            atom: q("insert(1,[2],B)"),
            procedure: PredKey::new("insert", 3),
            witness: None,
        };
        assert_eq!(find_uncovered_instance(&ins, &covered, &spec).unwrap(), None);
    }
}
