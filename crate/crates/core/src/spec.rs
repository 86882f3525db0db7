//! Specifications and oracles.
//!
//! A specification file is an ordinary program. For a predicate `p/n`, the
//! clauses of `'$spec$p'/n` define the completeness set Sp⁰ and the optional
//! `'$pre$p'/n` defines a precondition. The correctness set is
//! Sp = Sp⁰ ∪ { ground atoms violating the precondition }, so Sp⁰ ⊆ Sp.
//! Built-ins have fixed meaning: an atom is in both sets iff it evaluates to
//! true.
//!
//! Questions about non-ground atoms are decided over a finite domain of
//! integers and integer lists. Where a specification can be run directly on
//! the non-ground atom and is known not to lose answers, its answers are used
//! instead of enumeration.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, VecDeque};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::engine::{eval_builtin, Bounds, EngineError, SolveOptions, Solver};
use crate::parser::{parse_program, ParseError};
use crate::program::Program;
use crate::term::{canonical_atoms, is_builtin, subsumes, unify_atoms, Atom, PredKey, Substitution, Term, Var};

pub const SPEC_PREFIX: &str = "$spec$";
pub const PRE_PREFIX: &str = "$pre$";

/// Finite grounding domain: integers in `min_int..=max_int` and proper lists
/// of those integers up to `max_len` elements.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Domain {
    pub min_int: i64,
    pub max_int: i64,
    pub max_len: u32,
    /// Largest number of groundings one question may enumerate.
    pub budget: u64,
}

impl Default for Domain {
    fn default() -> Self {
        Domain {
            min_int: -10,
            max_int: 10,
            max_len: 4,
            budget: 300_000,
        }
    }
}

impl Domain {
    pub fn int_count(&self) -> u64 {
        (self.max_int - self.min_int + 1).max(0) as u64
    }

    pub fn list_count(&self) -> u64 {
        let n = self.int_count();
        (0..=self.max_len).fold(0u64, |acc, k| acc.saturating_add(n.saturating_pow(k)))
    }

    /// Number of values one variable ranges over.
    pub fn size(&self) -> u64 {
        self.int_count().saturating_add(self.list_count())
    }

    /// The `i`-th value: integers ascending, then lists by length, each length
    /// in lexicographic order.
    pub fn value(&self, i: u64) -> Term {
        let n = self.int_count();
        if i < n {
            return Term::Int(self.min_int + i as i64);
        }
        let mut j = i - n;
        for len in 0..=self.max_len {
            let block = n.saturating_pow(len);
            if j < block {
                let mut digits = alloc::vec![0i64; len as usize];
                for d in digits.iter_mut().rev() {
                    *d = self.min_int + (j % n) as i64;
                    j /= n;
                }
                return Term::int_list(&digits);
            }
            j -= block;
        }
        panic!("domain index {i} out of range");
    }

    pub fn contains(&self, t: &Term) -> bool {
        let in_range = |t: &Term| matches!(t, Term::Int(i) if (self.min_int..=self.max_int).contains(i));
        if in_range(t) {
            return true;
        }
        let mut len = 0u32;
        let mut cur = t;
        while let Some((head, tail)) = cur.as_cons() {
            if !in_range(head) {
                return false;
            }
            len += 1;
            cur = tail;
        }
        cur.is_nil() && len <= self.max_len
    }

    /// All groundings of `atom` over the domain, last variable varying
    /// fastest; `None` if there are more than the budget allows.
    pub fn groundings(&self, atom: &Atom) -> Option<impl Iterator<Item = Atom> + '_> {
        let vars = atom.vars();
        let size = self.size();
        let total = size.checked_pow(vars.len() as u32).filter(|&t| t <= self.budget)?;
        let atom = atom.clone();
        Some((0..total).map(move |mut idx| {
            let mut pairs: Vec<(Var, Term)> = Vec::with_capacity(vars.len());
            for v in vars.iter().rev() {
                pairs.push((v.clone(), self.value(idx % size)));
                idx /= size;
            }
            Substitution::from_pairs(pairs).apply_atom(&atom)
        }))
    }

    /// Does `instance` bind every variable of `general` to a domain value?
    fn binds_within(&self, general: &Atom, instance: &Atom) -> bool {
        match unify_atoms(general, instance, true) {
            Some(theta) => general.vars().iter().all(|v| match theta.get(v) {
                Some(t) => self.contains(t),
                None => true,
            }),
            None => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SpecError {
    Parse(ParseError),
    Directive { line: usize, column: usize, message: String },
    BuiltinOverride { pred: PredKey },
}

impl fmt::Display for SpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpecError::Parse(e) => write!(f, "{e}"),
            SpecError::Directive { line, column, message } => write!(f, "{line}:{column}: {message}"),
            SpecError::BuiltinOverride { pred } => write!(f, "built-in {pred} has a fixed specification"),
        }
    }
}

impl core::error::Error for SpecError {}

impl From<ParseError> for SpecError {
    fn from(e: ParseError) -> Self {
        SpecError::Parse(e)
    }
}

/// Result of deciding a question against a specification.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decision {
    Yes { witness: Option<Atom> },
    No { witness: Option<Atom> },
    /// Too many groundings to decide within the budget.
    Unknown,
}

#[derive(Clone, Debug)]
pub struct Specification {
    program: Program,
    domain: Domain,
    bounds: Bounds,
    /// Predicates declared with `specify/2`, possibly with no clauses.
    declared: Vec<PredKey>,
}

impl Specification {
    pub fn parse(text: &str) -> Result<Self, SpecError> {
        Self::from_program(parse_program(text)?)
    }

    /// Reads `domain(Lo, Hi, MaxLen)`, `budget(N)` and `specify(Name, Arity)`
    /// directives.
    pub fn from_program(program: Program) -> Result<Self, SpecError> {
        let mut domain = Domain::default();
        let mut declared = Vec::new();
        for d in &program.directives {
            let bad = |message: String| SpecError::Directive {
                line: d.line,
                column: d.column,
                message,
            };
            let ints: Option<Vec<i64>> = d
                .atom
                .args
                .iter()
                .map(|t| match t {
                    Term::Int(i) => Some(*i),
                    _ => None,
                })
                .collect();
            if &*d.atom.name == "specify" && d.atom.arity() == 2 {
                match (&d.atom.args[0], &d.atom.args[1]) {
                    (Term::App(name, args), Term::Int(n)) if args.is_empty() && *n >= 0 => {
                        declared.push(PredKey::new(name, *n as usize));
                        continue;
                    }
                    _ => return Err(bad(format!("malformed directive {}", d.atom))),
                }
            }
            match (&*d.atom.name, ints.as_deref()) {
                ("domain", Some(&[lo, hi, len])) if lo <= hi && len >= 0 => {
                    domain.min_int = lo;
                    domain.max_int = hi;
                    domain.max_len = len as u32;
                }
                ("budget", Some(&[n])) if n > 0 => domain.budget = n as u64,
                _ => return Err(bad(format!("unknown or malformed directive {}", d.atom))),
            }
        }
        for key in program.predicates() {
            for prefix in [SPEC_PREFIX, PRE_PREFIX] {
                if let Some(base) = key.name.strip_prefix(prefix) {
                    if is_builtin(base, key.arity) {
                        return Err(SpecError::BuiltinOverride {
                            pred: PredKey::new(base, key.arity),
                        });
                    }
                }
            }
        }
        Ok(Specification {
            program,
            domain,
            bounds: Bounds::new(512, 10_000, 200_000).unwrap(),
            declared,
        })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn with_domain(mut self, domain: Domain) -> Self {
        self.domain = domain;
        self
    }

    pub fn program(&self) -> &Program {
        &self.program
    }

    /// Predicates with a completeness definition.
    pub fn specified(&self) -> Vec<PredKey> {
        let mut out: Vec<PredKey> = self
            .program
            .predicates()
            .filter_map(|k| k.name.strip_prefix(SPEC_PREFIX).map(|n| PredKey::new(n, k.arity)))
            .chain(self.declared.iter().cloned())
            .collect();
        out.sort();
        out.dedup();
        out
    }

    pub fn is_specified(&self, key: &PredKey) -> bool {
        is_builtin(&key.name, key.arity)
            || self.declared.contains(key)
            || self.program.defines(&prefixed(SPEC_PREFIX, key))
    }

    fn check_specified(&self, atom: &Atom) -> Result<(), OracleError> {
        if self.is_specified(&atom.key()) {
            Ok(())
        } else {
            Err(OracleError::Unspecified(atom.key()))
        }
    }

    fn provable(&self, goal: &Atom) -> Result<bool, OracleError> {
        if !self.program.defines(&goal.key()) {
            return Ok(false);
        }
        let mut solver = Solver::new(&self.program, goal, self.bounds, spec_options(false));
        match solver.next_solution().map_err(OracleError::Engine)? {
            Some(_) => Ok(true),
            None if solver.outcome().is_some_and(|o| o.is_truncated()) => Err(OracleError::SpecTruncated(goal.clone())),
            None => Ok(false),
        }
    }

    /// Membership of a ground atom in Sp⁰.
    pub fn in_sp0(&self, atom: &Atom) -> Result<bool, OracleError> {
        self.check_specified(atom)?;
        if atom.is_builtin() {
            return Ok(eval_builtin(atom).unwrap_or(false));
        }
        self.provable(&with_prefix(SPEC_PREFIX, atom))
    }

    /// Does a ground atom satisfy its predicate's precondition?
    pub fn precondition(&self, atom: &Atom) -> Result<bool, OracleError> {
        let goal = with_prefix(PRE_PREFIX, atom);
        if atom.is_builtin() || !self.program.defines(&goal.key()) {
            return Ok(true);
        }
        self.provable(&goal)
    }

    /// Membership of a ground atom in Sp.
    pub fn in_sp(&self, atom: &Atom) -> Result<bool, OracleError> {
        self.check_specified(atom)?;
        Ok(!self.precondition(atom)? || self.in_sp0(atom)?)
    }

    /// Every domain grounding of `atom` is in Sp. A `No` carries a grounding
    /// outside Sp.
    pub fn is_correct(&self, atom: &Atom) -> Result<Decision, OracleError> {
        self.check_specified(atom)?;
        if atom.is_ground() {
            return Ok(if self.in_sp(atom)? {
                Decision::Yes { witness: None }
            } else {
                Decision::No {
                    witness: Some(atom.clone()),
                }
            });
        }
        let Some(all) = self.domain.groundings(atom) else {
            return Ok(Decision::Unknown);
        };
        for g in all {
            if !self.in_sp(&g)? {
                return Ok(Decision::No { witness: Some(g) });
            }
        }
        Ok(Decision::Yes { witness: None })
    }

    /// Some domain grounding of `atom` is in Sp⁰. A `Yes` carries one.
    pub fn is_satisfiable(&self, atom: &Atom) -> Result<Decision, OracleError> {
        self.check_specified(atom)?;
        if atom.is_ground() {
            return Ok(if self.in_sp0(atom)? {
                Decision::Yes {
                    witness: Some(atom.clone()),
                }
            } else {
                Decision::No { witness: None }
            });
        }
        if let Some(instances) = self.direct_instances(atom) {
            for inst in &instances {
                match self.domain_grounding(atom, inst) {
                    Some(Some(g)) => return Ok(Decision::Yes { witness: Some(g) }),
                    Some(None) => {}
                    None => return self.satisfiable_by_enumeration(atom),
                }
            }
            return Ok(Decision::No { witness: None });
        }
        self.satisfiable_by_enumeration(atom)
    }

    fn satisfiable_by_enumeration(&self, atom: &Atom) -> Result<Decision, OracleError> {
        let Some(all) = self.domain.groundings(atom) else {
            return Ok(Decision::Unknown);
        };
        for g in all {
            if self.in_sp0(&g)? {
                return Ok(Decision::Yes { witness: Some(g) });
            }
        }
        Ok(Decision::No { witness: None })
    }

    /// Every domain grounding of `query` in Sp⁰ is an instance of one of
    /// `answers`. A `No` carries an uncovered grounding.
    pub fn is_answer_set_complete(&self, query: &Atom, answers: &[Atom]) -> Result<Decision, OracleError> {
        self.check_specified(query)?;
        let covered = |g: &Atom| answers.iter().any(|a| subsumes(a, g));
        if let Some(instances) = self.direct_instances(query) {
            let mut decided = true;
            for inst in instances.iter().filter(|i| !covered(i)) {
                let Some(mut all) = self.domain.groundings(inst) else {
                    decided = false;
                    break;
                };
                if let Some(g) = all.find(|g| self.domain.binds_within(query, g) && !covered(g)) {
                    return Ok(Decision::No { witness: Some(g) });
                }
            }
            if decided {
                return Ok(Decision::Yes { witness: None });
            }
        }
        let Some(all) = self.domain.groundings(query) else {
            return Ok(Decision::Unknown);
        };
        for g in all {
            if !covered(&g) && self.in_sp0(&g)? {
                return Ok(Decision::No { witness: Some(g) });
            }
        }
        Ok(Decision::Yes { witness: None })
    }

    /// Domain groundings of `atom` that are in Sp⁰; `None` if over budget.
    pub fn sp0_instances(&self, atom: &Atom) -> Result<Option<Vec<Atom>>, OracleError> {
        self.check_specified(atom)?;
        if atom.is_ground() {
            return Ok(Some(if self.in_sp0(atom)? { alloc::vec![atom.clone()] } else { Vec::new() }));
        }
        if let Some(instances) = self.direct_instances(atom) {
            let mut out = Vec::new();
            for inst in &instances {
                let Some(all) = self.domain.groundings(inst) else {
                    return Ok(None);
                };
                out.extend(all.filter(|g| self.domain.binds_within(atom, g)));
            }
            out.sort_by_key(|a| format!("{a}"));
            out.dedup();
            return Ok(Some(out));
        }
        let Some(all) = self.domain.groundings(atom) else {
            return Ok(None);
        };
        let mut out = Vec::new();
        for g in all {
            if self.in_sp0(&g)? {
                out.push(g);
            }
        }
        Ok(Some(out))
    }

    /// All answers of the completeness definition run on `atom` itself, or
    /// `None` if that run may have lost answers (a type test on an unbound
    /// variable, an error, or a bound).
    fn direct_instances(&self, atom: &Atom) -> Option<Vec<Atom>> {
        if atom.is_builtin() {
            return None;
        }
        let goal = with_prefix(SPEC_PREFIX, atom);
        if !self.program.defines(&goal.key()) {
            return Some(Vec::new());
        }
        let mut solver = Solver::new(&self.program, &goal, self.bounds, spec_options(true));
        let mut out = Vec::new();
        while let Some(s) = solver.next_solution().ok()? {
            out.push(Atom {
                name: atom.name.clone(),
                args: s.answer.atom.args.clone(),
            });
        }
        (!solver.outcome()?.is_truncated()).then_some(out)
    }

    /// A grounding of `instance` whose bindings for the variables of
    /// `general` lie in the domain. `None` if over budget.
    fn domain_grounding(&self, general: &Atom, instance: &Atom) -> Option<Option<Atom>> {
        if instance.is_ground() {
            return Some(self.domain.binds_within(general, instance).then(|| instance.clone()));
        }
        let mut all = self.domain.groundings(instance)?;
        Some(all.find(|g| self.domain.binds_within(general, g)))
    }

    /// Is `atom` produced by some clause of `program` whose body atoms can
    /// all be grounded into Sp⁰ over the domain? `None` if over budget.
    pub fn covers(&self, program: &Program, atom: &Atom) -> Result<Option<bool>, OracleError> {
        let base = atom.max_serial().map_or(0, |s| s + 1);
        for clause in program.procedure(&atom.key()) {
            let mut vars = crate::term::VarSource::starting_at(base);
            let renamed = clause.rename_apart(&mut vars);
            let Some(theta) = unify_atoms(&renamed.head, atom, true) else {
                continue;
            };
            let body: Vec<Atom> = renamed.body.iter().map(|b| theta.apply_atom(b)).collect();
            let conj = Atom::new("$body", body.iter().map(Atom::to_term).collect());
            let Some(all) = self.domain.groundings(&conj) else {
                return Ok(None);
            };
            for g in all {
                let mut ok = true;
                for arg in g.args.iter() {
                    let b = Atom::from_term(arg).expect("body atom");
                    if !self.in_sp0(&b)? {
                        ok = false;
                        break;
                    }
                }
                if ok {
                    return Ok(Some(true));
                }
            }
        }
        Ok(Some(false))
    }
}

fn spec_options(strict_type_tests: bool) -> SolveOptions {
    SolveOptions {
        strict_type_tests,
        type_errors_fail: true,
        ..SolveOptions::quiet()
    }
}

fn prefixed(prefix: &str, key: &PredKey) -> PredKey {
    PredKey::new(&format!("{prefix}{}", key.name), key.arity)
}

fn with_prefix(prefix: &str, atom: &Atom) -> Atom {
    Atom {
        name: format!("{prefix}{}", atom.name).into(),
        args: atom.args.clone(),
    }
}

// ---------------------------------------------------------------------------
// Questions and oracles

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum QuestionKind {
    Correct,
    Satisfiable,
    Complete,
}

impl QuestionKind {
    pub const ALL: [QuestionKind; 3] = [QuestionKind::Correct, QuestionKind::Satisfiable, QuestionKind::Complete];

    pub fn as_str(&self) -> &'static str {
        match self {
            QuestionKind::Correct => "correct",
            QuestionKind::Satisfiable => "satisfiable",
            QuestionKind::Complete => "complete",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == s)
    }
}

impl fmt::Display for QuestionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Question {
    pub kind: QuestionKind,
    pub atom: Atom,
    /// Listed answers; only used by `Complete`.
    pub answers: Vec<Atom>,
}

impl Question {
    pub fn correct(atom: Atom) -> Self {
        Question {
            kind: QuestionKind::Correct,
            atom,
            answers: Vec::new(),
        }
    }

    pub fn satisfiable(atom: Atom) -> Self {
        Question {
            kind: QuestionKind::Satisfiable,
            atom,
            answers: Vec::new(),
        }
    }

    pub fn complete(query: Atom, answers: Vec<Atom>) -> Self {
        Question {
            kind: QuestionKind::Complete,
            atom: query,
            answers,
        }
    }

    /// Atom text, followed by `{a1, a2}` for answer-set questions.
    pub fn text(&self) -> String {
        let mut s = format!("{}", self.atom);
        if self.kind == QuestionKind::Complete {
            s.push_str(" {");
            for (i, a) in self.answers.iter().enumerate() {
                if i > 0 {
                    s.push_str(", ");
                }
                s.push_str(&format!("{a}"));
            }
            s.push('}');
        }
        s
    }

    /// Equal for questions that differ only in variable names.
    pub fn key(&self) -> String {
        let mut group = Vec::with_capacity(1 + self.answers.len());
        group.push(self.atom.clone());
        group.extend(self.answers.iter().cloned());
        let canon = canonical_atoms(&group);
        let mut s = format!("{}|{}", self.kind, canon[0]);
        for a in &canon[1..] {
            s.push_str(&format!("|{a}"));
        }
        s
    }

    /// Dialogue wording for a human oracle.
    pub fn prompt(&self) -> String {
        match self.kind {
            QuestionKind::Correct => format!("Is {} correct?", self.atom),
            QuestionKind::Satisfiable => format!("Is {} satisfiable?", self.atom),
            QuestionKind::Complete => format!("Is {} a complete set of answers?", self.text()),
        }
    }
}

impl fmt::Display for Question {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} | {}", self.kind, self.text())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Reply {
    Yes,
    No,
    Deferred,
}

impl Reply {
    pub fn as_str(&self) -> &'static str {
        match self {
            Reply::Yes => "yes",
            Reply::No => "no",
            Reply::Deferred => "defer",
        }
    }

    /// Accepts `yes`/`y`, `no`/`n`, `defer`/`d`.
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "yes" | "y" => Some(Reply::Yes),
            "no" | "n" => Some(Reply::No),
            "defer" | "d" => Some(Reply::Deferred),
            _ => None,
        }
    }
}

impl fmt::Display for Reply {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Answered {
    pub reply: Reply,
    /// Counterexample, satisfying instance or uncovered instance, when known.
    pub witness: Option<Atom>,
}

impl From<Reply> for Answered {
    fn from(reply: Reply) -> Self {
        Answered { reply, witness: None }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleError {
    Unspecified(PredKey),
    Engine(EngineError),
    SpecTruncated(Atom),
    ScriptMismatch { expected: String, asked: String },
    ScriptExhausted { asked: String },
    /// A human answer is needed before the diagnosis can go on.
    Pending(Question),
    Aborted,
    Backend(String),
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::Unspecified(k) => write!(f, "no specification for {k}"),
            OracleError::Engine(e) => write!(f, "specification: {e}"),
            OracleError::SpecTruncated(a) => write!(f, "specification run for {a} hit a bound"),
            OracleError::ScriptMismatch { expected, asked } => {
                write!(f, "oracle script expected `{expected}` but was asked `{asked}`")
            }
            OracleError::ScriptExhausted { asked } => write!(f, "oracle script has no answer for `{asked}`"),
            OracleError::Pending(q) => write!(f, "waiting for an answer to `{q}`"),
            OracleError::Aborted => f.write_str("aborted by the user"),
            OracleError::Backend(m) => f.write_str(m),
        }
    }
}

impl core::error::Error for OracleError {}

pub trait OracleBackend: Send {
    fn answer(&mut self, question: &Question) -> Result<Answered, OracleError>;
}

/// Answers from a specification.
#[derive(Clone, Debug)]
pub struct SpecOracle {
    spec: Specification,
}

impl SpecOracle {
    pub fn new(spec: Specification) -> Self {
        SpecOracle { spec }
    }

    pub fn spec(&self) -> &Specification {
        &self.spec
    }
}

impl OracleBackend for SpecOracle {
    fn answer(&mut self, q: &Question) -> Result<Answered, OracleError> {
        let decision = match q.kind {
            QuestionKind::Correct => self.spec.is_correct(&q.atom)?,
            QuestionKind::Satisfiable => self.spec.is_satisfiable(&q.atom)?,
            QuestionKind::Complete => self.spec.is_answer_set_complete(&q.atom, &q.answers)?,
        };
        Ok(match decision {
            Decision::Yes { witness } => Answered {
                reply: Reply::Yes,
                witness,
            },
            Decision::No { witness } => Answered {
                reply: Reply::No,
                witness,
            },
            Decision::Unknown => Reply::Deferred.into(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScriptEntry {
    pub question: Question,
    pub reply: Reply,
}

/// Answers from an ordered list; every question must match the next entry.
#[derive(Clone, Debug, Default)]
pub struct ScriptedOracle {
    entries: VecDeque<ScriptEntry>,
}

impl ScriptedOracle {
    pub fn new(entries: impl IntoIterator<Item = ScriptEntry>) -> Self {
        ScriptedOracle {
            entries: entries.into_iter().collect(),
        }
    }

    pub fn remaining(&self) -> usize {
        self.entries.len()
    }
}

impl OracleBackend for ScriptedOracle {
    fn answer(&mut self, q: &Question) -> Result<Answered, OracleError> {
        let Some(next) = self.entries.front() else {
            return Err(OracleError::ScriptExhausted { asked: format!("{q}") });
        };
        if next.question.key() != q.key() {
            return Err(OracleError::ScriptMismatch {
                expected: format!("{}", next.question),
                asked: format!("{q}"),
            });
        }
        let reply = next.reply;
        self.entries.pop_front();
        Ok(reply.into())
    }
}

/// Replays human replies given so far; the first question beyond them is
/// reported as pending.
#[derive(Clone, Debug, Default)]
pub struct ReplayOracle {
    replies: Vec<Reply>,
    next: usize,
}

impl ReplayOracle {
    pub fn new(replies: Vec<Reply>) -> Self {
        ReplayOracle { replies, next: 0 }
    }
}

impl OracleBackend for ReplayOracle {
    fn answer(&mut self, q: &Question) -> Result<Answered, OracleError> {
        let reply = *self.replies.get(self.next).ok_or_else(|| OracleError::Pending(q.clone()))?;
        self.next += 1;
        Ok(reply.into())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Asked {
    pub question: Question,
    pub answered: Answered,
    /// False when the answer came from the cache.
    pub fresh: bool,
}

/// A backend plus a cache: a question asked twice reaches the backend once.
pub struct Oracle {
    backend: Box<dyn OracleBackend>,
    cache: BTreeMap<String, Answered>,
    log: Vec<Asked>,
}

impl Oracle {
    pub fn new(backend: impl OracleBackend + 'static) -> Self {
        Oracle {
            backend: Box::new(backend),
            cache: BTreeMap::new(),
            log: Vec::new(),
        }
    }

    pub fn from_spec(spec: Specification) -> Self {
        Self::new(SpecOracle::new(spec))
    }

    pub fn ask(&mut self, question: Question) -> Result<Asked, OracleError> {
        let key = question.key();
        let (answered, fresh) = match self.cache.get(&key) {
            Some(a) => (a.clone(), false),
            None => {
                let a = self.backend.answer(&question)?;
                self.cache.insert(key, a.clone());
                (a, true)
            }
        };
        let asked = Asked {
            question,
            answered,
            fresh,
        };
        self.log.push(asked.clone());
        Ok(asked)
    }

    /// Cached answer, without asking.
    pub fn known(&self, question: &Question) -> Option<&Answered> {
        self.cache.get(&question.key())
    }

    pub fn log(&self) -> &[Asked] {
        &self.log
    }

    /// Questions of one kind that reached the backend.
    pub fn fresh_count(&self, kind: QuestionKind) -> usize {
        self.log.iter().filter(|a| a.fresh && a.question.kind == kind).count()
    }
}

impl fmt::Debug for Oracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Oracle").field("cached", &self.cache.len()).field("asked", &self.log.len()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_query;
    use alloc::vec;

    const SPEC: &str = include_str!("../../../fixtures/isort.spec.pl");

    fn spec() -> Specification {
        Specification::parse(SPEC).unwrap()
    }

    fn q(s: &str) -> Atom {
        parse_query(s).unwrap()
    }

    #[test]
    fn domain_counts_and_order() {
        let d = Domain::default();
        assert_eq!(d.int_count(), 21);
        assert_eq!(d.list_count(), 1 + 21 + 441 + 9261 + 194_481);
        assert_eq!(d.value(0), Term::Int(-10));
        assert_eq!(d.value(20), Term::Int(10));
        assert_eq!(d.value(21), Term::nil());
        assert_eq!(d.value(22), Term::int_list(&[-10]));
        assert_eq!(d.value(21 + 1 + 21), Term::int_list(&[-10, -10]));
        assert_eq!(d.value(d.size() - 1), Term::int_list(&[10, 10, 10, 10]));
        for i in [0, 5, 21, 30, 500, 20_000, d.size() - 1] {
            assert!(d.contains(&d.value(i)));
        }
        assert!(!d.contains(&Term::Int(11)));
        assert!(!d.contains(&Term::int_list(&[1, 2, 3, 4, 5])));
    }

    #[test]
    fn groundings_respect_budget() {
        let d = Domain {
            min_int: 0,
            max_int: 1,
            max_len: 1,
            budget: 100,
        };
        let all: Vec<Atom> = d.groundings(&q("p(X,Y)")).unwrap().collect();
        assert_eq!(all.len(), 25);
        assert_eq!(all[1], q("p(0,1)"));
        assert!(Domain::default().groundings(&q("p(X,Y)")).is_none());
    }

    #[test]
    fn correctness_judgments() {
        let s = spec();
        let yes = |a: &str| s.is_correct(&q(a)).unwrap() == Decision::Yes { witness: None };
        assert!(yes("insert(2,[3,1],[2,3,1])"));
        assert!(!yes("isort([1,3],[3,1])"));
        assert!(yes("isort([1,3],[1,3])"));
        assert!(!yes("insert(1,[3],[3,1])"));
        assert!(yes("insert(1,[],[1])"));
        assert!(yes("3>1"));
        assert!(!yes("1>3"));
    }

    #[test]
    fn unordered_insert_is_in_sp_but_not_sp0() {
        let s = spec();
        let a = q("insert(2,[3,1],[2,3,1])");
        assert!(s.in_sp(&a).unwrap());
        assert!(!s.in_sp0(&a).unwrap());
    }

    #[test]
    fn satisfiability() {
        let s = spec();
        assert_eq!(
            s.is_satisfiable(&q("insert(1,[],B)")).unwrap(),
            Decision::Yes {
                witness: Some(q("insert(1,[],[1])"))
            }
        );
        assert_eq!(
            s.is_satisfiable(&q("isort([],B)")).unwrap(),
            Decision::Yes {
                witness: Some(q("isort([],[])"))
            }
        );
        assert_eq!(s.is_satisfiable(&q("1>2")).unwrap(), Decision::No { witness: None });
        assert_eq!(s.is_satisfiable(&q("insert(1,[2,1],B)")).unwrap(), Decision::No { witness: None });
    }

    #[test]
    fn answer_set_completeness() {
        let s = spec();
        assert_eq!(
            s.is_answer_set_complete(&q("isort([],B)"), &[q("isort([],[])")]).unwrap(),
            Decision::Yes { witness: None }
        );
        assert_eq!(
            s.is_answer_set_complete(&q("insert(1,[3],B)"), &[]).unwrap(),
            Decision::No {
                witness: Some(q("insert(1,[3],[1,3])"))
            }
        );
        assert_eq!(
            s.is_answer_set_complete(&q("insert(1,[3],B)"), &[q("insert(1,[3],[1,3])")]).unwrap(),
            Decision::Yes { witness: None }
        );
    }

    #[test]
    fn empty_completeness_definition_is_vacuously_complete() {
        let s = Specification::parse("'$spec$p'(X) :- X > 100.\n:- domain(0, 3, 1).").unwrap();
        assert_eq!(s.is_answer_set_complete(&q("p(X)"), &[]).unwrap(), Decision::Yes { witness: None });
    }

    #[test]
    fn declared_predicate_with_empty_sp0() {
        let s = Specification::parse(":- specify(p, 1).").unwrap();
        assert_eq!(s.specified(), vec![PredKey::new("p", 1)]);
        assert!(!s.in_sp0(&q("p(1)")).unwrap());
        assert_eq!(s.is_correct(&q("p(1)")).unwrap(), Decision::No { witness: Some(q("p(1)")) });
        assert_eq!(s.is_satisfiable(&q("p(X)")).unwrap(), Decision::No { witness: None });
        assert_eq!(s.sp0_instances(&q("p(X)")).unwrap(), Some(vec![]));
    }

    #[test]
    fn sp0_instances_of_insert() {
        let s = spec();
        let got = s.sp0_instances(&q("insert(1,[2],B)")).unwrap().unwrap();
        assert_eq!(got, vec![q("insert(1,[2],[1,2])")]);
    }

    #[test]
    fn unspecified_predicates_are_errors() {
        let s = spec();
        assert_eq!(s.is_correct(&q("foo(1)")), Err(OracleError::Unspecified(PredKey::new("foo", 1))));
    }

    #[test]
    fn builtins_cannot_be_respecified() {
        let err = Specification::parse("'$spec$>'(X,Y).").unwrap_err();
        assert_eq!(err, SpecError::BuiltinOverride { pred: PredKey::new(">", 2) });
        assert!(matches!(Specification::parse(":- foo."), Err(SpecError::Directive { .. })));
    }

    #[test]
    fn oracle_caches_and_counts() {
        let mut o = Oracle::from_spec(spec());
        let a = o.ask(Question::correct(q("isort([1,3],[3,1])"))).unwrap();
        assert_eq!(a.answered.reply, Reply::No);
        assert!(a.fresh);
        let b = o.ask(Question::correct(q("isort([1,3],[3,1])"))).unwrap();
        assert!(!b.fresh);
        assert_eq!(o.fresh_count(QuestionKind::Correct), 1);
    }

    #[test]
    fn script_mismatch_is_an_error() {
        let mut o = Oracle::new(ScriptedOracle::new(vec![ScriptEntry {
            question: Question::correct(q("p(1)")),
            reply: Reply::No,
        }]));
        assert!(matches!(o.ask(Question::correct(q("p(2)"))), Err(OracleError::ScriptMismatch { .. })));
        assert_eq!(o.ask(Question::correct(q("p(1)"))).unwrap().answered.reply, Reply::No);
        assert!(matches!(o.ask(Question::correct(q("p(3)"))), Err(OracleError::ScriptExhausted { .. })));
    }

    #[test]
    fn question_keys_ignore_variable_names() {
        let a = Question::complete(q("isort([],B)"), vec![q("isort([],[])")]);
        let b = Question::complete(q("isort([],Zs)"), vec![q("isort([],[])")]);
        assert_eq!(a.key(), b.key());
        assert_eq!(a.text(), "isort([],B) {isort([],[])}");
        assert_ne!(Question::correct(q("p(X)")).key(), Question::satisfiable(q("p(X)")).key());
    }

    #[test]
    fn replay_reports_pending() {
        let mut o = Oracle::new(ReplayOracle::new(vec![Reply::Yes]));
        assert_eq!(o.ask(Question::correct(q("p(1)"))).unwrap().answered.reply, Reply::Yes);
        assert_eq!(o.ask(Question::correct(q("p(2)"))), Err(OracleError::Pending(Question::correct(q("p(2)")))));
    }
}
