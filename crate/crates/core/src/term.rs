//! Terms, atoms, substitutions and unification.
//!
//! Lists are ordinary terms built from the binary functor `'.'` and the
//! constant `[]`; only the printer and parser know about the `[a,b|T]` sugar.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt::{self, Write as _};
use core::hash::{Hash, Hasher};

pub type Name = Arc<str>;

pub const NIL: &str = "[]";
pub const CONS: &str = ".";

/// A logic variable. Identity is the serial; the name is display only.
#[derive(Clone, Debug)]
pub struct Var {
    pub serial: u32,
    pub name: Option<Name>,
}

impl Var {
    pub fn fresh(serial: u32) -> Self {
        Var { serial, name: None }
    }

    pub fn named(serial: u32, name: &str) -> Self {
        Var {
            serial,
            name: Some(Name::from(name)),
        }
    }
}

impl PartialEq for Var {
    fn eq(&self, other: &Self) -> bool {
        self.serial == other.serial
    }
}

impl Eq for Var {}

impl PartialOrd for Var {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Var {
    fn cmp(&self, other: &Self) -> Ordering {
        self.serial.cmp(&other.serial)
    }
}

impl Hash for Var {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.serial.hash(state)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.name {
            Some(name) => f.write_str(name),
            None => write!(f, "_{}", self.serial),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(Var),
    Int(i64),
    /// Functor application; constants have no arguments.
    App(Name, Arc<[Term]>),
}

impl Term {
    pub fn constant(name: &str) -> Term {
        Term::App(Name::from(name), Arc::from(Vec::new()))
    }

    pub fn app(name: &str, args: Vec<Term>) -> Term {
        Term::App(Name::from(name), Arc::from(args))
    }

    pub fn var(v: Var) -> Term {
        Term::Var(v)
    }

    pub fn nil() -> Term {
        Term::constant(NIL)
    }

    pub fn cons(head: Term, tail: Term) -> Term {
        Term::App(Name::from(CONS), Arc::from(alloc::vec![head, tail]))
    }

    /// Builds `[items... | tail]`, with `[]` as the default tail.
    pub fn list(items: Vec<Term>, tail: Option<Term>) -> Term {
        items
            .into_iter()
            .rev()
            .fold(tail.unwrap_or_else(Term::nil), |acc, item| Term::cons(item, acc))
    }

    pub fn int_list(items: &[i64]) -> Term {
        Term::list(items.iter().map(|&i| Term::Int(i)).collect(), None)
    }

    pub fn is_nil(&self) -> bool {
        matches!(self, Term::App(name, args) if &**name == NIL && args.is_empty())
    }

    pub fn as_cons(&self) -> Option<(&Term, &Term)> {
        match self {
            Term::App(name, args) if &**name == CONS && args.len() == 2 => Some((&args[0], &args[1])),
            _ => None,
        }
    }

    /// Proper list elements, if this is a `[]`-terminated list.
    pub fn list_items(&self) -> Option<Vec<&Term>> {
        let mut items = Vec::new();
        let mut cur = self;
        loop {
            if cur.is_nil() {
                return Some(items);
            }
            let (head, tail) = cur.as_cons()?;
            items.push(head);
            cur = tail;
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Int(_) => true,
            Term::App(_, args) => args.iter().all(Term::is_ground),
        }
    }

    /// Appends variables not yet in `out`, in first-occurrence order.
    pub fn collect_vars(&self, out: &mut Vec<Var>) {
        match self {
            Term::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
            Term::Int(_) => {}
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    pub fn max_serial(&self) -> Option<u32> {
        match self {
            Term::Var(v) => Some(v.serial),
            Term::Int(_) => None,
            Term::App(_, args) => args.iter().filter_map(Term::max_serial).max(),
        }
    }

    pub fn occurs(&self, v: &Var) -> bool {
        match self {
            Term::Var(w) => w == v,
            Term::Int(_) => false,
            Term::App(_, args) => args.iter().any(|a| a.occurs(v)),
        }
    }

    /// Replaces every variable through `f`.
    pub fn map_vars(&self, f: &mut impl FnMut(&Var) -> Term) -> Term {
        match self {
            Term::Var(v) => f(v),
            Term::Int(_) => self.clone(),
            Term::App(name, args) => {
                if args.is_empty() || self.is_ground() {
                    return self.clone();
                }
                let mapped: Vec<Term> = args.iter().map(|a| a.map_vars(f)).collect();
                Term::App(name.clone(), Arc::from(mapped))
            }
        }
    }
}

/// Predicate name and arity.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PredKey {
    pub name: Name,
    pub arity: usize,
}

impl PredKey {
    pub fn new(name: &str, arity: usize) -> Self {
        PredKey {
            name: Name::from(name),
            arity,
        }
    }
}

impl fmt::Display for PredKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_name(f, &self.name)?;
        write!(f, "/{}", self.arity)
    }
}

/// A predicate applied to arguments. The arity is `args.len()`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub name: Name,
    pub args: Arc<[Term]>,
}

impl Atom {
    pub fn new(name: &str, args: Vec<Term>) -> Self {
        Atom {
            name: Name::from(name),
            args: Arc::from(args),
        }
    }

    pub fn key(&self) -> PredKey {
        PredKey {
            name: self.name.clone(),
            arity: self.args.len(),
        }
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn to_term(&self) -> Term {
        Term::App(self.name.clone(), self.args.clone())
    }

    /// Reads a callable term back as an atom. Lists, integers and variables
    /// are not callable.
    pub fn from_term(t: &Term) -> Option<Atom> {
        match t {
            Term::App(name, args) if t.as_cons().is_none() && !t.is_nil() => Some(Atom {
                name: name.clone(),
                args: args.clone(),
            }),
            _ => None,
        }
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(Term::is_ground)
    }

    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.args.iter().for_each(|a| a.collect_vars(&mut out));
        out
    }

    pub fn max_serial(&self) -> Option<u32> {
        self.args.iter().filter_map(Term::max_serial).max()
    }

    pub fn map_vars(&self, f: &mut impl FnMut(&Var) -> Term) -> Atom {
        Atom {
            name: self.name.clone(),
            args: Arc::from(self.args.iter().map(|a| a.map_vars(f)).collect::<Vec<_>>()),
        }
    }

    pub fn is_builtin(&self) -> bool {
        is_builtin(&self.name, self.args.len())
    }

    /// Variables renamed to `A`, `B`, ... in first-occurrence order. Two
    /// atoms are variants exactly when their canonical forms are equal.
    pub fn canonical(&self) -> Atom {
        canonical_atoms(core::slice::from_ref(self)).pop().unwrap()
    }

    pub fn is_variant_of(&self, other: &Atom) -> bool {
        self.canonical() == other.canonical()
    }

    pub fn canonical_text(&self) -> String {
        let mut s = String::new();
        let _ = write!(s, "{}", self.canonical());
        s
    }
}

/// Canonically renames a group of atoms with one shared variable numbering.
pub fn canonical_atoms(atoms: &[Atom]) -> Vec<Atom> {
    let mut seen: Vec<Var> = Vec::new();
    atoms
        .iter()
        .map(|a| {
            a.map_vars(&mut |v| {
                let idx = match seen.iter().position(|s| s == v) {
                    Some(i) => i,
                    None => {
                        seen.push(v.clone());
                        seen.len() - 1
                    }
                };
                Term::Var(Var::named(idx as u32, &letter_name(idx)))
            })
        })
        .collect()
}

fn letter_name(idx: usize) -> String {
    let letter = (b'A' + (idx % 26) as u8) as char;
    let mut s = String::new();
    s.push(letter);
    if idx >= 26 {
        let _ = write!(s, "{}", idx / 26);
    }
    s
}

/// The comparison built-ins plus the `integer/1` type test.
pub const COMPARISONS: [&str; 6] = ["=<", ">", "<", ">=", "=:=", "=\\="];

pub fn is_builtin(name: &str, arity: usize) -> bool {
    (arity == 2 && COMPARISONS.contains(&name)) || (arity == 1 && name == "integer")
}

pub fn is_comparison(name: &str, arity: usize) -> bool {
    arity == 2 && COMPARISONS.contains(&name)
}

// ---------------------------------------------------------------------------
// Unification

/// Variable binding store used by unification.
pub trait Bindings {
    fn lookup(&self, v: &Var) -> Option<Term>;
    fn bind(&mut self, v: &Var, t: Term);
}

/// Follows variable bindings until reaching an unbound variable or a non-variable.
pub fn deref<B: Bindings + ?Sized>(b: &B, t: &Term) -> Term {
    let mut cur = t.clone();
    while let Term::Var(v) = &cur {
        match b.lookup(v) {
            Some(next) => cur = next,
            None => break,
        }
    }
    cur
}

fn occurs_in<B: Bindings + ?Sized>(b: &B, v: &Var, t: &Term) -> bool {
    match deref(b, t) {
        Term::Var(w) => &w == v,
        Term::Int(_) => false,
        Term::App(_, args) => args.iter().any(|a| occurs_in(b, v, a)),
    }
}

/// Unifies two terms in the given store. On failure the store may hold
/// partial bindings; callers undo them.
pub fn unify_in<B: Bindings + ?Sized>(b: &mut B, left: &Term, right: &Term, occurs_check: bool) -> bool {
    let mut work: Vec<(Term, Term)> = alloc::vec![(left.clone(), right.clone())];
    while let Some((l, r)) = work.pop() {
        let l = deref(b, &l);
        let r = deref(b, &r);
        match (&l, &r) {
            (Term::Var(x), Term::Var(y)) if x == y => {}
            (Term::Var(x), _) => {
                if occurs_check && occurs_in(b, x, &r) {
                    return false;
                }
                b.bind(x, r.clone());
            }
            (_, Term::Var(y)) => {
                if occurs_check && occurs_in(b, y, &l) {
                    return false;
                }
                b.bind(y, l.clone());
            }
            (Term::Int(i), Term::Int(j)) => {
                if i != j {
                    return false;
                }
            }
            (Term::App(f, xs), Term::App(g, ys)) => {
                if f != g || xs.len() != ys.len() {
                    return false;
                }
                for (x, y) in xs.iter().zip(ys.iter()).rev() {
                    work.push((x.clone(), y.clone()));
                }
            }
            _ => return false,
        }
    }
    true
}

pub fn unify_atoms_in<B: Bindings + ?Sized>(b: &mut B, left: &Atom, right: &Atom, occurs_check: bool) -> bool {
    left.name == right.name
        && left.args.len() == right.args.len()
        && left
            .args
            .iter()
            .zip(right.args.iter())
            .all(|(x, y)| unify_in(b, x, y, occurs_check))
}

/// Fully applies the store to a term. A variable met again while it is
/// being expanded (a cyclic binding made without occurs check) is left as
/// the variable.
pub fn resolve<B: Bindings + ?Sized>(b: &B, t: &Term) -> Term {
    fn go<B: Bindings + ?Sized>(b: &B, t: &Term, expanding: &mut Vec<u32>) -> Term {
        match t {
            Term::Int(_) => t.clone(),
            Term::Var(v) => {
                if expanding.contains(&v.serial) {
                    return t.clone();
                }
                match b.lookup(v) {
                    None => t.clone(),
                    Some(next) => {
                        expanding.push(v.serial);
                        let out = go(b, &next, expanding);
                        expanding.pop();
                        out
                    }
                }
            }
            Term::App(name, args) => {
                if args.is_empty() {
                    return t.clone();
                }
                let mapped: Vec<Term> = args.iter().map(|a| go(b, a, expanding)).collect();
                Term::App(name.clone(), Arc::from(mapped))
            }
        }
    }
    go(b, t, &mut Vec::new())
}

pub fn resolve_atom<B: Bindings + ?Sized>(b: &B, a: &Atom) -> Atom {
    Atom {
        name: a.name.clone(),
        args: Arc::from(a.args.iter().map(|t| resolve(b, t)).collect::<Vec<_>>()),
    }
}

/// A finite, idempotent map from variables to terms.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Substitution {
    map: BTreeMap<Var, Term>,
}

impl Bindings for BTreeMap<Var, Term> {
    fn lookup(&self, v: &Var) -> Option<Term> {
        self.get(v).cloned()
    }

    fn bind(&mut self, v: &Var, t: Term) {
        self.insert(v.clone(), t);
    }
}

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds an idempotent substitution from arbitrary (triangular)
    /// bindings, dropping trivial `X ↦ X` entries.
    pub fn from_bindings(raw: BTreeMap<Var, Term>) -> Self {
        let map = raw
            .keys()
            .filter_map(|v| {
                let t = resolve(&raw, &Term::Var(v.clone()));
                match &t {
                    Term::Var(w) if w == v => None,
                    _ => Some((v.clone(), t)),
                }
            })
            .collect();
        Substitution { map }
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Var, Term)>) -> Self {
        Self::from_bindings(pairs.into_iter().collect())
    }

    pub fn get(&self, v: &Var) -> Option<&Term> {
        self.map.get(v)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Term)> {
        self.map.iter()
    }

    pub fn apply(&self, t: &Term) -> Term {
        t.map_vars(&mut |v| self.map.get(v).cloned().unwrap_or_else(|| Term::Var(v.clone())))
    }

    pub fn apply_atom(&self, a: &Atom) -> Atom {
        a.map_vars(&mut |v| self.map.get(v).cloned().unwrap_or_else(|| Term::Var(v.clone())))
    }

    /// Restriction to the given variables.
    pub fn restrict(&self, vars: &[Var]) -> Substitution {
        Substitution {
            map: self
                .map
                .iter()
                .filter(|(v, _)| vars.contains(v))
                .map(|(v, t)| (v.clone(), t.clone()))
                .collect(),
        }
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (v, t)) in self.map.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v}↦{t}")?;
        }
        f.write_str("}")
    }
}

/// Most general unifier of two terms, or `None` if they do not unify.
pub fn unify(left: &Term, right: &Term, occurs_check: bool) -> Option<Substitution> {
    let mut raw = BTreeMap::new();
    unify_in(&mut raw, left, right, occurs_check).then(|| Substitution::from_bindings(raw))
}

pub fn unify_atoms(left: &Atom, right: &Atom, occurs_check: bool) -> Option<Substitution> {
    let mut raw = BTreeMap::new();
    unify_atoms_in(&mut raw, left, right, occurs_check).then(|| Substitution::from_bindings(raw))
}

/// `general` has `specific` as an instance (one-way matching).
pub fn subsumes(general: &Atom, specific: &Atom) -> bool {
    // Rename the general side away from the specific one, then unify and
    // check that no variable of `specific` got bound.
    let offset = specific.max_serial().map_or(0, |s| s + 1);
    let renamed = general.map_vars(&mut |v| Term::Var(Var::fresh(v.serial + offset)));
    let mut raw = BTreeMap::new();
    if !unify_atoms_in(&mut raw, &renamed, specific, true) {
        return false;
    }
    let theta = Substitution::from_bindings(raw);
    theta.apply_atom(specific) == *specific
}

/// Source of fresh variable serials.
#[derive(Clone, Debug, Default)]
pub struct VarSource {
    next: u32,
}

impl VarSource {
    pub fn starting_at(next: u32) -> Self {
        VarSource { next }
    }

    pub fn fresh(&mut self) -> Var {
        let v = Var::fresh(self.next);
        self.next += 1;
        v
    }

    pub fn peek(&self) -> u32 {
        self.next
    }
}

// ---------------------------------------------------------------------------
// Printing

fn is_plain_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() => chars.all(|c| c.is_ascii_alphanumeric() || c == '_'),
        _ => false,
    }
}

pub(crate) fn write_name(f: &mut impl fmt::Write, name: &str) -> fmt::Result {
    if is_plain_name(name) || name == NIL {
        return f.write_str(name);
    }
    f.write_char('\'')?;
    for c in name.chars() {
        match c {
            '\'' => f.write_str("\\'")?,
            '\\' => f.write_str("\\\\")?,
            '\n' => f.write_str("\\n")?,
            c => f.write_char(c)?,
        }
    }
    f.write_char('\'')
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::Int(i) => write!(f, "{i}"),
            Term::App(..) if self.as_cons().is_some() => {
                f.write_char('[')?;
                let mut cur = self;
                let mut first = true;
                while let Some((head, tail)) = cur.as_cons() {
                    if !first {
                        f.write_char(',')?;
                    }
                    first = false;
                    write!(f, "{head}")?;
                    cur = tail;
                }
                if !cur.is_nil() {
                    write!(f, "|{cur}")?;
                }
                f.write_char(']')
            }
            Term::App(name, args) => {
                write_name(f, name)?;
                write_args(f, args)
            }
        }
    }
}

fn write_args(f: &mut fmt::Formatter<'_>, args: &[Term]) -> fmt::Result {
    if args.is_empty() {
        return Ok(());
    }
    f.write_char('(')?;
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            f.write_char(',')?;
        }
        write!(f, "{a}")?;
    }
    f.write_char(')')
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if is_comparison(&self.name, self.args.len()) {
            // Infix, no spaces: `3>1`, `X=<Y`.
            return write!(f, "{}{}{}", self.args[0], self.name, self.args[1]);
        }
        write_name(f, &self.name)?;
        write_args(f, &self.args)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn v(serial: u32, name: &str) -> Term {
        Term::Var(Var::named(serial, name))
    }

    #[test]
    fn binds_variable_to_structure() {
        let s = unify(&v(0, "X"), &Term::app("f", vec![v(1, "Y")]), true).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.get(&Var::fresh(0)), Some(&Term::app("f", vec![v(1, "Y")])));
    }

    #[test]
    fn occurs_check_rejects_cycle() {
        let x = v(0, "X");
        assert!(unify(&x, &Term::app("f", vec![x.clone()]), true).is_none());
        // Without the check the binding is accepted (and printing stays finite).
        let s = unify(&x, &Term::app("f", vec![x.clone()]), false).unwrap();
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn insert_head_unifier() {
        // unify(insert(2,[3,1],L), insert(X,[Y|Ys],[Y|Zs]))
        let l = v(0, "L");
        let (x, y, ys, zs) = (v(1, "X"), v(2, "Y"), v(3, "Ys"), v(4, "Zs"));
        let goal = Atom::new("insert", vec![Term::Int(2), Term::int_list(&[3, 1]), l]);
        let head = Atom::new(
            "insert",
            vec![x, Term::cons(y.clone(), ys), Term::cons(y, zs.clone())],
        );
        let s = unify_atoms(&goal, &head, true).unwrap();
        assert_eq!(s.get(&Var::fresh(1)), Some(&Term::Int(2)));
        assert_eq!(s.get(&Var::fresh(2)), Some(&Term::Int(3)));
        assert_eq!(s.get(&Var::fresh(3)), Some(&Term::int_list(&[1])));
        assert_eq!(s.get(&Var::fresh(0)), Some(&Term::cons(Term::Int(3), zs)));
        assert_eq!(s.len(), 4);
        assert_eq!(s.apply_atom(&goal), s.apply_atom(&head));
    }

    #[test]
    fn apply_examples() {
        let t = Term::app("f", vec![v(0, "X"), Term::Int(3)]);
        assert_eq!(Substitution::new().apply(&t), t);

        let x = v(0, "X");
        let fact = Atom::new("insert", vec![x.clone(), Term::nil(), Term::list(vec![x], None)]);
        let s = Substitution::from_pairs([(Var::fresh(0), Term::Int(1))]);
        assert_eq!(s.apply_atom(&fact).to_string(), "insert(1,[],[1])");

        let zs = v(5, "Zs");
        let s = Substitution::from_pairs([(Var::fresh(5), Term::int_list(&[1]))]);
        assert_eq!(s.apply(&Term::cons(Term::Int(3), zs)).to_string(), "[3,1]");
    }

    #[test]
    fn idempotent_from_chains() {
        let s = Substitution::from_pairs([
            (Var::fresh(0), v(1, "Y")),
            (Var::fresh(1), Term::app("g", vec![v(2, "Z")])),
        ]);
        let t = Term::app("h", vec![v(0, "X"), v(1, "Y")]);
        assert_eq!(s.apply(&s.apply(&t)), s.apply(&t));
    }

    #[test]
    fn prints_lists_and_infix() {
        let t = Term::list(vec![Term::Int(1), Term::Int(-2)], Some(v(0, "T")));
        assert_eq!(t.to_string(), "[1,-2|T]");
        assert_eq!(Term::nil().to_string(), "[]");
        let a = Atom::new(">", vec![Term::Int(3), Term::Int(1)]);
        assert_eq!(a.to_string(), "3>1");
        assert_eq!(Term::Var(Var::fresh(3045)).to_string(), "_3045");
        assert_eq!(Term::constant("$spec$p").to_string(), "'$spec$p'");
        assert_eq!(Term::app(">", vec![Term::Int(1), Term::Int(2)]).to_string(), "'>'(1,2)");
    }

    #[test]
    fn canonical_variants() {
        let a = Atom::new("p", vec![v(7, "Q"), v(3, "R"), v(7, "Q")]);
        let b = Atom::new("p", vec![v(1, "X"), v(2, "Y"), v(1, "X")]);
        assert!(a.is_variant_of(&b));
        assert_eq!(a.canonical_text(), "p(A,B,A)");
        let c = Atom::new("p", vec![v(1, "X"), v(2, "Y"), v(2, "Y")]);
        assert!(!a.is_variant_of(&c));
    }

    #[test]
    fn subsumption() {
        let general = Atom::new("p", vec![v(0, "X"), Term::Int(1)]);
        let specific = Atom::new("p", vec![Term::Int(2), Term::Int(1)]);
        assert!(subsumes(&general, &specific));
        assert!(!subsumes(&specific, &general));
        let nonlinear = Atom::new("p", vec![v(0, "X"), v(0, "X")]);
        assert!(!subsumes(&nonlinear, &Atom::new("p", vec![Term::Int(1), Term::Int(2)])));
        assert!(subsumes(&nonlinear, &Atom::new("p", vec![v(4, "A"), v(4, "A")])));
    }
}
