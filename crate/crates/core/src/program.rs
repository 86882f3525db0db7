//! Clauses and programs.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use crate::term::{Atom, PredKey, Term, VarSource};

/// Where a clause came from: its predicate, 1-based index within the
/// predicate, and source position.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClauseRef {
    pub pred: PredKey,
    pub index: usize,
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for ClauseRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} clause {}", self.pred, self.index)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Clause {
    pub head: Atom,
    pub body: Vec<Atom>,
    pub origin: ClauseRef,
}

impl Clause {
    pub fn is_fact(&self) -> bool {
        self.body.is_empty()
    }

    pub fn max_serial(&self) -> Option<u32> {
        core::iter::once(&self.head)
            .chain(self.body.iter())
            .filter_map(Atom::max_serial)
            .max()
    }

    /// A variant of the clause with every variable replaced by a fresh one.
    pub fn rename_apart(&self, source: &mut VarSource) -> Clause {
        let mut map: Vec<(u32, Term)> = Vec::new();
        let mut rename = |v: &crate::term::Var| {
            if let Some((_, t)) = map.iter().find(|(s, _)| *s == v.serial) {
                return t.clone();
            }
            let t = Term::Var(source.fresh());
            map.push((v.serial, t.clone()));
            t
        };
        let head = self.head.map_vars(&mut rename);
        let body = self.body.iter().map(|b| b.map_vars(&mut rename)).collect();
        Clause {
            head,
            body,
            origin: self.origin.clone(),
        }
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.head)?;
        for (i, b) in self.body.iter().enumerate() {
            f.write_str(if i == 0 { " :- " } else { ", " })?;
            write!(f, "{b}")?;
        }
        f.write_str(".")
    }
}

/// `:- goal.` directive lines; only meaningful to specification files.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Directive {
    pub atom: Atom,
    pub line: usize,
    pub column: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Program {
    clauses: Vec<Clause>,
    index: BTreeMap<PredKey, Vec<usize>>,
    pub directives: Vec<Directive>,
}

impl Program {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a clause, assigning its 1-based index within its predicate.
    pub fn push(&mut self, head: Atom, body: Vec<Atom>, line: usize, column: usize) -> &Clause {
        let pred = head.key();
        let slot = self.index.entry(pred.clone()).or_default();
        let origin = ClauseRef {
            pred,
            index: slot.len() + 1,
            line,
            column,
        };
        slot.push(self.clauses.len());
        self.clauses.push(Clause { head, body, origin });
        self.clauses.last().unwrap()
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    /// Clauses of one predicate in textual order.
    pub fn procedure(&self, key: &PredKey) -> impl Iterator<Item = &Clause> + '_ {
        self.index
            .get(key)
            .into_iter()
            .flat_map(move |ids| ids.iter().map(move |&i| &self.clauses[i]))
    }

    pub fn procedure_len(&self, key: &PredKey) -> usize {
        self.index.get(key).map_or(0, Vec::len)
    }

    pub fn nth_clause(&self, key: &PredKey, zero_based: usize) -> Option<&Clause> {
        self.index.get(key)?.get(zero_based).map(|&i| &self.clauses[i])
    }

    pub fn clause(&self, origin: &ClauseRef) -> Option<&Clause> {
        self.nth_clause(&origin.pred, origin.index.checked_sub(1)?)
    }

    pub fn defines(&self, key: &PredKey) -> bool {
        self.index.contains_key(key)
    }

    pub fn predicates(&self) -> impl Iterator<Item = &PredKey> {
        self.index.keys()
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.directives {
            writeln!(f, ":- {}.", d.atom)?;
        }
        for c in &self.clauses {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::Var;
    use alloc::string::ToString;
    use alloc::vec;

    fn fact() -> Clause {
        let x = Term::Var(Var::named(0, "X"));
        let mut p = Program::new();
        p.push(
            Atom::new("insert", vec![x.clone(), Term::nil(), Term::list(vec![x], None)]),
            vec![],
            1,
            1,
        )
        .clone()
    }

    #[test]
    fn renaming_gives_fresh_disjoint_variants() {
        let c = fact();
        let mut src = VarSource::starting_at(100);
        let a = c.rename_apart(&mut src);
        let b = c.rename_apart(&mut src);
        assert_eq!(a.to_string(), "insert(_100,[],[_100]).");
        assert_eq!(b.to_string(), "insert(_101,[],[_101]).");
        assert!(a.head.vars().iter().all(|v| !b.head.vars().contains(v)));
    }

    #[test]
    fn renaming_ground_clause_is_identity() {
        let mut p = Program::new();
        let c = p.push(Atom::new("isort", vec![Term::nil(), Term::nil()]), vec![], 1, 1).clone();
        let mut src = VarSource::starting_at(7);
        assert_eq!(c.rename_apart(&mut src), c);
        assert_eq!(src.peek(), 7);
    }

    #[test]
    fn index_is_one_based_per_predicate() {
        let mut p = Program::new();
        p.push(Atom::new("a", vec![]), vec![], 1, 1);
        p.push(Atom::new("b", vec![]), vec![], 2, 1);
        p.push(Atom::new("a", vec![]), vec![], 3, 1);
        let a = PredKey::new("a", 0);
        let idx: Vec<usize> = p.procedure(&a).map(|c| c.origin.index).collect();
        assert_eq!(idx, vec![1, 2]);
        assert_eq!(p.nth_clause(&a, 1).unwrap().origin.line, 3);
    }
}
