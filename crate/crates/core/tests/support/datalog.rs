//! Random terminating Datalog programs and a naive bottom-up evaluator.
//!
//! Predicates `p0..p3` may only call predicates with a smaller index, so
//! every SLD derivation is finite. Rules are range restricted, which makes
//! every answer ground. The evaluator shares no code with the engine: it
//! works on strings and brute-forces variable assignments.

#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::Rng;

pub const CONSTANTS: [&str; 4] = ["a", "b", "c", "d"];
const VARS: [&str; 3] = ["X", "Y", "Z"];

#[derive(Clone, Debug)]
pub struct Lit {
    pub pred: usize,
    pub args: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct Rule {
    pub head: Lit,
    pub body: Vec<Lit>,
}

#[derive(Clone, Debug)]
pub struct Datalog {
    pub arity: Vec<usize>,
    pub rules: Vec<Rule>,
}

fn is_var(s: &str) -> bool {
    s.starts_with(|c: char| c.is_ascii_uppercase())
}

fn lit_text(l: &Lit) -> String {
    format!("p{}({})", l.pred, l.args.join(","))
}

impl Datalog {
    pub fn generate(rng: &mut impl Rng, constants: usize) -> Datalog {
        let preds = rng.gen_range(1..=4);
        let arity: Vec<usize> = (0..preds).map(|_| rng.gen_range(1..=2)).collect();
        let consts = &CONSTANTS[..constants.clamp(1, 4)];
        let n = rng.gen_range(1..=6);
        let mut rules: Vec<Rule> = Vec::new();
        for i in 0..n {
            // The first clause of every program is a fact for p0 so that
            // something is derivable.
            let pred = if i == 0 { 0 } else { rng.gen_range(0..preds) };
            let fact = pred == 0 || rng.gen_bool(0.4) || !rules.iter().any(|r| r.head.pred < pred);
            if fact {
                let args = (0..arity[pred]).map(|_| consts[rng.gen_range(0..consts.len())].to_string()).collect();
                rules.push(Rule {
                    head: Lit { pred, args },
                    body: vec![],
                });
                continue;
            }
            // Callees must already have a clause, otherwise the engine
            // reports an unknown predicate.
            let callees: Vec<usize> = (0..pred).filter(|c| rules.iter().any(|r| r.head.pred == *c)).collect();
            let body_len = rng.gen_range(1..=2);
            let mut body = Vec::new();
            for _ in 0..body_len {
                let callee = callees[rng.gen_range(0..callees.len())];
                let args = (0..arity[callee])
                    .map(|_| {
                        if rng.gen_bool(0.75) {
                            VARS[rng.gen_range(0..VARS.len())].to_string()
                        } else {
                            consts[rng.gen_range(0..consts.len())].to_string()
                        }
                    })
                    .collect();
                body.push(Lit { pred: callee, args });
            }
            let body_vars: Vec<String> = body
                .iter()
                .flat_map(|l| l.args.iter().filter(|a| is_var(a)).cloned())
                .collect();
            let args = (0..arity[pred])
                .map(|_| {
                    if !body_vars.is_empty() && rng.gen_bool(0.8) {
                        body_vars[rng.gen_range(0..body_vars.len())].clone()
                    } else {
                        consts[rng.gen_range(0..consts.len())].to_string()
                    }
                })
                .collect();
            rules.push(Rule {
                head: Lit { pred, args },
                body,
            });
        }
        Datalog { arity, rules }
    }

    pub fn source(&self) -> String {
        let mut s = String::new();
        for r in &self.rules {
            s.push_str(&lit_text(&r.head));
            for (i, b) in r.body.iter().enumerate() {
                s.push_str(if i == 0 { " :- " } else { ", " });
                s.push_str(&lit_text(b));
            }
            s.push_str(".\n");
        }
        s
    }

    /// Predicates with at least one clause (others would be unknown to the
    /// engine).
    pub fn defined(&self) -> BTreeSet<usize> {
        self.rules.iter().map(|r| r.head.pred).collect()
    }

    /// Least fixpoint of the immediate-consequence operator, as ground atom
    /// strings like `p1(a,b)`.
    pub fn least_model(&self) -> BTreeSet<String> {
        let mut model: BTreeSet<String> = BTreeSet::new();
        loop {
            let mut next = model.clone();
            for r in &self.rules {
                let mut vars: Vec<&str> = Vec::new();
                for l in std::iter::once(&r.head).chain(r.body.iter()) {
                    for a in &l.args {
                        if is_var(a) && !vars.contains(&a.as_str()) {
                            vars.push(a);
                        }
                    }
                }
                let total = CONSTANTS.len().pow(vars.len() as u32);
                for mut idx in 0..total {
                    let mut assign: Vec<(&str, &str)> = Vec::new();
                    for v in &vars {
                        assign.push((v, CONSTANTS[idx % CONSTANTS.len()]));
                        idx /= CONSTANTS.len();
                    }
                    let ground = |l: &Lit| {
                        let args: Vec<&str> = l
                            .args
                            .iter()
                            .map(|a| assign.iter().find(|(v, _)| v == a).map_or(a.as_str(), |(_, c)| c))
                            .collect();
                        format!("p{}({})", l.pred, args.join(","))
                    };
                    if r.body.iter().all(|b| model.contains(&ground(b))) {
                        next.insert(ground(&r.head));
                    }
                }
            }
            if next == model {
                return model;
            }
            model = next;
        }
    }

    /// A query for a defined predicate: fresh variables, or with some
    /// arguments fixed to constants.
    pub fn query(&self, rng: &mut impl Rng) -> (usize, Vec<String>) {
        let defined: Vec<usize> = self.defined().into_iter().collect();
        let pred = defined[rng.gen_range(0..defined.len())];
        let args = (0..self.arity[pred])
            .map(|i| {
                if rng.gen_bool(0.3) {
                    CONSTANTS[rng.gen_range(0..CONSTANTS.len())].to_string()
                } else {
                    format!("Q{i}")
                }
            })
            .collect();
        (pred, args)
    }
}

/// Model atoms matching a query pattern (query variables are all distinct).
pub fn expected_answers(model: &BTreeSet<String>, pred: usize, args: &[String]) -> BTreeSet<String> {
    model
        .iter()
        .filter(|atom| {
            let Some(rest) = atom.strip_prefix(&format!("p{pred}(")) else {
                return false;
            };
            let vals: Vec<&str> = rest.trim_end_matches(')').split(',').collect();
            vals.len() == args.len() && vals.iter().zip(args).all(|(v, a)| is_var(a) || v == a)
        })
        .cloned()
        .collect()
}
