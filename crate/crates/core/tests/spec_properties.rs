use lpdiag_core::diagnose::Diagnoser;
use lpdiag_core::spec::{Decision, Oracle, Question, QuestionKind, Specification};
use lpdiag_core::{parse_program, parse_query, Atom, Bounds, Term};
use proptest::prelude::*;

const SPEC: &str = include_str!("../../../fixtures/isort.spec.pl");
const INC: &str = include_str!("../../../fixtures/inc.isort.pl");

fn spec() -> Specification {
    Specification::parse(SPEC).unwrap()
}

fn int_list() -> impl Strategy<Value = Vec<i64>> {
    proptest::collection::vec(-10i64..=10, 0..4)
}

fn insert_atom() -> impl Strategy<Value = Atom> {
    (-10i64..=10, int_list(), int_list(), any::<bool>()).prop_map(|(n, mut l, l1, sort)| {
        if sort {
            l.sort();
        }
        Atom::new("insert", vec![Term::Int(n), Term::int_list(&l), Term::int_list(&l1)])
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn sp0_is_contained_in_sp(a in insert_atom()) {
        let s = spec();
        if s.in_sp0(&a).unwrap() {
            prop_assert!(s.in_sp(&a).unwrap());
        }
        // Atoms outside the precondition are correct.
        if !s.precondition(&a).unwrap() {
            let yes = matches!(s.is_correct(&a).unwrap(), Decision::Yes { .. });
            prop_assert!(yes);
        }
    }

    #[test]
    fn cached_answers_repeat(a in insert_atom()) {
        let mut o = Oracle::from_spec(spec());
        let first = o.ask(Question::correct(a.clone())).unwrap();
        let second = o.ask(Question::correct(a)).unwrap();
        prop_assert!(first.fresh && !second.fresh);
        prop_assert_eq!(first.answered, second.answered);
    }
}

/// Fresh correctness questions per strategy on the inc fixture, symptom
/// included. Frozen from audited golden transcripts.
#[test]
fn question_counts_on_inc() {
    let p = parse_program(INC).unwrap();
    let q = parse_query("isort([2,1,3],L)").unwrap();
    let count = |f: &dyn Fn(&mut Diagnoser<'_>)| {
        let mut o = Oracle::from_spec(spec());
        let mut d = Diagnoser::new(&p, &mut o, Bounds::default());
        f(&mut d);
        o.fresh_count(QuestionKind::Correct)
    };
    let alg4 = count(&|d| {
        let s = d.wrong_answer_symptom(&q).unwrap();
        d.success_trace_descent(&s).unwrap();
    });
    let alg5 = count(&|d| {
        let s = d.wrong_answer_symptom(&q).unwrap();
        d.eager_descent(&s, false).unwrap();
    });
    let alg5_answer = count(&|d| {
        let s = d.wrong_answer_symptom(&q).unwrap();
        d.eager_descent(&s, true).unwrap();
    });
    let tree = count(&|d| {
        let s = d.wrong_answer_symptom(&q).unwrap();
        d.tree_descent(&s).unwrap();
    });
    // The eager scan also judges the correct first answers of the two
    // calls it enters, so it asks more than the success-trace descent here.
    assert_eq!((alg4, alg5, alg5_answer, tree), (5, 7, 7, 5));
}
