//! Property tests for formulas, intervals and the decision procedure.

mod common;

use std::collections::BTreeMap;

use preguss::absint::Interval;
use preguss::frontend::{parse, render, strip_locations, IntWidth};
use preguss::specs::{bindings, parse_clause, parse_predicate, ArithOp, Clause, CmpOp, Pred, Sym, Term};
use preguss::verifier::linear::canonical;
use preguss::verifier::{discharge, DischargeConfig, VcStatus};
use proptest::prelude::*;

use common::gen;
use common::logic::{self, Assignment};

const W: IntWidth = IntWidth::W8;

fn term(vars: &'static [&'static str]) -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![
        4 => (-20i128..20).prop_map(Term::Const),
        4 => proptest::sample::select(vars).prop_map(|v| Term::Var(v.to_string())),
        1 => Just(Term::IntMax),
        1 => Just(Term::IntMin),
    ];
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|t| Term::Neg(Box::new(t))),
            (
                proptest::sample::select(&[ArithOp::Add, ArithOp::Sub, ArithOp::Mul, ArithOp::Div, ArithOp::Rem][..]),
                inner.clone(),
                inner
            )
                .prop_map(|(op, a, b)| Term::Bin(op, Box::new(a), Box::new(b))),
        ]
    })
}

fn cmp_op() -> impl Strategy<Value = CmpOp> {
    proptest::sample::select(&[CmpOp::Eq, CmpOp::Ne, CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge][..])
}

fn pred(vars: &'static [&'static str]) -> impl Strategy<Value = Pred> {
    let atom = (cmp_op(), term(vars), term(vars)).prop_map(|(op, a, b)| Pred::Cmp(op, a, b));
    atom.prop_recursive(3, 16, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(|p| Pred::Not(Box::new(p))),
            proptest::collection::vec(inner.clone(), 2..4).prop_map(Pred::And),
            proptest::collection::vec(inner.clone(), 2..4).prop_map(Pred::Or),
            (inner.clone(), inner).prop_map(|(a, b)| Pred::Implies(Box::new(a), Box::new(b))),
        ]
    })
}

fn env(x: i128, y: i128) -> Assignment {
    BTreeMap::from([("x".to_string(), x), ("y".to_string(), y)])
}

fn value() -> impl Strategy<Value = i128> {
    W.min()..=W.max()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn predicates_survive_printing(p in pred(&["x", "y"]), x in value(), y in value()) {
        let text = p.to_string();
        let back = parse_predicate(&text).map_err(|e| TestCaseError::fail(format!("{e}: {text}")))?;
        prop_assert_eq!(back.to_string(), text.clone());
        prop_assert_eq!(logic::pred(&back, W, &env(x, y)), logic::pred(&p, W, &env(x, y)), "{}", text);
    }

    #[test]
    fn clauses_survive_printing(p in pred(&["x", "y"]), kind in 0usize..4) {
        let c = match kind {
            0 => Clause::Requires(p),
            1 => Clause::Ensures(p),
            2 => Clause::LoopInvariant(p),
            _ => Clause::Assert { label: Some("target".into()), pred: p },
        };
        let text = c.to_string();
        prop_assert!(text.ends_with(';'), "{}", text);
        let back = parse_clause(&text).map_err(|e| TestCaseError::fail(format!("{e}: {text}")))?;
        prop_assert_eq!(back.to_string(), text);
    }

    #[test]
    fn programs_survive_printing(seed in any::<u64>()) {
        let src = gen::program(&mut gen::rng(seed));
        let p = parse(&src).unwrap();
        prop_assert_eq!(&parse(&src).unwrap(), &p);
        let text = render(&p, &[]).unwrap();
        let q = parse(&text).unwrap();
        prop_assert_eq!(strip_locations(&q), strip_locations(&p));
        prop_assert_eq!(render(&q, &[]).unwrap(), text);
    }

    #[test]
    fn substitutions_compose(p in pred(&["x", "y", "z"]), t in term(&["z"]), u in term(&["z"])) {
        let a = bindings([(Sym::Var("x".into()), t.clone())]);
        let b = bindings([(Sym::Var("y".into()), u.clone())]);
        let both = bindings([(Sym::Var("x".into()), t), (Sym::Var("y".into()), u)]);
        prop_assert_eq!(p.substitute(&a).substitute(&b), p.substitute(&both));
    }

    #[test]
    fn substitution_agrees_with_evaluation(p in pred(&["x", "y"]), t in term(&["y"]), x in value(), y in value()) {
        let q = p.substitute(&bindings([(Sym::Var("x".into()), t.clone())]));
        let Some(tx) = logic::term(&t, W, &env(0, y)) else { return Ok(()) };
        let (Some(a), Some(b)) = (logic::pred(&q, W, &env(x, y)), logic::pred(&p, W, &env(tx, y))) else {
            return Ok(());
        };
        prop_assert_eq!(a, b);
    }

    #[test]
    fn canonical_forms_are_equivalent(p in pred(&["x", "y"]), x in value(), y in value()) {
        let c = canonical(&p, W);
        if let (Some(a), Some(b)) = (logic::pred(&p, W, &env(x, y)), logic::pred(&c, W, &env(x, y))) {
            prop_assert_eq!(a, b, "{} vs {}", p, c);
        }
    }

    #[test]
    fn simplify_is_equivalent(p in pred(&["x", "y"]), x in value(), y in value()) {
        let s = p.simplify(W);
        if let (Some(a), Some(b)) = (logic::pred(&p, W, &env(x, y)), logic::pred(&s, W, &env(x, y))) {
            prop_assert_eq!(a, b, "{} vs {}", p, s);
        }
    }

    #[test]
    fn interval_arithmetic_is_sound(
        (a, b) in (-300i128..300, 0i128..100).prop_map(|(a, d)| (a, a + d)),
        (c, d) in (-300i128..300, 0i128..100).prop_map(|(c, d)| (c, c + d)),
        i in 0i128..100, j in 0i128..100,
    ) {
        let (x, y) = (a + i % (b - a + 1), c + j % (d - c + 1));
        let (p, q) = (Interval::of(a, b), Interval::of(c, d));
        prop_assert!(p.add(q).contains(x + y));
        prop_assert!(p.sub(q).contains(x - y));
        prop_assert!(p.mul(q).contains(x * y));
        prop_assert!(p.neg().contains(-x));
        if y != 0 {
            prop_assert!(p.div(q).contains(x / y), "{p} / {q} misses {x} / {y}");
            prop_assert!(p.rem(q).contains(x % y), "{p} % {q} misses {x} % {y}");
        }
        prop_assert!(p.join(q).contains(x) && p.join(q).contains(y));
        prop_assert_eq!(p.meet(q).contains(y), p.contains(y));
        prop_assert!(p.join(q).le(p.widen(q, W)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Exhaustive over both symbols at width 8.
    #[test]
    fn discharge_verdicts_are_sound(p in pred(&["x", "y"])) {
        let (status, _) = discharge(&p, W, &DischargeConfig::default());
        match status {
            VcStatus::Valid => {
                for x in W.min()..=W.max() {
                    for y in W.min()..=W.max() {
                        prop_assert_ne!(logic::pred(&p, W, &env(x, y)), Some(false), "{} fails at x={}, y={}", p, x, y);
                    }
                }
            }
            VcStatus::Invalid { witness } => {
                let mut e = env(0, 0);
                e.extend(witness.clone());
                prop_assert_eq!(logic::pred(&p, W, &e), Some(false), "{} at {:?}", p, witness);
            }
            VcStatus::Unknown { .. } => {}
        }
    }
}
