mod common;

use common::*;
use drbd_core::dsl::parse_expr;
use drbd_core::rewrite::{after_nested, after_nested_conjunctive, builtin_rules, check_equiv, simplify, Equivalence, Mode};
use drbd_core::{eval_expr, Expr, ExtTime};

fn simp(text: &str) -> String {
    simplify(&parse_expr(text).unwrap(), &builtin_rules(), 1000).unwrap().to_string()
}

#[test]
fn textbook_simplifications() {
    assert_eq!(simp("X + X*Y"), "X");
    assert_eq!(simp("X * never"), "X");
    assert_eq!(simp("X + never"), "never");
    assert_eq!(simp("X * always"), "always");
    assert_eq!(simp("X + always"), "X");
    assert_eq!(simp("after(X, Y) + after(Y, X)"), "never");
    assert_eq!(simp("after(X, Y) * simult(Y, X)"), "incl_after(X, Y)");
    assert_eq!(simp("(B + A) * (A + B)"), "A + B");
}

#[test]
fn rules_hold_on_tied_and_infinite_samples() {
    // a quarter of the draws of each block tie with each other block
    let m = tie_model();
    for r in builtin_rules().rules() {
        let v = check_equiv(&r.lhs, &r.rhs, &m, 50_000, 11).unwrap();
        assert!(v.is_equivalent(), "{} fails on ties: {v:?}", r.name);
    }
}

#[test]
fn conjunctive_nested_after_is_refuted() {
    let conj = after_nested_conjunctive();
    for (label, m) in rule_models() {
        match check_equiv(&conj.lhs, &conj.rhs, &m, 100_000, 5).unwrap() {
            Equivalence::Counterexample { sample, left, right, .. } => {
                assert_eq!(eval_expr(&conj.lhs, &sample).unwrap(), left);
                assert_eq!(eval_expr(&conj.rhs, &sample).unwrap(), right);
                assert_ne!(left, right, "{label}");
            }
            Equivalence::Equivalent { .. } => panic!("conjunctive reading survived on {label}"),
        }
    }
    let rules = builtin_rules();
    assert!(rules.rules().iter().all(|r| r.name != conj.name));
    assert_eq!(rules.get("after_nested"), Some(&after_nested()));
}

#[test]
fn by_hand_counterexample() {
    // X > Y > Z: X ▷ (Y ▷ Z) = X, but the conjunctive right side gives Y
    let s = drbd_core::Sample::from_pairs([
        ("X", drbd_core::SampleValue::Basic(ExtTime::finite(3.0).unwrap())),
        ("Y", drbd_core::SampleValue::Basic(ExtTime::finite(2.0).unwrap())),
        ("Z", drbd_core::SampleValue::Basic(ExtTime::finite(1.0).unwrap())),
    ])
    .unwrap();
    let conj = after_nested_conjunctive();
    assert_eq!(eval_expr(&conj.lhs, &s).unwrap(), ExtTime::finite(3.0).unwrap());
    assert_eq!(eval_expr(&conj.rhs, &s).unwrap(), ExtTime::finite(2.0).unwrap());
    let good = after_nested();
    assert_eq!(eval_expr(&good.rhs, &s).unwrap(), ExtTime::finite(3.0).unwrap());
}

#[test]
fn expand_mode_is_sound_on_samples() {
    let rules = builtin_rules().with_mode(Mode::Expand);
    let m = expr_model();
    let mut gen = ExprGen::new(3);
    for _ in 0..300 {
        let e = gen.expr(5);
        let out = simplify(&e, &rules, 100_000).unwrap();
        assert!(check_equiv(&e, &out, &m, 200, 8).unwrap().is_equivalent(), "{e} vs {out}");
    }
}

#[test]
fn check_equiv_rejects_unknown_blocks() {
    let m = rule_models().remove(0).1;
    assert!(check_equiv(&Expr::var("Q"), &Expr::var("X"), &m, 10, 0).is_err());
    assert!(check_equiv(&Expr::var("X"), &Expr::var("X"), &m, 0, 0).is_err());
}
