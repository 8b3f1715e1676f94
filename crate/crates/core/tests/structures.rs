mod common;

use std::collections::BTreeSet;

use common::*;
use drbd_core::montecarlo::sample_at;
use drbd_core::reliability::{rel_expr, rel_nested};
use drbd_core::structures::{build_nested, Family, IndexSet, NestedIndex, Shape};
use drbd_core::{eval_expr, Expr, Sample, SampleValue, DEFAULT_TOL};

fn set(ids: &[&str]) -> IndexSet {
    ids.iter().map(|s| s.to_string()).collect()
}

fn family(entries: &[(&str, &[&str])]) -> Family {
    entries.iter().map(|(k, v)| (k.to_string(), set(v))).collect()
}

fn examples() -> Vec<NestedIndex> {
    vec![
        NestedIndex::flat(Shape::Parallel, ["0", "1", "2"]).unwrap(),
        NestedIndex::two_level(Shape::Series, set(&["a", "b"]), family(&[("a", &["0", "1"]), ("b", &["2"])])).unwrap(),
        NestedIndex::two_level(Shape::Parallel, set(&["0", "1"]), family(&[("0", &["0", "1"]), ("1", &["2", "3"])])).unwrap(),
        NestedIndex::four_level(
            Shape::Parallel,
            set(&["j"]),
            family(&[("j", &["a0", "a1"])]),
            family(&[("a0", &["l0", "l1"]), ("a1", &["l2"])]),
            family(&[("l0", &["0", "1"]), ("l1", &["2"]), ("l2", &["3", "4"])]),
        )
        .unwrap(),
    ]
}

/// Set of times, from a finite candidate list, at which the block survives.
fn event(x: drbd_core::ExtTime, times: &[f64]) -> BTreeSet<usize> {
    (0..times.len()).filter(|&i| x.survives(times[i])).collect()
}

/// Brute-force event semantics: a series structure survives on the
/// intersection of its parts' events, a parallel one on their union.
fn event_of(idx: &NestedIndex, s: &Sample, times: &[f64]) -> BTreeSet<usize> {
    idx.fold(
        &mut |id| {
            let SampleValue::Basic(x) = s.get(&format!("X{id}")).unwrap() else { unreachable!() };
            Ok(event(x, times))
        },
        &mut |shape, parts| {
            let mut it = parts.into_iter();
            let first = it.next().unwrap();
            Ok(it.fold(first, |acc, p| match shape {
                Shape::Series => acc.intersection(&p).copied().collect(),
                Shape::Parallel => acc.union(&p).copied().collect(),
            }))
        },
    )
    .unwrap()
}

#[test]
fn nested_expression_matches_event_semantics() {
    let times: Vec<f64> = (0..40).map(|i| i as f64 * 0.1).collect();
    for idx in examples() {
        let root = build_nested(&idx, &|id| Some(Expr::var(format!("X{id}")))).unwrap();
        let blocks = idx.leaves().iter().map(|id| (format!("X{id}"), exp(1.0))).collect::<Vec<_>>();
        let m = model(blocks.iter().map(|(k, v)| (k.as_str(), v.clone())).collect(), root.clone());
        for i in 0..200 {
            let s = sample_at(&m, 4, i).unwrap();
            let fail = eval_expr(&root, &s).unwrap();
            assert_eq!(event(fail, &times), event_of(&idx, &s, &times));
        }
        let t = 0.6;
        let via_nested = rel_nested(&idx, &|_| Some(exp_rel(1.0, t))).unwrap();
        assert!((rel_expr(&m, t, DEFAULT_TOL).unwrap() - via_nested).abs() < 1e-12);
    }
}

#[test]
fn sen_shape_as_depth_four_with_singletons() {
    // series of {input switch, the two paths in parallel, output switch};
    // the singleton innermost sets collapse
    let idx = NestedIndex::four_level(
        Shape::Series,
        set(&["in", "mid", "out"]),
        family(&[("in", &["y"]), ("mid", &["p1", "p2"]), ("out", &["z"])]),
        family(&[("y", &["ly"]), ("p1", &["a", "b"]), ("p2", &["c", "d"]), ("z", &["lz"])]),
        family(&[("ly", &["Y"]), ("a", &["A"]), ("b", &["B"]), ("c", &["C"]), ("d", &["D"]), ("lz", &["Z"])]),
    )
    .unwrap();
    let r = |id: &str| match id {
        "Y" | "Z" => 0.9,
        _ => 0.8,
    };
    let want = 0.9 * 0.9 * (1.0 - (1.0 - 0.64f64).powi(2));
    assert!((rel_nested(&idx, &|id| Some(r(id))).unwrap() - want).abs() < 1e-12);
}
