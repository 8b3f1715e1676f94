//! Fixtures shared by the benchmarks.

use drbd_core::casestudy::CaseStudy;
use drbd_core::{DrbdModel, Expr, Overrides};

pub fn sen() -> DrbdModel {
    CaseStudy::Sen.model(&Overrides::default()).expect("built-in model is valid")
}

/// A wide expression with plenty of absorption and idempotence redexes.
pub fn redundant_expr(width: usize) -> Expr {
    let var = |i: usize| Expr::var(format!("B{}", i % 7));
    (0..width)
        .map(|i| Expr::or(var(i), Expr::and(var(i), var(i + 3))))
        .reduce(Expr::and)
        .expect("width is positive")
}
