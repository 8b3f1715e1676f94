//! Time-to-failure algebra for dynamic reliability block diagrams.
//!
//! Structure functions are [`Expr`] trees over extended failure times
//! ([`ExtTime`], nonnegative reals plus `INF`). The crate evaluates them on
//! samples, simplifies them by rewriting, computes reliability in closed
//! form or by quadrature, and estimates it by Monte Carlo simulation.

pub mod casestudy;
pub mod distribution;
pub mod dsl;
pub mod error;
pub mod expr;
pub mod model;
pub mod montecarlo;
pub mod quadrature;
pub mod reliability;
pub mod report;
pub mod rewrite;
pub mod structures;
pub mod time;

pub use casestudy::CaseStudy;
pub use distribution::{CustomLaw, Distribution, SpareSpec};
pub use dsl::{parse, parse_expr, parse_input, Input, ModelDocument, Overrides};
pub use error::{Error, Position, Result};
pub use expr::{eval_expr, BlockId, BlockIndex, CompiledExpr, Expr, Sample, SampleValue};
pub use model::{BlockLaw, DrbdModel};
pub use montecarlo::{compare, estimate_curve, estimate_rel, judge, CiLevel, McConfig, McEstimate, Verdict};
pub use reliability::{rel_curve, rel_expr, DEFAULT_TOL};
pub use rewrite::{builtin_rules, check_equiv, simplify, Equivalence, Mode, RewriteRule, RuleSet};
pub use structures::{build_nested, parallel, series, NestedIndex, Shape};
pub use time::ExtTime;
