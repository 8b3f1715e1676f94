//! Built-in case studies: a drive-by-wire system and a switching network.

use std::fmt;
use std::str::FromStr;

use crate::dsl::{Decl, DistSpec, ModelDocument, Overrides};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::model::DrbdModel;

/// Placeholder component rate of the drive-by-wire system (per hour).
pub const DBW_RATE: f64 = 1e-4;
pub const DBW_DORMANCY: f64 = 0.5;
/// Failure rate of every switching element of the network.
pub const SEN_RATE: f64 = 1e-5;
pub const SEN_PATH_LEN: usize = 16;
pub const SEN_DORMANCY: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CaseStudy {
    Dbw,
    Sen,
    SenNoSpare,
}

impl CaseStudy {
    pub const ALL: [CaseStudy; 3] = [CaseStudy::Dbw, CaseStudy::Sen, CaseStudy::SenNoSpare];

    pub fn name(self) -> &'static str {
        match self {
            CaseStudy::Dbw => "dbw",
            CaseStudy::Sen => "sen",
            CaseStudy::SenNoSpare => "sen-nospare",
        }
    }

    pub fn document(self) -> ModelDocument {
        match self {
            CaseStudy::Dbw => dbw_document(),
            CaseStudy::Sen => sen_document(SEN_PATH_LEN, true),
            CaseStudy::SenNoSpare => sen_document(SEN_PATH_LEN, false),
        }
    }

    pub fn model(self, overrides: &Overrides) -> Result<DrbdModel> {
        self.document().to_model(self.name(), overrides)
    }

    /// Default time grid `(t0, t1, steps)`.
    pub fn default_grid(self) -> (f64, f64, usize) {
        match self {
            CaseStudy::Dbw => (0.0, 2e4, 20),
            CaseStudy::Sen | CaseStudy::SenNoSpare => (0.0, 2e5, 20),
        }
    }
}

impl fmt::Display for CaseStudy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CaseStudy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CaseStudy::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Model(format!("unknown case study `{s}`; expected dbw, sen or sen-nospare")))
    }
}

fn block(id: &str, rate: f64) -> Decl {
    Decl::Block { id: id.into(), dist: DistSpec::Exp { rate } }
}

fn spare(id: &str, rate: f64, dormancy: f64) -> Decl {
    Decl::Spare { id: id.into(), dist: DistSpec::Exp { rate }, dormancy }
}

/// `TF · EF · BCU · wsp(PC, SC) · TS · BS`: throttle and engine failure,
/// brake control unit, primary/spare processor, throttle and brake sensors.
pub fn dbw_document() -> ModelDocument {
    let mut decls: Vec<Decl> = ["TF", "EF", "BCU", "PC", "TS", "BS"].iter().map(|id| block(id, DBW_RATE)).collect();
    decls.push(spare("SC", DBW_RATE, DBW_DORMANCY));
    let system = Expr::NaryAnd(vec![
        Expr::var("TF"),
        Expr::var("EF"),
        Expr::var("BCU"),
        Expr::wsp(Expr::var("PC"), "SC"),
        Expr::var("TS"),
        Expr::var("BS"),
    ]);
    ModelDocument { decls, system }
}

/// Input switch `Y`, two redundant paths `L1`, `L2` of `path_len` switching
/// elements each, and output switch `Z`; with spares, `Y` and `Z` are backed
/// by warm spares `Ys` and `Zs`.
pub fn sen_document(path_len: usize, with_spares: bool) -> ModelDocument {
    let mut decls = vec![block("Y", SEN_RATE), block("Z", SEN_RATE)];
    if with_spares {
        decls.push(spare("Ys", SEN_RATE, SEN_DORMANCY));
        decls.push(spare("Zs", SEN_RATE, SEN_DORMANCY));
    }
    let mut paths = Vec::new();
    for path in ["L1", "L2"] {
        let ids: Vec<String> = (1..=path_len).map(|i| format!("{path}_{i:02}")).collect();
        decls.extend(ids.iter().map(|id| block(id, SEN_RATE)));
        paths.push(Expr::NaryAnd(ids.iter().map(Expr::var).collect()));
        decls.push(Decl::Set { name: path.into(), ids });
    }
    let (y, z) = if with_spares {
        (Expr::wsp(Expr::var("Y"), "Ys"), Expr::wsp(Expr::var("Z"), "Zs"))
    } else {
        (Expr::var("Y"), Expr::var("Z"))
    };
    ModelDocument { decls, system: Expr::NaryAnd(vec![y, Expr::NaryOr(paths), z]) }
}
