//! Set-family structures over the support of a query distribution: the
//! SCM decomposition, constellations and pompoms.

mod constellation;
mod pompom;
mod scm;

pub use constellation::{
    default_eta, find_constellation, verify_constellation, Constellation, ConstellationReport, NoConstellation,
};
pub use pompom::{
    default_size_target, extract_discerning_pompoms, extract_revealing_pompoms, greedy_pompom,
    DiscerningSet, Pompom, RevealingSet,
};
pub use scm::{build_scm, ceil_root_power, ScmDecomposition, ScmViolation};

use num_bigint::BigUint;

use crate::word::WordError;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StructureError {
    #[error(transparent)]
    Word(#[from] WordError),
    #[error("query set {set:?} has size {got}, expected {expected}")]
    NonUniform { set: Vec<usize>, got: usize, expected: usize },
    #[error("the decomposition was not built from this formula's support")]
    SupportMismatch,
    #[error("{count} core assignments exceed the cap of {cap}")]
    SigmaCap { count: String, cap: u64 },
    #[error("pompom size target {needed} not met: {detail}")]
    Shortfall { needed: usize, detail: String },
    #[error("the word is not {0}-far from the property")]
    NotFar(String),
    #[error("threshold override `{0}` is invalid")]
    Threshold(String),
}

/// `a^x` compared with `b^y`, exactly.
pub(crate) fn cmp_powers(a: u64, x: u32, b: u64, y: u32) -> std::cmp::Ordering {
    BigUint::from(a).pow(x).cmp(&BigUint::from(b).pow(y))
}
