//! Exact and Monte Carlo oracles, concentration bounds and numeric checks.

mod acceptance;
mod appendix;
mod bounds;
mod support;
mod table;

pub use acceptance::{
    evaluate_test_quality, exact_sampler_acceptance, monte_carlo_acceptance, EvalReport, Method, QualityExtreme,
    QualityMethod, QualityReport, Subject,
};
pub use appendix::{
    default_appendix_grid, threshold_log2, verify_appendix_calculations, AppendixReport, Calc, CalcRow, GridPoint,
    Link, RowStatus,
};
pub use bounds::{check_deviation_bound, tail_bound, DeviationReport, TailBound};
pub use support::{check_support_weight_lemma, SupportWeightReport};
pub use table::render_table;

use crate::formula::FormulaError;
use crate::sampler::SamplerError;
use crate::word::WordError;

/// Two-sided 99% normal quantile.
pub const Z99: f64 = 2.5758;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error(transparent)]
    Word(#[from] WordError),
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error(transparent)]
    Sampler(#[from] SamplerError),
    #[error("parameter out of range: {0}")]
    Range(String),
    #[error("lemma precondition violated: {0}")]
    Precondition(String),
    #[error("n = {n} exceeds the exact-enumeration cap of {cap}")]
    ExactCap { n: usize, cap: usize },
}
