//! Formula transforms: the combinatorialization pipeline and the
//! amplification preprocessors for 1-sided and 2-sided tests.
//!
//! Every transform has a sureness contract: a word the input formula was
//! `δ`-sure about is `mδ`-sure about in the output, in the same direction,
//! for a per-transform multiplier `m`. The contracts are checked exactly in
//! the tests by enumerating `Ξ^n`.

mod amplify;
mod basic;
mod linearize;
mod pipeline;

pub use amplify::{amplify, majority_accept, AmplifyMode};
pub use basic::{
    default_band, make_equitable, make_zero_one, prune_to_equitable_band, quantize, EquitableOutcome,
    PruneOutcome,
};
pub use linearize::{default_samples, reduce_support_linear, LinearizeOutcome, Verification};
pub use pipeline::{
    combinatorialize, combi_delta, effective_one_sided, effective_two_sided, CombiOutcome,
    EffectiveOneSided, EffectiveTwoSided, PipelineTrace, TraceStage,
};

use crate::config::OverrideError;
use crate::formula::FormulaError;
use crate::word::WordError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TransformError {
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error(transparent)]
    Override(#[from] OverrideError),
    #[error("delta {0} is too large for this transform (needs < {1})")]
    DeltaTooLarge(String, String),
    #[error("pruning keeps weight {0}, below 1/2; the input is not a test with the declared parameters")]
    RemainderTooLight(String),
    #[error("pruning removes every constraint")]
    EmptyRemainder,
    #[error("product of {0} constraints exceeds the amplification cap {1}")]
    AmplificationCap(String, u64),
    #[error("no verified draw within {0} attempts")]
    RetriesExhausted(usize),
    #[error("repetition count must be at least 1")]
    ZeroReps,
    #[error("stage `{stage}`: {source}")]
    Stage {
        stage: &'static str,
        source: Box<TransformError>,
    },
}

impl From<WordError> for TransformError {
    fn from(e: WordError) -> Self {
        TransformError::Formula(e.into())
    }
}

impl TransformError {
    pub(crate) fn at(stage: &'static str) -> impl FnOnce(TransformError) -> TransformError {
        move |e| TransformError::Stage {
            stage,
            source: Box::new(e),
        }
    }

    /// The innermost error, past any stage tags.
    pub fn root(&self) -> &TransformError {
        match self {
            TransformError::Stage { source, .. } => source.root(),
            e => e,
        }
    }
}

/// `log2` of a positive float, as used by every bound in this module.
pub(crate) fn log2(x: f64) -> f64 {
    x.log2()
}
