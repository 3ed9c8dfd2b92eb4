use pompom_core::eval::EvalError;
use pompom_core::sampler::SamplerError;
use pompom_core::structures::{NoConstellation, StructureError};
use pompom_core::transforms::TransformError;
use pompom_core::{FormulaError, WordError};

/// Failure classes, each with its own exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Cap(String),
    #[error("{0}")]
    Hypothesis(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Validation(_) => 2,
            CliError::Cap(_) => 3,
            CliError::Hypothesis(_) => 4,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Validation(_) => "validation failure",
            CliError::Cap(_) => "cap exceeded",
            CliError::Hypothesis(_) => "lemma hypothesis violated",
        }
    }
}

#[derive(Clone, Copy)]
enum Class {
    Usage,
    Validation,
    Cap,
    Hypothesis,
}

fn build(class: Class, msg: String) -> CliError {
    match class {
        Class::Usage => CliError::Usage(msg),
        Class::Validation => CliError::Validation(msg),
        Class::Cap => CliError::Cap(msg),
        Class::Hypothesis => CliError::Hypothesis(msg),
    }
}

fn word_class(e: &WordError) -> Class {
    match e {
        WordError::EnumerationCap { .. } => Class::Cap,
        _ => Class::Validation,
    }
}

fn formula_class(e: &FormulaError) -> Class {
    match e {
        FormulaError::Word(w) => word_class(w),
        FormulaError::TableTooLarge(..) => Class::Cap,
        FormulaError::Declaration(_) => Class::Usage,
        _ => Class::Validation,
    }
}

fn structure_class(e: &StructureError) -> Class {
    match e {
        StructureError::Word(w) => word_class(w),
        StructureError::SigmaCap { .. } => Class::Cap,
        StructureError::Shortfall { .. } | StructureError::NotFar(_) => Class::Hypothesis,
        StructureError::Threshold(_) => Class::Usage,
        _ => Class::Validation,
    }
}

fn sampler_class(e: &SamplerError) -> Class {
    match e {
        SamplerError::Word(w) => word_class(w),
        SamplerError::Structure(s) => structure_class(s),
        SamplerError::Override(_) | SamplerError::Rate(_) => Class::Usage,
        SamplerError::NoConstellation(_) | SamplerError::InvalidDiscerning(_) => Class::Hypothesis,
        SamplerError::SigmaCap { .. } => Class::Cap,
        _ => Class::Validation,
    }
}

fn transform_class(e: &TransformError) -> Class {
    match e.root() {
        TransformError::Formula(f) => formula_class(f),
        TransformError::Override(_) | TransformError::ZeroReps => Class::Usage,
        TransformError::AmplificationCap(..) => Class::Cap,
        TransformError::DeltaTooLarge(..)
        | TransformError::RemainderTooLight(_)
        | TransformError::EmptyRemainder
        | TransformError::RetriesExhausted(_) => Class::Hypothesis,
        TransformError::Stage { .. } => Class::Validation,
    }
}

fn eval_class(e: &EvalError) -> Class {
    match e {
        EvalError::Word(w) => word_class(w),
        EvalError::Formula(f) => formula_class(f),
        EvalError::Sampler(s) => sampler_class(s),
        EvalError::Range(_) => Class::Usage,
        EvalError::Precondition(_) => Class::Hypothesis,
        EvalError::ExactCap { .. } => Class::Cap,
    }
}

macro_rules! classify {
    ($t:ty, $f:ident) => {
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                build($f(&e), e.to_string())
            }
        }
    };
}

classify!(WordError, word_class);
classify!(FormulaError, formula_class);
classify!(StructureError, structure_class);
classify!(SamplerError, sampler_class);
classify!(TransformError, transform_class);
classify!(EvalError, eval_class);

impl From<NoConstellation> for CliError {
    fn from(e: NoConstellation) -> Self {
        CliError::Hypothesis(e.to_string())
    }
}

impl From<pompom_core::config::OverrideError> for CliError {
    fn from(e: pompom_core::config::OverrideError) -> Self {
        CliError::Usage(e.to_string())
    }
}
