//! Conversion of non-adaptive constant-query testers into sample-based
//! testers.
//!
//! A non-adaptive test is represented as a [`ProbFormula`]: a distribution
//! over constraints `(Q, S)`. The [`transforms`] turn a test into a
//! combinatorial one, [`structures`] extract constellations and pompoms from
//! its support, and [`sampler`] builds and runs testers that query every
//! index independently with probability `p`. [`eval`] holds the exact and
//! Monte Carlo oracles used to check all of the above.

pub mod config;
pub mod eval;
pub mod formula;
pub mod multitest;
pub mod ratio;
pub mod sampler;
pub mod seed;
pub mod structures;
pub mod transforms;
pub mod witness;
pub mod word;

pub use config::{Caps, Overrides};
pub use formula::{
    condition, is_valid_test, merge_duplicate_queries, sureness, Constraint, FormulaError,
    ProbFormula, Sided, Sureness, TestDeclaration, ValidityReport,
};
pub use ratio::Ratio;
pub use word::{
    distance_to_property, hamming_distance, restrict, substitute, Alphabet, IndexSet,
    PartialPropertyPair, Property, Word, WordError,
};
