use serde::{Deserialize, Serialize};

use crate::formula::ProbFormula;
use crate::ratio::{self, Ratio};
use crate::word::IndexSet;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportWeightReport {
    /// `|⋃_{F′} Q|`.
    pub union_size: usize,
    #[serde(with = "ratio::serde_str")]
    pub weight: Ratio,
    /// `εn/2`.
    #[serde(with = "ratio::serde_str")]
    pub union_limit: Ratio,
    /// Whether the union is small enough for the bound to apply.
    pub applies: bool,
    /// `2δ`, or `δ` (strict) for a 1-sided test.
    #[serde(with = "ratio::serde_str")]
    pub bound: Ratio,
    pub strict: bool,
    /// `true` when the bound does not apply or is respected.
    pub holds: bool,
}

/// A sub-collection of constraints that touches at most `εn/2` indices
/// carries weight at most `2δ` in a valid test (below `δ` when 1-sided).
pub fn check_support_weight_lemma(
    p: &ProbFormula,
    epsilon: &Ratio,
    delta: &Ratio,
    subset: &[usize],
    one_sided: bool,
) -> SupportWeightReport {
    let union = subset
        .iter()
        .filter_map(|&i| p.constraints().get(i))
        .fold(IndexSet::empty(), |acc, c| acc.union(&c.query));
    let weight = p.weight_of(&subset.iter().copied().filter(|&i| i < p.len()).collect::<Vec<_>>());
    let union_limit = epsilon * ratio::int(p.n() as i64) / ratio::int(2);
    let applies = ratio::int(union.len() as i64) <= union_limit;
    let bound = if one_sided { delta.clone() } else { delta * ratio::int(2) };
    let ok = if one_sided { weight < bound } else { weight <= bound };
    SupportWeightReport {
        union_size: union.len(),
        weight,
        union_limit,
        applies,
        bound,
        strict: one_sided,
        holds: !applies || ok,
    }
}
