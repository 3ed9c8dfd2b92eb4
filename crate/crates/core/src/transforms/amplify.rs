use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::TransformError;
use crate::formula::{merge_duplicate_queries, Constraint, ProbFormula};
use crate::ratio::{self, Ratio};
use crate::word::{IndexSet, Word};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmplifyMode {
    /// Accept only if every run accepts.
    RejectIfAny,
    /// Accept if more than half of the runs accept.
    Majority,
}

/// Probability that more than half of independent runs accept, given each
/// run's acceptance probability.
pub fn majority_accept(probs: &[Ratio]) -> Ratio {
    // dist[j] = P(exactly j acceptances so far)
    let mut dist = vec![ratio::one()];
    for p in probs {
        let q = Ratio::one() - p;
        let mut next = vec![ratio::zero(); dist.len() + 1];
        for (j, d) in dist.iter().enumerate() {
            if d.is_zero() {
                continue;
            }
            next[j] += d * &q;
            next[j + 1] += d * p;
        }
        dist = next;
    }
    let need = probs.len() / 2 + 1;
    dist.into_iter().skip(need).sum()
}

pub(crate) fn combine(values: &[Ratio], mode: AmplifyMode) -> Ratio {
    match mode {
        AmplifyMode::RejectIfAny => values.iter().product(),
        AmplifyMode::Majority => majority_accept(values),
    }
}

/// Constraint of one amplified run: the union of the components' query sets,
/// accepting with the combined probability.
pub(crate) fn run_constraint(
    parts: &[&Constraint],
    alphabet_size: usize,
    mode: AmplifyMode,
    table_cap: u64,
) -> Result<Constraint, TransformError> {
    let union = parts
        .iter()
        .fold(IndexSet::empty(), |acc, c| acc.union(&c.query));
    if crate::config::checked_count(alphabet_size, union.len(), table_cap).is_none() {
        return Err(TransformError::AmplificationCap(
            format!("a table over {} indices", union.len()),
            table_cap,
        ));
    }
    let positions: Vec<Vec<usize>> = parts
        .iter()
        .map(|c| c.query.iter().map(|i| union.position(i).unwrap()).collect())
        .collect();
    Constraint::from_fn(union, alphabet_size, |a: &Word| {
        let mut values = Vec::with_capacity(parts.len());
        for (part, pos) in parts.iter().zip(&positions) {
            let r = pos
                .iter()
                .fold(0usize, |acc, &j| acc * alphabet_size + a.get(j) as usize);
            values.push(part.table[r].clone());
        }
        combine(&values, mode)
    })
    .map_err(TransformError::from)
}

/// The formula of running `p` `reps` times independently, materialized as a
/// distribution over tuples of support constraints.
pub fn amplify(
    p: &ProbFormula,
    reps: usize,
    mode: AmplifyMode,
    cap: u64,
) -> Result<ProbFormula, TransformError> {
    if reps == 0 {
        return Err(TransformError::ZeroReps);
    }
    let support = p.support();
    let total = crate::config::checked_count(support.len(), reps, cap).ok_or_else(|| {
        TransformError::AmplificationCap(format!("{}^{}", support.len(), reps), cap)
    })?;
    let k = p.alphabet_size();
    let mut raw = Vec::with_capacity(total as usize);
    let mut idx = vec![0usize; reps];
    loop {
        let parts: Vec<&Constraint> = idx.iter().map(|&j| &p.constraints()[support[j]]).collect();
        let weight: Ratio = idx.iter().map(|&j| &p.weights()[support[j]]).product();
        raw.push((run_constraint(&parts, k, mode, cap.max(1 << 20))?, weight));
        let mut pos = reps;
        loop {
            if pos == 0 {
                let f = merge_duplicate_queries(p.n(), p.alphabet().clone(), raw)
                    .map_err(TransformError::from)?;
                return Ok(f.with_one_sided(p.is_one_sided() && mode == AmplifyMode::RejectIfAny));
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < support.len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}
