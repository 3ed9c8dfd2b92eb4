use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use serde::{Deserialize, Serialize};

use super::TransformError;
use crate::formula::ProbFormula;
use crate::ratio::{self, Ratio};
use crate::seed;
use crate::word::all_words;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verification {
    Verified,
    Failed,
    /// `Ξ^n` was too large to enumerate; the draw is returned as is.
    Unverified,
}

#[derive(Debug, Clone)]
pub struct LinearizeOutcome {
    pub formula: ProbFormula,
    pub verification: Verification,
    pub samples: usize,
    pub attempts: usize,
    /// Seed of the draw that was kept.
    pub seed: u64,
    /// `max_w |η_w − η|` of the kept draw, when verification ran.
    pub max_deviation: Option<Ratio>,
}

/// `⌈δ^{-2}·log2|Ξ|·n⌉`.
pub fn default_samples(delta: &Ratio, alphabet_size: usize, n: usize) -> usize {
    let d = ratio::to_f64(delta);
    ((alphabet_size as f64).log2() * n as f64 / (d * d)).ceil().max(1.0) as usize
}

fn draw(p: &ProbFormula, r: usize, seed: u64) -> ProbFormula {
    let weights: Vec<f64> = p.weights().iter().map(ratio::to_f64).collect();
    let dist = WeightedIndex::new(&weights).expect("a formula has positive weight");
    let mut rng = seed::rng(seed);
    let mut counts = vec![0usize; p.len()];
    for _ in 0..r {
        counts[dist.sample(&mut rng)] += 1;
    }
    let keep: Vec<usize> = (0..p.len()).filter(|&i| counts[i] > 0).collect();
    let constraints = keep.iter().map(|&i| p.constraints()[i].clone()).collect();
    let weights = keep
        .iter()
        .map(|&i| ratio::frac(counts[i] as i64, r as i64))
        .collect();
    ProbFormula::new(p.n(), p.alphabet().clone(), constraints, weights)
        .expect("empirical weights sum to one")
        .with_one_sided(p.is_one_sided())
}

/// Replaces `μ` by the empirical distribution of `samples` i.i.d. draws.
///
/// Each attempt is checked against every word: `|η_w − η| ≤ δ`. Failed
/// attempts are redrawn from the next derived seed, up to `retries` attempts;
/// the last draw is returned flagged `Failed` if none passes.
pub fn reduce_support_linear(
    p: &ProbFormula,
    delta: &Ratio,
    samples: usize,
    retries: usize,
    master_seed: u64,
    enum_cap: u64,
) -> Result<LinearizeOutcome, TransformError> {
    let samples = samples.max(1);
    let retries = retries.max(1);
    let words: Option<Vec<_>> = all_words(p.n(), p.alphabet_size(), enum_cap)
        .ok()
        .map(|it| it.collect());
    let reference: Option<Vec<Ratio>> = words
        .as_ref()
        .map(|ws| ws.iter().map(|w| p.satisfaction_unchecked(w)).collect());
    let mut last = None;
    for attempt in 0..retries {
        let s = seed::derive_seed(master_seed, "linearize", attempt as u64);
        let f = draw(p, samples, s);
        let (Some(ws), Some(refs)) = (&words, &reference) else {
            return Ok(LinearizeOutcome {
                formula: f,
                verification: Verification::Unverified,
                samples,
                attempts: attempt + 1,
                seed: s,
                max_deviation: None,
            });
        };
        let dev = ws
            .iter()
            .zip(refs)
            .map(|(w, eta)| {
                let d = f.satisfaction_unchecked(w) - eta;
                if d < ratio::zero() {
                    -d
                } else {
                    d
                }
            })
            .max()
            .unwrap_or_else(ratio::zero);
        let ok = dev <= *delta;
        let outcome = LinearizeOutcome {
            formula: f,
            verification: if ok { Verification::Verified } else { Verification::Failed },
            samples,
            attempts: attempt + 1,
            seed: s,
            max_deviation: Some(dev),
        };
        if ok {
            return Ok(outcome);
        }
        last = Some(outcome);
    }
    Ok(last.expect("at least one attempt"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::Constraint;
    use crate::ratio::{frac, int};
    use crate::word::{Alphabet, IndexSet};

    fn spread(n: usize) -> ProbFormula {
        let cs = (0..n)
            .map(|i| {
                Constraint::from_fn(IndexSet::new(vec![i]), 2, |a| int(1 - a.get(0) as i64)).unwrap()
            })
            .collect();
        ProbFormula::uniform(n, Alphabet::binary(), cs).unwrap()
    }

    #[test]
    fn sample_count_formula() {
        assert_eq!(default_samples(&frac(1, 5), 2, 5), 125);
        assert_eq!(default_samples(&frac(1, 2), 4, 3), 24);
    }

    #[test]
    fn single_support_is_trivially_verified() {
        let c = Constraint::constant(IndexSet::new(vec![0]), 2, frac(1, 3)).unwrap();
        let p = ProbFormula::uniform(3, Alphabet::binary(), vec![c]).unwrap();
        let out = reduce_support_linear(&p, &frac(1, 10), 7, 1, 5, 1 << 10).unwrap();
        assert_eq!(out.formula, p);
        assert_eq!(out.verification, Verification::Verified);
    }

    #[test]
    fn support_is_a_subset_and_deterministic() {
        let p = spread(5);
        let a = reduce_support_linear(&p, &frac(1, 5), 3, 1, 9, 1 << 10).unwrap();
        let b = reduce_support_linear(&p, &frac(1, 5), 3, 1, 9, 1 << 10).unwrap();
        assert_eq!(a.formula, b.formula);
        assert!(a.formula.support_size() <= 3);
        for c in a.formula.constraints() {
            assert!(p.find_query(&c.query).is_some());
        }
    }

    #[test]
    fn retries_find_a_good_draw() {
        let p = spread(5);
        let out = reduce_support_linear(&p, &frac(1, 5), 125, 20, 1, 1 << 10).unwrap();
        assert_eq!(out.verification, Verification::Verified);
        assert!(out.max_deviation.unwrap() <= frac(1, 5));
    }

    #[test]
    fn unverifiable_draws_are_flagged() {
        let p = spread(5);
        let out = reduce_support_linear(&p, &frac(1, 5), 10, 3, 1, 4).unwrap();
        assert_eq!(out.verification, Verification::Unverified);
        assert_eq!(out.attempts, 1);
    }
}
