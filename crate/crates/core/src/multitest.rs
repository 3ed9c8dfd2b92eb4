//! Running many sample-based testers on one shared sample.

use serde::{Deserialize, Serialize};

use crate::formula::Sided;
use crate::ratio::{self, Ratio};
use crate::sampler::{draw_sample, SampleTester, SamplerError};
use crate::seed;
use crate::word::{IndexSet, Word};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiTestPlan {
    pub testers: Vec<SampleTester>,
    /// Independent `μ_p` draws each tester sees.
    pub reps: Vec<usize>,
    #[serde(with = "ratio::serde_str")]
    pub delta: Ratio,
}

/// `⌈log2(2r)⌉` for 1-sided testers (reject if any run rejects), `⌈10·log2 r⌉`
/// for 2-sided ones (majority vote); at least 1.
pub fn default_reps(side: Sided, r: usize) -> usize {
    let r = r.max(1) as f64;
    let v = match side {
        Sided::One => (2.0 * r).log2().ceil(),
        Sided::Two => (10.0 * r.log2()).ceil(),
    };
    (v as usize).max(1)
}

impl MultiTestPlan {
    /// All testers must share `p`, `n` and the alphabet; `reps` defaults per
    /// tester from its side and the number of testers.
    pub fn new(testers: Vec<SampleTester>, reps: Option<Vec<usize>>, delta: Ratio) -> Result<Self, SamplerError> {
        if let Some(first) = testers.first() {
            for t in &testers[1..] {
                if t.p != first.p || t.n != first.n || t.alphabet != first.alphabet {
                    return Err(SamplerError::Dimension("testers disagree on p, n or alphabet".into()));
                }
            }
        }
        let r = testers.len();
        let reps = match reps {
            Some(v) if v.len() != r => {
                return Err(SamplerError::Dimension(format!("{} repetition counts for {r} testers", v.len())))
            }
            Some(v) => v,
            None => testers.iter().map(|t| default_reps(t.side(), r)).collect(),
        };
        if reps.contains(&0) {
            return Err(SamplerError::Dimension("repetition counts must be at least 1".into()));
        }
        Ok(MultiTestPlan { testers, reps, delta })
    }

    pub fn n(&self) -> Option<usize> {
        self.testers.first().map(|t| t.n)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiTestRun {
    /// Per tester: `true` for accept.
    pub answers: Vec<bool>,
    /// Every index queried by any tester: the union of the shared draws.
    pub queried: IndexSet,
    pub draws: usize,
    pub seed: u64,
}

/// Draws `max reps` samples once from `seed`; tester `t` sees draws
/// `0..reps[t]`. A 1-sided tester decides on the union of its draws, a
/// 2-sided tester takes the majority of its per-draw decisions.
pub fn run_multitest(plan: &MultiTestPlan, w: &Word, seed: u64, sigma_cap: u64) -> Result<MultiTestRun, SamplerError> {
    let Some(n) = plan.n() else {
        return Ok(MultiTestRun {
            answers: Vec::new(),
            queried: IndexSet::empty(),
            draws: 0,
            seed,
        });
    };
    let p = &plan.testers[0].p;
    let draws_needed = plan.reps.iter().copied().max().unwrap_or(0);
    let draws: Vec<IndexSet> = (0..draws_needed)
        .map(|j| draw_sample(p, n, seed::derive_seed(seed, "multitest", j as u64)).indices)
        .collect();
    let mut answers = Vec::with_capacity(plan.testers.len());
    for (t, &reps) in plan.testers.iter().zip(&plan.reps) {
        let d = t.decider(w, sigma_cap)?;
        let mine = &draws[..reps];
        let accept = match t.side() {
            Sided::One => {
                let u = mine.iter().fold(IndexSet::empty(), |acc, s| acc.union(s));
                d.accepts(&u)
            }
            Sided::Two => 2 * mine.iter().filter(|u| d.accepts(u)).count() > reps,
        };
        answers.push(accept);
    }
    let queried = draws.iter().fold(IndexSet::empty(), |acc, s| acc.union(s));
    Ok(MultiTestRun {
        answers,
        queried,
        draws: draws_needed,
        seed,
    })
}

/// Tester for the union of the properties: accepts iff some tester accepts.
/// An empty plan rejects.
pub fn union_tester(plan: &MultiTestPlan, w: &Word, seed: u64, sigma_cap: u64) -> Result<bool, SamplerError> {
    Ok(run_multitest(plan, w, seed, sigma_cap)?.answers.iter().any(|&a| a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio::frac;
    use crate::word::{Alphabet, Property};

    fn block(n: usize, b: usize, width: usize) -> Property {
        let mut v = vec![0u8; n];
        for x in &mut v[b * width..(b + 1) * width] {
            *x = 1;
        }
        Property::new(n, Alphabet::binary(), vec![Word::from_letters(v)]).unwrap()
    }

    #[test]
    fn reps_defaults() {
        assert_eq!(default_reps(Sided::One, 8), 4);
        assert_eq!(default_reps(Sided::One, 1), 1);
        assert_eq!(default_reps(Sided::Two, 8), 30);
        assert_eq!(default_reps(Sided::Two, 1), 1);
    }

    #[test]
    fn empty_plan_rejects() {
        let plan = MultiTestPlan::new(Vec::new(), None, frac(1, 2)).unwrap();
        assert!(!union_tester(&plan, &Word::constant(4, 0), 0, 16).unwrap());
    }

    #[test]
    fn single_tester_sees_the_union_of_its_draws() {
        let l = block(12, 0, 3);
        let t = SampleTester::one_sided(l.clone(), frac(1, 4)).unwrap();
        let plan = MultiTestPlan::new(vec![t], Some(vec![3]), frac(1, 2)).unwrap();
        let w = Word::constant(12, 0);
        for s in 0..100 {
            let run = run_multitest(&plan, &w, s, 16).unwrap();
            let hit = run.queried.iter().any(|i| i < 3);
            assert_eq!(run.answers[0], !hit);
        }
    }

    #[test]
    fn members_are_always_accepted_by_the_union() {
        let testers: Vec<SampleTester> =
            (0..4).map(|b| SampleTester::one_sided(block(16, b, 4), frac(1, 3)).unwrap()).collect();
        let plan = MultiTestPlan::new(testers, None, frac(1, 2)).unwrap();
        let w = block(16, 2, 4).members().iter().next().unwrap().clone();
        for s in 0..200 {
            let run = run_multitest(&plan, &w, s, 16).unwrap();
            assert!(run.answers[2]);
            assert!(union_tester(&plan, &w, s, 16).unwrap());
        }
    }

    #[test]
    fn mismatched_plans_are_refused() {
        let a = SampleTester::one_sided(block(8, 0, 2), frac(1, 2)).unwrap();
        let b = SampleTester::one_sided(block(8, 1, 2), frac(1, 3)).unwrap();
        assert!(MultiTestPlan::new(vec![a.clone(), b], None, frac(1, 2)).is_err());
        assert!(MultiTestPlan::new(vec![a.clone()], Some(vec![0]), frac(1, 2)).is_err());
        assert!(MultiTestPlan::new(vec![a], Some(vec![1, 2]), frac(1, 2)).is_err());
    }

    #[test]
    fn queried_set_does_not_grow_with_the_number_of_testers() {
        let w = Word::constant(32, 0);
        let one = MultiTestPlan::new(
            vec![SampleTester::one_sided(block(32, 0, 4), frac(1, 8)).unwrap()],
            Some(vec![3]),
            frac(1, 2),
        )
        .unwrap();
        let many = MultiTestPlan::new(
            (0..8).map(|b| SampleTester::one_sided(block(32, b, 4), frac(1, 8)).unwrap()).collect(),
            Some(vec![3; 8]),
            frac(1, 2),
        )
        .unwrap();
        for s in 0..20 {
            assert_eq!(
                run_multitest(&one, &w, s, 16).unwrap().queried,
                run_multitest(&many, &w, s, 16).unwrap().queried
            );
        }
    }
}
