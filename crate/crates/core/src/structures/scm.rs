use std::cmp::Ordering;
use std::collections::HashSet;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use super::{cmp_powers, StructureError};
use crate::ratio::Ratio;
use crate::word::IndexSet;

/// Smallest integer `t` with `t^q ≥ n^i`, i.e. `⌈n^{i/q}⌉`.
pub fn ceil_root_power(n: u64, i: u32, q: u32) -> u64 {
    if q == 0 {
        return 1;
    }
    let guess = (n as f64).powf(i as f64 / q as f64).ceil() as u64;
    let mut t = guess.saturating_sub(2);
    while cmp_powers(t, q, n, i) == Ordering::Less {
        t += 1;
    }
    while t > 0 && cmp_powers(t - 1, q, n, i) != Ordering::Less {
        t -= 1;
    }
    t
}

/// The families `sets_i`, `core_i` and `match_i` for `i = 0..=q`.
///
/// `core_0` collects indices in at least `thresholds[0]` sets of `sets_0`
/// (default `⌈n^{1/q}⌉`); for `i ≥ 1`, `core_i` uses `thresholds[i]`
/// (default `⌈n^{i/q}⌉`) over `sets_i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScmDecomposition {
    pub n: usize,
    pub q: usize,
    pub thresholds: Vec<u64>,
    pub sets: Vec<Vec<IndexSet>>,
    pub cores: Vec<IndexSet>,
    pub matches: Vec<Vec<IndexSet>>,
    /// `sets_q \ match_q`; always empty.
    pub leftover: Vec<IndexSet>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScmViolation {
    pub level: usize,
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub set: Option<IndexSet>,
}

fn default_thresholds(n: usize, q: usize) -> Vec<u64> {
    (0..=q)
        .map(|i| ceil_root_power(n as u64, i.max(1) as u32, q as u32))
        .collect()
}

fn core_of(sets: &[IndexSet], n: usize, threshold: u64) -> IndexSet {
    let mut count = vec![0u64; n];
    for s in sets {
        for j in s.iter() {
            count[j] += 1;
        }
    }
    (0..n).filter(|&j| count[j] >= threshold).collect()
}

/// Runs the inductive construction over a `q`-uniform family.
pub fn build_scm(
    support: &[IndexSet],
    n: usize,
    q: usize,
    thresholds: Option<Vec<u64>>,
) -> Result<ScmDecomposition, StructureError> {
    for s in support {
        if s.len() != q {
            return Err(StructureError::NonUniform {
                set: s.as_slice().to_vec(),
                got: s.len(),
                expected: q,
            });
        }
        s.check_bound(n)?;
    }
    let thresholds = match thresholds {
        Some(t) if t.len() == q + 1 => t,
        Some(t) => return Err(StructureError::Threshold(format!("{} values for q={q}", t.len()))),
        None => default_thresholds(n, q),
    };
    let mut sets = Vec::with_capacity(q + 1);
    let mut cores = Vec::with_capacity(q + 1);
    let mut matches = Vec::with_capacity(q + 1);
    let mut current: Vec<IndexSet> = support.to_vec();
    for i in 0..=q {
        let core = core_of(&current, n, thresholds[i]);
        let (matched, rest): (Vec<IndexSet>, Vec<IndexSet>) = current
            .iter()
            .cloned()
            .partition(|s| s.intersection_len(&core) == q - i);
        sets.push(current);
        cores.push(core);
        matches.push(matched);
        current = rest;
    }
    Ok(ScmDecomposition {
        n,
        q,
        thresholds,
        sets,
        cores,
        matches,
        leftover: current,
    })
}

impl ScmDecomposition {
    /// Structural invariants that hold for any input: nesting, the match
    /// partition, the match-cap bound `|Q ∩ core_i| ≤ q−i` and the
    /// match-out property `(Q \ core_i) ∩ core_{i−1} = ∅`.
    pub fn violations(&self) -> Vec<ScmViolation> {
        let q = self.q;
        let mut out = Vec::new();
        let mut bad = |level: usize, kind: &str, set: Option<&IndexSet>| {
            out.push(ScmViolation {
                level,
                kind: kind.to_string(),
                set: set.cloned(),
            })
        };
        for i in 0..=q {
            for s in &self.sets[i] {
                if s.intersection_len(&self.cores[i]) > q - i {
                    bad(i, "match_cap", Some(s));
                }
            }
            for s in &self.matches[i] {
                if s.intersection_len(&self.cores[i]) != q - i {
                    bad(i, "match_overlap", Some(s));
                }
                if i >= 1 {
                    let outside = s.difference(&self.cores[i]);
                    if !outside.is_disjoint(&self.cores[i - 1]) {
                        bad(i, "match_out", Some(s));
                    }
                }
            }
            if i >= 1 {
                let prev: HashSet<&IndexSet> = self.sets[i - 1].iter().collect();
                if self.sets[i].iter().any(|s| !prev.contains(s)) {
                    bad(i, "sets_nested", None);
                }
                if !self.cores[i].is_subset(&self.cores[i - 1]) {
                    bad(i, "cores_nested", None);
                }
                let matched: HashSet<&IndexSet> = self.matches[i - 1].iter().collect();
                let expected: Vec<&IndexSet> = self.sets[i - 1]
                    .iter()
                    .filter(|s| !matched.contains(s))
                    .collect();
                if expected.len() != self.sets[i].len()
                    || expected.iter().zip(&self.sets[i]).any(|(a, b)| *a != b)
                {
                    bad(i, "sets_recurrence", None);
                }
            }
        }
        let mut seen: HashSet<&IndexSet> = HashSet::new();
        let mut total = 0;
        for (i, m) in self.matches.iter().enumerate() {
            for s in m {
                total += 1;
                if !seen.insert(s) {
                    bad(i, "match_disjoint", Some(s));
                }
            }
        }
        let support: HashSet<&IndexSet> = self.sets[0].iter().collect();
        if total + self.leftover.len() != support.len()
            || self.leftover.iter().any(|s| seen.contains(s) || !support.contains(s))
        {
            bad(q, "partition", None);
        }
        if !self.leftover.is_empty() {
            bad(q, "leftover", None);
        }
        out
    }

    /// Core size bounds `|core_i| < ηq·n^{1−i/q}` (with `i = 1` for
    /// `core_0`), checked exactly. They follow when `|supp| ≤ ηn` and the
    /// default thresholds are in force.
    pub fn size_bound_violations(&self, eta: &Ratio) -> Vec<ScmViolation> {
        let n = self.n as u64;
        let q = self.q as u32;
        let num = eta.numer().to_biguint().unwrap_or_default();
        let den = eta.denom().to_biguint().unwrap_or_default();
        let mut out = Vec::new();
        for (i, core) in self.cores.iter().enumerate() {
            let e = i.max(1) as u32;
            // |C|·den < num·q·n^{1−e/q}  ⇔  (|C|·den)^q < (num·q)^q · n^{q−e}
            let lhs = (BigUint::from(core.len() as u64) * &den).pow(q);
            let rhs = (&num * BigUint::from(q)).pow(q) * BigUint::from(n).pow(q - e);
            if lhs >= rhs {
                out.push(ScmViolation {
                    level: i,
                    kind: "core_size".into(),
                    set: None,
                });
            }
        }
        out
    }

    /// All sets the decomposition was built from.
    pub fn support(&self) -> &[IndexSet] {
        &self.sets[0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio::frac;
    use proptest::prelude::*;

    fn sets(v: &[&[usize]]) -> Vec<IndexSet> {
        v.iter().map(|s| IndexSet::new(s.to_vec())).collect()
    }

    #[test]
    fn roots() {
        assert_eq!(ceil_root_power(16, 1, 2), 4);
        assert_eq!(ceil_root_power(17, 1, 2), 5);
        assert_eq!(ceil_root_power(64, 2, 3), 16);
        assert_eq!(ceil_root_power(65, 2, 3), 17);
        assert_eq!(ceil_root_power(10, 3, 3), 10);
        assert_eq!(ceil_root_power(1, 1, 4), 1);
        assert_eq!(ceil_root_power(0, 1, 2), 0);
    }

    #[test]
    fn disjoint_pairs() {
        let s: Vec<IndexSet> = (0..8).map(|j| IndexSet::new(vec![2 * j, 2 * j + 1])).collect();
        let scm = build_scm(&s, 16, 2, None).unwrap();
        assert_eq!(scm.thresholds, vec![4, 4, 16]);
        assert!(scm.cores.iter().all(|c| c.is_empty()));
        assert!(scm.matches[0].is_empty() && scm.matches[1].is_empty());
        assert_eq!(scm.matches[2], s);
        assert!(scm.violations().is_empty());
    }

    #[test]
    fn sunflower() {
        let s: Vec<IndexSet> = (1..=8).map(|j| IndexSet::new(vec![0, j])).collect();
        let scm = build_scm(&s, 16, 2, None).unwrap();
        assert_eq!(scm.cores[0].as_slice(), &[0]);
        assert!(scm.matches[0].is_empty());
        assert_eq!(scm.cores[1].as_slice(), &[0]);
        assert_eq!(scm.matches[1], s);
        assert!(scm.violations().is_empty());
    }

    #[test]
    fn empty_support() {
        let scm = build_scm(&[], 10, 3, None).unwrap();
        assert!(scm.cores.iter().all(|c| c.is_empty()));
        assert!(scm.matches.iter().all(|m| m.is_empty()));
        assert!(scm.violations().is_empty());
    }

    #[test]
    fn rejects_mixed_sizes() {
        assert!(build_scm(&sets(&[&[0, 1], &[2]]), 4, 2, None).is_err());
        assert!(build_scm(&sets(&[&[0, 9]]), 4, 2, None).is_err());
    }

    #[test]
    fn size_bound_is_tight_on_regular_cores() {
        // the ten edges of K5 on n = 16: each vertex lies in exactly
        // ⌈16^{1/2}⌉ = 4 sets, so |core_0| = 5 = ηq·n^{1/2} with η = 10/16
        let mut s = Vec::new();
        for a in 0..5 {
            for b in a + 1..5 {
                s.push(IndexSet::new(vec![a, b]));
            }
        }
        let scm = build_scm(&s, 16, 2, None).unwrap();
        assert_eq!(scm.cores[0].len(), 5);
        assert!(scm.violations().is_empty());
        let v = scm.size_bound_violations(&frac(10, 16));
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].level, 0);
        assert!(scm.size_bound_violations(&frac(11, 16)).is_empty());
    }

    proptest! {
        #[test]
        fn invariants_on_random_supports(n in 4usize..40, q in 1usize..4, raw in proptest::collection::vec(proptest::collection::vec(0usize..40, 4), 0..60)) {
            let mut seen = HashSet::new();
            let support: Vec<IndexSet> = raw.into_iter()
                .map(|v| {
                    let mut s: Vec<usize> = v.into_iter().map(|x| x % n).collect();
                    s.sort_unstable();
                    s.dedup();
                    let mut j = 0;
                    while s.len() < q { if !s.contains(&j) { s.push(j); } j += 1; }
                    IndexSet::new(s.into_iter().take(q).collect())
                })
                .filter(|s| s.len() == q && seen.insert(s.clone()))
                .collect();
            let scm = build_scm(&support, n, q, None).unwrap();
            prop_assert!(scm.violations().is_empty(), "{:?}", scm.violations());
        }
    }
}
