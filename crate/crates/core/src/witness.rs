//! Witnesses and super-witnesses against a word.

use std::collections::HashSet;

use crate::config::checked_count;
use crate::formula::{Constraint, FormulaError, ProbFormula};
use crate::ratio::{self, Ratio};
use crate::word::{all_words, restrict, substitute, IndexSet, Property, Word, WordError};

/// No member of `L` agrees with `w` on `q`.
pub fn is_witness(q: &IndexSet, w: &Word, l: &Property) -> bool {
    !l.members()
        .iter()
        .any(|u| q.iter().all(|i| u.get(i) == w.get(i)))
}

/// Reference implementation: every extension `u` of `w_Q` lies outside `L`.
/// Costs `|Ξ|^{n−|Q|}`.
pub fn is_witness_by_extension(q: &IndexSet, w: &Word, l: &Property, cap: u64) -> Result<bool, WordError> {
    let free: IndexSet = (0..w.len()).filter(|&i| !q.contains(i)).collect();
    let k = l.alphabet().size();
    for tail in all_words(free.len(), k, cap)? {
        let u = substitute(w, &tail, &free)?;
        if l.contains(&u) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// How the helper set `Y` of a super-witness is chosen.
#[derive(Debug, Clone)]
pub enum SuperWitnessSearch {
    /// A given `Y`; witnesses are looked up among `candidates` when present,
    /// otherwise `X ∪ Y` itself is tested.
    Explicit {
        y: IndexSet,
        candidates: Option<Vec<IndexSet>>,
    },
    /// `Y = ∅` first, then each caller-supplied core (minus `X`).
    Bounded { cores: Vec<IndexSet> },
    /// Every `Y ⊆ [n] \ X` up to the given size.
    Exhaustive { max_y: usize },
}

fn super_witness_with(
    x: &IndexSet,
    y: &IndexSet,
    w: &Word,
    l: &Property,
    candidates: Option<&[IndexSet]>,
    cap: u64,
) -> Result<bool, WordError> {
    let xy = x.union(y);
    let k = l.alphabet().size();
    for sigma in all_words(y.len(), k, cap)? {
        let ws = substitute(w, &sigma, y)?;
        let found = match candidates {
            Some(cs) => cs
                .iter()
                .any(|q| q.is_subset(&xy) && is_witness(q, &ws, l)),
            None => is_witness(&xy, &ws, l),
        };
        if !found {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Whether some `Y` disjoint from `x` makes `x` a super-witness against `w`.
pub fn is_super_witness(
    x: &IndexSet,
    w: &Word,
    l: &Property,
    search: &SuperWitnessSearch,
    cap: u64,
) -> Result<bool, WordError> {
    x.check_bound(w.len())?;
    match search {
        SuperWitnessSearch::Explicit { y, candidates } => {
            y.check_bound(w.len())?;
            if !x.is_disjoint(y) {
                return Err(WordError::NotNested);
            }
            super_witness_with(x, y, w, l, candidates.as_deref(), cap)
        }
        SuperWitnessSearch::Bounded { cores } => {
            if super_witness_with(x, &IndexSet::empty(), w, l, None, cap)? {
                return Ok(true);
            }
            for c in cores {
                c.check_bound(w.len())?;
                let y = c.difference(x);
                if super_witness_with(x, &y, w, l, None, cap)? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        SuperWitnessSearch::Exhaustive { max_y } => {
            let rest: Vec<usize> = (0..w.len()).filter(|&i| !x.contains(i)).collect();
            if rest.len() >= 64 {
                return Err(WordError::EnumerationCap {
                    alphabet: 2,
                    n: rest.len(),
                    cap,
                });
            }
            for mask in 0u64..(1u64 << rest.len()) {
                if mask.count_ones() as usize > *max_y {
                    continue;
                }
                let y: IndexSet = rest
                    .iter()
                    .enumerate()
                    .filter(|(b, _)| mask >> b & 1 == 1)
                    .map(|(_, &i)| i)
                    .collect();
                if super_witness_with(x, &y, w, l, None, cap)? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
    }
}

/// Support members of `p` whose query sets witness against `w`, with their
/// total weight.
pub fn witnesses_in_support(
    p: &ProbFormula,
    w: &Word,
    l: &Property,
) -> Result<(Vec<IndexSet>, Ratio), FormulaError> {
    p.check_word(w)?;
    let mut sets = Vec::new();
    let mut weight = ratio::zero();
    for i in p.support() {
        let q = &p.constraints()[i].query;
        if is_witness(q, w, l) {
            sets.push(q.clone());
            weight += &p.weights()[i];
        }
    }
    Ok((sets, weight))
}

/// The canonical 1-sided constraint on `q`: `S(v) = 0` exactly when `q` is a
/// witness under `v`.
pub fn one_sided_constraint(q: IndexSet, l: &Property) -> Result<Constraint, FormulaError> {
    let seen: HashSet<Word> = l
        .members()
        .iter()
        .map(|u| restrict(u, &q))
        .collect::<Result<_, _>>()?;
    Constraint::from_fn(q, l.alphabet().size(), |v| {
        if seen.contains(v) {
            ratio::one()
        } else {
            ratio::zero()
        }
    })
}

/// The 1-sided formula querying `sets` with `weights`.
pub fn one_sided_formula(
    l: &Property,
    sets: Vec<IndexSet>,
    weights: Vec<Ratio>,
) -> Result<ProbFormula, FormulaError> {
    let constraints = sets
        .into_iter()
        .map(|q| one_sided_constraint(q, l))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ProbFormula::new(l.n(), l.alphabet().clone(), constraints, weights)?.with_one_sided(true))
}

/// Uniform 1-sided formula over all `q`-subsets of `[n]`, refused above `cap`.
pub fn one_sided_all_subsets(l: &Property, q: usize, cap: u64) -> Result<ProbFormula, FormulaError> {
    let sets = k_subsets(l.n(), q, cap).ok_or(FormulaError::TableTooLarge(Vec::new(), q))?;
    let w = ratio::frac(1, sets.len() as i64);
    let weights = vec![w; sets.len()];
    one_sided_formula(l, sets, weights)
}

/// All `k`-subsets of `[n]` in lexicographic order.
pub fn k_subsets(n: usize, k: usize, cap: u64) -> Option<Vec<IndexSet>> {
    if k > n {
        return Some(Vec::new());
    }
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(IndexSet::new(idx.clone()));
        if out.len() as u64 > cap {
            return None;
        }
        let mut pos = k;
        loop {
            if pos == 0 {
                return Some(out);
            }
            pos -= 1;
            if idx[pos] < n - k + pos {
                break;
            }
            if pos == 0 {
                return Some(out);
            }
        }
        idx[pos] += 1;
        for j in pos + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// `|Ξ|^{|c|}` when within `cap`.
pub fn sigma_count(alphabet_size: usize, c: &IndexSet, cap: u64) -> Option<u64> {
    checked_count(alphabet_size, c.len(), cap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::word::Alphabet;
    use proptest::prelude::*;

    fn bin(s: &str) -> Word {
        Alphabet::binary().parse_word(s).unwrap()
    }

    fn zeros(n: usize) -> Property {
        Property::new(n, Alphabet::binary(), [Word::constant(n, 0)]).unwrap()
    }

    #[test]
    fn witness_examples() {
        let l = zeros(3);
        let q = IndexSet::new(vec![0]);
        assert!(is_witness(&q, &bin("100"), &l));
        assert!(!is_witness(&q, &bin("000"), &l));
        assert!(!is_witness(&IndexSet::empty(), &bin("111"), &l));
        let empty = Property::new(3, Alphabet::binary(), []).unwrap();
        assert!(is_witness(&IndexSet::empty(), &bin("111"), &empty));
    }

    #[test]
    fn super_witness_examples() {
        let l = zeros(3);
        let w = bin("100");
        let x = IndexSet::new(vec![0]);
        let s = SuperWitnessSearch::Bounded { cores: vec![] };
        assert!(is_super_witness(&x, &w, &l, &s, 1 << 10).unwrap());
        let all = Property::everything(3, Alphabet::binary(), 64).unwrap();
        let ex = SuperWitnessSearch::Exhaustive { max_y: 3 };
        assert!(!is_super_witness(&IndexSet::empty(), &w, &all, &ex, 1 << 10).unwrap());
        let bad = SuperWitnessSearch::Explicit {
            y: IndexSet::new(vec![0, 1]),
            candidates: None,
        };
        assert!(is_super_witness(&x, &w, &l, &bad, 64).is_err());
    }

    #[test]
    fn explicit_y_with_candidates() {
        // σ = 0 on Y turns 01 into 00 ∈ L, so no witness exists inside X ∪ Y.
        let l = Property::new(2, Alphabet::binary(), [bin("00"), bin("11")]).unwrap();
        let s = SuperWitnessSearch::Explicit {
            y: IndexSet::new(vec![1]),
            candidates: Some(vec![IndexSet::new(vec![0, 1])]),
        };
        assert!(!is_super_witness(&IndexSet::new(vec![0]), &bin("01"), &l, &s, 64).unwrap());
    }

    #[test]
    fn support_witnesses() {
        let l = zeros(3);
        let p = one_sided_all_subsets(&l, 1, 100).unwrap();
        let (sets, wt) = witnesses_in_support(&p, &bin("000"), &l).unwrap();
        assert!(sets.is_empty());
        assert_eq!(wt, ratio::zero());
        let (sets, wt) = witnesses_in_support(&p, &bin("111"), &l).unwrap();
        assert_eq!(sets.len(), 3);
        assert_eq!(wt, ratio::one());
    }

    #[test]
    fn canonical_one_sided_table() {
        let l = zeros(3);
        let p = one_sided_all_subsets(&l, 2, 100).unwrap();
        assert!(p.is_one_sided());
        assert!(p.is_combinatorial());
        assert_eq!(p.satisfaction(&bin("000")).unwrap(), ratio::one());
        assert_eq!(p.satisfaction(&bin("100")).unwrap(), ratio::frac(1, 3));
    }

    #[test]
    fn subsets_enumeration() {
        let s = k_subsets(5, 2, 100).unwrap();
        assert_eq!(s.len(), 10);
        assert_eq!(s[0].as_slice(), &[0, 1]);
        assert_eq!(s[9].as_slice(), &[3, 4]);
        assert_eq!(k_subsets(3, 0, 10).unwrap(), vec![IndexSet::empty()]);
        assert_eq!(k_subsets(3, 3, 10).unwrap().len(), 1);
        assert!(k_subsets(20, 10, 100).is_none());
    }

    fn small_instance() -> impl Strategy<Value = (Vec<u8>, u8, u8)> {
        (proptest::collection::vec(0u8..32, 0..8), 0u8..32, 0u8..32)
    }

    proptest! {
        #[test]
        fn member_scan_matches_extension_oracle((members, w, qmask) in small_instance()) {
            let n = 5;
            let l = Property::new(n, Alphabet::binary(), members.iter().map(|&m| Word::unrank(m as usize, n, 2))).unwrap();
            let w = Word::unrank(w as usize, n, 2);
            let q = IndexSet::from_mask(qmask as u64, n);
            prop_assert_eq!(is_witness(&q, &w, &l), is_witness_by_extension(&q, &w, &l, 1 << 10).unwrap());
        }

        #[test]
        fn supersets_of_witnesses_are_witnesses((members, w, qmask) in small_instance(), extra in 0u8..32) {
            let n = 5;
            let l = Property::new(n, Alphabet::binary(), members.iter().map(|&m| Word::unrank(m as usize, n, 2))).unwrap();
            let w = Word::unrank(w as usize, n, 2);
            let q = IndexSet::from_mask(qmask as u64, n);
            let bigger = IndexSet::from_mask((qmask | extra) as u64, n);
            if is_witness(&q, &w, &l) {
                prop_assert!(is_witness(&bigger, &w, &l));
            }
        }
    }
}
