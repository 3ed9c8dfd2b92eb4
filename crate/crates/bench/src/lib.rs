//! Fixtures shared by the benchmarks.

use pompom_core::ratio::int;
use pompom_core::{Alphabet, Constraint, IndexSet, ProbFormula, Property, Word};

fn equality(query: Vec<usize>) -> Constraint {
    Constraint::from_fn(IndexSet::new(query), 2, |v| if v.get(0) == v.get(1) { int(1) } else { int(0) })
        .expect("binary table")
}

/// Sets `{0, j}` for every `j ≥ 1`, each checking that its two letters agree.
pub fn sunflower(n: usize) -> ProbFormula {
    let cs = (1..n).map(|j| equality(vec![0, j])).collect();
    ProbFormula::uniform(n, Alphabet::binary(), cs).expect("valid formula")
}

/// Disjoint pairs `{2j, 2j+1}`, each checking that its two letters agree.
pub fn matching(n: usize) -> ProbFormula {
    let cs = (0..n / 2).map(|j| equality(vec![2 * j, 2 * j + 1])).collect();
    ProbFormula::uniform(n, Alphabet::binary(), cs).expect("valid formula")
}

/// Uniform formula with constant tables over the given sets.
pub fn constant_formula(n: usize, sets: Vec<Vec<usize>>) -> ProbFormula {
    let cs = sets
        .into_iter()
        .map(|s| Constraint::from_fn(IndexSet::new(s), 2, |_| int(1)).expect("binary table"))
        .collect();
    ProbFormula::uniform(n, Alphabet::binary(), cs).expect("valid formula")
}

pub fn zeros(n: usize) -> Property {
    Property::new(n, Alphabet::binary(), vec![Word::constant(n, 0)]).expect("valid property")
}

/// Alternating word `0101…`.
pub fn alternating(n: usize) -> Word {
    Word::from_letters((0..n).map(|i| (i % 2) as u8).collect())
}
