//! Probabilistic constraints and formulas: the representation of a
//! non-adaptive test as a distribution over `(Q, S)` pairs.

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::config::checked_count;
use crate::ratio::{self, Ratio};
use crate::word::{
    all_words, restricted_rank, Alphabet, IndexSet, PartialPropertyPair, Word, WordError,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FormulaError {
    #[error(transparent)]
    Word(#[from] WordError),
    #[error("constraint {index}: table has {got} entries, expected {expected}")]
    TableSize {
        index: usize,
        got: usize,
        expected: usize,
    },
    #[error("constraint {index}: satisfaction value {value} outside [0,1]")]
    ValueRange { index: usize, value: String },
    #[error("weight {index} is negative")]
    NegativeWeight { index: usize },
    #[error("weights sum to {0}, expected exactly 1")]
    WeightSum(String),
    #[error("{constraints} constraints but {weights} weights")]
    WeightCount { constraints: usize, weights: usize },
    #[error("query set {0:?} appears more than once")]
    DuplicateQuery(Vec<usize>),
    #[error("support has {size} constraints, declared bound is {bound}")]
    SupportBound { size: usize, bound: usize },
    #[error("no constraints given")]
    Empty,
    #[error("conditioning event has weight zero")]
    ZeroWeightEvent,
    #[error("constraint index {0} out of range")]
    ConstraintIndex(usize),
    #[error("invalid test declaration: {0}")]
    Declaration(String),
    #[error("table for query set {0:?} has {1} entries, too many to materialize")]
    TableTooLarge(Vec<usize>, usize),
    #[error("assignment `{0}` is missing or malformed")]
    Assignment(String),
    #[error("cannot parse rational: {0}")]
    Parse(String),
}

/// A probabilistic constraint `(Q, S)`; `S` is a table indexed by the
/// canonical rank of the assignment to `Q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub query: IndexSet,
    pub table: Vec<Ratio>,
}

impl Constraint {
    pub fn new(query: IndexSet, table: Vec<Ratio>) -> Self {
        Constraint { query, table }
    }

    /// Constraint whose table is `f(assignment)` over `Ξ^{|Q|}`.
    pub fn from_fn(
        query: IndexSet,
        alphabet_size: usize,
        f: impl Fn(&Word) -> Ratio,
    ) -> Result<Self, FormulaError> {
        let size = table_len(alphabet_size, query.len())?;
        let table = (0..size)
            .map(|r| f(&Word::unrank(r, query.len(), alphabet_size)))
            .collect();
        Ok(Constraint { query, table })
    }

    pub fn constant(query: IndexSet, alphabet_size: usize, value: Ratio) -> Result<Self, FormulaError> {
        Self::from_fn(query, alphabet_size, |_| value.clone())
    }

    /// `S(w_Q)`; the caller guarantees `Q ⊆ [|w|]`.
    pub fn value_on(&self, w: &Word, alphabet_size: usize) -> &Ratio {
        &self.table[restricted_rank(w, &self.query, alphabet_size)]
    }

    pub fn is_zero_one(&self) -> bool {
        self.table.iter().all(|v| v.is_zero() || v.is_one())
    }
}

fn table_len(alphabet_size: usize, q: usize) -> Result<usize, FormulaError> {
    checked_count(alphabet_size, q, 1 << 24)
        .map(|c| c as usize)
        .ok_or_else(|| FormulaError::TableTooLarge(Vec::new(), q))
}

/// A probabilistic formula `P = (F, μ)` with pairwise-distinct query sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbFormula {
    n: usize,
    alphabet: Alphabet,
    constraints: Vec<Constraint>,
    weights: Vec<Ratio>,
    support_bound: Option<usize>,
    one_sided: bool,
}

impl ProbFormula {
    pub fn new(
        n: usize,
        alphabet: Alphabet,
        constraints: Vec<Constraint>,
        weights: Vec<Ratio>,
    ) -> Result<Self, FormulaError> {
        let f = ProbFormula {
            n,
            alphabet,
            constraints,
            weights,
            support_bound: None,
            one_sided: false,
        };
        f.validate()?;
        Ok(f)
    }

    /// Uniform weights over the given constraints.
    pub fn uniform(n: usize, alphabet: Alphabet, constraints: Vec<Constraint>) -> Result<Self, FormulaError> {
        if constraints.is_empty() {
            return Err(FormulaError::Empty);
        }
        let w = ratio::frac(1, constraints.len() as i64);
        let weights = vec![w; constraints.len()];
        Self::new(n, alphabet, constraints, weights)
    }

    pub fn with_support_bound(mut self, k: usize) -> Result<Self, FormulaError> {
        self.support_bound = Some(k);
        self.validate()?;
        Ok(self)
    }

    pub fn with_one_sided(mut self, one_sided: bool) -> Self {
        self.one_sided = one_sided;
        self
    }

    pub fn validate(&self) -> Result<(), FormulaError> {
        if self.constraints.is_empty() {
            return Err(FormulaError::Empty);
        }
        if self.constraints.len() != self.weights.len() {
            return Err(FormulaError::WeightCount {
                constraints: self.constraints.len(),
                weights: self.weights.len(),
            });
        }
        let k = self.alphabet.size();
        let mut seen = HashMap::with_capacity(self.constraints.len());
        for (index, c) in self.constraints.iter().enumerate() {
            c.query.check_bound(self.n)?;
            let expected = table_len(k, c.query.len())?;
            if c.table.len() != expected {
                return Err(FormulaError::TableSize {
                    index,
                    got: c.table.len(),
                    expected,
                });
            }
            if let Some(v) = c.table.iter().find(|v| !ratio::in_unit_interval(v)) {
                return Err(FormulaError::ValueRange {
                    index,
                    value: ratio::format(v),
                });
            }
            if seen.insert(&c.query, index).is_some() {
                return Err(FormulaError::DuplicateQuery(c.query.as_slice().to_vec()));
            }
        }
        if let Some(index) = self.weights.iter().position(|w| w.is_negative()) {
            return Err(FormulaError::NegativeWeight { index });
        }
        let total: Ratio = self.weights.iter().sum();
        if !total.is_one() {
            return Err(FormulaError::WeightSum(ratio::format(&total)));
        }
        if let Some(bound) = self.support_bound {
            let size = self.support_size();
            if size > bound {
                return Err(FormulaError::SupportBound { size, bound });
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet.size()
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn weights(&self) -> &[Ratio] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    pub fn support_bound(&self) -> Option<usize> {
        self.support_bound
    }

    pub fn is_one_sided(&self) -> bool {
        self.one_sided
    }

    /// Indices of constraints with positive weight.
    pub fn support(&self) -> Vec<usize> {
        (0..self.weights.len())
            .filter(|&i| self.weights[i].is_positive())
            .collect()
    }

    pub fn support_size(&self) -> usize {
        self.weights.iter().filter(|w| w.is_positive()).count()
    }

    /// Query sets of the support, in constraint order.
    pub fn support_sets(&self) -> Vec<IndexSet> {
        self.support()
            .into_iter()
            .map(|i| self.constraints[i].query.clone())
            .collect()
    }

    pub fn find_query(&self, q: &IndexSet) -> Option<usize> {
        self.constraints.iter().position(|c| &c.query == q)
    }

    pub fn query_index(&self) -> HashMap<IndexSet, usize> {
        self.constraints
            .iter()
            .enumerate()
            .map(|(i, c)| (c.query.clone(), i))
            .collect()
    }

    /// `μ` of a set of constraint indices.
    pub fn weight_of(&self, indices: &[usize]) -> Ratio {
        indices.iter().map(|&i| &self.weights[i]).sum()
    }

    /// The common query size, if every constraint has the same one.
    pub fn uniform_query_size(&self) -> Option<usize> {
        let first = self.constraints.first()?.query.len();
        self.constraints
            .iter()
            .all(|c| c.query.len() == first)
            .then_some(first)
    }

    pub fn max_query_size(&self) -> usize {
        self.constraints.iter().map(|c| c.query.len()).max().unwrap_or(0)
    }

    pub fn is_zero_one(&self) -> bool {
        self.support()
            .into_iter()
            .all(|i| self.constraints[i].is_zero_one())
    }

    /// `max μ(C) / min μ(C)` over the support.
    pub fn equitability(&self) -> Option<Ratio> {
        let sup = self.support();
        let max = sup.iter().map(|&i| &self.weights[i]).max()?;
        let min = sup.iter().map(|&i| &self.weights[i]).min()?;
        Some(max / min)
    }

    /// 1-equitable: uniform over its support.
    pub fn is_uniform(&self) -> bool {
        self.equitability().is_some_and(|b| b.is_one())
    }

    pub fn is_combinatorial(&self) -> bool {
        self.is_zero_one() && self.is_uniform()
    }

    pub fn check_word(&self, w: &Word) -> Result<(), FormulaError> {
        if w.len() != self.n {
            return Err(WordError::LengthMismatch {
                left: w.len(),
                right: self.n,
            }
            .into());
        }
        w.check_alphabet(self.alphabet.size())?;
        Ok(())
    }

    /// Exact satisfaction `Σ μ(Q)·S(w_Q)`.
    pub fn satisfaction(&self, w: &Word) -> Result<Ratio, FormulaError> {
        self.check_word(w)?;
        Ok(self.satisfaction_unchecked(w))
    }

    pub(crate) fn satisfaction_unchecked(&self, w: &Word) -> Ratio {
        let k = self.alphabet.size();
        self.constraints
            .iter()
            .zip(&self.weights)
            .filter(|(_, mu)| !mu.is_zero())
            .map(|(c, mu)| mu * c.value_on(w, k))
            .sum()
    }

    /// Replaces the weights, keeping constraints; used by transforms.
    pub(crate) fn with_weights(&self, weights: Vec<Ratio>) -> Result<Self, FormulaError> {
        let mut f = self.clone();
        f.weights = weights;
        f.support_bound = None;
        f.validate()?;
        Ok(f)
    }

    pub(crate) fn with_constraints(&self, constraints: Vec<Constraint>) -> Result<Self, FormulaError> {
        let mut f = self.clone();
        f.constraints = constraints;
        f.validate()?;
        Ok(f)
    }

    pub fn fingerprint(&self) -> String {
        let json = serde_json::to_vec(&FormulaFile::from(self)).unwrap_or_default();
        crate::seed::fingerprint(&json)
    }
}

/// Combines constraints sharing a query set by weighted averaging of their
/// tables, summing their weights.
pub fn merge_duplicate_queries(
    n: usize,
    alphabet: Alphabet,
    raw: Vec<(Constraint, Ratio)>,
) -> Result<ProbFormula, FormulaError> {
    if raw.is_empty() {
        return Err(FormulaError::Empty);
    }
    let mut order: Vec<IndexSet> = Vec::new();
    let mut groups: HashMap<IndexSet, Vec<(Constraint, Ratio)>> = HashMap::new();
    for (c, w) in raw {
        if w.is_negative() {
            return Err(FormulaError::NegativeWeight { index: order.len() });
        }
        let entry = groups.entry(c.query.clone()).or_default();
        if entry.is_empty() {
            order.push(c.query.clone());
        }
        entry.push((c, w));
    }
    let mut constraints = Vec::with_capacity(order.len());
    let mut weights = Vec::with_capacity(order.len());
    for q in order {
        let mut group = groups.remove(&q).unwrap_or_default();
        if group.len() == 1 {
            let (c, w) = group.pop().unwrap();
            constraints.push(c);
            weights.push(w);
            continue;
        }
        let total: Ratio = group.iter().map(|(_, w)| w).sum();
        let len = group[0].0.table.len();
        if let Some((c, _)) = group.iter().find(|(c, _)| c.table.len() != len) {
            return Err(FormulaError::TableSize {
                index: 0,
                got: c.table.len(),
                expected: len,
            });
        }
        let table = if total.is_zero() {
            group[0].0.table.clone()
        } else {
            (0..len)
                .map(|r| {
                    let s: Ratio = group.iter().map(|(c, w)| w * &c.table[r]).sum();
                    s / &total
                })
                .collect()
        };
        constraints.push(Constraint::new(q, table));
        weights.push(total);
    }
    ProbFormula::new(n, alphabet, constraints, weights)
}

/// The formula conditioned on the constraints at `subset`.
pub fn condition(p: &ProbFormula, subset: &[usize]) -> Result<ProbFormula, FormulaError> {
    let mut idx: Vec<usize> = subset.to_vec();
    idx.sort_unstable();
    idx.dedup();
    if let Some(&bad) = idx.iter().find(|&&i| i >= p.len()) {
        return Err(FormulaError::ConstraintIndex(bad));
    }
    let eta = p.weight_of(&idx);
    if eta.is_zero() {
        return Err(FormulaError::ZeroWeightEvent);
    }
    let constraints = idx.iter().map(|&i| p.constraints[i].clone()).collect();
    let weights = idx.iter().map(|&i| &p.weights[i] / &eta).collect();
    Ok(ProbFormula::new(p.n, p.alphabet.clone(), constraints, weights)?.with_one_sided(p.one_sided))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sureness {
    SureHigh,
    SureLow,
    Unsure,
}

pub fn sureness_of(satisfaction: &Ratio, delta: &Ratio) -> Sureness {
    if *satisfaction >= Ratio::one() - delta {
        Sureness::SureHigh
    } else if satisfaction <= delta {
        Sureness::SureLow
    } else {
        Sureness::Unsure
    }
}

pub fn sureness(p: &ProbFormula, w: &Word, delta: &Ratio) -> Result<Sureness, FormulaError> {
    Ok(sureness_of(&p.satisfaction(w)?, delta))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sided {
    One,
    Two,
}

/// A claimed partial `(ε, δ, q)`-test for `(L′, L)`.
#[derive(Debug, Clone)]
pub struct TestDeclaration {
    pub pair: PartialPropertyPair,
    pub epsilon: Ratio,
    pub delta: Ratio,
    pub q: usize,
    pub sided: Sided,
}

impl TestDeclaration {
    pub fn new(
        pair: PartialPropertyPair,
        epsilon: Ratio,
        delta: Ratio,
        q: usize,
        sided: Sided,
    ) -> Result<Self, FormulaError> {
        if !epsilon.is_positive() || epsilon > Ratio::one() {
            return Err(FormulaError::Declaration(format!(
                "epsilon {} not in (0,1]",
                ratio::format(&epsilon)
            )));
        }
        if delta.is_negative() || delta >= ratio::half() {
            return Err(FormulaError::Declaration(format!(
                "delta {} not in [0,1/2)",
                ratio::format(&delta)
            )));
        }
        Ok(TestDeclaration {
            pair,
            epsilon,
            delta,
            q,
            sided,
        })
    }
}

/// An extreme satisfaction value together with the word attaining it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Extreme {
    pub value: Ratio,
    pub word: Word,
}

#[derive(Debug, Clone)]
pub struct ValidityReport {
    pub valid: bool,
    /// Minimum satisfaction over `L′`.
    pub min_inner: Option<Extreme>,
    /// Maximum satisfaction over words ε-far from `L`.
    pub max_far: Option<Extreme>,
    pub query_sizes_ok: bool,
}

/// Checks the formula against its declaration by enumerating `Ξ^n`.
pub fn is_valid_test(
    p: &ProbFormula,
    decl: &TestDeclaration,
    cap: u64,
) -> Result<ValidityReport, FormulaError> {
    let pair = &decl.pair;
    if pair.n() != p.n || pair.alphabet() != &p.alphabet {
        return Err(WordError::PairMismatch.into());
    }
    let mut min_inner: Option<Extreme> = None;
    for w in pair.inner.members() {
        let s = p.satisfaction_unchecked(w);
        if min_inner.as_ref().is_none_or(|e| s < e.value) {
            min_inner = Some(Extreme {
                value: s,
                word: w.clone(),
            });
        }
    }
    let mut max_far: Option<Extreme> = None;
    for w in all_words(p.n, p.alphabet.size(), cap)? {
        if !pair.outer.is_far(&w, &decl.epsilon)? {
            continue;
        }
        let s = p.satisfaction_unchecked(&w);
        if max_far.as_ref().is_none_or(|e| s > e.value) {
            max_far = Some(Extreme { value: s, word: w });
        }
    }
    let completeness_floor = match decl.sided {
        Sided::One => Ratio::one(),
        Sided::Two => Ratio::one() - &decl.delta,
    };
    let complete = min_inner.as_ref().is_none_or(|e| e.value >= completeness_floor);
    let sound = max_far.as_ref().is_none_or(|e| e.value <= decl.delta);
    let query_sizes_ok = p.max_query_size() <= decl.q;
    Ok(ValidityReport {
        valid: complete && sound && query_sizes_ok,
        min_inner,
        max_far,
        query_sizes_ok,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintFile {
    #[serde(rename = "Q")]
    pub query: Vec<usize>,
    #[serde(rename = "S")]
    pub table: BTreeMap<String, String>,
}

/// JSON layout of a formula; `Q` indices are 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormulaFile {
    pub n: usize,
    pub alphabet: Alphabet,
    pub constraints: Vec<ConstraintFile>,
    pub mu: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub one_sided: bool,
}

impl From<&ProbFormula> for FormulaFile {
    fn from(p: &ProbFormula) -> Self {
        let k = p.alphabet.size();
        let constraints = p
            .constraints
            .iter()
            .map(|c| ConstraintFile {
                query: c.query.as_slice().to_vec(),
                table: c
                    .table
                    .iter()
                    .enumerate()
                    .map(|(r, v)| {
                        let a = Word::unrank(r, c.query.len(), k);
                        (p.alphabet.render(&a), ratio::format(v))
                    })
                    .collect(),
            })
            .collect();
        FormulaFile {
            n: p.n,
            alphabet: p.alphabet.clone(),
            constraints,
            mu: p.weights.iter().map(ratio::format).collect(),
            k: p.support_bound,
            one_sided: p.one_sided,
        }
    }
}

impl FormulaFile {
    /// Parsed constraints paired with their weights, without the checks a
    /// [`ProbFormula`] imposes (duplicate query sets are kept).
    pub fn into_raw(self) -> Result<(usize, Alphabet, Vec<(Constraint, Ratio)>), FormulaError> {
        let k = self.alphabet.size();
        if self.constraints.len() != self.mu.len() {
            return Err(FormulaError::WeightCount {
                constraints: self.constraints.len(),
                weights: self.mu.len(),
            });
        }
        let mut raw = Vec::with_capacity(self.constraints.len());
        for (c, mu) in self.constraints.into_iter().zip(&self.mu) {
            let query = IndexSet::new(c.query.clone());
            if query.len() != c.query.len() {
                return Err(FormulaError::DuplicateQuery(c.query));
            }
            let len = table_len(k, query.len())?;
            let mut table = vec![None; len];
            for (assignment, value) in &c.table {
                let a = self
                    .alphabet
                    .parse_word(assignment)
                    .map_err(|_| FormulaError::Assignment(assignment.clone()))?;
                if a.len() != query.len() {
                    return Err(FormulaError::Assignment(assignment.clone()));
                }
                let v = ratio::parse(value).map_err(|e| FormulaError::Parse(e.0))?;
                table[a.rank(k)] = Some(v);
            }
            let table = table
                .into_iter()
                .enumerate()
                .map(|(r, v)| {
                    v.ok_or_else(|| FormulaError::Assignment(self.alphabet.render(&Word::unrank(r, query.len(), k))))
                })
                .collect::<Result<Vec<_>, _>>()?;
            let w = ratio::parse(mu).map_err(|e| FormulaError::Parse(e.0))?;
            raw.push((Constraint::new(query, table), w));
        }
        Ok((self.n, self.alphabet, raw))
    }
}

impl TryFrom<FormulaFile> for ProbFormula {
    type Error = FormulaError;

    fn try_from(f: FormulaFile) -> Result<Self, Self::Error> {
        let (bound, one_sided) = (f.k, f.one_sided);
        let (n, alphabet, raw) = f.into_raw()?;
        let (constraints, weights) = raw.into_iter().unzip();
        let mut p = ProbFormula::new(n, alphabet, constraints, weights)?.with_one_sided(one_sided);
        if let Some(bound) = bound {
            p = p.with_support_bound(bound)?;
        }
        Ok(p)
    }
}

impl Serialize for ProbFormula {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        FormulaFile::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for ProbFormula {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let f = FormulaFile::deserialize(d)?;
        ProbFormula::try_from(f).map_err(serde::de::Error::custom)
    }
}
