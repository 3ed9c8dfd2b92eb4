//! Words, alphabets, properties and index sets.
//!
//! Indices are 0-based everywhere. An [`IndexSet`] is always kept sorted and
//! deduplicated, so "the j'th smallest member" is simply position `j`.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::config::checked_count;
use crate::ratio::Ratio;

pub type Symbol = u8;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WordError {
    #[error("alphabet must contain at least one symbol")]
    EmptyAlphabet,
    #[error("alphabet symbol `{0}` appears twice")]
    DuplicateSymbol(char),
    #[error("alphabet has {0} symbols, at most 256 are supported")]
    AlphabetTooLarge(usize),
    #[error("symbol `{0}` is not in the alphabet")]
    UnknownSymbol(char),
    #[error("letter index {letter} is outside an alphabet of size {size}")]
    LetterOutOfRange { letter: Symbol, size: usize },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("index {index} out of range for length {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("property is empty, distance is infinite")]
    EmptyProperty,
    #[error("property member has length {got}, expected {expected}")]
    MemberLength { got: usize, expected: usize },
    #[error("enumerating {alphabet}^{n} words exceeds the cap of {cap}")]
    EnumerationCap { alphabet: usize, n: usize, cap: u64 },
    #[error("inner property is not contained in outer property")]
    NotNested,
    #[error("pair has mismatched dimensions")]
    PairMismatch,
}

/// Ordered finite list of distinct single-character symbols.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct Alphabet {
    symbols: Vec<char>,
}

impl Alphabet {
    pub fn new(symbols: Vec<char>) -> Result<Self, WordError> {
        if symbols.is_empty() {
            return Err(WordError::EmptyAlphabet);
        }
        if symbols.len() > 256 {
            return Err(WordError::AlphabetTooLarge(symbols.len()));
        }
        let mut seen = BTreeSet::new();
        for &c in &symbols {
            if !seen.insert(c) {
                return Err(WordError::DuplicateSymbol(c));
            }
        }
        Ok(Alphabet { symbols })
    }

    /// `{0, 1}`.
    pub fn binary() -> Self {
        Alphabet {
            symbols: vec!['0', '1'],
        }
    }

    pub fn from_str_symbols(s: &str) -> Result<Self, WordError> {
        Self::new(s.chars().collect())
    }

    pub fn size(&self) -> usize {
        self.symbols.len()
    }

    pub fn symbols(&self) -> &[char] {
        &self.symbols
    }

    pub fn symbol(&self, letter: Symbol) -> char {
        self.symbols[letter as usize]
    }

    pub fn index_of(&self, c: char) -> Option<Symbol> {
        self.symbols.iter().position(|&s| s == c).map(|i| i as Symbol)
    }

    pub fn parse_word(&self, s: &str) -> Result<Word, WordError> {
        s.chars()
            .map(|c| self.index_of(c).ok_or(WordError::UnknownSymbol(c)))
            .collect::<Result<Vec<_>, _>>()
            .map(Word::from_letters)
    }

    pub fn render(&self, w: &Word) -> String {
        w.letters().iter().map(|&l| self.symbol(l)).collect()
    }

    pub fn contains_word(&self, w: &Word) -> bool {
        w.letters().iter().all(|&l| (l as usize) < self.size())
    }
}

impl TryFrom<Vec<String>> for Alphabet {
    type Error = String;

    fn try_from(v: Vec<String>) -> Result<Self, Self::Error> {
        let mut symbols = Vec::with_capacity(v.len());
        for s in v {
            let mut it = s.chars();
            match (it.next(), it.next()) {
                (Some(c), None) => symbols.push(c),
                _ => return Err(format!("alphabet symbol `{s}` must be one character")),
            }
        }
        Alphabet::new(symbols).map_err(|e| e.to_string())
    }
}

impl From<Alphabet> for Vec<String> {
    fn from(a: Alphabet) -> Self {
        a.symbols.iter().map(|c| c.to_string()).collect()
    }
}

/// A word over an alphabet, stored as symbol indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(Vec<Symbol>);

impl Word {
    pub fn from_letters(letters: Vec<Symbol>) -> Self {
        Word(letters)
    }

    pub fn constant(n: usize, letter: Symbol) -> Self {
        Word(vec![letter; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[Symbol] {
        &self.0
    }

    pub fn get(&self, i: usize) -> Symbol {
        self.0[i]
    }

    pub fn check_alphabet(&self, alphabet_size: usize) -> Result<(), WordError> {
        match self.0.iter().find(|&&l| l as usize >= alphabet_size) {
            Some(&letter) => Err(WordError::LetterOutOfRange {
                letter,
                size: alphabet_size,
            }),
            None => Ok(()),
        }
    }

    /// Index of this word in the canonical enumeration of `Ξ^len`
    /// (first letter most significant).
    pub fn rank(&self, alphabet_size: usize) -> usize {
        self.0
            .iter()
            .fold(0usize, |acc, &l| acc * alphabet_size + l as usize)
    }

    /// Inverse of [`Word::rank`].
    pub fn unrank(mut rank: usize, len: usize, alphabet_size: usize) -> Word {
        let mut letters = vec![0; len];
        for slot in letters.iter_mut().rev() {
            *slot = (rank % alphabet_size) as Symbol;
            rank /= alphabet_size;
        }
        Word(letters)
    }

    pub fn hamming_count(&self, other: &Word) -> usize {
        self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count()
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.0 {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// Sorted, deduplicated set of 0-based positions.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(from = "Vec<usize>", into = "Vec<usize>")]
pub struct IndexSet(Vec<usize>);

impl IndexSet {
    pub fn new(mut v: Vec<usize>) -> Self {
        v.sort_unstable();
        v.dedup();
        IndexSet(v)
    }

    pub fn empty() -> Self {
        IndexSet(Vec::new())
    }

    pub fn full(n: usize) -> Self {
        IndexSet((0..n).collect())
    }

    pub fn from_mask(mask: u64, n: usize) -> Self {
        IndexSet((0..n).filter(|i| mask >> i & 1 == 1).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    pub fn max(&self) -> Option<usize> {
        self.0.last().copied()
    }

    pub fn check_bound(&self, n: usize) -> Result<(), WordError> {
        match self.max() {
            Some(index) if index >= n => Err(WordError::IndexOutOfRange { index, n }),
            _ => Ok(()),
        }
    }

    pub fn union(&self, other: &IndexSet) -> IndexSet {
        let mut v = Vec::with_capacity(self.len() + other.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].cmp(&other.0[j]) {
                std::cmp::Ordering::Less => {
                    v.push(self.0[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    v.push(other.0[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    v.push(self.0[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        v.extend_from_slice(&self.0[i..]);
        v.extend_from_slice(&other.0[j..]);
        IndexSet(v)
    }

    pub fn intersection_len(&self, other: &IndexSet) -> usize {
        let (mut i, mut j, mut c) = (0, 0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].cmp(&other.0[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    c += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        c
    }

    pub fn difference(&self, other: &IndexSet) -> IndexSet {
        IndexSet(self.iter().filter(|&i| !other.contains(i)).collect())
    }

    pub fn is_subset(&self, other: &IndexSet) -> bool {
        self.iter().all(|i| other.contains(i))
    }

    pub fn is_disjoint(&self, other: &IndexSet) -> bool {
        self.intersection_len(other) == 0
    }

    /// Position of `i` within the set, if present.
    pub fn position(&self, i: usize) -> Option<usize> {
        self.0.binary_search(&i).ok()
    }
}

impl From<Vec<usize>> for IndexSet {
    fn from(v: Vec<usize>) -> Self {
        IndexSet::new(v)
    }
}

impl From<IndexSet> for Vec<usize> {
    fn from(s: IndexSet) -> Self {
        s.0
    }
}

impl FromIterator<usize> for IndexSet {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        IndexSet::new(iter.into_iter().collect())
    }
}

/// Normalized Hamming distance as an exact rational.
pub fn hamming_distance(w: &Word, v: &Word) -> Result<Ratio, WordError> {
    if w.len() != v.len() {
        return Err(WordError::LengthMismatch {
            left: w.len(),
            right: v.len(),
        });
    }
    if w.is_empty() {
        return Ok(Ratio::from_integer(BigInt::from(0)));
    }
    Ok(Ratio::new(
        BigInt::from(w.hamming_count(v)),
        BigInt::from(w.len()),
    ))
}

/// The sub-word of `w` at the sorted positions of `q`.
pub fn restrict(w: &Word, q: &IndexSet) -> Result<Word, WordError> {
    q.check_bound(w.len())?;
    Ok(Word(q.iter().map(|i| w.0[i]).collect()))
}

/// `w` with its sub-word on `c` replaced by `sigma`.
pub fn substitute(w: &Word, sigma: &Word, c: &IndexSet) -> Result<Word, WordError> {
    if sigma.len() != c.len() {
        return Err(WordError::LengthMismatch {
            left: sigma.len(),
            right: c.len(),
        });
    }
    c.check_bound(w.len())?;
    let mut out = w.0.clone();
    for (pos, i) in c.iter().enumerate() {
        out[i] = sigma.0[pos];
    }
    Ok(Word(out))
}

/// Rank of `w_Q` in the canonical enumeration of `Ξ^{|Q|}`, without
/// materializing the sub-word. Positions of `q` must be in range.
pub fn restricted_rank(w: &Word, q: &IndexSet, alphabet_size: usize) -> usize {
    q.iter()
        .fold(0usize, |acc, i| acc * alphabet_size + w.0[i] as usize)
}

/// Iterator over `Ξ^n` in canonical order.
pub struct WordIter {
    next: usize,
    total: usize,
    n: usize,
    k: usize,
}

impl Iterator for WordIter {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        if self.next >= self.total {
            return None;
        }
        let w = Word::unrank(self.next, self.n, self.k);
        self.next += 1;
        Some(w)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let r = self.total - self.next;
        (r, Some(r))
    }
}

/// All words of length `n` over an alphabet of `k` symbols, refused when
/// `k^n` exceeds `cap`.
pub fn all_words(n: usize, k: usize, cap: u64) -> Result<WordIter, WordError> {
    let total = checked_count(k, n, cap).ok_or(WordError::EnumerationCap {
        alphabet: k,
        n,
        cap,
    })?;
    Ok(WordIter {
        next: 0,
        total: total as usize,
        n,
        k,
    })
}

/// An explicit finite property `L ⊆ Ξ^n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Property {
    n: usize,
    alphabet: Alphabet,
    members: BTreeSet<Word>,
}

impl Property {
    pub fn new(
        n: usize,
        alphabet: Alphabet,
        members: impl IntoIterator<Item = Word>,
    ) -> Result<Self, WordError> {
        let mut set = BTreeSet::new();
        for m in members {
            if m.len() != n {
                return Err(WordError::MemberLength {
                    got: m.len(),
                    expected: n,
                });
            }
            m.check_alphabet(alphabet.size())?;
            set.insert(m);
        }
        Ok(Property {
            n,
            alphabet,
            members: set,
        })
    }

    /// Builds the member set by enumerating `Ξ^n` through a predicate.
    pub fn from_predicate(
        n: usize,
        alphabet: Alphabet,
        cap: u64,
        pred: impl Fn(&Word) -> bool,
    ) -> Result<Self, WordError> {
        let members: Vec<Word> = all_words(n, alphabet.size(), cap)?
            .filter(|w| pred(w))
            .collect();
        Property::new(n, alphabet, members)
    }

    /// Every word of `Ξ^n`.
    pub fn everything(n: usize, alphabet: Alphabet, cap: u64) -> Result<Self, WordError> {
        Self::from_predicate(n, alphabet, cap, |_| true)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn members(&self) -> &BTreeSet<Word> {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, w: &Word) -> bool {
        self.members.contains(w)
    }

    /// Checks `pred(w) ⇔ w ∈ members` over all of `Ξ^n`; returns the first
    /// disagreeing word.
    pub fn check_predicate(
        &self,
        cap: u64,
        pred: impl Fn(&Word) -> bool,
    ) -> Result<Option<Word>, WordError> {
        Ok(all_words(self.n, self.alphabet.size(), cap)?.find(|w| pred(w) != self.contains(w)))
    }

    pub fn check_word(&self, w: &Word) -> Result<(), WordError> {
        if w.len() != self.n {
            return Err(WordError::LengthMismatch {
                left: w.len(),
                right: self.n,
            });
        }
        w.check_alphabet(self.alphabet.size())
    }

    /// Smallest number of differing positions to any member.
    pub fn min_mismatches(&self, w: &Word) -> Result<usize, WordError> {
        self.check_word(w)?;
        self.members
            .iter()
            .map(|m| m.hamming_count(w))
            .min()
            .ok_or(WordError::EmptyProperty)
    }

    /// `w` is ε-far iff no member is within normalized distance ε, i.e.
    /// more than `εn` positions differ from every member.
    pub fn is_far(&self, w: &Word, epsilon: &Ratio) -> Result<bool, WordError> {
        if self.is_empty() {
            return Ok(true);
        }
        let d = distance_to_property(w, self)?;
        Ok(d > *epsilon)
    }
}

/// `min_{v ∈ L} hamming_distance(w, v)`.
pub fn distance_to_property(w: &Word, l: &Property) -> Result<Ratio, WordError> {
    let m = l.min_mismatches(w)?;
    if l.n == 0 {
        return Ok(Ratio::from_integer(BigInt::from(0)));
    }
    Ok(Ratio::new(BigInt::from(m), BigInt::from(l.n)))
}

/// A partial-test pair `(L′, L)` with `L′ ⊆ L`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialPropertyPair {
    pub inner: Property,
    pub outer: Property,
}

impl PartialPropertyPair {
    pub fn new(inner: Property, outer: Property) -> Result<Self, WordError> {
        if inner.n != outer.n || inner.alphabet != outer.alphabet {
            return Err(WordError::PairMismatch);
        }
        if !inner.members.is_subset(&outer.members) {
            return Err(WordError::NotNested);
        }
        Ok(PartialPropertyPair { inner, outer })
    }

    /// The non-partial pair `(L, L)`.
    pub fn full(l: Property) -> Self {
        PartialPropertyPair {
            inner: l.clone(),
            outer: l,
        }
    }

    pub fn n(&self) -> usize {
        self.outer.n
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.outer.alphabet
    }

    /// Some word of `L′` exists and some word of `Ξ^n` is ε-far from `L`.
    pub fn is_nontrivial(&self, epsilon: &Ratio, cap: u64) -> Result<bool, WordError> {
        if self.inner.is_empty() {
            return Ok(false);
        }
        for w in all_words(self.n(), self.alphabet().size(), cap)? {
            if self.outer.is_far(&w, epsilon)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Words of `Ξ^n` that are ε-far from the outer property.
    pub fn far_words(&self, epsilon: &Ratio, cap: u64) -> Result<Vec<Word>, WordError> {
        let mut out = Vec::new();
        for w in all_words(self.n(), self.alphabet().size(), cap)? {
            if self.outer.is_far(&w, epsilon)? {
                out.push(w);
            }
        }
        Ok(out)
    }
}

/// JSON layout of a property: members are rendered over the alphabet.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertyFile {
    pub n: usize,
    pub alphabet: Alphabet,
    pub members: Vec<String>,
}

impl From<&Property> for PropertyFile {
    fn from(l: &Property) -> Self {
        PropertyFile {
            n: l.n,
            alphabet: l.alphabet.clone(),
            members: l.members.iter().map(|w| l.alphabet.render(w)).collect(),
        }
    }
}

impl TryFrom<PropertyFile> for Property {
    type Error = WordError;

    fn try_from(f: PropertyFile) -> Result<Self, WordError> {
        let members = f
            .members
            .iter()
            .map(|s| f.alphabet.parse_word(s))
            .collect::<Result<Vec<_>, _>>()?;
        Property::new(f.n, f.alphabet, members)
    }
}

impl Serialize for Property {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        PropertyFile::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Property {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Property::try_from(PropertyFile::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio::frac;
    use proptest::prelude::*;

    fn bin(s: &str) -> Word {
        Alphabet::binary().parse_word(s).unwrap()
    }

    #[test]
    fn hamming_examples() {
        assert_eq!(hamming_distance(&bin("000"), &bin("000")).unwrap(), frac(0, 1));
        assert_eq!(hamming_distance(&bin("000"), &bin("011")).unwrap(), frac(2, 3));
        assert!(hamming_distance(&bin("00"), &bin("000")).is_err());
    }

    #[test]
    fn distance_to_property_examples() {
        let l = Property::new(3, Alphabet::binary(), [bin("000")]).unwrap();
        assert_eq!(distance_to_property(&bin("110"), &l).unwrap(), frac(2, 3));
        assert_eq!(distance_to_property(&bin("000"), &l).unwrap(), frac(0, 1));
        let empty = Property::new(3, Alphabet::binary(), []).unwrap();
        assert_eq!(
            distance_to_property(&bin("000"), &empty),
            Err(WordError::EmptyProperty)
        );
    }

    #[test]
    fn restrict_and_substitute_examples() {
        let a = Alphabet::from_str_symbols("abcd").unwrap();
        let w = a.parse_word("abcd").unwrap();
        assert_eq!(a.render(&restrict(&w, &IndexSet::new(vec![1, 3])).unwrap()), "bd");
        assert_eq!(restrict(&w, &IndexSet::full(4)).unwrap(), w);
        assert!(restrict(&w, &IndexSet::empty()).unwrap().is_empty());
        assert!(restrict(&w, &IndexSet::new(vec![4])).is_err());

        let z = bin("0000");
        let r = substitute(&z, &bin("11"), &IndexSet::new(vec![1, 3])).unwrap();
        assert_eq!(r, bin("0101"));
        assert_eq!(substitute(&z, &bin(""), &IndexSet::empty()).unwrap(), z);
        assert!(substitute(&z, &bin("1"), &IndexSet::new(vec![1, 3])).is_err());
    }

    #[test]
    fn rank_round_trip_and_order() {
        let words: Vec<Word> = all_words(3, 3, 100).unwrap().collect();
        assert_eq!(words.len(), 27);
        for (i, w) in words.iter().enumerate() {
            assert_eq!(w.rank(3), i);
        }
        assert!(words.windows(2).all(|p| p[0] < p[1]));
        assert!(all_words(21, 2, 1 << 20).is_err());
    }

    #[test]
    fn alphabet_validation() {
        assert_eq!(Alphabet::new(vec![]), Err(WordError::EmptyAlphabet));
        assert_eq!(
            Alphabet::new(vec!['a', 'a']),
            Err(WordError::DuplicateSymbol('a'))
        );
        let json = serde_json::to_string(&Alphabet::binary()).unwrap();
        assert_eq!(json, r#"["0","1"]"#);
    }

    #[test]
    fn nontriviality() {
        let l = Property::new(4, Alphabet::binary(), [bin("0000")]).unwrap();
        let pair = PartialPropertyPair::full(l);
        assert!(pair.is_nontrivial(&frac(3, 4), 1 << 10).unwrap());
        assert!(!pair.is_nontrivial(&frac(1, 1), 1 << 10).unwrap());
    }

    #[test]
    fn predicate_consistency() {
        let l = Property::from_predicate(4, Alphabet::binary(), 1 << 10, |w| {
            w.letters().iter().all(|&x| x == 0)
        })
        .unwrap();
        assert_eq!(l.len(), 1);
        assert_eq!(
            l.check_predicate(1 << 10, |w| w.letters().iter().all(|&x| x == 0))
                .unwrap(),
            None
        );
        assert!(l.check_predicate(1 << 10, |_| true).unwrap().is_some());
    }

    fn word_strategy(n: usize, k: u8) -> impl Strategy<Value = Word> {
        proptest::collection::vec(0..k, n).prop_map(Word::from_letters)
    }

    proptest! {
        #[test]
        fn hamming_is_a_metric(a in word_strategy(8, 3), b in word_strategy(8, 3), c in word_strategy(8, 3)) {
            let ab = hamming_distance(&a, &b).unwrap();
            let ba = hamming_distance(&b, &a).unwrap();
            prop_assert_eq!(&ab, &ba);
            prop_assert_eq!(ab == frac(0, 1), a == b);
            let bc = hamming_distance(&b, &c).unwrap();
            let ac = hamming_distance(&a, &c).unwrap();
            prop_assert!(ac <= ab.clone() + bc);
            let manual = (0..8).filter(|&i| a.get(i) != b.get(i)).count();
            prop_assert_eq!(ab, frac(manual as i64, 8));
        }

        #[test]
        fn substitute_restrict_round_trip(
            w in word_strategy(10, 3),
            mask in 0u64..1024,
            seed in proptest::collection::vec(0u8..3, 10),
        ) {
            let c = IndexSet::from_mask(mask, 10);
            let sigma = Word::from_letters(seed[..c.len()].to_vec());
            let r = substitute(&w, &sigma, &c).unwrap();
            prop_assert_eq!(restrict(&r, &c).unwrap(), sigma);
            for i in 0..10 {
                if !c.contains(i) {
                    prop_assert_eq!(r.get(i), w.get(i));
                }
            }
            prop_assert_eq!(substitute(&w, &restrict(&w, &c).unwrap(), &c).unwrap(), w);
        }

        #[test]
        fn distance_is_brute_force_min(
            members in proptest::collection::vec(word_strategy(6, 2), 1..16),
            w in word_strategy(6, 2),
        ) {
            let l = Property::new(6, Alphabet::binary(), members.clone()).unwrap();
            let d = distance_to_property(&w, &l).unwrap();
            let brute = members.iter().map(|m| hamming_distance(&w, m).unwrap()).min().unwrap();
            prop_assert_eq!(&d, &brute);
            prop_assert_eq!(d == frac(0, 1), l.contains(&w));
        }
    }
}
