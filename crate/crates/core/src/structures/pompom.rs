use std::collections::{BTreeMap, HashSet};

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::constellation::{core_within_bound, family_weight};
use super::{Constellation, StructureError};
use crate::formula::ProbFormula;
use crate::ratio::{self, Ratio};
use crate::witness::{is_witness, sigma_count};
use crate::word::{substitute, IndexSet, Property, Word};

/// Query sets pairwise disjoint outside a shared core, each with exactly
/// `level` indices outside it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pompom {
    pub core: IndexSet,
    pub members: Vec<IndexSet>,
    pub level: usize,
}

impl Pompom {
    /// Members breaking the defining conditions, with the reason.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut used: HashSet<usize> = HashSet::new();
        for m in &self.members {
            let outside = m.difference(&self.core);
            if outside.len() != self.level {
                out.push(format!("{:?} has {} indices outside the core", m.as_slice(), outside.len()));
            }
            for j in outside.iter() {
                if !used.insert(j) {
                    out.push(format!("{:?} reuses outside index {j}", m.as_slice()));
                }
            }
        }
        out
    }

    pub fn check(&self) -> bool {
        self.violations().is_empty()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// `⌈ε·n^{1−(i−1)/q}/(3i)⌉`, computed exactly.
pub fn default_size_target(n: usize, q: usize, level: usize, epsilon: &Ratio) -> usize {
    if q == 0 || level == 0 || *epsilon <= ratio::zero() {
        return 1;
    }
    // smallest t with (3i·t·b)^q ≥ a^q·n^{q−i+1}, where ε = a/b
    let a = epsilon.numer().to_biguint().unwrap_or_default();
    let b = epsilon.denom().to_biguint().unwrap_or_default();
    let q32 = q as u32;
    let rhs = a.pow(q32) * BigUint::from(n).pow((q + 1).saturating_sub(level) as u32);
    let ok = |t: u64| (BigUint::from(3 * level as u64 * t) * &b).pow(q32) >= rhs;
    let guess = ratio::to_f64(epsilon) * (n as f64).powf(1.0 - (level as f64 - 1.0) / q as f64)
        / (3.0 * level as f64);
    let mut t = (guess.ceil() as u64).saturating_sub(2);
    while !ok(t) {
        t += 1;
    }
    while t > 0 && ok(t - 1) {
        t -= 1;
    }
    (t as usize).max(1)
}

/// Greedy pompom: scans `candidates` in lexicographic order, keeping each set
/// with `level` outside indices that avoids the outside indices kept so far.
pub fn greedy_pompom(core: &IndexSet, level: usize, candidates: &[IndexSet], target: Option<usize>) -> Pompom {
    let mut sorted: Vec<&IndexSet> = candidates.iter().collect();
    sorted.sort();
    sorted.dedup();
    let mut used: HashSet<usize> = HashSet::new();
    let mut members = Vec::new();
    for s in sorted {
        if target.is_some_and(|t| members.len() >= t) {
            break;
        }
        let outside = s.difference(core);
        if outside.len() != level || outside.iter().any(|j| used.contains(&j)) {
            continue;
        }
        used.extend(outside.iter());
        members.push(s.clone());
    }
    Pompom {
        core: core.clone(),
        members,
        level,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RevealingEntry {
    pub sigma: Word,
    pub pompom: Pompom,
}

/// One pompom of witnesses per assignment `σ` to the core.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RevealingSet {
    pub core: IndexSet,
    pub level: usize,
    pub n: usize,
    pub q: usize,
    #[serde(with = "ratio::serde_str")]
    pub eta: Ratio,
    pub size_target: usize,
    pub entries: Vec<RevealingEntry>,
}

impl RevealingSet {
    pub fn violations(&self, w: &Word, l: &Property) -> Vec<String> {
        let mut out = Vec::new();
        if !core_within_bound(self.core.len(), &self.eta, self.n, self.q, self.level) {
            out.push(format!("core of size {} exceeds the bound", self.core.len()));
        }
        for e in &self.entries {
            let tag = l.alphabet().render(&e.sigma);
            if e.pompom.core != self.core {
                out.push(format!("σ={tag}: different core"));
            }
            out.extend(e.pompom.violations().into_iter().map(|v| format!("σ={tag}: {v}")));
            if e.pompom.len() < self.size_target {
                out.push(format!("σ={tag}: {} < {} members", e.pompom.len(), self.size_target));
            }
            match substitute(w, &e.sigma, &self.core) {
                Ok(ws) => {
                    for m in &e.pompom.members {
                        if !is_witness(m, &ws, l) {
                            out.push(format!("σ={tag}: {:?} is not a witness", m.as_slice()));
                        }
                    }
                }
                Err(err) => out.push(format!("σ={tag}: {err}")),
            }
        }
        out
    }
}

/// For every `σ ∈ Ξ^{|C|}`, a greedy pompom of witnesses against `w_{σ,C}`
/// drawn from the constellation's family, of at least `size_target` members.
pub fn extract_revealing_pompoms(
    c: &Constellation,
    w: &Word,
    l: &Property,
    epsilon: &Ratio,
    size_target: Option<usize>,
    sigma_cap: u64,
) -> Result<RevealingSet, StructureError> {
    l.check_word(w)?;
    if !l.is_far(w, epsilon)? {
        return Err(StructureError::NotFar(ratio::format(epsilon)));
    }
    let k = l.alphabet().size();
    let count = sigma_count(k, &c.core, sigma_cap).ok_or_else(|| StructureError::SigmaCap {
        count: format!("{k}^{}", c.core.len()),
        cap: sigma_cap,
    })?;
    let target = size_target.unwrap_or_else(|| default_size_target(c.n, c.q, c.level, epsilon));
    let entries: Vec<RevealingEntry> = (0..count as usize)
        .into_par_iter()
        .map(|r| {
            let sigma = Word::unrank(r, c.core.len(), k);
            let ws = substitute(w, &sigma, &c.core).expect("core indices lie inside the word");
            let witnesses: Vec<IndexSet> = c
                .family
                .iter()
                .filter(|s| is_witness(s, &ws, l))
                .cloned()
                .collect();
            let pompom = greedy_pompom(&c.core, c.level, &witnesses, Some(target));
            RevealingEntry { sigma, pompom }
        })
        .collect();
    let short: BTreeMap<String, usize> = entries
        .iter()
        .filter(|e| e.pompom.len() < target)
        .map(|e| (l.alphabet().render(&e.sigma), e.pompom.len()))
        .collect();
    if !short.is_empty() {
        return Err(StructureError::Shortfall {
            needed: target,
            detail: serde_json::to_string(&short).unwrap_or_default(),
        });
    }
    Ok(RevealingSet {
        core: c.core.clone(),
        level: c.level,
        n: c.n,
        q: c.q,
        eta: c.eta.clone(),
        size_target: target,
        entries,
    })
}

/// Full-size pompoms with a common core covering at least `1/(2(q+1))` of
/// the weight.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscerningSet {
    pub core: IndexSet,
    pub level: usize,
    pub n: usize,
    pub q: usize,
    #[serde(with = "ratio::serde_str")]
    pub eta: Ratio,
    pub size_target: usize,
    pub pompoms: Vec<Pompom>,
    #[serde(with = "ratio::serde_str")]
    pub union_weight: Ratio,
}

impl DiscerningSet {
    pub fn members(&self) -> impl Iterator<Item = &IndexSet> {
        self.pompoms.iter().flat_map(|p| p.members.iter())
    }

    pub fn violations(&self, mu: &ProbFormula) -> Vec<String> {
        let mut out = Vec::new();
        if !core_within_bound(self.core.len(), &self.eta, self.n, self.q, self.level) {
            out.push(format!("core of size {} exceeds the bound", self.core.len()));
        }
        let mut seen = HashSet::new();
        for (j, p) in self.pompoms.iter().enumerate() {
            if p.core != self.core || p.level != self.level {
                out.push(format!("pompom {j}: different core or level"));
            }
            if p.len() != self.size_target {
                out.push(format!("pompom {j}: {} members, expected {}", p.len(), self.size_target));
            }
            out.extend(p.violations().into_iter().map(|v| format!("pompom {j}: {v}")));
            for m in &p.members {
                if !seen.insert(m) {
                    out.push(format!("{:?} appears twice", m.as_slice()));
                }
            }
        }
        let all: Vec<IndexSet> = self.members().cloned().collect();
        let weight = family_weight(&mu.query_index(), mu, &all);
        if weight != self.union_weight {
            out.push(format!(
                "recorded weight {} differs from {}",
                ratio::format(&self.union_weight),
                ratio::format(&weight)
            ));
        }
        if weight < ratio::frac(1, 2 * (self.q as i64 + 1)) {
            out.push(format!("union weight {} below 1/{}", ratio::format(&weight), 2 * (self.q + 1)));
        }
        out
    }
}

/// Extracts full-size pompoms greedily while the rest of the family weighs
/// more than `1/(2(q+1))`.
pub fn extract_discerning_pompoms(
    c: &Constellation,
    mu: &ProbFormula,
    epsilon: &Ratio,
    size_target: Option<usize>,
) -> Result<DiscerningSet, StructureError> {
    let target = size_target
        .unwrap_or_else(|| default_size_target(c.n, c.q, c.level, epsilon))
        .max(1);
    let index = mu.query_index();
    let stop = ratio::frac(1, 2 * (c.q as i64 + 1));
    let mut remaining: Vec<IndexSet> = c.family.clone();
    remaining.sort();
    remaining.dedup();
    let initial = family_weight(&index, mu, &remaining);
    let mut left = initial.clone();
    let mut pompoms = Vec::new();
    while left > stop {
        let p = greedy_pompom(&c.core, c.level, &remaining, Some(target));
        if p.len() < target {
            return Err(StructureError::Shortfall {
                needed: target,
                detail: format!(
                    "round {} found {} members; remaining weight {}",
                    pompoms.len() + 1,
                    p.len(),
                    ratio::format(&left)
                ),
            });
        }
        let taken: HashSet<&IndexSet> = p.members.iter().collect();
        remaining.retain(|s| !taken.contains(s));
        left = family_weight(&index, mu, &remaining);
        pompoms.push(p);
    }
    Ok(DiscerningSet {
        core: c.core.clone(),
        level: c.level,
        n: c.n,
        q: c.q,
        eta: c.eta.clone(),
        size_target: target,
        pompoms,
        union_weight: initial - left,
    })
}
