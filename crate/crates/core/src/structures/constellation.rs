use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use super::{cmp_powers, ScmDecomposition};
use crate::formula::ProbFormula;
use crate::ratio::{self, Ratio};
use crate::word::IndexSet;

/// A bounded core `C` with a heavy family whose members all meet `C` in
/// exactly `q − level` indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Constellation {
    pub level: usize,
    pub q: usize,
    pub n: usize,
    pub core: IndexSet,
    pub family: Vec<IndexSet>,
    #[serde(with = "ratio::serde_str")]
    pub eta: Ratio,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstellationReport {
    pub core_bound: bool,
    pub heavy: bool,
    pub overlap: bool,
    pub spread: bool,
    #[serde(with = "ratio::serde_str")]
    pub weight: Ratio,
    /// Members whose overlap with the core is wrong.
    pub bad_overlap: Vec<IndexSet>,
    /// Outside indices lying in too many members.
    pub crowded: Vec<usize>,
}

impl ConstellationReport {
    pub fn ok(&self) -> bool {
        self.core_bound && self.heavy && self.overlap && self.spread
    }
}

/// Why no constellation was returned.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NoConstellation {
    /// `support_mismatch`, `hypothesis`, `no_level` or `verification`.
    pub kind: String,
    pub message: String,
    /// `μ(match_i)` for each level.
    pub match_weights: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<ConstellationReport>,
}

impl std::fmt::Display for NoConstellation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "no constellation ({}): {}", self.kind, self.message)
    }
}

impl std::error::Error for NoConstellation {}

/// `μ` of a family of query sets; sets outside the support weigh nothing.
pub(crate) fn family_weight(index: &HashMap<IndexSet, usize>, mu: &ProbFormula, family: &[IndexSet]) -> Ratio {
    family
        .iter()
        .filter_map(|s| index.get(s))
        .map(|&j| &mu.weights()[j])
        .sum()
}

/// `|C| < η·n^{1−i/q}`, exactly.
pub(crate) fn core_within_bound(core_len: usize, eta: &Ratio, n: usize, q: usize, level: usize) -> bool {
    if q == 0 || level > q {
        return false;
    }
    if *eta <= ratio::zero() {
        return false;
    }
    let num = eta.numer().to_biguint().unwrap_or_default();
    let den = eta.denom().to_biguint().unwrap_or_default();
    let q32 = q as u32;
    let lhs = (BigUint::from(core_len) * den).pow(q32);
    let rhs = num.pow(q32) * BigUint::from(n).pow((q - level) as u32);
    lhs < rhs
}

/// `q·|supp|/n`, the core bound the decomposition delivers.
pub fn default_eta(support: usize, n: usize, q: usize) -> Ratio {
    ratio::frac((q * support) as i64, n.max(1) as i64)
}

/// Checks the four defining conditions independently.
pub fn verify_constellation(c: &Constellation, mu: &ProbFormula) -> ConstellationReport {
    let (n, q, i) = (c.n, c.q, c.level);
    let index = mu.query_index();
    let weight = family_weight(&index, mu, &c.family);
    let core_bound = i >= 1 && core_within_bound(c.core.len(), &c.eta, n, q, i);
    let heavy = weight >= ratio::frac(1, (q + 1) as i64);
    let bad_overlap: Vec<IndexSet> = c
        .family
        .iter()
        .filter(|s| i > q || s.intersection_len(&c.core) != q - i)
        .cloned()
        .collect();
    let mut crowded = Vec::new();
    if i > 1 {
        let mut count: HashMap<usize, u64> = HashMap::new();
        for s in &c.family {
            for j in s.iter().filter(|&j| !c.core.contains(j)) {
                *count.entry(j).or_default() += 1;
            }
        }
        // count ≤ n^{(i−1)/q}  ⇔  count^q ≤ n^{i−1}
        crowded = count
            .into_iter()
            .filter(|&(_, k)| cmp_powers(k, q as u32, n as u64, (i - 1) as u32) == Ordering::Greater)
            .map(|(j, _)| j)
            .collect();
        crowded.sort_unstable();
    }
    ConstellationReport {
        core_bound,
        heavy,
        overlap: bad_overlap.is_empty(),
        spread: crowded.is_empty(),
        weight,
        bad_overlap,
        crowded,
    }
}

/// Picks the smallest level `i ≥ 1` with `μ(match_i) ≥ 1/(q+1)`, provided
/// `μ(match_0) ≤ 1/(q+1)`. `eta` defaults to `q·|supp|/n`.
pub fn find_constellation(
    scm: &ScmDecomposition,
    mu: &ProbFormula,
    eta: Option<Ratio>,
) -> Result<Constellation, NoConstellation> {
    let q = scm.q;
    let index = mu.query_index();
    let weights: Vec<Ratio> = scm
        .matches
        .iter()
        .map(|m| family_weight(&index, mu, m))
        .collect();
    let fail = |kind: &str, message: String, report| NoConstellation {
        kind: kind.into(),
        message,
        match_weights: weights.iter().map(ratio::format).collect(),
        report,
    };
    let built: BTreeSet<&IndexSet> = scm.sets[0].iter().collect();
    let support = mu.support_sets();
    if scm.n != mu.n() || built.len() != scm.sets[0].len() || support.iter().collect::<BTreeSet<_>>() != built {
        return Err(fail(
            "support_mismatch",
            "the decomposition was not built from this formula's support".into(),
            None,
        ));
    }
    let heavy = ratio::frac(1, (q + 1) as i64);
    if weights[0] > heavy {
        return Err(fail(
            "hypothesis",
            format!("match_0 weighs {} > 1/{}", ratio::format(&weights[0]), q + 1),
            None,
        ));
    }
    let Some(level) = (1..=q).find(|&i| weights[i] >= heavy) else {
        return Err(fail("no_level", format!("no level reaches weight 1/{}", q + 1), None));
    };
    let c = Constellation {
        level,
        q,
        n: scm.n,
        core: scm.cores[level].clone(),
        family: scm.matches[level].clone(),
        eta: eta.unwrap_or_else(|| default_eta(support.len(), scm.n, q)),
    };
    let report = verify_constellation(&c, mu);
    if !report.ok() {
        return Err(fail(
            "verification",
            format!("level {level} fails the defining conditions"),
            Some(report),
        ));
    }
    Ok(c)
}
