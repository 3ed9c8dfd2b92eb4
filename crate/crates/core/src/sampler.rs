//! Sample-based testers: every index is queried independently with
//! probability `p`.

use num_traits::{Signed, Zero};
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{OverrideError, Overrides};
use crate::formula::{ProbFormula, Sided};
use crate::ratio::{self, Ratio};
use crate::seed;
use crate::structures::{
    build_scm, extract_discerning_pompoms, find_constellation, DiscerningSet, NoConstellation, Pompom,
    StructureError,
};
use crate::witness::{is_witness, sigma_count};
use crate::word::{substitute, Alphabet, IndexSet, PartialPropertyPair, Property, Word, WordError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SamplerError {
    #[error(transparent)]
    Word(#[from] WordError),
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error(transparent)]
    Override(#[from] OverrideError),
    #[error(transparent)]
    NoConstellation(#[from] NoConstellation),
    #[error("rate {0} is not in [0,1]")]
    Rate(String),
    #[error("the formula is not combinatorial (zero-one and uniform over its support)")]
    NotCombinatorial,
    #[error("query sets are not all of one size")]
    NonUniformQueries,
    #[error("{count} core assignments exceed the cap of {cap}")]
    SigmaCap { count: String, cap: u64 },
    #[error("query set {0:?} is not in the formula's support")]
    NotInSupport(Vec<usize>),
    #[error("discerning set fails its invariants: {0:?}")]
    InvalidDiscerning(Vec<String>),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

/// One draw `U ~ μ_p`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleDraw {
    pub indices: IndexSet,
    pub seed: u64,
    #[serde(with = "ratio::serde_str")]
    pub p: Ratio,
}

/// Per-index uniforms of a seeded draw. Thresholding them at different `p`
/// couples the draws: a larger `p` always yields a superset.
pub fn uniforms(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = seed::rng(seed);
    (0..n).map(|_| rng.random::<f64>()).collect()
}

pub fn draw_sample(p: &Ratio, n: usize, seed: u64) -> SampleDraw {
    let pf = ratio::to_f64(p);
    let indices = uniforms(n, seed)
        .into_iter()
        .enumerate()
        .filter(|&(_, u)| u < pf)
        .map(|(i, _)| i)
        .collect();
    SampleDraw {
        indices,
        seed,
        p: p.clone(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingRate {
    pub side: Sided,
    pub alpha: f64,
    /// `α·n^{−1/q²}` clamped to `[0, 1]`.
    pub p: f64,
    /// `log2` of the size `n` must exceed for the guarantee to apply.
    pub log2_threshold: f64,
    pub above_threshold: bool,
}

impl SamplingRate {
    /// `p` as an exact dyadic rational.
    pub fn p_ratio(&self) -> Ratio {
        ratio::from_f64(self.p).unwrap_or_else(ratio::zero)
    }
}

/// `α = 15·ln|Ξ|·q(q+1)²/ε` (1-sided) or `10³·ln|Ξ|·q⁴/ε` (2-sided), with
/// `p = α·n^{−1/q²}`.
pub fn compute_sampling_rate(q: usize, alphabet_size: usize, epsilon: f64, n: usize, side: Sided) -> SamplingRate {
    let qf = q as f64;
    let ln_k = (alphabet_size as f64).ln();
    let log_k = (alphabet_size as f64).log2();
    let (alpha, base) = match side {
        Sided::One => (
            15.0 * ln_k * qf * (qf + 1.0).powi(2) / epsilon,
            24.0 * qf * (qf + 1.0).powi(2) * log_k * log_k / epsilon,
        ),
        Sided::Two => (
            1e3 * ln_k * qf.powi(4) / epsilon,
            24.0 * qf.powi(10) * log_k * log_k / epsilon,
        ),
    };
    let p = (alpha * (n as f64).powf(-1.0 / (qf * qf))).clamp(0.0, 1.0);
    let log2_threshold = qf * base.log2();
    SamplingRate {
        side,
        alpha,
        p: if p.is_nan() { 0.0 } else { p },
        log2_threshold,
        above_threshold: (n as f64).log2() > log2_threshold,
    }
}

/// How a tester turns a sample into a decision.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "side", rename_all = "snake_case")]
pub enum DecisionRule {
    /// Reject iff the sample is a witness against the word.
    One { property: Property },
    /// Accept iff some core assignment has pompom average above ½.
    Two {
        formula: ProbFormula,
        discerning: DiscerningSet,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleTester {
    #[serde(with = "ratio::serde_str")]
    pub p: Ratio,
    pub n: usize,
    pub alphabet: Alphabet,
    pub rule: DecisionRule,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SigmaGamma {
    pub sigma: Word,
    #[serde(with = "ratio::serde_str")]
    pub gamma: Ratio,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplerRun {
    pub accept: bool,
    pub draw: SampleDraw,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub gammas: Vec<SigmaGamma>,
}

impl SampleTester {
    pub fn one_sided(property: Property, p: Ratio) -> Result<Self, SamplerError> {
        if !ratio::in_unit_interval(&p) {
            return Err(SamplerError::Rate(ratio::format(&p)));
        }
        Ok(SampleTester {
            p,
            n: property.n(),
            alphabet: property.alphabet().clone(),
            rule: DecisionRule::One { property },
        })
    }

    pub fn side(&self) -> Sided {
        match self.rule {
            DecisionRule::One { .. } => Sided::One,
            DecisionRule::Two { .. } => Sided::Two,
        }
    }

    pub fn core(&self) -> IndexSet {
        match &self.rule {
            DecisionRule::One { .. } => IndexSet::empty(),
            DecisionRule::Two { discerning, .. } => discerning.core.clone(),
        }
    }

    /// Everything that does not depend on the sample, computed once per word.
    pub fn decider<'a>(&'a self, w: &'a Word, sigma_cap: u64) -> Result<Decider<'a>, SamplerError> {
        if w.len() != self.n {
            return Err(WordError::LengthMismatch {
                left: w.len(),
                right: self.n,
            }
            .into());
        }
        w.check_alphabet(self.alphabet.size())?;
        match &self.rule {
            DecisionRule::One { property } => Ok(Decider::One { property, w }),
            DecisionRule::Two { formula, discerning } => {
                Ok(Decider::Two(TwoSidedDecider::new(formula, discerning, w, sigma_cap)?))
            }
        }
    }

    /// Draws `U ~ μ_p` from `seed` and decides.
    pub fn run(&self, w: &Word, seed: u64, sigma_cap: u64) -> Result<SamplerRun, SamplerError> {
        let d = self.decider(w, sigma_cap)?;
        let draw = draw_sample(&self.p, self.n, seed);
        let gammas = d.gammas(&draw.indices);
        let accept = d.accepts(&draw.indices);
        Ok(SamplerRun { accept, draw, gammas })
    }
}

pub enum Decider<'a> {
    One { property: &'a Property, w: &'a Word },
    Two(TwoSidedDecider),
}

impl Decider<'_> {
    pub fn accepts(&self, u: &IndexSet) -> bool {
        match self {
            Decider::One { property, w } => !is_witness(u, w, property),
            Decider::Two(d) => d.accepts(&mask(u, d.n)),
        }
    }

    pub fn accepts_mask(&self, m: &[bool]) -> bool {
        match self {
            Decider::One { property, w } => {
                let u: IndexSet = (0..m.len()).filter(|&i| m[i]).collect();
                !is_witness(&u, w, property)
            }
            Decider::Two(d) => d.accepts(m),
        }
    }

    /// Per-σ `γ_{σ,U}`; empty for 1-sided testers.
    pub fn gammas(&self, u: &IndexSet) -> Vec<SigmaGamma> {
        match self {
            Decider::One { .. } => Vec::new(),
            Decider::Two(d) => d.gammas(&mask(u, d.n)),
        }
    }
}

fn mask(u: &IndexSet, n: usize) -> Vec<bool> {
    let mut m = vec![false; n];
    for i in u.iter().filter(|&i| i < n) {
        m[i] = true;
    }
    m
}

/// Precomputed `S((w_{σ,C})_Q)` for every σ and every pompom member.
pub struct TwoSidedDecider {
    n: usize,
    sigmas: Vec<Word>,
    /// Per pompom, per member: outside indices.
    outside: Vec<Vec<Vec<usize>>>,
    /// `values[σ][pompom][member]`.
    values: Vec<Vec<Vec<Ratio>>>,
}

impl TwoSidedDecider {
    fn new(p: &ProbFormula, j: &DiscerningSet, w: &Word, sigma_cap: u64) -> Result<Self, SamplerError> {
        let k = p.alphabet_size();
        let count = sigma_count(k, &j.core, sigma_cap).ok_or_else(|| SamplerError::SigmaCap {
            count: format!("{k}^{}", j.core.len()),
            cap: sigma_cap,
        })?;
        let index = p.query_index();
        let mut constraints = Vec::new();
        let mut outside = Vec::new();
        for pom in &j.pompoms {
            let mut cs = Vec::new();
            let mut os = Vec::new();
            for m in &pom.members {
                let &ci = index
                    .get(m)
                    .ok_or_else(|| SamplerError::NotInSupport(m.as_slice().to_vec()))?;
                cs.push(&p.constraints()[ci]);
                os.push(m.difference(&j.core).as_slice().to_vec());
            }
            constraints.push(cs);
            outside.push(os);
        }
        let sigmas: Vec<Word> = (0..count as usize)
            .map(|r| Word::unrank(r, j.core.len(), k))
            .collect();
        let values = sigmas
            .par_iter()
            .map(|sigma| {
                let ws = substitute(w, sigma, &j.core).expect("core lies inside the word");
                constraints
                    .iter()
                    .map(|cs| cs.iter().map(|c| c.value_on(&ws, k).clone()).collect())
                    .collect()
            })
            .collect();
        Ok(TwoSidedDecider {
            n: p.n(),
            sigmas,
            outside,
            values,
        })
    }

    fn gamma_of(&self, s: usize, m: &[bool]) -> Ratio {
        if self.outside.is_empty() {
            return ratio::half();
        }
        let total: Ratio = self
            .outside
            .iter()
            .zip(&self.values[s])
            .map(|(os, vs)| {
                let (mut sum, mut cnt) = (Ratio::zero(), 0i64);
                for (o, v) in os.iter().zip(vs) {
                    if o.iter().all(|&i| m[i]) {
                        sum += v;
                        cnt += 1;
                    }
                }
                if cnt == 0 {
                    ratio::half()
                } else {
                    sum / Ratio::from_integer(cnt.into())
                }
            })
            .sum();
        total / Ratio::from_integer((self.outside.len() as i64).into())
    }

    fn accepts(&self, m: &[bool]) -> bool {
        let half = ratio::half();
        (0..self.sigmas.len()).any(|s| self.gamma_of(s, m) > half)
    }

    fn gammas(&self, m: &[bool]) -> Vec<SigmaGamma> {
        self.sigmas
            .iter()
            .enumerate()
            .map(|(s, sigma)| SigmaGamma {
                sigma: sigma.clone(),
                gamma: self.gamma_of(s, m),
            })
            .collect()
    }
}

/// `γ_{σ,U,W}`: the average of `S((w_{σ,C})_Q)` over members `Q` of `W`
/// with `Q \ C ⊆ U`, or ½ when there are none.
pub fn gamma(sigma: &Word, u: &IndexSet, pompom: &Pompom, p: &ProbFormula, w: &Word) -> Result<Ratio, SamplerError> {
    let ws = substitute(w, sigma, &pompom.core)?;
    let k = p.alphabet_size();
    let (mut sum, mut cnt) = (Ratio::zero(), 0i64);
    for m in &pompom.members {
        let ci = p
            .find_query(m)
            .filter(|&ci| !p.weights()[ci].is_zero())
            .ok_or_else(|| SamplerError::NotInSupport(m.as_slice().to_vec()))?;
        if m.difference(&pompom.core).is_subset(u) {
            sum += p.constraints()[ci].value_on(&ws, k);
            cnt += 1;
        }
    }
    Ok(if cnt == 0 {
        ratio::half()
    } else {
        sum / Ratio::from_integer(cnt.into())
    })
}

/// Draws `U ~ μ_p` and rejects iff `U` is a witness against `w`.
pub fn run_one_sided_sampler(l: &Property, w: &Word, p: &Ratio, seed: u64) -> Result<SamplerRun, SamplerError> {
    l.check_word(w)?;
    let draw = draw_sample(p, l.n(), seed);
    let accept = !is_witness(&draw.indices, w, l);
    Ok(SamplerRun {
        accept,
        draw,
        gammas: Vec::new(),
    })
}

pub fn run_two_sided_sampler(t: &SampleTester, w: &Word, seed: u64, sigma_cap: u64) -> Result<SamplerRun, SamplerError> {
    if t.side() != Sided::Two {
        return Err(SamplerError::Dimension("expected a 2-sided tester".into()));
    }
    t.run(w, seed, sigma_cap)
}

/// Builds the 2-sided tester of a combinatorial formula from its support
/// alone.
///
/// Override keys: `sampler.p` (rate), `scm.thresholds` (comma-separated,
/// `q+1` values), `constellation.eta`, `pompom.size`.
pub fn synthesize_two_sided_sampler(
    p: &ProbFormula,
    pair: &PartialPropertyPair,
    epsilon: &Ratio,
    ov: &Overrides,
) -> Result<SampleTester, SamplerError> {
    if pair.n() != p.n() || pair.alphabet() != p.alphabet() {
        return Err(SamplerError::Dimension("formula and properties disagree on (n, alphabet)".into()));
    }
    if !p.is_combinatorial() {
        return Err(SamplerError::NotCombinatorial);
    }
    let q = p.uniform_query_size().ok_or(SamplerError::NonUniformQueries)?;
    let thresholds = match ov.raw("scm.thresholds") {
        None => None,
        Some(v) => Some(
            v.split(',')
                .map(|t| t.trim().parse::<u64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| StructureError::Threshold(v.to_string()))?,
        ),
    };
    let support = p.support_sets();
    let scm = build_scm(&support, p.n(), q, thresholds)?;
    let c = find_constellation(&scm, p, ov.ratio("constellation.eta")?)?;
    let j = extract_discerning_pompoms(&c, p, epsilon, ov.usize("pompom.size")?)?;
    let bad = j.violations(p);
    if !bad.is_empty() {
        return Err(SamplerError::InvalidDiscerning(bad));
    }
    let rate = match ov.ratio("sampler.p")? {
        Some(r) => r,
        None => compute_sampling_rate(q, p.alphabet_size(), ratio::to_f64(epsilon), p.n(), Sided::Two).p_ratio(),
    };
    if !ratio::in_unit_interval(&rate) {
        return Err(SamplerError::Rate(ratio::format(&rate)));
    }
    Ok(SampleTester {
        p: rate,
        n: p.n(),
        alphabet: p.alphabet().clone(),
        rule: DecisionRule::Two {
            formula: p.clone(),
            discerning: j,
        },
    })
}

/// Fraction of `trials` draws for which some σ and some pompom has
/// `|γ_{σ,U,W} − γ_{σ,[n],W}| > tolerance`.
pub fn pompom_deviation_rate(
    t: &SampleTester,
    w: &Word,
    tolerance: &Ratio,
    trials: usize,
    master_seed: u64,
    sigma_cap: u64,
) -> Result<f64, SamplerError> {
    let DecisionRule::Two { formula, discerning } = &t.rule else {
        return Err(SamplerError::Dimension("expected a 2-sided tester".into()));
    };
    let k = formula.alphabet_size();
    let count = sigma_count(k, &discerning.core, sigma_cap).ok_or_else(|| SamplerError::SigmaCap {
        count: format!("{k}^{}", discerning.core.len()),
        cap: sigma_cap,
    })?;
    let full = IndexSet::full(t.n);
    let sigmas: Vec<Word> = (0..count as usize)
        .map(|r| Word::unrank(r, discerning.core.len(), k))
        .collect();
    let mut reference = Vec::new();
    for s in &sigmas {
        let row = discerning
            .pompoms
            .iter()
            .map(|pom| gamma(s, &full, pom, formula, w))
            .collect::<Result<Vec<_>, _>>()?;
        reference.push(row);
    }
    let bad = (0..trials)
        .into_par_iter()
        .map(|i| {
            let u = draw_sample(&t.p, t.n, seed::derive_seed(master_seed, "approx", i as u64)).indices;
            sigmas.iter().zip(&reference).any(|(s, row)| {
                discerning.pompoms.iter().zip(row).any(|(pom, g)| {
                    let d = gamma(s, &u, pom, formula, w).expect("members were checked") - g;
                    d.abs() > *tolerance
                })
            })
        })
        .filter(|&b| b)
        .count();
    Ok(bad as f64 / trials.max(1) as f64)
}
