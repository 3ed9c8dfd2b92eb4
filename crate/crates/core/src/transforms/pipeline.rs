use num_traits::One;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use serde::{Deserialize, Serialize};

use super::amplify::{amplify, run_constraint, AmplifyMode};
use super::basic::{default_band, make_equitable, make_zero_one, prune_to_equitable_band};
use super::linearize::{default_samples, reduce_support_linear, Verification};
use super::{log2, TransformError};
use crate::config::{Caps, Overrides};
use crate::formula::{merge_duplicate_queries, Constraint, ProbFormula};
use crate::ratio::{self, Ratio};
use crate::seed;
use crate::word::{all_words, IndexSet, PartialPropertyPair};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStage {
    pub stage: String,
    pub input: String,
    pub output: String,
    /// Sureness multiplier realized on this instance.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub multiplier: Option<f64>,
    /// The multiplier the stage is allowed in general.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PipelineTrace {
    pub stages: Vec<TraceStage>,
}

impl PipelineTrace {
    fn push(
        &mut self,
        stage: &str,
        input: &ProbFormula,
        output: &ProbFormula,
        multiplier: Option<f64>,
        bound: Option<f64>,
    ) -> &mut TraceStage {
        self.stages.push(TraceStage {
            stage: stage.to_string(),
            input: input.fingerprint(),
            output: output.fingerprint(),
            multiplier,
            bound,
            seed: None,
            note: None,
        });
        self.stages.last_mut().unwrap()
    }

    pub fn stage_names(&self) -> Vec<&str> {
        self.stages.iter().map(|s| s.stage.as_str()).collect()
    }
}

/// `16δ·log2(16q·δ^{-2}·log2|Ξ|/ε)`.
pub fn combi_delta(delta: f64, q: usize, alphabet_size: usize, epsilon: f64) -> f64 {
    16.0 * delta * log2(16.0 * q as f64 * log2(alphabet_size as f64) / (delta * delta * epsilon))
}

#[derive(Debug, Clone)]
pub struct CombiOutcome {
    pub formula: ProbFormula,
    pub trace: PipelineTrace,
    /// `δ^{-2}·log2|Ξ|`.
    pub alpha: f64,
    pub delta_prime: f64,
    /// Returned the accept-everything formula because `δ ≥ 1/16`.
    pub trivial: bool,
}

fn accept_all(p: &ProbFormula) -> ProbFormula {
    let q = p.constraints()[p.support()[0]].query.clone();
    let c = Constraint::constant(q, p.alphabet_size(), ratio::one()).expect("table of an existing query");
    ProbFormula::uniform(p.n(), p.alphabet().clone(), vec![c]).expect("single constraint")
}

/// Turns a declared `(ε/2, δ, q)`-test into a combinatorial one: linearize,
/// prune to an equitable band, condition on one weight band, round to zero-one.
///
/// Overrides: `linearize.samples`, `linearize.retries`, `prune.lower`,
/// `prune.upper`.
pub fn combinatorialize(
    p: &ProbFormula,
    epsilon: &Ratio,
    delta: &Ratio,
    q: usize,
    master_seed: u64,
    overrides: &Overrides,
    caps: &Caps,
) -> Result<CombiOutcome, TransformError> {
    let k = p.alphabet_size();
    let n = p.n();
    let d = ratio::to_f64(delta);
    let e = ratio::to_f64(epsilon);
    let alpha = log2(k as f64) / (d * d);
    let mut trace = PipelineTrace::default();
    if *delta >= ratio::frac(1, 16) {
        let f = accept_all(p);
        trace.push("trivial", p, &f, None, None).note = Some("delta >= 1/16".into());
        return Ok(CombiOutcome {
            formula: f,
            trace,
            alpha,
            delta_prime: 1.0,
            trivial: true,
        });
    }
    let delta_prime = combi_delta(d, q, k, e);

    let samples = overrides
        .usize("linearize.samples")?
        .unwrap_or_else(|| default_samples(delta, k, n));
    let retries = overrides.usize("linearize.retries")?.unwrap_or(16);
    let p1 = if (p.support_size() as f64) <= alpha * n as f64 {
        let out = p.clone();
        trace.push("linearize", p, &out, Some(1.0), Some(2.0)).note =
            Some("skipped: support already within alpha*n".into());
        out
    } else {
        let lin = reduce_support_linear(p, delta, samples, retries, seed::derive_seed(master_seed, "combi", 0), caps.enumeration)
            .map_err(TransformError::at("linearize"))?;
        if lin.verification == Verification::Failed {
            return Err(TransformError::Stage {
                stage: "linearize",
                source: Box::new(TransformError::RetriesExhausted(lin.attempts)),
            });
        }
        let st = trace.push("linearize", p, &lin.formula, Some(2.0), Some(2.0));
        st.seed = Some(lin.seed);
        st.note = Some(format!(
            "{} samples, {} attempt(s), {:?}",
            lin.samples, lin.attempts, lin.verification
        ));
        lin.formula
    };

    let (lower, upper) = default_band(alpha, n, q, epsilon);
    let lower = overrides.ratio("prune.lower")?.unwrap_or(lower);
    let upper = overrides.ratio("prune.upper")?.unwrap_or(upper);
    let two_delta = delta * ratio::int(2);
    let pr = prune_to_equitable_band(&p1, &two_delta, &lower, &upper).map_err(TransformError::at("prune"))?;
    let st = trace.push(
        "prune",
        &p1,
        &pr.formula,
        Some(1.0 / ratio::to_f64(&pr.kept)),
        Some(2.0),
    );
    st.note = Some(format!(
        "dropped {} light, {} heavy",
        pr.dropped_light.len(),
        pr.dropped_heavy.len()
    ));
    let p2 = pr.formula;

    let eq = make_equitable(&p2);
    let bound = 2.0 * log2(2.0 * ratio::to_f64(&eq.beta));
    let st = trace.push(
        "equitable",
        &p2,
        &eq.formula,
        Some(ratio::to_f64(&eq.multiplier())),
        Some(bound),
    );
    st.note = Some(format!("{} weight band(s)", eq.bands));
    let p3 = eq.formula;

    let p4 = make_zero_one(&p3);
    trace.push("zero_one", &p3, &p4, Some(2.0), Some(2.0));

    let bound = (alpha * n as f64).ceil() as usize;
    let formula = if p4.support_size() <= bound {
        p4.with_support_bound(bound)?
    } else {
        p4
    };
    Ok(CombiOutcome {
        formula,
        trace,
        alpha,
        delta_prime,
        trivial: false,
    })
}

#[derive(Debug, Clone)]
pub struct EffectiveOneSided {
    pub formula: ProbFormula,
    pub reps: usize,
    /// `reps·q`, the query count of one amplified run.
    pub q_double_prime: usize,
    /// `3·q″`, the padded query count.
    pub q_prime: usize,
    pub runs: usize,
    /// `1/(2(q′+1))`.
    pub delta: Ratio,
    pub verification: Verification,
    pub attempts: usize,
    pub seed: u64,
    /// Largest fraction of runs accepting an ε/2-far word, when verified.
    pub worst_far_acceptance: Option<Ratio>,
}

fn pad(c: Constraint, target: usize, n: usize, k: usize) -> Result<Constraint, TransformError> {
    let target = target.min(n);
    if c.query.len() >= target {
        return Ok(c);
    }
    let extra: Vec<usize> = (0..n)
        .filter(|&i| !c.query.contains(i))
        .take(target - c.query.len())
        .collect();
    let padded = c.query.union(&IndexSet::new(extra));
    let pos: Vec<usize> = c.query.iter().map(|i| padded.position(i).unwrap()).collect();
    Ok(Constraint::from_fn(padded, k, |a| {
        let r = pos.iter().fold(0usize, |acc, &j| acc * k + a.get(j) as usize);
        c.table[r].clone()
    })?)
}

/// Amplifies a 1-sided test by `reps` repetitions, fixes a verified sequence
/// of `runs` amplified runs as the new uniform distribution, and pads every
/// query set to `3·reps·q` indices.
///
/// The product formula is never materialized: each run draws its `reps`
/// components directly. Overrides: `effective1.reps`, `effective1.runs`,
/// `effective1.retries`.
#[allow(clippy::too_many_arguments)]
pub fn effective_one_sided(
    p: &ProbFormula,
    pair: &PartialPropertyPair,
    epsilon: &Ratio,
    delta: &Ratio,
    q: usize,
    master_seed: u64,
    overrides: &Overrides,
    caps: &Caps,
) -> Result<EffectiveOneSided, TransformError> {
    let n = p.n();
    let k = p.alphabet_size();
    let d = ratio::to_f64(delta);
    let reps = match overrides.usize("effective1.reps")? {
        Some(r) => r,
        None => (10.0 * log2(q.max(1) as f64) / (1.0 - d)).ceil().max(1.0) as usize,
    };
    if reps == 0 {
        return Err(TransformError::ZeroReps);
    }
    let qpp = reps * q;
    let runs = match overrides.usize("effective1.runs")? {
        Some(r) => r.max(1),
        None => (10.0 * log2(k as f64) * qpp as f64 * n as f64).ceil().max(1.0) as usize,
    };
    let retries = overrides.usize("effective1.retries")?.unwrap_or(8).max(1);
    let q_prime = 3 * qpp;
    let limit = Ratio::new(1.into(), (10 * qpp.max(1)).into());
    let half_eps = epsilon / ratio::int(2);

    let far: Option<Vec<_>> = match all_words(n, k, caps.enumeration) {
        Ok(it) => {
            let mut v = Vec::new();
            for w in it {
                if pair.outer.is_far(&w, &half_eps)? {
                    v.push(w);
                }
            }
            Some(v)
        }
        Err(_) => None,
    };

    let support = p.support();
    let weights: Vec<f64> = support.iter().map(|&i| ratio::to_f64(&p.weights()[i])).collect();
    let dist = WeightedIndex::new(&weights).expect("positive support");
    let table_cap = caps.amplification.max(1 << 20);
    for attempt in 0..retries {
        let s = seed::derive_seed(master_seed, "effective1", attempt as u64);
        let mut rng = seed::rng(s);
        let w_run = Ratio::new(1.into(), (runs as i64).into());
        let mut raw = Vec::with_capacity(runs);
        for _ in 0..runs {
            let parts: Vec<&Constraint> = (0..reps)
                .map(|_| &p.constraints()[support[dist.sample(&mut rng)]])
                .collect();
            let c = run_constraint(&parts, k, AmplifyMode::RejectIfAny, table_cap)?;
            raw.push((pad(c, q_prime, n, k)?, w_run.clone()));
        }
        let formula = merge_duplicate_queries(n, p.alphabet().clone(), raw)?.with_one_sided(p.is_one_sided());
        let (verification, worst) = match &far {
            None => (Verification::Unverified, None),
            Some(ws) => {
                let worst = ws
                    .iter()
                    .map(|w| formula.satisfaction_unchecked(w))
                    .max()
                    .unwrap_or_else(ratio::zero);
                let ok = worst <= limit;
                (if ok { Verification::Verified } else { Verification::Failed }, Some(worst))
            }
        };
        let bound = (4.0 * ((q_prime + 1) as f64).powi(2) * log2(k as f64) * n as f64).ceil() as usize;
        let formula = if formula.support_size() <= bound {
            formula.with_support_bound(bound)?
        } else {
            formula
        };
        let out = EffectiveOneSided {
            formula,
            reps,
            q_double_prime: qpp,
            q_prime,
            runs,
            delta: Ratio::new(1.into(), (2 * (q_prime as i64 + 1)).into()),
            verification,
            attempts: attempt + 1,
            seed: s,
            worst_far_acceptance: worst,
        };
        if verification != Verification::Failed {
            return Ok(out);
        }
    }
    Err(TransformError::RetriesExhausted(retries))
}

/// `P(Bin(reps, δ) ≥ ⌈reps/2⌉)`: the error of a majority vote over `reps`
/// runs that each err with probability at most `δ`.
pub(crate) fn majority_error(reps: usize, delta: &Ratio) -> Ratio {
    let t = reps.div_ceil(2);
    let mut dist = vec![ratio::one()];
    for _ in 0..reps {
        let mut next = vec![ratio::zero(); dist.len() + 1];
        for (j, v) in dist.iter().enumerate() {
            next[j] += v * (Ratio::one() - delta);
            next[j + 1] += v * delta;
        }
        dist = next;
    }
    dist.into_iter().skip(t).sum()
}

#[derive(Debug, Clone)]
pub struct EffectiveTwoSided {
    pub combi: CombiOutcome,
    pub reps: usize,
    /// `reps·q`.
    pub q_prime: usize,
    /// Exact majority-vote error of the amplified test.
    pub amplified_delta: Ratio,
    /// The closed-form target `1/(4q′)^3`, for comparison with `combi.delta_prime`.
    pub target_delta: f64,
}

/// Default repetition count `20·log q·log log(log|Ξ|/ε)/(1/2−δ)²`, each
/// logarithm floored at 1, rounded up to an odd integer.
pub fn default_two_sided_reps(q: usize, alphabet_size: usize, epsilon: f64, delta: f64) -> usize {
    let lq = log2(q as f64).max(1.0);
    let inner = log2(alphabet_size as f64) / epsilon;
    let ll = log2(log2(inner).max(2.0)).max(1.0);
    let gap = 0.5 - delta;
    let r = (20.0 * lq * ll / (gap * gap)).ceil() as usize;
    r.max(1) | 1
}

/// Majority-amplifies a 2-sided test, then combinatorializes it.
/// Overrides: `effective2.reps` plus those of [`combinatorialize`].
pub fn effective_two_sided(
    p: &ProbFormula,
    epsilon: &Ratio,
    delta: &Ratio,
    q: usize,
    master_seed: u64,
    overrides: &Overrides,
    caps: &Caps,
) -> Result<EffectiveTwoSided, TransformError> {
    let reps = match overrides.usize("effective2.reps")? {
        Some(r) => r,
        None => default_two_sided_reps(q, p.alphabet_size(), ratio::to_f64(epsilon), ratio::to_f64(delta)),
    };
    let amp = amplify(p, reps, AmplifyMode::Majority, caps.amplification).map_err(TransformError::at("amplify"))?;
    let amplified_delta = majority_error(reps, delta);
    let q_prime = reps * q;
    let mut combi = combinatorialize(
        &amp,
        epsilon,
        &amplified_delta,
        q_prime,
        seed::derive_seed(master_seed, "effective2", 0),
        overrides,
        caps,
    )?;
    let st = TraceStage {
        stage: "amplify".into(),
        input: p.fingerprint(),
        output: amp.fingerprint(),
        multiplier: None,
        bound: None,
        seed: None,
        note: Some(format!(
            "majority of {reps}; q'={q_prime}; delta {} -> {}",
            ratio::format(delta),
            ratio::format(&amplified_delta)
        )),
    };
    combi.trace.stages.insert(0, st);
    let target_delta = 1.0 / (4.0 * q_prime as f64).powi(3);
    Ok(EffectiveTwoSided {
        combi,
        reps,
        q_prime,
        amplified_delta,
        target_delta,
    })
}
