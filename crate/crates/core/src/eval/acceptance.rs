use num_traits::One;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{EvalError, Z99};
use crate::config::Caps;
use crate::formula::ProbFormula;
use crate::ratio::{self, Ratio};
use crate::sampler::{draw_sample, DecisionRule, SampleTester};
use crate::seed;
use crate::word::{PartialPropertyPair, Word};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ExactEnumeration,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub target: String,
    pub method: Method,
    pub estimate: f64,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_ratio")]
    pub exact: Option<Ratio>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

mod opt_ratio {
    use super::Ratio;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(r: &Option<Ratio>, s: S) -> Result<S::Ok, S::Error> {
        r.as_ref().map(crate::ratio::format).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Ratio>, D::Error> {
        Option::<String>::deserialize(d)?
            .map(|s| crate::ratio::parse(&s).map_err(|e| serde::de::Error::custom(e.0)))
            .transpose()
    }
}

impl EvalReport {
    pub fn exact(target: String, value: Ratio) -> Self {
        EvalReport {
            target,
            method: Method::ExactEnumeration,
            estimate: ratio::to_f64(&value),
            exact: Some(value),
            trials: None,
            half_width: None,
            seed: None,
        }
    }
}

/// Bit masks `d_u` of the positions where member `u` disagrees with `w`; a
/// sample `U` is a witness iff it meets every `d_u`.
fn disagreement_masks(property: &crate::word::Property, w: &Word) -> Vec<u64> {
    property
        .members()
        .iter()
        .map(|u| (0..w.len()).filter(|&i| u.get(i) != w.get(i)).fold(0u64, |m, i| m | 1 << i))
        .collect()
}

/// `Σ_U p^{|U|}(1−p)^{n−|U|}·[T accepts on U]`, exactly.
pub fn exact_sampler_acceptance(t: &SampleTester, w: &Word, caps: &Caps) -> Result<Ratio, EvalError> {
    let n = t.n;
    let cap = match t.rule {
        DecisionRule::One { .. } => caps.exact_one_sided_n,
        DecisionRule::Two { .. } => caps.exact_two_sided_n,
    }
    .min(40);
    if n > cap {
        return Err(EvalError::ExactCap { n, cap });
    }
    let decider = t.decider(w, caps.sigma)?;
    let one = match &t.rule {
        DecisionRule::One { property } => Some(disagreement_masks(property, w)),
        _ => None,
    };
    let total: u64 = 1 << n;
    // accepted[s] = number of accepting samples of size s
    let accepted = (0..total)
        .into_par_iter()
        .fold(
            || vec![0u64; n + 1],
            |mut acc, mask| {
                let ok = match &one {
                    Some(ds) => ds.iter().any(|&d| mask & d == 0),
                    None => {
                        let m: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
                        decider.accepts_mask(&m)
                    }
                };
                if ok {
                    acc[mask.count_ones() as usize] += 1;
                }
                acc
            },
        )
        .reduce(
            || vec![0u64; n + 1],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    let p = &t.p;
    let q = Ratio::one() - p;
    Ok(accepted
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(s, &c)| Ratio::from_integer(c.into()) * ratio::pow(p, s) * ratio::pow(&q, n - s))
        .sum())
}

/// Mean accept indicator over `trials` draws, each from its own derived seed.
pub fn monte_carlo_acceptance(
    t: &SampleTester,
    w: &Word,
    trials: usize,
    master_seed: u64,
    sigma_cap: u64,
) -> Result<EvalReport, EvalError> {
    if trials == 0 {
        return Err(EvalError::Range("trials must be at least 1".into()));
    }
    let d = t.decider(w, sigma_cap)?;
    let accepted = (0..trials)
        .into_par_iter()
        .filter(|&i| {
            let u = draw_sample(&t.p, t.n, seed::derive_seed(master_seed, "mc", i as u64)).indices;
            d.accepts(&u)
        })
        .count();
    let est = accepted as f64 / trials as f64;
    Ok(EvalReport {
        target: format!("acceptance of {}", t.alphabet.render(w)),
        method: Method::MonteCarlo,
        estimate: est,
        exact: None,
        trials: Some(trials),
        half_width: Some(Z99 * (est * (1.0 - est) / trials as f64).sqrt()),
        seed: Some(master_seed),
    })
}

pub enum Subject<'a> {
    Formula(&'a ProbFormula),
    Sampler(&'a SampleTester),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum QualityMethod {
    Exact,
    MonteCarlo { trials: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityExtreme {
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_ratio")]
    pub exact: Option<Ratio>,
    pub word: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    /// Lowest acceptance over the inner property.
    pub completeness: Option<QualityExtreme>,
    /// Highest acceptance over words far from the outer property.
    pub soundness: Option<QualityExtreme>,
    pub far_words: usize,
    pub method: QualityMethod,
}

/// Completeness and soundness extremes of a formula or sampler.
pub fn evaluate_test_quality(
    subject: &Subject,
    pair: &PartialPropertyPair,
    epsilon: &Ratio,
    method: QualityMethod,
    caps: &Caps,
) -> Result<QualityReport, EvalError> {
    let alphabet = pair.alphabet();
    let accept = |w: &Word| -> Result<(f64, Option<Ratio>), EvalError> {
        match (subject, method) {
            (Subject::Formula(p), _) => {
                let s = p.satisfaction(w)?;
                Ok((ratio::to_f64(&s), Some(s)))
            }
            (Subject::Sampler(t), QualityMethod::Exact) => {
                let s = exact_sampler_acceptance(t, w, caps)?;
                Ok((ratio::to_f64(&s), Some(s)))
            }
            (Subject::Sampler(t), QualityMethod::MonteCarlo { trials, seed }) => {
                Ok((monte_carlo_acceptance(t, w, trials, seed, caps.sigma)?.estimate, None))
            }
        }
    };
    let extreme = |words: &mut dyn Iterator<Item = &Word>, lowest: bool| -> Result<Option<QualityExtreme>, EvalError> {
        let mut best: Option<QualityExtreme> = None;
        for w in words {
            let (value, exact) = accept(w)?;
            let better = match &best {
                None => true,
                Some(b) => match (&exact, &b.exact) {
                    (Some(x), Some(y)) => if lowest { x < y } else { x > y },
                    _ => if lowest { value < b.value } else { value > b.value },
                },
            };
            if better {
                best = Some(QualityExtreme {
                    value,
                    exact,
                    word: alphabet.render(w),
                });
            }
        }
        Ok(best)
    };
    let far = pair.far_words(epsilon, caps.enumeration)?;
    let completeness = extreme(&mut pair.inner.members().iter(), true)?;
    let soundness = extreme(&mut far.iter(), false)?;
    Ok(QualityReport {
        completeness,
        soundness,
        far_words: far.len(),
        method,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio::{frac, int};
    use crate::word::{Alphabet, IndexSet, Property};

    fn zeros(n: usize) -> Property {
        Property::new(n, Alphabet::binary(), vec![Word::constant(n, 0)]).unwrap()
    }

    #[test]
    fn closed_form_one_sided() {
        let t = SampleTester::one_sided(zeros(10), frac(1, 2)).unwrap();
        let w = Word::from_letters(vec![1, 0, 1, 0, 1, 0, 1, 0, 1, 0]);
        assert_eq!(exact_sampler_acceptance(&t, &w, &Caps::default()).unwrap(), frac(1, 32));
        assert_eq!(exact_sampler_acceptance(&t, &Word::constant(10, 0), &Caps::default()).unwrap(), int(1));
    }

    #[test]
    fn mask_path_matches_generic_decider() {
        // a property with two members; compare the mask shortcut with the decider
        let l = Property::new(
            6,
            Alphabet::binary(),
            vec![Word::from_letters(vec![0, 0, 1, 1, 0, 0]), Word::from_letters(vec![1, 0, 1, 0, 0, 1])],
        )
        .unwrap();
        let t = SampleTester::one_sided(l.clone(), frac(1, 3)).unwrap();
        let w = Word::from_letters(vec![1, 1, 1, 1, 0, 0]);
        let d = t.decider(&w, 16).unwrap();
        let masks = disagreement_masks(&l, &w);
        for mask in 0u64..64 {
            let u: IndexSet = (0..6).filter(|&i| mask >> i & 1 == 1).collect();
            assert_eq!(d.accepts(&u), masks.iter().any(|&m| mask & m == 0));
        }
    }

    #[test]
    fn cap_is_enforced() {
        let t = SampleTester::one_sided(zeros(10), frac(1, 2)).unwrap();
        let caps = Caps {
            exact_one_sided_n: 8,
            ..Caps::default()
        };
        assert!(matches!(
            exact_sampler_acceptance(&t, &Word::constant(10, 0), &caps),
            Err(EvalError::ExactCap { .. })
        ));
    }

    #[test]
    fn monte_carlo_is_deterministic_and_close() {
        let t = SampleTester::one_sided(zeros(10), frac(1, 2)).unwrap();
        let w = Word::from_letters(vec![1, 1, 1, 0, 0, 0, 0, 0, 0, 0]);
        let a = monte_carlo_acceptance(&t, &w, 20_000, 3, 16).unwrap();
        assert_eq!(a, monte_carlo_acceptance(&t, &w, 20_000, 3, 16).unwrap());
        let se = (0.125f64 * 0.875 / 20_000.0).sqrt();
        assert!((a.estimate - 0.125).abs() < 3.0 * se);
        let full = SampleTester::one_sided(zeros(10), int(1)).unwrap();
        let r = monte_carlo_acceptance(&full, &w, 100, 0, 16).unwrap();
        assert_eq!((r.estimate, r.half_width), (0.0, Some(0.0)));
    }

    #[test]
    fn quality_of_one_sided_sampler() {
        let l = zeros(6);
        let t = SampleTester::one_sided(l.clone(), frac(1, 2)).unwrap();
        let pair = PartialPropertyPair::full(l);
        let r = evaluate_test_quality(&Subject::Sampler(&t), &pair, &frac(1, 2), QualityMethod::Exact, &Caps::default())
            .unwrap();
        assert_eq!(r.completeness.unwrap().exact, Some(int(1)));
        // far words have at least 4 ones; the best case for acceptance has exactly 4
        assert_eq!(r.soundness.unwrap().exact, Some(frac(1, 16)));
    }
}
