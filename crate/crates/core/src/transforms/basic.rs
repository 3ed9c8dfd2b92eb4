use num_bigint::BigInt;
use num_traits::{One, Signed};

use super::TransformError;
use crate::formula::{condition, Constraint, ProbFormula};
use crate::ratio::{self, Ratio};

/// Rounds every table value to 0 below 1/2 and to 1 otherwise.
pub fn make_zero_one(p: &ProbFormula) -> ProbFormula {
    let half = ratio::half();
    let constraints = p
        .constraints()
        .iter()
        .map(|c| {
            Constraint::new(
                c.query.clone(),
                c.table
                    .iter()
                    .map(|v| if *v < half { ratio::zero() } else { ratio::one() })
                    .collect(),
            )
        })
        .collect();
    p.with_constraints(constraints)
        .expect("rounding keeps a valid formula valid")
}

/// `2^{-k}` for the largest integer `k` with `2^{-k} ≥ mu`; `mu` in `(0, 1]`.
pub(crate) fn dyadic_ceiling(mu: &Ratio) -> Ratio {
    // largest k with num·2^k ≤ den
    let num = mu.numer();
    let den = mu.denom();
    let mut k = den.bits().saturating_sub(num.bits());
    while k > 0 && (num << k) > *den {
        k -= 1;
    }
    while (num << (k + 1)) <= *den {
        k += 1;
    }
    Ratio::new(BigInt::one(), BigInt::one() << k)
}

/// Rounds each positive weight up to `m·2^{-k}`, where `m` is the largest
/// weight, and renormalizes.
///
/// Anchoring the grid at `m` rather than at 1 keeps the number of distinct
/// values at `⌊log2 β⌋ + 1 ≤ log2(2β)`; a grid anchored at 1 can split
/// weights 0.45 and 0.55 into two values.
pub fn quantize(p: &ProbFormula) -> ProbFormula {
    let top = p.weights().iter().max().cloned().unwrap_or_else(ratio::one);
    let rounded: Vec<Ratio> = p
        .weights()
        .iter()
        .map(|w| {
            if w.is_positive() {
                dyadic_ceiling(&(w / &top)) * &top
            } else {
                ratio::zero()
            }
        })
        .collect();
    let total: Ratio = rounded.iter().sum();
    let weights = rounded.into_iter().map(|w| w / &total).collect();
    p.with_weights(weights)
        .expect("normalized weights sum to one")
}

#[derive(Debug, Clone)]
pub struct EquitableOutcome {
    pub formula: ProbFormula,
    /// Equitability of the input.
    pub beta: Ratio,
    /// Number of distinct weights after quantization.
    pub bands: usize,
    /// Quantized weight of the band conditioned on.
    pub band_weight: Ratio,
}

impl EquitableOutcome {
    /// Instance multiplier `2 / μ(band)`; at most `2·log2(2β)`.
    pub fn multiplier(&self) -> Ratio {
        ratio::int(2) / &self.band_weight
    }
}

/// Quantizes, then conditions on the heaviest weight band (ties go to the
/// band with the larger weight). The result is uniform over its support.
pub fn make_equitable(p: &ProbFormula) -> EquitableOutcome {
    let beta = p.equitability().expect("a formula has positive support");
    let qz = quantize(p);
    let mut bands: Vec<(Ratio, Vec<usize>)> = Vec::new();
    for i in qz.support() {
        let w = &qz.weights()[i];
        match bands.iter_mut().find(|(v, _)| v == w) {
            Some((_, members)) => members.push(i),
            None => bands.push((w.clone(), vec![i])),
        }
    }
    let count = bands.len();
    let (_, members) = bands
        .into_iter()
        .max_by(|(va, ma), (vb, mb)| {
            let wa = va * ratio::int(ma.len() as i64);
            let wb = vb * ratio::int(mb.len() as i64);
            wa.cmp(&wb).then(va.cmp(vb))
        })
        .expect("nonempty support");
    let band_weight = qz.weight_of(&members);
    let formula = if members.len() == p.len() {
        qz
    } else {
        condition(&qz, &members).expect("band has positive weight")
    };
    EquitableOutcome {
        formula,
        beta,
        bands: count,
        band_weight,
    }
}

#[derive(Debug, Clone)]
pub struct PruneOutcome {
    pub formula: ProbFormula,
    pub lower: Ratio,
    pub upper: Ratio,
    /// Weight kept before renormalization.
    pub kept: Ratio,
    pub dropped_light: Vec<usize>,
    pub dropped_heavy: Vec<usize>,
}

/// Drops constraints of weight at most `lower` or at least `upper` and
/// conditions on the rest.
///
/// The defaults `lower = 1/(4αn)` and `upper = 2q/(εn)` make the output
/// `8qα/ε`-equitable; a remainder lighter than 1/2 means the input was not a
/// test with the declared parameters.
pub fn prune_to_equitable_band(
    p: &ProbFormula,
    delta: &Ratio,
    lower: &Ratio,
    upper: &Ratio,
) -> Result<PruneOutcome, TransformError> {
    if *delta >= ratio::frac(1, 8) {
        return Err(TransformError::DeltaTooLarge(ratio::format(delta), "1/8".into()));
    }
    let mut keep = Vec::new();
    let mut dropped_light = Vec::new();
    let mut dropped_heavy = Vec::new();
    for (i, w) in p.weights().iter().enumerate() {
        if w <= lower {
            dropped_light.push(i);
        } else if w >= upper {
            dropped_heavy.push(i);
        } else {
            keep.push(i);
        }
    }
    if keep.is_empty() {
        return Err(TransformError::EmptyRemainder);
    }
    let kept = p.weight_of(&keep);
    if kept < ratio::half() {
        return Err(TransformError::RemainderTooLight(ratio::format(&kept)));
    }
    let formula = if keep.len() == p.len() {
        p.clone()
    } else {
        condition(p, &keep)?
    };
    Ok(PruneOutcome {
        formula,
        lower: lower.clone(),
        upper: upper.clone(),
        kept,
        dropped_light,
        dropped_heavy,
    })
}

/// Band edges `1/(4αn)` and `2q/(εn)`.
pub fn default_band(alpha: f64, n: usize, q: usize, epsilon: &Ratio) -> (Ratio, Ratio) {
    let lower = ratio::from_f64(1.0 / (4.0 * alpha * n as f64)).unwrap_or_else(ratio::zero);
    let upper = ratio::int(2 * q as i64) / (epsilon * ratio::int(n as i64));
    (lower, upper)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::Constraint;
    use crate::ratio::{frac, int};
    use crate::word::{Alphabet, IndexSet};

    fn singletons(weights: Vec<Ratio>, value: Ratio) -> ProbFormula {
        let cs = (0..weights.len())
            .map(|i| Constraint::constant(IndexSet::new(vec![i]), 2, value.clone()).unwrap())
            .collect();
        ProbFormula::new(weights.len(), Alphabet::binary(), cs, weights).unwrap()
    }

    #[test]
    fn zero_one_rounding() {
        let c = Constraint::new(IndexSet::new(vec![0]), vec![frac(49, 100), frac(1, 2)]);
        let p = ProbFormula::uniform(1, Alphabet::binary(), vec![c]).unwrap();
        let z = make_zero_one(&p);
        assert_eq!(z.constraints()[0].table, vec![int(0), int(1)]);
        assert_eq!(make_zero_one(&z), z);
    }

    #[test]
    fn dyadic_rounding() {
        assert_eq!(dyadic_ceiling(&frac(3, 10)), frac(1, 2));
        assert_eq!(dyadic_ceiling(&frac(7, 10)), int(1));
        assert_eq!(dyadic_ceiling(&frac(1, 4)), frac(1, 4));
        assert_eq!(dyadic_ceiling(&frac(1, 5)), frac(1, 4));
        assert_eq!(dyadic_ceiling(&int(1)), int(1));
        assert_eq!(dyadic_ceiling(&frac(1, 1024)), frac(1, 1024));
        assert_eq!(dyadic_ceiling(&frac(1, 1025)), frac(1, 1024));
    }

    #[test]
    fn quantize_examples() {
        let p = singletons(vec![frac(3, 10), frac(7, 10)], int(1));
        assert_eq!(quantize(&p).weights(), &[frac(1, 3), frac(2, 3)]);
        let d = singletons(vec![frac(1, 2), frac(1, 4), frac(1, 4)], int(1));
        assert_eq!(quantize(&d), d);
        let u = singletons(vec![frac(1, 3); 3], int(1));
        assert_eq!(quantize(&u), u);
        let q = quantize(&p);
        assert_eq!(quantize(&q), q);
        // within a factor 2 of the top weight: a single value
        let close = singletons(vec![frac(45, 100), frac(55, 100)], int(1));
        assert_eq!(quantize(&close).weights(), &[frac(1, 2), frac(1, 2)]);
        assert_eq!(make_equitable(&close).bands, 1);
    }

    #[test]
    fn equitable_examples() {
        let u = singletons(vec![frac(1, 3); 3], int(1));
        assert_eq!(make_equitable(&u).formula, u);
        let p = singletons(vec![frac(1, 3), frac(2, 3)], int(1));
        let e = make_equitable(&p);
        assert_eq!(e.formula.len(), 1);
        assert_eq!(e.formula.weights()[0], int(1));
        assert_eq!(e.formula.constraints()[0].query.as_slice(), &[1]);
        assert_eq!(e.bands, 2);
        // tie between bands of equal mass goes to the heavier weight
        let t = singletons(vec![frac(1, 4), frac(1, 4), frac(1, 2)], int(1));
        let e = make_equitable(&t);
        assert_eq!(e.formula.constraints()[0].query.as_slice(), &[2]);
    }

    #[test]
    fn prune_examples() {
        let p = singletons(vec![frac(1, 4); 4], int(1));
        let out = prune_to_equitable_band(&p, &frac(1, 10), &frac(1, 100), &int(1)).unwrap();
        assert_eq!(out.formula, p);
        let p = singletons(vec![frac(1, 16), frac(5, 16), frac(5, 16), frac(5, 16)], int(1));
        let out = prune_to_equitable_band(&p, &frac(1, 10), &frac(1, 16), &int(1)).unwrap();
        assert_eq!(out.dropped_light, vec![0]);
        assert_eq!(out.formula.len(), 3);
        assert!(prune_to_equitable_band(&p, &frac(1, 8), &frac(1, 16), &int(1)).is_err());
        assert!(matches!(
            prune_to_equitable_band(&p, &frac(1, 10), &frac(1, 2), &frac(1, 100)),
            Err(TransformError::EmptyRemainder)
        ));
        let h = singletons(vec![frac(1, 8), frac(1, 8), frac(3, 4)], int(1));
        assert!(matches!(
            prune_to_equitable_band(&h, &frac(1, 10), &frac(1, 100), &frac(3, 4)),
            Err(TransformError::RemainderTooLight(_))
        ));
    }
}
