use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::ratio;
use crate::sampler::draw_sample;
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TailBound {
    /// `P(X ≥ (1+γ)pm) ≤ exp(−γ²pm/3)`.
    ChernoffUpper { gamma: f64, p: f64, m: f64 },
    /// `P(X ≤ (1−γ)pm) ≤ exp(−γ²pm/2)`.
    ChernoffLower { gamma: f64, p: f64, m: f64 },
    /// `P(|X̄ − E X̄| ≥ t) ≤ 2exp(−2mt²)`.
    Hoeffding { m: f64, t: f64 },
}

pub fn tail_bound(kind: TailBound) -> Result<f64, EvalError> {
    let range = |msg: &str| Err(EvalError::Range(msg.to_string()));
    match kind {
        TailBound::ChernoffUpper { gamma, p, m } | TailBound::ChernoffLower { gamma, p, m } => {
            if !(gamma > 0.0 && gamma <= 1.0) {
                return range("gamma must lie in (0,1]");
            }
            if !(0.0..=1.0).contains(&p) || m < 0.0 {
                return range("need p in [0,1] and m ≥ 0");
            }
            let d = if matches!(kind, TailBound::ChernoffUpper { .. }) { 3.0 } else { 2.0 };
            Ok((-gamma * gamma * p * m / d).exp())
        }
        TailBound::Hoeffding { m, t } => {
            if t < 0.0 || m < 0.0 {
                return range("need t ≥ 0 and m ≥ 0");
            }
            Ok(2.0 * (-2.0 * m * t * t).exp())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationReport {
    pub m: usize,
    pub p: f64,
    pub c: f64,
    pub eta: f64,
    pub mean: f64,
    pub trials: usize,
    pub seed: u64,
    pub failures: usize,
    pub rate: f64,
    /// `e^{−c} + 3·√(e^{−c}/trials)`.
    pub allowed: f64,
    pub pass: bool,
}

/// Empirical check of the large-deviation bound for averages over a
/// `μ_p`-sample of `gammas`.
///
/// Refuses to run when `p < 10c/(η²m)` or `c ≤ 1`, where the bound does not
/// apply.
pub fn check_deviation_bound(
    gammas: &[f64],
    p: f64,
    c: f64,
    eta: f64,
    trials: usize,
    master_seed: u64,
) -> Result<DeviationReport, EvalError> {
    let m = gammas.len();
    if m == 0 || trials == 0 {
        return Err(EvalError::Range("need at least one value and one trial".into()));
    }
    if gammas.iter().any(|g| !(0.0..=1.0).contains(g)) || !(0.0..=1.0).contains(&p) || eta <= 0.0 {
        return Err(EvalError::Range("values and p must lie in [0,1], η > 0".into()));
    }
    if c <= 1.0 {
        return Err(EvalError::Precondition(format!("c = {c} must exceed 1")));
    }
    let need = 10.0 * c / (eta * eta * m as f64);
    if p < need {
        return Err(EvalError::Precondition(format!("p = {p} < 10c/(η²m) = {need}")));
    }
    let mean = gammas.iter().sum::<f64>() / m as f64;
    let pr = ratio::from_f64(p).expect("finite rate");
    let failures = (0..trials)
        .into_par_iter()
        .filter(|&t| {
            let u = draw_sample(&pr, m, seed::derive_seed(master_seed, "dev", t as u64)).indices;
            let avg = if u.is_empty() {
                0.5
            } else {
                u.iter().map(|i| gammas[i]).sum::<f64>() / u.len() as f64
            };
            (avg - mean).abs() > eta
        })
        .count();
    let rate = failures as f64 / trials as f64;
    let e = (-c).exp();
    let allowed = e + 3.0 * (e / trials as f64).sqrt();
    Ok(DeviationReport {
        m,
        p,
        c,
        eta,
        mean,
        trials,
        seed: master_seed,
        failures,
        rate,
        allowed,
        pass: rate <= allowed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formulas() {
        let h = tail_bound(TailBound::Hoeffding { m: 100.0, t: 0.1 }).unwrap();
        assert!((h - 2.0 * (-2f64).exp()).abs() < 1e-12);
        assert!((h - 0.2707).abs() < 1e-4);
        let tiny = tail_bound(TailBound::ChernoffUpper { gamma: 1e-9, p: 0.5, m: 100.0 }).unwrap();
        assert!((tiny - 1.0).abs() < 1e-12);
        let lo = tail_bound(TailBound::ChernoffLower { gamma: 0.5, p: 0.5, m: 24.0 }).unwrap();
        assert!((lo - (-1.5f64).exp()).abs() < 1e-12);
        assert!(tail_bound(TailBound::ChernoffUpper { gamma: 0.0, p: 0.5, m: 1.0 }).is_err());
        assert!(tail_bound(TailBound::Hoeffding { m: 1.0, t: -0.1 }).is_err());
        let mut last = f64::INFINITY;
        for m in [1.0, 10.0, 100.0] {
            let b = tail_bound(TailBound::ChernoffUpper { gamma: 0.3, p: 0.2, m }).unwrap();
            assert!(b < last);
            last = b;
        }
    }

    #[test]
    fn constant_and_full_rate_never_fail() {
        let g = vec![0.3; 1000];
        let r = check_deviation_bound(&g, 0.5, 2.0, 0.2, 500, 1).unwrap();
        assert_eq!(r.failures, 0);
        let alt: Vec<f64> = (0..1000).map(|i| (i % 2) as f64).collect();
        let r = check_deviation_bound(&alt, 1.0, 2.0, 0.2, 50, 1).unwrap();
        assert_eq!(r.failures, 0);
        assert!(r.pass);
    }

    #[test]
    fn precondition_gate() {
        let g = vec![0.5; 100];
        // 10·2/(0.04·100) = 5 > 1
        assert!(matches!(
            check_deviation_bound(&g, 1.0, 2.0, 0.2, 10, 0),
            Err(EvalError::Precondition(_))
        ));
        assert!(matches!(
            check_deviation_bound(&g, 1.0, 1.0, 0.9, 10, 0),
            Err(EvalError::Precondition(_))
        ));
    }

    #[test]
    fn reproducible() {
        let alt: Vec<f64> = (0..1000).map(|i| (i % 2) as f64).collect();
        let a = check_deviation_bound(&alt, 0.5, 2.0, 0.2, 200, 9).unwrap();
        assert_eq!(a, check_deviation_bound(&alt, 0.5, 2.0, 0.2, 200, 9).unwrap());
    }
}
