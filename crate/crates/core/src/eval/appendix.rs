//! Numeric evaluation of the two chained inequalities behind the sampling
//! rates, in log space so that astronomically large `n` stay representable.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Calc {
    /// Missing every member of an `i`-pompom of witnesses (1-sided rate).
    Withi,
    /// The deviation bound at the 2-sided rate.
    Devuse,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub calc: Calc,
    pub alphabet: usize,
    pub q: usize,
    pub epsilon: f64,
    pub i: usize,
    pub log2_n: f64,
}

/// One inequality `lhs ≤ rhs` (or `<` when strict), natural-log scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub strict: bool,
    pub holds: bool,
}

impl Link {
    fn new(name: &str, lhs: f64, rhs: f64, strict: bool) -> Self {
        let holds = if strict { lhs < rhs } else { lhs <= rhs };
        Link {
            name: name.to_string(),
            lhs,
            rhs,
            strict,
            holds,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowStatus {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalcRow {
    pub point: GridPoint,
    pub status: RowStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub links: Vec<Link>,
    /// Smallest `rhs − lhs` over the links.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slack: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppendixReport {
    pub rows: Vec<CalcRow>,
    pub evaluated: BTreeMap<String, usize>,
    pub violations: usize,
    pub skipped: usize,
    /// Slack never decreases as `n` grows with the other parameters fixed.
    pub monotone: bool,
    pub non_monotone: Vec<String>,
}

impl AppendixReport {
    pub fn pass(&self) -> bool {
        self.violations == 0 && self.monotone
    }
}

fn threshold_base(calc: Calc, k: usize, q: usize, eps: f64) -> f64 {
    let (qf, lk) = (q as f64, (k as f64).log2());
    match calc {
        Calc::Withi => 24.0 * qf * (qf + 1.0).powi(2) * lk * lk / eps,
        Calc::Devuse => 24.0 * qf.powi(10) * lk * lk / eps,
    }
}

/// `log2` of the bound `n` must exceed: `q·log2(24q(q+1)²log²|Ξ|/ε)` or
/// `q·log2(24q¹⁰log²|Ξ|/ε)`.
pub fn threshold_log2(calc: Calc, alphabet: usize, q: usize, epsilon: f64) -> f64 {
    q as f64 * threshold_base(calc, alphabet, q, epsilon).log2()
}

fn withi_links(k: usize, q: usize, eps: f64, i: usize, ln_n: f64) -> Vec<Link> {
    let (qf, fi) = (q as f64, i as f64);
    let (ln_k, lk) = ((k as f64).ln(), (k as f64).log2());
    let alpha = 15.0 * ln_k * qf * (qf + 1.0).powi(2) / eps;
    // x = α^i·n^{−i/q²}, E = ε·n^{1−(i−1)/q}/(3i)
    let ln_x = fi * alpha.ln() - fi / (qf * qf) * ln_n;
    let ln_e = (eps / (3.0 * fi)).ln() + (1.0 - (fi - 1.0) / qf) * ln_n;
    let x = ln_x.exp();
    let big_e = ln_e.exp();
    let a = -(ln_x + ln_e).exp();
    let start = if x >= 1.0 { f64::NEG_INFINITY } else { big_e * (-x).ln_1p() };
    let mut links = vec![Link::new("one_minus_x", start, a, false)];
    let exponent = if i >= 2 { 1.0 - (fi - 1.0) / qf - fi / (qf * qf) } else { 1.0 - 1.0 / qf };
    let b = -ln_k * 5.0 * qf * (qf + 1.0).powi(2) * lk * (exponent * ln_n).exp();
    let c = 0.5f64.ln() - 4.0 * qf * (qf + 1.0).powi(2) * lk * ((1.0 - fi / qf) * ln_n).exp() * ln_k;
    if i == 1 {
        links.push(Link::new(
            "n_bound",
            lk.ln() + (1.0 - 1.0 / qf) * ln_n,
            (1.0 - 1.0 / (qf * qf)) * ln_n,
            true,
        ));
    }
    links.push(Link::new("first", a, b, true));
    links.push(Link::new("second", b, c, true));
    links
}

fn devuse_links(k: usize, q: usize, eps: f64, i: usize, ln_n: f64) -> Vec<Link> {
    let (qf, fi) = (q as f64, i as f64);
    let (ln_k, lk) = ((k as f64).ln(), (k as f64).log2());
    let alpha = 1e3 * ln_k * qf.powi(4) / eps;
    let e = 1.0 - (fi - 1.0) / qf - fi / (qf * qf);
    let lead = |scale: f64| -(scale.ln() + fi * alpha.ln() + eps.ln() + e * ln_n - (3.0 * fi).ln()).exp();
    let l = lead(1e3);
    let l_lemma = lead(1e-3);
    let tail = |loglog: f64| 0.01f64.ln() - qf.powi(10) * lk * loglog * loglog * ((1.0 - fi / qf) * ln_n).exp() * ln_k;
    let r = tail((k as f64 / eps).log2().log2());
    let r_alt = tail((lk / eps).log2());
    let mut links = Vec::new();
    if i >= 3 {
        let m = -ln_k.powi(3) * qf.powi(12) * eps.powi(-2) * (e * ln_n).exp() / (3.0 * qf);
        links.push(Link::new("first", l, m, false));
        links.push(Link::new("second", m, r, false));
    } else {
        let ln_t = threshold_base(Calc::Devuse, k, q, eps).ln();
        links.push(Link::new(
            "n_power",
            (1.0 - fi / qf) * ln_t,
            (1.0 / qf - fi / (qf * qf)) * ln_n,
            true,
        ));
        let need = if i == 1 {
            (8.0 * qf.powi(6) * lk.powf(4.0 / 3.0) / eps.powf(2.0 / 3.0)).ln()
        } else {
            (2.0 * qf.powi(3) * lk.powf(1.0 / 3.0)).ln()
        };
        links.push(Link::new("t_power", need, (1.0 - fi / qf) * ln_t, false));
    }
    links.push(Link::new("chain", l, r, false));
    links.push(Link::new("lemma_scale", l_lemma, r, false));
    links.push(Link::new("alt_reading", l, r_alt, false));
    links
}

fn evaluate(pt: &GridPoint) -> CalcRow {
    let skip = |note: String| CalcRow {
        point: *pt,
        status: RowStatus::Skipped,
        note: Some(note),
        links: Vec::new(),
        slack: None,
    };
    let min_q = if pt.calc == Calc::Devuse { 3 } else { 1 };
    if pt.q < min_q || pt.alphabet < 2 || !(pt.epsilon > 0.0 && pt.epsilon <= 1.0) || pt.i == 0 || pt.i > pt.q {
        return skip("parameters outside the calculation's hypotheses".into());
    }
    let t = threshold_log2(pt.calc, pt.alphabet, pt.q, pt.epsilon);
    if pt.log2_n <= t {
        return skip(format!("log2 n = {} is not above the threshold {t}", pt.log2_n));
    }
    let ln_n = pt.log2_n * std::f64::consts::LN_2;
    let links = match pt.calc {
        Calc::Withi => withi_links(pt.alphabet, pt.q, pt.epsilon, pt.i, ln_n),
        Calc::Devuse => devuse_links(pt.alphabet, pt.q, pt.epsilon, pt.i, ln_n),
    };
    let slack = links.iter().map(|l| l.rhs - l.lhs).fold(f64::INFINITY, f64::min);
    CalcRow {
        point: *pt,
        status: if links.iter().all(|l| l.holds) { RowStatus::Pass } else { RowStatus::Fail },
        note: None,
        links,
        slack: Some(slack),
    }
}

/// Evaluates every link at every grid point and checks that slack grows
/// with `n`.
pub fn verify_appendix_calculations(grid: &[GridPoint]) -> AppendixReport {
    let rows: Vec<CalcRow> = grid.iter().map(evaluate).collect();
    let mut evaluated = BTreeMap::new();
    let mut violations = 0;
    let mut skipped = 0;
    let mut sweeps: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for r in &rows {
        let p = &r.point;
        match r.status {
            RowStatus::Skipped => skipped += 1,
            s => {
                *evaluated.entry(format!("{:?}", p.calc).to_lowercase()).or_insert(0) += 1;
                if s == RowStatus::Fail {
                    violations += r.links.iter().filter(|l| !l.holds).count();
                }
                let key = format!("{:?} |Ξ|={} q={} ε={} i={}", p.calc, p.alphabet, p.q, p.epsilon, p.i);
                sweeps.entry(key).or_default().push((p.log2_n, r.slack.unwrap_or(f64::NAN)));
            }
        }
    }
    let mut non_monotone = Vec::new();
    for (key, mut pts) in sweeps {
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        for w in pts.windows(2) {
            let tol = 1e-9 * w[0].1.abs().max(1.0);
            if !(w[1].1 >= w[0].1 - tol) {
                non_monotone.push(format!("{key}: slack {} at log2 n = {} after {} at {}", w[1].1, w[1].0, w[0].1, w[0].0));
            }
        }
    }
    AppendixReport {
        rows,
        evaluated,
        violations,
        skipped,
        monotone: non_monotone.is_empty(),
        non_monotone,
    }
}

/// The standard sweep: for each calculation, alphabets, `q`, `ε` and `i`, at
/// `n` equal to the threshold times `1 + 10⁻⁶, 2, 10, 10³, 10⁶`.
pub fn default_appendix_grid() -> Vec<GridPoint> {
    let eps = [1.0, 0.5, 0.25, 0.1];
    let mult = [1.0 + 1e-6, 2.0, 10.0, 1e3, 1e6];
    let mut out = Vec::new();
    let mut sweep = |calc: Calc, alphabets: &[usize], qs: &[usize]| {
        for &k in alphabets {
            for &q in qs {
                for &e in &eps {
                    let t = threshold_log2(calc, k, q, e);
                    for i in 1..=q {
                        for &m in &mult {
                            out.push(GridPoint {
                                calc,
                                alphabet: k,
                                q,
                                epsilon: e,
                                i,
                                log2_n: t + f64::log2(m),
                            });
                        }
                    }
                }
            }
        }
    };
    sweep(Calc::Withi, &[2, 3, 4], &[2, 3, 4]);
    sweep(Calc::Devuse, &[2, 3], &[3, 4, 5]);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point(calc: Calc, k: usize, q: usize, eps: f64, i: usize, above: f64) -> GridPoint {
        GridPoint {
            calc,
            alphabet: k,
            q,
            epsilon: eps,
            i,
            log2_n: threshold_log2(calc, k, q, eps) + above,
        }
    }

    #[test]
    fn just_above_threshold_holds() {
        let r = verify_appendix_calculations(&[point(Calc::Withi, 2, 2, 0.5, 1, 1e-6)]);
        assert_eq!(r.rows[0].status, RowStatus::Pass, "{:?}", r.rows[0].links);
        // threshold (24·2·9/(1/2))² = 864²
        assert!((threshold_log2(Calc::Withi, 2, 2, 0.5) - 2.0 * 864f64.log2()).abs() < 1e-12);
    }

    #[test]
    fn below_threshold_is_skipped() {
        let r = verify_appendix_calculations(&[point(Calc::Withi, 2, 2, 0.5, 1, -1.0)]);
        assert_eq!(r.rows[0].status, RowStatus::Skipped);
        assert_eq!(r.skipped, 1);
        let r = verify_appendix_calculations(&[point(Calc::Devuse, 2, 2, 0.5, 1, 1.0)]);
        assert_eq!(r.rows[0].status, RowStatus::Skipped);
    }

    #[test]
    fn q_one_breaks_the_first_step() {
        // n^{1−1/q²} > log|Ξ|·n^{1−1/q} reads 1 > log|Ξ| when q = 1
        let r = verify_appendix_calculations(&[point(Calc::Withi, 4, 1, 1.0, 1, 5.0)]);
        assert_eq!(r.rows[0].status, RowStatus::Fail);
    }

    #[test]
    fn devuse_middle_link_at_alphabet_four() {
        let r = verify_appendix_calculations(&[point(Calc::Devuse, 4, 3, 1.0, 3, 1.0)]);
        let second = r.rows[0].links.iter().find(|l| l.name == "second").unwrap();
        assert!(!second.holds);
        assert!(r.rows[0].links.iter().find(|l| l.name == "chain").unwrap().holds);
    }

    #[test]
    fn default_grid_passes() {
        let g = default_appendix_grid();
        let r = verify_appendix_calculations(&g);
        assert!(r.evaluated["withi"] >= 100 && r.evaluated["devuse"] >= 100);
        assert_eq!(r.skipped, 0);
        assert_eq!(r.violations, 0);
        assert!(r.monotone, "{:?}", r.non_monotone);
    }
}
