use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use pompom_core::config::checked_count;
use pompom_core::eval::{
    check_deviation_bound, default_appendix_grid, evaluate_test_quality, exact_sampler_acceptance,
    monte_carlo_acceptance, render_table, verify_appendix_calculations, EvalReport, GridPoint, QualityMethod,
    RowStatus, Subject,
};
use pompom_core::formula::FormulaFile;
use pompom_core::multitest::{run_multitest, MultiTestPlan};
use pompom_core::ratio::{self, Ratio};
use pompom_core::sampler::{compute_sampling_rate, synthesize_two_sided_sampler, SampleTester};
use pompom_core::structures::{
    build_scm, default_eta, extract_discerning_pompoms, extract_revealing_pompoms, find_constellation,
    verify_constellation, Constellation, ScmDecomposition, StructureError,
};
use pompom_core::transforms::{
    combinatorialize, default_band, default_samples, effective_one_sided, effective_two_sided, make_equitable,
    make_zero_one, prune_to_equitable_band, quantize, reduce_support_linear, Verification,
};
use pompom_core::{
    condition, is_valid_test, merge_duplicate_queries, seed, Alphabet, Caps, Overrides, PartialPropertyPair,
    ProbFormula, Property, Sided, TestDeclaration, Word,
};
use rand::Rng;
use serde_json::{json, Value};

use crate::artifact::Context;
use crate::error::CliError;
use crate::{
    Command, Declaration, EvalCmd, FormulaCmd, GenKind, PropertyCmd, QualityMethodArg, RunCmd, Side, Stage,
    StructureCmd, SynthesizeCmd, TransformCmd,
};

pub struct Env {
    pub input: Option<PathBuf>,
    pub seed: u64,
    pub overrides: Overrides,
    pub caps: Caps,
    pub trials: usize,
}

impl Env {
    fn input(&self) -> Result<&Path, CliError> {
        self.input
            .as_deref()
            .ok_or_else(|| CliError::Usage("this command needs --input".into()))
    }
}

fn need<T: Clone>(v: &Option<T>, flag: &str) -> Result<T, CliError> {
    v.clone().ok_or_else(|| CliError::Usage(format!("missing --{flag}")))
}

fn fr(r: &Ratio) -> String {
    ratio::format(r)
}

fn pair_of(decl: &Declaration, ctx: &mut Context) -> Result<PartialPropertyPair, CliError> {
    let outer_path = decl
        .outer
        .as_deref()
        .or(decl.inner.as_deref())
        .ok_or_else(|| CliError::Usage("missing --outer".into()))?;
    let outer: Property = ctx.read(outer_path)?;
    match &decl.inner {
        Some(p) if decl.outer.is_some() => {
            let inner: Property = ctx.read(p)?;
            Ok(PartialPropertyPair::new(inner, outer)?)
        }
        _ => Ok(PartialPropertyPair::full(outer)),
    }
}

fn parse_word(alphabet: &Alphabet, s: &str) -> Result<Word, CliError> {
    Ok(alphabet.parse_word(s)?)
}

fn thresholds(ov: &Overrides) -> Result<Option<Vec<u64>>, CliError> {
    match ov.raw("scm.thresholds") {
        None => Ok(None),
        Some(v) => v
            .split(',')
            .map(|t| t.trim().parse::<u64>())
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
            .map_err(|_| StructureError::Threshold(v.to_string()).into()),
    }
}

fn scm_of(p: &ProbFormula, ov: &Overrides) -> Result<ScmDecomposition, CliError> {
    let q = p
        .uniform_query_size()
        .ok_or_else(|| CliError::Validation("query sets are not all of one size".into()))?;
    Ok(build_scm(&p.support_sets(), p.n(), q, thresholds(ov)?)?)
}

fn constellation_of(p: &ProbFormula, ov: &Overrides, ctx: &Context) -> Result<Constellation, CliError> {
    let scm = scm_of(p, ov)?;
    match find_constellation(&scm, p, ov.ratio("constellation.eta")?) {
        Ok(c) => Ok(c),
        Err(nc) => {
            ctx.write("no_constellation", &nc)?;
            Err(nc.into())
        }
    }
}

pub fn dispatch(cmd: &Command, env: &Env, ctx: &mut Context) -> Result<(), CliError> {
    match cmd {
        Command::Property(c) => property(c, env, ctx),
        Command::Formula(c) => formula(c, env, ctx),
        Command::Transform(c) => transform(c, env, ctx),
        Command::Structure(c) => structure(c, env, ctx),
        Command::Synthesize(c) => synthesize(c, env, ctx),
        Command::Run(c) => run(c, env, ctx),
        Command::Eval(c) => eval(c, env, ctx),
    }
}

fn property(cmd: &PropertyCmd, env: &Env, ctx: &mut Context) -> Result<(), CliError> {
    match cmd {
        PropertyCmd::Gen {
            n,
            alphabet,
            kind,
            members,
            width,
            block,
        } => {
            let a = Alphabet::from_str_symbols(alphabet)?;
            let k = a.size();
            ctx.param("n", n);
            ctx.param("kind", format!("{kind:?}").to_lowercase());
            let l = match kind {
                GenKind::Zeros => Property::new(*n, a, vec![Word::constant(*n, 0)])?,
                GenKind::All => Property::everything(*n, a, env.caps.enumeration)?,
                GenKind::Even => Property::from_predicate(*n, a, env.caps.enumeration, |w| {
                    w.letters().iter().map(|&x| x as usize).sum::<usize>() % k == 0
                })?,
                GenKind::Block => {
                    ctx.param("width", width);
                    ctx.param("block", block);
                    let end = (block + 1) * width;
                    if k < 2 || end > *n {
                        return Err(CliError::Usage(format!("block {block} of width {width} does not fit in {n}")));
                    }
                    let mut v = vec![0u8; *n];
                    v[block * width..end].iter_mut().for_each(|x| *x = 1);
                    Property::new(*n, a, vec![Word::from_letters(v)])?
                }
                GenKind::Random => {
                    ctx.param("members", members);
                    if checked_count(k, *n, *members as u64).is_some_and(|c| c < *members as u64) {
                        return Err(CliError::Usage(format!("only {k}^{n} words exist")));
                    }
                    let mut rng = seed::stream_rng(env.seed, "property", 0);
                    let mut set = BTreeSet::new();
                    while set.len() < *members {
                        set.insert(Word::from_letters((0..*n).map(|_| rng.random_range(0..k as u8)).collect()));
                    }
                    Property::new(*n, a, set.into_iter().collect::<Vec<_>>())?
                }
            };
            ctx.write("property", &l)
        }
        PropertyCmd::Validate { outer } => {
            let l: Property = ctx.read(env.input()?)?;
            let mut report = json!({
                "n": l.n(),
                "alphabet_size": l.alphabet().size(),
                "members": l.len(),
            });
            if let Some(o) = outer {
                let outer: Property = ctx.read(o)?;
                let nested = PartialPropertyPair::new(l, outer).is_ok();
                report["nested"] = json!(nested);
                ctx.write("property_report", &report)?;
                if !nested {
                    return Err(CliError::Validation("inner property is not contained in the outer one".into()));
                }
                return Ok(());
            }
            ctx.write("property_report", &report)
        }
    }
}

fn formula(cmd: &FormulaCmd, env: &Env, ctx: &mut Context) -> Result<(), CliError> {
    match cmd {
        FormulaCmd::Validate { combinatorial, decl } => {
            let p: ProbFormula = ctx.read(env.input()?)?;
            let mut report = json!({
                "n": p.n(),
                "alphabet_size": p.alphabet_size(),
                "constraints": p.len(),
                "support_size": p.support_size(),
                "max_query_size": p.max_query_size(),
                "uniform_query_size": p.uniform_query_size(),
                "zero_one": p.is_zero_one(),
                "uniform": p.is_uniform(),
                "combinatorial": p.is_combinatorial(),
                "equitability": p.equitability().map(|b| fr(&b)),
                "fingerprint": p.fingerprint(),
            });
            let mut failures = Vec::new();
            if *combinatorial && !p.is_combinatorial() {
                failures.push("formula is not combinatorial".to_string());
            }
            if decl.outer.is_some() || decl.inner.is_some() {
                let pair = pair_of(decl, ctx)?;
                let eps = need(&decl.epsilon, "epsilon")?;
                let delta = need(&decl.delta, "delta")?;
                let q = decl.q.unwrap_or(p.max_query_size());
                let sided = match decl.sided {
                    Side::One => Sided::One,
                    Side::Two => Sided::Two,
                };
                ctx.param("epsilon", fr(&eps));
                ctx.param("delta", fr(&delta));
                ctx.param("q", q);
                let d = TestDeclaration::new(pair, eps, delta, q, sided)?;
                let v = is_valid_test(&p, &d, env.caps.enumeration)?;
                let render = |e: &Option<pompom_core::formula::Extreme>| {
                    e.as_ref()
                        .map(|e| json!({"value": fr(&e.value), "word": p.alphabet().render(&e.word)}))
                };
                report["test"] = json!({
                    "valid": v.valid,
                    "min_inner": render(&v.min_inner),
                    "max_far": render(&v.max_far),
                    "query_sizes_ok": v.query_sizes_ok,
                });
                if !v.valid {
                    failures.push("formula is not a valid test for the declaration".into());
                }
            }
            report["failures"] = json!(failures);
            ctx.write("formula_report", &report)?;
            if failures.is_empty() {
                Ok(())
            } else {
                Err(CliError::Validation(failures.join("; ")))
            }
        }
        FormulaCmd::Canonize => {
            let f: FormulaFile = ctx.read(env.input()?)?;
            let one_sided = f.one_sided;
            let before = f.constraints.len();
            let (n, a, raw) = f.into_raw()?;
            let p = merge_duplicate_queries(n, a, raw)?.with_one_sided(one_sided);
            ctx.param("constraints_before", before);
            ctx.write("formula", &p)
        }
    }
}

fn transform(cmd: &TransformCmd, env: &Env, ctx: &mut Context) -> Result<(), CliError> {
    let p: ProbFormula = ctx.read(env.input()?)?;
    let ov = &env.overrides;
    let params = |decl: &Declaration, ctx: &mut Context, p: &ProbFormula| -> Result<(Ratio, Ratio, usize), CliError> {
        let eps = need(&decl.epsilon, "epsilon")?;
        let delta = need(&decl.delta, "delta")?;
        let q = decl.q.unwrap_or(p.max_query_size());
        ctx.param("epsilon", fr(&eps));
        ctx.param("delta", fr(&delta));
        ctx.param("q", q);
        Ok((eps, delta, q))
    };
    match cmd {
        TransformCmd::Stage { stage, decl, subset } => {
            ctx.param("stage", format!("{stage:?}").to_lowercase());
            match stage {
                Stage::ZeroOne => ctx.write("stage", json!({"formula": make_zero_one(&p), "multiplier": 2})),
                Stage::Quantize => ctx.write("stage", json!({"formula": quantize(&p), "multiplier": 2})),
                Stage::Equitable => {
                    let e = make_equitable(&p);
                    let bound = 2.0 * (2.0 * ratio::to_f64(&e.beta)).log2();
                    ctx.write(
                        "stage",
                        json!({
                            "formula": e.formula,
                            "beta": fr(&e.beta),
                            "bands": e.bands,
                            "band_weight": fr(&e.band_weight),
                            "multiplier": fr(&e.multiplier()),
                            "bound": bound,
                        }),
                    )
                }
                Stage::Prune => {
                    let delta = need(&decl.delta, "delta")?;
                    ctx.param("delta", fr(&delta));
                    let (lower, upper) = match (ov.ratio("prune.lower")?, ov.ratio("prune.upper")?) {
                        (Some(l), Some(u)) => (l, u),
                        (l, u) => {
                            let eps = need(&decl.epsilon, "epsilon")?;
                            let q = decl.q.unwrap_or(p.max_query_size());
                            let d = ratio::to_f64(&delta);
                            let alpha = (p.alphabet_size() as f64).log2() / (d * d);
                            let (dl, du) = default_band(alpha, p.n(), q, &eps);
                            (l.unwrap_or(dl), u.unwrap_or(du))
                        }
                    };
                    let out = prune_to_equitable_band(&p, &delta, &lower, &upper)?;
                    ctx.write(
                        "stage",
                        json!({
                            "formula": out.formula,
                            "lower": fr(&out.lower),
                            "upper": fr(&out.upper),
                            "kept": fr(&out.kept),
                            "dropped_light": out.dropped_light,
                            "dropped_heavy": out.dropped_heavy,
                        }),
                    )
                }
                Stage::Linearize => {
                    let delta = need(&decl.delta, "delta")?;
                    ctx.param("delta", fr(&delta));
                    let samples = ov
                        .usize("linearize.samples")?
                        .unwrap_or_else(|| default_samples(&delta, p.alphabet_size(), p.n()));
                    let retries = ov.usize("linearize.retries")?.unwrap_or(16);
                    let out = reduce_support_linear(&p, &delta, samples, retries, env.seed, env.caps.enumeration)?;
                    ctx.write(
                        "stage",
                        json!({
                            "formula": out.formula,
                            "verification": out.verification,
                            "samples": out.samples,
                            "attempts": out.attempts,
                            "seed": out.seed,
                            "max_deviation": out.max_deviation.as_ref().map(fr),
                            "multiplier": 2,
                        }),
                    )?;
                    if out.verification == Verification::Failed {
                        return Err(CliError::Hypothesis(format!("no verified draw within {} attempts", out.attempts)));
                    }
                    Ok(())
                }
                Stage::Condition => {
                    if subset.is_empty() {
                        return Err(CliError::Usage("condition needs --subset".into()));
                    }
                    ctx.param("subset", subset);
                    let eta = p.weight_of(subset);
                    let c = condition(&p, subset)?;
                    ctx.write(
                        "stage",
                        json!({"formula": c, "eta": fr(&eta), "multiplier": fr(&(Ratio::from_integer(1.into()) / &eta))}),
                    )
                }
            }
        }
        TransformCmd::Combi { decl } => {
            let (eps, delta, q) = params(decl, ctx, &p)?;
            let out = combinatorialize(&p, &eps, &delta, q, env.seed, ov, &env.caps)?;
            ctx.write(
                "combi",
                json!({
                    "formula": out.formula,
                    "trace": out.trace,
                    "alpha": out.alpha,
                    "delta_prime": out.delta_prime,
                    "trivial": out.trivial,
                }),
            )
        }
        TransformCmd::Effective1 { decl } => {
            let pair = pair_of(decl, ctx)?;
            let (eps, delta, q) = params(decl, ctx, &p)?;
            let out = effective_one_sided(&p, &pair, &eps, &delta, q, env.seed, ov, &env.caps)?;
            ctx.write(
                "effective1",
                json!({
                    "formula": out.formula,
                    "reps": out.reps,
                    "q_double_prime": out.q_double_prime,
                    "q_prime": out.q_prime,
                    "runs": out.runs,
                    "delta": fr(&out.delta),
                    "verification": out.verification,
                    "attempts": out.attempts,
                    "seed": out.seed,
                    "worst_far_acceptance": out.worst_far_acceptance.as_ref().map(fr),
                }),
            )
        }
        TransformCmd::Effective2 { decl } => {
            let (eps, delta, q) = params(decl, ctx, &p)?;
            let out = effective_two_sided(&p, &eps, &delta, q, env.seed, ov, &env.caps)?;
            ctx.write(
                "effective2",
                json!({
                    "formula": out.combi.formula,
                    "trace": out.combi.trace,
                    "delta_prime": out.combi.delta_prime,
                    "reps": out.reps,
                    "q_prime": out.q_prime,
                    "amplified_delta": fr(&out.amplified_delta),
                    "target_delta": out.target_delta,
                }),
            )
        }
    }
}

fn structure(cmd: &StructureCmd, env: &Env, ctx: &mut Context) -> Result<(), CliError> {
    let p: ProbFormula = ctx.read(env.input()?)?;
    let ov = &env.overrides;
    match cmd {
        StructureCmd::Scm => {
            let scm = scm_of(&p, ov)?;
            let eta = match ov.ratio("constellation.eta")? {
                Some(e) => e,
                None => ratio::frac(p.support_size() as i64, p.n() as i64),
            };
            let violations = scm.violations();
            let size = scm.size_bound_violations(&eta);
            ctx.write(
                "scm",
                json!({
                    "decomposition": scm,
                    "violations": violations,
                    "size_bound_eta": fr(&eta),
                    "size_bound_violations": size,
                }),
            )
        }
        StructureCmd::Constellation => {
            let c = constellation_of(&p, ov, ctx)?;
            let report = verify_constellation(&c, &p);
            ctx.param("default_eta", fr(&default_eta(p.support_size(), p.n(), c.q)));
            ctx.write("constellation", json!({"constellation": c, "report": report}))
        }
        StructureCmd::Pompoms { epsilon, property, word } => {
            ctx.param("epsilon", fr(epsilon));
            let c = constellation_of(&p, ov, ctx)?;
            let size = ov.usize("pompom.size")?;
            match (property, word) {
                (Some(lp), Some(ws)) => {
                    let l: Property = ctx.read(lp)?;
                    let w = parse_word(l.alphabet(), ws)?;
                    ctx.param("word", ws);
                    let r = extract_revealing_pompoms(&c, &w, &l, epsilon, size, env.caps.sigma)?;
                    let v = r.violations(&w, &l);
                    ctx.write("revealing", json!({"revealing": r, "violations": v}))
                }
                (None, None) => {
                    let j = extract_discerning_pompoms(&c, &p, epsilon, size)?;
                    let v = j.violations(&p);
                    ctx.write("discerning", json!({"discerning": j, "violations": v}))
                }
                _ => Err(CliError::Usage("--property and --word go together".into())),
            }
        }
    }
}

fn synthesize(cmd: &SynthesizeCmd, env: &Env, ctx: &mut Context) -> Result<(), CliError> {
    match cmd {
        SynthesizeCmd::OneSided { p, q, epsilon } => {
            let l: Property = ctx.read(env.input()?)?;
            let rate = match (p.clone(), env.overrides.ratio("sampler.p")?) {
                (Some(r), _) | (None, Some(r)) => r,
                (None, None) => {
                    let (q, e) = (need(q, "q")?, need(epsilon, "epsilon")?);
                    let r = compute_sampling_rate(q, l.alphabet().size(), e, l.n(), Sided::One);
                    ctx.param("sampling_rate", &r);
                    r.p_ratio()
                }
            };
            ctx.param("p", fr(&rate));
            let t = SampleTester::one_sided(l, rate)?;
            ctx.write("tester", &t)
        }
        SynthesizeCmd::TwoSided { decl } => {
            let p: ProbFormula = ctx.read(env.input()?)?;
            let pair = pair_of(decl, ctx)?;
            let eps = need(&decl.epsilon, "epsilon")?;
            ctx.param("epsilon", fr(&eps));
            if env.overrides.raw("sampler.p").is_none() {
                if let Some(q) = p.uniform_query_size() {
                    let r = compute_sampling_rate(q, p.alphabet_size(), ratio::to_f64(&eps), p.n(), Sided::Two);
                    ctx.param("sampling_rate", &r);
                }
            }
            let t = synthesize_two_sided_sampler(&p, &pair, &eps, &env.overrides)?;
            ctx.write("tester", &t)
        }
    }
}

fn run(cmd: &RunCmd, env: &Env, ctx: &mut Context) -> Result<(), CliError> {
    match cmd {
        RunCmd::Sample { word } => {
            let t: SampleTester = ctx.read(env.input()?)?;
            let w = parse_word(&t.alphabet, word)?;
            ctx.param("word", word);
            let r = t.run(&w, env.seed, env.caps.sigma)?;
            ctx.write("run", &r)
        }
        RunCmd::Multitest {
            testers,
            word,
            delta,
            reps,
        } => {
            let ts = testers
                .iter()
                .map(|p| ctx.read::<SampleTester>(p))
                .collect::<Result<Vec<_>, _>>()?;
            let plan = MultiTestPlan::new(ts, (!reps.is_empty()).then(|| reps.clone()), delta.clone())?;
            let w = parse_word(&plan.testers[0].alphabet, word)?;
            ctx.param("word", word);
            ctx.param("delta", fr(delta));
            ctx.param("reps", &plan.reps);
            let r = run_multitest(&plan, &w, env.seed, env.caps.sigma)?;
            let any = r.answers.iter().any(|&a| a);
            ctx.write("multitest", json!({"run": r, "union_accepts": any}))
        }
    }
}

fn eval(cmd: &EvalCmd, env: &Env, ctx: &mut Context) -> Result<(), CliError> {
    match cmd {
        EvalCmd::Exact { word } => {
            let t: SampleTester = ctx.read(env.input()?)?;
            let w = parse_word(&t.alphabet, word)?;
            ctx.param("word", word);
            let v = exact_sampler_acceptance(&t, &w, &env.caps)?;
            ctx.write("eval", EvalReport::exact(format!("acceptance of {word}"), v))
        }
        EvalCmd::Mc { word } => {
            let t: SampleTester = ctx.read(env.input()?)?;
            let w = parse_word(&t.alphabet, word)?;
            ctx.param("word", word);
            ctx.param("trials", env.trials);
            let r = monte_carlo_acceptance(&t, &w, env.trials, env.seed, env.caps.sigma)?;
            ctx.write("eval", &r)
        }
        EvalCmd::Devbound {
            gammas,
            alternating,
            p,
            c,
            eta,
        } => {
            let values: Vec<f64> = match alternating {
                Some(m) => (0..*m).map(|i| (i % 2) as f64).collect(),
                None => gammas.clone(),
            };
            ctx.param("trials", env.trials);
            let r = check_deviation_bound(&values, *p, *c, *eta, env.trials, env.seed)?;
            ctx.write("devbound", &r)?;
            if r.pass {
                Ok(())
            } else {
                Err(CliError::Validation(format!("failure rate {} exceeds {}", r.rate, r.allowed)))
            }
        }
        EvalCmd::Calc { table } => {
            let grid: Vec<GridPoint> = match &env.input {
                Some(path) => ctx.read(path)?,
                None => default_appendix_grid(),
            };
            let r = verify_appendix_calculations(&grid);
            if *table {
                let rows: Vec<Vec<String>> = r
                    .rows
                    .iter()
                    .map(|row| {
                        let pt = &row.point;
                        vec![
                            format!("{:?}", pt.calc).to_lowercase(),
                            pt.alphabet.to_string(),
                            pt.q.to_string(),
                            pt.epsilon.to_string(),
                            pt.i.to_string(),
                            format!("{:.3}", pt.log2_n),
                            match row.status {
                                RowStatus::Pass => "pass".into(),
                                RowStatus::Fail => "FAIL".into(),
                                RowStatus::Skipped => "skipped".into(),
                            },
                            row.slack.map(|s| format!("{s:.4}")).unwrap_or_default(),
                        ]
                    })
                    .collect();
                eprint!(
                    "{}",
                    render_table(&["calc", "|Ξ|", "q", "ε", "i", "log2 n", "status", "slack"], &rows)
                );
            }
            ctx.write("calc", &r)?;
            if r.pass() {
                Ok(())
            } else {
                Err(CliError::Validation(format!(
                    "{} violations, monotone: {}",
                    r.violations, r.monotone
                )))
            }
        }
        EvalCmd::Quality { decl, method } => {
            let v: Value = ctx.read(env.input()?)?;
            let pair = pair_of(decl, ctx)?;
            let eps = need(&decl.epsilon, "epsilon")?;
            ctx.param("epsilon", fr(&eps));
            let m = match method {
                QualityMethodArg::Exact => QualityMethod::Exact,
                QualityMethodArg::Mc => QualityMethod::MonteCarlo {
                    trials: env.trials,
                    seed: env.seed,
                },
            };
            let report = if let Ok(t) = serde_json::from_value::<SampleTester>(v.clone()) {
                evaluate_test_quality(&Subject::Sampler(&t), &pair, &eps, m, &env.caps)?
            } else {
                let p: ProbFormula =
                    serde_json::from_value(v).map_err(|e| CliError::Validation(format!("input: {e}")))?;
                evaluate_test_quality(&Subject::Formula(&p), &pair, &eps, m, &env.caps)?
            };
            ctx.write("quality", &report)
        }
    }
}
