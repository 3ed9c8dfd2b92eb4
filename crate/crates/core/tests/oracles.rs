use pompom_core::eval::{exact_sampler_acceptance, monte_carlo_acceptance};
use pompom_core::ratio::{self, frac, int};
use pompom_core::sampler::{synthesize_two_sided_sampler, SampleTester};
use pompom_core::{Alphabet, Caps, Constraint, IndexSet, Overrides, PartialPropertyPair, ProbFormula, Property, Word};

fn within_three_se(t: &SampleTester, w: &Word, trials: usize, seed: u64) -> (f64, f64, bool) {
    let exact = ratio::to_f64(&exact_sampler_acceptance(t, w, &Caps::default()).unwrap());
    let mc = monte_carlo_acceptance(t, w, trials, seed, 1 << 10).unwrap().estimate;
    let se = (exact * (1.0 - exact) / trials as f64).sqrt();
    (exact, mc, (mc - exact).abs() <= 3.0 * se + 1e-12)
}

#[test]
fn monte_carlo_agrees_with_enumeration_one_sided() {
    let l = Property::new(
        8,
        Alphabet::binary(),
        vec![
            Word::from_letters(vec![0, 0, 0, 0, 1, 1, 1, 1]),
            Word::from_letters(vec![1, 1, 0, 0, 0, 0, 1, 1]),
        ],
    )
    .unwrap();
    for (p, w) in [
        (frac(1, 2), Word::constant(8, 0)),
        (frac(1, 3), Word::constant(8, 1)),
        (frac(1, 5), Word::from_letters(vec![1, 0, 1, 0, 1, 0, 1, 0])),
    ] {
        let t = SampleTester::one_sided(l.clone(), p).unwrap();
        let (exact, mc, ok) = within_three_se(&t, &w, 20_000, 11);
        assert!(ok, "exact {exact}, mc {mc}");
    }
}

#[test]
fn monte_carlo_agrees_with_enumeration_two_sided() {
    let n = 10;
    let cs: Vec<Constraint> = (0..5)
        .map(|j| {
            Constraint::from_fn(IndexSet::new(vec![2 * j, 2 * j + 1]), 2, |v| {
                if v.get(0) == v.get(1) {
                    int(1)
                } else {
                    int(0)
                }
            })
            .unwrap()
        })
        .collect();
    let p = ProbFormula::uniform(n, Alphabet::binary(), cs).unwrap();
    let pair = PartialPropertyPair::full(Property::everything(n, Alphabet::binary(), 1 << 12).unwrap());
    let ov = Overrides::new().with("pompom.size", 1).with("sampler.p", "3/5");
    let t = synthesize_two_sided_sampler(&p, &pair, &int(1), &ov).unwrap();
    for w in [
        Word::constant(n, 0),
        Word::from_letters(vec![0, 1, 0, 1, 0, 0, 1, 1, 0, 1]),
        Word::from_letters(vec![0, 1, 1, 0, 0, 1, 1, 0, 0, 1]),
    ] {
        let (exact, mc, ok) = within_three_se(&t, &w, 20_000, 5);
        assert!(ok, "exact {exact}, mc {mc}");
    }
}
