//! Cross-module invariants: generative property tests plus the numeric
//! identities that tie the inference layer to the generating models.

use std::collections::BTreeMap;

use proptest::prelude::*;

use chronorev::data_model::{ChoiceDataset, EmpiricalCdf, OptionId, PairKey, TrialRecord};
use chronorev::dataset::Dataset;
use chronorev::fechner::{predict_probability, theta_percentile, FechnerOptions, PredictionCase};
use chronorev::generators::{
    analytic_cdfs, sample_rum_cf, Boundary, Chronometric, DiffFamily, RumCfSpec,
};
use chronorev::math;
use chronorev::rationalize::{construct_rum, construct_rum_cf_two_options, ScfTable};
use chronorev::relations::{Relation, Strength};
use chronorev::symmetric::{reveal_symmetric_pair, t_percentile, SymmetricOptions};
use chronorev::unrestricted::{
    density_ratio_check, q_fsd, q_ratio_curve, reveal_unrestricted, DensityRatioOptions,
    DominanceOptions, RatioVerdict,
};
use chronorev::RtCdf;

fn id(s: &str) -> OptionId {
    OptionId::new(s).unwrap()
}

fn pair(a: &str, b: &str) -> PairKey {
    PairKey::new(id(a), id(b)).unwrap()
}

fn rum_spec(
    utilities: &[(&str, f64)],
    diff: DiffFamily,
    chronometric: Chronometric,
    pairs: &[(&str, &str)],
) -> RumCfSpec {
    RumCfSpec {
        utilities: utilities.iter().map(|(s, v)| (id(s), *v)).collect(),
        diff,
        diff_overrides: vec![],
        chronometric,
        noise: None,
        pairs: pairs.iter().map(|(a, b)| [id(a), id(b)]).collect(),
        trials_per_pair: 1,
    }
}

fn two_sided_dataset(rts_x: Vec<f64>, rts_y: Vec<f64>) -> Dataset {
    let key = pair("x", "y");
    let mut trials = Vec::new();
    for rt in rts_x {
        trials.push(TrialRecord {
            pair: key.clone(),
            chosen: id("x"),
            rt,
        });
    }
    for rt in rts_y {
        trials.push(TrialRecord {
            pair: key.clone(),
            chosen: id("y"),
            rt,
        });
    }
    Dataset::Empirical(ChoiceDataset::from_trials(trials).unwrap())
}

fn rt_samples() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..50.0, 1..40)
}

proptest! {
    // step-CDF and quantile invariants
    #[test]
    fn cdf_quantile_roundtrip(samples in rt_samples(), alpha in 0.001f64..1.0) {
        let cdf = EmpiricalCdf::new(samples).unwrap();
        let q = cdf.quantile(alpha).unwrap();
        // F(quantile(alpha)) >= alpha, and the quantile is a sample point
        prop_assert!(cdf.eval(q) >= alpha);
        prop_assert!(cdf.samples().contains(&q));
        // quantile(F(t)) <= t at every sample point
        for &t in cdf.samples() {
            let back = cdf.quantile(cdf.eval(t)).unwrap();
            prop_assert!(back <= t, "quantile(F({t})) = {back}");
        }
    }

    // dominance is monotone in the scaling constant
    #[test]
    fn dominance_monotone_in_q(
        g in rt_samples(),
        h in rt_samples(),
        q_lo in 0.2f64..4.0,
        bump in 1.01f64..6.0,
    ) {
        let g = EmpiricalCdf::new(g).unwrap();
        let h = EmpiricalCdf::new(h).unwrap();
        let opts = DominanceOptions::default();
        let lo = q_fsd(&RtCdf::Step(&g), &RtCdf::Step(&h), q_lo, &opts);
        let hi = q_fsd(&RtCdf::Step(&g), &RtCdf::Step(&h), q_lo * bump, &opts);
        prop_assert!(!lo.holds || hi.holds, "holds at {q_lo} but not at {}", q_lo * bump);
    }

    // the dominance verdict agrees with the odds-curve formulation up to
    // floating rounding: two one-sided implications with a precision gap
    #[test]
    fn dominance_matches_odds_curve(x_rts in rt_samples(), y_rts in rt_samples()) {
        let ds = two_sided_dataset(x_rts.clone(), y_rts.clone());
        let (x, y) = (id("x"), id("y"));
        let curve = q_ratio_curve(&ds, &x, &y, &y_rts).unwrap();
        let curve_min = curve
            .iter()
            .filter_map(|p| if p.defined { p.q } else { None })
            .fold(f64::INFINITY, f64::min);

        let exact = reveal_unrestricted(&ds, &x, &y, &DominanceOptions::default()).unwrap();
        if exact.verdict.holds {
            prop_assert!(curve_min >= 1.0 - 1e-9, "curve min {curve_min} under a holding verdict");
        }
        let slack = reveal_unrestricted(
            &ds,
            &x,
            &y,
            &DominanceOptions { tol: 1e-9, ..Default::default() },
        )
        .unwrap();
        if curve_min >= 1.0 {
            prop_assert!(slack.verdict.holds, "curve min {curve_min} but slack verdict failed");
        }
    }

    // whenever the assumption-free criterion fires weakly, the frequency
    // criterion fires too
    #[test]
    fn dominance_implies_frequency_reveal(x_rts in rt_samples(), y_rts in rt_samples()) {
        let ds = two_sided_dataset(x_rts, y_rts);
        let (x, y) = (id("x"), id("y"));
        let dom = reveal_unrestricted(&ds, &x, &y, &DominanceOptions::default()).unwrap();
        if dom.verdict.holds {
            let freq = reveal_symmetric_pair(&ds, &x, &y, &SymmetricOptions::default()).unwrap();
            prop_assert!(freq.is_some(), "frequency reveal must fire when dominance does");
        }
    }

    // boundary/chronometric round trip on the positive branch
    #[test]
    fn boundary_roundtrip(scale in 0.1f64..5.0, shift in 0.0f64..3.0, frac in 0.001f64..0.999) {
        let b = Boundary::Hyperbolic { scale, shift };
        let b0 = b.initial();
        let v = if b0.is_finite() { b0 * frac } else { frac * 20.0 };
        let t = b.inverse(v).unwrap();
        prop_assert!((b.at(t) - v).abs() <= 1e-12 * v.max(1.0));
    }

    #[test]
    fn exponential_boundary_roundtrip(scale in 0.1f64..5.0, rate in 0.05f64..3.0, frac in 0.001f64..0.999) {
        let b = Boundary::Exponential { scale, rate };
        let v = b.initial() * frac;
        let t = b.inverse(v).unwrap();
        prop_assert!((b.at(t) - v).abs() <= 1e-12 * v.max(1.0));
    }

    // the frequency-matching construction satisfies its contract for any
    // valid frequencies and any target utilities
    #[test]
    fn construction_contract(p in 0.02f64..0.98, ux in -3.0f64..3.0, uy in -3.0f64..3.0) {
        let mut scf = ScfTable::new();
        scf.insert(id("x"), id("y"), p).unwrap();
        let utilities: BTreeMap<_, _> = [(id("x"), ux), (id("y"), uy)].into_iter().collect();
        let rum = construct_rum(&scf, &utilities).unwrap();
        let cp = &rum.pairs[0];
        prop_assert!((cp.density.total_mass() - 1.0).abs() < 1e-10);
        prop_assert!((cp.density.mean() - (ux - uy).abs()).abs() < 1e-10);
        let p_fav = if ux >= uy { p } else { 1.0 - p };
        prop_assert!((cp.density.cdf(0.0) - (1.0 - p_fav)).abs() < 1e-10);
    }

    // random relations: closure idempotent, contains the base, asymmetric
    // part never reflexive
    #[test]
    fn closure_properties(edges in prop::collection::vec((0usize..4, 0usize..4, prop::bool::ANY), 0..14)) {
        let names = ["a", "b", "c", "d"];
        let mut rel = Relation::new();
        for (f, t, strict) in edges {
            let strength = if strict { Strength::Strict } else { Strength::Weak };
            rel.insert(id(names[f]), id(names[t]), strength);
        }
        let closure = rel.transitive_closure();
        prop_assert_eq!(closure.clone(), closure.transitive_closure());
        for (f, t) in rel.edges() {
            prop_assert!(closure.contains(f, t));
        }
        for (f, t) in closure.asymmetric_part().edges() {
            prop_assert!(f != t);
        }
    }
}

#[test]
fn odds_percentile_converges_to_chronometric_value() {
    // logit, difference 0.5, reciprocal chronometric: t(x,y) -> r(2*0.5) = 1
    let n = 100_000;
    let spec = rum_spec(
        &[("x", 0.5), ("y", 0.0)],
        DiffFamily::Logistic { scale: 1.0 },
        Chronometric::Reciprocal { kappa: 1.0 },
        &[("x", "y")],
    );
    let key = pair("x", "y");
    let trials = sample_rum_cf(&spec, &key, n, 42).unwrap().trials;
    let ds = Dataset::Empirical(ChoiceDataset::from_trials(trials).unwrap());
    let stat = t_percentile(&ds, &id("x"), &id("y")).unwrap();
    assert!((stat.t - 1.0).abs() < 0.05, "odds percentile {}", stat.t);

    // half-odds percentile -> r(0.5) = 2
    let theta = theta_percentile(&ds, &id("x"), &id("y")).unwrap();
    assert!(
        (theta.theta - 2.0).abs() < 0.1,
        "half-odds percentile {}",
        theta.theta
    );
}

#[test]
fn odds_percentile_decreases_with_stronger_preference() {
    let n = 100_000;
    let mut last = f64::INFINITY;
    for (i, diff) in [0.25, 0.5, 1.0].into_iter().enumerate() {
        let spec = rum_spec(
            &[("x", diff), ("y", 0.0)],
            DiffFamily::Logistic { scale: 1.0 },
            Chronometric::Reciprocal { kappa: 1.0 },
            &[("x", "y")],
        );
        let key = pair("x", "y");
        let trials = sample_rum_cf(&spec, &key, n, 50 + i as u64).unwrap().trials;
        let ds = Dataset::Empirical(ChoiceDataset::from_trials(trials).unwrap());
        let stat = t_percentile(&ds, &id("x"), &id("y")).unwrap();
        assert!(
            stat.t < last,
            "odds percentile must shrink as the difference grows: {} !< {last}",
            stat.t
        );
        // identity t = r(2 * diff) = 1/(2 diff)
        assert!(
            (stat.t - 1.0 / (2.0 * diff)).abs() < 0.08,
            "diff={diff} t={}",
            stat.t
        );
        last = stat.t;
    }
}

#[test]
fn example_fixture_reveals_nothing_without_assumptions() {
    // the random-coefficient counterexample under r(v) = 1/v: the dominance
    // criterion must stay silent in both directions, while the frequency
    // criterion (wrongly, under the true model) fires for y
    let spec = rum_spec(
        &[],
        DiffFamily::CrraUniform {
            alpha_lo: 0.4,
            alpha_hi: 1.4,
            high_payoff: 20.0,
            high_prob: 0.05,
            safe_payoff: 1.0,
        },
        Chronometric::Reciprocal { kappa: 1.0 },
        &[("x", "y")],
    );
    let ds = Dataset::Analytic(chronorev::AnalyticDataset::from_rum_cf(&spec).unwrap());
    let opts = DominanceOptions::default();
    let fwd = reveal_unrestricted(&ds, &id("x"), &id("y"), &opts).unwrap();
    let bwd = reveal_unrestricted(&ds, &id("y"), &id("x"), &opts).unwrap();
    assert!(
        !fwd.verdict.holds,
        "forward dominance must fail (margin {})",
        fwd.verdict.worst_margin
    );
    assert!(
        !bwd.verdict.holds,
        "reverse dominance must fail (margin {})",
        bwd.verdict.worst_margin
    );
}

#[test]
fn density_condition_implies_dominance_on_closed_forms() {
    let specs = [
        rum_spec(
            &[("x", 0.5), ("y", 0.0)],
            DiffFamily::Logistic { scale: 1.0 },
            Chronometric::Reciprocal { kappa: 1.0 },
            &[("x", "y")],
        ),
        rum_spec(
            &[("x", 0.25), ("y", 0.0)],
            DiffFamily::Normal { sigma: 1.0 },
            Chronometric::Reciprocal { kappa: 1.0 },
            &[("x", "y")],
        ),
        rum_spec(
            &[("x", 0.5), ("y", 0.0)],
            DiffFamily::Bimodal,
            Chronometric::Reciprocal { kappa: 1.0 },
            &[("x", "y")],
        ),
    ];
    for spec in specs {
        let ds = Dataset::Analytic(chronorev::AnalyticDataset::from_rum_cf(&spec).unwrap());
        let density =
            density_ratio_check(&ds, &id("x"), &id("y"), &DensityRatioOptions::default()).unwrap();
        let dominance =
            reveal_unrestricted(&ds, &id("x"), &id("y"), &DominanceOptions::default()).unwrap();
        if matches!(density.verdict, RatioVerdict::Holds { .. }) {
            assert!(
                dominance.verdict.holds,
                "pointwise density dominance must imply the integrated condition"
            );
        }
        // unimodal location families satisfy the pointwise condition
        if !matches!(spec_family(&spec), DiffFamily::Bimodal) {
            assert!(matches!(density.verdict, RatioVerdict::Holds { .. }));
        }
    }
}

fn spec_family(spec: &RumCfSpec) -> &DiffFamily {
    &spec.diff
}

#[test]
fn prediction_case_boundary_is_continuous() {
    // as p(y,z) approaches 1/2 from above, the discounted prediction
    // approaches the tie-case value p(x,z)
    let mut gaps = Vec::new();
    for eps in [0.1, 0.02] {
        let spec = rum_spec(
            &[("x", 1.0), ("y", eps), ("z", 0.0)],
            DiffFamily::Logistic { scale: 1.0 },
            Chronometric::Reciprocal { kappa: 1.0 },
            &[("x", "z"), ("y", "z")],
        );
        let ds = Dataset::Analytic(chronorev::AnalyticDataset::from_rum_cf(&spec).unwrap());
        let pred = predict_probability(
            &ds,
            &id("x"),
            &id("y"),
            &id("z"),
            &FechnerOptions {
                tie_tol: Some(0.0),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(pred.case, PredictionCase::WeakerAboveHalf);
        let p_xz = ds.prob(&id("x"), &id("z")).unwrap();
        gaps.push((pred.p_bar - p_xz).abs());
        // the exact prediction equals the true choice probability
        let want = math::logistic_cdf(1.0 - eps);
        assert!(
            (pred.p_bar - want).abs() < 1e-9,
            "eps={eps}: {} vs {want}",
            pred.p_bar
        );
    }
    assert!(
        gaps[1] < gaps[0],
        "prediction must approach the tie value: {gaps:?}"
    );
}

#[test]
fn prediction_matches_simulation_for_probit() {
    let n = 50_000;
    let spec = rum_spec(
        &[("x", 1.0), ("y", 0.5), ("z", 0.0)],
        DiffFamily::Normal { sigma: 1.0 },
        Chronometric::Reciprocal { kappa: 1.0 },
        &[("x", "z"), ("y", "z")],
    );
    let mut trials = Vec::new();
    for key in spec.pair_keys().unwrap() {
        trials.extend(sample_rum_cf(&spec, &key, n, 77).unwrap().trials);
    }
    let ds = Dataset::Empirical(ChoiceDataset::from_trials(trials).unwrap());
    let pred = predict_probability(
        &ds,
        &id("x"),
        &id("y"),
        &id("z"),
        &FechnerOptions::default(),
    )
    .unwrap();
    let want = math::normal_cdf(0.5); // true p(x,y) for unit-scale shifts
    assert!(
        (pred.p_bar - want).abs() < 0.015,
        "{} vs {want}",
        pred.p_bar
    );
}

#[test]
fn empirical_two_option_construction_roundtrips() {
    // an empirical single-pair dataset, rebuilt and re-simulated, reproduces
    // its own frequencies and response-time distributions
    let source = rum_spec(
        &[("x", 0.4), ("y", 0.0)],
        DiffFamily::Logistic { scale: 0.8 },
        Chronometric::Reciprocal { kappa: 1.0 },
        &[("x", "y")],
    );
    let key = pair("x", "y");
    let trials = sample_rum_cf(&source, &key, 4_000, 123).unwrap().trials;
    let ds = Dataset::Empirical(ChoiceDataset::from_trials(trials).unwrap());
    let p_in = ds.prob(&id("x"), &id("y")).unwrap();

    let constructed = construct_rum_cf_two_options(
        &ds,
        &Boundary::Hyperbolic {
            scale: 1.0,
            shift: 1.0,
        },
    )
    .unwrap();
    let n = 100_000;
    let resim_trials = sample_rum_cf(&constructed.to_spec(n), &key, n, 321)
        .unwrap()
        .trials;
    let resim = Dataset::Empirical(ChoiceDataset::from_trials(resim_trials).unwrap());

    let p_out = resim.prob(&id("x"), &id("y")).unwrap();
    assert!((p_out - p_in).abs() < 0.01, "{p_out} vs {p_in}");
    for (a, b) in [("x", "y"), ("y", "x")] {
        let input = ds.rt_cdf(&id(a), &id(b)).unwrap();
        let output = resim.rt_samples(&id(a), &id(b)).unwrap();
        let m = output.len() as f64;
        let mut worst = 0.0f64;
        for (i, &t) in output.iter().enumerate() {
            worst = worst.max(((i + 1) as f64 / m - input.eval(t)).abs());
        }
        assert!(worst < 0.02, "{a} over {b}: sup distance {worst}");
    }
}

#[test]
fn tied_frequencies_with_asymmetric_times_surface_both_verdicts() {
    // p = 1/2 but the y-side is uniformly slower: the dominance criterion
    // reveals x strictly while the frequency criterion says weak both ways;
    // both verdicts are reported side by side, neither is suppressed
    let ds = two_sided_dataset(vec![0.5, 0.6, 0.7, 0.8], vec![1.5, 1.6, 1.7, 1.8]);
    let (x, y) = (id("x"), id("y"));
    let dom = reveal_unrestricted(&ds, &x, &y, &DominanceOptions::default()).unwrap();
    assert!(dom.verdict.holds && dom.verdict.strict);
    let freq_fwd = reveal_symmetric_pair(&ds, &x, &y, &SymmetricOptions::default()).unwrap();
    let freq_bwd = reveal_symmetric_pair(&ds, &y, &x, &SymmetricOptions::default()).unwrap();
    assert_eq!(freq_fwd.unwrap().strength, Strength::Weak);
    assert_eq!(freq_bwd.unwrap().strength, Strength::Weak);
}

#[test]
fn odds_curve_matches_fixture_algebra() {
    // on the bimodal fixture the early-time odds curve is (1+t)^4, tending
    // to 1 near zero and to the choice odds q=3 at infinity
    let spec = rum_spec(
        &[("x", 0.5), ("y", 0.0)],
        DiffFamily::Bimodal,
        Chronometric::Reciprocal { kappa: 1.0 },
        &[("x", "y")],
    );
    let ds = Dataset::Analytic(chronorev::AnalyticDataset::from_rum_cf(&spec).unwrap());
    let grid = [0.1, 0.25, 0.5, 0.75, 0.9, 1e6];
    let curve = q_ratio_curve(&ds, &id("x"), &id("y"), &grid).unwrap();
    for point in &curve[..5] {
        let want = (1.0 + point.t).powi(4);
        let got = point.q.expect("defined on the support");
        assert!((got - want).abs() < 1e-9, "t={}: {got} vs {want}", point.t);
        assert!(got >= 1.0);
    }
    // the limit is the choice odds; the approach rate is O(1/t)
    let tail = curve[5].q.unwrap();
    assert!((tail - 3.0).abs() < 1e-4, "tail odds {tail}");
}

#[test]
fn symmetric_inputs_construct_a_symmetric_model() {
    // p = 1/2 with identical response times in both directions: the
    // constructed difference distribution is symmetric with mean zero
    let key = pair("x", "y");
    let rts = [0.4, 0.9, 1.3, 2.0, 3.5];
    let mut trials = Vec::new();
    for &rt in &rts {
        trials.push(TrialRecord {
            pair: key.clone(),
            chosen: id("x"),
            rt,
        });
        trials.push(TrialRecord {
            pair: key.clone(),
            chosen: id("y"),
            rt,
        });
    }
    let ds = Dataset::Empirical(ChoiceDataset::from_trials(trials).unwrap());
    let constructed = construct_rum_cf_two_options(
        &ds,
        &Boundary::Hyperbolic {
            scale: 1.0,
            shift: 1.0,
        },
    )
    .unwrap();
    assert_eq!(constructed.p_first, 0.5);
    assert!(
        constructed.v_first.abs() < 1e-12,
        "mean {}",
        constructed.v_first
    );
    for v in [0.05, 0.2, 0.4] {
        let lo = constructed.diff_cdf(&ds, -v).unwrap();
        let hi = constructed.diff_cdf(&ds, v).unwrap();
        assert!(
            (lo + hi - 1.0).abs() < 1e-12,
            "asymmetry at {v}: {lo} vs {hi}"
        );
    }
}

#[test]
fn cross_pivot_relation_recovers_logit_triple() {
    use chronorev::fechner::build_fechner_relation;
    let n = 50_000;
    let spec = rum_spec(
        &[("x", 1.0), ("y", 0.5), ("z", 0.0)],
        DiffFamily::Logistic { scale: 1.0 },
        Chronometric::Reciprocal { kappa: 1.0 },
        &[("x", "z"), ("y", "z")],
    );
    let mut trials = Vec::new();
    for key in spec.pair_keys().unwrap() {
        trials.extend(sample_rum_cf(&spec, &key, n, 61).unwrap().trials);
    }
    let ds = Dataset::Empirical(ChoiceDataset::from_trials(trials).unwrap());
    let analysis = build_fechner_relation(
        &ds,
        &SymmetricOptions::default(),
        &FechnerOptions::default(),
    )
    .unwrap();
    assert!(analysis.r_cross_pivot.contains_strict(&id("x"), &id("y")));
    assert!(!analysis.r_cross_pivot.contains(&id("y"), &id("x")));
    assert!(analysis.closure.contains_strict(&id("x"), &id("y")));
}

#[test]
fn diffusion_data_reconstructs_through_its_own_boundary() {
    use chronorev::generators::{sample_ddm, DdmSpec};
    // collapsing-boundary first-passage data, rebuilt as a chronometric
    // model with the same boundary, re-simulates to matching verdicts
    let boundary = Boundary::Hyperbolic {
        scale: 1.0,
        shift: 1.0,
    };
    let spec = DdmSpec {
        utilities: [(id("x"), 0.5), (id("y"), 0.0)].into_iter().collect(),
        drift_scale: 1.0,
        sigma2: 1.0,
        boundary: boundary.clone(),
        dt: 1e-3,
        t_max: 50.0,
        pairs: vec![[id("x"), id("y")]],
        trials_per_pair: 1,
    };
    let key = pair("x", "y");
    let n = 20_000;
    let source = sample_ddm(&spec, &key, n, 212).unwrap().trials;
    let ds = Dataset::Empirical(ChoiceDataset::from_trials(source).unwrap());
    let p_in = ds.prob(&id("x"), &id("y")).unwrap();

    let constructed = construct_rum_cf_two_options(&ds, &boundary).unwrap();
    assert!(
        constructed.v_first > 0.0,
        "positive drift implies positive mean"
    );
    let resim_trials = sample_rum_cf(&constructed.to_spec(n), &key, n, 213)
        .unwrap()
        .trials;
    let resim = Dataset::Empirical(ChoiceDataset::from_trials(resim_trials).unwrap());
    let p_out = resim.prob(&id("x"), &id("y")).unwrap();
    assert!((p_out - p_in).abs() < 0.015, "{p_out} vs {p_in}");

    let opts = DominanceOptions {
        tol: 0.02,
        ..Default::default()
    };
    let original = reveal_unrestricted(&ds, &id("x"), &id("y"), &opts).unwrap();
    let rebuilt = reveal_unrestricted(&resim, &id("x"), &id("y"), &opts).unwrap();
    assert_eq!(original.verdict.holds, rebuilt.verdict.holds);
    assert_eq!(original.verdict.strict, rebuilt.verdict.strict);
}

#[test]
fn analytic_and_sampled_percentiles_agree() {
    // the sidecar identities: analytic quantiles match the empirical
    // percentile statistics within Monte Carlo error
    let spec = rum_spec(
        &[("x", 1.0), ("y", 0.0)],
        DiffFamily::Logistic { scale: 1.0 },
        Chronometric::Reciprocal { kappa: 1.0 },
        &[("x", "y")],
    );
    let key = pair("x", "y");
    let analytic = analytic_cdfs(&spec, &key).unwrap();
    let p = analytic.p_first;
    let t_exact = analytic.rt_first.quantile((1.0 - p) / p);
    let theta_exact = analytic.rt_first.quantile(1.0 / (2.0 * p));
    // identities for the reciprocal chronometric
    assert!((t_exact - 1.0 / (2.0 * 1.0)).abs() < 1e-12);
    assert!((theta_exact - 1.0).abs() < 1e-12);

    let trials = sample_rum_cf(&spec, &key, 100_000, 99).unwrap().trials;
    let ds = Dataset::Empirical(ChoiceDataset::from_trials(trials).unwrap());
    let t_hat = t_percentile(&ds, &id("x"), &id("y")).unwrap().t;
    let theta_hat = theta_percentile(&ds, &id("x"), &id("y")).unwrap().theta;
    assert!((t_hat - t_exact).abs() < 0.05, "{t_hat} vs {t_exact}");
    assert!(
        (theta_hat - theta_exact).abs() < 0.05,
        "{theta_hat} vs {theta_exact}"
    );
}
