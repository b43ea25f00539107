//! Randomized invariants over the public API, 1000 cases each.

use std::f64::consts::PI;

use proptest::prelude::*;
use qags::refine::numerical_gradient;
use qags::{
    refine, run, EncodingLaw, GridSpec, Objective, QagsConfig, QuantumDistribution, RefinerConfig,
    SearchBox,
};

fn cfg() -> ProptestConfig {
    ProptestConfig::with_cases(1000)
}

fn any_law() -> impl Strategy<Value = EncodingLaw> {
    prop_oneof![
        Just(EncodingLaw::BoltzmannProbability),
        Just(EncodingLaw::BoltzmannAmplitude)
    ]
}

/// A grid of 2^(n*d) points on [-1, 1]^d together with matching values.
fn grid_and_values(
    values: impl Strategy<Value = f64> + Clone,
) -> impl Strategy<Value = (GridSpec, Vec<f64>)> {
    (1usize..=3, 1u32..=3).prop_flat_map(move |(d, n)| {
        let spec = GridSpec::new(SearchBox::cube(d, -1.0, 1.0).unwrap(), n).unwrap();
        let len = spec.total_points() as usize;
        (Just(spec), prop::collection::vec(values.clone(), len))
    })
}

fn first_argmin(v: &[f64]) -> u64 {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x < v[best] {
            best = i;
        }
    }
    best as u64
}

fn random_box(d: usize) -> impl Strategy<Value = SearchBox> {
    prop::collection::vec((-50.0f64..50.0, 0.5f64..60.0), d).prop_map(|pairs| {
        let lower = pairs.iter().map(|p| p.0).collect();
        let upper = pairs.iter().map(|p| p.0 + p.1).collect();
        SearchBox::new(lower, upper).unwrap()
    })
}

/// Benchmark `which` in `d` dims; sphere gets a shift drawn by the caller.
fn benchmark(which: usize, d: usize, shift: &[f64]) -> Objective {
    match which {
        0 => Objective::rastrigin(d),
        1 => Objective::styblinski_tang(d),
        2 => Objective::rosenbrock(d.max(2)),
        _ => Objective::sphere(d, Some(shift[..d].to_vec())),
    }
    .unwrap()
}

fn analytic_gradient(which: usize, x: &[f64], shift: &[f64]) -> Vec<f64> {
    match which {
        0 => x
            .iter()
            .map(|&v| 2.0 * v + 20.0 * PI * (2.0 * PI * v).sin())
            .collect(),
        1 => x
            .iter()
            .map(|&v| 0.5 * (4.0 * v.powi(3) - 32.0 * v + 5.0))
            .collect(),
        2 => {
            let d = x.len();
            (0..d)
                .map(|i| {
                    let mut g = 0.0;
                    if i + 1 < d {
                        g += -400.0 * x[i] * (x[i + 1] - x[i] * x[i]) - 2.0 * (1.0 - x[i]);
                    }
                    if i > 0 {
                        g += 200.0 * (x[i] - x[i - 1] * x[i - 1]);
                    }
                    g
                })
                .collect()
        }
        _ => x.iter().zip(shift).map(|(v, c)| 2.0 * (v - c)).collect(),
    }
}

proptest! {
    #![proptest_config(cfg())]

    #[test]
    fn probabilities_sum_to_one((spec, values) in grid_and_values(-1e3f64..1e3), law in any_law()) {
        let dist = QuantumDistribution::from_values(spec, &values, law, None).unwrap();
        let total: f64 = dist.probabilities().iter().sum();
        prop_assert!((total - 1.0).abs() <= 1e-12, "sum {total}");
        prop_assert!(dist.probabilities().iter().all(|&p| p >= 0.0));
    }

    #[test]
    fn most_probable_state_is_first_minimiser(
        (spec, values) in grid_and_values((0u8..4).prop_map(f64::from)),
        law in any_law(),
    ) {
        // Few distinct values, so ties are common.
        let dist = QuantumDistribution::from_values(spec, &values, law, None).unwrap();
        prop_assert_eq!(dist.argmax(), first_argmin(&values));
        prop_assert_eq!(dist.f_min_index(), first_argmin(&values));
    }

    #[test]
    fn constant_offset_leaves_probabilities_unchanged(
        (spec, values) in grid_and_values(-100.0f64..100.0),
        c in -100.0f64..100.0,
        law in any_law(),
    ) {
        let shifted: Vec<f64> = values.iter().map(|v| v + c).collect();
        let a = QuantumDistribution::from_values(spec.clone(), &values, law, None).unwrap();
        let b = QuantumDistribution::from_values(spec, &shifted, law, None).unwrap();
        for (p, q) in a.probabilities().iter().zip(b.probabilities()) {
            prop_assert!((p - q).abs() <= 1e-12, "{p} vs {q}");
        }
    }

    #[test]
    fn amplitude_law_matches_probability_law_at_half_sigma(
        (spec, values) in grid_and_values(-1e3f64..1e3),
        sigma in 1e-3f64..1e3,
    ) {
        let amp = QuantumDistribution::from_values(spec.clone(), &values, EncodingLaw::BoltzmannAmplitude, Some(sigma))
            .unwrap();
        let prob =
            QuantumDistribution::from_values(spec, &values, EncodingLaw::BoltzmannProbability, Some(sigma / 2.0))
                .unwrap();
        for (p, q) in amp.probabilities().iter().zip(prob.probabilities()) {
            prop_assert!((p - q).abs() <= 1e-12, "{p} vs {q}");
        }
    }

    #[test]
    fn codec_round_trip(
        (spec, flat) in (1usize..=4, 1u32..=6)
            .prop_flat_map(|(d, n)| (random_box(d), Just(n)))
            .prop_flat_map(|(b, n)| {
                let spec = GridSpec::new(b, n).unwrap();
                let total = spec.total_points();
                (Just(spec), 0..total)
            }),
    ) {
        let point = spec.decode(flat).unwrap();
        prop_assert!(spec.bounds().contains(&point));
        prop_assert_eq!(spec.encode(&point).unwrap(), flat);
        let digits = spec.digits(flat).unwrap();
        for (i, &j) in digits.iter().enumerate() {
            prop_assert_eq!(spec.coordinate(i, j).unwrap(), point[i]);
        }
    }

    #[test]
    fn refiner_stays_feasible_and_never_ascends(
        which in 0usize..4,
        d in 1usize..=4,
        b in random_box(4),
        start in prop::collection::vec(-120.0f64..120.0, 4),
        shift in prop::collection::vec(-60.0f64..60.0, 4),
    ) {
        let d = if which == 2 { d.max(2) } else { d };
        let bounds = SearchBox::new(b.lower()[..d].to_vec(), b.upper()[..d].to_vec()).unwrap();
        let f = benchmark(which, d, &shift);
        let cfg = RefinerConfig { max_evals: 2000, ..Default::default() };
        let r = refine(&f, &bounds, &start[..d], &cfg).unwrap();
        prop_assert!(bounds.contains(&r.point));
        let v0 = f.evaluate(&bounds.clamp(&start[..d])).unwrap();
        prop_assert!(r.value <= v0, "{} > {}", r.value, v0);
        prop_assert_eq!(f.evaluate(&r.point).unwrap(), r.value);
        prop_assert!(r.evals <= cfg.max_evals);
    }

    #[test]
    fn finite_differences_match_analytic_gradients(
        which in 0usize..4,
        d in 2usize..=6,
        x in prop::collection::vec(-5.0f64..5.0, 6),
        shift in prop::collection::vec(-5.0f64..5.0, 6),
    ) {
        let f = benchmark(which, d, &shift);
        let x = &x[..d];
        let wide = SearchBox::cube(d, -1e3, 1e3).unwrap();
        let (fd, _) = numerical_gradient(&f, x, &wide, f64::EPSILON.cbrt()).unwrap();
        let an = analytic_gradient(which, x, &shift[..d]);
        let scale = an.iter().fold(1.0f64, |m, g| m.max(g.abs()));
        let err = fd.iter().zip(&an).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        prop_assert!(err / scale < 1e-5, "relative error {} for benchmark {}", err / scale, which);
    }
}

proptest! {
    #![proptest_config(cfg())]

    #[test]
    fn runs_produce_nested_shrinking_boxes(
        which in 0usize..4,
        d in 1usize..=3,
        n in 2u32..=4,
        b in random_box(3),
        shift in prop::collection::vec(-60.0f64..60.0, 3),
        quantile in 0.5f64..0.95,
        law in any_law(),
    ) {
        let d = if which == 2 { d.max(2) } else { d };
        let bounds = SearchBox::new(b.lower()[..d].to_vec(), b.upper()[..d].to_vec()).unwrap();
        let f = benchmark(which, d, &shift);
        let mut cfg = QagsConfig::new(n);
        cfg.quantile = quantile;
        cfg.law = law;
        cfg.refiner.max_evals = 500;
        let report = run(&f, &bounds, &cfg).unwrap();
        let mut previous = bounds.clone();
        for it in &report.iterations {
            prop_assert_eq!(&it.bounds_before, &previous);
            prop_assert!(it.bounds_before.contains_box(&it.bounds_after));
            prop_assert!(it.bounds_after.volume() <= it.bounds_before.volume());
            previous = it.bounds_after.clone();
        }
        for w in report.iterations.windows(2) {
            prop_assert!(w[1].best_value_so_far <= w[0].best_value_so_far);
        }
        prop_assert!(bounds.contains(&report.found_point));
        prop_assert!(report.found_value <= report.iterations.last().unwrap().best_value_so_far);
    }
}
