use qags::{sample, GridSpec, QuantumDistribution, SearchBox};

fn spec(qubits: u32) -> GridSpec {
    GridSpec::new(SearchBox::cube(1, 0.0, 1.0).unwrap(), qubits).unwrap()
}

/// Every bin within `k` binomial standard errors of its probability.
fn within_standard_errors(p: &[f64], q: &[f64], shots: u64, k: f64) -> bool {
    p.iter().zip(q).all(|(&p, &q)| {
        let se = (p * (1.0 - p) / shots as f64).sqrt();
        if se == 0.0 {
            q == p
        } else {
            (q - p).abs() < k * se
        }
    })
}

#[test]
fn uniform_two_qubits_at_a_million_shots() {
    let dist = QuantumDistribution::from_probabilities(
        GridSpec::new(SearchBox::cube(2, -1.0, 1.0).unwrap(), 1).unwrap(),
        vec![0.25; 4],
    )
    .unwrap();
    for seed in 0..5 {
        let s = sample(&dist, 1_000_000, seed);
        assert!(within_standard_errors(
            dist.probabilities(),
            s.probabilities(),
            1_000_000,
            5.0
        ));
    }
}

#[test]
fn skewed_distribution_at_a_million_shots() {
    let p = vec![
        0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625, 0.0078125, 0.0078125,
    ];
    let dist = QuantumDistribution::from_probabilities(spec(3), p).unwrap();
    let s = sample(&dist, 1_000_000, 99);
    assert!(within_standard_errors(
        dist.probabilities(),
        s.probabilities(),
        1_000_000,
        5.0
    ));
    let total: f64 = s.probabilities().iter().sum();
    assert!((total - 1.0).abs() < 1e-12);
    for q in s.probabilities() {
        let count = q * 1e6;
        assert!((count - count.round()).abs() < 1e-6);
    }
}

#[test]
fn zero_probability_bins_stay_empty() {
    let dist = QuantumDistribution::from_probabilities(spec(2), vec![0.0, 0.7, 0.0, 0.3]).unwrap();
    let s = sample(&dist, 10_000, 5);
    assert_eq!(s.probabilities()[0], 0.0);
    assert_eq!(s.probabilities()[2], 0.0);
}

#[test]
fn different_seeds_differ() {
    let dist = QuantumDistribution::from_probabilities(spec(2), vec![0.25; 4]).unwrap();
    assert_ne!(sample(&dist, 10_000, 1), sample(&dist, 10_000, 2));
    assert_eq!(sample(&dist, 10_000, 1), sample(&dist, 10_000, 1));
}
