//! Simulated amplitude-encoded state and its measurement distribution.
//!
//! Grid values are mapped to Boltzmann weights `exp(-(f - f_min) / sigma)`,
//! with `sigma` the population standard deviation of the values on the
//! current grid. Probabilities can be read exactly or estimated from a
//! finite number of shots.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{QagsError, Result};
use crate::grid::GridSpec;
use crate::objective::Objective;

/// Standard deviations below this are treated as a constant function.
pub const SIGMA_FLOOR: f64 = 1e-12;

/// How function values become measurement probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EncodingLaw {
    /// `P(x) ~ exp(-(f(x) - f_min) / sigma)`.
    #[default]
    BoltzmannProbability,
    /// Amplitude `~ exp(-(f(x) - f_min) / sigma)`, so `P` carries a factor 2
    /// in the exponent.
    BoltzmannAmplitude,
}

impl EncodingLaw {
    fn exponent_scale(self) -> f64 {
        match self {
            EncodingLaw::BoltzmannProbability => 1.0,
            EncodingLaw::BoltzmannAmplitude => 2.0,
        }
    }
}

/// Normalized measurement distribution over a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumDistribution {
    spec: GridSpec,
    probabilities: Vec<f64>,
    f_min_index: u64,
    sigma: f64,
    entropy_bits: f64,
}

/// Evaluates `f` at every grid point in flat-index order.
pub fn evaluate_grid(spec: &GridSpec, f: &Objective) -> Result<Vec<f64>> {
    if f.arity() != spec.dimension() {
        return Err(QagsError::InvalidArity {
            expected: spec.dimension().to_string(),
            got: f.arity(),
        });
    }
    let total = spec.total_points();
    let mut values = Vec::with_capacity(total as usize);
    let mut point = vec![0.0; spec.dimension()];
    for flat in 0..total {
        spec.decode_into(flat, &mut point);
        let v = f.evaluate(&point)?;
        if !v.is_finite() {
            return Err(QagsError::Evaluation { point });
        }
        values.push(v);
    }
    Ok(values)
}

/// Lowest index among the minimal entries.
pub(crate) fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v < values[best] {
            best = i;
        }
    }
    best
}

/// Lowest index among the maximal entries.
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Population standard deviation, with the constant-function fallback of 1.
pub fn population_sigma(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let sd = var.sqrt();
    if sd.is_finite() && sd >= SIGMA_FLOOR {
        sd
    } else {
        1.0
    }
}

fn shannon_bits(probabilities: &[f64], max_bits: f64) -> f64 {
    let h: f64 = probabilities
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum();
    h.clamp(0.0, max_bits)
}

/// Evaluates `f` over the grid and encodes the values under `law`.
pub fn build_distribution(
    spec: &GridSpec,
    f: &Objective,
    law: EncodingLaw,
) -> Result<QuantumDistribution> {
    let values = evaluate_grid(spec, f)?;
    QuantumDistribution::from_values(spec.clone(), &values, law, None)
}

impl QuantumDistribution {
    /// Encodes precomputed grid values. `sigma` overrides the population
    /// standard deviation when given.
    pub fn from_values(
        spec: GridSpec,
        values: &[f64],
        law: EncodingLaw,
        sigma: Option<f64>,
    ) -> Result<Self> {
        if values.len() as u64 != spec.total_points() {
            return Err(QagsError::InvalidInput(format!(
                "{} values for a grid of {} points",
                values.len(),
                spec.total_points()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(QagsError::Evaluation {
                point: spec.decode(i as u64)?,
            });
        }
        let sigma = match sigma {
            Some(s) if s > 0.0 && s.is_finite() => s,
            Some(s) => {
                return Err(QagsError::InvalidInput(format!(
                    "sigma must be positive, got {s}"
                )))
            }
            None => population_sigma(values),
        };
        let f_min_index = argmin(values);
        let f_min = values[f_min_index];
        let scale = law.exponent_scale();
        let mut probabilities: Vec<f64> = values
            .iter()
            .map(|&v| (-(scale * (v - f_min)) / sigma).exp())
            .collect();
        let z: f64 = probabilities.iter().sum();
        for p in &mut probabilities {
            *p /= z;
        }
        let entropy_bits = shannon_bits(&probabilities, spec.total_qubits() as f64);
        Ok(QuantumDistribution {
            spec,
            probabilities,
            f_min_index: f_min_index as u64,
            sigma,
            entropy_bits,
        })
    }

    /// Wraps an explicit probability vector. Entries must be non-negative and
    /// sum to one within 1e-9; they are renormalized.
    pub fn from_probabilities(spec: GridSpec, probabilities: Vec<f64>) -> Result<Self> {
        if probabilities.len() as u64 != spec.total_points() {
            return Err(QagsError::InvalidInput(format!(
                "{} probabilities for a grid of {} points",
                probabilities.len(),
                spec.total_points()
            )));
        }
        if probabilities.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(QagsError::InvalidInput(
                "probabilities must be finite and non-negative".into(),
            ));
        }
        let z: f64 = probabilities.iter().sum();
        if (z - 1.0).abs() > 1e-9 {
            return Err(QagsError::InvalidInput(format!("probabilities sum to {z}")));
        }
        let probabilities: Vec<f64> = probabilities.into_iter().map(|p| p / z).collect();
        let f_min_index = argmax(&probabilities) as u64;
        let entropy_bits = shannon_bits(&probabilities, spec.total_qubits() as f64);
        Ok(QuantumDistribution {
            spec,
            probabilities,
            f_min_index,
            sigma: 1.0,
            entropy_bits,
        })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// Basis state of the lowest grid value (lowest index on ties).
    pub fn f_min_index(&self) -> u64 {
        self.f_min_index
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn entropy_bits(&self) -> f64 {
        self.entropy_bits
    }

    /// Most probable basis state, lowest index on ties.
    pub fn argmax(&self) -> u64 {
        argmax(&self.probabilities) as u64
    }

    /// Entropy relative to its maximum `n * d` bits.
    pub fn entropy_fraction(&self) -> f64 {
        let max = self.spec.total_qubits() as f64;
        (self.entropy_bits / max).clamp(0.0, 1.0)
    }

    /// The `k` most probable basis states with their points and
    /// probabilities, ties broken by index.
    pub fn top_k(&self, k: usize) -> Vec<(u64, Vec<f64>, f64)> {
        let mut order: Vec<usize> = (0..self.probabilities.len()).collect();
        order.sort_by(|&a, &b| {
            self.probabilities[b]
                .total_cmp(&self.probabilities[a])
                .then(a.cmp(&b))
        });
        order
            .into_iter()
            .take(k)
            .map(|i| {
                let flat = i as u64;
                let point = self.spec.decode(flat).expect("index within grid");
                (flat, point, self.probabilities[i])
            })
            .collect()
    }
}

/// Entropy fraction of `dist`: 1 for uniform, 0 for a point mass.
pub fn entropy_fraction(dist: &QuantumDistribution) -> f64 {
    dist.entropy_fraction()
}

/// Finite-shot readout with a fresh stream seeded by `seed`.
/// `shots == 0` returns the exact distribution.
pub fn sample(dist: &QuantumDistribution, shots: u64, seed: u64) -> QuantumDistribution {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_with_rng(dist, shots, &mut rng)
}

/// Finite-shot readout drawing from a caller-owned stream.
///
/// The multinomial draw is done as a chain of conditional binomials, so the
/// cost is linear in the number of basis states, not in `shots`.
pub fn sample_with_rng<R: Rng + ?Sized>(
    dist: &QuantumDistribution,
    shots: u64,
    rng: &mut R,
) -> QuantumDistribution {
    if shots == 0 {
        return dist.clone();
    }
    let mut counts = vec![0u64; dist.probabilities.len()];
    let mut remaining_shots = shots;
    let mut remaining_mass = 1.0f64;
    for (i, &p) in dist.probabilities.iter().enumerate() {
        if remaining_shots == 0 {
            break;
        }
        let q = if remaining_mass > 0.0 {
            (p / remaining_mass).clamp(0.0, 1.0)
        } else {
            1.0
        };
        let c = if q >= 1.0 || i + 1 == counts.len() {
            remaining_shots
        } else if q <= 0.0 {
            0
        } else {
            Binomial::new(remaining_shots, q)
                .expect("q is a valid probability")
                .sample(rng)
        };
        counts[i] = c;
        remaining_shots -= c;
        remaining_mass -= p;
    }
    let probabilities: Vec<f64> = counts.iter().map(|&c| c as f64 / shots as f64).collect();
    let entropy_bits = shannon_bits(&probabilities, dist.spec.total_qubits() as f64);
    QuantumDistribution {
        spec: dist.spec.clone(),
        probabilities,
        f_min_index: dist.f_min_index,
        sigma: dist.sigma,
        entropy_bits,
    }
}
