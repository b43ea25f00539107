//! Objective functions and the benchmark registry.
//!
//! An [`Objective`] wraps either one of the four built-in benchmarks or a
//! user closure. Every evaluation goes through [`Objective::evaluate`], which
//! validates the input and bumps a shared evaluation counter.

use std::f64::consts::PI;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::error::{QagsError, Result};
use crate::grid::SearchBox;

/// Per-coordinate minimiser of the Styblinski-Tang function, the negative
/// root of `4x^3 - 32x + 5 = 0`.
pub const STYBLINSKI_TANG_ARGMIN: f64 = -2.903_534_027_771_177;

/// Names accepted by [`Objective::by_name`].
pub const REGISTRY: [&str; 4] = ["rastrigin", "styblinski_tang", "rosenbrock", "sphere"];

fn check_finite(x: &[f64]) -> Result<()> {
    match x.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(QagsError::InvalidInput(format!(
            "component {i} is not finite ({})",
            x[i]
        ))),
        None => Ok(()),
    }
}

fn check_nonempty(x: &[f64]) -> Result<()> {
    if x.is_empty() {
        return Err(QagsError::InvalidArity {
            expected: ">= 1".into(),
            got: 0,
        });
    }
    Ok(())
}

/// `10d + sum(x_i^2 - 10 cos(2 pi x_i))`.
pub fn rastrigin(x: &[f64]) -> Result<f64> {
    check_nonempty(x)?;
    check_finite(x)?;
    let sum: f64 = x
        .iter()
        .map(|&xi| xi * xi - 10.0 * (2.0 * PI * xi).cos())
        .sum();
    Ok(10.0 * x.len() as f64 + sum)
}

/// `0.5 * sum(x_i^4 - 16 x_i^2 + 5 x_i)`.
pub fn styblinski_tang(x: &[f64]) -> Result<f64> {
    check_nonempty(x)?;
    check_finite(x)?;
    let sum: f64 = x
        .iter()
        .map(|&xi| {
            let sq = xi * xi;
            sq * sq - 16.0 * sq + 5.0 * xi
        })
        .sum();
    Ok(0.5 * sum)
}

/// `sum_{i<d} 100 (x_{i+1} - x_i^2)^2 + (1 - x_i)^2`. Needs `d >= 2`.
pub fn rosenbrock(x: &[f64]) -> Result<f64> {
    if x.len() < 2 {
        return Err(QagsError::InvalidArity {
            expected: ">= 2".into(),
            got: x.len(),
        });
    }
    check_finite(x)?;
    Ok(x.windows(2)
        .map(|w| {
            let a = w[1] - w[0] * w[0];
            let b = 1.0 - w[0];
            100.0 * a * a + b * b
        })
        .sum())
}

/// Shifted sphere `sum (x_i - c_i)^2`.
pub fn sphere(x: &[f64], shift: &[f64]) -> Result<f64> {
    check_nonempty(x)?;
    if shift.len() != x.len() {
        return Err(QagsError::InvalidInput(format!(
            "shift has {} components, input has {}",
            shift.len(),
            x.len()
        )));
    }
    check_finite(x)?;
    Ok(x.iter()
        .zip(shift)
        .map(|(&xi, &ci)| (xi - ci) * (xi - ci))
        .sum())
}

type CustomFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Kind {
    Rastrigin,
    StyblinskiTang,
    Rosenbrock,
    Sphere { shift: Vec<f64> },
    Custom(CustomFn),
}

/// A named objective of fixed arity with optional known optimum.
///
/// Clones share the evaluation counter.
#[derive(Clone)]
pub struct Objective {
    name: String,
    arity: usize,
    kind: Kind,
    canonical_domain: Option<SearchBox>,
    known_minimum_point: Option<Vec<f64>>,
    known_minimum_value: Option<f64>,
    evals: Arc<AtomicU64>,
}

impl fmt::Debug for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Objective")
            .field("name", &self.name)
            .field("arity", &self.arity)
            .field("evaluations", &self.evaluations())
            .finish()
    }
}

impl Objective {
    fn new(name: &str, arity: usize, kind: Kind) -> Self {
        Objective {
            name: name.to_string(),
            arity,
            kind,
            canonical_domain: None,
            known_minimum_point: None,
            known_minimum_value: None,
            evals: Arc::new(AtomicU64::new(0)),
        }
    }

    fn check_arity(arity: usize, min: usize) -> Result<()> {
        if arity < min {
            return Err(QagsError::InvalidArity {
                expected: format!(">= {min}"),
                got: arity,
            });
        }
        Ok(())
    }

    pub fn rastrigin(dim: usize) -> Result<Self> {
        Self::check_arity(dim, 1)?;
        let mut obj = Self::new("rastrigin", dim, Kind::Rastrigin);
        obj.canonical_domain = Some(SearchBox::cube(dim, -5.12, 5.12)?);
        obj.known_minimum_point = Some(vec![0.0; dim]);
        obj.known_minimum_value = Some(0.0);
        Ok(obj)
    }

    pub fn styblinski_tang(dim: usize) -> Result<Self> {
        Self::check_arity(dim, 1)?;
        let mut obj = Self::new("styblinski_tang", dim, Kind::StyblinskiTang);
        let point = vec![STYBLINSKI_TANG_ARGMIN; dim];
        obj.canonical_domain = Some(SearchBox::cube(dim, -5.0, 5.0)?);
        obj.known_minimum_value = Some(styblinski_tang(&point)?);
        obj.known_minimum_point = Some(point);
        Ok(obj)
    }

    /// Rosenbrock has no canonical domain; callers supply bounds.
    pub fn rosenbrock(dim: usize) -> Result<Self> {
        Self::check_arity(dim, 2)?;
        let mut obj = Self::new("rosenbrock", dim, Kind::Rosenbrock);
        obj.known_minimum_point = Some(vec![1.0; dim]);
        obj.known_minimum_value = Some(0.0);
        Ok(obj)
    }

    /// Sphere centred on `shift` (origin when `None`).
    pub fn sphere(dim: usize, shift: Option<Vec<f64>>) -> Result<Self> {
        Self::check_arity(dim, 1)?;
        let shift = shift.unwrap_or_else(|| vec![0.0; dim]);
        if shift.len() != dim {
            return Err(QagsError::InvalidInput(format!(
                "shift has {} components, expected {dim}",
                shift.len()
            )));
        }
        check_finite(&shift)?;
        let mut obj = Self::new(
            "sphere",
            dim,
            Kind::Sphere {
                shift: shift.clone(),
            },
        );
        obj.known_minimum_point = Some(shift);
        obj.known_minimum_value = Some(0.0);
        Ok(obj)
    }

    /// Wraps an arbitrary function. The closure must be deterministic.
    pub fn custom<F>(name: &str, dim: usize, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self::check_arity(dim, 1)?;
        Ok(Self::new(name, dim, Kind::Custom(Arc::new(f))))
    }

    /// Looks up a benchmark by registry name.
    pub fn by_name(name: &str, dim: usize, shift: Option<Vec<f64>>) -> Result<Self> {
        if shift.is_some() && name != "sphere" {
            return Err(QagsError::InvalidInput(format!(
                "a shift only applies to sphere, not `{name}`"
            )));
        }
        match name {
            "rastrigin" => Self::rastrigin(dim),
            "styblinski_tang" => Self::styblinski_tang(dim),
            "rosenbrock" => Self::rosenbrock(dim),
            "sphere" => Self::sphere(dim, shift),
            _ => Err(QagsError::UnknownFunction {
                name: name.to_string(),
                available: REGISTRY.join(", "),
            }),
        }
    }

    pub fn with_known_minimum(mut self, point: Vec<f64>, value: f64) -> Self {
        self.known_minimum_point = Some(point);
        self.known_minimum_value = Some(value);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn canonical_domain(&self) -> Option<&SearchBox> {
        self.canonical_domain.as_ref()
    }

    pub fn known_minimum_point(&self) -> Option<&[f64]> {
        self.known_minimum_point.as_deref()
    }

    pub fn known_minimum_value(&self) -> Option<f64> {
        self.known_minimum_value
    }

    /// Number of evaluations made through this objective and its clones.
    pub fn evaluations(&self) -> u64 {
        self.evals.load(Ordering::Relaxed)
    }

    pub fn reset_evaluations(&self) {
        self.evals.store(0, Ordering::Relaxed);
    }

    /// Evaluates at `x`. The result may be non-finite only for custom
    /// objectives; callers decide how to treat that.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.arity {
            return Err(QagsError::InvalidArity {
                expected: self.arity.to_string(),
                got: x.len(),
            });
        }
        self.evals.fetch_add(1, Ordering::Relaxed);
        match &self.kind {
            Kind::Rastrigin => rastrigin(x),
            Kind::StyblinskiTang => styblinski_tang(x),
            Kind::Rosenbrock => rosenbrock(x),
            Kind::Sphere { shift } => sphere(x, shift),
            Kind::Custom(f) => {
                check_finite(x)?;
                Ok(f(x))
            }
        }
    }
}
