//! Adaptive grid search: evaluate a dense uniform grid, recentre a shrunken
//! box on the best point, repeat, then refine.

use serde::{Deserialize, Serialize};

use crate::contraction::Verdict;
use crate::driver::{
    abs_error, at_iteration, check_arity, finish, Best, IterationRecord, Method, RunReport,
};
use crate::error::{QagsError, Result};
use crate::grid::SearchBox;
use crate::objective::Objective;
use crate::refine::RefinerConfig;

/// Bytes per stored function value.
pub const BYTES_PER_VALUE: u64 = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgsConfig {
    pub points_per_dim: u64,
    /// Upper bound on grid points per iteration.
    pub budget_points: u64,
    pub shrink_factor: f64,
    pub max_iterations: usize,
    pub delta: f64,
    pub refiner: RefinerConfig,
}

impl Default for AgsConfig {
    fn default() -> Self {
        AgsConfig {
            points_per_dim: 32,
            budget_points: 1_000_000,
            shrink_factor: 0.5,
            max_iterations: 10,
            delta: 1e-6,
            refiner: RefinerConfig::default(),
        }
    }
}

/// Largest `m` with `m^d <= budget`.
fn integer_root(budget: u64, d: u32) -> u64 {
    let mut m = (budget as f64).powf(1.0 / d as f64).round() as u64 + 1;
    while m > 0 && m.checked_pow(d).is_none_or(|p| p > budget) {
        m -= 1;
    }
    m
}

impl AgsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.points_per_dim < 2 || self.budget_points == 0 || self.max_iterations == 0 {
            return Err(QagsError::Config(
                "points_per_dim must be >= 2; budget_points and max_iterations positive".into(),
            ));
        }
        if !(self.shrink_factor > 0.0 && self.shrink_factor < 1.0) {
            return Err(QagsError::Config(format!(
                "shrink_factor must lie in (0, 1), got {}",
                self.shrink_factor
            )));
        }
        if self.delta.is_nan() || self.delta <= 0.0 {
            return Err(QagsError::Config("delta must be positive".into()));
        }
        self.refiner.validate()
    }

    /// Points per dimension actually used in `dim` dimensions.
    pub fn effective_points_per_dim(&self, dim: usize) -> Result<u64> {
        let m = self
            .points_per_dim
            .min(integer_root(self.budget_points, dim as u32))
            .max(2);
        match m.checked_pow(dim as u32) {
            Some(total) if total <= self.budget_points => Ok(m),
            _ => Err(QagsError::Config(format!(
                "a {dim}-dimensional grid with 2 points per dimension exceeds the budget of {}",
                self.budget_points
            ))),
        }
    }
}

fn coordinate(l: f64, u: f64, j: u64, m: u64) -> f64 {
    if j == 0 || l == u {
        l
    } else if j == m - 1 {
        u
    } else {
        l + j as f64 * ((u - l) / (m - 1) as f64)
    }
}

/// Runs the adaptive grid search baseline.
pub fn run_ags(f: &Objective, bounds: &SearchBox, cfg: &AgsConfig) -> Result<RunReport> {
    check_arity(f, bounds)?;
    cfg.validate()?;
    let d = bounds.dim();
    let m = cfg.effective_points_per_dim(d)?;
    let total = m.pow(d as u32);

    let mut current = bounds.clone();
    let mut best = Best::empty();
    let mut iterations = Vec::new();
    let mut evals = 0u64;
    let mut point = vec![0.0; d];

    for k in 1.. {
        let wrap = at_iteration(k);
        let mut grid_best = Best::empty();
        for flat in 0..total {
            let mut rest = flat;
            for i in (0..d).rev() {
                point[i] = coordinate(current.lower()[i], current.upper()[i], rest % m, m);
                rest /= m;
            }
            let v = f.evaluate(&point).map_err(&wrap)?;
            if !v.is_finite() {
                return Err(wrap(QagsError::Evaluation {
                    point: point.clone(),
                }));
            }
            grid_best.offer(|| point.clone(), v);
        }
        evals += total;
        best.offer(|| grid_best.point.clone(), grid_best.value);

        let centre = &grid_best.point;
        let lower: Vec<f64> = (0..d)
            .map(|i| {
                let half = cfg.shrink_factor * 0.5 * (current.upper()[i] - current.lower()[i]);
                (centre[i] - half).max(current.lower()[i])
            })
            .collect();
        let upper: Vec<f64> = (0..d)
            .map(|i| {
                let half = cfg.shrink_factor * 0.5 * (current.upper()[i] - current.lower()[i]);
                (centre[i] + half).min(current.upper()[i])
            })
            .collect();
        let next = SearchBox::new(lower, upper).map_err(&wrap)?;
        let verdict = if next.max_width() < cfg.delta {
            Verdict::WidthFloor
        } else if k >= cfg.max_iterations {
            Verdict::MaxIterations
        } else {
            Verdict::Continue
        };
        iterations.push(IterationRecord {
            k,
            bounds_before: current.clone(),
            bounds_after: next.clone(),
            selected_count: 1,
            entropy_fraction: None,
            best_point_so_far: best.point.clone(),
            best_value_so_far: best.value,
            verdict,
        });
        current = next;
        if verdict.is_stop() {
            break;
        }
    }

    let starts = [current.clamp(&best.point)];
    let (found_point, found_value, refine_evals) =
        finish(f, &current, &starts, &best, &cfg.refiner)?;
    evals += refine_evals;

    Ok(RunReport {
        method: Method::Ags,
        function: f.name().to_string(),
        dim: d,
        abs_error: abs_error(f, found_value),
        known_minimum_value: f.known_minimum_value(),
        found_point,
        found_value,
        iterations,
        total_f_evals: evals,
        grid_points_per_iteration: total,
        peak_model_bytes: total * BYTES_PER_VALUE,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_roots() {
        assert_eq!(integer_root(1_000_000, 1), 1_000_000);
        assert_eq!(integer_root(1_000_000, 2), 1000);
        assert_eq!(integer_root(1_000_000, 5), 15);
        assert_eq!(integer_root(1_000_000, 10), 3);
        assert_eq!(integer_root(1_048_576, 10), 4);
        assert_eq!(integer_root(1_000_000, 20), 1);
    }

    #[test]
    fn effective_density() {
        let cfg = AgsConfig::default();
        assert_eq!(cfg.effective_points_per_dim(2).unwrap(), 32);
        assert_eq!(cfg.effective_points_per_dim(5).unwrap(), 15);
        assert_eq!(cfg.effective_points_per_dim(7).unwrap(), 7);
        assert_eq!(cfg.effective_points_per_dim(8).unwrap(), 5);
        assert_eq!(cfg.effective_points_per_dim(10).unwrap(), 3);
        assert!(cfg.effective_points_per_dim(20).is_err());
        for d in 1..=19 {
            let m = cfg.effective_points_per_dim(d).unwrap();
            assert!(m.pow(d as u32) <= cfg.budget_points);
        }
    }

    #[test]
    fn sphere_two_dims() {
        let f = Objective::sphere(2, None).unwrap();
        let b = SearchBox::cube(2, -5.0, 5.0).unwrap();
        let r = run_ags(&f, &b, &AgsConfig::default()).unwrap();
        assert!(r.found_value <= 1e-8, "{}", r.found_value);
        assert_eq!(r.method, Method::Ags);
        assert_eq!(r.peak_model_bytes, 32 * 32 * 8);
    }

    #[test]
    fn sphere_five_dims() {
        let f = Objective::sphere(5, None).unwrap();
        let b = SearchBox::cube(5, -5.0, 5.0).unwrap();
        let r = run_ags(&f, &b, &AgsConfig::default()).unwrap();
        assert!(r.found_value <= 0.01);
    }

    #[test]
    fn constant_function_shrinks_to_width_floor() {
        let f = Objective::custom("flat", 2, |_| 1.0).unwrap();
        let b = SearchBox::cube(2, -1.0, 1.0).unwrap();
        let cfg = AgsConfig {
            max_iterations: 100,
            ..Default::default()
        };
        let r = run_ags(&f, &b, &cfg).unwrap();
        let last = r.iterations.last().unwrap();
        assert_eq!(last.verdict, Verdict::WidthFloor);
        // Ties resolve to the lowest index, the lower corner.
        assert_eq!(last.bounds_after.lower(), &[-1.0, -1.0]);
        // Anchored at a corner, each step keeps half of a half-width.
        for w in r.iterations.windows(2) {
            let ratio = w[1].bounds_after.max_width() / w[0].bounds_after.max_width();
            assert!((ratio - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn nested_boxes() {
        let f = Objective::rastrigin(3).unwrap();
        let b = SearchBox::cube(3, -5.12, 5.12).unwrap();
        let r = run_ags(&f, &b, &AgsConfig::default()).unwrap();
        for it in &r.iterations {
            assert!(it.bounds_before.contains_box(&it.bounds_after));
            assert!(it.bounds_after.volume() <= it.bounds_before.volume());
        }
        assert!(b.contains(&r.found_point));
    }
}
