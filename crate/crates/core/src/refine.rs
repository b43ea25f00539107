//! Bounded limited-memory quasi-Newton refinement.
//!
//! Gradients come from finite differences. Search directions are built by
//! the L-BFGS two-loop recursion over the free variables and every trial
//! point is projected back into the box, so iterates never leave it.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{QagsError, Result};
use crate::grid::SearchBox;
use crate::objective::Objective;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinerConfig {
    pub max_evals: usize,
    /// Finite-difference step relative to `max(1, |x_i|)`.
    pub gradient_step_scale: f64,
    /// Stop once the projected gradient's infinity norm falls below this.
    pub convergence_tol: f64,
    pub history_size: usize,
}

impl Default for RefinerConfig {
    fn default() -> Self {
        RefinerConfig {
            max_evals: 10_000,
            gradient_step_scale: f64::EPSILON.cbrt(),
            convergence_tol: 1e-10,
            history_size: 10,
        }
    }
}

impl RefinerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_evals == 0 || self.history_size == 0 {
            return Err(QagsError::Config(
                "max_evals and history_size must be positive".into(),
            ));
        }
        if !(self.gradient_step_scale > 0.0 && self.convergence_tol > 0.0) {
            return Err(QagsError::Config(
                "gradient_step_scale and convergence_tol must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Refinement {
    pub point: Vec<f64>,
    pub value: f64,
    pub evals: usize,
}

struct Counted<'a> {
    f: &'a Objective,
    evals: usize,
    last_feasible: Vec<f64>,
}

impl Counted<'_> {
    fn eval(&mut self, x: &[f64]) -> Result<f64> {
        self.evals += 1;
        let v = self.f.evaluate(x)?;
        if !v.is_finite() {
            return Err(QagsError::Refinement {
                last: self.last_feasible.clone(),
                value: v,
            });
        }
        Ok(v)
    }
}

/// Finite-difference gradient at `x` inside `bounds`.
///
/// Central differences where `x_i +- h_i` stays in the box, one-sided
/// otherwise. Fixed (zero-width) dimensions get a zero component. Returns
/// the gradient and the number of evaluations spent.
pub fn numerical_gradient(
    f: &Objective,
    x: &[f64],
    bounds: &SearchBox,
    step_scale: f64,
) -> Result<(Vec<f64>, usize)> {
    let mut counted = Counted {
        f,
        evals: 0,
        last_feasible: x.to_vec(),
    };
    let fx = if needs_center_value(x, bounds, step_scale) {
        Some(counted.eval(x)?)
    } else {
        None
    };
    let g = gradient(&mut counted, x, fx, bounds, step_scale)?;
    Ok((g, counted.evals))
}

fn needs_center_value(x: &[f64], bounds: &SearchBox, step_scale: f64) -> bool {
    (0..x.len()).any(|i| {
        let (l, u) = (bounds.lower()[i], bounds.upper()[i]);
        let h = step_scale * x[i].abs().max(1.0);
        l < u && !(x[i] - h >= l && x[i] + h <= u)
    })
}

fn gradient(
    counted: &mut Counted<'_>,
    x: &[f64],
    mut fx: Option<f64>,
    bounds: &SearchBox,
    step_scale: f64,
) -> Result<Vec<f64>> {
    let mut g = vec![0.0; x.len()];
    let mut probe = x.to_vec();
    for i in 0..x.len() {
        let (l, u) = (bounds.lower()[i], bounds.upper()[i]);
        if l == u {
            continue;
        }
        let h = step_scale * x[i].abs().max(1.0);
        let up = x[i] + h;
        let down = x[i] - h;
        g[i] = if down >= l && up <= u {
            probe[i] = up;
            let fp = counted.eval(&probe)?;
            probe[i] = down;
            let fm = counted.eval(&probe)?;
            (fp - fm) / (up - down)
        } else {
            let center = match fx {
                Some(v) => v,
                None => {
                    let v = counted.eval(x)?;
                    fx = Some(v);
                    v
                }
            };
            let target = if up <= u {
                up
            } else if down >= l {
                down
            } else if u - x[i] >= x[i] - l {
                u
            } else {
                l
            };
            if target == x[i] {
                0.0
            } else {
                probe[i] = target;
                let ft = counted.eval(&probe)?;
                (ft - center) / (target - x[i])
            }
        };
        probe[i] = x[i];
    }
    Ok(g)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn projected_gradient_norm(x: &[f64], g: &[f64], bounds: &SearchBox) -> f64 {
    (0..x.len())
        .map(|i| {
            let t = (x[i] - g[i]).clamp(bounds.lower()[i], bounds.upper()[i]);
            (t - x[i]).abs()
        })
        .fold(0.0, f64::max)
}

/// Variables that may move: not fixed, and not pinned at a bound by a
/// gradient pointing outward.
fn free_mask(x: &[f64], g: &[f64], bounds: &SearchBox) -> Vec<bool> {
    (0..x.len())
        .map(|i| {
            let (l, u) = (bounds.lower()[i], bounds.upper()[i]);
            !(l == u || (x[i] <= l && g[i] > 0.0) || (x[i] >= u && g[i] < 0.0))
        })
        .collect()
}

fn two_loop(g: &[f64], free: &[bool], memory: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mask = |v: &[f64]| -> Vec<f64> {
        v.iter()
            .zip(free)
            .map(|(&x, &m)| if m { x } else { 0.0 })
            .collect()
    };
    let mut q = mask(g);
    let mut alphas = Vec::with_capacity(memory.len());
    for (s, y, rho) in memory.iter().rev() {
        let a = rho * dot(&mask(s), &q);
        let ym = mask(y);
        for (qi, yi) in q.iter_mut().zip(&ym) {
            *qi -= a * yi;
        }
        alphas.push(a);
    }
    let gamma = match memory.back() {
        Some((s, y, _)) => dot(s, y) / dot(y, y),
        None => 1.0 / dot(g, g).sqrt().max(1.0),
    };
    for qi in &mut q {
        *qi *= gamma;
    }
    for ((s, y, rho), a) in memory.iter().zip(alphas.into_iter().rev()) {
        let b = rho * dot(&mask(y), &q);
        let sm = mask(s);
        for (qi, si) in q.iter_mut().zip(&sm) {
            *qi += (a - b) * si;
        }
    }
    q.into_iter().map(|v| -v).collect()
}

/// Minimizes `f` over `bounds` starting from `start` (clamped into the box).
///
/// The returned point is inside the box and its value never exceeds the
/// value at the clamped start.
pub fn refine(
    f: &Objective,
    bounds: &SearchBox,
    start: &[f64],
    cfg: &RefinerConfig,
) -> Result<Refinement> {
    cfg.validate()?;
    if start.len() != bounds.dim() {
        return Err(QagsError::InvalidArity {
            expected: bounds.dim().to_string(),
            got: start.len(),
        });
    }
    let mut x = bounds.clamp(start);
    let mut counted = Counted {
        f,
        evals: 0,
        last_feasible: x.clone(),
    };
    let mut fx = counted.eval(&x)?;
    if bounds.is_degenerate() {
        return Ok(Refinement {
            point: x,
            value: fx,
            evals: counted.evals,
        });
    }

    let n = x.len();
    let mut memory: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut g = gradient(&mut counted, &x, Some(fx), bounds, cfg.gradient_step_scale)?;
    let grad_cost = 2 * n;

    loop {
        if projected_gradient_norm(&x, &g, bounds) < cfg.convergence_tol {
            break;
        }
        if counted.evals + grad_cost + 1 > cfg.max_evals {
            break;
        }
        let free = free_mask(&x, &g, bounds);
        let mut direction = two_loop(&g, &free, &memory);
        if dot(&g, &direction) >= 0.0 {
            memory.clear();
            direction = two_loop(&g, &free, &memory);
        }

        let mut accepted = None;
        let mut alpha = 1.0;
        while counted.evals < cfg.max_evals {
            let trial: Vec<f64> = bounds.clamp(
                &x.iter()
                    .zip(&direction)
                    .map(|(xi, di)| xi + alpha * di)
                    .collect::<Vec<_>>(),
            );
            if trial == x {
                break;
            }
            let ft = counted.eval(&trial)?;
            let step: Vec<f64> = trial.iter().zip(&x).map(|(a, b)| a - b).collect();
            if ft <= fx + 1e-4 * dot(&g, &step) && ft <= fx {
                accepted = Some((trial, ft, step));
                break;
            }
            alpha *= 0.5;
        }

        let Some((x_new, f_new, s)) = accepted else {
            if memory.is_empty() {
                break;
            }
            memory.clear();
            continue;
        };

        x = x_new;
        fx = f_new;
        counted.last_feasible.clone_from(&x);
        if counted.evals + grad_cost > cfg.max_evals {
            break;
        }
        let g_new = gradient(&mut counted, &x, Some(fx), bounds, cfg.gradient_step_scale)?;
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > f64::EPSILON * dot(&y, &y) && sy > 0.0 {
            if memory.len() == cfg.history_size {
                memory.pop_front();
            }
            memory.push_back((s, y, 1.0 / sy));
        }
        g = g_new;
    }

    Ok(Refinement {
        point: x,
        value: fx,
        evals: counted.evals,
    })
}
