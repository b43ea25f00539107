//! The full search loop: grid, encode, measure, select, contract, repeat,
//! then refine inside the final box.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::contraction::{
    contract_bounds, select_region, should_terminate, TerminationPolicy, Verdict, DEFAULT_QUANTILE,
};
use crate::error::{QagsError, Result};
use crate::grid::{GridSpec, SearchBox, DEFAULT_MAX_QUBITS};
use crate::objective::Objective;
use crate::quantum::{argmin, evaluate_grid, sample_with_rng, EncodingLaw, QuantumDistribution};
use crate::refine::{refine, RefinerConfig};

/// Bytes per basis state held by the simulated register: one amplitude and
/// one probability, both 8-byte reals.
pub const BYTES_PER_AMPLITUDE: u64 = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QagsConfig {
    pub qubits_per_dim: u32,
    pub quantile: f64,
    pub law: EncodingLaw,
    /// 0 reads probabilities exactly.
    pub shots: u64,
    pub seed: u64,
    pub termination: TerminationPolicy,
    pub refiner: RefinerConfig,
    /// Ceiling on `qubits_per_dim * dim`.
    pub max_qubits: u32,
}

impl QagsConfig {
    pub fn new(qubits_per_dim: u32) -> Self {
        QagsConfig {
            qubits_per_dim,
            quantile: DEFAULT_QUANTILE,
            law: EncodingLaw::default(),
            shots: 0,
            seed: 0,
            termination: TerminationPolicy::default(),
            refiner: RefinerConfig::default(),
            max_qubits: DEFAULT_MAX_QUBITS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.qubits_per_dim == 0 {
            return Err(QagsError::Config(
                "qubits_per_dim must be at least 1".into(),
            ));
        }
        if !(self.quantile > 0.0 && self.quantile < 1.0) {
            return Err(QagsError::Config(format!(
                "quantile must lie in (0, 1), got {}",
                self.quantile
            )));
        }
        self.termination.validate()?;
        self.refiner.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Qags,
    Ags,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Qags => "qags",
            Method::Ags => "ags",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: usize,
    pub bounds_before: SearchBox,
    pub bounds_after: SearchBox,
    pub selected_count: usize,
    /// `None` for methods without a measurement distribution.
    pub entropy_fraction: Option<f64>,
    pub best_point_so_far: Vec<f64>,
    pub best_value_so_far: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub method: Method,
    pub function: String,
    pub dim: usize,
    pub found_point: Vec<f64>,
    pub found_value: f64,
    pub known_minimum_value: Option<f64>,
    pub abs_error: Option<f64>,
    pub iterations: Vec<IterationRecord>,
    pub total_f_evals: u64,
    pub grid_points_per_iteration: u64,
    pub peak_model_bytes: u64,
}

impl RunReport {
    pub fn initial_bounds(&self) -> &SearchBox {
        &self.iterations[0].bounds_before
    }

    pub fn final_bounds(&self) -> &SearchBox {
        &self
            .iterations
            .last()
            .expect("at least one iteration")
            .bounds_after
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Tracks the lowest value seen, keeping the first point on ties.
#[derive(Debug, Clone)]
pub(crate) struct Best {
    pub point: Vec<f64>,
    pub value: f64,
}

impl Best {
    pub fn empty() -> Self {
        Best {
            point: Vec::new(),
            value: f64::INFINITY,
        }
    }

    pub fn offer(&mut self, point: impl FnOnce() -> Vec<f64>, value: f64) {
        if value < self.value {
            self.point = point();
            self.value = value;
        }
    }
}

pub(crate) fn check_arity(f: &Objective, bounds: &SearchBox) -> Result<()> {
    if f.arity() != bounds.dim() {
        return Err(QagsError::InvalidArity {
            expected: bounds.dim().to_string(),
            got: f.arity(),
        });
    }
    Ok(())
}

pub(crate) fn at_iteration(k: usize) -> impl Fn(QagsError) -> QagsError {
    move |e| QagsError::Iteration {
        iteration: k,
        source: Box::new(e),
    }
}

/// Refines inside `final_box` from each start and keeps the lowest result.
/// Falls back to `best` when no refined point improves on it.
pub(crate) fn finish(
    f: &Objective,
    final_box: &SearchBox,
    starts: &[Vec<f64>],
    best: &Best,
    cfg: &RefinerConfig,
) -> Result<(Vec<f64>, f64, u64)> {
    let mut evals = 0u64;
    let mut point = best.point.clone();
    let mut value = best.value;
    for start in starts {
        let r = refine(f, final_box, start, cfg)?;
        evals += r.evals as u64;
        if r.value < value {
            point = r.point;
            value = r.value;
        }
    }
    Ok((point, value, evals))
}

pub(crate) fn abs_error(f: &Objective, value: f64) -> Option<f64> {
    f.known_minimum_value().map(|known| (value - known).abs())
}

/// Runs the quantum adaptive search on `f` over `initial_bounds`.
///
/// With `shots == 0` the run is fully deterministic. Refinement starts from
/// the best grid point seen (clamped into the final box) and from the final
/// box centre; the lower result wins.
pub fn run(f: &Objective, initial_bounds: &SearchBox, cfg: &QagsConfig) -> Result<RunReport> {
    check_arity(f, initial_bounds)?;
    cfg.validate()?;
    // Fails early on an oversized register.
    let first =
        GridSpec::with_max_qubits(initial_bounds.clone(), cfg.qubits_per_dim, cfg.max_qubits)?;
    let grid_points = first.total_points();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut bounds = initial_bounds.clone();
    let mut best = Best::empty();
    let mut iterations = Vec::new();
    let mut evals = 0u64;

    for k in 1.. {
        let wrap = at_iteration(k);
        let spec = GridSpec::with_max_qubits(bounds.clone(), cfg.qubits_per_dim, cfg.max_qubits)
            .map_err(&wrap)?;
        let values = evaluate_grid(&spec, f).map_err(&wrap)?;
        evals += values.len() as u64;
        let i = argmin(&values);
        best.offer(
            || spec.decode(i as u64).expect("index within grid"),
            values[i],
        );

        let mut dist = QuantumDistribution::from_values(spec.clone(), &values, cfg.law, None)
            .map_err(&wrap)?;
        drop(values);
        if cfg.shots > 0 {
            dist = sample_with_rng(&dist, cfg.shots, &mut rng);
        }
        let selection = select_region(&dist, cfg.quantile).map_err(&wrap)?;
        let next = contract_bounds(&spec, &selection).map_err(&wrap)?;
        let verdict = should_terminate(&bounds, &next, &dist, k, &cfg.termination);
        iterations.push(IterationRecord {
            k,
            bounds_before: bounds.clone(),
            bounds_after: next.clone(),
            selected_count: selection.selected_indices.len(),
            entropy_fraction: Some(dist.entropy_fraction()),
            best_point_so_far: best.point.clone(),
            best_value_so_far: best.value,
            verdict,
        });
        bounds = next;
        if verdict.is_stop() {
            break;
        }
    }

    let starts = [bounds.clamp(&best.point), bounds.centre()];
    let (found_point, found_value, refine_evals) =
        finish(f, &bounds, &starts, &best, &cfg.refiner)?;
    evals += refine_evals;

    Ok(RunReport {
        method: Method::Qags,
        function: f.name().to_string(),
        dim: f.arity(),
        abs_error: abs_error(f, found_value),
        known_minimum_value: f.known_minimum_value(),
        found_point,
        found_value,
        iterations,
        total_f_evals: evals,
        grid_points_per_iteration: grid_points,
        peak_model_bytes: grid_points * BYTES_PER_AMPLITUDE,
    })
}

/// Initial box followed by the box after each iteration.
pub fn trace_boxes(report: &RunReport) -> Vec<SearchBox> {
    let mut boxes = Vec::with_capacity(report.iterations.len() + 1);
    if let Some(first) = report.iterations.first() {
        boxes.push(first.bounds_before.clone());
    }
    boxes.extend(report.iterations.iter().map(|r| r.bounds_after.clone()));
    boxes
}

#[derive(Serialize)]
struct TraceLine<'a> {
    k: usize,
    lower: &'a [f64],
    upper: &'a [f64],
}

/// One JSON object per box: `{"k": .., "lower": [..], "upper": [..]}`.
pub fn trace_jsonl(report: &RunReport) -> String {
    let mut out = String::new();
    for (k, b) in trace_boxes(report).iter().enumerate() {
        let line = TraceLine {
            k,
            lower: b.lower(),
            upper: b.upper(),
        };
        out.push_str(&serde_json::to_string(&line).expect("trace line serializes"));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_run_is_nested_and_converges() {
        let f = Objective::sphere(2, None).unwrap();
        let b = SearchBox::cube(2, -5.0, 5.0).unwrap();
        let report = run(&f, &b, &QagsConfig::new(4)).unwrap();
        assert!(report.found_value < 1e-12);
        let boxes = trace_boxes(&report);
        assert_eq!(boxes.len(), report.iterations.len() + 1);
        for w in boxes.windows(2) {
            assert!(w[0].contains_box(&w[1]));
        }
        for w in report.iterations.windows(2) {
            assert!(w[1].best_value_so_far <= w[0].best_value_so_far);
        }
        assert_eq!(report.grid_points_per_iteration, 256);
        assert_eq!(report.peak_model_bytes, 256 * 16);
        assert_eq!(report.abs_error, Some(report.found_value));
    }

    #[test]
    fn single_iteration_trace() {
        let f = Objective::sphere(2, None).unwrap();
        let b = SearchBox::cube(2, -5.0, 5.0).unwrap();
        let mut cfg = QagsConfig::new(3);
        cfg.termination.k_max = 1;
        let report = run(&f, &b, &cfg).unwrap();
        assert_eq!(report.iterations.len(), 1);
        assert_eq!(report.iterations[0].verdict, Verdict::MaxIterations);
        assert_eq!(trace_boxes(&report).len(), 2);
        let jsonl = trace_jsonl(&report);
        let lines: Vec<&str> = jsonl.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[0].starts_with("{\"k\":0,\"lower\":[-5.0,-5.0],\"upper\":[5.0,5.0]}"));
    }

    #[test]
    fn deterministic_with_and_without_shots() {
        let f = Objective::rastrigin(2).unwrap();
        let b = SearchBox::cube(2, -5.12, 5.12).unwrap();
        let mut cfg = QagsConfig::new(4);
        assert_eq!(run(&f, &b, &cfg).unwrap(), run(&f, &b, &cfg).unwrap());
        cfg.shots = 500;
        cfg.seed = 11;
        assert_eq!(run(&f, &b, &cfg).unwrap(), run(&f, &b, &cfg).unwrap());
    }

    #[test]
    fn errors_carry_iteration() {
        let f = Objective::custom("hole", 1, |x| if x[0] > 0.9 { f64::NAN } else { x[0] }).unwrap();
        let b = SearchBox::cube(1, 0.0, 1.0).unwrap();
        match run(&f, &b, &QagsConfig::new(3)) {
            Err(QagsError::Iteration {
                iteration: 1,
                source,
            }) => {
                assert!(matches!(*source, QagsError::Evaluation { .. }))
            }
            other => panic!("unexpected {other:?}"),
        }
        let g = Objective::sphere(3, None).unwrap();
        assert!(run(&g, &b, &QagsConfig::new(3)).is_err());
        let wide = SearchBox::cube(8, -1.0, 1.0).unwrap();
        let h = Objective::sphere(8, None).unwrap();
        assert!(matches!(
            run(&h, &wide, &QagsConfig::new(4)),
            Err(QagsError::Config(_))
        ));
    }

    #[test]
    fn report_json_round_trips() {
        let f = Objective::styblinski_tang(2).unwrap();
        let b = SearchBox::cube(2, -5.0, 5.0).unwrap();
        let report = run(&f, &b, &QagsConfig::new(3)).unwrap();
        let back: RunReport = serde_json::from_str(&report.to_json()).unwrap();
        assert_eq!(back, report);
        assert!(report.to_json().contains("\"method\": \"qags\""));
    }
}
