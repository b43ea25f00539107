//! High-probability region selection, bound contraction and stopping rules.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{QagsError, Result};
use crate::grid::{GridSpec, SearchBox};
use crate::quantum::QuantumDistribution;

pub const DEFAULT_QUANTILE: f64 = 0.75;

/// Basis states whose probability reaches the quantile threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionSelection {
    pub quantile: f64,
    /// Sorted ascending, never empty.
    pub selected_indices: Vec<u64>,
    pub threshold_probability: f64,
}

/// Linear-interpolated empirical quantile of `values` (`q` in `[0, 1]`).
pub fn empirical_quantile(values: &[f64], q: f64) -> f64 {
    assert!(!values.is_empty());
    let mut scratch = values.to_vec();
    let h = q * (scratch.len() - 1) as f64;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    let (_, &mut below, rest) = scratch.select_nth_unstable_by(lo, f64::total_cmp);
    if frac == 0.0 || rest.is_empty() {
        return below;
    }
    let above = rest.iter().copied().fold(f64::INFINITY, f64::min);
    below + frac * (above - below)
}

/// Selects `{x : P(x) >= P_q, P(x) > 0}`, always including the most probable
/// state and the grid minimiser.
pub fn select_region(dist: &QuantumDistribution, quantile: f64) -> Result<RegionSelection> {
    if !(quantile > 0.0 && quantile < 1.0) {
        return Err(QagsError::Config(format!(
            "quantile must lie in (0, 1), got {quantile}"
        )));
    }
    let probs = dist.probabilities();
    let threshold = empirical_quantile(probs, quantile);
    let argmax = dist.argmax();
    debug_assert!(probs[argmax as usize] >= threshold);
    let mut selected: Vec<u64> = probs
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > 0.0 && p >= threshold)
        .map(|(i, _)| i as u64)
        .collect();
    for forced in [argmax, dist.f_min_index()] {
        if let Err(pos) = selected.binary_search(&forced) {
            selected.insert(pos, forced);
        }
    }
    Ok(RegionSelection {
        quantile,
        selected_indices: selected,
        threshold_probability: threshold,
    })
}

/// Tight box around `points`, clamped into `bounds`.
pub fn enclosing_box<'a, I>(bounds: &SearchBox, points: I) -> Result<SearchBox>
where
    I: IntoIterator<Item = &'a [f64]>,
{
    let d = bounds.dim();
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    let mut any = false;
    for p in points {
        if p.len() != d {
            return Err(QagsError::InvalidArity {
                expected: d.to_string(),
                got: p.len(),
            });
        }
        any = true;
        for i in 0..d {
            lo[i] = lo[i].min(p[i]);
            hi[i] = hi[i].max(p[i]);
        }
    }
    if !any {
        return Err(QagsError::InvalidInput("empty region selection".into()));
    }
    let lower = (0..d).map(|i| bounds.lower()[i].max(lo[i])).collect();
    let upper = (0..d).map(|i| bounds.upper()[i].min(hi[i])).collect();
    SearchBox::new(lower, upper)
}

/// Hyperrectangle enclosing the selected grid points.
pub fn contract_bounds(spec: &GridSpec, selection: &RegionSelection) -> Result<SearchBox> {
    let points = selection
        .selected_indices
        .iter()
        .map(|&k| spec.decode(k))
        .collect::<Result<Vec<_>>>()?;
    enclosing_box(spec.bounds(), points.iter().map(Vec::as_slice))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TerminationPolicy {
    /// Stop once the widest dimension is narrower than this.
    pub delta: f64,
    pub k_max: usize,
    /// Stop once the entropy fraction drops below this.
    pub entropy_floor: f64,
}

impl Default for TerminationPolicy {
    fn default() -> Self {
        TerminationPolicy {
            delta: 1e-6,
            k_max: 10,
            entropy_floor: 0.01,
        }
    }
}

impl TerminationPolicy {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(QagsError::Config(format!(
                "delta must be positive, got {}",
                self.delta
            )));
        }
        if self.k_max == 0 {
            return Err(QagsError::Config("k_max must be at least 1".into()));
        }
        if !(self.entropy_floor > 0.0 && self.entropy_floor < 1.0) {
            return Err(QagsError::Config(format!(
                "entropy_floor must lie in (0, 1), got {}",
                self.entropy_floor
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Continue,
    WidthFloor,
    MaxIterations,
    Concentrated,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Continue => "continue",
            Verdict::WidthFloor => "width_floor",
            Verdict::MaxIterations => "max_iterations",
            Verdict::Concentrated => "concentrated",
        }
    }

    pub fn is_stop(self) -> bool {
        self != Verdict::Continue
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Checks width, then iteration count, then concentration.
pub fn should_terminate(
    _box_prev: &SearchBox,
    box_next: &SearchBox,
    dist: &QuantumDistribution,
    k: usize,
    policy: &TerminationPolicy,
) -> Verdict {
    if box_next.max_width() < policy.delta {
        Verdict::WidthFloor
    } else if k >= policy.k_max {
        Verdict::MaxIterations
    } else if dist.entropy_fraction() < policy.entropy_floor {
        Verdict::Concentrated
    } else {
        Verdict::Continue
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::EncodingLaw;

    fn spec(d: usize, n: u32, lo: f64, hi: f64) -> GridSpec {
        GridSpec::new(SearchBox::cube(d, lo, hi).unwrap(), n).unwrap()
    }

    fn brute_quantile(values: &[f64], q: f64) -> f64 {
        let mut s = values.to_vec();
        s.sort_by(f64::total_cmp);
        let h = q * (s.len() - 1) as f64;
        let i = h.floor() as usize;
        if i + 1 >= s.len() {
            return s[i];
        }
        s[i] + (h - i as f64) * (s[i + 1] - s[i])
    }

    #[test]
    fn quantile_matches_sorted_oracle() {
        let p = [0.4, 0.3, 0.2, 0.1];
        assert!((brute_quantile(&p, 0.75) - 0.325).abs() < 1e-15);
        assert_eq!(empirical_quantile(&p, 0.75), brute_quantile(&p, 0.75));
        let v: Vec<f64> = (0..37).map(|i| ((i * 7919) % 101) as f64 / 3.0).collect();
        for q in [0.0, 0.1, 0.5, 0.75, 0.9, 1.0] {
            assert_eq!(empirical_quantile(&v, q), brute_quantile(&v, q));
        }
    }

    #[test]
    fn selection_examples() {
        let s = spec(1, 2, 0.0, 3.0);
        let dist =
            QuantumDistribution::from_probabilities(s.clone(), vec![0.4, 0.3, 0.2, 0.1]).unwrap();
        let sel = select_region(&dist, 0.75).unwrap();
        assert!((sel.threshold_probability - 0.325).abs() < 1e-15);
        assert_eq!(sel.selected_indices, vec![0]);

        let uniform = QuantumDistribution::from_probabilities(s.clone(), vec![0.25; 4]).unwrap();
        assert_eq!(
            select_region(&uniform, 0.75).unwrap().selected_indices,
            vec![0, 1, 2, 3]
        );

        let big = spec(2, 2, 0.0, 3.0);
        let mut mass = vec![0.0; 16];
        mass[9] = 1.0;
        let point = QuantumDistribution::from_probabilities(big, mass).unwrap();
        assert_eq!(
            select_region(&point, 0.75).unwrap().selected_indices,
            vec![9]
        );

        assert!(select_region(&uniform, 1.0).is_err());
        assert!(select_region(&uniform, 0.0).is_err());
    }

    #[test]
    fn worked_bound_update() {
        let global = SearchBox::new(vec![-5.0, -10.0], vec![5.0, 10.0]).unwrap();
        let pts = [vec![-2.1, 7.2], vec![0.3, 3.5], vec![1.8, 5.0]];
        let b = enclosing_box(&global, pts.iter().map(Vec::as_slice)).unwrap();
        assert_eq!(b.lower(), &[-2.1, 3.5]);
        assert_eq!(b.upper(), &[1.8, 7.2]);
        // Points outside the bounds are clamped.
        let wide = [vec![-7.0, 0.0], vec![1.0, 12.0]];
        let c = enclosing_box(&global, wide.iter().map(Vec::as_slice)).unwrap();
        assert_eq!(c.lower(), &[-5.0, 0.0]);
        assert_eq!(c.upper(), &[1.0, 10.0]);
        assert!(enclosing_box(&global, std::iter::empty()).is_err());
    }

    #[test]
    fn contract_full_and_single() {
        let s = spec(2, 2, -1.0, 2.0);
        let all = RegionSelection {
            quantile: 0.75,
            selected_indices: (0..16).collect(),
            threshold_probability: 0.0,
        };
        assert_eq!(&contract_bounds(&s, &all).unwrap(), s.bounds());
        let one = RegionSelection {
            quantile: 0.75,
            selected_indices: vec![6],
            threshold_probability: 0.0,
        };
        let b = contract_bounds(&s, &one).unwrap();
        let p = s.decode(6).unwrap();
        assert_eq!(b.lower(), p.as_slice());
        assert_eq!(b.upper(), p.as_slice());
    }

    #[test]
    fn minimiser_is_retained() {
        let s = spec(2, 3, -4.0, 4.0);
        let values: Vec<f64> = (0..64u64)
            .map(|k| {
                let p = s.decode(k).unwrap();
                (p[0] - 1.0).powi(2) + (p[1] + 2.0).powi(2)
            })
            .collect();
        let dist =
            QuantumDistribution::from_values(s.clone(), &values, EncodingLaw::default(), None)
                .unwrap();
        let sel = select_region(&dist, 0.75).unwrap();
        assert!(sel.selected_indices.contains(&dist.f_min_index()));
        let b = contract_bounds(&s, &sel).unwrap();
        assert!(b.contains(&s.decode(dist.f_min_index()).unwrap()));
        assert!(s.bounds().contains_box(&b));
        assert!(b.volume() <= s.bounds().volume());
    }

    #[test]
    fn termination_order() {
        let policy = TerminationPolicy::default();
        let s = spec(1, 2, 0.0, 1.0);
        let wide = SearchBox::cube(2, -1.0, 1.0).unwrap();
        let tiny = SearchBox::cube(2, 0.0, 1e-9).unwrap();
        let uniform = QuantumDistribution::from_probabilities(s.clone(), vec![0.25; 4]).unwrap();
        let point = QuantumDistribution::from_probabilities(s, vec![0.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(
            should_terminate(&wide, &tiny, &uniform, 1, &policy),
            Verdict::WidthFloor
        );
        assert_eq!(
            should_terminate(&wide, &tiny, &point, 10, &policy),
            Verdict::WidthFloor
        );
        assert_eq!(
            should_terminate(&wide, &wide, &uniform, 10, &policy),
            Verdict::MaxIterations
        );
        assert_eq!(
            should_terminate(&wide, &wide, &point, 3, &policy),
            Verdict::Concentrated
        );
        assert_eq!(
            should_terminate(&wide, &wide, &uniform, 3, &policy),
            Verdict::Continue
        );
    }

    #[test]
    fn verdict_labels() {
        assert_eq!(
            serde_json::to_string(&Verdict::WidthFloor).unwrap(),
            "\"width_floor\""
        );
        assert_eq!(Verdict::MaxIterations.to_string(), "max_iterations");
        assert_eq!(Verdict::Concentrated.as_str(), "concentrated");
        assert_eq!(Verdict::Continue.as_str(), "continue");
    }

    #[test]
    fn policy_validation() {
        assert!(TerminationPolicy::default().validate().is_ok());
        let bad = TerminationPolicy {
            entropy_floor: 1.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = TerminationPolicy {
            k_max: 0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
