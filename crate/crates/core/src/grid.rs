//! Search boxes and the uniform qubit grid.
//!
//! A register of `n * d` qubits addresses `2^(n*d)` basis states. Each basis
//! state index is split into `d` groups of `n` bits, dimension 0 in the most
//! significant group, and group `j` maps to `l_i + j (u_i - l_i) / (2^n - 1)`.

use serde::ser::SerializeSeq;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{QagsError, Result};

/// Default ceiling on `n * d`, about 10^9 amplitudes.
pub const DEFAULT_MAX_QUBITS: u32 = 30;

/// Closed axis-aligned hyperrectangle.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchBox {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl SearchBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(QagsError::InvalidInput(format!(
                "lower has {} entries, upper has {}",
                lower.len(),
                upper.len()
            )));
        }
        if lower.is_empty() {
            return Err(QagsError::InvalidInput(
                "search box needs at least one dimension".into(),
            ));
        }
        for (i, (&l, &u)) in lower.iter().zip(&upper).enumerate() {
            if !l.is_finite() || !u.is_finite() {
                return Err(QagsError::InvalidInput(format!("bound {i} is not finite")));
            }
            if l > u {
                return Err(QagsError::InvalidInput(format!(
                    "bound {i}: lower {l} exceeds upper {u}"
                )));
            }
        }
        Ok(SearchBox { lower, upper })
    }

    /// `[lo, hi]^dim`.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn widths(&self) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| u - l)
            .collect()
    }

    pub fn max_width(&self) -> f64 {
        self.widths().into_iter().fold(0.0, f64::max)
    }

    pub fn volume(&self) -> f64 {
        self.widths().into_iter().product()
    }

    pub fn centre(&self) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| l + 0.5 * (u - l))
            .collect()
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        point.len() == self.dim()
            && point
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(&x, (&l, &u))| l <= x && x <= u)
    }

    /// True when `inner` lies inside `self` in every dimension.
    pub fn contains_box(&self, inner: &SearchBox) -> bool {
        inner.dim() == self.dim()
            && (0..self.dim())
                .all(|i| self.lower[i] <= inner.lower[i] && inner.upper[i] <= self.upper[i])
    }

    pub fn clamp(&self, point: &[f64]) -> Vec<f64> {
        point
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(&x, (&l, &u))| x.max(l).min(u))
            .collect()
    }

    pub fn is_degenerate(&self) -> bool {
        self.lower.iter().zip(&self.upper).all(|(l, u)| l == u)
    }
}

impl Serialize for SearchBox {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.dim()))?;
        for (l, u) in self.lower.iter().zip(&self.upper) {
            seq.serialize_element(&[*l, *u])?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for SearchBox {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let pairs: Vec<[f64; 2]> = Vec::deserialize(deserializer)?;
        let (lower, upper) = pairs.into_iter().map(|[l, u]| (l, u)).unzip();
        SearchBox::new(lower, upper).map_err(serde::de::Error::custom)
    }
}

/// Layout of `qubits_per_dim` qubits per dimension over `bounds`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    qubits_per_dim: u32,
    bounds: SearchBox,
}

impl GridSpec {
    pub fn new(bounds: SearchBox, qubits_per_dim: u32) -> Result<Self> {
        Self::with_max_qubits(bounds, qubits_per_dim, DEFAULT_MAX_QUBITS)
    }

    /// Like [`GridSpec::new`] with an explicit cap on total qubits.
    pub fn with_max_qubits(
        bounds: SearchBox,
        qubits_per_dim: u32,
        max_qubits: u32,
    ) -> Result<Self> {
        if qubits_per_dim == 0 {
            return Err(QagsError::Config(
                "qubits_per_dim must be at least 1".into(),
            ));
        }
        let total = qubits_per_dim as u64 * bounds.dim() as u64;
        let hard_cap = (usize::BITS - 1).min(62) as u64;
        if total > max_qubits as u64 || total > hard_cap {
            return Err(QagsError::Config(format!(
                "{qubits_per_dim} qubits x {} dims = {total} qubits exceeds the cap of {}",
                bounds.dim(),
                (max_qubits as u64).min(hard_cap)
            )));
        }
        Ok(GridSpec {
            qubits_per_dim,
            bounds,
        })
    }

    pub fn dimension(&self) -> usize {
        self.bounds.dim()
    }

    pub fn qubits_per_dim(&self) -> u32 {
        self.qubits_per_dim
    }

    pub fn total_qubits(&self) -> u32 {
        self.qubits_per_dim * self.dimension() as u32
    }

    pub fn bounds(&self) -> &SearchBox {
        &self.bounds
    }

    pub fn points_per_dim(&self) -> u64 {
        1u64 << self.qubits_per_dim
    }

    pub fn total_points(&self) -> u64 {
        1u64 << self.total_qubits()
    }

    /// Real coordinate of grid index `j` along dimension `dim`.
    pub fn coordinate(&self, dim: usize, j: u64) -> Result<f64> {
        if dim >= self.dimension() {
            return Err(QagsError::IndexOutOfRange {
                index: dim as u64,
                limit: self.dimension() as u64,
            });
        }
        let last = self.points_per_dim() - 1;
        if j > last {
            return Err(QagsError::IndexOutOfRange {
                index: j,
                limit: last + 1,
            });
        }
        Ok(self.coordinate_unchecked(dim, j))
    }

    fn coordinate_unchecked(&self, dim: usize, j: u64) -> f64 {
        let l = self.bounds.lower[dim];
        let u = self.bounds.upper[dim];
        let last = self.points_per_dim() - 1;
        if u == l || j == 0 {
            l
        } else if j == last {
            u
        } else {
            l + j as f64 * ((u - l) / last as f64)
        }
    }

    /// Per-dimension grid indices of basis state `flat`.
    pub fn digits(&self, flat: u64) -> Result<Vec<u64>> {
        self.check_flat(flat)?;
        let n = self.qubits_per_dim;
        let d = self.dimension();
        let mask = self.points_per_dim() - 1;
        Ok((0..d)
            .map(|i| (flat >> (n as usize * (d - 1 - i))) & mask)
            .collect())
    }

    /// Grid point of basis state `flat`.
    pub fn decode(&self, flat: u64) -> Result<Vec<f64>> {
        let digits = self.digits(flat)?;
        Ok(digits
            .into_iter()
            .enumerate()
            .map(|(i, j)| self.coordinate_unchecked(i, j))
            .collect())
    }

    /// Writes the grid point of `flat` into `out` without allocating.
    /// `flat` must be in range.
    pub(crate) fn decode_into(&self, flat: u64, out: &mut [f64]) {
        let n = self.qubits_per_dim as usize;
        let d = self.dimension();
        let mask = self.points_per_dim() - 1;
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = self.coordinate_unchecked(i, (flat >> (n * (d - 1 - i))) & mask);
        }
    }

    /// Basis state whose grid point matches `point` to within
    /// `1e-9 * (u_i - l_i)` in every coordinate.
    pub fn encode(&self, point: &[f64]) -> Result<u64> {
        if point.len() != self.dimension() {
            return Err(QagsError::InvalidArity {
                expected: self.dimension().to_string(),
                got: point.len(),
            });
        }
        let last = self.points_per_dim() - 1;
        let mut flat = 0u64;
        for (i, &x) in point.iter().enumerate() {
            let l = self.bounds.lower[i];
            let u = self.bounds.upper[i];
            let width = u - l;
            let j = if width == 0.0 {
                if x != l {
                    return Err(QagsError::NoSuchPoint(point.to_vec()));
                }
                0
            } else {
                let pos = ((x - l) / width * last as f64).round();
                if !(0.0..=last as f64).contains(&pos) {
                    return Err(QagsError::NoSuchPoint(point.to_vec()));
                }
                let j = pos as u64;
                if (self.coordinate_unchecked(i, j) - x).abs() > 1e-9 * width {
                    return Err(QagsError::NoSuchPoint(point.to_vec()));
                }
                j
            };
            flat = (flat << self.qubits_per_dim) | j;
        }
        Ok(flat)
    }

    fn check_flat(&self, flat: u64) -> Result<()> {
        if flat >= self.total_points() {
            return Err(QagsError::IndexOutOfRange {
                index: flat,
                limit: self.total_points(),
            });
        }
        Ok(())
    }
}
