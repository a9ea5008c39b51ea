//! Multi-dimensional series, entropy parameters, validation and normalization.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// ApEn radius grid (fractions of the per-dimension standard deviation).
pub const DEFAULT_RADII: [f64; 6] = [0.1, 0.13, 0.16, 0.19, 0.22, 0.25];

/// Single XApEn radius used for high-dimensional video series.
pub const VIDEO_CROSS_RADIUS: f64 = 0.2;

/// A K×N real series stored dimension-major (one row per dimension).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiTimeSeries<T> {
    values: Vec<T>,
    dims: usize,
    len: usize,
    dim_names: Vec<String>,
    sample_rate: Option<f64>,
}

impl<T: Scalar> MultiTimeSeries<T> {
    /// Builds a series from one row per dimension.
    ///
    /// Only the shape is checked here (K ≥ 1, N ≥ 2, rectangular). Finiteness
    /// is reported by [`validate`] so that bad inputs can be diagnosed rather
    /// than rejected wholesale.
    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let dims = rows.len();
        if dims == 0 {
            return Err(Error::Shape("series needs at least one dimension".into()));
        }
        let len = rows[0].len();
        if let Some((d, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != len) {
            return Err(Error::Shape(format!(
                "dimension {d} has length {}, dimension 0 has {len}",
                r.len()
            )));
        }
        if len < 2 {
            return Err(Error::TooShort { len, required: 2 });
        }
        let dim_names = (0..dims).map(|d| format!("d{d}")).collect();
        Ok(Self {
            values: rows.into_iter().flatten().collect(),
            dims,
            len,
            dim_names,
            sample_rate: None,
        })
    }

    pub fn from_single(row: Vec<T>) -> Result<Self> {
        Self::from_rows(vec![row])
    }

    pub fn zeros(dims: usize, len: usize) -> Result<Self> {
        Self::from_rows(vec![vec![T::zero(); len]; dims])
    }

    pub fn with_dim_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.dims {
            return Err(Error::Shape(format!(
                "{} dimension names for {} dimensions",
                names.len(),
                self.dims
            )));
        }
        self.dim_names = names;
        Ok(self)
    }

    pub fn with_sample_rate(mut self, hz: f64) -> Self {
        self.sample_rate = Some(hz);
        self
    }

    /// Number of dimensions K.
    pub fn dims(&self) -> usize {
        self.dims
    }

    /// Number of time steps N.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn dim_names(&self) -> &[String] {
        &self.dim_names
    }

    pub fn sample_rate(&self) -> Option<f64> {
        self.sample_rate
    }

    pub fn row(&self, dim: usize) -> &[T] {
        &self.values[dim * self.len..(dim + 1) * self.len]
    }

    pub fn row_mut(&mut self, dim: usize) -> &mut [T] {
        let len = self.len;
        &mut self.values[dim * len..(dim + 1) * len]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> + '_ {
        self.values.chunks_exact(self.len)
    }

    pub fn get(&self, dim: usize, t: usize) -> T {
        self.values[dim * self.len + t]
    }

    /// The K-vector observed at time `t`.
    pub fn column(&self, t: usize) -> Vec<T> {
        (0..self.dims).map(|d| self.get(d, t)).collect()
    }

    /// Keeps the first `len` time steps.
    pub fn truncated(&self, len: usize) -> Result<Self> {
        let rows = self.rows().map(|r| r[..len.min(self.len)].to_vec()).collect();
        let mut out = Self::from_rows(rows)?;
        out.dim_names = self.dim_names.clone();
        out.sample_rate = self.sample_rate;
        Ok(out)
    }

    /// Stacks the dimensions of `self` on top of `other`. Lengths must agree.
    pub fn stack(&self, other: &Self) -> Result<Self> {
        if self.len != other.len {
            return Err(Error::Shape(format!(
                "cannot stack series of lengths {} and {}",
                self.len, other.len
            )));
        }
        let rows = self.rows().chain(other.rows()).map(<[T]>::to_vec).collect();
        let mut out = Self::from_rows(rows)?;
        out.dim_names = self
            .dim_names
            .iter()
            .chain(&other.dim_names)
            .cloned()
            .collect();
        out.sample_rate = self.sample_rate.or(other.sample_rate);
        Ok(out)
    }
}

/// Embedding dimension, delay and radius grids for the entropy features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyParams<T> {
    m: usize,
    tau: usize,
    radii: Vec<T>,
    cross_radii: Vec<T>,
}

impl<T: Scalar> EntropyParams<T> {
    /// `radii` drive ApEn, `cross_radii` drive XApEn. Both must be strictly
    /// increasing and lie in (0, 1).
    pub fn new(m: usize, tau: usize, radii: Vec<T>, cross_radii: Vec<T>) -> Result<Self> {
        if m == 0 {
            return Err(Error::Parameter("embedding dimension m must be >= 1".into()));
        }
        if tau == 0 {
            return Err(Error::Parameter("time delay tau must be >= 1".into()));
        }
        check_radius_grid("radii", &radii)?;
        check_radius_grid("cross_radii", &cross_radii)?;
        Ok(Self {
            m,
            tau,
            radii,
            cross_radii,
        })
    }

    /// Six-radius grid for both ApEn and XApEn (accelerometer setting).
    pub fn accelerometer() -> Self {
        let grid: Vec<T> = DEFAULT_RADII.iter().map(|&r| T::of(r)).collect();
        Self::new(1, 1, grid.clone(), grid).expect("default grid is valid")
    }

    /// Six-radius ApEn grid with a single XApEn radius (video setting).
    pub fn video() -> Self {
        let grid: Vec<T> = DEFAULT_RADII.iter().map(|&r| T::of(r)).collect();
        Self::new(1, 1, grid, vec![T::of(VIDEO_CROSS_RADIUS)]).expect("default grid is valid")
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn tau(&self) -> usize {
        self.tau
    }

    pub fn radii(&self) -> &[T] {
        &self.radii
    }

    pub fn cross_radii(&self) -> &[T] {
        &self.cross_radii
    }

    /// Shortest series that can be embedded with two vectors at order m+1.
    pub fn min_len(&self) -> usize {
        self.m * self.tau + 2
    }
}

fn check_radius_grid<T: Scalar>(name: &str, grid: &[T]) -> Result<()> {
    if let Some(r) = grid.iter().find(|r| !(**r > T::zero() && **r < T::one())) {
        return Err(Error::Parameter(format!("{name}: radius {r} outside (0, 1)")));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Parameter(format!("{name} must be strictly increasing")));
    }
    Ok(())
}

/// One reason a series cannot be used with a set of entropy parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Violation {
    NonFinite { dim: usize, index: usize },
    TooShort { len: usize, required: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonFinite { dim, index } => {
                write!(f, "non-finite value at dimension {dim}, index {index}")
            }
            Violation::TooShort { len, required } => {
                write!(f, "length {len} is below the required {required}")
            }
        }
    }
}

/// Collects every invariant violation of `series` under `params`.
///
/// The length requirement is N − m·τ ≥ 2, i.e. at least two embedding
/// vectors exist at order m+1.
pub fn validate<T: Scalar>(
    series: &MultiTimeSeries<T>,
    params: &EntropyParams<T>,
) -> std::result::Result<(), Vec<Violation>> {
    let mut violations = Vec::new();
    let required = params.min_len();
    if series.len() < required {
        violations.push(Violation::TooShort {
            len: series.len(),
            required,
        });
    }
    for (dim, row) in series.rows().enumerate() {
        for (index, v) in row.iter().enumerate() {
            if !v.is_finite() {
                violations.push(Violation::NonFinite { dim, index });
            }
        }
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}

/// Like [`validate`] but folds the violations into an [`Error`].
pub fn ensure_valid<T: Scalar>(series: &MultiTimeSeries<T>, params: &EntropyParams<T>) -> Result<()> {
    validate(series, params).map_err(Error::Invalid)
}

/// Population mean and standard deviation (1/N).
pub fn mean_std<T: Scalar>(x: &[T]) -> (T, T) {
    let n = T::of_usize(x.len());
    let mean = x.iter().copied().sum::<T>() / n;
    let var = x.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>() / n;
    (mean, var.sqrt())
}

/// True when every value equals the first one.
pub fn is_constant<T: Scalar>(x: &[T]) -> bool {
    x.split_first()
        .is_none_or(|(first, rest)| rest.iter().all(|v| v == first))
}

/// Z-scores a single row in place. Returns false (and zeroes the row) when the row is constant.
pub fn zscore_row<T: Scalar>(row: &mut [T]) -> bool {
    if is_constant(row) {
        row.iter_mut().for_each(|v| *v = T::zero());
        return false;
    }
    let (mean, std) = mean_std(row);
    row.iter_mut().for_each(|v| *v = (*v - mean) / std);
    true
}

/// Output of [`zscore_normalize`].
#[derive(Debug, Clone, PartialEq)]
pub struct Normalized<T> {
    pub series: MultiTimeSeries<T>,
    /// Dimensions that had zero variance and were replaced by zeros.
    pub degenerate: Vec<usize>,
}

/// Per-dimension z-scoring with the population standard deviation.
pub fn zscore_normalize<T: Scalar>(series: &MultiTimeSeries<T>) -> Normalized<T> {
    let mut out = series.clone();
    let degenerate = (0..out.dims())
        .filter(|&d| !zscore_row(out.row_mut(d)))
        .collect();
    Normalized {
        series: out,
        degenerate,
    }
}
