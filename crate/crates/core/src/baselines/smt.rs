use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ensure_finite;
use crate::error::{Error, Result};
use crate::features::{Family, FeatureDescriptor, FeatureVector, Source};
use crate::scalar::Scalar;
use crate::series::MultiTimeSeries;

pub const HARALICK_STATS: usize = 13;

pub const HARALICK_NAMES: [&str; HARALICK_STATS] = [
    "energy",
    "contrast",
    "correlation",
    "variance",
    "homogeneity",
    "sum_average",
    "sum_variance",
    "sum_entropy",
    "entropy",
    "difference_variance",
    "difference_entropy",
    "imc1",
    "imc2",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SmtParams {
    pub n_windows: usize,
    pub quant_levels: usize,
}

impl Default for SmtParams {
    fn default() -> Self {
        Self {
            n_windows: 10,
            quant_levels: 8,
        }
    }
}

/// Sequential motion texture: per window, the frame-kernel matrix of inner
/// products between time steps is quantized and summarized by 13 Haralick
/// statistics of its (1, 1)-offset co-occurrence matrix.
///
/// The series is cut into `n_windows` contiguous windows of `N / n_windows`
/// steps; the last window absorbs the remainder. Output is window-major,
/// `n_windows · 13` values.
pub fn smt_features<T: Scalar>(series: &MultiTimeSeries<T>, p: SmtParams) -> Result<FeatureVector<T>> {
    ensure_finite(series)?;
    if p.quant_levels < 2 {
        return Err(Error::Parameter("quant_levels must be >= 2".into()));
    }
    if p.n_windows == 0 || series.len() < 2 * p.n_windows {
        return Err(Error::Parameter(format!(
            "{} time steps cannot form {} windows of at least 2 steps",
            series.len(),
            p.n_windows
        )));
    }
    let width = series.len() / p.n_windows;
    let columns: Vec<Vec<T>> = (0..series.len()).map(|t| series.column(t)).collect();
    let stats: Vec<[T; HARALICK_STATS]> = (0..p.n_windows)
        .into_par_iter()
        .map(|w| {
            let start = w * width;
            let end = if w + 1 == p.n_windows { series.len() } else { start + width };
            let kernel = frame_kernel(&columns[start..end]);
            let levels = quantize(&kernel, p.quant_levels);
            let glcm = cooccurrence(&levels, end - start, p.quant_levels);
            haralick(&glcm, p.quant_levels)
        })
        .collect();
    let mut fv = FeatureVector::empty();
    for (w, s) in stats.into_iter().enumerate() {
        for (k, v) in s.into_iter().enumerate() {
            fv.push(v, FeatureDescriptor::new(Family::Smt, Source::Window(w)).coeff(k));
        }
    }
    Ok(fv)
}

/// Row-major W×W matrix of inner products between per-step K-vectors.
fn frame_kernel<T: Scalar>(columns: &[Vec<T>]) -> Vec<T> {
    let w = columns.len();
    let mut g = vec![T::zero(); w * w];
    for s in 0..w {
        for t in s..w {
            let v: T = columns[s].iter().zip(&columns[t]).map(|(&a, &b)| a * b).sum();
            g[s * w + t] = v;
            g[t * w + s] = v;
        }
    }
    g
}

/// Min-max scales to [0, 1] then maps to `levels` bins. A constant matrix maps to level 0.
fn quantize<T: Scalar>(values: &[T], levels: usize) -> Vec<usize> {
    let lo = values.iter().copied().fold(T::infinity(), T::min);
    let hi = values.iter().copied().fold(T::neg_infinity(), T::max);
    if hi <= lo {
        return vec![0; values.len()];
    }
    let span = hi - lo;
    let l = T::of_usize(levels);
    values
        .iter()
        .map(|&v| {
            let q = ((v - lo) / span * l).floor().to_usize().unwrap_or(0);
            q.min(levels - 1)
        })
        .collect()
}

/// Normalized co-occurrence of levels at offset (1, 1) inside a W×W grid.
fn cooccurrence<T: Scalar>(levels: &[usize], w: usize, n_levels: usize) -> Vec<T> {
    let mut counts = vec![0usize; n_levels * n_levels];
    for i in 0..w - 1 {
        for j in 0..w - 1 {
            counts[levels[i * w + j] * n_levels + levels[(i + 1) * w + j + 1]] += 1;
        }
    }
    let total = T::of_usize((w - 1) * (w - 1));
    counts.into_iter().map(|c| T::of_usize(c) / total).collect()
}

fn plogp<T: Scalar>(p: T) -> T {
    if p > T::zero() {
        p * p.ln()
    } else {
        T::zero()
    }
}

/// The 13 Haralick statistics of a normalized L×L co-occurrence matrix
/// (row-major, gray levels indexed from 0). Order follows [`HARALICK_NAMES`].
///
/// Undefined ratios (zero marginal spread, zero marginal entropy) evaluate to 0.
pub fn haralick<T: Scalar>(p: &[T], levels: usize) -> [T; HARALICK_STATS] {
    let zero = T::zero();
    let at = |i: usize, j: usize| p[i * levels + j];
    let idx = T::of_usize;

    let mut px = vec![zero; levels];
    let mut py = vec![zero; levels];
    let mut p_sum = vec![zero; 2 * levels - 1];
    let mut p_diff = vec![zero; levels];
    for i in 0..levels {
        for j in 0..levels {
            let v = at(i, j);
            px[i] = px[i] + v;
            py[j] = py[j] + v;
            p_sum[i + j] = p_sum[i + j] + v;
            p_diff[i.abs_diff(j)] = p_diff[i.abs_diff(j)] + v;
        }
    }
    let mu_x: T = px.iter().enumerate().map(|(i, &v)| idx(i) * v).sum();
    let mu_y: T = py.iter().enumerate().map(|(j, &v)| idx(j) * v).sum();
    let var_x: T = px.iter().enumerate().map(|(i, &v)| (idx(i) - mu_x).powi(2) * v).sum();
    let var_y: T = py.iter().enumerate().map(|(j, &v)| (idx(j) - mu_y).powi(2) * v).sum();

    let mut energy = zero;
    let mut cross = zero;
    let mut homogeneity = zero;
    let mut entropy = zero;
    let mut hxy1 = zero;
    let mut hxy2 = zero;
    for i in 0..levels {
        for j in 0..levels {
            let v = at(i, j);
            energy = energy + v * v;
            cross = cross + idx(i) * idx(j) * v;
            homogeneity = homogeneity + v / (T::one() + (idx(i) - idx(j)).powi(2));
            entropy = entropy - plogp(v);
            let q = px[i] * py[j];
            if q > zero {
                if v > zero {
                    hxy1 = hxy1 - v * q.ln();
                }
                hxy2 = hxy2 - q * q.ln();
            }
        }
    }
    let contrast: T = p_diff.iter().enumerate().map(|(k, &v)| idx(k * k) * v).sum();
    let spread = (var_x * var_y).sqrt();
    let correlation = if spread > zero { (cross - mu_x * mu_y) / spread } else { zero };
    let sum_average: T = p_sum.iter().enumerate().map(|(k, &v)| idx(k) * v).sum();
    let sum_variance: T = p_sum.iter().enumerate().map(|(k, &v)| (idx(k) - sum_average).powi(2) * v).sum();
    let sum_entropy: T = -p_sum.iter().map(|&v| plogp(v)).sum::<T>();
    let diff_mean: T = p_diff.iter().enumerate().map(|(k, &v)| idx(k) * v).sum();
    let diff_variance: T = p_diff.iter().enumerate().map(|(k, &v)| (idx(k) - diff_mean).powi(2) * v).sum();
    let diff_entropy: T = -p_diff.iter().map(|&v| plogp(v)).sum::<T>();
    let hx: T = -px.iter().map(|&v| plogp(v)).sum::<T>();
    let hy: T = -py.iter().map(|&v| plogp(v)).sum::<T>();
    let h_max = hx.max(hy);
    let imc1 = if h_max > zero { (entropy - hxy1) / h_max } else { zero };
    let imc2 = (T::one() - (-T::of(2.0) * (hxy2 - entropy)).exp()).max(zero).sqrt();

    [
        energy,
        contrast,
        correlation,
        var_x,
        homogeneity,
        sum_average,
        sum_variance,
        sum_entropy,
        entropy,
        diff_variance,
        diff_entropy,
        imc1,
        imc2,
    ]
}
