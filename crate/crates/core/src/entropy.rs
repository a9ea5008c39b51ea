//! Approximate entropy (ApEn) and cross-approximate entropy (XApEn).
//!
//! Both kernels share one pattern: embedding vectors are compared with the
//! Chebyshev distance and a pair matches when the distance is `<= r`
//! (Heaviside with H(0) = 1). For each embedding vector the matching
//! frequency `C_i` is averaged in log space to give `Ω`, and the entropy is
//! `Ω(m) - Ω(m+1)`.
//!
//! Normalizers follow the number of embedding vectors that actually exist at
//! each order: `N - (m-1)τ` at order m and `N - mτ` at order m+1.
//!
//! The kernels sort embedding vectors by their first coordinate so that a
//! pair is only inspected when its first coordinates are already within the
//! largest radius. Every radius in a grid is served by the same sweep: each
//! pair contributes to the smallest radius that admits it and counts are
//! prefix-summed across the grid afterwards.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{Family, FeatureDescriptor, FeatureVector, Source};
use crate::scalar::Scalar;
use crate::series::{ensure_valid, is_constant, mean_std, zscore_row, EntropyParams, MultiTimeSeries};

/// Delay-embedded vectors `x(i) = [T_i, T_{i+τ}, …, T_{i+(m-1)τ}]`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix<T> {
    data: Vec<T>,
    rows: usize,
    m: usize,
    tau: usize,
}

impl<T: Scalar> EmbeddingMatrix<T> {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn tau(&self) -> usize {
        self.tau
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.m..(i + 1) * self.m]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[T]> + '_ {
        self.data.chunks_exact(self.m)
    }
}

/// Sliding-window delay embedding. Needs at least two vectors.
pub fn embed<T: Scalar>(series: &[T], m: usize, tau: usize) -> Result<EmbeddingMatrix<T>> {
    check_order(m, tau)?;
    let span = (m - 1) * tau;
    let required = span + 2;
    if series.len() < required {
        return Err(Error::TooShort {
            len: series.len(),
            required,
        });
    }
    let rows = series.len() - span;
    let mut data = Vec::with_capacity(rows * m);
    for i in 0..rows {
        data.extend((0..m).map(|k| series[i + k * tau]));
    }
    Ok(EmbeddingMatrix { data, rows, m, tau })
}

fn check_order(m: usize, tau: usize) -> Result<()> {
    if m == 0 || tau == 0 {
        return Err(Error::Parameter(format!(
            "embedding needs m >= 1 and tau >= 1 (got m={m}, tau={tau})"
        )));
    }
    Ok(())
}

/// Checks that both order-m and order-(m+1) embeddings have two vectors.
fn check_entropy_input<T: Scalar>(series: &[T], m: usize, tau: usize) -> Result<()> {
    check_order(m, tau)?;
    let required = m * tau + 2;
    if series.len() < required {
        return Err(Error::TooShort {
            len: series.len(),
            required,
        });
    }
    if let Some(index) = series.iter().position(|v| !v.is_finite()) {
        return Err(Error::Invalid(vec![crate::series::Violation::NonFinite {
            dim: 0,
            index,
        }]));
    }
    Ok(())
}

fn check_fraction<T: Scalar>(r: T) -> Result<()> {
    if r > T::zero() && r < T::one() {
        Ok(())
    } else {
        Err(Error::Parameter(format!("radius fraction {r} outside (0, 1)")))
    }
}

/// Index of the smallest radius admitting distance `d`, or `None`.
#[inline]
fn bucket<T: Scalar>(d: T, radii: &[T]) -> Option<usize> {
    radii.iter().position(|&r| d <= r)
}

/// Turns per-radius "first admitting radius" histograms into cumulative counts.
fn prefix_sum(hist: &mut [usize], n_radii: usize) {
    for row in hist.chunks_exact_mut(n_radii) {
        for k in 1..n_radii {
            row[k] += row[k - 1];
        }
    }
}

/// Mean of `ln(count / n)` over the first `n` rows for radius index `k`.
fn omega<T: Scalar>(counts: &[usize], n_radii: usize, k: usize, n: usize) -> T {
    let norm = T::of_usize(n);
    let sum: T = (0..n)
        .map(|i| (T::of_usize(counts[i * n_radii + k]) / norm).ln())
        .sum();
    sum / norm
}

/// Stable order of `0..n` by `values[i]`.
fn sorted_order<T: Scalar>(values: &[T], n: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite values"));
    order
}

/// ApEn with an absolute radius grid (must be strictly increasing).
fn apen_absolute<T: Scalar>(x: &[T], m: usize, tau: usize, radii: &[T]) -> Vec<T> {
    let n_radii = radii.len();
    let n_m = x.len() - (m - 1) * tau;
    let n_m1 = x.len() - m * tau;
    let r_max = radii[n_radii - 1];

    // self-matches are admitted at every radius
    let mut hist_m = vec![0usize; n_m * n_radii];
    let mut hist_m1 = vec![0usize; n_m1 * n_radii];
    for i in 0..n_m {
        hist_m[i * n_radii] += 1;
    }
    for i in 0..n_m1 {
        hist_m1[i * n_radii] += 1;
    }

    let order = sorted_order(x, n_m);
    for (p, &i) in order.iter().enumerate() {
        for &j in &order[p + 1..] {
            let first = x[j] - x[i];
            if first > r_max {
                break;
            }
            let mut d = first;
            for k in 1..m {
                d = d.max((x[i + k * tau] - x[j + k * tau]).abs());
            }
            let Some(b) = bucket(d, radii) else { continue };
            hist_m[i * n_radii + b] += 1;
            hist_m[j * n_radii + b] += 1;
            if i < n_m1 && j < n_m1 {
                let d1 = d.max((x[i + m * tau] - x[j + m * tau]).abs());
                if let Some(b1) = bucket(d1, radii) {
                    hist_m1[i * n_radii + b1] += 1;
                    hist_m1[j * n_radii + b1] += 1;
                }
            }
        }
    }
    prefix_sum(&mut hist_m, n_radii);
    prefix_sum(&mut hist_m1, n_radii);

    (0..n_radii)
        .map(|k| omega::<T>(&hist_m, n_radii, k, n_m) - omega::<T>(&hist_m1, n_radii, k, n_m1))
        .collect()
}

/// ApEn of a 1-D series at one radius, given as a fraction of the population std.
///
/// Returns 0 for a constant series.
pub fn apen<T: Scalar>(series: &[T], m: usize, r_fraction: T, tau: usize) -> Result<T> {
    Ok(apen_grid(series, m, &[r_fraction], tau)?[0])
}

/// ApEn for each radius fraction in a strictly increasing grid, sharing one sweep.
pub fn apen_grid<T: Scalar>(series: &[T], m: usize, fractions: &[T], tau: usize) -> Result<Vec<T>> {
    check_entropy_input(series, m, tau)?;
    check_grid(fractions)?;
    if is_constant(series) {
        return Ok(vec![T::zero(); fractions.len()]);
    }
    let (_, std) = mean_std(series);
    let radii: Vec<T> = fractions.iter().map(|&f| f * std).collect();
    Ok(apen_absolute(series, m, tau, &radii))
}

fn check_grid<T: Scalar>(fractions: &[T]) -> Result<()> {
    if fractions.is_empty() {
        return Err(Error::Parameter("empty radius grid".into()));
    }
    fractions.iter().try_for_each(|&f| check_fraction(f))?;
    if fractions.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Parameter("radius grid must be strictly increasing".into()));
    }
    Ok(())
}

/// XApEn value plus how many embedding rows had no cross match and were floored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossEntropy<T> {
    pub value: T,
    pub floored_rows: usize,
}

impl<T> CrossEntropy<T> {
    pub fn floored(&self) -> bool {
        self.floored_rows > 0
    }
}

/// XApEn on already-normalized series with an absolute radius grid.
fn xapen_absolute<T: Scalar>(a: &[T], b: &[T], m: usize, tau: usize, radii: &[T]) -> Vec<CrossEntropy<T>> {
    let n_radii = radii.len();
    let n_m = a.len() - (m - 1) * tau;
    let n_m1 = a.len() - m * tau;
    let r_max = radii[n_radii - 1];
    let order = sorted_order(b, n_m);
    let keys: Vec<T> = order.iter().map(|&j| b[j]).collect();

    // per template row: [hist_m | hist_m1], each n_radii wide
    let rows: Vec<Vec<usize>> = (0..n_m)
        .into_par_iter()
        .map(|i| {
            let mut h = vec![0usize; 2 * n_radii];
            let ai = a[i];
            let mut visit = |j: usize, first: T| {
                let mut d = first;
                for k in 1..m {
                    d = d.max((a[i + k * tau] - b[j + k * tau]).abs());
                }
                let Some(bk) = bucket(d, radii) else { return };
                h[bk] += 1;
                if i < n_m1 && j < n_m1 {
                    let d1 = d.max((a[i + m * tau] - b[j + m * tau]).abs());
                    if let Some(b1) = bucket(d1, radii) {
                        h[n_radii + b1] += 1;
                    }
                }
            };
            let pos = keys.partition_point(|&v| v < ai);
            for q in (0..pos).rev() {
                let first = ai - keys[q];
                if first > r_max {
                    break;
                }
                visit(order[q], first);
            }
            for q in pos..n_m {
                let first = keys[q] - ai;
                if first > r_max {
                    break;
                }
                visit(order[q], first);
            }
            h
        })
        .collect();

    let mut hist_m = vec![0usize; n_m * n_radii];
    let mut hist_m1 = vec![0usize; n_m1 * n_radii];
    for (i, h) in rows.iter().enumerate() {
        hist_m[i * n_radii..(i + 1) * n_radii].copy_from_slice(&h[..n_radii]);
        if i < n_m1 {
            hist_m1[i * n_radii..(i + 1) * n_radii].copy_from_slice(&h[n_radii..]);
        }
    }
    prefix_sum(&mut hist_m, n_radii);
    prefix_sum(&mut hist_m1, n_radii);

    (0..n_radii)
        .map(|k| {
            let mut floored_rows = 0;
            for hist in [&mut hist_m, &mut hist_m1] {
                for row in hist.chunks_exact_mut(n_radii) {
                    if row[k] == 0 {
                        row[k] = 1;
                        floored_rows += 1;
                    }
                }
            }
            let value = omega::<T>(&hist_m, n_radii, k, n_m) - omega::<T>(&hist_m1, n_radii, k, n_m1);
            CrossEntropy {
                value,
                floored_rows,
            }
        })
        .collect()
}

/// XApEn of `a` relative to `b` at an absolute radius in z-score units.
///
/// Both series are z-scored first (constant series become all zeros). A
/// template row with no match in the other series is counted as one match so
/// the logarithm stays finite.
pub fn xapen<T: Scalar>(a: &[T], b: &[T], m: usize, r: T, tau: usize) -> Result<T> {
    Ok(xapen_detailed(a, b, m, r, tau)?.value)
}

pub fn xapen_detailed<T: Scalar>(a: &[T], b: &[T], m: usize, r: T, tau: usize) -> Result<CrossEntropy<T>> {
    Ok(xapen_grid(a, b, m, &[r], tau)?[0])
}

/// XApEn for each absolute radius in a strictly increasing grid.
pub fn xapen_grid<T: Scalar>(
    a: &[T],
    b: &[T],
    m: usize,
    radii: &[T],
    tau: usize,
) -> Result<Vec<CrossEntropy<T>>> {
    if a.len() != b.len() {
        return Err(Error::Shape(format!(
            "cross entropy needs equal lengths, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    check_entropy_input(a, m, tau)?;
    check_entropy_input(b, m, tau)?;
    if radii.is_empty() {
        return Err(Error::Parameter("empty radius grid".into()));
    }
    if let Some(r) = radii.iter().find(|r| !(r.is_finite() && **r > T::zero())) {
        return Err(Error::Parameter(format!("radius {r} must be positive")));
    }
    if radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Parameter("radius grid must be strictly increasing".into()));
    }
    let mut za = a.to_vec();
    let mut zb = b.to_vec();
    zscore_row(&mut za);
    zscore_row(&mut zb);
    Ok(xapen_absolute(&za, &zb, m, tau, radii))
}

/// ApEn of every dimension at every radius: `K·R` values, dimension-major.
pub fn apen_features<T: Scalar>(series: &MultiTimeSeries<T>, params: &EntropyParams<T>) -> Result<FeatureVector<T>> {
    ensure_valid(series, params)?;
    let per_dim: Vec<Vec<T>> = (0..series.dims())
        .into_par_iter()
        .map(|d| {
            apen_grid(series.row(d), params.m(), params.radii(), params.tau()).map_err(|e| Error::InDimension {
                dim: d,
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;
    let mut fv = FeatureVector::empty();
    for (d, vals) in per_dim.into_iter().enumerate() {
        for (k, v) in vals.into_iter().enumerate() {
            fv.push(v, FeatureDescriptor::new(Family::ApEn, Source::Dim(d)).radius(k));
        }
    }
    Ok(fv)
}

/// XApEn for every unordered dimension pair `d1 < d2` at every cross radius:
/// `R·K(K-1)/2` values, pair-major in lexicographic order.
pub fn xapen_features<T: Scalar>(series: &MultiTimeSeries<T>, params: &EntropyParams<T>) -> Result<FeatureVector<T>> {
    ensure_valid(series, params)?;
    let k = series.dims();
    let pairs: Vec<(usize, usize)> = (0..k).flat_map(|a| (a + 1..k).map(move |b| (a, b))).collect();
    let per_pair: Vec<Vec<CrossEntropy<T>>> = pairs
        .par_iter()
        .map(|&(a, b)| {
            xapen_grid(series.row(a), series.row(b), params.m(), params.cross_radii(), params.tau()).map_err(|e| {
                Error::InPair {
                    a,
                    b,
                    source: Box::new(e),
                }
            })
        })
        .collect::<Result<_>>()?;
    let mut fv = FeatureVector::empty();
    for (&(a, b), vals) in pairs.iter().zip(per_pair) {
        for (r, ce) in vals.into_iter().enumerate() {
            let mut desc = FeatureDescriptor::new(Family::XApEn, Source::Pair(a, b)).radius(r);
            desc.floored = ce.floored();
            fv.push(ce.value, desc);
        }
    }
    Ok(fv)
}

/// `[ApEn ‖ XApEn]` concatenation.
pub fn fused_entropy_features<T: Scalar>(
    series: &MultiTimeSeries<T>,
    params: &EntropyParams<T>,
) -> Result<FeatureVector<T>> {
    Ok(apen_features(series, params)?.concat(xapen_features(series, params)?))
}

/// Closed-form length of the fused vector with `apen_radii` ApEn radii and
/// `cross_radii` XApEn radii on a K-dimensional series.
pub fn fused_len(k: usize, apen_radii: usize, cross_radii: usize) -> usize {
    apen_radii * k + cross_radii * k * (k - 1) / 2
}
