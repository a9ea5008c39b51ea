use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::ensure_finite;
use crate::error::{Error, Result};
use crate::features::{Family, FeatureDescriptor, FeatureVector, Source};
use crate::scalar::Scalar;
use crate::series::MultiTimeSeries;

/// Number of low-frequency coefficients kept per dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpectralParams {
    pub coeffs_per_dim: usize,
}

impl Default for SpectralParams {
    fn default() -> Self {
        Self { coeffs_per_dim: 10 }
    }
}

impl SpectralParams {
    fn check(&self, n: usize) -> Result<()> {
        if self.coeffs_per_dim == 0 || self.coeffs_per_dim > n {
            return Err(Error::Parameter(format!(
                "coeffs_per_dim must be in 1..={n}, got {}",
                self.coeffs_per_dim
            )));
        }
        Ok(())
    }
}

fn fft<T: Scalar>(buf: &mut [Complex<T>]) {
    FftPlanner::<T>::new().plan_fft_forward(buf.len()).process(buf);
}

/// Magnitudes of the first `count` DFT bins (DC first).
pub fn dft_magnitudes<T: Scalar>(x: &[T], count: usize) -> Vec<T> {
    let mut buf: Vec<Complex<T>> = x.iter().map(|&v| Complex::new(v, T::zero())).collect();
    fft(&mut buf);
    buf[..count].iter().map(|c| c.norm()).collect()
}

/// First `count` unnormalized DCT-II coefficients,
/// `X_k = Σ x_n cos(π k (n + ½) / N)`, via an FFT of the even extension.
pub fn dct_ii<T: Scalar>(x: &[T], count: usize) -> Vec<T> {
    let n = x.len();
    let mut buf: Vec<Complex<T>> = x
        .iter()
        .chain(x.iter().rev())
        .map(|&v| Complex::new(v, T::zero()))
        .collect();
    fft(&mut buf);
    let half = T::of(0.5);
    let step = -T::PI() / T::of_usize(2 * n);
    (0..count)
        .map(|k| {
            let twiddle = Complex::from_polar(T::one(), step * T::of_usize(k));
            (buf[k] * twiddle).re * half
        })
        .collect()
}

fn per_dim<T: Scalar>(
    series: &MultiTimeSeries<T>,
    p: SpectralParams,
    family: Family,
    transform: fn(&[T], usize) -> Vec<T>,
) -> Result<FeatureVector<T>> {
    ensure_finite(series)?;
    p.check(series.len())?;
    let rows: Vec<Vec<T>> = (0..series.dims())
        .into_par_iter()
        .map(|d| transform(series.row(d), p.coeffs_per_dim))
        .collect();
    let mut fv = FeatureVector::empty();
    for (d, row) in rows.into_iter().enumerate() {
        for (c, v) in row.into_iter().enumerate() {
            fv.push(v, FeatureDescriptor::new(family, Source::Dim(d)).coeff(c));
        }
    }
    Ok(fv)
}

/// `K·coeffs_per_dim` DFT magnitudes, dimension-major.
pub fn dft_features<T: Scalar>(series: &MultiTimeSeries<T>, p: SpectralParams) -> Result<FeatureVector<T>> {
    per_dim(series, p, Family::Dft, dft_magnitudes)
}

/// `K·coeffs_per_dim` signed DCT-II coefficients, dimension-major.
pub fn dct_features<T: Scalar>(series: &MultiTimeSeries<T>, p: SpectralParams) -> Result<FeatureVector<T>> {
    per_dim(series, p, Family::Dct, dct_ii)
}
