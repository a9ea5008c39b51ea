//! Comparison features: low-frequency DFT magnitudes, DCT-II coefficients and
//! sequential motion texture (SMT).

mod smt;
mod spectral;

pub use smt::{haralick, smt_features, SmtParams, HARALICK_NAMES, HARALICK_STATS};
pub use spectral::{dct_features, dct_ii, dft_features, dft_magnitudes, SpectralParams};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::series::{MultiTimeSeries, Violation};

fn ensure_finite<T: Scalar>(series: &MultiTimeSeries<T>) -> Result<()> {
    let bad: Vec<Violation> = series
        .rows()
        .enumerate()
        .flat_map(|(dim, row)| {
            row.iter()
                .enumerate()
                .filter(|(_, v)| !v.is_finite())
                .map(move |(index, _)| Violation::NonFinite { dim, index })
        })
        .collect();
    if bad.is_empty() {
        Ok(())
    } else {
        Err(Error::Invalid(bad))
    }
}
