//! Named feature vectors with per-entry provenance.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    ApEn,
    XApEn,
    Dct,
    Dft,
    Smt,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::ApEn => "apen",
            Family::XApEn => "xapen",
            Family::Dct => "dct",
            Family::Dft => "dft",
            Family::Smt => "smt",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modality {
    Video,
    Accel,
}

impl Modality {
    pub fn as_str(self) -> &'static str {
        match self {
            Modality::Video => "video",
            Modality::Accel => "accel",
        }
    }
}

/// Where a feature value came from inside the source series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Dim(usize),
    Pair(usize, usize),
    Window(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FeatureDescriptor {
    pub family: Family,
    pub source: Source,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeff: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modality: Option<Modality>,
    /// Set when an XApEn count was floored to keep the logarithm finite.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub floored: bool,
}

impl FeatureDescriptor {
    pub fn new(family: Family, source: Source) -> Self {
        Self {
            family,
            source,
            radius: None,
            coeff: None,
            modality: None,
            floored: false,
        }
    }

    pub fn radius(mut self, index: usize) -> Self {
        self.radius = Some(index);
        self
    }

    pub fn coeff(mut self, index: usize) -> Self {
        self.coeff = Some(index);
        self
    }

    /// Stable textual key, e.g. `video:xapen:d0-d3:r0`.
    pub fn tag(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for FeatureDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(m) = self.modality {
            write!(f, "{}:", m.as_str())?;
        }
        write!(f, "{}:", self.family.as_str())?;
        match self.source {
            Source::Dim(d) => write!(f, "d{d}")?,
            Source::Pair(a, b) => write!(f, "d{a}-d{b}")?,
            Source::Window(w) => write!(f, "w{w}")?,
        }
        if let Some(r) = self.radius {
            write!(f, ":r{r}")?;
        }
        if let Some(c) = self.coeff {
            write!(f, ":c{c}")?;
        }
        Ok(())
    }
}

/// An ordered real vector whose entries each carry a [`FeatureDescriptor`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct FeatureVector<T> {
    values: Vec<T>,
    descriptors: Vec<FeatureDescriptor>,
}

impl<T> Default for FeatureVector<T> {
    fn default() -> Self {
        Self {
            values: Vec::new(),
            descriptors: Vec::new(),
        }
    }
}

impl<T: Copy> FeatureVector<T> {
    pub fn new(values: Vec<T>, descriptors: Vec<FeatureDescriptor>) -> Result<Self> {
        if values.len() != descriptors.len() {
            return Err(Error::Shape(format!(
                "{} values but {} descriptors",
                values.len(),
                descriptors.len()
            )));
        }
        Ok(Self {
            values,
            descriptors,
        })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn descriptors(&self) -> &[FeatureDescriptor] {
        &self.descriptors
    }

    pub fn tags(&self) -> Vec<String> {
        self.descriptors.iter().map(FeatureDescriptor::tag).collect()
    }

    /// Looks a value up by its descriptor tag.
    pub fn get(&self, tag: &str) -> Option<T> {
        self.descriptors
            .iter()
            .position(|d| d.tag() == tag)
            .map(|i| self.values[i])
    }

    pub fn push(&mut self, value: T, descriptor: FeatureDescriptor) {
        self.values.push(value);
        self.descriptors.push(descriptor);
    }

    /// Appends `other` after `self`.
    pub fn concat(mut self, other: FeatureVector<T>) -> Self {
        self.values.extend(other.values);
        self.descriptors.extend(other.descriptors);
        self
    }

    /// Marks every descriptor with a modality.
    pub fn with_modality(mut self, modality: Modality) -> Self {
        for d in &mut self.descriptors {
            d.modality = Some(modality);
        }
        self
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tags_are_readable_and_unique() {
        let a = FeatureDescriptor::new(Family::ApEn, Source::Dim(3)).radius(1);
        let mut x = FeatureDescriptor::new(Family::XApEn, Source::Pair(0, 2)).radius(0);
        x.modality = Some(Modality::Video);
        let c = FeatureDescriptor::new(Family::Dft, Source::Dim(1)).coeff(4);
        assert_eq!(a.tag(), "apen:d3:r1");
        assert_eq!(x.tag(), "video:xapen:d0-d2:r0");
        assert_eq!(c.tag(), "dft:d1:c4");
    }

    #[test]
    fn mismatched_lengths_rejected() {
        assert!(FeatureVector::new(vec![1.0], vec![]).is_err());
    }
}
