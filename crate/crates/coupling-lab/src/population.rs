//! Finite populations of real values and the derived populations the
//! sampling schemes draw from.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A finite population `c_1, ..., c_N` of real values.
///
/// Repeats are legal: the identity of index `i` is what the coupling
/// processes track, not the value. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Population {
    values: Vec<f64>,
}

impl Population {
    /// Builds a population from a non-empty list of finite values.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidPopulation("population must be non-empty".into()));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidPopulation(format!("non-finite value {v}")));
        }
        Ok(Self { values })
    }

    /// Two-color urn with `a` ones (red) followed by `b` zeros (blue).
    pub fn two_color_urn(a: usize, b: usize) -> Result<Self> {
        if a + b == 0 {
            return Err(Error::InvalidPopulation("urn must contain at least one ball".into()));
        }
        let mut values = vec![1.0; a];
        values.extend(std::iter::repeat(0.0).take(b));
        Ok(Self { values })
    }

    /// The k-fold multiplication: `k` copies of every value, grouped by
    /// original index (cohort order).
    pub fn multiply(&self, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("multiplicity k must be >= 1".into()));
        }
        let mut values = Vec::with_capacity(self.values.len() * k);
        for &v in &self.values {
            values.extend(std::iter::repeat(v).take(k));
        }
        Ok(Self { values })
    }

    /// Arithmetic mean of the values.
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn size(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value of label `i` (0-based).
    pub fn value(&self, i: usize) -> f64 {
        self.values[i]
    }
}
