use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An observation sequence from one population.
///
/// Invariants enforced at construction: at least one observation, every value
/// finite. All tests in this crate consume observations through this type, so
/// NaN/infinity never reach the numerical code.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    values: Vec<f64>,
}

impl Sample {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySample);
        }
        for (index, &value) in values.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFiniteObservation { index, value });
            }
        }
        Ok(Sample { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Always false; kept so clippy-style `len`/`is_empty` pairing holds.
    pub fn is_empty(&self) -> bool {
        false
    }
}

impl TryFrom<Vec<f64>> for Sample {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Sample::new(values)
    }
}

/// How tied pairs (x == y) contribute to pairwise comparisons.
///
/// `Strict` scores a pair with the indicator of x < y, so ties contribute 0.
/// `Midrank` scores with the Heaviside step of y - x, so ties contribute 1/2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum TieMode {
    Strict,
    #[default]
    Midrank,
}
