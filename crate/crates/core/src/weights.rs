use serde::{Deserialize, Serialize};

use crate::error::{FusionError, Result};

/// Absolute tolerance on the unit-sum constraint.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-12;

/// Convex fusion weights over two or more sources.
///
/// Every weight lies strictly inside `(0, 1)` and the weights sum to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct FusionWeights(Vec<f64>);

impl FusionWeights {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.len() < 2 {
            return Err(FusionError::InvalidWeights(format!(
                "need at least two weights, got {}",
                weights.len()
            )));
        }
        if let Some(bad) = weights.iter().find(|w| !(**w > 0.0 && **w < 1.0)) {
            return Err(FusionError::InvalidWeights(format!(
                "weight {bad} outside (0, 1)"
            )));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(FusionError::InvalidWeights(format!(
                "weights sum to {sum}, not 1"
            )));
        }
        Ok(Self(weights))
    }

    /// `[omega1, 1 - omega1]`.
    pub fn pair(omega1: f64) -> Result<Self> {
        Self::new(vec![omega1, 1.0 - omega1])
    }

    /// Equal weights over `n` sources.
    pub fn uniform(n: usize) -> Result<Self> {
        Self::new(vec![1.0 / n as f64; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.0[i]
    }

    /// Fails unless there is exactly one weight per source.
    pub fn check_len(&self, n: usize) -> Result<()> {
        if self.0.len() != n {
            return Err(FusionError::LengthMismatch {
                expected: self.0.len(),
                got: n,
            });
        }
        Ok(())
    }

    /// The two weights of a pairwise fusion.
    pub(crate) fn as_pair(&self) -> Result<(f64, f64)> {
        match self.0.as_slice() {
            [a, b] => Ok((*a, *b)),
            other => Err(FusionError::LengthMismatch {
                expected: 2,
                got: other.len(),
            }),
        }
    }
}

impl TryFrom<Vec<f64>> for FusionWeights {
    type Error = FusionError;

    fn try_from(value: Vec<f64>) -> Result<Self> {
        Self::new(value)
    }
}

impl From<FusionWeights> for Vec<f64> {
    fn from(value: FusionWeights) -> Self {
        value.0
    }
}
