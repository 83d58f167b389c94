use crate::error::{EvidenceError, Result};

/// Ordered sequence of real observations with a provenance label.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub values: Vec<f64>,
    pub label: String,
}

impl Sample {
    pub fn new(values: Vec<f64>, label: impl Into<String>) -> Self {
        Sample {
            values,
            label: label.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Fails unless the sample holds at least `min` observations.
    pub fn require_len(&self, min: usize) -> Result<()> {
        if self.len() < min {
            Err(EvidenceError::InsufficientData(format!(
                "sample '{}' has {} observations, need at least {}",
                self.label,
                self.len(),
                min
            )))
        } else {
            Ok(())
        }
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.len() as f64
    }

    /// Sum of squared deviations about the sample mean.
    pub fn centered_sum_sq(&self) -> f64 {
        let m = self.mean();
        self.values.iter().map(|y| (y - m) * (y - m)).sum()
    }

    /// Checks every value is a non-negative integer (count data) and
    /// returns them as u64. Counts above 1e6 are rejected to keep gamma
    /// arguments in range.
    pub fn as_counts(&self) -> Result<Vec<u64>> {
        self.values
            .iter()
            .map(|&v| {
                if v < 0.0 || v.fract() != 0.0 || !v.is_finite() {
                    Err(EvidenceError::DomainViolation(format!(
                        "count data requires non-negative integers, got {v}"
                    )))
                } else if v > 1e6 {
                    Err(EvidenceError::DomainViolation(format!(
                        "count {v} exceeds the supported maximum 1e6"
                    )))
                } else {
                    Ok(v as u64)
                }
            })
            .collect()
    }
}
