use std::cmp::Ordering;
use std::ops::{Add, Div, Mul, Sub};

use crate::error::{EvidenceError, Result};

/// A non-negative quantity stored as its natural logarithm.
///
/// All Bayes factors and marginal likelihoods in this crate live in log
/// space; evaluating Γ(n) directly overflows f64 near n = 171, which rules
/// out linear-space arithmetic for the sample sizes we target. Exact zeros
/// (e.g. the marginal of an improper training point) are carried as an
/// explicit flag rather than as -inf so that properness stays decidable.
#[derive(Clone, Copy, Debug)]
pub struct LogValue {
    log: f64,
    zero: bool,
}

impl LogValue {
    /// Value `exp(ln_value)`, given in log space.
    pub fn from_ln(ln_value: f64) -> Self {
        LogValue {
            log: ln_value,
            zero: false,
        }
    }

    /// The exact zero.
    pub fn zero() -> Self {
        LogValue {
            log: f64::NEG_INFINITY,
            zero: true,
        }
    }

    /// From a linear-space value; negative input is a caller bug.
    pub fn from_value(v: f64) -> Self {
        assert!(v >= 0.0, "LogValue::from_value needs a non-negative value");
        if v == 0.0 {
            Self::zero()
        } else {
            Self::from_ln(v.ln())
        }
    }

    pub fn is_zero(&self) -> bool {
        self.zero
    }

    /// Natural log; -inf for the exact zero.
    pub fn ln(&self) -> f64 {
        if self.zero {
            f64::NEG_INFINITY
        } else {
            self.log
        }
    }

    /// Base-10 log; -inf for the exact zero.
    pub fn log10(&self) -> f64 {
        self.ln() / std::f64::consts::LN_10
    }

    /// Back to linear space (may under/overflow; use for small magnitudes).
    pub fn value(&self) -> f64 {
        if self.zero {
            0.0
        } else {
            self.log.exp()
        }
    }

    /// Multiplicative inverse. Fails on the exact zero.
    pub fn recip(&self) -> Result<LogValue> {
        if self.zero {
            Err(EvidenceError::DomainViolation(
                "reciprocal of an exact zero".into(),
            ))
        } else {
            Ok(LogValue::from_ln(-self.log))
        }
    }
}

impl PartialEq for LogValue {
    fn eq(&self, other: &Self) -> bool {
        match (self.zero, other.zero) {
            (true, true) => true,
            (false, false) => self.log == other.log,
            _ => false,
        }
    }
}

impl PartialOrd for LogValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self.zero, other.zero) {
            (true, true) => Some(Ordering::Equal),
            (true, false) => Some(Ordering::Less),
            (false, true) => Some(Ordering::Greater),
            (false, false) => self.log.partial_cmp(&other.log),
        }
    }
}

impl Mul for LogValue {
    type Output = LogValue;
    fn mul(self, rhs: LogValue) -> LogValue {
        if self.zero || rhs.zero {
            LogValue::zero()
        } else {
            LogValue::from_ln(self.log + rhs.log)
        }
    }
}

impl Div for LogValue {
    type Output = LogValue;
    fn div(self, rhs: LogValue) -> LogValue {
        assert!(!rhs.zero, "division by an exact-zero LogValue");
        if self.zero {
            LogValue::zero()
        } else {
            LogValue::from_ln(self.log - rhs.log)
        }
    }
}

// Convenience aliases on the log scale itself: `a + b` multiplies the
// underlying magnitudes, matching how the formulas are written in log space.
impl Add<f64> for LogValue {
    type Output = LogValue;
    fn add(self, rhs: f64) -> LogValue {
        if self.zero {
            LogValue::zero()
        } else {
            LogValue::from_ln(self.log + rhs)
        }
    }
}

impl Sub<f64> for LogValue {
    type Output = LogValue;
    fn sub(self, rhs: f64) -> LogValue {
        if self.zero {
            LogValue::zero()
        } else {
            LogValue::from_ln(self.log - rhs)
        }
    }
}

/// log(sum(exp(v))) over plain natural-log values, guarded against overflow.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let m = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let s: f64 = values.iter().map(|v| (v - m).exp()).sum();
    m + s.ln()
}

/// log of the arithmetic mean of exp(v).
pub fn log_mean_exp(values: &[f64]) -> f64 {
    log_sum_exp(values) - (values.len() as f64).ln()
}
