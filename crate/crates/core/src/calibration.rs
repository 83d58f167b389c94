//! p-value calibrations: the -e p log(p) robust lower bound, the Wilks
//! chi-square p-value for the exponential test, and the Ghosh-Samanta
//! scaled Bayes factor for the families where it exists.

use crate::error::{EvidenceError, Result};
use crate::exponential::ExpStats;
use crate::logvalue::LogValue;
use crate::model::ModelTest;
use crate::report::{BoundReport, BoundVariant};
use crate::sample::Sample;
use crate::specialfn::chi2_cdf;

/// A p-value with its provenance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PValue {
    pub p: f64,
    pub source: PValueSource,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PValueSource {
    Wilks,
    Exact,
    Supplied,
}

impl PValue {
    pub fn supplied(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(EvidenceError::DomainViolation(format!(
                "p-value must lie in [0,1], got {p}"
            )));
        }
        Ok(PValue {
            p,
            source: PValueSource::Supplied,
        })
    }
}

/// Universal robust lower bound on B01: -e p ln(p) for p < 1/e, else 1.
/// Continuous at 1/e; p = 0 maps to 0 by the limit.
pub fn robust_lower_bound(p: PValue) -> f64 {
    if p.p == 0.0 {
        return 0.0;
    }
    if p.p >= (-1.0f64).exp() {
        1.0
    } else {
        (-std::f64::consts::E * p.p * p.p.ln()).min(1.0)
    }
}

/// Wilks-approximation p-value for H0: lambda = lambda0 on exponential
/// data: -2 log LR against chi-square with one degree of freedom.
pub fn exp_wilks_pvalue(sample: &Sample, lambda0: f64) -> Result<PValue> {
    if lambda0 <= 0.0 || !lambda0.is_finite() {
        return Err(EvidenceError::DomainViolation(format!(
            "rate lambda0 must be positive, got {lambda0}"
        )));
    }
    let stats = ExpStats::from_sample(sample)?;
    if stats.n == 0 {
        return Err(EvidenceError::InsufficientData(
            "Wilks p-value needs at least one observation".into(),
        ));
    }
    if stats.s <= 0.0 {
        return Err(EvidenceError::DomainViolation(
            "sum of observations must be positive".into(),
        ));
    }
    let n = stats.n as f64;
    let ln_lr_null = n * lambda0.ln() - lambda0 * stats.s;
    let ln_lr_alt = n * (n.ln() - stats.s.ln() - 1.0);
    // Rounding can push the statistic a hair below zero at the MLE.
    let ts = (-2.0 * (ln_lr_null - ln_lr_alt)).max(0.0);
    Ok(PValue {
        p: 1.0 - chi2_cdf(ts, 1)?,
        source: PValueSource::Wilks,
    })
}

/// Ghosh-Samanta Bayes factor: the constant c solving c B01(y0) = 1 at
/// the training point maximizing the null marginal. Exists for the
/// simple normal-mean test (where it coincides with the IBF upper bound)
/// and provably not for the exponential test (c is infinite at y0 = 0).
pub fn gs_bayes_factor(test: &ModelTest, sample: &Sample) -> Result<BoundReport> {
    match test {
        ModelTest::SimpleNormalMean => {
            sample.require_len(1)?;
            let n = sample.len() as f64;
            let sum_sq: f64 = sample.values.iter().map(|y| y * y).sum();
            let value = LogValue::from_ln(
                (n - 1.0) * 0.5 * (2.0 * std::f64::consts::PI).ln() + sum_sq / 2.0,
            );
            Ok(BoundReport::new(BoundVariant::Gs10, value)
                .with_notes("c = 1/sqrt(2 pi); equals the IBF upper bound for this test"))
        }
        ModelTest::Exponential { .. } => Err(EvidenceError::NonExistentBound(
            "the null marginal peaks at y0 = 0 where the scaling constant is infinite".into(),
        )),
        other => Err(EvidenceError::DomainViolation(format!(
            "GS Bayes factor is only defined for the simple normal mean and exponential \
             tests, not {other:?}"
        ))),
    }
}
