//! Exponential-null evidence: full and per-training-point Bayes factors,
//! theoretical and empirical intrinsic bounds, the arithmetic-intrinsic
//! value, and the SP and EP priors with their Bayes factors.

use crate::error::{EvidenceError, Result};
use crate::logvalue::{log_mean_exp, log_sum_exp, LogValue};
use crate::mts::TrainingIndex;
use crate::normal::{PriorDensity, PriorFamily};
use crate::report::{Attainer, BoundReport, BoundVariant};
use crate::sample::Sample;
use crate::specialfn::ln_gamma;

/// Sufficient statistics of an exponential sample.
#[derive(Clone, Copy, Debug)]
pub struct ExpStats {
    pub n: usize,
    pub s: f64,
}

impl ExpStats {
    pub fn from_sample(sample: &Sample) -> Result<Self> {
        if sample.values.iter().any(|&y| y < 0.0 || !y.is_finite()) {
            return Err(EvidenceError::DomainViolation(
                "exponential data must be non-negative".into(),
            ));
        }
        Ok(ExpStats {
            n: sample.len(),
            s: sample.values.iter().sum(),
        })
    }
}

fn check_lambda0(lambda0: f64) -> Result<()> {
    if lambda0 <= 0.0 || !lambda0.is_finite() {
        return Err(EvidenceError::DomainViolation(format!(
            "rate lambda0 must be positive, got {lambda0}"
        )));
    }
    Ok(())
}

/// Full-sample B01 under the 1/lambda prior:
/// lambda0^n exp(-lambda0 S) S^n / Gamma(n).
pub fn exp_bf01_full(stats: ExpStats, lambda0: f64) -> Result<LogValue> {
    check_lambda0(lambda0)?;
    if stats.n < 2 {
        return Err(EvidenceError::DomainViolation(format!(
            "the full exponential Bayes factor needs n >= 2, got {}",
            stats.n
        )));
    }
    if stats.s <= 0.0 {
        return Err(EvidenceError::DomainViolation(
            "sum of observations must be positive".into(),
        ));
    }
    let n = stats.n as f64;
    Ok(LogValue::from_ln(
        n * lambda0.ln() - lambda0 * stats.s + n * stats.s.ln() - ln_gamma(n)?,
    ))
}

/// Single-training-point B01: y*lambda0*exp(-lambda0*y). Exact zero at
/// y = 0 (the alternative's marginal diverges there).
pub fn exp_mts_bf01(y_ell: f64, lambda0: f64) -> Result<LogValue> {
    check_lambda0(lambda0)?;
    if y_ell < 0.0 {
        return Err(EvidenceError::DomainViolation(format!(
            "exponential observations are non-negative, got {y_ell}"
        )));
    }
    if y_ell == 0.0 {
        return Ok(LogValue::zero());
    }
    Ok(LogValue::from_ln((y_ell * lambda0).ln() - lambda0 * y_ell))
}

/// A reciprocal pair of bounds on the same variant.
#[derive(Clone, Debug)]
pub struct BoundPair {
    pub upper10: BoundReport,
    pub lower01: BoundReport,
}

/// All intrinsic bounds for the exponential test.
#[derive(Clone, Debug)]
pub struct ExpBounds {
    pub theoretical: BoundPair,
    pub empirical: BoundPair,
    pub aibf10: BoundReport,
}

/// Theoretical and empirical IBF bounds plus the arithmetic IBF.
///
/// The training-sample B01 is maximized over the observed points (the
/// chain B01_lower = B01_full / sup B01(mts) fixes the direction; ties
/// break towards the smallest index). The theoretical supremum is 1/e,
/// attained at y = 1/lambda0.
pub fn exp_bounds(sample: &Sample, lambda0: f64) -> Result<ExpBounds> {
    let stats = ExpStats::from_sample(sample)?;
    let mut best: Option<(usize, f64)> = None;
    let mut mts_logs: Vec<f64> = Vec::new();
    for (i, &y) in sample.values.iter().enumerate() {
        let b01 = exp_mts_bf01(y, lambda0)?;
        if b01.is_zero() {
            continue;
        }
        mts_logs.push(b01.ln());
        if best.map_or(true, |(_, v)| b01.ln() > v) {
            best = Some((i, b01.ln()));
        }
    }
    let (arg, sup) = best.ok_or_else(|| {
        EvidenceError::ImproperTrainingSample(
            "every observation is zero; no proper training point".into(),
        )
    })?;
    let full01 = exp_bf01_full(stats, lambda0)?;
    let full10 = full01.recip()?;
    let attainer = Attainer::Sample(TrainingIndex::new(vec![arg])?);

    let theo_upper = full10 + (-1.0);
    let emp_upper = full10 + sup;
    let aibf10 = full10 + log_mean_exp(&mts_logs);

    Ok(ExpBounds {
        theoretical: BoundPair {
            upper10: BoundReport::new(BoundVariant::TheoreticalUpper10, theo_upper)
                .with_attainer(Attainer::Point(1.0 / lambda0))
                .with_notes("training-point supremum 1/e at y = 1/lambda0"),
            lower01: BoundReport::new(BoundVariant::TheoreticalLower01, theo_upper.recip()?)
                .with_attainer(Attainer::Point(1.0 / lambda0)),
        },
        empirical: BoundPair {
            upper10: BoundReport::new(BoundVariant::EmpiricalUpper10, emp_upper)
                .with_attainer(attainer.clone())
                .with_notes(
                    "argmax of the training-point B01 over observed points; the boxed \
                     empirical bound's argmin direction is inconsistent with the bound \
                     chain and is not used",
                ),
            lower01: BoundReport::new(BoundVariant::EmpiricalLower01, emp_upper.recip()?)
                .with_attainer(attainer),
        },
        aibf10: BoundReport::new(BoundVariant::Aibf10, aibf10),
    })
}

/// SP Bayes factor B10 under the theoretical SP prior:
/// Gamma(n+1) exp(lambda0 S) / ((S + 1/lambda0)^(n+1) lambda0^(n+1)).
pub fn exp_sp_bf10(stats: ExpStats, lambda0: f64) -> Result<LogValue> {
    check_lambda0(lambda0)?;
    if stats.n == 0 {
        return Err(EvidenceError::InsufficientData(
            "SP Bayes factor needs at least one observation".into(),
        ));
    }
    let n = stats.n as f64;
    Ok(LogValue::from_ln(
        ln_gamma(n + 1.0)? + lambda0 * stats.s
            - (n + 1.0) * (stats.s + 1.0 / lambda0).ln()
            - (n + 1.0) * lambda0.ln(),
    ))
}

/// Theoretical SP priors for the B10 orientation: the null has no free
/// parameter (point mass at lambda0), the alternative gets an
/// exponential prior with rate 1/lambda0.
pub fn exp_sp_priors(lambda0: f64) -> Result<(PriorDensity, PriorDensity)> {
    check_lambda0(lambda0)?;
    Ok((
        PriorDensity::new(PriorFamily::Flat),
        PriorDensity::new(PriorFamily::ExponentialRate {
            rate: 1.0 / lambda0,
        }),
    ))
}

/// Expected-posterior prior density at `lambda`: sum_i y_i e^{-lambda y_i} / n.
pub fn exp_ep_prior(sample: &Sample, lambda: f64) -> Result<f64> {
    let stats = ExpStats::from_sample(sample)?;
    if stats.n == 0 {
        return Err(EvidenceError::InsufficientData(
            "EP prior needs at least one observation".into(),
        ));
    }
    if lambda < 0.0 {
        return Err(EvidenceError::DomainViolation(format!(
            "rate must be non-negative, got {lambda}"
        )));
    }
    if stats.s <= 0.0 {
        return Err(EvidenceError::ImproperTrainingSample(
            "all observations are zero; EP prior degenerates".into(),
        ));
    }
    Ok(sample
        .values
        .iter()
        .map(|&y| y * (-lambda * y).exp())
        .sum::<f64>()
        / stats.n as f64)
}

/// EP Bayes factor B10. The sum over observations is accumulated with
/// log-sum-exp so large n stays finite.
pub fn exp_ep_bf10(sample: &Sample, lambda0: f64) -> Result<LogValue> {
    check_lambda0(lambda0)?;
    let stats = ExpStats::from_sample(sample)?;
    if stats.n == 0 {
        return Err(EvidenceError::InsufficientData(
            "EP Bayes factor needs at least one observation".into(),
        ));
    }
    if stats.s <= 0.0 {
        return Err(EvidenceError::ImproperTrainingSample(
            "all observations are zero; EP marginal degenerates".into(),
        ));
    }
    let n = stats.n as f64;
    let terms: Vec<f64> = sample
        .values
        .iter()
        .filter(|&&y| y > 0.0)
        .map(|&y| y.ln() - (n + 1.0) * (stats.s + y).ln())
        .collect();
    let ln_m1 = ln_gamma(n + 1.0)? - n.ln() + log_sum_exp(&terms);
    let ln_m0 = n * lambda0.ln() - lambda0 * stats.s;
    Ok(LogValue::from_ln(ln_m1 - ln_m0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(values: &[f64]) -> Sample {
        Sample::new(values.to_vec(), "test")
    }

    #[test]
    fn full_bf_hand_case() {
        // n = 2, S = 2, lambda0 = 1: B01 = e^-2 * 4 = exp(ln 4 - 2).
        let stats = ExpStats::from_sample(&sample(&[0.5, 1.5])).unwrap();
        let b = exp_bf01_full(stats, 1.0).unwrap();
        assert!((b.ln() - (4f64.ln() - 2.0)).abs() < 1e-12);
    }

    #[test]
    fn full_bf_small_lambda_underflows_to_tiny_log() {
        let stats = ExpStats::from_sample(&sample(&[1.0, 2.0])).unwrap();
        let b = exp_bf01_full(stats, 1e-300).unwrap();
        assert!(b.ln() < -1000.0);
        assert!(b.ln().is_finite());
    }

    #[test]
    fn full_bf_requires_two_observations() {
        let stats = ExpStats { n: 1, s: 1.0 };
        assert!(matches!(
            exp_bf01_full(stats, 1.0),
            Err(EvidenceError::DomainViolation(_))
        ));
    }

    #[test]
    fn mts_bf_maximum_is_one_over_e() {
        // y = 1/lambda0 gives exactly -1 in natural log.
        for &l0 in &[0.5, 1.0, 5.0] {
            let b = exp_mts_bf01(1.0 / l0, l0).unwrap();
            assert!((b.ln() + 1.0).abs() < 1e-12, "lambda0 = {l0}");
        }
        assert!(exp_mts_bf01(0.0, 1.0).unwrap().is_zero());
    }

    #[test]
    fn mts_bf_unimodal_with_max_at_reciprocal_rate() {
        // Finite-difference sign change exactly once, at y = 1/lambda0.
        let l0 = 2.0;
        let grid: Vec<f64> = (1..400).map(|i| i as f64 * 0.005).collect();
        let vals: Vec<f64> = grid
            .iter()
            .map(|&y| exp_mts_bf01(y, l0).unwrap().ln())
            .collect();
        let mut sign_changes = 0;
        for w in vals.windows(2).collect::<Vec<_>>().windows(2) {
            let d1 = w[0][1] - w[0][0];
            let d2 = w[1][1] - w[1][0];
            if d1 > 0.0 && d2 < 0.0 {
                sign_changes += 1;
            }
            assert!(!(d1 < 0.0 && d2 > 0.0), "function rose after falling");
        }
        assert_eq!(sign_changes, 1);
    }

    #[test]
    fn bounds_attain_sup_when_reciprocal_rate_observed() {
        let s = sample(&[1.0, 2.0, 0.3]);
        let b = exp_bounds(&s, 1.0).unwrap();
        assert!(
            (b.empirical.upper10.value.ln() - b.theoretical.upper10.value.ln()).abs() < 1e-12
        );
    }

    #[test]
    fn bounds_empirical_argmax_hand_case() {
        // data {1, 2}, lambda0 = 1: B01(1) = e^-1 > B01(2) = 2 e^-2.
        let s = sample(&[1.0, 2.0]);
        let b = exp_bounds(&s, 1.0).unwrap();
        let full10 = exp_bf01_full(ExpStats { n: 2, s: 3.0 }, 1.0)
            .unwrap()
            .recip()
            .unwrap();
        assert!((b.empirical.upper10.value.ln() - (full10.ln() - 1.0)).abs() < 1e-12);
        match &b.empirical.upper10.attainer {
            Some(Attainer::Sample(t)) => assert_eq!(t.indices(), &[0]),
            other => panic!("unexpected attainer {other:?}"),
        }
        // Reciprocal consistency.
        assert_eq!(
            b.empirical.lower01.value.ln(),
            -b.empirical.upper10.value.ln()
        );
        assert_eq!(
            b.theoretical.lower01.value.ln(),
            -b.theoretical.upper10.value.ln()
        );
    }

    #[test]
    fn bounds_all_zero_data_improper() {
        let s = sample(&[0.0, 0.0]);
        assert!(matches!(
            exp_bounds(&s, 1.0),
            Err(EvidenceError::ImproperTrainingSample(_))
        ));
    }

    #[test]
    fn sp_bf_hand_case() {
        // n = 1, y = {1}, lambda0 = 1: Gamma(2) e / (2^2 * 1) = e/4.
        let stats = ExpStats { n: 1, s: 1.0 };
        let b = exp_sp_bf10(stats, 1.0).unwrap();
        assert!((b.ln() - (1.0 - 4f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn ep_prior_single_point_reduction() {
        // n = 1, y = {2}: prior is 2 e^{-2 lambda}.
        let s = sample(&[2.0]);
        for &l in &[0.1, 0.7, 1.9] {
            let got = exp_ep_prior(&s, l).unwrap();
            assert!((got - 2.0 * (-2.0 * l).exp()).abs() < 1e-14);
        }
    }

    #[test]
    fn ep_bf_single_point_reduction() {
        // n = 1, y = {2}: m1 = Gamma(2) * 2 / 4^2 = 1/8, m0 = lambda0 e^{-2 lambda0}.
        let s = sample(&[2.0]);
        let l0 = 0.5;
        let b = exp_ep_bf10(&s, l0).unwrap();
        let want = (0.125f64).ln() - (l0.ln() - 2.0 * l0);
        assert!((b.ln() - want).abs() < 1e-12);
    }

    #[test]
    fn bounds_stay_finite_at_n_500() {
        let values: Vec<f64> = (1..=500).map(|i| 0.5 + (i % 7) as f64 * 0.3).collect();
        let s = sample(&values);
        let b = exp_bounds(&s, 1.0).unwrap();
        for r in [
            &b.theoretical.upper10,
            &b.theoretical.lower01,
            &b.empirical.upper10,
            &b.empirical.lower01,
            &b.aibf10,
        ] {
            assert!(r.value.ln().is_finite(), "{:?} not finite", r.variant);
        }
    }
}
