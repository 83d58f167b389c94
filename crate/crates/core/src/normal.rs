//! Normal-family tests: the precision (scale) test with unknown mean, the
//! mean test with known and with unknown variance, and the simple
//! N(0,1)-vs-N(mu,1) test, together with their intrinsic-bound machinery
//! and the SP/intrinsic prior densities.

use crate::error::{EvidenceError, Result};
use crate::logvalue::LogValue;
use crate::report::{Attainer, BoundReport, BoundVariant};
use crate::sample::Sample;
use crate::specialfn::{ln_gamma, ln_gamma_unchecked};

use std::f64::consts::PI;

/// Sufficient statistics for the scale test: n, the centered sum of
/// squares S^2 and the sample mean.
#[derive(Clone, Copy, Debug)]
pub struct NormalScaleStats {
    pub n: usize,
    pub s2: f64,
    pub ybar: f64,
}

impl NormalScaleStats {
    pub fn from_sample(sample: &Sample) -> Result<Self> {
        sample.require_len(1)?;
        Ok(NormalScaleStats {
            n: sample.len(),
            s2: sample.centered_sum_sq(),
            ybar: sample.mean(),
        })
    }
}

/// Difference of a two-point training sample for the scale test.
#[derive(Clone, Copy, Debug)]
pub struct PairDiff {
    pub d: f64,
}

impl PairDiff {
    pub fn new(y1: f64, y2: f64) -> Self {
        PairDiff { d: y1 - y2 }
    }

    pub fn is_proper(&self) -> bool {
        self.d != 0.0
    }
}

fn check_h0(h0: f64) -> Result<()> {
    if h0 <= 0.0 || !h0.is_finite() {
        return Err(EvidenceError::DomainViolation(format!(
            "precision h0 must be positive, got {h0}"
        )));
    }
    Ok(())
}

/// Full-sample B01 for the scale test under the independence Jeffreys
/// prior (r = 1), constants dropped:
/// h0^((n-1)/2) exp(-h0 S^2/2) / ((2/S^2)^((n-1)/2) Gamma((n-1)/2)).
pub fn scale_bf01_full(stats: NormalScaleStats, h0: f64) -> Result<LogValue> {
    check_h0(h0)?;
    if stats.n < 3 {
        return Err(EvidenceError::DomainViolation(format!(
            "scale test needs n >= 3 for a proper posterior, got {}",
            stats.n
        )));
    }
    if stats.s2 <= 0.0 {
        return Err(EvidenceError::DomainViolation(
            "scale test needs positive centered sum of squares".into(),
        ));
    }
    let half = (stats.n as f64 - 1.0) / 2.0;
    Ok(LogValue::from_ln(
        half * h0.ln() - h0 * stats.s2 / 2.0 - half * (2.0 / stats.s2).ln() - ln_gamma(half)?,
    ))
}

/// Marginal ratio m0/m1 of a two-point training sample:
/// (|d|/2) sqrt(h0/pi) exp(-h0 d^2/4).
///
/// This is the exact ratio of the pair marginals (the one the trained
/// Bayes factor identity uses); the classical correction constant
/// reported by `scale_mts_sup` carries an extra factor 2 from its
/// original constant convention.
pub fn scale_pair_bf01(pair: PairDiff, h0: f64) -> Result<LogValue> {
    check_h0(h0)?;
    if !pair.is_proper() {
        return Err(EvidenceError::ImproperTrainingSample(
            "two-point training sample with equal observations".into(),
        ));
    }
    let d = pair.d.abs();
    Ok(LogValue::from_ln(
        d.ln() - 2f64.ln() + 0.5 * (h0 / PI).ln() - h0 * d * d / 4.0,
    ))
}

/// Supremum of the training-pair Bayes factor over all pair differences.
#[derive(Clone, Copy, Debug)]
pub struct ScaleMtsSup {
    /// The attaining pair difference sqrt(2/h0).
    pub d_hat: f64,
    /// The correction constant sqrt(h0/pi) exp(-h0 d_hat^2/4) |d_hat|,
    /// equal to sqrt(2/pi) e^(-1/2) = 0.4839 for every h0.
    pub correction: LogValue,
}

/// The pair difference maximizing the training-sample Bayes factor and
/// the resulting correction constant.
pub fn scale_mts_sup(h0: f64) -> Result<ScaleMtsSup> {
    check_h0(h0)?;
    let d_hat = (2.0 / h0).sqrt();
    let correction =
        LogValue::from_ln(0.5 * (h0 / PI).ln() - h0 * d_hat * d_hat / 4.0 + d_hat.ln());
    Ok(ScaleMtsSup { d_hat, correction })
}

/// Expected-IBF ratio 2 sqrt(h) / (pi (h + 1)) as a function of the
/// precision in units of h0. Maximized at h = 1 with value 1/pi.
pub fn scale_eibf_ratio(h: f64) -> Result<f64> {
    if h <= 0.0 || !h.is_finite() {
        return Err(EvidenceError::DomainViolation(format!(
            "precision must be positive, got {h}"
        )));
    }
    Ok(2.0 * h.sqrt() / (PI * (h + 1.0)))
}

/// Prior families used by the SP and intrinsic priors.
#[derive(Clone, Copy, Debug)]
pub enum PriorFamily {
    /// Gamma(shape 1/2, scale 2 h0).
    GammaHalf { h0: f64 },
    /// Scaled beta of the second kind with shape (p, q) and scale b.
    SBeta2 { p: f64, q: f64, b: f64 },
    /// Cauchy location family; `inv_scale_sq` is 1/gamma^2.
    CauchyLoc { center: f64, inv_scale_sq: f64 },
    /// Exponential with the given rate.
    ExponentialRate { rate: f64 },
    /// Improper flat density (identically one).
    Flat,
}

/// An evaluable prior density on its stated support.
#[derive(Clone, Copy, Debug)]
pub struct PriorDensity {
    pub family: PriorFamily,
}

impl PriorDensity {
    pub fn new(family: PriorFamily) -> Self {
        PriorDensity { family }
    }

    /// Density value at `x`; zero outside the support.
    pub fn density(&self, x: f64) -> f64 {
        match self.family {
            PriorFamily::GammaHalf { h0 } => {
                if x <= 0.0 {
                    0.0
                } else {
                    (-0.5 * (2.0 * PI * x * h0).ln() - x / (2.0 * h0)).exp()
                }
            }
            PriorFamily::SBeta2 { p, q, b } => {
                if x <= 0.0 {
                    0.0
                } else {
                    let ln_norm = ln_gamma_unchecked(p + q)
                        - ln_gamma_unchecked(p)
                        - ln_gamma_unchecked(q)
                        - b.ln();
                    (ln_norm + (p - 1.0) * (x / b).ln() - (p + q) * (1.0 + x / b).ln()).exp()
                }
            }
            PriorFamily::CauchyLoc {
                center,
                inv_scale_sq,
            } => {
                let gamma = inv_scale_sq.sqrt().recip();
                gamma / (PI * (gamma * gamma + (x - center) * (x - center)))
            }
            PriorFamily::ExponentialRate { rate } => {
                if x < 0.0 {
                    0.0
                } else {
                    rate * (-rate * x).exp()
                }
            }
            PriorFamily::Flat => 1.0,
        }
    }
}

/// SP prior for the precision: Gamma(1/2, scale 2 h0).
pub fn scale_sp_prior(h0: f64) -> Result<PriorDensity> {
    check_h0(h0)?;
    Ok(PriorDensity::new(PriorFamily::GammaHalf { h0 }))
}

/// Intrinsic prior for the precision: SBeta2(p = 1/2, q = 1/2, b = h0).
pub fn scale_intrinsic_prior(h0: f64) -> Result<PriorDensity> {
    check_h0(h0)?;
    Ok(PriorDensity::new(PriorFamily::SBeta2 {
        p: 0.5,
        q: 0.5,
        b: h0,
    }))
}

/// SP prior for the mean: Cauchy centered at the training-pair mean with
/// kernel 1/(1/(2 h0) + (mu - center)^2), normalized.
pub fn scale_sp_mu_prior(h0: f64, center: f64) -> Result<PriorDensity> {
    check_h0(h0)?;
    Ok(PriorDensity::new(PriorFamily::CauchyLoc {
        center,
        inv_scale_sq: 2.0 * h0,
    }))
}

/// Bounds for the mean test with known standard deviation.
#[derive(Clone, Debug)]
pub struct MeanKnownBounds {
    pub upper10: BoundReport,
    pub lower01: BoundReport,
    pub eibf10: BoundReport,
}

/// Theoretical IBF bounds and the expected IBF for H0: mu = mu0 with
/// sigma0 known. The training-point supremum of B01 is 1/(sqrt(2 pi) sigma0),
/// attained at y = mu0.
pub fn mean_known_bounds(sample: &Sample, mu0: f64, sigma0: f64) -> Result<MeanKnownBounds> {
    if sigma0 <= 0.0 || !sigma0.is_finite() {
        return Err(EvidenceError::DomainViolation(format!(
            "sigma0 must be positive, got {sigma0}"
        )));
    }
    sample.require_len(1)?;
    let n = sample.len() as f64;
    let dev = sample.mean() - mu0;
    let z = n * dev * dev / (2.0 * sigma0 * sigma0);
    let upper = LogValue::from_ln(z - 0.5 * n.ln());
    let eibf = LogValue::from_ln(
        -0.5 * (2.0 * n).ln() + (n - 0.5) * dev * dev / (2.0 * sigma0 * sigma0),
    );
    Ok(MeanKnownBounds {
        upper10: BoundReport::new(BoundVariant::TheoreticalUpper10, upper)
            .with_attainer(Attainer::Point(mu0))
            .with_notes("training-point supremum 1/(sqrt(2 pi) sigma0) at y = mu0"),
        lower01: BoundReport::new(BoundVariant::TheoreticalLower01, upper.recip()?)
            .with_attainer(Attainer::Point(mu0)),
        eibf10: BoundReport::new(BoundVariant::Eibf10, eibf),
    })
}

/// Bounds for the mean test with unknown variance.
#[derive(Clone, Debug)]
pub struct MeanUnknownBounds {
    pub upper10: BoundReport,
    pub lower01: BoundReport,
}

/// Theoretical IBF bounds for H0: mu = mu0 with sigma unknown:
/// upper10 = sqrt(2/n) (sum (y - mu0)^2 / sum (y - ybar)^2)^(n/2).
pub fn mean_unknown_bounds(sample: &Sample, mu0: f64) -> Result<MeanUnknownBounds> {
    if sample.len() < 3 {
        return Err(EvidenceError::DomainViolation(format!(
            "mean test with unknown variance needs n >= 3, got {}",
            sample.len()
        )));
    }
    let n = sample.len() as f64;
    let ss_centered = sample.centered_sum_sq();
    if ss_centered <= 0.0 {
        return Err(EvidenceError::DomainViolation(
            "all observations equal; the alternative's marginal is improper".into(),
        ));
    }
    let ss_null: f64 = sample.values.iter().map(|y| (y - mu0) * (y - mu0)).sum();
    let upper =
        LogValue::from_ln(0.5 * (2.0 / n).ln() + (n / 2.0) * (ss_null / ss_centered).ln());
    let note = format!(
        "training-pair supremum 1/sqrt(pi) = {:.6}, attained at y1 = -y2 after centering at mu0",
        1.0 / PI.sqrt()
    );
    Ok(MeanUnknownBounds {
        upper10: BoundReport::new(BoundVariant::TheoreticalUpper10, upper).with_notes(note),
        lower01: BoundReport::new(BoundVariant::TheoreticalLower01, upper.recip()?),
    })
}

/// IBF upper bound for the simple N(0,1) vs N(mu,1) test:
/// (sqrt(2 pi))^(n-1) exp(sum y_i^2 / 2). Coincides with the
/// Ghosh-Samanta Bayes factor for this pair.
pub fn simple_mean_upper10(sample: &Sample) -> Result<BoundReport> {
    sample.require_len(1)?;
    let n = sample.len() as f64;
    let sum_sq: f64 = sample.values.iter().map(|y| y * y).sum();
    let value = LogValue::from_ln((n - 1.0) * 0.5 * (2.0 * PI).ln() + sum_sq / 2.0);
    Ok(BoundReport::new(BoundVariant::TheoreticalUpper10, value)
        .with_attainer(Attainer::Point(0.0))
        .with_notes("equals the GS Bayes factor for this test"))
}
