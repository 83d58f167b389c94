use crate::error::{EvidenceError, Result};
use crate::linear::{AnovaSpec, DesignPair};

/// Descriptor of one supported hypothesis-test family with its null
/// parameters. The minimal-training-sample size of each family follows
/// from the larger model's parameter dimension (+1 for linear families).
#[derive(Clone, Debug)]
pub enum ModelTest {
    /// H0: precision = h0 vs H1: precision != h0, mean unknown.
    NormalScale { h0: f64 },
    /// H0: mu = mu0 vs H1: mu != mu0, standard deviation sigma0 known.
    NormalMeanKnownVar { mu0: f64, sigma0: f64 },
    /// H0: mu = mu0 vs H1: mu != mu0, variance unknown.
    NormalMeanUnknownVar { mu0: f64 },
    /// H0: N(0,1) vs H1: N(mu,1).
    SimpleNormalMean,
    /// H0: rate = lambda0 vs H1: rate != lambda0.
    Exponential { lambda0: f64 },
    /// M0: Poisson vs M1: Geometric (failures before first success).
    PoissonVsGeometric,
    /// M0: Poisson vs M1: Negative Binomial with r successes.
    PoissonVsNegBinomial { r: u32 },
    /// Two nested normal-linear models under sigma^-(1+q) priors.
    NestedLinear { design: DesignPair },
    /// One-way layout specialization of the nested-linear test.
    OneWayAnova { spec: AnovaSpec },
}

impl ModelTest {
    /// Checks every null parameter is strictly inside its domain.
    pub fn validate(&self) -> Result<()> {
        match self {
            ModelTest::NormalScale { h0 } if *h0 <= 0.0 || !h0.is_finite() => Err(
                EvidenceError::DomainViolation(format!("precision h0 must be positive, got {h0}")),
            ),
            ModelTest::NormalMeanKnownVar { sigma0, .. } if *sigma0 <= 0.0 => {
                Err(EvidenceError::DomainViolation(format!(
                    "sigma0 must be positive, got {sigma0}"
                )))
            }
            ModelTest::Exponential { lambda0 } if *lambda0 <= 0.0 || !lambda0.is_finite() => {
                Err(EvidenceError::DomainViolation(format!(
                    "rate lambda0 must be positive, got {lambda0}"
                )))
            }
            ModelTest::PoissonVsNegBinomial { r } if *r == 0 => Err(
                EvidenceError::DomainViolation("r must be a positive integer".into()),
            ),
            ModelTest::OneWayAnova { spec } => spec.validate(),
            _ => Ok(()),
        }
    }

    /// Size k of a minimal training sample for this test: the maximum
    /// parameter dimension across both models, plus one for the linear
    /// families (one row per parameter plus one to pin the scale).
    pub fn mts_size(&self) -> usize {
        match self {
            ModelTest::NormalScale { .. } => 2,
            ModelTest::NormalMeanKnownVar { .. } => 1,
            ModelTest::NormalMeanUnknownVar { .. } => 2,
            ModelTest::SimpleNormalMean => 1,
            ModelTest::Exponential { .. } => 1,
            ModelTest::PoissonVsGeometric => 1,
            ModelTest::PoissonVsNegBinomial { .. } => 1,
            ModelTest::NestedLinear { design } => design.p1() + 1,
            ModelTest::OneWayAnova { spec } => spec.group_sizes.len() + 1,
        }
    }
}
