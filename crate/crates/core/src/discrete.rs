//! Separated hypothesis tests on counts: Poisson vs Geometric and
//! Poisson vs Negative Binomial under Jeffreys priors, with full and
//! per-training-point Bayes factors, intrinsic bounds, the arithmetic
//! IBF, and the sequential analysis used on the Cox count data.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::error::{EvidenceError, Result};
use crate::logvalue::{log_mean_exp, LogValue};
use crate::mts::TrainingIndex;
use crate::report::{Attainer, BoundReport, BoundVariant};
use crate::sample::Sample;
use crate::specialfn::ln_gamma;

use std::f64::consts::PI;

/// Sufficient statistics of a count sample.
#[derive(Clone, Copy, Debug)]
pub struct CountStats {
    pub n: usize,
    pub s: u64,
    /// sum of ln(y_i!)
    pub log_prod_fact: f64,
    pub y_min: u64,
    pub y_max: u64,
}

impl CountStats {
    pub fn from_counts(counts: &[u64]) -> Result<Self> {
        if counts.is_empty() {
            return Err(EvidenceError::InsufficientData(
                "count statistics need at least one observation".into(),
            ));
        }
        let mut log_prod_fact = 0.0;
        for &y in counts {
            log_prod_fact += ln_gamma(y as f64 + 1.0)?;
        }
        Ok(CountStats {
            n: counts.len(),
            s: counts.iter().sum(),
            log_prod_fact,
            y_min: *counts.iter().min().unwrap(),
            y_max: *counts.iter().max().unwrap(),
        })
    }

    pub fn from_sample(sample: &Sample) -> Result<Self> {
        Self::from_counts(&sample.as_counts()?)
    }
}

/// Full-sample B01 for Poisson vs Geometric, constants dropped:
/// Gamma(n + s + 1/2) / (prod y_i! Gamma(n) n^(s + 1/2)).
pub fn pg_bf01_full(stats: CountStats) -> Result<LogValue> {
    let n = stats.n as f64;
    let s = stats.s as f64;
    Ok(LogValue::from_ln(
        ln_gamma(n + s + 0.5)? - stats.log_prod_fact - ln_gamma(n)? - (s + 0.5) * n.ln(),
    ))
}

/// Single-training-point B01 for Poisson vs Geometric: 1/Gamma(y + 3/2).
/// Strictly decreasing in y; the supremum 2/sqrt(pi) sits at y = 0.
pub fn pg_mts_bf01(y_ell: u64) -> LogValue {
    LogValue::from_ln(-ln_gamma_u64_plus(y_ell, 1.5))
}

fn ln_gamma_u64_plus(y: u64, offset: f64) -> f64 {
    crate::specialfn::ln_gamma_unchecked(y as f64 + offset)
}

/// A reciprocal pair of bounds on the same variant.
#[derive(Clone, Debug)]
pub struct BoundPair {
    pub upper10: BoundReport,
    pub lower01: BoundReport,
}

/// Intrinsic bounds for Poisson vs Geometric.
#[derive(Clone, Debug)]
pub struct PgBounds {
    pub theoretical: BoundPair,
    pub empirical: BoundPair,
    pub aibf10: BoundReport,
}

/// Theoretical and empirical IBF bounds plus the arithmetic IBF for the
/// Poisson-vs-Geometric test. Every count is a proper training point;
/// the empirical supremum is attained at the smallest observed count.
pub fn pg_bounds(sample: &Sample) -> Result<PgBounds> {
    let counts = sample.as_counts()?;
    let stats = CountStats::from_counts(&counts)?;
    let full01 = pg_bf01_full(stats)?;
    let full10 = full01.recip()?;

    let mut mts_logs = Vec::with_capacity(counts.len());
    let mut arg = 0usize;
    for (i, &y) in counts.iter().enumerate() {
        mts_logs.push(pg_mts_bf01(y).ln());
        if y < counts[arg] {
            arg = i;
        }
    }
    let sup = pg_mts_bf01(counts[arg]).ln();
    // Evaluated through the same gamma route as the per-point values so
    // that "empirical = theoretical iff 0 is observed" holds exactly.
    let theo_sup = pg_mts_bf01(0).ln();
    let attainer = Attainer::Sample(TrainingIndex::new(vec![arg])?);

    let theo_upper = full10 + theo_sup;
    let emp_upper = full10 + sup;
    let aibf10 = full10 + log_mean_exp(&mts_logs);

    Ok(PgBounds {
        theoretical: BoundPair {
            upper10: BoundReport::new(BoundVariant::TheoreticalUpper10, theo_upper)
                .with_attainer(Attainer::Point(0.0))
                .with_notes("training-point supremum 2/sqrt(pi) at y = 0"),
            lower01: BoundReport::new(BoundVariant::TheoreticalLower01, theo_upper.recip()?)
                .with_attainer(Attainer::Point(0.0)),
        },
        empirical: BoundPair {
            upper10: BoundReport::new(BoundVariant::EmpiricalUpper10, emp_upper)
                .with_attainer(attainer.clone())
                .with_notes(
                    "empirical supremum at the smallest observed count; the boxed empirical \
                     lower bound's largest-count form is inconsistent with reciprocity and \
                     is not used",
                ),
            lower01: BoundReport::new(BoundVariant::EmpiricalLower01, emp_upper.recip()?)
                .with_attainer(attainer),
        },
        aibf10: BoundReport::new(BoundVariant::Aibf10, aibf10),
    })
}

fn check_r(r: u32) -> Result<f64> {
    if r == 0 {
        return Err(EvidenceError::DomainViolation(
            "negative binomial r must be a positive integer".into(),
        ));
    }
    Ok(r as f64)
}

/// Full-sample B10 for Negative Binomial (r) vs Poisson, constants
/// dropped. Requires s >= 1; all-zero data makes the NB marginal diverge.
pub fn pnb_bf10_full(stats: CountStats, r: u32) -> Result<LogValue> {
    let rf = check_r(r)?;
    if stats.s == 0 {
        return Err(EvidenceError::ImproperTrainingSample(
            "all-zero counts: the negative binomial marginal diverges".into(),
        ));
    }
    let n = stats.n as f64;
    let s = stats.s as f64;
    // prod (y_i + r - 1)! / (r - 1)! needs the individual counts, which
    // the stats do not carry; recovered from log_prod_fact only when r = 1.
    // Callers with r > 1 go through `pnb_bf10_full_counts`.
    if r == 1 {
        return Ok(LogValue::from_ln(
            stats.log_prod_fact + 0.5 * rf.ln() + ln_gamma(rf * n + 0.5)? + ln_gamma(s)?
                - ln_gamma(n * (rf + s / n) + 0.5)?
                - ln_gamma(s + 0.5)?
                + (s + 0.5) * n.ln(),
        ));
    }
    Err(EvidenceError::DomainViolation(
        "pnb_bf10_full with r > 1 needs the per-observation counts; use pnb_bf10_full_counts"
            .into(),
    ))
}

/// Full-sample B10 for Negative Binomial (r) vs Poisson from raw counts:
/// [prod (y_i+r-1)!/(r-1)!] r^(1/2) Gamma(rn+1/2) Gamma(s) n^(s+1/2)
///   / (Gamma(n(r+ybar)+1/2) Gamma(s+1/2)).
pub fn pnb_bf10_full_counts(counts: &[u64], r: u32) -> Result<LogValue> {
    let rf = check_r(r)?;
    let stats = CountStats::from_counts(counts)?;
    if stats.s == 0 {
        return Err(EvidenceError::ImproperTrainingSample(
            "all-zero counts: the negative binomial marginal diverges".into(),
        ));
    }
    let n = stats.n as f64;
    let s = stats.s as f64;
    let mut ln_prod = 0.0;
    for &y in counts {
        ln_prod += ln_gamma(y as f64 + rf)? - ln_gamma(rf)?;
    }
    Ok(LogValue::from_ln(
        ln_prod + 0.5 * rf.ln() + ln_gamma(rf * n + 0.5)? + ln_gamma(s)?
            - ln_gamma(rf * n + s + 0.5)?
            - ln_gamma(s + 0.5)?
            + (s + 0.5) * n.ln(),
    ))
}

/// Single-training-point B01 for NB(r) vs Poisson, constants dropped:
/// [Gamma(r)/(sqrt(r) Gamma(r+1/2))] *
///   Gamma(r+y+1/2) Gamma(y+1/2) / (Gamma(y+r) Gamma(y)).
/// The point y = 0 is improper (the single-observation NB marginal
/// diverges), so it is rejected rather than given a value.
pub fn pnb_mts_bf01(y_ell: u64, r: u32) -> Result<LogValue> {
    let rf = check_r(r)?;
    if y_ell == 0 {
        return Err(EvidenceError::ImproperTrainingSample(
            "y = 0 is an improper training point for the negative binomial side".into(),
        ));
    }
    let y = y_ell as f64;
    Ok(LogValue::from_ln(
        ln_gamma(rf)? - 0.5 * rf.ln() - ln_gamma(rf + 0.5)? + ln_gamma(rf + y + 0.5)?
            + ln_gamma(y + 0.5)?
            - ln_gamma(y + rf)?
            - ln_gamma(y)?,
    ))
}

/// Bounds for Negative Binomial vs Poisson. The training-point ratio is
/// increasing in y, so no finite theoretical upper bound exists; the
/// paper-form theoretical lower bound and the empirical pair are exposed.
#[derive(Clone, Debug)]
pub struct PnbBounds {
    pub theoretical_lower01: BoundReport,
    pub empirical: BoundPair,
}

/// Theoretical lower bound (the boxed Gamma(r)/Gamma(1/2) form, i.e.
/// B01 * sqrt(r/pi)) and the empirical bounds, whose supremum over proper
/// observed points is attained at the largest observed count.
pub fn pnb_bounds(sample: &Sample, r: u32) -> Result<PnbBounds> {
    let counts = sample.as_counts()?;
    let full10 = pnb_bf10_full_counts(&counts, r)?;
    let rf = r as f64;

    let mut best: Option<(usize, f64)> = None;
    for (i, &y) in counts.iter().enumerate() {
        if y == 0 {
            continue;
        }
        let v = pnb_mts_bf01(y, r)?.ln();
        if best.map_or(true, |(_, b)| v > b) {
            best = Some((i, v));
        }
    }
    let (arg, sup) = best.ok_or_else(|| {
        EvidenceError::ImproperTrainingSample(
            "no proper training point: every count is zero".into(),
        )
    })?;
    let attainer = Attainer::Sample(TrainingIndex::new(vec![arg])?);

    let theo_lower01 = full10.recip()? + (0.5 * rf.ln() - 0.5 * PI.ln());
    let emp_upper = full10 + sup;
    Ok(PnbBounds {
        theoretical_lower01: BoundReport::new(BoundVariant::TheoreticalLower01, theo_lower01)
            .with_notes("Gamma(r)/Gamma(1/2) form; the proper-point ratio is unbounded in y"),
        empirical: BoundPair {
            upper10: BoundReport::new(BoundVariant::EmpiricalUpper10, emp_upper)
                .with_attainer(attainer.clone())
                .with_notes("supremum over proper observed points, attained at the largest"),
            lower01: BoundReport::new(BoundVariant::EmpiricalLower01, emp_upper.recip()?)
                .with_attainer(attainer),
        },
    })
}

/// One step of the sequential Poisson-vs-Geometric analysis.
#[derive(Clone, Debug)]
pub struct SequentialStep {
    pub prefix_n: usize,
    pub upper10: BoundReport,
    pub lower01: BoundReport,
}

/// Theoretical IBF bounds on growing prefixes of a count sample,
/// optionally shuffled first with a seeded permutation.
pub fn cox_sequential(sample: &Sample, randomize_seed: Option<u64>) -> Result<Vec<SequentialStep>> {
    let mut counts = sample.as_counts()?;
    if let Some(seed) = randomize_seed {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        counts.shuffle(&mut rng);
    }
    let theo_sup = pg_mts_bf01(0).ln();
    let mut out = Vec::with_capacity(counts.len());
    for n in 1..=counts.len() {
        let stats = CountStats::from_counts(&counts[..n])?;
        let full10 = pg_bf01_full(stats)?.recip()?;
        let upper = full10 + theo_sup;
        out.push(SequentialStep {
            prefix_n: n,
            upper10: BoundReport::new(BoundVariant::TheoreticalUpper10, upper),
            lower01: BoundReport::new(BoundVariant::TheoreticalLower01, upper.recip()?),
        });
    }
    Ok(out)
}
