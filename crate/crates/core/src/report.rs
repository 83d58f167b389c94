use crate::error::{EvidenceError, Result};
use crate::logvalue::{log_mean_exp, LogValue};
use crate::mts::TrainingIndex;

/// Which bound or Bayes factor a report carries.
///
/// The orientation convention is fixed here once for the whole crate:
/// every Lower01 value is the exact reciprocal of the matching Upper10
/// value, i.e. their natural logs are negations of each other.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundVariant {
    TheoreticalLower01,
    TheoreticalUpper10,
    EmpiricalLower01,
    EmpiricalUpper10,
    Aibf10,
    Eibf10,
    SpBf10,
    EpBf10,
    Gs10,
    Plain01,
}

impl BoundVariant {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundVariant::TheoreticalLower01 => "theoretical-lower01",
            BoundVariant::TheoreticalUpper10 => "theoretical-upper10",
            BoundVariant::EmpiricalLower01 => "empirical-lower01",
            BoundVariant::EmpiricalUpper10 => "empirical-upper10",
            BoundVariant::Aibf10 => "aibf10",
            BoundVariant::Eibf10 => "eibf10",
            BoundVariant::SpBf10 => "sp-bf10",
            BoundVariant::EpBf10 => "ep-bf10",
            BoundVariant::Gs10 => "gs10",
            BoundVariant::Plain01 => "plain01",
        }
    }
}

/// What attains a bound: an observed training tuple or a point of the
/// theoretical support.
#[derive(Clone, Debug, PartialEq)]
pub enum Attainer {
    Sample(TrainingIndex),
    Point(f64),
}

/// One bound or Bayes factor on the log scale, with its attainer when a
/// sup/inf over training samples produced it.
#[derive(Clone, Debug)]
pub struct BoundReport {
    pub variant: BoundVariant,
    pub value: LogValue,
    pub attainer: Option<Attainer>,
    pub notes: String,
}

impl BoundReport {
    pub fn new(variant: BoundVariant, value: LogValue) -> Self {
        BoundReport {
            variant,
            value,
            attainer: None,
            notes: String::new(),
        }
    }

    pub fn with_attainer(mut self, attainer: Attainer) -> Self {
        self.attainer = Some(attainer);
        self
    }

    pub fn with_notes(mut self, notes: impl Into<String>) -> Self {
        self.notes = notes.into();
        self
    }
}

/// Orientation of a Bayes factor: B01 (evidence for the null) or B10.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    NullOverAlt,
    AltOverNull,
}

impl Direction {
    pub fn flipped(self) -> Self {
        match self {
            Direction::NullOverAlt => Direction::AltOverNull,
            Direction::AltOverNull => Direction::NullOverAlt,
        }
    }
}

/// Inverts a Bayes factor, flipping its orientation. In log space the
/// identity log B01 + log B10 = 0 holds exactly.
pub fn reciprocal(value: LogValue, from: Direction) -> Result<(LogValue, Direction)> {
    Ok((value.recip()?, from.flipped()))
}

/// Output of the generic bound-chain computation.
#[derive(Clone, Copy, Debug)]
pub struct BoundChain {
    /// Arithmetic IBF in the 01 direction (the 10-direction AIBF inverted).
    pub aibf01: LogValue,
    /// Empirical lower bound: full B01 divided by the largest trained B01.
    pub lower01_emp: LogValue,
    /// Whether lower01_emp <= aibf01, as the bound chain requires.
    pub ordered: bool,
}

/// Combines a full-data B01 with the per-training-sample B01 values into
/// the arithmetic-intrinsic value and the empirical lower bound.
pub fn bound_chain_check(b01_full: LogValue, b01_mts_values: &[LogValue]) -> Result<BoundChain> {
    if b01_mts_values.is_empty() {
        return Err(EvidenceError::DomainViolation(
            "bound chain needs at least one training-sample Bayes factor".into(),
        ));
    }
    if b01_mts_values.iter().any(|v| v.is_zero()) {
        return Err(EvidenceError::DomainViolation(
            "exact-zero training-sample Bayes factor: improper sample slipped through".into(),
        ));
    }
    let logs: Vec<f64> = b01_mts_values.iter().map(|v| v.ln()).collect();
    let sup = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let aibf01 = b01_full - log_mean_exp(&logs);
    let lower01_emp = b01_full - sup;
    Ok(BoundChain {
        aibf01,
        lower01_emp,
        ordered: lower01_emp <= aibf01,
    })
}
