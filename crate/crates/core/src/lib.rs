//! Objective Bayes factors and intrinsic-Bayes-factor bounds.
//!
//! The crate covers a catalog of hypothesis tests (normal scale and mean,
//! exponential rate, Poisson vs Geometric, Poisson vs Negative Binomial,
//! nested linear models and one-way ANOVA) with Jeffreys-prior Bayes
//! factors, theoretical and empirical intrinsic bounds over minimal
//! training samples, SP/EP/intrinsic priors with their Bayes factors,
//! p-value calibrations, and a seeded Monte Carlo harness.
//!
//! All evidence lives in natural-log space ([`LogValue`]); the `parallel`
//! feature (on by default) fans data-parallel scans and replications out
//! over rayon with results identical to the sequential fallback.

pub mod calibration;
pub mod discrete;
pub mod error;
pub mod exponential;
pub mod linear;
pub mod logvalue;
pub mod model;
pub mod montecarlo;
pub mod mts;
pub mod normal;
mod par;
pub mod report;
pub mod sample;
pub mod specialfn;

pub use error::{EvidenceError, Result};
pub use logvalue::LogValue;
pub use model::ModelTest;
pub use report::{bound_chain_check, reciprocal, Attainer, BoundReport, BoundVariant, Direction};
pub use sample::Sample;

/// Number formatting for the CSV surfaces.
pub mod fmt {
    /// Renders with 12 significant digits (scientific), the stable
    /// format every CSV output uses.
    pub fn sig12(x: f64) -> String {
        if x.is_nan() {
            return "nan".to_string();
        }
        if x.is_infinite() {
            return if x > 0.0 { "inf" } else { "-inf" }.to_string();
        }
        format!("{x:.11e}")
    }

}
