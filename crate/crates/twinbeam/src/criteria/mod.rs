//! Nonclassicality criteria on photon-number statistics.
//!
//! Each criterion compares a test statistic against a classical bound.
//! Count-based evaluators propagate counting error through the statistic
//! (independent Poissonian bin fluctuations, first-order delta method)
//! and degrade their status instead of reporting a shaky number:
//!
//! * empty data (no trials or no recorded events) is
//!   `insufficient_statistics` with an undefined value;
//! * a zero in a denominator makes the statistic itself undefined, so the
//!   status is `undefined_divergent` and the value is NaN (serialized as
//!   null);
//! * zeros confined to numerator bins leave the value well defined (often
//!   exactly 0) but give it no usable error bar, so the status is
//!   `insufficient_statistics` and no standard error is attached.
//!
//! `violated` is only ever set on an `ok` status. Significance is signed:
//! positive means the value sits on the nonclassical side of the bound.

mod gamma;
mod klyshko;
mod lee;
mod mandel;

pub use gamma::{
    combined_test, combined_test_ideal, combined_threshold, gamma_classical_threshold,
    gamma_wdsby, gamma_wdsby_ideal,
};
pub use klyshko::{klyshko_k, klyshko_k_ideal, klyshko_scan, KlyshkoPoint};
pub use lee::{
    lee_r_conditional, lee_r_conditional_ideal, lee_r_conditional_trigger_weighted_ideal,
    lee_r_joint, lee_r_joint_ideal, significance_table, LeeCell, NbarPolicy,
};
pub use mandel::{mandel_q, mandel_q_ideal};

use serde::{Deserialize, Deserializer, Serialize};

/// Which nonclassicality test produced a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CriterionKind {
    KlyshkoK,
    #[serde(rename = "GammaWDSBY")]
    GammaWdsby,
    Combined,
    LeeJoint,
    LeeConditional,
    MandelQ,
}

/// How much a criterion result can be trusted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriterionStatus {
    /// Value and, where applicable, error bar are well defined.
    Ok,
    /// The value may exist but the data cannot support an error bar
    /// (empty bins, empty histogram, excessive overflow).
    InsufficientStatistics,
    /// A denominator is exactly zero, so the statistic diverges.
    UndefinedDivergent,
}

impl std::fmt::Display for CriterionStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CriterionStatus::Ok => "ok",
            CriterionStatus::InsufficientStatistics => "insufficient_statistics",
            CriterionStatus::UndefinedDivergent => "undefined_divergent",
        })
    }
}

/// Outcome of one criterion evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub name: CriterionKind,
    /// Test statistic; NaN when the status says it is undefined.
    #[serde(deserialize_with = "f64_from_nullable")]
    pub value: f64,
    /// Classical bound the value is compared against. For the combined
    /// test the bound itself is estimated from the data.
    #[serde(deserialize_with = "f64_from_nullable")]
    pub threshold: f64,
    /// Propagated counting error of the comparison. For data-dependent
    /// thresholds this is the standard error of value minus threshold.
    /// None for exact (probability-level) evaluations and degraded
    /// statuses.
    pub std_error: Option<f64>,
    /// Signed distance to the bound in standard errors; positive on the
    /// nonclassical side. None whenever `std_error` is.
    pub significance: Option<f64>,
    /// True only when the status is ok and the value falls strictly on
    /// the nonclassical side of the bound.
    pub violated: bool,
    pub status: CriterionStatus,
}

/// serde_json writes non-finite floats as null; read them back as NaN.
fn f64_from_nullable<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

enum Side {
    Below,
    Above,
}

impl CriterionKind {
    fn nonclassical_side(self) -> Side {
        match self {
            CriterionKind::KlyshkoK
            | CriterionKind::LeeJoint
            | CriterionKind::LeeConditional
            | CriterionKind::MandelQ => Side::Below,
            CriterionKind::GammaWdsby | CriterionKind::Combined => Side::Above,
        }
    }
}

impl CriterionResult {
    pub(crate) fn build(
        name: CriterionKind,
        value: f64,
        threshold: f64,
        std_error: Option<f64>,
        status: CriterionStatus,
    ) -> Self {
        let signed_excess = match name.nonclassical_side() {
            Side::Below => threshold - value,
            Side::Above => value - threshold,
        };
        let ok = status == CriterionStatus::Ok;
        let std_error = std_error.filter(|_| ok);
        Self {
            name,
            value,
            threshold,
            std_error,
            significance: std_error.filter(|se| *se > 0.0).map(|se| signed_excess / se),
            violated: ok && signed_excess > 0.0,
            status,
        }
    }

    pub(crate) fn undefined(name: CriterionKind, threshold: f64) -> Self {
        Self::build(name, f64::NAN, threshold, None, CriterionStatus::UndefinedDivergent)
    }

    pub(crate) fn no_data(name: CriterionKind, threshold: f64) -> Self {
        Self::build(name, f64::NAN, threshold, None, CriterionStatus::InsufficientStatistics)
    }

    pub(crate) fn insufficient(name: CriterionKind, value: f64, threshold: f64) -> Self {
        Self::build(name, value, threshold, None, CriterionStatus::InsufficientStatistics)
    }
}
