//! Lee two-beam criterion.
//!
//! R = (n2 + 1) p(n1-1, n2+1) / (2 n1 p(n1, n2))
//!   + (n1 + 1) p(n1+1, n2-1) / (2 n2 p(n1, n2))
//!
//! compares a joint cell against its two antidiagonal neighbors, in
//! which one beam gains a photon while the other loses one. Classical
//! (coherent-mixture) joint statistics keep R >= 1; R < 1 witnesses
//! nonclassical signal/idler correlation. Independent equal-mean
//! Poissonian beams sit exactly at 1.
//!
//! The conditional form re-expresses R through idler distributions
//! conditioned on neighboring trigger values,
//!
//! R = [ n2 (n2 + 1) p(n2+1 | n1-1) + nbar^2 p(n2-1 | n1+1) ]
//!   / ( 2 nbar n2 p(n2 | n1) ),
//!
//! which assumes a Poissonian trigger marginal of mean nbar: the joint
//! form's marginal ratios collapse to powers of nbar exactly when the
//! marginal satisfies the Poisson recurrence n p(n) = nbar p(n-1). The
//! n2 (n2 + 1) weight on the lowered-trigger term is what that
//! substitution produces; see
//! [`lee_r_conditional_trigger_weighted_ideal`] for the variant that
//! weights it by n1 (n1 + 1) instead, kept only for comparison.

use super::{CriterionKind, CriterionResult, CriterionStatus};
use crate::dist::{
    Axis, CountHistogram, JointCountHistogram, JointPhotonDistribution, PhotonNumberDistribution,
};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

const THRESHOLD: f64 = 1.0;

fn check_orders(n1: usize, n2: usize) -> Result<()> {
    for (name, v) in [("n1", n1), ("n2", n2)] {
        if v == 0 {
            return Err(Error::DomainInt {
                name,
                value: 0,
                constraint: "Lee criterion needs n1 >= 1 and n2 >= 1",
            });
        }
    }
    Ok(())
}

fn check_nbar(nbar: f64) -> Result<()> {
    if !(nbar > 0.0 && nbar.is_finite()) {
        return Err(Error::Domain {
            name: "nbar",
            value: nbar,
            constraint: "trigger mean must be finite and > 0",
        });
    }
    Ok(())
}

/// R at (n1, n2) from a joint count table. Trials cancel, so the value
/// is a pure count ratio; the error bar propagates independent
/// Poissonian cell fluctuations.
pub fn lee_r_joint(hist: &JointCountHistogram, n1: usize, n2: usize) -> Result<CriterionResult> {
    check_orders(n1, n2)?;
    let kind = CriterionKind::LeeJoint;
    if hist.trials() == 0 || hist.recorded() == 0 {
        return Ok(CriterionResult::no_data(kind, THRESHOLD));
    }
    let lowered = hist.count(n1 - 1, n2 + 1);
    let center = hist.count(n1, n2);
    let raised = hist.count(n1 + 1, n2 - 1);
    if center == 0 {
        return Ok(CriterionResult::undefined(kind, THRESHOLD));
    }
    let alpha = (n2 + 1) as f64 / (2 * n1) as f64;
    let beta = (n1 + 1) as f64 / (2 * n2) as f64;
    let d = center as f64;
    let value = (alpha * lowered as f64 + beta * raised as f64) / d;
    if lowered == 0 || raised == 0 {
        return Ok(CriterionResult::insufficient(kind, value, THRESHOLD));
    }
    let var = (alpha * alpha * lowered as f64 + beta * beta * raised as f64) / (d * d)
        + value * value / d;
    Ok(CriterionResult::build(kind, value, THRESHOLD, Some(var.sqrt()), CriterionStatus::Ok))
}

/// R at (n1, n2) from an exact joint distribution.
pub fn lee_r_joint_ideal(
    joint: &JointPhotonDistribution,
    n1: usize,
    n2: usize,
) -> Result<CriterionResult> {
    check_orders(n1, n2)?;
    let kind = CriterionKind::LeeJoint;
    let center = joint.prob(n1, n2);
    if center == 0.0 {
        return Ok(CriterionResult::undefined(kind, THRESHOLD));
    }
    let value = (n2 + 1) as f64 * joint.prob(n1 - 1, n2 + 1) / ((2 * n1) as f64 * center)
        + (n1 + 1) as f64 * joint.prob(n1 + 1, n2 - 1) / ((2 * n2) as f64 * center);
    Ok(CriterionResult::build(kind, value, THRESHOLD, None, CriterionStatus::Ok))
}

/// R at idler value n2 from idler count histograms conditioned on the
/// trigger reading one below, at, and one above the working point, for a
/// Poissonian trigger of mean `nbar`.
///
/// The three rows come from disjoint trigger outcomes, so their
/// fluctuations are independent; within each row the count at one idler
/// value fluctuates binomially against the fixed row total.
pub fn lee_r_conditional(
    below: &CountHistogram,
    center: &CountHistogram,
    above: &CountHistogram,
    nbar: f64,
    n2: usize,
) -> Result<CriterionResult> {
    check_orders(1, n2)?; // the trigger order is fixed by the rows themselves
    check_nbar(nbar)?;
    let kind = CriterionKind::LeeConditional;
    if below.trials() == 0 || center.trials() == 0 || above.trials() == 0 {
        return Ok(CriterionResult::no_data(kind, THRESHOLD));
    }
    let c_up = below.count(n2 + 1);
    let c_mid = center.count(n2);
    let c_down = above.count(n2 - 1);
    if c_mid == 0 {
        return Ok(CriterionResult::undefined(kind, THRESHOLD));
    }
    let up = below.prob(n2 + 1);
    let mid = center.prob(n2);
    let down = above.prob(n2 - 1);
    let n2f = n2 as f64;
    let denom = 2.0 * nbar * n2f * mid;
    let value = (n2f * (n2f + 1.0) * up + nbar * nbar * down) / denom;
    if c_up == 0 || c_down == 0 {
        return Ok(CriterionResult::insufficient(kind, value, THRESHOLD));
    }
    let d_up = (n2f + 1.0) / (2.0 * nbar * mid);
    let d_down = nbar / (2.0 * n2f * mid);
    let d_mid = value / mid;
    let var_up = up * (1.0 - up) / below.trials() as f64;
    let var_mid = mid * (1.0 - mid) / center.trials() as f64;
    let var_down = down * (1.0 - down) / above.trials() as f64;
    let var = d_up * d_up * var_up + d_mid * d_mid * var_mid + d_down * d_down * var_down;
    Ok(CriterionResult::build(kind, value, THRESHOLD, Some(var.sqrt()), CriterionStatus::Ok))
}

/// Conditional-form R from exact conditional idler distributions.
pub fn lee_r_conditional_ideal(
    below: &PhotonNumberDistribution,
    center: &PhotonNumberDistribution,
    above: &PhotonNumberDistribution,
    nbar: f64,
    n2: usize,
) -> Result<CriterionResult> {
    check_orders(1, n2)?;
    check_nbar(nbar)?;
    let kind = CriterionKind::LeeConditional;
    let mid = center.prob(n2);
    if mid == 0.0 {
        return Ok(CriterionResult::undefined(kind, THRESHOLD));
    }
    let n2f = n2 as f64;
    let value = (n2f * (n2f + 1.0) * below.prob(n2 + 1) + nbar * nbar * above.prob(n2 - 1))
        / (2.0 * nbar * n2f * mid);
    Ok(CriterionResult::build(kind, value, THRESHOLD, None, CriterionStatus::Ok))
}

/// Variant of the conditional form that weights the lowered-trigger term
/// by n1 (n1 + 1) instead of n2 (n2 + 1). Not equivalent to the joint
/// form off the diagonal (the two agree at n1 = n2); retained so the
/// disagreement can be demonstrated rather than silently inherited.
pub fn lee_r_conditional_trigger_weighted_ideal(
    below: &PhotonNumberDistribution,
    center: &PhotonNumberDistribution,
    above: &PhotonNumberDistribution,
    nbar: f64,
    n1: usize,
    n2: usize,
) -> Result<CriterionResult> {
    check_orders(n1, n2)?;
    check_nbar(nbar)?;
    let kind = CriterionKind::LeeConditional;
    let mid = center.prob(n2);
    if mid == 0.0 {
        return Ok(CriterionResult::undefined(kind, THRESHOLD));
    }
    let (n1f, n2f) = (n1 as f64, n2 as f64);
    let value = (n1f * (n1f + 1.0) * below.prob(n2 + 1) + nbar * nbar * above.prob(n2 - 1))
        / (2.0 * nbar * n2f * mid);
    Ok(CriterionResult::build(kind, value, THRESHOLD, None, CriterionStatus::Ok))
}

/// Where the conditional form's trigger mean comes from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NbarPolicy {
    /// Use this trigger mean as given.
    Fixed(f64),
    /// Use the empirical mean of the trigger (signal) marginal.
    Estimate,
}

/// One cell of a Lee significance table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeeCell {
    pub n1: usize,
    pub n2: usize,
    #[serde(flatten)]
    pub result: CriterionResult,
}

/// Conditional-form R over a rectangle of (n1, n2) working points, with
/// the trigger mean chosen once by `policy`. Cells whose neighboring
/// trigger rows carry no events degrade to insufficient_statistics
/// instead of failing the whole table. The estimation error of nbar
/// itself is neglected: it is shared by every cell and far below the
/// per-cell counting error at any usable trial count.
pub fn significance_table(
    joint: &JointCountHistogram,
    n1_range: (usize, usize),
    n2_range: (usize, usize),
    policy: NbarPolicy,
) -> Result<Vec<LeeCell>> {
    for (name, (lo, hi)) in [("n1_range", n1_range), ("n2_range", n2_range)] {
        if lo < 1 || hi < lo {
            return Err(Error::DomainInt {
                name,
                value: lo as i64,
                constraint: "range must satisfy 1 <= lo <= hi",
            });
        }
    }
    let nbar = match policy {
        NbarPolicy::Fixed(x) => {
            check_nbar(x)?;
            Some(x)
        }
        NbarPolicy::Estimate => joint
            .marginal(Axis::Signal)
            .empirical_mean()
            .filter(|m| *m > 0.0),
    };

    let mut cells = Vec::new();
    for n1 in n1_range.0..=n1_range.1 {
        for n2 in n2_range.0..=n2_range.1 {
            let result = evaluate_cell(joint, nbar, n1, n2);
            cells.push(LeeCell { n1, n2, result });
        }
    }
    Ok(cells)
}

fn evaluate_cell(
    joint: &JointCountHistogram,
    nbar: Option<f64>,
    n1: usize,
    n2: usize,
) -> CriterionResult {
    let kind = CriterionKind::LeeConditional;
    let Some(nbar) = nbar else {
        return CriterionResult::no_data(kind, THRESHOLD);
    };
    let rows = (
        joint.conditional(n1 - 1),
        joint.conditional(n1),
        joint.conditional(n1 + 1),
    );
    match rows {
        (Ok(below), Ok(center), Ok(above)) => {
            lee_r_conditional(&below, &center, &above, nbar, n2)
                .expect("orders and nbar validated before the cell loop")
        }
        // A missing or empty neighboring trigger row means the slice
        // cannot be normalized: no statistics there yet.
        _ => CriterionResult::no_data(kind, THRESHOLD),
    }
}
