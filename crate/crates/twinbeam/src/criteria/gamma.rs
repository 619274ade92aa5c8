//! Three-bin criteria around the two-photon probability.
//!
//! The WDSBY test uses only photon numbers 1..=3:
//! Gamma = p2 / (p1 + p2 + p3). Within that window the classical optimum
//! over coherent-state mixtures is 3 / (3 + 2 sqrt(6)), so any larger
//! Gamma is nonclassical. The combined test sharpens this to a bound on
//! p2 alone: classically p2 <= min{ sqrt(1.5 p1 p3),
//! 0.5 sqrt(1.5) (p1 + p3) }, whose first branch is the two-sided
//! Klyshko bound at n = 2 and whose second follows from it by the
//! arithmetic-geometric mean inequality.

use super::{CriterionKind, CriterionResult, CriterionStatus};
use crate::dist::{CountHistogram, PhotonNumberDistribution};
use crate::error::{Error, Result};

/// Largest Gamma reachable by classical light: 3 / (3 + 2 sqrt(6)).
pub fn gamma_classical_threshold() -> f64 {
    3.0 / (3.0 + 2.0 * 6.0f64.sqrt())
}

/// Gamma from raw counts. The trial count cancels, so Gamma = c2 / s
/// with s = c1 + c2 + c3; for independent Poissonian bins the propagated
/// variance collapses to Gamma (1 - Gamma) / s.
pub fn gamma_wdsby(hist: &CountHistogram) -> CriterionResult {
    let kind = CriterionKind::GammaWdsby;
    let threshold = gamma_classical_threshold();
    if hist.trials() == 0 || hist.recorded() == 0 {
        return CriterionResult::no_data(kind, threshold);
    }
    let (c1, c2, c3) = (hist.count(1), hist.count(2), hist.count(3));
    let s = (c1 + c2 + c3) as f64;
    if s == 0.0 {
        return CriterionResult::no_data(kind, threshold);
    }
    let value = c2 as f64 / s;
    if c1 == 0 || c2 == 0 || c3 == 0 {
        return CriterionResult::insufficient(kind, value, threshold);
    }
    let std_error = (value * (1.0 - value) / s).sqrt();
    CriterionResult::build(kind, value, threshold, Some(std_error), CriterionStatus::Ok)
}

/// Gamma from exact probabilities.
pub fn gamma_wdsby_ideal(pnd: &PhotonNumberDistribution) -> CriterionResult {
    let kind = CriterionKind::GammaWdsby;
    let threshold = gamma_classical_threshold();
    let (p1, p2, p3) = (pnd.prob(1), pnd.prob(2), pnd.prob(3));
    let s = p1 + p2 + p3;
    if s == 0.0 {
        return CriterionResult::no_data(kind, threshold);
    }
    CriterionResult::build(kind, p2 / s, threshold, None, CriterionStatus::Ok)
}

/// Classical ceiling on p2 given its neighbors:
/// min{ sqrt(1.5 p1 p3), 0.5 sqrt(1.5) (p1 + p3) }. The geometric-mean
/// branch is never above the arithmetic-mean branch; they coincide when
/// p1 = p3.
pub fn combined_threshold(p1: f64, p3: f64) -> Result<f64> {
    for (name, v) in [("p1", p1), ("p3", p3)] {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::Domain {
                name,
                value: v,
                constraint: "probability must be finite and >= 0",
            });
        }
    }
    let geometric = (1.5 * p1 * p3).sqrt();
    let arithmetic = 0.5 * 1.5f64.sqrt() * (p1 + p3);
    Ok(geometric.min(arithmetic))
}

/// Combined two-photon test on raw counts: value is the empirical p2,
/// threshold is `combined_threshold` of the empirical p1 and p3. Both
/// sides fluctuate, so the standard error reported is that of
/// value - threshold, with the branch actually attained deciding the
/// threshold's sensitivities.
pub fn combined_test(hist: &CountHistogram) -> CriterionResult {
    let kind = CriterionKind::Combined;
    if hist.trials() == 0 || hist.recorded() == 0 {
        return CriterionResult::no_data(kind, f64::NAN);
    }
    let t = hist.trials() as f64;
    let (c1, c2, c3) = (hist.count(1), hist.count(2), hist.count(3));
    let (p1, p2, p3) = (c1 as f64 / t, c2 as f64 / t, c3 as f64 / t);
    let threshold =
        combined_threshold(p1, p3).expect("empirical probabilities are finite and nonnegative");
    if c1 == 0 || c2 == 0 || c3 == 0 {
        return CriterionResult::insufficient(kind, p2, threshold);
    }
    let geometric = (1.5 * p1 * p3).sqrt();
    let arithmetic = 0.5 * 1.5f64.sqrt() * (p1 + p3);
    let (dt_dp1, dt_dp3) = if geometric <= arithmetic {
        (0.75 * p3 / geometric, 0.75 * p1 / geometric)
    } else {
        let half = 0.5 * 1.5f64.sqrt();
        (half, half)
    };
    // Independent Poissonian bins: Var(p_i) = c_i / trials^2.
    let var = p2 / t + dt_dp1 * dt_dp1 * (p1 / t) + dt_dp3 * dt_dp3 * (p3 / t);
    CriterionResult::build(kind, p2, threshold, Some(var.sqrt()), CriterionStatus::Ok)
}

/// Combined two-photon test on exact probabilities.
pub fn combined_test_ideal(pnd: &PhotonNumberDistribution) -> CriterionResult {
    let kind = CriterionKind::Combined;
    let (p1, p2, p3) = (pnd.prob(1), pnd.prob(2), pnd.prob(3));
    let threshold =
        combined_threshold(p1, p3).expect("stored probabilities are finite and nonnegative");
    CriterionResult::build(kind, p2, threshold, None, CriterionStatus::Ok)
}
