//! Mandel Q parameter: Q = (var(n) - mean(n)) / mean(n).
//!
//! Poissonian light has Q = 0; classical light cannot go below. Q < 0 is
//! sub-Poissonian and hence nonclassical. Thermal light gives Q = mean;
//! light arriving in same-mode photon pairs doubles the Poissonian noise
//! floor to Q = 1.

use super::{CriterionKind, CriterionResult, CriterionStatus};
use crate::dist::{CountHistogram, PhotonNumberDistribution};
use crate::error::Result;
use crate::numerics::Kahan;

const THRESHOLD: f64 = 0.0;

/// Fraction of trials allowed to overflow the stored range before the
/// empirical moments are considered biased beyond repair.
pub const OVERFLOW_LIMIT: f64 = 0.01;

/// Q from raw counts. Overflow trials carry an unknown photon number and
/// are counted as zeros; once they exceed [`OVERFLOW_LIMIT`] of the
/// trials the status degrades, because the bias can then rival the
/// counting error.
pub fn mandel_q(hist: &CountHistogram) -> CriterionResult {
    let kind = CriterionKind::MandelQ;
    if hist.trials() == 0 || hist.recorded() == 0 {
        return CriterionResult::no_data(kind, THRESHOLD);
    }
    let (mean, var) = hist
        .empirical_moments()
        .expect("trials checked nonzero above");
    if mean == 0.0 {
        return CriterionResult::no_data(kind, THRESHOLD);
    }
    let value = (var - mean) / mean;
    if hist.overflow() as f64 > OVERFLOW_LIMIT * hist.trials() as f64 {
        return CriterionResult::insufficient(kind, value, THRESHOLD);
    }
    // Delta method over independent Poissonian bins: with T trials,
    // first moment M and second moment S2,
    // dQ/dc_j = (j / T) (j / M - S2 / M^2 - 1).
    let t = hist.trials() as f64;
    let s2 = var + mean * mean;
    let mut acc = Kahan::default();
    for (j, &c) in hist.counts().iter().enumerate() {
        if c == 0 {
            continue;
        }
        let j = j as f64;
        let g = (j / t) * (j / mean - s2 / (mean * mean) - 1.0);
        acc.add(c as f64 * g * g);
    }
    let var_q = acc.total();
    let std_error = (var_q > 0.0).then(|| var_q.sqrt());
    CriterionResult::build(kind, value, THRESHOLD, std_error, CriterionStatus::Ok)
}

/// Q from an exact distribution. Fails if too much mass sits beyond the
/// stored range for the moments to be reliable.
pub fn mandel_q_ideal(pnd: &PhotonNumberDistribution) -> Result<CriterionResult> {
    let kind = CriterionKind::MandelQ;
    let (mean, var) = pnd.moments()?;
    if mean == 0.0 {
        return Ok(CriterionResult::no_data(kind, THRESHOLD));
    }
    let value = (var - mean) / mean;
    Ok(CriterionResult::build(kind, value, THRESHOLD, None, CriterionStatus::Ok))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{pnd_poisson, pnd_thermal};
    use crate::error::Error;

    #[test]
    fn poissonian_light_has_zero_q() {
        let r = mandel_q_ideal(&pnd_poisson(1.0, 40).unwrap()).unwrap();
        assert!(r.value.abs() < 1e-9);
        assert!(!r.violated);
    }

    #[test]
    fn thermal_light_has_q_equal_to_mean() {
        let r = mandel_q_ideal(&pnd_thermal(1.0, 200).unwrap()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-9);
        assert!(!r.violated);
    }

    #[test]
    fn sub_poissonian_counts_read_negative() {
        // Nearly a number state: variance far below the mean.
        let h = CountHistogram::new(vec![5, 20, 950, 20, 5], 1000).unwrap();
        let r = mandel_q(&h);
        assert_eq!(r.status, CriterionStatus::Ok);
        assert!(r.value < 0.0);
        assert!(r.violated);
        assert!(r.significance.unwrap() > 3.0);
    }

    #[test]
    fn count_value_matches_hand_moments() {
        let h = CountHistogram::new(vec![2, 5, 3], 10).unwrap();
        // mean 1.1, second moment 1.7, var 0.49.
        let r = mandel_q(&h);
        assert!((r.value - (0.49 - 1.1) / 1.1).abs() < 1e-12);
        assert!(r.std_error.unwrap() > 0.0);
    }

    #[test]
    fn error_bar_shrinks_with_statistics() {
        let h = CountHistogram::new(vec![200, 500, 300], 1000).unwrap();
        let se = mandel_q(&h).std_error.unwrap();
        let se_big = mandel_q(&h.scaled(100)).std_error.unwrap();
        assert!((se_big - se / 10.0).abs() < se * 1e-9);
    }

    #[test]
    fn degraded_inputs_degrade_the_status() {
        let r = mandel_q(&CountHistogram::new(vec![], 0).unwrap());
        assert_eq!(r.status, CriterionStatus::InsufficientStatistics);
        assert!(r.value.is_nan());

        // All recorded events at zero photons: mean 0, Q undefined but
        // reported as a statistics problem, not a divergence.
        let r = mandel_q(&CountHistogram::new(vec![7], 7).unwrap());
        assert_eq!(r.status, CriterionStatus::InsufficientStatistics);

        // 5% overflow: moments cannot be trusted.
        let r = mandel_q(&CountHistogram::new(vec![50, 45], 100).unwrap());
        assert_eq!(r.status, CriterionStatus::InsufficientStatistics);
        assert!(r.value.is_finite());

        // Heavy tail in the exact distribution: refuse outright.
        let narrow = pnd_thermal(1.0, 4).unwrap();
        assert!(matches!(
            mandel_q_ideal(&narrow),
            Err(Error::UnreliableMoments { .. })
        ));
    }
}
