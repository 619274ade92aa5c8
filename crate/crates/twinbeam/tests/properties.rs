//! Property tests for the structural invariants: normalization survives
//! every constructor and transform, conditioning decomposes joints
//! exactly, loss channels compose, and criterion values are invariant
//! under count scaling while their error bars shrink like 1/sqrt(k).

use proptest::prelude::*;
use twinbeam::{
    apply_binomial_loss, combined_test, combined_threshold, detected_joint, detected_single,
    gamma_wdsby, klyshko_k, lee_r_joint, mandel_q, pnd_degenerate_squeezed,
    pnd_pair_count_multimode, pnd_poisson, pnd_thermal, pnd_two_mode_squeezed, Axis,
    CountHistogram, CriterionStatus, JointCountHistogram, LossChannel, PhotonNumberDistribution,
};

const NORM_TOL: f64 = 1e-12;

fn normalization_defect(probs: &[f64], tail: f64) -> f64 {
    (probs.iter().sum::<f64>() + tail - 1.0).abs()
}

/// Arbitrary finite-support distribution with a controlled tail share.
fn arb_pnd() -> impl Strategy<Value = PhotonNumberDistribution> {
    (
        prop::collection::vec(0.0f64..1.0, 1..12),
        0.0f64..0.3,
    )
        .prop_filter_map("needs nonzero weight", |(weights, tail_frac)| {
            let total: f64 = weights.iter().sum();
            if total <= 0.0 {
                return None;
            }
            let probs: Vec<f64> = weights
                .iter()
                .map(|w| w / total * (1.0 - tail_frac))
                .collect();
            PhotonNumberDistribution::new(probs, tail_frac).ok()
        })
}

fn arb_hist() -> impl Strategy<Value = CountHistogram> {
    (
        prop::collection::vec(0u64..500, 3..10),
        0u64..100,
    )
        .prop_map(|(counts, extra)| {
            let sum: u64 = counts.iter().sum();
            CountHistogram::new(counts, sum + extra).unwrap()
        })
}

fn arb_joint_hist() -> impl Strategy<Value = JointCountHistogram> {
    (3usize..6)
        .prop_flat_map(|dim| {
            (
                Just(dim),
                prop::collection::vec(0u64..200, dim * dim),
                0u64..100,
            )
        })
        .prop_map(|(dim, counts, extra)| {
            let sum: u64 = counts.iter().sum();
            JointCountHistogram::from_flat(dim, counts, sum + extra).unwrap()
        })
}

proptest! {
    #[test]
    fn constructors_stay_normalized(
        strength in 0.0f64..0.95,
        mean in 0.0f64..8.0,
        modes in 1u32..30,
        n_max in 1usize..60,
    ) {
        let tmsv = pnd_two_mode_squeezed(strength, n_max).unwrap();
        let mut total: f64 = 0.0;
        for n1 in 0..=n_max {
            for n2 in 0..=n_max {
                total += tmsv.prob(n1, n2);
                if n1 != n2 {
                    prop_assert_eq!(tmsv.prob(n1, n2), 0.0);
                }
            }
        }
        prop_assert!((total + tmsv.tail_mass() - 1.0).abs() <= NORM_TOL);

        for pnd in [
            pnd_degenerate_squeezed(strength, n_max).unwrap(),
            pnd_poisson(mean, n_max).unwrap(),
            pnd_thermal(mean, n_max).unwrap(),
            pnd_pair_count_multimode(modes, mean / modes as f64, n_max).unwrap(),
        ] {
            prop_assert!(normalization_defect(pnd.probs(), pnd.tail_mass()) <= NORM_TOL);
        }
    }

    #[test]
    fn transforms_stay_normalized(pnd in arb_pnd(), eff in 0.0f64..=1.0, dark in 0.0f64..2.0) {
        let lost = apply_binomial_loss(&pnd, eff).unwrap();
        prop_assert!(normalization_defect(lost.probs(), lost.tail_mass()) <= NORM_TOL);
        let darkened = apply_dark(&lost, dark);
        prop_assert!(normalization_defect(darkened.probs(), darkened.tail_mass()) <= NORM_TOL);
    }

    #[test]
    fn loss_channels_compose(pnd in arb_pnd(), a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        let stepwise = apply_binomial_loss(&apply_binomial_loss(&pnd, a).unwrap(), b).unwrap();
        let direct = apply_binomial_loss(&pnd, a * b).unwrap();
        for n in 0..=pnd.n_max() {
            prop_assert!((stepwise.prob(n) - direct.prob(n)).abs() <= 1e-10);
        }
    }

    #[test]
    fn loss_scales_in_range_mean_exactly(pnd in arb_pnd(), eff in 0.0f64..=1.0) {
        // Thinning cannot push mass out of range, so the raw in-range
        // mean scales by the efficiency regardless of the tail.
        let raw_mean = |p: &PhotonNumberDistribution| -> f64 {
            p.probs().iter().enumerate().map(|(n, q)| n as f64 * q).sum()
        };
        let out = apply_binomial_loss(&pnd, eff).unwrap();
        prop_assert!((raw_mean(&out) - eff * raw_mean(&pnd)).abs() <= 1e-10);
    }

    #[test]
    fn lossless_dark_free_joint_detection_is_diagonal(pnd in arb_pnd()) {
        let j = detected_joint(&pnd, &LossChannel::ideal(), &LossChannel::ideal(), pnd.n_max())
            .unwrap();
        for n1 in 0..=pnd.n_max() {
            for n2 in 0..=pnd.n_max() {
                if n1 != n2 {
                    prop_assert_eq!(j.prob(n1, n2), 0.0);
                } else {
                    prop_assert!((j.prob(n1, n1) - pnd.prob(n1)).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn joint_detection_marginals_match_single_arm_chain(
        pnd in arb_pnd(),
        eff_s in 0.0f64..=1.0,
        eff_i in 0.0f64..=1.0,
    ) {
        // Without darks nothing can leave the equally wide grid, so the
        // factorized marginals are exact.
        let sig = LossChannel::new(eff_s, 0.0).unwrap();
        let idl = LossChannel::new(eff_i, 0.0).unwrap();
        let j = detected_joint(&pnd, &sig, &idl, pnd.n_max()).unwrap();
        let s = detected_single(&pnd, &sig).unwrap();
        let i = detected_single(&pnd, &idl).unwrap();
        let ms = j.marginal(Axis::Signal);
        let mi = j.marginal(Axis::Idler);
        for n in 0..=pnd.n_max() {
            prop_assert!((ms.prob(n) - s.prob(n)).abs() <= 1e-12);
            prop_assert!((mi.prob(n) - i.prob(n)).abs() <= 1e-12);
        }
    }

    #[test]
    fn conditioning_decomposes_the_joint_exactly(joint in arb_joint_hist()) {
        let trigger = joint.marginal(Axis::Signal);
        for n1 in 0..=joint.n_max() {
            match joint.conditional(n1) {
                Ok(cond) => {
                    prop_assert_eq!(cond.trials(), trigger.count(n1));
                    for n2 in 0..=joint.n_max() {
                        let rebuilt = cond.prob(n2) * trigger.count(n1) as f64;
                        prop_assert!((rebuilt - joint.count(n1, n2) as f64).abs() <= 1e-9);
                    }
                }
                Err(_) => prop_assert_eq!(trigger.count(n1), 0),
            }
        }
    }

    #[test]
    fn count_scaling_leaves_values_and_sharpens_errors(hist in arb_hist(), k in 2u64..5) {
        let scaled = hist.scaled(k);
        let sqrt_k = (k as f64).sqrt();

        for n in 1..hist.n_max() {
            let a = klyshko_k(&hist, n).unwrap();
            let b = klyshko_k(&scaled, n).unwrap();
            prop_assert_eq!(a.status, b.status);
            if a.status == CriterionStatus::Ok {
                prop_assert!((a.value - b.value).abs() <= 1e-12 * a.value.abs().max(1.0));
                let (sa, sb) = (a.std_error.unwrap(), b.std_error.unwrap());
                prop_assert!((sb * sqrt_k - sa).abs() <= 1e-9 * sa);
            }
        }

        let a = gamma_wdsby(&hist);
        let b = gamma_wdsby(&scaled);
        prop_assert_eq!(a.status, b.status);
        if a.status == CriterionStatus::Ok {
            prop_assert!((a.value - b.value).abs() <= 1e-12);
            let (sa, sb) = (a.std_error.unwrap(), b.std_error.unwrap());
            prop_assert!((sb * sqrt_k - sa).abs() <= 1e-9 * sa);
        }

        let a = combined_test(&hist);
        let b = combined_test(&scaled);
        prop_assert_eq!(a.status, b.status);
        if a.status == CriterionStatus::Ok {
            prop_assert!((a.value - b.value).abs() <= 1e-12);
            prop_assert!((a.threshold - b.threshold).abs() <= 1e-12);
        }

        let a = mandel_q(&hist);
        let b = mandel_q(&scaled);
        prop_assert_eq!(a.status, b.status);
        if a.status == CriterionStatus::Ok {
            prop_assert!((a.value - b.value).abs() <= 1e-9 * a.value.abs().max(1.0));
            let (sa, sb) = (a.std_error.unwrap(), b.std_error.unwrap());
            prop_assert!((sb * sqrt_k - sa).abs() <= 1e-9 * sa);
        }
    }

    #[test]
    fn quadrupling_counts_halves_the_klyshko_error(hist in arb_hist()) {
        let scaled = hist.scaled(4);
        for n in 1..hist.n_max() {
            let a = klyshko_k(&hist, n).unwrap();
            if a.status != CriterionStatus::Ok {
                continue;
            }
            let b = klyshko_k(&scaled, n).unwrap();
            let (sa, sb) = (a.std_error.unwrap(), b.std_error.unwrap());
            prop_assert!((sa / sb - 2.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn lee_scaling_matches_the_same_law(joint in arb_joint_hist(), k in 2u64..5) {
        let scaled = joint.scaled(k);
        let sqrt_k = (k as f64).sqrt();
        for n1 in 1..joint.n_max() {
            for n2 in 1..joint.n_max() {
                let a = lee_r_joint(&joint, n1, n2).unwrap();
                let b = lee_r_joint(&scaled, n1, n2).unwrap();
                prop_assert_eq!(a.status, b.status);
                if a.status == CriterionStatus::Ok {
                    prop_assert!((a.value - b.value).abs() <= 1e-12 * a.value.max(1.0));
                    let (sa, sb) = (a.std_error.unwrap(), b.std_error.unwrap());
                    prop_assert!((sb * sqrt_k - sa).abs() <= 1e-9 * sa);
                }
            }
        }
    }

    #[test]
    fn combined_bound_never_exceeds_arithmetic_branch(p1 in 0.0f64..0.5, p3 in 0.0f64..0.5) {
        let t = combined_threshold(p1, p3).unwrap();
        let arithmetic = 0.5 * 1.5f64.sqrt() * (p1 + p3);
        prop_assert!(t <= arithmetic * (1.0 + 1e-15) + 1e-300);
        // Equality needs symmetric neighbors; away from the diagonal the
        // geometric branch wins strictly (for nonzero inputs).
        if p1 > 1e-6 && p3 > 1e-6 && (p1 - p3).abs() > 1e-6 * (p1 + p3) {
            prop_assert!(t < arithmetic);
        }
    }
}

fn apply_dark(p: &PhotonNumberDistribution, dark: f64) -> PhotonNumberDistribution {
    twinbeam::apply_dark_counts(p, dark).unwrap()
}
