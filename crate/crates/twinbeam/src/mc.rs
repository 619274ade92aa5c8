//! Pulse-level Monte Carlo of pulsed pair-generation experiments.
//!
//! Every pulse draws a pair number from the source statistics, routes
//! photons through per-arm loss and dark counts, and bins the detected
//! photon numbers. Runs are reproducible by contract: pulses are
//! processed in fixed blocks of [`BLOCK_PULSES`], each block owns the
//! RNG substream whose id is its block index, and within a pulse the
//! draw order is pairs, signal thinning, signal darks, idler thinning,
//! idler darks. Block results are combined by commutative addition, so
//! thread count and scheduling cannot change the histogram.

use crate::dist::{CountHistogram, JointCountHistogram};
use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Gamma, Poisson};
use rayon::prelude::*;
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Pulses per RNG block.
pub const BLOCK_PULSES: u64 = 1 << 16;

/// Largest supported histogram photon number: keeps the per-block joint
/// grid at a sane size.
pub const N_MAX_LIMIT: usize = 255;

/// Spectral mode structure of the source.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Modes {
    /// Many weak modes: Poissonian pair statistics.
    #[default]
    Unlimited,
    /// This many equally pumped thermal modes: negative-binomial pair
    /// statistics, thermal at 1.
    Finite(u32),
}

impl Serialize for Modes {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Modes::Unlimited => s.serialize_str("unlimited"),
            Modes::Finite(m) => s.serialize_u32(*m),
        }
    }
}

impl<'de> Deserialize<'de> for Modes {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct ModesVisitor;
        impl Visitor<'_> for ModesVisitor {
            type Value = Modes;

            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("a positive integer mode count or the string \"unlimited\"")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Modes, E> {
                if v == "unlimited" {
                    Ok(Modes::Unlimited)
                } else {
                    Err(E::invalid_value(de::Unexpected::Str(v), &self))
                }
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Modes, E> {
                if (1..=u32::MAX as u64).contains(&v) {
                    Ok(Modes::Finite(v as u32))
                } else {
                    Err(E::invalid_value(de::Unexpected::Unsigned(v), &self))
                }
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Modes, E> {
                if v >= 1 {
                    self.visit_u64(v as u64)
                } else {
                    Err(E::invalid_value(de::Unexpected::Signed(v), &self))
                }
            }
        }
        d.deserialize_any(ModesVisitor)
    }
}

/// Beam routing of the experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Geometry {
    /// Signal and idler photons of each pair go to separate detectors.
    #[default]
    TwinBeam,
    /// Both photons of each pair hit the same detector; idler settings
    /// are ignored.
    Collinear,
}

/// Full description of one simulated run. Unknown fields in a config
/// file are rejected rather than silently ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub pulses: u64,
    #[serde(default = "default_mean_pairs")]
    pub mean_pairs_per_pulse: f64,
    #[serde(default)]
    pub modes: Modes,
    #[serde(default = "default_efficiency")]
    pub eta_signal: f64,
    #[serde(default = "default_efficiency")]
    pub eta_idler: f64,
    #[serde(default)]
    pub dark_signal: f64,
    #[serde(default)]
    pub dark_idler: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    #[serde(default)]
    pub geometry: Geometry,
}

fn default_mean_pairs() -> f64 {
    1.0
}

fn default_efficiency() -> f64 {
    1.0
}

fn default_n_max() -> usize {
    9
}

impl ExperimentConfig {
    /// Minimal config: everything at its default except the pulse count.
    pub fn with_pulses(pulses: u64) -> Self {
        Self {
            pulses,
            mean_pairs_per_pulse: default_mean_pairs(),
            modes: Modes::default(),
            eta_signal: default_efficiency(),
            eta_idler: default_efficiency(),
            dark_signal: 0.0,
            dark_idler: 0.0,
            seed: 0,
            n_max: default_n_max(),
            geometry: Geometry::default(),
        }
    }

    /// Checks every parameter that the selected geometry actually uses;
    /// collinear runs ignore the idler settings entirely.
    pub fn validate(&self) -> Result<()> {
        if self.pulses == 0 {
            return Err(Error::DomainInt {
                name: "pulses",
                value: 0,
                constraint: "at least one pulse",
            });
        }
        if !(self.mean_pairs_per_pulse >= 0.0 && self.mean_pairs_per_pulse.is_finite()) {
            return Err(Error::Domain {
                name: "mean_pairs_per_pulse",
                value: self.mean_pairs_per_pulse,
                constraint: "mean >= 0 and finite",
            });
        }
        if self.modes == Modes::Finite(0) {
            return Err(Error::DomainInt {
                name: "modes",
                value: 0,
                constraint: "modes >= 1",
            });
        }
        if self.n_max < 1 || self.n_max > N_MAX_LIMIT {
            return Err(Error::DomainInt {
                name: "n_max",
                value: self.n_max as i64,
                constraint: "1 <= n_max <= 255",
            });
        }
        check_arm("eta_signal", self.eta_signal, "dark_signal", self.dark_signal)?;
        if self.geometry == Geometry::TwinBeam {
            check_arm("eta_idler", self.eta_idler, "dark_idler", self.dark_idler)?;
        }
        Ok(())
    }
}

fn check_arm(eta_name: &'static str, eta: f64, dark_name: &'static str, dark: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::Domain {
            name: eta_name,
            value: eta,
            constraint: "0 <= efficiency <= 1",
        });
    }
    if !(dark >= 0.0 && dark.is_finite()) {
        return Err(Error::Domain {
            name: dark_name,
            value: dark,
            constraint: "dark mean >= 0 and finite",
        });
    }
    Ok(())
}

/// Per-pulse pair-number sampler.
enum PairSampler {
    Zero,
    Poissonian(Poisson<f64>),
    /// Finite mode count: the sum of `modes` i.i.d. geometric mode
    /// occupations is negative binomial, which is exactly a
    /// Gamma(modes, mean/modes) mixture of Poissonians.
    Multimode(Gamma<f64>),
}

impl PairSampler {
    fn new(cfg: &ExperimentConfig) -> Self {
        if cfg.mean_pairs_per_pulse == 0.0 {
            return PairSampler::Zero;
        }
        match cfg.modes {
            Modes::Unlimited => PairSampler::Poissonian(
                Poisson::new(cfg.mean_pairs_per_pulse).expect("mean validated positive"),
            ),
            Modes::Finite(m) => PairSampler::Multimode(
                Gamma::new(m as f64, cfg.mean_pairs_per_pulse / m as f64)
                    .expect("shape and scale validated positive"),
            ),
        }
    }

    fn sample(&self, rng: &mut ChaCha12Rng) -> u64 {
        match self {
            PairSampler::Zero => 0,
            PairSampler::Poissonian(p) => p.sample(rng) as u64,
            PairSampler::Multimode(gamma) => {
                let lambda = gamma.sample(rng);
                if lambda > 0.0 {
                    Poisson::new(lambda).expect("gamma draw is positive").sample(rng) as u64
                } else {
                    0
                }
            }
        }
    }
}

fn dark_sampler(mean: f64) -> Option<Poisson<f64>> {
    (mean > 0.0).then(|| Poisson::new(mean).expect("dark mean validated positive"))
}

fn draw_dark(rng: &mut ChaCha12Rng, sampler: &Option<Poisson<f64>>) -> u64 {
    sampler.as_ref().map_or(0, |p| p.sample(rng) as u64)
}

/// Thins `photons` survivors with probability `efficiency` each.
fn thin(rng: &mut ChaCha12Rng, photons: u64, efficiency: f64) -> u64 {
    if efficiency == 1.0 {
        return photons;
    }
    if efficiency == 0.0 {
        return 0;
    }
    (0..photons).filter(|_| rng.random_bool(efficiency)).count() as u64
}

fn block_rng(seed: u64, block: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(block);
    rng
}

fn block_len(pulses: u64, block: u64) -> u64 {
    (pulses - block * BLOCK_PULSES).min(BLOCK_PULSES)
}

fn merge(mut a: Vec<u64>, b: Vec<u64>) -> Vec<u64> {
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
    a
}

/// Runs the twin-beam experiment and bins (signal, idler) photon
/// numbers. Pulses in which either arm exceeds n_max stay in the trial
/// count but land in no bin, so they surface as overflow.
pub fn simulate_twin_beam(cfg: &ExperimentConfig) -> Result<JointCountHistogram> {
    cfg.validate()?;
    if cfg.geometry != Geometry::TwinBeam {
        return Err(Error::GeometryMismatch {
            expected: "twin_beam",
            found: "collinear",
        });
    }
    let dim = cfg.n_max + 1;
    let blocks = cfg.pulses.div_ceil(BLOCK_PULSES);
    let counts = (0..blocks)
        .into_par_iter()
        .map(|block| {
            let mut rng = block_rng(cfg.seed, block);
            let sampler = PairSampler::new(cfg);
            let dark_s = dark_sampler(cfg.dark_signal);
            let dark_i = dark_sampler(cfg.dark_idler);
            let mut counts = vec![0u64; dim * dim];
            for _ in 0..block_len(cfg.pulses, block) {
                let pairs = sampler.sample(&mut rng);
                let n1 = thin(&mut rng, pairs, cfg.eta_signal) + draw_dark(&mut rng, &dark_s);
                let n2 = thin(&mut rng, pairs, cfg.eta_idler) + draw_dark(&mut rng, &dark_i);
                if n1 as usize <= cfg.n_max && n2 as usize <= cfg.n_max {
                    counts[n1 as usize * dim + n2 as usize] += 1;
                }
            }
            counts
        })
        .reduce(|| vec![0u64; dim * dim], merge);
    JointCountHistogram::from_flat(dim, counts, cfg.pulses)
}

/// Runs the collinear experiment, in which both photons of every pair
/// reach the single detector: k pairs present 2k photons to the signal
/// arm. Idler settings are ignored.
pub fn simulate_collinear(cfg: &ExperimentConfig) -> Result<CountHistogram> {
    cfg.validate()?;
    if cfg.geometry != Geometry::Collinear {
        return Err(Error::GeometryMismatch {
            expected: "collinear",
            found: "twin_beam",
        });
    }
    let blocks = cfg.pulses.div_ceil(BLOCK_PULSES);
    let counts = (0..blocks)
        .into_par_iter()
        .map(|block| {
            let mut rng = block_rng(cfg.seed, block);
            let sampler = PairSampler::new(cfg);
            let dark_s = dark_sampler(cfg.dark_signal);
            let mut counts = vec![0u64; cfg.n_max + 1];
            for _ in 0..block_len(cfg.pulses, block) {
                let pairs = sampler.sample(&mut rng);
                let n = thin(&mut rng, 2 * pairs, cfg.eta_signal) + draw_dark(&mut rng, &dark_s);
                if n as usize <= cfg.n_max {
                    counts[n as usize] += 1;
                }
            }
            counts
        })
        .reduce(|| vec![0u64; cfg.n_max + 1], merge);
    CountHistogram::new(counts, cfg.pulses)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::Axis;

    fn base_config(pulses: u64) -> ExperimentConfig {
        ExperimentConfig::with_pulses(pulses)
    }

    #[test]
    fn repeated_runs_are_identical() {
        let mut cfg = base_config(100_000);
        cfg.mean_pairs_per_pulse = 0.8;
        cfg.modes = Modes::Finite(3);
        cfg.eta_signal = 0.55;
        cfg.eta_idler = 0.45;
        cfg.dark_signal = 0.02;
        cfg.dark_idler = 0.01;
        cfg.seed = 41;
        let a = simulate_twin_beam(&cfg).unwrap();
        let b = simulate_twin_beam(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.trials(), 100_000);
    }

    #[test]
    fn thread_count_does_not_change_the_histogram() {
        let mut cfg = base_config(300_000);
        cfg.mean_pairs_per_pulse = 1.0;
        cfg.eta_signal = 0.6;
        cfg.eta_idler = 0.5;
        cfg.seed = 7;
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| simulate_twin_beam(&cfg).unwrap());
        let multi = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| simulate_twin_beam(&cfg).unwrap());
        assert_eq!(single, multi);
    }

    #[test]
    fn blind_detectors_see_only_darkness() {
        let mut cfg = base_config(20_000);
        cfg.eta_signal = 0.0;
        cfg.eta_idler = 0.0;
        let h = simulate_twin_beam(&cfg).unwrap();
        assert_eq!(h.count(0, 0), 20_000);
    }

    #[test]
    fn ideal_arms_keep_the_beams_locked() {
        let mut cfg = base_config(100_000);
        cfg.seed = 3;
        let h = simulate_twin_beam(&cfg).unwrap();
        for n1 in 0..=h.n_max() {
            for n2 in 0..=h.n_max() {
                if n1 != n2 {
                    assert_eq!(h.count(n1, n2), 0, "({n1},{n2})");
                }
            }
        }
        // Diagonal occupation tracks the Poissonian source.
        let marginal = h.marginal(Axis::Signal);
        let expect = crate::dist::pnd_poisson(1.0, h.n_max()).unwrap();
        for n in 0..=4 {
            let got = marginal.prob(n);
            let want = expect.prob(n);
            assert!((got - want).abs() < 0.01, "n={n}: {got} vs {want}");
        }
    }

    #[test]
    fn collinear_runs_produce_even_counts_without_loss() {
        let mut cfg = base_config(50_000);
        cfg.geometry = Geometry::Collinear;
        cfg.mean_pairs_per_pulse = 0.5;
        cfg.seed = 11;
        let h = simulate_collinear(&cfg).unwrap();
        for n in (1..=h.n_max()).step_by(2) {
            assert_eq!(h.count(n), 0, "odd bin {n} must stay empty");
        }

        cfg.eta_signal = 0.5;
        let lossy = simulate_collinear(&cfg).unwrap();
        let odd: u64 = (1..=lossy.n_max()).step_by(2).map(|n| lossy.count(n)).sum();
        assert!(odd > 0, "loss must populate odd bins");
        let (mean, _) = lossy.empirical_moments().unwrap();
        // Detected mean is 2 * pairs * efficiency = 0.5; allow 5 sigma.
        assert!((mean - 0.5).abs() < 5.0 * (0.75f64 / 50_000.0).sqrt());
    }

    #[test]
    fn finite_mode_source_keeps_the_configured_mean() {
        let mut cfg = base_config(200_000);
        cfg.modes = Modes::Finite(5);
        cfg.mean_pairs_per_pulse = 1.0;
        cfg.seed = 13;
        let h = simulate_twin_beam(&cfg).unwrap();
        let (mean, _) = h.marginal(Axis::Signal).empirical_moments().unwrap();
        // Negative binomial with 5 modes: var = mean (1 + mean/5) = 1.2.
        assert!((mean - 1.0).abs() < 5.0 * (1.2f64 / 200_000.0).sqrt());
    }

    #[test]
    fn geometry_and_parameter_validation() {
        let cfg = base_config(0);
        assert!(matches!(
            simulate_twin_beam(&cfg),
            Err(Error::DomainInt { name: "pulses", .. })
        ));

        let mut cfg = base_config(10);
        cfg.eta_signal = 1.5;
        assert!(simulate_twin_beam(&cfg).is_err());

        let mut cfg = base_config(10);
        cfg.n_max = 0;
        assert!(simulate_twin_beam(&cfg).is_err());

        let mut cfg = base_config(10);
        cfg.modes = Modes::Finite(0);
        assert!(simulate_twin_beam(&cfg).is_err());

        let cfg = base_config(10);
        assert!(matches!(
            simulate_collinear(&cfg),
            Err(Error::GeometryMismatch { .. })
        ));

        // Collinear runs do not look at idler settings at all.
        let mut cfg = base_config(10);
        cfg.geometry = Geometry::Collinear;
        cfg.eta_idler = 42.0;
        assert!(simulate_collinear(&cfg).is_ok());
        assert!(simulate_twin_beam(&cfg).is_err());
    }

    #[test]
    fn config_serde_round_trip_and_strictness() {
        let text = r#"{
            "pulses": 1000,
            "mean_pairs_per_pulse": 0.5,
            "modes": "unlimited",
            "eta_signal": 0.5,
            "eta_idler": 0.4,
            "dark_signal": 0.01,
            "dark_idler": 0.02,
            "seed": 9,
            "n_max": 12,
            "geometry": "twin_beam"
        }"#;
        let cfg: ExperimentConfig = serde_json::from_str(text).unwrap();
        assert_eq!(cfg.modes, Modes::Unlimited);
        assert_eq!(cfg.geometry, Geometry::TwinBeam);
        let echoed = serde_json::to_string(&cfg).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&echoed).unwrap();
        assert_eq!(cfg, back);

        let finite: ExperimentConfig =
            serde_json::from_str(r#"{"pulses": 10, "modes": 8}"#).unwrap();
        assert_eq!(finite.modes, Modes::Finite(8));
        assert_eq!(finite.mean_pairs_per_pulse, 1.0);
        assert_eq!(finite.n_max, 9);

        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"pulses": 10, "modes": 0}"#).is_err());
        assert!(
            serde_json::from_str::<ExperimentConfig>(r#"{"pulses": 10, "modes": "many"}"#).is_err()
        );
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"pulses": 10, "puless": 1}"#).is_err());
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"seed": 1}"#).is_err());
    }
}
