//! Photon-number distributions and photon-count histograms.
//!
//! Probability tables are stored over photon numbers 0..=n_max with the
//! mass beyond n_max kept explicitly in `tail_mass`, so
//! `sum(probs) + tail_mass = 1` stays checkable after every transform.
//! Count tables record raw per-bin events together with the number of
//! trials; trials minus the recorded counts is the overflow that landed
//! beyond the stored range.

use crate::error::{Error, Result};
use crate::numerics::{kahan_sum, Kahan, PROB_FLOOR};

/// Tolerance on the `sum(probs) + tail_mass = 1` normalization invariant.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Tail mass above which moments over the stored range are refused.
pub const MOMENT_TAIL_LIMIT: f64 = 0.01;

/// Which beam of a joint table an operation applies to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Signal,
    Idler,
}

fn validate_probs(probs: &[f64], tail_mass: f64) -> Result<()> {
    if probs.is_empty() {
        return Err(Error::InvalidDistribution(
            "probability table must cover at least photon number 0".into(),
        ));
    }
    for (n, &p) in probs.iter().enumerate() {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidDistribution(format!(
                "probs[{n}] = {p} is not in [0, 1]"
            )));
        }
    }
    if !(0.0..=1.0).contains(&tail_mass) {
        return Err(Error::InvalidDistribution(format!(
            "tail_mass = {tail_mass} is not in [0, 1]"
        )));
    }
    let total = kahan_sum(probs) + tail_mass;
    if (total - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::InvalidDistribution(format!(
            "probabilities plus tail sum to {total}, off by more than {NORMALIZATION_TOL}"
        )));
    }
    Ok(())
}

/// Zeroes sub-floor entries, folding the removed mass into the tail.
fn clamp_floor(probs: &mut [f64], tail_mass: &mut f64) {
    for p in probs.iter_mut() {
        if *p != 0.0 && *p < PROB_FLOOR {
            *tail_mass += *p;
            *p = 0.0;
        }
    }
}

/// Photon-number probabilities of one beam over 0..=n_max, with the
/// probability of exceeding n_max in `tail_mass`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonNumberDistribution {
    probs: Vec<f64>,
    tail_mass: f64,
}

impl PhotonNumberDistribution {
    /// Builds a distribution after range and normalization checks.
    pub fn new(probs: Vec<f64>, tail_mass: f64) -> Result<Self> {
        validate_probs(&probs, tail_mass)?;
        Ok(Self { probs, tail_mass })
    }

    /// Internal constructor: clamps sub-floor entries, then validates.
    pub(crate) fn assemble(mut probs: Vec<f64>, mut tail_mass: f64) -> Result<Self> {
        clamp_floor(&mut probs, &mut tail_mass);
        tail_mass = tail_mass.clamp(0.0, 1.0);
        Self::new(probs, tail_mass)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Probability at photon number n; zero beyond the stored range.
    pub fn prob(&self, n: usize) -> f64 {
        self.probs.get(n).copied().unwrap_or(0.0)
    }

    pub fn n_max(&self) -> usize {
        self.probs.len() - 1
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    /// Mean and variance over the stored range 0..=n_max.
    ///
    /// The tail is excluded from the sums, so the result is only
    /// trustworthy when the tail is small; more than [`MOMENT_TAIL_LIMIT`]
    /// of stray mass is refused instead of silently biasing the answer.
    pub fn moments(&self) -> Result<(f64, f64)> {
        if self.tail_mass >= MOMENT_TAIL_LIMIT {
            return Err(Error::UnreliableMoments {
                tail_mass: self.tail_mass,
                limit: MOMENT_TAIL_LIMIT,
            });
        }
        let mut m1 = Kahan::default();
        let mut m2 = Kahan::default();
        for (n, &p) in self.probs.iter().enumerate() {
            let n = n as f64;
            m1.add(n * p);
            m2.add(n * n * p);
        }
        let mean = m1.total();
        Ok((mean, m2.total() - mean * mean))
    }
}

/// Joint photon-number probabilities of a signal/idler beam pair over a
/// square 0..=n_max grid, stored row-major by signal photon number.
/// `tail_mass` carries everything outside the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPhotonDistribution {
    probs: Vec<f64>,
    dim: usize,
    tail_mass: f64,
}

impl JointPhotonDistribution {
    /// Builds a joint table from a row-major flat grid of side `dim`.
    pub fn from_flat(dim: usize, probs: Vec<f64>, tail_mass: f64) -> Result<Self> {
        if dim == 0 || probs.len() != dim * dim {
            return Err(Error::InvalidDistribution(format!(
                "flat joint table of length {} does not match grid side {dim}",
                probs.len()
            )));
        }
        validate_probs(&probs, tail_mass)?;
        Ok(Self { probs, dim, tail_mass })
    }

    pub(crate) fn assemble(dim: usize, mut probs: Vec<f64>, mut tail_mass: f64) -> Result<Self> {
        clamp_floor(&mut probs, &mut tail_mass);
        tail_mass = tail_mass.clamp(0.0, 1.0);
        Self::from_flat(dim, probs, tail_mass)
    }

    /// Product of two independent single-beam distributions, truncated to
    /// the smaller of the two ranges; everything outside goes to the tail.
    pub fn product(signal: &PhotonNumberDistribution, idler: &PhotonNumberDistribution) -> Self {
        let dim = signal.probs.len().min(idler.probs.len());
        let mut probs = Vec::with_capacity(dim * dim);
        let mut total = Kahan::default();
        for n1 in 0..dim {
            for n2 in 0..dim {
                let p = signal.probs[n1] * idler.probs[n2];
                total.add(p);
                probs.push(p);
            }
        }
        let tail_mass = (1.0 - total.total()).max(0.0);
        Self::assemble(dim, probs, tail_mass)
            .expect("product of valid distributions stays normalized")
    }

    /// Probability at (signal, idler) = (n1, n2); zero beyond the grid.
    pub fn prob(&self, n1: usize, n2: usize) -> f64 {
        if n1 < self.dim && n2 < self.dim {
            self.probs[n1 * self.dim + n2]
        } else {
            0.0
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_max(&self) -> usize {
        self.dim - 1
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    /// Sums out the other beam. The joint tail is kept as the marginal's
    /// tail: mass outside the grid cannot be assigned to an in-range bin
    /// of either axis, so this stays conservative rather than guessing.
    pub fn marginal(&self, axis: Axis) -> PhotonNumberDistribution {
        let mut probs = vec![Kahan::default(); self.dim];
        for n1 in 0..self.dim {
            for n2 in 0..self.dim {
                let p = self.probs[n1 * self.dim + n2];
                match axis {
                    Axis::Signal => probs[n1].add(p),
                    Axis::Idler => probs[n2].add(p),
                }
            }
        }
        let probs = probs.iter().map(Kahan::total).collect();
        PhotonNumberDistribution::assemble(probs, self.tail_mass)
            .expect("marginal of a valid joint table stays normalized")
    }
}

/// Raw photon-count histogram of one beam: counts[n] events saw n
/// photons, out of `trials` total. Trials minus the recorded counts is
/// the overflow beyond the stored range.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountHistogram {
    counts: Vec<u64>,
    trials: u64,
}

impl CountHistogram {
    /// Builds a histogram; counts may not exceed trials. An empty count
    /// vector is normalized to a single zero bin at n = 0.
    pub fn new(mut counts: Vec<u64>, trials: u64) -> Result<Self> {
        if counts.is_empty() {
            counts.push(0);
        }
        let sum: u64 = counts.iter().sum();
        if sum > trials {
            return Err(Error::CountsExceedTrials { sum, trials });
        }
        Ok(Self { counts, trials })
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Count at photon number n; zero beyond the stored range.
    pub fn count(&self, n: usize) -> u64 {
        self.counts.get(n).copied().unwrap_or(0)
    }

    pub fn trials(&self) -> u64 {
        self.trials
    }

    pub fn n_max(&self) -> usize {
        self.counts.len() - 1
    }

    /// Total events recorded in the stored bins.
    pub fn recorded(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Events that fell beyond the stored range.
    pub fn overflow(&self) -> u64 {
        self.trials - self.recorded()
    }

    /// Empirical probability count(n) / trials; zero when no trials.
    pub fn prob(&self, n: usize) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.count(n) as f64 / self.trials as f64
        }
    }

    /// Empirical mean photon number over all trials, counting overflow
    /// trials as if they carried zero photons. None when no trials.
    pub fn empirical_mean(&self) -> Option<f64> {
        self.empirical_moments().map(|(mean, _)| mean)
    }

    /// Empirical mean and variance over all trials, with overflow trials
    /// contributing zero. Callers that care about bias should check
    /// [`Self::overflow`] first. None when no trials.
    pub fn empirical_moments(&self) -> Option<(f64, f64)> {
        if self.trials == 0 {
            return None;
        }
        let t = self.trials as f64;
        let mut m1 = Kahan::default();
        let mut m2 = Kahan::default();
        for (n, &c) in self.counts.iter().enumerate() {
            let n = n as f64;
            m1.add(n * c as f64);
            m2.add(n * n * c as f64);
        }
        let mean = m1.total() / t;
        Some((mean, m2.total() / t - mean * mean))
    }

    /// Same shape with every bin and the trial count multiplied by
    /// `factor`. Panics on u64 overflow.
    pub fn scaled(&self, factor: u64) -> Self {
        Self {
            counts: self
                .counts
                .iter()
                .map(|c| c.checked_mul(factor).expect("count overflow"))
                .collect(),
            trials: self.trials.checked_mul(factor).expect("trials overflow"),
        }
    }
}

/// Raw joint count histogram over a square (signal, idler) grid, stored
/// row-major by signal photon number.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointCountHistogram {
    counts: Vec<u64>,
    dim: usize,
    trials: u64,
}

impl JointCountHistogram {
    /// Builds a joint histogram from a row-major flat grid of side `dim`.
    pub fn from_flat(dim: usize, counts: Vec<u64>, trials: u64) -> Result<Self> {
        if dim == 0 || counts.len() != dim * dim {
            return Err(Error::InvalidDistribution(format!(
                "flat joint histogram of length {} does not match grid side {dim}",
                counts.len()
            )));
        }
        let sum: u64 = counts.iter().sum();
        if sum > trials {
            return Err(Error::CountsExceedTrials { sum, trials });
        }
        Ok(Self { counts, dim, trials })
    }

    /// Count at (signal, idler) = (n1, n2); zero beyond the grid.
    pub fn count(&self, n1: usize, n2: usize) -> u64 {
        if n1 < self.dim && n2 < self.dim {
            self.counts[n1 * self.dim + n2]
        } else {
            0
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_max(&self) -> usize {
        self.dim - 1
    }

    pub fn trials(&self) -> u64 {
        self.trials
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn recorded(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn overflow(&self) -> u64 {
        self.trials - self.recorded()
    }

    /// Empirical probability count(n1, n2) / trials; zero when no trials.
    pub fn prob(&self, n1: usize, n2: usize) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.count(n1, n2) as f64 / self.trials as f64
        }
    }

    /// Collapses the other beam. The marginal keeps this histogram's
    /// trial count, so out-of-grid events remain overflow.
    pub fn marginal(&self, axis: Axis) -> CountHistogram {
        let mut counts = vec![0u64; self.dim];
        for n1 in 0..self.dim {
            for n2 in 0..self.dim {
                let c = self.counts[n1 * self.dim + n2];
                match axis {
                    Axis::Signal => counts[n1] += c,
                    Axis::Idler => counts[n2] += c,
                }
            }
        }
        CountHistogram::new(counts, self.trials)
            .expect("marginal counts cannot exceed source trials")
    }

    /// Idler histogram conditioned on the signal reading exactly `n1`.
    /// The row total becomes the trial count of the slice.
    pub fn conditional(&self, n1: usize) -> Result<CountHistogram> {
        if n1 >= self.dim {
            return Err(Error::OutOfRange {
                what: "trigger photon number",
                index: n1,
                max: self.dim - 1,
            });
        }
        let row = &self.counts[n1 * self.dim..(n1 + 1) * self.dim];
        let total: u64 = row.iter().sum();
        if total == 0 {
            return Err(Error::EmptyConditional { trigger: n1 });
        }
        CountHistogram::new(row.to_vec(), total)
    }

    /// Same shape with every cell and the trial count multiplied by
    /// `factor`. Panics on u64 overflow.
    pub fn scaled(&self, factor: u64) -> Self {
        Self {
            counts: self
                .counts
                .iter()
                .map(|c| c.checked_mul(factor).expect("count overflow"))
                .collect(),
            dim: self.dim,
            trials: self.trials.checked_mul(factor).expect("trials overflow"),
        }
    }
}

fn check_unit_interval(name: &'static str, value: f64, constraint: &'static str) -> Result<()> {
    // NaN fails contains() and lands in the error branch.
    if !(0.0..1.0).contains(&value) {
        return Err(Error::Domain { name, value, constraint });
    }
    Ok(())
}

/// Geometric row (1 - q) q^n over 0..=n_max with tail q^(n_max + 1).
fn geometric(q: f64, n_max: usize) -> (Vec<f64>, f64) {
    let mut probs = vec![0.0; n_max + 1];
    let mut term = 1.0 - q;
    for slot in probs.iter_mut() {
        *slot = term;
        term *= q;
    }
    (probs, q.powi(n_max as i32 + 1))
}

/// Joint photon-number distribution of an ideal two-mode squeezed vacuum
/// with interaction strength |eta|^2 = `eta_sq`: perfectly correlated
/// pairs, p(n, n) = (1 - eta_sq) eta_sq^n and zero elsewhere.
pub fn pnd_two_mode_squeezed(eta_sq: f64, n_max: usize) -> Result<JointPhotonDistribution> {
    check_unit_interval("eta_sq", eta_sq, "0 <= eta_sq < 1")?;
    let dim = n_max + 1;
    let (diag, tail) = geometric(eta_sq, n_max);
    let mut probs = vec![0.0; dim * dim];
    for (n, p) in diag.into_iter().enumerate() {
        probs[n * dim + n] = p;
    }
    JointPhotonDistribution::assemble(dim, probs, tail)
}

/// Photon-number distribution of an ideal degenerate squeezed vacuum
/// with |chi|^2 = `chi_sq`: photons arrive in same-mode pairs, so only
/// even numbers occur, p(2k) = (1 - chi_sq) chi_sq^k.
pub fn pnd_degenerate_squeezed(chi_sq: f64, n_max: usize) -> Result<PhotonNumberDistribution> {
    check_unit_interval("chi_sq", chi_sq, "0 <= chi_sq < 1")?;
    let pairs_max = n_max / 2;
    let (pair_probs, tail) = geometric(chi_sq, pairs_max);
    let mut probs = vec![0.0; n_max + 1];
    for (k, p) in pair_probs.into_iter().enumerate() {
        probs[2 * k] = p;
    }
    PhotonNumberDistribution::assemble(probs, tail)
}

/// Poissonian photon-number distribution with the given mean.
pub fn pnd_poisson(mean: f64, n_max: usize) -> Result<PhotonNumberDistribution> {
    if !(mean >= 0.0 && mean.is_finite()) {
        return Err(Error::Domain {
            name: "mean",
            value: mean,
            constraint: "mean >= 0 and finite",
        });
    }
    let (probs, tail) = crate::numerics::poisson_row(mean, n_max);
    PhotonNumberDistribution::assemble(probs, tail)
}

/// Thermal (geometric) photon-number distribution with the given mean:
/// p(n) = mean^n / (1 + mean)^(n + 1).
pub fn pnd_thermal(mean: f64, n_max: usize) -> Result<PhotonNumberDistribution> {
    if !(mean >= 0.0 && mean.is_finite()) {
        return Err(Error::Domain {
            name: "mean",
            value: mean,
            constraint: "mean >= 0 and finite",
        });
    }
    let q = mean / (1.0 + mean);
    let (probs, tail) = geometric(q, n_max);
    PhotonNumberDistribution::assemble(probs, tail)
}

/// Pair-count distribution of a spectrally multimode source: `modes`
/// independent thermal modes, each of mean `mean_per_mode`, summed by
/// iterated convolution. One mode recovers the thermal law; many weak
/// modes approach the Poisson law of the same total mean.
pub fn pnd_pair_count_multimode(
    modes: u32,
    mean_per_mode: f64,
    n_max: usize,
) -> Result<PhotonNumberDistribution> {
    if modes < 1 {
        return Err(Error::DomainInt {
            name: "modes",
            value: modes as i64,
            constraint: "modes >= 1",
        });
    }
    if !(mean_per_mode >= 0.0 && mean_per_mode.is_finite()) {
        return Err(Error::Domain {
            name: "mean_per_mode",
            value: mean_per_mode,
            constraint: "mean_per_mode >= 0 and finite",
        });
    }
    let q = mean_per_mode / (1.0 + mean_per_mode);
    let (single, _) = geometric(q, n_max);
    let mut probs = single.clone();
    for _ in 1..modes {
        probs = crate::numerics::convolve(&probs, &single, n_max);
    }
    let tail = (1.0 - kahan_sum(&probs)).max(0.0);
    PhotonNumberDistribution::assemble(probs, tail)
}
