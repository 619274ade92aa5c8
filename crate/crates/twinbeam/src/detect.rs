//! Detection chain: binomial loss, Poissonian dark counts, and the
//! mapping from pair statistics to detected photon statistics.

use crate::dist::{JointPhotonDistribution, PhotonNumberDistribution};
use crate::error::{Error, Result};
use crate::numerics::{binomial_row, convolve, poisson_row, Kahan};

/// One detection arm: photons survive independently with probability
/// `efficiency`, and a Poissonian background of mean `dark_mean` adds on
/// top.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossChannel {
    pub efficiency: f64,
    pub dark_mean: f64,
}

impl LossChannel {
    pub fn new(efficiency: f64, dark_mean: f64) -> Result<Self> {
        check_efficiency(efficiency)?;
        check_dark_mean(dark_mean)?;
        Ok(Self { efficiency, dark_mean })
    }

    /// Lossless, dark-free arm.
    pub fn ideal() -> Self {
        Self { efficiency: 1.0, dark_mean: 0.0 }
    }
}

fn check_efficiency(efficiency: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&efficiency) {
        return Err(Error::Domain {
            name: "efficiency",
            value: efficiency,
            constraint: "0 <= efficiency <= 1",
        });
    }
    Ok(())
}

fn check_dark_mean(dark_mean: f64) -> Result<()> {
    if !(dark_mean >= 0.0 && dark_mean.is_finite()) {
        return Err(Error::Domain {
            name: "dark_mean",
            value: dark_mean,
            constraint: "dark_mean >= 0 and finite",
        });
    }
    Ok(())
}

/// Thins each photon independently with survival probability
/// `efficiency`: out[m] = sum over n >= m of p[n] C(n, m) eff^m
/// (1 - eff)^(n - m). Thinning never raises the photon number, so the
/// range is preserved; the input tail is kept as the output tail (its
/// thinned mass cannot be assigned to in-range bins without knowing how
/// it is distributed, so this stays conservative).
pub fn apply_binomial_loss(
    pnd: &PhotonNumberDistribution,
    efficiency: f64,
) -> Result<PhotonNumberDistribution> {
    check_efficiency(efficiency)?;
    if efficiency == 1.0 {
        return Ok(pnd.clone());
    }
    let n_max = pnd.n_max();
    let mut out = vec![Kahan::default(); n_max + 1];
    for (n, &p) in pnd.probs().iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        for (m, &w) in binomial_row(n, efficiency).iter().enumerate() {
            out[m].add(p * w);
        }
    }
    let out = out.iter().map(Kahan::total).collect();
    PhotonNumberDistribution::assemble(out, pnd.tail_mass())
}

/// Adds an independent Poissonian background of mean `dark_mean` by
/// convolution over the stored range. Mass pushed beyond n_max joins the
/// tail.
pub fn apply_dark_counts(
    pnd: &PhotonNumberDistribution,
    dark_mean: f64,
) -> Result<PhotonNumberDistribution> {
    check_dark_mean(dark_mean)?;
    if dark_mean == 0.0 {
        return Ok(pnd.clone());
    }
    let n_max = pnd.n_max();
    let (dark, _) = poisson_row(dark_mean, n_max);
    let out = convolve(pnd.probs(), &dark, n_max);
    let tail = (1.0 - crate::numerics::kahan_sum(&out)).max(0.0);
    PhotonNumberDistribution::assemble(out, tail)
}

/// Loss followed by dark counts: the full single-arm detection chain.
pub fn detected_single(
    pnd: &PhotonNumberDistribution,
    channel: &LossChannel,
) -> Result<PhotonNumberDistribution> {
    apply_dark_counts(&apply_binomial_loss(pnd, channel.efficiency)?, channel.dark_mean)
}

/// Photon-number distribution of a collinear (single-beam) geometry in
/// which both photons of every pair enter the same detector: k pairs
/// become 2k photons, so the support doubles and odd photon numbers
/// carry no mass.
pub fn pairs_to_photons_collinear(pair: &PhotonNumberDistribution) -> PhotonNumberDistribution {
    let mut probs = vec![0.0; 2 * pair.n_max() + 1];
    for (k, &p) in pair.probs().iter().enumerate() {
        probs[2 * k] = p;
    }
    PhotonNumberDistribution::assemble(probs, pair.tail_mass())
        .expect("doubling photon numbers preserves normalization")
}

/// Joint detected distribution of a twin-beam geometry: `pair` pairs are
/// emitted, the signal photon of each pair goes to the signal arm and the
/// idler photon to the idler arm, and each arm applies its own loss and
/// dark counts independently. The result lives on a (n_max + 1)^2 grid;
/// everything outside lands in the tail.
pub fn detected_joint(
    pair: &PhotonNumberDistribution,
    signal: &LossChannel,
    idler: &LossChannel,
    n_max: usize,
) -> Result<JointPhotonDistribution> {
    check_efficiency(signal.efficiency)?;
    check_dark_mean(signal.dark_mean)?;
    check_efficiency(idler.efficiency)?;
    check_dark_mean(idler.dark_mean)?;

    let dim = n_max + 1;
    let dark_s = (signal.dark_mean > 0.0).then(|| poisson_row(signal.dark_mean, n_max).0);
    let dark_i = (idler.dark_mean > 0.0).then(|| poisson_row(idler.dark_mean, n_max).0);

    // Per-arm detected distribution given k emitted pairs.
    let arm_given_k = |k: usize, eff: f64, dark: &Option<Vec<f64>>| -> Vec<f64> {
        let survived = binomial_row(k, eff);
        match dark {
            Some(d) => convolve(&survived, d, n_max),
            None => {
                let mut v = survived;
                v.truncate(n_max + 1);
                v
            }
        }
    };

    let mut cells = vec![Kahan::default(); dim * dim];
    for (k, &pk) in pair.probs().iter().enumerate() {
        if pk == 0.0 {
            continue;
        }
        let s = arm_given_k(k, signal.efficiency, &dark_s);
        let i = arm_given_k(k, idler.efficiency, &dark_i);
        for (n1, &ps) in s.iter().enumerate() {
            if ps == 0.0 {
                continue;
            }
            for (n2, &pi) in i.iter().enumerate() {
                cells[n1 * dim + n2].add(pk * ps * pi);
            }
        }
    }
    let probs: Vec<f64> = cells.iter().map(Kahan::total).collect();
    let tail = (1.0 - crate::numerics::kahan_sum(&probs)).max(0.0);
    JointPhotonDistribution::assemble(dim, probs, tail)
}
