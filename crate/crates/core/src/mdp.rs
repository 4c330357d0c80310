//! Frame model, belief sufficient statistic and transition law.
//!
//! Under a known prior the posterior of the MU angle after any sequence of
//! beams and ACK/timeout observations is the prior restricted to a support
//! set and renormalized, so the belief is carried as `(support, slot)` only.
//! [`GridDensity`] is a discretized density used to check that claim against
//! a plain sequential Bayes update with arbitrary priors.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{total_measure, ArcInterval, ANGLE_TOL};

/// Frame layout: `frame_len` slots (N), the first `sensing` (L) of which are
/// beacons; the MU angle is uniform on `[-sigma/2, sigma/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameConfig {
    frame_len: usize,
    sensing: usize,
    sigma: f64,
}

impl FrameConfig {
    pub fn new(frame_len: usize, sensing: usize, sigma: f64) -> Result<Self> {
        if frame_len == 0 {
            return Err(Error::InvalidConfig("frame length N must be >= 1".into()));
        }
        if sensing > frame_len {
            return Err(Error::InvalidConfig(format!(
                "sensing slots L = {sensing} exceed frame length N = {frame_len}"
            )));
        }
        if !sigma.is_finite() || sigma <= 0.0 || sigma > TAU + ANGLE_TOL {
            return Err(Error::InvalidConfig(format!(
                "prior width sigma = {sigma} outside (0, 2π]"
            )));
        }
        Ok(Self {
            frame_len,
            sensing,
            sigma: sigma.min(TAU),
        })
    }

    pub fn frame_len(&self) -> usize {
        self.frame_len
    }

    pub fn sensing(&self) -> usize {
        self.sensing
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn data_slots(&self) -> usize {
        self.frame_len - self.sensing
    }

    /// Same frame and prior with a different sensing budget.
    pub fn with_sensing(&self, sensing: usize) -> Result<Self> {
        Self::new(self.frame_len, sensing, self.sigma)
    }

    /// Fraction of the frame spent on data, `(N - L) / N`.
    pub fn data_fraction(&self) -> f64 {
        self.data_slots() as f64 / self.frame_len as f64
    }

    pub fn prior_support(&self) -> ArcInterval {
        if self.sigma >= TAU {
            ArcInterval::full_circle()
        } else {
            ArcInterval::new(-self.sigma / 2.0, self.sigma).expect("sigma validated")
        }
    }
}

/// Physical constituents of the base SNR parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    /// Average transmit power over a frame (W).
    pub p_avg: f64,
    /// Maximum BS-MU distance (m).
    pub d_max: f64,
    /// Path-loss exponent.
    pub beta: f64,
    /// One-sided noise power spectral density.
    pub n0: f64,
}

impl LinkBudget {
    pub fn gamma0(&self) -> f64 {
        self.p_avg * self.d_max.powf(-self.beta) / (TAU * self.n0)
    }
}

/// Base SNR parameter γ₀ in linear scale. It does not depend on the sensing
/// budget; the data-phase value γ_L is always derived from it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    gamma0: f64,
    link: Option<LinkBudget>,
}

impl ChannelParams {
    pub fn new(gamma0: f64) -> Result<Self> {
        if !gamma0.is_finite() || gamma0 <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "gamma0 = {gamma0} must be > 0"
            )));
        }
        Ok(Self { gamma0, link: None })
    }

    pub fn from_db(gamma0_db: f64) -> Result<Self> {
        Self::new(10f64.powf(gamma0_db / 10.0))
    }

    pub fn from_link_budget(link: LinkBudget) -> Result<Self> {
        let mut cp = Self::new(link.gamma0())?;
        cp.link = Some(link);
        Ok(cp)
    }

    pub fn gamma0(&self) -> f64 {
        self.gamma0
    }

    pub fn link_budget(&self) -> Option<&LinkBudget> {
        self.link.as_ref()
    }
}

/// γ_L = γ₀·N/(N−L): the frame's energy budget spread over the data slots.
pub fn gamma_l(cp: &ChannelParams, cfg: &FrameConfig) -> Result<f64> {
    gamma_for_data_slots(cp, cfg.frame_len, cfg.data_slots())
}

pub(crate) fn gamma_for_data_slots(
    cp: &ChannelParams,
    frame_len: usize,
    data_slots: usize,
) -> Result<f64> {
    if data_slots == 0 {
        return Err(Error::NoDataSlots(frame_len));
    }
    Ok(cp.gamma0 * frame_len as f64 / data_slots as f64)
}

/// SNR of a sectored beam of the given width.
pub fn snr(beam_width: f64, gamma_l: f64) -> Result<f64> {
    if !(beam_width > 0.0) {
        return Err(Error::InvalidArc(format!(
            "beam width {beam_width} must be > 0"
        )));
    }
    Ok(gamma_l / beam_width)
}

/// Observation returned by the MU at the end of a sensing slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Observation {
    pub ack: bool,
}

impl Observation {
    pub const ACK: Self = Self { ack: true };
    pub const TIMEOUT: Self = Self { ack: false };
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeliefState {
    support: ArcInterval,
    slot: usize,
}

impl BeliefState {
    pub fn new(support: ArcInterval, slot: usize) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::InconsistentObservation);
        }
        Ok(Self { support, slot })
    }

    pub fn support(&self) -> &ArcInterval {
        &self.support
    }

    pub fn slot(&self) -> usize {
        self.slot
    }
}

pub fn initial_belief(cfg: &FrameConfig) -> BeliefState {
    BeliefState {
        support: cfg.prior_support(),
        slot: 0,
    }
}

/// P(ack | U_k, beam) = |beam ∩ U_k| / |U_k|.
pub fn detection_probability(b: &BeliefState, beam: &ArcInterval) -> f64 {
    let hit = total_measure(&b.support.intersect(beam));
    (hit / b.support.measure()).clamp(0.0, 1.0)
}

/// Support recursion: U_{k+1} = beam ∩ U_k on ACK, U_k \ beam on timeout.
pub fn update_belief(b: &BeliefState, beam: &ArcInterval, obs: Observation) -> Result<BeliefState> {
    let pieces = if obs.ack {
        b.support.intersect(beam)
    } else {
        b.support.subtract(beam)
    };
    match pieces.as_slice() {
        [] => Err(Error::InconsistentObservation),
        [support] => Ok(BeliefState {
            support: *support,
            slot: b.slot + 1,
        }),
        _ => Err(Error::NonContiguous {
            pieces: pieces.len(),
        }),
    }
}

/// Expected per-slot throughput of transmitting data on `beam` given the
/// belief at the end of sensing. Zero when the frame has no data slots.
pub fn expected_reward(
    b: &BeliefState,
    beam: &ArcInterval,
    cfg: &FrameConfig,
    cp: &ChannelParams,
) -> Result<f64> {
    if cfg.data_slots() == 0 {
        return Ok(0.0);
    }
    let gamma = gamma_l(cp, cfg)?;
    let snr = snr(beam.measure(), gamma)?;
    Ok(cfg.data_fraction() * detection_probability(b, beam) * (1.0 + snr).log2())
}

/// Probability masses on a uniform grid of bins over `[-π, π)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDensity {
    masses: Vec<f64>,
}

impl GridDensity {
    pub const DEFAULT_BINS: usize = 4096;

    /// Builds a density from unnormalized non-negative bin weights.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() || weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidConfig(
                "grid weights must be finite and >= 0".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::ZeroMass);
        }
        Ok(Self {
            masses: weights.into_iter().map(|w| w / total).collect(),
        })
    }

    /// Density proportional to `pdf(bin center)`.
    pub fn from_pdf(bins: usize, pdf: impl Fn(f64) -> f64) -> Result<Self> {
        let width = TAU / bins as f64;
        Self::from_weights(
            (0..bins)
                .map(|i| pdf(-PI + (i as f64 + 0.5) * width))
                .collect(),
        )
    }

    /// The uniform prior on `cfg`'s prior support.
    pub fn uniform_prior(bins: usize, cfg: &FrameConfig) -> Result<Self> {
        let support = cfg.prior_support();
        Self::from_pdf(bins, |t| if support.contains(t) { 1.0 } else { 0.0 })
    }

    /// Symmetric triangular prior on `[-sigma/2, sigma/2)`, peaked at 0.
    pub fn triangular_prior(bins: usize, cfg: &FrameConfig) -> Result<Self> {
        let half = cfg.sigma / 2.0;
        Self::from_pdf(bins, |t| (1.0 - t.abs() / half).max(0.0))
    }

    pub fn bins(&self) -> usize {
        self.masses.len()
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn bin_width(&self) -> f64 {
        TAU / self.masses.len() as f64
    }

    pub fn bin_center(&self, i: usize) -> f64 {
        -PI + (i as f64 + 0.5) * self.bin_width()
    }

    pub fn mass_in(&self, arc: &ArcInterval) -> f64 {
        self.masses
            .iter()
            .enumerate()
            .filter(|(i, _)| arc.contains(self.bin_center(*i)))
            .map(|(_, m)| m)
            .sum()
    }

    fn restricted(&self, keep: impl Fn(f64) -> bool) -> Result<Self> {
        let weights: Vec<f64> = self
            .masses
            .iter()
            .enumerate()
            .map(|(i, &m)| if keep(self.bin_center(i)) { m } else { 0.0 })
            .collect();
        Self::from_weights(weights).map_err(|e| match e {
            Error::ZeroMass => Error::InconsistentObservation,
            other => other,
        })
    }
}

/// One step of Bayes' rule with the noiseless ACK likelihood
/// `P(ack | θ) = χ(θ ∈ beam)` evaluated at bin centers.
pub fn grid_bayes_update(
    prior: &GridDensity,
    beam: &ArcInterval,
    obs: Observation,
) -> Result<GridDensity> {
    prior.restricted(|t| beam.contains(t) == obs.ack)
}

/// The prior restricted to `support` and renormalized.
pub fn reconstruct_density(prior: &GridDensity, support: &ArcInterval) -> Result<GridDensity> {
    prior
        .restricted(|t| support.contains(t))
        .map_err(|_| Error::ZeroMass)
}
