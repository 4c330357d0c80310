//! Sensing policies: which beam to send in each beacon slot and which beam to
//! use for data once sensing ends.
//!
//! * **Bisection** probes the lower half of the current support each slot.
//! * **Exhaustive** scans `K` fixed sectors of width `σ/K` left to right and
//!   stops at the first ACK.
//! * **Iterative** splits the current sector into `M` subsectors, probes up
//!   to `M − 1` of them left to right, and descends into the one holding the
//!   MU. The last subsector of a level is inferred without a probe.
//!
//! Every beam is a prefix of the current support, so supports stay
//! contiguous and the final data beam is the support itself.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ArcInterval, EMPTY_WIDTH};

/// Narrowest beam a policy will emit. Below this, arc boundaries near ±π
/// sit within a few ulps of each other and halving stops shrinking the arc.
pub const MIN_BEAM_WIDTH: f64 = EMPTY_WIDTH;
use crate::mdp::{initial_belief, update_belief, BeliefState, FrameConfig, Observation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PolicySpec {
    Bisection,
    Exhaustive { sectors: usize },
    Iterative { division: usize },
}

impl PolicySpec {
    pub fn name(&self) -> &'static str {
        match self {
            PolicySpec::Bisection => "bisection",
            PolicySpec::Exhaustive { .. } => "exhaustive",
            PolicySpec::Iterative { .. } => "iterative",
        }
    }

    /// K for exhaustive, M for iterative.
    pub fn param(&self) -> Option<usize> {
        match *self {
            PolicySpec::Bisection => None,
            PolicySpec::Exhaustive { sectors } => Some(sectors),
            PolicySpec::Iterative { division } => Some(division),
        }
    }

    pub fn validate(&self, cfg: &FrameConfig) -> Result<()> {
        match *self {
            PolicySpec::Bisection => Ok(()),
            PolicySpec::Exhaustive { sectors } if sectors >= 1 && sectors <= cfg.frame_len() => {
                Ok(())
            }
            PolicySpec::Exhaustive { sectors } => Err(Error::InvalidPolicy(format!(
                "exhaustive needs 1 <= K <= N = {}, got K = {sectors}",
                cfg.frame_len()
            ))),
            PolicySpec::Iterative { division } if division >= 2 => Ok(()),
            PolicySpec::Iterative { division } => Err(Error::InvalidPolicy(format!(
                "iterative needs M >= 2, got M = {division}"
            ))),
        }
    }
}

impl fmt::Display for PolicySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.param() {
            Some(p) => write!(f, "{}:{p}", self.name()),
            None => f.write_str(self.name()),
        }
    }
}

impl FromStr for PolicySpec {
    type Err = Error;

    /// Parses `bisection`, `exhaustive:K` or `iterative:M`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, param) = match s.split_once(':') {
            Some((n, p)) => (n.trim(), Some(p.trim())),
            None => (s.trim(), None),
        };
        let parse_param = |p: Option<&str>| -> Result<usize> {
            let p = p.ok_or_else(|| Error::InvalidPolicy(format!("`{s}` needs a parameter")))?;
            p.parse()
                .map_err(|_| Error::InvalidPolicy(format!("bad parameter in `{s}`")))
        };
        match name.to_ascii_lowercase().as_str() {
            "bisection" if param.is_none() => Ok(PolicySpec::Bisection),
            "exhaustive" => Ok(PolicySpec::Exhaustive {
                sectors: parse_param(param)?,
            }),
            "iterative" => {
                let division = parse_param(param)?;
                if division < 2 {
                    return Err(Error::InvalidPolicy(format!(
                        "iterative needs M >= 2 in `{s}`"
                    )));
                }
                Ok(PolicySpec::Iterative { division })
            }
            _ => Err(Error::InvalidPolicy(format!("unknown policy `{s}`"))),
        }
    }
}

/// Per-episode progress that the belief alone does not capture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PolicyState {
    Bisection,
    Exhaustive {
        next_sector: usize,
    },
    Iterative {
        level: usize,
        probes: usize,
        level_width: f64,
    },
}

impl PolicyState {
    pub fn initial(spec: &PolicySpec, cfg: &FrameConfig) -> Self {
        match spec {
            PolicySpec::Bisection => PolicyState::Bisection,
            PolicySpec::Exhaustive { .. } => PolicyState::Exhaustive { next_sector: 0 },
            PolicySpec::Iterative { .. } => PolicyState::Iterative {
                level: 1,
                probes: 0,
                level_width: cfg.sigma(),
            },
        }
    }
}

pub fn next_beam_bisection(b: &BeliefState, cfg: &FrameConfig) -> Result<ArcInterval> {
    if b.slot() >= cfg.sensing() {
        return Err(Error::SensingExhausted {
            slot: b.slot(),
            budget: cfg.sensing(),
        });
    }
    Ok(b.support().halves()?.0)
}

/// Sector `next_sector` of the `sectors` equal sectors of the prior support.
pub fn next_beam_exhaustive(
    sectors: usize,
    next_sector: usize,
    cfg: &FrameConfig,
) -> Result<ArcInterval> {
    if next_sector >= sectors {
        return Err(Error::SensingExhausted {
            slot: next_sector,
            budget: sectors,
        });
    }
    let sigma = cfg.sigma();
    let width = sigma / sectors as f64;
    if sectors == 1 {
        return Ok(cfg.prior_support());
    }
    ArcInterval::new(-sigma / 2.0 + next_sector as f64 * width, width)
}

/// Next unscanned subsector of the current level: a prefix of the support of
/// width `level_width / M`.
pub fn next_beam_iterative(
    division: usize,
    level_width: f64,
    b: &BeliefState,
    cfg: &FrameConfig,
) -> Result<ArcInterval> {
    if b.slot() >= cfg.sensing() {
        return Err(Error::SensingExhausted {
            slot: b.slot(),
            budget: cfg.sensing(),
        });
    }
    ArcInterval::new(b.support().start(), level_width / division as f64)
}

/// Data beam at the end of sensing: the (contiguous) support.
pub fn final_beam(b: &BeliefState) -> ArcInterval {
    *b.support()
}

/// A policy driving one episode: alternate [`next_beam`](Self::next_beam)
/// and [`observe`](Self::observe) until `next_beam` returns `None`.
#[derive(Debug, Clone)]
pub struct SearchSession {
    spec: PolicySpec,
    cfg: FrameConfig,
    belief: BeliefState,
    state: PolicyState,
    detected: bool,
}

impl SearchSession {
    pub fn new(spec: PolicySpec, cfg: FrameConfig) -> Result<Self> {
        spec.validate(&cfg)?;
        Ok(Self {
            spec,
            cfg,
            belief: initial_belief(&cfg),
            state: PolicyState::initial(&spec, &cfg),
            detected: false,
        })
    }

    pub fn spec(&self) -> &PolicySpec {
        &self.spec
    }

    pub fn belief(&self) -> &BeliefState {
        &self.belief
    }

    pub fn state(&self) -> &PolicyState {
        &self.state
    }

    /// Number of beacon slots spent so far. A saturated iterative search
    /// idles through the rest of its budget, so it reports all of it.
    pub fn slots_used(&self) -> usize {
        if self.is_saturated() {
            self.cfg.sensing()
        } else {
            self.belief.slot()
        }
    }

    /// Iterative search stops refining once the next subsector would be
    /// narrower than [`MIN_BEAM_WIDTH`].
    pub fn is_saturated(&self) -> bool {
        match (self.spec, self.state) {
            (PolicySpec::Iterative { division }, PolicyState::Iterative { level_width, .. }) => {
                level_width / (division as f64) < MIN_BEAM_WIDTH
            }
            _ => false,
        }
    }

    pub fn is_done(&self) -> bool {
        match (self.spec, self.state) {
            (PolicySpec::Exhaustive { sectors }, PolicyState::Exhaustive { next_sector }) => {
                self.detected || next_sector >= sectors
            }
            _ => self.belief.slot() >= self.cfg.sensing() || self.is_saturated(),
        }
    }

    /// Beam for the next beacon slot, or `None` once sensing is over.
    pub fn next_beam(&self) -> Result<Option<ArcInterval>> {
        if self.is_done() {
            return Ok(None);
        }
        let beam = match (self.spec, self.state) {
            (PolicySpec::Bisection, _) => next_beam_bisection(&self.belief, &self.cfg)?,
            (PolicySpec::Exhaustive { sectors }, PolicyState::Exhaustive { next_sector }) => {
                next_beam_exhaustive(sectors, next_sector, &self.cfg)?
            }
            (PolicySpec::Iterative { division }, PolicyState::Iterative { level_width, .. }) => {
                next_beam_iterative(division, level_width, &self.belief, &self.cfg)?
            }
            _ => unreachable!("policy state does not match spec"),
        };
        if beam.width() < MIN_BEAM_WIDTH {
            return Err(Error::BelowResolution {
                width: beam.width(),
                min: MIN_BEAM_WIDTH,
            });
        }
        Ok(Some(beam))
    }

    /// Applies the MU's response to `beam` (which must be the beam returned
    /// by the last call to `next_beam`).
    pub fn observe(&mut self, beam: &ArcInterval, obs: Observation) -> Result<()> {
        if self.is_done() {
            return Err(Error::SensingExhausted {
                slot: self.belief.slot(),
                budget: self.cfg.sensing(),
            });
        }
        self.belief = update_belief(&self.belief, beam, obs)?;
        match (self.spec, &mut self.state) {
            (PolicySpec::Bisection, _) => {}
            (PolicySpec::Exhaustive { .. }, PolicyState::Exhaustive { next_sector }) => {
                *next_sector += 1;
                self.detected = obs.ack;
            }
            (
                PolicySpec::Iterative { division },
                PolicyState::Iterative {
                    level,
                    probes,
                    level_width,
                },
            ) => {
                *probes += 1;
                // An ACK pins the subsector; M − 1 timeouts leave only the
                // last one. Either way the support is the next level's sector.
                if obs.ack || *probes == division - 1 {
                    *level += 1;
                    *probes = 0;
                    *level_width = self.belief.support().width();
                }
            }
            _ => unreachable!("policy state does not match spec"),
        }
        Ok(())
    }

    pub fn final_beam(&self) -> ArcInterval {
        final_beam(&self.belief)
    }
}
