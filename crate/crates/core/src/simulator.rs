//! Seeded Monte Carlo over whole frames.
//!
//! Each episode draws the MU angle uniformly on the prior support, runs the
//! policy with noiseless ACKs and scores the frame. Episode `i` draws from
//! ChaCha8 stream `i` of the run seed, and results are reduced in episode
//! order with a fixed pairwise summation, so summaries are bit-identical for
//! any thread count.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::ArcInterval;
use crate::mdp::{gamma_for_data_slots, ChannelParams, FrameConfig, Observation};
use crate::policies::{PolicySpec, SearchSession};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeResult {
    pub theta: f64,
    pub sensing_slots_used: usize,
    pub final_beam: ArcInterval,
    pub covered: bool,
    pub realized_throughput: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McSummary {
    pub episodes: u64,
    pub mean: f64,
    pub std_error: f64,
    /// Episode counts indexed by sensing slots used (`0..=N`). For exhaustive
    /// search, index `J + 1` counts detections in slot `J`.
    pub sensing_histogram: Vec<u64>,
}

/// Throughput of one frame: `l` beacon slots, then data on `beam` at the
/// power that spreads the frame budget over the remaining `N − l` slots.
pub fn realized_throughput(
    cfg: &FrameConfig,
    cp: &ChannelParams,
    sensing_slots: usize,
    beam: &ArcInterval,
    covered: bool,
) -> f64 {
    let n = cfg.frame_len();
    if !covered || sensing_slots >= n {
        return 0.0;
    }
    let gamma = gamma_for_data_slots(cp, n, n - sensing_slots).expect("data slots > 0");
    let fraction = (n - sensing_slots) as f64 / n as f64;
    fraction * (1.0 + gamma / beam.measure()).log2()
}

pub fn run_episode(
    spec: &PolicySpec,
    cfg: &FrameConfig,
    cp: &ChannelParams,
    theta: f64,
) -> Result<EpisodeResult> {
    if !cfg.prior_support().contains(theta) {
        return Err(Error::OutsidePrior { theta });
    }
    let mut session = SearchSession::new(*spec, *cfg)?;
    while let Some(beam) = session.next_beam()? {
        let obs = Observation {
            ack: beam.contains(theta),
        };
        session.observe(&beam, obs)?;
    }
    let final_beam = session.final_beam();
    let covered = final_beam.contains(theta);
    let used = session.slots_used();
    Ok(EpisodeResult {
        theta,
        sensing_slots_used: used,
        final_beam,
        covered,
        realized_throughput: realized_throughput(cfg, cp, used, &final_beam, covered),
    })
}

/// MU angle for episode `index` of a run seeded with `seed`.
pub fn episode_theta(cfg: &FrameConfig, seed: u64, index: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let half = cfg.sigma() / 2.0;
    rng.random_range(-half..half)
}

/// Runs `episodes` frames on the global rayon pool.
pub fn run_monte_carlo(
    spec: &PolicySpec,
    cfg: &FrameConfig,
    cp: &ChannelParams,
    episodes: u64,
    seed: u64,
) -> Result<McSummary> {
    if episodes == 0 {
        return Err(Error::InvalidConfig("episodes must be >= 1".into()));
    }
    spec.validate(cfg)?;
    let results: Vec<(f64, usize)> = (0..episodes)
        .into_par_iter()
        .map(|i| {
            let r = run_episode(spec, cfg, cp, episode_theta(cfg, seed, i))?;
            Ok((r.realized_throughput, r.sensing_slots_used))
        })
        .collect::<Result<_>>()?;
    Ok(summarize(&results, cfg.frame_len()))
}

/// Same as [`run_monte_carlo`] on a dedicated pool of `threads` workers.
pub fn run_monte_carlo_with_threads(
    spec: &PolicySpec,
    cfg: &FrameConfig,
    cp: &ChannelParams,
    episodes: u64,
    seed: u64,
    threads: usize,
) -> Result<McSummary> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    pool.install(|| run_monte_carlo(spec, cfg, cp, episodes, seed))
}

fn summarize(results: &[(f64, usize)], frame_len: usize) -> McSummary {
    let n = results.len();
    let mut sensing_histogram = vec![0u64; frame_len + 1];
    for &(_, used) in results {
        sensing_histogram[used] += 1;
    }
    // Deviations from the first sample: exact zeros when every episode
    // scores the same, and better conditioned than raw sums otherwise.
    let pivot = results[0].0;
    let dev: Vec<f64> = results.iter().map(|&(x, _)| x - pivot).collect();
    let sum = pairwise_sum(&dev);
    let sq: Vec<f64> = dev.iter().map(|d| d * d).collect();
    let sum_sq = pairwise_sum(&sq);
    let mean = pivot + sum / n as f64;
    let std_error = if n > 1 {
        let var = ((sum_sq - sum * sum / n as f64) / (n - 1) as f64).max(0.0);
        (var / n as f64).sqrt()
    } else {
        0.0
    };
    McSummary {
        episodes: n as u64,
        mean,
        std_error,
        sensing_histogram,
    }
}

/// Sum in a fixed binary-tree order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}
