//! Closed-form and exactly-enumerated throughput of the three policies, and
//! the choice of sensing duration.
//!
//! All throughputs are average bits per slot over one frame. A frame with no
//! data slots (`L = N`) has zero throughput.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::mdp::{gamma_for_data_slots, ChannelParams, FrameConfig};
use crate::policies::PolicySpec;

/// Iterative refinement stops once the next subsector would be narrower
/// than this; the search then keeps its current sector. Matches the policy's
/// own saturation rule.
pub const ITERATIVE_WIDTH_CAP: f64 = crate::policies::MIN_BEAM_WIDTH;

/// Bracket tolerance of the golden-section search over continuous `L`.
pub const GOLDEN_TOL: f64 = 1e-8;

/// How long a policy senses: fixed `L`, or exhaustive search with `K`
/// sectors and random duration of mean `(K + 1) / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SensingDuration {
    Fixed(usize),
    Exhaustive { sectors: usize, mean: f64 },
}

impl SensingDuration {
    pub fn exhaustive(sectors: usize) -> Self {
        SensingDuration::Exhaustive {
            sectors,
            mean: mean_exhaustive_duration(sectors),
        }
    }

    /// `L`, or the mean duration `L̂` for exhaustive search.
    pub fn slots(&self) -> f64 {
        match *self {
            SensingDuration::Fixed(l) => l as f64,
            SensingDuration::Exhaustive { mean, .. } => mean,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThroughputPoint {
    pub policy: PolicySpec,
    pub duration: SensingDuration,
    pub throughput: f64,
}

/// `L̂ = 1 + E[J] = (K + 1) / 2`.
pub fn mean_exhaustive_duration(sectors: usize) -> f64 {
    (sectors as f64 + 1.0) / 2.0
}

fn log_term(data_slots: usize, frame_len: usize, numerator: f64) -> f64 {
    let fraction = data_slots as f64 / frame_len as f64;
    fraction * (1.0 + numerator).log2()
}

/// Upper bound on the value function at slot `k` for a compact support of
/// measure `support`: `((N−L)/N)·log₂(1 + 2^(L−k)·γ_L/|U_k|)`.
pub fn value_upper_bound(
    support: f64,
    slot: usize,
    cfg: &FrameConfig,
    cp: &ChannelParams,
) -> Result<f64> {
    if slot > cfg.sensing() {
        return Err(crate::Error::SensingExhausted {
            slot,
            budget: cfg.sensing(),
        });
    }
    if !(support > 0.0) {
        return Err(crate::Error::InvalidArc(format!(
            "support measure {support} must be > 0"
        )));
    }
    if cfg.data_slots() == 0 {
        return Ok(0.0);
    }
    let gamma = gamma_for_data_slots(cp, cfg.frame_len(), cfg.data_slots())?;
    let gain = 2f64.powi((cfg.sensing() - slot) as i32);
    Ok(log_term(
        cfg.data_slots(),
        cfg.frame_len(),
        gain * gamma / support,
    ))
}

/// Maximum expected throughput with `L = cfg.sensing()` sensing slots,
/// attained by bisection: `((N−L)/N)·log₂(1 + N·2^L·γ₀/(σ(N−L)))`.
pub fn optimal_throughput(cfg: &FrameConfig, cp: &ChannelParams) -> f64 {
    let (n, l) = (cfg.frame_len(), cfg.sensing());
    if l >= n {
        return 0.0;
    }
    // N·2^L·γ₀/(σ(N−L)) evaluated as γ_L·2^L/σ; scaling by 2^L is exact.
    let gamma = gamma_for_data_slots(cp, n, n - l).expect("data slots > 0");
    let x = gamma * 2f64.powi(l as i32) / cfg.sigma();
    log_term(n - l, n, x)
}

/// Natural log of [`optimal_throughput`] extended to real `L ∈ [0, N)`.
pub fn ln_optimal_throughput_continuous(
    sensing: f64,
    cfg: &FrameConfig,
    cp: &ChannelParams,
) -> f64 {
    let n = cfg.frame_len() as f64;
    if sensing >= n {
        return f64::NEG_INFINITY;
    }
    let d = n - sensing;
    let x = n * sensing.exp2() * cp.gamma0() / (cfg.sigma() * d);
    (d / n).ln() + x.ln_1p().ln() - std::f64::consts::LN_2.ln()
}

/// Exact expected throughput of exhaustive search with `K` sectors: the MU
/// is found in slot `J ~ Uniform{0..K−1}`, after which the remaining
/// `N − J − 1` slots carry data on the width-`σ/K` sector.
pub fn exhaustive_expected_throughput(
    sectors: usize,
    cfg: &FrameConfig,
    cp: &ChannelParams,
) -> f64 {
    let n = cfg.frame_len();
    let k = sectors as f64;
    // Same evaluation order as a simulated frame, γ_data / beam width, so
    // the deterministic K = 1 case agrees to the last bit.
    let width = cfg.sigma() / k;
    let total: f64 = (0..sectors)
        .filter(|&j| j + 1 < n)
        .map(|j| {
            let d = n - j - 1;
            let gamma = gamma_for_data_slots(cp, n, d).expect("data slots > 0");
            log_term(d, n, gamma / width)
        })
        .sum();
    total / k
}

/// Bound on exhaustive throughput in terms of `⌊L̂⌋`:
/// `((N−⌊L̂⌋)/N)·log₂(1 + 2N⌊L̂⌋γ₀/((N−⌊L̂⌋)σ))`.
pub fn exhaustive_upper_bound(sectors: usize, cfg: &FrameConfig, cp: &ChannelParams) -> f64 {
    let n = cfg.frame_len();
    let l = mean_exhaustive_duration(sectors).floor() as usize;
    if l >= n {
        return 0.0;
    }
    let d = (n - l) as f64;
    let x = n as f64 * 2.0 * l as f64 * cp.gamma0() / (d * cfg.sigma());
    log_term(n - l, n, x)
}

/// Exact expected throughput of iterative search with division factor `M`
/// and `L = cfg.sensing()` slots, by enumerating the policy's state machine.
///
/// At each level the MU sits in one of the `M` subsectors with equal
/// probability. Probing subsector `j` costs one slot; after `M − 1` timeouts
/// the last subsector is known for free. If the budget runs out after `p`
/// failed probes, the data beam spans the `M − p` unscanned subsectors.
pub fn iterative_expected_throughput(
    division: usize,
    cfg: &FrameConfig,
    cp: &ChannelParams,
) -> f64 {
    let (n, l) = (cfg.frame_len(), cfg.sensing());
    if l >= n {
        return 0.0;
    }
    let gamma = gamma_for_data_slots(cp, n, n - l).expect("data slots > 0");
    let mut walk = IterativeWalk {
        division,
        sigma: cfg.sigma(),
        gamma,
        memo: vec![None; (l + 1) * (l + 2)],
        stride: l + 1,
    };
    cfg.data_fraction() * walk.expected_log(0, l)
}

struct IterativeWalk {
    division: usize,
    sigma: f64,
    gamma: f64,
    /// Indexed by `level * stride + budget`.
    memo: Vec<Option<f64>>,
    stride: usize,
}

impl IterativeWalk {
    fn log_rate(&self, width: f64) -> f64 {
        (1.0 + self.gamma / width).log2()
    }

    /// E[log₂(1 + γ/W)] starting at `depth` levels down with `budget` slots.
    /// Each level consumes at least one slot, so `depth <= L`.
    fn expected_log(&mut self, depth: usize, budget: usize) -> f64 {
        let idx = depth * self.stride + budget;
        if let Some(v) = self.memo[idx] {
            return v;
        }
        let m = self.division;
        let width = self.sigma / (m as f64).powi(depth as i32);
        let value = if budget == 0 || width / (m as f64) < ITERATIVE_WIDTH_CAP {
            self.log_rate(width)
        } else {
            let sub = width / m as f64;
            let p = 1.0 / m as f64;
            let mut acc = 0.0;
            let mut used = 0;
            let mut exhausted = false;
            for j in 0..m - 1 {
                if used == budget {
                    let remaining = (m - j) as f64;
                    acc += remaining * p * self.log_rate(remaining * sub);
                    exhausted = true;
                    break;
                }
                used += 1;
                acc += p * self.expected_log(depth + 1, budget - used);
            }
            if !exhausted {
                acc += p * self.expected_log(depth + 1, budget - used);
            }
            acc
        };
        self.memo[idx] = Some(value);
        value
    }
}

/// Golden-section search for the maximizer of a unimodal `f` on `[lo, hi]`.
pub fn golden_section_max(mut lo: f64, mut hi: f64, tol: f64, f: impl Fn(f64) -> f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        }
    }
    (lo + hi) / 2.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensingOptimum {
    /// Continuous maximizer `L̂` of `ln V₀*(σ, L)`.
    pub continuous: f64,
    /// Best integer `L*`, chosen between `⌊L̂⌋` and `⌈L̂⌉`.
    pub sensing: usize,
    pub throughput: f64,
}

/// Optimal sensing duration for bisection. `ln V₀*` is strictly concave in
/// `L`, so a golden-section search over `[0, N]` followed by comparing the
/// two neighbouring integers gives the discrete optimum.
pub fn optimize_sensing_duration(cfg: &FrameConfig, cp: &ChannelParams) -> SensingOptimum {
    let n = cfg.frame_len();
    let continuous = golden_section_max(0.0, n as f64, GOLDEN_TOL, |l| {
        ln_optimal_throughput_continuous(l, cfg, cp)
    });
    let at = |l: usize| optimal_throughput(&cfg.with_sensing(l).expect("l <= N"), cp);
    let floor = (continuous.floor() as usize).min(n);
    let ceil = (continuous.ceil() as usize).min(n);
    let (sensing, throughput) = [floor, ceil].into_iter().map(|l| (l, at(l))).fold(
        (floor, f64::NEG_INFINITY),
        |best, cur| if cur.1 > best.1 { cur } else { best },
    );
    SensingOptimum {
        continuous,
        sensing,
        throughput,
    }
}

/// Expected throughput of `policy` at every sensing duration it supports:
/// `L ∈ {0..N}` for bisection and iterative, `K ∈ {1..N}` for exhaustive.
pub fn throughput_curve(
    policy: &PolicySpec,
    cfg: &FrameConfig,
    cp: &ChannelParams,
) -> Result<Vec<ThroughputPoint>> {
    policy.validate(cfg)?;
    let n = cfg.frame_len();
    let points = match *policy {
        PolicySpec::Bisection => (0..=n)
            .map(|l| ThroughputPoint {
                policy: *policy,
                duration: SensingDuration::Fixed(l),
                throughput: optimal_throughput(&cfg.with_sensing(l).expect("l <= N"), cp),
            })
            .collect(),
        PolicySpec::Iterative { division } => (0..=n)
            .map(|l| ThroughputPoint {
                policy: *policy,
                duration: SensingDuration::Fixed(l),
                throughput: iterative_expected_throughput(
                    division,
                    &cfg.with_sensing(l).expect("l <= N"),
                    cp,
                ),
            })
            .collect(),
        PolicySpec::Exhaustive { .. } => (1..=n)
            .map(|k| ThroughputPoint {
                policy: PolicySpec::Exhaustive { sectors: k },
                duration: SensingDuration::exhaustive(k),
                throughput: exhaustive_expected_throughput(k, cfg, cp),
            })
            .collect(),
    };
    Ok(points)
}

/// Peak expected throughput over the policy's sensing-duration parameter.
/// For exhaustive search the `sectors` field of `policy` is ignored and `K`
/// is optimized.
pub fn peak_throughput(
    policy: &PolicySpec,
    cfg: &FrameConfig,
    cp: &ChannelParams,
) -> Result<ThroughputPoint> {
    if let PolicySpec::Bisection = policy {
        let opt = optimize_sensing_duration(cfg, cp);
        return Ok(ThroughputPoint {
            policy: *policy,
            duration: SensingDuration::Fixed(opt.sensing),
            throughput: opt.throughput,
        });
    }
    let probe = match policy {
        PolicySpec::Exhaustive { .. } => PolicySpec::Exhaustive { sectors: 1 },
        other => *other,
    };
    let curve = throughput_curve(&probe, cfg, cp)?;
    Ok(curve
        .into_iter()
        .fold(None::<ThroughputPoint>, |best, p| match best {
            Some(b) if b.throughput >= p.throughput => Some(b),
            _ => Some(p),
        })
        .expect("curve is non-empty"))
}

/// Percent by which `peak` falls short of `reference`.
pub fn degradation_percent(peak: f64, reference: f64) -> f64 {
    100.0 * (1.0 - peak / reference)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn paper() -> (FrameConfig, ChannelParams) {
        (
            FrameConfig::new(50, 0, TAU).unwrap(),
            ChannelParams::from_db(-5.0).unwrap(),
        )
    }

    fn at(cfg: &FrameConfig, l: usize) -> FrameConfig {
        cfg.with_sensing(l).unwrap()
    }

    // Reference values below were evaluated independently at 30 digits
    // (mpmath).

    #[test]
    fn optimal_throughput_examples() {
        let (cfg, cp) = paper();
        assert!((optimal_throughput(&at(&cfg, 0), &cp) - 0.07084159287128425).abs() < 1e-13);
        assert!((optimal_throughput(&at(&cfg, 10), &cp) - 4.825352432266662).abs() < 1e-12);
        assert_eq!(optimal_throughput(&at(&cfg, 50), &cp), 0.0);
    }

    #[test]
    fn value_bound_examples() {
        let (cfg, cp) = paper();
        let cfg = at(&cfg, 6);
        let gamma = crate::mdp::gamma_l(&cp, &cfg).unwrap();
        let u = 0.3;
        let terminal = value_upper_bound(u, 6, &cfg, &cp).unwrap();
        assert!((terminal - cfg.data_fraction() * (1.0 + gamma / u).log2()).abs() < 1e-14);
        let start = value_upper_bound(cfg.sigma(), 0, &cfg, &cp).unwrap();
        assert!((start - optimal_throughput(&cfg, &cp)).abs() < 1e-13);
        let halved = value_upper_bound(u / 2.0, 4, &cfg, &cp).unwrap();
        let stepped = value_upper_bound(u, 3, &cfg, &cp).unwrap();
        assert!((halved - stepped).abs() < 1e-14);
        assert!(value_upper_bound(u, 7, &cfg, &cp).is_err());
        assert!(value_upper_bound(0.0, 2, &cfg, &cp).is_err());
        assert_eq!(value_upper_bound(u, 0, &at(&cfg, 50), &cp).unwrap(), 0.0);
    }

    #[test]
    fn exhaustive_examples() {
        let (cfg, cp) = paper();
        let n = 50.0;
        let k1 = (n - 1.0) / n * (1.0 + n * cp.gamma0() / ((n - 1.0) * TAU)).log2();
        assert!((exhaustive_expected_throughput(1, &cfg, &cp) - k1).abs() < 1e-14);
        assert!((exhaustive_expected_throughput(5, &cfg, &cp) - 0.32166233556250945).abs() < 1e-13);
        assert!((exhaustive_upper_bound(50, &cfg, &cp) - 1.2964283704929032).abs() < 1e-12);
        let b1 = (n - 1.0) / n * (1.0 + n * 2.0 * cp.gamma0() / ((n - 1.0) * TAU)).log2();
        assert!((exhaustive_upper_bound(1, &cfg, &cp) - b1).abs() < 1e-14);
        for k in 1..=50 {
            assert!(
                exhaustive_expected_throughput(k, &cfg, &cp) < exhaustive_upper_bound(k, &cfg, &cp)
            );
        }
    }

    #[test]
    fn exhaustive_bound_below_bisection_beyond_two_slots() {
        let (cfg, cp) = paper();
        for k in 5..=50 {
            let l = mean_exhaustive_duration(k).floor() as usize;
            assert!(l >= 3);
            assert!(exhaustive_upper_bound(k, &cfg, &cp) < optimal_throughput(&at(&cfg, l), &cp));
        }
    }

    #[test]
    fn iterative_two_equals_bisection() {
        let (cfg, cp) = paper();
        for l in 0..=50 {
            let c = at(&cfg, l);
            let a = iterative_expected_throughput(2, &c, &cp);
            let b = optimal_throughput(&c, &cp);
            assert!((a - b).abs() <= 1e-12 * b.max(1.0), "L={l}: {a} vs {b}");
        }
        assert_eq!(
            iterative_expected_throughput(4, &at(&cfg, 0), &cp),
            optimal_throughput(&at(&cfg, 0), &cp)
        );
    }

    /// Hand enumeration for M = 4, L = 3, σ = 2π.
    #[test]
    fn iterative_four_three_distribution() {
        let (cfg, cp) = paper();
        let cfg = at(&cfg, 3);
        let g = crate::mdp::gamma_l(&cp, &cfg).unwrap();
        let s = TAU;
        let r = |w: f64| (1.0 + g / w).log2();
        // Level 1 probe 0 ack (1/4): two slots left at level 2.
        //   ack at probe 0 (1/4): one slot at level 3 → 1/4 each of s/64,
        //     3/4 remaining 3·s/64.
        //   ack at probe 1 (1/4): 0 slots → s/16.
        //   else (1/2): budget out after 2 timeouts → 2·s/16.
        let after_one = 0.25 * (0.25 * r(s / 64.0) + 0.75 * r(3.0 * s / 64.0))
            + 0.25 * r(s / 16.0)
            + 0.5 * r(2.0 * s / 16.0);
        // Level 1 probe 1 ack (1/4): one slot at level 2.
        let after_two = 0.25 * r(s / 16.0) + 0.75 * r(3.0 * s / 16.0);
        // Probe 2 ack or inferred last quarter (1/2): no slots left.
        let expect = cfg.data_fraction() * (0.25 * after_one + 0.25 * after_two + 0.5 * r(s / 4.0));
        let got = iterative_expected_throughput(4, &cfg, &cp);
        assert!((got - expect).abs() < 1e-13, "{got} vs {expect}");
    }

    #[test]
    fn golden_section_finds_parabola_peak() {
        let x = golden_section_max(0.0, 10.0, 1e-10, |x| -(x - 3.3).powi(2));
        assert!((x - 3.3).abs() < 1e-8);
    }

    #[test]
    fn optimize_paper_scenario() {
        let (cfg, cp) = paper();
        let opt = optimize_sensing_duration(&cfg, &cp);
        let scan = (0..=50)
            .map(|l| (l, optimal_throughput(&at(&cfg, l), &cp)))
            .fold((0, f64::MIN), |a, b| if b.1 > a.1 { b } else { a });
        assert_eq!(opt.sensing, scan.0);
        assert_eq!(opt.sensing, 27);
        assert!((opt.throughput - 10.951603711320644).abs() < 1e-11);
    }

    #[test]
    fn optimize_huge_snr_senses_little() {
        // V ≈ (1 − L/N)(L + log₂γ₀ + c), so sensing stops paying off only
        // once log₂γ₀ exceeds roughly N.
        let cfg = FrameConfig::new(50, 0, TAU).unwrap();
        let cp = ChannelParams::new(1e20).unwrap();
        let opt = optimize_sensing_duration(&cfg, &cp);
        assert!(opt.sensing <= 1, "{opt:?}");
        let scan = (0..=50)
            .map(|l| (l, optimal_throughput(&at(&cfg, l), &cp)))
            .fold((0, f64::MIN), |a, b| if b.1 > a.1 { b } else { a });
        assert_eq!(opt.sensing, scan.0);
    }

    #[test]
    fn optimize_moderately_high_snr_matches_scan() {
        let cfg = FrameConfig::new(50, 0, TAU).unwrap();
        let cp = ChannelParams::new(1e6).unwrap();
        let opt = optimize_sensing_duration(&cfg, &cp);
        let scan = (0..=50)
            .map(|l| (l, optimal_throughput(&at(&cfg, l), &cp)))
            .fold((0, f64::MIN), |a, b| if b.1 > a.1 { b } else { a });
        assert_eq!(opt.sensing, scan.0);
        assert_eq!(opt.sensing, 17);
    }

    #[test]
    fn optimize_single_slot_frame() {
        let cfg = FrameConfig::new(1, 0, TAU).unwrap();
        let cp = ChannelParams::from_db(-5.0).unwrap();
        let opt = optimize_sensing_duration(&cfg, &cp);
        assert_eq!(opt.sensing, 0);
        assert!(opt.throughput > 0.0);
    }

    #[test]
    fn paper_degradations() {
        let (cfg, cp) = paper();
        let bis = peak_throughput(&PolicySpec::Bisection, &cfg, &cp)
            .unwrap()
            .throughput;
        let it4 = peak_throughput(&PolicySpec::Iterative { division: 4 }, &cfg, &cp).unwrap();
        let it8 = peak_throughput(&PolicySpec::Iterative { division: 8 }, &cfg, &cp).unwrap();
        let ex = peak_throughput(&PolicySpec::Exhaustive { sectors: 1 }, &cfg, &cp).unwrap();
        assert!((degradation_percent(it4.throughput, bis) - 12.8).abs() < 1.5);
        assert!((degradation_percent(it8.throughput, bis) - 36.4).abs() < 1.5);
        assert!((degradation_percent(ex.throughput, bis) - 88.3).abs() < 1.5);
        assert_eq!(ex.policy, PolicySpec::Exhaustive { sectors: 42 });
    }
}
