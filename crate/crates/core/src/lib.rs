//! Throughput-optimal beam alignment for a sectored mm-wave link.
//!
//! A base station learns the angle of a mobile user by sending `L` beacons,
//! each on a chosen arc, and hearing an ACK whenever the user is inside the
//! arc. The remaining `N − L` slots of the frame carry data on a single beam.
//! The posterior support of the angle is a sufficient statistic, bisecting it
//! is optimal, and the optimal `L` follows from a strictly log-concave
//! closed form. This crate implements that model end to end:
//!
//! * [`geometry`]: arcs on the circle and their set operations.
//! * [`mdp`]: frame/channel configuration, belief support recursion, reward,
//!   and a grid Bayes filter for cross-checking the recursion.
//! * [`policies`]: bisection, exhaustive and iterative search.
//! * [`analytics`]: closed-form/enumerated throughput and optimization of `L`.
//! * [`simulator`]: seeded, thread-count-independent Monte Carlo.

pub mod analytics;
pub mod error;
pub mod geometry;
pub mod mdp;
pub mod policies;
pub mod simulator;

pub use error::{Error, Result};
pub use geometry::ArcInterval;
pub use mdp::{BeliefState, ChannelParams, FrameConfig, GridDensity, Observation};
pub use policies::{PolicySpec, SearchSession};
pub use simulator::{run_episode, run_monte_carlo, EpisodeResult, McSummary};
