//! Joint user power allocation and relay beamforming for two-way
//! multi-relay networks.
//!
//! Each of `2K` single-antenna users talks to a partner through `M`
//! amplify-and-forward relays with `N_R` antennas each.  The library
//! maximizes either the worst pair's exchange throughput or the network
//! energy efficiency under per-user, sum-user, per-relay and sum-relay
//! power caps, by solving a sequence of second-order cone programs that
//! lower-bound the true objectives and touch them at the current iterate.
//!
//! Layering, bottom up:
//!
//! - [`scalar`], [`linalg`]: generic real scalar and small complex
//!   matrix/vector helpers.
//! - [`model`]: network data, exact SINR/throughput/power/efficiency
//!   formulas, feasibility checks, and the one-way embedding.
//! - [`lift`]: change of variables that makes the caps convex and the
//!   rates amenable to concave minorants.
//! - [`surrogate`]: the minorants themselves plus the throughput-floor
//!   cuts, all certified tight at the expansion point.
//! - [`subproblem`], [`socp`]: assembly of one inner convex program and
//!   its cone-solver backend.
//! - [`solve`]: outer loops (fair throughput, floor-constrained
//!   efficiency and sum throughput, one-way and equal-power baselines).
//! - [`bench`]: Monte-Carlo sweeps and CSV reporting.
//! - [`oracle`]: brute-force and sampling checks used by the test suite.
//!
//! Everything is generic over the scalar type; the [`f64`]-specialized
//! aliases below are the intended entry point for most callers.

pub mod bench;
pub mod lift;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod scalar;
pub mod socp;
pub mod solve;
pub mod subproblem;
pub mod surrogate;

pub use model::{Beamformers, ChannelSet, Dimensions, PowerAlloc, ScenarioParams};
pub use solve::{AlgorithmSettings, RunTrace};
pub use subproblem::ObjectiveKind;

// --- Concrete-scalar aliases ------------------------------------------------

/// Double-precision network channels.
pub type ChannelSet64 = model::ChannelSet<f64>;
/// Double-precision scenario parameters.
pub type ScenarioParams64 = model::ScenarioParams<f64>;
/// Double-precision solver settings.
pub type AlgorithmSettings64 = solve::AlgorithmSettings<f64>;
/// Double-precision run trace.
pub type RunTrace64 = solve::RunTrace<f64>;

/// Single-precision network channels.
pub type ChannelSet32 = model::ChannelSet<f32>;
/// Single-precision scenario parameters.
pub type ScenarioParams32 = model::ScenarioParams<f32>;
/// Single-precision solver settings.
pub type AlgorithmSettings32 = solve::AlgorithmSettings<f32>;
/// Single-precision run trace.
pub type RunTrace32 = solve::RunTrace<f32>;
