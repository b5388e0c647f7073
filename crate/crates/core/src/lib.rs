//! Deterministic simulation and estimation of UWB-style Two-Way Ranging
//! under clock drift.
//!
//! The crate models one SS-TWR or DS-TWR exchange between two active nodes
//! `A` and `B` overheard by a passive listener `T`, on an exact integer
//! femtosecond timebase. From the locally measured (drifted) intervals it
//! computes:
//!
//! - raw and drift-corrected time-of-flight estimates,
//! - raw and drift-corrected time-difference-on-arrival (TDoA) estimates
//!   for the listener,
//! - closed-form analytic error predictions for all six estimate channels,
//!   used to verify the simulated estimator error,
//! - hyperbolic position fixes from sets of TDoA measurements.
//!
//! All interval arithmetic is integer femtoseconds and all ratio arithmetic
//! is exact rational, so the picosecond-scale quantities the estimators
//! recover are not washed out by floating-point cancellation. Everything is
//! a pure function of its inputs plus an explicit RNG seed.

pub mod error_models;
pub mod estimators;
pub mod geometry;
pub mod localization;
pub mod protocol;
pub mod ratio;
pub mod runner;
pub mod scenario;
pub mod selftest;
pub mod timebase;

pub use error_models::{predict, ErrorPrediction};
pub use estimators::{
    drift_ratio_alt_ds, estimate, listener_ratio_ds, tdoa_dc_a, tdoa_dc_t, tdoa_raw, tof_dc_a,
    tof_dc_b, tof_raw, EstimateSet, EstimatorError, RatioSource, TdoaEstimates, TofEstimates,
};
pub use geometry::{ground_truth, tof_between, GeometryError, GroundTruth, Position};
pub use localization::{
    infer_tof, residual_rms, solve, LocalizationError, PositionFix, SolverConfig, TdoaMeasurement,
};
pub use protocol::{
    run_exchange, run_exchange_from_truth, timeline_oracle, timeline_oracle_from_truth,
    ExchangeClocks, ExchangeRecord, NoiseModel, NoiseSpec, OracleExchange, ProtocolError,
    ProtocolTiming, TrueIntervals, Variant,
};
pub use ratio::Ratio;
pub use runner::{run_scenario, OutputFormat, RunOptions, RunSummary};
pub use scenario::{load_scenario, Scenario, ScenarioError};
pub use selftest::{selftest, SelftestReport};
pub use timebase::{ClockModel, TickDuration, TickInstant, TimebaseError};
