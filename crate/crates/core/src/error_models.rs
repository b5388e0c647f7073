//! Closed-form error predictions for every estimate channel.
//!
//! Evaluated from ground truth and the clock parameters (never from
//! measurements), these are the analytic baselines the simulated estimator
//! errors are verified against:
//!
//! - raw ToF:  `(e_a * r_a - e_b * d_b) / 2`
//! - ToF corrected in `A`'s (`B`'s) clock: `e_a * tof` (`e_b * tof`)
//! - raw TDoA: `(tof - tof_raw_analytic) + e_a * r_a - e_t * m_a`
//! - TDoA corrected in `A`'s clock: `e_a * td`
//! - TDoA corrected in the listener clock: `e_t * td` (the listener-clock
//!   analogue of the `A`-clock result; same derivation with the roles
//!   swapped)
//!
//! Each entry is evaluated in exact rational arithmetic and rounded once,
//! so predictions can legitimately round to zero at tick resolution.

use crate::geometry::GroundTruth;
use crate::protocol::{ExchangeClocks, ProtocolTiming};
use crate::ratio::Ratio;
use crate::timebase::TickDuration;

/// Predicted signed error per estimate channel, in ticks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ErrorPrediction {
    pub raw_tof_err: TickDuration,
    pub dc_a_tof_err: TickDuration,
    pub dc_b_tof_err: TickDuration,
    pub raw_tdoa_err: TickDuration,
    pub dc_a_tdoa_err: TickDuration,
    pub dc_t_tdoa_err: TickDuration,
}

impl ErrorPrediction {
    pub const CHANNELS: [&'static str; 6] = [
        "raw_tof",
        "dc_a_tof",
        "dc_b_tof",
        "raw_td",
        "dc_a_td",
        "dc_t_td",
    ];

    pub fn as_array(&self) -> [TickDuration; 6] {
        [
            self.raw_tof_err,
            self.dc_a_tof_err,
            self.dc_b_tof_err,
            self.raw_tdoa_err,
            self.dc_a_tdoa_err,
            self.dc_t_tdoa_err,
        ]
    }
}

/// Evaluates all six predictions for one exchange configuration.
pub fn predict(
    truth: &GroundTruth,
    timing: &ProtocolTiming,
    clocks: &ExchangeClocks,
) -> ErrorPrediction {
    let e_a = clocks.a.drift().clone();
    let e_b = clocks.b.drift().clone();
    let e_t = clocks.t.drift().clone();
    let two = Ratio::from_int(2);

    let r_a = (truth.tof_ab * 2 + timing.delay_b).to_ratio();
    let d_b = timing.delay_b.to_ratio();
    let m_a = ((truth.tof_ab - truth.tof_at) + timing.delay_b + truth.tof_bt).to_ratio();

    let raw_tof = (e_a.clone() * r_a.clone() - e_b.clone() * d_b.clone()) / two.clone();
    // The raw TDoA inherits the (negated) raw ToF error on top of the
    // drift terms of the round time and the listener gap.
    let raw_tdoa = (e_a.clone() * r_a.clone() + e_b * d_b) / two - e_t.clone() * m_a;

    let round = |r: Ratio| TickDuration::from_fs(r.round_to_i128());
    ErrorPrediction {
        raw_tof_err: round(raw_tof),
        dc_a_tof_err: round(e_a.clone() * truth.tof_ab.to_ratio()),
        dc_b_tof_err: round(clocks.b.drift().clone() * truth.tof_ab.to_ratio()),
        raw_tdoa_err: round(raw_tdoa),
        dc_a_tdoa_err: round(e_a * truth.td.to_ratio()),
        dc_t_tdoa_err: round(e_t * truth.td.to_ratio()),
    }
}
