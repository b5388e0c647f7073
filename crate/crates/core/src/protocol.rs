//! Event-timeline simulation of one TWR exchange.
//!
//! One round between active nodes `A` and `B` with a passive listener `T`:
//! `A` polls at `t0`, `B` receives one flight time later and responds after
//! its delay; in the DS variant `A` sends a final message after its own
//! delay, closing the second round. Every node timestamps at the
//! transmit/receive instant itself (zero hardware latency; a constant MAC
//! latency would cancel in all interval equations anyway).
//!
//! Two independent implementations produce the locally measured intervals:
//!
//! - [`run_exchange`] works in interval algebra and applies the clock
//!   measurement map once per interval;
//! - [`timeline_oracle`] places every event as an exact rational instant on
//!   the true timeline, maps each through the owning clock's affine model
//!   (offset applied), differences exactly, and rounds once per interval.
//!
//! Without injected noise the two agree bit-exactly; tests hold them to a
//! two-tick bound.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::geometry::{ground_truth, GroundTruth, Position};
use crate::ratio::Ratio;
use crate::timebase::{ClockModel, TickDuration, TickInstant};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ProtocolError {
    #[error("timing.delay_b must be positive")]
    NonPositiveResponseDelay,
    #[error("timing.delay_a must be positive")]
    NonPositiveFinalDelay,
    #[error("timing.delay_a is required for the DS variant")]
    MissingFinalDelay,
    #[error("timing.delay_a is set but the variant is SS")]
    UnexpectedFinalDelay,
    #[error("noise sigma must be finite and non-negative")]
    InvalidNoise,
    #[error("non-finite noise draw")]
    NonFiniteNoiseDraw,
}

/// Exchange variant: single-sided (two messages) or double-sided (three
/// messages, two interleaved rounds).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    Ss,
    Ds,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Ss => "SS",
            Variant::Ds => "DS",
        }
    }
}

/// True response delays: `delay_b` before `B`'s response, and for DS
/// exchanges `delay_a` before `A`'s final message.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProtocolTiming {
    pub delay_b: TickDuration,
    pub delay_a: Option<TickDuration>,
}

impl ProtocolTiming {
    pub fn single_sided(delay_b: TickDuration) -> Self {
        ProtocolTiming {
            delay_b,
            delay_a: None,
        }
    }

    pub fn double_sided(delay_b: TickDuration, delay_a: TickDuration) -> Self {
        ProtocolTiming {
            delay_b,
            delay_a: Some(delay_a),
        }
    }

    pub fn validate(&self, variant: Variant) -> Result<(), ProtocolError> {
        if self.delay_b <= TickDuration::ZERO {
            return Err(ProtocolError::NonPositiveResponseDelay);
        }
        match (variant, self.delay_a) {
            (Variant::Ds, None) => Err(ProtocolError::MissingFinalDelay),
            (Variant::Ds, Some(d)) if d <= TickDuration::ZERO => {
                Err(ProtocolError::NonPositiveFinalDelay)
            }
            (Variant::Ss, Some(_)) => Err(ProtocolError::UnexpectedFinalDelay),
            _ => Ok(()),
        }
    }
}

/// Additive or multiplicative noise on a measurement channel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NoiseSpec {
    None,
    Gaussian { sigma: f64 },
}

impl Default for NoiseSpec {
    fn default() -> Self {
        NoiseSpec::None
    }
}

impl NoiseSpec {
    pub fn gaussian(sigma: f64) -> Self {
        if sigma == 0.0 {
            NoiseSpec::None
        } else {
            NoiseSpec::Gaussian { sigma }
        }
    }

    pub fn is_none(&self) -> bool {
        matches!(self, NoiseSpec::None)
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        match self {
            NoiseSpec::None => Ok(()),
            NoiseSpec::Gaussian { sigma } if sigma.is_finite() && *sigma >= 0.0 => Ok(()),
            _ => Err(ProtocolError::InvalidNoise),
        }
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64, ProtocolError> {
        match self {
            NoiseSpec::None => Ok(0.0),
            NoiseSpec::Gaussian { sigma } => {
                let normal =
                    Normal::new(0.0, *sigma).map_err(|_| ProtocolError::InvalidNoise)?;
                let value = normal.sample(rng);
                if value.is_finite() {
                    Ok(value)
                } else {
                    Err(ProtocolError::NonFiniteNoiseDraw)
                }
            }
        }
    }
}

/// Noise model of one exchange: multiplicative noise on the CFO-derived
/// drift ratios and additive noise (in fs) on each receive timestamp.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NoiseModel {
    pub cfo: NoiseSpec,
    pub rx_timestamp: NoiseSpec,
}

impl NoiseModel {
    pub fn none() -> Self {
        NoiseModel::default()
    }

    pub fn is_none(&self) -> bool {
        self.cfo.is_none() && self.rx_timestamp.is_none()
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        self.cfo.validate()?;
        self.rx_timestamp.validate()
    }
}

/// The three oscillators taking part in one exchange.
#[derive(Clone, Debug, PartialEq)]
pub struct ExchangeClocks {
    pub a: ClockModel,
    pub b: ClockModel,
    pub t: ClockModel,
}

/// True (reference-timeline) intervals of one exchange.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrueIntervals {
    pub r_a: TickDuration,
    pub d_b: TickDuration,
    pub d_a: Option<TickDuration>,
    pub r_b: Option<TickDuration>,
    pub m_a: TickDuration,
    pub m_b: Option<TickDuration>,
}

/// Everything one exchange produces: the locally measured intervals per
/// owning clock, the CFO-style drift-ratio observations, and the ground
/// truth plus clock models the simulation used (estimators read only the
/// measured fields).
#[derive(Clone, Debug, PartialEq)]
pub struct ExchangeRecord {
    pub variant: Variant,
    /// `A`'s measured round time.
    pub r_hat_a: TickDuration,
    /// `B`'s measured response delay.
    pub d_hat_b: TickDuration,
    /// `A`'s measured final delay (DS only).
    pub d_hat_a: Option<TickDuration>,
    /// `B`'s measured second-round time (DS only).
    pub r_hat_b: Option<TickDuration>,
    /// `T`'s measured poll-to-response gap.
    pub m_hat_a: TickDuration,
    /// `T`'s measured response-to-final gap (DS only).
    pub m_hat_b: Option<TickDuration>,
    /// CFO-style observation of `k_a / k_b`.
    pub cfo_ratio_ab: Option<Ratio>,
    /// CFO-style observation of `k_a / k_t`.
    pub cfo_ratio_at: Option<Ratio>,
    pub truth: GroundTruth,
    pub clocks: ExchangeClocks,
}

/// `run_exchange` paired with the oracle's true intervals.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleExchange {
    pub record: ExchangeRecord,
    pub true_intervals: TrueIntervals,
}

fn true_intervals(
    truth: &GroundTruth,
    timing: &ProtocolTiming,
    variant: Variant,
) -> TrueIntervals {
    let r_a = truth.tof_ab * 2 + timing.delay_b;
    let m_a = (truth.tof_ab - truth.tof_at) + timing.delay_b + truth.tof_bt;
    match variant {
        Variant::Ss => TrueIntervals {
            r_a,
            d_b: timing.delay_b,
            d_a: None,
            r_b: None,
            m_a,
            m_b: None,
        },
        Variant::Ds => {
            let d_a = timing.delay_a.expect("validated");
            TrueIntervals {
                r_a,
                d_b: timing.delay_b,
                d_a: Some(d_a),
                r_b: Some(truth.tof_ab * 2 + d_a),
                m_a,
                m_b: Some(truth.tof_ab + d_a + truth.tof_at - truth.tof_bt),
            }
        }
    }
}

fn noise_ticks<R: Rng + ?Sized>(
    spec: &NoiseSpec,
    rng: &mut R,
) -> Result<TickDuration, ProtocolError> {
    // f64::round is round-half-away-from-zero, matching the tick rounding.
    Ok(TickDuration::from_fs(spec.draw(rng)?.round() as i128))
}

/// Simulates one exchange for an explicit ground truth (e.g. a scenario
/// stating ToFs directly). Draw order per exchange is fixed: the two CFO
/// ratio noises, then one receive-timestamp noise per reception in
/// chronological order.
pub fn run_exchange_from_truth<R: Rng + ?Sized>(
    truth: &GroundTruth,
    clocks: &ExchangeClocks,
    timing: &ProtocolTiming,
    variant: Variant,
    noise: &NoiseModel,
    rng: &mut R,
) -> Result<ExchangeRecord, ProtocolError> {
    timing.validate(variant)?;
    noise.validate()?;

    let eta_ab = noise.cfo.draw(rng)?;
    let eta_at = noise.cfo.draw(rng)?;

    // Receive events in chronological order. The same physical timestamp
    // closes one interval and opens the next, so its noise must be shared:
    // `resp_rx_a` ends r_hat_a and starts d_hat_a; `resp_rx_t` ends m_hat_a
    // and starts m_hat_b.
    let n_poll_rx_b = noise_ticks(&noise.rx_timestamp, rng)?;
    let n_poll_rx_t = noise_ticks(&noise.rx_timestamp, rng)?;
    let n_resp_rx_a = noise_ticks(&noise.rx_timestamp, rng)?;
    let n_resp_rx_t = noise_ticks(&noise.rx_timestamp, rng)?;

    let truth_intervals = true_intervals(truth, timing, variant);

    let r_hat_a = clocks
        .a
        .quantize(clocks.a.measure_unquantized(truth_intervals.r_a) + n_resp_rx_a);
    let d_hat_b = clocks
        .b
        .quantize(clocks.b.measure_unquantized(truth_intervals.d_b) - n_poll_rx_b);
    let m_hat_a = clocks.t.quantize(
        clocks.t.measure_unquantized(truth_intervals.m_a) + n_resp_rx_t - n_poll_rx_t,
    );

    let (d_hat_a, r_hat_b, m_hat_b) = match variant {
        Variant::Ss => (None, None, None),
        Variant::Ds => {
            let n_final_rx_b = noise_ticks(&noise.rx_timestamp, rng)?;
            let n_final_rx_t = noise_ticks(&noise.rx_timestamp, rng)?;
            let d_a = truth_intervals.d_a.expect("validated");
            let r_b = truth_intervals.r_b.expect("validated");
            let m_b = truth_intervals.m_b.expect("validated");
            (
                Some(clocks.a.quantize(clocks.a.measure_unquantized(d_a) - n_resp_rx_a)),
                Some(clocks.b.quantize(clocks.b.measure_unquantized(r_b) + n_final_rx_b)),
                Some(clocks.t.quantize(
                    clocks.t.measure_unquantized(m_b) + n_final_rx_t - n_resp_rx_t,
                )),
            )
        }
    };

    let one_plus = |eta: f64| -> Result<Ratio, ProtocolError> {
        Ratio::from_f64(1.0 + eta).ok_or(ProtocolError::NonFiniteNoiseDraw)
    };
    let cfo_ratio_ab = clocks.a.factor() / clocks.b.factor() * one_plus(eta_ab)?;
    let cfo_ratio_at = clocks.a.factor() / clocks.t.factor() * one_plus(eta_at)?;

    Ok(ExchangeRecord {
        variant,
        r_hat_a,
        d_hat_b,
        d_hat_a,
        r_hat_b,
        m_hat_a,
        m_hat_b,
        cfo_ratio_ab: Some(cfo_ratio_ab),
        cfo_ratio_at: Some(cfo_ratio_at),
        truth: *truth,
        clocks: clocks.clone(),
    })
}

/// Simulates one exchange between nodes at the given positions.
pub fn run_exchange<R: Rng + ?Sized>(
    a: Position,
    b: Position,
    t: Position,
    clocks: &ExchangeClocks,
    timing: &ProtocolTiming,
    variant: Variant,
    noise: &NoiseModel,
    rng: &mut R,
) -> Result<ExchangeRecord, ProtocolError> {
    let truth = ground_truth(a, b, t);
    run_exchange_from_truth(&truth, clocks, timing, variant, noise, rng)
}

/// Independent brute-force check of [`run_exchange`]: absolute event
/// instants on the true timeline as exact rationals, per-node affine clock
/// maps (offset applied), exact differencing, one rounding per interval.
/// Noise-free by construction; CFO ratios are the exact clock-factor
/// ratios.
pub fn timeline_oracle_from_truth(
    truth: &GroundTruth,
    clocks: &ExchangeClocks,
    timing: &ProtocolTiming,
    variant: Variant,
    poll_tx_time: TickInstant,
) -> Result<OracleExchange, ProtocolError> {
    timing.validate(variant)?;

    let t0 = poll_tx_time;
    let poll_tx_a = t0;
    let poll_rx_b = t0 + truth.tof_ab;
    let poll_rx_t = t0 + truth.tof_at;
    let resp_tx_b = poll_rx_b + timing.delay_b;
    let resp_rx_a = resp_tx_b + truth.tof_ab;
    let resp_rx_t = resp_tx_b + truth.tof_bt;

    // Local timestamp of a true instant under an affine clock: k*t + offset,
    // kept as an exact rational so offsets cancel exactly when differenced.
    let local = |clock: &ClockModel, instant: TickInstant| -> Ratio {
        clock.factor() * instant.to_ratio() + clock.offset().to_ratio()
    };
    let interval = |clock: &ClockModel, end: TickInstant, start: TickInstant| -> TickDuration {
        let diff = local(clock, end) - local(clock, start);
        clock.quantize(TickDuration::from_fs(diff.round_to_i128()))
    };

    let r_hat_a = interval(&clocks.a, resp_rx_a, poll_tx_a);
    let d_hat_b = interval(&clocks.b, resp_tx_b, poll_rx_b);
    let m_hat_a = interval(&clocks.t, resp_rx_t, poll_rx_t);

    let mut true_iv = TrueIntervals {
        r_a: resp_rx_a - poll_tx_a,
        d_b: resp_tx_b - poll_rx_b,
        d_a: None,
        r_b: None,
        m_a: resp_rx_t - poll_rx_t,
        m_b: None,
    };

    let (d_hat_a, r_hat_b, m_hat_b) = match variant {
        Variant::Ss => (None, None, None),
        Variant::Ds => {
            let final_tx_a = resp_rx_a + timing.delay_a.expect("validated");
            let final_rx_b = final_tx_a + truth.tof_ab;
            let final_rx_t = final_tx_a + truth.tof_at;
            true_iv.d_a = Some(final_tx_a - resp_rx_a);
            true_iv.r_b = Some(final_rx_b - resp_tx_b);
            true_iv.m_b = Some(final_rx_t - resp_rx_t);
            (
                Some(interval(&clocks.a, final_tx_a, resp_rx_a)),
                Some(interval(&clocks.b, final_rx_b, resp_tx_b)),
                Some(interval(&clocks.t, final_rx_t, resp_rx_t)),
            )
        }
    };

    let record = ExchangeRecord {
        variant,
        r_hat_a,
        d_hat_b,
        d_hat_a,
        r_hat_b,
        m_hat_a,
        m_hat_b,
        cfo_ratio_ab: Some(clocks.a.factor() / clocks.b.factor()),
        cfo_ratio_at: Some(clocks.a.factor() / clocks.t.factor()),
        truth: *truth,
        clocks: clocks.clone(),
    };
    Ok(OracleExchange {
        record,
        true_intervals: true_iv,
    })
}

/// Positional form of [`timeline_oracle_from_truth`] with the poll sent at
/// the timeline origin.
pub fn timeline_oracle(
    a: Position,
    b: Position,
    t: Position,
    clocks: &ExchangeClocks,
    timing: &ProtocolTiming,
    variant: Variant,
) -> Result<OracleExchange, ProtocolError> {
    let truth = ground_truth(a, b, t);
    timeline_oracle_from_truth(&truth, clocks, timing, variant, TickInstant::ORIGIN)
}
