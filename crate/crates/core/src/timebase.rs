//! Exact time representation and the drifting-clock measurement model.
//!
//! All intervals are signed 128-bit counts of femtosecond ticks. A clock
//! with drift `e` measures a true interval `X` as `round((1 + e) * X)`,
//! with a single round-half-away-from-zero step per measurement, so oracle
//! tests can be bit-exact. Offsets shift absolute timestamps only; they
//! cancel in every interval and are never applied by `measure_local`.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use thiserror::Error;

use crate::ratio::Ratio;

/// Ticks per second: one tick is one femtosecond.
pub const FS_PER_SECOND: i128 = 1_000_000_000_000_000;
pub const FS_PER_MILLISECOND: i128 = 1_000_000_000_000;
pub const FS_PER_MICROSECOND: i128 = 1_000_000_000;
pub const FS_PER_NANOSECOND: i128 = 1_000_000;
pub const FS_PER_PICOSECOND: i128 = 1_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TimebaseError {
    #[error("clock drift must be a finite value with factor 1 + e > 0")]
    InvalidDrift,
    #[error("quantization tick must be positive")]
    InvalidQuantization,
    #[error("value is not representable in the 128-bit femtosecond range")]
    OutOfRange,
}

/// A signed duration counted in femtosecond ticks.
///
/// The 128-bit range (about 1.7e23 seconds) keeps sums and differences of
/// any protocol-scale interval exact; arithmetic is checked so an overflow
/// surfaces as a configuration fault instead of wrapping.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TickDuration(i128);

impl TickDuration {
    pub const ZERO: TickDuration = TickDuration(0);

    pub const fn from_fs(ticks: i128) -> Self {
        TickDuration(ticks)
    }

    pub const fn from_ps(ps: i128) -> Self {
        TickDuration(ps * FS_PER_PICOSECOND)
    }

    pub const fn from_ns(ns: i128) -> Self {
        TickDuration(ns * FS_PER_NANOSECOND)
    }

    pub const fn from_us(us: i128) -> Self {
        TickDuration(us * FS_PER_MICROSECOND)
    }

    pub const fn from_ms(ms: i128) -> Self {
        TickDuration(ms * FS_PER_MILLISECOND)
    }

    pub const fn from_secs(secs: i128) -> Self {
        TickDuration(secs * FS_PER_SECOND)
    }

    /// Seconds to ticks with one round-half-away-from-zero step.
    /// `None` for non-finite input or values outside the tick range.
    pub fn from_secs_f64(secs: f64) -> Option<Self> {
        let rational = Ratio::from_f64(secs)? * Ratio::from_int(FS_PER_SECOND);
        Some(TickDuration(rational.round_to_i128()))
    }

    pub const fn as_fs(self) -> i128 {
        self.0
    }

    /// Nearest-double seconds. Exact (and therefore round-trippable) only
    /// while the tick count fits in the 53-bit double mantissa, i.e. up to
    /// about 9.0e15 fs (~9 s); beyond that the relative error is bounded by
    /// 2^-52.
    pub fn as_secs_f64(self) -> f64 {
        self.0 as f64 / FS_PER_SECOND as f64
    }

    pub fn as_nanos_f64(self) -> f64 {
        self.0 as f64 / FS_PER_NANOSECOND as f64
    }

    pub fn abs(self) -> Self {
        TickDuration(self.0.abs())
    }

    pub fn signum(self) -> i128 {
        self.0.signum()
    }

    pub fn is_negative(self) -> bool {
        self.0 < 0
    }

    pub fn checked_add(self, rhs: Self) -> Option<Self> {
        self.0.checked_add(rhs.0).map(TickDuration)
    }

    pub fn checked_sub(self, rhs: Self) -> Option<Self> {
        self.0.checked_sub(rhs.0).map(TickDuration)
    }

    /// Exact rational view of the tick count.
    pub fn to_ratio(self) -> Ratio {
        Ratio::from_int(self.0)
    }
}

impl fmt::Display for TickDuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} fs", self.0)
    }
}

impl Add for TickDuration {
    type Output = TickDuration;
    fn add(self, rhs: TickDuration) -> TickDuration {
        self.checked_add(rhs)
            .expect("tick duration overflow: interval exceeds the 128-bit femtosecond range")
    }
}

impl AddAssign for TickDuration {
    fn add_assign(&mut self, rhs: TickDuration) {
        *self = *self + rhs;
    }
}

impl Sub for TickDuration {
    type Output = TickDuration;
    fn sub(self, rhs: TickDuration) -> TickDuration {
        self.checked_sub(rhs)
            .expect("tick duration overflow: interval exceeds the 128-bit femtosecond range")
    }
}

impl SubAssign for TickDuration {
    fn sub_assign(&mut self, rhs: TickDuration) {
        *self = *self - rhs;
    }
}

impl Neg for TickDuration {
    type Output = TickDuration;
    fn neg(self) -> TickDuration {
        TickDuration(-self.0)
    }
}

impl Mul<i128> for TickDuration {
    type Output = TickDuration;
    fn mul(self, rhs: i128) -> TickDuration {
        TickDuration(
            self.0
                .checked_mul(rhs)
                .expect("tick duration overflow: interval exceeds the 128-bit femtosecond range"),
        )
    }
}

impl Sum for TickDuration {
    fn sum<I: Iterator<Item = TickDuration>>(iter: I) -> TickDuration {
        iter.fold(TickDuration::ZERO, |acc, d| acc + d)
    }
}

/// An absolute instant on a timeline, in femtosecond ticks from the
/// timeline origin.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TickInstant(i128);

impl TickInstant {
    pub const ORIGIN: TickInstant = TickInstant(0);

    pub const fn from_fs(ticks: i128) -> Self {
        TickInstant(ticks)
    }

    pub const fn as_fs(self) -> i128 {
        self.0
    }

    pub fn to_ratio(self) -> Ratio {
        Ratio::from_int(self.0)
    }
}

impl Add<TickDuration> for TickInstant {
    type Output = TickInstant;
    fn add(self, rhs: TickDuration) -> TickInstant {
        TickInstant(
            self.0
                .checked_add(rhs.as_fs())
                .expect("tick instant overflow"),
        )
    }
}

impl Sub for TickInstant {
    type Output = TickDuration;
    fn sub(self, rhs: TickInstant) -> TickDuration {
        TickDuration(
            self.0
                .checked_sub(rhs.0)
                .expect("tick duration overflow: interval exceeds the 128-bit femtosecond range"),
        )
    }
}

/// A free-running local oscillator: constant fractional drift `e` (factor
/// `k = 1 + e`), an initial offset, and an optional hardware timestamp
/// grid. The drift is held constant over a protocol execution.
#[derive(Clone, Debug, PartialEq)]
pub struct ClockModel {
    node_id: String,
    drift: Ratio,
    offset: TickDuration,
    quantization: Option<TickDuration>,
}

impl ClockModel {
    pub fn new(
        node_id: impl Into<String>,
        drift: Ratio,
        offset: TickDuration,
    ) -> Result<Self, TimebaseError> {
        let factor = Ratio::one() + drift.clone();
        if !factor.is_positive() {
            return Err(TimebaseError::InvalidDrift);
        }
        Ok(ClockModel {
            node_id: node_id.into(),
            drift,
            offset,
            quantization: None,
        })
    }

    /// Clock with drift given in parts per million. `from_ppm("a", 10.0, ..)`
    /// is exactly `e = 1/100_000`.
    pub fn from_ppm(
        node_id: impl Into<String>,
        drift_ppm: f64,
        offset: TickDuration,
    ) -> Result<Self, TimebaseError> {
        let drift = Ratio::from_ppm(drift_ppm).ok_or(TimebaseError::InvalidDrift)?;
        Self::new(node_id, drift, offset)
    }

    /// Drift-free, offset-free reference clock.
    pub fn ideal(node_id: impl Into<String>) -> Self {
        ClockModel {
            node_id: node_id.into(),
            drift: Ratio::zero(),
            offset: TickDuration::ZERO,
            quantization: None,
        }
    }

    /// Enables the quantized-hardware mode: local timestamps are coarsened
    /// to multiples of `tick` (e.g. 15.65 ps for UWB transceivers).
    pub fn with_quantization(mut self, tick: TickDuration) -> Result<Self, TimebaseError> {
        if tick.as_fs() <= 0 {
            return Err(TimebaseError::InvalidQuantization);
        }
        self.quantization = Some(tick);
        Ok(self)
    }

    pub fn node_id(&self) -> &str {
        &self.node_id
    }

    pub fn drift(&self) -> &Ratio {
        &self.drift
    }

    /// The clock rate factor `k = 1 + e`.
    pub fn factor(&self) -> Ratio {
        Ratio::one() + self.drift.clone()
    }

    pub fn offset(&self) -> TickDuration {
        self.offset
    }

    pub fn quantization(&self) -> Option<TickDuration> {
        self.quantization
    }

    /// The locally measured value of a true interval: `round(k * X)`,
    /// then the optional hardware grid. Offsets cancel in intervals and
    /// are not applied.
    pub fn measure_local(&self, true_interval: TickDuration) -> TickDuration {
        self.quantize(self.measure_unquantized(true_interval))
    }

    /// Inverse of the measurement map: `round(X_local / k)`.
    pub fn true_from_local(&self, local_interval: TickDuration) -> TickDuration {
        let scaled = local_interval.to_ratio() / self.factor();
        TickDuration::from_fs(scaled.round_to_i128())
    }

    /// Drift scaling without the hardware grid; the protocol simulation
    /// composes this with receive-timestamp noise before quantizing.
    pub(crate) fn measure_unquantized(&self, true_interval: TickDuration) -> TickDuration {
        let scaled = self.factor() * true_interval.to_ratio();
        TickDuration::from_fs(scaled.round_to_i128())
    }

    /// Rounds a local value to the hardware timestamp grid (identity when
    /// quantization is off).
    pub(crate) fn quantize(&self, local: TickDuration) -> TickDuration {
        match self.quantization {
            None => local,
            Some(q) => TickDuration::from_fs(round_to_multiple(local.as_fs(), q.as_fs())),
        }
    }
}

/// Nearest multiple of `q`, halves away from zero. `q > 0`.
fn round_to_multiple(value: i128, q: i128) -> i128 {
    let mut quotient = value / q;
    let remainder = value % q;
    if 2 * remainder.abs() >= q {
        quotient += remainder.signum();
    }
    quotient * q
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn clock(ppm: f64) -> ClockModel {
        ClockModel::from_ppm("x", ppm, TickDuration::ZERO).unwrap()
    }

    #[test]
    fn zero_drift_is_identity() {
        let c = clock(0.0);
        let one_ms = TickDuration::from_ms(1);
        assert_eq!(c.measure_local(one_ms), one_ms);
        assert_eq!(c.true_from_local(one_ms), one_ms);
    }

    #[test]
    fn measurement_scales_exactly() {
        // 10 ppm drift over 1.0002 ms.
        let c = clock(10.0);
        let interval = TickDuration::from_fs(1_000_200_000_000);
        assert_eq!(
            c.measure_local(interval),
            TickDuration::from_fs(1_000_210_002_000)
        );

        let c = clock(-5.0);
        assert_eq!(
            c.measure_local(TickDuration::from_ms(1)),
            TickDuration::from_fs(999_995_000_000)
        );
    }

    #[test]
    fn inverse_returns_true_interval() {
        let c = clock(10.0);
        let local = TickDuration::from_fs(1_000_210_002_000);
        let back = c.true_from_local(local);
        let expected = TickDuration::from_fs(1_000_200_000_000);
        assert!((back - expected).as_fs().abs() <= 1, "got {back}");
    }

    #[test]
    fn rounding_halves_go_away_from_zero() {
        // e = +0.5 ppm over exactly 1 ns lands on a half tick.
        let c = clock(0.5);
        assert_eq!(
            c.measure_local(TickDuration::from_ns(1)),
            TickDuration::from_fs(1_000_001)
        );
        assert_eq!(
            c.measure_local(-TickDuration::from_ns(1)),
            TickDuration::from_fs(-1_000_001)
        );
    }

    #[test]
    fn offsets_never_affect_measurements() {
        let with_offset =
            ClockModel::from_ppm("x", 10.0, TickDuration::from_secs(1)).unwrap();
        let without = clock(10.0);
        let interval = TickDuration::from_fs(123_456_789_012_345);
        assert_eq!(
            with_offset.measure_local(interval),
            without.measure_local(interval)
        );
    }

    #[test]
    fn quantization_snaps_to_grid() {
        let grid = TickDuration::from_fs(15_650); // 15.65 ps
        let c = ClockModel::ideal("x").with_quantization(grid).unwrap();
        let measured = c.measure_local(TickDuration::from_fs(100_069_228_559));
        assert_eq!(measured.as_fs() % 15_650, 0);
        assert!((measured - TickDuration::from_fs(100_069_228_559))
            .as_fs()
            .abs()
            <= 15_650 / 2 + 1);
        assert_eq!(round_to_multiple(23, 10), 20);
        assert_eq!(round_to_multiple(25, 10), 30);
        assert_eq!(round_to_multiple(-25, 10), -30);
    }

    #[test]
    fn drift_must_keep_factor_positive() {
        assert!(ClockModel::from_ppm("x", -1_000_001.0, TickDuration::ZERO).is_err());
        assert!(ClockModel::from_ppm("x", f64::NAN, TickDuration::ZERO).is_err());
    }

    #[test]
    #[should_panic(expected = "tick duration overflow")]
    fn overflow_is_fatal() {
        let huge = TickDuration::from_fs(i128::MAX / 2);
        let _ = huge * 3;
    }

    #[test]
    fn float_seconds_conversion_bounds() {
        // Exact round trip while the count fits the double mantissa.
        let d = TickDuration::from_fs(4_000_000_000_000_000);
        assert_eq!(
            TickDuration::from_secs_f64(d.as_secs_f64()).unwrap(),
            d
        );
        // At 1e4 s the count (1e19 fs) exceeds 2^53; relative error stays
        // within one double ulp.
        let big = TickDuration::from_secs(10_000);
        let back = TickDuration::from_secs_f64(big.as_secs_f64()).unwrap();
        let err = (back - big).as_fs().abs() as f64;
        assert!(err <= big.as_fs() as f64 * 2.3e-16, "err {err}");
    }

    proptest! {
        #[test]
        fn round_trip_within_one_tick(
            fs in -10_000_000_000_000_000_000i128..10_000_000_000_000_000_000i128,
            ppm in -50.0f64..50.0,
        ) {
            let c = clock(ppm);
            let x = TickDuration::from_fs(fs);
            let back = c.true_from_local(c.measure_local(x));
            prop_assert!((back - x).as_fs().abs() <= 1);
        }

        #[test]
        fn measurement_is_linear_within_rounding(
            a in -1_000_000_000_000_000i128..1_000_000_000_000_000i128,
            b in -1_000_000_000_000_000i128..1_000_000_000_000_000i128,
            ppm in -50.0f64..50.0,
        ) {
            let c = clock(ppm);
            let lhs = c.measure_local(TickDuration::from_fs(a) + TickDuration::from_fs(b));
            let rhs = c.measure_local(TickDuration::from_fs(a))
                + c.measure_local(TickDuration::from_fs(b));
            prop_assert!((lhs - rhs).as_fs().abs() <= 2);
        }

        #[test]
        fn zero_drift_identity_everywhere(fs in any::<i64>()) {
            let c = clock(0.0);
            let x = TickDuration::from_fs(fs as i128);
            prop_assert_eq!(c.measure_local(x), x);
        }
    }
}
