//! Every estimator, computed from locally measured intervals only.
//!
//! The raw ToF estimate halves the difference of `A`'s round time and `B`'s
//! response delay. With a relative drift factor `k_a/k_b` (from a CFO
//! observation, or from the DS interval sums which need no CFO) the
//! drift-corrected variants reduce the residual error to the drift of a
//! single clock over the quantity itself:
//!
//! - `tof_dc_a  = (r_hat_a - (k_a/k_b) * d_hat_b) / 2       = k_a * tof`
//! - `tof_dc_b  = ((k_b/k_a) * r_hat_a - d_hat_b) / 2       = k_b * tof`
//! - `tdoa_dc_a = r_hat_a - tof_dc_a - (k_a/k_t) * m_hat_a  = k_a * td`
//! - `tdoa_dc_t = (k_t/k_a) * (r_hat_a - tof_dc_a) - m_hat_a = k_t * td`
//!
//! Ratio arithmetic is exact rational from the tick sums; each estimate
//! rounds exactly once at the end. Ground truth carried by the record is
//! never read here.

use thiserror::Error;

use crate::protocol::{ExchangeRecord, Variant};
use crate::ratio::Ratio;
use crate::timebase::TickDuration;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EstimatorError {
    #[error("operation requires a DS exchange record")]
    RequiresDsRecord,
}

/// Where the relative drift factors come from: a carrier-frequency-offset
/// observation, or the DS-TWR interval-sum symmetry (no CFO needed).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RatioSource {
    Cfo,
    DsSymmetry,
}

impl RatioSource {
    pub fn as_str(self) -> &'static str {
        match self {
            RatioSource::Cfo => "CFO",
            RatioSource::DsSymmetry => "DS_SYMMETRY",
        }
    }
}

/// Time-of-flight estimates from one exchange. The drift-corrected entries
/// are present iff a relative drift factor was available.
#[derive(Clone, Debug, PartialEq)]
pub struct TofEstimates {
    pub raw: TickDuration,
    pub dc_a: Option<TickDuration>,
    pub dc_b: Option<TickDuration>,
    pub drift_ratio_used: Option<Ratio>,
    pub source: RatioSource,
}

/// Listener TDoA estimates from one exchange. `dc_t` is present iff a
/// `k_t/k_a` factor was available.
#[derive(Clone, Debug, PartialEq)]
pub struct TdoaEstimates {
    pub raw_a: TickDuration,
    pub dc_a: Option<TickDuration>,
    pub dc_t: Option<TickDuration>,
    pub listener_ratio_used: Option<Ratio>,
    pub source: RatioSource,
}

/// All estimates of one exchange.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimateSet {
    pub tof: TofEstimates,
    pub tdoa: TdoaEstimates,
}

fn half_rounded(value: i128) -> i128 {
    if value % 2 == 0 {
        value / 2
    } else {
        (value + value.signum()) / 2
    }
}

/// Raw ToF estimate `(r_hat_a - d_hat_b) / 2`. Its error under drift is
/// `(e_a * r_a - e_b * d_b) / 2`.
pub fn tof_raw(rec: &ExchangeRecord) -> TickDuration {
    TickDuration::from_fs(half_rounded((rec.r_hat_a - rec.d_hat_b).as_fs()))
}

/// Relative drift factor `k_a/k_b` from the DS interval sums,
/// `(r_hat_a + d_hat_a) / (d_hat_b + r_hat_b)`, as an exact rational.
pub fn drift_ratio_alt_ds(rec: &ExchangeRecord) -> Result<Ratio, EstimatorError> {
    match (rec.variant, rec.d_hat_a, rec.r_hat_b) {
        (Variant::Ds, Some(d_hat_a), Some(r_hat_b)) => Ok(Ratio::new(
            (rec.r_hat_a + d_hat_a).as_fs(),
            (rec.d_hat_b + r_hat_b).as_fs(),
        )),
        _ => Err(EstimatorError::RequiresDsRecord),
    }
}

/// Drift-corrected ToF in `A`'s clock: `(r_hat_a - ratio_ab * d_hat_b) / 2`.
/// With the exact factor this equals `k_a * tof` and the residual error is
/// `e_a * tof`.
pub fn tof_dc_a(rec: &ExchangeRecord, ratio_ab: &Ratio) -> TickDuration {
    assert!(ratio_ab.is_positive(), "drift ratio must be positive");
    let est = (rec.r_hat_a.to_ratio() - ratio_ab.clone() * rec.d_hat_b.to_ratio())
        / Ratio::from_int(2);
    TickDuration::from_fs(est.round_to_i128())
}

/// Drift-corrected ToF in `B`'s clock: `((1/ratio_ab) * r_hat_a - d_hat_b) / 2`,
/// which equals `k_b * tof` with the exact factor.
pub fn tof_dc_b(rec: &ExchangeRecord, ratio_ab: &Ratio) -> TickDuration {
    assert!(ratio_ab.is_positive(), "drift ratio must be positive");
    let est = (ratio_ab.recip() * rec.r_hat_a.to_ratio() - rec.d_hat_b.to_ratio())
        / Ratio::from_int(2);
    TickDuration::from_fs(est.round_to_i128())
}

/// Raw listener TDoA `r_hat_a - tof_est - m_hat_a`, fed with the raw ToF
/// estimate.
pub fn tdoa_raw(rec: &ExchangeRecord, tof_est: TickDuration) -> TickDuration {
    rec.r_hat_a - tof_est - rec.m_hat_a
}

/// Relative drift factor `k_t/k_a` from the listener's DS interval sums,
/// `(m_hat_a + m_hat_b) / (r_hat_a + d_hat_a)`, as an exact rational.
pub fn listener_ratio_ds(rec: &ExchangeRecord) -> Result<Ratio, EstimatorError> {
    match (rec.variant, rec.m_hat_b, rec.d_hat_a) {
        (Variant::Ds, Some(m_hat_b), Some(d_hat_a)) => Ok(Ratio::new(
            (rec.m_hat_a + m_hat_b).as_fs(),
            (rec.r_hat_a + d_hat_a).as_fs(),
        )),
        _ => Err(EstimatorError::RequiresDsRecord),
    }
}

/// Drift-corrected TDoA in `A`'s clock:
/// `r_hat_a - tof_dc_a - ratio_at * m_hat_a` with `ratio_at = k_a/k_t`.
/// With exact factors this equals `k_a * td`, so the error is `e_a * td`.
pub fn tdoa_dc_a(
    rec: &ExchangeRecord,
    tof_dc_a: TickDuration,
    ratio_at: &Ratio,
) -> TickDuration {
    assert!(ratio_at.is_positive(), "drift ratio must be positive");
    let est = rec.r_hat_a.to_ratio()
        - tof_dc_a.to_ratio()
        - ratio_at.clone() * rec.m_hat_a.to_ratio();
    TickDuration::from_fs(est.round_to_i128())
}

/// Drift-corrected TDoA in the listener's clock:
/// `ratio_ta * (r_hat_a - tof_dc_a) - m_hat_a` with `ratio_ta = k_t/k_a`.
/// With exact factors this equals `k_t * td`.
pub fn tdoa_dc_t(
    rec: &ExchangeRecord,
    tof_dc_a: TickDuration,
    ratio_ta: &Ratio,
) -> TickDuration {
    assert!(ratio_ta.is_positive(), "drift ratio must be positive");
    let est = ratio_ta.clone() * (rec.r_hat_a.to_ratio() - tof_dc_a.to_ratio())
        - rec.m_hat_a.to_ratio();
    TickDuration::from_fs(est.round_to_i128())
}

/// Runs the full estimator chain for one record.
///
/// The raw ToF feeds the raw TDoA; the `A`-clock drift-corrected ToF feeds
/// both drift-corrected TDoA variants. With `RatioSource::Cfo` the factors
/// come from the record's CFO observations (absent observations leave the
/// corrected entries absent); with `RatioSource::DsSymmetry` they are
/// derived from the DS interval sums and an SS record is an error.
pub fn estimate(rec: &ExchangeRecord, source: RatioSource) -> Result<EstimateSet, EstimatorError> {
    let (ratio_ab, ratio_ta) = match source {
        RatioSource::Cfo => (
            rec.cfo_ratio_ab.clone(),
            rec.cfo_ratio_at.as_ref().map(Ratio::recip),
        ),
        RatioSource::DsSymmetry => (
            Some(drift_ratio_alt_ds(rec)?),
            Some(listener_ratio_ds(rec)?),
        ),
    };

    let raw = tof_raw(rec);
    let dc_a = ratio_ab.as_ref().map(|r| tof_dc_a(rec, r));
    let dc_b = ratio_ab.as_ref().map(|r| tof_dc_b(rec, r));

    let raw_a = tdoa_raw(rec, raw);
    let (tdoa_dc_a_est, tdoa_dc_t_est) = match (dc_a, ratio_ta.as_ref()) {
        (Some(tof), Some(ta)) => (
            Some(tdoa_dc_a(rec, tof, &ta.recip())),
            Some(tdoa_dc_t(rec, tof, ta)),
        ),
        _ => (None, None),
    };

    Ok(EstimateSet {
        tof: TofEstimates {
            raw,
            dc_a,
            dc_b,
            drift_ratio_used: ratio_ab,
            source,
        },
        tdoa: TdoaEstimates {
            raw_a,
            dc_a: tdoa_dc_a_est,
            dc_t: tdoa_dc_t_est,
            listener_ratio_used: ratio_ta,
            source,
        },
    })
}
