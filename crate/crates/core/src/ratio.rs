//! Exact rational arithmetic for clock factors and drift ratios.
//!
//! The estimators subtract near-equal millisecond-scale intervals to recover
//! picosecond-scale differences, so ratio arithmetic must stay exact until
//! the final scalar multiply and round exactly once. Every finite IEEE
//! double is a dyadic rational and converts losslessly.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};

/// A dimensionless exact ratio (clock factor, relative drift, CFO estimate).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Ratio(BigRational);

impl Ratio {
    pub fn zero() -> Self {
        Ratio(BigRational::zero())
    }

    pub fn one() -> Self {
        Ratio(BigRational::one())
    }

    /// Exact ratio `num / den`.
    ///
    /// Panics if `den` is zero, like integer division.
    pub fn new(num: i128, den: i128) -> Self {
        Ratio(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn from_int(value: i128) -> Self {
        Ratio(BigRational::from_integer(BigInt::from(value)))
    }

    /// Exact value of a finite double. `None` for NaN or infinities.
    pub fn from_f64(value: f64) -> Option<Self> {
        BigRational::from_float(value).map(Ratio)
    }

    /// Exact ratio from a parts-per-million value, e.g. `from_ppm(10.0)`
    /// is exactly `1/100_000`.
    pub fn from_ppm(ppm: f64) -> Option<Self> {
        Self::from_f64(ppm).map(|r| Ratio(r.0 / BigInt::from(1_000_000)))
    }

    pub fn recip(&self) -> Self {
        Ratio(self.0.recip())
    }

    pub fn abs(&self) -> Self {
        Ratio(self.0.abs())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    /// Nearest integer, halves away from zero. The single rounding step at
    /// the end of each estimator formula.
    pub fn round_to_i128(&self) -> i128 {
        self.0
            .round()
            .to_integer()
            .to_i128()
            .expect("rounded ratio exceeds the 128-bit tick range")
    }

    /// Nearest-double approximation, for reporting only.
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn numer_string(&self) -> String {
        self.0.numer().to_string()
    }

    pub fn denom_string(&self) -> String {
        self.0.denom().to_string()
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl fmt::Debug for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Ratio({})", self)
    }
}

impl From<i128> for Ratio {
    fn from(value: i128) -> Self {
        Ratio::from_int(value)
    }
}

impl Add for Ratio {
    type Output = Ratio;
    fn add(self, rhs: Ratio) -> Ratio {
        Ratio(self.0 + rhs.0)
    }
}

impl Sub for Ratio {
    type Output = Ratio;
    fn sub(self, rhs: Ratio) -> Ratio {
        Ratio(self.0 - rhs.0)
    }
}

impl Mul for Ratio {
    type Output = Ratio;
    fn mul(self, rhs: Ratio) -> Ratio {
        Ratio(self.0 * rhs.0)
    }
}

impl Div for Ratio {
    type Output = Ratio;
    fn div(self, rhs: Ratio) -> Ratio {
        Ratio(self.0 / rhs.0)
    }
}

impl Neg for Ratio {
    type Output = Ratio;
    fn neg(self) -> Ratio {
        Ratio(-self.0)
    }
}
