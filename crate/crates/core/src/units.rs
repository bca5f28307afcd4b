//! Power and ratio units, plus the complex baseband sample type.
//!
//! Powers cross API boundaries in dBm and ratios in dB. Linear values only
//! appear inside computations.

use std::fmt;
use std::ops::{Add, Index, Neg, Sub};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum UnitError {
    #[error("{what} must be finite, got {value}")]
    NonFinite { what: &'static str, value: f64 },
    #[error("{what} must be strictly positive, got {value}")]
    NonPositive { what: &'static str, value: f64 },
}

fn check_finite(what: &'static str, value: f64) -> Result<f64, UnitError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(UnitError::NonFinite { what, value })
    }
}

/// Absolute power level referenced to one milliwatt.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct PowerDbm(f64);

impl PowerDbm {
    pub fn new(value: f64) -> Result<Self, UnitError> {
        check_finite("power (dBm)", value).map(Self)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Difference between two absolute levels.
    pub fn delta(self, reference: PowerDbm) -> RatioDb {
        RatioDb(self.0 - reference.0)
    }
}

impl fmt::Display for PowerDbm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} dBm", self.0)
    }
}

impl Add<RatioDb> for PowerDbm {
    type Output = PowerDbm;
    fn add(self, rhs: RatioDb) -> PowerDbm {
        PowerDbm(self.0 + rhs.0)
    }
}

impl Sub<RatioDb> for PowerDbm {
    type Output = PowerDbm;
    fn sub(self, rhs: RatioDb) -> PowerDbm {
        PowerDbm(self.0 - rhs.0)
    }
}

/// Relative power ratio in decibels.
///
/// `+inf` is accepted only through [`RatioDb::infinite`], which callers use as
/// the "no noise" sentinel for SNR.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct RatioDb(f64);

impl RatioDb {
    pub fn new(value: f64) -> Result<Self, UnitError> {
        check_finite("ratio (dB)", value).map(Self)
    }

    pub const fn infinite() -> Self {
        Self(f64::INFINITY)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0 == f64::INFINITY
    }
}

impl fmt::Display for RatioDb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} dB", self.0)
    }
}

impl Add for RatioDb {
    type Output = RatioDb;
    fn add(self, rhs: RatioDb) -> RatioDb {
        RatioDb(self.0 + rhs.0)
    }
}

impl Neg for RatioDb {
    type Output = RatioDb;
    fn neg(self) -> RatioDb {
        RatioDb(-self.0)
    }
}

pub fn dbm_to_mw(p: PowerDbm) -> Result<f64, UnitError> {
    check_finite("power (dBm)", p.0)?;
    Ok(10f64.powf(p.0 / 10.0))
}

pub fn mw_to_dbm(mw: f64) -> Result<PowerDbm, UnitError> {
    if !(mw > 0.0) {
        return Err(UnitError::NonPositive { what: "power (mW)", value: mw });
    }
    check_finite("power (mW)", mw)?;
    Ok(PowerDbm(10.0 * mw.log10()))
}

pub fn db_to_linear(r: RatioDb) -> Result<f64, UnitError> {
    check_finite("ratio (dB)", r.0)?;
    Ok(10f64.powf(r.0 / 10.0))
}

pub fn linear_to_db(x: f64) -> Result<RatioDb, UnitError> {
    if !(x > 0.0) {
        return Err(UnitError::NonPositive { what: "linear ratio", value: x });
    }
    check_finite("linear ratio", x)?;
    Ok(RatioDb(10.0 * x.log10()))
}

/// One complex baseband sample.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct IqSample {
    pub i: f64,
    pub q: f64,
}

impl IqSample {
    pub const fn new(i: f64, q: f64) -> Self {
        Self { i, q }
    }

    pub fn power(self) -> f64 {
        self.i * self.i + self.q * self.q
    }

    pub fn magnitude(self) -> f64 {
        self.i.hypot(self.q)
    }

    pub fn is_finite(self) -> bool {
        self.i.is_finite() && self.q.is_finite()
    }

    pub fn scale(self, k: f64) -> Self {
        Self::new(self.i * k, self.q * k)
    }
}

impl Add for IqSample {
    type Output = IqSample;
    fn add(self, rhs: IqSample) -> IqSample {
        IqSample::new(self.i + rhs.i, self.q + rhs.q)
    }
}

impl Sub for IqSample {
    type Output = IqSample;
    fn sub(self, rhs: IqSample) -> IqSample {
        IqSample::new(self.i - rhs.i, self.q - rhs.q)
    }
}

/// Ordered sequence of baseband samples.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SymbolFrame(Vec<IqSample>);

impl SymbolFrame {
    pub fn new(samples: Vec<IqSample>) -> Self {
        Self(samples)
    }

    /// Builds a frame from parallel I and Q vectors. Returns `None` when the
    /// lengths differ.
    pub fn from_components(i: &[f64], q: &[f64]) -> Option<Self> {
        if i.len() != q.len() {
            return None;
        }
        Some(Self(i.iter().zip(q).map(|(&i, &q)| IqSample::new(i, q)).collect()))
    }

    pub fn samples(&self) -> &[IqSample] {
        &self.0
    }

    pub fn into_samples(self) -> Vec<IqSample> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, IqSample> {
        self.0.iter()
    }

    /// `sqrt(mean(|s|^2))`, or `None` for an empty frame.
    pub fn rms(&self) -> Option<f64> {
        if self.0.is_empty() {
            return None;
        }
        let mean = self.0.iter().map(|s| s.power()).sum::<f64>() / self.0.len() as f64;
        Some(mean.sqrt())
    }
}

impl Index<usize> for SymbolFrame {
    type Output = IqSample;
    fn index(&self, idx: usize) -> &IqSample {
        &self.0[idx]
    }
}

impl FromIterator<IqSample> for SymbolFrame {
    fn from_iter<T: IntoIterator<Item = IqSample>>(iter: T) -> Self {
        Self(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a SymbolFrame {
    type Item = &'a IqSample;
    type IntoIter = std::slice::Iter<'a, IqSample>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}
