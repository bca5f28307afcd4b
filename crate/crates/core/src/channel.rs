//! Receiver noise floor and additive white Gaussian noise.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::units::{db_to_linear, IqSample, PowerDbm, RatioDb, SymbolFrame, UnitError};

/// Boltzmann constant, J/K (exact SI value).
pub const BOLTZMANN: f64 = 1.380649e-23;

pub const DEFAULT_TEMPERATURE_K: f64 = 290.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChannelError {
    #[error("bandwidth must be positive and finite, got {0} Hz")]
    Bandwidth(f64),
    #[error("temperature must be positive and finite, got {0} K")]
    Temperature(f64),
    #[error("noise figure must be non-negative, got {0} dB")]
    NoiseFigure(f64),
    #[error("signal power must be positive and finite, got {0}")]
    SignalPower(f64),
    #[error("SNR must be finite or +inf, got {0} dB")]
    Snr(f64),
    #[error("cannot add noise to an empty frame")]
    EmptyFrame,
    #[error(transparent)]
    Unit(#[from] UnitError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseFloorModel {
    pub bandwidth_hz: f64,
    pub noise_figure_db: RatioDb,
    pub temperature_k: f64,
}

impl NoiseFloorModel {
    pub fn new(bandwidth_hz: f64, noise_figure_db: f64, temperature_k: f64) -> Result<Self, ChannelError> {
        let model = Self {
            bandwidth_hz,
            noise_figure_db: RatioDb::new(noise_figure_db).map_err(|_| ChannelError::NoiseFigure(noise_figure_db))?,
            temperature_k,
        };
        model.validate()?;
        Ok(model)
    }

    /// Room-temperature (290 K) receiver.
    pub fn at_room_temperature(bandwidth_hz: f64, noise_figure_db: f64) -> Result<Self, ChannelError> {
        Self::new(bandwidth_hz, noise_figure_db, DEFAULT_TEMPERATURE_K)
    }

    pub fn validate(&self) -> Result<(), ChannelError> {
        if !(self.bandwidth_hz > 0.0 && self.bandwidth_hz.is_finite()) {
            return Err(ChannelError::Bandwidth(self.bandwidth_hz));
        }
        if !(self.temperature_k > 0.0 && self.temperature_k.is_finite()) {
            return Err(ChannelError::Temperature(self.temperature_k));
        }
        let nf = self.noise_figure_db.value();
        if !(nf >= 0.0) {
            return Err(ChannelError::NoiseFigure(nf));
        }
        Ok(())
    }
}

/// `10 log10(k T B / 1 mW) + NF`.
pub fn thermal_noise_floor(model: &NoiseFloorModel) -> Result<PowerDbm, ChannelError> {
    model.validate()?;
    let ktb_mw = BOLTZMANN * model.temperature_k * model.bandwidth_hz * 1000.0;
    Ok(PowerDbm::new(10.0 * ktb_mw.log10() + model.noise_figure_db.value())?)
}

pub fn snr_from_rx_power(p_rx: PowerDbm, floor: PowerDbm) -> RatioDb {
    p_rx.delta(floor)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AwgnChannel {
    pub snr_db: RatioDb,
    pub seed: u64,
    /// Mean symbol power of the transmitted constellation (linear).
    pub signal_power: f64,
}

impl AwgnChannel {
    pub fn new(snr_db: RatioDb, seed: u64, signal_power: f64) -> Result<Self, ChannelError> {
        let ch = Self { snr_db, seed, signal_power };
        ch.validate()?;
        Ok(ch)
    }

    /// Accepts a raw dB value; `+inf` means noiseless, other non-finite values
    /// are rejected.
    pub fn from_snr_db(snr_db: f64, seed: u64, signal_power: f64) -> Result<Self, ChannelError> {
        let snr = if snr_db == f64::INFINITY {
            RatioDb::infinite()
        } else {
            RatioDb::new(snr_db).map_err(|_| ChannelError::Snr(snr_db))?
        };
        Self::new(snr, seed, signal_power)
    }

    fn validate(&self) -> Result<(), ChannelError> {
        if !(self.signal_power > 0.0 && self.signal_power.is_finite()) {
            return Err(ChannelError::SignalPower(self.signal_power));
        }
        let snr = self.snr_db.value();
        if snr.is_nan() || snr == f64::NEG_INFINITY {
            return Err(ChannelError::Snr(snr));
        }
        Ok(())
    }

    /// Noise variance per real dimension, `signal_power / (2 snr)`; zero for
    /// the noiseless sentinel.
    pub fn noise_variance_per_dim(&self) -> Result<f64, ChannelError> {
        if self.snr_db.is_infinite() {
            return Ok(0.0);
        }
        Ok(self.signal_power / (2.0 * db_to_linear(self.snr_db)?))
    }
}

pub fn apply_awgn(frame: &SymbolFrame, ch: &AwgnChannel) -> Result<SymbolFrame, ChannelError> {
    ch.validate()?;
    if frame.is_empty() {
        return Err(ChannelError::EmptyFrame);
    }
    let sigma = ch.noise_variance_per_dim()?.sqrt();
    if sigma == 0.0 {
        return Ok(frame.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(ch.seed);
    Ok(frame
        .iter()
        .map(|&s| {
            let ni: f64 = StandardNormal.sample(&mut rng);
            let nq: f64 = StandardNormal.sample(&mut rng);
            s + IqSample::new(sigma * ni, sigma * nq)
        })
        .collect())
}
