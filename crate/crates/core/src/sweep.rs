//! Rx power sweep toward the noise floor.
//!
//! Each step lowers the received power by `step_db`, converts it to SNR
//! against the configured noise floor, pushes random symbols through an AWGN
//! channel and measures EVM, SER and BER. Closed-form QPSK/QAM results are
//! provided alongside for cross-checking.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{apply_awgn, snr_from_rx_power, thermal_noise_floor, AwgnChannel, ChannelError, NoiseFloorModel};
use crate::evm::{evm_decision_directed, evm_report, EvmError};
use crate::modulation::{demodulate_hard, ideal_points, ConstellationSpec, ModulationScheme, NormalizationMode};
use crate::units::{db_to_linear, PowerDbm, RatioDb, SymbolFrame};

pub const DEFAULT_CONSTELLATION_SAMPLES: usize = 2000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SweepError {
    #[error("{field}: {message}")]
    Config { field: String, message: String },
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Evm(#[from] EvmError),
}

fn config_err(field: &str, message: impl Into<String>) -> SweepError {
    SweepError::Config { field: field.to_string(), message: message.into() }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub scheme: ModulationScheme,
    pub mode: NormalizationMode,
    pub floor: NoiseFloorModel,
    pub start_dbm: PowerDbm,
    pub stop_dbm: PowerDbm,
    pub step_db: RatioDb,
    pub symbols_per_step: usize,
    pub seed: u64,
    pub constellation_sample_count: usize,
    /// Opaque metadata (band, channel, SCS...) carried through to outputs.
    pub labels: BTreeMap<String, String>,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), SweepError> {
        self.floor.validate().map_err(|e| config_err("floor", e.to_string()))?;
        if self.start_dbm < self.stop_dbm {
            return Err(config_err(
                "stop_dbm",
                format!("sweep must descend: start {} is below stop {}", self.start_dbm, self.stop_dbm),
            ));
        }
        if !(self.step_db.value() > 0.0) {
            return Err(config_err("step_db", format!("must be positive, got {}", self.step_db.value())));
        }
        if self.symbols_per_step == 0 {
            return Err(config_err("symbols_per_step", "must be at least 1"));
        }
        Ok(())
    }

    /// `floor((start - stop) / step) + 1`.
    pub fn step_count(&self) -> usize {
        let span = (self.start_dbm.value() - self.stop_dbm.value()) / self.step_db.value();
        // absorb representation error in spans like 0.3 / 0.1
        (span + 1e-9).floor() as usize + 1
    }

    pub fn rx_powers(&self) -> Vec<PowerDbm> {
        (0..self.step_count())
            .map(|k| PowerDbm::new(self.start_dbm.value() - k as f64 * self.step_db.value()).expect("finite"))
            .collect()
    }
}

/// JSON form of [`SweepConfig`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfigDoc {
    pub scheme: ModulationScheme,
    #[serde(default)]
    pub mode: NormalizationMode,
    pub floor: NoiseFloorDoc,
    pub start_dbm: f64,
    pub stop_dbm: f64,
    pub step_db: f64,
    pub symbols_per_step: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_samples")]
    pub constellation_sample_count: usize,
    #[serde(default)]
    pub labels: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseFloorDoc {
    pub bandwidth_hz: f64,
    pub noise_figure_db: f64,
    #[serde(default = "default_temperature")]
    pub temperature_k: f64,
}

fn default_samples() -> usize {
    DEFAULT_CONSTELLATION_SAMPLES
}

fn default_temperature() -> f64 {
    crate::channel::DEFAULT_TEMPERATURE_K
}

impl TryFrom<SweepConfigDoc> for SweepConfig {
    type Error = SweepError;

    fn try_from(doc: SweepConfigDoc) -> Result<Self, SweepError> {
        let f = &doc.floor;
        let floor = NoiseFloorModel::new(f.bandwidth_hz, f.noise_figure_db, f.temperature_k).map_err(|e| {
            let field = match e {
                ChannelError::Bandwidth(_) => "floor.bandwidth_hz",
                ChannelError::Temperature(_) => "floor.temperature_k",
                _ => "floor.noise_figure_db",
            };
            config_err(field, e.to_string())
        })?;
        let power = |field: &str, v: f64| PowerDbm::new(v).map_err(|e| config_err(field, e.to_string()));
        let config = SweepConfig {
            scheme: doc.scheme,
            mode: doc.mode,
            floor,
            start_dbm: power("start_dbm", doc.start_dbm)?,
            stop_dbm: power("stop_dbm", doc.stop_dbm)?,
            step_db: RatioDb::new(doc.step_db).map_err(|e| config_err("step_db", e.to_string()))?,
            symbols_per_step: doc.symbols_per_step,
            seed: doc.seed,
            constellation_sample_count: doc.constellation_sample_count,
            labels: doc.labels,
        };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryPoint {
    pub snr: RatioDb,
    pub evm_percent_theory: f64,
    pub ser_theory: f64,
    pub ber_theory: f64,
    /// False where BER is the Gray approximation `SER / log2(M)`.
    pub ber_exact: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepStepResult {
    pub rx_power: PowerDbm,
    pub snr: RatioDb,
    pub evm_percent_data_aided: f64,
    pub evm_percent_decision_directed: f64,
    pub ser: f64,
    pub ber: f64,
    pub symbol_errors: usize,
    pub bit_errors: usize,
    pub symbols: usize,
    /// Leading noisy symbols kept for plotting.
    pub sampled_points: SymbolFrame,
}

/// Gaussian tail probability, `0.5 erfc(x / sqrt 2)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

pub fn theory_point(scheme: ModulationScheme, snr: RatioDb) -> TheoryPoint {
    if snr.is_infinite() {
        return TheoryPoint { snr, evm_percent_theory: 0.0, ser_theory: 0.0, ber_theory: 0.0, ber_exact: true };
    }
    let gamma = db_to_linear(snr).expect("finite snr");
    let evm_percent_theory = 100.0 / gamma.sqrt();
    match scheme {
        ModulationScheme::Qpsk => {
            let q = q_function(gamma.sqrt());
            TheoryPoint { snr, evm_percent_theory, ser_theory: 2.0 * q - q * q, ber_theory: q, ber_exact: true }
        }
        _ => {
            let m = scheme.order() as f64;
            let per_axis = 2.0 * (1.0 - 1.0 / m.sqrt()) * q_function((3.0 * gamma / (m - 1.0)).sqrt());
            let ser = 1.0 - (1.0 - per_axis) * (1.0 - per_axis);
            TheoryPoint {
                snr,
                evm_percent_theory,
                ser_theory: ser,
                ber_theory: ser / scheme.bits_per_symbol() as f64,
                ber_exact: false,
            }
        }
    }
}

/// SplitMix64 finalizer over `(seed, index, purpose)`; gives every step its
/// own independent stream regardless of execution order.
pub fn derive_seed(seed: u64, index: u64, purpose: u64) -> u64 {
    let mut z = seed
        .wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(purpose.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const SYMBOL_STREAM: u64 = 0;
const NOISE_STREAM: u64 = 1;

/// Symbol error and EVM statistics for one link snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkSnapshot {
    pub snr: RatioDb,
    pub evm_percent_data_aided: f64,
    pub evm_percent_decision_directed: f64,
    pub symbol_errors: usize,
    pub bit_errors: usize,
    pub symbols: usize,
    pub sampled_points: SymbolFrame,
}

impl LinkSnapshot {
    pub fn ser(&self) -> f64 {
        self.symbol_errors as f64 / self.symbols as f64
    }

    pub fn ber(&self, bits_per_symbol: usize) -> f64 {
        self.bit_errors as f64 / (self.symbols * bits_per_symbol) as f64
    }
}

/// Sends `symbols` uniformly random symbols of `spec` through AWGN at `snr`.
/// `stream_seed` is expanded into separate symbol and noise streams.
pub fn simulate_link(
    spec: &ConstellationSpec,
    snr: RatioDb,
    symbols: usize,
    stream_seed: u64,
    keep_samples: usize,
) -> Result<LinkSnapshot, SweepError> {
    if symbols == 0 {
        return Err(config_err("symbols_per_step", "must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(stream_seed, 0, SYMBOL_STREAM));
    let sent_labels: Vec<usize> = (0..symbols).map(|_| rng.random_range(0..spec.order())).collect();
    let sent: SymbolFrame = sent_labels.iter().map(|&l| spec.point(l)).collect();

    let channel = AwgnChannel::new(snr, derive_seed(stream_seed, 0, NOISE_STREAM), spec.mean_power())?;
    let received = apply_awgn(&sent, &channel)?;

    let decisions = demodulate_hard(&received, spec);
    let mut symbol_errors = 0;
    let mut bit_errors = 0;
    for (&tx, &rx) in sent_labels.iter().zip(&decisions.labels) {
        if tx != rx {
            symbol_errors += 1;
            bit_errors += (spec.bits_of_label(tx) ^ spec.bits_of_label(rx)).count_ones() as usize;
        }
    }

    let data_aided = evm_report(&received, &sent, spec.ref_rms())?;
    let decision_directed = evm_decision_directed(&received, spec)?;
    let keep = keep_samples.min(symbols);
    Ok(LinkSnapshot {
        snr,
        evm_percent_data_aided: data_aided.evm_percent,
        evm_percent_decision_directed: decision_directed.evm_percent,
        symbol_errors,
        bit_errors,
        symbols,
        sampled_points: SymbolFrame::new(received.samples()[..keep].to_vec()),
    })
}

pub fn run_sweep(config: &SweepConfig) -> Result<Vec<SweepStepResult>, SweepError> {
    config.validate()?;
    let spec = ideal_points(config.scheme, config.mode);
    let floor = thermal_noise_floor(&config.floor)?;
    let bits_per_symbol = spec.bits_per_symbol();

    config
        .rx_powers()
        .into_par_iter()
        .enumerate()
        .map(|(k, rx_power)| {
            let snr = snr_from_rx_power(rx_power, floor);
            let seed = derive_seed(config.seed, k as u64, 0);
            let snap = simulate_link(&spec, snr, config.symbols_per_step, seed, config.constellation_sample_count)?;
            Ok(SweepStepResult {
                rx_power,
                snr,
                evm_percent_data_aided: snap.evm_percent_data_aided,
                evm_percent_decision_directed: snap.evm_percent_decision_directed,
                ser: snap.ser(),
                ber: snap.ber(bits_per_symbol),
                symbol_errors: snap.symbol_errors,
                bit_errors: snap.bit_errors,
                symbols: snap.symbols,
                sampled_points: snap.sampled_points,
            })
        })
        .collect()
}

pub const SWEEP_CSV_HEADER: &str =
    "rx_dbm,snr_db,evm_da_pct,evm_dd_pct,ser,ber,evm_theory_pct,ser_theory,ber_theory";

/// One row per step; floats use the shortest round-trip representation.
pub fn sweep_csv(scheme: ModulationScheme, results: &[SweepStepResult]) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for r in results {
        let t = theory_point(scheme, r.snr);
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.rx_power.value(),
            r.snr.value(),
            r.evm_percent_data_aided,
            r.evm_percent_decision_directed,
            r.ser,
            r.ber,
            t.evm_percent_theory,
            t.ser_theory,
            t.ber_theory
        );
    }
    out
}
