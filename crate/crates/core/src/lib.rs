//! RF link-quality toolkit: receiver desense from sensitivity logs, error
//! vector magnitude on QPSK/QAM constellations, and Monte Carlo Rx power
//! sweeps over an AWGN channel toward the thermal noise floor.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod desense;
pub mod evm;
pub mod io;
pub mod modulation;
pub mod plot;
pub mod sweep;
pub mod units;

pub use channel::{apply_awgn, snr_from_rx_power, thermal_noise_floor, AwgnChannel, ChannelError, NoiseFloorModel};
pub use desense::{
    compute_desense, parse_sensitivity_csv, summarize, DesenseError, DesenseRow, DesenseSummary, SensitivityRecord,
};
pub use evm::{error_vector_magnitudes, evm_decision_directed, evm_report, EvmError, EvmMode, EvmReport};
pub use modulation::{
    demodulate_hard, ideal_points, modulate, ConstellationSpec, HardDecision, ModulationError, ModulationScheme,
    NormalizationMode,
};
pub use sweep::{
    q_function, run_sweep, theory_point, SweepConfig, SweepConfigDoc, SweepError, SweepStepResult, TheoryPoint,
};
pub use units::{db_to_linear, dbm_to_mw, linear_to_db, mw_to_dbm, IqSample, PowerDbm, RatioDb, SymbolFrame, UnitError};
