//! Python bindings. IQ samples cross the boundary as `(i, q)` tuples; all
//! errors surface as `ValueError`.

use std::collections::HashMap;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use rflink_core::desense::{emit_desense_csv, summarize};
use rflink_core::modulation::ConstellationSpec;
use rflink_core::sweep::{SweepConfig, SweepConfigDoc};
use rflink_core::{self as core, IqSample, PowerDbm, RatioDb, SymbolFrame};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn frame(samples: &[(f64, f64)]) -> SymbolFrame {
    samples.iter().map(|&(i, q)| IqSample::new(i, q)).collect()
}

fn tuples(frame: &SymbolFrame) -> Vec<(f64, f64)> {
    frame.iter().map(|s| (s.i, s.q)).collect()
}

fn snr(snr_db: f64) -> PyResult<RatioDb> {
    if snr_db == f64::INFINITY {
        Ok(RatioDb::infinite())
    } else {
        RatioDb::new(snr_db).map_err(value_err)
    }
}

#[pyfunction]
fn dbm_to_mw(dbm: f64) -> PyResult<f64> {
    core::dbm_to_mw(PowerDbm::new(dbm).map_err(value_err)?).map_err(value_err)
}

#[pyfunction]
fn mw_to_dbm(mw: f64) -> PyResult<f64> {
    Ok(core::mw_to_dbm(mw).map_err(value_err)?.value())
}

#[pyfunction]
fn db_to_linear(db: f64) -> PyResult<f64> {
    core::db_to_linear(RatioDb::new(db).map_err(value_err)?).map_err(value_err)
}

#[pyfunction]
fn linear_to_db(x: f64) -> PyResult<f64> {
    Ok(core::linear_to_db(x).map_err(value_err)?.value())
}

#[pyfunction]
fn q_function(x: f64) -> f64 {
    core::q_function(x)
}

/// Thermal noise floor in dBm: kTB plus noise figure.
#[pyfunction]
#[pyo3(signature = (bandwidth_hz, noise_figure_db=0.0, temperature_k=290.0))]
fn thermal_noise_floor(bandwidth_hz: f64, noise_figure_db: f64, temperature_k: f64) -> PyResult<f64> {
    let model = core::NoiseFloorModel::new(bandwidth_hz, noise_figure_db, temperature_k).map_err(value_err)?;
    Ok(core::thermal_noise_floor(&model).map_err(value_err)?.value())
}

/// Adds complex white Gaussian noise at `snr_db` (per symbol) relative to
/// `signal_power`. `float("inf")` returns the input unchanged.
#[pyfunction]
#[pyo3(signature = (samples, snr_db, seed=0, signal_power=1.0))]
fn apply_awgn(samples: Vec<(f64, f64)>, snr_db: f64, seed: u64, signal_power: f64) -> PyResult<Vec<(f64, f64)>> {
    let ch = core::AwgnChannel::new(snr(snr_db)?, seed, signal_power).map_err(value_err)?;
    Ok(tuples(&core::apply_awgn(&frame(&samples), &ch).map_err(value_err)?))
}

#[pyclass(name = "Constellation", module = "rflink", frozen)]
struct PyConstellation {
    spec: ConstellationSpec,
}

#[pymethods]
impl PyConstellation {
    /// `scheme` is one of QPSK, QAM16, QAM64, QAM256; `mode` is "raw" or
    /// "unit-power".
    #[new]
    #[pyo3(signature = (scheme, mode="unit-power"))]
    fn new(scheme: &str, mode: &str) -> PyResult<Self> {
        let scheme = scheme.parse().map_err(value_err)?;
        let mode = mode.parse().map_err(value_err)?;
        Ok(Self { spec: core::ideal_points(scheme, mode) })
    }

    #[getter]
    fn scheme(&self) -> &'static str {
        self.spec.scheme().name()
    }

    #[getter]
    fn order(&self) -> usize {
        self.spec.order()
    }

    #[getter]
    fn bits_per_symbol(&self) -> usize {
        self.spec.bits_per_symbol()
    }

    #[getter]
    fn ref_rms(&self) -> f64 {
        self.spec.ref_rms()
    }

    /// Ideal points indexed by symbol label.
    #[getter]
    fn points(&self) -> Vec<(f64, f64)> {
        self.spec.points().iter().map(|p| (p.i, p.q)).collect()
    }

    fn modulate(&self, bits: Vec<u8>) -> PyResult<Vec<(f64, f64)>> {
        Ok(tuples(&core::modulate(&bits, &self.spec).map_err(value_err)?))
    }

    /// Returns `(bits, decided_points)`; bits come back as a list of ints.
    fn demodulate(&self, samples: Vec<(f64, f64)>) -> (Vec<u32>, Vec<(f64, f64)>) {
        let d = core::demodulate_hard(&frame(&samples), &self.spec);
        (d.bits.into_iter().map(u32::from).collect(), tuples(&d.decided))
    }

    fn __repr__(&self) -> String {
        format!("Constellation({:?}, order={})", self.spec.scheme().name(), self.spec.order())
    }
}

#[pyclass(name = "EvmReport", module = "rflink", frozen, get_all)]
struct PyEvmReport {
    per_symbol_error: Vec<f64>,
    evm_rms: f64,
    evm_percent: f64,
    evm_db: f64,
    num_symbols: usize,
    mode: &'static str,
    ref_rms: f64,
}

#[pymethods]
impl PyEvmReport {
    fn __repr__(&self) -> String {
        format!("EvmReport(evm_percent={:.4}, evm_db={:.4}, num_symbols={})", self.evm_percent, self.evm_db, self.num_symbols)
    }
}

impl From<core::EvmReport> for PyEvmReport {
    fn from(r: core::EvmReport) -> Self {
        Self {
            per_symbol_error: r.per_symbol_error,
            evm_rms: r.evm_rms,
            evm_percent: r.evm_percent,
            evm_db: r.evm_db,
            num_symbols: r.num_symbols,
            mode: match r.mode {
                core::EvmMode::DataAided => "data-aided",
                core::EvmMode::DecisionDirected => "decision-directed",
            },
            ref_rms: r.ref_rms,
        }
    }
}

/// Data-aided EVM. `ref_rms` defaults to the RMS magnitude of `reference`.
#[pyfunction]
#[pyo3(signature = (measured, reference, ref_rms=None))]
fn evm(measured: Vec<(f64, f64)>, reference: Vec<(f64, f64)>, ref_rms: Option<f64>) -> PyResult<PyEvmReport> {
    let reference = frame(&reference);
    let ref_rms = match ref_rms {
        Some(v) => v,
        None => reference.rms().ok_or_else(|| value_err("reference is empty"))?,
    };
    Ok(core::evm_report(&frame(&measured), &reference, ref_rms).map_err(value_err)?.into())
}

#[pyfunction]
fn evm_decision_directed(measured: Vec<(f64, f64)>, constellation: &PyConstellation) -> PyResult<PyEvmReport> {
    Ok(core::evm_decision_directed(&frame(&measured), &constellation.spec).map_err(value_err)?.into())
}

#[pyclass(name = "DesenseRow", module = "rflink", frozen, get_all)]
struct PyDesenseRow {
    band: String,
    freq_mhz: f64,
    delta_db: HashMap<String, f64>,
}

fn desense_rows(off_csv: &str, on_csv: &str) -> PyResult<Vec<core::DesenseRow>> {
    let off = core::parse_sensitivity_csv(off_csv).map_err(value_err)?;
    let on = core::parse_sensitivity_csv(on_csv).map_err(value_err)?;
    core::compute_desense(&off, &on).map_err(value_err)
}

/// Desense (ON minus OFF) from the text of two sensitivity CSV logs.
#[pyfunction]
fn compute_desense(off_csv: &str, on_csv: &str) -> PyResult<Vec<PyDesenseRow>> {
    Ok(desense_rows(off_csv, on_csv)?
        .into_iter()
        .map(|r| PyDesenseRow {
            band: r.band,
            freq_mhz: r.freq_mhz,
            delta_db: r.delta_db.into_iter().map(|(k, v)| (k, v.value())).collect(),
        })
        .collect())
}

/// Desense table as CSV text, rounded to two decimals.
#[pyfunction]
fn desense_csv(off_csv: &str, on_csv: &str) -> PyResult<String> {
    Ok(emit_desense_csv(&desense_rows(off_csv, on_csv)?))
}

/// Per-antenna `{antenna: (min_db, mean_db, max_db, worst_freq_mhz)}`.
#[pyfunction]
fn desense_summary(off_csv: &str, on_csv: &str) -> PyResult<HashMap<String, (f64, f64, f64, f64)>> {
    let summary = summarize(&desense_rows(off_csv, on_csv)?).map_err(value_err)?;
    Ok(summary
        .antennas
        .into_iter()
        .map(|a| (a.antenna, (a.min_db, a.mean_db, a.max_db, a.worst_freq_mhz)))
        .collect())
}

#[pyclass(name = "SweepStep", module = "rflink", frozen, get_all)]
struct PySweepStep {
    rx_dbm: f64,
    snr_db: f64,
    evm_percent_data_aided: f64,
    evm_percent_decision_directed: f64,
    ser: f64,
    ber: f64,
    ser_theory: f64,
    ber_theory: f64,
    evm_percent_theory: f64,
    sampled_points: Vec<(f64, f64)>,
}

#[pymethods]
impl PySweepStep {
    fn __repr__(&self) -> String {
        format!(
            "SweepStep(rx_dbm={}, snr_db={:.3}, evm_dd={:.3}%, ser={:e})",
            self.rx_dbm, self.snr_db, self.evm_percent_decision_directed, self.ser
        )
    }
}

/// Runs a sweep from a JSON config (same schema as `rflink sweep`).
#[pyfunction]
fn run_sweep(py: Python<'_>, config_json: &str) -> PyResult<Vec<PySweepStep>> {
    let doc: SweepConfigDoc = serde_json::from_str(config_json).map_err(value_err)?;
    let config = SweepConfig::try_from(doc).map_err(value_err)?;
    let results = py.detach(|| core::run_sweep(&config)).map_err(value_err)?;
    Ok(results
        .into_iter()
        .map(|r| {
            let t = core::theory_point(config.scheme, r.snr);
            PySweepStep {
                rx_dbm: r.rx_power.value(),
                snr_db: r.snr.value(),
                evm_percent_data_aided: r.evm_percent_data_aided,
                evm_percent_decision_directed: r.evm_percent_decision_directed,
                ser: r.ser,
                ber: r.ber,
                ser_theory: t.ser_theory,
                ber_theory: t.ber_theory,
                evm_percent_theory: t.evm_percent_theory,
                sampled_points: tuples(&r.sampled_points),
            }
        })
        .collect())
}

/// `(evm_percent, ser, ber)` predicted for `scheme` at `snr_db`.
#[pyfunction]
fn theory_point(scheme: &str, snr_db: f64) -> PyResult<(f64, f64, f64)> {
    let t = core::theory_point(scheme.parse().map_err(value_err)?, snr(snr_db)?);
    Ok((t.evm_percent_theory, t.ser_theory, t.ber_theory))
}

#[pymodule]
fn rflink(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyConstellation>()?;
    m.add_class::<PyEvmReport>()?;
    m.add_class::<PyDesenseRow>()?;
    m.add_class::<PySweepStep>()?;
    m.add_function(wrap_pyfunction!(dbm_to_mw, m)?)?;
    m.add_function(wrap_pyfunction!(mw_to_dbm, m)?)?;
    m.add_function(wrap_pyfunction!(db_to_linear, m)?)?;
    m.add_function(wrap_pyfunction!(linear_to_db, m)?)?;
    m.add_function(wrap_pyfunction!(q_function, m)?)?;
    m.add_function(wrap_pyfunction!(thermal_noise_floor, m)?)?;
    m.add_function(wrap_pyfunction!(apply_awgn, m)?)?;
    m.add_function(wrap_pyfunction!(evm, m)?)?;
    m.add_function(wrap_pyfunction!(evm_decision_directed, m)?)?;
    m.add_function(wrap_pyfunction!(compute_desense, m)?)?;
    m.add_function(wrap_pyfunction!(desense_csv, m)?)?;
    m.add_function(wrap_pyfunction!(desense_summary, m)?)?;
    m.add_function(wrap_pyfunction!(run_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(theory_point, m)?)?;
    Ok(())
}
