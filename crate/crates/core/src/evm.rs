//! Error vector magnitude.
//!
//! Per-symbol error is `sqrt((I_meas - I_ref)^2 + (Q_meas - Q_ref)^2)`, the RMS
//! is taken over symbols, and the percentage divides by the reference RMS
//! magnitude. With raw QPSK the reference RMS is `sqrt(2)`.

use thiserror::Error;

use crate::modulation::{demodulate_hard, ConstellationSpec};
use crate::units::SymbolFrame;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvmError {
    #[error("measured frame has {meas} symbols but reference has {reference}")]
    LengthMismatch { meas: usize, reference: usize },
    #[error("EVM of an empty frame is undefined")]
    EmptyFrame,
    #[error("reference RMS must be positive and finite, got {0}")]
    BadRefRms(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvmMode {
    /// Reference symbols known a priori.
    DataAided,
    /// Reference taken from nearest-point decisions on the measurement.
    DecisionDirected,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvmReport {
    pub per_symbol_error: Vec<f64>,
    /// RMS error magnitude, in the units of the constellation.
    pub evm_rms: f64,
    pub evm_percent: f64,
    /// `20 log10(evm_rms / ref_rms)`; `-inf` when the error is zero.
    pub evm_db: f64,
    pub num_symbols: usize,
    pub mode: EvmMode,
    pub ref_rms: f64,
}

pub fn error_vector_magnitudes(meas: &SymbolFrame, reference: &SymbolFrame) -> Result<Vec<f64>, EvmError> {
    if meas.len() != reference.len() {
        return Err(EvmError::LengthMismatch { meas: meas.len(), reference: reference.len() });
    }
    if meas.is_empty() {
        return Err(EvmError::EmptyFrame);
    }
    Ok(meas
        .iter()
        .zip(reference)
        .map(|(m, r)| {
            let di = m.i - r.i;
            let dq = m.q - r.q;
            (di * di + dq * dq).sqrt()
        })
        .collect())
}

/// Data-aided EVM against `reference`, normalized by `ref_rms`.
pub fn evm_report(meas: &SymbolFrame, reference: &SymbolFrame, ref_rms: f64) -> Result<EvmReport, EvmError> {
    report_with_mode(meas, reference, ref_rms, EvmMode::DataAided)
}

/// EVM against the nearest ideal points of `spec`.
pub fn evm_decision_directed(meas: &SymbolFrame, spec: &ConstellationSpec) -> Result<EvmReport, EvmError> {
    if meas.is_empty() {
        return Err(EvmError::EmptyFrame);
    }
    let decided = demodulate_hard(meas, spec).decided;
    report_with_mode(meas, &decided, spec.ref_rms(), EvmMode::DecisionDirected)
}

fn report_with_mode(
    meas: &SymbolFrame,
    reference: &SymbolFrame,
    ref_rms: f64,
    mode: EvmMode,
) -> Result<EvmReport, EvmError> {
    if !(ref_rms > 0.0 && ref_rms.is_finite()) {
        return Err(EvmError::BadRefRms(ref_rms));
    }
    let per_symbol_error = error_vector_magnitudes(meas, reference)?;
    let n = per_symbol_error.len();
    let mean_sq = per_symbol_error.iter().map(|e| e * e).sum::<f64>() / n as f64;
    let evm_rms = mean_sq.sqrt();
    let ratio = evm_rms / ref_rms;
    Ok(EvmReport {
        per_symbol_error,
        evm_rms,
        evm_percent: ratio * 100.0,
        evm_db: 20.0 * ratio.log10(),
        num_symbols: n,
        mode,
        ref_rms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modulation::{ideal_points, ModulationScheme, NormalizationMode};
    use crate::units::IqSample;
    use proptest::prelude::*;

    fn qpsk4() -> (SymbolFrame, SymbolFrame) {
        let reference = SymbolFrame::from_components(&[1.0, -1.0, -1.0, 1.0], &[1.0, 1.0, -1.0, -1.0]).unwrap();
        let meas = SymbolFrame::from_components(&[0.9, -1.1, -0.95, 1.05], &[1.1, 0.95, -1.05, -0.9]).unwrap();
        (meas, reference)
    }

    #[test]
    fn per_symbol_magnitudes_qpsk4() {
        let (meas, reference) = qpsk4();
        let e = error_vector_magnitudes(&meas, &reference).unwrap();
        let expected = [0.02f64.sqrt(), 0.0125f64.sqrt(), 0.005f64.sqrt(), 0.0125f64.sqrt()];
        for (got, want) in e.iter().zip(expected) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn report_qpsk4() {
        let (meas, reference) = qpsk4();
        let r = evm_report(&meas, &reference, 2f64.sqrt()).unwrap();
        // sqrt(0.0125) and sqrt(0.0125)/sqrt(2)*100, 30-digit evaluation
        assert!((r.evm_rms - 0.111_803_398_874_989_48).abs() < 1e-12);
        assert!((r.evm_percent - 7.905_694_150_420_948).abs() < 1e-10);
        assert!((r.evm_db - -22.041_199_826_559_25).abs() < 1e-9);
        assert_eq!(r.num_symbols, 4);
        assert_eq!(r.mode, EvmMode::DataAided);
    }

    #[test]
    fn identical_frames_give_zero() {
        let (_, reference) = qpsk4();
        let r = evm_report(&reference, &reference, 2f64.sqrt()).unwrap();
        assert_eq!(r.evm_percent, 0.0);
        assert!(r.per_symbol_error.iter().all(|&e| e == 0.0));
        assert_eq!(r.evm_db, f64::NEG_INFINITY);
    }

    #[test]
    fn unit_offset() {
        let meas = SymbolFrame::new(vec![IqSample::new(1.0, 0.0)]);
        let reference = SymbolFrame::new(vec![IqSample::new(0.0, 0.0)]);
        assert_eq!(error_vector_magnitudes(&meas, &reference).unwrap(), vec![1.0]);
    }

    #[test]
    fn constant_error_magnitude() {
        let e = 0.037;
        let reference: SymbolFrame = (0..8).map(|k| IqSample::new(k as f64, -(k as f64))).collect();
        let meas: SymbolFrame = reference
            .iter()
            .enumerate()
            .map(|(k, &r)| {
                let phi = k as f64 * 0.7;
                r + IqSample::new(e * phi.cos(), e * phi.sin())
            })
            .collect();
        let r = evm_report(&meas, &reference, 1.0).unwrap();
        assert!((r.evm_percent - 100.0 * e).abs() < 1e-12);
    }

    #[test]
    fn error_paths() {
        let (meas, reference) = qpsk4();
        let short = SymbolFrame::new(reference.samples()[..3].to_vec());
        assert_eq!(
            error_vector_magnitudes(&meas, &short),
            Err(EvmError::LengthMismatch { meas: 4, reference: 3 })
        );
        let empty = SymbolFrame::default();
        assert_eq!(error_vector_magnitudes(&empty, &empty), Err(EvmError::EmptyFrame));
        assert_eq!(evm_report(&meas, &reference, 0.0), Err(EvmError::BadRefRms(0.0)));
        assert!(evm_report(&meas, &reference, -1.0).is_err());
        let spec = ideal_points(ModulationScheme::Qpsk, NormalizationMode::Raw);
        assert_eq!(evm_decision_directed(&empty, &spec), Err(EvmError::EmptyFrame));
    }

    #[test]
    fn decision_directed_noiseless_and_qpsk4() {
        let spec = ideal_points(ModulationScheme::Qam64, NormalizationMode::UnitPower);
        let frame = SymbolFrame::new(spec.points().to_vec());
        assert_eq!(evm_decision_directed(&frame, &spec).unwrap().evm_percent, 0.0);

        // The four-symbol example measurements decide onto their own references.
        let (meas, reference) = qpsk4();
        let qpsk = ideal_points(ModulationScheme::Qpsk, NormalizationMode::Raw);
        let dd = evm_decision_directed(&meas, &qpsk).unwrap();
        let da = evm_report(&meas, &reference, qpsk.ref_rms()).unwrap();
        assert_eq!(dd.evm_percent, da.evm_percent);
        assert_eq!(dd.mode, EvmMode::DecisionDirected);
    }

    fn two_pass_rms(meas: &SymbolFrame, reference: &SymbolFrame) -> f64 {
        let mut acc = 0.0;
        for k in 0..meas.len() {
            let d = meas[k] - reference[k];
            acc += d.i * d.i + d.q * d.q;
        }
        (acc / meas.len() as f64).sqrt()
    }

    type Pairs = Vec<(f64, f64)>;

    fn frame_strategy() -> impl Strategy<Value = (Pairs, Pairs)> {
        (1usize..64).prop_flat_map(|n| {
            (
                prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), n),
                prop::collection::vec((-0.5f64..0.5, -0.5f64..0.5), n),
            )
        })
    }

    proptest! {
        #[test]
        fn scale_property((_, errs) in frame_strategy(), c in 0.01f64..100.0) {
            // Reference at the origin so the error vectors are exactly the inputs.
            let reference: SymbolFrame = errs.iter().map(|_| IqSample::default()).collect();
            let base: SymbolFrame = errs.iter().map(|&(i, q)| IqSample::new(i, q)).collect();
            let scaled: SymbolFrame = errs.iter().map(|&(i, q)| IqSample::new(i * c, q * c)).collect();
            let a = evm_report(&base, &reference, 1.0).unwrap().evm_rms;
            let b = evm_report(&scaled, &reference, 1.0).unwrap().evm_rms;
            prop_assume!(a > 1e-9);
            prop_assert!(((b - c * a) / (c * a)).abs() < 1e-12);
        }

        #[test]
        fn matches_two_pass_oracle((refs, errs) in frame_strategy(), ref_rms in 0.1f64..10.0) {
            let reference: SymbolFrame = refs.iter().map(|&(i, q)| IqSample::new(i, q)).collect();
            let meas: SymbolFrame = reference.iter().zip(&errs).map(|(&r, &(i, q))| r + IqSample::new(i, q)).collect();
            let r = evm_report(&meas, &reference, ref_rms).unwrap();
            let oracle = two_pass_rms(&meas, &reference);
            prop_assert!((r.evm_rms - oracle).abs() <= 1e-12 * oracle.max(1.0));
            prop_assert!((r.evm_percent - r.evm_rms / ref_rms * 100.0).abs() <= 1e-12 * r.evm_percent.max(1.0));
            if r.evm_percent > 0.0 {
                prop_assert!((r.evm_db - 20.0 * (r.evm_percent / 100.0).log10()).abs() < 1e-9);
            }
        }

        #[test]
        fn decision_directed_never_exceeds_data_aided(
            labels in prop::collection::vec(0usize..16, 1..200),
            noise in prop::collection::vec((-0.8f64..0.8, -0.8f64..0.8), 200),
        ) {
            let spec = ideal_points(ModulationScheme::Qam16, NormalizationMode::UnitPower);
            let sent: SymbolFrame = labels.iter().map(|&l| spec.point(l)).collect();
            let meas: SymbolFrame = sent.iter().zip(&noise).map(|(&s, &(i, q))| s + IqSample::new(i, q)).collect();
            let da = evm_report(&meas, &sent, spec.ref_rms()).unwrap();
            let dd = evm_decision_directed(&meas, &spec).unwrap();
            prop_assert!(dd.evm_rms <= da.evm_rms + 1e-15);
        }
    }
}
