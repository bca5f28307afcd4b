//! Monte Carlo checks of the link simulation against closed-form results.

use rflink_core::modulation::{ideal_points, ModulationScheme, NormalizationMode};
use rflink_core::sweep::simulate_link;
use rflink_core::{
    db_to_linear, run_sweep, theory_point, NoiseFloorModel, PowerDbm, RatioDb, SweepConfig,
};

fn sweep(scheme: ModulationScheme, bandwidth_hz: f64, start: f64, stop: f64, symbols: usize) -> SweepConfig {
    SweepConfig {
        scheme,
        mode: NormalizationMode::UnitPower,
        floor: NoiseFloorModel::at_room_temperature(bandwidth_hz, 5.0).unwrap(),
        start_dbm: PowerDbm::new(start).unwrap(),
        stop_dbm: PowerDbm::new(stop).unwrap(),
        step_db: RatioDb::new(1.0).unwrap(),
        symbols_per_step: symbols,
        seed: 17,
        constellation_sample_count: 500,
        labels: Default::default(),
    }
}

#[test]
fn decision_directed_tracks_data_aided_at_20db() {
    let spec = ideal_points(ModulationScheme::Qpsk, NormalizationMode::UnitPower);
    let snap = simulate_link(&spec, RatioDb::new(20.0).unwrap(), 1_000_000, 99, 0).unwrap();
    assert!((snap.evm_percent_decision_directed - snap.evm_percent_data_aided).abs() < 0.2);
}

#[test]
fn qam16_ser_matches_theory_at_15db() {
    let spec = ideal_points(ModulationScheme::Qam16, NormalizationMode::UnitPower);
    let snr = RatioDb::new(15.0).unwrap();
    let snap = simulate_link(&spec, snr, 1_000_000, 5, 0).unwrap();
    let theory = theory_point(ModulationScheme::Qam16, snr).ser_theory;
    assert!(((snap.ser() - theory) / theory).abs() < 0.05, "{} vs {theory}", snap.ser());
}

#[test]
fn sweep_evm_follows_closed_form() {
    let results = run_sweep(&sweep(ModulationScheme::Qpsk, 10e6, -80.0, -84.0, 1_000_000)).unwrap();
    for r in &results {
        let theory = 100.0 / db_to_linear(r.snr).unwrap().sqrt();
        assert!(((r.evm_percent_data_aided - theory) / theory).abs() < 0.03);
    }
}

#[test]
fn data_aided_evm_grows_at_least_5pct_per_db() {
    for scheme in [ModulationScheme::Qpsk, ModulationScheme::Qam16] {
        let results = run_sweep(&sweep(scheme, 10e6, -80.0, -90.0, 100_000)).unwrap();
        for w in results.windows(2) {
            assert!(
                w[1].evm_percent_data_aided > 1.05 * w[0].evm_percent_data_aided,
                "{scheme}: {} then {}",
                w[0].evm_percent_data_aided,
                w[1].evm_percent_data_aided
            );
        }
    }
}

#[test]
fn ser_agrees_with_theory_where_errors_are_plentiful() {
    let symbols = 200_000;
    // Low enough that the lower steps see hundreds of symbol errors.
    for (scheme, start) in [(ModulationScheme::Qpsk, -88.0), (ModulationScheme::Qam16, -82.0), (ModulationScheme::Qam64, -76.0)] {
        let results = run_sweep(&sweep(scheme, 10e6, start, start - 6.0, symbols)).unwrap();
        let mut checked = 0;
        for r in &results {
            let t = theory_point(scheme, r.snr);
            if t.ser_theory >= 100.0 / symbols as f64 {
                checked += 1;
                assert!(((r.ser - t.ser_theory) / t.ser_theory).abs() < 0.05, "{scheme} at {}: {} vs {}", r.snr, r.ser, t.ser_theory);
                if t.ber_exact {
                    assert!(((r.ber - t.ber_theory) / t.ber_theory).abs() < 0.05);
                }
            }
        }
        assert!(checked >= 3, "{scheme}: only {checked} steps had enough errors");
    }
}

#[test]
fn qam16_figure_d_configuration() {
    let results = run_sweep(&sweep(ModulationScheme::Qam16, 100e6, -70.0, -70.0, 50_000)).unwrap();
    assert_eq!(results.len(), 1);
    let r = &results[0];
    assert!((r.snr.value() - 18.975_187_194_228_1).abs() < 1e-9);
    assert_eq!(r.sampled_points.len(), 500);
}
