//! Square constellations (QPSK and 16/64/256-QAM) with per-axis Gray labels.
//!
//! Symbol labels index the lattice row-major: `label = i_index * L + q_index`,
//! where `L = sqrt(order)` and level index `j` sits at amplitude `2j - (L - 1)`
//! in raw units. Each label carries a bit group; the high half of the group is
//! the Gray code of the I index, the low half the Gray code of the Q index.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::units::{IqSample, SymbolFrame};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModulationError {
    #[error("bit count {len} is not a multiple of {bits_per_symbol} bits per symbol")]
    BitCount { len: usize, bits_per_symbol: usize },
    #[error("bit value {0} at position {1} is not 0 or 1")]
    BitValue(u8, usize),
    #[error("unknown modulation scheme {0:?}")]
    UnknownScheme(String),
    #[error("unknown normalization mode {0:?}")]
    UnknownMode(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModulationScheme {
    #[serde(rename = "QPSK")]
    Qpsk,
    #[serde(rename = "QAM16")]
    Qam16,
    #[serde(rename = "QAM64")]
    Qam64,
    #[serde(rename = "QAM256")]
    Qam256,
}

impl ModulationScheme {
    pub const ALL: [ModulationScheme; 4] = [Self::Qpsk, Self::Qam16, Self::Qam64, Self::Qam256];

    pub fn bits_per_symbol(self) -> usize {
        match self {
            Self::Qpsk => 2,
            Self::Qam16 => 4,
            Self::Qam64 => 6,
            Self::Qam256 => 8,
        }
    }

    pub fn order(self) -> usize {
        1 << self.bits_per_symbol()
    }

    /// Amplitude levels per axis.
    pub fn levels_per_axis(self) -> usize {
        1 << (self.bits_per_symbol() / 2)
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Qpsk => "QPSK",
            Self::Qam16 => "QAM16",
            Self::Qam64 => "QAM64",
            Self::Qam256 => "QAM256",
        }
    }
}

impl fmt::Display for ModulationScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModulationScheme {
    type Err = ModulationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().replace(['-', '_'], "").as_str() {
            "QPSK" | "QAM4" => Ok(Self::Qpsk),
            "QAM16" | "16QAM" => Ok(Self::Qam16),
            "QAM64" | "64QAM" => Ok(Self::Qam64),
            "QAM256" | "256QAM" => Ok(Self::Qam256),
            _ => Err(ModulationError::UnknownScheme(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum NormalizationMode {
    /// Odd-integer lattice levels; QPSK sits at (±1, ±1).
    Raw,
    /// Lattice scaled to unit mean symbol power.
    #[default]
    UnitPower,
}

impl FromStr for NormalizationMode {
    type Err = ModulationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "raw" => Ok(Self::Raw),
            "unitpower" | "unit" => Ok(Self::UnitPower),
            _ => Err(ModulationError::UnknownMode(s.to_string())),
        }
    }
}

fn gray(j: usize) -> usize {
    j ^ (j >> 1)
}

/// Ideal points and bit labels of one scheme under one normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstellationSpec {
    scheme: ModulationScheme,
    mode: NormalizationMode,
    points: Vec<IqSample>,
    /// label -> bit group (MSB first within `bits_per_symbol` bits)
    bits_of_label: Vec<u16>,
    /// bit group -> label
    label_of_bits: Vec<u16>,
    /// per-axis amplitude of level index j
    axis_levels: Vec<f64>,
    ref_rms: f64,
}

impl ConstellationSpec {
    pub fn scheme(&self) -> ModulationScheme {
        self.scheme
    }

    pub fn mode(&self) -> NormalizationMode {
        self.mode
    }

    pub fn points(&self) -> &[IqSample] {
        &self.points
    }

    pub fn order(&self) -> usize {
        self.points.len()
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.scheme.bits_per_symbol()
    }

    /// `sqrt(mean(|point|^2))`.
    pub fn ref_rms(&self) -> f64 {
        self.ref_rms
    }

    /// Mean symbol power, `ref_rms^2`.
    pub fn mean_power(&self) -> f64 {
        self.ref_rms * self.ref_rms
    }

    pub fn point(&self, label: usize) -> IqSample {
        self.points[label]
    }

    pub fn bits_of_label(&self, label: usize) -> u16 {
        self.bits_of_label[label]
    }

    pub fn label_of_bits(&self, bits: u16) -> usize {
        self.label_of_bits[bits as usize] as usize
    }

    /// Lattice coordinates `(i_index, q_index)` of a label.
    pub fn lattice_index(&self, label: usize) -> (usize, usize) {
        let l = self.scheme.levels_per_axis();
        (label / l, label % l)
    }

    /// Nearest label to `sample`; equidistant candidates resolve to the lowest
    /// label.
    pub fn nearest_label(&self, sample: IqSample) -> usize {
        let l = self.axis_levels.len();
        self.nearest_level(sample.i) * l + self.nearest_level(sample.q)
    }

    /// Squared distance separates per axis, so the lowest-label nearest point
    /// is the lowest nearest I index paired with the lowest nearest Q index.
    fn nearest_level(&self, x: f64) -> usize {
        let levels = &self.axis_levels;
        let last = levels.len() - 1;
        let step = levels[1] - levels[0];
        let t = ((x - levels[0]) / step).floor();
        let lo = if t.is_nan() || t < 0.0 {
            0
        } else if t >= last as f64 {
            last
        } else {
            t as usize
        };
        if lo < last && (x - levels[lo + 1]).abs() < (x - levels[lo]).abs() {
            lo + 1
        } else {
            lo
        }
    }
}

pub fn ideal_points(scheme: ModulationScheme, mode: NormalizationMode) -> ConstellationSpec {
    let l = scheme.levels_per_axis();
    let half_bits = scheme.bits_per_symbol() / 2;
    let raw_levels: Vec<f64> = (0..l).map(|j| (2 * j) as f64 - (l - 1) as f64).collect();

    // Mean power of the raw lattice, 2(M - 1)/3, taken from the levels directly.
    let per_axis = raw_levels.iter().map(|a| a * a).sum::<f64>() / l as f64;
    let raw_rms = (2.0 * per_axis).sqrt();
    let scale = match mode {
        NormalizationMode::Raw => 1.0,
        NormalizationMode::UnitPower => 1.0 / raw_rms,
    };
    let axis_levels: Vec<f64> = raw_levels.iter().map(|a| a * scale).collect();

    let order = scheme.order();
    let mut points = Vec::with_capacity(order);
    let mut bits_of_label = Vec::with_capacity(order);
    let mut label_of_bits = vec![0u16; order];
    for ii in 0..l {
        for qi in 0..l {
            let label = ii * l + qi;
            let bits = ((gray(ii) << half_bits) | gray(qi)) as u16;
            points.push(IqSample::new(axis_levels[ii], axis_levels[qi]));
            bits_of_label.push(bits);
            label_of_bits[bits as usize] = label as u16;
        }
    }

    ConstellationSpec {
        scheme,
        mode,
        points,
        bits_of_label,
        label_of_bits,
        axis_levels,
        ref_rms: raw_rms * scale,
    }
}

/// Packs a bit slice (values 0/1) into symbol labels.
pub fn bits_to_labels(bits: &[u8], spec: &ConstellationSpec) -> Result<Vec<usize>, ModulationError> {
    let k = spec.bits_per_symbol();
    if !bits.len().is_multiple_of(k) {
        return Err(ModulationError::BitCount { len: bits.len(), bits_per_symbol: k });
    }
    if let Some((pos, &b)) = bits.iter().enumerate().find(|(_, &b)| b > 1) {
        return Err(ModulationError::BitValue(b, pos));
    }
    Ok(bits
        .chunks_exact(k)
        .map(|group| {
            let word = group.iter().fold(0u16, |acc, &b| (acc << 1) | b as u16);
            spec.label_of_bits(word)
        })
        .collect())
}

/// Appends the bit group of `label` to `out`, MSB first.
pub fn push_label_bits(label: usize, spec: &ConstellationSpec, out: &mut Vec<u8>) {
    let k = spec.bits_per_symbol();
    let word = spec.bits_of_label(label);
    out.extend((0..k).rev().map(|s| ((word >> s) & 1) as u8));
}

pub fn modulate(bits: &[u8], spec: &ConstellationSpec) -> Result<SymbolFrame, ModulationError> {
    let labels = bits_to_labels(bits, spec)?;
    Ok(labels.into_iter().map(|label| spec.point(label)).collect())
}

/// Hard decision of each sample to its nearest constellation point.
#[derive(Debug, Clone, PartialEq)]
pub struct HardDecision {
    pub bits: Vec<u8>,
    pub labels: Vec<usize>,
    pub decided: SymbolFrame,
}

pub fn demodulate_hard(frame: &SymbolFrame, spec: &ConstellationSpec) -> HardDecision {
    let labels: Vec<usize> = frame.iter().map(|&s| spec.nearest_label(s)).collect();
    let mut bits = Vec::with_capacity(labels.len() * spec.bits_per_symbol());
    for &label in &labels {
        push_label_bits(label, spec, &mut bits);
    }
    let decided = labels.iter().map(|&label| spec.point(label)).collect();
    HardDecision { bits, labels, decided }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute_force_nearest(spec: &ConstellationSpec, s: IqSample) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (label, &p) in spec.points().iter().enumerate() {
            let d = (s - p).power();
            if d < best_d {
                best = label;
                best_d = d;
            }
        }
        best
    }

    #[test]
    fn qpsk_raw_matches_reference_points() {
        let spec = ideal_points(ModulationScheme::Qpsk, NormalizationMode::Raw);
        let mut got: Vec<(i32, i32)> = spec.points().iter().map(|p| (p.i as i32, p.q as i32)).collect();
        got.sort();
        assert_eq!(got, vec![(-1, -1), (-1, 1), (1, -1), (1, 1)]);
        assert!((spec.ref_rms() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn qpsk_unit_power() {
        let spec = ideal_points(ModulationScheme::Qpsk, NormalizationMode::UnitPower);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        for p in spec.points() {
            assert!((p.i.abs() - h).abs() < 1e-15 && (p.q.abs() - h).abs() < 1e-15);
        }
    }

    #[test]
    fn qam16_unit_power_is_raw_over_sqrt10() {
        let raw = ideal_points(ModulationScheme::Qam16, NormalizationMode::Raw);
        let mean_power = raw.points().iter().map(|p| p.power()).sum::<f64>() / 16.0;
        assert_eq!(mean_power, 10.0);
        let unit = ideal_points(ModulationScheme::Qam16, NormalizationMode::UnitPower);
        for (r, u) in raw.points().iter().zip(unit.points()) {
            assert!((r.i / 10f64.sqrt() - u.i).abs() < 1e-15);
            assert!((r.q / 10f64.sqrt() - u.q).abs() < 1e-15);
        }
    }

    #[test]
    fn raw_levels_per_scheme() {
        for (scheme, max) in [
            (ModulationScheme::Qpsk, 1.0),
            (ModulationScheme::Qam16, 3.0),
            (ModulationScheme::Qam64, 7.0),
            (ModulationScheme::Qam256, 15.0),
        ] {
            let spec = ideal_points(scheme, NormalizationMode::Raw);
            assert_eq!(spec.order(), scheme.order());
            let peak = spec.points().iter().map(|p| p.i.abs()).fold(0.0, f64::max);
            assert_eq!(peak, max);
            for p in spec.points() {
                assert_eq!(p.i.rem_euclid(2.0), 1.0);
                assert_eq!(p.q.rem_euclid(2.0), 1.0);
            }
        }
    }

    #[test]
    fn unit_power_exhaustive() {
        for scheme in ModulationScheme::ALL {
            let spec = ideal_points(scheme, NormalizationMode::UnitPower);
            let mean = spec.points().iter().map(|p| p.power()).sum::<f64>() / spec.order() as f64;
            assert!((mean - 1.0).abs() < 1e-12, "{scheme}: {mean}");
            assert!((spec.ref_rms() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn points_distinct_and_labels_bijective() {
        for scheme in ModulationScheme::ALL {
            let spec = ideal_points(scheme, NormalizationMode::Raw);
            for a in 0..spec.order() {
                assert_eq!(spec.label_of_bits(spec.bits_of_label(a)), a);
                for b in a + 1..spec.order() {
                    assert_ne!(spec.point(a), spec.point(b));
                }
            }
        }
    }

    #[test]
    fn gray_adjacency_exhaustive() {
        for scheme in ModulationScheme::ALL {
            let spec = ideal_points(scheme, NormalizationMode::Raw);
            let mut pairs = 0;
            for a in 0..spec.order() {
                for b in 0..spec.order() {
                    let (ai, aq) = spec.lattice_index(a);
                    let (bi, bq) = spec.lattice_index(b);
                    let adjacent = (ai == bi && aq.abs_diff(bq) == 1) || (aq == bq && ai.abs_diff(bi) == 1);
                    if adjacent {
                        pairs += 1;
                        let diff = spec.bits_of_label(a) ^ spec.bits_of_label(b);
                        assert_eq!(diff.count_ones(), 1, "{scheme}: labels {a} and {b}");
                    }
                }
            }
            let l = scheme.levels_per_axis();
            assert_eq!(pairs, 2 * 2 * l * (l - 1));
        }
    }

    #[test]
    fn qpsk_gray_sequence_gives_distinct_points() {
        let spec = ideal_points(ModulationScheme::Qpsk, NormalizationMode::Raw);
        let frame = modulate(&[0, 0, 0, 1, 1, 1, 1, 0], &spec).unwrap();
        assert_eq!(frame.len(), 4);
        for a in 0..4 {
            for b in a + 1..4 {
                assert_ne!(frame[a], frame[b]);
            }
        }
    }

    #[test]
    fn modulate_edge_cases() {
        let spec = ideal_points(ModulationScheme::Qam16, NormalizationMode::UnitPower);
        assert!(modulate(&[], &spec).unwrap().is_empty());
        assert_eq!(
            modulate(&[0, 1, 1], &spec),
            Err(ModulationError::BitCount { len: 3, bits_per_symbol: 4 })
        );
        assert_eq!(modulate(&[0, 2, 1, 0], &spec), Err(ModulationError::BitValue(2, 1)));
    }

    #[test]
    fn hard_decision_examples() {
        let spec = ideal_points(ModulationScheme::Qpsk, NormalizationMode::Raw);
        let d = demodulate_hard(&SymbolFrame::new(vec![IqSample::new(0.9, 1.1)]), &spec);
        assert_eq!(d.decided[0], IqSample::new(1.0, 1.0));

        let origin = IqSample::new(0.0, 0.0);
        let d = demodulate_hard(&SymbolFrame::new(vec![origin]), &spec);
        assert_eq!(d.labels[0], 0);
        assert_eq!(d.labels[0], brute_force_nearest(&spec, origin));
    }

    #[test]
    fn ties_resolve_to_lowest_label() {
        // Midpoints between lattice levels on both axes, including the outer edges.
        for scheme in ModulationScheme::ALL {
            let spec = ideal_points(scheme, NormalizationMode::Raw);
            let l = scheme.levels_per_axis() as i32;
            for a in -l..=l {
                for b in -l..=l {
                    let s = IqSample::new((2 * a) as f64, (2 * b) as f64);
                    assert_eq!(spec.nearest_label(s), brute_force_nearest(&spec, s), "{scheme} {s:?}");
                }
            }
        }
    }

    #[test]
    fn exact_points_decode_to_themselves() {
        for scheme in ModulationScheme::ALL {
            let spec = ideal_points(scheme, NormalizationMode::UnitPower);
            let frame = SymbolFrame::new(spec.points().to_vec());
            let d = demodulate_hard(&frame, &spec);
            assert_eq!(d.decided, frame);
            assert_eq!(d.labels, (0..spec.order()).collect::<Vec<_>>());
        }
    }

    #[test]
    fn round_trip_random_bits() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for scheme in ModulationScheme::ALL {
            for mode in [NormalizationMode::Raw, NormalizationMode::UnitPower] {
                let spec = ideal_points(scheme, mode);
                let n = 10_000 - 10_000 % spec.bits_per_symbol() + spec.bits_per_symbol();
                let bits: Vec<u8> = (0..n).map(|_| rng.random_range(0..2)).collect();
                let frame = modulate(&bits, &spec).unwrap();
                assert_eq!(frame.len(), n / spec.bits_per_symbol());
                assert_eq!(demodulate_hard(&frame, &spec).bits, bits);
            }
        }
    }

    #[test]
    fn slicer_matches_brute_force_on_noisy_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for scheme in ModulationScheme::ALL {
            let spec = ideal_points(scheme, NormalizationMode::UnitPower);
            for _ in 0..1000 {
                let base = spec.point(rng.random_range(0..spec.order()));
                let s = base + IqSample::new(rng.random_range(-0.6..0.6), rng.random_range(-0.6..0.6));
                assert_eq!(spec.nearest_label(s), brute_force_nearest(&spec, s));
            }
        }
    }

    #[test]
    fn parse_names() {
        assert_eq!("qpsk".parse::<ModulationScheme>().unwrap(), ModulationScheme::Qpsk);
        assert_eq!("16-QAM".parse::<ModulationScheme>().unwrap(), ModulationScheme::Qam16);
        assert!("8PSK".parse::<ModulationScheme>().is_err());
        assert_eq!("unit_power".parse::<NormalizationMode>().unwrap(), NormalizationMode::UnitPower);
    }
}
