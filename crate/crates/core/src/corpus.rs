//! Seeded test corpus: constructed sequences with planted spectra, and
//! forced systems with prescribed peripheral spectra.

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{ForcingKind, ForcingSpec, SystemSpec};
use crate::error::Result;
use crate::io::write_json;
use crate::linalg::{c, CVector, Complex};
use crate::random::{self, SeededRng};
use crate::sequence::{angular_distance, DecaySpec, ModeSpec, SequenceSpec};

pub const DEFAULT_CORPUS_SIZE: usize = 30;
/// Minimum angular separation between planted modes.
pub const MIN_MODE_SEPARATION: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Vanishing,
    SingleMode,
    TwoMode,
    ModePlusDecay,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusSequence {
    pub name: String,
    pub category: Category,
    pub planted: Vec<Complex>,
    pub spec: SequenceSpec,
}

fn vector_with_norm(rng: &mut SeededRng, dim: usize, norm: f64) -> CVector {
    loop {
        let v = random::disk_vector(rng, dim);
        let n = v.norm();
        if n > 1e-3 {
            return v.scale(c(norm / n, 0.0));
        }
    }
}

fn separated_angles(rng: &mut SeededRng, k: usize) -> Vec<Complex> {
    let mut out: Vec<Complex> = Vec::with_capacity(k);
    while out.len() < k {
        let t = random::unimodular(rng);
        if out.iter().all(|&s| angular_distance(s, t) >= MIN_MODE_SEPARATION) {
            out.push(t);
        }
    }
    out
}

/// Vanishing profiles whose Cesàro means fall far below the default scan
/// threshold at desk-scale horizons.
fn vanishing_decay(rng: &mut SeededRng) -> DecaySpec {
    let amplitude = rng.gen_range(0.5..1.0);
    let mut d = if rng.gen_bool(0.5) {
        DecaySpec::geometric(rng.gen_range(0.5..0.95))
    } else {
        DecaySpec::power(rng.gen_range(1.0..2.0))
    };
    d.amplitude = amplitude;
    d
}

/// `size` sequences cycling through the four categories.
pub fn sequence_corpus(seed: u64, size: usize, horizon: usize) -> Vec<CorpusSequence> {
    let mut rng = random::rng(seed);
    let cats = [
        Category::Vanishing,
        Category::SingleMode,
        Category::TwoMode,
        Category::ModePlusDecay,
    ];
    (0..size)
        .map(|i| {
            let category = cats[i % cats.len()];
            let dim = rng.gen_range(1..=3);
            let k = match category {
                Category::Vanishing => 0,
                Category::SingleMode | Category::ModePlusDecay => 1,
                Category::TwoMode => 2,
            };
            let planted = separated_angles(&mut rng, k);
            let modes = planted
                .iter()
                .map(|&theta| {
                    let norm = rng.gen_range(0.5..2.0);
                    ModeSpec {
                        theta,
                        v: vector_with_norm(&mut rng, dim, norm),
                    }
                })
                .collect();
            let decay = match category {
                Category::SingleMode | Category::TwoMode => DecaySpec::none(),
                Category::Vanishing | Category::ModePlusDecay => vanishing_decay(&mut rng),
            };
            CorpusSequence {
                name: format!("seq_{i:02}"),
                category,
                planted,
                spec: SequenceSpec::ModesPlusDecay {
                    d: Some(dim),
                    modes,
                    decay,
                    horizon,
                    seed: rng.gen(),
                },
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusSystem {
    pub name: String,
    /// Planted peripheral eigenvalues.
    pub peripheral: Vec<Complex>,
    pub spec: SystemSpec,
}

/// Forced systems `x_{n+1} = Bxₙ + yₙ` with peripheral spectra `{−1}`,
/// `{1}`, `{1, −1}` and `∅`, interior eigenvalues of modulus at most 0.5,
/// and geometric (summable) forcing.
pub fn system_corpus(seed: u64, horizon: usize) -> Vec<CorpusSystem> {
    let mut rng = random::rng(seed);
    let one = c(1.0, 0.0);
    let families: [(&str, Vec<Complex>); 4] = [
        ("minus_one", vec![-one]),
        ("one", vec![one]),
        ("plus_minus_one", vec![one, -one]),
        ("empty", vec![]),
    ];
    families
        .into_iter()
        .map(|(name, peripheral)| {
            let mut eigs = peripheral.clone();
            while eigs.len() < 3 {
                eigs.push(Complex::from_polar(rng.gen_range(0.1..0.5), rng.gen_range(0.0..std::f64::consts::TAU)));
            }
            let b = random::diagonalizable(&mut rng, &eigs, 5.0);
            let x0 = random::disk_vector(&mut rng, 3);
            let forcing = ForcingSpec::seeded(ForcingKind::Geometric { ratio: 0.5 }, rng.gen());
            CorpusSystem {
                name: format!("system_{name}"),
                peripheral,
                spec: SystemSpec {
                    b,
                    p: 1,
                    initial: vec![x0],
                    forcing,
                    horizon,
                },
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file: String,
    pub category: String,
    pub planted: Vec<Complex>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub seed: u64,
    pub horizon: usize,
    pub entries: Vec<ManifestEntry>,
}

/// Writes `sequences/*.json`, `systems/*.json` and `manifest.json` under `dir`.
pub fn write_corpus(dir: &Path, seed: u64, size: usize, horizon: usize) -> Result<Manifest> {
    let mut entries = Vec::new();
    for s in sequence_corpus(seed, size, horizon) {
        let file = format!("sequences/{}.json", s.name);
        write_json(&dir.join(&file), &s.spec)?;
        entries.push(ManifestEntry {
            file,
            category: serde_json::to_value(s.category)
                .ok()
                .and_then(|v| v.as_str().map(str::to_string))
                .unwrap_or_default(),
            planted: s.planted,
        });
    }
    for s in system_corpus(seed, horizon) {
        let file = format!("systems/{}.json", s.name);
        write_json(&dir.join(&file), &s.spec)?;
        entries.push(ManifestEntry {
            file,
            category: "forced_system".to_string(),
            planted: s.peripheral,
        });
    }
    let manifest = Manifest { seed, horizon, entries };
    write_json(&dir.join("manifest.json"), &manifest)?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::spectrum_info;
    use crate::sequence::BoundedSeq;

    #[test]
    fn corpus_is_seeded_and_balanced() {
        let a = sequence_corpus(7, 30, 64);
        assert_eq!(a, sequence_corpus(7, 30, 64));
        assert_ne!(a, sequence_corpus(8, 30, 64));
        for cat in [Category::Vanishing, Category::SingleMode, Category::TwoMode, Category::ModePlusDecay] {
            assert!(a.iter().filter(|s| s.category == cat).count() >= 7);
        }
        for s in &a {
            let x = BoundedSeq::from_spec(&s.spec).unwrap();
            assert_eq!(x.horizon(), 64);
            for (i, t) in s.planted.iter().enumerate() {
                for u in &s.planted[..i] {
                    assert!(angular_distance(*t, *u) >= MIN_MODE_SEPARATION);
                }
            }
        }
    }

    #[test]
    fn systems_have_planted_peripheral_spectra() {
        for s in system_corpus(3, 64) {
            let info = spectrum_info(&s.spec.b, 1e-8).unwrap();
            assert_eq!(info.peripheral.len(), s.peripheral.len(), "{}", s.name);
            assert!(info.interior_radius() <= 0.5);
            assert!(s.spec.forcing.summable());
        }
    }

    #[test]
    fn corpus_files_are_deterministic() {
        let d1 = tempfile::tempdir().unwrap();
        let d2 = tempfile::tempdir().unwrap();
        let m = write_corpus(d1.path(), 5, 8, 32).unwrap();
        write_corpus(d2.path(), 5, 8, 32).unwrap();
        for e in &m.entries {
            let a = std::fs::read(d1.path().join(&e.file)).unwrap();
            let b = std::fs::read(d2.path().join(&e.file)).unwrap();
            assert_eq!(a, b);
        }
        assert_eq!(m.entries.len(), 12);
    }
}
