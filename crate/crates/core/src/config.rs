//! JSON run configuration: schema, loading, validation and the objects it
//! resolves to.
//!
//! ```json
//! {
//!   "specimen": {
//!     "lattice_constant": 4.078,
//!     "cells": [1, 1, 32],
//!     "slices_per_cell": 16,
//!     "basis": [{ "position": [0, 0, 0], "species": "Au" }, ...],
//!     "species": { "Au": "../species/au.json" }
//!   },
//!   "potential": { "slicing": "sectioned", "prefactor": "planck", "cutoff": 12.234 },
//!   "beam": { "voltage": 100000 },
//!   "grid": { "bits": 6 },
//!   "truncation": { "tau_v": "auto", "tau_p": 1e-10 },
//!   "record": { "cross_section_row": null, "per_slice": false },
//!   "advisory": { "potential_scale": 0.2, "criterion_scale": 1.0 },
//!   "seed": 0
//! }
//! ```
//!
//! Species entries are either a path (relative to the config file) or an
//! inline object. `cutoff` defaults to three lattice constants and `tau_v`
//! `"auto"` means the empirical threshold for the grid size.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::multislice::{tau_v_formula, EngineKind, Setup, SimulationPlan, Truncation, TAU_P_KEEP_ALL};
use crate::physics::{
    beam_params, check_slice_thickness, AtomSpecies, BasisAtom, BeamParams, FieldGrid, PotentialModel, Prefactor,
    Slicing, Specimen, ThicknessAdvisory, DEFAULT_CUTOFF_CELLS,
};
use crate::walsh::MAX_QUBITS;

/// Largest grid accepted from a config, bits per axis.
pub const MAX_GRID_BITS: u32 = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpeciesSource {
    File(PathBuf),
    Inline(AtomSpecies),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecimenConfig {
    pub lattice_constant: f64,
    pub cells: [usize; 3],
    pub slices_per_cell: usize,
    pub basis: Vec<BasisAtom>,
    pub species: BTreeMap<String, SpeciesSource>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PotentialConfig {
    pub slicing: Slicing,
    pub prefactor: Prefactor,
    /// Lateral and axial cutoff for periodic images, angstrom.
    pub cutoff: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamConfig {
    /// Accelerating voltage, V.
    pub voltage: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Bits per axis; the grid is `2^bits` square.
    pub bits: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TauKeyword {
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TauSetting {
    Value(f64),
    Keyword(TauKeyword),
}

impl TauSetting {
    pub const AUTO: TauSetting = TauSetting::Keyword(TauKeyword::Auto);

    pub fn resolve(self, bits: u32) -> f64 {
        match self {
            TauSetting::Value(v) => v,
            TauSetting::Keyword(TauKeyword::Auto) => tau_v_formula(bits),
        }
    }
}

impl std::str::FromStr for TauSetting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(TauSetting::AUTO);
        }
        s.parse::<f64>()
            .map(TauSetting::Value)
            .map_err(|_| Error::param("tau_v", format!("expected a number or `auto`, got `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TruncationConfig {
    pub tau_v: TauSetting,
    pub tau_p: f64,
}

impl Default for TruncationConfig {
    fn default() -> Self {
        TruncationConfig {
            tau_v: TauSetting::AUTO,
            tau_p: TAU_P_KEEP_ALL,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RecordConfig {
    pub cross_section_row: Option<usize>,
    pub per_slice: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdvisoryConfig {
    /// Distance over which the potential changes appreciably, angstrom.
    pub potential_scale: f64,
    pub criterion_scale: f64,
}

impl Default for AdvisoryConfig {
    fn default() -> Self {
        AdvisoryConfig {
            potential_scale: 0.2,
            criterion_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub specimen: SpecimenConfig,
    #[serde(default)]
    pub potential: PotentialConfig,
    pub beam: BeamConfig,
    pub grid: GridConfig,
    #[serde(default)]
    pub truncation: TruncationConfig,
    #[serde(default)]
    pub record: RecordConfig,
    #[serde(default)]
    pub advisory: AdvisoryConfig,
    #[serde(default)]
    pub seed: u64,
}

/// Command-line values that replace config fields.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub bits: Option<u32>,
    pub cells_z: Option<usize>,
    pub voltage: Option<f64>,
    pub tau_v: Option<TauSetting>,
    pub tau_p: Option<f64>,
    pub seed: Option<u64>,
}

impl Config {
    /// The bundled gold setup with its species inlined.
    pub fn default_au() -> Config {
        let a0 = 4.078;
        let basis = [[0.0, 0.0, 0.0], [0.5, 0.5, 0.0], [0.5, 0.0, 0.5], [0.0, 0.5, 0.5]]
            .into_iter()
            .map(|position| BasisAtom {
                position,
                species: "Au".into(),
            })
            .collect();
        Config {
            specimen: SpecimenConfig {
                lattice_constant: a0,
                cells: [1, 1, 32],
                slices_per_cell: 16,
                basis,
                species: BTreeMap::from([("Au".to_string(), SpeciesSource::Inline(AtomSpecies::gold()))]),
            },
            potential: PotentialConfig {
                slicing: Slicing::Sectioned,
                prefactor: Prefactor::Planck,
                cutoff: Some(DEFAULT_CUTOFF_CELLS * a0),
            },
            beam: BeamConfig { voltage: 100e3 },
            grid: GridConfig { bits: 6 },
            truncation: TruncationConfig::default(),
            record: RecordConfig::default(),
            advisory: AdvisoryConfig::default(),
            seed: 0,
        }
    }

    pub fn from_json(text: &str) -> Result<Config> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(b) = o.bits {
            self.grid.bits = b;
        }
        if let Some(c) = o.cells_z {
            self.specimen.cells[2] = c;
        }
        if let Some(v) = o.voltage {
            self.beam.voltage = v;
        }
        if let Some(t) = o.tau_v {
            self.truncation.tau_v = t;
        }
        if let Some(t) = o.tau_p {
            self.truncation.tau_p = t;
        }
        if let Some(s) = o.seed {
            self.seed = s;
        }
    }

    pub fn cutoff(&self) -> f64 {
        self.potential
            .cutoff
            .unwrap_or(DEFAULT_CUTOFF_CELLS * self.specimen.lattice_constant)
    }

    /// Field-level problems that do not need the species files.
    pub fn issues(&self) -> Vec<String> {
        let mut issues = Vec::new();
        let s = &self.specimen;
        if !(s.lattice_constant > 0.0 && s.lattice_constant.is_finite()) {
            issues.push(format!(
                "specimen.lattice_constant: {} is not positive",
                s.lattice_constant
            ));
        }
        if s.slices_per_cell == 0 {
            issues.push("specimen.slices_per_cell: must be at least 1".into());
        }
        if s.cells[0] == 0 || s.cells[1] == 0 {
            issues.push("specimen.cells: transverse repetitions must be at least 1".into());
        }
        if s.basis.is_empty() {
            issues.push("specimen.basis: specimen has no atoms".into());
        }
        for (i, atom) in s.basis.iter().enumerate() {
            if atom.position.iter().any(|p| !(0.0..1.0).contains(p)) {
                issues.push(format!(
                    "specimen.basis[{i}].position: {:?} is outside [0, 1)",
                    atom.position
                ));
            }
            if !s.species.contains_key(&atom.species) {
                issues.push(format!(
                    "specimen.basis[{i}].species: unknown species `{}`",
                    atom.species
                ));
            }
        }
        let cutoff = self.cutoff();
        if !(cutoff >= s.lattice_constant && cutoff.is_finite()) {
            issues.push(format!(
                "potential.cutoff: {cutoff} angstrom is smaller than one lattice constant"
            ));
        }
        if !(self.beam.voltage > 0.0 && self.beam.voltage.is_finite()) {
            issues.push(format!("beam.voltage: {} is not positive", self.beam.voltage));
        }
        let b = self.grid.bits;
        if b == 0 || b > MAX_GRID_BITS || 2 * b as usize > MAX_QUBITS {
            issues.push(format!("grid.bits: {b} is outside 1..={MAX_GRID_BITS}"));
        }
        let tau_v = self.truncation.tau_v.resolve(b.max(1));
        if !(0.0..1.0).contains(&tau_v) {
            issues.push(format!("truncation.tau_v: {tau_v} is outside [0, 1)"));
        }
        if !(0.0..1.0).contains(&self.truncation.tau_p) {
            issues.push(format!("truncation.tau_p: {} is outside [0, 1)", self.truncation.tau_p));
        }
        if let Some(row) = self.record.cross_section_row {
            if b < usize::BITS && row >= 1usize << b {
                issues.push(format!(
                    "record.cross_section_row: {row} is outside the {}-row grid",
                    1usize << b
                ));
            }
        }
        if !(self.advisory.potential_scale > 0.0) {
            issues.push(format!(
                "advisory.potential_scale: {} is not positive",
                self.advisory.potential_scale
            ));
        }
        if !(self.advisory.criterion_scale > 0.0) {
            issues.push(format!(
                "advisory.criterion_scale: {} is not positive",
                self.advisory.criterion_scale
            ));
        }
        issues
    }
}

/// An input file and its SHA-256 digest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

pub fn digest_bytes(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// A config with every species loaded and inlined.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedConfig {
    pub config: Config,
    pub inputs: Vec<InputDigest>,
}

/// Reads a config file and resolves its species, listing every problem
/// found rather than stopping at the first.
pub fn load_config(path: &Path, overrides: &Overrides) -> Result<ResolvedConfig> {
    let bytes = std::fs::read(path)?;
    let mut config: Config = serde_json::from_slice(&bytes)?;
    config.apply(overrides);
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut inputs = vec![InputDigest {
        path: path.display().to_string(),
        sha256: digest_bytes(&bytes),
    }];
    resolve(config, &base, &mut inputs)
}

/// Resolves an in-memory config; relative species paths are taken from `base`.
pub fn resolve_config(config: Config, base: &Path) -> Result<ResolvedConfig> {
    resolve(config, base, &mut Vec::new())
}

fn resolve(mut config: Config, base: &Path, inputs: &mut Vec<InputDigest>) -> Result<ResolvedConfig> {
    let mut issues = config.issues();
    for (label, source) in config.specimen.species.iter_mut() {
        if let SpeciesSource::File(rel) = source {
            let path = base.join(&rel);
            let loaded = std::fs::read(&path)
                .map_err(|e| format!("specimen.species.{label}: cannot read {}: {e}", path.display()))
                .and_then(|bytes| {
                    let text = String::from_utf8_lossy(&bytes).into_owned();
                    AtomSpecies::from_json(&text)
                        .map(|s| (s, digest_bytes(&bytes)))
                        .map_err(|e| format!("specimen.species.{label}: {}: {e}", path.display()))
                });
            match loaded {
                Ok((species, sha256)) => {
                    inputs.push(InputDigest {
                        path: path.display().to_string(),
                        sha256,
                    });
                    *source = SpeciesSource::Inline(species);
                }
                Err(message) => issues.push(message),
            }
        } else if let SpeciesSource::Inline(species) = source {
            if let Err(e) = species.validate() {
                issues.push(format!("specimen.species.{label}: {e}"));
            }
        }
    }
    if issues.is_empty() {
        Ok(ResolvedConfig {
            config,
            inputs: inputs.clone(),
        })
    } else {
        Err(Error::Config(issues))
    }
}

/// Everything derived from a resolved config.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub specimen: Specimen,
    pub beam: BeamParams,
    pub grid: FieldGrid,
    pub cutoff: f64,
    pub truncation: Truncation,
    pub advisory: ThicknessAdvisory,
}

impl ResolvedConfig {
    pub fn experiment(&self) -> Result<Experiment> {
        let c = &self.config;
        let species = c
            .specimen
            .species
            .iter()
            .map(|(label, source)| match source {
                SpeciesSource::Inline(s) => Ok((label.clone(), s.clone())),
                SpeciesSource::File(p) => Err(Error::param(
                    format!("specimen.species.{label}"),
                    format!("{} was not resolved", p.display()),
                )),
            })
            .collect::<Result<BTreeMap<_, _>>>()?;
        let specimen = Specimen {
            lattice_constant: c.specimen.lattice_constant,
            basis: c.specimen.basis.clone(),
            cells: c.specimen.cells,
            slices_per_cell: c.specimen.slices_per_cell,
            species,
            potential: PotentialModel {
                slicing: c.potential.slicing,
                prefactor: c.potential.prefactor,
            },
        };
        specimen.validate()?;
        let beam = beam_params(c.beam.voltage)?;
        let grid = FieldGrid::new(c.grid.bits, specimen.transverse_extent())?;
        let truncation = Truncation::new(c.truncation.tau_v.resolve(c.grid.bits), c.truncation.tau_p)?;
        let advisory = check_slice_thickness(
            specimen.slice_thickness(),
            c.advisory.potential_scale,
            &beam,
            c.advisory.criterion_scale,
        );
        Ok(Experiment {
            specimen,
            beam,
            grid,
            cutoff: c.cutoff(),
            truncation,
            advisory,
        })
    }
}

impl Experiment {
    pub fn setup(&self) -> Result<Setup> {
        Setup::build(&self.specimen, self.grid, &self.beam, self.cutoff)
    }

    pub fn plan(&self, engine: EngineKind, config: &Config) -> SimulationPlan {
        SimulationPlan {
            engine,
            truncation: self.truncation,
            cross_section_row: config.record.cross_section_row,
            record_slices: config.record.per_slice,
            seed: config.seed,
        }
    }
}

/// Default gold setup at `bits` per axis and `cells_z` cells deep.
pub fn default_setup(bits: u32, cells_z: usize) -> Result<Setup> {
    let mut config = Config::default_au();
    config.grid.bits = bits;
    config.specimen.cells[2] = cells_z;
    resolve_config(config, Path::new("."))?.experiment()?.setup()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_and_auto_tau() {
        let c = Config::default_au();
        let back = Config::from_json(&c.to_json()).unwrap();
        assert_eq!(back, c);
        assert!(c.to_json().contains("\"auto\""));
        let e = resolve_config(c, Path::new(".")).unwrap().experiment().unwrap();
        assert_eq!(e.truncation.tau_v, 0.002);
        assert_eq!(e.truncation.tau_p, 1e-10);
    }

    #[test]
    fn issues_name_every_field() {
        let mut c = Config::default_au();
        c.specimen.slices_per_cell = 0;
        c.beam.voltage = -1.0;
        c.grid.bits = 0;
        c.truncation.tau_p = 1.5;
        c.specimen.basis[1].species = "Pt".into();
        let issues = c.issues();
        for field in [
            "specimen.slices_per_cell",
            "beam.voltage",
            "grid.bits",
            "truncation.tau_p",
            "specimen.basis[1].species",
        ] {
            assert!(
                issues.iter().any(|i| i.starts_with(field)),
                "{field} missing from {issues:?}"
            );
        }
    }

    #[test]
    fn missing_species_file_is_reported() {
        let mut c = Config::default_au();
        c.specimen
            .species
            .insert("Au".into(), SpeciesSource::File("no/such.json".into()));
        let err = resolve_config(c, Path::new("/nonexistent")).unwrap_err();
        assert!(err.to_string().contains("specimen.species.Au"), "{err}");
    }

    #[test]
    fn overrides_replace_fields() {
        let mut c = Config::default_au();
        c.apply(&Overrides {
            bits: Some(4),
            cells_z: Some(3),
            tau_v: Some("0.01".parse().unwrap()),
            ..Default::default()
        });
        assert_eq!((c.grid.bits, c.specimen.cells[2]), (4, 3));
        assert_eq!(c.truncation.tau_v, TauSetting::Value(0.01));
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let mut v: serde_json::Value = serde_json::from_str(&Config::default_au().to_json()).unwrap();
        v["grid"]["bitz"] = 3.into();
        assert!(Config::from_json(&v.to_string()).is_err());
    }
}
