use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::constants::{ANGSTROM, ELECTRON_MASS, ELEMENTARY_CHARGE, HBAR, PLANCK};
use crate::error::{Error, Result};

/// Four-Gaussian electron scattering-factor fit with a Debye–Waller factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomSpecies {
    pub label: String,
    /// Amplitudes `a_i`, angstrom.
    pub a: [f64; 4],
    /// Widths `b_i`, angstrom^2.
    pub b: [f64; 4],
    /// Debye–Waller factor `B`, angstrom^2.
    pub debye_waller: f64,
    /// Citation for the tabulated values.
    #[serde(default)]
    pub source: String,
}

impl AtomSpecies {
    pub fn validate(&self) -> Result<()> {
        let all_finite = self.a.iter().chain(&self.b).all(|v| v.is_finite()) && self.debye_waller.is_finite();
        if !all_finite {
            return Err(Error::param(
                format!("species {}", self.label),
                "non-finite coefficient",
            ));
        }
        if let Some(i) = self.b.iter().position(|&b| b + self.debye_waller <= 0.0) {
            return Err(Error::param(
                format!("species {}", self.label),
                format!("b[{i}] + B must be positive"),
            ));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: AtomSpecies = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        AtomSpecies::from_json(&std::fs::read_to_string(path)?)
    }

    /// Gold parameters from the shipped `species/au.json`.
    pub fn gold() -> Self {
        AtomSpecies::from_json(include_str!("../../species/au.json")).expect("bundled species file is valid")
    }

    /// Potential at the origin, V.
    pub fn peak_potential(&self, prefactor: Prefactor) -> f64 {
        atomic_potential_unchecked(0.0, self, prefactor.value())
    }
}

/// Overall scale of the Gaussian potential sum.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Prefactor {
    /// `h^2 / (2 pi m0 e)`, about 47.88 V angstrom^2, the conventional
    /// normalisation of scattering-factor fits.
    #[default]
    Planck,
    /// `hbar^2 / (2 pi m0 e)`, about 1.213 V angstrom^2.
    ReducedPlanck,
}

impl Prefactor {
    /// Value in V angstrom^2.
    pub fn value(self) -> f64 {
        let h = match self {
            Prefactor::Planck => PLANCK,
            Prefactor::ReducedPlanck => HBAR,
        };
        h * h / (2.0 * PI * ELECTRON_MASS * ELEMENTARY_CHARGE) / (ANGSTROM * ANGSTROM)
    }
}

/// Spherical atomic potential in volts at distance `r` (angstrom):
/// `C sum_i a_i (4 pi/(b_i+B))^{3/2} exp(-4 pi^2 r^2/(b_i+B))` with `C` the
/// chosen prefactor.
pub fn atomic_potential(r: f64, species: &AtomSpecies, prefactor: Prefactor) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(Error::param("r", format!("{r} is not a non-negative distance")));
    }
    species.validate()?;
    Ok(atomic_potential_unchecked(r, species, prefactor.value()))
}

#[inline]
pub(crate) fn atomic_potential_unchecked(r: f64, species: &AtomSpecies, prefactor: f64) -> f64 {
    let r2 = r * r;
    let sum: f64 = species
        .a
        .iter()
        .zip(&species.b)
        .map(|(&a, &b)| {
            let w = b + species.debye_waller;
            a * (4.0 * PI / w).powf(1.5) * (-4.0 * PI * PI * r2 / w).exp()
        })
        .sum();
    prefactor * sum
}
