use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::constants::*;
use crate::error::{Error, Result};

/// Relativistic electron-beam quantities for an accelerating voltage.
///
/// Lengths are in angstrom, energies in eV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamParams {
    /// Accelerating voltage, V.
    pub voltage: f64,
    /// Kinetic energy `eU`, eV.
    pub kinetic_energy: f64,
    /// Wavelength, angstrom.
    pub wavelength: f64,
    /// Relativistic mass over rest mass.
    pub mass_ratio: f64,
    /// Interaction constant, rad / (V angstrom).
    pub sigma: f64,
    /// Wavenumber `1/lambda`, 1/angstrom.
    pub wavenumber: f64,
}

impl BeamParams {
    pub fn new(voltage: f64) -> Result<Self> {
        beam_params(voltage)
    }
}

pub fn beam_params(voltage: f64) -> Result<BeamParams> {
    if !(voltage > 0.0) || !voltage.is_finite() {
        return Err(Error::param(
            "voltage",
            format!("{voltage} V is not a positive voltage"),
        ));
    }
    let e = ELEMENTARY_CHARGE;
    let c = SPEED_OF_LIGHT;
    let kinetic = e * voltage;
    let rest = ELECTRON_MASS * c * c;
    let mass = ELECTRON_MASS + kinetic / (c * c);
    let wavelength_m = PLANCK * c / (2.0 * rest * kinetic + kinetic * kinetic).sqrt();
    // m e lambda / (2 pi hbar^2) in rad/(V m), then per angstrom.
    let sigma = mass * e * wavelength_m / (2.0 * PI * HBAR * HBAR) * ANGSTROM;
    let wavelength = wavelength_m / ANGSTROM;
    Ok(BeamParams {
        voltage,
        kinetic_energy: voltage,
        wavelength,
        mass_ratio: mass / ELECTRON_MASS,
        sigma,
        wavenumber: 1.0 / wavelength,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_positive_voltage() {
        assert!(beam_params(0.0).is_err());
        assert!(beam_params(-5.0).is_err());
        assert!(beam_params(f64::NAN).is_err());
    }

    #[test]
    fn nonrelativistic_limit() {
        let b = beam_params(100.0).unwrap();
        let classical = PLANCK / (2.0 * ELECTRON_MASS * ELEMENTARY_CHARGE * 100.0).sqrt() / ANGSTROM;
        assert!((b.wavelength / classical - 1.0).abs() < 1e-4);
        assert!((b.mass_ratio - 1.0).abs() < 1e-3);
    }

    #[test]
    fn self_consistency() {
        for &u in &[1e3, 3e4, 1e5, 2e5, 3e5] {
            let b = beam_params(u).unwrap();
            let rest = electron_rest_energy_ev();
            assert!((b.mass_ratio - (1.0 + u / rest)).abs() < 1e-12);
            let ek = b.kinetic_energy;
            let hc_ev_angstrom = PLANCK * SPEED_OF_LIGHT / ELEMENTARY_CHARGE / ANGSTROM;
            let lambda = hc_ev_angstrom / (2.0 * rest * ek + ek * ek).sqrt();
            assert!((b.wavelength / lambda - 1.0).abs() < 1e-12);
            assert!((b.wavenumber * b.wavelength - 1.0).abs() < 1e-15);
        }
    }
}
