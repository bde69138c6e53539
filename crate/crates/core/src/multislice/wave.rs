use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circuit::StateVector;
use crate::error::{Error, Result};
use crate::field::RealField;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    Coordinate,
    Momentum,
}

/// `N x N` complex wave field in row-major order (`N*y + x`), which is also
/// the basis order of its amplitude encoding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveField {
    size: usize,
    amplitudes: Vec<Complex64>,
    representation: Representation,
}

impl WaveField {
    pub fn new(size: usize, amplitudes: Vec<Complex64>, representation: Representation) -> Result<Self> {
        if amplitudes.len() != size * size {
            return Err(Error::ShapeMismatch(format!(
                "{} amplitudes for a {size}x{size} field",
                amplitudes.len()
            )));
        }
        Ok(WaveField {
            size,
            amplitudes,
            representation,
        })
    }

    /// Uniform plane wave, amplitude `1/N` everywhere.
    pub fn plane_wave(size: usize) -> Self {
        let a = Complex64::new(1.0 / size as f64, 0.0);
        WaveField {
            size,
            amplitudes: vec![a; size * size],
            representation: Representation::Coordinate,
        }
    }

    pub fn from_state(state: StateVector, representation: Representation) -> Result<Self> {
        let len = state.len();
        let size = (len as f64).sqrt().round() as usize;
        if size * size != len {
            return Err(Error::ShapeMismatch(format!("{len} amplitudes are not a square grid")));
        }
        WaveField::new(size, state.into_amplitudes(), representation)
    }

    pub fn to_state(&self) -> Result<StateVector> {
        StateVector::from_amplitudes(self.amplitudes.clone())
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn representation(&self) -> Representation {
        self.representation
    }

    pub(crate) fn set_representation(&mut self, representation: Representation) {
        self.representation = representation;
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probability(&self) -> RealField {
        RealField::from_values(self.size, self.amplitudes.iter().map(|a| a.norm_sqr()).collect())
            .expect("square by construction")
    }

    /// `|psi(x, row)|^2` along one grid row.
    pub fn row_probability(&self, row: usize) -> Vec<f64> {
        self.amplitudes[row * self.size..(row + 1) * self.size]
            .iter()
            .map(|a| a.norm_sqr())
            .collect()
    }
}

/// Plane-wave initial state on an `N x N` grid.
pub fn init_plane_wave(size: usize) -> WaveField {
    WaveField::plane_wave(size)
}
