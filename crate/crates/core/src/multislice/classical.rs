use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::wave::{Representation, WaveField};
use crate::error::{Error, Result};
use crate::field::RealField;

/// Split-step reference engine using a unitary 2D FFT (kernel `e^{-2 pi i}`
/// forward, scaled by `1/N` each way).
pub struct ClassicalEngine {
    size: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl ClassicalEngine {
    pub fn new(size: usize) -> Self {
        let mut planner = FftPlanner::new();
        ClassicalEngine {
            size,
            forward: planner.plan_fft_forward(size),
            inverse: planner.plan_fft_inverse(size),
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// In-place unitary 2D transform of a row-major `N x N` array.
    pub fn fft2(&self, data: &mut [Complex64], inverse: bool) {
        let n = self.size;
        let plan = if inverse { &self.inverse } else { &self.forward };
        plan.process(data);
        let mut transposed = transpose(data, n);
        plan.process(&mut transposed);
        let back = transpose(&transposed, n);
        let scale = 1.0 / n as f64;
        for (d, b) in data.iter_mut().zip(back) {
            *d = b * scale;
        }
    }

    /// One multislice iteration: transmit, transform, propagate, transform back.
    pub fn step(&self, psi: &mut WaveField, slice_phase: &RealField, propagator: &RealField) -> Result<()> {
        self.check(psi, slice_phase, propagator)?;
        multiply_phase(psi.amplitudes_mut(), slice_phase.values());
        self.fft2(psi.amplitudes_mut(), false);
        multiply_phase(psi.amplitudes_mut(), propagator.values());
        self.fft2(psi.amplitudes_mut(), true);
        Ok(())
    }

    /// Converts a coordinate-space field to momentum space.
    pub fn to_momentum(&self, psi: &mut WaveField) -> Result<()> {
        if psi.representation() != Representation::Coordinate || psi.size() != self.size {
            return Err(Error::ShapeMismatch(
                "expected a coordinate field of matching size".into(),
            ));
        }
        self.fft2(psi.amplitudes_mut(), false);
        psi.set_representation(Representation::Momentum);
        Ok(())
    }

    fn check(&self, psi: &WaveField, slice_phase: &RealField, propagator: &RealField) -> Result<()> {
        if psi.representation() != Representation::Coordinate {
            return Err(Error::ShapeMismatch(
                "wave field must be in coordinate representation".into(),
            ));
        }
        let n = self.size;
        if psi.size() != n || slice_phase.size() != n || propagator.size() != n {
            return Err(Error::ShapeMismatch(format!(
                "engine {n}, wave {}, slice {}, propagator {}",
                psi.size(),
                slice_phase.size(),
                propagator.size()
            )));
        }
        Ok(())
    }
}

fn transpose(data: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    for y in 0..n {
        for x in 0..n {
            out[x * n + y] = data[y * n + x];
        }
    }
    out
}

fn multiply_phase(amps: &mut [Complex64], phases: &[f64]) {
    for (a, &p) in amps.iter_mut().zip(phases) {
        if p != 0.0 {
            *a *= Complex64::from_polar(1.0, p);
        }
    }
}

/// Single classical multislice step on a copy of `psi`.
pub fn classical_step(psi: &WaveField, slice_phase: &RealField, propagator: &RealField) -> Result<WaveField> {
    let engine = ClassicalEngine::new(psi.size());
    let mut out = psi.clone();
    engine.step(&mut out, slice_phase, propagator)?;
    Ok(out)
}
