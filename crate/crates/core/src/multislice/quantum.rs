use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate, GateCensus, StateVector};
use crate::error::{Error, Result};
use crate::field::RealField;
use crate::physics::PotentialStack;
use crate::synthesis::{
    build_2d_transform, build_phase_circuit, truncate, walsh_decompose, DiagonalSpec, Direction, KeptTermSequence,
    TruncationPolicy,
};
use crate::walsh::{GridIndex, WalshSpectrum};

/// Relative thresholds for the potential (`tau_v`) and kinetic (`tau_p`)
/// diagonals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    pub tau_v: f64,
    pub tau_p: f64,
}

impl Truncation {
    pub const EXACT: Truncation = Truncation { tau_v: 0.0, tau_p: 0.0 };

    pub fn new(tau_v: f64, tau_p: f64) -> Result<Self> {
        TruncationPolicy::new(tau_v).map_err(|_| Error::param("tau_v", "must lie in [0, 1)"))?;
        TruncationPolicy::new(tau_p).map_err(|_| Error::param("tau_p", "must lie in [0, 1)"))?;
        Ok(Truncation { tau_v, tau_p })
    }

    pub fn potential(&self) -> TruncationPolicy {
        TruncationPolicy::new(self.tau_v).unwrap_or(TruncationPolicy::EXACT)
    }

    pub fn kinetic(&self) -> TruncationPolicy {
        TruncationPolicy::new(self.tau_p).unwrap_or(TruncationPolicy::EXACT)
    }
}

/// A truncated diagonal and its compiled circuit.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseOperator {
    pub terms: KeptTermSequence,
    pub circuit: Circuit,
}

impl PhaseOperator {
    pub fn synthesize(spectrum: &WalshSpectrum, policy: &TruncationPolicy) -> Result<Self> {
        let terms = truncate(spectrum, policy);
        let circuit = build_phase_circuit(&terms)?;
        Ok(PhaseOperator { terms, circuit })
    }

    pub fn kept(&self) -> usize {
        self.terms.len()
    }
}

/// The four circuits of one slice, applied in order.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceCircuits {
    pub potential: Circuit,
    pub forward: Circuit,
    pub propagator: Circuit,
    pub inverse: Circuit,
    pub s_v: usize,
    pub s_p: usize,
}

impl SliceCircuits {
    pub fn composite(&self) -> Result<Circuit> {
        let mut c = self.potential.clone();
        c.append(&self.forward)?;
        c.append(&self.propagator)?;
        c.append(&self.inverse)?;
        Ok(c)
    }

    pub fn census(&self) -> GateCensus {
        self.potential.census() + self.forward.census() + self.propagator.census() + self.inverse.census()
    }
}

fn check_field(field: &RealField, grid: &GridIndex, what: &str) -> Result<()> {
    if field.size() != grid.axis_len() {
        return Err(Error::ShapeMismatch(format!(
            "{what} is {0}x{0}, grid is {1}x{1}",
            field.size(),
            grid.axis_len()
        )));
    }
    Ok(())
}

/// Circuits for one slice built from scratch.
pub fn quantum_step_circuits(
    slice_phase: &RealField,
    propagator: &RealField,
    truncation: &Truncation,
    grid: &GridIndex,
) -> Result<SliceCircuits> {
    check_field(slice_phase, grid, "slice phase")?;
    check_field(propagator, grid, "propagator")?;
    let v = PhaseOperator::synthesize(
        &walsh_decompose(&DiagonalSpec::from_field(slice_phase)?)?,
        &truncation.potential(),
    )?;
    let p = PhaseOperator::synthesize(
        &walsh_decompose(&DiagonalSpec::from_field(propagator)?)?,
        &truncation.kinetic(),
    )?;
    let n = grid.bits() as usize;
    Ok(SliceCircuits {
        s_v: v.kept(),
        s_p: p.kept(),
        potential: v.circuit,
        forward: build_2d_transform(n, Direction::Forward)?,
        propagator: p.circuit,
        inverse: build_2d_transform(n, Direction::Inverse)?,
    })
}

/// How many Walsh transforms were taken while preparing an engine.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransformStats {
    pub kinetic: usize,
    pub potential: usize,
}

/// Walsh spectra of the distinct cell slices and of the propagator.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectra {
    grid: GridIndex,
    potentials: Vec<WalshSpectrum>,
    kinetic: WalshSpectrum,
    strongest: usize,
    slice_count: usize,
    stats: TransformStats,
}

impl Spectra {
    pub fn compute(stack: &PotentialStack) -> Result<Self> {
        let bits = crate::walsh::log2_exact(stack.axis_len())? as u32;
        let grid = GridIndex::new(bits)?;
        let mut stats = TransformStats::default();
        let mut potentials = Vec::with_capacity(stack.slices_per_cell());
        for slice in stack.cell_slices() {
            potentials.push(walsh_decompose(&DiagonalSpec::from_field(slice)?)?);
            stats.potential += 1;
        }
        let kinetic = walsh_decompose(&DiagonalSpec::from_field(stack.propagator())?)?;
        stats.kinetic += 1;
        Ok(Spectra {
            grid,
            potentials,
            kinetic,
            strongest: stack.strongest_slice(),
            slice_count: stack.slice_count(),
            stats,
        })
    }

    pub fn grid(&self) -> GridIndex {
        self.grid
    }

    pub fn potentials(&self) -> &[WalshSpectrum] {
        &self.potentials
    }

    pub fn kinetic(&self) -> &WalshSpectrum {
        &self.kinetic
    }

    pub fn strongest_slice(&self) -> usize {
        self.strongest
    }

    pub fn stats(&self) -> TransformStats {
        self.stats
    }

    /// Kept potential terms of the strongest slice under `policy`.
    pub fn s_v(&self, policy: &TruncationPolicy) -> usize {
        truncate(&self.potentials[self.strongest], policy).len()
    }
}

/// Gate-level engine. Potential circuits are compiled once per distinct cell
/// slice and reused for every cell.
#[derive(Debug, Clone)]
pub struct QuantumEngine {
    grid: GridIndex,
    potentials: Vec<PhaseOperator>,
    kinetic: PhaseOperator,
    forward: Circuit,
    inverse: Circuit,
    strongest: usize,
    slice_count: usize,
    stats: TransformStats,
}

impl QuantumEngine {
    pub fn new(stack: &PotentialStack, truncation: &Truncation) -> Result<Self> {
        QuantumEngine::from_spectra(&Spectra::compute(stack)?, truncation)
    }

    pub fn from_spectra(spectra: &Spectra, truncation: &Truncation) -> Result<Self> {
        let potentials = spectra
            .potentials
            .iter()
            .map(|s| PhaseOperator::synthesize(s, &truncation.potential()))
            .collect::<Result<Vec<_>>>()?;
        QuantumEngine::assemble(
            spectra,
            potentials,
            PhaseOperator::synthesize(&spectra.kinetic, &truncation.kinetic())?,
        )
    }

    /// Reuses already compiled operators, rebuilding nothing.
    pub fn from_operators(spectra: &Spectra, potentials: Vec<PhaseOperator>, kinetic: PhaseOperator) -> Result<Self> {
        if potentials.len() != spectra.potentials.len() {
            return Err(Error::ShapeMismatch(
                "one potential operator per cell slice is required".into(),
            ));
        }
        QuantumEngine::assemble(spectra, potentials, kinetic)
    }

    fn assemble(spectra: &Spectra, potentials: Vec<PhaseOperator>, kinetic: PhaseOperator) -> Result<Self> {
        let n = spectra.grid.bits() as usize;
        Ok(QuantumEngine {
            grid: spectra.grid,
            potentials,
            kinetic,
            forward: build_2d_transform(n, Direction::Forward)?,
            inverse: build_2d_transform(n, Direction::Inverse)?,
            strongest: spectra.strongest,
            slice_count: spectra.slice_count,
            stats: spectra.stats,
        })
    }

    pub fn grid(&self) -> GridIndex {
        self.grid
    }

    pub fn potentials(&self) -> &[PhaseOperator] {
        &self.potentials
    }

    pub fn kinetic(&self) -> &PhaseOperator {
        &self.kinetic
    }

    pub fn forward(&self) -> &Circuit {
        &self.forward
    }

    pub fn inverse(&self) -> &Circuit {
        &self.inverse
    }

    pub fn stats(&self) -> TransformStats {
        self.stats
    }

    pub fn s_v(&self) -> usize {
        self.potentials[self.strongest].kept()
    }

    pub fn s_v_total(&self) -> usize {
        self.potentials.iter().map(PhaseOperator::kept).sum()
    }

    pub fn s_p(&self) -> usize {
        self.kinetic.kept()
    }

    /// Hadamard on every qubit, taking `|0...0>` to the plane wave.
    pub fn preparation(&self) -> Circuit {
        let m = self.grid.qubits();
        Circuit::from_gates(m, (0..m).map(Gate::Hadamard).collect()).expect("qubits in range")
    }

    pub fn prepare(&self) -> Result<StateVector> {
        let mut state = StateVector::zero(self.grid.qubits())?;
        self.preparation().apply_to(&mut state)?;
        Ok(state)
    }

    pub fn slice_circuits(&self, t: usize) -> SliceCircuits {
        let v = &self.potentials[t % self.potentials.len()];
        SliceCircuits {
            potential: v.circuit.clone(),
            forward: self.forward.clone(),
            propagator: self.kinetic.circuit.clone(),
            inverse: self.inverse.clone(),
            s_v: v.kept(),
            s_p: self.kinetic.kept(),
        }
    }

    /// Advances `state` through slice `t` of the specimen.
    pub fn step(&self, state: &mut StateVector, t: usize) -> Result<()> {
        self.potentials[t % self.potentials.len()].circuit.apply_to(state)?;
        self.forward.apply_to(state)?;
        self.kinetic.circuit.apply_to(state)?;
        self.inverse.apply_to(state)
    }

    /// Gates of one full simulation, including plane-wave preparation.
    pub fn simulation_census(&self) -> GateCensus {
        let per_slice_fixed = self.forward.census() + self.kinetic.circuit.census() + self.inverse.census();
        let mut census = self.preparation().census() + per_slice_fixed.scaled(self.slice_count as u64);
        let cells = self.potentials.len();
        for (i, v) in self.potentials.iter().enumerate() {
            let uses = self.slice_count / cells + usize::from(i < self.slice_count % cells);
            census += v.circuit.census().scaled(uses as u64);
        }
        census
    }
}
