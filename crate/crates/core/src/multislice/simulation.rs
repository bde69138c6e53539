use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::classical::ClassicalEngine;
use super::quantum::{QuantumEngine, Spectra, TransformStats, Truncation};
use super::wave::{init_plane_wave, Representation, WaveField};
use crate::circuit::GateCensus;
use crate::error::{Error, Result};
use crate::field::RealField;
use crate::physics::{BeamParams, FieldGrid, PotentialStack, Specimen};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EngineKind {
    Classical,
    QuantumExact,
    QuantumTruncated,
}

impl std::str::FromStr for EngineKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "classical" => Ok(EngineKind::Classical),
            "quantum-exact" | "quantum_exact" => Ok(EngineKind::QuantumExact),
            "quantum-truncated" | "quantum_truncated" => Ok(EngineKind::QuantumTruncated),
            other => Err(Error::param("engine", format!("unknown engine '{other}'"))),
        }
    }
}

/// Everything a run needs besides the plan: the grid and the precomputed
/// phase fields.
#[derive(Debug, Clone)]
pub struct Setup {
    pub grid: FieldGrid,
    pub stack: PotentialStack,
}

impl Setup {
    pub fn build(specimen: &Specimen, grid: FieldGrid, beam: &BeamParams, cutoff: f64) -> Result<Self> {
        let stack = PotentialStack::build(specimen, &grid, beam, cutoff)?;
        Ok(Setup { grid, stack })
    }

    pub fn new(grid: FieldGrid, stack: PotentialStack) -> Result<Self> {
        if stack.axis_len() != grid.axis_len() {
            return Err(Error::ShapeMismatch(format!(
                "stack is {} wide, grid is {}",
                stack.axis_len(),
                grid.axis_len()
            )));
        }
        Ok(Setup { grid, stack })
    }

    /// Row with the largest potential summed over the cell (the row through
    /// the atomic columns). Ties go to the lowest row.
    pub fn default_cross_section_row(&self) -> usize {
        let n = self.grid.axis_len();
        let mut best = (0, f64::NEG_INFINITY);
        for y in 0..n {
            let total: f64 = self
                .stack
                .cell_slices()
                .iter()
                .map(|s| s.row(y).iter().sum::<f64>())
                .sum();
            if total > best.1 + 1e-12 * best.1.abs() {
                best = (y, total);
            }
        }
        best.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationPlan {
    pub engine: EngineKind,
    pub truncation: Truncation,
    pub cross_section_row: Option<usize>,
    pub record_slices: bool,
    pub seed: u64,
}

impl SimulationPlan {
    pub fn new(engine: EngineKind) -> Self {
        SimulationPlan {
            engine,
            truncation: Truncation::EXACT,
            cross_section_row: None,
            record_slices: false,
            seed: 0,
        }
    }

    pub fn with_truncation(mut self, truncation: Truncation) -> Self {
        self.truncation = truncation;
        self
    }

    pub fn validate(&self, setup: &Setup) -> Result<()> {
        Truncation::new(self.truncation.tau_v, self.truncation.tau_p)?;
        if let Some(row) = self.cross_section_row {
            if row >= setup.grid.axis_len() {
                return Err(Error::param(
                    "cross_section_row",
                    format!("{row} is outside a {}-row grid", setup.grid.axis_len()),
                ));
            }
        }
        Ok(())
    }

    /// Truncation actually applied by the selected engine.
    pub fn effective_truncation(&self) -> Truncation {
        match self.engine {
            EngineKind::QuantumTruncated => self.truncation,
            _ => Truncation::EXACT,
        }
    }
}

/// Recorded run: `cross_section[t]` is `|psi(x, y0)|^2` after slice `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub cross_section_row: usize,
    pub cross_section: Vec<Vec<f64>>,
    pub slice_grids: Vec<RealField>,
    pub final_wave: WaveField,
    pub norm_drift: f64,
    pub s_v: Option<usize>,
    pub s_v_total: Option<usize>,
    pub s_p: Option<usize>,
    pub census: Option<GateCensus>,
    pub transforms: TransformStats,
}

impl Trajectory {
    pub fn final_probability(&self) -> RealField {
        self.final_wave.probability()
    }

    /// Row-major `(x, z)` image, one row per slice.
    pub fn cross_section_values(&self) -> Vec<f64> {
        self.cross_section.iter().flatten().copied().collect()
    }
}

struct Recorder {
    row: usize,
    record_slices: bool,
    cross_section: Vec<Vec<f64>>,
    slice_grids: Vec<RealField>,
    norm_drift: f64,
}

impl Recorder {
    fn observe(&mut self, amplitudes: &[Complex64], n: usize) {
        let row = &amplitudes[self.row * n..(self.row + 1) * n];
        self.cross_section.push(row.iter().map(|a| a.norm_sqr()).collect());
        if self.record_slices {
            let probabilities = amplitudes.iter().map(|a| a.norm_sqr()).collect();
            self.slice_grids
                .push(RealField::from_values(n, probabilities).expect("square grid"));
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        self.norm_drift = self.norm_drift.max((norm - 1.0).abs());
    }
}

/// Advances a plane wave through every slice of the specimen.
pub fn run_simulation(setup: &Setup, plan: &SimulationPlan) -> Result<Trajectory> {
    plan.validate(setup)?;
    match plan.engine {
        EngineKind::Classical => run_classical(setup, plan),
        _ => {
            let engine = QuantumEngine::new(&setup.stack, &plan.effective_truncation())?;
            run_quantum(setup, plan, &engine)
        }
    }
}

/// Runs a prepared quantum engine, e.g. one compiled from shared spectra.
pub fn run_with_engine(setup: &Setup, plan: &SimulationPlan, engine: &QuantumEngine) -> Result<Trajectory> {
    plan.validate(setup)?;
    if engine.grid().axis_len() != setup.grid.axis_len() {
        return Err(Error::ShapeMismatch("engine and setup grids differ".into()));
    }
    run_quantum(setup, plan, engine)
}

fn recorder(setup: &Setup, plan: &SimulationPlan) -> Recorder {
    Recorder {
        row: plan
            .cross_section_row
            .unwrap_or_else(|| setup.default_cross_section_row()),
        record_slices: plan.record_slices,
        cross_section: Vec::with_capacity(setup.stack.slice_count()),
        slice_grids: Vec::new(),
        norm_drift: 0.0,
    }
}

fn run_classical(setup: &Setup, plan: &SimulationPlan) -> Result<Trajectory> {
    let n = setup.grid.axis_len();
    let engine = ClassicalEngine::new(n);
    let mut wave = init_plane_wave(n);
    let mut rec = recorder(setup, plan);
    for t in 0..setup.stack.slice_count() {
        engine.step(&mut wave, setup.stack.slice_phase(t), setup.stack.propagator())?;
        rec.observe(wave.amplitudes(), n);
    }
    Ok(Trajectory {
        cross_section_row: rec.row,
        cross_section: rec.cross_section,
        slice_grids: rec.slice_grids,
        final_wave: wave,
        norm_drift: rec.norm_drift,
        s_v: None,
        s_v_total: None,
        s_p: None,
        census: None,
        transforms: TransformStats::default(),
    })
}

fn run_quantum(setup: &Setup, plan: &SimulationPlan, engine: &QuantumEngine) -> Result<Trajectory> {
    let n = setup.grid.axis_len();
    let mut state = engine.prepare()?;
    let mut rec = recorder(setup, plan);
    for t in 0..setup.stack.slice_count() {
        engine.step(&mut state, t)?;
        rec.observe(state.amplitudes(), n);
    }
    Ok(Trajectory {
        cross_section_row: rec.row,
        cross_section: rec.cross_section,
        slice_grids: rec.slice_grids,
        final_wave: WaveField::from_state(state, Representation::Coordinate)?,
        norm_drift: rec.norm_drift,
        s_v: Some(engine.s_v()),
        s_v_total: Some(engine.s_v_total()),
        s_p: Some(engine.s_p()),
        census: Some(engine.simulation_census()),
        transforms: engine.stats(),
    })
}

/// Spectra shared by several runs over the same setup.
pub fn shared_spectra(setup: &Setup) -> Result<Spectra> {
    Spectra::compute(&setup.stack)
}
