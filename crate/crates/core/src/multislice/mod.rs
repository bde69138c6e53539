//! Classical and gate-level multislice engines plus the truncation
//! experiments built on them.

mod classical;
mod experiments;
mod metrics;
mod quantum;
mod simulation;
mod wave;

pub use classical::{classical_step, ClassicalEngine};
pub use experiments::{
    gate_report, gate_report_with, logrange, remaining_fraction, truncation_sweep, FractionRow, GateReport, SweepRow,
    Vary,
};
pub use metrics::{field_relative_error, relative_error, tau_v_formula, ErrorReport, TAU_P_KEEP_ALL};
pub use quantum::{
    quantum_step_circuits, PhaseOperator, QuantumEngine, SliceCircuits, Spectra, TransformStats, Truncation,
};
pub use simulation::{run_simulation, run_with_engine, shared_spectra, EngineKind, Setup, SimulationPlan, Trajectory};
pub use wave::{init_plane_wave, Representation, WaveField};
