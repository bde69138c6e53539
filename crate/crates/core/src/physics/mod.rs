//! Electron-optical parameters, atomic potentials and the per-slice phase
//! fields of a crystal specimen. Lengths in angstrom, potentials in volts.

pub mod beam;
pub mod constants;
pub mod species;
pub mod specimen;

pub use beam::{beam_params, BeamParams};
pub use species::{atomic_potential, AtomSpecies, Prefactor};
pub use specimen::{
    build_potential_slices, build_propagator, check_slice_thickness, BasisAtom, FieldGrid, PotentialModel,
    PotentialStack, Slicing, Specimen, ThicknessAdvisory, DEFAULT_CUTOFF_CELLS,
};
