use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::beam::BeamParams;
use super::species::{atomic_potential_unchecked, AtomSpecies, Prefactor};
use crate::error::{Error, Result};
use crate::field::RealField;
use crate::walsh::GridIndex;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisAtom {
    /// Fractional coordinates in `[0, 1)^3`.
    pub position: [f64; 3],
    pub species: String,
}

/// A cubic crystal: basis atoms repeated over `cells` unit cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Specimen {
    /// Cubic lattice constant, angstrom.
    pub lattice_constant: f64,
    pub basis: Vec<BasisAtom>,
    /// Repetitions along x, y (transverse) and z (beam direction).
    pub cells: [usize; 3],
    pub slices_per_cell: usize,
    pub species: BTreeMap<String, AtomSpecies>,
    #[serde(default)]
    pub potential: PotentialModel,
}

/// Choices that fix how the crystal potential is built.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PotentialModel {
    pub slicing: Slicing,
    pub prefactor: Prefactor,
}

/// How atoms contribute to the slice planes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Slicing {
    /// Each atom lies on the plane nearest its height and contributes its
    /// potential at in-plane distance; other planes see nothing of it.
    NearestPlane,
    /// Every plane samples the full 3D potential of all atoms, including
    /// images along the beam, at its own height.
    #[default]
    Sectioned,
}

impl Specimen {
    /// Face-centred cubic conventional cell of `species`.
    pub fn fcc(species: AtomSpecies, lattice_constant: f64, cells: [usize; 3], slices_per_cell: usize) -> Self {
        let label = species.label.clone();
        let basis = [[0.0, 0.0, 0.0], [0.5, 0.5, 0.0], [0.5, 0.0, 0.5], [0.0, 0.5, 0.5]]
            .into_iter()
            .map(|position| BasisAtom {
                position,
                species: label.clone(),
            })
            .collect();
        Specimen {
            lattice_constant,
            basis,
            cells,
            slices_per_cell,
            species: BTreeMap::from([(label, species)]),
            potential: PotentialModel::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let issues = self.issues();
        if issues.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(issues))
        }
    }

    /// Every validation problem, with the offending field named.
    pub fn issues(&self) -> Vec<String> {
        let mut issues = Vec::new();
        if !(self.lattice_constant > 0.0) || !self.lattice_constant.is_finite() {
            issues.push(format!(
                "specimen.lattice_constant: {} is not positive",
                self.lattice_constant
            ));
        }
        if self.basis.is_empty() {
            issues.push("specimen.basis: specimen has no atoms".to_string());
        }
        if self.slices_per_cell == 0 {
            issues.push("specimen.slices_per_cell: must be at least 1".to_string());
        }
        if self.cells[0] == 0 || self.cells[1] == 0 {
            issues.push("specimen.cells: transverse repetitions must be at least 1".to_string());
        }
        for (i, atom) in self.basis.iter().enumerate() {
            if atom.position.iter().any(|p| !(0.0..1.0).contains(p)) {
                issues.push(format!(
                    "specimen.basis[{i}].position: {:?} is outside [0, 1)",
                    atom.position
                ));
            }
            if !self.species.contains_key(&atom.species) {
                issues.push(format!(
                    "specimen.basis[{i}].species: unknown species `{}`",
                    atom.species
                ));
            }
        }
        for (label, s) in &self.species {
            if let Err(e) = s.validate() {
                issues.push(format!("species.{label}: {e}"));
            }
        }
        issues
    }

    /// Slice thickness `d = a0 / slices_per_cell`, angstrom.
    pub fn slice_thickness(&self) -> f64 {
        self.lattice_constant / self.slices_per_cell as f64
    }

    pub fn slice_count(&self) -> usize {
        self.cells[2] * self.slices_per_cell
    }

    /// Transverse supercell size `(L_x, L_y)`, angstrom.
    pub fn transverse_extent(&self) -> [f64; 2] {
        [
            self.cells[0] as f64 * self.lattice_constant,
            self.cells[1] as f64 * self.lattice_constant,
        ]
    }

    /// Index of the slice plane within a unit cell nearest to fractional height `z`.
    pub fn cell_slice_of(&self, z: f64) -> usize {
        ((z * self.slices_per_cell as f64).round() as usize) % self.slices_per_cell
    }
}

/// `N x N` sampling of a transverse area `extent` (angstrom).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldGrid {
    pub index: GridIndex,
    pub extent: [f64; 2],
}

impl FieldGrid {
    pub fn new(bits: u32, extent: [f64; 2]) -> Result<Self> {
        let index = GridIndex::new(bits)?;
        if extent.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
            return Err(Error::param("grid.extent", format!("{extent:?} must be positive")));
        }
        Ok(FieldGrid { index, extent })
    }

    pub fn bits(&self) -> u32 {
        self.index.bits()
    }

    pub fn axis_len(&self) -> usize {
        self.index.axis_len()
    }

    pub fn qubits(&self) -> usize {
        self.index.qubits()
    }

    /// Pixel size `(L_x/N, L_y/N)`, angstrom.
    pub fn pixel(&self) -> [f64; 2] {
        let n = self.axis_len() as f64;
        [self.extent[0] / n, self.extent[1] / n]
    }
}

/// Default lateral cutoff for periodic images, in lattice constants.
pub const DEFAULT_CUTOFF_CELLS: f64 = 3.0;

/// Builds the phase `sigma * d * V_t` of each distinct slice within one unit
/// cell; the slices of deeper cells repeat these.
///
/// Plane `t` sits at height `t a0 / slices_per_cell`. `V_t` is evaluated at
/// pixel centres `((i + 1/2) L/N)` and includes periodic images within
/// `cutoff` angstrom; see [`Slicing`] for which atoms reach which plane.
pub fn build_potential_slices(
    specimen: &Specimen,
    grid: &FieldGrid,
    beam: &BeamParams,
    cutoff: f64,
) -> Result<Vec<RealField>> {
    specimen.validate()?;
    if !(cutoff >= specimen.lattice_constant) {
        return Err(Error::param(
            "potential.cutoff",
            format!("{cutoff} angstrom is smaller than one lattice constant"),
        ));
    }
    let extent = specimen.transverse_extent();
    if (0..2).any(|i| (grid.extent[i] - extent[i]).abs() > 1e-9 * extent[i]) {
        return Err(Error::ShapeMismatch(format!(
            "grid extent {:?} does not match the specimen cross-section {extent:?}",
            grid.extent
        )));
    }

    let spc = specimen.slices_per_cell;
    let a0 = specimen.lattice_constant;
    let d = specimen.slice_thickness();
    // (x, y, dz) per atom and plane; dz is the height above the plane.
    let mut sources: Vec<Vec<([f64; 3], &AtomSpecies)>> = vec![Vec::new(); spc];
    let z_images = (cutoff / a0).ceil() as i64 + 1;
    for atom in &specimen.basis {
        let species = &specimen.species[&atom.species];
        for cy in 0..specimen.cells[1] {
            for cx in 0..specimen.cells[0] {
                let x = (cx as f64 + atom.position[0]) * a0;
                let y = (cy as f64 + atom.position[1]) * a0;
                match specimen.potential.slicing {
                    Slicing::NearestPlane => {
                        let t = specimen.cell_slice_of(atom.position[2]);
                        sources[t].push(([x, y, 0.0], species));
                    }
                    Slicing::Sectioned => {
                        for (t, plane) in sources.iter_mut().enumerate() {
                            for jz in -z_images..=z_images {
                                let dz = (atom.position[2] + jz as f64) * a0 - t as f64 * d;
                                if dz.abs() <= cutoff {
                                    plane.push(([x, y, dz], species));
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    let scale = beam.sigma * d;
    let prefactor = specimen.potential.prefactor.value();
    let n = grid.axis_len();
    let pixel = grid.pixel();
    let images = [
        (cutoff / extent[0]).ceil() as i64 + 1,
        (cutoff / extent[1]).ceil() as i64 + 1,
    ];
    let cutoff2 = cutoff * cutoff;

    Ok(sources
        .iter()
        .map(|atoms| {
            RealField::from_fn(n, |ix, iy| {
                if atoms.is_empty() {
                    return 0.0;
                }
                let px = (ix as f64 + 0.5) * pixel[0];
                let py = (iy as f64 + 0.5) * pixel[1];
                let mut v = 0.0;
                for &(pos, species) in atoms {
                    let dz2 = pos[2] * pos[2];
                    for jy in -images[1]..=images[1] {
                        let dy = py - pos[1] - jy as f64 * extent[1];
                        for jx in -images[0]..=images[0] {
                            let dx = px - pos[0] - jx as f64 * extent[0];
                            let r2 = dx * dx + dy * dy + dz2;
                            if r2 <= cutoff2 {
                                v += atomic_potential_unchecked(r2.sqrt(), species, prefactor);
                            }
                        }
                    }
                }
                scale * v
            })
        })
        .collect())
}

/// Signed spatial frequency of FFT bin `q`, 1/angstrom.
#[inline]
pub fn signed_frequency(q: usize, axis_len: usize, extent: f64) -> f64 {
    let signed = if q < axis_len / 2 {
        q as f64
    } else {
        q as f64 - axis_len as f64
    };
    signed / extent
}

/// Propagator phase `-pi d lambda |Q|^2` over FFT-ordered frequency bins.
pub fn build_propagator(grid: &FieldGrid, beam: &BeamParams, thickness: f64) -> Result<RealField> {
    if !(thickness > 0.0) {
        return Err(Error::param("thickness", format!("{thickness} is not positive")));
    }
    let n = grid.axis_len();
    let c = -PI * thickness * beam.wavelength;
    let qx: Vec<f64> = (0..n).map(|q| signed_frequency(q, n, grid.extent[0]).powi(2)).collect();
    let qy: Vec<f64> = (0..n).map(|q| signed_frequency(q, n, grid.extent[1]).powi(2)).collect();
    Ok(RealField::from_fn(n, |x, y| c * (qx[x] + qy[y])))
}

/// Slice phases for one unit cell plus the shared propagator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialStack {
    cell_slices: Vec<RealField>,
    slice_count: usize,
    thickness: f64,
    propagator: RealField,
}

impl PotentialStack {
    pub fn build(specimen: &Specimen, grid: &FieldGrid, beam: &BeamParams, cutoff: f64) -> Result<Self> {
        let cell_slices = build_potential_slices(specimen, grid, beam, cutoff)?;
        let thickness = specimen.slice_thickness();
        let propagator = build_propagator(grid, beam, thickness)?;
        Ok(PotentialStack {
            cell_slices,
            slice_count: specimen.slice_count(),
            thickness,
            propagator,
        })
    }

    pub fn from_parts(
        cell_slices: Vec<RealField>,
        slice_count: usize,
        thickness: f64,
        propagator: RealField,
    ) -> Result<Self> {
        if cell_slices.is_empty() {
            return Err(Error::param("cell_slices", "at least one slice is required"));
        }
        let n = propagator.size();
        if cell_slices.iter().any(|s| s.size() != n) {
            return Err(Error::ShapeMismatch("slice and propagator sizes differ".into()));
        }
        let all_finite = cell_slices
            .iter()
            .chain(std::iter::once(&propagator))
            .all(|f| f.values().iter().all(|v| v.is_finite()));
        if !all_finite {
            return Err(Error::param("fields", "non-finite phase"));
        }
        Ok(PotentialStack {
            cell_slices,
            slice_count,
            thickness,
            propagator,
        })
    }

    /// Distinct slices of one unit cell.
    pub fn cell_slices(&self) -> &[RealField] {
        &self.cell_slices
    }

    pub fn slices_per_cell(&self) -> usize {
        self.cell_slices.len()
    }

    pub fn slice_count(&self) -> usize {
        self.slice_count
    }

    /// Phase field of slice `t` of the whole specimen.
    pub fn slice_phase(&self, t: usize) -> &RealField {
        &self.cell_slices[t % self.cell_slices.len()]
    }

    pub fn propagator(&self) -> &RealField {
        &self.propagator
    }

    pub fn thickness(&self) -> f64 {
        self.thickness
    }

    pub fn axis_len(&self) -> usize {
        self.propagator.size()
    }

    /// Cell slice with the largest peak phase (the atomic plane).
    pub fn strongest_slice(&self) -> usize {
        let mut best = (0, -1.0);
        for (i, s) in self.cell_slices.iter().enumerate() {
            let m = s.max_abs();
            if m > best.1 {
                best = (i, m);
            }
        }
        best.0
    }
}

/// Outcome of the slice-thickness advisory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThicknessAdvisory {
    pub thickness: f64,
    pub potential_scale: f64,
    /// `criterion_scale * k * d_p^2`, angstrom.
    pub limit: f64,
    pub warning: Option<String>,
}

/// Compares `d` against `criterion_scale * k * d_p^2`; warns, never fails.
pub fn check_slice_thickness(
    thickness: f64,
    potential_scale: f64,
    beam: &BeamParams,
    criterion_scale: f64,
) -> ThicknessAdvisory {
    let limit = criterion_scale * beam.wavenumber * potential_scale * potential_scale;
    let warning = (thickness > limit).then(|| {
        format!(
            "slice thickness {thickness:.6} A exceeds the advisory limit {limit:.6} A \
             (scale {criterion_scale} x k {:.4} 1/A x d_p^2 with d_p = {potential_scale} A)",
            beam.wavenumber
        )
    });
    ThicknessAdvisory {
        thickness,
        potential_scale,
        limit,
        warning,
    }
}
