use std::collections::BTreeMap;
use std::f64::consts::PI;

use qmultislice::config::default_setup;
use qmultislice::physics::*;
use qmultislice::walsh::fwht;

// Derived CODATA 2018 values in eV and angstrom, kept apart from the
// crate's SI table so the checks below take a different route.
const HC_EV_ANGSTROM: f64 = 12_398.419_843_320_026;
const REST_ENERGY_EV: f64 = 510_998.950_00;

fn oracle_wavelength(volts: f64) -> f64 {
    HC_EV_ANGSTROM / (volts * (2.0 * REST_ENERGY_EV + volts)).sqrt()
}

fn oracle_sigma(volts: f64) -> f64 {
    2.0 * PI / (oracle_wavelength(volts) * volts) * (REST_ENERGY_EV + volts) / (2.0 * REST_ENERGY_EV + volts)
}

/// Gaussian potential sum with `h^2/(2 pi m0 e)` written as `(hc)^2 / (2 pi m0c^2)`.
fn oracle_potential(r: f64, s: &AtomSpecies) -> f64 {
    let c = HC_EV_ANGSTROM * HC_EV_ANGSTROM / (2.0 * PI * REST_ENERGY_EV);
    let mut v = 0.0;
    for i in 0..4 {
        let w = s.b[i] + s.debye_waller;
        v += s.a[i] * (4.0 * PI / w).powf(1.5) * (-4.0 * PI * PI * r * r / w).exp();
    }
    c * v
}

#[test]
fn beam_at_100_kv() {
    let b = beam_params(100e3).unwrap();
    assert!((b.wavelength - 0.03701).abs() < 5e-6, "{}", b.wavelength);
    assert!((b.wavelength / oracle_wavelength(100e3) - 1.0).abs() < 1e-9);
    assert!((b.mass_ratio - 1.1957).abs() < 1e-4);
    assert!((b.mass_ratio - (1.0 + 100e3 / REST_ENERGY_EV)).abs() < 1e-9);
    assert!(
        (b.sigma / oracle_sigma(100e3) - 1.0).abs() < 1e-9,
        "{} vs {}",
        b.sigma,
        oracle_sigma(100e3)
    );
    assert!((b.sigma - 9.244e-4).abs() < 1e-6);
    assert!((b.wavenumber * b.wavelength - 1.0).abs() < 1e-15);
}

#[test]
fn beam_approaches_nonrelativistic_limit() {
    let b = beam_params(100.0).unwrap();
    let classical = HC_EV_ANGSTROM / (2.0 * REST_ENERGY_EV * 100.0).sqrt();
    assert!((b.wavelength / classical - 1.0).abs() < 1e-4);
    assert!((b.mass_ratio - 1.0).abs() < 1e-3);
    for v in [1e3, 3e4, 2e5, 1e6] {
        let b = beam_params(v).unwrap();
        assert!(b.wavelength > 0.0 && b.mass_ratio >= 1.0 && b.sigma > 0.0);
        assert!((b.wavelength / oracle_wavelength(v) - 1.0).abs() < 1e-9);
    }
}

#[test]
fn gold_potential_matches_oracle() {
    let au = AtomSpecies::gold();
    for r in [0.0, 0.05, 0.1, 0.3, 0.7, 1.2, 2.0, 4.0] {
        let v = atomic_potential(r, &au, Prefactor::Planck).unwrap();
        let o = oracle_potential(r, &au);
        assert!((v / o - 1.0).abs() < 1e-10, "r={r}: {v} vs {o}");
        let reduced = atomic_potential(r, &au, Prefactor::ReducedPlanck).unwrap();
        assert!((v / reduced - 4.0 * PI * PI).abs() < 1e-9);
    }
    let peak = atomic_potential(0.0, &au, Prefactor::Planck).unwrap();
    assert_eq!(peak, au.peak_potential(Prefactor::Planck));
    assert!(atomic_potential(10.0, &au, Prefactor::Planck).unwrap() < 1e-12 * peak);
}

#[test]
fn potential_is_positive_and_decreasing() {
    let au = AtomSpecies::gold();
    let mut last = f64::INFINITY;
    for i in 0..200 {
        let v = atomic_potential(i as f64 * 0.02, &au, Prefactor::Planck).unwrap();
        assert!(v > 0.0 && v <= last);
        last = v;
    }
    assert!(atomic_potential(-1.0, &au, Prefactor::Planck).is_err());
    let mut bad = au.clone();
    bad.b[2] = -bad.debye_waller - 1.0;
    assert!(atomic_potential(0.5, &bad, Prefactor::Planck).is_err());
}

fn single_atom(cells_z: usize) -> Specimen {
    Specimen {
        lattice_constant: 4.0,
        basis: vec![BasisAtom {
            position: [0.5, 0.5, 0.0],
            species: "Au".into(),
        }],
        cells: [1, 1, cells_z],
        slices_per_cell: 4,
        species: BTreeMap::from([("Au".to_string(), AtomSpecies::gold())]),
        potential: PotentialModel {
            slicing: Slicing::NearestPlane,
            prefactor: Prefactor::Planck,
        },
    }
}

#[test]
fn centred_atom_gives_complement_symmetric_slice() {
    let specimen = single_atom(1);
    let grid = FieldGrid::new(4, specimen.transverse_extent()).unwrap();
    let beam = beam_params(100e3).unwrap();
    let slices = build_potential_slices(&specimen, &grid, &beam, 12.0).unwrap();
    let n = grid.axis_len();
    let f = &slices[0];
    for y in 0..n {
        for x in 0..n {
            let v = f.get(x, y);
            assert!((v - f.get(n - 1 - x, y)).abs() <= 1e-14 * v);
            assert!((v - f.get(x, n - 1 - y)).abs() <= 1e-14 * v);
        }
    }
    for empty in &slices[1..] {
        assert!(empty.is_zero());
    }
}

#[test]
fn deeper_specimens_repeat_the_cell() {
    for slicing in [Slicing::NearestPlane, Slicing::Sectioned] {
        let mut a = single_atom(1);
        a.potential.slicing = slicing;
        let mut b = a.clone();
        b.cells[2] = 2;
        let grid = FieldGrid::new(3, a.transverse_extent()).unwrap();
        let beam = beam_params(100e3).unwrap();
        let sa = PotentialStack::build(&a, &grid, &beam, 12.0).unwrap();
        let sb = PotentialStack::build(&b, &grid, &beam, 12.0).unwrap();
        assert_eq!(sb.slice_count(), 2 * sa.slice_count());
        for t in 0..sb.slice_count() {
            assert_eq!(sb.slice_phase(t), sa.slice_phase(t % sa.slice_count()));
        }
    }
}

#[test]
fn slice_builder_rejects_bad_geometry() {
    let specimen = single_atom(1);
    let beam = beam_params(100e3).unwrap();
    let grid = FieldGrid::new(3, specimen.transverse_extent()).unwrap();
    assert!(build_potential_slices(&specimen, &grid, &beam, 3.0).is_err());
    let wrong = FieldGrid::new(3, [5.0, 4.0]).unwrap();
    assert!(build_potential_slices(&specimen, &wrong, &beam, 12.0).is_err());
    let mut empty = specimen.clone();
    empty.basis.clear();
    assert!(build_potential_slices(&empty, &grid, &beam, 12.0).is_err());
}

#[test]
fn propagator_is_an_even_separable_quadratic() {
    let beam = beam_params(100e3).unwrap();
    let grid = FieldGrid::new(4, [4.078, 6.0]).unwrap();
    let d = 0.25;
    let p = build_propagator(&grid, &beam, d).unwrap();
    let n = grid.axis_len();
    assert_eq!(p.get(0, 0), 0.0);
    for q in 1..n / 2 {
        assert_eq!(p.get(q, 0), p.get(n - q, 0));
        assert_eq!(p.get(0, q), p.get(0, n - q));
    }
    let freq = |q: usize, l: f64| {
        if q < n / 2 {
            q as f64 / l
        } else {
            (q as f64 - n as f64) / l
        }
    };
    for y in 0..n {
        for x in 0..n {
            let expected = -PI * d * beam.wavelength * (freq(x, 4.078).powi(2) + freq(y, 6.0).powi(2));
            assert!((p.get(x, y) - expected).abs() < 1e-12 * expected.abs().max(1.0));
            // separable: f(x, y) = f(x, 0) + f(0, y)
            assert!((p.get(x, y) - p.get(x, 0) - p.get(0, y)).abs() < 1e-12);
        }
    }
    assert!(build_propagator(&grid, &beam, 0.0).is_err());
}

#[test]
fn propagator_spectrum_lives_on_row_and_column() {
    let beam = beam_params(100e3).unwrap();
    for bits in 4..=6u32 {
        let grid = FieldGrid::new(bits, [4.078, 4.078]).unwrap();
        let p = build_propagator(&grid, &beam, 4.078 / 16.0).unwrap();
        let w = fwht(p.values()).unwrap();
        let x_bits = (1usize << bits) - 1;
        for (u, c) in w.coefficients().iter().enumerate().skip(1) {
            let (ux, uy) = (u & x_bits, u >> bits);
            let allowed = (ux == 0 || uy == 0) && ux.count_ones() <= 2 && uy.count_ones() <= 2;
            if !allowed {
                assert!(c.abs() < 1e-12 * w.w_max(), "n={bits} u={u:b}: {c}");
            }
        }
    }
}

#[test]
fn default_slices_have_even_spectra() {
    let setup = default_setup(4, 1).unwrap();
    for slice in setup.stack.cell_slices() {
        let w = fwht(slice.values()).unwrap();
        for (u, c) in w.coefficients().iter().enumerate() {
            if u.count_ones() % 2 == 1 {
                assert!(c.abs() < 1e-12 * w.w_max(), "u={u:b}: {c}");
            }
        }
    }
}

#[test]
fn thickness_advisory() {
    let beam = beam_params(100e3).unwrap();
    let fine = check_slice_thickness(0.01, 0.2, &beam, 1.0);
    assert!(fine.warning.is_none());
    let thick = check_slice_thickness(10.0, 0.2, &beam, 1.0);
    let msg = thick.warning.expect("warning");
    assert!(msg.contains("10.000000") && msg.contains(&format!("{:.6}", thick.limit)));
    // 16 slices per Au cell
    assert!(check_slice_thickness(4.078 / 16.0, 0.2, &beam, 1.0).warning.is_none());
}
