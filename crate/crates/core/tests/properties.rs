use num_complex::Complex64;
use proptest::prelude::*;

use qmultislice::circuit::{Circuit, Gate, StateVector};
use qmultislice::field::RealField;
use qmultislice::multislice::{
    classical_step, field_relative_error, init_plane_wave, quantum_step_circuits, run_simulation, EngineKind,
    Representation, Setup, SimulationPlan, Truncation, WaveField,
};
use qmultislice::physics::{beam_params, build_propagator, FieldGrid, PotentialStack};
use qmultislice::synthesis::{
    build_phase_circuit, exact_diagonal_apply, phase_aligned_deviation, truncate, walsh_decompose, DiagonalSpec,
    TruncationPolicy,
};
use qmultislice::walsh::{fwht, hamming_distance, GridIndex};

fn direct_walsh(values: &[f64]) -> Vec<f64> {
    let len = values.len();
    (0..len)
        .map(|u| {
            values
                .iter()
                .enumerate()
                .map(|(x, v)| if (u & x).count_ones() % 2 == 0 { *v } else { -*v })
                .sum::<f64>()
                / len as f64
        })
        .collect()
}

fn phases(m: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<f64>> {
    m.prop_flat_map(|m| prop::collection::vec(-4.0..4.0f64, 1 << m))
}

fn random_state(m: usize, seed: &[f64]) -> StateVector {
    let amps: Vec<Complex64> = (0..1 << m)
        .map(|i| Complex64::new(seed[i % seed.len()] + 0.1 * i as f64, (i as f64 * 0.7).sin()))
        .collect();
    StateVector::normalized(amps).unwrap()
}

fn gate_strategy(m: usize) -> impl Strategy<Value = Gate> {
    let q = 0..m;
    prop_oneof![
        q.clone().prop_map(Gate::Hadamard),
        (q.clone(), -3.0..3.0f64).prop_map(|(target, theta)| Gate::ParityPhase { theta, target }),
        (q.clone(), q.clone(), -3.0..3.0f64)
            .prop_filter("distinct", |(a, b, _)| a != b)
            .prop_map(|(control, target, theta)| Gate::ControlledPhase { theta, control, target }),
        (q.clone(), q.clone())
            .prop_filter("distinct", |(a, b)| a != b)
            .prop_map(|(control, target)| Gate::Cnot { control, target }),
        (q.clone(), q)
            .prop_filter("distinct", |(a, b)| a != b)
            .prop_map(|(a, b)| Gate::Swap(a, b)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fwht_matches_direct_sum_and_inverts(values in phases(1..=7)) {
        let spectrum = fwht(&values).unwrap();
        let direct = direct_walsh(&values);
        for (a, b) in spectrum.coefficients().iter().zip(&direct) {
            prop_assert!((a - b).abs() < 1e-12);
        }
        for (a, b) in spectrum.expand().iter().zip(&values) {
            prop_assert!((a - b).abs() < 1e-12);
        }
        // Parseval with the 1/N forward scaling
        let energy: f64 = values.iter().map(|v| v * v).sum();
        let coeff: f64 = spectrum.coefficients().iter().map(|w| w * w).sum::<f64>() * values.len() as f64;
        prop_assert!((energy - coeff).abs() <= 1e-10 * energy.max(1.0));
    }

    #[test]
    fn random_circuits_are_unitary(gates in prop::collection::vec(gate_strategy(4), 0..40), seed in prop::collection::vec(-1.0..1.0f64, 16)) {
        let circuit = Circuit::from_gates(4, gates).unwrap();
        let input = random_state(4, &seed);
        let mut state = input.clone();
        circuit.apply_to(&mut state).unwrap();
        prop_assert!((state.norm_sqr() - 1.0).abs() < 1e-12);
        circuit.inverse().apply_to(&mut state).unwrap();
        let dev = state
            .amplitudes()
            .iter()
            .zip(input.amplitudes())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).norm()));
        prop_assert!(dev < 1e-11);
    }

    #[test]
    fn truncated_circuit_equals_kept_expansion(values in phases(2..=6), tau in 0.0..0.9f64) {
        let spec = DiagonalSpec::new(values.clone()).unwrap();
        let spectrum = walsh_decompose(&spec).unwrap();
        let kept = truncate(&spectrum, &TruncationPolicy::new(tau).unwrap());
        let circuit = build_phase_circuit(&kept).unwrap();
        let m = spec.qubits();
        let input = random_state(m, &values);

        let mut via_circuit = input.clone();
        circuit.apply_to(&mut via_circuit).unwrap();
        let mut oracle = input.clone();
        exact_diagonal_apply(&mut oracle, &DiagonalSpec::new(kept.expand()).unwrap()).unwrap();
        prop_assert!(phase_aligned_deviation(via_circuit.amplitudes(), oracle.amplitudes()) < 1e-10);

        // pointwise phase error is bounded by the dropped weight
        let approx = kept.expand();
        let mean = spectrum.get(0);
        for (a, v) in approx.iter().zip(&values) {
            prop_assert!((a + mean - v).abs() <= kept.dropped_weight() + 1e-9);
        }
    }

    #[test]
    fn kept_count_is_monotone_in_tau(values in phases(2..=6), a in 0.0..0.99f64, b in 0.0..0.99f64) {
        let spectrum = fwht(&values).unwrap();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let s_lo = truncate(&spectrum, &TruncationPolicy::new(lo).unwrap());
        let s_hi = truncate(&spectrum, &TruncationPolicy::new(hi).unwrap());
        prop_assert!(s_hi.len() <= s_lo.len());
        prop_assert!(s_hi.terms().iter().all(|t| s_lo.terms().iter().any(|u| u.mask == t.mask)));
    }

    #[test]
    fn cnot_cost_matches_parity_configuration_distance(values in phases(2..=6), tau in 0.0..0.9f64) {
        let m = values.len().trailing_zeros() as usize;
        let spectrum = fwht(&values).unwrap();
        let kept = truncate(&spectrum, &TruncationPolicy::new(tau).unwrap());
        let circuit = build_phase_circuit(&kept).unwrap();

        // Track what parity of the input bits each qubit holds.
        let identity: Vec<usize> = (0..m).map(|q| 1 << q).collect();
        let mut rows = identity.clone();
        let mut previous = identity.clone();
        let mut cnots = 0u32;
        let mut term = 0;
        for gate in circuit.gates() {
            match *gate {
                Gate::Cnot { control, target } => {
                    prop_assert_eq!(rows[control], 1 << control, "controls stay in the computational basis");
                    rows[target] ^= rows[control];
                    cnots += 1;
                }
                Gate::ParityPhase { theta, target } => {
                    let expected = kept.terms()[term];
                    prop_assert_eq!(rows[target], expected.mask);
                    prop_assert_eq!(theta, expected.coefficient);
                    let distance: u32 = rows.iter().zip(&previous).map(|(a, b)| hamming_distance(*a, *b)).sum();
                    prop_assert_eq!(cnots, distance);
                    if term > 0 {
                        let before = kept.terms()[term - 1].mask;
                        if previous.iter().position(|&r| r == before) == Some(target) {
                            prop_assert!(cnots <= hamming_distance(before, expected.mask));
                        }
                    }
                    previous = rows.clone();
                    cnots = 0;
                    term += 1;
                }
                _ => prop_assert!(false, "unexpected gate {gate:?}"),
            }
        }
        prop_assert_eq!(term, kept.len());
        prop_assert_eq!(&rows, &identity);
        prop_assert!(cnots as usize <= m.saturating_sub(1));
    }
}

/// Naive 2D DFT oracle with the `e^{-2 pi i}` forward kernel, unitary scaling.
fn naive_dft2(data: &[Complex64], n: usize, inverse: bool) -> Vec<Complex64> {
    let sign = if inverse { 1.0 } else { -1.0 };
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    for ky in 0..n {
        for kx in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for y in 0..n {
                for x in 0..n {
                    let angle = sign * 2.0 * std::f64::consts::PI * ((kx * x + ky * y) as f64) / n as f64;
                    acc += data[y * n + x] * Complex64::from_polar(1.0, angle);
                }
            }
            out[ky * n + kx] = acc / n as f64;
        }
    }
    out
}

fn random_field(n: usize, values: &[f64], scale: f64) -> RealField {
    RealField::from_fn(n, |x, y| scale * values[(y * n + x) % values.len()])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn classical_step_matches_naive_dft(v in prop::collection::vec(-1.0..1.0f64, 64), p in prop::collection::vec(-2.0..2.0f64, 64)) {
        let n = 8;
        let slice = random_field(n, &v, 1.0);
        let prop_phase = random_field(n, &p, 1.0);
        let amps: Vec<Complex64> = (0..n * n).map(|i| Complex64::new(1.0 + v[i % 64], p[i % 64])).collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let psi = WaveField::new(n, amps.iter().map(|a| a / norm).collect(), Representation::Coordinate).unwrap();

        let fast = classical_step(&psi, &slice, &prop_phase).unwrap();

        let transmitted: Vec<Complex64> = psi.amplitudes().iter().zip(slice.values())
            .map(|(a, s)| a * Complex64::from_polar(1.0, *s)).collect();
        let mut k = naive_dft2(&transmitted, n, false);
        for (a, s) in k.iter_mut().zip(prop_phase.values()) {
            *a *= Complex64::from_polar(1.0, *s);
        }
        let oracle = naive_dft2(&k, n, true);
        let dev = fast.amplitudes().iter().zip(&oracle).fold(0.0f64, |m, (a, b)| m.max((a - b).norm()));
        prop_assert!(dev < 1e-12, "deviation {dev}");
        prop_assert!((fast.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn slice_circuits_match_classical_step(v in prop::collection::vec(-1.0..1.0f64, 64), bits in 2u32..=3) {
        let grid = GridIndex::new(bits).unwrap();
        let n = grid.axis_len();
        let fg = FieldGrid::new(bits, [5.0, 5.0]).unwrap();
        let beam = beam_params(1e5).unwrap();
        let slice = random_field(n, &v, 2.0);
        let propagator = build_propagator(&fg, &beam, 1.0).unwrap();
        let amps: Vec<Complex64> = (0..n * n).map(|i| Complex64::new(0.5 + v[i % 64].abs(), v[(i + 7) % 64])).collect();
        let state = StateVector::normalized(amps).unwrap();
        let psi = WaveField::from_state(state.clone(), Representation::Coordinate).unwrap();

        let circuits = quantum_step_circuits(&slice, &propagator, &Truncation::EXACT, &grid).unwrap();
        let mut q = state;
        circuits.composite().unwrap().apply_to(&mut q).unwrap();
        let c = classical_step(&psi, &slice, &propagator).unwrap();
        prop_assert!(phase_aligned_deviation(q.amplitudes(), c.amplitudes()) < 1e-10);
    }

    #[test]
    fn single_slice_error_within_dropped_weight(v in prop::collection::vec(0.0..1.0f64, 256), tau in 0.01..0.5f64) {
        let bits = 4;
        let n = 16;
        let fg = FieldGrid::new(bits, [8.0, 8.0]).unwrap();
        let beam = beam_params(1e5).unwrap();
        let slice = random_field(n, &v, 0.5);
        let propagator = build_propagator(&fg, &beam, 1.0).unwrap();
        let stack = |cells: Vec<RealField>| PotentialStack::from_parts(cells, 1, 1.0, propagator.clone()).unwrap();
        let setup = Setup::new(fg, stack(vec![slice.clone()])).unwrap();
        let exact = run_simulation(&setup, &SimulationPlan::new(EngineKind::QuantumExact)).unwrap();
        let plan = SimulationPlan::new(EngineKind::QuantumTruncated).with_truncation(Truncation::new(tau, 0.0).unwrap());
        let approx = run_simulation(&setup, &plan).unwrap();
        let eps = field_relative_error(&approx.final_probability(), &exact.final_probability()).unwrap();
        let spectrum = fwht(slice.values()).unwrap();
        let dropped = truncate(&spectrum, &TruncationPolicy::new(tau).unwrap()).dropped_weight();
        prop_assert!(eps <= 2.0 * dropped + 1e-12, "eps {eps} > 2 * {dropped}");
    }
}

#[test]
fn plane_wave_equals_hadamard_preparation() {
    for bits in 1..=4u32 {
        let n = 1usize << bits;
        let direct = init_plane_wave(n);
        let mut state = StateVector::zero(2 * bits as usize).unwrap();
        for q in 0..2 * bits as usize {
            state.apply(&Gate::Hadamard(q)).unwrap();
        }
        let dev = direct
            .amplitudes()
            .iter()
            .zip(state.amplitudes())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).norm()));
        assert!(dev < 1e-15);
        assert!((direct.norm_sqr() - 1.0).abs() < 1e-15);
    }
    assert!(init_plane_wave(4)
        .amplitudes()
        .iter()
        .all(|a| *a == Complex64::new(0.25, 0.0)));
}
