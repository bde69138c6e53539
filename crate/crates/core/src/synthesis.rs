//! Circuit builders: the QFT family, and diagonal phase operators compiled
//! into CNOT + parity-phase circuits from their (truncated) Walsh spectra.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate, StateVector};
use crate::error::{Error, Result};
use crate::field::RealField;
use crate::walsh::{fwht, gray_code, hamming_distance, log2_exact, WalshSpectrum, ZERO_COEFFICIENT};

/// Phases `f(r)` in radians of the diagonal operator `|r> -> e^{i f(r)} |r>`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagonalSpec {
    phases: Vec<f64>,
}

impl DiagonalSpec {
    pub fn new(phases: Vec<f64>) -> Result<Self> {
        log2_exact(phases.len())?;
        if let Some(i) = phases.iter().position(|p| !p.is_finite()) {
            return Err(Error::param("phases", format!("non-finite phase at index {i}")));
        }
        Ok(DiagonalSpec { phases })
    }

    /// Reshapes a 2D phase field `f(x, y)` into `g(r)` with `r = N*y + x`.
    pub fn from_field(field: &RealField) -> Result<Self> {
        DiagonalSpec::new(field.values().to_vec())
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn qubits(&self) -> usize {
        self.phases.len().trailing_zeros() as usize
    }
}

/// Relative cutoff: terms with `|W(u)| < tau * w_max` are dropped. Mask 0 (a
/// global phase) and exact zeros are always dropped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    tau: f64,
}

impl TruncationPolicy {
    pub const EXACT: TruncationPolicy = TruncationPolicy { tau: 0.0 };

    pub fn new(tau: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&tau) {
            return Err(Error::param("tau", format!("{tau} is outside [0, 1)")));
        }
        Ok(TruncationPolicy { tau })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalshTerm {
    pub mask: usize,
    pub coefficient: f64,
}

/// Surviving Walsh terms in Gray-code order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeptTermSequence {
    qubits: usize,
    terms: Vec<WalshTerm>,
    dropped_weight: f64,
}

impl KeptTermSequence {
    /// Validates that `terms` is a subsequence of the Gray enumeration of
    /// `1..2^m` with no repeated or zero masks.
    pub fn from_terms(qubits: usize, terms: Vec<WalshTerm>) -> Result<Self> {
        let len = 1usize << qubits;
        let mut last_position = 0usize;
        for t in &terms {
            if t.mask == 0 || t.mask >= len {
                return Err(Error::param("mask", format!("{} is not in 1..{len}", t.mask)));
            }
            let position = gray_position(t.mask);
            if position <= last_position {
                return Err(Error::param(
                    "terms",
                    format!("mask {:#b} breaks Gray order or repeats", t.mask),
                ));
            }
            last_position = position;
        }
        Ok(KeptTermSequence {
            qubits,
            terms,
            dropped_weight: 0.0,
        })
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn terms(&self) -> &[WalshTerm] {
        &self.terms
    }

    /// Number of kept terms `s`.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `sum |W(u)|` over the dropped nonzero masks: a bound on the phase error.
    pub fn dropped_weight(&self) -> f64 {
        self.dropped_weight
    }

    /// Phases realized by the kept terms, `sum_kept W(u) T_u(r)`.
    pub fn expand(&self) -> Vec<f64> {
        let mut coefficients = vec![0.0; 1usize << self.qubits];
        for t in &self.terms {
            coefficients[t.mask] = t.coefficient;
        }
        WalshSpectrum::from_coefficients(coefficients)
            .expect("power-of-two length")
            .expand()
    }

    /// CSV with columns `order_position,mask_binary,coefficient`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "order_position,mask_binary,coefficient")?;
        let width = self.qubits.max(1);
        for t in &self.terms {
            writeln!(
                out,
                "{},{:0width$b},{:e}",
                gray_position(t.mask),
                t.mask,
                t.coefficient,
                width = width
            )?;
        }
        Ok(())
    }
}

/// Position of `mask` in the Gray enumeration (inverse Gray code).
pub fn gray_position(mask: usize) -> usize {
    let mut i = mask;
    let mut shift = 1;
    while shift < usize::BITS {
        i ^= i >> shift;
        shift <<= 1;
    }
    i
}

/// Standard QFT on `n` qubits with trailing swaps, so that its unitary is
/// `U[j][k] = e^{2 pi i jk / 2^n} / sqrt(2^n)`.
pub fn build_qft(n: usize) -> Result<Circuit> {
    if n == 0 {
        return Err(Error::param("n", "QFT needs at least one qubit"));
    }
    let mut c = Circuit::new(n);
    for target in (0..n).rev() {
        c.push(Gate::Hadamard(target))?;
        for control in (0..target).rev() {
            let order = target - control + 1;
            c.push(Gate::ControlledPhase {
                theta: 2.0 * PI / (1u64 << order) as f64,
                control,
                target,
            })?;
        }
    }
    for q in 0..n / 2 {
        c.push(Gate::Swap(q, n - 1 - q))?;
    }
    Ok(c)
}

pub fn build_iqft(n: usize) -> Result<Circuit> {
    Ok(build_qft(n)?.inverse())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Coordinate to momentum, kernel `e^{-2 pi i jk/N}` per axis.
    Forward,
    /// Momentum to coordinate, kernel `e^{+2 pi i jk/N}` per axis.
    Inverse,
}

/// Unitary 2D DFT over `2n` qubits: the 1D transform on qubits `0..n` (x)
/// and on `n..2n` (y).
///
/// The QFT carries the `e^{+2 pi i}` kernel, so the forward direction uses
/// the iQFT on each register, matching an unnormalized forward FFT scaled by
/// `1/N`.
pub fn build_2d_transform(n: usize, direction: Direction) -> Result<Circuit> {
    let axis = match direction {
        Direction::Forward => build_iqft(n)?,
        Direction::Inverse => build_qft(n)?,
    };
    let m = 2 * n;
    let mut c = axis.embed(m, 0)?;
    c.append(&axis.embed(m, n)?)?;
    Ok(c)
}

/// Same as [`build_2d_transform`] but taking the total register size.
pub fn build_2d_transform_for_qubits(m: usize, direction: Direction) -> Result<Circuit> {
    if !m.is_multiple_of(2) {
        return Err(Error::param(
            "m",
            format!("{m} qubits cannot split into two equal registers"),
        ));
    }
    build_2d_transform(m / 2, direction)
}

pub fn walsh_decompose(spec: &DiagonalSpec) -> Result<WalshSpectrum> {
    fwht(spec.phases())
}

/// Keeps every `u != 0` with `|W(u)| >= tau * w_max` that is not an exact
/// zero, in Gray-code order.
pub fn truncate(spectrum: &WalshSpectrum, policy: &TruncationPolicy) -> KeptTermSequence {
    let threshold = policy.tau() * spectrum.w_max();
    let coefficients = spectrum.coefficients();
    let mut terms = Vec::new();
    let mut dropped_weight = 0.0;
    for i in 1..coefficients.len() {
        let mask = gray_code(i);
        let w = coefficients[mask];
        if w.abs() > ZERO_COEFFICIENT && w.abs() >= threshold {
            terms.push(WalshTerm { mask, coefficient: w });
        } else {
            dropped_weight += w.abs();
        }
    }
    KeptTermSequence {
        qubits: spectrum.qubits(),
        terms,
        dropped_weight,
    }
}

/// Compiles kept Walsh terms into CNOT and parity-phase gates.
///
/// One qubit at a time (the target) holds a parity `parity(r & held)`; all
/// other qubits stay in the computational basis. For each term the target
/// is either kept, paying `hamming(held, u)` CNOTs, or moved to the highest
/// bit of `u` after restoring the old target. Ties go to the highest bit,
/// which is what gives one CNOT between adjacent full-Gray terms. The target
/// is restored at the end, so the circuit is exactly
/// `diag(e^{i sum_kept W(u) T_u(r)})`.
pub fn build_phase_circuit(terms: &KeptTermSequence) -> Result<Circuit> {
    let m = terms.qubits();
    let mut circuit = Circuit::new(m);
    let mut current: Option<(usize, usize)> = None;

    for term in terms.terms() {
        let u = term.mask;
        let top = usize::BITS as usize - 1 - u.leading_zeros() as usize;
        let target = match current {
            Some((t, held)) if t != top && (u >> t) & 1 == 1 => {
                let keep = hamming_distance(held, u);
                let switch = hamming_distance(held, 1 << t) + hamming_distance(1 << top, u);
                if keep < switch {
                    t
                } else {
                    top
                }
            }
            _ => top,
        };
        let held = match current {
            Some((t, held)) if t == target => held,
            Some((t, held)) => {
                emit_parity_cnots(&mut circuit, t, held ^ (1 << t))?;
                1 << target
            }
            None => 1 << target,
        };
        emit_parity_cnots(&mut circuit, target, held ^ u)?;
        circuit.push(Gate::ParityPhase {
            theta: term.coefficient,
            target,
        })?;
        current = Some((target, u));
    }
    if let Some((t, held)) = current {
        emit_parity_cnots(&mut circuit, t, held ^ (1 << t))?;
    }
    Ok(circuit)
}

/// Toggles each bit of `flips` in the target's parity via CNOTs from the
/// corresponding basis qubits.
fn emit_parity_cnots(circuit: &mut Circuit, target: usize, flips: usize) -> Result<()> {
    let mut bits = flips;
    while bits != 0 {
        let control = bits.trailing_zeros() as usize;
        circuit.push(Gate::Cnot { control, target })?;
        bits &= bits - 1;
    }
    Ok(())
}

/// `amplitude[r] *= e^{i phases[r]}`.
pub fn exact_diagonal_apply(state: &mut StateVector, spec: &DiagonalSpec) -> Result<()> {
    if state.len() != spec.phases().len() {
        return Err(Error::ShapeMismatch(format!(
            "{} phases for {} amplitudes",
            spec.phases().len(),
            state.len()
        )));
    }
    for (a, &p) in state.amplitudes_mut().iter_mut().zip(spec.phases()) {
        *a *= Complex64::from_polar(1.0, p);
    }
    Ok(())
}

/// Largest `|a_r - e^{i phi} b_r|`, with `phi` chosen to align the
/// largest-magnitude amplitude of `a`.
pub fn phase_aligned_deviation(a: &[Complex64], b: &[Complex64]) -> f64 {
    let (idx, _) = a.iter().enumerate().fold(
        (0, -1.0),
        |best, (i, z)| if z.norm() > best.1 { (i, z.norm()) } else { best },
    );
    let rotation = if b[idx].norm() > 0.0 {
        let r = a[idx] / b[idx];
        r / r.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - rotation * y).norm()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{circuit_unitary, run};
    use crate::walsh::walsh_value;

    #[test]
    fn gray_position_inverts_gray_code() {
        for i in 0..4096 {
            assert_eq!(gray_position(gray_code(i)), i);
        }
    }

    #[test]
    fn qft_gate_counts() {
        for n in 1..=7 {
            let census = build_qft(n).unwrap().census();
            assert_eq!(census.hadamard as usize, n);
            assert_eq!(census.controlled_phase as usize, n * (n - 1) / 2);
            assert_eq!(census.swap as usize, n / 2);
            assert_eq!(census.one_qubit as usize, n);
            assert_eq!(census.two_qubit as usize, n * (n - 1) / 2 + n / 2);
        }
        assert_eq!(build_qft(1).unwrap().gates(), &[Gate::Hadamard(0)]);
        assert_eq!(build_iqft(1).unwrap().gates(), &[Gate::Hadamard(0)]);
        assert!(build_qft(0).is_err());
    }

    #[test]
    fn two_d_transform_rejects_odd_registers() {
        assert!(build_2d_transform_for_qubits(5, Direction::Forward).is_err());
        assert_eq!(
            build_2d_transform_for_qubits(6, Direction::Forward).unwrap().qubits(),
            6
        );
    }

    #[test]
    fn truncate_examples() {
        let s = WalshSpectrum::from_coefficients(vec![9.0, 1.0, 0.4, 0.6]).unwrap();
        let kept = truncate(&s, &TruncationPolicy::new(0.5).unwrap());
        let masks: Vec<usize> = kept.terms().iter().map(|t| t.mask).collect();
        // Gray order of 1..3 is 1, 3, 2.
        assert_eq!(masks, vec![1, 3]);
        assert!((kept.dropped_weight() - 0.4).abs() < 1e-15);

        let kept = truncate(&s, &TruncationPolicy::EXACT);
        assert_eq!(kept.len(), 3);

        let s = WalshSpectrum::from_coefficients(vec![1.0, 0.0, 0.5, 1e-17]).unwrap();
        assert_eq!(truncate(&s, &TruncationPolicy::EXACT).len(), 1);
    }

    #[test]
    fn policy_bounds() {
        assert!(TruncationPolicy::new(-0.1).is_err());
        assert!(TruncationPolicy::new(1.0).is_err());
        assert!(TruncationPolicy::new(0.999).is_ok());
    }

    #[test]
    fn kept_sequence_validation() {
        let t = |mask| WalshTerm { mask, coefficient: 1.0 };
        assert!(KeptTermSequence::from_terms(2, vec![t(1), t(3), t(2)]).is_ok());
        assert!(KeptTermSequence::from_terms(2, vec![t(3), t(1)]).is_err());
        assert!(KeptTermSequence::from_terms(2, vec![t(0)]).is_err());
        assert!(KeptTermSequence::from_terms(2, vec![t(4)]).is_err());
        assert!(KeptTermSequence::from_terms(2, vec![t(1), t(1)]).is_err());
    }

    #[test]
    fn single_qubit_phase() {
        let theta = 0.9;
        let spec = DiagonalSpec::new(vec![0.0, theta]).unwrap();
        let spectrum = walsh_decompose(&spec).unwrap();
        assert!((spectrum.get(0) - theta / 2.0).abs() < 1e-15);
        assert!((spectrum.get(1) + theta / 2.0).abs() < 1e-15);
        let circuit = build_phase_circuit(&truncate(&spectrum, &TruncationPolicy::EXACT)).unwrap();
        assert_eq!(
            circuit.gates(),
            &[Gate::ParityPhase {
                theta: -theta / 2.0,
                target: 0
            }]
        );
        let u = circuit_unitary(&circuit).unwrap();
        let ratio = u.get(1, 1) / u.get(0, 0);
        assert!((ratio - Complex64::from_polar(1.0, theta)).norm() < 1e-15);
    }

    #[test]
    fn full_gray_sequence_costs_one_cnot_per_step() {
        for m in 1..=8 {
            let len = 1usize << m;
            let coefficients: Vec<f64> = (0..len).map(|u| 0.01 * (u as f64 + 1.0)).collect();
            let spectrum = WalshSpectrum::from_coefficients(coefficients).unwrap();
            let circuit = build_phase_circuit(&truncate(&spectrum, &TruncationPolicy::EXACT)).unwrap();
            let census = circuit.census();
            assert_eq!(census.parity_phase as usize, len - 1);
            assert_eq!(census.cnot as usize, len - 2);
            assert!(census.cnot as usize <= len);
            let mut cnots_between = 0;
            let mut seen_phase = false;
            for g in circuit.gates() {
                match g {
                    Gate::ParityPhase { .. } => {
                        if seen_phase {
                            assert_eq!(cnots_between, 1);
                        }
                        seen_phase = true;
                        cnots_between = 0;
                    }
                    Gate::Cnot { .. } => cnots_between += 1,
                    _ => unreachable!(),
                }
            }
            assert_eq!(cnots_between, 0, "no cleanup needed after the last Gray term");
        }
    }

    #[test]
    fn empty_terms_give_identity() {
        let kept = KeptTermSequence::from_terms(3, vec![]).unwrap();
        assert!(build_phase_circuit(&kept).unwrap().is_empty());
    }

    #[test]
    fn walsh_decompose_examples() {
        let s = walsh_decompose(&DiagonalSpec::new(vec![0.0; 16]).unwrap()).unwrap();
        assert!(s.coefficients().iter().all(|&c| c == 0.0));
        let phases: Vec<f64> = (0..16).map(|r| 0.3 * walsh_value(5, r) as f64).collect();
        let s = walsh_decompose(&DiagonalSpec::new(phases.clone()).unwrap()).unwrap();
        for u in 0..16 {
            assert!((s.get(u) - if u == 5 { 0.3 } else { 0.0 }).abs() < 1e-15);
        }
        for (a, b) in s.expand().iter().zip(&phases) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_diagonal_examples() {
        let s = StateVector::uniform(3).unwrap();
        let mut t = s.clone();
        exact_diagonal_apply(&mut t, &DiagonalSpec::new(vec![0.0; 8]).unwrap()).unwrap();
        assert_eq!(t, s);
        exact_diagonal_apply(&mut t, &DiagonalSpec::new(vec![PI; 8]).unwrap()).unwrap();
        for (a, b) in t.amplitudes().iter().zip(s.amplitudes()) {
            assert!((a + b).norm() < 1e-15);
        }
        assert!(exact_diagonal_apply(&mut t, &DiagonalSpec::new(vec![0.0; 4]).unwrap()).is_err());
    }

    #[test]
    fn truncated_subsequence_matches_kept_expansion() {
        let m = 5;
        let phases: Vec<f64> = (0..1usize << m).map(|r| ((r * r) as f64 * 0.37).sin()).collect();
        let spectrum = walsh_decompose(&DiagonalSpec::new(phases).unwrap()).unwrap();
        let kept = truncate(&spectrum, &TruncationPolicy::new(0.3).unwrap());
        assert!(kept.len() < (1 << m) - 1);
        let circuit = build_phase_circuit(&kept).unwrap();
        let target = DiagonalSpec::new(kept.expand()).unwrap();
        let state = StateVector::uniform(m).unwrap();
        let mut expected = state.clone();
        exact_diagonal_apply(&mut expected, &target).unwrap();
        let got = run(&circuit, state).unwrap();
        assert!(phase_aligned_deviation(got.amplitudes(), expected.amplitudes()) < 1e-12);
    }
}
