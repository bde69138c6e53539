//! Gate set, circuit container, gate census and a dense statevector simulator.
//!
//! Basis index `r` stores qubit 0 in its least significant bit. Gates act in
//! place on the amplitude array and touch only the amplitudes they mix.

use std::fmt;
use std::ops::{Add, AddAssign};
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::RealField;
use crate::walsh::{log2_exact, pack_index, MAX_QUBITS};

/// Name of the generator behind [`measure_sample`], recorded in run manifests.
pub const SAMPLER_RNG: &str = "ChaCha8Rng (rand_chacha 0.9), seeded with seed_from_u64";

/// Largest register accepted by [`circuit_unitary`].
pub const MAX_UNITARY_QUBITS: usize = 10;

const NORM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Gate {
    Hadamard(usize),
    /// `|p> -> e^{i theta (1 - 2p)} |p>`: one Walsh term on the qubit that
    /// currently holds its parity.
    ParityPhase {
        theta: f64,
        target: usize,
    },
    /// Multiplies the `|11>` amplitude by `e^{i theta}`.
    ControlledPhase {
        theta: f64,
        control: usize,
        target: usize,
    },
    Cnot {
        control: usize,
        target: usize,
    },
    Swap(usize, usize),
}

impl Gate {
    pub fn arity(&self) -> usize {
        match self {
            Gate::Hadamard(_) | Gate::ParityPhase { .. } => 1,
            _ => 2,
        }
    }

    pub fn validate(&self, qubits: usize) -> Result<()> {
        let check = |q: usize| {
            if q >= qubits {
                Err(Error::InvalidGate(format!(
                    "{self}: qubit {q} out of range for {qubits} qubits"
                )))
            } else {
                Ok(())
            }
        };
        match *self {
            Gate::Hadamard(q) => check(q),
            Gate::ParityPhase { theta, target } => {
                if !theta.is_finite() {
                    return Err(Error::InvalidGate(format!("{self}: non-finite angle")));
                }
                check(target)
            }
            Gate::ControlledPhase {
                theta,
                control: a,
                target: b,
            } => {
                if !theta.is_finite() {
                    return Err(Error::InvalidGate(format!("{self}: non-finite angle")));
                }
                check(a)?;
                check(b)?;
                distinct(self, a, b)
            }
            Gate::Cnot { control: a, target: b } | Gate::Swap(a, b) => {
                check(a)?;
                check(b)?;
                distinct(self, a, b)
            }
        }
    }

    pub fn inverse(&self) -> Gate {
        match *self {
            Gate::ParityPhase { theta, target } => Gate::ParityPhase { theta: -theta, target },
            Gate::ControlledPhase { theta, control, target } => Gate::ControlledPhase {
                theta: -theta,
                control,
                target,
            },
            g => g,
        }
    }
}

fn distinct(gate: &Gate, a: usize, b: usize) -> Result<()> {
    if a == b {
        Err(Error::InvalidGate(format!("{gate}: both operands are qubit {a}")))
    } else {
        Ok(())
    }
}

/// One gate per line: `H q`, `PP theta q`, `CP theta c t`, `CNOT c t`, `SWAP a b`.
impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Gate::Hadamard(q) => write!(f, "H {q}"),
            Gate::ParityPhase { theta, target } => write!(f, "PP {theta:e} {target}"),
            Gate::ControlledPhase { theta, control, target } => {
                write!(f, "CP {theta:e} {control} {target}")
            }
            Gate::Cnot { control, target } => write!(f, "CNOT {control} {target}"),
            Gate::Swap(a, b) => write!(f, "SWAP {a} {b}"),
        }
    }
}

impl FromStr for Gate {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let fields: Vec<&str> = s.split_whitespace().collect();
        let qubit = |i: usize| -> std::result::Result<usize, String> {
            fields
                .get(i)
                .ok_or_else(|| format!("missing operand {i} in `{s}`"))?
                .parse()
                .map_err(|e| format!("bad qubit in `{s}`: {e}"))
        };
        let angle = |i: usize| -> std::result::Result<f64, String> {
            fields
                .get(i)
                .ok_or_else(|| format!("missing angle in `{s}`"))?
                .parse()
                .map_err(|e| format!("bad angle in `{s}`: {e}"))
        };
        let (gate, arity) = match fields.first().copied() {
            Some("H") => (Gate::Hadamard(qubit(1)?), 2),
            Some("PP") => (
                Gate::ParityPhase {
                    theta: angle(1)?,
                    target: qubit(2)?,
                },
                3,
            ),
            Some("CP") => (
                Gate::ControlledPhase {
                    theta: angle(1)?,
                    control: qubit(2)?,
                    target: qubit(3)?,
                },
                4,
            ),
            Some("CNOT") => (
                Gate::Cnot {
                    control: qubit(1)?,
                    target: qubit(2)?,
                },
                3,
            ),
            Some("SWAP") => (Gate::Swap(qubit(1)?, qubit(2)?), 3),
            Some(other) => return Err(format!("unknown gate `{other}`")),
            None => return Err("empty gate line".to_string()),
        };
        if fields.len() != arity {
            return Err(format!("trailing operands in `{s}`"));
        }
        Ok(gate)
    }
}

/// Gate counts by arity and kind.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateCensus {
    pub one_qubit: u64,
    pub two_qubit: u64,
    pub total: u64,
    pub hadamard: u64,
    pub parity_phase: u64,
    pub controlled_phase: u64,
    pub cnot: u64,
    pub swap: u64,
}

impl GateCensus {
    pub fn record(&mut self, gate: &Gate) {
        match gate {
            Gate::Hadamard(_) => self.hadamard += 1,
            Gate::ParityPhase { .. } => self.parity_phase += 1,
            Gate::ControlledPhase { .. } => self.controlled_phase += 1,
            Gate::Cnot { .. } => self.cnot += 1,
            Gate::Swap(..) => self.swap += 1,
        }
        if gate.arity() == 1 {
            self.one_qubit += 1;
        } else {
            self.two_qubit += 1;
        }
        self.total += 1;
    }

    /// Census of `times` repetitions.
    pub fn scaled(&self, times: u64) -> GateCensus {
        GateCensus {
            one_qubit: self.one_qubit * times,
            two_qubit: self.two_qubit * times,
            total: self.total * times,
            hadamard: self.hadamard * times,
            parity_phase: self.parity_phase * times,
            controlled_phase: self.controlled_phase * times,
            cnot: self.cnot * times,
            swap: self.swap * times,
        }
    }
}

impl Add for GateCensus {
    type Output = GateCensus;

    fn add(mut self, rhs: GateCensus) -> GateCensus {
        self += rhs;
        self
    }
}

impl AddAssign for GateCensus {
    fn add_assign(&mut self, rhs: GateCensus) {
        self.one_qubit += rhs.one_qubit;
        self.two_qubit += rhs.two_qubit;
        self.total += rhs.total;
        self.hadamard += rhs.hadamard;
        self.parity_phase += rhs.parity_phase;
        self.controlled_phase += rhs.controlled_phase;
        self.cnot += rhs.cnot;
        self.swap += rhs.swap;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(qubits: usize) -> Self {
        Circuit {
            qubits,
            gates: Vec::new(),
        }
    }

    pub fn from_gates(qubits: usize, gates: Vec<Gate>) -> Result<Self> {
        for g in &gates {
            g.validate(qubits)?;
        }
        Ok(Circuit { qubits, gates })
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.validate(self.qubits)?;
        self.gates.push(gate);
        Ok(())
    }

    /// Appends `other`, whose gates must fit this register.
    pub fn append(&mut self, other: &Circuit) -> Result<()> {
        if other.qubits > self.qubits {
            return Err(Error::QubitMismatch {
                expected: self.qubits,
                found: other.qubits,
            });
        }
        self.gates.extend_from_slice(&other.gates);
        Ok(())
    }

    /// Reversed gate order with conjugated angles.
    pub fn inverse(&self) -> Circuit {
        Circuit {
            qubits: self.qubits,
            gates: self.gates.iter().rev().map(Gate::inverse).collect(),
        }
    }

    /// Same gates with every qubit index shifted by `offset` onto a larger register.
    pub fn embed(&self, qubits: usize, offset: usize) -> Result<Circuit> {
        let shift = |q: usize| q + offset;
        let gates = self
            .gates
            .iter()
            .map(|g| match *g {
                Gate::Hadamard(q) => Gate::Hadamard(shift(q)),
                Gate::ParityPhase { theta, target } => Gate::ParityPhase {
                    theta,
                    target: shift(target),
                },
                Gate::ControlledPhase { theta, control, target } => Gate::ControlledPhase {
                    theta,
                    control: shift(control),
                    target: shift(target),
                },
                Gate::Cnot { control, target } => Gate::Cnot {
                    control: shift(control),
                    target: shift(target),
                },
                Gate::Swap(a, b) => Gate::Swap(shift(a), shift(b)),
            })
            .collect();
        Circuit::from_gates(qubits, gates)
    }

    pub fn census(&self) -> GateCensus {
        gate_census(self)
    }

    /// Applies the gates in order to `state`.
    pub fn apply_to(&self, state: &mut StateVector) -> Result<()> {
        if state.qubits() != self.qubits {
            return Err(Error::QubitMismatch {
                expected: self.qubits,
                found: state.qubits(),
            });
        }
        for gate in &self.gates {
            state.apply_unchecked(gate);
        }
        Ok(())
    }

    /// Text form: a `qubits m` header followed by one gate per line.
    pub fn to_text(&self) -> String {
        let mut out = format!("qubits {}\n", self.qubits);
        for g in &self.gates {
            out.push_str(&g.to_string());
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Circuit> {
        let mut circuit: Option<Circuit> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parse_err = |message: String| Error::Parse { line: i + 1, message };
            match circuit.as_mut() {
                None => {
                    let m = line
                        .strip_prefix("qubits")
                        .ok_or_else(|| parse_err("expected `qubits <m>` header".into()))?
                        .trim()
                        .parse::<usize>()
                        .map_err(|e| parse_err(format!("bad qubit count: {e}")))?;
                    circuit = Some(Circuit::new(m));
                }
                Some(c) => {
                    let gate: Gate = line.parse().map_err(parse_err)?;
                    c.push(gate).map_err(|e| parse_err(e.to_string()))?;
                }
            }
        }
        circuit.ok_or(Error::Parse {
            line: 0,
            message: "missing `qubits <m>` header".into(),
        })
    }
}

pub fn gate_census(circuit: &Circuit) -> GateCensus {
    let mut census = GateCensus::default();
    for g in circuit.gates() {
        census.record(g);
    }
    census
}

/// Runs `circuit` on `state`, consuming and returning it.
pub fn run(circuit: &Circuit, mut state: StateVector) -> Result<StateVector> {
    circuit.apply_to(&mut state)?;
    Ok(state)
}

pub fn apply_gate(mut state: StateVector, gate: &Gate) -> Result<StateVector> {
    state.apply(gate)?;
    Ok(state)
}

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl DenseMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                data.push(f(r, c));
            }
        }
        DenseMatrix { dim, data }
    }

    pub fn adjoint(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.dim, |r, c| self.get(c, r).conj())
    }

    pub fn matmul(&self, rhs: &DenseMatrix) -> DenseMatrix {
        let n = self.dim;
        DenseMatrix::from_fn(n, |r, c| (0..n).map(|k| self.get(r, k) * rhs.get(k, c)).sum())
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_deviation(&self, other: &DenseMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }
}

/// Column `j` is the output of the circuit on basis state `|j>`.
pub fn circuit_unitary(circuit: &Circuit) -> Result<DenseMatrix> {
    let m = circuit.qubits();
    if m > MAX_UNITARY_QUBITS {
        return Err(Error::TooManyQubits {
            qubits: m,
            max: MAX_UNITARY_QUBITS,
        });
    }
    let dim = 1usize << m;
    let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
    for col in 0..dim {
        let state = run(circuit, StateVector::basis(m, col)?)?;
        for (row, a) in state.amplitudes().iter().enumerate() {
            data[row * dim + col] = *a;
        }
    }
    Ok(DenseMatrix { dim, data })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// `|0...0>`.
    pub fn zero(qubits: usize) -> Result<Self> {
        StateVector::basis(qubits, 0)
    }

    pub fn basis(qubits: usize, index: usize) -> Result<Self> {
        if qubits > MAX_QUBITS {
            return Err(Error::TooManyQubits {
                qubits,
                max: MAX_QUBITS,
            });
        }
        let len = 1usize << qubits;
        if index >= len {
            return Err(Error::IndexOutOfRange(format!(
                "basis index {index} for {qubits} qubits"
            )));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); len];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(StateVector { qubits, amplitudes })
    }

    /// Uniform superposition over all basis states.
    pub fn uniform(qubits: usize) -> Result<Self> {
        if qubits > MAX_QUBITS {
            return Err(Error::TooManyQubits {
                qubits,
                max: MAX_QUBITS,
            });
        }
        let len = 1usize << qubits;
        let a = Complex64::new(1.0 / (len as f64).sqrt(), 0.0);
        Ok(StateVector {
            qubits,
            amplitudes: vec![a; len],
        })
    }

    /// Wraps amplitudes whose squared norm is 1 within `1e-9`.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let qubits = log2_exact(amplitudes.len())?;
        let state = StateVector { qubits, amplitudes };
        let norm = state.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::Unnormalized(norm));
        }
        Ok(state)
    }

    /// Rescales arbitrary nonzero amplitudes to unit norm.
    pub fn normalized(mut amplitudes: Vec<Complex64>) -> Result<Self> {
        let qubits = log2_exact(amplitudes.len())?;
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::Unnormalized(norm * norm));
        }
        amplitudes.iter_mut().for_each(|a| *a /= norm);
        Ok(StateVector { qubits, amplitudes })
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Mutable access for phase-only edits; callers must keep the norm.
    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.qubits)?;
        self.apply_unchecked(gate);
        Ok(())
    }

    fn apply_unchecked(&mut self, gate: &Gate) {
        let amps = &mut self.amplitudes;
        match *gate {
            Gate::Hadamard(q) => {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                for_each_pair(amps, q, |a, b| {
                    let (x, y) = (*a, *b);
                    *a = (x + y) * s;
                    *b = (x - y) * s;
                });
            }
            Gate::ParityPhase { theta, target } => {
                let even = Complex64::from_polar(1.0, theta);
                let odd = even.conj();
                for_each_pair(amps, target, |a, b| {
                    *a *= even;
                    *b *= odd;
                });
            }
            Gate::ControlledPhase { theta, control, target } => {
                let phase = Complex64::from_polar(1.0, theta);
                let both = (1usize << control) | (1usize << target);
                for_each_quad(amps, control, target, |base, amps| amps[base | both] *= phase);
            }
            Gate::Cnot { control, target } => {
                let c = 1usize << control;
                let t = 1usize << target;
                for_each_quad(amps, control, target, |base, amps| amps.swap(base | c, base | c | t));
            }
            Gate::Swap(a, b) => {
                let (ba, bb) = (1usize << a, 1usize << b);
                for_each_quad(amps, a, b, |base, amps| amps.swap(base | ba, base | bb));
            }
        }
    }
}

/// Visits every `(i, i | 2^q)` pair with bit `q` of `i` clear.
#[inline]
fn for_each_pair(amps: &mut [Complex64], q: usize, mut f: impl FnMut(&mut Complex64, &mut Complex64)) {
    let half = 1usize << q;
    for block in amps.chunks_exact_mut(2 * half) {
        let (lo, hi) = block.split_at_mut(half);
        for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
            f(a, b);
        }
    }
}

/// Visits every base index with bits `a` and `b` both clear.
#[inline]
fn for_each_quad(amps: &mut [Complex64], a: usize, b: usize, mut f: impl FnMut(usize, &mut [Complex64])) {
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    let count = amps.len() >> 2;
    for k in 0..count {
        let base = insert_zero_bit(insert_zero_bit(k, lo), hi);
        f(base, amps);
    }
}

#[inline]
fn insert_zero_bit(value: usize, bit: usize) -> usize {
    let low = value & ((1usize << bit) - 1);
    ((value >> bit) << (bit + 1)) | low
}

/// Counts of projective measurement outcomes over the computational basis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Histogram {
    pub shots: u64,
    pub counts: Vec<u64>,
}

/// Draws `shots` i.i.d. outcomes from `|amplitude|^2`.
pub fn measure_sample(state: &StateVector, shots: u64, seed: u64) -> Result<Histogram> {
    if shots == 0 {
        return Err(Error::param("shots", "must be at least 1"));
    }
    let norm = state.norm_sqr();
    if (norm - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::Unnormalized(norm));
    }
    let mut cumulative = Vec::with_capacity(state.len());
    let mut acc = 0.0;
    for a in state.amplitudes() {
        acc += a.norm_sqr();
        cumulative.push(acc);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; state.len()];
    let last = counts.len() - 1;
    for _ in 0..shots {
        let u: f64 = rng.random::<f64>() * acc;
        let idx = cumulative.partition_point(|&c| c <= u).min(last);
        counts[idx] += 1;
    }
    Ok(Histogram { shots, counts })
}

/// `grid[y][x] = |amplitude[N*y + x]|^2`.
pub fn probability_grid(state: &StateVector, axis_len: usize) -> Result<RealField> {
    if axis_len * axis_len != state.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} amplitudes do not encode a {axis_len}x{axis_len} grid",
            state.len()
        )));
    }
    let mut grid = RealField::zeros(axis_len);
    for y in 0..axis_len {
        for x in 0..axis_len {
            let r = pack_index(x, y, axis_len)?;
            grid.set(x, y, state.amplitudes()[r].norm_sqr());
        }
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).norm() < tol)
    }

    fn random_state(m: usize, seed: u64) -> StateVector {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let amps = (0..1usize << m)
            .map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        StateVector::normalized(amps).unwrap()
    }

    #[test]
    fn hadamard_on_zero() {
        let s = apply_gate(StateVector::zero(1).unwrap(), &Gate::Hadamard(0)).unwrap();
        assert!(close(
            s.amplitudes(),
            &[c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)],
            1e-15
        ));
    }

    #[test]
    fn cnot_flips_target_when_control_set() {
        let s = StateVector::basis(2, 0b01).unwrap();
        let s = apply_gate(s, &Gate::Cnot { control: 0, target: 1 }).unwrap();
        assert_eq!(s.amplitudes()[0b11], c(1.0, 0.0));
        let s = apply_gate(
            StateVector::basis(2, 0b10).unwrap(),
            &Gate::Cnot { control: 0, target: 1 },
        )
        .unwrap();
        assert_eq!(s.amplitudes()[0b10], c(1.0, 0.0));
    }

    #[test]
    fn parity_phase_definition() {
        let theta = 0.37;
        let s = StateVector::uniform(1).unwrap();
        let s = apply_gate(s, &Gate::ParityPhase { theta, target: 0 }).unwrap();
        let expected = [
            Complex64::from_polar(FRAC_1_SQRT_2, theta),
            Complex64::from_polar(FRAC_1_SQRT_2, -theta),
        ];
        assert!(close(s.amplitudes(), &expected, 1e-15));
    }

    #[test]
    fn swap_exchanges_bits() {
        let s = apply_gate(StateVector::basis(3, 0b001).unwrap(), &Gate::Swap(0, 2)).unwrap();
        assert_eq!(s.amplitudes()[0b100], c(1.0, 0.0));
    }

    #[test]
    fn invalid_gates_are_rejected() {
        let mut s = StateVector::zero(2).unwrap();
        assert!(s.apply(&Gate::Hadamard(2)).is_err());
        assert!(s.apply(&Gate::Cnot { control: 1, target: 1 }).is_err());
        assert!(s.apply(&Gate::Swap(0, 0)).is_err());
        assert!(Circuit::new(2)
            .push(Gate::ParityPhase {
                theta: f64::NAN,
                target: 0
            })
            .is_err());
    }

    #[test]
    fn run_rejects_mismatch_and_empty_is_identity() {
        let s = random_state(3, 1);
        assert!(run(&Circuit::new(2), s.clone()).is_err());
        assert_eq!(run(&Circuit::new(3), s.clone()).unwrap(), s);
    }

    #[test]
    fn involutions() {
        let s = random_state(4, 2);
        for g in [
            Gate::Hadamard(2),
            Gate::Cnot { control: 3, target: 0 },
            Gate::Swap(1, 3),
        ] {
            let twice = apply_gate(apply_gate(s.clone(), &g).unwrap(), &g).unwrap();
            assert!(close(twice.amplitudes(), s.amplitudes(), 1e-12), "{g}");
        }
    }

    #[test]
    fn unitary_examples() {
        let mut h = Circuit::new(1);
        h.push(Gate::Hadamard(0)).unwrap();
        let u = circuit_unitary(&h).unwrap();
        let s = FRAC_1_SQRT_2;
        let expected = DenseMatrix::from_fn(2, |r, c_| c(if r == 1 && c_ == 1 { -s } else { s }, 0.0));
        assert!(u.max_deviation(&expected) < 1e-15);

        let mut cp = Circuit::new(2);
        cp.push(Gate::ControlledPhase {
            theta: PI,
            control: 0,
            target: 1,
        })
        .unwrap();
        let u = circuit_unitary(&cp).unwrap();
        let expected = DenseMatrix::from_fn(4, |r, c_| {
            if r != c_ {
                c(0.0, 0.0)
            } else if r == 3 {
                c(-1.0, 0.0)
            } else {
                c(1.0, 0.0)
            }
        });
        assert!(u.max_deviation(&expected) < 1e-15);

        assert!(circuit_unitary(&Circuit::new(11)).is_err());
    }

    #[test]
    fn census_counts_by_arity() {
        assert_eq!(Circuit::new(3).census(), GateCensus::default());
        let c = Circuit::from_gates(
            3,
            vec![
                Gate::Hadamard(0),
                Gate::ParityPhase { theta: 0.1, target: 1 },
                Gate::Cnot { control: 0, target: 2 },
                Gate::Swap(0, 1),
                Gate::ControlledPhase {
                    theta: 0.2,
                    control: 2,
                    target: 1,
                },
            ],
        )
        .unwrap();
        let census = c.census();
        assert_eq!((census.one_qubit, census.two_qubit, census.total), (2, 3, 5));
    }

    #[test]
    fn text_round_trip() {
        let c = Circuit::from_gates(
            3,
            vec![
                Gate::Hadamard(0),
                Gate::ParityPhase {
                    theta: -1.0 / 3.0,
                    target: 1,
                },
                Gate::ControlledPhase {
                    theta: PI / 8.0,
                    control: 0,
                    target: 2,
                },
                Gate::Cnot { control: 2, target: 0 },
                Gate::Swap(0, 2),
            ],
        )
        .unwrap();
        let text = c.to_text();
        assert_eq!(Circuit::from_text(&text).unwrap(), c);
        assert!(Circuit::from_text("qubits 2\nH 5\n").is_err());
        assert!(Circuit::from_text("H 0\n").is_err());
        assert!(Circuit::from_text("qubits 2\nFOO 1\n").is_err());
    }

    #[test]
    fn sampling_basis_state_and_determinism() {
        let s = StateVector::basis(3, 5).unwrap();
        let h = measure_sample(&s, 100, 7).unwrap();
        assert_eq!(h.counts[5], 100);
        let u = StateVector::uniform(4).unwrap();
        assert_eq!(
            measure_sample(&u, 1000, 3).unwrap(),
            measure_sample(&u, 1000, 3).unwrap()
        );
        assert!(measure_sample(&u, 0, 3).is_err());
        let mut bad = u.clone();
        bad.amplitudes_mut()[0] *= 2.0;
        assert!(measure_sample(&bad, 10, 3).is_err());
    }

    #[test]
    fn uniform_sampling_within_binomial_band() {
        let u = StateVector::uniform(2).unwrap();
        let shots = 1_000_000u64;
        let h = measure_sample(&u, shots, 11).unwrap();
        let sigma = (shots as f64 * 0.25 * 0.75).sqrt();
        for &count in &h.counts {
            assert!((count as f64 - 250_000.0).abs() < 4.0 * sigma, "{count}");
        }
    }

    #[test]
    fn probability_grid_layout() {
        let g = probability_grid(&StateVector::basis(4, 11).unwrap(), 4).unwrap();
        assert_eq!(g.get(3, 2), 1.0);
        assert_eq!(g.sum(), 1.0);
        let g = probability_grid(&StateVector::uniform(4).unwrap(), 4).unwrap();
        assert!(g.values().iter().all(|&p| (p - 1.0 / 16.0).abs() < 1e-15));
        assert!(probability_grid(&StateVector::uniform(4).unwrap(), 8).is_err());
    }

    #[test]
    fn phase_circuits_leave_probabilities_alone() {
        let s = random_state(4, 9);
        let mut c = Circuit::new(4);
        for (i, q) in [0usize, 3, 1, 2].iter().enumerate() {
            c.push(Gate::ParityPhase {
                theta: 0.3 * i as f64 + 0.1,
                target: *q,
            })
            .unwrap();
        }
        let before = probability_grid(&s, 4).unwrap();
        let after = probability_grid(&run(&c, s.clone()).unwrap(), 4).unwrap();
        let restored = run(&c.inverse(), run(&c, s.clone()).unwrap()).unwrap();
        for (a, b) in before.values().iter().zip(after.values()) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(close(restored.amplitudes(), s.amplitudes(), 1e-12));
    }
}
