//! C ABI over the qmultislice library.
//!
//! Objects cross the boundary as opaque handles created by `qms_*_new`
//! style constructors and released with the matching `qms_*_free`. Every
//! fallible call returns a [`QmsStatus`]; on failure the message is
//! available from [`qms_last_error`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;
use std::slice;

use num_complex::Complex64;
use qmultislice::circuit::{measure_sample, Circuit, GateCensus, StateVector};
use qmultislice::config::{default_setup, load_config, Overrides};
use qmultislice::multislice::{relative_error, run_simulation, EngineKind, Setup, SimulationPlan, Truncation};
use qmultislice::physics::beam_params;
use qmultislice::synthesis::{build_iqft, build_phase_circuit, build_qft, truncate, TruncationPolicy};
use qmultislice::walsh::fwht;
use qmultislice::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QmsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ShapeMismatch = 3,
    Config = 4,
    Io = 5,
    Parse = 6,
    Numeric = 7,
    Panic = 8,
}

/// Which engine [`qms_simulate`] uses.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QmsEngine {
    Classical = 0,
    QuantumExact = 1,
    QuantumTruncated = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct QmsBeam {
    pub voltage: f64,
    /// Angstrom.
    pub wavelength: f64,
    pub mass_ratio: f64,
    /// rad / (V angstrom).
    pub sigma: f64,
    /// 1/angstrom.
    pub wavenumber: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct QmsCensus {
    pub one_qubit: u64,
    pub two_qubit: u64,
    pub total: u64,
    pub hadamard: u64,
    pub parity_phase: u64,
    pub controlled_phase: u64,
    pub cnot: u64,
    pub swap: u64,
}

impl From<GateCensus> for QmsCensus {
    fn from(c: GateCensus) -> Self {
        QmsCensus {
            one_qubit: c.one_qubit,
            two_qubit: c.two_qubit,
            total: c.total,
            hadamard: c.hadamard,
            parity_phase: c.parity_phase,
            controlled_phase: c.controlled_phase,
            cnot: c.cnot,
            swap: c.swap,
        }
    }
}

/// Summary of one simulation. Counts are zero for the classical engine.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct QmsRunSummary {
    pub slices: u64,
    pub norm_drift: f64,
    pub s_v: u64,
    pub s_p: u64,
    pub census: QmsCensus,
}

/// Opaque gate sequence.
pub struct QmsCircuit(Circuit);

/// Opaque statevector.
pub struct QmsState(StateVector);

/// Opaque simulation setup (grid plus phase fields).
pub struct QmsSetup(Setup);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

struct Failure(QmsStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::ShapeMismatch(_) | Error::QubitMismatch { .. } | Error::NotPowerOfTwo(_) => QmsStatus::ShapeMismatch,
            Error::Config(_) => QmsStatus::Config,
            Error::Io(_) => QmsStatus::Io,
            Error::Parse { .. } | Error::Json(_) => QmsStatus::Parse,
            Error::Unnormalized(_) | Error::ZeroReference => QmsStatus::Numeric,
            _ => QmsStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure(QmsStatus::InvalidArgument, message.into())
}

fn null(what: &str) -> Failure {
    Failure(QmsStatus::NullPointer, format!("{what} is null"))
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> QmsStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => QmsStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            QmsStatus::Panic
        }
    }
}

unsafe fn input<'a, T>(data: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if data.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(data, len))
}

unsafe fn output<'a, T>(data: *mut T, len: usize, what: &str) -> Result<&'a mut [T], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if data.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts_mut(data, len))
}

unsafe fn reference<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn place<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Message of the last failed call on this thread. Valid until the next
/// failing call on the same thread; empty if none failed.
#[no_mangle]
pub extern "C" fn qms_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qms_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Relativistic beam quantities for `voltage` volts.
///
/// # Safety
/// `out` must be valid for a write of one `QmsBeam`.
#[no_mangle]
pub unsafe extern "C" fn qms_beam_params(voltage: f64, out: *mut QmsBeam) -> QmsStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let b = beam_params(voltage)?;
        *out = QmsBeam {
            voltage: b.voltage,
            wavelength: b.wavelength,
            mass_ratio: b.mass_ratio,
            sigma: b.sigma,
            wavenumber: b.wavenumber,
        };
        Ok(())
    })
}

/// Normalized Walsh spectrum of `len` values (a power of two) into `out`.
///
/// # Safety
/// `values` and `out` must each point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn qms_fwht(values: *const f64, len: usize, out: *mut f64) -> QmsStatus {
    guard(|| {
        let spectrum = fwht(input(values, len, "values")?)?;
        output(out, len, "out")?.copy_from_slice(spectrum.coefficients());
        Ok(())
    })
}

/// `sum |x - x_hat| / sum |x_hat|`.
///
/// # Safety
/// `x` and `x_hat` must each point to `len` doubles; `out` to one.
#[no_mangle]
pub unsafe extern "C" fn qms_relative_error(x: *const f64, x_hat: *const f64, len: usize, out: *mut f64) -> QmsStatus {
    guard(|| {
        let e = relative_error(input(x, len, "x")?, input(x_hat, len, "x_hat")?)?;
        *out.as_mut().ok_or_else(|| null("out"))? = e;
        Ok(())
    })
}

/// QFT (`inverse == false`) or its inverse on `qubits` qubits.
///
/// # Safety
/// `out` must be valid for a write of one pointer.
#[no_mangle]
pub unsafe extern "C" fn qms_circuit_qft(qubits: usize, inverse: bool, out: *mut *mut QmsCircuit) -> QmsStatus {
    guard(|| {
        let c = if inverse {
            build_iqft(qubits)?
        } else {
            build_qft(qubits)?
        };
        place(out, QmsCircuit(c))
    })
}

/// Circuit for `diag(e^{i phases[r]})` keeping Walsh terms with
/// `|W| >= tau * w_max`; `tau = 0` is exact up to a global phase.
///
/// # Safety
/// `phases` must point to `len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qms_circuit_phase(
    phases: *const f64,
    len: usize,
    tau: f64,
    out: *mut *mut QmsCircuit,
) -> QmsStatus {
    guard(|| {
        let policy = TruncationPolicy::new(tau)?;
        let spectrum = fwht(input(phases, len, "phases")?)?;
        place(out, QmsCircuit(build_phase_circuit(&truncate(&spectrum, &policy))?))
    })
}

/// Parses the line-oriented text form written by `qms_circuit_to_text`.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qms_circuit_from_text(text: *const c_char, out: *mut *mut QmsCircuit) -> QmsStatus {
    guard(|| {
        if text.is_null() {
            return Err(null("text"));
        }
        let text = CStr::from_ptr(text)
            .to_str()
            .map_err(|_| invalid("text is not UTF-8"))?;
        place(out, QmsCircuit(Circuit::from_text(text)?))
    })
}

/// Writes the text form into `buf` (NUL-terminated) and its length without
/// the NUL into `needed`. Pass `buf = NULL` to query the size.
///
/// # Safety
/// `buf` must be NULL or point to `cap` bytes; `needed` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qms_circuit_to_text(
    circuit: *const QmsCircuit,
    buf: *mut c_char,
    cap: usize,
    needed: *mut usize,
) -> QmsStatus {
    guard(|| {
        let text = reference(circuit, "circuit")?.0.to_text();
        *needed.as_mut().ok_or_else(|| null("needed"))? = text.len();
        if buf.is_null() {
            return Ok(());
        }
        if cap < text.len() + 1 {
            return Err(invalid(format!("buffer holds {cap} bytes, {} needed", text.len() + 1)));
        }
        ptr::copy_nonoverlapping(text.as_ptr(), buf.cast(), text.len());
        *buf.add(text.len()) = 0;
        Ok(())
    })
}

/// # Safety
/// `circuit` must be a live handle; `qubits` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qms_circuit_qubits(circuit: *const QmsCircuit, qubits: *mut usize) -> QmsStatus {
    guard(|| {
        *qubits.as_mut().ok_or_else(|| null("qubits"))? = reference(circuit, "circuit")?.0.qubits();
        Ok(())
    })
}

/// # Safety
/// `circuit` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qms_circuit_census(circuit: *const QmsCircuit, out: *mut QmsCensus) -> QmsStatus {
    guard(|| {
        *out.as_mut().ok_or_else(|| null("out"))? = reference(circuit, "circuit")?.0.census().into();
        Ok(())
    })
}

/// Applies `circuit` to `state` in place.
///
/// # Safety
/// Both handles must be live.
#[no_mangle]
pub unsafe extern "C" fn qms_circuit_apply(circuit: *const QmsCircuit, state: *mut QmsState) -> QmsStatus {
    guard(|| {
        let circuit = reference(circuit, "circuit")?;
        let state = state.as_mut().ok_or_else(|| null("state"))?;
        circuit.0.apply_to(&mut state.0)?;
        Ok(())
    })
}

/// # Safety
/// `circuit` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qms_circuit_free(circuit: *mut QmsCircuit) {
    if !circuit.is_null() {
        drop(Box::from_raw(circuit));
    }
}

/// `|0...0>` on `qubits` qubits.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qms_state_zero(qubits: usize, out: *mut *mut QmsState) -> QmsStatus {
    guard(|| place(out, QmsState(StateVector::zero(qubits)?)))
}

/// State from `len` interleaved (re, im) pairs; must already be normalized.
///
/// # Safety
/// `re_im` must point to `2 * len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qms_state_from_amplitudes(
    re_im: *const f64,
    len: usize,
    out: *mut *mut QmsState,
) -> QmsStatus {
    guard(|| {
        let raw = input(re_im, 2 * len, "re_im")?;
        let amps = raw.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect();
        place(out, QmsState(StateVector::from_amplitudes(amps)?))
    })
}

/// # Safety
/// `state` must be a live handle; `len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qms_state_len(state: *const QmsState, len: *mut usize) -> QmsStatus {
    guard(|| {
        *len.as_mut().ok_or_else(|| null("len"))? = reference(state, "state")?.0.len();
        Ok(())
    })
}

/// Copies the amplitudes as interleaved (re, im) pairs.
///
/// # Safety
/// `re_im` must point to `2 * len` doubles with `len` the state length.
#[no_mangle]
pub unsafe extern "C" fn qms_state_amplitudes(state: *const QmsState, re_im: *mut f64, len: usize) -> QmsStatus {
    guard(|| {
        let state = &reference(state, "state")?.0;
        if len != state.len() {
            return Err(Failure(
                QmsStatus::ShapeMismatch,
                format!("state has {} amplitudes, not {len}", state.len()),
            ));
        }
        for (pair, a) in output(re_im, 2 * len, "re_im")?
            .chunks_exact_mut(2)
            .zip(state.amplitudes())
        {
            pair[0] = a.re;
            pair[1] = a.im;
        }
        Ok(())
    })
}

/// Draws `shots` measurements with a seeded generator into `counts`.
///
/// # Safety
/// `counts` must point to `len` integers with `len` the state length.
#[no_mangle]
pub unsafe extern "C" fn qms_state_sample(
    state: *const QmsState,
    shots: u64,
    seed: u64,
    counts: *mut u64,
    len: usize,
) -> QmsStatus {
    guard(|| {
        let state = &reference(state, "state")?.0;
        if len != state.len() {
            return Err(Failure(
                QmsStatus::ShapeMismatch,
                format!("state has {} amplitudes, not {len}", state.len()),
            ));
        }
        let hist = measure_sample(state, shots, seed)?;
        output(counts, len, "counts")?.copy_from_slice(&hist.counts);
        Ok(())
    })
}

/// # Safety
/// `state` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qms_state_free(state: *mut QmsState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Default gold setup with `2^bits` pixels per axis and `cells_z` cells deep.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qms_setup_default(bits: u32, cells_z: usize, out: *mut *mut QmsSetup) -> QmsStatus {
    guard(|| place(out, QmsSetup(default_setup(bits, cells_z)?)))
}

/// Setup from a JSON configuration file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qms_setup_from_config(path: *const c_char, out: *mut *mut QmsSetup) -> QmsStatus {
    guard(|| {
        if path.is_null() {
            return Err(null("path"));
        }
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| invalid("path is not UTF-8"))?;
        let resolved = load_config(Path::new(path), &Overrides::default())?;
        place(out, QmsSetup(resolved.experiment()?.setup()?))
    })
}

/// Pixels per axis.
///
/// # Safety
/// `setup` must be a live handle; `axis_len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qms_setup_axis_len(setup: *const QmsSetup, axis_len: *mut usize) -> QmsStatus {
    guard(|| {
        *axis_len.as_mut().ok_or_else(|| null("axis_len"))? = reference(setup, "setup")?.0.grid.axis_len();
        Ok(())
    })
}

/// Runs a full simulation and writes the final probability grid
/// (`axis_len^2` values, row-major) into `probability`.
///
/// # Safety
/// `setup` must be live, `probability` must hold `len` doubles, and
/// `summary` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn qms_simulate(
    setup: *const QmsSetup,
    engine: QmsEngine,
    tau_v: f64,
    tau_p: f64,
    probability: *mut f64,
    len: usize,
    summary: *mut QmsRunSummary,
) -> QmsStatus {
    guard(|| {
        let setup = &reference(setup, "setup")?.0;
        let n = setup.grid.axis_len();
        if len != n * n {
            return Err(Failure(
                QmsStatus::ShapeMismatch,
                format!("grid has {} pixels, not {len}", n * n),
            ));
        }
        let engine = match engine {
            QmsEngine::Classical => EngineKind::Classical,
            QmsEngine::QuantumExact => EngineKind::QuantumExact,
            QmsEngine::QuantumTruncated => EngineKind::QuantumTruncated,
        };
        let plan = SimulationPlan::new(engine).with_truncation(Truncation::new(tau_v, tau_p)?);
        let traj = run_simulation(setup, &plan)?;
        output(probability, len, "probability")?.copy_from_slice(traj.final_probability().values());
        if let Some(s) = summary.as_mut() {
            *s = QmsRunSummary {
                slices: traj.cross_section.len() as u64,
                norm_drift: traj.norm_drift,
                s_v: traj.s_v.unwrap_or(0) as u64,
                s_p: traj.s_p.unwrap_or(0) as u64,
                census: traj.census.map(Into::into).unwrap_or_default(),
            };
        }
        Ok(())
    })
}

/// # Safety
/// `setup` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qms_setup_free(setup: *mut QmsSetup) {
    if !setup.is_null() {
        drop(Box::from_raw(setup));
    }
}
