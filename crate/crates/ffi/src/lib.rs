//! C ABI over `qta`.
//!
//! Objects are opaque handles created by the `qta_rule_*`, `qta_state_*`,
//! `qta_operator_build` and `qta_evolve` constructors and
//! released with the matching `qta_*_free`. Every fallible call returns a
//! [`QtaStatus`]; on failure a description is available from
//! [`qta_last_error_message`] on the same thread. Complex arrays are
//! interleaved `re, im` doubles.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use qta::complexity::{coarse_complexity, reversal_operator};
use qta::qca::{build_global_operator, evolve, GlobalOperator, LocalRule, Trajectory};
use qta::qlin::{random_state, ComplexMatrix, ComplexVector, RngSeed, StateVector};
use qta::thermo::{equilibration_time, shannon_entropy, AnalysisConfig};
use qta::{Error, C64};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QtaStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    NotUnitary = 4,
    NotNormalized = 5,
    Annihilated = 6,
    Numerical = 7,
    Io = 8,
    Panic = 9,
}

pub struct QtaRule(LocalRule);
pub struct QtaOperator(GlobalOperator);
pub struct QtaState(StateVector);
pub struct QtaTrajectory(Trajectory);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> QtaStatus {
    match e {
        Error::DimensionMismatch(_) => QtaStatus::DimensionMismatch,
        Error::NotUnitary(_) => QtaStatus::NotUnitary,
        Error::NotNormalized(_) => QtaStatus::NotNormalized,
        Error::Annihilated { .. } | Error::AnnihilatedAt { .. } => QtaStatus::Annihilated,
        Error::Io(_) | Error::Json(_) | Error::Csv(_) => QtaStatus::Io,
        e if e.is_numerical() => QtaStatus::Numerical,
        _ => QtaStatus::InvalidArgument,
    }
}

enum Fail {
    Null(&'static str),
    Qta(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Qta(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> QtaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            QtaStatus::Ok
        }
        Ok(Err(Fail::Null(what))) => {
            set_last_error(format!("null pointer: {what}"));
            QtaStatus::NullPointer
        }
        Ok(Err(Fail::Qta(e))) => {
            set_last_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_last_error("internal panic".into());
            QtaStatus::Panic
        }
    }
}

unsafe fn get<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn complex_slice(data: *const f64, len: usize) -> Result<Vec<C64>, Fail> {
    if data.is_null() {
        return Err(Fail::Null("data"));
    }
    let raw = std::slice::from_raw_parts(data, 2 * len);
    Ok(raw.chunks_exact(2).map(|c| C64::new(c[0], c[1])).collect())
}

unsafe fn copy_out(
    values: impl ExactSizeIterator<Item = f64>,
    out: *mut f64,
    len: usize,
) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null("out"));
    }
    if values.len() != len {
        return Err(Error::DimensionMismatch(format!(
            "buffer holds {len} values, need {}",
            values.len()
        ))
        .into());
    }
    let dst = std::slice::from_raw_parts_mut(out, len);
    for (d, v) in dst.iter_mut().zip(values) {
        *d = v;
    }
    Ok(())
}

/// Last error message on this thread, or NULL after a successful call. The
/// pointer stays valid until the next `qta_*` call on the same thread.
#[no_mangle]
pub extern "C" fn qta_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qta_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qta_rule_cnot(out: *mut *mut QtaRule) -> QtaStatus {
    guard(|| put(out, QtaRule(LocalRule::cnot())))
}

/// Local rule made of one Haar-random 4×4 gate seeded by `(master, task)`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qta_rule_haar(
    master: u64,
    task: u64,
    out: *mut *mut QtaRule,
) -> QtaStatus {
    guard(|| put(out, QtaRule(LocalRule::haar(RngSeed::new(master, task)))))
}

/// Local rule from `num_gates` row-major 4×4 complex matrices (32 doubles
/// each), applied first to last.
///
/// # Safety
/// `data` must hold `32 * num_gates` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qta_rule_from_gates(
    data: *const f64,
    num_gates: usize,
    out: *mut *mut QtaRule,
) -> QtaStatus {
    guard(|| {
        let entries = complex_slice(data, 16 * num_gates)?;
        let gates = entries
            .chunks_exact(16)
            .map(|c| ComplexMatrix::from_row_slice(4, 4, c))
            .collect();
        put(out, QtaRule(LocalRule::new(gates)?))
    })
}

/// # Safety
/// `rule` must come from a `qta_rule_*` constructor or be NULL.
#[no_mangle]
pub unsafe extern "C" fn qta_rule_free(rule: *mut QtaRule) {
    if !rule.is_null() {
        drop(Box::from_raw(rule));
    }
}

/// # Safety
/// `rule` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qta_operator_build(
    rule: *const QtaRule,
    n: usize,
    out: *mut *mut QtaOperator,
) -> QtaStatus {
    guard(|| {
        let rule = get(rule, "rule")?;
        put(out, QtaOperator(build_global_operator(&rule.0, n)?))
    })
}

/// Hilbert-space dimension `2^n`, or 0 for NULL.
///
/// # Safety
/// `op` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn qta_operator_dim(op: *const QtaOperator) -> usize {
    op.as_ref().map_or(0, |o| o.0.dim())
}

/// Largest entry of `U·T − T·U` for the cyclic translation `T`.
///
/// # Safety
/// `op` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qta_operator_translation_defect(
    op: *const QtaOperator,
    out: *mut f64,
) -> QtaStatus {
    guard(|| {
        let op = get(op, "op")?;
        copy_out(
            std::iter::once(op.0.translation_invariance_defect()),
            out,
            1,
        )
    })
}

/// # Safety
/// `op` must come from [`qta_operator_build`] or be NULL.
#[no_mangle]
pub unsafe extern "C" fn qta_operator_free(op: *mut QtaOperator) {
    if !op.is_null() {
        drop(Box::from_raw(op));
    }
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qta_state_basis(
    n: usize,
    index: usize,
    out: *mut *mut QtaState,
) -> QtaStatus {
    guard(|| put(out, QtaState(StateVector::basis(n, index)?)))
}

/// Seeded Gaussian random state on `n` qubits.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qta_state_random(
    n: usize,
    master: u64,
    task: u64,
    out: *mut *mut QtaState,
) -> QtaStatus {
    guard(|| put(out, QtaState(random_state(n, RngSeed::new(master, task))?)))
}

/// State from `dim` interleaved complex amplitudes; must be normalized.
///
/// # Safety
/// `data` must hold `2 * dim` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qta_state_from_amplitudes(
    data: *const f64,
    dim: usize,
    out: *mut *mut QtaState,
) -> QtaStatus {
    guard(|| {
        let amps = complex_slice(data, dim)?;
        put(
            out,
            QtaState(StateVector::new(ComplexVector::from_vec(amps))?),
        )
    })
}

/// # Safety
/// `state` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn qta_state_dim(state: *const QtaState) -> usize {
    state.as_ref().map_or(0, |s| s.0.dim())
}

/// Copies the amplitudes as `2 * dim` interleaved doubles.
///
/// # Safety
/// `state` must be a live handle; `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn qta_state_amplitudes(
    state: *const QtaState,
    out: *mut f64,
    len: usize,
) -> QtaStatus {
    guard(|| {
        let state = get(state, "state")?;
        let values: Vec<f64> = state
            .0
            .amplitudes()
            .iter()
            .flat_map(|z| [z.re, z.im])
            .collect();
        copy_out(values.into_iter(), out, len)
    })
}

/// # Safety
/// `state` must come from a `qta_state_*` constructor or be NULL.
#[no_mangle]
pub unsafe extern "C" fn qta_state_free(state: *mut QtaState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Evolves `state` for `steps` steps.
///
/// # Safety
/// `state` and `op` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qta_evolve(
    state: *const QtaState,
    op: *const QtaOperator,
    steps: usize,
    out: *mut *mut QtaTrajectory,
) -> QtaStatus {
    guard(|| {
        let (state, op) = (get(state, "state")?, get(op, "op")?);
        put(out, QtaTrajectory(evolve(&state.0, &op.0, steps)?))
    })
}

/// Number of stored rows, `steps + 1`, or 0 for NULL.
///
/// # Safety
/// `traj` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn qta_trajectory_len(traj: *const QtaTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.0.states.len())
}

/// Copies the probabilities as a row-major `len(traj) × dim` table.
///
/// # Safety
/// `traj` must be a live handle; `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn qta_trajectory_probabilities(
    traj: *const QtaTrajectory,
    out: *mut f64,
    len: usize,
) -> QtaStatus {
    guard(|| {
        let traj = get(traj, "traj")?;
        let values: Vec<f64> = traj.0.probabilities.iter().flatten().copied().collect();
        copy_out(values.into_iter(), out, len)
    })
}

/// New state handle holding row `t` of the trajectory.
///
/// # Safety
/// `traj` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qta_trajectory_state(
    traj: *const QtaTrajectory,
    t: usize,
    out: *mut *mut QtaState,
) -> QtaStatus {
    guard(|| {
        let traj = get(traj, "traj")?;
        let s = traj.0.states.get(t).ok_or_else(|| {
            Error::InvalidArgument(format!(
                "step {t} beyond trajectory of {} rows",
                traj.0.states.len()
            ))
        })?;
        put(out, QtaState(s.clone()))
    })
}

/// # Safety
/// `traj` must come from [`qta_evolve`] or be NULL.
#[no_mangle]
pub unsafe extern "C" fn qta_trajectory_free(traj: *mut QtaTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}

/// Equilibration time of the trajectory's probabilities. `*t_eq` is set only
/// when `*equilibrated` is nonzero.
///
/// # Safety
/// `traj` must be a live handle; the out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn qta_equilibration_time(
    traj: *const QtaTrajectory,
    epsilon: f64,
    window: usize,
    horizon: usize,
    equilibrated: *mut bool,
    t_eq: *mut usize,
) -> QtaStatus {
    guard(|| {
        let traj = get(traj, "traj")?;
        if equilibrated.is_null() || t_eq.is_null() {
            return Err(Fail::Null("out"));
        }
        let cfg = AnalysisConfig {
            epsilon,
            window,
            horizon,
        };
        cfg.validate()?;
        let report = equilibration_time(&traj.0.probabilities, &cfg)?;
        *equilibrated = report.equilibrated;
        if let Some(t) = report.t_eq {
            *t_eq = t;
        }
        Ok(())
    })
}

/// Coarse complexity `Σλ²` of the reversal operator taking `psi_t` back to
/// `psi0`.
///
/// # Safety
/// Both states must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qta_complexity(
    psi0: *const QtaState,
    psi_t: *const QtaState,
    out: *mut f64,
) -> QtaStatus {
    guard(|| {
        let (a, b) = (get(psi0, "psi0")?, get(psi_t, "psi_t")?);
        let c = coarse_complexity(&reversal_operator(&a.0, &b.0)?)?;
        copy_out(std::iter::once(c.value), out, 1)
    })
}

/// Shannon entropy in bits of `len` probabilities.
///
/// # Safety
/// `probs` must hold `len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qta_shannon_entropy(
    probs: *const f64,
    len: usize,
    out: *mut f64,
) -> QtaStatus {
    guard(|| {
        if probs.is_null() {
            return Err(Fail::Null("probs"));
        }
        let p = std::slice::from_raw_parts(probs, len);
        copy_out(std::iter::once(shannon_entropy(p)?), out, 1)
    })
}
