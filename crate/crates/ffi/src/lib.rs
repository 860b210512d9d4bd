//! C ABI over `pom-core`.
//!
//! Setups live behind an opaque `PomSetup` handle. Every fallible call
//! returns a [`PomStatus`]; on failure the message is available from
//! [`pom_last_error_message`] on the same thread. Strings handed out by the
//! library are released with [`pom_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use pom_core::bell::{bell_operator, bell_value, lhv_max, sos_certificate, spectral_max};
use pom_core::classical::lp_optimal_classical;
use pom_core::construct::{
    canonical_setup, encode_ensemble, verify_parity_obliviousness, MeasurementSetup,
};
use pom_core::game::{exact_success_direct, exact_success_via_bell, simulate_sharded};
use pom_core::seesaw::{seesaw_run, SeesawConfig};
use pom_core::task::bounds;
use pom_core::PomError;

#[repr(C)]
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum PomStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidUtf8 = 3,
    Parse = 4,
    Numerical = 5,
    Io = 6,
    Panic = 7,
}

/// Opaque measurement setup.
pub struct PomSetup {
    inner: MeasurementSetup,
}

#[repr(C)]
#[derive(Copy, Clone, Debug, Default)]
pub struct PomBounds {
    pub classical: f64,
    pub pnc: f64,
    pub quantum_opt: f64,
    pub algebraic_success: f64,
}

#[repr(C)]
#[derive(Copy, Clone, Debug, Default)]
pub struct PomSimulation {
    pub rounds: u64,
    pub successes: u64,
    pub estimate: f64,
    pub standard_error: f64,
}

#[repr(C)]
#[derive(Copy, Clone, Debug, Default)]
pub struct PomSos {
    pub residual: f64,
    pub gamma_min_eig: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &PomError) -> PomStatus {
    match e {
        PomError::Io(_) => PomStatus::Io,
        PomError::Json(_) | PomError::Csv(_) => PomStatus::Parse,
        PomError::NotHermitian { .. }
        | PomError::NonFinite(_)
        | PomError::ComplexExpectation(_)
        | PomError::InvalidProbability { .. } => PomStatus::Numerical,
        _ => PomStatus::InvalidArgument,
    }
}

enum Failure {
    Status(PomStatus, String),
    Core(PomError),
}

impl From<PomError> for Failure {
    fn from(e: PomError) -> Self {
        Failure::Core(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> PomStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            PomStatus::Ok
        }
        Ok(Err(Failure::Core(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Failure::Status(s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic".into());
            PomStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure::Status(PomStatus::NullPointer, format!("{what} is null"))
}

unsafe fn setup_ref<'a>(h: *const PomSetup) -> Result<&'a MeasurementSetup, Failure> {
    h.as_ref().map(|s| &s.inner).ok_or_else(|| null("setup"))
}

unsafe fn write<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

fn usize_arg(v: u32) -> usize {
    v as usize
}

/// Canonical setup for `n` bits (2 to 12).
///
/// # Safety
/// `out` must be valid for writes. The handle is released with [`pom_setup_free`].
#[no_mangle]
pub unsafe extern "C" fn pom_setup_canonical(n: u32, out: *mut *mut PomSetup) -> PomStatus {
    guard(|| {
        let inner = canonical_setup(usize_arg(n))?;
        write(out, Box::into_raw(Box::new(PomSetup { inner })))
    })
}

/// Parses a setup document.
///
/// # Safety
/// `json` must be a nul-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pom_setup_from_json(
    json: *const c_char,
    out: *mut *mut PomSetup,
) -> PomStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| Failure::Status(PomStatus::InvalidUtf8, e.to_string()))?;
        let inner = MeasurementSetup::from_json(text)?;
        write(out, Box::into_raw(Box::new(PomSetup { inner })))
    })
}

/// Serializes a setup; free the string with [`pom_string_free`].
///
/// # Safety
/// `setup` must be a live handle or null; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pom_setup_to_json(
    setup: *const PomSetup,
    out: *mut *mut c_char,
) -> PomStatus {
    guard(|| {
        let text = setup_ref(setup)?.to_json()?;
        let c = CString::new(text).expect("JSON has no nul bytes");
        write(out, c.into_raw())
    })
}

/// Number of bits the setup plays.
///
/// # Safety
/// `setup` must be a live handle or null; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pom_setup_n(setup: *const PomSetup, out: *mut u32) -> PomStatus {
    guard(|| write(out, setup_ref(setup)?.n as u32))
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `setup` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn pom_setup_free(setup: *mut PomSetup) {
    if !setup.is_null() {
        drop(Box::from_raw(setup));
    }
}

/// Expectation of the Bell operator in the setup's state.
///
/// # Safety
/// `setup` must be a live handle or null; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pom_bell_value(setup: *const PomSetup, out: *mut f64) -> PomStatus {
    guard(|| write(out, bell_value(setup_ref(setup)?)?))
}

/// Largest eigenvalue of the setup's Bell operator.
///
/// # Safety
/// `setup` must be a live handle or null; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pom_spectral_max(setup: *const PomSetup, out: *mut f64) -> PomStatus {
    guard(|| write(out, spectral_max(&bell_operator(setup_ref(setup)?)?)?))
}

/// Success probability from the steered ensemble and Bob's measurements.
///
/// # Safety
/// `setup` must be a live handle or null; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pom_success_direct(setup: *const PomSetup, out: *mut f64) -> PomStatus {
    guard(|| {
        let s = setup_ref(setup)?;
        write(out, exact_success_direct(&encode_ensemble(s)?, &s.bob)?)
    })
}

/// Success probability from the Bell value.
///
/// # Safety
/// `setup` must be a live handle or null; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pom_success_via_bell(setup: *const PomSetup, out: *mut f64) -> PomStatus {
    guard(|| write(out, exact_success_via_bell(setup_ref(setup)?)?))
}

/// Sum-of-squares residual and smallest eigenvalue of the shifted operator.
///
/// # Safety
/// `setup` must be a live handle or null; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pom_sos_certificate(
    setup: *const PomSetup,
    out: *mut PomSos,
) -> PomStatus {
    guard(|| {
        let c = sos_certificate(setup_ref(setup)?)?;
        write(
            out,
            PomSos {
                residual: c.residual,
                gamma_min_eig: c.gamma_min_eig,
            },
        )
    })
}

/// Largest parity deviation of the steered ensemble.
///
/// # Safety
/// `setup` must be a live handle or null; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pom_parity_deviation(setup: *const PomSetup, out: *mut f64) -> PomStatus {
    guard(|| {
        let r = verify_parity_obliviousness(&encode_ensemble(setup_ref(setup)?)?)?;
        write(out, r.max_deviation)
    })
}

/// Seeded Monte Carlo run over `shards` independent streams.
///
/// # Safety
/// `setup` must be a live handle or null; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pom_simulate(
    setup: *const PomSetup,
    rounds: u64,
    seed: u64,
    shards: u32,
    out: *mut PomSimulation,
) -> PomStatus {
    guard(|| {
        let r = simulate_sharded(setup_ref(setup)?, rounds, seed, shards)?;
        write(
            out,
            PomSimulation {
                rounds: r.rounds,
                successes: r.successes,
                estimate: r.estimate,
                standard_error: r.standard_error,
            },
        )
    })
}

/// Closed-form success bounds for `n` bits.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pom_bounds(n: u32, out: *mut PomBounds) -> PomStatus {
    guard(|| {
        let b = bounds(usize_arg(n))?;
        write(
            out,
            PomBounds {
                classical: b.classical,
                pnc: b.pnc,
                quantum_opt: b.quantum_opt,
                algebraic_success: b.algebraic_success,
            },
        )
    })
}

/// Local-hidden-variable maximum of the Bell expression.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pom_lhv_max(n: u32, out: *mut i64) -> PomStatus {
    guard(|| write(out, lhv_max(usize_arg(n))?))
}

/// Optimal parity-oblivious classical success with an `alphabet`-message channel.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pom_classical_lp(n: u32, alphabet: u32, out: *mut f64) -> PomStatus {
    guard(|| {
        write(
            out,
            lp_optimal_classical(usize_arg(n), usize_arg(alphabet))?.optimal_value,
        )
    })
}

/// Best see-saw objective over `restarts` starts; `dim = 0` picks the default.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pom_seesaw(
    n: u32,
    dim: u32,
    restarts: u32,
    seed: u64,
    out: *mut f64,
) -> PomStatus {
    guard(|| {
        let mut cfg = SeesawConfig::new(usize_arg(n));
        if dim != 0 {
            cfg.dim = usize_arg(dim);
        }
        cfg.restarts = usize_arg(restarts);
        cfg.seed = seed;
        write(out, seesaw_run(&cfg)?.best_objective())
    })
}

/// Message for the last failed call on this thread, or null. Valid until
/// the next library call on this thread.
#[no_mangle]
pub extern "C" fn pom_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn pom_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn pom_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
