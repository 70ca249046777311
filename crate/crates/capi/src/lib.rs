//! C ABI over a single global [`PidController`].
//!
//! The exported functions mirror the methods of the controller with the
//! instance argument dropped. See `include/pid_controller.h` for the
//! prototypes and the error protocol.
//!
//! The header documents the surface as single-threaded. The slot is still
//! behind a `Mutex` (futex-based, no allocation) so accidental concurrent use
//! from a host cannot corrupt the controller.

#![allow(non_snake_case)]

use std::os::raw::c_int;
use std::sync::atomic::{AtomicI32, Ordering};
use std::sync::{Mutex, MutexGuard};

use rtmbe::pid::{PidController, PidError, PidParameters};

pub const PID_OK: c_int = 0;
pub const PID_ERR_UNINITIALIZED: c_int = 1;
pub const PID_ERR_INVALID_PARAMETER: c_int = 2;

/// Names of every exported symbol, as resolved by a dynamic loader.
pub const EXPORTED_SYMBOLS: [&str; 7] = [
    "pid_init",
    "calculate_control",
    "set_K",
    "set_Ti",
    "set_Td",
    "reset_state",
    "pid_last_error",
];

static CONTROLLER: Mutex<Option<PidController>> = Mutex::new(None);
static LAST_ERROR: AtomicI32 = AtomicI32::new(PID_OK);

fn slot() -> MutexGuard<'static, Option<PidController>> {
    CONTROLLER.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
}

fn record(code: c_int) {
    LAST_ERROR.store(code, Ordering::Relaxed);
}

/// Runs `f` on the global controller, recording the error protocol codes.
fn with_controller<T>(
    on_uninit: T,
    f: impl FnOnce(&mut PidController) -> Result<T, PidError>,
) -> T {
    let mut guard = slot();
    match guard.as_mut() {
        None => {
            record(PID_ERR_UNINITIALIZED);
            on_uninit
        }
        Some(pid) => match f(pid) {
            Ok(v) => v,
            Err(PidError::InvalidParameter { .. }) => {
                record(PID_ERR_INVALID_PARAMETER);
                on_uninit
            }
        },
    }
}

/// The controller `pid_init` creates.
pub fn default_controller() -> PidController {
    PidController::new(PidParameters::reference_defaults()).expect("reference parameters are valid")
}

#[no_mangle]
pub extern "C" fn pid_init() -> c_int {
    let mut guard = slot();
    if guard.is_none() {
        *guard = Some(default_controller());
    }
    PID_OK
}

#[no_mangle]
pub extern "C" fn calculate_control(r: f64, y: f64, uff: f64) -> f64 {
    with_controller(f64::NAN, |pid| Ok(pid.calculate_control(r, y, uff)))
}

#[no_mangle]
pub extern "C" fn set_K(K: f64, r: f64, y: f64) {
    with_controller((), |pid| pid.set_K(K, r, y))
}

#[no_mangle]
pub extern "C" fn set_Ti(Ti: f64) {
    with_controller((), |pid| pid.set_Ti(Ti))
}

#[no_mangle]
pub extern "C" fn set_Td(Td: f64) {
    with_controller((), |pid| pid.set_Td(Td))
}

#[no_mangle]
pub extern "C" fn reset_state() {
    with_controller((), |pid| {
        pid.reset_state();
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn pid_last_error() -> c_int {
    LAST_ERROR.swap(PID_OK, Ordering::Relaxed)
}

/// Snapshot of the global controller, `None` before `pid_init`.
pub fn global_controller() -> Option<PidController> {
    *slot()
}
