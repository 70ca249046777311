//! Loads the built shared library through the platform dynamic loader and
//! drives it by symbol name, as a C host would.

use std::path::PathBuf;

use libloading::{Library, Symbol};
use pid_controller::EXPORTED_SYMBOLS;
use rtmbe::pid::{PidController, PidParameters};

fn library_path() -> PathBuf {
    let name = libloading::library_filename("pid_controller");
    let exe = std::env::current_exe().unwrap();
    let deps = exe.parent().unwrap();
    [deps.parent().unwrap().join(&name), deps.join(&name)]
        .into_iter()
        .find(|p| p.exists())
        .unwrap_or_else(|| panic!("shared library {name:?} not found near {}", deps.display()))
}

type InitFn = unsafe extern "C" fn() -> i32;
type CalcFn = unsafe extern "C" fn(f64, f64, f64) -> f64;
type SetKFn = unsafe extern "C" fn(f64, f64, f64);
type SetParamFn = unsafe extern "C" fn(f64);
type VoidFn = unsafe extern "C" fn();
type ErrFn = unsafe extern "C" fn() -> i32;

#[test]
fn drives_controller_through_dlopen() {
    let lib = unsafe { Library::new(library_path()) }.expect("load shared library");
    for name in EXPORTED_SYMBOLS {
        let sym: Result<Symbol<VoidFn>, _> = unsafe { lib.get(name.as_bytes()) };
        assert!(sym.is_ok(), "missing symbol {name}");
    }
    let bang: Result<Symbol<VoidFn>, _> = unsafe { lib.get(b"calculate_control!") };
    assert!(bang.is_err());

    unsafe {
        let init: Symbol<InitFn> = lib.get(b"pid_init").unwrap();
        let calc: Symbol<CalcFn> = lib.get(b"calculate_control").unwrap();
        let set_k: Symbol<SetKFn> = lib.get(b"set_K").unwrap();
        let set_ti: Symbol<SetParamFn> = lib.get(b"set_Ti").unwrap();
        let reset: Symbol<VoidFn> = lib.get(b"reset_state").unwrap();
        let last_error: Symbol<ErrFn> = lib.get(b"pid_last_error").unwrap();

        // the loaded library has its own, still uninitialized, global
        assert!(calc(1.0, 0.0, 0.0).is_nan());
        assert_eq!(last_error(), 1);

        assert_eq!(init(), 0);
        let mut local = PidController::new(PidParameters::reference_defaults()).unwrap();
        let (r, y, uff) = (1.0, 0.0, 0.0);
        let mut got = Vec::new();
        let mut want = Vec::new();
        for _ in 0..2 {
            got.push(calc(r, y, uff));
            want.push(local.calculate_control(r, y, uff));
        }
        set_k(0.0, r, y);
        local.set_K(0.0, r, y).unwrap();
        for _ in 0..3 {
            got.push(calc(r, y, uff));
            want.push(local.calculate_control(r, y, uff));
        }
        assert_eq!(
            got.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            want.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
        assert_eq!(last_error(), 0);

        set_ti(-1.0);
        assert_eq!(last_error(), 2);
        assert_eq!(last_error(), 0);
        reset();
        reset();
        assert_eq!(last_error(), 0);
        assert_eq!(calc(1.0, 0.0, 0.0), 0.0, "K = 0 and a reset leave u = 0");
    }
}

#[test]
fn header_declares_exact_prototypes() {
    let header = include_str!("../include/pid_controller.h");
    for proto in [
        "int pid_init(void);",
        "double calculate_control(double r, double y, double uff);",
        "void set_K(double K, double r, double y);",
        "void set_Ti(double Ti);",
        "void set_Td(double Td);",
        "void reset_state(void);",
        "int pid_last_error(void);",
    ] {
        assert!(header.contains(proto), "header lacks `{proto}`");
    }
}
