use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use pom_ffi::*;

fn canonical(n: u32) -> *mut PomSetup {
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { pom_setup_canonical(n, &mut h) }, PomStatus::Ok);
    assert!(!h.is_null());
    h
}

fn last_error() -> String {
    let p = pom_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn canonical_values() {
    let h = canonical(3);
    let (mut bell, mut spec, mut direct, mut via, mut parity) = (0.0, 0.0, 0.0, 0.0, 1.0);
    let mut n = 0;
    unsafe {
        assert_eq!(pom_setup_n(h, &mut n), PomStatus::Ok);
        assert_eq!(pom_bell_value(h, &mut bell), PomStatus::Ok);
        assert_eq!(pom_spectral_max(h, &mut spec), PomStatus::Ok);
        assert_eq!(pom_success_direct(h, &mut direct), PomStatus::Ok);
        assert_eq!(pom_success_via_bell(h, &mut via), PomStatus::Ok);
        assert_eq!(pom_parity_deviation(h, &mut parity), PomStatus::Ok);
        pom_setup_free(h);
    }
    assert_eq!(n, 3);
    let opt = 4.0 * 3f64.sqrt();
    assert!((bell - opt).abs() < 1e-9);
    assert!((spec - opt).abs() < 1e-9);
    assert!((direct - via).abs() < 1e-12);
    assert!((direct - 0.788675134594813).abs() < 1e-9);
    assert!(parity < 1e-12);
    assert!(pom_last_error_message().is_null());
}

#[test]
fn sos_and_simulation() {
    let h = canonical(4);
    let mut sos = PomSos::default();
    let mut sim = PomSimulation::default();
    let mut again = PomSimulation::default();
    unsafe {
        assert_eq!(pom_sos_certificate(h, &mut sos), PomStatus::Ok);
        assert_eq!(pom_simulate(h, 50_000, 5, 2, &mut sim), PomStatus::Ok);
        assert_eq!(pom_simulate(h, 50_000, 5, 2, &mut again), PomStatus::Ok);
        assert_eq!(
            pom_simulate(h, 0, 5, 2, &mut again),
            PomStatus::InvalidArgument
        );
        pom_setup_free(h);
    }
    assert!(sos.residual <= 1e-10 && sos.gamma_min_eig >= -1e-9);
    assert_eq!(sim.rounds, 50_000);
    assert_eq!(sim.successes, again.successes);
    assert!((sim.estimate - 0.75).abs() < 4.0 * sim.standard_error);
}

#[test]
fn free_functions() {
    let mut b = PomBounds::default();
    let mut lhv = 0i64;
    let mut lp = 0.0;
    let mut seesaw = 0.0;
    unsafe {
        assert_eq!(pom_bounds(2, &mut b), PomStatus::Ok);
        assert_eq!(pom_lhv_max(3, &mut lhv), PomStatus::Ok);
        assert_eq!(pom_classical_lp(2, 2, &mut lp), PomStatus::Ok);
        assert_eq!(pom_seesaw(2, 0, 10, 0, &mut seesaw), PomStatus::Ok);
    }
    assert_eq!(b.classical, 0.75);
    assert!((b.quantum_opt - 0.8535533905932737).abs() < 1e-12);
    assert_eq!(lhv, 6);
    assert!((lp - 0.75).abs() < 1e-9);
    assert!((seesaw - 2f64.sqrt() * 2.0).abs() < 1e-6);
}

#[test]
fn json_round_trip() {
    let h = canonical(2);
    let mut s = ptr::null_mut();
    let mut copy = ptr::null_mut();
    let (mut a, mut b) = (0.0, 0.0);
    unsafe {
        assert_eq!(pom_setup_to_json(h, &mut s), PomStatus::Ok);
        assert_eq!(pom_setup_from_json(s, &mut copy), PomStatus::Ok);
        pom_bell_value(h, &mut a);
        pom_bell_value(copy, &mut b);
        pom_string_free(s);
        pom_setup_free(copy);
        pom_setup_free(h);
    }
    assert_eq!(a, b);
}

#[test]
fn error_codes() {
    let mut h = ptr::null_mut();
    let mut v = 0.0;
    unsafe {
        assert_eq!(pom_setup_canonical(13, &mut h), PomStatus::InvalidArgument);
        assert!(last_error().contains("13"));
        assert!(h.is_null());

        assert_eq!(pom_bell_value(ptr::null(), &mut v), PomStatus::NullPointer);
        assert_eq!(
            pom_setup_canonical(2, ptr::null_mut()),
            PomStatus::NullPointer
        );
        assert_eq!(
            pom_setup_from_json(ptr::null(), &mut h),
            PomStatus::NullPointer
        );

        let bad = CString::new("{not json").unwrap();
        assert_eq!(pom_setup_from_json(bad.as_ptr(), &mut h), PomStatus::Parse);

        let bytes = [0xffu8, 0xfe, 0];
        assert_eq!(
            pom_setup_from_json(bytes.as_ptr().cast(), &mut h),
            PomStatus::InvalidUtf8
        );

        assert_eq!(pom_classical_lp(3, 3, &mut v), PomStatus::InvalidArgument);
        assert!(last_error().contains("cap"));

        pom_setup_free(ptr::null_mut());
        pom_string_free(ptr::null_mut());
    }
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(pom_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

fn manifest_dir() -> &'static Path {
    Path::new(env!("CARGO_MANIFEST_DIR"))
}

/// `target/<profile>` of the running test binary.
fn profile_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(Path::parent).unwrap().to_path_buf()
}

fn have_cc() -> bool {
    Command::new("cc")
        .arg("--version")
        .output()
        .is_ok_and(|o| o.status.success())
}

#[test]
fn header_is_valid_c() {
    if !have_cc() {
        eprintln!("cc not found; skipping");
        return;
    }
    let include = manifest_dir().join("include");
    for std in ["-std=c99", "-std=c11"] {
        let out = Command::new("cc")
            .args([std, "-Wall", "-Wextra", "-Werror", "-fsyntax-only", "-I"])
            .arg(&include)
            .arg(manifest_dir().join("tests/c/smoke.c"))
            .output()
            .unwrap();
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
}

#[test]
fn c_program_links_and_runs() {
    let lib = profile_dir().join("libpom_ffi.a");
    if !have_cc() || !lib.exists() {
        eprintln!("cc or {} missing; skipping", lib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let out = Command::new("cc")
        .args(["-std=c99", "-I"])
        .arg(manifest_dir().join("include"))
        .arg(manifest_dir().join("tests/c/smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let run = Command::new(&exe).output().unwrap();
    assert!(
        run.status.success(),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    assert!(String::from_utf8_lossy(&run.stdout).starts_with("ok "));
}
