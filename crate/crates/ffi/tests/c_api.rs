use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use henon_lab_ffi::*;

fn regions() -> *mut HlRegions {
    let mut r = ptr::null_mut();
    assert_eq!(unsafe { hl_regions_new(1e-4, 1, 0.1, &mut r) }, HlStatus::Ok);
    assert!(!r.is_null());
    r
}

fn last_error() -> String {
    let mut buf = vec![0 as c_char; hl_last_error_length() + 1];
    unsafe { hl_last_error_message(buf.as_mut_ptr(), buf.len()) };
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

#[test]
fn map_step_matches_formula() {
    let (mut x, mut y) = (0.0, 0.0);
    assert_eq!(unsafe { hl_map_apply(2.0, 1e-4, 1, 0.5, 0.25, &mut x, &mut y) }, HlStatus::Ok);
    assert_eq!(x, 1.0 - 2.0 * 0.25 + 0.01 * 0.25);
    assert_eq!(y, 0.01 * 0.5);
}

#[test]
fn bad_config_reports_config_status() {
    let (mut x, mut y) = (0.0, 0.0);
    let st = unsafe { hl_map_apply(2.0, 1e-4, 3, 0.0, 0.0, &mut x, &mut y) };
    assert_eq!(st, HlStatus::Config);
    assert!(!last_error().is_empty());
}

#[test]
fn null_outputs_are_rejected() {
    assert_eq!(unsafe { hl_regions_new(1e-4, 1, 0.1, ptr::null_mut()) }, HlStatus::NullPointer);
    assert_eq!(unsafe { hl_regions_a_star(ptr::null(), ptr::null_mut()) }, HlStatus::NullPointer);
    unsafe { hl_regions_free(ptr::null_mut()) };
    unsafe { hl_spectrum_free(ptr::null_mut()) };
}

#[test]
fn regions_round_trip() {
    let r = regions();
    let mut a = 0.0;
    assert_eq!(unsafe { hl_regions_a_star(r, &mut a) }, HlStatus::Ok);
    assert!((a - 2.0).abs() < 1e-2);
    let (mut x, mut y, mut amb) = (0.0, 0.0, -1);
    let w = CString::new("1*").unwrap();
    assert_eq!(unsafe { hl_decode(r, w.as_ptr(), 30, &mut x, &mut y, &mut amb) }, HlStatus::Ok);
    // the fixed point coded 1 is P, and f(P) = P
    let (mut fx, mut fy) = (0.0, 0.0);
    unsafe { hl_map_apply(a, 1e-4, 1, x, y, &mut fx, &mut fy) };
    assert!((fx - x).abs() < 1e-12 && (fy - y).abs() < 1e-12);
    let bad = CString::new("01x").unwrap();
    assert_eq!(unsafe { hl_decode(r, bad.as_ptr(), 30, &mut x, &mut y, &mut amb) }, HlStatus::Config);
    unsafe { hl_regions_free(r) };
}

#[test]
fn pressure_at_zero_is_log_two() {
    let r = regions();
    let mut sp = ptr::null_mut();
    assert_eq!(unsafe { hl_spectrum_new(r, 10, &mut sp) }, HlStatus::Ok);
    let mut count = 0;
    assert_eq!(unsafe { hl_spectrum_orbit_count(sp, &mut count) }, HlStatus::Ok);
    assert_eq!(count, 108);
    let (mut p, mut lam) = (0.0, 0.0);
    assert_eq!(unsafe { hl_spectrum_pressure(sp, 0.0, &mut p, &mut lam) }, HlStatus::Ok);
    assert!((p - 2f64.ln()).abs() < 1e-12);
    assert!(lam > 0.5 * 3.9f64.ln());
    unsafe {
        hl_spectrum_free(sp);
        hl_regions_free(r);
    }
}

#[test]
fn version_is_nul_terminated() {
    let v = unsafe { CStr::from_ptr(hl_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_the_api() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/henon_lab.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in [
        "hl_regions_new",
        "hl_regions_free",
        "hl_decode",
        "hl_spectrum_pressure",
        "HL_STATUS_OK",
        "typedef struct HlRegions",
    ] {
        assert!(text.contains(name), "{name} missing from header");
    }
    // a C compiler, when present, must accept the header
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("probe.c");
    std::fs::write(
        &src,
        "#include \"henon_lab.h\"\nint main(void) { HlRegions *r = 0; hl_regions_free(r); return HL_STATUS_OK; }\n",
    )
    .unwrap();
    if let Ok(out) = Command::new("cc").arg("-fsyntax-only").arg("-I").arg(header.parent().unwrap()).arg(&src).output()
    {
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
}
