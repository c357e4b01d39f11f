//! C interface to `henon-lab`.
//!
//! Every function returns an [`HlStatus`]; results come back through out-pointers.
//! Objects are opaque handles released with their `_free` function. The message of
//! the most recent failure on the calling thread is available from
//! [`hl_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use henon_lab::coding::{decode, enumerate_periodic, Word};
use henon_lab::manifolds::{build_regions, RegionSet};
use henon_lab::map::apply;
use henon_lab::thermo::{pressure, OrbitWeights};
use henon_lab::{HenonError, MapConfig, Point2};

/// Outcome of a call. Values 1 to 5 coincide with the command line exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HlStatus {
    Ok = 0,
    Io = 1,
    Config = 2,
    Numerical = 3,
    Geometry = 4,
    IncompleteEnumeration = 5,
    NullPointer = 6,
    InvalidString = 7,
    Panic = 8,
}

impl From<&HenonError> for HlStatus {
    fn from(e: &HenonError) -> Self {
        match e.exit_code() {
            1 => HlStatus::Io,
            2 => HlStatus::Config,
            4 => HlStatus::Geometry,
            5 => HlStatus::IncompleteEnumeration,
            _ => HlStatus::Numerical,
        }
    }
}

/// Regions, saddles and `a*` for one `(b, s, eps)`.
pub struct HlRegions {
    inner: RegionSet,
}

/// Periodic-orbit data of one period, ready for pressure evaluations.
pub struct HlSpectrum {
    n: usize,
    data: OrbitWeights,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn guard(f: impl FnOnce() -> Result<(), (HlStatus, String)>) -> HlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HlStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside henon-lab".into());
            HlStatus::Panic
        }
    }
}

fn lift<T>(r: henon_lab::Result<T>) -> Result<T, (HlStatus, String)> {
    r.map_err(|e| (HlStatus::from(&e), e.to_string()))
}

fn null(what: &str) -> (HlStatus, String) {
    (HlStatus::NullPointer, format!("{what} is null"))
}

/// NUL-terminated version string with static lifetime.
#[no_mangle]
pub extern "C" fn hl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Length in bytes of the last error message on this thread, excluding the terminator.
#[no_mangle]
pub extern "C" fn hl_last_error_length() -> usize {
    LAST_ERROR.with(|e| e.borrow().len())
}

/// Copies the last error message into `buf`, truncated to `cap - 1` bytes and
/// NUL-terminated. Returns the number of bytes written before the terminator.
///
/// # Safety
/// `buf` must be null or point to `cap` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn hl_last_error_message(buf: *mut c_char, cap: usize) -> usize {
    if buf.is_null() || cap == 0 {
        return 0;
    }
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let n = msg.len().min(cap - 1);
        ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
        *buf.add(n) = 0;
        n
    })
}

/// One step of the map `(x, y) -> (1 - a x^2 + sqrt(b) y, s sqrt(b) x)`.
///
/// # Safety
/// `out_x` and `out_y` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hl_map_apply(
    a: f64,
    b: f64,
    s: i8,
    x: f64,
    y: f64,
    out_x: *mut f64,
    out_y: *mut f64,
) -> HlStatus {
    guard(|| {
        if out_x.is_null() || out_y.is_null() {
            return Err(null("output pointer"));
        }
        let cfg = MapConfig::new(a, b, s);
        lift(cfg.validate())?;
        let w = apply(&cfg, &Point2::new(x, y));
        *out_x = w.x;
        *out_y = w.y;
        Ok(())
    })
}

/// Locates `a*` for `(b, s)` and builds the regions there. `eps` sets the loss in
/// `4 - eps`. On success `*out` owns a handle for [`hl_regions_free`].
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hl_regions_new(b: f64, s: i8, eps: f64, out: *mut *mut HlRegions) -> HlStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let cfg = MapConfig { b, s, eps, ..MapConfig::default() };
        lift(cfg.validate())?;
        let inner = lift(build_regions(&cfg))?;
        *out = Box::into_raw(Box::new(HlRegions { inner }));
        Ok(())
    })
}

/// # Safety
/// `regions` must be null or a handle from [`hl_regions_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hl_regions_free(regions: *mut HlRegions) {
    if !regions.is_null() {
        drop(Box::from_raw(regions));
    }
}

/// # Safety
/// `regions` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hl_regions_a_star(regions: *const HlRegions, out: *mut f64) -> HlStatus {
    guard(|| {
        let r = regions.as_ref().ok_or_else(|| null("regions"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = r.inner.cfg.a;
        Ok(())
    })
}

/// The tangency point `zeta0`.
///
/// # Safety
/// `regions` must be a live handle; `out_x` and `out_y` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hl_regions_zeta0(regions: *const HlRegions, out_x: *mut f64, out_y: *mut f64) -> HlStatus {
    guard(|| {
        let r = regions.as_ref().ok_or_else(|| null("regions"))?;
        if out_x.is_null() || out_y.is_null() {
            return Err(null("output pointer"));
        }
        let z = r.inner.zeta0();
        *out_x = z.x;
        *out_y = z.y;
        Ok(())
    })
}

/// Point coded by `word`, written as in `10.0110` or `0110*` for a periodic word.
/// `*out_ambiguous` is set to 1 when the point sits on the two-to-one locus.
///
/// # Safety
/// `regions` must be a live handle, `word` a NUL-terminated string and the
/// output pointers valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hl_decode(
    regions: *const HlRegions,
    word: *const c_char,
    depth: usize,
    out_x: *mut f64,
    out_y: *mut f64,
    out_ambiguous: *mut i32,
) -> HlStatus {
    guard(|| {
        let r = regions.as_ref().ok_or_else(|| null("regions"))?;
        if word.is_null() {
            return Err(null("word"));
        }
        if out_x.is_null() || out_y.is_null() || out_ambiguous.is_null() {
            return Err(null("output pointer"));
        }
        let text =
            CStr::from_ptr(word).to_str().map_err(|e| (HlStatus::InvalidString, format!("word is not UTF-8: {e}")))?;
        let w = lift(Word::parse(text))?;
        let d = lift(decode(&r.inner, &w, depth))?;
        *out_x = d.point.x;
        *out_y = d.point.y;
        *out_ambiguous = i32::from(d.ambiguous);
        Ok(())
    })
}

/// Enumerates every orbit whose period divides `n`. Fails with
/// `HL_STATUS_INCOMPLETE_ENUMERATION` unless exactly `2^n` points are found.
///
/// # Safety
/// `regions` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hl_spectrum_new(regions: *const HlRegions, n: usize, out: *mut *mut HlSpectrum) -> HlStatus {
    guard(|| {
        let r = regions.as_ref().ok_or_else(|| null("regions"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let e = lift(enumerate_periodic(&r.inner, n))?;
        *out = Box::into_raw(Box::new(HlSpectrum { n, data: OrbitWeights::from_orbits(&e.orbits) }));
        Ok(())
    })
}

/// # Safety
/// `spectrum` must be null or a handle from [`hl_spectrum_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hl_spectrum_free(spectrum: *mut HlSpectrum) {
    if !spectrum.is_null() {
        drop(Box::from_raw(spectrum));
    }
}

/// Number of orbits held by the spectrum.
///
/// # Safety
/// `spectrum` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hl_spectrum_orbit_count(spectrum: *const HlSpectrum, out: *mut usize) -> HlStatus {
    guard(|| {
        let sp = spectrum.as_ref().ok_or_else(|| null("spectrum"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = sp.data.len();
        Ok(())
    })
}

/// `P_n(t)` together with the Lyapunov exponent of its Gibbs weights.
///
/// # Safety
/// `spectrum` must be a live handle; `out_pressure` and `out_lyapunov` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hl_spectrum_pressure(
    spectrum: *const HlSpectrum,
    t: f64,
    out_pressure: *mut f64,
    out_lyapunov: *mut f64,
) -> HlStatus {
    guard(|| {
        let sp = spectrum.as_ref().ok_or_else(|| null("spectrum"))?;
        if out_pressure.is_null() || out_lyapunov.is_null() {
            return Err(null("output pointer"));
        }
        let s = lift(pressure(&sp.data, sp.n, t))?;
        *out_pressure = s.pressure;
        *out_lyapunov = s.lyapunov;
        Ok(())
    })
}
