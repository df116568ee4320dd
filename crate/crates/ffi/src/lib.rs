//! C interface to `werner_gap`.
//!
//! Every fallible function returns a [`WgStatus`] and writes its result
//! through an out-pointer. After a non-`Ok` status, `wg_last_error` returns
//! a message for the calling thread. States are opaque handles released
//! with `wg_density_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use werner_gap::bell::{critical_visibility, optimize_settings, quantum_behavior, violation_threshold, SettingsSet};
use werner_gap::entanglement::{ppt_witness, werner_entanglement_boundary};
use werner_gap::lhv::lhv_validity_bound;
use werner_gap::quantum::{correlation, BlochVector, DensityMatrix};
use werner_gap::region::check_point;
use werner_gap::states::{family_state, werner_state, FamilyParams, WernerParams};
use werner_gap::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WgStatus {
    Ok = 0,
    NullPointer = 1,
    DimensionMismatch = 2,
    NotHermitian = 3,
    InvalidState = 4,
    NotUnit = 5,
    OutOfRange = 6,
    Unsupported = 7,
    Precondition = 8,
    Numerical = 9,
    Panic = 10,
}

/// Opaque density matrix.
pub struct WgDensityMatrix(DensityMatrix);

/// Classification of one `(ξ, p)` point. `p_star` is NaN when no admixture
/// violates.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct WgRegionPoint {
    pub xi: f64,
    pub p: f64,
    pub entangled: bool,
    pub lhv_modelled: bool,
    pub bell_violating: bool,
    pub p_star: f64,
    pub lhv_bound: f64,
    pub pt_min_eig: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> WgStatus {
    match e {
        Error::DimensionMismatch(_) => WgStatus::DimensionMismatch,
        Error::NotHermitian(_) => WgStatus::NotHermitian,
        Error::InvalidState(_) => WgStatus::InvalidState,
        Error::NotUnit(_) => WgStatus::NotUnit,
        Error::OutOfRange(_) => WgStatus::OutOfRange,
        Error::Unsupported(_) => WgStatus::Unsupported,
        Error::Precondition(_) => WgStatus::Precondition,
        Error::Numerical(_) => WgStatus::Numerical,
    }
}

enum Fail {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard<F: FnOnce() -> Result<(), Fail>>(f: F) -> WgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => WgStatus::Ok,
        Ok(Err(Fail::Null(name))) => {
            set_error(format!("null pointer passed as {name}"));
            WgStatus::NullPointer
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            WgStatus::Panic
        }
    }
}

unsafe fn write<T>(out: *mut T, name: &'static str, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null(name));
    }
    out.write(value);
    Ok(())
}

unsafe fn state<'a>(h: *const WgDensityMatrix) -> Result<&'a DensityMatrix, Fail> {
    h.as_ref().map(|s| &s.0).ok_or(Fail::Null("state"))
}

unsafe fn directions(ptr: *const f64, count: usize, name: &'static str) -> Result<Vec<BlochVector>, Fail> {
    if ptr.is_null() {
        return Err(Fail::Null(name));
    }
    let raw = std::slice::from_raw_parts(ptr, 3 * count);
    Ok(raw
        .chunks_exact(3)
        .map(|c| BlochVector::new(c[0], c[1], c[2]))
        .collect::<werner_gap::Result<_>>()?)
}

/// Message for the last failure on this thread; valid until the next failing
/// call on the same thread. Empty if nothing has failed.
#[no_mangle]
pub extern "C" fn wg_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn wg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// `p|ψ_ξ><ψ_ξ| + (1-p)|00><00|`.
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn wg_family_state(p: f64, xi: f64, out: *mut *mut WgDensityMatrix) -> WgStatus {
    guard(|| {
        let rho = family_state(FamilyParams::new(p, xi)?);
        write(out, "out", Box::into_raw(Box::new(WgDensityMatrix(rho))))
    })
}

/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn wg_werner_state(d: usize, p: f64, out: *mut *mut WgDensityMatrix) -> WgStatus {
    guard(|| {
        let rho = werner_state(WernerParams::new(d, p)?);
        write(out, "out", Box::into_raw(Box::new(WgDensityMatrix(rho))))
    })
}

/// Releases a handle; null is ignored.
///
/// # Safety
/// `h` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn wg_density_free(h: *mut WgDensityMatrix) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// # Safety
/// `h` must be a live handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn wg_density_dim(h: *const WgDensityMatrix, out: *mut usize) -> WgStatus {
    guard(|| write(out, "out", state(h)?.dim()))
}

/// Matrix entry `(row, col)` as real and imaginary parts.
///
/// # Safety
/// `h` must be a live handle; `re` and `im` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn wg_density_element(
    h: *const WgDensityMatrix,
    row: usize,
    col: usize,
    re: *mut f64,
    im: *mut f64,
) -> WgStatus {
    guard(|| {
        let rho = state(h)?;
        if row >= rho.dim() || col >= rho.dim() {
            return Err(Error::OutOfRange(format!("entry ({row}, {col}) of a {}-dimensional state", rho.dim())).into());
        }
        let z = rho.matrix()[(row, col)];
        write(re, "re", z.re)?;
        write(im, "im", z.im)
    })
}

/// `E(a, b)` for unit vectors `a[3]`, `b[3]` on a two-qubit state.
///
/// # Safety
/// `h` live; `a`, `b` point to three doubles each; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn wg_correlation(
    h: *const WgDensityMatrix,
    a: *const f64,
    b: *const f64,
    out: *mut f64,
) -> WgStatus {
    guard(|| {
        let a = directions(a, 1, "a")?;
        let b = directions(b, 1, "b")?;
        write(out, "out", correlation(state(h)?, &a[0], &b[0])?)
    })
}

/// Smallest eigenvalue of the partial transpose over a `d_a x d_b` split.
///
/// # Safety
/// `h` live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn wg_ppt_witness(h: *const WgDensityMatrix, d_a: usize, d_b: usize, out: *mut f64) -> WgStatus {
    guard(|| write(out, "out", ppt_witness(state(h)?, (d_a, d_b))?))
}

/// # Safety
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn wg_lhv_validity_bound(xi: f64, out: *mut f64) -> WgStatus {
    guard(|| write(out, "out", lhv_validity_bound(xi)?))
}

/// Writes the violation threshold, or NaN with `attainable = false`.
///
/// # Safety
/// `p_star` and `attainable` writable.
#[no_mangle]
pub unsafe extern "C" fn wg_violation_threshold(xi: f64, p_star: *mut f64, attainable: *mut bool) -> WgStatus {
    guard(|| {
        let t = violation_threshold(xi)?.p_star();
        write(p_star, "p_star", t.unwrap_or(f64::NAN))?;
        write(attainable, "attainable", t.is_some())
    })
}

/// # Safety
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn wg_werner_ppt_boundary(d: usize, out: *mut f64) -> WgStatus {
    guard(|| write(out, "out", werner_entanglement_boundary(d)?))
}

/// Critical visibility at given settings; directions are packed as
/// `x, y, z` triples.
///
/// # Safety
/// `h` live; `a` holds `3 m_a` doubles, `b` holds `3 m_b`; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn wg_critical_visibility(
    h: *const WgDensityMatrix,
    a: *const f64,
    m_a: usize,
    b: *const f64,
    m_b: usize,
    out: *mut f64,
) -> WgStatus {
    guard(|| {
        let settings = SettingsSet::new(directions(a, m_a, "a")?, directions(b, m_b, "b")?)?;
        let table = quantum_behavior(state(h)?, &settings)?;
        write(out, "out", critical_visibility(&table)?.v_critical)
    })
}

/// Smallest critical visibility found over `m` settings per side.
///
/// # Safety
/// `h` live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn wg_optimize_settings(
    h: *const WgDensityMatrix,
    m: usize,
    restarts: usize,
    seed: u64,
    out: *mut f64,
) -> WgStatus {
    guard(|| write(out, "out", optimize_settings(state(h)?, m, restarts, seed)?.v_min))
}

/// # Safety
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn wg_check_point(p: f64, xi: f64, out: *mut WgRegionPoint) -> WgStatus {
    guard(|| {
        let r = check_point(p, xi)?.point;
        write(
            out,
            "out",
            WgRegionPoint {
                xi: r.xi,
                p: r.p,
                entangled: r.entangled,
                lhv_modelled: r.lhv_modelled,
                bell_violating: r.bell_violating,
                p_star: r.p_star.unwrap_or(f64::NAN),
                lhv_bound: r.lhv_bound,
                pt_min_eig: r.pt_min_eig,
            },
        )
    })
}
