//! C ABI over the causal-shift library.
//!
//! Every function returns a `CsStatus`; outputs go through pointers. On a
//! non-OK status, `cs_last_error_message` describes the failure on the
//! calling thread. Atoms are opaque handles created by `cs_atom_new` or
//! `cs_atom_hydrogen` and released with `cs_atom_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use causal_shift::observables::{
    delta_final, gamma_exact, gamma_leading, hydrogen_1s2p_preset, shift_ratio,
    solve_normalization_with, z_factor, AtomParams, ExtractionOptions, PhysicalConstants,
    ResonanceWeight,
};
use causal_shift::selfenergy::{
    as_causal_distribution_dimensionless, t2_sym, DimensionlessEnergy, NormalizationConstants,
};
use causal_shift::splitting::{retarded_part_central, BRANCH_EXCLUSION};

/// Status code of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ComputationFailed = 3,
    Panic = 4,
}

/// Resonance weight 1/u (rate denominator power 5).
pub const CS_WEIGHT_INVERSE_U: i32 = 0;
/// Unit resonance weight (rate denominator power 4).
pub const CS_WEIGHT_UNITY: i32 = 1;

/// Opaque atom handle.
pub struct CsAtom {
    inner: AtomParams,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::default());
}

enum Failure {
    Null(&'static str),
    Invalid(String),
    Computation(String),
}

fn guard<F>(f: F) -> CsStatus
where
    F: FnOnce() -> Result<(), Failure>,
{
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CsStatus::Ok,
        Ok(Err(Failure::Null(name))) => {
            set_error(&format!("null pointer: {name}"));
            CsStatus::NullPointer
        }
        Ok(Err(Failure::Invalid(m))) => {
            set_error(&m);
            CsStatus::InvalidArgument
        }
        Ok(Err(Failure::Computation(m))) => {
            set_error(&m);
            CsStatus::ComputationFailed
        }
        Err(_) => {
            set_error("internal panic");
            CsStatus::Panic
        }
    }
}

unsafe fn atom_ref<'a>(atom: *const CsAtom) -> Result<&'a AtomParams, Failure> {
    atom.as_ref().map(|a| &a.inner).ok_or(Failure::Null("atom"))
}

unsafe fn write<T>(ptr: *mut T, value: T, name: &'static str) -> Result<(), Failure> {
    if ptr.is_null() {
        return Err(Failure::Null(name));
    }
    ptr.write(value);
    Ok(())
}

fn weight(w: i32) -> Result<ResonanceWeight, Failure> {
    match w {
        CS_WEIGHT_INVERSE_U => Ok(ResonanceWeight::InverseU),
        CS_WEIGHT_UNITY => Ok(ResonanceWeight::Unity),
        other => Err(Failure::Invalid(format!("unknown weight {other}"))),
    }
}

fn comp<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Computation(e.to_string())
}

/// Message for the last failed call on this thread; empty after success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn cs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Creates an atom from SI parameters (kg, rad/s, C m, s) with CODATA 2018
/// constants.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn cs_atom_new(
    m_g: f64,
    omega_eg: f64,
    d_eg: f64,
    t_g: f64,
    out: *mut *mut CsAtom,
) -> CsStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let inner = AtomParams::new(m_g, omega_eg, d_eg, t_g, PhysicalConstants::CODATA_2018)
            .map_err(|e| Failure::Invalid(e.to_string()))?;
        write(out, Box::into_raw(Box::new(CsAtom { inner })), "out")
    })
}

/// Creates the built-in hydrogen 1s-2p atom.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn cs_atom_hydrogen(out: *mut *mut CsAtom) -> CsStatus {
    guard(|| {
        let inner = hydrogen_1s2p_preset(&PhysicalConstants::CODATA_2018);
        write(out, Box::into_raw(Box::new(CsAtom { inner })), "out")
    })
}

/// Releases an atom; null is ignored.
///
/// # Safety
/// `atom` must come from `cs_atom_new` or `cs_atom_hydrogen` and not be
/// used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cs_atom_free(atom: *mut CsAtom) {
    if !atom.is_null() {
        drop(Box::from_raw(atom));
    }
}

/// # Safety
/// `atom` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cs_atom_delta_u(atom: *const CsAtom, out: *mut f64) -> CsStatus {
    guard(|| write(out, atom_ref(atom)?.delta_u(), "out"))
}

/// Leading-order decay rate, 1/s.
///
/// # Safety
/// `atom` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cs_gamma_leading(atom: *const CsAtom, out: *mut f64) -> CsStatus {
    guard(|| write(out, gamma_leading(atom_ref(atom)?), "out"))
}

/// Decay rate with the recoil factors, 1/s.
///
/// # Safety
/// `atom` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cs_gamma_exact(
    atom: *const CsAtom,
    weight_code: i32,
    out: *mut f64,
) -> CsStatus {
    guard(|| {
        let w = weight(weight_code)?;
        write(out, gamma_exact(atom_ref(atom)?, w), "out")
    })
}

/// Final line shift, 1/s.
///
/// # Safety
/// `atom` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cs_delta_final(atom: *const CsAtom, out: *mut f64) -> CsStatus {
    guard(|| write(out, delta_final(atom_ref(atom)?), "out"))
}

/// Signed ratio and magnitude of the final shift to the Lamb reference.
///
/// # Safety
/// `atom` must be a live handle; both outputs writable.
#[no_mangle]
pub unsafe extern "C" fn cs_shift_ratio(
    atom: *const CsAtom,
    signed_out: *mut f64,
    magnitude_out: *mut f64,
) -> CsStatus {
    guard(|| {
        let a = atom_ref(atom)?;
        let r = shift_ratio(a, &a.constants).map_err(comp)?;
        write(signed_out, r.signed, "signed_out")?;
        write(magnitude_out, r.magnitude, "magnitude_out")
    })
}

/// Normalization constants zeroing the low-order threshold coefficients.
///
/// # Safety
/// `atom` must be a live handle; outputs writable.
#[no_mangle]
pub unsafe extern "C" fn cs_solve_normalization(
    atom: *const CsAtom,
    weight_code: i32,
    c0: *mut f64,
    c1: *mut f64,
    c2: *mut f64,
) -> CsStatus {
    guard(|| {
        let w = weight(weight_code)?;
        let s = solve_normalization_with(atom_ref(atom)?, w, &ExtractionOptions::default())
            .map_err(comp)?;
        write(c0, s.constants.c0, "c0")?;
        write(c1, s.constants.c1, "c1")?;
        write(c2, s.constants.c2, "c2")
    })
}

/// Z at the atom's t_g for given normalization constants.
///
/// # Safety
/// `atom` must be a live handle; outputs writable.
#[no_mangle]
pub unsafe extern "C" fn cs_z_factor(
    atom: *const CsAtom,
    c0: f64,
    c1: f64,
    c2: f64,
    weight_code: i32,
    re: *mut f64,
    im: *mut f64,
) -> CsStatus {
    guard(|| {
        let w = weight(weight_code)?;
        let z =
            z_factor(atom_ref(atom)?, &NormalizationConstants::new(c0, c1, c2), w).map_err(comp)?;
        write(re, z.re, "re")?;
        write(im, z.im, "im")
    })
}

/// Symmetrized second-order term at dimensionless energy u, 1/m.
///
/// # Safety
/// `atom` must be a live handle; outputs writable.
#[no_mangle]
pub unsafe extern "C" fn cs_t2_sym(
    atom: *const CsAtom,
    u: f64,
    c0: f64,
    c1: f64,
    c2: f64,
    re: *mut f64,
    im: *mut f64,
) -> CsStatus {
    guard(|| {
        let a = atom_ref(atom)?;
        let e = DimensionlessEnergy::new(u).map_err(|e| Failure::Invalid(e.to_string()))?;
        let v = t2_sym(e, a, &NormalizationConstants::new(c0, c1, c2))
            .map_err(|e| Failure::Invalid(e.to_string()))?;
        write(re, v.total.re, "re")?;
        write(im, v.total.im, "im")
    })
}

/// Numerical central retarded part of the unit-prefactor causal
/// distribution at u.
///
/// # Safety
/// Outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn cs_retarded_part_central(u: f64, re: *mut f64, im: *mut f64) -> CsStatus {
    guard(|| {
        let d = as_causal_distribution_dimensionless();
        let r = retarded_part_central(&d, u, BRANCH_EXCLUSION)
            .map_err(|e| Failure::Invalid(e.to_string()))?;
        write(re, r.re, "re")?;
        write(im, r.im, "im")
    })
}
