//! C ABI over the `nonadditive` crate.
//!
//! Objects cross the boundary as opaque handles built from the same JSON the CLI reads.
//! Every call returns an [`NaStatus`]; on failure [`na_last_error`] describes what went
//! wrong. Exact values come back as `"p/q"` strings owned by the caller and released with
//! [`na_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use nonadditive::capacity::{check_convex, check_null_additive, Capacity, ProbabilityMeasure, PropertyReport};
use nonadditive::induced::induce;
use nonadditive::integrals::{balanced_cover, choquet_integral, concave_integral, psa_integral, SimpleFunction};
use nonadditive::sets::Partition;
use nonadditive::{io, rational, Error};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NaStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Invalid = 4,
    Mismatch = 5,
    Internal = 6,
}

pub struct NaCapacity(Capacity);
pub struct NaMeasure(ProbabilityMeasure);
pub struct NaPartition(Partition);
pub struct NaFunction(SimpleFunction);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("interior nuls replaced");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> NaStatus {
    match e {
        Error::Json(_) | Error::Format(_) | Error::BadRational(_) => NaStatus::Parse,
        Error::SpaceMismatch { .. } | Error::TableSize { .. } | Error::MaskOutOfRange { .. } => NaStatus::Mismatch,
        _ => NaStatus::Invalid,
    }
}

/// Runs `body`, recording errors and turning panics into `Internal`.
fn guard(body: impl FnOnce() -> Result<(), (NaStatus, String)>) -> NaStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            NaStatus::Ok
        }
        Ok(Err((status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            NaStatus::Internal
        }
    }
}

fn lib(e: Error) -> (NaStatus, String) {
    (status_of(&e), e.to_string())
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, (NaStatus, String)> {
    if s.is_null() {
        return Err((NaStatus::NullPointer, "null string".into()));
    }
    CStr::from_ptr(s).to_str().map_err(|e| (NaStatus::InvalidUtf8, e.to_string()))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, (NaStatus, String)> {
    p.as_ref().ok_or_else(|| (NaStatus::NullPointer, format!("null {what} handle")))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), (NaStatus, String)> {
    if out.is_null() {
        return Err((NaStatus::NullPointer, "null out pointer".into()));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), (NaStatus, String)> {
    if out.is_null() {
        return Err((NaStatus::NullPointer, "null out pointer".into()));
    }
    *out = CString::new(s).expect("no interior nul").into_raw();
    Ok(())
}

fn json(text: &str) -> Result<serde_json::Value, (NaStatus, String)> {
    io::parse_json(text).map_err(lib)
}

/// Message for the last failed call on this thread, or null. Valid until the next call.
#[no_mangle]
pub extern "C" fn na_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn na_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

unsafe fn parse_into<T, H>(
    json_text: *const c_char,
    out: *mut *mut H,
    parse: impl FnOnce(&serde_json::Value) -> nonadditive::Result<T>,
    wrap: impl FnOnce(T) -> H,
) -> NaStatus {
    guard(|| {
        let v = json(read_str(json_text)?)?;
        put(out, wrap(parse(&v).map_err(lib)?))
    })
}

unsafe fn free<H>(h: *mut H) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Parses a capacity handle from its JSON encoding.
///
/// # Safety
/// `json_text` must be a valid C string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn na_capacity_from_json(json_text: *const c_char, out: *mut *mut NaCapacity) -> NaStatus {
    parse_into(json_text, out, io::capacity_from_json, NaCapacity)
}

/// Releases a capacity handle. Null is ignored.
///
/// # Safety
/// `h` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn na_capacity_free(h: *mut NaCapacity) {
    free(h)
}

/// Parses a measure handle from its JSON encoding.
///
/// # Safety
/// `json_text` must be a valid C string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn na_measure_from_json(json_text: *const c_char, out: *mut *mut NaMeasure) -> NaStatus {
    parse_into(json_text, out, io::measure_from_json, NaMeasure)
}

/// Releases a measure handle. Null is ignored.
///
/// # Safety
/// `h` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn na_measure_free(h: *mut NaMeasure) {
    free(h)
}

/// Parses a partition handle from its JSON encoding.
///
/// # Safety
/// `json_text` must be a valid C string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn na_partition_from_json(json_text: *const c_char, out: *mut *mut NaPartition) -> NaStatus {
    parse_into(json_text, out, io::partition_from_json, NaPartition)
}

/// Releases a partition handle. Null is ignored.
///
/// # Safety
/// `h` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn na_partition_free(h: *mut NaPartition) {
    free(h)
}

/// Parses a function handle from its JSON encoding.
///
/// # Safety
/// `json_text` must be a valid C string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn na_function_from_json(json_text: *const c_char, out: *mut *mut NaFunction) -> NaStatus {
    parse_into(json_text, out, io::function_from_json, NaFunction)
}

/// Releases a function handle. Null is ignored.
///
/// # Safety
/// `h` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn na_function_free(h: *mut NaFunction) {
    free(h)
}

/// Capacity JSON for a handle.
///
/// # Safety
/// `v` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn na_capacity_to_json(v: *const NaCapacity, out: *mut *mut c_char) -> NaStatus {
    guard(|| {
        let v = deref(v, "capacity")?;
        put_string(out, io::capacity_to_json(&v.0).to_string())
    })
}

/// `v(F)` for the subset with bitmask `mask`, as `"p/q"`.
///
/// # Safety
/// `v` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn na_capacity_value(v: *const NaCapacity, mask: u64, out: *mut *mut c_char) -> NaStatus {
    guard(|| {
        let v = deref(v, "capacity")?;
        let set = v.0.space().mask(mask).map_err(lib)?;
        put_string(out, rational::format(v.0.value(set)))
    })
}

/// Choquet integral of `f` with respect to `v`, as `"p/q"`.
///
/// # Safety
/// Handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn na_choquet(v: *const NaCapacity, f: *const NaFunction, out: *mut *mut c_char) -> NaStatus {
    guard(|| {
        let r = choquet_integral(&deref(f, "function")?.0, &deref(v, "capacity")?.0).map_err(lib)?;
        put_string(out, rational::format(&r.value))
    })
}

/// Concave integral of `f` with respect to `v`, as `"p/q"`.
///
/// # Safety
/// Handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn na_concave(v: *const NaCapacity, f: *const NaFunction, out: *mut *mut c_char) -> NaStatus {
    guard(|| {
        let r = concave_integral(&deref(f, "function")?.0, &deref(v, "capacity")?.0).map_err(lib)?;
        put_string(out, rational::format(&r.value))
    })
}

/// `Σ_blocks (min_block f) P(block)`, as `"p/q"`.
///
/// # Safety
/// Handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn na_psa(
    p: *const NaMeasure,
    partition: *const NaPartition,
    f: *const NaFunction,
    out: *mut *mut c_char,
) -> NaStatus {
    guard(|| {
        let r = psa_integral(&deref(f, "function")?.0, &deref(p, "measure")?.0, &deref(partition, "partition")?.0)
            .map_err(lib)?;
        put_string(out, rational::format(&r.value))
    })
}

/// The totally balanced cover of `v` as a new handle.
///
/// # Safety
/// `v` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn na_balanced_cover(v: *const NaCapacity, out: *mut *mut NaCapacity) -> NaStatus {
    guard(|| put(out, NaCapacity(balanced_cover(&deref(v, "capacity")?.0).map_err(lib)?)))
}

/// The capacity induced by `p` on the algebra generated by `partition`.
///
/// # Safety
/// Handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn na_induce(
    p: *const NaMeasure,
    partition: *const NaPartition,
    out: *mut *mut NaCapacity,
) -> NaStatus {
    guard(|| {
        let ic = induce(&deref(p, "measure")?.0, &deref(partition, "partition")?.0).map_err(lib)?;
        put(out, NaCapacity(ic.capacity().clone()))
    })
}

unsafe fn report_out(
    report: PropertyReport,
    holds: *mut bool,
    witness_json: *mut *mut c_char,
) -> Result<(), (NaStatus, String)> {
    if holds.is_null() {
        return Err((NaStatus::NullPointer, "null out pointer".into()));
    }
    *holds = report.holds;
    if !witness_json.is_null() {
        *witness_json = match &report.witness {
            Some(w) => CString::new(serde_json::to_string(w).expect("witnesses serialize"))
                .expect("no interior nul")
                .into_raw(),
            None => ptr::null_mut(),
        };
    }
    Ok(())
}

/// Convexity verdict. When `witness_json` is non-null it receives the violating pair as JSON,
/// or null when convex.
///
/// # Safety
/// `v` must be a live handle and `holds` writable.
#[no_mangle]
pub unsafe extern "C" fn na_check_convex(
    v: *const NaCapacity,
    holds: *mut bool,
    witness_json: *mut *mut c_char,
) -> NaStatus {
    guard(|| report_out(check_convex(&deref(v, "capacity")?.0), holds, witness_json))
}

/// Null-additivity verdict, with the same witness convention as [`na_check_convex`].
///
/// # Safety
/// `v` must be a live handle and `holds` writable.
#[no_mangle]
pub unsafe extern "C" fn na_check_null_additive(
    v: *const NaCapacity,
    holds: *mut bool,
    witness_json: *mut *mut c_char,
) -> NaStatus {
    guard(|| report_out(check_null_additive(&deref(v, "capacity")?.0), holds, witness_json))
}
