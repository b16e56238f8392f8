//! C ABI over [`consistent_kcenter::Clusterer`].
//!
//! Every function returns a [`CkcStatus`]; on failure a message is kept in
//! thread-local storage and can be read with [`ckc_last_error_message`].
//! Handles are opaque and must be released with [`ckc_clusterer_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use consistent_kcenter::{Clusterer, Error, MetricUniverse, PointId, UpdateEvent};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CkcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    UnknownPoint = 3,
    StateError = 4,
    InputError = 5,
    Internal = 6,
}

/// Opaque clusterer handle.
pub struct CkcClusterer {
    inner: Clusterer,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn fail(status: CkcStatus, msg: impl Into<String>) -> CkcStatus {
    set_error(msg);
    status
}

fn status_of(e: &Error) -> CkcStatus {
    match e {
        Error::Argument(_) => CkcStatus::InvalidArgument,
        Error::Lookup { .. } => CkcStatus::UnknownPoint,
        Error::State(_) => CkcStatus::StateError,
        Error::Input(_) => CkcStatus::InputError,
        Error::Resource(_) => CkcStatus::Internal,
    }
}

fn guard(f: impl FnOnce() -> CkcStatus) -> CkcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(CkcStatus::Internal, "panic inside consistent-kcenter"),
    }
}

unsafe fn handle<'a>(c: *mut CkcClusterer) -> Result<&'a mut Clusterer, CkcStatus> {
    c.as_mut()
        .map(|h| &mut h.inner)
        .ok_or_else(|| fail(CkcStatus::NullPointer, "null clusterer handle"))
}

unsafe fn point_id(id: *const c_char) -> Result<PointId, CkcStatus> {
    if id.is_null() {
        return Err(fail(CkcStatus::NullPointer, "null point id"));
    }
    CStr::from_ptr(id)
        .to_str()
        .map(PointId::from)
        .map_err(|_| fail(CkcStatus::InvalidArgument, "point id is not valid UTF-8"))
}

fn apply(c: &mut Clusterer, event: UpdateEvent, swaps_out: *mut usize) -> CkcStatus {
    match c.apply_update(&event) {
        Ok(out) => {
            if !swaps_out.is_null() {
                // SAFETY: caller passes NULL or a writable size_t
                unsafe { *swaps_out = out.diff.swaps };
            }
            CkcStatus::Ok
        }
        Err(e) => fail(status_of(&e), e.to_string()),
    }
}

/// Create a clusterer over Euclidean space of dimension `dim`, with
/// pairwise distances bounded by `delta`, maintaining `k` centers.
///
/// # Safety
/// `out` must be NULL or point to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn ckc_clusterer_new_euclidean(
    dim: usize,
    delta: u64,
    k: usize,
    out: *mut *mut CkcClusterer,
) -> CkcStatus {
    guard(|| {
        if out.is_null() {
            return fail(CkcStatus::NullPointer, "null output pointer");
        }
        let made = MetricUniverse::euclidean(dim, delta).and_then(|u| Clusterer::new(u, k));
        match made {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(CkcClusterer { inner }));
                CkcStatus::Ok
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

/// # Safety
/// `c` must be NULL or a handle from [`ckc_clusterer_new_euclidean`] that
/// has not been freed.
#[no_mangle]
pub unsafe extern "C" fn ckc_clusterer_free(c: *mut CkcClusterer) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Insert point `id`. `coords` holds `len` values; pass NULL and 0 to
/// re-insert a point whose coordinates are already known. The number of
/// center swaps is written to `swaps_out` unless it is NULL.
///
/// # Safety
/// `c` must be a live handle, `id` a NUL-terminated string, `coords` NULL
/// or valid for `len` reads, `swaps_out` NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn ckc_clusterer_insert(
    c: *mut CkcClusterer,
    id: *const c_char,
    coords: *const f64,
    len: usize,
    swaps_out: *mut usize,
) -> CkcStatus {
    guard(|| {
        let c = match handle(c) {
            Ok(c) => c,
            Err(s) => return s,
        };
        let id = match point_id(id) {
            Ok(id) => id,
            Err(s) => return s,
        };
        let coords = if coords.is_null() {
            if len != 0 {
                return fail(CkcStatus::NullPointer, "null coords with nonzero length");
            }
            None
        } else {
            Some(std::slice::from_raw_parts(coords, len).to_vec())
        };
        apply(c, UpdateEvent::Insert { id, coords }, swaps_out)
    })
}

/// Delete active point `id`.
///
/// # Safety
/// As for [`ckc_clusterer_insert`].
#[no_mangle]
pub unsafe extern "C" fn ckc_clusterer_delete(
    c: *mut CkcClusterer,
    id: *const c_char,
    swaps_out: *mut usize,
) -> CkcStatus {
    guard(|| {
        let c = match handle(c) {
            Ok(c) => c,
            Err(s) => return s,
        };
        match point_id(id) {
            Ok(id) => apply(c, UpdateEvent::Delete { id }, swaps_out),
            Err(s) => s,
        }
    })
}

/// Number of active points.
///
/// # Safety
/// `c` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ckc_clusterer_len(c: *mut CkcClusterer, out: *mut usize) -> CkcStatus {
    guard(|| match handle(c) {
        Ok(_) if out.is_null() => fail(CkcStatus::NullPointer, "null output pointer"),
        Ok(c) => {
            *out = c.triple().len();
            CkcStatus::Ok
        }
        Err(s) => s,
    })
}

/// Largest distance from an active point to its nearest center.
///
/// # Safety
/// `c` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ckc_clusterer_cost(c: *mut CkcClusterer, out: *mut f64) -> CkcStatus {
    guard(|| match handle(c) {
        Ok(_) if out.is_null() => fail(CkcStatus::NullPointer, "null output pointer"),
        Ok(c) => {
            *out = c.current_cost();
            CkcStatus::Ok
        }
        Err(s) => s,
    })
}

/// Current centers as a JSON array of ids sorted by label. Release the
/// string with [`ckc_string_free`].
///
/// # Safety
/// `c` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ckc_clusterer_centers_json(
    c: *mut CkcClusterer,
    out: *mut *mut c_char,
) -> CkcStatus {
    guard(|| match handle(c) {
        Ok(_) if out.is_null() => fail(CkcStatus::NullPointer, "null output pointer"),
        Ok(c) => {
            let json = serde_json::to_string(&c.centers()).expect("ids serialize");
            match CString::new(json) {
                Ok(s) => {
                    *out = s.into_raw();
                    CkcStatus::Ok
                }
                Err(_) => fail(CkcStatus::Internal, "center id contains a NUL byte"),
            }
        }
        Err(s) => s,
    })
}

/// # Safety
/// `s` must be NULL or a string returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn ckc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message for the last failed call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ckc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}
