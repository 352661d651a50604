//! C ABI for `mtl-core`.
//!
//! Objects cross the boundary as opaque handles that the caller frees with
//! the matching `*_free` function. Every fallible call returns an
//! [`MtlStatus`]; on failure `mtl_last_error` describes the cause until the
//! next call on the same thread. Strings returned by the library are freed
//! with [`mtl_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use mtl_core::io::PatchFile;
use mtl_core::valuations::enumerate_basis;
use mtl_core::{BasisDescriptor, MtlError, Polytope, SupportPatch, SymTensor};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MtlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    Degenerate = 4,
    InvalidIndices = 5,
    Parse = 6,
    NumericalFailure = 7,
    Panic = 8,
}

pub const MTL_KIND_PHI: u32 = 0;
pub const MTL_KIND_TILDE3: u32 = 1;
pub const MTL_KIND_TILDE2: u32 = 2;

/// Opaque convex polytope.
pub struct MtlPolytope(Polytope);
/// Opaque support patch.
pub struct MtlPatch(SupportPatch);
/// Opaque symmetric tensor.
pub struct MtlTensor(SymTensor);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &MtlError) -> MtlStatus {
    match e {
        MtlError::DimensionMismatch { .. } | MtlError::ArityMismatch { .. } => MtlStatus::DimensionMismatch,
        MtlError::Degenerate(_) | MtlError::NotAFace => MtlStatus::Degenerate,
        MtlError::InvalidIndices(_) | MtlError::MalformedIndex(_) => MtlStatus::InvalidIndices,
        MtlError::Parse(_) | MtlError::Io(_) => MtlStatus::Parse,
        MtlError::PolytopeDependence { .. }
        | MtlError::RankDeficient { .. }
        | MtlError::IllConditioned { .. }
        | MtlError::InvarianceViolated { .. }
        | MtlError::SampleTooSmall { .. } => MtlStatus::NumericalFailure,
        _ => MtlStatus::InvalidArgument,
    }
}

/// Runs `f`, recording errors and turning panics into [`MtlStatus::Panic`].
fn guard(f: impl FnOnce() -> Result<(), (MtlStatus, String)>) -> MtlStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MtlStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            MtlStatus::Panic
        }
    }
}

fn lib<T>(r: mtl_core::Result<T>) -> Result<T, (MtlStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn non_null<T>(p: *const T, what: &str) -> Result<(), (MtlStatus, String)> {
    if p.is_null() {
        Err((MtlStatus::NullPointer, format!("{what} is null")))
    } else {
        Ok(())
    }
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn mtl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Frees a string returned by the library.
///
/// # Safety
/// `s` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn mtl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Convex hull of `count` points of dimension `dim`, stored row by row.
///
/// # Safety
/// `coords` must point to `count * dim` doubles and `out` to writable storage.
#[no_mangle]
pub unsafe extern "C" fn mtl_polytope_new(
    dim: usize,
    coords: *const f64,
    count: usize,
    out: *mut *mut MtlPolytope,
) -> MtlStatus {
    guard(|| {
        non_null(coords, "coords")?;
        non_null(out, "out")?;
        if dim == 0 || count == 0 {
            return Err((MtlStatus::InvalidArgument, "empty point set".into()));
        }
        let flat = std::slice::from_raw_parts(coords, dim * count);
        let pts: Vec<Vec<f64>> = flat.chunks(dim).map(<[f64]>::to_vec).collect();
        let p = lib(Polytope::new(&pts))?;
        *out = Box::into_raw(Box::new(MtlPolytope(p)));
        Ok(())
    })
}

/// # Safety
/// `p` must be null or a handle from [`mtl_polytope_new`].
#[no_mangle]
pub unsafe extern "C" fn mtl_polytope_free(p: *mut MtlPolytope) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Ambient dimension, or 0 for a null handle.
///
/// # Safety
/// `p` must be null or a live polytope handle.
#[no_mangle]
pub unsafe extern "C" fn mtl_polytope_ambient_dim(p: *const MtlPolytope) -> usize {
    p.as_ref().map_or(0, |p| p.0.ambient_dim())
}

/// Dimension of the affine hull, or 0 for a null handle.
///
/// # Safety
/// `p` must be null or a live polytope handle.
#[no_mangle]
pub unsafe extern "C" fn mtl_polytope_intrinsic_dim(p: *const MtlPolytope) -> usize {
    p.as_ref().map_or(0, |p| p.0.intrinsic_dim())
}

/// Number of faces of dimension `k`.
///
/// # Safety
/// `p` must be null or a live polytope handle.
#[no_mangle]
pub unsafe extern "C" fn mtl_polytope_face_count(p: *const MtlPolytope, k: usize) -> usize {
    p.as_ref().map_or(0, |p| p.0.face_counts().get(k).copied().unwrap_or(0))
}

/// The patch covering all of `R^n x S^{n-1}`.
///
/// # Safety
/// `out` must point to writable storage.
#[no_mangle]
pub unsafe extern "C" fn mtl_patch_all(out: *mut *mut MtlPatch) -> MtlStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = Box::into_raw(Box::new(MtlPatch(SupportPatch::all())));
        Ok(())
    })
}

/// Patch from its JSON file form (`{"patches": [...]}`).
///
/// # Safety
/// `json` must be a nul-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mtl_patch_from_json(json: *const c_char, out: *mut *mut MtlPatch) -> MtlStatus {
    guard(|| {
        non_null(json, "json")?;
        non_null(out, "out")?;
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| (MtlStatus::Parse, e.to_string()))?;
        let file: PatchFile = serde_json::from_str(text).map_err(|e| (MtlStatus::Parse, e.to_string()))?;
        *out = Box::into_raw(Box::new(MtlPatch(lib(file.to_patch())?)));
        Ok(())
    })
}

/// # Safety
/// `p` must be null or a patch handle.
#[no_mangle]
pub unsafe extern "C" fn mtl_patch_free(p: *mut MtlPatch) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

fn descriptor(kind: u32, k: usize, m: usize, r: usize, s: usize, j: usize) -> Result<BasisDescriptor, (MtlStatus, String)> {
    match kind {
        MTL_KIND_PHI => Ok(BasisDescriptor::phi(k, m, r, s, j)),
        MTL_KIND_TILDE3 => Ok(BasisDescriptor::tilde3(m, r, s, j)),
        MTL_KIND_TILDE2 => Ok(BasisDescriptor::tilde2(k, m, r, s)),
        _ => Err((MtlStatus::InvalidArgument, format!("unknown valuation kind {kind}"))),
    }
}

/// Evaluates the basis valuation `Q^m val^{r,s,j}_k` of the given kind.
/// `k` is ignored for tilde3 and `j` for tilde2.
///
/// # Safety
/// `poly` and `patch` must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mtl_valuation_evaluate(
    poly: *const MtlPolytope,
    patch: *const MtlPatch,
    kind: u32,
    k: usize,
    m: usize,
    r: usize,
    s: usize,
    j: usize,
    out: *mut *mut MtlTensor,
) -> MtlStatus {
    guard(|| {
        non_null(poly, "poly")?;
        non_null(patch, "patch")?;
        non_null(out, "out")?;
        let d = descriptor(kind, k, m, r, s, j)?;
        let t = lib(d.evaluate(&(*poly).0, &(*patch).0))?;
        *out = Box::into_raw(Box::new(MtlTensor(t)));
        Ok(())
    })
}

/// # Safety
/// `t` must be null or a tensor handle.
#[no_mangle]
pub unsafe extern "C" fn mtl_tensor_free(t: *mut MtlTensor) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// # Safety
/// `t` must be null or a live tensor handle.
#[no_mangle]
pub unsafe extern "C" fn mtl_tensor_dim(t: *const MtlTensor) -> usize {
    t.as_ref().map_or(0, |t| t.0.dim())
}

/// # Safety
/// `t` must be null or a live tensor handle.
#[no_mangle]
pub unsafe extern "C" fn mtl_tensor_rank(t: *const MtlTensor) -> usize {
    t.as_ref().map_or(0, |t| t.0.rank())
}

/// `T(x_1, ..., x_p)` with the `p = rank` vectors stored row by row in
/// `args` (`rank * dim` doubles).
///
/// # Safety
/// `t` must be a live handle, `args` readable as described, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mtl_tensor_evaluate(t: *const MtlTensor, args: *const f64, out: *mut f64) -> MtlStatus {
    guard(|| {
        non_null(t, "tensor")?;
        non_null(out, "out")?;
        let t = &(*t).0;
        let (n, p) = (t.dim(), t.rank());
        let vectors: Vec<Vec<f64>> = if p == 0 {
            Vec::new()
        } else {
            non_null(args, "args")?;
            std::slice::from_raw_parts(args, n * p).chunks(n).map(<[f64]>::to_vec).collect()
        };
        *out = lib(t.evaluate(&vectors))?;
        Ok(())
    })
}

/// JSON form `{"n", "rank", "coeffs"}` of the tensor; free with
/// [`mtl_string_free`].
///
/// # Safety
/// `t` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mtl_tensor_to_json(t: *const MtlTensor, out: *mut *mut c_char) -> MtlStatus {
    guard(|| {
        non_null(t, "tensor")?;
        non_null(out, "out")?;
        let s = serde_json::to_string(&(*t).0).map_err(|e| (MtlStatus::Parse, e.to_string()))?;
        *out = CString::new(s).expect("JSON has no nul bytes").into_raw();
        Ok(())
    })
}

/// Number of basis valuations of rank `p` in dimension `n`.
#[no_mangle]
pub extern "C" fn mtl_basis_count(n: usize, p: usize) -> usize {
    if n < 2 {
        0
    } else {
        enumerate_basis(n, p).len()
    }
}

/// Numeric rank of the basis on a seeded sample, and the size of the basis.
///
/// # Safety
/// `rank` and `expected` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mtl_independence_rank(
    n: usize,
    p: usize,
    seed: u64,
    rank: *mut usize,
    expected: *mut usize,
) -> MtlStatus {
    guard(|| {
        non_null(rank, "rank")?;
        non_null(expected, "expected")?;
        if !(2..=4).contains(&n) {
            return Err((MtlStatus::InvalidArgument, "n must be 2, 3 or 4".into()));
        }
        let rep = lib(mtl_core::analysis::independence_rank(n, p, seed))?;
        *rank = rep.rank;
        *expected = rep.expected;
        Ok(())
    })
}
