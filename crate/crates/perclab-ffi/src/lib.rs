//! C ABI surface: opaque handles over the core types, status codes instead
//! of `Result`, and plain structs for certificate data. The generated header
//! lives in `include/perclab.h`.
//!
//! Ownership rules: every `*_new`/`*_sample` output must be released with the
//! matching `*_free`; all other functions borrow their handle arguments.

use std::os::raw::c_char;

use perclab::geometry::{project_level, ProjectionFrame};
use perclab::operator::certify::{certify_a, CertifyOutcome, SearchParams};
use perclab::{sample_tree, PerclabError, ProbabilityMatrix, RealizationTree};

/// Status code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PerclabStatus {
    Ok = 0,
    InvalidArgument = 1,
    NullPointer = 2,
    /// honest negative result (no certificate, empty shadow)
    NotFound = 3,
    ResourceExceeded = 4,
    DomainError = 5,
}

fn status_of(err: &PerclabError) -> PerclabStatus {
    match err {
        PerclabError::ResourceBudget { .. } => PerclabStatus::ResourceExceeded,
        PerclabError::Domain(_) | PerclabError::LevelOutOfRange { .. } => PerclabStatus::DomainError,
        _ => PerclabStatus::InvalidArgument,
    }
}

/// Opaque retention-probability matrix.
pub struct PerclabMatrix(ProbabilityMatrix);

/// Opaque sampled realization.
pub struct PerclabTree(RealizationTree);

/// Certificate data in plain C layout.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct PerclabCertificate {
    pub alpha: f64,
    pub i1_lo: f64,
    pub i1_hi: f64,
    pub i2_lo: f64,
    pub i2_hi: f64,
    pub r: u32,
    pub min_value: f64,
    pub margin: f64,
}

/// Static version string; do not free.
#[no_mangle]
pub extern "C" fn perclab_version() -> *const c_char {
    concat!("perclab ", env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Creates a uniform M x M matrix. On success writes a handle to `out`.
#[no_mangle]
pub extern "C" fn perclab_matrix_new_uniform(
    m: u32,
    p: f64,
    out: *mut *mut PerclabMatrix,
) -> PerclabStatus {
    if out.is_null() {
        return PerclabStatus::NullPointer;
    }
    match ProbabilityMatrix::uniform(m as usize, p) {
        Ok(matrix) => {
            unsafe { *out = Box::into_raw(Box::new(PerclabMatrix(matrix))) };
            PerclabStatus::Ok
        }
        Err(_) => PerclabStatus::InvalidArgument,
    }
}

/// Creates a matrix from `m * m` row-major entries.
///
/// # Safety
/// `entries` must point to at least `len` readable doubles.
#[no_mangle]
pub unsafe extern "C" fn perclab_matrix_new(
    m: u32,
    entries: *const f64,
    len: usize,
    out: *mut *mut PerclabMatrix,
) -> PerclabStatus {
    if out.is_null() || entries.is_null() {
        return PerclabStatus::NullPointer;
    }
    let m = m as usize;
    if len != m * m {
        return PerclabStatus::InvalidArgument;
    }
    let flat = std::slice::from_raw_parts(entries, len);
    let rows: Vec<Vec<f64>> = flat.chunks(m).map(|c| c.to_vec()).collect();
    match ProbabilityMatrix::new(m, rows) {
        Ok(matrix) => {
            *out = Box::into_raw(Box::new(PerclabMatrix(matrix)));
            PerclabStatus::Ok
        }
        Err(_) => PerclabStatus::InvalidArgument,
    }
}

/// # Safety
/// `matrix` must come from a `perclab_matrix_new*` call and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn perclab_matrix_free(matrix: *mut PerclabMatrix) {
    if !matrix.is_null() {
        drop(Box::from_raw(matrix));
    }
}

/// # Safety
/// `matrix` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn perclab_matrix_sum_total(
    matrix: *const PerclabMatrix,
    out: *mut f64,
) -> PerclabStatus {
    if matrix.is_null() || out.is_null() {
        return PerclabStatus::NullPointer;
    }
    *out = (*matrix).0.sum_total();
    PerclabStatus::Ok
}

/// Smallest fixed point of the offspring generating function.
///
/// # Safety
/// `matrix` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn perclab_extinction_probability(
    matrix: *const PerclabMatrix,
    tol: f64,
    out: *mut f64,
) -> PerclabStatus {
    if matrix.is_null() || out.is_null() {
        return PerclabStatus::NullPointer;
    }
    match perclab::branching::extinction_probability(&(*matrix).0, tol) {
        Ok(q) => {
            *out = q;
            PerclabStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// `log(sum p) / log M`; fails outside the supercritical regime.
///
/// # Safety
/// `matrix` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn perclab_theoretical_dimension(
    matrix: *const PerclabMatrix,
    out: *mut f64,
) -> PerclabStatus {
    if matrix.is_null() || out.is_null() {
        return PerclabStatus::NullPointer;
    }
    match perclab::branching::theoretical_dimension(&(*matrix).0) {
        Ok(d) => {
            *out = d;
            PerclabStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Samples a realization to `depth` with the given seed.
///
/// # Safety
/// `matrix` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn perclab_tree_sample(
    matrix: *const PerclabMatrix,
    depth: u32,
    seed: u64,
    out: *mut *mut PerclabTree,
) -> PerclabStatus {
    if matrix.is_null() || out.is_null() {
        return PerclabStatus::NullPointer;
    }
    let tree = sample_tree(&(*matrix).0, depth as usize, seed);
    *out = Box::into_raw(Box::new(PerclabTree(tree)));
    PerclabStatus::Ok
}

/// # Safety
/// `tree` must come from `perclab_tree_sample` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn perclab_tree_free(tree: *mut PerclabTree) {
    if !tree.is_null() {
        drop(Box::from_raw(tree));
    }
}

/// Number of retained squares at level `n`.
///
/// # Safety
/// `tree` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn perclab_tree_level_count(
    tree: *const PerclabTree,
    n: u32,
    out: *mut u64,
) -> PerclabStatus {
    if tree.is_null() || out.is_null() {
        return PerclabStatus::NullPointer;
    }
    match (*tree).0.level_count(n as usize) {
        Ok(c) => {
            *out = c as u64;
            PerclabStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Whether the deepest sampled level is nonempty.
///
/// # Safety
/// `tree` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn perclab_tree_survives(
    tree: *const PerclabTree,
    out: *mut bool,
) -> PerclabStatus {
    if tree.is_null() || out.is_null() {
        return PerclabStatus::NullPointer;
    }
    *out = (*tree).0.survives();
    PerclabStatus::Ok
}

/// Longest interval of the level-`n` shadow in direction `alpha`; `NotFound`
/// when the shadow is empty.
///
/// # Safety
/// `tree` must be a live handle; `out_lo` and `out_hi` must be writable.
#[no_mangle]
pub unsafe extern "C" fn perclab_longest_shadow(
    tree: *const PerclabTree,
    n: u32,
    alpha: f64,
    out_lo: *mut f64,
    out_hi: *mut f64,
) -> PerclabStatus {
    if tree.is_null() || out_lo.is_null() || out_hi.is_null() {
        return PerclabStatus::NullPointer;
    }
    let frame = match ProjectionFrame::from_radians(alpha) {
        Ok(f) => f,
        Err(e) => return status_of(&e),
    };
    match project_level(&(*tree).0, n as usize, &frame) {
        Ok(shadow) => match shadow.longest() {
            Some((lo, hi)) => {
                *out_lo = lo;
                *out_hi = hi;
                PerclabStatus::Ok
            }
            None => PerclabStatus::NotFound,
        },
        Err(e) => status_of(&e),
    }
}

/// Certifies the covering condition at one angle by exact sweep. `Ok` fills
/// the certificate; `NotFound` is the honest negative; `ResourceExceeded`
/// means the code budget stopped the search before `r_max`.
///
/// # Safety
/// `matrix` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn perclab_certify(
    matrix: *const PerclabMatrix,
    alpha: f64,
    r_max: u32,
    budget: u64,
    out: *mut PerclabCertificate,
) -> PerclabStatus {
    if matrix.is_null() || out.is_null() {
        return PerclabStatus::NullPointer;
    }
    let frame = match ProjectionFrame::from_radians(alpha) {
        Ok(f) => f,
        Err(e) => return status_of(&e),
    };
    let search = SearchParams {
        pair: None,
        r_max: r_max as usize,
        budget,
    };
    match certify_a(&(*matrix).0, &frame, &search) {
        Ok(CertifyOutcome::Certified(cert)) => {
            *out = PerclabCertificate {
                alpha: cert.alpha,
                i1_lo: cert.i1.0,
                i1_hi: cert.i1.1,
                i2_lo: cert.i2.0,
                i2_hi: cert.i2.1,
                r: cert.r as u32,
                min_value: cert.min_value,
                margin: cert.margin,
            };
            PerclabStatus::Ok
        }
        Ok(CertifyOutcome::NotFound { .. }) => PerclabStatus::NotFound,
        Err(e) => status_of(&e),
    }
}
