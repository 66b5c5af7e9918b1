//! C interface to `bisbm`.
//!
//! Graphs and fit results are opaque heap handles released with their
//! `*_free` function. Every call returns a [`BisbmStatus`]; on failure
//! [`bisbm_last_error`] gives a message for the calling thread.
//! Vertex types are passed as bytes, 0 for type a and 1 for type b.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use bisbm::genmodel::Correction;
use bisbm::graph::{BipartiteGraph, Network, Partition, VertexType};
use bisbm::inference::{kl_fit, log_likelihood, FitResult, ModelSpec};
use bisbm::metrics::nmi_labels;
use bisbm::{io, Error};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BisbmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ParseError = 3,
    InvalidGraph = 4,
    InvalidPartition = 5,
    Panic = 6,
}

/// A validated bipartite multigraph.
pub struct BisbmGraph {
    inner: BipartiteGraph,
}

/// The best partition and score of a fit.
pub struct BisbmFit {
    inner: FitResult,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> BisbmStatus {
    match e {
        Error::Parse { .. } | Error::Json(_) | Error::Csv(_) | Error::Io(_) => BisbmStatus::ParseError,
        Error::SameTypeEdge { .. } | Error::SelfLoop(_) | Error::UnknownVertex { .. } | Error::EmptyGraph => {
            BisbmStatus::InvalidGraph
        }
        Error::MixedTypePartition
        | Error::TypeMismatch { .. }
        | Error::AlreadyInGroup { .. }
        | Error::ZeroDegreeGroup(_)
        | Error::LengthMismatch { .. } => BisbmStatus::InvalidPartition,
        _ => BisbmStatus::InvalidArgument,
    }
}

struct Fail(BisbmStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null() -> Fail {
    Fail(BisbmStatus::NullPointer, "null pointer argument".into())
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> BisbmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            BisbmStatus::Ok
        }
        Ok(Err(Fail(s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic".into());
            BisbmStatus::Panic
        }
    }
}

unsafe fn slice<'a, T>(p: *const T, len: usize) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null());
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn text<'a>(p: *const c_char) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null());
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(BisbmStatus::ParseError, "input is not UTF-8".into()))
}

fn vertex_types(t: &[u8]) -> Result<Vec<VertexType>, Fail> {
    t.iter()
        .map(|&b| match b {
            0 => Ok(VertexType::A),
            1 => Ok(VertexType::B),
            _ => Err(Fail(BisbmStatus::InvalidArgument, format!("vertex type {b} is not 0 or 1"))),
        })
        .collect()
}

fn model(bipartite: bool, degree_corrected: bool) -> ModelSpec {
    let c = Correction::from_flag(degree_corrected);
    if bipartite {
        ModelSpec::bipartite(c)
    } else {
        ModelSpec::unipartite(c)
    }
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call on the same thread.
#[no_mangle]
pub extern "C" fn bisbm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Builds a graph from `num_edges` pairs `(src[i], dst[i])`; repeated pairs add multiplicity.
///
/// # Safety
/// `types` must hold `num_vertices` bytes, `src` and `dst` `num_edges` entries each.
#[no_mangle]
pub unsafe extern "C" fn bisbm_graph_new(
    num_vertices: usize,
    types: *const u8,
    num_edges: usize,
    src: *const u32,
    dst: *const u32,
    out: *mut *mut BisbmGraph,
) -> BisbmStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let t = vertex_types(slice(types, num_vertices)?)?;
        let s = slice(src, num_edges)?;
        let d = slice(dst, num_edges)?;
        let g = BipartiteGraph::from_edges(t, s.iter().zip(d).map(|(&u, &v)| (u as usize, v as usize, 1)))?;
        *out = Box::into_raw(Box::new(BisbmGraph { inner: g }));
        Ok(())
    })
}

/// Parses a tab-separated edge list and types file (the CLI formats).
///
/// # Safety
/// Both strings must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn bisbm_graph_parse(
    edges: *const c_char,
    types: *const c_char,
    out: *mut *mut BisbmGraph,
) -> BisbmStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let t = io::parse_types(text(types)?)?;
        let g = io::parse_edge_list(text(edges)?, &t)?;
        *out = Box::into_raw(Box::new(BisbmGraph { inner: g }));
        Ok(())
    })
}

/// # Safety
/// `graph` must come from a graph constructor and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn bisbm_graph_free(graph: *mut BisbmGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// # Safety
/// `graph` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn bisbm_graph_num_vertices(graph: *const BisbmGraph, out: *mut usize) -> BisbmStatus {
    guard(|| {
        let g = graph.as_ref().ok_or_else(null)?;
        *out.as_mut().ok_or_else(null)? = g.inner.num_vertices();
        Ok(())
    })
}

/// Total edge multiplicity.
///
/// # Safety
/// `graph` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn bisbm_graph_num_edges(graph: *const BisbmGraph, out: *mut u64) -> BisbmStatus {
    guard(|| {
        let g = graph.as_ref().ok_or_else(null)?;
        *out.as_mut().ok_or_else(null)? = g.inner.num_edges();
        Ok(())
    })
}

/// Maximum-likelihood fit with `restarts` random starts. Unipartite models
/// use `k_a + k_b` groups.
///
/// # Safety
/// `graph` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn bisbm_fit(
    graph: *const BisbmGraph,
    bipartite: bool,
    degree_corrected: bool,
    k_a: usize,
    k_b: usize,
    restarts: usize,
    seed: u64,
    out: *mut *mut BisbmFit,
) -> BisbmStatus {
    guard(|| {
        let g = graph.as_ref().ok_or_else(null)?;
        if out.is_null() {
            return Err(null());
        }
        let fit = kl_fit(&g.inner, model(bipartite, degree_corrected), k_a, k_b, restarts, seed)?;
        *out = Box::into_raw(Box::new(BisbmFit { inner: fit }));
        Ok(())
    })
}

/// # Safety
/// `fit` must come from [`bisbm_fit`] and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn bisbm_fit_free(fit: *mut BisbmFit) {
    if !fit.is_null() {
        drop(Box::from_raw(fit));
    }
}

/// # Safety
/// `fit` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn bisbm_fit_score(fit: *const BisbmFit, out: *mut f64) -> BisbmStatus {
    guard(|| {
        let f = fit.as_ref().ok_or_else(null)?;
        *out.as_mut().ok_or_else(null)? = f.inner.best_score;
        Ok(())
    })
}

/// Copies the best assignment into `out`, which must hold `len` = number of vertices entries.
///
/// # Safety
/// `fit` must be a live handle and `out` writable for `len` entries.
#[no_mangle]
pub unsafe extern "C" fn bisbm_fit_assignment(fit: *const BisbmFit, out: *mut u32, len: usize) -> BisbmStatus {
    guard(|| {
        let f = fit.as_ref().ok_or_else(null)?;
        let a = f.inner.best_partition.assignment();
        if len != a.len() {
            return Err(Error::LengthMismatch {
                expected: a.len(),
                found: len,
            }
            .into());
        }
        if out.is_null() {
            return Err(null());
        }
        let dst = std::slice::from_raw_parts_mut(out, len);
        for (d, &g) in dst.iter_mut().zip(a) {
            *d = g as u32;
        }
        Ok(())
    })
}

/// Log-likelihood of a partition. For bipartite models groups `0..k_a` are
/// type a and `k_a..k_a + k_b` type b; unipartite models use `k_a + k_b` untyped groups.
///
/// # Safety
/// `graph` must be a live handle and `assignment` hold `len` entries.
#[no_mangle]
pub unsafe extern "C" fn bisbm_log_likelihood(
    graph: *const BisbmGraph,
    assignment: *const u32,
    len: usize,
    k_a: usize,
    k_b: usize,
    bipartite: bool,
    degree_corrected: bool,
    out: *mut f64,
) -> BisbmStatus {
    guard(|| {
        let g = graph.as_ref().ok_or_else(null)?;
        let a: Vec<usize> = slice(assignment, len)?.iter().map(|&x| x as usize).collect();
        let p = if bipartite {
            Partition::typed(a, k_a, k_b)?
        } else {
            Partition::untyped(a, k_a + k_b)?
        };
        let l = log_likelihood(&g.inner, &p, model(bipartite, degree_corrected))?;
        *out.as_mut().ok_or_else(null)? = l;
        Ok(())
    })
}

/// Normalized mutual information of two labelings of `len` items.
///
/// # Safety
/// `x` and `y` must hold `len` entries.
#[no_mangle]
pub unsafe extern "C" fn bisbm_nmi(x: *const u32, y: *const u32, len: usize, out: *mut f64) -> BisbmStatus {
    guard(|| {
        let x: Vec<usize> = slice(x, len)?.iter().map(|&v| v as usize).collect();
        let y: Vec<usize> = slice(y, len)?.iter().map(|&v| v as usize).collect();
        *out.as_mut().ok_or_else(null)? = nmi_labels(&x, &y)?;
        Ok(())
    })
}
