//! C interface to `worklab`.
//!
//! States and graphs cross the boundary as opaque handles released with
//! their `_free` function. Every fallible call returns a [`WlStatus`]; on
//! failure [`wl_last_error`] describes the most recent error on the calling
//! thread. Outputs are written only on success.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use worklab::ensembles::{graph_state, sample_haar};
use worklab::graphs::{gen_lattice, gen_random_graph, Graph, LatticeKind};
use worklab::locc::{independent_set_protocol, null_protocol, refine_rank_one, subset_protocol, work_of};
use worklab::qstate::{PureState, C64};
use worklab::workbounds::{self, eg_alternating, eg_bruteforce, Certification, EgEstimate, EgOptions};
use worklab::Error;

/// Opaque pure state.
pub struct WlState(PureState);

/// Opaque simple undirected graph.
pub struct WlGraph(Graph);

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    TooLarge = 4,
    InvalidGraph = 5,
    Incompatible = 6,
    Numerical = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WlCertification {
    BruteforceCertified = 0,
    SchmidtExact = 1,
    HeuristicLocalMax = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WlLattice {
    Cycle = 0,
    SquareTorus = 1,
    TriangularTorus = 2,
    Hexagonal = 3,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WlProtocol {
    /// No measurement: `W_Λ = W_local`.
    Null = 0,
    /// Null protocol followed by a rank-one refinement round.
    NullRefined = 1,
    /// Computational basis on every qubit.
    Subset = 2,
    /// Greedy independent set of the supplied graph.
    IndependentSet = 3,
}

/// `E_g` result. Values in nats.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct WlEg {
    pub value: f64,
    /// `N ln d − E_g`, clamped at zero.
    pub w_locc_upper: f64,
    pub certification: WlCertification,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> WlStatus {
    match err {
        Error::DimensionMismatch { .. } | Error::ShapeMismatch(..) | Error::SiteOutOfRange { .. } => {
            WlStatus::DimensionMismatch
        }
        Error::TooLarge(_) => WlStatus::TooLarge,
        Error::InvalidGraph(_) | Error::IncompatibleLattice(_) => WlStatus::InvalidGraph,
        Error::Incompatible(_) => WlStatus::Incompatible,
        Error::IncompleteTree(_) | Error::NotHermitian(_) | Error::MismatchedEstimate(_) => WlStatus::Numerical,
        _ => WlStatus::InvalidArgument,
    }
}

struct Fail(WlStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(WlStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> WlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => WlStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            WlStatus::Panic
        }
    }
}

unsafe fn state_ref<'a>(state: *const WlState) -> Result<&'a PureState, Fail> {
    state.as_ref().map(|s| &s.0).ok_or_else(|| null("state"))
}

unsafe fn graph_ref<'a>(graph: *const WlGraph) -> Result<&'a Graph, Fail> {
    graph.as_ref().map(|g| &g.0).ok_or_else(|| null("graph"))
}

unsafe fn put<T>(out: *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

fn new_state(s: PureState) -> *mut WlState {
    Box::into_raw(Box::new(WlState(s)))
}

fn new_graph(g: Graph) -> *mut WlGraph {
    Box::into_raw(Box::new(WlGraph(g)))
}

fn eg_result(state: &PureState, eg: &EgEstimate) -> Result<WlEg, Fail> {
    let (upper, cert) = workbounds::w_locc_upper(state, eg)?;
    let certification = match cert {
        Certification::BruteforceCertified => WlCertification::BruteforceCertified,
        Certification::SchmidtExact => WlCertification::SchmidtExact,
        Certification::HeuristicLocalMax => WlCertification::HeuristicLocalMax,
    };
    Ok(WlEg { value: eg.value, w_locc_upper: upper, certification })
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn wl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// State from `dim = local_dim^num_sites` amplitudes, little-endian site
/// order. `im` may be null for real amplitudes. The vector is normalized.
///
/// # Safety
/// `re` (and `im` if non-null) must point to `len` readable doubles; `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn wl_state_from_amplitudes(
    re: *const f64,
    im: *const f64,
    len: usize,
    num_sites: usize,
    local_dim: usize,
    out: *mut *mut WlState,
) -> WlStatus {
    guard(|| {
        if re.is_null() {
            return Err(null("re"));
        }
        let re = std::slice::from_raw_parts(re, len);
        let amps: Vec<C64> = if im.is_null() {
            re.iter().map(|&r| C64::new(r, 0.0)).collect()
        } else {
            let im = std::slice::from_raw_parts(im, len);
            re.iter().zip(im).map(|(&r, &i)| C64::new(r, i)).collect()
        };
        let s = worklab::qstate::make_pure(amps, num_sites, local_dim)?;
        put(out, new_state(s))
    })
}

/// Haar-random state of `n` sites of dimension `d`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wl_state_haar(n: usize, d: usize, seed: u64, out: *mut *mut WlState) -> WlStatus {
    guard(|| put(out, new_state(sample_haar(n, d, seed)?)))
}

/// `(|0…0⟩ + … + |d−1…d−1⟩)/√d`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wl_state_ghz(n: usize, d: usize, out: *mut *mut WlState) -> WlStatus {
    guard(|| put(out, new_state(PureState::ghz(n, d)?)))
}

/// Qubit W state.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wl_state_w(n: usize, out: *mut *mut WlState) -> WlStatus {
    guard(|| put(out, new_state(PureState::w_state(n)?)))
}

/// Graph state of `graph`; the graph handle is not consumed.
///
/// # Safety
/// `graph` must be a live handle or null; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wl_state_graph(graph: *const WlGraph, out: *mut *mut WlState) -> WlStatus {
    guard(|| {
        let g = graph_ref(graph)?;
        put(out, new_state(graph_state(g)?))
    })
}

/// # Safety
/// `state` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn wl_state_free(state: *mut WlState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Number of sites, or 0 for a null handle.
///
/// # Safety
/// `state` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn wl_state_num_sites(state: *const WlState) -> usize {
    state.as_ref().map_or(0, |s| s.0.num_sites())
}

/// Hilbert-space dimension, or 0 for a null handle.
///
/// # Safety
/// `state` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn wl_state_dim(state: *const WlState) -> usize {
    state.as_ref().map_or(0, |s| s.0.dim())
}

/// `N ln d`.
///
/// # Safety
/// `state` must be null or a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wl_w_global(state: *const WlState, out: *mut f64) -> WlStatus {
    guard(|| put(out, workbounds::w_global(state_ref(state)?)))
}

/// `N ln d − Σ S(ρ_n)`.
///
/// # Safety
/// `state` must be null or a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wl_w_local(state: *const WlState, out: *mut f64) -> WlStatus {
    guard(|| put(out, workbounds::w_local(state_ref(state)?)))
}

/// Geometric entanglement by alternating optimization over `restarts`
/// random starts. Never certified.
///
/// # Safety
/// `state` must be null or a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wl_eg_alternating(
    state: *const WlState,
    restarts: usize,
    seed: u64,
    out: *mut WlEg,
) -> WlStatus {
    guard(|| {
        let s = state_ref(state)?;
        if restarts == 0 {
            return Err(Fail(WlStatus::InvalidArgument, "restarts must be at least 1".into()));
        }
        let opts = EgOptions { restarts, ..EgOptions::default() };
        let eg = eg_alternating(s, &opts, seed);
        put(out, eg_result(s, &eg)?)
    })
}

/// Grid search for qubit states with `N ≤ 4`. Grids of
/// `WL_CERTIFIED_GRID` points per axis or more are certified.
///
/// # Safety
/// `state` must be null or a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wl_eg_bruteforce(state: *const WlState, grid: usize, out: *mut WlEg) -> WlStatus {
    guard(|| {
        let s = state_ref(state)?;
        if s.local_dim() != 2 || s.num_sites() > 4 {
            return Err(Fail(WlStatus::Incompatible, "bruteforce E_g needs qubits and N ≤ 4".into()));
        }
        let eg = eg_bruteforce(s, grid)?;
        put(out, eg_result(s, &eg)?)
    })
}

/// Smallest grid for which brute-force estimates are certified.
pub const WL_CERTIFIED_GRID: usize = 24;

/// `W_Λ` of a built-in protocol. `graph` is required for
/// `WlProtocol::IndependentSet` and ignored otherwise.
///
/// # Safety
/// `state` and `graph` must be null or live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wl_protocol_work(
    state: *const WlState,
    protocol: WlProtocol,
    graph: *const WlGraph,
    out: *mut f64,
) -> WlStatus {
    guard(|| {
        let s = state_ref(state)?;
        let p = match protocol {
            WlProtocol::Null => null_protocol(s.num_sites(), s.local_dim())?,
            WlProtocol::NullRefined => refine_rank_one(&null_protocol(s.num_sites(), s.local_dim())?, s)?,
            WlProtocol::Subset => subset_protocol(s.num_sites())?,
            WlProtocol::IndependentSet => {
                let g = graph_ref(graph)?;
                if g.num_vertices() != s.num_sites() {
                    return Err(Fail(
                        WlStatus::DimensionMismatch,
                        format!("graph has {} vertices, state has {} sites", g.num_vertices(), s.num_sites()),
                    ));
                }
                independent_set_protocol(g)?
            }
        };
        put(out, work_of(&p, s)?.w_lambda)
    })
}

/// Graph from `num_edges` vertex pairs stored flat in `edges`.
///
/// # Safety
/// `edges` must point to `2 * num_edges` readable values (or be null when
/// `num_edges` is 0); `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wl_graph_from_edges(
    num_vertices: usize,
    edges: *const usize,
    num_edges: usize,
    out: *mut *mut WlGraph,
) -> WlStatus {
    guard(|| {
        let flat: &[usize] = if num_edges == 0 {
            &[]
        } else if edges.is_null() {
            return Err(null("edges"));
        } else {
            std::slice::from_raw_parts(edges, 2 * num_edges)
        };
        let g = Graph::new(num_vertices, flat.chunks_exact(2).map(|e| (e[0], e[1])))?;
        put(out, new_graph(g))
    })
}

/// Periodic lattice. `cols` is ignored for a cycle of `rows` vertices.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wl_graph_lattice(
    kind: WlLattice,
    rows: usize,
    cols: usize,
    out: *mut *mut WlGraph,
) -> WlStatus {
    guard(|| {
        let g = match kind {
            WlLattice::Cycle => gen_lattice(LatticeKind::Cycle, &[rows])?,
            WlLattice::SquareTorus => gen_lattice(LatticeKind::SquareTorus, &[rows, cols])?,
            WlLattice::TriangularTorus => gen_lattice(LatticeKind::TriangularTorus, &[rows, cols])?,
            WlLattice::Hexagonal => gen_lattice(LatticeKind::Hexagonal, &[rows, cols])?,
        };
        put(out, new_graph(g))
    })
}

/// Connected random graph on `n` vertices.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wl_graph_random(n: usize, seed: u64, out: *mut *mut WlGraph) -> WlStatus {
    guard(|| put(out, new_graph(gen_random_graph(n, seed)?)))
}

/// # Safety
/// `graph` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn wl_graph_free(graph: *mut WlGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// # Safety
/// `graph` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn wl_graph_num_vertices(graph: *const WlGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.0.num_vertices())
}

/// # Safety
/// `graph` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn wl_graph_num_edges(graph: *const WlGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.0.num_edges())
}

#[cfg(test)]
mod tests {
    #[test]
    fn certified_grid_matches_core() {
        assert_eq!(super::WL_CERTIFIED_GRID, worklab::workbounds::CERTIFIED_GRID);
    }
}
