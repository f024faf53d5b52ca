//! C ABI for flowfilter.
//!
//! Graphs and filter sets cross the boundary as opaque handles owned by the
//! caller and released with the matching `*_free`. Every fallible call
//! returns an [`FfStatus`]; on failure [`ff_last_error`] describes the
//! problem for the calling thread. Strings returned through out-pointers
//! are heap allocated and must be released with [`ff_string_free`].
//! Big integers are returned as decimal strings.

use std::cell::RefCell;
use std::ffi::{c_char, c_double, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use flowfilter::eval::{max_objective, ratio_of, FR_DIGITS};
use flowfilter::placement::{place, tree_dp, Algorithm, CTree, FilterSet};
use flowfilter::synth::LayeredConfig;
use flowfilter::{
    best_dag, extract_dag_from, layered_graph, parse_edge_list, CGraph, Error, Propagator,
};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum FfStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Cycle = 4,
    NoSource = 5,
    MultipleSources = 6,
    UnknownNode = 7,
    NotCTree = 8,
    BudgetExceeded = 9,
    InvalidConfig = 10,
    RootNotFound = 11,
    EmptyGraph = 12,
    AlreadyFilter = 13,
    IndexOutOfRange = 14,
    Panic = 99,
}

impl From<&Error> for FfStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Parse { .. } | Error::DuplicateEdge { .. } | Error::SelfLoop { .. } => {
                FfStatus::Parse
            }
            Error::EmptyGraph => FfStatus::EmptyGraph,
            Error::UnknownNode(_) => FfStatus::UnknownNode,
            Error::CycleDetected { .. } => FfStatus::Cycle,
            Error::NoSource => FfStatus::NoSource,
            Error::MultipleSources(_) => FfStatus::MultipleSources,
            Error::AlreadyFilter(_) => FfStatus::AlreadyFilter,
            Error::NotACTree(_) => FfStatus::NotCTree,
            Error::BudgetExceeded { .. } => FfStatus::BudgetExceeded,
            Error::RootNotFound(_) => FfStatus::RootNotFound,
            Error::InvalidConfig(_) => FfStatus::InvalidConfig,
        }
    }
}

/// Opaque graph handle.
pub struct FfGraph {
    graph: CGraph,
}

/// Opaque filter set handle. Members are kept by label so a set can be
/// evaluated on any graph containing those labels.
pub struct FfFilterSet {
    labels: Vec<CString>,
    algorithm: Algorithm,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(FfStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(FfStatus::from(&e), e.to_string())
    }
}

type FfResult<T> = Result<T, Failure>;

fn guard(body: impl FnOnce() -> FfResult<()>) -> FfStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            FfStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            FfStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(FfStatus::NullArgument, format!("`{what}` is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> FfResult<&'a str> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(FfStatus::InvalidUtf8, format!("`{what}` is not UTF-8")))
}

unsafe fn opt_str_arg<'a>(p: *const c_char, what: &str) -> FfResult<Option<&'a str>> {
    if p.is_null() {
        Ok(None)
    } else {
        str_arg(p, what).map(Some)
    }
}

unsafe fn graph_arg<'a>(g: *const FfGraph) -> FfResult<&'a CGraph> {
    g.as_ref().map(|h| &h.graph).ok_or_else(|| null("graph"))
}

unsafe fn put<T>(out: *mut T, value: T, what: &str) -> FfResult<()> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn boxed_graph(graph: CGraph) -> *mut FfGraph {
    Box::into_raw(Box::new(FfGraph { graph }))
}

fn c_string(s: String) -> *mut c_char {
    CString::new(s).expect("no interior nul").into_raw()
}

fn filter_handle(g: &CGraph, fs: &FilterSet) -> *mut FfFilterSet {
    let labels = fs
        .labels(g)
        .into_iter()
        .map(|l| CString::new(l).expect("no interior nul"))
        .collect();
    Box::into_raw(Box::new(FfFilterSet {
        labels,
        algorithm: fs.algorithm,
    }))
}

/// Resolve a filter handle against `g`; null means no filters.
unsafe fn members(g: &CGraph, fs: *const FfFilterSet) -> FfResult<FilterSet> {
    let Some(fs) = fs.as_ref() else {
        return Ok(FilterSet::new(Vec::new(), Algorithm::Given, 0));
    };
    let labels: Vec<&str> = fs
        .labels
        .iter()
        .map(|c| c.to_str().expect("built from str"))
        .collect();
    let mut set = FilterSet::from_labels(g, &labels)?;
    set.algorithm = fs.algorithm;
    Ok(set)
}

/// Library version, statically allocated.
#[no_mangle]
pub extern "C" fn ff_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread, or null. Valid until
/// the next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn ff_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Release a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn ff_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parse an edge list. `source` may be null to treat every node without
/// incoming edges as a source.
///
/// # Safety
/// `text` and `source` must be null or nul-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ff_graph_parse(
    text: *const c_char,
    source: *const c_char,
    out: *mut *mut FfGraph,
) -> FfStatus {
    guard(|| {
        let text = str_arg(text, "text")?;
        let source = opt_str_arg(source, "source")?;
        let g = parse_edge_list(text, source)?;
        put(out, boxed_graph(g), "out")
    })
}

/// # Safety
/// `g` must be null or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn ff_graph_free(g: *mut FfGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// # Safety
/// `g` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ff_graph_node_count(g: *const FfGraph) -> usize {
    g.as_ref().map_or(0, |h| h.graph.node_count())
}

/// # Safety
/// `g` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ff_graph_edge_count(g: *const FfGraph) -> usize {
    g.as_ref().map_or(0, |h| h.graph.edge_count())
}

/// Serialize in the edge-list format.
///
/// # Safety
/// `g` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ff_graph_to_edge_list(
    g: *const FfGraph,
    out: *mut *mut c_char,
) -> FfStatus {
    guard(|| {
        let g = graph_arg(g)?;
        put(out, c_string(g.to_edge_list()), "out")
    })
}

/// New graph with one added node feeding every source of `g`.
///
/// # Safety
/// `g` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ff_graph_add_super_source(
    g: *const FfGraph,
    out: *mut *mut FfGraph,
) -> FfStatus {
    guard(|| {
        let g = graph_arg(g)?;
        put(out, boxed_graph(flowfilter::add_super_source(g)?), "out")
    })
}

/// Maximal acyclic subgraph reachable from `root`.
///
/// # Safety
/// `g` must be a live handle, `root` nul-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ff_graph_extract_dag(
    g: *const FfGraph,
    root: *const c_char,
    out: *mut *mut FfGraph,
) -> FfStatus {
    guard(|| {
        let g = graph_arg(g)?;
        let root = str_arg(root, "root")?;
        put(out, boxed_graph(extract_dag_from(g, root)?), "out")
    })
}

/// Largest extraction over all roots. `out_root` may be null.
///
/// # Safety
/// `g` must be a live handle; `out` writable; `out_root` null or writable.
#[no_mangle]
pub unsafe extern "C" fn ff_graph_best_dag(
    g: *const FfGraph,
    out: *mut *mut FfGraph,
    out_root: *mut *mut c_char,
) -> FfStatus {
    guard(|| {
        let g = graph_arg(g)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let (dag, root) = best_dag(g)?;
        if !out_root.is_null() {
            out_root.write(c_string(g.label(root).to_string()));
        }
        put(out, boxed_graph(dag), "out")
    })
}

/// Layered synthetic graph.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ff_generate_layered(
    levels: usize,
    width: usize,
    x: c_double,
    y: c_double,
    seed: u64,
    out: *mut *mut FfGraph,
) -> FfStatus {
    guard(|| {
        let g = layered_graph(&LayeredConfig::new(levels, width, x, y, seed))?;
        put(out, boxed_graph(g), "out")
    })
}

/// Run a selection algorithm by name (`greedy-all`, `tree-dp`, `rand-k`, ...).
///
/// # Safety
/// `g` must be a live handle, `algorithm` nul-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ff_place(
    g: *const FfGraph,
    algorithm: *const c_char,
    k: usize,
    seed: u64,
    out: *mut *mut FfFilterSet,
) -> FfStatus {
    guard(|| {
        let g = graph_arg(g)?;
        let algorithm: Algorithm = str_arg(algorithm, "algorithm")?.parse()?;
        let fs = match algorithm {
            Algorithm::TreeDp => tree_dp(&CTree::certify(g)?, k).filters,
            a => place(g, a, k, seed)?,
        };
        put(out, filter_handle(g, &fs), "out")
    })
}

/// Filter set from `count` labels, each of which must exist in `g`.
///
/// # Safety
/// `labels` must point to `count` nul-terminated strings; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ff_filter_set_from_labels(
    g: *const FfGraph,
    labels: *const *const c_char,
    count: usize,
    out: *mut *mut FfFilterSet,
) -> FfStatus {
    guard(|| {
        let g = graph_arg(g)?;
        if labels.is_null() && count > 0 {
            return Err(null("labels"));
        }
        let mut names = Vec::with_capacity(count);
        for i in 0..count {
            names.push(str_arg(*labels.add(i), "label")?);
        }
        let fs = FilterSet::from_labels(g, &names)?;
        put(out, filter_handle(g, &fs), "out")
    })
}

/// # Safety
/// `fs` must be null or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn ff_filter_set_free(fs: *mut FfFilterSet) {
    if !fs.is_null() {
        drop(Box::from_raw(fs));
    }
}

/// # Safety
/// `fs` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ff_filter_set_len(fs: *const FfFilterSet) -> usize {
    fs.as_ref().map_or(0, |f| f.labels.len())
}

/// Label of member `index` in selection order. The pointer is owned by the
/// set and lives as long as it does.
///
/// # Safety
/// `fs` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ff_filter_set_label(
    fs: *const FfFilterSet,
    index: usize,
    out: *mut *const c_char,
) -> FfStatus {
    guard(|| {
        let fs = fs.as_ref().ok_or_else(|| null("filter set"))?;
        let label = fs.labels.get(index).ok_or_else(|| {
            Failure(
                FfStatus::IndexOutOfRange,
                format!("index {index} out of range for {} filters", fs.labels.len()),
            )
        })?;
        put(out, label.as_ptr(), "out")
    })
}

/// Φ, the total number of receipts with `fs` as filters (null = none), as a
/// decimal string.
///
/// # Safety
/// `g` must be a live handle; `fs` null or live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ff_phi(
    g: *const FfGraph,
    fs: *const FfFilterSet,
    out: *mut *mut c_char,
) -> FfStatus {
    guard(|| {
        let g = graph_arg(g)?;
        let set = members(g, fs)?;
        let p = Propagator::new(g)?;
        put(out, c_string(p.phi(set.nodes()).to_string()), "out")
    })
}

/// F, the receipts removed by `fs`, as a decimal string.
///
/// # Safety
/// `g` must be a live handle; `fs` null or live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ff_objective(
    g: *const FfGraph,
    fs: *const FfFilterSet,
    out: *mut *mut c_char,
) -> FfStatus {
    guard(|| {
        let g = graph_arg(g)?;
        let set = members(g, fs)?;
        let p = Propagator::new(g)?;
        put(out, c_string(p.objective(set.nodes()).to_string()), "out")
    })
}

/// Filter Ratio F(A)/F(V). `out_decimal` receives the exact value rounded
/// to six digits; either out-pointer may be null.
///
/// # Safety
/// `g` must be a live handle; `fs` null or live; out-pointers null or writable.
#[no_mangle]
pub unsafe extern "C" fn ff_filter_ratio(
    g: *const FfGraph,
    fs: *const FfFilterSet,
    out_decimal: *mut *mut c_char,
    out_value: *mut c_double,
) -> FfStatus {
    guard(|| {
        let g = graph_arg(g)?;
        let set = members(g, fs)?;
        let p = Propagator::new(g)?;
        let r = ratio_of(&p.objective(set.nodes()), &max_objective(&p));
        if !out_decimal.is_null() {
            out_decimal.write(c_string(r.to_decimal(FR_DIGITS)));
        }
        if !out_value.is_null() {
            out_value.write(r.to_f64());
        }
        Ok(())
    })
}
