//! C ABI over `noisy-search`.
//!
//! Every fallible function returns an [`NsStatus`]. On failure the message is
//! kept per thread and read with [`ns_last_error_message`]. Handles are opaque
//! and must be released with their matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use noisy_search::harness::{run_experiment, ExperimentConfig, ExperimentResult, Scenario};
use noisy_search::mathcore::{worst_case_budget_graph, worst_case_budget_linear};
use noisy_search::{all_pairs_distances, DistanceMatrix, Error, Graph, GraphGenerator, NoiseParams};

/// Result codes. Zero is success.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Domain = 3,
    Structural = 4,
    Protocol = 5,
    Parse = 6,
    Config = 7,
    Io = 8,
    Serialization = 9,
    OutOfRange = 10,
    Panic = 11,
}

/// A graph together with its distance matrix.
pub struct NsGraph {
    graph: Graph,
    dist: DistanceMatrix,
}

/// A configured experiment and, once run, its result.
pub struct NsExperiment {
    config: ExperimentConfig,
    result: Option<ExperimentResult>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> NsStatus {
    match e {
        Error::Domain(_) => NsStatus::Domain,
        Error::Structural(_) => NsStatus::Structural,
        Error::Protocol(_) => NsStatus::Protocol,
        Error::Parse { .. } => NsStatus::Parse,
        Error::Config { .. } => NsStatus::Config,
        Error::Io { .. } => NsStatus::Io,
        Error::Csv(_) | Error::Json(_) => NsStatus::Serialization,
    }
}

struct Fail(NsStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

impl From<serde_json::Error> for Fail {
    fn from(e: serde_json::Error) -> Self {
        Fail(NsStatus::Serialization, e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(NsStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, converting errors and panics into a status plus message.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> NsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            NsStatus::Ok
        }
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
            NsStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|e| Fail(NsStatus::InvalidUtf8, format!("{what}: {e}")))
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn owned_string(s: String) -> Result<*mut c_char, Fail> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|e| Fail(NsStatus::Serialization, e.to_string()))
}

/// Message for the last failed call on this thread, or null after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn ns_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn ns_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn ns_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Information rate `1 - H(p)` in bits per answer.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ns_info_rate(p: f64, out: *mut f64) -> NsStatus {
    guard(|| write(out, NoiseParams::new(p)?.info_rate(), "out"))
}

/// Fixed query budget of the worst-case graph strategy.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ns_graph_budget(n: usize, p: f64, delta: f64, out: *mut u64) -> NsStatus {
    guard(|| {
        let noise = NoiseParams::new(p)?;
        write(out, worst_case_budget_graph(n, &noise, delta)?.q, "out")
    })
}

/// First-phase query budget of the worst-case binary search.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ns_binary_budget(n: usize, p: f64, delta: f64, c_const: f64, out: *mut u64) -> NsStatus {
    guard(|| {
        let noise = NoiseParams::new(p)?;
        write(out, worst_case_budget_linear(n, &noise, delta, c_const)?.q, "out")
    })
}

/// Builds a graph from a generator name such as `"grid:4x4"` or `"cycle"`.
///
/// # Safety
/// `generator` must be a nul-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ns_graph_generate(generator: *const c_char, n: usize, seed: u64, out: *mut *mut NsGraph) -> NsStatus {
    guard(|| {
        let generator = read_str(generator, "generator")?;
        let graph = generator.parse::<GraphGenerator>()?.build(n, seed)?;
        let dist = all_pairs_distances(&graph);
        write(out, Box::into_raw(Box::new(NsGraph { graph, dist })), "out")
    })
}

/// Number of vertices in `g`.
///
/// # Safety
/// `g` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ns_graph_vertex_count(g: *const NsGraph, out: *mut usize) -> NsStatus {
    guard(|| {
        let g = g.as_ref().ok_or_else(|| null("graph"))?;
        write(out, g.graph.n(), "out")
    })
}

/// Shortest-path distance between `u` and `v`.
///
/// # Safety
/// `g` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ns_graph_distance(g: *const NsGraph, u: usize, v: usize, out: *mut u32) -> NsStatus {
    guard(|| {
        let g = g.as_ref().ok_or_else(|| null("graph"))?;
        let n = g.graph.n();
        if u >= n || v >= n {
            return Err(Fail(NsStatus::OutOfRange, format!("vertex out of range for n = {n}")));
        }
        write(out, g.dist.get(u, v), "out")
    })
}

/// # Safety
/// `g` must come from [`ns_graph_generate`] and not have been freed. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn ns_graph_free(g: *mut NsGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Creates an experiment from a JSON object. `scenario`, `n`, `p`, `delta`
/// are required; every other field of the Rust config is optional and
/// defaults as in `ExperimentConfig::new` (`trials` 1000, `seed` 0).
///
/// # Safety
/// `json` must be a nul-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ns_experiment_new(json: *const c_char, out: *mut *mut NsExperiment) -> NsStatus {
    guard(|| {
        let config = parse_config(read_str(json, "json")?)?;
        let handle = Box::new(NsExperiment { config, result: None });
        write(out, Box::into_raw(handle), "out")
    })
}

fn parse_config(json: &str) -> Result<ExperimentConfig, Fail> {
    let given: serde_json::Value = serde_json::from_str(json)?;
    let given = given
        .as_object()
        .ok_or_else(|| Fail(NsStatus::Config, "config must be a JSON object".into()))?;
    for key in ["scenario", "n", "p", "delta"] {
        if !given.contains_key(key) {
            return Err(Fail(NsStatus::Config, format!("missing field: {key}")));
        }
    }
    let mut merged = serde_json::to_value(ExperimentConfig::new(Scenario::GraphAdversarial, 0, 0.0, 0.0, 1000, 0))?;
    let slots = merged.as_object_mut().expect("config serializes to an object");
    for (k, v) in given {
        if !slots.contains_key(k) {
            return Err(Fail(NsStatus::Config, format!("unknown field: {k}")));
        }
        slots.insert(k.clone(), v.clone());
    }
    Ok(serde_json::from_value(merged)?)
}

/// Runs all trials, replacing any earlier result.
///
/// # Safety
/// `e` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ns_experiment_run(e: *mut NsExperiment) -> NsStatus {
    guard(|| {
        let e = e.as_mut().ok_or_else(|| null("experiment"))?;
        e.result = None;
        e.result = Some(run_experiment(&e.config)?);
        Ok(())
    })
}

unsafe fn finished<'a>(e: *const NsExperiment) -> Result<&'a ExperimentResult, Fail> {
    let e = e.as_ref().ok_or_else(|| null("experiment"))?;
    e.result
        .as_ref()
        .ok_or_else(|| Fail(NsStatus::Config, "experiment has not been run".into()))
}

/// Mean, error rate and bound check of a finished experiment. Any output
/// pointer may be null to skip it.
///
/// # Safety
/// `e` must be a live handle; non-null outputs must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ns_experiment_summary(
    e: *const NsExperiment,
    mean_queries: *mut f64,
    error_rate: *mut f64,
    bound_satisfied: *mut bool,
) -> NsStatus {
    guard(|| {
        let s = &finished(e)?.summary;
        if !mean_queries.is_null() {
            mean_queries.write(s.mean_queries);
        }
        if !error_rate.is_null() {
            error_rate.write(s.error_rate);
        }
        if !bound_satisfied.is_null() {
            bound_satisfied.write(s.bound_satisfied);
        }
        Ok(())
    })
}

/// The full summary row as JSON. Free the string with [`ns_string_free`].
///
/// # Safety
/// `e` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ns_experiment_summary_json(e: *const NsExperiment, out: *mut *mut c_char) -> NsStatus {
    guard(|| {
        let json = serde_json::to_string(&finished(e)?.summary)?;
        write(out, owned_string(json)?, "out")
    })
}

/// # Safety
/// `e` must come from [`ns_experiment_new`] and not have been freed. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn ns_experiment_free(e: *mut NsExperiment) {
    if !e.is_null() {
        drop(Box::from_raw(e));
    }
}
