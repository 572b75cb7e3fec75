//! C interface to `seedmatch`.
//!
//! Every function returns an `int` status (`SM_OK` on success) and writes its
//! result through an out-pointer. Handles are opaque and owned by the caller
//! unless documented as borrowed. After a failed call, `sm_last_error` gives
//! a message for the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use seedmatch::bench::{accuracy, ingest_edge_list};
use seedmatch::synth::{make_correlated_pair, ModelParams};
use seedmatch::theory::bound_report;
use seedmatch::witness::{count_witnesses_explore, count_witnesses_product_with, ProductKernel, WitnessMatrix};
use seedmatch::{matcher, Algorithm, Error, Graph, MatchResult, VertexMapping};

pub const SM_OK: c_int = 0;
/// A required pointer argument was null.
pub const SM_ERR_NULL: c_int = 1;
/// A vertex index was out of range.
pub const SM_ERR_RANGE: c_int = 2;
/// A parameter lies outside its domain.
pub const SM_ERR_DOMAIN: c_int = 3;
pub const SM_ERR_MAPPING: c_int = 4;
pub const SM_ERR_IO: c_int = 5;
pub const SM_ERR_PARSE: c_int = 6;
/// Malformed argument, such as an unknown algorithm name or non-UTF-8 text.
pub const SM_ERR_USAGE: c_int = 7;
/// A Rust panic was caught at the boundary.
pub const SM_ERR_PANIC: c_int = 8;

/// Witness counting routes for [`sm_witness_count`].
pub const SM_WITNESS_AUTO: c_int = 0;
pub const SM_WITNESS_SCATTER: c_int = 1;
pub const SM_WITNESS_BITSET: c_int = 2;
pub const SM_WITNESS_EXPLORE: c_int = 3;

pub struct SmGraph(Graph);

pub struct SmMapping(VertexMapping);

pub struct SmWitness(WitnessMatrix);

pub struct SmInstance {
    g1: SmGraph,
    g2: SmGraph,
    truth: SmMapping,
    seeds: SmMapping,
}

/// Thresholds and bound quantities for one parameter point. Quantities that
/// are undefined at the point are NaN.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct SmBounds {
    pub epsilon: f64,
    pub psi_max: f64,
    pub tau: f64,
    pub x_min_1hop: f64,
    pub y_min_1hop: f64,
    pub l_min: f64,
    pub m_min: f64,
    pub delta_1: f64,
    pub x_max_2hop: f64,
    pub y_max_2hop: f64,
    pub z_max: f64,
    pub beta_req_1hop: f64,
    pub beta_req_2hop: f64,
    pub beta_req_1hop_prior: f64,
    pub beta_req_noisy_seeds: f64,
    pub vacuous_1hop: bool,
    pub vacuous_2hop: bool,
    pub noisy_seeds_window: bool,
    pub epsilon_small: bool,
}

struct Failure(c_int, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::VertexOutOfRange { .. } => SM_ERR_RANGE,
            Error::InvalidMapping(_) => SM_ERR_MAPPING,
            Error::Domain(_) => SM_ERR_DOMAIN,
            Error::Parse { .. } => SM_ERR_PARSE,
            Error::Usage(_) => SM_ERR_USAGE,
            Error::Io { .. } => SM_ERR_IO,
        };
        Failure(code, e.to_string())
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard<F>(f: F) -> c_int
where
    F: FnOnce() -> Result<(), Failure>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SM_OK,
        Ok(Err(Failure(code, msg))) => {
            set_last_error(&msg);
            code
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(&format!("panic: {msg}"));
            SM_ERR_PANIC
        }
    }
}

fn null(name: &str) -> Failure {
    Failure(SM_ERR_NULL, format!("{name} is null"))
}

unsafe fn borrow<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(name))
}

unsafe fn put<T>(out: *mut T, value: T, name: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(name));
    }
    out.write(value);
    Ok(())
}

unsafe fn text<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(name));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(SM_ERR_USAGE, format!("{name} is not UTF-8")))
}

fn boxed<T>(value: T) -> *mut T {
    Box::into_raw(Box::new(value))
}

/// Message for the last failed call on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn sm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Graph on `n` vertices from `edge_count` pairs stored flat in `edges`.
/// Self-loops and repeated edges are dropped.
///
/// # Safety
/// `edges` must point to `2 * edge_count` readable values (it may be null
/// when `edge_count` is 0). `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sm_graph_new(n: usize, edges: *const u32, edge_count: usize, out: *mut *mut SmGraph) -> c_int {
    guard(|| {
        let flat: &[u32] = match edge_count {
            0 => &[],
            _ if edges.is_null() => return Err(null("edges")),
            m => std::slice::from_raw_parts(edges, 2 * m),
        };
        let pairs = flat.chunks_exact(2).map(|e| (e[0] as usize, e[1] as usize));
        let g = Graph::build(n, pairs)?;
        put(out, boxed(SmGraph(g)), "out")
    })
}

/// Reads a whitespace-separated edge list. Vertex ids are assigned in order
/// of first appearance.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sm_graph_load(path: *const c_char, out: *mut *mut SmGraph) -> c_int {
    guard(|| {
        let path = text(path, "path")?;
        let list = ingest_edge_list(Path::new(path))?;
        put(out, boxed(SmGraph(list.graph)), "out")
    })
}

/// # Safety
/// `g` must be a live graph handle or null.
#[no_mangle]
pub unsafe extern "C" fn sm_graph_vertex_count(g: *const SmGraph) -> usize {
    g.as_ref().map_or(0, |g| g.0.vertex_count())
}

/// # Safety
/// `g` must be a live graph handle or null.
#[no_mangle]
pub unsafe extern "C" fn sm_graph_edge_count(g: *const SmGraph) -> usize {
    g.as_ref().map_or(0, |g| g.0.edge_count())
}

/// # Safety
/// `g` must come from `sm_graph_new` or `sm_graph_load` and not be freed
/// twice. Graphs borrowed from an instance must not be passed here.
#[no_mangle]
pub unsafe extern "C" fn sm_graph_free(g: *mut SmGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Partial injective map from `0..len` into `0..codomain_size`; a negative
/// image leaves the vertex unmapped.
///
/// # Safety
/// `images` must point to `len` readable values (or be null when `len` is 0).
#[no_mangle]
pub unsafe extern "C" fn sm_mapping_new(
    images: *const i64,
    len: usize,
    codomain_size: usize,
    out: *mut *mut SmMapping,
) -> c_int {
    guard(|| {
        let images: &[i64] = match len {
            0 => &[],
            _ if images.is_null() => return Err(null("images")),
            m => std::slice::from_raw_parts(images, m),
        };
        let m = VertexMapping::from_images(codomain_size, images.iter().map(|&x| usize::try_from(x).ok()))?;
        put(out, boxed(SmMapping(m)), "out")
    })
}

/// # Safety
/// `m` must be a live mapping handle or null.
#[no_mangle]
pub unsafe extern "C" fn sm_mapping_len(m: *const SmMapping) -> usize {
    m.as_ref().map_or(0, |m| m.0.domain_size())
}

/// # Safety
/// `m` must be a live mapping handle or null.
#[no_mangle]
pub unsafe extern "C" fn sm_mapping_defined_count(m: *const SmMapping) -> usize {
    m.as_ref().map_or(0, |m| m.0.defined_count())
}

/// Image of `u`, or -1 when `u` is unmapped.
///
/// # Safety
/// `m` must be a live mapping handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sm_mapping_get(m: *const SmMapping, u: usize, out: *mut i64) -> c_int {
    guard(|| {
        let m = &borrow(m, "mapping")?.0;
        if u >= m.domain_size() {
            return Err(Failure(SM_ERR_RANGE, format!("vertex {u} outside 0..{}", m.domain_size())));
        }
        put(out, m.get(u).map_or(-1, |v| v as i64), "out")
    })
}

/// # Safety
/// `m` must come from this library, be owned by the caller and not be freed
/// twice.
#[no_mangle]
pub unsafe extern "C" fn sm_mapping_free(m: *mut SmMapping) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Samples a correlated pair with its hidden alignment and seeds. The same
/// arguments always give the same instance.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sm_instance_new(
    n: usize,
    p: f64,
    s: f64,
    beta: f64,
    trial_id: u64,
    out: *mut *mut SmInstance,
) -> c_int {
    guard(|| {
        let params = ModelParams::new(n, p, s, beta)?;
        let inst = make_correlated_pair(&params, trial_id)?;
        let handle = SmInstance {
            g1: SmGraph(inst.g1),
            g2: SmGraph(inst.g2),
            truth: SmMapping(inst.truth),
            seeds: SmMapping(inst.seeds),
        };
        put(out, boxed(handle), "out")
    })
}

/// Borrowed; valid while the instance lives.
///
/// # Safety
/// `inst` must be a live instance handle or null.
#[no_mangle]
pub unsafe extern "C" fn sm_instance_g1(inst: *const SmInstance) -> *const SmGraph {
    inst.as_ref().map_or(ptr::null(), |i| &i.g1)
}

/// # Safety
/// As for [`sm_instance_g1`].
#[no_mangle]
pub unsafe extern "C" fn sm_instance_g2(inst: *const SmInstance) -> *const SmGraph {
    inst.as_ref().map_or(ptr::null(), |i| &i.g2)
}

/// # Safety
/// As for [`sm_instance_g1`].
#[no_mangle]
pub unsafe extern "C" fn sm_instance_truth(inst: *const SmInstance) -> *const SmMapping {
    inst.as_ref().map_or(ptr::null(), |i| &i.truth)
}

/// # Safety
/// As for [`sm_instance_g1`].
#[no_mangle]
pub unsafe extern "C" fn sm_instance_seeds(inst: *const SmInstance) -> *const SmMapping {
    inst.as_ref().map_or(ptr::null(), |i| &i.seeds)
}

/// # Safety
/// `inst` must come from `sm_instance_new` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn sm_instance_free(inst: *mut SmInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// j-hop witness counts between every vertex of `g1` and every vertex of `g2`.
/// `method` is one of the `SM_WITNESS_*` constants.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sm_witness_count(
    g1: *const SmGraph,
    g2: *const SmGraph,
    seeds: *const SmMapping,
    j: usize,
    method: c_int,
    out: *mut *mut SmWitness,
) -> c_int {
    guard(|| {
        let (g1, g2) = (&borrow(g1, "g1")?.0, &borrow(g2, "g2")?.0);
        let seeds = &borrow(seeds, "seeds")?.0;
        let w = match method {
            SM_WITNESS_AUTO => count_witnesses_product_with(g1, g2, seeds, j, ProductKernel::Auto)?,
            SM_WITNESS_SCATTER => count_witnesses_product_with(g1, g2, seeds, j, ProductKernel::Scatter)?,
            SM_WITNESS_BITSET => count_witnesses_product_with(g1, g2, seeds, j, ProductKernel::Bitset)?,
            SM_WITNESS_EXPLORE => count_witnesses_explore(g1, g2, seeds, j)?,
            other => return Err(Failure(SM_ERR_USAGE, format!("unknown witness method {other}"))),
        };
        put(out, boxed(SmWitness(w)), "out")
    })
}

/// # Safety
/// `w` must be a live witness handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sm_witness_get(w: *const SmWitness, u: usize, v: usize, out: *mut u32) -> c_int {
    guard(|| {
        let w = &borrow(w, "witness")?.0;
        if u >= w.rows() || v >= w.cols() {
            return Err(Failure(SM_ERR_RANGE, format!("({u}, {v}) outside {}x{}", w.rows(), w.cols())));
        }
        put(out, w.get(u, v), "out")
    })
}

/// # Safety
/// `w` must come from `sm_witness_count` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn sm_witness_free(w: *mut SmWitness) {
    if !w.is_null() {
        drop(Box::from_raw(w));
    }
}

/// Greedy maximal matching on witness counts, heaviest pairs first.
///
/// # Safety
/// `w` must be a live witness handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sm_gmwm(w: *const SmWitness, out: *mut *mut SmMapping) -> c_int {
    guard(|| {
        let result = matcher::gmwm(&borrow(w, "witness")?.0);
        put(out, boxed(SmMapping(result.mapping)), "out")
    })
}

/// Runs `algorithm` (`one_hop`, `two_hop`, `j_hop:J`, `noisy_seeds:R`,
/// `parallel_argmax[:J]`) for `iterations + 1` rounds. `failure` may be null;
/// otherwise it receives the column-collision flag of the last round.
///
/// # Safety
/// Handles must be live, `algorithm` NUL-terminated and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sm_match(
    g1: *const SmGraph,
    g2: *const SmGraph,
    seeds: *const SmMapping,
    algorithm: *const c_char,
    iterations: usize,
    out: *mut *mut SmMapping,
    failure: *mut bool,
) -> c_int {
    guard(|| {
        let (g1, g2) = (&borrow(g1, "g1")?.0, &borrow(g2, "g2")?.0);
        let seeds = &borrow(seeds, "seeds")?.0;
        let alg = Algorithm::parse(text(algorithm, "algorithm")?)?;
        let result = matcher::iterate(g1, g2, seeds, alg, iterations)?;
        if !failure.is_null() {
            failure.write(result.failure);
        }
        put(out, boxed(SmMapping(result.mapping)), "out")
    })
}

/// Fraction of `truth`'s domain that `mapping` sends to the true image.
///
/// # Safety
/// Handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sm_accuracy(mapping: *const SmMapping, truth: *const SmMapping, out: *mut f64) -> c_int {
    guard(|| {
        let m = borrow(mapping, "mapping")?.0.clone();
        let truth = &borrow(truth, "truth")?.0;
        let result = MatchResult {
            matched_count: m.defined_count(),
            mapping: m,
            failure: false,
        };
        put(out, accuracy(&result, truth, None)?, "out")
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sm_bounds(n: usize, p: f64, s: f64, beta: f64, out: *mut SmBounds) -> c_int {
    guard(|| {
        let r = bound_report(&ModelParams::new(n, p, s, beta)?, None)?;
        let nan = f64::NAN;
        let b = SmBounds {
            epsilon: r.epsilon,
            psi_max: r.psi_max,
            tau: r.tau,
            x_min_1hop: r.x_min_1hop,
            y_min_1hop: r.y_min_1hop,
            l_min: r.l_min.unwrap_or(nan),
            m_min: r.m_min.unwrap_or(nan),
            delta_1: r.delta_1.unwrap_or(nan),
            x_max_2hop: r.x_max_2hop,
            y_max_2hop: r.y_max_2hop.unwrap_or(nan),
            z_max: r.z_max,
            beta_req_1hop: r.beta_req_1hop_ours.value,
            beta_req_2hop: r.beta_req_2hop_ours.value,
            beta_req_1hop_prior: r.beta_req_1hop_prior.value,
            beta_req_noisy_seeds: r.beta_req_noisyseeds.value,
            vacuous_1hop: r.beta_req_1hop_ours.vacuous,
            vacuous_2hop: r.beta_req_2hop_ours.vacuous,
            noisy_seeds_window: r.beta_req_noisyseeds.valid,
            epsilon_small: r.epsilon_small,
        };
        put(out, b, "out")
    })
}
