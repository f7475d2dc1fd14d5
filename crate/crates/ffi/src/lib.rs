//! C ABI over the `eonsim` simulator.
//!
//! Every fallible function returns an [`EonsimStatus`]; on failure the
//! message is available from [`eonsim_last_error`] on the same thread.
//! Networks are opaque handles created by `eonsim_network_*` constructors
//! and released with [`eonsim_network_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use eonsim::qop::{self, TimingParams};
use eonsim::{bundled, run_simulation, Algorithm, AlgorithmConfig, Network, NetworkGraph, SimConfig};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EonsimStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Topology = 3,
    Simulation = 4,
    Panic = 5,
}

/// Timing constants in microseconds; mirrors the simulator defaults when
/// obtained from [`eonsim_timing_default`].
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct EonsimTiming {
    pub failure_detection_us: f64,
    pub processing_us: f64,
    pub setup_us: f64,
    pub propagation_us_per_km: f64,
    pub span_km: f64,
}

impl From<EonsimTiming> for TimingParams {
    fn from(t: EonsimTiming) -> Self {
        TimingParams {
            failure_detection_us: t.failure_detection_us,
            processing_us: t.processing_us,
            setup_us: t.setup_us,
            propagation_us_per_km: t.propagation_us_per_km,
            span_km: t.span_km,
        }
    }
}

impl From<TimingParams> for EonsimTiming {
    fn from(t: TimingParams) -> Self {
        EonsimTiming {
            failure_detection_us: t.failure_detection_us,
            processing_us: t.processing_us,
            setup_us: t.setup_us,
            propagation_us_per_km: t.propagation_us_per_km,
            span_km: t.span_km,
        }
    }
}

/// Scalar results of one simulation run.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct EonsimMetrics {
    pub requests: u64,
    pub accepted: u64,
    pub blocked: u64,
    pub static_lightpaths: u64,
    pub bbr: f64,
    pub mean_st_us: f64,
    pub mean_expected_pst_us: f64,
    pub mean_unavailability_us: f64,
    pub mean_optimum_us: f64,
    pub overhead_pct: f64,
}

/// Opaque network handle: topology plus precomputed k-shortest paths.
pub struct EonsimNetwork {
    inner: Network,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

struct Failure(EonsimStatus, String);

fn fail<T>(status: EonsimStatus, msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure(status, msg.into()))
}

/// Runs `f`, recording any error or panic message.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> EonsimStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            EonsimStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal error: {msg}"));
            EonsimStatus::Panic
        }
    }
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return fail(EonsimStatus::NullPointer, format!("{what} is null"));
    }
    CStr::from_ptr(p)
        .to_str()
        .or_else(|_| fail(EonsimStatus::InvalidArgument, format!("{what} is not valid UTF-8")))
}

unsafe fn lengths<'a>(p: *const f64, n: usize, what: &str) -> Result<&'a [f64], Failure> {
    if n == 0 {
        return fail(
            EonsimStatus::InvalidArgument,
            format!("{what} must have at least one hop"),
        );
    }
    if p.is_null() {
        return fail(EonsimStatus::NullPointer, format!("{what} is null"));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

unsafe fn timing(t: *const EonsimTiming) -> TimingParams {
    if t.is_null() {
        TimingParams::default()
    } else {
        (*t).into()
    }
}

unsafe fn store<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return fail(EonsimStatus::NullPointer, "output pointer is null");
    }
    out.write(value);
    Ok(())
}

unsafe fn make_network(
    graph: Result<NetworkGraph, String>,
    k: u32,
    out: *mut *mut EonsimNetwork,
) -> Result<(), Failure> {
    if out.is_null() {
        return fail(EonsimStatus::NullPointer, "output pointer is null");
    }
    if k == 0 {
        return fail(EonsimStatus::InvalidArgument, "k must be at least 1");
    }
    let graph = graph.or_else(|e| fail(EonsimStatus::Topology, e))?;
    let inner = Network::new(graph, k as usize, TimingParams::default());
    out.write(Box::into_raw(Box::new(EonsimNetwork { inner })));
    Ok(())
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn eonsim_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

#[no_mangle]
pub extern "C" fn eonsim_timing_default() -> EonsimTiming {
    TimingParams::default().into()
}

/// Builds a network from topology JSON text.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn eonsim_network_from_json(
    json: *const c_char,
    k: u32,
    out: *mut *mut EonsimNetwork,
) -> EonsimStatus {
    guard(|| {
        let text = c_str(json, "json")?;
        make_network(NetworkGraph::from_json_str(text).map_err(|e| e.to_string()), k, out)
    })
}

/// Builds a network from a bundled topology (`usanet` or `paneuro`).
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn eonsim_network_bundled(
    name: *const c_char,
    k: u32,
    out: *mut *mut EonsimNetwork,
) -> EonsimStatus {
    guard(|| {
        let name = c_str(name, "name")?;
        let graph = match bundled::load(name) {
            Some(g) => g.map_err(|e| e.to_string()),
            None => Err(format!("unknown bundled topology `{name}`")),
        };
        make_network(graph, k, out)
    })
}

/// Releases a handle; null is ignored.
///
/// # Safety
/// `net` must come from an `eonsim_network_*` constructor and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn eonsim_network_free(net: *mut EonsimNetwork) {
    if !net.is_null() {
        drop(Box::from_raw(net));
    }
}

/// Node count, or 0 for a null handle.
///
/// # Safety
/// `net` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn eonsim_network_node_count(net: *const EonsimNetwork) -> usize {
    net.as_ref().map_or(0, |n| n.inner.graph.node_count())
}

/// Link count, or 0 for a null handle.
///
/// # Safety
/// `net` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn eonsim_network_link_count(net: *const EonsimNetwork) -> usize {
    net.as_ref().map_or(0, |n| n.inner.graph.link_count())
}

/// Runs one replication of `algorithm` (for example `preprovDLP-provDPP`).
///
/// # Safety
/// `net` must be a live handle, `algorithm` a NUL-terminated string and
/// `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn eonsim_run(
    net: *const EonsimNetwork,
    algorithm: *const c_char,
    preprov_bw: f64,
    load: f64,
    requests: u64,
    seed: u64,
    out: *mut EonsimMetrics,
) -> EonsimStatus {
    guard(|| {
        let Some(net) = net.as_ref() else {
            return fail(EonsimStatus::NullPointer, "network is null");
        };
        let algorithm: Algorithm = c_str(algorithm, "algorithm")?
            .parse()
            .or_else(|e| fail(EonsimStatus::InvalidArgument, e))?;
        let alg = AlgorithmConfig::new(algorithm, preprov_bw, net.inner.kpaths.k())
            .or_else(|e| fail(EonsimStatus::InvalidArgument, e.to_string()))?;
        let cfg = SimConfig::new(alg, load, requests as usize);
        let m = run_simulation(&net.inner, &cfg, seed).or_else(|e| fail(EonsimStatus::Simulation, e.to_string()))?;
        store(
            out,
            EonsimMetrics {
                requests: m.requests as u64,
                accepted: m.accepted as u64,
                blocked: m.blocked as u64,
                static_lightpaths: m.static_lightpaths as u64,
                bbr: m.bbr,
                mean_st_us: m.mean_st_us,
                mean_expected_pst_us: m.mean_expected_pst_us,
                mean_unavailability_us: m.mean_unavailability_us,
                mean_optimum_us: m.mean_optimum_us,
                overhead_pct: m.overhead_pct,
            },
        )
    })
}

/// Setup time of a new path from its per-hop lengths in km. A null
/// `timing` selects the defaults.
///
/// # Safety
/// `hops_km` must point to `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eonsim_st_primary(
    hops_km: *const f64,
    n: usize,
    timing_params: *const EonsimTiming,
    out: *mut f64,
) -> EonsimStatus {
    guard(|| {
        let hops = lengths(hops_km, n, "hops_km")?;
        let v = qop::st_primary(hops, &timing(timing_params))
            .or_else(|e| fail(EonsimStatus::InvalidArgument, e.to_string()))?;
        store(out, v)
    })
}

/// Switching time of dedicated path protection when hop `failed_hop`
/// (0-based) of the primary fails.
///
/// # Safety
/// `primary_km` must point to `n` doubles, `backup_km` to `m`; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eonsim_pst_dpp(
    primary_km: *const f64,
    n: usize,
    backup_km: *const f64,
    m: usize,
    failed_hop: usize,
    timing_params: *const EonsimTiming,
    out: *mut f64,
) -> EonsimStatus {
    guard(|| {
        let p = lengths(primary_km, n, "primary_km")?;
        let b = lengths(backup_km, m, "backup_km")?;
        if failed_hop >= n {
            return fail(
                EonsimStatus::InvalidArgument,
                format!("failed_hop {failed_hop} outside a {n}-hop path"),
            );
        }
        let v = qop::pst_dpp(p, b, failed_hop, &timing(timing_params))
            .or_else(|e| fail(EonsimStatus::InvalidArgument, e.to_string()))?;
        store(out, v)
    })
}

/// Switching time of dedicated link protection over a detour of `m` hops.
///
/// # Safety
/// `backup_km` must point to `m` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eonsim_pst_dlp(
    backup_km: *const f64,
    m: usize,
    timing_params: *const EonsimTiming,
    out: *mut f64,
) -> EonsimStatus {
    guard(|| {
        let b = lengths(backup_km, m, "backup_km")?;
        let v =
            qop::pst_dlp(b, &timing(timing_params)).or_else(|e| fail(EonsimStatus::InvalidArgument, e.to_string()))?;
        store(out, v)
    })
}

/// Switching time of shared protection over a p-cycle arc.
///
/// # Safety
/// `primary_km` must point to `n` doubles, `arc_km` to `m`; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eonsim_pst_spp(
    primary_km: *const f64,
    n: usize,
    arc_km: *const f64,
    m: usize,
    failed_hop: usize,
    timing_params: *const EonsimTiming,
    out: *mut f64,
) -> EonsimStatus {
    guard(|| {
        let p = lengths(primary_km, n, "primary_km")?;
        let a = lengths(arc_km, m, "arc_km")?;
        if failed_hop >= n {
            return fail(
                EonsimStatus::InvalidArgument,
                format!("failed_hop {failed_hop} outside a {n}-hop path"),
            );
        }
        let v = qop::pst_spp(p, a, failed_hop, &timing(timing_params))
            .or_else(|e| fail(EonsimStatus::InvalidArgument, e.to_string()))?;
        store(out, v)
    })
}

/// Name of the algorithm at `index` as accepted by [`eonsim_run`], or null
/// past the end.
#[no_mangle]
pub extern "C" fn eonsim_algorithm_name(index: usize) -> *const c_char {
    static NAMES: std::sync::OnceLock<Vec<CString>> = std::sync::OnceLock::new();
    let names = NAMES.get_or_init(|| {
        Algorithm::ALL
            .iter()
            .map(|a| CString::new(a.to_string()).expect("names have no NUL"))
            .collect()
    });
    names.get(index).map_or(ptr::null(), |n| n.as_ptr())
}
