//! C interface over the core toolkit: key exchange series behind an opaque
//! handle, plus stateless entry points for the complement cipher, feature
//! encoding, and walk marginals.
//!
//! Conventions: every fallible function returns a [`QscadaStatus`] and writes
//! results through out-pointers; nothing panics across the boundary; handles
//! from [`qscada_sessions_run`] are released with [`qscada_sessions_free`].
//! The build script regenerates `include/qscada.h` from these signatures.

#![deny(unsafe_op_in_unsafe_fn)]

use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use qscada_core::cipher::{expand_key, transform_slice, Key};
use qscada_core::encoding::build_encoding_circuit;
use qscada_core::qkd::{run_sessions, EvePolicy, EveSchedule, QkdSessionResult, SeriesConfig};
use qscada_core::walk::{build_walk_circuit, node_marginals, Topology};
use qscada_core::Error;

/// Result code for every fallible call. `Ok` is zero so C callers can treat
/// the status as a boolean failure flag.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QscadaStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    IndexOutOfRange = 3,
    BufferTooSmall = 4,
    Io = 5,
    Internal = 6,
}

/// A completed series of key exchange sessions. Opaque to C.
pub struct QscadaSessions {
    runs: Vec<QkdSessionResult>,
}

fn status_of(err: &Error) -> QscadaStatus {
    match err {
        Error::Io(_) => QscadaStatus::Io,
        _ => QscadaStatus::InvalidArgument,
    }
}

// A panic escaping an extern "C" function aborts; trap it instead.
fn guarded(body: impl FnOnce() -> QscadaStatus) -> QscadaStatus {
    catch_unwind(AssertUnwindSafe(body)).unwrap_or(QscadaStatus::Internal)
}

/// Crate version as a static NUL-terminated string. Never null.
#[no_mangle]
pub extern "C" fn qscada_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Static NUL-terminated description of a status code. Never null.
#[no_mangle]
pub extern "C" fn qscada_status_message(status: QscadaStatus) -> *const c_char {
    let text: &'static str = match status {
        QscadaStatus::Ok => "ok\0",
        QscadaStatus::NullPointer => "null pointer argument\0",
        QscadaStatus::InvalidArgument => "invalid argument\0",
        QscadaStatus::IndexOutOfRange => "index out of range\0",
        QscadaStatus::BufferTooSmall => "buffer too small\0",
        QscadaStatus::Io => "i/o error\0",
        QscadaStatus::Internal => "internal error\0",
    };
    text.as_ptr().cast()
}

/// Runs `sessions` key exchange sessions deterministically from `seed`.
/// `eve_prob` is the per-qubit intercept probability; zero disables the
/// eavesdropper entirely. On success `*out` receives a new handle.
///
/// # Safety
/// `out` must be valid for writing one pointer. The handle stored there owns
/// heap memory and must be passed to [`qscada_sessions_free`] exactly once.
#[no_mangle]
pub unsafe extern "C" fn qscada_sessions_run(
    seed: u64,
    sessions: usize,
    raw_bits: usize,
    eve_prob: f64,
    threshold: f64,
    sample_fraction: f64,
    out: *mut *mut QscadaSessions,
) -> QscadaStatus {
    if out.is_null() {
        return QscadaStatus::NullPointer;
    }
    guarded(|| {
        let eve_policy = match EvePolicy::uniform(eve_prob) {
            Ok(policy) => policy,
            Err(err) => return status_of(&err),
        };
        let config = SeriesConfig {
            sessions,
            raw_bits,
            threshold,
            sample_fraction,
            eve_schedule: if eve_policy.is_active() {
                EveSchedule::All
            } else {
                EveSchedule::Off
            },
            eve_policy,
        };
        match run_sessions(&config, seed) {
            Ok(runs) => {
                let handle = Box::into_raw(Box::new(QscadaSessions { runs }));
                unsafe { out.write(handle) };
                QscadaStatus::Ok
            }
            Err(err) => status_of(&err),
        }
    })
}

/// Releases a handle from [`qscada_sessions_run`]. Null is a no-op.
///
/// # Safety
/// `handle` must be null or a not-yet-freed pointer obtained from
/// [`qscada_sessions_run`].
#[no_mangle]
pub unsafe extern "C" fn qscada_sessions_free(handle: *mut QscadaSessions) {
    if !handle.is_null() {
        drop(unsafe { Box::from_raw(handle) });
    }
}

unsafe fn session_at<'a>(
    handle: *const QscadaSessions,
    index: usize,
) -> Result<&'a QkdSessionResult, QscadaStatus> {
    let sessions = unsafe { handle.as_ref() }.ok_or(QscadaStatus::NullPointer)?;
    sessions
        .runs
        .get(index)
        .ok_or(QscadaStatus::IndexOutOfRange)
}

/// Number of sessions held by the handle.
///
/// # Safety
/// `handle` must be a live handle or null; `out` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn qscada_sessions_count(
    handle: *const QscadaSessions,
    out: *mut usize,
) -> QscadaStatus {
    let Some(sessions) = (unsafe { handle.as_ref() }) else {
        return QscadaStatus::NullPointer;
    };
    if out.is_null() {
        return QscadaStatus::NullPointer;
    }
    unsafe { out.write(sessions.runs.len()) };
    QscadaStatus::Ok
}

/// Estimated error rate of one session's disclosed sample.
///
/// # Safety
/// `handle` must be a live handle or null; `out` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn qscada_sessions_qber(
    handle: *const QscadaSessions,
    index: usize,
    out: *mut f64,
) -> QscadaStatus {
    if out.is_null() {
        return QscadaStatus::NullPointer;
    }
    match unsafe { session_at(handle, index) } {
        Ok(session) => {
            unsafe { out.write(session.qber) };
            QscadaStatus::Ok
        }
        Err(status) => status,
    }
}

/// Whether the session's error rate crossed the detection threshold.
///
/// # Safety
/// `handle` must be a live handle or null; `out` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn qscada_sessions_flagged(
    handle: *const QscadaSessions,
    index: usize,
    out: *mut bool,
) -> QscadaStatus {
    if out.is_null() {
        return QscadaStatus::NullPointer;
    }
    match unsafe { session_at(handle, index) } {
        Ok(session) => {
            unsafe { out.write(session.flagged) };
            QscadaStatus::Ok
        }
        Err(status) => status,
    }
}

/// Whether reconciliation converged to matching keys.
///
/// # Safety
/// `handle` must be a live handle or null; `out` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn qscada_sessions_converged(
    handle: *const QscadaSessions,
    index: usize,
    out: *mut bool,
) -> QscadaStatus {
    if out.is_null() {
        return QscadaStatus::NullPointer;
    }
    match unsafe { session_at(handle, index) } {
        Ok(session) => {
            unsafe { out.write(session.converged) };
            QscadaStatus::Ok
        }
        Err(status) => status,
    }
}

/// Parity bits disclosed during reconciliation.
///
/// # Safety
/// `handle` must be a live handle or null; `out` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn qscada_sessions_leaked_bits(
    handle: *const QscadaSessions,
    index: usize,
    out: *mut usize,
) -> QscadaStatus {
    if out.is_null() {
        return QscadaStatus::NullPointer;
    }
    match unsafe { session_at(handle, index) } {
        Ok(session) => {
            unsafe { out.write(session.leaked_bits) };
            QscadaStatus::Ok
        }
        Err(status) => status,
    }
}

/// Length in bits of the session's final key.
///
/// # Safety
/// `handle` must be a live handle or null; `out` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn qscada_sessions_key_len(
    handle: *const QscadaSessions,
    index: usize,
    out: *mut usize,
) -> QscadaStatus {
    if out.is_null() {
        return QscadaStatus::NullPointer;
    }
    match unsafe { session_at(handle, index) } {
        Ok(session) => {
            unsafe { out.write(session.alice_key.len()) };
            QscadaStatus::Ok
        }
        Err(status) => status,
    }
}

/// Copies the session's final key as 0/1 bytes into `buf`, writing the bit
/// count to `written`. Size `buf` with [`qscada_sessions_key_len`].
///
/// # Safety
/// `handle` must be a live handle or null; `buf` must be valid for writing
/// `capacity` bytes; `written` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn qscada_sessions_key_bits(
    handle: *const QscadaSessions,
    index: usize,
    buf: *mut u8,
    capacity: usize,
    written: *mut usize,
) -> QscadaStatus {
    if buf.is_null() || written.is_null() {
        return QscadaStatus::NullPointer;
    }
    let session = match unsafe { session_at(handle, index) } {
        Ok(session) => session,
        Err(status) => return status,
    };
    let key = &session.alice_key;
    if capacity < key.len() {
        return QscadaStatus::BufferTooSmall;
    }
    let buf = unsafe { std::slice::from_raw_parts_mut(buf, key.len()) };
    for (slot, &bit) in buf.iter_mut().zip(key) {
        *slot = u8::from(bit);
    }
    unsafe { written.write(key.len()) };
    QscadaStatus::Ok
}

/// In-place key-controlled complement over `n_values` doubles: positions
/// whose (cyclically expanded) key bit is 1 become `1 - v`. The transform is
/// its own inverse. Key bytes must be 0 or 1.
///
/// # Safety
/// `values` must be valid for reading and writing `n_values` doubles;
/// `key_bits` must be valid for reading `n_key_bits` bytes.
#[no_mangle]
pub unsafe extern "C" fn qscada_transform(
    values: *mut f64,
    n_values: usize,
    key_bits: *const u8,
    n_key_bits: usize,
) -> QscadaStatus {
    if values.is_null() || key_bits.is_null() {
        return QscadaStatus::NullPointer;
    }
    let values = unsafe { std::slice::from_raw_parts_mut(values, n_values) };
    let key_bits = unsafe { std::slice::from_raw_parts(key_bits, n_key_bits) };
    guarded(|| {
        let mut bits = Vec::with_capacity(key_bits.len());
        for &byte in key_bits {
            match byte {
                0 => bits.push(false),
                1 => bits.push(true),
                _ => return QscadaStatus::InvalidArgument,
            }
        }
        let expanded = Key::new(bits)
            .and_then(|key| expand_key(&key, values.len()))
            .and_then(|key| transform_slice(values, &key));
        match expanded {
            Ok(out) => {
                values.copy_from_slice(&out);
                QscadaStatus::Ok
            }
            Err(err) => status_of(&err),
        }
    })
}

/// Encodes `n_features` values in [0, 1] and writes the statevector as
/// interleaved (re, im) pairs in basis order, `2 * 2^n_features` doubles
/// total. `capacity` below that is rejected; excess capacity is left as is.
///
/// # Safety
/// `features` must be valid for reading `n_features` doubles; `amplitudes`
/// must be valid for writing `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn qscada_encode_amplitudes(
    features: *const f64,
    n_features: usize,
    theta_max: f64,
    amplitudes: *mut f64,
    capacity: usize,
) -> QscadaStatus {
    if features.is_null() || amplitudes.is_null() {
        return QscadaStatus::NullPointer;
    }
    let features = unsafe { std::slice::from_raw_parts(features, n_features) };
    guarded(|| {
        let state = match build_encoding_circuit(features, theta_max).and_then(|c| c.run()) {
            Ok(state) => state,
            Err(err) => return status_of(&err),
        };
        let amps = state.amplitudes();
        if capacity < 2 * amps.len() {
            return QscadaStatus::BufferTooSmall;
        }
        let out = unsafe { std::slice::from_raw_parts_mut(amplitudes, 2 * amps.len()) };
        for (pair, amp) in out.chunks_exact_mut(2).zip(amps) {
            pair[0] = amp.re;
            pair[1] = amp.im;
        }
        QscadaStatus::Ok
    })
}

/// Runs `steps` walk steps over the graph and writes one marginal probability
/// per node. `edges` holds `n_edges` (u, v) pairs flattened; it may be null
/// only when `n_edges` is 0. `capacity` must be at least `n_nodes`.
///
/// # Safety
/// `edges` must be valid for reading `2 * n_edges` u32 values (or null with
/// `n_edges` 0); `out` must be valid for writing `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn qscada_walk_marginals(
    n_nodes: usize,
    marked: usize,
    edges: *const u32,
    n_edges: usize,
    steps: usize,
    out: *mut f64,
    capacity: usize,
) -> QscadaStatus {
    if out.is_null() || (edges.is_null() && n_edges > 0) {
        return QscadaStatus::NullPointer;
    }
    if capacity < n_nodes {
        return QscadaStatus::BufferTooSmall;
    }
    let flat = if n_edges == 0 {
        &[][..]
    } else {
        unsafe { std::slice::from_raw_parts(edges, 2 * n_edges) }
    };
    guarded(|| {
        let pairs: Vec<(usize, usize)> = flat
            .chunks_exact(2)
            .map(|pair| (pair[0] as usize, pair[1] as usize))
            .collect();
        let marginals = Topology::new(n_nodes, &pairs, marked)
            .and_then(|topology| build_walk_circuit(&topology, steps))
            .and_then(|circuit| circuit.run())
            .map(|state| node_marginals(&state));
        match marginals {
            Ok(values) => {
                let out = unsafe { std::slice::from_raw_parts_mut(out, values.len()) };
                out.copy_from_slice(&values);
                QscadaStatus::Ok
            }
            Err(err) => status_of(&err),
        }
    })
}
