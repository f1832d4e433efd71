//! C ABI for cvtel.
//!
//! Handles are opaque and owned by the caller: every `*_new`/`*_run` result must be
//! released with the matching `*_free`. Functions return a [`CvtelStatus`]; on failure a
//! message is kept per thread and can be read with [`cvtel_last_error_message`].
//! No function unwinds across the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use cvtel::algebra::{CircuitState, ModeId, Orientation, Quadrature, RecordId};
use cvtel::protocols::{self, OpticalCzSpec, Protocol, ProtocolReport};
use cvtel::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CvtelStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    DeadMode = 3,
    SameMode = 4,
    DuplicateSignal = 5,
    ForeignRecord = 6,
    TargetsNotEliminable = 7,
    LeftoverRecord = 8,
    MissingVariance = 9,
    ConstructionMismatch = 10,
    NoRoot = 11,
    Panic = 12,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CvtelOrientation {
    /// `y` squeezed, `x` antisqueezed.
    YSqueezed = 0,
    XSqueezed = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CvtelQuadrature {
    X = 0,
    Y = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CvtelProtocolKind {
    Bs = 0,
    Czcz = 1,
    Hybrid = 2,
    CzczOptical = 3,
    HybridOptical = 4,
}

/// Protocol parameters; fields a protocol does not use are ignored.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CvtelProtocolParams {
    pub kind: CvtelProtocolKind,
    pub r: f64,
    pub g1: f64,
    pub g2: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub reflectivity: f64,
}

/// The vacuum quadrature `quadrature` introduced with mode `mode`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CvtelVacuumSymbol {
    pub mode: usize,
    pub quadrature: CvtelQuadrature,
}

/// Opaque circuit state.
pub struct CvtelState {
    inner: CircuitState,
}

/// Opaque protocol report.
pub struct CvtelReport {
    inner: ProtocolReport,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(err: &Error) -> CvtelStatus {
    match err {
        Error::InvalidParameter { .. } => CvtelStatus::InvalidParameter,
        Error::DeadMode(_) => CvtelStatus::DeadMode,
        Error::SameMode(_) => CvtelStatus::SameMode,
        Error::DuplicateSignal => CvtelStatus::DuplicateSignal,
        Error::ForeignRecord(_) => CvtelStatus::ForeignRecord,
        Error::TargetsNotEliminable(_) => CvtelStatus::TargetsNotEliminable,
        Error::LeftoverRecord(_) => CvtelStatus::LeftoverRecord,
        Error::MissingVariance(_) => CvtelStatus::MissingVariance,
        Error::ConstructionMismatch(_) => CvtelStatus::ConstructionMismatch,
        Error::NoRoot(_) => CvtelStatus::NoRoot,
    }
}

fn guard(f: impl FnOnce() -> Result<(), CvtelStatus>) -> CvtelStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CvtelStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic".into());
            CvtelStatus::Panic
        }
    }
}

fn fail(err: Error) -> CvtelStatus {
    let s = status_of(&err);
    set_error(err.to_string());
    s
}

fn null(what: &str) -> CvtelStatus {
    set_error(format!("null pointer: {what}"));
    CvtelStatus::NullPointer
}

unsafe fn state_mut<'a>(p: *mut CvtelState) -> Result<&'a mut CircuitState, CvtelStatus> {
    p.as_mut().map(|s| &mut s.inner).ok_or_else(|| null("state"))
}

unsafe fn state_ref<'a>(p: *const CvtelState) -> Result<&'a CircuitState, CvtelStatus> {
    p.as_ref().map(|s| &s.inner).ok_or_else(|| null("state"))
}

unsafe fn report_ref<'a>(p: *const CvtelReport) -> Result<&'a ProtocolReport, CvtelStatus> {
    p.as_ref().map(|r| &r.inner).ok_or_else(|| null("report"))
}

unsafe fn write<T>(out: *mut T, v: T, what: &str) -> Result<(), CvtelStatus> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(v);
    Ok(())
}

/// Message of the last failed call on this thread, or NULL. Valid until the next call.
#[no_mangle]
pub extern "C" fn cvtel_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Static version string.
#[no_mangle]
pub extern "C" fn cvtel_version() -> *const c_char {
    static V: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(c) => c,
        Err(_) => panic!("version string"),
    };
    V.as_ptr()
}

#[no_mangle]
pub extern "C" fn cvtel_state_new() -> *mut CvtelState {
    Box::into_raw(Box::new(CvtelState {
        inner: CircuitState::new(),
    }))
}

/// # Safety
/// `state` must come from [`cvtel_state_new`] and not be used afterwards. NULL is a no-op.
#[no_mangle]
pub unsafe extern "C" fn cvtel_state_free(state: *mut CvtelState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// # Safety
/// `state` must be a live handle and `out_mode` writable.
#[no_mangle]
pub unsafe extern "C" fn cvtel_state_add_squeezed(
    state: *mut CvtelState,
    r: f64,
    orientation: CvtelOrientation,
    out_mode: *mut usize,
) -> CvtelStatus {
    guard(|| {
        let st = state_mut(state)?;
        let o = match orientation {
            CvtelOrientation::YSqueezed => Orientation::YSqueezed,
            CvtelOrientation::XSqueezed => Orientation::XSqueezed,
        };
        let m = st.add_squeezed_mode(r, o).map_err(fail)?;
        write(out_mode, m.0, "out_mode")
    })
}

/// # Safety
/// `state` must be a live handle and `out_mode` writable.
#[no_mangle]
pub unsafe extern "C" fn cvtel_state_add_signal(state: *mut CvtelState, out_mode: *mut usize) -> CvtelStatus {
    guard(|| {
        let st = state_mut(state)?;
        let m = st.add_signal_mode().map_err(fail)?;
        write(out_mode, m.0, "out_mode")
    })
}

/// # Safety
/// `state` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cvtel_state_phase_rotation(state: *mut CvtelState, mode: usize, theta: f64) -> CvtelStatus {
    guard(|| state_mut(state)?.apply_phase_rotation(ModeId(mode), theta).map_err(fail))
}

/// # Safety
/// `state` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cvtel_state_beamsplitter(
    state: *mut CvtelState,
    i: usize,
    j: usize,
    reflectivity: f64,
) -> CvtelStatus {
    guard(|| {
        state_mut(state)?
            .apply_beamsplitter(ModeId(i), ModeId(j), reflectivity)
            .map_err(fail)
    })
}

/// # Safety
/// `state` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cvtel_state_cz(state: *mut CvtelState, i: usize, j: usize, weight: f64) -> CvtelStatus {
    guard(|| state_mut(state)?.apply_cz(ModeId(i), ModeId(j), weight).map_err(fail))
}

/// Closed-form optical CZ with reflectivity `reflectivity` and ancilla squeezing `r`.
///
/// # Safety
/// `state` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cvtel_state_optical_cz(
    state: *mut CvtelState,
    i: usize,
    j: usize,
    reflectivity: f64,
    r: f64,
) -> CvtelStatus {
    guard(|| {
        let st = state_mut(state)?;
        let spec = OpticalCzSpec::new(reflectivity, r).map_err(fail)?;
        protocols::apply_optical_cz(st, ModeId(i), ModeId(j), &spec).map_err(fail)
    })
}

/// # Safety
/// `state` must be a live handle and `out_record` writable.
#[no_mangle]
pub unsafe extern "C" fn cvtel_state_homodyne(
    state: *mut CvtelState,
    mode: usize,
    theta: f64,
    out_record: *mut usize,
) -> CvtelStatus {
    guard(|| {
        let rec = state_mut(state)?.homodyne(ModeId(mode), theta).map_err(fail)?;
        write(out_record, rec.id.0, "out_record")
    })
}

/// Solves and applies the feedforward that removes `targets` from `out_mode`, using the
/// records not yet consumed.
///
/// # Safety
/// `state` must be a live handle; `targets` must point to `n_targets` elements (may be
/// NULL when `n_targets` is 0).
#[no_mangle]
pub unsafe extern "C" fn cvtel_state_feedforward(
    state: *mut CvtelState,
    out_mode: usize,
    targets: *const CvtelVacuumSymbol,
    n_targets: usize,
) -> CvtelStatus {
    guard(|| {
        let st = state_mut(state)?;
        let raw = if n_targets == 0 {
            &[][..]
        } else if targets.is_null() {
            return Err(null("targets"));
        } else {
            std::slice::from_raw_parts(targets, n_targets)
        };
        let mut syms = Vec::with_capacity(raw.len());
        for t in raw {
            let (x, y) = st
                .vacuum_symbols(ModeId(t.mode))
                .ok_or_else(|| fail(Error::DeadMode(ModeId(t.mode))))?;
            syms.push(match t.quadrature {
                CvtelQuadrature::X => x,
                CvtelQuadrature::Y => y,
            });
        }
        let out = ModeId(out_mode);
        let gains = st.solve_feedforward_gains(out, &syms).map_err(fail)?;
        gains.apply(st, out).map_err(fail)
    })
}

/// Displaces one quadrature of `mode` by `gain` times record `record`.
///
/// # Safety
/// `state` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cvtel_state_displace(
    state: *mut CvtelState,
    mode: usize,
    quadrature: CvtelQuadrature,
    gain: f64,
    record: usize,
) -> CvtelStatus {
    guard(|| {
        let st = state_mut(state)?;
        let rec = st
            .record(RecordId(record))
            .cloned()
            .ok_or_else(|| fail(Error::ForeignRecord(RecordId(record))))?;
        let q = match quadrature {
            CvtelQuadrature::X => Quadrature::X,
            CvtelQuadrature::Y => Quadrature::Y,
        };
        st.displace_by_record(ModeId(mode), q, gain, &rec).map_err(fail)
    })
}

/// # Safety
/// `state` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cvtel_state_check_symplectic(state: *const CvtelState, out: *mut bool) -> CvtelStatus {
    guard(|| {
        let ok = state_ref(state)?.check_symplectic();
        write(out, ok, "out")
    })
}

/// # Safety
/// `state` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cvtel_state_num_live_modes(state: *const CvtelState, out: *mut usize) -> CvtelStatus {
    guard(|| {
        let n = state_ref(state)?.num_live_modes();
        write(out, n, "out")
    })
}

/// Reads a report off `out_mode`, with MSEs in units of `e^{-2r} V0`.
///
/// # Safety
/// `state` must be a live handle and `out_report` writable.
#[no_mangle]
pub unsafe extern "C" fn cvtel_state_report(
    state: *const CvtelState,
    out_mode: usize,
    r: f64,
    out_report: *mut *mut CvtelReport,
) -> CvtelStatus {
    guard(|| {
        let rep = ProtocolReport::from_state(state_ref(state)?, ModeId(out_mode), r).map_err(fail)?;
        write(out_report, Box::into_raw(Box::new(CvtelReport { inner: rep })), "out_report")
    })
}

fn protocol_of(p: &CvtelProtocolParams) -> Protocol {
    match p.kind {
        CvtelProtocolKind::Bs => Protocol::Bs { r: p.r },
        CvtelProtocolKind::Czcz => Protocol::Czcz {
            r: p.r,
            g1: p.g1,
            g2: p.g2,
        },
        CvtelProtocolKind::Hybrid => Protocol::Hybrid {
            r: p.r,
            g1: p.g1,
            theta1: p.theta1,
            theta2: p.theta2,
        },
        CvtelProtocolKind::CzczOptical => Protocol::CzczOptical {
            r: p.r,
            reflectivity: p.reflectivity,
        },
        CvtelProtocolKind::HybridOptical => Protocol::HybridOptical {
            r: p.r,
            reflectivity: p.reflectivity,
        },
    }
}

/// Runs one teleportation protocol.
///
/// # Safety
/// `params` must be readable and `out_report` writable.
#[no_mangle]
pub unsafe extern "C" fn cvtel_protocol_run(
    params: *const CvtelProtocolParams,
    out_report: *mut *mut CvtelReport,
) -> CvtelStatus {
    guard(|| {
        let p = params.as_ref().ok_or_else(|| null("params"))?;
        let rep = protocol_of(p).run().map_err(fail)?;
        write(out_report, Box::into_raw(Box::new(CvtelReport { inner: rep })), "out_report")
    })
}

/// # Safety
/// `report` must come from this library and not be used afterwards. NULL is a no-op.
#[no_mangle]
pub unsafe extern "C" fn cvtel_report_free(report: *mut CvtelReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// # Safety
/// `report` must be live; `mse_x` and `mse_y` writable.
#[no_mangle]
pub unsafe extern "C" fn cvtel_report_mse(report: *const CvtelReport, mse_x: *mut f64, mse_y: *mut f64) -> CvtelStatus {
    guard(|| {
        let r = report_ref(report)?;
        write(mse_x, r.mse_x, "mse_x")?;
        write(mse_y, r.mse_y, "mse_y")
    })
}

/// Writes the gain matrix row-major: `x_out/x_in, x_out/y_in, y_out/x_in, y_out/y_in`.
///
/// # Safety
/// `report` must be live; `out4` must have room for 4 doubles.
#[no_mangle]
pub unsafe extern "C" fn cvtel_report_signal_gain(report: *const CvtelReport, out4: *mut f64) -> CvtelStatus {
    guard(|| {
        let r = report_ref(report)?;
        if out4.is_null() {
            return Err(null("out4"));
        }
        let g = r.signal_gain;
        for (k, v) in [g[0][0], g[0][1], g[1][0], g[1][1]].into_iter().enumerate() {
            out4.add(k).write(v);
        }
        Ok(())
    })
}

/// # Safety
/// `report` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cvtel_report_is_teleportation(report: *const CvtelReport, out: *mut bool) -> CvtelStatus {
    guard(|| {
        let r = report_ref(report)?;
        write(out, r.is_teleportation, "out")
    })
}

/// # Safety
/// `report` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cvtel_report_num_noise_terms(report: *const CvtelReport, out: *mut usize) -> CvtelStatus {
    guard(|| {
        let r = report_ref(report)?;
        write(out, r.noise_terms.len(), "out")
    })
}

/// Coefficient and quadrature of noise term `index`. The symbol name is copied into `name`
/// (NUL-terminated, truncated to `name_len`) when `name` is not NULL.
///
/// # Safety
/// `report` must be live; output pointers writable; `name` must have `name_len` bytes.
#[no_mangle]
pub unsafe extern "C" fn cvtel_report_noise_term(
    report: *const CvtelReport,
    index: usize,
    out_quadrature: *mut CvtelQuadrature,
    out_coefficient: *mut f64,
    name: *mut c_char,
    name_len: usize,
) -> CvtelStatus {
    guard(|| {
        let r = report_ref(report)?;
        let t = r.noise_terms.get(index).ok_or_else(|| {
            fail(Error::InvalidParameter {
                name: "index",
                value: index as f64,
                reason: "noise term index out of range",
            })
        })?;
        let q = match t.quadrature {
            Quadrature::X => CvtelQuadrature::X,
            Quadrature::Y => CvtelQuadrature::Y,
        };
        write(out_quadrature, q, "out_quadrature")?;
        write(out_coefficient, t.coefficient, "out_coefficient")?;
        if !name.is_null() && name_len > 0 {
            let bytes = t.symbol.as_bytes();
            let n = bytes.len().min(name_len - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), name, n);
            name.add(n).write(0);
        }
        Ok(())
    })
}

/// Smallest optical CZ reflectivity at which the optical CZ–CZ worst-quadrature error
/// reaches `threshold`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cvtel_crossover_r(threshold: f64, out: *mut f64) -> CvtelStatus {
    guard(|| {
        let r = protocols::crossover_r(threshold).map_err(fail)?;
        write(out, r, "out")
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_codes_are_stable() {
        assert_eq!(CvtelStatus::Ok as i32, 0);
        assert_eq!(CvtelStatus::Panic as i32, 12);
    }

    #[test]
    fn error_message_is_cleared_on_success() {
        unsafe {
            let mut out = 0.0;
            assert_eq!(cvtel_crossover_r(0.5, &mut out), CvtelStatus::NoRoot);
            assert!(!cvtel_last_error_message().is_null());
            assert_eq!(cvtel_crossover_r(2.0, &mut out), CvtelStatus::Ok);
            assert!(cvtel_last_error_message().is_null());
        }
    }
}
