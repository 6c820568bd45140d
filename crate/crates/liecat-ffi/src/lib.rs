//! C ABI for the category toolkit.
//!
//! The surface follows the usual conventions for C bindings:
//!
//! - realizations are opaque handles created by [`liecat_realization_parse`]
//!   and released by [`liecat_realization_free`];
//! - every fallible call returns a [`LiecatStatus`] code and writes its
//!   results through caller-provided buffers whose lengths are passed
//!   explicitly and validated;
//! - a human-readable message for the most recent failing call on the
//!   current thread is available from [`liecat_last_error_message`];
//! - morphism/object coordinates travel as flat `double` arrays in the same
//!   chart order the core library uses, and matrices are row-major.
//!
//! The header `include/liecat.h` is generated from this file at build time.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use liecat::categories::Realization;
use liecat::flows::{self, SectionSpec};
use liecat::numerics::ToleranceConfig;
use liecat::ranks;
use liecat::specfile;
use liecat::thermo::{self, Configuration, EnergyModel};
use liecat::Error;

/// Status code returned by every fallible call.
///
/// `Ok` is zero; everything else is a failure and leaves a message for
/// `liecat_last_error_message`. The nonzero codes mirror the library's
/// error taxonomy, plus the FFI-specific `NullPointer`, `Utf8`, and
/// `Panic`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LiecatStatus {
    Ok = 0,
    NullPointer = 1,
    Utf8 = 2,
    Panic = 3,
    NonFinite = 4,
    DomainExit = 5,
    BadDimension = 6,
    DimensionMismatch = 7,
    Parse = 8,
    InvalidSpec = 9,
    InvalidMorphism = 10,
    InvalidObject = 11,
    NotComposable = 12,
    InvalidResult = 13,
    UnsupportedFamily = 14,
    SamplerUnavailable = 15,
    NotInvertible = 16,
    OutwardVector = 17,
    NotHomomorphism = 18,
    InvalidConfiguration = 19,
    BoundaryConfiguration = 20,
}

/// Section buffer holds coefficients in the target-fibre frame (length =
/// delta of the realization).
pub const LIECAT_SECTION_FRAME: u32 = 0;
/// Section buffer holds a monoid tangent vector at the unit (length =
/// morphism dimension; monoid families only).
pub const LIECAT_SECTION_MONOID: u32 = 1;

/// Opaque handle to a parsed realization together with the tolerance
/// settings used by every operation on it.
pub struct LiecatRealization {
    inner: Realization,
    tol: ToleranceConfig,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let clean: String = msg
        .chars()
        .map(|c| if c == '\0' { ' ' } else { c })
        .collect();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(clean).expect("NUL bytes were replaced");
    });
}

fn status_of(e: &Error) -> LiecatStatus {
    match e {
        Error::NonFinite { .. } => LiecatStatus::NonFinite,
        Error::DomainExit { .. } => LiecatStatus::DomainExit,
        Error::BadDimension { .. } => LiecatStatus::BadDimension,
        Error::DimensionMismatch { .. } => LiecatStatus::DimensionMismatch,
        Error::Parse { .. } => LiecatStatus::Parse,
        Error::InvalidSpec { .. } => LiecatStatus::InvalidSpec,
        Error::InvalidMorphism { .. } => LiecatStatus::InvalidMorphism,
        Error::InvalidObject { .. } => LiecatStatus::InvalidObject,
        Error::NotComposable { .. } => LiecatStatus::NotComposable,
        Error::InvalidResult { .. } => LiecatStatus::InvalidResult,
        Error::UnsupportedFamily { .. } => LiecatStatus::UnsupportedFamily,
        Error::SamplerUnavailable { .. } => LiecatStatus::SamplerUnavailable,
        Error::NotInvertible { .. } => LiecatStatus::NotInvertible,
        Error::OutwardVector { .. } => LiecatStatus::OutwardVector,
        Error::NotHomomorphism { .. } => LiecatStatus::NotHomomorphism,
        Error::InvalidConfiguration { .. } => LiecatStatus::InvalidConfiguration,
        Error::BoundaryConfiguration => LiecatStatus::BoundaryConfiguration,
    }
}

fn fail(e: &Error) -> LiecatStatus {
    set_last_error(&e.to_string());
    status_of(e)
}

fn lift<T>(r: liecat::Result<T>) -> Result<T, LiecatStatus> {
    r.map_err(|e| fail(&e))
}

macro_rules! ffi_try {
    ($expr:expr) => {
        match $expr {
            Ok(value) => value,
            Err(status) => return status,
        }
    };
}

/// Wrap a call body so a panic becomes a status code instead of crossing
/// the FFI boundary, and so the per-thread message reflects this call.
fn guarded<F: FnOnce() -> LiecatStatus>(body: F) -> LiecatStatus {
    set_last_error("");
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => {
            set_last_error("internal panic");
            LiecatStatus::Panic
        }
    }
}

unsafe fn handle_ref<'a>(
    handle: *const LiecatRealization,
) -> Result<&'a LiecatRealization, LiecatStatus> {
    if handle.is_null() {
        set_last_error("null realization handle");
        return Err(LiecatStatus::NullPointer);
    }
    Ok(&*handle)
}

unsafe fn in_slice<'a>(ptr: *const f64, len: usize) -> Result<&'a [f64], LiecatStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        set_last_error("null input buffer with nonzero length");
        return Err(LiecatStatus::NullPointer);
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

unsafe fn out_slice<'a>(ptr: *mut f64, len: usize) -> Result<&'a mut [f64], LiecatStatus> {
    if len == 0 {
        return Ok(&mut []);
    }
    if ptr.is_null() {
        set_last_error("null output buffer with nonzero length");
        return Err(LiecatStatus::NullPointer);
    }
    Ok(std::slice::from_raw_parts_mut(ptr, len))
}

unsafe fn out_ref<'a, T>(ptr: *mut T, what: &str) -> Result<&'a mut T, LiecatStatus> {
    if ptr.is_null() {
        set_last_error(&format!("null output pointer for {what}"));
        return Err(LiecatStatus::NullPointer);
    }
    Ok(&mut *ptr)
}

fn write_coords(dst: &mut [f64], src: &[f64], what: &str) -> Result<(), LiecatStatus> {
    if dst.len() != src.len() {
        set_last_error(&format!(
            "output buffer for {what} holds {} values but {} are required",
            dst.len(),
            src.len()
        ));
        return Err(LiecatStatus::DimensionMismatch);
    }
    dst.copy_from_slice(src);
    Ok(())
}

fn configuration_from(probs: &[f64]) -> Result<Configuration, LiecatStatus> {
    lift(Configuration::new(probs.to_vec()))
}

// ----- handle lifecycle -----------------------------------------------------

/// Parse a NUL-terminated realization description (the same `key = value`
/// format the CLI reads from spec files) into a new handle.
///
/// On success writes the handle to `out` and returns `Ok`; the handle must
/// be released with `liecat_realization_free`.
///
/// # Safety
///
/// `spec_text` must point to a NUL-terminated string and `out` to a valid
/// pointer slot.
#[no_mangle]
pub unsafe extern "C" fn liecat_realization_parse(
    spec_text: *const c_char,
    out: *mut *mut LiecatRealization,
) -> LiecatStatus {
    guarded(|| {
        if spec_text.is_null() {
            set_last_error("null spec text");
            return LiecatStatus::NullPointer;
        }
        let out = ffi_try!(out_ref(out, "the realization handle"));
        let text = match CStr::from_ptr(spec_text).to_str() {
            Ok(t) => t,
            Err(_) => {
                set_last_error("spec text is not valid UTF-8");
                return LiecatStatus::Utf8;
            }
        };
        let inner = ffi_try!(lift(specfile::parse_realization(text)));
        *out = Box::into_raw(Box::new(LiecatRealization {
            inner,
            tol: ToleranceConfig::default(),
        }));
        LiecatStatus::Ok
    })
}

/// Release a handle created by `liecat_realization_parse`. Passing NULL is
/// a no-op.
///
/// # Safety
///
/// `handle` must be NULL or a pointer obtained from
/// `liecat_realization_parse` that has not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn liecat_realization_free(handle: *mut LiecatRealization) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Copy the realization's family name into `buf` as a NUL-terminated
/// string. `buf_len` must cover the name plus the terminator.
///
/// # Safety
///
/// `buf` must point to at least `buf_len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn liecat_realization_family(
    handle: *const LiecatRealization,
    buf: *mut c_char,
    buf_len: usize,
) -> LiecatStatus {
    guarded(|| {
        let c = ffi_try!(handle_ref(handle));
        let name = c.inner.family_name().as_bytes();
        if buf.is_null() {
            set_last_error("null family-name buffer");
            return LiecatStatus::NullPointer;
        }
        if buf_len < name.len() + 1 {
            set_last_error(&format!(
                "family-name buffer holds {buf_len} bytes but {} are required",
                name.len() + 1
            ));
            return LiecatStatus::DimensionMismatch;
        }
        for (i, &b) in name.iter().enumerate() {
            *buf.add(i) = b as c_char;
        }
        *buf.add(name.len()) = 0;
        LiecatStatus::Ok
    })
}

/// Report the chart dimensions of the realization: morphism coordinates,
/// object coordinates, and their difference delta (the fibre dimension).
///
/// # Safety
///
/// The three output pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn liecat_realization_dims(
    handle: *const LiecatRealization,
    out_morphisms: *mut usize,
    out_objects: *mut usize,
    out_delta: *mut usize,
) -> LiecatStatus {
    guarded(|| {
        let c = ffi_try!(handle_ref(handle));
        *ffi_try!(out_ref(out_morphisms, "the morphism dimension")) = c.inner.dim_morphisms();
        *ffi_try!(out_ref(out_objects, "the object dimension")) = c.inner.dim_objects();
        *ffi_try!(out_ref(out_delta, "delta")) = c.inner.delta();
        LiecatStatus::Ok
    })
}

/// Replace the relative singular-value cutoff used for rank decisions on
/// this handle (default 1e-8). Must be positive and finite.
///
/// # Safety
///
/// `handle` must be a live handle from `liecat_realization_parse`.
#[no_mangle]
pub unsafe extern "C" fn liecat_realization_set_rank_tolerance(
    handle: *mut LiecatRealization,
    tol: f64,
) -> LiecatStatus {
    guarded(|| {
        if handle.is_null() {
            set_last_error("null realization handle");
            return LiecatStatus::NullPointer;
        }
        if !(tol.is_finite() && tol > 0.0) {
            return fail(&Error::Parse {
                detail: format!("rank tolerance must be a positive finite number, got {tol}"),
            });
        }
        (*handle).tol.rank_rel_tol = tol;
        LiecatStatus::Ok
    })
}

// ----- category structure ---------------------------------------------------

/// Decide whether `coords` (length = morphism dimension) describes a valid
/// morphism of the realization.
///
/// # Safety
///
/// Buffer lengths must match the pointers they describe; `out` must be
/// valid.
#[no_mangle]
pub unsafe extern "C" fn liecat_morphism_valid(
    handle: *const LiecatRealization,
    coords: *const f64,
    coords_len: usize,
    out: *mut bool,
) -> LiecatStatus {
    guarded(|| {
        let c = ffi_try!(handle_ref(handle));
        let coords = ffi_try!(in_slice(coords, coords_len));
        let out = ffi_try!(out_ref(out, "the validity flag"));
        if coords.len() != c.inner.dim_morphisms() {
            return fail(&Error::DimensionMismatch {
                what: format!("morphism coordinates for {}", c.inner.family_name()),
                expected: c.inner.dim_morphisms(),
                found: coords.len(),
            });
        }
        *out = c.inner.morphism_valid_coords_with(coords, &c.tol);
        LiecatStatus::Ok
    })
}

/// Compose two morphisms: `out = g . h` (apply `h` first). `out` must hold
/// one morphism (length = morphism dimension).
///
/// # Safety
///
/// Buffer lengths must match the pointers they describe.
#[no_mangle]
pub unsafe extern "C" fn liecat_compose(
    handle: *const LiecatRealization,
    g: *const f64,
    g_len: usize,
    h: *const f64,
    h_len: usize,
    out: *mut f64,
    out_len: usize,
) -> LiecatStatus {
    guarded(|| {
        let c = ffi_try!(handle_ref(handle));
        let g = ffi_try!(in_slice(g, g_len));
        let h = ffi_try!(in_slice(h, h_len));
        let out = ffi_try!(out_slice(out, out_len));
        let gm = ffi_try!(lift(c.inner.morphism_with(g, &c.tol)));
        let hm = ffi_try!(lift(c.inner.morphism_with(h, &c.tol)));
        let composite = ffi_try!(lift(c.inner.compose_with(&gm, &hm, &c.tol)));
        ffi_try!(write_coords(out, composite.coords(), "the composite"));
        LiecatStatus::Ok
    })
}

/// Write the source object chart of `g` (length = object dimension).
///
/// # Safety
///
/// Buffer lengths must match the pointers they describe.
#[no_mangle]
pub unsafe extern "C" fn liecat_source(
    handle: *const LiecatRealization,
    g: *const f64,
    g_len: usize,
    out: *mut f64,
    out_len: usize,
) -> LiecatStatus {
    guarded(|| {
        let c = ffi_try!(handle_ref(handle));
        let g = ffi_try!(in_slice(g, g_len));
        let out = ffi_try!(out_slice(out, out_len));
        let gm = ffi_try!(lift(c.inner.morphism_with(g, &c.tol)));
        let source = ffi_try!(lift(c.inner.source(&gm)));
        ffi_try!(write_coords(out, source.coords(), "the source chart"));
        LiecatStatus::Ok
    })
}

/// Write the target object chart of `g` (length = object dimension).
///
/// # Safety
///
/// Buffer lengths must match the pointers they describe.
#[no_mangle]
pub unsafe extern "C" fn liecat_target(
    handle: *const LiecatRealization,
    g: *const f64,
    g_len: usize,
    out: *mut f64,
    out_len: usize,
) -> LiecatStatus {
    guarded(|| {
        let c = ffi_try!(handle_ref(handle));
        let g = ffi_try!(in_slice(g, g_len));
        let out = ffi_try!(out_slice(out, out_len));
        let gm = ffi_try!(lift(c.inner.morphism_with(g, &c.tol)));
        let target = ffi_try!(lift(c.inner.target(&gm)));
        ffi_try!(write_coords(out, target.coords(), "the target chart"));
        LiecatStatus::Ok
    })
}

/// Write the unit morphism over the object chart `x` (out length =
/// morphism dimension). Monoids have the empty object chart, so pass
/// `x = NULL, x_len = 0`.
///
/// # Safety
///
/// Buffer lengths must match the pointers they describe.
#[no_mangle]
pub unsafe extern "C" fn liecat_unit(
    handle: *const LiecatRealization,
    x: *const f64,
    x_len: usize,
    out: *mut f64,
    out_len: usize,
) -> LiecatStatus {
    guarded(|| {
        let c = ffi_try!(handle_ref(handle));
        let x = ffi_try!(in_slice(x, x_len));
        let out = ffi_try!(out_slice(out, out_len));
        let object = ffi_try!(lift(c.inner.object(x)));
        let unit = ffi_try!(lift(c.inner.unit(&object)));
        ffi_try!(write_coords(out, unit.coords(), "the unit morphism"));
        LiecatStatus::Ok
    })
}

// ----- ranks ----------------------------------------------------------------

/// Compute both translation ranks of `g` and whether it is regular (both
/// ranks equal to delta).
///
/// # Safety
///
/// Buffer lengths must match the pointers they describe; output pointers
/// must be valid.
#[no_mangle]
pub unsafe extern "C" fn liecat_rank_report(
    handle: *const LiecatRealization,
    g: *const f64,
    g_len: usize,
    out_left: *mut usize,
    out_right: *mut usize,
    out_regular: *mut bool,
) -> LiecatStatus {
    guarded(|| {
        let c = ffi_try!(handle_ref(handle));
        let g = ffi_try!(in_slice(g, g_len));
        let gm = ffi_try!(lift(c.inner.morphism_with(g, &c.tol)));
        let report = ffi_try!(lift(ranks::rank_report(&c.inner, &gm, &c.tol)));
        *ffi_try!(out_ref(out_left, "the left rank")) = report.left;
        *ffi_try!(out_ref(out_right, "the right rank")) = report.right;
        *ffi_try!(out_ref(out_regular, "the regularity flag")) = report.regular;
        LiecatStatus::Ok
    })
}

/// Decide invertibility of `g` (membership in the core groupoid).
///
/// # Safety
///
/// Buffer lengths must match the pointers they describe; `out` must be
/// valid.
#[no_mangle]
pub unsafe extern "C" fn liecat_is_invertible(
    handle: *const LiecatRealization,
    g: *const f64,
    g_len: usize,
    out: *mut bool,
) -> LiecatStatus {
    guarded(|| {
        let c = ffi_try!(handle_ref(handle));
        let g = ffi_try!(in_slice(g, g_len));
        let out = ffi_try!(out_ref(out, "the invertibility flag"));
        let gm = ffi_try!(lift(c.inner.morphism_with(g, &c.tol)));
        *out = ffi_try!(lift(ranks::is_invertible(&c.inner, &gm, &c.tol)));
        LiecatStatus::Ok
    })
}

// ----- flows ----------------------------------------------------------------

/// Exponential of a monoid tangent vector `v` at the unit: the time-1
/// point of the left-invariant flow (out length = morphism dimension).
/// Monoid families only.
///
/// # Safety
///
/// Buffer lengths must match the pointers they describe.
#[no_mangle]
pub unsafe extern "C" fn liecat_exp(
    handle: *const LiecatRealization,
    v: *const f64,
    v_len: usize,
    out: *mut f64,
    out_len: usize,
) -> LiecatStatus {
    guarded(|| {
        let c = ffi_try!(handle_ref(handle));
        let v = ffi_try!(in_slice(v, v_len));
        let out = ffi_try!(out_slice(out, out_len));
        let endpoint = ffi_try!(lift(flows::exp_monoid(&c.inner, v, &c.tol)));
        ffi_try!(write_coords(out, endpoint.coords(), "the exponential"));
        LiecatStatus::Ok
    })
}

/// Flow the left-invariant extension of a section from the morphism `g`
/// for the given time.
///
/// `section_mode` is `LIECAT_SECTION_FRAME` (coefficients in the
/// target-fibre frame, length = delta) or `LIECAT_SECTION_MONOID`
/// (tangent vector at the unit, length = morphism dimension; monoids
/// only). The endpoint buffer receives the last valid point; `out_t_reached`
/// the time actually integrated; `out_exited` whether the trajectory left
/// the morphism set early.
///
/// # Safety
///
/// Buffer lengths must match the pointers they describe; output pointers
/// must be valid.
#[no_mangle]
pub unsafe extern "C" fn liecat_flow(
    handle: *const LiecatRealization,
    section_mode: u32,
    section: *const f64,
    section_len: usize,
    g: *const f64,
    g_len: usize,
    time: f64,
    out_endpoint: *mut f64,
    out_endpoint_len: usize,
    out_t_reached: *mut f64,
    out_exited: *mut bool,
) -> LiecatStatus {
    guarded(|| {
        let c = ffi_try!(handle_ref(handle));
        let section = ffi_try!(in_slice(section, section_len));
        let g = ffi_try!(in_slice(g, g_len));
        let out_endpoint = ffi_try!(out_slice(out_endpoint, out_endpoint_len));
        let spec = match section_mode {
            LIECAT_SECTION_FRAME => SectionSpec::FrameCoefficients(section.to_vec()),
            LIECAT_SECTION_MONOID => SectionSpec::MonoidVector(section.to_vec()),
            other => {
                return fail(&Error::Parse {
                    detail: format!("unknown section mode {other} (expected 0 or 1)"),
                });
            }
        };
        let gm = ffi_try!(lift(c.inner.morphism_with(g, &c.tol)));
        let run = ffi_try!(lift(flows::flow_left_invariant(
            &c.inner, &spec, &gm, time, &c.tol
        )));
        ffi_try!(write_coords(
            out_endpoint,
            run.endpoint.coords(),
            "the flow endpoint"
        ));
        *ffi_try!(out_ref(out_t_reached, "the reached time")) = run.t_reached;
        *ffi_try!(out_ref(out_exited, "the exit flag")) = run.exited;
        LiecatStatus::Ok
    })
}

/// Bracket of the left-invariant extensions of two sections at the unit
/// over the object chart `x` (pass `x = NULL, x_len = 0` for monoids).
/// Both sections use `LIECAT_SECTION_FRAME`/`LIECAT_SECTION_MONOID`
/// semantics via their own mode arguments. The ambient buffer (length =
/// morphism dimension) receives the bracket vector; `out_residual` the
/// distance from the ambient vector to its fibre-frame reconstruction.
///
/// # Safety
///
/// Buffer lengths must match the pointers they describe; output pointers
/// must be valid.
#[no_mangle]
pub unsafe extern "C" fn liecat_bracket(
    handle: *const LiecatRealization,
    alpha_mode: u32,
    alpha: *const f64,
    alpha_len: usize,
    beta_mode: u32,
    beta: *const f64,
    beta_len: usize,
    x: *const f64,
    x_len: usize,
    out_ambient: *mut f64,
    out_ambient_len: usize,
    out_residual: *mut f64,
) -> LiecatStatus {
    guarded(|| {
        let c = ffi_try!(handle_ref(handle));
        let alpha = ffi_try!(in_slice(alpha, alpha_len));
        let beta = ffi_try!(in_slice(beta, beta_len));
        let x = ffi_try!(in_slice(x, x_len));
        let out_ambient = ffi_try!(out_slice(out_ambient, out_ambient_len));
        let section_of = |mode: u32, coeffs: &[f64], name: &str| match mode {
            LIECAT_SECTION_FRAME => Ok(SectionSpec::FrameCoefficients(coeffs.to_vec())),
            LIECAT_SECTION_MONOID => Ok(SectionSpec::MonoidVector(coeffs.to_vec())),
            other => Err(fail(&Error::Parse {
                detail: format!("unknown {name} section mode {other} (expected 0 or 1)"),
            })),
        };
        let alpha_spec = ffi_try!(section_of(alpha_mode, alpha, "alpha"));
        let beta_spec = ffi_try!(section_of(beta_mode, beta, "beta"));
        let object = ffi_try!(lift(c.inner.object(x)));
        let result = ffi_try!(lift(flows::bracket_at_unit(
            &c.inner,
            &alpha_spec,
            &beta_spec,
            &object,
            &c.tol
        )));
        ffi_try!(write_coords(out_ambient, &result.ambient, "the bracket"));
        *ffi_try!(out_ref(out_residual, "the projection residual")) = result.projection_residual;
        LiecatStatus::Ok
    })
}

/// Anchor matrix at the object chart `x`: the differential of the source
/// map restricted to the target-fibre frame at the unit, written row-major
/// into `out` (object dimension x delta entries).
///
/// # Safety
///
/// Buffer lengths must match the pointers they describe.
#[no_mangle]
pub unsafe extern "C" fn liecat_anchor(
    handle: *const LiecatRealization,
    x: *const f64,
    x_len: usize,
    out: *mut f64,
    out_len: usize,
) -> LiecatStatus {
    guarded(|| {
        let c = ffi_try!(handle_ref(handle));
        let x = ffi_try!(in_slice(x, x_len));
        let out = ffi_try!(out_slice(out, out_len));
        let object = ffi_try!(lift(c.inner.object(x)));
        let anchor = ffi_try!(lift(flows::anchor_matrix(&c.inner, &object, &c.tol)));
        ffi_try!(write_coords(out, anchor.as_slice(), "the anchor matrix"));
        LiecatStatus::Ok
    })
}

// ----- thermodynamics -------------------------------------------------------

/// Shannon entropy (natural log) of a probability vector.
///
/// # Safety
///
/// `probs` must hold `probs_len` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn liecat_entropy(
    probs: *const f64,
    probs_len: usize,
    out: *mut f64,
) -> LiecatStatus {
    guarded(|| {
        let probs = ffi_try!(in_slice(probs, probs_len));
        let out = ffi_try!(out_ref(out, "the entropy"));
        let p = ffi_try!(configuration_from(probs));
        *out = thermo::entropy(&p);
        LiecatStatus::Ok
    })
}

/// Entropy change `S(to) - S(from)` of the process `to <- from`.
///
/// # Safety
///
/// Buffer lengths must match the pointers they describe; `out` must be
/// valid.
#[no_mangle]
pub unsafe extern "C" fn liecat_delta_entropy(
    to: *const f64,
    to_len: usize,
    from: *const f64,
    from_len: usize,
    out: *mut f64,
) -> LiecatStatus {
    guarded(|| {
        let to = ffi_try!(in_slice(to, to_len));
        let from = ffi_try!(in_slice(from, from_len));
        let out = ffi_try!(out_ref(out, "the entropy change"));
        let q = ffi_try!(configuration_from(to));
        let p = ffi_try!(configuration_from(from));
        *out = ffi_try!(lift(thermo::delta_entropy(&q, &p)));
        LiecatStatus::Ok
    })
}

/// Second-law feasibility of the process `to <- from`: entropy must not
/// drop by more than `slack` (use 0 for the exact law).
///
/// # Safety
///
/// Buffer lengths must match the pointers they describe; `out` must be
/// valid.
#[no_mangle]
pub unsafe extern "C" fn liecat_is_feasible(
    to: *const f64,
    to_len: usize,
    from: *const f64,
    from_len: usize,
    slack: f64,
    out: *mut bool,
) -> LiecatStatus {
    guarded(|| {
        let to = ffi_try!(in_slice(to, to_len));
        let from = ffi_try!(in_slice(from, from_len));
        let out = ffi_try!(out_ref(out, "the feasibility flag"));
        let q = ffi_try!(configuration_from(to));
        let p = ffi_try!(configuration_from(from));
        *out = ffi_try!(lift(thermo::is_feasible(&q, &p, slack)));
        LiecatStatus::Ok
    })
}

/// Reachability inside the process category: true iff some admissible
/// process leads from `from` to `to`. Both configurations must be
/// admissible states (strictly interior, not microcanonical), otherwise
/// the call fails with `InvalidConfiguration`.
///
/// # Safety
///
/// Buffer lengths must match the pointers they describe; `out` must be
/// valid.
#[no_mangle]
pub unsafe extern "C" fn liecat_can_reach(
    to: *const f64,
    to_len: usize,
    from: *const f64,
    from_len: usize,
    out: *mut bool,
) -> LiecatStatus {
    guarded(|| {
        let to = ffi_try!(in_slice(to, to_len));
        let from = ffi_try!(in_slice(from, from_len));
        let out = ffi_try!(out_ref(out, "the reachability flag"));
        let q = ffi_try!(configuration_from(to));
        let p = ffi_try!(configuration_from(from));
        *out = ffi_try!(lift(thermo::can_reach(&q, &p)));
        LiecatStatus::Ok
    })
}

/// Gibbs equilibrium of the energy model with levels `energies` at the
/// given temperature and Boltzmann constant (`kT = boltzmann *
/// temperature`). Writes the equilibrium probabilities (length =
/// `energies_len`), the partition function, and the multiplier conjugate
/// to the energy constraint (`-1/kT`).
///
/// # Safety
///
/// Buffer lengths must match the pointers they describe; output pointers
/// must be valid.
#[no_mangle]
pub unsafe extern "C" fn liecat_gibbs(
    energies: *const f64,
    energies_len: usize,
    temperature: f64,
    boltzmann: f64,
    out_probs: *mut f64,
    out_probs_len: usize,
    out_partition: *mut f64,
    out_multiplier: *mut f64,
) -> LiecatStatus {
    guarded(|| {
        let energies = ffi_try!(in_slice(energies, energies_len));
        let out_probs = ffi_try!(out_slice(out_probs, out_probs_len));
        let model = ffi_try!(lift(EnergyModel::new(
            energies.to_vec(),
            temperature,
            boltzmann
        )));
        let solution = ffi_try!(lift(thermo::gibbs_equilibrium(&model)));
        ffi_try!(write_coords(
            out_probs,
            solution.p_eq.probs(),
            "the equilibrium probabilities"
        ));
        *ffi_try!(out_ref(out_partition, "the partition function")) = solution.z;
        *ffi_try!(out_ref(out_multiplier, "the multiplier")) = solution.lambda1;
        LiecatStatus::Ok
    })
}

// ----- diagnostics ----------------------------------------------------------

/// Message describing the most recent failing call on this thread, or the
/// empty string if that call succeeded. The pointer stays valid until the
/// next library call on the same thread.
#[no_mangle]
pub extern "C" fn liecat_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}
