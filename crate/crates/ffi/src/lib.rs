//! C ABI over the `overlap-entangle` library.
//!
//! Objects cross the boundary as opaque handles created by `oe_*_new`-style
//! constructors and released by the matching `oe_*_free`. Every fallible call
//! returns an [`OeStatus`]; on failure [`oe_last_error_message`] describes it.
//! Complex inputs are passed as separate real and imaginary arrays in
//! row-major order.

use std::cell::RefCell;
use std::ffi::CString;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use libc::c_char;
use overlap_entangle::entanglement::{self, TargetState, Verdict};
use overlap_entangle::reduce::{self, DelayModel};
use overlap_entangle::transform::{self, GhzParams};
use overlap_entangle::{Complex64, DensityMatrix, Error, GramMatrix, Spin, TransformSpec};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OeStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    DimensionMismatch = 3,
    GramNotPsd = 4,
    PostselectionImpossible = 5,
    Unsupported = 6,
    InvalidDensityMatrix = 7,
    Panic = 99,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OeVerdict {
    GenuineGhzWitnessed = 0,
    GenuineWWitnessed = 1,
    WitnessInconclusive = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OeClassification {
    pub fidelity_ghz: f64,
    pub fidelity_w_max: f64,
    /// Radians, wrapped to (-pi, pi].
    pub phi1: f64,
    pub phi2: f64,
    pub ghz_witness_passed: bool,
    pub w_witness_passed: bool,
    pub offdiag_norm: f64,
    pub verdict: OeVerdict,
}

/// Opaque linear transformation (amplitudes and spin assignments).
pub struct OeSpec(TransformSpec);

/// Opaque Gram matrix of the particles' internal states.
pub struct OeGram(GramMatrix);

/// Opaque normalized density matrix.
pub struct OeDensity(DensityMatrix);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> OeStatus {
    match e {
        Error::DimensionMismatch { .. } => OeStatus::DimensionMismatch,
        Error::GramNotPsd(_) => OeStatus::GramNotPsd,
        Error::PostselectionImpossible(_) => OeStatus::PostselectionImpossible,
        Error::UnsupportedConfiguration(_) | Error::SizeLimit(_) => OeStatus::Unsupported,
        Error::InvalidDensityMatrix(_) => OeStatus::InvalidDensityMatrix,
        _ => OeStatus::InvalidInput,
    }
}

enum Failure {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> OeStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => OeStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_last_error(format!("null pointer: {what}"));
            OeStatus::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            set_last_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_last_error("internal panic".into());
            OeStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn complex_slice(re: *const f64, im: *const f64, len: usize) -> Result<Vec<Complex64>, Failure> {
    if len == 0 {
        return Ok(Vec::new());
    }
    if re.is_null() {
        return Err(Failure::Null("re"));
    }
    let re = slice::from_raw_parts(re, len);
    let im = if im.is_null() {
        None
    } else {
        Some(slice::from_raw_parts(im, len))
    };
    Ok((0..len)
        .map(|k| Complex64::new(re[k], im.map_or(0.0, |i| i[k])))
        .collect())
}

fn rows_of(flat: Vec<Complex64>, cols: usize) -> Vec<Vec<Complex64>> {
    flat.chunks(cols.max(1)).map(<[Complex64]>::to_vec).collect()
}

fn emit<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null("out"));
    }
    unsafe { *out = Box::into_raw(Box::new(value)) };
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn oe_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the most recent failure on this thread, or NULL.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn oe_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Balanced GHZ transformation (every amplitude 1/sqrt 2).
#[no_mangle]
pub extern "C" fn oe_spec_ghz_balanced(out: *mut *mut OeSpec) -> OeStatus {
    guard(|| emit(out, OeSpec(transform::ghz_preset(&GhzParams::balanced())?)))
}

/// GHZ transformation from six amplitudes ordered
/// alpha1, alpha2, beta2, beta3, gamma1, gamma3.
///
/// # Safety
/// `re` must point to 6 doubles; `im` is NULL or points to 6 doubles.
#[no_mangle]
pub unsafe extern "C" fn oe_spec_ghz(re: *const f64, im: *const f64, out: *mut *mut OeSpec) -> OeStatus {
    guard(|| {
        let a = complex_slice(re, im, 6)?;
        let p = GhzParams {
            alpha1: a[0],
            alpha2: a[1],
            beta2: a[2],
            beta3: a[3],
            gamma1: a[4],
            gamma3: a[5],
        };
        emit(out, OeSpec(transform::ghz_preset(&p)?))
    })
}

/// W transformation from a 3x3 row-major tritter matrix.
///
/// # Safety
/// `re` must point to 9 doubles; `im` is NULL or points to 9 doubles.
#[no_mangle]
pub unsafe extern "C" fn oe_spec_w(re: *const f64, im: *const f64, out: *mut *mut OeSpec) -> OeStatus {
    guard(|| {
        let a = complex_slice(re, im, 9)?;
        let rows = [[a[0], a[1], a[2]], [a[3], a[4], a[5]], [a[6], a[7], a[8]]];
        emit(out, OeSpec(transform::w_preset(rows)?))
    })
}

/// W transformation through the balanced all-positive tritter.
#[no_mangle]
pub extern "C" fn oe_spec_w_balanced(out: *mut *mut OeSpec) -> OeStatus {
    guard(|| emit(out, OeSpec(transform::w_preset(transform::balanced_tritter_rows())?)))
}

/// Arbitrary transformation of `particles` particles onto `modes` detectors.
/// `spins` holds one entry per amplitude: 0 down, 1 up, -1 unused
/// (required exactly where the amplitude is zero).
///
/// # Safety
/// `re` and `spins` must point to `particles * modes` elements; `im` is NULL
/// or the same length.
#[no_mangle]
pub unsafe extern "C" fn oe_spec_custom(
    particles: usize,
    modes: usize,
    re: *const f64,
    im: *const f64,
    spins: *const i8,
    out: *mut *mut OeSpec,
) -> OeStatus {
    guard(|| {
        let len = particles
            .checked_mul(modes)
            .ok_or(Error::InvalidInput("size overflow".into()))?;
        let t = rows_of(complex_slice(re, im, len)?, modes);
        if len > 0 && spins.is_null() {
            return Err(Failure::Null("spins"));
        }
        let raw = if len == 0 {
            &[][..]
        } else {
            slice::from_raw_parts(spins, len)
        };
        let mut s = Vec::with_capacity(particles);
        for row in raw.chunks(modes.max(1)) {
            let mut r = Vec::with_capacity(modes);
            for &v in row {
                r.push(match v {
                    -1 => None,
                    0 => Some(Spin::Down),
                    1 => Some(Spin::Up),
                    other => return Err(Error::InvalidInput(format!("spin code {other} is not -1, 0 or 1")).into()),
                });
            }
            s.push(r);
        }
        emit(out, OeSpec(TransformSpec::custom(t, s)?))
    })
}

/// # Safety
/// The handle is NULL (yields 0) or live.
#[no_mangle]
pub unsafe extern "C" fn oe_spec_num_particles(spec: *const OeSpec) -> usize {
    spec.as_ref().map_or(0, |s| s.0.num_particles())
}

/// # Safety
/// The handle is NULL (yields 0) or live.
#[no_mangle]
pub unsafe extern "C" fn oe_spec_num_modes(spec: *const OeSpec) -> usize {
    spec.as_ref().map_or(0, |s| s.0.num_modes())
}

/// # Safety
/// `spec` is NULL or a handle from an `oe_spec_*` constructor not yet freed.
#[no_mangle]
pub unsafe extern "C" fn oe_spec_free(spec: *mut OeSpec) {
    if !spec.is_null() {
        drop(Box::from_raw(spec));
    }
}

/// Gram matrix from an n x n row-major buffer.
///
/// # Safety
/// `re` must point to `n * n` doubles; `im` is NULL or the same length.
#[no_mangle]
pub unsafe extern "C" fn oe_gram_new(n: usize, re: *const f64, im: *const f64, out: *mut *mut OeGram) -> OeStatus {
    guard(|| {
        let len = n.checked_mul(n).ok_or(Error::InvalidInput("size overflow".into()))?;
        let rows = rows_of(complex_slice(re, im, len)?, n);
        emit(out, OeGram(GramMatrix::from_rows(&rows)?))
    })
}

/// Gram matrix with every off-diagonal entry equal to `g`.
#[no_mangle]
pub extern "C" fn oe_gram_uniform(n: usize, g: f64, out: *mut *mut OeGram) -> OeStatus {
    guard(|| emit(out, OeGram(GramMatrix::uniform(n, g)?)))
}

/// Gram matrix from path delays under the Gaussian coherence model.
///
/// # Safety
/// `delays` must point to `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn oe_gram_from_delays(
    n: usize,
    delays: *const f64,
    coherence_length: f64,
    out: *mut *mut OeGram,
) -> OeStatus {
    guard(|| {
        if n > 0 && delays.is_null() {
            return Err(Failure::Null("delays"));
        }
        let d = if n == 0 {
            Vec::new()
        } else {
            slice::from_raw_parts(delays, n).to_vec()
        };
        let model = DelayModel::new(coherence_length, d)?;
        emit(out, OeGram(GramMatrix::from_delays(&model)))
    })
}

/// # Safety
/// `gram` is NULL or a handle from an `oe_gram_*` constructor not yet freed.
#[no_mangle]
pub unsafe extern "C" fn oe_gram_free(gram: *mut OeGram) {
    if !gram.is_null() {
        drop(Box::from_raw(gram));
    }
}

/// Postselected, distinguishability-traced state. `p_success` may be NULL.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn oe_simulate(
    spec: *const OeSpec,
    gram: *const OeGram,
    out: *mut *mut OeDensity,
    p_success: *mut f64,
) -> OeStatus {
    guard(|| {
        let spec = deref(spec, "spec")?;
        let gram = deref(gram, "gram")?;
        let (rho, p) = reduce::simulate(&spec.0, &gram.0)?;
        emit(out, OeDensity(rho))?;
        if !p_success.is_null() {
            *p_success = p;
        }
        Ok(())
    })
}

/// Density matrix from a dim x dim row-major buffer; validated.
///
/// # Safety
/// `re` must point to `dim * dim` doubles; `im` is NULL or the same length.
#[no_mangle]
pub unsafe extern "C" fn oe_density_new(
    dim: usize,
    re: *const f64,
    im: *const f64,
    out: *mut *mut OeDensity,
) -> OeStatus {
    guard(|| {
        let len = dim
            .checked_mul(dim)
            .ok_or(Error::InvalidInput("size overflow".into()))?;
        let flat = complex_slice(re, im, len)?;
        let m = overlap_entangle::linalg::CMatrix::from_row_slice(dim, dim, &flat);
        emit(out, OeDensity(DensityMatrix::try_new(m)?))
    })
}

/// # Safety
/// The handle is NULL (yields 0) or live.
#[no_mangle]
pub unsafe extern "C" fn oe_density_num_qubits(rho: *const OeDensity) -> usize {
    rho.as_ref().map_or(0, |r| r.0.num_qubits())
}

/// # Safety
/// The handle is NULL (yields 0) or live.
#[no_mangle]
pub unsafe extern "C" fn oe_density_dim(rho: *const OeDensity) -> usize {
    rho.as_ref().map_or(0, |r| r.0.dim())
}

/// Copies the entries row-major into caller buffers of `len = dim * dim`.
///
/// # Safety
/// `re` and `im` must each be writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn oe_density_entries(rho: *const OeDensity, re: *mut f64, im: *mut f64, len: usize) -> OeStatus {
    guard(|| {
        let rho = deref(rho, "rho")?;
        let d = rho.0.dim();
        if len != d * d {
            return Err(Error::DimensionMismatch {
                expected: d * d,
                found: len,
            }
            .into());
        }
        if re.is_null() || im.is_null() {
            return Err(Failure::Null("re/im"));
        }
        let re = slice::from_raw_parts_mut(re, len);
        let im = slice::from_raw_parts_mut(im, len);
        for r in 0..d {
            for c in 0..d {
                let v = rho.0.get(r, c);
                re[r * d + c] = v.re;
                im[r * d + c] = v.im;
            }
        }
        Ok(())
    })
}

/// # Safety
/// `rho` is NULL or a handle from `oe_simulate`/`oe_density_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn oe_density_free(rho: *mut OeDensity) {
    if !rho.is_null() {
        drop(Box::from_raw(rho));
    }
}

/// Fidelity with the GHZ state on the same number of qubits.
///
/// # Safety
/// `rho` must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn oe_fidelity_ghz(rho: *const OeDensity, out: *mut f64) -> OeStatus {
    guard(|| {
        let rho = deref(rho, "rho")?;
        let f = entanglement::fidelity_pure(&rho.0, &TargetState::ghz(rho.0.num_qubits()))?;
        write(out, f)
    })
}

/// Fidelity with the three-qubit W state carrying phases `phi1`, `phi2` (radians).
///
/// # Safety
/// `rho` must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn oe_fidelity_w(rho: *const OeDensity, phi1: f64, phi2: f64, out: *mut f64) -> OeStatus {
    guard(|| {
        let rho = deref(rho, "rho")?;
        write(out, entanglement::fidelity_pure(&rho.0, &TargetState::w(phi1, phi2))?)
    })
}

/// Uhlmann fidelity between two density matrices.
///
/// # Safety
/// Handles must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn oe_fidelity_mixed(a: *const OeDensity, b: *const OeDensity, out: *mut f64) -> OeStatus {
    guard(|| {
        let a = deref(a, "a")?;
        let b = deref(b, "b")?;
        write(out, entanglement::fidelity_mixed(&a.0, &b.0)?)
    })
}

/// Maximizes W fidelity over the two relative phases.
///
/// # Safety
/// `rho` must be live; all out-pointers writable.
#[no_mangle]
pub unsafe extern "C" fn oe_optimize_w_phases(
    rho: *const OeDensity,
    phi1: *mut f64,
    phi2: *mut f64,
    fidelity: *mut f64,
) -> OeStatus {
    guard(|| {
        let rho = deref(rho, "rho")?;
        let opt = entanglement::optimize_w_phases(&rho.0)?;
        write(phi1, opt.phi1)?;
        write(phi2, opt.phi2)?;
        write(fidelity, opt.fidelity)
    })
}

/// Witness classification of a three-qubit state. `margin` is added to both bounds.
///
/// # Safety
/// `rho` must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn oe_classify(rho: *const OeDensity, margin: f64, out: *mut OeClassification) -> OeStatus {
    guard(|| {
        let rho = deref(rho, "rho")?;
        let r = entanglement::classify_with_margin(&rho.0, margin)?;
        write(
            out,
            OeClassification {
                fidelity_ghz: r.fidelity_ghz,
                fidelity_w_max: r.fidelity_w_max,
                phi1: r.phi1,
                phi2: r.phi2,
                ghz_witness_passed: r.ghz_witness_passed,
                w_witness_passed: r.w_witness_passed,
                offdiag_norm: r.offdiag_norm,
                verdict: match r.verdict {
                    Verdict::GenuineGhzWitnessed => OeVerdict::GenuineGhzWitnessed,
                    Verdict::GenuineWWitnessed => OeVerdict::GenuineWWitnessed,
                    Verdict::WitnessInconclusive => OeVerdict::WitnessInconclusive,
                },
            },
        )
    })
}

fn write<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null("out"));
    }
    unsafe { out.write(value) };
    Ok(())
}
