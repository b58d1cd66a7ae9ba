//! C ABI over the `fktoda` library.
//!
//! Objects are opaque handles released with their `*_free` function. Every
//! fallible call returns an [`FktStatus`]; the message of the last failure on
//! the calling thread is available from [`fkt_last_error`]. Complex numbers
//! cross the boundary as interleaved `(re, im)` doubles, and a 2x2 block as 8
//! doubles in row-major order.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use fktoda::blockcore::{
    commutator_residual, lattice_to_blocks, spectrum, Block2, Coef, LatticeState, C64,
};
use fktoda::cli::{parse_config, RunConfig};
use fktoda::dynamics::{evolve_lattice, verify, FlowConfig, Trajectory};
use fktoda::functional::{moments_from_lattice, VectorFunctional};
use fktoda::inverse::reconstruct;
use fktoda::orthopoly::{weyl_function, WeylMethod};
use fktoda::Error;

/// Result codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FktStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    Config = 3,
    BufferTooSmall = 4,
    StructureViolation = 10,
    TruncationTooSmall = 11,
    EigensolverFailure = 12,
    DegreeOverflow = 13,
    SingularNormalization = 14,
    SeriesNotConverged = 15,
    Singular = 16,
    QuasiDefiniteViolation = 17,
    StepRejected = 18,
    Panic = 99,
}

/// Lattice state at one time.
pub struct FktLattice(LatticeState);

/// Sampled solution of the lattice flow.
pub struct FktTrajectory(Trajectory);

/// Vector moment functional.
pub struct FktFunctional(VectorFunctional);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &Error) -> FktStatus {
    match e {
        Error::StructureViolation(_) => FktStatus::StructureViolation,
        Error::TruncationTooSmall(_) => FktStatus::TruncationTooSmall,
        Error::EigensolverFailure => FktStatus::EigensolverFailure,
        Error::DegreeOverflow { .. } => FktStatus::DegreeOverflow,
        Error::SingularNormalization { .. } => FktStatus::SingularNormalization,
        Error::SeriesNotConverged(_) => FktStatus::SeriesNotConverged,
        Error::SingularC { .. }
        | Error::SingularResolvent { .. }
        | Error::SingularDelta { .. }
        | Error::SingularN { .. } => FktStatus::Singular,
        Error::QuasiDefiniteViolation { .. } => FktStatus::QuasiDefiniteViolation,
        Error::StepRejected { .. } => FktStatus::StepRejected,
        Error::InvalidInput(_) => FktStatus::InvalidInput,
    }
}

struct Fail(FktStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Fail {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(FktStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, recording its error message and turning panics into `Panic`.
fn guarded(f: impl FnOnce() -> Result<(), Fail>) -> FktStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            FktStatus::Ok
        }
        Ok(Err(Fail(code, msg))) => {
            set_error(msg);
            code
        }
        Err(_) => {
            set_error("internal panic");
            FktStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out_slice<'a>(p: *mut f64, len: usize, what: &str) -> Result<&'a mut [f64], Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output handle"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail(FktStatus::InvalidInput, format!("{what} is not UTF-8")))
}

fn coef(name: c_char) -> Result<Coef, Fail> {
    match name as u8 {
        b'a' => Ok(Coef::A),
        b'b' => Ok(Coef::B),
        b'c' => Ok(Coef::C),
        b'd' => Ok(Coef::D),
        other => Err(Fail(FktStatus::InvalidInput, format!("unknown coefficient {:?}", other as char))),
    }
}

fn write_block(b: &Block2, out: &mut [f64]) {
    for (k, z) in b.0.iter().flatten().enumerate() {
        out[2 * k] = z.re;
        out[2 * k + 1] = z.im;
    }
}

fn config(json: &str) -> Result<RunConfig, Fail> {
    parse_config(json).map_err(|e| Fail(FktStatus::Config, e.to_string()))
}

/// Copies the last error message of this thread into `buf` (NUL terminated,
/// truncated to `cap`) and returns the full message length in bytes, or 0
/// when the last call succeeded.
///
/// # Safety
/// `buf` must be null or point to `cap` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn fkt_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// All-zero lattice with `n_blocks` block rows.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fkt_lattice_zeros(n_blocks: usize, out: *mut *mut FktLattice) -> FktStatus {
    guarded(|| {
        if n_blocks == 0 {
            return Err(Fail(FktStatus::InvalidInput, "n_blocks must be at least 1".into()));
        }
        put(out, FktLattice(LatticeState::zeros(n_blocks)))
    })
}

/// Initial lattice described by a JSON run configuration (same format as the CLI).
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fkt_lattice_from_config(json: *const c_char, out: *mut *mut FktLattice) -> FktStatus {
    guarded(|| {
        let cfg = config(c_str(json, "json")?)?;
        let s = cfg.initial_state().map_err(|e| Fail(FktStatus::Config, e.to_string()))?;
        put(out, FktLattice(s))
    })
}

/// # Safety
/// `l` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fkt_lattice_free(l: *mut FktLattice) {
    if !l.is_null() {
        drop(Box::from_raw(l));
    }
}

/// Number of block rows, or 0 for a null handle.
///
/// # Safety
/// `l` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fkt_lattice_n_blocks(l: *const FktLattice) -> usize {
    l.as_ref().map_or(0, |l| l.0.n_blocks())
}

/// Time stamp of the state, or NaN for a null handle.
///
/// # Safety
/// `l` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fkt_lattice_time(l: *const FktLattice) -> f64 {
    l.as_ref().map_or(f64::NAN, |l| l.0.t)
}

/// Reads coefficient `name_n` (`name` one of 'a', 'b', 'c', 'd'; `n` 1-based).
/// Indices outside the stored range read as zero.
///
/// # Safety
/// `l` must be a live handle and `out` must point to 2 doubles.
#[no_mangle]
pub unsafe extern "C" fn fkt_lattice_get(l: *const FktLattice, name: c_char, n: i64, out: *mut f64) -> FktStatus {
    guarded(|| {
        let l = deref(l, "lattice")?;
        let z = l.0.get(coef(name)?, n);
        let out = out_slice(out, 2, "out")?;
        out.copy_from_slice(&[z.re, z.im]);
        Ok(())
    })
}

/// Sets coefficient `name_n` to `re + i im`.
///
/// # Safety
/// `l` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn fkt_lattice_set(l: *mut FktLattice, name: c_char, n: usize, re: f64, im: f64) -> FktStatus {
    guarded(|| {
        let l = l.as_mut().ok_or_else(|| null("lattice"))?;
        l.0.set(coef(name)?, n, C64::new(re, im))?;
        Ok(())
    })
}

/// Largest entry of `dJ/dt - [J, J_-]` over the interior rows.
///
/// # Safety
/// `l` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fkt_lattice_commutator_residual(l: *const FktLattice, out: *mut f64) -> FktStatus {
    guarded(|| {
        let l = deref(l, "lattice")?;
        let out = out_slice(out, 1, "out")?;
        out[0] = commutator_residual(&l.0);
        Ok(())
    })
}

/// Eigenvalues of the truncated operator, interleaved, sorted by real then
/// imaginary part. `*len` receives the count (2 N); the call fails with
/// `BufferTooSmall` when `cap` (in complex values) is smaller.
///
/// # Safety
/// `l` must be a live handle, `out` must point to `2 * cap` doubles and `len` be valid.
#[no_mangle]
pub unsafe extern "C" fn fkt_lattice_spectrum(
    l: *const FktLattice,
    out: *mut f64,
    cap: usize,
    len: *mut usize,
) -> FktStatus {
    guarded(|| {
        let l = deref(l, "lattice")?;
        if len.is_null() {
            return Err(null("len"));
        }
        let ev = spectrum(&lattice_to_blocks(&l.0))?;
        *len = ev.len();
        if cap < ev.len() {
            return Err(Fail(FktStatus::BufferTooSmall, format!("need room for {} eigenvalues", ev.len())));
        }
        let out = out_slice(out, 2 * ev.len(), "out")?;
        for (k, z) in ev.iter().enumerate() {
            out[2 * k] = z.re;
            out[2 * k + 1] = z.im;
        }
        Ok(())
    })
}

/// Corner block of the resolvent, `((zI - J)^{-1})_{00}`, from the finite section.
///
/// # Safety
/// `l` must be a live handle and `out` must point to 8 doubles.
#[no_mangle]
pub unsafe extern "C" fn fkt_lattice_weyl(l: *const FktLattice, re: f64, im: f64, out: *mut f64) -> FktStatus {
    guarded(|| {
        let l = deref(l, "lattice")?;
        let r = weyl_function(&lattice_to_blocks(&l.0), C64::new(re, im), WeylMethod::FiniteSection)?;
        write_block(&r, out_slice(out, 8, "out")?);
        Ok(())
    })
}

/// Integrates the lattice with RK4 step `h` up to `t_end`, keeping every
/// `record_every`-th step. `t_end` must be a whole number of recorded steps.
///
/// # Safety
/// `l` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fkt_evolve(
    l: *const FktLattice,
    h: f64,
    t_end: f64,
    record_every: usize,
    out: *mut *mut FktTrajectory,
) -> FktStatus {
    guarded(|| {
        let l = deref(l, "lattice")?;
        let cfg = FlowConfig { h, t_end, record_every, ..FlowConfig::default() };
        put(out, FktTrajectory(evolve_lattice(&l.0, &cfg)?))
    })
}

/// # Safety
/// `t` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fkt_trajectory_free(t: *mut FktTrajectory) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Number of recorded states, or 0 for a null handle.
///
/// # Safety
/// `t` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fkt_trajectory_len(t: *const FktTrajectory) -> usize {
    t.as_ref().map_or(0, |t| t.0.len())
}

/// Copy of recorded state `index` as a new lattice handle.
///
/// # Safety
/// `t` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fkt_trajectory_state(
    t: *const FktTrajectory,
    index: usize,
    out: *mut *mut FktLattice,
) -> FktStatus {
    guarded(|| {
        let t = deref(t, "trajectory")?;
        let s = t.0.states.get(index).ok_or_else(|| {
            Fail(FktStatus::InvalidInput, format!("index {index} out of range 0..{}", t.0.len()))
        })?;
        put(out, FktLattice(s.clone()))
    })
}

/// Scalar moments `mu^1_k, mu^2_k` for `k <= n_max`, read off the lattice.
///
/// # Safety
/// `l` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fkt_functional_from_lattice(
    l: *const FktLattice,
    n_max: usize,
    out: *mut *mut FktFunctional,
) -> FktStatus {
    guarded(|| {
        let l = deref(l, "lattice")?;
        put(out, FktFunctional(moments_from_lattice(&l.0, n_max)?))
    })
}

/// # Safety
/// `u` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fkt_functional_free(u: *mut FktFunctional) {
    if !u.is_null() {
        drop(Box::from_raw(u));
    }
}

/// Number of block moments stored, or 0 for a null handle.
///
/// # Safety
/// `u` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fkt_functional_n_block_moments(u: *const FktFunctional) -> usize {
    u.as_ref().map_or(0, |u| u.0.n_block_moments())
}

/// Block moment `U(x^{2j} P_0)`.
///
/// # Safety
/// `u` must be a live handle and `out` must point to 8 doubles.
#[no_mangle]
pub unsafe extern "C" fn fkt_functional_block_moment(u: *const FktFunctional, j: usize, out: *mut f64) -> FktStatus {
    guarded(|| {
        let u = deref(u, "functional")?;
        write_block(&u.0.block_moment(j)?, out_slice(out, 8, "out")?);
        Ok(())
    })
}

/// Recurrence blocks `A_m, B_m, C_m` for `m <= m_max` recovered from a
/// functional and the gauge coefficient `a_1`. `out` receives
/// `24 * (m_max + 1)` doubles: for each order the blocks A, B, C.
///
/// # Safety
/// `u` must be a live handle and `out` must point to `24 * (m_max + 1)` doubles.
#[no_mangle]
pub unsafe extern "C" fn fkt_reconstruct(
    u: *const FktFunctional,
    a1_re: f64,
    a1_im: f64,
    m_max: usize,
    out: *mut f64,
) -> FktStatus {
    guarded(|| {
        let u = deref(u, "functional")?;
        let rep = reconstruct(&u.0, C64::new(a1_re, a1_im), m_max)?;
        let out = out_slice(out, 24 * (m_max + 1), "out")?;
        for m in 0..=m_max {
            let j = &rep.jacobi;
            for (k, b) in [j.a[m], j.b[m], j.c[m]].iter().enumerate() {
                write_block(b, &mut out[24 * m + 8 * k..24 * m + 8 * k + 8]);
            }
        }
        Ok(())
    })
}

/// Runs the full verification for a JSON run configuration and returns the
/// report as a JSON string, to be released with [`fkt_string_free`].
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fkt_verify_json(json: *const c_char, out: *mut *mut c_char) -> FktStatus {
    guarded(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let cfg = config(c_str(json, "json")?)?;
        let s0 = cfg.initial_state().map_err(|e| Fail(FktStatus::Config, e.to_string()))?;
        let (_, report) = verify(&s0, &cfg.flow)?;
        let text = serde_json::to_string(&report).expect("report serializes");
        *out = CString::new(text).expect("JSON has no NUL").into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fkt_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
