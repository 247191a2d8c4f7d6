//! C ABI over the exact IET kernel and the translation-surface geometry.
//!
//! Every function returns a [`TlStatus`]. Objects are opaque handles created by
//! `*_new`-style constructors and released with the matching `*_free`. Strings
//! and arrays are written into caller buffers; when a buffer is too small the
//! call returns `TL_STATUS_BUFFER_TOO_SMALL` and reports the required size.
//! The message of the last failure on the calling thread is available from
//! [`tl_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use teich_lab::rational::{format_rational, parse_rational, to_f64};
use teich_lab::surface::builtin;
use teich_lab::{Error, Iet, Permutation, SL2Matrix, TranslationSurface};

/// Result code of every exported function.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidPermutation = 3,
    InvalidIet = 4,
    InvalidSurface = 5,
    BudgetExceeded = 6,
    QuadratureUnstable = 7,
    BufferTooSmall = 8,
    Numerical = 9,
    Panic = 10,
    Other = 11,
}

/// Opaque permutation handle.
pub struct TlPermutation(Permutation);

/// Opaque interval exchange handle.
pub struct TlIet(Iet);

/// Opaque translation surface handle.
pub struct TlSurface(TranslationSurface);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> TlStatus {
    match e {
        Error::InvalidPermutation(_) | Error::NotIrreducible(_) => TlStatus::InvalidPermutation,
        Error::InvalidIet(_) => TlStatus::InvalidIet,
        Error::InvalidSurface(_) | Error::DegenerateGeometry(_) | Error::InvalidSuspension(_) => {
            TlStatus::InvalidSurface
        }
        Error::BudgetExceeded { .. } => TlStatus::BudgetExceeded,
        Error::QuadratureUnstable { .. } => TlStatus::QuadratureUnstable,
        Error::Precondition(_)
        | Error::Config(_)
        | Error::OutOfDomain(_)
        | Error::DimensionMismatch { .. }
        | Error::Json(_) => TlStatus::InvalidArgument,
        Error::TypeWNonTermination { .. }
        | Error::NotTypeW { .. }
        | Error::SingularTrajectory { .. }
        | Error::InsufficientLevels { .. }
        | Error::InconsistentLevels(_) => TlStatus::Numerical,
        _ => TlStatus::Other,
    }
}

struct Fail(TlStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

type FfiResult = Result<(), Fail>;

fn null(what: &str) -> Fail {
    Fail(TlStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, records any failure and converts panics into `TL_STATUS_PANIC`.
fn guard(f: impl FnOnce() -> FfiResult) -> TlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TlStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(format!("internal panic: {msg}"));
            TlStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(TlStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn put<T>(out: *mut T, value: T, what: &str) -> FfiResult {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn put_handle<T>(out: *mut *mut T, value: T) -> FfiResult {
    if out.is_null() {
        return Err(null("out"));
    }
    out.write(Box::into_raw(Box::new(value)));
    Ok(())
}

/// Writes `s` with a trailing nul; `needed` receives the full size including the nul.
unsafe fn put_string(s: &str, buf: *mut c_char, cap: usize, needed: *mut usize) -> FfiResult {
    let size = s.len() + 1;
    if !needed.is_null() {
        needed.write(size);
    }
    if buf.is_null() || cap < size {
        return Err(Fail(
            TlStatus::BufferTooSmall,
            format!("buffer of {cap} bytes, {size} needed"),
        ));
    }
    std::ptr::copy_nonoverlapping(s.as_ptr(), buf.cast::<u8>(), s.len());
    buf.add(s.len()).write(0);
    Ok(())
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn tl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the last error message of the calling thread into `buf`.
///
/// # Safety
/// `buf` must be valid for `cap` bytes or null; `needed` must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn tl_last_error_message(buf: *mut c_char, cap: usize, needed: *mut usize) -> TlStatus {
    let msg = LAST_ERROR.with(|e| {
        e.borrow()
            .as_ref()
            .map(|c| c.to_string_lossy().into_owned())
            .unwrap_or_default()
    });
    // Reporting must not overwrite the message being reported.
    match put_string(&msg, buf, cap, needed) {
        Ok(()) => TlStatus::Ok,
        Err(Fail(status, _)) => status,
    }
}

// ---------------------------------------------------------------- permutations

/// Permutation from one-based images `images[0..d]`.
///
/// # Safety
/// `images` must point to `d` values; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn tl_permutation_new(images: *const usize, d: usize, out: *mut *mut TlPermutation) -> TlStatus {
    guard(|| {
        let images = slice(images, d, "images")?.to_vec();
        put_handle(out, TlPermutation(Permutation::new(images)?))
    })
}

/// The reversal `(d, d-1, …, 1)`.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn tl_permutation_reversal(d: usize, out: *mut *mut TlPermutation) -> TlStatus {
    guard(|| {
        if d == 0 {
            return Err(Fail(TlStatus::InvalidArgument, "d must be ≥ 1".into()));
        }
        put_handle(out, TlPermutation(Permutation::reversal(d)))
    })
}

/// # Safety
/// `p` must come from a permutation constructor and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn tl_permutation_free(p: *mut TlPermutation) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn tl_permutation_degree(p: *const TlPermutation, out: *mut usize) -> TlStatus {
    guard(|| put(out, deref(p, "permutation")?.0.d(), "out"))
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn tl_permutation_is_irreducible(p: *const TlPermutation, out: *mut bool) -> TlStatus {
    guard(|| put(out, deref(p, "permutation")?.0.is_irreducible(), "out"))
}

/// Type-W classification; fails for reducible permutations.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn tl_permutation_is_type_w(p: *const TlPermutation, out: *mut bool) -> TlStatus {
    guard(|| {
        let r = deref(p, "permutation")?.0.classify_type_w()?;
        put(out, r.type_w, "out")
    })
}

// ------------------------------------------------------------------------ IETs

/// IET with lengths given as strings (`"p/q"`, integers or finite decimals) and
/// one-based permutation images.
///
/// # Safety
/// `lengths` and `images` must point to `d` entries; each length must be a
/// nul-terminated string; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn tl_iet_new(
    lengths: *const *const c_char,
    images: *const usize,
    d: usize,
    out: *mut *mut TlIet,
) -> TlStatus {
    guard(|| {
        let raw = slice(lengths, d, "lengths")?;
        let mut ls = Vec::with_capacity(d);
        for &p in raw {
            ls.push(parse_rational(c_str(p, "length")?)?);
        }
        let perm = Permutation::new(slice(images, d, "images")?.to_vec())?;
        put_handle(out, TlIet(Iet::new(ls, perm)?))
    })
}

/// # Safety
/// `t` must come from [`tl_iet_new`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn tl_iet_free(t: *mut TlIet) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// `T(x)` as an exact rational string.
///
/// # Safety
/// `x` must be a nul-terminated string; `buf` valid for `cap` bytes or null.
#[no_mangle]
pub unsafe extern "C" fn tl_iet_evaluate(
    t: *const TlIet,
    x: *const c_char,
    buf: *mut c_char,
    cap: usize,
    needed: *mut usize,
) -> TlStatus {
    guard(|| {
        let x = parse_rational(c_str(x, "x")?)?;
        let y = deref(t, "iet")?.0.evaluate(&x)?;
        put_string(&format_rational(&y), buf, cap, needed)
    })
}

/// Shortest interval `ε_n` of the depth-`n` partition as an exact rational string.
///
/// # Safety
/// `buf` must be valid for `cap` bytes or null.
#[no_mangle]
pub unsafe extern "C" fn tl_iet_epsilon_n(
    t: *const TlIet,
    n: usize,
    buf: *mut c_char,
    cap: usize,
    needed: *mut usize,
) -> TlStatus {
    guard(|| {
        let r = deref(t, "iet")?.0.partition_report(n)?;
        put_string(&format_rational(&r.epsilon_n), buf, cap, needed)
    })
}

/// `n · ε_n` rounded to a double.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn tl_iet_n_epsilon_n(t: *const TlIet, n: usize, out: *mut f64) -> TlStatus {
    guard(|| {
        let r = deref(t, "iet")?.0.partition_report(n)?;
        put(out, to_f64(&r.n_epsilon_n), "out")
    })
}

// -------------------------------------------------------------------- surfaces

/// Built-in surface by name: `square_torus`, `regular_octagon`, `double_pentagon`.
///
/// # Safety
/// `name` must be a nul-terminated string; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn tl_surface_builtin(name: *const c_char, out: *mut *mut TlSurface) -> TlStatus {
    guard(|| put_handle(out, TlSurface(builtin(c_str(name, "name")?)?)))
}

/// Surface from its JSON polygon-and-gluing description.
///
/// # Safety
/// `json` must be a nul-terminated string; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn tl_surface_from_json(json: *const c_char, out: *mut *mut TlSurface) -> TlStatus {
    guard(|| {
        let x = TranslationSurface::from_json_str(c_str(json, "json")?)?;
        put_handle(out, TlSurface(x))
    })
}

/// # Safety
/// `buf` must be valid for `cap` bytes or null.
#[no_mangle]
pub unsafe extern "C" fn tl_surface_to_json(
    s: *const TlSurface,
    buf: *mut c_char,
    cap: usize,
    needed: *mut usize,
) -> TlStatus {
    guard(|| {
        let text = deref(s, "surface")?.0.to_json_string()?;
        put_string(&text, buf, cap, needed)
    })
}

/// # Safety
/// `s` must come from a surface constructor and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn tl_surface_free(s: *mut TlSurface) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// New surface `[[a, b], [c, d]] · s`; the matrix must have determinant 1.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn tl_surface_act(
    s: *const TlSurface,
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    out: *mut *mut TlSurface,
) -> TlStatus {
    guard(|| {
        let m = SL2Matrix::new(a, b, c, d)?;
        let y = deref(s, "surface")?.0.act(&m)?;
        put_handle(out, TlSurface(y))
    })
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn tl_surface_area(s: *const TlSurface, out: *mut f64) -> TlStatus {
    guard(|| put(out, deref(s, "surface")?.0.area(), "out"))
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn tl_surface_genus(s: *const TlSurface, out: *mut usize) -> TlStatus {
    guard(|| put(out, deref(s, "surface")?.0.genus(), "out"))
}

/// Max-norm systole.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn tl_surface_systole(s: *const TlSurface, out: *mut f64) -> TlStatus {
    guard(|| put(out, deref(s, "surface")?.0.systole()?, "out"))
}

/// Holonomies of the saddle connections with max-norm at most `bound`, one per
/// `±` pair, as interleaved `(re, im)` pairs. `count` receives the number of
/// connections; `holonomies` must hold `2 · cap` doubles.
///
/// # Safety
/// `holonomies` must be valid for `2 · cap` doubles or null; `count` must be valid.
#[no_mangle]
pub unsafe extern "C" fn tl_surface_saddle_connections(
    s: *const TlSurface,
    bound: f64,
    holonomies: *mut f64,
    cap: usize,
    count: *mut usize,
) -> TlStatus {
    guard(|| {
        let found = deref(s, "surface")?.0.saddle_connections(bound)?;
        put(count, found.len(), "count")?;
        if holonomies.is_null() || cap < found.len() {
            return Err(Fail(
                TlStatus::BufferTooSmall,
                format!("room for {cap} connections, {} found", found.len()),
            ));
        }
        for (k, c) in found.iter().enumerate() {
            holonomies.add(2 * k).write(c.holonomy.re);
            holonomies.add(2 * k + 1).write(c.holonomy.im);
        }
        Ok(())
    })
}
