//! C ABI over the proxycert core.
//!
//! Objects cross the boundary as opaque handles created by `pc_*_load` /
//! `pc_*_parse` and released with the matching `pc_*_free`. Every fallible
//! call returns a [`PcStatus`]; on failure a description is available from
//! [`pc_last_error`] until the next call on the same thread. A domain
//! rejection (a chain or credential that does not validate) is not an
//! error: it yields `PC_STATUS_OK` and an outcome whose reason is set.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use proxycert::cert::parse_certificates;
use proxycert::dc::{validate_dc, DelegatedCredential};
use proxycert::matrix::{BenefitLevel, Matrix};
use proxycert::{Certificate, DnsName, Instant, SignatureScheme};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PcStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Malformed = 4,
    InvalidArgument = 5,
    NotFound = 6,
    Panic = 7,
}

/// Levels of the scheme comparison table.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PcLevel {
    No = 0,
    Partial = 1,
    Yes = 2,
}

/// Trust anchors.
pub struct PcAnchors(Vec<Certificate>);

/// A presented chain, root-most certificate first.
pub struct PcChain(Vec<Certificate>);

/// Result of a validation: accepted, or rejected with a reason code.
pub struct PcOutcome {
    reason: Option<CString>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(PcStatus, String);

impl From<proxycert::Error> for Failure {
    fn from(e: proxycert::Error) -> Self {
        let status = match e {
            proxycert::Error::Io { .. } => PcStatus::Io,
            _ => PcStatus::Malformed,
        };
        Failure(status, e.to_string())
    }
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

/// Runs `f`, converting failures and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> PcStatus {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PcStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_last_error(message);
            status
        }
        Err(_) => {
            set_last_error("internal panic".into());
            PcStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(PcStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(PcStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| Failure(PcStatus::NullArgument, format!("{what} is null")))
}

fn out_ptr<T>(out: *mut *mut T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure(PcStatus::NullArgument, "output pointer is null".into()));
    }
    Ok(())
}

fn scheme(s: &str) -> Result<SignatureScheme, Failure> {
    s.parse().map_err(|e: proxycert::Error| Failure(PcStatus::InvalidArgument, e.to_string()))
}

fn read_certificates(path: &Path) -> Result<Vec<Certificate>, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure(PcStatus::Io, format!("{}: {e}", path.display())))?;
    Ok(parse_certificates(&text)?)
}

/// Message describing the last failure on this thread, or null. Owned by the
/// library; valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn pc_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Loads anchors from a certificate file or from every `.pcert` file in a
/// directory.
///
/// # Safety
/// `path` must be a valid nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pc_anchors_load(path: *const c_char, out: *mut *mut PcAnchors) -> PcStatus {
    guard(|| {
        out_ptr(out)?;
        let path = text(path, "path")?;
        let anchors = proxycert::cli::load_anchors(Path::new(path))?;
        *out = Box::into_raw(Box::new(PcAnchors(anchors)));
        Ok(())
    })
}

/// # Safety
/// `anchors` must be null or a handle from [`pc_anchors_load`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pc_anchors_free(anchors: *mut PcAnchors) {
    if !anchors.is_null() {
        drop(Box::from_raw(anchors));
    }
}

/// Parses a chain from document text.
///
/// # Safety
/// `document` must be a valid nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pc_chain_parse(document: *const c_char, out: *mut *mut PcChain) -> PcStatus {
    guard(|| {
        out_ptr(out)?;
        let certs = parse_certificates(text(document, "document")?)?;
        *out = Box::into_raw(Box::new(PcChain(certs)));
        Ok(())
    })
}

/// Loads a chain from a certificate file.
///
/// # Safety
/// `path` must be a valid nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pc_chain_load(path: *const c_char, out: *mut *mut PcChain) -> PcStatus {
    guard(|| {
        out_ptr(out)?;
        let certs = read_certificates(Path::new(text(path, "path")?))?;
        *out = Box::into_raw(Box::new(PcChain(certs)));
        Ok(())
    })
}

/// Number of certificates in the chain; 0 for null.
///
/// # Safety
/// `chain` must be null or a live chain handle.
#[no_mangle]
pub unsafe extern "C" fn pc_chain_len(chain: *const PcChain) -> usize {
    chain.as_ref().map_or(0, |c| c.0.len())
}

/// # Safety
/// `chain` must be null or a chain handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pc_chain_free(chain: *mut PcChain) {
    if !chain.is_null() {
        drop(Box::from_raw(chain));
    }
}

/// Validates `chain` for `target` at instant `at` (seconds).
///
/// # Safety
/// Handles must be live; `target` a valid nul-terminated string; `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn pc_validate_chain(
    chain: *const PcChain,
    anchors: *const PcAnchors,
    target: *const c_char,
    at: u64,
    out: *mut *mut PcOutcome,
) -> PcStatus {
    guard(|| {
        out_ptr(out)?;
        let chain = handle(chain, "chain")?;
        let anchors = handle(anchors, "anchors")?;
        let target: DnsName = text(target, "target")?
            .parse()
            .map_err(|e: proxycert::Error| Failure(PcStatus::InvalidArgument, e.to_string()))?;
        let outcome = proxycert::validate(&chain.0, &anchors.0, Instant(at), &target);
        let reason = outcome.reason.map(|r| CString::new(r.code()).expect("codes have no nul"));
        *out = Box::into_raw(Box::new(PcOutcome { reason }));
        Ok(())
    })
}

/// Validates a delegated-credential document against the end-entity
/// certificate that is the last certificate of `ee`, for a handshake using
/// `handshake_scheme` (e.g. `"ed25519"`).
///
/// # Safety
/// `dc_document` and `handshake_scheme` must be valid nul-terminated
/// strings; `ee` a live chain handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pc_validate_dc(
    dc_document: *const c_char,
    ee: *const PcChain,
    handshake_scheme: *const c_char,
    at: u64,
    out: *mut *mut PcOutcome,
) -> PcStatus {
    guard(|| {
        out_ptr(out)?;
        let (dc, _) = DelegatedCredential::from_document(text(dc_document, "dc_document")?)?;
        let ee = handle(ee, "ee")?
            .0
            .last()
            .ok_or_else(|| Failure(PcStatus::InvalidArgument, "end-entity chain is empty".into()))?;
        let scheme = scheme(text(handshake_scheme, "handshake_scheme")?)?;
        let reason = validate_dc(&dc, ee, Instant(at), scheme)
            .err()
            .map(|r| CString::new(r.to_string()).expect("codes have no nul"));
        *out = Box::into_raw(Box::new(PcOutcome { reason }));
        Ok(())
    })
}

/// 1 if the outcome is an acceptance, 0 otherwise (including null).
///
/// # Safety
/// `outcome` must be null or a live outcome handle.
#[no_mangle]
pub unsafe extern "C" fn pc_outcome_is_accept(outcome: *const PcOutcome) -> i32 {
    outcome.as_ref().map_or(0, |o| i32::from(o.reason.is_none()))
}

/// Reason code of a rejection (e.g. `"Expired"`), or null on acceptance.
/// Owned by the outcome.
///
/// # Safety
/// `outcome` must be null or a live outcome handle.
#[no_mangle]
pub unsafe extern "C" fn pc_outcome_reason(outcome: *const PcOutcome) -> *const c_char {
    outcome
        .as_ref()
        .and_then(|o| o.reason.as_ref())
        .map_or(ptr::null(), |r| r.as_ptr())
}

/// # Safety
/// `outcome` must be null or an outcome handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pc_outcome_free(outcome: *mut PcOutcome) {
    if !outcome.is_null() {
        drop(Box::from_raw(outcome));
    }
}

/// Looks up one cell of the built-in comparison table: `scheme` is a row
/// key such as `"s"`, `criterion` an id such as `"B2"` or a criterion name.
///
/// # Safety
/// Strings must be valid and nul-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pc_matrix_lookup(scheme: *const c_char, criterion: *const c_char, out: *mut PcLevel) -> PcStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure(PcStatus::NullArgument, "output pointer is null".into()));
        }
        let level = Matrix::builtin()
            .lookup(text(scheme, "scheme")?, text(criterion, "criterion")?)
            .map_err(|e| Failure(PcStatus::NotFound, e.to_string()))?;
        *out = match level {
            BenefitLevel::No => PcLevel::No,
            BenefitLevel::Partial => PcLevel::Partial,
            BenefitLevel::Yes => PcLevel::Yes,
        };
        Ok(())
    })
}
