//! C ABI over the `llmfrac` core.
//!
//! Models and corpora are opaque heap handles created by `*_load`/`*_fit`
//! and released with the matching `*_free`. Every fallible call returns an
//! [`LfStatus`]; on failure, [`lf_last_error`] gives a message for the
//! calling thread. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use llmfrac::corpus::{load_corpus, Corpus};
use llmfrac::estimator::{BootstrapConfig, Flag, UnitScores, DEFAULT_TOL};
use llmfrac::model::{fit, load_model, save_model, FitConfig, TokenModel};
use llmfrac::Error;

/// Result codes. Zero is success.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    FileNotFound = 3,
    MalformedInput = 4,
    EmptyCorpus = 5,
    InvalidArgument = 6,
    TooFewDocuments = 7,
    EmptyVocabulary = 8,
    SchemaVersionMismatch = 9,
    CorruptModel = 10,
    FlatLikelihood = 11,
    Io = 12,
    Panic = 13,
    Other = 14,
}

impl From<&Error> for LfStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::FileNotFound(_) => LfStatus::FileNotFound,
            Error::MalformedRecord { .. }
            | Error::InvalidDocument { .. }
            | Error::DuplicateId(_)
            | Error::Json(_)
            | Error::Csv(_) => LfStatus::MalformedInput,
            Error::EmptyCorpus => LfStatus::EmptyCorpus,
            Error::InvalidArgument(_) | Error::UnknownField(_) => LfStatus::InvalidArgument,
            Error::TooFewDocuments { .. } => LfStatus::TooFewDocuments,
            Error::EmptyVocabulary => LfStatus::EmptyVocabulary,
            Error::SchemaVersionMismatch { .. } => LfStatus::SchemaVersionMismatch,
            Error::CorruptModel(_) => LfStatus::CorruptModel,
            Error::FlatLikelihood => LfStatus::FlatLikelihood,
            Error::Io(_) => LfStatus::Io,
            _ => LfStatus::Other,
        }
    }
}

/// Set in [`LfEstimate::flags`] when α̂ sits at 0.
pub const LF_FLAG_BOUNDARY_LOW: u32 = 1;
/// Set in [`LfEstimate::flags`] when α̂ sits at 1.
pub const LF_FLAG_BOUNDARY_HIGH: u32 = 2;
/// Set when the model has tokens with identical P and Q.
pub const LF_FLAG_UNINFORMATIVE_TOKENS: u32 = 4;

/// Point estimate with an optional bootstrap interval. `ci_low` and
/// `ci_high` are NaN when no interval was requested.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LfEstimate {
    pub alpha: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub log_likelihood: f64,
    pub n_units: u64,
    pub flags: u32,
}

/// Opaque fitted model.
pub struct LfModel(TokenModel);

/// Opaque document collection.
pub struct LfCorpus(Corpus);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

/// Runs `f`, recording any error or panic for [`lf_last_error`].
fn guard(f: impl FnOnce() -> Result<(), LfStatusError>) -> LfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LfStatus::Ok,
        Ok(Err(LfStatusError(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic".into());
            LfStatus::Panic
        }
    }
}

struct LfStatusError(LfStatus, String);

impl From<Error> for LfStatusError {
    fn from(e: Error) -> Self {
        LfStatusError(LfStatus::from(&e), e.to_string())
    }
}

fn null(what: &str) -> LfStatusError {
    LfStatusError(LfStatus::NullPointer, format!("{what} is null"))
}

/// # Safety
/// `p` must be null or a valid NUL-terminated string.
unsafe fn utf8_path<'a>(p: *const c_char) -> Result<&'a str, LfStatusError> {
    if p.is_null() {
        return Err(null("path"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| LfStatusError(LfStatus::InvalidUtf8, "path is not valid UTF-8".into()))
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn lf_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn lf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Loads a JSONL corpus. Malformed lines are skipped.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lf_corpus_load(path: *const c_char, out: *mut *mut LfCorpus) -> LfStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let report = load_corpus(utf8_path(path)?)?;
        *out = Box::into_raw(Box::new(LfCorpus(report.corpus)));
        Ok(())
    })
}

/// Number of documents, or 0 for a null handle.
///
/// # Safety
/// `corpus` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lf_corpus_len(corpus: *const LfCorpus) -> u64 {
    corpus.as_ref().map_or(0, |c| c.0.len() as u64)
}

/// # Safety
/// `corpus` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lf_corpus_free(corpus: *mut LfCorpus) {
    if !corpus.is_null() {
        drop(Box::from_raw(corpus));
    }
}

/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lf_model_load(path: *const c_char, out: *mut *mut LfModel) -> LfStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let model = load_model(utf8_path(path)?)?;
        *out = Box::into_raw(Box::new(LfModel(model)));
        Ok(())
    })
}

/// Fits a document-level model with default settings.
///
/// # Safety
/// `human` and `llm` must be live corpus handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lf_model_fit(
    human: *const LfCorpus,
    llm: *const LfCorpus,
    out: *mut *mut LfModel,
) -> LfStatus {
    guard(|| {
        let human = human.as_ref().ok_or_else(|| null("human"))?;
        let llm = llm.as_ref().ok_or_else(|| null("llm"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let model = fit(&human.0, &llm.0, &FitConfig::default())?;
        *out = Box::into_raw(Box::new(LfModel(model)));
        Ok(())
    })
}

/// # Safety
/// `model` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn lf_model_save(model: *const LfModel, path: *const c_char) -> LfStatus {
    guard(|| {
        let model = model.as_ref().ok_or_else(|| null("model"))?;
        save_model(&model.0, utf8_path(path)?)?;
        Ok(())
    })
}

/// Vocabulary size, or 0 for a null handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lf_model_vocab_size(model: *const LfModel) -> u64 {
    model.as_ref().map_or(0, |m| m.0.vocab().len() as u64)
}

/// # Safety
/// `model` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lf_model_free(model: *mut LfModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Estimates α for `corpus`. With `replicates` = 0 only the point estimate
/// is computed; otherwise a percentile interval at `level` from that many
/// bootstrap replicates (at least 100) drawn with `seed`.
///
/// # Safety
/// `model` and `corpus` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lf_estimate(
    model: *const LfModel,
    corpus: *const LfCorpus,
    replicates: u32,
    level: f64,
    seed: u64,
    out: *mut LfEstimate,
) -> LfStatus {
    guard(|| {
        let model = model.as_ref().ok_or_else(|| null("model"))?;
        let corpus = corpus.as_ref().ok_or_else(|| null("corpus"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let scores = UnitScores::from_corpus(&model.0, &corpus.0);
        let r = if replicates == 0 {
            scores.mle(DEFAULT_TOL)?
        } else {
            let cfg = BootstrapConfig {
                level,
                ..BootstrapConfig::new(replicates as usize, seed)
            };
            scores.bootstrap(&cfg)?
        };
        let flags = r.flags.iter().fold(0, |acc, f| {
            acc | match f {
                Flag::BoundaryLow => LF_FLAG_BOUNDARY_LOW,
                Flag::BoundaryHigh => LF_FLAG_BOUNDARY_HIGH,
                Flag::FlatLikelihoodRemovedTokens => LF_FLAG_UNINFORMATIVE_TOKENS,
            }
        });
        *out = LfEstimate {
            alpha: r.alpha,
            ci_low: r.ci_low.unwrap_or(f64::NAN),
            ci_high: r.ci_high.unwrap_or(f64::NAN),
            log_likelihood: r.log_likelihood,
            n_units: r.n_units as u64,
            flags,
        };
        Ok(())
    })
}
