//! C interface to the dialogre library.
//!
//! Objects cross the boundary as opaque handles (`DrCorpus`, `DrReport`)
//! that the caller releases with the matching `*_free` function. Every
//! fallible call returns a [`DrStatus`]; on failure `dr_last_error` returns a
//! message for the calling thread, valid until that thread's next call.
//! Strings returned through `char **` out-parameters are owned by the caller
//! and released with `dr_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::io::BufReader;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use dialogre::corpus::{parse_corpus, serialize_corpus, Corpus, CorpusError, Format};
use dialogre::io::{load_corpus, LoadError};
use dialogre::metrics::{
    conversational_f1, read_conversational_predictions, read_standard_predictions, standard_f1, EvalReport,
};
use dialogre::stats::summarize;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DrStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Parse = 4,
    Validation = 5,
    InvalidPredictions = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DrFormat {
    Auto = 0,
    Canonical = 1,
    Released = 2,
}

impl From<DrFormat> for Format {
    fn from(f: DrFormat) -> Format {
        match f {
            DrFormat::Auto => Format::Auto,
            DrFormat::Canonical => Format::Canonical,
            DrFormat::Released => Format::Released,
        }
    }
}

/// Precision, recall and F1 of one setting, as fractions in `[0, 1]`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DrScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub instances: usize,
}

/// A validated corpus.
pub struct DrCorpus {
    inner: Corpus,
}

/// Scores of one evaluation run.
pub struct DrReport {
    inner: EvalReport,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Failure(DrStatus, String);

type Res<T> = Result<T, Failure>;

/// Runs `f` with the error slot cleared, converting failures and panics
/// into a status code.
fn guard(f: impl FnOnce() -> Res<()>) -> DrStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DrStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            DrStatus::Panic
        }
    }
}

fn corpus_failure(e: &CorpusError) -> Failure {
    match e {
        CorpusError::Parse(p) => Failure(DrStatus::Parse, p.to_string()),
        CorpusError::Validation(v) => Failure(DrStatus::Validation, v.to_string()),
    }
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Res<&'a str> {
    if p.is_null() {
        return Err(Failure(DrStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(DrStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn bytes<'a>(p: *const u8, len: usize, what: &str) -> Res<&'a [u8]> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure(DrStatus::NullArgument, format!("{what} is null")));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Res<&'a T> {
    p.as_ref().ok_or_else(|| Failure(DrStatus::NullArgument, format!("{what} is null")))
}

fn out_ptr<T>(out: *mut T, what: &str) -> Res<()> {
    if out.is_null() {
        Err(Failure(DrStatus::NullArgument, format!("{what} is null")))
    } else {
        Ok(())
    }
}

unsafe fn emit_string(out: *mut *mut c_char, s: String) -> Res<()> {
    let c = CString::new(s).map_err(|_| Failure(DrStatus::InvalidUtf8, "output contains a NUL byte".into()))?;
    *out = c.into_raw();
    Ok(())
}

/// Message of the last failed call on this thread, or NULL.
#[no_mangle]
pub extern "C" fn dr_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn dr_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Loads and validates a corpus file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dr_corpus_load(path: *const c_char, format: DrFormat, out: *mut *mut DrCorpus) -> DrStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let path = c_str(path, "path")?;
        let corpus = load_corpus(Path::new(path), format.into()).map_err(|e| match &e {
            LoadError::Io { .. } => Failure(DrStatus::Io, e.to_string()),
            LoadError::Corpus { source, .. } => corpus_failure(source),
        })?;
        *out = Box::into_raw(Box::new(DrCorpus { inner: corpus }));
        Ok(())
    })
}

/// Parses and validates a corpus from memory.
///
/// # Safety
/// `data` must point to `len` readable bytes; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dr_corpus_parse(
    data: *const u8,
    len: usize,
    format: DrFormat,
    out: *mut *mut DrCorpus,
) -> DrStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let src = bytes(data, len, "data")?;
        let corpus = parse_corpus(src, format.into()).map_err(|e| corpus_failure(&e))?;
        *out = Box::into_raw(Box::new(DrCorpus { inner: corpus }));
        Ok(())
    })
}

/// Releases a corpus. NULL is ignored.
///
/// # Safety
/// `corpus` must come from `dr_corpus_load` or `dr_corpus_parse` and not be
/// freed twice.
#[no_mangle]
pub unsafe extern "C" fn dr_corpus_free(corpus: *mut DrCorpus) {
    if !corpus.is_null() {
        drop(Box::from_raw(corpus));
    }
}

/// Number of dialogues, 0 for NULL.
///
/// # Safety
/// `corpus` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dr_corpus_num_dialogues(corpus: *const DrCorpus) -> usize {
    corpus.as_ref().map_or(0, |c| c.inner.num_dialogues())
}

/// Number of argument-pair instances, 0 for NULL.
///
/// # Safety
/// `corpus` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dr_corpus_num_instances(corpus: *const DrCorpus) -> usize {
    corpus.as_ref().map_or(0, |c| c.inner.instances().len())
}

/// Number of `(instance, label)` triples, 0 for NULL.
///
/// # Safety
/// `corpus` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dr_corpus_num_triples(corpus: *const DrCorpus) -> usize {
    corpus.as_ref().map_or(0, |c| c.inner.num_triples())
}

/// Canonical JSON serialization of the corpus.
///
/// # Safety
/// `corpus` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dr_corpus_to_json(corpus: *const DrCorpus, out: *mut *mut c_char) -> DrStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let c = handle(corpus, "corpus")?;
        emit_string(out, serialize_corpus(&c.inner))
    })
}

/// Corpus statistics as JSON.
///
/// # Safety
/// `corpus` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dr_corpus_stats_json(corpus: *const DrCorpus, out: *mut *mut c_char) -> DrStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let c = handle(corpus, "corpus")?;
        emit_string(out, summarize(&c.inner).to_json())
    })
}

unsafe fn score(
    corpus: *const DrCorpus,
    data: *const u8,
    len: usize,
    out: *mut *mut DrReport,
    conversational: bool,
) -> DrStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let c = handle(corpus, "corpus")?;
        let reader = BufReader::new(bytes(data, len, "predictions")?);
        let bad = |e: dialogre::metrics::MetricsError| Failure(DrStatus::InvalidPredictions, e.to_string());
        let report = if conversational {
            conversational_f1(&c.inner, &read_conversational_predictions(reader).map_err(bad)?).map_err(bad)?
        } else {
            standard_f1(&c.inner, &read_standard_predictions(reader).map_err(bad)?).map_err(bad)?
        };
        *out = Box::into_raw(Box::new(DrReport { inner: report }));
        Ok(())
    })
}

/// Scores standard JSON Lines predictions (`len` bytes at `data`).
///
/// # Safety
/// `corpus` must be a live handle, `data` must point to `len` readable
/// bytes and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dr_score_standard(
    corpus: *const DrCorpus,
    data: *const u8,
    len: usize,
    out: *mut *mut DrReport,
) -> DrStatus {
    score(corpus, data, len, out, false)
}

/// Scores per-prefix conversational JSON Lines predictions.
///
/// # Safety
/// As for `dr_score_standard`.
#[no_mangle]
pub unsafe extern "C" fn dr_score_conversational(
    corpus: *const DrCorpus,
    data: *const u8,
    len: usize,
    out: *mut *mut DrReport,
) -> DrStatus {
    score(corpus, data, len, out, true)
}

/// Headline scores of a report: standard P/R/F1 if present, otherwise the
/// conversational ones.
///
/// # Safety
/// `report` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dr_report_scores(report: *const DrReport, out: *mut DrScores) -> DrStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let r = &handle(report, "report")?.inner;
        *out = match (&r.standard, &r.conversational) {
            (Some(s), _) => DrScores { precision: s.precision, recall: s.recall, f1: s.f1, instances: s.instances_scored },
            (None, Some(c)) => DrScores { precision: c.p_c, recall: c.r_c, f1: c.f1_c, instances: c.instances_scored },
            (None, None) => DrScores::default(),
        };
        Ok(())
    })
}

/// Full report as JSON.
///
/// # Safety
/// `report` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dr_report_to_json(report: *const DrReport, out: *mut *mut c_char) -> DrStatus {
    guard(|| {
        out_ptr(out, "out")?;
        emit_string(out, handle(report, "report")?.inner.to_json())
    })
}

/// Releases a report. NULL is ignored.
///
/// # Safety
/// `report` must come from a scoring call and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn dr_report_free(report: *mut DrReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}
