//! C interface: compile formulas into reward machines, run them, count
//! their unremovable reasoning shortcuts and apply trained grounders.
//!
//! Every fallible function returns an [`NrmStatus`]. On failure a
//! description is available from [`nrm_last_error`] on the same thread
//! until the next call into the library. Objects are opaque handles that
//! must be released with the matching `_free` function; strings returned
//! through `char **` out-parameters are released with [`nrm_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::fs::File;
use std::io::BufReader;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use nrm_core::automata::{self, MooreMachine};
use nrm_core::diff::Tensor;
use nrm_core::nrm::Grounder;
use nrm_core::{ltlf, urs, Error};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NrmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidInput = 3,
    SpecError = 4,
    ParseError = 5,
    IoError = 6,
    Panic = 7,
}

/// A compiled reward machine.
pub struct NrmMachine {
    inner: MooreMachine,
}

/// A trained symbol grounder.
pub struct NrmGrounder {
    inner: Grounder,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(NrmStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Spec(_) | Error::Unsupported { .. } => NrmStatus::SpecError,
            Error::Syntax { .. } | Error::Parse { .. } => NrmStatus::ParseError,
            Error::Io(_) => NrmStatus::IoError,
            _ => NrmStatus::InvalidInput,
        };
        Failure(status, e.to_string())
    }
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> NrmStatus {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NrmStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            NrmStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(NrmStatus::NullPointer, format!("{what} is null"))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(NrmStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn machine<'a>(m: *const NrmMachine) -> Result<&'a MooreMachine, Failure> {
    m.as_ref().map(|m| &m.inner).ok_or_else(|| null("machine"))
}

fn give_string(s: String, out: *mut *mut c_char) -> Result<(), Failure> {
    let c = CString::new(s).map_err(|_| Failure(NrmStatus::InvalidInput, "string contains NUL".into()))?;
    unsafe { *out = c.into_raw() };
    Ok(())
}

/// Message describing the last failure on this thread, or NULL. The
/// pointer stays valid until the next call into the library.
#[no_mangle]
pub extern "C" fn nrm_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Compiles an LTLf formula over a comma-separated alphabet.
///
/// # Safety
/// `formula` and `alphabet` must be NUL-terminated strings; `out` must be
/// a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nrm_machine_compile(formula: *const c_char, alphabet: *const c_char, out: *mut *mut NrmMachine) -> NrmStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let formula = text(formula, "formula")?;
        let names: Vec<String> = text(alphabet, "alphabet")?
            .split(',')
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .collect();
        let m = ltlf::compile_str(formula, &names)?;
        *out = Box::into_raw(Box::new(NrmMachine { inner: m }));
        Ok(())
    })
}

/// Reads a machine from its text format.
///
/// # Safety
/// `source` must be a NUL-terminated string; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nrm_machine_parse(source: *const c_char, out: *mut *mut NrmMachine) -> NrmStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let m = automata::deserialize(text(source, "source")?)?;
        *out = Box::into_raw(Box::new(NrmMachine { inner: m }));
        Ok(())
    })
}

/// # Safety
/// `m` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn nrm_machine_free(m: *mut NrmMachine) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Number of states, or 0 for a NULL handle.
///
/// # Safety
/// `m` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nrm_machine_num_states(m: *const NrmMachine) -> usize {
    m.as_ref().map_or(0, |m| m.inner.num_states())
}

/// Number of symbols, or 0 for a NULL handle.
///
/// # Safety
/// `m` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nrm_machine_num_symbols(m: *const NrmMachine) -> usize {
    m.as_ref().map_or(0, |m| m.inner.num_symbols())
}

/// Runs the machine on `len` symbol indices and writes the reward label
/// emitted after each symbol into `out_labels` (length `len`).
///
/// # Safety
/// `symbols` and `out_labels` must point to `len` elements (either may be
/// NULL when `len` is 0).
#[no_mangle]
pub unsafe extern "C" fn nrm_machine_run(m: *const NrmMachine, symbols: *const usize, len: usize, out_labels: *mut i64) -> NrmStatus {
    guard(|| {
        let m = machine(m)?;
        if len == 0 {
            return Ok(());
        }
        if symbols.is_null() || out_labels.is_null() {
            return Err(null("symbols or out_labels"));
        }
        let x = std::slice::from_raw_parts(symbols, len);
        let run = m.run_string(x)?;
        let out = std::slice::from_raw_parts_mut(out_labels, len);
        for (o, q) in out.iter_mut().zip(&run.states[1..]) {
            *o = m.output_label(*q);
        }
        Ok(())
    })
}

/// Graphviz rendering of the machine.
///
/// # Safety
/// `out` must be a valid pointer; free the result with `nrm_string_free`.
#[no_mangle]
pub unsafe extern "C" fn nrm_machine_to_dot(m: *const NrmMachine, out: *mut *mut c_char) -> NrmStatus {
    guard(|| {
        let m = machine(m)?;
        if out.is_null() {
            return Err(null("out"));
        }
        give_string(automata::export_dot(m), out)
    })
}

/// The machine in its text format.
///
/// # Safety
/// `out` must be a valid pointer; free the result with `nrm_string_free`.
#[no_mangle]
pub unsafe extern "C" fn nrm_machine_serialize(m: *const NrmMachine, out: *mut *mut c_char) -> NrmStatus {
    guard(|| {
        let m = machine(m)?;
        if out.is_null() {
            return Err(null("out"));
        }
        give_string(automata::serialize(m), out)
    })
}

/// # Safety
/// `s` must be NULL or a string returned by this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn nrm_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Counts the unremovable reasoning shortcuts of the machine, identity
/// included. When `images` is not NULL, up to `capacity` shortcuts are
/// written to it row by row, each as `num_symbols` symbol indices.
///
/// # Safety
/// `out_count` must be valid; `images` must be NULL or point to
/// `capacity * num_symbols` elements.
#[no_mangle]
pub unsafe extern "C" fn nrm_urs_find(m: *const NrmMachine, images: *mut usize, capacity: usize, out_count: *mut usize) -> NrmStatus {
    guard(|| {
        let m = machine(m)?;
        if out_count.is_null() {
            return Err(null("out_count"));
        }
        let report = urs::find_urs(m)?;
        *out_count = report.count();
        if !images.is_null() {
            let k = m.num_symbols();
            let dst = std::slice::from_raw_parts_mut(images, capacity * k);
            for (row, map) in dst.chunks_mut(k).zip(&report.shortcuts) {
                row.copy_from_slice(map.image());
            }
        }
        Ok(())
    })
}

/// Loads a grounder checkpoint written by `nrm ground`.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nrm_grounder_load(path: *const c_char, out: *mut *mut NrmGrounder) -> NrmStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let path = text(path, "path")?;
        let file = File::open(path).map_err(|e| Failure(NrmStatus::IoError, format!("{path}: {e}")))?;
        let g = Grounder::read_from(&mut BufReader::new(file))?;
        *out = Box::into_raw(Box::new(NrmGrounder { inner: g }));
        Ok(())
    })
}

/// # Safety
/// `g` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn nrm_grounder_free(g: *mut NrmGrounder) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Most likely symbol for each of `n` states of dimension `dim`, stored
/// row-major in `states`.
///
/// # Safety
/// `states` must point to `n * dim` doubles and `out_symbols` to `n`
/// elements.
#[no_mangle]
pub unsafe extern "C" fn nrm_grounder_predict(
    g: *const NrmGrounder,
    states: *const f64,
    n: usize,
    dim: usize,
    out_symbols: *mut usize,
) -> NrmStatus {
    guard(|| {
        let g = g.as_ref().map(|g| &g.inner).ok_or_else(|| null("grounder"))?;
        if n == 0 {
            return Ok(());
        }
        if states.is_null() || out_symbols.is_null() {
            return Err(null("states or out_symbols"));
        }
        let data = std::slice::from_raw_parts(states, n * dim).to_vec();
        let pred = g.predict(&Tensor::new(&[n, dim], data)?)?;
        std::slice::from_raw_parts_mut(out_symbols, n).copy_from_slice(&pred);
        Ok(())
    })
}
