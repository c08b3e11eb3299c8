//! C ABI over the eqisa toolchain.
//!
//! Every fallible call returns an [`EqisaStatus`]; on failure the message is
//! available from [`eqisa_last_error`] on the same thread. Objects are opaque
//! handles released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use eqisa::basis::{clifford_t_base, generate_basis};
use eqisa::codec::{EncodedProgram, Variant};
use eqisa::config::RunConfig;
use eqisa::lossless;
use eqisa::pipeline::{Encoded, Toolchain};
use eqisa::qasm::{parse_qasm, to_qasm};
use eqisa::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EqisaStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    Capacity = 4,
    Integrity = 5,
    Numerical = 6,
    Io = 7,
    Panic = 8,
}

impl From<&Error> for EqisaStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Io(_) => EqisaStatus::Io,
            _ => match e.exit_code() {
                3 => EqisaStatus::Parse,
                4 => EqisaStatus::Capacity,
                5 => EqisaStatus::Integrity,
                1 => EqisaStatus::Numerical,
                _ => EqisaStatus::InvalidArgument,
            },
        }
    }
}

/// Trained toolchain.
pub struct EqisaToolchain(Toolchain);

/// Encoded program with the codebook it was written with.
pub struct EqisaProgram(Encoded);

/// Byte buffer owned by the library; release with [`eqisa_bytes_free`].
#[repr(C)]
pub struct EqisaBytes {
    pub data: *mut u8,
    pub len: usize,
}

impl EqisaBytes {
    fn empty() -> Self {
        EqisaBytes {
            data: ptr::null_mut(),
            len: 0,
        }
    }

    fn from_vec(v: Vec<u8>) -> Self {
        let boxed = v.into_boxed_slice();
        let len = boxed.len();
        EqisaBytes {
            data: Box::into_raw(boxed).cast(),
            len,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn guard(f: impl FnOnce() -> Result<(), EqisaStatus>) -> EqisaStatus {
    set_error("");
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => EqisaStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic");
            EqisaStatus::Panic
        }
    }
}

fn fail(e: Error) -> EqisaStatus {
    set_error(&e.to_string());
    EqisaStatus::from(&e)
}

fn null(what: &str) -> EqisaStatus {
    set_error(&format!("{what} is null"));
    EqisaStatus::NullPointer
}

/// # Safety
/// `s` is null or a NUL-terminated string.
unsafe fn opt_str<'a>(s: *const c_char) -> Result<Option<&'a str>, EqisaStatus> {
    if s.is_null() {
        return Ok(None);
    }
    CStr::from_ptr(s).to_str().map(Some).map_err(|_| {
        set_error("string is not UTF-8");
        EqisaStatus::InvalidArgument
    })
}

/// # Safety
/// `s` is a NUL-terminated string.
unsafe fn req_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, EqisaStatus> {
    opt_str(s)?.ok_or_else(|| null(what))
}

/// # Safety
/// `data` points to `len` readable bytes, or `len` is 0.
unsafe fn bytes<'a>(data: *const u8, len: usize) -> Result<&'a [u8], EqisaStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if data.is_null() {
        return Err(null("data"));
    }
    Ok(std::slice::from_raw_parts(data, len))
}

fn config(text: Option<&str>) -> Result<RunConfig, EqisaStatus> {
    match text {
        Some(t) => RunConfig::from_text(t).map_err(fail),
        None => Ok(RunConfig::default()),
    }
}

/// Library version, a static string.
#[no_mangle]
pub extern "C" fn eqisa_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread; empty after success. Valid
/// until the next call on this thread.
#[no_mangle]
pub extern "C" fn eqisa_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Non-null elements in the {H, T, Tdg} basis of the given depth.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn eqisa_basis_size(depth: u32, out: *mut u64) -> EqisaStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let basis = generate_basis(&clifford_t_base(), depth as usize).map_err(fail)?;
        *out = (basis.len() - 1) as u64;
        Ok(())
    })
}

/// Trains a toolchain. `config` is a key = value text or null for defaults.
///
/// # Safety
/// `config` is null or NUL-terminated; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn eqisa_toolchain_train(
    config_text: *const c_char,
    out: *mut *mut EqisaToolchain,
) -> EqisaStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let cfg = config(opt_str(config_text)?)?;
        let tc = Toolchain::train(&cfg).map_err(fail)?;
        *out = Box::into_raw(Box::new(EqisaToolchain(tc)));
        Ok(())
    })
}

/// Loads artifacts written by [`eqisa_toolchain_save`] or `eqisa train`.
///
/// # Safety
/// `config` is null or NUL-terminated; `dir` is NUL-terminated; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn eqisa_toolchain_load(
    config_text: *const c_char,
    dir: *const c_char,
    out: *mut *mut EqisaToolchain,
) -> EqisaStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let cfg = config(opt_str(config_text)?)?;
        let dir = req_str(dir, "dir")?;
        let tc = Toolchain::load(&cfg, Path::new(dir)).map_err(fail)?;
        *out = Box::into_raw(Box::new(EqisaToolchain(tc)));
        Ok(())
    })
}

/// # Safety
/// `tc` is a live toolchain handle; `dir` is NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn eqisa_toolchain_save(
    tc: *const EqisaToolchain,
    dir: *const c_char,
) -> EqisaStatus {
    guard(|| {
        let tc = tc.as_ref().ok_or_else(|| null("toolchain"))?;
        let dir = req_str(dir, "dir")?;
        tc.0.save(Path::new(dir)).map_err(fail)
    })
}

/// # Safety
/// `tc` is null or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn eqisa_toolchain_free(tc: *mut EqisaToolchain) {
    if !tc.is_null() {
        drop(Box::from_raw(tc));
    }
}

/// Lowers and encodes QASM source with variant 0..=3.
///
/// # Safety
/// `tc` is a live handle; `qasm` is NUL-terminated; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn eqisa_encode_qasm(
    tc: *const EqisaToolchain,
    qasm: *const c_char,
    variant: u8,
    out: *mut *mut EqisaProgram,
) -> EqisaStatus {
    guard(|| {
        let tc = tc.as_ref().ok_or_else(|| null("toolchain"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let source = req_str(qasm, "qasm")?;
        let variant = Variant::from_byte(variant)
            .map_err(|_| fail(Error::InvalidArgument(format!("unknown variant {variant}"))))?;
        let parsed = parse_qasm(source).map_err(fail)?;
        let encoded = tc.0.encode(&parsed.circuit, variant).map_err(fail)?;
        *out = Box::into_raw(Box::new(EqisaProgram(encoded)));
        Ok(())
    })
}

/// Payload bits (instruction plus qubit-id streams, header excluded).
///
/// # Safety
/// `p` is null or a live program handle.
#[no_mangle]
pub unsafe extern "C" fn eqisa_program_total_bits(p: *const EqisaProgram) -> u64 {
    p.as_ref().map_or(0, |p| p.0.program.total_bits() as u64)
}

/// Instructions in the encoded stream.
///
/// # Safety
/// `p` is null or a live program handle.
#[no_mangle]
pub unsafe extern "C" fn eqisa_program_token_count(p: *const EqisaProgram) -> u64 {
    p.as_ref().map_or(0, |p| p.0.tokens.len() as u64)
}

/// Serialized `.eqisa` bytes.
///
/// # Safety
/// `p` is a live program handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn eqisa_program_bytes(
    p: *const EqisaProgram,
    out: *mut EqisaBytes,
) -> EqisaStatus {
    guard(|| {
        let p = p.as_ref().ok_or_else(|| null("program"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = EqisaBytes::from_vec(p.0.program.to_bytes());
        Ok(())
    })
}

/// Codebook text the program was encoded with.
///
/// # Safety
/// `p` is a live program handle; `out` must be valid. Free the result with
/// [`eqisa_string_free`].
#[no_mangle]
pub unsafe extern "C" fn eqisa_program_codebook(
    p: *const EqisaProgram,
    out: *mut *mut c_char,
) -> EqisaStatus {
    guard(|| {
        let p = p.as_ref().ok_or_else(|| null("program"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = CString::new(p.0.codebook.to_text())
            .map_err(|_| fail(Error::InvalidArgument("codebook contains NUL".into())))?
            .into_raw();
        Ok(())
    })
}

/// # Safety
/// `p` is null or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn eqisa_program_free(p: *mut EqisaProgram) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Decodes `.eqisa` bytes (or a `.eqbz` container holding them) to QASM text.
/// `codebook` is codebook text or null for the trained codebook.
///
/// # Safety
/// `tc` is a live handle; `data` points to `len` bytes; `codebook` is null or
/// NUL-terminated; `out` must be valid. Free the result with [`eqisa_string_free`].
#[no_mangle]
pub unsafe extern "C" fn eqisa_decode_to_qasm(
    tc: *const EqisaToolchain,
    data: *const u8,
    len: usize,
    codebook: *const c_char,
    out: *mut *mut c_char,
) -> EqisaStatus {
    guard(|| {
        let tc = tc.as_ref().ok_or_else(|| null("toolchain"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let mut raw = bytes(data, len)?.to_vec();
        if raw.starts_with(b"EQBZ") {
            raw = lossless::decompress_bytes(&raw).map_err(fail)?;
        }
        let program = EncodedProgram::from_bytes(&raw).map_err(fail)?;
        let book = opt_str(codebook)?
            .map(eqisa::codec::Codebook::from_text)
            .transpose()
            .map_err(fail)?;
        let circuit = tc.0.decode(&program, book.as_ref()).map_err(fail)?;
        *out = CString::new(to_qasm(&circuit))
            .expect("QASM text has no NUL")
            .into_raw();
        Ok(())
    })
}

/// # Safety
/// `data` points to `len` readable bytes; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn eqisa_compress(
    data: *const u8,
    len: usize,
    out: *mut EqisaBytes,
) -> EqisaStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = EqisaBytes::from_vec(lossless::compress_bytes(bytes(data, len)?).map_err(fail)?);
        Ok(())
    })
}

/// # Safety
/// `data` points to `len` readable bytes; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn eqisa_decompress(
    data: *const u8,
    len: usize,
    out: *mut EqisaBytes,
) -> EqisaStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = EqisaBytes::from_vec(lossless::decompress_bytes(bytes(data, len)?).map_err(fail)?);
        Ok(())
    })
}

/// # Safety
/// `b` was filled by this library and has not been freed.
#[no_mangle]
pub unsafe extern "C" fn eqisa_bytes_free(b: EqisaBytes) {
    if !b.data.is_null() {
        drop(Box::from_raw(ptr::slice_from_raw_parts_mut(b.data, b.len)));
    }
}

/// # Safety
/// `s` is null or a string returned by this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn eqisa_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// An empty buffer, for initializing out-parameters.
#[no_mangle]
pub extern "C" fn eqisa_bytes_empty() -> EqisaBytes {
    EqisaBytes::empty()
}
