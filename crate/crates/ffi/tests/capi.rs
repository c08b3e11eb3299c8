use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use eqisa_ffi::*;

const GHZ: &str = "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[3];\nh q[0];\ncx q[0],q[1];\ncx q[1],q[2];\nt q[2];\n";
const SMALL: &str = "sk_depth = 3\nsk_recursion = 2\nensemble_size = 40\n";

fn last_error() -> String {
    unsafe { CStr::from_ptr(eqisa_last_error()) }
        .to_string_lossy()
        .into_owned()
}

fn train() -> *mut EqisaToolchain {
    let cfg = CString::new(SMALL).unwrap();
    let mut tc = ptr::null_mut();
    assert_eq!(
        unsafe { eqisa_toolchain_train(cfg.as_ptr(), &mut tc) },
        EqisaStatus::Ok
    );
    assert!(!tc.is_null());
    tc
}

fn encode(tc: *const EqisaToolchain, src: &str, variant: u8) -> (EqisaStatus, *mut EqisaProgram) {
    let src = CString::new(src).unwrap();
    let mut p = ptr::null_mut();
    let s = unsafe { eqisa_encode_qasm(tc, src.as_ptr(), variant, &mut p) };
    (s, p)
}

fn bytes_of(b: &EqisaBytes) -> Vec<u8> {
    unsafe { std::slice::from_raw_parts(b.data, b.len) }.to_vec()
}

#[test]
fn basis_size_matches_d3_count() {
    let mut n = 0u64;
    assert_eq!(unsafe { eqisa_basis_size(3, &mut n) }, EqisaStatus::Ok);
    assert_eq!(n, 21);
    assert_eq!(
        unsafe { eqisa_basis_size(3, ptr::null_mut()) },
        EqisaStatus::NullPointer
    );
}

#[test]
fn encode_decode_round_trip_every_variant() {
    let tc = train();
    for v in 0..4u8 {
        let (s, p) = encode(tc, GHZ, v);
        assert_eq!(s, EqisaStatus::Ok, "{}", last_error());
        assert!(unsafe { eqisa_program_total_bits(p) } > 0);
        let mut b = eqisa_bytes_empty();
        assert_eq!(unsafe { eqisa_program_bytes(p, &mut b) }, EqisaStatus::Ok);
        let mut book = ptr::null_mut();
        assert_eq!(
            unsafe { eqisa_program_codebook(p, &mut book) },
            EqisaStatus::Ok
        );
        let mut out = ptr::null_mut();
        let s = unsafe { eqisa_decode_to_qasm(tc, b.data, b.len, book, &mut out) };
        assert_eq!(s, EqisaStatus::Ok, "{}", last_error());
        let text = unsafe { CStr::from_ptr(out) }.to_str().unwrap().to_owned();
        assert!(text.starts_with("OPENQASM 2.0;"));
        assert!(text.contains("qreg q[3];"));
        unsafe {
            eqisa_string_free(out);
            eqisa_string_free(book);
            eqisa_bytes_free(b);
            eqisa_program_free(p);
        }
    }
    unsafe { eqisa_toolchain_free(tc) };
}

#[test]
fn errors_map_to_status_codes() {
    let tc = train();
    let (s, p) = encode(tc, "OPENQASM 2.0;\nqreg q[1];\nfoo q[0];\n", 3);
    assert_eq!(s, EqisaStatus::Parse);
    assert!(p.is_null());
    assert!(!last_error().is_empty());

    let (s, _) = encode(tc, GHZ, 9);
    assert_eq!(s, EqisaStatus::InvalidArgument);

    let (s, _) = encode(ptr::null(), GHZ, 3);
    assert_eq!(s, EqisaStatus::NullPointer);

    let junk = b"XXXXjunkjunkjunkjunkjunkjunkjunk";
    let mut out = ptr::null_mut();
    let s = unsafe { eqisa_decode_to_qasm(tc, junk.as_ptr(), junk.len(), ptr::null(), &mut out) };
    assert_eq!(s, EqisaStatus::Integrity);
    assert!(out.is_null());

    let bad = CString::new("sk_depth = banana\n").unwrap();
    let mut t2 = ptr::null_mut();
    assert_eq!(
        unsafe { eqisa_toolchain_train(bad.as_ptr(), &mut t2) },
        EqisaStatus::Parse
    );
    assert!(t2.is_null());

    let (s, p) = encode(tc, GHZ, 3);
    assert_eq!(s, EqisaStatus::Ok);
    assert!(last_error().is_empty());
    unsafe {
        eqisa_program_free(p);
        eqisa_toolchain_free(tc);
    }
}

#[test]
fn save_and_load_toolchain() {
    let dir = tempfile::tempdir().unwrap();
    let cdir = CString::new(dir.path().to_str().unwrap()).unwrap();
    let tc = train();
    assert_eq!(
        unsafe { eqisa_toolchain_save(tc, cdir.as_ptr()) },
        EqisaStatus::Ok
    );
    let cfg = CString::new(SMALL).unwrap();
    let mut loaded = ptr::null_mut();
    let s = unsafe { eqisa_toolchain_load(cfg.as_ptr(), cdir.as_ptr(), &mut loaded) };
    assert_eq!(s, EqisaStatus::Ok, "{}", last_error());

    let (_, a) = encode(tc, GHZ, 3);
    let (_, b) = encode(loaded, GHZ, 3);
    let (mut ba, mut bb) = (eqisa_bytes_empty(), eqisa_bytes_empty());
    unsafe {
        eqisa_program_bytes(a, &mut ba);
        eqisa_program_bytes(b, &mut bb);
    }
    assert_eq!(bytes_of(&ba), bytes_of(&bb));
    unsafe {
        eqisa_bytes_free(ba);
        eqisa_bytes_free(bb);
        eqisa_program_free(a);
        eqisa_program_free(b);
        eqisa_toolchain_free(tc);
        eqisa_toolchain_free(loaded);
    }

    let missing = CString::new(dir.path().join("nope").to_str().unwrap()).unwrap();
    let mut none = ptr::null_mut();
    assert_eq!(
        unsafe { eqisa_toolchain_load(ptr::null(), missing.as_ptr(), &mut none) },
        EqisaStatus::Io
    );
}

#[test]
fn compress_round_trip_and_compressed_decode() {
    let data: Vec<u8> = (0..5000u32).map(|i| (i % 7) as u8).collect();
    let mut c = eqisa_bytes_empty();
    assert_eq!(
        unsafe { eqisa_compress(data.as_ptr(), data.len(), &mut c) },
        EqisaStatus::Ok
    );
    assert!(c.len < data.len());
    let mut d = eqisa_bytes_empty();
    assert_eq!(
        unsafe { eqisa_decompress(c.data, c.len, &mut d) },
        EqisaStatus::Ok
    );
    assert_eq!(bytes_of(&d), data);
    unsafe {
        eqisa_bytes_free(c);
        eqisa_bytes_free(d);
    }

    let mut e = eqisa_bytes_empty();
    assert_eq!(
        unsafe { eqisa_compress(ptr::null(), 0, &mut e) },
        EqisaStatus::Ok
    );
    let mut f = eqisa_bytes_empty();
    assert_eq!(
        unsafe { eqisa_decompress(e.data, e.len, &mut f) },
        EqisaStatus::Ok
    );
    assert_eq!(f.len, 0);
    unsafe {
        eqisa_bytes_free(e);
        eqisa_bytes_free(f);
    }

    let tc = train();
    let (_, p) = encode(tc, GHZ, 0);
    let mut raw = eqisa_bytes_empty();
    let mut z = eqisa_bytes_empty();
    let mut out = ptr::null_mut();
    unsafe {
        eqisa_program_bytes(p, &mut raw);
        eqisa_compress(raw.data, raw.len, &mut z);
        assert_eq!(
            eqisa_decode_to_qasm(tc, z.data, z.len, ptr::null(), &mut out),
            EqisaStatus::Ok
        );
        eqisa_string_free(out);
        eqisa_bytes_free(raw);
        eqisa_bytes_free(z);
        eqisa_program_free(p);
        eqisa_toolchain_free(tc);
    }
}

#[test]
fn null_frees_are_no_ops() {
    unsafe {
        eqisa_toolchain_free(ptr::null_mut());
        eqisa_program_free(ptr::null_mut());
        eqisa_string_free(ptr::null_mut());
        eqisa_bytes_free(eqisa_bytes_empty());
    }
    let v = unsafe { CStr::from_ptr(eqisa_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_every_export() {
    let header =
        std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/eqisa.h"))
            .unwrap();
    for name in [
        "eqisa_version",
        "eqisa_last_error",
        "eqisa_basis_size",
        "eqisa_toolchain_train",
        "eqisa_toolchain_load",
        "eqisa_toolchain_save",
        "eqisa_toolchain_free",
        "eqisa_encode_qasm",
        "eqisa_program_total_bits",
        "eqisa_program_token_count",
        "eqisa_program_bytes",
        "eqisa_program_codebook",
        "eqisa_program_free",
        "eqisa_decode_to_qasm",
        "eqisa_compress",
        "eqisa_decompress",
        "eqisa_bytes_free",
        "eqisa_string_free",
        "eqisa_bytes_empty",
        "typedef struct EqisaToolchain EqisaToolchain;",
        "EQISA_STATUS_INTEGRITY = 5",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
}

#[test]
fn c_program_links_against_static_library() {
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let lib_dir = manifest.join("../../target/debug");
    if !lib_dir.join("libeqisa_ffi.a").exists()
        || Command::new("cc").arg("--version").output().is_err()
    {
        eprintln!("skipping: no C compiler or static library");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    std::fs::write(
        &src,
        r#"#include <stdio.h>
#include "eqisa.h"
int main(void) {
  uint64_t n = 0;
  if (eqisa_basis_size(3, &n) != EQISA_STATUS_OK || n != 21) return 1;
  const uint8_t data[] = "aaaaaaaaaaaaaaaabbbbbbbbbbbbbbbb";
  EqisaBytes z = eqisa_bytes_empty(), d = eqisa_bytes_empty();
  if (eqisa_compress(data, sizeof data, &z) != EQISA_STATUS_OK) return 2;
  if (eqisa_decompress(z.data, z.len, &d) != EQISA_STATUS_OK || d.len != sizeof data) return 3;
  eqisa_bytes_free(z);
  eqisa_bytes_free(d);
  printf("%s\n", eqisa_version());
  return 0;
}
"#,
    )
    .unwrap();
    let exe = dir.path().join("smoke");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(lib_dir.join("libeqisa_ffi.a"))
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    assert_eq!(
        String::from_utf8_lossy(&out.stdout).trim(),
        env!("CARGO_PKG_VERSION")
    );
}
