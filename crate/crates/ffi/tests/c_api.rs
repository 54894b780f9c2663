use std::ffi::{c_int, CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use erasure_ffi::*;

const PLUS: &str = "layout M:2\n0.5,0 0.5,0\n0.5,0 0.5,0\n";
const MIXED: &str = "layout N:2\n0.5,0 0,0\n0,0 0.5,0\n";

fn parse(text: &str) -> *mut ErasureState {
    let c = CString::new(text).unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { erasure_state_parse(c.as_ptr(), &mut s) }, ErasureStatus::Ok);
    assert!(!s.is_null());
    s
}

fn last_error() -> String {
    let p = erasure_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned()
}

#[test]
fn state_round_trip_and_dim() {
    let s = parse(PLUS);
    let mut dim = 0usize;
    let mut txt = ptr::null_mut();
    unsafe {
        assert_eq!(erasure_state_dim(s, &mut dim), ErasureStatus::Ok);
        assert_eq!(erasure_state_to_text(s, &mut txt), ErasureStatus::Ok);
        let back = CStr::from_ptr(txt).to_str().unwrap().to_owned();
        assert!(back.starts_with("layout M:2"));
        let again = parse(&back);
        let mut f = 0.0;
        assert_eq!(erasure_fidelity(s, again, &mut f), ErasureStatus::Ok);
        assert!((f - 1.0).abs() < 1e-12);
        erasure_string_free(txt);
        erasure_state_free(again);
        erasure_state_free(s);
    }
    assert_eq!(dim, 2);
    assert!(erasure_last_error().is_null());
}

#[test]
fn distances_between_pure_and_mixed() {
    let plus = parse(PLUS);
    let mixed = parse("layout M:2\n0.5,0 0,0\n0,0 0.5,0\n");
    let (mut f, mut p, mut t, mut d, mut r) = (0.0, 0.0, 0.0, 0.0, 0.0);
    unsafe {
        assert_eq!(erasure_fidelity(plus, mixed, &mut f), ErasureStatus::Ok);
        assert_eq!(erasure_purified_distance(plus, mixed, &mut p), ErasureStatus::Ok);
        assert_eq!(erasure_trace_distance(plus, mixed, &mut t), ErasureStatus::Ok);
        assert_eq!(erasure_dmax(plus, mixed, &mut d), ErasureStatus::Ok);
        assert_eq!(erasure_relative_entropy(plus, mixed, &mut r), ErasureStatus::Ok);
        erasure_state_free(plus);
        erasure_state_free(mixed);
    }
    // F = sqrt(<+|I/2|+>) = 1/sqrt 2, eigenvalues of |+><+| - I/2 are ±1/2
    assert!((f - 0.5f64.sqrt()).abs() < 1e-10);
    assert!((p - 0.5f64.sqrt()).abs() < 1e-10);
    assert!((t - 1.0).abs() < 1e-10);
    assert!((d - 1.0).abs() < 1e-8);
    assert!((r - 1.0).abs() < 1e-8);
}

#[test]
fn smooth_dmax_brackets_and_null_lower() {
    let plus = parse(PLUS);
    let mixed = parse("layout M:2\n0.5,0 0,0\n0,0 0.5,0\n");
    let (mut v, mut lo, mut v2) = (0.0, 0.0, 0.0);
    unsafe {
        assert_eq!(erasure_smooth_dmax(plus, mixed, 0.1, &mut v, &mut lo), ErasureStatus::Ok);
        assert_eq!(erasure_smooth_dmax(plus, mixed, 0.1, &mut v2, ptr::null_mut()), ErasureStatus::Ok);
        erasure_state_free(plus);
        erasure_state_free(mixed);
    }
    assert!(lo <= v + 1e-9 && (0.0..1.0).contains(&v));
    assert_eq!(v, v2);
}

#[test]
fn tensor_then_trace_recovers_factor() {
    let a = parse(PLUS);
    let b = parse(MIXED);
    let mut ab = ptr::null_mut();
    let mut back = ptr::null_mut();
    let labels = CString::new("N").unwrap();
    let mut f = 0.0;
    let mut dim = 0usize;
    unsafe {
        assert_eq!(erasure_state_tensor(a, b, &mut ab), ErasureStatus::Ok);
        assert_eq!(erasure_state_dim(ab, &mut dim), ErasureStatus::Ok);
        assert_eq!(erasure_state_partial_trace(ab, labels.as_ptr(), &mut back), ErasureStatus::Ok);
        assert_eq!(erasure_fidelity(a, back, &mut f), ErasureStatus::Ok);
        for s in [a, b, ab, back] {
            erasure_state_free(s);
        }
    }
    assert_eq!(dim, 4);
    assert!((f - 1.0).abs() < 1e-12);
}

#[test]
fn errors_carry_codes_and_messages() {
    let mut s = ptr::null_mut();
    let bad = CString::new("layout M:2\n1,0 0,0\n").unwrap();
    assert_eq!(unsafe { erasure_state_parse(bad.as_ptr(), &mut s) }, ErasureStatus::Layout);
    assert!(s.is_null());
    assert!(last_error().contains("dimension"), "{}", last_error());

    let garbage = CString::new("nothing here").unwrap();
    assert_eq!(unsafe { erasure_state_parse(garbage.as_ptr(), &mut s) }, ErasureStatus::Parse);
    assert_eq!(unsafe { erasure_state_parse(ptr::null(), &mut s) }, ErasureStatus::NullPointer);
    assert_eq!(unsafe { erasure_state_parse(garbage.as_ptr(), ptr::null_mut()) }, ErasureStatus::NullPointer);

    let a = parse(PLUS);
    let same = parse(PLUS);
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { erasure_state_tensor(a, same, &mut out) }, ErasureStatus::Layout);
    assert!(last_error().contains('M'));
    let mut f = 0.0;
    let other = parse(MIXED);
    assert_eq!(unsafe { erasure_fidelity(a, other, &mut f) }, ErasureStatus::Layout);
    unsafe {
        erasure_state_free(a);
        erasure_state_free(same);
        erasure_state_free(other);
        erasure_state_free(ptr::null_mut());
        erasure_string_free(ptr::null_mut());
    }
}

#[test]
fn free_set_handles() {
    let cfg = CString::new("family = \"coherence\"").unwrap();
    let mut set = ptr::null_mut();
    assert_eq!(unsafe { erasure_free_set_from_toml(cfg.as_ptr(), &mut set) }, ErasureStatus::Ok);
    let plus = parse(PLUS);
    let diag = parse("layout M:2\n0.7,0 0,0\n0,0 0.3,0\n");
    let (mut in_plus, mut in_diag): (c_int, c_int) = (-1, -1);
    let (mut r, mut lo, mut k) = (0.0, 0.0, 0.0);
    unsafe {
        assert_eq!(erasure_free_set_contains(set, plus, &mut in_plus), ErasureStatus::Ok);
        assert_eq!(erasure_free_set_contains(set, diag, &mut in_diag), ErasureStatus::Ok);
        assert_eq!(erasure_free_set_relent(set, plus, &mut r, &mut lo), ErasureStatus::Ok);
        assert_eq!(erasure_free_set_smooth_dmax(set, plus, 0.0, &mut k, ptr::null_mut()), ErasureStatus::Ok);
        erasure_state_free(plus);
        erasure_state_free(diag);
        erasure_free_set_free(set);
    }
    assert_eq!((in_plus, in_diag), (0, 1));
    // relative entropy of coherence of |+> is its dephased entropy, 1 bit
    assert!((r - 1.0).abs() < 1e-6 && lo <= r + 1e-9 && lo > 1.0 - 1e-6);
    assert!((k - 1.0).abs() < 1e-6);

    let bad = CString::new("family = \"stabilizer\"").unwrap();
    assert_eq!(unsafe { erasure_free_set_from_toml(bad.as_ptr(), &mut set) }, ErasureStatus::Unsupported);
    let unknown = CString::new("family = \"coherence\"\ncolour = 1").unwrap();
    assert_eq!(unsafe { erasure_free_set_from_toml(unknown.as_ptr(), &mut set) }, ErasureStatus::Config);
    assert!(last_error().contains("colour"));
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(erasure_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

fn target_dir() -> PathBuf {
    // tests run from <target>/<profile>/deps
    std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/erasure.h")).unwrap();
    for name in [
        "erasure_version",
        "erasure_last_error",
        "erasure_string_free",
        "erasure_state_parse",
        "erasure_state_free",
        "erasure_state_to_text",
        "erasure_state_dim",
        "erasure_state_tensor",
        "erasure_state_partial_trace",
        "erasure_fidelity",
        "erasure_purified_distance",
        "erasure_trace_distance",
        "erasure_relative_entropy",
        "erasure_dmax",
        "erasure_smooth_dmax",
        "erasure_free_set_from_toml",
        "erasure_free_set_free",
        "erasure_free_set_contains",
        "erasure_free_set_relent",
        "erasure_free_set_smooth_dmax",
        "ERASURE_STATUS_NULL_POINTER",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
}

#[test]
fn c_program_links_against_static_library() {
    let lib = target_dir().join("liberasure_ffi.a");
    assert!(lib.exists(), "missing {}", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    std::fs::write(
        &src,
        r#"
#include <stdio.h>
#include <math.h>
#include "erasure.h"
int main(void) {
    ErasureState *a = NULL, *b = NULL;
    double pd = -1.0;
    if (erasure_state_parse("layout M:2\n1,0 0,0\n0,0 0,0\n", &a) != ERASURE_STATUS_OK) return 10;
    if (erasure_state_parse("layout M:2\n0,0 0,0\n0,0 1,0\n", &b) != ERASURE_STATUS_OK) return 11;
    if (erasure_purified_distance(a, b, &pd) != ERASURE_STATUS_OK) return 12;
    if (fabs(pd - 1.0) > 1e-12) return 13;
    if (erasure_state_parse("layout M:3\n", &a) == ERASURE_STATUS_OK) return 14;
    if (erasure_last_error() == NULL) return 15;
    erasure_state_free(b);
    printf("%s %.3f\n", erasure_version(), pd);
    return 0;
}
"#,
    )
    .unwrap();
    let exe = dir.path().join("smoke");
    let include = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(&include)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("a C compiler named cc");
    assert!(status.success());
    let run = Command::new(&exe).output().unwrap();
    assert!(run.status.success(), "exit {:?}", run.status.code());
    assert_eq!(String::from_utf8(run.stdout).unwrap().trim(), format!("{} 1.000", env!("CARGO_PKG_VERSION")));
}
