use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use illpose_ffi::*;

fn last_error() -> String {
    let p = illpose_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn gaussian(length: f64, points: usize) -> (Vec<f64>, Vec<f64>) {
    let dx = length / points as f64;
    let re = (0..points).map(|j| (-(-0.5 * length + j as f64 * dx).powi(2)).exp()).collect();
    (re, vec![0.0; points])
}

#[test]
fn field_round_trip_and_l2_norm() {
    let (re, im) = gaussian(40.0, 512);
    let mut f = ptr::null_mut();
    unsafe {
        assert_eq!(illpose_field_new(40.0, 512, re.as_ptr(), im.as_ptr(), &mut f), IllposeStatus::Ok);
        assert_eq!(illpose_field_len(f), 512);
        let (mut r2, mut i2) = (vec![0.0; 512], vec![1.0; 512]);
        assert_eq!(illpose_field_values(f, r2.as_mut_ptr(), i2.as_mut_ptr(), 512), IllposeStatus::Ok);
        assert_eq!(r2, re);
        assert!(i2.iter().all(|v| *v == 0.0));
        let mut n = 0.0;
        assert_eq!(illpose_field_norm(f, IllposeNorm::L2, 0.0, &mut n), IllposeStatus::Ok);
        // ∫e^{-2x²} = √(π/2)
        assert!((n - (std::f64::consts::PI / 2.0).sqrt().sqrt()).abs() < 1e-12, "{n}");
        illpose_field_free(f);
    }
}

#[test]
fn evolve_conserves_mass() {
    let (re, _) = gaussian(60.0, 256);
    let mut f = ptr::null_mut();
    let mut g = ptr::null_mut();
    unsafe {
        assert_eq!(illpose_field_new(60.0, 256, re.as_ptr(), ptr::null(), &mut f), IllposeStatus::Ok);
        assert_eq!(illpose_evolve(f, 1.0, 1.0, 0.01, 1.0, &mut g), IllposeStatus::Ok);
        let (mut a, mut b) = (0.0, 0.0);
        illpose_field_norm(f, IllposeNorm::L2, 0.0, &mut a);
        illpose_field_norm(g, IllposeNorm::L2, 0.0, &mut b);
        assert!((a - b).abs() <= 1e-10 * a);
        illpose_field_free(f);
        illpose_field_free(g);
    }
}

#[test]
fn error_codes_and_messages() {
    let mut x = 0.0;
    unsafe {
        assert_eq!(illpose_cauchy_hs_norm(1.0, 0.0, ptr::null_mut()), IllposeStatus::NullPointer);
        assert!(last_error().contains("out"));
        assert_eq!(illpose_cauchy_hs_norm(-1.0, 0.0, &mut x), IllposeStatus::InvalidArgument);
        assert!(!last_error().is_empty());
        assert_eq!(illpose_cauchy_hs_norm(1.0, 0.0, &mut x), IllposeStatus::Ok);
        assert!(illpose_last_error_message().is_null());
        assert!((x - std::f64::consts::PI.sqrt()).abs() < 1e-12);

        let mut f = ptr::null_mut();
        assert_eq!(illpose_field_new(10.0, 3, [1.0; 3].as_ptr(), ptr::null(), &mut f), IllposeStatus::InvalidArgument);
        assert!(f.is_null());
        // a Gaussian has f̂(0) ≠ 0, so its Ḣ^s norm diverges for s ≤ -1/2
        let (re, _) = gaussian(40.0, 512);
        assert_eq!(illpose_field_new(40.0, 512, re.as_ptr(), ptr::null(), &mut f), IllposeStatus::Ok);
        assert_eq!(illpose_field_norm(f, IllposeNorm::Homogeneous, -0.6, &mut x), IllposeStatus::NotConvergent);
        assert_eq!(illpose_field_norm(f, IllposeNorm::Homogeneous, -0.4, &mut x), IllposeStatus::Ok);
        illpose_field_free(f);
        // freeing null is a no-op
        illpose_field_free(ptr::null_mut());
        illpose_report_free(ptr::null_mut());
        illpose_string_free(ptr::null_mut());
    }
}

#[test]
fn region_and_inflation() {
    let mut e = IllposeRegionEntry::default();
    let mut s = IllposeInflationSummary::default();
    unsafe {
        assert_eq!(illpose_region_entry(2.0, -0.5, &mut e), IllposeStatus::Ok);
        assert!(e.feasible && e.special);
        assert_eq!(illpose_region_entry(1.5, -0.25, &mut e), IllposeStatus::Ok);
        assert!(!e.feasible && !e.has_witness);
        assert_eq!(illpose_region_entry(0.0, -0.25, &mut e), IllposeStatus::InvalidArgument);

        assert_eq!(illpose_inflation_run(0.48, -1.18, 0.44, 1.0, -0.5, 2f64.powi(38), &mut s), IllposeStatus::Ok);
        assert!(s.ratio > 10.0 && s.dominance_holds);
        assert_eq!(illpose_inflation_run(0.48, 0.2, 0.44, 1.0, -0.5, 2f64.powi(38), &mut s), IllposeStatus::ComputationFailed);
    }
}

#[test]
fn experiment_report_handle() {
    let dir = tempfile::tempdir().unwrap();
    let name = CString::new("uc-szego").unwrap();
    let args: Vec<CString> = ["--eps", "0.01,0.001"].iter().map(|s| CString::new(*s).unwrap()).collect();
    let argv: Vec<*const std::ffi::c_char> = args.iter().map(|s| s.as_ptr()).collect();
    let out = CString::new(dir.path().to_str().unwrap()).unwrap();
    let mut rep = ptr::null_mut();
    unsafe {
        assert_eq!(illpose_run_experiment(name.as_ptr(), argv.as_ptr(), argv.len(), out.as_ptr(), &mut rep), IllposeStatus::Ok);
        let n = illpose_report_verdict_count(rep);
        assert!(n >= 3);
        for k in 0..n {
            let (mut pass, mut label) = (false, ptr::null_mut());
            assert_eq!(illpose_report_verdict(rep, k, &mut pass, &mut label), IllposeStatus::Ok);
            assert!(pass);
            assert!(!CStr::from_ptr(label).to_bytes().is_empty());
            illpose_string_free(label);
        }
        let (mut pass, mut label) = (false, ptr::null_mut());
        assert_eq!(illpose_report_verdict(rep, n, &mut pass, &mut label), IllposeStatus::InvalidArgument);
        illpose_report_free(rep);

        let bad = CString::new("--bogus").unwrap();
        let argv = [bad.as_ptr()];
        let mut rep = ptr::null_mut();
        assert_eq!(illpose_run_experiment(name.as_ptr(), argv.as_ptr(), 1, ptr::null(), &mut rep), IllposeStatus::InvalidArgument);
        assert!(rep.is_null());

        // the linearity check fails at large t, but the report is still returned
        let c3 = CString::new("c3").unwrap();
        let args: Vec<CString> = ["--t-small", "0.5", "--points", "16384", "--eps", "0.2,0.1"].iter().map(|s| CString::new(*s).unwrap()).collect();
        let argv: Vec<_> = args.iter().map(|s| s.as_ptr()).collect();
        assert_eq!(illpose_run_experiment(c3.as_ptr(), argv.as_ptr(), argv.len(), ptr::null(), &mut rep), IllposeStatus::VerdictFailed);
        assert!(!rep.is_null());
        illpose_report_free(rep);
    }
    assert!(dir.path().join("uc-szego/verdicts.csv").exists());
}

fn header() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include/illpose.h")
}

#[test]
fn header_declares_every_export() {
    let text = std::fs::read_to_string(header()).unwrap();
    for f in [
        "illpose_last_error_message",
        "illpose_field_new",
        "illpose_field_free",
        "illpose_field_len",
        "illpose_field_values",
        "illpose_field_norm",
        "illpose_evolve",
        "illpose_cauchy_hs_norm",
        "illpose_region_entry",
        "illpose_inflation_run",
        "illpose_run_experiment",
        "illpose_report_free",
        "illpose_report_verdict_count",
        "illpose_report_verdict",
        "illpose_string_free",
        "typedef struct IllposeField IllposeField;",
        "ILLPOSE_STATUS_VERDICT_FAILED = 5",
    ] {
        assert!(text.contains(f), "{f} missing from header");
    }
}

/// Compiles a small C program against the header and the static library.
/// Skipped when no C compiler or static library is around.
#[test]
fn c_program_links_and_runs() {
    let Ok(cc) = which_cc() else { return };
    let profile_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = profile_dir.join("libillpose_ffi.a");
    if !lib.exists() {
        eprintln!("skipping: {} not built", lib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(
        &src,
        r#"#include <stdio.h>
#include "illpose.h"
int main(void) {
    double v = 0.0;
    if (illpose_cauchy_hs_norm(1.0, 0.0, &v) != ILLPOSE_STATUS_OK) return 1;
    if (illpose_cauchy_hs_norm(1.0, 0.0, NULL) != ILLPOSE_STATUS_NULL_POINTER) return 2;
    if (illpose_last_error_message() == NULL) return 3;
    IllposeRegionEntry e;
    if (illpose_region_entry(2.0, -0.5, &e) != ILLPOSE_STATUS_OK || !e.special) return 4;
    printf("%.12f\n", v);
    return 0;
}
"#,
    )
    .unwrap();
    let exe = dir.path().join("main");
    let st = Command::new(&cc)
        .arg(&src)
        .arg("-I")
        .arg(header().parent().unwrap())
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(st.success(), "C compile failed");
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    let v: f64 = String::from_utf8_lossy(&out.stdout).trim().parse().unwrap();
    assert!((v - std::f64::consts::PI.sqrt()).abs() < 1e-11);
}

fn which_cc() -> Result<String, ()> {
    for cc in ["cc", "gcc", "clang"] {
        if Command::new(cc).arg("--version").output().is_ok_and(|o| o.status.success()) {
            return Ok(cc.to_string());
        }
    }
    Err(())
}
