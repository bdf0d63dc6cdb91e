use std::ffi::CStr;
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use qoverflow_ffi::*;

fn params() -> *mut QoParams {
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { qo_params_new(0.1, 0.2, 0.2, 0.5, &mut p) }, QoStatus::Ok);
    p
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(qo_last_error()) }.to_string_lossy().into_owned()
}

#[test]
fn params_and_validation() {
    let p = params();
    let mut a = QoAssumptions::default();
    assert_eq!(unsafe { qo_params_validate(p, &mut a) }, QoStatus::Ok);
    assert!(a.stable && a.ordered && a.conjugate_inside && !a.geometric_case);
    assert!((a.r - 3.0 / 7.0).abs() < 1e-15);
    unsafe { qo_params_free(p) };

    let mut q = ptr::null_mut();
    assert_eq!(unsafe { qo_params_new(0.1, 0.1, 0.4, 0.4, &mut q) }, QoStatus::Ok);
    assert_eq!(unsafe { qo_params_validate(q, &mut a) }, QoStatus::Assumption);
    assert!(last_error().contains("distinct_utilizations"));
    unsafe { qo_params_free(q) };
}

#[test]
fn invalid_rates_leave_null_handle() {
    let mut p = 1usize as *mut QoParams;
    assert_eq!(unsafe { qo_params_new(0.5, 0.5, 0.5, 0.5, &mut p) }, QoStatus::InvalidArgument);
    assert!(p.is_null());
    assert!(!last_error().is_empty());
}

#[test]
fn null_pointers_rejected() {
    let mut out = 0.0;
    assert_eq!(unsafe { qo_grid_value(ptr::null(), 1, 1, &mut out) }, QoStatus::NullPointer);
    let p = params();
    assert_eq!(unsafe { qo_params_new(0.1, 0.2, 0.2, 0.5, ptr::null_mut()) }, QoStatus::NullPointer);
    assert_eq!(unsafe { qo_approx_coefficient_count(ptr::null()) }, 0);
    unsafe { qo_params_free(p) };
    unsafe { qo_params_free(ptr::null_mut()) };
}

#[test]
fn roots_and_approximations() {
    let p = params();
    let mut roots = QoRootPair::default();
    assert_eq!(unsafe { qo_betas_of_alpha(p, 0.7, 0.0, &mut roots) }, QoStatus::Ok);
    assert!((roots.beta1.re - 0.355636233990072).abs() < 1e-12);

    let mut h0 = ptr::null_mut();
    let mut c8 = 0.0;
    assert_eq!(unsafe { qo_build_h_a0(p, &mut h0, &mut c8) }, QoStatus::Ok);
    assert!(c8 > 1.35 && c8 < 1.37);

    let mut h = ptr::null_mut();
    assert_eq!(unsafe { qo_build_h_ak(p, 20, 0.7, &mut h) }, QoStatus::Ok);
    let (mut cstar, mut argmax) = (0.0, 0);
    assert_eq!(unsafe { qo_approx_cstar(h, &mut cstar, &mut argmax) }, QoStatus::Ok);
    assert_eq!(argmax, 21);
    assert_eq!(unsafe { qo_approx_coefficient_count(h) }, 21);
    let mut c = QoComplex::default();
    assert_eq!(unsafe { qo_approx_coefficient(h, 21, &mut c) }, QoStatus::InvalidArgument);

    let mut v = 0.0;
    assert_eq!(unsafe { qo_approx_eval(h, 5, 5, &mut v) }, QoStatus::Ok);
    assert!((v - 1.0).abs() <= cstar);
    assert_eq!(unsafe { qo_approx_eval(h, 5, -1, &mut v) }, QoStatus::InvalidArgument);

    let mut oracle = 0.0;
    assert_eq!(unsafe { qo_solve_py_inf(p, 12, 3, 1e-8, &mut oracle) }, QoStatus::Ok);
    assert_eq!(unsafe { qo_approx_eval(h, 12, 3, &mut v) }, QoStatus::Ok);
    assert!((v - oracle).abs() <= cstar * oracle);

    unsafe {
        qo_approx_free(h0);
        qo_approx_free(h);
        qo_params_free(p);
    }
}

#[test]
fn grid_and_monte_carlo() {
    let p = params();
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { qo_solve_pn(p, 8, QoMethod::Direct, &mut g) }, QoStatus::Ok);
    let mut exact = 0.0;
    assert_eq!(unsafe { qo_grid_value(g, 2, 1, &mut exact) }, QoStatus::Ok);
    assert_eq!(unsafe { qo_grid_value(g, 9, 1, &mut exact) }, QoStatus::InvalidArgument);
    assert_eq!(unsafe { qo_grid_value(g, 2, 1, &mut exact) }, QoStatus::Ok);

    let mut e = QoMcEstimate::default();
    assert_eq!(unsafe { qo_mc_pn(p, 2, 1, 8, 200_000, 5, &mut e) }, QoStatus::Ok);
    assert!((e.mean - exact).abs() <= 4.0 * e.half_width_95);
    assert_eq!(unsafe { qo_mc_py_inf(p, 3, 1, 1000, 100_000, 5, &mut e) }, QoStatus::Ok);
    assert_eq!(e.trials, 1000);

    let mut bad = ptr::null_mut();
    assert_eq!(unsafe { qo_solve_pn(p, 1, QoMethod::Auto, &mut bad) }, QoStatus::InvalidArgument);
    assert!(bad.is_null());
    unsafe {
        qo_grid_free(g);
        qo_params_free(p);
    }
}

#[test]
fn header_declares_every_symbol() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/qoverflow.h")).unwrap();
    let src = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/src/lib.rs")).unwrap();
    let exported: Vec<&str> = src
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exported.len() >= 15);
    for name in exported {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
}

#[test]
fn c_program_links_against_static_library() {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".to_string());
    let deps = std::env::current_exe().unwrap();
    let target_dir: PathBuf = deps.parent().unwrap().parent().unwrap().to_path_buf();
    let lib = target_dir.join("libqoverflow_ffi.a");
    if !lib.exists() || Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler or static library");
        return;
    }
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let exe = std::env::temp_dir().join(format!("qoverflow-smoke-{}", std::process::id()));
    let status = Command::new(&cc)
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    let _ = std::fs::remove_file(&exe);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let fields: Vec<&str> = text.split_whitespace().collect();
    assert_eq!(fields[0], "0.355636233990");
    assert_eq!(fields[1], "4");
    assert_eq!(fields[3], "2");
    assert_eq!(fields[4], "1");
}
