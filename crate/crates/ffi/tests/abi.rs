use std::ffi::{CStr, CString};
use std::ptr;

use maass_universality_ffi::*;

fn last_error() -> String {
    let p = mu_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn log_gamma_half() {
    let mut out = MuComplex { re: 0.0, im: 0.0 };
    let st = unsafe { mu_log_gamma(MuComplex { re: 0.5, im: 0.0 }, &mut out) };
    assert_eq!(st, MuStatus::Ok);
    assert!((out.re - 0.5 * std::f64::consts::PI.ln()).abs() < 1e-13);
}

#[test]
fn log_gamma_pole_sets_error() {
    let mut out = MuComplex { re: 0.0, im: 0.0 };
    let st = unsafe { mu_log_gamma(MuComplex { re: -2.0, im: 0.0 }, &mut out) };
    assert_eq!(st, MuStatus::Numerical);
    assert!(last_error().contains("pole"));
}

#[test]
fn null_out_pointer() {
    let st = unsafe { mu_log_gamma(MuComplex { re: 1.0, im: 0.0 }, ptr::null_mut()) };
    assert_eq!(st, MuStatus::NullPointer);
    assert!(last_error().contains("null"));
}

#[test]
fn measure_round_trip() {
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { mu_measure_new(3, &mut m) }, MuStatus::Ok);
    let mut x = 0.0;
    let mut u = 0.0;
    unsafe {
        assert_eq!(mu_measure_quantile(m, 0.3, &mut x), MuStatus::Ok);
        assert_eq!(mu_measure_cdf(m, x, &mut u), MuStatus::Ok);
        assert_eq!(mu_measure_quantile(m, 1.5, &mut x), MuStatus::InvalidArgument);
        mu_measure_free(m);
    }
    assert!((u - 0.3).abs() < 1e-10);
    let mut mass = 0.0;
    assert_eq!(unsafe { mu_interval_mass(5, -2.0, 2.0, &mut mass) }, MuStatus::Ok);
    assert!((mass - 1.0).abs() < 1e-10);
    let mut d = 0.0;
    assert_eq!(unsafe { mu_sarnak_density(1, 0.0, &mut d) }, MuStatus::InvalidArgument);
}

fn constant_form(value: f64) -> *mut MuForm {
    let primes: Vec<u64> = vec![2, 3, 5, 7, 11, 13];
    let eigs = vec![value; primes.len()];
    let label = CString::new("c").unwrap();
    let mut f = ptr::null_mut();
    let st = unsafe { mu_form_new(label.as_ptr(), 4.0, 1, primes.as_ptr(), eigs.as_ptr(), primes.len(), &mut f) };
    assert_eq!(st, MuStatus::Ok);
    f
}

#[test]
fn form_accessors_and_euler_product() {
    let f = constant_form(0.0);
    unsafe {
        assert_eq!(mu_form_r(f), 4.0);
        assert_eq!(mu_form_parity(f), 1);
        assert_eq!(mu_form_p_cap(f), 13);
        // lambda(p) = 0: each factor is 1 + p^{-2s}.
        let mut out = MuComplex { re: 0.0, im: 0.0 };
        assert_eq!(mu_partial_euler_inverse(f, 3, MuComplex { re: 1.0, im: 0.0 }, &mut out), MuStatus::Ok);
        assert!((out.re - 1.25 * (1.0 + 1.0 / 9.0)).abs() < 1e-14 && out.im.abs() < 1e-15);
        assert_eq!(mu_partial_euler_inverse(f, 17, MuComplex { re: 1.0, im: 0.0 }, &mut out), MuStatus::InvalidArgument);
        mu_form_free(f);
        assert!(mu_form_r(ptr::null()).is_nan());
    }
}

#[test]
fn form_validation_failure() {
    let label = CString::new("bad").unwrap();
    let primes = [2u64];
    let eigs = [3.0];
    let mut f = ptr::null_mut();
    let st = unsafe { mu_form_new(label.as_ptr(), 4.0, 0, primes.as_ptr(), eigs.as_ptr(), 1, &mut f) };
    assert_eq!(st, MuStatus::Validation);
    assert!(f.is_null());
    assert!(last_error().contains("exceeds"));
}

#[test]
fn dataset_and_evaluation() {
    let path = CString::new(maass_universality::io::bundled_fixture().to_str().unwrap()).unwrap();
    let mut d = ptr::null_mut();
    unsafe {
        assert_eq!(mu_dataset_load(path.as_ptr(), &mut d), MuStatus::Ok);
        assert_eq!(mu_dataset_len(d), 4);
        let mut f = ptr::null_mut();
        assert_eq!(mu_dataset_form(d, 9, &mut f), MuStatus::InvalidArgument);
        assert_eq!(mu_dataset_form(d, 0, &mut f), MuStatus::Ok);
        mu_dataset_free(d);
        let s = MuComplex { re: 1.5, im: 0.0 };
        let mut l = MuComplex { re: 0.0, im: 0.0 };
        assert_eq!(mu_evaluate_l(f, s, 256, &mut l), MuStatus::Ok);
        let mut inv = MuComplex { re: 0.0, im: 0.0 };
        assert_eq!(mu_partial_euler_inverse(f, 100_000, s, &mut inv), MuStatus::Ok);
        let prod = maass_universality::Complex64::new(l.re, l.im) * maass_universality::Complex64::new(inv.re, inv.im);
        assert!((prod - 1.0).norm() < 1e-3, "L * L_X^-1 = {prod}");
        mu_form_free(f);
    }
    let missing = CString::new("/nonexistent/forms.jsonl").unwrap();
    let mut d = ptr::null_mut();
    assert_eq!(unsafe { mu_dataset_load(missing.as_ptr(), &mut d) }, MuStatus::Io);
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(mu_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/maass_universality.h")).unwrap();
    for name in [
        "mu_last_error", "mu_version", "mu_log_gamma", "mu_sarnak_density", "mu_interval_mass", "mu_measure_new",
        "mu_measure_free", "mu_measure_cdf", "mu_measure_quantile", "mu_form_new", "mu_form_free", "mu_form_r",
        "mu_form_parity", "mu_form_p_cap", "mu_dataset_load", "mu_dataset_len", "mu_dataset_form",
        "mu_dataset_free", "mu_evaluate_l", "mu_partial_euler_inverse",
    ] {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
    assert!(header.contains("typedef struct MuForm MuForm;"));
}

#[test]
fn header_compiles_as_c() {
    let Ok(cc) = which_cc() else { return };
    let dir = tempfile_dir();
    let src = dir.join("probe.c");
    std::fs::write(
        &src,
        "#include \"maass_universality.h\"\nint main(void) { MuComplex z = {0.5, 0.0}; MuComplex o; return mu_log_gamma(z, &o) == MU_STATUS_OK ? 0 : 1; }\n",
    )
    .unwrap();
    let status = std::process::Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I", concat!(env!("CARGO_MANIFEST_DIR"), "/include")])
        .arg(&src)
        .status()
        .unwrap();
    assert!(status.success());
}

fn which_cc() -> Result<&'static str, ()> {
    for cc in ["cc", "gcc", "clang"] {
        if std::process::Command::new(cc).arg("--version").output().is_ok() {
            return Ok(cc);
        }
    }
    Err(())
}

fn tempfile_dir() -> std::path::PathBuf {
    let d = std::env::temp_dir().join(format!("mu-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}
