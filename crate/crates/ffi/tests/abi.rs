use std::ffi::CStr;
use std::f64::consts::FRAC_PI_2;
use std::ptr;

use curvedseq_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(csq_last_error()) }.to_string_lossy().into_owned()
}

fn family(model: CsqModel, r: f64) -> *mut CsqFamily {
    let mut f = ptr::null_mut();
    assert_eq!(unsafe { csq_family_new(model, 2, r, &mut f) }, CsqStatus::Ok);
    assert!(!f.is_null());
    f
}

#[test]
fn family_lifecycle_and_geometry() {
    let f = family(CsqModel::Vmf, 0.2);
    unsafe {
        assert_eq!(csq_family_dim(f), 2);
        assert_eq!(csq_family_ambient_dim(f), 3);
        let u = [FRAC_PI_2, FRAC_PI_2];
        let mut g = [0.0; 2];
        assert_eq!(csq_family_metric(f, u.as_ptr(), g.as_mut_ptr()), CsqStatus::Ok);
        assert!(g[0] > 0.0 && (g[0] - g[1]).abs() < 1e-12);
        let (mut theta, mut eta) = ([0.0; 3], [0.0; 3]);
        assert_eq!(csq_family_embed(f, u.as_ptr(), theta.as_mut_ptr(), eta.as_mut_ptr()), CsqStatus::Ok);
        let norm = theta.iter().map(|t| t * t).sum::<f64>().sqrt();
        assert!((norm - 0.2).abs() < 1e-12);
        csq_family_free(f);
        csq_family_free(ptr::null_mut());
    }
}

#[test]
fn errors_map_to_codes_and_messages() {
    let mut f = ptr::null_mut();
    unsafe {
        assert_eq!(csq_family_new(CsqModel::Vmf, 1, 0.2, &mut f), CsqStatus::Domain);
        assert!(f.is_null());
        assert!(last_error().contains("dimension"));
        assert_eq!(csq_family_new(CsqModel::Vmf, 2, 0.2, ptr::null_mut()), CsqStatus::NullPointer);
        assert_eq!(csq_coefficients(2, 1.5, 1.0, &mut CsqCoefficients::default()), CsqStatus::Domain);
        assert_eq!(csq_coefficients(2, 0.05, 1.0, &mut CsqCoefficients::default()), CsqStatus::Ok);
        assert_eq!(last_error(), "");
        assert_eq!(csq_family_dim(ptr::null()), 0);
    }
}

#[test]
fn coefficients_and_losses() {
    let mut c = CsqCoefficients::default();
    unsafe {
        assert_eq!(csq_coefficients(3, 0.05, 2.0, &mut c), CsqStatus::Ok);
        assert!(c.xi0 > 0.0 && c.xi1 > 0.0 && c.xi2 > 0.0);
        let (mut d1, mut d2) = (f64::NAN, f64::NAN);
        assert_eq!(csq_delta_p(3, 0.05, 2.0, c.k1, c.k2, &mut d1, &mut d2), CsqStatus::Ok);
        assert!(d1.abs() < 1e-9 && d2.abs() < 1e-9);
        assert_eq!(csq_delta_p(3, 0.05, 2.0, 0.0, 0.0, &mut d1, &mut d2), CsqStatus::Ok);
        assert!(d1 > 0.0);
    }
}

#[test]
fn sampling_and_fixed_sample_test() {
    let f = family(CsqModel::Hyperboloid, 2.0);
    let u0 = [1.0, FRAC_PI_2];
    let n = 200;
    let draw = |seed| {
        let s = csq_stream_new(seed, 0);
        let mut x = vec![0.0; n * 3];
        assert_eq!(unsafe { csq_sample(f, u0.as_ptr(), n, s, x.as_mut_ptr()) }, CsqStatus::Ok);
        unsafe { csq_stream_free(s) };
        x
    };
    let x = draw(4);
    assert_eq!(x, draw(4));
    assert_ne!(x, draw(5));
    for row in x.chunks(3) {
        // Points lie on the upper sheet of the unit hyperboloid.
        assert!((row[0] * row[0] - row[1] * row[1] - row[2] * row[2] - 1.0).abs() < 1e-8 * row[0] * row[0]);
    }
    let mut sum = [0.0; 3];
    for row in x.chunks(3) {
        for i in 0..3 {
            sum[i] += row[i];
        }
    }
    let mut o = CsqOutcome::default();
    unsafe {
        for test in [CsqTest::Mlt, CsqTest::Wald, CsqTest::Lrt, CsqTest::Est, CsqTest::Designed] {
            let st = csq_nonseq_test(f, test, 0.5, 0.5, 0.05, u0.as_ptr(), sum.as_ptr(), n, &mut o);
            assert_eq!(st, CsqStatus::Ok, "{test:?}: {}", last_error());
            assert!(o.statistic >= 0.0 && o.tau == 0);
        }
        assert_eq!(csq_nonseq_test(f, CsqTest::Mlt, 0.0, 0.0, 0.05, u0.as_ptr(), sum.as_ptr(), 0, &mut o), CsqStatus::Domain);
        csq_family_free(f);
    }
}

#[test]
fn sequential_plan_runs() {
    let f = family(CsqModel::Hyperboloid, 2.0);
    let u0 = [1.0, FRAC_PI_2];
    let mut plan = ptr::null_mut();
    unsafe {
        assert_eq!(csq_seq_plan_new(f, CsqTest::Mlt, 0.0, 0.0, 0.05, u0.as_ptr(), 60.0, 0.0, &mut plan), CsqStatus::Ok);
        csq_family_free(f);
        let mut taus = Vec::new();
        for i in 0..50 {
            let s = csq_stream_new(1, i);
            let mut o = CsqOutcome::default();
            assert_eq!(csq_seq_run(plan, u0.as_ptr(), s, &mut o), CsqStatus::Ok);
            assert!(o.tau >= 5 && !o.truncated);
            taus.push(o.tau as f64);
            csq_stream_free(s);
        }
        let mean = taus.iter().sum::<f64>() / 50.0;
        assert!((mean / 60.0 - 1.0).abs() < 0.3, "mean tau {mean}");
        let mut bad = ptr::null_mut();
        let st = csq_seq_plan_new(ptr::null(), CsqTest::Mlt, 0.0, 0.0, 0.05, u0.as_ptr(), 60.0, 0.0, &mut bad);
        assert_eq!(st, CsqStatus::NullPointer);
        csq_seq_plan_free(plan);
    }
}

#[test]
fn version_is_package_version() {
    let v = unsafe { CStr::from_ptr(csq_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_compiles_as_c() {
    let Ok(cc) = std::process::Command::new("cc").arg("--version").output() else { return };
    assert!(cc.status.success());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("t.c");
    std::fs::write(
        &src,
        "#include \"curvedseq.h\"\nint main(void) { CsqFamily *f = 0; CsqStatus s = csq_family_new(CSQ_MODEL_VMF, 2, 0.2, &f); csq_family_free(f); return s; }\n",
    )
    .unwrap();
    let include = concat!(env!("CARGO_MANIFEST_DIR"), "/include");
    let out = std::process::Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I", include])
        .arg(&src)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
