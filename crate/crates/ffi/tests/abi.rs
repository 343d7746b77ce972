use std::ffi::CStr;
use std::ptr;

use kawahara_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as std::ffi::c_char; 256];
    let n = unsafe { kw_last_error_message(buf.as_mut_ptr(), buf.len()) };
    let s = unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned();
    assert_eq!(s.len(), n);
    s
}

#[test]
fn eigenvalues_and_errors() {
    let mut v = 0.0;
    assert_eq!(unsafe { kw_eigenvalue(2, std::f64::consts::PI, &mut v) }, KwStatus::Ok);
    assert_eq!(v, 38.0);
    assert_eq!(kw_last_error_length(), 0);
    assert_eq!(unsafe { kw_eigenvalue(2, -1.0, &mut v) }, KwStatus::Domain);
    assert!(kw_last_error_length() > 0);
    assert!(last_error().contains("domain"));
    assert_eq!(unsafe { kw_eigenvalue(2, 1.0, ptr::null_mut()) }, KwStatus::NullPointer);
    assert_eq!(last_error(), "out is null");
}

#[test]
fn field_round_trip_and_evolution() {
    let re = [0.0, 1.0, 0.0];
    let im = [0.5, 0.0, 0.0];
    let mut f = ptr::null_mut();
    assert_eq!(unsafe { kw_field_new(1.0, 1, re.as_ptr(), im.as_ptr(), &mut f) }, KwStatus::Ok);
    assert_eq!(unsafe { kw_field_order(f) }, 1);
    assert!((unsafe { kw_field_norm(f) } - 1.25f64.sqrt()).abs() < 1e-15);
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { kw_evolve(f, 0.7, &mut g) }, KwStatus::Ok);
    assert!((unsafe { kw_field_norm(g) } - 1.25f64.sqrt()).abs() < 1e-14);
    let (mut r, mut i) = ([0.0; 3], [0.0; 3]);
    assert_eq!(unsafe { kw_field_coeffs(g, r.as_mut_ptr(), i.as_mut_ptr(), 3) }, KwStatus::Ok);
    // Mode 0 has λ = 0 and is stationary.
    assert_eq!((r[1], i[1]), (1.0, 0.0));
    assert_eq!(unsafe { kw_field_coeffs(g, r.as_mut_ptr(), i.as_mut_ptr(), 2) }, KwStatus::Dimension);
    let xs = [-0.5, 0.0, 0.5];
    let (mut vr, mut vi) = ([0.0; 3], [0.0; 3]);
    assert_eq!(unsafe { kw_field_sample(f, xs.as_ptr(), 3, vr.as_mut_ptr(), vi.as_mut_ptr()) }, KwStatus::Ok);
    assert!((vr[1] - 1.0 / 2f64.sqrt()).abs() < 1e-15);
    unsafe {
        kw_field_free(f);
        kw_field_free(g);
        kw_field_free(ptr::null_mut());
    }
    assert_eq!(unsafe { kw_field_order(ptr::null()) }, 0);
    assert!(unsafe { kw_field_norm(ptr::null()) }.is_nan());
}

#[test]
fn observability_constants() {
    let mut o = KwObservability::default();
    assert_eq!(unsafe { kw_observability_constant(8, 1.0, 0.5, 1.0, &mut o) }, KwStatus::Ok);
    assert!(o.eig_min > 0.0);
    assert!((o.c_obs - 1.0 / o.eig_min.sqrt()).abs() < 1e-14);
    assert_eq!(o.c_full, o.c_obs);
    assert_eq!(unsafe { kw_observability_constant(8, 1.0, 1.5, 1.0, &mut o) }, KwStatus::Domain);
}

#[test]
fn control_free_orbit() {
    let mut u0 = ptr::null_mut();
    let mut ut = ptr::null_mut();
    let mut c = ptr::null_mut();
    unsafe {
        assert_eq!(kw_field_random(4, std::f64::consts::PI, 6, &mut u0), KwStatus::Ok);
        assert_eq!(kw_evolve(u0, 1.0, &mut ut), KwStatus::Ok);
        assert_eq!(kw_control_synthesize(u0, ut, 1.0, 0.2, &mut c), KwStatus::Ok);
    }
    let mut s = KwControlSummary::default();
    assert_eq!(unsafe { kw_control_summary(c, &mut s) }, KwStatus::Ok);
    assert!(s.accepted);
    assert!(s.residual_0 < 1e-12 && s.residual_t < 1e-12);
    assert!(s.support_lo > 0.2 && s.support_hi < 0.8);
    let mut end = ptr::null_mut();
    let mut w = ptr::null_mut();
    unsafe {
        assert_eq!(kw_control_state(c, 1.0, &mut end), KwStatus::Ok);
        assert_eq!(kw_control_source(c, 0.05, &mut w), KwStatus::Ok);
        assert_eq!(kw_field_norm(w), 0.0);
        let (mut a, mut b) = ([0.0; 13], [0.0; 13]);
        let (mut x, mut y) = ([0.0; 13], [0.0; 13]);
        kw_field_coeffs(end, a.as_mut_ptr(), b.as_mut_ptr(), 13);
        kw_field_coeffs(ut, x.as_mut_ptr(), y.as_mut_ptr(), 13);
        for k in 0..13 {
            assert!((a[k] - x[k]).abs() < 1e-12 && (b[k] - y[k]).abs() < 1e-12);
        }
        for p in [u0, ut, end, w] {
            kw_field_free(p);
        }
        kw_control_free(c);
    }
}

#[test]
fn mismatched_spaces_are_rejected() {
    let mut a = ptr::null_mut();
    let mut b = ptr::null_mut();
    let mut c = ptr::null_mut();
    unsafe {
        kw_field_random(1, 1.0, 4, &mut a);
        kw_field_random(2, 1.0, 5, &mut b);
        let st = kw_control_synthesize(a, b, 1.0, 0.2, &mut c);
        assert_ne!(st, KwStatus::Ok);
        assert!(c.is_null());
        assert!(kw_last_error_length() > 0);
        kw_field_free(a);
        kw_field_free(b);
    }
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(kw_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
