use epitrace_ffi::*;
use std::ffi::{CStr, CString};
use std::ptr;

fn last_error() -> String {
    let p = et_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

unsafe fn grid(lo: f64, hi: f64, res: usize, f: impl Fn(f64, f64) -> f64) -> *mut EtGrid {
    let mut vals = Vec::new();
    let step = (hi - lo) / (res - 1) as f64;
    for i in 0..res {
        for j in 0..res {
            vals.push(f(lo + i as f64 * step, lo + j as f64 * step));
        }
    }
    let mut g = ptr::null_mut();
    let st = et_grid_new(2, [lo, lo].as_ptr(), [hi, hi].as_ptr(), [res, res].as_ptr(), vals.as_ptr(), vals.len(), &mut g);
    assert_eq!(st, EtStatus::Ok);
    g
}

#[test]
fn quadratic_is_self_dual_through_the_abi() {
    unsafe {
        let g = grid(-2.0, 2.0, 41, |x, y| 0.5 * (x * x + y * y));
        let mut conj = ptr::null_mut();
        assert_eq!(et_legendre(g, [-1.0, -1.0].as_ptr(), [1.0, 1.0].as_ptr(), [21, 21].as_ptr(), &mut conj), EtStatus::Ok);
        let n = et_grid_len(conj);
        assert_eq!(n, 441);
        let mut buf = vec![0.0; n];
        assert_eq!(et_grid_values(conj, buf.as_mut_ptr(), n), EtStatus::Ok);
        for i in 0..21 {
            for j in 0..21 {
                let (s, t) = (-1.0 + 0.1 * i as f64, -1.0 + 0.1 * j as f64);
                assert!((buf[i * 21 + j] - 0.5 * (s * s + t * t)).abs() < 1e-12);
            }
        }
        assert_eq!(et_grid_values(conj, buf.as_mut_ptr(), 3), EtStatus::InvalidArgument);
        et_grid_free(conj);
        et_grid_free(g);
    }
}

#[test]
fn hopflax_with_zero_h_is_identity() {
    unsafe {
        let g = grid(-1.0, 1.0, 9, |x, y| x.abs() + y * y);
        let w = grid(-1.0, 1.0, 9, |x, y| x * x + y * y);
        let mut q = ptr::null_mut();
        assert_eq!(et_hopflax(g, w, 0.0, &mut q), EtStatus::Ok);
        let mut a = vec![0.0; 81];
        let mut b = vec![0.0; 81];
        et_grid_values(g, a.as_mut_ptr(), 81);
        et_grid_values(q, b.as_mut_ptr(), 81);
        assert_eq!(a, b);
        assert_eq!(et_hopflax(g, w, -1.0, &mut q), EtStatus::InvalidArgument);
        for p in [g, w, q] {
            et_grid_free(p);
        }
    }
}

#[test]
fn domains_and_constants() {
    unsafe {
        let kind = CString::new("cone").unwrap();
        let mut d = ptr::null_mut();
        assert_eq!(et_domain_new(kind.as_ptr(), 2, [1.0].as_ptr(), 1, &mut d), EtStatus::Ok);
        let mut inside = false;
        assert_eq!(et_domain_contains(d, [0.5, 0.6].as_ptr(), 2, 0.0, &mut inside), EtStatus::Ok);
        assert!(inside);
        assert_eq!(et_domain_bh_membership(d, [0.5, 0.4].as_ptr(), 2, 0.0, &mut inside), EtStatus::Ok);
        assert!(!inside);
        assert_eq!(et_domain_contains(d, [0.5].as_ptr(), 1, 0.0, &mut inside), EtStatus::DimensionMismatch);

        let mut k = EtConstants::default();
        assert_eq!(et_sharp_constants(d, 2.5, 1.5, &mut k), EtStatus::Ok);
        assert!((k.c - 0.910377899314).abs() < 1e-8, "{}", k.c);
        assert!((k.d - 0.94460536450).abs() < 1e-8, "{}", k.d);

        assert_eq!(et_sharp_constants(d, 2.5, 3.0, &mut k), EtStatus::Hypothesis);
        assert!(last_error().contains("n > p > 1"));
        et_domain_free(d);

        let bad = CString::new("sphere").unwrap();
        assert_eq!(et_domain_new(bad.as_ptr(), 2, ptr::null(), 0, &mut d), EtStatus::InvalidArgument);
        assert!(last_error().contains("sphere"));
    }
}

#[test]
fn null_pointers_are_reported() {
    unsafe {
        assert_eq!(et_grid_new(2, ptr::null(), ptr::null(), ptr::null(), ptr::null(), 0, ptr::null_mut()), EtStatus::NullPointer);
        assert!(last_error().contains("lo"));
        let mut k = EtConstants::default();
        assert_eq!(et_sharp_constants(ptr::null(), 2.5, 1.5, &mut k), EtStatus::NullPointer);
        et_grid_free(ptr::null_mut());
        et_domain_free(ptr::null_mut());
        et_string_free(ptr::null_mut());
        assert_eq!(et_grid_len(ptr::null()), 0);
    }
}

#[test]
fn gap_and_config_runs() {
    unsafe {
        let cfg = CString::new(r#"{"domain": {"kind": "half_space"}, "params": {"n": 2, "p": 1.5, "a": 2.0}, "checks": ["constants"]}"#).unwrap();
        let mut rep = ptr::null_mut();
        let mut passed = false;
        assert_eq!(et_run_config(cfg.as_ptr(), &mut rep, &mut passed), EtStatus::Ok);
        assert!(passed);
        let text = CStr::from_ptr(rep).to_str().unwrap().to_string();
        et_string_free(rep);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        let c = v["checks"][0]["result"]["constants"]["C"].as_f64().unwrap();
        assert!((c - 1.6281028237).abs() < 1e-8);

        let bad = CString::new(r#"{"checks": ["nope"]}"#).unwrap();
        assert_eq!(et_run_config(bad.as_ptr(), &mut rep, &mut passed), EtStatus::Parse);
        assert!(last_error().contains("line 1"));

        // even resolution: the gap needs odd grids
        let g = grid(-1.0, 1.0, 10, |x, y| 1.0 + x * x + y * y);
        let mut r = EtGap::default();
        assert_eq!(et_bbl_gap(g, g, 2, 2.0, 1.5, 0.5, &mut r), EtStatus::InvalidArgument);
        et_grid_free(g);
    }
}

#[test]
fn version_is_set() {
    let v = unsafe { CStr::from_ptr(et_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}
