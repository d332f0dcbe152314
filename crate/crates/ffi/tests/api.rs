use std::ffi::{CStr, CString};
use std::ptr;

use deformexp_ffi::*;

fn last_error() -> String {
    let p = dx_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

unsafe fn matrix(dim: usize, re: &[f64]) -> *mut DxMatrix {
    let mut m = ptr::null_mut();
    assert_eq!(dx_matrix_new(dim, re.as_ptr(), ptr::null(), &mut m), DxStatus::Ok);
    m
}

#[test]
fn scalar_functions() {
    let mut x = 0.0;
    unsafe {
        assert_eq!(dx_phi(1.0, 1.0, &mut x), DxStatus::Ok);
        assert_eq!(x, 0.5);
        assert!(dx_last_error().is_null());
        assert_eq!(dx_log_phi(std::f64::consts::E, 1.0, &mut x), DxStatus::Ok);
        assert!((x - std::f64::consts::E).abs() < 1e-15);
        assert_eq!(dx_exp_phi(-1.0, 1.0, &mut x), DxStatus::Ok);
        assert!((x * x.exp() - 1.0).abs() < 1e-15);
        assert_eq!(dx_phi(-1.0, 1.0, &mut x), DxStatus::Domain);
        assert!(last_error().contains("domain"));
        assert_eq!(dx_exp_phi(0.0, 0.0, &mut x), DxStatus::Domain);
        assert_eq!(dx_phi(1.0, 1.0, ptr::null_mut()), DxStatus::NullPointer);
        let e = std::f64::consts::E;
        assert_eq!(dx_violation_threshold(2.0, &mut x), DxStatus::Ok);
        assert!((x - 2.0 * (3.0 - e) / (e * e - 3.0 * e + 1.0)).abs() < 1e-15);
    }
}

#[test]
fn matrix_round_trip() {
    unsafe {
        let re = [1.0, 0.5, 0.5, -2.0];
        let im = [0.0, 0.25, -0.25, 0.0];
        let mut m = ptr::null_mut();
        assert_eq!(dx_matrix_new(2, re.as_ptr(), im.as_ptr(), &mut m), DxStatus::Ok);
        assert_eq!(dx_matrix_dim(m), 2);
        let (mut r, mut i) = ([0.0; 4], [0.0; 4]);
        assert_eq!(dx_matrix_copy(m, r.as_mut_ptr(), i.as_mut_ptr()), DxStatus::Ok);
        assert_eq!(r, re);
        assert_eq!(i, im);
        dx_matrix_free(m);

        let bad = [1.0, 0.5, 0.4, 1.0];
        let mut m = ptr::null_mut();
        assert_eq!(dx_matrix_new(2, bad.as_ptr(), ptr::null(), &mut m), DxStatus::NotHermitian);
        assert!(m.is_null());
        assert_eq!(dx_matrix_dim(ptr::null()), 0);
        dx_matrix_free(ptr::null_mut());

        let json = CString::new(r#"{"dim":1,"re":[[2.0]],"im":[[0.0]]}"#).unwrap();
        assert_eq!(dx_matrix_from_json(json.as_ptr(), &mut m), DxStatus::Ok);
        assert_eq!(dx_matrix_dim(m), 1);
        dx_matrix_free(m);
        let junk = CString::new("{").unwrap();
        assert_eq!(dx_matrix_from_json(junk.as_ptr(), &mut m), DxStatus::Malformed);
    }
}

#[test]
fn qubit_model() {
    unsafe {
        let rho_m = matrix(2, &[0.5, 0.0, 0.0, 0.5]);
        let k = matrix(2, &[1.0, 0.0, 0.0, -1.0]);
        let mut rho = ptr::null_mut();
        assert_eq!(dx_density_new(rho_m, &mut rho), DxStatus::Ok);

        let mut alpha = 0.0;
        assert_eq!(dx_solve_alpha(rho, k, 1.0, false, &mut alpha), DxStatus::Ok);
        assert!((alpha - 0.1299).abs() < 5e-4);

        let mut model = ptr::null_mut();
        assert_eq!(dx_model_new(rho, k, 1.0, &mut model), DxStatus::Ok);
        let mut a2 = 0.0;
        assert_eq!(dx_model_alpha(model, &mut a2), DxStatus::Ok);
        assert_eq!(alpha, a2);
        let mut sigma = [0.0; 4];
        assert_eq!(dx_model_sigma(model, sigma.as_mut_ptr(), ptr::null_mut()), DxStatus::Ok);
        assert!((sigma[0] + sigma[3] - 1.0).abs() < 1e-11);
        let mut z = 0.0;
        assert_eq!(dx_model_escort_z(model, &mut z), DxStatus::Ok);
        assert!(z > 0.0 && z <= 0.5);
        let mut d = 1.0;
        assert_eq!(dx_model_alpha_derivative(model, 0.0, &mut d), DxStatus::Ok);
        assert!(d.abs() < 1e-15);
        dx_model_free(model);

        let shifted = matrix(2, &[3.0, 0.0, 0.0, 1.0]);
        assert_eq!(dx_solve_alpha(rho, shifted, 1.0, false, &mut alpha), DxStatus::NotCentered);
        assert_eq!(dx_solve_alpha(rho, shifted, 1.0, true, &mut alpha), DxStatus::Ok);
        assert!((alpha - a2 - 2.0).abs() < 1e-12);

        let three = matrix(3, &[1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(dx_model_new(rho, three, 1.0, &mut model), DxStatus::DimensionMismatch);

        let not_density = matrix(2, &[0.7, 0.0, 0.0, 0.7]);
        let mut bad = ptr::null_mut();
        assert_eq!(dx_density_new(not_density, &mut bad), DxStatus::InvalidTrace);

        for m in [rho_m, k, shifted, three, not_density] {
            dx_matrix_free(m);
        }
        dx_density_free(rho);
    }
}

#[test]
fn counterexample_json() {
    unsafe {
        let mut s = ptr::null_mut();
        assert_eq!(dx_counterexample_json(DxLabFunction::LogExpPhi as u32, 1.0, 0, &mut s), DxStatus::Ok);
        let text = CStr::from_ptr(s).to_str().unwrap().to_owned();
        dx_string_free(s);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["function"], "log-exp-phi");
        assert!(v["violation"].as_f64().unwrap() <= -1e-6);
        assert_eq!(dx_counterexample_json(17, 1.0, 0, &mut s), DxStatus::InvalidConfig);
    }
}
