use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use fractrans_ffi::*;

fn last_error() -> String {
    let p = ft_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn read(f: impl Fn(*mut f64, usize, *mut usize) -> FtStatus) -> Vec<f64> {
    let mut len = 0;
    assert_eq!(f(ptr::null_mut(), 0, &mut len), FtStatus::Ok);
    let mut v = vec![0.0; len];
    assert_eq!(f(v.as_mut_ptr(), v.len(), &mut len), FtStatus::Ok);
    v
}

#[test]
fn linear_pipeline_matches_closed_form() {
    unsafe {
        let mut p = ptr::null_mut();
        assert_eq!(ft_params_new(0.75, 0.3, 0.1, -1.0, 8, 1.0, &mut p), FtStatus::Ok);
        let mut d = ptr::null_mut();
        assert_eq!(ft_driver_sample_bn(p, 7, 0, 64, &mut d), FtStatus::Ok);
        assert_eq!(ft_driver_len(d), 65);
        let name = CString::new("linear").unwrap();
        let mut c = ptr::null_mut();
        assert_eq!(ft_coeffs_preset(name.as_ptr(), 0.5, 2.0, 0.1, &mut c), FtStatus::Ok);
        let mut y = ptr::null_mut();
        assert_eq!(ft_solve_euler(c, 8, 64, d, &mut y), FtStatus::Ok);
        let mut x = ptr::null_mut();
        assert_eq!(ft_compose_x(c, 8, y, d, &mut x), FtStatus::Ok);

        let grid = read(|b, n, l| ft_driver_grid(d, b, n, l));
        let b = read(|buf, n, l| ft_driver_values(d, buf, n, l));
        let xs = read(|buf, n, l| ft_solution_x(x, buf, n, l));
        for i in 0..grid.len() {
            assert!((xs[i] - (0.1 + 0.5 * grid[i] + 2.0 * b[i])).abs() < 1e-12);
        }
        let mut len = 0;
        assert_eq!(ft_solution_x(y, ptr::null_mut(), 0, &mut len), FtStatus::NotApplicable);

        ft_solution_free(x);
        ft_solution_free(y);
        ft_coeffs_free(c);
        ft_driver_free(d);
        ft_params_free(p);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut p = ptr::null_mut();
        assert_eq!(ft_params_new(0.75, 0.9, 0.1, -1.0, 8, 1.0, &mut p), FtStatus::InvalidParameter);
        assert!(p.is_null());
        assert!(last_error().contains("beta"));

        let mut v = 0.0;
        assert_eq!(ft_fbm_covariance(0.7, 1.0, 1.0, &mut v), FtStatus::Ok);
        assert_eq!(v, 1.0);
        assert!(ft_last_error().is_null());
        assert_eq!(ft_alpha_n(1.0, 0.3, 0.05, &mut v), FtStatus::InvalidParameter);
        assert_eq!(ft_normalization_c(0.7, ptr::null_mut()), FtStatus::NullPointer);

        let name = CString::new("nope").unwrap();
        let mut c = ptr::null_mut();
        assert_eq!(ft_coeffs_preset(name.as_ptr(), 1.0, 1.0, 0.0, &mut c), FtStatus::Configuration);

        let mut d = ptr::null_mut();
        assert_eq!(ft_driver_exact_fbm(0.7, 1.0, 4, 1, 0, &mut d), FtStatus::Ok);
        let mut small = [0.0; 2];
        let mut len = 0;
        assert_eq!(ft_driver_values(d, small.as_mut_ptr(), 2, &mut len), FtStatus::BufferTooSmall);
        assert_eq!(len, 5);
        ft_driver_free(d);
        ft_driver_free(ptr::null_mut());
        assert_eq!(ft_driver_len(ptr::null()), 0);
    }
}

#[test]
fn scalar_helpers() {
    unsafe {
        let name = CString::new("sin-cos").unwrap();
        let mut c = ptr::null_mut();
        assert_eq!(ft_coeffs_preset(name.as_ptr(), 0.0, 0.0, 0.0, &mut c), FtStatus::Ok);
        let mut h = 0.0;
        assert_eq!(ft_h_flow(c, 1.0, 0.5, &mut h), FtStatus::Ok);
        assert!((h - 2.0 * (0.5f64.tan() * 0.5f64.exp()).atan()).abs() < 1e-10);
        assert_eq!(ft_h_euler(c, 2, 3.0, 0.0, &mut h), FtStatus::Ok);
        assert_eq!(h, 0.0);
        ft_coeffs_free(c);
        let v = CStr::from_ptr(ft_version()).to_str().unwrap();
        assert_eq!(v, env!("CARGO_PKG_VERSION"));
    }
}

#[test]
fn header_compiles_as_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/fractrans.h");
    let text = std::fs::read_to_string(&header).expect("generated header");
    for sym in ["ft_params_new", "ft_driver_sample_bn", "ft_compose_x", "FT_STATUS_BUFFER_TOO_SMALL", "typedef struct FtDriver FtDriver"] {
        assert!(text.contains(sym), "header lacks {sym}");
    }
    let Ok(probe) = Command::new("cc").arg("--version").output() else {
        eprintln!("no C compiler; syntax check skipped");
        return;
    };
    assert!(probe.status.success());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("probe.c");
    std::fs::write(
        &src,
        format!(
            "#include \"{}\"\nint main(void) {{ FtParams *p = 0; return ft_params_new(0.75, 0.3, 0.1, -1.0, 8, 1.0, &p) == FT_STATUS_OK ? 0 : 1; }}\n",
            header.display()
        ),
    )
    .unwrap();
    let out = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only"])
        .arg(&src)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
