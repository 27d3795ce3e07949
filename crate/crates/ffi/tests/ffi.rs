use std::ffi::{CStr, CString};
use std::ptr;

use wgstokes_ffi::*;

fn last_error() -> String {
    let p = wgs_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn structured_mesh_handle() {
    let mut mesh = ptr::null_mut();
    unsafe {
        assert_eq!(wgs_mesh_new_structured(2, 4, &mut mesh), WgsStatus::Ok);
        assert_eq!(wgs_mesh_num_elements(mesh), 2 * 16);
        assert_eq!(wgs_mesh_dim(mesh), 2);
        wgs_mesh_free(mesh);
        assert_eq!(wgs_mesh_new_structured(3, 2, &mut mesh), WgsStatus::Ok);
        assert_eq!(wgs_mesh_num_elements(mesh), 6 * 8);
        wgs_mesh_free(mesh);
    }
}

#[test]
fn invalid_arguments_report_codes_and_messages() {
    let mut mesh = ptr::null_mut();
    unsafe {
        assert_eq!(wgs_mesh_new_structured(4, 2, &mut mesh), WgsStatus::InvalidArgument);
        assert!(last_error().contains("dimension"));
        assert_eq!(wgs_mesh_new_structured(2, 0, &mut mesh), WgsStatus::MeshError);
        assert_eq!(wgs_mesh_new_structured(2, 2, ptr::null_mut()), WgsStatus::NullPointer);
        let path = CString::new("/nonexistent/mesh.msh").unwrap();
        assert_eq!(wgs_mesh_load(path.as_ptr(), &mut mesh), WgsStatus::MeshError);
        assert!(!last_error().is_empty());
        let mut sol = ptr::null_mut();
        assert_eq!(
            wgs_solve(ptr::null(), 1.0, WgsMethod::Minres, WgsPreconditioner::Default, 0.0, &mut sol),
            WgsStatus::NullPointer
        );
        assert_eq!(wgs_mesh_new_structured(2, 2, &mut mesh), WgsStatus::Ok);
        assert!(wgs_last_error_message().is_null());
        assert_eq!(
            wgs_solve(mesh, -1.0, WgsMethod::Minres, WgsPreconditioner::Default, 0.0, &mut sol),
            WgsStatus::ProblemError
        );
        assert_eq!(
            wgs_solve(mesh, 1.0, WgsMethod::Minres, WgsPreconditioner::BlockLowerTri, 0.0, &mut sol),
            WgsStatus::ConfigError
        );
        assert!(sol.is_null());
        wgs_mesh_free(mesh);
        // NULL handles are accepted by accessors and destructors
        wgs_mesh_free(ptr::null_mut());
        wgs_solution_free(ptr::null_mut());
        assert_eq!(wgs_solution_iterations(ptr::null()), 0);
        assert!(wgs_solution_final_relres(ptr::null()).is_nan());
    }
}

#[test]
fn solve_round_trip() {
    let mut mesh = ptr::null_mut();
    let mut sol = ptr::null_mut();
    unsafe {
        assert_eq!(wgs_mesh_new_structured(2, 8, &mut mesh), WgsStatus::Ok);
        assert_eq!(
            wgs_solve(mesh, 1.0, WgsMethod::Gmres, WgsPreconditioner::Default, 1e-9, &mut sol),
            WgsStatus::Ok
        );
        assert!(wgs_solution_converged(sol));
        let iters = wgs_solution_iterations(sol);
        assert!((10..=30).contains(&iters), "{iters}");
        assert!(wgs_solution_final_relres(sol) <= 1e-9);
        let (mut l2, mut sc, mut pe) = (0.0, 0.0, 0.0);
        assert_eq!(wgs_solution_errors(sol, &mut l2, &mut sc, &mut pe), WgsStatus::Ok);
        assert!(l2 > 0.05 && l2 < 0.2, "{l2}");
        assert!(sc < l2);
        assert!(pe.is_finite());
        assert_eq!(wgs_solution_errors(sol, ptr::null_mut(), ptr::null_mut(), ptr::null_mut()), WgsStatus::Ok);

        let n = wgs_solution_pressure(sol, ptr::null_mut(), 0);
        assert_eq!(n, 128);
        let mut p = vec![0.0; n];
        assert_eq!(wgs_solution_pressure(sol, p.as_mut_ptr(), p.len()), n);
        // uniform element areas: zero mean is a plain average
        assert!(p.iter().sum::<f64>().abs() / (n as f64) < 1e-10);
        let m = wgs_solution_velocity(sol, ptr::null_mut(), 0);
        assert_eq!(m, 2 * 128);
        let mut u = vec![f64::NAN; m];
        wgs_solution_velocity(sol, u.as_mut_ptr(), m);
        assert!(u.iter().all(|v| v.is_finite()));
        wgs_solution_free(sol);
        wgs_mesh_free(mesh);
    }
}

#[test]
fn non_convergence_still_returns_handle() {
    let mut mesh = ptr::null_mut();
    let mut sol = ptr::null_mut();
    unsafe {
        assert_eq!(wgs_mesh_new_structured(2, 16, &mut mesh), WgsStatus::Ok);
        assert_eq!(
            wgs_solve(mesh, 1.0, WgsMethod::Minres, WgsPreconditioner::None, 1e-12, &mut sol),
            WgsStatus::NotConverged
        );
        assert!(!sol.is_null());
        assert!(!wgs_solution_converged(sol));
        assert!(last_error().contains("tolerance"));
        wgs_solution_free(sol);
        wgs_mesh_free(mesh);
    }
}

#[test]
fn header_declares_the_interface() {
    let header = include_str!("../include/wgstokes.h");
    for sym in [
        "wgs_last_error_message",
        "wgs_mesh_new_structured",
        "wgs_mesh_load",
        "wgs_mesh_free",
        "wgs_solve",
        "wgs_solution_free",
        "wgs_solution_pressure",
        "typedef struct WgsMesh WgsMesh",
        "WGS_STATUS_NOT_CONVERGED",
    ] {
        assert!(header.contains(sym), "{sym}");
    }
}

#[test]
fn header_compiles_as_c() {
    let Ok(cc) = which_cc() else { return };
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"wgstokes.h\"\nint main(void) { WgsMesh *m = 0; enum WgsStatus s = wgs_mesh_new_structured(2, 4, &m); wgs_mesh_free(m); return s == WGS_STATUS_OK ? 0 : 1; }\n",
    )
    .unwrap();
    let include = concat!(env!("CARGO_MANIFEST_DIR"), "/include");
    let status = std::process::Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I", include])
        .arg(&src)
        .status()
        .unwrap();
    assert!(status.success());
}

fn which_cc() -> Result<&'static str, ()> {
    ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| std::process::Command::new(c).arg("--version").output().is_ok())
        .ok_or(())
}
