//! C interface to the weak Galerkin Stokes solver.
//!
//! Objects are opaque handles created by `wgs_*_new`/`wgs_*_load`/`wgs_solve`
//! and released with the matching `*_free`. Every fallible call returns a
//! [`WgsStatus`]; the message of the most recent failure on the calling
//! thread is available through [`wgs_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use wgstokes::assembly::AssemblyOptions;
use wgstokes::error::Error;
use wgstokes::krylov::{solve_stokes, Method, PreconditionerKind, SolverConfig, StokesSolution};
use wgstokes::mesh::{MeshFormat, SimplicialMesh};
use wgstokes::problem::{stokes2d_exp, stokes3d_trig, ManufacturedProblem};
use wgstokes::verification::compute_errors;

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WgsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    MeshError = 3,
    ProblemError = 4,
    ConfigError = 5,
    LinalgError = 6,
    NotConverged = 7,
    IoError = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WgsMethod {
    Minres = 0,
    Gmres = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WgsPreconditioner {
    /// Method default: block diagonal for MINRES, block lower triangular for GMRES.
    Default = 0,
    BlockDiag = 1,
    BlockLowerTri = 2,
    None = 3,
}

/// Opaque simplicial mesh.
pub struct WgsMesh {
    mesh: SimplicialMesh,
}

/// Opaque discrete solution together with its solver report and errors.
pub struct WgsSolution {
    solution: StokesSolution,
    l2_velocity: f64,
    superconv: f64,
    pressure_error: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(err: &Error) -> WgsStatus {
    match err {
        Error::Mesh(_) => WgsStatus::MeshError,
        Error::Linalg(_) => WgsStatus::LinalgError,
        Error::Problem(_) => WgsStatus::ProblemError,
        Error::Config(_) => WgsStatus::ConfigError,
        Error::Io { .. } => WgsStatus::IoError,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (WgsStatus, String)>) -> WgsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            WgsStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            WgsStatus::Panic
        }
    }
}

fn lift(err: Error) -> (WgsStatus, String) {
    (status_of(&err), err.to_string())
}

/// Message of the last failed call on this thread, or NULL. The pointer
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn wgs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |s| s.as_ptr()))
}

/// Structured mesh of the unit square (`dim = 2`) or cube (`dim = 3`) with
/// `n` subdivisions per side.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn wgs_mesh_new_structured(dim: u32, n: usize, out: *mut *mut WgsMesh) -> WgsStatus {
    guard(|| {
        if out.is_null() {
            return Err((WgsStatus::NullPointer, "out is null".into()));
        }
        let mesh = match dim {
            2 => SimplicialMesh::structured_tri(n),
            3 => SimplicialMesh::structured_tet(n),
            _ => return Err((WgsStatus::InvalidArgument, format!("unsupported dimension {dim}"))),
        }
        .map_err(|e| lift(e.into()))?;
        *out = Box::into_raw(Box::new(WgsMesh { mesh }));
        Ok(())
    })
}

/// Read a mesh file (native text format, or Gmsh `.msh`).
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wgs_mesh_load(path: *const c_char, out: *mut *mut WgsMesh) -> WgsStatus {
    guard(|| {
        if path.is_null() || out.is_null() {
            return Err((WgsStatus::NullPointer, "path or out is null".into()));
        }
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| (WgsStatus::InvalidArgument, "path is not UTF-8".to_string()))?;
        let path = Path::new(path);
        let mesh = SimplicialMesh::load(path, MeshFormat::from_path(path)).map_err(|e| lift(e.into()))?;
        *out = Box::into_raw(Box::new(WgsMesh { mesh }));
        Ok(())
    })
}

/// # Safety
/// `mesh` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn wgs_mesh_free(mesh: *mut WgsMesh) {
    if !mesh.is_null() {
        drop(Box::from_raw(mesh));
    }
}

/// # Safety
/// `mesh` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn wgs_mesh_num_elements(mesh: *const WgsMesh) -> usize {
    mesh.as_ref().map_or(0, |m| m.mesh.num_elements())
}

/// # Safety
/// `mesh` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn wgs_mesh_dim(mesh: *const WgsMesh) -> u32 {
    mesh.as_ref().map_or(0, |m| m.mesh.dim() as u32)
}

fn builtin_problem(dim: usize, mu: f64) -> Result<ManufacturedProblem, Error> {
    if dim == 2 {
        stokes2d_exp(mu)
    } else {
        stokes3d_trig(mu)
    }
}

/// Solve the built-in manufactured problem of the mesh dimension with
/// viscosity `mu`. `tol <= 0` selects the default tolerance. A solve that
/// stops without converging still returns its handle in `out`, together
/// with `WGS_STATUS_NOT_CONVERGED`.
///
/// # Safety
/// `mesh` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wgs_solve(
    mesh: *const WgsMesh,
    mu: f64,
    method: WgsMethod,
    preconditioner: WgsPreconditioner,
    tol: f64,
    out: *mut *mut WgsSolution,
) -> WgsStatus {
    let mut not_converged = false;
    let status = guard(|| {
        if out.is_null() {
            return Err((WgsStatus::NullPointer, "out is null".into()));
        }
        *out = std::ptr::null_mut();
        let mesh = &mesh
            .as_ref()
            .ok_or((WgsStatus::NullPointer, "mesh is null".to_string()))?
            .mesh;
        let method = match method {
            WgsMethod::Minres => Method::Minres,
            WgsMethod::Gmres => Method::Gmres,
        };
        let tol = if tol > 0.0 { tol } else { SolverConfig::default_tol(mesh.dim()) };
        let mut cfg = SolverConfig::new(method, tol);
        cfg.preconditioner = match preconditioner {
            WgsPreconditioner::Default => method.default_preconditioner(),
            WgsPreconditioner::BlockDiag => PreconditionerKind::BlockDiag,
            WgsPreconditioner::BlockLowerTri => PreconditionerKind::BlockLowerTri,
            WgsPreconditioner::None => PreconditionerKind::None,
        };
        cfg.validate().map_err(lift)?;
        let problem = builtin_problem(mesh.dim(), mu).map_err(lift)?;
        let solution =
            solve_stokes(mesh, &problem, &AssemblyOptions::default(), &cfg, true).map_err(lift)?;
        let errors = compute_errors(mesh, &problem, &solution).map_err(lift)?;
        not_converged = !solution.report.converged;
        *out = Box::into_raw(Box::new(WgsSolution {
            solution,
            l2_velocity: errors.l2_velocity,
            superconv: errors.superconv,
            pressure_error: errors.pressure_error,
        }));
        Ok(())
    });
    if status == WgsStatus::Ok && not_converged {
        set_error("solver did not reach the requested tolerance");
        return WgsStatus::NotConverged;
    }
    status
}

/// # Safety
/// `solution` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn wgs_solution_free(solution: *mut WgsSolution) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}

/// # Safety
/// `solution` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn wgs_solution_iterations(solution: *const WgsSolution) -> usize {
    solution.as_ref().map_or(0, |s| s.solution.report.iterations)
}

/// # Safety
/// `solution` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn wgs_solution_converged(solution: *const WgsSolution) -> bool {
    solution.as_ref().is_some_and(|s| s.solution.report.converged)
}

/// Final true relative residual, NaN for a NULL handle.
///
/// # Safety
/// `solution` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn wgs_solution_final_relres(solution: *const WgsSolution) -> f64 {
    solution.as_ref().map_or(f64::NAN, |s| s.solution.report.final_relres())
}

/// Velocity L2 error, superconvergence error at barycenters and pressure L2
/// error against the exact solution. Any output pointer may be NULL.
///
/// # Safety
/// `solution` must be a live handle; non-NULL outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn wgs_solution_errors(
    solution: *const WgsSolution,
    l2_velocity: *mut f64,
    superconv: *mut f64,
    pressure: *mut f64,
) -> WgsStatus {
    guard(|| {
        let s = solution
            .as_ref()
            .ok_or((WgsStatus::NullPointer, "solution is null".to_string()))?;
        for (ptr, v) in [(l2_velocity, s.l2_velocity), (superconv, s.superconv), (pressure, s.pressure_error)] {
            if !ptr.is_null() {
                *ptr = v;
            }
        }
        Ok(())
    })
}

/// Copy the elementwise pressure (zero mean) into `buf`. Returns the number
/// of elements; nothing is written when `len` is smaller than that.
///
/// # Safety
/// `buf` must be NULL or point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn wgs_solution_pressure(solution: *const WgsSolution, buf: *mut f64, len: usize) -> usize {
    let Some(s) = solution.as_ref() else { return 0 };
    let values = &s.solution.pressure.values;
    if !buf.is_null() && len >= values.len() {
        std::slice::from_raw_parts_mut(buf, values.len()).copy_from_slice(values);
    }
    values.len()
}

/// Copy the interior velocity values, `dim` components per element in
/// element order, into `buf`. Returns the required length.
///
/// # Safety
/// `buf` must be NULL or point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn wgs_solution_velocity(solution: *const WgsSolution, buf: *mut f64, len: usize) -> usize {
    let Some(s) = solution.as_ref() else { return 0 };
    let v = &s.solution.velocity;
    let needed = v.interior.len() * v.dim;
    if !buf.is_null() && len >= needed {
        let out = std::slice::from_raw_parts_mut(buf, needed);
        for (k, value) in v.interior.iter().enumerate() {
            out[k * v.dim..(k + 1) * v.dim].copy_from_slice(&value[..v.dim]);
        }
    }
    needed
}
