//! Global saddle-point system: stiffness, divergence, load and boundary
//! data, consistency enforcement and viscosity rescaling.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geom::{self, Vector};
use crate::mesh::SimplicialMesh;
use crate::problem::ManufacturedProblem;
use crate::quadrature::SimplexRule;
use crate::sparse::{CsrMatrix, TripletBuilder};
use crate::wg::{self, BoundaryProjection, PressureField, RT0Function, WGField};

/// Degree of the simplex rule used for the load functional by default.
pub const DEFAULT_LOAD_DEGREE: usize = 4;

/// Numbering of the discrete unknowns: interior velocities (element-major,
/// component-minor), then interior-facet velocities, then pressures.
#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    dim: usize,
    num_elements: usize,
    facet_slot: Vec<Option<usize>>,
    num_interior_facets: usize,
}

impl DofMap {
    pub fn new(mesh: &SimplicialMesh) -> Self {
        let mut next = 0;
        let facet_slot = mesh
            .facets()
            .iter()
            .map(|f| {
                if f.boundary {
                    None
                } else {
                    next += 1;
                    Some(next - 1)
                }
            })
            .collect();
        DofMap {
            dim: mesh.dim(),
            num_elements: mesh.num_elements(),
            facet_slot,
            num_interior_facets: next,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Velocity unknowns `n_u`.
    pub fn num_velocity(&self) -> usize {
        (self.num_elements + self.num_interior_facets) * self.dim
    }

    /// Pressure unknowns `N`.
    pub fn num_pressure(&self) -> usize {
        self.num_elements
    }

    pub fn num_interior_velocity(&self) -> usize {
        self.num_elements * self.dim
    }

    pub fn num_interior_facets(&self) -> usize {
        self.num_interior_facets
    }

    pub fn total(&self) -> usize {
        self.num_velocity() + self.num_pressure()
    }

    pub fn interior_dof(&self, k: usize, r: usize) -> usize {
        k * self.dim + r
    }

    /// `None` for boundary facets.
    pub fn facet_dof(&self, facet: usize, r: usize) -> Option<usize> {
        self.facet_slot[facet].map(|s| (self.num_elements + s) * self.dim + r)
    }

    pub fn pressure_dof(&self, k: usize) -> usize {
        self.num_velocity() + k
    }

    /// Global index of local scalar `l * d + r` on element `k`, where `l = 0`
    /// is the interior and `l = 1 + i` is local facet `i`.
    pub fn local_dofs(&self, mesh: &SimplicialMesh, k: usize) -> Vec<Option<usize>> {
        let d = self.dim;
        let mut out = Vec::with_capacity(d * (d + 2));
        for r in 0..d {
            out.push(Some(self.interior_dof(k, r)));
        }
        for &f in mesh.element_facets(k) {
            for r in 0..d {
                out.push(self.facet_dof(f, r));
            }
        }
        out
    }

    /// Velocity dof vector of a field; boundary values are dropped.
    pub fn gather(&self, field: &WGField) -> Vec<f64> {
        let mut x = vec![0.0; self.num_velocity()];
        for (k, v) in field.interior.iter().enumerate() {
            for r in 0..self.dim {
                x[self.interior_dof(k, r)] = v[r];
            }
        }
        for (f, v) in field.facet.iter().enumerate() {
            for r in 0..self.dim {
                if let Some(i) = self.facet_dof(f, r) {
                    x[i] = v[r];
                }
            }
        }
        x
    }

    /// Field with interior values from `x` and boundary facet values from
    /// `boundary` (indexed by global facet id).
    pub fn scatter(&self, mesh: &SimplicialMesh, x: &[f64], boundary: &[Vector]) -> WGField {
        let mut field = WGField::zeros(mesh);
        for (k, v) in field.interior.iter_mut().enumerate() {
            for r in 0..self.dim {
                v[r] = x[self.interior_dof(k, r)];
            }
        }
        for (f, v) in field.facet.iter_mut().enumerate() {
            for r in 0..self.dim {
                v[r] = match self.facet_dof(f, r) {
                    Some(i) => x[i],
                    None => boundary[f][r],
                };
            }
        }
        field
    }
}

/// Options shared by the right-hand-side assemblies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssemblyOptions {
    pub projection: BoundaryProjection,
    /// Polynomial degree integrated exactly by the load rule.
    pub load_degree: usize,
    /// Compute element contributions on the rayon pool.
    pub parallel: bool,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        AssemblyOptions {
            projection: BoundaryProjection::default(),
            load_degree: DEFAULT_LOAD_DEGREE,
            parallel: true,
        }
    }
}

/// Element-local results in element order, whatever the execution mode.
fn per_element<T, F>(n: usize, parallel: bool, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    if parallel {
        (0..n).into_par_iter().map(f).collect()
    } else {
        (0..n).map(f).collect()
    }
}

/// Weak gradients of the local scalar bases, interior first.
fn local_gradients(geom: &crate::mesh::ElementGeometry) -> Vec<RT0Function> {
    let mut g = Vec::with_capacity(geom.dim + 2);
    g.push(wg::interior_basis_gradient(geom));
    for i in 0..=geom.dim {
        g.push(wg::facet_basis_gradient(geom, i));
    }
    g
}

/// Scalar Gram matrix `(grad_w phi_l, grad_w phi_m)_K` of the `d + 2` local
/// bases; the vector-valued block is this matrix repeated per component.
pub fn local_gram(geom: &crate::mesh::ElementGeometry) -> Vec<Vec<f64>> {
    let g = local_gradients(geom);
    g.iter()
        .map(|gl| g.iter().map(|gm| wg::rt0_inner(geom, gl, gm)).collect())
        .collect()
}

pub fn assemble_a(mesh: &SimplicialMesh, dofs: &DofMap) -> CsrMatrix {
    assemble_a_with(mesh, dofs, true)
}

pub fn assemble_a_with(mesh: &SimplicialMesh, dofs: &DofMap, parallel: bool) -> CsrMatrix {
    let d = mesh.dim();
    let n = dofs.num_velocity();
    let locals = per_element(mesh.num_elements(), parallel, |k| {
        (dofs.local_dofs(mesh, k), local_gram(mesh.geometry(k)))
    });
    let mut t = TripletBuilder::with_capacity(n, n, mesh.num_elements() * (d * (d + 2)).pow(2) / d);
    for (ldofs, gram) in &locals {
        for (l, row) in gram.iter().enumerate() {
            for (m, &v) in row.iter().enumerate() {
                for r in 0..d {
                    if let (Some(i), Some(j)) = (ldofs[l * d + r], ldofs[m * d + r]) {
                        t.push(i, j, v);
                    }
                }
            }
        }
    }
    t.build()
}

/// Discrete divergence: row `K` holds `|e| n_K(e)` for the interior facets
/// of `K`.
pub fn assemble_b(mesh: &SimplicialMesh, dofs: &DofMap) -> CsrMatrix {
    let d = mesh.dim();
    let mut t = TripletBuilder::with_capacity(dofs.num_pressure(), dofs.num_velocity(), mesh.num_elements() * d * (d + 1));
    for k in 0..mesh.num_elements() {
        let geom = mesh.geometry(k);
        for (i, &f) in mesh.element_facets(k).iter().enumerate() {
            for r in 0..d {
                if let Some(j) = dofs.facet_dof(f, r) {
                    t.push(k, j, geom.facet_measures[i] * geom.normals[i][r]);
                }
            }
        }
    }
    t.build()
}

/// Projected boundary datum on every boundary facet (zero elsewhere),
/// indexed by global facet id.
pub fn boundary_values(
    mesh: &SimplicialMesh,
    problem: &ManufacturedProblem,
    projection: BoundaryProjection,
) -> Vec<Vector> {
    mesh.facets()
        .iter()
        .enumerate()
        .map(|(id, f)| {
            if f.boundary {
                wg::project_boundary_datum(&*problem.boundary, &mesh.facet_points(id), projection)
            } else {
                [0.0; 3]
            }
        })
        .collect()
}

/// Load vector `(f, Lambda_h v)` minus `mu` times the boundary lifting term.
pub fn assemble_b1(
    mesh: &SimplicialMesh,
    dofs: &DofMap,
    problem: &ManufacturedProblem,
    opts: &AssemblyOptions,
) -> Vec<f64> {
    let bvals = boundary_values(mesh, problem, opts.projection);
    assemble_b1_with_boundary(mesh, dofs, problem, &bvals, opts)
}

pub fn assemble_b1_with_boundary(
    mesh: &SimplicialMesh,
    dofs: &DofMap,
    problem: &ManufacturedProblem,
    bvals: &[Vector],
    opts: &AssemblyOptions,
) -> Vec<f64> {
    let d = mesh.dim();
    let rule = SimplexRule::with_degree(d, opts.load_degree);
    let locals = per_element(mesh.num_elements(), opts.parallel, |k| {
        let geom = mesh.geometry(k);
        let facets = mesh.element_facets(k);
        let mut local = vec![0.0; d * (d + 2)];
        // (f, L_j) for each local facet j.
        let mut f_l = vec![0.0; d + 1];
        for (x, w) in rule.map(&geom.vertices) {
            let fx = (problem.forcing)(&x);
            for (j, acc) in f_l.iter_mut().enumerate() {
                *acc += w * geom::dot(&fx, &wg::lifting_basis(geom, j).eval(geom, &x));
            }
        }
        for j in 0..=d {
            for r in 0..d {
                local[(1 + j) * d + r] += geom.measure * f_l[j] * geom.normals[j][r];
            }
        }
        let boundary: Vec<usize> = (0..=d).filter(|&j| mesh.facets()[facets[j]].boundary).collect();
        if !boundary.is_empty() {
            let grads = local_gradients(geom);
            for (l, gl) in grads.iter().enumerate() {
                for &j in &boundary {
                    let c = wg::rt0_inner(geom, &grads[1 + j], gl);
                    let g = bvals[facets[j]];
                    for r in 0..d {
                        local[l * d + r] -= problem.mu * g[r] * c;
                    }
                }
            }
        }
        (dofs.local_dofs(mesh, k), local)
    });
    let mut b1 = vec![0.0; dofs.num_velocity()];
    for (ldofs, local) in &locals {
        for (slot, v) in ldofs.iter().zip(local) {
            if let Some(i) = slot {
                b1[*i] += v;
            }
        }
    }
    b1
}

/// Boundary flux of the projected datum per element.
pub fn assemble_b2(
    mesh: &SimplicialMesh,
    problem: &ManufacturedProblem,
    projection: BoundaryProjection,
) -> Vec<f64> {
    let bvals = boundary_values(mesh, problem, projection);
    assemble_b2_with_boundary(mesh, &bvals)
}

pub fn assemble_b2_with_boundary(mesh: &SimplicialMesh, bvals: &[Vector]) -> Vec<f64> {
    (0..mesh.num_elements())
        .map(|k| {
            let geom = mesh.geometry(k);
            mesh.element_facets(k)
                .iter()
                .enumerate()
                .filter(|(_, &f)| mesh.facets()[f].boundary)
                .map(|(i, &f)| geom.facet_measures[i] * geom::dot(&bvals[f], &geom.normals[i]))
                .sum()
        })
        .collect()
}

pub fn compute_alpha(b2: &[f64]) -> f64 {
    b2.iter().sum()
}

/// Subtracts the mean so the entries sum to zero.
pub fn enforce_consistency(b2: &[f64], alpha_h: f64) -> Vec<f64> {
    let shift = alpha_h / b2.len() as f64;
    b2.iter().map(|v| v - shift).collect()
}

/// Diagonal of the pressure mass matrix, `|K|`.
pub fn assemble_mass_pressure(mesh: &SimplicialMesh) -> Vec<f64> {
    mesh.geometries().iter().map(|g| g.measure).collect()
}

/// Rescaled system `[A, -B^T; -B, 0] (mu u, p) = (b1, mu b2~)`.
#[derive(Debug, Clone)]
pub struct SaddleSystem {
    pub dofs: DofMap,
    pub a: CsrMatrix,
    pub b: CsrMatrix,
    pub b1: Vec<f64>,
    pub b2: Vec<f64>,
    pub b2_tilde: Vec<f64>,
    pub mp: Vec<f64>,
    pub mu: f64,
    pub alpha_h: f64,
    /// Whether the mean of `b2` was removed before forming the RHS.
    pub consistent: bool,
    /// Projected boundary datum by global facet id.
    pub boundary: Vec<Vector>,
    pub rescaled: bool,
}

impl SaddleSystem {
    pub fn num_velocity(&self) -> usize {
        self.a.nrows()
    }

    pub fn num_pressure(&self) -> usize {
        self.b.nrows()
    }

    pub fn size(&self) -> usize {
        self.num_velocity() + self.num_pressure()
    }

    /// Second block of the unscaled RHS actually used.
    pub fn b2_used(&self) -> &[f64] {
        if self.consistent {
            &self.b2_tilde
        } else {
            &self.b2
        }
    }

    /// Right-hand side of the rescaled system.
    pub fn rhs(&self) -> Vec<f64> {
        let mut rhs = self.b1.clone();
        rhs.extend(self.b2_used().iter().map(|v| self.mu * v));
        rhs
    }

    /// `y = [A, -B^T; -B, 0] x`.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let nu = self.num_velocity();
        let (xu, xp) = x.split_at(nu);
        let (yu, yp) = y.split_at_mut(nu);
        self.a.spmv_into(xu, yu);
        let mut bt = vec![0.0; nu];
        self.b.spmv_transpose_into(xp, &mut bt);
        for (y, v) in yu.iter_mut().zip(&bt) {
            *y -= v;
        }
        self.b.spmv_into(xu, yp);
        for y in yp.iter_mut() {
            *y = -*y;
        }
    }

    /// Assembled saddle-point matrix.
    pub fn operator(&self) -> CsrMatrix {
        let nu = self.num_velocity();
        let n = self.size();
        let mut t = TripletBuilder::with_capacity(n, n, self.a.nnz() + 2 * self.b.nnz());
        for (i, j, v) in self.a.triplets() {
            t.push(i, j, v);
        }
        for (k, j, v) in self.b.triplets() {
            t.push(nu + k, j, -v);
            t.push(j, nu + k, -v);
        }
        t.build()
    }

    /// Residual of the original (unscaled) equations
    /// `mu A u - B^T p = b1`, `-B u = b2`, relative to the RHS norm.
    pub fn unscaled_relative_residual(&self, u: &[f64], p: &[f64]) -> f64 {
        let nu = self.num_velocity();
        let mut x: Vec<f64> = u.iter().map(|v| self.mu * v).collect();
        x.extend_from_slice(p);
        let mut y = vec![0.0; self.size()];
        self.apply(&x, &mut y);
        let mut res = 0.0;
        let mut rhs = 0.0;
        for (i, yi) in y.iter().enumerate() {
            let bi = if i < nu {
                self.b1[i]
            } else {
                self.b2_used()[i - nu]
            };
            // Second block of y is -B(mu u); undo the scaling.
            let yi = if i < nu { *yi } else { yi / self.mu };
            res += (yi - bi).powi(2);
            rhs += bi * bi;
        }
        res.sqrt() / rhs.sqrt().max(f64::MIN_POSITIVE)
    }

    /// Velocity field from a solution vector of the rescaled system.
    pub fn velocity_field(&self, mesh: &SimplicialMesh, x: &[f64]) -> WGField {
        let u: Vec<f64> = x[..self.num_velocity()]
            .iter()
            .map(|v| v / if self.rescaled { self.mu } else { 1.0 })
            .collect();
        self.dofs.scatter(mesh, &u, &self.boundary)
    }

    /// Pressure from a solution vector, normalized to zero mean.
    pub fn pressure_field(&self, mesh: &SimplicialMesh, x: &[f64]) -> PressureField {
        let mut p = PressureField {
            values: x[self.num_velocity()..].to_vec(),
        };
        p.normalize(mesh);
        p
    }
}

pub fn build_saddle_system(
    mesh: &SimplicialMesh,
    problem: &ManufacturedProblem,
    opts: &AssemblyOptions,
    consistent: bool,
) -> Result<SaddleSystem> {
    if problem.dim != mesh.dim() {
        return Err(Error::Problem(format!(
            "problem is {}-dimensional but the mesh is {}-dimensional",
            problem.dim,
            mesh.dim()
        )));
    }
    let dofs = DofMap::new(mesh);
    let boundary = boundary_values(mesh, problem, opts.projection);
    let a = assemble_a_with(mesh, &dofs, opts.parallel);
    let b = assemble_b(mesh, &dofs);
    let b1 = assemble_b1_with_boundary(mesh, &dofs, problem, &boundary, opts);
    let b2 = assemble_b2_with_boundary(mesh, &boundary);
    let alpha_h = compute_alpha(&b2);
    let b2_tilde = enforce_consistency(&b2, alpha_h);
    log::debug!(
        "assembled n_u = {}, N = {}, alpha_h = {alpha_h:e}",
        dofs.num_velocity(),
        dofs.num_pressure()
    );
    Ok(SaddleSystem {
        dofs,
        a,
        b,
        b1,
        b2,
        b2_tilde,
        mp: assemble_mass_pressure(mesh),
        mu: problem.mu,
        alpha_h,
        consistent,
        boundary,
        rescaled: true,
    })
}
