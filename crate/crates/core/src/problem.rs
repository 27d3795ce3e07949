//! Manufactured Stokes problems: the two built-in examples and user-defined
//! problems from arithmetic expressions.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{self, Point, Vector};
use crate::mesh::SimplicialMesh;
use crate::quadrature::{gauss_legendre, SimplexRule};

pub type VectorFn = Arc<dyn Fn(&Point) -> Vector + Send + Sync>;
pub type ScalarFn = Arc<dyn Fn(&Point) -> f64 + Send + Sync>;

/// Tolerance on `|integral of g . n over the boundary|`.
pub const COMPATIBILITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    UnitSquare,
    UnitCube,
    /// Whatever the mesh covers; compatibility is checked against the mesh.
    Mesh,
}

/// Data of a Stokes problem `-mu Lap u + grad p = f`, `div u = 0`, `u = g`
/// on the boundary. Exact `u` and `p` are optional (needed for errors).
#[derive(Clone)]
pub struct ManufacturedProblem {
    pub name: String,
    pub dim: usize,
    pub mu: f64,
    pub velocity: Option<VectorFn>,
    pub pressure: Option<ScalarFn>,
    pub forcing: VectorFn,
    pub boundary: VectorFn,
    pub domain: Domain,
}

impl std::fmt::Debug for ManufacturedProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ManufacturedProblem")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("mu", &self.mu)
            .field("domain", &self.domain)
            .finish_non_exhaustive()
    }
}

impl ManufacturedProblem {
    /// Validates `mu > 0` and, for the unit square/cube, the compatibility
    /// condition on `g`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        mu: f64,
        velocity: Option<VectorFn>,
        pressure: Option<ScalarFn>,
        forcing: VectorFn,
        boundary: VectorFn,
        domain: Domain,
    ) -> Result<Self> {
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(Error::Problem(format!("viscosity must be positive, got {mu}")));
        }
        if dim != 2 && dim != 3 {
            return Err(Error::Problem(format!("unsupported dimension {dim}")));
        }
        let p = ManufacturedProblem {
            name: name.into(),
            dim,
            mu,
            velocity,
            pressure,
            forcing,
            boundary,
            domain,
        };
        if let Some(flux) = p.domain_boundary_flux() {
            if flux.abs() > COMPATIBILITY_TOL {
                return Err(Error::Problem(format!(
                    "boundary datum violates the compatibility condition: flux {flux:e}"
                )));
            }
        }
        Ok(p)
    }

    /// Same problem data with another viscosity (forcing re-evaluated by the
    /// builders that depend on `mu`).
    pub fn with_mu(&self, mu: f64) -> Result<Self> {
        match self.name.as_str() {
            "stokes2d_exp" => stokes2d_exp(mu),
            "stokes3d_trig" => stokes3d_trig(mu),
            _ => Err(Error::Problem(
                "with_mu is only defined for built-in problems".into(),
            )),
        }
    }

    /// `integral of g . n` over the unit square/cube boundary with a
    /// high-order tensor Gauss rule; `None` for mesh-defined domains.
    pub fn domain_boundary_flux(&self) -> Option<f64> {
        let (t, w) = gauss_legendre(16);
        let g = &self.boundary;
        match self.domain {
            Domain::UnitSquare => {
                let mut flux = 0.0;
                for (s, ws) in t.iter().zip(&w) {
                    flux += ws * (g(&[1.0, *s, 0.0])[0] - g(&[0.0, *s, 0.0])[0]);
                    flux += ws * (g(&[*s, 1.0, 0.0])[1] - g(&[*s, 0.0, 0.0])[1]);
                }
                Some(flux)
            }
            Domain::UnitCube => {
                let mut flux = 0.0;
                for (s, ws) in t.iter().zip(&w) {
                    for (r, wr) in t.iter().zip(&w) {
                        let ww = ws * wr;
                        flux += ww * (g(&[1.0, *s, *r])[0] - g(&[0.0, *s, *r])[0]);
                        flux += ww * (g(&[*s, 1.0, *r])[1] - g(&[*s, 0.0, *r])[1]);
                        flux += ww * (g(&[*s, *r, 1.0])[2] - g(&[*s, *r, 0.0])[2]);
                    }
                }
                Some(flux)
            }
            Domain::Mesh => None,
        }
    }

    /// `integral of g . n` over the mesh boundary facets.
    pub fn mesh_boundary_flux(&self, mesh: &SimplicialMesh) -> f64 {
        let rule = SimplexRule::collapsed(mesh.dim() - 1, 6);
        mesh.facets()
            .iter()
            .enumerate()
            .filter(|(_, f)| f.boundary)
            .map(|(id, f)| {
                let pts = mesh.facet_points(id);
                f.measure * rule.mean(&pts, |x| geom::dot(&(self.boundary)(x), &f.normal))
            })
            .sum()
    }

    pub fn check_compatibility(&self, mesh: &SimplicialMesh) -> Result<()> {
        if mesh.dim() != self.dim {
            return Err(Error::Problem(format!(
                "problem is {}-dimensional but the mesh is {}-dimensional",
                self.dim,
                mesh.dim()
            )));
        }
        let flux = self.mesh_boundary_flux(mesh);
        if flux.abs() > COMPATIBILITY_TOL {
            return Err(Error::Problem(format!(
                "boundary datum violates the compatibility condition on this mesh: flux {flux:e}"
            )));
        }
        Ok(())
    }
}

/// Two-dimensional example on the unit square with
/// `u = (-e^x (y cos y + sin y), e^x y sin y)`, `p = 2 e^x sin y`.
pub fn stokes2d_exp(mu: f64) -> Result<ManufacturedProblem> {
    let u: VectorFn = Arc::new(|x: &Point| {
        let (ex, (s, c)) = (x[0].exp(), x[1].sin_cos());
        [-ex * (x[1] * c + s), ex * x[1] * s, 0.0]
    });
    let p: ScalarFn = Arc::new(|x: &Point| 2.0 * x[0].exp() * x[1].sin());
    let f: VectorFn = Arc::new(move |x: &Point| {
        let (ex, (s, c)) = (x[0].exp(), x[1].sin_cos());
        [2.0 * (1.0 - mu) * ex * s, 2.0 * (1.0 - mu) * ex * c, 0.0]
    });
    ManufacturedProblem::new(
        "stokes2d_exp",
        2,
        mu,
        Some(u.clone()),
        Some(p),
        f,
        u,
        Domain::UnitSquare,
    )
}

/// Three-dimensional example on the unit cube with
/// `u = (2 sin pi x, -pi y cos pi x, -pi z cos pi x)`,
/// `p = sin pi x cos pi y sin pi z`.
pub fn stokes3d_trig(mu: f64) -> Result<ManufacturedProblem> {
    let u: VectorFn = Arc::new(|x: &Point| {
        let (s, c) = (PI * x[0]).sin_cos();
        [2.0 * s, -PI * x[1] * c, -PI * x[2] * c]
    });
    let p: ScalarFn = Arc::new(|x: &Point| {
        (PI * x[0]).sin() * (PI * x[1]).cos() * (PI * x[2]).sin()
    });
    let f: VectorFn = Arc::new(move |x: &Point| {
        let (sx, cx) = (PI * x[0]).sin_cos();
        let (sy, cy) = (PI * x[1]).sin_cos();
        let (sz, cz) = (PI * x[2]).sin_cos();
        [
            2.0 * mu * PI * PI * sx + PI * cx * cy * sz,
            -mu * PI.powi(3) * x[1] * cx - PI * sy * sx * sz,
            -mu * PI.powi(3) * x[2] * cx + PI * sx * cy * cz,
        ]
    });
    ManufacturedProblem::new(
        "stokes3d_trig",
        3,
        mu,
        Some(u.clone()),
        Some(p),
        f,
        u,
        Domain::UnitCube,
    )
}

/// Expression-defined problem. Variables `x`, `y`, `z`; functions and
/// constants of the expression language include `pi`, `exp`, `sin`, `cos`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomProblemSpec {
    pub dim: usize,
    #[serde(default)]
    pub u: Option<Vec<String>>,
    #[serde(default)]
    pub p: Option<String>,
    /// Forcing; derived from `u` and `p` by finite differences when absent.
    #[serde(default)]
    pub f: Option<Vec<String>>,
    /// Boundary datum; defaults to `u`.
    #[serde(default)]
    pub g: Option<Vec<String>>,
    /// Domain covered by the mesh: "unit" (square/cube) or "mesh".
    #[serde(default)]
    pub domain: Option<String>,
}

#[derive(Debug, Clone)]
struct CompiledExpr(Arc<meval::Expr>);

thread_local! {
    static BUILTINS: meval::Context<'static> = meval::Context::new();
}

impl CompiledExpr {
    fn parse(src: &str) -> Result<Self> {
        let expr: meval::Expr = src
            .parse()
            .map_err(|e| Error::Problem(format!("cannot parse `{src}`: {e}")))?;
        let compiled = CompiledExpr(Arc::new(expr));
        // Reject unknown names up front rather than on first evaluation.
        BUILTINS.with(|ctx| {
            compiled
                .0
                .eval_with_context(([("x", 0.1), ("y", 0.2), ("z", 0.3)], ctx))
                .map(|_| ())
                .map_err(|e| Error::Problem(format!("cannot evaluate `{src}`: {e}")))
        })?;
        Ok(compiled)
    }

    fn eval(&self, x: &Point) -> f64 {
        BUILTINS.with(|ctx| {
            self.0
                .eval_with_context(([("x", x[0]), ("y", x[1]), ("z", x[2])], ctx))
                .unwrap_or(f64::NAN)
        })
    }
}

fn vector_fn(dim: usize, exprs: &[String], what: &str) -> Result<VectorFn> {
    if exprs.len() != dim {
        return Err(Error::Problem(format!(
            "{what} needs {dim} components, got {}",
            exprs.len()
        )));
    }
    let parts: Vec<CompiledExpr> = exprs.iter().map(|s| CompiledExpr::parse(s)).collect::<Result<_>>()?;
    Ok(Arc::new(move |x: &Point| {
        let mut v = [0.0; 3];
        for (c, e) in v.iter_mut().zip(&parts) {
            *c = e.eval(x);
        }
        v
    }))
}

const FD_STEP: f64 = 1e-4;

/// `-mu Lap u + grad p` by central differences (error O(step^2)).
pub fn finite_difference_forcing(dim: usize, mu: f64, u: VectorFn, p: ScalarFn) -> VectorFn {
    Arc::new(move |x: &Point| {
        let h = FD_STEP;
        let u0 = u(x);
        let mut f = [0.0; 3];
        for axis in 0..dim {
            let mut xp = *x;
            let mut xm = *x;
            xp[axis] += h;
            xm[axis] -= h;
            let (up, um) = (u(&xp), u(&xm));
            for c in 0..dim {
                f[c] -= mu * (up[c] - 2.0 * u0[c] + um[c]) / (h * h);
            }
            f[axis] += (p(&xp) - p(&xm)) / (2.0 * h);
        }
        f
    })
}

pub fn custom_problem(spec: &CustomProblemSpec, mu: f64) -> Result<ManufacturedProblem> {
    let dim = spec.dim;
    if dim != 2 && dim != 3 {
        return Err(Error::Problem(format!("unsupported dimension {dim}")));
    }
    let velocity = spec.u.as_ref().map(|u| vector_fn(dim, u, "u")).transpose()?;
    let pressure: Option<ScalarFn> = match &spec.p {
        Some(src) => {
            let e = CompiledExpr::parse(src)?;
            Some(Arc::new(move |x: &Point| e.eval(x)))
        }
        None => None,
    };
    let forcing = match (&spec.f, &velocity, &pressure) {
        (Some(f), _, _) => vector_fn(dim, f, "f")?,
        (None, Some(u), Some(p)) => {
            log::warn!(
                "forcing derived from u and p by central differences (step {FD_STEP:e}); expect ~1e-8 absolute error"
            );
            finite_difference_forcing(dim, mu, u.clone(), p.clone())
        }
        _ => {
            return Err(Error::Problem(
                "either f or both u and p must be given".into(),
            ))
        }
    };
    let boundary = match (&spec.g, &velocity) {
        (Some(g), _) => vector_fn(dim, g, "g")?,
        (None, Some(u)) => u.clone(),
        (None, None) => return Err(Error::Problem("either g or u must be given".into())),
    };
    let domain = match spec.domain.as_deref() {
        None | Some("unit") => {
            if dim == 2 {
                Domain::UnitSquare
            } else {
                Domain::UnitCube
            }
        }
        Some("mesh") => Domain::Mesh,
        Some(other) => return Err(Error::Problem(format!("unknown domain `{other}`"))),
    };
    ManufacturedProblem::new("custom", dim, mu, velocity, pressure, forcing, boundary, domain)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn max_forcing_mismatch(p: &ManufacturedProblem, seed: u64) -> f64 {
        let fd = finite_difference_forcing(
            p.dim,
            p.mu,
            p.velocity.clone().unwrap(),
            p.pressure.clone().unwrap(),
        );
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        for _ in 0..20 {
            let mut x = [0.0; 3];
            for c in x.iter_mut().take(p.dim) {
                *c = rng.random_range(0.05..0.95);
            }
            let (a, b) = ((p.forcing)(&x), fd(&x));
            for c in 0..p.dim {
                worst = worst.max((a[c] - b[c]).abs() / (1.0 + a[c].abs()));
            }
        }
        worst
    }

    #[test]
    fn builtin_forcing_matches_strong_form() {
        for mu in [1.0, 1e-4, 3.5] {
            assert!(max_forcing_mismatch(&stokes2d_exp(mu).unwrap(), 1) < 1e-6);
            assert!(max_forcing_mismatch(&stokes3d_trig(mu).unwrap(), 2) < 1e-6);
        }
    }

    #[test]
    fn builtin_velocity_is_divergence_free() {
        let h = 1e-5;
        for p in [stokes2d_exp(1.0).unwrap(), stokes3d_trig(1.0).unwrap()] {
            let u = p.velocity.clone().unwrap();
            let x = [0.31, 0.62, 0.47];
            let mut div = 0.0;
            for axis in 0..p.dim {
                let (mut xp, mut xm) = (x, x);
                xp[axis] += h;
                xm[axis] -= h;
                div += (u(&xp)[axis] - u(&xm)[axis]) / (2.0 * h);
            }
            assert!(div.abs() < 1e-8);
        }
    }

    #[test]
    fn incompatible_boundary_datum_rejected() {
        let spec = CustomProblemSpec {
            dim: 2,
            u: None,
            p: None,
            f: Some(vec!["0".into(), "0".into()]),
            g: Some(vec!["x".into(), "0".into()]),
            domain: None,
        };
        assert!(matches!(custom_problem(&spec, 1.0), Err(Error::Problem(_))));
    }

    #[test]
    fn nonpositive_viscosity_rejected() {
        assert!(stokes2d_exp(0.0).is_err());
        assert!(stokes2d_exp(-1.0).is_err());
    }

    #[test]
    fn custom_expressions_match_builtin() {
        let spec = CustomProblemSpec {
            dim: 2,
            u: Some(vec![
                "-exp(x)*(y*cos(y)+sin(y))".into(),
                "exp(x)*y*sin(y)".into(),
            ]),
            p: Some("2*exp(x)*sin(y)".into()),
            f: None,
            g: None,
            domain: None,
        };
        let custom = custom_problem(&spec, 0.5).unwrap();
        let builtin = stokes2d_exp(0.5).unwrap();
        let x = [0.3, 0.8, 0.0];
        let (a, b) = ((custom.forcing)(&x), (builtin.forcing)(&x));
        assert!((a[0] - b[0]).abs() < 1e-6 && (a[1] - b[1]).abs() < 1e-6);
        let (a, b) = ((custom.boundary)(&x), (builtin.boundary)(&x));
        assert_eq!(a, b);
    }

    #[test]
    fn unknown_identifier_rejected() {
        let spec = CustomProblemSpec {
            dim: 2,
            u: None,
            p: None,
            f: Some(vec!["foo(x)".into(), "0".into()]),
            g: Some(vec!["0".into(), "0".into()]),
            domain: None,
        };
        assert!(custom_problem(&spec, 1.0).is_err());
    }

    #[test]
    fn mesh_flux_matches_domain_flux() {
        let p = stokes3d_trig(1.0).unwrap();
        let mesh = SimplicialMesh::structured_tet(2).unwrap();
        assert!(p.mesh_boundary_flux(&mesh).abs() < 1e-9);
        assert!(p.check_compatibility(&mesh).is_ok());
    }
}
