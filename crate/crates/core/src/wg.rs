//! Lowest-order weak Galerkin calculus on a single simplex.
//!
//! Velocity components live in P0(K) on the interior and P0(e) on every
//! facet; weak gradients and the lifting operator take values in
//! RT0(K) = P0(K)^d + x P0(K), stored centroid-anchored as `a + b (x - x_K)`.

use serde::{Deserialize, Serialize};

use crate::geom::{self, Point, Vector};
use crate::mesh::{ElementGeometry, SimplicialMesh};
use crate::quadrature::SimplexRule;

/// `a + b (x - x_K)` on one element.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RT0Function {
    pub a: Vector,
    pub b: f64,
}

impl RT0Function {
    pub fn eval(&self, geom: &ElementGeometry, x: &Point) -> Vector {
        let mut v = self.a;
        geom::axpy(self.b, &geom::sub(x, &geom.centroid), &mut v);
        v
    }

    /// Constant divergence `d b`.
    pub fn divergence(&self, dim: usize) -> f64 {
        dim as f64 * self.b
    }

    pub fn scaled(&self, s: f64) -> Self {
        RT0Function {
            a: geom::scale(s, &self.a),
            b: s * self.b,
        }
    }

    pub fn add_scaled(&mut self, s: f64, other: &RT0Function) {
        geom::axpy(s, &other.a, &mut self.a);
        self.b += s * other.b;
    }
}

/// Exact L2(K) inner product of two RT0 functions; the cross terms vanish
/// because `x - x_K` has zero mean.
pub fn rt0_inner(geom: &ElementGeometry, u: &RT0Function, w: &RT0Function) -> f64 {
    geom.measure * geom::dot(&u.a, &w.a) + u.b * w.b * geom.moment
}

/// Weak gradient of the interior basis function, `-C_K (x - x_K)`.
pub fn interior_basis_gradient(geom: &ElementGeometry) -> RT0Function {
    RT0Function {
        a: [0.0; 3],
        b: -geom.c_k,
    }
}

/// Weak gradient of the basis function of local facet `i`,
/// `C_K/(d+1) (x - x_K) + |e_i|/|K| n_i`.
pub fn facet_basis_gradient(geom: &ElementGeometry, i: usize) -> RT0Function {
    RT0Function {
        a: geom::scale(geom.facet_measures[i] / geom.measure, &geom.normals[i]),
        b: geom.c_k / (geom.dim as f64 + 1.0),
    }
}

pub fn weak_gradient_interior_basis(geom: &ElementGeometry, x: &Point) -> Vector {
    interior_basis_gradient(geom).eval(geom, x)
}

pub fn weak_gradient_facet_basis(geom: &ElementGeometry, i: usize, x: &Point) -> Vector {
    facet_basis_gradient(geom, i).eval(geom, x)
}

/// Row-wise weak gradient of a vector field: entry `r` is the weak gradient
/// of component `r`.
pub fn weak_gradient_field(
    geom: &ElementGeometry,
    interior: &Vector,
    facets: &[Vector],
) -> [RT0Function; 3] {
    debug_assert_eq!(facets.len(), geom.dim + 1);
    let phi0 = interior_basis_gradient(geom);
    let mut rows = [RT0Function::default(); 3];
    for (r, row) in rows.iter_mut().enumerate().take(geom.dim) {
        row.add_scaled(interior[r], &phi0);
        for (i, v) in facets.iter().enumerate() {
            row.add_scaled(v[r], &facet_basis_gradient(geom, i));
        }
    }
    rows
}

/// P0 value of the weak divergence, `(1/|K|) sum_i |e_i| u_i . n_i`.
pub fn weak_divergence(geom: &ElementGeometry, facets: &[Vector]) -> f64 {
    debug_assert_eq!(facets.len(), geom.dim + 1);
    let flux: f64 = facets
        .iter()
        .enumerate()
        .map(|(i, v)| geom.facet_measures[i] * geom::dot(v, &geom.normals[i]))
        .sum();
    flux / geom.measure
}

/// RT0 function with unit normal flux density on local facet `j` and zero
/// normal component on the others: `|e_j| / (d |K|) (x - v_j)`.
pub fn lifting_basis(geom: &ElementGeometry, j: usize) -> RT0Function {
    let s = geom.facet_measures[j] / (geom.dim as f64 * geom.measure);
    RT0Function {
        a: geom::scale(s, &geom::sub(&geom.centroid, &geom.vertices[j])),
        b: s,
    }
}

/// Lifting operator: the RT0(K) field whose normal trace on every facet
/// equals `v_i . n_i`. Depends only on the facet values.
pub fn lifting_apply(geom: &ElementGeometry, facets: &[Vector]) -> RT0Function {
    debug_assert_eq!(facets.len(), geom.dim + 1);
    let mut out = RT0Function::default();
    for (j, v) in facets.iter().enumerate() {
        out.add_scaled(geom::dot(v, &geom.normals[j]), &lifting_basis(geom, j));
    }
    out
}

/// How the boundary datum is projected onto a facet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryProjection {
    /// Value at the facet barycenter.
    #[default]
    Barycenter,
    /// Facet mean with a 2-point-per-direction Gauss rule.
    Gauss2,
    /// Facet mean with a 3-point-per-direction Gauss rule.
    Gauss3,
}

impl BoundaryProjection {
    pub fn rule(self, facet_dim: usize) -> SimplexRule {
        match self {
            BoundaryProjection::Barycenter => SimplexRule::barycenter(facet_dim),
            BoundaryProjection::Gauss2 => SimplexRule::collapsed(facet_dim, 2),
            BoundaryProjection::Gauss3 => SimplexRule::collapsed(facet_dim, 3),
        }
    }
}

impl std::str::FromStr for BoundaryProjection {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "barycenter" => Ok(Self::Barycenter),
            "gauss2" => Ok(Self::Gauss2),
            "gauss3" => Ok(Self::Gauss3),
            other => Err(format!("unknown boundary projection `{other}`")),
        }
    }
}

/// Approximate facet average of `g` over the facet with the given vertices.
pub fn project_boundary_datum<G>(g: G, facet_vertices: &[Point], method: BoundaryProjection) -> Vector
where
    G: Fn(&Point) -> Vector,
{
    let rule = method.rule(facet_vertices.len() - 1);
    let mut out = [0.0; 3];
    for (x, w) in rule.map(facet_vertices) {
        geom::axpy(w, &g(&x), &mut out);
    }
    out
}

/// Element average of `u` with a rule exact for polynomials of `degree`.
pub fn project_interior<U>(u: U, geom: &ElementGeometry, degree: usize) -> Vector
where
    U: Fn(&Point) -> Vector,
{
    let rule = SimplexRule::with_degree(geom.dim, degree);
    let mut out = [0.0; 3];
    for (x, w) in rule.map(&geom.vertices) {
        geom::axpy(w, &u(&x), &mut out);
    }
    out
}

/// Discrete velocity: one vector per element interior and one per facet
/// (indexed by global facet id; boundary entries hold boundary data).
#[derive(Debug, Clone, PartialEq)]
pub struct WGField {
    pub dim: usize,
    pub interior: Vec<Vector>,
    pub facet: Vec<Vector>,
}

impl WGField {
    pub fn zeros(mesh: &SimplicialMesh) -> Self {
        WGField {
            dim: mesh.dim(),
            interior: vec![[0.0; 3]; mesh.num_elements()],
            facet: vec![[0.0; 3]; mesh.num_facets()],
        }
    }

    /// L2 projection of a smooth field: element means and facet means.
    pub fn project<U>(mesh: &SimplicialMesh, u: U, method: BoundaryProjection, degree: usize) -> Self
    where
        U: Fn(&Point) -> Vector,
    {
        WGField {
            dim: mesh.dim(),
            interior: mesh
                .geometries()
                .iter()
                .map(|g| project_interior(&u, g, degree))
                .collect(),
            facet: (0..mesh.num_facets())
                .map(|f| project_boundary_datum(&u, &mesh.facet_points(f), method))
                .collect(),
        }
    }

    /// Facet values of element `k` in local facet order.
    pub fn local_facets(&self, mesh: &SimplicialMesh, k: usize) -> Vec<Vector> {
        mesh.element_facets(k).iter().map(|&f| self.facet[f]).collect()
    }

    /// True when every boundary facet value vanishes (a member of V_h^0).
    pub fn is_in_v0(&self, mesh: &SimplicialMesh) -> bool {
        mesh.facets()
            .iter()
            .zip(&self.facet)
            .all(|(f, v)| !f.boundary || *v == [0.0; 3])
    }
}

/// Piecewise constant pressure.
#[derive(Debug, Clone, PartialEq)]
pub struct PressureField {
    pub values: Vec<f64>,
}

impl PressureField {
    /// Measure-weighted mean.
    pub fn mean(&self, mesh: &SimplicialMesh) -> f64 {
        let total: f64 = mesh
            .geometries()
            .iter()
            .zip(&self.values)
            .map(|(g, p)| g.measure * p)
            .sum();
        total / mesh.total_measure()
    }

    pub fn normalize(&mut self, mesh: &SimplicialMesh) {
        let m = self.mean(mesh);
        for p in &mut self.values {
            *p -= m;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn reference_triangle() -> ElementGeometry {
        ElementGeometry::from_vertices(2, &[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
            .unwrap()
    }

    fn skewed_tet() -> ElementGeometry {
        ElementGeometry::from_vertices(
            3,
            &[[0.1, 0.0, 0.2], [1.3, 0.1, 0.0], [0.2, 0.9, 0.1], [0.3, 0.2, 1.1]],
        )
        .unwrap()
    }

    fn random_vec(rng: &mut ChaCha8Rng, dim: usize) -> Vector {
        let mut v = [0.0; 3];
        for c in v.iter_mut().take(dim) {
            *c = rng.random_range(-1.0..1.0);
        }
        v
    }

    /// Integral of w . n over local facet i, by quadrature.
    fn facet_flux(g: &ElementGeometry, i: usize, w: &RT0Function) -> f64 {
        let fv = g.facet_vertices(i);
        let rule = SimplexRule::collapsed(g.dim - 1, 3);
        g.facet_measures[i] * rule.mean(&fv, |x| geom::dot(&w.eval(g, x), &g.normals[i]))
    }

    #[test]
    fn interior_basis_vanishes_at_centroid() {
        let g = reference_triangle();
        assert_eq!(weak_gradient_interior_basis(&g, &g.centroid), [0.0; 3]);
    }

    #[test]
    fn interior_basis_at_vertex() {
        let g = reference_triangle();
        // C_K = 18 from the quadrature oracle in the mesh tests.
        let v = weak_gradient_interior_basis(&g, &[1.0, 0.0, 0.0]);
        assert!((v[0] + 18.0 * 2.0 / 3.0).abs() < 1e-12);
        assert!((v[1] - 18.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn basis_scales_inversely_with_element_size() {
        let base = [[0.0, 0.0, 0.0], [1.0, 0.2, 0.0], [0.3, 0.8, 0.0]];
        let g = ElementGeometry::from_vertices(2, &base).unwrap();
        let x = [0.4, 0.3, 0.0];
        let v = weak_gradient_interior_basis(&g, &x);
        for s in [0.5, 2.0] {
            let verts: Vec<Point> = base.iter().map(|p| geom::scale(s, p)).collect();
            let gs = ElementGeometry::from_vertices(2, &verts).unwrap();
            let vs = weak_gradient_interior_basis(&gs, &geom::scale(s, &x));
            for r in 0..2 {
                assert!((vs[r] - v[r] / s).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn basis_sum_identity() {
        for g in [reference_triangle(), skewed_tet()] {
            let x = [0.7, -0.2, 0.4];
            let mut s = weak_gradient_interior_basis(&g, &x);
            for i in 0..=g.dim {
                s = geom::add(&s, &weak_gradient_facet_basis(&g, i, &x));
            }
            assert!(geom::norm(&s) < 1e-13);
        }
    }

    #[test]
    fn facet_basis_on_hypotenuse() {
        let g = reference_triangle();
        // Local facet 0 is opposite vertex 0: the hypotenuse.
        let v = weak_gradient_facet_basis(&g, 0, &g.centroid);
        assert!((v[0] - 2.0).abs() < 1e-14 && (v[1] - 2.0).abs() < 1e-14);
        let a = weak_gradient_facet_basis(&g, 1, &g.centroid);
        let expect = geom::scale(g.facet_measures[1] / g.measure, &g.normals[1]);
        assert!(geom::norm(&geom::sub(&a, &expect)) < 1e-15);
    }

    #[test]
    fn weak_gradient_of_constants_vanishes() {
        for g in [reference_triangle(), skewed_tet()] {
            let c = [1.5, -2.0, 0.25];
            let rows = weak_gradient_field(&g, &c, &vec![c; g.dim + 1]);
            for row in rows.iter().take(g.dim) {
                assert!(geom::norm(&row.a) < 1e-12 && row.b.abs() < 1e-12 * g.c_k);
            }
        }
    }

    #[test]
    fn single_facet_value_gives_facet_basis() {
        let g = skewed_tet();
        let mut facets = vec![[0.0; 3]; 4];
        facets[2] = [1.0, 0.0, 0.0];
        let rows = weak_gradient_field(&g, &[0.0; 3], &facets);
        assert_eq!(rows[0], facet_basis_gradient(&g, 2));
        assert_eq!(rows[1], RT0Function::default());
    }

    #[test]
    fn weak_gradient_of_linear_field_is_identity() {
        for g in [reference_triangle(), skewed_tet()] {
            let d = g.dim;
            let rows = weak_gradient_field(&g, &g.centroid, &g.facet_barycenters);
            for (r, row) in rows.iter().enumerate().take(d) {
                assert!(row.b.abs() < 1e-11 * g.c_k);
                for c in 0..d {
                    let want = if r == c { 1.0 } else { 0.0 };
                    assert!((row.a[c] - want).abs() < 1e-12, "row {r} col {c}");
                }
            }
        }
    }

    #[test]
    fn defining_relation_holds_for_random_fields() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for g in [reference_triangle(), skewed_tet()] {
            let d = g.dim;
            for _ in 0..10 {
                let u0 = random_vec(&mut rng, d);
                let ub: Vec<Vector> = (0..=d).map(|_| random_vec(&mut rng, d)).collect();
                let rows = weak_gradient_field(&g, &u0, &ub);
                // RT0 basis: unit constants plus x - x_K.
                let mut tests: Vec<RT0Function> = (0..d)
                    .map(|c| {
                        let mut a = [0.0; 3];
                        a[c] = 1.0;
                        RT0Function { a, b: 0.0 }
                    })
                    .collect();
                tests.push(RT0Function { a: [0.0; 3], b: 1.0 });
                let rule = SimplexRule::collapsed(d, 4);
                for (r, row) in rows.iter().enumerate().take(d) {
                    for w in &tests {
                        let lhs = g.measure
                            * rule.mean(&g.vertices, |x| geom::dot(&row.eval(&g, x), &w.eval(&g, x)));
                        let mut rhs = -u0[r] * g.measure * w.divergence(d);
                        for (i, v) in ub.iter().enumerate() {
                            rhs += v[r] * facet_flux(&g, i, w);
                        }
                        assert!((lhs - rhs).abs() < 1e-11 * (1.0 + lhs.abs()), "{lhs} vs {rhs}");
                    }
                }
            }
        }
    }

    #[test]
    fn weak_divergence_cases() {
        let g = reference_triangle();
        let c = [0.3, -0.7, 0.0];
        assert!(weak_divergence(&g, &[c; 3]).abs() < 1e-14);
        assert!((weak_divergence(&g, &g.facet_barycenters) - 2.0).abs() < 1e-13);
        let t = skewed_tet();
        assert!((weak_divergence(&t, &t.facet_barycenters) - 3.0).abs() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let vals: Vec<Vector> = (0..3).map(|_| random_vec(&mut rng, 2)).collect();
        // Dense re-evaluation from raw edge vectors.
        let v = &g.vertices;
        let mut flux = 0.0;
        for i in 0..3 {
            let (p, q) = (v[(i + 1) % 3], v[(i + 2) % 3]);
            let t = geom::sub(&q, &p);
            let mut n = [t[1], -t[0], 0.0];
            if geom::dot(&geom::sub(&v[i], &p), &n) > 0.0 {
                n = geom::scale(-1.0, &n);
            }
            // |e| n equals the rotated edge vector.
            flux += geom::dot(&vals[i], &n);
        }
        assert!((weak_divergence(&g, &vals) - flux / 0.5).abs() < 1e-13);
    }

    #[test]
    fn lifting_reproduces_rt0_members() {
        for g in [reference_triangle(), skewed_tet()] {
            let c = [0.4, 1.1, -0.3];
            let l = lifting_apply(&g, &vec![c; g.dim + 1]);
            for r in 0..g.dim {
                assert!((l.a[r] - c[r]).abs() < 1e-13);
            }
            assert!(l.b.abs() < 1e-13);
            let shifted: Vec<Vector> = g
                .facet_barycenters
                .iter()
                .map(|p| geom::sub(p, &g.centroid))
                .collect();
            let l = lifting_apply(&g, &shifted);
            assert!(geom::norm(&l.a) < 1e-13 && (l.b - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn lifting_normal_traces_and_divergence() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for g in [reference_triangle(), skewed_tet()] {
            let d = g.dim;
            for _ in 0..10 {
                let v: Vec<Vector> = (0..=d).map(|_| random_vec(&mut rng, d)).collect();
                let l = lifting_apply(&g, &v);
                for (i, vi) in v.iter().enumerate() {
                    let want = g.facet_measures[i] * geom::dot(vi, &g.normals[i]);
                    assert!((facet_flux(&g, i, &l) - want).abs() < 1e-12);
                }
                let lhs = l.divergence(d) * g.measure;
                let rhs = weak_divergence(&g, &v) * g.measure;
                assert!((lhs - rhs).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn commuting_divergence_for_quadratics() {
        // u = (x^2 + y z, x y - z, y^2 + x z): div u = 2x + x + x = 4x in 3D.
        let t = skewed_tet();
        let u = |x: &Point| [x[0] * x[0] + x[1] * x[2], x[0] * x[1] - x[2], x[1] * x[1] + x[0] * x[2]];
        let faces: Vec<Vector> = (0..4)
            .map(|i| project_boundary_datum(u, &t.facet_vertices(i), BoundaryProjection::Gauss3))
            .collect();
        let avg_div = project_interior(|x| [4.0 * x[0], 0.0, 0.0], &t, 2)[0];
        assert!((weak_divergence(&t, &faces) - avg_div).abs() < 1e-12);
    }

    #[test]
    fn boundary_projection_rules() {
        let seg = [[0.2, 0.0, 0.0], [0.5, 0.1, 0.0]];
        let c = |_: &Point| [2.0, -1.0, 0.0];
        for m in [
            BoundaryProjection::Barycenter,
            BoundaryProjection::Gauss2,
            BoundaryProjection::Gauss3,
        ] {
            let v = project_boundary_datum(c, &seg, m);
            assert!((v[0] - 2.0).abs() < 1e-15 && (v[1] + 1.0).abs() < 1e-15);
        }
        let lin = |x: &Point| [3.0 * x[0] - x[1], x[1], 0.0];
        let mid = project_boundary_datum(lin, &seg, BoundaryProjection::Barycenter);
        assert!((mid[0] - (3.0 * 0.35 - 0.05)).abs() < 1e-15);
    }

    #[test]
    fn gauss2_projection_is_fourth_order() {
        let g = |x: &Point| [(std::f64::consts::PI * x[0]).sin(), (2.0 * x[1]).exp(), 0.0];
        let reference = SimplexRule::collapsed(1, 50);
        let mut errs = Vec::new();
        for h in [0.2, 0.1, 0.05] {
            let seg = [[0.3, 0.1, 0.0], [0.3 + h, 0.1 + 0.5 * h, 0.0]];
            let approx = project_boundary_datum(g, &seg, BoundaryProjection::Gauss2);
            let exact = reference.mean(&seg, |x| g(x)[0]);
            errs.push((approx[0] - exact).abs());
        }
        let rate = (errs[1] / errs[2]).log2();
        assert!(rate > 3.7 && rate < 4.3, "rate {rate}");
    }

    #[test]
    fn interior_projection() {
        let g = reference_triangle();
        let p = project_interior(|_| [1.0, 2.0, 0.0], &g, 2);
        assert!((p[0] - 1.0).abs() < 1e-15 && (p[1] - 2.0).abs() < 1e-15);
        let p = project_interior(|x| [2.0 * x[0] + x[1], 0.0, 0.0], &g, 2);
        assert!((p[0] - 1.0).abs() < 1e-15);
        let oracle = SimplexRule::collapsed(2, 10).mean(&g.vertices, |x| (std::f64::consts::PI * x[0]).sin());
        let p = project_interior(|x| [(std::f64::consts::PI * x[0]).sin(), 0.0, 0.0], &g, 12);
        assert!((p[0] - oracle).abs() < 1e-10);
    }
}
