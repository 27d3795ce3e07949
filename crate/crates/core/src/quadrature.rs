//! Quadrature on simplices of dimension 1, 2 and 3 (embedded in 3-space).
//!
//! Rules are conical (collapsed) products of Gauss-Legendre rules and are
//! stored in barycentric form with weights summing to one, so that
//! `integral = measure * sum_q w_q f(x_q)`.

use crate::geom::{barycentric_point, Point};

/// Gauss-Legendre nodes and weights on `[0, 1]` (weights sum to one).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "at least one quadrature point");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        // Chebyshev-like initial guess, refined by Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = 0.5 * (1.0 - x);
        nodes[n - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = 0.5 * w;
        weights[n - 1 - i] = 0.5 * w;
    }
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n = n as f64;
    let d = n * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// A quadrature rule on a reference simplex in barycentric coordinates.
#[derive(Debug, Clone)]
pub struct SimplexRule {
    /// Simplex dimension (1 = segment, 2 = triangle, 3 = tetrahedron).
    pub dim: usize,
    /// Barycentric coordinates, `dim + 1` per point.
    pub barycentric: Vec<Vec<f64>>,
    /// Weights summing to one.
    pub weights: Vec<f64>,
}

impl SimplexRule {
    /// Collapsed Gauss rule with `n` points per direction.
    pub fn collapsed(dim: usize, n: usize) -> Self {
        let (t, w) = gauss_legendre(n);
        let mut barycentric = Vec::new();
        let mut weights = Vec::new();
        match dim {
            1 => {
                for (ti, wi) in t.iter().zip(&w) {
                    barycentric.push(vec![1.0 - ti, *ti]);
                    weights.push(*wi);
                }
            }
            2 => {
                for (s, ws) in t.iter().zip(&w) {
                    for (r, wr) in t.iter().zip(&w) {
                        let xi = *s;
                        let eta = r * (1.0 - s);
                        barycentric.push(vec![1.0 - xi - eta, xi, eta]);
                        weights.push(2.0 * ws * wr * (1.0 - s));
                    }
                }
            }
            3 => {
                for (s, ws) in t.iter().zip(&w) {
                    for (r, wr) in t.iter().zip(&w) {
                        for (q, wq) in t.iter().zip(&w) {
                            let xi = *s;
                            let eta = r * (1.0 - s);
                            let zeta = q * (1.0 - s) * (1.0 - r);
                            barycentric.push(vec![1.0 - xi - eta - zeta, xi, eta, zeta]);
                            weights.push(6.0 * ws * wr * wq * (1.0 - s) * (1.0 - s) * (1.0 - r));
                        }
                    }
                }
            }
            _ => panic!("simplex dimension {dim} not supported"),
        }
        SimplexRule {
            dim,
            barycentric,
            weights,
        }
    }

    /// Cheapest collapsed rule integrating polynomials of total degree
    /// `degree` exactly.
    pub fn with_degree(dim: usize, degree: usize) -> Self {
        // The collapse Jacobian adds dim-1 to the degree in the first variable.
        let n = (degree + dim + 1) / 2;
        Self::collapsed(dim, n.max(1))
    }

    /// Single point at the barycenter.
    pub fn barycenter(dim: usize) -> Self {
        SimplexRule {
            dim,
            barycentric: vec![vec![1.0 / (dim as f64 + 1.0); dim + 1]],
            weights: vec![1.0],
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Physical points and weights (weights still sum to one).
    pub fn map<'a>(&'a self, vertices: &'a [Point]) -> impl Iterator<Item = (Point, f64)> + 'a {
        debug_assert_eq!(vertices.len(), self.dim + 1);
        self.barycentric
            .iter()
            .zip(&self.weights)
            .map(move |(l, &w)| (barycentric_point(vertices, l), w))
    }

    /// Mean value of `f` over the simplex.
    pub fn mean<F: FnMut(&Point) -> f64>(&self, vertices: &[Point], mut f: F) -> f64 {
        self.map(vertices).map(|(x, w)| w * f(&x)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_monomials() {
        for n in 1..12 {
            let (t, w) = gauss_legendre(n);
            for p in 0..2 * n {
                let q: f64 = t.iter().zip(&w).map(|(x, w)| w * x.powi(p as i32)).sum();
                assert!((q - 1.0 / (p as f64 + 1.0)).abs() < 1e-14, "n={n} p={p}");
            }
        }
    }

    fn factorial(k: usize) -> f64 {
        (1..=k).map(|i| i as f64).product()
    }

    #[test]
    fn simplex_rules_exact_to_degree() {
        // Mean of x^a y^b z^c over the unit simplex is a!b!c! d! / (a+b+c+d)!.
        let verts = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        for dim in 1..=3 {
            for deg in 0..=8 {
                let rule = SimplexRule::with_degree(dim, deg);
                for a in 0..=deg {
                    for b in 0..=(deg - a) {
                        let c = deg - a - b;
                        if (dim < 2 && b > 0) || (dim < 3 && c > 0) {
                            continue;
                        }
                        let got = rule.mean(&verts[..dim + 1], |x| {
                            x[0].powi(a as i32) * x[1].powi(b as i32) * x[2].powi(c as i32)
                        });
                        let want = factorial(a) * factorial(b) * factorial(c) * factorial(dim)
                            / factorial(a + b + c + dim);
                        assert!((got - want).abs() < 1e-14, "dim={dim} a={a} b={b} c={c}");
                    }
                }
            }
        }
    }
}
