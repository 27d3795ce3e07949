//! Small fixed-size vector helpers. Points and vectors are stored as
//! `[f64; 3]`; in two dimensions the third entry is zero.

pub type Point = [f64; 3];
pub type Vector = [f64; 3];

#[inline]
pub fn sub(a: &Point, b: &Point) -> Vector {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn add(a: &Vector, b: &Vector) -> Vector {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn scale(s: f64, a: &Vector) -> Vector {
    [s * a[0], s * a[1], s * a[2]]
}

#[inline]
pub fn axpy(s: f64, x: &Vector, y: &mut Vector) {
    y[0] += s * x[0];
    y[1] += s * x[1];
    y[2] += s * x[2];
}

#[inline]
pub fn dot(a: &Vector, b: &Vector) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn norm(a: &Vector) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn cross(a: &Vector, b: &Vector) -> Vector {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Affine combination `sum_i lambda_i * p_i`.
pub fn barycentric_point(vertices: &[Point], lambda: &[f64]) -> Point {
    let mut x = [0.0; 3];
    for (p, &l) in vertices.iter().zip(lambda) {
        axpy(l, p, &mut x);
    }
    x
}

pub fn centroid(vertices: &[Point]) -> Point {
    let w = 1.0 / vertices.len() as f64;
    let mut c = [0.0; 3];
    for p in vertices {
        axpy(w, p, &mut c);
    }
    c
}

/// Signed d-measure of a simplex given by d+1 vertices (d = 2 or 3).
pub fn signed_measure(dim: usize, v: &[Point]) -> f64 {
    match dim {
        2 => {
            let a = sub(&v[1], &v[0]);
            let b = sub(&v[2], &v[0]);
            0.5 * (a[0] * b[1] - a[1] * b[0])
        }
        3 => {
            let a = sub(&v[1], &v[0]);
            let b = sub(&v[2], &v[0]);
            let c = sub(&v[3], &v[0]);
            dot(&a, &cross(&b, &c)) / 6.0
        }
        _ => unreachable!("dimension checked by caller"),
    }
}

/// (d-1)-measure of a facet and a unit normal (orientation arbitrary).
pub fn facet_measure_normal(dim: usize, v: &[Point]) -> (f64, Vector) {
    match dim {
        2 => {
            let t = sub(&v[1], &v[0]);
            let len = norm(&t);
            (len, [t[1] / len, -t[0] / len, 0.0])
        }
        3 => {
            let n = cross(&sub(&v[1], &v[0]), &sub(&v[2], &v[0]));
            let len = norm(&n);
            (0.5 * len, scale(1.0 / len, &n))
        }
        _ => unreachable!("dimension checked by caller"),
    }
}

pub fn diameter(v: &[Point]) -> f64 {
    let mut h: f64 = 0.0;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            h = h.max(norm(&sub(&v[i], &v[j])));
        }
    }
    h
}
