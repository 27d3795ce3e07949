//! Conforming simplicial meshes in two and three dimensions.
//!
//! Local facet `i` of an element is the facet opposite its local vertex `i`.
//! Every facet stores one unit normal, pointing out of the lower-indexed
//! adjacent element (outward on the boundary); the outward normal seen from
//! the other neighbour is obtained by a sign flip.

use std::collections::HashMap;
use std::collections::VecDeque;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::MeshError;
use crate::geom::{self, Point, Vector};

#[derive(Debug, Clone, PartialEq)]
pub struct FacetRecord {
    /// Vertex indices, sorted ascending.
    pub vertices: Vec<usize>,
    /// (d-1)-dimensional measure.
    pub measure: f64,
    /// Unit normal, outward for `elements[0]`.
    pub normal: Vector,
    pub barycenter: Point,
    pub boundary: bool,
    /// Adjacent elements in ascending order (one on the boundary, two inside).
    pub elements: Vec<usize>,
}

/// Geometric data of one element used by the weak Galerkin operators.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementGeometry {
    pub dim: usize,
    pub vertices: Vec<Point>,
    /// x_K, the vertex average.
    pub centroid: Point,
    /// |K|
    pub measure: f64,
    /// m_K = integral over K of |x - x_K|^2.
    pub moment: f64,
    /// C_K = d |K| / m_K.
    pub c_k: f64,
    /// Outward unit normals of the local facets.
    pub normals: Vec<Vector>,
    /// Measures of the local facets.
    pub facet_measures: Vec<f64>,
    /// Barycenters of the local facets.
    pub facet_barycenters: Vec<Point>,
    pub diameter: f64,
}

impl ElementGeometry {
    /// Geometry of a positively or negatively oriented simplex.
    pub fn from_vertices(dim: usize, vertices: &[Point]) -> Result<Self, MeshError> {
        if dim != 2 && dim != 3 {
            return Err(MeshError::UnsupportedDimension(dim));
        }
        assert_eq!(vertices.len(), dim + 1, "a {dim}-simplex has {} vertices", dim + 1);
        let measure = geom::signed_measure(dim, vertices).abs();
        let diameter = geom::diameter(vertices);
        if !(measure >= 1e-14 * diameter.powi(dim as i32)) || measure == 0.0 {
            return Err(MeshError::DegenerateElement { index: 0, measure });
        }
        let centroid = geom::centroid(vertices);
        // Exact second moment: |K| * sum_i |v_i - x_K|^2 / ((d+1)(d+2)).
        let spread: f64 = vertices
            .iter()
            .map(|v| {
                let w = geom::sub(v, &centroid);
                geom::dot(&w, &w)
            })
            .sum();
        let moment = measure * spread / ((dim + 1) * (dim + 2)) as f64;
        let c_k = dim as f64 * measure / moment;

        let mut normals = Vec::with_capacity(dim + 1);
        let mut facet_measures = Vec::with_capacity(dim + 1);
        let mut facet_barycenters = Vec::with_capacity(dim + 1);
        for i in 0..=dim {
            let fv: Vec<Point> = (0..=dim).filter(|&j| j != i).map(|j| vertices[j]).collect();
            let (m, mut n) = geom::facet_measure_normal(dim, &fv);
            let bary = geom::centroid(&fv);
            if geom::dot(&geom::sub(&vertices[i], &bary), &n) > 0.0 {
                n = geom::scale(-1.0, &n);
            }
            normals.push(n);
            facet_measures.push(m);
            facet_barycenters.push(bary);
        }
        Ok(ElementGeometry {
            dim,
            vertices: vertices.to_vec(),
            centroid,
            measure,
            moment,
            c_k,
            normals,
            facet_measures,
            facet_barycenters,
            diameter,
        })
    }

    /// Vertices of local facet `i`.
    pub fn facet_vertices(&self, i: usize) -> Vec<Point> {
        (0..=self.dim)
            .filter(|&j| j != i)
            .map(|j| self.vertices[j])
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct SimplicialMesh {
    dim: usize,
    vertices: Vec<Point>,
    elements: Vec<Vec<usize>>,
    facets: Vec<FacetRecord>,
    elem_facets: Vec<Vec<usize>>,
    geometry: Vec<ElementGeometry>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshStats {
    /// Maximum element diameter.
    pub h: f64,
    pub num_elements: usize,
    /// Ratio of the largest to the smallest element diameter.
    pub quasi_uniformity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    /// `dim nv ne` header, coordinates, then 1-based connectivity.
    Native,
    /// Gmsh MSH 2.2 ASCII, triangles and tetrahedra only.
    Gmsh,
}

impl MeshFormat {
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("msh") => MeshFormat::Gmsh,
            _ => MeshFormat::Native,
        }
    }
}

impl SimplicialMesh {
    /// Build and validate a mesh. Elements must be positively oriented.
    pub fn new(
        dim: usize,
        vertices: Vec<Point>,
        elements: Vec<Vec<usize>>,
    ) -> Result<Self, MeshError> {
        if dim != 2 && dim != 3 {
            return Err(MeshError::UnsupportedDimension(dim));
        }
        if elements.is_empty() {
            return Err(MeshError::Empty);
        }
        let nv = vertices.len();
        let mut seen: HashMap<Vec<usize>, usize> = HashMap::with_capacity(elements.len());
        let mut geometry = Vec::with_capacity(elements.len());
        for (k, elem) in elements.iter().enumerate() {
            if elem.len() != dim + 1 {
                return Err(MeshError::Parse {
                    line: 0,
                    message: format!("element {k} has {} vertices, expected {}", elem.len(), dim + 1),
                });
            }
            for &v in elem {
                if v >= nv {
                    return Err(MeshError::VertexOutOfRange {
                        element: k,
                        vertex: v,
                        num_vertices: nv,
                    });
                }
            }
            let mut key = elem.clone();
            key.sort_unstable();
            if let Some(&first) = seen.get(&key) {
                return Err(MeshError::DuplicateElement { index: k, first });
            }
            seen.insert(key, k);

            let pts: Vec<Point> = elem.iter().map(|&v| vertices[v]).collect();
            let signed = geom::signed_measure(dim, &pts);
            let diam = geom::diameter(&pts);
            if signed.abs() < 1e-14 * diam.powi(dim as i32) || signed.abs() == 0.0 {
                return Err(MeshError::DegenerateElement {
                    index: k,
                    measure: signed.abs(),
                });
            }
            if signed < 0.0 {
                return Err(MeshError::InvertedElement {
                    index: k,
                    signed_measure: signed,
                });
            }
            let g = ElementGeometry::from_vertices(dim, &pts).map_err(|e| match e {
                MeshError::DegenerateElement { measure, .. } => {
                    MeshError::DegenerateElement { index: k, measure }
                }
                other => other,
            })?;
            geometry.push(g);
        }

        // Facets in order of first appearance.
        let mut facet_index: HashMap<Vec<usize>, usize> = HashMap::new();
        let mut facets: Vec<FacetRecord> = Vec::new();
        let mut elem_facets = Vec::with_capacity(elements.len());
        for (k, elem) in elements.iter().enumerate() {
            let mut local = Vec::with_capacity(dim + 1);
            for i in 0..=dim {
                let mut key: Vec<usize> = (0..=dim).filter(|&j| j != i).map(|j| elem[j]).collect();
                key.sort_unstable();
                let id = match facet_index.get(&key) {
                    Some(&id) => {
                        facets[id].elements.push(k);
                        id
                    }
                    None => {
                        let g = &geometry[k];
                        let id = facets.len();
                        facet_index.insert(key.clone(), id);
                        facets.push(FacetRecord {
                            vertices: key,
                            measure: g.facet_measures[i],
                            normal: g.normals[i],
                            barycenter: g.facet_barycenters[i],
                            boundary: true,
                            elements: vec![k],
                        });
                        id
                    }
                };
                local.push(id);
            }
            elem_facets.push(local);
        }
        for f in facets.iter_mut() {
            match f.elements.len() {
                1 => f.boundary = true,
                2 => f.boundary = false,
                count => {
                    return Err(MeshError::NonManifoldFacet {
                        vertices: f.vertices.clone(),
                        count,
                    })
                }
            }
        }

        let mesh = SimplicialMesh {
            dim,
            vertices,
            elements,
            facets,
            elem_facets,
            geometry,
        };
        let components = mesh.count_components();
        if components != 1 {
            return Err(MeshError::Disconnected { components });
        }
        Ok(mesh)
    }

    fn count_components(&self) -> usize {
        let n = self.elements.len();
        let mut label = vec![usize::MAX; n];
        let mut components = 0;
        let mut queue = VecDeque::new();
        for start in 0..n {
            if label[start] != usize::MAX {
                continue;
            }
            label[start] = components;
            queue.push_back(start);
            while let Some(k) = queue.pop_front() {
                for &f in &self.elem_facets[k] {
                    for &other in &self.facets[f].elements {
                        if label[other] == usize::MAX {
                            label[other] = components;
                            queue.push_back(other);
                        }
                    }
                }
            }
            components += 1;
        }
        components
    }

    /// Unit square split into `n x n` squares, each cut along its
    /// lower-left to upper-right diagonal.
    pub fn structured_tri(n: usize) -> Result<Self, MeshError> {
        if n == 0 {
            return Err(MeshError::ZeroSubdivisions);
        }
        let h = 1.0 / n as f64;
        let idx = |i: usize, j: usize| j * (n + 1) + i;
        let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
        for j in 0..=n {
            for i in 0..=n {
                vertices.push([i as f64 * h, j as f64 * h, 0.0]);
            }
        }
        let mut elements = Vec::with_capacity(2 * n * n);
        for j in 0..n {
            for i in 0..n {
                let (ll, lr, ur, ul) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
                elements.push(vec![ll, lr, ur]);
                elements.push(vec![ll, ur, ul]);
            }
        }
        Self::new(2, vertices, elements)
    }

    /// Unit cube split into `n^3` subcubes, each cut into six tetrahedra
    /// sharing the main diagonal (Kuhn split).
    pub fn structured_tet(n: usize) -> Result<Self, MeshError> {
        if n == 0 {
            return Err(MeshError::ZeroSubdivisions);
        }
        let h = 1.0 / n as f64;
        let m = n + 1;
        let idx = |i: usize, j: usize, k: usize| (k * m + j) * m + i;
        let mut vertices = Vec::with_capacity(m * m * m);
        for k in 0..m {
            for j in 0..m {
                for i in 0..m {
                    vertices.push([i as f64 * h, j as f64 * h, k as f64 * h]);
                }
            }
        }
        const PERMS: [[usize; 3]; 6] = [
            [0, 1, 2],
            [0, 2, 1],
            [1, 0, 2],
            [1, 2, 0],
            [2, 0, 1],
            [2, 1, 0],
        ];
        let mut elements = Vec::with_capacity(6 * n * n * n);
        for k in 0..n {
            for j in 0..n {
                for i in 0..n {
                    for perm in PERMS {
                        let mut c = [i, j, k];
                        let mut tet = vec![idx(c[0], c[1], c[2])];
                        for axis in perm {
                            c[axis] += 1;
                            tet.push(idx(c[0], c[1], c[2]));
                        }
                        let pts: Vec<Point> = tet.iter().map(|&v| vertices[v]).collect();
                        if geom::signed_measure(3, &pts) < 0.0 {
                            tet.swap(2, 3);
                        }
                        elements.push(tet);
                    }
                }
            }
        }
        Self::new(3, vertices, elements)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn elements(&self) -> &[Vec<usize>] {
        &self.elements
    }

    pub fn facets(&self) -> &[FacetRecord] {
        &self.facets
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn num_facets(&self) -> usize {
        self.facets.len()
    }

    /// Global facet indices of element `k`, ordered by local facet.
    pub fn element_facets(&self, k: usize) -> &[usize] {
        &self.elem_facets[k]
    }

    /// Cached geometry of element `k`.
    pub fn geometry(&self, k: usize) -> &ElementGeometry {
        &self.geometry[k]
    }

    pub fn element_geometry(&self, k: usize) -> Result<&ElementGeometry, MeshError> {
        self.geometry.get(k).ok_or(MeshError::ElementOutOfRange(k))
    }

    pub fn geometries(&self) -> &[ElementGeometry] {
        &self.geometry
    }

    /// Sign turning the stored facet normal into the outward normal of `k`.
    pub fn normal_sign(&self, facet: usize, k: usize) -> f64 {
        if self.facets[facet].elements[0] == k {
            1.0
        } else {
            -1.0
        }
    }

    pub fn facet_points(&self, facet: usize) -> Vec<Point> {
        self.facets[facet]
            .vertices
            .iter()
            .map(|&v| self.vertices[v])
            .collect()
    }

    pub fn stats(&self) -> MeshStats {
        let (mut hmax, mut hmin) = (0.0_f64, f64::INFINITY);
        for g in &self.geometry {
            hmax = hmax.max(g.diameter);
            hmin = hmin.min(g.diameter);
        }
        MeshStats {
            h: hmax,
            num_elements: self.elements.len(),
            quasi_uniformity: hmax / hmin,
        }
    }

    pub fn total_measure(&self) -> f64 {
        self.geometry.iter().map(|g| g.measure).sum()
    }

    /// Serialize in the native text format.
    pub fn to_native_string(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{} {} {}", self.dim, self.vertices.len(), self.elements.len());
        for v in &self.vertices {
            let coords: Vec<String> = v[..self.dim].iter().map(|c| format!("{c:?}")).collect();
            let _ = writeln!(s, "{}", coords.join(" "));
        }
        for e in &self.elements {
            let ids: Vec<String> = e.iter().map(|i| (i + 1).to_string()).collect();
            let _ = writeln!(s, "{}", ids.join(" "));
        }
        s
    }

    pub fn write_native(&self, path: &Path) -> Result<(), MeshError> {
        std::fs::write(path, self.to_native_string()).map_err(|source| MeshError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn parse_native(text: &str) -> Result<Self, MeshError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (line, header) = lines.next().ok_or(MeshError::Parse {
            line: 1,
            message: "missing header".into(),
        })?;
        let head: Vec<usize> = parse_fields(line, header)?;
        if head.len() != 3 {
            return Err(MeshError::Parse {
                line,
                message: "header must be `dim nv ne`".into(),
            });
        }
        let (dim, nv, ne) = (head[0], head[1], head[2]);
        if dim != 2 && dim != 3 {
            return Err(MeshError::UnsupportedDimension(dim));
        }
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let (line, l) = lines.next().ok_or(MeshError::Parse {
                line: 0,
                message: "unexpected end of file in vertex block".into(),
            })?;
            let c: Vec<f64> = parse_fields(line, l)?;
            if c.len() != dim {
                return Err(MeshError::Parse {
                    line,
                    message: format!("expected {dim} coordinates"),
                });
            }
            let mut p = [0.0; 3];
            p[..dim].copy_from_slice(&c);
            vertices.push(p);
        }
        let mut elements = Vec::with_capacity(ne);
        for _ in 0..ne {
            let (line, l) = lines.next().ok_or(MeshError::Parse {
                line: 0,
                message: "unexpected end of file in element block".into(),
            })?;
            let ids: Vec<usize> = parse_fields(line, l)?;
            if ids.len() != dim + 1 || ids.contains(&0) {
                return Err(MeshError::Parse {
                    line,
                    message: format!("expected {} one-based vertex indices", dim + 1),
                });
            }
            elements.push(ids.into_iter().map(|i| i - 1).collect());
        }
        Self::new(dim, vertices, elements)
    }

    /// Gmsh MSH 2.2 ASCII; any element type other than 2 (triangle) and
    /// 4 (tetrahedron) is rejected.
    pub fn parse_gmsh(text: &str) -> Result<Self, MeshError> {
        let lines: Vec<&str> = text.lines().map(str::trim).collect();
        let find = |tag: &str| lines.iter().position(|l| *l == tag);
        let perr = |line: usize, message: &str| MeshError::Parse {
            line: line + 1,
            message: message.to_string(),
        };
        if let Some(i) = find("$MeshFormat") {
            let version = lines.get(i + 1).and_then(|l| l.split_whitespace().next());
            if !matches!(version, Some(v) if v.starts_with("2.")) {
                return Err(perr(i + 1, "only MSH 2.x ASCII is supported"));
            }
        }
        let nodes_at = find("$Nodes").ok_or_else(|| perr(0, "missing $Nodes"))?;
        let nn: usize = lines
            .get(nodes_at + 1)
            .and_then(|l| l.parse().ok())
            .ok_or_else(|| perr(nodes_at + 1, "bad node count"))?;
        let mut id_map = HashMap::with_capacity(nn);
        let mut vertices = Vec::with_capacity(nn);
        for off in 0..nn {
            let ln = nodes_at + 2 + off;
            let l = lines.get(ln).ok_or_else(|| perr(ln, "truncated $Nodes"))?;
            let f: Vec<f64> = parse_fields(ln + 1, l)?;
            if f.len() < 4 {
                return Err(perr(ln, "node line needs id x y z"));
            }
            id_map.insert(f[0] as i64, vertices.len());
            vertices.push([f[1], f[2], f[3]]);
        }
        let elems_at = find("$Elements").ok_or_else(|| perr(0, "missing $Elements"))?;
        let ne: usize = lines
            .get(elems_at + 1)
            .and_then(|l| l.parse().ok())
            .ok_or_else(|| perr(elems_at + 1, "bad element count"))?;
        let mut dim = None;
        let mut elements = Vec::with_capacity(ne);
        for off in 0..ne {
            let ln = elems_at + 2 + off;
            let l = lines.get(ln).ok_or_else(|| perr(ln, "truncated $Elements"))?;
            let f: Vec<i64> = parse_fields(ln + 1, l)?;
            if f.len() < 3 {
                return Err(perr(ln, "element line too short"));
            }
            let (ty, ntags) = (f[1], f[2] as usize);
            let d = match ty {
                2 => 2,
                4 => 3,
                other => return Err(MeshError::UnsupportedCellType(other)),
            };
            if *dim.get_or_insert(d) != d {
                return Err(perr(ln, "mixed triangle and tetrahedron cells"));
            }
            let nodes = &f[3 + ntags..];
            if nodes.len() != d + 1 {
                return Err(perr(ln, "wrong number of element nodes"));
            }
            let mut e = Vec::with_capacity(d + 1);
            for id in nodes {
                e.push(*id_map.get(id).ok_or_else(|| perr(ln, "unknown node id"))?);
            }
            elements.push(e);
        }
        let dim = dim.ok_or(MeshError::Empty)?;
        if dim == 2 {
            for v in &mut vertices {
                v[2] = 0.0;
            }
        }
        Self::new(dim, vertices, elements)
    }

    pub fn load(path: &Path, format: MeshFormat) -> Result<Self, MeshError> {
        let text = std::fs::read_to_string(path).map_err(|source| MeshError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        match format {
            MeshFormat::Native => Self::parse_native(&text),
            MeshFormat::Gmsh => Self::parse_gmsh(&text),
        }
    }
}

fn parse_fields<T: std::str::FromStr>(line: usize, l: &str) -> Result<Vec<T>, MeshError> {
    l.split_whitespace()
        .map(|t| {
            t.parse::<T>().map_err(|_| MeshError::Parse {
                line,
                message: format!("cannot parse `{t}`"),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::SimplexRule;

    #[test]
    fn one_square() {
        let m = SimplicialMesh::structured_tri(1).unwrap();
        assert_eq!(m.num_elements(), 2);
        assert_eq!(m.num_facets(), 5);
        assert_eq!(m.facets().iter().filter(|f| !f.boundary).count(), 1);
    }

    #[test]
    fn zero_subdivisions_rejected() {
        assert!(matches!(
            SimplicialMesh::structured_tri(0),
            Err(MeshError::ZeroSubdivisions)
        ));
        assert!(matches!(
            SimplicialMesh::structured_tet(0),
            Err(MeshError::ZeroSubdivisions)
        ));
    }

    #[test]
    fn two_by_two_counts() {
        let m = SimplicialMesh::structured_tri(2).unwrap();
        assert_eq!(m.stats().num_elements, 8);
        for f in m.facets() {
            assert_eq!(f.elements.len(), if f.boundary { 1 } else { 2 });
        }
    }

    #[test]
    fn tri_diameter_by_brute_force() {
        let m = SimplicialMesh::structured_tri(4).unwrap();
        let mut h: f64 = 0.0;
        for e in m.elements() {
            for a in e {
                for b in e {
                    h = h.max(geom::norm(&geom::sub(&m.vertices()[*a], &m.vertices()[*b])));
                }
            }
        }
        assert!((h - 2f64.sqrt() / 4.0).abs() < 1e-15);
        assert!((m.stats().h - h).abs() < 1e-15);
        assert!((m.stats().quasi_uniformity - 1.0).abs() < 1e-14);
    }

    #[test]
    fn kuhn_cube() {
        let m = SimplicialMesh::structured_tet(1).unwrap();
        assert_eq!(m.num_elements(), 6);
        assert!((m.total_measure() - 1.0).abs() < 1e-14);
        let m = SimplicialMesh::structured_tet(2).unwrap();
        assert_eq!(m.stats().num_elements, 48);
        assert!((m.stats().quasi_uniformity - 1.0).abs() < 1e-14);
        let m = SimplicialMesh::structured_tet(3).unwrap();
        let area: f64 = m.facets().iter().filter(|f| f.boundary).map(|f| f.measure).sum();
        assert!((area - 6.0).abs() < 1e-12);
    }

    #[test]
    fn closed_surface_identity() {
        for m in [
            SimplicialMesh::structured_tri(3).unwrap(),
            SimplicialMesh::structured_tet(2).unwrap(),
        ] {
            for g in m.geometries() {
                let mut s = [0.0; 3];
                let mut total = 0.0;
                for (n, e) in g.normals.iter().zip(&g.facet_measures) {
                    geom::axpy(*e, n, &mut s);
                    total += e;
                }
                assert!(geom::norm(&s) < 1e-13 * total.max(1.0));
            }
        }
    }

    #[test]
    fn stored_normal_is_outward_for_lower_element() {
        let m = SimplicialMesh::structured_tet(2).unwrap();
        for (fid, f) in m.facets().iter().enumerate() {
            assert!((geom::norm(&f.normal) - 1.0).abs() < 1e-14);
            assert!(f.measure > 0.0);
            let k = f.elements[0];
            let local = m.element_facets(k).iter().position(|&x| x == fid).unwrap();
            let n = m.geometry(k).normals[local];
            assert!(geom::norm(&geom::sub(&n, &f.normal)) < 1e-14);
            if let Some(&other) = f.elements.get(1) {
                assert!(other > k);
                let local = m.element_facets(other).iter().position(|&x| x == fid).unwrap();
                let n2 = m.geometry(other).normals[local];
                assert!(geom::norm(&geom::add(&n2, &f.normal)) < 1e-14);
            }
        }
    }

    #[test]
    fn reference_triangle_geometry() {
        let g = ElementGeometry::from_vertices(
            2,
            &[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
        )
        .unwrap();
        assert!((g.centroid[0] - 1.0 / 3.0).abs() < 1e-16);
        assert!((g.centroid[1] - 1.0 / 3.0).abs() < 1e-16);
        assert!((g.measure - 0.5).abs() < 1e-16);
        // Degree-4 quadrature oracle for the second moment.
        let rule = SimplexRule::collapsed(2, 4);
        let m = 0.5
            * rule.mean(&g.vertices, |x| {
                let d = geom::sub(x, &g.centroid);
                geom::dot(&d, &d)
            });
        assert!((g.moment - m).abs() < 1e-15);
        assert!((g.moment - 1.0 / 18.0).abs() < 1e-15);
        assert!((g.c_k - 2.0 * 0.5 / m).abs() < 1e-12);
    }

    #[test]
    fn tetra_moment_matches_quadrature() {
        let verts = [
            [0.1, 0.0, 0.2],
            [1.3, 0.1, 0.0],
            [0.2, 0.9, 0.1],
            [0.3, 0.2, 1.1],
        ];
        let g = ElementGeometry::from_vertices(3, &verts).unwrap();
        let rule = SimplexRule::collapsed(3, 4);
        let m = g.measure
            * rule.mean(&verts, |x| {
                let d = geom::sub(x, &g.centroid);
                geom::dot(&d, &d)
            });
        assert!((g.moment - m).abs() < 1e-14 * m);
    }

    #[test]
    fn degenerate_rejected() {
        let r = ElementGeometry::from_vertices(
            2,
            &[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0]],
        );
        assert!(matches!(r, Err(MeshError::DegenerateElement { .. })));
    }

    #[test]
    fn native_round_trip() {
        let m = SimplicialMesh::structured_tri(1).unwrap();
        let back = SimplicialMesh::parse_native(&m.to_native_string()).unwrap();
        assert_eq!(back.elements(), m.elements());
        assert_eq!(back.vertices(), m.vertices());
        assert_eq!(back.facets(), m.facets());
    }

    #[test]
    fn validation_errors_are_distinct() {
        let dup = "2 4 3\n0 0\n1 0\n1 1\n0 1\n1 2 3\n1 3 4\n1 2 3\n";
        assert!(matches!(
            SimplicialMesh::parse_native(dup),
            Err(MeshError::DuplicateElement { index: 2, first: 0 })
        ));
        let inverted = "2 3 1\n0 0\n1 0\n0 1\n1 3 2\n";
        assert!(matches!(
            SimplicialMesh::parse_native(inverted),
            Err(MeshError::InvertedElement { .. })
        ));
        let disjoint = "2 6 2\n0 0\n1 0\n0 1\n5 5\n6 5\n5 6\n1 2 3\n4 5 6\n";
        assert!(matches!(
            SimplicialMesh::parse_native(disjoint),
            Err(MeshError::Disconnected { components: 2 })
        ));
        // Touching at a vertex only is still disconnected.
        let vertex_touch = "2 5 2\n0 0\n1 0\n0 1\n-1 0\n0 -1\n1 2 3\n1 4 5\n";
        assert!(matches!(
            SimplicialMesh::parse_native(vertex_touch),
            Err(MeshError::Disconnected { components: 2 })
        ));
    }

    #[test]
    fn gmsh_subset() {
        let text = "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n4\n1 0 0 0\n2 1 0 0\n3 0 1 0\n4 1 1 0\n$EndNodes\n$Elements\n2\n1 2 2 0 1 1 2 4\n2 2 2 0 1 1 4 3\n$EndElements\n";
        let m = SimplicialMesh::parse_gmsh(text).unwrap();
        let reference = SimplicialMesh::structured_tri(1).unwrap();
        assert_eq!(m.elements(), reference.elements());
        assert_eq!(m.facets(), reference.facets());

        let with_line = text.replace("2\n1 2 2 0 1 1 2 4", "3\n9 1 2 0 1 1 2\n1 2 2 0 1 1 2 4");
        assert!(matches!(
            SimplicialMesh::parse_gmsh(&with_line),
            Err(MeshError::UnsupportedCellType(1))
        ));
    }
}
