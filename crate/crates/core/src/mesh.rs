//! Structured simplicial meshes: uniform interval meshes in 1D and
//! diagonal-split square grids in 2D.

use std::collections::HashMap;
use std::io::{self, Write};

use crate::error::{Error, Result};

/// A point in the plane. Interval meshes leave the second coordinate at zero.
pub type Point = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FacetKind {
    Interior,
    Boundary,
}

/// A codimension-one face: a vertex in 1D, an edge in 2D.
#[derive(Debug, Clone)]
pub struct Facet {
    pub vertices: Vec<usize>,
    /// First entry is the element the normal points out of; the second is
    /// present only for interior facets.
    pub elements: [Option<usize>; 2],
    /// Local facet number within each adjacent element.
    pub local_index: [usize; 2],
    /// Outward unit normal of `elements[0]`. The neighbour sees the negation.
    pub normal: Point,
    /// Length of the edge (1 for point facets).
    pub measure: f64,
    pub kind: FacetKind,
}

impl Facet {
    pub fn is_interior(&self) -> bool {
        self.kind == FacetKind::Interior
    }

    /// The owner element (always present).
    pub fn first(&self) -> usize {
        self.elements[0].expect("facet without owner element")
    }
}

#[derive(Debug, Clone)]
pub struct Mesh {
    dim: usize,
    vertices: Vec<Point>,
    elements: Vec<usize>,
    facets: Vec<Facet>,
    element_facets: Vec<usize>,
    element_diameters: Vec<f64>,
    domain_measure: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshMetrics {
    pub h_max: f64,
    pub h_min: f64,
    pub ratio: f64,
    /// Number of vertices, i.e. the dof count of a continuous P1 space.
    pub n_dof_hint: usize,
}

impl Mesh {
    /// Uniform mesh of `[a, b]` with `n_cells` elements.
    pub fn interval(n_cells: usize, a: f64, b: f64) -> Result<Self> {
        if n_cells == 0 {
            return Err(Error::InvalidMesh("interval mesh needs at least one cell".into()));
        }
        if !(a < b) {
            return Err(Error::InvalidMesh(format!("empty interval [{a}, {b}]")));
        }
        let h = (b - a) / n_cells as f64;
        let vertices: Vec<Point> = (0..=n_cells)
            .map(|i| {
                let x = if i == n_cells { b } else { a + h * i as f64 };
                [x, 0.0]
            })
            .collect();
        let elements: Vec<usize> = (0..n_cells).flat_map(|e| [e, e + 1]).collect();
        Ok(Self::from_cells(1, vertices, elements, b - a))
    }

    /// `n x n` grid of squares on `[ax, bx] x [ay, by]`, each square split along
    /// the diagonal from its lower-left to its upper-right corner.
    pub fn unit_square_triangulation(n: usize, x_range: [f64; 2], y_range: [f64; 2]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidMesh("triangulation needs n >= 1".into()));
        }
        let [ax, bx] = x_range;
        let [ay, by] = y_range;
        if !(ax < bx && ay < by) {
            return Err(Error::InvalidMesh("empty rectangle".into()));
        }
        let hx = (bx - ax) / n as f64;
        let hy = (by - ay) / n as f64;
        let coord = |i: usize, lo: f64, hi: f64, h: f64| if i == n { hi } else { lo + h * i as f64 };
        let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
        for j in 0..=n {
            for i in 0..=n {
                vertices.push([coord(i, ax, bx, hx), coord(j, ay, by, hy)]);
            }
        }
        let id = |i: usize, j: usize| j * (n + 1) + i;
        let mut elements = Vec::with_capacity(6 * n * n);
        for j in 0..n {
            for i in 0..n {
                let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
                elements.extend_from_slice(&[a, b, c, a, c, d]);
            }
        }
        Ok(Self::from_cells(2, vertices, elements, (bx - ax) * (by - ay)))
    }

    fn from_cells(dim: usize, vertices: Vec<Point>, elements: Vec<usize>, domain_measure: f64) -> Self {
        let nv = dim + 1;
        let n_el = elements.len() / nv;
        let mut facets: Vec<Facet> = Vec::new();
        let mut element_facets = vec![usize::MAX; n_el * nv];
        let mut lookup: HashMap<Vec<usize>, usize> = HashMap::new();
        let mut element_diameters = Vec::with_capacity(n_el);

        for e in 0..n_el {
            let cell = &elements[e * nv..(e + 1) * nv];
            element_diameters.push(cell_diameter(dim, cell, &vertices));
            for f in 0..nv {
                let fv = local_facet_vertices(dim, cell, f);
                let mut key = fv.clone();
                key.sort_unstable();
                if let Some(&idx) = lookup.get(&key) {
                    let facet = &mut facets[idx];
                    facet.elements[1] = Some(e);
                    facet.local_index[1] = f;
                    facet.kind = FacetKind::Interior;
                    element_facets[e * nv + f] = idx;
                } else {
                    let (normal, measure) = outward_normal(dim, cell, f, &vertices);
                    let idx = facets.len();
                    facets.push(Facet {
                        vertices: fv,
                        elements: [Some(e), None],
                        local_index: [f, 0],
                        normal,
                        measure,
                        kind: FacetKind::Boundary,
                    });
                    lookup.insert(key, idx);
                    element_facets[e * nv + f] = idx;
                }
            }
        }

        Self {
            dim,
            vertices,
            elements,
            facets,
            element_facets,
            element_diameters,
            domain_measure,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_elements(&self) -> usize {
        self.elements.len() / (self.dim + 1)
    }

    /// Vertex indices of element `e`, counterclockwise for triangles.
    pub fn element(&self, e: usize) -> &[usize] {
        let nv = self.dim + 1;
        &self.elements[e * nv..(e + 1) * nv]
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    /// Global facet index of local facet `f` of element `e`.
    pub fn element_facet(&self, e: usize, f: usize) -> usize {
        self.element_facets[e * (self.dim + 1) + f]
    }

    pub fn element_diameters(&self) -> &[f64] {
        &self.element_diameters
    }

    pub fn domain_measure(&self) -> f64 {
        self.domain_measure
    }

    /// Signed measure: length in 1D, signed area in 2D.
    pub fn element_measure(&self, e: usize) -> f64 {
        let c = self.element(e);
        let v = &self.vertices;
        match self.dim {
            1 => v[c[1]][0] - v[c[0]][0],
            _ => {
                let (a, b, d) = (v[c[0]], v[c[1]], v[c[2]]);
                0.5 * ((b[0] - a[0]) * (d[1] - a[1]) - (d[0] - a[0]) * (b[1] - a[1]))
            }
        }
    }

    pub fn boundary_facets(&self) -> impl Iterator<Item = &Facet> {
        self.facets.iter().filter(|f| !f.is_interior())
    }

    pub fn interior_facets(&self) -> impl Iterator<Item = &Facet> {
        self.facets.iter().filter(|f| f.is_interior())
    }

    pub fn metrics(&self) -> MeshMetrics {
        let h_max = self.element_diameters.iter().copied().fold(0.0, f64::max);
        let h_min = self.element_diameters.iter().copied().fold(f64::INFINITY, f64::min);
        MeshMetrics {
            h_max,
            h_min,
            ratio: h_max / h_min,
            n_dof_hint: self.vertices.len(),
        }
    }

    /// Debug dump: vertex count, vertices, element count, elements.
    pub fn write_dump<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{}", self.vertices.len())?;
        for p in &self.vertices {
            match self.dim {
                1 => writeln!(w, "{:.17e}", p[0])?,
                _ => writeln!(w, "{:.17e} {:.17e}", p[0], p[1])?,
            }
        }
        writeln!(w, "{}", self.n_elements())?;
        for e in 0..self.n_elements() {
            let line: Vec<String> = self.element(e).iter().map(|v| v.to_string()).collect();
            writeln!(w, "{}", line.join(" "))?;
        }
        Ok(())
    }
}

/// Vertices of local facet `f`: for triangles edge `(v_f, v_{f+1})`, for
/// intervals the single vertex `v_f`.
fn local_facet_vertices(dim: usize, cell: &[usize], f: usize) -> Vec<usize> {
    match dim {
        1 => vec![cell[f]],
        _ => vec![cell[f], cell[(f + 1) % 3]],
    }
}

fn outward_normal(dim: usize, cell: &[usize], f: usize, v: &[Point]) -> (Point, f64) {
    match dim {
        1 => (if f == 0 { [-1.0, 0.0] } else { [1.0, 0.0] }, 1.0),
        _ => {
            let a = v[cell[f]];
            let b = v[cell[(f + 1) % 3]];
            let (tx, ty) = (b[0] - a[0], b[1] - a[1]);
            let len = tx.hypot(ty);
            // counterclockwise traversal: the outward side is on the right
            ([ty / len, -tx / len], len)
        }
    }
}

fn cell_diameter(dim: usize, cell: &[usize], v: &[Point]) -> f64 {
    match dim {
        1 => (v[cell[1]][0] - v[cell[0]][0]).abs(),
        _ => {
            let d = |i: usize, j: usize| {
                let (p, q) = (v[cell[i]], v[cell[j]]);
                (p[0] - q[0]).hypot(p[1] - q[1])
            };
            d(0, 1).max(d(1, 2)).max(d(2, 0))
        }
    }
}
