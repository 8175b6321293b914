//! Conforming Lagrange finite element spaces and the element machinery shared
//! with the interior penalty discretization.

use std::sync::Arc;

use rayon::prelude::*;

use crate::discretization::{NonlinearTerms, SpatialDiscretization};
use crate::error::{Error, Result};
use crate::mesh::{Mesh, Point};
use crate::polybasis::{simplex_quadrature, ElementFamily, SpatialBasis};
use crate::sparse::{SparseMatrix, SparsityPattern};

pub use crate::sparse::apply_dirichlet;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Continuity {
    Continuous,
    Discontinuous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryCondition {
    /// Homogeneous Dirichlet data imposed strongly.
    Dirichlet0,
    /// Homogeneous Neumann data (natural).
    Neumann0,
}

/// Affine map `x = origin + J xhat` of one element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementGeometry {
    pub origin: Point,
    pub jac: [[f64; 2]; 2],
    pub inv: [[f64; 2]; 2],
    pub det: f64,
}

impl ElementGeometry {
    fn new(mesh: &Mesh, e: usize) -> Self {
        let c = mesh.element(e);
        let v = mesh.vertices();
        let origin = v[c[0]];
        let jac = match mesh.dim() {
            1 => [[v[c[1]][0] - origin[0], 0.0], [0.0, 1.0]],
            _ => [
                [v[c[1]][0] - origin[0], v[c[2]][0] - origin[0]],
                [v[c[1]][1] - origin[1], v[c[2]][1] - origin[1]],
            ],
        };
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        let inv = [[jac[1][1] / det, -jac[0][1] / det], [-jac[1][0] / det, jac[0][0] / det]];
        Self { origin, jac, inv, det }
    }

    pub fn to_physical(&self, xh: Point) -> Point {
        [
            self.origin[0] + self.jac[0][0] * xh[0] + self.jac[0][1] * xh[1],
            self.origin[1] + self.jac[1][0] * xh[0] + self.jac[1][1] * xh[1],
        ]
    }

    pub fn to_reference(&self, x: Point) -> Point {
        let d = [x[0] - self.origin[0], x[1] - self.origin[1]];
        [
            self.inv[0][0] * d[0] + self.inv[0][1] * d[1],
            self.inv[1][0] * d[0] + self.inv[1][1] * d[1],
        ]
    }

    /// Physical gradient `J^{-T} ghat`.
    #[inline]
    pub fn grad(&self, g: Point) -> Point {
        [
            self.inv[0][0] * g[0] + self.inv[1][0] * g[1],
            self.inv[0][1] * g[0] + self.inv[1][1] * g[1],
        ]
    }

    pub fn abs_det(&self) -> f64 {
        self.det.abs()
    }
}

/// Reference shape values and gradients at the points of a quadrature rule.
#[derive(Debug, Clone)]
pub struct Tabulation {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
    pub nloc: usize,
    pub values: Vec<f64>,
    pub ref_grads: Vec<Point>,
}

impl Tabulation {
    pub fn new(basis: &SpatialBasis, degree: usize) -> Result<Self> {
        let rule = simplex_quadrature(basis.family(), degree)?;
        let nloc = basis.len();
        let mut values = vec![0.0; rule.len() * nloc];
        let mut ref_grads = vec![[0.0; 2]; rule.len() * nloc];
        for (q, &x) in rule.points.iter().enumerate() {
            basis.eval(x, &mut values[q * nloc..(q + 1) * nloc]);
            basis.eval_grad(x, &mut ref_grads[q * nloc..(q + 1) * nloc]);
        }
        Ok(Self {
            points: rule.points,
            weights: rule.weights,
            nloc,
            values,
            ref_grads,
        })
    }

    pub fn n_points(&self) -> usize {
        self.weights.len()
    }

    #[inline]
    pub fn values_at(&self, q: usize) -> &[f64] {
        &self.values[q * self.nloc..(q + 1) * self.nloc]
    }

    #[inline]
    pub fn grads_at(&self, q: usize) -> &[Point] {
        &self.ref_grads[q * self.nloc..(q + 1) * self.nloc]
    }
}

/// Integrand of a pointwise nonlinear form
/// `int F(u, grad u) v + G(u) . grad v` and the derivatives needed for its
/// Jacobian.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PointTerms {
    pub f: f64,
    pub df_du: f64,
    pub df_dgrad: Point,
    pub g: Point,
    pub dg_du: Point,
}

#[derive(Debug, Clone)]
pub struct FunctionSpace {
    mesh: Arc<Mesh>,
    basis: SpatialBasis,
    continuity: Continuity,
    element_dofs: Vec<usize>,
    n_dof: usize,
    dof_coords: Vec<Point>,
    boundary_dofs: Vec<usize>,
    geometry: Vec<ElementGeometry>,
    pattern: Arc<SparsityPattern>,
}

impl FunctionSpace {
    pub fn continuous(mesh: Arc<Mesh>, degree: usize) -> Result<Self> {
        Self::new(mesh, degree, Continuity::Continuous)
    }

    pub fn discontinuous(mesh: Arc<Mesh>, degree: usize) -> Result<Self> {
        Self::new(mesh, degree, Continuity::Discontinuous)
    }

    pub fn new(mesh: Arc<Mesh>, degree: usize, continuity: Continuity) -> Result<Self> {
        let family = ElementFamily::for_dim(mesh.dim());
        let basis = SpatialBasis::new(family, degree)?;
        let nloc = basis.len();
        let n_el = mesh.n_elements();
        let geometry: Vec<ElementGeometry> = (0..n_el).map(|e| ElementGeometry::new(&mesh, e)).collect();

        let (element_dofs, n_dof) = match continuity {
            Continuity::Discontinuous => ((0..n_el * nloc).collect(), n_el * nloc),
            Continuity::Continuous => continuous_numbering(&mesh, &basis),
        };

        let mut dof_coords = vec![[0.0; 2]; n_dof];
        for e in 0..n_el {
            for (a, &xh) in basis.nodes().iter().enumerate() {
                dof_coords[element_dofs[e * nloc + a]] = geometry[e].to_physical(xh);
            }
        }

        let mut boundary_dofs = Vec::new();
        for f in mesh.boundary_facets() {
            let e = f.first();
            for a in facet_local_nodes(&basis, f.local_index[0]) {
                boundary_dofs.push(element_dofs[e * nloc + a]);
            }
        }
        boundary_dofs.sort_unstable();
        boundary_dofs.dedup();

        let mut cliques: Vec<Vec<usize>> = (0..n_el).map(|e| element_dofs[e * nloc..(e + 1) * nloc].to_vec()).collect();
        if continuity == Continuity::Discontinuous {
            for f in mesh.interior_facets() {
                let (a, b) = (f.first(), f.elements[1].expect("interior facet"));
                let mut c = element_dofs[a * nloc..(a + 1) * nloc].to_vec();
                c.extend_from_slice(&element_dofs[b * nloc..(b + 1) * nloc]);
                cliques.push(c);
            }
        }
        let pattern = Arc::new(SparsityPattern::from_cliques(n_dof, cliques.iter().map(|c| c.as_slice())));

        Ok(Self {
            mesh,
            basis,
            continuity,
            element_dofs,
            n_dof,
            dof_coords,
            boundary_dofs,
            geometry,
            pattern,
        })
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn basis(&self) -> &SpatialBasis {
        &self.basis
    }

    pub fn degree(&self) -> usize {
        self.basis.degree()
    }

    pub fn continuity(&self) -> Continuity {
        self.continuity
    }

    pub fn n_dof(&self) -> usize {
        self.n_dof
    }

    pub fn n_local(&self) -> usize {
        self.basis.len()
    }

    pub fn element_dofs(&self, e: usize) -> &[usize] {
        let n = self.basis.len();
        &self.element_dofs[e * n..(e + 1) * n]
    }

    pub fn geometry(&self, e: usize) -> &ElementGeometry {
        &self.geometry[e]
    }

    pub fn dof_coords(&self) -> &[Point] {
        &self.dof_coords
    }

    pub fn boundary_dofs(&self) -> &[usize] {
        &self.boundary_dofs
    }

    pub fn pattern(&self) -> &Arc<SparsityPattern> {
        &self.pattern
    }

    pub fn tabulate(&self, degree: usize) -> Tabulation {
        Tabulation::new(&self.basis, degree).expect("quadrature degree within supported range")
    }

    /// Degree used for error norms and load vectors.
    pub fn error_quadrature_degree(&self) -> usize {
        2 * self.degree() + 2
    }

    fn assemble_bilinear(&self, degree: usize, local: impl Fn(&ElementGeometry, &Tabulation, &mut [f64]) + Sync) -> SparseMatrix {
        let tab = self.tabulate(degree);
        let nloc = self.n_local();
        let locals: Vec<Vec<f64>> = (0..self.mesh.n_elements())
            .into_par_iter()
            .map(|e| {
                let mut m = vec![0.0; nloc * nloc];
                local(&self.geometry[e], &tab, &mut m);
                m
            })
            .collect();
        let mut a = SparseMatrix::zeros(self.pattern.clone());
        for (e, m) in locals.iter().enumerate() {
            a.add_local(self.element_dofs(e), m);
        }
        a
    }

    /// Mass matrix `(N_j, N_i)`.
    pub fn assemble_mass(&self) -> SparseMatrix {
        let nloc = self.n_local();
        self.assemble_bilinear(2 * self.degree(), |g, tab, m| {
            for q in 0..tab.n_points() {
                let w = tab.weights[q] * g.abs_det();
                let v = tab.values_at(q);
                for a in 0..nloc {
                    for b in 0..nloc {
                        m[a * nloc + b] += w * v[a] * v[b];
                    }
                }
            }
        })
    }

    /// Stiffness matrix `(grad N_j, grad N_i)`, broken over elements for
    /// discontinuous spaces.
    pub fn assemble_stiffness(&self) -> SparseMatrix {
        let nloc = self.n_local();
        let deg = (2 * self.degree()).saturating_sub(2).max(1);
        self.assemble_bilinear(deg, |g, tab, m| {
            let mut grads = vec![[0.0; 2]; nloc];
            for q in 0..tab.n_points() {
                let w = tab.weights[q] * g.abs_det();
                for (gr, rg) in grads.iter_mut().zip(tab.grads_at(q)) {
                    *gr = g.grad(*rg);
                }
                for a in 0..nloc {
                    for b in 0..nloc {
                        m[a * nloc + b] += w * (grads[a][0] * grads[b][0] + grads[a][1] * grads[b][1]);
                    }
                }
            }
        })
    }

    /// Assembles `r_i = int F(u, grad u) N_i + G(u) . grad N_i` and its
    /// Jacobian for `u = sum coeffs_j N_j`.
    pub fn assemble_pointwise<K>(&self, coeffs: &[f64], degree: usize, kernel: K) -> (Vec<f64>, SparseMatrix)
    where
        K: Fn(f64, Point) -> PointTerms + Sync,
    {
        assert_eq!(coeffs.len(), self.n_dof, "coefficient vector length");
        let tab = self.tabulate(degree);
        let nloc = self.n_local();
        let locals: Vec<(Vec<f64>, Vec<f64>)> = (0..self.mesh.n_elements())
            .into_par_iter()
            .map(|e| {
                let geo = &self.geometry[e];
                let dofs = self.element_dofs(e);
                let mut res = vec![0.0; nloc];
                let mut jac = vec![0.0; nloc * nloc];
                let mut grads = vec![[0.0; 2]; nloc];
                for q in 0..tab.n_points() {
                    let w = tab.weights[q] * geo.abs_det();
                    let v = tab.values_at(q);
                    for (gr, rg) in grads.iter_mut().zip(tab.grads_at(q)) {
                        *gr = geo.grad(*rg);
                    }
                    let mut u = 0.0;
                    let mut gu = [0.0; 2];
                    for a in 0..nloc {
                        let c = coeffs[dofs[a]];
                        u += c * v[a];
                        gu[0] += c * grads[a][0];
                        gu[1] += c * grads[a][1];
                    }
                    let t = kernel(u, gu);
                    for a in 0..nloc {
                        res[a] += w * (t.f * v[a] + t.g[0] * grads[a][0] + t.g[1] * grads[a][1]);
                        let ga = t.dg_du[0] * grads[a][0] + t.dg_du[1] * grads[a][1];
                        for b in 0..nloc {
                            let dfb = t.df_du * v[b] + t.df_dgrad[0] * grads[b][0] + t.df_dgrad[1] * grads[b][1];
                            jac[a * nloc + b] += w * (dfb * v[a] + ga * v[b]);
                        }
                    }
                }
                (res, jac)
            })
            .collect();
        let mut residual = vec![0.0; self.n_dof];
        let mut jacobian = SparseMatrix::zeros(self.pattern.clone());
        for (e, (res, jac)) in locals.iter().enumerate() {
            let dofs = self.element_dofs(e);
            for (a, &i) in dofs.iter().enumerate() {
                residual[i] += res[a];
            }
            jacobian.add_local(dofs, jac);
        }
        (residual, jacobian)
    }

    /// `int u^delta (sum_i du/dx_i) N_i` and its Jacobian.
    pub fn advection_residual(&self, coeffs: &[f64], delta: u32) -> Result<(Vec<f64>, SparseMatrix)> {
        if delta < 1 {
            return Err(Error::InvalidArgument("advection power delta must be >= 1".into()));
        }
        let r = self.degree();
        let degree = (delta as usize + 1) * r + (r - 1);
        Ok(self.assemble_pointwise(coeffs, degree, |u, g| advection_terms(u, g, delta, self.mesh.dim())))
    }

    /// `int c(u) N_i` with `c(u) = u (1 - u^delta)(u^delta - gamma)` and its Jacobian.
    pub fn reaction_residual(&self, coeffs: &[f64], delta: u32, gamma: f64) -> Result<(Vec<f64>, SparseMatrix)> {
        if delta < 1 {
            return Err(Error::InvalidArgument("reaction power delta must be >= 1".into()));
        }
        let degree = (2 * delta as usize + 2) * self.degree();
        Ok(self.assemble_pointwise(coeffs, degree, |u, _| {
            let (c, dc) = reaction(u, delta, gamma);
            PointTerms {
                f: c,
                df_du: dc,
                ..Default::default()
            }
        }))
    }

    /// `int f N_i`.
    pub fn load_vector(&self, f: &(dyn Fn(Point) -> f64 + Sync)) -> Vec<f64> {
        let tab = self.tabulate(self.error_quadrature_degree());
        let nloc = self.n_local();
        let locals: Vec<Vec<f64>> = (0..self.mesh.n_elements())
            .into_par_iter()
            .map(|e| {
                let geo = &self.geometry[e];
                let mut b = vec![0.0; nloc];
                for q in 0..tab.n_points() {
                    let w = tab.weights[q] * geo.abs_det() * f(geo.to_physical(tab.points[q]));
                    for (ba, va) in b.iter_mut().zip(tab.values_at(q)) {
                        *ba += w * va;
                    }
                }
                b
            })
            .collect();
        let mut out = vec![0.0; self.n_dof];
        for (e, b) in locals.iter().enumerate() {
            for (a, &i) in self.element_dofs(e).iter().enumerate() {
                out[i] += b[a];
            }
        }
        out
    }

    /// Nodal interpolation.
    pub fn interpolate(&self, f: &dyn Fn(Point) -> f64) -> Vec<f64> {
        self.dof_coords.iter().map(|&x| f(x)).collect()
    }

    /// Value and physical gradient of the discrete function at a reference
    /// point of element `e`.
    pub fn evaluate(&self, coeffs: &[f64], e: usize, xh: Point) -> (f64, Point) {
        let v = self.basis.values(xh);
        let g = self.basis.grads(xh);
        let geo = &self.geometry[e];
        let mut u = 0.0;
        let mut gu = [0.0; 2];
        for (a, &i) in self.element_dofs(e).iter().enumerate() {
            u += coeffs[i] * v[a];
            let gp = geo.grad(g[a]);
            gu[0] += coeffs[i] * gp[0];
            gu[1] += coeffs[i] * gp[1];
        }
        (u, gu)
    }

    /// `sum_K int_K integrand(x, u_h, grad u_h)` with the error quadrature.
    pub fn integrate_with(&self, coeffs: &[f64], integrand: &(dyn Fn(Point, f64, Point) -> f64 + Sync)) -> f64 {
        let tab = self.tabulate(self.error_quadrature_degree());
        let nloc = self.n_local();
        let parts: Vec<f64> = (0..self.mesh.n_elements())
            .into_par_iter()
            .map(|e| {
                let geo = &self.geometry[e];
                let dofs = self.element_dofs(e);
                let mut s = 0.0;
                for q in 0..tab.n_points() {
                    let v = tab.values_at(q);
                    let gr = tab.grads_at(q);
                    let mut u = 0.0;
                    let mut gu = [0.0; 2];
                    for a in 0..nloc {
                        let c = coeffs[dofs[a]];
                        u += c * v[a];
                        let gp = geo.grad(gr[a]);
                        gu[0] += c * gp[0];
                        gu[1] += c * gp[1];
                    }
                    s += tab.weights[q] * geo.abs_det() * integrand(geo.to_physical(tab.points[q]), u, gu);
                }
                s
            })
            .collect();
        parts.iter().sum()
    }

    pub fn l2_error(&self, coeffs: &[f64], exact: &(dyn Fn(Point) -> f64 + Sync)) -> f64 {
        self.integrate_with(coeffs, &|x, u, _| (u - exact(x)).powi(2)).sqrt()
    }

    pub fn h1_seminorm_error(&self, coeffs: &[f64], grad: &(dyn Fn(Point) -> Point + Sync)) -> f64 {
        self.integrate_with(coeffs, &|x, _, g| {
            let e = grad(x);
            (g[0] - e[0]).powi(2) + (g[1] - e[1]).powi(2)
        })
        .sqrt()
    }

    pub fn l2_norm(&self, coeffs: &[f64]) -> f64 {
        self.integrate_with(coeffs, &|_, u, _| u * u).sqrt()
    }
}

/// Pointwise terms of `u^delta (sum_i du/dx_i)`.
pub fn advection_terms(u: f64, g: Point, delta: u32, dim: usize) -> PointTerms {
    let ones = if dim == 1 { [1.0, 0.0] } else { [1.0, 1.0] };
    let s = g[0] * ones[0] + g[1] * ones[1];
    let ud = u.powi(delta as i32);
    let dud = delta as f64 * u.powi(delta as i32 - 1);
    PointTerms {
        f: ud * s,
        df_du: dud * s,
        df_dgrad: [ud * ones[0], ud * ones[1]],
        ..Default::default()
    }
}

/// `c(u) = u (1 - u^delta)(u^delta - gamma)` and `c'(u)`.
pub fn reaction(u: f64, delta: u32, gamma: f64) -> (f64, f64) {
    let d = delta as i32;
    let ud = u.powi(d);
    let c = u * (1.0 - ud) * (ud - gamma);
    let dc = (1.0 + delta as f64) * (1.0 + gamma) * ud - (2.0 * delta as f64 + 1.0) * ud * ud - gamma;
    (c, dc)
}

/// Local node indices lying on local facet `f`.
pub(crate) fn facet_local_nodes(basis: &SpatialBasis, f: usize) -> Vec<usize> {
    match basis.family() {
        ElementFamily::Interval => vec![f],
        ElementFamily::Triangle => {
            let k = basis.nodes_per_facet_interior();
            let mut v = vec![f, (f + 1) % 3];
            v.extend(3 + f * k..3 + (f + 1) * k);
            v
        }
    }
}

fn continuous_numbering(mesh: &Mesh, basis: &SpatialBasis) -> (Vec<usize>, usize) {
    let nloc = basis.len();
    let nv = mesh.n_vertices();
    let r = basis.degree();
    let k = basis.nodes_per_facet_interior();
    let n_el = mesh.n_elements();
    let n_vert_local = basis.n_vertices();
    let n_int = nloc - n_vert_local - n_vert_local.min(3) * k * usize::from(basis.family() == ElementFamily::Triangle);
    let facet_base = nv;
    let interior_base = facet_base + mesh.facets().len() * k;
    let mut dofs = vec![0; n_el * nloc];
    for e in 0..n_el {
        let cell = mesh.element(e);
        let out = &mut dofs[e * nloc..(e + 1) * nloc];
        for (a, &v) in cell.iter().enumerate() {
            out[a] = v;
        }
        if basis.family() == ElementFamily::Triangle {
            for f in 0..3 {
                let (va, vb) = (cell[f], cell[(f + 1) % 3]);
                let gf = mesh.element_facet(e, f);
                for i in 1..r {
                    let pos = if va < vb { i - 1 } else { r - 1 - i };
                    out[3 + f * k + (i - 1)] = facet_base + gf * k + pos;
                }
            }
        }
        for i in 0..n_int {
            out[nloc - n_int + i] = interior_base + e * n_int + i;
        }
    }
    (dofs, interior_base + n_el * n_int)
}

/// Conforming discretization with strong homogeneous Dirichlet or natural
/// Neumann boundary conditions.
#[derive(Debug, Clone)]
pub struct ConformingScheme {
    space: FunctionSpace,
    constrained: Vec<usize>,
}

impl ConformingScheme {
    pub fn new(space: FunctionSpace, bc: BoundaryCondition) -> Result<Self> {
        if space.continuity() != Continuity::Continuous {
            return Err(Error::InvalidArgument("conforming scheme needs a continuous space".into()));
        }
        let constrained = match bc {
            BoundaryCondition::Dirichlet0 => space.boundary_dofs().to_vec(),
            BoundaryCondition::Neumann0 => Vec::new(),
        };
        Ok(Self { space, constrained })
    }
}

impl SpatialDiscretization for ConformingScheme {
    fn space(&self) -> &FunctionSpace {
        &self.space
    }

    fn diffusion(&self) -> SparseMatrix {
        self.space.assemble_stiffness()
    }

    fn nonlinear(&self, coeffs: &[f64], t: &NonlinearTerms) -> (Vec<f64>, SparseMatrix) {
        let r = self.space.degree();
        let d = t.delta as usize;
        let degree = ((d + 1) * r + r - 1).max((2 * d + 2) * r);
        let dim = self.space.mesh().dim();
        self.space.assemble_pointwise(coeffs, degree, |u, g| {
            let a = advection_terms(u, g, t.delta, dim);
            let (c, dc) = reaction(u, t.delta, t.gamma);
            PointTerms {
                f: t.alpha * a.f - t.beta * c,
                df_du: t.alpha * a.df_du - t.beta * dc,
                df_dgrad: [t.alpha * a.df_dgrad[0], t.alpha * a.df_dgrad[1]],
                ..Default::default()
            }
        })
    }

    fn constrained_dofs(&self) -> &[usize] {
        &self.constrained
    }

    fn energy_norm_sq(&self, coeffs: &[f64]) -> f64 {
        self.space.integrate_with(coeffs, &|_, _, g| g[0] * g[0] + g[1] * g[1])
    }

    fn energy_error_sq(&self, coeffs: &[f64], grad: &(dyn Fn(Point) -> Point + Sync)) -> f64 {
        self.space.integrate_with(coeffs, &|x, _, g| {
            let e = grad(x);
            (g[0] - e[0]).powi(2) + (g[1] - e[1]).powi(2)
        })
    }
}
