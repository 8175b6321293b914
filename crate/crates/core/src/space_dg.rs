//! Symmetric interior penalty DG in space with a skew-symmetrized upwind
//! convection form.

use std::sync::Arc;

use rayon::prelude::*;

use crate::discretization::{NonlinearTerms, SpatialDiscretization};
use crate::error::{Error, Result};
use crate::mesh::{Mesh, Point};
use crate::polybasis::gauss_legendre;
use crate::space_fem::{reaction, Continuity, FunctionSpace, PointTerms};
use crate::sparse::SparseMatrix;

/// Default penalty base multiplying `r_E^2 / h_E`.
pub const DEFAULT_PENALTY: f64 = 10.0;

/// Quadrature on one facet with basis data traced from each adjacent element.
struct FacetQuad {
    weights: Vec<f64>,
    nloc: usize,
    values: [Vec<f64>; 2],
    grads: [Vec<Point>; 2],
}

impl FacetQuad {
    fn n_points(&self) -> usize {
        self.weights.len()
    }

    fn values(&self, side: usize, q: usize) -> &[f64] {
        &self.values[side][q * self.nloc..(q + 1) * self.nloc]
    }

    fn grads(&self, side: usize, q: usize) -> &[Point] {
        &self.grads[side][q * self.nloc..(q + 1) * self.nloc]
    }
}

#[derive(Debug, Clone)]
pub struct DgSpace {
    space: FunctionSpace,
    sigma0: f64,
    facet_degree: Vec<usize>,
    facet_h: Vec<f64>,
}

impl DgSpace {
    pub fn new(mesh: Arc<Mesh>, degree: usize, sigma0: f64) -> Result<Self> {
        if !(sigma0 > 0.0) {
            return Err(Error::InvalidArgument(format!("penalty must be positive, got {sigma0}")));
        }
        let space = FunctionSpace::discontinuous(mesh.clone(), degree)?;
        let diam = mesh.element_diameters();
        let (facet_degree, facet_h) = mesh
            .facets()
            .iter()
            .map(|f| {
                let h = f.elements.iter().flatten().map(|&e| diam[e]).fold(0.0, f64::max);
                (degree, h)
            })
            .unzip();
        Ok(Self {
            space,
            sigma0,
            facet_degree,
            facet_h,
        })
    }

    pub fn with_default_penalty(mesh: Arc<Mesh>, degree: usize) -> Result<Self> {
        Self::new(mesh, degree, DEFAULT_PENALTY)
    }

    pub fn function_space(&self) -> &FunctionSpace {
        &self.space
    }

    pub fn sigma0(&self) -> f64 {
        self.sigma0
    }

    pub fn facet_degree(&self, f: usize) -> usize {
        self.facet_degree[f]
    }

    pub fn facet_diameter(&self, f: usize) -> f64 {
        self.facet_h[f]
    }

    /// `sigma0 r_E^2 / h_E`.
    pub fn penalty(&self, f: usize) -> f64 {
        let r = self.facet_degree[f].max(1) as f64;
        self.sigma0 * r * r / self.facet_h[f]
    }

    fn facet_quad(&self, f: usize, degree: usize) -> FacetQuad {
        let mesh = self.space.mesh();
        let facet = &mesh.facets()[f];
        let (points, weights): (Vec<Point>, Vec<f64>) = if mesh.dim() == 1 {
            (vec![mesh.vertices()[facet.vertices[0]]], vec![1.0])
        } else {
            let a = mesh.vertices()[facet.vertices[0]];
            let b = mesh.vertices()[facet.vertices[1]];
            let rule = gauss_legendre(degree / 2 + 1).mapped_to(0.0, 1.0);
            rule.points
                .iter()
                .zip(&rule.weights)
                .map(|(p, w)| {
                    let t = p[0];
                    ([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])], w * facet.measure)
                })
                .unzip()
        };
        let basis = self.space.basis();
        let nloc = basis.len();
        let nq = points.len();
        let mut values = [Vec::new(), Vec::new()];
        let mut grads = [Vec::new(), Vec::new()];
        for (side, e) in facet.elements.iter().enumerate() {
            let Some(e) = *e else { continue };
            let geo = self.space.geometry(e);
            let mut v = vec![0.0; nq * nloc];
            let mut g = vec![[0.0; 2]; nq * nloc];
            for (q, &x) in points.iter().enumerate() {
                let xh = geo.to_reference(x);
                basis.eval(xh, &mut v[q * nloc..(q + 1) * nloc]);
                basis.eval_grad(xh, &mut g[q * nloc..(q + 1) * nloc]);
                for gr in &mut g[q * nloc..(q + 1) * nloc] {
                    *gr = geo.grad(*gr);
                }
            }
            values[side] = v;
            grads[side] = g;
        }
        FacetQuad {
            weights,
            nloc,
            values,
            grads,
        }
    }

    /// Global dofs of the elements adjacent to facet `f`, side 0 first.
    fn facet_dofs(&self, f: usize) -> Vec<usize> {
        let facet = &self.space.mesh().facets()[f];
        facet
            .elements
            .iter()
            .flatten()
            .flat_map(|&e| self.space.element_dofs(e).iter().copied())
            .collect()
    }

    fn side_trace(&self, coeffs: &[f64], f: usize, fq: &FacetQuad, side: usize, q: usize) -> f64 {
        let e = self.space.mesh().facets()[f].elements[side].expect("facet side");
        self.space
            .element_dofs(e)
            .iter()
            .zip(fq.values(side, q))
            .map(|(&i, v)| coeffs[i] * v)
            .sum()
    }

    /// Matrix of the SIP form `a_DG`.
    pub fn assemble_a_dg(&self) -> SparseMatrix {
        let mut a = self.space.assemble_stiffness();
        let r = self.space.degree();
        let n_f = self.space.mesh().facets().len();
        let locals: Vec<(Vec<usize>, Vec<f64>)> = (0..n_f)
            .into_par_iter()
            .map(|f| {
                let facet = &self.space.mesh().facets()[f];
                let fq = self.facet_quad(f, 2 * r);
                let sides = if facet.is_interior() { 2 } else { 1 };
                let avg = if facet.is_interior() { 0.5 } else { 1.0 };
                let n = facet.normal;
                let pen = self.penalty(f);
                let nl = fq.nloc;
                let size = sides * nl;
                let mut local = vec![0.0; size * size];
                let mut jump = vec![0.0; size];
                let mut flux = vec![0.0; size];
                for q in 0..fq.n_points() {
                    for s in 0..sides {
                        let sign = if s == 0 { 1.0 } else { -1.0 };
                        for (k, (v, g)) in fq.values(s, q).iter().zip(fq.grads(s, q)).enumerate() {
                            jump[s * nl + k] = sign * v;
                            flux[s * nl + k] = avg * (g[0] * n[0] + g[1] * n[1]);
                        }
                    }
                    let w = fq.weights[q];
                    for i in 0..size {
                        for j in 0..size {
                            local[i * size + j] +=
                                w * (-flux[j] * jump[i] - flux[i] * jump[j] + pen * jump[i] * jump[j]);
                        }
                    }
                }
                (self.facet_dofs(f), local)
            })
            .collect();
        for (dofs, local) in &locals {
            a.add_local(dofs, local);
        }
        a
    }

    /// Sum of the penalty-weighted squared jumps.
    pub fn jump_penalty_sq(&self, coeffs: &[f64]) -> f64 {
        let r = self.space.degree();
        let n_f = self.space.mesh().facets().len();
        (0..n_f)
            .into_par_iter()
            .map(|f| {
                let facet = &self.space.mesh().facets()[f];
                let fq = self.facet_quad(f, 2 * r);
                let mut s = 0.0;
                for q in 0..fq.n_points() {
                    let mut j = self.side_trace(coeffs, f, &fq, 0, q);
                    if facet.is_interior() {
                        j -= self.side_trace(coeffs, f, &fq, 1, q);
                    }
                    s += fq.weights[q] * j * j;
                }
                self.penalty(f) * s
            })
            .sum()
    }

    fn broken_grad_sq(&self, coeffs: &[f64]) -> f64 {
        self.space.integrate_with(coeffs, &|_, _, g| g[0] * g[0] + g[1] * g[1])
    }

    /// DG energy norm.
    pub fn dg_norm(&self, coeffs: &[f64]) -> f64 {
        (self.broken_grad_sq(coeffs) + self.jump_penalty_sq(coeffs)).sqrt()
    }

    fn ones(&self) -> Point {
        if self.space.mesh().dim() == 1 {
            [1.0, 0.0]
        } else {
            [1.0, 1.0]
        }
    }

    /// Residual `alpha b_DG(u^delta; u, N_i)` and its Jacobian.
    pub fn convection_residual_dg(&self, coeffs: &[f64], delta: u32, alpha: f64) -> Result<(Vec<f64>, SparseMatrix)> {
        if delta < 1 {
            return Err(Error::InvalidArgument("convection power delta must be >= 1".into()));
        }
        Ok(self.nonlinear_parts(coeffs, delta, alpha, 0.0, 0.0))
    }

    fn nonlinear_parts(&self, coeffs: &[f64], delta: u32, alpha: f64, beta: f64, gamma: f64) -> (Vec<f64>, SparseMatrix) {
        let r = self.space.degree();
        let d = delta as usize;
        let kappa = alpha / (d as f64 + 2.0);
        let ones = self.ones();
        let di = delta as i32;
        let degree = ((d + 2) * r - 1).max(if beta != 0.0 { (2 * d + 2) * r } else { 0 });
        let (mut res, mut jac) = self.space.assemble_pointwise(coeffs, degree, |u, g| {
            let ud = u.powi(di);
            let dud = d as f64 * u.powi(di - 1);
            let s = g[0] * ones[0] + g[1] * ones[1];
            let (c, dc) = if beta != 0.0 { reaction(u, delta, gamma) } else { (0.0, 0.0) };
            PointTerms {
                f: kappa * ud * s - beta * c,
                df_du: kappa * dud * s - beta * dc,
                df_dgrad: [kappa * ud * ones[0], kappa * ud * ones[1]],
                g: [-kappa * ud * u * ones[0], -kappa * ud * u * ones[1]],
                dg_du: [-kappa * (d as f64 + 1.0) * ud * ones[0], -kappa * (d as f64 + 1.0) * ud * ones[1]],
            }
        });
        if kappa == 0.0 {
            return (res, jac);
        }

        // Only interior facets contribute: with a zero exterior trace the two
        // boundary flux terms cancel, and on interior facets the upwind parts
        // of the two one-sided fluxes cancel, leaving a central flux.
        let mesh = self.space.mesh();
        let interior: Vec<usize> = (0..mesh.facets().len()).filter(|&f| mesh.facets()[f].is_interior()).collect();
        let locals: Vec<(Vec<usize>, Vec<f64>, Vec<f64>)> = interior
            .par_iter()
            .map(|&f| {
                let facet = &mesh.facets()[f];
                let fq = self.facet_quad(f, (2 + d) * r);
                let nl = fq.nloc;
                let s = facet.normal[0] * ones[0] + facet.normal[1] * ones[1];
                let mut lr = vec![0.0; 2 * nl];
                let mut lj = vec![0.0; 4 * nl * nl];
                for q in 0..fq.n_points() {
                    let w = kappa * fq.weights[q];
                    let up = self.side_trace(coeffs, f, &fq, 0, q);
                    let um = self.side_trace(coeffs, f, &fq, 1, q);
                    let a = 0.5 * (up.powi(di) + um.powi(di)) * s;
                    let da = [0.5 * d as f64 * up.powi(di - 1) * s, 0.5 * d as f64 * um.powi(di - 1) * s];
                    let (vp, vm) = (fq.values(0, q), fq.values(1, q));
                    for i in 0..nl {
                        lr[i] += w * a * um * vp[i];
                        lr[nl + i] -= w * a * up * vm[i];
                        for j in 0..nl {
                            let row_p = i * 2 * nl;
                            let row_m = (nl + i) * 2 * nl;
                            lj[row_p + j] += w * da[0] * vp[j] * um * vp[i];
                            lj[row_p + nl + j] += w * (da[1] * vm[j] * um + a * vm[j]) * vp[i];
                            lj[row_m + j] -= w * (da[0] * vp[j] * up + a * vp[j]) * vm[i];
                            lj[row_m + nl + j] -= w * da[1] * vm[j] * up * vm[i];
                        }
                    }
                }
                (self.facet_dofs(f), lr, lj)
            })
            .collect();
        for (dofs, lr, lj) in &locals {
            for (k, &i) in dofs.iter().enumerate() {
                res[i] += lr[k];
            }
            jac.add_local(dofs, lj);
        }
        (res, jac)
    }
}

impl SpatialDiscretization for DgSpace {
    fn space(&self) -> &FunctionSpace {
        &self.space
    }

    fn diffusion(&self) -> SparseMatrix {
        self.assemble_a_dg()
    }

    fn nonlinear(&self, coeffs: &[f64], t: &NonlinearTerms) -> (Vec<f64>, SparseMatrix) {
        self.nonlinear_parts(coeffs, t.delta, t.alpha, t.beta, t.gamma)
    }

    fn constrained_dofs(&self) -> &[usize] {
        &[]
    }

    fn energy_norm_sq(&self, coeffs: &[f64]) -> f64 {
        self.broken_grad_sq(coeffs) + self.jump_penalty_sq(coeffs)
    }

    /// The exact solutions are continuous with zero boundary trace, so the
    /// jumps of the error are those of the discrete solution.
    fn energy_error_sq(&self, coeffs: &[f64], grad: &(dyn Fn(Point) -> Point + Sync)) -> f64 {
        let g = self.space.integrate_with(coeffs, &|x, _, g| {
            let e = grad(x);
            (g[0] - e[0]).powi(2) + (g[1] - e[1]).powi(2)
        });
        g + self.jump_penalty_sq(coeffs)
    }
}

impl DgSpace {
    /// Embeds continuous coefficients of a space with the same mesh and degree.
    pub fn inject(&self, cg: &FunctionSpace, coeffs: &[f64]) -> Result<Vec<f64>> {
        if cg.continuity() != Continuity::Continuous || cg.degree() != self.space.degree() {
            return Err(Error::InvalidArgument("injection needs a continuous space of equal degree".into()));
        }
        let mut out = vec![0.0; self.space.n_dof()];
        for e in 0..self.space.mesh().n_elements() {
            for (&d, &c) in self.space.element_dofs(e).iter().zip(cg.element_dofs(e)) {
                out[d] = coeffs[c];
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn square(n: usize) -> Arc<Mesh> {
        Arc::new(Mesh::unit_square_triangulation(n, [0.0, 1.0], [0.0, 1.0]).unwrap())
    }

    fn pseudo_random(n: usize, seed: u64) -> Vec<f64> {
        let mut x = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (0..n)
            .map(|_| {
                x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((x >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
            })
            .collect()
    }

    #[test]
    fn dof_count() {
        let s = DgSpace::with_default_penalty(square(16), 1).unwrap();
        assert_eq!(s.n_dof(), 1536);
        assert!(DgSpace::new(square(2), 1, 0.0).is_err());
    }

    #[test]
    fn a_dg_symmetric_and_matches_stiffness_on_continuous() {
        for r in 1..=3 {
            let mesh = square(3);
            let dg = DgSpace::with_default_penalty(mesh.clone(), r).unwrap();
            let a = dg.assemble_a_dg();
            assert!(a.asymmetry() <= 1e-12 * a.max_abs());
            let cg = FunctionSpace::continuous(mesh, r).unwrap();
            let k = cg.assemble_stiffness();
            let mut f = cg.interpolate(&|x| (PI * x[0]).sin() * (PI * x[1]).sin());
            for &b in cg.boundary_dofs() {
                f[b] = 0.0;
            }
            let g = cg.interpolate(&|x| x[0] * (1.0 - x[0]) * x[1] * (1.0 - x[1]) * (1.0 + x[0]));
            let (fd, gd) = (dg.inject(&cg, &f).unwrap(), dg.inject(&cg, &g).unwrap());
            let lhs = a.bilinear(&gd, &fd);
            let rhs = k.bilinear(&g, &f);
            assert!((lhs - rhs).abs() < 1e-10, "r={r}: {lhs} vs {rhs}");
            let norm = dg.dg_norm(&fd);
            let h1 = cg.integrate_with(&f, &|_, _, g| g[0] * g[0] + g[1] * g[1]).sqrt();
            assert!((norm - h1).abs() < 1e-10);
        }
    }

    #[test]
    fn a_dg_positive_definite() {
        let dg = DgSpace::with_default_penalty(square(4), 1).unwrap();
        let a = dg.assemble_a_dg();
        for k in 0..100 {
            let v = pseudo_random(dg.n_dof(), k);
            assert!(a.bilinear(&v, &v) > 0.0);
        }
        let dense = a.to_dense();
        let n = dense.len();
        let m = faer::Mat::<f64>::from_fn(n, n, |i, j| dense[i][j]);
        let eig = m.self_adjoint_eigen(faer::Side::Lower).unwrap();
        let s = eig.S();
        let min = (0..n).map(|i| s[i]).fold(f64::INFINITY, f64::min);
        assert!(min > 0.0, "smallest eigenvalue {min}");
    }

    #[test]
    fn penalty_enters_linearly() {
        let mesh = square(2);
        let a: Vec<SparseMatrix> =
            [5.0, 10.0, 15.0].iter().map(|&s| DgSpace::new(mesh.clone(), 2, s).unwrap().assemble_a_dg()).collect();
        for k in 0..a[0].values().len() {
            let d1 = a[1].values()[k] - a[0].values()[k];
            let d2 = a[2].values()[k] - a[1].values()[k];
            assert!((d1 - d2).abs() < 1e-10 * a[2].max_abs());
        }
    }

    #[test]
    fn dg_norm_of_indicator() {
        let dg = DgSpace::with_default_penalty(square(1), 1).unwrap();
        assert_eq!(dg.dg_norm(&vec![0.0; dg.n_dof()]), 0.0);
        // indicator of the lower triangle: unit jump over its three edges
        let mut v = vec![0.0; dg.n_dof()];
        for &d in dg.function_space().element_dofs(0) {
            v[d] = 1.0;
        }
        let h = 2f64.sqrt();
        let expected = 10.0 / h * (1.0 + 1.0 + h);
        assert!((dg.dg_norm(&v).powi(2) - expected).abs() < 1e-12);
    }

    /// Direct evaluation of the four-term convection form with the upwind
    /// flux, for a test vector `v` and `w` frozen from `u`.
    fn b_dg_literal(dg: &DgSpace, u: &[f64], v: &[f64], delta: u32) -> f64 {
        let space = dg.function_space();
        let kappa = 1.0 / (delta as f64 + 2.0);
        let ones = dg.ones();
        let mut total = 0.0;
        let tab = space.tabulate(12);
        for e in 0..space.mesh().n_elements() {
            let geo = space.geometry(e);
            for q in 0..tab.n_points() {
                let xh = tab.points[q];
                let (uu, gu) = space.evaluate(u, e, xh);
                let (vv, gv) = space.evaluate(v, e, xh);
                let w = uu.powi(delta as i32);
                let a = w * (gu[0] * ones[0] + gu[1] * ones[1]) * vv - w * (gv[0] * ones[0] + gv[1] * ones[1]) * uu;
                total += kappa * tab.weights[q] * geo.abs_det() * a;
            }
        }
        let g = |a: f64| a.min(0.0);
        for (f, facet) in space.mesh().facets().iter().enumerate() {
            let fq = dg.facet_quad(f, 12);
            for q in 0..fq.n_points() {
                let up = dg.side_trace(u, f, &fq, 0, q);
                let vp = dg.side_trace(v, f, &fq, 0, q);
                let (um, vm) = if facet.is_interior() {
                    (dg.side_trace(u, f, &fq, 1, q), dg.side_trace(v, f, &fq, 1, q))
                } else {
                    (0.0, 0.0)
                };
                let wf = if facet.is_interior() {
                    0.5 * (up.powi(delta as i32) + um.powi(delta as i32))
                } else {
                    up.powi(delta as i32)
                };
                let s = facet.normal[0] * ones[0] + facet.normal[1] * ones[1];
                let ap = wf * s;
                let mut t = g(ap) * (um - up) * vp - g(ap) * (vm - vp) * up;
                if facet.is_interior() {
                    let am = -ap;
                    t += g(am) * (up - um) * vm - g(am) * (vp - vm) * um;
                }
                total += kappa * fq.weights[q] * t;
            }
        }
        total
    }

    #[test]
    fn convection_matches_literal_form() {
        for mesh in [square(2), Arc::new(Mesh::interval(4, 0.0, 1.0).unwrap())] {
            for r in 1..=2 {
                let dg = DgSpace::with_default_penalty(mesh.clone(), r).unwrap();
                for delta in [1, 2] {
                    let u = pseudo_random(dg.n_dof(), 3);
                    let v = pseudo_random(dg.n_dof(), 4);
                    let (res, _) = dg.convection_residual_dg(&u, delta, 1.0).unwrap();
                    let lhs: f64 = res.iter().zip(&v).map(|(a, b)| a * b).sum();
                    let rhs = b_dg_literal(&dg, &u, &v, delta);
                    assert!((lhs - rhs).abs() < 1e-11 * (1.0 + rhs.abs()), "{lhs} vs {rhs}");
                }
            }
        }
    }

    #[test]
    fn skew_identity() {
        let dg = DgSpace::with_default_penalty(square(3), 2).unwrap();
        for delta in [1, 2] {
            for k in 0..100 {
                let u = pseudo_random(dg.n_dof(), 100 + k);
                let (res, _) = dg.convection_residual_dg(&u, delta, 1.0).unwrap();
                let b: f64 = res.iter().zip(&u).map(|(a, b)| a * b).sum();
                let scale: f64 = res.iter().zip(&u).map(|(a, b)| (a * b).abs()).sum();
                assert!(b.abs() <= 1e-12 * scale, "delta={delta}: {b} vs {scale}");
            }
        }
        let (res, _) = dg.convection_residual_dg(&vec![0.0; dg.n_dof()], 1, 1.0).unwrap();
        assert!(res.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn convection_reduces_to_conforming_form() {
        let mesh = square(2);
        let cg = FunctionSpace::continuous(mesh.clone(), 1).unwrap();
        let dg = DgSpace::with_default_penalty(mesh, 1).unwrap();
        let u = cg.interpolate(&|x| 0.3 + x[0] * x[1] + 0.5 * x[0]);
        let ud = dg.inject(&cg, &u).unwrap();
        for delta in [1, 2] {
            let (rc, _) = cg.advection_residual(&u, delta).unwrap();
            let (rd, _) = dg.convection_residual_dg(&ud, delta, 1.0).unwrap();
            for i in 0..cg.n_dof() {
                if cg.boundary_dofs().contains(&i) {
                    continue;
                }
                let mut e = vec![0.0; cg.n_dof()];
                e[i] = 1.0;
                let ed = dg.inject(&cg, &e).unwrap();
                let lhs: f64 = rd.iter().zip(&ed).map(|(a, b)| a * b).sum();
                assert!((lhs - rc[i]).abs() < 1e-13, "dof {i}: {lhs} vs {}", rc[i]);
            }
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let terms = NonlinearTerms {
            alpha: 1.3,
            beta: 0.7,
            delta: 1,
            gamma: 0.4,
        };
        for mesh in [square(2), Arc::new(Mesh::interval(3, 0.0, 1.0).unwrap())] {
            for r in 1..=2 {
                let dg = DgSpace::with_default_penalty(mesh.clone(), r).unwrap();
                for delta in [1, 2] {
                    let t = NonlinearTerms { delta, ..terms };
                    let u: Vec<f64> = pseudo_random(dg.n_dof(), 7).iter().map(|x| 0.5 + 0.4 * x).collect();
                    let dir = pseudo_random(dg.n_dof(), 8);
                    let h = 1e-6;
                    let shift = |s: f64| -> Vec<f64> { u.iter().zip(&dir).map(|(a, b)| a + s * b).collect() };
                    let (_, jac) = dg.nonlinear(&u, &t);
                    let (rp, _) = dg.nonlinear(&shift(h), &t);
                    let (rm, _) = dg.nonlinear(&shift(-h), &t);
                    let jd = jac.matvec(&dir);
                    let scale = jd.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                    for i in 0..dg.n_dof() {
                        let fd = (rp[i] - rm[i]) / (2.0 * h);
                        assert!((fd - jd[i]).abs() <= 1e-6 * scale, "i={i}: {fd} vs {}", jd[i]);
                    }
                }
            }
        }
    }
}
