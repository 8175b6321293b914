use faer::linalg::solvers::Solve;
use faer::Mat;

use super::quadrature::ElementFamily;
use crate::error::{Error, Result};
use crate::mesh::Point;

pub const MAX_SPATIAL_DEGREE: usize = 3;

/// Nodal Lagrange shape functions on the reference cell.
///
/// Local node order: vertices, then the interior nodes of each local facet
/// (triangle edge `f` runs from vertex `f` to vertex `f + 1`), then cell
/// interior nodes.
#[derive(Debug, Clone)]
pub struct SpatialBasis {
    family: ElementFamily,
    degree: usize,
    nodes: Vec<Point>,
    exponents: Vec<(u32, u32)>,
    /// `coeffs[i * n + k]`: coefficient of monomial `k` in shape function `i`.
    coeffs: Vec<f64>,
}

impl SpatialBasis {
    pub fn new(family: ElementFamily, degree: usize) -> Result<Self> {
        if degree == 0 || degree > MAX_SPATIAL_DEGREE {
            return Err(Error::InvalidArgument(format!(
                "spatial degree {degree} outside 1..={MAX_SPATIAL_DEGREE}"
            )));
        }
        let r = degree as f64;
        let (nodes, exponents): (Vec<Point>, Vec<(u32, u32)>) = match family {
            ElementFamily::Interval => {
                let mut nodes = vec![[0.0, 0.0], [1.0, 0.0]];
                nodes.extend((1..degree).map(|i| [i as f64 / r, 0.0]));
                (nodes, (0..=degree as u32).map(|a| (a, 0)).collect())
            }
            ElementFamily::Triangle => {
                let verts = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
                let mut nodes: Vec<Point> = verts.to_vec();
                for f in 0..3 {
                    let (a, b) = (verts[f], verts[(f + 1) % 3]);
                    for i in 1..degree {
                        let s = i as f64 / r;
                        nodes.push([a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])]);
                    }
                }
                for j in 1..degree {
                    for i in 1..degree {
                        if i + j < degree {
                            nodes.push([i as f64 / r, j as f64 / r]);
                        }
                    }
                }
                let mut exps = Vec::new();
                for total in 0..=degree as u32 {
                    for b in 0..=total {
                        exps.push((total - b, b));
                    }
                }
                (nodes, exps)
            }
        };
        let n = nodes.len();
        debug_assert_eq!(n, exponents.len());
        // V[j][k] = m_k(x_j); shape coefficients C = V^{-1}, N_i = sum_k C[k][i] m_k
        let vander = Mat::<f64>::from_fn(n, n, |j, k| monomial(exponents[k], nodes[j]));
        let inv = vander.partial_piv_lu().solve(Mat::<f64>::identity(n, n));
        let mut coeffs = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                coeffs[i * n + k] = inv[(k, i)];
            }
        }
        Ok(Self {
            family,
            degree,
            nodes,
            exponents,
            coeffs,
        })
    }

    pub fn family(&self) -> ElementFamily {
        self.family
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    /// Number of nodes strictly inside each facet.
    pub fn nodes_per_facet_interior(&self) -> usize {
        match self.family {
            ElementFamily::Interval => 0,
            ElementFamily::Triangle => self.degree - 1,
        }
    }

    pub fn n_vertices(&self) -> usize {
        match self.family {
            ElementFamily::Interval => 2,
            ElementFamily::Triangle => 3,
        }
    }

    pub fn eval(&self, x: Point, out: &mut [f64]) {
        let n = self.len();
        let m: Vec<f64> = self.exponents.iter().map(|&e| monomial(e, x)).collect();
        for i in 0..n {
            let c = &self.coeffs[i * n..(i + 1) * n];
            out[i] = c.iter().zip(&m).map(|(a, b)| a * b).sum();
        }
    }

    pub fn eval_grad(&self, x: Point, out: &mut [Point]) {
        let n = self.len();
        let g: Vec<Point> = self.exponents.iter().map(|&e| monomial_grad(e, x)).collect();
        for i in 0..n {
            let c = &self.coeffs[i * n..(i + 1) * n];
            let mut s = [0.0, 0.0];
            for (a, gk) in c.iter().zip(&g) {
                s[0] += a * gk[0];
                s[1] += a * gk[1];
            }
            out[i] = s;
        }
    }

    pub fn values(&self, x: Point) -> Vec<f64> {
        let mut v = vec![0.0; self.len()];
        self.eval(x, &mut v);
        v
    }

    pub fn grads(&self, x: Point) -> Vec<Point> {
        let mut v = vec![[0.0; 2]; self.len()];
        self.eval_grad(x, &mut v);
        v
    }
}

fn monomial((a, b): (u32, u32), x: Point) -> f64 {
    x[0].powi(a as i32) * x[1].powi(b as i32)
}

fn monomial_grad((a, b): (u32, u32), x: Point) -> Point {
    let dx = if a == 0 { 0.0 } else { a as f64 * x[0].powi(a as i32 - 1) * x[1].powi(b as i32) };
    let dy = if b == 0 { 0.0 } else { b as f64 * x[0].powi(a as i32) * x[1].powi(b as i32 - 1) };
    [dx, dy]
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn all_bases() -> Vec<SpatialBasis> {
        let mut v = Vec::new();
        for fam in [ElementFamily::Interval, ElementFamily::Triangle] {
            for r in 1..=3 {
                v.push(SpatialBasis::new(fam, r).unwrap());
            }
        }
        v
    }

    #[test]
    fn node_counts() {
        assert_eq!(SpatialBasis::new(ElementFamily::Triangle, 1).unwrap().len(), 3);
        assert_eq!(SpatialBasis::new(ElementFamily::Triangle, 2).unwrap().len(), 6);
        assert_eq!(SpatialBasis::new(ElementFamily::Triangle, 3).unwrap().len(), 10);
        assert_eq!(SpatialBasis::new(ElementFamily::Interval, 3).unwrap().len(), 4);
        assert!(SpatialBasis::new(ElementFamily::Triangle, 4).is_err());
        assert!(SpatialBasis::new(ElementFamily::Triangle, 0).is_err());
    }

    #[test]
    fn kronecker_at_nodes() {
        for b in all_bases() {
            for (j, &x) in b.nodes().iter().enumerate() {
                let v = b.values(x);
                for (i, vi) in v.iter().enumerate() {
                    let e = if i == j { 1.0 } else { 0.0 };
                    assert!((vi - e).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn partition_of_unity() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        for b in all_bases() {
            for _ in 0..50 {
                let x: f64 = rng.random_range(0.0..1.0);
                let y: f64 = if b.family() == ElementFamily::Triangle { rng.random_range(0.0..1.0 - x) } else { 0.0 };
                let s: f64 = b.values([x, y]).iter().sum();
                assert!((s - 1.0).abs() < 1e-12);
                let g = b.grads([x, y]);
                let gs = g.iter().fold([0.0, 0.0], |a, v| [a[0] + v[0], a[1] + v[1]]);
                assert!(gs[0].abs() < 1e-11 && gs[1].abs() < 1e-11);
            }
        }
    }
}
