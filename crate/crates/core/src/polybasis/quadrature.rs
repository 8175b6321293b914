use faer::{Mat, Side};

use crate::error::{Error, Result};
use crate::mesh::Point;

/// Highest exactness degree served by [`simplex_quadrature`].
pub const MAX_SIMPLEX_DEGREE: usize = 30;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    /// Reference coordinates; one-dimensional rules use the first component.
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
    /// Polynomials up to this total degree are integrated exactly.
    pub degree: usize,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Applies the rule to a function of the first coordinate.
    pub fn integrate_1d(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(p, w)| w * f(p[0])).sum()
    }

    pub fn integrate(&self, f: impl Fn(Point) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(p, w)| w * f(*p)).sum()
    }

    /// Same rule affinely mapped from `[-1, 1]` to `[a, b]`.
    pub fn mapped_to(&self, a: f64, b: f64) -> QuadratureRule {
        let half = 0.5 * (b - a);
        QuadratureRule {
            points: self.points.iter().map(|p| [a + half * (p[0] + 1.0), 0.0]).collect(),
            weights: self.weights.iter().map(|w| w * half).collect(),
            degree: self.degree,
        }
    }
}

/// `n`-point Gauss–Legendre rule on `[-1, 1]`, exact to degree `2n - 1`.
pub fn gauss_legendre(n: usize) -> QuadratureRule {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one point");
    let mut points = vec![[0.0, 0.0]; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_pair(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_pair(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        points[i] = [-x, 0.0];
        weights[i] = w;
        points[n - 1 - i] = [x, 0.0];
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        points[n / 2] = [0.0, 0.0];
    }
    QuadratureRule {
        points,
        weights,
        degree: 2 * n - 1,
    }
}

/// `(P_n(x), P_n'(x))`
fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let d = if (x * x - 1.0).abs() < 1e-300 {
        0.5 * nf * (nf + 1.0) * x.powi(n as i32 + 1)
    } else {
        nf * (x * p1 - p0) / (x * x - 1.0)
    };
    (p1, d)
}

/// Gauss–Jacobi rule on `[-1, 1]` for the weight `(1 - x)^alpha (1 + x)^beta`,
/// built by Golub–Welsch from the three-term recurrence.
pub fn gauss_jacobi(n: usize, alpha: f64, beta: f64) -> Result<QuadratureRule> {
    if n == 0 {
        return Err(Error::InvalidArgument("Gauss-Jacobi rule needs at least one point".into()));
    }
    if !(alpha > -1.0 && beta > -1.0) {
        return Err(Error::InvalidArgument(format!(
            "Jacobi exponents must exceed -1 (alpha={alpha}, beta={beta})"
        )));
    }
    let ab = alpha + beta;
    let mu0 = 2f64.powf(ab + 1.0) * libm::tgamma(alpha + 1.0) * libm::tgamma(beta + 1.0) / libm::tgamma(ab + 2.0);
    let diag = |k: usize| {
        if k == 0 {
            (beta - alpha) / (ab + 2.0)
        } else {
            let s = 2.0 * k as f64 + ab;
            (beta * beta - alpha * alpha) / (s * (s + 2.0))
        }
    };
    let offdiag = |k: usize| {
        // k >= 1
        let kf = k as f64;
        let s = 2.0 * kf + ab;
        let num = 4.0 * kf * (kf + alpha) * (kf + beta) * (kf + ab);
        let den = s * s * (s + 1.0) * (s - 1.0);
        (num / den).sqrt()
    };
    let jac = Mat::<f64>::from_fn(n, n, |i, j| {
        if i == j {
            diag(i)
        } else if i == j + 1 || j == i + 1 {
            offdiag(i.max(j))
        } else {
            0.0
        }
    });
    let evd = jac
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Solver(format!("Golub-Welsch eigensolve failed: {e:?}")))?;
    let vals = evd.S().column_vector();
    let vecs = evd.U();
    let mut points = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        points.push([vals[i], 0.0]);
        let v0 = vecs[(0, i)];
        weights.push(mu0 * v0 * v0);
    }
    Ok(QuadratureRule {
        points,
        weights,
        degree: 2 * n - 1,
    })
}

/// Rule on `[0, 1]` for the weight `s^a`, `a > -1`.
pub fn gauss_jacobi_unit(n: usize, a: f64) -> Result<QuadratureRule> {
    let r = gauss_jacobi(n, 0.0, a)?;
    // s = (1 + x)/2, s^a = 2^{-a} (1 + x)^a, ds = dx/2
    let scale = 2f64.powf(-a - 1.0);
    Ok(QuadratureRule {
        points: r.points.iter().map(|p| [0.5 * (1.0 + p[0]), 0.0]).collect(),
        weights: r.weights.iter().map(|w| w * scale).collect(),
        degree: r.degree,
    })
}

/// Rule on `[0, 1]` for the weakly singular weight `s^{-sigma}`, `0 < sigma < 1`.
pub fn gauss_jacobi_singular(n: usize, sigma: f64) -> Result<QuadratureRule> {
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(Error::InvalidArgument(format!("singular exponent {sigma} outside (0, 1)")));
    }
    gauss_jacobi_unit(n, -sigma)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ElementFamily {
    Interval,
    Triangle,
}

impl ElementFamily {
    pub fn for_dim(dim: usize) -> Self {
        if dim == 1 {
            Self::Interval
        } else {
            Self::Triangle
        }
    }

    pub fn reference_measure(self) -> f64 {
        match self {
            Self::Interval => 1.0,
            Self::Triangle => 0.5,
        }
    }
}

/// Rule on the reference cell (`[0, 1]` or the unit right triangle) exact to
/// total degree `degree`.
///
/// Triangles use the centroid and the symmetric edge-midpoint-interior
/// three-point rule for degrees up to two and a collapsed Gauss–Jacobi
/// product beyond that.
pub fn simplex_quadrature(family: ElementFamily, degree: usize) -> Result<QuadratureRule> {
    if degree > MAX_SIMPLEX_DEGREE {
        return Err(Error::UnsupportedDegree {
            degree,
            max: MAX_SIMPLEX_DEGREE,
        });
    }
    let n = (degree + 2) / 2;
    match family {
        ElementFamily::Interval => {
            let g = gauss_legendre(n);
            Ok(QuadratureRule {
                points: g.points.iter().map(|p| [0.5 * (p[0] + 1.0), 0.0]).collect(),
                weights: g.weights.iter().map(|w| 0.5 * w).collect(),
                degree: g.degree,
            })
        }
        ElementFamily::Triangle => match degree {
            0 | 1 => Ok(QuadratureRule {
                points: vec![[1.0 / 3.0, 1.0 / 3.0]],
                weights: vec![0.5],
                degree: 1,
            }),
            2 => Ok(QuadratureRule {
                points: vec![[1.0 / 6.0, 1.0 / 6.0], [2.0 / 3.0, 1.0 / 6.0], [1.0 / 6.0, 2.0 / 3.0]],
                weights: vec![1.0 / 6.0; 3],
                degree: 2,
            }),
            _ => {
                // x = u, y = (1 - u) v, dx dy = (1 - u) du dv
                let gu = gauss_jacobi(n, 1.0, 0.0)?;
                let gv = gauss_legendre(n);
                let mut points = Vec::with_capacity(n * n);
                let mut weights = Vec::with_capacity(n * n);
                for (pu, wu) in gu.points.iter().zip(&gu.weights) {
                    let u = 0.5 * (pu[0] + 1.0);
                    for (pv, wv) in gv.points.iter().zip(&gv.weights) {
                        let v = 0.5 * (pv[0] + 1.0);
                        points.push([u, (1.0 - u) * v]);
                        weights.push(wu * 0.25 * wv * 0.5);
                    }
                }
                Ok(QuadratureRule {
                    points,
                    weights,
                    degree: 2 * n - 1,
                })
            }
        },
    }
}
