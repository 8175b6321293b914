//! Temporal hp projection, error norms and convergence rates.

use crate::discretization::SpatialDiscretization;
use crate::mesh::Point;
use crate::polybasis::{gauss_legendre, legendre_values};
use crate::space_fem::Continuity;
use crate::timestepper::{DiscreteSolution, TimePartition};

/// Projection onto polynomials of degree `p` on `[a, b]` that interpolates
/// at `b` and is `L^2`-orthogonal to degree `p - 1`. Returns Legendre
/// coefficients of a vector-valued function.
pub fn hp_project(u: &dyn Fn(f64) -> Vec<f64>, a: f64, b: f64, p: usize) -> Vec<Vec<f64>> {
    let rule = gauss_legendre(p + 4);
    let end = u(b);
    let dim = end.len();
    let mut coeffs = vec![vec![0.0; dim]; p + 1];
    let mut phi = vec![0.0; p + 1];
    for (x, w) in rule.points.iter().zip(&rule.weights) {
        let t = a + 0.5 * (x[0] + 1.0) * (b - a);
        let v = u(t);
        legendre_values(p, x[0], &mut phi);
        for (m, c) in coeffs.iter_mut().enumerate().take(p) {
            let s = 0.5 * (2 * m + 1) as f64 * w * phi[m];
            for (ci, vi) in c.iter_mut().zip(&v) {
                *ci += s * vi;
            }
        }
    }
    // P_m(1) = 1 fixes the top coefficient through the endpoint condition
    let mut top = end;
    for c in coeffs.iter().take(p) {
        for (t, ci) in top.iter_mut().zip(c) {
            *t -= ci;
        }
    }
    coeffs[p] = top;
    coeffs
}

pub fn hp_project_scalar(u: &dyn Fn(f64) -> f64, a: f64, b: f64, p: usize) -> Vec<f64> {
    hp_project(&|t| vec![u(t)], a, b, p).into_iter().map(|c| c[0]).collect()
}

fn eval_legendre(coeffs: &[f64], tau: f64) -> f64 {
    let mut phi = vec![0.0; coeffs.len()];
    legendre_values(coeffs.len() - 1, tau, &mut phi);
    coeffs.iter().zip(&phi).map(|(c, p)| c * p).sum()
}

/// Errors of the projection of a scalar function of time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionErrors {
    pub max_step: f64,
    /// Sampled supremum over `[0, T]`.
    pub sup: f64,
    pub l2: f64,
}

pub fn projection_errors(u: &dyn Fn(f64) -> f64, partition: &TimePartition) -> ProjectionErrors {
    let mut sup = 0.0f64;
    let mut l2 = 0.0;
    for n in 1..=partition.n_intervals() {
        let (a, b) = partition.interval(n);
        let p = partition.degree(n);
        let c = hp_project_scalar(u, a, b, p);
        for i in 0..=64 {
            let tau = -1.0 + 2.0 * i as f64 / 64.0;
            let t = a + 0.5 * (tau + 1.0) * (b - a);
            sup = sup.max((eval_legendre(&c, tau) - u(t)).abs());
        }
        let rule = gauss_legendre(p + 8);
        for (x, w) in rule.points.iter().zip(&rule.weights) {
            let t = a + 0.5 * (x[0] + 1.0) * (b - a);
            l2 += 0.5 * (b - a) * w * (eval_legendre(&c, x[0]) - u(t)).powi(2);
        }
    }
    ProjectionErrors {
        max_step: partition.max_step(),
        sup,
        l2: l2.sqrt(),
    }
}

/// Projection errors over a sequence of partitions.
pub fn interpolation_error_study(u: &dyn Fn(f64) -> f64, partitions: &[TimePartition]) -> Vec<ProjectionErrors> {
    partitions.iter().map(|p| projection_errors(u, p)).collect()
}

/// Exact space–time solution used for error measurement.
pub trait ExactSolution: Sync {
    fn value(&self, x: Point, t: f64) -> f64;
    fn grad(&self, x: Point, t: f64) -> Point;
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ErrorNorms {
    pub l2_final: f64,
    /// Full `H^1` norm `(L^2 + seminorm)` of the final error.
    pub h1_final: f64,
    pub h1_semi_final: f64,
    /// `(int_0^T |grad (U - u)|^2 dt)^{1/2}`.
    pub l2h1: f64,
    /// `L^2` error sampled at Chebyshev points of every interval.
    pub sup_l2: f64,
    /// DG energy norm of the final error, for DG discretizations.
    pub dg_final: Option<f64>,
}

pub fn error_norms(sol: &DiscreteSolution, disc: &dyn SpatialDiscretization, exact: &dyn ExactSolution) -> ErrorNorms {
    let space = disc.space();
    let part = &sol.partition;
    let t_final = part.final_time();
    let u_final = sol.final_trace();
    let l2_final = space.l2_error(&u_final, &|x| exact.value(x, t_final));
    let h1_semi_final = space.h1_seminorm_error(&u_final, &|x| exact.grad(x, t_final));
    let dg_final = (space.continuity() == Continuity::Discontinuous)
        .then(|| disc.energy_error_sq(&u_final, &|x| exact.grad(x, t_final)).sqrt());

    let mut l2h1 = 0.0;
    let mut sup_l2 = 0.0f64;
    for n in 1..=part.n_intervals() {
        let (a, b) = part.interval(n);
        let p = part.degree(n);
        let rule = gauss_legendre(p + 2);
        for (x, w) in rule.points.iter().zip(&rule.weights) {
            let t = a + 0.5 * (x[0] + 1.0) * (b - a);
            let u = sol.eval(n, x[0]);
            let e = space.h1_seminorm_error(&u, &|y| exact.grad(y, t));
            l2h1 += 0.5 * (b - a) * w * e * e;
        }
        let m = p + 3;
        for i in 0..m {
            let tau = ((2 * i + 1) as f64 * std::f64::consts::PI / (2 * m) as f64).cos();
            let t = a + 0.5 * (tau + 1.0) * (b - a);
            let u = sol.eval(n, tau);
            sup_l2 = sup_l2.max(space.l2_error(&u, &|y| exact.value(y, t)));
        }
    }
    sup_l2 = sup_l2.max(l2_final);

    ErrorNorms {
        l2_final,
        h1_final: (l2_final * l2_final + h1_semi_final * h1_semi_final).sqrt(),
        h1_semi_final,
        l2h1: l2h1.sqrt(),
        sup_l2,
        dg_final,
    }
}

/// Rate between consecutive entries, `None` for the first entry and when
/// either error is below `1e-14`.
pub fn convergence_rates(h: &[f64], errors: &[f64]) -> Vec<Option<f64>> {
    let mut out = vec![None; errors.len()];
    for i in 1..errors.len() {
        let (e1, e2) = (errors[i - 1], errors[i]);
        if e1 >= 1e-14 && e2 >= 1e-14 {
            out[i] = Some((e1 / e2).ln() / (h[i - 1] / h[i]).ln());
        }
    }
    out
}

/// One refinement level of a convergence study.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub mesh_n: usize,
    pub dof: usize,
    pub h: f64,
    pub k: f64,
    pub p: usize,
    pub r: usize,
    pub errors: ErrorNorms,
    pub newton_iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceReport {
    pub fn rates(&self, pick: impl Fn(&ErrorNorms) -> f64) -> Vec<Option<f64>> {
        let h: Vec<f64> = self.rows.iter().map(|r| r.h).collect();
        let e: Vec<f64> = self.rows.iter().map(|r| pick(&r.errors)).collect();
        convergence_rates(&h, &e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projection_degree_zero_is_endpoint_value() {
        let c = hp_project_scalar(&|t| t.sin() + 3.0, 0.0, 1.0, 0);
        assert_eq!(c.len(), 1);
        assert!((c[0] - (1f64.sin() + 3.0)).abs() < 1e-15);
    }

    #[test]
    fn projection_of_square() {
        let c = hp_project_scalar(&|t| t * t, -1.0, 1.0, 1);
        assert!((c[0] - 1.0 / 3.0).abs() < 1e-14);
        assert!((c[1] - 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn projection_reproduces_polynomials_and_is_orthogonal() {
        for p in 0..6 {
            let poly = |t: f64| (0..=p).map(|i| (i as f64 + 0.5) * t.powi(i as i32)).sum::<f64>();
            let c = hp_project_scalar(&poly, 0.3, 1.1, p);
            for i in 0..=10 {
                let tau = -1.0 + 0.2 * i as f64;
                let t = 0.3 + 0.5 * (tau + 1.0) * 0.8;
                assert!((eval_legendre(&c, tau) - poly(t)).abs() < 1e-12);
            }
            let f = |t: f64| (3.0 * t).exp();
            let c = hp_project_scalar(&f, 0.0, 0.5, p);
            assert!((eval_legendre(&c, 1.0) - f(0.5)).abs() < 1e-12);
            let rule = gauss_legendre(p + 10);
            let mut phi = vec![0.0; p + 1];
            for m in 0..p {
                let mut s = 0.0;
                for (x, w) in rule.points.iter().zip(&rule.weights) {
                    legendre_values(p, x[0], &mut phi);
                    let t = 0.25 * (x[0] + 1.0);
                    // the rule with p + 4 points leaves a tiny quadrature residual
                    s += w * (f(t) - eval_legendre(&c, x[0])) * phi[m];
                }
                assert!(s.abs() < 1e-10, "p={p} m={m}: {s}");
            }
        }
    }

    #[test]
    fn linear_function_exact() {
        let part = TimePartition::uniform(1.0, 3, 1).unwrap();
        let e = projection_errors(&|t| 2.0 * t - 1.0, &part);
        assert!(e.sup < 1e-14 && e.l2 < 1e-14);
    }

    #[test]
    fn first_order_for_constants() {
        let parts: Vec<TimePartition> = [4, 8, 16, 32].iter().map(|&n| TimePartition::uniform(1.0, n, 0).unwrap()).collect();
        let errs = interpolation_error_study(&|t| t * t, &parts);
        let last = errs[2].sup / errs[3].sup;
        assert!((last - 2.0).abs() < 0.1, "ratio {last}");
    }

    #[test]
    fn exponential_decay_in_degree() {
        let errs: Vec<f64> = (1..=5)
            .map(|p| projection_errors(&|t: f64| t.sin(), &TimePartition::uniform(1.0, 1, p).unwrap()).sup)
            .collect();
        let logs: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
        for w in logs.windows(2) {
            assert!(w[1] < w[0]);
        }
        // decay accelerates; compared over two degrees to skip the parity
        // oscillation of an odd function
        assert!(logs[4] - logs[2] <= logs[2] - logs[0]);
    }

    #[test]
    fn rates() {
        let r = convergence_rates(&[1.0 / 8.0, 1.0 / 16.0], &[0.4, 0.2]);
        assert_eq!(r[0], None);
        assert!((r[1].unwrap() - 1.0).abs() < 1e-14);
        let r = convergence_rates(&[0.5, 0.25], &[8e-3, 1e-3]);
        assert!((r[1].unwrap() - 3.0).abs() < 1e-12);
        let r = convergence_rates(&[0.5, 0.25], &[7.91e-1, 4.02e-1]);
        assert!((r[1].unwrap() - 0.98).abs() < 0.005);
        let r = convergence_rates(&[0.5, 0.25], &[1e-15, 1e-16]);
        assert_eq!(r[1], None);
    }
}
