//! hp discontinuous Galerkin time stepping.
//!
//! On every interval `J_n` the solution is `U(t) = sum_m U_m phi_m(tau)` with
//! Legendre polynomials `phi_m` in the reference variable `tau in [-1, 1]`.
//! Testing against `phi_l X` gives `p_n + 1` coupled spatial systems that are
//! solved together by Newton's method.

use std::collections::HashMap;
use std::sync::Arc;

use crate::discretization::{NonlinearTerms, SpatialDiscretization};
use crate::error::{Error, Result};
use crate::memory::{caputo_block, moment_row, KernelSpec, MomentBlock};
use crate::mesh::Point;
use crate::polybasis::{gauss_legendre, legendre_eval, legendre_values};
use crate::sparse::{BlockSystem, SparseMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct TimePartition {
    nodes: Vec<f64>,
    degrees: Vec<usize>,
}

impl TimePartition {
    pub fn new(nodes: Vec<f64>, degrees: Vec<usize>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::InvalidArgument("time partition needs at least one interval".into()));
        }
        if degrees.len() != nodes.len() - 1 {
            return Err(Error::InvalidArgument("one temporal degree per interval expected".into()));
        }
        if nodes[0] != 0.0 || nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("time nodes must start at 0 and increase strictly".into()));
        }
        Ok(Self { nodes, degrees })
    }

    /// `n_steps` equal intervals of `[0, t_final]`, all of degree `degree`.
    pub fn uniform(t_final: f64, n_steps: usize, degree: usize) -> Result<Self> {
        if n_steps == 0 || !(t_final > 0.0) {
            return Err(Error::InvalidArgument("uniform partition needs T > 0 and N >= 1".into()));
        }
        let k = t_final / n_steps as f64;
        let nodes = (0..=n_steps).map(|i| if i == n_steps { t_final } else { k * i as f64 }).collect();
        Self::new(nodes, vec![degree; n_steps])
    }

    pub fn n_intervals(&self) -> usize {
        self.degrees.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    /// `(t_{n-1}, t_n)` for `n = 1..=N`.
    pub fn interval(&self, n: usize) -> (f64, f64) {
        (self.nodes[n - 1], self.nodes[n])
    }

    pub fn step(&self, n: usize) -> f64 {
        self.nodes[n] - self.nodes[n - 1]
    }

    pub fn degree(&self, n: usize) -> usize {
        self.degrees[n - 1]
    }

    pub fn max_step(&self) -> f64 {
        (1..=self.n_intervals()).map(|n| self.step(n)).fold(0.0, f64::max)
    }

    pub fn final_time(&self) -> f64 {
        *self.nodes.last().expect("nonempty partition")
    }
}

/// `C_lm = int phi_m' phi_l + phi_m(-1) phi_l(-1)` and
/// `T_lm = int_{J_n} phi_m phi_l`, both row-major with row index `l`.
pub fn temporal_coupling_matrices(p: usize, k: f64) -> (Vec<f64>, Vec<f64>) {
    let n = p + 1;
    let rule = gauss_legendre(n + 1);
    let mut c = vec![0.0; n * n];
    let mut t = vec![0.0; n * n];
    for (x, w) in rule.points.iter().zip(&rule.weights) {
        let (v, d) = legendre_eval(p, x[0]);
        for l in 0..n {
            for m in 0..n {
                c[l * n + m] += w * d[m] * v[l];
            }
        }
    }
    let left = legendre_eval(p, -1.0).0;
    for l in 0..n {
        for m in 0..n {
            c[l * n + m] += left[m] * left[l];
        }
        t[l * n + l] = k / (2 * l + 1) as f64;
    }
    (c, t)
}

/// Space–time forcing `f(x, t)`.
pub type Forcing = dyn Fn(Point, f64) -> f64 + Send + Sync;
pub type InitialDatum = dyn Fn(Point) -> f64 + Send + Sync;

#[derive(Clone)]
pub struct ProblemSpec {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: u32,
    pub nu: f64,
    pub kernel: KernelSpec,
    pub forcing: Option<Arc<Forcing>>,
    pub initial: Arc<InitialDatum>,
}

impl std::fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("alpha", &self.alpha)
            .field("beta", &self.beta)
            .field("gamma", &self.gamma)
            .field("delta", &self.delta)
            .field("nu", &self.nu)
            .field("kernel", &self.kernel)
            .field("forcing", &self.forcing.is_some())
            .finish()
    }
}

impl ProblemSpec {
    /// `alpha = beta = delta = nu = 1`, `gamma = 1/2`, no memory, zero data.
    pub fn standard() -> Self {
        Self {
            alpha: 1.0,
            beta: 1.0,
            gamma: 0.5,
            delta: 1,
            nu: 1.0,
            kernel: KernelSpec::none(),
            forcing: None,
            initial: Arc::new(|_| 0.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nu > 0.0) {
            return Err(Error::InvalidArgument(format!("diffusion nu must be positive, got {}", self.nu)));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::InvalidArgument(format!("gamma must lie in (0, 1), got {}", self.gamma)));
        }
        if !(1..=2).contains(&self.delta) {
            return Err(Error::InvalidArgument(format!("delta must be 1 or 2, got {}", self.delta)));
        }
        if !(self.alpha.is_finite() && self.beta.is_finite()) {
            return Err(Error::InvalidArgument("alpha and beta must be finite".into()));
        }
        self.kernel.validate()
    }

    pub fn nonlinear_terms(&self) -> NonlinearTerms {
        NonlinearTerms {
            alpha: self.alpha,
            beta: self.beta,
            delta: self.delta,
            gamma: self.gamma,
        }
    }

    fn is_linear(&self) -> bool {
        self.alpha == 0.0 && self.beta == 0.0
    }
}

/// Basis used for the unknowns of one interval. Solutions are always stored
/// in Legendre coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TemporalBasisKind {
    #[default]
    Legendre,
    /// Monomials `tau^m` on the reference interval.
    Monomial,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_iter: usize,
    /// Extra Gauss points beyond `p + 1` for the nonlinear temporal integrals.
    pub nonlinear_extra_points: usize,
    /// Extra Gauss points beyond `p + 1` for the forcing.
    pub forcing_extra_points: usize,
    pub basis: TemporalBasisKind,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_iter: 25,
            nonlinear_extra_points: 1,
            forcing_extra_points: 2,
            basis: TemporalBasisKind::Legendre,
        }
    }
}

impl NewtonOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) || self.max_iter == 0 {
            return Err(Error::InvalidArgument("Newton tolerances and iteration cap must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepStats {
    pub interval: usize,
    /// Residual evaluations, the last one below tolerance.
    pub iterations: usize,
    pub residuals: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct DiscreteSolution {
    pub partition: TimePartition,
    pub n_dof: usize,
    pub initial: Vec<f64>,
    /// `blocks[n - 1][m]` is the Legendre coefficient `U_m` on `J_n`.
    pub blocks: Vec<Vec<Vec<f64>>>,
    pub stats: Vec<StepStats>,
}

impl DiscreteSolution {
    /// Left limit `U^n` at `t_n`; `U^0` is the initial vector.
    pub fn trace(&self, n: usize) -> Vec<f64> {
        if n == 0 {
            return self.initial.clone();
        }
        // phi_m(1) = 1
        let mut out = vec![0.0; self.n_dof];
        for b in &self.blocks[n - 1] {
            for (o, v) in out.iter_mut().zip(b) {
                *o += v;
            }
        }
        out
    }

    pub fn final_trace(&self) -> Vec<f64> {
        self.trace(self.blocks.len())
    }

    /// Value on interval `n` at reference time `tau`.
    pub fn eval(&self, n: usize, tau: f64) -> Vec<f64> {
        let blk = &self.blocks[n - 1];
        let mut phi = vec![0.0; blk.len()];
        legendre_values(blk.len() - 1, tau, &mut phi);
        let mut out = vec![0.0; self.n_dof];
        for (b, p) in blk.iter().zip(&phi) {
            for (o, v) in out.iter_mut().zip(b) {
                *o += p * v;
            }
        }
        out
    }

    /// Right limit `U^{n-1}_+` at the start of interval `n`.
    pub fn start_value(&self, n: usize) -> Vec<f64> {
        self.eval(n, -1.0)
    }

    pub fn total_newton_iterations(&self) -> usize {
        self.stats.iter().map(|s| s.iterations).sum()
    }
}

/// Gauss rule on `[-1, 1]`. Next to `t = 0` the rule is composite on a
/// geometric mesh graded towards `-1`, so forcings with algebraic
/// singularities in time (memory of nonzero initial data) stay accurate.
fn forcing_rule(points: usize, graded: bool) -> Vec<(f64, f64)> {
    let rule = gauss_legendre(points);
    if !graded {
        return rule.points.iter().zip(&rule.weights).map(|(x, w)| (x[0], *w)).collect();
    }
    const LEVELS: i32 = 30;
    const RATIO: f64 = 0.4;
    let rule = gauss_legendre(points.max(8));
    let mut breaks = vec![0.0];
    breaks.extend((0..=LEVELS).rev().map(|i| RATIO.powi(i)));
    let mut out = Vec::with_capacity((breaks.len() - 1) * rule.points.len());
    for c in breaks.windows(2) {
        // s = (tau + 1) / 2 in [c0, c1]
        let h = c[1] - c[0];
        for (x, w) in rule.points.iter().zip(&rule.weights) {
            let s = c[0] + 0.5 * (x[0] + 1.0) * h;
            out.push((2.0 * s - 1.0, w * h));
        }
    }
    out
}

/// `tau^m = sum_i B_mi P_i(tau)`.
fn monomial_to_legendre(p: usize) -> Vec<f64> {
    let n = p + 1;
    let rule = gauss_legendre(n + 1);
    let mut b = vec![0.0; n * n];
    for (x, w) in rule.points.iter().zip(&rule.weights) {
        let v = legendre_eval(p, x[0]).0;
        for m in 0..n {
            let xm = x[0].powi(m as i32);
            for i in 0..n {
                b[m * n + i] += (2 * i + 1) as f64 / 2.0 * w * xm * v[i];
            }
        }
    }
    b
}

fn mat_mul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut c = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            for j in 0..n {
                c[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    c
}

fn transpose(a: &[f64], n: usize) -> Vec<f64> {
    let mut t = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            t[j * n + i] = a[i * n + j];
        }
    }
    t
}

fn mat_vec(a: &[f64], v: &[f64], n: usize) -> Vec<f64> {
    (0..n).map(|i| (0..n).map(|j| a[i * n + j] * v[j]).sum()).collect()
}

/// Sequential hp-DG time stepper bound to one spatial discretization.
pub struct TimeStepper<'a> {
    problem: &'a ProblemSpec,
    partition: &'a TimePartition,
    disc: &'a dyn SpatialDiscretization,
    options: NewtonOptions,
    mass: SparseMatrix,
    diffusion: SparseMatrix,
    systems: HashMap<usize, BlockSystem>,
    solution: DiscreteSolution,
    /// `A U_m^{(j)}` per finished interval.
    stiff_actions: Vec<Vec<Vec<f64>>>,
    /// `M U_m^{(j)}` and `M [U]^{j-1}` per finished interval, Caputo mode only.
    mass_actions: Vec<Vec<Vec<f64>>>,
    mass_jumps: Vec<Vec<f64>>,
}

impl<'a> TimeStepper<'a> {
    pub fn new(
        problem: &'a ProblemSpec,
        partition: &'a TimePartition,
        disc: &'a dyn SpatialDiscretization,
        options: NewtonOptions,
    ) -> Result<Self> {
        problem.validate()?;
        options.validate()?;
        let initial = disc.interpolate(&|x| (problem.initial)(x));
        Self::with_initial(problem, partition, disc, options, initial)
    }

    /// Starts from a given coefficient vector instead of interpolating `u_0`.
    pub fn with_initial(
        problem: &'a ProblemSpec,
        partition: &'a TimePartition,
        disc: &'a dyn SpatialDiscretization,
        options: NewtonOptions,
        initial: Vec<f64>,
    ) -> Result<Self> {
        problem.validate()?;
        options.validate()?;
        let n_dof = disc.n_dof();
        if initial.len() != n_dof {
            return Err(Error::InvalidArgument("initial vector length mismatch".into()));
        }
        Ok(Self {
            problem,
            partition,
            disc,
            options,
            mass: disc.mass(),
            diffusion: disc.diffusion(),
            systems: HashMap::new(),
            solution: DiscreteSolution {
                partition: partition.clone(),
                n_dof,
                initial,
                blocks: Vec::new(),
                stats: Vec::new(),
            },
            stiff_actions: Vec::new(),
            mass_actions: Vec::new(),
            mass_jumps: Vec::new(),
        })
    }

    pub fn mass(&self) -> &SparseMatrix {
        &self.mass
    }

    pub fn diffusion(&self) -> &SparseMatrix {
        &self.diffusion
    }

    pub fn solution(&self) -> &DiscreteSolution {
        &self.solution
    }

    pub fn into_solution(self) -> DiscreteSolution {
        self.solution
    }

    /// Number of finished intervals.
    pub fn steps_done(&self) -> usize {
        self.solution.blocks.len()
    }

    /// Solves the next interval and records it in the history.
    pub fn step(&mut self) -> Result<&StepStats> {
        let n = self.steps_done() + 1;
        if n > self.partition.n_intervals() {
            return Err(Error::InvalidArgument("time partition exhausted".into()));
        }
        let (block, stats) =
            self.solve_interval(n).map_err(|e| Error::StepFailed { interval: n, source: Box::new(e) })?;
        let kernel = &self.problem.kernel;
        if kernel.has_memory() {
            self.stiff_actions.push(block.iter().map(|u| self.diffusion.matvec(u)).collect());
        }
        if kernel.is_caputo() {
            self.mass_actions.push(block.iter().map(|u| self.mass.matvec(u)).collect());
            let prev = self.solution.trace(n - 1);
            let mut jump = vec![0.0; self.solution.n_dof];
            let p = block.len() - 1;
            let left = legendre_eval(p, -1.0).0;
            for (u, s) in block.iter().zip(&left) {
                for (j, v) in jump.iter_mut().zip(u) {
                    *j += s * v;
                }
            }
            for (j, v) in jump.iter_mut().zip(&prev) {
                *j -= v;
            }
            self.mass_jumps.push(self.mass.matvec(&jump));
        }
        self.solution.blocks.push(block);
        self.solution.stats.push(stats);
        Ok(self.solution.stats.last().expect("just pushed"))
    }

    fn solve_interval(&mut self, n: usize) -> Result<(Vec<Vec<f64>>, StepStats)> {
        let problem = self.problem;
        let kernel = problem.kernel;
        let p = self.partition.degree(n);
        let nb = p + 1;
        let k = self.partition.step(n);
        let (t0, t1) = self.partition.interval(n);
        let n_dof = self.solution.n_dof;
        let constrained = self.disc.constrained_dofs();

        // Temporal data in the Legendre basis; the test/trial transform is
        // applied below for other bases.
        let (mut c, t) = temporal_coupling_matrices(p, k);
        let mut left = legendre_eval(p, -1.0).0;
        let prev = self.solution.trace(n - 1);
        let mut rhs: Vec<Vec<f64>> = vec![vec![0.0; n_dof]; nb];
        let mut wnn = vec![0.0; nb * nb];

        if kernel.has_memory() {
            let row = moment_row(self.partition, n, &kernel)?;
            let (hist, cur): (&[MomentBlock], &MomentBlock) = (&row[..n - 1], &row[n - 1]);
            wnn.copy_from_slice(&cur.data);
            let h = crate::memory::history_accumulate(nb, hist, &self.stiff_actions, kernel.eta, n_dof)?;
            for (r, hl) in rhs.iter_mut().zip(h) {
                for (a, b) in r.iter_mut().zip(hl) {
                    *a -= b;
                }
            }
        }

        if kernel.is_caputo() {
            let mu = kernel.caputo_order;
            let cur = caputo_block(self.partition, n, n, mu)?;
            for l in 0..nb {
                for m in 0..nb {
                    c[l * nb + m] = cur.smooth.get(l, m) + cur.jump[l] * left[m];
                }
            }
            left = cur.jump.clone();
            for j in 1..n {
                let b = caputo_block(self.partition, n, j, mu)?;
                for (l, r) in rhs.iter_mut().enumerate() {
                    for (m, mu_m) in self.mass_actions[j - 1].iter().enumerate() {
                        let w = b.smooth.get(l, m);
                        for (a, v) in r.iter_mut().zip(mu_m) {
                            *a -= w * v;
                        }
                    }
                    let w = b.jump[l];
                    for (a, v) in r.iter_mut().zip(&self.mass_jumps[j - 1]) {
                        *a -= w * v;
                    }
                }
            }
        }

        let m_prev = self.mass.matvec(&prev);
        for (l, r) in rhs.iter_mut().enumerate() {
            for (a, v) in r.iter_mut().zip(&m_prev) {
                *a += left[l] * v;
            }
        }

        if let Some(f) = &problem.forcing {
            let rule = forcing_rule(nb + self.options.forcing_extra_points, t0 == 0.0);
            for &(x, w) in &rule {
                let time = t0 + 0.5 * (x + 1.0) * (t1 - t0);
                let load = self.disc.space().load_vector(&|pt| f(pt, time));
                let phi = legendre_eval(p, x).0;
                for (l, r) in rhs.iter_mut().enumerate() {
                    let s = 0.5 * k * w * phi[l];
                    for (a, v) in r.iter_mut().zip(&load) {
                        *a += s * v;
                    }
                }
            }
        }

        // Nonlinear quadrature: points and scaled basis values.
        let nl_rule = gauss_legendre(nb + self.options.nonlinear_extra_points);
        let mut nl_phi: Vec<Vec<f64>> = nl_rule.points.iter().map(|x| legendre_eval(p, x[0]).0).collect();
        let nl_w: Vec<f64> = nl_rule.weights.iter().map(|w| 0.5 * k * w).collect();

        // Change of basis: test functions psi_l = sum_i B_li phi_i, trial
        // coefficients V with U_i = sum_m B_mi V_m.
        let b = match self.options.basis {
            TemporalBasisKind::Legendre => None,
            TemporalBasisKind::Monomial => Some(monomial_to_legendre(p)),
        };
        let (c, t, wnn, rhs) = if let Some(b) = &b {
            let bt = transpose(b, nb);
            let sandwich = |a: &[f64]| mat_mul(&mat_mul(b, a, nb), &bt, nb);
            for v in nl_phi.iter_mut() {
                *v = mat_vec(b, v, nb);
            }
            let mut r2 = vec![vec![0.0; n_dof]; nb];
            for (l, r) in r2.iter_mut().enumerate() {
                for (i, ri) in rhs.iter().enumerate() {
                    let w = b[l * nb + i];
                    if w != 0.0 {
                        for (a, v) in r.iter_mut().zip(ri) {
                            *a += w * v;
                        }
                    }
                }
            }
            (sandwich(&c), sandwich(&t), sandwich(&wnn), r2)
        } else {
            (c, t, wnn, rhs)
        };

        let eta = if kernel.has_memory() { kernel.eta } else { 0.0 };
        let lin: Vec<f64> = (0..nb * nb).map(|i| problem.nu * t[i] + eta * wnn[i]).collect();
        let terms = problem.nonlinear_terms();
        let linear = problem.is_linear();

        let mut u: Vec<Vec<f64>> = vec![vec![0.0; n_dof]; nb];
        u[0] = prev.clone();
        for &d in constrained {
            u[0][d] = 0.0;
        }

        let system = self
            .systems
            .entry(nb)
            .or_insert_with(|| BlockSystem::new(self.disc.pattern(), nb));
        let mut residuals = Vec::new();
        let mut r0 = None;
        loop {
            let mu: Vec<Vec<f64>> = u.iter().map(|x| self.mass.matvec(x)).collect();
            let au: Vec<Vec<f64>> = u.iter().map(|x| self.diffusion.matvec(x)).collect();
            let mut res: Vec<Vec<f64>> = rhs.iter().map(|r| r.iter().map(|v| -v).collect()).collect();
            for (l, rl) in res.iter_mut().enumerate() {
                for m in 0..nb {
                    let (cm, am) = (c[l * nb + m], lin[l * nb + m]);
                    for i in 0..n_dof {
                        rl[i] += cm * mu[m][i] + am * au[m][i];
                    }
                }
            }
            let mut jacs = Vec::new();
            if !linear {
                for (q, phi) in nl_phi.iter().enumerate() {
                    let mut uq = vec![0.0; n_dof];
                    for (um, pm) in u.iter().zip(phi) {
                        for (a, v) in uq.iter_mut().zip(um) {
                            *a += pm * v;
                        }
                    }
                    let (rq, jq) = self.disc.nonlinear(&uq, &terms);
                    for (l, rl) in res.iter_mut().enumerate() {
                        let s = nl_w[q] * phi[l];
                        for (a, v) in rl.iter_mut().zip(&rq) {
                            *a += s * v;
                        }
                    }
                    jacs.push(jq);
                }
            }
            for rl in res.iter_mut() {
                for &d in constrained {
                    rl[d] = 0.0;
                }
            }
            let norm = res.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
            if !norm.is_finite() {
                return Err(Error::NewtonDivergence {
                    iterations: residuals.len(),
                    residual: norm,
                });
            }
            residuals.push(norm);
            let r_init = *r0.get_or_insert(norm);
            if norm <= self.options.abs_tol.max(self.options.rel_tol * r_init) {
                break;
            }
            if residuals.len() > self.options.max_iter {
                return Err(Error::NewtonDivergence {
                    iterations: self.options.max_iter,
                    residual: norm,
                });
            }

            system.zero();
            for l in 0..nb {
                for m in 0..nb {
                    system.add_block(l, m, c[l * nb + m], &self.mass);
                    system.add_block(l, m, lin[l * nb + m], &self.diffusion);
                    for (q, jq) in jacs.iter().enumerate() {
                        system.add_block(l, m, nl_w[q] * nl_phi[q][l] * nl_phi[q][m], jq);
                    }
                }
            }
            system.constrain(constrained);
            let lu = system.factor()?;
            let flat: Vec<f64> = res.concat();
            let du = lu.solve(&flat)?;
            for (m, um) in u.iter_mut().enumerate() {
                for (a, d) in um.iter_mut().zip(&du[m * n_dof..(m + 1) * n_dof]) {
                    *a -= d;
                }
            }
        }

        let block = if let Some(b) = &b {
            let mut out = vec![vec![0.0; n_dof]; nb];
            for (i, o) in out.iter_mut().enumerate() {
                for (m, vm) in u.iter().enumerate() {
                    let w = b[m * nb + i];
                    if w != 0.0 {
                        for (a, v) in o.iter_mut().zip(vm) {
                            *a += w * v;
                        }
                    }
                }
            }
            out
        } else {
            u
        };
        Ok((
            block,
            StepStats {
                interval: n,
                iterations: residuals.len(),
                residuals,
            },
        ))
    }
}

/// Solves interval `n` given the history already stored in `stepper`.
pub fn solve_time_step(stepper: &mut TimeStepper<'_>) -> Result<Vec<Vec<f64>>> {
    stepper.step()?;
    Ok(stepper.solution().blocks.last().expect("step recorded").clone())
}

/// Runs all intervals of `partition`, calling `observer` after each step.
pub fn run_simulation_with(
    problem: &ProblemSpec,
    partition: &TimePartition,
    disc: &dyn SpatialDiscretization,
    options: NewtonOptions,
    observer: &mut dyn FnMut(&DiscreteSolution),
) -> Result<DiscreteSolution> {
    let mut stepper = TimeStepper::new(problem, partition, disc, options)?;
    for _ in 0..partition.n_intervals() {
        stepper.step()?;
        observer(stepper.solution());
    }
    Ok(stepper.into_solution())
}

pub fn run_simulation(
    problem: &ProblemSpec,
    partition: &TimePartition,
    disc: &dyn SpatialDiscretization,
    options: NewtonOptions,
) -> Result<DiscreteSolution> {
    run_simulation_with(problem, partition, disc, options, &mut |_| {})
}
