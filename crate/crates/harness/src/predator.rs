//! Prey-predator system with an Allee effect, optional memory in both
//! equations, on `[0, L]^2` with natural boundary conditions:
//!
//! ```text
//! u_t - Lap u       - eta K * Lap u = gamma u (u - beta)(1 - u) - u v / (1 + alpha u)
//! v_t - eps Lap v   - eta K * Lap v = u v / (1 + alpha u) - delta v
//! ```
//!
//! Piecewise-constant DG in time, conforming P1 in space.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use gbhe_core::memory::{moment_block, KernelSpec};
use gbhe_core::mesh::{Mesh, Point};
use gbhe_core::space_fem::FunctionSpace;
use gbhe_core::sparse::{BlockSystem, SparseMatrix};
use gbhe_core::timestepper::TimePartition;
use rayon::prelude::*;

use crate::config::PredatorConfig;
use crate::run::HarnessError;

/// One line of the time-series CSV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesRow {
    pub t: f64,
    pub min_u: f64,
    pub max_u: f64,
    pub int_u: f64,
    pub min_v: f64,
    pub max_v: f64,
    pub int_v: f64,
}

#[derive(Debug, Clone)]
pub struct PredatorOutcome {
    pub series: Vec<SeriesRow>,
    pub snapshots: Vec<PathBuf>,
    pub final_u: Vec<f64>,
    pub final_v: Vec<f64>,
    pub newton_iterations: usize,
}

/// Pointwise reaction terms and their partial derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reaction {
    pub ru: f64,
    pub rv: f64,
    pub ru_u: f64,
    pub ru_v: f64,
    pub rv_u: f64,
    pub rv_v: f64,
}

pub fn reaction(cfg: &PredatorConfig, u: f64, v: f64) -> Reaction {
    let d = 1.0 + cfg.alpha * u;
    let h = u / d;
    let h_u = 1.0 / (d * d);
    let allee = cfg.gamma * u * (u - cfg.beta) * (1.0 - u);
    let allee_u = cfg.gamma * ((u - cfg.beta) * (1.0 - u) + u * (1.0 - u) - u * (u - cfg.beta));
    Reaction {
        ru: allee - h * v,
        rv: h * v - cfg.delta * v,
        ru_u: allee_u - h_u * v,
        ru_v: -h,
        rv_u: h_u * v,
        rv_v: h - cfg.delta,
    }
}

/// `p` on the square of half-width `w` centred at `c`, zero elsewhere.
fn indicator(x: Point, c: Point, w: f64, p: f64) -> f64 {
    if (x[0] - c[0]).abs() <= w && (x[1] - c[1]).abs() <= w {
        p
    } else {
        0.0
    }
}

pub fn initial_prey(cfg: &PredatorConfig, x: Point) -> f64 {
    let c = 0.5 * cfg.length;
    indicator(x, [c, c], cfg.half_width, cfg.p)
}

pub fn initial_predator(cfg: &PredatorConfig, x: Point) -> f64 {
    let c = 0.5 * cfg.length;
    indicator(x, [c + cfg.a, c + cfg.b], cfg.half_width, cfg.q)
}

/// Lumped-mass `L^2` projection of a discontinuous function, integrated on
/// a uniform `m x m` subdivision of every element. Preserves the integral
/// and the sign of the data.
pub fn lumped_projection(space: &FunctionSpace, lumped: &[f64], f: &(dyn Fn(Point) -> f64 + Sync), m: usize) -> Vec<f64> {
    let tab = space.tabulate(2);
    let nloc = space.n_local();
    let h = 1.0 / m as f64;
    let locals: Vec<Vec<f64>> = (0..space.mesh().n_elements())
        .into_par_iter()
        .map(|e| {
            let geo = space.geometry(e);
            let mut b = vec![0.0; nloc];
            for i in 0..m {
                for j in 0..m - i {
                    // lower and upper sub-triangles of cell (i, j)
                    let subs: [([f64; 2], [[f64; 2]; 2]); 2] = [
                        ([i as f64 * h, j as f64 * h], [[h, 0.0], [0.0, h]]),
                        ([(i + 1) as f64 * h, (j + 1) as f64 * h], [[-h, 0.0], [0.0, -h]]),
                    ];
                    let n_sub = if i + j + 1 < m { 2 } else { 1 };
                    for (o, jac) in subs.iter().take(n_sub) {
                        for (q, w) in tab.points.iter().zip(&tab.weights) {
                            let xh = [o[0] + jac[0][0] * q[0], o[1] + jac[1][1] * q[1]];
                            let fx = f(geo.to_physical(xh));
                            if fx == 0.0 {
                                continue;
                            }
                            let v = space.basis().values(xh);
                            let s = w * h * h * geo.abs_det() * fx;
                            for (ba, va) in b.iter_mut().zip(&v) {
                                *ba += s * va;
                            }
                        }
                    }
                }
            }
            b
        })
        .collect();
    let mut rhs = vec![0.0; space.n_dof()];
    for (e, b) in locals.iter().enumerate() {
        for (a, &i) in space.element_dofs(e).iter().enumerate() {
            rhs[i] += b[a];
        }
    }
    rhs.iter().zip(lumped).map(|(b, l)| b / l).collect()
}

struct ReactionAssembly {
    ru: Vec<f64>,
    rv: Vec<f64>,
    jac: [SparseMatrix; 4],
}

fn assemble_reaction(space: &FunctionSpace, cfg: &PredatorConfig, u: &[f64], v: &[f64]) -> ReactionAssembly {
    let tab = space.tabulate(4);
    let nloc = space.n_local();
    let locals: Vec<(Vec<f64>, Vec<f64>, Vec<[f64; 4]>)> = (0..space.mesh().n_elements())
        .into_par_iter()
        .map(|e| {
            let geo = space.geometry(e);
            let dofs = space.element_dofs(e);
            let mut ru = vec![0.0; nloc];
            let mut rv = vec![0.0; nloc];
            let mut jac = vec![[0.0; 4]; nloc * nloc];
            for q in 0..tab.n_points() {
                let w = tab.weights[q] * geo.abs_det();
                let phi = tab.values_at(q);
                let (mut uq, mut vq) = (0.0, 0.0);
                for a in 0..nloc {
                    uq += u[dofs[a]] * phi[a];
                    vq += v[dofs[a]] * phi[a];
                }
                let r = reaction(cfg, uq, vq);
                for a in 0..nloc {
                    ru[a] += w * r.ru * phi[a];
                    rv[a] += w * r.rv * phi[a];
                    for b in 0..nloc {
                        let s = w * phi[a] * phi[b];
                        let j = &mut jac[a * nloc + b];
                        j[0] += s * r.ru_u;
                        j[1] += s * r.ru_v;
                        j[2] += s * r.rv_u;
                        j[3] += s * r.rv_v;
                    }
                }
            }
            (ru, rv, jac)
        })
        .collect();
    let n = space.n_dof();
    let mut out = ReactionAssembly {
        ru: vec![0.0; n],
        rv: vec![0.0; n],
        jac: std::array::from_fn(|_| SparseMatrix::zeros(space.pattern().clone())),
    };
    let mut local = vec![0.0; nloc * nloc];
    for (e, (ru, rv, jac)) in locals.iter().enumerate() {
        let dofs = space.element_dofs(e);
        for (a, &i) in dofs.iter().enumerate() {
            out.ru[i] += ru[a];
            out.rv[i] += rv[a];
        }
        for c in 0..4 {
            for (l, j) in local.iter_mut().zip(jac) {
                *l = j[c];
            }
            out.jac[c].add_local(dofs, &local);
        }
    }
    out
}

/// Reaction evaluated at the nodes and weighted with the lumped mass.
fn assemble_reaction_nodal(space: &FunctionSpace, cfg: &PredatorConfig, lumped: &[f64], u: &[f64], v: &[f64]) -> ReactionAssembly {
    let n = space.n_dof();
    let mut out = ReactionAssembly {
        ru: vec![0.0; n],
        rv: vec![0.0; n],
        jac: std::array::from_fn(|_| SparseMatrix::zeros(space.pattern().clone())),
    };
    for i in 0..n {
        let r = reaction(cfg, u[i], v[i]);
        let m = lumped[i];
        out.ru[i] = m * r.ru;
        out.rv[i] = m * r.rv;
        for (c, d) in [r.ru_u, r.ru_v, r.rv_u, r.rv_v].into_iter().enumerate() {
            out.jac[c].add(i, i, m * d);
        }
    }
    out
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Values at the `(n + 1)^2` grid vertices, row-major with `y` outermost.
pub fn grid_values(space: &FunctionSpace, cfg: &PredatorConfig, coeffs: &[f64]) -> Vec<f64> {
    let n = cfg.mesh_n;
    let h = cfg.length / n as f64;
    let mut grid = vec![0.0; (n + 1) * (n + 1)];
    for (x, c) in space.dof_coords().iter().zip(coeffs) {
        let i = (x[0] / h).round() as usize;
        let j = (x[1] / h).round() as usize;
        grid[j * (n + 1) + i] = *c;
    }
    grid
}

pub fn write_snapshot<W: Write>(grid: &[f64], n: usize, mut w: W) -> std::io::Result<()> {
    writeln!(w, "{} {}", n, n)?;
    for row in grid.chunks(n) {
        let line: Vec<String> = row.iter().map(|v| format!("{v:.8e}")).collect();
        writeln!(w, "{}", line.join(" "))?;
    }
    Ok(())
}

pub fn write_series<W: Write>(series: &[SeriesRow], out: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "min_u", "max_u", "int_u", "min_v", "max_v", "int_v"])?;
    for r in series {
        w.write_record(
            [r.t, r.min_u, r.max_u, r.int_u, r.min_v, r.max_v, r.int_v]
                .iter()
                .map(|x| format!("{x:.10e}")),
        )?;
    }
    w.flush()?;
    Ok(())
}

fn stats(t: f64, u: &[f64], v: &[f64], lumped: &[f64]) -> SeriesRow {
    let min = |x: &[f64]| x.iter().copied().fold(f64::INFINITY, f64::min);
    let max = |x: &[f64]| x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let int = |x: &[f64]| x.iter().zip(lumped).map(|(a, b)| a * b).sum::<f64>();
    SeriesRow {
        t,
        min_u: min(u),
        max_u: max(u),
        int_u: int(u),
        min_v: min(v),
        max_v: max(v),
        int_v: int(v),
    }
}

/// Runs the system. With `out_dir`, writes `series.csv` and grid snapshots
/// `prey_NNNNN.txt` / `predator_NNNNN.txt` there.
pub fn run_predator(cfg: &PredatorConfig, out_dir: Option<&Path>) -> Result<PredatorOutcome, HarnessError> {
    cfg.validate()?;
    let mesh = Arc::new(Mesh::unit_square_triangulation(cfg.mesh_n, [0.0, cfg.length], [0.0, cfg.length])?);
    let space = FunctionSpace::continuous(mesh, 1)?;
    let n = space.n_dof();
    let consistent = space.assemble_mass();
    let stiff = space.assemble_stiffness();
    // row sums of M give the integral of a discrete function
    let lumped = consistent.matvec(&vec![1.0; n]);
    let mass = if cfg.lumped {
        let mut m = SparseMatrix::zeros(space.pattern().clone());
        for (i, l) in lumped.iter().enumerate() {
            m.add(i, i, *l);
        }
        m
    } else {
        consistent
    };

    let mut u = lumped_projection(&space, &lumped, &|x| initial_prey(cfg, x), 16);
    let mut v = lumped_projection(&space, &lumped, &|x| initial_predator(cfg, x), 16);

    let n_steps = cfg.n_steps();
    let k = cfg.t_final / n_steps as f64;
    let partition = TimePartition::uniform(cfg.t_final, n_steps, 0)?;
    // weights depend only on n - j on a uniform partition
    let weights: Vec<f64> = if cfg.eta > 0.0 {
        let kernel = KernelSpec::power(cfg.sigma, cfg.eta)?;
        (1..=n_steps)
            .into_par_iter()
            .map(|d| moment_block(&partition, d, 1, &kernel).map(|b| b.get(0, 0)))
            .collect::<Result<_, _>>()?
    } else {
        Vec::new()
    };
    let eta_u = cfg.eta;
    let eta_v = if cfg.memory_prey_only { 0.0 } else { cfg.eta };
    let w0 = weights.first().copied().unwrap_or(0.0);
    let diff_u = k + eta_u * w0;
    let diff_v = k * cfg.epsilon + eta_v * w0;

    if let Some(d) = out_dir {
        std::fs::create_dir_all(d)?;
    }
    let mut snapshots = Vec::new();
    let mut snapshot = |step: usize, u: &[f64], v: &[f64]| -> Result<(), HarnessError> {
        let Some(d) = out_dir else { return Ok(()) };
        for (name, f) in [("prey", u), ("predator", v)] {
            let path = d.join(format!("{name}_{step:05}.txt"));
            let grid = grid_values(&space, cfg, f);
            write_snapshot(&grid, cfg.mesh_n + 1, BufWriter::new(File::create(&path)?))?;
            snapshots.push(path);
        }
        Ok(())
    };

    let mut series = vec![stats(0.0, &u, &v, &lumped)];
    snapshot(0, &u, &v)?;

    let mut hist_u: Vec<Vec<f64>> = Vec::new();
    let mut hist_v: Vec<Vec<f64>> = Vec::new();
    let mut system = BlockSystem::new(space.pattern().clone(), 2);
    let mut newton_iterations = 0;
    for step in 1..=n_steps {
        // eta sum_{j < n} w_{n - j} A U^j
        let mut mem_u = vec![0.0; n];
        let mut mem_v = vec![0.0; n];
        if cfg.eta > 0.0 {
            for (j, (au, av)) in hist_u.iter().zip(&hist_v).enumerate() {
                let w = weights[step - 1 - j];
                for i in 0..n {
                    mem_u[i] += eta_u * w * au[i];
                    mem_v[i] += eta_v * w * av[i];
                }
            }
        }
        let mu_prev = mass.matvec(&u);
        let mv_prev = mass.matvec(&v);
        let (mut un, mut vn) = (u.clone(), v.clone());
        let mut r0 = None;
        let mut converged = false;
        let mut last = f64::NAN;
        for it in 1..=cfg.newton_max_iter {
            newton_iterations += 1;
            let rx = if cfg.lumped {
                assemble_reaction_nodal(&space, cfg, &lumped, &un, &vn)
            } else {
                assemble_reaction(&space, cfg, &un, &vn)
            };
            let (mu, au) = (mass.matvec(&un), stiff.matvec(&un));
            let (mv, av) = (mass.matvec(&vn), stiff.matvec(&vn));
            let mut res = vec![0.0; 2 * n];
            for i in 0..n {
                res[i] = mu[i] - mu_prev[i] + diff_u * au[i] + mem_u[i] - k * rx.ru[i];
                res[n + i] = mv[i] - mv_prev[i] + diff_v * av[i] + mem_v[i] - k * rx.rv[i];
            }
            last = norm(&res);
            if !last.is_finite() {
                break;
            }
            let r0v = *r0.get_or_insert(last);
            if last <= cfg.newton_abs_tol.max(cfg.newton_rel_tol * r0v) {
                converged = true;
                break;
            }
            if it == cfg.newton_max_iter {
                break;
            }
            system.zero();
            system.add_block(0, 0, 1.0, &mass);
            system.add_block(0, 0, diff_u, &stiff);
            system.add_block(0, 0, -k, &rx.jac[0]);
            system.add_block(0, 1, -k, &rx.jac[1]);
            system.add_block(1, 0, -k, &rx.jac[2]);
            system.add_block(1, 1, 1.0, &mass);
            system.add_block(1, 1, diff_v, &stiff);
            system.add_block(1, 1, -k, &rx.jac[3]);
            let delta = system.factor()?.solve(&res)?;
            for i in 0..n {
                un[i] -= delta[i];
                vn[i] -= delta[n + i];
            }
        }
        if !converged {
            return Err(gbhe_core::Error::StepFailed {
                interval: step,
                source: Box::new(gbhe_core::Error::NewtonDivergence {
                    iterations: cfg.newton_max_iter,
                    residual: last,
                }),
            }
            .into());
        }
        u = un;
        v = vn;
        if cfg.eta > 0.0 {
            hist_u.push(stiff.matvec(&u));
            hist_v.push(stiff.matvec(&v));
        }
        series.push(stats(partition.nodes()[step], &u, &v, &lumped));
        let due = cfg.snapshot_every > 0 && step % cfg.snapshot_every == 0;
        if due || step == n_steps {
            snapshot(step, &u, &v)?;
        }
    }

    if let Some(d) = out_dir {
        write_series(&series, BufWriter::new(File::create(d.join("series.csv"))?))?;
    }
    Ok(PredatorOutcome {
        series,
        snapshots,
        final_u: u,
        final_v: v,
        newton_iterations,
    })
}
