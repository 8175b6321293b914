//! Single manufactured runs, the refinement ladder and its CSV output.

use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;

use gbhe_core::analysis::{error_norms, ConvergenceReport, ConvergenceRow, ErrorNorms};
use gbhe_core::discretization::SpatialDiscretization;
use gbhe_core::memory::KernelSpec;
use gbhe_core::mesh::Mesh;
use gbhe_core::space_dg::DgSpace;
use gbhe_core::space_fem::{BoundaryCondition, ConformingScheme, FunctionSpace};
use gbhe_core::timestepper::{run_simulation, DiscreteSolution, NewtonOptions, ProblemSpec, TimePartition};
use thiserror::Error;

use crate::cases::{CaseName, ManufacturedCase, ModelParams};
use crate::config::{ConfigError, RunConfig, SpaceScheme};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("solver failure: {0}")]
    Solver(#[from] gbhe_core::Error),
    #[error("output error: {0}")]
    Output(String),
}

impl HarnessError {
    /// Process exit code: 2 for configuration problems, 3 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            _ => 3,
        }
    }
}

impl From<std::io::Error> for HarnessError {
    fn from(e: std::io::Error) -> Self {
        HarnessError::Output(e.to_string())
    }
}

impl From<csv::Error> for HarnessError {
    fn from(e: csv::Error) -> Self {
        HarnessError::Output(e.to_string())
    }
}

pub fn model_params(cfg: &RunConfig) -> ModelParams {
    ModelParams {
        alpha: cfg.alpha,
        beta: cfg.beta,
        gamma: cfg.gamma,
        delta: cfg.delta,
        nu: cfg.nu,
        eta: cfg.eta,
        caputo_mu: cfg.caputo_mu,
    }
}

pub fn build_mesh(case: CaseName, n: usize) -> Result<Arc<Mesh>, HarnessError> {
    let mesh = match ManufacturedCase::new(case).dim() {
        1 => Mesh::interval(n, 0.0, 1.0)?,
        _ => Mesh::unit_square_triangulation(n, [0.0, 1.0], [0.0, 1.0])?,
    };
    Ok(Arc::new(mesh))
}

pub fn build_discretization(cfg: &RunConfig, mesh: Arc<Mesh>) -> Result<Box<dyn SpatialDiscretization>, HarnessError> {
    Ok(match cfg.space_scheme {
        SpaceScheme::Cg => Box::new(ConformingScheme::new(
            FunctionSpace::continuous(mesh, cfg.space_degree)?,
            BoundaryCondition::Dirichlet0,
        )?),
        SpaceScheme::Dg => Box::new(DgSpace::new(mesh, cfg.space_degree, cfg.penalty)?),
    })
}

pub fn build_problem(cfg: &RunConfig) -> Result<ProblemSpec, HarnessError> {
    let mut kernel = if cfg.eta != 0.0 {
        KernelSpec::power(cfg.sigma, cfg.eta)?
    } else {
        KernelSpec::none()
    };
    if cfg.caputo_mu != 0.0 {
        kernel = kernel.with_caputo(cfg.caputo_mu)?;
    }
    let case = ManufacturedCase::new(cfg.case);
    let params = model_params(cfg);
    Ok(ProblemSpec {
        alpha: cfg.alpha,
        beta: cfg.beta,
        gamma: cfg.gamma,
        delta: cfg.delta,
        nu: cfg.nu,
        kernel,
        forcing: (cfg.case != CaseName::Zero).then(|| {
            Arc::new(move |x, t| case.forcing(&params, x, t)) as Arc<gbhe_core::timestepper::Forcing>
        }),
        initial: Arc::new(move |x| case.value(x, 0.0)),
    })
}

pub fn newton_options(cfg: &RunConfig) -> NewtonOptions {
    NewtonOptions {
        abs_tol: cfg.newton_abs_tol,
        rel_tol: cfg.newton_rel_tol,
        max_iter: cfg.newton_max_iter,
        ..Default::default()
    }
}

/// Result of one run at one refinement level.
pub struct RunOutcome {
    pub row: ConvergenceRow,
    pub solution: DiscreteSolution,
    pub discretization: Box<dyn SpatialDiscretization>,
}

pub fn solve(cfg: &RunConfig) -> Result<RunOutcome, HarnessError> {
    cfg.validate()?;
    let mesh = build_mesh(cfg.case, cfg.mesh_n)?;
    let disc = build_discretization(cfg, mesh)?;
    let problem = build_problem(cfg)?;
    let partition = TimePartition::uniform(cfg.t_final, cfg.effective_time_steps(), cfg.time_degree)?;
    let solution = run_simulation(&problem, &partition, disc.as_ref(), newton_options(cfg))?;
    let errors = error_norms(&solution, disc.as_ref(), &ManufacturedCase::new(cfg.case));
    let row = ConvergenceRow {
        mesh_n: cfg.mesh_n,
        dof: (cfg.time_degree + 1) * disc.n_dof(),
        h: 1.0 / cfg.mesh_n as f64,
        k: partition.max_step(),
        p: cfg.time_degree,
        r: cfg.space_degree,
        errors,
        newton_iterations: solution.total_newton_iterations(),
    };
    Ok(RunOutcome {
        row,
        solution,
        discretization: disc,
    })
}

/// Runs the ladder with `time_steps = mesh_n` unless the configuration
/// fixes the step count.
pub fn convergence(cfg: &RunConfig, meshes: &[usize]) -> Result<ConvergenceReport, HarnessError> {
    let mut rows = Vec::with_capacity(meshes.len());
    for &n in meshes {
        let c = RunConfig { mesh_n: n, ..cfg.clone() };
        rows.push(solve(&c)?.row);
    }
    Ok(ConvergenceReport { rows })
}

fn fmt_rate(r: Option<f64>) -> String {
    r.map(|v| format!("{v:.4}")).unwrap_or_default()
}

/// Writes the ladder as CSV; DG columns are added when `with_dg` is set.
pub fn write_convergence_csv<W: Write>(report: &ConvergenceReport, with_dg: bool, out: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["mesh", "dof", "l2_error", "l2_rate", "h1_error", "h1_rate", "h1semi_error", "h1semi_rate"];
    if with_dg {
        header.extend(["dg_error", "dg_rate"]);
    }
    w.write_record(&header)?;
    let l2 = report.rates(|e| e.l2_final);
    let h1 = report.rates(|e| e.h1_final);
    let semi = report.rates(|e| e.h1_semi_final);
    let dg = report.rates(|e| e.dg_final.unwrap_or(0.0));
    for (i, row) in report.rows.iter().enumerate() {
        let e: &ErrorNorms = &row.errors;
        let mut rec = vec![
            row.mesh_n.to_string(),
            row.dof.to_string(),
            format!("{:.6e}", e.l2_final),
            fmt_rate(l2[i]),
            format!("{:.6e}", e.h1_final),
            fmt_rate(h1[i]),
            format!("{:.6e}", e.h1_semi_final),
            fmt_rate(semi[i]),
        ];
        if with_dg {
            rec.push(format!("{:.6e}", e.dg_final.unwrap_or(0.0)));
            rec.push(fmt_rate(dg[i]));
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Final-time field at the dof coordinates, as `x,y,u` rows.
pub fn write_final_field<W: Write>(outcome: &RunOutcome, out: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "y", "u"])?;
    let u = outcome.solution.final_trace();
    for (x, v) in outcome.discretization.space().dof_coords().iter().zip(&u) {
        w.write_record(&[format!("{:.10e}", x[0]), format!("{:.10e}", x[1]), format!("{v:.10e}")])?;
    }
    w.flush()?;
    Ok(())
}

/// Default output location for a run, inside `dir`.
pub fn output_path(cfg: &RunConfig, dir: Option<&std::path::Path>, default_name: &str) -> PathBuf {
    match (&cfg.output, dir) {
        (Some(p), Some(d)) if p.is_relative() => d.join(p),
        (Some(p), _) => p.clone(),
        (None, Some(d)) => d.join(default_name),
        (None, None) => PathBuf::from(default_name),
    }
}
