use std::sync::Arc;

use crate::mesh::Point;
use crate::space_fem::FunctionSpace;
use crate::sparse::{SparseMatrix, SparsityPattern};

/// Coefficients of the nonlinear part `alpha B(u) - beta c(u)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonlinearTerms {
    pub alpha: f64,
    pub beta: f64,
    pub delta: u32,
    pub gamma: f64,
}

/// Spatial half of the space–time scheme, as seen by the time stepper.
pub trait SpatialDiscretization: Send + Sync {
    fn space(&self) -> &FunctionSpace;

    fn n_dof(&self) -> usize {
        self.space().n_dof()
    }

    fn pattern(&self) -> Arc<SparsityPattern> {
        self.space().pattern().clone()
    }

    fn mass(&self) -> SparseMatrix {
        self.space().assemble_mass()
    }

    /// Matrix of the diffusion form: the stiffness matrix or `a_DG`.
    fn diffusion(&self) -> SparseMatrix;

    /// Residual of `alpha B(u) - beta c(u)` tested against every basis
    /// function, with its Jacobian.
    fn nonlinear(&self, coeffs: &[f64], terms: &NonlinearTerms) -> (Vec<f64>, SparseMatrix);

    /// Dofs held fixed at zero (strong homogeneous Dirichlet data).
    fn constrained_dofs(&self) -> &[usize];

    /// Squared energy norm: the `H^1` seminorm or the DG norm.
    fn energy_norm_sq(&self, coeffs: &[f64]) -> f64;

    /// Squared `H^1`-type error against an exact gradient: the (broken)
    /// gradient error plus, for DG, the penalty-weighted jumps.
    fn energy_error_sq(&self, coeffs: &[f64], grad: &(dyn Fn(Point) -> Point + Sync)) -> f64;

    fn interpolate(&self, f: &dyn Fn(Point) -> f64) -> Vec<f64> {
        let mut v = self.space().interpolate(f);
        for &d in self.constrained_dofs() {
            v[d] = 0.0;
        }
        v
    }
}
