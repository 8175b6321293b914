//! Solver library for generalized Burgers–Huxley equations with weakly
//! singular memory,
//!
//! ```text
//! u_t + alpha u^delta sum_i du/dx_i - nu Lap u - eta int_0^t K(t-s) Lap u(s) ds
//!     = beta u (1 - u^delta)(u^delta - gamma) + f,
//! ```
//!
//! discretized by hp discontinuous Galerkin time stepping combined with either
//! conforming Lagrange finite elements or symmetric interior penalty DG in
//! space. A Caputo time-fractional variant replaces `u_t` by `d^mu u / dt^mu`.

pub mod analysis;
pub mod discretization;
pub mod error;
pub mod memory;
pub mod mesh;
pub mod polybasis;
pub mod space_dg;
pub mod space_fem;
pub mod sparse;
pub mod timestepper;

pub use error::{Error, Result};
