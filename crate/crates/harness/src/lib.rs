//! Manufactured-solution studies and the prey-predator application built on
//! `gbhe-core`.

pub mod cases;
pub mod config;
pub mod predator;
pub mod run;

pub use cases::{CaseName, ManufacturedCase, ModelParams};
pub use config::{ConfigError, PredatorConfig, RunConfig, SpaceScheme};
pub use run::HarnessError;
