//! Finite-n correlation kernels of unitary ensembles near a singular exterior
//! point of the equilibrium measure, and their comparison with GUE kernels.

mod error;
mod poly;

pub mod critical;
pub mod equilibrium;
pub mod experiments;
pub mod gue;
pub mod orthopoly;
pub mod potential;
pub mod quad;
pub mod report;

pub use critical::{detect_singular, make_scaling, ScalingParams};
pub use equilibrium::{solve, solve_with, EquilibriumData, SolveOptions};
pub use error::{Error, Result};
pub use experiments::{ComparisonReport, GridSpec, KernelGrid, LambdaFit, SweepTable};
pub use gue::PsiMatrix;
pub use orthopoly::{build_recurrence, RecurrenceTable, WeightedValue};
pub use potential::{make_eynard, Potential, PotentialConfig};
