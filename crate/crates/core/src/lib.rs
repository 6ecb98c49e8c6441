//! Two-slope ski rental under a tail-risk constraint: a greedy binary-search
//! solver, an exact LP, and a verifier.
//!
//! Everything is generic over [`Real`] (`f32` or `f64`); the aliases below fix
//! the scalar to `f64`.

pub mod badinterval;
pub mod binsearch;
pub mod distribution;
pub mod error;
pub mod greedy;
pub mod lp;
pub mod model;
pub mod ratio;
pub mod scalar;
pub mod tol;
pub mod verify;

pub use badinterval::{bad_interval, mass_in, BadInterval};
pub use binsearch::{binary_search, classical_opt, truncate, Diagnostics, SolverKind};
pub use error::{ConfigError, DistributionError, DomainError, LpError, SolveError};
pub use greedy::{
    alg_subroutine, alg_subroutine_raw, f_one_plus_tau, greedy_with_opt, greedy_with_opt_tol,
    world_check, Termination, World,
};
pub use lp::{build_lp, solve_lp, to_lp_format, DenseSimplex, Formulation, LpBackend, PivotRule};
pub use model::{boundaries, build_grid, regime_threshold, StopTime, TimeGrid};
pub use ratio::{alpha, expected_cr, partial_cr, sup_expected_cr};
pub use scalar::Real;
pub use verify::{compare_solvers, structure_report, verify_cr, verify_feasibility};

pub type ProblemConfig = model::ProblemConfig<f64>;
pub type PurchaseDistribution = distribution::PurchaseDistribution<f64>;
pub type RegimeBoundaries = model::RegimeBoundaries<f64>;
pub type PartialDistribution = greedy::PartialDistribution<f64>;
pub type SolveResult = binsearch::SolveResult<f64>;
pub type StructureReport = verify::StructureReport<f64>;
pub type LpInstance = lp::LpInstance<f64>;
pub type LinearProgram = lp::LinearProgram<f64>;
pub type GapReport = verify::GapReport<f64>;
