//! Exact optimization over the grid `(0, L_b]` plus infinity.

mod export;
mod instance;
mod program;
mod simplex;

pub use export::to_lp_format;
pub use instance::{build_lp, Formulation, LpInstance, RowKind};
pub use program::{Constraint, LinearProgram, LpSolution, Relation};
pub use simplex::{DenseSimplex, PivotRule};

use crate::binsearch::{Diagnostics, SolveResult, SolverKind};
use crate::distribution::PurchaseDistribution;
use crate::error::{LpError, SolveError};
use crate::greedy::world_check;
use crate::ratio::sup_expected_cr;
use crate::scalar::Real;
use crate::tol;
use crate::verify::structure_report;

/// A linear-programming engine.
pub trait LpBackend<R> {
    fn name(&self) -> &str;

    /// The algebraic form this engine handles best.
    fn formulation(&self) -> Formulation;

    fn solve(&self, lp: &LinearProgram<R>) -> Result<LpSolution<R>, LpError>;
}

impl<R, B: LpBackend<R> + ?Sized> LpBackend<R> for &B {
    fn name(&self) -> &str {
        (**self).name()
    }

    fn formulation(&self) -> Formulation {
        (**self).formulation()
    }

    fn solve(&self, lp: &LinearProgram<R>) -> Result<LpSolution<R>, LpError> {
        (**self).solve(lp)
    }
}

/// Entries of `[-slack, 0)` from solver round-off are set to zero.
const NEGATIVE_SLACK: f64 = 1e-9;

/// Solves the instance and maps the primal solution back to a distribution.
pub fn solve_lp<R: Real, B: LpBackend<R> + ?Sized>(
    instance: &LpInstance<R>,
    backend: &B,
) -> Result<SolveResult<R>, SolveError> {
    let cfg = &instance.config;
    let lp = instance.materialize(backend.formulation());
    let sol = backend.solve(&lp)?;
    let n = instance.count();
    let clean = |v: R| -> Result<R, LpError> {
        if v >= R::zero() {
            Ok(v)
        } else if v >= -R::lit(NEGATIVE_SLACK) {
            Ok(R::zero())
        } else {
            Err(LpError::Solution(format!("negative mass {}", v.as_f64())))
        }
    };
    let masses = sol.values[..n]
        .iter()
        .map(|&v| clean(v))
        .collect::<Result<Vec<_>, _>>()?;
    let mass_inf = clean(sol.values[instance.inf_col()])?;
    let lambda = sol.values[instance.lambda_col()];
    let distribution = PurchaseDistribution::new(cfg.tau, masses, mass_inf)
        .map_err(|e| LpError::Solution(e.to_string()))?;
    let (opt_estimate, opt_location) = sup_expected_cr(&distribution, cfg.a)?;
    if (opt_estimate - lambda).abs() > R::lit(tol::CR_BOUND) {
        return Err(LpError::Solution(format!(
            "objective {} but the distribution's worst ratio is {}",
            lambda.as_f64(),
            opt_estimate.as_f64()
        ))
        .into());
    }
    let report = structure_report(&distribution, cfg, lambda);
    let mut notes = vec![format!(
        "{}: {} columns, {} rows, {} nonzeros",
        backend.name(),
        lp.num_vars(),
        lp.rows.len(),
        lp.nonzeros()
    )];
    let k1 = cfg.index_of_one().min(n);
    let world = match world_check(&distribution.masses[..k1], lambda, cfg) {
        Ok(w) => w,
        Err(e) => {
            notes.push(format!("world check failed ({e}); using the mass layout"));
            report.world
        }
    };
    Ok(SolveResult {
        distribution,
        opt_estimate,
        opt_location,
        world,
        iterations: sol.iterations,
        bracket: (lambda, lambda),
        solver: SolverKind::Lp,
        diagnostics: Diagnostics {
            termination: None,
            clamp_count: 0,
            notes,
        },
        report,
    })
}
