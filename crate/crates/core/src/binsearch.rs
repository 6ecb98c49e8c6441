//! Binary search on the ratio guess, with the greedy subroutine as the
//! feasibility oracle.

use serde::{Deserialize, Serialize};

use crate::distribution::PurchaseDistribution;
use crate::error::SolveError;
use crate::greedy::{alg_subroutine, alg_subroutine_raw, PartialDistribution, Termination, World};
use crate::model::{ProblemConfig, StopTime};
use crate::ratio::sup_expected_cr;
use crate::scalar::Real;
use crate::tol;
use crate::verify::{structure_report, StructureReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolverKind {
    BinarySearch,
    Lp,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Greedy termination of the final run (binary search only).
    pub termination: Option<Termination>,
    pub clamp_count: usize,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveResult<R> {
    pub distribution: PurchaseDistribution<R>,
    /// Supremum of the expected ratio of `distribution`, recomputed.
    pub opt_estimate: R,
    pub opt_location: StopTime<R>,
    pub world: World,
    /// Halvings for the binary search, simplex pivots for the LP.
    pub iterations: usize,
    /// Final `(l, u)`; for the LP both ends are the optimal objective.
    pub bracket: (R, R),
    pub solver: SolverKind,
    pub diagnostics: Diagnostics,
    pub report: StructureReport<R>,
}

/// Initial lower end of the bracket, the unconstrained optimum.
pub fn classical_opt<R: Real>(a: R) -> R {
    let e = R::lit(std::f64::consts::E);
    e / (e - R::one() + a)
}

fn reaches_one<R: Real>(p: &PartialDistribution<R>) -> bool {
    p.total() >= R::one() - R::lit(tol::BRACKET)
}

/// Halves `[e/(e-1+a), 2-a]` until it is narrower than epsilon, then builds
/// the answer from the greedy run at the upper end.
pub fn binary_search<R: Real>(cfg: &ProblemConfig<R>) -> Result<SolveResult<R>, SolveError> {
    cfg.check_alignment()?;
    let mut notes = Vec::new();
    let mut l = classical_opt(cfg.a);
    let mut u = R::lit(2.0) - cfg.a;
    let mut at_u = alg_subroutine(cfg, u)?;
    if !reaches_one(&at_u) {
        return Err(SolveError::Bracket {
            upper: u.as_f64(),
            mass: at_u.total().as_f64(),
        });
    }
    if reaches_one(&alg_subroutine_raw(cfg, l)) {
        notes.push(format!(
            "greedy at the lower end {} already reaches mass 1; lower end widened to 1",
            l.as_f64()
        ));
        l = R::one();
    }
    let mut iterations = 0;
    let mut cap_probes = 0;
    while u - l > cfg.epsilon {
        let mid = (l + u) / R::lit(2.0);
        // a probe that runs into x_max has not reached mass 1 and counts as
        // below the optimum
        let p = alg_subroutine_raw(cfg, mid);
        if p.termination == Termination::CapHit {
            cap_probes += 1;
        }
        if reaches_one(&p) {
            u = mid;
            at_u = p;
        } else {
            l = mid;
        }
        iterations += 1;
    }
    if cap_probes > 0 {
        notes.push(format!(
            "{cap_probes} probe(s) ran past x_max = {} and were classified as below the optimum",
            cfg.x_max.as_f64()
        ));
    }
    let distribution = truncate(&at_u)?;
    let world = if at_u.termination == Termination::WorldOneExit {
        World::World1
    } else {
        World::World2
    };
    let (opt_estimate, opt_location) = sup_expected_cr(&distribution, cfg.a)?;
    let report = structure_report(&distribution, cfg, opt_estimate);
    Ok(SolveResult {
        distribution,
        opt_estimate,
        opt_location,
        world,
        iterations,
        bracket: (l, u),
        solver: SolverKind::BinarySearch,
        diagnostics: Diagnostics {
            termination: Some(at_u.termination),
            clamp_count: at_u.clamp_count,
            notes,
        },
        report,
    })
}

/// Turns a greedy output with total mass at least 1 into a distribution.
///
/// A world-1 exit keeps the finite masses and puts the remainder at
/// infinity. Otherwise mass is chopped at the first point where the running
/// total reaches 1 and zeroed after it.
pub fn truncate<R: Real>(
    p: &PartialDistribution<R>,
) -> Result<PurchaseDistribution<R>, SolveError> {
    let one = R::one();
    let finite = p.finite_total();
    if p.termination == Termination::WorldOneExit {
        if finite > one + R::lit(tol::MASS) {
            return Err(SolveError::Truncate {
                total: finite.as_f64(),
            });
        }
        let rest = (one - finite).max(R::zero());
        return Ok(PurchaseDistribution::new(p.tau, p.masses.clone(), rest)?);
    }
    let slack = one - R::lit(tol::BRACKET);
    let mut masses = p.masses.clone();
    let mut cum = R::zero();
    let mut cut = None;
    for (i, m) in masses.iter_mut().enumerate() {
        if cut.is_some() {
            *m = R::zero();
            continue;
        }
        if cum + *m >= slack {
            *m = (one - cum).max(R::zero());
            cut = Some(i);
        }
        cum += *m;
    }
    if cut.is_none() {
        return Err(SolveError::Truncate {
            total: p.total().as_f64(),
        });
    }
    Ok(PurchaseDistribution::new(p.tau, masses, R::zero())?)
}
