//! Independent checks on a purchase distribution: feasibility, ratio bound,
//! structure diagnostics, and the two-solver comparison.

use serde::{Deserialize, Serialize};

use crate::badinterval::{bad_interval, BadInterval};
use crate::binsearch::{binary_search, SolveResult};
use crate::distribution::PurchaseDistribution;
use crate::error::SolveError;
use crate::greedy::World;
use crate::lp::{build_lp, solve_lp, LpBackend};
use crate::model::{ceil_index, ProblemConfig, StopTime};
use crate::ratio::{sup_of, CrEvaluator, PrefixSums};
use crate::scalar::Real;
use crate::tol;

/// Worst value of a check and where it occurs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Check<R> {
    pub pass: bool,
    pub worst: R,
    pub at: StopTime<R>,
}

/// Bad-interval mass at every grid stop time through `max(K, L5/tau + 1)`
/// and at infinity. `worst` is the largest `mass - delta`.
pub fn verify_feasibility<R: Real>(
    f: &PurchaseDistribution<R>,
    cfg: &ProblemConfig<R>,
) -> Check<R> {
    let sums = PrefixSums::of(f);
    let l5 = cfg.boundaries().l5;
    let end = f.len().max(ceil_index(l5, cfg.tau) + 1);
    let mut worst = (R::neg_infinity(), StopTime::Infinity);
    for k in 1..=end {
        let x = R::of_usize(k) * cfg.tau;
        let iv = bad_interval(StopTime::Finite(x), cfg.a, cfg.gamma).expect("positive time");
        let m = mass_of(&sums, &iv, f.len());
        if m - cfg.delta > worst.0 {
            worst = (m - cfg.delta, StopTime::Finite(x));
        }
    }
    let iv = bad_interval(StopTime::Infinity, cfg.a, cfg.gamma).expect("infinity is valid");
    let m = mass_of(&sums, &iv, f.len());
    if m - cfg.delta > worst.0 {
        worst = (m - cfg.delta, StopTime::Infinity);
    }
    Check {
        pass: worst.0 <= R::lit(tol::FEASIBILITY),
        worst: worst.0,
        at: worst.1,
    }
}

fn mass_of<R: Real>(sums: &PrefixSums<R>, iv: &BadInterval<R>, count: usize) -> R {
    let finite = iv
        .grid_range(sums.tau, count)
        .map(|(lo, hi)| sums.mass_between(lo, hi))
        .unwrap_or_else(R::zero);
    if iv.contains_infinity() {
        finite + sums.mass_inf
    } else {
        finite
    }
}

/// Expected ratio minus `bound` over the grid and infinity. Does not require
/// `f` to be normalized.
pub fn verify_cr<R: Real>(
    f: &PurchaseDistribution<R>,
    cfg: &ProblemConfig<R>,
    bound: R,
) -> Check<R> {
    let ev = CrEvaluator::unchecked(f, cfg.a);
    let (v, at) = sup_of(&ev, f.len());
    Check {
        pass: v - bound <= R::lit(tol::CR_BOUND),
        worst: v - bound,
        at,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Tightness {
    Cr,
    Mass,
    Both,
    Neither,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TightPoint<R> {
    pub t: R,
    /// `opt - expected ratio at t`.
    pub cr_slack: R,
    /// `delta - mass of the bad interval of t`; absent when it is empty.
    pub mass_slack: Option<R>,
    pub class: Tightness,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpSegment<R> {
    pub start: R,
    pub end: R,
    pub base: R,
    /// Largest relative deviation of a consecutive ratio from `1 + tau`.
    pub max_rel_err: R,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Trend {
    Increasing,
    Decreasing,
    Flat,
}

/// Monotonicity of the expected ratio across a run of zero-mass points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroIntervalCheck<R> {
    pub start: R,
    pub end: R,
    /// From the sign of `c - aE` (always decreasing inside `[0, 1]`).
    pub expected: Trend,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureReport<R> {
    /// Normalized, feasible, and within `opt` everywhere.
    pub pass: bool,
    /// World 2 when any mass sits in `(1, L_b]`.
    pub world: World,
    pub tight_map: Vec<TightPoint<R>>,
    /// First mass-tight grid point after 1.
    pub p: Option<R>,
    /// Mass on `(L_b, inf]`.
    pub suffix_mass: R,
    pub segments: Vec<ExpSegment<R>>,
    pub zero_intervals: Vec<ZeroIntervalCheck<R>>,
    pub max_cr: R,
    pub max_mass_violation: R,
    /// Points in `(p, L_b]` that are neither ratio- nor mass-tight; on a
    /// grid these come from bad-interval endpoints that do not move.
    pub ambiguous: Vec<R>,
}

fn trend_of<R: Real>(s: R) -> Trend {
    if s.abs() <= R::lit(1e-12) {
        Trend::Flat
    } else if s > R::zero() {
        Trend::Increasing
    } else {
        Trend::Decreasing
    }
}

/// Structure diagnostics of `f` against the claimed optimum `opt`.
pub fn structure_report<R: Real>(
    f: &PurchaseDistribution<R>,
    cfg: &ProblemConfig<R>,
    opt: R,
) -> StructureReport<R> {
    let tau = cfg.tau;
    let ev = CrEvaluator::unchecked(f, cfg.a);
    let sums = &ev.sums;
    let n = f.len();
    let k1 = cfg.index_of_one();
    let lb = cfg.boundaries().lb;
    let lb_index = ((lb / tau) + R::lit(tol::ALIGN))
        .floor()
        .to_usize()
        .unwrap_or(0);
    let tight_tol = R::lit(tol::TIGHT);

    let mut tight_map = Vec::with_capacity(n);
    for k in 1..=n {
        let x = R::of_usize(k) * tau;
        let cr_slack = opt - ev.at_index(k);
        let iv = bad_interval(StopTime::Finite(x), cfg.a, cfg.gamma).expect("positive time");
        let mass_slack = match iv {
            BadInterval::Empty => None,
            _ => Some(cfg.delta - mass_of(sums, &iv, n)),
        };
        let cr_t = cr_slack.abs() <= tight_tol;
        let mass_t = mass_slack.is_some_and(|s| s.abs() <= tight_tol);
        let class = match (cr_t, mass_t) {
            (true, true) => Tightness::Both,
            (true, false) => Tightness::Cr,
            (false, true) => Tightness::Mass,
            (false, false) => Tightness::Neither,
        };
        tight_map.push(TightPoint {
            t: x,
            cr_slack,
            mass_slack,
            class,
        });
    }

    let p_index = (k1 + 1..=n.min(lb_index))
        .find(|&k| matches!(tight_map[k - 1].class, Tightness::Mass | Tightness::Both));
    let p = p_index.map(|k| R::of_usize(k) * tau);
    let ambiguous = match p_index {
        Some(pk) => (pk + 1..=n.min(lb_index))
            .filter(|&k| tight_map[k - 1].class == Tightness::Neither)
            .map(|k| R::of_usize(k) * tau)
            .collect(),
        None => Vec::new(),
    };

    let suffix_mass = sums.total() - sums.s0[lb_index.min(n)];
    let middle = sums.mass_between(k1 + 1, lb_index);
    let world = if middle > R::lit(tol::MASS) {
        World::World2
    } else {
        World::World1
    };

    let segments = exp_segments(f, k1);
    let zero_intervals = zero_interval_checks(f, &ev, k1);

    let feas = verify_feasibility(f, cfg);
    let (max_cr, _) = sup_of(&ev, n);
    let normalized = f.check_normalized().is_ok();
    let pass = normalized && feas.pass && max_cr - opt <= R::lit(tol::CR_BOUND);
    StructureReport {
        pass,
        world,
        tight_map,
        p,
        suffix_mass,
        segments,
        zero_intervals,
        max_cr,
        max_mass_violation: feas.worst.max(R::zero()),
        ambiguous,
    }
}

/// Runs of at least three positive masses after index `k1` whose
/// consecutive ratios are `1 + tau` within [`tol::EXP_RATIO_REL`].
fn exp_segments<R: Real>(f: &PurchaseDistribution<R>, k1: usize) -> Vec<ExpSegment<R>> {
    let tau = f.tau;
    let target = R::one() + tau;
    let rel = R::lit(tol::EXP_RATIO_REL);
    let zero = R::lit(tol::ZERO_MASS);
    let m = &f.masses;
    let mut out = Vec::new();
    let mut i = k1;
    while i + 1 < m.len() {
        let mut j = i;
        let mut err = R::zero();
        while j + 1 < m.len() && m[j] > zero && m[j + 1] > zero {
            let e = (m[j + 1] / m[j] - target).abs() / target;
            if e > rel {
                break;
            }
            err = err.max(e);
            j += 1;
        }
        if j >= i + 2 {
            out.push(ExpSegment {
                start: R::of_usize(i + 1) * tau,
                end: R::of_usize(j + 1) * tau,
                base: m[i],
                max_rel_err: err,
            });
            i = j;
        } else {
            i += 1;
        }
    }
    out
}

fn zero_interval_checks<R: Real>(
    f: &PurchaseDistribution<R>,
    ev: &CrEvaluator<R>,
    k1: usize,
) -> Vec<ZeroIntervalCheck<R>> {
    let tau = f.tau;
    let a = ev.a;
    let zero = R::lit(tol::ZERO_MASS);
    let m = &f.masses;
    let sums = &ev.sums;
    let mut out = Vec::new();
    let mut i = 0;
    while i < m.len() {
        if m[i] > zero {
            i += 1;
            continue;
        }
        let mut j = i;
        while j + 1 < m.len() && m[j + 1] <= zero {
            j += 1;
        }
        // 1-based zero run (i+1)..=(j+1); the ratio is smooth from the
        // preceding point i through j + 1
        let (lo, hi) = (i, j + 1);
        if hi >= lo + 2 && lo >= 1 {
            let straddles_one = lo < k1 && hi > k1;
            if !straddles_one {
                let expected = if hi <= k1 {
                    Trend::Decreasing
                } else {
                    let e = sums.s1[lo];
                    let c = sums.total() - sums.s0[hi];
                    trend_of(c - a * e)
                };
                let len = R::of_usize(hi - lo) * tau;
                let flat_tol = R::lit(1e-9) * len;
                let pass = (lo..hi).all(|k| {
                    let d = ev.at_index(k + 1) - ev.at_index(k);
                    match expected {
                        Trend::Flat => d.abs() <= flat_tol,
                        Trend::Increasing => d >= -R::lit(1e-12),
                        Trend::Decreasing => d <= R::lit(1e-12),
                    }
                });
                out.push(ZeroIntervalCheck {
                    start: R::of_usize(lo) * tau,
                    end: R::of_usize(hi) * tau,
                    expected,
                    pass,
                });
            }
        }
        i = j + 1;
    }
    out
}

/// Objective gap and mass-vector differences between the two solvers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapReport<R> {
    pub binsearch_opt: R,
    pub lp_opt: R,
    /// `binsearch_opt - lp_opt`.
    pub objective_gap: R,
    /// Sup-norm difference of the masses on `(0, 1]`.
    pub prefix_sup_norm: R,
    /// Sup-norm difference after 1 (finite grid and infinity).
    pub beyond_one_sup_norm: R,
    /// First and last grid times after 1 where the vectors differ by more
    /// than [`tol::TIGHT`].
    pub disagreement: Option<(R, R)>,
}

/// Binary-search result, LP result, and their gap.
pub type Comparison<R> = (SolveResult<R>, SolveResult<R>, GapReport<R>);

/// Runs both solvers on identical grids and compares them.
pub fn compare_solvers<R: Real, B: LpBackend<R> + ?Sized>(
    cfg: &ProblemConfig<R>,
    backend: &B,
) -> Result<Comparison<R>, SolveError> {
    let bs = binary_search(cfg)?;
    let lp = solve_lp(&build_lp(cfg)?, backend)?;
    let gap = compare_results(cfg, &bs, &lp);
    Ok((bs, lp, gap))
}

pub fn compare_results<R: Real>(
    cfg: &ProblemConfig<R>,
    bs: &SolveResult<R>,
    lp: &SolveResult<R>,
) -> GapReport<R> {
    let k1 = cfg.index_of_one();
    let n = bs.distribution.len().max(lp.distribution.len());
    let f = bs.distribution.resized(n);
    let g = lp.distribution.resized(n);
    let mut prefix = R::zero();
    let mut beyond = (f.mass_inf - g.mass_inf).abs();
    let mut first = None;
    let mut last = None;
    for k in 1..=n {
        let d = (f.masses[k - 1] - g.masses[k - 1]).abs();
        if k <= k1 {
            prefix = prefix.max(d);
        } else {
            beyond = beyond.max(d);
            if d > R::lit(tol::TIGHT) {
                let t = R::of_usize(k) * cfg.tau;
                first.get_or_insert(t);
                last = Some(t);
            }
        }
    }
    GapReport {
        binsearch_opt: bs.opt_estimate,
        lp_opt: lp.opt_estimate,
        objective_gap: bs.opt_estimate - lp.opt_estimate,
        prefix_sup_norm: prefix,
        beyond_one_sup_norm: beyond,
        disagreement: first.zip(last),
    }
}
