//! Left-to-right greedy placement of purchase mass.
//!
//! At each grid point the greedy places the largest mass that keeps both the
//! ratio constraint (against a guess `T`) and the bad-interval mass
//! constraint satisfied.

use serde::{Deserialize, Serialize};

use crate::badinterval::{bad_interval, BadInterval};
use crate::distribution::PurchaseDistribution;
use crate::error::SolveError;
use crate::model::{aligned_index, ProblemConfig, StopTime};
use crate::ratio::partial_cr_from_sums;
use crate::scalar::Real;
use crate::tol;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Termination {
    MassReachedOne,
    WorldOneExit,
    SuffixBudgetExhausted,
    CapHit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum World {
    World1,
    World2,
}

impl World {
    pub fn number(self) -> u8 {
        match self {
            World::World1 => 1,
            World::World2 => 2,
        }
    }

    fn name(self) -> &'static str {
        match self {
            World::World1 => "world 1",
            World::World2 => "world 2",
        }
    }
}

/// Greedy output before normalization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartialDistribution<R> {
    pub tau: R,
    /// The ratio guess the greedy ran against.
    pub guess: R,
    /// `masses[k - 1]` is the mass at `k * tau`; the length is the number of
    /// grid points visited.
    pub masses: Vec<R>,
    pub mass_inf: Option<R>,
    pub termination: Termination,
    /// Negative tight amounts clamped to zero (rounding at tightness seams).
    pub clamp_count: usize,
}

impl<R: Real> PartialDistribution<R> {
    pub fn finite_total(&self) -> R {
        self.masses.iter().copied().sum()
    }

    pub fn total(&self) -> R {
        self.finite_total() + self.mass_inf.unwrap_or_else(R::zero)
    }
}

/// Mass predicted at `1 + tau` from prefix sums over `[0, 1]`.
pub fn f_one_plus_tau<R: Real>(s0: R, s1: R, a: R, tau: R) -> R {
    tau * (s0 - R::one() + a * s1)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    /// Stop as soon as the placed mass reaches 1.
    Subroutine,
    /// Run to natural termination against a known optimum.
    KnownOpt,
}

/// Mutable state of one greedy pass.
struct Pass<'c, R> {
    cfg: &'c ProblemConfig<R>,
    t: R,
    masses: Vec<R>,
    /// `cum[k]` is the mass on indices `1..=k`.
    cum: Vec<R>,
    s0: R,
    s1: R,
    clamp_count: usize,
}

impl<'c, R: Real> Pass<'c, R> {
    fn new(cfg: &'c ProblemConfig<R>, t: R) -> Self {
        Self {
            cfg,
            t,
            masses: Vec::new(),
            cum: vec![R::zero()],
            s0: R::zero(),
            s1: R::zero(),
            clamp_count: 0,
        }
    }

    /// Mass making the ratio constraint at `x` tight (may be negative).
    fn cr_tight(&self, k: usize, x: R) -> R {
        let one = R::one();
        let a = self.cfg.a;
        let base = (one - a) * (self.s0 * (one - x) + self.s1);
        if k <= self.cfg.index_of_one() {
            (x * (self.t - one) - base) / (one - a)
        } else {
            let d = one - a + a * x;
            (d * self.t - x - base) / (one - a)
        }
    }

    /// Remaining bad-interval budget at `x`, or `None` when `x` is outside
    /// its own bad interval.
    fn budget(&self, k: usize, iv: &BadInterval<R>, lb_index: usize) -> Option<R> {
        let tau = self.cfg.tau;
        match iv {
            BadInterval::Suffix { .. } => {
                let used = self.cum[k - 1] - self.cum[lb_index.min(k - 1)];
                Some(self.cfg.delta - used)
            }
            BadInterval::Bounded { .. } => {
                let (lo, hi) = iv.grid_range(tau, k)?;
                if hi < k {
                    return None;
                }
                let used = if lo < k {
                    self.cum[k - 1] - self.cum[lo - 1]
                } else {
                    R::zero()
                };
                Some(self.cfg.delta - used)
            }
            BadInterval::Empty | BadInterval::InfinityOnly => None,
        }
    }

    fn place(&mut self, k: usize, x: R, v: R) {
        self.masses.push(v);
        self.s0 += v;
        self.s1 += x * v;
        self.cum.push(self.s0);
        debug_assert_eq!(self.masses.len(), k);
    }

    fn clamp(&mut self, v: R) -> R {
        if v < R::zero() {
            self.clamp_count += 1;
            R::zero()
        } else {
            v
        }
    }

    fn finish(self, termination: Termination, mass_inf: Option<R>) -> PartialDistribution<R> {
        PartialDistribution {
            tau: self.cfg.tau,
            guess: self.t,
            masses: self.masses,
            mass_inf,
            termination,
            clamp_count: self.clamp_count,
        }
    }
}

/// Where the pass stopped at `1 + tau` in known-optimum mode.
enum Exit<R> {
    Continue,
    WorldOne(R),
}

fn run<R: Real>(
    cfg: &ProblemConfig<R>,
    t: R,
    mode: Mode,
    at_one_plus_tau: impl Fn(&Pass<'_, R>, R) -> Exit<R>,
) -> PartialDistribution<R> {
    let tau = cfg.tau;
    let k1 = cfg.index_of_one();
    let lb = cfg.boundaries().lb;
    // with delta = 1 the suffix budget can never bind, so a misaligned lb
    // is harmless
    let lb_index =
        aligned_index(lb, tau).unwrap_or_else(|| (lb / tau).floor().to_usize().unwrap_or(0));
    let k_max = aligned_index(cfg.x_max, tau)
        .unwrap_or_else(|| (cfg.x_max / tau).ceil().to_usize().unwrap_or(usize::MAX));
    let slack = R::one() - R::lit(tol::BRACKET);
    let mut pass = Pass::new(cfg, t);
    let mut k = 1usize;
    loop {
        if mode == Mode::Subroutine && pass.s0 >= slack {
            return pass.finish(Termination::MassReachedOne, None);
        }
        if k > k_max {
            return pass.finish(Termination::CapHit, None);
        }
        let x = R::of_usize(k) * tau;
        let cr = pass.cr_tight(k, x);
        if k == k1 + 1 {
            if let Exit::WorldOne(f_inf) = at_one_plus_tau(&pass, cr) {
                return pass.finish(Termination::WorldOneExit, Some(f_inf));
            }
        }
        let iv =
            bad_interval(StopTime::Finite(x), cfg.a, cfg.gamma).expect("grid times are positive");
        let budget = pass.budget(k, &iv, lb_index);
        let raw = match budget {
            Some(b) if b <= R::lit(tol::BUDGET) => cr.min(R::zero()),
            Some(b) => cr.min(b),
            None => cr,
        };
        let v = pass.clamp(raw);
        pass.place(k, x, v);
        if matches!(iv, BadInterval::Suffix { .. }) && v <= R::zero() {
            return pass.finish(Termination::SuffixBudgetExhausted, None);
        }
        k += 1;
    }
}

/// Completion test at `1 + tau`: a remainder `1 - S0` at infinity is
/// feasible and keeps every ratio at most `T`.
fn completion_fits<R: Real>(cfg: &ProblemConfig<R>, s0: R, t: R) -> bool {
    let rest = R::one() - s0;
    cfg.a * (t - s0) >= rest && rest <= cfg.delta
}

/// One call of the binary-search oracle at ratio guess `t`.
///
/// Returns [`SolveError::CapHit`] when the greedy runs past `x_max`; use
/// [`alg_subroutine_raw`] to inspect such runs.
pub fn alg_subroutine<R: Real>(
    cfg: &ProblemConfig<R>,
    t: R,
) -> Result<PartialDistribution<R>, SolveError> {
    let p = alg_subroutine_raw(cfg, t);
    if p.termination == Termination::CapHit {
        return Err(SolveError::CapHit {
            guess: t.as_f64(),
            x_max: cfg.x_max.as_f64(),
            mass: p.total().as_f64(),
        });
    }
    Ok(p)
}

/// Like [`alg_subroutine`] but reports a cap hit as a termination reason.
pub fn alg_subroutine_raw<R: Real>(cfg: &ProblemConfig<R>, t: R) -> PartialDistribution<R> {
    run(cfg, t, Mode::Subroutine, |pass, cr| {
        let f_inf = cfg.a * (t - pass.s0);
        if cr <= R::zero() || completion_fits(cfg, pass.s0, t) {
            Exit::WorldOne(f_inf)
        } else {
            Exit::Continue
        }
    })
}

/// Classifies the optimum from the greedy prefix on `[0, 1]`.
///
/// World 1 holds when the ratio at `1 + tau`, with no mass there, already
/// equals `opt`. The predicted mass at `1 + tau` must agree: positive exactly in
/// world 2.
pub fn world_check<R: Real>(
    prefix: &[R],
    opt: R,
    cfg: &ProblemConfig<R>,
) -> Result<World, SolveError> {
    let (gap, mass) = world_quantities(prefix, opt, cfg);
    let tol_gap = R::lit(tol::WORLD);
    let by_gap = if gap.abs() <= tol_gap {
        World::World1
    } else {
        World::World2
    };
    // same slack mapped into mass units at 1 + tau
    let one = R::one();
    let x = one + cfg.tau;
    let tol_mass = tol_gap * (one - cfg.a + cfg.a * x) / (one - cfg.a);
    let consistent = match by_gap {
        World::World1 => mass <= R::lit(100.0) * tol_mass,
        World::World2 => gap > R::zero() && mass > -tol_mass,
    };
    if !consistent {
        let by_mass = if mass > tol_mass {
            World::World2
        } else {
            World::World1
        };
        return Err(SolveError::WorldMismatch {
            gap: gap.as_f64(),
            mass: mass.as_f64(),
            by_gap: by_gap.name(),
            by_mass: by_mass.name(),
        });
    }
    Ok(by_gap)
}

/// `(opt - ratio at 1 + tau with no mass there, predicted mass at 1 + tau)`.
pub fn world_quantities<R: Real>(prefix: &[R], opt: R, cfg: &ProblemConfig<R>) -> (R, R) {
    let k1 = cfg.index_of_one().min(prefix.len());
    let (mut s0, mut s1) = (R::zero(), R::zero());
    for (i, &m) in prefix[..k1].iter().enumerate() {
        s0 += m;
        s1 += R::of_usize(i + 1) * cfg.tau * m;
    }
    let x = R::one() + cfg.tau;
    let gap = opt - partial_cr_from_sums(cfg.a, x, s0, s1);
    (gap, f_one_plus_tau(s0, s1, cfg.a, cfg.tau))
}

/// Known-optimum greedy output.
#[derive(Debug, Clone, PartialEq)]
pub struct GreedyOutcome<R> {
    pub distribution: PurchaseDistribution<R>,
    pub world: World,
    /// Total mass before normalization.
    pub raw_total: R,
    /// World 1 only: `a (opt - S0)`, the subroutine's value at infinity.
    pub subroutine_inf: Option<R>,
    pub clamp_count: usize,
}

/// Greedy with the optimum known, total-mass tolerance [`tol::KNOWN_OPT_MASS`].
pub fn greedy_with_opt<R: Real>(
    cfg: &ProblemConfig<R>,
    opt: R,
) -> Result<GreedyOutcome<R>, SolveError> {
    greedy_with_opt_tol(cfg, opt, R::lit(tol::KNOWN_OPT_MASS))
}

/// Runs the greedy against `opt` to natural termination. World 1 places
/// `(opt - 1) / (1/a - 1)` at infinity. A total within `mass_tol` of 1 is
/// normalized (chopped after the point where it reaches 1, or scaled up);
/// anything further off means `opt` is not the optimum.
pub fn greedy_with_opt_tol<R: Real>(
    cfg: &ProblemConfig<R>,
    opt: R,
    mass_tol: R,
) -> Result<GreedyOutcome<R>, SolveError> {
    let one = R::one();
    let a = cfg.a;
    let k1 = cfg.index_of_one();
    let p = run(cfg, opt, Mode::KnownOpt, |pass, _| {
        let world1 = matches!(world_check(&pass.masses, opt, cfg), Ok(World::World1))
            || completion_fits(cfg, pass.s0, opt);
        if world1 {
            Exit::WorldOne((opt - one) / (one / a - one))
        } else {
            Exit::Continue
        }
    });
    let not_optimal = |total: R| SolveError::NotOptimal {
        opt: opt.as_f64(),
        total: total.as_f64(),
    };
    let raw_total = p.total();
    match p.termination {
        Termination::CapHit => {
            return Err(SolveError::CapHit {
                guess: opt.as_f64(),
                x_max: cfg.x_max.as_f64(),
                mass: raw_total.as_f64(),
            })
        }
        _ if (raw_total - one).abs() > mass_tol => return Err(not_optimal(raw_total)),
        _ => {}
    }
    let (world, subroutine_inf) = if p.termination == Termination::WorldOneExit {
        let s0: R = p.masses[..k1.min(p.masses.len())].iter().copied().sum();
        (World::World1, Some(a * (opt - s0)))
    } else {
        (World::World2, None)
    };
    let clamp_count = p.clamp_count;
    let distribution = if p.termination == Termination::WorldOneExit || raw_total >= one {
        crate::binsearch::truncate(&p)?
    } else {
        let scale = one / raw_total;
        PurchaseDistribution::new(
            cfg.tau,
            p.masses.iter().map(|&m| m * scale).collect(),
            p.mass_inf.unwrap_or_else(R::zero) * scale,
        )?
    };
    Ok(GreedyOutcome {
        distribution,
        world,
        raw_total,
        subroutine_inf,
        clamp_count,
    })
}
