//! Numerical tolerances. All values are absolute unless noted.

/// Normalization check on a purchase distribution.
pub const MASS: f64 = 1e-9;

/// Bad-interval membership slack, relative to the grid step.
pub const EDGE_REL: f64 = 1e-6;

/// Critical points must sit this close to a grid index (in units of steps).
pub const ALIGN: f64 = 1e-9;

/// Relative slack used when classifying a time against a regime boundary.
pub const SEAM_REL: f64 = 1e-9;

/// Equality test in the world-1/world-2 check.
pub const WORLD: f64 = 1e-8;

/// Tight/slack classification in structure reports.
pub const TIGHT: f64 = 1e-6;

/// Feasibility (bad-interval mass over delta).
pub const FEASIBILITY: f64 = 1e-9;

/// Expected ratio over a claimed bound.
pub const CR_BOUND: f64 = 1e-7;

/// Bracket classification in the binary search: a total of at least
/// `1 - BRACKET` counts as a full unit of mass.
pub const BRACKET: f64 = 1e-12;

/// Regime check `gamma >= 2 - a` is done with this slack so that decimal
/// inputs such as `a = 0.8, gamma = 1.2` are accepted.
pub const REGIME: f64 = 1e-12;

/// Total-mass mismatch accepted by the known-OPT greedy. The full greedy
/// total moves roughly forty times faster than the OPT error, so this admits
/// an OPT within about 2e-6 of optimal.
pub const KNOWN_OPT_MASS: f64 = 1e-4;

/// Consecutive-mass ratio match for exponential segments, relative.
pub const EXP_RATIO_REL: f64 = 1e-5;

/// Masses below this count as zero when scanning for zero intervals.
pub const ZERO_MASS: f64 = 1e-12;

/// Remaining bad-interval budgets below this are rounding residue and
/// count as exhausted.
pub const BUDGET: f64 = 1e-13;
