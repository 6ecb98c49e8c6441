use thiserror::Error;

/// Invalid problem parameters.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("slope a = {0} must lie in (0, 1); a = 0 is the pure-buy case")]
    Slope(f64),
    #[error("gamma = {gamma} is outside the solver regime [2 - a, 1/a) = [{lo}, {hi})")]
    Regime { gamma: f64, lo: f64, hi: f64 },
    #[error("{name} = {value} is out of range: {expected}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },
    #[error("{name} = {value} is not a multiple of tau = {tau} ({value}/{tau} = {ratio})")]
    Misaligned {
        name: &'static str,
        value: f64,
        tau: f64,
        ratio: f64,
    },
    #[error("support end {end} is before L_b = {lb}")]
    SupportTooShort { end: f64, lb: f64 },
    #[error("invalid configuration document: {0}")]
    Parse(String),
}

/// A time argument outside `[0, inf]`.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DomainError {
    #[error("time must be nonnegative, got {0}")]
    NegativeTime(f64),
}

/// A mass vector that is not a valid purchase distribution.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DistributionError {
    #[error("mass at grid index {index} is {value}; masses must be finite and nonnegative")]
    InvalidMass { index: usize, value: f64 },
    #[error("mass at infinity is {0}; it must be finite and nonnegative")]
    InvalidInfinityMass(f64),
    #[error("distribution sums to {total}, not 1")]
    NotNormalized { total: f64 },
    #[error("grid step must be positive, got {0}")]
    Step(f64),
}

/// Failures of the LP layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("LP is infeasible; violated rows: {}", rows.join(", "))]
    Infeasible { rows: Vec<String> },
    #[error("LP is unbounded")]
    Unbounded,
    #[error("simplex stopped after {0} pivots without converging")]
    IterationLimit(usize),
    #[error("LP backend failure: {0}")]
    Backend(String),
    #[error("LP solution is not a distribution: {0}")]
    Solution(String),
}

/// Failures of the solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Distribution(#[from] DistributionError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("greedy ran past x_max = {x_max} at ratio guess T = {guess} with total mass {mass}")]
    CapHit { guess: f64, x_max: f64, mass: f64 },
    #[error("cannot truncate: total mass {total} is below 1 and nothing sits at infinity")]
    Truncate { total: f64 },
    #[error("binary search bracket is invalid: mass {mass} at upper end u = {upper}")]
    Bracket { upper: f64, mass: f64 },
    #[error("greedy at OPT guess {opt} places total mass {total}; the guess is not the optimum")]
    NotOptimal { opt: f64, total: f64 },
    #[error(
        "world check is inconsistent: ratio gap {gap} says {by_gap}, mass at 1+tau {mass} says {by_mass}"
    )]
    WorldMismatch {
        gap: f64,
        mass: f64,
        by_gap: &'static str,
        by_mass: &'static str,
    },
}
