//! Problem configuration, regime boundaries and the time grid.

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::scalar::Real;
use crate::tol;

/// A finite time or infinity (used both for buy times and stop times).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum StopTime<R> {
    Finite(R),
    Infinity,
}

impl<R: Real> StopTime<R> {
    pub fn finite(self) -> Option<R> {
        match self {
            StopTime::Finite(x) => Some(x),
            StopTime::Infinity => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, StopTime::Infinity)
    }

    pub fn as_f64(self) -> f64 {
        match self {
            StopTime::Finite(x) => x.as_f64(),
            StopTime::Infinity => f64::INFINITY,
        }
    }
}

/// The five closed-form thresholds that split the time axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeBoundaries<R> {
    pub b1: R,
    pub l3: R,
    pub i3: R,
    pub lb: R,
    pub l5: R,
}

impl<R: Real> RegimeBoundaries<R> {
    /// Named fields in ascending order.
    pub fn named(&self) -> [(&'static str, R); 5] {
        [
            ("b1", self.b1),
            ("l3", self.l3),
            ("i3", self.i3),
            ("lb", self.lb),
            ("l5", self.l5),
        ]
    }
}

fn check_regime<R: Real>(a: R, gamma: R) -> Result<(), ConfigError> {
    if !(a > R::zero() && a < R::one()) {
        return Err(ConfigError::Slope(a.as_f64()));
    }
    let lo = R::lit(2.0) - a;
    let hi = R::one() / a;
    if !gamma.is_finite() || gamma < lo - R::lit(tol::REGIME) || gamma >= hi {
        return Err(ConfigError::Regime {
            gamma: gamma.as_f64(),
            lo: lo.as_f64(),
            hi: hi.as_f64(),
        });
    }
    Ok(())
}

/// Regime boundaries for `2 - a <= gamma < 1/a`.
pub fn boundaries<R: Real>(a: R, gamma: R) -> Result<RegimeBoundaries<R>, ConfigError> {
    check_regime(a, gamma)?;
    let one = R::one();
    let q = one - a * gamma;
    let lb = (gamma - one) / q;
    Ok(RegimeBoundaries {
        b1: (one - a) / (gamma - a),
        l3: (one - a) / (gamma - one),
        i3: (one - a) * lb,
        lb,
        l5: gamma * (one - a) / q,
    })
}

/// `(opt - 1) / (1/a - 1)`: deltas above it put the optimum in world 1.
pub fn regime_threshold<R: Real>(a: R, opt: R) -> Result<R, ConfigError> {
    if !(a > R::zero() && a < R::one()) {
        return Err(ConfigError::Slope(a.as_f64()));
    }
    if opt.is_nan() || opt < R::one() {
        return Err(ConfigError::OutOfRange {
            name: "opt",
            value: opt.as_f64(),
            expected: "opt >= 1",
        });
    }
    Ok((opt - R::one()) / (R::one() / a - R::one()))
}

/// Nearest grid index if `t` lies within [`tol::ALIGN`] steps of one.
pub fn aligned_index<R: Real>(t: R, tau: R) -> Option<usize> {
    let r = t / tau;
    let k = r.round();
    if (r - k).abs() <= R::lit(tol::ALIGN) && k >= R::zero() {
        k.to_usize()
    } else {
        None
    }
}

/// Smallest grid time `k * tau >= t` (up to alignment noise).
pub fn ceil_to_grid<R: Real>(t: R, tau: R) -> R {
    R::of_usize(ceil_index(t, tau)) * tau
}

pub(crate) fn ceil_index<R: Real>(t: R, tau: R) -> usize {
    (t / tau - R::lit(tol::ALIGN))
        .ceil()
        .max(R::zero())
        .to_usize()
        .unwrap_or(usize::MAX)
}

/// Solver inputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProblemConfig<R> {
    pub a: R,
    pub gamma: R,
    pub delta: R,
    pub tau: R,
    pub epsilon: R,
    pub x_max: R,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigDoc {
    a: f64,
    gamma: f64,
    delta: f64,
    tau: f64,
    epsilon: f64,
    #[serde(default)]
    x_max: Option<f64>,
}

impl<R: Real> ProblemConfig<R> {
    /// Validates the regime and ranges; `x_max` defaults to `l5 + 2` rounded
    /// up to the grid. Grid alignment is checked separately by
    /// [`ProblemConfig::check_alignment`].
    pub fn new(a: R, gamma: R, delta: R, tau: R, epsilon: R) -> Result<Self, ConfigError> {
        check_regime(a, gamma)?;
        if !(delta >= R::zero() && delta <= R::one()) {
            return Err(ConfigError::OutOfRange {
                name: "delta",
                value: delta.as_f64(),
                expected: "0 <= delta <= 1",
            });
        }
        if !(tau > R::zero() && tau.is_finite()) {
            return Err(ConfigError::OutOfRange {
                name: "tau",
                value: tau.as_f64(),
                expected: "tau > 0",
            });
        }
        if !(epsilon > R::zero() && epsilon.is_finite()) {
            return Err(ConfigError::OutOfRange {
                name: "epsilon",
                value: epsilon.as_f64(),
                expected: "epsilon > 0",
            });
        }
        let b = boundaries(a, gamma)?;
        let x_max = ceil_to_grid(b.l5 + R::lit(2.0), tau);
        Ok(Self {
            a,
            gamma,
            delta,
            tau,
            epsilon,
            x_max,
        })
    }

    /// Replaces the solver support cap, rounded up to the grid.
    pub fn with_x_max(mut self, x_max: R) -> Result<Self, ConfigError> {
        let lb = self.boundaries().lb;
        if !(x_max.is_finite() && x_max >= lb) {
            return Err(ConfigError::SupportTooShort {
                end: x_max.as_f64(),
                lb: lb.as_f64(),
            });
        }
        self.x_max = ceil_to_grid(x_max, self.tau);
        Ok(self)
    }

    pub fn with_epsilon(mut self, epsilon: R) -> Result<Self, ConfigError> {
        if !(epsilon > R::zero() && epsilon.is_finite()) {
            return Err(ConfigError::OutOfRange {
                name: "epsilon",
                value: epsilon.as_f64(),
                expected: "epsilon > 0",
            });
        }
        self.epsilon = epsilon;
        Ok(self)
    }

    /// Parses the JSON document form; `x_max` is optional.
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let doc: ConfigDoc =
            serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        let cfg = Self::new(
            R::lit(doc.a),
            R::lit(doc.gamma),
            R::lit(doc.delta),
            R::lit(doc.tau),
            R::lit(doc.epsilon),
        )?;
        match doc.x_max {
            Some(x) => cfg.with_x_max(R::lit(x)),
            None => Ok(cfg),
        }
    }

    pub fn boundaries(&self) -> RegimeBoundaries<R> {
        boundaries(self.a, self.gamma).expect("validated at construction")
    }

    /// Requires time 1 and, unless `delta >= 1`, every regime boundary to sit
    /// on the grid. With `delta >= 1` no mass constraint can bind, so the
    /// boundaries never select grid points.
    pub fn check_alignment(&self) -> Result<(), ConfigError> {
        let one: [(&'static str, R); 1] = [("1", R::one())];
        let b = self.boundaries();
        let named = b.named();
        let points: &[(&'static str, R)] = if self.delta >= R::one() { &one } else { &named };
        for &(name, value) in points.iter().chain(one.iter()) {
            if aligned_index(value, self.tau).is_none() {
                return Err(ConfigError::Misaligned {
                    name,
                    value: value.as_f64(),
                    tau: self.tau.as_f64(),
                    ratio: (value / self.tau).as_f64(),
                });
            }
        }
        Ok(())
    }

    /// End of the LP support: `lb`, rounded up to the grid when `lb` is
    /// allowed to be misaligned.
    pub fn lp_support_end(&self) -> R {
        ceil_to_grid(self.boundaries().lb, self.tau)
    }

    /// Grid index of time 1.
    pub fn index_of_one(&self) -> usize {
        ceil_index(R::one(), self.tau)
    }
}

/// Finite grid `{k * tau : 1 <= k <= count}` plus an infinity slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeGrid<R> {
    pub tau: R,
    pub count: usize,
}

impl<R: Real> TimeGrid<R> {
    /// Time of grid index `k` (1-based).
    pub fn time(&self, k: usize) -> R {
        R::of_usize(k) * self.tau
    }

    /// Index of an aligned time, if it is on this grid.
    pub fn index(&self, t: R) -> Option<usize> {
        aligned_index(t, self.tau).filter(|&k| k >= 1 && k <= self.count)
    }

    pub fn end(&self) -> R {
        self.time(self.count)
    }
}

/// Grid covering `(0, support_end]`.
pub fn build_grid<R: Real>(
    config: &ProblemConfig<R>,
    support_end: R,
) -> Result<TimeGrid<R>, ConfigError> {
    config.check_alignment()?;
    let lb = config.boundaries().lb;
    if support_end < lb - R::lit(tol::ALIGN) * config.tau {
        return Err(ConfigError::SupportTooShort {
            end: support_end.as_f64(),
            lb: lb.as_f64(),
        });
    }
    let count = aligned_index(support_end, config.tau).ok_or(ConfigError::Misaligned {
        name: "support_end",
        value: support_end.as_f64(),
        tau: config.tau.as_f64(),
        ratio: (support_end / config.tau).as_f64(),
    })?;
    Ok(TimeGrid {
        tau: config.tau,
        count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(x: f64, y: f64, tol: f64) -> bool {
        (x - y).abs() <= tol * (1.0 + y.abs())
    }

    #[test]
    fn boundaries_of_small_delta_experiment() {
        let b = boundaries(0.8, 1.2).unwrap();
        assert!(close(b.b1, 0.5, 1e-12));
        assert!(close(b.l3, 1.0, 1e-12));
        assert!(close(b.i3, 1.0, 1e-12));
        assert!(close(b.lb, 5.0, 1e-12));
        assert!(close(b.l5, 6.0, 1e-12));
    }

    #[test]
    fn boundaries_of_half_slope() {
        let b = boundaries(0.5, 1.5).unwrap();
        assert_eq!((b.b1, b.l3, b.i3, b.lb, b.l5), (0.5, 1.0, 1.0, 2.0, 3.0));
    }

    #[test]
    fn boundaries_reject_out_of_regime() {
        assert!(matches!(
            boundaries(0.5, 2.5),
            Err(ConfigError::Regime { .. })
        ));
        assert!(matches!(
            boundaries(0.5, 2.0),
            Err(ConfigError::Regime { .. })
        ));
        assert!(matches!(
            boundaries(0.5, 1.4),
            Err(ConfigError::Regime { .. })
        ));
        assert!(matches!(boundaries(0.0, 2.0), Err(ConfigError::Slope(_))));
    }

    #[test]
    fn boundaries_in_f32() {
        let b = boundaries(0.5f32, 1.5f32).unwrap();
        assert!((b.lb - 2.0).abs() < 1e-6);
    }

    #[test]
    fn regime_threshold_examples() {
        assert!(close(regime_threshold(0.5, 1.2255).unwrap(), 0.2255, 1e-12));
        assert_eq!(regime_threshold(0.5, 1.0).unwrap(), 0.0);
        assert!(close(regime_threshold(0.8, 1.12).unwrap(), 0.48, 1e-12));
        assert!(matches!(
            regime_threshold(0.0, 1.2),
            Err(ConfigError::Slope(_))
        ));
    }

    #[test]
    fn grid_counts() {
        let c = ProblemConfig::new(0.8, 1.2, 0.05, 0.01, 1e-6).unwrap();
        assert_eq!(build_grid(&c, 5.0).unwrap().count, 500);
        let c = ProblemConfig::new(0.8, 1.2, 0.05, 0.001, 1e-6).unwrap();
        let g = build_grid(&c, 5.0).unwrap();
        assert_eq!(g.count, 5000);
        assert_eq!(g.index(g.time(1234)), Some(1234));
    }

    #[test]
    fn misaligned_step_names_b1() {
        let c = ProblemConfig::new(0.8, 1.2, 0.05, 0.3, 1e-6).unwrap();
        match build_grid(&c, 5.1) {
            Err(ConfigError::Misaligned { name, .. }) => assert_eq!(name, "b1"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unconstrained_delta_only_needs_time_one() {
        // lb = 1/0.7 is off-grid here
        let c = ProblemConfig::new(0.3, 1.7, 1.0, 0.001, 1e-6).unwrap();
        c.check_alignment().unwrap();
        let c = ProblemConfig::new(0.3, 1.7, 0.5, 0.001, 1e-6).unwrap();
        assert!(c.check_alignment().is_err());
        let c = ProblemConfig::new(0.5, 1.5, 1.0, 0.3, 1e-6).unwrap();
        assert!(matches!(
            c.check_alignment(),
            Err(ConfigError::Misaligned { name: "1", .. })
        ));
    }

    #[test]
    fn short_support_is_rejected() {
        let c = ProblemConfig::new(0.5, 1.5, 0.25, 0.01, 1e-6).unwrap();
        assert!(matches!(
            build_grid(&c, 1.5),
            Err(ConfigError::SupportTooShort { .. })
        ));
    }

    #[test]
    fn default_cap_and_json() {
        let c = ProblemConfig::<f64>::from_json(
            r#"{"a":0.5,"gamma":1.5,"delta":0.25,"tau":0.01,"epsilon":1e-6}"#,
        )
        .unwrap();
        assert!(close(c.x_max, 5.0, 1e-12));
        let c = ProblemConfig::<f64>::from_json(
            r#"{"a":0.5,"gamma":1.5,"delta":0.25,"tau":0.01,"epsilon":1e-6,"x_max":7.005}"#,
        )
        .unwrap();
        assert!(close(c.x_max, 7.01, 1e-12));
        assert!(ProblemConfig::<f64>::from_json(r#"{"a":0.5}"#).is_err());
        assert!(ProblemConfig::<f64>::from_json(
            r#"{"a":0.5,"gamma":1.5,"delta":1.5,"tau":0.01,"epsilon":1e-6}"#
        )
        .is_err());
    }

    #[test]
    fn decimal_boundary_gamma_is_accepted() {
        // 2 - 0.8 is not exactly 1.2 in binary
        assert!(ProblemConfig::new(0.8, 1.2, 0.05, 0.001, 1e-6).is_ok());
        assert!(ProblemConfig::new(0.7, 1.3, 0.05, 0.001, 1e-6).is_ok());
    }

    #[test]
    fn boundary_collapse_at_lowest_gamma() {
        for a in [0.1, 0.3, 0.45, 0.6, 0.9] {
            let b = boundaries(a, 2.0 - a).unwrap();
            assert!(close(b.l3, 1.0, 1e-12) && close(b.i3, 1.0, 1e-12), "a={a}");
        }
    }

    proptest! {
        #[test]
        fn ordering_and_identity(a in 0.01f64..0.99, s in 0.0f64..1.0) {
            let lo = 2.0 - a;
            let hi = 1.0 / a;
            prop_assume!(hi - lo > 1e-6);
            let gamma = lo + s * (hi - lo) * 0.999;
            let b = boundaries(a, gamma).unwrap();
            prop_assert!(b.b1 <= b.l3 + 1e-12);
            prop_assert!(b.l3 <= 1.0 + 1e-12);
            prop_assert!(1.0 <= b.i3 + 1e-12);
            prop_assert!(b.i3 < b.lb);
            prop_assert!(b.lb < b.l5);
            prop_assert!(close(b.i3, (1.0 - a) * b.lb, 1e-12));
        }

        #[test]
        fn lb_grows_with_gamma(a in 0.05f64..0.95) {
            let lo = 2.0 - a;
            let hi = 1.0 / a;
            prop_assume!(hi - lo > 1e-3);
            let mut prev = 0.0;
            for i in 0..50 {
                let g = lo + (hi - lo) * (i as f64) / 50.0;
                let lb = boundaries(a, g).unwrap().lb;
                prop_assert!(lb > prev);
                prev = lb;
            }
        }

        #[test]
        fn threshold_monotone(a1 in 0.05f64..0.95, da in 0.0f64..0.04, o1 in 1.0f64..2.0, d in 0.0f64..0.5) {
            let t = regime_threshold(a1, o1).unwrap();
            prop_assert!(regime_threshold(a1, o1 + d).unwrap() >= t);
            prop_assert!(regime_threshold(a1 + da, o1).unwrap() >= t);
        }
    }
}
