//! The set of buy times whose ratio against a stop time exceeds gamma.
//!
//! Left endpoints are open and right endpoints closed everywhere.

use serde::{Deserialize, Serialize};

use crate::distribution::PurchaseDistribution;
use crate::error::DomainError;
use crate::model::StopTime;
use crate::scalar::Real;
use crate::tol;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BadInterval<R> {
    Empty,
    /// `(left, right]`
    Bounded {
        left: R,
        right: R,
    },
    /// `(left, inf]`, infinity included.
    Suffix {
        left: R,
    },
    InfinityOnly,
}

impl<R: Real> BadInterval<R> {
    /// Whether the finite time `t` is a member (exact arithmetic, no slack).
    pub fn contains(&self, t: R) -> bool {
        match *self {
            BadInterval::Empty | BadInterval::InfinityOnly => false,
            BadInterval::Bounded { left, right } => t > left && t <= right,
            BadInterval::Suffix { left } => t > left,
        }
    }

    pub fn contains_infinity(&self) -> bool {
        matches!(self, BadInterval::Suffix { .. } | BadInterval::InfinityOnly)
    }

    /// Inclusive 1-based grid range `lo..=hi` of member points, using the
    /// membership slack `tau * 1e-6`. `None` when no grid point qualifies.
    pub fn grid_range(&self, tau: R, count: usize) -> Option<(usize, usize)> {
        let slack = R::lit(tol::EDGE_REL);
        let first_after = |left: R| -> usize {
            let r = (left / tau + slack).floor();
            if r < R::zero() {
                1
            } else {
                r.to_usize().unwrap_or(usize::MAX).saturating_add(1)
            }
        };
        let (lo, hi) = match *self {
            BadInterval::Empty | BadInterval::InfinityOnly => return None,
            BadInterval::Bounded { left, right } => {
                let hi = (right / tau + slack).floor();
                if hi < R::one() {
                    return None;
                }
                (first_after(left), hi.to_usize().unwrap_or(usize::MAX))
            }
            BadInterval::Suffix { left } => (first_after(left), count),
        };
        let hi = hi.min(count);
        (lo <= hi).then_some((lo, hi))
    }
}

/// Regime-seam classification slack for a boundary value `b`.
fn seam<R: Real>(b: R) -> R {
    R::lit(tol::SEAM_REL) * b.abs().max(R::one())
}

/// `I_gamma(x)` for any `gamma >= 2 - a`, including `gamma >= 1/a`.
///
/// `x = 0` yields `Empty` (the ratio there is defined as the limit 1).
pub fn bad_interval<R: Real>(
    x: StopTime<R>,
    a: R,
    gamma: R,
) -> Result<BadInterval<R>, DomainError> {
    let one = R::one();
    let large_gamma = a * gamma >= one;
    let x = match x {
        StopTime::Infinity => {
            return Ok(if large_gamma {
                BadInterval::Empty
            } else {
                BadInterval::InfinityOnly
            })
        }
        StopTime::Finite(x) if x < R::zero() || x.is_nan() => {
            return Err(DomainError::NegativeTime(x.as_f64()))
        }
        StopTime::Finite(x) => x,
    };
    if x == R::zero() {
        return Ok(BadInterval::Empty);
    }
    let b1 = (one - a) / (gamma - a);
    let l3 = (one - a) / (gamma - one);
    if x <= b1 + seam(b1) {
        return Ok(BadInterval::Bounded {
            left: R::zero(),
            right: x,
        });
    }
    if x < l3 - seam(l3) {
        return Ok(BadInterval::Bounded {
            left: (gamma - a) * x / (one - a) - one,
            right: x,
        });
    }
    if large_gamma {
        return Ok(BadInterval::Empty);
    }
    let q = one - a * gamma;
    let i3 = (gamma - one) * (one - a) / q;
    let l5 = gamma * (one - a) / q;
    if x <= i3 + seam(i3) {
        return Ok(BadInterval::Empty);
    }
    let left = (gamma - one) * a * x / (one - a) + gamma - one;
    if x <= l5 + seam(l5) {
        Ok(BadInterval::Bounded { left, right: x })
    } else {
        Ok(BadInterval::Suffix { left })
    }
}

/// Mass of `f` on the interval, with the `tau * 1e-6` membership slack.
pub fn mass_in<R: Real>(f: &PurchaseDistribution<R>, iv: &BadInterval<R>) -> R {
    let finite = iv
        .grid_range(f.tau, f.masses.len())
        .map(|(lo, hi)| f.masses[lo - 1..hi].iter().copied().sum())
        .unwrap_or_else(R::zero);
    if iv.contains_infinity() {
        finite + f.mass_inf
    } else {
        finite
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::boundaries;
    use crate::ratio::alpha;
    use proptest::prelude::*;

    fn fin(x: f64) -> StopTime<f64> {
        StopTime::Finite(x)
    }

    fn bounded(iv: BadInterval<f64>) -> (f64, f64) {
        match iv {
            BadInterval::Bounded { left, right } => (left, right),
            other => panic!("expected bounded, got {other:?}"),
        }
    }

    #[test]
    fn examples_at_half_slope() {
        assert_eq!(
            bad_interval(fin(1.0), 0.5, 1.5).unwrap(),
            BadInterval::Empty
        );
        let (l, r) = bounded(bad_interval(fin(0.8), 0.5, 1.5).unwrap());
        assert!((l - 0.6).abs() < 1e-12 && r == 0.8);
        let (l, r) = bounded(bad_interval(fin(2.0), 0.5, 1.5).unwrap());
        assert!((l - 1.5).abs() < 1e-12 && r == 2.0);
        match bad_interval(fin(4.0), 0.5, 1.5).unwrap() {
            BadInterval::Suffix { left } => assert!((left - 2.5).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
        assert_eq!(
            bad_interval(StopTime::Infinity, 0.5, 1.5).unwrap(),
            BadInterval::InfinityOnly
        );
        assert_eq!(
            bad_interval(StopTime::<f64>::Infinity, 0.8, 1.2).unwrap(),
            BadInterval::InfinityOnly
        );
    }

    #[test]
    fn large_gamma_branch() {
        // a = 0.5, gamma = 3 >= 1/a: b1 = 0.2, l3 = 0.25
        assert_eq!(
            bounded(bad_interval(fin(0.1), 0.5, 3.0).unwrap()),
            (0.0, 0.1)
        );
        let (l, _) = bounded(bad_interval(fin(0.22), 0.5, 3.0).unwrap());
        assert!((l - (5.0 * 0.22 - 1.0)).abs() < 1e-12);
        assert_eq!(
            bad_interval(fin(0.5), 0.5, 3.0).unwrap(),
            BadInterval::Empty
        );
        assert_eq!(
            bad_interval(fin(40.0), 0.5, 3.0).unwrap(),
            BadInterval::Empty
        );
        assert_eq!(
            bad_interval(StopTime::Infinity, 0.5, 3.0).unwrap(),
            BadInterval::Empty
        );
    }

    #[test]
    fn negative_time_is_a_domain_error() {
        assert!(bad_interval(fin(-0.1), 0.5, 1.5).is_err());
        assert_eq!(
            bad_interval(fin(0.0), 0.5, 1.5).unwrap(),
            BadInterval::Empty
        );
    }

    #[test]
    fn mass_in_examples() {
        let f = PurchaseDistribution::new(0.1f64, vec![0.1; 10], 0.0).unwrap();
        let iv = BadInterval::Bounded {
            left: 0.6,
            right: 0.8,
        };
        assert!((mass_in(&f, &iv) - 0.2).abs() < 1e-12);
        assert_eq!(mass_in(&f, &BadInterval::Empty), 0.0);
        let u = PurchaseDistribution::unit_at_infinity(0.1, 10);
        assert_eq!(mass_in(&u, &BadInterval::Suffix { left: 2.5 }), 1.0);
        assert_eq!(mass_in(&u, &BadInterval::InfinityOnly), 1.0);
        // suffix past the grid end keeps only infinity
        assert_eq!(mass_in(&f, &BadInterval::Suffix { left: 2.5 }), 0.0);
    }

    #[test]
    fn seams_are_continuous() {
        for (a, g) in [(0.5, 1.5), (0.8, 1.2), (0.6, 1.5), (0.3, 2.0), (0.2, 2.5)] {
            let b = boundaries(a, g).unwrap();
            let left2 = |x: f64| (g - a) * x / (1.0 - a) - 1.0;
            let left4 = |x: f64| (g - 1.0) * a * x / (1.0 - a) + g - 1.0;
            assert!(left2(b.b1).abs() < 1e-9);
            assert!((left2(b.l3) - b.l3).abs() < 1e-9);
            assert!((left4(b.i3) - b.i3).abs() < 1e-9);
            assert!((left4(b.l5) - b.lb).abs() < 1e-9);
        }
    }

    /// Independent oracle: direct pointwise test `alpha(t, x) > gamma`.
    fn oracle_member(t: f64, x: f64, a: f64, g: f64) -> bool {
        alpha(fin(t), fin(x), a).unwrap() > g
    }

    proptest! {
        #[test]
        fn matches_pointwise_ratio(
            a in 0.05f64..0.95,
            s in 0.0f64..1.0,
            x in 0.001f64..30.0,
            u in 0.0f64..1.0,
        ) {
            let lo = 2.0 - a;
            let hi = 1.0 / a;
            prop_assume!(hi - lo > 1e-3);
            let g = lo + s * (hi - lo) * 0.99;
            let iv = bad_interval(fin(x), a, g).unwrap();
            // sample a buy time anywhere in (0, 2x]; avoid exact endpoints
            let t = 2.0 * x * u;
            prop_assume!(t > 0.0);
            let by_formula = iv.contains(t);
            let by_ratio = oracle_member(t, x, a, g);
            let margin = (alpha(fin(t), fin(x), a).unwrap() - g).abs();
            prop_assume!(margin > 1e-9);
            prop_assert_eq!(by_formula, by_ratio, "t={} x={} iv={:?}", t, x, iv);
            // infinity membership agrees with alpha(inf, x) > gamma
            let inf_bad = alpha(StopTime::Infinity, fin(x), a).unwrap() > g;
            let inf_margin = (alpha(StopTime::Infinity, fin(x), a).unwrap() - g).abs();
            if inf_margin > 1e-9 {
                prop_assert_eq!(iv.contains_infinity(), inf_bad);
            }
        }

        #[test]
        fn left_below_x_and_nondecreasing(
            a in 0.05f64..0.95,
            s in 0.0f64..1.0,
            x in 0.01f64..30.0,
            dx in 0.0f64..1.0,
        ) {
            let lo = 2.0 - a;
            let hi = 1.0 / a;
            prop_assume!(hi - lo > 1e-3);
            let g = lo + s * (hi - lo) * 0.99;
            let b = boundaries(a, g).unwrap();
            let left = |x: f64| match bad_interval(fin(x), a, g).unwrap() {
                BadInterval::Bounded { left, .. } | BadInterval::Suffix { left } => Some(left),
                _ => None,
            };
            if let Some(l) = left(x) {
                prop_assert!(l < x);
            }
            let same_piece = (x < b.l3 && x + dx < b.l3 && x > b.b1)
                || (x > b.i3 && x + dx > b.i3);
            if same_piece {
                if let (Some(l1), Some(l2)) = (left(x), left(x + dx)) {
                    prop_assert!(l2 >= l1 - 1e-12);
                }
            }
            if x > b.i3 && x <= b.lb {
                let l = left(x).unwrap();
                prop_assert!(x - l < 1.0);
            }
            if x > b.l5 {
                prop_assert!(left(x).unwrap() > b.lb - 1e-9);
            }
        }
    }
}
