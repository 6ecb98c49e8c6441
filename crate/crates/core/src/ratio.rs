//! Pointwise ratio, expected ratio of a distribution, and the partial-mass
//! form used by the greedy.

use crate::distribution::PurchaseDistribution;
use crate::error::{DistributionError, DomainError};
use crate::model::StopTime;
use crate::scalar::Real;

/// Ratio of the cost of buying at `t` to the offline optimum when skiing
/// stops at `x`. The value at `x = 0` is the limit 1.
pub fn alpha<R: Real>(t: StopTime<R>, x: StopTime<R>, a: R) -> Result<R, DomainError> {
    let one = R::one();
    for v in [t, x] {
        if let StopTime::Finite(v) = v {
            if v < R::zero() || v.is_nan() {
                return Err(DomainError::NegativeTime(v.as_f64()));
            }
        }
    }
    let x = match x {
        StopTime::Infinity => {
            return Ok(if t.is_infinite() { one / a } else { one });
        }
        StopTime::Finite(x) => x,
    };
    if x == R::zero() {
        return Ok(one);
    }
    let d = one - a + a * x;
    match t {
        StopTime::Finite(t) if t <= x => {
            let cost = t + one - a + a * (x - t);
            Ok(if x <= one { cost / x } else { cost / d })
        }
        _ => Ok(if x <= one { one } else { x / d }),
    }
}

/// Cumulative mass and first moment over the finite grid.
///
/// `s0[k]` and `s1[k]` cover indices `1..=k`; index 0 is the empty sum.
#[derive(Debug, Clone, PartialEq)]
pub struct PrefixSums<R> {
    pub tau: R,
    pub s0: Vec<R>,
    pub s1: Vec<R>,
    pub mass_inf: R,
}

impl<R: Real> PrefixSums<R> {
    pub fn new(tau: R, masses: &[R], mass_inf: R) -> Self {
        let mut s0 = Vec::with_capacity(masses.len() + 1);
        let mut s1 = Vec::with_capacity(masses.len() + 1);
        let (mut c0, mut c1) = (R::zero(), R::zero());
        s0.push(c0);
        s1.push(c1);
        for (i, &m) in masses.iter().enumerate() {
            c0 += m;
            c1 += R::of_usize(i + 1) * tau * m;
            s0.push(c0);
            s1.push(c1);
        }
        Self {
            tau,
            s0,
            s1,
            mass_inf,
        }
    }

    pub fn of(f: &PurchaseDistribution<R>) -> Self {
        Self::new(f.tau, &f.masses, f.mass_inf)
    }

    pub fn count(&self) -> usize {
        self.s0.len() - 1
    }

    /// Index of the last grid point `<= x`, clamped to the grid.
    pub fn index_at(&self, x: R) -> usize {
        let k = (x / self.tau + R::lit(1e-9)).floor();
        if k <= R::zero() {
            0
        } else {
            k.to_usize().unwrap_or(usize::MAX).min(self.count())
        }
    }

    pub fn finite_total(&self) -> R {
        self.s0[self.count()]
    }

    pub fn total(&self) -> R {
        self.finite_total() + self.mass_inf
    }

    /// Mass on grid indices `lo..=hi` (1-based, clamped).
    pub fn mass_between(&self, lo: usize, hi: usize) -> R {
        let hi = hi.min(self.count());
        if lo > hi || lo == 0 && hi == 0 {
            return R::zero();
        }
        self.s0[hi] - self.s0[lo.max(1) - 1]
    }
}

/// Expected ratio from prefix sums up to `x`; `rest` is the mass after `x`.
fn cr_from_sums<R: Real>(a: R, x: R, s0: R, s1: R, rest: R) -> R {
    let one = R::one();
    if x <= one {
        ((one - a) * s1 + (one - a + a * x) * s0) / x + rest
    } else {
        let d = one - a + a * x;
        ((one - a) * s1 + d * s0) / d + x / d * rest
    }
}

/// Evaluates the expected ratio of one distribution at many stop times.
#[derive(Debug, Clone)]
pub struct CrEvaluator<R> {
    pub a: R,
    pub sums: PrefixSums<R>,
}

impl<R: Real> CrEvaluator<R> {
    pub fn new(f: &PurchaseDistribution<R>, a: R) -> Result<Self, DistributionError> {
        f.check_normalized()?;
        Ok(Self::unchecked(f, a))
    }

    /// Skips the normalization check (for diagnosing broken inputs).
    pub fn unchecked(f: &PurchaseDistribution<R>, a: R) -> Self {
        Self {
            a,
            sums: PrefixSums::of(f),
        }
    }

    /// Expected ratio at grid index `k >= 1` (beyond the grid is allowed).
    pub fn at_index(&self, k: usize) -> R {
        let x = R::of_usize(k) * self.sums.tau;
        let kk = k.min(self.sums.count());
        let (s0, s1) = (self.sums.s0[kk], self.sums.s1[kk]);
        cr_from_sums(self.a, x, s0, s1, self.sums.total() - s0)
    }

    pub fn at_infinity(&self) -> R {
        self.sums.finite_total() + self.sums.mass_inf / self.a
    }

    pub fn at(&self, x: StopTime<R>) -> Result<R, DomainError> {
        match x {
            StopTime::Infinity => Ok(self.at_infinity()),
            StopTime::Finite(x) if x < R::zero() || x.is_nan() => {
                Err(DomainError::NegativeTime(x.as_f64()))
            }
            StopTime::Finite(x) if x == R::zero() => Ok(R::one()),
            StopTime::Finite(x) => {
                let k = self.sums.index_at(x);
                let (s0, s1) = (self.sums.s0[k], self.sums.s1[k]);
                Ok(cr_from_sums(self.a, x, s0, s1, self.sums.total() - s0))
            }
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CrError {
    #[error(transparent)]
    Distribution(#[from] DistributionError),
    #[error(transparent)]
    Domain(#[from] DomainError),
}

/// Expected ratio of a normalized distribution at `x`.
pub fn expected_cr<R: Real>(
    f: &PurchaseDistribution<R>,
    x: StopTime<R>,
    a: R,
) -> Result<R, CrError> {
    Ok(CrEvaluator::new(f, a)?.at(x)?)
}

/// Left-hand side of the ratio constraint for a partial mass function on the
/// grid: the unplaced remainder `max(0, 1 - S0)` is assumed to come after
/// `x`.
pub fn partial_cr<R: Real>(masses: &[R], tau: R, x: R, a: R) -> R {
    let (mut s0, mut s1) = (R::zero(), R::zero());
    for (i, &m) in masses.iter().enumerate() {
        let t = R::of_usize(i + 1) * tau;
        if t > x + tau * R::lit(1e-9) {
            break;
        }
        s0 += m;
        s1 += t * m;
    }
    partial_cr_from_sums(a, x, s0, s1)
}

pub(crate) fn partial_cr_from_sums<R: Real>(a: R, x: R, s0: R, s1: R) -> R {
    let one = R::one();
    if x <= one {
        one + (one - a) * (s0 * (one - x) + s1) / x
    } else {
        cr_from_sums(a, x, s0, s1, (one - s0).max(R::zero()))
    }
}

/// Maximum expected ratio over the grid and infinity, with its location.
/// Ties go to the smallest stop time.
pub fn sup_expected_cr<R: Real>(
    f: &PurchaseDistribution<R>,
    a: R,
) -> Result<(R, StopTime<R>), DistributionError> {
    let ev = CrEvaluator::new(f, a)?;
    Ok(sup_of(&ev, f.len()))
}

pub(crate) fn sup_of<R: Real>(ev: &CrEvaluator<R>, count: usize) -> (R, StopTime<R>) {
    let mut best = (R::neg_infinity(), StopTime::Infinity);
    for k in 1..=count {
        let v = ev.at_index(k);
        if v > best.0 {
            best = (v, StopTime::Finite(R::of_usize(k) * ev.sums.tau));
        }
    }
    let v = ev.at_infinity();
    if v > best.0 {
        best = (v, StopTime::Infinity);
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fin(x: f64) -> StopTime<f64> {
        StopTime::Finite(x)
    }

    /// Oracle: the expectation written as a direct sum of pointwise ratios.
    fn direct_cr(f: &PurchaseDistribution<f64>, x: StopTime<f64>, a: f64) -> f64 {
        let mut v = f.mass_inf * alpha(StopTime::Infinity, x, a).unwrap();
        for (i, &m) in f.masses.iter().enumerate() {
            v += m * alpha(fin(f.time(i + 1)), x, a).unwrap();
        }
        v
    }

    #[test]
    fn alpha_examples() {
        assert!((alpha(fin(0.3), fin(0.5), 0.5).unwrap() - 1.8).abs() < 1e-12);
        assert_eq!(alpha(fin(0.8), fin(0.5), 0.5).unwrap(), 1.0);
        assert!((alpha(fin(0.5), fin(2.0), 0.5).unwrap() - 7.0 / 6.0).abs() < 1e-12);
        assert_eq!(alpha(fin(0.0), fin(3.0), 0.3).unwrap(), 1.0);
        assert_eq!(alpha(fin(1.0), StopTime::Infinity, 0.5).unwrap(), 1.0);
        assert_eq!(
            alpha(StopTime::Infinity, StopTime::Infinity, 0.5).unwrap(),
            2.0
        );
        assert_eq!(alpha(fin(0.2), fin(0.0), 0.5).unwrap(), 1.0);
        assert!(alpha(fin(-1.0), fin(0.5), 0.5).is_err());
    }

    #[test]
    fn expected_cr_examples() {
        let u = PurchaseDistribution::unit_at_infinity(0.1, 10);
        assert_eq!(expected_cr(&u, StopTime::Infinity, 0.5).unwrap(), 2.0);
        assert_eq!(expected_cr(&u, fin(0.7), 0.5).unwrap(), 1.0);
        // half near zero (first grid point of a fine grid), half at infinity
        let tau = 1e-9;
        let f = PurchaseDistribution::new(tau, vec![0.5], 0.5).unwrap();
        let v = expected_cr(&f, fin(0.5), 0.5).unwrap();
        assert!((v - 1.25).abs() < 1e-8);
        let bad = PurchaseDistribution::unnormalized(0.1, vec![0.5], 0.6).unwrap();
        assert!(expected_cr(&bad, fin(0.5), 0.5).is_err());
    }

    #[test]
    fn partial_cr_examples() {
        let z = vec![0.0f64; 300];
        assert!((partial_cr(&z, 0.01, 2.0, 0.5) - 2.0 / 1.5).abs() < 1e-12);
        assert_eq!(partial_cr(&z, 0.01, 0.5, 0.5), 1.0);
        // unit mass at the first point of a very fine grid
        let v: f64 = partial_cr(&[1.0], 1e-12, 2.0, 0.5);
        assert!((v - 1.0).abs() < 1e-9);
    }

    #[test]
    fn sup_examples() {
        let u = PurchaseDistribution::unit_at_infinity(0.1, 30);
        let (v, at) = sup_expected_cr(&u, 0.5).unwrap();
        assert_eq!((v, at), (2.0, StopTime::Infinity));
        let tau: f64 = 0.05;
        let mut m = vec![0.0; 20];
        m[0] = 1.0;
        let f = PurchaseDistribution::new(tau, m, 0.0).unwrap();
        let (v, at) = sup_expected_cr(&f, 0.5).unwrap();
        assert!((v - (tau + 0.5) / tau).abs() < 1e-9);
        assert_eq!(at, fin(tau));
    }

    #[test]
    fn ties_go_to_smallest_time() {
        // c = aE on the zero suffix after t = 2, so the ratio is flat at 1.5
        // from x = 2 through infinity
        let mut m = vec![0.0f64; 8];
        m[7] = 0.5;
        let f = PurchaseDistribution::new(0.25, m, 0.5).unwrap();
        let ev = CrEvaluator::new(&f, 0.5).unwrap();
        assert_eq!(ev.at_infinity(), 1.5);
        let (v, at) = sup_of(&ev, 8);
        assert!((v - 1.5).abs() < 1e-15);
        assert_eq!(at, fin(2.0));
    }

    #[test]
    fn evaluator_agrees_between_index_and_time() {
        let f = PurchaseDistribution::new(0.1, vec![0.1, 0.2, 0.0, 0.3], 0.4).unwrap();
        let ev = CrEvaluator::new(&f, 0.4).unwrap();
        for k in 1..12 {
            let x = 0.1 * k as f64;
            assert!((ev.at_index(k) - ev.at(fin(x)).unwrap()).abs() < 1e-12);
        }
    }

    fn arb_dist() -> impl Strategy<Value = PurchaseDistribution<f64>> {
        (
            prop::collection::vec(0.0f64..1.0, 1..60),
            0.0f64..1.0,
            prop::sample::select(vec![0.05, 0.1, 0.125, 0.2]),
        )
            .prop_map(|(w, winf, tau)| {
                let s: f64 = w.iter().sum::<f64>() + winf + 1e-12;
                PurchaseDistribution::new(
                    tau,
                    w.iter().map(|v| v / s).collect(),
                    1.0 - w.iter().map(|v| v / s).sum::<f64>(),
                )
                .unwrap()
            })
    }

    proptest! {
        #[test]
        fn prefix_form_matches_direct_sum(f in arb_dist(), a in 0.05f64..0.95, k in 1usize..80) {
            let ev = CrEvaluator::new(&f, a).unwrap();
            let x = f.time(k);
            let direct = direct_cr(&f, fin(x), a);
            prop_assert!((ev.at_index(k) - direct).abs() < 1e-9);
            let di = direct_cr(&f, StopTime::Infinity, a);
            prop_assert!((ev.at_infinity() - di).abs() < 1e-9);
            prop_assert!((di - (1.0 + (1.0 / a - 1.0) * f.mass_inf)).abs() < 1e-9);
        }

        #[test]
        fn partial_form_matches_completion(
            f in arb_dist(), a in 0.05f64..0.95, k in 1usize..80,
        ) {
            // With the unplaced remainder moved past x, the partial form is
            // the expected ratio of the completed distribution.
            let x = f.time(k);
            let kk = k.min(f.len());
            let prefix = &f.masses[..kk];
            let rest = 1.0 - prefix.iter().sum::<f64>();
            let mut m = prefix.to_vec();
            m.resize(k + 1, 0.0);
            m[k] = rest.max(0.0);
            let completed = PurchaseDistribution::new(f.tau, m, 0.0).unwrap();
            let want = direct_cr(&completed, fin(x), a);
            prop_assert!((partial_cr(prefix, f.tau, x, a) - want).abs() < 1e-9);
        }

        #[test]
        fn alpha_at_least_one(t in 0.0f64..20.0, x in 0.0f64..20.0, a in 0.0f64..0.99) {
            prop_assert!(alpha(fin(t), fin(x), a).unwrap() >= 1.0 - 1e-12);
            prop_assert!(alpha(StopTime::Infinity, fin(x), a).unwrap() >= 1.0 - 1e-12);
        }

        #[test]
        fn branch_selection_at_diagonal(x in 0.01f64..1.0, a in 0.0f64..0.99) {
            // t = x takes the buy branch, just after x takes the rent branch
            let at = alpha(fin(x), fin(x), a).unwrap();
            prop_assert!((at - (x + 1.0 - a) / x).abs() < 1e-9);
            prop_assert_eq!(alpha(fin(x + 1e-9), fin(x), a).unwrap(), 1.0);
        }

        #[test]
        fn zero_suffix_is_monotone_toward_infinity(f in arb_dist(), a in 0.05f64..0.95) {
            // any distribution ends in a zero suffix after its last grid point
            let start = f.len().max((1.0 / f.tau).ceil() as usize);
            let ev = CrEvaluator::new(&f, a).unwrap();
            let vals: Vec<f64> = (0..100).map(|i| ev.at_index(start + i * 50)).collect();
            let up = vals.windows(2).all(|w| w[1] >= w[0] - 1e-12);
            let down = vals.windows(2).all(|w| w[1] <= w[0] + 1e-12);
            prop_assert!(up || down);
            let far = ev.at(fin(1e9)).unwrap();
            prop_assert!((far - ev.at_infinity()).abs() < 1e-6);
        }

        #[test]
        fn zero_interval_in_unit_range_decreases(
            f in arb_dist(), a in 0.05f64..0.95, i in 1usize..10, j in 1usize..10,
        ) {
            // zero out a window inside [0, 1] and check the strict decrease
            let mut g = f.resized(((1.0 / f.tau).round() as usize).max(f.len()));
            let k1 = ((1.0 / f.tau).round() as usize).min(g.len());
            let lo = i.min(k1);
            let hi = (lo + j).min(k1);
            prop_assume!(hi > lo);
            let removed: f64 = g.masses[lo..hi].iter().sum();
            for m in &mut g.masses[lo..hi] { *m = 0.0; }
            g.mass_inf += removed;
            let ev = CrEvaluator::new(&g, a).unwrap();
            for k in lo..hi {
                prop_assert!(ev.at_index(k + 1) < ev.at_index(k) + 1e-12);
            }
        }

        #[test]
        fn zero_interval_sign_rule(
            w in prop::collection::vec(0.01f64..1.0, 3..10),
            winf in 0.0f64..1.0,
            a in 0.1f64..0.9,
            gap in 5usize..40,
        ) {
            // mass on [tau, 1], a zero window (T1, T2) after 1, then tail mass
            let tau = 0.1;
            let k1 = 10;
            let n = w.len();
            let s: f64 = w.iter().sum::<f64>() + winf;
            let mut m = vec![0.0; k1 + gap + n];
            for (i, v) in w.iter().enumerate().take(n - 1) {
                m[i] = v / s;
            }
            m[k1 + gap + 1] = w[n - 1] / s;
            let mut f = PurchaseDistribution::new(tau, m, winf / s).unwrap();
            f.mass_inf = 1.0 - f.finite_total();
            let ev = CrEvaluator::new(&f, a).unwrap();
            // masses are zero on 1-based indices k1 ..= t2, so the ratio is
            // smooth on [T1, T2] = [1, t2 * tau]
            let t1 = k1;
            let t2 = k1 + gap + 1;
            let e: f64 = (1..=t1).map(|k| f.time(k) * f.masses[k - 1]).sum();
            let c: f64 = 1.0 - (1..=t2).map(|k| f.masses[k - 1]).sum::<f64>();
            let sign = c - a * e;
            prop_assume!(sign.abs() > 1e-6);
            for k in t1..t2 {
                let d = ev.at_index(k + 1) - ev.at_index(k);
                prop_assert!(d * sign > 0.0 || d.abs() < 1e-13, "d={} sign={}", d, sign);
            }
        }
    }
}
