use serde::{Deserialize, Serialize};

use crate::error::DistributionError;
use crate::scalar::Real;
use crate::tol;

/// Probability mass on `{tau, 2 tau, ...}` plus a slot at infinity.
///
/// `masses[k - 1]` is the mass at time `k * tau`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PurchaseDistribution<R> {
    pub tau: R,
    pub masses: Vec<R>,
    pub mass_inf: R,
}

impl<R: Real> PurchaseDistribution<R> {
    /// Validated constructor: masses finite and nonnegative, total 1 within
    /// [`tol::MASS`].
    pub fn new(tau: R, masses: Vec<R>, mass_inf: R) -> Result<Self, DistributionError> {
        let f = Self::unnormalized(tau, masses, mass_inf)?;
        f.check_normalized()?;
        Ok(f)
    }

    /// Checks signs and finiteness only.
    pub fn unnormalized(tau: R, masses: Vec<R>, mass_inf: R) -> Result<Self, DistributionError> {
        if !(tau > R::zero() && tau.is_finite()) {
            return Err(DistributionError::Step(tau.as_f64()));
        }
        if let Some((i, &v)) = masses
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= R::zero()))
        {
            return Err(DistributionError::InvalidMass {
                index: i + 1,
                value: v.as_f64(),
            });
        }
        if !(mass_inf.is_finite() && mass_inf >= R::zero()) {
            return Err(DistributionError::InvalidInfinityMass(mass_inf.as_f64()));
        }
        Ok(Self {
            tau,
            masses,
            mass_inf,
        })
    }

    pub fn unit_at_infinity(tau: R, count: usize) -> Self {
        Self {
            tau,
            masses: vec![R::zero(); count],
            mass_inf: R::one(),
        }
    }

    pub fn check_normalized(&self) -> Result<(), DistributionError> {
        let total = self.total();
        if (total - R::one()).abs() > R::lit(tol::MASS) {
            return Err(DistributionError::NotNormalized {
                total: total.as_f64(),
            });
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    /// Time of 1-based index `k`.
    pub fn time(&self, k: usize) -> R {
        R::of_usize(k) * self.tau
    }

    pub fn finite_total(&self) -> R {
        self.masses.iter().copied().sum()
    }

    pub fn total(&self) -> R {
        self.finite_total() + self.mass_inf
    }

    /// Largest index carrying positive mass.
    pub fn last_support(&self) -> Option<usize> {
        self.masses
            .iter()
            .rposition(|&m| m > R::zero())
            .map(|i| i + 1)
    }

    /// Copy padded with zeros (or truncated) to `count` grid points.
    pub fn resized(&self, count: usize) -> Self {
        let mut masses = self.masses.clone();
        masses.resize(count, R::zero());
        Self {
            tau: self.tau,
            masses,
            mass_inf: self.mass_inf,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(PurchaseDistribution::new(0.1, vec![0.5, 0.25], 0.25).is_ok());
        assert!(matches!(
            PurchaseDistribution::new(0.1, vec![0.5, 0.25], 0.3),
            Err(DistributionError::NotNormalized { .. })
        ));
        assert!(matches!(
            PurchaseDistribution::new(0.1, vec![0.5, -0.25], 0.75),
            Err(DistributionError::InvalidMass { index: 2, .. })
        ));
        assert!(PurchaseDistribution::new(0.1, vec![f64::NAN], 1.0).is_err());
        assert!(PurchaseDistribution::new(0.0, vec![], 1.0).is_err());
        assert!(PurchaseDistribution::unnormalized(0.1, vec![0.5], 0.7).is_ok());
    }

    #[test]
    fn accessors() {
        let f = PurchaseDistribution::new(0.25, vec![0.0, 0.5, 0.0], 0.5).unwrap();
        assert_eq!(f.time(2), 0.5);
        assert_eq!(f.last_support(), Some(2));
        assert_eq!(f.resized(5).len(), 5);
        assert_eq!(f.resized(1).masses, vec![0.0]);
        assert_eq!(
            PurchaseDistribution::unit_at_infinity(0.1f64, 3).total(),
            1.0
        );
    }
}
