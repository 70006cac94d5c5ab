//! Closed-form TSI and cvTSI updates when one bar is inserted or removed.
//!
//! [`RunningStats`] carries `(n, S₁, S₂)` with `S_k = Σℓ^k`, from which the
//! current mean and TSI are recovered. The update formulas are written in
//! terms of `δ = ℓ - ℓ̄` (and `r = δ / ℓ̄` for cvTSI):
//!
//! ```text
//! insert:  TSI⁺ = (n-1)/n · TSI + δ² / (n+1)
//! delete:  TSI⁻ = (n-1)/(n-2) · TSI - n / ((n-1)(n-2)) · δ²
//! cvTSI⁺ = (n+1)²(n-1) / (n(n+1+r)²) · cvTSI + (n+1) · (r / (n+1+r))²
//! ```
//!
//! Letting `ℓ → 0` in the insertion formulas does not recover the old
//! value, which is the sense in which neither index is continuous under
//! adding short bars.

use crate::barcode::Barcode;
use crate::error::{invalid, undefined, Error, Result};
use crate::scalar::{compensated_sum, Scalar};

/// Absolute tolerance for matching a lifetime against the multiset.
pub const MEMBERSHIP_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct RunningStats<T> {
    n: usize,
    sum: T,
    sum_sq: T,
}

impl<T: Scalar> RunningStats<T> {
    pub fn new() -> Self {
        RunningStats { n: 0, sum: T::zero(), sum_sq: T::zero() }
    }

    pub fn from_lifetimes(lifetimes: &[T]) -> Self {
        RunningStats {
            n: lifetimes.len(),
            sum: compensated_sum(lifetimes.iter().copied()),
            sum_sq: compensated_sum(lifetimes.iter().map(|&l| l * l)),
        }
    }

    pub fn from_barcode(b: &Barcode<T>) -> Self {
        Self::from_lifetimes(b.lifetimes())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sum(&self) -> T {
        self.sum
    }

    pub fn sum_sq(&self) -> T {
        self.sum_sq
    }

    pub fn mean(&self) -> Option<T> {
        (self.n > 0).then(|| self.sum / T::from_count(self.n))
    }

    pub fn tsi(&self) -> T {
        if self.n <= 1 {
            return T::zero();
        }
        let n = T::from_count(self.n);
        ((self.sum_sq - self.sum * self.sum / n) / (n - T::one())).max(T::zero())
    }

    pub fn cvtsi(&self) -> Result<T> {
        match self.mean() {
            Some(mean) if self.n >= 2 && mean > T::zero() => Ok(self.tsi() / (mean * mean)),
            _ => Err(undefined("cvTSI needs at least 2 bars and a positive mean")),
        }
    }

    pub fn insert(&self, ell: T) -> Self {
        RunningStats { n: self.n + 1, sum: self.sum + ell, sum_sq: self.sum_sq + ell * ell }
    }

    /// Removes one bar of length `ell`. Fails when no multiset with these
    /// statistics can contain `ell`.
    pub fn remove(&self, ell: T) -> Result<Self> {
        self.check_removable(ell)?;
        if self.n == 1 {
            return Ok(Self::new());
        }
        Ok(RunningStats {
            n: self.n - 1,
            sum: (self.sum - ell).max(T::zero()),
            sum_sq: (self.sum_sq - ell * ell).max(T::zero()),
        })
    }

    fn check_removable(&self, ell: T) -> Result<()> {
        if self.n == 0 {
            return Err(invalid("cannot remove a bar from an empty barcode"));
        }
        let tol = T::c(MEMBERSHIP_TOLERANCE);
        let not_member = || Error::NotAMember(ell.to_string());
        if !(ell >= T::zero()) || ell > self.sum + tol {
            return Err(not_member());
        }
        let rest_n = T::from_count(self.n - 1);
        let rest_sum = self.sum - ell;
        let rest_sq = self.sum_sq - ell * ell;
        if self.n == 1 {
            return if rest_sum.abs() <= tol { Ok(()) } else { Err(not_member()) };
        }
        // Cauchy–Schwarz on what would remain
        let slack = tol * self.sum_sq.max(T::one());
        if rest_sq + slack < rest_sum * rest_sum / rest_n {
            return Err(not_member());
        }
        Ok(())
    }
}

fn nonneg<T: Scalar>(ell: T) -> Result<()> {
    if !(ell >= T::zero()) || !ell.is_finite() {
        return Err(invalid(format!("bar length must be finite and nonnegative, got {ell}")));
    }
    Ok(())
}

fn require_two<T: Scalar>(stats: &RunningStats<T>) -> Result<(T, T)> {
    if stats.n < 2 {
        return Err(invalid(format!("update formulas need at least 2 bars, got {}", stats.n)));
    }
    Ok((T::from_count(stats.n), stats.mean().unwrap_or_else(T::zero)))
}

/// TSI after adding a bar of length `ell`.
pub fn tsi_after_insert<T: Scalar>(stats: &RunningStats<T>, ell: T) -> Result<T> {
    nonneg(ell)?;
    let (n, mean) = require_two(stats)?;
    let delta = ell - mean;
    Ok((n - T::one()) / n * stats.tsi() + delta * delta / (n + T::one()))
}

/// TSI after removing a bar of length `ell`.
///
/// Removing from two bars leaves one, whose TSI is `0` by convention.
pub fn tsi_after_delete<T: Scalar>(stats: &RunningStats<T>, ell: T) -> Result<T> {
    nonneg(ell)?;
    stats.check_removable(ell)?;
    if stats.n <= 2 {
        return Ok(T::zero());
    }
    let n = T::from_count(stats.n);
    let one = T::one();
    let two = T::c(2.0);
    let delta = ell - stats.mean().unwrap_or_else(T::zero);
    let v = (n - one) / (n - two) * stats.tsi() - n / ((n - one) * (n - two)) * delta * delta;
    Ok(v.max(T::zero()))
}

/// Like [`tsi_after_delete`], but first checks that some bar of `b` has
/// length `ell` to within [`MEMBERSHIP_TOLERANCE`].
pub fn tsi_after_delete_bar<T: Scalar>(b: &Barcode<T>, ell: T) -> Result<T> {
    let tol = T::c(MEMBERSHIP_TOLERANCE);
    if !b.lifetimes().iter().any(|&l| (l - ell).abs() <= tol) {
        return Err(Error::NotAMember(ell.to_string()));
    }
    tsi_after_delete(&RunningStats::from_barcode(b), ell)
}

/// Whether inserting `ell` strictly increases the TSI, i.e.
/// `(ell - ℓ̄)² > (n+1)/n · TSI`. Ties within a relative `1e-12` count as
/// no increase.
pub fn increases_tsi<T: Scalar>(stats: &RunningStats<T>, ell: T) -> Result<bool> {
    nonneg(ell)?;
    let (n, mean) = require_two(stats)?;
    let delta = ell - mean;
    let threshold = (n + T::one()) / n * stats.tsi();
    Ok(delta * delta > threshold + T::c(1e-12) * threshold.max(T::min_positive_value()))
}

/// cvTSI after adding a bar of length `ell`.
pub fn cvtsi_after_insert<T: Scalar>(stats: &RunningStats<T>, ell: T) -> Result<T> {
    nonneg(ell)?;
    let (n, mean) = require_two(stats)?;
    if !(mean > T::zero()) {
        return Err(undefined("cvTSI update needs a positive mean lifetime"));
    }
    let one = T::one();
    let r = (ell - mean) / mean;
    let cv = stats.tsi() / (mean * mean);
    let denom = n + one + r;
    Ok((n + one) * (n + one) * (n - one) / (n * denom * denom) * cv + (n + one) * (r / denom) * (r / denom))
}

/// `lim_{ℓ→0}` of [`tsi_after_insert`]: `(n-1)/n · TSI + ℓ̄²/(n+1)`.
pub fn tsi_insertion_limit<T: Scalar>(stats: &RunningStats<T>) -> Result<T> {
    let (n, mean) = require_two(stats)?;
    Ok((n - T::one()) / n * stats.tsi() + mean * mean / (n + T::one()))
}

/// `lim_{ℓ→0}` of [`cvtsi_after_insert`]: depends on `n` and cvTSI only.
pub fn cvtsi_insertion_limit<T: Scalar>(n: usize, cvtsi: T) -> Result<T> {
    if n < 2 {
        return Err(invalid(format!("need at least 2 bars, got {n}")));
    }
    let nf = T::from_count(n);
    let one = T::one();
    Ok((nf + one) * (nf + one) * (nf - one) / (nf * nf * nf) * cvtsi + (nf + one) / (nf * nf))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::summaries::tsi;

    fn stats(l: &[f64]) -> RunningStats<f64> {
        RunningStats::from_lifetimes(l)
    }

    fn direct_tsi(l: &[f64]) -> f64 {
        tsi(&Barcode::from_lifetimes(1, l).unwrap())
    }

    /// Welford's streaming variance.
    fn welford(l: &[f64]) -> f64 {
        let (mut mean, mut m2) = (0.0, 0.0);
        for (i, &x) in l.iter().enumerate() {
            let d = x - mean;
            mean += d / (i + 1) as f64;
            m2 += d * (x - mean);
        }
        m2 / (l.len() - 1) as f64
    }

    #[test]
    fn running_stats_match_welford() {
        let l = [0.3, 1.7, 2.2, 9.5, 0.0, 4.4];
        assert!((stats(&l).tsi() - welford(&l)).abs() < 1e-12);
        let grown = stats(&l[..5]).insert(l[5]);
        assert!((grown.tsi() - welford(&l)).abs() < 1e-12);
    }

    #[test]
    fn insert_examples() {
        let s = stats(&[1.0, 2.0]);
        assert!((tsi_after_insert(&s, 3.0).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(direct_tsi(&[1.0, 2.0, 3.0]), 1.0);
        assert!((tsi_after_insert(&s, 1.5).unwrap() - 0.25).abs() < 1e-15);
        assert!((tsi_insertion_limit(&s).unwrap() - 1.0).abs() < 1e-15);
        assert!((tsi_after_insert(&s, 0.0).unwrap() - direct_tsi(&[1.0, 2.0, 0.0])).abs() < 1e-15);
        assert!((tsi_insertion_limit(&s).unwrap() - s.tsi()).abs() > 1e-6);
        assert!(tsi_after_insert(&stats(&[1.0]), 3.0).is_err());
        assert!(tsi_after_insert(&s, -1.0).is_err());
    }

    #[test]
    fn delete_examples() {
        let s = stats(&[1.0, 2.0, 3.0]);
        assert!((tsi_after_delete(&s, 3.0).unwrap() - 0.5).abs() < 1e-15);
        let s4 = stats(&[1.0, 2.0, 3.0, 2.0]);
        let expect = 3.0 / 2.0 * s4.tsi();
        assert!((tsi_after_delete(&s4, 2.0).unwrap() - expect).abs() < 1e-15);
        let base = stats(&[0.4, 1.1, 3.3]);
        let back = tsi_after_delete(&base.insert(2.7), 2.7).unwrap();
        assert!((back - base.tsi()).abs() < 1e-12);
    }

    #[test]
    fn delete_edge_cases() {
        assert_eq!(tsi_after_delete(&stats(&[1.0, 2.0]), 2.0).unwrap(), 0.0);
        assert_eq!(tsi_after_delete(&stats(&[1.0]), 1.0).unwrap(), 0.0);
        assert!(tsi_after_delete(&RunningStats::<f64>::new(), 1.0).is_err());
        assert!(matches!(tsi_after_delete(&stats(&[1.0, 2.0, 3.0]), 10.0), Err(Error::NotAMember(_))));
        // feasible by sum, infeasible by Cauchy–Schwarz
        assert!(tsi_after_delete(&stats(&[1.0, 1.0, 1.0]), 0.0).is_err());
        let b = Barcode::from_lifetimes(1, &[1.0, 2.0, 3.0]).unwrap();
        assert!(tsi_after_delete_bar(&b, 2.5).is_err());
        assert!((tsi_after_delete_bar(&b, 3.0 + 1e-12).unwrap() - 0.5_f64).abs() < 1e-9);
    }

    #[test]
    fn increase_predicate_examples() {
        let s = stats(&[1.0, 2.0]);
        assert!(increases_tsi(&s, 2.5).unwrap());
        assert!(direct_tsi(&[1.0, 2.0, 2.5]) > 0.5);
        assert!(!increases_tsi(&s, 1.5).unwrap());
        let boundary = 1.5 + (1.5f64 * 0.5).sqrt();
        assert!(!increases_tsi(&s, boundary).unwrap());
        assert!((direct_tsi(&[1.0, 2.0, boundary]) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn cvtsi_insert_examples() {
        let s = stats(&[1.0, 2.0]);
        let v = cvtsi_after_insert(&s, 3.0).unwrap();
        assert!((v - 0.25).abs() < 1e-15);
        assert!((stats(&[1.0, 2.0, 3.0]).cvtsi().unwrap() - 0.25).abs() < 1e-15);
        let same = cvtsi_after_insert(&s, 1.5).unwrap();
        assert!((same - 0.5 * s.cvtsi().unwrap()).abs() < 1e-15);
        let lim = cvtsi_insertion_limit(2, s.cvtsi().unwrap()).unwrap();
        assert!((lim - 1.0).abs() < 1e-15);
        assert!((cvtsi_after_insert(&s, 0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((stats(&[1.0, 2.0, 0.0]).cvtsi().unwrap() - 1.0).abs() < 1e-15);
        assert!(cvtsi_after_insert(&stats(&[0.0, 0.0]), 1.0).is_err());
    }

    #[test]
    fn cvtsi_limit_ignores_scale() {
        let s = stats(&[0.3, 1.2, 2.0]);
        let big = stats(&[3.0, 12.0, 20.0]);
        let a = cvtsi_after_insert(&s, 0.0).unwrap();
        let b = cvtsi_after_insert(&big, 0.0).unwrap();
        assert!((a - b).abs() < 1e-13);
        assert!((a - cvtsi_insertion_limit(3, s.cvtsi().unwrap()).unwrap()).abs() < 1e-13);
    }
}
