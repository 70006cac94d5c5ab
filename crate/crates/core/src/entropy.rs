//! Persistent entropy, Rényi entropy and the normalized TSI.
//!
//! All of these depend on the barcode only through the weight vector
//! `p_i = ℓ_i / L`, so they are invariant under scaling. The normalized
//! index `cvTSI = TSI / mean²` is an affine function of the collision
//! probability `Σp_i²`:
//!
//! ```text
//! Σp_i² = 1/n + (n-1)/n² · cvTSI,      H₂ = -ln Σp_i²
//! ```
//!
//! Logarithms are natural throughout.

use crate::barcode::Barcode;
use crate::error::{invalid, undefined, Result};
use crate::scalar::{compensated_sum, Scalar};
use crate::summaries;

/// Lifetimes normalized to a probability vector.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightVector<T> {
    weights: Vec<T>,
}

impl<T: Scalar> WeightVector<T> {
    pub fn from_barcode(b: &Barcode<T>) -> Result<Self> {
        Self::from_lifetimes(b.lifetimes())
    }

    pub fn from_lifetimes(lifetimes: &[T]) -> Result<Self> {
        let total = compensated_sum(lifetimes.iter().copied());
        if !(total > T::zero()) || !total.is_finite() {
            return Err(undefined("weights need positive finite total persistence"));
        }
        let raw: Vec<T> = lifetimes.iter().map(|&l| l / total).collect();
        // renormalize by the computed sum so Σp = 1 to rounding
        let s = compensated_sum(raw.iter().copied());
        Ok(WeightVector { weights: raw.into_iter().map(|p| p / s).collect() })
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `-Σ p ln p` with `0 ln 0 = 0`.
    pub fn shannon(&self) -> T {
        let h = compensated_sum(
            self.weights.iter().filter(|&&p| p > T::zero()).map(|&p| -p * p.ln()),
        );
        h.max(T::zero())
    }

    /// `Σ p²`.
    pub fn collision(&self) -> T {
        compensated_sum(self.weights.iter().map(|&p| p * p))
    }

    pub fn renyi(&self, alpha: T) -> Result<T> {
        check_alpha(alpha)?;
        if alpha == T::c(2.0) {
            return Ok(T::zero() - self.collision().ln());
        }
        let s = compensated_sum(
            self.weights.iter().filter(|&&p| p > T::zero()).map(|&p| p.powf(alpha)),
        );
        // adding zero turns a -0 from a single bar into 0
        Ok(s.ln() / (T::one() - alpha) + T::zero())
    }

    /// Deviations `ε_i = p_i - 1/n` from the uniform vector.
    pub fn deviations(&self) -> Vec<T> {
        let u = T::one() / T::from_count(self.len());
        self.weights.iter().map(|&p| p - u).collect()
    }

    /// `‖p - u‖₂²`.
    pub fn distance_to_uniform_sq(&self) -> T {
        compensated_sum(self.deviations().into_iter().map(|e| e * e))
    }
}

fn check_alpha<T: Scalar>(alpha: T) -> Result<()> {
    if !(alpha > T::zero()) || alpha == T::one() || alpha.is_nan() {
        return Err(invalid(format!("Rényi order must be positive and not 1, got {alpha}")));
    }
    Ok(())
}

fn require_cvtsi_domain<T: Scalar>(b: &Barcode<T>) -> Result<()> {
    if b.n() < 2 {
        return Err(undefined(format!("cvTSI needs at least 2 bars, got {}", b.n())));
    }
    if !(b.total_persistence() > T::zero()) {
        return Err(undefined("cvTSI needs positive total persistence"));
    }
    Ok(())
}

pub fn persistent_entropy<T: Scalar>(b: &Barcode<T>) -> Result<T> {
    Ok(WeightVector::from_barcode(b)?.shannon())
}

/// Rényi entropy of order `alpha` (`alpha > 0`, `alpha != 1`).
pub fn renyi_entropy<T: Scalar>(b: &Barcode<T>, alpha: T) -> Result<T> {
    check_alpha(alpha)?;
    WeightVector::from_barcode(b)?.renyi(alpha)
}

/// `TSI / (L/n)²`, in `[0, n]`.
pub fn cvtsi<T: Scalar>(b: &Barcode<T>) -> Result<T> {
    require_cvtsi_domain(b)?;
    let mean = b.total_persistence() / T::from_count(b.n());
    Ok(summaries::tsi(b) / (mean * mean))
}

/// `cvTSI / n`, in `[0, 1]`.
pub fn cvtsi_over_n<T: Scalar>(b: &Barcode<T>) -> Result<T> {
    Ok(cvtsi(b)? / T::from_count(b.n()))
}

pub fn collision_probability<T: Scalar>(b: &Barcode<T>) -> Result<T> {
    require_cvtsi_domain(b)?;
    Ok(WeightVector::from_barcode(b)?.collision())
}

/// Recovers cvTSI from the bar count and the order-2 Rényi entropy.
pub fn cvtsi_from_renyi2<T: Scalar>(n: usize, h2: T) -> Result<T> {
    if n < 2 {
        return Err(invalid(format!("need at least 2 bars, got {n}")));
    }
    let nf = T::from_count(n);
    let q = (-h2).exp();
    let lo = T::one() / nf;
    let tol = T::c(1e-12);
    if !(q >= lo * (T::one() - tol) && q <= T::one() + tol) {
        return Err(invalid(format!("H2 = {h2} is not attainable with {n} bars")));
    }
    let q = q.max(lo).min(T::one());
    Ok(nf * nf / (nf - T::one()) * (q - lo))
}

/// Squared Euclidean distance of the weight vector from uniform.
pub fn distance_to_uniform_sq<T: Scalar>(b: &Barcode<T>) -> Result<T> {
    require_cvtsi_domain(b)?;
    Ok(WeightVector::from_barcode(b)?.distance_to_uniform_sq())
}

/// `E(B) - (ln n - (n-1)/(2n) · cvTSI)`: the part of the entropy the
/// quadratic expansion around the uniform vector misses.
pub fn entropy_expansion_residual<T: Scalar>(b: &Barcode<T>) -> Result<T> {
    require_cvtsi_domain(b)?;
    let n = T::from_count(b.n());
    let e = persistent_entropy(b)?;
    let cv = cvtsi(b)?;
    Ok(e - (n.ln() - (n - T::one()) / (T::c(2.0) * n) * cv))
}
