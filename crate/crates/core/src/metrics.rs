//! Diagram distances and checkers for the TSI/cvTSI stability bounds.
//!
//! Only finite bars take part. The bottleneck distance uses the ℓ∞ ground
//! metric on `(birth, death)` points and lets any point be matched to its
//! diagonal projection `((b+d)/2, (b+d)/2)` at cost `(d-b)/2`.

use std::collections::VecDeque;

use serde_json::{json, Value};

use crate::barcode::Barcode;
use crate::entropy;
use crate::error::{invalid, undefined, Error, Result};
use crate::scalar::{compensated_sum, Scalar};
use crate::summaries::tsi;

/// Order of a Wasserstein distance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PNorm<T> {
    Finite(T),
    Infinity,
}

impl<T: Scalar> PNorm<T> {
    fn check(self) -> Result<Self> {
        match self {
            PNorm::Finite(p) if !(p >= T::c(2.0)) || !p.is_finite() => {
                Err(invalid(format!("Wasserstein order must lie in [2, inf], got {p}")))
            }
            other => Ok(other),
        }
    }
}

/// Where a diagram point is sent by a matching.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatchTarget {
    Bar(usize),
    Diagonal,
}

/// A bijection between the augmented diagrams. Each entry pairs a point
/// of the first diagram (or the diagonal) with a point of the second (or
/// the diagonal); diagonal-to-diagonal pairs are left out.
#[derive(Clone, Debug, PartialEq)]
pub struct Matching<T> {
    pub pairs: Vec<(MatchTarget, MatchTarget)>,
    pub cost: T,
}

/// Outcome of checking one inequality `lhs <= rhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundCheck<T> {
    pub bound: String,
    pub lhs: T,
    pub rhs: T,
    pub holds: bool,
}

/// Slack allowed on the right-hand side of every bound.
pub const BOUND_TOLERANCE: f64 = 1e-12;

impl<T: Scalar> BoundCheck<T> {
    fn new(bound: impl Into<String>, lhs: T, rhs: T) -> Self {
        let holds = lhs <= rhs + T::c(BOUND_TOLERANCE);
        BoundCheck { bound: bound.into(), lhs, rhs, holds }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "bound": self.bound,
            "lhs": self.lhs.to_f64(),
            "rhs": self.rhs.to_f64(),
            "holds": self.holds,
        })
    }
}

/// Wasserstein distance to the empty diagram: `½‖ℓ‖_p`.
pub fn wasserstein_to_empty<T: Scalar>(b: &Barcode<T>, p: PNorm<T>) -> Result<T> {
    let p = p.check()?;
    let half = T::c(0.5);
    let max = match b.max_lifetime() {
        Some(m) if m > T::zero() => m,
        _ => return Ok(T::zero()),
    };
    Ok(match p {
        PNorm::Infinity => half * max,
        PNorm::Finite(p) => {
            let s = compensated_sum(b.lifetimes().iter().map(|&l| (l / max).powf(p)));
            half * max * s.powf(p.recip())
        }
    })
}

fn points<T: Scalar>(b: &Barcode<T>) -> Vec<(T, T)> {
    b.bars().iter().filter(|bar| !bar.is_infinite()).map(|bar| (bar.birth(), bar.death())).collect()
}

pub(crate) fn linf<T: Scalar>(a: (T, T), b: (T, T)) -> T {
    (a.0 - b.0).abs().max((a.1 - b.1).abs())
}

pub(crate) fn to_diagonal<T: Scalar>(a: (T, T)) -> T {
    (a.1 - a.0) / T::c(2.0)
}

/// Hopcroft–Karp on a bipartite graph with `adj[left] = [right...]`.
/// Returns `match_left`.
fn max_matching(adj: &[Vec<usize>], n_right: usize) -> Vec<Option<usize>> {
    let n_left = adj.len();
    let mut match_left = vec![None; n_left];
    let mut match_right: Vec<Option<usize>> = vec![None; n_right];
    let mut dist = vec![usize::MAX; n_left];
    loop {
        // layer free left vertices
        let mut queue = VecDeque::new();
        for u in 0..n_left {
            if match_left[u].is_none() {
                dist[u] = 0;
                queue.push_back(u);
            } else {
                dist[u] = usize::MAX;
            }
        }
        let mut found = false;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                match match_right[v] {
                    None => found = true,
                    Some(w) if dist[w] == usize::MAX => {
                        dist[w] = dist[u] + 1;
                        queue.push_back(w);
                    }
                    _ => {}
                }
            }
        }
        if !found {
            return match_left;
        }
        let mut next = vec![0usize; n_left];
        for u in 0..n_left {
            if match_left[u].is_none() {
                augment(u, adj, &mut match_left, &mut match_right, &mut dist, &mut next);
            }
        }
    }
}

fn augment(
    u: usize,
    adj: &[Vec<usize>],
    match_left: &mut [Option<usize>],
    match_right: &mut [Option<usize>],
    dist: &mut [usize],
    next: &mut [usize],
) -> bool {
    while next[u] < adj[u].len() {
        let v = adj[u][next[u]];
        next[u] += 1;
        let ok = match match_right[v] {
            None => true,
            Some(w) => dist[w] == dist[u] + 1 && augment(w, adj, match_left, match_right, dist, next),
        };
        if ok {
            match_left[u] = Some(v);
            match_right[v] = Some(u);
            return true;
        }
    }
    dist[u] = usize::MAX;
    false
}

/// Left nodes: points of `a`, then diagonal copies of points of `b`.
/// Right nodes: points of `b`, then diagonal copies of points of `a`.
fn threshold_graph<T: Scalar>(a: &[(T, T)], b: &[(T, T)], t: T) -> Vec<Vec<usize>> {
    let (n, m) = (a.len(), b.len());
    let mut adj = vec![Vec::new(); n + m];
    for (i, &p) in a.iter().enumerate() {
        for (j, &q) in b.iter().enumerate() {
            if linf(p, q) <= t {
                adj[i].push(j);
            }
        }
        if to_diagonal(p) <= t {
            adj[i].push(m + i);
        }
    }
    for (j, &q) in b.iter().enumerate() {
        if to_diagonal(q) <= t {
            adj[n + j].push(j);
        }
        adj[n + j].extend(m..m + n);
    }
    adj
}

/// Exact bottleneck distance and an optimal matching.
pub fn bottleneck_matching<T: Scalar>(b1: &Barcode<T>, b2: &Barcode<T>) -> Matching<T> {
    let a = points(b1);
    let b = points(b2);
    let (n, m) = (a.len(), b.len());
    if n + m == 0 {
        return Matching { pairs: Vec::new(), cost: T::zero() };
    }
    let mut candidates: Vec<T> = Vec::with_capacity(n * m + n + m + 1);
    candidates.push(T::zero());
    for &p in &a {
        candidates.extend(b.iter().map(|&q| linf(p, q)));
        candidates.push(to_diagonal(p));
    }
    candidates.extend(b.iter().map(|&q| to_diagonal(q)));
    candidates.sort_by(T::cmp_total);
    candidates.dedup();

    let perfect = |t: T| {
        let ml = max_matching(&threshold_graph(&a, &b, t), n + m);
        ml.iter().all(Option::is_some).then_some(ml)
    };
    // the largest candidate always admits a perfect matching
    let (mut lo, mut hi) = (0usize, candidates.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if perfect(candidates[mid]).is_some() {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let cost = candidates[lo];
    let ml = perfect(cost).expect("perfect matching at the optimal threshold");
    let mut pairs = Vec::new();
    for (u, v) in ml.into_iter().enumerate() {
        let v = v.expect("perfect");
        let left = if u < n { MatchTarget::Bar(u) } else { MatchTarget::Diagonal };
        let right = if v < m { MatchTarget::Bar(v) } else { MatchTarget::Diagonal };
        if left != MatchTarget::Diagonal || right != MatchTarget::Diagonal {
            pairs.push((left, right));
        }
    }
    Matching { pairs, cost }
}

pub fn bottleneck<T: Scalar>(b1: &Barcode<T>, b2: &Barcode<T>) -> T {
    bottleneck_matching(b1, b2).cost
}

fn require_two<T: Scalar>(b: &Barcode<T>) -> Result<usize> {
    if b.n() < 2 {
        return Err(invalid(format!("bound needs at least 2 bars, got {}", b.n())));
    }
    Ok(b.n())
}

fn equal_cardinality<T: Scalar>(b1: &Barcode<T>, b2: &Barcode<T>) -> Result<usize> {
    if b1.n() != b2.n() {
        return Err(Error::CardinalityMismatch { left: b1.n(), right: b2.n() });
    }
    require_two(b1)
}

/// `TSI ≤ 4 n^{-2/p} W_p(B, ∅)²`.
pub fn check_tsi_empty_bound<T: Scalar>(b: &Barcode<T>, p: PNorm<T>) -> Result<BoundCheck<T>> {
    let n = T::from_count(require_two(b)?);
    let w = wasserstein_to_empty(b, p)?;
    let (factor, name) = match p {
        PNorm::Infinity => (T::one(), "wasserstein_empty_inf".to_string()),
        PNorm::Finite(p) => (n.powf(-T::c(2.0) / p), format!("wasserstein_empty_p{p}")),
    };
    Ok(BoundCheck::new(name, tsi(b), T::c(4.0) * factor * w * w))
}

/// `TSI ≤ n/(n-1) · ¼ (ℓ_max - ℓ_min)²`.
pub fn check_popoviciu_bound<T: Scalar>(b: &Barcode<T>) -> Result<BoundCheck<T>> {
    let n = T::from_count(require_two(b)?);
    let range = b.max_lifetime().unwrap_or_else(T::zero) - b.min_lifetime().unwrap_or_else(T::zero);
    let rhs = n / (n - T::one()) * T::c(0.25) * range * range;
    Ok(BoundCheck::new("popoviciu", tsi(b), rhs))
}

/// `|TSI₁ - TSI₂| ≤ 4/(n-1) · (L₁ + L₂) · d_B` for equal bar counts.
pub fn check_equal_cardinality_bound<T: Scalar>(b1: &Barcode<T>, b2: &Barcode<T>) -> Result<BoundCheck<T>> {
    let n = T::from_count(equal_cardinality(b1, b2)?);
    let lhs = (tsi(b1) - tsi(b2)).abs();
    let rhs = T::c(4.0) / (n - T::one()) * (b1.total_persistence() + b2.total_persistence()) * bottleneck(b1, b2);
    Ok(BoundCheck::new("equal_cardinality", lhs, rhs))
}

/// `|cvTSI₁ - cvTSI₂| ≤ 8n² / ((n-1) · min(ℓ̄₁, ℓ̄₂)) · d_B` for equal bar counts.
pub fn check_cvtsi_stability_bound<T: Scalar>(b1: &Barcode<T>, b2: &Barcode<T>) -> Result<BoundCheck<T>> {
    let n = equal_cardinality(b1, b2)?;
    let min_mean = b1.mean_lifetime().unwrap_or_else(T::zero).min(b2.mean_lifetime().unwrap_or_else(T::zero));
    if !(min_mean > T::zero()) {
        return Err(undefined("cvTSI stability needs positive mean lifetimes"));
    }
    let nf = T::from_count(n);
    let lhs = (entropy::cvtsi(b1)? - entropy::cvtsi(b2)?).abs();
    let rhs = T::c(8.0) * nf * nf / ((nf - T::one()) * min_mean) * bottleneck(b1, b2);
    Ok(BoundCheck::new("cvtsi_stability", lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::summaries::shift_deaths;

    fn bc(l: &[f64]) -> Barcode<f64> {
        Barcode::from_lifetimes(1, l).unwrap()
    }

    fn iv(v: &[(f64, f64)]) -> Barcode<f64> {
        Barcode::from_intervals(1, v).unwrap()
    }

    #[test]
    fn wasserstein_examples() {
        assert_eq!(wasserstein_to_empty(&bc(&[0.0, 0.0, 0.0, 4.0]), PNorm::Infinity).unwrap(), 2.0);
        let w = wasserstein_to_empty(&bc(&[1.0, 2.0]), PNorm::Finite(2.0)).unwrap();
        assert!((w - 5f64.sqrt() / 2.0).abs() < 1e-15);
        assert_eq!(wasserstein_to_empty(&Barcode::<f64>::empty(1), PNorm::Finite(3.0)).unwrap(), 0.0);
        assert!(wasserstein_to_empty(&bc(&[1.0]), PNorm::Finite(1.5)).is_err());
    }

    #[test]
    fn wasserstein_p_chain_decreases_to_sup() {
        let b = bc(&[0.3, 1.1, 2.9, 2.0]);
        let inf = wasserstein_to_empty(&b, PNorm::Infinity).unwrap();
        let ws: Vec<f64> = [2.0, 8.0, 32.0, 128.0]
            .iter()
            .map(|&p| wasserstein_to_empty(&b, PNorm::Finite(p)).unwrap())
            .collect();
        assert!(ws.windows(2).all(|w| w[0] >= w[1]));
        assert!(ws.iter().all(|&w| w >= inf));
        assert!((ws[3] - inf).abs() < 1e-2);
    }

    #[test]
    fn bottleneck_examples() {
        let a = iv(&[(0.0, 1.0), (0.5, 2.0)]);
        assert_eq!(bottleneck(&a, &a), 0.0);
        let d = bottleneck(&iv(&[(0.0, 1.0)]), &iv(&[(0.0, 1.2)]));
        assert!((d - 0.2).abs() < 1e-15);
        assert_eq!(bottleneck(&iv(&[(0.0, 2.0)]), &Barcode::empty(1)), 1.0);
        assert_eq!(bottleneck(&Barcode::<f64>::empty(1), &Barcode::empty(1)), 0.0);
    }

    #[test]
    fn matching_covers_every_bar_once() {
        let a = iv(&[(0.0, 1.0), (0.0, 5.0), (2.0, 2.1)]);
        let b = iv(&[(0.0, 1.1), (0.2, 5.0)]);
        let m = bottleneck_matching(&a, &b);
        for (side, count) in [(0usize, 3usize), (1, 2)] {
            for i in 0..count {
                let hits = m
                    .pairs
                    .iter()
                    .filter(|p| (if side == 0 { p.0 } else { p.1 }) == MatchTarget::Bar(i))
                    .count();
                assert_eq!(hits, 1);
            }
        }
        assert!((m.cost - 0.2).abs() < 1e-15);
    }

    #[test]
    fn tsi_empty_bound_examples() {
        let c = check_tsi_empty_bound(&bc(&[0.0, 0.0, 0.0, 4.0]), PNorm::Infinity).unwrap();
        assert_eq!((c.lhs, c.rhs, c.holds), (4.0, 16.0, true));
        let c = check_tsi_empty_bound(&bc(&[1.0, 2.0]), PNorm::Finite(2.0)).unwrap();
        assert!((c.lhs - 0.5).abs() < 1e-15 && (c.rhs - 2.5).abs() < 1e-14 && c.holds);
        let c = check_tsi_empty_bound(&bc(&[1.5; 3]), PNorm::Finite(2.0)).unwrap();
        assert_eq!(c.lhs, 0.0);
        assert!(c.holds);
    }

    #[test]
    fn popoviciu_examples() {
        let c = check_popoviciu_bound(&bc(&[0.0, 4.0])).unwrap();
        assert_eq!((c.lhs, c.rhs, c.holds), (8.0, 8.0, true));
        let c = check_popoviciu_bound(&bc(&[2.0; 3])).unwrap();
        assert_eq!((c.lhs, c.rhs, c.holds), (0.0, 0.0, true));
        let c = check_popoviciu_bound(&bc(&[1.0, 2.0, 3.0])).unwrap();
        assert_eq!((c.lhs, c.rhs, c.holds), (1.0, 1.5, true));
        assert!(check_popoviciu_bound(&bc(&[1.0])).is_err());
    }

    #[test]
    fn equal_cardinality_examples() {
        let a = iv(&[(0.0, 1.0), (0.0, 2.0)]);
        let b = iv(&[(0.0, 1.1), (0.0, 2.0)]);
        let c = check_equal_cardinality_bound(&a, &b).unwrap();
        assert!((c.lhs - 0.095).abs() < 1e-12);
        assert!((c.rhs - 2.44).abs() < 1e-12);
        assert!(c.holds);
        let c = check_equal_cardinality_bound(&a, &a).unwrap();
        assert_eq!((c.lhs, c.rhs, c.holds), (0.0, 0.0, true));
        let shifted = shift_deaths(&a, 0.3).unwrap();
        let c = check_equal_cardinality_bound(&a, &shifted).unwrap();
        assert!(c.lhs.abs() < 1e-15 && c.rhs > 0.0 && c.holds);
        assert!(matches!(
            check_equal_cardinality_bound(&a, &bc(&[1.0, 2.0, 3.0])),
            Err(Error::CardinalityMismatch { left: 2, right: 3 })
        ));
    }

    #[test]
    fn cvtsi_stability_examples() {
        let a = iv(&[(0.0, 1.0), (0.2, 2.0), (0.1, 0.4)]);
        let c = check_cvtsi_stability_bound(&a, &a).unwrap();
        assert_eq!((c.lhs, c.rhs, c.holds), (0.0, 0.0, true));
        let s = crate::summaries::scale(&a, 1.01).unwrap();
        let c = check_cvtsi_stability_bound(&a, &s).unwrap();
        assert!(c.lhs < 1e-12 && c.rhs > 0.0 && c.holds);
        assert!(check_cvtsi_stability_bound(&bc(&[0.0, 0.0]), &bc(&[1.0, 1.0])).is_err());
    }
}
