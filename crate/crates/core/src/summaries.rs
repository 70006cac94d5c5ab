//! First- and second-moment summaries of the lifetime multiset.
//!
//! * TSI: unbiased sample variance of lifetimes, `0` when `n <= 1`.
//! * TSigI: `Σℓ² / Σℓ`, the persistence-weighted mean lifetime.
//! * `M_k = S_k / S_{k-1}` with `S_k = Σℓ^k`; `M_1` is the mean lifetime,
//!   `M_2` is TSigI and `M_k` increases to the largest lifetime.

use serde_json::{json, Value};

use crate::barcode::{fmt_num, Bar, Barcode};
use crate::entropy;
use crate::error::{invalid, undefined, Result};
use crate::scalar::{compensated_sum, Scalar};

/// Topological Stability Index of a barcode.
pub fn tsi<T: Scalar>(b: &Barcode<T>) -> T {
    tsi_of(b.lifetimes())
}

pub(crate) fn tsi_of<T: Scalar>(lifetimes: &[T]) -> T {
    let n = lifetimes.len();
    if n <= 1 {
        return T::zero();
    }
    let (lo, hi) = lifetimes
        .iter()
        .fold((lifetimes[0], lifetimes[0]), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    if lo == hi {
        return T::zero();
    }
    let nf = T::from_count(n);
    let mean = compensated_sum(lifetimes.iter().copied()) / nf;
    // corrected two-pass
    let s1 = compensated_sum(lifetimes.iter().map(|&x| x - mean));
    let s2 = compensated_sum(lifetimes.iter().map(|&x| (x - mean) * (x - mean)));
    ((s2 - s1 * s1 / nf) / (nf - T::one())).max(T::zero())
}

/// Range of TSI over barcodes with `n` bars and total persistence `total`:
/// `(0, total² / n)`.
pub fn tsi_bounds<T: Scalar>(n: usize, total: T) -> Result<(T, T)> {
    if n < 2 {
        return Err(invalid(format!("tsi bounds need at least 2 bars, got {n}")));
    }
    if !(total >= T::zero()) {
        return Err(invalid("total persistence must be nonnegative"));
    }
    Ok((T::zero(), total * total / T::from_count(n)))
}

/// Whether all lifetimes agree up to `1e-12 · max(1, mean)`.
pub fn all_lifetimes_equal<T: Scalar>(b: &Barcode<T>) -> bool {
    match (b.min_lifetime(), b.max_lifetime(), b.mean_lifetime()) {
        (Some(lo), Some(hi), Some(mean)) => hi - lo <= T::c(1e-12) * mean.max(T::one()),
        _ => true,
    }
}

/// Maps every bar `[b, d)` to `[c·b, c·d)`.
pub fn scale<T: Scalar>(b: &Barcode<T>, c: T) -> Result<Barcode<T>> {
    if !(c >= T::zero()) || !c.is_finite() {
        return Err(invalid(format!("scale factor must be finite and nonnegative, got {c}")));
    }
    let bars = b
        .bars()
        .iter()
        .map(|bar| {
            let death = if bar.is_infinite() { bar.death() } else { bar.death() * c };
            Bar::new(bar.degree(), bar.birth() * c, death)
        })
        .collect::<Result<Vec<_>>>()?;
    Barcode::new(b.degree(), bars)
}

/// Maps every bar `[b, d)` to `[b, d + c)`. Requires `c > -min ℓ`.
pub fn shift_deaths<T: Scalar>(b: &Barcode<T>, c: T) -> Result<Barcode<T>> {
    if !c.is_finite() {
        return Err(invalid("death shift must be finite"));
    }
    if let Some(min) = b.min_lifetime() {
        if c <= -min {
            return Err(invalid(format!("shift {c} must exceed minus the shortest lifetime ({min})")));
        }
    }
    let bars = b
        .bars()
        .iter()
        .map(|bar| Bar::new(bar.degree(), bar.birth(), bar.death() + c))
        .collect::<Result<Vec<_>>>()?;
    Barcode::new(b.degree(), bars)
}

/// Topological Signal Index `Σℓ² / Σℓ`.
pub fn tsigi<T: Scalar>(b: &Barcode<T>) -> Result<T> {
    let total = b.total_persistence();
    if !(total > T::zero()) {
        return Err(undefined("TSigI needs positive total persistence"));
    }
    let sq = compensated_sum(b.lifetimes().iter().map(|&x| x * x));
    if sq.is_finite() {
        Ok(sq / total)
    } else {
        moment(b, 2)
    }
}

/// `k`-th signal moment `S_k / S_{k-1}`.
pub fn moment<T: Scalar>(b: &Barcode<T>, k: u32) -> Result<T> {
    if k == 0 {
        return Err(invalid("moment order starts at 1"));
    }
    let lifetimes = b.lifetimes();
    let max = b.max_lifetime().ok_or_else(|| undefined("moments of an empty barcode"))?;
    if k == 1 {
        return Ok(b.total_persistence() / T::from_count(lifetimes.len()));
    }
    if max == T::zero() {
        return Err(undefined(format!("M_{k} has a zero denominator")));
    }
    let power_sums = |scale: T| {
        let num = compensated_sum(lifetimes.iter().map(|&x| (x / scale).powi(k as i32)));
        let den = compensated_sum(lifetimes.iter().map(|&x| (x / scale).powi(k as i32 - 1)));
        (num, den)
    };
    let (num, den) = power_sums(T::one());
    if num.is_finite() && den.is_normal() && num.is_normal() {
        return Ok(num / den);
    }
    // factor out the largest lifetime to stay in range
    let (num, den) = power_sums(max);
    Ok(max * num / den)
}

/// `M_1..=M_k`; orders with a zero denominator map to `None`.
pub fn moments<T: Scalar>(b: &Barcode<T>, k: u32) -> Vec<(u32, Option<T>)> {
    (1..=k).map(|i| (i, moment(b, i).ok())).collect()
}

/// Every scalar statistic for one barcode.
#[derive(Clone, Debug, PartialEq)]
pub struct SummaryReport<T> {
    pub degree: usize,
    pub n: usize,
    pub total_persistence: T,
    pub mean_lifetime: Option<T>,
    pub tsi: T,
    pub tsigi: Option<T>,
    pub moments: Vec<(u32, Option<T>)>,
    pub entropy: Option<T>,
    pub renyi2: Option<T>,
    pub cvtsi: Option<T>,
    pub cvtsi_over_n: Option<T>,
}

impl<T: Scalar> SummaryReport<T> {
    pub fn compute(b: &Barcode<T>, max_moment: u32) -> Self {
        SummaryReport {
            degree: b.degree(),
            n: b.n(),
            total_persistence: b.total_persistence(),
            mean_lifetime: b.mean_lifetime(),
            tsi: tsi(b),
            tsigi: tsigi(b).ok(),
            moments: moments(b, max_moment),
            entropy: entropy::persistent_entropy(b).ok(),
            renyi2: entropy::renyi_entropy(b, T::c(2.0)).ok(),
            cvtsi: entropy::cvtsi(b).ok(),
            cvtsi_over_n: entropy::cvtsi_over_n(b).ok(),
        }
    }

    /// Divides entropy-valued fields by `ln 2`.
    pub fn in_bits(mut self) -> Self {
        let ln2 = T::c(std::f64::consts::LN_2);
        self.entropy = self.entropy.map(|h| h / ln2);
        self.renyi2 = self.renyi2.map(|h| h / ln2);
        self
    }

    pub fn to_json(&self) -> Value {
        let num = |x: T| json!(x.to_f64());
        let opt = |x: Option<T>| x.map_or(Value::Null, num);
        json!({
            "degree": self.degree,
            "n": self.n,
            "total_persistence": num(self.total_persistence),
            "mean_lifetime": opt(self.mean_lifetime),
            "tsi": num(self.tsi),
            "tsigi": opt(self.tsigi),
            "moments": self.moments.iter().map(|&(k, m)| json!([k, opt(m)])).collect::<Vec<_>>(),
            "entropy": opt(self.entropy),
            "renyi2": opt(self.renyi2),
            "cvtsi": opt(self.cvtsi),
            "cvtsi_over_n": opt(self.cvtsi_over_n),
        })
    }

    pub fn csv_header(max_moment: u32) -> Vec<String> {
        let mut cols: Vec<String> = ["degree", "n", "L", "mean", "tsi", "tsigi"].map(String::from).into();
        cols.extend((1..=max_moment).map(|k| format!("M{k}")));
        cols.extend(["entropy", "renyi2", "cvtsi", "cvtsi_over_n"].map(String::from));
        cols
    }

    /// Undefined values are written as empty fields.
    pub fn csv_row(&self) -> Vec<String> {
        let opt = |x: Option<T>| x.map_or(String::new(), fmt_num);
        let mut row = vec![
            self.degree.to_string(),
            self.n.to_string(),
            fmt_num(self.total_persistence),
            opt(self.mean_lifetime),
            fmt_num(self.tsi),
            opt(self.tsigi),
        ];
        row.extend(self.moments.iter().map(|&(_, m)| opt(m)));
        row.extend([self.entropy, self.renyi2, self.cvtsi, self.cvtsi_over_n].map(opt));
        row
    }
}
