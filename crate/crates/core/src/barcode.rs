//! Bars, barcodes and the CSV formats for diagrams and point clouds.
//!
//! A [`Barcode`] holds the bars of a single homology degree together with
//! the multiset of finite lifetimes every summary is computed from. Bars
//! with infinite death are kept (so diagrams round-trip through files) but
//! never enter the lifetime multiset; [`InfinitePolicy::Truncate`] caps
//! them instead.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{invalid, Error, Result};
use crate::scalar::{compensated_sum, Scalar};

/// One persistence interval `[birth, death)` in a fixed homology degree.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bar<T> {
    degree: usize,
    birth: T,
    death: T,
}

impl<T: Scalar> Bar<T> {
    /// Zero-length bars are allowed; `death` may be `+inf`.
    pub fn new(degree: usize, birth: T, death: T) -> Result<Self> {
        if !birth.is_finite() {
            return Err(invalid(format!("birth must be finite, got {birth}")));
        }
        if death.is_nan() || death < birth {
            return Err(invalid(format!("death {death} is before birth {birth}")));
        }
        Ok(Bar { degree, birth, death })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn birth(&self) -> T {
        self.birth
    }

    pub fn death(&self) -> T {
        self.death
    }

    pub fn is_infinite(&self) -> bool {
        self.death.is_infinite()
    }

    /// `death - birth`, or `None` for an essential bar.
    pub fn lifetime(&self) -> Option<T> {
        if self.is_infinite() {
            None
        } else {
            Some(self.death - self.birth)
        }
    }
}

impl<T: Scalar> fmt::Display for Bar<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "H{}[{}, {})", self.degree, fmt_num(self.birth), fmt_num(self.death))
    }
}

/// What to do with bars whose death is infinite.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub enum InfinitePolicy<T> {
    /// Keep the bar but leave it out of the lifetime multiset.
    #[default]
    Exclude,
    /// Replace an infinite death by this cap.
    Truncate(T),
}

/// Bars of a single homology degree and their finite lifetimes.
#[derive(Clone, Debug, PartialEq)]
pub struct Barcode<T> {
    degree: usize,
    bars: Vec<Bar<T>>,
    lifetimes: Vec<T>,
    total: T,
}

impl<T: Scalar> Barcode<T> {
    pub fn new(degree: usize, bars: Vec<Bar<T>>) -> Result<Self> {
        if let Some(bad) = bars.iter().find(|b| b.degree != degree) {
            return Err(invalid(format!(
                "bar {bad} does not belong to a degree-{degree} barcode"
            )));
        }
        let lifetimes: Vec<T> = bars.iter().filter_map(Bar::lifetime).collect();
        let total = compensated_sum(lifetimes.iter().copied());
        Ok(Barcode { degree, bars, lifetimes, total })
    }

    pub fn empty(degree: usize) -> Self {
        Barcode { degree, bars: Vec::new(), lifetimes: Vec::new(), total: T::zero() }
    }

    /// Bars `[0, l)` for each lifetime `l`.
    pub fn from_lifetimes(degree: usize, lifetimes: &[T]) -> Result<Self> {
        let bars = lifetimes
            .iter()
            .map(|&l| Bar::new(degree, T::zero(), l))
            .collect::<Result<Vec<_>>>()?;
        if bars.iter().any(Bar::is_infinite) {
            return Err(invalid("lifetimes must be finite"));
        }
        Self::new(degree, bars)
    }

    pub fn from_intervals(degree: usize, intervals: &[(T, T)]) -> Result<Self> {
        let bars = intervals
            .iter()
            .map(|&(b, d)| Bar::new(degree, b, d))
            .collect::<Result<Vec<_>>>()?;
        Self::new(degree, bars)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// All bars, including infinite ones, in insertion order.
    pub fn bars(&self) -> &[Bar<T>] {
        &self.bars
    }

    /// Finite lifetimes, one per finite bar, in bar order.
    pub fn lifetimes(&self) -> &[T] {
        &self.lifetimes
    }

    /// Number of finite bars.
    pub fn n(&self) -> usize {
        self.lifetimes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lifetimes.is_empty()
    }

    pub fn infinite_count(&self) -> usize {
        self.bars.len() - self.lifetimes.len()
    }

    /// Compensated sum of lifetimes.
    pub fn total_persistence(&self) -> T {
        self.total
    }

    pub fn mean_lifetime(&self) -> Option<T> {
        if self.is_empty() {
            None
        } else {
            Some(self.total / T::from_count(self.n()))
        }
    }

    pub fn max_lifetime(&self) -> Option<T> {
        self.lifetimes.iter().copied().reduce(T::max)
    }

    pub fn min_lifetime(&self) -> Option<T> {
        self.lifetimes.iter().copied().reduce(T::min)
    }

    pub fn with_policy(&self, policy: InfinitePolicy<T>) -> Result<Self> {
        match policy {
            InfinitePolicy::Exclude => Ok(self.clone()),
            InfinitePolicy::Truncate(cap) => {
                let bars = self
                    .bars
                    .iter()
                    .map(|b| {
                        if b.is_infinite() {
                            Bar::new(b.degree, b.birth, cap)
                        } else {
                            Ok(*b)
                        }
                    })
                    .collect::<Result<Vec<_>>>()?;
                Self::new(self.degree, bars)
            }
        }
    }

    /// A new barcode with `bar` appended.
    pub fn with_bar(&self, bar: Bar<T>) -> Result<Self> {
        let mut bars = self.bars.clone();
        bars.push(bar);
        Self::new(self.degree, bars)
    }
}

/// Barcodes keyed by homology degree.
pub type Diagram<T> = BTreeMap<usize, Barcode<T>>;

/// Shortest round-trip decimal text; `inf` for infinity.
pub fn fmt_num<T: Scalar>(x: T) -> String {
    if x.is_infinite() {
        return if x > T::zero() { "inf".into() } else { "-inf".into() };
    }
    let a = x.abs();
    if a != T::zero() && (a >= T::c(1e16) || a < T::c(1e-5)) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

fn parse_num<T: Scalar>(field: &str, line: u64, what: &str) -> Result<T> {
    let v: T = field.trim().parse().map_err(|_| Error::Parse {
        line,
        message: format!("{what} `{field}` is not a number"),
    })?;
    if v.is_nan() {
        return Err(Error::Parse { line, message: format!("{what} is NaN") });
    }
    Ok(v)
}

const DIAGRAM_HEADER: [&str; 3] = ["degree", "birth", "death"];

/// Reads a diagram CSV (`degree,birth,death`). Row order within each
/// degree is preserved.
pub fn read_diagram<T: Scalar, R: Read>(reader: R, policy: InfinitePolicy<T>) -> Result<Diagram<T>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(reader);
    let mut grouped: BTreeMap<usize, Vec<Bar<T>>> = BTreeMap::new();
    let mut seen_header = false;
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        if !seen_header {
            if record.iter().ne(DIAGRAM_HEADER) {
                return Err(Error::Parse {
                    line,
                    message: format!("expected header `{}`", DIAGRAM_HEADER.join(",")),
                });
            }
            seen_header = true;
            continue;
        }
        if record.len() != 3 {
            return Err(Error::Parse { line, message: format!("expected 3 fields, found {}", record.len()) });
        }
        let degree: usize = record[0].parse().map_err(|_| Error::Parse {
            line,
            message: format!("degree `{}` is not a nonnegative integer", &record[0]),
        })?;
        let birth = parse_num::<T>(&record[1], line, "birth")?;
        let death = parse_num::<T>(&record[2], line, "death")?;
        let bar = Bar::new(degree, birth, death).map_err(|e| Error::Parse { line, message: e.to_string() })?;
        grouped.entry(degree).or_default().push(bar);
    }
    grouped
        .into_iter()
        .map(|(degree, bars)| Ok((degree, Barcode::new(degree, bars)?.with_policy(policy)?)))
        .collect()
}

pub fn load_diagram<T: Scalar>(path: impl AsRef<Path>, policy: InfinitePolicy<T>) -> Result<Diagram<T>> {
    read_diagram(std::fs::File::open(path)?, policy)
}

pub fn write_diagram<T: Scalar, W: Write>(writer: W, diagram: &Diagram<T>) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(DIAGRAM_HEADER)?;
    for barcode in diagram.values() {
        for bar in barcode.bars() {
            wtr.write_record([bar.degree.to_string(), fmt_num(bar.birth), fmt_num(bar.death)])?;
        }
    }
    wtr.flush()?;
    Ok(())
}

pub fn save_diagram<T: Scalar>(path: impl AsRef<Path>, diagram: &Diagram<T>) -> Result<()> {
    write_diagram(std::fs::File::create(path)?, diagram)
}

/// Finite points of equal dimension, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud<T> {
    dim: usize,
    coords: Vec<T>,
}

impl<T: Scalar> PointCloud<T> {
    pub fn new(points: Vec<Vec<T>>) -> Result<Self> {
        let dim = points.first().map_or(0, Vec::len);
        let mut coords = Vec::with_capacity(dim * points.len());
        for (i, p) in points.into_iter().enumerate() {
            if p.len() != dim {
                return Err(invalid(format!("point {i} has dimension {} (expected {dim})", p.len())));
            }
            coords.extend(p);
        }
        Self::from_flat(dim.max(1), coords)
    }

    pub fn from_flat(dim: usize, coords: Vec<T>) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("point dimension must be at least 1"));
        }
        if coords.len() % dim != 0 {
            return Err(invalid("coordinate count is not a multiple of the dimension"));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(invalid("point coordinates must be finite"));
        }
        Ok(PointCloud { dim, coords })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[T] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[T]> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    /// Concatenates two clouds of the same dimension.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        if self.is_empty() {
            return Ok(other.clone());
        }
        if other.is_empty() {
            return Ok(self.clone());
        }
        if self.dim != other.dim {
            return Err(invalid(format!("cannot join {}-d and {}-d clouds", self.dim, other.dim)));
        }
        let mut coords = self.coords.clone();
        coords.extend_from_slice(&other.coords);
        Ok(PointCloud { dim: self.dim, coords })
    }

    pub fn scaled(&self, c: T) -> Self {
        PointCloud { dim: self.dim, coords: self.coords.iter().map(|&x| x * c).collect() }
    }
}

/// Reads a point-cloud CSV with header `x0,x1,...`.
pub fn read_point_cloud<T: Scalar, R: Read>(reader: R) -> Result<PointCloud<T>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(reader);
    let mut dim = None;
    let mut coords = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        match dim {
            None => {
                let expected = (0..record.len()).map(|i| format!("x{i}"));
                if record.is_empty() || record.iter().ne(expected) {
                    return Err(Error::Parse { line, message: "expected header `x0,x1,...`".into() });
                }
                dim = Some(record.len());
            }
            Some(d) => {
                if record.len() != d {
                    return Err(Error::Parse { line, message: format!("expected {d} fields, found {}", record.len()) });
                }
                for field in record.iter() {
                    let v = parse_num::<T>(field, line, "coordinate")?;
                    if !v.is_finite() {
                        return Err(Error::Parse { line, message: "coordinate is not finite".into() });
                    }
                    coords.push(v);
                }
            }
        }
    }
    let dim = dim.ok_or(Error::Parse { line: 1, message: "missing header".into() })?;
    PointCloud::from_flat(dim, coords)
}

pub fn load_point_cloud<T: Scalar>(path: impl AsRef<Path>) -> Result<PointCloud<T>> {
    read_point_cloud(std::fs::File::open(path)?)
}

pub fn write_point_cloud<T: Scalar, W: Write>(writer: W, cloud: &PointCloud<T>) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record((0..cloud.dim()).map(|i| format!("x{i}")))?;
    for p in cloud.points() {
        wtr.write_record(p.iter().map(|&x| fmt_num(x)))?;
    }
    wtr.flush()?;
    Ok(())
}
