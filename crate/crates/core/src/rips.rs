//! Vietoris–Rips persistence in degrees 0 and 1 over the two-element field.
//!
//! Simplices are totally ordered by `(filtration value, dimension,
//! lexicographic vertex tuple)`; every diagram is a deterministic function
//! of the distance matrix.
//!
//! Degree 0 comes from union–find over the sorted edges. Degree 1 is
//! computed by reducing the coboundary matrix (edges × triangles), with
//! edges that killed a component cleared up front. Triangles are never
//! materialised: coboundaries are enumerated on demand, and a column whose
//! smallest cofacet is still free is paired without touching a heap, which
//! is the common case in dense Rips complexes.
//!
//! The complex is truncated at the enclosing radius by default. At that
//! scale the complex is a cone, so nothing of degree 0 or 1 survives past
//! it and the truncated diagrams are exact.
//!
//! [`BoundaryMatrix`] is the textbook homology reduction (with clearing) on
//! an explicitly enumerated filtration; it is meant for small clouds and
//! for cross-checking the implicit engine.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashMap};

use crate::barcode::{Bar, Barcode, Diagram, PointCloud};
use crate::error::{invalid, Result};
use crate::scalar::Scalar;

/// Symmetric matrix of Euclidean distances.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> DistanceMatrix<T> {
    /// From a full row-major matrix; must be symmetric with zero diagonal.
    pub fn from_full(n: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != n * n {
            return Err(invalid("distance matrix must be n×n"));
        }
        for i in 0..n {
            if data[i * n + i] != T::zero() {
                return Err(invalid("distance matrix diagonal must be zero"));
            }
            for j in 0..i {
                let d = data[i * n + j];
                if d != data[j * n + i] || !(d >= T::zero()) || !d.is_finite() {
                    return Err(invalid("distances must be finite, nonnegative and symmetric"));
                }
            }
        }
        Ok(DistanceMatrix { n, data })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// `min_i max_j d(i, j)`; zero for fewer than two points.
    pub fn enclosing_radius(&self) -> T {
        (0..self.n)
            .map(|i| self.row(i).iter().copied().fold(T::zero(), T::max))
            .reduce(T::min)
            .unwrap_or_else(T::zero)
    }
}

/// Euclidean distances, one evaluation per unordered pair.
pub fn distance_matrix<T: Scalar>(pc: &PointCloud<T>) -> DistanceMatrix<T> {
    let n = pc.len();
    let mut data = vec![T::zero(); n * n];
    for i in 0..n {
        for j in i + 1..n {
            let d = pc
                .point(i)
                .iter()
                .zip(pc.point(j))
                .fold(T::zero(), |acc, (&a, &b)| acc + (a - b) * (a - b))
                .sqrt();
            data[i * n + j] = d;
            data[j * n + i] = d;
        }
    }
    DistanceMatrix { n, data }
}

/// A simplex of dimension ≤ 2 with its Rips filtration value.
#[derive(Clone, Debug, PartialEq)]
pub struct FilteredSimplex<T> {
    pub vertices: Vec<usize>,
    pub value: T,
}

impl<T: Scalar> FilteredSimplex<T> {
    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }

    fn filtration_cmp(&self, other: &Self) -> Ordering {
        self.value
            .cmp_total(&other.value)
            .then(self.vertices.len().cmp(&other.vertices.len()))
            .then_with(|| self.vertices.cmp(&other.vertices))
    }
}

/// All simplices of dimension ≤ `max_simplex_dim` (at most 2) with value
/// ≤ `threshold`, in filtration order.
pub fn rips_filtration<T: Scalar>(dm: &DistanceMatrix<T>, max_simplex_dim: usize, threshold: T) -> Vec<FilteredSimplex<T>> {
    let n = dm.len();
    let mut out: Vec<FilteredSimplex<T>> = (0..n).map(|i| FilteredSimplex { vertices: vec![i], value: T::zero() }).collect();
    if max_simplex_dim >= 1 {
        for i in 0..n {
            for j in i + 1..n {
                let d = dm.get(i, j);
                if d <= threshold {
                    out.push(FilteredSimplex { vertices: vec![i, j], value: d });
                }
            }
        }
    }
    if max_simplex_dim >= 2 {
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    let d = dm.get(i, j).max(dm.get(i, k)).max(dm.get(j, k));
                    if d <= threshold {
                        out.push(FilteredSimplex { vertices: vec![i, j, k], value: d });
                    }
                }
            }
        }
    }
    out.sort_by(FilteredSimplex::filtration_cmp);
    out
}

/// Sparse ℤ/2 boundary matrix over a filtration; column `j` lists the
/// filtration indices of the facets of simplex `j`, ascending.
#[derive(Clone, Debug)]
pub struct BoundaryMatrix {
    columns: Vec<Vec<usize>>,
    dims: Vec<usize>,
}

impl BoundaryMatrix {
    pub fn from_filtration<T: Scalar>(filtration: &[FilteredSimplex<T>]) -> Result<Self> {
        let index: HashMap<&[usize], usize> =
            filtration.iter().enumerate().map(|(i, s)| (s.vertices.as_slice(), i)).collect();
        let mut columns = Vec::with_capacity(filtration.len());
        for (j, s) in filtration.iter().enumerate() {
            let mut col = Vec::new();
            if s.vertices.len() > 1 {
                for skip in 0..s.vertices.len() {
                    let face: Vec<usize> =
                        s.vertices.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &v)| v).collect();
                    match index.get(face.as_slice()) {
                        Some(&f) if f < j => col.push(f),
                        _ => return Err(invalid("filtration is not closed under faces")),
                    }
                }
            }
            col.sort_unstable();
            columns.push(col);
        }
        Ok(BoundaryMatrix { columns, dims: filtration.iter().map(FilteredSimplex::dim).collect() })
    }

    pub fn column(&self, j: usize) -> &[usize] {
        &self.columns[j]
    }

    pub fn low(&self, j: usize) -> Option<usize> {
        self.columns[j].last().copied()
    }

    /// Column reduction, highest dimension first so that columns of
    /// positive simplices can be cleared. Returns `(birth, death)` index
    /// pairs plus unpaired (essential) indices.
    pub fn reduce(&mut self) -> (Vec<(usize, usize)>, Vec<usize>) {
        let m = self.columns.len();
        let mut pivot_of: HashMap<usize, usize> = HashMap::new();
        let mut paired = vec![false; m];
        let max_dim = self.dims.iter().copied().max().unwrap_or(0);
        for dim in (1..=max_dim).rev() {
            for j in 0..m {
                if self.dims[j] != dim {
                    continue;
                }
                if paired[j] {
                    // a death in the dimension above: column reduces to zero
                    self.columns[j].clear();
                    continue;
                }
                while let Some(low) = self.low(j) {
                    match pivot_of.get(&low) {
                        Some(&k) => {
                            let other = self.columns[k].clone();
                            self.columns[j] = symmetric_difference(&self.columns[j], &other);
                        }
                        None => {
                            pivot_of.insert(low, j);
                            paired[low] = true;
                            paired[j] = true;
                            break;
                        }
                    }
                }
            }
        }
        let mut pairs: Vec<(usize, usize)> = pivot_of.into_iter().collect();
        pairs.sort_unstable();
        let essential = (0..m).filter(|&j| !paired[j]).collect();
        (pairs, essential)
    }
}

fn symmetric_difference(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Diagram of an explicit filtration via [`BoundaryMatrix`]. Zero-length
/// pairs are dropped above degree 0.
pub fn diagram_from_filtration<T: Scalar>(filtration: &[FilteredSimplex<T>], max_degree: usize) -> Result<Diagram<T>> {
    let mut matrix = BoundaryMatrix::from_filtration(filtration)?;
    let (pairs, essential) = matrix.reduce();
    let mut bars: Vec<Vec<Bar<T>>> = vec![Vec::new(); max_degree + 1];
    for (b, d) in pairs {
        let deg = filtration[b].dim();
        let (birth, death) = (filtration[b].value, filtration[d].value);
        if deg <= max_degree && (deg == 0 || death > birth) {
            bars[deg].push(Bar::new(deg, birth, death)?);
        }
    }
    for e in essential {
        let deg = filtration[e].dim();
        if deg <= max_degree {
            bars[deg].push(Bar::new(deg, filtration[e].value, T::infinity())?);
        }
    }
    bars.into_iter()
        .enumerate()
        .map(|(deg, mut v)| {
            sort_bars(&mut v);
            Ok((deg, Barcode::new(deg, v)?))
        })
        .collect()
}

fn sort_bars<T: Scalar>(bars: &mut [Bar<T>]) {
    bars.sort_by(|a, b| a.birth().cmp_total(&b.birth()).then(a.death().cmp_total(&b.death())));
}

#[derive(Clone, Copy, Debug)]
struct Tri<T> {
    diam: T,
    v: [u32; 3],
}

impl<T: Scalar> PartialEq for Tri<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<T: Scalar> Eq for Tri<T> {}

impl<T: Scalar> PartialOrd for Tri<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Scalar> Ord for Tri<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.diam.cmp_total(&other.diam).then(self.v.cmp(&other.v))
    }
}

#[derive(Clone, Copy, Debug)]
struct Edge<T> {
    diam: T,
    i: u32,
    j: u32,
}

struct UnionFind {
    parent: Vec<u32>,
    rank: Vec<u8>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n as u32).collect(), rank: vec![0; n] }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let p = self.parent[x as usize];
            self.parent[x as usize] = self.parent[p as usize];
            x = p;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (hi, lo) = if self.rank[ra as usize] >= self.rank[rb as usize] { (ra, rb) } else { (rb, ra) };
        self.parent[lo as usize] = hi;
        if self.rank[hi as usize] == self.rank[lo as usize] {
            self.rank[hi as usize] += 1;
        }
        true
    }
}

struct Engine<'a, T> {
    dm: &'a DistanceMatrix<T>,
    threshold: T,
}

impl<T: Scalar> Engine<'_, T> {
    /// Cofacets of `e` in lexicographic (ascending `k`) order.
    fn coboundary(&self, e: Edge<T>) -> impl Iterator<Item = Tri<T>> + '_ {
        let (i, j) = (e.i as usize, e.j as usize);
        let (ri, rj) = (self.dm.row(i), self.dm.row(j));
        (0..self.dm.len()).filter_map(move |k| {
            if k == i || k == j {
                return None;
            }
            let (a, b) = (ri[k], rj[k]);
            if a > self.threshold || b > self.threshold {
                return None;
            }
            let mut v = [e.i, e.j, k as u32];
            v.sort_unstable();
            Some(Tri { diam: e.diam.max(a).max(b), v })
        })
    }

    /// Smallest cofacet; stops at the first one born with the edge.
    fn min_cofacet(&self, e: Edge<T>) -> Option<Tri<T>> {
        let mut best: Option<Tri<T>> = None;
        for t in self.coboundary(e) {
            if t.diam == e.diam {
                return Some(t);
            }
            if best.map_or(true, |b| t < b) {
                best = Some(t);
            }
        }
        best
    }
}

/// Lowest entry with odd multiplicity, left on the heap.
fn heap_pivot<T: Scalar>(heap: &mut BinaryHeap<Reverse<Tri<T>>>) -> Option<Tri<T>> {
    while let Some(Reverse(top)) = heap.pop() {
        match heap.peek() {
            Some(Reverse(next)) if *next == top => {
                heap.pop();
            }
            _ => {
                heap.push(Reverse(top));
                return Some(top);
            }
        }
    }
    None
}

/// Persistence diagram of the Rips filtration in degrees `0..=max_dim`.
///
/// `max_radius` caps the filtration; it defaults to (and is clipped at) the
/// enclosing radius.
pub fn rips_persistence<T: Scalar>(pc: &PointCloud<T>, max_dim: usize, max_radius: Option<T>) -> Result<Diagram<T>> {
    if pc.len() < 2 {
        return Err(invalid(format!("need at least 2 points, got {}", pc.len())));
    }
    rips_persistence_from_distances(&distance_matrix(pc), max_dim, max_radius)
}

pub fn rips_persistence_from_distances<T: Scalar>(
    dm: &DistanceMatrix<T>,
    max_dim: usize,
    max_radius: Option<T>,
) -> Result<Diagram<T>> {
    if max_dim > 1 {
        return Err(invalid(format!("only degrees 0 and 1 are supported, got max dim {max_dim}")));
    }
    let n = dm.len();
    if n < 2 {
        return Err(invalid(format!("need at least 2 points, got {n}")));
    }
    if n > u32::MAX as usize {
        return Err(invalid("too many points"));
    }
    let enclosing = dm.enclosing_radius();
    let threshold = match max_radius {
        Some(r) if r.is_nan() || r < T::zero() => return Err(invalid("max radius must be nonnegative")),
        Some(r) => r.min(enclosing),
        None => enclosing,
    };

    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let d = dm.get(i, j);
            if d <= threshold {
                edges.push(Edge { diam: d, i: i as u32, j: j as u32 });
            }
        }
    }
    edges.sort_by(|a, b| a.diam.cmp_total(&b.diam).then((a.i, a.j).cmp(&(b.i, b.j))));

    // degree 0
    let mut uf = UnionFind::new(n);
    let mut kills_component = vec![false; edges.len()];
    let mut h0 = Vec::with_capacity(n);
    for (idx, e) in edges.iter().enumerate() {
        if uf.union(e.i, e.j) {
            kills_component[idx] = true;
            h0.push(Bar::new(0, T::zero(), e.diam)?);
        }
    }
    let components = (0..n as u32).filter(|&v| uf.find(v) == v).count();
    h0.extend(std::iter::repeat(Bar::new(0, T::zero(), T::infinity())?).take(components));

    let mut diagram = Diagram::new();
    diagram.insert(0, Barcode::new(0, h0)?);
    if max_dim == 0 {
        return Ok(diagram);
    }

    // degree 1
    let engine = Engine { dm, threshold };
    let mut pivot_column: HashMap<[u32; 3], usize> = HashMap::new();
    let mut reduction: Vec<Vec<u32>> = Vec::new();
    let mut h1 = Vec::new();
    let mut heap = BinaryHeap::new();
    for (idx, &e) in edges.iter().enumerate().rev() {
        if kills_component[idx] {
            continue;
        }
        let pivot = match engine.min_cofacet(e) {
            None => None,
            Some(t) if !pivot_column.contains_key(&t.v) => {
                pivot_column.insert(t.v, reduction.len());
                reduction.push(vec![idx as u32]);
                Some(t)
            }
            Some(_) => {
                heap.clear();
                heap.extend(engine.coboundary(e).map(Reverse));
                let mut column = vec![idx as u32];
                loop {
                    match heap_pivot(&mut heap) {
                        None => break None,
                        Some(t) => match pivot_column.get(&t.v) {
                            Some(&other) => {
                                for &f in &reduction[other] {
                                    heap.extend(engine.coboundary(edges[f as usize]).map(Reverse));
                                }
                                column.extend_from_slice(&reduction[other]);
                            }
                            None => {
                                pivot_column.insert(t.v, reduction.len());
                                reduction.push(cancel_pairs(column));
                                break Some(t);
                            }
                        },
                    }
                }
            }
        };
        match pivot {
            Some(t) if t.diam > e.diam => h1.push(Bar::new(1, e.diam, t.diam)?),
            Some(_) => {}
            None => h1.push(Bar::new(1, e.diam, T::infinity())?),
        }
    }
    sort_bars(&mut h1);
    diagram.insert(1, Barcode::new(1, h1)?);
    Ok(diagram)
}

/// Reduces a multiset of column indices mod 2.
fn cancel_pairs(mut v: Vec<u32>) -> Vec<u32> {
    v.sort_unstable();
    let mut out = Vec::with_capacity(v.len());
    let mut i = 0;
    while i < v.len() {
        let mut j = i;
        while j < v.len() && v[j] == v[i] {
            j += 1;
        }
        if (j - i) % 2 == 1 {
            out.push(v[i]);
        }
        i = j;
    }
    out
}
