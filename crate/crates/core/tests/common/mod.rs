//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

use barstat::{Barcode64, DistanceMatrix, PointCloud64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `n ∈ [2, 50]` lifetimes uniform on `[0, 10)`, with random births.
pub fn random_barcode(rng: &mut ChaCha8Rng) -> Barcode64 {
    let n = rng.gen_range(2..=50);
    random_barcode_n(rng, n)
}

pub fn random_barcode_n(rng: &mut ChaCha8Rng, n: usize) -> Barcode64 {
    let intervals: Vec<(f64, f64)> = (0..n)
        .map(|_| {
            let b = rng.gen_range(0.0..5.0);
            (b, b + rng.gen_range(0.0..10.0))
        })
        .collect();
    Barcode64::from_intervals(1, &intervals).unwrap()
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    a == b || (a - b).abs() <= tol * a.abs().max(b.abs())
}

/// Welford's streaming unbiased variance.
pub fn welford(xs: &[f64]) -> f64 {
    let (mut mean, mut m2) = (0.0, 0.0);
    for (k, &x) in xs.iter().enumerate() {
        let d = x - mean;
        mean += d / (k + 1) as f64;
        m2 += d * (x - mean);
    }
    if xs.len() < 2 {
        0.0
    } else {
        m2 / (xs.len() - 1) as f64
    }
}

/// Bottleneck distance by enumerating every partial injection from `a`
/// into `b`; unmatched points go to the diagonal.
pub fn brute_bottleneck(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    fn linf(p: (f64, f64), q: (f64, f64)) -> f64 {
        (p.0 - q.0).abs().max((p.1 - q.1).abs())
    }
    fn diag(p: (f64, f64)) -> f64 {
        (p.1 - p.0) / 2.0
    }
    fn go(i: usize, a: &[(f64, f64)], b: &[(f64, f64)], used: &mut Vec<bool>, cur: f64, best: &mut f64) {
        if cur >= *best {
            return;
        }
        if i == a.len() {
            let rest = b.iter().zip(used.iter()).filter(|(_, &u)| !u).map(|(&q, _)| diag(q)).fold(cur, f64::max);
            *best = best.min(rest);
            return;
        }
        go(i + 1, a, b, used, cur.max(diag(a[i])), best);
        for j in 0..b.len() {
            if !used[j] {
                used[j] = true;
                go(i + 1, a, b, used, cur.max(linf(a[i], b[j])), best);
                used[j] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    go(0, a, b, &mut vec![false; b.len()], 0.0, &mut best);
    best
}

pub fn finite_points(b: &Barcode64) -> Vec<(f64, f64)> {
    b.bars().iter().filter(|x| !x.is_infinite()).map(|x| (x.birth(), x.death())).collect()
}

/// Prim's algorithm; returns the MST edge weights sorted ascending.
pub fn mst_weights(dm: &DistanceMatrix<f64>) -> Vec<f64> {
    let n = dm.len();
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    best[0] = 0.0;
    let mut out = Vec::new();
    for step in 0..n {
        let u = (0..n).filter(|&v| !in_tree[v]).min_by(|&x, &y| best[x].total_cmp(&best[y])).unwrap();
        in_tree[u] = true;
        if step > 0 {
            out.push(best[u]);
        }
        for v in 0..n {
            if !in_tree[v] {
                best[v] = best[v].min(dm.get(u, v));
            }
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

/// GF(2) rank of bit vectors.
fn rank(vectors: impl IntoIterator<Item = u64>) -> usize {
    let mut basis = [0u64; 64];
    let mut r = 0;
    for mut v in vectors {
        while v != 0 {
            let top = 63 - v.leading_zeros() as usize;
            if basis[top] == 0 {
                basis[top] = v;
                r += 1;
                break;
            }
            v ^= basis[top];
        }
    }
    r
}

/// Degree-1 diagram of the full Rips filtration from persistent Betti
/// numbers `β^{a,b} = rank(Z_a + B_b) - rank(B_b)`, computed by Gaussian
/// elimination over GF(2) at every pair of filtration values. At most 11
/// points (edges are indexed into a `u64`).
pub fn brute_h1(dm: &DistanceMatrix<f64>) -> Vec<(f64, f64)> {
    let n = dm.len();
    assert!(n * (n - 1) / 2 <= 64);
    let mut edges = Vec::new();
    let mut edge_index = vec![vec![usize::MAX; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            edge_index[i][j] = edges.len();
            edges.push((i, j, dm.get(i, j)));
        }
    }
    let mut triangles = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let d = dm.get(i, j).max(dm.get(i, k)).max(dm.get(j, k));
                let mask = (1u64 << edge_index[i][j]) | (1u64 << edge_index[i][k]) | (1u64 << edge_index[j][k]);
                triangles.push((mask, d));
            }
        }
    }
    let mut values: Vec<f64> = edges.iter().map(|e| e.2).collect();
    values.sort_by(f64::total_cmp);
    values.dedup();

    // cycle basis of the edges with value <= a
    let cycles = |a: f64| -> Vec<u64> {
        let mut pivots: Vec<Option<(u64, u64)>> = vec![None; 64];
        let mut out = Vec::new();
        for (e, &(i, j, d)) in edges.iter().enumerate() {
            if d > a {
                continue;
            }
            let mut bd = (1u64 << i) | (1u64 << j);
            let mut combo = 1u64 << e;
            while bd != 0 {
                let top = 63 - bd.leading_zeros() as usize;
                match pivots[top] {
                    Some((pb, pc)) => {
                        bd ^= pb;
                        combo ^= pc;
                    }
                    None => {
                        pivots[top] = Some((bd, combo));
                        break;
                    }
                }
            }
            if bd == 0 {
                out.push(combo);
            }
        }
        out
    };
    let boundaries = |b: f64| -> Vec<u64> { triangles.iter().filter(|t| t.1 <= b).map(|t| t.0).collect() };

    let m = values.len();
    // beta[i][j] for values[i] <= values[j]
    let mut beta = vec![vec![0i64; m]; m];
    for i in 0..m {
        let z = cycles(values[i]);
        for j in i..m {
            let bnd = boundaries(values[j]);
            let rb = rank(bnd.iter().copied());
            let rzb = rank(z.iter().copied().chain(bnd.iter().copied()));
            beta[i][j] = (rzb - rb) as i64;
        }
    }
    // triangles are born at edge values, so deaths lie in `values` too
    let at = |i: isize, j: usize| -> i64 {
        if i < 0 {
            0
        } else {
            beta[i as usize][j]
        }
    };
    let mut out = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            let mult = at(i as isize, j - 1) - at(i as isize - 1, j - 1) - at(i as isize, j) + at(i as isize - 1, j);
            assert!(mult >= 0);
            for _ in 0..mult {
                out.push((values[i], values[j]));
            }
        }
    }
    // classes alive at the largest value are essential
    for i in 0..m {
        let mult = at(i as isize, m - 1) - at(i as isize - 1, m - 1);
        for _ in 0..mult {
            out.push((values[i], f64::INFINITY));
        }
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    out
}

pub fn random_cloud(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> PointCloud64 {
    PointCloud64::from_flat(dim, (0..n * dim).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
}

/// Random angles on the unit circle with uniform radial jitter.
pub fn noisy_circle(rng: &mut ChaCha8Rng, n: usize, jitter: f64) -> PointCloud64 {
    let coords = (0..n)
        .flat_map(|_| {
            let a = rng.gen_range(0.0..std::f64::consts::TAU);
            let r = 1.0 + rng.gen_range(-jitter..=jitter);
            [r * a.cos(), r * a.sin()]
        })
        .collect();
    PointCloud64::from_flat(2, coords).unwrap()
}

pub fn sorted_intervals(b: &Barcode64) -> Vec<(f64, f64)> {
    let mut v: Vec<(f64, f64)> = b.bars().iter().map(|x| (x.birth(), x.death())).collect();
    v.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    v
}
