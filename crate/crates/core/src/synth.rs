//! Seeded generators for circle configurations, noise models, geometric
//! Brownian motion and delay embeddings.
//!
//! Randomness comes from ChaCha20 keyed by a 64-bit seed, with one stream
//! per `(experiment, trial)` pair, so any trial can be regenerated in
//! isolation. Normal variates use the inverse CDF.

use std::f64::consts::PI;
use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::barcode::{fmt_num, PointCloud};
use crate::error::{invalid, Error, Result};

/// Bounding box for uniform outliers, `[x_min, x_max] × [y_min, y_max]`.
pub const OUTLIER_BOX: [f64; 4] = [-1.75, 1.75, -1.0, 1.0];

/// Centers of the two unit circles of the intersecting configuration.
pub const INTERTWINED_CENTERS: [[f64; 2]; 2] = [[-0.75, 0.0], [0.75, 0.0]];

/// Radii of the disjoint configuration; the small circle gets a quarter of
/// the points of the large one.
pub const DISJOINT_RADII: [f64; 2] = [1.0, 0.25];

/// Center of the small disjoint circle (the large one sits at the origin).
/// The gap between the circles exceeds the death time √3 of the large loop.
pub const DISJOINT_SMALL_CENTER: [f64; 2] = [3.5, 0.0];

pub const TAKENS_DIM: usize = 3;
pub const TAKENS_TAU: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct RngSeed(pub u64);

impl RngSeed {
    /// Generator for one trial of one experiment.
    pub fn trial(self, experiment: u32, trial: u32) -> TrialRng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.0);
        rng.set_stream(((experiment as u64) << 32) | trial as u64);
        TrialRng { rng, normal: Normal::new(0.0, 1.0).expect("standard normal") }
    }
}

pub struct TrialRng {
    rng: ChaCha20Rng,
    normal: Normal,
}

impl TrialRng {
    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.gen::<f64>()
    }

    /// Uniform on the open interval `(0, 1)`.
    fn open_uniform(&mut self) -> f64 {
        ((self.rng.gen::<u64>() >> 11) as f64 + 0.5) / (1u64 << 53) as f64
    }

    pub fn standard_normal(&mut self) -> f64 {
        let u = self.open_uniform();
        self.normal.inverse_cdf(u)
    }
}

fn check_radius(r: f64) -> Result<()> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(invalid(format!("radius must be positive, got {r}")));
    }
    Ok(())
}

/// `n` points at angles `2πk/n` on the circle of radius `r`.
pub fn circle_equidistant(r: f64, n: usize, center: [f64; 2]) -> Result<PointCloud<f64>> {
    check_radius(r)?;
    if n < 3 {
        return Err(invalid(format!("need at least 3 points on a circle, got {n}")));
    }
    let coords = (0..n)
        .flat_map(|k| {
            let a = 2.0 * PI * k as f64 / n as f64;
            [center[0] + r * a.cos(), center[1] + r * a.sin()]
        })
        .collect();
    PointCloud::from_flat(2, coords)
}

/// `n` points at i.i.d. uniform angles.
pub fn circle_uniform(r: f64, n: usize, center: [f64; 2], rng: &mut TrialRng) -> Result<PointCloud<f64>> {
    check_radius(r)?;
    if n == 0 {
        return Err(invalid("need at least 1 point"));
    }
    let coords = (0..n)
        .flat_map(|_| {
            let a = 2.0 * PI * rng.uniform();
            [center[0] + r * a.cos(), center[1] + r * a.sin()]
        })
        .collect();
    PointCloud::from_flat(2, coords)
}

/// Adds independent `N(0, sigma²)` noise to every coordinate.
pub fn add_gaussian_noise(pc: &PointCloud<f64>, sigma: f64, rng: &mut TrialRng) -> Result<PointCloud<f64>> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(invalid(format!("noise level must be nonnegative, got {sigma}")));
    }
    if sigma == 0.0 {
        return Ok(pc.clone());
    }
    let coords = pc.coords().iter().map(|&x| x + sigma * rng.standard_normal()).collect();
    PointCloud::from_flat(pc.dim(), coords)
}

/// Appends `round(base_n · r)` points uniform on [`OUTLIER_BOX`].
pub fn add_uniform_outliers(pc: &PointCloud<f64>, r: f64, base_n: usize, rng: &mut TrialRng) -> Result<PointCloud<f64>> {
    if !(0.0..=1.0).contains(&r) {
        return Err(invalid(format!("outlier intensity must lie in [0, 1], got {r}")));
    }
    if pc.dim() != 2 {
        return Err(invalid("outliers are drawn in the plane"));
    }
    let count = (base_n as f64 * r).round() as usize;
    let [x0, x1, y0, y1] = OUTLIER_BOX;
    let coords: Vec<f64> = (0..count)
        .flat_map(|_| {
            let x = x0 + (x1 - x0) * rng.uniform();
            let y = y0 + (y1 - y0) * rng.uniform();
            [x, y]
        })
        .collect();
    pc.concat(&PointCloud::from_flat(2, coords)?)
}

/// Large circle of `n` points at the origin, small circle of `n / 4`
/// points at [`DISJOINT_SMALL_CENTER`], both equidistant.
pub fn disjoint_circles(n: usize) -> Result<PointCloud<f64>> {
    let big = circle_equidistant(DISJOINT_RADII[0], n, [0.0, 0.0])?;
    let small = circle_equidistant(DISJOINT_RADII[1], n / 4, DISJOINT_SMALL_CENTER)?;
    big.concat(&small)
}

/// `n` equidistant points on each of the two intersecting unit circles.
pub fn intertwined_circles(n: usize) -> Result<PointCloud<f64>> {
    let a = circle_equidistant(1.0, n, INTERTWINED_CENTERS[0])?;
    let b = circle_equidistant(1.0, n, INTERTWINED_CENTERS[1])?;
    a.concat(&b)
}

/// `n_total` uniform points split evenly over the intersecting circles
/// (the first circle takes the odd point).
pub fn intertwined_circles_uniform(n_total: usize, rng: &mut TrialRng) -> Result<PointCloud<f64>> {
    if n_total < 2 {
        return Err(invalid("need at least one point per circle"));
    }
    let a = circle_uniform(1.0, n_total - n_total / 2, INTERTWINED_CENTERS[0], rng)?;
    let b = circle_uniform(1.0, n_total / 2, INTERTWINED_CENTERS[1], rng)?;
    a.concat(&b)
}

/// Geometric Brownian motion settings. The default path has 500 steps of
/// `dt = 1/2500` (horizon 0.2) from `s0 = 1`, with `μ = 0` and `σ = 0.01`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GbmParams {
    pub mu: f64,
    pub sigma: f64,
    pub s0: f64,
    pub dt: f64,
    pub steps: usize,
}

impl Default for GbmParams {
    fn default() -> Self {
        GbmParams { mu: 0.0, sigma: 0.01, s0: 1.0, dt: 1.0 / 2500.0, steps: 500 }
    }
}

impl GbmParams {
    fn validate(&self) -> Result<()> {
        if !(self.sigma >= 0.0) || !(self.dt > 0.0) || !(self.s0 > 0.0) || self.steps == 0 || !self.mu.is_finite() {
            return Err(invalid(format!("invalid GBM parameters {self:?}")));
        }
        Ok(())
    }
}

/// Exact log-Euler scheme:
/// `S_{t+1} = S_t · exp((μ - σ²/2) dt + σ √dt Z_t)`. Returns `steps + 1`
/// values starting at `s0`.
pub fn gbm_path(params: &GbmParams, rng: &mut TrialRng) -> Result<Vec<f64>> {
    params.validate()?;
    let drift = (params.mu - 0.5 * params.sigma * params.sigma) * params.dt;
    let vol = params.sigma * params.dt.sqrt();
    let mut log_s = params.s0.ln();
    let mut out = Vec::with_capacity(params.steps + 1);
    out.push(params.s0);
    for _ in 0..params.steps {
        log_s += drift + vol * rng.standard_normal();
        out.push(log_s.exp());
    }
    Ok(out)
}

/// Delay embedding: point `i` is `(s_i, s_{i+τ}, ..., s_{i+(dim-1)τ})`.
pub fn takens_embed(series: &[f64], dim: usize, tau: usize) -> Result<PointCloud<f64>> {
    if dim < 2 || tau < 1 {
        return Err(invalid(format!("embedding needs dim >= 2 and tau >= 1, got ({dim}, {tau})")));
    }
    let span = (dim - 1) * tau;
    if series.len() < span + 1 {
        return Err(invalid(format!("series of length {} is too short for dim {dim}, tau {tau}", series.len())));
    }
    let count = series.len() - span;
    let coords = (0..count).flat_map(|i| (0..dim).map(move |k| series[i + k * tau])).collect();
    PointCloud::from_flat(dim, coords)
}

/// Reads a time series CSV with header `value`.
pub fn read_series<R: Read>(reader: R) -> Result<Vec<f64>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(reader);
    let mut out = Vec::new();
    let mut header = false;
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        if !header {
            if record.len() != 1 || &record[0] != "value" {
                return Err(Error::Parse { line, message: "expected header `value`".into() });
            }
            header = true;
            continue;
        }
        let v: f64 = record
            .get(0)
            .filter(|_| record.len() == 1)
            .and_then(|f| f.parse().ok())
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| Error::Parse { line, message: "expected one finite number".into() })?;
        out.push(v);
    }
    Ok(out)
}

pub fn write_series<W: Write>(writer: W, series: &[f64]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["value"])?;
    for &v in series {
        wtr.write_record([fmt_num(v)])?;
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equidistant_square() {
        let pc = circle_equidistant(1.0, 4, [0.0, 0.0]).unwrap();
        let expect = [[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]];
        for (p, e) in pc.points().zip(expect) {
            assert!((p[0] - e[0]).abs() < 1e-15 && (p[1] - e[1]).abs() < 1e-15);
        }
        assert!(circle_equidistant(1.0, 2, [0.0, 0.0]).is_err());
        assert!(circle_equidistant(0.0, 5, [0.0, 0.0]).is_err());
    }

    #[test]
    fn equidistant_points_on_circle() {
        let pc = circle_equidistant(2.5, 37, [1.0, -2.0]).unwrap();
        for p in pc.points() {
            let r = ((p[0] - 1.0).powi(2) + (p[1] + 2.0).powi(2)).sqrt();
            assert!((r / 2.5 - 1.0).abs() < 1e-15);
        }
        let n = 37;
        let p0 = pc.point(0);
        let p1 = pc.point(1);
        let chord = ((p0[0] - p1[0]).powi(2) + (p0[1] - p1[1]).powi(2)).sqrt();
        assert!((chord - 2.0 * 2.5 * (PI / n as f64).sin()).abs() < 1e-14);
    }

    #[test]
    fn disjoint_layout() {
        let pc = disjoint_circles(24).unwrap();
        assert_eq!(pc.len(), 30);
        let pc = disjoint_circles(48).unwrap();
        assert_eq!(pc.len(), 60);
    }

    #[test]
    fn intertwined_fits_outlier_box() {
        let pc = intertwined_circles(200).unwrap();
        let [x0, x1, y0, y1] = OUTLIER_BOX;
        for p in pc.points() {
            assert!(p[0] >= x0 - 1e-12 && p[0] <= x1 + 1e-12 && p[1] >= y0 - 1e-12 && p[1] <= y1 + 1e-12);
        }
    }

    #[test]
    fn seeded_streams_are_reproducible_and_distinct() {
        let a = circle_uniform(1.0, 50, [0.0, 0.0], &mut RngSeed(7).trial(1, 3)).unwrap();
        let b = circle_uniform(1.0, 50, [0.0, 0.0], &mut RngSeed(7).trial(1, 3)).unwrap();
        let c = circle_uniform(1.0, 50, [0.0, 0.0], &mut RngSeed(7).trial(1, 4)).unwrap();
        let d = circle_uniform(1.0, 50, [0.0, 0.0], &mut RngSeed(8).trial(1, 3)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }

    #[test]
    fn uniform_circle_points_lie_on_circle() {
        let pc = circle_uniform(1.0, 1000, [0.0, 0.0], &mut RngSeed(1).trial(0, 0)).unwrap();
        let mean_r: f64 = pc.points().map(|p| (p[0] * p[0] + p[1] * p[1]).sqrt()).sum::<f64>() / 1000.0;
        assert!((mean_r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn uniform_angles_pass_chi_square() {
        let mut rng = RngSeed(11).trial(0, 0);
        let pc = circle_uniform(1.0, 100_000, [0.0, 0.0], &mut rng).unwrap();
        let bins = 20usize;
        let mut counts = vec![0usize; bins];
        for p in pc.points() {
            let a = p[1].atan2(p[0]).rem_euclid(2.0 * PI);
            counts[((a / (2.0 * PI) * bins as f64) as usize).min(bins - 1)] += 1;
        }
        let expected = 100_000.0 / bins as f64;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        // 99th percentile of chi-square with 19 degrees of freedom
        assert!(chi2 < 36.19, "chi2 = {chi2}");
    }

    #[test]
    fn gaussian_noise_has_requested_spread() {
        let base = PointCloud::from_flat(2, vec![0.0; 100_000]).unwrap();
        assert_eq!(add_gaussian_noise(&base, 0.0, &mut RngSeed(1).trial(0, 0)).unwrap(), base);
        let noisy = add_gaussian_noise(&base, 0.3, &mut RngSeed(2).trial(0, 0)).unwrap();
        let n = noisy.coords().len() as f64;
        let mean = noisy.coords().iter().sum::<f64>() / n;
        let sd = (noisy.coords().iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        assert!((sd / 0.3 - 1.0).abs() < 0.02);
        assert!(add_gaussian_noise(&base, -0.1, &mut RngSeed(2).trial(0, 0)).is_err());
        let again = add_gaussian_noise(&base, 0.3, &mut RngSeed(2).trial(0, 0)).unwrap();
        assert_eq!(noisy, again);
    }

    #[test]
    fn outliers_land_in_box() {
        let base = intertwined_circles(10).unwrap();
        let mut rng = RngSeed(5).trial(0, 0);
        assert_eq!(add_uniform_outliers(&base, 0.0, 100, &mut rng).unwrap(), base);
        let out = add_uniform_outliers(&base, 1.0, 100, &mut rng).unwrap();
        assert_eq!(out.len(), base.len() + 100);
        let [x0, x1, y0, y1] = OUTLIER_BOX;
        for p in out.points().skip(base.len()) {
            assert!(p[0] >= x0 && p[0] <= x1 && p[1] >= y0 && p[1] <= y1);
        }
        assert_eq!(add_uniform_outliers(&base, 0.37, 100, &mut rng).unwrap().len(), base.len() + 37);
        assert!(add_uniform_outliers(&base, 1.5, 100, &mut rng).is_err());
    }

    #[test]
    fn outlier_mean_is_centered() {
        let empty = PointCloud::from_flat(2, Vec::new()).unwrap();
        let mut sx = 0.0;
        let mut sy = 0.0;
        let reps = 200;
        for t in 0..reps {
            let out = add_uniform_outliers(&empty, 1.0, 100, &mut RngSeed(9).trial(0, t)).unwrap();
            for p in out.points() {
                sx += p[0];
                sy += p[1];
            }
        }
        let m = (reps * 100) as f64;
        // standard errors: 3.5/√12/√m and 2/√12/√m
        assert!((sx / m).abs() < 4.0 * 3.5 / 12f64.sqrt() / m.sqrt());
        assert!((sy / m).abs() < 4.0 * 2.0 / 12f64.sqrt() / m.sqrt());
    }

    #[test]
    fn gbm_without_noise_is_exponential() {
        let p = GbmParams { mu: 0.3, sigma: 0.0, s0: 2.0, dt: 0.01, steps: 100 };
        let path = gbm_path(&p, &mut RngSeed(1).trial(0, 0)).unwrap();
        assert_eq!(path.len(), 101);
        for (t, &s) in path.iter().enumerate() {
            assert!((s / (2.0 * (0.3 * t as f64 * 0.01).exp()) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn gbm_log_increments_have_exact_moments() {
        let p = GbmParams { mu: 0.1, sigma: 0.4, s0: 1.0, dt: 0.01, steps: 100_000 };
        let path = gbm_path(&p, &mut RngSeed(3).trial(0, 0)).unwrap();
        assert!(path.iter().all(|&s| s > 0.0));
        let incs: Vec<f64> = path.windows(2).map(|w| (w[1] / w[0]).ln()).collect();
        let n = incs.len() as f64;
        let mean = incs.iter().sum::<f64>() / n;
        let var = incs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let m = (0.1 - 0.08) * 0.01;
        let v = 0.16 * 0.01;
        assert!((mean - m).abs() < 3.0 * (v / n).sqrt());
        // variance of the sample variance of normals: 2v²/(n-1)
        assert!((var - v).abs() < 3.0 * (2.0 * v * v / (n - 1.0)).sqrt());
    }

    #[test]
    fn gbm_rejects_bad_params() {
        let mut rng = RngSeed(0).trial(0, 0);
        assert!(gbm_path(&GbmParams { sigma: -0.1, ..Default::default() }, &mut rng).is_err());
        assert!(gbm_path(&GbmParams { dt: 0.0, ..Default::default() }, &mut rng).is_err());
    }

    #[test]
    fn takens_examples() {
        let pc = takens_embed(&[1.0, 2.0, 3.0, 4.0, 5.0], 2, 1).unwrap();
        let pts: Vec<Vec<f64>> = pc.points().map(<[f64]>::to_vec).collect();
        assert_eq!(pts, vec![vec![1.0, 2.0], vec![2.0, 3.0], vec![3.0, 4.0], vec![4.0, 5.0]]);
        let series: Vec<f64> = (0..100).map(f64::from).collect();
        let pc = takens_embed(&series, 3, 3).unwrap();
        assert_eq!((pc.len(), pc.dim()), (94, 3));
        assert_eq!(pc.point(0), &[0.0, 3.0, 6.0]);
        let flat = takens_embed(&[2.0; 10], 3, 2).unwrap();
        assert!(flat.points().all(|p| p == [2.0, 2.0, 2.0]));
        assert!(takens_embed(&[1.0, 2.0, 3.0], 3, 2).is_err());
    }

    #[test]
    fn series_csv_round_trip() {
        let s = vec![1.0, 0.1, 1e-7, 3.25];
        let mut buf = Vec::new();
        write_series(&mut buf, &s).unwrap();
        assert_eq!(read_series(buf.as_slice()).unwrap(), s);
        assert!(read_series("v\n1\n".as_bytes()).is_err());
    }
}
