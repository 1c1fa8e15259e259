//! Seeded randomness, exact ball sampling and Hit-and-Run walks.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::bodies::{Ball, ConvexBody};
use crate::error::{Error, Result};

/// Deterministic random stream keyed by a 64-bit seed.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    pub fn gaussian(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    pub fn index(&mut self, n: usize) -> usize {
        self.inner.random_range(0..n)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WalkMode {
    /// Coordinate directions.
    Cdhr,
    /// Uniform random directions.
    Rdhr,
}

impl std::fmt::Display for WalkMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Cdhr => "cdhr",
            Self::Rdhr => "rdhr",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalkConfig {
    pub mode: WalkMode,
    pub steps_per_sample: usize,
}

impl WalkConfig {
    pub fn new(mode: WalkMode, steps_per_sample: usize) -> Result<Self> {
        if steps_per_sample == 0 {
            return Err(Error::Invalid("walk length must be at least 1".into()));
        }
        Ok(Self {
            mode,
            steps_per_sample,
        })
    }

    pub fn with_steps(self, steps_per_sample: usize) -> Self {
        Self {
            steps_per_sample: steps_per_sample.max(1),
            ..self
        }
    }
}

impl Default for WalkConfig {
    fn default() -> Self {
        Self {
            mode: WalkMode::Rdhr,
            steps_per_sample: 1,
        }
    }
}

/// Uniform direction on the unit sphere by normalizing a Gaussian vector.
pub fn sample_unit_sphere(rng: &mut RngStream, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.gaussian()).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-300 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

/// Uniform point in a ball: uniform direction, radius `r·U^{1/d}`.
pub fn sample_ball(rng: &mut RngStream, ball: &Ball) -> Vec<f64> {
    let d = ball.dim();
    let dir = sample_unit_sphere(rng, d);
    let rho = ball.radius() * rng.uniform().powf(1.0 / d as f64);
    dir.iter()
        .zip(ball.center())
        .map(|(u, c)| c + rho * u)
        .collect()
}

fn chord_point(rng: &mut RngStream, lo: f64, hi: f64) -> f64 {
    let width = hi - lo;
    if width <= 0.0 {
        return 0.0;
    }
    // Keep strictly off the boundary so later membership tests stay feasible.
    let eta = 1e-10 * width;
    let (a, b) = (lo + eta, hi - eta);
    a + (b - a) * rng.uniform()
}

/// `cfg.steps_per_sample` Hit-and-Run moves from `x`, in place.
pub fn hnr_step<B: ConvexBody + ?Sized>(
    body: &B,
    x: &mut [f64],
    cfg: &WalkConfig,
    rng: &mut RngStream,
) -> Result<()> {
    let d = x.len();
    for _ in 0..cfg.steps_per_sample {
        match cfg.mode {
            WalkMode::Cdhr => {
                let i = rng.index(d);
                let (lo, hi) = body.coord_intersection(x, i)?;
                x[i] += chord_point(rng, lo, hi);
            }
            WalkMode::Rdhr => {
                let v = sample_unit_sphere(rng, d);
                let (lo, hi) = body.line_intersection(x, &v)?;
                let t = chord_point(rng, lo, hi);
                for (xi, vi) in x.iter_mut().zip(&v) {
                    *xi += t * vi;
                }
            }
        }
    }
    Ok(())
}

/// A stream of (approximately) uniform points from some body.
pub trait PointSource {
    fn next_point(&mut self, rng: &mut RngStream) -> Result<&[f64]>;

    /// Random-walk steps taken so far (zero for exact samplers).
    fn walk_steps(&self) -> u64;

    fn take(&mut self, n: usize, rng: &mut RngStream) -> Result<Vec<Vec<f64>>> {
        (0..n).map(|_| self.next_point(rng).map(|p| p.to_vec())).collect()
    }
}

/// Hit-and-Run chain over a body, started from a given interior point.
pub struct HnrChain<B> {
    body: B,
    x: Vec<f64>,
    cfg: WalkConfig,
    steps: u64,
}

impl<B: ConvexBody> HnrChain<B> {
    pub fn new(body: B, start: Vec<f64>, cfg: WalkConfig) -> Self {
        Self {
            body,
            x: start,
            cfg,
            steps: 0,
        }
    }

    pub fn current(&self) -> &[f64] {
        &self.x
    }
}

impl<B: ConvexBody> PointSource for HnrChain<B> {
    fn next_point(&mut self, rng: &mut RngStream) -> Result<&[f64]> {
        hnr_step(&self.body, &mut self.x, &self.cfg, rng)?;
        self.steps += self.cfg.steps_per_sample as u64;
        Ok(&self.x)
    }

    fn walk_steps(&self) -> u64 {
        self.steps
    }
}

/// Exact uniform sampling from a ball.
pub struct BallSource {
    ball: Ball,
    buf: Vec<f64>,
}

impl BallSource {
    pub fn new(ball: Ball) -> Self {
        Self {
            ball,
            buf: Vec::new(),
        }
    }
}

impl PointSource for BallSource {
    fn next_point(&mut self, rng: &mut RngStream) -> Result<&[f64]> {
        self.buf = sample_ball(rng, &self.ball);
        Ok(&self.buf)
    }

    fn walk_steps(&self) -> u64 {
        0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;

    #[test]
    fn same_seed_same_stream() {
        let mut a = RngStream::new(42);
        let mut b = RngStream::new(42);
        let mut c = RngStream::new(43);
        let xa: Vec<u64> = (0..16).map(|_| a.next_u64()).collect();
        let xb: Vec<u64> = (0..16).map(|_| b.next_u64()).collect();
        let xc: Vec<u64> = (0..16).map(|_| c.next_u64()).collect();
        assert_eq!(xa, xb);
        assert_ne!(xa, xc);
    }

    #[test]
    fn sphere_points_are_unit_and_balanced() {
        let mut rng = RngStream::new(1);
        let mut plus = 0;
        for _ in 0..10_000 {
            let v = sample_unit_sphere(&mut rng, 1);
            assert_eq!(v[0].abs(), 1.0);
            plus += (v[0] > 0.0) as usize;
        }
        assert!((plus as f64 / 1e4 - 0.5).abs() <= 0.02);

        let mut mean = [0.0; 3];
        for _ in 0..10_000 {
            let v = sample_unit_sphere(&mut rng, 3);
            assert!((v.iter().map(|x| x * x).sum::<f64>().sqrt() - 1.0).abs() < 1e-12);
            for (m, x) in mean.iter_mut().zip(&v) {
                *m += x / 1e4;
            }
        }
        assert!(mean.iter().all(|m| m.abs() <= 0.02), "{mean:?}");
    }

    #[test]
    fn disk_area_fraction() {
        let mut rng = RngStream::new(2);
        let ball = Ball::new(vec![0.0, 0.0], 1.0).unwrap();
        let mut inner = 0;
        for _ in 0..10_000 {
            let x = sample_ball(&mut rng, &ball);
            let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
            assert!(r <= 1.0);
            inner += (r <= std::f64::consts::FRAC_1_SQRT_2) as usize;
        }
        assert!((inner as f64 / 1e4 - 0.5).abs() <= 0.02);
    }

    #[test]
    fn segment_sampling_passes_ks() {
        let mut rng = RngStream::new(3);
        let ball = Ball::new(vec![1.0], 2.0).unwrap();
        let n = 5000;
        let mut xs: Vec<f64> = (0..n).map(|_| sample_ball(&mut rng, &ball)[0]).collect();
        xs.sort_by(f64::total_cmp);
        let dstat = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let cdf = (x + 1.0) / 4.0;
                (cdf - i as f64 / n as f64).abs().max(((i + 1) as f64 / n as f64 - cdf).abs())
            })
            .fold(0.0, f64::max);
        // Asymptotic 1% critical value 1.628/√n.
        assert!(dstat < 1.628 / (n as f64).sqrt(), "D = {dstat}");
    }

    #[test]
    fn cdhr_moves_one_coordinate_and_stays_inside() {
        let cube = gen::cube(3);
        let cfg = WalkConfig::new(WalkMode::Cdhr, 1).unwrap();
        let mut rng = RngStream::new(4);
        let mut x = vec![0.0; 3];
        for _ in 0..10_000 {
            let prev = x.clone();
            hnr_step(&cube, &mut x, &cfg, &mut rng).unwrap();
            assert!(cube.contains(&x).unwrap());
            let changed = prev.iter().zip(&x).filter(|(a, b)| a != b).count();
            assert!(changed <= 1);
        }
    }

    #[test]
    fn cdhr_square_mean_is_centered() {
        let sq = gen::cube(2);
        let cfg = WalkConfig::new(WalkMode::Cdhr, 1).unwrap();
        let mut chain = HnrChain::new(&sq, vec![0.0; 2], cfg);
        let mut rng = RngStream::new(5);
        let mut mean = [0.0; 2];
        let n = 100_000;
        for _ in 0..n {
            let x = chain.next_point(&mut rng).unwrap();
            mean[0] += x[0] / n as f64;
            mean[1] += x[1] / n as f64;
        }
        assert!(mean.iter().all(|m| m.abs() <= 0.02), "{mean:?}");
        assert_eq!(chain.walk_steps(), n as u64);
    }

    #[test]
    fn rdhr_sub_box_fraction() {
        let sq = gen::cube(2);
        let mut chain = HnrChain::new(&sq, vec![0.0; 2], WalkConfig::default());
        let mut rng = RngStream::new(6);
        let n = 100_000;
        let mut inside = 0;
        for _ in 0..n {
            let x = chain.next_point(&mut rng).unwrap();
            inside += (x[0].abs() <= 0.5 && x[1].abs() <= 0.5) as usize;
        }
        assert!((inside as f64 / n as f64 - 0.25).abs() <= 0.02);
    }

    #[test]
    fn chains_are_deterministic() {
        let sq = gen::cube(3);
        let run = || {
            let mut chain = HnrChain::new(&sq, vec![0.0; 3], WalkConfig::default());
            let mut rng = RngStream::new(9);
            chain.take(50, &mut rng).unwrap()
        };
        assert_eq!(run(), run());
    }
}
