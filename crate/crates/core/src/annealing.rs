//! Annealing schedule: picks the nested bodies `C₁ ⊇ … ⊇ C_m` so that each
//! consecutive volume ratio lands in `[r, r+δ]` with high probability, using
//! one-sided t-tests on sub-sample proportions and bisection on the body's
//! scale parameter.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::bodies::{Ball, ConvexBody, Intersection, ShiftedHBody};
use crate::error::{Error, Result};
use crate::sampling::{BallSource, HnrChain, PointSource, RngStream, WalkConfig};

/// A bracket narrower than this fraction of its starting width counts as a
/// contradiction.
const COLLAPSE_FRACTION: f64 = 1e-4;
/// How many times the ball initialization may double `q_max`.
const MAX_EXTENSIONS: usize = 30;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoolingParams {
    pub r: f64,
    pub delta: f64,
    pub alpha: f64,
    /// Number of sub-lists the sample is split into.
    pub nu: usize,
    /// `νN` when the body is sampled exactly (balls) or with a long walk (H-bodies).
    pub exact_total: usize,
    /// `νN` for Hit-and-Run phases; `None` means `1200 + 2d²`.
    pub walk_total: Option<usize>,
}

impl Default for CoolingParams {
    fn default() -> Self {
        Self {
            r: 0.1,
            delta: 0.05,
            alpha: 0.10,
            nu: 10,
            exact_total: 1200,
            walk_total: None,
        }
    }
}

impl CoolingParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.r > 0.0 && self.delta > 0.0 && self.r + self.delta < 1.0) {
            return Err(Error::Invalid(format!(
                "cooling parameters need 0 < r, 0 < delta, r + delta < 1 (r={}, delta={})",
                self.r, self.delta
            )));
        }
        if !(self.alpha > 0.0 && self.alpha <= 0.5) {
            return Err(Error::Invalid(format!("significance level {} outside (0, 0.5]", self.alpha)));
        }
        if self.nu < 2 {
            return Err(Error::Invalid("nu must be at least 2".into()));
        }
        if self.exact_total < self.nu || self.walk_total.is_some_and(|w| w < self.nu) {
            return Err(Error::Invalid("sample size smaller than nu".into()));
        }
        Ok(())
    }

    pub fn walk_total_for(&self, d: usize) -> usize {
        self.walk_total.unwrap_or(1200 + 2 * d * d)
    }
}

/// Upper-tail quantile `t` with `P(T > t) = alpha` for `dof` degrees of freedom.
pub fn t_quantile(dof: usize, alpha: f64) -> f64 {
    let t = StudentsT::new(0.0, 1.0, dof as f64).expect("dof >= 1");
    t.inverse_cdf(1.0 - alpha)
}

fn mean_and_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Certifies `ratio ≥ r`: `μ̂ ≥ r + t_{ν−1,α} s/√ν`.
pub fn test_r(ratios: &[f64], r: f64, alpha: f64) -> bool {
    let nu = ratios.len();
    let (mu, s) = mean_and_sd(ratios);
    mu >= r + t_quantile(nu - 1, alpha) * s / (nu as f64).sqrt()
}

/// Certifies `ratio ≤ r + δ`: `μ̂ ≤ r + δ − t_{ν−1,α} s/√ν`.
pub fn test_l(ratios: &[f64], r: f64, delta: f64, alpha: f64) -> bool {
    let nu = ratios.len();
    let (mu, s) = mean_and_sd(ratios);
    mu <= r + delta - t_quantile(nu - 1, alpha) * s / (nu as f64).sqrt()
}

/// Proportions inside `inner` of `nu` equal sub-lists, dealt round-robin.
pub fn ratios_from_sample<B: ConvexBody + ?Sized>(
    points: &[Vec<f64>],
    inner: &B,
    nu: usize,
) -> Result<Vec<f64>> {
    let flags = points
        .iter()
        .map(|x| inner.contains(x))
        .collect::<Result<Vec<_>>>()?;
    Ok(ratios_from_flags(&flags, nu))
}

/// Point `j` goes to list `j mod ν`, so every list spans the whole walk.
pub(crate) fn ratios_from_flags(flags: &[bool], nu: usize) -> Vec<f64> {
    let n = flags.len() / nu;
    (0..nu)
        .map(|l| (0..n).filter(|&j| flags[j * nu + l]).count() as f64 / n as f64)
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestPair {
    pub r: bool,
    pub l: bool,
}

/// Both tests, with the normal-approximation guard: when `N r̂ (1 − r̂) ≤ 10`
/// the side the pooled ratio violates is failed outright.
pub fn run_tests(flags: &[bool], params: &CoolingParams) -> TestPair {
    let ratios = ratios_from_flags(flags, params.nu);
    let n_list = flags.len() / params.nu;
    let used = n_list * params.nu;
    let pooled = flags[..used].iter().filter(|&&f| f).count() as f64 / used as f64;
    let mut out = TestPair {
        r: test_r(&ratios, params.r, params.alpha),
        l: test_l(&ratios, params.r, params.delta, params.alpha),
    };
    if n_list as f64 * pooled * (1.0 - pooled) <= 10.0 {
        if pooled < params.r + params.delta / 2.0 {
            out.r = false;
        } else {
            out.l = false;
        }
    }
    out
}

/// A one-parameter family of bodies growing with the parameter.
pub trait BodyFamily: Sync {
    type Body: ConvexBody;

    fn dim(&self) -> usize;

    fn body(&self, s: f64) -> Result<Self::Body>;

    /// Smallest parameter whose body contains `x`.
    fn required(&self, x: &[f64]) -> f64;

    /// `n` points from `body(s)` for the initialization tests, plus walk steps used.
    fn sample(&self, s: f64, n: usize, walk: &WalkConfig, rng: &mut RngStream)
        -> Result<(Vec<Vec<f64>>, u64)>;

    /// Whether the upper end of the initial range may be pushed outwards.
    fn extendable(&self) -> bool;

    /// A stream of points from `body(s)` for ratio estimation.
    fn source(&self, s: f64, walk: &WalkConfig) -> Result<Box<dyn PointSource>>;
}

/// Balls of radius `q` around a fixed center.
pub struct BallFamily {
    center: Vec<f64>,
}

impl BallFamily {
    pub fn new(center: Vec<f64>) -> Self {
        Self { center }
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }
}

impl BodyFamily for BallFamily {
    type Body = Ball;

    fn dim(&self) -> usize {
        self.center.len()
    }

    fn body(&self, q: f64) -> Result<Ball> {
        Ball::new(self.center.clone(), q)
    }

    fn required(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(&self.center)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    fn sample(
        &self,
        q: f64,
        n: usize,
        _walk: &WalkConfig,
        rng: &mut RngStream,
    ) -> Result<(Vec<Vec<f64>>, u64)> {
        let ball = self.body(q)?;
        Ok(((0..n).map(|_| crate::sampling::sample_ball(rng, &ball)).collect(), 0))
    }

    fn extendable(&self) -> bool {
        true
    }

    fn source(&self, q: f64, _walk: &WalkConfig) -> Result<Box<dyn PointSource>> {
        Ok(Box::new(BallSource::new(self.body(q)?)))
    }
}

/// The facet-shifted H-bodies `{x : M x ≤ b(t)}`, `t ∈ [0, 1]`.
pub struct HBodyFamily {
    template: ShiftedHBody,
}

impl HBodyFamily {
    pub fn new(template: ShiftedHBody) -> Self {
        Self { template }
    }

    pub fn template(&self) -> &ShiftedHBody {
        &self.template
    }
}

impl BodyFamily for HBodyFamily {
    type Body = ShiftedHBody;

    fn dim(&self) -> usize {
        self.template.dim()
    }

    fn body(&self, t: f64) -> Result<ShiftedHBody> {
        self.template.with_t(t)
    }

    fn required(&self, x: &[f64]) -> f64 {
        self.template.required_t(x)
    }

    /// Hit-and-Run from the center with a long walk (`10 + 2d` steps per point).
    fn sample(
        &self,
        t: f64,
        n: usize,
        walk: &WalkConfig,
        rng: &mut RngStream,
    ) -> Result<(Vec<Vec<f64>>, u64)> {
        let d = self.dim();
        let cfg = walk.with_steps(10 + 2 * d);
        let mut chain = HnrChain::new(self.body(t)?, vec![0.0; d], cfg);
        let pts = chain.take(n, rng)?;
        Ok((pts, chain.walk_steps()))
    }

    fn extendable(&self) -> bool {
        false
    }

    fn source(&self, t: f64, walk: &WalkConfig) -> Result<Box<dyn PointSource>> {
        Ok(Box::new(HnrChain::new(self.body(t)?, vec![0.0; self.dim()], *walk)))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub lo: f64,
    pub hi: f64,
    pub value: f64,
    pub tests: TestPair,
    pub inside: usize,
    pub total: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseTrace {
    pub probes: Vec<Probe>,
    pub resamples: usize,
    /// The ball initialization had to enlarge `q_max`.
    pub extensions: usize,
    /// The H-body initialization ended at `t = 1` without a double success.
    pub saturated: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Initialization {
    /// Parameter of the terminal body `C'`.
    pub value: f64,
    /// Upper end of the parameter range after any extension.
    pub upper: f64,
    /// Points of `C'` inside `P` and sample size at acceptance.
    pub inside: usize,
    pub total: usize,
    pub trace: PhaseTrace,
    pub walk_steps: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleResult {
    /// `s₁ > s₂ > … > s_m`; the last entry is the terminal body `C_m = C'`.
    pub params: Vec<f64>,
    /// Schedule-time pooled proportions `(inside, total)` for `r₀ … r_m`.
    pub pooled: Vec<(usize, usize)>,
    pub init: PhaseTrace,
    pub steps: Vec<PhaseTrace>,
    pub walk_steps: u64,
    pub probes: usize,
}

impl ScheduleResult {
    pub fn phase_count(&self) -> usize {
        self.params.len()
    }

    pub fn terminal(&self) -> f64 {
        *self.params.last().expect("m >= 1")
    }
}

/// Counts probes against the global cap.
struct Budget {
    used: usize,
    cap: usize,
}

impl Budget {
    fn new(d: usize, lo: f64, hi: f64) -> Self {
        let lo_pos = lo.max(1e-3 * hi);
        let span = (hi / lo_pos).max(10.0);
        let cap = 20 * (d as f64 * span.log2()).ceil() as usize;
        Self { used: 0, cap }
    }

    fn spend(&mut self, what: &str, detail: impl FnOnce() -> String) -> Result<()> {
        self.used += 1;
        if self.used > self.cap {
            return Err(Error::ScheduleFailed(format!(
                "{} probes exhausted during {what}; {}",
                self.cap,
                detail()
            )));
        }
        Ok(())
    }
}

/// `q_min = 0`, `q_max` = farthest of `n` Hit-and-Run points of `p` from `center`.
pub fn initial_q_bounds<P: ConvexBody + ?Sized>(
    p: &P,
    center: &[f64],
    n: usize,
    walk: &WalkConfig,
    rng: &mut RngStream,
) -> Result<(f64, f64, u64)> {
    let fam = BallFamily::new(center.to_vec());
    let mut chain = HnrChain::new(p, center.to_vec(), *walk);
    let mut q_max: f64 = 0.0;
    for _ in 0..n {
        q_max = q_max.max(fam.required(chain.next_point(rng)?));
    }
    Ok((0.0, q_max, chain.walk_steps()))
}

fn flags_inside<P: ConvexBody + ?Sized>(p: &P, pts: &[Vec<f64>]) -> Result<Vec<bool>> {
    pts.iter().map(|x| p.contains(x)).collect()
}

/// Bisection for the terminal body `C'`: the smallest body with
/// `vol(C' ∩ P)/vol(C') ∈ [r, r+δ]`.
pub fn initialize<P, F>(
    p: &P,
    fam: &F,
    params: &CoolingParams,
    walk: &WalkConfig,
    lo: f64,
    hi: f64,
    rng: &mut RngStream,
) -> Result<Initialization>
where
    P: ConvexBody + ?Sized,
    F: BodyFamily,
{
    params.validate()?;
    if !(lo < hi) {
        return Err(Error::Invalid(format!("empty parameter range [{lo}, {hi}]")));
    }
    let mut budget = Budget::new(fam.dim(), lo, hi);
    init_with_budget(p, fam, params, walk, lo, hi, rng, &mut budget)
}

#[allow(clippy::too_many_arguments)]
fn init_with_budget<P, F>(
    p: &P,
    fam: &F,
    params: &CoolingParams,
    walk: &WalkConfig,
    lo: f64,
    hi: f64,
    rng: &mut RngStream,
    budget: &mut Budget,
) -> Result<Initialization>
where
    P: ConvexBody + ?Sized,
    F: BodyFamily,
{
    let n = params.exact_total;
    let mut trace = PhaseTrace::default();
    let mut walk_steps = 0;
    let mut upper = hi;
    let (mut a, mut b) = (lo, hi);
    let mut width0 = hi - lo;
    loop {
        let q = 0.5 * (a + b);
        budget.spend("initialization", || format!("bracket [{a}, {b}]"))?;
        let (pts, steps) = fam.sample(q, n, walk, rng)?;
        walk_steps += steps;
        let flags = flags_inside(p, &pts)?;
        let tests = run_tests(&flags, params);
        let inside = flags.iter().filter(|&&f| f).count();
        trace.probes.push(Probe {
            lo: a,
            hi: b,
            value: q,
            tests,
            inside,
            total: n,
        });
        match (tests.r, tests.l) {
            (true, true) => {
                return Ok(Initialization {
                    value: q,
                    upper,
                    inside,
                    total: n,
                    trace,
                    walk_steps,
                })
            }
            (true, false) => a = q,
            (false, true) => b = q,
            (false, false) => {
                trace.resamples += 1;
                continue;
            }
        }
        if b - a > COLLAPSE_FRACTION * width0 {
            continue;
        }
        let pinned_high = upper - a <= COLLAPSE_FRACTION * width0;
        if pinned_high && fam.extendable() && trace.extensions < MAX_EXTENSIONS {
            // Even the largest body holds too much of P: grow the range.
            trace.extensions += 1;
            a = upper;
            upper *= 2.0;
            b = upper;
            width0 = b - a;
        } else if pinned_high && !fam.extendable() {
            // The enclosing body is tight around P; it becomes C'.
            let (pts, steps) = fam.sample(upper, n, walk, rng)?;
            walk_steps += steps;
            let inside = flags_inside(p, &pts)?.iter().filter(|&&f| f).count();
            trace.saturated = true;
            return Ok(Initialization {
                value: upper,
                upper,
                inside,
                total: n,
                trace,
                walk_steps,
            });
        } else {
            trace.resamples += 1;
            a = lo;
            b = upper;
            width0 = b - a;
        }
    }
}

/// `n` consecutive Hit-and-Run points of `P ∩ body(s)` (or of `P` when `s` is `None`).
fn sample_phase<P, F>(
    p: &P,
    fam: &F,
    s: Option<f64>,
    start: &[f64],
    n: usize,
    walk: &WalkConfig,
    rng: &mut RngStream,
) -> Result<(Vec<f64>, u64)>
where
    P: ConvexBody + ?Sized,
    F: BodyFamily,
{
    let mut req = Vec::with_capacity(n);
    let steps = match s {
        None => {
            let mut chain = HnrChain::new(p, start.to_vec(), *walk);
            for _ in 0..n {
                req.push(fam.required(chain.next_point(rng)?));
            }
            chain.walk_steps()
        }
        Some(s) => {
            let body = fam.body(s)?;
            let mut chain = HnrChain::new(Intersection::new(p, &body), start.to_vec(), *walk);
            for _ in 0..n {
                req.push(fam.required(chain.next_point(rng)?));
            }
            chain.walk_steps()
        }
    };
    Ok((req, steps))
}

fn flags_below(req: &[f64], s: f64) -> Vec<bool> {
    req.iter().map(|&x| x <= s).collect()
}

/// Full schedule: initialization, then regular steps until the stopping test.
#[allow(clippy::too_many_arguments)]
pub fn anneal<P, F>(
    p: &P,
    fam: &F,
    interior: &[f64],
    params: &CoolingParams,
    walk: &WalkConfig,
    lo: f64,
    hi: f64,
    rng: &mut RngStream,
) -> Result<ScheduleResult>
where
    P: ConvexBody + ?Sized,
    F: BodyFamily,
{
    params.validate()?;
    if !(lo < hi) {
        return Err(Error::Invalid(format!("empty parameter range [{lo}, {hi}]")));
    }
    let mut budget = Budget::new(fam.dim(), lo, hi);
    let init = init_with_budget(p, fam, params, walk, lo, hi, rng, &mut budget)?;
    continue_schedule(p, fam, interior, params, walk, init, rng, &mut budget)
}

/// Regular steps after an already computed initialization.
#[allow(clippy::too_many_arguments)]
pub fn anneal_from<P, F>(
    p: &P,
    fam: &F,
    interior: &[f64],
    params: &CoolingParams,
    walk: &WalkConfig,
    lo: f64,
    init: Initialization,
    rng: &mut RngStream,
) -> Result<ScheduleResult>
where
    P: ConvexBody + ?Sized,
    F: BodyFamily,
{
    let mut budget = Budget::new(fam.dim(), lo, init.upper);
    budget.used = init.trace.probes.len();
    continue_schedule(p, fam, interior, params, walk, init, rng, &mut budget)
}

#[allow(clippy::too_many_arguments)]
fn continue_schedule<P, F>(
    p: &P,
    fam: &F,
    interior: &[f64],
    params: &CoolingParams,
    walk: &WalkConfig,
    init: Initialization,
    rng: &mut RngStream,
    budget: &mut Budget,
) -> Result<ScheduleResult>
where
    P: ConvexBody + ?Sized,
    F: BodyFamily,
{
    let n = params.walk_total_for(fam.dim());
    let s_c = init.value;
    let mut walk_steps = init.walk_steps;
    let mut s_prev = init.upper;
    let mut current: Option<f64> = None;
    let mut params_out = Vec::new();
    let mut pooled = Vec::new();
    let mut steps_trace = Vec::new();

    loop {
        let mut trace = PhaseTrace::default();
        let (mut req, st) = sample_phase(p, fam, current, interior, n, walk, rng)?;
        walk_steps += st;

        budget.spend("stopping test", || format!("{} bodies so far", params_out.len()))?;
        let flags = flags_below(&req, s_c);
        let tests = run_tests(&flags, params);
        let inside = flags.iter().filter(|&&f| f).count();
        trace.probes.push(Probe {
            lo: s_c,
            hi: s_c,
            value: s_c,
            tests,
            inside,
            total: n,
        });
        if tests.r {
            params_out.push(s_c);
            pooled.push((inside, n));
            steps_trace.push(trace);
            break;
        }

        let width0 = s_prev - s_c;
        let (mut a, mut b) = (s_c, s_prev);
        let accepted = loop {
            let q = 0.5 * (a + b);
            budget.spend("regular step", || {
                format!("{} bodies so far, bracket [{a}, {b}]", params_out.len())
            })?;
            let flags = flags_below(&req, q);
            let tests = run_tests(&flags, params);
            let inside = flags.iter().filter(|&&f| f).count();
            trace.probes.push(Probe {
                lo: a,
                hi: b,
                value: q,
                tests,
                inside,
                total: n,
            });
            match (tests.r, tests.l) {
                (true, true) => break (q, inside),
                (true, false) => b = q,
                (false, true) => a = q,
                (false, false) => {
                    trace.resamples += 1;
                    let (r2, st) = sample_phase(p, fam, current, interior, n, walk, rng)?;
                    req = r2;
                    walk_steps += st;
                    continue;
                }
            }
            if b - a <= COLLAPSE_FRACTION * width0 {
                trace.resamples += 1;
                let (r2, st) = sample_phase(p, fam, current, interior, n, walk, rng)?;
                req = r2;
                walk_steps += st;
                a = s_c;
                b = s_prev;
            }
        };
        params_out.push(accepted.0);
        pooled.push((accepted.1, n));
        steps_trace.push(trace);
        s_prev = accepted.0;
        current = Some(accepted.0);
    }

    pooled.push((init.inside, init.total));
    Ok(ScheduleResult {
        params: params_out,
        pooled,
        init: init.trace,
        steps: steps_trace,
        walk_steps,
        probes: budget.used,
    })
}
