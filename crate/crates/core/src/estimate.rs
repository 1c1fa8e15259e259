//! Ratio estimation with a sliding-window stopping rule, and the full volume
//! algorithm gluing schedule, ratios and the terminal body together.

use std::borrow::Cow;
use std::collections::VecDeque;
use std::time::Instant;

use rand::RngCore;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::gamma::ln_gamma;

use crate::annealing::{
    anneal_from, initial_q_bounds, initialize, BallFamily, BodyFamily, CoolingParams,
    HBodyFamily, Initialization, ScheduleResult,
};
use crate::bodies::{ConvexBody, Intersection, Polytope, Representation};
use crate::error::{Error, Result};
use crate::sampling::{HnrChain, PointSource, RngStream, WalkConfig, WalkMode};

pub const DEFAULT_MAX_POINTS: u64 = 100_000_000;

/// `Φ⁻¹(q)` for the standard normal.
pub fn inverse_normal_quantile(q: f64) -> f64 {
    Normal::standard().inverse_cdf(q)
}

/// `ln vol(B_d(0, r)) = d ln r + (d/2) ln π − ln Γ(d/2 + 1)`.
pub fn ball_volume_log(d: usize, radius: f64) -> f64 {
    let d = d as f64;
    d * radius.ln() + 0.5 * d * std::f64::consts::PI.ln() - ln_gamma(0.5 * d + 1.0)
}

/// Last `k` values with running sum and sum of squares.
#[derive(Clone, Debug)]
pub struct SlidingWindow {
    cap: usize,
    buf: VecDeque<f64>,
    sum: f64,
    sumsq: f64,
    since_refresh: usize,
}

impl SlidingWindow {
    pub fn new(cap: usize) -> Self {
        assert!(cap >= 1, "window needs capacity");
        Self {
            cap,
            buf: VecDeque::with_capacity(cap + 1),
            sum: 0.0,
            sumsq: 0.0,
            since_refresh: 0,
        }
    }

    pub fn capacity(&self) -> usize {
        self.cap
    }

    pub fn len(&self) -> usize {
        self.buf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buf.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.buf.len() == self.cap
    }

    pub fn push(&mut self, x: f64) {
        self.buf.push_back(x);
        self.sum += x;
        self.sumsq += x * x;
        if self.buf.len() > self.cap {
            let old = self.buf.pop_front().expect("non-empty");
            self.sum -= old;
            self.sumsq -= old * old;
        }
        // Re-summing once per window length keeps rounding drift bounded at
        // O(1) amortized cost.
        self.since_refresh += 1;
        if self.since_refresh >= self.cap {
            self.since_refresh = 0;
            self.sum = self.buf.iter().sum();
            self.sumsq = self.buf.iter().map(|v| v * v).sum();
        }
    }

    pub fn mean(&self) -> f64 {
        self.sum / self.buf.len() as f64
    }

    /// Population standard deviation.
    pub fn std(&self) -> f64 {
        let n = self.buf.len() as f64;
        let mean = self.sum / n;
        (self.sumsq / n - mean * mean).max(0.0).sqrt()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorBudget {
    /// Budgets for `r₀ … r_{m−1}`.
    pub ratios: Vec<f64>,
    /// Budget for `r_m`.
    pub terminal: f64,
    /// Budget for the recursive `vol(C_m)` when the terminal body is an H-body.
    pub terminal_volume: Option<f64>,
}

impl ErrorBudget {
    pub fn sum_of_squares(&self) -> f64 {
        self.ratios.iter().map(|e| e * e).sum::<f64>()
            + self.terminal * self.terminal
            + self.terminal_volume.map_or(0.0, |e| e * e)
    }
}

pub fn split_error(epsilon: f64, m: usize, terminal_is_hbody: bool) -> ErrorBudget {
    if m == 0 {
        return ErrorBudget {
            ratios: vec![],
            terminal: epsilon,
            terminal_volume: None,
        };
    }
    let mf = m as f64;
    let root = (mf + 1.0).sqrt();
    if terminal_is_hbody {
        let inner = epsilon / (2.0 * root);
        let rest = epsilon * (2.0 * mf + 1.0).sqrt() / (2.0 * mf + 2.0).sqrt();
        let each = rest / root;
        ErrorBudget {
            ratios: vec![each; m],
            terminal: each,
            terminal_volume: Some(inner),
        }
    } else {
        let terminal = epsilon / (2.0 * root);
        let rest = epsilon * (4.0 * (mf + 1.0) - 1.0).sqrt() / (2.0 * root);
        ErrorBudget {
            ratios: vec![rest / mf.sqrt(); m],
            terminal,
            terminal_volume: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioEstimate {
    pub ratio: f64,
    /// Fresh points drawn, excluding the schedule seed.
    pub points: u64,
    /// Seed plus fresh points inside.
    pub inside: u64,
    pub total: u64,
}

/// Draws points from `source` until the sliding-window criterion
/// `2 z s / (r̂ − z s) ≤ ε/2` holds, `z = Φ⁻¹(1 − p/2)`, `p = 1 − (3/4)^{1/(m+1)}`.
#[allow(clippy::too_many_arguments)]
pub fn estimate_ratio<S, F>(
    source: &mut S,
    mut inner: F,
    eps: f64,
    m: usize,
    k: usize,
    seed: Option<(usize, usize)>,
    max_points: u64,
    rng: &mut RngStream,
) -> Result<RatioEstimate>
where
    S: PointSource + ?Sized,
    F: FnMut(&[f64]) -> Result<bool>,
{
    if k < 2 {
        return Err(Error::Invalid("window length must be at least 2".into()));
    }
    let p = 1.0 - 0.75f64.powf(1.0 / (m as f64 + 1.0));
    let z = inverse_normal_quantile(1.0 - p / 2.0);
    let mut window = SlidingWindow::new(k);
    let (mut inside, mut total) = (0u64, 0u64);
    if let Some((c, n)) = seed.filter(|s| s.1 > 0) {
        inside = c as u64;
        total = n as u64;
        window.push(inside as f64 / total as f64);
    }
    let mut j = 0u64;
    loop {
        if j >= max_points {
            return Err(Error::StepCap(max_points));
        }
        let x = source.next_point(rng)?;
        j += 1;
        total += 1;
        inside += inner(x)? as u64;
        let r = inside as f64 / total as f64;
        window.push(r);
        if j as usize > k {
            let s = window.std();
            let den = r - z * s;
            if den > 0.0 && 2.0 * z * s / den <= eps / 2.0 {
                return Ok(RatioEstimate {
                    ratio: r,
                    points: j,
                    inside,
                    total,
                });
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BodyChoice {
    Ball,
    Hpoly,
    Auto,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BodyKind {
    Ball,
    Hpoly,
}

impl std::fmt::Display for BodyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Ball => "ball",
            Self::Hpoly => "hpoly",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolumeConfig {
    pub epsilon: f64,
    pub body: BodyChoice,
    /// `None` picks CDHR for H-polytopes and RDHR otherwise.
    pub walk: Option<WalkMode>,
    pub seed: u64,
    /// Round V-polytopes by their enclosing ellipsoid first.
    pub round: bool,
    pub cooling: CoolingParams,
    /// Window length; `None` means `2d² + 250`.
    pub window: Option<usize>,
    pub max_points: u64,
}

impl Default for VolumeConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.1,
            body: BodyChoice::Auto,
            walk: None,
            seed: 0,
            round: false,
            cooling: CoolingParams::default(),
            window: None,
            max_points: DEFAULT_MAX_POINTS,
        }
    }
}

impl VolumeConfig {
    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return Err(Error::Invalid(format!("error bound {} outside (0, 1]", self.epsilon)));
        }
        self.cooling.validate()
    }
}

pub fn default_walk(rep: Representation) -> WalkMode {
    match rep {
        Representation::H => WalkMode::Cdhr,
        Representation::V | Representation::Z => WalkMode::Rdhr,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseEstimate {
    pub epsilon: f64,
    pub points: u64,
    pub inside: u64,
    pub total: u64,
    pub walk_steps: u64,
    /// Normal-approximation half width `z_{α/2} √(r̂(1 − r̂)/n)`; informational only.
    pub ci_half_width: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AutoChoice {
    pub ball_fraction: f64,
    pub hpoly_fraction: f64,
    pub tie: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub schedule: ScheduleResult,
    pub phases: Vec<PhaseEstimate>,
    pub log_det_map: f64,
    pub log_terminal_volume: f64,
    pub auto: Option<AutoChoice>,
    /// The run estimating `vol(C_m)` when `C_m` is an H-body.
    pub terminal_run: Option<Box<VolumeReport>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolumeReport {
    pub representation: Representation,
    pub d: usize,
    pub k_or_facets_or_vertices: usize,
    pub epsilon: f64,
    pub seed: u64,
    pub body: BodyKind,
    pub walk: WalkMode,
    pub m: usize,
    /// `r₀ … r_m`.
    pub ratios: Vec<f64>,
    pub steps_total: u64,
    pub log_volume: f64,
    /// `exp(log_volume)`, absent when not representable.
    pub volume: Option<f64>,
    pub time_seconds: f64,
    pub diagnostics: Diagnostics,
}

struct Estimated {
    ratios: Vec<f64>,
    phases: Vec<PhaseEstimate>,
    walk_steps: u64,
}

struct RunContext<'a> {
    cfg: &'a VolumeConfig,
    walk: WalkConfig,
    k: usize,
}

fn ci_half_width(r: f64, n: u64, alpha: f64) -> f64 {
    inverse_normal_quantile(1.0 - alpha / 2.0) * (r * (1.0 - r) / n as f64).sqrt()
}

/// `r_i` for `i < m` by walking `P_i`, then `r_m` from the terminal body.
fn estimate_all<F: BodyFamily>(
    p: &Polytope,
    fam: &F,
    interior: &[f64],
    sched: &ScheduleResult,
    budget: &ErrorBudget,
    ctx: &RunContext<'_>,
    rng: &mut RngStream,
) -> Result<Estimated> {
    let m = sched.phase_count();
    let mut out = Estimated {
        ratios: Vec::with_capacity(m + 1),
        phases: Vec::with_capacity(m + 1),
        walk_steps: 0,
    };
    let alpha = ctx.cfg.cooling.alpha;
    let record = |out: &mut Estimated, est: RatioEstimate, eps: f64, steps: u64| {
        out.ratios.push(est.ratio);
        out.walk_steps += steps;
        out.phases.push(PhaseEstimate {
            epsilon: eps,
            points: est.points,
            inside: est.inside,
            total: est.total,
            walk_steps: steps,
            ci_half_width: ci_half_width(est.ratio, est.total, alpha),
        });
    };
    for i in 0..m {
        let next = sched.params[i];
        let inner = |x: &[f64]| Ok(fam.required(x) <= next);
        let eps = budget.ratios[i];
        let seed = Some(sched.pooled[i]);
        let (est, steps) = if i == 0 {
            let mut chain = HnrChain::new(p, interior.to_vec(), ctx.walk);
            let est = estimate_ratio(&mut chain, inner, eps, m, ctx.k, seed, ctx.cfg.max_points, rng)?;
            (est, chain.walk_steps())
        } else {
            let body = fam.body(sched.params[i - 1])?;
            let mut chain = HnrChain::new(Intersection::new(p, &body), interior.to_vec(), ctx.walk);
            let est = estimate_ratio(&mut chain, inner, eps, m, ctx.k, seed, ctx.cfg.max_points, rng)?;
            (est, chain.walk_steps())
        };
        record(&mut out, est, eps, steps);
    }
    let mut source = fam.source(sched.terminal(), &ctx.walk)?;
    let est = estimate_ratio(
        source.as_mut(),
        |x| p.contains(x),
        budget.terminal,
        m,
        ctx.k,
        Some(sched.pooled[m]),
        ctx.cfg.max_points,
        rng,
    )?;
    let steps = source.walk_steps();
    record(&mut out, est, budget.terminal, steps);
    Ok(out)
}

/// Fractions of a fresh sample of `P` inside each candidate terminal body.
fn compare_terminals(
    p: &Polytope,
    interior: &[f64],
    ball: (&BallFamily, f64),
    hbody: (&HBodyFamily, f64),
    n: usize,
    walk: &WalkConfig,
    rng: &mut RngStream,
) -> Result<(AutoChoice, u64)> {
    let mut chain = HnrChain::new(p, interior.to_vec(), *walk);
    let (mut in_ball, mut in_h) = (0usize, 0usize);
    for _ in 0..n {
        let x = chain.next_point(rng)?;
        in_ball += (ball.0.required(x) <= ball.1) as usize;
        in_h += (hbody.0.required(x) <= hbody.1) as usize;
    }
    let (fb, fh) = (in_ball as f64 / n as f64, in_h as f64 / n as f64);
    // Differences within two standard errors count as a tie.
    let se = ((fb * (1.0 - fb) + fh * (1.0 - fh)) / n as f64).sqrt();
    Ok((
        AutoChoice {
            ball_fraction: fb,
            hpoly_fraction: fh,
            tie: (fb - fh).abs() <= 2.0 * se,
        },
        chain.walk_steps(),
    ))
}

enum Plan {
    Ball(BallFamily, Initialization, f64),
    Hbody(HBodyFamily, Initialization),
}

/// Estimates `vol(p)` to relative error about `cfg.epsilon`.
pub fn volume(p: &Polytope, cfg: &VolumeConfig) -> Result<VolumeReport> {
    let started = Instant::now();
    cfg.validate()?;
    let mut rng = RngStream::new(cfg.seed);
    let rep = p.representation();
    let (work, log_det) = match (p, cfg.round) {
        (Polytope::V(v), true) => {
            let (r, ld) = v.round()?;
            (Cow::Owned(Polytope::V(r)), ld)
        }
        _ => (Cow::Borrowed(p), 0.0),
    };
    let work: &Polytope = &work;
    let d = work.dim();
    let walk_mode = cfg.walk.unwrap_or_else(|| default_walk(rep));
    let ctx = RunContext {
        cfg,
        walk: WalkConfig::new(walk_mode, 1)?,
        k: cfg.window.unwrap_or(2 * d * d + 250),
    };
    let interior = work.interior_point()?;
    let n_walk = cfg.cooling.walk_total_for(d);
    let mut steps_total = 0u64;

    let zonotope = match work {
        Polytope::Z(z) => Some(z),
        _ => None,
    };
    let want_h = match cfg.body {
        BodyChoice::Hpoly => {
            let Some(z) = zonotope else {
                return Err(Error::Invalid(
                    "the H-body template is only defined for zonotopes".into(),
                ));
            };
            if z.num_generators() <= d {
                return Err(Error::Invalid(
                    "the H-body template needs more generators than dimensions".into(),
                ));
            }
            true
        }
        BodyChoice::Ball => false,
        BodyChoice::Auto => zonotope.is_some_and(|z| z.num_generators() > d),
    };
    let try_ball = cfg.body != BodyChoice::Hpoly;

    let ball_plan = if try_ball {
        let (lo, hi, st) = initial_q_bounds(work, &interior, n_walk, &ctx.walk, &mut rng)?;
        steps_total += st;
        let fam = BallFamily::new(interior.clone());
        let init = initialize(work, &fam, &cfg.cooling, &ctx.walk, lo, hi, &mut rng)?;
        Some((fam, init, lo))
    } else {
        None
    };
    let h_plan = if want_h {
        let z = zonotope.expect("checked above");
        let fam = HBodyFamily::new(z.to_hbody()?);
        let init = initialize(work, &fam, &cfg.cooling, &ctx.walk, 0.0, 1.0, &mut rng)?;
        Some((fam, init))
    } else {
        None
    };

    let mut auto = None;
    let plan = match (ball_plan, h_plan) {
        (Some((bf, bi, lo)), None) => Plan::Ball(bf, bi, lo),
        (None, Some((hf, hi))) => Plan::Hbody(hf, hi),
        (Some((bf, bi, lo)), Some((hf, hi))) => {
            let (choice, st) = compare_terminals(
                work,
                &interior,
                (&bf, bi.value),
                (&hf, hi.value),
                n_walk,
                &ctx.walk,
                &mut rng,
            )?;
            steps_total += st;
            let order = zonotope.expect("h plan implies zonotope").order();
            let take_h = if choice.tie {
                order <= 4.0
            } else {
                choice.hpoly_fraction > choice.ball_fraction
            };
            auto = Some(choice);
            if take_h {
                Plan::Hbody(hf, hi)
            } else {
                Plan::Ball(bf, bi, lo)
            }
        }
        (None, None) => unreachable!("at least one template is always tried"),
    };

    let (body, sched, est, log_terminal, terminal_run) = match plan {
        Plan::Ball(fam, init, lo) => {
            let sched = anneal_from(work, &fam, &interior, &cfg.cooling, &ctx.walk, lo, init, &mut rng)?;
            let budget = split_error(cfg.epsilon, sched.phase_count(), false);
            let est = estimate_all(work, &fam, &interior, &sched, &budget, &ctx, &mut rng)?;
            let log_c = ball_volume_log(d, sched.terminal());
            (BodyKind::Ball, sched, est, log_c, None)
        }
        Plan::Hbody(fam, init) => {
            let sched = anneal_from(work, &fam, &interior, &cfg.cooling, &ctx.walk, 0.0, init, &mut rng)?;
            let budget = split_error(cfg.epsilon, sched.phase_count(), true);
            let est = estimate_all(work, &fam, &interior, &sched, &budget, &ctx, &mut rng)?;
            let c_m = fam.body(sched.terminal())?.to_hpolytope()?;
            let sub = VolumeConfig {
                epsilon: budget.terminal_volume.expect("h-body budget"),
                body: BodyChoice::Ball,
                walk: cfg.walk,
                seed: rng.next_u64(),
                round: false,
                ..cfg.clone()
            };
            let inner = volume(&Polytope::H(c_m), &sub)?;
            (BodyKind::Hpoly, sched, est, inner.log_volume, Some(Box::new(inner)))
        }
    };

    steps_total += sched.walk_steps + est.walk_steps;
    if let Some(inner) = &terminal_run {
        steps_total += inner.steps_total;
    }
    let m = sched.phase_count();
    let log_volume = log_terminal + est.ratios[m].ln()
        - est.ratios[..m].iter().map(|r| r.ln()).sum::<f64>()
        - log_det;
    let volume = Some(log_volume.exp()).filter(|v| v.is_finite() && *v > 0.0);
    Ok(VolumeReport {
        representation: rep,
        d,
        k_or_facets_or_vertices: p.size(),
        epsilon: cfg.epsilon,
        seed: cfg.seed,
        body,
        walk: walk_mode,
        m,
        ratios: est.ratios,
        steps_total,
        log_volume,
        volume,
        time_seconds: started.elapsed().as_secs_f64(),
        diagnostics: Diagnostics {
            schedule: sched,
            phases: est.phases,
            log_det_map: log_det,
            log_terminal_volume: log_terminal,
            auto,
            terminal_run,
        },
    })
}
