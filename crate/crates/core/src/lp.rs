//! Dense bounded-variable primal simplex.
//!
//! Problems are `min cᵀx  s.t.  A x = b,  lo ≤ x ≤ hi` with infinite bounds
//! allowed. Bounds are handled natively: a nonbasic variable sits at its lower
//! bound, its upper bound, or at zero when it is free. Phase 1 adds one
//! artificial column per row (skipped for rows that already have a feasible
//! singleton column, e.g. a slack).

use std::cell::RefCell;

use crate::error::{Error, Result};
use crate::linalg::{Lu, Matrix};

const FEAS_TOL: f64 = 1e-8;
const PIVOT_TOL: f64 = 1e-10;
const OPT_TOL: f64 = 1e-9;
/// Minimum |entry| accepted when pivoting an artificial out of the basis.
const DRIVE_OUT_TOL: f64 = 1e-7;
const REPRICE_EVERY: usize = 64;

#[derive(Clone, Debug)]
pub struct LpProblem {
    pub c: Vec<f64>,
    pub a_eq: Matrix,
    pub b_eq: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl LpProblem {
    pub fn new(
        c: Vec<f64>,
        a_eq: Matrix,
        b_eq: Vec<f64>,
        lower: Vec<f64>,
        upper: Vec<f64>,
    ) -> Result<Self> {
        let n = a_eq.cols();
        if c.len() != n || lower.len() != n || upper.len() != n || b_eq.len() != a_eq.rows() {
            return Err(Error::Shape(format!(
                "lp with {} rows, {} columns: c {}, b {}, bounds {}/{}",
                a_eq.rows(),
                n,
                c.len(),
                b_eq.len(),
                lower.len(),
                upper.len()
            )));
        }
        if b_eq.iter().any(|v| !v.is_finite()) || !a_eq.is_finite() {
            return Err(Error::Invalid("lp data must be finite".into()));
        }
        if lower.iter().zip(&upper).any(|(l, h)| l > h || l.is_nan() || h.is_nan()) {
            return Err(Error::Invalid("lp bounds must satisfy lo <= hi".into()));
        }
        Ok(Self {
            c,
            a_eq,
            b_eq,
            lower,
            upper,
        })
    }

    pub fn n_vars(&self) -> usize {
        self.a_eq.cols()
    }

    pub fn n_rows(&self) -> usize {
        self.a_eq.rows()
    }

    /// Max violation of `Ax = b` and the bounds at `x`.
    pub fn primal_residual(&self, x: &[f64]) -> f64 {
        let ax = self.a_eq.matvec(x);
        let eq = ax
            .iter()
            .zip(&self.b_eq)
            .map(|(l, r)| (l - r).abs())
            .fold(0.0, f64::max);
        let bnd = x
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(&v, (&l, &h))| (l - v).max(v - h).max(0.0))
            .fold(0.0, f64::max);
        eq.max(bnd)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarState {
    Basic,
    AtLower,
    AtUpper,
    /// Nonbasic free variable held at zero.
    AtZero,
}

/// Final basis of a solve, enough to restart the simplex on the same
/// constraint system. Indices `>= n_vars` refer to artificial columns left in
/// the basis on redundant rows.
#[derive(Clone, Debug, PartialEq)]
pub struct WarmStart {
    pub basic: Vec<usize>,
    pub states: Vec<VarState>,
    art_sign: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub status: LpStatus,
    pub objective_value: f64,
    pub point: Vec<f64>,
    pub basis: Option<WarmStart>,
    /// Set when `resolve_negated` could not use the supplied basis.
    pub warm_fallback: bool,
    pub pivots: usize,
}

impl LpSolution {
    fn without_point(status: LpStatus, pivots: usize) -> Self {
        let objective_value = match status {
            LpStatus::Unbounded => f64::NEG_INFINITY,
            _ => f64::NAN,
        };
        Self {
            status,
            objective_value,
            point: Vec::new(),
            basis: None,
            warm_fallback: false,
            pivots,
        }
    }
}

enum Outcome {
    Optimal,
    Unbounded,
}

/// Reusable solver state. Holds the tableau of the last solve so that a
/// following `resolve_negated` on the same constraints skips refactoring.
#[derive(Default)]
pub struct SimplexSolver {
    m: usize,
    n: usize,
    nc: usize,
    tab: Vec<f64>,
    x: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    cost: Vec<f64>,
    dj: Vec<f64>,
    state: Vec<VarState>,
    basic: Vec<usize>,
    art_sign: Vec<f64>,
    pivots: usize,
    pivot_cap: usize,
    cached: Option<(Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>)>,
}

thread_local! {
    static SOLVER: RefCell<SimplexSolver> = RefCell::new(SimplexSolver::default());
}

/// Runs `f` with this thread's solver instance.
pub fn with_solver<R>(f: impl FnOnce(&mut SimplexSolver) -> R) -> R {
    SOLVER.with(|s| f(&mut s.borrow_mut()))
}

/// Solves on the thread-local solver.
pub fn solve(p: &LpProblem) -> Result<LpSolution> {
    with_solver(|s| s.solve(p))
}

impl SimplexSolver {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn solve(&mut self, p: &LpProblem) -> Result<LpSolution> {
        self.cold(p, &p.c, false)
    }

    /// Solves `min −cᵀx` over the constraints of `p`, starting from `warm`
    /// (typically the final basis of `solve(p)`).
    pub fn resolve_negated(&mut self, p: &LpProblem, warm: &WarmStart) -> Result<LpSolution> {
        let neg: Vec<f64> = p.c.iter().map(|v| -v).collect();
        if self.cache_matches(p) && self.basic == warm.basic && self.state == warm.states {
            self.pivots = 0;
            return self.phase_two(p, &neg, false);
        }
        if self.load_basis(p, warm)? {
            return self.phase_two(p, &neg, false);
        }
        self.cold(p, &neg, true)
    }

    fn cache_matches(&self, p: &LpProblem) -> bool {
        match &self.cached {
            Some((a, b, lo, hi)) => {
                a.as_slice() == p.a_eq.as_slice()
                    && b == &p.b_eq
                    && lo == &p.lower
                    && hi == &p.upper
            }
            None => false,
        }
    }

    fn reset_dims(&mut self, p: &LpProblem) {
        self.m = p.n_rows();
        self.n = p.n_vars();
        self.nc = self.n + self.m;
        self.tab.clear();
        self.tab.resize(self.m * self.nc, 0.0);
        self.lo.clear();
        self.lo.extend_from_slice(&p.lower);
        self.lo.resize(self.nc, 0.0);
        self.hi.clear();
        self.hi.extend_from_slice(&p.upper);
        self.hi.resize(self.nc, f64::INFINITY);
        self.x.clear();
        self.x.resize(self.nc, 0.0);
        self.cost.clear();
        self.cost.resize(self.nc, 0.0);
        self.dj.clear();
        self.dj.resize(self.nc, 0.0);
        self.state.clear();
        self.state.resize(self.nc, VarState::AtLower);
        self.basic.clear();
        self.art_sign.clear();
        self.art_sign.resize(self.m, 1.0);
        self.pivots = 0;
        self.pivot_cap = 50 * (self.m + self.nc) + 1000;
        self.cached = None;
    }

    fn nonbasic_start(&self, j: usize) -> (VarState, f64) {
        let (l, h) = (self.lo[j], self.hi[j]);
        if l.is_finite() {
            (VarState::AtLower, l)
        } else if h.is_finite() {
            (VarState::AtUpper, h)
        } else {
            (VarState::AtZero, 0.0)
        }
    }

    fn cold(&mut self, p: &LpProblem, cost: &[f64], fallback: bool) -> Result<LpSolution> {
        self.reset_dims(p);
        let (m, n, nc) = (self.m, self.n, self.nc);
        for j in 0..n {
            let (s, v) = self.nonbasic_start(j);
            self.state[j] = s;
            self.x[j] = v;
        }
        let ax = p.a_eq.matvec(&self.x[..n]);
        let resid: Vec<f64> = p.b_eq.iter().zip(&ax).map(|(b, a)| b - a).collect();

        // Crash: a singleton column that can absorb its row's residual within
        // bounds becomes basic and that row needs no artificial.
        let mut row_basic: Vec<Option<usize>> = vec![None; m];
        for j in 0..n {
            let mut hit = None;
            let mut count = 0;
            for i in 0..m {
                if p.a_eq[(i, j)] != 0.0 {
                    count += 1;
                    hit = Some(i);
                }
            }
            let (Some(i), 1) = (hit, count) else { continue };
            if row_basic[i].is_some() {
                continue;
            }
            let v = self.x[j] + resid[i] / p.a_eq[(i, j)];
            if v >= self.lo[j] - FEAS_TOL && v <= self.hi[j] + FEAS_TOL {
                row_basic[i] = Some(j);
                self.x[j] = v.clamp(self.lo[j], self.hi[j]);
            }
        }

        self.basic = vec![0; m];
        for i in 0..m {
            let art = n + i;
            let diag = match row_basic[i] {
                Some(j) => {
                    self.hi[art] = 0.0;
                    self.state[art] = VarState::AtLower;
                    self.basic[i] = j;
                    self.state[j] = VarState::Basic;
                    p.a_eq[(i, j)]
                }
                None => {
                    let s = if resid[i] < 0.0 { -1.0 } else { 1.0 };
                    self.art_sign[i] = s;
                    self.basic[i] = art;
                    self.state[art] = VarState::Basic;
                    self.x[art] = resid[i].abs();
                    s
                }
            };
            let row = &mut self.tab[i * nc..(i + 1) * nc];
            row[..n].copy_from_slice(p.a_eq.row(i));
            row[n + i] = self.art_sign[i];
            for v in row.iter_mut() {
                *v /= diag;
            }
        }

        let needs_phase_one = row_basic.iter().any(|r| r.is_none());
        if needs_phase_one {
            for j in 0..nc {
                self.cost[j] = if j >= n && self.hi[j] > 0.0 { 1.0 } else { 0.0 };
            }
            self.reprice();
            // Phase 1 is bounded below by zero.
            self.iterate()?;
            let infeas: f64 = (n..nc).map(|j| self.x[j].max(0.0)).sum();
            let scale = 1.0 + p.b_eq.iter().fold(0.0f64, |a, b| a.max(b.abs()));
            if infeas > FEAS_TOL * scale {
                return Ok(LpSolution {
                    warm_fallback: fallback,
                    ..LpSolution::without_point(LpStatus::Infeasible, self.pivots)
                });
            }
            self.drive_out_artificials();
        }
        for j in n..nc {
            self.hi[j] = 0.0;
            self.x[j] = 0.0;
        }
        self.phase_two(p, cost, fallback)
    }

    fn drive_out_artificials(&mut self) {
        let (m, n, nc) = (self.m, self.n, self.nc);
        for r in 0..m {
            if self.basic[r] < n {
                continue;
            }
            let row = &self.tab[r * nc..r * nc + n];
            let best = (0..n)
                .filter(|&j| self.state[j] != VarState::Basic)
                .max_by(|&a, &b| row[a].abs().total_cmp(&row[b].abs()));
            if let Some(j) = best {
                if row[j].abs() > DRIVE_OUT_TOL {
                    let art = self.basic[r];
                    self.x[art] = 0.0;
                    self.state[art] = VarState::AtLower;
                    self.pivot(r, j);
                    self.basic[r] = j;
                    self.state[j] = VarState::Basic;
                }
            }
            // Otherwise the row is redundant; the artificial stays basic at 0.
        }
    }

    fn phase_two(&mut self, p: &LpProblem, cost: &[f64], fallback: bool) -> Result<LpSolution> {
        let n = self.n;
        self.cost[..n].copy_from_slice(cost);
        for c in &mut self.cost[n..] {
            *c = 0.0;
        }
        self.reprice();
        let outcome = self.iterate()?;
        self.cached = Some((
            p.a_eq.as_slice().to_vec(),
            p.b_eq.clone(),
            p.lower.clone(),
            p.upper.clone(),
        ));
        if let Outcome::Unbounded = outcome {
            return Ok(LpSolution {
                warm_fallback: fallback,
                ..LpSolution::without_point(LpStatus::Unbounded, self.pivots)
            });
        }
        self.refine(p);
        let point = self.x[..n].to_vec();
        let objective_value = cost.iter().zip(&point).map(|(c, x)| c * x).sum();
        Ok(LpSolution {
            status: LpStatus::Optimal,
            objective_value,
            point,
            basis: Some(WarmStart {
                basic: self.basic.clone(),
                states: self.state.clone(),
                art_sign: self.art_sign.clone(),
            }),
            warm_fallback: fallback,
            pivots: self.pivots,
        })
    }

    fn reprice(&mut self) {
        let nc = self.nc;
        self.dj.copy_from_slice(&self.cost);
        for (i, &b) in self.basic.iter().enumerate() {
            let cb = self.cost[b];
            if cb != 0.0 {
                let row = &self.tab[i * nc..(i + 1) * nc];
                for (d, t) in self.dj.iter_mut().zip(row) {
                    *d -= cb * t;
                }
            }
        }
        for &b in &self.basic {
            self.dj[b] = 0.0;
        }
    }

    fn choose_entering(&self, bland: bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64, f64)> = None;
        for j in 0..self.nc {
            if self.lo[j] == self.hi[j] {
                continue;
            }
            let d = self.dj[j];
            let dir = match self.state[j] {
                VarState::Basic => continue,
                VarState::AtLower if d < -OPT_TOL => 1.0,
                VarState::AtUpper if d > OPT_TOL => -1.0,
                VarState::AtZero if d.abs() > OPT_TOL => -d.signum(),
                _ => continue,
            };
            if bland {
                return Some((j, dir));
            }
            if best.is_none_or(|(_, _, s)| d.abs() > s) {
                best = Some((j, dir, d.abs()));
            }
        }
        best.map(|(j, dir, _)| (j, dir))
    }

    fn iterate(&mut self) -> Result<Outcome> {
        let (m, nc) = (self.m, self.nc);
        let bland_after = 5 * (m + nc);
        let mut local = 0usize;
        loop {
            let bland = local >= bland_after;
            let Some((j, dir)) = self.choose_entering(bland) else {
                return Ok(Outcome::Optimal);
            };

            let mut theta = self.hi[j] - self.lo[j];
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..m {
                let a = self.tab[i * nc + j];
                if a.abs() <= PIVOT_TOL {
                    continue;
                }
                let rate = -dir * a;
                let b = self.basic[i];
                let xb = self.x[b];
                let lim = if rate < 0.0 {
                    if !self.lo[b].is_finite() {
                        continue;
                    }
                    (xb - self.lo[b]) / -rate
                } else {
                    if !self.hi[b].is_finite() {
                        continue;
                    }
                    (self.hi[b] - xb) / rate
                };
                let lim = lim.max(0.0);
                let take = match leave {
                    None => lim < theta,
                    Some((r, _)) => {
                        if lim < theta - 1e-12 {
                            true
                        } else if lim <= theta + 1e-12 {
                            if bland {
                                b < self.basic[r]
                            } else {
                                a.abs() > self.tab[r * nc + j].abs()
                            }
                        } else {
                            false
                        }
                    }
                };
                if take {
                    theta = lim;
                    leave = Some((i, rate));
                }
            }
            if !theta.is_finite() {
                return Ok(Outcome::Unbounded);
            }

            for i in 0..m {
                let a = self.tab[i * nc + j];
                if a != 0.0 {
                    self.x[self.basic[i]] -= dir * a * theta;
                }
            }
            self.x[j] += dir * theta;

            match leave {
                None => {
                    if dir > 0.0 {
                        self.state[j] = VarState::AtUpper;
                        self.x[j] = self.hi[j];
                    } else {
                        self.state[j] = VarState::AtLower;
                        self.x[j] = self.lo[j];
                    }
                }
                Some((r, rate)) => {
                    let b = self.basic[r];
                    if rate < 0.0 {
                        self.state[b] = VarState::AtLower;
                        self.x[b] = self.lo[b];
                    } else {
                        self.state[b] = VarState::AtUpper;
                        self.x[b] = self.hi[b];
                    }
                    self.pivot(r, j);
                    self.basic[r] = j;
                    self.state[j] = VarState::Basic;
                }
            }

            self.pivots += 1;
            local += 1;
            if local % REPRICE_EVERY == 0 {
                self.reprice();
            }
            if self.pivots > self.pivot_cap {
                return Err(Error::Numeric(format!(
                    "simplex exceeded {} pivots",
                    self.pivot_cap
                )));
            }
        }
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let nc = self.nc;
        let piv = self.tab[r * nc + j];
        {
            let row = &mut self.tab[r * nc..(r + 1) * nc];
            for v in row.iter_mut() {
                *v /= piv;
            }
            row[j] = 1.0;
        }
        let (before, rest) = self.tab.split_at_mut(r * nc);
        let (prow, after) = rest.split_at_mut(nc);
        for row in before.chunks_mut(nc).chain(after.chunks_mut(nc)) {
            let f = row[j];
            if f != 0.0 {
                for (v, p) in row.iter_mut().zip(prow.iter()) {
                    *v -= f * p;
                }
                row[j] = 0.0;
            }
        }
        let f = self.dj[j];
        if f != 0.0 {
            for (d, p) in self.dj.iter_mut().zip(prow.iter()) {
                *d -= f * p;
            }
            self.dj[j] = 0.0;
        }
    }

    fn basis_matrix(&self, p: &LpProblem, basic: &[usize], art_sign: &[f64]) -> Matrix {
        let m = self.m;
        let mut b = Matrix::zeros(m, m);
        for (k, &j) in basic.iter().enumerate() {
            if j < self.n {
                for i in 0..m {
                    b[(i, k)] = p.a_eq[(i, j)];
                }
            } else {
                b[(j - self.n, k)] = art_sign[j - self.n];
            }
        }
        b
    }

    fn nonbasic_rhs(&self, p: &LpProblem) -> Vec<f64> {
        let mut rhs = p.b_eq.clone();
        for j in 0..self.n {
            if self.state[j] != VarState::Basic && self.x[j] != 0.0 {
                for (i, r) in rhs.iter_mut().enumerate() {
                    *r -= p.a_eq[(i, j)] * self.x[j];
                }
            }
        }
        rhs
    }

    /// Recomputes basic values from the original data to shed accumulated
    /// tableau round-off.
    fn refine(&mut self, p: &LpProblem) {
        if self.m == 0 {
            return;
        }
        let b = self.basis_matrix(p, &self.basic, &self.art_sign);
        let Ok(lu) = Lu::new(&b) else { return };
        if lu.is_singular() {
            return;
        }
        let Ok(xb) = lu.solve(&self.nonbasic_rhs(p)) else {
            return;
        };
        for (k, &j) in self.basic.iter().enumerate() {
            // Snap tiny bound overshoot from round-off back into the box.
            self.x[j] = if xb[k] < self.lo[j] && xb[k] > self.lo[j] - FEAS_TOL {
                self.lo[j]
            } else if xb[k] > self.hi[j] && xb[k] < self.hi[j] + FEAS_TOL {
                self.hi[j]
            } else {
                xb[k]
            };
        }
    }

    /// Rebuilds the tableau for `warm` from scratch. Returns false if the
    /// basis is singular or not primal feasible for `p`.
    fn load_basis(&mut self, p: &LpProblem, warm: &WarmStart) -> Result<bool> {
        let (m, n) = (p.n_rows(), p.n_vars());
        if warm.basic.len() != m || warm.states.len() != n + m || warm.art_sign.len() != m {
            return Ok(false);
        }
        self.reset_dims(p);
        let nc = self.nc;
        for j in n..nc {
            self.hi[j] = 0.0;
        }
        self.art_sign.copy_from_slice(&warm.art_sign);
        self.basic = warm.basic.clone();
        for j in 0..nc {
            self.state[j] = warm.states[j];
            self.x[j] = match warm.states[j] {
                VarState::AtLower => self.lo[j],
                VarState::AtUpper => self.hi[j],
                VarState::AtZero | VarState::Basic => 0.0,
            };
            if !self.x[j].is_finite() {
                return Ok(false);
            }
        }
        if m == 0 {
            return Ok(true);
        }
        let b = self.basis_matrix(p, &self.basic, &self.art_sign);
        let lu = Lu::new(&b)?;
        if lu.is_singular() {
            return Ok(false);
        }
        let mut col = vec![0.0; m];
        for j in 0..nc {
            if j < n {
                for (i, c) in col.iter_mut().enumerate() {
                    *c = p.a_eq[(i, j)];
                }
            } else {
                col.iter_mut().for_each(|c| *c = 0.0);
                col[j - n] = self.art_sign[j - n];
            }
            let t = lu.solve(&col)?;
            for i in 0..m {
                self.tab[i * nc + j] = t[i];
            }
        }
        let xb = lu.solve(&self.nonbasic_rhs(p))?;
        for (k, &j) in self.basic.iter().enumerate() {
            if xb[k] < self.lo[j] - FEAS_TOL || xb[k] > self.hi[j] + FEAS_TOL {
                return Ok(false);
            }
            self.x[j] = xb[k];
        }
        Ok(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lp(c: &[f64], a: &[Vec<f64>], b: &[f64], lo: &[f64], hi: &[f64]) -> LpProblem {
        let a = if a.is_empty() {
            Matrix::zeros(0, c.len())
        } else {
            Matrix::from_rows(a).unwrap()
        };
        LpProblem::new(c.to_vec(), a, b.to_vec(), lo.to_vec(), hi.to_vec()).unwrap()
    }

    #[test]
    fn box_only() {
        let p = lp(&[-1.0], &[], &[], &[0.0], &[1.0]);
        let s = SimplexSolver::new().solve(&p).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert_eq!(s.objective_value, -1.0);
        assert_eq!(s.point, vec![1.0]);
    }

    #[test]
    fn infeasible_zero_row() {
        let p = lp(&[0.0], &[vec![0.0]], &[1.0], &[f64::NEG_INFINITY], &[f64::INFINITY]);
        let s = SimplexSolver::new().solve(&p).unwrap();
        assert_eq!(s.status, LpStatus::Infeasible);
    }

    #[test]
    fn two_variable_equality() {
        let p = lp(&[1.0, 1.0], &[vec![1.0, 2.0]], &[2.0], &[0.0, 0.0], &[3.0, 3.0]);
        let s = SimplexSolver::new().solve(&p).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective_value - 1.0).abs() < 1e-12);
        assert!((s.point[0]).abs() < 1e-12 && (s.point[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unbounded_ray() {
        let p = lp(
            &[-1.0, 0.0],
            &[vec![1.0, -1.0]],
            &[0.0],
            &[0.0, 0.0],
            &[f64::INFINITY, f64::INFINITY],
        );
        let s = SimplexSolver::new().solve(&p).unwrap();
        assert_eq!(s.status, LpStatus::Unbounded);
    }

    #[test]
    fn free_variables_and_redundant_rows() {
        // x + y = 1 stated twice, x - y free; min x
        let p = lp(
            &[1.0, 0.0],
            &[vec![1.0, 1.0], vec![2.0, 2.0]],
            &[1.0, 2.0],
            &[f64::NEG_INFINITY, 0.0],
            &[f64::INFINITY, 4.0],
        );
        let s = SimplexSolver::new().solve(&p).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective_value + 3.0).abs() < 1e-9, "{}", s.objective_value);
        assert!(p.primal_residual(&s.point) < 1e-9);
    }

    /// Square boundary pair: min/max α with p + α v ∈ G[−1,1]^k.
    fn boundary_lp(g: &Matrix, p: &[f64], v: &[f64]) -> LpProblem {
        let (d, k) = (g.rows(), g.cols());
        let mut a = Matrix::zeros(d, k + 1);
        for i in 0..d {
            for j in 0..k {
                a[(i, j)] = g[(i, j)];
            }
            a[(i, k)] = -v[i];
        }
        let mut c = vec![0.0; k + 1];
        c[k] = 1.0;
        let mut lo = vec![-1.0; k + 1];
        let mut hi = vec![1.0; k + 1];
        lo[k] = f64::NEG_INFINITY;
        hi[k] = f64::INFINITY;
        LpProblem::new(c, a, p.to_vec(), lo, hi).unwrap()
    }

    #[test]
    fn warm_boundary_pair_on_square() {
        let mut s = SimplexSolver::new();
        for (g, v) in [
            (Matrix::identity(2), vec![1.0, 0.0]),
            (Matrix::identity(2), vec![1.0, 1.0]),
        ] {
            let p = boundary_lp(&g, &[0.0, 0.0], &v);
            let lo = s.solve(&p).unwrap();
            assert!((lo.objective_value + 1.0).abs() < 1e-12);
            let hi = s.resolve_negated(&p, lo.basis.as_ref().unwrap()).unwrap();
            assert!(!hi.warm_fallback);
            assert!((hi.point[2] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn warm_basis_rebuilt_on_fresh_solver() {
        let g = Matrix::from_rows(&[vec![1.0, 1.0, 0.5], vec![0.0, 1.0, -1.0]]).unwrap();
        let p = boundary_lp(&g, &[0.1, 0.2], &[0.6, 0.8]);
        let lo = SimplexSolver::new().solve(&p).unwrap();
        let mut other = SimplexSolver::new();
        let hi = other.resolve_negated(&p, lo.basis.as_ref().unwrap()).unwrap();
        assert!(!hi.warm_fallback);
        let mut neg = p.clone();
        neg.c.iter_mut().for_each(|c| *c = -*c);
        let cold = SimplexSolver::new().solve(&neg).unwrap();
        assert!((hi.objective_value - cold.objective_value).abs() < 1e-10);
    }

    #[test]
    fn stale_basis_falls_back() {
        let g = Matrix::identity(2);
        let p = boundary_lp(&g, &[0.0, 0.0], &[1.0, 0.0]);
        let lo = SimplexSolver::new().solve(&p).unwrap();
        // A different right-hand side makes the old basis infeasible.
        let q = boundary_lp(&g, &[0.0, 0.9], &[1.0, 0.3]);
        let mut s = SimplexSolver::new();
        let hi = s.resolve_negated(&q, lo.basis.as_ref().unwrap()).unwrap();
        let mut neg = q.clone();
        neg.c.iter_mut().for_each(|c| *c = -*c);
        let cold = SimplexSolver::new().solve(&neg).unwrap();
        assert!((hi.objective_value - cold.objective_value).abs() < 1e-10);
        assert!(hi.warm_fallback || (hi.objective_value - cold.objective_value).abs() < 1e-12);
    }

    /// Enumerate basic feasible solutions of `min cᵀx, aᵀx = b, lo ≤ x ≤ hi`
    /// with one equality row: one variable basic, the rest at a bound.
    fn brute_force(c: &[f64], a: &[f64], b: f64, lo: &[f64], hi: &[f64]) -> Option<f64> {
        let n = c.len();
        let mut best: Option<f64> = None;
        for basic in 0..n {
            if a[basic].abs() < 1e-12 {
                continue;
            }
            for mask in 0u32..(1 << n) {
                if mask & (1 << basic) != 0 {
                    continue;
                }
                let mut x: Vec<f64> = (0..n)
                    .map(|j| if mask & (1 << j) != 0 { hi[j] } else { lo[j] })
                    .collect();
                let rest: f64 = (0..n).filter(|&j| j != basic).map(|j| a[j] * x[j]).sum();
                x[basic] = (b - rest) / a[basic];
                if x[basic] < lo[basic] - 1e-12 || x[basic] > hi[basic] + 1e-12 {
                    continue;
                }
                let v: f64 = c.iter().zip(&x).map(|(c, x)| c * x).sum();
                if best.is_none_or(|bv| v < bv) {
                    best = Some(v);
                }
            }
        }
        best
    }

    /// Reduced costs from an independent basis solve; checks no improving
    /// single pivot exists.
    fn certify_local_optimality(p: &LpProblem, ws: &WarmStart) {
        let (m, n) = (p.n_rows(), p.n_vars());
        let cols: Vec<Vec<f64>> = ws
            .basic
            .iter()
            .map(|&j| {
                if j < n {
                    p.a_eq.col(j)
                } else {
                    let mut e = vec![0.0; m];
                    e[j - n] = ws.art_sign[j - n];
                    e
                }
            })
            .collect();
        let bt = Matrix::from_cols(&cols).unwrap().transpose();
        let cb: Vec<f64> = ws
            .basic
            .iter()
            .map(|&j| if j < n { p.c[j] } else { 0.0 })
            .collect();
        let y = Lu::new(&bt).unwrap().solve(&cb).unwrap();
        for j in 0..n {
            let d = p.c[j] - crate::linalg::dot(&p.a_eq.col(j), &y);
            match ws.states[j] {
                VarState::AtLower if p.lower[j] < p.upper[j] => assert!(d >= -1e-8, "d{j}={d}"),
                VarState::AtUpper if p.lower[j] < p.upper[j] => assert!(d <= 1e-8, "d{j}={d}"),
                VarState::AtZero => assert!(d.abs() <= 1e-8),
                _ => {}
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(400))]
        #[test]
        fn matches_bfs_enumeration(
            n in 1usize..=6,
            seed in proptest::collection::vec(-5i32..=5, 30),
        ) {
            let c: Vec<f64> = (0..n).map(|j| seed[j] as f64).collect();
            let a: Vec<f64> = (0..n).map(|j| seed[6 + j] as f64).collect();
            let lo: Vec<f64> = (0..n).map(|j| (seed[12 + j] as f64) * 0.5 - 1.0).collect();
            let hi: Vec<f64> = (0..n).map(|j| lo[j] + (seed[18 + j].unsigned_abs() as f64) * 0.5).collect();
            let b = seed[24] as f64 * 0.75;
            let p = lp(&c, std::slice::from_ref(&a), &[b], &lo, &hi);
            let s = SimplexSolver::new().solve(&p).unwrap();
            match brute_force(&c, &a, b, &lo, &hi) {
                Some(v) => {
                    prop_assert_eq!(s.status, LpStatus::Optimal);
                    prop_assert!((s.objective_value - v).abs() <= 1e-8, "{} vs {}", s.objective_value, v);
                    prop_assert!(p.primal_residual(&s.point) <= 1e-8);
                    certify_local_optimality(&p, s.basis.as_ref().unwrap());
                }
                None => {
                    // With a zero row the enumeration has no basic column but
                    // the system may still be feasible (b = 0).
                    if a.iter().any(|v| *v != 0.0) || b != 0.0 {
                        prop_assert_eq!(s.status, LpStatus::Infeasible);
                    }
                }
            }
        }
    }
}
