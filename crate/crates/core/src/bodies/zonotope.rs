use std::sync::Arc;

use super::vpolytope::boundary_pair;
use super::{check_dim, check_direction, ConvexBody, ShiftedHBody};
use crate::error::{Error, Result};
use crate::linalg::{inverse, null_space_complement, svd, Matrix};
use crate::lp::{self, LpProblem, LpStatus};

/// `G·[−1,1]^k` for a `d × k` generator matrix `G`.
#[derive(Clone, Debug, PartialEq)]
pub struct Zonotope {
    g: Matrix,
}

impl Zonotope {
    pub fn new(g: Matrix) -> Result<Self> {
        let (d, k) = (g.rows(), g.cols());
        if d == 0 {
            return Err(Error::Invalid("zero-dimensional zonotope".into()));
        }
        if !g.is_finite() {
            return Err(Error::Invalid("non-finite generator".into()));
        }
        if k < d {
            return Err(Error::Invalid(format!("{k} generators cannot span R^{d}")));
        }
        let rank = svd(&g)?.numeric_rank();
        if rank < d {
            return Err(Error::Rank {
                expected: d,
                found: rank,
            });
        }
        Ok(Self { g })
    }

    pub fn dim(&self) -> usize {
        self.g.rows()
    }

    pub fn num_generators(&self) -> usize {
        self.g.cols()
    }

    /// Generators per dimension.
    pub fn order(&self) -> f64 {
        self.num_generators() as f64 / self.dim() as f64
    }

    pub fn generators(&self) -> &Matrix {
        &self.g
    }

    /// Centrally symmetric H-body `{x : M x ≤ 1}` inside the zonotope: the
    /// section of `[−1,1]^k` by the row space of `G`, pulled back to `ℝᵈ`.
    /// Its enclosing end is set by the support function of the zonotope.
    pub fn to_hbody(&self) -> Result<ShiftedHBody> {
        let (d, k) = (self.dim(), self.num_generators());
        if k <= d {
            return Err(Error::Precondition(format!(
                "H-body template needs more generators than dimensions (k={k}, d={d})"
            )));
        }
        let gtg = self.g.transpose().matmul(&self.g)?;
        let s = svd(&gtg)?;
        let rank = s.numeric_rank();
        if rank != d {
            return Err(Error::Rank {
                expected: d,
                found: rank,
            });
        }
        // Right singular vectors of the zero singular values span ker(G).
        let kernel: Vec<usize> = (d..k).collect();
        let q = s.v.select_cols(&kernel);
        let w_perp = null_space_complement(&q)?;
        let gw = self.g.matmul(&w_perp.transpose())?;
        let gw_inv = inverse(&gw)
            .map_err(|e| Error::Numeric(format!("G·W_perpᵀ is not invertible: {e}")))?;
        let half = w_perp.transpose().matmul(&gw_inv)?;

        let scale = half.max_abs();
        let mut rows = Vec::with_capacity(2 * k);
        for r in half.row_iter() {
            // A zero generator contributes a trivial 0·x ≤ 1 row.
            if r.iter().any(|v| v.abs() > 1e-12 * scale) {
                rows.push(r.to_vec());
                rows.push(r.iter().map(|v| -v).collect());
            }
        }
        let m = Matrix::from_rows(&rows)?;
        let b0 = vec![1.0; m.rows()];
        // A row redundant in {M x ≤ 1} can have support value below 1 on the
        // zonotope; keeping its offset at 1 leaves every body of the family unchanged.
        let b_max: Vec<f64> = b_max_offsets(&m, self)?
            .into_iter()
            .map(|b| b.max(1.0))
            .collect();
        ShiftedHBody::new(Arc::new(m), Arc::new(b0.clone()), Arc::new(b0), Arc::new(b_max), 0.0)
    }

    fn boundary_problem(&self, p: &[f64], v: &[f64]) -> Result<LpProblem> {
        let (d, k) = (self.dim(), self.num_generators());
        let mut a = Matrix::zeros(d, k + 1);
        for i in 0..d {
            a.row_mut(i)[..k].copy_from_slice(self.g.row(i));
            a[(i, k)] = -v[i];
        }
        let mut c = vec![0.0; k + 1];
        c[k] = 1.0;
        let mut lower = vec![-1.0; k + 1];
        let mut upper = vec![1.0; k + 1];
        lower[k] = f64::NEG_INFINITY;
        upper[k] = f64::INFINITY;
        LpProblem::new(c, a, p.to_vec(), lower, upper)
    }
}

/// Offsets making `{x : A x ≤ b}` the tightest enclosure of `z` with the
/// facet normals of `A`: `bₗ = Σⱼ |(A G)ₗⱼ|`, the support function of `z`.
pub fn b_max_offsets(a: &Matrix, z: &Zonotope) -> Result<Vec<f64>> {
    let ag = a.matmul(z.generators())?;
    Ok(ag.row_iter().map(|r| r.iter().map(|v| v.abs()).sum()).collect())
}

impl ConvexBody for Zonotope {
    fn dim(&self) -> usize {
        self.g.rows()
    }

    /// Feasibility of `G λ = x` with `λ ∈ [−1,1]^k`.
    fn contains(&self, x: &[f64]) -> Result<bool> {
        check_dim(self.dim(), x)?;
        let k = self.num_generators();
        let problem = LpProblem::new(
            vec![0.0; k],
            self.g.clone(),
            x.to_vec(),
            vec![-1.0; k],
            vec![1.0; k],
        )?;
        let sol = lp::solve(&problem)?;
        match sol.status {
            LpStatus::Optimal => Ok(true),
            LpStatus::Infeasible => Ok(false),
            LpStatus::Unbounded => Err(Error::Numeric("bounded feasibility LP unbounded".into())),
        }
    }

    fn line_intersection(&self, p: &[f64], v: &[f64]) -> Result<(f64, f64)> {
        check_dim(self.dim(), p)?;
        check_direction(v)?;
        boundary_pair(&self.boundary_problem(p, v)?, self.num_generators())
    }
}
