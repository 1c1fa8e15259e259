use super::{check_dim, check_direction, ConvexBody};
use crate::error::{Error, Result};
use crate::linalg::{cholesky, dot, inverse, svd, Matrix};
use crate::lp::{self, LpProblem, LpStatus};

pub(crate) const KHACHIYAN_TOL: f64 = 0.01;
const KHACHIYAN_MAX_ITER: usize = 100_000;
/// Separation values at or below this count as "no separating hyperplane".
const SEPARATION_TOL: f64 = 1e-9;

/// Convex hull of the rows of `vertices`.
#[derive(Clone, Debug, PartialEq)]
pub struct VPolytope {
    vertices: Matrix,
}

/// `{x : (x − c)ᵀ E (x − c) ≤ 1}`.
#[derive(Clone, Debug)]
pub struct Ellipsoid {
    pub shape: Matrix,
    pub center: Vec<f64>,
}

impl Ellipsoid {
    pub fn value(&self, x: &[f64]) -> f64 {
        let w: Vec<f64> = x.iter().zip(&self.center).map(|(a, b)| a - b).collect();
        dot(&w, &self.shape.matvec(&w))
    }
}

impl VPolytope {
    pub fn new(vertices: Matrix) -> Result<Self> {
        let (n, d) = (vertices.rows(), vertices.cols());
        if d == 0 {
            return Err(Error::Invalid("zero-dimensional V-polytope".into()));
        }
        if !vertices.is_finite() {
            return Err(Error::Invalid("non-finite vertex".into()));
        }
        if n < d + 1 {
            return Err(Error::Invalid(format!("{n} vertices cannot span R^{d}")));
        }
        let base = vertices.row(0).to_vec();
        let diffs: Vec<Vec<f64>> = vertices
            .row_iter()
            .skip(1)
            .map(|r| r.iter().zip(&base).map(|(a, b)| a - b).collect())
            .collect();
        let rank = svd(&Matrix::from_rows(&diffs)?)?.numeric_rank();
        if rank < d {
            return Err(Error::Rank {
                expected: d,
                found: rank,
            });
        }
        Ok(Self { vertices })
    }

    pub fn dim(&self) -> usize {
        self.vertices.cols()
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.rows()
    }

    pub fn vertices(&self) -> &Matrix {
        &self.vertices
    }

    /// Separating-hyperplane LP: `max zᵀx₀ − z₀` subject to `zᵀvᵢ ≤ z₀` for
    /// every vertex and `zᵀx₀ − z₀ ≤ 1`. Returns the optimum, which is 0 when
    /// `x₀` lies in the hull and 1 otherwise.
    pub fn separation_value(&self, x0: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x0)?;
        let (n, d) = (self.num_vertices(), self.dim());
        let cols = d + 1 + n + 1;
        let mut a = Matrix::zeros(n + 1, cols);
        for i in 0..=n {
            let src = if i < n { self.vertices.row(i) } else { x0 };
            let row = a.row_mut(i);
            row[..d].copy_from_slice(src);
            row[d] = -1.0;
            row[d + 1 + i] = 1.0;
        }
        let mut b = vec![0.0; n + 1];
        b[n] = 1.0;
        let mut c = vec![0.0; cols];
        for (cj, x) in c.iter_mut().zip(x0) {
            *cj = -x;
        }
        c[d] = 1.0;
        let mut lower = vec![0.0; cols];
        lower[..=d].fill(f64::NEG_INFINITY);
        let upper = vec![f64::INFINITY; cols];
        let sol = lp::solve(&LpProblem::new(c, a, b, lower, upper)?)?;
        match sol.status {
            LpStatus::Optimal => Ok(-sol.objective_value),
            s => Err(Error::Numeric(format!("membership LP returned {s:?}"))),
        }
    }

    /// (1+tol)-approximate minimum-volume enclosing ellipsoid of the vertices
    /// by Khachiyan's barycentric coordinate ascent.
    pub fn enclosing_ellipsoid(&self, tol: f64) -> Result<Ellipsoid> {
        let (n, d) = (self.num_vertices(), self.dim());
        let lifted: Vec<Vec<f64>> = self
            .vertices
            .row_iter()
            .map(|r| {
                let mut q = r.to_vec();
                q.push(1.0);
                q
            })
            .collect();
        let mut u = vec![1.0 / n as f64; n];
        let target = 1.0 + d as f64 * (1.0 + tol);
        let mut converged = false;
        for _ in 0..KHACHIYAN_MAX_ITER {
            let mut x = Matrix::zeros(d + 1, d + 1);
            for (q, &w) in lifted.iter().zip(&u) {
                for i in 0..=d {
                    for j in 0..=d {
                        x[(i, j)] += w * q[i] * q[j];
                    }
                }
            }
            let xinv = inverse(&x).map_err(|_| Error::Rank {
                expected: d,
                found: d.saturating_sub(1),
            })?;
            let (j, mj) = lifted
                .iter()
                .map(|q| dot(q, &xinv.matvec(q)))
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |a, (i, m)| if m > a.1 { (i, m) } else { a });
            // (v − c)ᵀ S⁻¹ (v − c) = M − 1 for the weighted scatter S.
            if mj <= target {
                converged = true;
                break;
            }
            let step = (mj - d as f64 - 1.0) / ((d as f64 + 1.0) * (mj - 1.0));
            for w in u.iter_mut() {
                *w *= 1.0 - step;
            }
            u[j] += step;
        }
        if !converged {
            return Err(Error::Numeric(format!(
                "enclosing ellipsoid did not reach tolerance {tol} in {KHACHIYAN_MAX_ITER} iterations"
            )));
        }

        let mut center = vec![0.0; d];
        for (r, &w) in self.vertices.row_iter().zip(&u) {
            for (c, x) in center.iter_mut().zip(r) {
                *c += w * x;
            }
        }
        let mut scatter = Matrix::zeros(d, d);
        for (r, &w) in self.vertices.row_iter().zip(&u) {
            for i in 0..d {
                for j in 0..d {
                    scatter[(i, j)] += w * (r[i] - center[i]) * (r[j] - center[j]);
                }
            }
        }
        let shape = inverse(&scatter)?.scale(1.0 / d as f64);
        Ok(Ellipsoid { shape, center })
    }

    /// Maps the enclosing ellipsoid to the unit ball. Returns the image and
    /// `log |det T|` of the map, so `vol(P) = vol(image) / exp(log_det)`.
    pub fn round(&self) -> Result<(VPolytope, f64)> {
        let e = self.enclosing_ellipsoid(KHACHIYAN_TOL)?;
        let l = cholesky(&e.shape)?;
        let d = self.dim();
        let log_det = (0..d).map(|i| l[(i, i)].ln()).sum();
        let lt = l.transpose();
        let rows: Vec<Vec<f64>> = self
            .vertices
            .row_iter()
            .map(|r| {
                let w: Vec<f64> = r.iter().zip(&e.center).map(|(a, b)| a - b).collect();
                lt.matvec(&w)
            })
            .collect();
        Ok((VPolytope::new(Matrix::from_rows(&rows)?)?, log_det))
    }

    fn boundary_problem(&self, p: &[f64], v: &[f64]) -> Result<LpProblem> {
        let (n, d) = (self.num_vertices(), self.dim());
        let mut a = Matrix::zeros(d + 1, n + 1);
        for (j, r) in self.vertices.row_iter().enumerate() {
            for i in 0..d {
                a[(i, j)] = r[i];
            }
            a[(d, j)] = 1.0;
        }
        for i in 0..d {
            a[(i, n)] = -v[i];
        }
        let mut b = p.to_vec();
        b.push(1.0);
        let mut c = vec![0.0; n + 1];
        c[n] = 1.0;
        let mut lower = vec![0.0; n + 1];
        let mut upper = vec![1.0; n + 1];
        lower[n] = f64::NEG_INFINITY;
        upper[n] = f64::INFINITY;
        LpProblem::new(c, a, b, lower, upper)
    }
}

/// Solves the min-α / max-α pair on the thread's solver, warm-starting the
/// second from the first.
pub(crate) fn boundary_pair(problem: &LpProblem, alpha: usize) -> Result<(f64, f64)> {
    lp::with_solver(|s| {
        let lo = s.solve(problem)?;
        match lo.status {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => {
                return Err(Error::Precondition("chord base point outside the body".into()))
            }
            LpStatus::Unbounded => return Err(Error::Numeric("unbounded chord".into())),
        }
        let hi = s.resolve_negated(problem, lo.basis.as_ref().expect("optimal has basis"))?;
        if hi.status != LpStatus::Optimal {
            return Err(Error::Numeric(format!("upper chord LP returned {:?}", hi.status)));
        }
        let (t_lo, t_hi) = (lo.point[alpha], hi.point[alpha]);
        // The LPs are feasible for any line meeting the body, so a base point
        // outside shows up as a chord not straddling zero.
        if t_lo > 1e-9 || t_hi < -1e-9 {
            return Err(Error::Precondition("chord base point outside the body".into()));
        }
        Ok((t_lo, t_hi))
    })
}

impl ConvexBody for VPolytope {
    fn dim(&self) -> usize {
        self.vertices.cols()
    }

    fn contains(&self, x: &[f64]) -> Result<bool> {
        Ok(self.separation_value(x)? <= SEPARATION_TOL)
    }

    fn line_intersection(&self, p: &[f64], v: &[f64]) -> Result<(f64, f64)> {
        check_dim(self.dim(), p)?;
        check_direction(v)?;
        boundary_pair(&self.boundary_problem(p, v)?, self.num_vertices())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;

    #[test]
    fn cross_membership() {
        let c = gen::cross(3);
        assert!(c.contains(&[0.0; 3]).unwrap());
        assert!(c.contains(&[0.2, 0.3, 0.5]).unwrap());
        assert!(!c.contains(&[0.5, 0.5, 0.5]).unwrap());
        assert!(!c.contains(&[0.34, 0.34, 0.34]).unwrap());
    }

    #[test]
    fn cube_chord() {
        let c = gen::cube_v(3);
        let (lo, hi) = c.line_intersection(&[0.0; 3], &[1.0, 0.0, 0.0]).unwrap();
        assert!((lo + 1.0).abs() < 1e-10 && (hi - 1.0).abs() < 1e-10);
        let (lo, hi) = c.line_intersection(&[0.5, 0.0, 0.0], &[1.0, 1.0, 0.0]).unwrap();
        assert!((lo + 1.0).abs() < 1e-10 && (hi - 0.5).abs() < 1e-10);
        assert!(matches!(
            c.line_intersection(&[2.0, 0.0, 0.0], &[1.0, 0.0, 0.0]),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn symmetric_ellipsoids() {
        let e = gen::cube_v(2).enclosing_ellipsoid(0.01).unwrap();
        assert!(e.center.iter().all(|c| c.abs() < 1e-12));
        assert!(e.shape.sub(&Matrix::identity(2).scale(0.5)).max_abs() < 1e-12);
        let e = gen::cross(3).enclosing_ellipsoid(0.01).unwrap();
        assert!(e.shape.sub(&Matrix::identity(3)).max_abs() < 1e-12);
    }

    #[test]
    fn degenerate_vertices_rejected() {
        let v = Matrix::from_rows(&[vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 2.0]]).unwrap();
        assert!(matches!(VPolytope::new(v), Err(Error::Rank { expected: 2, found: 1 })));
    }
}
