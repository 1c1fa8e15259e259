use super::{check_dim, h_chord, h_contains, h_coord_chord, ConvexBody};
use crate::error::{Error, Result};
use crate::linalg::{norm, Matrix};
use crate::lp::{self, LpProblem, LpStatus};

/// `{x : A x ≤ b}`.
#[derive(Clone, Debug, PartialEq)]
pub struct HPolytope {
    a: Matrix,
    b: Vec<f64>,
}

impl HPolytope {
    pub fn new(a: Matrix, b: Vec<f64>) -> Result<Self> {
        if a.rows() != b.len() {
            return Err(Error::Shape(format!("{} facet rows but {} offsets", a.rows(), b.len())));
        }
        if a.cols() == 0 || a.rows() == 0 {
            return Err(Error::Invalid("empty H-representation".into()));
        }
        if !a.is_finite() || b.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("non-finite H-representation".into()));
        }
        if let Some(i) = a.row_iter().position(|r| r.iter().all(|&x| x == 0.0)) {
            return Err(Error::Invalid(format!("facet row {i} is all zeros")));
        }
        Ok(Self { a, b })
    }

    pub fn dim(&self) -> usize {
        self.a.cols()
    }

    pub fn num_facets(&self) -> usize {
        self.a.rows()
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    /// Largest inscribed ball: `max ρ  s.t.  aᵢ·x + ‖aᵢ‖ρ ≤ bᵢ`.
    pub fn chebyshev_center(&self) -> Result<(Vec<f64>, f64)> {
        let (q, d) = (self.num_facets(), self.dim());
        let n = d + 1 + q;
        let mut a = Matrix::zeros(q, n);
        for i in 0..q {
            let row = self.a.row(i);
            a.row_mut(i)[..d].copy_from_slice(row);
            a[(i, d)] = norm(row);
            a[(i, d + 1 + i)] = 1.0;
        }
        let mut c = vec![0.0; n];
        c[d] = -1.0;
        let mut lower = vec![0.0; n];
        lower[..d].fill(f64::NEG_INFINITY);
        let upper = vec![f64::INFINITY; n];
        let sol = lp::solve(&LpProblem::new(c, a, self.b.clone(), lower, upper)?)?;
        match sol.status {
            LpStatus::Infeasible => Err(Error::Empty),
            LpStatus::Unbounded => Err(Error::Unbounded("inscribed ball radius".into())),
            LpStatus::Optimal => {
                let radius = sol.point[d];
                if radius <= 1e-12 {
                    return Err(Error::Invalid("polytope is not full-dimensional".into()));
                }
                Ok((sol.point[..d].to_vec(), radius))
            }
        }
    }

    /// Checks boundedness by maximizing and minimizing every coordinate.
    /// Returns the coordinate box on success.
    pub fn bounding_box(&self) -> Result<Vec<(f64, f64)>> {
        let (q, d) = (self.num_facets(), self.dim());
        let n = d + q;
        let mut a = Matrix::zeros(q, n);
        for i in 0..q {
            a.row_mut(i)[..d].copy_from_slice(self.a.row(i));
            a[(i, d + i)] = 1.0;
        }
        let mut lower = vec![0.0; n];
        lower[..d].fill(f64::NEG_INFINITY);
        let upper = vec![f64::INFINITY; n];
        let mut c = vec![0.0; n];
        c[0] = 1.0;
        let mut problem = LpProblem::new(c, a, self.b.clone(), lower, upper)?;
        let mut out = Vec::with_capacity(d);
        for j in 0..d {
            problem.c.fill(0.0);
            problem.c[j] = 1.0;
            let (lo, hi) = lp::with_solver(|s| -> Result<(f64, f64)> {
                let lo = s.solve(&problem)?;
                match lo.status {
                    LpStatus::Infeasible => return Err(Error::Empty),
                    LpStatus::Unbounded => {
                        return Err(Error::Unbounded(format!("coordinate {j} below")))
                    }
                    LpStatus::Optimal => {}
                }
                let hi = s.resolve_negated(&problem, lo.basis.as_ref().expect("optimal"))?;
                if hi.status != LpStatus::Optimal {
                    return Err(Error::Unbounded(format!("coordinate {j} above")));
                }
                Ok((lo.objective_value, -hi.objective_value))
            })?;
            out.push((lo, hi));
        }
        Ok(out)
    }
}

impl ConvexBody for HPolytope {
    fn dim(&self) -> usize {
        self.a.cols()
    }

    fn contains(&self, x: &[f64]) -> Result<bool> {
        check_dim(self.dim(), x)?;
        Ok(h_contains(&self.a, &self.b, x))
    }

    fn line_intersection(&self, p: &[f64], v: &[f64]) -> Result<(f64, f64)> {
        check_dim(self.dim(), p)?;
        h_chord(&self.a, &self.b, p, v)
    }

    fn coord_intersection(&self, p: &[f64], i: usize) -> Result<(f64, f64)> {
        check_dim(self.dim(), p)?;
        h_coord_chord(&self.a, &self.b, p, i)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;

    #[test]
    fn cube_center_and_chord() {
        let c = gen::cube(4);
        let (x, r) = c.chebyshev_center().unwrap();
        assert!(x.iter().all(|v| v.abs() < 1e-12));
        assert!((r - 1.0).abs() < 1e-12);
        assert_eq!(c.line_intersection(&[0.0; 4], &[1.0, 0.0, 0.0, 0.0]).unwrap(), (-1.0, 1.0));
        assert!(c.contains(&[0.0; 4]).unwrap());
        assert!(!c.contains(&[1.5, 0.0, 0.0, 0.0]).unwrap());
    }

    #[test]
    fn triangle_inradius() {
        let a = Matrix::from_rows(&[vec![-1.0, 0.0], vec![0.0, -1.0], vec![1.0, 1.0]]).unwrap();
        let p = HPolytope::new(a, vec![0.0, 0.0, 1.0]).unwrap();
        let (x, r) = p.chebyshev_center().unwrap();
        let expect = 1.0 / (2.0 + 2f64.sqrt());
        assert!((r - expect).abs() < 1e-10);
        assert!((x[0] - expect).abs() < 1e-10 && (x[1] - expect).abs() < 1e-10);
    }

    #[test]
    fn detects_empty_and_unbounded() {
        let a = Matrix::from_rows(&[vec![1.0], vec![-1.0]]).unwrap();
        let empty = HPolytope::new(a.clone(), vec![-1.0, -1.0]).unwrap();
        assert!(matches!(empty.chebyshev_center(), Err(Error::Empty)));
        let half = HPolytope::new(Matrix::from_rows(&[vec![1.0, 0.0]]).unwrap(), vec![1.0]).unwrap();
        assert!(matches!(half.chebyshev_center(), Err(Error::Unbounded(_))));
        // A slab has a finite inscribed radius but is still unbounded.
        let slab = HPolytope::new(
            Matrix::from_rows(&[vec![1.0, 0.0], vec![-1.0, 0.0]]).unwrap(),
            vec![1.0, 1.0],
        )
        .unwrap();
        assert!(slab.chebyshev_center().is_ok());
        assert!(matches!(slab.bounding_box(), Err(Error::Unbounded(_))));
        let bx = gen::cube(3).bounding_box().unwrap();
        assert!(bx.iter().all(|&(l, h)| (l + 1.0).abs() < 1e-12 && (h - 1.0).abs() < 1e-12));
    }

    #[test]
    fn rejects_zero_rows() {
        let a = Matrix::from_rows(&[vec![0.0, 0.0], vec![1.0, 0.0]]).unwrap();
        assert!(HPolytope::new(a, vec![1.0, 1.0]).is_err());
    }
}
