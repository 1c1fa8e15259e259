use std::sync::Arc;

use super::{check_dim, h_chord, h_contains, h_coord_chord, ConvexBody, HPolytope};
use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix};

/// `{x : M x ≤ b(t)}` with `b(t) = b_min + t (b_max − b_min)`.
///
/// All bodies of one family share `M` and the endpoint offsets; only `t`
/// differs, so cloning is cheap.
#[derive(Clone, Debug)]
pub struct ShiftedHBody {
    m: Arc<Matrix>,
    b0: Arc<Vec<f64>>,
    b_min: Arc<Vec<f64>>,
    b_max: Arc<Vec<f64>>,
    t: f64,
    offsets: Vec<f64>,
}

impl ShiftedHBody {
    pub fn new(
        m: Arc<Matrix>,
        b0: Arc<Vec<f64>>,
        b_min: Arc<Vec<f64>>,
        b_max: Arc<Vec<f64>>,
        t: f64,
    ) -> Result<Self> {
        let q = m.rows();
        if b0.len() != q || b_min.len() != q || b_max.len() != q {
            return Err(Error::Shape(format!("{q} rows but offset vectors of other lengths")));
        }
        if b_min.iter().zip(b_max.iter()).any(|(lo, hi)| lo > hi) {
            return Err(Error::Invalid("b_min must not exceed b_max".into()));
        }
        let mut body = Self {
            m,
            b0,
            b_min,
            b_max,
            t: 0.0,
            offsets: vec![0.0; q],
        };
        body.set_t(t)?;
        Ok(body)
    }

    pub fn m(&self) -> &Matrix {
        &self.m
    }

    pub fn b0(&self) -> &[f64] {
        &self.b0
    }

    pub fn b_min(&self) -> &[f64] {
        &self.b_min
    }

    pub fn b_max(&self) -> &[f64] {
        &self.b_max
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn set_t(&mut self, t: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Invalid(format!("interpolation parameter {t} outside [0,1]")));
        }
        self.t = t;
        for ((o, lo), hi) in self.offsets.iter_mut().zip(self.b_min.iter()).zip(self.b_max.iter()) {
            *o = lo + t * (hi - lo);
        }
        Ok(())
    }

    pub fn with_t(&self, t: f64) -> Result<Self> {
        let mut b = self.clone();
        b.set_t(t)?;
        Ok(b)
    }

    /// Smallest `t` with `x ∈ body(t)`; may exceed 1 or be negative.
    pub fn required_t(&self, x: &[f64]) -> f64 {
        let mut need = f64::NEG_INFINITY;
        for ((row, lo), hi) in self.m.row_iter().zip(self.b_min.iter()).zip(self.b_max.iter()) {
            let over = dot(row, x) - lo;
            let span = hi - lo;
            let t = if span > 1e-12 {
                over / span
            } else if over <= super::MEMBERSHIP_TOL {
                continue;
            } else {
                f64::INFINITY
            };
            need = need.max(t);
        }
        need
    }

    pub fn to_hpolytope(&self) -> Result<HPolytope> {
        HPolytope::new((*self.m).clone(), self.offsets.clone())
    }
}

impl ConvexBody for ShiftedHBody {
    fn dim(&self) -> usize {
        self.m.cols()
    }

    fn contains(&self, x: &[f64]) -> Result<bool> {
        check_dim(self.dim(), x)?;
        Ok(h_contains(&self.m, &self.offsets, x))
    }

    fn line_intersection(&self, p: &[f64], v: &[f64]) -> Result<(f64, f64)> {
        check_dim(self.dim(), p)?;
        h_chord(&self.m, &self.offsets, p, v)
    }

    fn coord_intersection(&self, p: &[f64], i: usize) -> Result<(f64, f64)> {
        check_dim(self.dim(), p)?;
        h_coord_chord(&self.m, &self.offsets, p, i)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square_family() -> ShiftedHBody {
        let m = Matrix::from_rows(&[
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![-1.0, 0.0],
            vec![0.0, -1.0],
        ])
        .unwrap();
        let ones = Arc::new(vec![1.0; 4]);
        ShiftedHBody::new(Arc::new(m), ones.clone(), ones, Arc::new(vec![3.0; 4]), 0.0).unwrap()
    }

    #[test]
    fn interpolated_offsets() {
        let b = square_family().with_t(0.5).unwrap();
        assert_eq!(b.offsets(), &[2.0; 4]);
        assert!(b.contains(&[1.9, -1.9]).unwrap());
        assert!(!b.contains(&[2.1, 0.0]).unwrap());
        assert_eq!(b.coord_intersection(&[0.0, 0.0], 0).unwrap(), (-2.0, 2.0));
        assert!(square_family().with_t(1.5).is_err());
    }

    #[test]
    fn required_t_is_the_membership_threshold() {
        let f = square_family();
        let x = [1.5, -0.2];
        let t = f.required_t(&x);
        assert!((t - 0.25).abs() < 1e-12);
        assert!(f.with_t(t + 1e-9).unwrap().contains(&x).unwrap());
        assert!(!f.with_t(t - 1e-6).unwrap().contains(&x).unwrap());
    }
}
