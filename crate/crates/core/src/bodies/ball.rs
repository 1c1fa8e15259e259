use super::{check_dim, check_direction, ConvexBody, MEMBERSHIP_TOL};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Ball {
    center: Vec<f64>,
    radius: f64,
}

impl Ball {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Invalid(format!("ball radius must be positive, got {radius}")));
        }
        if center.is_empty() || center.iter().any(|c| !c.is_finite()) {
            return Err(Error::Invalid("ball center must be a finite point".into()));
        }
        Ok(Self { center, radius })
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn distance_to_center(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(&self.center)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

impl ConvexBody for Ball {
    fn dim(&self) -> usize {
        self.center.len()
    }

    fn contains(&self, x: &[f64]) -> Result<bool> {
        check_dim(self.dim(), x)?;
        Ok(self.distance_to_center(x) <= self.radius + MEMBERSHIP_TOL)
    }

    fn line_intersection(&self, p: &[f64], v: &[f64]) -> Result<(f64, f64)> {
        check_dim(self.dim(), p)?;
        check_direction(v)?;
        // |p − c + t v|² = R²
        let mut a = 0.0;
        let mut b = 0.0;
        let mut c = -self.radius * self.radius;
        for ((pi, ci), vi) in p.iter().zip(&self.center).zip(v) {
            let w = pi - ci;
            a += vi * vi;
            b += w * vi;
            c += w * w;
        }
        if c > 2.0 * self.radius * MEMBERSHIP_TOL {
            return Err(Error::Precondition("chord base point outside the ball".into()));
        }
        let disc = (b * b - a * c).max(0.0).sqrt();
        // Stable roots of a t² + 2 b t + c = 0.
        let q = -(b + b.signum() * disc);
        let (r1, r2) = if q != 0.0 { (q / a, c / q) } else { (-disc / a, disc / a) };
        Ok((r1.min(r2), r1.max(r2)))
    }

    fn coord_intersection(&self, p: &[f64], i: usize) -> Result<(f64, f64)> {
        check_dim(self.dim(), p)?;
        let rest: f64 = p
            .iter()
            .zip(&self.center)
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, (a, b))| (a - b) * (a - b))
            .sum();
        let h2 = self.radius * self.radius - rest;
        if h2 < -2.0 * self.radius * MEMBERSHIP_TOL {
            return Err(Error::Precondition("chord base point outside the ball".into()));
        }
        let h = h2.max(0.0).sqrt();
        let w = p[i] - self.center[i];
        Ok((-h - w, h - w))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chord_through_center() {
        let b = Ball::new(vec![0.0; 4], 2.0).unwrap();
        let v = [0.5, 0.5, 0.5, 0.5];
        let (lo, hi) = b.line_intersection(&[0.0; 4], &v).unwrap();
        assert!((lo + 2.0).abs() < 1e-12 && (hi - 2.0).abs() < 1e-12);
        assert_eq!(b.coord_intersection(&[0.0; 4], 1).unwrap(), (-2.0, 2.0));
    }

    #[test]
    fn chord_off_center_lands_on_sphere() {
        let b = Ball::new(vec![1.0, -1.0, 0.5], 1.5).unwrap();
        let p = [1.3, -0.6, 0.2];
        let v = [0.3, -0.8, 0.52];
        let (lo, hi) = b.line_intersection(&p, &v).unwrap();
        for t in [lo, hi] {
            let x: Vec<f64> = p.iter().zip(&v).map(|(a, b)| a + t * b).collect();
            assert!((b.distance_to_center(&x) - 1.5).abs() < 1e-12);
        }
        let (lo, hi) = b.coord_intersection(&p, 2).unwrap();
        let (l2, h2) = b.line_intersection(&p, &[0.0, 0.0, 1.0]).unwrap();
        assert!((lo - l2).abs() < 1e-12 && (hi - h2).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Ball::new(vec![0.0], 0.0).is_err());
        let b = Ball::new(vec![0.0, 0.0], 1.0).unwrap();
        assert!(matches!(
            b.line_intersection(&[2.0, 0.0], &[1.0, 0.0]),
            Err(Error::Precondition(_))
        ));
        assert!(b.line_intersection(&[0.0, 0.0], &[0.0, 0.0]).is_err());
    }
}
