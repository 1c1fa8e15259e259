//! Seeded generators for the standard test families.

use crate::bodies::{HPolytope, VPolytope, Zonotope};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::sampling::{sample_unit_sphere, RngStream};

const RH_ATTEMPTS: usize = 100;

/// `[−1,1]^d` as `2d` halfspaces.
pub fn cube(d: usize) -> HPolytope {
    let mut a = Matrix::zeros(2 * d, d);
    for i in 0..d {
        a[(i, i)] = 1.0;
        a[(d + i, i)] = -1.0;
    }
    HPolytope::new(a, vec![1.0; 2 * d]).expect("cube is well formed")
}

/// `[−1,1]^d` by its `2^d` vertices.
pub fn cube_v(d: usize) -> VPolytope {
    let rows: Vec<Vec<f64>> = (0..1usize << d)
        .map(|mask| {
            (0..d)
                .map(|i| if mask >> i & 1 == 1 { 1.0 } else { -1.0 })
                .collect()
        })
        .collect();
    VPolytope::new(Matrix::from_rows(&rows).expect("rectangular")).expect("cube is well formed")
}

/// `conv{±eᵢ}`.
pub fn cross(d: usize) -> VPolytope {
    let mut v = Matrix::zeros(2 * d, d);
    for i in 0..d {
        v[(i, i)] = 1.0;
        v[(d + i, i)] = -1.0;
    }
    VPolytope::new(v).expect("cross polytope is well formed")
}

/// Full-dimensional corner simplex `conv{0, e₁, …, e_d}`, volume `1/d!`.
pub fn simplex(d: usize) -> VPolytope {
    let mut v = Matrix::zeros(d + 1, d);
    for i in 0..d {
        v[(i + 1, i)] = 1.0;
    }
    VPolytope::new(v).expect("simplex is well formed")
}

/// The corner simplex as `{x ≥ 0, Σx ≤ 1}`.
pub fn simplex_h(d: usize) -> HPolytope {
    let mut a = Matrix::zeros(d + 1, d);
    for i in 0..d {
        a[(i, i)] = -1.0;
        a[(d, i)] = 1.0;
    }
    let mut b = vec![0.0; d + 1];
    b[d] = 1.0;
    HPolytope::new(a, b).expect("simplex is well formed")
}

/// `m` random halfspaces tangent to the unit sphere. Redraws while the
/// intersection is unbounded.
pub fn rh(d: usize, m: usize, rng: &mut RngStream) -> Result<HPolytope> {
    if m <= d {
        return Err(Error::Invalid(format!("{m} halfspaces cannot bound R^{d}")));
    }
    for _ in 0..RH_ATTEMPTS {
        let rows: Vec<Vec<f64>> = (0..m).map(|_| sample_unit_sphere(rng, d)).collect();
        let p = HPolytope::new(Matrix::from_rows(&rows)?, vec![1.0; m])?;
        match p.bounding_box() {
            Ok(_) => return Ok(p),
            Err(Error::Unbounded(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::Numeric(format!(
        "no bounded rh-{d}-{m} instance in {RH_ATTEMPTS} attempts"
    )))
}

/// Hull of `n` random points on the unit sphere.
pub fn rv(d: usize, n: usize, rng: &mut RngStream) -> Result<VPolytope> {
    let rows: Vec<Vec<f64>> = (0..n).map(|_| sample_unit_sphere(rng, d)).collect();
    VPolytope::new(Matrix::from_rows(&rows)?)
}

/// Sum of `k` segments with uniform directions and lengths uniform in `[0, √d]`.
pub fn zono(d: usize, k: usize, rng: &mut RngStream) -> Result<Zonotope> {
    let max_len = (d as f64).sqrt();
    let cols: Vec<Vec<f64>> = (0..k)
        .map(|_| {
            let dir = sample_unit_sphere(rng, d);
            let len = max_len * rng.uniform();
            dir.into_iter().map(|x| x * len).collect()
        })
        .collect();
    Zonotope::new(Matrix::from_cols(&cols)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bodies::ConvexBody;
    use crate::linalg::norm;

    #[test]
    fn shapes() {
        assert_eq!(cube(2).num_facets(), 4);
        assert_eq!(cube_v(3).num_vertices(), 8);
        assert_eq!(cross(3).num_vertices(), 6);
        assert_eq!(simplex(4).num_vertices(), 5);
        let c = cube(5);
        assert!(c.contains(&[0.0; 5]).unwrap());
        assert!(!c.contains(&[1.5, 0.0, 0.0, 0.0, 0.0]).unwrap());
    }

    #[test]
    fn cross_membership_is_l1_ball() {
        let c = cross(4);
        let mut rng = RngStream::new(8);
        for _ in 0..200 {
            let x: Vec<f64> = (0..4).map(|_| 0.8 * (2.0 * rng.uniform() - 1.0)).collect();
            let l1: f64 = x.iter().map(|v| v.abs()).sum();
            if (l1 - 1.0).abs() > 1e-6 {
                assert_eq!(c.contains(&x).unwrap(), l1 <= 1.0, "{x:?}");
            }
        }
    }

    #[test]
    fn rh_is_bounded_and_contains_unit_ball() {
        let mut rng = RngStream::new(10);
        let p = rh(10, 30, &mut rng).unwrap();
        assert!(p.a().row_iter().all(|r| (norm(r) - 1.0).abs() < 1e-12));
        let (center, radius) = p.chebyshev_center().unwrap();
        assert!(radius >= 1.0 - 1e-8);
        for (row, b) in p.a().row_iter().zip(p.b()) {
            let slack = b - crate::linalg::dot(row, &center);
            assert!(slack >= radius * norm(row) - 1e-8);
        }
    }

    #[test]
    fn rv_and_zono_invariants() {
        let mut rng = RngStream::new(11);
        let p = rv(5, 12, &mut rng).unwrap();
        assert!(p.vertices().row_iter().all(|r| (norm(r) - 1.0).abs() < 1e-12));
        let z = zono(4, 9, &mut rng).unwrap();
        let bound = 2.0;
        for j in 0..9 {
            assert!(norm(&z.generators().col(j)) <= bound);
        }
    }

    #[test]
    fn generators_are_seeded() {
        let a = zono(3, 5, &mut RngStream::new(1)).unwrap();
        let b = zono(3, 5, &mut RngStream::new(1)).unwrap();
        assert_eq!(a, b);
    }
}
