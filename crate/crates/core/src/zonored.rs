//! Order reduction of a zonotope to an enclosing parallelotope by PCA, and
//! the fitness ratio `R = (vol(P_red)/vol(P))^{1/d}`.

use serde::{Deserialize, Serialize};

use crate::bodies::{Polytope, Zonotope};
use crate::error::{Error, Result};
use crate::estimate::{volume, VolumeConfig, VolumeReport};
use crate::linalg::{svd, Lu, Matrix};

/// `diag(Σⱼ |h_ij|)`: generators of the smallest axis-aligned box around `h[−1,1]^k`.
pub fn interval_hull(h: &Matrix) -> Matrix {
    let diag: Vec<f64> = h.row_iter().map(|r| r.iter().map(|v| v.abs()).sum()).collect();
    Matrix::from_diag(&diag)
}

/// `ln vol(g[−1,1]^d) = ln (2^d |det g|)`; `-inf` when singular.
pub fn parallelotope_volume_log(g: &Matrix) -> Result<f64> {
    if !g.is_square() {
        return Err(Error::Shape(format!("{}x{} is not square", g.rows(), g.cols())));
    }
    let lu = Lu::new(g)?;
    Ok(g.rows() as f64 * std::f64::consts::LN_2 + lu.log_abs_determinant())
}

/// A parallelotope `g_red[−1,1]^d` containing the input zonotope.
#[derive(Clone, Debug)]
pub struct ReducedZonotope {
    g_red: Matrix,
    inverse: Lu,
}

impl ReducedZonotope {
    pub fn generators(&self) -> &Matrix {
        &self.g_red
    }

    pub fn log_volume(&self) -> f64 {
        let d = self.g_red.rows();
        d as f64 * std::f64::consts::LN_2 + self.inverse.log_abs_determinant()
    }

    /// `‖g_red⁻¹ x‖_∞ ≤ 1`, with a relative slack of `1e-9`.
    pub fn contains(&self, x: &[f64]) -> Result<bool> {
        let y = self.inverse.solve(x)?;
        Ok(y.iter().all(|v| v.abs() <= 1.0 + 1e-9))
    }
}

/// `G_red = U · IH(Uᵀ G)` with `U` the left singular vectors of `XᵀX`, `X = [G | −G]ᵀ`.
pub fn pca_reduce(z: &Zonotope) -> Result<ReducedZonotope> {
    let g = z.generators();
    let neg = g.scale(-1.0);
    let mut cols: Vec<Vec<f64>> = (0..g.cols()).map(|j| g.col(j)).collect();
    cols.extend((0..neg.cols()).map(|j| neg.col(j)));
    let x = Matrix::from_cols(&cols)?.transpose();
    let xtx = x.transpose().matmul(&x)?;
    let s = svd(&xtx)?;
    let d = z.dim();
    if s.numeric_rank() < d {
        return Err(Error::Rank {
            expected: d,
            found: s.numeric_rank(),
        });
    }
    let u = s.u;
    let proj = u.transpose().matmul(g)?;
    let g_red = u.matmul(&interval_hull(&proj))?;
    let inverse = Lu::new(&g_red)?;
    if inverse.is_singular() {
        return Err(Error::Numeric("reduced generator matrix is singular".into()));
    }
    Ok(ReducedZonotope { g_red, inverse })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fitness {
    #[serde(rename = "R")]
    pub r: f64,
    pub vol_p_log: f64,
    pub vol_red_log: f64,
    pub report: VolumeReport,
}

pub fn fitness(z: &Zonotope, cfg: &VolumeConfig) -> Result<Fitness> {
    let red = pca_reduce(z)?;
    let report = volume(&Polytope::Z(z.clone()), cfg)?;
    let d = z.dim() as f64;
    let vol_red_log = red.log_volume();
    Ok(Fitness {
        r: ((vol_red_log - report.log_volume) / d).exp(),
        vol_p_log: report.log_volume,
        vol_red_log,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bodies::ConvexBody;
    use crate::gen;
    use crate::oracle::exact_zonotope;
    use crate::sampling::{HnrChain, PointSource, RngStream, WalkConfig};

    fn mat(rows: &[Vec<f64>]) -> Matrix {
        Matrix::from_rows(rows).unwrap()
    }

    #[test]
    fn interval_hull_examples() {
        assert_eq!(interval_hull(&Matrix::identity(2)), Matrix::identity(2));
        assert_eq!(interval_hull(&mat(&[vec![1.0, 1.0], vec![0.0, 1.0]])), Matrix::from_diag(&[2.0, 1.0]));
        assert_eq!(interval_hull(&Matrix::from_diag(&[-3.0, 0.5])), Matrix::from_diag(&[3.0, 0.5]));
    }

    #[test]
    fn parallelotope_volumes() {
        assert!((parallelotope_volume_log(&Matrix::identity(2)).unwrap() - 4f64.ln()).abs() < 1e-12);
        assert!((parallelotope_volume_log(&Matrix::from_diag(&[2.0, 3.0])).unwrap() - 24f64.ln()).abs() < 1e-12);
        let mut rng = RngStream::new(1);
        let z = gen::zono(3, 3, &mut rng).unwrap();
        let lhs = parallelotope_volume_log(z.generators()).unwrap();
        assert!((lhs - exact_zonotope(&z).unwrap()).abs() < 1e-9);
        assert_eq!(parallelotope_volume_log(&Matrix::zeros(2, 2)).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn axis_aligned_parallelotope_is_kept() {
        let z = Zonotope::new(Matrix::from_diag(&[2.0, 3.0])).unwrap();
        let red = pca_reduce(&z).unwrap();
        assert!((red.log_volume() - 24f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn rotated_parallelotope_is_recovered() {
        let (s, c) = (30f64.to_radians().sin(), 30f64.to_radians().cos());
        let rot = mat(&[vec![c, -s], vec![s, c]]);
        let z = Zonotope::new(rot.matmul(&Matrix::from_diag(&[2.0, 3.0])).unwrap()).unwrap();
        let red = pca_reduce(&z).unwrap();
        let ratio = ((red.log_volume() - 24f64.ln()) / 2.0).exp();
        assert!((ratio - 1.0).abs() <= 0.05, "{ratio}");
    }

    #[test]
    fn reduction_contains_the_zonotope() {
        let mut rng = RngStream::new(2);
        let z = gen::zono(4, 12, &mut rng).unwrap();
        let red = pca_reduce(&z).unwrap();
        let mut chain = HnrChain::new(&z, vec![0.0; 4], WalkConfig::default());
        for _ in 0..2000 {
            assert!(red.contains(chain.next_point(&mut rng).unwrap()).unwrap());
        }
        // Every vertex-like corner G·sign pattern is inside too.
        for mask in 0..(1u32 << 12) {
            let lam: Vec<f64> = (0..12).map(|j| if mask >> j & 1 == 1 { 1.0 } else { -1.0 }).collect();
            assert!(red.contains(&z.generators().matvec(&lam)).unwrap());
        }
        assert!(z.contains(&[0.0; 4]).unwrap());
    }
}
