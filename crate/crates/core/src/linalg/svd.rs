use super::{dot, norm, Matrix};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 60;
/// Columns are treated as orthogonal once |a_p·a_q| ≤ ORTHO_TOL·‖a_p‖‖a_q‖.
const ORTHO_TOL: f64 = 1e-15;
/// Singular values at or below this fraction of the largest count as zero.
pub const RANK_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct SvdResult {
    /// `rows × p` with orthonormal columns, `p = min(rows, cols)`.
    pub u: Matrix,
    /// Descending, non-negative.
    pub singular_values: Vec<f64>,
    /// `cols × p` with orthonormal columns.
    pub v: Matrix,
}

impl SvdResult {
    pub fn reconstruct(&self) -> Matrix {
        let p = self.singular_values.len();
        let mut us = self.u.clone();
        for i in 0..us.rows() {
            for j in 0..p {
                us[(i, j)] *= self.singular_values[j];
            }
        }
        us.matmul(&self.v.transpose()).expect("svd factors have matching shapes")
    }

    /// Number of singular values above `RANK_TOL · σ_max`.
    pub fn numeric_rank(&self) -> usize {
        let smax = self.singular_values.first().copied().unwrap_or(0.0);
        self.singular_values
            .iter()
            .filter(|&&s| s > RANK_TOL * smax)
            .count()
    }
}

/// Hestenes one-sided Jacobi: rotates column pairs of `a` until they are
/// mutually orthogonal. Returns the rotated columns `a·V` and the accumulated
/// `n × n` orthogonal `V`, both as column lists.
fn jacobi_columns(a: &Matrix) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let n = a.cols();
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| a.col(j)).collect();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            e
        })
        .collect();
    let fro = a.frobenius_norm();
    // Columns this small are zero for all practical purposes.
    let negligible = (1e-15 * fro).powi(2);

    for _sweep in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = dot(&cols[p], &cols[p]);
                let beta = dot(&cols[q], &cols[q]);
                if alpha <= negligible || beta <= negligible {
                    continue;
                }
                let gamma = dot(&cols[p], &cols[q]);
                if gamma.abs() <= ORTHO_TOL * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut cols, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            return Ok((cols, v));
        }
    }

    let worst = (0..n)
        .flat_map(|p| (p + 1..n).map(move |q| (p, q)))
        .map(|(p, q)| {
            let d = (dot(&cols[p], &cols[p]) * dot(&cols[q], &cols[q])).sqrt();
            if d > negligible {
                dot(&cols[p], &cols[q]).abs() / d
            } else {
                0.0
            }
        })
        .fold(0.0, f64::max);
    Err(Error::Numeric(format!(
        "Jacobi SVD did not converge in {MAX_SWEEPS} sweeps (max column cosine {worst:e})"
    )))
}

fn rotate(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (head, tail) = cols.split_at_mut(q);
    let (cp, cq) = (&mut head[p], &mut tail[0]);
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let (xp, yq) = (*x, *y);
        *x = c * xp - s * yq;
        *y = s * xp + c * yq;
    }
}

/// Thin SVD `A = U diag(S) Vᵀ` by one-sided Jacobi.
pub fn svd(a: &Matrix) -> Result<SvdResult> {
    if a.rows() == 0 || a.cols() == 0 {
        return Err(Error::Shape("svd of an empty matrix".into()));
    }
    if !a.is_finite() {
        return Err(Error::Numeric("svd input has non-finite entries".into()));
    }
    if a.rows() < a.cols() {
        let t = svd(&a.transpose())?;
        return Ok(SvdResult {
            u: t.v,
            singular_values: t.singular_values,
            v: t.u,
        });
    }

    let (m, n) = (a.rows(), a.cols());
    let (cols, v) = jacobi_columns(a)?;
    let sigma: Vec<f64> = cols.iter().map(|c| norm(c)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sigma[j].total_cmp(&sigma[i]));

    let smax = sigma[order[0]];
    let mut u_cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut missing = Vec::new();
    for (slot, &j) in order.iter().enumerate() {
        if sigma[j] > 1e-13 * smax && sigma[j] > 0.0 {
            u_cols.push(cols[j].iter().map(|x| x / sigma[j]).collect());
        } else {
            u_cols.push(vec![0.0; m]);
            missing.push(slot);
        }
    }
    // Zero singular values leave U underdetermined; fill with any orthonormal completion.
    for slot in missing {
        let basis: Vec<Vec<f64>> = u_cols
            .iter()
            .enumerate()
            .filter(|(i, c)| *i != slot && c.iter().any(|&x| x != 0.0))
            .map(|(_, c)| c.clone())
            .collect();
        u_cols[slot] = complete_basis_vector(&basis, m)?;
    }

    Ok(SvdResult {
        u: Matrix::from_cols(&u_cols)?,
        singular_values: order.iter().map(|&j| sigma[j]).collect(),
        v: Matrix::from_cols(&order.iter().map(|&j| v[j].clone()).collect::<Vec<_>>())?,
    })
}

/// A unit vector orthogonal to every vector in `basis` (assumed orthonormal).
fn complete_basis_vector(basis: &[Vec<f64>], m: usize) -> Result<Vec<f64>> {
    let mut best: Option<(f64, Vec<f64>)> = None;
    for i in 0..m {
        let mut e = vec![0.0; m];
        e[i] = 1.0;
        for _ in 0..2 {
            for b in basis {
                let proj = dot(&e, b);
                for (x, y) in e.iter_mut().zip(b) {
                    *x -= proj * y;
                }
            }
        }
        let r = norm(&e);
        if best.as_ref().is_none_or(|(br, _)| r > *br) {
            best = Some((r, e));
        }
    }
    match best {
        Some((r, e)) if r > 1e-8 => Ok(e.into_iter().map(|x| x / r).collect()),
        _ => Err(Error::Numeric("cannot complete orthonormal basis".into())),
    }
}

/// Orthonormal rows spanning the orthogonal complement of `col(q)`.
///
/// `q` is `k × c` with rank `c`; the result is `(k − c) × k`. Computed from
/// the full right factor of the Jacobi SVD of `qᵀ`: the rotated columns that
/// collapse to zero are exactly the kernel of `qᵀ`.
pub fn null_space_complement(q: &Matrix) -> Result<Matrix> {
    let (k, c) = (q.rows(), q.cols());
    if c == 0 || c > k {
        return Err(Error::Shape(format!("complement of a {k}x{c} matrix")));
    }
    let (cols, v) = jacobi_columns(&q.transpose())?;
    let norms: Vec<f64> = cols.iter().map(|col| norm(col)).collect();
    let nmax = norms.iter().copied().fold(0.0, f64::max);
    let rank = norms.iter().filter(|&&s| s > RANK_TOL * nmax).count();
    if rank != c {
        return Err(Error::Rank {
            expected: c,
            found: rank,
        });
    }
    let rows: Vec<Vec<f64>> = norms
        .iter()
        .zip(v)
        .filter(|(s, _)| **s <= RANK_TOL * nmax)
        .map(|(_, col)| col)
        .collect();
    Matrix::from_rows(&rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rows: usize, cols: usize, seed: u64) -> Matrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..rows * cols).map(|_| rng.random_range(-1.0..1.0)).collect();
        Matrix::from_vec(rows, cols, data).unwrap()
    }

    fn assert_orthonormal_cols(m: &Matrix, tol: f64) {
        let g = m.transpose().matmul(m).unwrap();
        let err = g.sub(&Matrix::identity(m.cols())).max_abs();
        assert!(err <= tol, "orthonormality error {err:e}");
    }

    fn check_svd(a: &Matrix) -> SvdResult {
        let s = svd(a).unwrap();
        let resid = s.reconstruct().sub(a).frobenius_norm();
        assert!(resid <= 1e-10 * a.frobenius_norm().max(1.0), "residual {resid:e}");
        assert_orthonormal_cols(&s.u, 1e-10);
        assert_orthonormal_cols(&s.v, 1e-10);
        assert!(s.singular_values.windows(2).all(|w| w[0] >= w[1]));
        assert!(s.singular_values.iter().all(|&x| x >= 0.0));
        s
    }

    #[test]
    fn identity_svd() {
        let s = check_svd(&Matrix::identity(3));
        assert_eq!(s.singular_values, vec![1.0, 1.0, 1.0]);
        assert!(s.u.sub(&Matrix::identity(3)).max_abs() < 1e-15);
        assert!(s.v.sub(&Matrix::identity(3)).max_abs() < 1e-15);
    }

    #[test]
    fn diagonal_svd_sorted() {
        let s = check_svd(&Matrix::from_diag(&[1.0, 3.0, 2.0]));
        assert_eq!(s.singular_values, vec![3.0, 2.0, 1.0]);
    }

    #[test]
    fn random_rectangular_svd() {
        check_svd(&random_matrix(8, 5, 1));
        check_svd(&random_matrix(5, 8, 2));
        check_svd(&random_matrix(40, 12, 3));
    }

    #[test]
    fn rank_deficient_svd_completes_u() {
        // rank 2 in R^{6x4}
        let b = random_matrix(6, 2, 4);
        let c = random_matrix(2, 4, 5);
        let a = b.matmul(&c).unwrap();
        let s = check_svd(&a);
        assert_eq!(s.numeric_rank(), 2);
    }

    #[test]
    fn complement_of_axis_vectors() {
        let e3 = Matrix::from_rows(&[vec![0.0], vec![0.0], vec![1.0]]).unwrap();
        let w = null_space_complement(&e3).unwrap();
        assert_eq!(w.rows(), 2);
        assert!(w.matmul(&e3).unwrap().max_abs() < 1e-12);
        // rows span {e1, e2}
        for r in w.row_iter() {
            assert!(r[2].abs() < 1e-12);
        }

        let i4 = Matrix::identity(4);
        let q = i4.select_cols(&[0, 1]);
        let w = null_space_complement(&q).unwrap();
        assert_eq!(w.rows(), 2);
        for r in w.row_iter() {
            assert!(r[0].abs() < 1e-12 && r[1].abs() < 1e-12);
        }
    }

    #[test]
    fn complement_of_random_full_rank() {
        let q = random_matrix(6, 2, 11);
        let w = null_space_complement(&q).unwrap();
        assert_eq!((w.rows(), w.cols()), (4, 6));
        assert!(w.matmul(&q).unwrap().max_abs() <= 1e-10);
        assert_orthonormal_cols(&w.transpose(), 1e-10);
    }

    #[test]
    fn complement_reports_rank_defect() {
        let col = random_matrix(5, 1, 3).col(0);
        let q = Matrix::from_cols(&[col.clone(), col]).unwrap();
        match null_space_complement(&q) {
            Err(Error::Rank { expected, found }) => assert_eq!((expected, found), (2, 1)),
            other => panic!("expected rank error, got {other:?}"),
        }
    }
}
