//! Reference volumes: closed forms, the subset-determinant expansion for
//! zonotopes, and plain rejection sampling.

use itertools::Itertools;
use statrs::function::gamma::ln_gamma;

use crate::bodies::{ConvexBody, Zonotope};
use crate::error::{Error, Result};
use crate::linalg::Lu;
use crate::sampling::RngStream;

/// Most `d`-subsets `exact_zonotope` will enumerate.
pub const MAX_SUBSETS: f64 = 1e6;

fn ln_factorial(d: usize) -> f64 {
    ln_gamma(d as f64 + 1.0)
}

/// `ln 2^d`.
pub fn exact_cube(d: usize) -> f64 {
    d as f64 * std::f64::consts::LN_2
}

/// `ln (2^d / d!)`.
pub fn exact_cross(d: usize) -> f64 {
    exact_cube(d) - ln_factorial(d)
}

/// `ln (1 / d!)` for `conv{0, e₁, …, e_d}`.
pub fn exact_simplex(d: usize) -> f64 {
    -ln_factorial(d)
}

/// `ln C(k, d)`.
fn ln_binomial(k: usize, d: usize) -> f64 {
    ln_factorial(k) - ln_factorial(d) - ln_factorial(k - d)
}

/// `ln vol(G[−1,1]^k) = ln (2^d Σ_{|S|=d} |det G_S|)`.
pub fn exact_zonotope(z: &Zonotope) -> Result<f64> {
    let (d, k) = (z.dim(), z.num_generators());
    if ln_binomial(k, d) > MAX_SUBSETS.ln() + 1e-9 {
        return Err(Error::Precondition(format!(
            "C({k}, {d}) exceeds {MAX_SUBSETS} subsets"
        )));
    }
    let g = z.generators();
    let mut total = 0.0;
    for subset in (0..k).combinations(d) {
        let lu = Lu::new(&g.select_cols(&subset))?;
        total += lu.determinant().abs();
    }
    Ok(exact_cube(d) + total.ln())
}

/// Uniform points in the box `[lo, hi]`; returns `(volume, standard error)`.
pub fn mc_rejection<B: ConvexBody + ?Sized>(
    body: &B,
    lo: &[f64],
    hi: &[f64],
    n: usize,
    rng: &mut RngStream,
) -> Result<(f64, f64)> {
    if lo.len() != body.dim() || hi.len() != body.dim() {
        return Err(Error::Shape("box and body dimensions differ".into()));
    }
    if n == 0 || lo.iter().zip(hi).any(|(a, b)| !(a < b)) {
        return Err(Error::Invalid("empty box or no samples".into()));
    }
    let box_vol: f64 = lo.iter().zip(hi).map(|(a, b)| b - a).product();
    let mut x = vec![0.0; lo.len()];
    let mut hits = 0usize;
    for _ in 0..n {
        for ((xi, a), b) in x.iter_mut().zip(lo).zip(hi) {
            *xi = a + (b - a) * rng.uniform();
        }
        hits += body.contains(&x)? as usize;
    }
    let f = hits as f64 / n as f64;
    Ok((box_vol * f, box_vol * (f * (1.0 - f) / n as f64).sqrt()))
}
