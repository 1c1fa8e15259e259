//! Convex bodies and their oracles.

mod ball;
mod hbody;
mod hpolytope;
mod vpolytope;
mod zonotope;

pub use ball::Ball;
pub use hbody::ShiftedHBody;
pub use hpolytope::HPolytope;
pub use vpolytope::{Ellipsoid, VPolytope};
pub use zonotope::{b_max_offsets, Zonotope};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix};

/// Absolute slack tolerance for closed-form membership tests.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

pub trait ConvexBody: Sync {
    fn dim(&self) -> usize;

    fn contains(&self, x: &[f64]) -> Result<bool>;

    /// Parameters `(t_lo, t_hi)` where the line `p + t·v` leaves the body.
    fn line_intersection(&self, p: &[f64], v: &[f64]) -> Result<(f64, f64)>;

    /// Chord along the `i`-th coordinate axis.
    fn coord_intersection(&self, p: &[f64], i: usize) -> Result<(f64, f64)> {
        let mut e = vec![0.0; self.dim()];
        e[i] = 1.0;
        self.line_intersection(p, &e)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    H,
    V,
    Z,
}

impl std::fmt::Display for Representation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::H => "h",
            Self::V => "v",
            Self::Z => "z",
        })
    }
}

/// An input polytope in any of the three supported representations.
#[derive(Clone, Debug)]
pub enum Polytope {
    H(HPolytope),
    V(VPolytope),
    Z(Zonotope),
}

impl Polytope {
    pub fn representation(&self) -> Representation {
        match self {
            Self::H(_) => Representation::H,
            Self::V(_) => Representation::V,
            Self::Z(_) => Representation::Z,
        }
    }

    /// Facet count for H, vertex count for V, generator count for Z.
    pub fn size(&self) -> usize {
        match self {
            Self::H(p) => p.num_facets(),
            Self::V(p) => p.num_vertices(),
            Self::Z(z) => z.num_generators(),
        }
    }

    /// Chebyshev center for H, the origin for Z, the enclosing-ellipsoid
    /// center for V.
    pub fn interior_point(&self) -> Result<Vec<f64>> {
        match self {
            Self::H(p) => Ok(p.chebyshev_center()?.0),
            Self::V(p) => Ok(p.enclosing_ellipsoid(vpolytope::KHACHIYAN_TOL)?.center),
            Self::Z(z) => Ok(vec![0.0; z.dim()]),
        }
    }
}

impl ConvexBody for Polytope {
    fn dim(&self) -> usize {
        match self {
            Self::H(p) => p.dim(),
            Self::V(p) => p.dim(),
            Self::Z(p) => p.dim(),
        }
    }

    fn contains(&self, x: &[f64]) -> Result<bool> {
        match self {
            Self::H(p) => p.contains(x),
            Self::V(p) => p.contains(x),
            Self::Z(p) => p.contains(x),
        }
    }

    fn line_intersection(&self, p: &[f64], v: &[f64]) -> Result<(f64, f64)> {
        match self {
            Self::H(b) => b.line_intersection(p, v),
            Self::V(b) => b.line_intersection(p, v),
            Self::Z(b) => b.line_intersection(p, v),
        }
    }

    fn coord_intersection(&self, p: &[f64], i: usize) -> Result<(f64, f64)> {
        match self {
            Self::H(b) => b.coord_intersection(p, i),
            Self::V(b) => b.coord_intersection(p, i),
            Self::Z(b) => b.coord_intersection(p, i),
        }
    }
}

/// `A ∩ B`; chords are the overlap of the two chords.
pub struct Intersection<'a, A: ?Sized, B: ?Sized> {
    pub a: &'a A,
    pub b: &'a B,
}

impl<'a, A: ConvexBody + ?Sized, B: ConvexBody + ?Sized> Intersection<'a, A, B> {
    pub fn new(a: &'a A, b: &'a B) -> Self {
        Self { a, b }
    }
}

impl<A: ConvexBody + ?Sized, B: ConvexBody + ?Sized> ConvexBody for Intersection<'_, A, B> {
    fn dim(&self) -> usize {
        self.a.dim()
    }

    fn contains(&self, x: &[f64]) -> Result<bool> {
        Ok(self.b.contains(x)? && self.a.contains(x)?)
    }

    fn line_intersection(&self, p: &[f64], v: &[f64]) -> Result<(f64, f64)> {
        // The cheap body first: the LP-backed one is usually `a`.
        let (l2, h2) = self.b.line_intersection(p, v)?;
        let (l1, h1) = self.a.line_intersection(p, v)?;
        Ok((l1.max(l2), h1.min(h2)))
    }

    fn coord_intersection(&self, p: &[f64], i: usize) -> Result<(f64, f64)> {
        let (l2, h2) = self.b.coord_intersection(p, i)?;
        let (l1, h1) = self.a.coord_intersection(p, i)?;
        Ok((l1.max(l2), h1.min(h2)))
    }
}

impl<T: ConvexBody + ?Sized> ConvexBody for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn contains(&self, x: &[f64]) -> Result<bool> {
        (**self).contains(x)
    }
    fn line_intersection(&self, p: &[f64], v: &[f64]) -> Result<(f64, f64)> {
        (**self).line_intersection(p, v)
    }
    fn coord_intersection(&self, p: &[f64], i: usize) -> Result<(f64, f64)> {
        (**self).coord_intersection(p, i)
    }
}

fn check_dim(d: usize, x: &[f64]) -> Result<()> {
    if x.len() != d {
        return Err(Error::Shape(format!(
            "point of length {} for a body in R^{d}",
            x.len()
        )));
    }
    Ok(())
}

fn check_direction(v: &[f64]) -> Result<()> {
    if v.iter().all(|&c| c == 0.0) {
        return Err(Error::Precondition("zero direction".into()));
    }
    Ok(())
}

pub(crate) fn h_contains(a: &Matrix, b: &[f64], x: &[f64]) -> bool {
    a.row_iter()
        .zip(b)
        .all(|(row, &bi)| dot(row, x) <= bi + MEMBERSHIP_TOL)
}

/// Chord of `{x : a x ≤ b}` through `p` along `v`, with `a·v` supplied per row.
fn h_chord_from(
    b: &[f64],
    a_dot_p: impl Iterator<Item = f64>,
    a_dot_v: impl Iterator<Item = f64>,
) -> Result<(f64, f64)> {
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for ((&bi, ap), av) in b.iter().zip(a_dot_p).zip(a_dot_v) {
        let slack = bi - ap;
        if slack < -MEMBERSHIP_TOL {
            return Err(Error::Precondition(format!(
                "chord base point violates a facet by {:e}",
                -slack
            )));
        }
        let slack = slack.max(0.0);
        if av > 0.0 {
            hi = hi.min(slack / av);
        } else if av < 0.0 {
            lo = lo.max(slack / av);
        }
    }
    if !lo.is_finite() || !hi.is_finite() {
        return Err(Error::Numeric("unbounded chord".into()));
    }
    Ok((lo, hi))
}

pub(crate) fn h_chord(a: &Matrix, b: &[f64], p: &[f64], v: &[f64]) -> Result<(f64, f64)> {
    check_direction(v)?;
    h_chord_from(
        b,
        a.row_iter().map(|r| dot(r, p)),
        a.row_iter().map(|r| dot(r, v)),
    )
}

pub(crate) fn h_coord_chord(a: &Matrix, b: &[f64], p: &[f64], i: usize) -> Result<(f64, f64)> {
    h_chord_from(
        b,
        a.row_iter().map(|r| dot(r, p)),
        a.row_iter().map(|r| r[i]),
    )
}
