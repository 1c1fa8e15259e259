//! Text formats: cdd-style `.ine` (H) and `.ext` (V), and a plain zonotope
//! listing (`d k` followed by one generator per line).

use std::fmt::Write as _;
use std::path::Path;

use crate::bodies::{HPolytope, Polytope, Representation, VPolytope, Zonotope};
use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Non-empty, non-comment lines with their 1-based numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('*') && !l.starts_with('#'))
}

fn numbers(line: usize, s: &str) -> Result<Vec<f64>> {
    s.split_whitespace()
        .map(|t| {
            let v = parse_number(t).ok_or_else(|| Error::parse(line, format!("bad number '{t}'")))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::parse(line, format!("non-finite number '{t}'")))
            }
        })
        .collect()
}

/// Decimal or `p/q` rational.
fn parse_number(t: &str) -> Option<f64> {
    match t.split_once('/') {
        Some((p, q)) => Some(p.parse::<f64>().ok()? / q.parse::<f64>().ok()?),
        None => t.parse().ok(),
    }
}

/// Rows between `begin` and `end` after checking the `rows cols type` line.
fn cdd_block(text: &str) -> Result<(usize, Vec<Vec<f64>>)> {
    let mut lines = content_lines(text);
    let mut last = 0;
    loop {
        match lines.next() {
            Some((n, l)) if l.eq_ignore_ascii_case("begin") => {
                last = n;
                break;
            }
            Some((n, _)) => last = n,
            None => return Err(Error::parse(last + 1, "missing 'begin'")),
        }
    }
    let (n, header) = lines.next().ok_or_else(|| Error::parse(last + 1, "missing size line"))?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 3 {
        return Err(Error::parse(n, "expected 'rows cols type'"));
    }
    let rows: usize = parts[0].parse().map_err(|_| Error::parse(n, "bad row count"))?;
    let cols: usize = parts[1].parse().map_err(|_| Error::parse(n, "bad column count"))?;
    if !matches!(parts[2], "real" | "integer" | "rational") {
        return Err(Error::parse(n, format!("unsupported number type '{}'", parts[2])));
    }
    if cols < 2 {
        return Err(Error::parse(n, "need at least two columns"));
    }
    let mut out = Vec::with_capacity(rows);
    let mut last = n;
    for _ in 0..rows {
        let (n, l) = lines
            .next()
            .ok_or_else(|| Error::parse(last + 1, format!("expected {rows} rows")))?;
        last = n;
        if l.eq_ignore_ascii_case("end") {
            return Err(Error::parse(n, format!("expected {rows} rows, found {}", out.len())));
        }
        let row = numbers(n, l)?;
        if row.len() != cols {
            return Err(Error::parse(n, format!("expected {cols} entries, found {}", row.len())));
        }
        out.push(row);
    }
    match lines.next() {
        Some((_, l)) if l.eq_ignore_ascii_case("end") => Ok((cols, out)),
        Some((n, _)) => Err(Error::parse(n, "expected 'end'")),
        None => Err(Error::parse(last + 1, "missing 'end'")),
    }
}

fn invalid_at(line: usize) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::Parse { .. } => e,
        other => Error::parse(line, other.to_string()),
    }
}

/// Rows `b  −a₁ … −a_d` for `a·x ≤ b`.
pub fn parse_ine(text: &str) -> Result<HPolytope> {
    let (cols, rows) = cdd_block(text)?;
    let d = cols - 1;
    let b: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let a: Vec<Vec<f64>> = rows.iter().map(|r| r[1..].iter().map(|v| -v).collect()).collect();
    if a.is_empty() {
        return Err(Error::parse(1, "no inequalities"));
    }
    let a = Matrix::from_rows(&a)?;
    debug_assert_eq!(a.cols(), d);
    HPolytope::new(a, b).map_err(invalid_at(1))
}

/// Rows `1  v₁ … v_d`.
pub fn parse_ext(text: &str) -> Result<VPolytope> {
    let (_, rows) = cdd_block(text)?;
    if rows.iter().any(|r| r[0] != 1.0) {
        return Err(Error::parse(1, "only vertices (leading 1) are supported, not rays"));
    }
    let v: Vec<Vec<f64>> = rows.iter().map(|r| r[1..].to_vec()).collect();
    if v.is_empty() {
        return Err(Error::parse(1, "no vertices"));
    }
    VPolytope::new(Matrix::from_rows(&v)?).map_err(invalid_at(1))
}

/// `d k` then `k` generator rows of length `d`.
pub fn parse_zonotope(text: &str) -> Result<Zonotope> {
    let mut lines = content_lines(text);
    let (n, header) = lines.next().ok_or_else(|| Error::parse(1, "empty zonotope file"))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| Error::parse(n, format!("bad size '{t}'"))))
        .collect::<Result<_>>()?;
    let [d, k] = dims[..] else {
        return Err(Error::parse(n, "expected 'd k'"));
    };
    let mut gens = Vec::with_capacity(k);
    let mut last = n;
    for _ in 0..k {
        let (n, l) = lines
            .next()
            .ok_or_else(|| Error::parse(last + 1, format!("expected {k} generators")))?;
        last = n;
        let g = numbers(n, l)?;
        if g.len() != d {
            return Err(Error::parse(n, format!("expected {d} entries, found {}", g.len())));
        }
        gens.push(g);
    }
    if let Some((n, _)) = lines.next() {
        return Err(Error::parse(n, "trailing content"));
    }
    if gens.is_empty() {
        return Err(Error::parse(n, "no generators"));
    }
    Zonotope::new(Matrix::from_cols(&gens)?).map_err(invalid_at(n))
}

fn push_row(out: &mut String, lead: f64, rest: impl Iterator<Item = f64>) {
    let _ = write!(out, "{lead}");
    for v in rest {
        let _ = write!(out, " {v}");
    }
    out.push('\n');
}

pub fn write_ine(p: &HPolytope, name: &str) -> String {
    let (m, d) = (p.num_facets(), p.dim());
    let mut out = format!("{name}\nH-representation\nbegin\n{m} {} real\n", d + 1);
    for (row, b) in p.a().row_iter().zip(p.b()) {
        push_row(&mut out, *b, row.iter().map(|v| if *v == 0.0 { 0.0 } else { -v }));
    }
    out.push_str("end\n");
    out
}

pub fn write_ext(p: &VPolytope, name: &str) -> String {
    let (n, d) = (p.num_vertices(), p.dim());
    let mut out = format!("{name}\nV-representation\nbegin\n{n} {} real\n", d + 1);
    for row in p.vertices().row_iter() {
        push_row(&mut out, 1.0, row.iter().copied());
    }
    out.push_str("end\n");
    out
}

pub fn write_zonotope(z: &Zonotope) -> String {
    let g = z.generators();
    let mut out = format!("{} {}\n", z.dim(), z.num_generators());
    for j in 0..g.cols() {
        let col = g.col(j);
        push_row(&mut out, col[0], col[1..].iter().copied());
    }
    out
}

pub fn parse_polytope(text: &str, rep: Representation) -> Result<Polytope> {
    Ok(match rep {
        Representation::H => Polytope::H(parse_ine(text)?),
        Representation::V => Polytope::V(parse_ext(text)?),
        Representation::Z => Polytope::Z(parse_zonotope(text)?),
    })
}

pub fn write_polytope(p: &Polytope, name: &str) -> String {
    match p {
        Polytope::H(h) => write_ine(h, name),
        Polytope::V(v) => write_ext(v, name),
        Polytope::Z(z) => write_zonotope(z),
    }
}

pub fn read_polytope(path: &Path, rep: Representation) -> Result<Polytope> {
    parse_polytope(&std::fs::read_to_string(path)?, rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;

    #[test]
    fn cube_ine() {
        let text = "cube\nH-representation\nbegin\n 4 3 real\n 1 -1 0\n 1 0 -1\n 1 1 0\n 1 0 1\nend\n";
        let p = parse_ine(text).unwrap();
        assert_eq!(p.num_facets(), 4);
        assert_eq!(p.a().row(0), &[1.0, 0.0]);
        assert_eq!(p.a().row(2), &[-1.0, 0.0]);
        assert_eq!(p.b(), &[1.0; 4]);
    }

    #[test]
    fn ext_with_rationals() {
        let text = "tri\nbegin\n3 3 rational\n1 0 0\n1 1/2 0\n1 0 1/4\nend\n";
        let p = parse_ext(text).unwrap();
        assert_eq!(p.vertices().row(1), &[0.5, 0.0]);
        assert_eq!(p.vertices().row(2), &[0.0, 0.25]);
    }

    #[test]
    fn parse_errors_carry_lines() {
        let bad = "x\nbegin\n2 3 real\n1 -1 0\n1 abc 0\nend\n";
        assert!(matches!(parse_ine(bad), Err(Error::Parse { line: 5, .. })));
        assert!(matches!(parse_ine("no block here\n"), Err(Error::Parse { .. })));
        assert!(matches!(parse_ine("x\nbegin\n1 3 real\n1 0 0 0\nend\n"), Err(Error::Parse { line: 4, .. })));
        assert!(matches!(parse_ext("x\nbegin\n1 2 real\n0 1\nend\n"), Err(Error::Parse { .. })));
        assert!(matches!(parse_zonotope("2 2\n1 0\n"), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(parse_zonotope("2 2\n1 0\n2 0\n"), Err(Error::Parse { .. })));
    }

    #[test]
    fn zonotope_rows_are_generators() {
        let z = parse_zonotope("2 3\n1 0\n0 1\n1 1\n").unwrap();
        assert_eq!(z.generators().col(2), vec![1.0, 1.0]);
    }

    #[test]
    fn writers_round_trip() {
        let mut rng = crate::sampling::RngStream::new(3);
        let h = gen::rh(4, 9, &mut rng).unwrap();
        assert_eq!(parse_ine(&write_ine(&h, "rh")).unwrap(), h);
        let v = gen::rv(3, 7, &mut rng).unwrap();
        assert_eq!(parse_ext(&write_ext(&v, "rv")).unwrap(), v);
        let z = gen::zono(3, 6, &mut rng).unwrap();
        assert_eq!(parse_zonotope(&write_zonotope(&z)).unwrap(), z);
    }
}
