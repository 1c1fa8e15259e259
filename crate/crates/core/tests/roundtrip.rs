use polyvol::bodies::Polytope;
use polyvol::io;
use polyvol::linalg::Matrix;
use polyvol::sampling::RngStream;
use polyvol::{gen, HPolytope, Representation, VPolytope, Zonotope};
use proptest::prelude::*;

fn close(a: &Matrix, b: &Matrix) -> bool {
    a.rows() == b.rows()
        && a.cols() == b.cols()
        && a.as_slice().iter().zip(b.as_slice()).all(|(x, y)| (x - y).abs() <= 1e-12 * (1.0 + x.abs()))
}

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = Matrix> {
    prop::collection::vec(-1e3f64..1e3, rows * cols).prop_map(move |v| Matrix::from_vec(rows, cols, v).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ine_round_trip(a in matrix(7, 3), b in prop::collection::vec(0.1f64..10.0, 7)) {
        let Ok(p) = HPolytope::new(a, b) else { return Ok(()) };
        let q = io::parse_ine(&io::write_ine(&p, "x")).unwrap();
        prop_assert!(close(p.a(), q.a()));
        prop_assert!(p.b().iter().zip(q.b()).all(|(x, y)| (x - y).abs() <= 1e-12 * (1.0 + x.abs())));
    }

    #[test]
    fn ext_round_trip(v in matrix(6, 3)) {
        let Ok(p) = VPolytope::new(v) else { return Ok(()) };
        let q = io::parse_ext(&io::write_ext(&p, "x")).unwrap();
        prop_assert!(close(p.vertices(), q.vertices()));
    }

    #[test]
    fn zonotope_round_trip(g in matrix(3, 5)) {
        let Ok(z) = Zonotope::new(g) else { return Ok(()) };
        let w = io::parse_zonotope(&io::write_zonotope(&z)).unwrap();
        prop_assert!(close(z.generators(), w.generators()));
    }
}

#[test]
fn files_on_disk_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = RngStream::new(4);
    let cases = [
        (Polytope::H(gen::rh(5, 12, &mut rng).unwrap()), Representation::H, "rh.ine"),
        (Polytope::V(gen::rv(4, 10, &mut rng).unwrap()), Representation::V, "rv.ext"),
        (Polytope::Z(gen::zono(5, 10, &mut rng).unwrap()), Representation::Z, "z.txt"),
    ];
    for (p, rep, name) in cases {
        let path = dir.path().join(name);
        std::fs::write(&path, io::write_polytope(&p, name)).unwrap();
        let q = io::read_polytope(&path, rep).unwrap();
        match (&p, &q) {
            (Polytope::H(a), Polytope::H(b)) => assert_eq!(a, b),
            (Polytope::V(a), Polytope::V(b)) => assert_eq!(a, b),
            (Polytope::Z(a), Polytope::Z(b)) => assert_eq!(a, b),
            _ => panic!("representation changed"),
        }
    }
}

#[test]
fn missing_file_is_io_error() {
    let err = io::read_polytope(std::path::Path::new("/nonexistent/p.ine"), Representation::H).unwrap_err();
    assert!(matches!(err, polyvol::Error::Io(_)));
}
