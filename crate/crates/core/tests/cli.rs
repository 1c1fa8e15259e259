use std::process::{Command, Output};

use serde_json::Value;

fn polyvol(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polyvol"))
        .args(args)
        .env("POLYVOL_THREADS", "2")
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn cube_volume_json() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("cube10.ine");
    let o = polyvol(&["generate", "cube", "10", "--out", file.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let o = polyvol(&["volume", "--rep", "h", "--file", file.to_str().unwrap(), "--error", "0.1", "--seed", "7", "--json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    let vol = report["volume"].as_f64().unwrap();
    assert!((vol / 1024.0 - 1.0).abs() < 0.3, "{vol}");
    assert_eq!(report["seed"], 7);
}

#[test]
fn repetitions_use_derived_seeds_in_order() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("z.txt");
    assert_eq!(code(&polyvol(&["generate", "z", "3", "6", "--seed", "1", "-o", file.to_str().unwrap()])), 0);
    let o = polyvol(&["volume", "--rep", "z", "--file", file.to_str().unwrap(), "--seed", "40", "--reps", "3", "--json"]);
    assert_eq!(code(&o), 0);
    let seeds: Vec<u64> = String::from_utf8(o.stdout)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str::<Value>(l).unwrap()["seed"].as_u64().unwrap())
        .collect();
    assert_eq!(seeds, [40, 41, 42]);
}

#[test]
fn exit_codes() {
    assert_eq!(code(&polyvol(&["volume", "--rep", "h", "--file", "/nonexistent.ine"])), 2);

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.ine");
    std::fs::write(&bad, "x\nbegin\n2 3 real\n1 -1 zz\nend\n").unwrap();
    let o = polyvol(&["volume", "--rep", "h", "--file", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 4"));

    assert_eq!(code(&polyvol(&["volume", "--rep", "x", "--file", "a"])), 2);

    // An invalid error bound is neither a parse nor a schedule failure.
    let good = dir.path().join("c.ine");
    assert_eq!(code(&polyvol(&["generate", "cube", "2", "-o", good.to_str().unwrap()])), 0);
    assert_eq!(code(&polyvol(&["volume", "--rep", "h", "--file", good.to_str().unwrap(), "--error", "3"])), 1);
}

#[test]
fn generated_files_parse() {
    let dir = tempfile::tempdir().unwrap();
    for (args, rep) in [
        (vec!["generate", "z", "5", "10", "--seed", "1"], "z"),
        (vec!["generate", "rh", "4", "12"], "h"),
        (vec!["generate", "rv", "4", "12"], "v"),
        (vec!["generate", "simplex", "4"], "v"),
    ] {
        let file = dir.path().join("p");
        let mut a = args.clone();
        a.extend(["--out", file.to_str().unwrap()]);
        assert_eq!(code(&polyvol(&a)), 0);
        let o = polyvol(&["volume", "--rep", rep, "--file", file.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn reduce_reads_files() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("z-4-8.gen");
    assert_eq!(code(&polyvol(&["generate", "z", "4", "8", "-o", file.to_str().unwrap()])), 0);
    let o = polyvol(&["reduce", "--file", file.to_str().unwrap(), "--seed", "3"]);
    assert_eq!(code(&o), 0);
    let row: Value = serde_json::from_slice(&o.stdout).unwrap();
    for key in ["instance", "d", "k", "order", "vol_p_log", "vol_red_log", "R", "time_seconds"] {
        assert!(row.get(key).is_some(), "{key}");
    }
    assert_eq!(row["instance"], "z-4-8");
    assert!(row["R"].as_f64().unwrap() >= 0.8);
}
