//! Command-line frontend.
//!
//! Exit codes: 0 success, 2 unreadable or malformed input (including bad
//! flags), 3 the annealing schedule did not terminate, 1 anything else.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use crate::bodies::{Polytope, Representation};
use crate::error::{Error, Result};
use crate::estimate::{volume, BodyChoice, VolumeConfig, VolumeReport};
use crate::sampling::{RngStream, WalkMode};
use crate::{gen, io, oracle, zonored};

pub const THREADS_ENV: &str = "POLYVOL_THREADS";

#[derive(Parser, Debug)]
#[command(name = "polyvol", version, about = "Randomized volume approximation of convex polytopes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Estimate the volume of a polytope read from a file.
    Volume(VolumeArgs),
    /// Write a generated polytope in the matching file format.
    Generate(GenerateArgs),
    /// PCA order reduction fitness of zonotopes, one JSON row per instance.
    Reduce(ReduceArgs),
    /// Run a named family over a list of dimensions and print CSV.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum RepArg {
    H,
    V,
    Z,
}

impl From<RepArg> for Representation {
    fn from(r: RepArg) -> Self {
        match r {
            RepArg::H => Representation::H,
            RepArg::V => Representation::V,
            RepArg::Z => Representation::Z,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum WalkArg {
    Cdhr,
    Rdhr,
    /// CDHR for H-polytopes, RDHR otherwise.
    Auto,
}

impl WalkArg {
    fn mode(self) -> Option<WalkMode> {
        match self {
            Self::Cdhr => Some(WalkMode::Cdhr),
            Self::Rdhr => Some(WalkMode::Rdhr),
            Self::Auto => None,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum BodyArg {
    Ball,
    Hpoly,
    Auto,
}

impl From<BodyArg> for BodyChoice {
    fn from(b: BodyArg) -> Self {
        match b {
            BodyArg::Ball => BodyChoice::Ball,
            BodyArg::Hpoly => BodyChoice::Hpoly,
            BodyArg::Auto => BodyChoice::Auto,
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    /// Target relative error.
    #[arg(long = "error", default_value_t = 0.1)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = WalkArg::Auto)]
    pub walk: WalkArg,
    #[arg(long, value_enum, default_value_t = BodyArg::Auto)]
    pub body: BodyArg,
    /// Round V-polytopes by their enclosing ellipsoid first.
    #[arg(long)]
    pub round: bool,
}

impl RunArgs {
    fn config(&self) -> VolumeConfig {
        VolumeConfig {
            epsilon: self.epsilon,
            body: self.body.into(),
            walk: self.walk.mode(),
            seed: self.seed,
            round: self.round,
            ..VolumeConfig::default()
        }
    }
}

#[derive(Args, Debug)]
pub struct VolumeArgs {
    #[arg(long, value_enum)]
    pub rep: RepArg,
    #[arg(long)]
    pub file: PathBuf,
    #[command(flatten)]
    pub run: RunArgs,
    /// Independent repetitions with seeds `seed, seed+1, …`.
    #[arg(long, default_value_t = 1)]
    pub reps: u64,
    /// One JSON report per line instead of a summary.
    #[arg(long)]
    pub json: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Family {
    /// `[−1,1]^d` as an H-polytope.
    Cube,
    /// `[−1,1]^d` by vertices (d ≤ 20).
    CubeV,
    /// Cross polytope by vertices.
    Cross,
    /// `conv{0, e₁, …, e_d}` by vertices.
    Simplex,
    /// The corner simplex as an H-polytope.
    SimplexH,
    /// `n` random halfspaces tangent to the sphere.
    Rh,
    /// `n` random vertices on the sphere.
    Rv,
    /// Random zonotope with `n` generators.
    Z,
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    #[arg(value_enum)]
    pub family: Family,
    pub d: usize,
    /// Facets (rh), vertices (rv) or generators (z).
    pub n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output path; standard output when absent.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ReduceArgs {
    /// Zonotope files.
    #[arg(long)]
    pub file: Vec<PathBuf>,
    /// Generate `--count` random zonotopes with `D K` (seeds `seed, seed+1, …`).
    #[arg(long, num_args = 2, value_names = ["D", "K"])]
    pub random: Option<Vec<usize>>,
    #[arg(long, default_value_t = 1)]
    pub count: u64,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Suite {
    Cubes,
    Crosses,
    Simplices,
    Rv,
    Zonotopes,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[arg(value_enum)]
    pub suite: Suite,
    #[arg(long, value_delimiter = ',', required = true)]
    pub dims: Vec<usize>,
    /// Runs per dimension.
    #[arg(long, default_value_t = 10)]
    pub runs: u64,
    /// Vertices (rv) or generators (zonotopes) per dimension.
    #[arg(long, default_value_t = 2)]
    pub factor: usize,
    #[command(flatten)]
    pub run: RunArgs,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse { .. } | Error::Io(_) => 2,
        Error::ScheduleFailed(_) => 3,
        _ => 1,
    }
}

/// Worker pool honoring `POLYVOL_THREADS`.
fn pool() -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()) {
        b = b.num_threads(n.max(1));
    }
    b.build().map_err(|e| Error::Invalid(format!("thread pool: {e}")))
}

/// Runs `cfg` with seeds `cfg.seed + i`, results in index order.
pub fn repeat(p: &Polytope, cfg: &VolumeConfig, reps: u64) -> Result<Vec<Result<VolumeReport>>> {
    let pool = pool()?;
    Ok(pool.install(|| {
        (0..reps)
            .into_par_iter()
            .map(|i| volume(p, &cfg.with_seed(cfg.seed.wrapping_add(i))))
            .collect()
    }))
}

fn summary(r: &VolumeReport) -> String {
    let vol = r
        .volume
        .map_or_else(|| "underflow".to_string(), |v| format!("{v:.6e}"));
    format!(
        "seed {}: volume {vol} (log {:.6}), m = {}, body {}, walk {}, steps {}, {:.3} s",
        r.seed, r.log_volume, r.m, r.body, r.walk, r.steps_total, r.time_seconds
    )
}

fn cmd_volume(a: &VolumeArgs, out: &mut dyn Write) -> Result<()> {
    let p = io::read_polytope(&a.file, a.rep.into())?;
    let results = repeat(&p, &a.run.config(), a.reps.max(1))?;
    let mut first_err = None;
    for r in results {
        match r {
            Ok(rep) if a.json => writeln!(out, "{}", to_json(&rep)?)?,
            Ok(rep) => writeln!(out, "{}", summary(&rep))?,
            Err(e) => {
                eprintln!("polyvol: {e}");
                first_err.get_or_insert(e);
            }
        }
    }
    first_err.map_or(Ok(()), Err)
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string(v).map_err(|e| Error::Numeric(format!("json: {e}")))
}

pub fn generate(family: Family, d: usize, n: Option<usize>, seed: u64) -> Result<(String, Polytope)> {
    if d == 0 {
        return Err(Error::Invalid("dimension must be positive".into()));
    }
    let mut rng = RngStream::new(seed);
    let need = |what: &str| n.ok_or_else(|| Error::Invalid(format!("{what} needs a count")));
    Ok(match family {
        Family::Cube => (format!("cube-{d}"), Polytope::H(gen::cube(d))),
        Family::CubeV if d > 20 => return Err(Error::Invalid("cube-v is limited to d ≤ 20".into())),
        Family::CubeV => (format!("cube-{d}"), Polytope::V(gen::cube_v(d))),
        Family::Cross => (format!("cross-{d}"), Polytope::V(gen::cross(d))),
        Family::Simplex => (format!("simplex-{d}"), Polytope::V(gen::simplex(d))),
        Family::SimplexH => (format!("simplex-{d}"), Polytope::H(gen::simplex_h(d))),
        Family::Rh => {
            let m = need("rh")?;
            (format!("rh-{d}-{m}"), Polytope::H(gen::rh(d, m, &mut rng)?))
        }
        Family::Rv => {
            let m = need("rv")?;
            (format!("rv-{d}-{m}"), Polytope::V(gen::rv(d, m, &mut rng)?))
        }
        Family::Z => {
            let k = need("z")?;
            (format!("z-{d}-{k}"), Polytope::Z(gen::zono(d, k, &mut rng)?))
        }
    })
}

fn cmd_generate(a: &GenerateArgs, out: &mut dyn Write) -> Result<()> {
    let (name, p) = generate(a.family, a.d, a.n, a.seed)?;
    let text = io::write_polytope(&p, &name);
    match &a.out {
        Some(path) => std::fs::write(path, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

#[derive(Serialize)]
struct ReduceRow {
    instance: String,
    d: usize,
    k: usize,
    order: f64,
    vol_p_log: f64,
    vol_red_log: f64,
    #[serde(rename = "R")]
    r: f64,
    time_seconds: f64,
}

fn cmd_reduce(a: &ReduceArgs, out: &mut dyn Write) -> Result<()> {
    let mut instances = Vec::new();
    for path in &a.file {
        let z = io::parse_zonotope(&std::fs::read_to_string(path)?)?;
        let name = path.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
        instances.push((name, z, a.run.seed));
    }
    if let Some(dk) = &a.random {
        for i in 0..a.count {
            let seed = a.run.seed.wrapping_add(i);
            let z = gen::zono(dk[0], dk[1], &mut RngStream::new(seed))?;
            instances.push((format!("z-{}-{}", dk[0], dk[1]), z, seed));
        }
    }
    if instances.is_empty() {
        return Err(Error::Invalid("nothing to reduce: pass --file or --random".into()));
    }
    let cfg = a.run.config();
    let rows: Vec<Result<ReduceRow>> = pool()?.install(|| {
        instances
            .par_iter()
            .map(|(name, z, seed)| {
                let started = Instant::now();
                let f = zonored::fitness(z, &cfg.with_seed(*seed))?;
                Ok(ReduceRow {
                    instance: name.clone(),
                    d: z.dim(),
                    k: z.num_generators(),
                    order: z.order(),
                    vol_p_log: f.vol_p_log,
                    vol_red_log: f.vol_red_log,
                    r: f.r,
                    time_seconds: started.elapsed().as_secs_f64(),
                })
            })
            .collect()
    });
    for row in rows {
        writeln!(out, "{}", to_json(&row?)?)?;
    }
    Ok(())
}

pub const BENCH_HEADER: &str =
    "instance,d,n,seed,body,walk,m,steps,log_volume,volume,exact_log_volume,error,time_seconds";

fn bench_instance(suite: Suite, d: usize, factor: usize, seed: u64) -> Result<(String, Polytope, Option<f64>)> {
    let (name, p) = match suite {
        Suite::Cubes => generate(Family::Cube, d, None, seed)?,
        Suite::Crosses => generate(Family::Cross, d, None, seed)?,
        Suite::Simplices => generate(Family::Simplex, d, None, seed)?,
        Suite::Rv => generate(Family::Rv, d, Some(factor * d), seed)?,
        Suite::Zonotopes => generate(Family::Z, d, Some(factor * d), seed)?,
    };
    let exact = match (suite, &p) {
        (Suite::Cubes, _) => Some(oracle::exact_cube(d)),
        (Suite::Crosses, _) => Some(oracle::exact_cross(d)),
        (Suite::Simplices, _) => Some(oracle::exact_simplex(d)),
        (Suite::Zonotopes, Polytope::Z(z)) => oracle::exact_zonotope(z).ok(),
        _ => None,
    };
    Ok((name, p, exact))
}

fn opt(v: Option<f64>, f: impl Fn(f64) -> String) -> String {
    v.map_or_else(String::new, f)
}

fn cmd_bench(a: &BenchArgs, out: &mut dyn Write) -> Result<()> {
    let cfg = a.run.config();
    writeln!(out, "{BENCH_HEADER}")?;
    let mut first_err = None;
    for &d in &a.dims {
        // One instance per dimension, repeated runs on it.
        let (name, p, exact) = bench_instance(a.suite, d, a.factor, a.run.seed)?;
        for r in repeat(&p, &cfg, a.runs.max(1))? {
            let r = match r {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("polyvol: {name}: {e}");
                    first_err.get_or_insert(e);
                    continue;
                }
            };
            let err = exact.map(|x| (r.log_volume - x).exp() - 1.0);
            writeln!(
                out,
                "{name},{d},{},{},{},{},{},{},{:.9},{},{},{},{:.4}",
                p.size(),
                r.seed,
                r.body,
                r.walk,
                r.m,
                r.steps_total,
                r.log_volume,
                opt(r.volume, |v| format!("{v:.6e}")),
                opt(exact, |v| format!("{v:.9}")),
                opt(err, |v| format!("{v:.6}")),
                r.time_seconds
            )?;
        }
    }
    first_err.map_or(Ok(()), Err)
}

/// Parses `args` (program name first) and runs the command; returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let res = match &cli.command {
        Command::Volume(a) => cmd_volume(a, out),
        Command::Generate(a) => cmd_generate(a, out),
        Command::Reduce(a) => cmd_reduce(a, out),
        Command::Bench(a) => cmd_bench(a, out),
    };
    match res {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("polyvol: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String) {
        let mut out = Vec::new();
        let code = run(std::iter::once("polyvol").chain(args.iter().copied()), &mut out);
        (code, String::from_utf8(out).unwrap())
    }

    #[test]
    fn generate_to_stdout_parses_back() {
        let (code, text) = run_str(&["generate", "z", "5", "10", "--seed", "1"]);
        assert_eq!(code, 0);
        let z = io::parse_zonotope(&text).unwrap();
        assert_eq!((z.dim(), z.num_generators()), (5, 10));
        let (code, text) = run_str(&["generate", "cube", "3"]);
        assert_eq!(code, 0);
        assert_eq!(io::parse_ine(&text).unwrap().num_facets(), 6);
    }

    #[test]
    fn generate_needs_count() {
        assert_eq!(run_str(&["generate", "rv", "3"]).0, 1);
        assert_eq!(run_str(&["generate", "cube-v", "25"]).0, 1);
    }

    #[test]
    fn bad_flags_exit_2() {
        assert_eq!(run_str(&["volume", "--rep", "q", "--file", "x"]).0, 2);
        assert_eq!(run_str(&["bench", "cubes"]).0, 2);
        assert_eq!(run_str(&["--help"]).0, 0);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::parse(3, "x")), 2);
        assert_eq!(exit_code(&Error::ScheduleFailed("x".into())), 3);
        assert_eq!(exit_code(&Error::Empty), 1);
    }

    #[test]
    fn bench_rows() {
        let (code, text) = run_str(&["bench", "crosses", "--dims", "3,4", "--runs", "2", "--seed", "5"]);
        assert_eq!(code, 0);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], BENCH_HEADER);
        assert_eq!(lines.len(), 5);
        let cols: Vec<&str> = lines[2].split(',').collect();
        assert_eq!(cols.len(), BENCH_HEADER.split(',').count());
        assert_eq!((cols[0], cols[3]), ("cross-3", "6"));
        let err: f64 = cols[11].parse().unwrap();
        assert!(err.abs() < 0.3, "{err}");
    }

    #[test]
    fn reduce_random_rows() {
        let (code, text) = run_str(&["reduce", "--random", "3", "6", "--count", "2"]);
        assert_eq!(code, 0);
        let rows: Vec<serde_json::Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
        assert_eq!(rows.len(), 2);
        for r in rows {
            assert_eq!(r["instance"], "z-3-6");
            assert_eq!(r["order"], 2.0);
            assert!(r["R"].as_f64().unwrap() > 0.9);
        }
    }
}
