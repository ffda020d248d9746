//! `isoflag` command line: classification, canonical forms, enumeration
//! and the verification suites. Reports go to stdout as JSON with sorted
//! keys; timings go to stderr.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use isoflag::canonical::{canonicalize, normalize_pair};
use isoflag::classifier::{equality_catalogue_with, is_finite_type, TripleType};
use isoflag::form::parse_flag_file;
use isoflag::oracle::reduction::RankOneCase;
use isoflag::oracle::Budget;
use isoflag::suites;
use isoflag::witness::{build_family, stabilizer_rigidity, verify_separation, FamilyName};
use isoflag::{enumerate_tuples, Error, Gf3, Gf5, Gf7, Mat, PairShape, Scalar, Subspace};

#[derive(Parser)]
#[command(name = "isoflag", version, about = "Orbits on triple flag varieties of O(2n+1)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SquareClasses {
    Finite,
    Infinite,
}

#[derive(Clone, Copy, ValueEnum)]
enum What {
    Shapes,
    Tuples,
    Catalogue,
    Family,
}

#[derive(Subcommand)]
enum Command {
    /// Decide finite type of 𝒯_{a,b,c}.
    Classify {
        /// Composition: comma-separated parts, `n`, or `k^m` (m copies of k).
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long)]
        c: String,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value = "finite")]
        square_classes: SquareClasses,
    },
    /// Carry (U₊, U₋, V) to (model pair, representative).
    Canonicalize {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: u64,
        /// Flag file with the two pair members.
        #[arg(long)]
        pair: PathBuf,
        /// Flag file with V.
        #[arg(long)]
        v: PathBuf,
    },
    /// Run a verification suite; exit 0 iff it passes.
    Verify {
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        p: u64,
        /// Required by randomized suites.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        /// Family for the separation and rigidity suites.
        #[arg(long)]
        family: Option<String>,
        /// Case for the rank-one suite (b4, b11, b15, b8, b13); all if absent.
        #[arg(long)]
        case: Option<String>,
        #[arg(long, default_value_t = 2)]
        alpha: usize,
        #[arg(long, default_value_t = 0)]
        b3: usize,
    },
    /// List shapes, tuples, catalogue entries or family members.
    Enumerate {
        #[arg(long, value_enum)]
        what: What,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        p: u64,
        #[arg(long)]
        alpha: Option<usize>,
        #[arg(long)]
        beta: Option<usize>,
        #[arg(long)]
        family: Option<String>,
        /// Include triples that need finitely many square classes.
        #[arg(long)]
        finite_square_classes: bool,
    },
}

enum Failure {
    Input(String),
    Stage(String),
    Mismatch(Value),
    Budget(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Stage { .. } => Failure::Stage(e.to_string()),
            Error::Budget { .. } => Failure::Budget(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

type Outcome = Result<Value, Failure>;

macro_rules! with_field {
    ($p:expr, $t:ident, $body:expr) => {
        match $p {
            3 => {
                type $t = Gf3;
                $body
            }
            5 => {
                type $t = Gf5;
                $body
            }
            7 => {
                type $t = Gf7;
                $body
            }
            other => Err(Failure::Input(format!("unsupported prime {other}; use 3, 5 or 7"))),
        }
    };
}

fn parse_composition(s: &str, n: usize) -> Result<Vec<usize>, Failure> {
    let num = |t: &str| -> Result<usize, Failure> {
        let t = t.trim();
        if t == "n" {
            Ok(n)
        } else {
            t.parse().map_err(|_| Failure::Input(format!("bad composition part {t:?}")))
        }
    };
    let mut out = Vec::new();
    for part in s.split(',') {
        match part.split_once('^') {
            Some((k, m)) => {
                let k = num(k)?;
                out.extend(std::iter::repeat_n(k, num(m)?));
            }
            None => out.push(num(part)?),
        }
    }
    if out.is_empty() || out.contains(&0) {
        return Err(Failure::Input(format!("composition {s:?} needs positive parts")));
    }
    Ok(out)
}

fn to_json<S: serde::Serialize>(x: &S) -> Value {
    serde_json::to_value(x).expect("reports serialize")
}

fn mat_json<T: Scalar>(m: &Mat<T>) -> Value {
    let rows: Vec<Vec<String>> = (0..m.rows()).map(|i| (0..m.cols()).map(|j| m.get(i, j).to_string()).collect()).collect();
    json!(rows)
}

fn pass_or_mismatch(v: Value, pass: bool) -> Outcome {
    if pass {
        Ok(v)
    } else {
        Err(Failure::Mismatch(v))
    }
}

fn classify(a: &str, b: &str, c: &str, n: usize, sq: SquareClasses) -> Outcome {
    let t = TripleType::new(parse_composition(a, n)?, parse_composition(b, n)?, parse_composition(c, n)?, n)?;
    let v = is_finite_type(&t, matches!(sq, SquareClasses::Finite));
    Ok(to_json(&v))
}

fn read(path: &PathBuf) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn canonicalize_files<T: Scalar>(n: usize, pair: &PathBuf, v: &PathBuf) -> Outcome {
    let (n1, pm) = parse_flag_file::<T>(&read(pair)?)?;
    let (n2, vm) = parse_flag_file::<T>(&read(v)?)?;
    if n1 != n || n2 != n {
        return Err(Failure::Input(format!("files are for n = {n1} and {n2}, expected {n}")));
    }
    if pm.len() != 2 || vm.len() != 1 {
        return Err(Failure::Input("pair file needs two members and V file one".into()));
    }
    let big = 2 * n + 1;
    let sub = |m: &Mat<T>| Subspace::span(big, &(0..m.rows()).map(|i| (0..big).map(|j| m.get(i, j).clone()).collect()).collect::<Vec<_>>());
    let (up, um, vv) = (sub(&pm[0]), sub(&pm[1]), sub(&vm[0]));
    let (g0, shape) = normalize_pair(&up, &um)?;
    let c = canonicalize(&g0.apply(&up), &g0.apply(&um), &g0.apply(&vv))?;
    let g = c.element.mat().mul(g0.mat());
    let stages: Vec<Value> = c.trace.stages.iter().map(|s| json!({"label": s.label, "g": mat_json(s.element.mat())})).collect();
    Ok(json!({
        "shape": to_json(&shape),
        "tuple": to_json(&c.tuple),
        "normalizer": mat_json(g0.mat()),
        "g": mat_json(&g),
        "representative": mat_json(c.representative.basis()),
        "stages": stages,
    }))
}

fn family_arg(f: &Option<String>) -> Result<FamilyName, Failure> {
    f.as_deref().ok_or_else(|| Failure::Input("--family is required".into()))?.parse::<FamilyName>().map_err(Failure::from)
}

#[allow(clippy::too_many_arguments)]
fn verify<T: Scalar>(suite: &str, n: usize, seed: Option<u64>, samples: usize, family: &Option<String>, case: &Option<String>, alpha: usize, b3: usize, budget: &Budget) -> Outcome {
    match suite {
        "pair-orbits" => {
            let r = suites::pair_orbits::<T>(n, budget)?;
            pass_or_mismatch(to_json(&r), r.pass)
        }
        "round-trip" => {
            let r = suites::round_trip::<T>(n)?;
            pass_or_mismatch(to_json(&r), r.pass)
        }
        "canonicalize-sweep" => {
            let r = suites::canonicalize_sweep::<T>(n, budget)?;
            pass_or_mismatch(to_json(&r), r.pass)
        }
        "canonicalize-random" => {
            let seed = seed.ok_or_else(|| Failure::Input("canonicalize-random needs --seed".into()))?;
            let r = suites::canonicalize_random::<T>(n, samples, seed)?;
            pass_or_mismatch(to_json(&r), r.pass)
        }
        "double-cosets" => {
            let r = suites::double_cosets::<T>(n, budget)?;
            pass_or_mismatch(to_json(&r), r.pass)
        }
        "grassmann" => {
            let r = suites::grassmann::<T>(n.max(2), budget)?;
            pass_or_mismatch(to_json(&r), r.pass)
        }
        "rank-one" => match case {
            None => {
                let r = suites::rank_one::<T>(budget)?;
                pass_or_mismatch(to_json(&r), r.pass)
            }
            Some(c) => {
                let c: RankOneCase = c.parse()?;
                let r = isoflag::oracle::reduction::rank_one_case_count::<T>(c, n, alpha, b3, budget)?;
                pass_or_mismatch(to_json(&r), r.matches)
            }
        },
        "separation" => {
            let r = verify_separation::<T>(family_arg(family)?, budget)?;
            pass_or_mismatch(to_json(&r), r.predicate_match && r.equivalence)
        }
        "rigidity" => {
            let r = stabilizer_rigidity::<T>(family_arg(family)?, budget)?;
            pass_or_mismatch(to_json(&r), r.plus_minus_identity)
        }
        "equality-catalogue" => {
            let r = suites::catalogue(n);
            pass_or_mismatch(to_json(&r), r.pass)
        }
        "dichotomy" => {
            let r = suites::dichotomy(budget)?;
            pass_or_mismatch(to_json(&r), r.pass)
        }
        other => Err(Failure::Input(format!(
            "unknown suite {other:?}; expected one of pair-orbits, round-trip, canonicalize-sweep, canonicalize-random, \
             double-cosets, grassmann, rank-one, separation, rigidity, equality-catalogue, dichotomy"
        ))),
    }
}

fn shapes_for(n: usize, alpha: Option<usize>, beta: Option<usize>) -> Vec<PairShape> {
    suites::all_shapes(n)
        .into_iter()
        .filter(|s| alpha.is_none_or(|a| s.a0 + s.ap + s.a1 == a) && beta.is_none_or(|b| s.a0 + s.am + s.a1 == b))
        .collect()
}

fn enumerate<T: Scalar>(what: What, n: usize, alpha: Option<usize>, beta: Option<usize>, family: &Option<String>, sq: bool) -> Outcome {
    match what {
        What::Shapes => Ok(to_json(&shapes_for(n, alpha, beta))),
        What::Tuples => {
            let out: Vec<Value> = shapes_for(n, alpha, beta)
                .iter()
                .map(|s| json!({"shape": to_json(s), "tuples": to_json(&enumerate_tuples(s))}))
                .collect();
            Ok(json!(out))
        }
        What::Catalogue => {
            let out: Vec<Value> = equality_catalogue_with(n, sq).iter().map(|t| json!({"n": t.n, "triple": t.to_string()})).collect();
            Ok(json!(out))
        }
        What::Family => {
            let f = family_arg(family)?;
            let params: Vec<Option<T>> = if f.has_parameter() {
                T::elements().expect("finite field").into_iter().map(Some).collect()
            } else {
                vec![None]
            };
            let mut out = Vec::new();
            for l in params {
                let label = l.as_ref().map(|x| x.to_string());
                match build_family::<T>(f, n, l) {
                    Ok(flags) => {
                        let fl: Vec<Vec<Value>> =
                            flags.iter().map(|fl| fl.spaces().iter().map(|s| mat_json(s.basis())).collect()).collect();
                        out.push(json!({"lambda": label, "flags": fl}));
                    }
                    Err(Error::Invalid(_)) if label.is_some() => continue,
                    Err(e) => return Err(e.into()),
                }
            }
            Ok(json!({"family": f.to_string(), "n": n, "members": out}))
        }
    }
}

fn run(cli: Cli) -> Outcome {
    let budget = Budget::from_env();
    match cli.command {
        Command::Classify { a, b, c, n, square_classes } => classify(&a, &b, &c, n, square_classes),
        Command::Canonicalize { n, p, pair, v } => with_field!(p, F, canonicalize_files::<F>(n, &pair, &v)),
        Command::Verify { suite, n, p, seed, samples, family, case, alpha, b3 } => {
            with_field!(p, F, verify::<F>(&suite, n, seed, samples, &family, &case, alpha, b3, &budget))
        }
        Command::Enumerate { what, n, p, alpha, beta, family, finite_square_classes } => {
            with_field!(p, F, enumerate::<F>(what, n, alpha, beta, &family, finite_square_classes))
        }
    }
}

fn print(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("json"));
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let out = run(cli);
    eprintln!("elapsed: {:.3}s", start.elapsed().as_secs_f64());
    match out {
        Ok(v) => {
            print(&v);
            ExitCode::SUCCESS
        }
        Err(Failure::Input(m)) => {
            eprintln!("input error: {m}");
            print(&json!({"error": "input", "detail": m}));
            ExitCode::from(2)
        }
        Err(Failure::Stage(m)) => {
            eprintln!("stage failure: {m}");
            print(&json!({"error": "stage", "detail": m}));
            ExitCode::from(3)
        }
        Err(Failure::Mismatch(v)) => {
            eprintln!("verification mismatch");
            print(&v);
            ExitCode::from(4)
        }
        Err(Failure::Budget(m)) => {
            eprintln!("budget exceeded: {m}");
            print(&json!({"error": "budget", "detail": m}));
            ExitCode::from(5)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn composition_sugar() {
        assert!(matches!(parse_composition("1^3", 3), Ok(v) if v == vec![1, 1, 1]));
        assert!(matches!(parse_composition("n", 4), Ok(v) if v == vec![4]));
        assert!(matches!(parse_composition("1^n", 2), Ok(v) if v == vec![1, 1]));
        assert!(matches!(parse_composition("2,1", 3), Ok(v) if v == vec![2, 1]));
        assert!(parse_composition("0,1", 3).is_err());
        assert!(parse_composition("x", 3).is_err());
    }
}
