//! `radlen`: validate Lie algebra inputs, compute radicals, evaluate the
//! distortion length function and run verification suites.

use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use radlen::algebra::{complement_v, f_basis_weights};
use radlen::distortion::{classify_with, ray_profile, tgrid, CLASSIFY_THRESHOLD, DEFAULT_GRID_POINTS, DEFAULT_TMAX};
use radlen::fixtures::{self, Fixture};
use radlen::group::GroupElement;
use radlen::io::{parse_fixture, vec_json, AlgebraDoc, NumJson, ScalarJson};
use radlen::length::phi_build;
use radlen::linalg::Subspace;
use radlen::scalar::{unit_vec, Gq, QVec};
use radlen::suites::{self, Suite, SuiteConfig, DEFAULT_SEED};
use radlen::{Error, Result};

const EXIT_VALIDATION: u8 = 2;
const EXIT_CONFIG: u8 = 3;
const EXIT_SUITE: u8 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "radlen",
    version,
    about = "Radicals and exponentially distorted length functions of linear Lie groups"
)]
struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Largest ray parameter and sample scale.
    #[arg(long, global = true, default_value_t = DEFAULT_TMAX)]
    tmax: f64,
    #[arg(long, global = true, default_value_t = DEFAULT_GRID_POINTS)]
    grid_points: usize,
    /// Residual threshold of the distortion classifier.
    #[arg(long, global = true, default_value_t = CLASSIFY_THRESHOLD)]
    threshold: f64,
    #[arg(long, global = true, value_enum, default_value_t = Output::Json)]
    output: Output,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Output {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the algebra, representation, Levi complement and named ideals.
    Validate {
        /// A JSON file, or the name of a built-in fixture.
        input: String,
        /// Fail when the input has no representation.
        #[arg(long)]
        require_rep: bool,
    },
    /// Solvable, nilpotent and exponential radicals with a Cartan subalgebra.
    Radicals { input: String },
    /// Evaluate φ at a point or along a ray.
    Phi {
        input: String,
        /// Name of the ideal 𝔫′ among the input's subgroups.
        #[arg(long, default_value = "N")]
        nprime: String,
        /// Exponential coordinates `x1,x2,…`; `;` separates the letters of a word.
        #[arg(long, conflicts_with = "ray")]
        eval: Option<String>,
        /// A basis name, `t<k>` for the k-th basis vector, or coordinates.
        #[arg(long)]
        ray: Option<String>,
    },
    /// Run a named verification suite.
    Verify {
        input: String,
        /// decomposition, pi, distortion, maximality or separation.
        #[arg(long)]
        suite: String,
        /// Samples per check.
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
}

struct Loaded {
    fixture: Fixture,
    digest: String,
    source: String,
}

fn load(input: &str) -> Result<Loaded> {
    let path = Path::new(input);
    if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {input}: {e}")))?;
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("input");
        let fixture = parse_fixture(&text, stem)?;
        return Ok(Loaded { fixture, digest: sha256(text.as_bytes()), source: input.to_string() });
    }
    let fixture = fixtures::by_name(input).ok_or_else(|| {
        Error::Config(format!(
            "{input:?} is neither a readable file nor a built-in fixture ({})",
            fixtures::NAMES.join(", ")
        ))
    })?;
    let text = serde_json::to_string(&AlgebraDoc::from_fixture(&fixture)).expect("serializable");
    Ok(Loaded { fixture, digest: sha256(text.as_bytes()), source: format!("builtin:{input}") })
}

fn sha256(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::UnvettedFunction(_) | Error::GridTooShort(_) => EXIT_CONFIG,
        _ => EXIT_VALIDATION,
    }
}

fn config(cli: &Cli, samples: usize) -> SuiteConfig {
    SuiteConfig { seed: cli.seed, tmax: cli.tmax, grid_points: cli.grid_points, threshold: cli.threshold, samples }
}

fn envelope(cli: &Cli, command: &str, loaded: Option<&Loaded>, result: Value) -> Value {
    json!({
        "tool": "radlen",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "input": loaded.map(|l| json!({ "source": l.source, "name": l.fixture.name, "sha256": l.digest })),
        "seed": cli.seed,
        "thresholds": config(cli, 0).thresholds(),
        "grid": { "tmax": cli.tmax, "points": cli.grid_points },
        "result": result,
    })
}

fn span_json(s: &Subspace) -> Value {
    json!({ "dim": s.dim(), "basis": s.basis().iter().map(|v| vec_json(v)).collect::<Vec<_>>() })
}

fn validate(f: &Fixture, require_rep: bool) -> Result<Value> {
    let a = &f.algebra;
    a.validate()?;
    let mut checks = vec![json!({ "check": "structure constants", "passed": true })];
    let r = a.solvable_radical()?;
    a.validate_levi(&f.levi, &r)?;
    checks.push(json!({ "check": "levi complement", "passed": true }));
    match &f.rep {
        Some(rep) => {
            rep.validate(a)?;
            let faithful = rep.is_faithful();
            if f.faithful == Some(true) && !faithful {
                return Err(Error::NotFaithful);
            }
            checks.push(json!({ "check": "representation", "passed": true, "faithful": faithful }));
        }
        None if require_rep => return Err(Error::Config("a representation is required but the input has none".into())),
        None => checks.push(json!({ "check": "representation", "passed": true, "absent": true })),
    }
    for (name, n) in &f.subgroups {
        a.validate_intermediate(n, &f.levi).map_err(|e| annotate(e, name))?;
        checks.push(json!({ "check": format!("intermediate ideal {name}"), "passed": true, "dim": n.dim() }));
    }
    Ok(json!({ "valid": true, "dim": a.dim(), "checks": checks }))
}

fn annotate(e: Error, name: &str) -> Error {
    match e {
        Error::NotAnIdeal(m) => Error::NotAnIdeal(format!("{name}: {m}")),
        Error::NotBetweenRadicals(m) => Error::NotBetweenRadicals(format!("{name}: {m}")),
        e => e,
    }
}

fn radicals(f: &Fixture, seed: u64) -> Result<Value> {
    let a = &f.algebra;
    a.validate()?;
    let r = a.solvable_radical()?;
    let n = a.nilpotent_radical_from(&r)?;
    let e = a.exponential_radical(&f.levi)?;
    let r_inf = a.lower_central_series(&r)?.last().clone();
    let cartan = a.cartan_subalgebra(&r, seed)?;
    let nprime = suites::default_nprime(f)?;
    let v = complement_v(&cartan, &nprime);
    let quotient = a.quotient(&r, &nprime)?;
    let weights = f_basis_weights(&quotient.algebra)?;
    Ok(json!({
        "r": span_json(&r),
        "n": span_json(&n),
        "e": span_json(&e),
        "r_inf": span_json(&r_inf),
        "cartan": span_json(&cartan),
        "v": span_json(&v),
        "weights": weights.weights,
        "dims": { "g": a.dim(), "r": r.dim(), "n": n.dim(), "e": e.dim(), "r_inf": r_inf.dim(), "cartan": cartan.dim() },
    }))
}

fn parse_scalar(tok: &str) -> Result<Gq> {
    let tok = tok.trim();
    let num = if tok.contains(['.', 'e', 'E']) && !tok.contains('/') {
        NumJson::Float(tok.parse().map_err(|_| Error::Parse(format!("bad number {tok:?}")))?)
    } else {
        NumJson::Str(tok.to_string())
    };
    ScalarJson::Num(num).to_gq()
}

fn parse_coords(s: &str, n: usize) -> Result<QVec> {
    let v: QVec = if s.trim_start().starts_with('[') {
        let j: Vec<ScalarJson> = serde_json::from_str(s).map_err(|e| Error::Parse(format!("coordinates: {e}")))?;
        j.iter().map(ScalarJson::to_gq).collect::<Result<_>>()?
    } else {
        s.split(',').map(parse_scalar).collect::<Result<_>>()?
    };
    if v.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: v.len() });
    }
    Ok(v)
}

/// A basis name, a 1-indexed coordinate alias `t<k>`, or explicit coordinates.
fn parse_direction(s: &str, f: &Fixture) -> Result<QVec> {
    let n = f.dim();
    if let Some(i) = f.algebra.names().iter().position(|x| x == s) {
        return Ok(unit_vec(n, i));
    }
    if let Some(k) = s.strip_prefix('t').and_then(|k| k.parse::<usize>().ok()) {
        if (1..=n).contains(&k) {
            return Ok(unit_vec(n, k - 1));
        }
        return Err(Error::Config(format!("coordinate t{k} out of range 1..={n}")));
    }
    parse_coords(s, n)
}

enum Rendered {
    Json(Value),
    Csv(String),
}

fn phi(cli: &Cli, f: &Fixture, nprime: &str, eval: Option<&str>, ray: Option<&str>) -> Result<Rendered> {
    let n = f.subgroup(nprime)?.clone();
    let ctx = suites::context(f, &n, cli.seed)?;
    let phi = phi_build(ctx.clone());
    match (eval, ray) {
        (Some(e), _) => {
            let word = e.split(';').map(|x| parse_coords(x, f.dim())).collect::<Result<Vec<_>>>()?;
            let g = GroupElement::from_word(&ctx.rep, &word);
            let value = phi.eval(&g)?;
            let t = ctx.decompose(&g)?;
            if cli.output == Output::Csv {
                return Ok(Rendered::Csv(format!("phi\n{value}\n")));
            }
            Ok(Rendered::Json(json!({ "nprime": nprime, "value": value, "decomposition": t })))
        }
        (None, Some(r)) => {
            let dir = parse_direction(r, f)?;
            if cli.tmax < 1e4 {
                return Err(Error::GridTooShort(cli.tmax.max(1.0).log10()));
            }
            let profile = ray_profile(&phi, &ctx.rep, &dir, &tgrid(cli.grid_points, cli.tmax))?;
            if cli.output == Output::Csv {
                return Ok(Rendered::Csv(profile.to_csv()));
            }
            let mw = ctx.weights.weights.iter().copied().max().unwrap_or(1).max(f.dim().saturating_sub(1) as u32);
            let class = classify_with(&profile, mw, cli.threshold);
            Ok(Rendered::Json(json!({ "nprime": nprime, "profile": profile, "classification": class })))
        }
        (None, None) => Err(Error::Config("phi needs --eval or --ray".into())),
    }
}

fn csv_checks(rows: &[(String, bool)]) -> String {
    let mut s = String::from("check,passed\n");
    for (name, ok) in rows {
        s.push_str(&format!("\"{}\",{ok}\n", name.replace('"', "'")));
    }
    s
}

fn emit(cli: &Cli, command: &str, loaded: Option<&Loaded>, r: Rendered) {
    let text = match r {
        Rendered::Json(v) => {
            serde_json::to_string_pretty(&envelope(cli, command, loaded, v)).expect("serializable") + "\n"
        }
        Rendered::Csv(s) => s,
    };
    // A closed pipe (e.g. `| head`) is not an error worth reporting.
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn fail(cli: &Cli, command: &str, loaded: Option<&Loaded>, e: &Error) -> ExitCode {
    let code = exit_code(e);
    eprintln!("radlen: {e}");
    if cli.output == Output::Json {
        emit(cli, command, loaded, Rendered::Json(json!({ "error": e.to_string(), "exit_code": code })));
    }
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, input) = match &cli.command {
        Command::Validate { input, .. } => ("validate", input),
        Command::Radicals { input } => ("radicals", input),
        Command::Phi { input, .. } => ("phi", input),
        Command::Verify { input, .. } => ("verify", input),
    };
    let loaded = match load(input) {
        Ok(l) => l,
        Err(e) => return fail(&cli, name, None, &e),
    };
    let f = &loaded.fixture;
    let out = match &cli.command {
        Command::Validate { require_rep, .. } => validate(f, *require_rep).map(|v| {
            if cli.output == Output::Csv {
                let rows: Vec<(String, bool)> = v["checks"]
                    .as_array()
                    .into_iter()
                    .flatten()
                    .map(|c| (c["check"].as_str().unwrap_or("").to_string(), true))
                    .collect();
                Rendered::Csv(csv_checks(&rows))
            } else {
                Rendered::Json(v)
            }
        }),
        Command::Radicals { .. } => radicals(f, cli.seed).map(|v| {
            if cli.output == Output::Csv {
                let mut s = String::from("space,dim\n");
                for (k, d) in v["dims"].as_object().into_iter().flatten() {
                    s.push_str(&format!("{k},{d}\n"));
                }
                Rendered::Csv(s)
            } else {
                Rendered::Json(v)
            }
        }),
        Command::Phi { nprime, eval, ray, .. } => phi(&cli, f, nprime, eval.as_deref(), ray.as_deref()),
        Command::Verify { suite, samples, .. } => {
            let report = Suite::parse(suite).and_then(|s| suites::run(s, f, &config(&cli, *samples)));
            match report {
                Ok(rep) => {
                    let passed = rep.passed;
                    let rendered = if cli.output == Output::Csv {
                        Rendered::Csv(csv_checks(
                            &rep.checks.iter().map(|c| (c.name.clone(), c.passed)).collect::<Vec<_>>(),
                        ))
                    } else {
                        Rendered::Json(serde_json::to_value(&rep).expect("serializable"))
                    };
                    emit(&cli, name, Some(&loaded), rendered);
                    if !passed {
                        eprintln!("radlen: suite {suite} failed on {}", f.name);
                        return ExitCode::from(EXIT_SUITE);
                    }
                    return ExitCode::SUCCESS;
                }
                Err(e) => Err(e),
            }
        }
    };
    match out {
        Ok(r) => {
            emit(&cli, name, Some(&loaded), r);
            ExitCode::SUCCESS
        }
        Err(e) => fail(&cli, name, Some(&loaded), &e),
    }
}
