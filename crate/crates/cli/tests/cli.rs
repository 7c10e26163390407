use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use radlen::fixtures;
use radlen::io::{parse_fixture, AlgebraDoc};
use serde_json::Value;

fn radlen(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_radlen")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn fixture_file(name: &str) -> String {
    fixture_dir().join(format!("{name}.json")).to_str().unwrap().to_string()
}

fn scratch_file(name: &str, text: &str) -> String {
    let p = Path::new(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

/// Set `RADLEN_BLESS=1` to rewrite the files from the built-in catalog.
#[test]
fn fixture_files_match_builtins() {
    let bless = std::env::var("RADLEN_BLESS").is_ok_and(|v| v == "1");
    for f in fixtures::all() {
        let text = serde_json::to_string_pretty(&AlgebraDoc::from_fixture(&f)).unwrap() + "\n";
        let path = fixture_dir().join(format!("{}.json", f.name));
        if bless {
            std::fs::write(&path, &text).unwrap();
        }
        let on_disk = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(on_disk, text, "{} is stale", path.display());
        let parsed = parse_fixture(&on_disk, "x").unwrap();
        assert_eq!(AlgebraDoc::from_fixture(&parsed), AlgebraDoc::from_fixture(&f));
    }
}

#[test]
fn validate_accepts_every_fixture_file() {
    for name in fixtures::NAMES {
        let o = radlen(&["validate", &fixture_file(name), "--require-rep"]);
        assert_eq!(code(&o), 0, "{name}: {}", String::from_utf8_lossy(&o.stderr));
        assert_eq!(json(&o)["result"]["valid"], true);
    }
}

#[test]
fn validate_names_the_jacobi_triple() {
    let doc = r#"{"dim": 3, "basis": ["a", "b", "c"],
        "brackets": {"a,b": {"b": 1}, "a,c": {"c": 1}, "b,c": {"a": 1}}}"#;
    let o = radlen(&["validate", &scratch_file("jacobi.json", doc)]);
    assert_eq!(code(&o), 2);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("Jacobi") && err.contains("(0, 1, 2)"), "{err}");
}

#[test]
fn missing_rep_is_a_configuration_error_when_required() {
    let doc = r#"{"dim": 2, "basis": ["x", "y"], "brackets": {"x,y": {"y": 1}}}"#;
    let p = scratch_file("norep.json", doc);
    assert_eq!(code(&radlen(&["validate", &p])), 0);
    assert_eq!(code(&radlen(&["validate", &p, "--require-rep"])), 3);
}

#[test]
fn parse_errors_report_position() {
    let p = scratch_file("broken.json", "{\n  \"dim\": 2,\n  \"basis\": [\"x\" \"y\"]\n}");
    let o = radlen(&["validate", &p]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
}

#[test]
fn radicals_of_worked_examples() {
    let dims = |name: &str| json(&radlen(&["radicals", name]))["result"]["dims"].clone();
    let h = dims("heisenberg3");
    assert_eq!((h["n"].as_u64(), h["e"].as_u64()), (Some(1), Some(0)));
    assert_eq!(dims("sixdim")["e"], 3);
    let a = dims("affine2");
    assert_eq!((a["n"].as_u64(), a["e"].as_u64()), (Some(1), Some(1)));
}

#[test]
fn phi_at_identity_is_zero() {
    let o = radlen(&["phi", "heisenberg3", "--eval", "0,0,0"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["result"]["value"], 0.0);
}

#[test]
fn phi_ray_profiles() {
    let o = radlen(&["phi", "heisenberg3", "--ray", "e3"]);
    assert_eq!(json(&o)["result"]["classification"]["verdict"]["kind"], "logarithmic");
    let o = radlen(&["phi", "filiform5", "--nprime", "H3", "--ray", "t3"]);
    let v = json(&o)["result"]["classification"]["verdict"].clone();
    assert_eq!(v["kind"], "power");
    assert_eq!(v["p"], 0.5);
    let csv = radlen(&["phi", "filiform5", "--nprime", "H3", "--ray", "e2", "--output", "csv"]);
    let text = String::from_utf8(csv.stdout).unwrap();
    assert!(text.starts_with("t,value,"));
    let last: Vec<f64> = text.lines().last().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(last[0], 1e6);
    assert!((last[1] - 1e3).abs() < 1e-6);
}

#[test]
fn verify_suites_pass() {
    for (input, suite) in [("heisenberg3", "decomposition"), ("filiform5", "separation"), ("heisenberg3", "maximality")]
    {
        let o = radlen(&["verify", input, "--suite", suite]);
        assert_eq!(code(&o), 0, "{input} {suite}: {}", String::from_utf8_lossy(&o.stderr));
        assert_eq!(json(&o)["result"]["passed"], true);
    }
}

#[test]
fn unknown_suite_is_a_configuration_error() {
    assert_eq!(code(&radlen(&["verify", "heisenberg3", "--suite", "everything"])), 3);
}

#[test]
fn reports_are_reproducible_and_self_describing() {
    let args = ["verify", &fixture_file("filiform4"), "--suite", "distortion", "--seed", "11"];
    let (a, b) = (radlen(&args), radlen(&args));
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert_eq!(v["seed"], 11);
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(v["input"]["sha256"].as_str().unwrap().len(), 64);
    assert!(v["thresholds"]["classify_residual"].is_number());
}
