use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn mwi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mwi")).args(args).output().expect("run mwi")
}

fn json_of(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

struct Files {
    dir: TempDir,
}

impl Files {
    fn new() -> Self {
        let f = Self { dir: TempDir::new().unwrap() };
        f.write("d0.json", r#"{"dim":1,"atoms":[{"x":[0],"w":1}]}"#);
        f.write("d1.json", r#"{"dim":1,"atoms":[{"x":[1],"w":1}]}"#);
        f.write("split.json", r#"{"dim":1,"atoms":[{"x":[-1],"w":0.5},{"x":[1],"w":0.5}]}"#);
        f.write("plane.json", r#"{"dim":2,"atoms":[{"x":[0,0],"w":1}]}"#);
        f.write("broken.json", r#"{"dim":1,"atoms":[{"x":[0],"#);
        f
    }

    fn write(&self, name: &str, text: &str) {
        fs::write(self.dir.path().join(name), text).unwrap();
    }

    fn path(&self, name: &str) -> String {
        self.dir.path().join(name).to_string_lossy().into_owned()
    }
}

#[test]
fn dirac_distance_is_one() {
    let f = Files::new();
    let v = json_of(&mwi(&["wasserstein", "--mu", &f.path("d0.json"), "--nu", &f.path("d1.json"), "--q", "2"]));
    assert_eq!(v["value"], 1.0);
}

#[test]
fn identical_files_are_at_distance_zero() {
    let f = Files::new();
    for q in ["1", "2.5", "inf"] {
        let v = json_of(&mwi(&["wasserstein", "--mu", &f.path("split.json"), "--nu", &f.path("split.json"), "--q", q]));
        assert_eq!(v["value"], 0.0, "q = {q}");
    }
}

#[test]
fn family_files_have_bottleneck_distance_z() {
    let f = Files::new();
    let dir = f.path("fam");
    let out = mwi(&["family", "--n", "2", "--z", "1", "--out-dir", &dir]);
    assert!(out.status.success(), "{}", stderr(&out));
    let mu = Path::new(&dir).join("mu.json");
    let nu = Path::new(&dir).join("nu.json");
    let v = json_of(&mwi(&["wasserstein", "--mu", mu.to_str().unwrap(), "--nu", nu.to_str().unwrap(), "--q", "inf"]));
    assert_eq!(v["value"], 1.0);
    let m = json_of(&mwi(&["mot", "--mu", mu.to_str().unwrap(), "--nu", nu.to_str().unwrap(), "--rho", "1.5"]));
    assert!(m["lower_cost"].as_f64().unwrap() <= m["upper_cost"].as_f64().unwrap());
}

#[test]
fn forced_split_has_unit_cost() {
    let f = Files::new();
    let v = json_of(&mwi(&["mot", "--mu", &f.path("d0.json"), "--nu", &f.path("split.json"), "--rho", "3"]));
    assert_eq!((v["lower_cost"].as_f64(), v["upper_cost"].as_f64()), (Some(1.0), Some(1.0)));
}

#[test]
fn quadratic_cost_is_the_second_moment_gap() {
    let f = Files::new();
    f.write("mu.json", r#"{"dim":1,"atoms":[{"x":[-1],"w":0.5},{"x":[1],"w":0.5}]}"#);
    f.write("nu.json", r#"{"dim":1,"atoms":[{"x":[-3],"w":0.25},{"x":[0],"w":0.5},{"x":[3],"w":0.25}]}"#);
    let v = json_of(&mwi(&["mot", "--mu", &f.path("mu.json"), "--nu", &f.path("nu.json"), "--rho", "2"]));
    // 4.5 - 1
    for key in ["lower_cost", "upper_cost"] {
        assert!((v[key].as_f64().unwrap() - 3.5).abs() < 1e-9, "{key}: {}", v[key]);
    }
}

#[test]
fn ratio_of_the_forced_split_is_one() {
    let f = Files::new();
    let v = json_of(&mwi(&["ratio", "--mu", &f.path("d0.json"), "--nu", &f.path("split.json"), "--rho", "2", "--q", "1"]));
    assert_eq!(v["ratio_lower"], 1.0);
    assert_eq!(v["ratio_upper"], 1.0);
}

#[test]
fn reversed_pair_exits_with_the_convex_order_code() {
    let f = Files::new();
    let out = mwi(&["mot", "--mu", &f.path("split.json"), "--nu", &f.path("d0.json"), "--rho", "3"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(stderr(&out).contains("convex order"));
}

#[test]
fn dimension_mismatch_names_the_flag() {
    let f = Files::new();
    let out = mwi(&["wasserstein", "--mu", &f.path("d0.json"), "--nu", &f.path("plane.json"), "--q", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--nu"), "{}", stderr(&out));
}

#[test]
fn corrupted_files_exit_with_the_parse_code() {
    let f = Files::new();
    let out = mwi(&["wasserstein", "--mu", &f.path("broken.json"), "--nu", &f.path("d0.json"), "--q", "1"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("--mu"));
    let out = mwi(&["mot", "--mu", &f.path("d0.json"), "--nu", &f.path("missing.json"), "--rho", "2"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("--nu"));
}

#[test]
fn empty_n_list_is_a_usage_error() {
    let out = mwi(&["family-sweep", "--rho", "1.5", "--q", "1", "--z", "1", "--n-list", ""]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn invalid_parameters_are_usage_errors() {
    for args in [
        &["family-sweep", "--rho", "0.5", "--q", "1", "--z", "1", "--n-list", "4"][..],
        &["family", "--n", "3", "--alpha", "1.5", "--out-dir", "unused"][..],
        &["lemma-constants", "--rho", "1.5"][..],
    ] {
        let out = mwi(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", stderr(&out));
    }
}

#[test]
fn sweep_recovers_the_growth_exponent() {
    let out = mwi(&[
        "family-sweep", "--rho", "1.5", "--q", "1", "--z", "1", "--n-list", "16,32,64,128,256", "--lp-cap", "32",
        "--format", "csv",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).unwrap();
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 5);
    let fitted: f64 = rows[0][col("fitted_exponent")].parse().unwrap();
    assert!((fitted - 0.5).abs() < 0.05, "fitted {fitted}");
    assert_eq!(rows[0][col("predicted_exponent")], "0.5");
    // LP columns only up to the cap
    assert!(!rows[1][col("mot_upper")].is_empty());
    assert!(rows[2][col("mot_upper")].is_empty());
    let cf: f64 = rows[1][col("closed_form_ratio")].parse().unwrap();
    let lp: f64 = rows[1][col("ratio_upper")].parse().unwrap();
    assert!((cf - lp).abs() < 1e-9 * cf);
}

#[test]
fn quadratic_family_ratio_tends_to_two() {
    let v = json_of(&mwi(&[
        "family-sweep", "--rho", "2", "--q", "1", "--alpha", "0", "--n-list", "100,1000,10000", "--lp-cap", "0",
    ]));
    let last = v["rows"][2]["closed_form_ratio"].as_f64().unwrap();
    assert!((1.9..=2.0).contains(&last), "{last}");
}

#[test]
fn lemma_constants_at_two_are_exact() {
    let v = json_of(&mwi(&["lemma-constants", "--rho", "2"]));
    assert_eq!(v["kappa"], 1.0);
    assert_eq!(v["kappa_tilde"], 1.0);
}

#[test]
fn same_seed_gives_identical_bytes() {
    let f = Files::new();
    let run = |name: &str| -> Vec<u8> {
        let path = f.path(name);
        let out = mwi(&[
            "--output", &path, "--format", "csv", "family-sweep", "--rho", "1.5", "--q", "inf", "--alpha", "0.5",
            "--n-list", "4,8,16", "--theta", "0.05",
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
        fs::read(path).unwrap()
    };
    assert_eq!(run("a.csv"), run("b.csv"));
    let again = |name: &str| {
        let path = f.path(name);
        assert!(mwi(&["--output", &path, "--seed", "7", "lemma-constants", "--rho", "3"]).status.success());
        fs::read(path).unwrap()
    };
    assert_eq!(again("c.json"), again("d.json"));
}

#[test]
fn failed_commands_leave_no_output_file() {
    let f = Files::new();
    let path: PathBuf = f.dir.path().join("report.json");
    let out = mwi(&[
        "--output", path.to_str().unwrap(), "mot", "--mu", &f.path("split.json"), "--nu", &f.path("d0.json"), "--rho",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(4));
    assert!(!path.exists());
}

#[test]
fn solver_budget_exhaustion_has_its_own_code() {
    let f = Files::new();
    f.write("mu.json", r#"{"dim":1,"atoms":[{"x":[-1],"w":0.5},{"x":[1],"w":0.5}]}"#);
    f.write("nu.json", r#"{"dim":1,"atoms":[{"x":[-3],"w":0.25},{"x":[0],"w":0.5},{"x":[3],"w":0.25}]}"#);
    let out = mwi(&["--max-iterations", "1", "mot", "--mu", &f.path("mu.json"), "--nu", &f.path("nu.json"), "--rho", "1.5"]);
    assert_eq!(out.status.code(), Some(5), "{}", stderr(&out));
}

#[test]
fn quick_verification_reports_every_criterion() {
    let out = mwi(&["verify-all", "--level", "quick"]);
    let text = String::from_utf8_lossy(&out.stdout);
    for id in ["1", "2", "3a", "3b", "3c", "4", "5", "6", "7", "8", "9"] {
        let prefix = format!("] {id} ");
        assert!(text.lines().any(|l| l.contains(&prefix)), "missing {id} in\n{text}");
    }
    // the q = inf slope check does not hold over 2^4..2^10
    assert!(text.contains("[FAIL] 3c "));
    assert_eq!(out.status.code(), Some(1));
}
