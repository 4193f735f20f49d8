use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

const B2: &str = r#"
[datum]
family = "koornwinder"
rank = 2
bullet = "t"
q = 0.3
[datum.kappa]
long = 0.25
short = { alpha = 0.3, two_alpha = 0.1, alpha1 = 0.2, two_alpha1 = -0.1 }
"#;

const A2: &str = r#"
[datum]
family = "a"
rank = 2
q = 0.4
kappa = { roots = 0.3 }
"#;

const A1: &str = r#"
[datum]
family = "a"
rank = 1
q = 0.4
kappa = { roots = 0.3 }
[numerics]
samples = 2
trunc = 12
"#;

fn config(name: &str, text: &str) -> PathBuf {
    let p = std::env::temp_dir().join(format!("hcseries-{}-{}.toml", std::process::id(), name));
    std::fs::write(&p, text).unwrap();
    p
}

fn run(cfg: Option<&PathBuf>, args: &[&str]) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_hcseries"));
    c.env_remove("HCSERIES_CONFIG");
    if let Some(p) = cfg {
        c.arg("--config").arg(p);
    }
    c.args(args).output().unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{}: {}", e, String::from_utf8_lossy(&o.stdout)))
}

fn strip_times(v: &mut Value) {
    match v {
        Value::Object(m) => {
            m.remove("wall_ms");
            m.values_mut().for_each(strip_times);
        }
        Value::Array(a) => a.iter_mut().for_each(strip_times),
        _ => {}
    }
}

#[test]
fn info_lists_the_weyl_group_of_a2() {
    let o = run(Some(&config("a2", A2)), &["info"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["weyl_order"], 6);
    assert_eq!(v["weyl"].as_array().unwrap().len(), 6);
    assert_eq!(v["roots"].as_array().unwrap().len(), 6);
}

#[test]
fn info_gives_an_aw_quadruple_per_orbit() {
    let v = json(&run(Some(&config("b2info", B2)), &["info"]));
    let orbits = v["orbits"].as_array().unwrap();
    assert_eq!(orbits.len(), 2);
    for o in orbits {
        assert_eq!(o["aw"].as_array().unwrap().len(), 4);
        assert_eq!(o["aw_dual"].as_array().unwrap().len(), 4);
    }
}

#[test]
fn invalid_kappa_is_a_configuration_error() {
    let bad = "[datum]\nfamily = \"gl\"\nrank = 2\nq = 0.4\nkappa = { roots = { alpha = 0.3, two_alpha = 0.1 } }\n";
    let o = run(Some(&config("badk", bad)), &["info"]);
    assert_eq!(o.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "invalid_kappa");
}

#[test]
fn bad_q_and_unknown_keys_exit_2() {
    let o = run(Some(&config("badq", &A2.replace("q = 0.4", "q = 1.5"))), &["info"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(Some(&config("typo", &format!("{}\n[numerics]\ntrunk = 3\n", A2))), &["info"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unsupported_suite_is_an_explicit_error() {
    let o = run(Some(&config("a2yb", A2)), &["check", "--suite", "yb"]);
    assert_eq!(o.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "unsupported_suite");
    assert!(err["error"]["message"].as_str().unwrap().contains("does not apply"));
}

#[test]
fn unknown_suite_exits_2() {
    let o = run(None, &["check", "--suite", "nonsense"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn check_passes_and_fails_with_exit_codes() {
    let cfg = config("b2chk", B2);
    let o = run(Some(&cfg), &["check", "--suite", "theta", "--samples", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    assert_eq!(v["summary"]["failed"], 0);
    assert!(v["records"].as_array().unwrap().iter().all(|r| r["anchor"].as_str().is_some_and(|a| !a.is_empty())));

    let o = run(Some(&cfg), &["check", "--suite", "theta", "--samples", "3", "--tol-scale", "1e-20"]);
    assert_eq!(o.status.code(), Some(1));
    let v = json(&o);
    assert!(v["summary"]["failed"].as_u64().unwrap() > 0);
    assert_eq!(v["config"]["numerics"]["tol_scale"], 1e-20);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("FAIL") && err.contains("at z ="));
}

#[test]
fn same_seed_gives_identical_reports() {
    let cfg = config("det", B2);
    let args = ["check", "--suite", "qkz,connection", "--samples", "2", "--trunc", "9", "--seed", "11"];
    let mut a = json(&run(Some(&cfg), &args));
    let mut b = json(&run(Some(&cfg), &args));
    strip_times(&mut a);
    strip_times(&mut b);
    assert_eq!(a, b);
    let mut c = json(&run(Some(&cfg), &["check", "--suite", "qkz", "--samples", "2", "--seed", "12"]));
    strip_times(&mut c);
    assert_ne!(a["records"][0]["worst"], c["records"][0]["worst"]);
}

#[test]
fn config_path_from_the_environment() {
    let cfg = config("env", A2);
    let o = Command::new(env!("CARGO_BIN_EXE_hcseries")).env("HCSERIES_CONFIG", &cfg).arg("info").output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["rank"], 2);
}

#[test]
fn check_all_on_a1_runs_the_rank_one_oracle() {
    let o = run(Some(&config("a1", A1)), &["check", "--suite", "all"]);
    let v = json(&o);
    let names: Vec<&str> = v["records"].as_array().unwrap().iter().map(|r| r["name"].as_str().unwrap()).collect();
    assert!(names.contains(&"hc.rank_one_oracle"));
    assert!(names.contains(&"connection.rank_one_identity"));
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn report_and_csv_files() {
    let out = std::env::temp_dir().join(format!("hcseries-{}-report.json", std::process::id()));
    let csv = out.with_extension("csv");
    let o = run(
        None,
        &["check", "--suite", "theta", "--samples", "2", "--out", out.to_str().unwrap(), "--csv", csv.to_str().unwrap()],
    );
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["data"], "reference data");
    let rows = std::fs::read_to_string(&csv).unwrap();
    assert!(rows.starts_with("check,sample,residual,z,xi"));
    assert!(rows.lines().count() > 4);
}

#[test]
fn eval_targets() {
    let cfg = config("eval", B2);
    let phi = json(&run(Some(&cfg), &["eval", "phi", "--z-simple=-1.5,-1.2:0.3", "--xi", "0.1,0.2"]));
    assert!(phi["tail_estimate"].as_f64().unwrap() < 1e-10);
    assert_eq!(phi["value"].as_array().unwrap().len(), 2);

    let m = json(&run(Some(&cfg), &["eval", "m", "--i", "2", "--z", "0.1,0.2", "--xi", "0.1,0.3"]));
    assert!(m["m_ee"].is_array() && m["m_off"].is_array());

    let c = json(&run(Some(&cfg), &["eval", "C", "--w", "0,1", "--w-dual", "2", "--z", "0.1,0.2", "--xi", "0.1,0.3"]));
    assert_eq!(c["matrix"].as_array().unwrap().len(), 8);

    let o = run(Some(&cfg), &["eval", "phi", "--z", "0.1"]);
    assert_eq!(o.status.code(), Some(2));
}
