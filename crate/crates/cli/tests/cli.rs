use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn steplearn(args: &[&str], config: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_steplearn"))
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const GEN_MINIMAL: &str = r#"
count = 3

[distribution]
seed = 1
dimension = 1
eigenvalue_range = [1.0, 1.0]
initial_norm_range = [0.1, 1.0]
"#;

/// `f = ½z²`, `z0 = 1`, `ν = 0.1`.
const SCALAR_INSTANCE: &str = r#"{
  "dimension": 1, "eigenvalues": [1.0], "orthogonal_seed": null,
  "z0": [1.0], "nu": 0.1, "Z": 1.0, "L": 1.0, "m": 1.0
}"#;

#[test]
fn gen_writes_count_instances_deterministically() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "gen.toml", GEN_MINIMAL);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(steplearn(&["gen"], &cfg, &a).status.success());
    assert!(steplearn(&["gen"], &cfg, &b).status.success());
    let files: Vec<_> = fs::read_dir(a.join("instances")).unwrap().collect();
    assert_eq!(files.len(), 3);
    for i in 0..3 {
        let name = format!("instances/instance-{i:05}.json");
        assert_eq!(fs::read(a.join(&name)).unwrap(), fs::read(b.join(&name)).unwrap());
        let inst = json(&a.join(&name));
        assert_eq!(inst["eigenvalues"], serde_json::json!([1.0]));
    }
    assert_eq!(
        fs::read(a.join("manifest.json")).unwrap(),
        fs::read(b.join("manifest.json")).unwrap()
    );
    let m = json(&a.join("manifest.json"));
    assert_eq!(m["command"], "gen");
    assert_eq!(m["seed"], 1);
    assert_eq!(m["outputs"].as_array().unwrap().len(), 3);
    assert_eq!(m["config_digest"].as_str().unwrap().len(), 64);
}

#[test]
fn gen_seed_flag_overrides_the_config() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "gen.toml", &GEN_MINIMAL.replace("dimension = 1", "dimension = 2"));
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(steplearn(&["gen"], &cfg, &a).status.success());
    assert!(steplearn(&["gen", "--seed", "99"], &cfg, &b).status.success());
    let (ma, mb) = (json(&a.join("manifest.json")), json(&b.join("manifest.json")));
    assert_eq!(mb["seed"], 99);
    assert_ne!(ma["config_digest"], mb["config_digest"]);
    assert_ne!(
        fs::read(a.join("instances/instance-00000.json")).unwrap(),
        fs::read(b.join("instances/instance-00000.json")).unwrap()
    );
}

#[test]
fn gen_rejects_an_empty_request() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "gen.toml", &GEN_MINIMAL.replace("count = 3", "count = 0"));
    let o = steplearn(&["gen"], &cfg, &tmp.path().join("out"));
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("empty generation request"), "{}", stderr(&o));
}

#[test]
fn config_errors_exit_with_one() {
    let tmp = TempDir::new().unwrap();
    let o = steplearn(&["bounds"], &tmp.path().join("missing.toml"), &tmp.path().join("out"));
    assert_eq!(o.status.code(), Some(1));
    let cfg = write(tmp.path(), "bad.toml", "count = 3\n[distribution]\nseed = 1\n");
    let o = steplearn(&["gen"], &cfg, &tmp.path().join("out"));
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("dimension"), "{}", stderr(&o));
}

#[test]
fn run_worked_gd_example() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "scalar.json", SCALAR_INSTANCE);
    let cfg = write(
        tmp.path(),
        "run.toml",
        "instances = [\"scalar.json\"]\nmax_iters = 100\n[[configs]]\nmethod = \"gd\"\nrho = 0.5\n",
    );
    let out = tmp.path().join("out");
    let o = steplearn(&["run", "--format", "csv"], &cfg, &out);
    assert!(o.status.success(), "{}", stderr(&o));

    let traj = fs::read_to_string(out.join("trajectories/instance-00000-config-000.csv")).unwrap();
    let last = traj.lines().last().unwrap();
    let cols: Vec<&str> = last.split(',').collect();
    assert_eq!(cols[0], "4");
    assert!(cols[2].parse::<f64>().unwrap() <= 0.1);

    let mut rdr = csv::Reader::from_path(out.join("costs.csv")).unwrap();
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 2);
    let headers = rdr.headers().unwrap().clone();
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    assert_eq!(&rows[0][col("measure")], "iteration-count");
    assert_eq!(&rows[0][col("value")], "4.0");
    assert_eq!(&rows[0][col("M")], "4");
    // 0.5 + 0.25 + 0.125 + 0.0625
    assert_eq!(rows[1][col("value")].parse::<f64>().unwrap(), 0.9375);
}

#[test]
fn run_cg_with_zero_eta_matches_gd_and_reports_divergence() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(
        tmp.path(),
        "run.toml",
        r#"
max_iters = 500
trajectories = false

[generate]
count = 100
[generate.distribution]
seed = 4
dimension = 3
eigenvalue_range = [0.5, 1.0]
initial_norm_range = [0.1, 1.0]

[[configs]]
method = "gd"
rho = 1.2

[[configs]]
method = "cg"
rho = 1.2
eta = 0.0

[[configs]]
method = "gd"
rho = 10.0
"#,
    );
    let out = tmp.path().join("out");
    let o = steplearn(&["run"], &cfg, &out);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = json(&out.join("costs.json"));
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 100 * 3 * 2);
    for chunk in rows.chunks(6) {
        assert_eq!(chunk[0]["instance_id"], chunk[5]["instance_id"]);
        assert_eq!(chunk[0]["value"], chunk[2]["value"]);
        assert_eq!(chunk[1]["value"], chunk[3]["value"]);
        assert_eq!(chunk[4]["termination"], "diverged");
        assert!(chunk[4]["value"].is_null());
    }
    for (i, chunk) in rows.chunks(6).enumerate() {
        assert_eq!(chunk[0]["instance_id"], i);
    }
    let again = tmp.path().join("again");
    assert!(steplearn(&["run"], &cfg, &again).status.success());
    assert_eq!(fs::read(out.join("costs.json")).unwrap(), fs::read(again.join("costs.json")).unwrap());
}

#[test]
fn run_reads_an_instance_directory_written_by_gen() {
    let tmp = TempDir::new().unwrap();
    let gen = write(tmp.path(), "gen.toml", GEN_MINIMAL);
    assert!(steplearn(&["gen"], &gen, &tmp.path().join("g")).status.success());
    let cfg = write(
        tmp.path(),
        "run.toml",
        "instance_dir = \"g/instances\"\nmax_iters = 100\nmeasures = [\"primal-integral\"]\n[[configs]]\nmethod = \"gd\"\nrho = 0.5\n",
    );
    let out = tmp.path().join("out");
    assert!(steplearn(&["run"], &cfg, &out).status.success());
    assert_eq!(json(&out.join("costs.json")).as_array().unwrap().len(), 3);
}

const GD_CONTEXT: &str = r#"
L = 1.0
Z = 1.0
nu = 0.1
beta = 0.5
rho_interval = [0.1, 0.5]
C = 0.1
epsilon = 0.1
delta = 0.1
uc_constant_k = 1.0
"#;

#[test]
fn bounds_gd_only_report() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "ctx.toml", GD_CONTEXT);
    let out = tmp.path().join("out");
    assert!(steplearn(&["bounds"], &cfg, &out).status.success());
    let r = json(&out.join("certificate.json"));
    assert!((r["horizon"]["value"].as_f64().unwrap() - 10f64.ln() / 2f64.ln()).abs() < 1e-12);
    assert_eq!(r["gd"]["d_at_rho_u"]["value"], 1.0);
    assert!((r["gd"]["k_primal_integral"]["value"].as_f64().unwrap() - 0.015051).abs() < 1e-6);
    assert!(r["gd"]["iteration_count"]["m"].as_u64().unwrap() > 0);
    assert!(r["gd"]["primal_integral"]["pseudo_dimension"]["finite_class"].is_number());
    assert!(r.get("cg").is_none());
}

#[test]
fn bounds_worked_g_star_and_scope_flag() {
    let tmp = TempDir::new().unwrap();
    let ctx = GD_CONTEXT
        .replace("nu = 0.1", "nu = 0.125")
        .replace("C = 0.1", "C = 1.0")
        .replace("rho_interval = [0.1, 0.5]", "rho_interval = [0.5, 0.5]\neta_interval = [0.2, 0.2]");
    let cfg = write(tmp.path(), "ctx.json", &{
        let v: toml::Value = toml::from_str(&ctx).unwrap();
        serde_json::to_string(&v).unwrap()
    });
    let out = tmp.path().join("out");
    assert!(steplearn(&["bounds"], &cfg, &out).status.success());
    let r = json(&out.join("certificate.json"));
    assert!((r["cg"]["g_star"]["value"].as_f64().unwrap() - 16.67).abs() < 0.01);
    assert_eq!(r["cg"]["scope"], "outside-certificate-scope");
    assert!(r["cg"]["h_star"].is_null());

    let csv_out = tmp.path().join("csv");
    assert!(steplearn(&["bounds", "--format", "csv"], &cfg, &csv_out).status.success());
    let text = fs::read_to_string(csv_out.join("certificate.csv")).unwrap();
    assert!(text.starts_with("key,value\n"));
    assert!(text.contains("\ncg.scope,outside-certificate-scope\n"));
}

fn learn_config(dir: &Path, trials: usize, source: &str) -> PathBuf {
    write(
        dir,
        "learn.toml",
        &format!(
            r#"
method = "gd"
measure = "primal-integral"
{source}

[context]
L = 1.0
Z = 1.0
nu = 0.01
beta = 0.45
rho_interval = [0.6, 1.2]
C = 0.2
epsilon = 0.1
delta = 0.1
uc_constant_k = 0.01

[options]
trials = {trials}
reference_samples = 2000
calibrate = false
"#
        ),
    )
}

#[test]
fn learn_on_a_single_instance_always_succeeds() {
    let tmp = TempDir::new().unwrap();
    write(
        tmp.path(),
        "one.json",
        &SCALAR_INSTANCE.replace("\"nu\": 0.1", "\"nu\": 0.01").replace("\"eigenvalues\": [1.0]", "\"eigenvalues\": [0.9]").replace("\"m\": 1.0", "\"m\": 0.9").replace("\"L\": 1.0", "\"L\": 0.9"),
    );
    let cfg = learn_config(tmp.path(), 20, "instance = \"one.json\"");
    let out = tmp.path().join("out");
    let o = steplearn(&["learn"], &cfg, &out);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = json(&out.join("learn-report.json"));
    assert_eq!(r["success_frequency"], 1.0);
    assert_eq!(r["outcomes"].as_array().unwrap().len(), 20);
    let table = fs::read_to_string(out.join("cost-table.csv")).unwrap();
    assert!(table.starts_with("config_index,method,rho,eta,reference_mean"));
}

const LEARN_DIST: &str = r#"
[distribution]
seed = 3
dimension = 2
eigenvalue_range = [0.8, 1.0]
initial_norm_range = [0.5, 1.0]
gradient_tolerance_nu = 0.01
"#;

#[test]
fn learn_is_reproducible_and_rejects_zero_trials() {
    let tmp = TempDir::new().unwrap();
    let cfg = learn_config(tmp.path(), 10, LEARN_DIST);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(steplearn(&["learn"], &cfg, &a).status.success());
    assert!(steplearn(&["learn"], &cfg, &b).status.success());
    for f in ["learn-report.json", "cost-table.csv", "manifest.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }

    let cfg = learn_config(tmp.path(), 0, LEARN_DIST);
    let o = steplearn(&["learn"], &cfg, &tmp.path().join("c"));
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("trials"), "{}", stderr(&o));
}

const VERIFY: &str = r#"
beta = 0.39
rho_interval = [0.5, 0.8]
C = 0.1
draws = DRAWS
suites = ["gd-trajectory-divergence", "gd-iteration-spacing", "gd-cost-spacing"]

[distribution]
seed = 11
dimension = 3
eigenvalue_range = [1.0, 2.0]
initial_norm_range = [0.1, 1.0]
gradient_tolerance_nu = 0.001
"#;

#[test]
fn verify_gd_suites_pass() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "verify.toml", &VERIFY.replace("DRAWS", "200"));
    let out = tmp.path().join("out");
    let o = steplearn(&["verify", "--format", "csv"], &cfg, &out);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = json(&out.join("verify-report.json"));
    assert_eq!(r["violations"], 0);
    for s in r["suites"].as_array().unwrap() {
        assert_eq!(s["status"], "pass");
        assert_eq!(s["draws_accepted"], 200);
    }
    let summary = fs::read_to_string(out.join("verify-summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 4);
}

#[test]
fn verify_with_zero_draws_reports_no_draws() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "verify.toml", &VERIFY.replace("DRAWS", "0"));
    let out = tmp.path().join("out");
    assert!(steplearn(&["verify"], &cfg, &out).status.success());
    let r = json(&out.join("verify-report.json"));
    for s in r["suites"].as_array().unwrap() {
        assert_eq!(s["status"], "no-draws");
    }
}
