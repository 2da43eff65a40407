use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn idla(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_idla"))
        .args(args)
        .env_remove("IDLA_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn manifest(dir: &Path, subcommand: &str) -> serde_json::Value {
    let text = fs::read_to_string(dir.join(format!("{subcommand}.manifest.json"))).unwrap();
    serde_json::from_str(&text).unwrap()
}

#[test]
fn boxes_reports_exact_fraction() {
    let out = idla(&["boxes", "--m", "3", "--n", "5", "--trials", "20000"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("exact = 150/243"), "{}", stdout(&out));
}

#[test]
fn green_on_tree_is_exact() {
    let out = idla(&["green", "--group", "tree", "--q", "3", "--target", "abab"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("d = 4*ln(2) = 2.772588722239781 (exact)"), "{text}");
    assert!(text.contains("F = 1/16"), "{text}");
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(idla(&["green", "--q", "2", "--target", "a"]).status.code(), Some(1));
    assert_eq!(idla(&["boxes", "--m", "3", "--n", "5", "--bogus"]).status.code(), Some(1));
    assert_eq!(idla(&["simulate", "--q", "3"]).status.code(), Some(1));
    assert_eq!(idla(&["boxes", "--m", "2", "--n", "5"]).status.code(), Some(1));
    assert_eq!(idla(&["mouse", "--q", "3", "--radius", "1", "--a", "c"]).status.code(), Some(1));
    assert_eq!(idla(&["--threads", "0", "boxes", "--m", "3", "--n", "5"]).status.code(), Some(1));
}

#[test]
fn help_exits_zero() {
    assert_eq!(idla(&["--help"]).status.code(), Some(0));
    assert_eq!(idla(&["simulate", "--help"]).status.code(), Some(0));
}

#[test]
fn invalid_thread_env_is_a_usage_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_idla"))
        .args(["boxes", "--m", "3", "--n", "5"])
        .env("IDLA_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn command_line_overrides_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# small scan\nq = 3\nn_max = 4\nreplicas = 3\nseed = 11\n").unwrap();
    let out_dir = dir.path().join("out");
    let out = idla(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--replicas",
        "5",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let m = manifest(&out_dir, "simulate");
    let args = &m["config"]["command"]["simulate"];
    assert_eq!(args["replicas"], 5);
    assert_eq!(args["n_max"], 4);
    assert_eq!(m["master_seed"], 11);
    assert_eq!(m["status"], "ok");
    assert_eq!(m["exit_code"], 0);
}

#[test]
fn unknown_config_key_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "colour = blue\n").unwrap();
    let out = idla(&["boxes", "--config", cfg.to_str().unwrap(), "--m", "3", "--n", "5"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn manifest_digests_match_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = idla(&[
        "simulate", "--n-max", "4", "--replicas", "3", "--out", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let m = manifest(dir.path(), "simulate");
    let outputs = m["outputs"].as_array().unwrap();
    assert_eq!(outputs.len(), 2);
    for o in outputs {
        let bytes = fs::read(o["path"].as_str().unwrap()).unwrap();
        assert_eq!(o["bytes"], bytes.len() as u64);
        assert_eq!(o["sha256"].as_str().unwrap().len(), 64);
    }
    let csv = fs::read_to_string(dir.path().join("shape_records.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("model,q,n,replica,seed,volume,delta_I,delta_O"));
}

#[test]
fn simulate_output_is_reproducible_across_thread_counts() {
    let runs: Vec<Vec<u8>> = ["1", "3", "3"]
        .iter()
        .map(|threads| {
            let dir = tempfile::tempdir().unwrap();
            let out = idla(&[
                "--threads", threads, "simulate", "--n-max", "6", "--replicas", "6", "--seed", "7", "--out",
                dir.path().to_str().unwrap(),
            ]);
            assert_eq!(out.status.code(), Some(0));
            fs::read(dir.path().join("shape_records.csv")).unwrap()
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
    assert_eq!(runs[1], runs[2]);
}

#[test]
fn runtime_errors_exit_two_and_are_recorded() {
    let dir = tempfile::tempdir().unwrap();
    // The sphere of radius 31 on T_3 has far more cells than the exit test allows.
    let out = idla(&["exit-test", "--q", "3", "--n", "30", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    let m = manifest(dir.path(), "exit-test");
    assert_eq!(m["status"], "error");
    assert!(m["error"].as_str().unwrap().contains("budget"));
}

#[test]
fn mouse_on_a_union_of_classes() {
    let dir = tempfile::tempdir().unwrap();
    let out = idla(&[
        "mouse", "--q", "3", "--radius", "3", "--half-radius", "1", "--classes", "0,2,5", "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("mouse.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], true);
    assert_eq!(report["z_a"].as_str().unwrap().len(), 4);
}

#[test]
fn check_mode_runs_the_related_criteria() {
    let dir = tempfile::tempdir().unwrap();
    let out = idla(&["--check", "boxes", "--m", "3", "--n", "5", "--trials", "2000", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let m = manifest(dir.path(), "boxes");
    assert_eq!(m["checks"][0]["id"], 7);
    assert_eq!(m["checks"][0]["passed"], true);
}

#[test]
fn check_subcommand_runs_selected_criteria() {
    let out = idla(&["check", "--only", "1,9"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert_eq!(stdout(&out).lines().filter(|l| l.contains("PASS")).count(), 2);
    assert_eq!(idla(&["check", "--only", "11"]).status.code(), Some(1));
}
