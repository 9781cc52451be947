// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_latentgraph"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stderr_error(out: &Output, code: i32) -> Value {
    assert_eq!(out.status.code(), Some(code), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let err: Value = serde_json::from_slice(&out.stderr).expect("stderr is one JSON object");
    assert!(err["error"]["message"].is_string());
    err
}

fn files_with_ext(dir: &Path, ext: &str) -> Vec<String> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(ext))
        .collect();
    names.sort();
    names
}

fn simulate(dir: &Path, args: &[&str]) -> Value {
    let mut all = vec!["simulate", "--out", dir.to_str().unwrap()];
    all.extend_from_slice(args);
    stdout_json(&run(&all))
}

fn write_fixture(dir: &Path, name: &str) -> String {
    let out = run(&["fixture", name]);
    assert!(out.status.success());
    let path = dir.join(format!("{name}.json"));
    fs::write(&path, &out.stdout).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn simulate_writes_graph_csvs_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("a");
    let summary = simulate(&dir, &["--m", "2", "--n", "5", "--seed", "11", "--samples", "500"]);
    let csvs = files_with_ext(&dir, ".csv");
    assert!((1..=3).contains(&csvs.len()), "{csvs:?}");
    assert_eq!(summary["distributions"].as_u64().unwrap() as usize, csvs.len());
    assert_eq!(files_with_ext(&dir, ".json").len(), csvs.len() + 1);
    let text = fs::read_to_string(dir.join(&csvs[0])).unwrap();
    assert_eq!(text.lines().next(), Some("X0,X1,X2,X3,X4"));
    assert_eq!(text.lines().count(), 501);

    let graph: Value = serde_json::from_str(&fs::read_to_string(dir.join("graph.json")).unwrap()).unwrap();
    assert_eq!((graph["m"].as_u64(), graph["n"].as_u64()), (Some(2), Some(5)));

    let manifest = fs::read_to_string(dir.join("manifest.jsonl")).unwrap();
    let line: Value = serde_json::from_str(manifest.lines().next().unwrap()).unwrap();
    assert_eq!(line["command"], "simulate");
    assert_eq!(line["seed"], 11);
    assert!(line["started_at"].is_string() && line["finished_at"].is_string());
    assert_eq!(line["outputs"].as_array().unwrap().len(), 2 * csvs.len() + 1);

    // Same seed, byte-identical samples.
    let again = tmp.path().join("b");
    simulate(&again, &["--m", "2", "--n", "5", "--seed", "11", "--samples", "500"]);
    for name in &csvs {
        assert_eq!(fs::read(dir.join(name)).unwrap(), fs::read(again.join(name)).unwrap());
    }
}

#[test]
fn larger_models_have_at_most_one_csv_per_target() {
    let tmp = tempfile::tempdir().unwrap();
    simulate(tmp.path(), &["--m", "4", "--n", "8", "--seed", "2", "--samples", "100"]);
    assert!(files_with_ext(tmp.path(), ".csv").len() <= 5);
}

#[test]
fn config_file_overrides_flags() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("cfg.json");
    fs::write(&config, r#"{"m": 2, "regime": "single_source", "samples": 50}"#).unwrap();
    let summary = simulate(
        &tmp.path().join("out"),
        &["--m", "3", "--n", "5", "--samples", "999", "--config", config.to_str().unwrap()],
    );
    assert_eq!(summary["graph"]["m"], 2);
    let csv = fs::read_to_string(tmp.path().join("out/dist_0.csv")).unwrap();
    assert_eq!(csv.lines().count(), 51);

    fs::write(&config, r#"{"bogus": 1}"#).unwrap();
    let out = run(&["simulate", "--n", "5", "--out", "x", "--config", config.to_str().unwrap()]);
    stderr_error(&out, 1);
}

#[test]
fn recover_from_simulated_samples_is_usually_exact() {
    let tmp = tempfile::tempdir().unwrap();
    let mut exact = 0;
    for run_index in 0..100 {
        let dir = tmp.path().join(format!("r{run_index}"));
        let r = run_index.to_string();
        simulate(&dir, &["--m", "2", "--n", "5", "--seed", "5", "--run", &r]);
        let result = stdout_json(&run(&["recover", "--input", dir.to_str().unwrap()]));
        assert_eq!(result["mode"], "samples");
        exact += usize::from(result["shd_to_truth"] == 0);
        fs::remove_dir_all(&dir).unwrap();
    }
    assert!(exact >= 95, "exact in {exact}/100 runs");
}

#[test]
fn recover_oracle_inputs_and_write_output() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("sim");
    simulate(&dir, &["--m", "3", "--n", "6", "--seed", "9", "--samples", "100"]);
    let out = tmp.path().join("result.json");
    let o = run(&["recover", "--input", dir.to_str().unwrap(), "--mode", "oracle", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let result: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(result["mode"], "oracle");
    assert!(result["subsets"].as_array().is_some_and(|s| !s.is_empty()));
    let manifest = fs::read_to_string(tmp.path().join("manifest.jsonl")).unwrap();
    assert!(manifest.contains("\"command\":\"recover\""));

    let model = write_fixture(tmp.path(), "pure-child-imaginary");
    let result = stdout_json(&run(&["recover", "--model", &model]));
    let covers: Vec<Vec<u64>> = serde_json::from_value(result["recovered"]["covers"].clone()).unwrap();
    assert_eq!(covers, vec![vec![0, 4], vec![1, 5], vec![2, 4], vec![3, 5]]);
    assert_eq!(result["shd_to_truth"], 0);
}

#[test]
fn subsets_flags_imaginary_subset_with_truth() {
    let tmp = tempfile::tempdir().unwrap();
    let model = write_fixture(tmp.path(), "running-example");
    let result = stdout_json(&run(&["subsets", "--model", &model]));
    let reports = result["subsets"].as_array().unwrap();
    let x56 = reports.iter().find(|r| r["subset"] == serde_json::json!([4, 5])).unwrap();
    assert_eq!(x56["imaginary"], true);
    assert_eq!(x56["replaceable"], false);
    let x12 = reports.iter().find(|r| r["subset"] == serde_json::json!([0, 1])).unwrap();
    assert!(x12["replaceable_witnesses"].as_array().unwrap().contains(&serde_json::json!([0, 1, 4])));
}

#[test]
fn table_in_oracle_mode_is_exact() {
    let out = run(&["table1", "--mode", "oracle", "--runs", "10", "--json"]);
    let report = stdout_json(&out);
    let cells = report["cells"].as_array().unwrap();
    assert_eq!(cells.len(), 8);
    for c in cells {
        assert_eq!(c["result"]["mean"], 0.0, "{c}");
    }
    let text = run(&["table1", "--mode", "oracle", "--runs", "10"]);
    let text = String::from_utf8(text.stdout).unwrap();
    assert!(text.contains("Pure child") && text.contains("Single source"));
    stderr_error(&run(&["table1", "--mode", "oracle", "--runs", "5"]), 1);
}

#[test]
fn equivalence_subcommands() {
    let tmp = tempfile::tempdir().unwrap();
    let ma = write_fixture(tmp.path(), "maximality-a");
    let mb = write_fixture(tmp.path(), "maximality-b");
    let report = stdout_json(&run(&["equiv", "maximal", "--model", &ma]));
    assert_eq!(report["maximal"], false);
    assert!(report["violations"]
        .as_array()
        .unwrap()
        .contains(&serde_json::json!({"kind": "latent", "from": 2, "to": 0})));
    assert_eq!(stdout_json(&run(&["equiv", "maximal", "--model", &mb]))["maximal"], true);

    let ta = write_fixture(tmp.path(), "triangle-a");
    let tb = write_fixture(tmp.path(), "triangle-b");
    let d = stdout_json(&run(&["equiv", "distinguish", "--a", &ta, "--b", &tb]));
    assert!(d["all_targets"].as_array().unwrap().contains(&serde_json::json!(1)));
    let iec = stdout_json(&run(&["equiv", "iec", "--a", &ta, "--b", &tb]));
    assert_eq!((iec["markov_equivalent"].as_bool(), iec["iec_equivalent"].as_bool()), (Some(true), Some(false)));
    let same = stdout_json(&run(&["equiv", "distinguish", "--a", &ta, "--b", &ta]));
    assert!(same["target"].is_null());

    let latent = write_fixture(tmp.path(), "running-example-latent");
    let remap = stdout_json(&run(&["equiv", "remap-check", "--graph", &latent]));
    assert_eq!(remap["all_hold"], true);
    assert_eq!(remap["results"][0]["edge"], serde_json::json!([1, 3]));
    let one = stdout_json(&run(&["equiv", "remap-check", "--graph", &latent, "--edge", "1,3"]));
    assert_eq!(one["all_hold"], true);
    stderr_error(&run(&["equiv", "remap-check", "--graph", &latent, "--edge", "3,2"]), 1);
}

#[test]
fn errors_are_json_with_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let empty = tmp.path().join("empty");
    fs::create_dir(&empty).unwrap();
    let err = stderr_error(&run(&["recover", "--input", empty.to_str().unwrap()]), 1);
    assert_eq!(err["error"]["kind"], "input");
    stderr_error(&run(&["recover", "--input", tmp.path().join("missing").to_str().unwrap()]), 1);
    stderr_error(&run(&["simulate", "--n", "5", "--out", tmp.path().to_str().unwrap()]), 1);
    stderr_error(&run(&["no-such-command"]), 1);
    stderr_error(&run(&["fixture", "nope"]), 1);
    stderr_error(&run(&["simulate", "--m", "6", "--n", "3", "--out", tmp.path().to_str().unwrap()]), 1);

    // Noisy dependency graphs that leave orientation without a consistent answer.
    let noisy = tmp.path().join("noisy");
    fs::create_dir(&noisy).unwrap();
    let k5: Vec<[usize; 2]> = (0..5).flat_map(|a| (a + 1..5).map(move |b| [a, b])).collect();
    fs::write(noisy.join("udg_0.json"), serde_json::json!({"n": 5, "edges": k5}).to_string()).unwrap();
    fs::write(noisy.join("udg_1.json"), r#"{"n": 5, "edges": [[0,1],[0,2],[0,3],[1,3],[2,4]]}"#).unwrap();
    let err = stderr_error(&run(&["recover", "--input", noisy.to_str().unwrap(), "--route", "no_imaginary"]), 2);
    assert_eq!(err["error"]["kind"], "internal");
    assert_eq!(err["error"]["stage"], "recover");

    let help = run(&["--help"]);
    assert!(help.status.success());
}
