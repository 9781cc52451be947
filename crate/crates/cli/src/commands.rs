// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::path::{Path, PathBuf};

use chrono::Utc;
use latentgraph::equivalence::{
    distinguishing_target, iec_equivalent, markov_equivalent, maximality_check, target_families, theorem_remap_check,
};
use latentgraph::experiment::{robust_pipeline, ExperimentConfig, Mode, Table1Options, DEFAULT_RUNS, DEFAULT_SAMPLES};
use latentgraph::fixtures;
use latentgraph::independence::{
    permutation_threshold, udg_from_samples, SampleMatrix, DEFAULT_LEVEL, DEFAULT_PERMUTATIONS,
};
use latentgraph::model::complete_targets;
use latentgraph::recovery::full_pipeline_traced;
use latentgraph::sim::{sem_sample, shd_to_truth, Regime};
use latentgraph::subsets::{analyze, SubsetReport, DEFAULT_SEARCH_GUARD};
use latentgraph::udg::{oracle_udgs, CliqueFamily};
use latentgraph::{Dag, MeasurementModel, RecoveredModel, Route, Udg};
use serde::Serialize;
use serde_json::json;

use crate::report::{print_stdout, read_json, to_pretty, write_file, CliError, CliResult, RunManifest, Stage};
use crate::Params;

pub const GRAPH_FILE: &str = "graph.json";
const TABLE_SEED: u64 = 2024;

pub enum Input {
    Dir(PathBuf),
    Model(PathBuf),
}

fn required(value: Option<usize>, name: &str) -> CliResult<usize> {
    value.ok_or_else(|| CliError::input("arguments", format!("--{name} is required")))
}

fn config_json(params: &Params, extra: serde_json::Value) -> serde_json::Value {
    let mut value = serde_json::to_value(params).expect("params serialize");
    if let (Some(obj), serde_json::Value::Object(more)) = (value.as_object_mut(), extra) {
        obj.extend(more);
    }
    value
}

/// Writes `body` to `out` with a manifest next to it, or prints it.
fn emit(body: &str, out: Option<&Path>, manifest: RunManifest) -> CliResult<()> {
    let Some(out) = out else {
        print_stdout(&format!("{body}\n"));
        return Ok(());
    };
    write_file(out, body)?;
    let dir = out.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut manifest = manifest;
    manifest.outputs.push(out.to_path_buf());
    manifest.append(dir)?;
    Ok(())
}

pub fn simulate(params: &Params, run: usize, out: &Path) -> CliResult<()> {
    let started = Utc::now();
    let m = required(params.m, "m")?;
    let n = required(params.n, "n")?;
    let seed = params.seed.unwrap_or(0);
    let mut cfg = ExperimentConfig::new(m, n, params.regime.unwrap_or(Regime::PureChild), Mode::Samples, seed);
    cfg.samples = params.samples.unwrap_or(DEFAULT_SAMPLES);
    let truth = cfg.truth(run).stage("generate")?;
    let spec = cfg.sem(run, truth.clone());
    let sample_seed = cfg.sample_seed(run);

    fs::create_dir_all(out).map_err(|e| CliError::input("write", format!("{}: {e}", out.display())))?;
    let mut outputs = vec![out.join(GRAPH_FILE)];
    write_file(&outputs[0], &to_pretty(&truth))?;

    // A hard intervention gives the target a new marginal, so every target
    // yields a distinct distribution even when its dependency graph repeats.
    let targets = complete_targets(m);
    let udgs = oracle_udgs(&truth, &targets).stage("generate")?;
    for (k, (&t, udg)) in targets.iter().zip(&udgs).enumerate() {
        let csv = out.join(format!("dist_{k}.csv"));
        sem_sample(&spec, t, cfg.samples, sample_seed)
            .stage("sample")?
            .write_csv(&csv)
            .map_err(|e| CliError::input("write", e.to_string()))?;
        let json = out.join(format!("udg_{k}.json"));
        write_file(&json, &to_pretty(udg))?;
        outputs.extend([csv, json]);
    }

    let mut manifest = RunManifest::new("simulate", config_json(params, json!({ "run": run })), seed, started);
    manifest.outputs = outputs;
    let summary = json!({ "graph": truth, "distributions": targets.len(), "outputs": manifest.outputs });
    manifest.append(out)?;
    print_stdout(&format!("{}\n", to_pretty(&summary)));
    Ok(())
}

struct Loaded {
    mode: Mode,
    udgs: Vec<Udg>,
    threshold: Option<f64>,
    truth: Option<MeasurementModel>,
}

fn sorted_files(dir: &Path, keep: impl Fn(&str) -> bool) -> CliResult<Vec<PathBuf>> {
    let entries = fs::read_dir(dir).map_err(|e| CliError::input("read", format!("{}: {e}", dir.display())))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.file_name().and_then(|s| s.to_str()).is_some_and(&keep))
        .collect();
    files.sort();
    Ok(files)
}

fn load(params: &Params, input: &Input) -> CliResult<Loaded> {
    let dir = match input {
        Input::Model(path) => {
            let truth: MeasurementModel = read_json(path)?;
            let udgs = oracle_udgs(&truth, &complete_targets(truth.m())).stage("oracle")?;
            return Ok(Loaded { mode: Mode::Oracle, udgs, threshold: None, truth: Some(truth) });
        }
        Input::Dir(dir) => dir,
    };
    let csvs = sorted_files(dir, |name| name.ends_with(".csv"))?;
    let jsons = sorted_files(dir, |name| name.starts_with("udg_") && name.ends_with(".json"))?;
    let mode = params.mode.unwrap_or(if csvs.is_empty() { Mode::Oracle } else { Mode::Samples });
    let graph = dir.join(GRAPH_FILE);
    let truth = if graph.is_file() { Some(read_json(&graph)?) } else { None };
    match mode {
        Mode::Oracle => {
            if jsons.is_empty() {
                return Err(CliError::input("read", format!("{}: no udg_*.json files", dir.display())));
            }
            let udgs = jsons.iter().map(|p| read_json(p)).collect::<CliResult<_>>()?;
            Ok(Loaded { mode, udgs, threshold: None, truth })
        }
        Mode::Samples => {
            if csvs.is_empty() {
                return Err(CliError::input("read", format!("{}: no CSV files", dir.display())));
            }
            let data: Vec<SampleMatrix> =
                csvs.iter().map(|p| SampleMatrix::read_csv(p)).collect::<latentgraph::Result<_>>().stage("read")?;
            let rows = data[0].rows();
            let threshold = match params.threshold {
                Some(t) => t,
                None => permutation_threshold(rows, DEFAULT_PERMUTATIONS, DEFAULT_LEVEL, params.seed.unwrap_or(0))
                    .stage("threshold")?,
            };
            let udgs = data
                .iter()
                .map(|d| Ok(udg_from_samples(d, threshold)?.udg))
                .collect::<latentgraph::Result<_>>()
                .stage("estimate")?;
            Ok(Loaded { mode, udgs, threshold: Some(threshold), truth })
        }
    }
}

fn route(params: &Params) -> Route {
    params.route.unwrap_or(match params.regime {
        Some(Regime::SingleSource) => Route::NoImaginary,
        _ => Route::PureChild,
    })
}

#[derive(Serialize)]
struct RecoverOutput {
    mode: Mode,
    route: Route,
    #[serde(skip_serializing_if = "Option::is_none")]
    threshold: Option<f64>,
    distributions: usize,
    distinct_dependency_graphs: usize,
    recovered: RecoveredModel,
    notes: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    shd_to_truth: Option<usize>,
    subsets: Vec<SubsetReport>,
}

pub fn recover(params: &Params, input: &Input, out: Option<&Path>) -> CliResult<()> {
    let started = Utc::now();
    let loaded = load(params, input)?;
    let route = route(params);
    let family = CliqueFamily::new(&loaded.udgs).stage("clique_family")?;
    let (recovered, notes) = match loaded.mode {
        Mode::Oracle => {
            (full_pipeline_traced(&loaded.udgs, route, DEFAULT_SEARCH_GUARD).stage("recover")?.recovered, Vec::new())
        }
        Mode::Samples => robust_pipeline(&loaded.udgs, route, DEFAULT_SEARCH_GUARD).stage("recover")?,
    };
    let output = RecoverOutput {
        mode: loaded.mode,
        route,
        threshold: loaded.threshold,
        distributions: loaded.udgs.len(),
        distinct_dependency_graphs: family.len(),
        shd_to_truth: loaded.truth.as_ref().map(|t| shd_to_truth(&recovered, t)),
        subsets: analyze(&family, loaded.truth.as_ref()).stage("subsets")?,
        recovered,
        notes,
    };
    let manifest =
        RunManifest::new("recover", config_json(params, input_json(input)), params.seed.unwrap_or(0), started);
    emit(&to_pretty(&output), out, manifest)
}

fn input_json(input: &Input) -> serde_json::Value {
    match input {
        Input::Dir(p) => json!({ "input": p }),
        Input::Model(p) => json!({ "model": p }),
    }
}

pub fn subsets(params: &Params, input: &Input, truth: Option<&Path>, out: Option<&Path>) -> CliResult<()> {
    let started = Utc::now();
    let mut loaded = load(params, input)?;
    if let Some(path) = truth {
        loaded.truth = Some(read_json(path)?);
    }
    let family = CliqueFamily::new(&loaded.udgs).stage("clique_family")?;
    let reports = analyze(&family, loaded.truth.as_ref()).stage("subsets")?;
    let body = to_pretty(&json!({ "mode": loaded.mode, "threshold": loaded.threshold, "subsets": reports }));
    let manifest =
        RunManifest::new("subsets", config_json(params, input_json(input)), params.seed.unwrap_or(0), started);
    emit(&body, out, manifest)
}

pub fn table1(params: &Params, as_json: bool, out: Option<&Path>) -> CliResult<()> {
    let started = Utc::now();
    let seed = params.seed.unwrap_or(TABLE_SEED);
    let mut opts = Table1Options::new(
        params.mode.unwrap_or(Mode::Samples),
        params.runs.unwrap_or(DEFAULT_RUNS),
        params.samples.unwrap_or(DEFAULT_SAMPLES),
        seed,
    );
    opts.threshold = params.threshold;
    let report = latentgraph::experiment::table1(&opts).stage("table1")?;
    let body = to_pretty(&report);
    if as_json {
        print_stdout(&format!("{body}\n"));
    } else {
        print_stdout(&report.render());
    }
    if let Some(out) = out {
        let manifest = RunManifest::new("table1", config_json(params, json!({})), seed, started);
        emit(&body, Some(out), manifest)?;
    }
    Ok(())
}

pub fn equiv_iec(a: &Path, b: &Path) -> CliResult<()> {
    let (g1, g2): (Dag, Dag) = (read_json(a)?, read_json(b)?);
    let body = json!({
        "markov_equivalent": markov_equivalent(&g1, &g2).stage("equiv")?,
        "iec_equivalent": iec_equivalent(&g1, &g2).stage("equiv")?,
    });
    print_stdout(&format!("{}\n", to_pretty(&body)));
    Ok(())
}

pub fn equiv_remap(graph: &Path, edge: Option<(usize, usize)>) -> CliResult<()> {
    let g: Dag = read_json(graph)?;
    let edges = edge.map_or_else(|| g.isolated_edges(), |e| vec![e]);
    let targets = complete_targets(g.node_count());
    let results = edges
        .iter()
        .map(|&e| Ok(json!({ "edge": e, "holds": theorem_remap_check(&g, e, &targets)? })))
        .collect::<latentgraph::Result<Vec<_>>>()
        .stage("equiv")?;
    let all_hold = results.iter().all(|r| r["holds"] == true);
    print_stdout(&format!("{}\n", to_pretty(&json!({ "results": results, "all_hold": all_hold }))));
    Ok(())
}

pub fn equiv_distinguish(a: &Path, b: &Path) -> CliResult<()> {
    let (g1, g2): (Dag, Dag) = (read_json(a)?, read_json(b)?);
    let target = distinguishing_target(&g1, &g2).stage("equiv")?;
    // Every single-node target of the first graph whose family no target of
    // the second reproduces.
    let (f1, f2) = (target_families(&g1).stage("equiv")?, target_families(&g2).stage("equiv")?);
    let all: Vec<_> = f1
        .iter()
        .filter(|(t, fam)| !t.is_empty() && f2.iter().all(|(_, other)| other != fam))
        .map(|(t, _)| *t)
        .collect();
    print_stdout(&format!("{}\n", to_pretty(&json!({ "target": target, "all_targets": all }))));
    Ok(())
}

pub fn equiv_maximal(model: &Path) -> CliResult<()> {
    let g: MeasurementModel = read_json(model)?;
    let report = maximality_check(&g, &complete_targets(g.m())).stage("equiv")?;
    let body = json!({
        "maximal": report.maximal,
        "first_violation": report.first_violation(),
        "violations": report.violations,
    });
    print_stdout(&format!("{}\n", to_pretty(&body)));
    Ok(())
}

const FIXTURE_NAMES: &[&str] = &[
    "running-example",
    "running-example-latent",
    "replaceable",
    "fractured-cover",
    "pure-child-imaginary",
    "no-fractured",
    "maximality-a",
    "maximality-b",
    "faithfulness-a",
    "faithfulness-b",
    "latent-signature-a",
    "latent-signature-b",
    "incomplete-targets-a",
    "incomplete-targets-b",
    "triangle-a",
    "triangle-b",
];

pub fn fixture(name: &str) -> CliResult<()> {
    let model = |g: MeasurementModel| serde_json::to_value(g).expect("models serialize");
    let dag = |g: Dag| serde_json::to_value(g).expect("graphs serialize");
    let value = match name {
        "running-example" => model(fixtures::running_example()),
        "running-example-latent" => dag(fixtures::running_example().latent_dag().clone()),
        "replaceable" => model(fixtures::replaceable_example()),
        "fractured-cover" => model(fixtures::fractured_cover_example()),
        "pure-child-imaginary" => model(fixtures::pure_child_imaginary_example()),
        "no-fractured" => model(fixtures::no_fractured_example()),
        "maximality-a" => model(fixtures::maximality_pair().0),
        "maximality-b" => model(fixtures::maximality_pair().1),
        "faithfulness-a" => model(fixtures::faithfulness_pair().0),
        "faithfulness-b" => model(fixtures::faithfulness_pair().1),
        "latent-signature-a" => model(fixtures::latent_signature_pair().0),
        "latent-signature-b" => model(fixtures::latent_signature_pair().1),
        "incomplete-targets-a" => model(fixtures::incomplete_targets_pair().0),
        "incomplete-targets-b" => model(fixtures::incomplete_targets_pair().1),
        "triangle-a" => dag(fixtures::triangle_pair().0),
        "triangle-b" => dag(fixtures::triangle_pair().1),
        other => {
            return Err(CliError::input(
                "arguments",
                format!("unknown fixture '{other}'; expected one of {}", FIXTURE_NAMES.join(", ")),
            ))
        }
    };
    print_stdout(&format!("{}\n", to_pretty(&value)));
    Ok(())
}
