use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dicore::digraph::{parse_edge_list, write_edge_list};
use dicore::{brute_force_core, sample_digraph, state_of, CoreParams, Digraph};
use serde_json::Value;

fn dicore(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dicore")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

fn write_graph(dir: &Path, name: &str, g: &Digraph) -> PathBuf {
    let path = dir.join(name);
    let mut buf = Vec::new();
    write_edge_list(&mut buf, g).unwrap();
    fs::write(&path, buf).unwrap();
    path
}

#[test]
fn threshold_values() {
    let v = json(&dicore(&["threshold", "--k1", "2", "--k2", "2"]));
    assert_eq!(v["results"]["c_star_rounded"], 3.817);
    assert!(v["elapsed_seconds"].is_null());
    assert_eq!(v["software_version"], env!("CARGO_PKG_VERSION"));
    let v = json(&dicore(&["threshold", "--k1", "4", "--k2", "1"]));
    assert_eq!(v["results"]["c_star_rounded"], 6.799);
}

#[test]
fn unsupported_and_malformed_arguments_exit_with_2() {
    let o = dicore(&["threshold", "--k1", "1", "--k2", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unsupported"));
    assert_eq!(dicore(&["threshold", "--k1", "x", "--k2", "2"]).status.code(), Some(2));
    assert_eq!(dicore(&["mc", "--n", "10", "--m", "5", "--c", "1", "--k1", "1", "--k2", "2"]).status.code(), Some(2));
    assert_eq!(dicore(&["mc", "--n", "10", "--m", "91", "--k1", "1", "--k2", "2"]).status.code(), Some(2));
    assert_eq!(dicore(&["mc", "--n", "10", "--m", "9", "--k1", "1", "--k2", "2", "--trials", "0"]).status.code(), Some(2));
    assert_eq!(dicore(&["fixedpoint", "--c", "-1", "--k1", "2", "--k2", "2"]).status.code(), Some(2));
    assert_eq!(dicore(&["bogus"]).status.code(), Some(2));
}

#[test]
fn timing_is_opt_in() {
    let v = json(&dicore(&["threshold", "--k1", "2", "--k2", "3", "--timing"]));
    assert!(v["elapsed_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn peel_keeps_a_complete_digraph() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_graph(dir.path(), "k4.txt", &Digraph::complete(4));
    let out = dicore(&["peel", input.to_str().unwrap(), "--k1", "2", "--k2", "2"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), fs::read_to_string(&input).unwrap());
}

#[test]
fn peel_empties_a_cycle() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_graph(dir.path(), "c5.txt", &Digraph::cycle(5));
    let out_path = dir.path().join("core.txt");
    let out = dicore(&["peel", input.to_str().unwrap(), "--k1", "1", "--k2", "2", "--out", out_path.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(fs::read_to_string(out_path).unwrap(), "5 0\n");
}

#[test]
fn peel_fixture_matches_exhaustive_search() {
    let fixture = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/small.txt");
    let g = parse_edge_list(&fs::read_to_string(&fixture).unwrap()).unwrap();
    let params = CoreParams::new(1, 2);
    let want = brute_force_core(&g, params).unwrap();
    let out = dicore(&["peel", fixture.to_str().unwrap(), "--k1", "1", "--k2", "2"]);
    let core = parse_edge_list(&stdout(&out)).unwrap();
    assert_eq!(core.non_isolated(), want);
    assert!(want.iter().any(|&b| b) && !want.iter().all(|&b| b));
    assert_eq!(core, g.induced(&want));
}

#[test]
fn sample_then_peel_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.txt");
    let out = dicore(&["sample", "--n", "60", "--c", "2.5", "--seed", "9", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let original = sample_digraph(60, 150, 9).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    assert_eq!(parse_edge_list(&text).unwrap(), original);

    // With both bounds at zero nothing is peeled.
    let out = dicore(&["peel", path.to_str().unwrap(), "--k1", "0", "--k2", "0"]);
    let back = parse_edge_list(&stdout(&out)).unwrap();
    for params in [CoreParams::new(1, 2), CoreParams::new(2, 2)] {
        assert_eq!(state_of(&back, params), state_of(&original, params));
    }
}

#[test]
fn sequence_model_sample_has_2m_labels() {
    let out = dicore(&["sample", "--n", "3", "--m", "4", "--model", "sequence", "--seed", "1"]);
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("3 4"));
    assert_eq!(lines.count(), 4);
}

#[test]
fn parse_errors_report_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.txt");
    fs::write(&path, "3 2\n0 1\n2 2\n").unwrap();
    let out = dicore(&["peel", path.to_str().unwrap(), "--k1", "1", "--k2", "1"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
    let missing = dicore(&["peel", dir.path().join("nope").to_str().unwrap(), "--k1", "1", "--k2", "1"]);
    assert_eq!(missing.status.code(), Some(3));
}

#[test]
fn mc_output_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |jobs: &str, format: &str, name: &str| {
        let path = dir.path().join(name);
        let args = [
            "mc", "--n", "100", "--m", "300", "--k1", "1", "--k2", "2", "--trials", "300", "--seed", "42", "--jobs", jobs,
            "--format", format, "--out", path.to_str().unwrap(),
        ];
        assert!(dicore(&args).status.success());
        fs::read(path).unwrap()
    };
    let a = run("4", "json", "a.json");
    let b = run("4", "json", "b.json");
    assert_eq!(a, b);
    let seq: Value = serde_json::from_slice(&run("1", "json", "c.json")).unwrap();
    let par: Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(seq["results"], par["results"]);
    assert_eq!(par["config"]["m"], 300);
    assert_eq!(par["config"]["c"], 3.0);
    let count = par["results"]["nonempty_count"].as_u64().unwrap();
    assert_eq!(par["results"]["nonempty_fraction"].as_f64().unwrap(), count as f64 / 300.0);
    assert_eq!(run("1", "csv", "a.csv"), run("3", "csv", "b.csv"));
}

#[test]
fn mc_records_as_csv() {
    let out = dicore(&[
        "mc", "--n", "50", "--c", "3", "--k1", "1", "--k2", "2", "--trials", "7", "--records", "--format", "csv",
    ]);
    let text = stdout(&out);
    assert!(text.starts_with("trial,seed,core_vertices,core_arcs\n"));
    assert_eq!(text.lines().count(), 8);
}

#[test]
fn ode_and_compare_outputs() {
    let out = dicore(&["ode", "--c", "4", "--k1", "2", "--k2", "2", "--format", "csv"]);
    assert!(stdout(&out).starts_with("t,z_i,z_o,v,mu,mu_i,mu_o,v_i,v_o,L,phi1,phi2\n"));
    let v = json(&dicore(&["ode", "--c", "3", "--k1", "2", "--k2", "2"]));
    assert_eq!(v["results"]["verdict"], "CollapsedSubcritical");

    let v = json(&dicore(&["compare", "--c", "4", "--k1", "2", "--k2", "2", "--n", "20000", "--rows", "10"]));
    let gaps = v["results"]["sup_gap"].as_array().unwrap();
    assert_eq!(gaps.len(), 6);
    assert!(gaps.iter().all(|g| g.as_f64().unwrap() < 0.05));
    assert_eq!(v["results"]["ode_verdict"], "TerminatedSupercritical");

    let v = json(&dicore(&["compare", "--c", "3", "--k1", "2", "--k2", "2", "--n", "20000", "--rows", "10"]));
    assert_eq!(v["results"]["ode_verdict"], "CollapsedSubcritical");
    assert_eq!(v["results"]["sim_core_vertices"], 0);
    assert_eq!(v["results"]["predicted"]["verdict"], "Empty");
}

#[test]
fn predict_and_fixedpoint() {
    let v = json(&dicore(&["predict", "--c", "3.4", "--n", "1000000", "--k1", "1", "--k2", "2"]));
    let vertices = v["results"]["prediction"]["vertices"].as_f64().unwrap();
    assert!((vertices - 599621.1067).abs() < 1e-3);
    let v = json(&dicore(&["fixedpoint", "--c", "3", "--k1", "2", "--k2", "2"]));
    assert_eq!(v["results"]["verdict"], "Subcritical");
}
