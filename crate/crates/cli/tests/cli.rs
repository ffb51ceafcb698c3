use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::Arc;

use pulseforge::designs::DesignFile;
use pulseforge::error_basis::UnitaryErrorBasis;
use pulseforge::graphcolor::InteractionGraph;
use pulseforge::netham::PairHamiltonian;
use pulseforge::scheme::PulseScheme;
use pulseforge::signs::SignTriple;
use serde_json::Value;
use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pulseforge"))
        .args(args)
        .env_remove("PULSEFORGE_SEED")
        .output()
        .expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("bad report ({e}): {}\n{}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr))
    })
}

fn path(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_model(dir: &TempDir, name: &str, model: &PairHamiltonian<f64>) -> PathBuf {
    let p = path(dir, name);
    std::fs::write(&p, model.to_json().unwrap()).unwrap();
    p
}

#[test]
fn decouple_qutrits_in_81_steps() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "s.json");
    let res = run(&["decouple", "--n", "4", "--d", "3", "--out", s(&out)]);
    assert_eq!(res.status.code(), Some(0));
    let r = report(&res);
    assert_eq!(r["details"]["N"], 81);
    assert!(r["residuals"]["decoupling"].as_f64().unwrap() < 1e-9);
    assert_eq!(r["inputs_digest"].as_str().unwrap().len(), 64);

    let text = std::fs::read_to_string(&out).unwrap();
    let scheme = PulseScheme::<f64>::from_json(&text).unwrap();
    assert_eq!(scheme.intervals(), 81);
    assert_eq!(scheme.to_json().unwrap(), text);
}

#[test]
fn decouple_qubits_sizes() {
    let r = report(&run(&["decouple", "--n", "5", "--d", "2", "--out", "/dev/null"]));
    assert_eq!(r["details"]["N"], 16);
    let r = report(&run(&["decouple", "--n", "6", "--d", "2", "--out", "/dev/null"]));
    assert_eq!(r["details"]["N"], 64);
}

#[test]
fn decouple_bipartite_graph() {
    let dir = TempDir::new().unwrap();
    let edges: Vec<(usize, usize)> = (0..3).flat_map(|a| (3..6).map(move |b| (a, b))).collect();
    let g = path(&dir, "bipartite.json");
    std::fs::write(&g, InteractionGraph::new(6, &edges).unwrap().to_json().unwrap()).unwrap();
    let res = run(&["decouple", "--n", "6", "--d", "2", "--graph", s(&g), "--out", "/dev/null"]);
    assert_eq!(res.status.code(), Some(0));
    let r = report(&res);
    assert_eq!(r["details"]["N"], 16);
    assert_eq!(r["details"]["colors"], 2);

    let res = run(&["decouple", "--n", "5", "--d", "2", "--graph", s(&g)]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn inversion_overheads() {
    for n in ["2", "3"] {
        let r = report(&run(&["invert", "--n", n, "--d", "2", "--out", "/dev/null"]));
        assert_eq!(r["details"]["overhead"], 15.0);
        assert!(r["residuals"]["inversion"].as_f64().unwrap() < 1e-9);
    }
    let r = report(&run(&["invert", "--harmonic", "--n", "4", "--out", "/dev/null"]));
    assert_eq!(r["details"]["overhead"], 3.0);
    assert!(r["residuals"]["operator"].as_f64().unwrap() < 1e-9);
}

#[test]
fn bounds_for_the_zz_network() {
    let dir = TempDir::new().unwrap();
    let model = write_model(&dir, "zz.json", &PairHamiltonian::complete_diagonal(4, 2, 2, 1.0).unwrap());

    let r = report(&run(&["bound", "--model", s(&model), "--invert", "--out", "/dev/null"]));
    assert!((r["details"]["tau_min"].as_f64().unwrap() - 3.0).abs() < 1e-9);
    assert!((r["details"]["inversion_bound"].as_f64().unwrap() - 3.0).abs() < 1e-9);
    assert_eq!(r["details"]["lower_bound"], true);

    let r = report(&run(&["bound", "--model", s(&model), "--out", "/dev/null"]));
    assert!((r["details"]["tau_min"].as_f64().unwrap() - 1.0).abs() < 1e-9);

    let random = write_model(&dir, "random.json", &PairHamiltonian::random(3, 2, 4).unwrap());
    let r = report(&run(&["bound", "--model", s(&random), "--invert", "--rescale-search", "8", "--out", "/dev/null"]));
    let plain = r["details"]["tau_min"].as_f64().unwrap();
    assert!(r["details"]["rescaled_max"].as_f64().unwrap() >= plain);
}

#[test]
fn verify_exit_codes() {
    let dir = TempDir::new().unwrap();
    let model_h = PairHamiltonian::random(3, 2, 5).unwrap();
    let model = write_model(&dir, "m.json", &model_h);
    let scheme = path(&dir, "s.json");
    assert_eq!(run(&["decouple", "--n", "3", "--d", "2", "--out", s(&scheme)]).status.code(), Some(0));
    let res = run(&["verify", "--model", s(&model), "--scheme", s(&scheme), "--target", "zero"]);
    assert_eq!(res.status.code(), Some(0));

    let mut broken = PulseScheme::<f64>::from_json(&std::fs::read_to_string(&scheme).unwrap()).unwrap();
    broken.set_pulse(0, 3, 0).unwrap();
    let bad = path(&dir, "bad.json");
    std::fs::write(&bad, broken.to_json().unwrap()).unwrap();
    let res = run(&["verify", "--model", s(&model), "--scheme", s(&bad)]);
    assert_eq!(res.status.code(), Some(1));
    assert_eq!(report(&res)["ok"], false);

    let inv = path(&dir, "inv.json");
    assert_eq!(run(&["invert", "--n", "3", "--d", "2", "--out", s(&inv)]).status.code(), Some(0));
    let res = run(&["verify", "--model", s(&model), "--scheme", s(&inv), "--target", "invert"]);
    assert_eq!(res.status.code(), Some(0));

    let idle = path(&dir, "idle.json");
    let basis = Arc::new(UnitaryErrorBasis::<f64>::generalized_pauli(2).unwrap());
    std::fs::write(&idle, PulseScheme::identity(vec![basis; 3]).unwrap().to_json().unwrap()).unwrap();
    let res = run(&["verify", "--model", s(&model), "--scheme", s(&idle), "--target", s(&model), "--overhead", "1"]);
    assert_eq!(res.status.code(), Some(0));
}

#[test]
fn sign_triples() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "signs.json");
    let res = run(&["signs", "--m", "2", "--out", s(&out)]);
    assert_eq!(res.status.code(), Some(0));
    let st = SignTriple::from_json(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!((st.qubits(), st.intervals()), (5, 16));

    let res = run(&["signs", "--m", "1"]);
    let st = SignTriple::from_json(std::str::from_utf8(&res.stdout).unwrap()).unwrap();
    assert_eq!(st.sx.row(0).to_vec(), vec![1, -1, 1, -1]);
    assert_eq!(st.sy.row(0).to_vec(), vec![1, 1, -1, -1]);
    assert_eq!(st.sz.row(0).to_vec(), vec![1, -1, -1, 1]);

    let oa = path(&dir, "oa.json");
    assert_eq!(run(&["design", "oa", "--n", "5", "--s", "4", "--out", s(&oa)]).status.code(), Some(0));
    assert_eq!(DesignFile::from_json(&std::fs::read_to_string(&oa).unwrap()).unwrap().n, 5);
    let res = run(&["signs", "--from-oa", s(&oa), "--out", "/dev/null"]);
    assert_eq!(res.status.code(), Some(0));
    assert_eq!(report(&res)["details"]["n"], 5);

    let res = run(&["signs", "--m", "3", "--out", "/dev/null"]);
    assert_eq!(report(&res)["details"]["verification"], "pairwise");
}

#[test]
fn csv_output_and_usage_errors() {
    let res = run(&["--format", "csv", "design", "ds", "--n", "3", "--u", "5"]);
    assert_eq!(res.status.code(), Some(0));
    let text = String::from_utf8(res.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("0,0,0,0,0"));
    assert_eq!(text.lines().nth(2), Some("0,2,4,1,3"));

    assert_eq!(run(&["invert", "--n", "3"]).status.code(), Some(2));
    assert_eq!(run(&["decouple", "--d", "2"]).status.code(), Some(2));
    assert_eq!(run(&["decouple", "--n", "three", "--d", "2"]).status.code(), Some(2));
    assert_eq!(run(&["--format", "csv", "invert", "--harmonic", "--n", "3"]).status.code(), Some(2));
    assert_eq!(run(&["bound", "--model", "/nonexistent/model.json"]).status.code(), Some(2));
}

#[test]
fn seeds_are_deterministic() {
    let a = run(&["--seed", "7", "decouple", "--n", "3", "--d", "2", "--out", "/dev/null"]);
    let b = Command::new(env!("CARGO_BIN_EXE_pulseforge"))
        .args(["decouple", "--n", "3", "--d", "2", "--out", "/dev/null"])
        .env("PULSEFORGE_SEED", "7")
        .output()
        .unwrap();
    let (ra, rb) = (report(&a), report(&b));
    assert_eq!(ra["seed"], 7);
    assert_eq!(rb["seed"], 7);
    assert_eq!(ra["residuals"], rb["residuals"]);
}
