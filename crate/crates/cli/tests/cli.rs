use std::path::Path;
use std::process::{Command, Output};

fn torus4(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_torus4")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn first_line(o: &Output) -> String {
    stdout(o).lines().next().unwrap_or_default().to_string()
}

#[test]
fn params_reproduces_small_codes() {
    let det2 = torus4(&["params", "--hnf", "1,0,0,1,1,0,1,1,0,2"]);
    assert!(det2.status.success());
    assert_eq!(first_line(&det2), "[[12,6,2]]");
    let identity = torus4(&["params", "--lattice", "identity"]);
    assert_eq!(first_line(&identity), "[[6,6,1]]");
    let det18 = torus4(&["params", "--hnf", "1,0,0,3,1,0,5,1,7,18", "--trials", "500"]);
    assert_eq!(first_line(&det18), "[[108,6,9]]");
}

#[test]
fn params_json_and_lattice_file() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("lattice.json");
    // A non-HNF basis of the Det3 lattice.
    std::fs::write(&file, r#"{"basis": [[1,0,0,1],[1,1,0,2],[0,0,1,1],[0,0,0,3]]}"#).unwrap();
    let o = torus4(&["params", "--lattice-file", file.to_str().unwrap(), "--json"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["n"], 18);
    assert_eq!(v["k"], 6);
    assert_eq!(v["d"], 3);
    assert_eq!(v["hnf"], "1,0,0,1,1,0,1,1,1,3");
}

#[test]
fn config_errors_exit_with_code_2() {
    assert_eq!(torus4(&["params", "--hnf", "1,2,3"]).status.code(), Some(2));
    assert_eq!(torus4(&["params", "--hnf", "0,0,0,0,1,0,0,1,0,1"]).status.code(), Some(2));
    assert_eq!(torus4(&["params", "--lattice", "Det3", "--no-such-flag"]).status.code(), Some(2));
    assert_eq!(torus4(&["params"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"lattice": {"name": "Det3"}, "shotz": 5}"#).unwrap();
    assert_eq!(torus4(&["simulate", "--config", bad.to_str().unwrap()]).status.code(), Some(2));
    let missing = dir.path().join("missing.json");
    assert_eq!(torus4(&["params", "--lattice-file", missing.to_str().unwrap()]).status.code(), Some(2));
}

fn cnot_layers(text: &str) -> usize {
    text.split("TICK").filter(|layer| layer.lines().any(|l| l.starts_with("CX "))).count()
}

#[test]
fn circuit_depths_and_golden_bytes() {
    let compact = torus4(&["circuit", "--lattice", "Det3", "--circuit", "compact", "--rounds", "1"]);
    assert!(compact.status.success());
    assert_eq!(cnot_layers(&stdout(&compact)), 8);
    let starfish = torus4(&["circuit", "--lattice", "Det3", "--circuit", "starfish"]);
    assert_eq!(cnot_layers(&stdout(&starfish)), 16);
    let again = torus4(&["circuit", "--lattice", "Det3", "--circuit", "compact", "--rounds", "1"]);
    assert_eq!(compact.stdout, again.stdout);

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c");
    let o = torus4(&["circuit", "--lattice", "Det9a", "--circuit", "starfish", "--rounds", "2", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let meta: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("circuit.json")).unwrap()).unwrap();
    assert_eq!(meta["rounds"].as_array().unwrap().len(), 2);
    assert!(meta["config_sha256"].as_str().unwrap().len() == 64);
    let text = std::fs::read_to_string(out.join("circuit.txt")).unwrap();
    assert!(text.starts_with("# torus4 "));
    assert_eq!(cnot_layers(&text), 32);
}

#[test]
fn specs_table_cells() {
    let o = torus4(&["specs", "--json"]);
    let rows: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let cell = |i: usize, k: &str| rows[i][k].as_u64().unwrap();
    assert_eq!((cell(0, "logical_qubits"), cell(0, "data_qubits"), cell(0, "measurements_per_cycle")), (54, 864, 1152));
    assert_eq!((cell(1, "logical_qubits"), cell(1, "data_qubits"), cell(1, "measurements_per_cycle")), (96, 4320, 5760));
    assert_eq!((cell(2, "logical_qubits"), cell(2, "data_qubits"), cell(2, "measurements_per_cycle")), (1500, 67500, 90000));
    let custom = torus4(&["specs", "--entry", "3,3,2"]);
    assert!(stdout(&custom).contains("36"));
}

#[test]
fn hnf_iterator_counts_index_two_sublattices() {
    // Z^4 has (2^4 - 1) / (2 - 1) = 15 sublattices of index 2.
    let o = torus4(&["hnfs", "--det", "2"]);
    assert_eq!(stdout(&o).lines().count(), 15);
    let o = torus4(&["hnfs", "--det", "12", "--limit", "7"]);
    assert_eq!(stdout(&o).lines().count(), 7);
}

#[test]
fn symmetry_catalog_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("catalog.json");
    let o = torus4(&["symmetries", "--lattice", "Hadamard", "--out", path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("distinct logical permutations    24"), "{text}");
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let perms = v["catalog"]["gates"].as_array().unwrap().iter().filter(|g| g["kind"] == "permutation").count();
    assert!(perms >= 24);

    let ok = torus4(&["symmetries", "--verify", path.to_str().unwrap()]);
    assert!(ok.status.success());

    // Corrupt one logical matrix entry: verification is an invariant failure.
    let mut v = v;
    let row = v["catalog"]["gates"][1]["logical_matrix"][0].as_str().unwrap().to_string();
    let flipped: String = row.chars().enumerate().map(|(i, c)| if i == 0 { if c == '0' { '1' } else { '0' } } else { c }).collect();
    v["catalog"]["gates"][1]["logical_matrix"][0] = serde_json::Value::String(flipped);
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, serde_json::to_string(&v).unwrap()).unwrap();
    assert_eq!(torus4(&["symmetries", "--verify", bad.to_str().unwrap()]).status.code(), Some(3));
}

fn results_without_runtime(dir: &Path) -> Vec<serde_json::Value> {
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.join("results.json")).unwrap()).unwrap();
    v["result"]["points"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| {
            let mut p = p.clone();
            p.as_object_mut().unwrap().remove("runtime_s");
            p
        })
        .collect()
}

#[test]
fn simulate_run_directory_and_dump_config_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let base = [
        "simulate", "--lattice", "Det3", "--circuit", "compact", "--p", "3e-3,6e-3", "--shots", "1024", "--decoder", "bposd",
        "--seed", "11",
    ];
    let dumped = torus4(&[&base[..], &["--dump-config"]].concat());
    assert!(dumped.status.success());
    let cfg_path = dir.path().join("config.json");
    std::fs::write(&cfg_path, &dumped.stdout).unwrap();

    let run1 = dir.path().join("run1");
    let o = torus4(&[&base[..], &["--out", run1.to_str().unwrap(), "--emit-plot-data"]].concat());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["config.json", "results.csv", "results.json", "plot.dat", "circuits/round.txt", "logs/run.log"] {
        assert!(run1.join(f).exists(), "missing {f}");
    }
    assert_eq!(std::fs::read(run1.join("config.json")).unwrap(), dumped.stdout[..dumped.stdout.len() - 1].to_vec());
    let csv = std::fs::read_to_string(run1.join("results.csv")).unwrap();
    assert!(csv.starts_with("# torus4 ") && csv.contains("seed=11"));
    assert_eq!(csv.lines().count(), 4);

    let run2 = dir.path().join("run2");
    let o = Command::new(env!("CARGO_BIN_EXE_torus4"))
        .args(["simulate", "--config", cfg_path.to_str().unwrap(), "--out", run2.to_str().unwrap()])
        .env("TORUS4_THREADS", "1")
        .output()
        .unwrap();
    assert!(o.status.success());
    assert_eq!(results_without_runtime(&run1), results_without_runtime(&run2));

    let redump = torus4(&["simulate", "--config", cfg_path.to_str().unwrap(), "--dump-config"]);
    assert_eq!(redump.stdout, dumped.stdout);
}

#[test]
fn simulate_power_decoder_and_postselection() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = torus4(&[
        "simulate", "--lattice", "Det3", "--circuit", "starfish", "--decoder", "power", "--p", "0,2e-3", "--shots", "512",
        "--rounds", "2", "--postselect-weight", "3", "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let pts = results_without_runtime(&out);
    assert_eq!(pts[0]["failures"], 0);
    assert_eq!(pts[0]["discarded"], 0);
    let kept = pts[1]["shots"].as_u64().unwrap() + pts[1]["discarded"].as_u64().unwrap();
    assert_eq!(kept, 512);
}
