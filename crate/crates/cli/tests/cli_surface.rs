//! Black-box tests of the command line surface: file round trips, exit
//! codes, and output reproducibility.

use std::path::Path;
use std::process::Command;

fn spml() -> Command {
    Command::new(env!("CARGO_BIN_EXE_spml"))
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn generate_cluster_round_trip_matches_in_memory() {
    let dir = tempfile::tempdir().unwrap();
    let graph_path = dir.path().join("g.sef");
    let labels_path = dir.path().join("truth.labels");
    let out_path = dir.path().join("pred.labels");

    let status = spml()
        .args(["generate", "--model", "ssbm", "--seed", "41"])
        .arg("--out")
        .arg(&graph_path)
        .arg("--labels-out")
        .arg(&labels_path)
        .status()
        .unwrap();
    assert!(status.success());

    let status = spml()
        .args(["cluster", "-k", "2", "--method", "pm:-2", "--seed", "3"])
        .arg("--input")
        .arg(&graph_path)
        .arg("--out")
        .arg(&out_path)
        .status()
        .unwrap();
    assert!(status.success());

    // compare to the in-memory pipeline on the same graph file
    let file = std::fs::File::open(&graph_path).unwrap();
    let graph: spml::Graph = spml::graph::from_edge_list(std::io::BufReader::new(file)).unwrap();
    let method = spml_cli::methods::parse_method(
        "pm:-2",
        spml_cli::methods::ShiftChoice::Auto,
        None,
    )
    .unwrap();
    let kopts = spml::cluster::KmeansOptions { seed: 3, ..Default::default() };
    let expect = spml::cluster::spectral_cluster(&graph, &method, 2, &kopts).unwrap();

    let got: Vec<usize> = read(&out_path)
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split_whitespace().nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(got, expect.as_slice());

    // and the error against the written ground truth matches the in-memory
    // clustering error
    let truth: Vec<usize> = read(&labels_path)
        .lines()
        .map(|l| l.split_whitespace().nth(1).unwrap().parse().unwrap())
        .collect();
    let err = spml::cluster::clustering_error(
        &spml::cluster::Labels::new(got),
        &spml::cluster::Labels::new(truth),
    )
    .unwrap();
    assert!(err < 0.05, "informative-corner sample should be recovered, error {err}");
}

#[test]
fn unknown_method_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let graph_path = dir.path().join("g.sef");
    std::fs::write(&graph_path, "# n=4\n0 1 1\n2 3 1\n0 2 -1\n1 3 -1\n").unwrap();
    let output = spml()
        .args(["cluster", "-k", "2", "--method", "spectral"])
        .arg("--input")
        .arg(&graph_path)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2), "{output:?}");
}

#[test]
fn k_larger_than_n_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let graph_path = dir.path().join("g.sef");
    std::fs::write(&graph_path, "# n=4\n0 1 1\n2 3 1\n0 2 -1\n1 3 -1\n").unwrap();
    let output = spml()
        .args(["cluster", "-k", "9", "--method", "pm:-1"])
        .arg("--input")
        .arg(&graph_path)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2), "{output:?}");
}

#[test]
fn degenerate_degrees_are_a_numeric_error() {
    let dir = tempfile::tempdir().unwrap();
    let graph_path = dir.path().join("g.sef");
    // vertices 3 and 4 isolated everywhere; 0..2 are fine in both layers
    std::fs::write(
        &graph_path,
        "# n=5\n0 1 1\n1 2 1\n0 2 1\n0 1 -1\n1 2 -1\n",
    )
    .unwrap();
    let output = spml()
        .args(["cluster", "-k", "2", "--method", "pm:-1"])
        .arg("--input")
        .arg(&graph_path)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1), "{output:?}");

    // the preprocessing flag fixes it
    let output = spml()
        .args(["cluster", "-k", "2", "--method", "pm:-1", "--drop-isolated"])
        .arg("--input")
        .arg(&graph_path)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "{output:?}");
    let text = String::from_utf8(output.stdout).unwrap();
    // labels carry original ids; the isolated tail is gone
    let ids: Vec<usize> = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split_whitespace().next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(ids, vec![0, 1, 2]);
}

#[test]
fn parse_errors_are_numeric_failures_with_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let graph_path = dir.path().join("bad.sef");
    std::fs::write(&graph_path, "0 1 1\n1 1 1\n").unwrap();
    let output = spml()
        .args(["cluster", "-k", "2", "--method", "pm:-1"])
        .arg("--input")
        .arg(&graph_path)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1), "{output:?}");
    let stderr = String::from_utf8(output.stderr).unwrap();
    assert!(stderr.contains("line 2"), "stderr: {stderr}");
}

#[test]
fn csv_outputs_are_byte_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("cfg");
    std::fs::write(&cfg_path, "grid_steps = 3\nsamples = 2\ncluster_size = 100\nmethods = pm:-1,sn\n")
        .unwrap();
    let out_a = dir.path().join("a.csv");
    let out_b = dir.path().join("b.csv");
    for out in [&out_a, &out_b] {
        let status = spml()
            .args(["phase-diagram", "--seed", "5"])
            .arg("--config")
            .arg(&cfg_path)
            .arg("--out")
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
    }
    // identical numeric columns; only the wall-time column may differ
    let strip = |text: String| -> Vec<String> {
        text.lines()
            .filter(|l| !l.starts_with('#'))
            .map(|l| {
                let mut cells: Vec<&str> = l.split(',').collect();
                cells.pop(); // wall_ms is last
                cells.join(",")
            })
            .collect()
    };
    assert_eq!(strip(read(&out_a)), strip(read(&out_b)));
}

#[test]
fn config_file_keys_are_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("cfg");
    std::fs::write(&cfg_path, "steps = 20\nmethods = pm:1\n").unwrap();
    let out = dir.path().join("r.csv");
    let status = spml()
        .args(["regions", "--method", "pm:-inf"])
        .arg("--config")
        .arg(&cfg_path)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let text = read(&out);
    assert!(text.contains("pm:-inf"), "flag override lost: {text}");
    assert!(!text.lines().any(|l| !l.starts_with('#') && l.contains("pm:1,")));
    // the merged config is echoed
    assert!(text.contains("# methods = pm:-inf"));
    assert!(text.contains("# steps = 20"));
}
