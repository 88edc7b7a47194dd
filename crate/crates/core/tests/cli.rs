use std::path::Path;
use std::process::{Command, Output};

use graphsense::experiments::{run_sweep, AxisConfig, Observable, Parallelism, SweepConfig};
use graphsense::output::emit_csv;

fn graphsense(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_graphsense"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn catalog_lists_six_graphs() {
    let out = graphsense(&["catalog"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 7);
    assert!(text.contains("K4,4,6,12,2,6"));
    assert!(text.contains("PAN,4,4,8,2,6"));
}

#[test]
fn graph_sources_are_exclusive() {
    let out = graphsense(&["qfi-field", "--graph", "P4", "--graph-file", "g.txt"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_graph_is_a_usage_error() {
    assert_eq!(graphsense(&["spectrum"]).status.code(), Some(2));
    assert_eq!(graphsense(&["spectrum", "--graph", "X7"]).status.code(), Some(2));
}

#[test]
fn bad_temperature_is_a_usage_error() {
    let out = graphsense(&["qfi-temp", "--graph", "C4", "--T", "-0.1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn graph_file_input() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("triangle.txt");
    std::fs::write(&path, "# triangle\nn 3\ne 0 1\ne 1 2\ne 0 2\n").unwrap();
    let out = graphsense(&["spectrum", "--graph-file", path.to_str().unwrap(), "--h", "0"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 9);
    assert!(text.lines().nth(1).unwrap().starts_with("triangle,1,0,0,-3"));

    std::fs::write(&path, "n 3\ne 0 1\n").unwrap();
    let out = graphsense(&["spectrum", "--graph-file", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn range_writes_csv_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = graphsense(&[
        "qfi-field", "--graph", "P4,K4", "--J", "-1", "--T", "0.04", "--range", "0.01:1:11", "--out", d, "--svg",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("qfi_field_J-1_T0.04.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 11);
    assert!(!csv.contains('\r'));
    let svg = std::fs::read_to_string(dir.path().join("qfi_field_J-1_T0.04.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 2);
}

#[test]
fn sweep_subcommand_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = SweepConfig::new(
        &["C4", "S3"],
        &[1.0, -1.0],
        AxisConfig { steps: 7, ..AxisConfig::default_temperature() },
        0.3,
        &[Observable::QfiTemp, Observable::BoltzmannRate],
    );
    let cfg_path = dir.path().join("sweep.toml");
    std::fs::write(&cfg_path, cfg.to_toml()).unwrap();
    let out_dir = dir.path().join("out");
    let out = graphsense(&[
        "sweep", "--config", cfg_path.to_str().unwrap(), "--out", out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for name in [
        "qfi_temp_J1_h0.3.csv",
        "qfi_temp_J-1_h0.3.csv",
        "boltzmann_rate_J1_h0.3.csv",
        "boltzmann_rate_J-1_h0.3.csv",
        "metadata.toml",
    ] {
        assert!(out_dir.join(name).exists(), "{name} missing");
    }

    // CSV values parse back to the in-memory result at 12 significant digits
    let result = run_sweep(&cfg, Parallelism::Serial).unwrap();
    let text = std::fs::read_to_string(out_dir.join("qfi_temp_J-1_h0.3.csv")).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    let expected: Vec<_> = result
        .records
        .iter()
        .filter(|r| r.observable == Observable::QfiTemp && r.coupling == -1.0)
        .collect();
    assert_eq!(rows.len(), expected.len());
    for (row, rec) in rows.iter().zip(&expected) {
        assert_eq!(row[0], rec.graph);
        let t: f64 = row[3].parse().unwrap();
        assert!((t - rec.temperature).abs() <= 1e-11 * rec.temperature);
        for (cell, v) in row[4..].iter().zip(&rec.values) {
            let parsed: f64 = cell.parse().unwrap();
            assert!((parsed - v).abs() <= 1e-11 * v.abs(), "{cell} vs {v}");
        }
    }
}

#[test]
fn malformed_config_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "[graphs]\nnames = [\"P4\"]\nbogus = 1\n").unwrap();
    let out = graphsense(&["sweep", "--config", path.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("invalid sweep config"));
}

fn read_all(dir: &Path, names: &[std::path::PathBuf]) -> Vec<Vec<u8>> {
    names.iter().map(|p| std::fs::read(dir.join(p.file_name().unwrap())).unwrap()).collect()
}

#[test]
fn emitted_files_are_reproducible() {
    let cfg = SweepConfig::new(
        &["PAN", "Sd4"],
        &[-1.0],
        AxisConfig { steps: 9, ..AxisConfig::default_field() },
        0.04,
        &[Observable::Spectrum, Observable::Deformation],
    );
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let pa = emit_csv(&run_sweep(&cfg, Parallelism::Parallel).unwrap(), a.path()).unwrap();
    let pb = emit_csv(&run_sweep(&cfg, Parallelism::Serial).unwrap(), b.path()).unwrap();
    assert_eq!(read_all(a.path(), &pa), read_all(b.path(), &pb));
    let spectrum = std::fs::read_to_string(&pa[0]).unwrap();
    assert_eq!(spectrum.lines().count(), 1 + 2 * 9 * 16);
}
