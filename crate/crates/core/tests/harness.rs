use std::fs;
use std::path::Path;

use fwlab::harness::*;
use fwlab::spectral::{make_grid, GridFunction};

fn config(dir: &Path, body: &str) -> RunConfig {
    let text = format!("output_dir = {:?}\n{body}", dir.display().to_string());
    parse_config(&text).unwrap()
}

fn small(kind: &str) -> String {
    format!("[grid]\nN = 64\nL = 2.0\n[time]\ndt = 0.01\nT = 0.2\nt_cap = 0.5\n[experiment]\nkind = \"{kind}\"\n")
}

#[test]
fn field_csv_round_trip_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let g = make_grid(128, 8.0).unwrap();
    let f = GridFunction::from_fn(&g, |x| x.sin() + 1e-7 * (3.0 * x).cos());
    let path = dir.path().join("f.csv");
    emit_field_csv(&f, &path).unwrap();
    assert_eq!(read_field_csv(&path, &g).unwrap().samples(), f.samples());
}

#[test]
fn field_csv_is_strict() {
    let dir = tempfile::tempdir().unwrap();
    let g = make_grid(16, 1.0).unwrap();
    let f = GridFunction::from_fn(&g, f64::sin);
    let path = dir.path().join("f.csv");
    emit_field_csv(&f, &path).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();

    let short = dir.path().join("short.csv");
    fs::write(&short, lines[..lines.len() - 1].join("\n")).unwrap();
    assert!(read_field_csv(&short, &g).unwrap_err().to_string().contains("rows"));

    let mut swapped = lines.clone();
    swapped.swap(2, 3);
    let shuffled = dir.path().join("shuffled.csv");
    fs::write(&shuffled, swapped.join("\n")).unwrap();
    assert!(read_field_csv(&shuffled, &g).unwrap_err().to_string().contains("grid node"));

    let bad = dir.path().join("bad.csv");
    fs::write(&bad, text.replacen(lines[4].split(',').nth(1).unwrap(), "oops", 1)).unwrap();
    assert!(read_field_csv(&bad, &g).unwrap_err().to_string().contains("not a number"));

    let header = dir.path().join("header.csv");
    fs::write(&header, text.replacen("x,value", "x,y", 1)).unwrap();
    assert!(read_field_csv(&header, &g).is_err());

    let other = make_grid(32, 1.0).unwrap();
    assert!(read_field_csv(&path, &other).is_err());
}

#[test]
fn partition_check_writes_masks_and_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "[grid]\nN = 256\nL = 8.0\n[experiment]\nkind = \"partition-check\"\n");
    let report = run_experiment(&cfg).unwrap();
    assert_eq!(report.exit_code(), 0);
    let masks = fs::read_to_string(dir.path().join("masks.csv")).unwrap();
    assert!(masks.starts_with("xi,chi,phi_q0,phi_q1,phi_q2,phi_q3,phi_q4\n"));
    assert_eq!(report.table("partition.csv").unwrap().rows.len(), 1);
    assert!(dir.path().join("summary.txt").exists());
}

#[test]
fn norm_reads_a_field_from_csv() {
    let dir = tempfile::tempdir().unwrap();
    let g = make_grid(64, 1.0).unwrap();
    let field = dir.path().join("in.csv");
    emit_field_csv(&GridFunction::from_fn(&g, |x| (8.0 * x).sin()), &field).unwrap();
    let body = format!(
        "[grid]\nN = 64\nL = 1.0\n[besov]\ns = 1.0\np = inf\nr = inf\n[experiment]\nkind = \"norm\"\nu0 = {:?}\n",
        field.display().to_string()
    );
    let report = run_experiment(&config(&dir.path().join("out"), &body)).unwrap();
    let blocks = report.table("blocks.csv").unwrap().column("weighted_block").unwrap();
    let expected = blocks.iter().copied().fold(0.0, f64::max);
    assert_eq!(report.scalar("besov_norm").unwrap(), expected);
}

#[test]
fn transport_emits_the_estimate_table() {
    let dir = tempfile::tempdir().unwrap();
    let body = small("transport") + "velocity = \"sine\"\nforcing = \"cosine\"\nfit_constant = true\n";
    let report = run_experiment(&config(dir.path(), &body)).unwrap();
    assert!(report.passed());
    let t = report.table("transport.csv").unwrap();
    assert_eq!(t.header, ["t", "besov_norm", "V", "lhs", "rhs", "ratio"]);
    let ratio = t.column("ratio").unwrap();
    let max = ratio.iter().copied().fold(0.0, f64::max);
    assert!((max - report.scalar("max_ratio").unwrap()).abs() < 1e-12);
    assert!(max <= 1.0 + 1e-12);
}

#[test]
fn simulate_conserves_and_echoes_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), &small("simulate"));
    let report = run_experiment(&cfg).unwrap();
    assert!(report.passed());
    let t = report.table("trajectories.csv").unwrap();
    assert_eq!(t.header, ["t", "norm_u_Bs", "norm_rho_Bsm1", "mean_u", "mean_rho"]);
    assert_eq!(t.rows.len(), 21);
    let echo = parse_config(&fs::read_to_string(dir.path().join("config.toml")).unwrap()).unwrap();
    let mut expected = cfg.clone();
    expected.defaulted.clear();
    assert_eq!(echo, expected);
    let summary = fs::read_to_string(dir.path().join("summary.txt")).unwrap();
    assert!(summary.contains("defaults applied: seed"));
    let g = make_grid(64, 2.0).unwrap();
    read_field_csv(&dir.path().join("u_final.csv"), &g).unwrap();
}

#[test]
fn iterate_reports_scheme_table() {
    let dir = tempfile::tempdir().unwrap();
    let body = "[grid]\nN = 64\nL = 1.0\n[time]\ndt = 0.01\n[scheme]\nC = 50.0\nn_max = 4\n[experiment]\nkind = \"iterate\"\namplitude = 0.05\n";
    let report = run_experiment(&config(dir.path(), body)).unwrap();
    let t = report.table("scheme.csv").unwrap();
    assert_eq!(t.header, ["n", "t", "norm_sum", "bound_312", "bound_313", "d_n"]);
    let nodes = report.table("scheme_vs_direct.csv").unwrap().rows.len();
    assert_eq!(t.rows.len(), 4 * nodes);
    assert!(report.verdict("2P0 bound").unwrap().passed);
    assert_eq!(report.scalar("C"), Some(50.0));
}

#[test]
fn failing_verdict_gives_nonzero_exit() {
    let dir = tempfile::tempdir().unwrap();
    let body = small("lifespan-sweep") + "amplitudes = [0.5, 4.0]\n";
    let mut cfg = config(dir.path(), &body);
    cfg.grid.scale = 1.0;
    cfg.time.dt = 0.005;
    let report = run_experiment(&cfg).unwrap();
    let life = report.table("lifespan.csv").unwrap();
    assert_eq!(life.header, ["a", "P0", "T_emp", "product"]);
    assert_eq!(report.passed(), report.verdicts.iter().all(|v| v.passed));
    assert_eq!(report.exit_code() == 0, report.passed());
}

#[test]
fn every_scalar_names_an_emitted_table() {
    let dir = tempfile::tempdir().unwrap();
    for kind in ["simulate", "continuity", "stability", "partition-check", "transport"] {
        let mut body = small(kind);
        if kind == "continuity" {
            body = body.replace("L = 2.0", "L = 8.0");
        }
        let report = run_experiment(&config(&dir.path().join(kind), &body)).unwrap();
        for s in &report.scalars {
            let file = s.source.split(':').next().unwrap();
            assert!(
                report.table(file).is_some() || s.source == "scheme configuration",
                "{kind}: {} cites {}",
                s.name,
                s.source
            );
        }
    }
}

#[test]
fn repeated_runs_write_identical_csvs() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for run in 0..2 {
        let out = dir.path().join(format!("run{run}"));
        let report = run_experiment(&config(&out, &small("stability"))).unwrap();
        let mut files: Vec<(String, Vec<u8>)> = report
            .tables
            .iter()
            .map(|t| (t.file.clone(), fs::read(out.join(&t.file)).unwrap()))
            .collect();
        files.sort();
        outputs.push(files);
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn run_rejects_configs_invalid_after_edits() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(dir.path(), &small("simulate"));
    cfg.besov.s = 2.0;
    assert!(matches!(run_experiment(&cfg), Err(HarnessError::Config(_))));
}
