use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use intrusion_core::harness::{config, simulate_replication};
use intrusion_core::stochastic::{generate_outputs, sample_inputs};
use intrusion_core::{limit_i, preset, prefix_trajectory, PairedSample, TrendParams};
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_intrusion"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write_pairs(dir: &Path, name: &str, s: &PairedSample) -> PathBuf {
    let mut text = String::from("x,y\n");
    for (x, y) in s.pairs() {
        text.push_str(&format!("{x:?},{y:?}\n"));
    }
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

/// Arrival-ordered data of panel 0 of a preset, as the harness generates it.
fn preset_data(name: &str) -> PairedSample {
    let s = preset(name).unwrap();
    let h = s.transfer.build().unwrap();
    let seed = s.seed_for(0, 0);
    let x = sample_inputs(&s.panels[0], s.n_max, seed).unwrap();
    generate_outputs(&h, &x, &s.intrusion, seed).unwrap()
}

#[test]
fn limit_examples() {
    for (args, i, eq) in [
        (["quadratic", "0", "1"], "I=0.9411764706", "endpoints_equal=false"),
        (["quadratic", "0", "1.6"], "I=0.5000000000", "endpoints_equal=true"),
        (["identity", "0", "1"], "I=1.0000000000", "endpoints_equal=false"),
    ] {
        let o = run(&["limit", "--transfer", args[0], "--a", args[1], "--b", args[2]]);
        assert_eq!(code(&o), 0);
        assert_eq!(stdout(&o), format!("{i}\n{eq}\n"));
    }
    let o = run(&["limit", "--transfer", "polynomial", "--a", "0", "--b", "1", "--coeffs", "3"]);
    assert_eq!(code(&o), 67);
    let o = run(&["limit", "--transfer", "polynomial", "--a", "-1", "--b", "1", "--coeffs", "0,0,1"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("I=0.5000000000"));
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(code(&run(&["bogus"])), 64);
    assert_eq!(code(&run(&["limit", "--transfer", "quadratic"])), 64);
    assert_eq!(code(&run(&["limit", "--transfer", "cubic", "--a", "0", "--b", "1"])), 64);
    assert_eq!(code(&run(&["simulate", "--scenario", "nope"])), 64);
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn analyze_monotone_file() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("m.csv");
    fs::write(&path, "x,y\n0.4,4\n0.1,1\n0.3,3\n0.2,2\n").unwrap();
    let o = run(&["analyze", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.contains("\nn,A,B,I\n"), "{out}");
    assert!(out.trim_end().ends_with("# final n=4 A=1.5 B=1.5 I=1"), "{out}");
    assert!(out.contains("\n2,2.12132034356,2.12132034356,1\n"), "{out}");
}

#[test]
fn analyze_rejects_bad_files() {
    let dir = TempDir::new().unwrap();
    let dup = dir.path().join("dup.csv");
    fs::write(&dup, "x,y\n0.5,1\n0.2,2\n0.5,3\n").unwrap();
    let o = run(&["analyze", dup.to_str().unwrap()]);
    assert_eq!(code(&o), 65);
    assert!(String::from_utf8_lossy(&o.stderr).contains("x = 0.5"));

    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "x,y\n0.5,1\n0.2,two\n").unwrap();
    let o = run(&["analyze", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 65);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));

    assert_eq!(code(&run(&["analyze", dir.path().join("missing.csv").to_str().unwrap()])), 74);
}

#[test]
fn analyze_matches_library_and_echoes_params() {
    let dir = TempDir::new().unwrap();
    let data = preset_data("fig4");
    let path = write_pairs(dir.path(), "fig4.csv", &data);
    let out = dir.path().join("traj.csv");
    let o = run(&[
        "analyze",
        path.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--half-band",
        "0.07",
    ]);
    assert_eq!(code(&o), 0);
    let written = fs::read_to_string(&out).unwrap();
    let params = TrendParams { half_band: 0.07, ..TrendParams::default() };
    let expected = prefix_trajectory(&data)
        .unwrap()
        .to_csv_string(&[format!("input={}", path.display()), format!("params {}", params.describe())]);
    assert_eq!(written, expected);
    assert!(written.contains("half_band=0.07 "));

    let i: f64 = stdout(&o).trim().rsplit("I=").next().unwrap().parse().unwrap();
    assert!((i - 0.5).abs() < 0.05, "final I = {i}");
}

#[test]
fn detect_on_preset_data() {
    let dir = TempDir::new().unwrap();
    let fig3 = write_pairs(dir.path(), "fig3.csv", &preset_data("fig3"));
    let o = run(&["detect", fig3.to_str().unwrap(), "--transfer", "quadratic", "--a", "0", "--b", "1"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).starts_with("decision=absent case=1i "));

    let fig4 = write_pairs(dir.path(), "fig4.csv", &preset_data("fig4"));
    let o = run(&["detect", fig4.to_str().unwrap(), "--ha", "0.36", "--hb", "0.96"]);
    assert_eq!(code(&o), 10, "{}", stdout(&o));
    assert!(stdout(&o).starts_with("decision=present "));
}

#[test]
fn detect_reports_missing_endpoint_info() {
    // A clean symmetric system with a short tail: I near one half, B
    // neither clearly bounded nor clearly growing under tight thresholds.
    let dir = TempDir::new().unwrap();
    let path = write_pairs(dir.path(), "fig6.csv", &preset_data("fig6"));
    let args = ["detect", path.to_str().unwrap(), "--growth-ratio-lo", "0.5", "--growth-ratio-hi", "3"];
    let o = run(&args);
    assert_eq!(code(&o), 66, "{}", stdout(&o));

    let mut with_ends = args.to_vec();
    with_ends.extend(["--ha", "0.36", "--hb", "0.36"]);
    let o = run(&with_ends);
    assert_eq!(code(&o), 20, "{}", stdout(&o));
    assert!(stdout(&o).starts_with("decision=rerun_deterministic case=2iii_rerun "));
    assert!(stdout(&o).contains(" endpoint=true"));
}

#[test]
fn simulate_fig7_clean_and_replay() {
    let dir = TempDir::new().unwrap();
    let (d1, d2) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&d1, &d2] {
        let o = run(&["simulate", "--scenario", "fig7_clean", "--seed", "1", "--out", d.to_str().unwrap()]);
        assert_eq!(code(&o), 0);
    }
    let name = "fig7_clean_grid_rep0.csv";
    let a = fs::read(d1.join(name)).unwrap();
    assert_eq!(a, fs::read(d2.join(name)).unwrap());
    assert_eq!(fs::read(d1.join("fig7_clean_report.txt")).unwrap(), fs::read(d2.join("fig7_clean_report.txt")).unwrap());

    let text = String::from_utf8(a).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    assert_eq!(rows.len(), 299);
    for r in rows.iter().skip(1) {
        assert!(r.ends_with(",0.5"), "{r}");
    }
    assert!(text.starts_with("# scenario=fig7_clean seed=1 hash="));
}

#[test]
fn simulate_output_matches_library() {
    let dir = TempDir::new().unwrap();
    let o = run(&["simulate", "--scenario", "fig4", "--out", dir.path().to_str().unwrap(), "--decisive-band", "0.03"]);
    assert_eq!(code(&o), 0);
    let mut s = preset("fig4").unwrap();
    s.params.decisive_band = 0.03;
    let runs = simulate_replication(&s, 0).unwrap();
    for (k, r) in runs.iter().enumerate() {
        let text = fs::read_to_string(dir.path().join(s.csv_file_name(k, 0))).unwrap();
        let body: String = text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
        assert_eq!(body, r.trajectory.to_csv_string(&[]));
        assert!(text.contains("decisive_band=0.03 "));
        assert!(stdout(&o).contains(&r.verdict.as_ref().unwrap().record()));
    }
}

#[test]
fn simulate_from_config_with_replications() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("s.cfg");
    let mut s = preset("fig8_rand").unwrap();
    s.name = "small".into();
    s.n_max = 80;
    fs::write(&cfg, config::to_config(&s).unwrap()).unwrap();
    let out = dir.path().join("out");
    let o = run(&["simulate", "--config", cfg.to_str().unwrap(), "--replications", "3", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for k in 0..3 {
        assert!(out.join(format!("small_uniform_rep{k}.csv")).exists());
    }
    let report = fs::read_to_string(out.join("small_report.txt")).unwrap();
    assert!(report.contains("replications=3"));
    assert!(report.contains("growth_fit c="));

    fs::write(&cfg, "scenario.name = x\nbogus = 1\n").unwrap();
    assert_eq!(code(&run(&["simulate", "--config", cfg.to_str().unwrap()])), 65);
}

#[test]
fn scenarios_listing() {
    let o = run(&["scenarios"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).lines().count(), 8);
    let o = run(&["scenarios", "--show", "fig5"]);
    assert_eq!(config::from_config(&stdout(&o)).unwrap(), preset("fig5").unwrap());
    let h = preset("fig5").unwrap().transfer.build().unwrap();
    assert!((limit_i(&h).unwrap() - 0.5).abs() < 1e-10);
}
