use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use races_cli::manifest::RunManifest;

fn races(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_races"))
        .args(args)
        .current_dir(dir)
        .env_remove("RACES_CACHE_DIR")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/data").join(name)
}

#[test]
fn signchange_finds_first_semiprime_lead() {
    let dir = tempfile::tempdir().unwrap();
    let o = races(dir.path(), &["signchange", "--which", "delta2-positive", "--limit", "100000"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "26747");
    let m = RunManifest::read(&dir.path().join("signchange-manifest.json")).unwrap();
    assert_eq!(m.results["x"], 26747);

    let o = races(dir.path(), &["signchange", "--which", "delta-negative", "--limit", "26860"]);
    assert_eq!(stdout(&o).trim(), "none");
}

#[test]
fn equal_residues_are_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = races(dir.path(), &["race", "--a", "1", "--b", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("a = b"));
    let o = races(dir.path(), &["race", "--a", "2", "--b", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = races(dir.path(), &["race", "--limit", "2e9"]);
    assert_eq!(o.status.code(), Some(2));
    let o = races(dir.path(), &["race", "--bogus"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn race_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let o = races(dir.path(), &["race", "--limit", "100", "--out", "r.csv"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("Delta2=-3"), "{}", stdout(&o));
    let csv = std::fs::read_to_string(dir.path().join("r.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("x,delta_norm,delta2_norm,sigma"));
    let last: Vec<&str> = csv.lines().last().unwrap().split(',').collect();
    assert_eq!(last[0], "100");
    // Δ2(100) = −3: (ln 100 / (10 · ln ln 100)) · (−3)
    let want = 100f64.ln() / (10.0 * 100f64.ln().ln()) * -3.0;
    assert_eq!(last[2].parse::<f64>().unwrap(), want);

    let m = RunManifest::read(&dir.path().join("r.csv.manifest.json")).unwrap();
    assert_eq!(m.command, "race");
    assert_eq!(m.parameters["limit"], 100);
    assert_eq!(m.outputs, vec![PathBuf::from("r.csv")]);
    assert_eq!(m.results["delta2"], -3);
}

#[test]
fn race_grid_brackets_the_crossing() {
    let dir = tempfile::tempdir().unwrap();
    let o = races(dir.path(), &["race", "--limit", "100000"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let row = |x: &str| -> f64 {
        let line = text.lines().find(|l| l.split(',').next() == Some(x)).unwrap();
        line.split(',').nth(2).unwrap().parse().unwrap()
    };
    assert!(row("26746") <= 0.0);
    assert!(row("26747") > 0.0);
    assert!(dir.path().join("race-manifest.json").exists());
}

#[test]
fn race_cache_is_reused() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["race", "--limit", "50000", "--cache-dir", "cache", "--out", "a.csv"];
    assert!(races(dir.path(), &args).status.success());
    let o = races(dir.path(), &["race", "--limit", "50000", "--cache-dir", "cache", "--out", "b.csv"]);
    let text = stdout(&o);
    let field = |k: &str| text.split_whitespace().find_map(|t| t.strip_prefix(k)).unwrap().to_string();
    assert_eq!(field("cached="), field("points="), "{text}");
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn zeros_below_first_ordinate_is_empty() {
    let dir = tempfile::tempdir().unwrap();
    let o = races(dir.path(), &["zeros", "--q", "4", "--T", "5"]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(dir.path().join("q4_chi1.zeros")).unwrap();
    assert_eq!(text, "ZEROS v1\nq=4 chi=1 height=5\n");
    assert!(dir.path().join("q4_chi1.zeros.manifest.json").exists());

    let o = races(dir.path(), &["zeros", "--q", "4", "--T", "7", "--out", "z.zeros"]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(dir.path().join("z.zeros")).unwrap();
    assert!(text.lines().nth(2).unwrap().starts_with("6.0209489"), "{text}");
}

#[test]
fn density_reports_value_and_interval() {
    let dir = tempfile::tempdir().unwrap();
    let o = races(
        dir.path(),
        &["density", "--which", "delta2", "--T", "100", "--samples", "200000", "--seed", "3", "--out", "d.csv"],
    );
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("delta2(4;3,1) = "), "{text}");
    let csv = std::fs::read_to_string(dir.path().join("d.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("q,a,b,which,T,samples,seed,value,ci_half_width,tail_sigma"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let value: f64 = row[7].parse().unwrap();
    let half: f64 = row[8].parse().unwrap();
    assert!((value - 0.1057).abs() < 0.006 + half, "{value}");

    let m = RunManifest::read(&dir.path().join("d.csv.manifest.json")).unwrap();
    assert_eq!(m.seed, Some(3));
    assert_eq!(m.rng.as_deref(), Some("chacha8"));
    assert_eq!(m.results["value"], value);

    // Same seed, same bits.
    let again = races(
        dir.path(),
        &["density", "--which", "delta2", "--T", "100", "--samples", "200000", "--seed", "3", "--out", "e.csv"],
    );
    assert!(again.status.success());
    assert_eq!(csv, std::fs::read_to_string(dir.path().join("e.csv")).unwrap());
}

#[test]
fn density_from_zero_files() {
    let dir = tempfile::tempdir().unwrap();
    let files: Vec<String> = (1..4).map(|c| fixture(&format!("q5_chi{c}.zeros")).display().to_string()).collect();
    let mut args = vec!["density", "--q", "5", "--a", "2", "--b", "1", "--samples", "20000"];
    for f in &files {
        args.extend(["--zeros", f.as_str()]);
    }
    let o = races(dir.path(), &args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("T=60"), "{}", stdout(&o));

    // One character missing.
    let o = races(dir.path(), &args[..args.len() - 2]);
    assert_eq!(o.status.code(), Some(3));
    // Asking for more height than the files hold.
    let mut high = args.clone();
    high.extend(["--T", "100"]);
    assert_eq!(races(dir.path(), &high).status.code(), Some(3));
}

#[test]
fn malformed_zero_file_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.zeros"), "ZEROS v1\nq=4 chi=1 height=10\n7 1\n6 1\n").unwrap();
    let o = races(dir.path(), &["density", "--zeros", "bad.zeros", "--samples", "20000"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 4"), "{}", String::from_utf8_lossy(&o.stderr));
    let o = races(dir.path(), &["density", "--zeros", "missing.zeros", "--samples", "20000"]);
    assert_eq!(o.status.code(), Some(3));
    let q4 = fixture("q4_chi1.zeros").display().to_string();
    let o = races(dir.path(), &["density", "--q", "5", "--a", "2", "--b", "1", "--zeros", &q4]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn compare_prints_both_rms_values() {
    let dir = tempfile::tempdir().unwrap();
    let o = races(
        dir.path(),
        &["compare", "--T0", "30", "--limit", "1e6", "--grid-points", "50", "--out", "c.csv"],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("rms(kappa=inverse-phi)=") && text.contains("rms(kappa=one)="), "{text}");
    let csv = std::fs::read_to_string(dir.path().join("c.csv")).unwrap();
    assert_eq!(
        csv.lines().next(),
        Some("x,measured_delta_norm,predicted_delta_norm,measured_delta2_norm,predicted_delta2_norm")
    );
    assert_eq!(csv.lines().count(), 51);
    let m = RunManifest::read(&dir.path().join("c.csv.manifest.json")).unwrap();
    assert_eq!(m.parameters["T0"], 30.0);
}
