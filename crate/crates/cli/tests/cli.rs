use std::path::Path;
use std::process::{Command, Output};

use hdloc_cli::output::read_power_csv;

fn hdloc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hdloc"))
        .args(args)
        .env_remove("HDLOC_SEED")
        .output()
        .expect("binary runs")
}

fn text(o: &Output) -> (String, String) {
    (String::from_utf8_lossy(&o.stdout).into_owned(), String::from_utf8_lossy(&o.stderr).into_owned())
}

fn write(dir: &Path, name: &str, contents: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path.to_str().unwrap().to_string()
}

fn data_rows(n: usize, p: usize) -> String {
    (0..n)
        .map(|i| (0..p).map(|j| format!("{:.3}", ((i * 7 + j * 13) % 11) as f64 - 4.7)).collect::<Vec<_>>().join(","))
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn test_command_reports_a_decision() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "x.csv", &data_rows(12, 5));
    let o = hdloc(&["test", &path, "--test", "sr"]);
    let (out, err) = text(&o);
    assert!(o.status.success(), "{err}");
    assert!(out.contains("test        SR"), "{out}");
    assert!(out.contains("decision"), "{out}");
}

#[test]
fn bad_cell_is_located() {
    let dir = tempfile::tempdir().unwrap();
    let mut rows: Vec<String> = data_rows(6, 8).lines().map(str::to_string).collect();
    let mut cells: Vec<&str> = rows[2].split(',').collect();
    cells[6] = "abc";
    rows[2] = cells.join(",");
    let path = write(dir.path(), "bad.csv", &rows.join("\n"));
    let o = hdloc(&["test", &path]);
    let (_, err) = text(&o);
    assert!(!o.status.success());
    assert!(err.contains("row 3, column 7"), "{err}");
}

#[test]
fn too_few_rows_for_signed_rank() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "small.csv", &data_rows(3, 4));
    let o = hdloc(&["test", &path, "--test", "sr"]);
    let (_, err) = text(&o);
    assert!(!o.status.success());
    assert!(err.contains("distinct quadruples unavailable"), "{err}");
}

#[test]
fn unknown_table_is_a_usage_error() {
    let o = hdloc(&["simulate", "--table", "T9"]);
    assert_eq!(o.status.code(), Some(2), "{}", text(&o).1);
}

#[test]
fn check_suite_passes() {
    let o = hdloc(&["check"]);
    let (out, _) = text(&o);
    assert!(o.status.success(), "{out}");
    assert!(out.contains("6 of 6 checks passed"), "{out}");
    assert!(!out.contains("FAIL"), "{out}");
}

#[test]
fn corrupted_fast_path_fails_the_check_suite() {
    let o = hdloc(&["check", "--corrupt-fast-path"]);
    let (out, _) = text(&o);
    assert!(!o.status.success());
    assert!(out.contains("FAIL oracle-equality"), "{out}");
}

const CONFIG: &str = "scenario = II\nn = 20\np = 50\nallocation = dense\nsignal = 0.1\ntests = cq, sr\nreps = 60\n";

#[test]
fn config_runs_are_seeded_stored_and_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cell.conf", CONFIG);
    let out_dir = dir.path().join("out");
    let out = out_dir.to_str().unwrap();

    let first = hdloc(&["--seed", "7", "simulate", "--config", &cfg, "--out-dir", out, "--format", "csv"]);
    let (csv1, err1) = text(&first);
    assert!(first.status.success(), "{err1}");
    assert!(!err1.contains("stored"), "{err1}");
    let cells = read_power_csv(csv1.as_bytes()).unwrap();
    assert_eq!(cells.len(), 2);
    assert!(cells.iter().all(|c| c.row.seed == 7 && c.row.reps == 60));

    let files: Vec<String> =
        std::fs::read_dir(&out_dir).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    assert!(files.iter().any(|f| f.starts_with("experiment-") && f.ends_with(".csv")), "{files:?}");
    assert!(files.iter().any(|f| f.starts_with("experiment-") && f.ends_with(".md")), "{files:?}");

    let again = hdloc(&["--seed", "7", "simulate", "--config", &cfg, "--out-dir", out, "--format", "csv"]);
    let (csv2, err2) = text(&again);
    assert!(err2.contains("stored"), "{err2}");
    assert_eq!(read_power_csv(csv2.as_bytes()).unwrap(), cells);

    // Without a store the same seed recomputes the same counts.
    let fresh = hdloc(&["--seed", "7", "simulate", "--config", &cfg, "--format", "csv"]);
    let recomputed = read_power_csv(text(&fresh).0.as_bytes()).unwrap();
    let counts = |c: &[hdloc::simharness::tables::ComparedCell]| c.iter().map(|x| x.row.rejections).collect::<Vec<_>>();
    assert_eq!(counts(&recomputed), counts(&cells));
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "typo.conf", &format!("{CONFIG}nul_reps = 3000\n"));
    let o = hdloc(&["simulate", "--config", &cfg]);
    let (_, err) = text(&o);
    assert!(!o.status.success());
    assert!(err.contains("unknown key \"nul_reps\""), "{err}");
}
