use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use fcc_fold::engine::RunRecord;
use fcc_fold::metrics::{read_runs_csv, read_summary_csv, SUMMARY_HEADER};

fn fccfold(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fccfold"))
        .args(args)
        .env_remove("FCCFOLD_MATRIX")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn fold_writes_a_record_that_eval_reproduces() {
    let dir = tempfile::tempdir().unwrap();
    let out = fccfold(&["fold", "--seq", "HPHPPHHPHPPHPHHPPHPH", "--hp", "--variant", "HP", "--seed", "3", "--time", "0.5", "--out", p(dir.path())]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("variant      HP"));

    let record = RunRecord::load(&dir.path().join("query_HP_3.json")).unwrap();
    let structure = dir.path().join("query_HP_3.structure");
    assert_eq!(fs::read_to_string(&structure).unwrap(), record.best_structure);

    let eval = fccfold(&["eval", p(&structure)]);
    assert!(eval.status.success(), "{}", stderr(&eval));
    let text = stdout(&eval);
    assert!(text.contains(&format!("HP energy  {:.4}", record.best_search_energy)), "{text}");
    assert!(text.contains(&format!("BM energy  {:.4}", record.best_bm_energy)), "{text}");
    let c = record.census;
    assert!(text.contains(&format!("hh={} hp={} pp={} total={}", c.hh, c.hp, c.pp, c.total)));
}

#[test]
fn fold_is_reproducible_from_the_command_line() {
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str| {
        let out_dir = dir.path().join(sub);
        let out = fccfold(&["fold", "--suite", "1ENH", "--variant", "BH", "--seed", "11", "--time", "0.5", "--out", p(&out_dir)]);
        assert!(out.status.success(), "{}", stderr(&out));
        fs::read_to_string(out_dir.join("1ENH_BH_11.json")).unwrap()
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn config_file_is_read_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "variant = \"BD\"\npop_size = 12\nrwt = 7\ntime_budget = 5.0\n").unwrap();
    let out = fccfold(&["fold", "--seq", "HHPPHHPPHH", "--hp", "--config", p(&cfg), "--time", "0.2", "--pop", "9", "--out", p(dir.path())]);
    assert!(out.status.success(), "{}", stderr(&out));
    let record = RunRecord::load(&dir.path().join("query_BD_0.json")).unwrap();
    assert_eq!(record.config.pop_size, 9);
    assert_eq!(record.config.rwt, 7);
    assert_eq!(record.config.time_budget, 0.2);

    fs::write(&cfg, "pop = 12\n").unwrap();
    let bad = fccfold(&["fold", "--seq", "HHPPHH", "--hp", "--config", p(&cfg), "--out", p(dir.path())]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn eval_names_the_collision() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.structure");
    fs::write(&file, "# id=bad model=HP energy=0.0\n0 A 0 0 0\n1 L 1 1 0\n2 A 0 0 0\n").unwrap();
    let out = fccfold(&["eval", p(&file)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("self-collision"), "{}", stderr(&out));
}

#[test]
fn errors_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let missing = fccfold(&["eval", p(&dir.path().join("nope.structure"))]);
    assert_eq!(missing.status.code(), Some(1));
    let polar = fccfold(&["fold", "--seq", "PPPPPP", "--hp", "--time", "0.1", "--out", p(dir.path())]);
    assert_eq!(polar.status.code(), Some(1));
    let bad_residue = fccfold(&["fold", "--seq", "AXA", "--out", p(dir.path())]);
    assert_eq!(bad_residue.status.code(), Some(1));
    assert!(stderr(&bad_residue).contains("invalid residue 'X' at position 2"));
    let usage = fccfold(&["fold", "--variant", "QQ"]);
    assert!(!usage.status.success());
}

#[test]
fn bench_outputs_round_trip_through_stats() {
    let dir = tempfile::tempdir().unwrap();
    let out = fccfold(&[
        "bench", "--suite", "4RXN,1ENH", "--variants", "BH,HP", "--seeds", "2", "--time", "0.3", "--workers", "1", "--out",
        p(dir.path()),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).starts_with(SUMMARY_HEADER));

    let summary_text = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert_eq!(summary_text.lines().next(), Some(SUMMARY_HEADER));
    let summary = read_summary_csv(&summary_text).unwrap();
    assert_eq!(summary.len(), 4);
    for row in &summary {
        assert_eq!(row.total, row.hh + row.hp + row.pp);
        assert!(row.best <= row.avg + 1e-9);
    }
    let runs = read_runs_csv(&fs::read_to_string(dir.path().join("runs.csv")).unwrap()).unwrap();
    assert_eq!(runs.len(), 8);
    for name in ["traces.csv", "ablation.csv"] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
    let records = fs::read_dir(dir.path().join("records")).unwrap().count();
    assert_eq!(records, 8);

    // a table against itself improves nothing
    let summary = dir.path().join("summary.csv");
    let same = fccfold(&["stats", p(&summary), p(&summary), "--target-variant", "BH", "--reference-variant", "BH"]);
    assert!(same.status.success(), "{}", stderr(&same));
    let text = stdout(&same);
    assert_eq!(text.lines().count(), 3);
    for line in text.lines().skip(1) {
        assert_eq!(line.split(',').nth(3), Some("0.00"), "{line}");
    }

    let runs_csv = dir.path().join("runs.csv");
    let tested = fccfold(&["stats", p(&runs_csv), p(&runs_csv), "--target-variant", "BH", "--reference-variant", "HP"]);
    assert!(tested.status.success(), "{}", stderr(&tested));
    assert!(stdout(&tested).lines().skip(1).all(|l| l.ends_with("false") || l.ends_with("true")));

    let other = dir.path().join("other.csv");
    fs::write(&other, summary_text.replace("4RXN", "9XYZ")).unwrap();
    let mismatch = fccfold(&["stats", p(&summary), p(&other)]);
    assert_eq!(mismatch.status.code(), Some(1));
    assert!(stderr(&mismatch).contains("protein ids differ"));
}
