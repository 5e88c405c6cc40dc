use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn cgind(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cgind"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = cgind(dir, args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn readings(path: &Path) -> usize {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| l.starts_with('\t'))
        .count()
}

fn workspace() -> TempDir {
    let dir = TempDir::new().unwrap();
    ok(
        dir.path(),
        &[
            "generate", "--seed", "3", "--words", "4000", "-o", "gold.txt",
        ],
    );
    dir
}

#[test]
fn induce_disambiguate_evaluate() {
    let dir = workspace();
    let d = dir.path();
    let gold_before = fs::read(d.join("gold.txt")).unwrap();

    let report = ok(
        d,
        &[
            "induce",
            "gold.txt",
            "-o",
            "grammar.cg",
            "--min-count",
            "40",
        ],
    );
    for kind in ["local", "combined", "barrier", "lexical", "rare"] {
        assert!(report.lines().any(|l| l.starts_with(kind)), "{report}");
    }
    ok(
        d,
        &[
            "disambiguate",
            "gold.txt",
            "-g",
            "grammar.cg",
            "-o",
            "out.txt",
        ],
    );
    let kv = ok(d, &["evaluate", "gold.txt", "out.txt", "--report", "kv"]);
    let get = |key: &str| -> f64 {
        kv.lines()
            .find_map(|l| l.strip_prefix(&format!("{key}=")))
            .unwrap()
            .parse()
            .unwrap()
    };
    assert_eq!(get("words"), 4000.0);
    assert!(get("removed") > 0.0);
    assert!(get("recall") > 0.99);

    let json: serde_json::Value = serde_json::from_str(&ok(
        d,
        &["evaluate", "gold.txt", "out.txt", "--report", "json"],
    ))
    .unwrap();
    assert_eq!(json["words"], 4000);
    assert!(ok(d, &["evaluate", "gold.txt", "out.txt"]).contains("recall"));

    assert_eq!(fs::read(d.join("gold.txt")).unwrap(), gold_before);
}

#[test]
fn deterministic_and_level_monotone() {
    let dir = workspace();
    let d = dir.path();
    ok(
        d,
        &["induce", "gold.txt", "-o", "a.cg", "--min-count", "40"],
    );
    ok(
        d,
        &["induce", "gold.txt", "-o", "b.cg", "--min-count", "40"],
    );
    assert_eq!(
        fs::read(d.join("a.cg")).unwrap(),
        fs::read(d.join("b.cg")).unwrap()
    );

    ok(
        d,
        &[
            "disambiguate",
            "gold.txt",
            "-g",
            "a.cg",
            "--max-level",
            "1",
            "-o",
            "one.txt",
        ],
    );
    ok(
        d,
        &[
            "disambiguate",
            "gold.txt",
            "-g",
            "a.cg",
            "--max-level",
            "10",
            "-o",
            "ten.txt",
        ],
    );
    ok(
        d,
        &[
            "disambiguate",
            "gold.txt",
            "-g",
            "a.cg",
            "--threads",
            "4",
            "-o",
            "par.txt",
        ],
    );
    assert!(readings(&d.join("ten.txt")) <= readings(&d.join("one.txt")));
    assert!(readings(&d.join("one.txt")) <= readings(&d.join("gold.txt")));
    assert_eq!(
        fs::read(d.join("ten.txt")).unwrap(),
        fs::read(d.join("par.txt")).unwrap()
    );

    let stdout = ok(d, &["disambiguate", "gold.txt", "-g", "a.cg"]);
    assert_eq!(stdout, fs::read_to_string(d.join("ten.txt")).unwrap());
}

#[test]
fn trace_goes_to_stderr() {
    let dir = workspace();
    let d = dir.path();
    fs::write(d.join("g.cg"), "REMOVE (SUBJUNCTIVE) ; # score=0.001\n").unwrap();
    let out = cgind(
        d,
        &[
            "disambiguate",
            "gold.txt",
            "-g",
            "g.cg",
            "--trace",
            "-o",
            "out.txt",
        ],
    );
    assert!(out.status.success());
    let trace = String::from_utf8(out.stderr).unwrap();
    let first = trace.lines().next().unwrap();
    let cols: Vec<&str> = first.split('\t').collect();
    assert_eq!(cols.len(), 5);
    assert_eq!(cols[2], "1");
    assert_eq!(cols[4], "REMOVE (SUBJUNCTIVE)");
}

#[test]
fn stats_dump_has_every_section() {
    let dir = workspace();
    let dump = ok(dir.path(), &["stats", "gold.txt"]);
    for section in [
        "total_words",
        "uni_gold",
        "uni_proposed",
        "ctx -1",
        "bi -1",
        "ctx +1",
        "bi +1",
        "word_count",
        "lex_gold",
        "lex_proposed",
    ] {
        assert!(dump.contains(&format!("## {section}\n")), "{section}");
    }
    assert!(dump.starts_with("## total_words\n4000\n"));
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = workspace();
    let d = dir.path();
    fs::write(d.join("cfg.toml"), "min_context_count = 40\nmin_feature_count = 40\nmin_word_count = 40\nthresholds = [0.01, 0.1]\n").unwrap();
    let report = ok(
        d,
        &["induce", "gold.txt", "-o", "g.cg", "--config", "cfg.toml"],
    );
    assert!(report.contains("in 2 levels"), "{report}");
    let report = ok(
        d,
        &[
            "induce",
            "gold.txt",
            "-o",
            "g.cg",
            "--config",
            "cfg.toml",
            "--thresholds",
            "0.001,0.01,0.1",
        ],
    );
    assert!(report.contains("in 3 levels"), "{report}");

    fs::write(d.join("bad.toml"), "min_contxt_count = 3\n").unwrap();
    let out = cgind(
        d,
        &["induce", "gold.txt", "-o", "g.cg", "--config", "bad.toml"],
    );
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("min_contxt_count"));
}

#[test]
fn errors_exit_nonzero_with_positions() {
    let dir = workspace();
    let d = dir.path();
    ok(
        d,
        &[
            "generate",
            "--seed",
            "4",
            "--words",
            "4000",
            "-o",
            "other.txt",
        ],
    );
    let out = cgind(d, &["evaluate", "gold.txt", "other.txt"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("word "));

    fs::write(d.join("broken.cg"), "REMOVE (V) (-1C (DET) ;\n").unwrap();
    let out = cgind(d, &["disambiguate", "gold.txt", "-g", "broken.cg"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));

    fs::write(
        d.join("broken.txt"),
        "\"<a>\"\n\t\"a\" DET\n\t\"a\" N @CORRECT\n\"<b>\"\n\t\"b\" N\n",
    )
    .unwrap();
    let out = cgind(d, &["induce", "broken.txt", "-o", "x.cg"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 4"));

    let out = cgind(d, &["stats", "missing.txt"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(cgind(d, &["frobnicate"]).status.code(), Some(2));
}
