use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use semforecast::evaluate::{generate_synthetic_economy, ConstructSpec, SyntheticSpec};
use semforecast_cli::cmd_synth;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_semforecast"));
    c.env_remove("SEMFORECAST_OUTPUT_DIR");
    c
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(["--config", "config.toml"]).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &Path, task: &str) {
    let cfg = format!(
        r#"seed = 11
lexicon = "lexicon.csv"
[corpus]
path = "corpus.jsonl"
[[indicator]]
name = "synthetic"
path = "indicator.csv"
{task}
"#
    );
    fs::write(dir.join("config.toml"), cfg).unwrap();
}

fn synth_dir(periods: usize) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    cmd_synth(dir.path(), 5, periods, false).unwrap();
    dir
}

#[test]
fn ingest_builds_then_reuses_cache() {
    let dir = synth_dir(60);
    let first = run(dir.path(), &["ingest"]);
    assert!(first.status.success(), "{}", stderr(&first));
    let text = stdout(&first);
    assert!(text.contains("60 periods"));
    assert!(text.contains("construct positive: 25 terms, coverage 1.000"));
    for f in ["fingerprint", "matrix.json", "constructs.json", "tfidf.csv"] {
        assert!(dir.path().join("output/cache").join(f).exists(), "{f}");
    }
    let second = run(dir.path(), &["ingest"]);
    assert!(second.status.success());
    assert!(stdout(&second).contains("up-to-date"));
    assert!(!text.contains("up-to-date"));
}

#[test]
fn missing_lexicon_exits_2_naming_path() {
    let dir = synth_dir(40);
    fs::remove_file(dir.path().join("lexicon.csv")).unwrap();
    let out = run(dir.path(), &["ingest"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("lexicon.csv"), "{}", stderr(&out));
}

#[test]
fn missing_seed_exits_2() {
    let dir = synth_dir(40);
    let cfg = fs::read_to_string(dir.path().join("config.toml")).unwrap();
    fs::write(dir.path().join("config.toml"), cfg.replace("seed = 5\n", "")).unwrap();
    let out = run(dir.path(), &["ingest"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(run(dir.path(), &["--seed", "9", "ingest"]).status.success());
}

#[test]
fn backtest_writes_one_report_per_model() {
    let dir = synth_dir(120);
    write_config(
        dir.path(),
        "[[task]]\nindicator = \"synthetic\"\nhorizons = [1]\nmodels = [\"ar1\", \"ar6\", \"path-ols-l6\"]\n",
    );
    let out = run(dir.path(), &["backtest"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let reports = dir.path().join("output/reports/synthetic-h1");
    let mut names: Vec<String> = fs::read_dir(&reports)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    assert_eq!(names, ["ar1.json", "ar6.json", "path-ols-l6.json"]);
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(reports.join("path-ols-l6.json")).unwrap()).unwrap();
    assert_eq!(report["seed"], 11);
    assert_eq!(report["model"], "path-ols-l6");
    let table = fs::read_to_string(dir.path().join("output/best_of_breed.csv")).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines[0], "indicator,family,h1_rmse,h1_model");
    assert_eq!(lines.len(), 3);
    assert_eq!(fs::read_to_string(dir.path().join("output/failures.json")).unwrap().trim(), "[]");
}

#[test]
fn failing_task_is_isolated() {
    let dir = synth_dir(80);
    write_config(
        dir.path(),
        "[[task]]\nindicator = \"synthetic\"\nhorizons = [1, 500]\nmodels = [\"ar1\", \"path-ols\"]\n",
    );
    let out = run(dir.path(), &["backtest"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(dir.path().join("output/reports/synthetic-h1/path-ols.json").exists());
    assert!(!dir.path().join("output/reports/synthetic-h500").exists());
    let failures: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("output/failures.json")).unwrap()).unwrap();
    let failures = failures.as_array().unwrap();
    assert!(!failures.is_empty());
    assert!(failures.iter().all(|f| f["task"] == "synthetic-h500"));
}

#[test]
fn decompose_six_constructs_and_reject_non_path() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = SyntheticSpec::signal(120);
    spec.constructs = (0..6)
        .map(|k| ConstructSpec {
            name: format!("c{k}"),
            terms: 8,
            loading: if k % 2 == 0 { 1.0 } else { -0.5 },
        })
        .collect();
    let eco = generate_synthetic_economy(3, &spec).unwrap();
    eco.write_corpus_jsonl(fs::File::create(dir.path().join("corpus.jsonl")).unwrap()).unwrap();
    eco.write_lexicon_csv(fs::File::create(dir.path().join("lexicon.csv")).unwrap()).unwrap();
    eco.write_indicator_csv(fs::File::create(dir.path().join("indicator.csv")).unwrap()).unwrap();
    write_config(
        dir.path(),
        "[[task]]\nindicator = \"synthetic\"\nhorizons = [1]\nmodels = [\"path-ols\", \"tfidf-enet\"]\n",
    );
    assert!(run(dir.path(), &["backtest"]).status.success());

    let out = run(dir.path(), &["decompose", "synthetic-h1/path-ols"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("output/decompositions/synthetic-h1/path-ols.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "period,intercept,c0,c1,c2,c3,c4,c5,prediction");
    let mut rows = 0;
    for line in lines {
        let v: Vec<f64> = line.split(',').skip(1).map(|s| s.parse().unwrap()).collect();
        let sum: f64 = v[..7].iter().sum();
        assert!((sum - v[7]).abs() <= 1e-10 * v[7].abs().max(1.0));
        rows += 1;
    }
    assert!(rows > 0);

    let out = run(dir.path(), &["decompose", "synthetic-h1/tfidf-enet"]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("decomposition requires a path model"));
}

#[test]
fn output_dir_env_override() {
    let dir = synth_dir(40);
    let out = bin()
        .current_dir(dir.path())
        .env("SEMFORECAST_OUTPUT_DIR", dir.path().join("elsewhere"))
        .args(["--config", "config.toml", "ingest"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.path().join("elsewhere/cache/matrix.json").exists());
    assert!(!dir.path().join("output").exists());
}

#[test]
fn inputs_are_not_modified() {
    let dir = synth_dir(60);
    let before: Vec<Vec<u8>> = ["corpus.jsonl", "lexicon.csv", "indicator.csv", "config.toml"]
        .iter()
        .map(|f| fs::read(dir.path().join(f)).unwrap())
        .collect();
    assert!(run(dir.path(), &["backtest"]).status.success());
    let after: Vec<Vec<u8>> = ["corpus.jsonl", "lexicon.csv", "indicator.csv", "config.toml"]
        .iter()
        .map(|f| fs::read(dir.path().join(f)).unwrap())
        .collect();
    assert_eq!(before, after);
}
