//! The command-line binary run stage by stage, with its exit codes.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use llm_der::corpus::{Corpus, CorpusProfile};
use llm_der::eval::EvalReport;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/planted").join(name)
}

fn llm_der<I, S>(args: I) -> Output
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    Command::new(env!("CARGO_BIN_EXE_llm-der"))
        .args(args)
        .env_remove("LLM_DER_CACHE_DIR")
        .env_remove("LLM_DER_API_KEY")
        .output()
        .unwrap()
}

fn arg(p: &Path) -> String {
    p.display().to_string()
}

fn assert_ok(out: &Output) {
    assert!(out.status.success(), "status {:?}\n{}", out.status, String::from_utf8_lossy(&out.stderr));
}

#[test]
fn staged_run_matches_the_single_pipeline() {
    let tmp = tempfile::tempdir().unwrap();
    let (profile, corpus, config) = (arg(&fixture("profile.json")), arg(&fixture("corpus.jsonl")), arg(&fixture("config.json")));
    let mock = arg(&fixture("mock_spurious.jsonl"));
    let p = |name: &str| arg(&tmp.path().join(name));

    assert_ok(&llm_der(["gen-relations", "--profile", &profile, "--config", &config, "--mock", &mock, "--no-cache", "--out", &p("rel.json")]));
    assert_ok(&llm_der([
        "extract", "--profile", &profile, "--corpus", &corpus, "--relations", &p("rel.json"), "--config", &config, "--mock", &mock,
        "--no-cache", "--out", &p("cand.jsonl"),
    ]));
    assert_ok(&llm_der([
        "screen", "--profile", &profile, "--corpus", &corpus, "--candidates", &p("cand.jsonl"), "--config", &config, "--out",
        &p("pred.jsonl"), "--scores", &p("scores.jsonl"),
    ]));
    assert_ok(&llm_der(["eval", "--gold", &corpus, "--pred", &p("pred.jsonl"), "--out", &p("report.json")]));
    let staged: EvalReport = serde_json::from_str(&std::fs::read_to_string(tmp.path().join("report.json")).unwrap()).unwrap();

    assert_ok(&llm_der([
        "pipeline", "--profile", &profile, "--corpus", &corpus, "--config", &config, "--mock", &mock, "--no-cache", "--out-dir", &p("run"),
    ]));
    let whole = std::fs::read(tmp.path().join("run/predictions.jsonl")).unwrap();
    assert_eq!(std::fs::read(tmp.path().join("pred.jsonl")).unwrap(), whole);
    assert_eq!(std::fs::read(tmp.path().join("scores.jsonl")).unwrap(), std::fs::read(tmp.path().join("run/scores.jsonl")).unwrap());
    assert_eq!(staged.overall.counts.n_pred, 60);
    assert_eq!(staged.overall.metrics.f1, 1.0);
}

#[test]
fn no_estimate_run_skips_the_score_dump() {
    let tmp = tempfile::tempdir().unwrap();
    let out = llm_der([
        "pipeline", "--profile", &arg(&fixture("profile.json")), "--corpus", &arg(&fixture("corpus.jsonl")), "--config",
        &arg(&fixture("config.json")), "--mock", &arg(&fixture("mock_spurious.jsonl")), "--no-cache", "--mode", "no_estimate",
        "--out-dir", &arg(tmp.path()),
    ]);
    assert_ok(&out);
    assert!(!tmp.path().join("scores.jsonl").exists());
    let report: EvalReport = serde_json::from_str(&std::fs::read_to_string(tmp.path().join("report.json")).unwrap()).unwrap();
    assert_eq!((report.overall.counts.n_match, report.overall.counts.n_pred), (60, 66));
}

#[test]
fn ablate_writes_one_directory_per_cell() {
    let tmp = tempfile::tempdir().unwrap();
    let out = llm_der([
        "ablate", "--profile", &arg(&fixture("profile.json")), "--corpus", &arg(&fixture("corpus.jsonl")), "--train",
        &arg(&fixture("corpus.jsonl")), "--k", "2,4", "--modes", "full,no-estimate", "--config", &arg(&fixture("config.json")),
        "--mock", &arg(&fixture("mock_spurious.jsonl")), "--cache-dir", &arg(&tmp.path().join("cache")), "--out-dir",
        &arg(&tmp.path().join("runs")),
    ]);
    assert_ok(&out);
    for cell in ["full_k2", "full_k4", "no_estimate_k2", "no_estimate_k4"] {
        assert!(tmp.path().join("runs").join(cell).join("manifest.json").exists(), "{cell}");
    }
    let table = String::from_utf8(out.stdout).unwrap();
    assert!(table.contains("K=2") && table.contains("95.24"), "{table}");

    let inspect = llm_der(["cache", "inspect", "--cache-dir", &arg(&tmp.path().join("cache"))]);
    assert_ok(&inspect);
    let summary: serde_json::Value = serde_json::from_slice(&inspect.stdout).unwrap();
    assert!(summary["completion_entries"].as_u64().unwrap() > 0);
    assert_ok(&llm_der(["cache", "clear", "--cache-dir", &arg(&tmp.path().join("cache"))]));
    let inspect = llm_der(["cache", "inspect", "--cache-dir", &arg(&tmp.path().join("cache"))]);
    let summary: serde_json::Value = serde_json::from_slice(&inspect.stdout).unwrap();
    assert_eq!(summary["completion_entries"], 0);
}

#[test]
fn sample_and_stats() {
    let tmp = tempfile::tempdir().unwrap();
    let out_path = tmp.path().join("sample.conll");
    assert_ok(&llm_der([
        "sample", "--corpus", &arg(&fixture("corpus.jsonl")), "--profile", &arg(&fixture("profile.json")), "--k", "4", "--out",
        &arg(&out_path),
    ]));
    let profile = CorpusProfile::load(&fixture("profile.json")).unwrap();
    let sample = Corpus::load(&out_path, None, Some(&profile)).unwrap();
    assert_eq!(sample.len(), 4);

    let stats = llm_der(["stats", "--corpus", &arg(&fixture("corpus.jsonl")), "--json"]);
    assert_ok(&stats);
    let v: serde_json::Value = serde_json::from_slice(&stats.stdout).unwrap();
    assert_eq!(v["mention_count"], 60);
    assert_eq!(v["per_type_counts"]["LOC"], 20);
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    // Usage: unknown flag, missing required argument, bad value.
    assert_eq!(llm_der(["pipeline", "--bogus"]).status.code(), Some(2));
    assert_eq!(llm_der(["eval", "--gold", "x.jsonl"]).status.code(), Some(2));
    assert_eq!(llm_der(["stats", "--corpus", &arg(&fixture("corpus.jsonl")), "--unit", "syllable"]).status.code(), Some(2));
    // Config: an invalid override.
    let out = llm_der([
        "pipeline", "--profile", &arg(&fixture("profile.json")), "--corpus", &arg(&fixture("corpus.jsonl")), "--mock",
        &arg(&fixture("mock_clean.jsonl")), "--beta", "1.5", "--no-cache", "--out-dir", &arg(tmp.path()),
    ]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    // Data format: a truncated JSONL line.
    let bad = tmp.path().join("bad.jsonl");
    std::fs::write(&bad, "{\"id\": \"a\", \"text\": \"x\", \"gold\": [\n").unwrap();
    assert_eq!(llm_der(["stats", "--corpus", &arg(&bad)]).status.code(), Some(4));
    // Data format: a mention outside its sentence.
    std::fs::write(&bad, "{\"id\": \"a\", \"text\": \"短\", \"gold\": [{\"surface\": \"短\", \"start\": 0, \"end\": 5, \"type\": \"ORG\"}]}\n").unwrap();
    assert_eq!(llm_der(["stats", "--corpus", &arg(&bad)]).status.code(), Some(4));
    // Backend: nothing listens on the configured endpoint.
    let out = llm_der([
        "gen-relations", "--profile", &arg(&fixture("profile.json")), "--base-url", "http://127.0.0.1:9", "--max-retries", "0",
        "--no-cache", "--out", &arg(&tmp.path().join("rel.json")),
    ]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    // Backend: the mock has no answer for a relation.
    let empty = tmp.path().join("empty_mock.jsonl");
    std::fs::write(&empty, "").unwrap();
    let out = llm_der([
        "gen-relations", "--profile", &arg(&fixture("profile.json")), "--mock", &arg(&empty), "--no-cache", "--out",
        &arg(&tmp.path().join("rel.json")),
    ]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}
