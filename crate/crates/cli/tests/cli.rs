use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use std::io::Write;

fn veridict(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_veridict")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn synth(dir: &Path, lang: &str, per_label: usize) -> PathBuf {
    let path = dir.join("corpus.jsonl");
    let n = per_label.to_string();
    let out = veridict(&["corpus", "synth", "--lang", lang, "--per-label", &n, "--out", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn corpus_commands() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = synth(dir.path(), "en,de", 12);

    let out = veridict(&["corpus", "stats", "--json", "--input", s(&corpus)]);
    assert_eq!(code(&out), 0);
    let rows: Vec<serde_json::Value> = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rows.len(), 12);
    assert!(rows[0]["paragraphs"].as_u64().unwrap() > 0);
    let fr = rows.iter().find(|r| r["language"] == "FR").unwrap();
    assert_eq!(fr["words"], 0);

    assert_eq!(code(&veridict(&["corpus", "validate", "--input", s(&corpus)])), 0);

    let bad = dir.path().join("bad.jsonl");
    let first = std::fs::read_to_string(&corpus).unwrap().lines().next().unwrap().to_string();
    std::fs::write(&bad, format!("{first}\n{{\"id\": \"x\", \"language\": \"EN\"\n")).unwrap();
    let out = veridict(&["corpus", "validate", "--input", s(&bad)]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains(":2:"), "{}", stderr(&out));

    let empty = dir.path().join("empty.jsonl");
    std::fs::write(&empty, "").unwrap();
    let out = veridict(&["corpus", "stats", "--input", s(&empty)]);
    assert_eq!(code(&out), 0);
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 13);

    assert_eq!(code(&veridict(&["corpus", "stats", "--input", "/definitely/missing"])), 2);
}

#[test]
fn extract_writes_matrices_and_manifests() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = synth(dir.path(), "fr", 15);
    let out = dir.path().join("doc");
    let run = veridict(&[
        "extract", "--input", s(&corpus), "--lang", "FR", "--task", "Rephrased", "--features", "document", "--seed",
        "2", "--out", s(&out),
    ]);
    assert_eq!(code(&run), 0, "{}", stderr(&run));
    for f in ["train.csv", "val.csv", "test.csv"] {
        let text = std::fs::read_to_string(out.join(f)).unwrap();
        let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
        assert_eq!(header.len(), 19 + 2, "{f}");
        assert_eq!(header[0], "id");
        assert_eq!(*header.last().unwrap(), "label");
    }
    assert_eq!(std::fs::read_to_string(out.join("manifest.txt")).unwrap().lines().count(), 19);
    let split: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("split.json")).unwrap()).unwrap();
    assert_eq!(split["seed"], 2);
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out.join("run_manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seeds"], serde_json::json!([2]));
    assert_eq!(manifest["provider_modes"]["chat"], "disabled");

    let two = dir.path().join("two");
    let run = veridict(&[
        "extract", "--input", s(&corpus), "--lang", "fr", "--task", "rephrased", "--features",
        "readability,semantic", "--out", s(&two),
    ]);
    assert_eq!(code(&run), 0, "{}", stderr(&run));
    let text = std::fs::read_to_string(two.join("train.csv")).unwrap();
    assert_eq!(text.lines().next().unwrap().split(',').count(), 4 + 2);

    let bogus = veridict(&[
        "extract", "--input", s(&corpus), "--lang", "fr", "--task", "rephrased", "--features", "bogus", "--out",
        s(&two),
    ]);
    assert_eq!(code(&bogus), 2);
    let feedback = veridict(&[
        "extract", "--input", s(&corpus), "--lang", "fr", "--task", "rephrased", "--features", "aifeedback", "--out",
        s(&two),
    ]);
    assert_eq!(code(&feedback), 2, "{}", stderr(&feedback));
}

#[test]
fn run_minimal_config() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = synth(dir.path(), "en", 15);
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/minimal.json");
    let out = dir.path().join("out");
    let run = veridict(&["run", "--config", s(&config), "--corpus", s(&corpus), "--out", s(&out), "--json"]);
    assert_eq!(code(&run), 0, "{}", stderr(&run));
    let summary: serde_json::Value = serde_json::from_slice(&run.stdout).unwrap();
    assert_eq!(summary["cells"], 1);
    let csv = std::fs::read_to_string(out.join("report.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert!(out.join("report.md").exists());
    assert!(out.join("preds").read_dir().unwrap().count() == 5);
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out.join("run_manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "run");
    assert_eq!(manifest["config_sha256"].as_str().unwrap().len(), 64);

    // a relative corpus path in the config resolves against the config file
    let local = dir.path().join("local.json");
    std::fs::write(&local, r#"{"corpus":"corpus.jsonl","languages":["EN"],"tasks":["Generated"],"features":["Document"],"models":["rf"],"seeds":[0]}"#).unwrap();
    let run = veridict(&["run", "--config", s(&local), "--out", s(&dir.path().join("out2"))]);
    assert_eq!(code(&run), 0, "{}", stderr(&run));

    assert_eq!(code(&veridict(&["run", "--config", s(&config), "--out", s(&out)])), 2);
    let missing = veridict(&["run", "--config", s(&config), "--corpus", "/no/such/corpus.jsonl", "--out", s(&out)]);
    assert_eq!(code(&missing), 2);
    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, r#"{"languages":["XX"]}"#).unwrap();
    assert_eq!(code(&veridict(&["run", "--config", s(&broken), "--corpus", s(&corpus), "--out", s(&out)])), 2);
}

#[test]
fn train_then_detect() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = synth(dir.path(), "es", 20);
    let model = dir.path().join("es.vrd");
    let run = veridict(&[
        "train", "--input", s(&corpus), "--lang", "es", "--task", "generated", "--model", "rf", "--out", s(&model),
    ]);
    assert_eq!(code(&run), 0, "{}", stderr(&run));

    let ai_body = std::fs::read_to_string(&corpus)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap())
        .find(|d| d["label"] == "AIGenerated")
        .map(|d| d["body"].as_str().unwrap().to_string())
        .unwrap();
    let text = dir.path().join("ai.txt");
    std::fs::write(&text, &ai_body).unwrap();
    let out = veridict(&["detect", "--model", s(&model), "--text", s(&text)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let detection: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(detection.as_object().unwrap().len(), 3);
    assert!(detection["proba_ai"].as_f64().unwrap() > 0.5, "{detection}");
    assert_eq!(detection["label"], "AIGenerated");
    assert_eq!(detection["top_features"].as_array().unwrap().len(), 5);

    // stdin input
    let mut child = Command::new(env!("CARGO_BIN_EXE_veridict"))
        .args(["detect", "--model", s(&model), "--text", "-"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(ai_body.as_bytes()).unwrap();
    let piped = child.wait_with_output().unwrap();
    assert_eq!(piped.stdout, out.stdout);

    let empty = dir.path().join("empty.txt");
    std::fs::write(&empty, "  \n").unwrap();
    let out = veridict(&["detect", "--model", s(&model), "--text", s(&empty)]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("empty document"));

    assert_eq!(code(&veridict(&["detect", "--model", s(&model), "--text", s(&text), "--lang", "de"])), 2);
    let garbage = dir.path().join("garbage.vrd");
    std::fs::write(&garbage, "not a model").unwrap();
    assert_eq!(code(&veridict(&["detect", "--model", s(&garbage), "--text", s(&text)])), 2);
}
