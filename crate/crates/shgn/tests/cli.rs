//! End-to-end tests of the `shgn` binary: every subcommand, the golden graph
//! export, and the error paths.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixtures_dir() -> PathBuf {
    PathBuf::from(format!("{}/tests/fixtures", env!("CARGO_MANIFEST_DIR")))
}

fn shgn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shgn"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn path_str(p: &Path) -> String {
    p.to_str().unwrap().to_string()
}

#[test]
fn build_graph_matches_checked_in_golden() {
    let fixtures = fixtures_dir();
    let out_file = tempfile::NamedTempFile::new().unwrap();
    let out = shgn(&[
        "build-graph",
        "--stories",
        &path_str(&fixtures.join("story.jsonl")),
        "--knowledge",
        &path_str(&fixtures.join("knowledge.tsv")),
        "--parses",
        &path_str(&fixtures.join("parses.conllu")),
        "--id",
        "st1",
        "--out",
        &path_str(out_file.path()),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let produced: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_file.path()).unwrap()).unwrap();
    let golden: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(fixtures.join("golden_graph.json")).unwrap())
            .unwrap();
    assert_eq!(produced, golden);
}

#[test]
fn evaluate_identical_files_prints_perfect_scores() {
    let dir = tempfile::tempdir().unwrap();
    let endings = dir.path().join("endings.jsonl");
    let mut lines = String::new();
    for (id, ending) in [
        ("a", "anna decided to keep the cake today"),
        ("b", "the milk was thick and smelled sour"),
    ] {
        lines.push_str(&format!("{{\"id\":\"{id}\",\"ending\":\"{ending}\"}}\n"));
    }
    std::fs::write(&endings, lines).unwrap();
    let report_path = dir.path().join("report.json");
    let out = shgn(&[
        "evaluate",
        "--hyp",
        &path_str(&endings),
        "--ref",
        &path_str(&endings),
        "--out",
        &path_str(&report_path),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = stdout_of(&out);
    for metric in ["BLEU-1", "BLEU-2", "BLEU-3", "BLEU-4", "ROUGE-L-F1"] {
        let line = stdout
            .lines()
            .find(|l| l.starts_with(metric))
            .unwrap_or_else(|| panic!("no {metric} line in:\n{stdout}"));
        assert!(line.contains("100.00"), "{line}");
    }
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    assert_eq!(report["n"], 2);
}

#[test]
fn label_command_writes_a_loadable_cache() {
    let fixtures = fixtures_dir();
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("labels.jsonl");
    let out = shgn(&[
        "label",
        "--stories",
        &path_str(&fixtures.join("story.jsonl")),
        "--lexicon",
        &path_str(&fixtures.join("lexicon.tsv")),
        "--parses",
        &path_str(&fixtures.join("parses.conllu")),
        "--out",
        &path_str(&cache),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let loaded = shgn::corpus::load_label_cache(&cache).unwrap();
    let record = &loaded["st1"];
    assert_eq!(record.sentiment, shgn::corpus::Sentiment::Negative);
    // Sentence 1 flags went/kitchen (tokens 2 and 5 of 8).
    assert_eq!(
        record.clue_flags[0],
        vec![false, true, false, false, true, false, false, false]
    );
}

/// One short CLI training run shared by the generation tests.
fn train_toy_checkpoint(dir: &Path) -> PathBuf {
    let data = dir.join("data");
    shgn::toydata::write_all(&data).unwrap();
    let out_dir = dir.join("run");
    let out = shgn(&[
        "train",
        "--preset",
        "toy",
        "--train",
        &path_str(&data.join("stories.jsonl")),
        "--knowledge",
        &path_str(&data.join("knowledge.tsv")),
        "--parses",
        &path_str(&data.join("parses.conllu")),
        "--lexicon",
        &path_str(&data.join("lexicon.tsv")),
        "--max-steps",
        "4",
        "--out-dir",
        &path_str(&out_dir),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out_dir.join("train_log.jsonl").exists());
    assert!(out_dir.join("checkpoint_best.json").exists());
    out_dir.join("checkpoint_last.json")
}

#[test]
fn generate_beam_one_equals_library_greedy() {
    let dir = tempfile::tempdir().unwrap();
    let checkpoint_path = train_toy_checkpoint(dir.path());
    let data = dir.path().join("data");

    let out_file = dir.path().join("endings.jsonl");
    let out = shgn(&[
        "generate",
        "--checkpoint",
        &path_str(&checkpoint_path),
        "--stories",
        &path_str(&data.join("stories.jsonl")),
        "--knowledge",
        &path_str(&data.join("knowledge.tsv")),
        "--parses",
        &path_str(&data.join("parses.conllu")),
        "--beam",
        "1",
        "--out",
        &path_str(&out_file),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    // Library-side greedy decoding over the same checkpoint and graphs.
    let checkpoint = shgn::harness::load_checkpoint(&checkpoint_path).unwrap();
    let model = shgn::harness::model_from_checkpoint(&checkpoint, None).unwrap();
    let stories = shgn::corpus::load_stories(data.join("stories.jsonl")).unwrap();
    let knowledge = shgn::corpus::load_knowledge(data.join("knowledge.tsv")).unwrap();
    let trees = shgn::corpus::load_dep_trees(data.join("parses.conllu")).unwrap();
    let stopwords = shgn::corpus::Stopwords::default_english();

    let text = std::fs::read_to_string(&out_file).unwrap();
    let lines: Vec<serde_json::Value> = text
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), stories.len());
    for (story, line) in stories.iter().zip(lines.iter()) {
        let hits = shgn::graph::retrieve_concepts(story, &knowledge, Some(&trees), &stopwords);
        let graph = shgn::graph::build_graph(
            story,
            &hits,
            Some(&trees),
            &stopwords,
            shgn::graph::GraphOptions::default(),
        )
        .unwrap();
        let greedy = model.greedy_for(&graph, checkpoint.max_len).unwrap();
        assert_eq!(line["id"], story.id.as_str());
        assert_eq!(line["ending"], greedy.text(&model.vocab), "story {}", story.id);
    }
}

#[test]
fn generate_rejects_mismatched_ablation_flags() {
    let dir = tempfile::tempdir().unwrap();
    let checkpoint_path = train_toy_checkpoint(dir.path());
    let data = dir.path().join("data");
    let out = shgn(&[
        "generate",
        "--checkpoint",
        &path_str(&checkpoint_path),
        "--stories",
        &path_str(&data.join("stories.jsonl")),
        "--knowledge",
        &path_str(&data.join("knowledge.tsv")),
        "--no-global",
        "--out",
        &path_str(&dir.path().join("x.jsonl")),
    ]);
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("config hash mismatch"), "{stderr}");
}

#[test]
fn inspect_prints_node_and_edge_statistics() {
    let fixtures = fixtures_dir();
    let out = shgn(&[
        "inspect",
        "--stories",
        &path_str(&fixtures.join("story.jsonl")),
        "--knowledge",
        &path_str(&fixtures.join("knowledge.tsv")),
        "--parses",
        &path_str(&fixtures.join("parses.conllu")),
        "--id",
        "st1",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = stdout_of(&out);
    assert!(stdout.contains("nodes: 16"), "{stdout}");
    assert!(stdout.contains("edges: 39"), "{stdout}");
    assert!(stdout.contains("k:food"), "{stdout}");
}

#[test]
fn train_reads_toml_config_with_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    shgn::toydata::write_all(&data).unwrap();
    // The config file pins the model shape; the flag overrides max_steps.
    let config_path = dir.path().join("run.toml");
    std::fs::write(
        &config_path,
        format!(
            "hidden = 32\nheads = 2\ndecoder_layers = 1\nmin_freq = 1\nbatch_size = 8\n\
             max_steps = 99\ntrain_path = {:?}\nknowledge_path = {:?}\nparses_path = {:?}\n\
             lexicon_path = {:?}\nout_dir = {:?}\n",
            data.join("stories.jsonl"),
            data.join("knowledge.tsv"),
            data.join("parses.conllu"),
            data.join("lexicon.tsv"),
            dir.path().join("run")
        ),
    )
    .unwrap();
    let out = shgn(&[
        "train",
        "--config",
        &path_str(&config_path),
        "--max-steps",
        "2",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let log = std::fs::read_to_string(dir.path().join("run/train_log.jsonl")).unwrap();
    assert_eq!(log.lines().count(), 2, "flag must override the file value");
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let out = shgn(&["evaluate", "--bogus", "x"]);
    assert!(!out.status.success());
}

#[test]
fn missing_file_fails_with_nonzero_exit() {
    let out = shgn(&[
        "build-graph",
        "--stories",
        "/nonexistent/stories.jsonl",
        "--id",
        "st1",
    ]);
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("error"), "{stderr}");
}

#[test]
fn checked_in_toy_fixtures_match_the_generator() {
    let fixtures = fixtures_dir().join("toy");
    assert_eq!(
        std::fs::read_to_string(fixtures.join("stories.jsonl")).unwrap(),
        shgn::toydata::stories_jsonl()
    );
    assert_eq!(
        std::fs::read_to_string(fixtures.join("knowledge.tsv")).unwrap(),
        shgn::toydata::knowledge_tsv()
    );
    assert_eq!(
        std::fs::read_to_string(fixtures.join("parses.conllu")).unwrap(),
        shgn::toydata::parses_conllu()
    );
    assert_eq!(
        std::fs::read_to_string(fixtures.join("lexicon.tsv")).unwrap(),
        shgn::toydata::lexicon_tsv()
    );
}
