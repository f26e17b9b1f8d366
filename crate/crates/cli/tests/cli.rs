use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use topicdisc::corpus::read_documents_from_path;
use topicdisc::lda::{self, LdaConfig};
use topicdisc::model::ModelArtifact;
use topicdisc_cli::commands;
use topicdisc_cli::config::{ModelKind, RunConfig};
use topicdisc_cli::report::SweepReport;

fn topicdisc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_topicdisc"))
        .args(args)
        .env_remove("TOPICDISC_CONFIG")
        .output()
        .unwrap()
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
fn stats_matches_hand_computation() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("two.csv");
    fs::write(
        &csv,
        "id,text,labels,group\n\
         1,parks closed today,closures,Ontario/Toronto\n\
         2,\"schools open again, parks closed soon\",openings;closures,Ontario/Ottawa\n",
    )
    .unwrap();
    let json = dir.path().join("stats.json");
    let o = topicdisc(&[
        "stats",
        "-i",
        p(&csv),
        "--json",
        p(&json),
        "--group-by",
        "group",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let s: serde_json::Value = serde_json::from_slice(&fs::read(&json).unwrap()).unwrap();
    // 3 and 5 tokens after stopword removal
    assert_eq!(s["documents"], 2);
    assert_eq!(s["total_tokens"], 8);
    assert_eq!(s["w_mean"], 4.0);
    assert_eq!(s["w_std"], 1.0);
    assert_eq!(s["per_group"]["Ontario"]["entities"], 2);
    assert!(stdout(&o).contains("docs/entity"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.csv");
    let o = topicdisc(&["stats", "-i", p(&missing)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("missing.csv"));

    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "id,text\n1,ok\n2,too,many,fields\n").unwrap();
    let o = topicdisc(&["stats", "-i", p(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("row"), "{}", stderr(&o));

    let dup = dir.path().join("dup.csv");
    fs::write(&dup, "id,text\n1,a b\n1,c d\n").unwrap();
    assert_eq!(topicdisc(&["stats", "-i", p(&dup)]).status.code(), Some(2));

    assert_eq!(topicdisc(&["stats"]).status.code(), Some(1));
    assert_eq!(topicdisc(&["nonsense"]).status.code(), Some(1));
    assert_eq!(topicdisc(&["--help"]).status.code(), Some(0));
    assert_eq!(topicdisc(&["--version"]).status.code(), Some(0));
    let o = topicdisc(&["sweep", "-i", p(&dup), "-o", p(dir.path()), "-k", "5,2"]);
    assert_eq!(o.status.code(), Some(1));
    let o = topicdisc(&["stats", "-i", p(&dup), "--set", "unknown_key=3"]);
    assert_eq!(o.status.code(), Some(1));
    let o = topicdisc(&["synth", "-o", p(&dir.path().join("x.csv")), "--topics", "0"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn config_file_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("docs.csv");
    fs::write(&csv, "id,text\n1,alpha beta\n2,gamma delta epsilon\n").unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(
        &cfg,
        "input = \"docs.csv\"\ndataset = \"fromfile\"\nmin_token_len = 5\n",
    )
    .unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_topicdisc"))
        .arg("stats")
        .env("TOPICDISC_CONFIG", &cfg)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("fromfile"));
    // "beta" falls under the minimum length
    assert!(out.contains("V (terms)     4"), "{out}");

    // flags take precedence over the file
    let o = Command::new(env!("CARGO_BIN_EXE_topicdisc"))
        .args(["stats", "--dataset", "flag", "--set", "min_token_len=1"])
        .env("TOPICDISC_CONFIG", &cfg)
        .output()
        .unwrap();
    let out = stdout(&o);
    assert!(
        out.contains("flag") && out.contains("V (terms)     5"),
        "{out}"
    );
}

#[test]
fn synth_output_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("s.csv");
    let o = topicdisc(&[
        "synth",
        "-o",
        p(&csv),
        "--topics",
        "4",
        "--docs",
        "120",
        "--seed",
        "2",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let docs = read_documents_from_path(&csv).unwrap();
    assert_eq!(docs.len(), 120);
    let labels: std::collections::BTreeSet<&String> = docs.iter().flat_map(|d| &d.labels).collect();
    assert!(labels.len() <= 4 && labels.iter().all(|l| l.starts_with("topic_")));
    let again = dir.path().join("t.csv");
    topicdisc(&[
        "synth",
        "-o",
        p(&again),
        "--topics",
        "4",
        "--docs",
        "120",
        "--seed",
        "2",
    ]);
    assert_eq!(fs::read(&csv).unwrap(), fs::read(&again).unwrap());
}

#[test]
fn topics_command_matches_in_memory_model() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("s.csv");
    topicdisc(&["synth", "-o", p(&csv), "--docs", "80", "--vocab", "60"]);
    let cfg = RunConfig {
        input: Some(csv),
        ..RunConfig::default()
    };
    let (_, corpus) = commands::load_corpus(&cfg).unwrap();
    let model = lda::fit(&corpus, &LdaConfig::new(3)).unwrap();
    let expected: String = (0..3)
        .map(|t| format!("{t}: {}\n", model.top_terms(t, 10).unwrap().join(", ")))
        .collect();
    let path = dir.path().join("m.json");
    ModelArtifact::Lda(model).save(&path).unwrap();
    let o = topicdisc(&["topics", "-m", p(&path)]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), expected);

    let single = lda::fit(&corpus, &LdaConfig::new(1)).unwrap();
    ModelArtifact::Lda(single).save(&path).unwrap();
    assert_eq!(
        stdout(&topicdisc(&["topics", "-m", p(&path), "-n", "3"]))
            .lines()
            .count(),
        1
    );

    fs::write(&path, "garbage").unwrap();
    assert_eq!(
        topicdisc(&["topics", "-m", p(&path)]).status.code(),
        Some(2)
    );
}

fn sweep_config(dir: &Path, input: &Path) -> RunConfig {
    RunConfig {
        input: Some(input.to_path_buf()),
        output_dir: Some(dir.join("out")),
        hdp_max_topics: 20,
        hdp_passes: 3,
        ..RunConfig::default()
    }
}

#[test]
fn hdp_only_sweep_fits_once() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("s.csv");
    topicdisc(&["synth", "-o", p(&csv), "--docs", "100", "--vocab", "80"]);
    let cfg = RunConfig {
        models: vec![ModelKind::Hdp],
        k_values: vec![2, 5, 10, 20],
        ..sweep_config(dir.path(), &csv)
    };
    let report = commands::sweep(&cfg, &mut std::io::sink()).unwrap();
    assert_eq!(report.rows.len(), 4);
    assert!(report.rows.iter().all(|r| r.c_v == report.rows[0].c_v));
    let files: Vec<_> = fs::read_dir(dir.path().join("out/models"))
        .unwrap()
        .collect();
    assert_eq!(files.len(), 1);
    assert_eq!(
        report
            .topics
            .iter()
            .map(|l| l.topics.len())
            .collect::<Vec<_>>(),
        vec![2, 5, 10, 20]
    );
}

#[test]
fn unlabeled_input_gives_coherence_only_report() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("plain.csv");
    let mut text = String::from("id,text\n");
    for i in 0..30 {
        text.push_str(&format!(
            "{i},parks closed masks required schools open travel banned {i}x\n"
        ));
    }
    fs::write(&csv, text).unwrap();
    let cfg = RunConfig {
        k_values: vec![2, 3],
        ..sweep_config(dir.path(), &csv)
    };
    let report = commands::sweep(&cfg, &mut std::io::sink()).unwrap();
    assert!(report
        .rows
        .iter()
        .all(|r| r.s.is_none() && r.cov.is_none() && r.cov_ratio.is_none()));
    let csv_out = fs::read_to_string(dir.path().join("out/sweep.csv")).unwrap();
    assert!(csv_out.lines().nth(1).unwrap().ends_with(",,,"));
    let json: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("out/sweep.json")).unwrap()).unwrap();
    assert!(json["rows"][0]["s"].is_null());
}

#[test]
fn lda_coverage_peaks_at_or_beyond_true_topic_count() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("s.csv");
    topicdisc(&["synth", "-o", p(&csv), "--seed", "7"]);
    let cfg = RunConfig {
        models: vec![ModelKind::Lda],
        k_values: vec![2, 3, 5, 8],
        ..sweep_config(dir.path(), &csv)
    };
    let report = commands::sweep(&cfg, &mut std::io::sink()).unwrap();
    let ratio = |k: usize| {
        report
            .rows
            .iter()
            .find(|r| r.k == k)
            .unwrap()
            .cov_ratio
            .unwrap()
    };
    let best = [2, 3, 5, 8].map(ratio).into_iter().fold(0.0, f64::max);
    assert_eq!(ratio(5).max(ratio(8)), best);
    assert_eq!(ratio(5), 1.0);

    let saved: SweepReport =
        serde_json::from_slice(&fs::read(dir.path().join("out/sweep.json")).unwrap()).unwrap();
    assert_eq!(saved, report);
    let topics = fs::read_to_string(dir.path().join("out/topics.txt")).unwrap();
    assert!(topics.starts_with("# LDA K=2\n0: "));
}
