//! Tests driving the installed binary: input formats, error reporting,
//! flag/config precedence and rerun determinism.

use std::path::Path;
use std::process::{Command, Output};

fn blognet(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_blognet"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn stdout_json(output: &Output) -> serde_json::Value {
    assert!(
        output.status.success(),
        "command failed: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    serde_json::from_slice(&output.stdout).expect("single-line JSON summary")
}

fn stderr_text(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

/// Six tiny blogs: a beer trio and a food trio with heavy in-group overlap.
fn write_corpus_dir(dir: &Path) {
    // two shared words put cross-group pairs near similarity 0.1 while
    // in-group pairs stay above 0.8
    let docs = [
        (
            "beer-one",
            "blogg vecka ale stout lager hops malt yeast bitter porter",
        ),
        (
            "beer-two",
            "blogg vecka ale stout lager hops malt yeast crisp porter",
        ),
        (
            "beer-three",
            "blogg vecka ale stout lager hops malt wheat bitter porter",
        ),
        (
            "food-one",
            "blogg vecka bread cheese butter salt pepper olive basil pasta",
        ),
        (
            "food-two",
            "blogg vecka bread cheese butter salt pepper garlic basil pasta",
        ),
        (
            "food-three",
            "blogg vecka bread cheese butter salt thyme olive basil pasta",
        ),
    ];
    std::fs::create_dir_all(dir).unwrap();
    for (id, text) in docs {
        std::fs::write(dir.join(format!("{id}.txt")), text).unwrap();
    }
}

const PERMISSIVE: &[&str] = &[
    "--min-count",
    "1",
    "--keep-percentile",
    "100",
    "--min-wordset-size",
    "2",
];

#[test]
fn full_pipeline_through_the_binary() {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path();
    write_corpus_dir(&root.join("corpus"));

    let out = blognet(
        &[
            &["index", "--input", "corpus", "--out-dir", "index"],
            PERMISSIVE,
        ]
        .concat(),
        root,
    );
    let summary = stdout_json(&out);
    assert_eq!(summary["documents"], 6);
    assert!(root.join("index/frequency_table.tsv").is_file());
    assert!(root.join("index/manifest.json").is_file());

    let out = blognet(
        &[
            &[
                "graph",
                "--input",
                "corpus",
                "--frequency-table",
                "index/frequency_table.tsv",
                "--out-dir",
                "graph",
            ],
            PERMISSIVE,
        ]
        .concat(),
        root,
    );
    let summary = stdout_json(&out);
    assert_eq!(summary["documents_kept"], 6);
    assert!(summary["edges"].as_u64().unwrap() >= 6);
    for artifact in [
        "graph/edges.tsv",
        "graph/vocabulary.tsv",
        "graph/histogram.csv",
        "graph/anomalies.jsonl",
        "graph/graph.graphml",
    ] {
        assert!(root.join(artifact).is_file(), "{artifact} missing");
    }

    let out = blognet(
        &[
            &[
                "cluster",
                "--edges",
                "graph/edges.tsv",
                "--out-dir",
                "cluster",
                "--gamma",
                "0.3",
            ],
            PERMISSIVE,
        ]
        .concat(),
        root,
    );
    let summary = stdout_json(&out);
    assert_eq!(summary["n_clusters"], 2, "beer and food clusters");
    assert_eq!(summary["sizes"], serde_json::json!([3, 3]));

    let out = blognet(
        &[
            &[
                "hierarchy",
                "--edges",
                "graph/edges.tsv",
                "--partition",
                "cluster/partition.csv",
                "--cluster-id",
                "0",
                "--out-dir",
                "hier",
                "--gamma",
                "0.3",
                "--hrg-steps",
                "500",
                "--hrg-burn-in",
                "100",
                "--seed",
                "5",
            ],
            PERMISSIVE,
        ]
        .concat(),
        root,
    );
    let summary = stdout_json(&out);
    assert_eq!(summary["leaves"], 3);
    let newick = std::fs::read_to_string(root.join("hier/dendrogram.newick")).unwrap();
    assert!(newick.trim_end().ends_with(';'));
    let trace = std::fs::read_to_string(root.join("hier/trace.csv")).unwrap();
    assert!(trace.starts_with("step,loglik\n"));
}

#[test]
fn two_identical_documents_build_one_edge_without_a_fit() {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path();
    std::fs::create_dir(root.join("corpus")).unwrap();
    for name in ["twin-a", "twin-b"] {
        std::fs::write(
            root.join(format!("corpus/{name}.txt")),
            "ale stout lager hops malt",
        )
        .unwrap();
    }
    let out = blognet(
        &[
            &["graph", "--input", "corpus", "--out-dir", "graph"],
            PERMISSIVE,
        ]
        .concat(),
        root,
    );
    let summary = stdout_json(&out);
    assert_eq!(summary["edges"], 1);
    assert_eq!(summary["slope"], serde_json::Value::Null);
    assert!(
        summary["fit_error"]
            .as_str()
            .unwrap()
            .contains("insufficient support"),
        "summary: {summary}"
    );
    let edges = std::fs::read_to_string(root.join("graph/edges.tsv")).unwrap();
    assert_eq!(edges, "twin-a\ttwin-b\t1.00000\n");
}

#[test]
fn toy_edge_list_clusters_and_fits_a_hierarchy() {
    // two disjoint unit triangles straight into the cluster stage
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path();
    let mut rows = String::new();
    for (a, b) in [
        ("a", "b"),
        ("a", "c"),
        ("b", "c"),
        ("x", "y"),
        ("x", "z"),
        ("y", "z"),
    ] {
        rows.push_str(&format!("{a}\t{b}\t1.00000\n"));
    }
    std::fs::write(root.join("toy.tsv"), rows).unwrap();

    let out = blognet(
        &["cluster", "--edges", "toy.tsv", "--out-dir", "cluster"],
        root,
    );
    let summary = stdout_json(&out);
    assert_eq!(summary["n_clusters"], 2);
    assert_eq!(summary["q"], 0.5);
    assert_eq!(summary["sizes"], serde_json::json!([3, 3]));

    // each cluster is a triangle: a perfect-fit hierarchy
    let out = blognet(
        &[
            "hierarchy",
            "--edges",
            "toy.tsv",
            "--partition",
            "cluster/partition.csv",
            "--cluster-id",
            "1",
            "--out-dir",
            "hier",
        ],
        root,
    );
    let summary = stdout_json(&out);
    assert_eq!(summary["leaves"], 3);
    assert_eq!(summary["best_loglik"], 0.0);
    let newick = std::fs::read_to_string(root.join("hier/dendrogram.newick")).unwrap();
    assert!(newick.trim_end().ends_with(';'), "newick: {newick}");
}

#[test]
fn empty_directory_is_a_clear_error() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::create_dir(tmp.path().join("empty")).unwrap();
    let out = blognet(&["index", "--input", "empty", "--out-dir", "x"], tmp.path());
    assert!(!out.status.success());
    assert!(
        stderr_text(&out).contains("no input documents"),
        "stderr: {}",
        stderr_text(&out)
    );
}

#[test]
fn malformed_jsonl_reports_the_line() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(
        tmp.path().join("bad.jsonl"),
        "{\"id\":\"a\",\"text\":\"fine\"}\n{broken\n",
    )
    .unwrap();
    let out = blognet(
        &["index", "--input", "bad.jsonl", "--out-dir", "x"],
        tmp.path(),
    );
    assert!(!out.status.success());
    let stderr = stderr_text(&out);
    assert!(stderr.contains("bad.jsonl:2"), "stderr: {stderr}");
}

#[test]
fn cluster_view_above_all_similarities_is_edgeless() {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path();
    write_corpus_dir(&root.join("corpus"));
    let out = blognet(
        &[
            &["graph", "--input", "corpus", "--out-dir", "graph"],
            PERMISSIVE,
        ]
        .concat(),
        root,
    );
    stdout_json(&out);

    let out = blognet(
        &[
            &[
                "cluster",
                "--edges",
                "graph/edges.tsv",
                "--out-dir",
                "cluster",
                "--gamma",
                "0.999",
            ],
            PERMISSIVE,
        ]
        .concat(),
        root,
    );
    assert!(!out.status.success());
    assert!(
        stderr_text(&out).contains("view edgeless"),
        "stderr: {}",
        stderr_text(&out)
    );
}

#[test]
fn gamma_views_nest_and_export() {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path();
    write_corpus_dir(&root.join("corpus"));
    let out = blognet(
        &[
            &[
                "graph",
                "--input",
                "corpus",
                "--out-dir",
                "graph",
                "--view-gammas",
                "0.04,0.045,0.055,0.07",
            ],
            PERMISSIVE,
        ]
        .concat(),
        root,
    );
    stdout_json(&out);

    let mut last = usize::MAX;
    for gamma in ["0.04", "0.045", "0.055", "0.07"] {
        let tsv = root.join(format!("graph/view_{gamma}.tsv"));
        let graphml = root.join(format!("graph/view_{gamma}.graphml"));
        assert!(tsv.is_file(), "missing {tsv:?}");
        assert!(graphml.is_file(), "missing {graphml:?}");
        let edges = std::fs::read_to_string(&tsv).unwrap().lines().count();
        assert!(edges <= last, "views must nest as gamma rises");
        last = edges;
    }
}

#[test]
fn config_file_applies_and_flags_win() {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path();
    write_corpus_dir(&root.join("corpus"));
    std::fs::write(
        root.join("config.toml"),
        "min_count = 1\nkeep_percentile = 100.0\nmin_wordset_size = 2\nstore_threshold = 0.5\n",
    )
    .unwrap();

    // config alone: high threshold keeps only the strong in-group edges
    let out = blognet(
        &[
            "graph",
            "--input",
            "corpus",
            "--out-dir",
            "g1",
            "--config",
            "config.toml",
        ],
        root,
    );
    let strict_edges = stdout_json(&out)["edges"].as_u64().unwrap();

    // the flag overrides the file's threshold
    let out = blognet(
        &[
            "graph",
            "--input",
            "corpus",
            "--out-dir",
            "g2",
            "--config",
            "config.toml",
            "--store-threshold",
            "0.025",
        ],
        root,
    );
    let loose_edges = stdout_json(&out)["edges"].as_u64().unwrap();
    assert!(
        loose_edges > strict_edges,
        "override must loosen the threshold ({loose_edges} vs {strict_edges})"
    );
}

#[test]
fn synth_spec_errors_name_the_field() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(
        tmp.path().join("spec.toml"),
        "n_topics = 1\nblogs_per_topic = 2\nshared_vocab_size = 10\ntopic_vocab_size = 10\n\
         zipf_exponent = 1.0\nwords_per_blog = 5\ntopic_purity = 1.5\nseed = 1\n",
    )
    .unwrap();
    let out = blognet(
        &["synth", "--spec", "spec.toml", "--out-dir", "s"],
        tmp.path(),
    );
    assert!(!out.status.success());
    assert!(
        stderr_text(&out).contains("topic_purity"),
        "stderr: {}",
        stderr_text(&out)
    );
}

#[test]
fn synth_rerun_is_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path();
    std::fs::write(
        root.join("spec.toml"),
        "n_topics = 2\nblogs_per_topic = 5\nshared_vocab_size = 200\ntopic_vocab_size = 100\n\
         zipf_exponent = 1.0\nwords_per_blog = 50\ntopic_purity = 0.6\nseed = 9\n\
         duplicate_group_sizes = [2]\nduplicate_mutation_rate = 0.0\n",
    )
    .unwrap();
    for out_dir in ["s1", "s2"] {
        let out = blognet(
            &["synth", "--spec", "spec.toml", "--out-dir", out_dir],
            root,
        );
        let summary = stdout_json(&out);
        assert_eq!(summary["documents"], 11);
        assert_eq!(summary["planted_duplicate_groups"], 1);
    }
    for name in ["corpus.jsonl", "ground_truth.json"] {
        let a = std::fs::read(root.join("s1").join(name)).unwrap();
        let b = std::fs::read(root.join("s2").join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between reruns");
    }

    // the generated corpus feeds straight back into the indexer, and the
    // distinct-word count matches a direct scan of the corpus file
    let out = blognet(
        &[
            &["index", "--input", "s1/corpus.jsonl", "--out-dir", "idx"],
            PERMISSIVE,
        ]
        .concat(),
        root,
    );
    let summary = stdout_json(&out);
    assert_eq!(summary["documents"], 11);
    let corpus = std::fs::read_to_string(root.join("s1/corpus.jsonl")).unwrap();
    let mut distinct = std::collections::HashSet::new();
    for line in corpus.lines() {
        let record: serde_json::Value = serde_json::from_str(line).unwrap();
        for token in record["text"].as_str().unwrap().split_whitespace() {
            distinct.insert(token.to_owned());
        }
    }
    assert_eq!(summary["distinct_words"], distinct.len());

    // the planted duplicate pair comes back out of the graph stage
    let out = blognet(
        &[
            &["graph", "--input", "s1/corpus.jsonl", "--out-dir", "graph"],
            PERMISSIVE,
        ]
        .concat(),
        root,
    );
    assert_eq!(stdout_json(&out)["duplicate_groups"], 1);
    let anomalies = std::fs::read_to_string(root.join("graph/anomalies.jsonl")).unwrap();
    assert!(
        anomalies.contains("duplicate_group") && anomalies.contains("-dup1"),
        "anomalies: {anomalies}"
    );
}
