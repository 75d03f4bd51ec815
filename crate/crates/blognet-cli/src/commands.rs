//! The pipeline stages behind the subcommands. Each stage reads its inputs,
//! writes its artifacts plus a run manifest into the output directory, and
//! returns a machine-readable summary for standard output.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use blognet::cluster::greedy_cluster;
use blognet::corpus::{build_corpus, index, select_vocabulary, RawDocument, VocabularyPolicy};
use blognet::hrg::{binarize, default_budgets, fit};
use blognet::io;
use blognet::simnet::{
    build_graph, detect_duplicates, detect_outliers, fit_power_law, histogram, threshold_view,
    AnomalyReport, OutlierPolicy, PowerLawFit,
};
use blognet::synth::{
    expected_survivors, generate_corpus, inject_duplicates, ExpectedSurvivors, TopicModelSpec,
};

use crate::config::PipelineConfig;
use crate::manifest::RunManifest;

fn ensure_out_dir(out_dir: &Path) -> Result<()> {
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("failed to create output directory {}", out_dir.display()))
}

fn load_documents(input: &Path) -> Result<Vec<RawDocument>> {
    let docs = io::read_documents(input)?;
    if docs.is_empty() {
        bail!("no input documents in {}", input.display());
    }
    Ok(docs)
}

#[derive(Debug, Serialize)]
pub struct IndexSummary {
    pub documents: usize,
    pub tokens: u64,
    pub distinct_words: usize,
    pub frequency_table: PathBuf,
}

/// Index stage: word-frequency table over the corpus.
pub fn run_index(input: &Path, out_dir: &Path, config: &PipelineConfig) -> Result<IndexSummary> {
    ensure_out_dir(out_dir)?;
    let mut manifest = RunManifest::new("index", config);
    manifest.add_input(input)?;

    let stage = Instant::now();
    let docs = load_documents(input)?;
    let table = index(&docs)?;
    manifest.record_stage("index", stage);

    let table_path = out_dir.join("frequency_table.tsv");
    io::write_frequency_table_tsv(&table_path, &table)?;
    manifest.add_artifact(&table_path)?;
    eprintln!(
        "indexed {} documents: {} tokens, {} distinct words",
        docs.len(),
        table.total_tokens(),
        table.distinct_words()
    );

    let summary = IndexSummary {
        documents: docs.len(),
        tokens: table.total_tokens(),
        distinct_words: table.distinct_words(),
        frequency_table: table_path,
    };
    manifest.write(out_dir)?;
    Ok(summary)
}

#[derive(Debug, Serialize)]
pub struct GraphSummary {
    /// Documents surviving the vocabulary and word-set-size filters.
    pub documents_kept: usize,
    pub documents_dropped: usize,
    pub vocabulary_size: usize,
    pub edges: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slope: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_squared: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit_error: Option<String>,
    pub outlier_candidates: usize,
    pub duplicate_groups: usize,
    pub edge_list: PathBuf,
}

/// Graph stage: vocabulary, word sets, similarity graph, distribution
/// histogram and fit, anomaly reports, optional thresholded views.
pub fn run_graph(
    input: &Path,
    frequency_table: Option<&Path>,
    out_dir: &Path,
    config: &PipelineConfig,
) -> Result<GraphSummary> {
    ensure_out_dir(out_dir)?;
    let mut manifest = RunManifest::new("graph", config);
    manifest.add_input(input)?;

    let stage = Instant::now();
    let docs = load_documents(input)?;
    let table = match frequency_table {
        Some(path) => {
            manifest.add_input(path)?;
            io::read_frequency_table_tsv(path)?
        }
        None => index(&docs)?,
    };
    let policy = VocabularyPolicy {
        min_count: config.min_count,
        keep_percentile: config.keep_percentile,
    };
    let vocabulary = select_vocabulary(&table, &policy)?;
    let (corpus, stats) = build_corpus(&docs, &vocabulary, config.min_wordset_size)?;
    manifest.record_stage("corpus", stage);
    eprintln!(
        "{} blogs kept after filtering ({} dropped), vocabulary {} words",
        stats.kept,
        stats.dropped,
        vocabulary.len()
    );

    let vocab_path = out_dir.join("vocabulary.tsv");
    io::write_vocabulary_tsv(&vocab_path, &vocabulary)?;
    manifest.add_artifact(&vocab_path)?;

    let stage = Instant::now();
    let graph = build_graph(&corpus, config.store_threshold)?;
    manifest.record_stage("build_graph", stage);
    if graph.n_edges() == 0 {
        bail!(
            "no edges above threshold {} among {} documents",
            config.store_threshold,
            stats.kept
        );
    }
    eprintln!("similarity graph: {} edges", graph.n_edges());

    let edges_path = out_dir.join("edges.tsv");
    io::write_edge_list_tsv(&edges_path, &graph)?;
    manifest.add_artifact(&edges_path)?;
    let graphml_path = out_dir.join("graph.graphml");
    io::write_graphml(&graphml_path, &graph)?;
    manifest.add_artifact(&graphml_path)?;

    let stage = Instant::now();
    let hist = histogram(&graph, config.n_bins)?;
    let hist_path = out_dir.join("histogram.csv");
    io::write_histogram_csv(&hist_path, &hist)?;
    manifest.add_artifact(&hist_path)?;

    let fit_result: std::result::Result<PowerLawFit, blognet::Error> =
        fit_power_law(&hist, config.fit_region());
    let (fit, fit_error) = match fit_result {
        Ok(fit) => {
            let fit_path = out_dir.join("powerlaw.json");
            let mut text = serde_json::to_string_pretty(&fit)?;
            text.push('\n');
            std::fs::write(&fit_path, text)?;
            manifest.add_artifact(&fit_path)?;
            eprintln!(
                "log-log fit over {:?}: slope {:.3}, r^2 {:.3}",
                fit.fit_region, fit.slope, fit.r_squared
            );
            (Some(fit), None)
        }
        Err(e) => {
            eprintln!("similarity distribution fit unavailable: {e}");
            (None, Some(e.to_string()))
        }
    };

    let outliers = fit
        .as_ref()
        .map(|fit| {
            let policy = OutlierPolicy {
                k: config.outlier_k,
                n_bins: config.n_bins,
                ..OutlierPolicy::default()
            };
            detect_outliers(&graph, fit, &policy)
        })
        .unwrap_or_default();
    let duplicate_groups = detect_duplicates(&graph, config.dup_threshold);
    let report = AnomalyReport {
        outliers,
        duplicate_groups,
    };
    let anomalies_path = out_dir.join("anomalies.jsonl");
    io::write_anomalies_jsonl(&anomalies_path, &report)?;
    manifest.add_artifact(&anomalies_path)?;
    manifest.record_stage("distribution", stage);

    for &gamma in &config.view_gammas {
        let view = threshold_view(&graph, gamma)?;
        let view_edges = out_dir.join(format!("view_{gamma}.tsv"));
        io::write_edge_list_tsv(&view_edges, &view)?;
        manifest.add_artifact(&view_edges)?;
        let view_graphml = out_dir.join(format!("view_{gamma}.graphml"));
        io::write_graphml(&view_graphml, &view)?;
        manifest.add_artifact(&view_graphml)?;
        eprintln!(
            "view gamma {gamma}: {} vertices, {} edges",
            view.n_vertices(),
            view.n_edges()
        );
    }

    let summary = GraphSummary {
        documents_kept: stats.kept,
        documents_dropped: stats.dropped,
        vocabulary_size: vocabulary.len(),
        edges: graph.n_edges(),
        slope: fit.as_ref().map(|f| f.slope),
        r_squared: fit.as_ref().map(|f| f.r_squared),
        fit_error,
        outlier_candidates: report.outliers.candidates.len(),
        duplicate_groups: report.duplicate_groups.len(),
        edge_list: edges_path,
    };
    manifest.write(out_dir)?;
    Ok(summary)
}

#[derive(Debug, Serialize)]
pub struct ClusterStageSummary {
    pub gamma: f64,
    pub clustered: usize,
    pub unclustered: usize,
    pub n_clusters: usize,
    pub q: f64,
    pub sizes: Vec<usize>,
    pub partition: PathBuf,
}

/// Cluster stage: greedy modularity clustering of the gamma view.
pub fn run_cluster(
    edges: &Path,
    out_dir: &Path,
    config: &PipelineConfig,
) -> Result<ClusterStageSummary> {
    ensure_out_dir(out_dir)?;
    let mut manifest = RunManifest::new("cluster", config);
    manifest.add_input(edges)?;

    let stage = Instant::now();
    let graph = io::read_edge_list_tsv(edges, config.store_threshold)?;
    let view = threshold_view(&graph, config.gamma)?;
    if view.n_edges() == 0 {
        bail!(
            "view edgeless: no similarities at or above gamma {}",
            config.gamma
        );
    }
    let partition = greedy_cluster(&view)?;
    manifest.record_stage("cluster", stage);
    eprintln!(
        "gamma {} view: {} of {} vertices clustered into {} clusters, Q = {:.4}",
        config.gamma,
        partition.ids().len(),
        graph.n_vertices(),
        partition.n_clusters(),
        partition.q()
    );

    let partition_path = out_dir.join("partition.csv");
    io::write_partition_csv(&partition_path, &partition)?;
    manifest.add_artifact(&partition_path)?;
    let summary_path = out_dir.join("cluster_summary.json");
    io::write_cluster_summary_json(&summary_path, &partition)?;
    manifest.add_artifact(&summary_path)?;

    let summary = ClusterStageSummary {
        gamma: config.gamma,
        clustered: partition.ids().len(),
        unclustered: graph.n_vertices() - partition.ids().len(),
        n_clusters: partition.n_clusters(),
        q: partition.q(),
        sizes: partition.cluster_sizes(),
        partition: partition_path,
    };
    manifest.write(out_dir)?;
    Ok(summary)
}

#[derive(Debug, Serialize)]
pub struct HierarchySummary {
    pub leaves: usize,
    pub edges: usize,
    pub burn_in: u64,
    pub steps: u64,
    pub seed: u64,
    pub best_loglik: f64,
    pub newick: PathBuf,
}

/// Hierarchy stage: MCMC dendrogram fit of the binarized gamma view, or of
/// one cluster's subgraph when a partition and cluster id are given.
pub fn run_hierarchy(
    edges: &Path,
    partition: Option<(&Path, u32)>,
    out_dir: &Path,
    config: &PipelineConfig,
) -> Result<HierarchySummary> {
    ensure_out_dir(out_dir)?;
    let mut manifest = RunManifest::new("hierarchy", config);
    manifest.add_input(edges)?;

    let graph = io::read_edge_list_tsv(edges, config.store_threshold)?;
    let mut subgraph = binarize(&graph, config.gamma)?;
    if let Some((partition_path, cluster_id)) = partition {
        manifest.add_input(partition_path)?;
        let rows = io::read_partition_csv(partition_path)?;
        let members: BTreeSet<_> = rows
            .into_iter()
            .filter(|(_, label)| *label == cluster_id)
            .map(|(id, _)| id)
            .collect();
        if members.is_empty() {
            bail!(
                "cluster {cluster_id} has no members in {}",
                partition_path.display()
            );
        }
        subgraph = subgraph.induced(&members);
        eprintln!(
            "restricted to cluster {cluster_id}: {} vertices, {} edges",
            subgraph.n_vertices(),
            subgraph.n_edges()
        );
    }

    let n = subgraph.n_vertices();
    let (default_burn, default_steps) = default_budgets(n);
    let burn_in = config.hrg_burn_in.unwrap_or(default_burn);
    let steps = config.hrg_steps.unwrap_or(default_steps);

    let stage = Instant::now();
    let result = fit(&subgraph, steps, burn_in, config.seed)?;
    manifest.record_stage("mcmc", stage);
    eprintln!(
        "sampled {} steps ({} burn-in) over {} leaves: best log-likelihood {:.4}",
        steps, burn_in, n, result.best_loglik
    );

    let newick_path = out_dir.join("dendrogram.newick");
    io::write_newick(&newick_path, &result.best)?;
    manifest.add_artifact(&newick_path)?;
    let trace_path = out_dir.join("trace.csv");
    io::write_trace_csv(&trace_path, &result.trace)?;
    manifest.add_artifact(&trace_path)?;

    let summary = HierarchySummary {
        leaves: n,
        edges: subgraph.n_edges(),
        burn_in,
        steps,
        seed: config.seed,
        best_loglik: result.best_loglik,
        newick: newick_path,
    };
    manifest.write(out_dir)?;
    Ok(summary)
}

/// Synth stage spec file: the topic model plus optional duplicate planting.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSpecFile {
    pub n_topics: usize,
    pub blogs_per_topic: usize,
    pub shared_vocab_size: usize,
    pub topic_vocab_size: usize,
    pub zipf_exponent: f64,
    pub words_per_blog: usize,
    pub topic_purity: f64,
    pub seed: u64,
    #[serde(default)]
    pub duplicate_group_sizes: Vec<usize>,
    #[serde(default)]
    pub duplicate_mutation_rate: f64,
}

impl SynthSpecFile {
    fn model(&self) -> TopicModelSpec {
        TopicModelSpec {
            n_topics: self.n_topics,
            blogs_per_topic: self.blogs_per_topic,
            shared_vocab_size: self.shared_vocab_size,
            topic_vocab_size: self.topic_vocab_size,
            zipf_exponent: self.zipf_exponent,
            words_per_blog: self.words_per_blog,
            topic_purity: self.topic_purity,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct SynthSummary {
    pub documents: usize,
    pub planted_duplicate_groups: usize,
    pub expected_survivors: usize,
    pub corpus: PathBuf,
    pub ground_truth: PathBuf,
}

/// Synth stage: generates a corpus with ground truth under the configured
/// filter policy.
pub fn run_synth(
    spec_path: &Path,
    out_dir: &Path,
    config: &PipelineConfig,
) -> Result<SynthSummary> {
    ensure_out_dir(out_dir)?;
    let mut manifest = RunManifest::new("synth", config);
    manifest.add_input(spec_path)?;

    let text = std::fs::read_to_string(spec_path)
        .with_context(|| format!("failed to read spec {}", spec_path.display()))?;
    let spec: SynthSpecFile = toml::from_str(&text)
        .with_context(|| format!("invalid synth spec {}", spec_path.display()))?;

    let stage = Instant::now();
    let (docs, mut truth) = generate_corpus(&spec.model())?;
    let docs = if spec.duplicate_group_sizes.is_empty() {
        docs
    } else {
        let (extended, dup_truth) = inject_duplicates(
            &docs,
            &spec.duplicate_group_sizes,
            spec.duplicate_mutation_rate,
            spec.seed.wrapping_add(1),
        )?;
        truth.planted_duplicates = dup_truth.planted_duplicates;
        extended
    };
    truth.expected_survivors = Some(ExpectedSurvivors {
        min_count: config.min_count,
        keep_percentile: config.keep_percentile,
        min_wordset_size: config.min_wordset_size,
        ids: expected_survivors(
            &docs,
            config.min_count,
            config.keep_percentile,
            config.min_wordset_size,
        ),
    });
    manifest.record_stage("generate", stage);

    let corpus_path = out_dir.join("corpus.jsonl");
    io::write_corpus_jsonl(&corpus_path, &docs)?;
    manifest.add_artifact(&corpus_path)?;
    let truth_path = out_dir.join("ground_truth.json");
    io::write_ground_truth_json(&truth_path, &truth)?;
    manifest.add_artifact(&truth_path)?;
    eprintln!(
        "generated {} documents ({} planted duplicate groups)",
        docs.len(),
        truth.planted_duplicates.len()
    );

    let summary = SynthSummary {
        documents: docs.len(),
        planted_duplicate_groups: truth.planted_duplicates.len(),
        expected_survivors: truth
            .expected_survivors
            .as_ref()
            .map(|e| e.ids.len())
            .unwrap_or(0),
        corpus: corpus_path,
        ground_truth: truth_path,
    };
    manifest.write(out_dir)?;
    Ok(summary)
}
