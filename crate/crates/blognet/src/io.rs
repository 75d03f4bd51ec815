//! Artifact formats: corpus ingestion (plain-text directories and JSON
//! lines), TSV/CSV/GraphML/Newick/JSON-lines writers and the readers for
//! every artifact a later stage consumes. All output is UTF-8 with LF line
//! endings and deterministic ordering.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cluster::Partition;
use crate::corpus::{DocId, FrequencyTable, RawDocument, Vocabulary};
use crate::error::{Error, Result};
use crate::hrg::{parse_newick, Dendrogram};
use crate::simnet::{AnomalyReport, SimilarityGraph, SimilarityHistogram};
use crate::synth::GroundTruth;

fn read_error(path: &Path, source: std::io::Error) -> Error {
    Error::ReadFile {
        path: path.display().to_string(),
        source,
    }
}

/// Reads a corpus from either a directory of plain-text files (file stem =
/// document id) or a JSON-lines file with `id`/`text` records.
pub fn read_documents(path: &Path) -> Result<Vec<RawDocument>> {
    if path.is_dir() {
        read_documents_dir(path)
    } else {
        read_documents_jsonl(path)
    }
}

/// Directory ingestion: every regular file is one document, the file name
/// without its last extension is the id. Files sharing a stem are
/// concatenated in file-name order, separated by single spaces.
pub fn read_documents_dir(dir: &Path) -> Result<Vec<RawDocument>> {
    let mut names: Vec<std::path::PathBuf> = fs::read_dir(dir)
        .map_err(|e| read_error(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .collect();
    names.sort();

    let mut merged: BTreeMap<String, String> = BTreeMap::new();
    let mut order: Vec<String> = Vec::new();
    for path in names {
        let stem = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or_default()
            .to_owned();
        if stem.is_empty() {
            continue;
        }
        let text = fs::read_to_string(&path).map_err(|e| read_error(&path, e))?;
        match merged.get_mut(&stem) {
            Some(existing) => {
                existing.push(' ');
                existing.push_str(&text);
            }
            None => {
                merged.insert(stem.clone(), text);
                order.push(stem);
            }
        }
    }
    order
        .into_iter()
        .map(|stem| {
            let text = merged.remove(&stem).expect("collected above");
            RawDocument::new(stem, text)
        })
        .collect()
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonlRecord {
    id: String,
    text: String,
}

/// JSON-lines ingestion: one `{"id", "text"}` object per line. Records
/// sharing an id are concatenated in file order with a single space.
pub fn read_documents_jsonl(path: &Path) -> Result<Vec<RawDocument>> {
    let file = fs::File::open(path).map_err(|e| read_error(path, e))?;
    let reader = BufReader::new(file);
    let mut merged: BTreeMap<String, String> = BTreeMap::new();
    let mut order: Vec<String> = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| read_error(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: JsonlRecord =
            serde_json::from_str(&line).map_err(|e| Error::MalformedRecord {
                path: path.display().to_string(),
                line: lineno + 1,
                msg: e.to_string(),
            })?;
        if record.id.is_empty() {
            return Err(Error::MalformedRecord {
                path: path.display().to_string(),
                line: lineno + 1,
                msg: "empty id".to_owned(),
            });
        }
        match merged.get_mut(&record.id) {
            Some(existing) => {
                existing.push(' ');
                existing.push_str(&record.text);
            }
            None => {
                merged.insert(record.id.clone(), record.text);
                order.push(record.id);
            }
        }
    }
    order
        .into_iter()
        .map(|id| {
            let text = merged.remove(&id).expect("collected above");
            RawDocument::new(id, text)
        })
        .collect()
}

/// Writes documents as JSON lines, one record per document in input order.
pub fn write_corpus_jsonl(path: &Path, docs: &[RawDocument]) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    for doc in docs {
        let record = JsonlRecord {
            id: doc.id.to_string(),
            text: doc.text.clone(),
        };
        serde_json::to_writer(&mut out, &record).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// `word<TAB>count` rows sorted ascending by count then word.
pub fn write_frequency_table_tsv(path: &Path, table: &FrequencyTable) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    for (word, count) in table.sorted_entries() {
        writeln!(out, "{word}\t{count}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_frequency_table_tsv(path: &Path) -> Result<FrequencyTable> {
    let file = fs::File::open(path).map_err(|e| read_error(path, e))?;
    let reader = BufReader::new(file);
    let mut counts = std::collections::HashMap::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| read_error(path, e))?;
        if line.is_empty() {
            continue;
        }
        let malformed = |msg: &str| Error::MalformedRecord {
            path: path.display().to_string(),
            line: lineno + 1,
            msg: msg.to_owned(),
        };
        let (word, count) = line
            .split_once('\t')
            .ok_or_else(|| malformed("expected `word<TAB>count`"))?;
        let count: u64 = count
            .parse()
            .map_err(|_| malformed("count is not a number"))?;
        counts.insert(word.to_owned(), count);
    }
    Ok(FrequencyTable::from_counts(counts))
}

/// Vocabulary report: same shape and ordering as the frequency table.
pub fn write_vocabulary_tsv(path: &Path, vocabulary: &Vocabulary) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    for (word, count) in vocabulary.sorted_entries() {
        writeln!(out, "{word}\t{count}")?;
    }
    out.flush()?;
    Ok(())
}

/// Formats with the given number of significant digits, plain decimal.
pub(crate) fn format_significant(value: f64, digits: usize) -> String {
    if value == 0.0 || !value.is_finite() {
        return format!("{value}");
    }
    let magnitude = value.abs().log10().floor() as i32;
    let decimals = (digits as i32 - 1 - magnitude).max(0) as usize;
    format!("{value:.decimals$}")
}

/// Edge list rows `i<TAB>j<TAB>s`, ids in canonical order, weights at six
/// significant digits.
pub fn write_edge_list_tsv(path: &Path, graph: &SimilarityGraph) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    for &(i, j, s) in graph.edges() {
        writeln!(
            out,
            "{}\t{}\t{}",
            graph.id(i),
            graph.id(j),
            format_significant(s, 6)
        )?;
    }
    out.flush()?;
    Ok(())
}

/// Rebuilds a graph from an edge list. Vertices are the edge endpoints;
/// isolated vertices do not survive this format.
pub fn read_edge_list_tsv(path: &Path, store_threshold: f64) -> Result<SimilarityGraph> {
    let file = fs::File::open(path).map_err(|e| read_error(path, e))?;
    let reader = BufReader::new(file);
    let mut ids = Vec::new();
    let mut edges = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| read_error(path, e))?;
        if line.is_empty() {
            continue;
        }
        let malformed = |msg: String| Error::MalformedRecord {
            path: path.display().to_string(),
            line: lineno + 1,
            msg,
        };
        let mut fields = line.split('\t');
        let (i, j, s) = match (fields.next(), fields.next(), fields.next(), fields.next()) {
            (Some(i), Some(j), Some(s), None) => (i, j, s),
            _ => return Err(malformed("expected `i<TAB>j<TAB>s`".to_owned())),
        };
        let s: f64 = s
            .parse()
            .map_err(|_| malformed(format!("weight `{s}` is not a number")))?;
        let (i, j) = (DocId::new(i)?, DocId::new(j)?);
        ids.push(i.clone());
        ids.push(j.clone());
        edges.push((i, j, s));
    }
    SimilarityGraph::from_parts(ids, edges, store_threshold)
}

fn xml_escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
        .replace('\'', "&apos;")
}

/// GraphML export with the similarity as edge attribute `s`.
pub fn write_graphml(path: &Path, graph: &SimilarityGraph) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#)?;
    writeln!(
        out,
        r#"<graphml xmlns="http://graphml.graphdrawing.org/xmlns">"#
    )?;
    writeln!(
        out,
        r#"  <key id="s" for="edge" attr.name="s" attr.type="double"/>"#
    )?;
    writeln!(out, r#"  <graph id="G" edgedefault="undirected">"#)?;
    for id in graph.ids() {
        writeln!(out, r#"    <node id="{}"/>"#, xml_escape(id.as_str()))?;
    }
    for &(i, j, s) in graph.edges() {
        writeln!(
            out,
            r#"    <edge source="{}" target="{}"><data key="s">{}</data></edge>"#,
            xml_escape(graph.id(i).as_str()),
            xml_escape(graph.id(j).as_str()),
            format_significant(s, 6)
        )?;
    }
    writeln!(out, "  </graph>")?;
    writeln!(out, "</graphml>")?;
    out.flush()?;
    Ok(())
}

/// Histogram rows `bin_lo,bin_hi,count,density`, plot-ready.
pub fn write_histogram_csv(path: &Path, hist: &SimilarityHistogram) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    writeln!(out, "bin_lo,bin_hi,count,density")?;
    for bin in 0..hist.n_bins() {
        let (lo, hi) = hist.bin_bounds(bin);
        writeln!(
            out,
            "{lo},{hi},{},{}",
            hist.counts()[bin],
            hist.density(bin)
        )?;
    }
    out.flush()?;
    Ok(())
}

/// One JSON-lines record of the anomaly report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum AnomalyRecord {
    SplogCandidate {
        id: DocId,
        flagged_edges: usize,
    },
    DuplicateGroup {
        representative: DocId,
        members: Vec<DocId>,
    },
}

/// Anomaly report as JSON lines: one record per outlier vertex, one per
/// duplicate group.
pub fn write_anomalies_jsonl(path: &Path, report: &AnomalyReport) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    for (id, flagged) in &report.outliers.candidates {
        let record = AnomalyRecord::SplogCandidate {
            id: id.clone(),
            flagged_edges: *flagged,
        };
        serde_json::to_writer(&mut out, &record).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
    }
    for group in &report.duplicate_groups {
        let record = AnomalyRecord::DuplicateGroup {
            representative: group.representative.clone(),
            members: group.members.clone(),
        };
        serde_json::to_writer(&mut out, &record).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_anomalies_jsonl(path: &Path) -> Result<Vec<AnomalyRecord>> {
    let file = fs::File::open(path).map_err(|e| read_error(path, e))?;
    BufReader::new(file)
        .lines()
        .enumerate()
        .filter(|(_, line)| !matches!(line, Ok(l) if l.trim().is_empty()))
        .map(|(lineno, line)| {
            let line = line.map_err(|e| read_error(path, e))?;
            serde_json::from_str(&line).map_err(|e| Error::MalformedRecord {
                path: path.display().to_string(),
                line: lineno + 1,
                msg: e.to_string(),
            })
        })
        .collect()
}

fn csv_field(text: &str) -> String {
    if text.contains(',') || text.contains('"') || text.contains('\n') {
        format!("\"{}\"", text.replace('"', "\"\""))
    } else {
        text.to_owned()
    }
}

fn parse_csv_field(field: &str) -> String {
    let field = field.trim();
    if field.starts_with('"') && field.ends_with('"') && field.len() >= 2 {
        field[1..field.len() - 1].replace("\"\"", "\"")
    } else {
        field.to_owned()
    }
}

/// Partition rows `doc_id,cluster` sorted by document id.
pub fn write_partition_csv(path: &Path, partition: &Partition) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    writeln!(out, "doc_id,cluster")?;
    for (id, label) in partition.iter() {
        writeln!(out, "{},{label}", csv_field(id.as_str()))?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_partition_csv(path: &Path) -> Result<Vec<(DocId, u32)>> {
    let file = fs::File::open(path).map_err(|e| read_error(path, e))?;
    let mut rows = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| read_error(path, e))?;
        if lineno == 0 || line.is_empty() {
            continue;
        }
        let malformed = |msg: &str| Error::MalformedRecord {
            path: path.display().to_string(),
            line: lineno + 1,
            msg: msg.to_owned(),
        };
        let (id, label) = line
            .rsplit_once(',')
            .ok_or_else(|| malformed("expected `doc_id,cluster`"))?;
        let label: u32 = label
            .parse()
            .map_err(|_| malformed("cluster label is not an integer"))?;
        rows.push((DocId::new(parse_csv_field(id))?, label));
    }
    Ok(rows)
}

/// Cluster summary artifact: cluster count, modularity and sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSummary {
    pub n_clusters: usize,
    pub q: f64,
    pub sizes: Vec<usize>,
}

pub fn write_cluster_summary_json(path: &Path, partition: &Partition) -> Result<()> {
    let summary = ClusterSummary {
        n_clusters: partition.n_clusters(),
        q: partition.q(),
        sizes: partition.cluster_sizes(),
    };
    let mut text = serde_json::to_string_pretty(&summary).map_err(std::io::Error::from)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn write_newick(path: &Path, dendrogram: &Dendrogram) -> Result<()> {
    let mut text = crate::hrg::export_newick(dendrogram);
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn read_newick(path: &Path) -> Result<Dendrogram> {
    let text = fs::read_to_string(path).map_err(|e| read_error(path, e))?;
    parse_newick(text.trim_end())
}

/// Sampled chain trace rows `step,loglik`.
pub fn write_trace_csv(path: &Path, trace: &[(u64, f64)]) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    writeln!(out, "step,loglik")?;
    for (step, loglik) in trace {
        writeln!(out, "{step},{loglik}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_ground_truth_json(path: &Path, truth: &GroundTruth) -> Result<()> {
    let mut text = serde_json::to_string_pretty(truth).map_err(std::io::Error::from)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn read_ground_truth_json(path: &Path) -> Result<GroundTruth> {
    let text = fs::read_to_string(path).map_err(|e| read_error(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::MalformedRecord {
        path: path.display().to_string(),
        line: 0,
        msg: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::greedy_cluster;
    use crate::simnet::{build_graph, detect_duplicates, histogram, OutlierReport};
    use crate::synth::{generate_corpus, TopicModelSpec};
    use tempfile::tempdir;

    fn docid(s: &str) -> DocId {
        DocId::new(s).unwrap()
    }

    fn sample_graph() -> SimilarityGraph {
        SimilarityGraph::from_parts(
            vec![docid("alpha"), docid("beta"), docid("gamma")],
            vec![
                (docid("alpha"), docid("beta"), 0.5),
                (docid("beta"), docid("gamma"), 0.025),
            ],
            0.025,
        )
        .unwrap()
    }

    #[test]
    fn directory_ingestion_uses_stems_and_sorts() {
        let dir = tempdir().unwrap();
        fs::write(dir.path().join("b.txt"), "second doc").unwrap();
        fs::write(dir.path().join("a.txt"), "first doc").unwrap();
        let docs = read_documents_dir(dir.path()).unwrap();
        assert_eq!(docs.len(), 2);
        assert_eq!(docs[0].id.as_str(), "a");
        assert_eq!(docs[0].text, "first doc");
        assert_eq!(docs[1].id.as_str(), "b");
    }

    #[test]
    fn jsonl_round_trip_and_duplicate_merge() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("corpus.jsonl");
        fs::write(
            &path,
            concat!(
                "{\"id\":\"x\",\"text\":\"hello\"}\n",
                "{\"id\":\"y\",\"text\":\"there\"}\n",
                "{\"id\":\"x\",\"text\":\"again\"}\n",
            ),
        )
        .unwrap();
        let docs = read_documents_jsonl(&path).unwrap();
        assert_eq!(docs.len(), 2);
        assert_eq!(docs[0].id.as_str(), "x");
        assert_eq!(docs[0].text, "hello again");

        let out = dir.path().join("out.jsonl");
        write_corpus_jsonl(&out, &docs).unwrap();
        assert_eq!(read_documents_jsonl(&out).unwrap().len(), 2);
    }

    #[test]
    fn malformed_artifact_rows_carry_line_numbers() {
        let dir = tempdir().unwrap();

        let edges = dir.path().join("edges.tsv");
        fs::write(&edges, "a\tb\t0.5\nc\td\n").unwrap();
        match read_edge_list_tsv(&edges, 0.025).unwrap_err() {
            Error::MalformedRecord { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
        fs::write(&edges, "a\tb\tnotanumber\n").unwrap();
        assert!(matches!(
            read_edge_list_tsv(&edges, 0.025),
            Err(Error::MalformedRecord { line: 1, .. })
        ));

        let freq = dir.path().join("freq.tsv");
        fs::write(&freq, "word\tmany\n").unwrap();
        assert!(matches!(
            read_frequency_table_tsv(&freq),
            Err(Error::MalformedRecord { line: 1, .. })
        ));

        let partition = dir.path().join("partition.csv");
        fs::write(&partition, "doc_id,cluster\nblog-a,not-a-label\n").unwrap();
        assert!(matches!(
            read_partition_csv(&partition),
            Err(Error::MalformedRecord { line: 2, .. })
        ));
    }

    #[test]
    fn jsonl_parse_error_carries_line_number() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("bad.jsonl");
        fs::write(&path, "{\"id\":\"x\",\"text\":\"ok\"}\nnot json\n").unwrap();
        match read_documents_jsonl(&path).unwrap_err() {
            Error::MalformedRecord { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn frequency_table_round_trips() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("freq.tsv");
        let table = FrequencyTable::from_counts(
            [("zebra".to_owned(), 3u64), ("apa".to_owned(), 11)]
                .into_iter()
                .collect(),
        );
        write_frequency_table_tsv(&path, &table).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text, "zebra\t3\napa\t11\n");
        assert_eq!(read_frequency_table_tsv(&path).unwrap(), table);
    }

    #[test]
    fn edge_list_round_trips_at_six_digits() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("edges.tsv");
        let g = sample_graph();
        write_edge_list_tsv(&path, &g).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text, "alpha\tbeta\t0.500000\nbeta\tgamma\t0.0250000\n");
        let back = read_edge_list_tsv(&path, 0.025).unwrap();
        assert_eq!(back.n_edges(), 2);
        for (a, b) in back.edges().iter().zip(g.edges()) {
            assert!((a.2 - b.2).abs() < 1e-6);
        }
    }

    #[test]
    fn graphml_escapes_and_lists_everything() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("g.graphml");
        let g = SimilarityGraph::from_parts(
            vec![docid("a&b"), docid("c<d")],
            vec![(docid("a&b"), docid("c<d"), 0.5)],
            0.025,
        )
        .unwrap();
        write_graphml(&path, &g).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.contains(r#"<node id="a&amp;b"/>"#));
        assert!(text.contains(r#"source="a&amp;b" target="c&lt;d""#));
        assert!(text.contains(r#"<data key="s">0.500000</data>"#));
    }

    #[test]
    fn histogram_csv_has_header_and_rows() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("hist.csv");
        let g = sample_graph();
        let h = histogram(&g, 4).unwrap();
        write_histogram_csv(&path, &h).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "bin_lo,bin_hi,count,density");
        assert_eq!(lines.len(), 5);
    }

    #[test]
    fn anomaly_records_round_trip() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("anomalies.jsonl");
        let g = sample_graph();
        let report = AnomalyReport {
            outliers: OutlierReport {
                flagged_edges: vec![(docid("alpha"), docid("beta"), 0.5)],
                candidates: vec![(docid("alpha"), 1), (docid("beta"), 1)],
            },
            duplicate_groups: detect_duplicates(&g, 0.4),
        };
        write_anomalies_jsonl(&path, &report).unwrap();
        let records = read_anomalies_jsonl(&path).unwrap();
        assert_eq!(records.len(), 3);
        assert!(matches!(records[0], AnomalyRecord::SplogCandidate { .. }));
        assert!(matches!(records[2], AnomalyRecord::DuplicateGroup { .. }));
    }

    #[test]
    fn partition_csv_round_trips_with_quoting() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("partition.csv");
        let g = SimilarityGraph::from_parts(
            vec![docid("plain"), docid("with,comma")],
            vec![(docid("plain"), docid("with,comma"), 0.9)],
            0.025,
        )
        .unwrap();
        let p = greedy_cluster(&g).unwrap();
        write_partition_csv(&path, &p).unwrap();
        let rows = read_partition_csv(&path).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[1].0.as_str(), "with,comma");
    }

    #[test]
    fn newick_file_round_trips() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("tree.nwk");
        let d = Dendrogram::balanced(vec![docid("a"), docid("b"), docid("c")]);
        write_newick(&path, &d).unwrap();
        let back = read_newick(&path).unwrap();
        assert_eq!(back.signature(), d.signature());
    }

    #[test]
    fn ground_truth_round_trips() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("truth.json");
        let (_, truth) = generate_corpus(&TopicModelSpec {
            n_topics: 2,
            blogs_per_topic: 3,
            shared_vocab_size: 50,
            topic_vocab_size: 50,
            zipf_exponent: 1.0,
            words_per_blog: 30,
            topic_purity: 0.5,
            seed: 1,
        })
        .unwrap();
        write_ground_truth_json(&path, &truth).unwrap();
        assert_eq!(read_ground_truth_json(&path).unwrap(), truth);
    }

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(format_significant(0.025, 6), "0.0250000");
        assert_eq!(format_significant(1.0, 6), "1.00000");
        assert_eq!(format_significant(0.123456789, 6), "0.123457");
        assert_eq!(format_significant(0.0, 6), "0");
    }

    #[test]
    fn pipeline_stage_artifacts_feed_each_other() {
        // graph -> edge list -> cluster stage reader
        let dir = tempdir().unwrap();
        let (docs, _) = generate_corpus(&TopicModelSpec {
            n_topics: 2,
            blogs_per_topic: 8,
            shared_vocab_size: 120,
            topic_vocab_size: 80,
            zipf_exponent: 1.0,
            words_per_blog: 60,
            topic_purity: 0.8,
            seed: 3,
        })
        .unwrap();
        let table = crate::corpus::index(&docs).unwrap();
        let vocab = crate::corpus::select_vocabulary(
            &table,
            &crate::corpus::VocabularyPolicy {
                min_count: 1,
                keep_percentile: 100.0,
            },
        )
        .unwrap();
        let (corpus, _) = crate::corpus::build_corpus(&docs, &vocab, 5).unwrap();
        let g = build_graph(&corpus, 0.025).unwrap();
        assert!(g.n_edges() > 0);

        let edges_path = dir.path().join("edges.tsv");
        write_edge_list_tsv(&edges_path, &g).unwrap();
        let re_read = read_edge_list_tsv(&edges_path, 0.025).unwrap();
        let p = greedy_cluster(&re_read).unwrap();
        let part_path = dir.path().join("partition.csv");
        write_partition_csv(&part_path, &p).unwrap();
        let rows = read_partition_csv(&part_path).unwrap();
        assert_eq!(rows.len(), p.ids().len());
    }
}
