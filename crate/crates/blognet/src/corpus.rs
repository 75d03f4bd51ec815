//! Corpus ingestion: tokenization, word-frequency statistics, vocabulary
//! selection by frequency percentile, and reduction of documents to filtered
//! word sets.
//!
//! The vocabulary filter keeps the rarest words above a minimum count: very
//! common words carry little similarity information while hapax-level words
//! are mostly typos, so the retained band is the low-frequency tail of the
//! words that occur at least `min_count` times.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use unicode_segmentation::UnicodeSegmentation;

use crate::error::{Error, Result};

/// Stable document identifier, unique within a corpus (a blog URL or a
/// synthetic label).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DocId(String);

impl DocId {
    pub fn new(id: impl Into<String>) -> Result<Self> {
        let id = id.into();
        if id.is_empty() {
            return Err(Error::EmptyDocumentId);
        }
        Ok(DocId(id))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for DocId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A raw input document: all text of one blog, posts concatenated.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawDocument {
    pub id: DocId,
    pub text: String,
}

impl RawDocument {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Result<Self> {
        Ok(RawDocument {
            id: DocId::new(id)?,
            text: text.into(),
        })
    }
}

/// Splits text into lowercased word tokens.
///
/// Segmentation follows the Unicode word-boundary rules, tokens are
/// case-folded with `str::to_lowercase`, and tokens without a single
/// alphabetic character (numbers, punctuation runs) are dropped. No stemming
/// and no stop-word lists.
pub fn tokenize(text: &str) -> Vec<String> {
    text.unicode_words()
        .filter(|w| w.chars().any(char::is_alphabetic))
        .map(str::to_lowercase)
        .collect()
}

/// Corpus-wide word occurrence counts (tokens, not documents).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FrequencyTable {
    counts: HashMap<String, u64>,
    total_tokens: u64,
}

impl FrequencyTable {
    pub fn from_counts(counts: HashMap<String, u64>) -> Self {
        let total_tokens = counts.values().sum();
        FrequencyTable {
            counts,
            total_tokens,
        }
    }

    pub fn count(&self, word: &str) -> u64 {
        self.counts.get(word).copied().unwrap_or(0)
    }

    pub fn counts(&self) -> &HashMap<String, u64> {
        &self.counts
    }

    pub fn distinct_words(&self) -> usize {
        self.counts.len()
    }

    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Entries sorted ascending by count, ties by word. This is the canonical
    /// order for reports and for the percentile cut.
    pub fn sorted_entries(&self) -> Vec<(&str, u64)> {
        let mut entries: Vec<(&str, u64)> =
            self.counts.iter().map(|(w, &c)| (w.as_str(), c)).collect();
        entries.sort_unstable_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(b.0)));
        entries
    }
}

fn check_unique_ids(docs: &[RawDocument]) -> Result<()> {
    let mut seen = HashSet::with_capacity(docs.len());
    for doc in docs {
        if !seen.insert(doc.id.as_str()) {
            return Err(Error::DuplicateDocumentId(doc.id.as_str().to_owned()));
        }
    }
    Ok(())
}

fn count_tokens(doc: &RawDocument, counts: &mut HashMap<String, u64>) {
    for token in tokenize(&doc.text) {
        *counts.entry(token).or_insert(0) += 1;
    }
}

/// Builds the corpus-wide frequency table in a single pass over the
/// documents. Dispatches to the data-parallel implementation when the
/// `parallel` feature is enabled.
pub fn index(docs: &[RawDocument]) -> Result<FrequencyTable> {
    #[cfg(feature = "parallel")]
    {
        index_parallel(docs)
    }
    #[cfg(not(feature = "parallel"))]
    {
        index_serial(docs)
    }
}

/// Sequential reference implementation of [`index`].
pub fn index_serial(docs: &[RawDocument]) -> Result<FrequencyTable> {
    check_unique_ids(docs)?;
    let mut counts = HashMap::new();
    for doc in docs {
        count_tokens(doc, &mut counts);
    }
    Ok(FrequencyTable::from_counts(counts))
}

/// Data-parallel [`index`]: per-worker count maps merged by commutative
/// addition, so the result is independent of the partitioning.
#[cfg(feature = "parallel")]
pub fn index_parallel(docs: &[RawDocument]) -> Result<FrequencyTable> {
    use rayon::prelude::*;

    check_unique_ids(docs)?;
    let counts = docs
        .par_iter()
        .fold(HashMap::new, |mut counts, doc| {
            count_tokens(doc, &mut counts);
            counts
        })
        .reduce(HashMap::new, |a, b| {
            if a.len() < b.len() {
                return merge_counts(b, a);
            }
            merge_counts(a, b)
        });
    Ok(FrequencyTable::from_counts(counts))
}

#[cfg(feature = "parallel")]
fn merge_counts(
    mut into: HashMap<String, u64>,
    from: HashMap<String, u64>,
) -> HashMap<String, u64> {
    for (word, c) in from {
        *into.entry(word).or_insert(0) += c;
    }
    into
}

/// Vocabulary selection rule: drop words occurring fewer than `min_count`
/// times, then keep the lowest-frequency `keep_percentile` percent of the
/// surviving distinct words.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VocabularyPolicy {
    pub min_count: u64,
    /// In (0, 100]. The kept fraction is rounded up to a whole word count.
    pub keep_percentile: f64,
}

impl Default for VocabularyPolicy {
    fn default() -> Self {
        VocabularyPolicy {
            min_count: 10,
            keep_percentile: 5.0,
        }
    }
}

/// The retained word list with per-word corpus counts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocabulary {
    counts: BTreeMap<String, u64>,
}

impl Vocabulary {
    pub fn contains(&self, word: &str) -> bool {
        self.counts.contains_key(word)
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.counts.keys().map(String::as_str)
    }

    pub fn count(&self, word: &str) -> Option<u64> {
        self.counts.get(word).copied()
    }

    /// Entries sorted ascending by count, ties by word.
    pub fn sorted_entries(&self) -> Vec<(&str, u64)> {
        let mut entries: Vec<(&str, u64)> =
            self.counts.iter().map(|(w, &c)| (w.as_str(), c)).collect();
        entries.sort_unstable_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(b.0)));
        entries
    }
}

/// Applies the two-step vocabulary filter: a minimum-count cut followed by
/// the ascending-frequency percentile cut over the survivors. Ties at the
/// cut boundary break by lexicographic word order.
pub fn select_vocabulary(table: &FrequencyTable, policy: &VocabularyPolicy) -> Result<Vocabulary> {
    let mut survivors: Vec<(&str, u64)> = table
        .counts()
        .iter()
        .filter(|(_, &c)| c >= policy.min_count)
        .map(|(w, &c)| (w.as_str(), c))
        .collect();
    if survivors.is_empty() {
        return Err(Error::EmptyVocabulary);
    }
    survivors.sort_unstable_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(b.0)));

    // ceil(p/100 * n) computed as (p*n)/100 so integer percentiles stay exact
    let n = survivors.len();
    let keep = ((policy.keep_percentile * n as f64) / 100.0).ceil() as usize;
    let keep = keep.clamp(1, n);

    let counts = survivors
        .into_iter()
        .take(keep)
        .map(|(w, c)| (w.to_owned(), c))
        .collect();
    Ok(Vocabulary { counts })
}

/// The set of retained vocabulary words occurring in one document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordSet {
    pub id: DocId,
    pub words: BTreeSet<String>,
}

impl WordSet {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// Documents reduced to their filtered word sets, keyed by id.
///
/// Every stored word set has at least `min_wordset_size` vocabulary words;
/// smaller documents are dropped at construction.
#[derive(Debug, Clone)]
pub struct Corpus {
    word_sets: Vec<WordSet>,
    vocabulary: Vocabulary,
    min_wordset_size: usize,
}

/// Kept/dropped document counts from [`build_corpus`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CorpusStats {
    pub kept: usize,
    pub dropped: usize,
}

impl Corpus {
    pub fn len(&self) -> usize {
        self.word_sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word_sets.is_empty()
    }

    /// Word sets in ascending id order.
    pub fn word_sets(&self) -> &[WordSet] {
        &self.word_sets
    }

    pub fn get(&self, id: &DocId) -> Option<&WordSet> {
        self.word_sets
            .binary_search_by(|ws| ws.id.cmp(id))
            .ok()
            .map(|i| &self.word_sets[i])
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    pub fn min_wordset_size(&self) -> usize {
        self.min_wordset_size
    }
}

/// Reduces each document to its vocabulary word set and keeps those with at
/// least `min_wordset_size` words. A fully dropped corpus is valid.
pub fn build_corpus(
    docs: &[RawDocument],
    vocabulary: &Vocabulary,
    min_wordset_size: usize,
) -> Result<(Corpus, CorpusStats)> {
    check_unique_ids(docs)?;
    let mut word_sets = Vec::new();
    let mut dropped = 0usize;
    for doc in docs {
        let words: BTreeSet<String> = tokenize(&doc.text)
            .into_iter()
            .filter(|w| vocabulary.contains(w))
            .collect();
        if words.len() >= min_wordset_size {
            word_sets.push(WordSet {
                id: doc.id.clone(),
                words,
            });
        } else {
            dropped += 1;
        }
    }
    word_sets.sort_unstable_by(|a, b| a.id.cmp(&b.id));
    let stats = CorpusStats {
        kept: word_sets.len(),
        dropped,
    };
    Ok((
        Corpus {
            word_sets,
            vocabulary: vocabulary.clone(),
            min_wordset_size,
        },
        stats,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn doc(id: &str, text: &str) -> RawDocument {
        RawDocument::new(id, text).unwrap()
    }

    fn table(entries: &[(&str, u64)]) -> FrequencyTable {
        FrequencyTable::from_counts(entries.iter().map(|(w, c)| (w.to_string(), *c)).collect())
    }

    #[test]
    fn tokenize_empty_is_empty() {
        assert!(tokenize("").is_empty());
    }

    #[test]
    fn tokenize_lowercases_unicode() {
        assert_eq!(tokenize("Öl och ÖL!"), vec!["öl", "och", "öl"]);
    }

    #[test]
    fn tokenize_drops_letterless_tokens() {
        assert_eq!(tokenize("beer 2009 beer"), vec!["beer", "beer"]);
        assert_eq!(tokenize("... 42 --"), Vec::<String>::new());
    }

    #[test]
    fn tokenize_keeps_inflections() {
        // no stemming: inflected forms stay distinct
        assert_eq!(tokenize("bloggar bloggen"), vec!["bloggar", "bloggen"]);
    }

    #[test]
    fn index_counts_tokens() {
        let t = index(&[doc("d1", "a a b")]).unwrap();
        assert_eq!(t.count("a"), 2);
        assert_eq!(t.count("b"), 1);
        assert_eq!(t.total_tokens(), 3);

        let t = index(&[doc("d1", "a b"), doc("d2", "b c")]).unwrap();
        assert_eq!(t.count("a"), 1);
        assert_eq!(t.count("b"), 2);
        assert_eq!(t.count("c"), 1);
        assert_eq!(t.total_tokens(), 4);
    }

    #[test]
    fn index_rejects_duplicate_ids() {
        let err = index(&[doc("d1", "a"), doc("d1", "b")]).unwrap_err();
        match err {
            Error::DuplicateDocumentId(id) => assert_eq!(id, "d1"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[cfg(feature = "parallel")]
    #[test]
    fn index_parallel_matches_serial() {
        let docs: Vec<RawDocument> = (0..64)
            .map(|i| {
                doc(
                    &format!("d{i}"),
                    &format!("alpha beta w{} w{}", i % 7, i % 3),
                )
            })
            .collect();
        assert_eq!(index_parallel(&docs).unwrap(), index_serial(&docs).unwrap());
    }

    #[test]
    fn select_vocabulary_min_count_only() {
        let t = table(&[("a", 5), ("b", 12), ("c", 12), ("d", 40)]);
        let policy = VocabularyPolicy {
            min_count: 10,
            keep_percentile: 100.0,
        };
        let v = select_vocabulary(&t, &policy).unwrap();
        let words: Vec<&str> = v.words().collect();
        assert_eq!(words, vec!["b", "c", "d"]);
    }

    #[test]
    fn select_vocabulary_keeps_rarest_percentile() {
        // 200 survivors with distinct counts; 5% keeps exactly the 10 rarest
        let entries: Vec<(String, u64)> = (0..200)
            .map(|i| (format!("w{i:03}"), 10 + i as u64))
            .collect();
        let t = FrequencyTable::from_counts(entries.iter().cloned().collect());
        let policy = VocabularyPolicy {
            min_count: 10,
            keep_percentile: 5.0,
        };
        let v = select_vocabulary(&t, &policy).unwrap();
        assert_eq!(v.len(), 10);

        // brute-force oracle: sort everything, take the head
        let mut sorted = entries;
        sorted.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
        for (w, _) in &sorted[..10] {
            assert!(v.contains(w), "missing {w}");
        }
        for (w, _) in &sorted[10..] {
            assert!(!v.contains(w), "should not keep {w}");
        }
    }

    #[test]
    fn select_vocabulary_breaks_count_ties_lexicographically() {
        let t = table(&[("b", 10), ("a", 10), ("c", 10), ("d", 10)]);
        let policy = VocabularyPolicy {
            min_count: 10,
            keep_percentile: 50.0,
        };
        let v = select_vocabulary(&t, &policy).unwrap();
        let words: Vec<&str> = v.words().collect();
        assert_eq!(words, vec!["a", "b"]);
    }

    #[test]
    fn select_vocabulary_errors_when_all_below_min_count() {
        let t = table(&[("a", 3), ("b", 9)]);
        assert!(matches!(
            select_vocabulary(&t, &VocabularyPolicy::default()),
            Err(Error::EmptyVocabulary)
        ));
    }

    #[test]
    fn build_corpus_applies_inclusive_size_threshold() {
        let t = table(&[("x", 10), ("y", 10), ("z", 10)]);
        let vocab = select_vocabulary(
            &t,
            &VocabularyPolicy {
                min_count: 1,
                keep_percentile: 100.0,
            },
        )
        .unwrap();

        // no vocabulary words at all -> dropped even at min 1
        let (c, stats) = build_corpus(&[doc("d0", "q r s")], &vocab, 1).unwrap();
        assert!(c.is_empty());
        assert_eq!(
            stats,
            CorpusStats {
                kept: 0,
                dropped: 1
            }
        );

        // intersection {x, y} with min 2 -> kept (boundary inclusive)
        let (c, stats) = build_corpus(&[doc("d1", "x y q")], &vocab, 2).unwrap();
        assert_eq!(
            stats,
            CorpusStats {
                kept: 1,
                dropped: 0
            }
        );
        let ws = c.get(&DocId::new("d1").unwrap()).unwrap();
        let words: Vec<&str> = ws.words.iter().map(String::as_str).collect();
        assert_eq!(words, vec!["x", "y"]);
    }

    proptest! {
        #[test]
        fn tokenize_idempotent_under_lowercase(text in "[A-Za-zÅÄÖåäö0-9 .,!?-]{0,80}") {
            prop_assert_eq!(tokenize(&text), tokenize(&text.to_lowercase()));
        }

        #[test]
        fn index_is_permutation_invariant(
            texts in prop::collection::vec("[a-d ]{0,20}", 1..8),
            seed in 0u64..1000,
        ) {
            let docs: Vec<RawDocument> = texts
                .iter()
                .enumerate()
                .map(|(i, t)| doc(&format!("d{i}"), t))
                .collect();
            let mut shuffled = docs.clone();
            // cheap deterministic shuffle
            let n = shuffled.len();
            for i in (1..n).rev() {
                let j = (seed as usize).wrapping_mul(31).wrapping_add(i * 17) % (i + 1);
                shuffled.swap(i, j);
            }
            prop_assert_eq!(index(&docs).unwrap(), index(&shuffled).unwrap());
        }

        #[test]
        fn vocabulary_monotone_in_min_count(
            counts in prop::collection::btree_map("[a-z]{1,4}", 1u64..60, 1..40),
            min_count in 1u64..30,
        ) {
            let t = FrequencyTable::from_counts(counts.into_iter().collect());
            let lo = select_vocabulary(&t, &VocabularyPolicy { min_count, keep_percentile: 100.0 });
            let hi = select_vocabulary(&t, &VocabularyPolicy { min_count: min_count + 5, keep_percentile: 100.0 });
            if let (Ok(lo), Ok(hi)) = (lo, hi) {
                for w in hi.words() {
                    prop_assert!(lo.contains(w), "raising min_count added {}", w);
                }
            }
        }

        #[test]
        fn vocabulary_monotone_in_percentile(
            counts in prop::collection::btree_map("[a-z]{1,4}", 1u64..60, 1..40),
            pct in 1.0f64..95.0,
        ) {
            let t = FrequencyTable::from_counts(counts.into_iter().collect());
            let narrow = select_vocabulary(&t, &VocabularyPolicy { min_count: 1, keep_percentile: pct });
            let wide = select_vocabulary(&t, &VocabularyPolicy { min_count: 1, keep_percentile: (pct + 5.0).min(100.0) });
            if let (Ok(narrow), Ok(wide)) = (narrow, wide) {
                for w in narrow.words() {
                    prop_assert!(wide.contains(w), "raising percentile removed {}", w);
                }
            }
        }

        #[test]
        fn build_corpus_matches_per_document_filter(
            texts in prop::collection::vec("[a-f ]{0,30}", 1..50),
            min_size in 1usize..4,
        ) {
            let docs: Vec<RawDocument> = texts
                .iter()
                .enumerate()
                .map(|(i, t)| doc(&format!("d{i:02}"), t))
                .collect();
            let t = index(&docs).unwrap();
            let vocab = match select_vocabulary(
                &t,
                &VocabularyPolicy { min_count: 1, keep_percentile: 100.0 },
            ) {
                Ok(v) => v,
                Err(_) => return Ok(()),
            };
            let (corpus, stats) = build_corpus(&docs, &vocab, min_size).unwrap();
            prop_assert_eq!(stats.kept + stats.dropped, docs.len());
            for d in &docs {
                let distinct: BTreeSet<String> = tokenize(&d.text)
                    .into_iter()
                    .filter(|w| vocab.contains(w))
                    .collect();
                let kept = corpus.get(&d.id);
                if distinct.len() >= min_size {
                    let ws = kept.expect("document should have been kept");
                    prop_assert_eq!(&ws.words, &distinct);
                } else {
                    prop_assert!(kept.is_none(), "document should have been dropped");
                }
            }
        }
    }
}
