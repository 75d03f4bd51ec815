//! Benchmarks for the two data-parallel hot paths, comparing the sequential
//! implementation with the rayon one (when the `parallel` feature is on).

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use blognet::corpus::{build_corpus, index_serial, select_vocabulary, VocabularyPolicy};
use blognet::simnet::build_graph_serial;
use blognet::synth::{generate_corpus, TopicModelSpec};

fn bench_spec(n_blogs: usize) -> TopicModelSpec {
    TopicModelSpec {
        n_topics: 4,
        blogs_per_topic: n_blogs / 4,
        shared_vocab_size: 4000,
        topic_vocab_size: 1500,
        zipf_exponent: 1.0,
        words_per_blog: 400,
        topic_purity: 0.6,
        seed: 99,
    }
}

fn bench_index(c: &mut Criterion) {
    let mut group = c.benchmark_group("index");
    group.sample_size(10);
    for n_blogs in [500usize, 1000] {
        let (docs, _) = generate_corpus(&bench_spec(n_blogs)).unwrap();
        group.bench_with_input(BenchmarkId::new("serial", n_blogs), &docs, |b, docs| {
            b.iter(|| index_serial(docs).unwrap())
        });
        #[cfg(feature = "parallel")]
        group.bench_with_input(BenchmarkId::new("parallel", n_blogs), &docs, |b, docs| {
            b.iter(|| blognet::corpus::index_parallel(docs).unwrap())
        });
    }
    group.finish();
}

fn bench_build_graph(c: &mut Criterion) {
    let mut group = c.benchmark_group("build_graph");
    group.sample_size(10);
    for n_blogs in [500usize, 1000] {
        let (docs, _) = generate_corpus(&bench_spec(n_blogs)).unwrap();
        let table = index_serial(&docs).unwrap();
        let vocab = select_vocabulary(
            &table,
            &VocabularyPolicy {
                min_count: 3,
                keep_percentile: 40.0,
            },
        )
        .unwrap();
        let (corpus, _) = build_corpus(&docs, &vocab, 10).unwrap();
        group.bench_with_input(BenchmarkId::new("serial", n_blogs), &corpus, |b, corpus| {
            b.iter(|| build_graph_serial(corpus, 0.025).unwrap())
        });
        #[cfg(feature = "parallel")]
        group.bench_with_input(
            BenchmarkId::new("parallel", n_blogs),
            &corpus,
            |b, corpus| b.iter(|| blognet::simnet::build_graph_parallel(corpus, 0.025).unwrap()),
        );
    }
    group.finish();
}

criterion_group!(benches, bench_index, bench_build_graph);
criterion_main!(benches);
