use std::io::BufReader;
use std::path::Path;

use hyperlit_core::alien::{default_beta_grid, read_sweep, record_sentences, sweep, write_sweep, AlienSignals, FusionConfig};
use hyperlit_core::corpus::{load_corpus, load_ground_truth, write_corpus, write_ground_truth};
use hyperlit_core::embedding::{train_sgns, TrainConfig, VectorTable};
use hyperlit_core::hypergraph::Hypergraph;
use hyperlit_core::predict::{candidate_pool, rank_discoveries, Metric, MetricSource, RankedPredictions};
use hyperlit_core::sequences::SequenceCorpus;
use hyperlit_core::synth::{generate_planted, PlantedConfig, TARGET_PROPERTY};
use hyperlit_core::walker::{sample_walks, strip_authors, WalkConfig};

fn bytes(f: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Vec<u8> {
    let mut buf = Vec::new();
    f(&mut buf).unwrap();
    buf
}

#[test]
fn every_artifact_survives_a_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = PlantedConfig { seed: 3, ..PlantedConfig::default() };
    let (store, truth) = generate_planted(&cfg).unwrap();

    let corpus_path = dir.path().join("corpus.jsonl");
    std::fs::write(&corpus_path, bytes(|w| write_corpus(&store, w))).unwrap();
    let reloaded = load_corpus(&corpus_path).unwrap();
    assert_eq!(reloaded.records(), store.records());

    let truth_path = dir.path().join("truth.tsv");
    std::fs::write(&truth_path, bytes(|w| write_ground_truth(std::slice::from_ref(&truth), true, w))).unwrap();
    assert_eq!(load_ground_truth(&truth_path, true).unwrap(), vec![truth.clone()]);

    let view = store.window(cfg.prediction_period(), 5).unwrap();
    let g = Hypergraph::build(&view);
    let snap = bytes(|w| g.write_snapshot(w));
    let g2 = Hypergraph::read_snapshot(BufReader::new(&snap[..]), Path::new("snap")).unwrap();
    assert_eq!(bytes(|w| g2.write_snapshot(w)), snap);

    let walks = sample_walks(&g, TARGET_PROPERTY, &WalkConfig { num_walks: 300, ..WalkConfig::default() }).unwrap();
    let text = bytes(|w| walks.write_lines(w));
    let walks2 = SequenceCorpus::read_lines(BufReader::new(&text[..]), Path::new("walks")).unwrap();
    assert_eq!(walks2.iter().collect::<Vec<_>>(), walks.iter().collect::<Vec<_>>());

    let train = TrainConfig { dimension: 16, ..TrainConfig::default() };
    let table = train_sgns(&strip_authors(&walks), &train).unwrap();
    let vec_text = bytes(|w| table.write_text(w));
    let table2 = VectorTable::read_text(BufReader::new(&vec_text[..]), Path::new("vectors")).unwrap();
    assert_eq!(table2.tokens(), table.tokens());
    for t in table.tokens() {
        for (a, b) in table.get(t).unwrap().iter().zip(table2.get(t).unwrap()) {
            assert_eq!(a, b, "{t}");
        }
    }

    let pool = candidate_pool(&view, TARGET_PROPERTY);
    let preds = rank_discoveries(TARGET_PROPERTY, Metric::DeepwalkCosine, MetricSource::Embedding(&table), &pool, 10).unwrap();
    let tsv = bytes(|w| preds.write_tsv(&[("end", "2007".into())], w));
    let (preds2, fields) = RankedPredictions::read_tsv(BufReader::new(&tsv[..]), Path::new("p")).unwrap();
    assert_eq!(preds2, preds);
    assert_eq!(fields["end"], "2007");

    let plaus = train_sgns(&record_sentences(&view), &train).unwrap();
    let signals = AlienSignals::compute(&g, &plaus, TARGET_PROPERTY, &pool, &FusionConfig::default()).unwrap();
    let results = sweep(&signals, &default_beta_grid(), 10).unwrap();
    let sw = bytes(|w| write_sweep(&signals, &results, &[], w));
    let (results2, _) = read_sweep(BufReader::new(&sw[..]), Path::new("s")).unwrap();
    assert_eq!(results2, results);
}
