use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use hyperlit_core::alien::{beta_grid, record_sentences, sweep, write_sweep, AlienSignals, FusionConfig, InfiniteSpd};
use hyperlit_core::corpus::{
    derive_discoverers, load_corpus, load_ground_truth, load_theoretical_scores, write_corpus, write_ground_truth,
    CorpusStore, CorpusView, GroundTruthSet,
};
use hyperlit_core::embedding::{train_sgns, TrainConfig, VectorTable};
use hyperlit_core::evaluate::{
    beta_conditionals, density_discovery_correlation, discoverer_precision, joint_complementarity,
    plausibility_transform, precision, precision_timeline, write_report, BetaSweep, ReportRow,
};
use hyperlit_core::hypergraph::Hypergraph;
use hyperlit_core::predict::{candidate_pool, rank_discoverers, rank_discoverers_for_material, rank_discoveries, Metric, MetricSource, RankedPredictions};
use hyperlit_core::sequences::SequenceCorpus;
use hyperlit_core::stats::spearman_test;
use hyperlit_core::synth::{generate_planted, PlantedConfig};
use hyperlit_core::token::{namespaced, Kind};
use hyperlit_core::walker::{sample_walks, strip_authors, WalkConfig};
use hyperlit_core::Error;

use crate::args::*;
use crate::output::{stage, write_atomic};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Flags that parse but do not fit together.
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Run(#[from] Error),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Files a command wrote (the first is the primary output) and read.
pub struct Outcome {
    pub outputs: Vec<PathBuf>,
    pub inputs: Vec<PathBuf>,
}

fn reader(path: &Path) -> hyperlit_core::Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| Error::io(path, e))
}

fn property(raw: &str) -> String {
    namespaced(Kind::Property, raw)
}

fn view<'a>(store: &'a CorpusStore, span: &WindowArgs) -> hyperlit_core::Result<CorpusView<'a>> {
    let end = match span.end {
        Some(e) => e,
        None => match store.period_span() {
            Some((_, last)) => last + 1,
            None => return Err(Error::Precondition("corpus is empty".into())),
        },
    };
    store.window(end, span.memory)
}

fn load_graph(path: &Path) -> hyperlit_core::Result<Hypergraph> {
    Hypergraph::read_snapshot(reader(path)?, path)
}

fn load_vectors(path: &Path) -> hyperlit_core::Result<VectorTable> {
    VectorTable::read_text(reader(path)?, path)
}

pub fn run(cmd: &Command, seed: u64) -> CliResult<Outcome> {
    match cmd {
        Command::Synth(a) => synth(a, seed),
        Command::Build(a) => build(a),
        Command::Walk(a) => walk(a, seed),
        Command::Embed(a) => embed(a, seed),
        Command::Predict(a) => predict(a),
        Command::Discoverers(a) => discoverers(a),
        Command::Alien(a) => alien(a),
        Command::Eval(a) => eval(a),
    }
}

fn synth(a: &SynthArgs, seed: u64) -> CliResult<Outcome> {
    let cfg = PlantedConfig {
        communities: a.communities,
        authors_per_community: a.authors,
        materials_per_community: a.materials,
        papers_per_period: a.papers,
        start_period: a.start,
        periods: a.periods,
        planted_pairs: a.planted,
        reveal_periods: a.reveal.clone(),
        overlap_rate: a.overlap,
        material_mixing: a.mixing,
        property_papers: a.property_papers,
        seed,
    };
    let (store, truth) = generate_planted(&cfg)?;
    let corpus = stage(&a.corpus, |w| write_corpus(&store, w))?;
    let gt = stage(&a.truth, |w| write_ground_truth(std::slice::from_ref(&truth), true, w))?;
    corpus.commit()?;
    gt.commit()?;
    Ok(Outcome { outputs: vec![a.corpus.clone(), a.truth.clone()], inputs: vec![] })
}

fn build(a: &BuildArgs) -> CliResult<Outcome> {
    let store = load_corpus(&a.corpus)?;
    let g = Hypergraph::build(&view(&store, &a.span)?);
    write_atomic(&a.out, |w| g.write_snapshot(w))?;
    Ok(Outcome { outputs: vec![a.out.clone()], inputs: vec![a.corpus.clone()] })
}

fn walk(a: &WalkArgs, seed: u64) -> CliResult<Outcome> {
    let g = load_graph(&a.graph)?;
    let cfg = WalkConfig {
        sampling: a.sampling.alpha,
        walk_length: a.length,
        num_walks: a.walks,
        seed,
        lazy: a.sampling.lazy,
    };
    let walks = sample_walks(&g, &property(&a.property), &cfg)?;
    write_atomic(&a.out, |w| walks.write_lines(w))?;
    Ok(Outcome { outputs: vec![a.out.clone()], inputs: vec![a.graph.clone()] })
}

fn embed(a: &EmbedArgs, seed: u64) -> CliResult<Outcome> {
    let (sentences, input) = match (&a.walks, &a.corpus) {
        (Some(path), _) => {
            let walks = SequenceCorpus::read_lines(reader(path)?, path)?;
            let walks = if a.keep_authors { walks } else { strip_authors(&walks) };
            (walks, path.clone())
        }
        (None, Some(path)) => {
            let store = load_corpus(path)?;
            (record_sentences(&view(&store, &a.span)?), path.clone())
        }
        (None, None) => return Err(CliError::Usage("embed needs --walks or --corpus".into())),
    };
    let cfg = TrainConfig {
        dimension: a.dim,
        window: a.window,
        epochs: a.epochs,
        negatives: a.negatives,
        learning_rate: a.learning_rate,
        min_count: a.min_count,
        parallel: a.parallel,
        seed,
        ..TrainConfig::default()
    };
    let table = train_sgns(&sentences, &cfg)?;
    write_atomic(&a.out, |w| table.write_text(w))?;
    Ok(Outcome { outputs: vec![a.out.clone()], inputs: vec![input] })
}

fn window_fields(v: &CorpusView<'_>) -> Vec<(&'static str, String)> {
    vec![("end", v.end().to_string()), ("memory", (v.end() - v.start()).to_string())]
}

fn predict(a: &PredictArgs) -> CliResult<Outcome> {
    let store = load_corpus(&a.corpus)?;
    let v = view(&store, &a.span)?;
    let prop = property(&a.property);
    let pool = candidate_pool(&v, &prop);
    let metric = Metric::from(a.metric);
    let mut inputs = vec![a.corpus.clone()];
    let preds = match metric {
        Metric::DeepwalkCosine => {
            let path = a
                .vectors
                .as_ref()
                .ok_or_else(|| CliError::Usage("--metric deepwalk_cosine needs --vectors".into()))?;
            inputs.push(path.clone());
            let table = load_vectors(path)?;
            rank_discoveries(&prop, metric, MetricSource::Embedding(&table), &pool, a.k)?
        }
        Metric::Trans2 | Metric::Trans3 => {
            let g = match &a.graph {
                Some(path) => {
                    inputs.push(path.clone());
                    load_graph(path)?
                }
                None => Hypergraph::build(&v),
            };
            let source = MetricSource::Graph { graph: &g, sampling: a.sampling.alpha, lazy: a.sampling.lazy };
            rank_discoveries(&prop, metric, source, &pool, a.k)?
        }
    };
    write_atomic(&a.out, |w| preds.write_tsv(&window_fields(&v), w))?;
    Ok(Outcome { outputs: vec![a.out.clone()], inputs })
}

fn discoverers(a: &DiscoverersArgs) -> CliResult<Outcome> {
    let prop = property(&a.property);
    let mut inputs = Vec::new();
    let mut extra = Vec::new();
    let preds = if let Some(material) = &a.material {
        let path = a.vectors.as_ref().ok_or_else(|| CliError::Usage("--material needs --vectors".into()))?;
        inputs.push(path.clone());
        let table = load_vectors(path)?;
        rank_discoverers_for_material(&table, &prop, &namespaced(Kind::Material, material), a.k)?
    } else {
        let g = match (&a.graph, &a.corpus) {
            (Some(path), _) => {
                inputs.push(path.clone());
                load_graph(path)?
            }
            (None, Some(path)) => {
                inputs.push(path.clone());
                let store = load_corpus(path)?;
                let v = view(&store, &a.span)?;
                extra = window_fields(&v);
                Hypergraph::build(&v)
            }
            (None, None) => return Err(CliError::Usage("discoverers needs --graph, --corpus or --material".into())),
        };
        rank_discoverers(&g, &prop, a.k, a.sampling.alpha, a.sampling.lazy)?
    };
    write_atomic(&a.out, |w| preds.write_tsv(&extra, w))?;
    Ok(Outcome { outputs: vec![a.out.clone()], inputs })
}

fn parse_grid(text: &str) -> CliResult<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    let [lo, hi, step] = parts[..] else {
        return Err(CliError::Usage(format!("--grid must be lo:hi:step, got {text:?}")));
    };
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| CliError::Usage(format!("bad number {s:?} in --grid")));
    Ok(beta_grid(num(lo)?, num(hi)?, num(step)?)?)
}

fn alien(a: &AlienArgs) -> CliResult<Outcome> {
    let store = load_corpus(&a.corpus)?;
    let v = view(&store, &a.span)?;
    let prop = property(&a.property);
    let pool = candidate_pool(&v, &prop);
    let mut inputs = vec![a.corpus.clone(), a.vectors.clone()];
    let g = match &a.graph {
        Some(path) => {
            inputs.push(path.clone());
            load_graph(path)?
        }
        None => Hypergraph::build(&v),
    };
    let table = load_vectors(&a.vectors)?;
    let grid = if a.betas.is_empty() { parse_grid(&a.grid)? } else { a.betas.clone() };
    let cfg = FusionConfig {
        k: a.k,
        infinite_spd: match a.infinite_spd {
            InfiniteSpdArg::Top => InfiniteSpd::TopBlock,
            InfiniteSpdArg::Exclude => InfiniteSpd::Exclude,
        },
        ..FusionConfig::default()
    };
    cfg.validate()?;
    let signals = AlienSignals::compute(&g, &table, &prop, &pool, &cfg)?;
    let results = sweep(&signals, &grid, a.k)?;
    write_atomic(&a.out, |w| write_sweep(&signals, &results, &window_fields(&v), w))?;
    Ok(Outcome { outputs: vec![a.out.clone()], inputs })
}

fn load_truth(path: &Path) -> hyperlit_core::Result<Vec<GroundTruthSet>> {
    let mut first = String::new();
    reader(path)?.read_line(&mut first).map_err(|e| Error::io(path, e))?;
    load_ground_truth(path, first.starts_with("property\t"))
}

fn truth_for(sets: &[GroundTruthSet], prop: &str, from: i64) -> GroundTruthSet {
    let mut out = GroundTruthSet::new(prop);
    if let Some(set) = sets.iter().find(|s| s.property == prop) {
        out.discoveries = set.discoveries.iter().filter(|(_, &p)| p >= from).map(|(m, &p)| (m.clone(), p)).collect();
    }
    out
}

fn start_period(flag: Option<i64>, fields: &std::collections::BTreeMap<String, String>, origin: &Path) -> CliResult<i64> {
    if let Some(f) = flag {
        return Ok(f);
    }
    fields
        .get("end")
        .and_then(|e| e.parse().ok())
        .ok_or_else(|| CliError::Usage(format!("{} records no end period; pass --from", origin.display())))
}

fn eval(a: &EvalArgs) -> CliResult<Outcome> {
    let sets = load_truth(&a.truth)?;
    let mut inputs = vec![a.truth.clone()];
    let mut rows = Vec::new();
    let mut seen_from = a.from;
    let corpus = match &a.corpus {
        Some(path) => {
            inputs.push(path.clone());
            Some(load_corpus(path)?)
        }
        None => None,
    };

    for path in &a.predictions {
        inputs.push(path.clone());
        let (preds, fields) = RankedPredictions::read_tsv(reader(path)?, path)?;
        let from = start_period(a.from, &fields, path)?;
        seen_from.get_or_insert(from);
        let truth = truth_for(&sets, &preds.property, from);
        prediction_rows(&preds, &truth, from, &mut rows)?;
    }

    if let Some(path) = &a.sweep {
        inputs.push(path.clone());
        let (pairs, fields) = hyperlit_core::alien::read_sweep(reader(path)?, path)?;
        let from = start_period(a.from, &fields, path)?;
        seen_from.get_or_insert(from);
        let prop = fields.get("property").cloned().unwrap_or_default();
        let truth = truth_for(&sets, &prop, from);
        let sw = BetaSweep::new(pairs)?;
        let prec = sw.precisions(&truth);
        for (&b, &p) in sw.grid.iter().zip(&prec) {
            rows.push(ReportRow::at_beta(&prop, "alien:precision", b, p));
        }
        match spearman_test(&sw.grid, &prec) {
            Ok((rho, p)) => {
                rows.push(ReportRow::new(&prop, "alien:spearman_rho", "-", rho));
                rows.push(ReportRow::new(&prop, "alien:spearman_p", "-", p));
            }
            Err(e) => eprintln!("note: no β/precision correlation for {prop}: {e}"),
        }
        if let Some(theory) = &a.theory {
            inputs.push(theory.clone());
            let table = load_theoretical_scores(theory)?;
            let discovered: BTreeSet<String> = sets
                .iter()
                .find(|s| s.property == prop)
                .map(|s| s.discoveries.keys().cloned().collect())
                .unwrap_or_default();
            let model = plausibility_transform(&table, &discovered)?;
            for (&b, &m) in sw.grid.iter().zip(&sw.plausible_masses(&model)) {
                rows.push(ReportRow::at_beta(&prop, "alien:plausible_mass", b, m));
            }
            for (b, v) in joint_complementarity(&sw, &truth, &model) {
                rows.push(ReportRow::at_beta(&prop, "alien:joint", b, v));
            }
            match beta_conditionals(&sw, &truth, &model) {
                Ok(c) => {
                    rows.push(ReportRow::new(&prop, "alien:mean_beta_discoverable", "-", c.mean_discoverable));
                    rows.push(ReportRow::new(&prop, "alien:mean_beta_plausible", "-", c.mean_plausible));
                    rows.push(ReportRow::new(&prop, "alien:expectation_gap", "-", c.gap));
                }
                Err(e) => eprintln!("note: no β conditionals for {prop}: {e}"),
            }
        }
    }

    if let Some(path) = &a.discoverers {
        inputs.push(path.clone());
        let store = corpus.as_ref().ok_or_else(|| CliError::Usage("--discoverers needs --corpus".into()))?;
        let (preds, fields) = RankedPredictions::read_tsv(reader(path)?, path)?;
        let from = start_period(a.from, &fields, path)?;
        seen_from.get_or_insert(from);
        let truth = truth_for(&sets, &preds.property, from);
        let found = derive_discoverers(store, &truth);
        let periods: Vec<i64> = truth.discoveries.values().copied().collect::<BTreeSet<_>>().into_iter().collect();
        let (per_period, total) = discoverer_precision(&preds, &found, &periods)?;
        for (t, p) in periods.iter().zip(per_period) {
            rows.push(ReportRow::new(&preds.property, "discoverers:precision", t, p));
        }
        rows.push(ReportRow::new(&preds.property, "discoverers:precision", "-", total));
    }

    if a.density {
        let store = corpus.as_ref().ok_or_else(|| CliError::Usage("--density needs --corpus".into()))?;
        let from = seen_from.ok_or_else(|| CliError::Usage("--density needs --from or an input with an end period".into()))?;
        let v = store.window(from, a.memory)?;
        for set in &sets {
            let truth = truth_for(&sets, &set.property, from);
            match density_discovery_correlation(&v, &set.property, &truth) {
                Ok((rho, p)) => {
                    rows.push(ReportRow::new(&set.property, "density:spearman_rho", "-", rho));
                    rows.push(ReportRow::new(&set.property, "density:spearman_p", "-", p));
                }
                Err(e) => eprintln!("note: skipping density for {}: {e}", set.property),
            }
        }
    }

    write_atomic(&a.out, |w| write_report(&rows, w))?;
    Ok(Outcome { outputs: vec![a.out.clone()], inputs })
}

fn prediction_rows(
    preds: &RankedPredictions,
    truth: &GroundTruthSet,
    from: i64,
    rows: &mut Vec<ReportRow>,
) -> CliResult<()> {
    let metric = &preds.metric;
    rows.push(ReportRow::new(&preds.property, &format!("{metric}:precision"), "-", precision(preds, truth)?));
    if let Some(&last) = truth.discoveries.values().max() {
        let periods: Vec<i64> = (from..=last).collect();
        for (t, p) in periods.iter().zip(precision_timeline(preds, truth, &periods)?) {
            rows.push(ReportRow::new(&preds.property, &format!("{metric}:cumulative_precision"), t, p));
        }
    }
    Ok(())
}
