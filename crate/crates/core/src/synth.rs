//! Planted synthetic literatures and brute-force oracles.
//!
//! The planted generator builds a chain of communities. Community 0 owns the
//! target property; each later community shares a few authors with the one
//! before it, so concepts grow more distant along the chain. Future
//! discoveries are community-1 materials carried by the authors it shares
//! with community 0. The oracles enumerate every
//! walk path on small graphs.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::alien::{record_sentences, sweep, AlienSignals, FusionConfig};
use crate::corpus::{derive_ground_truth, CorpusStore, GroundTruthSet, PublicationRecord};
use crate::embedding::{train_sgns, TrainConfig};
use crate::error::{Error, Result};
use crate::evaluate::precision;
use crate::hypergraph::{Hypergraph, NodeId};
use crate::predict::{candidate_pool, rank_discoveries, Metric, MetricSource};
use crate::token::{namespaced, Kind};
use crate::transition::transition_row;
use crate::walker::{sample_walks, strip_authors, Alpha, Sampling, WalkConfig};

pub const TARGET_PROPERTY: &str = "p:target";

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedConfig {
    /// Community 0 owns the target property.
    pub communities: usize,
    pub authors_per_community: usize,
    pub materials_per_community: usize,
    /// Ordinary papers per community per period.
    pub papers_per_period: usize,
    pub start_period: i64,
    pub periods: usize,
    pub planted_pairs: usize,
    /// Reveal period of each planted pair; empty means all at the last period.
    pub reveal_periods: Vec<i64>,
    /// Share of each community's authors who also belong to the previous one.
    pub overlap_rate: f64,
    /// Chance that an ordinary paper outside community 0 borrows a material
    /// from a neighbouring community.
    pub material_mixing: f64,
    /// Total papers mentioning the target property; `None` lets community 0
    /// mention it in about half its papers.
    pub property_papers: Option<usize>,
    pub seed: u64,
}

impl Default for PlantedConfig {
    fn default() -> Self {
        PlantedConfig {
            communities: 4,
            authors_per_community: 10,
            materials_per_community: 12,
            papers_per_period: 8,
            start_period: 2000,
            periods: 8,
            planted_pairs: 3,
            reveal_periods: Vec::new(),
            overlap_rate: 0.3,
            material_mixing: 0.1,
            property_papers: None,
            seed: 0,
        }
    }
}

impl PlantedConfig {
    pub fn last_period(&self) -> i64 {
        self.start_period + self.periods as i64 - 1
    }

    pub fn reveals(&self) -> Vec<i64> {
        if self.reveal_periods.is_empty() {
            vec![self.last_period(); self.planted_pairs]
        } else {
            self.reveal_periods.clone()
        }
    }

    /// The earliest reveal: predictions are made from the periods before it.
    pub fn prediction_period(&self) -> i64 {
        self.reveals().into_iter().min().unwrap_or(self.last_period())
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("communities", self.communities),
            ("authors_per_community", self.authors_per_community),
            ("materials_per_community", self.materials_per_community),
            ("papers_per_period", self.papers_per_period),
            ("planted_pairs", self.planted_pairs),
        ];
        if let Some((name, _)) = positive.iter().find(|(_, v)| *v < 1) {
            return Err(Error::Config(format!("{name} must be >= 1")));
        }
        if self.communities < 2 {
            return Err(Error::Config("need at least 2 communities".into()));
        }
        if self.periods < 2 {
            return Err(Error::Config("need at least 2 periods".into()));
        }
        if self.planted_pairs > self.materials_per_community {
            return Err(Error::Config(format!(
                "{} planted pairs exceed the {} material slots of community 1",
                self.planted_pairs, self.materials_per_community
            )));
        }
        let reveals = self.reveals();
        if reveals.len() != self.planted_pairs {
            return Err(Error::Config("need one reveal period per planted pair".into()));
        }
        if reveals.iter().any(|&r| r <= self.start_period || r > self.last_period()) {
            return Err(Error::Config("reveal periods must fall after the first period and within the span".into()));
        }
        for (name, v) in [("overlap_rate", self.overlap_rate), ("material_mixing", self.material_mixing)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!("{name} must lie in [0, 1]")));
            }
        }
        if self.property_papers == Some(0) {
            return Err(Error::Config("property_papers must be >= 1".into()));
        }
        Ok(())
    }
}

struct Community {
    /// Primary authors followed by members joining from elsewhere.
    members: Vec<String>,
    materials: Vec<String>,
}

struct Builder {
    records: Vec<PublicationRecord>,
    counter: usize,
}

impl Builder {
    fn push(&mut self, period: i64, authors: Vec<String>, materials: Vec<String>, properties: Vec<String>) {
        self.counter += 1;
        self.records.push(PublicationRecord::new(
            format!("{period}-{:05}", self.counter),
            period,
            &authors,
            &materials,
            &properties,
        ));
    }
}

fn pick<R: Rng>(rng: &mut R, from: &[String], lo: usize, hi: usize) -> Vec<String> {
    let n = rng.gen_range(lo..=hi).min(from.len());
    from.choose_multiple(rng, n).cloned().collect()
}

/// Generate a planted corpus and its ground truth for [`TARGET_PROPERTY`]
/// from the first period after the start.
pub fn generate_planted(cfg: &PlantedConfig) -> Result<(CorpusStore, GroundTruthSet)> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut communities: Vec<Community> = (0..cfg.communities)
        .map(|c| Community {
            members: (0..cfg.authors_per_community).map(|i| format!("c{c}_a{i:02}")).collect(),
            materials: (0..cfg.materials_per_community).map(|i| format!("c{c}_m{i:02}")).collect(),
        })
        .collect();

    // bridges[c] are community-c authors who also publish in community c - 1
    let n_bridge = (cfg.overlap_rate * cfg.authors_per_community as f64).round() as usize;
    let mut bridges: Vec<Vec<String>> = vec![Vec::new(); cfg.communities];
    for c in 1..cfg.communities {
        let chosen = pick(&mut rng, &communities[c].members, n_bridge, n_bridge);
        communities[c - 1].members.extend(chosen.iter().cloned());
        bridges[c] = chosen;
    }

    // pair i is community-1 material i, carried by bridges j with j ≡ i
    let reveals = cfg.reveals();
    let planted: Vec<(String, i64)> = reveals
        .iter()
        .enumerate()
        .map(|(i, &r)| (communities[1].materials[i].clone(), r))
        .collect();
    let carried = |author: &String| -> Vec<String> {
        bridges[1]
            .iter()
            .position(|b| b == author)
            .map(|j| planted.iter().skip(j).step_by(bridges[1].len()).map(|(m, _)| m.clone()).collect())
            .unwrap_or_default()
    };
    let planted_set: BTreeSet<&str> = planted.iter().map(|(m, _)| m.as_str()).collect();
    let mixable: Vec<Vec<String>> = communities
        .iter()
        .map(|com| com.materials.iter().filter(|m| !planted_set.contains(m.as_str())).cloned().collect())
        .collect();

    let target = vec!["target".to_string()];
    let mut b = Builder { records: Vec::new(), counter: 0 };
    let first_author = communities[0].members[0].clone();
    b.push(cfg.start_period, vec![first_author], communities[0].materials.clone(), target.clone());

    let prediction = cfg.prediction_period();
    for period in cfg.start_period..=cfg.last_period() {
        for (c, com) in communities.iter().enumerate() {
            for _ in 0..cfg.papers_per_period {
                let authors = pick(&mut rng, &com.members, 1, 3);
                let mut materials = pick(&mut rng, &mixable[c], 1, 3);
                let mut props = Vec::new();
                if c == 0 {
                    if cfg.property_papers.is_none() && rng.gen_bool(0.5) {
                        props = target.clone();
                    }
                } else {
                    if rng.gen_bool(0.5) {
                        props.push(format!("prop{c}"));
                    }
                    if rng.gen_bool(cfg.material_mixing) {
                        let other = match c + 1 < cfg.communities && rng.gen_bool(0.5) {
                            true => c + 1,
                            false => c - 1,
                        };
                        materials.extend(pick(&mut rng, &mixable[other], 1, 1));
                    }
                    if c == 1 {
                        materials.extend(authors.iter().flat_map(&carried));
                    }
                }
                b.push(period, authors, materials, props);
            }
        }
        for (i, (m, reveal)) in planted.iter().enumerate() {
            if period != *reveal {
                continue;
            }
            let author = match bridges[1].is_empty() {
                true => communities[0].members[i % cfg.authors_per_community].clone(),
                false => bridges[1][i % bridges[1].len()].clone(),
            };
            b.push(period, vec![author], vec![m.clone()], target.clone());
        }
    }

    if let Some(n) = cfg.property_papers {
        // n - 1 further target papers, newest first, sharing out the bridges
        let all_bridges: Vec<&String> = bridges[1].iter().collect();
        let extra = n - 1;
        let history = (prediction - cfg.start_period) as usize;
        for j in 0..extra {
            let period = prediction - 1 - (j % history) as i64;
            let mut authors = vec![communities[0].members[rng.gen_range(0..cfg.authors_per_community)].clone()];
            authors.extend(all_bridges.iter().skip(j).step_by(extra).map(|a| (*a).clone()));
            let materials = pick(&mut rng, &communities[0].materials, 1, 2);
            b.push(period, authors, materials, target.clone());
        }
    }

    let store = CorpusStore::from_records(b.records)?;
    let truth = derive_ground_truth(&store, TARGET_PROPERTY, cfg.start_period + 1)?;
    Ok((store, truth))
}

/// Exact distribution after a fixed number of walk steps.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleDistribution {
    pub nodes: BTreeMap<NodeId, f64>,
    pub termination: f64,
}

impl OracleDistribution {
    pub fn total(&self) -> f64 {
        self.nodes.values().sum::<f64>() + self.termination
    }
}

pub const ORACLE_MAX_NODES: usize = 40;
pub const ORACLE_MAX_STEPS: usize = 3;

/// Probabilities of each candidate inside one edge, or `None` when the walk
/// stops there. Written from the sampling rule directly.
fn oracle_choices(g: &Hypergraph, edge: &[NodeId], current: NodeId, sampling: Sampling, lazy: bool) -> Option<Vec<(NodeId, f64)>> {
    let cands: Vec<NodeId> = edge.iter().copied().filter(|&n| lazy || n != current).collect();
    if cands.is_empty() {
        return None;
    }
    let (other_w, mat_w) = match sampling {
        Sampling::Uniform => return Some(cands.iter().map(|&n| (n, 1.0 / cands.len() as f64)).collect()),
        Sampling::Alpha(Alpha::Infinite) => (0.0, 1.0),
        Sampling::Alpha(Alpha::Finite(a)) => (1.0 / (a + 1.0), a / (a + 1.0)),
    };
    let mats = cands.iter().filter(|&&n| g.kind(n) == Kind::Material).count();
    let others = cands.len() - mats;
    let (other_w, mat_w) = if mats > 0 && others > 0 {
        (other_w, mat_w)
    } else if mats > 0 {
        if mat_w == 0.0 {
            return None;
        }
        (0.0, 1.0)
    } else {
        if other_w == 0.0 {
            return None;
        }
        (1.0, 0.0)
    };
    Some(
        cands
            .iter()
            .map(|&n| match g.kind(n) {
                Kind::Material => (n, mat_w / mats as f64),
                _ => (n, other_w / others as f64),
            })
            .filter(|&(_, p)| p > 0.0)
            .collect(),
    )
}

fn check_oracle_size(g: &Hypergraph, steps: usize) -> Result<()> {
    if g.node_count() > ORACLE_MAX_NODES {
        return Err(Error::Size(format!("{} nodes exceed the oracle bound of {ORACLE_MAX_NODES}", g.node_count())));
    }
    if steps > ORACLE_MAX_STEPS {
        return Err(Error::Size(format!("{steps} steps exceed the oracle bound of {ORACLE_MAX_STEPS}")));
    }
    Ok(())
}

/// Visit every (edge, node) choice sequence of `steps` steps. `kinds`, when
/// given, prunes paths whose i-th visited node is not of kind `kinds[i]`.
#[allow(clippy::too_many_arguments)]
fn enumerate_paths(
    g: &Hypergraph,
    u: NodeId,
    left: usize,
    prob: f64,
    sampling: Sampling,
    lazy: bool,
    kinds: Option<&[Kind]>,
    out: &mut OracleDistribution,
) {
    if left == 0 {
        *out.nodes.entry(u).or_default() += prob;
        return;
    }
    let edges = g.edges_of(u);
    if edges.is_empty() {
        out.termination += prob;
        return;
    }
    let pe = prob / edges.len() as f64;
    for &e in edges {
        let Some(choices) = oracle_choices(g, g.edge(e), u, sampling, lazy) else {
            out.termination += pe;
            continue;
        };
        for (v, p) in choices {
            if let Some(k) = kinds {
                if g.kind(v) != k[k.len() - left] {
                    continue;
                }
            }
            enumerate_paths(g, v, left - 1, pe * p, sampling, lazy, kinds, out);
        }
    }
}

/// Exact end-node distribution after `steps` steps from `start`, with the
/// mass of walks that stopped earlier as termination.
pub fn oracle_transition(
    g: &Hypergraph,
    start: NodeId,
    steps: usize,
    sampling: Sampling,
    lazy: bool,
) -> Result<OracleDistribution> {
    check_oracle_size(g, steps)?;
    sampling.validate()?;
    if start.index() >= g.node_count() {
        return Err(Error::Lookup(format!("unknown start node {start}")));
    }
    let mut out = OracleDistribution { nodes: BTreeMap::new(), termination: 0.0 };
    enumerate_paths(g, start, steps, 1.0, sampling, lazy, None, &mut out);
    Ok(out)
}

/// Probability of each end node over paths whose visited kinds follow `kinds`.
pub fn oracle_meta_path(
    g: &Hypergraph,
    start: NodeId,
    kinds: &[Kind],
    sampling: Sampling,
    lazy: bool,
) -> Result<BTreeMap<NodeId, f64>> {
    check_oracle_size(g, kinds.len())?;
    sampling.validate()?;
    let mut out = OracleDistribution { nodes: BTreeMap::new(), termination: 0.0 };
    enumerate_paths(g, start, kinds.len(), 1.0, sampling, lazy, Some(kinds), &mut out);
    out.nodes.retain(|_, p| *p > 0.0);
    Ok(out.nodes)
}

/// L1 distance between first-step frequencies over `n_samples` sampled walks
/// (termination counted as its own outcome) and the analytic one-step row.
pub fn empirical_vs_analytic(g: &Hypergraph, property: &str, cfg: &WalkConfig, n_samples: usize) -> Result<f64> {
    let first_step = WalkConfig { walk_length: 1, num_walks: n_samples, ..cfg.clone() };
    let walks = sample_walks(g, property, &first_step)?;
    let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
    let mut stopped = 0usize;
    for seq in walks.id_sequences() {
        match seq.get(1) {
            Some(&id) => *counts.entry(id).or_default() += 1,
            None => stopped += 1,
        }
    }
    let start = g.require(property)?;
    let row = transition_row(g, start, cfg.sampling, cfg.lazy)?;
    let n = n_samples as f64;
    let mut l1 = (stopped as f64 / n - row.termination).abs();
    let mut seen = BTreeSet::new();
    for &(v, p) in &row.entries {
        seen.insert(v.0);
        l1 += (counts.get(&v.0).copied().unwrap_or(0) as f64 / n - p).abs();
    }
    for (id, c) in counts {
        if !seen.contains(&id) {
            l1 += c as f64 / n;
        }
    }
    Ok(l1)
}

/// Settings for scoring methods on a planted corpus.
#[derive(Debug, Clone)]
pub struct BenchmarkSettings {
    pub memory: i64,
    pub k: usize,
    pub walk: WalkConfig,
    pub train: TrainConfig,
}

impl Default for BenchmarkSettings {
    fn default() -> Self {
        BenchmarkSettings {
            memory: 5,
            k: 10,
            walk: WalkConfig { num_walks: 2000, ..WalkConfig::default() },
            train: TrainConfig { dimension: 32, ..TrainConfig::default() },
        }
    }
}

/// A planted corpus ready for scoring at its prediction period.
pub struct PlantedInstance {
    pub store: CorpusStore,
    pub truth: GroundTruthSet,
    pub prediction_period: i64,
}

impl PlantedInstance {
    pub fn generate(cfg: &PlantedConfig) -> Result<Self> {
        let (store, truth) = generate_planted(cfg)?;
        Ok(PlantedInstance { store, truth, prediction_period: cfg.prediction_period() })
    }

    pub fn pool(&self, memory: i64) -> Result<BTreeSet<String>> {
        let view = self.store.window(self.prediction_period, memory)?;
        Ok(candidate_pool(&view, TARGET_PROPERTY))
    }

    /// Expected precision of a uniformly random pick from the pool.
    pub fn random_baseline(&self, memory: i64) -> Result<f64> {
        let pool = self.pool(memory)?;
        if pool.is_empty() {
            return Err(Error::Degenerate("empty candidate pool".into()));
        }
        Ok(pool.iter().filter(|m| self.truth.contains(m)).count() as f64 / pool.len() as f64)
    }

    /// Precision@k of walk-embedding cosine under `sampling`.
    pub fn deepwalk_precision(&self, settings: &BenchmarkSettings, sampling: Sampling) -> Result<f64> {
        let view = self.store.window(self.prediction_period, settings.memory)?;
        let g = Hypergraph::build(&view);
        let walks = sample_walks(&g, TARGET_PROPERTY, &WalkConfig { sampling, ..settings.walk.clone() })?;
        let table = train_sgns(&strip_authors(&walks), &settings.train)?;
        let pool = candidate_pool(&view, TARGET_PROPERTY);
        let preds = rank_discoveries(TARGET_PROPERTY, Metric::DeepwalkCosine, MetricSource::Embedding(&table), &pool, settings.k)?;
        precision(&preds, &self.truth)
    }

    /// Precision@k of alien predictions at each β of `grid`.
    pub fn alien_precisions(&self, settings: &BenchmarkSettings, grid: &[f64]) -> Result<Vec<f64>> {
        let view = self.store.window(self.prediction_period, settings.memory)?;
        let g = Hypergraph::build(&view);
        let table = train_sgns(&record_sentences(&view), &settings.train)?;
        let pool = candidate_pool(&view, TARGET_PROPERTY);
        let signals = AlienSignals::compute(&g, &table, TARGET_PROPERTY, &pool, &FusionConfig::default())?;
        sweep(&signals, grid, settings.k)?
            .iter()
            .map(|(_, preds)| precision(preds, &self.truth))
            .collect()
    }
}

/// Token of the material planted by pair `i`.
pub fn planted_material(i: usize) -> String {
    namespaced(Kind::Material, &format!("c1_m{i:02}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::write_corpus;
    use crate::hypergraph::tests::graph;
    use crate::transition::{meta_path_score, MetaPath};
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn two_communities_one_pair() {
        let cfg = PlantedConfig {
            communities: 2,
            planted_pairs: 1,
            reveal_periods: vec![2005],
            ..Default::default()
        };
        let (store, truth) = generate_planted(&cfg).unwrap();
        assert_eq!(truth.discoveries, BTreeMap::from([(planted_material(0), 2005)]));
        // never together before the reveal
        assert!(!store
            .records()
            .iter()
            .any(|r| r.period < 2005 && r.mentions(TARGET_PROPERTY) && r.mentions(&planted_material(0))));
    }

    #[test]
    fn deterministic_bytes() {
        let cfg = PlantedConfig { seed: 9, ..Default::default() };
        let dump = |c: &PlantedConfig| {
            let mut out = Vec::new();
            write_corpus(&generate_planted(c).unwrap().0, &mut out).unwrap();
            out
        };
        assert_eq!(dump(&cfg), dump(&cfg));
        assert_ne!(dump(&cfg), dump(&PlantedConfig { seed: 10, ..cfg.clone() }));
    }

    #[test]
    fn zero_overlap_keeps_communities_apart() {
        let cfg = PlantedConfig { overlap_rate: 0.0, ..Default::default() };
        let (store, _) = generate_planted(&cfg).unwrap();
        let home = |a: &str| a[2..a.find('_').unwrap()].to_string();
        let mut community_of: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for r in store.records() {
            let homes: BTreeSet<String> = r.authors.iter().map(|a| home(a)).collect();
            assert_eq!(homes.len(), 1, "record {} mixes communities", r.id);
            for a in &r.authors {
                community_of.entry(a.clone()).or_default().extend(homes.iter().cloned());
            }
        }
        assert!(community_of.values().all(|c| c.len() == 1));
    }

    #[test]
    fn infeasible_config() {
        let cfg = PlantedConfig { materials_per_community: 2, planted_pairs: 3, ..Default::default() };
        assert!(matches!(generate_planted(&cfg), Err(Error::Config(_))));
        let cfg = PlantedConfig { reveal_periods: vec![1990, 2001, 2002], ..Default::default() };
        assert!(matches!(generate_planted(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn sparse_property_paper_count() {
        let cfg = PlantedConfig { property_papers: Some(5), ..Default::default() };
        let (store, truth) = generate_planted(&cfg).unwrap();
        let before = store
            .records()
            .iter()
            .filter(|r| r.period < cfg.prediction_period() && r.mentions(TARGET_PROPERTY))
            .count();
        assert_eq!(before, 5);
        assert_eq!(truth.len(), 3);
    }

    fn example() -> Hypergraph {
        graph(&[&["p:P", "a:1", "m:1"], &["p:P", "a:2"]])
    }

    #[test]
    fn oracle_one_step_matches_row() {
        let g = example();
        let p = g.node("p:P").unwrap();
        for s in [Sampling::alpha(1.0), Sampling::alpha(0.0), Sampling::Uniform, Sampling::Alpha(Alpha::Infinite)] {
            let o = oracle_transition(&g, p, 1, s, false).unwrap();
            let row = transition_row(&g, p, s, false).unwrap();
            for (v, q) in &o.nodes {
                assert!((row.get(*v) - q).abs() < 1e-15);
            }
            assert!((o.termination - row.termination).abs() < 1e-15);
        }
        let o = oracle_transition(&g, p, 1, Sampling::alpha(1.0), false).unwrap();
        // authors carry 1/4 + 1/2 between them
        assert_eq!(o.nodes[&g.node("a:1").unwrap()] + o.nodes[&g.node("a:2").unwrap()], 0.75);
    }

    #[test]
    fn oracle_zero_steps_and_termination() {
        let g = example();
        let p = g.node("p:P").unwrap();
        let o = oracle_transition(&g, p, 0, Sampling::alpha(1.0), false).unwrap();
        assert_eq!(o.nodes, BTreeMap::from([(p, 1.0)]));
        let o = oracle_transition(&g, p, 1, Sampling::Alpha(Alpha::Infinite), false).unwrap();
        assert_eq!(o.termination, 0.5);
    }

    #[test]
    fn oracle_size_bound() {
        let edges: Vec<Vec<String>> = (0..41).map(|i| vec!["p:P".to_string(), format!("m:{i}")]).collect();
        let refs: Vec<Vec<&str>> = edges.iter().map(|e| e.iter().map(String::as_str).collect()).collect();
        let slices: Vec<&[&str]> = refs.iter().map(Vec::as_slice).collect();
        let g = graph(&slices);
        let p = g.node("p:P").unwrap();
        assert!(matches!(oracle_transition(&g, p, 1, Sampling::Uniform, false), Err(Error::Size(_))));
        let g = example();
        assert!(matches!(oracle_transition(&g, NodeId(0), 4, Sampling::Uniform, false), Err(Error::Size(_))));
    }

    #[test]
    fn empirical_bounds() {
        let g = example();
        let cfg = WalkConfig { seed: 3, ..Default::default() };
        assert!(empirical_vs_analytic(&g, "p:P", &cfg, 1).unwrap() <= 2.0);
        let single = graph(&[&["p:P", "m:only"]]);
        assert_eq!(empirical_vs_analytic(&single, "p:P", &cfg, 1000).unwrap(), 0.0);
        assert!(empirical_vs_analytic(&g, "p:P", &cfg, 50_000).unwrap() < 0.03);
    }

    fn random_graph(seed: u64, nodes: usize, edges: usize) -> Hypergraph {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tokens: Vec<String> = (0..nodes)
            .map(|i| match i {
                0 => "p:P".to_string(),
                _ if i % 3 == 0 => format!("m:{i}"),
                _ if i % 7 == 0 => format!("p:{i}"),
                _ => format!("a:{i}"),
            })
            .collect();
        let mut lists = vec![("e0".to_string(), vec![tokens[0].clone(), tokens[1].clone()])];
        for e in 1..edges {
            let size = rng.gen_range(1..=4);
            let mut members: Vec<String> = tokens.choose_multiple(&mut rng, size).cloned().collect();
            if rng.gen_bool(0.3) {
                members.push(tokens[0].clone());
            }
            lists.push((format!("e{e}"), members));
        }
        Hypergraph::from_edge_lists(lists).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn oracle_sums_to_one(seed in any::<u64>(), steps in 0usize..=3, lazy in any::<bool>(), a in prop::sample::select(vec![0.0, 0.5, 1.0, 2.0, f64::INFINITY])) {
            let g = random_graph(seed, 14, 10);
            let s = if a.is_infinite() { Sampling::Alpha(Alpha::Infinite) } else { Sampling::alpha(a) };
            for start in g.nodes() {
                let o = oracle_transition(&g, start, steps, s, lazy).unwrap();
                prop_assert!((o.total() - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn meta_paths_match_oracle(seed in any::<u64>(), lazy in any::<bool>()) {
            let g = random_graph(seed, 16, 12);
            let p = g.node("p:P").unwrap();
            for pattern in [MetaPath::Pam, MetaPath::Paam, MetaPath::Pma] {
                let fast = meta_path_score(&g, p, pattern, Sampling::alpha(1.0), lazy).unwrap();
                let slow = oracle_meta_path(&g, p, pattern.steps(), Sampling::alpha(1.0), lazy).unwrap();
                prop_assert_eq!(fast.keys().collect::<Vec<_>>(), slow.keys().collect::<Vec<_>>());
                for (k, v) in &fast {
                    prop_assert!((v - slow[k]).abs() < 1e-12);
                }
            }
        }
    }
}
