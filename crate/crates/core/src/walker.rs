//! α-modified, truncated random walks over the hypergraph.
//!
//! A step picks one of the current node's hyperedges uniformly, then the next
//! node inside that edge. Under α-modified sampling the edge's candidates are
//! split into materials and non-materials (authors, properties); a material is
//! α times as likely to be picked as a non-material partition.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hypergraph::{Hypergraph, NodeId};
use crate::sequences::SequenceCorpus;
use crate::token::Kind;

pub type WalkCorpus = SequenceCorpus;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Alpha {
    Finite(f64),
    Infinite,
}

impl Alpha {
    /// (non-material mass, material mass) when both partitions are present.
    pub fn mixture(self) -> (f64, f64) {
        match self {
            Alpha::Finite(a) => (1.0 / (a + 1.0), a / (a + 1.0)),
            Alpha::Infinite => (0.0, 1.0),
        }
    }

    fn validate(self) -> Result<()> {
        match self {
            Alpha::Finite(a) if !(a.is_finite() && a >= 0.0) => {
                Err(Error::Config(format!("alpha must be >= 0 or inf, got {a}")))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Alpha::Finite(a) => write!(f, "{a}"),
            Alpha::Infinite => f.write_str("inf"),
        }
    }
}

/// How the next node is drawn inside a chosen hyperedge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sampling {
    /// Uniform over the edge's candidates, ignoring kinds.
    Uniform,
    Alpha(Alpha),
}

impl Sampling {
    pub fn alpha(a: f64) -> Self {
        Sampling::Alpha(Alpha::Finite(a))
    }

    pub fn validate(self) -> Result<()> {
        match self {
            Sampling::Uniform => Ok(()),
            Sampling::Alpha(a) => a.validate(),
        }
    }
}

impl fmt::Display for Sampling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sampling::Uniform => f.write_str("uniform"),
            Sampling::Alpha(a) => a.fmt(f),
        }
    }
}

impl FromStr for Sampling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let parsed = match s.to_ascii_lowercase().as_str() {
            "uniform" => Sampling::Uniform,
            "inf" | "infinity" | "∞" => Sampling::Alpha(Alpha::Infinite),
            other => Sampling::alpha(
                other
                    .parse()
                    .map_err(|_| Error::Argument(format!("alpha must be a number, inf or uniform, got {s:?}")))?,
            ),
        };
        parsed.validate().map_err(|e| Error::Argument(e.to_string()))?;
        Ok(parsed)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WalkConfig {
    pub sampling: Sampling,
    /// Maximum number of steps; a walk has at most `walk_length + 1` tokens.
    pub walk_length: usize,
    pub num_walks: usize,
    pub seed: u64,
    /// Whether the current node may be re-selected from the chosen edge.
    pub lazy: bool,
}

impl Default for WalkConfig {
    fn default() -> Self {
        WalkConfig {
            sampling: Sampling::alpha(1.0),
            walk_length: 20,
            num_walks: 250_000,
            seed: 0,
            lazy: false,
        }
    }
}

impl WalkConfig {
    pub fn validate(&self) -> Result<()> {
        self.sampling.validate()?;
        if self.walk_length < 1 {
            return Err(Error::Config("walk_length must be >= 1".into()));
        }
        if self.num_walks < 1 {
            return Err(Error::Config("num_walks must be >= 1".into()));
        }
        Ok(())
    }
}

/// Within-edge next-node distribution. Mass not assigned to any node is the
/// probability that the walk terminates at this step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepDistribution {
    pub nodes: Vec<(NodeId, f64)>,
    pub termination: f64,
}

impl StepDistribution {
    fn terminate() -> Self {
        StepDistribution {
            nodes: Vec::new(),
            termination: 1.0,
        }
    }

    pub fn total(&self) -> f64 {
        self.nodes.iter().map(|(_, p)| p).sum::<f64>() + self.termination
    }

    pub fn prob(&self, n: NodeId) -> f64 {
        self.nodes.iter().find(|(m, _)| *m == n).map_or(0.0, |(_, p)| *p)
    }
}

/// Next-node distribution inside one hyperedge.
///
/// With both partitions present, non-materials share `1/(α+1)` and materials
/// share `α/(α+1)`. With one present, it takes all mass unless its mixture
/// weight is zero (materials at α=0, non-materials at α=∞), in which case the
/// walk terminates. An empty candidate set also terminates.
pub fn node_step_distribution(
    g: &Hypergraph,
    edge_nodes: &[NodeId],
    current: NodeId,
    sampling: Sampling,
    lazy: bool,
) -> Result<StepDistribution> {
    if !edge_nodes.contains(&current) {
        return Err(Error::Argument(format!("{} is not in the hyperedge", g.token(current))));
    }
    let candidates: Vec<NodeId> = edge_nodes.iter().copied().filter(|&n| lazy || n != current).collect();
    if candidates.is_empty() {
        return Ok(StepDistribution::terminate());
    }
    let alpha = match sampling {
        Sampling::Uniform => {
            let p = 1.0 / candidates.len() as f64;
            return Ok(StepDistribution {
                nodes: candidates.into_iter().map(|n| (n, p)).collect(),
                termination: 0.0,
            });
        }
        Sampling::Alpha(a) => a,
    };
    let (materials, others): (Vec<NodeId>, Vec<NodeId>) =
        candidates.into_iter().partition(|&n| g.kind(n).is_material());
    let (w_other, w_material) = alpha.mixture();
    let (w_other, w_material) = match (others.is_empty(), materials.is_empty()) {
        (false, false) => (w_other, w_material),
        (false, true) if w_other > 0.0 => (1.0, 0.0),
        (true, false) if w_material > 0.0 => (0.0, 1.0),
        _ => return Ok(StepDistribution::terminate()),
    };
    let mut nodes = Vec::with_capacity(others.len() + materials.len());
    for (part, w) in [(&others, w_other), (&materials, w_material)] {
        if w > 0.0 {
            let p = w / part.len() as f64;
            nodes.extend(part.iter().map(|&n| (n, p)));
        }
    }
    nodes.sort_by_key(|&(n, _)| n);
    Ok(StepDistribution {
        nodes,
        termination: 0.0,
    })
}

/// Per-edge split into material and non-material nodes, both sorted.
struct EdgeSplit {
    all: Vec<NodeId>,
    materials: Vec<NodeId>,
    others: Vec<NodeId>,
}

/// Precomputed sampler over one graph.
pub struct Walker<'g> {
    graph: &'g Hypergraph,
    splits: Vec<EdgeSplit>,
}

impl<'g> Walker<'g> {
    pub fn new(graph: &'g Hypergraph) -> Self {
        let splits = (0..graph.edge_count() as u32)
            .map(|e| {
                let all = graph.edge(e).to_vec();
                let (materials, others) = all.iter().partition(|&&n| graph.kind(n).is_material());
                EdgeSplit { all, materials, others }
            })
            .collect();
        Walker { graph, splits }
    }

    /// Uniform pick from `list`, skipping `exclude` when it is present.
    fn pick<R: Rng>(rng: &mut R, list: &[NodeId], exclude: Option<NodeId>) -> Option<NodeId> {
        let skip = exclude.and_then(|x| list.binary_search(&x).ok());
        let n = list.len() - usize::from(skip.is_some());
        if n == 0 {
            return None;
        }
        let mut i = rng.gen_range(0..n);
        if let Some(pos) = skip {
            if i >= pos {
                i += 1;
            }
        }
        Some(list[i])
    }

    /// One step from `current`; `None` means the walk terminates.
    pub fn step<R: Rng>(&self, rng: &mut R, current: NodeId, sampling: Sampling, lazy: bool) -> Option<NodeId> {
        let edges = self.graph.edges_of(current);
        if edges.is_empty() {
            return None;
        }
        let split = &self.splits[edges[rng.gen_range(0..edges.len())] as usize];
        let exclude = (!lazy).then_some(current);
        let alpha = match sampling {
            Sampling::Uniform => return Self::pick(rng, &split.all, exclude),
            Sampling::Alpha(a) => a,
        };
        let current_is_material = self.graph.kind(current).is_material();
        let excluded = |is_material: bool| usize::from(!lazy && current_is_material == is_material);
        let n_mat = split.materials.len() - excluded(true);
        let n_oth = split.others.len() - excluded(false);
        let (w_other, w_material) = alpha.mixture();
        let take_material = match (n_oth > 0, n_mat > 0) {
            (true, true) => rng.gen::<f64>() < w_material,
            (true, false) if w_other > 0.0 => false,
            (false, true) if w_material > 0.0 => true,
            _ => return None,
        };
        let part = if take_material { &split.materials } else { &split.others };
        Self::pick(rng, part, exclude)
    }

    /// Walk number `index` of a run seeded with `seed`. Each index has its own
    /// RNG stream, so walks can be generated in any order.
    pub fn walk(&self, start: NodeId, cfg: &WalkConfig, index: u64) -> Vec<u32> {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(index);
        let mut seq = Vec::with_capacity(cfg.walk_length + 1);
        seq.push(start.0);
        let mut current = start;
        for _ in 0..cfg.walk_length {
            match self.step(&mut rng, current, cfg.sampling, cfg.lazy) {
                Some(next) => {
                    seq.push(next.0);
                    current = next;
                }
                None => break,
            }
        }
        seq
    }
}

/// Generate `cfg.num_walks` walks from `property`. Output order follows walk
/// index, so the result is identical however many threads rayon uses.
pub fn sample_walks(g: &Hypergraph, property: &str, cfg: &WalkConfig) -> Result<WalkCorpus> {
    cfg.validate()?;
    let start = g
        .node(property)
        .ok_or_else(|| Error::Precondition(format!("{property} is not in the graph")))?;
    if g.degree(start) == 0 {
        return Err(Error::Precondition(format!("{property} is isolated")));
    }
    let walker = Walker::new(g);
    let walks: Vec<Vec<u32>> = (0..cfg.num_walks as u64)
        .into_par_iter()
        .map(|i| walker.walk(start, cfg, i))
        .collect();
    let mut corpus = SequenceCorpus::with_vocab(g.nodes().map(|n| g.token(n).to_string()).collect());
    for w in walks {
        corpus.push_ids(w);
    }
    Ok(corpus)
}

/// Remove author tokens, keeping the order of everything else.
pub fn strip_authors(walks: &WalkCorpus) -> WalkCorpus {
    walks.filter_tokens(|t| Kind::of_token(t) != Some(Kind::Author))
}
