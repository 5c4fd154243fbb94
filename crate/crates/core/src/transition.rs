//! Exact one-step and meta-path transition probabilities.
//!
//! Row `u` of the transition matrix is `(1/d(u)) Σ_e p_e(·)`, where `e` runs
//! over the hyperedges of `u` and `p_e` is the walker's within-edge
//! distribution. Meta-path scores chain rows restricted to the pattern's node
//! kinds, so they equal the walker's probability of following that kind
//! sequence.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hypergraph::{Hypergraph, NodeId};
use crate::token::Kind;
use crate::walker::{node_step_distribution, Sampling};

/// Sparse one-step row plus its termination mass.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TransitionRow {
    /// Sorted by node id, zero entries omitted.
    pub entries: Vec<(NodeId, f64)>,
    pub termination: f64,
}

impl TransitionRow {
    pub fn get(&self, v: NodeId) -> f64 {
        self.entries
            .binary_search_by_key(&v, |&(n, _)| n)
            .map_or(0.0, |i| self.entries[i].1)
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().map(|(_, p)| p).sum::<f64>() + self.termination
    }
}

/// One-step transition row of `u`.
pub fn transition_row(g: &Hypergraph, u: NodeId, sampling: Sampling, lazy: bool) -> Result<TransitionRow> {
    if u.index() >= g.node_count() {
        return Err(Error::Lookup(format!("unknown node {u}")));
    }
    let degree = g.degree(u) as f64;
    let mut acc: BTreeMap<NodeId, f64> = BTreeMap::new();
    let mut termination = 0.0;
    for &e in g.edges_of(u) {
        let d = node_step_distribution(g, g.edge(e), u, sampling, lazy)?;
        for (v, p) in d.nodes {
            *acc.entry(v).or_default() += p;
        }
        termination += d.termination;
    }
    Ok(TransitionRow {
        entries: acc
            .into_iter()
            .filter(|&(_, p)| p > 0.0)
            .map(|(v, p)| (v, p / degree))
            .collect(),
        termination: termination / degree,
    })
}

/// Full sparse one-step matrix with an absorbing termination column.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    pub sampling: Sampling,
    pub lazy: bool,
    rows: Vec<TransitionRow>,
}

impl TransitionMatrix {
    pub fn build(g: &Hypergraph, sampling: Sampling, lazy: bool) -> Result<Self> {
        sampling.validate()?;
        let rows = g
            .nodes()
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(|u| transition_row(g, u, sampling, lazy))
            .collect::<Result<Vec<_>>>()?;
        Ok(TransitionMatrix { sampling, lazy, rows })
    }

    pub fn row(&self, u: NodeId) -> &TransitionRow {
        &self.rows[u.index()]
    }

    pub fn get(&self, u: NodeId, v: NodeId) -> f64 {
        self.rows[u.index()].get(v)
    }

    pub fn termination(&self, u: NodeId) -> f64 {
        self.rows[u.index()].termination
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Probability that one walker step from `u` lands on `v`.
pub fn one_step_probability(g: &Hypergraph, u: NodeId, v: NodeId, sampling: Sampling, lazy: bool) -> Result<f64> {
    if v.index() >= g.node_count() {
        return Err(Error::Lookup(format!("unknown node {v}")));
    }
    Ok(transition_row(g, u, sampling, lazy)?.get(v))
}

/// Kind sequences supported as meta-paths; all start at a property.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MetaPath {
    /// property → author → material
    Pam,
    /// property → author → author → material
    Paam,
    /// property → material → author
    Pma,
}

impl MetaPath {
    /// Kinds visited after the starting property.
    pub fn steps(self) -> &'static [Kind] {
        match self {
            MetaPath::Pam => &[Kind::Author, Kind::Material],
            MetaPath::Paam => &[Kind::Author, Kind::Author, Kind::Material],
            MetaPath::Pma => &[Kind::Material, Kind::Author],
        }
    }

    pub fn target_kind(self) -> Kind {
        *self.steps().last().expect("patterns are non-empty")
    }
}

impl fmt::Display for MetaPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MetaPath::Pam => "PAM",
            MetaPath::Paam => "PAAM",
            MetaPath::Pma => "PMA",
        })
    }
}

impl FromStr for MetaPath {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "PAM" => Ok(MetaPath::Pam),
            "PAAM" => Ok(MetaPath::Paam),
            "PMA" => Ok(MetaPath::Pma),
            _ => Err(Error::Argument(format!("unknown meta-path {s:?} (expected PAM, PAAM or PMA)"))),
        }
    }
}

/// Probability of reaching each node of the pattern's final kind from
/// `property` while visiting exactly the pattern's kinds. Nodes with zero
/// probability are omitted.
pub fn meta_path_score(
    g: &Hypergraph,
    property: NodeId,
    pattern: MetaPath,
    sampling: Sampling,
    lazy: bool,
) -> Result<BTreeMap<NodeId, f64>> {
    if property.index() >= g.node_count() {
        return Err(Error::Lookup(format!("unknown property node {property}")));
    }
    if g.kind(property) != Kind::Property {
        return Err(Error::Argument(format!("{} is not a property", g.token(property))));
    }
    sampling.validate()?;
    let mut rows: HashMap<NodeId, TransitionRow> = HashMap::new();
    let mut mass: BTreeMap<NodeId, f64> = BTreeMap::from([(property, 1.0)]);
    for &kind in pattern.steps() {
        let mut next: BTreeMap<NodeId, f64> = BTreeMap::new();
        for (&u, &p) in &mass {
            let row = match rows.get(&u) {
                Some(r) => r,
                None => rows.entry(u).or_insert(transition_row(g, u, sampling, lazy)?),
            };
            for &(v, q) in &row.entries {
                if g.kind(v) == kind {
                    *next.entry(v).or_default() += p * q;
                }
            }
        }
        mass = next;
    }
    mass.retain(|_, p| *p > 0.0);
    Ok(mass)
}

/// Same as [`meta_path_score`], keyed by token.
pub fn meta_path_score_by_token(
    g: &Hypergraph,
    property: &str,
    pattern: MetaPath,
    sampling: Sampling,
    lazy: bool,
) -> Result<BTreeMap<String, f64>> {
    let p = g.require(property)?;
    Ok(meta_path_score(g, p, pattern, sampling, lazy)?
        .into_iter()
        .map(|(n, v)| (g.token(n).to_string(), v))
        .collect())
}

/// `token<TAB>probability`, descending probability then ascending token.
pub fn write_score_map<W: Write>(scores: &BTreeMap<String, f64>, mut out: W) -> std::io::Result<()> {
    let mut rows: Vec<(&String, f64)> = scores.iter().map(|(t, &p)| (t, p)).collect();
    rows.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    for (t, p) in rows {
        writeln!(out, "{t}\t{p}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergraph::tests::graph;
    use crate::walker::Alpha;

    fn node(g: &Hypergraph, t: &str) -> NodeId {
        g.node(t).unwrap()
    }

    #[test]
    fn lazy_uniform_matches_edge_size_formula() {
        let g = graph(&[&["p:P", "a:a", "m:m"], &["p:P", "a:a"]]);
        let p = one_step_probability(&g, node(&g, "p:P"), node(&g, "a:a"), Sampling::Uniform, true).unwrap();
        assert!((p - 5.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn non_lazy_uniform() {
        let g = graph(&[&["p:P", "a:a", "m:m"], &["p:P", "a:a"]]);
        let p = one_step_probability(&g, node(&g, "p:P"), node(&g, "a:a"), Sampling::Uniform, false).unwrap();
        assert!((p - 0.75).abs() < 1e-15);
    }

    #[test]
    fn no_shared_edge_is_zero() {
        let g = graph(&[&["p:P", "a:a"], &["m:m", "a:b"]]);
        let p = one_step_probability(&g, node(&g, "p:P"), node(&g, "m:m"), Sampling::Uniform, false).unwrap();
        assert_eq!(p, 0.0);
        assert!(one_step_probability(&g, NodeId(77), node(&g, "m:m"), Sampling::Uniform, false).is_err());
    }

    #[test]
    fn pam_chain() {
        let g = graph(&[&["p:P", "a:a"], &["a:a", "m:m"]]);
        let s = meta_path_score(&g, node(&g, "p:P"), MetaPath::Pam, Sampling::Uniform, false).unwrap();
        assert_eq!(s.len(), 1);
        assert!((s[&node(&g, "m:m")] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn pma_chain() {
        let g = graph(&[&["p:P", "m:m"], &["m:m", "a:a"]]);
        let s = meta_path_score(&g, node(&g, "p:P"), MetaPath::Pma, Sampling::Uniform, false).unwrap();
        assert!((s[&node(&g, "a:a")] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn pam_without_author_material_links_is_empty() {
        let g = graph(&[&["p:P", "a:a"], &["a:a", "a:b"], &["m:m", "p:Q"]]);
        let s = meta_path_score(&g, node(&g, "p:P"), MetaPath::Pam, Sampling::Uniform, false).unwrap();
        assert!(s.is_empty());
    }

    #[test]
    fn rows_sum_to_one_with_termination() {
        let g = graph(&[&["p:P", "a:a", "a:b"], &["p:P", "m:m"], &["m:m", "a:a"], &["a:b"]]);
        for sampling in [Sampling::Uniform, Sampling::alpha(0.0), Sampling::alpha(2.5), Sampling::Alpha(Alpha::Infinite)] {
            for lazy in [false, true] {
                let mtx = TransitionMatrix::build(&g, sampling, lazy).unwrap();
                for u in g.nodes() {
                    assert!((mtx.row(u).total() - 1.0).abs() < 1e-12, "{sampling} {lazy} {u}");
                    for &(v, _) in &mtx.row(u).entries {
                        assert!(g.edges_of(u).iter().any(|&e| g.edge(e).contains(&v)));
                    }
                }
            }
        }
        let inf = TransitionMatrix::build(&g, Sampling::Alpha(Alpha::Infinite), false).unwrap();
        // the all-author edge {P, a, b} kills half of P's walks
        assert!((inf.termination(node(&g, "p:P")) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn adding_a_shared_edge_never_lowers_first_hop() {
        let base: &[&[&str]] = &[&["p:P", "a:a", "m:x"], &["p:P", "a:b"], &["a:a", "m:m"]];
        let mut more = base.to_vec();
        more.push(&["p:P", "a:a"]);
        let g0 = graph(base);
        let g1 = graph(&more);
        let hop = |g: &Hypergraph| one_step_probability(g, node(g, "p:P"), node(g, "a:a"), Sampling::Uniform, false).unwrap();
        assert!(hop(&g1) >= hop(&g0));
    }

    #[test]
    fn meta_path_names_parse() {
        assert_eq!("paam".parse::<MetaPath>().unwrap(), MetaPath::Paam);
        assert!("PAAAM".parse::<MetaPath>().is_err());
        assert_eq!(MetaPath::Pma.target_kind(), Kind::Author);
    }

    #[test]
    fn score_export_order() {
        let scores = BTreeMap::from([("m:b".to_string(), 0.5), ("m:a".to_string(), 0.5), ("m:c".to_string(), 0.9)]);
        let mut buf = Vec::new();
        write_score_map(&scores, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "m:c\t0.9\nm:a\t0.5\nm:b\t0.5\n");
    }
}
