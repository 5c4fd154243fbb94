//! Mixed author/material/property hypergraph.
//!
//! One hyperedge per publication; node ids are assigned in sorted token order
//! so the same view always yields the same graph.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;

use crate::corpus::CorpusView;
use crate::error::{Error, Result};
use crate::token::{Kind, KindSet};

const SNAPSHOT_MAGIC: &str = "hyperlit-graph";
const SNAPSHOT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hypergraph {
    tokens: Vec<String>,
    kinds: Vec<Kind>,
    index: HashMap<String, NodeId>,
    edges: Vec<Vec<NodeId>>,
    edge_ids: Vec<String>,
    incidence: Vec<Vec<u32>>,
    window: Option<(i64, i64)>,
}

/// Hop count from a BFS source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Distance {
    Hops(u32),
    Unreachable,
}

impl Distance {
    pub fn hops(self) -> Option<u32> {
        match self {
            Distance::Hops(h) => Some(h),
            Distance::Unreachable => None,
        }
    }

    /// Hop count as a float; unreachable maps to +inf.
    pub fn as_f64(self) -> f64 {
        match self {
            Distance::Hops(h) => f64::from(h),
            Distance::Unreachable => f64::INFINITY,
        }
    }
}

impl Hypergraph {
    /// Build from a window of the corpus. Records without any token are skipped.
    pub fn build(view: &CorpusView<'_>) -> Self {
        let edges = view
            .records()
            .filter(|r| r.node_count() > 0)
            .map(|r| (r.id.clone(), r.tokens().cloned().collect::<Vec<_>>()))
            .collect();
        let mut g = Self::from_edge_lists(edges).expect("corpus tokens are namespaced");
        g.window = Some((view.start(), view.end()));
        g
    }

    /// Build from explicit `(edge id, namespaced tokens)` lists.
    pub fn from_edge_lists(edges: Vec<(String, Vec<String>)>) -> Result<Self> {
        let vocab: BTreeSet<&str> = edges.iter().flat_map(|(_, t)| t.iter().map(String::as_str)).collect();
        let tokens: Vec<String> = vocab.into_iter().map(str::to_string).collect();
        let mut index = HashMap::with_capacity(tokens.len());
        let mut kinds = Vec::with_capacity(tokens.len());
        for (i, tok) in tokens.iter().enumerate() {
            let kind = Kind::of_token(tok)
                .ok_or_else(|| Error::Validation(format!("token {tok:?} has no kind prefix")))?;
            kinds.push(kind);
            index.insert(tok.clone(), NodeId(i as u32));
        }
        let mut edge_nodes = Vec::with_capacity(edges.len());
        let mut edge_ids = Vec::with_capacity(edges.len());
        for (id, toks) in edges {
            let mut nodes: Vec<NodeId> = toks.iter().map(|t| index[t.as_str()]).collect();
            nodes.sort_unstable();
            nodes.dedup();
            if nodes.is_empty() {
                continue;
            }
            edge_nodes.push(nodes);
            edge_ids.push(id);
        }
        Ok(Self::assemble(tokens, kinds, index, edge_nodes, edge_ids, None))
    }

    fn assemble(
        tokens: Vec<String>,
        kinds: Vec<Kind>,
        index: HashMap<String, NodeId>,
        edges: Vec<Vec<NodeId>>,
        edge_ids: Vec<String>,
        window: Option<(i64, i64)>,
    ) -> Self {
        let mut incidence = vec![Vec::new(); tokens.len()];
        for (e, nodes) in edges.iter().enumerate() {
            for n in nodes {
                incidence[n.index()].push(e as u32);
            }
        }
        Hypergraph {
            tokens,
            kinds,
            index,
            edges,
            edge_ids,
            incidence,
            window,
        }
    }

    pub fn node_count(&self) -> usize {
        self.tokens.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn window(&self) -> Option<(i64, i64)> {
        self.window
    }

    pub fn node(&self, token: &str) -> Option<NodeId> {
        self.index.get(token).copied()
    }

    pub fn require(&self, token: &str) -> Result<NodeId> {
        self.node(token)
            .ok_or_else(|| Error::Lookup(format!("{token} is not a node of the graph")))
    }

    pub fn token(&self, n: NodeId) -> &str {
        &self.tokens[n.index()]
    }

    pub fn kind(&self, n: NodeId) -> Kind {
        self.kinds[n.index()]
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.tokens.len() as u32).map(NodeId)
    }

    pub fn nodes_of_kind(&self, kind: Kind) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes().filter(move |&n| self.kind(n) == kind)
    }

    /// d(n): number of incident hyperedges.
    pub fn degree(&self, n: NodeId) -> usize {
        self.incidence[n.index()].len()
    }

    /// Incident hyperedge indexes of `n`.
    pub fn edges_of(&self, n: NodeId) -> &[u32] {
        &self.incidence[n.index()]
    }

    /// Sorted node set of hyperedge `e`.
    pub fn edge(&self, e: u32) -> &[NodeId] {
        &self.edges[e as usize]
    }

    pub fn edge_id(&self, e: u32) -> &str {
        &self.edge_ids[e as usize]
    }

    /// d(e): number of distinct nodes in hyperedge `e`.
    pub fn edge_size(&self, e: u32) -> usize {
        self.edges[e as usize].len()
    }

    pub fn contains_token(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    /// Co-occurrence hop distances from `source` to each target. Only nodes
    /// whose kind is in `intermediates` are expanded past (the source always is).
    pub fn shortest_path_distances(
        &self,
        source: NodeId,
        targets: &BTreeSet<NodeId>,
        intermediates: KindSet,
    ) -> Result<BTreeMap<NodeId, Distance>> {
        if source.index() >= self.node_count() {
            return Err(Error::Lookup(format!("unknown source node {source}")));
        }
        let mut dist = vec![u32::MAX; self.node_count()];
        let mut edge_seen = vec![false; self.edge_count()];
        let mut remaining = targets.iter().filter(|&&t| t != source).count();
        let mut queue = VecDeque::new();
        dist[source.index()] = 0;
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            if remaining == 0 {
                break;
            }
            if u != source && !intermediates.contains(self.kind(u)) {
                continue;
            }
            let next = dist[u.index()] + 1;
            for &e in self.edges_of(u) {
                if std::mem::replace(&mut edge_seen[e as usize], true) {
                    continue;
                }
                for &v in self.edge(e) {
                    if dist[v.index()] == u32::MAX {
                        dist[v.index()] = next;
                        if targets.contains(&v) {
                            remaining -= 1;
                        }
                        queue.push_back(v);
                    }
                }
            }
        }
        Ok(targets
            .iter()
            .map(|&t| {
                let d = match t.index() < dist.len() {
                    true if dist[t.index()] != u32::MAX => Distance::Hops(dist[t.index()]),
                    _ => Distance::Unreachable,
                };
                (t, d)
            })
            .collect())
    }

    /// Write a text snapshot: a version header, the id-ordered token table
    /// and one `record_id<TAB>node ids` line per hyperedge.
    pub fn write_snapshot<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{SNAPSHOT_MAGIC} {SNAPSHOT_VERSION}")?;
        match self.window {
            Some((s, e)) => writeln!(out, "window {s} {e}")?,
            None => writeln!(out, "window -")?,
        }
        writeln!(out, "nodes {}", self.tokens.len())?;
        for t in &self.tokens {
            writeln!(out, "{t}")?;
        }
        writeln!(out, "edges {}", self.edges.len())?;
        for (id, nodes) in self.edge_ids.iter().zip(&self.edges) {
            write!(out, "{id}\t")?;
            for (i, n) in nodes.iter().enumerate() {
                if i > 0 {
                    write!(out, " ")?;
                }
                write!(out, "{}", n.0)?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    pub fn read_snapshot<R: BufRead>(reader: R, origin: &Path) -> Result<Self> {
        let mut lines = reader.lines().enumerate();
        let mut next = |what: &str| -> Result<(usize, String)> {
            match lines.next() {
                Some((i, Ok(l))) => Ok((i + 1, l)),
                Some((_, Err(e))) => Err(Error::io(origin, e)),
                None => Err(Error::parse(origin, 0, format!("unexpected end of snapshot, expected {what}"))),
            }
        };
        let (ln, header) = next("header")?;
        if header != format!("{SNAPSHOT_MAGIC} {SNAPSHOT_VERSION}") {
            return Err(Error::parse(origin, ln, format!("unsupported snapshot header {header:?}")));
        }
        let (ln, window_line) = next("window")?;
        let window = match window_line.split_whitespace().collect::<Vec<_>>()[..] {
            ["window", "-"] => None,
            ["window", s, e] => Some((
                s.parse().map_err(|_| Error::parse(origin, ln, "bad window start"))?,
                e.parse().map_err(|_| Error::parse(origin, ln, "bad window end"))?,
            )),
            _ => return Err(Error::parse(origin, ln, "expected window line")),
        };
        let count = |line: &str, key: &str, ln: usize| -> Result<usize> {
            line.strip_prefix(key)
                .and_then(|r| r.trim().parse().ok())
                .ok_or_else(|| Error::parse(origin, ln, format!("expected `{key} <count>`")))
        };
        let (ln, l) = next("node count")?;
        let n_nodes = count(&l, "nodes", ln)?;
        let mut tokens = Vec::with_capacity(n_nodes);
        let mut kinds = Vec::with_capacity(n_nodes);
        let mut index = HashMap::with_capacity(n_nodes);
        for i in 0..n_nodes {
            let (ln, tok) = next("token")?;
            let kind = Kind::of_token(&tok).ok_or_else(|| Error::parse(origin, ln, "token without kind prefix"))?;
            if index.insert(tok.clone(), NodeId(i as u32)).is_some() {
                return Err(Error::parse(origin, ln, format!("duplicate token {tok}")));
            }
            kinds.push(kind);
            tokens.push(tok);
        }
        let (ln, l) = next("edge count")?;
        let n_edges = count(&l, "edges", ln)?;
        let mut edges = Vec::with_capacity(n_edges);
        let mut edge_ids = Vec::with_capacity(n_edges);
        for _ in 0..n_edges {
            let (ln, l) = next("edge")?;
            let (id, rest) = l
                .split_once('\t')
                .ok_or_else(|| Error::parse(origin, ln, "expected id<TAB>nodes"))?;
            let mut nodes = rest
                .split(' ')
                .map(|s| match s.parse::<u32>() {
                    Ok(v) if (v as usize) < n_nodes => Ok(NodeId(v)),
                    _ => Err(Error::parse(origin, ln, format!("bad node id {s:?}"))),
                })
                .collect::<Result<Vec<_>>>()?;
            nodes.sort_unstable();
            nodes.dedup();
            edges.push(nodes);
            edge_ids.push(id.to_string());
        }
        let g = Self::assemble(tokens, kinds, index, edges, edge_ids, window);
        if let Some(n) = g.nodes().find(|&n| g.degree(n) == 0) {
            return Err(Error::Validation(format!("snapshot node {} has no edges", g.token(n))));
        }
        Ok(g)
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::corpus::{CorpusStore, PublicationRecord};
    use proptest::prelude::*;

    /// Graph from literal namespaced token lists, edge ids `e0`, `e1`, ...
    pub(crate) fn graph(edges: &[&[&str]]) -> Hypergraph {
        Hypergraph::from_edge_lists(
            edges
                .iter()
                .enumerate()
                .map(|(i, e)| (format!("e{i}"), e.iter().map(|s| s.to_string()).collect()))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn shared_author_degree() {
        let store = CorpusStore::from_records(vec![
            PublicationRecord::new("1", 2000, &["x"], &["Fe"], &[]),
            PublicationRecord::new("2", 2000, &["x"], &["Co"], &["magnetic"]),
        ])
        .unwrap();
        let g = Hypergraph::build(&store.full_view());
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.degree(g.node("a:x").unwrap()), 2);
        assert_eq!(g.kind(g.node("p:magnetic").unwrap()), Kind::Property);
    }

    #[test]
    fn edge_size_counts_all_kinds() {
        let g = graph(&[&["a:x", "m:Fe", "m:Co", "p:magnetic"]]);
        assert_eq!(g.edge_size(0), 4);
    }

    #[test]
    fn ids_follow_sorted_token_order() {
        let g = graph(&[&["p:z", "m:b", "a:c"]]);
        let toks: Vec<&str> = g.nodes().map(|n| g.token(n)).collect();
        assert_eq!(toks, vec!["a:c", "m:b", "p:z"]);
    }

    #[test]
    fn identical_papers_stay_two_edges() {
        let g = graph(&[&["a:x", "m:y"], &["a:x", "m:y"]]);
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.degree(g.node("m:y").unwrap()), 2);
    }

    #[test]
    fn degrees_match_record_scan() {
        let recs: Vec<PublicationRecord> = (0..50)
            .map(|i| {
                let authors = [format!("a{}", i % 7), format!("a{}", (i * 3) % 11)];
                let mats = [format!("M{}", i % 5), format!("M{}", (i / 2) % 9)];
                let props: Vec<String> = if i % 4 == 0 { vec!["P".into()] } else { vec![] };
                PublicationRecord::new(format!("r{i}"), 2000 + (i % 3), &authors, &mats, &props)
            })
            .collect();
        let store = CorpusStore::from_records(recs).unwrap();
        let g = Hypergraph::build(&store.full_view());
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for r in store.records() {
            for t in r.tokens() {
                *counts.entry(t).or_default() += 1;
            }
        }
        assert_eq!(counts.len(), g.node_count());
        for (tok, c) in counts {
            assert_eq!(g.degree(g.node(tok).unwrap()), c, "{tok}");
        }
    }

    #[test]
    fn distance_examples() {
        let g = graph(&[&["p:P", "a:a"], &["a:a", "m:m"], &["m:far", "a:b"], &["p:P", "m:near"]]);
        let p = g.node("p:P").unwrap();
        let targets: BTreeSet<NodeId> = ["m:m", "m:far", "m:near", "p:P"].iter().map(|t| g.node(t).unwrap()).collect();
        let d = g.shortest_path_distances(p, &targets, KindSet::ALL).unwrap();
        assert_eq!(d[&g.node("m:near").unwrap()], Distance::Hops(1));
        assert_eq!(d[&g.node("m:m").unwrap()], Distance::Hops(2));
        assert_eq!(d[&g.node("m:far").unwrap()], Distance::Unreachable);
        assert_eq!(d[&p], Distance::Hops(0));
        assert_eq!(Distance::Unreachable.as_f64(), f64::INFINITY);

        let no_authors = KindSet::EMPTY.with(Kind::Material).with(Kind::Property);
        let d = g.shortest_path_distances(p, &targets, no_authors).unwrap();
        assert_eq!(d[&g.node("m:m").unwrap()], Distance::Unreachable);

        assert!(g.shortest_path_distances(NodeId(999), &targets, KindSet::ALL).is_err());
    }

    #[test]
    fn snapshot_round_trip() {
        let g = graph(&[&["p:P", "a:a b"], &["a:a b", "m:m"], &["m:m"]]);
        let mut buf = Vec::new();
        g.write_snapshot(&mut buf).unwrap();
        let back = Hypergraph::read_snapshot(&buf[..], Path::new("mem")).unwrap();
        assert_eq!(g, back);
        let mut again = Vec::new();
        back.write_snapshot(&mut again).unwrap();
        assert_eq!(buf, again);
    }

    #[test]
    fn snapshot_rejects_other_versions() {
        let text = "hyperlit-graph 99\nwindow -\nnodes 0\nedges 0\n";
        assert!(Hypergraph::read_snapshot(text.as_bytes(), Path::new("mem")).is_err());
    }

    fn arb_graph() -> impl Strategy<Value = Hypergraph> {
        let token = prop_oneof![
            (0u8..6).prop_map(|i| format!("a:{i}")),
            (0u8..6).prop_map(|i| format!("m:{i}")),
            (0u8..2).prop_map(|i| format!("p:{i}")),
        ];
        proptest::collection::vec(proptest::collection::vec(token, 1..5), 1..12).prop_map(|edges| {
            Hypergraph::from_edge_lists(edges.into_iter().enumerate().map(|(i, e)| (format!("e{i}"), e)).collect())
                .unwrap()
        })
    }

    proptest! {
        #[test]
        fn incidence_counts_balance(g in arb_graph()) {
            let node_sum: usize = g.nodes().map(|n| g.degree(n)).sum();
            let edge_sum: usize = (0..g.edge_count() as u32).map(|e| g.edge_size(e)).sum();
            prop_assert_eq!(node_sum, edge_sum);
            for n in g.nodes() {
                prop_assert!(g.degree(n) >= 1);
                for &e in g.edges_of(n) {
                    prop_assert!(g.edge(e).contains(&n));
                }
            }
        }

        #[test]
        fn distances_obey_triangle_inequality(g in arb_graph(), picks in proptest::collection::vec(0usize..100, 3)) {
            let n = g.node_count();
            let (a, b, c) = (NodeId((picks[0] % n) as u32), NodeId((picks[1] % n) as u32), NodeId((picks[2] % n) as u32));
            let all: BTreeSet<NodeId> = g.nodes().collect();
            let da = g.shortest_path_distances(a, &all, KindSet::ALL).unwrap();
            let db = g.shortest_path_distances(b, &all, KindSet::ALL).unwrap();
            prop_assert!(da[&c].as_f64() <= da[&b].as_f64() + db[&c].as_f64());
        }
    }
}
