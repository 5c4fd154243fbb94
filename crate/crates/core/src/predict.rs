//! Discovery and discoverer ranking.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;
use std::str::FromStr;

use crate::corpus::CorpusView;
use crate::embedding::VectorTable;
use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;
use crate::token::{namespaced, Kind};
use crate::transition::{meta_path_score, MetaPath};
use crate::walker::Sampling;

/// Number of predictions kept by default.
pub const DEFAULT_K: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct Ranked {
    pub token: String,
    /// `None` for candidates the metric could not score; they rank last.
    pub score: Option<f64>,
}

/// Top-k list, best first. Scored entries come in non-increasing score order
/// with ties broken by ascending token; unscored entries follow by token.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedPredictions {
    pub property: String,
    pub metric: String,
    pub k: usize,
    pub entries: Vec<Ranked>,
}

impl RankedPredictions {
    /// Rank `scores` and keep the first `k`.
    pub fn from_scores(
        property: impl Into<String>,
        metric: impl Into<String>,
        scores: BTreeMap<String, Option<f64>>,
        k: usize,
    ) -> Result<Self> {
        if k < 1 {
            return Err(Error::Argument("k must be >= 1".into()));
        }
        if let Some((t, _)) = scores.iter().find(|(_, s)| s.is_some_and(f64::is_nan)) {
            return Err(Error::Argument(format!("NaN score for {t}")));
        }
        let mut entries: Vec<Ranked> = scores.into_iter().map(|(token, score)| Ranked { token, score }).collect();
        entries.sort_by(|a, b| match (a.score, b.score) {
            (Some(x), Some(y)) => y.total_cmp(&x).then_with(|| a.token.cmp(&b.token)),
            (Some(_), None) => std::cmp::Ordering::Less,
            (None, Some(_)) => std::cmp::Ordering::Greater,
            (None, None) => a.token.cmp(&b.token),
        });
        entries.truncate(k);
        Ok(RankedPredictions {
            property: property.into(),
            metric: metric.into(),
            k,
            entries,
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|r| r.token.as_str())
    }

    pub fn contains(&self, token: &str) -> bool {
        self.entries.iter().any(|r| r.token == token)
    }

    /// `rank<TAB>token<TAB>score` rows after a `#` header line of
    /// `key=value` fields (property, metric, k, then `extra`).
    pub fn write_tsv<W: Write>(&self, extra: &[(&str, String)], mut out: W) -> std::io::Result<()> {
        write!(out, "# property={} metric={} k={}", self.property, self.metric, self.k)?;
        for (key, value) in extra {
            write!(out, " {key}={value}")?;
        }
        writeln!(out)?;
        for (i, r) in self.entries.iter().enumerate() {
            match r.score {
                Some(s) => writeln!(out, "{}\t{}\t{}", i + 1, r.token, s)?,
                None => writeln!(out, "{}\t{}\tNA", i + 1, r.token)?,
            }
        }
        Ok(())
    }

    /// Inverse of [`RankedPredictions::write_tsv`]; also returns the header fields.
    pub fn read_tsv<R: BufRead>(reader: R, origin: &Path) -> Result<(Self, BTreeMap<String, String>)> {
        let mut lines = reader.lines();
        let header = match lines.next() {
            Some(l) => l.map_err(|e| Error::io(origin, e))?,
            None => return Err(Error::parse(origin, 1, "missing header")),
        };
        let fields: BTreeMap<String, String> = header
            .strip_prefix('#')
            .ok_or_else(|| Error::parse(origin, 1, "header must start with #"))?
            .split_whitespace()
            .filter_map(|kv| kv.split_once('='))
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        let field = |key: &str| {
            fields
                .get(key)
                .cloned()
                .ok_or_else(|| Error::parse(origin, 1, format!("header lacks {key}")))
        };
        let k: usize = field("k")?
            .parse()
            .map_err(|_| Error::parse(origin, 1, "bad k"))?;
        let mut entries = Vec::new();
        for (i, line) in lines.enumerate() {
            let ln = i + 2;
            let line = line.map_err(|e| Error::io(origin, e))?;
            let cols: Vec<&str> = line.split('\t').collect();
            let [_, token, score] = cols[..] else {
                return Err(Error::parse(origin, ln, "expected rank<TAB>token<TAB>score"));
            };
            let score = match score {
                "NA" => None,
                s => Some(s.parse().map_err(|_| Error::parse(origin, ln, format!("bad score {s:?}")))?),
            };
            entries.push(Ranked {
                token: token.to_string(),
                score,
            });
        }
        let preds = RankedPredictions {
            property: field("property")?,
            metric: field("metric")?,
            k,
            entries,
        };
        Ok((preds, fields))
    }
}

/// Materials mentioned in the view that never co-occurred with `property` in
/// any record before the window end.
pub fn candidate_pool(view: &CorpusView<'_>, property: &str) -> BTreeSet<String> {
    let property = namespaced(Kind::Property, property);
    let prior: BTreeSet<&String> = view
        .store()
        .records()
        .iter()
        .filter(|r| r.period < view.end() && r.properties.contains(&property))
        .flat_map(|r| r.materials.iter())
        .collect();
    view.records()
        .flat_map(|r| r.materials.iter())
        .filter(|m| !prior.contains(m))
        .cloned()
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    DeepwalkCosine,
    /// PAM transition probability
    Trans2,
    /// PAAM transition probability
    Trans3,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::DeepwalkCosine, Metric::Trans2, Metric::Trans3];
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::DeepwalkCosine => "deepwalk_cosine",
            Metric::Trans2 => "trans2",
            Metric::Trans3 => "trans3",
        })
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.to_string() == s)
            .ok_or_else(|| Error::Argument(format!("unknown metric {s:?}; valid metrics: deepwalk_cosine, trans2, trans3")))
    }
}

/// What a metric scores against.
#[derive(Debug, Clone, Copy)]
pub enum MetricSource<'a> {
    Embedding(&'a VectorTable),
    Graph {
        graph: &'a Hypergraph,
        sampling: Sampling,
        lazy: bool,
    },
}

/// Score every pool member against `property`. Members outside the metric's
/// domain get `None`.
pub fn score_pool(
    metric: Metric,
    source: MetricSource<'_>,
    property: &str,
    pool: &BTreeSet<String>,
) -> Result<BTreeMap<String, Option<f64>>> {
    match (metric, source) {
        (Metric::DeepwalkCosine, MetricSource::Embedding(table)) => {
            if !table.contains(property) {
                return Err(Error::Lookup(format!("{property} is out of vocabulary")));
            }
            Ok(pool
                .iter()
                .map(|m| (m.clone(), table.cosine_similarity(property, m).ok()))
                .collect())
        }
        (Metric::Trans2 | Metric::Trans3, MetricSource::Graph { graph, sampling, lazy }) => {
            let p = graph.require(property)?;
            let pattern = if metric == Metric::Trans2 { MetaPath::Pam } else { MetaPath::Paam };
            let scores = meta_path_score(graph, p, pattern, sampling, lazy)?;
            Ok(pool
                .iter()
                .map(|m| {
                    let s = graph.node(m).map(|n| scores.get(&n).copied().unwrap_or(0.0));
                    (m.clone(), s)
                })
                .collect())
        }
        (m, _) => Err(Error::Argument(format!("metric {m} needs a different input"))),
    }
}

pub fn rank_discoveries(
    property: &str,
    metric: Metric,
    source: MetricSource<'_>,
    pool: &BTreeSet<String>,
    k: usize,
) -> Result<RankedPredictions> {
    let scores = score_pool(metric, source, property, pool)?;
    RankedPredictions::from_scores(property, metric.to_string(), scores, k)
}

/// Top-k authors by property → material → author transition probability.
/// Authors without such a path are left out.
pub fn rank_discoverers(
    g: &Hypergraph,
    property: &str,
    k: usize,
    sampling: Sampling,
    lazy: bool,
) -> Result<RankedPredictions> {
    let p = g.require(property)?;
    let scores = meta_path_score(g, p, MetaPath::Pma, sampling, lazy)?
        .into_iter()
        .map(|(n, s)| (g.token(n).to_string(), Some(s)))
        .collect();
    RankedPredictions::from_scores(property, "pma", scores, k)
}

/// Authors ranked by the mean of their cosine rank to `property` and to
/// `material`. Reported scores are negated mean ranks, so higher is better.
pub fn rank_discoverers_for_material(
    table: &VectorTable,
    property: &str,
    material: &str,
    k: usize,
) -> Result<RankedPredictions> {
    let authors: Vec<&str> = table
        .tokens()
        .iter()
        .map(String::as_str)
        .filter(|t| Kind::of_token(t) == Some(Kind::Author))
        .collect();
    let ranks = |anchor: &str| -> Result<BTreeMap<&str, usize>> {
        let mut sims = authors
            .iter()
            .map(|&a| Ok((a, table.cosine_similarity(anchor, a)?)))
            .collect::<Result<Vec<_>>>()?;
        sims.sort_by(|x, y| y.1.total_cmp(&x.1).then_with(|| x.0.cmp(y.0)));
        Ok(sims.into_iter().enumerate().map(|(i, (a, _))| (a, i + 1)).collect())
    };
    if !table.contains(property) || !table.contains(material) {
        return Err(Error::Lookup(format!("{property} or {material} is out of vocabulary")));
    }
    let by_property = ranks(property)?;
    let by_material = ranks(material)?;
    let scores = authors
        .iter()
        .map(|&a| {
            let mean = (by_property[a] + by_material[a]) as f64 / 2.0;
            (a.to_string(), Some(-mean))
        })
        .collect();
    RankedPredictions::from_scores(property, format!("mean_rank:{material}"), scores, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{CorpusStore, PublicationRecord};
    use crate::hypergraph::tests::graph;

    fn scores(pairs: &[(&str, Option<f64>)]) -> BTreeMap<String, Option<f64>> {
        pairs.iter().map(|(t, s)| (t.to_string(), *s)).collect()
    }

    #[test]
    fn ties_break_by_token() {
        let r = RankedPredictions::from_scores("p:P", "x", scores(&[("m3", Some(0.5)), ("m1", Some(0.9)), ("m2", Some(0.5))]), 2)
            .unwrap();
        assert_eq!(r.tokens().collect::<Vec<_>>(), vec!["m1", "m2"]);
    }

    #[test]
    fn k_larger_than_pool_and_unscored_last() {
        let r = RankedPredictions::from_scores("p:P", "x", scores(&[("b", None), ("a", None), ("c", Some(-1.0))]), 10).unwrap();
        assert_eq!(r.tokens().collect::<Vec<_>>(), vec!["c", "a", "b"]);
        assert!(RankedPredictions::from_scores("p:P", "x", BTreeMap::new(), 0).is_err());
    }

    #[test]
    fn prediction_tsv_round_trip() {
        let r = RankedPredictions::from_scores("p:P", "trans2", scores(&[("m:a", Some(0.25)), ("m:b", None)]), 5).unwrap();
        let mut buf = Vec::new();
        r.write_tsv(&[("seed", "7".into()), ("window", "1996..2001".into())], &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text, "# property=p:P metric=trans2 k=5 seed=7 window=1996..2001\n1\tm:a\t0.25\n2\tm:b\tNA\n");
        let (back, meta) = RankedPredictions::read_tsv(&buf[..], Path::new("mem")).unwrap();
        assert_eq!(back, r);
        assert_eq!(meta["seed"], "7");
    }

    fn pool_store() -> CorpusStore {
        let rec = |id: &str, y, m: &[&str], p: &[&str]| PublicationRecord::new(id, y, &["x"], m, p);
        CorpusStore::from_records(vec![
            rec("1", 1990, &["old"], &["P"]),
            rec("2", 1994, &["outside"], &[]),
            rec("3", 1996, &["in", "old"], &[]),
            rec("4", 1997, &["known"], &["P"]),
            rec("5", 1998, &["fresh"], &["Q"]),
            rec("6", 2001, &["later"], &["P"]),
        ])
        .unwrap()
    }

    #[test]
    fn pool_rules() {
        let store = pool_store();
        let view = store.window(2001, 5).unwrap();
        let pool = candidate_pool(&view, "P");
        assert_eq!(pool, BTreeSet::from(["m:fresh".to_string(), "m:in".to_string()]));
    }

    #[test]
    fn pool_matches_exhaustive_scan() {
        let recs: Vec<PublicationRecord> = (0..12)
            .map(|i| {
                let mats = [format!("M{}", i % 5), format!("M{}", (i * 7) % 9)];
                let props: Vec<String> = if i % 3 == 0 { vec!["P".into()] } else { vec![] };
                PublicationRecord::new(format!("r{i}"), 1995 + i as i64 / 2, &["a".to_string()], &mats, &props)
            })
            .collect();
        let store = CorpusStore::from_records(recs).unwrap();
        let view = store.window(2000, 3).unwrap();
        let pool = candidate_pool(&view, "P");

        let mut expected = BTreeSet::new();
        for r in store.records() {
            if r.period < 1997 || r.period >= 2000 {
                continue;
            }
            for m in &r.materials {
                let seen_with_p = store
                    .records()
                    .iter()
                    .any(|q| q.period < 2000 && q.properties.contains("p:P") && q.materials.contains(m));
                if !seen_with_p {
                    expected.insert(m.clone());
                }
            }
        }
        assert!(!expected.is_empty());
        assert_eq!(pool, expected);
    }

    #[test]
    fn trans2_order_matches_path_enumeration() {
        let g = graph(&[
            &["p:P", "a:1", "m:x"],
            &["p:P", "a:2"],
            &["a:1", "m:a", "m:b"],
            &["a:2", "m:b", "m:c", "a:3"],
            &["a:3", "m:d", "m:e"],
            &["a:1", "a:2", "m:f"],
            &["m:g", "a:4"],
            &["a:4", "m:h", "p:Q"],
        ]);
        let pool: BTreeSet<String> = ["m:a", "m:b", "m:c", "m:d", "m:e", "m:f", "m:g", "m:h"].iter().map(|s| s.to_string()).collect();
        let src = MetricSource::Graph { graph: &g, sampling: Sampling::Uniform, lazy: false };
        let r = rank_discoveries("p:P", Metric::Trans2, src, &pool, 50).unwrap();

        // enumerate P -e1-> a -e2-> m paths with explicit edge/node choices
        let p = g.node("p:P").unwrap();
        let mut oracle: BTreeMap<String, f64> = pool.iter().map(|m| (m.clone(), 0.0)).collect();
        for &e1 in g.edges_of(p) {
            let c1: Vec<_> = g.edge(e1).iter().filter(|&&n| n != p).collect();
            for &&a in &c1 {
                if g.kind(a) != Kind::Author {
                    continue;
                }
                let pa = 1.0 / g.degree(p) as f64 / c1.len() as f64;
                for &e2 in g.edges_of(a) {
                    let c2: Vec<_> = g.edge(e2).iter().filter(|&&n| n != a).collect();
                    for &&m in &c2 {
                        if let Some(v) = oracle.get_mut(g.token(m)) {
                            *v += pa / g.degree(a) as f64 / c2.len() as f64;
                        }
                    }
                }
            }
        }
        let mut order: Vec<(String, f64)> = oracle.into_iter().collect();
        order.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        let expected: Vec<&str> = order.iter().map(|(t, _)| t.as_str()).collect();
        assert_eq!(r.tokens().collect::<Vec<_>>(), expected);
    }

    #[test]
    fn deepwalk_ranking_puts_oov_last_and_needs_property() {
        let t = VectorTable::new(vec![
            ("p:P".into(), vec![1.0, 0.0]),
            ("m:a".into(), vec![1.0, 1.0]),
            ("m:b".into(), vec![1.0, 0.1]),
        ])
        .unwrap();
        let pool: BTreeSet<String> = ["m:a", "m:b", "m:z"].iter().map(|s| s.to_string()).collect();
        let r = rank_discoveries("p:P", Metric::DeepwalkCosine, MetricSource::Embedding(&t), &pool, 3).unwrap();
        assert_eq!(r.tokens().collect::<Vec<_>>(), vec!["m:b", "m:a", "m:z"]);
        assert!(rank_discoveries("p:Q", Metric::DeepwalkCosine, MetricSource::Embedding(&t), &pool, 3).is_err());
        assert!(rank_discoveries("p:P", Metric::Trans2, MetricSource::Embedding(&t), &pool, 3).is_err());
    }

    #[test]
    fn metric_names() {
        assert_eq!("trans3".parse::<Metric>().unwrap(), Metric::Trans3);
        let err = "trans4".parse::<Metric>().unwrap_err().to_string();
        assert!(err.contains("deepwalk_cosine") && err.contains("trans2"));
    }

    #[test]
    fn discoverers_by_pma() {
        let g = graph(&[&["p:P", "m:m"], &["m:m", "a:a"], &["a:z", "m:q"]]);
        let r = rank_discoverers(&g, "p:P", 5, Sampling::Uniform, false).unwrap();
        assert_eq!(r.entries, vec![Ranked { token: "a:a".into(), score: Some(0.5) }]);
        assert!(rank_discoverers(&g, "p:nope", 5, Sampling::Uniform, false).is_err());

        let sym = graph(&[&["p:P", "m:m"], &["m:m", "a:y", "a:x"]]);
        let r = rank_discoverers(&sym, "p:P", 5, Sampling::Uniform, false).unwrap();
        assert_eq!(r.tokens().collect::<Vec<_>>(), vec!["a:x", "a:y"]);
        assert_eq!(r.entries[0].score, r.entries[1].score);
    }

    #[test]
    fn mean_rank_aggregation() {
        // by angle to P (0°): a3, a2, a1, a5, a4; to M (90°): a1, a2, a4, a3, a5
        // mean ranks: a1 2, a2 2, a3 2.5, a4 4, a5 4.5
        let angle = |deg: f64| vec![deg.to_radians().cos(), deg.to_radians().sin()];
        let t = VectorTable::new(vec![
            ("p:P".into(), angle(0.0)),
            ("m:M".into(), angle(90.0)),
            ("a:a1".into(), angle(45.0)),
            ("a:a2".into(), angle(30.0)),
            ("a:a3".into(), angle(-20.0)),
            ("a:a4".into(), angle(160.0)),
            ("a:a5".into(), angle(-100.0)),
        ])
        .unwrap();
        let r = rank_discoverers_for_material(&t, "p:P", "m:M", 10).unwrap();
        assert_eq!(r.tokens().collect::<Vec<_>>(), vec!["a:a1", "a:a2", "a:a3", "a:a4", "a:a5"]);
        assert_eq!(r.entries[0].score, Some(-2.0));
        assert_eq!(r.entries[2].score, Some(-2.5));
        assert!(rank_discoverers_for_material(&t, "p:P", "m:none", 3).is_err());
    }
}
