//! β-tunable fusion of human inaccessibility and plausibility.
//!
//! Alienness is the co-occurrence hop distance from the property to a
//! candidate; plausibility is embedding cosine. Both are mapped to normal
//! scores by rank, standardised, and mixed as `β·ŝ₁ + (1 − |β|)·ŝ₂`.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::corpus::CorpusView;
use crate::embedding::VectorTable;
use crate::error::{Error, Result};
use crate::hypergraph::{Distance, Hypergraph};
use crate::predict::{Ranked, RankedPredictions, DEFAULT_K};
use crate::sequences::SequenceCorpus;
use crate::stats::{fractional_ranks, normal_quantile};
use crate::token::KindSet;

/// What to do with pool members the property cannot reach.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InfiniteSpd {
    /// Unreachable members share the most-alien rank block.
    #[default]
    TopBlock,
    /// Unreachable members are dropped from the pool.
    Exclude,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FusionConfig {
    pub beta: f64,
    pub k: usize,
    pub infinite_spd: InfiniteSpd,
    /// Node kinds a shortest path may pass through.
    pub intermediates: KindSet,
}

impl Default for FusionConfig {
    fn default() -> Self {
        FusionConfig {
            beta: 0.0,
            k: DEFAULT_K,
            infinite_spd: InfiniteSpd::TopBlock,
            intermediates: KindSet::ALL,
        }
    }
}

impl FusionConfig {
    pub fn validate(&self) -> Result<()> {
        check_beta(self.beta)?;
        if self.k < 1 {
            return Err(Error::Config("k must be >= 1".into()));
        }
        Ok(())
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if !(-1.0..=1.0).contains(&beta) {
        return Err(Error::Argument(format!("beta must lie in [-1, 1], got {beta}")));
    }
    Ok(())
}

/// Replace each value by φ(r / (n + 1)) with r its ascending fractional rank.
/// `+∞` entries tie in the top block.
pub fn van_der_waerden(scores: &BTreeMap<String, f64>) -> Result<BTreeMap<String, f64>> {
    if scores.is_empty() {
        return Err(Error::Argument("van der Waerden transform of an empty map".into()));
    }
    if let Some((t, _)) = scores.iter().find(|(_, v)| v.is_nan()) {
        return Err(Error::Argument(format!("NaN score for {t}")));
    }
    let values: Vec<f64> = scores.values().copied().collect();
    let n1 = values.len() as f64 + 1.0;
    Ok(scores
        .keys()
        .zip(fractional_ranks(&values))
        .map(|(k, r)| (k.clone(), normal_quantile(r / n1)))
        .collect())
}

/// Standardise to mean 0 and population standard deviation 1.
pub fn zscore(scores: &BTreeMap<String, f64>) -> Result<BTreeMap<String, f64>> {
    let n = scores.len() as f64;
    let mean = scores.values().sum::<f64>() / n;
    let var = scores.values().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    if !(var > 0.0) || !var.is_finite() {
        return Err(Error::Degenerate("signal has zero variance".into()));
    }
    let sd = var.sqrt();
    Ok(scores.iter().map(|(k, v)| (k.clone(), (v - mean) / sd)).collect())
}

fn standardise(scores: &BTreeMap<String, f64>) -> Result<BTreeMap<String, f64>> {
    zscore(&van_der_waerden(scores)?)
}

/// Weights `(β, 1 − |β|)` applied to (alienness, plausibility).
pub fn mixing_weights(beta: f64) -> (f64, f64) {
    (beta, 1.0 - beta.abs())
}

pub fn fuse(
    alienness: &BTreeMap<String, f64>,
    plausibility: &BTreeMap<String, f64>,
    beta: f64,
) -> Result<BTreeMap<String, f64>> {
    check_beta(beta)?;
    if !alienness.keys().eq(plausibility.keys()) {
        return Err(Error::Argument("alienness and plausibility cover different tokens".into()));
    }
    Standardised::new(alienness, plausibility).map(|s| s.fuse(beta))
}

/// Both signals after the rank-normal transform and standardisation.
#[derive(Debug, Clone)]
struct Standardised {
    alien: BTreeMap<String, f64>,
    plausible: BTreeMap<String, f64>,
}

impl Standardised {
    fn new(alienness: &BTreeMap<String, f64>, plausibility: &BTreeMap<String, f64>) -> Result<Self> {
        Ok(Standardised {
            alien: standardise(alienness)?,
            plausible: standardise(plausibility)?,
        })
    }

    fn fuse(&self, beta: f64) -> BTreeMap<String, f64> {
        let (w1, w2) = mixing_weights(beta);
        self.alien
            .iter()
            .zip(self.plausible.values())
            .map(|((k, a), p)| (k.clone(), w1 * a + w2 * p))
            .collect()
    }
}

/// Raw alienness and plausibility for one property over a candidate pool.
#[derive(Debug, Clone)]
pub struct AlienSignals {
    pub property: String,
    pub spd: BTreeMap<String, Distance>,
    /// Cosine to the property; `None` for members outside the vocabulary.
    pub cosine: BTreeMap<String, Option<f64>>,
    standardised: Standardised,
}

impl AlienSignals {
    pub fn compute(
        g: &Hypergraph,
        table: &VectorTable,
        property: &str,
        pool: &BTreeSet<String>,
        cfg: &FusionConfig,
    ) -> Result<Self> {
        if pool.is_empty() {
            return Err(Error::Argument("candidate pool is empty".into()));
        }
        let source = g.node(property);
        if source.is_none() && !table.contains(property) {
            return Err(Error::Lookup(format!("{property} is in neither the graph nor the vocabulary")));
        }
        let mut spd: BTreeMap<String, Distance> = match source {
            Some(s) => {
                let targets: BTreeSet<_> = pool.iter().filter_map(|m| g.node(m)).collect();
                let found = g.shortest_path_distances(s, &targets, cfg.intermediates)?;
                pool.iter()
                    .map(|m| {
                        let d = g.node(m).and_then(|n| found.get(&n).copied());
                        (m.clone(), d.unwrap_or(Distance::Unreachable))
                    })
                    .collect()
            }
            None => pool.iter().map(|m| (m.clone(), Distance::Unreachable)).collect(),
        };
        if cfg.infinite_spd == InfiniteSpd::Exclude {
            spd.retain(|_, d| *d != Distance::Unreachable);
            if spd.is_empty() {
                return Err(Error::Degenerate(format!("no pool member is reachable from {property}")));
            }
        }
        let cosine: BTreeMap<String, Option<f64>> = spd
            .keys()
            .map(|m| (m.clone(), table.cosine_similarity(property, m).ok()))
            .collect();
        let alien_raw: BTreeMap<String, f64> = spd.iter().map(|(k, d)| (k.clone(), d.as_f64())).collect();
        let plaus_raw: BTreeMap<String, f64> = cosine
            .iter()
            .map(|(k, c)| (k.clone(), c.unwrap_or(f64::NEG_INFINITY)))
            .collect();
        let standardised = Standardised::new(&alien_raw, &plaus_raw)?;
        Ok(AlienSignals {
            property: property.to_string(),
            spd,
            cosine,
            standardised,
        })
    }

    pub fn fuse(&self, beta: f64) -> Result<BTreeMap<String, f64>> {
        check_beta(beta)?;
        Ok(self.standardised.fuse(beta))
    }

    pub fn rank(&self, beta: f64, k: usize) -> Result<RankedPredictions> {
        let fused = self.fuse(beta)?;
        RankedPredictions::from_scores(
            &self.property,
            format!("alien:beta={}", fmt_beta(beta)),
            fused.into_iter().map(|(t, s)| (t, Some(s))).collect(),
            k,
        )
    }
}

pub fn rank_alien(
    g: &Hypergraph,
    table: &VectorTable,
    property: &str,
    pool: &BTreeSet<String>,
    cfg: &FusionConfig,
) -> Result<RankedPredictions> {
    cfg.validate()?;
    AlienSignals::compute(g, table, property, pool, cfg)?.rank(cfg.beta, cfg.k)
}

/// Evenly spaced β values from `lo` to `hi` inclusive, rounded to 1e-9.
pub fn beta_grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || lo > hi {
        return Err(Error::Argument(format!("bad beta grid {lo}..{hi} step {step}")));
    }
    check_beta(lo)?;
    check_beta(hi)?;
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok((0..=n)
        .map(|i| {
            let b = ((lo + i as f64 * step) * 1e9).round() / 1e9;
            if b == 0.0 { 0.0 } else { b }
        })
        .collect())
}

/// The default sweep grid: −0.8 to 0.8 in steps of 0.2.
pub fn default_beta_grid() -> Vec<f64> {
    beta_grid(-0.8, 0.8, 0.2).expect("static grid")
}

/// Top-k predictions at every β of `grid`, in grid order.
pub fn sweep(signals: &AlienSignals, grid: &[f64], k: usize) -> Result<Vec<(f64, RankedPredictions)>> {
    grid.par_iter()
        .map(|&b| Ok((b, signals.rank(b, k)?)))
        .collect()
}

pub fn fmt_beta(beta: f64) -> String {
    let s = format!("{beta:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.to_string() }
}

/// Tab-separated `beta rank token s_final spd cosine` rows under a `#`
/// line of `key=value` fields (property, k, then `extra`) and a column header.
pub fn write_sweep<W: Write>(
    signals: &AlienSignals,
    sweep: &[(f64, RankedPredictions)],
    extra: &[(&str, String)],
    mut out: W,
) -> std::io::Result<()> {
    let k = sweep.first().map_or(0, |(_, p)| p.k);
    write!(out, "# property={} k={k}", signals.property)?;
    for (key, value) in extra {
        write!(out, " {key}={value}")?;
    }
    writeln!(out)?;
    writeln!(out, "beta\trank\ttoken\ts_final\tspd\tcosine")?;
    for (beta, preds) in sweep {
        for (i, e) in preds.entries.iter().enumerate() {
            let spd = match signals.spd.get(&e.token) {
                Some(Distance::Hops(h)) => h.to_string(),
                _ => "inf".into(),
            };
            let cos = match signals.cosine.get(&e.token).copied().flatten() {
                Some(c) => c.to_string(),
                None => "NA".into(),
            };
            let score = e.score.map_or("NA".into(), |s| s.to_string());
            writeln!(out, "{}\t{}\t{}\t{score}\t{spd}\t{cos}", fmt_beta(*beta), i + 1, e.token)?;
        }
    }
    Ok(())
}

/// Inverse of [`write_sweep`] for the ranking part: per-β predictions in file
/// order, plus the header fields.
pub fn read_sweep<R: BufRead>(
    reader: R,
    origin: &Path,
) -> Result<(Vec<(f64, RankedPredictions)>, BTreeMap<String, String>)> {
    let mut fields = BTreeMap::new();
    let mut groups: Vec<(f64, Vec<Ranked>)> = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let ln = i + 1;
        let line = line.map_err(|e| Error::io(origin, e))?;
        if let Some(rest) = line.strip_prefix('#') {
            fields.extend(
                rest.split_whitespace()
                    .filter_map(|kv| kv.split_once('='))
                    .map(|(k, v)| (k.to_string(), v.to_string())),
            );
            continue;
        }
        if line.starts_with("beta\t") || line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        let [beta, _, token, score, _, _] = cols[..] else {
            return Err(Error::parse(origin, ln, "expected 6 tab-separated fields"));
        };
        let beta: f64 = beta.parse().map_err(|_| Error::parse(origin, ln, format!("bad beta {beta:?}")))?;
        let score = match score {
            "NA" => None,
            s => Some(s.parse().map_err(|_| Error::parse(origin, ln, format!("bad score {s:?}")))?),
        };
        let entry = Ranked { token: token.to_string(), score };
        match groups.last_mut() {
            Some((b, entries)) if *b == beta => entries.push(entry),
            _ => groups.push((beta, vec![entry])),
        }
    }
    let property = fields
        .get("property")
        .cloned()
        .ok_or_else(|| Error::parse(origin, 1, "header lacks property"))?;
    let k = match fields.get("k").map(|k| k.parse::<usize>()) {
        Some(Ok(k)) => k,
        _ => return Err(Error::parse(origin, 1, "header lacks a valid k")),
    };
    let sweep = groups
        .into_iter()
        .map(|(beta, entries)| {
            let preds = RankedPredictions {
                property: property.clone(),
                metric: format!("alien:beta={}", fmt_beta(beta)),
                k,
                entries,
            };
            (beta, preds)
        })
        .collect();
    Ok((sweep, fields))
}

/// One sentence per record: its materials then its properties, authors left
/// out. Input for the plausibility embedding.
pub fn record_sentences(view: &CorpusView<'_>) -> SequenceCorpus {
    let mut corpus = SequenceCorpus::new();
    for r in view.records() {
        let sentence: Vec<&String> = r.materials.iter().chain(r.properties.iter()).collect();
        if sentence.len() > 1 {
            corpus.push_tokens(sentence);
        }
    }
    corpus
}
