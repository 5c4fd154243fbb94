//! Publication records, time windows, ground truth and theoretical scores.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::token::{bare, namespaced, Kind};

/// One paper, i.e. one hyperedge. Token sets hold namespaced tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicationRecord {
    pub id: String,
    pub period: i64,
    pub authors: BTreeSet<String>,
    pub materials: BTreeSet<String>,
    pub properties: BTreeSet<String>,
}

impl PublicationRecord {
    /// Build a record from raw (un-prefixed) names.
    pub fn new<S: AsRef<str>>(
        id: impl Into<String>,
        period: i64,
        authors: &[S],
        materials: &[S],
        properties: &[S],
    ) -> Self {
        let ns = |kind, names: &[S]| names.iter().map(|n| namespaced(kind, n.as_ref())).collect();
        PublicationRecord {
            id: id.into(),
            period,
            authors: ns(Kind::Author, authors),
            materials: ns(Kind::Material, materials),
            properties: ns(Kind::Property, properties),
        }
    }

    /// All namespaced tokens of the record, in sorted order.
    pub fn tokens(&self) -> impl Iterator<Item = &String> {
        self.authors
            .iter()
            .chain(self.materials.iter())
            .chain(self.properties.iter())
    }

    pub fn node_count(&self) -> usize {
        self.authors.len() + self.materials.len() + self.properties.len()
    }

    pub fn mentions(&self, token: &str) -> bool {
        match Kind::of_token(token) {
            Some(Kind::Author) => self.authors.contains(token),
            Some(Kind::Material) => self.materials.contains(token),
            Some(Kind::Property) => self.properties.contains(token),
            None => false,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct RawRecord {
    id: String,
    year: i64,
    #[serde(default)]
    authors: Vec<String>,
    #[serde(default)]
    materials: Vec<String>,
    #[serde(default)]
    properties: Vec<String>,
}

impl From<RawRecord> for PublicationRecord {
    fn from(raw: RawRecord) -> Self {
        PublicationRecord::new(raw.id, raw.year, &raw.authors, &raw.materials, &raw.properties)
    }
}

impl From<&PublicationRecord> for RawRecord {
    fn from(rec: &PublicationRecord) -> Self {
        let strip = |set: &BTreeSet<String>| set.iter().map(|t| bare(t).to_string()).collect();
        RawRecord {
            id: rec.id.clone(),
            year: rec.period,
            authors: strip(&rec.authors),
            materials: strip(&rec.materials),
            properties: strip(&rec.properties),
        }
    }
}

/// Immutable, id- and period-indexed collection of records.
#[derive(Debug, Clone, Default)]
pub struct CorpusStore {
    // sorted by (period, id)
    records: Vec<PublicationRecord>,
    by_id: HashMap<String, usize>,
    by_period: BTreeMap<i64, std::ops::Range<usize>>,
}

impl CorpusStore {
    pub fn from_records(records: Vec<PublicationRecord>) -> Result<Self> {
        Self::from_records_bounded(records, None)
    }

    /// Like [`CorpusStore::from_records`], additionally rejecting records whose
    /// period lies outside the inclusive `bounds`.
    pub fn from_records_bounded(
        mut records: Vec<PublicationRecord>,
        bounds: Option<(i64, i64)>,
    ) -> Result<Self> {
        if let Some((lo, hi)) = bounds {
            if let Some(rec) = records.iter().find(|r| r.period < lo || r.period > hi) {
                return Err(Error::Validation(format!(
                    "record {} has period {} outside [{lo}, {hi}]",
                    rec.id, rec.period
                )));
            }
        }
        records.sort_by(|a, b| (a.period, &a.id).cmp(&(b.period, &b.id)));
        let mut by_id = HashMap::with_capacity(records.len());
        for (i, rec) in records.iter().enumerate() {
            if by_id.insert(rec.id.clone(), i).is_some() {
                return Err(Error::Validation(format!("duplicate record id {:?}", rec.id)));
            }
        }
        let mut by_period: BTreeMap<i64, std::ops::Range<usize>> = BTreeMap::new();
        for (i, rec) in records.iter().enumerate() {
            by_period
                .entry(rec.period)
                .and_modify(|r| r.end = i + 1)
                .or_insert(i..i + 1);
        }
        Ok(CorpusStore {
            records,
            by_id,
            by_period,
        })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[PublicationRecord] {
        &self.records
    }

    pub fn get(&self, id: &str) -> Option<&PublicationRecord> {
        self.by_id.get(id).map(|&i| &self.records[i])
    }

    pub fn in_period(&self, period: i64) -> &[PublicationRecord] {
        match self.by_period.get(&period) {
            Some(range) => &self.records[range.clone()],
            None => &[],
        }
    }

    /// Smallest and largest period present.
    pub fn period_span(&self) -> Option<(i64, i64)> {
        let first = *self.by_period.keys().next()?;
        let last = *self.by_period.keys().next_back()?;
        Some((first, last))
    }

    /// View over `[end_period - memory, end_period)`.
    pub fn window(&self, end_period: i64, memory: i64) -> Result<CorpusView<'_>> {
        if memory < 1 {
            return Err(Error::Argument(format!("memory must be >= 1, got {memory}")));
        }
        Ok(CorpusView {
            store: self,
            start: end_period.saturating_sub(memory),
            end: end_period,
        })
    }

    /// View over every record.
    pub fn full_view(&self) -> CorpusView<'_> {
        let (start, end) = match self.period_span() {
            Some((lo, hi)) => (lo, hi.saturating_add(1)),
            None => (0, 0),
        };
        CorpusView {
            store: self,
            start,
            end,
        }
    }

    pub fn contains_token(&self, token: &str) -> bool {
        self.records.iter().any(|r| r.mentions(token))
    }
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<CorpusStore> {
    load_corpus_bounded(path, None)
}

pub fn load_corpus_bounded(path: impl AsRef<Path>, bounds: Option<(i64, i64)>) -> Result<CorpusStore> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let records = read_corpus(BufReader::new(file), path)?;
    CorpusStore::from_records_bounded(records, bounds)
}

/// Parse line-delimited JSON records. `origin` is only used in error messages.
pub fn read_corpus<R: BufRead>(reader: R, origin: &Path) -> Result<Vec<PublicationRecord>> {
    let mut records = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(origin, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawRecord =
            serde_json::from_str(&line).map_err(|e| Error::parse(origin, i + 1, e.to_string()))?;
        records.push(raw.into());
    }
    Ok(records)
}

pub fn write_corpus<W: Write>(store: &CorpusStore, mut out: W) -> std::io::Result<()> {
    for rec in store.records() {
        let line = serde_json::to_string(&RawRecord::from(rec)).map_err(std::io::Error::other)?;
        writeln!(out, "{line}")?;
    }
    Ok(())
}

/// Periods of history a prediction window covers by default.
pub const DEFAULT_MEMORY: i64 = 5;

/// Half-open period window over a store.
#[derive(Debug, Clone, Copy)]
pub struct CorpusView<'a> {
    store: &'a CorpusStore,
    start: i64,
    end: i64,
}

impl<'a> CorpusView<'a> {
    pub fn store(&self) -> &'a CorpusStore {
        self.store
    }

    pub fn start(&self) -> i64 {
        self.start
    }

    pub fn end(&self) -> i64 {
        self.end
    }

    pub fn records(&self) -> impl Iterator<Item = &'a PublicationRecord> + 'a {
        let (start, end) = (self.start, self.end);
        let store = self.store;
        let ranges = if start < end {
            Some(store.by_period.range(start..end))
        } else {
            None
        };
        ranges
            .into_iter()
            .flatten()
            .flat_map(move |(_, r)| store.records[r.clone()].iter())
    }

    pub fn len(&self) -> usize {
        self.records().count()
    }

    pub fn is_empty(&self) -> bool {
        self.records().next().is_none()
    }

    /// Narrow this view to `[end_period - memory, end_period)`, intersected with
    /// the current bounds.
    pub fn window(&self, end_period: i64, memory: i64) -> Result<CorpusView<'a>> {
        let w = self.store.window(end_period, memory)?;
        Ok(CorpusView {
            store: self.store,
            start: w.start.max(self.start),
            end: w.end.min(self.end),
        })
    }

    /// Authors of records in the view that mention `token`.
    pub fn authors_mentioning(&self, token: &str) -> BTreeSet<&'a str> {
        self.records()
            .filter(|r| r.mentions(token))
            .flat_map(|r| r.authors.iter().map(String::as_str))
            .collect()
    }
}

/// First-time property/material associations at or after some period.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruthSet {
    pub property: String,
    pub discoveries: BTreeMap<String, i64>,
}

impl GroundTruthSet {
    pub fn new(property: impl Into<String>) -> Self {
        GroundTruthSet {
            property: property.into(),
            discoveries: BTreeMap::new(),
        }
    }

    pub fn contains(&self, material: &str) -> bool {
        self.discoveries.contains_key(material)
    }

    pub fn period_of(&self, material: &str) -> Option<i64> {
        self.discoveries.get(material).copied()
    }

    pub fn materials(&self) -> BTreeSet<&str> {
        self.discoveries.keys().map(String::as_str).collect()
    }

    pub fn len(&self) -> usize {
        self.discoveries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.discoveries.is_empty()
    }
}

/// Materials whose first co-occurrence with `property` falls at or after
/// `from_period`, with the period of that first co-occurrence.
pub fn derive_ground_truth(store: &CorpusStore, property: &str, from_period: i64) -> Result<GroundTruthSet> {
    let property = namespaced(Kind::Property, property);
    if !store.contains_token(&property) {
        return Err(Error::Lookup(format!("unknown property {property}")));
    }
    let mut prior = BTreeSet::new();
    let mut truth = GroundTruthSet::new(property.clone());
    // records are period-ordered, so the first hit is the earliest
    for rec in store.records().iter().filter(|r| r.properties.contains(&property)) {
        for m in &rec.materials {
            if rec.period < from_period {
                prior.insert(m.clone());
            } else if !prior.contains(m) {
                truth.discoveries.entry(m.clone()).or_insert(rec.period);
            }
        }
    }
    Ok(truth)
}

/// Authors of the records that first report a ground-truth association, with
/// the periods in which they did so.
pub fn derive_discoverers(store: &CorpusStore, truth: &GroundTruthSet) -> BTreeMap<String, BTreeSet<i64>> {
    let mut out: BTreeMap<String, BTreeSet<i64>> = BTreeMap::new();
    for (material, &period) in &truth.discoveries {
        for rec in store.in_period(period) {
            if rec.properties.contains(&truth.property) && rec.materials.contains(material) {
                for a in &rec.authors {
                    out.entry(a.clone()).or_default().insert(period);
                }
            }
        }
    }
    out
}

/// Write ground truth as `property<TAB>material<TAB>period` rows.
pub fn write_ground_truth<W: Write>(sets: &[GroundTruthSet], header: bool, mut out: W) -> std::io::Result<()> {
    if header {
        writeln!(out, "property\tmaterial\tperiod")?;
    }
    for set in sets {
        for (m, p) in &set.discoveries {
            writeln!(out, "{}\t{}\t{}", set.property, m, p)?;
        }
    }
    Ok(())
}

pub fn load_ground_truth(path: impl AsRef<Path>, header: bool) -> Result<Vec<GroundTruthSet>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut by_prop: BTreeMap<String, GroundTruthSet> = BTreeMap::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if (header && i == 0) || line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let [prop, mat, period] = fields[..] else {
            return Err(Error::parse(path, i + 1, "expected 3 tab-separated fields"));
        };
        let period: i64 = period
            .trim()
            .parse()
            .map_err(|_| Error::parse(path, i + 1, format!("bad period {period:?}")))?;
        let prop = namespaced(Kind::Property, prop);
        let mat = namespaced(Kind::Material, mat);
        let set = by_prop
            .entry(prop.clone())
            .or_insert_with(|| GroundTruthSet::new(prop));
        if set.discoveries.insert(mat.clone(), period).is_some() {
            return Err(Error::parse(path, i + 1, format!("duplicate pair for {mat}")));
        }
    }
    Ok(by_prop.into_values().collect())
}

/// Theoretical score per material. May cover only part of a candidate pool.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable {
    pub scores: BTreeMap<String, f64>,
    pub provenance: String,
}

impl ScoreTable {
    pub fn new(scores: BTreeMap<String, f64>, provenance: impl Into<String>) -> Result<Self> {
        if let Some((m, v)) = scores.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Validation(format!("non-finite score {v} for {m}")));
        }
        Ok(ScoreTable {
            scores,
            provenance: provenance.into(),
        })
    }

    pub fn get(&self, material: &str) -> Option<f64> {
        self.scores.get(material).copied()
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

/// Load a `material<TAB>tau` table. A leading `material<TAB>tau` header and
/// `#` comment lines are skipped.
pub fn load_theoretical_scores(path: impl AsRef<Path>) -> Result<ScoreTable> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut scores = BTreeMap::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((mat, tau)) = line.split_once('\t') else {
            return Err(Error::parse(path, i + 1, "expected material<TAB>tau"));
        };
        if i == 0 && tau.trim() == "tau" {
            continue;
        }
        let value: f64 = tau
            .trim()
            .parse()
            .map_err(|_| Error::parse(path, i + 1, format!("non-numeric score {tau:?}")))?;
        if !value.is_finite() {
            return Err(Error::Validation(format!("line {}: non-finite score for {mat}", i + 1)));
        }
        let mat = namespaced(Kind::Material, mat);
        if scores.insert(mat.clone(), value).is_some() {
            return Err(Error::Validation(format!("duplicate score row for {mat}")));
        }
    }
    ScoreTable::new(scores, path.display().to_string())
}
