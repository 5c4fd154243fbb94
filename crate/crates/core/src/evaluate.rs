//! Scoring predictions against ground truth and the alien-hypothesis
//! evaluation quantities.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use crate::alien::fmt_beta;
use crate::corpus::{CorpusView, GroundTruthSet, ScoreTable};
use crate::error::{Error, Result};
use crate::predict::RankedPredictions;
use crate::stats::spearman_test;
use crate::token::{namespaced, Kind};

/// Fraction of `preds` that are in the ground truth.
pub fn precision(preds: &RankedPredictions, truth: &GroundTruthSet) -> Result<f64> {
    if preds.is_empty() {
        return Err(Error::Argument("no predictions to score".into()));
    }
    Ok(preds.tokens().filter(|t| truth.contains(t)).count() as f64 / preds.len() as f64)
}

/// Cumulative precision: at each period, the fraction of predictions
/// discovered at or before it.
pub fn precision_timeline(preds: &RankedPredictions, truth: &GroundTruthSet, periods: &[i64]) -> Result<Vec<f64>> {
    if preds.is_empty() {
        return Err(Error::Argument("no predictions to score".into()));
    }
    if periods.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Argument("periods must be strictly ascending".into()));
    }
    let found: Vec<i64> = preds.tokens().filter_map(|t| truth.period_of(t)).collect();
    let n = preds.len() as f64;
    Ok(periods
        .iter()
        .map(|&t| found.iter().filter(|&&p| p <= t).count() as f64 / n)
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrPoint {
    pub threshold: f64,
    pub precision: f64,
    pub recall: f64,
}

/// Precision-recall points, one per distinct score (descending), and the
/// average precision. Positives absent from `scores` are ignored.
pub fn pr_curve(scores: &BTreeMap<String, f64>, truth: &BTreeSet<String>) -> Result<(Vec<PrPoint>, f64)> {
    if scores.is_empty() {
        return Err(Error::Argument("no scores".into()));
    }
    let positives = scores.keys().filter(|k| truth.contains(*k)).count();
    if positives == 0 {
        return Err(Error::Degenerate("no positives among scored items; recall undefined".into()));
    }
    let mut items: Vec<(f64, bool)> = scores.iter().map(|(k, &s)| (s, truth.contains(k))).collect();
    items.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut points = Vec::new();
    let (mut tp, mut seen, mut ap, mut last_recall) = (0usize, 0usize, 0.0, 0.0);
    let mut i = 0;
    while i < items.len() {
        let threshold = items[i].0;
        while i < items.len() && items[i].0 == threshold {
            seen += 1;
            tp += usize::from(items[i].1);
            i += 1;
        }
        let precision = tp as f64 / seen as f64;
        let recall = tp as f64 / positives as f64;
        ap += (recall - last_recall) * precision;
        last_recall = recall;
        points.push(PrPoint { threshold, precision, recall });
    }
    Ok((points, ap))
}

/// Jaccard index of the author sets mentioning `property` and `material`.
pub fn expert_density(view: &CorpusView<'_>, property: &str, material: &str) -> f64 {
    let ap = view.authors_mentioning(&namespaced(Kind::Property, property));
    let am = view.authors_mentioning(&namespaced(Kind::Material, material));
    let union = ap.union(&am).count();
    if union == 0 {
        return 0.0;
    }
    ap.intersection(&am).count() as f64 / union as f64
}

/// Spearman correlation between expert density and discovery period over the
/// discovered materials; returns (rho, two-sided p).
pub fn density_discovery_correlation(
    view: &CorpusView<'_>,
    property: &str,
    truth: &GroundTruthSet,
) -> Result<(f64, f64)> {
    if truth.len() < 3 {
        return Err(Error::Degenerate(format!("{property}: fewer than 3 discoveries")));
    }
    let periods: Vec<f64> = truth.discoveries.values().map(|&p| p as f64).collect();
    if periods.iter().all(|&p| p == periods[0]) {
        return Err(Error::Degenerate(format!("{property}: all discoveries fall in one period")));
    }
    let density: Vec<f64> = truth.discoveries.keys().map(|m| expert_density(view, property, m)).collect();
    spearman_test(&density, &periods)
}

fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Calibrated plausibility from theory scores: min-max normalised τ̂ mapped
/// through `T(x) = logistic(tan(π(x − ½)) + b)`, with `b` placing `T = ½`
/// at the mean τ̂ of the discovered materials.
#[derive(Debug, Clone, PartialEq)]
pub struct PlausibilityModel {
    pub tau_hat: BTreeMap<String, f64>,
    pub tau_mid: f64,
    pub b: f64,
}

impl PlausibilityModel {
    pub fn transform(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else if x >= 1.0 {
            1.0
        } else {
            logistic((std::f64::consts::PI * (x - 0.5)).tan() + self.b)
        }
    }

    pub fn probability(&self, material: &str) -> Option<f64> {
        self.tau_hat.get(material).map(|&x| self.transform(x))
    }

    pub fn confidence(&self, material: &str) -> Option<f64> {
        self.probability(material).map(confidence)
    }

    /// Confidence-weighted share of covered members judged plausible
    /// (`T ≥ ½`). Members without a score are skipped; 0 if none is covered.
    pub fn plausible_mass<'a>(&self, members: impl IntoIterator<Item = &'a str>) -> f64 {
        let (mut hit, mut total) = (0.0, 0.0);
        for t in members.into_iter().filter_map(|m| self.probability(m)) {
            let c = confidence(t);
            total += c;
            if t >= 0.5 {
                hit += c;
            }
        }
        if total == 0.0 { 0.0 } else { hit / total }
    }
}

pub fn confidence(t: f64) -> f64 {
    if t >= 0.5 { t } else { 1.0 - t }
}

pub fn plausibility_transform(tau: &ScoreTable, discovered: &BTreeSet<String>) -> Result<PlausibilityModel> {
    let lo = tau.scores.values().copied().fold(f64::INFINITY, f64::min);
    let hi = tau.scores.values().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return Err(Error::Degenerate("theory scores need at least two distinct values".into()));
    }
    let tau_hat: BTreeMap<String, f64> =
        tau.scores.iter().map(|(k, v)| (k.clone(), (v - lo) / (hi - lo))).collect();
    let inside: Vec<f64> = discovered.iter().filter_map(|m| tau_hat.get(m).copied()).collect();
    if inside.is_empty() {
        return Err(Error::Precondition("no discovered material has a theory score".into()));
    }
    let tau_mid = inside.iter().sum::<f64>() / inside.len() as f64;
    if tau_mid <= 0.0 || tau_mid >= 1.0 {
        return Err(Error::Degenerate(format!("midpoint {tau_mid} lies on the boundary")));
    }
    let b = -(std::f64::consts::PI * (tau_mid - 0.5)).tan();
    Ok(PlausibilityModel { tau_hat, tau_mid, b })
}

/// Top-k predictions at each β of a strictly increasing grid.
#[derive(Debug, Clone)]
pub struct BetaSweep {
    pub grid: Vec<f64>,
    pub predictions: Vec<RankedPredictions>,
}

impl BetaSweep {
    pub fn new(pairs: Vec<(f64, RankedPredictions)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::Argument("empty beta sweep".into()));
        }
        let (grid, predictions): (Vec<f64>, Vec<_>) = pairs.into_iter().unzip();
        if grid.windows(2).any(|w| w[0] >= w[1]) || grid.iter().any(|b| b.abs() > 1.0) {
            return Err(Error::Argument("beta grid must be strictly increasing within [-1, 1]".into()));
        }
        if predictions.iter().any(RankedPredictions::is_empty) {
            return Err(Error::Argument("every beta needs at least one prediction".into()));
        }
        Ok(BetaSweep { grid, predictions })
    }

    pub fn precisions(&self, truth: &GroundTruthSet) -> Vec<f64> {
        self.predictions.iter().map(|p| precision(p, truth).expect("non-empty")).collect()
    }

    pub fn plausible_masses(&self, model: &PlausibilityModel) -> Vec<f64> {
        self.predictions.iter().map(|p| model.plausible_mass(p.tokens())).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BetaConditionals {
    pub discoverable: Vec<f64>,
    pub plausible: Vec<f64>,
    pub mean_discoverable: f64,
    pub mean_plausible: f64,
    /// E[β | plausible] − E[β | discoverable]
    pub gap: f64,
}

fn normalise(likelihood: &[f64], what: &str) -> Result<Vec<f64>> {
    let total: f64 = likelihood.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Degenerate(format!("{what} likelihood is zero at every beta")));
    }
    Ok(likelihood.iter().map(|l| l / total).collect())
}

fn expectation(grid: &[f64], dist: &[f64]) -> f64 {
    grid.iter().zip(dist).map(|(b, p)| b * p).sum()
}

/// Posterior means under a uniform prior and their difference.
pub fn expectation_gap(grid: &[f64], plausible: &[f64], discoverable: &[f64]) -> f64 {
    expectation(grid, plausible) - expectation(grid, discoverable)
}

pub fn beta_conditionals(
    sweep: &BetaSweep,
    truth: &GroundTruthSet,
    model: &PlausibilityModel,
) -> Result<BetaConditionals> {
    let discoverable = normalise(&sweep.precisions(truth), "discovery")?;
    let plausible = normalise(&sweep.plausible_masses(model), "plausibility")?;
    let mean_discoverable = expectation(&sweep.grid, &discoverable);
    let mean_plausible = expectation(&sweep.grid, &plausible);
    Ok(BetaConditionals {
        discoverable,
        plausible,
        mean_discoverable,
        mean_plausible,
        gap: mean_plausible - mean_discoverable,
    })
}

/// Per β, the probability a prediction is both undiscovered and plausible:
/// `(1 − precision) · plausible mass over the undiscovered predictions`.
pub fn joint_complementarity(
    sweep: &BetaSweep,
    truth: &GroundTruthSet,
    model: &PlausibilityModel,
) -> Vec<(f64, f64)> {
    sweep
        .grid
        .iter()
        .zip(&sweep.predictions)
        .map(|(&b, preds)| {
            let miss = 1.0 - precision(preds, truth).expect("non-empty");
            let undiscovered = preds.tokens().filter(|t| !truth.contains(t));
            (b, miss * model.plausible_mass(undiscovered))
        })
        .collect()
}

/// β with the largest value; the first one wins ties.
pub fn argmax_beta(series: &[(f64, f64)]) -> Option<f64> {
    series
        .iter()
        .fold(None, |best: Option<(f64, f64)>, &(b, v)| match best {
            Some((_, bv)) if bv >= v => best,
            _ => Some((b, v)),
        })
        .map(|(b, _)| b)
}

/// Discoverer precision per period (fraction of predicted authors who
/// published a discovery in that period) and in total (authors with any
/// discovery, counted once).
pub fn discoverer_precision(
    preds: &RankedPredictions,
    discoverers: &BTreeMap<String, BTreeSet<i64>>,
    periods: &[i64],
) -> Result<(Vec<f64>, f64)> {
    if preds.is_empty() {
        return Err(Error::Argument("no predictions to score".into()));
    }
    let n = preds.len() as f64;
    let per_period = periods
        .iter()
        .map(|t| {
            preds
                .tokens()
                .filter(|a| discoverers.get(*a).is_some_and(|ps| ps.contains(t)))
                .count() as f64
                / n
        })
        .collect();
    let total = preds.tokens().filter(|a| discoverers.contains_key(*a)).count() as f64 / n;
    Ok((per_period, total))
}

/// One line of the long-format evaluation report.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub property: String,
    pub metric: String,
    /// Period, β, or `-` for summary rows.
    pub key: String,
    pub value: f64,
}

impl ReportRow {
    pub fn new(property: &str, metric: &str, key: impl ToString, value: f64) -> Self {
        ReportRow {
            property: property.to_string(),
            metric: metric.to_string(),
            key: key.to_string(),
            value,
        }
    }

    pub fn at_beta(property: &str, metric: &str, beta: f64, value: f64) -> Self {
        ReportRow::new(property, metric, fmt_beta(beta), value)
    }
}

pub fn write_report<W: Write>(rows: &[ReportRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "property\tmetric\tkey\tvalue")?;
    for r in rows {
        writeln!(out, "{}\t{}\t{}\t{}", r.property, r.metric, r.key, r.value)?;
    }
    Ok(())
}
