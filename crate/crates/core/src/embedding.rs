//! Skip-gram with negative sampling over token sequences, and the vector
//! table it produces.
//!
//! Each (center, context) pair inside a sliding window is a positive example
//! for the center's input vector and the context's output vector; `negatives`
//! output vectors drawn from the unigram distribution raised to 3/4 are the
//! negative examples. Learning rate decays linearly over all epochs.

use std::collections::HashMap;
use std::io::{BufRead, Write};
use std::path::Path;
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::sequences::SequenceCorpus;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub dimension: usize,
    pub window: usize,
    pub epochs: usize,
    /// Negative samples per positive pair.
    pub negatives: usize,
    pub learning_rate: f64,
    /// Floor of the decayed rate, as a fraction of `learning_rate`.
    pub min_learning_rate_ratio: f64,
    pub min_count: u64,
    /// Draw the effective window uniformly from `1..=window` per position.
    pub shrink_window: bool,
    /// Lock-free multi-threaded updates; results then vary between runs.
    pub parallel: bool,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dimension: 200,
            window: 8,
            epochs: 5,
            negatives: 5,
            learning_rate: 0.025,
            min_learning_rate_ratio: 1e-4,
            min_count: 1,
            shrink_window: true,
            parallel: false,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("dimension", self.dimension),
            ("window", self.window),
            ("epochs", self.epochs),
            ("negatives", self.negatives),
        ];
        for (name, v) in positive {
            if v < 1 {
                return Err(Error::Config(format!("{name} must be >= 1")));
            }
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::Config("learning_rate must be positive".into()));
        }
        Ok(())
    }
}

/// token → fixed-dimension vector.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorTable {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
    counts: Vec<u64>,
    dim: usize,
    data: Vec<f64>,
}

impl VectorTable {
    pub fn new(entries: Vec<(String, Vec<f64>)>) -> Result<Self> {
        let dim = entries.first().map_or(0, |(_, v)| v.len());
        let counts = vec![0; entries.len()];
        let mut tokens = Vec::with_capacity(entries.len());
        let mut data = Vec::with_capacity(entries.len() * dim);
        for (t, v) in entries {
            if v.len() != dim {
                return Err(Error::Validation(format!("{t} has dimension {}, expected {dim}", v.len())));
            }
            tokens.push(t);
            data.extend(v);
        }
        Self::from_parts(tokens, counts, dim, data)
    }

    fn from_parts(tokens: Vec<String>, counts: Vec<u64>, dim: usize, data: Vec<f64>) -> Result<Self> {
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::Validation("vector table contains non-finite values".into()));
        }
        let mut index = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            if index.insert(t.clone(), i).is_some() {
                return Err(Error::Validation(format!("duplicate token {t}")));
            }
        }
        Ok(VectorTable {
            tokens,
            index,
            counts,
            dim,
            data,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    /// Training frequency; zero for tables read from disk.
    pub fn count(&self, token: &str) -> Option<u64> {
        self.index.get(token).map(|&i| self.counts[i])
    }

    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.index.get(token).map(|&i| &self.data[i * self.dim..(i + 1) * self.dim])
    }

    fn require(&self, token: &str) -> Result<&[f64]> {
        self.get(token)
            .ok_or_else(|| Error::Lookup(format!("{token} is out of vocabulary")))
    }

    pub fn cosine_similarity(&self, t1: &str, t2: &str) -> Result<f64> {
        Ok(cosine(self.require(t1)?, self.require(t2)?))
    }

    /// `<count> <dim>` header, then `token v1 ... vd` per line.
    pub fn write_text<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{} {}", self.tokens.len(), self.dim)?;
        for (i, t) in self.tokens.iter().enumerate() {
            out.write_all(t.as_bytes())?;
            for x in &self.data[i * self.dim..(i + 1) * self.dim] {
                write!(out, " {x}")?;
            }
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(reader: R, origin: &Path) -> Result<Self> {
        let mut lines = reader.lines();
        let header = match lines.next() {
            Some(l) => l.map_err(|e| Error::io(origin, e))?,
            None => return Err(Error::parse(origin, 1, "missing header")),
        };
        let (count, dim) = match header.split_whitespace().map(str::parse::<usize>).collect::<Vec<_>>()[..] {
            [Ok(c), Ok(d)] => (c, d),
            _ => return Err(Error::parse(origin, 1, "expected `<vocab_count> <dimension>`")),
        };
        let mut tokens = Vec::with_capacity(count);
        let mut data = Vec::with_capacity(count * dim);
        for (i, line) in lines.enumerate() {
            let ln = i + 2;
            let line = line.map_err(|e| Error::io(origin, e))?;
            let mut fields = line.split(' ');
            let token = fields.next().filter(|t| !t.is_empty()).ok_or_else(|| Error::parse(origin, ln, "missing token"))?;
            let before = data.len();
            for f in fields {
                data.push(f.parse::<f64>().map_err(|_| Error::parse(origin, ln, format!("bad number {f:?}")))?);
            }
            if data.len() - before != dim {
                return Err(Error::parse(origin, ln, format!("expected {dim} values")));
            }
            tokens.push(token.to_string());
        }
        if tokens.len() != count {
            return Err(Error::parse(origin, 1, format!("header says {count} rows, found {}", tokens.len())));
        }
        Self::from_parts(tokens, vec![0; count], dim, data)
    }
}

/// Cosine of two vectors, clamped to [-1, 1]; zero if either has zero norm.
pub fn cosine(u: &[f64], v: &[f64]) -> f64 {
    let (mut dot, mut nu, mut nv) = (0.0, 0.0, 0.0);
    for (a, b) in u.iter().zip(v) {
        dot += a * b;
        nu += a * a;
        nv += b * b;
    }
    if nu == 0.0 || nv == 0.0 {
        return 0.0;
    }
    (dot / (nu.sqrt() * nv.sqrt())).clamp(-1.0, 1.0)
}

fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// ln σ(x), stable for large |x|.
fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

/// SGNS loss of one example: `-ln σ(c·o) - Σ_k ln σ(-c·n_k)`.
pub fn sgns_loss(center: &[f64], context: &[f64], negatives: &[&[f64]]) -> f64 {
    -log_sigmoid(dot(center, context)) - negatives.iter().map(|n| log_sigmoid(-dot(center, n))).sum::<f64>()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SgnsGradients {
    pub center: Vec<f64>,
    pub context: Vec<f64>,
    pub negatives: Vec<Vec<f64>>,
}

/// Analytic gradient of [`sgns_loss`] with respect to every vector involved.
pub fn sgns_gradients(center: &[f64], context: &[f64], negatives: &[&[f64]]) -> SgnsGradients {
    let pos = sigmoid(dot(center, context)) - 1.0;
    let mut g_center: Vec<f64> = context.iter().map(|o| pos * o).collect();
    let g_context = center.iter().map(|c| pos * c).collect();
    let mut g_neg = Vec::with_capacity(negatives.len());
    for n in negatives {
        let s = sigmoid(dot(center, n));
        for (gc, x) in g_center.iter_mut().zip(n.iter()) {
            *gc += s * x;
        }
        g_neg.push(center.iter().map(|c| s * c).collect());
    }
    SgnsGradients {
        center: g_center,
        context: g_context,
        negatives: g_neg,
    }
}

/// One SGD update of an output vector against `input`; accumulates the
/// input's update into `input_delta` and returns this term's loss.
fn output_update(input: &[f64], output: &mut [f64], label: bool, lr: f64, input_delta: &mut [f64]) -> f64 {
    let f = dot(input, output);
    let (g, loss) = if label {
        (1.0 - sigmoid(f), -log_sigmoid(f))
    } else {
        (-sigmoid(f), -log_sigmoid(-f))
    };
    let step = lr * g;
    for ((d, o), i) in input_delta.iter_mut().zip(output.iter_mut()).zip(input) {
        *d += step * *o;
        *o += step * i;
    }
    loss
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainReport {
    /// Mean example loss per epoch.
    pub epoch_losses: Vec<f64>,
}

struct Vocab {
    tokens: Vec<String>,
    counts: Vec<u64>,
    /// corpus id → vocab index
    remap: Vec<Option<u32>>,
}

fn build_vocab(corpus: &SequenceCorpus, min_count: u64) -> Vocab {
    let mut raw = vec![0u64; corpus.vocab().len()];
    for seq in corpus.id_sequences() {
        for &id in seq {
            raw[id as usize] += 1;
        }
    }
    let mut kept: Vec<usize> = (0..raw.len()).filter(|&i| raw[i] >= min_count.max(1)).collect();
    kept.sort_by(|&a, &b| raw[b].cmp(&raw[a]).then_with(|| corpus.vocab()[a].cmp(&corpus.vocab()[b])));
    let mut remap = vec![None; raw.len()];
    for (new, &old) in kept.iter().enumerate() {
        remap[old] = Some(new as u32);
    }
    Vocab {
        tokens: kept.iter().map(|&i| corpus.vocab()[i].clone()).collect(),
        counts: kept.iter().map(|&i| raw[i]).collect(),
        remap,
    }
}

pub fn train_sgns(corpus: &SequenceCorpus, cfg: &TrainConfig) -> Result<VectorTable> {
    Ok(train_sgns_with_report(corpus, cfg)?.0)
}

pub fn train_sgns_with_report(corpus: &SequenceCorpus, cfg: &TrainConfig) -> Result<(VectorTable, TrainReport)> {
    cfg.validate()?;
    if corpus.is_empty() {
        return Err(Error::Training("empty corpus".into()));
    }
    let vocab = build_vocab(corpus, cfg.min_count);
    if vocab.tokens.is_empty() {
        return Err(Error::Training(format!("no token occurs at least {} times", cfg.min_count)));
    }
    let sentences: Vec<Vec<u32>> = corpus
        .id_sequences()
        .iter()
        .map(|s| s.iter().filter_map(|&id| vocab.remap[id as usize]).collect::<Vec<_>>())
        .filter(|s: &Vec<u32>| !s.is_empty())
        .collect();
    let noise = WeightedIndex::new(vocab.counts.iter().map(|&c| (c as f64).powf(0.75)))
        .map_err(|e| Error::Training(e.to_string()))?;

    let dim = cfg.dimension;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let scale = 0.5 / dim as f64;
    let input: Vec<f64> = (0..vocab.tokens.len() * dim).map(|_| rng.gen_range(-scale..scale)).collect();
    let output = vec![0.0; input.len()];

    let mut trainer = Trainer {
        cfg,
        sentences: &sentences,
        noise: &noise,
        total_work: (cfg.epochs * sentences.iter().map(Vec::len).sum::<usize>()).max(1),
    };
    let (input, report) = if cfg.parallel {
        trainer.run_parallel(input, output)
    } else {
        trainer.run_sequential(input, output, &mut rng)
    };
    let table = VectorTable::from_parts(vocab.tokens, vocab.counts, dim, input)?;
    Ok((table, report))
}

struct Trainer<'a> {
    cfg: &'a TrainConfig,
    sentences: &'a [Vec<u32>],
    noise: &'a WeightedIndex<f64>,
    total_work: usize,
}

impl Trainer<'_> {
    fn learning_rate(&self, done: usize) -> f64 {
        let frac = 1.0 - done as f64 / self.total_work as f64;
        self.cfg.learning_rate * frac.max(self.cfg.min_learning_rate_ratio)
    }

    fn effective_window<R: Rng>(&self, rng: &mut R) -> usize {
        if self.cfg.shrink_window {
            rng.gen_range(1..=self.cfg.window)
        } else {
            self.cfg.window
        }
    }

    fn run_sequential(&mut self, mut input: Vec<f64>, mut output: Vec<f64>, rng: &mut ChaCha8Rng) -> (Vec<f64>, TrainReport) {
        let dim = self.cfg.dimension;
        let mut report = TrainReport::default();
        let mut delta = vec![0.0; dim];
        let mut done = 0usize;
        for _ in 0..self.cfg.epochs {
            let (mut loss, mut examples) = (0.0, 0usize);
            for sent in self.sentences {
                for (i, &center) in sent.iter().enumerate() {
                    let lr = self.learning_rate(done);
                    done += 1;
                    let w = self.effective_window(rng);
                    let lo = i.saturating_sub(w);
                    let hi = (i + w).min(sent.len() - 1);
                    for (j, &ctx) in sent.iter().enumerate().take(hi + 1).skip(lo) {
                        if j == i {
                            continue;
                        }
                        delta.fill(0.0);
                        let c = center as usize * dim;
                        let center_vec = &input[c..c + dim];
                        let o = ctx as usize * dim;
                        loss += output_update(center_vec, &mut output[o..o + dim], true, lr, &mut delta);
                        for _ in 0..self.cfg.negatives {
                            let neg = self.noise.sample(rng);
                            if neg == ctx as usize {
                                continue;
                            }
                            let n = neg * dim;
                            loss += output_update(center_vec, &mut output[n..n + dim], false, lr, &mut delta);
                        }
                        for (x, d) in input[c..c + dim].iter_mut().zip(&delta) {
                            *x += d;
                        }
                        examples += 1;
                    }
                }
            }
            report.epoch_losses.push(if examples > 0 { loss / examples as f64 } else { 0.0 });
        }
        (input, report)
    }

    fn run_parallel(&mut self, input: Vec<f64>, output: Vec<f64>) -> (Vec<f64>, TrainReport) {
        let dim = self.cfg.dimension;
        let input = AtomicMatrix::new(input);
        let output = AtomicMatrix::new(output);
        let done = AtomicUsize::new(0);
        let mut report = TrainReport::default();
        let chunk = (self.sentences.len() / (4 * rayon::current_num_threads()).max(1)).max(1);
        for epoch in 0..self.cfg.epochs {
            let (loss, examples) = self
                .sentences
                .par_chunks(chunk)
                .enumerate()
                .map(|(ci, sents)| {
                    let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
                    rng.set_stream(((epoch as u64) << 32) | ci as u64);
                    let mut center_vec = vec![0.0; dim];
                    let mut out_vec = vec![0.0; dim];
                    let mut delta = vec![0.0; dim];
                    let (mut loss, mut examples) = (0.0, 0usize);
                    for sent in sents {
                        for (i, &center) in sent.iter().enumerate() {
                            let lr = self.learning_rate(done.fetch_add(1, Ordering::Relaxed));
                            let w = self.effective_window(&mut rng);
                            let lo = i.saturating_sub(w);
                            let hi = (i + w).min(sent.len() - 1);
                            for (j, &ctx) in sent.iter().enumerate().take(hi + 1).skip(lo) {
                                if j == i {
                                    continue;
                                }
                                input.read_row(center as usize, &mut center_vec);
                                delta.fill(0.0);
                                let mut targets = vec![(ctx as usize, true)];
                                for _ in 0..self.cfg.negatives {
                                    let neg = self.noise.sample(&mut rng);
                                    if neg != ctx as usize {
                                        targets.push((neg, false));
                                    }
                                }
                                for (t, label) in targets {
                                    output.read_row(t, &mut out_vec);
                                    let before = out_vec.clone();
                                    loss += output_update(&center_vec, &mut out_vec, label, lr, &mut delta);
                                    for (o, b) in out_vec.iter_mut().zip(&before) {
                                        *o -= b;
                                    }
                                    output.add_row(t, &out_vec);
                                }
                                input.add_row(center as usize, &delta);
                                examples += 1;
                            }
                        }
                    }
                    (loss, examples)
                })
                .reduce(|| (0.0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
            report.epoch_losses.push(if examples > 0 { loss / examples as f64 } else { 0.0 });
        }
        (input.into_inner(), report)
    }
}

/// Row-major f64 matrix shared between threads without locks. Concurrent
/// updates to the same row may overwrite each other.
struct AtomicMatrix {
    data: Vec<AtomicU64>,
}

impl AtomicMatrix {
    fn new(values: Vec<f64>) -> Self {
        AtomicMatrix {
            data: values.into_iter().map(|x| AtomicU64::new(x.to_bits())).collect(),
        }
    }

    fn read_row(&self, row: usize, buf: &mut [f64]) {
        let d = buf.len();
        for (b, a) in buf.iter_mut().zip(&self.data[row * d..(row + 1) * d]) {
            *b = f64::from_bits(a.load(Ordering::Relaxed));
        }
    }

    fn add_row(&self, row: usize, delta: &[f64]) {
        let d = delta.len();
        for (a, x) in self.data[row * d..(row + 1) * d].iter().zip(delta) {
            let cur = f64::from_bits(a.load(Ordering::Relaxed));
            a.store((cur + x).to_bits(), Ordering::Relaxed);
        }
    }

    fn into_inner(self) -> Vec<f64> {
        self.data.into_iter().map(|a| f64::from_bits(a.into_inner())).collect()
    }
}
