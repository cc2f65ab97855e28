//! Skip-gram with negative sampling over walk corpora.
//!
//! Every token is paired with the tokens inside a dynamically shrunk window
//! (radius drawn uniformly from `1..=window`). Each pair moves the center's
//! input vector and the output vectors of the context and of `negatives`
//! nodes drawn from the smoothed unigram distribution.

use std::collections::HashMap;
use std::io::{BufRead, Write};
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::alias::AliasTable;
use crate::graph::NodeId;
use crate::sampler::Corpus;

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("corpus has no tokens")]
    EmptyCorpus,
    #[error("node `{0}` is not in the vocabulary")]
    UnknownNode(String),
    #[error("vocabularies differ at node `{0}`")]
    VocabMismatch(String),
    #[error("nothing to concatenate")]
    NoMatrices,
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub dim: usize,
    /// Maximum context radius in emitted tokens.
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub lr_start: f64,
    pub lr_end: f64,
    pub ns_exponent: f64,
    pub rng_seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            dim: 128,
            window: 5,
            negatives: 5,
            epochs: 5,
            lr_start: 0.025,
            lr_end: 0.0001,
            ns_exponent: 0.75,
            rng_seed: 42,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), EmbeddingError> {
        let bad = |m: &str| Err(EmbeddingError::InvalidConfig(m.to_string()));
        if self.dim < 1 {
            return bad("dim must be >= 1");
        }
        if self.window < 1 {
            return bad("window must be >= 1");
        }
        if self.negatives < 1 {
            return bad("negatives must be >= 1");
        }
        if !(self.lr_end > 0.0 && self.lr_end <= self.lr_start) {
            return bad("need 0 < lr_end <= lr_start");
        }
        if !(self.ns_exponent.is_finite() && self.ns_exponent >= 0.0) {
            return bad("ns_exponent must be finite and >= 0");
        }
        Ok(())
    }
}

/// Corpus nodes in order of first appearance, with token counts.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocab {
    pub nodes: Vec<NodeId>,
    pub counts: Vec<u64>,
    row_of: HashMap<NodeId, usize>,
}

impl Vocab {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn row(&self, node: NodeId) -> Option<usize> {
        self.row_of.get(&node).copied()
    }

    pub fn count(&self, node: NodeId) -> Option<u64> {
        self.row(node).map(|r| self.counts[r])
    }
}

pub fn build_vocab(corpus: &Corpus) -> Result<Vocab, EmbeddingError> {
    let mut nodes = Vec::new();
    let mut counts = Vec::new();
    let mut row_of = HashMap::new();
    for &tok in corpus.sequences.iter().flatten() {
        let row = *row_of.entry(tok).or_insert_with(|| {
            nodes.push(tok);
            counts.push(0);
            nodes.len() - 1
        });
        counts[row] += 1;
    }
    if nodes.is_empty() {
        return Err(EmbeddingError::EmptyCorpus);
    }
    Ok(Vocab {
        nodes,
        counts,
        row_of,
    })
}

/// Draws vocabulary rows with probability proportional to `count^exponent`.
#[derive(Debug, Clone)]
pub struct NegativeTable {
    table: AliasTable,
}

impl NegativeTable {
    pub fn new(counts: &[u64], exponent: f64) -> Self {
        let weights: Vec<f64> = counts.iter().map(|&c| (c as f64).powf(exponent)).collect();
        Self {
            table: AliasTable::new(&weights),
        }
    }

    pub fn probability(&self, row: usize) -> f64 {
        self.table.probability(row)
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.table.sample(rng)
    }
}

pub fn negative_table(vocab: &Vocab, ns_exponent: f64) -> NegativeTable {
    NegativeTable::new(&vocab.counts, ns_exponent)
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^x)` without overflow.
#[inline]
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `-ln σ(context·center) - Σ ln σ(-negative·center)`.
pub fn sgns_pair_loss(center: &[f64], context: &[f64], negatives: &[&[f64]]) -> f64 {
    softplus(-dot(context, center)) + negatives.iter().map(|n| softplus(dot(n, center))).sum::<f64>()
}

/// Partial derivatives of [`sgns_pair_loss`] with respect to each argument.
#[derive(Debug, Clone, PartialEq)]
pub struct SgnsGradients {
    pub center: Vec<f64>,
    pub context: Vec<f64>,
    pub negatives: Vec<Vec<f64>>,
}

pub fn sgns_gradients(center: &[f64], context: &[f64], negatives: &[&[f64]]) -> SgnsGradients {
    let g_pos = sigmoid(dot(context, center)) - 1.0;
    let mut g_center: Vec<f64> = context.iter().map(|c| g_pos * c).collect();
    let mut g_negs = Vec::with_capacity(negatives.len());
    for n in negatives {
        let g = sigmoid(dot(n, center));
        for (gc, nv) in g_center.iter_mut().zip(n.iter()) {
            *gc += g * nv;
        }
        g_negs.push(center.iter().map(|x| g * x).collect());
    }
    SgnsGradients {
        center: g_center,
        context: center.iter().map(|x| g_pos * x).collect(),
        negatives: g_negs,
    }
}

/// Row-major parameter block. Implemented for plain vectors (single worker)
/// and for relaxed atomics (lock-free multi-worker updates).
trait Params {
    fn load(&self, row: usize, dim: usize, buf: &mut [f64]);
    fn dot_row(&self, row: usize, x: &[f64]) -> f64;
    /// `acc += alpha * self[row]`
    fn accumulate(&self, row: usize, alpha: f64, acc: &mut [f64]);
    /// `self[row] += alpha * x`
    fn add_scaled(&mut self, row: usize, alpha: f64, x: &[f64]);
}

impl Params for Vec<f64> {
    #[inline]
    fn load(&self, row: usize, dim: usize, buf: &mut [f64]) {
        buf.copy_from_slice(&self[row * dim..(row + 1) * dim]);
    }

    #[inline]
    fn dot_row(&self, row: usize, x: &[f64]) -> f64 {
        let d = x.len();
        dot(&self[row * d..(row + 1) * d], x)
    }

    #[inline]
    fn accumulate(&self, row: usize, alpha: f64, acc: &mut [f64]) {
        let d = acc.len();
        for (a, w) in acc.iter_mut().zip(&self[row * d..(row + 1) * d]) {
            *a += alpha * w;
        }
    }

    #[inline]
    fn add_scaled(&mut self, row: usize, alpha: f64, x: &[f64]) {
        let d = x.len();
        for (w, v) in self[row * d..(row + 1) * d].iter_mut().zip(x) {
            *w += alpha * v;
        }
    }
}

struct SharedParams<'a>(&'a [AtomicU64]);

impl SharedParams<'_> {
    #[inline]
    fn get(&self, i: usize) -> f64 {
        f64::from_bits(self.0[i].load(Ordering::Relaxed))
    }
}

impl Params for SharedParams<'_> {
    fn load(&self, row: usize, dim: usize, buf: &mut [f64]) {
        for (k, b) in buf.iter_mut().enumerate() {
            *b = self.get(row * dim + k);
        }
    }

    fn dot_row(&self, row: usize, x: &[f64]) -> f64 {
        let d = x.len();
        x.iter().enumerate().map(|(k, v)| v * self.get(row * d + k)).sum()
    }

    fn accumulate(&self, row: usize, alpha: f64, acc: &mut [f64]) {
        let d = acc.len();
        for (k, a) in acc.iter_mut().enumerate() {
            *a += alpha * self.get(row * d + k);
        }
    }

    fn add_scaled(&mut self, row: usize, alpha: f64, x: &[f64]) {
        let d = x.len();
        for (k, v) in x.iter().enumerate() {
            let cell = &self.0[row * d + k];
            let w = f64::from_bits(cell.load(Ordering::Relaxed));
            cell.store((w + alpha * v).to_bits(), Ordering::Relaxed);
        }
    }
}

/// One SGD step on a (center, context, negatives) example; returns the loss
/// evaluated before the step. Output rows are read before they are written,
/// so with distinct rows this is an exact gradient step.
#[allow(clippy::too_many_arguments)]
fn sgd_update<P: Params>(
    input: &mut P,
    output: &mut P,
    center: usize,
    context: usize,
    negatives: &[usize],
    lr: f64,
    x: &mut [f64],
    neu: &mut [f64],
) -> f64 {
    input.load(center, x.len(), x);
    neu.iter_mut().for_each(|v| *v = 0.0);
    let mut loss = 0.0;
    for (target, label) in std::iter::once((context, 1.0)).chain(negatives.iter().map(|&n| (n, 0.0))) {
        let s = output.dot_row(target, x);
        loss += if label > 0.0 { softplus(-s) } else { softplus(s) };
        let g = sigmoid(s) - label;
        output.accumulate(target, g, neu);
        output.add_scaled(target, -lr * g, x);
    }
    input.add_scaled(center, -lr, neu);
    loss
}

const NEGATIVE_REDRAWS: usize = 100;

fn draw_negatives<R: Rng + ?Sized>(
    table: &NegativeTable,
    context: usize,
    count: usize,
    rng: &mut R,
    out: &mut Vec<usize>,
) {
    out.clear();
    for _ in 0..count {
        for _ in 0..NEGATIVE_REDRAWS {
            let n = table.sample(rng);
            if n != context {
                out.push(n);
                break;
            }
        }
    }
}

/// Trainer state: input and output vectors over a vocabulary.
#[derive(Debug, Clone)]
pub struct SkipGram {
    pub dim: usize,
    pub vocab: Vocab,
    pub input: Vec<f64>,
    pub output: Vec<f64>,
    table: NegativeTable,
    negatives: usize,
    scratch: (Vec<f64>, Vec<f64>, Vec<usize>),
}

impl SkipGram {
    /// Input rows uniform in `(-0.5/dim, 0.5/dim)`, output rows zero.
    pub fn new(vocab: Vocab, config: &TrainConfig) -> Result<Self, EmbeddingError> {
        config.validate()?;
        if vocab.is_empty() {
            return Err(EmbeddingError::EmptyCorpus);
        }
        let dim = config.dim;
        let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
        let half = 0.5 / dim as f64;
        let input = (0..vocab.len() * dim)
            .map(|_| rng.gen_range(-half..half))
            .collect();
        let table = negative_table(&vocab, config.ns_exponent);
        Ok(Self {
            dim,
            output: vec![0.0; vocab.len() * dim],
            input,
            table,
            negatives: config.negatives,
            scratch: (vec![0.0; dim], vec![0.0; dim], Vec::new()),
            vocab,
        })
    }

    pub fn input_row(&self, row: usize) -> &[f64] {
        &self.input[row * self.dim..(row + 1) * self.dim]
    }

    pub fn output_row(&self, row: usize) -> &[f64] {
        &self.output[row * self.dim..(row + 1) * self.dim]
    }

    pub fn negative_table(&self) -> &NegativeTable {
        &self.table
    }

    /// Loss of one example under the current parameters.
    pub fn pair_loss(&self, center: usize, context: usize, negatives: &[usize]) -> f64 {
        let negs: Vec<&[f64]> = negatives.iter().map(|&n| self.output_row(n)).collect();
        sgns_pair_loss(self.input_row(center), self.output_row(context), &negs)
    }

    /// Gradient step with explicitly supplied negative rows.
    pub fn apply_update(&mut self, center: usize, context: usize, negatives: &[usize], lr: f64) -> f64 {
        let (x, neu, _) = &mut self.scratch;
        sgd_update(&mut self.input, &mut self.output, center, context, negatives, lr, x, neu)
    }

    /// Draws negatives from the table and applies one step. Returns the
    /// pre-step loss.
    pub fn step<R: Rng + ?Sized>(
        &mut self,
        center: NodeId,
        context: NodeId,
        lr: f64,
        rng: &mut R,
    ) -> Result<f64, EmbeddingError> {
        let unknown = |n: NodeId| EmbeddingError::UnknownNode(n.to_string());
        let c = self.vocab.row(center).ok_or_else(|| unknown(center))?;
        let o = self.vocab.row(context).ok_or_else(|| unknown(context))?;
        Ok(self.step_rows(c, o, lr, rng))
    }

    #[inline]
    fn step_rows<R: Rng + ?Sized>(&mut self, center: usize, context: usize, lr: f64, rng: &mut R) -> f64 {
        let (x, neu, negs) = &mut self.scratch;
        draw_negatives(&self.table, context, self.negatives, rng, negs);
        sgd_update(&mut self.input, &mut self.output, center, context, negs, lr, x, neu)
    }
}

/// `sgns_step` in free-function form.
pub fn sgns_step<R: Rng + ?Sized>(
    model: &mut SkipGram,
    center: NodeId,
    context: NodeId,
    lr: f64,
    rng: &mut R,
) -> Result<f64, EmbeddingError> {
    model.step(center, context, lr, rng)
}

/// Published node vectors keyed by external node key.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    keys: Vec<String>,
    index: HashMap<String, usize>,
    dim: usize,
    vectors: Vec<f64>,
    /// Context vectors; only present straight out of training.
    output_vectors: Option<Vec<f64>>,
}

impl EmbeddingMatrix {
    pub fn from_rows(keys: Vec<String>, dim: usize, vectors: Vec<f64>) -> Result<Self, EmbeddingError> {
        if vectors.len() != keys.len() * dim {
            return Err(EmbeddingError::InvalidConfig(format!(
                "{} values for {} rows of dim {dim}",
                vectors.len(),
                keys.len()
            )));
        }
        let mut index = HashMap::with_capacity(keys.len());
        for (i, k) in keys.iter().enumerate() {
            if index.insert(k.clone(), i).is_some() {
                return Err(EmbeddingError::InvalidConfig(format!("duplicate key `{k}`")));
            }
        }
        Ok(Self {
            keys,
            index,
            dim,
            vectors,
            output_vectors: None,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn keys(&self) -> &[String] {
        &self.keys
    }

    pub fn row_index(&self, key: &str) -> Option<usize> {
        self.index.get(key).copied()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.vectors[i * self.dim..(i + 1) * self.dim]
    }

    pub fn vector(&self, key: &str) -> Result<&[f64], EmbeddingError> {
        self.row_index(key)
            .map(|i| self.row(i))
            .ok_or_else(|| EmbeddingError::UnknownNode(key.to_string()))
    }

    pub fn output_vector(&self, key: &str) -> Option<&[f64]> {
        let i = self.row_index(key)?;
        self.output_vectors
            .as_ref()
            .map(|o| &o[i * self.dim..(i + 1) * self.dim])
    }

    /// Drops the context vectors.
    pub fn published(mut self) -> Self {
        self.output_vectors = None;
        self
    }

    pub fn all_finite(&self) -> bool {
        self.vectors.iter().all(|v| v.is_finite())
            && self
                .output_vectors
                .as_ref()
                .is_none_or(|o| o.iter().all(|v| v.is_finite()))
    }
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let na = dot(a, a).sqrt();
    let nb = dot(b, b).sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot(a, b) / (na * nb)
    }
}

/// Per-epoch mean pair loss recorded during training.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainStats {
    pub epoch_loss: Vec<f64>,
    pub pairs: u64,
}

fn linear_lr(config: &TrainConfig, processed: usize, total: usize) -> f64 {
    let frac = processed as f64 / total.max(1) as f64;
    (config.lr_start - (config.lr_start - config.lr_end) * frac).max(config.lr_end)
}

fn finish(model: SkipGram, corpus: &Corpus) -> EmbeddingMatrix {
    let keys = model
        .vocab
        .nodes
        .iter()
        .map(|&n| corpus.key(n).to_string())
        .collect();
    let mut m = EmbeddingMatrix::from_rows(keys, model.dim, model.input).expect("consistent shape");
    m.output_vectors = Some(model.output);
    m
}

fn corpus_rows(corpus: &Corpus, vocab: &Vocab) -> Vec<Vec<u32>> {
    corpus
        .sequences
        .iter()
        .map(|s| s.iter().map(|&n| vocab.row(n).expect("vocab covers corpus") as u32).collect())
        .collect()
}

/// Deterministic single-worker training.
pub fn train(corpus: &Corpus, config: &TrainConfig) -> Result<EmbeddingMatrix, EmbeddingError> {
    train_with_stats(corpus, config).map(|(m, _)| m)
}

pub fn train_with_stats(
    corpus: &Corpus,
    config: &TrainConfig,
) -> Result<(EmbeddingMatrix, TrainStats), EmbeddingError> {
    let vocab = build_vocab(corpus)?;
    let mut model = SkipGram::new(vocab, config)?;
    let rows = corpus_rows(corpus, &model.vocab);
    let total = config.epochs * corpus.token_count();
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    rng.set_stream(1);
    let mut stats = TrainStats::default();
    let mut processed = 0usize;
    for _ in 0..config.epochs {
        let (mut loss, mut pairs) = (0.0, 0u64);
        for seq in &rows {
            for pos in 0..seq.len() {
                let lr = linear_lr(config, processed, total);
                processed += 1;
                let radius = rng.gen_range(1..=config.window as u64) as usize;
                let lo = pos.saturating_sub(radius);
                let hi = (pos + radius).min(seq.len() - 1);
                for ctx in lo..=hi {
                    if ctx == pos {
                        continue;
                    }
                    loss += model.step_rows(seq[pos] as usize, seq[ctx] as usize, lr, &mut rng);
                    pairs += 1;
                }
            }
        }
        stats.epoch_loss.push(if pairs > 0 { loss / pairs as f64 } else { 0.0 });
        stats.pairs += pairs;
    }
    Ok((finish(model, corpus), stats))
}

/// Multi-worker training with unsynchronized updates to shared parameters.
/// Results depend on thread scheduling; `workers <= 1` falls back to [`train`].
pub fn train_parallel(
    corpus: &Corpus,
    config: &TrainConfig,
    workers: usize,
) -> Result<EmbeddingMatrix, EmbeddingError> {
    if workers <= 1 {
        return train(corpus, config);
    }
    let vocab = build_vocab(corpus)?;
    let model = SkipGram::new(vocab, config)?;
    let rows = corpus_rows(corpus, &model.vocab);
    let dim = model.dim;
    let to_atomic = |v: &[f64]| v.iter().map(|x| AtomicU64::new(x.to_bits())).collect::<Vec<_>>();
    let input = to_atomic(&model.input);
    let output = to_atomic(&model.output);
    let total = config.epochs * corpus.token_count();
    let processed = AtomicUsize::new(0);
    let chunk = rows.len().div_ceil(workers).max(1);

    std::thread::scope(|scope| {
        for (w, part) in rows.chunks(chunk).enumerate() {
            let (input, output, processed, table) = (&input, &output, &processed, &model.table);
            scope.spawn(move || {
                let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
                rng.set_stream(1 + w as u64);
                let mut inp = SharedParams(input);
                let mut out = SharedParams(output);
                let (mut x, mut neu, mut negs) = (vec![0.0; dim], vec![0.0; dim], Vec::new());
                for _ in 0..config.epochs {
                    for seq in part {
                        for pos in 0..seq.len() {
                            let lr = linear_lr(config, processed.fetch_add(1, Ordering::Relaxed), total);
                            let radius = rng.gen_range(1..=config.window as u64) as usize;
                            let lo = pos.saturating_sub(radius);
                            let hi = (pos + radius).min(seq.len() - 1);
                            for ctx in lo..=hi {
                                if ctx == pos {
                                    continue;
                                }
                                let context = seq[ctx] as usize;
                                draw_negatives(table, context, config.negatives, &mut rng, &mut negs);
                                sgd_update(&mut inp, &mut out, seq[pos] as usize, context, &negs, lr, &mut x, &mut neu);
                            }
                        }
                    }
                }
            });
        }
    });

    let from_atomic = |v: Vec<AtomicU64>| v.into_iter().map(|a| f64::from_bits(a.into_inner())).collect::<Vec<_>>();
    let model = SkipGram {
        input: from_atomic(input),
        output: from_atomic(output),
        ..model
    };
    Ok(finish(model, corpus))
}

/// Row-wise concatenation in input order. Row order follows the first matrix.
pub fn concat_embeddings(matrices: &[&EmbeddingMatrix]) -> Result<EmbeddingMatrix, EmbeddingError> {
    let (first, rest) = matrices.split_first().ok_or(EmbeddingError::NoMatrices)?;
    for m in rest {
        if m.len() != first.len() {
            let missing = first
                .keys
                .iter()
                .find(|k| m.row_index(k).is_none())
                .or_else(|| m.keys.iter().find(|k| first.row_index(k).is_none()))
                .cloned()
                .unwrap_or_default();
            return Err(EmbeddingError::VocabMismatch(missing));
        }
    }
    let dim: usize = matrices.iter().map(|m| m.dim).sum();
    let mut vectors = Vec::with_capacity(first.len() * dim);
    for key in &first.keys {
        for m in matrices {
            vectors.extend_from_slice(m.vector(key).map_err(|_| EmbeddingError::VocabMismatch(key.clone()))?);
        }
    }
    EmbeddingMatrix::from_rows(first.keys.clone(), dim, vectors)
}

/// Text format: `<rows> <dim>` header, then `<key> <v1> ... <vdim>` per row.
pub fn write_embeddings<W: Write>(m: &EmbeddingMatrix, mut out: W) -> Result<(), EmbeddingError> {
    writeln!(out, "{} {}", m.len(), m.dim)?;
    let mut line = String::new();
    for (i, key) in m.keys.iter().enumerate() {
        line.clear();
        line.push_str(key);
        for v in m.row(i) {
            use std::fmt::Write as _;
            write!(line, " {v}").expect("write to string");
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn read_embeddings<R: BufRead>(reader: R) -> Result<EmbeddingMatrix, EmbeddingError> {
    let mut lines = reader.lines();
    let err = |line: usize, message: String| EmbeddingError::Parse { line, message };
    let header = lines.next().ok_or_else(|| err(1, "empty embedding file".into()))??;
    let mut parts = header.split_whitespace();
    let (Some(n), Some(d), None) = (parts.next(), parts.next(), parts.next()) else {
        return Err(err(1, "header must be `<rows> <dim>`".into()));
    };
    let rows: usize = n.parse().map_err(|_| err(1, format!("bad row count `{n}`")))?;
    let dim: usize = d.parse().map_err(|_| err(1, format!("bad dim `{d}`")))?;
    let mut keys = Vec::with_capacity(rows);
    let mut vectors = Vec::with_capacity(rows * dim);
    for (i, line) in lines.enumerate() {
        let line = line?;
        let line_no = i + 2;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let key = fields.next().expect("non-empty line");
        let before = vectors.len();
        for f in fields {
            vectors.push(
                f.parse::<f64>()
                    .map_err(|_| err(line_no, format!("bad value `{f}`")))?,
            );
        }
        if vectors.len() - before != dim {
            return Err(err(line_no, format!("expected {dim} values, got {}", vectors.len() - before)));
        }
        keys.push(key.to_string());
    }
    if keys.len() != rows {
        return Err(err(1, format!("header declares {rows} rows, found {}", keys.len())));
    }
    EmbeddingMatrix::from_rows(keys, dim, vectors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::{CorpusStats, WalkConfig};

    fn corpus_of(seqs: &[&[&str]]) -> Corpus {
        let mut keys: Vec<String> = Vec::new();
        let sequences = seqs
            .iter()
            .map(|s| {
                s.iter()
                    .map(|k| {
                        let pos = keys.iter().position(|x| x == k).unwrap_or_else(|| {
                            keys.push(k.to_string());
                            keys.len() - 1
                        });
                        NodeId(pos as u32)
                    })
                    .collect()
            })
            .collect();
        Corpus {
            sequences,
            keys,
            config: WalkConfig::default(),
            stats: CorpusStats::default(),
        }
    }

    #[test]
    fn vocab_counts() {
        let c = corpus_of(&[&["a", "b", "a"]]);
        let v = build_vocab(&c).unwrap();
        assert_eq!(v.count(NodeId(0)), Some(2));
        assert_eq!(v.count(NodeId(1)), Some(1));
        assert!(matches!(build_vocab(&corpus_of(&[])), Err(EmbeddingError::EmptyCorpus)));
    }

    #[test]
    fn zero_vector_loss() {
        let z = [0.0; 4];
        let l = sgns_pair_loss(&z, &z, &[&z]);
        assert!((l - 2.0 * std::f64::consts::LN_2).abs() < 1e-12);
        assert!((l - 1.3863).abs() < 1e-4);
    }

    #[test]
    fn loss_decreases_as_context_aligns() {
        let x = [1.0, 0.5];
        let n = [0.2, -0.1];
        let mut prev = f64::INFINITY;
        for s in [-2.0, -1.0, 0.0, 1.0, 2.0, 4.0] {
            let c = [s * x[0], s * x[1]];
            let l = sgns_pair_loss(&x, &c, &[&n]);
            assert!(l < prev);
            prev = l;
        }
        assert!(prev > softplus(dot(&n, &x)) - 1e-12);
    }

    #[test]
    fn zero_learning_rate_is_identity() {
        let c = corpus_of(&[&["a", "b", "c", "a", "b"]]);
        let mut m = SkipGram::new(build_vocab(&c).unwrap(), &TrainConfig { dim: 8, ..Default::default() }).unwrap();
        m.output.iter_mut().enumerate().for_each(|(i, v)| *v = (i as f64).sin());
        let before = m.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        m.step(NodeId(0), NodeId(1), 0.0, &mut rng).unwrap();
        assert_eq!(m.input, before.input);
        assert_eq!(m.output, before.output);
        assert!(matches!(
            m.step(NodeId(9), NodeId(1), 0.1, &mut rng),
            Err(EmbeddingError::UnknownNode(_))
        ));
    }

    #[test]
    fn concat_rules() {
        let a = EmbeddingMatrix::from_rows(vec!["x".into(), "y".into()], 2, vec![1., 2., 3., 4.]).unwrap();
        let b = EmbeddingMatrix::from_rows(vec!["y".into(), "x".into()], 1, vec![9., 8.]).unwrap();
        let c = concat_embeddings(&[&a, &b]).unwrap();
        assert_eq!(c.dim(), 3);
        assert_eq!(c.vector("x").unwrap(), &[1., 2., 8.]);
        assert_eq!(c.vector("y").unwrap(), &[3., 4., 9.]);
        assert_eq!(concat_embeddings(&[&a]).unwrap(), a);
        let d = EmbeddingMatrix::from_rows(vec!["p".into(), "q".into()], 1, vec![0., 0.]).unwrap();
        assert!(matches!(concat_embeddings(&[&a, &d]), Err(EmbeddingError::VocabMismatch(_))));
        let e = EmbeddingMatrix::from_rows(vec!["x".into()], 1, vec![0.]).unwrap();
        assert!(matches!(concat_embeddings(&[&a, &e]), Err(EmbeddingError::VocabMismatch(_))));
        assert!(matches!(concat_embeddings(&[]), Err(EmbeddingError::NoMatrices)));
    }

    #[test]
    fn embedding_file_round_trip() {
        let m = EmbeddingMatrix::from_rows(
            vec!["a1".into(), "p1".into()],
            3,
            vec![0.1, -2.5e-7, 3.0, 1.0 / 3.0, 0.0, -1e10],
        )
        .unwrap();
        let mut buf = Vec::new();
        write_embeddings(&m, &mut buf).unwrap();
        assert!(buf.starts_with(b"2 3\n"));
        let back = read_embeddings(&buf[..]).unwrap();
        assert_eq!(back, m);
        assert!(read_embeddings("2 3\na 1 2 3\n".as_bytes()).is_err());
        assert!(read_embeddings("1 3\na 1 2\n".as_bytes()).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(TrainConfig::default().validate().is_ok());
        for bad in [
            TrainConfig { dim: 0, ..Default::default() },
            TrainConfig { window: 0, ..Default::default() },
            TrainConfig { negatives: 0, ..Default::default() },
            TrainConfig { lr_end: 0.0, ..Default::default() },
            TrainConfig { lr_end: 0.5, ..Default::default() },
        ] {
            assert!(bad.validate().is_err());
        }
    }
}
