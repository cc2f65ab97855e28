//! Co-authorship link prediction: labeled pair construction, Hadamard edge
//! features, two classifiers and repeated-split AUC evaluation.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedding::{EmbeddingError, EmbeddingMatrix};
use crate::graph::{HeteroGraph, NodeId};

pub const AUTHOR: &str = "author";
pub const PAPER: &str = "paper";
pub const VENUE: &str = "venue";

#[derive(Debug, Error)]
pub enum LinkPredError {
    #[error("both classes are required")]
    DegenerateLabels,
    #[error("only {available} valid negative pairs for {requested} requested")]
    Exhausted { requested: usize, available: usize },
    #[error("need at least {min} labeled pairs, got {got}")]
    TooFewPairs { min: usize, got: usize },
    #[error("invalid pair set: {0}")]
    InvalidPairs(String),
    #[error("invalid evaluation config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn unordered(u: NodeId, v: NodeId) -> (NodeId, NodeId) {
    if u <= v {
        (u, v)
    } else {
        (v, u)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractStats {
    pub records: usize,
    pub unmatched_author: usize,
    pub not_new: usize,
    pub duplicates: usize,
    pub kept: usize,
}

/// Keeps eval-window co-author pairs whose authors are both train-graph
/// authors and who share no paper in the train graph. Output is sorted.
pub fn extract_positive_pairs(
    train: &HeteroGraph,
    eval_pairs: &[(String, String)],
) -> (Vec<(NodeId, NodeId)>, ExtractStats) {
    let mut stats = ExtractStats {
        records: eval_pairs.len(),
        ..Default::default()
    };
    let author = train.type_of(AUTHOR);
    let paper = train.type_of(PAPER);
    let mut seen = HashSet::new();
    for (a, b) in eval_pairs {
        let resolve = |k: &str| {
            train
                .lookup(k)
                .filter(|&n| author.is_some() && train.node_type(n).ok() == author)
        };
        let (Some(u), Some(v)) = (resolve(a), resolve(b)) else {
            stats.unmatched_author += 1;
            continue;
        };
        if u == v {
            stats.duplicates += 1;
            continue;
        }
        if paper.is_some_and(|p| train.share_neighbor_of_type(u, v, p)) {
            stats.not_new += 1;
            continue;
        }
        if !seen.insert(unordered(u, v)) {
            stats.duplicates += 1;
        }
    }
    let mut pairs: Vec<_> = seen.into_iter().collect();
    pairs.sort_unstable();
    stats.kept = pairs.len();
    (pairs, stats)
}

/// Draws `count` distinct unordered pairs uniformly from the nodes that occur
/// in `positives`, skipping positive pairs and train co-author pairs.
pub fn sample_negative_pairs<R: Rng + ?Sized>(
    positives: &[(NodeId, NodeId)],
    train: &HeteroGraph,
    count: usize,
    rng: &mut R,
) -> Result<Vec<(NodeId, NodeId)>, LinkPredError> {
    let mut pool: Vec<NodeId> = positives.iter().flat_map(|&(u, v)| [u, v]).collect();
    pool.sort_unstable();
    pool.dedup();
    let paper = train.type_of(PAPER);
    let forbidden: HashSet<(NodeId, NodeId)> = positives.iter().map(|&(u, v)| unordered(u, v)).collect();
    let valid = |u: NodeId, v: NodeId| {
        !forbidden.contains(&unordered(u, v)) && !paper.is_some_and(|p| train.share_neighbor_of_type(u, v, p))
    };

    let n = pool.len() as u64;
    let mut chosen = Vec::with_capacity(count);
    let mut taken = HashSet::with_capacity(count);
    if n >= 2 {
        let budget = 100 * count + 1000;
        for _ in 0..budget {
            if chosen.len() == count {
                break;
            }
            let i = rng.gen_range(0..n) as usize;
            let j = rng.gen_range(0..n) as usize;
            if i == j {
                continue;
            }
            let pair = unordered(pool[i], pool[j]);
            if valid(pair.0, pair.1) && taken.insert(pair) {
                chosen.push(pair);
            }
        }
    }
    if chosen.len() == count {
        return Ok(chosen);
    }

    // Rejection ran dry: enumerate what is left and finish without replacement.
    let mut rest = Vec::new();
    for (a, &u) in pool.iter().enumerate() {
        for &v in &pool[a + 1..] {
            if valid(u, v) && !taken.contains(&(u, v)) {
                rest.push((u, v));
            }
        }
    }
    let needed = count - chosen.len();
    if rest.len() < needed {
        return Err(LinkPredError::Exhausted {
            requested: count,
            available: chosen.len() + rest.len(),
        });
    }
    rest.shuffle(rng);
    chosen.extend(rest.into_iter().take(needed));
    Ok(chosen)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    EvalPositive,
    SampledNegative,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledPair {
    pub u: String,
    pub v: String,
    pub label: u8,
}

impl LabeledPair {
    pub fn provenance(&self) -> Provenance {
        if self.label == 1 {
            Provenance::EvalPositive
        } else {
            Provenance::SampledNegative
        }
    }
}

/// Balanced set of distinct unordered node pairs with 0/1 labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledPairSet {
    pairs: Vec<LabeledPair>,
}

impl LabeledPairSet {
    pub fn new(pairs: Vec<LabeledPair>) -> Result<Self, LinkPredError> {
        let mut seen = HashSet::new();
        let mut positives = 0usize;
        for p in &pairs {
            if p.u == p.v {
                return Err(LinkPredError::InvalidPairs(format!("self pair `{}`", p.u)));
            }
            if p.label > 1 {
                return Err(LinkPredError::InvalidPairs(format!("label {} is not 0/1", p.label)));
            }
            let key = if p.u < p.v { (&p.u, &p.v) } else { (&p.v, &p.u) };
            if !seen.insert(key) {
                return Err(LinkPredError::InvalidPairs(format!("duplicate pair {}–{}", p.u, p.v)));
            }
            positives += p.label as usize;
        }
        if 2 * positives != pairs.len() {
            return Err(LinkPredError::InvalidPairs(format!(
                "{positives} positives vs {} negatives",
                pairs.len() - positives
            )));
        }
        Ok(Self { pairs })
    }

    /// Positives first, then negatives, each resolved to external keys.
    pub fn from_ids(
        graph: &HeteroGraph,
        positives: &[(NodeId, NodeId)],
        negatives: &[(NodeId, NodeId)],
    ) -> Result<Self, LinkPredError> {
        let key = |n: NodeId| {
            graph
                .key(n)
                .map(str::to_string)
                .map_err(|e| LinkPredError::InvalidPairs(e.to_string()))
        };
        let mut pairs = Vec::with_capacity(positives.len() + negatives.len());
        for (list, label) in [(positives, 1u8), (negatives, 0u8)] {
            for &(u, v) in list {
                pairs.push(LabeledPair {
                    u: key(u)?,
                    v: key(v)?,
                    label,
                });
            }
        }
        Self::new(pairs)
    }

    pub fn pairs(&self) -> &[LabeledPair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn positives(&self) -> usize {
        self.pairs.iter().filter(|p| p.label == 1).count()
    }
}

pub fn write_pairs<W: Write>(set: &LabeledPairSet, header: &[String], mut out: W) -> Result<(), LinkPredError> {
    for h in header {
        writeln!(out, "# {h}")?;
    }
    for p in &set.pairs {
        writeln!(out, "{}\t{}\t{}", p.u, p.v, p.label)?;
    }
    Ok(())
}

pub fn read_pairs<R: BufRead>(reader: R) -> Result<LabeledPairSet, LinkPredError> {
    let mut pairs = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |m: &str| LinkPredError::Parse {
            line: n + 1,
            message: m.to_string(),
        };
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 3 {
            return Err(err("expected `<key_u>\\t<key_v>\\t<0|1>`"));
        }
        let label = match f[2] {
            "0" => 0,
            "1" => 1,
            _ => return Err(err("label must be 0 or 1")),
        };
        pairs.push(LabeledPair {
            u: f[0].to_string(),
            v: f[1].to_string(),
            label,
        });
    }
    LabeledPairSet::new(pairs)
}

/// Elementwise product of the two node vectors.
pub fn hadamard_feature(emb: &EmbeddingMatrix, u: &str, v: &str) -> Result<Vec<f64>, LinkPredError> {
    let a = emb.vector(u)?;
    let b = emb.vector(v)?;
    Ok(a.iter().zip(b).map(|(x, y)| x * y).collect())
}

/// Dense row-major feature matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Features {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Features {
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged feature rows");
            data.extend_from_slice(r);
        }
        Self {
            rows: rows.len(),
            cols,
            data,
        }
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    fn select(&self, idx: &[usize]) -> Self {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Self {
            rows: idx.len(),
            cols: self.cols,
            data,
        }
    }
}

fn check_labels(labels: &[u8]) -> Result<(), LinkPredError> {
    let pos = labels.iter().filter(|&&l| l == 1).count();
    if pos == 0 || pos == labels.len() {
        Err(LinkPredError::DegenerateLabels)
    } else {
        Ok(())
    }
}

pub trait Classifier {
    /// Higher means more likely positive.
    fn score(&self, x: &[f64]) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticConfig {
    pub l2: f64,
    pub iterations: usize,
    pub step: f64,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        Self {
            l2: 1e-4,
            iterations: 500,
            step: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticRegression {
    pub weights: Vec<f64>,
    pub bias: f64,
    mean: Vec<f64>,
    scale: Vec<f64>,
}

/// Mean log-loss plus `l2/2 · |w|²` (bias unpenalized), and its gradient
/// `(dw, db)`. Features are used as given.
pub fn logistic_loss_and_gradient(
    weights: &[f64],
    bias: f64,
    x: &Features,
    labels: &[u8],
    l2: f64,
) -> (f64, Vec<f64>, f64) {
    let n = x.rows as f64;
    let mut grad = vec![0.0; x.cols];
    let mut g_bias = 0.0;
    let mut loss = 0.0;
    for (i, &y) in labels.iter().enumerate() {
        let row = x.row(i);
        let z = bias + row.iter().zip(weights).map(|(a, w)| a * w).sum::<f64>();
        let y = y as f64;
        // log(1 + e^z) - y z
        loss += if z > 0.0 { z + (-z).exp().ln_1p() } else { z.exp().ln_1p() } - y * z;
        let r = crate::embedding::sigmoid(z) - y;
        for (g, a) in grad.iter_mut().zip(row) {
            *g += r * a;
        }
        g_bias += r;
    }
    let reg: f64 = weights.iter().map(|w| w * w).sum::<f64>();
    for (g, w) in grad.iter_mut().zip(weights) {
        *g = *g / n + l2 * w;
    }
    (loss / n + 0.5 * l2 * reg, grad, g_bias / n)
}

fn standardization(x: &Features) -> (Vec<f64>, Vec<f64>) {
    let n = x.rows as f64;
    let mut mean = vec![0.0; x.cols];
    for i in 0..x.rows {
        for (m, v) in mean.iter_mut().zip(x.row(i)) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = vec![0.0; x.cols];
    for i in 0..x.rows {
        for ((s, v), m) in var.iter_mut().zip(x.row(i)).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    let scale = var
        .into_iter()
        .map(|s| {
            let sd = (s / n).sqrt();
            if sd > 0.0 {
                sd
            } else {
                1.0
            }
        })
        .collect();
    (mean, scale)
}

/// Full-batch gradient descent on standardized features.
pub fn train_logistic_regression(
    x: &Features,
    labels: &[u8],
    config: &LogisticConfig,
) -> Result<LogisticRegression, LinkPredError> {
    check_labels(labels)?;
    let (mean, scale) = standardization(x);
    let mut z = x.clone();
    for i in 0..z.rows {
        let c = z.cols;
        for ((v, m), s) in z.data[i * c..(i + 1) * c].iter_mut().zip(&mean).zip(&scale) {
            *v = (*v - m) / s;
        }
    }
    let mut weights = vec![0.0; x.cols];
    let mut bias = 0.0;
    for _ in 0..config.iterations {
        let (_, gw, gb) = logistic_loss_and_gradient(&weights, bias, &z, labels, config.l2);
        for (w, g) in weights.iter_mut().zip(&gw) {
            *w -= config.step * g;
        }
        bias -= config.step * gb;
    }
    Ok(LogisticRegression {
        weights,
        bias,
        mean,
        scale,
    })
}

impl Classifier for LogisticRegression {
    /// Log-odds of the positive class.
    fn score(&self, x: &[f64]) -> f64 {
        self.bias
            + x.iter()
                .zip(&self.weights)
                .zip(self.mean.iter().zip(&self.scale))
                .map(|((v, w), (m, s))| w * (v - m) / s)
                .sum::<f64>()
    }
}

impl LogisticRegression {
    pub fn predict_proba(&self, x: &[f64]) -> f64 {
        crate::embedding::sigmoid(self.score(x))
    }
}

pub const NB_VARIANCE_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianNaiveBayes {
    /// `[negative, positive]`
    pub means: [Vec<f64>; 2],
    pub variances: [Vec<f64>; 2],
    pub log_priors: [f64; 2],
}

pub fn train_naive_bayes(x: &Features, labels: &[u8]) -> Result<GaussianNaiveBayes, LinkPredError> {
    check_labels(labels)?;
    let mut means = [vec![0.0; x.cols], vec![0.0; x.cols]];
    let mut variances = [vec![0.0; x.cols], vec![0.0; x.cols]];
    let mut counts = [0usize; 2];
    for (i, &y) in labels.iter().enumerate() {
        let c = y as usize;
        counts[c] += 1;
        for (m, v) in means[c].iter_mut().zip(x.row(i)) {
            *m += v;
        }
    }
    for c in 0..2 {
        means[c].iter_mut().for_each(|m| *m /= counts[c] as f64);
    }
    for (i, &y) in labels.iter().enumerate() {
        let c = y as usize;
        for ((s, v), m) in variances[c].iter_mut().zip(x.row(i)).zip(&means[c]) {
            *s += (v - m) * (v - m);
        }
    }
    for c in 0..2 {
        variances[c]
            .iter_mut()
            .for_each(|s| *s = (*s / counts[c] as f64).max(NB_VARIANCE_FLOOR));
    }
    let n = labels.len() as f64;
    Ok(GaussianNaiveBayes {
        means,
        variances,
        log_priors: [(counts[0] as f64 / n).ln(), (counts[1] as f64 / n).ln()],
    })
}

impl GaussianNaiveBayes {
    /// `ln p(x | class) + ln P(class)`.
    pub fn joint_log_likelihood(&self, x: &[f64], class: usize) -> f64 {
        let ll: f64 = x
            .iter()
            .zip(&self.means[class])
            .zip(&self.variances[class])
            .map(|((v, m), s)| -0.5 * ((2.0 * std::f64::consts::PI * s).ln() + (v - m) * (v - m) / s))
            .sum();
        ll + self.log_priors[class]
    }

    pub fn predict_proba(&self, x: &[f64]) -> f64 {
        crate::embedding::sigmoid(self.score(x))
    }
}

impl Classifier for GaussianNaiveBayes {
    /// Posterior log-odds of the positive class.
    fn score(&self, x: &[f64]) -> f64 {
        self.joint_log_likelihood(x, 1) - self.joint_log_likelihood(x, 0)
    }
}

/// Mann–Whitney AUC from average ranks; ties count one half.
pub fn auc(scores: &[f64], labels: &[u8]) -> Result<f64, LinkPredError> {
    assert_eq!(scores.len(), labels.len());
    check_labels(labels)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        // ranks i+1 ..= j share their average
        let avg = (i + 1 + j) as f64 / 2.0;
        rank_sum_pos += avg * order[i..j].iter().filter(|&&k| labels[k] == 1).count() as f64;
        i = j;
    }
    let n_pos = labels.iter().filter(|&&l| l == 1).count() as f64;
    let n_neg = labels.len() as f64 - n_pos;
    Ok((rank_sum_pos - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClassifierKind {
    LogisticRegression,
    NaiveBayes,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 2] = [ClassifierKind::LogisticRegression, ClassifierKind::NaiveBayes];

    pub fn short_name(self) -> &'static str {
        match self {
            ClassifierKind::LogisticRegression => "LR",
            ClassifierKind::NaiveBayes => "NB",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub repeats: usize,
    pub train_ratio: f64,
    pub seed: u64,
    pub logistic: LogisticConfig,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            repeats: 10,
            train_ratio: 0.8,
            seed: 42,
            logistic: LogisticConfig::default(),
        }
    }
}

pub const MIN_EVAL_PAIRS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub classifier: ClassifierKind,
    pub aucs: Vec<f64>,
    pub mean_auc: f64,
    pub std_auc: f64,
    pub config: EvalConfig,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Splits each class separately so both sides of every split keep both labels.
fn stratified_split(labels: &[u8], ratio: f64, rng: &mut ChaCha8Rng) -> (Vec<usize>, Vec<usize>) {
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for class in [1u8, 0u8] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        idx.shuffle(rng);
        let cut = ((idx.len() as f64 * ratio).round() as usize).clamp(1, idx.len() - 1);
        train.extend_from_slice(&idx[..cut]);
        test.extend_from_slice(&idx[cut..]);
    }
    (train, test)
}

fn run_repeat(
    features: &Features,
    labels: &[u8],
    config: &EvalConfig,
    repeat: usize,
) -> Result<[f64; 2], LinkPredError> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(repeat as u64);
    let (train_idx, test_idx) = stratified_split(labels, config.train_ratio, &mut rng);
    let x_train = features.select(&train_idx);
    let y_train: Vec<u8> = train_idx.iter().map(|&i| labels[i]).collect();
    let y_test: Vec<u8> = test_idx.iter().map(|&i| labels[i]).collect();

    let lr = train_logistic_regression(&x_train, &y_train, &config.logistic)?;
    let nb = train_naive_bayes(&x_train, &y_train)?;
    let score_with = |c: &dyn Classifier| -> Vec<f64> { test_idx.iter().map(|&i| c.score(features.row(i))).collect() };
    Ok([auc(&score_with(&lr), &y_test)?, auc(&score_with(&nb), &y_test)?])
}

/// Repeated stratified train/test evaluation of every classifier.
pub fn evaluate(
    emb: &EmbeddingMatrix,
    pairs: &LabeledPairSet,
    config: &EvalConfig,
    workers: usize,
) -> Result<Vec<EvalReport>, LinkPredError> {
    if pairs.len() < MIN_EVAL_PAIRS {
        return Err(LinkPredError::TooFewPairs {
            min: MIN_EVAL_PAIRS,
            got: pairs.len(),
        });
    }
    if config.repeats < 1 || !(config.train_ratio > 0.0 && config.train_ratio < 1.0) {
        return Err(LinkPredError::InvalidConfig(format!(
            "repeats={} train_ratio={}",
            config.repeats, config.train_ratio
        )));
    }
    let rows = pairs
        .pairs()
        .iter()
        .map(|p| hadamard_feature(emb, &p.u, &p.v))
        .collect::<Result<Vec<_>, _>>()?;
    let features = Features::from_rows(&rows);
    let labels: Vec<u8> = pairs.pairs().iter().map(|p| p.label).collect();

    let results: Vec<[f64; 2]> = if workers <= 1 {
        (0..config.repeats)
            .map(|r| run_repeat(&features, &labels, config, r))
            .collect::<Result<_, _>>()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| LinkPredError::InvalidConfig(e.to_string()))?;
        pool.install(|| {
            (0..config.repeats)
                .into_par_iter()
                .map(|r| run_repeat(&features, &labels, config, r))
                .collect::<Result<_, _>>()
        })?
    };

    Ok(ClassifierKind::ALL
        .iter()
        .enumerate()
        .map(|(c, &kind)| {
            let aucs: Vec<f64> = results.iter().map(|r| r[c]).collect();
            let (mean_auc, std_auc) = mean_std(&aucs);
            EvalReport {
                classifier: kind,
                aucs,
                mean_auc,
                std_auc,
                config: *config,
            }
        })
        .collect())
}

/// Classifiers as rows, methods as columns, cells `mean±std`.
pub fn render_table(results: &[(String, Vec<EvalReport>)]) -> String {
    let mut out = String::new();
    let width = results.iter().map(|(m, _)| m.len()).max().unwrap_or(0).max(13);
    let _ = write!(out, "{:<10}", "Classifier");
    for (method, _) in results {
        let _ = write!(out, " | {method:>width$}");
    }
    out.push('\n');
    let _ = write!(out, "{}", "-".repeat(10));
    for _ in results {
        let _ = write!(out, "-+-{}", "-".repeat(width));
    }
    out.push('\n');
    for kind in ClassifierKind::ALL {
        let _ = write!(out, "{:<10}", kind.short_name());
        for (_, reports) in results {
            let cell = reports
                .iter()
                .find(|r| r.classifier == kind)
                .map(|r| format!("{:.3}±{:.3}", r.mean_auc, r.std_auc))
                .unwrap_or_else(|| "-".into());
            let _ = write!(out, " | {cell:>width$}");
        }
        out.push('\n');
    }
    out
}

/// One `key=value` record per (classifier, method).
pub fn write_report_records<W: Write>(results: &[(String, Vec<EvalReport>)], mut out: W) -> std::io::Result<()> {
    for (method, reports) in results {
        for r in reports {
            let aucs: Vec<String> = r.aucs.iter().map(|a| format!("{a:.6}")).collect();
            writeln!(
                out,
                "classifier={} method={} mean_auc={:.6} std_auc={:.6} repeats={} train_ratio={} seed={} aucs={}",
                r.classifier.short_name(),
                method,
                r.mean_auc,
                r.std_auc,
                r.config.repeats,
                r.config.train_ratio,
                r.config.seed,
                aucs.join(","),
            )?;
        }
    }
    Ok(())
}
