//! In-memory method grid: one embedding per hop size, optional concatenation,
//! and an evaluation report per method.

use std::fmt;
use std::str::FromStr;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::datagen::{generate_synthetic, DataError, SyntheticConfig};
use crate::embedding::{concat_embeddings, train, EmbeddingError, EmbeddingMatrix, TrainConfig};
use crate::graph::{HeteroGraph, NodeId};
use crate::linkpred::{
    evaluate, extract_positive_pairs, sample_negative_pairs, EvalConfig, EvalReport, ExtractStats, LabeledPairSet,
    LinkPredError,
};
use crate::sampler::{generate_corpus_parallel, SampleError, WalkConfig};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Sample(#[from] SampleError),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error(transparent)]
    LinkPred(#[from] LinkPredError),
    #[error("unknown method `{0}` (expected k<N> or concat)")]
    UnknownMethod(String),
    #[error("concat needs at least one hop method before it")]
    ConcatWithoutHops,
}

/// A column of the results table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Method {
    Hop(usize),
    /// Concatenation of every hop method listed.
    Concat,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Hop(k) => write!(f, "k{k}"),
            Method::Concat => f.write_str("concat"),
        }
    }
}

impl FromStr for Method {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("concat") {
            return Ok(Method::Concat);
        }
        s.strip_prefix(['k', 'K'])
            .and_then(|k| k.parse().ok())
            .map(Method::Hop)
            .ok_or_else(|| ExperimentError::UnknownMethod(s.to_string()))
    }
}

impl Method {
    /// Column heading in the results table.
    pub fn label(&self) -> String {
        match self {
            Method::Hop(k) => format!("RW-(K={k})"),
            Method::Concat => "Concat".to_string(),
        }
    }
}

pub fn parse_methods(list: &str) -> Result<Vec<Method>, ExperimentError> {
    let methods: Vec<Method> = list
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(str::parse)
        .collect::<Result<_, _>>()?;
    if methods.contains(&Method::Concat) && !methods.iter().any(|m| matches!(m, Method::Hop(_))) {
        return Err(ExperimentError::ConcatWithoutHops);
    }
    Ok(methods)
}

/// Positive pairs from `eval_pairs`, an equal number of sampled negatives.
pub fn labeled_pairs(
    train_graph: &HeteroGraph,
    eval_pairs: &[(String, String)],
    seed: u64,
) -> Result<(LabeledPairSet, ExtractStats), ExperimentError> {
    let (positives, stats) = extract_positive_pairs(train_graph, eval_pairs);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::MAX);
    let negatives: Vec<(NodeId, NodeId)> = sample_negative_pairs(&positives, train_graph, positives.len(), &mut rng)?;
    Ok((LabeledPairSet::from_ids(train_graph, &positives, &negatives)?, stats))
}

/// Synthetic train graph and its labeled evaluation pairs.
pub fn synthetic_fixture(config: &SyntheticConfig) -> Result<(HeteroGraph, LabeledPairSet), ExperimentError> {
    let data = generate_synthetic(config)?;
    let (pairs, _) = labeled_pairs(&data.train, &data.eval_pairs, config.rng_seed)?;
    Ok((data.train, pairs))
}

#[derive(Debug, Clone)]
pub struct GridConfig {
    pub walk: WalkConfig,
    pub train: TrainConfig,
    pub eval: EvalConfig,
    pub workers: usize,
}

/// Embeddings for every hop method (in method order).
pub fn hop_embeddings(
    graph: &HeteroGraph,
    methods: &[Method],
    config: &GridConfig,
) -> Result<Vec<(usize, EmbeddingMatrix)>, ExperimentError> {
    let mut out = Vec::new();
    for m in methods {
        if let Method::Hop(k) = *m {
            let walk = WalkConfig { hop_k: k, ..config.walk };
            let corpus = generate_corpus_parallel(graph, &walk, config.workers)?;
            out.push((k, train(&corpus, &config.train)?.published()));
        }
    }
    Ok(out)
}

/// Evaluates every method; returns `(method name, reports)` in method order.
pub fn run_grid(
    graph: &HeteroGraph,
    pairs: &LabeledPairSet,
    methods: &[Method],
    config: &GridConfig,
) -> Result<Vec<(String, Vec<EvalReport>)>, ExperimentError> {
    let hops = hop_embeddings(graph, methods, config)?;
    let mut results = Vec::new();
    for m in methods {
        let report = match m {
            Method::Hop(k) => {
                let emb = &hops.iter().find(|(h, _)| h == k).expect("trained above").1;
                evaluate(emb, pairs, &config.eval, config.workers)?
            }
            Method::Concat => {
                let parts: Vec<&EmbeddingMatrix> = hops.iter().map(|(_, e)| e).collect();
                if parts.is_empty() {
                    return Err(ExperimentError::ConcatWithoutHops);
                }
                evaluate(&concat_embeddings(&parts)?, pairs, &config.eval, config.workers)?
            }
        };
        results.push((m.to_string(), report));
    }
    Ok(results)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_parsing() {
        assert_eq!(
            parse_methods("k0, K1,concat").unwrap(),
            vec![Method::Hop(0), Method::Hop(1), Method::Concat]
        );
        assert!(parse_methods("k-1").is_err());
        assert!(parse_methods("walk").is_err());
        assert!(matches!(parse_methods("concat"), Err(ExperimentError::ConcatWithoutHops)));
        assert_eq!(Method::Hop(2).label(), "RW-(K=2)");
    }
}
