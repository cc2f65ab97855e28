//! K-hop random-walk corpus generation.
//!
//! A first-order uniform random walk is run from every non-isolated node and
//! only every `(K+1)`-th node of it is emitted, so two consecutive tokens of an
//! emitted sequence are always separated by exactly `K` intermediate nodes.
//! With `K = 0` this is the plain DeepWalk corpus.

use std::io::{BufRead, Write};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{HeteroGraph, NodeId};

#[derive(Debug, Error)]
pub enum SampleError {
    #[error("walk start node {0} has no neighbors")]
    IsolatedStart(NodeId),
    #[error("graph has no edges to walk on")]
    EmptyGraph,
    #[error("invalid walk config: {0}")]
    InvalidConfig(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalkConfig {
    /// Intermediate nodes skipped between two emitted nodes.
    pub hop_k: usize,
    pub iterations_per_node: usize,
    /// Maximum emitted sequence length.
    pub sample_length: usize,
    pub rng_seed: u64,
}

impl Default for WalkConfig {
    fn default() -> Self {
        Self {
            hop_k: 1,
            iterations_per_node: 30,
            sample_length: 100,
            rng_seed: 42,
        }
    }
}

impl WalkConfig {
    pub fn validate(&self) -> Result<(), SampleError> {
        if self.iterations_per_node < 1 {
            return Err(SampleError::InvalidConfig("iterations_per_node must be >= 1".into()));
        }
        if self.sample_length < 2 {
            return Err(SampleError::InvalidConfig("sample_length must be >= 2".into()));
        }
        Ok(())
    }

    /// Raw walk steps needed for `sample_length` emitted nodes.
    pub fn raw_steps(&self) -> usize {
        (self.sample_length - 1) * (self.hop_k + 1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Walk {
    pub nodes: Vec<NodeId>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub walks: usize,
    pub skipped_isolated: usize,
    pub discarded_short: usize,
}

/// Emitted sequences in `(start node, iteration)` order, with the key table
/// needed to name their tokens.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub sequences: Vec<Vec<NodeId>>,
    pub keys: Vec<String>,
    pub config: WalkConfig,
    pub stats: CorpusStats,
}

impl Corpus {
    pub fn token_count(&self) -> usize {
        self.sequences.iter().map(Vec::len).sum()
    }

    pub fn key(&self, id: NodeId) -> &str {
        &self.keys[id.index()]
    }
}

/// Uniform first-order walk of up to `steps` transitions from `start`.
pub fn random_walk<R: Rng + ?Sized>(
    graph: &HeteroGraph,
    start: NodeId,
    steps: usize,
    rng: &mut R,
) -> Result<Walk, SampleError> {
    let degree = graph
        .degree(start)
        .map_err(|_| SampleError::IsolatedStart(start))?;
    if degree == 0 {
        return Err(SampleError::IsolatedStart(start));
    }
    let mut nodes = Vec::with_capacity(steps + 1);
    nodes.push(start);
    let mut current = start;
    for _ in 0..steps {
        let nbrs = graph.neighbors_unchecked(current);
        if nbrs.is_empty() {
            break;
        }
        // u64 range keeps draws identical on 32- and 64-bit targets.
        current = nbrs[rng.gen_range(0..nbrs.len() as u64) as usize];
        nodes.push(current);
    }
    Ok(Walk { nodes })
}

/// Keeps `walk[0], walk[K+1], walk[2(K+1)], ...`.
pub fn stride_sample(walk: &[NodeId], hop_k: usize) -> Vec<NodeId> {
    walk.iter().step_by(hop_k + 1).copied().collect()
}

/// Independent stream for one `(start node, iteration)` pair.
pub fn walk_rng(seed: u64, start: NodeId, iteration: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((start.0 as u64) << 32) | iteration as u64);
    rng
}

fn walks_from(graph: &HeteroGraph, config: &WalkConfig, start: NodeId) -> Vec<Walk> {
    let steps = config.raw_steps();
    (0..config.iterations_per_node)
        .map(|it| {
            let mut rng = walk_rng(config.rng_seed, start, it);
            random_walk(graph, start, steps, &mut rng).expect("start node has neighbors")
        })
        .collect()
}

fn run(
    graph: &HeteroGraph,
    config: &WalkConfig,
    workers: usize,
    keep_raw: bool,
) -> Result<(Corpus, Vec<Walk>), SampleError> {
    config.validate()?;
    if graph.edge_count() == 0 {
        return Err(SampleError::EmptyGraph);
    }
    let starts: Vec<NodeId> = graph
        .nodes()
        .filter(|&u| !graph.neighbors_unchecked(u).is_empty())
        .collect();
    let per_start: Vec<Vec<Walk>> = if workers <= 1 {
        starts.iter().map(|&s| walks_from(graph, config, s)).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| SampleError::InvalidConfig(e.to_string()))?;
        pool.install(|| {
            starts
                .par_iter()
                .map(|&s| walks_from(graph, config, s))
                .collect()
        })
    };

    let mut stats = CorpusStats {
        walks: 0,
        skipped_isolated: graph.node_count() - starts.len(),
        discarded_short: 0,
    };
    let mut sequences = Vec::with_capacity(starts.len() * config.iterations_per_node);
    let mut raw = Vec::new();
    for walk in per_start.into_iter().flatten() {
        stats.walks += 1;
        let seq = stride_sample(&walk.nodes, config.hop_k);
        if seq.len() < 2 {
            stats.discarded_short += 1;
        } else {
            sequences.push(seq);
        }
        if keep_raw {
            raw.push(walk);
        }
    }
    let corpus = Corpus {
        sequences,
        keys: graph.keys().to_vec(),
        config: *config,
        stats,
    };
    Ok((corpus, raw))
}

pub fn generate_corpus(graph: &HeteroGraph, config: &WalkConfig) -> Result<Corpus, SampleError> {
    run(graph, config, 1, false).map(|(c, _)| c)
}

/// Same output as [`generate_corpus`], computed on `workers` threads.
pub fn generate_corpus_parallel(
    graph: &HeteroGraph,
    config: &WalkConfig,
    workers: usize,
) -> Result<Corpus, SampleError> {
    run(graph, config, workers, false).map(|(c, _)| c)
}

/// Like [`generate_corpus`] but also returns every raw walk, including the
/// ones whose emitted sequence was discarded.
pub fn generate_corpus_traced(
    graph: &HeteroGraph,
    config: &WalkConfig,
) -> Result<(Corpus, Vec<Walk>), SampleError> {
    run(graph, config, 1, true)
}

const CORPUS_HEADER: &str = "# corpus";

pub fn write_corpus<W: Write>(corpus: &Corpus, mut out: W) -> Result<(), SampleError> {
    let c = &corpus.config;
    writeln!(
        out,
        "{CORPUS_HEADER} hop_k={} iterations={} length={} seed={}",
        c.hop_k, c.iterations_per_node, c.sample_length, c.rng_seed
    )?;
    let mut line = String::new();
    for seq in &corpus.sequences {
        line.clear();
        for (i, id) in seq.iter().enumerate() {
            if i > 0 {
                line.push(' ');
            }
            line.push_str(corpus.key(*id));
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

fn parse_header(line: &str) -> Option<WalkConfig> {
    let rest = line.strip_prefix(CORPUS_HEADER)?;
    let mut cfg = WalkConfig::default();
    let mut seen = 0;
    for kv in rest.split_whitespace() {
        let (k, v) = kv.split_once('=')?;
        match k {
            "hop_k" => cfg.hop_k = v.parse().ok()?,
            "iterations" => cfg.iterations_per_node = v.parse().ok()?,
            "length" => cfg.sample_length = v.parse().ok()?,
            "seed" => cfg.rng_seed = v.parse().ok()?,
            _ => continue,
        }
        seen += 1;
    }
    (seen == 4).then_some(cfg)
}

/// Reads a corpus file. Node ids are assigned in order of first appearance.
pub fn read_corpus<R: BufRead>(reader: R) -> Result<Corpus, SampleError> {
    let mut config = None;
    let mut keys: Vec<String> = Vec::new();
    let mut index = std::collections::HashMap::new();
    let mut sequences = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        if n == 0 {
            config = Some(parse_header(line.trim_end()).ok_or(SampleError::Parse {
                line: 1,
                message: "missing or malformed corpus header".into(),
            })?);
            continue;
        }
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let seq = line
            .split_whitespace()
            .map(|tok| {
                *index.entry(tok.to_string()).or_insert_with(|| {
                    keys.push(tok.to_string());
                    NodeId((keys.len() - 1) as u32)
                })
            })
            .collect();
        sequences.push(seq);
    }
    let config = config.ok_or(SampleError::Parse {
        line: 1,
        message: "empty corpus file".into(),
    })?;
    Ok(Corpus {
        stats: CorpusStats {
            walks: sequences.len(),
            ..Default::default()
        },
        sequences,
        keys,
        config,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphBuilder;

    fn ids(v: &[u32]) -> Vec<NodeId> {
        v.iter().copied().map(NodeId).collect()
    }

    fn path2() -> HeteroGraph {
        let mut b = GraphBuilder::new();
        b.add_edge(("a", "author"), ("b", "paper")).unwrap();
        b.finish()
    }

    #[test]
    fn forced_walk_on_single_edge() {
        let g = path2();
        let mut rng = walk_rng(1, NodeId(0), 0);
        let w = random_walk(&g, NodeId(0), 3, &mut rng).unwrap();
        assert_eq!(w.nodes, ids(&[0, 1, 0, 1]));
    }

    #[test]
    fn isolated_start_is_an_error() {
        let mut b = GraphBuilder::new();
        b.add_edge(("a", "author"), ("b", "paper")).unwrap();
        let lone = b.add_node("c", "author").unwrap();
        let g = b.finish();
        let mut rng = walk_rng(1, lone, 0);
        assert!(matches!(
            random_walk(&g, lone, 3, &mut rng),
            Err(SampleError::IsolatedStart(_))
        ));
    }

    #[test]
    fn stride_examples() {
        // a p b q c
        let w = ids(&[0, 1, 2, 3, 4]);
        assert_eq!(stride_sample(&w, 1), ids(&[0, 2, 4]));
        assert_eq!(stride_sample(&w, 0), w);
        let w7 = ids(&[10, 11, 12, 13, 14, 15, 16]);
        assert_eq!(stride_sample(&w7, 2), ids(&[10, 13, 16]));
        assert_eq!(stride_sample(&ids(&[5, 6]), 3), ids(&[5]));
    }

    #[test]
    fn two_node_corpus_shape() {
        let g = path2();
        let cfg = WalkConfig {
            hop_k: 0,
            iterations_per_node: 30,
            sample_length: 100,
            rng_seed: 7,
        };
        let c = generate_corpus(&g, &cfg).unwrap();
        assert_eq!(c.sequences.len(), 60);
        for s in &c.sequences {
            assert_eq!(s.len(), 100);
            assert!(s.windows(2).all(|w| w[0] != w[1]));
        }
        assert_eq!(c, generate_corpus(&g, &cfg).unwrap());
    }

    #[test]
    fn isolated_nodes_are_skipped_and_counted() {
        let mut b = GraphBuilder::new();
        b.add_edge(("a", "author"), ("b", "paper")).unwrap();
        b.add_node("c", "author").unwrap();
        let g = b.finish();
        let c = generate_corpus(&g, &WalkConfig::default()).unwrap();
        assert_eq!(c.stats.skipped_isolated, 1);
        assert_eq!(c.sequences.len(), 2 * 30);
    }

    #[test]
    fn empty_graph_and_bad_config() {
        let mut b = GraphBuilder::new();
        b.add_node("c", "author").unwrap();
        let g = b.finish();
        assert!(matches!(
            generate_corpus(&g, &WalkConfig::default()),
            Err(SampleError::EmptyGraph)
        ));
        let bad = WalkConfig {
            sample_length: 1,
            ..WalkConfig::default()
        };
        assert!(matches!(
            generate_corpus(&path2(), &bad),
            Err(SampleError::InvalidConfig(_))
        ));
    }

    #[test]
    fn corpus_file_round_trip() {
        let g = path2();
        let cfg = WalkConfig {
            hop_k: 2,
            iterations_per_node: 3,
            sample_length: 5,
            rng_seed: 11,
        };
        let c = generate_corpus(&g, &cfg).unwrap();
        let mut buf = Vec::new();
        write_corpus(&c, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# corpus hop_k=2 iterations=3 length=5 seed=11\n"));
        let back = read_corpus(&buf[..]).unwrap();
        assert_eq!(back.config, cfg);
        assert_eq!(back.sequences.len(), c.sequences.len());
        for (a, b) in back.sequences.iter().zip(&c.sequences) {
            let ka: Vec<&str> = a.iter().map(|&i| back.key(i)).collect();
            let kb: Vec<&str> = b.iter().map(|&i| c.key(i)).collect();
            assert_eq!(ka, kb);
        }
        assert!(read_corpus("a b\n".as_bytes()).is_err());
    }
}
