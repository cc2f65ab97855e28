use std::io::Write;
use std::path::{Path, PathBuf};

use hopwalk::datagen::{build_split, generate_synthetic, parse_records, EvalPairMode, SyntheticConfig, TimeSplit};
use hopwalk::embedding::{self, concat_embeddings, read_embeddings, write_embeddings, EmbeddingError};
use hopwalk::experiment::{labeled_pairs, ExperimentError, Method};
use hopwalk::graph::{read_edge_list, write_edge_list, HeteroGraph};
use hopwalk::linkpred::{self, read_pairs, render_table, write_pairs, write_report_records, EvalReport};
use hopwalk::sampler::{self, generate_corpus_parallel, read_corpus, write_corpus, CorpusStats, SampleError};
use hopwalk::{EvalConfig, TrainConfig, WalkConfig};

use crate::stage::{create_output, file_digest, meta_path, open_input};
use crate::{CliError, ConcatArgs, EvaluateArgs, IngestArgs, SampleArgs, SplitOutputs, SynthArgs, TrainArgs};

pub(crate) fn runtime<E: std::error::Error + Send + Sync + 'static>(e: E) -> CliError {
    CliError::Runtime(e.into())
}

fn flush<W: Write>(mut w: W) -> Result<(), CliError> {
    w.flush().map_err(CliError::io)
}

/// Uses the given seed or draws one and reports it so the run can be repeated.
pub fn resolve_seed(seed: Option<u64>, what: &str) -> u64 {
    seed.unwrap_or_else(|| {
        let s = rand::random::<u64>();
        println!("seed: {s} (generated for {what}; pass --seed {s} or set {} to repeat)", crate::SEED_ENV);
        s
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IngestSummary {
    pub train_nodes: usize,
    pub train_edges: usize,
    pub eval_pairs: usize,
    pub positives: usize,
}

impl IngestSummary {
    pub fn stats_line(&self) -> String {
        format!(
            "train nodes={} edges={}, eval pairs={} (positives={})",
            self.train_nodes, self.train_edges, self.eval_pairs, self.positives
        )
    }
}

/// Writes the train graph and the balanced labeled pair file.
pub fn write_split(
    graph: &HeteroGraph,
    eval_pairs: &[(String, String)],
    seed: u64,
    header: &[String],
    graph_out: &Path,
    pairs_out: &Path,
) -> Result<IngestSummary, CliError> {
    let (pairs, stats) = labeled_pairs(graph, eval_pairs, seed).map_err(|e| match e {
        ExperimentError::LinkPred(e) => runtime(e),
        other => runtime(other),
    })?;
    let mut out = create_output(graph_out)?;
    write_edge_list(graph, header, &mut out).map_err(runtime)?;
    flush(out)?;

    let mut pair_header = header.to_vec();
    pair_header.push(format!(
        "pairs seed={seed} eval_records={} unmatched_author={} not_new={} positives={}",
        stats.records, stats.unmatched_author, stats.not_new, stats.kept
    ));
    let mut out = create_output(pairs_out)?;
    write_pairs(&pairs, &pair_header, &mut out).map_err(runtime)?;
    flush(out)?;

    Ok(IngestSummary {
        train_nodes: graph.node_count(),
        train_edges: graph.edge_count(),
        eval_pairs: pairs.len(),
        positives: pairs.positives(),
    })
}

pub fn synthetic_preset(name: &str) -> Result<SyntheticConfig, CliError> {
    match name {
        "default" => Ok(SyntheticConfig::default()),
        "null" => Ok(SyntheticConfig {
            cross_community_paper_fraction: 1.0,
            eval_pair_mode: EvalPairMode::Random,
            ..SyntheticConfig::default()
        }),
        other => Err(CliError::Usage(format!("unknown synthetic preset `{other}` (expected default or null)"))),
    }
}

pub fn synthetic_header(cfg: &SyntheticConfig) -> Vec<String> {
    vec![format!(
        "synthetic communities={} authors_per_community={} papers_per_author={} venues_per_community={} \
         max_authors_per_paper={} cross_fraction={} eval_fraction={} eval_mode={:?} seed={}",
        cfg.n_communities,
        cfg.authors_per_community,
        cfg.papers_per_author,
        cfg.venues_per_community,
        cfg.max_authors_per_paper,
        cfg.cross_community_paper_fraction,
        cfg.eval_pair_fraction,
        cfg.eval_pair_mode,
        cfg.rng_seed
    )]
}

pub fn run_synthetic(cfg: &SyntheticConfig, outputs: &SplitOutputs, seed: u64) -> Result<IngestSummary, CliError> {
    let data = generate_synthetic(cfg).map_err(|e| match e {
        hopwalk::datagen::DataError::InvalidConfig(m) => CliError::Usage(m),
        other => runtime(other),
    })?;
    write_split(
        &data.train,
        &data.eval_pairs,
        seed,
        &synthetic_header(cfg),
        &outputs.graph_out,
        &outputs.pairs_out,
    )
}

pub fn run_records(
    records: &Path,
    split: &TimeSplit,
    outputs: &SplitOutputs,
    seed: u64,
) -> Result<IngestSummary, CliError> {
    let (recs, errors) = parse_records(open_input(records)?).map_err(runtime)?;
    for e in errors.iter().take(10) {
        eprintln!("warning: {}: {e}", records.display());
    }
    if errors.len() > 10 {
        eprintln!("warning: {} more malformed lines", errors.len() - 10);
    }
    let data = build_split(&recs, split).map_err(|e| match e {
        hopwalk::datagen::DataError::InvalidConfig(m) => CliError::Usage(m),
        other => runtime(other),
    })?;
    let header = vec![format!(
        "ingest records={} train_end_year={} eval_end_year={} train_records={} eval_records={} dropped={} malformed={}",
        file_digest(records)?,
        split.train_end_year,
        split.eval_end_year,
        data.train_records,
        data.eval_records,
        data.dropped_records,
        errors.len()
    )];
    write_split(&data.train, &data.eval_pairs, seed, &header, &outputs.graph_out, &outputs.pairs_out)
}

pub fn ingest(args: &IngestArgs) -> Result<IngestSummary, CliError> {
    let seed = resolve_seed(args.outputs.seed, "ingest");
    let summary = match (&args.records, &args.synthetic) {
        (Some(path), _) => {
            let split = TimeSplit {
                train_end_year: args.train_end,
                eval_end_year: args.eval_end,
            };
            run_records(path, &split, &args.outputs, seed)?
        }
        (None, Some(preset)) => {
            let cfg = SyntheticConfig {
                rng_seed: seed,
                ..synthetic_preset(preset)?
            };
            run_synthetic(&cfg, &args.outputs, seed)?
        }
        (None, None) => return Err(CliError::Usage("one of --records or --synthetic is required".into())),
    };
    println!("{}", summary.stats_line());
    Ok(summary)
}

pub fn synth(args: &SynthArgs) -> Result<IngestSummary, CliError> {
    let seed = resolve_seed(args.outputs.seed, "synth");
    let eval_pair_mode = match args.eval_mode.as_str() {
        "planted" => EvalPairMode::Planted,
        "random" => EvalPairMode::Random,
        other => return Err(CliError::Usage(format!("unknown eval mode `{other}`"))),
    };
    let cfg = SyntheticConfig {
        n_communities: args.communities,
        authors_per_community: args.authors_per_community,
        papers_per_author: args.papers_per_author,
        venues_per_community: args.venues_per_community,
        max_authors_per_paper: args.max_authors_per_paper,
        cross_community_paper_fraction: args.cross_fraction,
        eval_pair_fraction: args.eval_fraction,
        eval_pair_mode,
        rng_seed: seed,
    };
    let summary = run_synthetic(&cfg, &args.outputs, seed)?;
    println!("{}", summary.stats_line());
    Ok(summary)
}

fn sample_error(e: SampleError) -> CliError {
    match e {
        SampleError::InvalidConfig(m) => CliError::Usage(m),
        other => runtime(other),
    }
}

pub fn read_graph(path: &Path) -> Result<HeteroGraph, CliError> {
    read_edge_list(open_input(path)?).map_err(runtime)
}

pub fn sample_to_file(graph: &Path, config: &WalkConfig, workers: usize, out: &Path) -> Result<CorpusStats, CliError> {
    config.validate().map_err(sample_error)?;
    let g = read_graph(graph)?;
    let corpus = generate_corpus_parallel(&g, config, workers).map_err(sample_error)?;
    let mut w = create_output(out)?;
    write_corpus(&corpus, &mut w).map_err(runtime)?;
    flush(w)?;
    Ok(corpus.stats)
}

pub fn sample(args: &SampleArgs) -> Result<CorpusStats, CliError> {
    let config = WalkConfig {
        hop_k: args.hop_k,
        iterations_per_node: args.iterations,
        sample_length: args.length,
        rng_seed: resolve_seed(args.seed, "sample"),
    };
    let stats = sample_to_file(&args.graph, &config, args.workers, &args.out)?;
    println!(
        "corpus: {} walks, {} skipped isolated, {} discarded short -> {}",
        stats.walks,
        stats.skipped_isolated,
        stats.discarded_short,
        args.out.display()
    );
    Ok(stats)
}

fn embedding_error(e: EmbeddingError) -> CliError {
    match e {
        EmbeddingError::InvalidConfig(m) => CliError::Usage(m),
        other => runtime(other),
    }
}

fn write_meta(embedding_path: &Path, body: &str) -> Result<(), CliError> {
    let mut w = create_output(&meta_path(embedding_path))?;
    w.write_all(body.as_bytes()).map_err(CliError::io)?;
    flush(w)
}

#[derive(serde::Serialize)]
struct TrainMeta<'a> {
    stage: &'static str,
    corpus_sha256: String,
    walk: &'a WalkConfig,
    train: &'a TrainConfig,
    workers: usize,
}

pub fn train_to_file(corpus: &Path, config: &TrainConfig, workers: usize, out: &Path) -> Result<(), CliError> {
    config.validate().map_err(embedding_error)?;
    let c = read_corpus(open_input(corpus)?).map_err(|e| match e {
        sampler::SampleError::Parse { .. } => CliError::runtime(format!("{}: {e}", corpus.display())),
        other => runtime(other),
    })?;
    let m = embedding::train_parallel(&c, config, workers)
        .map_err(embedding_error)?
        .published();
    let mut w = create_output(out)?;
    write_embeddings(&m, &mut w).map_err(runtime)?;
    flush(w)?;
    let meta = TrainMeta {
        stage: "train",
        corpus_sha256: file_digest(corpus)?,
        walk: &c.config,
        train: config,
        workers,
    };
    write_meta(out, &toml::to_string(&meta).map_err(runtime)?)
}

pub fn train(args: &TrainArgs) -> Result<(), CliError> {
    let config = TrainConfig {
        dim: args.dim,
        window: args.window,
        negatives: args.negatives,
        epochs: args.epochs,
        lr_start: args.lr_start,
        lr_end: args.lr_end,
        ns_exponent: args.ns_exponent,
        rng_seed: resolve_seed(args.seed, "train"),
    };
    train_to_file(&args.corpus, &config, args.workers, &args.out)?;
    println!("embedding -> {}", args.out.display());
    Ok(())
}

pub fn read_embedding_file(path: &Path) -> Result<hopwalk::EmbeddingMatrix, CliError> {
    read_embeddings(open_input(path)?).map_err(|e| CliError::runtime(format!("{}: {e}", path.display())))
}

#[derive(serde::Serialize)]
struct ConcatMeta {
    stage: &'static str,
    inputs: Vec<String>,
    input_sha256: Vec<String>,
}

pub fn concat_files(inputs: &[PathBuf], out: &Path) -> Result<usize, CliError> {
    let matrices = inputs.iter().map(|p| read_embedding_file(p)).collect::<Result<Vec<_>, _>>()?;
    let refs: Vec<&hopwalk::EmbeddingMatrix> = matrices.iter().collect();
    let m = concat_embeddings(&refs).map_err(runtime)?;
    let mut w = create_output(out)?;
    write_embeddings(&m, &mut w).map_err(runtime)?;
    flush(w)?;
    let meta = ConcatMeta {
        stage: "concat",
        inputs: inputs.iter().map(|p| p.display().to_string()).collect(),
        input_sha256: inputs.iter().map(|p| file_digest(p)).collect::<Result<_, _>>()?,
    };
    write_meta(out, &toml::to_string(&meta).map_err(runtime)?)?;
    Ok(m.dim())
}

pub fn concat(args: &ConcatArgs) -> Result<usize, CliError> {
    let dim = concat_files(&args.inputs, &args.out)?;
    println!("concatenated {} inputs, dim={dim} -> {}", args.inputs.len(), args.out.display());
    Ok(dim)
}

/// Splits `NAME=PATH`; a bare path is named after its file stem.
pub fn parse_named(arg: &str) -> (String, PathBuf) {
    match arg.split_once('=') {
        Some((name, path)) if !name.is_empty() => (name.to_string(), PathBuf::from(path)),
        _ => {
            let p = PathBuf::from(arg);
            let name = p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| arg.to_string());
            (name, p)
        }
    }
}

/// Column heading for a method name: `k1` becomes `RW-(K=1)`.
pub fn column_label(name: &str) -> String {
    name.parse::<Method>().map(|m| m.label()).unwrap_or_else(|_| name.to_string())
}

pub type MethodReports = Vec<(String, Vec<EvalReport>)>;

pub fn evaluate_files(
    named: &[(String, PathBuf)],
    pairs: &Path,
    config: &EvalConfig,
    workers: usize,
    header: &[String],
    table_out: Option<&Path>,
    records_out: Option<&Path>,
) -> Result<(String, MethodReports), CliError> {
    let set = read_pairs(open_input(pairs)?).map_err(|e| CliError::runtime(format!("{}: {e}", pairs.display())))?;
    let mut results = Vec::with_capacity(named.len());
    for (name, path) in named {
        let emb = read_embedding_file(path)?;
        let reports = linkpred::evaluate(&emb, &set, config, workers).map_err(|e| match e {
            linkpred::LinkPredError::InvalidConfig(m) => CliError::Usage(m),
            other => CliError::runtime(format!("{name}: {other}")),
        })?;
        results.push((name.clone(), reports));
    }
    let labeled: MethodReports = results.iter().map(|(n, r)| (column_label(n), r.clone())).collect();
    let table = render_table(&labeled);

    if let Some(path) = table_out {
        let mut w = create_output(path)?;
        w.write_all(table.as_bytes()).map_err(CliError::io)?;
        flush(w)?;
    }
    if let Some(path) = records_out {
        let mut w = create_output(path)?;
        for h in header {
            writeln!(w, "# {h}").map_err(CliError::io)?;
        }
        writeln!(w, "# pairs sha256={}", file_digest(pairs)?).map_err(CliError::io)?;
        for (name, p) in named {
            writeln!(w, "# embedding {name} sha256={}", file_digest(p)?).map_err(CliError::io)?;
        }
        write_report_records(&results, &mut w).map_err(CliError::io)?;
        flush(w)?;
    }
    Ok((table, results))
}

pub fn evaluate(args: &EvaluateArgs) -> Result<MethodReports, CliError> {
    let config = EvalConfig {
        repeats: args.repeats,
        train_ratio: args.ratio,
        seed: resolve_seed(args.seed, "evaluate"),
        ..EvalConfig::default()
    };
    let named: Vec<(String, PathBuf)> = args.embeddings.iter().map(|s| parse_named(s)).collect();
    let (table, results) = evaluate_files(
        &named,
        &args.pairs,
        &config,
        args.workers,
        &[],
        args.table_out.as_deref(),
        args.records_out.as_deref(),
    )?;
    println!("AUC (mean±std over {} repeats, seed {})", config.repeats, config.seed);
    print!("{table}");
    Ok(results)
}
