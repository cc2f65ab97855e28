//! End-to-end run: ingest → sample → train → concat → evaluate.
//!
//! Every output gets a `.stamp` sidecar with the stage fingerprint (stage
//! config plus digests of its inputs) and the output's own digest. A stage
//! whose outputs all carry a matching stamp is skipped.

use std::io::Write;
use std::path::{Path, PathBuf};

use hopwalk::experiment::{parse_methods, Method};

use crate::commands::{self, evaluate_files, sample_to_file, train_to_file, MethodReports};
use crate::config::RunConfig;
use crate::stage::{create_output, file_digest, fingerprint, is_fresh, write_stamp};
use crate::{CliError, PipelineArgs, SplitOutputs};

#[derive(Debug, Clone)]
pub struct PipelineOutcome {
    pub table: String,
    pub report_table: PathBuf,
    pub report_records: PathBuf,
    pub ran: Vec<String>,
    pub skipped: Vec<String>,
    pub results: Option<MethodReports>,
}

struct Runner<'a> {
    force: bool,
    ran: Vec<String>,
    skipped: Vec<String>,
    dir: &'a Path,
}

impl Runner<'_> {
    /// Runs `body` unless `outputs` are fresh for this fingerprint.
    fn stage(
        &mut self,
        name: &str,
        config: &str,
        inputs: &[String],
        outputs: &[&Path],
        body: impl FnOnce() -> Result<(), CliError>,
    ) -> Result<(), CliError> {
        let fp = fingerprint(name, config, inputs);
        if !self.force && is_fresh(outputs, &fp) {
            eprintln!("[skip] {name}");
            self.skipped.push(name.to_string());
            return Ok(());
        }
        eprintln!("[run]  {name}");
        body()?;
        for out in outputs {
            write_stamp(out, &fp)?;
        }
        self.ran.push(name.to_string());
        Ok(())
    }

    fn path(&self, file: &str) -> PathBuf {
        self.dir.join(file)
    }
}

pub fn run_pipeline(args: &PipelineArgs) -> Result<PipelineOutcome, CliError> {
    let mut overrides = Vec::new();
    if let Some(seed) = args.seed {
        overrides.push(format!("seed={seed}"));
    }
    if let Some(w) = args.workers {
        overrides.push(format!("workers={w}"));
    }
    overrides.extend(args.overrides.iter().cloned());
    let config = RunConfig::load(args.config.as_deref(), &overrides)?;
    let outcome = run_config(&config, &args.out_dir, args.force)?;
    print!("{}", outcome.table);
    println!(
        "report: {} and {}",
        outcome.report_table.display(),
        outcome.report_records.display()
    );
    Ok(outcome)
}

/// Runs every stage of `config` into `dir`.
pub fn run_config(config: &RunConfig, dir: &Path, force: bool) -> Result<PipelineOutcome, CliError> {
    let methods = parse_methods(&config.methods).map_err(|e| CliError::Usage(e.to_string()))?;
    if methods.is_empty() {
        return Err(CliError::Usage("methods list is empty".into()));
    }
    if let Some(records) = &config.input.records {
        if !records.exists() {
            return Err(CliError::Usage(format!("input path does not exist: {}", records.display())));
        }
    }
    std::fs::create_dir_all(dir).map_err(|e| CliError::runtime(format!("cannot create {}: {e}", dir.display())))?;
    let mut run = Runner {
        force,
        ran: Vec::new(),
        skipped: Vec::new(),
        dir,
    };
    let workers = config.workers.max(1);
    let snapshot = config.to_toml();

    // ingest
    let outputs = SplitOutputs {
        graph_out: run.path("graph.tsv"),
        pairs_out: run.path("pairs.tsv"),
        seed: Some(config.seed),
    };
    let (ingest_cfg, ingest_inputs) = match &config.input.records {
        Some(path) => (
            format!("records split={:?} seed={}", config.time_split(), config.seed),
            vec![file_digest(path)?],
        ),
        None => (
            format!("synthetic {:?} seed={}", config.synthetic_config()?, config.seed),
            vec![],
        ),
    };
    run.stage(
        "ingest",
        &ingest_cfg,
        &ingest_inputs,
        &[&outputs.graph_out, &outputs.pairs_out],
        || {
            let summary = match &config.input.records {
                Some(path) => commands::run_records(path, &config.time_split(), &outputs, config.seed)?,
                None => commands::run_synthetic(&config.synthetic_config()?, &outputs, config.seed)?,
            };
            eprintln!("       {}", summary.stats_line());
            Ok(())
        },
    )?;
    let graph_digest = file_digest(&outputs.graph_out)?;

    // sample + train per hop size
    let train_cfg = config.train_config();
    let mut embeddings: Vec<(String, PathBuf)> = Vec::new();
    let mut hop_files = Vec::new();
    for m in &methods {
        let Method::Hop(k) = *m else { continue };
        let walk = config.walk_config(k);
        let corpus = run.path(&format!("corpus_k{k}.txt"));
        run.stage(
            &format!("sample k={k}"),
            &format!("{walk:?}"),
            std::slice::from_ref(&graph_digest),
            &[&corpus],
            || sample_to_file(&outputs.graph_out, &walk, workers, &corpus).map(|_| ()),
        )?;
        let emb = run.path(&format!("emb_k{k}.txt"));
        run.stage(
            &format!("train k={k}"),
            &format!("{train_cfg:?}"),
            &[file_digest(&corpus)?],
            &[&emb],
            // single worker keeps the embedding reproducible
            || train_to_file(&corpus, &train_cfg, 1, &emb),
        )?;
        hop_files.push(emb.clone());
        embeddings.push((m.to_string(), emb));
    }

    if methods.contains(&Method::Concat) {
        let out = run.path("emb_concat.txt");
        let digests = hop_files.iter().map(|p| file_digest(p)).collect::<Result<Vec<_>, _>>()?;
        run.stage("concat", "", &digests, &[&out], || {
            commands::concat_files(&hop_files, &out).map(|_| ())
        })?;
        embeddings.push((Method::Concat.to_string(), out));
    }

    // evaluate
    let eval_cfg = config.eval_config();
    let table_path = run.path("report.txt");
    let records_path = run.path("report.kv");
    let mut inputs = vec![file_digest(&outputs.pairs_out)?];
    for (name, p) in &embeddings {
        inputs.push(format!("{name}:{}", file_digest(p)?));
    }
    let header: Vec<String> = std::iter::once("run config:".to_string())
        .chain(snapshot.lines().filter(|l| !l.is_empty()).map(|l| format!("  {l}")))
        .collect();
    let mut results = None;
    run.stage(
        "evaluate",
        &format!("{eval_cfg:?} {snapshot}"),
        &inputs,
        &[&table_path, &records_path],
        || {
            let (table, r) = evaluate_files(
                &embeddings,
                &outputs.pairs_out,
                &eval_cfg,
                workers,
                &header,
                None,
                Some(&records_path),
            )?;
            let mut w = create_output(&table_path)?;
            write!(
                w,
                "AUC (mean±std over {} repeats, {:.0}:{:.0} split, seed {})\n{table}",
                eval_cfg.repeats,
                eval_cfg.train_ratio * 100.0,
                (1.0 - eval_cfg.train_ratio) * 100.0,
                eval_cfg.seed
            )
            .map_err(CliError::io)?;
            w.flush().map_err(CliError::io)?;
            results = Some(r);
            Ok(())
        },
    )?;

    let table = std::fs::read_to_string(&table_path).map_err(CliError::io)?;
    Ok(PipelineOutcome {
        table,
        report_table: table_path,
        report_records: records_path,
        ran: run.ran,
        skipped: run.skipped,
        results,
    })
}
