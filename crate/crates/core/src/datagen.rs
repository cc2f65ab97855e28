//! Bibliographic records, temporal train/eval splitting and a planted-community
//! synthetic network generator.

use std::collections::{BTreeSet, HashSet};
use std::io::BufRead;

use rand::seq::index::sample as sample_indices;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{GraphBuilder, GraphError, HeteroGraph};
use crate::linkpred::{AUTHOR, PAPER, VENUE};

#[derive(Debug, Error)]
pub enum DataError {
    #[error("every record line failed to parse (first: {0})")]
    AllLinesFailed(RecordParseError),
    #[error("{0} side of the split is empty")]
    EmptySplit(&'static str),
    #[error("no records")]
    NoRecords,
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct RecordParseError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BiblioRecord {
    pub paper_key: String,
    pub year: i32,
    pub author_keys: Vec<String>,
    pub venue_key: Option<String>,
}

/// Keys become single tokens: inner whitespace is replaced by `_`.
fn normalize_key(raw: &str) -> String {
    raw.split_whitespace().collect::<Vec<_>>().join("_")
}

fn parse_line(line: &str) -> Result<BiblioRecord, String> {
    let fields: Vec<&str> = line.split('\t').collect();
    if !(3..=4).contains(&fields.len()) {
        return Err(format!("expected 3 or 4 tab-separated fields, got {}", fields.len()));
    }
    let paper_key = normalize_key(fields[0]);
    if paper_key.is_empty() {
        return Err("empty paper key".into());
    }
    let year: i32 = fields[1]
        .trim()
        .parse()
        .map_err(|_| format!("bad year `{}`", fields[1]))?;
    if year <= 0 {
        return Err(format!("year must be positive, got {year}"));
    }
    let mut author_keys: Vec<String> = Vec::new();
    for a in fields[2].split('|').map(normalize_key).filter(|a| !a.is_empty()) {
        if !author_keys.contains(&a) {
            author_keys.push(a);
        }
    }
    if author_keys.is_empty() {
        return Err("record has no authors".into());
    }
    let venue_key = fields
        .get(3)
        .map(|v| normalize_key(v))
        .filter(|v| !v.is_empty());
    Ok(BiblioRecord {
        paper_key,
        year,
        author_keys,
        venue_key,
    })
}

/// Parses `<paper>\t<year>\t<author>|<author>...\t<venue?>` lines. Bad lines
/// are collected; the call fails only if no line parses.
pub fn parse_records<R: BufRead>(
    reader: R,
) -> Result<(Vec<BiblioRecord>, Vec<RecordParseError>), DataError> {
    let mut records = Vec::new();
    let mut errors = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        match parse_line(line) {
            Ok(r) => records.push(r),
            Err(message) => errors.push(RecordParseError { line: n + 1, message }),
        }
    }
    if records.is_empty() {
        return match errors.into_iter().next() {
            Some(first) => Err(DataError::AllLinesFailed(first)),
            None => Err(DataError::NoRecords),
        };
    }
    Ok((records, errors))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeSplit {
    /// Last year (inclusive) of the training window.
    pub train_end_year: i32,
    /// Last year (inclusive) of the evaluation window.
    pub eval_end_year: i32,
}

impl Default for TimeSplit {
    fn default() -> Self {
        Self {
            train_end_year: 2008,
            eval_end_year: 2011,
        }
    }
}

/// Train graph plus sorted, de-duplicated eval co-author pairs.
#[derive(Debug, Clone)]
pub struct SplitData {
    pub train: HeteroGraph,
    pub eval_pairs: Vec<(String, String)>,
    pub train_records: usize,
    pub eval_records: usize,
    pub dropped_records: usize,
}

fn coauthor_pairs(authors: &[String], out: &mut BTreeSet<(String, String)>) {
    for (i, a) in authors.iter().enumerate() {
        for b in &authors[i + 1..] {
            let pair = if a < b { (a.clone(), b.clone()) } else { (b.clone(), a.clone()) };
            out.insert(pair);
        }
    }
}

fn add_record(builder: &mut GraphBuilder, r: &BiblioRecord) -> Result<(), GraphError> {
    builder.add_node(&r.paper_key, PAPER)?;
    for a in &r.author_keys {
        builder.add_edge((a, AUTHOR), (&r.paper_key, PAPER))?;
    }
    if let Some(v) = &r.venue_key {
        builder.add_edge((&r.paper_key, PAPER), (v, VENUE))?;
    }
    Ok(())
}

pub fn build_split(records: &[BiblioRecord], split: &TimeSplit) -> Result<SplitData, DataError> {
    if records.is_empty() {
        return Err(DataError::NoRecords);
    }
    if split.train_end_year >= split.eval_end_year {
        return Err(DataError::InvalidConfig(format!(
            "train_end_year {} must precede eval_end_year {}",
            split.train_end_year, split.eval_end_year
        )));
    }
    let mut builder = GraphBuilder::new();
    let mut pairs = BTreeSet::new();
    let (mut train_records, mut eval_records, mut dropped) = (0, 0, 0);
    for r in records {
        if r.year <= split.train_end_year {
            add_record(&mut builder, r)?;
            train_records += 1;
        } else if r.year <= split.eval_end_year {
            coauthor_pairs(&r.author_keys, &mut pairs);
            eval_records += 1;
        } else {
            dropped += 1;
        }
    }
    let train = builder.finish();
    if train.edge_count() == 0 {
        return Err(DataError::EmptySplit("train"));
    }
    if pairs.is_empty() {
        return Err(DataError::EmptySplit("eval"));
    }
    Ok(SplitData {
        train,
        eval_pairs: pairs.into_iter().collect(),
        train_records,
        eval_records,
        dropped_records: dropped,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalPairMode {
    /// Intra-community author pairs.
    Planted,
    /// Any author pairs, community ignored.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub n_communities: usize,
    pub authors_per_community: usize,
    /// Papers led by each author.
    pub papers_per_author: usize,
    pub venues_per_community: usize,
    /// Upper bound on authors per paper (lead included); at least 2.
    pub max_authors_per_paper: usize,
    /// Probability that a paper draws co-authors from a second community.
    pub cross_community_paper_fraction: f64,
    /// Probability that an eligible author pair becomes an eval positive.
    pub eval_pair_fraction: f64,
    pub eval_pair_mode: EvalPairMode,
    pub rng_seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            n_communities: 3,
            authors_per_community: 100,
            papers_per_author: 5,
            venues_per_community: 5,
            max_authors_per_paper: 4,
            cross_community_paper_fraction: 0.1,
            eval_pair_fraction: 0.05,
            eval_pair_mode: EvalPairMode::Planted,
            rng_seed: 42,
        }
    }
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<(), DataError> {
        let counts = [
            self.n_communities,
            self.authors_per_community,
            self.papers_per_author,
            self.venues_per_community,
        ];
        if counts.contains(&0) {
            return Err(DataError::InvalidConfig("all counts must be >= 1".into()));
        }
        if self.max_authors_per_paper < 2 {
            return Err(DataError::InvalidConfig("max_authors_per_paper must be >= 2".into()));
        }
        for f in [self.cross_community_paper_fraction, self.eval_pair_fraction] {
            if !(0.0..=1.0).contains(&f) {
                return Err(DataError::InvalidConfig(format!("fraction {f} outside [0, 1]")));
            }
        }
        Ok(())
    }

    /// Node count implied by the construction (every author leads papers, so
    /// every author, paper and used venue appears).
    pub fn expected_max_nodes(&self) -> usize {
        let authors = self.n_communities * self.authors_per_community;
        authors + authors * self.papers_per_author + self.n_communities * self.venues_per_community
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticData {
    pub train: HeteroGraph,
    pub eval_pairs: Vec<(String, String)>,
    /// Community of each author, indexed like `author_keys`.
    pub author_community: Vec<usize>,
    pub author_keys: Vec<String>,
    /// Author indices of each generated paper.
    pub paper_authors: Vec<Vec<usize>>,
}

pub fn author_key(community: usize, index: usize) -> String {
    format!("c{community}a{index}")
}

/// Planted-community author–paper–venue network with held-out co-author pairs.
pub fn generate_synthetic(config: &SyntheticConfig) -> Result<SyntheticData, DataError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let per = config.authors_per_community;
    let n_authors = config.n_communities * per;
    let author_keys: Vec<String> = (0..n_authors).map(|a| author_key(a / per, a % per)).collect();
    let author_community: Vec<usize> = (0..n_authors).map(|a| a / per).collect();

    let mut builder = GraphBuilder::new();
    let mut paper_authors = Vec::with_capacity(n_authors * config.papers_per_author);
    let mut coauthors: HashSet<(usize, usize)> = HashSet::new();

    for (lead, &home) in author_community.iter().enumerate() {
        for _ in 0..config.papers_per_author {
            let cross = config.n_communities > 1 && rng.gen_bool(config.cross_community_paper_fraction);
            let extra = rng.gen_range(1..config.max_authors_per_paper);
            let mut members = vec![lead];
            if cross {
                let mut other = rng.gen_range(0..config.n_communities - 1);
                if other >= home {
                    other += 1;
                }
                // Split the co-authors between the two communities, at least one from `other`.
                let from_other = rng.gen_range(1..=extra).min(per);
                let from_home = (extra - from_other).min(per - 1);
                members.extend(sample_indices(&mut rng, per, from_other).into_iter().map(|i| other * per + i));
                draw_within(&mut rng, home, per, lead, from_home, &mut members);
            } else {
                draw_within(&mut rng, home, per, lead, extra.min(per - 1), &mut members);
            }
            let venue = format!("c{home}v{}", rng.gen_range(0..config.venues_per_community));
            let paper = format!("p{}", paper_authors.len());
            for &a in &members {
                builder.add_edge((&author_keys[a], AUTHOR), (&paper, PAPER))?;
            }
            builder.add_edge((&paper, PAPER), (&venue, VENUE))?;
            for (i, &a) in members.iter().enumerate() {
                for &b in &members[i + 1..] {
                    coauthors.insert((a.min(b), a.max(b)));
                }
            }
            paper_authors.push(members);
        }
    }
    let train = builder.finish();

    let mut eval_pairs = Vec::new();
    for a in 0..n_authors {
        for b in a + 1..n_authors {
            let eligible = match config.eval_pair_mode {
                EvalPairMode::Planted => author_community[a] == author_community[b],
                EvalPairMode::Random => true,
            };
            if eligible && !coauthors.contains(&(a, b)) && rng.gen_bool(config.eval_pair_fraction) {
                eval_pairs.push((author_keys[a].clone(), author_keys[b].clone()));
            }
        }
    }

    Ok(SyntheticData {
        train,
        eval_pairs,
        author_community,
        author_keys,
        paper_authors,
    })
}

/// Appends `count` distinct members of `community` other than `lead`.
fn draw_within<R: Rng + ?Sized>(
    rng: &mut R,
    community: usize,
    per: usize,
    lead: usize,
    count: usize,
    members: &mut Vec<usize>,
) {
    if count == 0 {
        return;
    }
    let lead_local = lead - community * per;
    for i in sample_indices(rng, per - 1, count) {
        // skip over the lead's slot
        let local = if i >= lead_local { i + 1 } else { i };
        members.push(community * per + local);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_examples() {
        let text = "# comment\np1\t2005\ta1|a2\tv1\np2\t\ta1\tv1\np3\t2006\ta3\t\n";
        let (recs, errs) = parse_records(text.as_bytes()).unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[0].author_keys, ["a1", "a2"]);
        assert_eq!(recs[0].venue_key.as_deref(), Some("v1"));
        assert_eq!(recs[1].venue_key, None);
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].line, 3);
    }

    #[test]
    fn parse_all_bad_is_fatal() {
        assert!(matches!(
            parse_records("p1\tx\ta1\n".as_bytes()),
            Err(DataError::AllLinesFailed(_))
        ));
        assert!(matches!(parse_records("p1\t2000\t\tv\n".as_bytes()), Err(DataError::AllLinesFailed(_))));
    }

    #[test]
    fn whitespace_in_keys_is_normalized() {
        let (recs, _) = parse_records("p 1\t2000\tJohn  Smith|Ann Lee\tSIG MOD\n".as_bytes()).unwrap();
        assert_eq!(recs[0].paper_key, "p_1");
        assert_eq!(recs[0].author_keys, ["John_Smith", "Ann_Lee"]);
        assert_eq!(recs[0].venue_key.as_deref(), Some("SIG_MOD"));
    }

    fn rec(p: &str, year: i32, authors: &[&str]) -> BiblioRecord {
        BiblioRecord {
            paper_key: p.into(),
            year,
            author_keys: authors.iter().map(|s| s.to_string()).collect(),
            venue_key: Some("v".into()),
        }
    }

    #[test]
    fn split_boundaries() {
        let recs = vec![
            rec("p1", 2005, &["a1", "a2"]),
            rec("p2", 2010, &["a1", "a2", "a3"]),
            rec("p3", 2008, &["a4"]),
            rec("p4", 2012, &["a5", "a6"]),
        ];
        let s = build_split(&recs, &TimeSplit::default()).unwrap();
        assert!(s.train.lookup("p1").is_some());
        assert!(s.train.lookup("p3").is_some());
        assert!(s.train.lookup("p2").is_none());
        assert!(s.train.lookup("a5").is_none());
        assert_eq!(s.eval_pairs.len(), 3);
        assert_eq!((s.train_records, s.eval_records, s.dropped_records), (2, 1, 1));
    }

    #[test]
    fn split_empty_sides() {
        let only_train = vec![rec("p1", 2000, &["a1", "a2"])];
        assert!(matches!(
            build_split(&only_train, &TimeSplit::default()),
            Err(DataError::EmptySplit("eval"))
        ));
        let only_eval = vec![rec("p1", 2010, &["a1", "a2"])];
        assert!(matches!(
            build_split(&only_eval, &TimeSplit::default()),
            Err(DataError::EmptySplit("train"))
        ));
    }

    #[test]
    fn two_authors_one_paper_yields_no_positives() {
        let cfg = SyntheticConfig {
            n_communities: 1,
            authors_per_community: 2,
            papers_per_author: 1,
            venues_per_community: 1,
            max_authors_per_paper: 2,
            cross_community_paper_fraction: 0.0,
            eval_pair_fraction: 1.0,
            ..Default::default()
        };
        let d = generate_synthetic(&cfg).unwrap();
        assert!(d.eval_pairs.is_empty());
    }

    #[test]
    fn no_cross_fraction_keeps_papers_in_one_community() {
        let cfg = SyntheticConfig {
            cross_community_paper_fraction: 0.0,
            authors_per_community: 20,
            ..Default::default()
        };
        let d = generate_synthetic(&cfg).unwrap();
        for members in &d.paper_authors {
            let c = d.author_community[members[0]];
            assert!(members.iter().all(|&a| d.author_community[a] == c));
            let distinct: HashSet<_> = members.iter().collect();
            assert_eq!(distinct.len(), members.len());
        }
    }

    #[test]
    fn synthetic_is_deterministic() {
        let cfg = SyntheticConfig {
            authors_per_community: 30,
            ..Default::default()
        };
        let a = generate_synthetic(&cfg).unwrap();
        let b = generate_synthetic(&cfg).unwrap();
        assert_eq!(a.eval_pairs, b.eval_pairs);
        assert_eq!(a.train.keys(), b.train.keys());
        assert_eq!(a.train.edges().collect::<Vec<_>>(), b.train.edges().collect::<Vec<_>>());
    }
}
