//! Command-line front end: `fold`, `bench`, `eval` and `stats`.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chain::{import_structure, parse_sequence, ChainError, Sequence};
use crate::energy::{contact_census, evaluate, ContactMatrix, EnergyError, EnergyModelId};
use crate::engine::{run, ClockKind, EngineError, RunConfig, RunRecord, Variant};
use crate::metrics::{
    self, load_reference, mann_whitney_u, read_runs_csv, read_summary_csv, relative_improvement, rmsd_improvement,
    summarize, MetricsError, ReferenceStructure, RunRow, SampleSet, SummaryRow, RUNS_HEADER, SUMMARY_HEADER,
};

/// Environment variable naming the default contact matrix file.
pub const MATRIX_ENV: &str = "FCCFOLD_MATRIX";

/// Bundled benchmark proteins.
pub const BENCHMARK_TSV: &str = include_str!("../data/benchmark_suite.tsv");

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error(transparent)]
    Energy(#[from] EnergyError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("{failed} of {total} runs failed")]
    RunsFailed { failed: usize, total: usize },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(io_err(path))
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    fs::write(path, text).map_err(io_err(path))
}

// ---------------------------------------------------------------- suite

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkEntry {
    pub id: String,
    pub sequence: Sequence,
    /// Length listed in the result tables.
    pub declared_length: usize,
    /// Hydrophobic count listed in the result tables.
    pub declared_h: usize,
    pub reference: Option<PathBuf>,
}

/// Disagreement between a parsed sequence and its declared size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteMismatch {
    pub id: String,
    pub length: (usize, usize),
    pub h: (usize, usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkSuite {
    pub entries: Vec<BenchmarkEntry>,
}

impl BenchmarkSuite {
    pub fn bundled() -> Self {
        Self::from_tsv(BENCHMARK_TSV).expect("bundled suite parses")
    }

    /// Parses `id  length  h  sequence` rows, tab separated, after a header.
    pub fn from_tsv(text: &str) -> Result<Self, CliError> {
        let mut entries = Vec::new();
        let mut header_seen = false;
        for (n, line) in text.lines().enumerate() {
            let line = line.trim_end();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if !header_seen {
                header_seen = true;
                continue;
            }
            let bad = |msg: &str| CliError::Usage(format!("suite line {}: {msg}", n + 1));
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() < 4 {
                return Err(bad("expected id, length, h, sequence"));
            }
            let declared_length = f[1].trim().parse().map_err(|_| bad("bad length"))?;
            let declared_h = f[2].trim().parse().map_err(|_| bad("bad h"))?;
            let mut sequence = parse_sequence(f[3])?;
            sequence.id = f[0].trim().to_string();
            entries.push(BenchmarkEntry {
                id: sequence.id.clone(),
                sequence,
                declared_length,
                declared_h,
                reference: f.get(4).map(|p| PathBuf::from(p.trim())).filter(|p| !p.as_os_str().is_empty()),
            });
        }
        Ok(BenchmarkSuite { entries })
    }

    pub fn get(&self, id: &str) -> Option<&BenchmarkEntry> {
        self.entries.iter().find(|e| e.id.eq_ignore_ascii_case(id))
    }

    /// Entries whose parsed length or hydrophobic count differs from the
    /// declared values.
    pub fn self_check(&self) -> Vec<SuiteMismatch> {
        self.entries
            .iter()
            .filter(|e| e.sequence.len() != e.declared_length || e.sequence.h_count() != e.declared_h)
            .map(|e| SuiteMismatch {
                id: e.id.clone(),
                length: (e.sequence.len(), e.declared_length),
                h: (e.sequence.h_count(), e.declared_h),
            })
            .collect()
    }

    /// Picks entries by comma-separated ids, or all for `all`.
    pub fn select(&self, ids: &str) -> Result<Vec<&BenchmarkEntry>, CliError> {
        if ids.eq_ignore_ascii_case("all") {
            return Ok(self.entries.iter().collect());
        }
        ids.split(',')
            .map(|id| self.get(id.trim()).ok_or_else(|| CliError::Usage(format!("unknown suite protein '{}'", id.trim()))))
            .collect()
    }

    fn warn_mismatches(&self) {
        for m in self.self_check() {
            log::warn!(
                "suite {}: sequence has {} residues / {} H, table lists {} / {}",
                m.id,
                m.length.0,
                m.h.0,
                m.length.1,
                m.h.1
            );
        }
    }
}

// ---------------------------------------------------------------- flags

fn parse_seconds(s: &str) -> Result<f64, String> {
    if let Ok(v) = s.parse::<f64>() {
        return Ok(v);
    }
    humantime::parse_duration(s).map(|d: Duration| d.as_secs_f64()).map_err(|e| e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "fccfold", version, about = "Genetic-algorithm protein folding on the FCC lattice")]
pub struct Cli {
    /// More log output (repeat for debug)
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fold one sequence
    Fold(FoldArgs),
    /// Run variants over benchmark proteins and seeds
    Bench(BenchArgs),
    /// Score a structure file
    Eval(EvalArgs),
    /// Compare two result CSVs
    Stats(StatsArgs),
}

/// Options shared by `fold` and `bench`. Unset flags fall back to the
/// config file, then to built-in defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Config file (TOML key = value)
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Time budget, e.g. 30s, 2m; bare numbers are seconds
    #[arg(long, value_parser = parse_seconds)]
    pub time: Option<f64>,
    /// Budget clock: virtual (reproducible) or wall
    #[arg(long)]
    pub clock: Option<ClockKind>,
    #[arg(long)]
    pub pop: Option<usize>,
    /// Non-improving generations before a random walk
    #[arg(long)]
    pub rwt: Option<usize>,
    #[arg(long)]
    pub macro_p: Option<f64>,
    #[arg(long)]
    pub macro_repeat: Option<usize>,
    /// Stop at the first improving site during exhaustive mutation
    #[arg(long)]
    pub first_improvement: bool,
    #[arg(long)]
    pub max_generations: Option<u64>,
    /// Contact matrix CSV (default: $FCCFOLD_MATRIX, else bundled)
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    /// Output directory
    #[arg(long, default_value = "fccfold-out")]
    pub out: PathBuf,
    /// 60 minute budgets, 50 seeds, 2 minute trace interval
    #[arg(long)]
    pub paper_scale: bool,
}

#[derive(Debug, Clone, Args)]
pub struct FoldArgs {
    /// Sequence text, or a FASTA/plain file
    #[arg(long, conflicts_with = "suite")]
    pub seq: Option<String>,
    /// Bundled benchmark protein id
    #[arg(long)]
    pub suite: Option<String>,
    /// Read --seq as an H/P class pattern
    #[arg(long)]
    pub hp: bool,
    #[arg(long)]
    pub variant: Option<Variant>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Reference structure for RMSD
    #[arg(long = "ref")]
    pub reference: Option<PathBuf>,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// Comma-separated protein ids, or all
    #[arg(long, default_value = "all")]
    pub suite: String,
    /// Comma-separated variants
    #[arg(long, default_value = "BH,BD,BM,HP")]
    pub variants: String,
    /// Runs per protein and variant
    #[arg(long)]
    pub seeds: Option<usize>,
    /// Master seed the per-run seeds derive from
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Trace averaging interval (default 2m, at most a tenth of the budget)
    #[arg(long, value_parser = parse_seconds)]
    pub trace_interval: Option<f64>,
    /// Worker threads (default: available parallelism)
    #[arg(long)]
    pub workers: Option<usize>,
    /// Directory of reference structures named <ID>.ref
    #[arg(long = "ref")]
    pub reference: Option<PathBuf>,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    /// Structure file (`index code x y z` lines)
    pub structure: PathBuf,
    /// Override the residue codes with this sequence
    #[arg(long)]
    pub seq: Option<String>,
    /// HP, BM or both
    #[arg(long, default_value = "both")]
    pub model: String,
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    #[arg(long = "ref")]
    pub reference: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct StatsArgs {
    /// Result CSV of the method under test
    pub target: PathBuf,
    /// Result CSV of the baseline
    pub reference: PathBuf,
    /// Only use target rows of this variant
    #[arg(long)]
    pub target_variant: Option<String>,
    /// Only use reference rows of this variant
    #[arg(long)]
    pub reference_variant: Option<String>,
}

fn resolve_matrix(flag: Option<&Path>) -> Result<ContactMatrix, CliError> {
    let path = flag.map(Path::to_path_buf).or_else(|| std::env::var_os(MATRIX_ENV).map(PathBuf::from));
    match path {
        Some(p) => Ok(ContactMatrix::from_file(&p)?),
        None => Ok(ContactMatrix::bundled()),
    }
}

impl RunArgs {
    fn config(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if self.paper_scale {
            cfg.time_budget = 3600.0;
        }
        if let Some(v) = self.time {
            cfg.time_budget = v;
        }
        if let Some(v) = self.clock {
            cfg.clock = v;
        }
        if let Some(v) = self.pop {
            cfg.pop_size = v;
        }
        if let Some(v) = self.rwt {
            cfg.rwt = v;
        }
        if let Some(v) = self.macro_p {
            cfg.macro_p = v;
        }
        if let Some(v) = self.macro_repeat {
            cfg.macro_repeat = v;
        }
        if self.first_improvement {
            cfg.first_improvement = true;
        }
        if let Some(v) = self.max_generations {
            cfg.max_generations = Some(v);
        }
        if let Some(v) = &self.matrix {
            cfg.matrix = Some(v.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Deterministic per-run seeds derived from a master seed.
pub fn derive_seeds(master: u64, count: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    (0..count).map(|_| rng.gen()).collect()
}

fn record_stem(r: &RunRecord) -> String {
    format!("{}_{}_{}", r.sequence_id, r.config.variant, r.config.seed)
}

fn load_sequence(text: &str, hp: bool) -> Result<Sequence, CliError> {
    let path = Path::new(text);
    let looks_like_path = text.contains('/') || text.contains('.') || path.exists();
    let body = if looks_like_path { read_file(path)? } else { text.to_string() };
    if hp {
        let mut id = "query".to_string();
        let mut pattern = String::new();
        for line in body.lines() {
            match line.trim().strip_prefix('>') {
                Some(h) => id = h.split_whitespace().next().unwrap_or("query").to_string(),
                None => pattern.push_str(line.trim()),
            }
        }
        return Ok(Sequence::from_hp(id, &pattern)?);
    }
    Ok(parse_sequence(&body)?)
}

// ---------------------------------------------------------------- commands

/// Summary printed by `fold`.
#[derive(Debug, Clone)]
pub struct FoldOutput {
    pub record: RunRecord,
    pub record_path: PathBuf,
    pub structure_path: PathBuf,
    pub rmsd: Option<f64>,
}

pub fn cmd_fold(args: &FoldArgs) -> Result<FoldOutput, CliError> {
    let seq = match (&args.seq, &args.suite) {
        (Some(s), _) => load_sequence(s, args.hp)?,
        (None, Some(id)) => {
            let suite = BenchmarkSuite::bundled();
            suite.warn_mismatches();
            suite.get(id).ok_or_else(|| CliError::Usage(format!("unknown suite protein '{id}'")))?.sequence.clone()
        }
        (None, None) => return Err(CliError::Usage("give --seq or --suite".into())),
    };
    let mut cfg = args.run.config()?;
    if let Some(v) = args.variant {
        cfg.variant = v;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    let matrix = resolve_matrix(cfg.matrix.as_deref())?;
    let record = run(&seq, &matrix, &cfg)?;
    let stem = record_stem(&record);
    let record_path = args.run.out.join(format!("{stem}.json"));
    let structure_path = args.run.out.join(format!("{stem}.structure"));
    write_file(&record_path, &record.to_json())?;
    write_file(&structure_path, &record.best_structure)?;
    let rmsd = match &args.reference {
        Some(p) => Some(metrics::rmsd(&record.best_conformation()?, &load_reference(p)?)?),
        None => None,
    };
    Ok(FoldOutput { record, record_path, structure_path, rmsd })
}

/// Averaged best-so-far search energy at one trace time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub seq: String,
    pub variant: String,
    pub seconds: f64,
    pub mean_energy: f64,
    pub runs: usize,
}

/// Mean BM energy per variant, with a rank-sum test against BH.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub seq: String,
    pub variant: String,
    pub runs: usize,
    pub mean_energy: f64,
    pub best_energy: f64,
    pub u_vs_bh: Option<f64>,
    pub p_vs_bh: Option<f64>,
    pub significant_vs_bh: Option<bool>,
}

#[derive(Debug, Clone)]
pub struct BenchOutput {
    pub records: Vec<RunRecord>,
    pub summary: Vec<SummaryRow>,
    pub ablation: Vec<AblationRow>,
}

fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(MetricsError::from)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io { path: path.to_path_buf(), source: e.into_error() })?;
    write_file(path, &String::from_utf8(bytes).expect("csv is utf-8"))
}

pub fn cmd_bench(args: &BenchArgs) -> Result<BenchOutput, CliError> {
    let suite = BenchmarkSuite::bundled();
    suite.warn_mismatches();
    let entries = suite.select(&args.suite)?;
    let variants: Vec<Variant> = args
        .variants
        .split(',')
        .map(|v| v.trim().parse::<Variant>())
        .collect::<Result<_, _>>()?;
    let base = args.run.config()?;
    let seeds = derive_seeds(args.seed, args.seeds.unwrap_or(if args.run.paper_scale { 50 } else { 5 }));
    let interval = args
        .trace_interval
        .unwrap_or_else(|| if args.run.paper_scale { 120.0 } else { (base.time_budget / 10.0).min(120.0) });
    if !(interval > 0.0) {
        return Err(CliError::Usage("trace interval must be positive".into()));
    }
    let matrix = resolve_matrix(base.matrix.as_deref())?;
    let mut refs: BTreeMap<String, ReferenceStructure> = BTreeMap::new();
    for e in &entries {
        let path = match (&args.reference, &e.reference) {
            (Some(dir), _) => Some(dir.join(format!("{}.ref", e.id))),
            (None, Some(p)) => Some(p.clone()),
            (None, None) => None,
        };
        if let Some(p) = path.filter(|p| p.exists()) {
            refs.insert(e.id.clone(), load_reference(&p)?);
        }
    }

    let mut jobs: Vec<(&BenchmarkEntry, Variant, u64)> = Vec::new();
    for &e in &entries {
        for &v in &variants {
            jobs.extend(seeds.iter().map(|&s| (e, v, s)));
        }
    }
    let workers = args.workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| CliError::Usage(format!("worker pool: {e}")))?;
    log::info!("{} runs on {} workers", jobs.len(), workers);
    let results: Vec<Result<RunRecord, EngineError>> = pool.install(|| {
        jobs.par_iter()
            .map(|(e, v, s)| {
                let cfg = RunConfig { variant: *v, seed: *s, ..base.clone() };
                let r = run(&e.sequence, &matrix, &cfg);
                if let Ok(rec) = &r {
                    log::info!("{} {} seed {}: BM {:.3}", e.id, v, s, rec.best_bm_energy);
                }
                r
            })
            .collect()
    });

    let out = &args.run.out;
    let mut records = Vec::new();
    let mut failed = 0;
    for ((e, v, s), r) in jobs.iter().zip(results) {
        match r {
            Ok(rec) => {
                let stem = record_stem(&rec);
                write_file(&out.join("records").join(format!("{stem}.json")), &rec.to_json())?;
                write_file(&out.join("structures").join(format!("{stem}.structure")), &rec.best_structure)?;
                records.push(rec);
            }
            Err(err) => {
                log::error!("{} {} seed {s}: {err}", e.id, v);
                failed += 1;
            }
        }
    }

    let mut summary = Vec::new();
    let mut run_rows = Vec::new();
    let mut traces = Vec::new();
    let mut ablation = Vec::new();
    for e in &entries {
        let reference = refs.get(&e.id);
        for &v in &variants {
            let group: Vec<RunRecord> = records
                .iter()
                .filter(|r| r.sequence_id == e.id && r.config.variant == v)
                .cloned()
                .collect();
            if group.is_empty() {
                continue;
            }
            summary.push(summarize(&group, reference)?);
            for r in &group {
                run_rows.push(RunRow::from_record(r, reference)?);
            }
            traces.extend(average_trace(&e.id, v, &group, base.time_budget, interval));
            let energies = SampleSet::new(v.to_string(), group.iter().map(|r| r.best_bm_energy).collect())?;
            ablation.push((e.id.clone(), v, energies));
        }
    }
    let ablation_rows = ablation_table(&ablation);

    write_file(&out.join("summary.csv"), &metrics::write_summary_csv(&summary)?)?;
    write_file(&out.join("runs.csv"), &metrics::write_runs_csv(&run_rows)?)?;
    write_rows(&out.join("traces.csv"), &traces)?;
    write_rows(&out.join("ablation.csv"), &ablation_rows)?;

    if failed > 0 {
        return Err(CliError::RunsFailed { failed, total: jobs.len() });
    }
    Ok(BenchOutput { records, summary, ablation: ablation_rows })
}

fn ablation_table(groups: &[(String, Variant, SampleSet)]) -> Vec<AblationRow> {
    groups
        .iter()
        .map(|(seq, v, s)| {
            let bh = groups.iter().find(|(q, w, _)| q == seq && *w == Variant::BH).map(|(_, _, b)| b);
            let test = bh.filter(|_| *v != Variant::BH).map(|b| mann_whitney_u(b, s));
            AblationRow {
                seq: seq.clone(),
                variant: v.to_string(),
                runs: s.values.len(),
                mean_energy: s.mean(),
                best_energy: s.values.iter().copied().fold(f64::INFINITY, f64::min),
                u_vs_bh: test.map(|t| t.u_a),
                p_vs_bh: test.map(|t| t.p),
                significant_vs_bh: test.map(|t| t.significant),
            }
        })
        .collect()
}

/// Best-so-far energies averaged over runs at multiples of `interval`,
/// plus the end of the budget.
pub fn average_trace(seq: &str, v: Variant, runs: &[RunRecord], budget: f64, interval: f64) -> Vec<TraceRow> {
    let mut times = Vec::new();
    let mut t = 0.0;
    while t < budget {
        times.push(t);
        t += interval;
    }
    times.push(budget);
    times
        .into_iter()
        .filter_map(|t| {
            let vals: Vec<f64> = runs.iter().filter_map(|r| r.energy_at(t)).collect();
            (!vals.is_empty()).then(|| TraceRow {
                seq: seq.to_string(),
                variant: v.to_string(),
                seconds: t,
                mean_energy: vals.iter().sum::<f64>() / vals.len() as f64,
                runs: vals.len(),
            })
        })
        .collect()
}

/// Energies and census printed by `eval`.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalOutput {
    pub id: String,
    pub hp: Option<f64>,
    pub bm: Option<f64>,
    pub census: crate::energy::ContactCensus,
    pub rmsd: Option<f64>,
}

pub fn cmd_eval(args: &EvalArgs) -> Result<EvalOutput, CliError> {
    let file = import_structure(&read_file(&args.structure)?)?;
    let conf = file.conformation()?;
    let seq = match &args.seq {
        Some(s) => {
            let seq = load_sequence(s, false)?;
            if seq.len() != conf.len() {
                return Err(ChainError::LengthMismatch { expected: conf.len(), got: seq.len() }.into());
            }
            seq
        }
        None => file.sequence()?,
    };
    let (want_hp, want_bm) = match args.model.to_ascii_lowercase().as_str() {
        "both" => (true, true),
        other => match other.parse::<EnergyModelId>()? {
            EnergyModelId::Hp => (true, false),
            EnergyModelId::Bm => (false, true),
        },
    };
    let matrix = resolve_matrix(args.matrix.as_deref())?;
    let rmsd = match &args.reference {
        Some(p) => Some(metrics::rmsd(&conf, &load_reference(p)?)?),
        None => None,
    };
    Ok(EvalOutput {
        id: file.id,
        hp: want_hp.then(|| evaluate(&conf, &seq, EnergyModelId::Hp, &matrix)),
        bm: want_bm.then(|| evaluate(&conf, &seq, EnergyModelId::Bm, &matrix)),
        census: contact_census(&conf, &seq),
        rmsd,
    })
}

/// One protein's comparison in `stats`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsRow {
    pub seq: String,
    pub target_energy: f64,
    pub reference_energy: f64,
    pub ri_energy: f64,
    pub ri_rmsd: Option<f64>,
    pub u: Option<f64>,
    pub p: Option<f64>,
    pub significant: Option<bool>,
    pub rmsd_p: Option<f64>,
    pub rmsd_significant: Option<bool>,
}

enum ResultTable {
    Summary(Vec<SummaryRow>),
    Runs(Vec<RunRow>),
}

fn read_table(path: &Path) -> Result<ResultTable, CliError> {
    let text = read_file(path)?;
    let header = text.lines().find(|l| !l.trim().is_empty() && !l.starts_with('#')).unwrap_or("").trim();
    if header == SUMMARY_HEADER {
        Ok(ResultTable::Summary(read_summary_csv(&text)?))
    } else if header == RUNS_HEADER {
        Ok(ResultTable::Runs(read_runs_csv(&text)?))
    } else {
        Err(CliError::Usage(format!("{}: not a summary or runs CSV", path.display())))
    }
}

fn keep(variant: &str, filter: &Option<String>) -> bool {
    filter.as_ref().map_or(true, |f| f.eq_ignore_ascii_case(variant))
}

fn check_ids(a: &BTreeSet<String>, b: &BTreeSet<String>) -> Result<(), CliError> {
    if a != b {
        let only_a: Vec<_> = a.difference(b).cloned().collect();
        let only_b: Vec<_> = b.difference(a).cloned().collect();
        return Err(CliError::Usage(format!(
            "protein ids differ: only in target {only_a:?}, only in reference {only_b:?}"
        )));
    }
    if a.is_empty() {
        return Err(CliError::Usage("no rows to compare".into()));
    }
    Ok(())
}

pub fn cmd_stats(args: &StatsArgs) -> Result<Vec<StatsRow>, CliError> {
    match (read_table(&args.target)?, read_table(&args.reference)?) {
        (ResultTable::Summary(t), ResultTable::Summary(r)) => {
            let t: Vec<_> = t.into_iter().filter(|x| keep(&x.variant, &args.target_variant)).collect();
            let r: Vec<_> = r.into_iter().filter(|x| keep(&x.variant, &args.reference_variant)).collect();
            let ids_t: BTreeSet<String> = t.iter().map(|x| x.seq.clone()).collect();
            let ids_r: BTreeSet<String> = r.iter().map(|x| x.seq.clone()).collect();
            check_ids(&ids_t, &ids_r)?;
            if t.len() != ids_t.len() || r.len() != ids_r.len() {
                return Err(CliError::Usage("several rows per protein; pick one with --target-variant/--reference-variant".into()));
            }
            ids_t
                .iter()
                .map(|id| {
                    let a = t.iter().find(|x| &x.seq == id).unwrap();
                    let b = r.iter().find(|x| &x.seq == id).unwrap();
                    let ri_rmsd = match (a.avg_rmsd, b.avg_rmsd) {
                        (Some(x), Some(y)) => Some(rmsd_improvement(x, y)?),
                        _ => None,
                    };
                    Ok(StatsRow {
                        seq: id.clone(),
                        target_energy: a.avg,
                        reference_energy: b.avg,
                        ri_energy: relative_improvement(a.avg, b.avg)?,
                        ri_rmsd,
                        u: None,
                        p: None,
                        significant: None,
                        rmsd_p: None,
                        rmsd_significant: None,
                    })
                })
                .collect()
        }
        (ResultTable::Runs(t), ResultTable::Runs(r)) => {
            let group = |rows: Vec<RunRow>, f: &Option<String>| {
                let mut m: BTreeMap<String, Vec<RunRow>> = BTreeMap::new();
                for x in rows.into_iter().filter(|x| keep(&x.variant, f)) {
                    m.entry(x.seq.clone()).or_default().push(x);
                }
                m
            };
            let t = group(t, &args.target_variant);
            let r = group(r, &args.reference_variant);
            check_ids(&t.keys().cloned().collect(), &r.keys().cloned().collect())?;
            t.iter()
                .map(|(id, a)| {
                    let b = &r[id];
                    let ea = SampleSet::new("target", a.iter().map(|x| x.energy).collect())?;
                    let eb = SampleSet::new("reference", b.iter().map(|x| x.energy).collect())?;
                    let test = mann_whitney_u(&ea, &eb);
                    let ra: Option<Vec<f64>> = a.iter().map(|x| x.rmsd).collect();
                    let rb: Option<Vec<f64>> = b.iter().map(|x| x.rmsd).collect();
                    let (ri_rmsd, rmsd_test) = match (ra, rb) {
                        (Some(ra), Some(rb)) => {
                            let (sa, sb) = (SampleSet::new("target", ra)?, SampleSet::new("reference", rb)?);
                            (Some(rmsd_improvement(sa.mean(), sb.mean())?), Some(mann_whitney_u(&sa, &sb)))
                        }
                        _ => (None, None),
                    };
                    Ok(StatsRow {
                        seq: id.clone(),
                        target_energy: ea.mean(),
                        reference_energy: eb.mean(),
                        ri_energy: relative_improvement(ea.mean(), eb.mean())?,
                        ri_rmsd,
                        u: Some(test.u_a),
                        p: Some(test.p),
                        significant: Some(test.significant),
                        rmsd_p: rmsd_test.map(|t| t.p),
                        rmsd_significant: rmsd_test.map(|t| t.significant),
                    })
                })
                .collect()
        }
        _ => Err(CliError::Usage("target and reference must both be summary CSVs or both runs CSVs".into())),
    }
}

// ---------------------------------------------------------------- entry

fn opt(v: Option<f64>, digits: usize) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.digits$}"))
}

/// Runs a parsed command line, printing a short report to stdout.
pub fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Fold(a) => {
            let out = cmd_fold(&a)?;
            let r = &out.record;
            println!("sequence     {} ({} residues)", r.sequence_id, r.sequence.len());
            println!("variant      {}", r.config.variant);
            println!("search {:<5} {:.4}", r.search_model.to_string(), r.best_search_energy);
            println!("BM energy    {:.4}", r.best_bm_energy);
            println!("generations  {}", r.generations);
            if let Some(x) = out.rmsd {
                println!("rmsd         {x:.3}");
            }
            println!("record       {}", out.record_path.display());
            println!("structure    {}", out.structure_path.display());
        }
        Command::Bench(a) => {
            let out = cmd_bench(&a)?;
            println!("{SUMMARY_HEADER}");
            for s in &out.summary {
                println!(
                    "{},{},{},{},{:.3},{:.3},{},{},{},{},{},{}",
                    s.seq,
                    s.size,
                    s.h,
                    s.variant,
                    s.best,
                    s.avg,
                    opt(s.best_rmsd, 3),
                    opt(s.avg_rmsd, 3),
                    s.hh,
                    s.hp,
                    s.pp,
                    s.total
                );
            }
            println!("wrote {} records to {}", out.records.len(), a.run.out.display());
        }
        Command::Eval(a) => {
            let out = cmd_eval(&a)?;
            println!("structure  {}", out.id);
            if let Some(e) = out.hp {
                println!("HP energy  {e:.4}");
            }
            if let Some(e) = out.bm {
                println!("BM energy  {e:.4}");
            }
            let c = out.census;
            println!("contacts   hh={} hp={} pp={} total={}", c.hh, c.hp, c.pp, c.total);
            if let Some(x) = out.rmsd {
                println!("rmsd       {x:.3}");
            }
        }
        Command::Stats(a) => {
            let rows = cmd_stats(&a)?;
            println!("seq,target,reference,ri_energy,ri_rmsd,p,significant");
            for r in rows {
                println!(
                    "{},{:.3},{:.3},{:.2},{},{},{}",
                    r.seq,
                    r.target_energy,
                    r.reference_energy,
                    r.ri_energy,
                    opt(r.ri_rmsd, 2),
                    opt(r.p, 4),
                    r.significant.map_or("-".into(), |s| s.to_string())
                );
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_suite() {
        let suite = BenchmarkSuite::bundled();
        assert_eq!(suite.entries.len(), 12);
        let pnx = suite.get("3PNX").unwrap();
        assert_eq!((pnx.declared_length, pnx.declared_h), (160, 84));
        assert_eq!(pnx.sequence.len(), 160);
        let rxn = suite.get("4rxn").unwrap();
        assert_eq!((rxn.declared_length, rxn.declared_h), (54, 27));
        assert!(suite.self_check().iter().any(|m| m.id == "4RXN"));
        assert!(suite.select("1ENH,4RXN").unwrap().len() == 2);
        assert!(suite.select("XXXX").is_err());
    }

    #[test]
    fn seconds_parsing() {
        assert_eq!(parse_seconds("90").unwrap(), 90.0);
        assert_eq!(parse_seconds("2m").unwrap(), 120.0);
        assert_eq!(parse_seconds("1h 30s").unwrap(), 3630.0);
        assert!(parse_seconds("soon").is_err());
    }

    #[test]
    fn seeds_are_stable() {
        assert_eq!(derive_seeds(7, 3), derive_seeds(7, 3));
        assert_eq!(derive_seeds(7, 5)[..3], derive_seeds(7, 3)[..]);
        assert_ne!(derive_seeds(7, 3), derive_seeds(8, 3));
    }

    #[test]
    fn flags_override_config() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.toml");
        fs::write(&cfg, "pop_size = 12\nrwt = 3\n").unwrap();
        let args = RunArgs { config: Some(cfg), rwt: Some(5), ..Default::default() };
        let c = args.config().unwrap();
        assert_eq!((c.pop_size, c.rwt), (12, 5));
        let hour = RunArgs { paper_scale: true, ..Default::default() }.config().unwrap();
        assert_eq!(hour.time_budget, 3600.0);
    }

    #[test]
    fn trace_average() {
        let seq = parse_sequence("GAVLIF").unwrap();
        let cfg = RunConfig { pop_size: 4, max_generations: Some(3), ..Default::default() };
        let r = run(&seq, &ContactMatrix::bundled(), &cfg).unwrap();
        let rows = average_trace("x", Variant::BH, &[r.clone(), r.clone()], 1.0, 0.25);
        // initialisation is charged to the clock, so t = 0 has no value yet
        assert!(r.trace[0].seconds > 0.0);
        assert_eq!(rows.iter().map(|x| x.seconds).collect::<Vec<_>>(), vec![0.25, 0.5, 0.75, 1.0]);
        assert!(rows.windows(2).all(|w| w[1].mean_energy <= w[0].mean_energy));
        assert_eq!(rows.last().unwrap().mean_energy, r.best_search_energy);
    }
}
