//! Structure quality and run statistics.

use std::path::Path;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

use crate::chain::{parse_sequence, Conformation};
use crate::energy::{contact_census, ContactCensus};
use crate::engine::RunRecord;

/// Ångström per lattice unit: one neighbour step (length √2) is 3.8 Å.
pub const LATTICE_SCALE: f64 = 3.8 / std::f64::consts::SQRT_2;

/// Significance level for the rank-sum test.
pub const ALPHA: f64 = 0.05;

/// Largest combined sample size for which the exact null distribution is
/// enumerated.
pub const EXACT_LIMIT: usize = 20;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("reference has {reference} residues, structure has {structure}")]
    DimensionMismatch { reference: usize, structure: usize },
    #[error("reference matrix: {0}")]
    BadMatrix(String),
    #[error("reference file line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("relative improvement needs a non-zero reference value")]
    ZeroReference,
    #[error("empty sample set")]
    EmptySample,
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

/// Native pairwise distances in Å.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceStructure {
    n: usize,
    dist: Vec<f64>,
}

impl ReferenceStructure {
    pub fn from_matrix(rows: Vec<Vec<f64>>) -> Result<Self, MetricsError> {
        let n = rows.len();
        let bad = |m: String| Err(MetricsError::BadMatrix(m));
        if n < 2 {
            return bad(format!("need at least 2 rows, got {n}"));
        }
        let mut dist = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return bad(format!("row {} has {} entries, expected {n}", i + 1, row.len()));
            }
            dist.extend_from_slice(row);
        }
        for i in 0..n {
            if dist[i * n + i] != 0.0 {
                return bad(format!("diagonal entry {} is {}", i + 1, dist[i * n + i]));
            }
            for j in 0..n {
                let v = dist[i * n + j];
                if !(v >= 0.0) || !v.is_finite() {
                    return bad(format!("entry ({}, {}) is {v}", i + 1, j + 1));
                }
                if (v - dist[j * n + i]).abs() > 1e-6 {
                    return bad(format!("entries ({}, {}) and ({}, {}) differ", i + 1, j + 1, j + 1, i + 1));
                }
            }
        }
        Ok(ReferenceStructure { n, dist })
    }

    pub fn from_coords(points: &[[f64; 3]]) -> Self {
        let n = points.len();
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                dist[i * n + j] = euclid(&points[i], &points[j]);
            }
        }
        ReferenceStructure { n, dist }
    }

    /// Distances of a lattice conformation in Å.
    pub fn from_conformation(c: &Conformation) -> Self {
        let pts: Vec<[f64; 3]> = c.coords().iter().map(|p| p.as_f64().map(|v| v * LATTICE_SCALE)).collect();
        Self::from_coords(&pts)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }
}

fn euclid(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Reads a reference structure: either a CSV distance matrix (one row per
/// line, comma separated) or `index x y z` coordinate lines. Blank lines and
/// lines starting with `#` are skipped.
pub fn read_reference(text: &str) -> Result<ReferenceStructure, MetricsError> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .collect();
    let number = |line: usize, s: &str| {
        s.trim().parse::<f64>().map_err(|_| MetricsError::Parse { line, msg: format!("'{}' is not a number", s.trim()) })
    };
    let is_matrix = lines.first().is_some_and(|(_, l)| l.contains(','));
    if is_matrix {
        let mut rows = Vec::with_capacity(lines.len());
        for &(line, l) in &lines {
            rows.push(l.split(',').map(|f| number(line, f)).collect::<Result<Vec<_>, _>>()?);
        }
        return ReferenceStructure::from_matrix(rows);
    }
    let mut pts = Vec::with_capacity(lines.len());
    for &(line, l) in &lines {
        let f: Vec<&str> = l.split_whitespace().collect();
        if f.len() != 4 {
            return Err(MetricsError::Parse { line, msg: format!("expected 'index x y z', got {} fields", f.len()) });
        }
        let index = f[0].parse::<usize>().map_err(|_| MetricsError::Parse { line, msg: "bad index".into() })?;
        if index != pts.len() && index != pts.len() + 1 {
            return Err(MetricsError::Parse { line, msg: format!("index {index} out of order") });
        }
        pts.push([number(line, f[1])?, number(line, f[2])?, number(line, f[3])?]);
    }
    if pts.len() < 2 {
        return Err(MetricsError::BadMatrix("need at least 2 coordinates".into()));
    }
    Ok(ReferenceStructure::from_coords(&pts))
}

pub fn load_reference(path: &Path) -> Result<ReferenceStructure, MetricsError> {
    read_reference(&std::fs::read_to_string(path)?)
}

/// Distance-matrix RMSD in Å: the root mean squared difference between
/// predicted and native distances over all residue pairs. No superposition
/// is involved.
pub fn rmsd(c: &Conformation, reference: &ReferenceStructure) -> Result<f64, MetricsError> {
    let n = c.len();
    if reference.n != n {
        return Err(MetricsError::DimensionMismatch { reference: reference.n, structure: n });
    }
    let coords = c.coords();
    let mut sum = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let d = coords[i].dist(&coords[j]) * LATTICE_SCALE;
            sum += (d - reference.get(i, j)).powi(2);
        }
    }
    let pairs = (n * (n - 1) / 2) as f64;
    Ok((sum / pairs).sqrt())
}

/// Percent improvement of a target energy over a reference energy,
/// `(target - reference) / reference * 100`. Positive when the target is
/// lower (both energies negative).
pub fn relative_improvement(target: f64, reference: f64) -> Result<f64, MetricsError> {
    if reference == 0.0 {
        return Err(MetricsError::ZeroReference);
    }
    // adding 0.0 turns -0.0 into 0.0
    Ok((target - reference) / reference * 100.0 + 0.0)
}

/// Percent improvement of a target RMSD over a reference RMSD,
/// `(reference - target) / reference * 100`.
pub fn rmsd_improvement(target: f64, reference: f64) -> Result<f64, MetricsError> {
    if reference == 0.0 {
        return Err(MetricsError::ZeroReference);
    }
    Ok((reference - target) / reference * 100.0 + 0.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub label: String,
    pub values: Vec<f64>,
}

impl SampleSet {
    pub fn new(label: impl Into<String>, values: Vec<f64>) -> Result<Self, MetricsError> {
        if values.is_empty() {
            return Err(MetricsError::EmptySample);
        }
        Ok(SampleSet { label: label.into(), values })
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MannWhitney {
    /// U statistic of the first sample.
    pub u_a: f64,
    /// U statistic of the second sample; `u_a + u_b = |a| |b|`.
    pub u_b: f64,
    /// Two-sided p-value.
    pub p: f64,
    pub exact: bool,
    pub significant: bool,
}

/// Midranks (1-based) of `values`, ties sharing their average rank.
pub fn midranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        let r = (i + j + 2) as f64 / 2.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Two-sided Mann-Whitney rank-sum test.
///
/// Ties get midranks. For at most [`EXACT_LIMIT`] observations in total the
/// p-value comes from the exact permutation distribution of the rank sum
/// (conditional on the observed ties); otherwise from the normal
/// approximation with tie and continuity corrections.
pub fn mann_whitney_u(a: &SampleSet, b: &SampleSet) -> MannWhitney {
    let (na, nb) = (a.values.len(), b.values.len());
    let pooled: Vec<f64> = a.values.iter().chain(&b.values).copied().collect();
    let ranks = midranks(&pooled);
    let r_a: f64 = ranks[..na].iter().sum();
    let u_a = r_a - (na * (na + 1)) as f64 / 2.0;
    let u_b = (na * nb) as f64 - u_a;
    let n = na + nb;
    let exact = n <= EXACT_LIMIT;
    let p = if exact { exact_p(&ranks, na, r_a) } else { normal_p(&pooled, na, nb, u_a) };
    MannWhitney { u_a, u_b, p, exact, significant: p < ALPHA }
}

fn exact_p(ranks: &[f64], na: usize, r_a: f64) -> f64 {
    // doubled midranks are integers, so rank sums can be counted by DP
    let doubled: Vec<usize> = ranks.iter().map(|r| (r * 2.0).round() as usize).collect();
    let max_sum: usize = doubled.iter().sum();
    // ways[k][s]: subsets of size k with doubled rank sum s
    let mut ways = vec![vec![0f64; max_sum + 1]; na + 1];
    ways[0][0] = 1.0;
    for &r in &doubled {
        for k in (1..=na).rev() {
            for s in (r..=max_sum).rev() {
                let add = ways[k - 1][s - r];
                if add > 0.0 {
                    ways[k][s] += add;
                }
            }
        }
    }
    let total: f64 = ways[na].iter().sum();
    let mean2 = na as f64 * (ranks.len() + 1) as f64;
    let observed = (2.0 * r_a - mean2).abs();
    let extreme: f64 = ways[na]
        .iter()
        .enumerate()
        .filter(|(s, _)| (*s as f64 - mean2).abs() >= observed - 1e-9)
        .map(|(_, w)| w)
        .sum();
    (extreme / total).min(1.0)
}

fn normal_p(pooled: &[f64], na: usize, nb: usize, u_a: f64) -> f64 {
    let n = (na + nb) as f64;
    let mut sorted = pooled.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        let t = (j - i + 1) as f64;
        tie_term += t * t * t - t;
        i = j + 1;
    }
    let (fa, fb) = (na as f64, nb as f64);
    let var = fa * fb / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if var <= 0.0 {
        return 1.0;
    }
    let z = ((u_a - fa * fb / 2.0).abs() - 0.5).max(0.0) / var.sqrt();
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    (2.0 * (1.0 - normal.cdf(z))).min(1.0)
}

/// Header of the summary CSV.
pub const SUMMARY_HEADER: &str = "seq,size,h,variant,best,avg,best_rmsd,avg_rmsd,hh,hp,pp,total";

/// One row of the summary table: energies are BM-reported, RMSDs are empty
/// when no reference structure was supplied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub seq: String,
    pub size: usize,
    pub h: usize,
    pub variant: String,
    pub best: f64,
    pub avg: f64,
    pub best_rmsd: Option<f64>,
    pub avg_rmsd: Option<f64>,
    pub hh: usize,
    pub hp: usize,
    pub pp: usize,
    pub total: usize,
}

impl SummaryRow {
    pub fn census(&self) -> ContactCensus {
        ContactCensus { hh: self.hh, hp: self.hp, pp: self.pp, total: self.total }
    }
}

/// Aggregates runs of one sequence and variant. Panics on an empty slice.
pub fn summarize(runs: &[RunRecord], reference: Option<&ReferenceStructure>) -> Result<SummaryRow, MetricsError> {
    assert!(!runs.is_empty(), "summarize needs at least one run");
    let first = &runs[0];
    let seq = parse_sequence(&first.sequence).map_err(|e| MetricsError::BadMatrix(e.to_string()))?;
    let energies: Vec<f64> = runs.iter().map(|r| r.best_bm_energy).collect();
    let best_idx = (0..runs.len()).reduce(|a, b| if energies[b] < energies[a] { b } else { a }).unwrap();
    let conformations: Vec<Conformation> = runs
        .iter()
        .map(|r| r.best_conformation().map_err(|e| MetricsError::BadMatrix(e.to_string())))
        .collect::<Result<_, _>>()?;
    let census = contact_census(&conformations[best_idx], &seq);
    let (best_rmsd, avg_rmsd) = match reference {
        Some(r) => {
            let v: Vec<f64> = conformations.iter().map(|c| rmsd(c, r)).collect::<Result<_, _>>()?;
            (Some(v.iter().copied().fold(f64::INFINITY, f64::min)), Some(v.iter().sum::<f64>() / v.len() as f64))
        }
        None => (None, None),
    };
    Ok(SummaryRow {
        seq: first.sequence_id.clone(),
        size: seq.len(),
        h: seq.h_count(),
        variant: first.config.variant.to_string(),
        best: energies[best_idx],
        avg: energies.iter().sum::<f64>() / energies.len() as f64,
        best_rmsd,
        avg_rmsd,
        hh: census.hh,
        hp: census.hp,
        pp: census.pp,
        total: census.total,
    })
}

pub fn write_summary_csv(rows: &[SummaryRow]) -> Result<String, MetricsError> {
    write_csv(rows)
}

pub fn read_summary_csv(text: &str) -> Result<Vec<SummaryRow>, MetricsError> {
    read_csv(text)
}

/// Header of the per-run CSV.
pub const RUNS_HEADER: &str = "seq,variant,seed,energy,search_energy,rmsd,generations";

/// One run's outcome, for significance testing across runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub seq: String,
    pub variant: String,
    pub seed: u64,
    /// BM-reported energy.
    pub energy: f64,
    pub search_energy: f64,
    pub rmsd: Option<f64>,
    pub generations: u64,
}

impl RunRow {
    pub fn from_record(r: &RunRecord, reference: Option<&ReferenceStructure>) -> Result<Self, MetricsError> {
        let rmsd = match reference {
            Some(refs) => {
                let c = r.best_conformation().map_err(|e| MetricsError::BadMatrix(e.to_string()))?;
                Some(rmsd(&c, refs)?)
            }
            None => None,
        };
        Ok(RunRow {
            seq: r.sequence_id.clone(),
            variant: r.config.variant.to_string(),
            seed: r.config.seed,
            energy: r.best_bm_energy,
            search_energy: r.best_search_energy,
            rmsd,
            generations: r.generations,
        })
    }
}

pub fn write_runs_csv(rows: &[RunRow]) -> Result<String, MetricsError> {
    write_csv(rows)
}

pub fn read_runs_csv(text: &str) -> Result<Vec<RunRow>, MetricsError> {
    read_csv(text)
}

fn write_csv<T: Serialize>(rows: &[T]) -> Result<String, MetricsError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| MetricsError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn read_csv<T: for<'de> Deserialize<'de>>(text: &str) -> Result<Vec<T>, MetricsError> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    r.deserialize().map(|row| row.map_err(MetricsError::from)).collect()
}
