//! Contact energy models.
//!
//! Both models sum pairwise contributions over non-consecutive residues
//! (`j >= i + 2`) whose lattice points are in contact. The HP model scores
//! -1 per hydrophobic pair; the BM model looks the pair up in a 20x20
//! empirical contact matrix loaded from a CSV file.

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chain::{AminoAcid, Conformation, HpClass, Sequence};
use crate::lattice::{is_contact, LatticePoint, CONTACT_SQ_DIST};

/// Matrix bundled with the crate; see the header of the file for provenance.
pub const DEFAULT_MATRIX_CSV: &str = include_str!("../data/mj1996_contact.csv");
pub const DEFAULT_MATRIX_NAME: &str = "mj1996_contact";

/// Largest |m[a][b] - m[b][a]| accepted when loading a matrix.
pub const SYMMETRY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum EnergyError {
    #[error("matrix header: {0}")]
    Header(String),
    #[error("matrix is missing amino acid code '{0}'")]
    MissingCode(char),
    #[error("matrix row {row}, column {col}: '{text}' is not a finite number")]
    NonNumeric { row: usize, col: usize, text: String },
    #[error("matrix row {row} has {got} values, expected 20")]
    RowLength { row: usize, got: usize },
    #[error("matrix has {0} data rows, expected 20")]
    RowCount(usize),
    #[error("matrix is asymmetric at ({a},{b}): {ab} vs {ba}")]
    Asymmetric { a: char, b: char, ab: f64, ba: f64 },
    #[error("sequence has no hydrophobic residues")]
    NoHydrophobic,
    #[error("unknown energy model '{0}' (expected HP or BM)")]
    UnknownModel(String),
    #[error("reading matrix: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EnergyModelId {
    #[serde(rename = "HP")]
    Hp,
    #[serde(rename = "BM")]
    Bm,
}

impl fmt::Display for EnergyModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EnergyModelId::Hp => "HP",
            EnergyModelId::Bm => "BM",
        })
    }
}

impl FromStr for EnergyModelId {
    type Err = EnergyError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "HP" => Ok(EnergyModelId::Hp),
            "BM" => Ok(EnergyModelId::Bm),
            _ => Err(EnergyError::UnknownModel(s.to_string())),
        }
    }
}

/// Symmetric 20x20 contact energy table, indexed by [`AminoAcid::index`].
#[derive(Debug, Clone, PartialEq)]
pub struct ContactMatrix {
    pub name: String,
    values: [[f64; 20]; 20],
}

impl ContactMatrix {
    pub fn zeros(name: impl Into<String>) -> Self {
        ContactMatrix { name: name.into(), values: [[0.0; 20]; 20] }
    }

    pub fn bundled() -> Self {
        load_matrix(DEFAULT_MATRIX_CSV, DEFAULT_MATRIX_NAME).expect("bundled matrix is valid")
    }

    pub fn from_file(path: &Path) -> Result<Self, EnergyError> {
        let text = std::fs::read_to_string(path)?;
        let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("matrix").to_string();
        load_matrix(&text, &name)
    }

    #[inline]
    pub fn get(&self, a: AminoAcid, b: AminoAcid) -> f64 {
        self.values[a.index()][b.index()]
    }

    /// Renders the matrix in the loader's CSV layout.
    pub fn to_csv(&self) -> String {
        let mut out = AminoAcid::CODES.chars().map(String::from).collect::<Vec<_>>().join(",");
        out.push('\n');
        for row in &self.values {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Parses the CSV matrix layout: `#` comment lines, a header row of 20
/// one-letter codes giving the column order, then 20 rows in the same order.
pub fn load_matrix(text: &str, name: &str) -> Result<ContactMatrix, EnergyError> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines.next().ok_or_else(|| EnergyError::Header("empty file".into()))?;
    let mut order = Vec::with_capacity(20);
    for cell in header.split(',').map(str::trim).filter(|c| !c.is_empty()) {
        let mut chars = cell.chars();
        let aa = match (chars.next(), chars.next()) {
            (Some(c), None) => AminoAcid::from_code(c),
            _ => None,
        }
        .ok_or_else(|| EnergyError::Header(format!("'{cell}' is not a one-letter code")))?;
        if order.contains(&aa) {
            return Err(EnergyError::Header(format!("duplicate code '{cell}'")));
        }
        order.push(aa);
    }
    if let Some(missing) = AminoAcid::ALL.iter().find(|a| !order.contains(a)) {
        return Err(EnergyError::MissingCode(missing.code()));
    }

    let mut values = [[0.0; 20]; 20];
    let mut rows = 0;
    for (r, line) in lines.enumerate() {
        if r >= 20 {
            return Err(EnergyError::RowCount(r + 1));
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != 20 {
            return Err(EnergyError::RowLength { row: r + 1, got: cells.len() });
        }
        for (c, cell) in cells.iter().enumerate() {
            let v: f64 = cell
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| EnergyError::NonNumeric { row: r + 1, col: c + 1, text: cell.to_string() })?;
            values[order[r].index()][order[c].index()] = v;
        }
        rows += 1;
    }
    if rows != 20 {
        return Err(EnergyError::RowCount(rows));
    }
    for a in AminoAcid::ALL {
        for b in AminoAcid::ALL {
            let (ab, ba) = (values[a.index()][b.index()], values[b.index()][a.index()]);
            if (ab - ba).abs() > SYMMETRY_TOLERANCE {
                return Err(EnergyError::Asymmetric { a: a.code(), b: b.code(), ab, ba });
            }
        }
    }
    Ok(ContactMatrix { name: name.to_string(), values })
}

#[inline]
fn pair_energy(seq: &Sequence, model: EnergyModelId, m: &ContactMatrix, i: usize, j: usize) -> f64 {
    match model {
        EnergyModelId::Hp => {
            if seq.class(i) == HpClass::H && seq.class(j) == HpClass::H {
                -1.0
            } else {
                0.0
            }
        }
        EnergyModelId::Bm => m.get(seq.code(i), seq.code(j)),
    }
}

/// Full pairwise energy of a conformation.
pub fn evaluate(c: &Conformation, seq: &Sequence, model: EnergyModelId, m: &ContactMatrix) -> f64 {
    let coords = c.coords();
    let n = coords.len();
    let mut total = 0.0;
    for i in 0..n {
        for j in i + 2..n {
            if coords[i].sq_dist(&coords[j]) == CONTACT_SQ_DIST {
                total += pair_energy(seq, model, m, i, j);
            }
        }
    }
    total
}

/// Energy function bound to one sequence, with the pair table precomputed.
#[derive(Debug, Clone)]
pub struct Scorer {
    model: EnergyModelId,
    n: usize,
    table: Arc<[f64]>,
}

impl Scorer {
    pub fn new(seq: &Sequence, model: EnergyModelId, m: &ContactMatrix) -> Self {
        let n = seq.len();
        let mut table = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                table[i * n + j] = pair_energy(seq, model, m, i, j);
            }
        }
        Scorer { model, n, table: table.into() }
    }

    pub fn model(&self) -> EnergyModelId {
        self.model
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn pair(&self, i: usize, j: usize) -> f64 {
        self.table[i * self.n + j]
    }

    pub fn energy(&self, coords: &[LatticePoint]) -> f64 {
        debug_assert_eq!(coords.len(), self.n);
        let n = coords.len();
        let mut total = 0.0;
        for i in 0..n {
            let row = &self.table[i * n..(i + 1) * n];
            let pi = coords[i];
            for j in i + 2..n {
                if pi.sq_dist(&coords[j]) == CONTACT_SQ_DIST {
                    total += row[j];
                }
            }
        }
        total
    }

    /// Energy change when residue `i` alone moves to `to`.
    pub fn delta_single(&self, coords: &[LatticePoint], i: usize, to: LatticePoint) -> f64 {
        let from = coords[i];
        let mut delta = 0.0;
        for (j, p) in coords.iter().enumerate() {
            if j + 1 >= i && j <= i + 1 {
                continue;
            }
            let before = is_contact(from, *p);
            let after = is_contact(to, *p);
            if before != after {
                let e = self.pair(i, j);
                delta += if after { e } else { -e };
            }
        }
        delta
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContactCensus {
    pub hh: usize,
    pub hp: usize,
    pub pp: usize,
    pub total: usize,
}

/// Non-consecutive contacts split by residue class.
pub fn contact_census(c: &Conformation, seq: &Sequence) -> ContactCensus {
    let coords = c.coords();
    let mut census = ContactCensus::default();
    for i in 0..coords.len() {
        for j in i + 2..coords.len() {
            if !is_contact(coords[i], coords[j]) {
                continue;
            }
            match (seq.class(i), seq.class(j)) {
                (HpClass::H, HpClass::H) => census.hh += 1,
                (HpClass::P, HpClass::P) => census.pp += 1,
                _ => census.hp += 1,
            }
            census.total += 1;
        }
    }
    census
}

/// Hydrophobic core centre: mean position of the hydrophobic residues.
pub fn hcc(c: &Conformation, seq: &Sequence) -> Result<[f64; 3], EnergyError> {
    hcc_of(c.coords(), seq)
}

pub(crate) fn hcc_of(coords: &[LatticePoint], seq: &Sequence) -> Result<[f64; 3], EnergyError> {
    let mut sum = [0.0; 3];
    let mut count = 0usize;
    for (p, r) in coords.iter().zip(seq.residues()) {
        if r.class == HpClass::H {
            let f = p.as_f64();
            sum[0] += f[0];
            sum[1] += f[1];
            sum[2] += f[2];
            count += 1;
        }
    }
    if count == 0 {
        return Err(EnergyError::NoHydrophobic);
    }
    let k = count as f64;
    Ok([sum[0] / k, sum[1] / k, sum[2] / k])
}

pub(crate) fn dist_to(p: LatticePoint, centre: &[f64; 3]) -> f64 {
    let f = p.as_f64();
    ((f[0] - centre[0]).powi(2) + (f[1] - centre[1]).powi(2) + (f[2] - centre[2]).powi(2)).sqrt()
}
