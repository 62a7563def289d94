//! Protein sequences and their lattice conformations.
//!
//! A [`Conformation`] stores the chain twice: as the list of absolute basis
//! directions between consecutive residues, and as the lattice coordinates
//! those directions produce when the first residue sits at the origin. Every
//! constructor re-anchors the chain at the origin, so two conformations with
//! the same shape and placement have identical direction lists.

use std::fmt;
use std::fmt::Write as _;

use rand::Rng;
use rustc_hash::FxHashSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{Dir, LatticePoint};

#[derive(Debug, Error, PartialEq)]
pub enum ChainError {
    #[error("invalid residue '{ch}' at position {position}")]
    InvalidResidue { position: usize, ch: char },
    #[error("sequence must have at least 3 residues, got {0}")]
    TooShort(usize),
    #[error("self-collision: residue {residue} revisits the point of residue {earlier}")]
    Collision { residue: usize, earlier: usize },
    #[error("residues {0} and {1} are consecutive but not lattice neighbours")]
    Disconnected(usize, usize),
    #[error("residue {index}: {point} is not a lattice point")]
    OffLattice { index: usize, point: LatticePoint },
    #[error("structure has {got} residues, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("malformed structure file, line {line}: {msg}")]
    Malformed { line: usize, msg: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HpClass {
    H,
    P,
}

/// The 20 standard amino acids. The discriminant order is the row/column
/// order used for contact matrices internally.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum AminoAcid {
    Ala,
    Arg,
    Asn,
    Asp,
    Cys,
    Gln,
    Glu,
    Gly,
    His,
    Ile,
    Leu,
    Lys,
    Met,
    Phe,
    Pro,
    Ser,
    Thr,
    Trp,
    Tyr,
    Val,
}

impl AminoAcid {
    pub const COUNT: usize = 20;
    pub const CODES: &'static str = "ARNDCQEGHILKMFPSTWYV";

    pub const ALL: [AminoAcid; 20] = [
        AminoAcid::Ala,
        AminoAcid::Arg,
        AminoAcid::Asn,
        AminoAcid::Asp,
        AminoAcid::Cys,
        AminoAcid::Gln,
        AminoAcid::Glu,
        AminoAcid::Gly,
        AminoAcid::His,
        AminoAcid::Ile,
        AminoAcid::Leu,
        AminoAcid::Lys,
        AminoAcid::Met,
        AminoAcid::Phe,
        AminoAcid::Pro,
        AminoAcid::Ser,
        AminoAcid::Thr,
        AminoAcid::Trp,
        AminoAcid::Tyr,
        AminoAcid::Val,
    ];

    pub fn from_code(c: char) -> Option<AminoAcid> {
        let upper = c.to_ascii_uppercase();
        Self::CODES.find(upper).map(|i| Self::ALL[i])
    }

    pub fn code(self) -> char {
        Self::CODES.as_bytes()[self as usize] as char
    }

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    /// Hydrophobic: G, A, P, V, L, I, M, F, Y, W. Everything else is polar.
    pub fn class(self) -> HpClass {
        use AminoAcid::*;
        match self {
            Gly | Ala | Pro | Val | Leu | Ile | Met | Phe | Tyr | Trp => HpClass::H,
            _ => HpClass::P,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Residue {
    pub code: AminoAcid,
    pub class: HpClass,
}

impl From<AminoAcid> for Residue {
    fn from(code: AminoAcid) -> Self {
        Residue { code, class: code.class() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sequence {
    pub id: String,
    residues: Vec<Residue>,
}

impl Sequence {
    pub fn new(id: impl Into<String>, residues: Vec<Residue>) -> Result<Self, ChainError> {
        if residues.len() < 3 {
            return Err(ChainError::TooShort(residues.len()));
        }
        let id = sanitize_id(&id.into());
        Ok(Sequence { id, residues })
    }

    /// Builds a sequence from an `H`/`P` class string. H positions become
    /// alanine and P positions serine, so the HP model sees exactly the
    /// given pattern.
    pub fn from_hp(id: impl Into<String>, pattern: &str) -> Result<Self, ChainError> {
        let mut residues = Vec::with_capacity(pattern.len());
        for ch in pattern.chars().filter(|c| !c.is_whitespace()) {
            let aa = match ch.to_ascii_uppercase() {
                'H' => AminoAcid::Ala,
                'P' => AminoAcid::Ser,
                _ => return Err(ChainError::InvalidResidue { position: residues.len() + 1, ch }),
            };
            residues.push(Residue::from(aa));
        }
        Sequence::new(id, residues)
    }

    /// The class pattern as an `H`/`P` string.
    pub fn hp_string(&self) -> String {
        self.residues.iter().map(|r| if r.class == HpClass::H { 'H' } else { 'P' }).collect()
    }

    pub fn residues(&self) -> &[Residue] {
        &self.residues
    }

    pub fn len(&self) -> usize {
        self.residues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.residues.is_empty()
    }

    pub fn h_count(&self) -> usize {
        self.residues.iter().filter(|r| r.class == HpClass::H).count()
    }

    pub fn class(&self, i: usize) -> HpClass {
        self.residues[i].class
    }

    pub fn code(&self, i: usize) -> AminoAcid {
        self.residues[i].code
    }

    pub fn letters(&self) -> String {
        self.residues.iter().map(|r| r.code.code()).collect()
    }
}

impl fmt::Display for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({} aa, {} H)", self.id, self.len(), self.h_count())
    }
}

fn sanitize_id(id: &str) -> String {
    let id: String = id.trim().chars().map(|c| if c.is_whitespace() { '_' } else { c }).collect();
    if id.is_empty() {
        "query".to_string()
    } else {
        id
    }
}

/// Parses a bare residue string or a single FASTA record.
///
/// Whitespace is ignored. For FASTA input the first word of the header line
/// becomes the id; reported positions are 1-based over residue characters.
pub fn parse_sequence(text: &str) -> Result<Sequence, ChainError> {
    let mut id = String::from("query");
    let mut body = String::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if let Some(header) = line.strip_prefix('>') {
            if n == 0 || body.is_empty() {
                id = header.split_whitespace().next().unwrap_or("query").to_string();
                continue;
            }
            // a second record starts; only the first is read
            break;
        }
        if line.starts_with(';') {
            continue;
        }
        body.push_str(line);
    }
    let mut residues = Vec::with_capacity(body.len());
    for ch in body.chars().filter(|c| !c.is_whitespace()) {
        match AminoAcid::from_code(ch) {
            Some(aa) => residues.push(Residue::from(aa)),
            None => return Err(ChainError::InvalidResidue { position: residues.len() + 1, ch }),
        }
    }
    Sequence::new(id, residues)
}

/// Opaque identity of a conformation for duplicate detection.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DuplicateKey(Box<[u8]>);

#[derive(Debug, Clone, PartialEq)]
pub struct Conformation {
    dirs: Vec<Dir>,
    coords: Vec<LatticePoint>,
    energy: Option<f64>,
}

impl Conformation {
    /// Builds from a direction list, rejecting self-collisions.
    pub fn from_dirs(dirs: Vec<Dir>) -> Result<Self, ChainError> {
        let coords = rebuild_coords(&dirs)?;
        Ok(Conformation { dirs, coords, energy: None })
    }

    /// Builds from explicit coordinates, checking connectivity and
    /// self-avoidance, then translating residue 0 to the origin.
    pub fn from_coords(coords: &[LatticePoint]) -> Result<Self, ChainError> {
        let mut dirs = Vec::with_capacity(coords.len().saturating_sub(1));
        for (i, w) in coords.windows(2).enumerate() {
            match w[0].direction_to(&w[1]) {
                Some(d) => dirs.push(d),
                None => return Err(ChainError::Disconnected(i, i + 1)),
            }
        }
        Self::from_dirs(dirs)
    }

    /// Extended zig-zag alternating `v1`, `v4`; self-avoiding for any length.
    pub fn zigzag(len: usize) -> Self {
        let a = Dir::from_label(1).unwrap();
        let b = Dir::from_label(4).unwrap();
        let dirs = (0..len.saturating_sub(1)).map(|i| if i % 2 == 0 { a } else { b }).collect();
        Self::from_dirs(dirs).expect("zig-zag is self-avoiding")
    }

    pub fn dirs(&self) -> &[Dir] {
        &self.dirs
    }

    pub fn coords(&self) -> &[LatticePoint] {
        &self.coords
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn energy(&self) -> Option<f64> {
        self.energy
    }

    pub fn set_energy(&mut self, e: f64) {
        self.energy = Some(e);
    }

    pub fn with_energy(mut self, e: f64) -> Self {
        self.energy = Some(e);
        self
    }

    pub fn duplicate_key(&self) -> DuplicateKey {
        duplicate_key(self)
    }

    pub(crate) fn occupancy(&self) -> Occupancy {
        Occupancy::from_points(&self.coords)
    }

    /// Fraction of direction entries that differ from `other`.
    pub fn structural_difference(&self, other: &Conformation) -> f64 {
        let n = self.dirs.len().max(1);
        let diff = self.dirs.iter().zip(&other.dirs).filter(|(a, b)| a != b).count();
        diff as f64 / n as f64
    }

    /// Re-checks the self-avoiding-walk invariant from scratch.
    pub fn validate(&self) -> Result<(), ChainError> {
        let rebuilt = rebuild_coords(&self.dirs)?;
        if rebuilt != self.coords {
            return Err(ChainError::Malformed { line: 0, msg: "coordinates disagree with directions".into() });
        }
        Ok(())
    }
}

/// Coordinates of the walk starting at the origin.
pub fn rebuild_coords(dirs: &[Dir]) -> Result<Vec<LatticePoint>, ChainError> {
    let mut coords = Vec::with_capacity(dirs.len() + 1);
    let mut seen = Occupancy::with_capacity(dirs.len() + 1);
    let mut p = LatticePoint::ORIGIN;
    coords.push(p);
    seen.insert(p);
    for d in dirs {
        p = p + d.delta();
        if !seen.insert(p) {
            let earlier = coords.iter().position(|q| *q == p).unwrap_or(0);
            return Err(ChainError::Collision { residue: coords.len(), earlier });
        }
        coords.push(p);
    }
    Ok(coords)
}

pub fn duplicate_key(c: &Conformation) -> DuplicateKey {
    DuplicateKey(c.dirs.iter().map(|d| d.index() as u8).collect())
}

/// Random self-avoiding walk from the origin.
///
/// Each step draws uniformly among the free neighbours of the last residue;
/// a dead end restarts the walk. After `attempt_cap` restarts the extended
/// zig-zag is returned.
pub fn initialise<R: Rng + ?Sized>(len: usize, rng: &mut R, attempt_cap: usize) -> Conformation {
    let mut free = Vec::with_capacity(12);
    'attempt: for _ in 0..attempt_cap.max(1) {
        let mut occ = Occupancy::with_capacity(len);
        let mut dirs = Vec::with_capacity(len.saturating_sub(1));
        let mut p = LatticePoint::ORIGIN;
        occ.insert(p);
        for _ in 1..len {
            free.clear();
            free.extend(Dir::ALL.iter().copied().filter(|d| !occ.contains(p + d.delta())));
            if free.is_empty() {
                continue 'attempt;
            }
            let d = free[rng.gen_range(0..free.len())];
            p = p + d.delta();
            occ.insert(p);
            dirs.push(d);
        }
        return Conformation::from_dirs(dirs).expect("walk built on free points");
    }
    Conformation::zigzag(len)
}

/// Set of occupied lattice points.
#[derive(Debug, Clone, Default)]
pub(crate) struct Occupancy(FxHashSet<u64>);

impl Occupancy {
    pub fn with_capacity(n: usize) -> Self {
        Occupancy(FxHashSet::with_capacity_and_hasher(n, Default::default()))
    }

    pub fn from_points(points: &[LatticePoint]) -> Self {
        let mut occ = Self::with_capacity(points.len());
        for p in points {
            occ.insert(*p);
        }
        occ
    }

    #[inline]
    pub fn contains(&self, p: LatticePoint) -> bool {
        self.0.contains(&p.key())
    }

    #[inline]
    pub fn insert(&mut self, p: LatticePoint) -> bool {
        self.0.insert(p.key())
    }

    #[inline]
    pub fn remove(&mut self, p: LatticePoint) -> bool {
        self.0.remove(&p.key())
    }
}

/// A structure read back from the text export format.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureFile {
    pub id: String,
    pub model: String,
    pub energy: f64,
    pub codes: Vec<AminoAcid>,
    pub coords: Vec<LatticePoint>,
}

impl StructureFile {
    pub fn sequence(&self) -> Result<Sequence, ChainError> {
        Sequence::new(self.id.clone(), self.codes.iter().map(|&c| Residue::from(c)).collect())
    }

    /// Validates the coordinates as a self-avoiding walk. Coordinates must
    /// already be anchored at the origin for an exact round trip.
    pub fn conformation(&self) -> Result<Conformation, ChainError> {
        for (i, p) in self.coords.iter().enumerate() {
            if !p.on_lattice() {
                return Err(ChainError::OffLattice { index: i, point: *p });
            }
        }
        let c = Conformation::from_coords(&self.coords)?;
        Ok(c.with_energy(self.energy))
    }
}

/// Text export: a header `# id=<id> model=<model> energy=<e>` followed by
/// one `index code x y z` line per residue.
pub fn export_structure(c: &Conformation, seq: &Sequence, model: &str, energy: f64) -> String {
    let mut out = String::with_capacity(24 * c.len() + 64);
    let _ = writeln!(out, "# id={} model={} energy={:?}", seq.id, model, energy);
    for (i, (p, r)) in c.coords().iter().zip(seq.residues()).enumerate() {
        let _ = writeln!(out, "{} {} {} {} {}", i, r.code.code(), p.x, p.y, p.z);
    }
    out
}

pub fn import_structure(text: &str) -> Result<StructureFile, ChainError> {
    let mut header: Option<(String, String, f64)> = None;
    let mut codes = Vec::new();
    let mut coords = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let malformed = |msg: &str| ChainError::Malformed { line: line_no, msg: msg.to_string() };
        if let Some(rest) = line.strip_prefix('#') {
            if header.is_some() || !codes.is_empty() {
                continue;
            }
            let (mut id, mut model, mut energy) = (None, None, None);
            for field in rest.split_whitespace() {
                match field.split_once('=') {
                    Some(("id", v)) => id = Some(v.to_string()),
                    Some(("model", v)) => model = Some(v.to_string()),
                    Some(("energy", v)) => energy = Some(v.parse::<f64>().map_err(|_| malformed("bad energy"))?),
                    _ => {}
                }
            }
            header = Some((
                id.ok_or_else(|| malformed("header lacks id="))?,
                model.unwrap_or_else(|| "BM".to_string()),
                energy.ok_or_else(|| malformed("header lacks energy="))?,
            ));
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 5 {
            return Err(malformed("expected `index code x y z`"));
        }
        let index: usize = fields[0].parse().map_err(|_| malformed("bad index"))?;
        if index != codes.len() {
            return Err(malformed("residue indices must run 0, 1, 2, ..."));
        }
        let mut chars = fields[1].chars();
        let code = match (chars.next(), chars.next()) {
            (Some(c), None) => AminoAcid::from_code(c).ok_or_else(|| malformed("unknown residue code"))?,
            _ => return Err(malformed("residue code must be one letter")),
        };
        let num = |s: &str| s.parse::<i32>().map_err(|_| malformed("bad coordinate"));
        codes.push(code);
        coords.push(LatticePoint::new(num(fields[2])?, num(fields[3])?, num(fields[4])?));
    }
    let (id, model, energy) = header.ok_or(ChainError::Malformed { line: 1, msg: "missing header".into() })?;
    Ok(StructureFile { id, model, energy, codes, coords })
}
