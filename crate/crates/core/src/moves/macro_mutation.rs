use rand::Rng;
use serde::{Deserialize, Serialize};

use super::diagonal_candidates;
use crate::chain::{Conformation, HpClass, Sequence};
use crate::energy::{dist_to, hcc_of, Scorer};
use crate::lattice::LatticePoint;

/// Acceptance test applied to diagonal moves of hydrophobic residues.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MacroGuidance {
    /// Accept a move that does not take the residue further from the
    /// hydrophobic core centre.
    Hcc,
    /// Accept a move that does not raise the BM energy.
    BmEnergy,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MacroParams {
    /// Number of sweeps.
    pub repeat: usize,
    /// Probability that a sweep targets P residues.
    pub p: f64,
    pub guidance: MacroGuidance,
}

impl Default for MacroParams {
    fn default() -> Self {
        MacroParams { repeat: 5, p: 0.20, guidance: MacroGuidance::Hcc }
    }
}

/// A diagonal move accepted during a macro-mutation. Distances are to the
/// core centre of the sweep in which the move happened; `None` when the
/// sequence has no hydrophobic residue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcceptedDiagonal {
    pub sweep: usize,
    pub residue: usize,
    pub class: HpClass,
    pub from: LatticePoint,
    pub to: LatticePoint,
    pub d_old: Option<f64>,
    pub d_new: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MacroReport {
    pub conformation: Conformation,
    pub accepted: Vec<AcceptedDiagonal>,
}

/// Repeated diagonal moves over one residue class per sweep.
///
/// Each sweep draws the class (P with probability `p`, else H), fixes the
/// core centre, then visits residues of that class in index order. P
/// residues take their first free diagonal position. H residues take the
/// first position that passes the guidance test. Moves accumulate within
/// and across sweeps. `bm` is only consulted under `BmEnergy` guidance.
pub fn macro_mutation<R: Rng + ?Sized>(
    c: &Conformation,
    seq: &Sequence,
    params: &MacroParams,
    bm: &Scorer,
    rng: &mut R,
) -> MacroReport {
    assert_eq!(c.len(), seq.len(), "conformation and sequence lengths differ");
    let n = c.len();
    let mut coords = c.coords().to_vec();
    let mut occ = c.occupancy();
    let mut accepted = Vec::new();
    for sweep in 0..params.repeat {
        let target = if rng.gen_bool(params.p) { HpClass::P } else { HpClass::H };
        let centre = hcc_of(&coords, seq).ok();
        for j in 1..n.saturating_sub(1) {
            if seq.class(j) != target {
                continue;
            }
            let from = coords[j];
            let d_old = centre.as_ref().map(|h| dist_to(from, h));
            let candidates = diagonal_candidates(&coords, &occ, j);
            let chosen = match target {
                HpClass::P => candidates.first().copied(),
                HpClass::H => match params.guidance {
                    MacroGuidance::Hcc => {
                        let (h, d0) = (centre.as_ref().unwrap(), d_old.unwrap());
                        candidates.iter().copied().find(|&q| dist_to(q, h) <= d0)
                    }
                    MacroGuidance::BmEnergy => candidates.iter().copied().find(|&q| bm.delta_single(&coords, j, q) <= 0.0),
                },
            };
            if let Some(to) = chosen {
                occ.remove(from);
                occ.insert(to);
                coords[j] = to;
                accepted.push(AcceptedDiagonal {
                    sweep,
                    residue: j,
                    class: target,
                    from,
                    to,
                    d_old,
                    d_new: centre.as_ref().map(|h| dist_to(to, h)),
                });
            }
        }
    }
    let conformation = Conformation::from_coords(&coords).expect("diagonal moves keep the walk valid");
    MacroReport { conformation, accepted }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{initialise, parse_sequence};
    use crate::energy::{ContactMatrix, EnergyModelId};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn hcc_guidance_never_moves_h_outward() {
        let seq = parse_sequence("MKVLAGSTEEIFPRWDNAHLCVY").unwrap();
        let bm = Scorer::new(&seq, EnergyModelId::Bm, &ContactMatrix::bundled());
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut h_moves = 0;
        for _ in 0..50 {
            let c = initialise(seq.len(), &mut rng, 100);
            let rep = macro_mutation(&c, &seq, &MacroParams::default(), &bm, &mut rng);
            rep.conformation.validate().unwrap();
            for a in rep.accepted.iter().filter(|a| a.class == HpClass::H) {
                assert!(a.d_new.unwrap() <= a.d_old.unwrap());
                h_moves += 1;
            }
        }
        assert!(h_moves > 0);
    }

    #[test]
    fn bm_guidance_never_raises_energy_on_h_moves() {
        let seq = parse_sequence("MKVLAGSTEEIFPRWDNAHLCVY").unwrap();
        let bm = Scorer::new(&seq, EnergyModelId::Bm, &ContactMatrix::bundled());
        let params = MacroParams { guidance: MacroGuidance::BmEnergy, p: 0.0, ..Default::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..30 {
            let c = initialise(seq.len(), &mut rng, 100);
            let rep = macro_mutation(&c, &seq, &params, &bm, &mut rng);
            // p = 0 means every sweep targets H, so energy is monotone
            assert!(bm.energy(rep.conformation.coords()) <= bm.energy(c.coords()) + 1e-9);
        }
    }

    #[test]
    fn zero_repeat_is_identity() {
        let seq = parse_sequence("GSGSSGGSGG").unwrap();
        let bm = Scorer::new(&seq, EnergyModelId::Bm, &ContactMatrix::bundled());
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let c = initialise(seq.len(), &mut rng, 100);
        let rep = macro_mutation(&c, &seq, &MacroParams { repeat: 0, ..Default::default() }, &bm, &mut rng);
        assert_eq!(rep.conformation, c);
        assert!(rep.accepted.is_empty());
    }
}
