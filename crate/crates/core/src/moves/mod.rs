//! Conformation operators.
//!
//! Every operator works on a copy and either fails or returns a valid
//! self-avoiding walk of the same length, re-anchored at the origin. Site
//! indices are 0-based residue positions.

mod macro_mutation;

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::chain::{Conformation, Occupancy};
use crate::lattice::{is_contact, lattice_rotations, neighbors, Dir, LatticePoint};

pub use macro_mutation::{macro_mutation, AcceptedDiagonal, MacroGuidance, MacroParams, MacroReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MoveKind {
    Crossover,
    Rotation,
    Diagonal,
    Pull,
    Tilt,
    MacroMutation,
}

impl MoveKind {
    pub const ALL: [MoveKind; 6] = [
        MoveKind::Crossover,
        MoveKind::Rotation,
        MoveKind::Diagonal,
        MoveKind::Pull,
        MoveKind::Tilt,
        MoveKind::MacroMutation,
    ];

    pub fn is_mutation(self) -> bool {
        self != MoveKind::Crossover
    }
}

impl fmt::Display for MoveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MoveFailure {
    /// The site does not satisfy the operator's precondition.
    Precondition,
    /// No free lattice point is available for the move.
    NoCandidate,
    /// The rebuilt chain revisits a lattice point.
    Collision,
}

/// One residue relocation, in the frame of the source conformation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Displacement {
    pub residue: usize,
    pub from: LatticePoint,
    pub to: LatticePoint,
}

/// A successful move: the new conformation plus the relocations that
/// produced it. `shift` is the translation removed when re-anchoring residue
/// 0 at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct Moved {
    pub conformation: Conformation,
    pub displaced: Vec<Displacement>,
    pub shift: LatticePoint,
}

impl Moved {
    /// Undoes the recorded displacements on the moved conformation.
    pub fn replay_inverse(&self) -> Result<Conformation, crate::chain::ChainError> {
        let mut coords: Vec<LatticePoint> = self.conformation.coords().iter().map(|&p| p + self.shift).collect();
        for d in self.displaced.iter().rev() {
            debug_assert_eq!(coords[d.residue], d.to);
            coords[d.residue] = d.from;
        }
        Conformation::from_coords(&coords)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MoveOutcome {
    pub kind: MoveKind,
    pub site: usize,
    pub result: Result<Moved, MoveFailure>,
}

impl MoveOutcome {
    pub fn conformation(&self) -> Option<&Conformation> {
        self.result.as_ref().ok().map(|m| &m.conformation)
    }

    pub fn into_conformation(self) -> Option<Conformation> {
        self.result.ok().map(|m| m.conformation)
    }

    pub fn is_success(&self) -> bool {
        self.result.is_ok()
    }
}

fn finish(source: &Conformation, coords: Vec<LatticePoint>) -> Result<Moved, MoveFailure> {
    let displaced = source
        .coords()
        .iter()
        .zip(&coords)
        .enumerate()
        .filter(|(_, (a, b))| a != b)
        .map(|(residue, (&from, &to))| Displacement { residue, from, to })
        .collect();
    let shift = coords[0];
    let conformation = Conformation::from_coords(&coords).map_err(|_| MoveFailure::Collision)?;
    Ok(Moved { conformation, displaced, shift })
}

/// Single-point crossover: `a[..pos] ++ b[pos..]` and `b[..pos] ++ a[pos..]`
/// over the direction lists. Fails if either child collides.
pub fn crossover(a: &Conformation, b: &Conformation, pos: usize) -> Result<(Conformation, Conformation), MoveFailure> {
    let n = a.len();
    if n != b.len() || pos < 1 || pos + 2 > n {
        return Err(MoveFailure::Precondition);
    }
    let splice = |x: &Conformation, y: &Conformation| {
        let dirs: Vec<Dir> = x.dirs()[..pos].iter().chain(&y.dirs()[pos..]).copied().collect();
        Conformation::from_dirs(dirs).map_err(|_| MoveFailure::Collision)
    };
    Ok((splice(a, b)?, splice(b, a)?))
}

/// Rotates residues `pos..` about residue `pos - 1` with lattice rotation
/// `rot_index` (0 is the identity).
pub fn rotation(c: &Conformation, pos: usize, rot_index: usize) -> MoveOutcome {
    let result = rotate(c, pos, rot_index);
    MoveOutcome { kind: MoveKind::Rotation, site: pos, result }
}

fn rotate(c: &Conformation, pos: usize, rot_index: usize) -> Result<Moved, MoveFailure> {
    let rots = lattice_rotations();
    if pos < 1 || pos >= c.len() || rot_index >= rots.len() {
        return Err(MoveFailure::Precondition);
    }
    let rot = &rots[rot_index];
    let pivot = c.coords()[pos - 1];
    let mut coords = c.coords().to_vec();
    let head = Occupancy::from_points(&coords[..pos]);
    for p in coords[pos..].iter_mut() {
        *p = rot.apply(*p - pivot) + pivot;
        if head.contains(*p) {
            return Err(MoveFailure::Collision);
        }
    }
    finish(c, coords)
}

/// Free common neighbours of residues `pos - 1` and `pos + 1`, excluding the
/// current position of `pos`, in basis order.
pub(crate) fn diagonal_candidates(coords: &[LatticePoint], occ: &Occupancy, pos: usize) -> SmallVec<[LatticePoint; 4]> {
    let mut out = SmallVec::new();
    if pos < 1 || pos + 1 >= coords.len() {
        return out;
    }
    let (a, b, c) = (coords[pos - 1], coords[pos], coords[pos + 1]);
    for q in neighbors(a) {
        if q != b && is_contact(q, c) && !occ.contains(q) {
            out.push(q);
        }
    }
    out
}

/// Moves residue `pos` to the first free common neighbour of its two chain
/// neighbours.
pub fn diagonal_move(c: &Conformation, pos: usize) -> MoveOutcome {
    let occ = c.occupancy();
    diagonal_with(c, &occ, pos)
}

pub(crate) fn diagonal_with(c: &Conformation, occ: &Occupancy, pos: usize) -> MoveOutcome {
    let result = if pos < 1 || pos + 1 >= c.len() {
        Err(MoveFailure::Precondition)
    } else {
        match diagonal_candidates(c.coords(), occ, pos).first() {
            Some(&q) => {
                let mut coords = c.coords().to_vec();
                coords[pos] = q;
                finish(c, coords)
            }
            None => Err(MoveFailure::NoCandidate),
        }
    };
    MoveOutcome { kind: MoveKind::Diagonal, site: pos, result }
}

/// Which chain neighbour stays put during a pull.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PullSide {
    /// Anchor on `pos + 1`; residues before `pos` are dragged.
    TowardsStart,
    /// Anchor on `pos - 1`; residues after `pos` are dragged.
    TowardsEnd,
}

/// A concrete pull: residue `pos` goes to `target`; its dragged neighbour
/// goes to `corner` unless `corner` is `None` (end residue, or the dragged
/// neighbour already sits there).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PullOption {
    pub side: PullSide,
    pub target: LatticePoint,
    pub corner: Option<LatticePoint>,
}

/// Enumerates every feasible pull at `pos`, in a fixed order.
///
/// Lattice pull moves are defined on the square lattice; on FCC we use the
/// usual generalisation. The target `L` is a free neighbour of the anchor,
/// and the corner `C` is a point adjacent to both `L` and the current
/// position of `pos` that is free or already holds the dragged neighbour.
/// Dragged residues then follow two places behind until the chain
/// reconnects.
pub fn pull_options(c: &Conformation, pos: usize) -> Vec<PullOption> {
    let occ = c.occupancy();
    pull_options_with(c.coords(), &occ, pos)
}

fn pull_options_with(coords: &[LatticePoint], occ: &Occupancy, pos: usize) -> Vec<PullOption> {
    let n = coords.len();
    let mut out = Vec::new();
    if pos >= n {
        return out;
    }
    let here = coords[pos];
    for side in [PullSide::TowardsStart, PullSide::TowardsEnd] {
        let (anchor, dragged) = match side {
            PullSide::TowardsStart => (pos.checked_add(1).filter(|&a| a < n), pos.checked_sub(1)),
            PullSide::TowardsEnd => (pos.checked_sub(1), Some(pos + 1).filter(|&d| d < n)),
        };
        let Some(anchor) = anchor else { continue };
        for target in neighbors(coords[anchor]) {
            if occ.contains(target) {
                continue;
            }
            match dragged {
                None => out.push(PullOption { side, target, corner: None }),
                Some(dr) => {
                    if is_contact(target, coords[dr]) {
                        out.push(PullOption { side, target, corner: None });
                        continue;
                    }
                    for corner in neighbors(target) {
                        if is_contact(corner, here) && !occ.contains(corner) {
                            out.push(PullOption { side, target, corner: Some(corner) });
                        }
                    }
                }
            }
        }
    }
    out
}

/// Applies one specific pull.
pub fn apply_pull(c: &Conformation, pos: usize, opt: PullOption) -> MoveOutcome {
    let coords = c.coords();
    let n = coords.len();
    let mut new = coords.to_vec();
    new[pos] = opt.target;
    if let Some(corner) = opt.corner {
        match opt.side {
            PullSide::TowardsStart => {
                new[pos - 1] = corner;
                let mut j = pos as isize - 2;
                while j >= 0 {
                    let ju = j as usize;
                    if is_contact(coords[ju], new[ju + 1]) {
                        break;
                    }
                    new[ju] = coords[ju + 2];
                    j -= 1;
                }
            }
            PullSide::TowardsEnd => {
                new[pos + 1] = corner;
                let mut j = pos + 2;
                while j < n {
                    if is_contact(coords[j], new[j - 1]) {
                        break;
                    }
                    new[j] = coords[j - 2];
                    j += 1;
                }
            }
        }
    }
    MoveOutcome { kind: MoveKind::Pull, site: pos, result: finish(c, new) }
}

/// Pull move at `pos`, choosing uniformly among the feasible pulls.
pub fn pull_move<R: Rng + ?Sized>(c: &Conformation, pos: usize, rng: &mut R) -> MoveOutcome {
    let occ = c.occupancy();
    pull_with(c, &occ, pos, rng)
}

pub(crate) fn pull_with<R: Rng + ?Sized>(c: &Conformation, occ: &Occupancy, pos: usize, rng: &mut R) -> MoveOutcome {
    let options = pull_options_with(c.coords(), occ, pos);
    if options.is_empty() {
        let failure = if pos >= c.len() { MoveFailure::Precondition } else { MoveFailure::NoCandidate };
        return MoveOutcome { kind: MoveKind::Pull, site: pos, result: Err(failure) };
    }
    let opt = options[rng.gen_range(0..options.len())];
    apply_pull(c, pos, opt)
}

/// Length of the straight run of residues starting at `pos` (at least 2 if
/// `pos` has a successor).
pub fn collinear_run(c: &Conformation, pos: usize) -> usize {
    let dirs = c.dirs();
    if pos >= dirs.len() {
        return 1;
    }
    let d = dirs[pos];
    2 + dirs[pos + 1..].iter().take_while(|&&x| x == d).count()
}

/// Tilts the maximal straight run starting at `pos`.
pub fn tilt_move(c: &Conformation, pos: usize) -> MoveOutcome {
    tilt_segment(c, pos, collinear_run(c, pos))
}

/// Translates the straight segment `pos..pos + len` by the first basis
/// vector (in basis order, skipping the segment's own axis) whose target
/// points are all free, then drags both flanks one place along the chain
/// until they reconnect.
pub fn tilt_segment(c: &Conformation, pos: usize, len: usize) -> MoveOutcome {
    let occ = c.occupancy();
    tilt_with(c, &occ, pos, len)
}

pub(crate) fn tilt_with(c: &Conformation, occ: &Occupancy, pos: usize, len: usize) -> MoveOutcome {
    let fail = |f| MoveOutcome { kind: MoveKind::Tilt, site: pos, result: Err(f) };
    let coords = c.coords();
    let n = coords.len();
    if len < 2 || pos + len > n {
        return fail(MoveFailure::Precondition);
    }
    let end = pos + len - 1;
    let axis = c.dirs()[pos];
    if c.dirs()[pos..end].iter().any(|&d| d != axis) {
        return fail(MoveFailure::Precondition);
    }
    let shift = Dir::ALL
        .iter()
        .copied()
        .filter(|&t| t != axis && t != axis.opposite())
        .map(Dir::delta)
        .find(|&t| coords[pos..=end].iter().all(|&p| !occ.contains(p + t)));
    let Some(t) = shift else {
        return fail(MoveFailure::NoCandidate);
    };
    let mut new = coords.to_vec();
    for p in &mut new[pos..=end] {
        *p = *p + t;
    }
    for j in (0..pos).rev() {
        if is_contact(coords[j], new[j + 1]) {
            break;
        }
        new[j] = coords[j + 1];
    }
    for j in end + 1..n {
        if is_contact(coords[j], new[j - 1]) {
            break;
        }
        new[j] = coords[j - 1];
    }
    MoveOutcome { kind: MoveKind::Tilt, site: pos, result: finish(c, new) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::initialise;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeSet;

    fn d(label: usize) -> Dir {
        Dir::from_label(label).unwrap()
    }

    fn straight(n: usize) -> Conformation {
        Conformation::from_dirs(vec![d(1); n - 1]).unwrap()
    }

    fn assert_valid(c: &Conformation, n: usize) {
        assert_eq!(c.len(), n);
        c.validate().unwrap();
        for w in c.coords().windows(2) {
            assert_eq!(w[0].sq_dist(&w[1]), 2);
        }
    }

    #[test]
    fn crossover_identity_and_splice() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = initialise(12, &mut rng, 100);
        for pos in 1..=10 {
            let (x, y) = crossover(&a, &a, pos).unwrap();
            assert_eq!(x, a);
            assert_eq!(y, a);
        }
        assert_eq!(crossover(&a, &a, 0), Err(MoveFailure::Precondition));
        assert_eq!(crossover(&a, &a, 11), Err(MoveFailure::Precondition));
    }

    #[test]
    fn crossover_last_step_swap() {
        // parents differ only in the final direction
        let a = Conformation::from_dirs(vec![d(1), d(4), d(1), d(4)]).unwrap();
        let b = Conformation::from_dirs(vec![d(1), d(4), d(1), d(7)]).unwrap();
        let (x, y) = crossover(&a, &b, 3).unwrap();
        assert_eq!(x, b);
        assert_eq!(y, a);
        // a child whose second step reverses the first collides
        let c = Conformation::from_dirs(vec![d(1), d(4)]).unwrap();
        let e = Conformation::from_dirs(vec![d(3), d(2)]).unwrap();
        assert_eq!(crossover(&c, &e, 1), Err(MoveFailure::Collision));
    }

    #[test]
    fn rotation_identity_and_fold_back() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let c = initialise(10, &mut rng, 100);
        let out = rotation(&c, 4, 0);
        assert_eq!(out.conformation(), Some(&c));

        // 180 degrees about z: diag(-1, -1, 1)
        let half_turn = lattice_rotations()
            .iter()
            .position(|r| *r.matrix() == [[-1, 0, 0], [0, -1, 0], [0, 0, 1]])
            .unwrap();
        let line = Conformation::from_dirs(vec![d(1), d(1)]).unwrap();
        assert_eq!(rotation(&line, 2, half_turn).result, Err(MoveFailure::Collision));
    }

    #[test]
    fn rotation_keeps_prefix() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let c = initialise(15, &mut rng, 100);
            let pos = rng.gen_range(1..15);
            let r = rng.gen_range(0..24);
            if let Some(m) = rotation(&c, pos, r).conformation() {
                assert_eq!(&m.coords()[..pos], &c.coords()[..pos]);
                assert_valid(m, 15);
            }
        }
    }

    #[test]
    fn diagonal_candidates_example() {
        let pts = [LatticePoint::new(0, 0, 0), LatticePoint::new(1, 1, 0), LatticePoint::new(2, 0, 0)];
        let c = Conformation::from_coords(&pts).unwrap();
        let got: BTreeSet<_> = diagonal_candidates(c.coords(), &c.occupancy(), 1).into_iter().collect();
        // brute force: common neighbours of A and C, minus B
        let want: BTreeSet<_> = neighbors(pts[0])
            .into_iter()
            .filter(|q| neighbors(pts[2]).contains(q) && *q != pts[1])
            .collect();
        assert_eq!(got, want);
        assert_eq!(
            want,
            [LatticePoint::new(1, -1, 0), LatticePoint::new(1, 0, 1), LatticePoint::new(1, 0, -1)].into_iter().collect()
        );
        let moved = diagonal_move(&c, 1).into_conformation().unwrap();
        assert_eq!(moved.coords()[1].sq_dist(&pts[0]), 2);
        assert_eq!(moved.coords()[1].sq_dist(&pts[2]), 2);
        assert_eq!(diagonal_move(&c, 0).result, Err(MoveFailure::Precondition));
        assert_eq!(diagonal_move(&c, 2).result, Err(MoveFailure::Precondition));
    }

    #[test]
    fn diagonal_blocked() {
        // straight segment: A and C are sqD 8 apart, so no common neighbour besides B
        let c = straight(5);
        assert_eq!(diagonal_move(&c, 2).result, Err(MoveFailure::NoCandidate));
    }

    #[test]
    fn pull_terminal_relocation() {
        let c = Conformation::from_dirs(vec![d(1), d(4), d(1)]).unwrap();
        let opts = pull_options(&c, 3);
        let opt = *opts.iter().find(|o| o.side == PullSide::TowardsEnd).unwrap();
        let m = apply_pull(&c, 3, opt).result.unwrap();
        assert_eq!(m.displaced.len(), 1);
        assert_eq!(m.displaced[0].residue, 3);
        assert_eq!(m.conformation.coords()[3].sq_dist(&c.coords()[2]), 2);
    }

    #[test]
    fn pull_on_straight_chain_drags() {
        let c = straight(8);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for pos in 1..7 {
            let m = pull_move(&c, pos, &mut rng).result.unwrap();
            assert!(m.displaced.len() >= 2, "pos {pos}: {:?}", m.displaced);
            assert_valid(&m.conformation, 8);
        }
    }

    #[test]
    fn pull_replay_restores() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..500 {
            let c = initialise(20, &mut rng, 100);
            let pos = rng.gen_range(0..20);
            if let Ok(m) = pull_move(&c, pos, &mut rng).result {
                assert_valid(&m.conformation, 20);
                assert_eq!(m.replay_inverse().unwrap(), c);
            }
        }
    }

    #[test]
    fn tilt_cases() {
        let c = straight(6);
        let m = tilt_segment(&c, 2, 2).result.unwrap();
        assert_valid(&m.conformation, 6);
        // the moved segment lies on a parallel line, one basis step away
        let before = c.coords();
        let after: Vec<_> = m.conformation.coords().iter().map(|&p| p + m.shift).collect();
        let t = after[2] - before[2];
        assert_eq!(after[3] - before[3], t);
        assert_eq!(t.sq_dist(&LatticePoint::ORIGIN), 2);

        let bent = Conformation::from_dirs(vec![d(1), d(4), d(1), d(4)]).unwrap();
        assert_eq!(tilt_segment(&bent, 0, 3).result, Err(MoveFailure::Precondition));
        assert_eq!(collinear_run(&bent, 0), 2);
        assert_eq!(collinear_run(&c, 0), 6);
    }

    #[test]
    fn tilt_random_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..300 {
            let c = initialise(18, &mut rng, 100);
            let pos = rng.gen_range(0..17);
            let len = collinear_run(&c, pos);
            if let Some(m) = tilt_segment(&c, pos, len).conformation() {
                assert_valid(m, 18);
            }
        }
    }
}
