//! Face-centred-cubic lattice geometry.
//!
//! Points are integer triples with an even coordinate sum. Each point has
//! twelve neighbours, reached through the basis vectors below; two points are
//! in contact when their squared Euclidean distance is exactly 2.

use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

/// Squared length of every basis vector, and the contact distance.
pub const CONTACT_SQ_DIST: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct LatticePoint {
    pub x: i32,
    pub y: i32,
    pub z: i32,
}

impl LatticePoint {
    pub const ORIGIN: LatticePoint = LatticePoint { x: 0, y: 0, z: 0 };

    pub const fn new(x: i32, y: i32, z: i32) -> Self {
        Self { x, y, z }
    }

    /// FCC sublattice membership: reachable from the origin by basis steps.
    pub fn on_lattice(&self) -> bool {
        (self.x + self.y + self.z).rem_euclid(2) == 0
    }

    pub fn sq_dist(&self, other: &LatticePoint) -> i32 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        let dz = self.z - other.z;
        dx * dx + dy * dy + dz * dz
    }

    pub fn dist(&self, other: &LatticePoint) -> f64 {
        f64::from(self.sq_dist(other)).sqrt()
    }

    pub fn as_f64(&self) -> [f64; 3] {
        [f64::from(self.x), f64::from(self.y), f64::from(self.z)]
    }

    /// The basis direction leading from `self` to `other`, if they are neighbours.
    pub fn direction_to(&self, other: &LatticePoint) -> Option<Dir> {
        let d = *other - *self;
        Dir::ALL.iter().copied().find(|dir| dir.delta() == d)
    }

    /// Packs the point into a hashable integer key. Valid for |coord| < 2^20.
    #[inline]
    pub(crate) fn key(&self) -> u64 {
        const OFF: i64 = 1 << 20;
        let x = (i64::from(self.x) + OFF) as u64;
        let y = (i64::from(self.y) + OFF) as u64;
        let z = (i64::from(self.z) + OFF) as u64;
        (x << 42) | (y << 21) | z
    }
}

impl Add for LatticePoint {
    type Output = LatticePoint;
    fn add(self, o: LatticePoint) -> LatticePoint {
        LatticePoint::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for LatticePoint {
    type Output = LatticePoint;
    fn sub(self, o: LatticePoint) -> LatticePoint {
        LatticePoint::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for LatticePoint {
    type Output = LatticePoint;
    fn neg(self) -> LatticePoint {
        LatticePoint::new(-self.x, -self.y, -self.z)
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

/// The twelve basis vectors, in their canonical order `v1..v12`.
const BASIS: [LatticePoint; 12] = [
    LatticePoint::new(1, 1, 0),
    LatticePoint::new(-1, -1, 0),
    LatticePoint::new(-1, 1, 0),
    LatticePoint::new(1, -1, 0),
    LatticePoint::new(0, 1, 1),
    LatticePoint::new(0, 1, -1),
    LatticePoint::new(1, 0, 1),
    LatticePoint::new(1, 0, -1),
    LatticePoint::new(0, -1, 1),
    LatticePoint::new(-1, 0, 1),
    LatticePoint::new(0, -1, -1),
    LatticePoint::new(-1, 0, -1),
];

/// One of the twelve basis directions.
///
/// Stored zero-based; [`Dir::label`] gives the conventional 1-based index
/// (`v1` is `Dir::from_label(1)`). Every enumeration over directions in this
/// crate follows this order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Dir(u8);

impl Dir {
    pub const COUNT: usize = 12;

    pub const ALL: [Dir; 12] = [
        Dir(0),
        Dir(1),
        Dir(2),
        Dir(3),
        Dir(4),
        Dir(5),
        Dir(6),
        Dir(7),
        Dir(8),
        Dir(9),
        Dir(10),
        Dir(11),
    ];

    /// Zero-based index; panics when out of range.
    pub fn new(index: usize) -> Dir {
        assert!(index < Self::COUNT, "direction index {index} out of range");
        Dir(index as u8)
    }

    /// Direction `v<label>` with `label` in 1..=12.
    pub fn from_label(label: usize) -> Option<Dir> {
        (1..=Self::COUNT).contains(&label).then(|| Dir((label - 1) as u8))
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn label(self) -> usize {
        self.0 as usize + 1
    }

    #[inline]
    pub fn delta(self) -> LatticePoint {
        BASIS[self.0 as usize]
    }

    pub fn opposite(self) -> Dir {
        const OPP: [u8; 12] = [1, 0, 3, 2, 10, 8, 11, 9, 5, 7, 4, 6];
        Dir(OPP[self.0 as usize])
    }
}

impl fmt::Display for Dir {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.label())
    }
}

/// The 12 neighbours of `p`, in basis order.
pub fn neighbors(p: LatticePoint) -> [LatticePoint; 12] {
    BASIS.map(|d| p + d)
}

pub fn is_contact(p: LatticePoint, q: LatticePoint) -> bool {
    p.sq_dist(&q) == CONTACT_SQ_DIST
}

/// A proper rotation of the cube, as an integer matrix together with the
/// permutation it induces on the basis directions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rotation {
    matrix: [[i32; 3]; 3],
    dir_map: [Dir; 12],
}

impl Rotation {
    pub fn matrix(&self) -> &[[i32; 3]; 3] {
        &self.matrix
    }

    pub fn apply(&self, p: LatticePoint) -> LatticePoint {
        let v = [p.x, p.y, p.z];
        let r = |row: &[i32; 3]| row[0] * v[0] + row[1] * v[1] + row[2] * v[2];
        LatticePoint::new(r(&self.matrix[0]), r(&self.matrix[1]), r(&self.matrix[2]))
    }

    #[inline]
    pub fn apply_dir(&self, d: Dir) -> Dir {
        self.dir_map[d.index()]
    }

    pub fn is_identity(&self) -> bool {
        self.matrix == [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
    }

    pub fn determinant(&self) -> i32 {
        let m = &self.matrix;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }
}

/// The 24 lattice-preserving proper rotations. The identity comes first.
pub fn lattice_rotations() -> &'static [Rotation] {
    static ROTATIONS: OnceLock<Vec<Rotation>> = OnceLock::new();
    ROTATIONS.get_or_init(build_rotations)
}

fn build_rotations() -> Vec<Rotation> {
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut out = Vec::with_capacity(24);
    for perm in PERMS {
        for signs in 0..8u8 {
            let mut matrix = [[0i32; 3]; 3];
            for (row, &col) in perm.iter().enumerate() {
                matrix[row][col] = if signs & (1 << row) == 0 { 1 } else { -1 };
            }
            let mut rot = Rotation { matrix, dir_map: Dir::ALL };
            if rot.determinant() != 1 {
                continue;
            }
            for d in Dir::ALL {
                let image = rot.apply(d.delta());
                rot.dir_map[d.index()] = LatticePoint::ORIGIN
                    .direction_to(&image)
                    .expect("signed permutation maps basis onto basis");
            }
            out.push(rot);
        }
    }
    debug_assert_eq!(out.len(), 24);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn origin_neighbors() {
        let n = neighbors(LatticePoint::ORIGIN);
        assert_eq!(n.len(), 12);
        assert!(n.contains(&LatticePoint::new(1, 1, 0)));
        assert!(n.contains(&LatticePoint::new(-1, 0, -1)));
        assert!(!n.contains(&LatticePoint::new(2, 0, 0)));
        assert!(!n.contains(&LatticePoint::new(1, 0, 0)));
        assert_eq!(n.iter().collect::<HashSet<_>>().len(), 12);
    }

    #[test]
    fn translated_neighbors() {
        let p = LatticePoint::new(1, 1, 0);
        assert!(neighbors(p).contains(&LatticePoint::new(2, 2, 0)));
        assert!(neighbors(p).iter().all(|&q| is_contact(p, q)));
    }

    #[test]
    fn contact_cases() {
        let o = LatticePoint::ORIGIN;
        assert!(is_contact(o, LatticePoint::new(1, 1, 0)));
        assert!(!is_contact(o, o));
        assert!(!is_contact(o, LatticePoint::new(2, 0, 0)));
    }

    #[test]
    fn opposites_match_negation() {
        for d in Dir::ALL {
            assert_eq!(d.opposite().delta(), -d.delta());
            assert_eq!(d.delta().sq_dist(&LatticePoint::ORIGIN), 2);
        }
        let pair = |a, b| Dir::from_label(a).unwrap().opposite() == Dir::from_label(b).unwrap();
        assert!(pair(1, 2) && pair(3, 4) && pair(5, 11) && pair(6, 9) && pair(7, 12) && pair(8, 10));
    }

    #[test]
    fn labels_round_trip() {
        assert_eq!(Dir::from_label(1).unwrap().delta(), LatticePoint::new(1, 1, 0));
        assert_eq!(Dir::from_label(12).unwrap().delta(), LatticePoint::new(-1, 0, -1));
        assert!(Dir::from_label(0).is_none());
        assert!(Dir::from_label(13).is_none());
    }

    #[test]
    fn rotation_group() {
        let rots = lattice_rotations();
        assert_eq!(rots.len(), 24);
        assert!(rots[0].is_identity());
        let distinct: HashSet<_> = rots.iter().map(|r| r.matrix).collect();
        assert_eq!(distinct.len(), 24);
        for r in rots {
            assert_eq!(r.determinant(), 1);
            let images: HashSet<_> = Dir::ALL.iter().map(|&d| r.apply_dir(d)).collect();
            assert_eq!(images.len(), 12);
            for d in Dir::ALL {
                assert_eq!(r.apply(d.delta()), r.apply_dir(d).delta());
            }
        }
    }

    #[test]
    fn rotations_match_brute_force_enumeration() {
        // every signed permutation matrix with det +1
        let mut expected = HashSet::new();
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    if a == b || b == c || a == c {
                        continue;
                    }
                    for s in 0..8 {
                        let sg = |k: i32| if s & (1 << k) == 0 { 1 } else { -1 };
                        let mut m = [[0i32; 3]; 3];
                        m[0][a] = sg(0);
                        m[1][b] = sg(1);
                        m[2][c] = sg(2);
                        let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
                        if det == 1 {
                            expected.insert(m);
                        }
                    }
                }
            }
        }
        let got: HashSet<_> = lattice_rotations().iter().map(|r| *r.matrix()).collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn direction_to_neighbours() {
        let p = LatticePoint::new(3, -1, 2);
        for d in Dir::ALL {
            assert_eq!(p.direction_to(&(p + d.delta())), Some(d));
        }
        assert_eq!(p.direction_to(&p), None);
    }
}
