mod common;

use fcc_fold::chain::{export_structure, import_structure, initialise, parse_sequence, Conformation, Sequence};
use fcc_fold::energy::{contact_census, evaluate, ContactMatrix, EnergyModelId, Scorer};
use fcc_fold::engine::Population;
use fcc_fold::lattice::{lattice_rotations, LatticePoint};
use fcc_fold::metrics::{
    mann_whitney_u, relative_improvement, rmsd, rmsd_improvement, ReferenceStructure, SampleSet,
    LATTICE_SCALE,
};
use fcc_fold::moves::{crossover, diagonal_move, pull_move, rotation, tilt_move};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn conformation(seed: u64, n: usize) -> Conformation {
    initialise(n, &mut ChaCha8Rng::seed_from_u64(seed), 1000)
}

fn sequence() -> impl Strategy<Value = Sequence> {
    "[ARNDCQEGHILKMFPSTWYV]{4,40}".prop_map(|s| parse_sequence(&s).unwrap())
}

fn samples() -> impl Strategy<Value = Vec<f64>> {
    // small integer grid so ties are common
    prop::collection::vec((-8i32..8).prop_map(f64::from), 1..30)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn moves_keep_a_valid_walk(seed in any::<u64>(), n in 4usize..50, pos in 0usize..50, rot in 0usize..24) {
        let c = conformation(seed, n);
        let pos = pos % n;
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        for out in [rotation(&c, pos, rot), diagonal_move(&c, pos), tilt_move(&c, pos), pull_move(&c, pos, &mut rng)] {
            if let Some(m) = out.conformation() {
                prop_assert_eq!(m.len(), n);
                prop_assert!(m.validate().is_ok());
            }
        }
        if let Ok((a, b)) = crossover(&c, &conformation(seed.wrapping_add(1), n), pos) {
            prop_assert!(a.validate().is_ok() && b.validate().is_ok());
        }
    }

    #[test]
    fn energy_is_rotation_invariant(seq in sequence(), seed in any::<u64>(), r in 0usize..24) {
        let m = ContactMatrix::bundled();
        let c = conformation(seed, seq.len());
        let rot = &lattice_rotations()[r];
        let turned: Vec<LatticePoint> = c.coords().iter().map(|p| rot.apply(*p)).collect();
        let turned = Conformation::from_coords(&turned).unwrap();
        for model in [EnergyModelId::Hp, EnergyModelId::Bm] {
            let a = evaluate(&c, &seq, model, &m);
            let b = evaluate(&turned, &seq, model, &m);
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn single_residue_delta_matches_rescoring(seq in sequence(), seed in any::<u64>(), i in 0usize..40, d in 0usize..12) {
        let m = ContactMatrix::bundled();
        let scorer = Scorer::new(&seq, EnergyModelId::Bm, &m);
        let c = conformation(seed, seq.len());
        let i = i % seq.len();
        let mut coords = c.coords().to_vec();
        let to = coords[i] + fcc_fold::lattice::Dir::ALL[d].delta() + fcc_fold::lattice::Dir::ALL[(d + 5) % 12].delta();
        let before = scorer.energy(&coords);
        let delta = scorer.delta_single(&coords, i, to);
        coords[i] = to;
        // the pair energy ignores chain connectivity, so any target point works
        let letters: Vec<char> = seq.letters().chars().collect();
        let (header, table) = common::bundled_table();
        let col = |c: char| header.iter().position(|&h| h == c).unwrap();
        let arr: Vec<[i32; 3]> = coords.iter().map(|p| [p.x, p.y, p.z]).collect();
        let after = common::brute_energy(&arr, |a, b| table[col(letters[a])][col(letters[b])]);
        prop_assert!((before + delta - after).abs() < 1e-9);
    }

    #[test]
    fn census_adds_up(seq in sequence(), seed in any::<u64>()) {
        let census = contact_census(&conformation(seed, seq.len()), &seq);
        prop_assert_eq!(census.total, census.hh + census.hp + census.pp);
    }

    #[test]
    fn structure_text_round_trips(seq in sequence(), seed in any::<u64>()) {
        let m = ContactMatrix::bundled();
        let c = conformation(seed, seq.len());
        let e = evaluate(&c, &seq, EnergyModelId::Bm, &m);
        let file = import_structure(&export_structure(&c, &seq, "BM", e)).unwrap();
        prop_assert_eq!(file.sequence().unwrap().letters(), seq.letters());
        let back = file.conformation().unwrap();
        prop_assert_eq!(back.coords(), c.coords());
        prop_assert_eq!(back.energy(), Some(e));
    }

    #[test]
    fn rmsd_ignores_rigid_motion(seed in any::<u64>(), other in any::<u64>(), n in 3usize..40, r in 0usize..24, t in (-5i32..5, -5i32..5, -5i32..5)) {
        let c = conformation(seed, n);
        let native = ReferenceStructure::from_conformation(&conformation(other, n));
        let shift = LatticePoint::new(2 * t.0, 2 * t.1, 2 * t.2);
        let rot = &lattice_rotations()[r];
        let moved: Vec<[f64; 3]> = c
            .coords()
            .iter()
            .map(|p| (rot.apply(*p) + shift).as_f64().map(|x| x * LATTICE_SCALE))
            .collect();
        prop_assert!(rmsd(&c, &ReferenceStructure::from_coords(&moved)).unwrap() < 1e-9);
        let a = rmsd(&c, &native).unwrap();
        prop_assert!(a >= 0.0);
        let turned: Vec<LatticePoint> = c.coords().iter().map(|p| rot.apply(*p)).collect();
        let b = rmsd(&Conformation::from_coords(&turned).unwrap(), &native).unwrap();
        prop_assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn rank_sum_identities(a in samples(), b in samples()) {
        let (sa, sb) = (SampleSet::new("a", a.clone()).unwrap(), SampleSet::new("b", b.clone()).unwrap());
        let ab = mann_whitney_u(&sa, &sb);
        let ba = mann_whitney_u(&sb, &sa);
        let nm = (a.len() * b.len()) as f64;
        prop_assert!((ab.u_a + ab.u_b - nm).abs() < 1e-9);
        prop_assert!((ab.u_a + ba.u_a - nm).abs() < 1e-9);
        prop_assert!((ab.p - ba.p).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&ab.p));
        prop_assert_eq!(ab.significant, ab.p < 0.05);
    }

    #[test]
    fn relative_improvement_signs(t in -500.0f64..-1.0, r in -500.0f64..-1.0) {
        prop_assert_eq!(relative_improvement(r, r).unwrap(), 0.0);
        prop_assert_eq!(relative_improvement(t, r).unwrap() > 0.0, t < r);
        let (dt, dr) = (-t, -r);
        prop_assert_eq!(rmsd_improvement(dt, dr).unwrap() > 0.0, dt < dr);
    }

    #[test]
    fn population_rejects_duplicates(seeds in prop::collection::vec(0u64..20, 1..60), cap in 2usize..30) {
        let mut pop = Population::new(cap);
        for s in seeds {
            pop.add_unique(conformation(s, 12));
        }
        prop_assert!(pop.len() <= cap);
        let mut keys: Vec<_> = pop.members().iter().map(|c| c.duplicate_key()).collect();
        keys.sort();
        keys.dedup();
        prop_assert_eq!(keys.len(), pop.len());
    }
}
