// Lattice basics and one application of every move operator.

use std::error::Error;

use fcc_fold::chain::initialise;
use fcc_fold::energy::Scorer;
use fcc_fold::lattice::{lattice_rotations, neighbors, Dir, LatticePoint};
use fcc_fold::moves::{
    crossover, diagonal_move, macro_mutation, pull_options, apply_pull, rotation, tilt_move, MacroGuidance,
    MacroParams, MoveOutcome,
};
use fcc_fold::{ContactMatrix, Conformation, EnergyModelId, Sequence};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn show(name: &str, out: &MoveOutcome) {
    match &out.result {
        Ok(m) => println!("{name:<10} site {:>2}: moved {} residue(s)", out.site, m.displaced.len()),
        Err(e) => println!("{name:<10} site {:>2}: {e:?}", out.site),
    }
}

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let origin = LatticePoint::ORIGIN;
    println!("{} neighbours of the origin, {} rotations", neighbors(origin).len(), lattice_rotations().len());
    for d in &Dir::ALL[..3] {
        println!("  v{} = {}", d.label(), d.delta());
    }

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let c = initialise(16, &mut rng, 1000);
    let straight = Conformation::zigzag(16);

    show("rotation", &rotation(&c, 6, 3));
    show("diagonal", &diagonal_move(&c, 8));
    show("tilt", &tilt_move(&straight, 4));
    let options = pull_options(&straight, 7);
    println!("pull       {} options at site 7", options.len());
    if let Some(&opt) = options.first() {
        let out = apply_pull(&straight, 7, opt);
        show("pull", &out);
        if let Ok(m) = &out.result {
            assert_eq!(m.replay_inverse()?.coords(), straight.coords());
        }
    }
    match crossover(&c, &straight, 8) {
        Ok((a, b)) => println!("crossover  site  8: children of length {} and {}", a.len(), b.len()),
        Err(e) => println!("crossover  site  8: {e:?}"),
    }

    let seq = Sequence::from_hp("tour", "HPHHPPHPHHPHPPHH")?;
    let bm = Scorer::new(&seq, EnergyModelId::Bm, &ContactMatrix::bundled());
    let params = MacroParams { guidance: MacroGuidance::Hcc, ..Default::default() };
    let report = macro_mutation(&c, &seq, &params, &bm, &mut rng);
    println!("macro      {} diagonal moves accepted over {} sweeps", report.accepted.len(), params.repeat);
    report.conformation.validate()?;
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
