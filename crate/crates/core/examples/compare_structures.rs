// RMSD against a native structure, relative improvement, and a rank-sum
// test between two sets of results.

use std::error::Error;

use fcc_fold::chain::initialise;
use fcc_fold::metrics::{
    mann_whitney_u, read_reference, relative_improvement, rmsd, rmsd_improvement, ReferenceStructure, SampleSet,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let native = initialise(12, &mut rng, 1000);
    let reference = ReferenceStructure::from_conformation(&native);

    let guesses: Vec<f64> =
        (0..5).map(|_| rmsd(&initialise(12, &mut rng, 1000), &reference)).collect::<Result<_, _>>()?;
    println!("rmsd of the native to itself {:.3}", rmsd(&native, &reference)?);
    println!("rmsd of five random walks    {:?}", guesses.iter().map(|x| (x * 100.0).round() / 100.0).collect::<Vec<_>>());

    // Reference files hold `index x y z` lines in Å, or a distance matrix as CSV.
    let text = "0 0.0 0.0 0.0\n1 3.8 0.0 0.0\n2 3.8 3.8 0.0\n";
    let small = read_reference(text)?;
    println!("reference distance 0-2: {:.3} Å", small.get(0, 2));

    println!("energy RI -162.72 vs -156.32: {:.2}%", relative_improvement(-162.72, -156.32)?);
    println!("rmsd RI 5.41 vs 6.29:         {:.2}%", rmsd_improvement(5.41, 6.29)?);

    let ours = SampleSet::new("ours", vec![-61.0, -63.5, -60.2, -64.1, -62.8, -63.0])?;
    let theirs = SampleSet::new("theirs", vec![-58.4, -59.9, -57.1, -60.5, -58.8, -59.0])?;
    let test = mann_whitney_u(&ours, &theirs);
    println!(
        "U = {} (exact: {}), p = {:.4}, significant at 95%: {}",
        test.u_a, test.exact, test.p, test.significant
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
