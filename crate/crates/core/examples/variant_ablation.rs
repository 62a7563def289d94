// Run the four algorithm variants on one protein and compare their BM
// energies with a rank-sum test against BH.
//
// Budgets here are tiny so the example finishes quickly; expect the
// ordering to be noisy at this scale.

use std::error::Error;

use fcc_fold::cli::BenchmarkSuite;
use fcc_fold::metrics::{mann_whitney_u, SampleSet};
use fcc_fold::{run, ContactMatrix, RunConfig, Variant};
use rayon::prelude::*;

const SEEDS: u64 = 3;
const BUDGET: f64 = 0.4;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let suite = BenchmarkSuite::bundled();
    let seq = &suite.get("1ENH").ok_or("missing 1ENH")?.sequence;
    let matrix = ContactMatrix::bundled();

    let mut samples = Vec::new();
    for variant in Variant::ALL {
        let energies: Vec<f64> = (0..SEEDS)
            .into_par_iter()
            .map(|seed| {
                let config = RunConfig { variant, seed, time_budget: BUDGET, ..Default::default() };
                run(seq, &matrix, &config).map(|r| r.best_bm_energy)
            })
            .collect::<Result<_, _>>()?;
        samples.push(SampleSet::new(variant.to_string(), energies)?);
    }

    let bh = &samples[0];
    println!("variant  mean BM   p vs BH");
    for s in &samples {
        let test = mann_whitney_u(s, bh);
        println!("{:<8} {:>8.3}  {:.3}", s.label, s.mean(), test.p);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
