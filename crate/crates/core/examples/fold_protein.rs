// Fold one benchmark protein with the default variant and print what the
// run record holds.
//
// ```bash
// cargo run --example fold_protein
// ```

use std::error::Error;

use fcc_fold::cli::BenchmarkSuite;
use fcc_fold::{run, ContactMatrix, RunConfig};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let suite = BenchmarkSuite::bundled();
    let entry = suite.get("4RXN").ok_or("4RXN is not in the bundled suite")?;

    // Config files only need the keys they change.
    let config = RunConfig::from_toml(
        r#"
        variant = "BH"
        seed = 7
        pop_size = 60
        time_budget = 1.5
        "#,
    )?;
    let record = run(&entry.sequence, &ContactMatrix::bundled(), &config)?;

    println!("{} with {} for {} virtual seconds", entry.sequence, config.variant, config.time_budget);
    println!("best BM energy  {:.3}", record.best_bm_energy);
    println!("generations     {}", record.generations);
    println!("random walks    {}", record.stagnation_events.len());
    let c = record.census;
    println!("contacts        hh={} hp={} pp={} total={}", c.hh, c.hp, c.pp, c.total);
    for point in &record.trace {
        println!("  t={:>6.3}s  E={:.3}", point.seconds, point.energy);
    }

    let best = record.best_conformation()?;
    assert_eq!(best.len(), entry.sequence.len());
    assert!(record.trace_is_monotone());
    println!("{}", record.best_structure.lines().take(4).collect::<Vec<_>>().join("\n"));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
