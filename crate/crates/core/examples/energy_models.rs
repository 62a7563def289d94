// Score one conformation under the HP and BM models, count contacts by
// class, and swap in a different contact matrix.

use std::error::Error;

use fcc_fold::chain::Conformation;
use fcc_fold::energy::{contact_census, hcc, load_matrix};
use fcc_fold::lattice::LatticePoint;
use fcc_fold::{evaluate, parse_sequence, ContactMatrix, EnergyModelId};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let seq = parse_sequence(">demo\nLKAVFE")?;
    // a compact six-residue walk with six non-consecutive contacts
    let coords = [(0, 0, 0), (1, 1, 0), (2, 0, 0), (1, -1, 0), (0, -1, 1), (1, 0, 1)]
        .map(|(x, y, z)| LatticePoint::new(x, y, z));
    let c = Conformation::from_coords(&coords)?;

    let bundled = ContactMatrix::bundled();
    let hp = evaluate(&c, &seq, EnergyModelId::Hp, &bundled);
    let bm = evaluate(&c, &seq, EnergyModelId::Bm, &bundled);
    let census = contact_census(&c, &seq);
    println!("{seq}: {}", seq.hp_string());
    println!("HP energy {hp}  BM energy {bm:.3}");
    println!("contacts hh={} hp={} pp={} total={}", census.hh, census.hp, census.pp, census.total);
    println!("hydrophobic core centre {:?}", hcc(&c, &seq)?);
    assert_eq!(hp, -(census.hh as f64));

    // A custom matrix: -1 for every pair involving leucine, 0 elsewhere.
    let codes = "ARNDCQEGHILKMFPSTWYV";
    let mut csv = format!("# leucine only\n{}\n", codes.chars().map(String::from).collect::<Vec<_>>().join(","));
    for a in codes.chars() {
        let row: Vec<&str> = codes.chars().map(|b| if a == 'L' || b == 'L' { "-1" } else { "0" }).collect();
        csv.push_str(&row.join(","));
        csv.push('\n');
    }
    let leucine = load_matrix(&csv, "leucine")?;
    let e = evaluate(&c, &seq, EnergyModelId::Bm, &leucine);
    println!("leucine-only BM energy {e}");
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
