// Drive the `bench` command from code: two proteins, two variants, two
// seeds each, written to a scratch directory.
//
// The same run from a shell:
//
// ```bash
// fccfold bench --suite 4RXN,1ENH --variants BH,BM --seeds 2 --time 0.3 --out out/
// ```

use std::error::Error;

use clap::Parser;
use fcc_fold::cli::{cmd_bench, BenchmarkSuite, Cli, Command};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let suite = BenchmarkSuite::bundled();
    for m in suite.self_check() {
        println!("suite note: {m:?}");
    }

    let out = tempfile::tempdir()?;
    let out_dir = out.path().to_str().ok_or("non-utf8 temp path")?;
    let cli = Cli::try_parse_from([
        "fccfold", "bench", "--suite", "4RXN,1ENH", "--variants", "BH,BM", "--seeds", "2", "--time", "0.3", "--out",
        out_dir,
    ])?;
    let Command::Bench(args) = cli.command else { unreachable!() };
    let result = cmd_bench(&args)?;

    for row in &result.summary {
        println!("{} {:<2} best {:.2} avg {:.2} contacts {}", row.seq, row.variant, row.best, row.avg, row.total);
    }
    for row in &result.ablation {
        println!("{} {:<2} mean {:.2} p vs BH {:?}", row.seq, row.variant, row.mean_energy, row.p_vs_bh);
    }
    let mut files: Vec<_> = std::fs::read_dir(out.path())?.map(|e| e.map(|e| e.file_name())).collect::<Result<_, _>>()?;
    files.sort();
    println!("wrote {files:?}");
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
