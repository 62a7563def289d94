//! Protein structure prediction on the 3D face-centred-cubic lattice with a
//! genetic algorithm that searches in one energy model and reports in
//! another.
//!
//! A run takes a [`Sequence`] and a [`RunConfig`] and returns a
//! [`RunRecord`]:
//!
//! ```
//! use fcc_fold::{run, ContactMatrix, RunConfig, Sequence, Variant};
//!
//! let seq = Sequence::from_hp("toy", "HPHPPHHPHH").unwrap();
//! let config = RunConfig { variant: Variant::HP, time_budget: 0.2, ..Default::default() };
//! let record = run(&seq, &ContactMatrix::bundled(), &config).unwrap();
//! assert!(record.best_search_energy <= 0.0);
//! ```
//!
//! Modules, bottom up: [`lattice`] geometry, [`chain`] sequences and
//! conformations, [`energy`] models, [`moves`] operators, [`engine`] the
//! search loop, [`metrics`] RMSD and rank tests, [`cli`] the `fccfold`
//! commands. The `examples/` directory walks through each of them.

pub mod chain;
pub mod energy;
pub mod lattice;
pub mod moves;
pub mod engine;
pub mod metrics;
pub mod cli;

pub use chain::{parse_sequence, Conformation, Sequence};
pub use energy::{evaluate, ContactMatrix, EnergyModelId};
pub use engine::{run, RunConfig, RunRecord, Variant};
