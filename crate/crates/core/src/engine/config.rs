use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::EngineError;
use crate::moves::MoveKind;

/// The four algorithm versions compared in the ablation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    /// BM search, macro-mutation guided by the hydrophobic core centre.
    BH,
    /// BM search, macro-mutation guided by BM energy.
    BD,
    /// BM search without macro-mutation.
    BM,
    /// HP search with HCC-guided macro-mutation, reported in BM.
    HP,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::BH, Variant::BD, Variant::BM, Variant::HP];
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl FromStr for Variant {
    type Err = EngineError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "BH" => Ok(Variant::BH),
            "BD" => Ok(Variant::BD),
            "BM" => Ok(Variant::BM),
            "HP" => Ok(Variant::HP),
            _ => Err(EngineError::Config(format!("unknown variant '{s}' (expected BH, BD, BM or HP)"))),
        }
    }
}

/// How the time budget is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClockKind {
    /// Deterministic: counted work converted to seconds at a fixed rate.
    Virtual,
    /// Elapsed real time; runs are not reproducible.
    Wall,
}

impl FromStr for ClockKind {
    type Err = EngineError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "virtual" => Ok(ClockKind::Virtual),
            "wall" => Ok(ClockKind::Wall),
            _ => Err(EngineError::Config(format!("unknown clock '{s}' (expected virtual or wall)"))),
        }
    }
}

/// Run parameters. Every field has a default, so a config file only needs
/// the keys it changes:
///
/// ```toml
/// variant = "BD"
/// pop_size = 50
/// time_budget = 30.0
/// weight_crossover = 2.0
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub variant: Variant,
    pub seed: u64,
    pub pop_size: usize,
    /// Seconds, measured by `clock`.
    pub time_budget: f64,
    pub clock: ClockKind,
    /// Optional hard stop on generations, checked alongside the budget.
    pub max_generations: Option<u64>,
    /// Stop as soon as the best search energy reaches this value.
    pub target_energy: Option<f64>,
    /// Consecutive non-improving generations before a random walk.
    pub rwt: usize,
    pub macro_p: f64,
    pub macro_repeat: usize,
    pub first_improvement: bool,
    pub init_attempt_cap: usize,
    pub weight_crossover: f64,
    pub weight_rotation: f64,
    pub weight_diagonal: f64,
    pub weight_pull: f64,
    pub weight_tilt: f64,
    pub weight_macro: f64,
    /// Largest accepted |dE / E| for a random-walk result.
    pub rw_max_energy_change: f64,
    /// Recorded for reference; not enforced.
    pub rw_min_energy_change: f64,
    pub rw_min_difference: f64,
    pub rw_max_difference: f64,
    pub rw_sweep_cap: usize,
    /// Fraction of the population (worst first) that random walk targets.
    pub rw_target_fraction: f64,
    /// Contact matrix file; the bundled matrix when absent.
    pub matrix: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            variant: Variant::BH,
            seed: 0,
            pop_size: 100,
            time_budget: 60.0,
            clock: ClockKind::Virtual,
            max_generations: None,
            target_energy: None,
            rwt: 20,
            macro_p: 0.20,
            macro_repeat: 5,
            first_improvement: false,
            init_attempt_cap: 1000,
            weight_crossover: 1.0,
            weight_rotation: 1.0,
            weight_diagonal: 1.0,
            weight_pull: 1.0,
            weight_tilt: 1.0,
            weight_macro: 1.0,
            rw_max_energy_change: 0.10,
            rw_min_energy_change: 0.05,
            rw_min_difference: 0.10,
            rw_max_difference: 0.75,
            rw_sweep_cap: 10,
            rw_target_fraction: 1.0,
            matrix: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), EngineError> {
        let bad = |msg: String| Err(EngineError::Config(msg));
        if self.pop_size < 2 {
            return bad(format!("pop_size must be at least 2, got {}", self.pop_size));
        }
        if self.rwt < 1 {
            return bad("rwt must be at least 1".into());
        }
        if !(self.time_budget > 0.0) || !self.time_budget.is_finite() {
            return bad(format!("time_budget must be positive, got {}", self.time_budget));
        }
        if !(0.0..=1.0).contains(&self.macro_p) {
            return bad(format!("macro_p must lie in [0, 1], got {}", self.macro_p));
        }
        if self.macro_repeat < 1 {
            return bad("macro_repeat must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.rw_target_fraction) {
            return bad(format!("rw_target_fraction must lie in [0, 1], got {}", self.rw_target_fraction));
        }
        if self.rw_min_difference > self.rw_max_difference {
            return bad("rw_min_difference exceeds rw_max_difference".into());
        }
        let weights = self.weights();
        if weights.iter().any(|(_, w)| !(*w >= 0.0) || !w.is_finite()) {
            return bad("operator weights must be finite and non-negative".into());
        }
        if weights.iter().all(|(_, w)| *w == 0.0) {
            return bad("at least one operator weight must be positive".into());
        }
        Ok(())
    }

    /// Configured weight per operator, before variant filtering.
    pub fn weights(&self) -> [(MoveKind, f64); 6] {
        [
            (MoveKind::Crossover, self.weight_crossover),
            (MoveKind::Rotation, self.weight_rotation),
            (MoveKind::Diagonal, self.weight_diagonal),
            (MoveKind::Pull, self.weight_pull),
            (MoveKind::Tilt, self.weight_tilt),
            (MoveKind::MacroMutation, self.weight_macro),
        ]
    }

    pub fn from_toml(text: &str) -> Result<Self, EngineError> {
        toml::from_str(text).map_err(|e| EngineError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn load(path: &Path) -> Result<Self, EngineError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| EngineError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_round_trip() {
        let cfg = RunConfig { variant: Variant::HP, seed: 9, max_generations: Some(4), ..Default::default() };
        let back = RunConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn partial_file_keeps_defaults() {
        let cfg = RunConfig::from_toml("variant = \"BD\"\npop_size = 8\n").unwrap();
        assert_eq!(cfg.variant, Variant::BD);
        assert_eq!(cfg.pop_size, 8);
        assert_eq!(cfg.rwt, 20);
        assert!(RunConfig::from_toml("popsize = 3").is_err());
    }

    #[test]
    fn validation() {
        assert!(RunConfig::default().validate().is_ok());
        assert!(RunConfig { pop_size: 1, ..Default::default() }.validate().is_err());
        assert!(RunConfig { rwt: 0, ..Default::default() }.validate().is_err());
        assert!(RunConfig { time_budget: 0.0, ..Default::default() }.validate().is_err());
        assert!(RunConfig { macro_p: 1.5, ..Default::default() }.validate().is_err());
        let none = RunConfig {
            weight_crossover: 0.0,
            weight_rotation: 0.0,
            weight_diagonal: 0.0,
            weight_pull: 0.0,
            weight_tilt: 0.0,
            weight_macro: 0.0,
            ..Default::default()
        };
        assert!(none.validate().is_err());
    }

    #[test]
    fn parse_names() {
        assert_eq!("bh".parse::<Variant>().unwrap(), Variant::BH);
        assert!("XX".parse::<Variant>().is_err());
        assert_eq!("wall".parse::<ClockKind>().unwrap(), ClockKind::Wall);
    }
}
