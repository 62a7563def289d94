use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{EngineError, RunConfig};
use crate::chain::{import_structure, ChainError, Conformation};
use crate::energy::{ContactCensus, EnergyModelId};
use crate::moves::MoveKind;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub seconds: f64,
    /// Best search energy found so far.
    pub energy: f64,
}

/// Result of one run, serialised as JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub sequence_id: String,
    pub sequence: String,
    pub matrix: String,
    pub config: RunConfig,
    pub search_model: EnergyModelId,
    pub operator_menu: Vec<MoveKind>,
    pub best_search_energy: f64,
    /// Best conformation re-scored with the BM matrix.
    pub best_bm_energy: f64,
    pub census: ContactCensus,
    /// Best conformation in the structure text format.
    pub best_structure: String,
    pub trace: Vec<TracePoint>,
    pub generations: u64,
    /// Whether each generation produced a new best.
    pub improved: Vec<bool>,
    /// Generations after which a random walk ran.
    pub stagnation_events: Vec<u64>,
    pub random_walk_accepted: usize,
    pub random_walk_failures: usize,
    pub operator_counts: BTreeMap<String, u64>,
    pub elapsed_seconds: f64,
    pub work_units: u64,
}

impl RunRecord {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("record serialises")
    }

    pub fn from_json(text: &str) -> Result<Self, EngineError> {
        serde_json::from_str(text).map_err(|e| EngineError::Config(format!("run record: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, EngineError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| EngineError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn best_conformation(&self) -> Result<Conformation, ChainError> {
        import_structure(&self.best_structure)?.conformation()
    }

    /// Best-so-far energy at `t` seconds, or `None` before the first point.
    pub fn energy_at(&self, t: f64) -> Option<f64> {
        self.trace.iter().take_while(|p| p.seconds <= t).last().map(|p| p.energy)
    }

    pub fn trace_is_monotone(&self) -> bool {
        self.trace.windows(2).all(|w| w[1].energy <= w[0].energy && w[1].seconds >= w[0].seconds)
    }

    /// Generations at which a random walk should have run given the
    /// per-generation improvement flags and threshold `rwt`.
    pub fn expected_stagnation_events(&self) -> Vec<u64> {
        let mut events = Vec::new();
        let mut stagnant = 0;
        for (g, &improved) in self.improved.iter().enumerate() {
            stagnant = if improved { 0 } else { stagnant + 1 };
            if stagnant == self.config.rwt {
                events.push(g as u64 + 1);
                stagnant = 0;
            }
        }
        events
    }
}
