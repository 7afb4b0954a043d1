use std::sync::atomic::{AtomicU64, Ordering};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{measure_settings, CorrelationVector, Mode, Scenario, ShotCounts};
use crate::error::Result;
use crate::linalg::Mat2;

/// Result of one correlation-vector query (three measurement settings).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub correlations: CorrelationVector,
    /// Per-setting counts; present only for shot-sampled oracles.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counts: Option<[ShotCounts; 3]>,
}

/// Observational access to a hidden two-point mechanism.
///
/// Callers choose measurement modifiers `(W_x, W_y)` and receive the
/// correlation vector of the settings `(W_x σ_k W_x†, W_y σ_k W_y†)`. Nothing
/// else about the mechanism is reachable through this interface.
pub trait MeasurementOracle: Send + Sync {
    fn query(&self, wx: &Mat2, wy: &Mat2) -> Result<Observation>;

    fn query_count(&self) -> u64;
}

/// Oracle backed by the simulator.
pub struct SimulatedOracle {
    scenario: Scenario,
    mode: Mode,
    queries: AtomicU64,
}

pub fn make_oracle(scenario: Scenario, mode: Mode) -> SimulatedOracle {
    SimulatedOracle {
        scenario,
        mode,
        queries: AtomicU64::new(0),
    }
}

impl SimulatedOracle {
    pub fn mode(&self) -> Mode {
        self.mode
    }
}

impl std::fmt::Debug for SimulatedOracle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SimulatedOracle")
            .field("mode", &self.mode)
            .field("queries", &self.query_count())
            .finish_non_exhaustive()
    }
}

impl MeasurementOracle for SimulatedOracle {
    fn query(&self, wx: &Mat2, wy: &Mat2) -> Result<Observation> {
        let index = self.queries.fetch_add(1, Ordering::Relaxed);
        let (correlations, counts) = match self.mode {
            Mode::Exact => measure_settings::<ChaCha8Rng>(&self.scenario, wx, wy, None)?,
            Mode::Sampled { shots, seed } => {
                // One independent stream per query keeps adaptive runs reproducible.
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(index);
                measure_settings(&self.scenario, wx, wy, Some((shots, &mut rng)))?
            }
        };
        Ok(Observation {
            correlations,
            counts,
        })
    }

    fn query_count(&self) -> u64 {
        self.queries.load(Ordering::Relaxed)
    }
}
