use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Knobs for the multistart maximization and the greedy loop.
///
/// The serialized key names are shared by the CLI flags and config files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    /// Seeded random starts per maximization, on top of the HOSVD start and
    /// the canonical-basis starts.
    pub restarts: usize,
    pub max_power_iters: usize,
    /// Relative change of the objective that stops a power-iteration run.
    pub value_tol: f64,
    /// The greedy loop stops once `σ_{k+1} ≤ sigma_cutoff · σ_1`.
    pub sigma_cutoff: f64,
    pub tol_orth: f64,
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            restarts: 64,
            max_power_iters: 500,
            value_tol: 1e-13,
            sigma_cutoff: 1e-9,
            tol_orth: crate::sod::DEFAULT_TOL_ORTH,
            seed: 0,
        }
    }
}

impl SolverOptions {
    pub fn with_seed(seed: u64) -> Self {
        SolverOptions {
            seed,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::InvalidOptions("restarts must be at least 1".into()));
        }
        if self.max_power_iters == 0 {
            return Err(Error::InvalidOptions("max_power_iters must be positive".into()));
        }
        for (name, value) in [
            ("value_tol", self.value_tol),
            ("sigma_cutoff", self.sigma_cutoff),
            ("tol_orth", self.tol_orth),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidOptions(format!("{name} must be positive, got {value}")));
            }
        }
        Ok(())
    }
}
