use std::path::Path;

use gsi_core::{EnsembleSpec, EntryKind, FieldTag};
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExperimentKind {
    InitError,
    SuccessRate,
    MomentVerify,
    SingleSolve,
}

/// One experiment. Unset `d` and `trials` fall back to per-kind defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub ensemble: EnsembleSpec,
    pub d: Option<usize>,
    pub ratio_grid: Vec<f64>,
    pub trials: Option<usize>,
    pub success_threshold: f64,
    pub max_iters: usize,
    pub power_iters: usize,
    pub base_seed: u64,
    pub spike_factor: f64,
    /// Draws per Monte-Carlo check in `MomentVerify`.
    pub mc_samples: usize,
    /// Keep per-iteration traces in `SingleSolve`.
    pub trace: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::new(ExperimentKind::InitError)
    }
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind) -> Self {
        Self {
            kind,
            ensemble: EnsembleSpec::new(FieldTag::Real, EntryKind::Ternary),
            d: None,
            ratio_grid: (1..=10).map(|k| 2.0 * k as f64).collect(),
            trials: None,
            success_threshold: 1e-5,
            max_iters: 2000,
            power_iters: 50,
            base_seed: 0,
            spike_factor: 200.0,
            mc_samples: 1_000_000,
            trace: false,
        }
    }

    /// Reads a TOML or JSON file, chosen by extension (TOML otherwise).
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
        let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        let config = if is_json {
            serde_json::from_str(&text).map_err(|e| BenchError::Config(format!("{}: {e}", path.display())))?
        } else {
            toml::from_str(&text).map_err(|e| BenchError::Config(format!("{}: {e}", path.display())))?
        };
        Ok(config)
    }

    pub fn dim(&self) -> usize {
        self.d.unwrap_or(match self.kind {
            ExperimentKind::MomentVerify => 3,
            _ => 128,
        })
    }

    pub fn trial_count(&self) -> usize {
        self.trials.unwrap_or(match self.kind {
            ExperimentKind::SuccessRate => 100,
            _ => 50,
        })
    }

    /// `N = round(ratio · d)` for every grid point.
    pub fn measurement_counts(&self) -> Vec<usize> {
        let d = self.dim() as f64;
        self.ratio_grid.iter().map(|r| (r * d).round() as usize).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(BenchError::Config(msg));
        if self.dim() < 2 {
            return fail(format!("d must be at least 2, got {}", self.dim()));
        }
        if let Some(r) = self.ratio_grid.iter().find(|r| !(r.is_finite() && **r >= 1.0)) {
            return fail(format!("ratios must be at least 1, got {r}"));
        }
        if self.trial_count() == 0 {
            return fail("trials must be at least 1".into());
        }
        if self.max_iters == 0 || self.power_iters == 0 {
            return fail("max_iters and power_iters must be at least 1".into());
        }
        if self.success_threshold.is_nan() || self.success_threshold <= 0.0 {
            return fail(format!(
                "success threshold must be positive, got {}",
                self.success_threshold
            ));
        }
        if !self.spike_factor.is_finite() {
            return fail("spike factor must be finite".into());
        }
        if matches!(
            self.kind,
            ExperimentKind::InitError | ExperimentKind::SuccessRate | ExperimentKind::SingleSolve
        ) && self.ratio_grid.is_empty()
        {
            return fail("ratio grid is empty".into());
        }
        Ok(())
    }
}
