use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Result, WalkError};
use crate::exponents::ModelParams;
use crate::model::{ModelKind, Process};
use crate::rng::DEFAULT_MASTER_SEED;
use crate::statistics::FitWindow;

pub const DEFAULT_CHECKPOINTS: usize = 512;

/// One ensemble run. Serialized as a flat JSON object with snake_case keys;
/// missing keys take the defaults below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelKind,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub rho: f64,
    pub steps: u64,
    pub paths: u64,
    pub master_seed: u64,
    pub x0: f64,
    pub y0: f64,
    pub checkpoints: usize,
    /// `None` means `[min(1000, max(1, steps / 100)), steps]`.
    pub fit_window: Option<FitWindow>,
    pub out_dir: PathBuf,
    /// Worker threads; 0 picks the available parallelism.
    pub threads: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: ModelKind::Lattice,
            alpha: 1.0,
            beta: 0.0,
            gamma: 1.0,
            rho: 1.0,
            steps: 100_000,
            paths: 1000,
            master_seed: DEFAULT_MASTER_SEED,
            x0: 0.0,
            y0: 0.0,
            checkpoints: DEFAULT_CHECKPOINTS,
            fit_window: None,
            out_dir: PathBuf::from("walklab-out"),
            threads: 0,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| WalkError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| WalkError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| WalkError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn effective_fit_window(&self) -> FitWindow {
        self.fit_window
            .unwrap_or_else(|| FitWindow::new(1000.min((self.steps / 100).max(1)), self.steps))
    }

    /// Drift parameters, `None` for the barycentric models.
    pub fn model_params(&self) -> Result<Option<ModelParams>> {
        match self.model.process() {
            Process::Drift(variant) => variant.params(self.alpha, self.beta, self.gamma, self.rho).map(Some),
            Process::Barycentric(_) => Ok(None),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.model_params()?;
        if self.steps == 0 {
            return Err(WalkError::Config("steps must be >= 1".into()));
        }
        if self.paths == 0 {
            return Err(WalkError::Config("paths must be >= 1".into()));
        }
        if self.checkpoints == 0 {
            return Err(WalkError::Config("checkpoints must be >= 1".into()));
        }
        let w = self.effective_fit_window();
        if w.lo > w.hi {
            return Err(WalkError::Config(format!("fit window lo {} exceeds hi {}", w.lo, w.hi)));
        }
        if w.hi > self.steps {
            return Err(WalkError::Config(format!(
                "fit window hi {} exceeds steps {}",
                w.hi, self.steps
            )));
        }
        if self.model.is_drift() {
            if !(self.x0 >= 0.0 && self.x0.is_finite() && self.y0.is_finite()) {
                return Err(WalkError::Config(format!(
                    "initial state must have finite x0 >= 0, got ({}, {})",
                    self.x0, self.y0
                )));
            }
            if self.model == ModelKind::Lattice && (self.x0.fract() != 0.0 || self.y0.fract() != 0.0) {
                return Err(WalkError::Config("lattice model needs an integer initial state".into()));
            }
        }
        Ok(())
    }

    /// FNV-1a over the canonical JSON of the fields that determine results
    /// (everything except `threads` and `out_dir`).
    pub fn config_hash(&self) -> String {
        let canonical = RunConfig {
            threads: 0,
            out_dir: PathBuf::new(),
            ..self.clone()
        };
        let bytes = serde_json::to_vec(&canonical).expect("config serializes");
        let hash = bytes.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &b| {
            (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
        });
        format!("{hash:016x}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_window_follows_steps() {
        let c = RunConfig::default();
        assert_eq!(c.effective_fit_window(), FitWindow::new(1000, 100_000));
        let short = RunConfig { steps: 50, ..c };
        assert_eq!(short.effective_fit_window(), FitWindow::new(1, 50));
    }

    #[test]
    fn validation_rejects_bad_configs() {
        let ok = RunConfig::default();
        assert!(ok.validate().is_ok());
        assert!(RunConfig { paths: 0, ..ok.clone() }.validate().is_err());
        assert!(RunConfig {
            alpha: -1.5,
            ..ok.clone()
        }
        .validate()
        .is_err());
        assert!(RunConfig {
            fit_window: Some(FitWindow::new(10, 200_000)),
            ..ok.clone()
        }
        .validate()
        .is_err());
        assert!(RunConfig { x0: 0.5, ..ok.clone() }.validate().is_err());
        assert!(RunConfig {
            x0: 0.5,
            model: ModelKind::LatticeVerbatim,
            ..ok.clone()
        }
        .validate()
        .is_ok());
        // Drift parameters are ignored by the barycentric models.
        assert!(RunConfig {
            model: ModelKind::Barycentric,
            alpha: -3.0,
            ..ok
        }
        .validate()
        .is_ok());
    }

    #[test]
    fn partial_json_takes_defaults_and_unknown_keys_fail() {
        let c = RunConfig::from_json(r#"{"model": "barycentric-sym", "steps": 10}"#).unwrap();
        assert_eq!(c.model, ModelKind::BarycentricSym);
        assert_eq!(c.steps, 10);
        assert_eq!(c.paths, RunConfig::default().paths);
        assert!(RunConfig::from_json(r#"{"stepz": 10}"#).is_err());
        assert!(RunConfig::from_json(r#"{"model": "saw"}"#).is_err());
    }

    #[test]
    fn hash_ignores_threads_and_out_dir() {
        let a = RunConfig::default();
        let b = RunConfig {
            threads: 8,
            out_dir: "elsewhere".into(),
            ..a.clone()
        };
        assert_eq!(a.config_hash(), b.config_hash());
        assert_ne!(a.config_hash(), RunConfig { master_seed: 1, ..a }.config_hash());
    }
}
