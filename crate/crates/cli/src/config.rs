use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Run settings as read from a config file or flags. Every field is
/// optional; [`RunConfig::resolve`] fills in defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub cutoff: Option<[usize; 2]>,
    pub beta: Option<f64>,
    pub budget: Option<f64>,
    pub eps: Option<f64>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub restarts: Option<usize>,
    pub max_iter: Option<usize>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::io(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::io(format!("cannot parse config {}: {e}", path.display())))
    }

    /// Fields set in `over` win.
    pub fn overlay(self, over: RunConfig) -> RunConfig {
        RunConfig {
            cutoff: over.cutoff.or(self.cutoff),
            beta: over.beta.or(self.beta),
            budget: over.budget.or(self.budget),
            eps: over.eps.or(self.eps),
            tol: over.tol.or(self.tol),
            seed: over.seed.or(self.seed),
            restarts: over.restarts.or(self.restarts),
            max_iter: over.max_iter.or(self.max_iter),
            format: over.format.or(self.format),
            out: over.out.or(self.out),
        }
    }

    pub fn resolve(self) -> Result<Settings, CliError> {
        let s = Settings {
            cutoff: self.cutoff.unwrap_or([12, 12]),
            beta: self.beta.unwrap_or(1.0),
            budget: self.budget,
            eps: self.eps.unwrap_or(0.05),
            tol: self.tol.unwrap_or(1e-4),
            seed: self.seed.unwrap_or(0),
            restarts: self.restarts.unwrap_or(4),
            max_iter: self.max_iter,
            format: self.format.unwrap_or_default(),
            out: self.out,
        };
        s.validate()?;
        Ok(s)
    }
}

/// Fully resolved settings; echoed into every JSON report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Settings {
    pub cutoff: [usize; 2],
    pub beta: f64,
    pub budget: Option<f64>,
    pub eps: f64,
    pub tol: f64,
    pub seed: u64,
    pub restarts: usize,
    /// `None` leaves each optimizer at its own default.
    pub max_iter: Option<usize>,
    pub format: Format,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

impl Settings {
    fn validate(&self) -> Result<(), CliError> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(CliError::usage(format!("{name} must be positive and finite, got {v}")))
            }
        };
        if self.cutoff.iter().any(|&d| d < 2) {
            return Err(CliError::usage(format!(
                "cutoffs must be at least 2, got {:?}",
                self.cutoff
            )));
        }
        positive("beta", self.beta)?;
        positive("eps", self.eps)?;
        positive("tol", self.tol)?;
        if let Some(m) = self.budget {
            positive("budget", m)?;
        }
        if self.max_iter == Some(0) {
            return Err(CliError::usage("max-iter must be at least 1"));
        }
        Ok(())
    }

    pub fn require_budget(&self) -> Result<f64, CliError> {
        self.budget
            .ok_or_else(|| CliError::usage("this command needs an energy budget (--budget)"))
    }
}
