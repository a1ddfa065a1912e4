//! Run configuration read from `--config`; every section is optional.
//!
//! Model and probe frequencies may use any unit and are rescaled to ω = 1. Grids,
//! broadening and times are read in units of ω and 1/ω.

use std::path::Path;

use serde::{Deserialize, Serialize};
use spinboson::circuit::CircuitParams;
use spinboson::ed::{Propagator, TruncationSpec};
use spinboson::excitations::{Convention, FitWindow};
use spinboson::model::ModelParams;
use spinboson::spectroscopy::{ProbeParams, TransformOptions, Window};

use crate::error::CliError;

/// Evenly spaced samples from `start` to `stop`, both included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Range {
    pub fn new(start: f64, stop: f64, points: usize) -> Self {
        Self { start, stop, points }
    }

    pub fn samples(&self) -> Vec<f64> {
        match self.points {
            1 => vec![self.start],
            n => (0..n)
                .map(|i| self.start + (self.stop - self.start) * i as f64 / (n - 1) as f64)
                .collect(),
        }
    }

    fn validate(&self, field: &str) -> Result<(), CliError> {
        if !(self.start.is_finite() && self.stop.is_finite()) || self.points == 0 {
            return Err(CliError::Config(format!(
                "{field}: needs finite bounds and at least one point"
            )));
        }
        if self.points > 1 && self.stop <= self.start {
            return Err(CliError::Config(format!("{field}: stop must exceed start")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhaseGrid {
    /// g/ω axis.
    pub g: Range,
    /// ω₀/ω axis.
    pub omega0: Range,
    /// Ring size of the exact-diagonalization points.
    pub ed_n_sites: usize,
}

impl Default for PhaseGrid {
    fn default() -> Self {
        Self {
            g: Range::new(0.01, 0.5, 50),
            omega0: Range::new(0.02, 2.0, 50),
            ed_n_sites: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectroscopySettings {
    pub nu: Range,
    /// Lorentzian broadening of the analytic engine.
    pub eta: f64,
    /// Record length and step of the exact-diagonalization engine.
    pub duration: f64,
    pub dt: f64,
    pub propagator: Propagator,
    pub transform: TransformOptions,
}

impl Default for SpectroscopySettings {
    fn default() -> Self {
        Self {
            nu: Range::new(0.3, 1.3, 501),
            eta: 2e-3,
            duration: 400.0,
            dt: 0.25,
            propagator: Propagator::Auto,
            transform: TransformOptions {
                window: Window::Hann,
                ..TransformOptions::default()
            },
        }
    }
}

impl SpectroscopySettings {
    pub fn times(&self) -> Vec<f64> {
        let steps = (self.duration / self.dt).round() as usize;
        (0..=steps).map(|i| i as f64 * self.dt).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub model: ModelParams,
    pub phase_diagram: PhaseGrid,
    pub truncation: TruncationSpec,
    pub probe: ProbeParams,
    pub convention: Convention,
    pub spectroscopy: SpectroscopySettings,
    pub fit: FitWindow,
    pub circuit: Option<CircuitParams>,
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let config: Config = match path {
            None => Config::default(),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|source| CliError::Io {
                    context: format!("reading {}", p.display()),
                    source,
                })?;
                serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
            }
        };
        config.validate()?;
        let omega = config.model.omega;
        Ok(Config {
            model: config.model.normalized(),
            probe: ProbeParams {
                omega_p: config.probe.omega_p / omega,
                g_p: config.probe.g_p / omega,
                ..config.probe
            },
            ..config
        })
    }

    fn validate(&self) -> Result<(), CliError> {
        self.model.validate()?;
        self.truncation.validate()?;
        self.probe.validate()?;
        self.phase_diagram.g.validate("phase_diagram.g")?;
        self.phase_diagram.omega0.validate("phase_diagram.omega0")?;
        self.spectroscopy.nu.validate("spectroscopy.nu")?;
        let s = &self.spectroscopy;
        if !(s.eta > 0.0 && s.dt > 0.0 && s.duration > s.dt) {
            return Err(CliError::Config(
                "spectroscopy: eta, dt and duration must be positive with duration > dt".into(),
            ));
        }
        if let Some(c) = &self.circuit {
            c.validate()?;
        }
        Ok(())
    }
}
