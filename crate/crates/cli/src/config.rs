//! Experiment configuration files.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentId {
    Fig2,
    Fig3,
    Fig4Oob,
    Fig5Snr,
    Fig6Pulses,
    Table1Opt,
    Fig7Bler,
    Custom,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 8] = [
        ExperimentId::Fig2,
        ExperimentId::Fig3,
        ExperimentId::Fig4Oob,
        ExperimentId::Fig5Snr,
        ExperimentId::Fig6Pulses,
        ExperimentId::Table1Opt,
        ExperimentId::Fig7Bler,
        ExperimentId::Custom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentId::Fig2 => "fig2",
            ExperimentId::Fig3 => "fig3",
            ExperimentId::Fig4Oob => "fig4-oob",
            ExperimentId::Fig5Snr => "fig5-snr",
            ExperimentId::Fig6Pulses => "fig6-pulses",
            ExperimentId::Table1Opt => "table1-opt",
            ExperimentId::Fig7Bler => "fig7-bler",
            ExperimentId::Custom => "custom",
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PulseChoice {
    Rrc,
    Gaussian,
    Pswf,
}

/// Configuration as written in the JSON file. Missing grids take the
/// experiment's defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub experiment: Option<ExperimentId>,
    pub omega: Option<Vec<f64>>,
    pub rho_db: Option<Vec<f64>>,
    pub tau: Option<Vec<f64>>,
    pub beta: Option<Vec<f64>>,
    pub eps_w: Option<Vec<f64>>,
    pub pe: Option<Vec<f64>>,
    pub rate: Option<Vec<f64>>,
    /// Pulse TBPs `2 W T_p`.
    pub c: Option<Vec<f64>>,
    pub seed: Option<u64>,
    /// File stem of the artifacts, defaults to the experiment name.
    pub output: Option<String>,
    pub workers: Option<usize>,
    pub rcu_samples: Option<usize>,
    pub blocks: Option<u64>,
    pub i_out: Option<usize>,
    pub early_stop: Option<bool>,
    pub pulse: Option<PulseChoice>,
}

/// Fully resolved and validated configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentId,
    pub omega: Vec<f64>,
    pub rho_db: Vec<f64>,
    pub tau: Vec<f64>,
    pub beta: Vec<f64>,
    pub eps_w: Vec<f64>,
    pub pe: Vec<f64>,
    pub rate: Vec<f64>,
    pub c: Vec<f64>,
    pub seed: u64,
    pub output: String,
    pub workers: usize,
    pub rcu_samples: usize,
    pub blocks: u64,
    pub i_out: usize,
    pub early_stop: bool,
    pub pulse: PulseChoice,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

impl std::error::Error for ConfigError {}

fn err(field: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError { field: field.into(), message: message.into() }
}

fn steps(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| ((lo + step * i as f64) * 1e9).round() / 1e9).collect()
}

struct Defaults {
    omega: Vec<f64>,
    rho_db: Vec<f64>,
    tau: Vec<f64>,
    beta: Vec<f64>,
    c: Vec<f64>,
    rate: Vec<f64>,
}

fn defaults(id: ExperimentId) -> Defaults {
    let mut d = Defaults {
        omega: vec![132.0],
        rho_db: vec![30.0],
        tau: vec![1.0],
        beta: vec![1.0],
        c: Vec::new(),
        rate: Vec::new(),
    };
    match id {
        ExperimentId::Fig2 => {
            d.omega = vec![10.0, 20.0, 30.0, 50.0, 75.0, 100.0, 132.0, 150.0, 200.0, 300.0, 400.0, 500.0];
            d.rho_db = vec![10.0, 30.0];
            d.beta = Vec::new();
        }
        ExperimentId::Fig3 => {
            d.omega = vec![50.0, 100.0, 300.0];
            d.beta = vec![0.1, 0.5, 1.0];
            d.tau = steps(0.3, 1.0, 0.05);
        }
        ExperimentId::Fig4Oob => {
            d.beta = vec![0.1, 0.3, 0.5, 1.0];
            d.c = steps(1.0, 16.0, 0.25);
        }
        ExperimentId::Fig5Snr => {
            d.omega = vec![50.0, 132.0, 300.0];
            d.beta = vec![0.5];
            d.tau = Vec::new();
        }
        ExperimentId::Fig6Pulses => {
            d.omega = vec![10.0, 20.0, 30.0, 50.0, 75.0, 100.0, 150.0, 200.0, 300.0];
            d.beta = vec![0.1, 0.3, 0.5, 1.0];
            d.tau = steps(0.3, 1.0, 0.05);
        }
        ExperimentId::Table1Opt => {
            d.omega = vec![10.0, 30.0, 100.0];
            d.rho_db = vec![20.0];
            d.c = vec![4.0, 6.0, 10.0];
        }
        ExperimentId::Fig7Bler => {
            d.rho_db = Vec::new();
            d.tau = vec![0.4859];
            d.c = vec![8.57];
        }
        ExperimentId::Custom => {
            d.rate = Vec::new();
        }
    }
    d
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let raw: RawConfig = serde_json::from_str(text)
            .map_err(|e| err(format!("line {} column {}", e.line(), e.column()), e.to_string()))?;
        Self::resolve(raw)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| err(path.display().to_string(), e.to_string()))?;
        Self::from_json(&text)
    }

    /// Fills defaults and validates every field.
    pub fn resolve(raw: RawConfig) -> Result<Self, ConfigError> {
        let experiment = raw.experiment.ok_or_else(|| err("experiment", "missing"))?;
        let d = defaults(experiment);
        let cfg = ExperimentConfig {
            experiment,
            omega: raw.omega.unwrap_or(d.omega),
            rho_db: raw.rho_db.unwrap_or(d.rho_db),
            tau: raw.tau.unwrap_or(d.tau),
            beta: raw.beta.unwrap_or(d.beta),
            eps_w: raw.eps_w.unwrap_or_else(|| vec![1e-4]),
            pe: raw.pe.unwrap_or_else(|| vec![1e-3]),
            rate: raw.rate.unwrap_or(d.rate),
            c: raw.c.unwrap_or(d.c),
            seed: raw.seed.unwrap_or(1),
            output: raw.output.unwrap_or_else(|| experiment.name().to_string()),
            workers: raw.workers.unwrap_or(0),
            rcu_samples: raw.rcu_samples.unwrap_or(100_000),
            blocks: raw.blocks.unwrap_or(20_000),
            i_out: raw.i_out.unwrap_or(30),
            early_stop: raw.early_stop.unwrap_or(false),
            pulse: raw.pulse.unwrap_or(PulseChoice::Rrc),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        check_grid("omega", &self.omega, |v| v > 0.0, "must be positive")?;
        check_grid("rho_db", &self.rho_db, |v| v.is_finite() && v.abs() <= 200.0, "must lie in [-200, 200] dB")?;
        check_grid("tau", &self.tau, |v| v > 0.0 && v <= 1.0, "must lie in (0, 1]")?;
        check_grid("beta", &self.beta, |v| (0.0..=1.0).contains(&v), "must lie in [0, 1]")?;
        check_grid("eps_w", &self.eps_w, |v| v > 0.0 && v < 1.0, "must lie in (0, 1)")?;
        check_grid("pe", &self.pe, |v| v > 0.0 && v < 1.0, "must lie in (0, 1)")?;
        check_grid("rate", &self.rate, |v| v > 0.0 && v.is_finite(), "must be positive")?;
        check_grid("c", &self.c, |v| v > 0.0 && v.is_finite(), "must be positive")?;
        if self.output.is_empty() || self.output.contains(['/', '\\']) {
            return Err(err("output", "must be a plain file stem"));
        }
        if self.rcu_samples < 100_000 {
            return Err(err("rcu_samples", "at least 100000 draws are required"));
        }
        if self.blocks == 0 {
            return Err(err("blocks", "must be positive"));
        }
        if self.i_out == 0 {
            return Err(err("i_out", "must be positive"));
        }
        let nonempty = |name: &str, v: &[f64]| {
            if v.is_empty() {
                Err(err(name, format!("{} needs at least one value", self.experiment)))
            } else {
                Ok(())
            }
        };
        nonempty("omega", &self.omega)?;
        nonempty("eps_w", &self.eps_w)?;
        nonempty("pe", &self.pe)?;
        match self.experiment {
            ExperimentId::Fig2 | ExperimentId::Custom => nonempty("rho_db", &self.rho_db)?,
            ExperimentId::Fig3 | ExperimentId::Fig6Pulses => {
                nonempty("rho_db", &self.rho_db)?;
                nonempty("tau", &self.tau)?;
            }
            ExperimentId::Fig4Oob => nonempty("c", &self.c)?,
            ExperimentId::Fig5Snr => nonempty("beta", &self.beta)?,
            ExperimentId::Table1Opt => {
                nonempty("c", &self.c)?;
                nonempty("rho_db", &self.rho_db)?;
                if self.c.len() != self.omega.len() {
                    return Err(err("c", "table1-opt pairs c with omega; both grids need the same length"));
                }
            }
            ExperimentId::Fig7Bler => {
                for (name, v) in [("omega", &self.omega), ("beta", &self.beta), ("tau", &self.tau), ("c", &self.c)] {
                    if v.len() != 1 {
                        return Err(err(name, "fig7-bler simulates one link; give exactly one value"));
                    }
                }
            }
        }
        if self.experiment == ExperimentId::Custom {
            nonempty("tau", &self.tau)?;
            if self.pulse == PulseChoice::Rrc {
                nonempty("beta", &self.beta)?;
            }
        }
        Ok(())
    }

    /// Identity of the computation: everything except the worker count and
    /// the output stem.
    pub fn fingerprint(&self) -> String {
        let mut v = serde_json::to_value(self).expect("config serializes");
        let map = v.as_object_mut().expect("config is an object");
        map.remove("workers");
        map.remove("output");
        v.to_string()
    }
}

fn check_grid(name: &str, v: &[f64], ok: impl Fn(f64) -> bool, what: &str) -> Result<(), ConfigError> {
    for (i, &x) in v.iter().enumerate() {
        if !ok(x) {
            return Err(err(format!("{name}[{i}]"), format!("{x} {what}")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_for_every_experiment() {
        for id in ExperimentId::ALL {
            let raw = RawConfig { experiment: Some(id), ..Default::default() };
            ExperimentConfig::resolve(raw).unwrap();
        }
    }

    #[test]
    fn zero_tau_is_rejected_with_its_position() {
        let e = ExperimentConfig::from_json(r#"{"experiment": "custom", "tau": [0.5, 0.0]}"#).unwrap_err();
        assert_eq!(e.field, "tau[1]");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let e = ExperimentConfig::from_json("{\n  \"experiment\": \"fig2\",\n  \"omegas\": [1]\n}").unwrap_err();
        assert!(e.field.starts_with("line 3"), "{e}");
    }

    #[test]
    fn step_grid_is_clean() {
        assert_eq!(steps(0.3, 1.0, 0.05).len(), 15);
        assert_eq!(*steps(0.3, 1.0, 0.05).last().unwrap(), 1.0);
    }
}
