//! Plain-text run configuration: one `key = value` per line, `#` comments.
//!
//! Unknown keys are rejected. Every key has a default, so an empty file is a
//! valid (rank-2, m = 1 cylinder) run.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use crate::heat_flow::{FlowConfig, FlowError, FlowProblem};
use crate::lattice_model::{smooth_metric, ChartSpec, EndoField, Envelope, HolomorphicTwist, LatticeChart, TwistSpec};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read configuration: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("key `{key}`: cannot parse `{value}`")]
    BadValue { key: String, value: String },
}

/// Initial/reference metric.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum H0Spec {
    Identity,
    /// Seeded smooth positive metric (`exp` of a trigonometric field).
    Smooth { amplitude: f64, modes: usize, seed: u64 },
}

/// Monitors a run can enable.
pub const MONITORS: [&str; 3] = ["max_principle", "decay", "energy"];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub chart: ChartSpec,
    pub twist: TwistSpec,
    pub h0: H0Spec,
    pub flow: FlowConfig,
    pub monitors: Vec<String>,
    /// Keep every sampled metric as a snapshot.
    pub snapshots: bool,
}

const KEYS: [&str; 27] = [
    "rank",
    "torus_dim",
    "torus_n",
    "torus_len",
    "cylinder",
    "s_intervals",
    "s_len",
    "n_alpha",
    "twist_amplitude",
    "twist_modes",
    "envelope",
    "decay",
    "bump_center",
    "bump_width",
    "seed",
    "h0",
    "h0_amplitude",
    "h0_modes",
    "dt",
    "t_end",
    "cfl_safety",
    "det_one",
    "monitor_every",
    "target",
    "divergence_factor",
    "monitors",
    "snapshots",
];

fn get<T: std::str::FromStr>(kv: &BTreeMap<String, String>, key: &str, default: T) -> Result<T, ConfigError> {
    match kv.get(key) {
        None => Ok(default),
        Some(v) => v.parse().map_err(|_| ConfigError::BadValue { key: key.into(), value: v.clone() }),
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut kv = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| ConfigError::Syntax { line: i + 1, msg: "expected `key = value`".into() })?;
            let k = k.trim();
            if !KEYS.contains(&k) {
                return Err(ConfigError::UnknownKey(k.into()));
            }
            if kv.insert(k.to_string(), v.trim().to_string()).is_some() {
                return Err(ConfigError::Syntax { line: i + 1, msg: format!("duplicate key `{k}`") });
            }
        }
        let seed: u64 = get(&kv, "seed", 1)?;
        let rank = get(&kv, "rank", 2usize)?;
        let cylinder = get(&kv, "cylinder", true)?;
        let chart = ChartSpec {
            torus_dim: get(&kv, "torus_dim", 1)?,
            torus_n: get(&kv, "torus_n", 16)?,
            torus_len: get(&kv, "torus_len", std::f64::consts::TAU)?,
            cylinder: if cylinder {
                Some((get(&kv, "s_intervals", 64)?, get(&kv, "s_len", 4.0)?, get(&kv, "n_alpha", 1)?))
            } else {
                None
            },
        };
        let envelope = match kv.get("envelope").map(String::as_str).unwrap_or("exp") {
            "exp" => Envelope::Exp { rate: get(&kv, "decay", 1.0)? },
            "bump" => Envelope::Bump { center: get(&kv, "bump_center", 2.0)?, width: get(&kv, "bump_width", 1.0)? },
            "uniform" => Envelope::Uniform,
            other => return Err(ConfigError::BadValue { key: "envelope".into(), value: other.into() }),
        };
        let twist = TwistSpec {
            rank,
            amplitude: get(&kv, "twist_amplitude", 0.3)?,
            modes: get(&kv, "twist_modes", 3)?,
            envelope,
            seed,
        };
        let h0 = match kv.get("h0").map(String::as_str).unwrap_or("identity") {
            "identity" => H0Spec::Identity,
            "smooth" => H0Spec::Smooth {
                amplitude: get(&kv, "h0_amplitude", 0.2)?,
                modes: get(&kv, "h0_modes", 2)?,
                seed: seed.wrapping_add(1),
            },
            other => return Err(ConfigError::BadValue { key: "h0".into(), value: other.into() }),
        };
        let d = FlowConfig::default();
        let flow = FlowConfig {
            dt: get(&kv, "dt", 1e-3)?,
            t_end: get(&kv, "t_end", 1.0)?,
            cfl_safety: get(&kv, "cfl_safety", d.cfl_safety)?,
            det_one: get(&kv, "det_one", d.det_one)?,
            monitor_every: get(&kv, "monitor_every", d.monitor_every)?,
            target: get(&kv, "target", d.target)?,
            divergence_factor: get(&kv, "divergence_factor", d.divergence_factor)?,
        };
        let monitors: Vec<String> = match kv.get("monitors") {
            None => MONITORS.iter().map(|s| s.to_string()).collect(),
            Some(v) => v.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect(),
        };
        if let Some(bad) = monitors.iter().find(|m| !MONITORS.contains(&m.as_str())) {
            return Err(ConfigError::BadValue { key: "monitors".into(), value: bad.clone() });
        }
        Ok(RunConfig { chart, twist, h0, flow, monitors, snapshots: get(&kv, "snapshots", false)? })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Canonical serialisation; equal configurations give equal strings.
    pub fn canonical(&self) -> String {
        serde_json::to_string(self).expect("configuration serialises")
    }

    pub fn monitor_enabled(&self, name: &str) -> bool {
        self.monitors.iter().any(|m| m == name)
    }

    /// Chart, twist and reference metric.
    pub fn build(&self) -> Result<FlowProblem, FlowError> {
        let chart = LatticeChart::new(self.chart.clone())?;
        let twist = HolomorphicTwist::from_spec(&chart, &self.twist);
        let h0 = match self.h0 {
            H0Spec::Identity => EndoField::identity(self.twist.rank, chart.len()),
            H0Spec::Smooth { amplitude, modes, seed } => smooth_metric(&chart, self.twist.rank, amplitude, modes, seed),
        };
        FlowProblem::new(chart, twist, h0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let c = RunConfig::parse("# nothing\n").unwrap();
        assert_eq!(c.twist.rank, 2);
        assert_eq!(c.chart.cylinder, Some((64, 4.0, 1)));
        assert_eq!(c.monitors.len(), MONITORS.len());
    }

    #[test]
    fn values_and_errors() {
        let c = RunConfig::parse("rank = 1\ncylinder = false\ntorus_n=8 # comment\nenvelope = uniform\nmonitors = energy").unwrap();
        assert_eq!(c.twist.rank, 1);
        assert!(c.chart.cylinder.is_none());
        assert_eq!(c.chart.torus_n, 8);
        assert_eq!(c.twist.envelope, Envelope::Uniform);
        assert!(c.monitor_enabled("energy") && !c.monitor_enabled("decay"));
        assert!(matches!(RunConfig::parse("colour = red"), Err(ConfigError::UnknownKey(_))));
        assert!(matches!(RunConfig::parse("rank = two"), Err(ConfigError::BadValue { .. })));
        assert!(matches!(RunConfig::parse("rank"), Err(ConfigError::Syntax { line: 1, .. })));
        assert!(matches!(RunConfig::parse("rank=1\nrank=2"), Err(ConfigError::Syntax { line: 2, .. })));
    }

    #[test]
    fn canonical_form_ignores_layout() {
        let a = RunConfig::parse("rank=1\nseed=3").unwrap();
        let b = RunConfig::parse("# x\nseed = 3\n\nrank = 1\n").unwrap();
        assert_eq!(a.canonical(), b.canonical());
    }
}
