//! Layout of a run directory:
//!
//! * `config.cfg` copy of the configuration text
//! * `trace.csv` one row per sample, `trace.json` full samples with profiles
//! * `final.bin` (+ `.json` sidecar) the final metric
//! * `snapshots/snap_NNNN.bin` sampled metrics when `snapshots = true`
//! * `manifest.json` config hash, version, timestamps, monitors, file digests

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use g2hym::config::RunConfig;
use g2hym::heat_flow::{FlowTrace, TraceSample};
use g2hym::lattice_model::{read_field, write_field, EndoField, LatticeChart, LatticeError};

pub const CSV_HEADER: &str = "t,step,sup_e,fhat_l2_sq,sup_sigma,sigma_step,l,energy,n_value";

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Seconds since the epoch, overridable with `SOURCE_DATE_EPOCH` so that the
/// manifest is reproducible too.
fn now() -> u64 {
    std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or_else(|| SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()))
}

#[derive(Serialize)]
pub struct MonitorResult {
    pub name: String,
    pub lemma: String,
    pub passed: bool,
    pub detail: serde_json::Value,
}

impl MonitorResult {
    pub fn new<T: Serialize>(name: &str, lemma: &str, passed: bool, detail: &T) -> Self {
        MonitorResult {
            name: name.into(),
            lemma: lemma.into(),
            passed,
            detail: serde_json::to_value(detail).unwrap_or(serde_json::Value::Null),
        }
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    config_hash: String,
    code_version: &'static str,
    started_unix: u64,
    finished_unix: u64,
    passed: bool,
    monitors: &'a [MonitorResult],
    files: BTreeMap<String, String>,
}

#[derive(Serialize, Deserialize)]
struct TraceFile {
    dt: f64,
    converged: bool,
    /// `(t, file)` per stored snapshot.
    snapshots: Vec<(f64, String)>,
    samples: Vec<TraceSample>,
}

pub struct RunDir {
    root: PathBuf,
    config_hash: String,
    started: u64,
    monitors: Vec<MonitorResult>,
    files: Vec<String>,
}

impl RunDir {
    pub fn create(root: &Path, cfg: &RunConfig, text: &str) -> io::Result<Self> {
        fs::create_dir_all(root)?;
        fs::write(root.join("config.cfg"), text)?;
        Ok(RunDir {
            root: root.to_path_buf(),
            config_hash: sha256_hex(cfg.canonical().as_bytes()),
            started: now(),
            monitors: Vec::new(),
            files: vec!["config.cfg".into()],
        })
    }

    fn add_field(&mut self, rel: &str, chart: &LatticeChart, f: &EndoField, label: &str) -> Result<(), LatticeError> {
        let shape: Vec<usize> = chart.axes().iter().map(|a| a.n).collect();
        write_field(&self.root.join(rel), f, &shape, label)?;
        self.files.push(rel.into());
        self.files.push(format!("{rel}.json"));
        Ok(())
    }

    pub fn write_trace(&mut self, chart: &LatticeChart, trace: &FlowTrace) -> Result<(), Box<dyn std::error::Error>> {
        let mut csv = String::from(CSV_HEADER);
        csv.push('\n');
        for s in &trace.samples {
            let step = s.sigma_step.map_or(String::new(), |v| format!("{v:e}"));
            let _ = writeln!(
                csv,
                "{:e},{},{:e},{:e},{:e},{},{:e},{:e},{:e}",
                s.t, s.step, s.sup_e, s.fhat_l2_sq, s.sup_sigma, step, s.l, s.energy, s.n_value
            );
        }
        fs::write(self.root.join("trace.csv"), csv)?;
        self.files.push("trace.csv".into());

        let mut snaps = Vec::new();
        if !trace.snapshots.is_empty() {
            fs::create_dir_all(self.root.join("snapshots"))?;
            for (i, (h, s)) in trace.snapshots.iter().zip(&trace.samples).enumerate() {
                let rel = format!("snapshots/snap_{i:04}.bin");
                self.add_field(&rel, chart, h, &format!("t={:e}", s.t))?;
                snaps.push((s.t, rel));
            }
        }
        self.add_field("final.bin", chart, &trace.final_state.h, &format!("t={:e}", trace.final_state.t))?;
        let tf = TraceFile { dt: trace.dt, converged: trace.converged, snapshots: snaps, samples: trace.samples.clone() };
        fs::write(self.root.join("trace.json"), serde_json::to_string(&tf)?)?;
        self.files.push("trace.json".into());
        Ok(())
    }

    pub fn monitor(&mut self, m: MonitorResult) {
        self.monitors.push(m);
    }

    /// Writes the manifest; returns the lemmas of failed monitors.
    pub fn finish(self) -> io::Result<Vec<String>> {
        let mut files = BTreeMap::new();
        for f in &self.files {
            files.insert(f.clone(), sha256_hex(&fs::read(self.root.join(f))?));
        }
        let failed: Vec<String> = self.monitors.iter().filter(|m| !m.passed).map(|m| m.lemma.clone()).collect();
        let manifest = Manifest {
            config_hash: self.config_hash,
            code_version: env!("CARGO_PKG_VERSION"),
            started_unix: self.started,
            finished_unix: now(),
            passed: failed.is_empty(),
            monitors: &self.monitors,
            files,
        };
        fs::write(self.root.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
        Ok(failed)
    }

    pub fn open(root: &Path) -> Result<SavedRun, Box<dyn std::error::Error>> {
        let config = RunConfig::load(&root.join("config.cfg"))?;
        let tf: TraceFile = serde_json::from_str(&fs::read_to_string(root.join("trace.json"))?)?;
        let (_, final_metric) = read_field(&root.join("final.bin"))?;
        Ok(SavedRun {
            root: root.to_path_buf(),
            config,
            samples: tf.samples,
            snapshots: tf.snapshots,
            final_t: 0.0,
            final_metric,
        }
        .with_final_t())
    }
}

/// A run directory read back for diagnostics.
pub struct SavedRun {
    root: PathBuf,
    pub config: RunConfig,
    pub samples: Vec<TraceSample>,
    snapshots: Vec<(f64, String)>,
    final_t: f64,
    pub final_metric: EndoField,
}

impl SavedRun {
    fn with_final_t(mut self) -> Self {
        self.final_t = self.samples.last().map_or(0.0, |s| s.t);
        self
    }

    /// Stored snapshots, or the final metric alone when none were kept.
    pub fn metrics(&self) -> Result<Vec<(f64, EndoField)>, LatticeError> {
        if self.snapshots.is_empty() {
            return Ok(vec![(self.final_t, self.final_metric.clone())]);
        }
        self.snapshots.iter().map(|(t, rel)| Ok((*t, read_field(&self.root.join(rel))?.1))).collect()
    }
}
