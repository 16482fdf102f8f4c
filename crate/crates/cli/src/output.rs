//! Artifact writers and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::Settings;
use crate::error::{CliError, Result};

pub fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| CliError::Write {
        path: dir.to_path_buf(),
        source,
    })
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        create_dir(parent)?;
    }
    fs::write(path, bytes).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("artifacts serialize");
    text.push('\n');
    write_file(path, text.as_bytes())
}

/// Write `rows` under `header` as CSV.
pub fn write_csv<R, I>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let csv_err = |source| CliError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(row).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| csv_err(e.into_error().into()))?;
    write_file(path, &bytes)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn file_digest(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| CliError::Core(hyperrank::Error::io(path, e)))?;
    Ok(sha256_hex(&bytes))
}

#[derive(Debug, Serialize)]
pub struct InputDigest {
    pub name: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct FeatureWeights {
    pub ranker_id: String,
    pub mean_edge_weight: f64,
    pub min_edge_weight: f64,
    pub max_edge_weight: f64,
}

#[derive(Debug, Serialize)]
pub struct FusedArtifact {
    pub file: String,
    pub members: Vec<String>,
    pub features: Vec<FeatureWeights>,
}

#[derive(Debug, Serialize)]
pub struct Parameters {
    pub k: usize,
    pub alpha: f64,
    pub beta: f64,
    pub depth: Option<usize>,
    pub iterations: usize,
    pub top_pairs: usize,
    pub sizes: Vec<usize>,
    pub seed: u64,
    pub aggregation: String,
    pub rbo: String,
    pub protocol: String,
}

/// Everything needed to reproduce a run. Contains no timings or thread
/// counts, so reruns produce identical bytes.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config_hash: String,
    pub parameters: Parameters,
    pub inputs: Vec<InputDigest>,
    pub fused: Vec<FusedArtifact>,
    pub artifacts: Vec<String>,
}

impl Manifest {
    pub fn new(command: &'static str, settings: &Settings) -> Result<Self> {
        let mut inputs = Vec::new();
        let files = settings
            .collection
            .iter()
            .chain(&settings.rankers)
            .chain(&settings.distances);
        for path in files {
            inputs.push(InputDigest {
                name: display_name(path),
                sha256: file_digest(path)?,
            });
        }
        let mut hashed = settings.canonical();
        for i in &inputs {
            hashed.push_str(&format!("input {} {}\n", i.name, i.sha256));
        }
        Ok(Manifest {
            tool: "hyperrank",
            version: env!("CARGO_PKG_VERSION"),
            command,
            config_hash: sha256_hex(hashed.as_bytes()),
            parameters: Parameters {
                k: settings.k,
                alpha: settings.alpha,
                beta: settings.beta,
                depth: settings.depth,
                iterations: settings.iterations,
                top_pairs: settings.top_pairs,
                sizes: settings.sizes.clone(),
                seed: settings.seed,
                aggregation: settings.aggregation.to_string(),
                rbo: settings.rbo.to_string(),
                protocol: settings.protocol.to_string(),
            },
            inputs,
            fused: Vec::new(),
            artifacts: Vec::new(),
        })
    }
}

pub fn display_name(path: &Path) -> String {
    path.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

#[derive(Debug, Serialize)]
struct StageTime {
    stage: &'static str,
    seconds: f64,
}

#[derive(Debug, Serialize)]
struct TimingReport<'a> {
    stages: &'a [StageTime],
    total_seconds: f64,
}

/// Wall-clock time per stage, written apart from the manifest.
pub struct Timings {
    start: Instant,
    stages: Vec<StageTime>,
}

impl Timings {
    pub fn start() -> Self {
        Timings {
            start: Instant::now(),
            stages: Vec::new(),
        }
    }

    pub fn time<T>(&mut self, stage: &'static str, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let t = Instant::now();
        let out = f()?;
        self.stages.push(StageTime {
            stage,
            seconds: t.elapsed().as_secs_f64(),
        });
        Ok(out)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_json(
            path,
            &TimingReport {
                stages: &self.stages,
                total_seconds: self.start.elapsed().as_secs_f64(),
            },
        )
    }
}

/// Records artifact names relative to the output directory as they are written.
pub struct Artifacts {
    dir: PathBuf,
    names: Vec<String>,
}

impl Artifacts {
    pub fn new(dir: &Path) -> Result<Self> {
        create_dir(dir)?;
        Ok(Artifacts {
            dir: dir.to_path_buf(),
            names: Vec::new(),
        })
    }

    pub fn path(&mut self, name: impl Into<String>) -> PathBuf {
        let name = name.into();
        let p = self.dir.join(&name);
        self.names.push(name);
        p
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn names(&self) -> Vec<String> {
        self.names.clone()
    }
}
