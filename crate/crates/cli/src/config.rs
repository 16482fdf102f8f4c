//! `key = value` run configuration, merged with command-line overrides.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use hyperrank::correlation::RboVariant;
use hyperrank::eval::Protocol;
use hyperrank::fusion::{DEFAULT_DEPTH, DEFAULT_ITERATIONS};
use hyperrank::qpp::Aggregation;
use hyperrank::selection::{DEFAULT_ALPHA, DEFAULT_BETA, DEFAULT_K, DEFAULT_TOP_PAIRS};

use crate::args::Knobs;
use crate::error::{CliError, Result};

pub const KEYS: &[&str] = &[
    "collection",
    "rankers",
    "distances",
    "k",
    "alpha",
    "beta",
    "depth",
    "iterations",
    "top_pairs",
    "sizes",
    "output",
    "threads",
    "seed",
    "aggregation",
    "rbo",
    "protocol",
];

/// Parsed config file. Relative paths resolve against the file's directory.
#[derive(Debug, Clone, Default)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
    base: PathBuf,
}

impl ConfigFile {
    pub fn parse(text: &str, base: impl Into<PathBuf>) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Usage(format!("config line {}: expected `key = value`", n + 1))
            })?;
            let key = key.trim().replace('-', "_");
            let key = if key == "l" || key == "L" { "depth".to_string() } else { key };
            if !KEYS.contains(&key.as_str()) {
                return Err(CliError::Usage(format!("config line {}: unknown key `{key}`", n + 1)));
            }
            if values.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(CliError::Usage(format!("config line {}: `{key}` set twice", n + 1)));
            }
        }
        Ok(ConfigFile {
            values,
            base: base.into(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Core(hyperrank::Error::io(path, e)))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        ConfigFile::parse(&text, base)
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn path(&self, key: &str) -> Option<PathBuf> {
        self.get(key).map(|v| self.base.join(v))
    }

    fn paths(&self, key: &str) -> Vec<PathBuf> {
        self.get(key)
            .map(|v| list_items(v).map(|p| self.base.join(p)).collect())
            .unwrap_or_default()
    }
}

fn list_items(v: &str) -> impl Iterator<Item = &str> {
    v.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
}

fn parse_value<T: std::str::FromStr>(key: &str, v: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    v.parse()
        .map_err(|e| CliError::Usage(format!("invalid value {v:?} for `{key}`: {e}")))
}

fn parse_list<T: std::str::FromStr>(key: &str, v: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    list_items(v).map(|s| parse_value(key, s)).collect()
}

/// Fully resolved settings: flag, then config file, then default.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub collection: Option<PathBuf>,
    pub rankers: Vec<PathBuf>,
    pub distances: Vec<PathBuf>,
    pub k: usize,
    pub alpha: f64,
    pub beta: f64,
    /// Ranked-list depth for `rank`, fusion depth `L` elsewhere; clamped to N
    /// when not set explicitly.
    pub depth: Option<usize>,
    pub iterations: usize,
    pub top_pairs: usize,
    pub sizes: Vec<usize>,
    pub output: PathBuf,
    pub threads: usize,
    pub seed: u64,
    pub aggregation: Aggregation,
    pub rbo: RboVariant,
    pub protocol: Protocol,
}

macro_rules! pick {
    ($flag:expr, $file:expr, $key:literal, $default:expr) => {
        match ($flag, $file.get($key)) {
            (Some(v), _) => v,
            (None, Some(v)) => parse_value($key, v)?,
            (None, None) => $default,
        }
    };
}

impl Settings {
    pub fn resolve(file: &ConfigFile, knobs: &Knobs, threads: Option<usize>) -> Result<Self> {
        let sizes = match (&knobs.sizes, file.get("sizes")) {
            (Some(v), _) => v.clone(),
            (None, Some(v)) => parse_list("sizes", v)?,
            (None, None) => vec![2, 3, 4],
        };
        let settings = Settings {
            collection: knobs.collection.clone().or_else(|| file.path("collection")),
            rankers: if knobs.rankers.is_empty() {
                file.paths("rankers")
            } else {
                knobs.rankers.clone()
            },
            distances: if knobs.distances.is_empty() {
                file.paths("distances")
            } else {
                knobs.distances.clone()
            },
            k: pick!(knobs.k, file, "k", DEFAULT_K),
            alpha: pick!(knobs.alpha, file, "alpha", DEFAULT_ALPHA),
            beta: pick!(knobs.beta, file, "beta", DEFAULT_BETA),
            depth: match (knobs.depth, file.get("depth")) {
                (Some(v), _) => Some(v),
                (None, Some(v)) => Some(parse_value("depth", v)?),
                (None, None) => None,
            },
            iterations: pick!(knobs.iterations, file, "iterations", DEFAULT_ITERATIONS),
            top_pairs: pick!(knobs.top_pairs, file, "top_pairs", DEFAULT_TOP_PAIRS),
            sizes,
            output: knobs
                .output
                .clone()
                .or_else(|| file.path("output"))
                .unwrap_or_else(|| PathBuf::from("out")),
            threads: pick!(threads, file, "threads", 0),
            seed: pick!(knobs.seed, file, "seed", 0),
            aggregation: pick!(knobs.aggregation, file, "aggregation", Aggregation::Mean),
            rbo: pick!(knobs.rbo, file, "rbo", RboVariant::Prefix),
            protocol: pick!(knobs.protocol, file, "protocol", Protocol::AllQueries),
        };
        settings.validate()?;
        Ok(settings)
    }

    /// Range checks that need no input data.
    pub fn validate(&self) -> Result<()> {
        let bad = |name: &str, reason: String| {
            Err(CliError::Usage(format!("invalid parameter `{name}`: {reason}")))
        };
        if self.k < 2 {
            return bad("k", format!("{} is below 2", self.k));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad("alpha", format!("{} is outside (0, 1)", self.alpha));
        }
        if !self.beta.is_finite() {
            return bad("beta", format!("{} is not finite", self.beta));
        }
        if let Some(d) = self.depth {
            if d < self.k {
                return bad("depth", format!("{d} is below k = {}", self.k));
            }
        }
        if self.iterations == 0 {
            return bad("iterations", "must be at least 1".to_string());
        }
        if self.top_pairs < 1 {
            return bad("top_pairs", "must be at least 1".to_string());
        }
        if self.sizes.is_empty() || self.sizes.iter().any(|&n| n < 2) {
            return bad("sizes", format!("{:?}; every size must be at least 2", self.sizes));
        }
        Ok(())
    }

    /// Fusion depth for a collection of `n` items.
    pub fn fusion_depth(&self, n: usize) -> usize {
        self.depth.unwrap_or(DEFAULT_DEPTH.min(n))
    }

    /// Canonical `key = value` text of every parameter that affects results.
    pub fn canonical(&self) -> String {
        let depth = self.depth.map_or("auto".to_string(), |d| d.to_string());
        let sizes: Vec<String> = self.sizes.iter().map(usize::to_string).collect();
        format!(
            "k = {}\nalpha = {}\nbeta = {}\ndepth = {depth}\niterations = {}\ntop_pairs = {}\nsizes = {}\nseed = {}\naggregation = {}\nrbo = {}\nprotocol = {}\n",
            self.k,
            self.alpha,
            self.beta,
            self.iterations,
            self.top_pairs,
            sizes.join(","),
            self.seed,
            self.aggregation,
            self.rbo,
            self.protocol,
        )
    }
}
