//! Flat `key = value` experiment configs.
//!
//! ```text
//! hdmd-config 1
//! # comments and blank lines are ignored
//! grid = 75
//! dictionary.width = 3
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use hdmd::c64;
use hdmd::spectral::ClusterCenter;
use serde::Serialize;

use crate::CliError;

pub const SCHEMA_HEADER: &str = "hdmd-config";
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Schrodinger,
    Probes,
    CustomSnapshots,
}

impl Experiment {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "schrodinger" => Some(Self::Schrodinger),
            "probes" => Some(Self::Probes),
            "custom-snapshots" | "custom" => Some(Self::CustomSnapshots),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Schrodinger => "schrodinger",
            Self::Probes => "probes",
            Self::CustomSnapshots => "custom-snapshots",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuadratureKind {
    Trapezoid,
    MonteCarlo,
}

/// Dictionary used for user-supplied snapshots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CustomDictionary {
    Constant,
    Linear,
    Gaussian,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DictionaryConfig {
    pub per_axis: usize,
    pub width: f64,
    pub amplitude_re: f64,
    pub amplitude_im: f64,
    pub lower: f64,
    pub upper: f64,
}

impl DictionaryConfig {
    pub fn amplitude(&self) -> c64 {
        c64::new(self.amplitude_re, self.amplitude_im)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeConfig {
    pub reference_size: usize,
    pub sizes: Vec<usize>,
    pub max_moment: usize,
    pub z_re: f64,
    pub z_im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: Option<Experiment>,
    /// Points per axis; `None` means the experiment default.
    pub grid: Option<Vec<usize>>,
    pub quadrature: QuadratureKind,
    pub dictionary: DictionaryConfig,
    pub rank_tolerance: f64,
    pub cluster_radius: f64,
    pub cluster_center: ClusterCenter,
    pub energy_cutoff: usize,
    pub exact_resolution: usize,
    pub block_rows: usize,
    pub output_dir: Option<PathBuf>,
    pub seed: u64,
    pub probe: ProbeConfig,
    pub custom_dictionary: CustomDictionary,
    pub custom_observable: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: None,
            grid: None,
            quadrature: QuadratureKind::Trapezoid,
            dictionary: DictionaryConfig {
                per_axis: 20,
                width: 3.0,
                amplitude_re: 1.0,
                amplitude_im: 1.0,
                lower: -4.0,
                upper: 4.0,
            },
            rank_tolerance: hdmd::DEFAULT_RANK_TOLERANCE,
            cluster_radius: 0.4,
            cluster_center: ClusterCenter::WeightedMean,
            energy_cutoff: 12,
            exact_resolution: 300,
            block_rows: 4096,
            output_dir: None,
            seed: 0,
            probe: ProbeConfig {
                reference_size: 2000,
                sizes: vec![10, 25, 50, 100, 200, 400, 800],
                max_moment: 8,
                z_re: 0.0,
                z_im: 1.0,
            },
            custom_dictionary: CustomDictionary::Linear,
            custom_observable: 0,
        }
    }
}

fn bad(line: usize, key: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("line {line}: {key}: {msg}"))
}

fn parse_num<T: std::str::FromStr>(line: usize, key: &str, v: &str) -> Result<T, CliError> {
    v.parse().map_err(|_| bad(line, key, format!("cannot parse {v:?}")))
}

fn parse_list(line: usize, key: &str, v: &str) -> Result<Vec<usize>, CliError> {
    v.split(',').map(|s| parse_num(line, key, s.trim())).collect()
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = Self::default();
        let mut seen = BTreeMap::new();
        let mut header = false;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if !header {
                let mut parts = content.split_whitespace();
                if parts.next() != Some(SCHEMA_HEADER) {
                    return Err(CliError::Config(format!(
                        "line {line}: expected `{SCHEMA_HEADER} {SCHEMA_VERSION}` before any setting"
                    )));
                }
                match parts.next().and_then(|v| v.parse::<u32>().ok()) {
                    Some(SCHEMA_VERSION) if parts.next().is_none() => {}
                    _ => {
                        return Err(CliError::Config(format!(
                            "line {line}: unsupported schema version (this build reads {SCHEMA_VERSION})"
                        )))
                    }
                }
                header = true;
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {line}: expected `key = value`")))?;
            let (key, value) = (key.trim(), value.trim());
            if let Some(prev) = seen.insert(key.to_string(), line) {
                return Err(bad(line, key, format!("already set on line {prev}")));
            }
            cfg.set(line, key, value)?;
        }
        if !header {
            return Err(CliError::Config(format!("missing `{SCHEMA_HEADER} {SCHEMA_VERSION}` header")));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, line: usize, key: &str, v: &str) -> Result<(), CliError> {
        match key {
            "experiment" => {
                self.experiment = Some(Experiment::parse(v).ok_or_else(|| bad(line, key, format!("unknown experiment {v:?}")))?)
            }
            "grid" => self.grid = Some(parse_list(line, key, v)?),
            "quadrature" => {
                self.quadrature = match v {
                    "trapezoid" => QuadratureKind::Trapezoid,
                    "monte-carlo" => QuadratureKind::MonteCarlo,
                    _ => return Err(bad(line, key, format!("unknown rule {v:?}"))),
                }
            }
            "dictionary.per_axis" => self.dictionary.per_axis = parse_num(line, key, v)?,
            "dictionary.width" => self.dictionary.width = parse_num(line, key, v)?,
            "dictionary.amplitude_re" => self.dictionary.amplitude_re = parse_num(line, key, v)?,
            "dictionary.amplitude_im" => self.dictionary.amplitude_im = parse_num(line, key, v)?,
            "dictionary.lower" => self.dictionary.lower = parse_num(line, key, v)?,
            "dictionary.upper" => self.dictionary.upper = parse_num(line, key, v)?,
            "rank_tolerance" => self.rank_tolerance = parse_num(line, key, v)?,
            "cluster_radius" => self.cluster_radius = parse_num(line, key, v)?,
            "cluster_center" => {
                self.cluster_center = match v {
                    "weighted-mean" => ClusterCenter::WeightedMean,
                    "mean" => ClusterCenter::Mean,
                    _ => return Err(bad(line, key, format!("unknown center {v:?}"))),
                }
            }
            "energy_cutoff" => self.energy_cutoff = parse_num(line, key, v)?,
            "exact_resolution" => self.exact_resolution = parse_num(line, key, v)?,
            "block_rows" => self.block_rows = parse_num(line, key, v)?,
            "output_dir" => self.output_dir = Some(PathBuf::from(v)),
            "seed" => self.seed = parse_num(line, key, v)?,
            "probe.reference_size" => self.probe.reference_size = parse_num(line, key, v)?,
            "probe.sizes" => self.probe.sizes = parse_list(line, key, v)?,
            "probe.max_moment" => self.probe.max_moment = parse_num(line, key, v)?,
            "probe.z_re" => self.probe.z_re = parse_num(line, key, v)?,
            "probe.z_im" => self.probe.z_im = parse_num(line, key, v)?,
            "custom.dictionary" => {
                self.custom_dictionary = match v {
                    "constant" => CustomDictionary::Constant,
                    "linear" => CustomDictionary::Linear,
                    "gaussian" => CustomDictionary::Gaussian,
                    _ => return Err(bad(line, key, format!("unknown dictionary {v:?}"))),
                }
            }
            "custom.observable" => self.custom_observable = parse_num(line, key, v)?,
            _ => return Err(bad(line, key, "unknown key")),
        }
        Ok(())
    }

    fn validate(&self) -> Result<(), CliError> {
        let fail = |key: &str, msg: &str| Err(CliError::Config(format!("{key}: {msg}")));
        let d = &self.dictionary;
        if let Some(g) = &self.grid {
            if g.is_empty() || g.len() > 2 || g.iter().any(|&n| n < 2) {
                return fail("grid", "expects one or two per-axis counts, each at least 2");
            }
        }
        if d.per_axis == 0 {
            return fail("dictionary.per_axis", "must be positive");
        }
        if !(d.width > 0.0 && d.width.is_finite()) {
            return fail("dictionary.width", "must be positive");
        }
        if !(d.amplitude_re.is_finite() && d.amplitude_im.is_finite()) || d.amplitude() == c64::new(0.0, 0.0) {
            return fail("dictionary.amplitude", "must be finite and nonzero");
        }
        if !(d.lower.is_finite() && d.upper.is_finite() && d.lower <= d.upper) {
            return fail("dictionary.lower", "must not exceed dictionary.upper");
        }
        if !(0.0..1.0).contains(&self.rank_tolerance) {
            return fail("rank_tolerance", "must lie in [0, 1)");
        }
        if !(self.cluster_radius > 0.0 && self.cluster_radius < 0.5) {
            return fail("cluster_radius", "must lie in (0, 0.5)");
        }
        if self.energy_cutoff == 0 {
            return fail("energy_cutoff", "must be positive");
        }
        if self.exact_resolution < 2 {
            return fail("exact_resolution", "must be at least 2");
        }
        if self.block_rows == 0 {
            return fail("block_rows", "must be positive");
        }
        let p = &self.probe;
        if p.reference_size < 2 {
            return fail("probe.reference_size", "must be at least 2");
        }
        if p.sizes.is_empty() || p.sizes[0] == 0 || p.sizes.windows(2).any(|w| w[1] <= w[0]) {
            return fail("probe.sizes", "must be positive and strictly increasing");
        }
        if *p.sizes.last().unwrap() > p.reference_size {
            return fail("probe.sizes", "must not exceed probe.reference_size");
        }
        if p.z_im == 0.0 || !p.z_im.is_finite() || !p.z_re.is_finite() {
            return fail("probe.z_im", "must be finite and nonzero");
        }
        Ok(())
    }

    /// Per-axis grid counts for the benchmark, honoring `--full-grid`.
    pub fn benchmark_grid(&self, full_grid: bool) -> [usize; 2] {
        if full_grid {
            return [300, 300];
        }
        match self.grid.as_deref() {
            Some([n]) => [*n, *n],
            Some([nx, ny]) => [*nx, *ny],
            _ => [75, 75],
        }
    }
}
