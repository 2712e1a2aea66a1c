//! Flat key=value experiment configs with strict validation.

use corrsim::gateset::Family;
use corrsim::noise::BlockLen;
use corrsim::walkmodel::Bandwidth;
use std::fmt;
use std::path::Path;

#[derive(Debug)]
pub enum ConfigError {
    Io(std::io::Error),
    Parse { line: usize, text: String },
    UnknownKey(String),
    BadValue { key: String, value: String },
    Validation(String),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Io(e) => write!(f, "cannot read config: {e}"),
            ConfigError::Parse { line, text } => {
                write!(f, "line {line}: expected key=value, got '{text}'")
            }
            ConfigError::UnknownKey(k) => write!(f, "unknown key '{k}'"),
            ConfigError::BadValue { key, value } => {
                write!(f, "invalid value '{value}' for key '{key}'")
            }
            ConfigError::Validation(msg) => write!(f, "validation failed: {msg}"),
        }
    }
}

impl std::error::Error for ConfigError {}

/// One experiment: grid sizes, noise strengths, gate family, seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Gates per circuit.
    pub j: usize,
    /// Circuits.
    pub k: usize,
    /// Noise realizations per circuit.
    pub n: usize,
    /// Projective repetitions per (circuit, realization).
    pub r: u32,
    pub sigma_l2: f64,
    pub sigma_s2: f64,
    pub m_n: BlockLen,
    /// Optional block-length sweep (overrides `m_n` in sweep-aware
    /// pipelines).
    pub m_n_sweep: Vec<BlockLen>,
    pub family: Family,
    pub bandwidth: Bandwidth,
    pub seed: u64,
    /// Static detuning used by walk-check.
    pub delta_static: f64,
    /// Reorderings for cumulative variance trajectories.
    pub reorderings: usize,
    /// Maximum ACF lag.
    pub max_lag: usize,
    /// Filter-function frequency grid (rad per unit time), log spaced.
    pub omega_min: f64,
    pub omega_max: f64,
    pub omega_points: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            j: 100,
            k: 50,
            n: 200,
            r: 220,
            sigma_l2: 2e-3,
            sigma_s2: 0.0,
            m_n: BlockLen::Full,
            m_n_sweep: Vec::new(),
            family: Family::Primitive,
            bandwidth: Bandwidth::Two,
            seed: 7,
            delta_static: 0.01,
            reorderings: 1000,
            max_lag: 100,
            omega_min: 1e-3,
            omega_max: 10.0,
            omega_points: 200,
        }
    }
}

fn parse_block_len(value: &str) -> Option<BlockLen> {
    if value.eq_ignore_ascii_case("full") {
        return Some(BlockLen::Full);
    }
    value.parse::<u32>().ok().map(BlockLen::Gates)
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(ConfigError::Io)?;
        Self::from_str(&text)
    }

    pub fn from_str(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = ExperimentConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or(ConfigError::Parse { line: lineno + 1, text: line.to_string() })?;
            let key = key.trim();
            let value = value.trim();
            let bad = || ConfigError::BadValue { key: key.into(), value: value.into() };
            match key {
                "j" => cfg.j = value.parse().map_err(|_| bad())?,
                "k" => cfg.k = value.parse().map_err(|_| bad())?,
                "n" => cfg.n = value.parse().map_err(|_| bad())?,
                "r" => cfg.r = value.parse().map_err(|_| bad())?,
                "sigma_l2" => cfg.sigma_l2 = value.parse().map_err(|_| bad())?,
                "sigma_s2" => cfg.sigma_s2 = value.parse().map_err(|_| bad())?,
                "m_n" => cfg.m_n = parse_block_len(value).ok_or_else(bad)?,
                "m_n_sweep" => {
                    cfg.m_n_sweep = value
                        .split(',')
                        .map(|v| parse_block_len(v.trim()).ok_or_else(bad))
                        .collect::<Result<_, _>>()?;
                }
                "family" => cfg.family = value.parse().map_err(|_| bad())?,
                "bandwidth" => {
                    cfg.bandwidth = match value {
                        "single" | "1" => Bandwidth::Single,
                        "two" | "2" => Bandwidth::Two,
                        "eight" | "8" => Bandwidth::Eight,
                        _ => return Err(bad()),
                    }
                }
                "seed" => cfg.seed = value.parse().map_err(|_| bad())?,
                "delta_static" => cfg.delta_static = value.parse().map_err(|_| bad())?,
                "reorderings" => cfg.reorderings = value.parse().map_err(|_| bad())?,
                "max_lag" => cfg.max_lag = value.parse().map_err(|_| bad())?,
                "omega_min" => cfg.omega_min = value.parse().map_err(|_| bad())?,
                "omega_max" => cfg.omega_max = value.parse().map_err(|_| bad())?,
                "omega_points" => cfg.omega_points = value.parse().map_err(|_| bad())?,
                other => return Err(ConfigError::UnknownKey(other.to_string())),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |msg: String| Err(ConfigError::Validation(msg));
        if self.j < 1 || self.k < 1 || self.n < 1 || self.r < 1 {
            return fail(format!(
                "counts must be >= 1 (j={}, k={}, n={}, r={})",
                self.j, self.k, self.n, self.r
            ));
        }
        if self.sigma_l2 < 0.0 || self.sigma_s2 < 0.0 {
            return fail("variances must be >= 0".into());
        }
        for m in std::iter::once(&self.m_n).chain(self.m_n_sweep.iter()) {
            if let BlockLen::Gates(g) = m {
                if *g < 1 || *g as usize > self.j {
                    return fail(format!("m_n {g} outside [1, {}]", self.j));
                }
            }
        }
        if self.omega_min <= 0.0 || self.omega_max <= self.omega_min || self.omega_points < 2 {
            return fail("omega grid must be positive and increasing".into());
        }
        Ok(())
    }

    /// Block-length values to run: the sweep when present, otherwise the
    /// single configured value.
    pub fn block_lengths(&self) -> Vec<BlockLen> {
        if self.m_n_sweep.is_empty() {
            vec![self.m_n]
        } else {
            self.m_n_sweep.clone()
        }
    }

    /// Config echo written into every run manifest.
    pub fn manifest_text(&self) -> String {
        let block = |m: &BlockLen| match m {
            BlockLen::Full => "full".to_string(),
            BlockLen::Gates(g) => g.to_string(),
        };
        let sweep: Vec<String> = self.m_n_sweep.iter().map(block).collect();
        let bandwidth = match self.bandwidth {
            Bandwidth::Single => "single",
            Bandwidth::Two => "two",
            Bandwidth::Eight => "eight",
        };
        format!(
            "j={}\nk={}\nn={}\nr={}\nsigma_l2={}\nsigma_s2={}\nm_n={}\nm_n_sweep={}\n\
             family={}\nbandwidth={}\nseed={}\ndelta_static={}\nreorderings={}\nmax_lag={}\n\
             omega_min={}\nomega_max={}\nomega_points={}\n",
            self.j,
            self.k,
            self.n,
            self.r,
            self.sigma_l2,
            self.sigma_s2,
            block(&self.m_n),
            sweep.join(","),
            self.family.as_str(),
            bandwidth,
            self.seed,
            self.delta_static,
            self.reorderings,
            self.max_lag,
            self.omega_min,
            self.omega_max,
            self.omega_points,
        )
    }
}
