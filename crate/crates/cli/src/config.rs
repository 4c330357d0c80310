//! Experiment configuration: defaults (the N = 50, γ₀ = −5 dB, σ = 2π
//! scenario), an optional flat TOML file, and command-line overrides applied
//! in that order. dB values are converted to linear scale here and nowhere
//! else.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use beamalign::{ChannelParams, FrameConfig, PolicySpec};
use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot parse config {path}: {source}")]
    Parse {
        path: PathBuf,
        source: toml::de::Error,
    },
    #[error("invalid sigma `{0}`: expected radians, `pi`, `2pi`, `pi/4`, ...")]
    Sigma(String),
    #[error(transparent)]
    Model(#[from] beamalign::Error),
}

/// Parses an angle in radians. Accepts plain numbers and multiples or
/// fractions of pi: `2pi`, `pi/2`, `3pi/4`, `1.5*pi`.
pub fn parse_sigma(text: &str) -> Result<f64, ConfigError> {
    let err = || ConfigError::Sigma(text.to_string());
    let s: String = text
        .trim()
        .to_ascii_lowercase()
        .split_whitespace()
        .collect();
    let s = s.replace('π', "pi");
    if let Ok(v) = s.parse::<f64>() {
        return Ok(v);
    }
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (s.as_str(), None),
    };
    let coef = num.strip_suffix("pi").ok_or_else(err)?;
    let coef = coef.strip_suffix('*').unwrap_or(coef);
    let coef = if coef.is_empty() {
        1.0
    } else {
        coef.parse::<f64>().map_err(|_| err())?
    };
    let den = match den {
        Some(d) => d.parse::<f64>().map_err(|_| err())?,
        None => 1.0,
    };
    let v = coef * PI / den;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(err())
    }
}

/// Parses a policy name. A bare `exhaustive` means `exhaustive:N`, which is
/// what sweeps and comparisons use since they range over `K` anyway.
pub fn parse_policy(text: &str, frame_len: usize) -> Result<PolicySpec, ConfigError> {
    if text.trim().eq_ignore_ascii_case("exhaustive") {
        return Ok(PolicySpec::Exhaustive { sectors: frame_len });
    }
    Ok(text.parse()?)
}

/// Keys accepted in a config file. Every key is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub n: Option<usize>,
    pub gamma0_db: Option<f64>,
    pub sigma: Option<SigmaValue>,
    pub policies: Option<Vec<String>>,
    pub episodes: Option<u64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub sensing: Option<usize>,
    pub threads: Option<usize>,
    pub simulate: Option<bool>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum SigmaValue {
    Radians(f64),
    Text(String),
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        toml::from_str(&text).map_err(|source| ConfigError::Parse {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// Command-line overrides; `None` leaves the file/default value alone.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub n: Option<usize>,
    pub gamma0_db: Option<f64>,
    pub sigma: Option<String>,
    pub policies: Vec<String>,
    pub episodes: Option<u64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub sensing: Option<usize>,
    pub threads: Option<usize>,
    pub simulate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n: usize,
    pub gamma0_db: f64,
    pub sigma: f64,
    pub policies: Vec<PolicySpec>,
    pub episodes: u64,
    pub seed: u64,
    pub out: Option<PathBuf>,
    /// Sensing budget for `simulate`; defaults to the bisection optimum.
    pub sensing: Option<usize>,
    pub threads: Option<usize>,
    /// Whether `sweep` also runs Monte Carlo for every row.
    pub simulate: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::paper()
    }
}

impl ExperimentConfig {
    /// N = 50 slots, γ₀ = −5 dB, σ = 2π; bisection, iterative M = 4 and 8,
    /// and exhaustive search.
    pub fn paper() -> Self {
        Self {
            n: 50,
            gamma0_db: -5.0,
            sigma: 2.0 * PI,
            policies: vec![
                PolicySpec::Bisection,
                PolicySpec::Iterative { division: 4 },
                PolicySpec::Iterative { division: 8 },
                PolicySpec::Exhaustive { sectors: 50 },
            ],
            episodes: 100_000,
            seed: 1,
            out: None,
            sensing: None,
            threads: None,
            simulate: false,
        }
    }

    pub fn from_file(file: FileConfig) -> Result<Self, ConfigError> {
        let mut cfg = Self::paper();
        if let Some(n) = file.n {
            cfg.n = n;
        }
        if let Some(db) = file.gamma0_db {
            cfg.gamma0_db = db;
        }
        match file.sigma {
            Some(SigmaValue::Radians(v)) => cfg.sigma = v,
            Some(SigmaValue::Text(t)) => cfg.sigma = parse_sigma(&t)?,
            None => {}
        }
        if let Some(p) = file.policies {
            cfg.policies = p
                .iter()
                .map(|s| parse_policy(s, cfg.n))
                .collect::<Result<_, _>>()?;
        } else {
            cfg.rescale_default_exhaustive(50);
        }
        cfg.episodes = file.episodes.unwrap_or(cfg.episodes);
        cfg.seed = file.seed.unwrap_or(cfg.seed);
        cfg.out = file.out.or(cfg.out);
        cfg.sensing = file.sensing.or(cfg.sensing);
        cfg.threads = file.threads.or(cfg.threads);
        cfg.simulate = file.simulate.unwrap_or(cfg.simulate);
        Ok(cfg)
    }

    pub fn apply(mut self, o: Overrides) -> Result<Self, ConfigError> {
        if let Some(n) = o.n {
            let old = self.n;
            self.n = n;
            self.rescale_default_exhaustive(old);
        }
        if let Some(db) = o.gamma0_db {
            self.gamma0_db = db;
        }
        if let Some(s) = &o.sigma {
            self.sigma = parse_sigma(s)?;
        }
        if !o.policies.is_empty() {
            self.policies = o
                .policies
                .iter()
                .map(|s| parse_policy(s, self.n))
                .collect::<Result<_, _>>()?;
        }
        self.episodes = o.episodes.unwrap_or(self.episodes);
        self.seed = o.seed.unwrap_or(self.seed);
        self.out = o.out.or(self.out);
        self.sensing = o.sensing.or(self.sensing);
        self.threads = o.threads.or(self.threads);
        self.simulate |= o.simulate;
        self.validate()?;
        Ok(self)
    }

    /// A bare `exhaustive` entry tracks N when N changes.
    fn rescale_default_exhaustive(&mut self, old_n: usize) {
        for p in &mut self.policies {
            if let PolicySpec::Exhaustive { sectors } = p {
                if *sectors == old_n {
                    *sectors = self.n;
                }
            }
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let frame = self.frame()?;
        self.channel()?;
        for p in &self.policies {
            p.validate(&frame)?;
        }
        if self.episodes == 0 {
            return Err(beamalign::Error::InvalidConfig("episodes must be >= 1".into()).into());
        }
        Ok(())
    }

    pub fn gamma0(&self) -> f64 {
        10f64.powf(self.gamma0_db / 10.0)
    }

    /// Frame with `L = 0`; commands set the sensing budget per row.
    pub fn frame(&self) -> Result<FrameConfig, ConfigError> {
        let sensing = self.sensing.unwrap_or(0).min(self.n);
        Ok(FrameConfig::new(self.n, sensing, self.sigma)?)
    }

    pub fn channel(&self) -> Result<ChannelParams, ConfigError> {
        Ok(ChannelParams::new(self.gamma0())?)
    }
}
