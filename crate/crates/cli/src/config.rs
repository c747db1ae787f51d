//! Experiment configuration documents and command-line overrides.

use std::path::{Path, PathBuf};

use dephasing::{Network, NoiseModel, Statistics, TrimerPreset};
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Parse(String),
    #[error("unknown preset {0:?}; run `dephasing list-presets`")]
    UnknownPreset(String),
    #[error("invalid override {0:?}: expected dot.path=value")]
    Override(String),
    #[error("{field}: {reason}")]
    Invalid { field: &'static str, reason: String },
}

fn invalid(field: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { field, reason: reason.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Single,
    Two,
    OracleSingle,
    OracleTwo,
    Analyze,
    Dfs,
}

/// A trimer preset, a JSON file, or an inline network document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, try_from = "Value")]
pub enum NetworkSource {
    Preset { preset: TrimerPreset },
    File { file: PathBuf },
    Inline(Network),
}

impl TryFrom<Value> for NetworkSource {
    type Error = String;

    fn try_from(value: Value) -> Result<Self, String> {
        let wrap = |e: serde_json::Error| format!("network: {e}");
        match &value {
            Value::Object(map) if map.contains_key("preset") => {
                let preset = serde_json::from_value(map["preset"].clone()).map_err(wrap)?;
                Ok(NetworkSource::Preset { preset })
            }
            Value::Object(map) if map.contains_key("file") => {
                let file = serde_json::from_value(map["file"].clone()).map_err(wrap)?;
                Ok(NetworkSource::File { file })
            }
            _ => serde_json::from_value(value).map(NetworkSource::Inline).map_err(wrap),
        }
    }
}

/// Initial states; sites are 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialState {
    Site { site: usize },
    Separable { p: usize, q: usize, statistics: Statistics },
    Entangled { p: usize, q: usize },
    ClassicallyCorrelated { p: usize, q: usize },
    Distinguishable { p: usize, q: usize },
    /// Row-major density matrix; `basis` is "site" or "ordered_pair".
    Explicit {
        basis: ExplicitBasis,
        #[serde(default = "distinguishable")]
        statistics: Statistics,
        re: Vec<Vec<f64>>,
        #[serde(default)]
        im: Option<Vec<Vec<f64>>>,
    },
}

fn distinguishable() -> Statistics {
    Statistics::Distinguishable
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExplicitBasis {
    Site,
    OrderedPair,
}

impl InitialState {
    pub fn pair(&self) -> Option<(usize, usize)> {
        match *self {
            InitialState::Separable { p, q, .. }
            | InitialState::Entangled { p, q }
            | InitialState::ClassicallyCorrelated { p, q }
            | InitialState::Distinguishable { p, q } => Some((p, q)),
            _ => None,
        }
    }

    pub fn is_two_particle(&self) -> bool {
        match self {
            InitialState::Site { .. } => false,
            InitialState::Explicit { basis, .. } => *basis == ExplicitBasis::OrderedPair,
            _ => true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleModel {
    PiecewiseConstantSegments,
    WhiteNoiseWiener,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    #[serde(rename = "M", default = "default_m")]
    pub m: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_model")]
    pub model: OracleModel,
    /// Correlation length Δz of the noise (cm); `γ = σ²Δz`.
    #[serde(default = "one")]
    pub segment_length: f64,
    /// Euler–Maruyama step for the white-noise model.
    #[serde(default = "default_step")]
    pub step: f64,
    /// Spacing of recorded ensemble snapshots (cm).
    #[serde(default = "one")]
    pub record_every: f64,
}

fn default_m() -> usize {
    2000
}
fn default_seed() -> u64 {
    2024
}
fn default_model() -> OracleModel {
    OracleModel::PiecewiseConstantSegments
}
fn default_step() -> f64 {
    1e-3
}
fn one() -> f64 {
    1.0
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            m: default_m(),
            seed: default_seed(),
            model: default_model(),
            segment_length: 1.0,
            step: default_step(),
            record_every: 1.0,
        }
    }
}

impl OracleConfig {
    pub fn noise_model(&self) -> NoiseModel {
        match self.model {
            OracleModel::PiecewiseConstantSegments => NoiseModel::PiecewiseConstantSegments,
            OracleModel::WhiteNoiseWiener => NoiseModel::WhiteNoiseWiener { step: self.step },
        }
    }
}

/// Named two-particle inputs compared by the analyze mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CanonicalState {
    Separable,
    Entangled,
    ClassicallyCorrelated,
    Distinguishable,
    Fermion,
}

impl CanonicalState {
    pub fn name(self) -> &'static str {
        match self {
            CanonicalState::Separable => "separable",
            CanonicalState::Entangled => "entangled",
            CanonicalState::ClassicallyCorrelated => "classically_correlated",
            CanonicalState::Distinguishable => "distinguishable",
            CanonicalState::Fermion => "fermion",
        }
    }

    pub fn initial_state(self, p: usize, q: usize) -> InitialState {
        match self {
            CanonicalState::Separable => InitialState::Separable { p, q, statistics: Statistics::Boson },
            CanonicalState::Entangled => InitialState::Entangled { p, q },
            CanonicalState::ClassicallyCorrelated => InitialState::ClassicallyCorrelated { p, q },
            CanonicalState::Distinguishable => InitialState::Distinguishable { p, q },
            CanonicalState::Fermion => InitialState::Separable { p, q, statistics: Statistics::Fermion },
        }
    }
}

fn default_compare() -> Vec<CanonicalState> {
    vec![
        CanonicalState::Separable,
        CanonicalState::Entangled,
        CanonicalState::ClassicallyCorrelated,
        CanonicalState::Distinguishable,
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub network: NetworkSource,
    pub mode: Mode,
    #[serde(default)]
    pub initial_state: Option<InitialState>,
    #[serde(default = "default_z_max")]
    pub z_max: f64,
    #[serde(default = "default_dz")]
    pub dz: f64,
    #[serde(default = "default_sample_every")]
    pub sample_every: usize,
    #[serde(default = "one")]
    pub dephasing_scale: f64,
    /// Runs once per factor, each into `scale-<factor>/`.
    #[serde(default)]
    pub dephasing_sweep: Option<Vec<f64>>,
    #[serde(default = "default_tol")]
    pub steady_state_tol: f64,
    #[serde(default = "default_compare")]
    pub compare_states: Vec<CanonicalState>,
    #[serde(default)]
    pub oracle: Option<OracleConfig>,
    #[serde(default = "default_out")]
    pub output_dir: PathBuf,
}

fn default_z_max() -> f64 {
    12.0
}
fn default_dz() -> f64 {
    dephasing::DEFAULT_DZ
}
fn default_sample_every() -> usize {
    dephasing::DEFAULT_SAMPLE_EVERY
}
fn default_tol() -> f64 {
    1e-4
}
fn default_out() -> PathBuf {
    PathBuf::from("out")
}

impl ExperimentConfig {
    pub fn from_value(value: Value) -> Result<Self, ConfigError> {
        let value = match value {
            // a manifest from a previous run carries the resolved config
            Value::Object(mut map) if map.contains_key("config") && !map.contains_key("mode") => {
                map.remove("config").unwrap_or(Value::Null)
            }
            other => other,
        };
        serde_json::from_value(value).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    /// Loads the network, checks ranges and returns the config with the
    /// network inlined.
    pub fn resolve(mut self, base_dir: &Path) -> Result<(Self, Network), ConfigError> {
        let net = match &self.network {
            NetworkSource::Preset { preset } => Network::trimer(*preset),
            NetworkSource::Inline(net) => net.clone(),
            NetworkSource::File { file } => {
                let path = if file.is_absolute() { file.clone() } else { base_dir.join(file) };
                let text =
                    std::fs::read_to_string(&path).map_err(|source| ConfigError::Read { path: path.clone(), source })?;
                Network::from_json(&text).map_err(|e| invalid("network", format!("{}: {e}", path.display())))?
            }
        };
        self.network = NetworkSource::Inline(net.clone());
        self.validate(&net)?;
        Ok((self, net))
    }

    fn validate(&self, net: &Network) -> Result<(), ConfigError> {
        let positive = |field: &'static str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(invalid(field, format!("must be positive, got {v}")))
            }
        };
        positive("dephasing_scale", self.dephasing_scale)?;
        positive("dz", self.dz)?;
        positive("z_max", self.z_max)?;
        positive("steady_state_tol", self.steady_state_tol)?;
        if self.sample_every == 0 {
            return Err(invalid("sample_every", "must be at least 1"));
        }
        if let Some(sweep) = &self.dephasing_sweep {
            if sweep.is_empty() {
                return Err(invalid("dephasing_sweep", "must list at least one factor"));
            }
            for &f in sweep {
                positive("dephasing_sweep", f)?;
            }
        }
        if let Some(o) = &self.oracle {
            if o.m == 0 {
                return Err(invalid("oracle.M", "must be at least 1"));
            }
            positive("oracle.segment_length", o.segment_length)?;
            positive("oracle.step", o.step)?;
            positive("oracle.record_every", o.record_every)?;
        }
        let n = net.n_sites();
        let check_site = |s: usize| {
            if s == 0 || s > n {
                Err(invalid("initial_state", format!("site {s} out of range 1..={n}")))
            } else {
                Ok(())
            }
        };
        match &self.initial_state {
            None if self.mode != Mode::Dfs && self.mode != Mode::Analyze => {
                return Err(invalid("initial_state", "required for this mode"));
            }
            None => {}
            Some(InitialState::Site { site }) => check_site(*site)?,
            Some(InitialState::Explicit { basis, re, im, .. }) => {
                let d = match basis {
                    ExplicitBasis::Site => n,
                    ExplicitBasis::OrderedPair => n * n,
                };
                let shape_ok = |m: &Vec<Vec<f64>>| m.len() == d && m.iter().all(|r| r.len() == d);
                if !shape_ok(re) || im.as_ref().is_some_and(|m| !shape_ok(m)) {
                    return Err(invalid("initial_state", format!("explicit matrix must be {d}×{d}")));
                }
            }
            Some(state) => {
                let (p, q) = state.pair().expect("pair state");
                check_site(p)?;
                check_site(q)?;
            }
        }
        let two = self.initial_state.as_ref().is_some_and(InitialState::is_two_particle);
        match self.mode {
            Mode::Single | Mode::OracleSingle if two => {
                return Err(invalid("initial_state", "single-particle modes need a site or site-basis state"));
            }
            Mode::Two | Mode::OracleTwo if !two => {
                return Err(invalid("initial_state", "two-particle modes need a pair or ordered-pair state"));
            }
            Mode::OracleSingle | Mode::OracleTwo
                if matches!(self.initial_state, Some(InitialState::Explicit { .. })) =>
            {
                return Err(invalid("initial_state", "oracle modes take named states, not explicit matrices"));
            }
            Mode::Analyze if self.initial_state.as_ref().is_some_and(|s| s.pair().is_none()) => {
                return Err(invalid("initial_state", "analyze takes a pair state to pick the sites"));
            }
            _ => {}
        }
        Ok(())
    }
}

/// Applies `dot.path=value` to a JSON document. Values parse as JSON and
/// fall back to plain strings.
pub fn apply_override(doc: &mut Value, spec: &str) -> Result<(), ConfigError> {
    let (path, raw) = spec.split_once('=').ok_or_else(|| ConfigError::Override(spec.to_string()))?;
    if path.is_empty() {
        return Err(ConfigError::Override(spec.to_string()));
    }
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = doc;
    let keys: Vec<&str> = path.split('.').collect();
    for (i, key) in keys.iter().enumerate() {
        let last = i + 1 == keys.len();
        if node.is_null() {
            *node = Value::Object(Default::default());
        }
        node = match node {
            Value::Object(map) => {
                if last {
                    map.insert(key.to_string(), value);
                    return Ok(());
                }
                map.entry(key.to_string()).or_insert(Value::Null)
            }
            Value::Array(items) => {
                let idx: usize = key.parse().map_err(|_| ConfigError::Override(spec.to_string()))?;
                let slot = items.get_mut(idx).ok_or_else(|| ConfigError::Override(spec.to_string()))?;
                if last {
                    *slot = value;
                    return Ok(());
                }
                slot
            }
            _ => return Err(ConfigError::Override(spec.to_string())),
        };
    }
    Ok(())
}
