use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::blockcore::{Coef, LatticeState, C64};
use crate::dynamics::FlowConfig;

/// Configuration error with the JSON path of the offending key.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("config error at `{path}`: {reason}")]
pub struct ConfigError {
    pub path: String,
    pub reason: String,
}

impl ConfigError {
    fn new(path: impl Into<String>, reason: impl Into<String>) -> Self {
        ConfigError { path: path.into(), reason: reason.into() }
    }
}

/// A complex number written either as a bare real or as `[re, im]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexValue {
    Real(f64),
    Pair([f64; 2]),
}

impl From<ComplexValue> for C64 {
    fn from(v: ComplexValue) -> C64 {
        match v {
            ComplexValue::Real(x) => C64::new(x, 0.0),
            ComplexValue::Pair([re, im]) => C64::new(re, im),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PresetName {
    Zero,
    Stationary,
    InteriorBump,
    RandomSeeded,
}

/// Parameters of a named preset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresetSpec {
    pub preset: PresetName,
    /// Required for `random-seeded`.
    #[serde(default)]
    pub seed: Option<u64>,
    /// Bound on `|a_n|, |b_n|, |c_n|` and upper end of `d_n`.
    #[serde(default)]
    pub amplitude: Option<f64>,
    /// Lower end of `d_n`.
    #[serde(default)]
    pub d_min: Option<f64>,
    /// Only the first `support_blocks` block rows carry data; the rest are zero.
    #[serde(default)]
    pub support_blocks: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Coefficients {
    #[serde(default)]
    pub a: Vec<ComplexValue>,
    #[serde(default)]
    pub b: Vec<ComplexValue>,
    #[serde(default)]
    pub c: Vec<ComplexValue>,
    #[serde(default)]
    pub d: Vec<ComplexValue>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Initial {
    Named(PresetName),
    Preset(PresetSpec),
    Explicit { coefficients: Coefficients },
}

/// Contour settings; the radius defaults to twice the norm bound of the initial operator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContourConfig {
    pub radius: Option<f64>,
    pub nodes: usize,
    pub center: [f64; 2],
}

impl Default for ContourConfig {
    fn default() -> Self {
        ContourConfig { radius: None, nodes: 256, center: [0.0, 0.0] }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Plotdata,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_formats() -> Vec<Format> {
    vec![Format::Csv, Format::Json]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub initial: Initial,
    pub truncation: usize,
    #[serde(default)]
    pub flow: FlowConfig,
    #[serde(default)]
    pub contour: ContourConfig,
    /// Sample points for resolvent output; empty means an 8-point circle at the contour radius.
    #[serde(default)]
    pub z_samples: Vec<ComplexValue>,
    /// Highest block order reconstructed by `reconstruct`.
    #[serde(default = "default_m_max")]
    pub m_max: usize,
    /// Highest block moment written by `moments`; defaults to `2N`.
    #[serde(default)]
    pub moments: Option<usize>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
}

fn default_m_max() -> usize {
    3
}

/// Parse and validate a JSON config; unknown keys are rejected with their path.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        ConfigError::new(path, e.into_inner().to_string())
    })?;
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    /// Minimal config: the given initial data with every default.
    pub fn new(initial: Initial, truncation: usize) -> RunConfig {
        RunConfig {
            initial,
            truncation,
            flow: FlowConfig::default(),
            contour: ContourConfig::default(),
            z_samples: Vec::new(),
            m_max: default_m_max(),
            moments: None,
            output_dir: default_output_dir(),
            formats: default_formats(),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.truncation == 0 {
            return Err(ConfigError::new("truncation", "must be at least 1"));
        }
        self.flow.validate().map_err(|e| ConfigError::new("flow", e.to_string()))?;
        if let Some(r) = self.contour.radius {
            if !(r > 0.0 && r.is_finite()) {
                return Err(ConfigError::new("contour.radius", "must be positive"));
            }
        }
        if self.contour.nodes < 64 || !self.contour.nodes.is_multiple_of(2) {
            return Err(ConfigError::new("contour.nodes", "must be even and at least 64"));
        }
        self.initial_state().map(|_| ())
    }

    pub fn z_points(&self) -> Vec<C64> {
        self.z_samples.iter().map(|&z| z.into()).collect()
    }

    /// Expand the initial data into a lattice state of truncation `N`.
    pub fn initial_state(&self) -> Result<LatticeState, ConfigError> {
        let n = self.truncation;
        match &self.initial {
            Initial::Named(PresetName::RandomSeeded) => {
                Err(ConfigError::new("initial", "preset random-seeded needs a seed: use {\"preset\": \"random-seeded\", \"seed\": ...}"))
            }
            Initial::Named(name) => expand(&PresetSpec {
                preset: *name,
                seed: None,
                amplitude: None,
                d_min: None,
                support_blocks: None,
            }, n),
            Initial::Preset(spec) => expand(spec, n),
            Initial::Explicit { coefficients: c } => {
                let conv = |v: &[ComplexValue]| v.iter().map(|&z| C64::from(z)).collect::<Vec<_>>();
                LatticeState::from_sequences(n, &conv(&c.a), &conv(&c.b), &conv(&c.c), &conv(&c.d))
                    .map_err(|e| ConfigError::new("initial.coefficients", e.to_string()))
            }
        }
    }
}

fn expand(spec: &PresetSpec, n: usize) -> Result<LatticeState, ConfigError> {
    let unused = |field: &str, present: bool| {
        if present {
            Err(ConfigError::new(format!("initial.{field}"), format!("not used by preset {:?}", spec.preset)))
        } else {
            Ok(())
        }
    };
    if spec.preset != PresetName::RandomSeeded {
        unused("seed", spec.seed.is_some())?;
        unused("amplitude", spec.amplitude.is_some())?;
        unused("d_min", spec.d_min.is_some())?;
        unused("support_blocks", spec.support_blocks.is_some())?;
    }
    let mut s = LatticeState::zeros(n);
    match spec.preset {
        PresetName::Zero => {}
        PresetName::Stationary => {
            for k in 1..=s.seq(Coef::B).len() {
                s.set(Coef::B, k, C64::new(k as f64, 0.0)).expect("index in range");
            }
        }
        PresetName::InteriorBump => {
            if Coef::D.len_for(n) < 5 {
                return Err(ConfigError::new("truncation", "interior-bump needs N >= 4 to hold d_5"));
            }
            s.set(Coef::D, 5, C64::new(0.5, 0.0)).expect("index in range");
            s.set(Coef::B, 6, C64::new(0.2, 0.0)).expect("index in range");
        }
        PresetName::RandomSeeded => {
            let seed = spec.seed.ok_or_else(|| ConfigError::new("initial.seed", "required for random-seeded"))?;
            let amp = spec.amplitude.unwrap_or(1.0);
            let d_min = spec.d_min.unwrap_or(0.1);
            let support = spec.support_blocks.unwrap_or(n);
            if !(amp >= 0.0 && amp.is_finite()) {
                return Err(ConfigError::new("initial.amplitude", "must be finite and nonnegative"));
            }
            if !(d_min >= 0.0 && d_min <= amp) {
                return Err(ConfigError::new("initial.d_min", "must lie in [0, amplitude]"));
            }
            if support > n {
                return Err(ConfigError::new("initial.support_blocks", "exceeds the truncation"));
            }
            s = random_lattice(n, seed, amp, d_min, support);
        }
    }
    Ok(s)
}

/// Seeded real lattice: `a, b, c` uniform in `[-amp, amp]`, `d` uniform in
/// `[d_min, amp]`, zeroed outside the first `support` block rows. Every
/// coefficient consumes one draw regardless of support, so the data on the
/// supported rows does not depend on `support`.
pub fn random_lattice(n: usize, seed: u64, amp: f64, d_min: f64, support: usize) -> LatticeState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = LatticeState::zeros(n);
    for coef in Coef::ALL {
        for k in 1..=s.seq(coef).len() {
            let v = if coef == Coef::D { rng.random_range(d_min..=amp) } else { rng.random_range(-amp..=amp) };
            if coef.block_row(k) < support {
                s.set(coef, k, C64::new(v, 0.0)).expect("index in range");
            }
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = parse_config(r#"{"initial": "zero", "truncation": 8}"#).unwrap();
        assert_eq!(cfg.flow.h, 1e-3);
        assert_eq!(cfg.flow.t_end, 0.5);
        assert_eq!(cfg.contour.nodes, 256);
        assert_eq!(cfg.contour.radius, None);
        assert_eq!(cfg.initial_state().unwrap(), LatticeState::zeros(8));
    }

    #[test]
    fn unknown_key_is_named() {
        let err = parse_config(r#"{"initial": "zero", "truncation": 8, "flow": {"stepsize": 1}}"#).unwrap_err();
        assert!(err.path.contains("stepsize") || err.reason.contains("stepsize"), "{err}");
        let err = parse_config(r#"{"initial": "zero", "truncation": 8, "stepsize": 1}"#).unwrap_err();
        assert!(err.to_string().contains("stepsize"), "{err}");
    }

    #[test]
    fn seeded_preset_is_deterministic() {
        let text = r#"{"initial": {"preset": "random-seeded", "seed": 42}, "truncation": 6}"#;
        let a = parse_config(text).unwrap().initial_state().unwrap();
        let b = parse_config(text).unwrap().initial_state().unwrap();
        assert_eq!(a, b);
        assert!(a.seq(Coef::D).iter().all(|d| d.re >= 0.1 && d.re <= 1.0));
    }

    #[test]
    fn seed_is_required() {
        assert!(parse_config(r#"{"initial": "random-seeded", "truncation": 6}"#).is_err());
        assert!(parse_config(r#"{"initial": {"preset": "random-seeded"}, "truncation": 6}"#).is_err());
    }

    #[test]
    fn support_zeroes_trailing_rows() {
        let s = random_lattice(6, 3, 1.0, 0.1, 4);
        let full = random_lattice(6, 3, 1.0, 0.1, 6);
        for coef in Coef::ALL {
            for k in 1..=s.seq(coef).len() {
                let expect = if coef.block_row(k) < 4 { full.get(coef, k as i64) } else { C64::new(0.0, 0.0) };
                assert_eq!(s.get(coef, k as i64), expect);
            }
        }
    }

    #[test]
    fn explicit_coefficients_accept_reals_and_pairs() {
        let text = r#"{"initial": {"coefficients": {"b": [1, [2, 0.5]]}}, "truncation": 2}"#;
        let s = parse_config(text).unwrap().initial_state().unwrap();
        assert_eq!(s.b(2), C64::new(2.0, 0.5));
        let bad = r#"{"initial": {"coefficients": {"b": [1, 2, 3, 4, 5]}}, "truncation": 2}"#;
        assert!(parse_config(bad).is_err());
    }

    #[test]
    fn interior_bump_layout() {
        let s = parse_config(r#"{"initial": "interior-bump", "truncation": 12}"#).unwrap().initial_state().unwrap();
        assert_eq!(s.d(5), C64::new(0.5, 0.0));
        assert_eq!(s.b(6), C64::new(0.2, 0.0));
        assert_eq!(s.max_abs(), 0.5);
    }
}
