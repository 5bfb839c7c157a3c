//! Run configuration: a versioned TOML document. Unknown keys are rejected
//! and every random stream needs an explicit seed.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub schema_version: u32,
    pub graph: GraphConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disorder: Option<DisorderConfig>,
    pub protocol: ProtocolConfig,
    #[serde(default)]
    pub initial: InitialConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default)]
    pub krylov: KrylovConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Either a generated graph (`sites`, `seed`, radii) or a graph file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sites: Option<usize>,
    #[serde(default = "default_r_min")]
    pub r_min: f64,
    #[serde(default = "default_r_max")]
    pub r_max: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Graph file written by `pdtc graph`; relative paths resolve against
    /// the working directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
    #[serde(default = "default_field_axis")]
    pub field_axis: [f64; 3],
}

/// On-site fields `c_j ~ N(mean_factor·b̄, sigma_factor·b̄)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisorderConfig {
    #[serde(default = "one")]
    pub mean_factor: f64,
    #[serde(default = "ten")]
    pub sigma_factor: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolConfig {
    /// Fast pulse angle in units of π.
    pub theta_pi: f64,
    /// Slow kick angle in units of π.
    pub gamma_pi: f64,
    /// Fast period in units of 1/J (J from the free-decay estimate).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_j: Option<f64>,
    /// Fast period in the reduced time unit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    pub fast_pulses: usize,
    pub cycles: usize,
    #[serde(default = "default_slow_axis")]
    pub slow_axis: String,
    #[serde(default)]
    pub noise_fraction: f64,
    pub noise_seed: u64,
    #[serde(default = "default_measure")]
    pub measure: String,
    #[serde(default = "default_hamiltonian")]
    pub hamiltonian: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    /// `polarized`, `evolved` or `cat`.
    #[serde(default = "default_initial_kind")]
    pub kind: String,
    /// For `polarized`: one of `+x -x +y -y +z -z`.
    #[serde(default = "default_direction")]
    pub direction: String,
    /// For `evolved`: preparation time in units of 1/J.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_d_j: Option<f64>,
    /// For `cat`: relative sign of the two branches.
    #[serde(default = "yes")]
    pub plus: bool,
}

impl Default for InitialConfig {
    fn default() -> Self {
        Self { kind: default_initial_kind(), direction: default_direction(), t_d_j: None, plus: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeConfig {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl RangeConfig {
    pub fn values(&self) -> Vec<f64> {
        match self.count {
            0 => Vec::new(),
            1 => vec![self.start],
            n => (0..n).map(|i| self.start + (self.stop - self.start) * i as f64 / (n - 1) as f64).collect(),
        }
    }
}

/// Sweep axes; each absent axis takes the single value from `[protocol]`.
/// Cells are the Cartesian product, γ varying fastest.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_pi: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_pi_range: Option<RangeConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_pi: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fast_pulses: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_j: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_seeds: Option<Vec<u64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    /// `absolute` or `none`.
    #[serde(default = "default_rectify")]
    pub rectify: String,
    /// Kick angles (units of π) around which `Γ = g/N·ε^λ + Γ_min` is fitted.
    #[serde(default = "default_fit_centers")]
    pub fit_centers_pi: Vec<f64>,
    /// Largest |ε| (units of π) included in a fit.
    #[serde(default = "default_fit_window")]
    pub fit_window_pi: f64,
    #[serde(default = "default_rigidity_threshold")]
    pub rigidity_threshold: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            threshold: default_threshold(),
            rectify: default_rectify(),
            fit_centers_pi: default_fit_centers(),
            fit_window_pi: default_fit_window(),
            rigidity_threshold: default_rigidity_threshold(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KrylovConfig {
    #[serde(default = "default_krylov_tol")]
    pub tol: f64,
    #[serde(default = "default_krylov_dim")]
    pub max_dim: usize,
}

impl Default for KrylovConfig {
    fn default() -> Self {
        Self { tol: default_krylov_tol(), max_dim: default_krylov_dim() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    #[serde(default = "one_usize")]
    pub workers: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: None, workers: 1 }
    }
}

fn default_r_min() -> f64 {
    0.7
}
fn default_r_max() -> f64 {
    0.8
}
fn default_field_axis() -> [f64; 3] {
    [0.0, 0.0, 1.0]
}
fn one() -> f64 {
    1.0
}
fn ten() -> f64 {
    10.0
}
fn one_usize() -> usize {
    1
}
fn yes() -> bool {
    true
}
fn default_slow_axis() -> String {
    "z".into()
}
fn default_measure() -> String {
    "fast_kick".into()
}
fn default_hamiltonian() -> String {
    "full".into()
}
fn default_initial_kind() -> String {
    "polarized".into()
}
fn default_direction() -> String {
    "+x".into()
}
fn default_threshold() -> f64 {
    pdtc::analysis::default_threshold()
}
fn default_rectify() -> String {
    "absolute".into()
}
fn default_fit_centers() -> Vec<f64> {
    vec![0.0, 1.0]
}
fn default_fit_window() -> f64 {
    0.3
}
fn default_rigidity_threshold() -> f64 {
    0.2
}
fn default_krylov_tol() -> f64 {
    1e-10
}
fn default_krylov_dim() -> usize {
    64
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let config: Config = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Replaces every seed with one derived from `seed`.
    pub fn override_seeds(&mut self, seed: u64) {
        if self.graph.file.is_none() {
            self.graph.seed = Some(seed);
        }
        if let Some(d) = &mut self.disorder {
            d.seed = seed.wrapping_add(1);
        }
        self.protocol.noise_seed = seed.wrapping_add(2);
        self.sweep.noise_seeds = None;
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if self.schema_version != SCHEMA_VERSION {
            return bad(format!("unsupported schema_version {} (expected {SCHEMA_VERSION})", self.schema_version));
        }
        match (&self.graph.file, self.graph.sites, self.graph.seed) {
            (Some(_), None, None) => {}
            (Some(_), _, _) => return bad("graph.file excludes graph.sites and graph.seed".into()),
            (None, Some(_), Some(_)) => {}
            (None, None, _) => return bad("graph.sites is required unless graph.file is given".into()),
            (None, Some(_), None) => return bad("graph.seed is required".into()),
        }
        let p = &self.protocol;
        if p.tau.is_some() == p.tau_j.is_some() {
            return bad("give exactly one of protocol.tau and protocol.tau_j".into());
        }
        if self.sweep.tau_j.is_some() && p.tau.is_some() {
            return bad("sweep.tau_j needs protocol.tau_j".into());
        }
        if self.sweep.gamma_pi.is_some() && self.sweep.gamma_pi_range.is_some() {
            return bad("give at most one of sweep.gamma_pi and sweep.gamma_pi_range".into());
        }
        if pdtc::operators::SlowAxis::from_name(&p.slow_axis).is_none() {
            return bad(format!("protocol.slow_axis must be y or z, got {:?}", p.slow_axis));
        }
        if pdtc::engine::MeasureSchedule::from_name(&p.measure).is_none() {
            return bad(format!("protocol.measure must be fast_kick or floquet_cycle, got {:?}", p.measure));
        }
        if pdtc::engine::HamiltonianChoice::from_name(&p.hamiltonian).is_none() {
            return bad(format!("protocol.hamiltonian must be full or idealized, got {:?}", p.hamiltonian));
        }
        match self.initial.kind.as_str() {
            "polarized" => {
                if pdtc::engine::Direction::from_name(&self.initial.direction).is_none() {
                    return bad(format!("unknown initial.direction {:?}", self.initial.direction));
                }
            }
            "evolved" => {
                if self.initial.t_d_j.is_none() {
                    return bad("initial.kind = evolved needs initial.t_d_j".into());
                }
            }
            "cat" => {}
            other => return bad(format!("initial.kind must be polarized, evolved or cat, got {other:?}")),
        }
        if !matches!(self.analysis.rectify.as_str(), "absolute" | "none") {
            return bad(format!("analysis.rectify must be absolute or none, got {:?}", self.analysis.rectify));
        }
        if self.output.workers == 0 {
            return bad("output.workers must be at least 1".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
schema_version = 1
[graph]
sites = 4
seed = 7
[protocol]
theta_pi = 0.5
gamma_pi = 1.0
tau_j = 0.07
fast_pulses = 8
cycles = 10
noise_seed = 1
"#;

    #[test]
    fn minimal_config_fills_defaults() {
        let c = Config::parse(MINIMAL).unwrap();
        assert_eq!(c.graph.r_min, 0.7);
        assert_eq!(c.protocol.slow_axis, "z");
        assert_eq!(c.initial.kind, "polarized");
        assert_eq!(c.output.workers, 1);
        assert!(c.disorder.is_none());
    }

    #[test]
    fn echo_round_trips() {
        let c = Config::parse(MINIMAL).unwrap();
        assert_eq!(Config::parse(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = MINIMAL.replace("cycles = 10", "cycles = 10\nflux = 3");
        assert!(matches!(Config::parse(&text), Err(CliError::Config(_))));
    }

    #[test]
    fn seeds_are_mandatory() {
        assert!(Config::parse(&MINIMAL.replace("noise_seed = 1\n", "")).is_err());
        assert!(Config::parse(&MINIMAL.replace("seed = 7\n", "")).is_err());
        let with_disorder = format!("{MINIMAL}[disorder]\nsigma_factor = 10.0\n");
        assert!(Config::parse(&with_disorder).is_err());
    }

    #[test]
    fn bad_values_rejected() {
        assert!(Config::parse(&MINIMAL.replace("schema_version = 1", "schema_version = 2")).is_err());
        assert!(Config::parse(&MINIMAL.replace("tau_j = 0.07", "tau_j = 0.07\ntau = 0.1")).is_err());
        assert!(Config::parse(&format!("{MINIMAL}[analysis]\nrectify = \"maybe\"\n")).is_err());
    }

    #[test]
    fn seed_override_touches_every_seed() {
        let mut c = Config::parse(&format!("{MINIMAL}[disorder]\nseed = 3\n[sweep]\nnoise_seeds = [4, 5]\n")).unwrap();
        c.override_seeds(100);
        assert_eq!(c.graph.seed, Some(100));
        assert_eq!(c.disorder.as_ref().unwrap().seed, 101);
        assert_eq!(c.protocol.noise_seed, 102);
        assert!(c.sweep.noise_seeds.is_none());
    }

    #[test]
    fn ranges() {
        let r = RangeConfig { start: -1.0, stop: 1.0, count: 5 };
        assert_eq!(r.values(), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
    }
}
