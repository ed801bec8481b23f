//! Scenario configuration: one JSON document describing an experiment.
//!
//! Every field has a default, and [`Scenario::to_json`] writes all of them
//! out, so a saved scenario reproduces a run without hidden settings.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::access::{load_targets, ConstraintSet, ImageTarget};
use crate::astro::constants::R_EARTH_EQ;
use crate::astro::{Epoch, GeodeticPoint, StateVector};
use crate::dynamics::{ForceModelConfig, SpacecraftParams};
use crate::error::{Error, Result};
use crate::planners::MAX_DEPTH;
use crate::uncertainty::{OrbitCovariance, PropagationSetup};

/// Lookahead window `h` of the forward-search action space (s).
pub const DEFAULT_LOOKAHEAD_S: f64 = 120.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlannerKind {
    Graph,
    Mdp,
    Milp,
}

impl PlannerKind {
    pub const ALL: [PlannerKind; 3] = [PlannerKind::Graph, PlannerKind::Mdp, PlannerKind::Milp];

    pub fn as_str(&self) -> &'static str {
        match self {
            PlannerKind::Graph => "graph",
            PlannerKind::Mdp => "mdp",
            PlannerKind::Milp => "milp",
        }
    }

    /// Parses a comma-separated list such as `graph,mdp`. Duplicates are
    /// dropped and the result is in canonical order.
    pub fn parse_list(text: &str) -> Result<Vec<PlannerKind>> {
        let mut out = Vec::new();
        for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            out.push(part.parse()?);
        }
        if out.is_empty() {
            return Err(Error::Config("empty planner list".into()));
        }
        out.sort();
        out.dedup();
        Ok(out)
    }
}

impl fmt::Display for PlannerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PlannerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "graph" => Ok(PlannerKind::Graph),
            "mdp" => Ok(PlannerKind::Mdp),
            "milp" => Ok(PlannerKind::Milp),
            other => Err(Error::Config(format!("unknown planner {other:?} (expected graph, mdp or milp)"))),
        }
    }
}

/// Initial orbit as classical elements. The semi-major axis is the
/// equatorial radius plus `altitude_m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OrbitSpec {
    pub altitude_m: f64,
    pub inclination_deg: f64,
    pub raan_deg: f64,
    pub eccentricity: f64,
    pub arg_perigee_deg: f64,
    pub true_anomaly_deg: f64,
}

impl Default for OrbitSpec {
    fn default() -> Self {
        Self {
            altitude_m: 550.0e3,
            inclination_deg: 90.0,
            raan_deg: 0.0,
            eccentricity: 0.0,
            arg_perigee_deg: 0.0,
            true_anomaly_deg: 0.0,
        }
    }
}

impl OrbitSpec {
    pub const MIN_ALTITUDE_M: f64 = 200.0e3;
    pub const MAX_ALTITUDE_M: f64 = 2000.0e3;

    pub fn validate(&self) -> Result<()> {
        if !(Self::MIN_ALTITUDE_M..=Self::MAX_ALTITUDE_M).contains(&self.altitude_m) {
            return Err(Error::Config(format!(
                "altitude {} m outside [{}, {}] m",
                self.altitude_m,
                Self::MIN_ALTITUDE_M,
                Self::MAX_ALTITUDE_M
            )));
        }
        if !(0.0..1.0).contains(&self.eccentricity) {
            return Err(Error::Config(format!("eccentricity {} outside [0, 1)", self.eccentricity)));
        }
        let perigee = (R_EARTH_EQ + self.altitude_m) * (1.0 - self.eccentricity) - R_EARTH_EQ;
        if perigee < Self::MIN_ALTITUDE_M {
            return Err(Error::Config(format!("perigee altitude {perigee:.0} m below {} m", Self::MIN_ALTITUDE_M)));
        }
        let angles = [self.inclination_deg, self.raan_deg, self.arg_perigee_deg, self.true_anomaly_deg];
        if angles.iter().any(|a| !a.is_finite()) {
            return Err(Error::Config("orbit angles must be finite".into()));
        }
        Ok(())
    }

    pub fn state_at(&self, epoch: Epoch) -> StateVector {
        StateVector::from_keplerian(
            epoch,
            R_EARTH_EQ + self.altitude_m,
            self.eccentricity,
            self.inclination_deg.to_radians(),
            self.raan_deg.to_radians(),
            self.arg_perigee_deg.to_radians(),
            self.true_anomaly_deg.to_radians(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum TargetSource {
    /// JSON target list (see [`crate::access::read_targets_json`]).
    File { path: PathBuf },
    /// Uniform random points on the sphere, see [`generate_targets`].
    Generate { count: usize, seed: u64 },
}

impl Default for TargetSource {
    fn default() -> Self {
        TargetSource::Generate { count: 600, seed: 1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UncertaintyConfig {
    pub sigma_pos_m: f64,
    /// Ensemble size behind the collect probabilities and window statistics.
    pub planning_samples: usize,
    pub seed: u64,
}

impl Default for UncertaintyConfig {
    fn default() -> Self {
        Self {
            sigma_pos_m: 1000.0,
            planning_samples: 10,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerConfig {
    pub enabled: Vec<PlannerKind>,
    /// Forward-search depth.
    pub depth: usize,
    pub lookahead_s: f64,
    pub max_slew_rate_deg_s: f64,
    pub milp_time_limit_s: f64,
    /// Discount factor. Only 1 is supported.
    pub gamma: f64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            enabled: PlannerKind::ALL.to_vec(),
            depth: 2,
            lookahead_s: DEFAULT_LOOKAHEAD_S,
            max_slew_rate_deg_s: 1.0,
            milp_time_limit_s: 60.0,
            gamma: 1.0,
        }
    }
}

impl PlannerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.enabled.is_empty() {
            return Err(Error::Config("no planners enabled".into()));
        }
        if !(1..=MAX_DEPTH).contains(&self.depth) {
            return Err(Error::Config(format!("search depth {} outside 1..={MAX_DEPTH}", self.depth)));
        }
        if !(self.milp_time_limit_s >= 0.0) {
            return Err(Error::Config(format!("MILP time limit {} must be non-negative", self.milp_time_limit_s)));
        }
        if self.gamma != 1.0 {
            return Err(Error::Config(format!("discount factor {} not supported (use 1)", self.gamma)));
        }
        self.constraint_set().map(|_| ())
    }

    pub fn constraint_set(&self) -> Result<ConstraintSet> {
        ConstraintSet::standard(self.max_slew_rate_deg_s.to_radians(), self.lookahead_s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluationConfig {
    pub samples: usize,
    pub seed: u64,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        Self { samples: 100, seed: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub start_epoch: Epoch,
    pub duration_s: f64,
    pub step_s: f64,
    pub orbit: OrbitSpec,
    pub spacecraft: SpacecraftParams,
    pub force_model: ForceModelConfig,
    pub targets: TargetSource,
    pub uncertainty: UncertaintyConfig,
    pub planners: PlannerConfig,
    pub evaluation: EvaluationConfig,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            name: "scenario".into(),
            start_epoch: Epoch::from_calendar(2026, 3, 20, 0, 0, 0.0).expect("valid calendar date"),
            duration_s: 86_400.0,
            step_s: 10.0,
            orbit: OrbitSpec::default(),
            spacecraft: SpacecraftParams::default(),
            force_model: ForceModelConfig::default(),
            targets: TargetSource::default(),
            uncertainty: UncertaintyConfig::default(),
            planners: PlannerConfig::default(),
            evaluation: EvaluationConfig::default(),
        }
    }
}

impl Scenario {
    /// Parses and validates a scenario. Relative target paths are resolved
    /// against `base_dir`.
    pub fn from_json_str(text: &str, base_dir: &Path) -> Result<Self> {
        let mut s: Scenario = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if let TargetSource::File { path } = &mut s.targets {
            if path.is_relative() {
                *path = base_dir.join(&*path);
            }
        }
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration_s > 0.0) || !self.duration_s.is_finite() {
            return Err(Error::Config(format!("duration {} must be positive", self.duration_s)));
        }
        if !(self.step_s > 0.0) || self.step_s > self.duration_s {
            return Err(Error::Config(format!("step {} must be in (0, duration]", self.step_s)));
        }
        self.orbit.validate()?;
        self.spacecraft.validate()?;
        self.force_model.validate()?;
        match &self.targets {
            TargetSource::File { path } if !path.is_file() => {
                return Err(Error::Config(format!("target file {} does not exist", path.display())));
            }
            TargetSource::Generate { count: 0, .. } => {
                return Err(Error::Config("target count must be at least 1".into()));
            }
            _ => {}
        }
        self.planning_covariance()?;
        self.evaluation_covariance()?;
        self.planners.validate()
    }

    /// Pretty JSON with every field present.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Hex SHA-256 of the compact JSON form.
    pub fn config_sha256(&self) -> Result<String> {
        let digest = Sha256::digest(serde_json::to_vec(self)?);
        Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
    }

    pub fn nominal_state(&self) -> StateVector {
        self.orbit.state_at(self.start_epoch)
    }

    pub fn propagation_setup(&self) -> PropagationSetup {
        PropagationSetup {
            spacecraft: self.spacecraft,
            force_model: self.force_model,
            duration: self.duration_s,
            step: self.step_s,
        }
    }

    pub fn planning_covariance(&self) -> Result<OrbitCovariance> {
        OrbitCovariance::new(
            self.uncertainty.sigma_pos_m,
            self.uncertainty.planning_samples,
            self.uncertainty.seed,
        )
    }

    pub fn evaluation_covariance(&self) -> Result<OrbitCovariance> {
        OrbitCovariance::new(self.uncertainty.sigma_pos_m, self.evaluation.samples, self.evaluation.seed)
    }

    pub fn build_targets(&self) -> Result<Vec<ImageTarget>> {
        match &self.targets {
            TargetSource::File { path } => load_targets(path),
            TargetSource::Generate { count, seed } => generate_targets(*count, *seed),
        }
    }
}

/// `count` targets uniform on the sphere (`lat = asin(u)`, `u` and the
/// longitude uniform), at zero altitude with reward 1 and default look
/// angle and collect duration. Deterministic in `seed`.
pub fn generate_targets(count: usize, seed: u64) -> Result<Vec<ImageTarget>> {
    if count == 0 {
        return Err(Error::Config("target count must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|id| {
            let u: f64 = rng.random_range(-1.0..=1.0);
            let lon: f64 = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
            Ok(ImageTarget::with_defaults(id, GeodeticPoint::new(u.asin(), lon, 0.0)?))
        })
        .collect()
}
