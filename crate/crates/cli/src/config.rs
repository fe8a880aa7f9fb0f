//! Run configuration: TOML file, then flag overrides, then validation.

use std::path::Path;

use clap::ValueEnum;
use sdt_core::expsim::{CountMode, NoiseModel};
use sdt_core::infogeo::MIN_REGION_SAMPLES;
use sdt_core::protocols::{ExperimentalPhase, REFERENCE_TARGETS};
use sdt_core::tomography::Likelihood;
use serde::{Deserialize, Serialize};

use crate::UsageError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    /// Phases φ₁, φ₂, φ₃ of levels 1..3 relative to level 0.
    #[default]
    Canonical,
    /// The interferometer phases φ_a, φ_b, φ_c.
    Experimental,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum CountsKind {
    #[default]
    Sampled,
    Analytic,
}

impl From<CountsKind> for CountMode {
    fn from(k: CountsKind) -> Self {
        match k {
            CountsKind::Sampled => CountMode::Sampled,
            CountsKind::Analytic => CountMode::Analytic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum LikelihoodKind {
    #[default]
    Gaussian,
    Binomial,
}

impl From<LikelihoodKind> for Likelihood {
    fn from(k: LikelihoodKind) -> Self {
        match k {
            LikelihoodKind::Gaussian => Likelihood::Gaussian,
            LikelihoodKind::Binomial => Likelihood::Binomial,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum BoundsTable {
    #[default]
    Fidelity,
    Volume,
    Packing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum PhaseName {
    #[default]
    A,
    B,
    C,
}

impl From<PhaseName> for ExperimentalPhase {
    fn from(p: PhaseName) -> Self {
        match p {
            PhaseName::A => ExperimentalPhase::A,
            PhaseName::B => ExperimentalPhase::B,
            PhaseName::C => ExperimentalPhase::C,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    pub crosstalk_a: f64,
    pub crosstalk_b: f64,
    pub depolarizing: f64,
}

impl NoiseConfig {
    pub fn model(&self) -> NoiseModel {
        NoiseModel {
            crosstalk_alice: self.crosstalk_a,
            crosstalk_bob: self.crosstalk_b,
            depolarizing: self.depolarizing,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Target {
    pub label: String,
    pub phases_deg: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    pub shots: u64,
    pub counts: CountsKind,
    pub likelihood: LikelihoodKind,
    pub convention: Convention,
    pub targets: Vec<Target>,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            shots: 10_000,
            counts: CountsKind::Sampled,
            likelihood: LikelihoodKind::Gaussian,
            convention: Convention::Canonical,
            targets: REFERENCE_TARGETS
                .iter()
                .map(|(l, p)| Target {
                    label: l.to_string(),
                    phases_deg: *p,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TomoConfig {
    pub likelihood: LikelihoodKind,
    /// Parametric bootstrap resamples for phase error bars; 0 disables.
    pub bootstrap: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundsConfig {
    pub table: BoundsTable,
    /// Dimensions for the fidelity table.
    pub d: Vec<usize>,
    /// Monte Carlo samples per dimension; 0 skips the estimate.
    pub samples: usize,
    /// Odd torus dimensions for the volume table.
    pub volume_n: Vec<usize>,
    /// Parameter counts for the packing table.
    pub packing_n: Vec<usize>,
    pub c: f64,
}

impl Default for BoundsConfig {
    fn default() -> Self {
        Self {
            table: BoundsTable::Fidelity,
            d: vec![1, 2, 3, 4, 5, 8],
            samples: 100_000,
            volume_n: (3..=41).step_by(2).collect(),
            packing_n: vec![1, 10, 100, 1000],
            c: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FringesConfig {
    pub vary: PhaseName,
    /// Fixed experimental phases (φ_a, φ_b, φ_c) in degrees.
    pub base_deg: [f64; 3],
    pub step_deg: f64,
}

impl Default for FringesConfig {
    fn default() -> Self {
        Self {
            vary: PhaseName::A,
            base_deg: [0.0; 3],
            step_deg: 5.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegionConfig {
    pub dim: usize,
    pub samples: usize,
    pub resolution: usize,
}

impl Default for RegionConfig {
    fn default() -> Self {
        Self {
            dim: 3,
            samples: 1_000_000,
            resolution: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResourcesConfig {
    pub n: Vec<usize>,
}

impl Default for ResourcesConfig {
    fn default() -> Self {
        Self { n: vec![2, 3, 4, 6] }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub seed: Option<u64>,
    pub format: Format,
    pub noise: NoiseConfig,
    pub simulate: SimulateConfig,
    pub tomo: TomoConfig,
    pub bounds: BoundsConfig,
    pub fringes: FringesConfig,
    pub region: RegionConfig,
    pub resources: ResourcesConfig,
}

fn bad(field: &str, msg: impl std::fmt::Display) -> UsageError {
    UsageError(format!("{field}: {msg}"))
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, UsageError> {
        let text = std::fs::read_to_string(path).map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| UsageError(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable")
    }

    pub fn validate(&self) -> Result<(), UsageError> {
        for (field, v) in [
            ("noise.crosstalk_a", self.noise.crosstalk_a),
            ("noise.crosstalk_b", self.noise.crosstalk_b),
            ("noise.depolarizing", self.noise.depolarizing),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(bad(field, format!("{v} is outside [0, 1]")));
            }
        }
        if self.simulate.shots == 0 {
            return Err(bad("simulate.shots", "must be at least 1"));
        }
        if self.simulate.targets.is_empty() {
            return Err(bad("simulate.targets", "no targets given"));
        }
        for (i, t) in self.simulate.targets.iter().enumerate() {
            if t.phases_deg.iter().any(|x| !x.is_finite()) {
                return Err(bad(
                    &format!("simulate.targets[{i}].phases_deg"),
                    "phases must be finite",
                ));
            }
        }
        if self.bounds.d.contains(&0) {
            return Err(bad("bounds.d", "dimensions start at 1"));
        }
        if let Some(n) = self.bounds.volume_n.iter().find(|&&n| n < 3 || n % 2 == 0) {
            return Err(bad("bounds.volume_n", format!("{n} is not odd and at least 3")));
        }
        if self.bounds.packing_n.contains(&0) {
            return Err(bad("bounds.packing_n", "parameter counts start at 1"));
        }
        if !(self.bounds.c > 0.0 && self.bounds.c.is_finite()) {
            return Err(bad("bounds.c", format!("{} is not a positive number", self.bounds.c)));
        }
        if self.fringes.base_deg.iter().any(|x| !x.is_finite()) {
            return Err(bad("fringes.base_deg", "phases must be finite"));
        }
        if !(self.fringes.step_deg > 0.0 && self.fringes.step_deg <= 360.0) {
            return Err(bad(
                "fringes.step_deg",
                format!("{} is outside (0, 360]", self.fringes.step_deg),
            ));
        }
        if !matches!(self.region.dim, 2 | 3) {
            return Err(bad("region.dim", format!("{} is not 2 or 3", self.region.dim)));
        }
        if self.region.samples < MIN_REGION_SAMPLES {
            return Err(bad("region.samples", format!("need at least {MIN_REGION_SAMPLES}")));
        }
        if self.region.resolution == 0 {
            return Err(bad("region.resolution", "must be at least 1"));
        }
        if self.resources.n.contains(&0) {
            return Err(bad("resources.n", "parameter counts start at 1"));
        }
        Ok(())
    }
}
