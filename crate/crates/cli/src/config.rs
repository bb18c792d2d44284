//! Run configuration: JSON schema, validation and conversion into library types.
//!
//! ```json
//! {
//!   "region": { "x1_left": 0, "x1_right": 4, "x2_bottom": 0, "x2_top": 4,
//!               "cell_width": 2, "cell_height": 2 },
//!   "population": [
//!     { "center": [1.0, 3.0],
//!       "lobes": [ { "amplitude": 100, "offset": 0, "sigma": 0.6 } ],
//!       "support_radius": 4.0 }
//!   ],
//!   "intensity": { "k_mode": "post-thin", "k": 1.0,
//!                  "default_target": 4, "targets": { "3": 9 } },
//!   "process": "matern2",
//!   "radius_formula": "tiling",
//!   "rings": [ { "name": "access", "rank": 0, "processing_delay_ms": 1, "max_bss": 6 } ],
//!   "delay_model": { "kind": "linear", "km_per_ms": 200 },
//!   "rtt_budget_ms": 4, "radio_delay_ms": 1, "candidate_resolution": 4,
//!   "seed": 42, "output_dir": "out",
//!   "quadrature": { "outer": 128, "radial": 32, "angular": 32, "g_grid": 64 },
//!   "validation": { "replications": 10000, "cells": [0] }
//! }
//! ```
//!
//! `k` is only read in `fixed` mode. `default_target` applies to every cell
//! not listed in `targets`; without it only the listed cells get stations.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use serde::Deserialize;

use stochtopo::geometry::{Point2D, Rect, Region};
use stochtopo::intensity::{CalibrationSettings, IntensityField, Lobe, PopulationCircle, RevolutionFunction};
use stochtopo::placement::{CandidateLayout, DelayModel, LatencyBudget, NetworkRing, RingHierarchy};
use stochtopo::process::{GenerationOptions, QuadratureOptions};
use stochtopo::{ProcessKind, RadiusFormula, ScaleMode};

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub file: Option<String>,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let file = self.file.as_deref().unwrap_or("config");
        match self.line {
            Some(l) => write!(f, "{file}, line {l}: {}", self.message),
            None => write!(f, "{file}: {}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RegionConfig {
    pub x1_left: f64,
    pub x1_right: f64,
    pub x2_bottom: f64,
    pub x2_top: f64,
    pub cell_width: f64,
    pub cell_height: f64,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct LobeConfig {
    pub amplitude: f64,
    #[serde(default)]
    pub offset: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CircleConfig {
    pub center: [f64; 2],
    pub lobes: Vec<LobeConfig>,
    #[serde(default)]
    pub support_radius: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum KMode {
    Fixed,
    PreThin,
    PostThin,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct IntensityConfig {
    pub k_mode: KMode,
    #[serde(default)]
    pub k: Option<f64>,
    #[serde(default)]
    pub default_target: Option<u32>,
    #[serde(default)]
    pub targets: BTreeMap<String, u32>,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "lowercase")]
pub enum ProcessName {
    Matern1,
    #[default]
    Matern2,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "lowercase")]
pub enum RadiusName {
    Paper,
    #[default]
    Tiling,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RingConfig {
    pub name: String,
    pub rank: i64,
    pub processing_delay_ms: f64,
    pub max_bss: usize,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DelayConfig {
    Linear { km_per_ms: f64 },
}

impl Default for DelayConfig {
    fn default() -> Self {
        Self::Linear { km_per_ms: 200.0 }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureConfig {
    pub outer: usize,
    pub radial: usize,
    pub angular: usize,
    pub g_grid: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        let q = QuadratureOptions::default();
        Self {
            outer: q.outer,
            radial: q.radial,
            angular: q.angular,
            g_grid: CalibrationSettings::default().g_quadrature,
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ValidationConfig {
    pub replications: usize,
    pub cells: Vec<usize>,
    pub z_threshold: f64,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        Self { replications: 10_000, cells: vec![0], z_threshold: 3.0 }
    }
}

fn default_resolution() -> f64 {
    stochtopo::placement::DEFAULT_CANDIDATES_PER_KM
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub region: RegionConfig,
    #[serde(default)]
    pub population: Vec<CircleConfig>,
    pub intensity: IntensityConfig,
    #[serde(default)]
    pub process: ProcessName,
    #[serde(default)]
    pub radius_formula: RadiusName,
    pub rings: Vec<RingConfig>,
    #[serde(default)]
    pub delay_model: DelayConfig,
    pub rtt_budget_ms: f64,
    #[serde(default)]
    pub radio_delay_ms: f64,
    #[serde(default = "default_resolution")]
    pub candidate_resolution: f64,
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    #[serde(default)]
    pub validation: ValidationConfig,
}

/// Everything a run needs, validated.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub region: Region<f64>,
    pub field: IntensityField<f64>,
    pub targets: BTreeMap<usize, u32>,
    pub generation: GenerationOptions<f64>,
    pub rings: RingHierarchy<f64>,
    pub budget: LatencyBudget<f64>,
    pub layout: CandidateLayout<f64>,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub validation: ValidationConfig,
}

/// Line of the first occurrence of `"key"` in the raw text.
fn line_of(text: &str, key: &str) -> Option<usize> {
    let needle = format!("\"{key}\"");
    text.lines().position(|l| l.contains(&needle)).map(|i| i + 1)
}

struct Checker<'a> {
    text: &'a str,
}

impl Checker<'_> {
    fn fail(&self, key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError { file: None, line: line_of(self.text, key), message: format!("{key}: {}", message.into()) }
    }

    fn positive(&self, key: &str, v: f64) -> Result<f64, ConfigError> {
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(self.fail(key, format!("must be a positive finite number, got {v}")))
        }
    }

    fn non_negative(&self, key: &str, v: f64) -> Result<f64, ConfigError> {
        if v >= 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(self.fail(key, format!("must be a finite number >= 0, got {v}")))
        }
    }

    fn finite(&self, key: &str, v: f64) -> Result<f64, ConfigError> {
        if v.is_finite() {
            Ok(v)
        } else {
            Err(self.fail(key, format!("must be finite, got {v}")))
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError { file: None, line: Some(e.line()), message: e.to_string() })
    }

    /// Checks every field and builds the library objects. `text` is the raw
    /// JSON used to point errors at a line.
    pub fn scenario(&self, text: &str) -> Result<Scenario, ConfigError> {
        let c = Checker { text };
        let r = &self.region;
        for (k, v) in
            [("x1_left", r.x1_left), ("x1_right", r.x1_right), ("x2_bottom", r.x2_bottom), ("x2_top", r.x2_top)]
        {
            c.finite(k, v)?;
        }
        if r.x1_left >= r.x1_right {
            return Err(c.fail("x1_right", "must be greater than x1_left"));
        }
        if r.x2_bottom >= r.x2_top {
            return Err(c.fail("x2_top", "must be greater than x2_bottom"));
        }
        c.positive("cell_width", r.cell_width)?;
        c.positive("cell_height", r.cell_height)?;
        let bounds =
            Rect::new(r.x1_left, r.x1_right, r.x2_bottom, r.x2_top).map_err(|e| c.fail("region", e.to_string()))?;
        let region = Region::new(bounds, r.cell_width, r.cell_height).map_err(|e| c.fail("region", e.to_string()))?;

        let mut circles = Vec::with_capacity(self.population.len());
        for (i, p) in self.population.iter().enumerate() {
            c.finite("center", p.center[0])?;
            c.finite("center", p.center[1])?;
            if p.lobes.is_empty() {
                return Err(c.fail("lobes", format!("population circle {i} needs at least one lobe")));
            }
            let mut lobes = Vec::new();
            for l in &p.lobes {
                c.non_negative("amplitude", l.amplitude)?;
                c.non_negative("offset", l.offset)?;
                c.positive("sigma", l.sigma)?;
                lobes.push(Lobe::new(l.amplitude, l.offset, l.sigma).map_err(|e| c.fail("lobes", e.to_string()))?);
            }
            let rev = RevolutionFunction::new(lobes).map_err(|e| c.fail("lobes", e.to_string()))?;
            let center = Point2D::new(p.center[0], p.center[1]);
            let circle = match p.support_radius {
                Some(s) => {
                    c.positive("support_radius", s)?;
                    PopulationCircle::with_support(center, rev, s)
                        .map_err(|e| c.fail("support_radius", e.to_string()))?
                }
                None => PopulationCircle::new(center, rev),
            };
            circles.push(circle);
        }

        let it = &self.intensity;
        let scale = match it.k_mode {
            KMode::Fixed => {
                let k = it.k.ok_or_else(|| c.fail("k", "required when k_mode is \"fixed\""))?;
                ScaleMode::Fixed(c.non_negative("k", k)?)
            }
            KMode::PreThin => ScaleMode::PreThin,
            KMode::PostThin => ScaleMode::PostThin,
        };
        let field = IntensityField::new(circles, 1.0).map_err(|e| c.fail("population", e.to_string()))?;

        let mut targets = BTreeMap::new();
        if let Some(n) = it.default_target {
            if n < 1 {
                return Err(c.fail("default_target", "must be >= 1"));
            }
            for i in 0..region.cell_count() {
                targets.insert(i, n);
            }
        }
        for (key, &n) in &it.targets {
            let i: usize =
                key.trim().parse().map_err(|_| c.fail("targets", format!("cell key {key:?} is not an index")))?;
            if i >= region.cell_count() {
                return Err(c.fail("targets", format!("cell {i} outside the {}-cell grid", region.cell_count())));
            }
            if n < 1 {
                return Err(c.fail("targets", format!("cell {i}: target must be >= 1")));
            }
            targets.insert(i, n);
        }

        let q = &self.quadrature;
        for (k, v) in [("outer", q.outer), ("radial", q.radial), ("angular", q.angular), ("g_grid", q.g_grid)] {
            if v == 0 {
                return Err(c.fail(k, "must be >= 1"));
            }
        }
        let generation = GenerationOptions {
            process: match self.process {
                ProcessName::Matern1 => ProcessKind::Matern1,
                ProcessName::Matern2 => ProcessKind::Matern2,
            },
            radius_formula: match self.radius_formula {
                RadiusName::Paper => RadiusFormula::Paper,
                RadiusName::Tiling => RadiusFormula::Tiling,
            },
            scale,
            calibration: CalibrationSettings {
                g_quadrature: q.g_grid,
                count_quadrature: QuadratureOptions {
                    outer: q.outer,
                    radial: q.radial,
                    angular: q.angular,
                    ..Default::default()
                },
                ..Default::default()
            },
        };

        if self.rings.is_empty() {
            return Err(c.fail("rings", "at least one ring is required"));
        }
        let mut rings = Vec::new();
        for ring in &self.rings {
            c.non_negative("processing_delay_ms", ring.processing_delay_ms)?;
            if ring.max_bss == 0 {
                return Err(c.fail("max_bss", format!("ring {:?}: must be >= 1", ring.name)));
            }
            rings.push(NetworkRing::new(ring.name.clone(), ring.rank, ring.processing_delay_ms, ring.max_bss));
        }
        let mut names: Vec<&str> = self.rings.iter().map(|r| r.name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(c.fail("rings", "ring names must be unique"));
        }
        let rings = RingHierarchy::new(rings).map_err(|e| c.fail("rings", e.to_string()))?;

        let model = match self.delay_model {
            DelayConfig::Linear { km_per_ms } => DelayModel::linear(c.positive("km_per_ms", km_per_ms)?)
                .map_err(|e| c.fail("km_per_ms", e.to_string()))?,
        };
        let budget = LatencyBudget {
            rtt_budget_ms: c.non_negative("rtt_budget_ms", self.rtt_budget_ms)?,
            radio_delay_ms: c.non_negative("radio_delay_ms", self.radio_delay_ms)?,
            model,
        };
        let per_km = c.positive("candidate_resolution", self.candidate_resolution)?;
        let layout = CandidateLayout::with_resolution(bounds, per_km)
            .map_err(|e| c.fail("candidate_resolution", e.to_string()))?;
        if layout.len() > 16_000_000 {
            return Err(c.fail("candidate_resolution", format!("{} candidates is too many", layout.len())));
        }

        let v = &self.validation;
        if v.replications < stochtopo::validation::MIN_REPLICATIONS {
            return Err(c.fail("replications", format!("must be >= {}", stochtopo::validation::MIN_REPLICATIONS)));
        }
        if let Some(&bad) = v.cells.iter().find(|&&i| i >= region.cell_count()) {
            return Err(c.fail("cells", format!("cell {bad} outside the {}-cell grid", region.cell_count())));
        }
        c.positive("z_threshold", v.z_threshold)?;

        Ok(Scenario {
            region,
            field,
            targets,
            generation,
            rings,
            budget,
            layout,
            seed: self.seed,
            output_dir: self.output_dir.clone(),
            validation: v.clone(),
        })
    }
}
