//! Run configuration documents (TOML).
//!
//! ```toml
//! preset = "3e"            # optional starting point; every key below overrides it
//!
//! [system]
//! num_sites = 100
//! geometry = "three-point" # or "two-point"
//! dx = 2
//! zeta = 1.97
//! g_over_J = 0.1
//! omega1_over_J = 0.17
//! omega2_over_J = -0.17
//! alpha1_over_J = -0.34
//! alpha2_over_J = -0.67    # defaults to alpha1 - 0.3 without a preset
//! gamma_q_over_J = 0.0
//! gamma_c_over_J = 0.0
//! atom2_offset = 1
//! atom1_site = 48          # 1-based; omit to centre the atoms
//!
//! [solver]
//! t_max_J = 150.0
//! dt_J = 0.1
//! tolerance = 1e-10
//! phase_convention = "none" # or "optimal"
//!
//! [sweep]
//! g_over_J = [0.03, 0.05, 0.08, 0.1, 0.175]
//! gamma_q_over_J = 1.6e-5
//! gamma_c_over_J = 8e-5
//! ```

use std::path::Path;

use giantcz::protocol::{preset, GateConfig, Geometry, PhaseConvention, Placement};
use serde::Deserialize;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub preset: Option<String>,
    #[serde(default)]
    pub system: SystemSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub sweep: SweepSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeometryKind {
    TwoPoint,
    ThreePoint,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
pub struct SystemSection {
    pub num_sites: Option<usize>,
    pub geometry: Option<GeometryKind>,
    pub dx: Option<usize>,
    pub zeta: Option<f64>,
    pub g_over_J: Option<f64>,
    pub omega1_over_J: Option<f64>,
    pub omega2_over_J: Option<f64>,
    pub alpha1_over_J: Option<f64>,
    pub alpha2_over_J: Option<f64>,
    pub gamma_q_over_J: Option<f64>,
    pub gamma_c_over_J: Option<f64>,
    pub atom2_offset: Option<i64>,
    pub atom1_site: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
pub struct SolverSection {
    pub t_max_J: Option<f64>,
    pub dt_J: Option<f64>,
    pub tolerance: Option<f64>,
    pub phase_convention: Option<PhaseConvention>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
pub struct SweepSection {
    pub g_over_J: Option<Vec<f64>>,
    pub gamma_q_over_J: Option<f64>,
    pub gamma_c_over_J: Option<f64>,
}

/// Error raised while reading or interpreting a configuration.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn missing(key: &str) -> ConfigError {
    ConfigError(format!("missing `{key}` (no preset to fall back on)"))
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| ConfigError(format!("{}: {}", path.display(), e.0)))
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError(e.to_string()))
    }

    pub fn from_preset(id: &str) -> Self {
        Self {
            preset: Some(id.to_string()),
            ..Self::default()
        }
    }

    /// Resolves the document into a gate configuration.
    pub fn gate_config(&self) -> Result<GateConfig, ConfigError> {
        let base = match &self.preset {
            Some(id) => Some(preset(id).map_err(|e| ConfigError(e.to_string()))?),
            None => None,
        };
        let s = &self.system;
        let pick = |v: Option<f64>, from_base: Option<f64>, key: &str| v.or(from_base).ok_or_else(|| missing(key));

        let geometry = {
            let (base_kind, base_dx, base_zeta) = match base.as_ref().map(|b| b.geometry) {
                Some(Geometry::TwoPoint { dx }) => (Some(GeometryKind::TwoPoint), Some(dx), None),
                Some(Geometry::ThreePoint { dx, zeta }) => (Some(GeometryKind::ThreePoint), Some(dx), Some(zeta)),
                None => (None, None, None),
            };
            let kind = s.geometry.or(base_kind).ok_or_else(|| missing("system.geometry"))?;
            let dx = s.dx.or(base_dx).ok_or_else(|| missing("system.dx"))?;
            match kind {
                GeometryKind::TwoPoint => {
                    if s.zeta.is_some() {
                        return Err(ConfigError("`system.zeta` only applies to the three-point geometry".into()));
                    }
                    Geometry::TwoPoint { dx }
                }
                GeometryKind::ThreePoint => Geometry::ThreePoint {
                    dx,
                    zeta: s.zeta.or(base_zeta).ok_or_else(|| missing("system.zeta"))?,
                },
            }
        };

        let b = base.as_ref();
        let alpha1 = pick(s.alpha1_over_J, b.map(|b| b.alpha1), "system.alpha1_over_J")?;
        let alpha2 = match (s.alpha2_over_J, b) {
            (Some(a), _) => a,
            (None, Some(b)) if s.alpha1_over_J.is_none() => b.alpha2,
            _ => alpha1 - 0.3,
        };
        let placement = Placement {
            atom2_offset: s
                .atom2_offset
                .unwrap_or_else(|| b.map_or(Placement::default().atom2_offset, |b| b.placement.atom2_offset)),
            atom1_start: match s.atom1_site {
                Some(0) => return Err(ConfigError("`system.atom1_site` is 1-based".into())),
                Some(site) => Some(site - 1),
                None => b.and_then(|b| b.placement.atom1_start),
            },
        };
        let config = GateConfig {
            num_sites: s.num_sites.or(b.map(|b| b.num_sites)).unwrap_or(100),
            geometry,
            g: pick(s.g_over_J, b.map(|b| b.g), "system.g_over_J")?,
            omega1: pick(s.omega1_over_J, b.map(|b| b.omega1), "system.omega1_over_J")?,
            omega2: pick(s.omega2_over_J, b.map(|b| b.omega2), "system.omega2_over_J")?,
            alpha1,
            alpha2,
            gamma_q: s.gamma_q_over_J.or(b.map(|b| b.gamma_q)).unwrap_or(0.0),
            gamma_c: s.gamma_c_over_J.or(b.map(|b| b.gamma_c)).unwrap_or(0.0),
            placement,
            t_max: self.solver.t_max_J.or(b.map(|b| b.t_max)).unwrap_or(150.0),
            dt: self.solver.dt_J.or(b.map(|b| b.dt)).unwrap_or(0.1),
            tolerance: self.solver.tolerance.or(b.map(|b| b.tolerance)).unwrap_or(1e-10),
            phase_convention: self
                .solver
                .phase_convention
                .or(b.map(|b| b.phase_convention))
                .unwrap_or_default(),
        };
        config.validate().map_err(|e| ConfigError(e.to_string()))?;
        Ok(config)
    }
}
