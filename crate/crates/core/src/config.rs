//! Run configuration, read from TOML.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::eigen::DispersionProblem;
use crate::error::{LabError, Result};
use crate::evolve::StepRule;
use crate::modes::CorrectorSeed;
use crate::profiles::{make_profile, ShearProfile, DEFAULT_CURVATURE_FLOOR};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSpec {
    pub family: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

impl ProfileSpec {
    pub fn new(family: &str, amp: f64) -> Self {
        let mut params = BTreeMap::new();
        params.insert("amp".to_string(), amp);
        Self { family: family.to_string(), params }
    }

    pub fn build(&self) -> Result<ShearProfile> {
        make_profile(&self.family, &self.params)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub y_max: f64,
    /// Number of grid points in `y` (and in `t` for `nt`).
    pub ny: usize,
    /// Requested horizon of the heat flow and the modes.
    pub t0: f64,
    pub nt: usize,
    pub curvature_floor: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { y_max: 10.0, ny: 2001, t0: 0.25, nt: 51, curvature_floor: DEFAULT_CURVATURE_FLOOR }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModeConfig {
    pub n: Vec<u32>,
    /// `(inner, outer)` cutoff widths as fractions of `min(min_t a(t), 1)`.
    pub cutoff: (f64, f64),
    /// Overrides the default corrector bump when set.
    pub seed: Option<CorrectorSeed>,
    /// Number of equally spaced times in `[0, t0]` for sweeps.
    pub t_samples: usize,
    pub alphas: Vec<f64>,
    /// `sigma0 = factor * sup_t |Im tau_phys(t)|`.
    pub sigma0_factor: f64,
    /// Allowed relative spread of the residual plateau.
    pub plateau_tol: f64,
}

impl Default for ModeConfig {
    fn default() -> Self {
        Self {
            n: vec![64, 128, 256, 512],
            cutoff: (0.5, 1.0),
            seed: None,
            t_samples: 11,
            alphas: vec![0.0, 1.0, 2.0],
            sigma0_factor: 1.1,
            plateau_tol: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GrowthConfig {
    pub k: Vec<u32>,
    /// Fit window as fractions of `t0`.
    pub window: (f64, f64),
    pub exponent_band: (f64, f64),
    /// Allowed relative gap between `sigma(k)/sqrt(k)` and `|Im tau_phys(0)|`.
    pub rate_tol: f64,
    /// Interior nodes and height of the frozen-spectrum diagnostic (0 disables it).
    pub spectrum_nodes: usize,
    pub spectrum_y_max: f64,
}

impl Default for GrowthConfig {
    fn default() -> Self {
        Self {
            k: vec![32, 64, 128, 256],
            window: (0.2, 0.9),
            exponent_band: (0.45, 0.55),
            rate_tol: 0.15,
            spectrum_nodes: 300,
            spectrum_y_max: 8.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeConfig {
    pub k: Vec<u32>,
    pub t: f64,
    pub m: f64,
    pub alpha: f64,
    pub mu: f64,
    /// Multiples of the measured rate used as `sigma`: the first must diverge, the second stay tame.
    pub sigma_factors: (f64, f64),
    /// Times at which `rho(k, t)` is also reported.
    pub snapshots: Vec<f64>,
    pub tol: f64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            k: vec![32, 64, 128, 256, 512],
            t: 0.1,
            m: 2.0,
            alpha: 1.0,
            mu: 0.0,
            sigma_factors: (0.5, 2.0),
            snapshots: vec![0.05, 0.1],
            tol: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Only used by synthetic-noise checks.
    pub seed: u64,
    /// Profiles; single-profile experiments use the first.
    pub profiles: Vec<ProfileSpec>,
    pub grid: GridConfig,
    pub eigen: DispersionProblem,
    pub mode: ModeConfig,
    pub solver: StepRule,
    pub growth: GrowthConfig,
    pub probe: ProbeConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            profiles: vec![ProfileSpec::new("gaussian-bump", 3.0), ProfileSpec::new("algebraic-bump", 5.0)],
            grid: GridConfig::default(),
            eigen: DispersionProblem::default(),
            mode: ModeConfig::default(),
            solver: StepRule::default(),
            growth: GrowthConfig::default(),
            probe: ProbeConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| LabError::InvalidParameter(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::InvalidParameter(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical TOML form.
    pub fn hash(&self) -> String {
        format!("{:x}", Sha256::digest(self.to_toml().as_bytes()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(LabError::InvalidParameter(m.to_string()));
        if self.profiles.is_empty() {
            return bad("at least one profile is required");
        }
        for p in &self.profiles {
            p.build()?;
        }
        let g = &self.grid;
        if !(g.y_max > 0.0 && g.ny >= 16 && g.t0 > 0.0 && g.nt >= 2) {
            return bad("grid needs y_max > 0, ny >= 16, t0 > 0, nt >= 2");
        }
        if !(g.curvature_floor > 0.0 && g.curvature_floor < 1.0) {
            return bad("curvature_floor must lie in (0, 1)");
        }
        let m = &self.mode;
        if m.n.is_empty() || m.n.contains(&0) {
            return bad("mode.n must list positive integers");
        }
        if !(0.0 < m.cutoff.0 && m.cutoff.0 < m.cutoff.1) {
            return bad("mode.cutoff needs 0 < inner < outer");
        }
        if m.t_samples < 2 || m.alphas.iter().any(|a| !(*a >= 0.0)) {
            return bad("mode.t_samples >= 2 and alphas >= 0 required");
        }
        if self.growth.k.contains(&0) || self.probe.k.contains(&0) {
            return bad("wavenumbers must be positive");
        }
        let w = self.growth.window;
        if !(0.0 <= w.0 && w.0 < w.1 && w.1 <= 1.0) {
            return bad("growth.window must satisfy 0 <= lo < hi <= 1");
        }
        let p = &self.probe;
        if !(p.t > 0.0 && p.m >= 0.0 && p.alpha >= 0.0 && (0.0..0.5).contains(&p.mu)) {
            return bad("probe needs t > 0, m >= 0, alpha >= 0, 0 <= mu < 1/2");
        }
        if p.snapshots.iter().any(|s| !(*s > 0.0 && *s <= p.t)) {
            return bad("probe.snapshots must lie in (0, probe.t]");
        }
        let s = &self.solver;
        if !(s.dt_factor > 0.0 && s.dt_max > 0.0 && s.c_cfl > 0.0) {
            return bad("solver step rule must be positive");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips() {
        let c = RunConfig::default();
        let back = RunConfig::from_toml(&c.to_toml()).unwrap();
        assert_eq!(c, back);
        assert_eq!(c.hash(), back.hash());
    }

    #[test]
    fn partial_file_fills_defaults() {
        let c = RunConfig::from_toml("[grid]\nny = 401\n").unwrap();
        assert_eq!(c.grid.ny, 401);
        assert_eq!(c.mode, ModeConfig::default());
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(RunConfig::from_toml("[grid]\nnyy = 3\n").is_err());
        assert!(RunConfig::from_toml("[mode]\nn = [0]\n").is_err());
        assert!(RunConfig::from_toml("[[profiles]]\nfamily = \"blasius\"\n").is_err());
        assert!(RunConfig::from_toml("[probe]\nmu = 0.5\n").is_err());
    }
}
