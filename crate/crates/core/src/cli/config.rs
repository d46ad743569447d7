//! Run configuration: one strict TOML file per run.
//!
//! Unknown keys are rejected everywhere. Sections not used by the chosen
//! `experiment` are rejected too, so a typo in a section name cannot be
//! silently ignored.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernellab::{ModulatedKernelSpec, DEFAULT_TAU1_FS};
use crate::pumps::PumpSpectrum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    ModulatedKernel,
    Spopo,
    TransverseSweep,
    ClusterSynthesis,
    Ghz,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::ModulatedKernel => "modulated-kernel",
            ExperimentKind::Spopo => "spopo",
            ExperimentKind::TransverseSweep => "transverse-sweep",
            ExperimentKind::ClusterSynthesis => "cluster-synthesis",
            ExperimentKind::Ghz => "ghz",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub tolerance: ToleranceSection,
    pub modulated: Option<ModulatedSection>,
    pub spopo: Option<SpopoSection>,
    pub squeezing: Option<SqueezingSection>,
    pub transverse: Option<TransverseSection>,
    pub coupling: Option<CouplingSection>,
    pub ghz: Option<GhzSection>,
    pub profiles: Option<ProfilesSection>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// Used when no `--out` is given; relative to the working directory.
    pub dir: Option<PathBuf>,
    /// Sample stride for kernel.csv; default keeps about 256 samples per side.
    pub kernel_stride: Option<usize>,
    /// Supermodes written to supermodes.csv (default 8).
    pub modes: Option<usize>,
    /// Eigenvalues listed in spectrum.json (default 16).
    pub report_count: Option<usize>,
    /// Compute eigenfunctions (default true). Without them supermodes.csv
    /// holds the eigenvalue list only.
    pub eigenfunctions: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    /// Axis samples (default 512 for modulated kernels, 1024 for SPOPO).
    pub n: Option<usize>,
    /// Axis half-width; the default follows the kernel's own scale.
    pub x_max: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ToleranceSection {
    /// Relative eigenvalue floor of the numeric solve.
    pub floor: f64,
    /// Relative tolerance for degeneracy grouping.
    pub degeneracy: f64,
    /// Number of leading magnitudes used for the spread figure.
    pub spread_count: usize,
}

impl Default for ToleranceSection {
    fn default() -> Self {
        ToleranceSection {
            floor: crate::supermodes::DEFAULT_FLOOR,
            degeneracy: 0.02,
            spread_count: 100,
        }
    }
}

/// Modulated Gaussian kernel from harmonic amplitude ladders.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModulatedSection {
    /// Sets both widths; mutually exclusive with `sigma_plus`/`sigma_minus`.
    pub sigma: Option<f64>,
    pub sigma_plus: Option<f64>,
    pub sigma_minus: Option<f64>,
    /// Amplitudes `b_n` of `cos(n Δ₊ u)` along `x + x'` (default `[1]`).
    #[serde(default = "unit_ladder")]
    pub plus: Vec<f64>,
    /// Amplitudes along `x − x'` (default `[1]`).
    #[serde(default = "unit_ladder")]
    pub minus: Vec<f64>,
    /// Default `3π σ₊`.
    pub plus_spacing: Option<f64>,
    /// Default `(2N₊ + 1) · 3π σ₋`, which keeps carriers of the two ladders apart.
    pub minus_spacing: Option<f64>,
}

fn unit_ladder() -> Vec<f64> {
    vec![1.0]
}

impl ModulatedSection {
    pub fn to_spec(&self) -> Result<ModulatedKernelSpec> {
        let (sp, sm) = match (self.sigma, self.sigma_plus, self.sigma_minus) {
            (Some(s), None, None) => (s, s),
            (None, Some(p), Some(m)) => (p, m),
            _ => {
                return Err(Error::Config(
                    "[modulated] give either `sigma` or both `sigma_plus` and `sigma_minus`".into(),
                ))
            }
        };
        if self.plus.is_empty() || self.minus.is_empty() {
            return Err(Error::Config("[modulated] `plus` and `minus` need at least one amplitude".into()));
        }
        let dp = self.plus_spacing.unwrap_or(3.0 * PI * sp);
        let radix = (2 * (self.plus.len() - 1) + 1) as f64;
        let dm = self.minus_spacing.unwrap_or(radix * 3.0 * PI * sm);
        ModulatedKernelSpec::new(
            sp,
            sm,
            ModulatedKernelSpec::harmonic_ladder(&self.plus, dp),
            ModulatedKernelSpec::harmonic_ladder(&self.minus, dm),
        )
        .map_err(|e| Error::Config(format!("[modulated] {e}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpopoSection {
    /// Group-delay mismatch, same time unit as the pump (default 20, fs).
    #[serde(default = "default_tau1")]
    pub tau1: f64,
    pub pump: PumpSpectrum,
}

fn default_tau1() -> f64 {
    DEFAULT_TAU1_FS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SqueezingSection {
    /// Pump power relative to threshold, in `[0, 1)`.
    pub pump_fraction: f64,
    /// Supermodes to report (default 8).
    pub modes: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransverseSection {
    pub families: Vec<usize>,
    #[serde(default = "one")]
    pub w_s: f64,
    pub rho_min: f64,
    pub rho_max: f64,
    pub rho_points: usize,
    /// Add `ρ = 1/√2` to the sweep (default true).
    #[serde(default = "yes")]
    pub include_reference: bool,
    /// `(ρ_a, ρ_b)` for the two-beam pump that nulls `χ₁` in family 3.
    pub null_pair: Option<[f64; 2]>,
    /// `(ρ_a, ρ_b)` for the two-beam pump with `χ₁ = −χ₃`.
    pub opposite_pair: Option<[f64; 2]>,
}

fn one() -> f64 {
    1.0
}

fn yes() -> bool {
    true
}

impl TransverseSection {
    pub fn rhos(&self) -> Result<Vec<f64>> {
        if !(self.rho_min > 0.0 && self.rho_max > self.rho_min && self.rho_max.is_finite()) {
            return Err(Error::Config(format!(
                "[transverse] need 0 < rho_min < rho_max, got {} and {}",
                self.rho_min, self.rho_max
            )));
        }
        if self.rho_points < 2 {
            return Err(Error::Config("[transverse] rho_points must be at least 2".into()));
        }
        let step = (self.rho_max - self.rho_min) / (self.rho_points - 1) as f64;
        let mut rhos: Vec<f64> = (0..self.rho_points).map(|i| self.rho_min + step * i as f64).collect();
        let reference = crate::transverse::REFERENCE_RHO;
        if self.include_reference && !rhos.contains(&reference) {
            rhos.push(reference);
            rhos.sort_by(f64::total_cmp);
        }
        Ok(rhos)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CouplingPreset {
    Ring4,
    Complete,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingSection {
    /// Built-in graph; mutually exclusive with `matrix`.
    pub preset: Option<CouplingPreset>,
    /// Modes of the `complete` preset.
    pub n: Option<usize>,
    /// Edge weight of the `complete` preset.
    pub weight: Option<f64>,
    /// Explicit symmetric coupling matrix.
    pub matrix: Option<Vec<Vec<f64>>>,
    /// Gaussian width of the kernel to synthesize.
    pub sigma: f64,
    /// Vertex order applied to the decomposition.
    pub permutation: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GhzSection {
    /// Mode counts to report.
    pub modes: Vec<usize>,
    /// Input squeezing in dB; mutually exclusive with `r`.
    pub squeezing_db: Option<f64>,
    pub r: Option<f64>,
}

impl GhzSection {
    pub fn squeeze_parameter(&self) -> Result<f64> {
        match (self.squeezing_db, self.r) {
            (Some(db), None) if db >= 0.0 && db.is_finite() => Ok(db * std::f64::consts::LN_10 / 20.0),
            (None, Some(r)) if r >= 0.0 && r.is_finite() => Ok(r),
            _ => Err(Error::Config(
                "[ghz] give exactly one of `squeezing_db` or `r`, non-negative".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfilesSection {
    /// Transverse families `f ≥ 1`; each yields `f + 1` entangled modes.
    pub families: Vec<usize>,
    #[serde(default = "default_profile_grid")]
    pub grid_n: usize,
    #[serde(default = "default_half_width")]
    pub half_width: f64,
    #[serde(default = "one")]
    pub w_s: f64,
}

fn default_profile_grid() -> usize {
    81
}

fn default_half_width() -> f64 {
    4.0
}

/// Configurations shipped with the binary, addressable as `builtin:<name>`.
pub const BUILTIN_CONFIGS: &[(&str, &str)] = &[
    ("fig1a", include_str!("../../configs/fig1a.toml")),
    ("fig1c", include_str!("../../configs/fig1c.toml")),
    ("fig2-1ps", include_str!("../../configs/fig2-1ps.toml")),
    ("fig2-100fs", include_str!("../../configs/fig2-100fs.toml")),
    ("fig3", include_str!("../../configs/fig3.toml")),
    ("fig4", include_str!("../../configs/fig4.toml")),
    ("ring4", include_str!("../../configs/ring4.toml")),
    ("complete5", include_str!("../../configs/complete5.toml")),
    ("ghz5", include_str!("../../configs/ghz5.toml")),
];

/// Shipped configs run by the `figures` command, in order.
pub const FIGURE_SUITE: &[&str] = &["fig1a", "fig1c", "fig2-1ps", "fig2-100fs", "fig3", "fig4"];

impl RunConfig {
    /// Parse and check; TOML errors carry line and column.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        if let Some(name) = path.to_str().and_then(|s| s.strip_prefix("builtin:")) {
            return Self::builtin(name);
        }
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn builtin(name: &str) -> Result<Self> {
        let (_, text) = BUILTIN_CONFIGS
            .iter()
            .find(|(n, _)| *n == name)
            .ok_or_else(|| {
                let names: Vec<&str> = BUILTIN_CONFIGS.iter().map(|(n, _)| *n).collect();
                Error::Config(format!("no built-in config `{name}`; available: {}", names.join(", ")))
            })?;
        Self::from_toml_str(text).map_err(|e| Error::Config(format!("builtin:{name}: {e}")))
    }

    fn check(&self) -> Result<()> {
        use ExperimentKind::*;
        let present = [
            ("modulated", self.modulated.is_some(), &[ModulatedKernel][..]),
            ("spopo", self.spopo.is_some(), &[Spopo]),
            ("squeezing", self.squeezing.is_some(), &[ModulatedKernel, Spopo]),
            ("transverse", self.transverse.is_some(), &[TransverseSweep]),
            ("coupling", self.coupling.is_some(), &[ClusterSynthesis]),
            ("ghz", self.ghz.is_some(), &[ClusterSynthesis, Ghz]),
            ("profiles", self.profiles.is_some(), &[ClusterSynthesis, Ghz]),
        ];
        for (name, is_set, allowed) in present {
            if is_set && !allowed.contains(&self.experiment) {
                return Err(Error::Config(format!(
                    "section [{name}] is not used by experiment `{}`",
                    self.experiment.name()
                )));
            }
        }
        let required = match self.experiment {
            ModulatedKernel => ("modulated", self.modulated.is_some()),
            Spopo => ("spopo", self.spopo.is_some()),
            TransverseSweep => ("transverse", self.transverse.is_some()),
            ClusterSynthesis => ("coupling", self.coupling.is_some()),
            Ghz => ("ghz", self.ghz.is_some()),
        };
        if !required.1 {
            return Err(Error::Config(format!(
                "experiment `{}` needs a [{}] section",
                self.experiment.name(),
                required.0
            )));
        }
        if let Some(n) = self.grid.n {
            if n < 2 {
                return Err(Error::Config("[grid] n must be at least 2".into()));
            }
        }
        if let Some(x) = self.grid.x_max {
            if !(x > 0.0 && x.is_finite()) {
                return Err(Error::Config(format!("[grid] x_max must be positive, got {x}")));
            }
        }
        let t = &self.tolerance;
        if !(t.floor >= 0.0 && t.floor < 1.0) {
            return Err(Error::Config(format!("[tolerance] floor must lie in [0, 1), got {}", t.floor)));
        }
        if !(t.degeneracy > 0.0 && t.degeneracy <= 0.1) {
            return Err(Error::Config(format!(
                "[tolerance] degeneracy must lie in (0, 0.1], got {}",
                t.degeneracy
            )));
        }
        if let Some(m) = &self.modulated {
            m.to_spec()?;
        }
        if let Some(s) = &self.spopo {
            if !(s.tau1 > 0.0 && s.tau1.is_finite()) {
                return Err(Error::Config(format!("[spopo] tau1 must be positive, got {}", s.tau1)));
            }
            s.pump.validate().map_err(|e| Error::Config(format!("[spopo.pump] {e}")))?;
        }
        if let Some(s) = &self.squeezing {
            if !(s.pump_fraction >= 0.0 && s.pump_fraction < 1.0) {
                return Err(Error::Config(format!(
                    "[squeezing] pump_fraction must lie in [0, 1), got {}",
                    s.pump_fraction
                )));
            }
        }
        if let Some(t) = &self.transverse {
            t.rhos()?;
            if t.families.is_empty() {
                return Err(Error::Config("[transverse] families must not be empty".into()));
            }
            if !(t.w_s > 0.0 && t.w_s.is_finite()) {
                return Err(Error::Config("[transverse] w_s must be positive".into()));
            }
        }
        if let Some(c) = &self.coupling {
            let by_preset = c.preset.is_some();
            if by_preset == c.matrix.is_some() {
                return Err(Error::Config("[coupling] give exactly one of `preset` or `matrix`".into()));
            }
            let complete = c.preset == Some(CouplingPreset::Complete);
            if complete != (c.n.is_some() && c.weight.is_some()) || (!complete && (c.n.is_some() || c.weight.is_some())) {
                return Err(Error::Config(
                    "[coupling] `n` and `weight` are required by, and only used with, preset = \"complete\"".into(),
                ));
            }
            if !(c.sigma > 0.0 && c.sigma.is_finite()) {
                return Err(Error::Config(format!("[coupling] sigma must be positive, got {}", c.sigma)));
            }
        }
        if let Some(g) = &self.ghz {
            g.squeeze_parameter()?;
            if g.modes.is_empty() || g.modes.iter().any(|&n| n < 2) {
                return Err(Error::Config("[ghz] modes must list counts of at least 2".into()));
            }
        }
        if let Some(p) = &self.profiles {
            if p.families.is_empty() || p.families.contains(&0) {
                return Err(Error::Config("[profiles] families must be non-empty and f >= 1".into()));
            }
            if p.grid_n < 3 || !(p.half_width > 0.0) || !(p.w_s > 0.0) {
                return Err(Error::Config("[profiles] need grid_n >= 3 and positive half_width, w_s".into()));
            }
        }
        Ok(())
    }
}
