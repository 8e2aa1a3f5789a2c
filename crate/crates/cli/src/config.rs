//! The run configuration document and its translation into library types.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use exact_rwa::drive::{DriveConfig, EffSeriesOrder, EffectiveHamiltonian, Envelope};
use exact_rwa::erroranalysis::{BudgetPolicy, Combination, Profile, StroboscopicGrid};
use exact_rwa::functional::{DomainPreset, EffectiveSource, ExactSource, IntegrandKind, NSource, QuadratureGrid};
use exact_rwa::propagate::{Resolution, Scheme};
use exact_rwa::variational::{Algorithm, MinimizeConfig, TrialBasis, TrialParams};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub drive: DriveSection,
    pub domain: DomainSection,
    pub functional: FunctionalSection,
    pub variational: VariationalSection,
    pub trajectory: TrajectorySection,
    pub verify: VerifySection,
    pub errors: ErrorSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnvelopeKind {
    Gaussian,
    Constant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DriveSection {
    #[serde(rename = "A")]
    pub amplitude: f64,
    pub sigma: f64,
    pub omega: f64,
    pub delta: f64,
    pub phi: f64,
    pub envelope: EnvelopeKind,
}

impl Default for DriveSection {
    fn default() -> Self {
        DriveSection { amplitude: 0.002, sigma: 4.0 * PI, omega: 0.5, delta: 0.0, phi: 0.0, envelope: EnvelopeKind::Gaussian }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DomainSection {
    pub preset: DomainPreset,
    /// Gate half-width in units of `sigma`.
    pub t_gate_factor: f64,
}

impl Default for DomainSection {
    fn default() -> Self {
        DomainSection { preset: DomainPreset::Full, t_gate_factor: 12.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceKind {
    Effective,
    Exact,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FunctionalSection {
    pub kind: IntegrandKind,
    pub source: SourceKind,
    /// Truncation order of the effective series.
    pub order: usize,
    pub beta0_points: usize,
    pub panels_per_tc: usize,
    pub t_order: usize,
    pub fd_step: f64,
    pub steps_per_tc: usize,
    pub scheme: Scheme,
}

impl Default for FunctionalSection {
    fn default() -> Self {
        let grid = QuadratureGrid::new(0.0, 1.0);
        let res = Resolution::default();
        FunctionalSection {
            kind: IntegrandKind::FI,
            source: SourceKind::Effective,
            order: 5,
            beta0_points: grid.beta0_points,
            panels_per_tc: grid.panels_per_tc,
            t_order: grid.t_order,
            fd_step: grid.fd_step,
            steps_per_tc: res.steps_per_tc,
            scheme: res.scheme,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VariationalSection {
    #[serde(rename = "M")]
    pub beta_modes: usize,
    #[serde(rename = "N")]
    pub time_modes: usize,
    pub phi0: f64,
    pub c0: f64,
    pub eta: f64,
    /// Defaults to `5 sigma`.
    #[serde(rename = "L", skip_serializing_if = "Option::is_none")]
    pub length_scale: Option<f64>,
    pub symmetry: bool,
    /// When false only `phi` and `c` are optimized.
    pub fourier: bool,
    pub algorithm: Algorithm,
    pub max_iters: usize,
    pub grad_step: f64,
    pub tolerance: f64,
}

impl Default for VariationalSection {
    fn default() -> Self {
        VariationalSection {
            beta_modes: 1,
            time_modes: 1,
            phi0: 0.0,
            c0: 0.0,
            eta: exact_rwa::variational::DEFAULT_PHASE_SCALE,
            length_scale: None,
            symmetry: true,
            fourier: true,
            algorithm: Algorithm::QuasiNewtonFd,
            max_iters: 200,
            grad_step: 1e-6,
            tolerance: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrajectorySource {
    Exact,
    Rwa,
    Effective,
}

impl TrajectorySource {
    pub fn label(self) -> &'static str {
        match self {
            TrajectorySource::Exact => "exact",
            TrajectorySource::Rwa => "rwa",
            TrajectorySource::Effective => "effective",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrajectorySection {
    pub beta0: Vec<f64>,
    pub samples_per_tc: usize,
    pub sources: Vec<TrajectorySource>,
    /// Window override; the domain window otherwise.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_start: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
}

impl Default for TrajectorySection {
    fn default() -> Self {
        TrajectorySection {
            beta0: vec![0.0],
            samples_per_tc: 16,
            sources: vec![TrajectorySource::Exact, TrajectorySource::Rwa, TrajectorySource::Effective],
            t_start: None,
            t_end: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifySection {
    pub beta0: Vec<f64>,
    /// Bound on `‖U_eff − U_exact‖₂` at stroboscopic times.
    pub tolerance: f64,
    pub symmetry_tolerance: f64,
    pub su2_samples: usize,
    pub su2_tolerance: f64,
    pub dexp_tolerance: f64,
}

impl Default for VerifySection {
    fn default() -> Self {
        VerifySection {
            beta0: vec![0.0, PI / 2.0, PI],
            tolerance: 1e-6,
            symmetry_tolerance: 1e-14,
            su2_samples: 200,
            su2_tolerance: 1e-11,
            dexp_tolerance: 1e-7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ErrorSection {
    pub beta0_points: usize,
    pub combination: Combination,
    pub profile: Profile,
    /// Replaces the measured bound in the significance test.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound_override: Option<f64>,
}

impl Default for ErrorSection {
    fn default() -> Self {
        ErrorSection { beta0_points: 64, combination: Combination::LinearSum, profile: Profile::Pointwise, bound_override: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Record,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub format: OutputFormat,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { format: OutputFormat::Record, path: None }
    }
}

fn bad(key: &str, reason: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("`{key}`: {reason}"))
}

fn positive(key: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(bad(key, format!("must be positive and finite, got {v}")))
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let config: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// Checks every value the library would otherwise reject mid-run.
    pub fn validate(&self) -> Result<(), CliError> {
        let d = &self.drive;
        if !(d.amplitude >= 0.0 && d.amplitude.is_finite()) {
            return Err(bad("drive.A", format!("must be non-negative, got {}", d.amplitude)));
        }
        positive("drive.sigma", d.sigma)?;
        positive("drive.omega", d.omega)?;
        for (key, v) in [("drive.delta", d.delta), ("drive.phi", d.phi)] {
            if !v.is_finite() {
                return Err(bad(key, "must be finite"));
            }
        }
        positive("domain.t_gate_factor", self.domain.t_gate_factor)?;
        let env = self.envelope()?;
        EffSeriesOrder::new(self.functional.order, &env).map_err(|e| bad("functional.order", e))?;
        self.quadrature_grid().validate().map_err(|e| bad("functional", e))?;
        self.resolution().validate().map_err(|e| bad("functional.steps_per_tc", e))?;
        let v = &self.variational;
        positive("variational.eta", v.eta)?;
        if let Some(l) = v.length_scale {
            positive("variational.L", l)?;
        }
        self.minimize_config().validate().map_err(|e| bad("variational", e))?;
        if self.trajectory.samples_per_tc == 0 {
            return Err(bad("trajectory.samples_per_tc", "must be positive"));
        }
        let (lo, hi) = self.trajectory_window();
        if !(lo < hi) {
            return Err(bad("trajectory", format!("empty window [{lo}, {hi}]")));
        }
        if self.verify.beta0.is_empty() {
            return Err(bad("verify.beta0", "needs at least one gauge"));
        }
        if self.errors.beta0_points == 0 {
            return Err(bad("errors.beta0_points", "must be positive"));
        }
        if let Some(b) = self.errors.bound_override {
            if !(b >= 0.0 && b.is_finite()) {
                return Err(bad("errors.bound_override", "must be non-negative"));
            }
        }
        Ok(())
    }

    pub fn envelope(&self) -> Result<Envelope, CliError> {
        match self.drive.envelope {
            EnvelopeKind::Gaussian => Envelope::gaussian(self.drive.amplitude, self.drive.sigma).map_err(|e| bad("drive", e)),
            EnvelopeKind::Constant => Ok(Envelope::constant(self.drive.amplitude)),
        }
    }

    pub fn drive_config(&self) -> DriveConfig {
        DriveConfig { omega: self.drive.omega, delta: self.drive.delta, phi: self.drive.phi }
    }

    pub fn resolution(&self) -> Resolution {
        Resolution { steps_per_tc: self.functional.steps_per_tc, scheme: self.functional.scheme }
    }

    pub fn window(&self) -> (f64, f64) {
        self.domain.preset.window(self.drive.sigma, self.domain.t_gate_factor)
    }

    pub fn trajectory_window(&self) -> (f64, f64) {
        let (lo, hi) = self.window();
        (self.trajectory.t_start.unwrap_or(lo), self.trajectory.t_end.unwrap_or(hi))
    }

    pub fn quadrature_grid(&self) -> QuadratureGrid {
        let f = &self.functional;
        let (t_lo, t_hi) = self.window();
        QuadratureGrid {
            t_lo,
            t_hi,
            beta0_points: f.beta0_points,
            panels_per_tc: f.panels_per_tc,
            t_order: f.t_order,
            fd_step: f.fd_step,
        }
    }

    pub fn stroboscopic_grid(&self) -> StroboscopicGrid {
        let (lo, hi) = self.window();
        StroboscopicGrid::new(lo, hi, self.errors.beta0_points)
    }

    pub fn budget_policy(&self) -> BudgetPolicy {
        BudgetPolicy { combination: self.errors.combination, profile: self.errors.profile }
    }

    pub fn effective_hamiltonian(&self) -> Result<EffectiveHamiltonian, CliError> {
        let env = self.envelope()?;
        let order = EffSeriesOrder::new(self.functional.order, &env).map_err(|e| bad("functional.order", e))?;
        EffectiveHamiltonian::new(env, self.drive.omega, order).map_err(|e| bad("drive.omega", e))
    }

    /// The `n(t, β₀)` supplier selected by `functional.source`.
    pub fn source(&self) -> Result<Box<dyn NSource>, CliError> {
        let drive = self.drive_config();
        let resolution = self.resolution();
        Ok(match self.functional.source {
            SourceKind::Effective => Box::new(EffectiveSource { hamiltonian: self.effective_hamiltonian()?, drive, resolution }),
            SourceKind::Exact => Box::new(ExactSource { envelope: self.envelope()?, drive, resolution }),
        })
    }

    pub fn trial_basis(&self) -> TrialBasis {
        let v = &self.variational;
        let mut basis = TrialBasis::new(self.drive.omega, self.drive.sigma, v.beta_modes, v.time_modes);
        basis.phase_scale = v.eta;
        if let Some(l) = v.length_scale {
            basis.length_scale = l;
        }
        basis
    }

    pub fn start_params(&self) -> TrialParams {
        let mut p = TrialParams::zero(self.trial_basis());
        p.phase = self.variational.phi0;
        p.width_shift = self.variational.c0;
        p
    }

    pub fn minimize_config(&self) -> MinimizeConfig {
        let v = &self.variational;
        MinimizeConfig {
            algorithm: v.algorithm,
            max_iters: v.max_iters,
            grad_step: v.grad_step,
            tolerance: v.tolerance,
            symmetry: v.symmetry,
            fourier: v.fourier,
            ..MinimizeConfig::new(self.functional.kind, self.quadrature_grid())
        }
    }
}
