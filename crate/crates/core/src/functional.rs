//! Eigenvalue integrands `f_I = |h|`, `f_II = |ḣ|` of a rotation-vector
//! trajectory `n(t, β₀)`, and their tensor quadrature over `(t, β₀)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::drive::{h_rot, DriveConfig, EffectiveHamiltonian, Envelope};
use crate::error::{invalid, Result};
use crate::propagate::{rotation_trajectory, Resolution};
use crate::quadrature::{aligned_breaks, composite, periodic_trapezoid, GaussLegendre};
use crate::su2::{dexp_inverse, dexp_rate, unit_kinematics, BranchStatus, PauliVector, RotationVector, SMALL_ANGLE};
use crate::vec3::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IntegrandKind {
    #[serde(rename = "fI")]
    FI,
    #[serde(rename = "fI-simple")]
    FISimplified,
    #[serde(rename = "fII")]
    FII,
    #[serde(rename = "fII-simple")]
    FIISimplified,
    #[serde(rename = "fII-simple-sq")]
    FIISimplifiedSquared,
}

impl IntegrandKind {
    pub const ALL: [IntegrandKind; 5] = [
        IntegrandKind::FI,
        IntegrandKind::FISimplified,
        IntegrandKind::FII,
        IntegrandKind::FIISimplified,
        IntegrandKind::FIISimplifiedSquared,
    ];

    pub fn label(self) -> &'static str {
        match self {
            IntegrandKind::FI => "fI",
            IntegrandKind::FISimplified => "fI-simple",
            IntegrandKind::FII => "fII",
            IntegrandKind::FIISimplified => "fII-simple",
            IntegrandKind::FIISimplifiedSquared => "fII-simple-sq",
        }
    }

    pub fn evaluate(self, k: &Kinematics) -> f64 {
        match self {
            IntegrandKind::FI => integrand_fi(k.n, k.n_dot),
            IntegrandKind::FISimplified => integrand_fi_simplified(k.n_dot),
            IntegrandKind::FII => integrand_fii(k.n, k.n_dot, k.n_ddot).value,
            IntegrandKind::FIISimplified => integrand_fii_simplified(k.n_ddot, false),
            IntegrandKind::FIISimplifiedSquared => integrand_fii_simplified(k.n_ddot, true),
        }
    }
}

impl std::str::FromStr for IntegrandKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        IntegrandKind::ALL
            .into_iter()
            .find(|k| k.label() == s)
            .ok_or_else(|| invalid("integrand", format!("unknown integrand `{s}`")))
    }
}

/// `sin α / α`, exact at zero.
fn sinc(alpha: f64) -> f64 {
    if alpha < 1e-4 {
        1.0 - alpha * alpha / 6.0
    } else {
        alpha.sin() / alpha
    }
}

/// `f_I = √(α̇² + sin²α |dn̂/dt|²)`, the positive eigenvalue of the
/// generating Hamiltonian; tends to `|ṅ|` as `α → 0`.
pub fn integrand_fi(n: RotationVector, n_dot: Vec3) -> f64 {
    let alpha = n.angle();
    if alpha == 0.0 {
        return n_dot.norm();
    }
    let nhat = n.0 / alpha;
    let alpha_dot = nhat.dot(n_dot);
    // sin α |dn̂| = sinc α |ṅ_⊥|
    let perp = (n_dot - nhat * alpha_dot).norm() * sinc(alpha);
    alpha_dot.hypot(perp)
}

/// `|ṅ|`; agrees with [`integrand_fi`] while `sin α ≈ α`.
pub fn integrand_fi_simplified(n_dot: Vec3) -> f64 {
    n_dot.norm()
}

/// Value of `|ḣ|` and whether the moving frame of `n̂` was degenerate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiiValue {
    pub value: f64,
    pub degenerate: bool,
}

/// Angle/axis decomposition of `(n, ṅ, n̈)`.
#[derive(Debug, Clone, Copy)]
struct AngleAxisRates {
    alpha: f64,
    alpha_dot: f64,
    alpha_ddot: f64,
    nhat: Vec3,
    nhat_dot: Vec3,
    nhat_ddot: Vec3,
}

impl AngleAxisRates {
    fn new(n: RotationVector, n_dot: Vec3, n_ddot: Vec3) -> Self {
        let alpha = n.angle();
        let nhat = n.0 / alpha;
        let alpha_dot = nhat.dot(n_dot);
        let perp = n_dot - nhat * alpha_dot;
        let nhat_dot = perp / alpha;
        let alpha_ddot = nhat.dot(n_ddot) + perp.norm_sq() / alpha;
        let nhat_ddot = (n_ddot - nhat * alpha_ddot - nhat_dot * (2.0 * alpha_dot)) / alpha;
        AngleAxisRates { alpha, alpha_dot, alpha_ddot, nhat, nhat_dot, nhat_ddot }
    }
}

/// `|ḣ|` from the squared-norm expansion in the moving frame
/// `(n̂, n̂_v, n̂_⊥ = n̂_v × n̂)`:
/// `ḣ = a d²n̂ + b n̂×d²n̂ + c n̂_v − d n̂_⊥ + α̈ n̂` with
/// `a = ½sin2α`, `b = sin²α`, `c = α̇ n_v (1 + cos2α)`, `d = α̇ n_v sin2α`.
///
/// Below `α = 1e-6` the frame is ill-conditioned and the analytic rate of
/// the dexp map is used instead.
pub fn integrand_fii(n: RotationVector, n_dot: Vec3, n_ddot: Vec3) -> FiiValue {
    if n.angle() < SMALL_ANGLE {
        return FiiValue { value: dexp_rate(n, n_dot, n_ddot).0.norm(), degenerate: false };
    }
    let r = AngleAxisRates::new(n, n_dot, n_ddot);
    let frame = unit_kinematics(r.nhat, r.nhat_dot, r.nhat_ddot, None);
    let (s2, c2) = (2.0 * r.alpha).sin_cos();
    let a = 0.5 * s2;
    let b = r.alpha.sin().powi(2);
    if frame.degenerate {
        let h_dot = r.nhat_ddot * a + r.nhat.cross(r.nhat_ddot) * b + r.nhat * r.alpha_ddot;
        return FiiValue { value: h_dot.norm(), degenerate: true };
    }
    let c = r.alpha_dot * frame.n_v * (1.0 + c2);
    let d = r.alpha_dot * frame.n_v * s2;
    // projections of d²n̂ and n̂×d²n̂ on the frame
    let dd_v = frame.n_v_dot;
    let dd_perp = frame.n_v * frame.a_perp;
    let dd_par = frame.n_v * frame.a_par;
    let cross_v = frame.n_v * frame.a_perp;
    let cross_perp = -frame.n_v_dot;
    let dd_sq = r.nhat_ddot.norm_sq();
    let cross_sq = dd_sq - dd_par * dd_par;
    let sq = a * a * dd_sq
        + b * b * cross_sq
        + c * c
        + d * d
        + r.alpha_ddot * r.alpha_ddot
        + 2.0
            * (a * c * dd_v - a * d * dd_perp + a * r.alpha_ddot * dd_par + b * c * cross_v
                - b * d * cross_perp);
    FiiValue { value: sq.max(0.0).sqrt(), degenerate: false }
}

/// `ḣ` assembled as a vector from the same frame decomposition; the
/// independent path behind [`integrand_fii`].
pub fn fii_vector(n: RotationVector, n_dot: Vec3, n_ddot: Vec3) -> Vec3 {
    if n.angle() < SMALL_ANGLE {
        return dexp_rate(n, n_dot, n_ddot).0;
    }
    let r = AngleAxisRates::new(n, n_dot, n_ddot);
    let (s2, c2) = (2.0 * r.alpha).sin_cos();
    let speed = r.nhat_dot.norm();
    let (v, perp) = if speed > 0.0 {
        let v = r.nhat_dot / speed;
        (v, v.cross(r.nhat))
    } else {
        (Vec3::ZERO, Vec3::ZERO)
    };
    r.nhat_ddot * (0.5 * s2)
        + r.nhat.cross(r.nhat_ddot) * r.alpha.sin().powi(2)
        + v * (r.alpha_dot * speed * (1.0 + c2))
        - perp * (r.alpha_dot * speed * s2)
        + r.nhat * r.alpha_ddot
}

/// `|n̈|`, or `|n̈|²` when `squared`.
pub fn integrand_fii_simplified(n_ddot: Vec3, squared: bool) -> f64 {
    if squared {
        n_ddot.norm_sq()
    } else {
        n_ddot.norm()
    }
}

/// `n` and its first two time derivatives at one sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kinematics {
    pub n: RotationVector,
    pub n_dot: Vec3,
    pub n_ddot: Vec3,
}

/// Integration domain presets in units of the envelope width.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainPreset {
    /// `[0, t_gate]`
    Half,
    /// `[−t_gate, t_gate]`
    Full,
}

impl DomainPreset {
    /// Time window for `t_gate = gate_factor · σ`.
    pub fn window(self, sigma: f64, gate_factor: f64) -> (f64, f64) {
        let t_gate = gate_factor * sigma;
        match self {
            DomainPreset::Half => (0.0, t_gate),
            DomainPreset::Full => (-t_gate, t_gate),
        }
    }
}

impl std::str::FromStr for DomainPreset {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "half" => Ok(DomainPreset::Half),
            "full" => Ok(DomainPreset::Full),
            other => Err(invalid("domain", format!("expected `half` or `full`, got `{other}`"))),
        }
    }
}

/// Tensor grid: periodic trapezoid in `β₀`, composite Gauss–Legendre in `t`
/// with panel edges at `t_i(β₀) + k t_c / panels_per_tc`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureGrid {
    pub t_lo: f64,
    pub t_hi: f64,
    pub beta0_points: usize,
    pub panels_per_tc: usize,
    pub t_order: usize,
    pub fd_step: f64,
}

impl QuadratureGrid {
    pub fn new(t_lo: f64, t_hi: f64) -> Self {
        QuadratureGrid { t_lo, t_hi, beta0_points: 32, panels_per_tc: 2, t_order: 8, fd_step: 1e-4 }
    }

    pub fn for_domain(preset: DomainPreset, sigma: f64, gate_factor: f64) -> Self {
        let (lo, hi) = preset.window(sigma, gate_factor);
        QuadratureGrid::new(lo, hi)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_hi > self.t_lo) {
            return Err(invalid("grid", format!("empty window [{}, {}]", self.t_lo, self.t_hi)));
        }
        if self.beta0_points < 16 {
            return Err(invalid("beta0_points", format!("must be at least 16, got {}", self.beta0_points)));
        }
        if self.panels_per_tc == 0 || self.t_order == 0 {
            return Err(invalid("grid", "panels_per_tc and t_order must be positive"));
        }
        if !(1e-4..=1e-3).contains(&self.fd_step) {
            return Err(invalid("fd_step", format!("must lie in [1e-4, 1e-3], got {}", self.fd_step)));
        }
        Ok(())
    }

    /// Both resolutions doubled.
    pub fn refined(&self) -> Self {
        QuadratureGrid { beta0_points: 2 * self.beta0_points, panels_per_tc: 2 * self.panels_per_tc, ..*self }
    }

    /// Time nodes and weights for the gauge whose initial time is `t_i`.
    pub fn time_nodes(&self, t_i: f64, t_c: f64) -> Vec<(f64, f64)> {
        let breaks = aligned_breaks(self.t_lo, self.t_hi, t_i, t_c, self.panels_per_tc);
        composite(&GaussLegendre::new(self.t_order), &breaks)
    }
}

/// Supplies `n(t, β₀)` with derivatives along one gauge row.
pub trait NSource: Sync {
    fn drive(&self) -> &DriveConfig;

    /// Samples at `times` for gauge `β₀`, using `fd_step` where differences are needed.
    fn sample_row(&self, beta0: f64, times: &[f64], fd_step: f64) -> RowSamples;
}

#[derive(Debug, Clone, PartialEq)]
pub struct RowSamples {
    pub kinematics: Vec<Kinematics>,
    /// Samples where the propagator came within the branch threshold of `−1`.
    pub branch_points: usize,
}

/// `ṅ` from the exact generator, `n̈` from central differences of `ṅ`.
fn propagated_row<F>(h_fn: &F, t_i: f64, times: &[f64], fd_step: f64, t_c: f64, resolution: &Resolution) -> RowSamples
where
    F: Fn(f64) -> PauliVector + Sync,
{
    let targets: Vec<f64> = times.iter().flat_map(|&t| [t - fd_step, t, t + fd_step]).collect();
    let traj = rotation_trajectory(h_fn, t_i, &targets, t_c, resolution);
    let rate = |j: usize| dexp_inverse(traj.n[j], h_fn(targets[j]));
    let kinematics = (0..times.len())
        .map(|i| {
            let (lo, mid, hi) = (3 * i, 3 * i + 1, 3 * i + 2);
            Kinematics { n: traj.n[mid], n_dot: rate(mid), n_ddot: (rate(hi) - rate(lo)) / (2.0 * fd_step) }
        })
        .collect();
    let branch_points = traj.branch.iter().filter(|b| **b == BranchStatus::NearMinusIdentity).count();
    RowSamples { kinematics, branch_points }
}

/// `n_eff` from propagating the effective Hamiltonian of each gauge.
#[derive(Debug, Clone)]
pub struct EffectiveSource {
    pub hamiltonian: EffectiveHamiltonian,
    pub drive: DriveConfig,
    pub resolution: Resolution,
}

impl NSource for EffectiveSource {
    fn drive(&self) -> &DriveConfig {
        &self.drive
    }

    fn sample_row(&self, beta0: f64, times: &[f64], fd_step: f64) -> RowSamples {
        let gauged = self.hamiltonian.at_gauge(beta0);
        let h = |t: f64| gauged.at(t);
        propagated_row(&h, self.drive.gauge_time(beta0), times, fd_step, self.drive.t_c(), &self.resolution)
    }
}

/// `n_exact` from the rotating-frame Hamiltonian, started at `t_i = t₀(β₀)`.
#[derive(Debug, Clone)]
pub struct ExactSource {
    pub envelope: Envelope,
    pub drive: DriveConfig,
    pub resolution: Resolution,
}

impl NSource for ExactSource {
    fn drive(&self) -> &DriveConfig {
        &self.drive
    }

    fn sample_row(&self, beta0: f64, times: &[f64], fd_step: f64) -> RowSamples {
        let h = |t: f64| h_rot(&self.drive, &self.envelope, t);
        propagated_row(&h, self.drive.gauge_time(beta0), times, fd_step, self.drive.t_c(), &self.resolution)
    }
}

/// Closed-form `n(t, β₀)`; both derivatives by central differences.
pub struct FnSource<F> {
    pub drive: DriveConfig,
    pub n: F,
}

impl<F> NSource for FnSource<F>
where
    F: Fn(f64, f64) -> Vec3 + Sync,
{
    fn drive(&self) -> &DriveConfig {
        &self.drive
    }

    fn sample_row(&self, beta0: f64, times: &[f64], fd_step: f64) -> RowSamples {
        let kinematics = times
            .iter()
            .map(|&t| {
                let prev = (self.n)(t - fd_step, beta0);
                let mid = (self.n)(t, beta0);
                let next = (self.n)(t + fd_step, beta0);
                Kinematics {
                    n: RotationVector(mid),
                    n_dot: (next - prev) / (2.0 * fd_step),
                    n_ddot: (next - mid * 2.0 + prev) / (fd_step * fd_step),
                }
            })
            .collect();
        RowSamples { kinematics, branch_points: 0 }
    }
}

/// One `β₀` row of a sampled grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledRow {
    pub beta0: f64,
    pub weight: f64,
    /// `(t, w)` pairs.
    pub nodes: Vec<(f64, f64)>,
    pub samples: RowSamples,
}

/// `n` and derivatives at every node of a [`QuadratureGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct SampledGrid {
    pub grid: QuadratureGrid,
    pub rows: Vec<SampledRow>,
}

impl SampledGrid {
    /// Samples all rows concurrently; row order is fixed by `β₀`.
    pub fn sample<S: NSource + ?Sized>(source: &S, grid: &QuadratureGrid) -> Result<Self> {
        grid.validate()?;
        let cfg = *source.drive();
        let rows = periodic_trapezoid(grid.beta0_points)
            .into_par_iter()
            .map(|(beta0, weight)| {
                let nodes = grid.time_nodes(cfg.gauge_time(beta0), cfg.t_c());
                let times: Vec<f64> = nodes.iter().map(|&(t, _)| t).collect();
                let samples = source.sample_row(beta0, &times, grid.fd_step);
                SampledRow { beta0, weight, nodes, samples }
            })
            .collect();
        Ok(SampledGrid { grid: *grid, rows })
    }

    pub fn branch_points(&self) -> usize {
        self.rows.iter().map(|r| r.samples.branch_points).sum()
    }

    /// `Σ_rows w_β Σ_nodes w_t g(row, node, sample)`, rows evaluated
    /// concurrently and reduced in row order.
    pub fn integrate_with<G>(&self, g: G) -> f64
    where
        G: Fn(usize, usize, &Kinematics) -> f64 + Sync,
    {
        let partial: Vec<f64> = self
            .rows
            .par_iter()
            .enumerate()
            .map(|(r, row)| {
                row.nodes
                    .iter()
                    .zip(&row.samples.kinematics)
                    .enumerate()
                    .map(|(j, (&(_, w), k))| w * g(r, j, k))
                    .sum::<f64>()
                    * row.weight
            })
            .collect();
        partial.iter().sum()
    }

    pub fn integrate(&self, kind: IntegrandKind) -> f64 {
        self.integrate_with(|_, _, k| kind.evaluate(k))
    }
}

/// A quadrature result with the change under one grid refinement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionalValue {
    pub value: f64,
    pub quad_uncertainty: f64,
    pub grid: QuadratureGrid,
}

/// `Q = ∫dβ₀ ∫dt f(n, ṅ, n̈)` on `grid`; the uncertainty is the difference
/// to the same integral on `grid.refined()`.
#[allow(non_snake_case)]
pub fn functional_Q<S: NSource + ?Sized>(kind: IntegrandKind, source: &S, grid: &QuadratureGrid) -> Result<FunctionalValue> {
    let value = SampledGrid::sample(source, grid)?.integrate(kind);
    let refined = SampledGrid::sample(source, &grid.refined())?.integrate(kind);
    Ok(FunctionalValue { value, quad_uncertainty: (refined - value).abs(), grid: *grid })
}
