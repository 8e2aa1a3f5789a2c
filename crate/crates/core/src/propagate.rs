//! Time evolution of `i U̇ = H(t) U`: time-ordered product integrators,
//! Magnus terms, rotation-vector trajectories and the stroboscopic
//! comparison between effective and exact evolution.

use serde::{Deserialize, Serialize};

use crate::drive::{h_rot, DriveConfig, EffSeriesOrder, EffectiveHamiltonian, Envelope, GaussianEnvelope, Mutation};
use crate::error::{invalid, Result};
use crate::quadrature::GaussLegendre;
use crate::su2::{exp_su2, log_su2, BranchStatus, PauliVector, RotationVector, SuLog, Unitary2};
use crate::vec3::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// One exponential of `h` at the step midpoint; second order.
    MidpointExponential,
    /// Two exponentials at the Gauss points; fourth order.
    CommutatorFree4,
}

/// Step-size control: a fixed number of steps per drive period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Resolution {
    pub steps_per_tc: usize,
    pub scheme: Scheme,
}

impl Default for Resolution {
    fn default() -> Self {
        Resolution { steps_per_tc: 256, scheme: Scheme::CommutatorFree4 }
    }
}

impl Resolution {
    pub fn validate(&self) -> Result<()> {
        if self.steps_per_tc < 16 {
            return Err(invalid("steps_per_tc", format!("must be at least 16, got {}", self.steps_per_tc)));
        }
        Ok(())
    }

    pub fn max_step(&self, t_c: f64) -> f64 {
        t_c / self.steps_per_tc as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropagationSpec {
    pub t_start: f64,
    pub t_end: f64,
    /// Drive period the resolution refers to.
    pub t_c: f64,
    pub resolution: Resolution,
}

impl PropagationSpec {
    pub fn new(t_start: f64, t_end: f64, t_c: f64, resolution: Resolution) -> Result<Self> {
        resolution.validate()?;
        if t_end < t_start {
            return Err(invalid("t_end", format!("{t_end} precedes t_start {t_start}")));
        }
        if !(t_c > 0.0) {
            return Err(invalid("t_c", "must be positive"));
        }
        Ok(PropagationSpec { t_start, t_end, t_c, resolution })
    }
}

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Propagator over `[t, t + dt]`, `dt > 0`.
pub fn step<F>(h_fn: &F, t: f64, dt: f64, scheme: Scheme) -> Unitary2
where
    F: Fn(f64) -> PauliVector + ?Sized,
{
    match scheme {
        Scheme::MidpointExponential => exp_su2(RotationVector(h_fn(t + 0.5 * dt).0 * dt)),
        Scheme::CommutatorFree4 => {
            let h1 = h_fn(t + (0.5 - SQRT3 / 6.0) * dt).0;
            let h2 = h_fn(t + (0.5 + SQRT3 / 6.0) * dt).0;
            let (a1, a2) = (0.25 + SQRT3 / 6.0, 0.25 - SQRT3 / 6.0);
            let first = exp_su2(RotationVector((h1 * a1 + h2 * a2) * dt));
            let second = exp_su2(RotationVector((h1 * a2 + h2 * a1) * dt));
            second.mul(&first)
        }
    }
}

/// Advances `u` from `from` to `to` (either direction) in equal substeps.
fn advance<F>(h_fn: &F, u: Unitary2, from: f64, to: f64, max_step: f64, scheme: Scheme) -> Unitary2
where
    F: Fn(f64) -> PauliVector + ?Sized,
{
    let span = to - from;
    if span == 0.0 {
        return u;
    }
    let steps = ((span.abs() / max_step).ceil() as usize).max(1);
    let dt = span.abs() / steps as f64;
    let mut u = u;
    if span > 0.0 {
        for k in 0..steps {
            let t = from + k as f64 * dt;
            u = step(h_fn, t, dt, scheme).mul(&u);
        }
    } else {
        for k in 0..steps {
            let t = from - (k + 1) as f64 * dt;
            u = step(h_fn, t, dt, scheme).adjoint().mul(&u);
        }
    }
    u
}

/// Time-ordered product `U(t_end, t_start)`.
pub fn propagate_product<F>(h_fn: F, spec: &PropagationSpec) -> Unitary2
where
    F: Fn(f64) -> PauliVector,
{
    advance(
        &h_fn,
        Unitary2::identity(),
        spec.t_start,
        spec.t_end,
        spec.resolution.max_step(spec.t_c),
        spec.resolution.scheme,
    )
}

/// `U(t, t_i)` for every target time, in input order. Targets on either side
/// of `t_i` are reached by marching outward from `t_i`.
pub fn propagate_to_times<F>(h_fn: &F, t_i: f64, times: &[f64], t_c: f64, resolution: &Resolution) -> Vec<Unitary2>
where
    F: Fn(f64) -> PauliVector + ?Sized,
{
    let max_step = resolution.max_step(t_c);
    let mut order: Vec<usize> = (0..times.len()).collect();
    order.sort_by(|&a, &b| times[a].total_cmp(&times[b]));
    let split = order.partition_point(|&i| times[i] < t_i);
    let mut out = vec![Unitary2::identity(); times.len()];

    let mut u = Unitary2::identity();
    let mut t = t_i;
    for &i in &order[split..] {
        u = advance(h_fn, u, t, times[i], max_step, resolution.scheme);
        t = times[i];
        out[i] = u;
    }
    let mut u = Unitary2::identity();
    let mut t = t_i;
    for &i in order[..split].iter().rev() {
        u = advance(h_fn, u, t, times[i], max_step, resolution.scheme);
        t = times[i];
        out[i] = u;
    }
    out
}

/// Representative of `log U` closest to the previous sample; the principal
/// value shifted by whole turns `2π n̂`.
pub fn continue_branch(previous: Vec3, principal: &SuLog) -> RotationVector {
    let axis = principal.n.axis();
    let alpha = principal.n.angle();
    let tau = 2.0 * std::f64::consts::PI;
    [-1.0, 0.0, 1.0]
        .iter()
        .map(|k| axis * (alpha + k * tau))
        .min_by(|a, b| (*a - previous).norm().total_cmp(&(*b - previous).norm()))
        .map(RotationVector)
        .unwrap_or(principal.n)
}

/// Rotation vectors along a trajectory, with per-sample branch status.
#[derive(Debug, Clone, PartialEq)]
pub struct RotationTrajectory {
    pub times: Vec<f64>,
    pub n: Vec<RotationVector>,
    pub branch: Vec<BranchStatus>,
}

impl RotationTrajectory {
    pub fn any_branch_point(&self) -> bool {
        self.branch.iter().any(|b| *b == BranchStatus::NearMinusIdentity)
    }
}

/// `n(t)` with `U(t, t_i) = exp(-i n·σ)` at each target time, continuous
/// along each march away from `t_i`.
pub fn rotation_trajectory<F>(h_fn: &F, t_i: f64, times: &[f64], t_c: f64, resolution: &Resolution) -> RotationTrajectory
where
    F: Fn(f64) -> PauliVector + ?Sized,
{
    let us = propagate_to_times(h_fn, t_i, times, t_c, resolution);
    let mut order: Vec<usize> = (0..times.len()).collect();
    order.sort_by(|&a, &b| times[a].total_cmp(&times[b]));
    let split = order.partition_point(|&i| times[i] < t_i);
    let mut n = vec![RotationVector::ZERO; times.len()];
    let mut branch = vec![BranchStatus::Regular; times.len()];
    let forward = order[split..].iter();
    let backward = order[..split].iter().rev();
    for side in [forward.copied().collect::<Vec<_>>(), backward.copied().collect::<Vec<_>>()] {
        let mut previous = Vec3::ZERO;
        for i in side {
            let log = log_su2(&us[i]);
            let rep = continue_branch(previous, &log);
            previous = rep.0;
            n[i] = rep;
            branch[i] = log.branch;
        }
    }
    RotationTrajectory { times: times.to_vec(), n, branch }
}

/// `n(t, β₀)` for a single time, starting at `t_i = β₀/(2ω)`.
pub fn n_of<F>(h_fn: F, t: f64, beta0: f64, cfg: &DriveConfig, resolution: &Resolution) -> Result<(RotationVector, BranchStatus)>
where
    F: Fn(f64) -> PauliVector,
{
    let t_i = cfg.gauge_time(beta0);
    if t < t_i {
        return Err(invalid("t", format!("{t} precedes the initial time {t_i}")));
    }
    let traj = rotation_trajectory(&h_fn, t_i, &[t], cfg.t_c(), resolution);
    Ok((traj.n[0], traj.branch[0]))
}

/// Lowest three Magnus terms of `h` over one interval, as Pauli vectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MagnusTerms {
    pub first: PauliVector,
    pub second: PauliVector,
    pub third: PauliVector,
}

impl MagnusTerms {
    pub fn sum(&self) -> PauliVector {
        PauliVector(self.first.0 + self.second.0 + self.third.0)
    }
}

/// Nested Gauss–Legendre evaluation of
/// `H̄⁽⁰⁾ = (1/T)∫h`,
/// `H̄⁽¹⁾ = (1/T)∫∫_{τ₂<τ₁} h₁×h₂`,
/// `H̄⁽²⁾ = (2/3T)∫∫∫_{τ₃<τ₂<τ₁} [h₁×(h₂×h₃) + (h₁×h₂)×h₃]`,
/// the Pauli-vector form of the commutator integrals (`[a·σ, b·σ] = 2i (a×b)·σ`).
pub fn magnus_terms<F>(h_fn: F, t0: f64, duration: f64, nodes: usize) -> MagnusTerms
where
    F: Fn(f64) -> PauliVector,
{
    let rule = GaussLegendre::new(nodes);
    let h = |t: f64| h_fn(t).0;
    // running integral ∫_{t0}^{τ} h
    let integral = |tau: f64| -> Vec3 { rule.mapped(t0, tau).map(|(s, w)| h(s) * w).sum() };
    let end = t0 + duration;
    let mut first = Vec3::ZERO;
    let mut second = Vec3::ZERO;
    let mut third = Vec3::ZERO;
    for (t1, w1) in rule.mapped(t0, end) {
        let h1 = h(t1);
        first += h1 * w1;
        second += h1.cross(integral(t1)) * w1;
        let inner: Vec3 = rule
            .mapped(t0, t1)
            .map(|(t2, w2)| {
                let h2 = h(t2);
                let i3 = integral(t2);
                (h1.cross(h2.cross(i3)) + h1.cross(h2).cross(i3)) * w2
            })
            .sum();
        third += inner * w1;
    }
    MagnusTerms {
        first: PauliVector(first / duration),
        second: PauliVector(second / duration),
        third: PauliVector(third * (2.0 / (3.0 * duration))),
    }
}

/// `∫_{t₀}^{t₀+t} H₁/4 dτ` for a Gaussian envelope, `t₀ = β₀/(2ω)`; the
/// rotation angle about `x` generated by the RWA Hamiltonian.
pub fn magnus_lowest_rwa(env: &GaussianEnvelope, t: f64, beta0: f64, omega: f64) -> f64 {
    let t0 = beta0 / (2.0 * omega);
    let scale = std::f64::consts::SQRT_2 * env.sigma;
    let half_area = 0.25 * env.amplitude * env.sigma * (0.5 * std::f64::consts::PI).sqrt();
    half_area * (libm::erf((t + t0) / scale) - libm::erf(t0 / scale))
}

/// Effective versus exact propagator at the stroboscopic times of one gauge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StroboscopicReport {
    pub beta0: f64,
    pub times: Vec<f64>,
    /// Spectral norm of `U_eff - U_exact` at each time.
    pub deviations: Vec<f64>,
}

impl StroboscopicReport {
    pub fn max_deviation(&self) -> f64 {
        self.deviations.iter().copied().fold(0.0, f64::max)
    }
}

/// Options for [`verify_stroboscopic_window`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StroboscopicOptions {
    pub resolution: Resolution,
    pub mutation: Mutation,
}

impl Default for StroboscopicOptions {
    fn default() -> Self {
        StroboscopicOptions { resolution: Resolution::default(), mutation: Mutation::None }
    }
}

/// Deviations at `t₀ + k t_c` for `k = 1..=k_max`, both evolutions starting
/// at `t_i = t₀`.
pub fn verify_stroboscopic(
    env: &Envelope,
    cfg: &DriveConfig,
    beta0: f64,
    k_max: usize,
    order: EffSeriesOrder,
) -> Result<StroboscopicReport> {
    let t0 = cfg.gauge_time(beta0);
    let times: Vec<f64> = (1..=k_max).map(|k| t0 + k as f64 * cfg.t_c()).collect();
    stroboscopic_at(env, cfg, beta0, order.get(), &times, &StroboscopicOptions::default())
}

/// Deviations at every stroboscopic time `t₀ + k t_c ≠ t₀` inside `[t_lo, t_hi]`.
pub fn verify_stroboscopic_window(
    env: &Envelope,
    cfg: &DriveConfig,
    beta0: f64,
    order: usize,
    t_lo: f64,
    t_hi: f64,
    options: &StroboscopicOptions,
) -> Result<StroboscopicReport> {
    let t0 = cfg.gauge_time(beta0);
    let t_c = cfg.t_c();
    let k_lo = ((t_lo - t0) / t_c).ceil() as i64;
    let k_hi = ((t_hi - t0) / t_c).floor() as i64;
    let times: Vec<f64> = (k_lo..=k_hi).filter(|&k| k != 0).map(|k| t0 + k as f64 * t_c).collect();
    stroboscopic_at(env, cfg, beta0, order, &times, options)
}

fn stroboscopic_at(
    env: &Envelope,
    cfg: &DriveConfig,
    beta0: f64,
    order: usize,
    times: &[f64],
    options: &StroboscopicOptions,
) -> Result<StroboscopicReport> {
    options.resolution.validate()?;
    let listing = if env.is_constant() { crate::drive::Listing::Constant } else { crate::drive::Listing::Generic };
    let eff = EffectiveHamiltonian::with_listing(*env, cfg.omega, order, listing, options.mutation)?.at_gauge(beta0);
    let t_i = cfg.gauge_time(beta0);
    let u_eff = propagate_to_times(&|t| eff.at(t), t_i, times, cfg.t_c(), &options.resolution);
    let u_exact = propagate_to_times(&|t| h_rot(cfg, env, t), t_i, times, cfg.t_c(), &options.resolution);
    let deviations = u_eff.iter().zip(&u_exact).map(|(a, b)| a.distance(b)).collect();
    Ok(StroboscopicReport { beta0, times: times.to_vec(), deviations })
}
