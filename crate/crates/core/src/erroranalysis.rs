//! Propagated uncertainty of path functionals from the deviation between
//! effective and exact rotation vectors.
//!
//! Deviations are measured at stroboscopic times `t_i(β₀) + k t_c`, the only
//! times at which effective and exact propagators are meant to agree. Each
//! sample carries the effective kinematics needed by the first-order chain
//! for `Δf_I`, plus a quadrature weight so that budgets integrate directly
//! over the `(t, β₀)` domain.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::drive::{h_rot, DriveConfig, EffSeriesOrder, EffectiveHamiltonian, Envelope};
use crate::error::{invalid, Result};
use crate::functional::{DomainPreset, EffectiveSource, Kinematics, NSource};
use crate::propagate::{rotation_trajectory, Resolution};
use crate::quadrature::periodic_trapezoid;
use crate::vec3::Vec3;

/// Samples closer than `t_c / EXCLUSION_DIVISOR` to `t_i` are left out of the
/// `α`-dependent chain, where `Δn/α` diverges.
pub const EXCLUSION_DIVISOR: f64 = 8.0;

/// Stroboscopic sampling of `[t_lo, t_hi] × [0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StroboscopicGrid {
    pub t_lo: f64,
    pub t_hi: f64,
    pub beta0_points: usize,
}

impl StroboscopicGrid {
    pub fn new(t_lo: f64, t_hi: f64, beta0_points: usize) -> Self {
        StroboscopicGrid { t_lo, t_hi, beta0_points }
    }

    pub fn for_domain(preset: DomainPreset, sigma: f64, gate_factor: f64, beta0_points: usize) -> Self {
        let (lo, hi) = preset.window(sigma, gate_factor);
        StroboscopicGrid::new(lo, hi, beta0_points)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_lo.is_finite() && self.t_hi.is_finite() && self.t_hi > self.t_lo) {
            return Err(invalid("window", format!("need finite t_lo < t_hi, got [{}, {}]", self.t_lo, self.t_hi)));
        }
        if self.beta0_points == 0 {
            return Err(invalid("beta0_points", "must be positive"));
        }
        Ok(())
    }

    /// Stroboscopic times of gauge `β₀` inside the window.
    pub fn times(&self, beta0: f64, cfg: &DriveConfig) -> Vec<f64> {
        let t_i = cfg.gauge_time(beta0);
        let t_c = cfg.t_c();
        let first = ((self.t_lo - t_i) / t_c).ceil() as i64;
        let last = ((self.t_hi - t_i) / t_c).floor() as i64;
        (first..=last).map(|k| t_i + k as f64 * t_c).collect()
    }
}

/// Effective kinematics and the deviation `n_eff − n_exact` at one stroboscopic time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviationSample {
    pub t: f64,
    pub beta0: f64,
    /// `Δβ₀ · t_c`: the area this sample represents.
    pub weight: f64,
    /// Inside the neighbourhood of `t_i` excluded from the `α` chain.
    pub excluded: bool,
    pub base: Kinematics,
    pub delta_n: Vec3,
}

/// All stroboscopic deviations over a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviationMap {
    pub t_c: f64,
    pub samples: Vec<DeviationSample>,
}

impl DeviationMap {
    /// Componentwise maximum of `|Δn|`.
    pub fn max_component(&self) -> Vec3 {
        self.samples.iter().fold(Vec3::ZERO, |acc, s| acc.max(s.delta_n.abs()))
    }

    /// Maximum of `| |n_eff| − |n_exact| |`, the directly measured angle error.
    pub fn max_angle_deviation(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| (s.base.n.angle() - (s.base.n.0 - s.delta_n).norm()).abs())
            .fold(0.0, f64::max)
    }

    /// Maximum of `|n̂_eff − n̂_exact|` outside the excluded neighbourhood.
    pub fn max_axis_deviation(&self) -> f64 {
        self.samples
            .iter()
            .filter(|s| !s.excluded)
            .map(|s| {
                let exact = s.base.n.0 - s.delta_n;
                let exact_norm = exact.norm();
                if exact_norm == 0.0 || s.base.n.angle() == 0.0 {
                    return 0.0;
                }
                (s.base.n.axis() - exact / exact_norm).norm()
            })
            .fold(0.0, f64::max)
    }

    /// Same kinematics with every deviation multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> DeviationMap {
        let samples = self.samples.iter().map(|s| DeviationSample { delta_n: s.delta_n * factor, ..*s }).collect();
        DeviationMap { t_c: self.t_c, samples }
    }
}

/// Compares `n_eff` of the given series order with `n_exact` on the grid.
pub fn measure_delta_n(
    env: &Envelope,
    cfg: &DriveConfig,
    order: usize,
    grid: &StroboscopicGrid,
    resolution: &Resolution,
) -> Result<DeviationMap> {
    grid.validate()?;
    resolution.validate()?;
    let series = EffSeriesOrder::new(order, env)?;
    let source = EffectiveSource {
        hamiltonian: EffectiveHamiltonian::new(*env, cfg.omega, series)?,
        drive: *cfg,
        resolution: *resolution,
    };
    let t_c = cfg.t_c();
    let exact = |t: f64| h_rot(cfg, env, t);
    let rows: Vec<Vec<DeviationSample>> = periodic_trapezoid(grid.beta0_points)
        .into_par_iter()
        .map(|(beta0, w_beta)| {
            let times = grid.times(beta0, cfg);
            let t_i = cfg.gauge_time(beta0);
            let eff = source.sample_row(beta0, &times, 1e-4);
            let ex = rotation_trajectory(&exact, t_i, &times, t_c, resolution);
            times
                .iter()
                .zip(eff.kinematics)
                .zip(&ex.n)
                .map(|((&t, base), n_ex)| DeviationSample {
                    t,
                    beta0,
                    weight: w_beta * t_c,
                    excluded: (t - t_i).abs() < t_c / EXCLUSION_DIVISOR,
                    base,
                    delta_n: base.n.0 - n_ex.0,
                })
                .collect()
        })
        .collect();
    Ok(DeviationMap { t_c, samples: rows.into_iter().flatten().collect() })
}

/// How independent error contributions are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Combination {
    /// Sum of absolute values.
    LinearSum,
    /// Root of the sum of squares.
    Quadrature,
}

/// Which `Δn` enters the chain at each sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    /// The deviation measured at that sample.
    Pointwise,
    /// The componentwise maximum over the grid, everywhere.
    ConstantMaximum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BudgetPolicy {
    pub combination: Combination,
    pub profile: Profile,
}

impl Default for BudgetPolicy {
    fn default() -> Self {
        BudgetPolicy { combination: Combination::LinearSum, profile: Profile::Pointwise }
    }
}

/// Propagated uncertainties. Angle and axis entries are maxima over the
/// non-excluded samples; `delta_q*` are integrals over the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorBudget {
    pub delta_n: Vec3,
    pub delta_alpha: f64,
    pub delta_nhat_norm: f64,
    pub delta_alpha_dot: f64,
    pub delta_nhat_dot: f64,
    /// `∫∫ Δf_I` through the partial-derivative chain.
    #[serde(rename = "delta_Q")]
    pub delta_q: f64,
    /// `∫∫ |Δn|/t_c`, the bound for the simplified first-order integrand.
    pub delta_q_simplified: f64,
    /// `delta_q_simplified / t_c`, the bound for `|n̈|`.
    pub delta_q_ii_simplified: f64,
}

impl ErrorBudget {
    pub const ZERO: ErrorBudget = ErrorBudget {
        delta_n: Vec3::ZERO,
        delta_alpha: 0.0,
        delta_nhat_norm: 0.0,
        delta_alpha_dot: 0.0,
        delta_nhat_dot: 0.0,
        delta_q: 0.0,
        delta_q_simplified: 0.0,
        delta_q_ii_simplified: 0.0,
    };

    fn entries(&self) -> [f64; 10] {
        [
            self.delta_n.x,
            self.delta_n.y,
            self.delta_n.z,
            self.delta_alpha,
            self.delta_nhat_norm,
            self.delta_alpha_dot,
            self.delta_nhat_dot,
            self.delta_q,
            self.delta_q_simplified,
            self.delta_q_ii_simplified,
        ]
    }

    pub fn is_nonnegative(&self) -> bool {
        self.entries().iter().all(|v| *v >= 0.0)
    }

    /// True when no entry of `self` exceeds the matching entry of `other`.
    pub fn dominated_by(&self, other: &ErrorBudget) -> bool {
        self.entries().iter().zip(other.entries()).all(|(a, b)| *a <= b)
    }
}

fn combine(c: Combination, parts: &[f64]) -> f64 {
    match c {
        Combination::LinearSum => parts.iter().map(|p| p.abs()).sum(),
        Combination::Quadrature => parts.iter().map(|p| p * p).sum::<f64>().sqrt(),
    }
}

/// Per-sample chain: `(Δα, |Δn̂|, Δf_I)`, with `Δα̇ = Δα/t_c` and `Δ|dn̂/dt| = |Δn̂|/t_c`.
fn chain(base: &Kinematics, dn: Vec3, t_c: f64, c: Combination) -> (f64, f64, f64) {
    let alpha = base.n.angle();
    if alpha == 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let n = base.n.0.abs();
    let dn = dn.abs();
    let d_alpha = combine(c, &[n.x * dn.x / alpha, n.y * dn.y / alpha, n.z * dn.z / alpha]);
    let axis_part = |i: usize| combine(c, &[dn[i] / alpha, d_alpha * n[i] / (alpha * alpha)]);
    let d_nhat = Vec3::new(axis_part(0), axis_part(1), axis_part(2)).norm();

    let nhat = base.n.axis();
    let alpha_dot = nhat.dot(base.n_dot);
    let nhat_rate = (base.n_dot - nhat * alpha_dot).norm() / alpha;
    let f = (alpha_dot * alpha_dot + (alpha.sin() * nhat_rate).powi(2)).sqrt();
    if f == 0.0 {
        return (d_alpha, d_nhat, 0.0);
    }
    let terms = [
        2.0 * alpha_dot.abs() * d_alpha / t_c,
        (1.0 - (2.0 * alpha).cos()) * nhat_rate * d_nhat / t_c,
        nhat_rate * nhat_rate * (2.0 * alpha).sin().abs() * d_alpha,
    ];
    (d_alpha, d_nhat, combine(c, &terms) / (2.0 * f))
}

/// Propagates the measured deviations to an error budget.
pub fn propagate_errors(map: &DeviationMap, policy: BudgetPolicy) -> ErrorBudget {
    let t_c = map.t_c;
    let max_dn = map.max_component();
    let mut budget = ErrorBudget { delta_n: max_dn, ..ErrorBudget::ZERO };
    for s in &map.samples {
        let dn = match policy.profile {
            Profile::Pointwise => s.delta_n.abs(),
            Profile::ConstantMaximum => max_dn,
        };
        budget.delta_q_simplified += s.weight * combine(policy.combination, &dn.to_array()) / t_c;
        if s.excluded {
            continue;
        }
        let (d_alpha, d_nhat, d_f) = chain(&s.base, dn, t_c, policy.combination);
        budget.delta_alpha = budget.delta_alpha.max(d_alpha);
        budget.delta_nhat_norm = budget.delta_nhat_norm.max(d_nhat);
        budget.delta_q += s.weight * d_f;
    }
    budget.delta_alpha_dot = budget.delta_alpha / t_c;
    budget.delta_nhat_dot = budget.delta_nhat_norm / t_c;
    budget.delta_q_ii_simplified = budget.delta_q_simplified / t_c;
    budget
}

/// Whether an improvement stands out of the combined uncertainty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Significant,
    Marginal,
    NotSignificant,
}

/// Multiple of the bound an improvement must exceed to count as significant.
pub const SIGNIFICANCE_FACTOR: f64 = 5.0;

/// `Significant` above `5·bound`, `Marginal` from `bound` up (inclusive),
/// `NotSignificant` below or for non-positive improvements.
pub fn significance(improvement: f64, bound: f64) -> Verdict {
    if improvement.is_nan() || improvement <= 0.0 {
        Verdict::NotSignificant
    } else if improvement > SIGNIFICANCE_FACTOR * bound {
        Verdict::Significant
    } else if improvement >= bound {
        Verdict::Marginal
    } else {
        Verdict::NotSignificant
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Significant => "SIGNIFICANT",
            Verdict::Marginal => "MARGINAL",
            Verdict::NotSignificant => "NOT_SIGNIFICANT",
        })
    }
}
