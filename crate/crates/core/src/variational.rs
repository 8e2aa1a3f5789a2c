//! Trial perturbations `δn(t, β₀)` that vanish at every stroboscopic time,
//! and minimization of `Q[n + δn]` over their coefficients.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::drive::Axis;
use crate::error::{invalid, Result};
use crate::functional::{FunctionalValue, IntegrandKind, Kinematics, NSource, SampledGrid, QuadratureGrid};
use crate::optimize::{bfgs, nelder_mead, BfgsOptions, NelderMeadOptions, OptimResult, Termination};
use crate::su2::RotationVector;
use crate::vec3::Vec3;

/// Default `η`: the phase enters as `η φ`.
pub const DEFAULT_PHASE_SCALE: f64 = 1e6;

/// Shape of the trial family; fixed during a minimization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialBasis {
    pub omega: f64,
    /// Envelope width the Gaussian damping refers to.
    pub sigma: f64,
    pub phase_scale: f64,
    /// Time scale of the Fourier modes in `t`.
    pub length_scale: f64,
    /// Highest harmonic in `β₀`.
    pub beta_modes: usize,
    /// Highest harmonic in `t`.
    pub time_modes: usize,
}

impl TrialBasis {
    /// `η = 10⁶`, `L = 5σ`.
    pub fn new(omega: f64, sigma: f64, beta_modes: usize, time_modes: usize) -> Self {
        TrialBasis {
            omega,
            sigma,
            phase_scale: DEFAULT_PHASE_SCALE,
            length_scale: 5.0 * sigma,
            beta_modes,
            time_modes,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("omega", self.omega), ("sigma", self.sigma), ("eta", self.phase_scale), ("L", self.length_scale)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(name, format!("must be positive, got {v}")));
            }
        }
        Ok(())
    }

    fn modes(&self) -> usize {
        (self.beta_modes + 1) * (self.time_modes + 1)
    }

    /// Number of Fourier coefficients, `12 (M+1)(N+1)`.
    pub fn coeff_len(&self) -> usize {
        4 * 3 * self.modes()
    }

    /// Length of the flattened vector `[φ, c, coefficients]`.
    pub fn vector_len(&self) -> usize {
        2 + self.coeff_len()
    }

    /// Position of a coefficient in the coefficient array.
    pub fn index(&self, block: Block, axis: Axis, m: usize, n: usize) -> usize {
        ((block as usize * 3 + axis_slot(axis)) * (self.beta_modes + 1) + m) * (self.time_modes + 1) + n
    }

    fn coords(&self, idx: usize) -> (Block, Axis, usize, usize) {
        let n = idx % (self.time_modes + 1);
        let rest = idx / (self.time_modes + 1);
        let m = rest % (self.beta_modes + 1);
        let rest = rest / (self.beta_modes + 1);
        (Block::ALL[rest / 3], AXES[rest % 3], m, n)
    }
}

const AXES: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

fn axis_slot(axis: Axis) -> usize {
    match axis {
        Axis::X => 0,
        Axis::Y => 1,
        Axis::Z => 2,
    }
}

/// Coefficient blocks named by their `(β₀, t)` factors:
/// `cos(mβ₀)cos(nt/L)`, `cos(mβ₀)sin((n+1)t/L)`, `sin(mβ₀)cos(nt/L)`,
/// `sin(mβ₀)sin((n+1)t/L)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Block {
    CosCos = 0,
    CosSin = 1,
    SinCos = 2,
    SinSin = 3,
}

impl Block {
    pub const ALL: [Block; 4] = [Block::CosCos, Block::CosSin, Block::SinCos, Block::SinSin];

    /// Sign acquired under `(t, β₀) → (−t, −β₀)`.
    pub fn reflection_parity(self) -> i8 {
        match self {
            Block::CosCos | Block::SinSin => 1,
            Block::CosSin | Block::SinCos => -1,
        }
    }

    /// `sin(0·β₀) ≡ 0` makes the `m = 0` sine-in-`β₀` modes inert.
    pub fn is_inert(self, m: usize) -> bool {
        m == 0 && matches!(self, Block::SinCos | Block::SinSin)
    }
}

/// Reflection parity of each component of `n`: `n_x`, `n_z` odd, `n_y` even.
pub fn component_parity(axis: Axis) -> i8 {
    match axis {
        Axis::X | Axis::Z => -1,
        Axis::Y => 1,
    }
}

/// Whether a block is compatible with the parity of a component, given an
/// even outer factor.
pub fn symmetry_allows(axis: Axis, block: Block) -> bool {
    component_parity(axis) == block.reflection_parity()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialParams {
    pub basis: TrialBasis,
    /// `φ`; the outer factor uses `η φ`.
    pub phase: f64,
    /// `c`; the damping is `exp(−(1+c) t²/(2σ²))`.
    pub width_shift: f64,
    /// Layout `[block][axis][m][n]`.
    pub coeffs: Vec<f64>,
}

impl TrialParams {
    pub fn zero(basis: TrialBasis) -> Self {
        TrialParams { basis, phase: 0.0, width_shift: 0.0, coeffs: vec![0.0; basis.coeff_len()] }
    }

    /// Coefficients uniform in `±scale`; `φ` and `c` left at zero.
    pub fn random(basis: TrialBasis, seed: u64, scale: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coeffs = (0..basis.coeff_len()).map(|_| rng.gen_range(-scale..=scale)).collect();
        TrialParams { basis, phase: 0.0, width_shift: 0.0, coeffs }
    }

    pub fn from_vector(basis: TrialBasis, v: &[f64]) -> Result<Self> {
        if v.len() != basis.vector_len() {
            return Err(invalid("parameters", format!("expected {} entries, got {}", basis.vector_len(), v.len())));
        }
        Ok(TrialParams { basis, phase: v[0], width_shift: v[1], coeffs: v[2..].to_vec() })
    }

    pub fn to_vector(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.basis.vector_len());
        v.push(self.phase);
        v.push(self.width_shift);
        v.extend_from_slice(&self.coeffs);
        v
    }

    pub fn coeff(&self, block: Block, axis: Axis, m: usize, n: usize) -> f64 {
        self.coeffs[self.basis.index(block, axis, m, n)]
    }

    pub fn set_coeff(&mut self, block: Block, axis: Axis, m: usize, n: usize, value: f64) {
        let i = self.basis.index(block, axis, m, n);
        self.coeffs[i] = value;
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == 0.0)
    }
}

/// Zeroes every coefficient whose block parity contradicts its component.
pub fn apply_symmetry_mask(params: &TrialParams) -> TrialParams {
    let mut out = params.clone();
    for (i, c) in out.coeffs.iter_mut().enumerate() {
        let (block, axis, _, _) = params.basis.coords(i);
        if !symmetry_allows(axis, block) {
            *c = 0.0;
        }
    }
    out
}

/// A scalar with its first two time derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

/// `f = [sin²θ − sin²(ηφ)] e^{a t²}`, `θ = ω(t − t₀) + ηφ`,
/// `a = −(1+c)/(2σ²)`, with `t₀ = β₀/(2ω)`.
pub fn outer_factor(t: f64, beta0: f64, params: &TrialParams) -> Jet {
    let b = &params.basis;
    let offset = b.phase_scale * params.phase;
    let a = -(1.0 + params.width_shift) / (2.0 * b.sigma * b.sigma);
    let tau = b.omega * (t - beta0 / (2.0 * b.omega));
    let theta = tau + offset;
    let damping = (a * t * t).exp();
    // sin²θ − sin²ψ = sin(θ−ψ) sin(θ+ψ) vanishes exactly at τ = kπ
    let value = tau.sin() * (theta + offset).sin() * damping;
    let (s2, c2) = (2.0 * theta).sin_cos();
    let d1 = b.omega * s2 * damping + 2.0 * a * t * value;
    let d2 = 2.0 * (b.omega * b.omega * c2 + a * b.omega * t * s2) * damping + 2.0 * a * value + 2.0 * a * t * d1;
    Jet { value, d1, d2 }
}

/// `δn`, `δṅ`, `δn̈` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialSample {
    pub value: Vec3,
    pub d1: Vec3,
    pub d2: Vec3,
}

/// Temporal mode values at one time: per `n`, the jets of `cos(nt/L)` and `sin((n+1)t/L)`.
#[derive(Debug, Clone, PartialEq)]
struct TimeModes(Vec<[Jet; 2]>);

impl TimeModes {
    fn at(t: f64, basis: &TrialBasis) -> Self {
        let modes = (0..=basis.time_modes)
            .map(|n| {
                let kc = n as f64 / basis.length_scale;
                let ks = (n + 1) as f64 / basis.length_scale;
                let (sc, cc) = (kc * t).sin_cos();
                let (ss, cs) = (ks * t).sin_cos();
                [
                    Jet { value: cc, d1: -kc * sc, d2: -kc * kc * cc },
                    Jet { value: ss, d1: ks * cs, d2: -ks * ks * ss },
                ]
            })
            .collect();
        TimeModes(modes)
    }
}

/// `(cos mβ₀, sin mβ₀)` for `m = 0..=M`.
fn beta_modes(beta0: f64, basis: &TrialBasis) -> Vec<(f64, f64)> {
    (0..=basis.beta_modes).map(|m| (m as f64 * beta0).cos()).zip((0..=basis.beta_modes).map(|m| (m as f64 * beta0).sin())).collect()
}

/// `g` and its time derivatives from precomputed mode values.
fn inner_vector(params: &TrialParams, beta: &[(f64, f64)], time: &TimeModes) -> [Vec3; 3] {
    let mut out = [[0.0; 3]; 3];
    for (slot, axis) in AXES.iter().enumerate() {
        for (m, &(cm, sm)) in beta.iter().enumerate() {
            for (n, [cos_t, sin_t]) in time.0.iter().enumerate() {
                let cc = params.coeff(Block::CosCos, *axis, m, n) * cm;
                let cs = params.coeff(Block::CosSin, *axis, m, n) * cm;
                let sc = params.coeff(Block::SinCos, *axis, m, n) * sm;
                let ss = params.coeff(Block::SinSin, *axis, m, n) * sm;
                let (wc, ws) = (cc + sc, cs + ss);
                out[0][slot] += wc * cos_t.value + ws * sin_t.value;
                out[1][slot] += wc * cos_t.d1 + ws * sin_t.d1;
                out[2][slot] += wc * cos_t.d2 + ws * sin_t.d2;
            }
        }
    }
    out.map(Vec3::from_array)
}

fn combine(f: Jet, g: [Vec3; 3]) -> TrialSample {
    TrialSample {
        value: g[0] * f.value,
        d1: g[1] * f.value + g[0] * f.d1,
        d2: g[2] * f.value + g[1] * (2.0 * f.d1) + g[0] * f.d2,
    }
}

/// `δn = f_outer · g` with `g_i = Σ_m A_{i,m}(t) cos mβ₀ + B_{i,m}(t) sin mβ₀`.
pub fn trial_delta_n(t: f64, beta0: f64, params: &TrialParams) -> TrialSample {
    let g = inner_vector(params, &beta_modes(beta0, &params.basis), &TimeModes::at(t, &params.basis));
    combine(outer_factor(t, beta0, params), g)
}

/// `Q[n + δn]` on a fixed sampled grid. Evaluated as
/// `Q_base + Σ w [f(n + δn) − f(n)]`, so zero coefficients reproduce the
/// unperturbed quadrature bit for bit.
pub struct Objective {
    kind: IntegrandKind,
    sampled: SampledGrid,
    basis: TrialBasis,
    symmetry: bool,
    base_value: f64,
    base_integrand: Vec<Vec<f64>>,
    beta: Vec<Vec<(f64, f64)>>,
    time: Vec<Vec<TimeModes>>,
    free: Vec<usize>,
}

impl Objective {
    pub fn new(kind: IntegrandKind, sampled: SampledGrid, basis: TrialBasis, symmetry: bool) -> Result<Self> {
        basis.validate()?;
        let base_value = sampled.integrate(kind);
        let base_integrand = sampled.rows.iter().map(|r| r.samples.kinematics.iter().map(|k| kind.evaluate(k)).collect()).collect();
        let beta = sampled.rows.iter().map(|r| beta_modes(r.beta0, &basis)).collect();
        let time = sampled.rows.iter().map(|r| r.nodes.iter().map(|&(t, _)| TimeModes::at(t, &basis)).collect()).collect();
        let free = std::iter::once(0)
            .chain(std::iter::once(1))
            .chain((0..basis.coeff_len()).filter(|&i| {
                let (block, axis, m, _) = basis.coords(i);
                !block.is_inert(m) && (!symmetry || symmetry_allows(axis, block))
            }).map(|i| i + 2))
            .collect();
        Ok(Objective { kind, sampled, basis, symmetry, base_value, base_integrand, beta, time, free })
    }

    pub fn basis(&self) -> &TrialBasis {
        &self.basis
    }

    /// `Q` of the unperturbed trajectory.
    pub fn base_value(&self) -> f64 {
        self.base_value
    }

    pub fn grid(&self) -> &QuadratureGrid {
        &self.sampled.grid
    }

    pub fn value(&self, params: &TrialParams) -> f64 {
        let masked;
        let params = if self.symmetry {
            masked = apply_symmetry_mask(params);
            &masked
        } else {
            params
        };
        if params.is_zero() {
            return self.base_value;
        }
        let delta = self.sampled.integrate_with(|r, j, k| {
            let t = self.sampled.rows[r].nodes[j].0;
            let f = outer_factor(t, self.sampled.rows[r].beta0, params);
            let d = combine(f, inner_vector(params, &self.beta[r], &self.time[r][j]));
            let moved = Kinematics { n: RotationVector(k.n.0 + d.value), n_dot: k.n_dot + d.d1, n_ddot: k.n_ddot + d.d2 };
            self.kind.evaluate(&moved) - self.base_integrand[r][j]
        });
        self.base_value + delta
    }

    /// Keeps only `φ` and `c` free; the Fourier block stays at its template value.
    pub fn envelope_only(mut self) -> Self {
        self.free.truncate(2);
        self
    }

    /// Number of coordinates the optimizer varies.
    pub fn free_len(&self) -> usize {
        self.free.len()
    }

    /// Optimizer coordinates: free entries of `[ηφ, c, coefficients]`.
    pub fn to_free(&self, params: &TrialParams) -> Vec<f64> {
        let mut v = params.to_vector();
        v[0] *= self.basis.phase_scale;
        self.free.iter().map(|&i| v[i]).collect()
    }

    /// Inverse of [`Objective::to_free`], filling non-free entries from `template`.
    pub fn from_free(&self, x: &[f64], template: &TrialParams) -> TrialParams {
        let mut v = template.to_vector();
        v[0] *= self.basis.phase_scale;
        for (&i, &xi) in self.free.iter().zip(x) {
            v[i] = xi;
        }
        v[0] /= self.basis.phase_scale;
        TrialParams::from_vector(self.basis, &v).expect("length fixed by the basis")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    QuasiNewtonFd,
    Simplex,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinimizeConfig {
    pub algorithm: Algorithm,
    pub max_iters: usize,
    pub grad_step: f64,
    pub tolerance: f64,
    pub kind: IntegrandKind,
    pub grid: QuadratureGrid,
    pub symmetry: bool,
    /// When false only `φ` and `c` are optimized.
    pub fourier: bool,
}

impl MinimizeConfig {
    pub fn new(kind: IntegrandKind, grid: QuadratureGrid) -> Self {
        MinimizeConfig { algorithm: Algorithm::QuasiNewtonFd, max_iters: 200, grad_step: 1e-6, tolerance: 1e-12, kind, grid, symmetry: true, fourier: true }
    }

    pub fn validate(&self) -> Result<()> {
        if self.tolerance > 1e-8 || self.tolerance < 0.0 {
            return Err(invalid("tolerance", format!("must lie in [0, 1e-8], got {}", self.tolerance)));
        }
        if !(self.grad_step > 0.0) {
            return Err(invalid("grad_step", "must be positive"));
        }
        self.grid.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimizeResult {
    pub q_start: FunctionalValue,
    pub q_final: FunctionalValue,
    /// `q_start.value − q_final.value`
    pub improvement: f64,
    pub params_final: TrialParams,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    /// Set when the simplex method took over after a stalled line search.
    pub simplex_fallback: bool,
}

/// Minimizes `Q[n + δn]` starting from `start`.
pub fn minimize<S: NSource + ?Sized>(source: &S, config: &MinimizeConfig, start: &TrialParams) -> Result<MinimizeResult> {
    config.validate()?;
    let basis = start.basis;
    let mut objective = Objective::new(config.kind, SampledGrid::sample(source, &config.grid)?, basis, config.symmetry)?;
    if !config.fourier {
        objective = objective.envelope_only();
    }
    let refined = Objective::new(config.kind, SampledGrid::sample(source, &config.grid.refined())?, basis, config.symmetry)?;
    minimize_with(&objective, &refined, config, start)
}

/// [`minimize`] on prepared objectives; `refined` only sets the reported uncertainties.
pub fn minimize_with(objective: &Objective, refined: &Objective, config: &MinimizeConfig, start: &TrialParams) -> Result<MinimizeResult> {
    config.validate()?;
    let start = if config.symmetry { apply_symmetry_mask(start) } else { start.clone() };
    let f = |x: &[f64]| objective.value(&objective.from_free(x, &start));
    let x0 = objective.to_free(&start);
    let evaluate = |p: &TrialParams| FunctionalValue {
        value: objective.value(p),
        quad_uncertainty: (refined.value(p) - objective.value(p)).abs(),
        grid: *objective.grid(),
    };
    let nm_options = |iters: usize| NelderMeadOptions {
        max_iters: iters,
        initial_step: vec![config.grad_step * 100.0; x0.len()],
        f_tolerance: config.tolerance,
    };
    let (best, fallback): (OptimResult, bool) = match config.algorithm {
        Algorithm::Simplex => (nelder_mead(&f, &x0, &nm_options(config.max_iters)), false),
        Algorithm::QuasiNewtonFd => {
            let options = BfgsOptions {
                max_iters: config.max_iters,
                grad_step: config.grad_step,
                f_tolerance: config.tolerance,
                g_tolerance: config.tolerance,
                initial_step: 1e-4,
            };
            let r = bfgs(&f, &x0, &options);
            if r.termination == Termination::LineSearchStalled && r.iterations < config.max_iters {
                let nm = nelder_mead(&f, &r.x, &nm_options(config.max_iters - r.iterations));
                let merged = OptimResult {
                    iterations: r.iterations + nm.iterations,
                    evaluations: r.evaluations + nm.evaluations,
                    history: r.history.iter().chain(&nm.history).copied().collect(),
                    ..if nm.f < r.f { nm } else { OptimResult { termination: Termination::Converged, ..r.clone() } }
                };
                (merged, true)
            } else {
                (r, false)
            }
        }
    };
    let start_value = f(&x0);
    let (x, fx) = if best.f < start_value { (best.x.clone(), best.f) } else { (x0.clone(), start_value) };
    let params_final = objective.from_free(&x, &start);
    let q_start = evaluate(&start);
    let q_final = evaluate(&params_final);
    debug_assert_eq!(q_final.value, fx);
    Ok(MinimizeResult {
        improvement: q_start.value - q_final.value,
        q_start,
        q_final,
        params_final,
        iterations: best.iterations,
        evaluations: best.evaluations,
        converged: best.termination == Termination::Converged,
        simplex_fallback: fallback,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drive::DriveConfig;
    use crate::functional::FnSource;
    use std::f64::consts::PI;

    fn basis() -> TrialBasis {
        TrialBasis::new(0.5, 4.0 * PI, 2, 2)
    }

    fn random_params(seed: u64) -> TrialParams {
        let mut p = TrialParams::random(basis(), seed, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
        p.phase = rng.gen_range(0.0..2.0 * PI) / p.basis.phase_scale;
        p.width_shift = rng.gen_range(-0.5..0.5);
        p
    }

    #[test]
    fn vector_layout_round_trips() {
        let b = TrialBasis::new(0.5, 1.0, 1, 1);
        assert_eq!(b.vector_len(), 2 + 12 * 4);
        let p = random_params(1);
        let q = TrialParams::from_vector(p.basis, &p.to_vector()).unwrap();
        assert_eq!(p, q);
        assert!(TrialParams::from_vector(p.basis, &[0.0; 3]).is_err());
        for i in 0..p.basis.coeff_len() {
            let (block, axis, m, n) = p.basis.coords(i);
            assert_eq!(p.basis.index(block, axis, m, n), i);
        }
    }

    #[test]
    fn outer_factor_vanishes_stroboscopically() {
        for seed in 0..20 {
            let p = random_params(seed);
            let beta0 = 0.37 * seed as f64;
            for k in -30..=30 {
                let t = beta0 + 2.0 * PI * k as f64;
                assert!(outer_factor(t, beta0, &p).value.abs() <= 1e-13);
            }
        }
    }

    #[test]
    fn outer_factor_derivatives_match_finite_differences() {
        let step = 1e-4;
        for seed in 0..20 {
            let p = random_params(seed);
            let (t, beta0) = (-20.0 + 2.1 * seed as f64, 0.3 * seed as f64);
            let f = |s: f64| outer_factor(s, beta0, &p).value;
            let jet = outer_factor(t, beta0, &p);
            let fd1 = (f(t + step) - f(t - step)) / (2.0 * step);
            let fd2 = (f(t + step) - 2.0 * f(t) + f(t - step)) / (step * step);
            let scale = jet.d1.abs().max(jet.d2.abs()).max(1e-3);
            assert!((jet.d1 - fd1).abs() <= 1e-7 * scale, "{} {fd1}", jet.d1);
            assert!((jet.d2 - fd2).abs() <= 1e-6 * scale, "{} {fd2}", jet.d2);
        }
    }

    #[test]
    fn outer_factor_uses_printed_form_at_half_frequency() {
        let p = random_params(3);
        let eta_phi = p.basis.phase_scale * p.phase;
        let (t, beta0) = (3.3, 1.1);
        let printed = (((t - beta0) / 2.0 + eta_phi).sin().powi(2) - eta_phi.sin().powi(2))
            * (-(1.0 + p.width_shift) * t * t / (2.0 * p.basis.sigma.powi(2))).exp();
        assert!((outer_factor(t, beta0, &p).value - printed).abs() < 1e-14);
    }

    #[test]
    fn trial_perturbation_properties() {
        let zero = TrialParams::zero(basis());
        assert_eq!(trial_delta_n(1.3, 0.4, &zero).value, Vec3::ZERO);
        let p = random_params(5);
        let step = 1e-4;
        for &(t, beta0) in &[(2.0, 0.5), (-13.0, 4.0), (27.0, 6.0)] {
            let s = trial_delta_n(t, beta0, &p);
            let d = |u: f64| trial_delta_n(u, beta0, &p).value;
            let fd1 = (d(t + step) - d(t - step)) / (2.0 * step);
            let fd2 = (d(t + step) - d(t) * 2.0 + d(t - step)) / (step * step);
            assert!((s.d1 - fd1).max_abs() <= 1e-7 * s.d1.max_abs().max(1.0));
            assert!((s.d2 - fd2).max_abs() <= 1e-6 * s.d2.max_abs().max(1.0));
            let wrapped = trial_delta_n(t, beta0 + 2.0 * PI, &p).value;
            assert!((wrapped - s.value).max_abs() <= 1e-12);
        }
    }

    #[test]
    fn symmetry_mask_parity_table() {
        assert!(symmetry_allows(Axis::Y, Block::CosCos));
        assert!(!symmetry_allows(Axis::X, Block::CosCos));
        assert!(symmetry_allows(Axis::X, Block::CosSin) && symmetry_allows(Axis::Z, Block::SinCos));
        assert!(Block::SinCos.is_inert(0) && !Block::CosSin.is_inert(0));
        let zero = TrialParams::zero(basis());
        assert_eq!(apply_symmetry_mask(&zero), zero);
    }

    #[test]
    fn masked_perturbation_has_component_parities() {
        let mut p = apply_symmetry_mask(&random_params(11));
        p.phase = 0.0;
        for &(t, beta0) in &[(3.0, 0.4), (17.0, 2.5), (-8.0, 5.0)] {
            let a = trial_delta_n(t, beta0, &p).value;
            let b = trial_delta_n(-t, -beta0, &p).value;
            assert!((a.x + b.x).abs() < 1e-13 && (a.z + b.z).abs() < 1e-13 && (a.y - b.y).abs() < 1e-13);
        }
    }

    fn toy_objective(symmetry: bool) -> Objective {
        let source = FnSource { drive: DriveConfig::default(), n: |t: f64, _b: f64| Vec3::new(0.01 * t, 0.0, 0.0) };
        let grid = QuadratureGrid { beta0_points: 16, ..QuadratureGrid::new(-20.0, 20.0) };
        let sampled = SampledGrid::sample(&source, &grid).unwrap();
        // narrow damping keeps δn negligible at the window edges
        Objective::new(IntegrandKind::FI, sampled, TrialBasis::new(0.5, 2.0, 1, 1), symmetry).unwrap()
    }

    #[test]
    fn objective_at_zero_is_exact_baseline() {
        let obj = toy_objective(true);
        let zero = TrialParams::zero(*obj.basis());
        assert_eq!(obj.value(&zero).to_bits(), obj.base_value().to_bits());
        let x = obj.to_free(&zero);
        assert_eq!(obj.from_free(&x, &zero), zero);
        // φ, c plus the unmasked, non-inert coefficients
        assert_eq!(obj.free_len(), 2 + 3 * (4 + 2));
    }

    #[test]
    fn objective_responds_linearly_to_small_perturbations() {
        // a curved path is not stationary, so the response is first order
        let source = FnSource {
            drive: DriveConfig::default(),
            n: |t: f64, b: f64| Vec3::new(0.01 * t, 0.003 * (t / 3.0 + b).sin(), 0.001 * t.cos()),
        };
        let grid = QuadratureGrid { beta0_points: 16, ..QuadratureGrid::new(-20.0, 20.0) };
        let sampled = SampledGrid::sample(&source, &grid).unwrap();
        let obj = Objective::new(IntegrandKind::FI, sampled, TrialBasis::new(0.5, 2.0, 1, 1), false).unwrap();
        let dir = TrialParams::random(*obj.basis(), 3, 1.0);
        let at = |eps: f64| {
            let mut p = dir.clone();
            p.coeffs.iter_mut().for_each(|c| *c *= eps);
            obj.value(&p) - obj.base_value()
        };
        let (a, b) = (at(1e-7), at(2e-7));
        assert!(a.abs() > 1e-12);
        assert!((b / a - 2.0).abs() < 1e-2, "{a} {b}");
    }

    #[test]
    fn straight_line_rotation_cannot_be_improved() {
        // constant-axis uniform rotation already has minimal path length
        let obj = toy_objective(true);
        let config = MinimizeConfig { max_iters: 30, ..MinimizeConfig::new(IntegrandKind::FI, *obj.grid()) };
        let r = minimize_with(&obj, &toy_objective(true), &config, &TrialParams::zero(*obj.basis())).unwrap();
        assert!(r.improvement <= 1e-12, "{}", r.improvement);
        assert!(r.improvement >= 0.0);
    }
}
