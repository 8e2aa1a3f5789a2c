//! Unconstrained minimizers for smooth objectives without analytic
//! gradients: BFGS on central-difference gradients with a strong-Wolfe line
//! search, and Nelder–Mead.

use rayon::prelude::*;

/// Termination state of a minimizer run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// Objective change fell below the tolerance.
    Converged,
    /// Line search could not satisfy the Wolfe conditions.
    LineSearchStalled,
    /// Iteration budget exhausted.
    MaxIterations,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimResult {
    /// Best point seen.
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub termination: Termination,
    /// Best-so-far objective after each iteration.
    pub history: Vec<f64>,
}

impl OptimResult {
    pub fn converged(&self) -> bool {
        self.termination == Termination::Converged
    }
}

/// Central-difference gradient with a uniform step; components are
/// evaluated concurrently and returned in coordinate order.
pub fn fd_gradient<F>(f: &F, x: &[f64], step: f64) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    (0..x.len())
        .into_par_iter()
        .map(|i| {
            let mut probe = x.to_vec();
            probe[i] = x[i] + step;
            let up = f(&probe);
            probe[i] = x[i] - step;
            let down = f(&probe);
            (up - down) / (2.0 * step)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BfgsOptions {
    pub max_iters: usize,
    pub grad_step: f64,
    /// Stop when one iteration lowers `f` by less than this.
    pub f_tolerance: f64,
    /// Stop when `max |∂f|` drops below this.
    pub g_tolerance: f64,
    /// Length of the first trial step along the steepest descent direction.
    pub initial_step: f64,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        BfgsOptions { max_iters: 200, grad_step: 1e-6, f_tolerance: 1e-12, g_tolerance: 1e-12, initial_step: 1e-4 }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(x: &[f64], alpha: f64, p: &[f64]) -> Vec<f64> {
    x.iter().zip(p).map(|(a, b)| a + alpha * b).collect()
}

struct Counted<'a, F> {
    f: &'a F,
    evaluations: std::sync::atomic::AtomicUsize,
}

impl<F: Fn(&[f64]) -> f64 + Sync> Counted<'_, F> {
    fn call(&self, x: &[f64]) -> f64 {
        self.evaluations.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
        (self.f)(x)
    }

    fn count(&self) -> usize {
        self.evaluations.load(std::sync::atomic::Ordering::Relaxed)
    }
}

struct Probe {
    alpha: f64,
    f: f64,
    g: Vec<f64>,
    slope: f64,
}

const WOLFE_DECREASE: f64 = 1e-4;
const WOLFE_CURVATURE: f64 = 0.9;

/// Strong-Wolfe line search along `p` from `(x, f0, slope0)`.
fn line_search<F>(f: &F, x: &[f64], p: &[f64], f0: f64, slope0: f64, alpha0: f64, step: f64) -> Option<Probe>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let eval = |alpha: f64| {
        let point = axpy(x, alpha, p);
        let fx = f(&point);
        let g = fd_gradient(f, &point, step);
        let slope = dot(&g, p);
        Probe { alpha, f: fx, g, slope }
    };
    let mut prev = Probe { alpha: 0.0, f: f0, g: Vec::new(), slope: slope0 };
    let mut alpha = alpha0;
    for i in 0..30 {
        let cur = eval(alpha);
        if cur.f > f0 + WOLFE_DECREASE * alpha * slope0 || (i > 0 && cur.f >= prev.f) {
            return zoom(&eval, prev, cur, f0, slope0);
        }
        if cur.slope.abs() <= -WOLFE_CURVATURE * slope0 {
            return Some(cur);
        }
        if cur.slope >= 0.0 {
            return zoom(&eval, cur, prev, f0, slope0);
        }
        prev = cur;
        alpha *= 2.0;
    }
    None
}

/// Cubic minimizer of the Hermite interpolant through two probes.
fn cubic_step(a: &Probe, b: &Probe) -> Option<f64> {
    let d1 = a.slope + b.slope - 3.0 * (a.f - b.f) / (a.alpha - b.alpha);
    let disc = d1 * d1 - a.slope * b.slope;
    if disc < 0.0 {
        return None;
    }
    let d2 = (b.alpha - a.alpha).signum() * disc.sqrt();
    let denom = b.slope - a.slope + 2.0 * d2;
    if denom == 0.0 {
        return None;
    }
    Some(b.alpha - (b.alpha - a.alpha) * (b.slope + d2 - d1) / denom)
}

fn zoom<E>(eval: &E, mut lo: Probe, mut hi: Probe, f0: f64, slope0: f64) -> Option<Probe>
where
    E: Fn(f64) -> Probe,
{
    for _ in 0..40 {
        let (left, right) = if lo.alpha < hi.alpha { (lo.alpha, hi.alpha) } else { (hi.alpha, lo.alpha) };
        let width = right - left;
        if width <= 1e-16 * right.abs().max(1e-300) {
            break;
        }
        let alpha = cubic_step(&lo, &hi)
            .filter(|a| *a > left + 0.1 * width && *a < right - 0.1 * width)
            .unwrap_or(0.5 * (left + right));
        let cur = eval(alpha);
        if cur.f > f0 + WOLFE_DECREASE * alpha * slope0 || cur.f >= lo.f {
            hi = cur;
        } else {
            if cur.slope.abs() <= -WOLFE_CURVATURE * slope0 {
                return Some(cur);
            }
            if cur.slope * (hi.alpha - lo.alpha) >= 0.0 {
                hi = lo;
            }
            lo = cur;
        }
    }
    // accept a sufficient-decrease point even if curvature is not met
    (lo.alpha > 0.0 && lo.f < f0).then_some(lo)
}

/// BFGS with an inverse-Hessian update and central-difference gradients.
pub fn bfgs<F>(f: &F, x0: &[f64], options: &BfgsOptions) -> OptimResult
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let counted = Counted { f, evaluations: 0.into() };
    let obj = |x: &[f64]| counted.call(x);
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut fx = obj(&x);
    let mut g = fd_gradient(&obj, &x, options.grad_step);
    let mut h_inv = identity(n);
    let mut first = true;
    let mut history = Vec::new();
    let mut termination = Termination::MaxIterations;
    let mut iterations = 0;
    while iterations < options.max_iters {
        if g.iter().all(|v| v.abs() <= options.g_tolerance) {
            termination = Termination::Converged;
            break;
        }
        let mut p = mat_vec(&h_inv, &g).into_iter().map(|v| -v).collect::<Vec<_>>();
        let mut slope = dot(&g, &p);
        if slope >= 0.0 {
            h_inv = identity(n);
            p = g.iter().map(|v| -v).collect();
            slope = dot(&g, &p);
            first = true;
        }
        let p_norm = dot(&p, &p).sqrt();
        let alpha0 = if first { (options.initial_step / p_norm).min(1.0) } else { 1.0 };
        let Some(probe) = line_search(&obj, &x, &p, fx, slope, alpha0, options.grad_step) else {
            termination = Termination::LineSearchStalled;
            break;
        };
        iterations += 1;
        let s: Vec<f64> = p.iter().map(|v| probe.alpha * v).collect();
        let y: Vec<f64> = probe.g.iter().zip(&g).map(|(a, b)| a - b).collect();
        let decrease = fx - probe.f;
        x = axpy(&x, probe.alpha, &p);
        fx = probe.f;
        g = probe.g;
        history.push(fx);
        let sy = dot(&s, &y);
        if sy > 0.0 {
            if first {
                let scale = sy / dot(&y, &y);
                h_inv = identity(n).into_iter().map(|row| row.into_iter().map(|v| v * scale).collect()).collect();
                first = false;
            }
            bfgs_update(&mut h_inv, &s, &y, sy);
        }
        // also require the quadratic model to predict no further progress
        let predicted = 0.5 * dot(&g, &mat_vec(&h_inv, &g));
        if decrease < options.f_tolerance && predicted < options.f_tolerance {
            termination = Termination::Converged;
            break;
        }
    }
    OptimResult { x, f: fx, iterations, evaluations: counted.count(), termination, history }
}

fn identity(n: usize) -> Vec<Vec<f64>> {
    (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
}

fn mat_vec(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    m.iter().map(|row| dot(row, v)).collect()
}

/// `H ← (I − ρ s yᵀ) H (I − ρ y sᵀ) + ρ s sᵀ`, `ρ = 1/(yᵀs)`.
fn bfgs_update(h: &mut [Vec<f64>], s: &[f64], y: &[f64], sy: f64) {
    let rho = 1.0 / sy;
    let hy = mat_vec(h, y);
    let yhy = dot(y, &hy);
    let n = s.len();
    for i in 0..n {
        for j in 0..n {
            h[i][j] += -rho * (s[i] * hy[j] + hy[i] * s[j]) + (rho * rho * yhy + rho) * s[i] * s[j];
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMeadOptions {
    pub max_iters: usize,
    /// Initial simplex edge along each coordinate.
    pub initial_step: Vec<f64>,
    /// Stop when the spread of simplex values falls below this.
    pub f_tolerance: f64,
}

/// Nelder–Mead with standard coefficients (1, 2, ½, ½).
pub fn nelder_mead<F>(f: &F, x0: &[f64], options: &NelderMeadOptions) -> OptimResult
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let n = x0.len();
    let mut evaluations = 0;
    let mut eval = |x: &[f64]| {
        evaluations += 1;
        f(x)
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), eval(x0)));
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += options.initial_step.get(i).copied().unwrap_or(1e-4);
        let fv = eval(&v);
        simplex.push((v, fv));
    }
    let mut history = Vec::new();
    let mut termination = Termination::MaxIterations;
    let mut iterations = 0;
    while iterations < options.max_iters {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = simplex[n].1 - simplex[0].1;
        if spread <= options.f_tolerance {
            termination = Termination::Converged;
            break;
        }
        iterations += 1;
        let centroid: Vec<f64> =
            (0..n).map(|j| simplex[..n].iter().map(|(v, _)| v[j]).sum::<f64>() / n as f64).collect();
        let worst = simplex[n].clone();
        let toward = |coef: f64| -> Vec<f64> {
            centroid.iter().zip(&worst.0).map(|(c, w)| c + coef * (c - w)).collect()
        };
        let reflected = toward(1.0);
        let fr = eval(&reflected);
        if fr < simplex[0].1 {
            let expanded = toward(2.0);
            let fe = eval(&expanded);
            simplex[n] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (reflected, fr);
        } else {
            let (contracted, fc) = if fr < worst.1 {
                let c = toward(0.5);
                let fc = eval(&c);
                (c, fc)
            } else {
                let c = toward(-0.5);
                let fc = eval(&c);
                (c, fc)
            };
            if fc < fr.min(worst.1) {
                simplex[n] = (contracted, fc);
            } else {
                let best = simplex[0].0.clone();
                for vertex in simplex.iter_mut().skip(1) {
                    let v: Vec<f64> = best.iter().zip(&vertex.0).map(|(b, x)| b + 0.5 * (x - b)).collect();
                    let fv = eval(&v);
                    *vertex = (v, fv);
                }
            }
        }
        history.push(simplex.iter().map(|(_, fv)| *fv).fold(f64::INFINITY, f64::min));
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, fx) = simplex.swap_remove(0);
    OptimResult { x, f: fx, iterations, evaluations, termination, history }
}
