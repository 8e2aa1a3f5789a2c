//! Quadrature rules: Gauss–Legendre (single and composite) and the
//! periodic trapezoid rule.

use std::f64::consts::PI;

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// `n`-point rule; nodes ascending. Newton iteration on `P_n`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            // Tricomi initial guess for the i-th largest root
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre_with_derivative(n, x);
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[n - 1 - i] = x;
            nodes[i] = -x;
            weights[n - 1 - i] = w;
            weights[i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes.iter().zip(&self.weights).map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.mapped(a, b).map(|(t, w)| w * f(t)).sum()
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite rule over consecutive panels `[breaks[i], breaks[i+1]]`.
/// Panels shorter than `1e-12` are skipped.
pub fn composite(rule: &GaussLegendre, breaks: &[f64]) -> Vec<(f64, f64)> {
    breaks
        .windows(2)
        .filter(|w| w[1] - w[0] > 1e-12)
        .flat_map(|w| rule.mapped(w[0], w[1]).collect::<Vec<_>>())
        .collect()
}

/// Panel boundaries on `[lo, hi]` aligned to `anchor + k·period/subdivisions`.
pub fn aligned_breaks(lo: f64, hi: f64, anchor: f64, period: f64, subdivisions: usize) -> Vec<f64> {
    let step = period / subdivisions as f64;
    let first = ((lo - anchor) / step).ceil() as i64;
    let mut breaks = vec![lo];
    let mut k = first;
    loop {
        let b = anchor + k as f64 * step;
        if b >= hi {
            break;
        }
        if b > lo {
            breaks.push(b);
        }
        k += 1;
    }
    breaks.push(hi);
    breaks
}

/// `points` equally spaced angles on `[0, 2π)` with equal weights `2π/points`.
pub fn periodic_trapezoid(points: usize) -> Vec<(f64, f64)> {
    let w = 2.0 * PI / points as f64;
    (0..points).map(|k| (k as f64 * w, w)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_order_rules_match_closed_forms() {
        let r2 = GaussLegendre::new(2);
        assert!((r2.nodes()[1] - 1.0 / 3f64.sqrt()).abs() < 4e-16);
        assert!((r2.weights()[0] - 1.0).abs() < 1e-15);
        let r3 = GaussLegendre::new(3);
        assert!((r3.nodes()[2] - (0.6f64).sqrt()).abs() < 4e-16);
        assert!((r3.weights()[1] - 8.0 / 9.0).abs() < 1e-15);
        assert!((r3.weights()[0] - 5.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn exact_for_polynomials_up_to_degree_2n_minus_1() {
        for n in [4, 8, 16, 24] {
            let rule = GaussLegendre::new(n);
            for deg in 0..2 * n {
                let got = rule.integrate(-0.3, 1.7, |x| x.powi(deg as i32));
                let exact = (1.7f64.powi(deg as i32 + 1) - (-0.3f64).powi(deg as i32 + 1)) / (deg as f64 + 1.0);
                assert!((got - exact).abs() <= 1e-13 * exact.abs().max(1.0), "n={n} deg={deg}");
            }
        }
    }

    #[test]
    fn weights_sum_to_two() {
        for n in 1..40 {
            let s: f64 = GaussLegendre::new(n).weights().iter().sum();
            assert!((s - 2.0).abs() < 1e-14, "n={n}");
        }
    }

    #[test]
    fn aligned_breaks_cover_interval() {
        let b = aligned_breaks(-10.0, 10.0, 1.0, 2.0 * PI, 2);
        assert_eq!(b[0], -10.0);
        assert_eq!(*b.last().unwrap(), 10.0);
        assert!(b.windows(2).all(|w| w[1] > w[0]));
        assert!(b[1..b.len() - 1].iter().all(|x| ((x - 1.0) / PI).round() * PI + 1.0 - x < 1e-12));
    }

    #[test]
    fn trapezoid_is_spectral_for_periodic_functions() {
        let nodes = periodic_trapezoid(16);
        let got: f64 = nodes.iter().map(|(b, w)| w * (b.cos() * 3.0).exp()).sum();
        // 2π I₀(3)
        let exact = 2.0 * PI * 4.880_792_585_865_024;
        assert!((got - exact).abs() < 1e-10 * exact);
    }
}
