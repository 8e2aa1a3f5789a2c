#![allow(dead_code)]

use exact_rwa::su2::{exp_su2, PauliVector, RotationVector, Unitary2};
use exact_rwa::Vec3;
use num_complex::Complex64;

/// `i U̇ U†` for `U = exp(-i n·σ)` along `n + s ṅ`, by a fourth-order central stencil.
pub fn generator_fd(n: Vec3, n_dot: Vec3, step: f64) -> PauliVector {
    let u = |s: f64| exp_su2(RotationVector(n + n_dot * s));
    let (p1, m1, p2, m2) = (u(step), u(-step), u(2.0 * step), u(-2.0 * step));
    let mut du = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            du[i][j] = (p1.matrix()[i][j] * 8.0 - m1.matrix()[i][j] * 8.0 - p2.matrix()[i][j] + m2.matrix()[i][j]) / (12.0 * step);
        }
    }
    let m = Unitary2::from_matrix(du).mul(&u(0.0).adjoint());
    let i = Complex64::new(0.0, 1.0);
    let mm = m.matrix();
    PauliVector::from_matrix(&[[i * mm[0][0], i * mm[0][1]], [i * mm[1][0], i * mm[1][1]]])
}

/// Five-point first and second derivatives.
pub fn fd_derivatives<F: Fn(f64) -> f64>(f: F, t: f64, h: f64) -> (f64, f64) {
    let (p1, m1, p2, m2, c) = (f(t + h), f(t - h), f(t + 2.0 * h), f(t - 2.0 * h), f(t));
    let d1 = (8.0 * (p1 - m1) - (p2 - m2)) / (12.0 * h);
    let d2 = (16.0 * (p1 + m1) - (p2 + m2) - 30.0 * c) / (12.0 * h * h);
    (d1, d2)
}
