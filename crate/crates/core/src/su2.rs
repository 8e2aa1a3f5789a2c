//! SU(2) algebra in the Pauli basis.
//!
//! Every traceless Hermitian generator is stored as its Pauli coefficient
//! vector `h` with `H = h·σ`, and every group element as a 2×2 complex
//! matrix. Rotation vectors `n` parameterize `U = exp(-i n·σ)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::vec3::Vec3;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Below this angle the dexp coefficients switch to their Taylor series.
const SERIES_ANGLE: f64 = 0.05;
/// `sin α` below this value marks a branch point of the logarithm.
pub const BRANCH_THRESHOLD: f64 = 1e-8;
/// Angles below this use the small-angle limit of the dexp map.
pub const SMALL_ANGLE: f64 = 1e-6;
/// `|dn̂/dt|` below this makes the kinematic frame degenerate.
pub const DEGENERATE_SPEED: f64 = 1e-10;

/// Pauli coefficients of a traceless Hermitian operator `H = h·σ`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PauliVector(pub Vec3);

impl PauliVector {
    pub const ZERO: PauliVector = PauliVector(Vec3::ZERO);

    pub const fn new(hx: f64, hy: f64, hz: f64) -> Self {
        PauliVector(Vec3::new(hx, hy, hz))
    }

    pub fn vec(self) -> Vec3 {
        self.0
    }

    /// Dense matrix `h·σ`.
    pub fn to_matrix(self) -> [[Complex64; 2]; 2] {
        let Vec3 { x, y, z } = self.0;
        [
            [Complex64::new(z, 0.0), Complex64::new(x, -y)],
            [Complex64::new(x, y), Complex64::new(-z, 0.0)],
        ]
    }

    /// Projection of an arbitrary 2×2 matrix onto the Pauli basis,
    /// `h_j = Re tr(M σ_j) / 2`. The identity component is discarded.
    pub fn from_matrix(m: &[[Complex64; 2]; 2]) -> Self {
        let hx = 0.5 * (m[0][1] + m[1][0]).re;
        let hy = 0.5 * (I * (m[0][1] - m[1][0])).re;
        let hz = 0.5 * (m[0][0] - m[1][1]).re;
        PauliVector::new(hx, hy, hz)
    }
}

/// Element of SU(2) as a dense 2×2 complex matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Unitary2 {
    m: [[Complex64; 2]; 2],
}

impl Unitary2 {
    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Unitary2 { m: [[one, zero], [zero, one]] }
    }

    /// Wraps a matrix without checking unitarity.
    pub fn from_matrix(m: [[Complex64; 2]; 2]) -> Self {
        Unitary2 { m }
    }

    pub fn matrix(&self) -> &[[Complex64; 2]; 2] {
        &self.m
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.m;
        Unitary2 {
            m: [[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]],
        }
    }

    pub fn mul(&self, other: &Unitary2) -> Unitary2 {
        let a = &self.m;
        let b = &other.m;
        let mut m = [[Complex64::new(0.0, 0.0); 2]; 2];
        for (r, row) in m.iter_mut().enumerate() {
            for (c, entry) in row.iter_mut().enumerate() {
                *entry = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        Unitary2 { m }
    }

    pub fn trace(&self) -> Complex64 {
        self.m[0][0] + self.m[1][1]
    }

    pub fn det(&self) -> Complex64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    /// Largest entrywise deviation of `U†U` from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        let p = self.adjoint().mul(self);
        let id = Unitary2::identity();
        let mut worst: f64 = 0.0;
        for r in 0..2 {
            for c in 0..2 {
                worst = worst.max((p.m[r][c] - id.m[r][c]).norm());
            }
        }
        worst
    }

    /// Spectral norm of `self - other`.
    pub fn distance(&self, other: &Unitary2) -> f64 {
        let mut d = [[Complex64::new(0.0, 0.0); 2]; 2];
        for (r, row) in d.iter_mut().enumerate() {
            for (c, entry) in row.iter_mut().enumerate() {
                *entry = self.m[r][c] - other.m[r][c];
            }
        }
        spectral_norm(&d)
    }

    /// First column, i.e. the image of `|0⟩`.
    pub fn apply_to_ground(&self) -> [Complex64; 2] {
        [self.m[0][0], self.m[1][0]]
    }
}

/// Largest singular value of a 2×2 complex matrix.
pub fn spectral_norm(m: &[[Complex64; 2]; 2]) -> f64 {
    // Eigenvalues of the Hermitian Gram matrix M†M.
    let g00 = m[0][0].norm_sqr() + m[1][0].norm_sqr();
    let g11 = m[0][1].norm_sqr() + m[1][1].norm_sqr();
    let g01 = m[0][0].conj() * m[0][1] + m[1][0].conj() * m[1][1];
    let mean = 0.5 * (g00 + g11);
    let half_gap = (0.5 * (g00 - g11)).hypot(g01.norm());
    (mean + half_gap).max(0.0).sqrt()
}

/// Rotation vector `n = α n̂` with `U = exp(-i n·σ)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RotationVector(pub Vec3);

impl RotationVector {
    pub const ZERO: RotationVector = RotationVector(Vec3::ZERO);

    pub fn vec(self) -> Vec3 {
        self.0
    }

    pub fn angle(self) -> f64 {
        self.0.norm()
    }

    /// Unit axis; `(1, 0, 0)` at zero angle.
    pub fn axis(self) -> Vec3 {
        let a = self.angle();
        if a > 0.0 {
            self.0 / a
        } else {
            Vec3::X
        }
    }
}

/// Where a logarithm sits relative to the branch points `U = ±1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BranchStatus {
    Regular,
    /// `α` within the threshold of 0.
    NearIdentity,
    /// `α` within the threshold of π.
    NearMinusIdentity,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuLog {
    pub n: RotationVector,
    pub branch: BranchStatus,
}

/// `exp(-i n·σ) = cos α · 1 - i sin α · n̂·σ`.
pub fn exp_su2(n: RotationVector) -> Unitary2 {
    let alpha = n.angle();
    if alpha == 0.0 {
        return Unitary2::identity();
    }
    let (s, c) = alpha.sin_cos();
    let v = n.0 * (s / alpha);
    Unitary2::from_matrix([
        [Complex64::new(c, -v.z), Complex64::new(-v.y, -v.x)],
        [Complex64::new(v.y, -v.x), Complex64::new(c, v.z)],
    ])
}

/// Principal logarithm, `α ∈ [0, π]`.
pub fn log_su2(u: &Unitary2) -> SuLog {
    let m = u.matrix();
    let c = 0.5 * (m[0][0] + m[1][1]).re;
    // sin α · n̂_j = Re[(i/2) tr(U σ_j)]
    let v = Vec3::new(
        0.5 * (I * (m[0][1] + m[1][0])).re,
        -0.5 * (m[0][1] - m[1][0]).re,
        0.5 * (I * (m[0][0] - m[1][1])).re,
    );
    let s = v.norm();
    let alpha = s.atan2(c);
    let branch = if s < BRANCH_THRESHOLD {
        if c > 0.0 {
            BranchStatus::NearIdentity
        } else {
            BranchStatus::NearMinusIdentity
        }
    } else {
        BranchStatus::Regular
    };
    let n = if s > 0.0 {
        v * (alpha / s)
    } else {
        Vec3::X * alpha
    };
    SuLog { n: RotationVector(n), branch }
}

/// `|h|`, the positive eigenvalue of `h·σ` (equal to `sqrt(-det(h·σ))`).
pub fn positive_eigenvalue(h: PauliVector) -> f64 {
    h.0.norm()
}

/// Smooth scalar coefficients of the dexp map `J(n)` and their reduced
/// angular derivatives `(dX/dα)/α`.
#[derive(Debug, Clone, Copy)]
struct DexpCoefficients {
    s: f64,
    p: f64,
    q: f64,
    ds: f64,
    dp: f64,
    dq: f64,
}

impl DexpCoefficients {
    fn at(alpha: f64) -> Self {
        let a2 = alpha * alpha;
        if alpha < SERIES_ANGLE {
            let a4 = a2 * a2;
            let a6 = a4 * a2;
            let a8 = a4 * a4;
            DexpCoefficients {
                s: 1.0 - 2.0 * a2 / 3.0 + 2.0 * a4 / 15.0 - 4.0 * a6 / 315.0 + 2.0 * a8 / 2835.0,
                p: 2.0 / 3.0 - 2.0 * a2 / 15.0 + 4.0 * a4 / 315.0 - 2.0 * a6 / 2835.0
                    + 4.0 * a8 / 155925.0,
                q: 1.0 - a2 / 3.0 + 2.0 * a4 / 45.0 - a6 / 315.0 + 2.0 * a8 / 14175.0,
                ds: -4.0 / 3.0 + 8.0 * a2 / 15.0 - 24.0 * a4 / 315.0 + 16.0 * a6 / 2835.0
                    - 8.0 * a8 / 31185.0,
                dp: -4.0 / 15.0 + 16.0 * a2 / 315.0 - 12.0 * a4 / 2835.0 + 32.0 * a6 / 155925.0,
                dq: -2.0 / 3.0 + 8.0 * a2 / 45.0 - 6.0 * a4 / 315.0 + 16.0 * a6 / 14175.0
                    - 4.0 * a8 / 93555.0,
            }
        } else {
            let s1 = alpha.sin();
            let (s2, c2) = (2.0 * alpha).sin_cos();
            let s = s2 / (2.0 * alpha);
            let ds = (2.0 * alpha * c2 - s2) / (2.0 * a2 * alpha);
            DexpCoefficients {
                s,
                p: (1.0 - s) / a2,
                q: s1 * s1 / a2,
                ds,
                dp: -ds / a2 - 2.0 * (1.0 - s) / (a2 * a2),
                dq: (alpha * s2 - 2.0 * s1 * s1) / (a2 * a2),
            }
        }
    }
}

/// Hamiltonian generating a trajectory `n(t)`: `h·σ = i U̇ U†`.
///
/// Uses the angle/axis form `½ sin2α dn̂ + ½(1 - cos2α) n̂×dn̂ + α̇ n̂`
/// for `α ≥ 1e-6` and the analytic small-angle limit below. Flipping the
/// sign of the cross term gives `i U†U̇` instead, which is conjugate to this
/// generator and has the same eigenvalues, also after differentiation.
pub fn dexp_hamiltonian(n: RotationVector, n_dot: Vec3) -> PauliVector {
    let alpha = n.angle();
    if alpha < SMALL_ANGLE {
        return dexp_apply(n, n_dot);
    }
    let nhat = n.0 / alpha;
    let alpha_dot = nhat.dot(n_dot);
    let nhat_dot = (n_dot - nhat * alpha_dot) / alpha;
    let half_sin2 = 0.5 * (2.0 * alpha).sin();
    // ½(1 - cos 2α) = sin²α, evaluated without cancellation
    let half_one_minus_cos2 = alpha.sin().powi(2);
    PauliVector(nhat_dot * half_sin2 + nhat.cross(nhat_dot) * half_one_minus_cos2 + nhat * alpha_dot)
}

/// Same map written as `J(n) ṅ = s ṅ + p (n·ṅ) n + q n×ṅ`, analytic in `n`.
pub fn dexp_apply(n: RotationVector, n_dot: Vec3) -> PauliVector {
    let k = DexpCoefficients::at(n.angle());
    let v = n.0;
    PauliVector(n_dot * k.s + v * (k.p * v.dot(n_dot)) + v.cross(n_dot) * k.q)
}

/// Time derivative of [`dexp_apply`] along `(n, ṅ, n̈)`.
pub fn dexp_rate(n: RotationVector, n_dot: Vec3, n_ddot: Vec3) -> PauliVector {
    let k = DexpCoefficients::at(n.angle());
    let v = n.0;
    let radial = v.dot(n_dot);
    // d/dt X(α) = (X'(α)/α)(n·ṅ)
    let s_dot = k.ds * radial;
    let p_dot = k.dp * radial;
    let q_dot = k.dq * radial;
    let h_dot = n_dot * s_dot
        + n_ddot * k.s
        + v * (p_dot * radial + k.p * (n_dot.norm_sq() + v.dot(n_ddot)))
        + n_dot * (k.p * radial)
        + v.cross(n_dot) * q_dot
        + v.cross(n_ddot) * k.q;
    PauliVector(h_dot)
}

/// Inverse of the dexp map: `ṅ = (n̂·h) n̂ + α cot α h_⊥ - n×h`.
///
/// Defined for `α < π`.
pub fn dexp_inverse(n: RotationVector, h: PauliVector) -> Vec3 {
    let alpha = n.angle();
    let h = h.0;
    if alpha == 0.0 {
        return h;
    }
    let nhat = n.0 / alpha;
    let par = nhat * nhat.dot(h);
    let a2 = alpha * alpha;
    let alpha_cot = if alpha < SERIES_ANGLE {
        1.0 - a2 / 3.0 - a2 * a2 / 45.0 - 2.0 * a2 * a2 * a2 / 945.0
    } else {
        alpha / alpha.tan()
    };
    par + (h - par) * alpha_cot - n.0.cross(h)
}

/// Moving frame of a unit-vector path `n̂(t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KinematicFrame {
    pub nhat: Vec3,
    /// `|dn̂/dt|`
    pub n_v: f64,
    pub nhat_v: Vec3,
    /// `n̂_v × n̂`
    pub nhat_perp: Vec3,
    /// Acceleration `n_a = dn̂_v/dt` projected on `n̂`.
    pub a_par: f64,
    /// Acceleration `n_a` projected on `n̂_⊥`.
    pub a_perp: f64,
    /// `d|dn̂/dt|/dt`
    pub n_v_dot: f64,
    /// Set when `n_v` is below [`DEGENERATE_SPEED`].
    pub degenerate: bool,
    /// Norm of `d²n̂ - [ṅ_v n̂_v + n_v (a_par n̂ + a_perp n̂_⊥)]`.
    pub residual: f64,
}

/// Builds the frame from analytic derivatives of a unit path.
///
/// When the path is momentarily at rest the direction `n̂_v` is taken from
/// `fallback` (typically the previous sample), projected off `n̂`.
pub fn unit_kinematics(
    nhat: Vec3,
    nhat_dot: Vec3,
    nhat_ddot: Vec3,
    fallback: Option<Vec3>,
) -> KinematicFrame {
    let n_v = nhat_dot.norm();
    if n_v < DEGENERATE_SPEED {
        let nhat_v = fallback
            .map(|d| d - nhat * nhat.dot(d))
            .filter(|d| d.norm() > 1e-12)
            .unwrap_or_else(|| any_perpendicular(nhat));
        let nhat_v = nhat_v / nhat_v.norm();
        let nhat_perp = nhat_v.cross(nhat);
        let n_v_dot = nhat_ddot.dot(nhat_v);
        return KinematicFrame {
            nhat,
            n_v,
            nhat_v,
            nhat_perp,
            a_par: 0.0,
            a_perp: 0.0,
            n_v_dot,
            degenerate: true,
            residual: (nhat_ddot - nhat_v * n_v_dot).norm(),
        };
    }
    let nhat_v = nhat_dot / n_v;
    let nhat_perp = nhat_v.cross(nhat);
    let n_v_dot = nhat_dot.dot(nhat_ddot) / n_v;
    let accel = (nhat_ddot - nhat_v * n_v_dot) / n_v;
    let a_par = accel.dot(nhat);
    let a_perp = accel.dot(nhat_perp);
    let rebuilt = nhat_v * n_v_dot + (nhat * a_par + nhat_perp * a_perp) * n_v;
    KinematicFrame {
        nhat,
        n_v,
        nhat_v,
        nhat_perp,
        a_par,
        a_perp,
        n_v_dot,
        degenerate: false,
        residual: (nhat_ddot - rebuilt).norm(),
    }
}

/// Frame of a sampled unit path using central differences with step `h`.
pub fn unit_kinematics_fd<F>(path: F, t: f64, h: f64, fallback: Option<Vec3>) -> KinematicFrame
where
    F: Fn(f64) -> Vec3,
{
    let prev = path(t - h);
    let mid = path(t);
    let next = path(t + h);
    let d1 = (next - prev) / (2.0 * h);
    let d2 = (next - mid * 2.0 + prev) / (h * h);
    unit_kinematics(mid, d1, d2, fallback)
}

fn any_perpendicular(v: Vec3) -> Vec3 {
    let trial = if v.x.abs() < 0.9 { Vec3::X } else { Vec3::Y };
    let p = trial - v * v.dot(trial);
    p / p.norm()
}
