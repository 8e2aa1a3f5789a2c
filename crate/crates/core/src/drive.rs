//! Drive envelopes and the Hamiltonian families of the driven qubit.
//!
//! All Hamiltonians are returned as Pauli vectors in the frame rotating
//! with the drive. The effective Hamiltonian is a `1/ω` series whose
//! coefficients are stored as data: each term is a rational prefactor times
//! a monomial in the envelope derivatives times a trigonometric polynomial
//! in the gauge angle `β₀`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::su2::PauliVector;
use crate::vec3::Vec3;

/// Highest envelope derivative any listing uses.
pub const MAX_DERIVATIVE: usize = 5;
/// Highest series order in the generic listing.
pub const MAX_GENERIC_ORDER: usize = 5;
/// Highest series order in the constant-envelope listing.
pub const MAX_CONSTANT_ORDER: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianEnvelope {
    pub amplitude: f64,
    pub sigma: f64,
}

impl GaussianEnvelope {
    pub fn new(amplitude: f64, sigma: f64) -> Result<Self> {
        if !(amplitude >= 0.0 && amplitude.is_finite()) {
            return Err(invalid("amplitude", format!("must be finite and non-negative, got {amplitude}")));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(invalid("sigma", format!("must be positive, got {sigma}")));
        }
        Ok(GaussianEnvelope { amplitude, sigma })
    }

    /// `H₁⁽ᵏ⁾(t) = A e^{-x²/2} (-1)^k He_k(x) / σ^k` with `x = t/σ`.
    fn derivatives(&self, t: f64) -> [f64; MAX_DERIVATIVE + 1] {
        let x = t / self.sigma;
        let g = self.amplitude * (-0.5 * x * x).exp();
        let x2 = x * x;
        let hermite = [
            1.0,
            x,
            x2 - 1.0,
            x * (x2 - 3.0),
            x2 * x2 - 6.0 * x2 + 3.0,
            x * (x2 * x2 - 10.0 * x2 + 15.0),
        ];
        let mut out = [0.0; MAX_DERIVATIVE + 1];
        let mut scale = g;
        for (k, he) in hermite.iter().enumerate() {
            out[k] = scale * he;
            scale *= -1.0 / self.sigma;
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantEnvelope {
    pub amplitude: f64,
}

/// Drive amplitude `H₁(t)` with exact derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Envelope {
    Gaussian(GaussianEnvelope),
    Constant(ConstantEnvelope),
}

impl Envelope {
    pub fn gaussian(amplitude: f64, sigma: f64) -> Result<Self> {
        GaussianEnvelope::new(amplitude, sigma).map(Envelope::Gaussian)
    }

    pub fn constant(amplitude: f64) -> Self {
        Envelope::Constant(ConstantEnvelope { amplitude })
    }

    pub fn value(&self, t: f64) -> f64 {
        self.derivatives(t)[0]
    }

    /// `[H₁, Ḣ₁, …, H₁⁽⁵⁾]` at `t`.
    pub fn derivatives(&self, t: f64) -> [f64; MAX_DERIVATIVE + 1] {
        match self {
            Envelope::Gaussian(g) => g.derivatives(t),
            Envelope::Constant(c) => {
                let mut d = [0.0; MAX_DERIVATIVE + 1];
                d[0] = c.amplitude;
                d
            }
        }
    }

    pub fn amplitude(&self) -> f64 {
        match self {
            Envelope::Gaussian(g) => g.amplitude,
            Envelope::Constant(c) => c.amplitude,
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Envelope::Constant(_))
    }

    /// Highest effective-series order available for this envelope.
    pub fn max_series_order(&self) -> usize {
        match self {
            Envelope::Gaussian(_) => MAX_GENERIC_ORDER,
            Envelope::Constant(_) => MAX_CONSTANT_ORDER,
        }
    }
}

/// `k`-th derivative of the envelope at `t`, `k ≤ 5`.
pub fn envelope_deriv(env: &Envelope, t: f64, k: usize) -> Result<f64> {
    if k > MAX_DERIVATIVE {
        return Err(Error::DerivativeOrder(k));
    }
    Ok(env.derivatives(t)[k])
}

/// Drive frequency, detuning and phase offset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveConfig {
    pub omega: f64,
    pub delta: f64,
    pub phi: f64,
}

impl Default for DriveConfig {
    fn default() -> Self {
        DriveConfig { omega: 0.5, delta: 0.0, phi: 0.0 }
    }
}

impl DriveConfig {
    pub fn resonant(omega: f64) -> Result<Self> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(invalid("omega", format!("must be positive, got {omega}")));
        }
        Ok(DriveConfig { omega, delta: 0.0, phi: 0.0 })
    }

    /// Rotating-frame drive period `π/ω`.
    pub fn t_c(&self) -> f64 {
        std::f64::consts::PI / self.omega
    }

    /// `t₀ = β₀/(2ω)`, the first stroboscopic time of gauge `β₀`.
    pub fn gauge_time(&self, beta0: f64) -> f64 {
        beta0 / (2.0 * self.omega)
    }
}

/// Lab-frame Hamiltonian `(ω₀/2) σz + (H₁/2) cos(ωt + φ) σx`, `ω₀ = ω + Δ`.
pub fn h_lab(cfg: &DriveConfig, env: &Envelope, t: f64) -> PauliVector {
    let drive = 0.5 * env.value(t) * (cfg.omega * t + cfg.phi).cos();
    PauliVector::new(drive, 0.0, 0.5 * (cfg.omega + cfg.delta))
}

/// Rotating-frame Hamiltonian.
pub fn h_rot(cfg: &DriveConfig, env: &Envelope, t: f64) -> PauliVector {
    let q = 0.25 * env.value(t);
    let fast = 2.0 * cfg.omega * t + cfg.phi;
    PauliVector::new(
        q * (cfg.phi.cos() + fast.cos()),
        q * (cfg.phi.sin() - fast.sin()),
        0.5 * cfg.delta,
    )
}

/// Rotating-wave Hamiltonian: `h_rot` without the `2ω` terms.
pub fn h_rwa(cfg: &DriveConfig, env: &Envelope, t: f64) -> PauliVector {
    let q = 0.25 * env.value(t);
    PauliVector::new(q * cfg.phi.cos(), q * cfg.phi.sin(), 0.5 * cfg.delta)
}

/// RWA plus the Bloch–Siegert shift, resonant and in phase.
pub fn h_bs_improved(env: &Envelope, t: f64, omega: f64) -> PauliVector {
    let h1 = env.value(t);
    PauliVector::new(0.25 * h1, 0.0, -h1 * h1 / (32.0 * omega))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// One term of the effective series:
/// `(num/den) · Π_j (H₁⁽ʲ⁾)^{powers[j]} / ω^order · Σ_m [cos_m cos(mβ₀) + sin_m sin(mβ₀)]`
/// along `axis`. For the constant listing `powers[0]` is the power of `H₁`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesTerm {
    pub order: u8,
    pub num: i64,
    pub den: i64,
    pub powers: [u8; MAX_DERIVATIVE + 1],
    pub axis: Axis,
    pub cos: [i64; 5],
    pub sin: [i64; 5],
}

const fn term(
    order: u8,
    num: i64,
    den: i64,
    powers: [u8; MAX_DERIVATIVE + 1],
    axis: Axis,
    cos: [i64; 5],
    sin: [i64; 5],
) -> SeriesTerm {
    SeriesTerm { order, num, den, powers, axis, cos, sin }
}

const NONE: [i64; 5] = [0; 5];
const fn p(h0: u8, h1: u8, h2: u8, h3: u8, h4: u8, h5: u8) -> [u8; 6] {
    [h0, h1, h2, h3, h4, h5]
}

use Axis::{X, Y, Z};

/// Effective-series coefficients for an arbitrary smooth envelope, through `1/ω⁵`.
pub static GENERIC_SERIES: &[SeriesTerm] = &[
    term(0, 1, 4, p(1, 0, 0, 0, 0, 0), X, [1, 0, 0, 0, 0], NONE),
    // 1/ω
    term(1, 1, 32, p(2, 0, 0, 0, 0, 0), Z, [1, -2, 0, 0, 0], NONE),
    term(1, 1, 8, p(0, 1, 0, 0, 0, 0), X, NONE, [0, 1, 0, 0, 0]),
    term(1, 1, 8, p(0, 1, 0, 0, 0, 0), Y, [0, 1, 0, 0, 0], NONE),
    // 1/ω²
    term(2, 1, 256, p(3, 0, 0, 0, 0, 0), X, [-2, 2, -1, 0, 0], NONE),
    term(2, 1, 256, p(3, 0, 0, 0, 0, 0), Y, NONE, [0, 2, 1, 0, 0]),
    term(2, 3, 32, p(1, 1, 0, 0, 0, 0), Z, NONE, [0, 1, 0, 0, 0]),
    term(2, 1, 16, p(0, 0, 1, 0, 0, 0), X, [0, 1, 0, 0, 0], NONE),
    term(2, 1, 16, p(0, 0, 1, 0, 0, 0), Y, NONE, [0, -1, 0, 0, 0]),
    // 1/ω³
    term(3, 1, 2048, p(4, 0, 0, 0, 0, 0), Z, [1, -2, -3, 0, 0], NONE),
    term(3, 1, 1024, p(2, 1, 0, 0, 0, 0), X, NONE, [0, -12, 9, 0, 0]),
    term(3, 1, 1024, p(2, 1, 0, 0, 0, 0), Y, [-8, 36, 9, 0, 0], NONE),
    term(3, 1, 128, p(0, 2, 0, 0, 0, 0), Z, [1, 6, 0, 0, 0], NONE),
    term(3, 1, 64, p(1, 0, 1, 0, 0, 0), Z, [-1, 4, 0, 0, 0], NONE),
    term(3, -1, 32, p(0, 0, 0, 1, 0, 0), X, NONE, [0, 1, 0, 0, 0]),
    term(3, -1, 32, p(0, 0, 0, 1, 0, 0), Y, [0, 1, 0, 0, 0], NONE),
    // 1/ω⁴
    term(4, 1, 16384, p(5, 0, 0, 0, 0, 0), X, [-9, 5, -1, -1, 0], NONE),
    term(4, 1, 16384, p(5, 0, 0, 0, 0, 0), Y, NONE, [0, 5, 4, 1, 0]),
    term(4, 45, 8192, p(3, 1, 0, 0, 0, 0), Z, NONE, [0, 2, 1, 0, 0]),
    term(4, 5, 2048, p(1, 2, 0, 0, 0, 0), X, [0, -4, 3, 0, 0], NONE),
    term(4, 5, 2048, p(1, 2, 0, 0, 0, 0), Y, NONE, [0, -20, -3, 0, 0]),
    term(4, 5, 4096, p(2, 0, 1, 0, 0, 0), X, [8, -8, 5, 0, 0], NONE),
    term(4, 5, 4096, p(2, 0, 1, 0, 0, 0), Y, NONE, [0, -24, -5, 0, 0]),
    term(4, -5, 64, p(0, 1, 1, 0, 0, 0), Z, NONE, [0, 1, 0, 0, 0]),
    term(4, -5, 128, p(1, 0, 0, 1, 0, 0), Z, NONE, [0, 1, 0, 0, 0]),
    term(4, 1, 64, p(0, 0, 0, 0, 1, 0), X, [0, -1, 0, 0, 0], NONE),
    term(4, 1, 64, p(0, 0, 0, 0, 1, 0), Y, NONE, [0, 1, 0, 0, 0]),
    // 1/ω⁵
    term(5, 1, 786432, p(6, 0, 0, 0, 0, 0), Z, [-9, 18, -60, -10, 0], NONE),
    term(5, 1, 196608, p(4, 1, 0, 0, 0, 0), X, NONE, [0, -285, 150, 55, 0]),
    term(5, 1, 196608, p(4, 1, 0, 0, 0, 0), Y, [-297, 825, 330, 55, 0], NONE),
    term(5, 1, 32768, p(2, 2, 0, 0, 0, 0), Z, [-104, 1000, 285, 0, 0], NONE),
    term(5, 1, 8192, p(0, 3, 0, 0, 0, 0), X, NONE, [0, 40, -15, 0, 0]),
    term(5, 1, 8192, p(0, 3, 0, 0, 0, 0), Y, [-24, -200, -15, 0, 0], NONE),
    term(5, 3, 16384, p(3, 0, 1, 0, 0, 0), Z, [-16, 65, 25, 0, 0], NONE),
    term(5, 1, 8192, p(1, 1, 1, 0, 0, 0), X, NONE, [0, 160, -95, 0, 0]),
    term(5, 1, 8192, p(1, 1, 1, 0, 0, 0), Y, [72, -800, -95, 0, 0], NONE),
    term(5, 1, 512, p(0, 0, 2, 0, 0, 0), Z, [1, -20, 0, 0, 0], NONE),
    term(5, 1, 16384, p(2, 0, 0, 1, 0, 0), X, NONE, [0, 80, -65, 0, 0]),
    term(5, 1, 16384, p(2, 0, 0, 1, 0, 0), Y, [64, -400, -65, 0, 0], NONE),
    term(5, 1, 256, p(0, 1, 0, 1, 0, 0), Z, [-1, -15, 0, 0, 0], NONE),
    term(5, 1, 256, p(1, 0, 0, 0, 1, 0), Z, [1, -6, 0, 0, 0], NONE),
    term(5, 1, 128, p(0, 0, 0, 0, 0, 1), X, NONE, [0, 1, 0, 0, 0]),
    term(5, 1, 128, p(0, 0, 0, 0, 0, 1), Y, [0, 1, 0, 0, 0], NONE),
];

/// Effective-series coefficients for a constant envelope, through `1/ω⁷`.
pub static CONSTANT_SERIES: &[SeriesTerm] = &[
    term(0, 1, 4, p(1, 0, 0, 0, 0, 0), X, [1, 0, 0, 0, 0], NONE),
    term(1, 1, 32, p(2, 0, 0, 0, 0, 0), Z, [1, -2, 0, 0, 0], NONE),
    term(2, 1, 256, p(3, 0, 0, 0, 0, 0), X, [-2, 2, -1, 0, 0], NONE),
    term(2, 1, 256, p(3, 0, 0, 0, 0, 0), Y, NONE, [0, 2, 1, 0, 0]),
    term(3, 1, 2048, p(4, 0, 0, 0, 0, 0), Z, [1, -2, -3, 0, 0], NONE),
    term(4, 1, 16384, p(5, 0, 0, 0, 0, 0), X, [-9, 5, -1, -1, 0], NONE),
    term(4, 1, 16384, p(5, 0, 0, 0, 0, 0), Y, NONE, [0, 5, 4, 1, 0]),
    term(5, 1, 786432, p(6, 0, 0, 0, 0, 0), Z, [-9, 18, -60, -10, 0], NONE),
    term(6, 1, 37748736, p(7, 0, 0, 0, 0, 0), X, [-1224, 252, 84, -120, -15], NONE),
    term(6, 1, 37748736, p(7, 0, 0, 0, 0, 0), Y, NONE, [0, 252, 336, 160, 15]),
    term(7, 1, 1811939328, p(8, 0, 0, 0, 0, 0), Z, [-5076, 10152, -4368, -1540, -105], NONE),
];

/// Which printed listing a series is drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Listing {
    Generic,
    Constant,
}

impl Listing {
    pub fn terms(self) -> &'static [SeriesTerm] {
        match self {
            Listing::Generic => GENERIC_SERIES,
            Listing::Constant => CONSTANT_SERIES,
        }
    }

    pub fn max_order(self) -> usize {
        match self {
            Listing::Generic => MAX_GENERIC_ORDER,
            Listing::Constant => MAX_CONSTANT_ORDER,
        }
    }
}

/// Truncation order of the effective series, validated against the envelope.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EffSeriesOrder(usize);

impl EffSeriesOrder {
    pub fn new(order: usize, env: &Envelope) -> Result<Self> {
        let max = env.max_series_order();
        if order > max {
            return Err(Error::SeriesOrder { order, max });
        }
        Ok(EffSeriesOrder(order))
    }

    pub fn get(self) -> usize {
        self.0
    }
}

/// Deliberate corruptions of the coefficient table for mutation testing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Mutation {
    #[default]
    None,
    /// Negates every `1/ω²` term.
    FlipSecondOrder,
}

/// Effective Hamiltonian at fixed envelope, drive frequency and order.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveHamiltonian {
    env: Envelope,
    omega: f64,
    terms: Vec<SeriesTerm>,
}

impl EffectiveHamiltonian {
    /// Picks the constant listing for constant envelopes and the generic one otherwise.
    pub fn new(env: Envelope, omega: f64, order: EffSeriesOrder) -> Result<Self> {
        let listing = if env.is_constant() { Listing::Constant } else { Listing::Generic };
        Self::with_listing(env, omega, order.get(), listing, Mutation::None)
    }

    pub fn with_listing(
        env: Envelope,
        omega: f64,
        order: usize,
        listing: Listing,
        mutation: Mutation,
    ) -> Result<Self> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(invalid("omega", format!("must be positive, got {omega}")));
        }
        if order > listing.max_order() {
            return Err(Error::SeriesOrder { order, max: listing.max_order() });
        }
        if listing == Listing::Constant && !env.is_constant() {
            return Err(invalid("listing", "the constant listing needs a constant envelope"));
        }
        let terms = listing
            .terms()
            .iter()
            .filter(|t| usize::from(t.order) <= order)
            .map(|t| {
                let mut t = *t;
                if mutation == Mutation::FlipSecondOrder && t.order == 2 {
                    t.num = -t.num;
                }
                t
            })
            .collect();
        Ok(EffectiveHamiltonian { env, omega, terms })
    }

    pub fn envelope(&self) -> &Envelope {
        &self.env
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// Fixes the gauge angle, folding all `β₀`-dependence into per-term weights.
    pub fn at_gauge(&self, beta0: f64) -> GaugedEffective {
        // (sin mβ₀, cos mβ₀) for m = 0..4
        let harmonics: Vec<(f64, f64)> = (0..5).map(|m| (m as f64 * beta0).sin_cos()).collect();
        let terms = self
            .terms
            .iter()
            .filter_map(|t| {
                let trig: f64 = (0..5)
                    .map(|m| t.cos[m] as f64 * harmonics[m].1 + t.sin[m] as f64 * harmonics[m].0)
                    .sum();
                let weight = t.num as f64 / t.den as f64 * trig / self.omega.powi(i32::from(t.order));
                (weight != 0.0).then_some(GaugedTerm { weight, powers: t.powers, axis: t.axis })
            })
            .collect();
        GaugedEffective { env: self.env, terms }
    }

    pub fn at(&self, t: f64, beta0: f64) -> PauliVector {
        self.at_gauge(beta0).at(t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct GaugedTerm {
    weight: f64,
    powers: [u8; MAX_DERIVATIVE + 1],
    axis: Axis,
}

/// Effective Hamiltonian at a fixed gauge angle; a function of time only.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugedEffective {
    env: Envelope,
    terms: Vec<GaugedTerm>,
}

impl GaugedEffective {
    pub fn at(&self, t: f64) -> PauliVector {
        let d = self.env.derivatives(t);
        let mut h = [0.0; 3];
        for term in &self.terms {
            let monomial: f64 = term
                .powers
                .iter()
                .zip(d.iter())
                .filter(|(&p, _)| p > 0)
                .map(|(&p, &v)| v.powi(i32::from(p)))
                .product();
            let slot = match term.axis {
                Axis::X => 0,
                Axis::Y => 1,
                Axis::Z => 2,
            };
            h[slot] += term.weight * monomial;
        }
        PauliVector(Vec3::from_array(h))
    }
}

/// One-shot evaluation of the effective Hamiltonian.
pub fn h_eff(env: &Envelope, t: f64, beta0: f64, order: EffSeriesOrder, omega: f64) -> Result<PauliVector> {
    Ok(EffectiveHamiltonian::new(*env, omega, order)?.at(t, beta0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetryReport {
    pub max_violation: f64,
    /// `(t, β₀)` of the largest violation.
    pub worst: (f64, f64),
    pub samples: usize,
}

/// Checks `h_x, h_z` even and `h_y` odd under `(t, β₀) → (-t, -β₀)`.
pub fn symmetry_check<F>(h_fn: F, samples: &[(f64, f64)]) -> SymmetryReport
where
    F: Fn(f64, f64) -> PauliVector,
{
    let mut report = SymmetryReport { max_violation: 0.0, worst: (0.0, 0.0), samples: samples.len() };
    for &(t, beta0) in samples {
        let a = h_fn(t, beta0).0;
        let b = h_fn(-t, -beta0).0;
        let violation = (a.x - b.x).abs().max((a.y + b.y).abs()).max((a.z - b.z).abs());
        if violation > report.max_violation {
            report.max_violation = violation;
            report.worst = (t, beta0);
        }
    }
    report
}
