//! Problem registry: domains, parameters, residuals and initial/boundary data.
//!
//! Inputs are ordered as spatial coordinates followed by time. The ODE problem
//! has no spatial axis; its single coordinate plays the role of time.

mod residual;

pub use residual::{
    residual_burgers, residual_exp_ode, residual_fisher, residual_heat2d, residual_kdv, residual_toy,
    residual_toy_with, residual_turing1, residual_turing2, FieldDerivs, Residual,
};

use alloc::vec::Vec;
use core::fmt;

use crate::autodiff::Scalar;
use crate::math;

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemError {
    /// Point is neither on the initial slice nor on a boundary face.
    OffManifold,
    /// Empty or inverted interval.
    BadDomain,
    /// Residual evaluated where it is singular.
    Singular(&'static str),
    UnknownId,
}

impl fmt::Display for ProblemError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProblemError::OffManifold => f.write_str("point is not on the initial slice or a boundary face"),
            ProblemError::BadDomain => f.write_str("domain intervals must satisfy lower < upper"),
            ProblemError::Singular(m) => write!(f, "singular residual: {m}"),
            ProblemError::UnknownId => f.write_str("unknown problem id"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ProblemError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProblemId {
    Toy,
    Burgers,
    Heat2d,
    Kdv,
    Fisher,
    Turing1,
    Turing2,
    ExpOde,
}

impl ProblemId {
    pub const ALL: [ProblemId; 8] = [
        ProblemId::Toy,
        ProblemId::Burgers,
        ProblemId::Heat2d,
        ProblemId::Kdv,
        ProblemId::Fisher,
        ProblemId::Turing1,
        ProblemId::Turing2,
        ProblemId::ExpOde,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ProblemId::Toy => "toy",
            ProblemId::Burgers => "burgers",
            ProblemId::Heat2d => "heat2d",
            ProblemId::Kdv => "kdv",
            ProblemId::Fisher => "fisher",
            ProblemId::Turing1 => "turing1-1d",
            ProblemId::Turing2 => "turing2-2d",
            ProblemId::ExpOde => "exp-ode",
        }
    }

    pub fn description(&self) -> &'static str {
        match self {
            ProblemId::Toy => "first-order advection-reaction u_x - 2u_t - u = 0 on [0,2]x[0,1]",
            ProblemId::Burgers => "viscous Burgers equation with sin(pi x) start on [0,1]x[0,0.1]",
            ProblemId::Heat2d => "2-D heat equation with Gaussian start on [-10,10]^2x[0,0.25]",
            ProblemId::Kdv => "coupled Korteweg-de Vries soliton pair on [-250,250]x[0,10]",
            ProblemId::Fisher => "Fisher-KPP logistic front on [-10,10]x[0,1]",
            ProblemId::Turing1 => "1-D bacteria/phagocyte reaction-diffusion system",
            ProblemId::Turing2 => "2-D activator/inhibitor system with cubic term (pattern forming)",
            ProblemId::ExpOde => "exponential growth ODE z' = alpha z",
        }
    }

    pub fn parse(s: &str) -> Result<Self, ProblemError> {
        Self::ALL.iter().copied().find(|p| p.name() == s).ok_or(ProblemError::UnknownId)
    }
}

impl fmt::Display for ProblemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }
}

/// Spatial box times a time interval.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainBox {
    pub space: Vec<Interval>,
    pub time: Interval,
}

impl DomainBox {
    pub fn new(space: Vec<Interval>, time: Interval) -> Result<Self, ProblemError> {
        let ok = |i: &Interval| i.lo < i.hi && i.lo.is_finite() && i.hi.is_finite();
        if !space.iter().all(ok) || !ok(&time) || space.len() > 2 {
            return Err(ProblemError::BadDomain);
        }
        Ok(DomainBox { space, time })
    }

    pub fn space_dim(&self) -> usize {
        self.space.len()
    }

    /// Number of network inputs.
    pub fn dim(&self) -> usize {
        self.space.len() + 1
    }

    /// Interval of input axis `axis` (time is the last axis).
    pub fn axis(&self, axis: usize) -> Interval {
        if axis < self.space.len() {
            self.space[axis]
        } else {
            self.time
        }
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.dim() && (0..self.dim()).all(|a| self.axis(a).contains(p[a]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToyParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Default for ToyParams {
    fn default() -> Self {
        ToyParams { a: 1.0, b: -2.0, c: -1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BurgersParams {
    pub nu: f64,
}

impl Default for BurgersParams {
    fn default() -> Self {
        BurgersParams { nu: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatParams {
    pub alpha: f64,
}

impl Default for HeatParams {
    fn default() -> Self {
        HeatParams { alpha: 2.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KdvParams {
    pub a: f64,
    pub b: f64,
    pub lambda: f64,
}

impl Default for KdvParams {
    fn default() -> Self {
        KdvParams { a: -0.125, b: -3.0, lambda: 0.5 }
    }
}

impl KdvParams {
    pub fn omega(&self) -> f64 {
        -self.b / (8.0 * (4.0 * self.a + 1.0) * math::powi(self.lambda, 4))
    }

    /// Constant phase offset inside the sech argument.
    pub fn phase(&self) -> f64 {
        1.0 / (2.0 * math::ln(self.omega()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FisherParams {
    pub d: f64,
    pub r: f64,
}

impl Default for FisherParams {
    fn default() -> Self {
        FisherParams { d: 1.0, r: 1.0 }
    }
}

/// Bacteria (β) / phagocyte (γ) model constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Turing1Params {
    pub r_b: f64,
    pub r_c: f64,
    pub d_b: f64,
    pub d_c: f64,
    pub b_i: f64,
    pub f_b: f64,
    pub alpha: f64,
    pub s_b: f64,
    pub theta: f64,
    pub k: f64,
}

impl Turing1Params {
    /// Physical values.
    pub fn physical() -> Self {
        Turing1Params {
            r_b: 0.0347,
            r_c: 0.02,
            d_b: 1e-13,
            d_c: 1e-10,
            b_i: 1e17,
            f_b: 0.002,
            alpha: 0.3129,
            s_b: 1e15,
            theta: 0.3,
            k: 0.1,
        }
    }

    /// Nondimensional constants for the 1-D finite-difference runs.
    pub fn fd() -> Self {
        Turing1Params { r_c: 2.0, d_b: 1.0, d_c: 1e5, f_b: 0.2, ..Self::physical() }
    }

    /// Rescaled constants used for network training.
    pub fn pinn() -> Self {
        Turing1Params { b_i: 1e7, s_b: 1e5, ..Self::fd() }
    }

    /// Epithelium porosity rate implied by the steady state β = θ·b_i, γ = k·β.
    pub fn f_e(&self) -> f64 {
        self.alpha * self.theta * self.b_i / ((self.s_b + self.theta * self.b_i) * (1.0 - self.theta))
            - self.r_b / self.k
    }
}

/// Activator/inhibitor constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Turing2Params {
    pub a: f64,
    pub b: f64,
    pub tau: f64,
    pub c: f64,
}

impl Default for Turing2Params {
    fn default() -> Self {
        Turing2Params { a: 2.8e-4, b: 5e-3, tau: 0.1, c: -0.005 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeParams {
    pub alpha: f64,
    pub c: f64,
}

impl Default for OdeParams {
    fn default() -> Self {
        OdeParams { alpha: 2.0, c: 3.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Params {
    Toy(ToyParams),
    Burgers(BurgersParams),
    Heat(HeatParams),
    Kdv(KdvParams),
    Fisher(FisherParams),
    Turing1(Turing1Params),
    Turing2(Turing2Params),
    ExpOde(OdeParams),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryKind {
    Dirichlet,
    /// Zero normal derivative.
    Neumann,
}

/// One side of the spatial box.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Face {
    pub axis: usize,
    pub upper: bool,
}

/// What a data point constrains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Condition {
    /// Field values at t = t₀.
    Initial([f64; 2]),
    /// Field values on a face.
    Dirichlet(Face, [f64; 2]),
    /// Normal derivative (along `face.axis`) on a face.
    Neumann(Face, [f64; 2]),
}

impl Condition {
    pub fn targets(&self) -> [f64; 2] {
        match self {
            Condition::Initial(v) | Condition::Dirichlet(_, v) | Condition::Neumann(_, v) => *v,
        }
    }
}

/// Side length of the Turing-2 noise lattice.
pub const TURING2_CELLS: usize = 100;

/// Seeded uniform noise on [0, 1)² for lattice cell `(i, j)`.
///
/// The finite-difference solver and the network initial data read the same
/// noise so both start from one random state.
pub fn turing2_noise(seed: u64, i: usize, j: usize) -> [f64; 2] {
    let key = seed ^ ((i as u64) << 32 | j as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    let a = splitmix(key);
    let b = splitmix(a ^ 0xD1B5_4A32_D192_ED03);
    [(a >> 11) as f64 / (1u64 << 53) as f64, (b >> 11) as f64 / (1u64 << 53) as f64]
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A fully specified problem instance.
#[derive(Debug, Clone, PartialEq)]
pub struct PdeProblem {
    pub id: ProblemId,
    pub domain: DomainBox,
    pub params: Params,
    pub boundary: BoundaryKind,
    /// Train on the initial slice only (no face data).
    pub ic_only: bool,
    /// Lower time bound for boundary sampling.
    pub boundary_t_min: f64,
    /// Seed of the Turing-2 initial noise.
    pub noise_seed: u64,
    /// Centre of the Turing-1 initial pulse.
    pub pulse_center: f64,
}

impl PdeProblem {
    pub fn preset(id: ProblemId) -> Self {
        let iv = Interval::new;
        let (space, time, params, boundary, t_min) = match id {
            ProblemId::Toy => (
                alloc::vec![iv(0.0, 2.0)],
                iv(0.0, 1.0),
                Params::Toy(ToyParams::default()),
                BoundaryKind::Dirichlet,
                0.0,
            ),
            ProblemId::Burgers => (
                alloc::vec![iv(0.0, 1.0)],
                iv(0.0, 0.1),
                Params::Burgers(BurgersParams::default()),
                BoundaryKind::Dirichlet,
                1e-6,
            ),
            ProblemId::Heat2d => (
                alloc::vec![iv(-10.0, 10.0), iv(-10.0, 10.0)],
                iv(0.0, 0.25),
                Params::Heat(HeatParams::default()),
                BoundaryKind::Dirichlet,
                0.0,
            ),
            ProblemId::Kdv => (
                alloc::vec![iv(-250.0, 250.0)],
                iv(0.0, 10.0),
                Params::Kdv(KdvParams::default()),
                BoundaryKind::Dirichlet,
                1e-3,
            ),
            ProblemId::Fisher => (
                alloc::vec![iv(-10.0, 10.0)],
                iv(0.0, 1.0),
                Params::Fisher(FisherParams::default()),
                BoundaryKind::Dirichlet,
                0.0,
            ),
            ProblemId::Turing1 => (
                alloc::vec![iv(0.0, 3000.0)],
                iv(0.0, 1500.0),
                Params::Turing1(Turing1Params::pinn()),
                BoundaryKind::Neumann,
                0.0,
            ),
            ProblemId::Turing2 => (
                alloc::vec![iv(-1.0, 1.0), iv(-1.0, 1.0)],
                iv(0.0, 10.0),
                Params::Turing2(Turing2Params::default()),
                BoundaryKind::Neumann,
                1e-4,
            ),
            ProblemId::ExpOde => {
                (alloc::vec![], iv(0.0, 1.0), Params::ExpOde(OdeParams::default()), BoundaryKind::Dirichlet, 0.0)
            }
        };
        PdeProblem {
            id,
            domain: DomainBox { space, time },
            params,
            boundary,
            ic_only: false,
            boundary_t_min: t_min,
            noise_seed: 0,
            pulse_center: 1500.0,
        }
    }

    pub fn fields(&self) -> usize {
        match self.id {
            ProblemId::Kdv | ProblemId::Turing1 | ProblemId::Turing2 => 2,
            _ => 1,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn time_axis(&self) -> usize {
        self.domain.space_dim()
    }

    /// Highest derivative order the residual reads along each input axis.
    pub fn deriv_orders(&self) -> Vec<usize> {
        match self.id {
            ProblemId::Toy => alloc::vec![1, 1],
            ProblemId::Burgers | ProblemId::Fisher | ProblemId::Turing1 => alloc::vec![2, 1],
            ProblemId::Heat2d | ProblemId::Turing2 => alloc::vec![2, 2, 1],
            ProblemId::Kdv => alloc::vec![3, 1],
            ProblemId::ExpOde => alloc::vec![1],
        }
    }

    /// Spatial faces that carry boundary data.
    pub fn faces(&self) -> Vec<Face> {
        if self.ic_only {
            return Vec::new();
        }
        (0..self.domain.space_dim())
            .flat_map(|axis| [Face { axis, upper: false }, Face { axis, upper: true }])
            .collect()
    }

    /// PDE residual(s) at one point.
    pub fn residual<S: Scalar>(&self, q: &[FieldDerivs<S>]) -> Result<Residual<S>, ProblemError> {
        let t = self.time_axis();
        Ok(match self.params {
            Params::Toy(p) => {
                let u = &q[0];
                Residual::one(residual_toy_with(u.value, u.get(0, 1), u.get(t, 1), p.a, p.b, p.c))
            }
            Params::Burgers(p) => {
                let u = &q[0];
                Residual::one(residual_burgers(u.value, u.get(0, 1), u.get(t, 1), u.get(0, 2), p.nu))
            }
            Params::Heat(p) => {
                let u = &q[0];
                Residual::one(residual_heat2d(u.get(t, 1), u.get(0, 2), u.get(1, 2), p.alpha))
            }
            Params::Kdv(p) => {
                let pick = |f: &FieldDerivs<S>| [f.value, f.get(0, 1), f.get(t, 1), f.get(0, 3)];
                let (f, g) = residual_kdv(pick(&q[0]), pick(&q[1]), &p);
                Residual::two(f, g)
            }
            Params::Fisher(p) => {
                let u = &q[0];
                Residual::one(residual_fisher(u.value, u.get(t, 1), u.get(0, 2), p.d, p.r))
            }
            Params::Turing1(p) => {
                let (b, c) = (&q[0], &q[1]);
                let (f, g) =
                    residual_turing1(b.value, b.get(t, 1), b.get(0, 2), c.value, c.get(t, 1), c.get(0, 2), &p)?;
                Residual::two(f, g)
            }
            Params::Turing2(p) => {
                let (u, v) = (&q[0], &q[1]);
                let lap = |f: &FieldDerivs<S>| f.get(0, 2) + f.get(1, 2);
                let (f, g) = residual_turing2(u.value, u.get(t, 1), lap(u), v.value, v.get(t, 1), lap(v), &p);
                Residual::two(f, g)
            }
            Params::ExpOde(p) => {
                let z = &q[0];
                Residual::one(residual_exp_ode(z.value, z.get(0, 1), p.alpha))
            }
        })
    }

    /// Initial field values at spatial position `x`.
    pub fn initial_value(&self, x: &[f64]) -> [f64; 2] {
        match self.params {
            Params::Toy(_) => [6.0 * math::exp(-3.0 * x[0]), 0.0],
            Params::Burgers(_) => [math::sin(core::f64::consts::PI * x[0]), 0.0],
            Params::Heat(_) => [math::exp(-x[0] * x[0] - x[1] * x[1]), 0.0],
            Params::Kdv(p) => {
                let (u, v) = crate::oracles::kdv_exact(x[0], 0.0, &p);
                [u, v]
            }
            Params::Fisher(_) => [if x[0] <= 0.0 { 1.0 } else { 0.0 }, 0.0],
            Params::Turing1(p) => {
                let d = x[0] - self.pulse_center;
                [math::exp(-d * d / 10000.0) * p.s_b, 0.0]
            }
            Params::Turing2(_) => {
                let cell = |v: f64, iv: Interval| {
                    let f = (v - iv.lo) / iv.width() * TURING2_CELLS as f64;
                    (math::floor(f).max(0.0) as usize).min(TURING2_CELLS - 1)
                };
                let i = cell(x[1], self.domain.space[1]);
                let j = cell(x[0], self.domain.space[0]);
                turing2_noise(self.noise_seed, i, j)
            }
            Params::ExpOde(p) => [p.c, 0.0],
        }
    }

    /// Boundary datum on `face` at point `p` (space then time).
    pub fn boundary_condition(&self, face: Face, p: &[f64]) -> Condition {
        if self.boundary == BoundaryKind::Neumann {
            return Condition::Neumann(face, [0.0; 2]);
        }
        let t = p[self.time_axis()];
        let v = match self.params {
            Params::Toy(_) => {
                if face.upper {
                    6.0 * math::exp(-6.0 - 2.0 * t)
                } else {
                    6.0 * math::exp(-2.0 * t)
                }
            }
            Params::Heat(h) => crate::oracles::heat2d_exact(p[0], p[1], t, h.alpha),
            Params::Fisher(_) => {
                if face.upper {
                    0.0
                } else {
                    1.0
                }
            }
            _ => 0.0,
        };
        Condition::Dirichlet(face, [v, 0.0])
    }

    /// Data attached to a point on the initial slice or a boundary face.
    pub fn ic_bc_values(&self, p: &[f64]) -> Result<Condition, ProblemError> {
        if p.len() != self.input_dim() || !self.domain.contains(p) {
            return Err(ProblemError::OffManifold);
        }
        let ta = self.time_axis();
        if p[ta] == self.domain.time.lo {
            return Ok(Condition::Initial(self.initial_value(&p[..ta])));
        }
        for face in self.faces() {
            let iv = self.domain.space[face.axis];
            let edge = if face.upper { iv.hi } else { iv.lo };
            if p[face.axis] == edge {
                return Ok(self.boundary_condition(face, p));
            }
        }
        Err(ProblemError::OffManifold)
    }
}
