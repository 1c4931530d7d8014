//! The regular solution `θ` and the Jost solution `φ` at complex spectral
//! parameter `z`.
//!
//! `θ` solves `-ψ'' + qψ = (z² - iγ)ψ`, `ψ(0) = 0`, `ψ'(0) = 1`. `φ` solves
//! `-ψ'' + qψ = z²ψ` with `φ(x) ~ e^{izx}` as `x → ∞`; it is obtained by
//! integrating downwards from a point `x_∞` past which the tail of `q` is
//! negligible, where `e^{izx}` is the dominant direction for `Im z > 0`.
//!
//! How the equations are propagated is a [`Propagator`] strategy, selected
//! by name from a [`PropagatorRegistry`].

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::math::{sqrt_upper, Scaled};
use crate::ode::{free_transfer, LinearSchrodinger, Magnus, ScaledPair};
use crate::potentials::Potential;

pub const DEFAULT_RTOL: f64 = 1e-10;
pub const DEFAULT_TAIL_TOL: f64 = 1e-12;

/// `H_R = -d²/dx² + q + iγχ_[0,R]` on the half-line with a Dirichlet
/// condition at 0.
#[derive(Debug, Clone)]
pub struct Problem {
    pub q: Potential,
    gamma: f64,
    r: f64,
}

impl Problem {
    pub fn new(q: Potential, gamma: f64, r: f64) -> Result<Self> {
        if !(gamma >= 0.0) || !gamma.is_finite() {
            return Err(Error::validation("gamma", "must be finite and ≥ 0"));
        }
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::validation("R", "must be finite and > 0"));
        }
        Ok(Self { q, gamma, r })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// Whether `q` vanishes on `[R, ∞)`, making `f_R` entire.
    pub fn compact_within_barrier(&self) -> bool {
        self.q.support_bound().is_some_and(|qb| qb <= self.r)
    }

    pub fn with_r(&self, r: f64) -> Result<Self> {
        Self::new(self.q.clone(), self.gamma, r)
    }
}

/// `(ψ(x), ψ'(x))` with a step-doubling error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolutionSample {
    pub value: Complex64,
    pub derivative: Complex64,
    pub x: f64,
    pub est_error: f64,
}

impl SolutionSample {
    fn from_pair(pair: ScaledPair, x: f64, est_error: f64) -> Result<Self> {
        let (value, derivative) = pair.unscaled();
        if !(value.re.is_finite() && value.im.is_finite() && derivative.re.is_finite() && derivative.im.is_finite()) {
            return Err(Error::Overflow(format!(
                "solution at x = {x} exceeds the f64 range (ln scale {})",
                pair.ln_scale
            )));
        }
        Ok(Self { value, derivative, x, est_error })
    }
}

/// How the regular and Jost solutions are propagated.
pub trait Propagator: Send + Sync + fmt::Debug {
    fn name(&self) -> &'static str;

    /// `(ψ, ψ')(x_end)` for `ψ'' = (q - energy)ψ`, `ψ(0) = 0`, `ψ'(0) = 1`.
    fn regular(&self, q: &Potential, energy: Complex64, x_end: f64) -> Result<ScaledPair>;

    /// `(φ, φ')(x)` for the Jost solution at `z`.
    fn jost(&self, q: &Potential, z: Complex64, x: f64) -> Result<ScaledPair>;
}

/// Integrates every interval with the adaptive Runge–Kutta pair, including
/// stretches where `q` vanishes.
#[derive(Debug, Clone, Copy)]
pub struct RungeKutta {
    pub rtol: f64,
    pub tail_tol: f64,
}

impl Default for RungeKutta {
    fn default() -> Self {
        Self { rtol: DEFAULT_RTOL, tail_tol: DEFAULT_TAIL_TOL }
    }
}

impl Propagator for RungeKutta {
    fn name(&self) -> &'static str {
        "rk"
    }

    fn regular(&self, q: &Potential, energy: Complex64, x_end: f64) -> Result<ScaledPair> {
        let ode = LinearSchrodinger { q, energy };
        let start = ScaledPair::new(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
        Ok(ode.integrate(0.0, x_end, start, self.rtol)?.0)
    }

    fn jost(&self, q: &Potential, z: Complex64, x: f64) -> Result<ScaledPair> {
        jost_backward(q, z, x, self.rtol, self.tail_tol)
    }
}

/// Runge–Kutta where `q` is non-negligible, exact free propagation past the
/// point where the tail of `q` drops below `tail_tol` (the support bound for
/// compactly supported potentials).
#[derive(Debug, Clone, Copy)]
pub struct Hybrid {
    pub rtol: f64,
    pub tail_tol: f64,
}

impl Default for Hybrid {
    fn default() -> Self {
        Self { rtol: DEFAULT_RTOL, tail_tol: DEFAULT_TAIL_TOL }
    }
}

impl Propagator for Hybrid {
    fn name(&self) -> &'static str {
        "hybrid"
    }

    fn regular(&self, q: &Potential, energy: Complex64, x_end: f64) -> Result<ScaledPair> {
        let cut = q.truncation_point(0.0, self.tail_tol)?.min(x_end);
        let mut state = ScaledPair::new(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
        if cut > 0.0 {
            let ode = LinearSchrodinger { q, energy };
            state = ode.integrate(0.0, cut, state, self.rtol)?.0;
        }
        Ok(free_transfer(state, energy, x_end - cut))
    }

    fn jost(&self, q: &Potential, z: Complex64, x: f64) -> Result<ScaledPair> {
        jost_backward(q, z, x, self.rtol, self.tail_tol)
    }
}

/// Fourth-order Magnus steps where `q` is non-negligible, exact free
/// propagation beyond. Steps do not shrink with the energy, which makes this
/// the fastest choice for wide regions of the `z`-plane.
#[derive(Debug, Clone, Copy)]
pub struct MagnusHybrid {
    pub rtol: f64,
    pub tail_tol: f64,
}

impl Default for MagnusHybrid {
    fn default() -> Self {
        Self { rtol: DEFAULT_RTOL, tail_tol: DEFAULT_TAIL_TOL }
    }
}

impl Propagator for MagnusHybrid {
    fn name(&self) -> &'static str {
        "magnus"
    }

    fn regular(&self, q: &Potential, energy: Complex64, x_end: f64) -> Result<ScaledPair> {
        let cut = q.truncation_point(0.0, self.tail_tol)?.min(x_end);
        let mut state = ScaledPair::new(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
        if cut > 0.0 {
            state = Magnus { q, energy }.integrate(0.0, cut, state, self.rtol)?.0;
        }
        Ok(free_transfer(state, energy, x_end - cut))
    }

    fn jost(&self, q: &Potential, z: Complex64, x: f64) -> Result<ScaledPair> {
        let x_inf = q.truncation_point(0.0, self.tail_tol)?;
        let start = jost_asymptotic(z, x.max(x_inf));
        if x >= x_inf {
            return Ok(start);
        }
        Ok(Magnus { q, energy: z * z }.integrate(x_inf, x, start, self.rtol)?.0)
    }
}

fn jost_asymptotic(z: Complex64, x: f64) -> ScaledPair {
    let i = Complex64::new(0.0, 1.0);
    let e = Scaled::exp(i * z * x);
    ScaledPair { y: e.mant, dy: i * z * e.mant, ln_scale: e.ln_scale }.normalized()
}

fn jost_backward(q: &Potential, z: Complex64, x: f64, rtol: f64, tail_tol: f64) -> Result<ScaledPair> {
    let x_inf = q.truncation_point(0.0, tail_tol)?;
    let i = Complex64::new(0.0, 1.0);
    let at = |xx: f64| {
        let e = Scaled::exp(i * z * xx);
        ScaledPair { y: e.mant, dy: i * z * e.mant, ln_scale: e.ln_scale }.normalized()
    };
    if x >= x_inf {
        return Ok(at(x));
    }
    let ode = LinearSchrodinger { q, energy: z * z };
    Ok(ode.integrate(x_inf, x, at(x_inf), rtol)?.0)
}

type PropagatorCtor = fn(f64, f64) -> Arc<dyn Propagator>;

/// Name → propagator constructor, parameterised by `(rtol, tail_tol)`.
pub struct PropagatorRegistry {
    entries: BTreeMap<&'static str, PropagatorCtor>,
}

impl PropagatorRegistry {
    pub fn builtin() -> Self {
        let mut entries: BTreeMap<&'static str, PropagatorCtor> = BTreeMap::new();
        entries.insert("rk", |rtol, tail_tol| Arc::new(RungeKutta { rtol, tail_tol }));
        entries.insert("hybrid", |rtol, tail_tol| Arc::new(Hybrid { rtol, tail_tol }));
        entries.insert("magnus", |rtol, tail_tol| Arc::new(MagnusHybrid { rtol, tail_tol }));
        Self { entries }
    }

    pub fn register(&mut self, name: &'static str, ctor: PropagatorCtor) {
        self.entries.insert(name, ctor);
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.keys().copied()
    }

    pub fn build(&self, name: &str, rtol: f64, tail_tol: f64) -> Result<Arc<dyn Propagator>> {
        let ctor = self.entries.get(name).ok_or_else(|| {
            let known: Vec<&str> = self.names().collect();
            Error::validation("propagator", format!("unknown propagator `{name}` (known: {})", known.join(", ")))
        })?;
        Ok(ctor(rtol, tail_tol))
    }
}

impl Default for PropagatorRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}

/// Regular solution at an arbitrary energy, with a step-doubling estimate.
pub fn solve_regular(q: &Potential, energy: Complex64, x_end: f64, rtol: f64) -> Result<SolutionSample> {
    if !(x_end > 0.0) {
        return Err(Error::Precondition(format!("x_end = {x_end} must be > 0")));
    }
    let ode = LinearSchrodinger { q, energy };
    let start = ScaledPair::new(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
    let (pair, est, _) = ode.integrate_with_estimate(0.0, x_end, start, rtol)?;
    SolutionSample::from_pair(pair, x_end, est)
}

/// `(θ, θ')(x_end, z)` for `0 < x_end ≤ R`.
pub fn solve_theta(problem: &Problem, z: Complex64, x_end: f64) -> Result<SolutionSample> {
    solve_theta_with_tol(problem, z, x_end, DEFAULT_RTOL)
}

pub fn solve_theta_with_tol(problem: &Problem, z: Complex64, x_end: f64, rtol: f64) -> Result<SolutionSample> {
    if x_end > problem.r() {
        return Err(Error::Precondition(format!("θ is only defined up to R = {}, asked for {x_end}", problem.r())));
    }
    let energy = z * z - Complex64::new(0.0, problem.gamma());
    solve_regular(&problem.q, energy, x_end, rtol)
}

/// `(φ, φ')(x_eval, z)` for `Im z > 0`.
pub fn solve_jost(q: &Potential, z: Complex64, x_eval: f64, tail_tol: f64) -> Result<SolutionSample> {
    if !(z.im > 0.0) {
        return Err(Error::Precondition(format!("Jost solution needs Im z > 0, got {z}")));
    }
    if !(x_eval >= 0.0) {
        return Err(Error::Precondition(format!("x_eval = {x_eval} must be ≥ 0")));
    }
    if q.support_bound().is_none() && q.decay_rate().is_none() {
        return Err(Error::Precondition("Jost solution needs decay metadata on q".into()));
    }
    let x_inf = q.truncation_point(0.0, tail_tol)?;
    let i = Complex64::new(0.0, 1.0);
    if x_eval >= x_inf {
        let e = Scaled::exp(i * z * x_eval);
        let pair = ScaledPair { y: e.mant, dy: i * z * e.mant, ln_scale: e.ln_scale };
        return SolutionSample::from_pair(pair, x_eval, 0.0);
    }
    let e = Scaled::exp(i * z * x_inf);
    let start = ScaledPair { y: e.mant, dy: i * z * e.mant, ln_scale: e.ln_scale }.normalized();
    let ode = LinearSchrodinger { q, energy: z * z };
    let (pair, est, _) = ode.integrate_with_estimate(x_inf, x_eval, start, DEFAULT_RTOL)?;
    SolutionSample::from_pair(pair, x_eval, est)
}

/// `ln` of the Grönwall bound
/// `(1 + x) e^{|Im μ| x} exp(∫_0^x (1 + t)|q(t)| dt)`, `μ = √(z² - iγ)`.
pub fn gronwall_ln_rhs(q: &Potential, z: Complex64, gamma: f64, x: f64) -> f64 {
    let mu = sqrt_upper(z * z - Complex64::new(0.0, gamma));
    let weighted = q.weighted_integral(|t| 1.0 + t, x, 1e-10);
    (1.0 + x).ln() + mu.im.abs() * x + weighted
}

pub fn gronwall_rhs(q: &Potential, z: Complex64, gamma: f64, x: f64) -> f64 {
    gronwall_ln_rhs(q, z, gamma, x).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::make_potential;
    use std::f64::consts::{E, FRAC_PI_2};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn free_equation_at_real_energy() {
        let s = solve_regular(&Potential::zero(), c(1.0, 0.0), FRAC_PI_2, 1e-10).unwrap();
        assert!((s.value - c(1.0, 0.0)).norm() < 1e-9);
        assert!(s.derivative.norm() < 1e-9);
    }

    #[test]
    fn free_theta_closed_form() {
        let p = Problem::new(Potential::zero(), 1.0, 1.0).unwrap();
        let z = c(1.0, 1.0);
        let s = solve_theta(&p, z, 1.0).unwrap();
        let mu = sqrt_upper(z * z - c(0.0, 1.0));
        let theta = mu.sin() / mu;
        let dtheta = mu.cos();
        assert!((s.value - theta).norm() < 1e-9);
        assert!((s.derivative - dtheta).norm() < 1e-9);
        assert!((s.value.norm() + s.derivative.norm() - 2.086).abs() < 1e-3);
    }

    /// Piecewise-constant potentials: glue free solutions with transfer
    /// matrices at the jump.
    fn box_theta_transfer(a: f64, qw: f64, energy: Complex64, x: f64) -> (Complex64, Complex64) {
        let prop = |y: Complex64, dy: Complex64, k2: Complex64, d: f64| {
            let k = k2.sqrt();
            if k.norm() < 1e-12 {
                return (y + dy * d, dy);
            }
            ((k * d).cos() * y + (k * d).sin() / k * dy, -(k * (k * d).sin()) * y + (k * d).cos() * dy)
        };
        let (y, dy) = prop(c(0.0, 0.0), c(1.0, 0.0), energy - a, qw.min(x));
        if x <= qw {
            return (y, dy);
        }
        prop(y, dy, energy, x - qw)
    }

    #[test]
    fn box_potential_matches_transfer_matrices() {
        let q = make_potential("box:A=2,Q=1").unwrap();
        let p = Problem::new(q, 1.0, 2.0).unwrap();
        let z = c(0.0, 1.0);
        let s = solve_theta(&p, z, 2.0).unwrap();
        let energy = z * z - c(0.0, 1.0);
        let (y, dy) = box_theta_transfer(2.0, 1.0, energy, 2.0);
        assert!((s.value - y).norm() < 1e-9 * y.norm(), "{} vs {y}", s.value);
        assert!((s.derivative - dy).norm() < 1e-9 * dy.norm());
    }

    #[test]
    fn theta_rejects_points_past_barrier() {
        let p = Problem::new(Potential::zero(), 1.0, 3.0).unwrap();
        assert!(matches!(solve_theta(&p, c(1.0, 0.0), 3.5), Err(Error::Precondition(_))));
    }

    #[test]
    fn jost_free_and_compact() {
        let z = c(0.7, 0.4);
        let i = c(0.0, 1.0);
        let s = solve_jost(&Potential::zero(), z, 1.0, 1e-12).unwrap();
        assert!((s.value - (i * z).exp()).norm() < 1e-15);
        assert!((s.derivative - i * z * (i * z).exp()).norm() < 1e-15);
        for amp in [0.5, 3.0, -2.0] {
            let q = make_potential(&format!("box:A={amp},Q=1")).unwrap();
            let s = solve_jost(&q, z, 1.5, 1e-12).unwrap();
            assert!((s.value - (i * z * 1.5).exp()).norm() < 1e-14);
        }
        assert!(solve_jost(&Potential::zero(), c(1.0, 0.0), 1.0, 1e-12).is_err());
    }

    #[test]
    fn jost_tail_refinement_is_stable() {
        let q = make_potential("expdecay:A=1,k=5").unwrap();
        let z = c(0.5, 0.5);
        let a = solve_jost(&q, z, 0.0, 1e-12).unwrap();
        let b = solve_jost(&q, z, 0.0, 0.5e-12).unwrap();
        assert!((a.value - b.value).norm() < 1e-8);
        assert!((a.derivative - b.derivative).norm() < 1e-8);
    }

    #[test]
    fn gronwall_examples() {
        let z = c(1.0, 1.0);
        let v = gronwall_rhs(&Potential::zero(), z, 1.0, 1.0);
        let mu = sqrt_upper(z * z - c(0.0, 1.0));
        assert!((v - 2.0 * mu.im.abs().exp()).abs() < 1e-12);
        assert!((v - 4.0563).abs() < 1e-3);
        let q = make_potential("box:A=1,Q=1").unwrap();
        assert!((gronwall_rhs(&q, c(0.3, 0.2), 1.0, 0.0) - 1.0).abs() < 1e-15);
        // γ = 0 enters only through μ; μ = i for z = i
        let v = gronwall_rhs(&q, c(0.0, 1.0), 0.0, 2.0);
        assert!((v - 3.0 * E.powi(2) * 1.5f64.exp()).abs() < 1e-8 * v);
    }

    #[test]
    fn wronskian_of_regular_and_jost_is_constant_past_support() {
        let q = make_potential("box:A=1.5,Q=1").unwrap();
        let z = c(1.2, 0.3);
        let energy = z * z;
        let w = |x: f64| {
            let t = solve_regular(&q, energy, x, 1e-11).unwrap();
            let j = solve_jost(&q, z, x, 1e-12).unwrap();
            t.value * j.derivative - t.derivative * j.value
        };
        let (a, b) = (w(1.5), w(4.0));
        assert!((a - b).norm() < 1e-8 * a.norm());
    }

    #[test]
    fn propagators_agree() {
        let reg = PropagatorRegistry::builtin();
        let rk = reg.build("rk", 1e-11, 1e-12).unwrap();
        let hy = reg.build("hybrid", 1e-11, 1e-12).unwrap();
        let mg = reg.build("magnus", 1e-11, 1e-12).unwrap();
        assert!(reg.build("chebyshev", 1e-11, 1e-12).is_err());
        for spec in ["zero", "box:A=1,Q=1", "expdecay:A=1,k=5", "bump:A=-2,Q=1.5"] {
            let q = make_potential(spec).unwrap();
            let e = c(4.0, -1.0);
            let a = rk.regular(&q, e, 8.0).unwrap();
            let b = hy.regular(&q, e, 8.0).unwrap();
            let m = mg.regular(&q, e, 8.0).unwrap();
            let scale = a.value().abs() + a.derivative().abs();
            assert!(a.distance(&b) < 1e-8 * scale, "{spec}");
            assert!(a.distance(&m) < 1e-8 * scale, "{spec}");
            let z = c(1.5, 0.4);
            let ja = rk.jost(&q, z, 0.3).unwrap();
            let jm = mg.jost(&q, z, 0.3).unwrap();
            assert!(ja.distance(&jm) < 1e-8 * (ja.value().abs() + ja.derivative().abs()), "{spec}");
        }
    }
}
