//! Integration of `y'' = (q(x) - E) y` with complex energy `E`: an adaptive
//! Dormand–Prince 5(4) pair, and a fourth-order Magnus scheme whose steps are
//! exact for constant `q` and therefore do not shrink with the energy.
//!
//! The state carries a common logarithmic scale so that exponentially
//! growing solutions never overflow. Steps never cross a breakpoint of `q`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::math::Scaled;
use crate::potentials::Potential;

/// `(y, y') · e^{ln_scale}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledPair {
    pub y: Complex64,
    pub dy: Complex64,
    pub ln_scale: f64,
}

impl ScaledPair {
    pub fn new(y: Complex64, dy: Complex64) -> Self {
        Self { y, dy, ln_scale: 0.0 }.normalized()
    }

    pub fn value(&self) -> Scaled {
        Scaled::new(self.y, self.ln_scale)
    }

    pub fn derivative(&self) -> Scaled {
        Scaled::new(self.dy, self.ln_scale)
    }

    fn norm(&self) -> f64 {
        self.y.norm() + self.dy.norm()
    }

    /// `|y| + |y'|` in units of `e^{ln}`.
    fn norm_at(&self, ln: f64) -> f64 {
        self.norm() * (self.ln_scale - ln).exp()
    }

    /// Rescales so that `|y| + |y'| = 1`.
    pub fn normalized(self) -> Self {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return self;
        }
        Self { y: self.y / n, dy: self.dy / n, ln_scale: self.ln_scale + n.ln() }
    }

    /// `(y, y')` as plain complex numbers.
    pub fn unscaled(&self) -> (Complex64, Complex64) {
        let s = self.ln_scale.exp();
        (self.y * s, self.dy * s)
    }

    /// Difference `|Δy| + |Δy'|` to another pair, in absolute units.
    pub fn distance(&self, other: &ScaledPair) -> f64 {
        let ln = self.ln_scale.max(other.ln_scale);
        self.distance_at(other, ln) * ln.exp()
    }

    /// [`Self::distance`] in units of `e^{ln}`, finite whatever the scales.
    fn distance_at(&self, other: &ScaledPair, ln: f64) -> f64 {
        let a = (self.ln_scale - ln).exp();
        let b = (other.ln_scale - ln).exp();
        (self.y * a - other.y * b).norm() + (self.dy * a - other.dy * b).norm()
    }
}

/// Work counters for one integration.
#[derive(Debug, Clone, Copy, Default)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

type Deriv = [Complex64; 2];

/// The linear equation `y'' = (q(x) - energy) y`.
#[derive(Debug, Clone, Copy)]
pub struct LinearSchrodinger<'a> {
    pub q: &'a Potential,
    pub energy: Complex64,
}

impl LinearSchrodinger<'_> {
    /// Right-hand side with `q` sampled from inside the smooth piece
    /// `[seg.0, seg.1]`, so jumps at its ends take the correct side.
    #[inline]
    fn rhs(&self, x: f64, seg: (f64, f64), y: Complex64, dy: Complex64) -> Deriv {
        let pad = 1e-13 * (1.0 + x.abs());
        let xq = if seg.1 - seg.0 > 4.0 * pad { x.clamp(seg.0 + pad, seg.1 - pad) } else { 0.5 * (seg.0 + seg.1) };
        [dy, (self.q.value(xq.max(0.0)) - self.energy) * y]
    }

    /// Adaptive integration from `x0` to `x1` (either direction).
    pub fn integrate(&self, x0: f64, x1: f64, start: ScaledPair, rtol: f64) -> Result<(ScaledPair, OdeStats)> {
        let mut stats = OdeStats::default();
        let state = self.run(x0, x1, start, rtol, &mut stats, None)?;
        Ok((state, stats))
    }

    /// Adaptive integration plus a step-doubling estimate: the accepted mesh
    /// is re-run with every step halved and the two end states compared.
    pub fn integrate_with_estimate(
        &self,
        x0: f64,
        x1: f64,
        start: ScaledPair,
        rtol: f64,
    ) -> Result<(ScaledPair, f64, OdeStats)> {
        let mut stats = OdeStats::default();
        let mut mesh = vec![x0];
        let coarse = self.run(x0, x1, start, rtol, &mut stats, Some(&mut mesh))?;
        let mut fine = start.normalized();
        for w in mesh.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            let seg = (w[0].min(w[1]), w[0].max(w[1]));
            fine = self.step(w[0], mid - w[0], seg, fine).0;
            fine = self.step(mid, w[1] - mid, seg, fine).0;
        }
        Ok((coarse, coarse.distance(&fine), stats))
    }

    fn run(
        &self,
        x0: f64,
        x1: f64,
        start: ScaledPair,
        rtol: f64,
        stats: &mut OdeStats,
        mut mesh: Option<&mut Vec<f64>>,
    ) -> Result<ScaledPair> {
        let mut state = start.normalized();
        if x0 == x1 {
            return Ok(state);
        }
        let dir = if x1 > x0 { 1.0 } else { -1.0 };
        let (lo, hi) = if dir > 0.0 { (x0, x1) } else { (x1, x0) };
        let mut cuts: Vec<f64> = self.q.breakpoints().into_iter().filter(|&b| b > lo && b < hi).collect();
        cuts.sort_by(f64::total_cmp);
        if dir < 0.0 {
            cuts.reverse();
        }
        cuts.push(x1);

        let freq = (self.energy.norm() + self.q.envelope(lo).abs()).sqrt();
        let mut h = (0.25 / (1.0 + freq)).min(hi - lo);
        let mut x = x0;
        for &end in &cuts {
            let seg = (x.min(end), x.max(end));
            h = h.min((end - x).abs());
            while (end - x) * dir > 0.0 {
                let remaining = (end - x).abs();
                let last = h >= remaining * (1.0 - 1e-12);
                let step = if last { remaining } else { h };
                let (next, err) = self.step(x, dir * step, seg, state);
                let scale = next.norm().max(state.norm());
                let ratio = if scale > 0.0 { err / (rtol * scale) } else { 0.0 };
                if ratio <= 1.0 && ratio.is_finite() {
                    stats.accepted += 1;
                    x = if last { end } else { x + dir * step };
                    state = next.normalized();
                    if let Some(m) = mesh.as_deref_mut() {
                        m.push(x);
                    }
                    let grow = if ratio == 0.0 { 5.0 } else { (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0) };
                    h = step * grow;
                } else {
                    stats.rejected += 1;
                    let shrink = if ratio.is_finite() { (0.9 * ratio.powf(-0.2)).clamp(0.1, 0.5) } else { 0.1 };
                    h = step * shrink;
                    if h < 1e-14 * (1.0 + x.abs()) {
                        return Err(Error::StepUnderflow { x });
                    }
                }
            }
        }
        Ok(state)
    }

    /// One Dormand–Prince step; returns the 5th-order state and the norm of
    /// the embedded error estimate (same scale as the state).
    fn step(&self, x: f64, h: f64, seg: (f64, f64), s: ScaledPair) -> (ScaledPair, f64) {
        let y = [s.y, s.dy];
        let add = |base: &Deriv, ks: &[(&Deriv, f64)]| -> Deriv {
            let mut out = *base;
            for (k, c) in ks {
                out[0] += k[0] * (h * c);
                out[1] += k[1] * (h * c);
            }
            out
        };
        let f = |xx: f64, v: &Deriv| self.rhs(xx, seg, v[0], v[1]);
        let k1 = f(x, &y);
        let k2 = f(x + C2 * h, &add(&y, &[(&k1, A21)]));
        let k3 = f(x + C3 * h, &add(&y, &[(&k1, A31), (&k2, A32)]));
        let k4 = f(x + C4 * h, &add(&y, &[(&k1, A41), (&k2, A42), (&k3, A43)]));
        let k5 = f(x + C5 * h, &add(&y, &[(&k1, A51), (&k2, A52), (&k3, A53), (&k4, A54)]));
        let k6 = f(x + h, &add(&y, &[(&k1, A61), (&k2, A62), (&k3, A63), (&k4, A64), (&k5, A65)]));
        let y5 = add(&y, &[(&k1, B1), (&k3, B3), (&k4, B4), (&k5, B5), (&k6, B6)]);
        let k7 = f(x + h, &y5);
        let err =
            add(&[Complex64::new(0.0, 0.0); 2], &[(&k1, E1), (&k3, E3), (&k4, E4), (&k5, E5), (&k6, E6), (&k7, E7)]);
        let next = ScaledPair { y: y5[0], dy: y5[1], ln_scale: s.ln_scale };
        (next, err[0].norm() + err[1].norm())
    }
}

/// Fourth-order Magnus integration of `y'' = (q(x) - E) y`.
///
/// Each step applies `exp(Ω)` with the two-point Gauss–Legendre Magnus
/// expansion `Ω = h/2 (A₁ + A₂) + √3 h²/12 [A₂, A₁]`; for `A = [[0, 1], [v, 0]]`
/// this is a traceless 2×2 matrix whose exponential is closed-form. Step
/// size is controlled by step doubling.
#[derive(Debug, Clone, Copy)]
pub struct Magnus<'a> {
    pub q: &'a Potential,
    pub energy: Complex64,
}

impl Magnus<'_> {
    pub fn integrate(&self, x0: f64, x1: f64, start: ScaledPair, rtol: f64) -> Result<(ScaledPair, OdeStats)> {
        let mut stats = OdeStats::default();
        let mut state = start.normalized();
        if x0 == x1 {
            return Ok((state, stats));
        }
        let dir = if x1 > x0 { 1.0 } else { -1.0 };
        let (lo, hi) = if dir > 0.0 { (x0, x1) } else { (x1, x0) };
        let mut cuts: Vec<f64> = self.q.breakpoints().into_iter().filter(|&b| b > lo && b < hi).collect();
        cuts.sort_by(f64::total_cmp);
        if dir < 0.0 {
            cuts.reverse();
        }
        cuts.push(x1);

        let mut h = (hi - lo).min(0.5);
        let mut x = x0;
        for &end in &cuts {
            h = h.min((end - x).abs());
            while (end - x) * dir > 0.0 {
                let remaining = (end - x).abs();
                let last = h >= remaining * (1.0 - 1e-12);
                let step = if last { remaining } else { h };
                let full = self.step(x, dir * step, state);
                let half = self.step(x, 0.5 * dir * step, state);
                let fine = self.step(x + 0.5 * dir * step, 0.5 * dir * step, half);
                let ln = full.ln_scale.max(state.ln_scale);
                let scale = full.norm_at(ln).max(state.norm_at(ln));
                let err = fine.distance_at(&full, ln) / 15.0;
                let ratio = if scale > 0.0 { err / (rtol * scale) } else { 0.0 };
                if ratio <= 1.0 && ratio.is_finite() {
                    stats.accepted += 1;
                    x = if last { end } else { x + dir * step };
                    state = fine.normalized();
                    let grow = if ratio == 0.0 { 4.0 } else { (0.9 * ratio.powf(-0.2)).clamp(0.2, 4.0) };
                    h = step * grow;
                } else {
                    stats.rejected += 1;
                    let shrink = if ratio.is_finite() { (0.9 * ratio.powf(-0.2)).clamp(0.1, 0.5) } else { 0.1 };
                    h = step * shrink;
                    if h < 1e-14 * (1.0 + x.abs()) {
                        return Err(Error::StepUnderflow { x });
                    }
                }
            }
        }
        Ok((state, stats))
    }

    fn step(&self, x: f64, h: f64, s: ScaledPair) -> ScaledPair {
        const G: f64 = 0.211_324_865_405_187_1; // 1/2 - √3/6
        let v1 = self.q.value((x + G * h).max(0.0)) - self.energy;
        let v2 = self.q.value((x + (1.0 - G) * h).max(0.0)) - self.energy;
        let d = (3f64.sqrt() / 12.0) * h * h * (v1 - v2);
        let vm = 0.5 * (v1 + v2);
        let s2 = d * d + h * h * vm;
        let mut root = s2.sqrt();
        if root.re < 0.0 {
            root = -root;
        }
        // exp(Ω) = cosh(σ) I + sinh(σ)/σ Ω, with e^{σ} split off the scale
        let (cosh, sinhc, shift) = if root.norm() < 1e-4 {
            let c = 1.0 + s2 / 2.0 + s2 * s2 / 24.0;
            let sc = 1.0 + s2 / 6.0 + s2 * s2 / 120.0;
            (c, sc, Complex64::new(0.0, 0.0))
        } else {
            let e = (-2.0 * root).exp();
            ((1.0 + e) * 0.5, (1.0 - e) * 0.5 / root, root)
        };
        let rot = Complex64::from_polar(1.0, shift.im);
        let y = (cosh * s.y + sinhc * (d * s.y + h * s.dy)) * rot;
        let dy = (cosh * s.dy + sinhc * (h * vm * s.y - d * s.dy)) * rot;
        ScaledPair { y, dy, ln_scale: s.ln_scale + shift.re }.normalized()
    }
}

/// Exact propagation across an interval where `q ≡ 0`:
/// `y(x+d) = y cos(μd) + y' sin(μd)/μ`, `y'(x+d) = -y μ sin(μd) + y' cos(μd)`
/// with `μ² = energy`. Even in `μ`, so the branch does not matter.
pub fn free_transfer(state: ScaledPair, energy: Complex64, d: f64) -> ScaledPair {
    if d == 0.0 {
        return state;
    }
    let mu = crate::math::sqrt_upper(energy);
    let w = mu * d;
    let i = Complex64::new(0.0, 1.0);
    if w.norm() < 1e-4 {
        let w2 = w * w;
        let cos = 1.0 - w2 / 2.0 + w2 * w2 / 24.0;
        let sinc_d = (1.0 - w2 / 6.0 + w2 * w2 / 120.0) * d; // sin(μd)/μ
        let mu_sin = energy * sinc_d; // μ sin(μd)
        let y = state.y * cos + state.dy * sinc_d;
        let dy = -state.y * mu_sin + state.dy * cos;
        return ScaledPair { y, dy, ln_scale: state.ln_scale }.normalized();
    }
    // factor out e^{-iw}; with Im w ≥ 0 the remainder ρ = e^{2iw} has |ρ| ≤ 1
    let wd = if w.im >= 0.0 { w } else { -w };
    let mu_d = if w.im >= 0.0 { mu } else { -mu };
    let rho = (2.0 * i * wd).exp();
    let cos = (1.0 + rho) * 0.5;
    let sin = (rho - 1.0) / (2.0 * i);
    let phase = Complex64::from_polar(1.0, -wd.re);
    let y = (state.y * cos + state.dy * sin / mu_d) * phase;
    let dy = (-state.y * mu_d * sin + state.dy * cos) * phase;
    ScaledPair { y, dy, ln_scale: state.ln_scale + wd.im }.normalized()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn harmonic_oscillation_matches_sine() {
        let q = Potential::zero();
        let ode = LinearSchrodinger { q: &q, energy: c(4.0, 0.0) };
        let start = ScaledPair::new(c(0.0, 0.0), c(1.0, 0.0));
        let (end, stats) = ode.integrate(0.0, 3.0, start, 1e-11).unwrap();
        let (y, dy) = end.unscaled();
        assert!((y - c((6.0f64).sin() / 2.0, 0.0)).norm() < 1e-9);
        assert!((dy - c((6.0f64).cos(), 0.0)).norm() < 1e-9);
        assert!(stats.accepted > 0);
    }

    #[test]
    fn growth_beyond_f64_range_is_carried_in_scale() {
        let q = Potential::zero();
        // y'' = 100 y, y = sinh(10x)/10 grows like e^{10x}/20
        let ode = LinearSchrodinger { q: &q, energy: c(-100.0, 0.0) };
        let (end, _) = ode.integrate(0.0, 100.0, ScaledPair::new(c(0.0, 0.0), c(1.0, 0.0)), 1e-10).unwrap();
        let ln_y = end.value().ln_abs();
        assert!((ln_y - (1000.0 - 20f64.ln())).abs() < 1e-6, "{ln_y}");
    }

    #[test]
    fn backward_integration_retraces() {
        let q = Potential::zero();
        let ode = LinearSchrodinger { q: &q, energy: c(2.0, 0.5) };
        let start = ScaledPair::new(c(0.3, -0.1), c(1.0, 0.2));
        let (fwd, _) = ode.integrate(0.0, 5.0, start, 1e-12).unwrap();
        let (back, _) = ode.integrate(5.0, 0.0, fwd, 1e-12).unwrap();
        assert!(back.distance(&start) < 1e-9);
    }

    #[test]
    fn free_transfer_agrees_with_integration() {
        let q = Potential::zero();
        for energy in [c(3.0, -1.0), c(-2.0, 0.4), c(1e-10, 1e-10), c(40.0, -0.3)] {
            let ode = LinearSchrodinger { q: &q, energy };
            let start = ScaledPair::new(c(0.2, 0.1), c(-0.4, 1.0));
            let (a, _) = ode.integrate(0.0, 2.5, start, 1e-12).unwrap();
            let b = free_transfer(start, energy, 2.5);
            let scale = a.value().abs() + a.derivative().abs();
            assert!(a.distance(&b) < 1e-8 * scale, "energy {energy}");
        }
    }

    #[test]
    fn step_doubling_estimate_tracks_error() {
        let q = Potential::zero();
        let ode = LinearSchrodinger { q: &q, energy: c(9.0, 0.0) };
        let start = ScaledPair::new(c(0.0, 0.0), c(1.0, 0.0));
        let (end, est, _) = ode.integrate_with_estimate(0.0, 4.0, start, 1e-7).unwrap();
        let (y, dy) = end.unscaled();
        let err = (y - c((12.0f64).sin() / 3.0, 0.0)).norm() + (dy - c((12.0f64).cos(), 0.0)).norm();
        assert!(est > 0.0);
        assert!(err < 10.0 * est + 1e-12, "err {err} est {est}");
    }

    #[test]
    fn magnus_is_exact_for_constant_potential() {
        let q = Potential::zero();
        for energy in [c(3.0, -1.0), c(2500.0, -0.5), c(-40.0, 0.2)] {
            let m = Magnus { q: &q, energy };
            let start = ScaledPair::new(c(0.0, 0.0), c(1.0, 0.0));
            let (a, stats) = m.integrate(0.0, 3.0, start, 1e-12).unwrap();
            let b = free_transfer(start, energy, 3.0);
            assert!(a.distance(&b) < 1e-11 * (b.value().abs() + b.derivative().abs()), "energy {energy}");
            assert!(stats.accepted <= 4, "{stats:?}");
        }
    }

    #[test]
    fn magnus_agrees_with_runge_kutta_on_smooth_potential() {
        let q = crate::potentials::make_potential("expdecay:A=3,k=2").unwrap();
        for energy in [c(1.0, -1.0), c(400.0, -1.0), c(-5.0, 0.5)] {
            let start = ScaledPair::new(c(0.0, 0.0), c(1.0, 0.0));
            let (a, _) = LinearSchrodinger { q: &q, energy }.integrate(0.0, 6.0, start, 1e-12).unwrap();
            let (b, stats) = Magnus { q: &q, energy }.integrate(0.0, 6.0, start, 1e-11).unwrap();
            let scale = a.value().abs() + a.derivative().abs();
            assert!(a.distance(&b) < 1e-8 * scale, "energy {energy}: {stats:?}");
        }
    }
}
