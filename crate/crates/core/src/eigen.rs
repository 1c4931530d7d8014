//! The characteristic function `f_R(z)` and eigenvalue location in the
//! `z = √λ` half-plane.
//!
//! `z² ∈ ℂ \ [0,∞)` is an eigenvalue of `H_R` exactly when `f_R(z) = 0`.
//! For `q` vanishing past `R`, `f_R(z) = izθ(R) − θ'(R)` is entire; otherwise
//! `f_R(z) = (θφ' − θ'φ)(R)·e^{−izR}`.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{sqrt_upper, Scaled};
use crate::ode::{free_transfer, ScaledPair};
use crate::schrodinger::{Problem, Propagator, RungeKutta};
use crate::winding::{winding_count_dilating, AnalyticFn, Contour, LatticeBox, Rect, ZRegion};

/// Default lower margin above the real `z` axis for eigenvalue regions.
pub const IM_MARGIN: f64 = 1e-4;
pub const MAX_BOXES: usize = 100_000;
const NEWTON_ITERATIONS: usize = 50;
/// Boxes still holding several zeros below this diameter are reported as
/// one cluster.
const CLUSTER_DIAMETER: f64 = 1e-7;
const SPLIT_ATTEMPTS: u32 = 7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eigenpair {
    pub lambda: Complex64,
    pub z: Complex64,
    pub multiplicity: u32,
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct EigenvalueSet {
    pub entries: Vec<Eigenpair>,
    pub problem: Problem,
    /// The region actually counted (possibly dilated off a boundary zero).
    pub region: ZRegion,
}

impl EigenvalueSet {
    /// Eigenvalue count with algebraic multiplicity.
    pub fn count(&self) -> u64 {
        self.entries.iter().map(|e| e.multiplicity as u64).sum()
    }
}

fn i() -> Complex64 {
    Complex64::new(0.0, 1.0)
}

/// Closed form for `q ≡ 0` in log-scaled form.
pub fn f_closed_zero_scaled(gamma: f64, r: f64, z: Complex64) -> Scaled {
    let energy = z * z - Complex64::new(0.0, gamma);
    let theta = free_transfer(ScaledPair::new(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)), energy, r);
    Scaled::new(i() * z * theta.y - theta.dy, theta.ln_scale)
}

/// `iz·sin(μR)/μ − cos(μR)` with `μ = √(z² − iγ)`.
pub fn f_closed_zero(gamma: f64, r: f64, z: Complex64) -> Complex64 {
    f_closed_zero_scaled(gamma, r, z).to_complex()
}

/// `f_R(z)` evaluated with a chosen propagation strategy.
#[derive(Debug, Clone)]
pub struct CharacteristicFn {
    pub problem: Problem,
    pub propagator: Arc<dyn Propagator>,
}

impl CharacteristicFn {
    pub fn new(problem: Problem, propagator: Arc<dyn Propagator>) -> Self {
        Self { problem, propagator }
    }

    /// Uses full Runge–Kutta propagation with default tolerances.
    pub fn with_defaults(problem: Problem) -> Self {
        Self::new(problem, Arc::new(RungeKutta::default()))
    }

    pub fn eval_scaled(&self, z: Complex64) -> Result<Scaled> {
        let p = &self.problem;
        let energy = z * z - Complex64::new(0.0, p.gamma());
        let theta = self.propagator.regular(&p.q, energy, p.r())?;
        if p.compact_within_barrier() {
            return Ok(Scaled::new(i() * z * theta.y - theta.dy, theta.ln_scale).normalized());
        }
        if !(z.im > 0.0) && p.q.support_bound().is_none() {
            return Err(Error::Precondition(format!("f_R needs Im z > 0 for non-compact q, got {z}")));
        }
        let phi = self.propagator.jost(&p.q, z, p.r())?;
        let w = Scaled::new(theta.y * phi.dy - theta.dy * phi.y, theta.ln_scale + phi.ln_scale);
        Ok(w.mul(&Scaled::exp(-i() * z * p.r())))
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        let v = self.eval_scaled(z)?.to_complex();
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::Overflow(format!("|f_R({z})| exceeds the f64 range")));
        }
        Ok(v)
    }
}

/// The phase of `f_R` turns like that of `e^{±iμR}`, at a rate of about
/// `R|dμ/dz| = R|z/μ|`, which blows up at the branch point `μ = 0` until
/// `|μ|R` drops below one.
fn phase_spacing(gamma: f64, reach: f64, z: Complex64) -> f64 {
    let mu = sqrt_upper(z * z - Complex64::new(0.0, gamma));
    0.5 / (1.0 + reach * z.norm() / mu.norm().max(1.0 / reach))
}

/// `ln` of the size of the two terms `izθ(R)` and `θ'(R)` that cancel at a
/// zero of `f_R`: `|θ'| ~ e^{Im μ R}` and `|θ| ~ e^{Im μ R}·min(R, 1/|μ|)`.
fn natural_ln_scale(gamma: f64, r: f64, z: Complex64) -> f64 {
    let mu = sqrt_upper(z * z - Complex64::new(0.0, gamma));
    let reach = if mu.norm() > 0.0 { r.min(1.0 / mu.norm()) } else { r };
    mu.im * r + (1.0 + z.norm() * reach).ln()
}

impl AnalyticFn for CharacteristicFn {
    fn eval(&self, z: Complex64) -> Result<Scaled> {
        self.eval_scaled(z)
    }

    fn max_spacing(&self, z: Complex64) -> f64 {
        let reach = self.problem.r().max(self.problem.q.support_bound().unwrap_or(0.0));
        phase_spacing(self.problem.gamma(), reach, z)
    }

    fn ln_scale(&self, z: Complex64) -> f64 {
        natural_ln_scale(self.problem.gamma(), self.problem.r(), z)
    }
}

/// [`f_closed_zero`] as an [`AnalyticFn`].
#[derive(Debug, Clone, Copy)]
pub struct ClosedZero {
    pub gamma: f64,
    pub r: f64,
}

impl AnalyticFn for ClosedZero {
    fn eval(&self, z: Complex64) -> Result<Scaled> {
        Ok(f_closed_zero_scaled(self.gamma, self.r, z))
    }

    fn max_spacing(&self, z: Complex64) -> f64 {
        phase_spacing(self.gamma, self.r, z)
    }

    fn ln_scale(&self, z: Complex64) -> f64 {
        natural_ln_scale(self.gamma, self.r, z)
    }
}

/// `f_R(z)` with full Runge–Kutta propagation.
pub fn f_general(problem: &Problem, z: Complex64) -> Result<Complex64> {
    CharacteristicFn::with_defaults(problem.clone()).eval(z)
}

/// A zero of an analytic function located inside a region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Zero {
    pub z: Complex64,
    pub multiplicity: u32,
    /// `|f(z)|` relative to [`AnalyticFn::ln_scale`].
    pub residual: f64,
}

fn residual<F: AnalyticFn + ?Sized>(f: &F, z: Complex64) -> Result<f64> {
    Ok((f.eval(z)?.ln_abs() - f.ln_scale(z)).exp())
}

/// Result of [`locate_zeros`].
#[derive(Debug, Clone)]
pub struct ZeroSet {
    pub zeros: Vec<Zero>,
    pub region: Rect,
    pub boxes: usize,
    pub evaluations: usize,
}

/// Newton's method with a central-difference derivative; `None` if it
/// leaves `within`, stalls or fails to converge.
pub fn newton<F: AnalyticFn + ?Sized>(f: &F, z0: Complex64, tol: f64, within: &Rect) -> Result<Option<Complex64>> {
    let mut z = z0;
    for _ in 0..NEWTON_ITERATIONS {
        let fz = f.eval(z)?;
        if fz.is_zero() {
            return Ok(Some(z));
        }
        let h = 1e-6 * (1.0 + z.norm());
        let fp = f.eval(z + h)?;
        let fm = f.eval(z - h)?;
        // f'/f from ratios, which stay finite whatever the scale of f
        let log_deriv = (fp.ratio(&fz) - fm.ratio(&fz)) / (2.0 * h);
        let step = log_deriv.inv();
        if !(step.re.is_finite() && step.im.is_finite()) {
            return Ok(None);
        }
        z -= step;
        if !within.contains(z) {
            return Ok(None);
        }
        if step.norm() < tol {
            return Ok(Some(z));
        }
    }
    Ok(None)
}

fn split_box(b: &LatticeBox, rect: &Rect, attempt: u32) -> Option<Vec<LatticeBox>> {
    let shift = attempt as f64 * 0.0371;
    let cut = |lo: u64, hi: u64, t: f64| lo + ((hi - lo) as f64 * t) as u64;
    let valid = |cuts: &[u64], lo: u64, hi: u64| {
        let mut prev = lo;
        for &c in cuts.iter().chain(std::iter::once(&hi)) {
            if c <= prev {
                return false;
            }
            prev = c;
        }
        true
    };
    let aspect = rect.width() / rect.height();
    if aspect >= 4.0 || aspect <= 0.25 {
        // four strips across the long side
        let horizontal = aspect >= 4.0;
        let (lo, hi) = if horizontal { (b.x0, b.x1) } else { (b.y0, b.y1) };
        let cuts: Vec<u64> = (1..4).map(|k| cut(lo, hi, k as f64 / 4.0 + shift / 4.0)).collect();
        if !valid(&cuts, lo, hi) {
            return None;
        }
        let mut edges = vec![lo];
        edges.extend(cuts);
        edges.push(hi);
        return Some(
            edges
                .windows(2)
                .map(|w| {
                    if horizontal {
                        LatticeBox { x0: w[0], x1: w[1], y0: b.y0, y1: b.y1 }
                    } else {
                        LatticeBox { x0: b.x0, x1: b.x1, y0: w[0], y1: w[1] }
                    }
                })
                .collect(),
        );
    }
    let mx = cut(b.x0, b.x1, 0.5 + shift);
    let my = cut(b.y0, b.y1, 0.5 + shift * 0.77);
    if !valid(&[mx], b.x0, b.x1) || !valid(&[my], b.y0, b.y1) {
        return None;
    }
    Some(vec![
        LatticeBox { x0: b.x0, x1: mx, y0: b.y0, y1: my },
        LatticeBox { x0: mx, x1: b.x1, y0: b.y0, y1: my },
        LatticeBox { x0: b.x0, x1: mx, y0: my, y1: b.y1 },
        LatticeBox { x0: mx, x1: b.x1, y0: my, y1: b.y1 },
    ])
}

/// All zeros of `f` inside `region` by recursive subdivision driven by the
/// argument principle, polished by Newton once a box holds a single zero.
/// Multiplicities sum to the winding count of the whole region.
pub fn locate_zeros<F: AnalyticFn + ?Sized>(f: &F, region: &Rect, tol: f64, max_boxes: usize) -> Result<ZeroSet> {
    if !(tol > 0.0) {
        return Err(Error::validation("tol", "must be > 0"));
    }
    let (total, region) = winding_count_dilating(f, region)?;
    let mut contour = Contour::new(f, region);
    let mut zeros = Vec::new();
    let mut stack = vec![(contour.root_box(), total)];
    let mut boxes = 0usize;
    let finish = |zeros: &mut Vec<Zero>| {
        zeros.sort_by(|a: &Zero, b: &Zero| a.z.re.total_cmp(&b.z.re).then(a.z.im.total_cmp(&b.z.im)));
    };
    while let Some((b, n)) = stack.pop() {
        if n == 0 {
            continue;
        }
        boxes += 1;
        if boxes > max_boxes {
            finish(&mut zeros);
            return Err(Error::BudgetExceeded { boxes, partial: Vec::new() }).map_err(|e| attach_partial(e, &zeros));
        }
        let rect = contour.rect_of(&b);
        let centre = rect.center();
        let tiny = rect.diameter() < CLUSTER_DIAMETER * (1.0 + centre.norm());
        if n == 1 || tiny {
            let root = newton(f, centre, tol, &rect)?;
            if n == 1 || root.is_some() || tiny {
                if let Some(z) = root.or(if tiny { Some(centre) } else { None }) {
                    if n == 1 || tiny {
                        let residual = residual(f, z)?;
                        zeros.push(Zero { z, multiplicity: n as u32, residual });
                        continue;
                    }
                }
            }
        }
        let mut split = None;
        for attempt in 0..SPLIT_ATTEMPTS {
            let Some(children) = split_box(&b, &rect, attempt) else { break };
            let mut counts = Vec::with_capacity(children.len());
            let mut ok = true;
            for c in &children {
                match contour.winding(c) {
                    Ok(k) if k >= 0 => counts.push(k),
                    Ok(_) | Err(Error::BoundaryZero { .. }) | Err(Error::NonIntegerWinding { .. }) => {
                        ok = false;
                        break;
                    }
                    Err(e) => return Err(e),
                }
            }
            if ok && counts.iter().sum::<i64>() == n {
                split = Some(children.into_iter().zip(counts).collect::<Vec<_>>());
                break;
            }
        }
        match split {
            // pushed in reverse so boxes are visited in a fixed order
            Some(children) => stack.extend(children.into_iter().rev()),
            None => {
                // the box cannot be split cleanly any further: report it whole
                let z = newton(f, centre, tol, &rect)?.unwrap_or(centre);
                let residual = residual(f, z)?;
                zeros.push(Zero { z, multiplicity: n as u32, residual });
            }
        }
    }
    finish(&mut zeros);
    Ok(ZeroSet { zeros, region, boxes, evaluations: contour.evaluations() })
}

fn attach_partial(e: Error, zeros: &[Zero]) -> Error {
    match e {
        Error::BudgetExceeded { boxes, .. } => Error::BudgetExceeded {
            boxes,
            partial: zeros
                .iter()
                .map(|z| Eigenpair { lambda: z.z * z.z, z: z.z, multiplicity: z.multiplicity, residual: z.residual })
                .collect(),
        },
        other => other,
    }
}

/// Eigenvalues `λ = z²` of `H_R` with `z` in `region`, using full
/// Runge–Kutta propagation.
pub fn locate_eigenvalues(problem: &Problem, region: &ZRegion, tol: f64) -> Result<EigenvalueSet> {
    locate_eigenvalues_with(&CharacteristicFn::with_defaults(problem.clone()), region, tol)
}

pub fn locate_eigenvalues_with(f: &CharacteristicFn, region: &ZRegion, tol: f64) -> Result<EigenvalueSet> {
    if !(region.im_min > 0.0) {
        return Err(Error::Precondition(format!(
            "eigenvalue regions must lie strictly above the real axis (im_min = {})",
            region.im_min
        )));
    }
    let found = locate_zeros(f, region, tol, MAX_BOXES)?;
    let entries = found
        .zeros
        .iter()
        .map(|z| Eigenpair { lambda: z.z * z.z, z: z.z, multiplicity: z.multiplicity, residual: z.residual })
        .collect();
    Ok(EigenvalueSet { entries, problem: f.problem.clone(), region: found.region })
}
