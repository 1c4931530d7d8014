//! The explicit bounds: eigenvalue enclosure and magnitude, the two
//! counting bounds, the Jensen-type zero count for half-discs, the
//! elementary inequalities behind them, and the literature baselines.

use std::f64::consts::{E, LN_2};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::eigen::{f_closed_zero_scaled, CharacteristicFn, EigenvalueSet};
use crate::error::{Error, Result};
use crate::math::{in_gamma_strip, lambert_w, sqrt_upper, GammaStrip};
use crate::potentials::{exp_weighted_norm, l1_norm, Potential};
use crate::schrodinger::{Hybrid, Problem};
use crate::winding::ZRegion;

/// One bound checked against a measured quantity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    #[serde(rename = "R")]
    pub r: f64,
    pub bound_name: String,
    pub rhs: f64,
    pub measured: f64,
    pub satisfied: bool,
}

impl BoundReport {
    pub fn new(r: f64, bound_name: impl Into<String>, rhs: f64, measured: f64) -> Self {
        Self { r, bound_name: bound_name.into(), rhs, measured, satisfied: measured <= rhs }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RadiusForm {
    /// `5γR / log R`
    Simplified,
    /// `4γR / W(4γR)`
    Lambert,
}

/// Bound on `√|λ − iγ|` for eigenvalues in the strip.
pub fn magnitude_radius(gamma: f64, r: f64, form: RadiusForm) -> Result<f64> {
    match form {
        RadiusForm::Simplified => {
            if !(r > 1.0) {
                return Err(Error::Domain(format!("5γR/log R needs R > 1, got {r}")));
            }
            Ok(5.0 * gamma * r / r.ln())
        }
        RadiusForm::Lambert => {
            let x = 4.0 * gamma * r;
            if !(x > 0.0) {
                return Err(Error::Domain(format!("4γR/W(4γR) needs 4γR > 0, got {x}")));
            }
            Ok(x / lambert_w(x)?)
        }
    }
}

/// One report per eigenvalue: `measured` is 0 inside the strip and `|λ|`
/// outside it, against `rhs = X`.
pub fn check_enclosure(eigs: &EigenvalueSet, x_radius: f64) -> Result<Vec<BoundReport>> {
    if !(x_radius > 0.0) {
        return Err(Error::validation("x_radius", "must be > 0"));
    }
    let strip = GammaStrip::new(eigs.problem.gamma())?;
    Ok(eigs
        .entries
        .iter()
        .map(|e| {
            let measured = if in_gamma_strip(e.lambda, &strip) { 0.0 } else { e.lambda.norm() };
            BoundReport::new(eigs.problem.r(), "enclosure", x_radius, measured)
        })
        .collect())
}

/// `(11/log 2)·γR²/log R`.
pub fn count_bound_compact(gamma: f64, r: f64) -> Result<f64> {
    if !(r > 1.0) {
        return Err(Error::Domain(format!("the compact-support count bound needs R > 1, got {r}")));
    }
    Ok(11.0 / LN_2 * gamma * r * r / r.ln())
}

/// `88788·(√X + a)/a²·γ²R³/(log R)²`.
pub fn count_bound_naimark(gamma: f64, r: f64, a: f64, x_radius: f64) -> Result<f64> {
    if !(r > 1.0) {
        return Err(Error::Domain(format!("the exponential-decay count bound needs R > 1, got {r}")));
    }
    if !(a > 0.0) {
        return Err(Error::Domain(format!("decay exponent a = {a} must be > 0")));
    }
    if !(x_radius > 0.0) {
        return Err(Error::Domain(format!("X = {x_radius} must be > 0")));
    }
    let ln_r = r.ln();
    Ok(88788.0 * (x_radius.sqrt() + a) / (a * a) * gamma * gamma * r.powi(3) / (ln_r * ln_r))
}

/// Parameters of the half-disc zero count: radius `r`, the shrink factors
/// `α, β`, and the strip `η ≤ Im z ≤ Y` holding the zeros.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JensenParams {
    pub r: f64,
    pub alpha: f64,
    pub beta: f64,
    pub eta: f64,
    #[serde(rename = "Y")]
    pub y: f64,
}

impl JensenParams {
    pub fn new(r: f64, alpha: f64, beta: f64, eta: f64, y: f64) -> Result<Self> {
        let p = Self { r, alpha, beta, eta, y };
        if !(0.0 < alpha && alpha < 1.0) {
            return Err(Error::validation("alpha", format!("{alpha} is not in (0, 1)")));
        }
        if !(0.0 < beta && beta < 1.0) {
            return Err(Error::validation("beta", format!("{beta} is not in (0, 1)")));
        }
        if !(0.0 < eta && eta < y && y < r) {
            return Err(Error::validation("eta", format!("need 0 < η < Y < r, got η = {eta}, Y = {y}, r = {r}")));
        }
        if !(p.condition_value() > y / eta) {
            return Err(Error::ConditionViolated(format!(
                "β((1−α)/(α+β))² = {} does not exceed Y/η = {}",
                p.condition_value(),
                y / eta
            )));
        }
        Ok(p)
    }

    /// `β((1−α)/(α+β))²`, which must exceed `Y/η`.
    pub fn condition_value(&self) -> f64 {
        let t = (1.0 - self.alpha) / (self.alpha + self.beta);
        self.beta * t * t
    }

    /// `Λ(r) = (1 + 4βη/((α+β)²r)) / (1 + 4Y/((1−α)²r))`.
    pub fn lambda_factor(&self) -> f64 {
        let ab = self.alpha + self.beta;
        let num = 1.0 + 4.0 * self.beta * self.eta / (ab * ab * self.r);
        let den = 1.0 + 4.0 * self.y / ((1.0 - self.alpha).powi(2) * self.r);
        num / den
    }

    /// The point `iβr` where `f` is sampled.
    pub fn center(&self) -> Complex64 {
        Complex64::new(0.0, self.beta * self.r)
    }

    /// Whether `z` lies in `{η ≤ Im z ≤ Y, |z| ≤ αr}`.
    pub fn in_zero_region(&self, z: Complex64) -> bool {
        z.im >= self.eta && z.im <= self.y && z.norm() <= self.alpha * self.r
    }
}

/// `α = β = η/(4(2Y + η))`.
pub fn alpha_beta_default(eta: f64, y: f64) -> Result<(f64, f64)> {
    if !(eta > 0.0 && eta < y) || !y.is_finite() {
        return Err(Error::Precondition(format!("need 0 < η < Y, got η = {eta}, Y = {y}")));
    }
    let a = eta / (4.0 * (2.0 * y + eta));
    let t = (1.0 - a) / (2.0 * a);
    if !(a * t * t > y / eta) {
        return Err(Error::ConditionViolated(format!("default α = β = {a} fails the Λ > 1 condition")));
    }
    Ok((a, a))
}

/// `(2/log Λ(r))·log(sup/(|f(iβr)|·min{β, 1−β}))`, clamped at 0.
pub fn jensen_zero_bound(f_boundary_sup: f64, f_center: f64, p: &JensenParams) -> Result<f64> {
    if !(f_boundary_sup > 0.0) || !f_boundary_sup.is_finite() {
        return Err(Error::validation("f_boundary_sup", "must be finite and > 0"));
    }
    if !(f_center > 0.0) || !f_center.is_finite() {
        return Err(Error::validation("f_center", "must be finite and > 0"));
    }
    jensen_zero_bound_ln(f_boundary_sup.ln(), f_center.ln(), p)
}

/// [`jensen_zero_bound`] from logarithms of the boundary data, for functions
/// whose size is far outside the `f64` range.
pub fn jensen_zero_bound_ln(ln_sup: f64, ln_center: f64, p: &JensenParams) -> Result<f64> {
    if !ln_sup.is_finite() || !ln_center.is_finite() {
        return Err(Error::validation("boundary data", "log-moduli must be finite"));
    }
    let lambda = p.lambda_factor();
    if !(lambda > 1.0) {
        return Err(Error::ConditionViolated(format!("Λ(r) = {lambda} is not > 1")));
    }
    let m = p.beta.min(1.0 - p.beta);
    let bound = 2.0 / lambda.ln() * (ln_sup - ln_center - m.ln());
    Ok(bound.max(0.0))
}

/// Outcome of the elementary inequalities for one `λ`; inequalities that do
/// not apply to `λ` are reported as holding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HpmCheck {
    pub a: bool,
    pub b: bool,
    pub c: bool,
    /// `λ` within `1e-9` of `0` or `iγ`, where the inequalities degenerate.
    pub degenerate: bool,
}

impl HpmCheck {
    pub fn all(&self) -> bool {
        self.a && self.b && self.c
    }
}

pub const HPM_DEGENERATE_RADIUS: f64 = 1e-9;

/// The inequalities for `h± = √λ ± √(λ−iγ)`, with slack `1e-12` relative.
pub fn hpm_check(lambda: Complex64, gamma: f64) -> HpmCheck {
    hpm_check_with_slack(lambda, gamma, 1e-12)
}

pub fn hpm_check_with_slack(lambda: Complex64, gamma: f64, slack: f64) -> HpmCheck {
    let shifted = lambda - Complex64::new(0.0, gamma);
    if lambda.norm() < HPM_DEGENERATE_RADIUS || shifted.norm() < HPM_DEGENERATE_RADIUS {
        return HpmCheck { a: true, b: true, c: true, degenerate: true };
    }
    let k = sqrt_upper(lambda);
    let mu = sqrt_upper(shifted);
    let plus = (k + mu).norm();
    let minus = (k - mu).norm();
    let le = |lhs: f64, rhs: f64| lhs <= rhs * (1.0 + slack);
    let in_strip = lambda.re > 0.0 && lambda.im > 0.0 && lambda.im < gamma;
    let on_half_line = lambda.im == 0.0 && lambda.re >= 0.0;
    let mut out = HpmCheck { a: true, b: true, c: true, degenerate: false };
    if in_strip || on_half_line {
        let s = shifted.norm().sqrt();
        out.a = le(plus, gamma / s) && le(s, minus);
    } else {
        let s = lambda.norm().sqrt();
        out.b = le(s, plus) && le(minus, gamma / s);
    }
    if in_strip {
        out.c = le(mu.im, std::f64::consts::FRAC_1_SQRT_2 * gamma / shifted.norm().sqrt());
    }
    out
}

/// Literature comparisons for `V = q + iγχ_[0,R]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Baselines {
    /// `(‖q‖₁ + γR)²`, a bound on `|λ|`.
    pub magnitude: f64,
    /// `R²(∫e^{t/R}|q| dt + γR(e−1))²`, a bound on the count.
    pub count: f64,
}

pub fn baseline_bounds(q: &Potential, gamma: f64, r: f64) -> Result<Baselines> {
    if !(r > 0.0) {
        return Err(Error::validation("R", "must be > 0"));
    }
    let mag = l1_norm(q)? + gamma * r;
    let weighted = if q.is_zero() { 0.0 } else { exp_weighted_norm(q, 1.0 / r)? };
    let count = r * r * (weighted + gamma * r * (E - 1.0)).powi(2);
    Ok(Baselines { magnitude: mag * mag, count })
}

/// Empirical constant of `|f_R − f_R⁽⁰⁾| ≤ C₂ e^{Im√(λ−iγ)R}` over an
/// `n × n` grid of `z`, in the λ-plane normalisation `2μ·f_R(z)`, which is
/// the Wronskian of the Levinson-normalised solutions (the regular solution
/// used there is `2iμθ`).
pub fn fr0_proximity(problem: &Problem, grid: &ZRegion, n: usize) -> Result<f64> {
    let f = CharacteristicFn::new(problem.clone(), std::sync::Arc::new(Hybrid::default()));
    fr0_proximity_with(&f, grid, n)
}

pub fn fr0_proximity_with(f: &CharacteristicFn, grid: &ZRegion, n: usize) -> Result<f64> {
    let problem = &f.problem;
    if problem.q.support_bound().is_none() && problem.q.decay_rate().is_none() {
        return Err(Error::Precondition("the potential carries no decay metadata".into()));
    }
    if !(grid.im_min > 0.0) {
        return Err(Error::Precondition("the grid must lie in the upper half-plane".into()));
    }
    if n < 2 {
        return Err(Error::validation("n", "need at least a 2 × 2 grid"));
    }
    let (gamma, r) = (problem.gamma(), problem.r());
    let mut worst: f64 = 0.0;
    for j in 0..n {
        for k in 0..n {
            let z = Complex64::new(
                grid.re_min + grid.width() * j as f64 / (n - 1) as f64,
                grid.im_min + grid.height() * k as f64 / (n - 1) as f64,
            );
            if (z * z).norm() < 1.0 + gamma {
                return Err(Error::Precondition(format!("grid point {z} has |λ| < 1 + γ")));
            }
            let mu = sqrt_upper(z * z - Complex64::new(0.0, gamma));
            let gap = f.eval_scaled(z)?.sub(&f_closed_zero_scaled(gamma, r, z));
            let value = if gap.is_zero() { 0.0 } else { (gap.ln_abs() + (2.0 * mu).norm().ln() - mu.im * r).exp() };
            worst = worst.max(value);
        }
    }
    Ok(worst)
}

/// `X_emp = max(1.1·max{|λ| : λ ∉ Γ_γ}, 1 + γ)`.
pub fn empirical_x<'a>(lambdas: impl IntoIterator<Item = &'a Complex64>, gamma: f64) -> Result<f64> {
    let strip = GammaStrip::new(gamma)?;
    let outside = lambdas.into_iter().filter(|l| !in_gamma_strip(**l, &strip)).map(|l| l.norm()).fold(0.0, f64::max);
    Ok((1.1 * outside).max(1.0 + gamma))
}

/// Smallest `R` from which every report holds, if the last one holds.
pub fn empirical_onset(reports: &[BoundReport]) -> Option<f64> {
    let mut by_r: Vec<(f64, bool)> = Vec::new();
    for rep in reports {
        match by_r.iter_mut().find(|(r, _)| *r == rep.r) {
            Some(entry) => entry.1 &= rep.satisfied,
            None => by_r.push((rep.r, rep.satisfied)),
        }
    }
    by_r.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut onset = None;
    for (r, ok) in by_r {
        match (ok, onset) {
            (true, None) => onset = Some(r),
            (false, _) => onset = None,
            _ => {}
        }
    }
    onset
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::make_potential;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn magnitude_radius_examples() {
        let v = magnitude_radius(1.0, 100.0, RadiusForm::Simplified).unwrap();
        assert!((v - 108.57).abs() < 0.01);
        let v = magnitude_radius(1.0, E, RadiusForm::Simplified).unwrap();
        assert!((v - 5.0 * E).abs() < 1e-12);
        assert!((v - 13.59).abs() < 0.01);
        let v = magnitude_radius(1.0, 100.0, RadiusForm::Lambert).unwrap();
        let w = 400.0 / v;
        assert!((w * w.exp() - 400.0).abs() < 1e-9);
        assert!(matches!(magnitude_radius(1.0, 1.0, RadiusForm::Simplified), Err(Error::Domain(_))));
        assert!(matches!(magnitude_radius(0.0, 5.0, RadiusForm::Lambert), Err(Error::Domain(_))));
    }

    #[test]
    fn lambert_radius_below_simplified_from_three() {
        for k in 0..=200 {
            let r = 3.0 * (1e6f64 / 3.0).powf(k as f64 / 200.0);
            for gamma in [0.5, 1.0, 5.0] {
                let l = magnitude_radius(gamma, r, RadiusForm::Lambert).unwrap();
                let s = magnitude_radius(gamma, r, RadiusForm::Simplified).unwrap();
                assert!(l <= s, "γ = {gamma}, R = {r}: {l} > {s}");
            }
        }
    }

    #[test]
    fn count_bound_examples() {
        let v = count_bound_compact(1.0, E).unwrap();
        assert!((v - 11.0 / LN_2 * E * E).abs() < 1e-9);
        assert!((v - 117.3).abs() < 0.1);
        let v = count_bound_compact(1.0, 100.0).unwrap();
        assert!((v / 3.446e4 - 1.0).abs() < 1e-3);
        assert_eq!(count_bound_compact(2.0, 100.0).unwrap(), 2.0 * v);
        assert!(count_bound_compact(1.0, 0.5).is_err());

        let v = count_bound_naimark(1.0, 100.0, 1.0, 4.0).unwrap();
        let want = 88788.0 * 3.0 * 1e6 / 100f64.ln().powi(2);
        assert!((v - want).abs() < 1e-6 * want);
        assert!((v / 1.256e10 - 1.0).abs() < 1e-3);
        assert!((count_bound_naimark(2.0, 100.0, 1.0, 4.0).unwrap() - 4.0 * v).abs() < 1e-6 * v);
        let mut prev = f64::INFINITY;
        for k in 0..40 {
            let a = 2.0 + 0.25 * k as f64;
            let b = count_bound_naimark(1.0, 100.0, a, 4.0).unwrap();
            assert!(b < prev);
            prev = b;
        }
        assert!(count_bound_naimark(1.0, 100.0, 0.0, 4.0).is_err());
    }

    #[test]
    fn alpha_beta_examples() {
        let (a, b) = alpha_beta_default(1.0, 4.0).unwrap();
        assert_eq!(a, b);
        assert!((a - 1.0 / 36.0).abs() < 1e-15);
        let p = JensenParams::new(100.0, a, b, 1.0, 4.0).unwrap();
        assert!((p.condition_value() - 8.51).abs() < 0.01);
        let (a, _) = alpha_beta_default(2.0, 4.0).unwrap();
        assert!((a - 0.05).abs() < 1e-15);
        assert!(alpha_beta_default(4.0, 4.0).is_err());
    }

    #[test]
    fn lambda_factor_example() {
        let a = 1.0 / 36.0;
        let p = JensenParams::new(100.0, a, a, 1.0, 4.0).unwrap();
        let num = 1.0 + 4.0 * a / (4.0 * a * a * 100.0);
        let den = 1.0 + 16.0 / ((1.0 - a).powi(2) * 100.0);
        assert!((num - 1.36).abs() < 1e-12);
        assert!((den - 1.16927).abs() < 1e-5);
        assert!((p.lambda_factor() - 1.1631).abs() < 1e-4);
    }

    #[test]
    fn constant_function_bound_is_nonnegative() {
        let (a, b) = alpha_beta_default(1.0, 4.0).unwrap();
        let p = JensenParams::new(100.0, a, b, 1.0, 4.0).unwrap();
        let v = jensen_zero_bound(3.0, 3.0, &p).unwrap();
        assert!((v - 2.0 / p.lambda_factor().ln() * (1.0 / b).ln()).abs() < 1e-12);
        assert_eq!(jensen_zero_bound(1.0, 1e9, &p).unwrap(), 0.0);
        assert!(jensen_zero_bound(1.0, 0.0, &p).is_err());
    }

    #[test]
    fn jensen_params_reject_bad_condition() {
        assert!(matches!(JensenParams::new(100.0, 0.4, 0.4, 1.0, 4.0), Err(Error::ConditionViolated(_))));
        assert!(JensenParams::new(3.0, 0.01, 0.01, 1.0, 4.0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn default_choice_meets_condition(eta_frac in 1e-6f64..0.999, y in 1e-3f64..1e3) {
            let eta = eta_frac * y;
            let (a, b) = alpha_beta_default(eta, y).unwrap();
            prop_assert!(b < 0.5);
            let p = JensenParams::new(y * 10.0 + 1.0, a, b, eta, y).unwrap();
            prop_assert!(p.condition_value() > y / eta);
        }

        #[test]
        fn condition_implies_lambda_above_one(eta in 0.01f64..10.0, ratio in 1.01f64..50.0, r_mult in 1.01f64..1e4, shrink in 0.05f64..1.0) {
            let y = eta * ratio;
            let (a0, _) = alpha_beta_default(eta, y).unwrap();
            let alpha = a0 * shrink;
            let p = JensenParams::new(y * r_mult, alpha, a0, eta, y);
            if let Ok(p) = p {
                prop_assert!(p.lambda_factor() > 1.0);
            }
        }
    }

    #[test]
    fn hpm_examples() {
        let k = sqrt_upper(c(1.0, 1.0));
        let mu = sqrt_upper(c(1.0, -1.0));
        assert!(((k + mu).norm() - 0.9102).abs() < 1e-4);
        assert!(hpm_check(c(1.0, 1.0), 2.0).all());
        let plus = (sqrt_upper(c(-4.0, 0.0)) + sqrt_upper(c(-4.0, -1.0))).norm();
        assert!((plus - 4.023).abs() < 1e-3);
        assert!(hpm_check(c(-4.0, 0.0), 1.0).all());
        assert!((sqrt_upper(c(1.0, -0.5)).im - 0.2430).abs() < 1e-4);
        assert!(hpm_check(c(1.0, 0.5), 1.0).all());
        let d = hpm_check(c(0.0, 1.0), 1.0);
        assert!(d.degenerate && d.all());
    }

    #[test]
    fn enclosure_reports() {
        use crate::eigen::{Eigenpair, EigenvalueSet};
        let p = Problem::new(Potential::zero(), 1.0, 5.0).unwrap();
        let mk = |l: Complex64| Eigenpair { lambda: l, z: sqrt_upper(l), multiplicity: 1, residual: 0.0 };
        let set = EigenvalueSet {
            entries: vec![mk(c(1.0, 0.5)), mk(c(-2.0, 0.0))],
            problem: p,
            region: ZRegion::new(0.1, 1.0, 0.1, 1.0).unwrap(),
        };
        let reps = check_enclosure(&set, 1.0).unwrap();
        assert!(reps[0].satisfied);
        assert!(!reps[1].satisfied);
        assert!(check_enclosure(&set, 0.0).is_err());
    }

    #[test]
    fn baseline_examples() {
        let b = baseline_bounds(&Potential::zero(), 1.0, 100.0).unwrap();
        assert!((b.magnitude - 1e4).abs() < 1e-9);
        let want = (E - 1.0).powi(2) * 1e8;
        assert!((b.count - want).abs() < 1e-9 * want);
        let b = baseline_bounds(&Potential::zero(), 0.0, 100.0).unwrap();
        assert_eq!((b.magnitude, b.count), (0.0, 0.0));
        let q = make_potential("box:A=2,Q=1").unwrap();
        let b = baseline_bounds(&q, 1.0, 10.0).unwrap();
        assert!((b.magnitude - 144.0).abs() < 1e-9);
    }

    #[test]
    fn proximity_vanishes_without_potential() {
        let p = Problem::new(Potential::zero(), 1.0, 10.0).unwrap();
        let grid = ZRegion::new(1.5, 4.0, 0.05, 1.5).unwrap();
        let v = fr0_proximity(&p, &grid, 6).unwrap();
        assert!(v < 1e-12, "vs {v}");
        let low = ZRegion::new(0.1, 4.0, 0.05, 1.5).unwrap();
        assert!(matches!(fr0_proximity(&p, &low, 6), Err(Error::Precondition(_))));
    }

    #[test]
    fn proximity_finite_for_box() {
        let q = make_potential("box:A=1,Q=1").unwrap();
        let grid = ZRegion::new(1.5, 4.0, 0.05, 1.5).unwrap();
        let c20 = fr0_proximity(&Problem::new(q.clone(), 1.0, 20.0).unwrap(), &grid, 6).unwrap();
        let c40 = fr0_proximity(&Problem::new(q, 1.0, 40.0).unwrap(), &grid, 6).unwrap();
        assert!(c20.is_finite() && c20 > 0.0);
        assert!(c40 / c20 < 10.0 && c20 / c40 < 10.0);
    }

    #[test]
    fn onset_is_first_r_of_final_run() {
        let reps = [
            BoundReport::new(10.0, "x", 1.0, 0.5),
            BoundReport::new(20.0, "x", 1.0, 2.0),
            BoundReport::new(30.0, "x", 1.0, 0.5),
            BoundReport::new(40.0, "x", 1.0, 0.5),
        ];
        assert_eq!(empirical_onset(&reps), Some(30.0));
        assert_eq!(empirical_onset(&reps[..2]), None);
    }

    #[test]
    fn empirical_x_has_floor() {
        assert_eq!(empirical_x(&[c(1.0, 0.5)], 1.0).unwrap(), 2.0);
        assert!((empirical_x(&[c(-4.0, 0.0)], 1.0).unwrap() - 4.4).abs() < 1e-12);
    }
}
