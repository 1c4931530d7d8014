//! Experiment pipelines behind the command-line runner: spectra, R-sweeps
//! with bound reports, the invariant suites, the half-disc zero-count
//! demonstration and the literature comparison table.
//!
//! Every pipeline is deterministic for a given configuration and seed.

use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::bounds::{
    alpha_beta_default, baseline_bounds, count_bound_compact, count_bound_naimark, empirical_onset, empirical_x,
    fr0_proximity_with, hpm_check, jensen_zero_bound_ln, magnitude_radius, BoundReport, JensenParams, RadiusForm,
};
use crate::config::ExperimentConfig;
use crate::eigen::{locate_eigenvalues_with, locate_zeros, CharacteristicFn, EigenvalueSet, IM_MARGIN, MAX_BOXES};
use crate::error::{Error, Result};
use crate::math::{in_gamma_strip, sqrt_upper, GammaStrip, Scaled};
use crate::oracle::{aligned_truncation, default_truncation, fd_build, fd_count, fd_richardson};
use crate::potentials::{make_potential, Potential};
use crate::schrodinger::{gronwall_ln_rhs, solve_theta_with_tol, Problem, PropagatorRegistry, DEFAULT_TAIL_TOL};
use crate::winding::{AnalyticFn, Rect, ZRegion};

pub const SCHEMA: u32 = 1;
pub const CSV_HEADER: &str = "R,re_lambda,im_lambda,re_z,im_z,multiplicity,residual";

/// Bottom-left corner of the default search region in the `z`-plane.
pub const DEFAULT_RE_MIN: f64 = 1e-3;

/// The default `z`-region for `H_R`: the real part runs to 1.25 times the
/// largest `|z|` allowed by the magnitude bound, the imaginary part to
/// `√(1 + γ + sup|q|) + 1`, which covers the enclosure used downstream.
pub fn default_region(problem: &Problem) -> Result<ZRegion> {
    let gamma = problem.gamma();
    let rho = magnitude_radius(gamma, problem.r(), RadiusForm::Simplified)?;
    let depth = problem.q.envelope(0.0);
    ZRegion::new(
        DEFAULT_RE_MIN,
        (1.25 * (rho * rho + gamma).sqrt()).max(4.0),
        IM_MARGIN,
        (1.0 + gamma + depth).sqrt() + 1.0,
    )
}

fn region_for(cfg: &ExperimentConfig, problem: &Problem) -> Result<ZRegion> {
    let d = default_region(problem)?;
    ZRegion::new(
        cfg.re_min.unwrap_or(d.re_min),
        cfg.re_max.unwrap_or(d.re_max),
        cfg.im_min.unwrap_or(d.im_min),
        cfg.im_max.unwrap_or(d.im_max),
    )
}

fn characteristic(cfg: &ExperimentConfig, problem: Problem) -> Result<CharacteristicFn> {
    let propagator = PropagatorRegistry::builtin().build(&cfg.propagator, cfg.rtol, DEFAULT_TAIL_TOL)?;
    Ok(CharacteristicFn::new(problem, propagator))
}

fn pool(cfg: &ExperimentConfig) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.threads {
        b = b.num_threads(n);
    }
    b.build().map_err(|e| Error::Config(format!("cannot start worker threads: {e}")))
}

/// Eigenvalues of `H_R` for one `R`, checked against the residual tolerance.
pub fn eigs_at(cfg: &ExperimentConfig, q: &Potential, r: f64) -> Result<EigenvalueSet> {
    let problem = Problem::new(q.clone(), cfg.gamma, r)?;
    let region = region_for(cfg, &problem)?;
    let f = characteristic(cfg, problem)?;
    let set = locate_eigenvalues_with(&f, &region, cfg.tol)?;
    if let Some(bad) = set.entries.iter().find(|e| !(e.residual <= cfg.tol)) {
        return Err(Error::ConditionViolated(format!(
            "eigenvalue λ = {} at R = {r} has residual {:e} above tol = {:e}",
            bad.lambda, bad.residual, cfg.tol
        )));
    }
    Ok(set)
}

/// Rows in the fixed CSV layout.
pub fn eigen_csv(sets: &[&EigenvalueSet]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for set in sets {
        let r = set.problem.r();
        for e in &set.entries {
            let _ = writeln!(
                out,
                "{r},{},{},{},{},{},{:e}",
                e.lambda.re, e.lambda.im, e.z.re, e.z.im, e.multiplicity, e.residual
            );
        }
    }
    out
}

/// Summary of one `R` of a sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    #[serde(rename = "R")]
    pub r: f64,
    /// `N(H_R)`, counted with multiplicity.
    pub count: u64,
    pub region: ZRegion,
    pub max_abs_lambda: f64,
    /// `max √|λ − iγ|` over eigenvalues in the strip.
    pub max_sqrt_shifted: f64,
    /// `max √|λ − iγ| / (R / log R)`.
    pub growth_ratio: f64,
    pub radius_simplified: f64,
    pub radius_lambert: f64,
    /// Largest `|λ|` outside the strip, 0 if there is none.
    pub max_outside: f64,
    /// `X_emp` from this `R` alone.
    pub x_emp: f64,
    /// Empirical `C₂(R)`.
    pub c2: f64,
    pub baseline_magnitude: f64,
    pub baseline_count: f64,
}

#[derive(Debug, Clone)]
pub struct Sweep {
    pub potential: Potential,
    pub gamma: f64,
    pub sets: Vec<EigenvalueSet>,
    pub rows: Vec<SweepRow>,
    /// `X_emp` over the whole sweep.
    pub x_emp: f64,
}

/// Grid for the empirical `C₂`: `|z²| ≥ 1 + γ` everywhere on it.
pub fn c2_grid(gamma: f64) -> ZRegion {
    let s = (1.0 + gamma).sqrt();
    Rect { re_min: s + 0.1, re_max: s + 3.0, im_min: 0.05, im_max: 1.5 }
}

fn summarize(cfg: &ExperimentConfig, set: &EigenvalueSet, c2: f64) -> Result<SweepRow> {
    let gamma = cfg.gamma;
    let r = set.problem.r();
    let strip = GammaStrip::new(gamma)?;
    let shifted = |l: Complex64| (l - Complex64::new(0.0, gamma)).norm().sqrt();
    let mut max_abs: f64 = 0.0;
    let mut max_in: f64 = 0.0;
    let mut max_out: f64 = 0.0;
    for e in &set.entries {
        max_abs = max_abs.max(e.lambda.norm());
        if in_gamma_strip(e.lambda, &strip) {
            max_in = max_in.max(shifted(e.lambda));
        } else {
            max_out = max_out.max(e.lambda.norm());
        }
    }
    let base = baseline_bounds(&set.problem.q, gamma, r)?;
    Ok(SweepRow {
        r,
        count: set.count(),
        region: set.region,
        max_abs_lambda: max_abs,
        max_sqrt_shifted: max_in,
        growth_ratio: max_in / (r / r.ln()),
        radius_simplified: magnitude_radius(gamma, r, RadiusForm::Simplified)?,
        radius_lambert: magnitude_radius(gamma, r, RadiusForm::Lambert)?,
        max_outside: max_out,
        x_emp: empirical_x(set.entries.iter().map(|e| &e.lambda), gamma)?,
        c2,
        baseline_magnitude: base.magnitude,
        baseline_count: base.count,
    })
}

/// Eigenvalues and per-`R` summaries over `R_list`.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Sweep> {
    cfg.validate()?;
    let q = cfg.build_potential()?;
    let rs = cfg.r_values()?;
    let computed: Vec<Result<(EigenvalueSet, f64)>> = pool(cfg)?.install(|| {
        rs.par_iter()
            .map(|&r| {
                let set = eigs_at(cfg, &q, r)?;
                let f = characteristic(cfg, Problem::new(q.clone(), cfg.gamma, r)?)?;
                let c2 = fr0_proximity_with(&f, &c2_grid(cfg.gamma), cfg.c2_grid)?;
                Ok((set, c2))
            })
            .collect()
    });
    let mut sets = Vec::with_capacity(rs.len());
    let mut rows = Vec::with_capacity(rs.len());
    for item in computed {
        let (set, c2) = item?;
        rows.push(summarize(cfg, &set, c2)?);
        sets.push(set);
    }
    let x_emp = empirical_x(sets.iter().flat_map(|s| s.entries.iter().map(|e| &e.lambda)), cfg.gamma)?;
    Ok(Sweep { potential: q, gamma: cfg.gamma, sets, rows, x_emp })
}

/// Least-squares slope of `log y` against `log x` over points with `y > 0`.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points.iter().filter(|p| p.0 > 0.0 && p.1 > 0.0).map(|p| (p.0.ln(), p.1.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// `max/min − 1` of a list of positive values.
pub fn relative_spread(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    max / min - 1.0
}

/// The exponent used for the exponential-decay count bound: `0.99·k/4`,
/// which keeps `∫e^{4at}|q|` finite for `|q| ≤ Ae^{-kt}`.
pub fn naimark_exponent(q: &Potential) -> Option<f64> {
    q.decay_rate().map(|k| 0.99 * k / 4.0)
}

/// Bound reports for a sweep: enclosure, magnitude, counts, baselines.
pub fn sweep_reports(sweep: &Sweep) -> Result<Vec<BoundReport>> {
    let gamma = sweep.gamma;
    let mut reports = Vec::new();
    for row in &sweep.rows {
        reports.push(BoundReport::new(row.r, "enclosure", sweep.x_emp, row.max_outside));
        reports.push(BoundReport::new(row.r, "magnitude", row.radius_simplified, row.max_sqrt_shifted));
        reports.push(BoundReport::new(row.r, "magnitude_lambert", row.radius_lambert, row.max_sqrt_shifted));
        if sweep.potential.support_bound().is_some() {
            reports.push(BoundReport::new(
                row.r,
                "count_compact",
                count_bound_compact(gamma, row.r)?,
                row.count as f64,
            ));
        }
        if let Some(a) = naimark_exponent(&sweep.potential) {
            let rhs = count_bound_naimark(gamma, row.r, a, sweep.x_emp)?;
            reports.push(BoundReport::new(row.r, "count_exponential", rhs, row.count as f64));
        }
        reports.push(BoundReport::new(row.r, "baseline_magnitude", row.baseline_magnitude, row.max_abs_lambda));
        reports.push(BoundReport::new(row.r, "baseline_count", row.baseline_count, row.count as f64));
    }
    Ok(reports)
}

/// The JSON report of a sweep.
pub fn sweep_report_json(sweep: &Sweep) -> Result<Value> {
    let reports = sweep_reports(sweep)?;
    let names: std::collections::BTreeSet<&str> = reports.iter().map(|r| r.bound_name.as_str()).collect();
    let mut onset = serde_json::Map::new();
    for name in names {
        let of_name: Vec<BoundReport> = reports.iter().filter(|r| r.bound_name == name).cloned().collect();
        onset.insert(name.to_string(), json!(empirical_onset(&of_name)));
    }
    let counts: Vec<(f64, f64)> = sweep.rows.iter().map(|r| (r.r, r.count as f64)).collect();
    let c2: Vec<f64> = sweep.rows.iter().map(|r| r.c2).collect();
    let c2_ratio = if c2.iter().all(|v| *v > 0.0) {
        Some(c2.iter().copied().fold(0.0, f64::max) / c2.iter().copied().fold(f64::INFINITY, f64::min))
    } else {
        None
    };
    Ok(json!({
        "schema": SCHEMA,
        "potential": sweep.potential.describe(),
        "gamma": sweep.gamma,
        "x_emp": sweep.x_emp,
        "naimark_exponent": naimark_exponent(&sweep.potential),
        "count_loglog_slope": loglog_slope(&counts),
        "c2_max_over_min": c2_ratio,
        "rows": sweep.rows,
        "reports": reports,
        "onset": onset,
        "all_satisfied": reports.iter().all(|r| r.satisfied),
    }))
}

/// One line per `R` of the literature comparison.
pub fn baselines_csv(sweep: &Sweep) -> Result<String> {
    let mut out = String::from("R,N,max_abs_lambda,bound_magnitude,baseline_magnitude,bound_count,baseline_count\n");
    for row in &sweep.rows {
        // |λ| ≤ |λ − iγ| + γ ≤ ρ² + γ inside the strip, X outside
        let bound_mag = (row.radius_simplified.powi(2) + sweep.gamma).max(sweep.x_emp);
        let bound_count = if sweep.potential.support_bound().is_some() {
            count_bound_compact(sweep.gamma, row.r)?
        } else if let Some(a) = naimark_exponent(&sweep.potential) {
            count_bound_naimark(sweep.gamma, row.r, a, sweep.x_emp)?
        } else {
            f64::NAN
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            row.r, row.count, row.max_abs_lambda, bound_mag, row.baseline_magnitude, bound_count, row.baseline_count
        );
    }
    Ok(out)
}

/// Pass/fail tally of one invariant suite.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub passed: u64,
    pub failed: u64,
}

impl SuiteResult {
    fn new(name: &str) -> Self {
        Self { name: name.into(), passed: 0, failed: 0 }
    }

    fn record(&mut self, ok: bool) {
        if ok {
            self.passed += 1;
        } else {
            self.failed += 1;
        }
    }
}

/// The elementary `h±` inequalities on `samples` points per `γ ∈ {0.5, 1, 5}`,
/// uniform in `[−50, 50]²` with one in a hundred on the positive axis.
pub fn verify_hpm(seed: u64, samples: usize) -> SuiteResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut res = SuiteResult::new("hpm");
    for gamma in [0.5, 1.0, 5.0] {
        for k in 0..samples {
            let lambda = if k % 100 == 0 {
                Complex64::new(rng.gen_range(0.0..50.0), 0.0)
            } else {
                Complex64::new(rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0))
            };
            let c = hpm_check(lambda, gamma);
            if !c.degenerate {
                res.record(c.all());
            }
        }
    }
    res
}

fn random_potential(rng: &mut ChaCha8Rng) -> Result<Potential> {
    let amp = rng.gen_range(-3.0..3.0);
    match rng.gen_range(0..4) {
        0 => make_potential(&format!("box:A={amp},Q={}", rng.gen_range(0.2..3.0))),
        1 => make_potential(&format!("bump:A={amp},Q={}", rng.gen_range(0.2..3.0))),
        2 => make_potential(&format!("expdecay:A={amp},k={}", rng.gen_range(0.5..5.0))),
        _ => Ok(Potential::zero()),
    }
}

/// `|θ| + |θ'| ≤ (1 + x) e^{|Im μ| x} exp(∫_0^x (1 + t)|q|)` on random
/// `(z, x, q, γ)` with `|z| ≤ 5` and `x ≤ 10`; compared in logarithms with a relative allowance for the
/// integration error.
pub fn verify_gronwall(seed: u64, trials: usize) -> Result<SuiteResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut res = SuiteResult::new("gronwall");
    for _ in 0..trials {
        let q = random_potential(&mut rng)?;
        let z = loop {
            let z = Complex64::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
            if z.norm() <= 5.0 {
                break z;
            }
        };
        let x = rng.gen_range(0.01..10.0);
        let gamma = rng.gen_range(0.0..2.0);
        let problem = Problem::new(q.clone(), gamma, x)?;
        let s = solve_theta_with_tol(&problem, z, x, 1e-11)?;
        let lhs = (s.value.norm() + s.derivative.norm()).ln();
        res.record(lhs <= gronwall_ln_rhs(&q, z, gamma, x) + 1e-8);
    }
    Ok(res)
}

fn ln_poly(z: Complex64, roots: &[Complex64]) -> f64 {
    roots.iter().map(|r| (z - r).norm().ln()).sum()
}

/// `ln sup` of `ln_abs` over `∂D_r`, the upper semicircle and `[−r, r]`.
fn ln_sup_half_disc<F: FnMut(Complex64) -> Result<f64>>(r: f64, spacing: f64, mut ln_abs: F) -> Result<f64> {
    let arc = (std::f64::consts::PI * r / spacing).ceil().max(64.0) as usize;
    let seg = (2.0 * r / spacing).ceil().max(64.0) as usize;
    let mut best = f64::NEG_INFINITY;
    for k in 0..=arc {
        let t = std::f64::consts::PI * k as f64 / arc as f64;
        best = best.max(ln_abs(Complex64::from_polar(r, t))?);
    }
    for k in 0..=seg {
        best = best.max(ln_abs(Complex64::new(-r + 2.0 * r * k as f64 / seg as f64, 0.0))?);
    }
    Ok(best)
}

/// Outcome of one planted-zero trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlantedTrial {
    pub planted: u64,
    pub bound: f64,
}

/// Polynomials with 0 to 10 zeros planted in `D_{αr,η,Y}` and up to five
/// more outside it; the half-disc bound from sampled boundary data must be
/// at least the planted count.
pub fn planted_trials(seed: u64, trials: usize) -> Result<Vec<PlantedTrial>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(trials);
    for _ in 0..trials {
        let y = rng.gen_range(1.0..5.0);
        let eta = y * rng.gen_range(0.1..0.9);
        let (alpha, beta) = alpha_beta_default(eta, y)?;
        // r large enough for the strip to fit inside D_{αr}
        let r = rng.gen_range(2.0..6.0) * y / alpha;
        let p = JensenParams::new(r, alpha, beta, eta, y)?;
        let planted = rng.gen_range(0..=10u64);
        let mut roots = Vec::new();
        while (roots.len() as u64) < planted {
            let z = Complex64::new(rng.gen_range(-alpha * r..alpha * r), rng.gen_range(eta..y));
            if p.in_zero_region(z) {
                roots.push(z);
            }
        }
        let extra = rng.gen_range(0..=5);
        while roots.len() < planted as usize + extra {
            let z = Complex64::new(rng.gen_range(-2.0 * r..2.0 * r), rng.gen_range(-2.0 * r..2.0 * r));
            if !p.in_zero_region(z) {
                roots.push(z);
            }
        }
        let ln_sup = ln_sup_half_disc(r, r / 2000.0, |z| Ok(ln_poly(z, &roots)))?;
        let bound = jensen_zero_bound_ln(ln_sup, ln_poly(p.center(), &roots), &p)?;
        out.push(PlantedTrial { planted, bound });
    }
    Ok(out)
}

pub fn verify_jensen(seed: u64, trials: usize) -> Result<SuiteResult> {
    let mut res = SuiteResult::new("jensen-soundness");
    for t in planted_trials(seed, trials)? {
        res.record(t.bound.floor() as u64 >= t.planted);
    }
    Ok(res)
}

/// A shooting eigenvalue next to its extrapolated finite-difference partner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MatchedEigenvalue {
    pub shooting: Complex64,
    pub fd: Complex64,
    pub fd_error: f64,
    pub ratio: f64,
}

/// Comparison of the shooting pipeline with the finite-difference oracle.
#[derive(Debug, Clone, Serialize)]
pub struct Agreement {
    pub lambda_rect: Rect,
    pub truncation: f64,
    pub n: usize,
    pub fd_count: i64,
    pub shooting_count: u64,
    pub matches: Vec<MatchedEigenvalue>,
}

impl Agreement {
    pub fn counts_agree(&self) -> bool {
        self.fd_count >= 0 && self.fd_count as u64 == self.shooting_count
    }

    pub fn max_error(&self) -> f64 {
        self.matches.iter().map(|m| m.fd_error).fold(0.0, f64::max)
    }

    /// Every pair within the extrapolated error estimate.
    pub fn within_error(&self) -> bool {
        self.matches.iter().all(|m| (m.shooting - m.fd).norm() <= m.fd_error)
    }
}

/// Moves each edge of `base` to the middle of the gap between neighbouring
/// eigenvalue coordinates when an eigenvalue sits within `margin` of it.
pub fn matched_lambda_rect(lambdas: &[Complex64], base: Rect, margin: f64) -> Result<Rect> {
    let adjust = |edge: f64, coords: Vec<f64>| {
        if !coords.iter().any(|c| (c - edge).abs() < margin) {
            return edge;
        }
        let below = coords.iter().copied().filter(|c| *c < edge - margin).fold(f64::NEG_INFINITY, f64::max);
        let above = coords.iter().copied().filter(|c| *c > edge + margin).fold(f64::INFINITY, f64::min);
        let near: Vec<f64> = coords.iter().copied().filter(|c| (c - edge).abs() < margin).collect();
        let lo = near.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = near.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        // the wider of the gaps just below and just above the cluster
        if lo - below >= above - hi {
            0.5 * (lo + below.max(lo - 4.0 * margin))
        } else {
            0.5 * (hi + above.min(hi + 4.0 * margin))
        }
    };
    let band = |l: &&Complex64| l.im >= base.im_min - margin && l.im <= base.im_max + margin;
    let column = |l: &&Complex64| l.re >= base.re_min - margin && l.re <= base.re_max + margin;
    let re: Vec<f64> = lambdas.iter().filter(band).map(|l| l.re).collect();
    let im: Vec<f64> = lambdas.iter().filter(column).map(|l| l.im).collect();
    Rect::new(
        adjust(base.re_min, re.clone()),
        adjust(base.re_max, re),
        adjust(base.im_min, im.clone()),
        adjust(base.im_max, im),
    )
}

/// Shooting eigenvalues in `lambda_rect` against `fd_count` on an `n`-point
/// grid, and each shooting eigenvalue against its Richardson-extrapolated
/// finite-difference partner.
pub fn oracle_agreement(problem: &Problem, lambda_rect: &Rect, n: usize, tol: f64) -> Result<Agreement> {
    if !(lambda_rect.im_min > 0.0) {
        return Err(Error::Precondition("the λ-rectangle must lie above the real axis".into()));
    }
    let corners = [
        Complex64::new(lambda_rect.re_min, lambda_rect.im_min),
        Complex64::new(lambda_rect.re_max, lambda_rect.im_min),
        Complex64::new(lambda_rect.re_min, lambda_rect.im_max),
        Complex64::new(lambda_rect.re_max, lambda_rect.im_max),
    ];
    let im_z_min = corners.iter().map(|c| sqrt_upper(*c).im).fold(f64::INFINITY, f64::min);
    let re_z_max = corners.iter().map(|c| sqrt_upper(*c).re).fold(0.0, f64::max);
    let im_z_max = corners.iter().map(|c| sqrt_upper(*c).im).fold(0.0, f64::max);
    let z_region = Rect::new(DEFAULT_RE_MIN, re_z_max + 0.5, IM_MARGIN.min(0.5 * im_z_min), im_z_max + 0.5)?;
    let f = CharacteristicFn::with_defaults(problem.clone());
    let shooting: Vec<Complex64> = locate_eigenvalues_with(&f, &z_region, tol)?
        .entries
        .iter()
        .filter(|e| lambda_rect.contains(e.lambda))
        .flat_map(|e| std::iter::repeat_n(e.lambda, e.multiplicity as usize))
        .collect();
    let l = aligned_truncation(problem, default_truncation(problem, im_z_min), n);
    let sys = fd_build(problem, l, n)?;
    let count = fd_count(&sys, lambda_rect)?;
    let mut matches = Vec::with_capacity(shooting.len());
    for &lambda in &shooting {
        let rich = fd_richardson(problem, l, n, lambda)?;
        matches.push(MatchedEigenvalue {
            shooting: lambda,
            fd: rich.extrapolated,
            fd_error: rich.error,
            ratio: rich.ratio,
        });
    }
    Ok(Agreement {
        lambda_rect: *lambda_rect,
        truncation: l,
        n,
        fd_count: count,
        shooting_count: shooting.len() as u64,
        matches,
    })
}

/// Oracle agreement on a seeded box well at `γ = 1`, `R = 8`.
pub fn verify_oracle(seed: u64) -> Result<SuiteResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut res = SuiteResult::new("oracle-agreement");
    let amp = [0.5, 1.0, 1.5][rng.gen_range(0..3)];
    let q = make_potential(&format!("box:A={amp},Q=1"))?;
    let problem = Problem::new(q, 1.0, 8.0)?;
    let region = Rect::new(DEFAULT_RE_MIN, 4.0, IM_MARGIN, 2.0)?;
    let lambdas: Vec<Complex64> =
        locate_eigenvalues_with(&CharacteristicFn::with_defaults(problem.clone()), &region, 1e-12)?
            .entries
            .iter()
            .map(|e| e.lambda)
            .collect();
    let rect = matched_lambda_rect(&lambdas, Rect::new(0.1, 10.0, 0.3, 0.95)?, 0.01)?;
    let a = oracle_agreement(&problem, &rect, 6000, 1e-12)?;
    res.record(a.counts_agree());
    for m in &a.matches {
        res.record((m.shooting - m.fd).norm() <= m.fd_error.max(1e-9) && m.fd_error < 1e-3);
    }
    Ok(res)
}

/// All invariant suites.
pub fn run_verify(cfg: &ExperimentConfig) -> Result<Vec<SuiteResult>> {
    Ok(vec![
        verify_hpm(cfg.seed, cfg.hpm_samples),
        verify_gronwall(cfg.seed, cfg.gronwall_trials)?,
        verify_jensen(cfg.seed, cfg.jensen_trials)?,
        verify_oracle(cfg.seed)?,
    ])
}

pub fn verify_json(suites: &[SuiteResult], seed: u64) -> Value {
    let passed: u64 = suites.iter().map(|s| s.passed).sum();
    let failed: u64 = suites.iter().map(|s| s.failed).sum();
    json!({ "schema": SCHEMA, "seed": seed, "suites": suites, "passed": passed, "failed": failed })
}

/// `f_R(z − ia)`.
#[derive(Debug, Clone)]
pub struct ShiftedCharacteristic<'a> {
    pub f: &'a CharacteristicFn,
    pub a: f64,
}

impl ShiftedCharacteristic<'_> {
    fn back(&self, z: Complex64) -> Complex64 {
        z - Complex64::new(0.0, self.a)
    }
}

impl AnalyticFn for ShiftedCharacteristic<'_> {
    fn eval(&self, z: Complex64) -> Result<Scaled> {
        self.f.eval_scaled(self.back(z))
    }

    fn max_spacing(&self, z: Complex64) -> f64 {
        self.f.max_spacing(self.back(z))
    }

    fn ln_scale(&self, z: Complex64) -> f64 {
        self.f.ln_scale(self.back(z))
    }
}

/// The half-disc bound applied to `f̃_R(z) = f_R(z − ia)`.
#[derive(Debug, Clone, Serialize)]
pub struct JensenDemo {
    #[serde(rename = "R")]
    pub r: f64,
    pub a: f64,
    pub x_emp: f64,
    pub params: JensenParams,
    pub lambda_factor: f64,
    pub ln_sup: f64,
    pub ln_center: f64,
    pub bound: f64,
    /// Zeros of `f̃_R` in `D_{αr,η,Y}`, with multiplicity.
    pub true_count: u64,
    /// Eigenvalues of `H_R` found in the default region.
    pub eigenvalue_count: u64,
    pub naimark_bound: f64,
}

impl JensenDemo {
    pub fn bound_holds(&self) -> bool {
        self.bound.floor() as u64 >= self.true_count
    }

    pub fn below_naimark(&self) -> bool {
        self.bound <= self.naimark_bound && self.true_count as f64 <= self.naimark_bound
    }
}

/// Needs a potential supported in `[0, R]`, for which `f_R` is entire.
/// `η = a`, `Y = √X_emp + a`, `α = β` by the default choice and
/// `αr = √γ + a + 5γR/log R`.
pub fn jensen_demo(cfg: &ExperimentConfig) -> Result<JensenDemo> {
    cfg.validate()?;
    let q = cfg.build_potential()?;
    let r_barrier = cfg.single_r()?;
    let problem = Problem::new(q.clone(), cfg.gamma, r_barrier)?;
    if !problem.compact_within_barrier() {
        return Err(Error::Precondition("the half-disc demonstration needs q supported inside [0, R]".into()));
    }
    let a = cfg.shift;
    let eigs = eigs_at(cfg, &q, r_barrier)?;
    let x_emp = empirical_x(eigs.entries.iter().map(|e| &e.lambda), cfg.gamma)?;
    let (eta, y) = (a, x_emp.sqrt() + a);
    let (alpha, beta) = alpha_beta_default(eta, y)?;
    let rho = magnitude_radius(cfg.gamma, r_barrier, RadiusForm::Simplified)?;
    let r = (cfg.gamma.sqrt() + a + rho) / alpha;
    let params = JensenParams::new(r, alpha, beta, eta, y)?;

    let f = characteristic(cfg, problem)?;
    let shifted = ShiftedCharacteristic { f: &f, a };
    let spacing = 0.5 / (1.0 + r_barrier);
    let ln_sup = ln_sup_half_disc(r, spacing, |z| Ok(shifted.eval(z)?.ln_abs()))?;
    let ln_center = shifted.eval(params.center())?.ln_abs();
    let bound = jensen_zero_bound_ln(ln_sup, ln_center, &params)?;

    let box_region = Rect::new(-alpha * r, alpha * r, eta, y)?;
    let zeros = locate_zeros(&shifted, &box_region, cfg.tol, MAX_BOXES)?;
    let true_count = zeros.zeros.iter().filter(|z| params.in_zero_region(z.z)).map(|z| z.multiplicity as u64).sum();
    let naimark_bound = count_bound_naimark(cfg.gamma, r_barrier, a, x_emp)?;
    Ok(JensenDemo {
        r: r_barrier,
        a,
        x_emp,
        lambda_factor: params.lambda_factor(),
        params,
        ln_sup,
        ln_center,
        bound,
        true_count,
        eigenvalue_count: eigs.count(),
        naimark_bound,
    })
}

pub fn jensen_demo_json(demo: &JensenDemo) -> Value {
    json!({
        "schema": SCHEMA,
        "demo": demo,
        "bound_holds": demo.bound_holds(),
        "below_naimark": demo.below_naimark(),
    })
}
