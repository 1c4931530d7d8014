//! Background potentials `q` and the metadata the eigenvalue bounds need.
//!
//! Each family implements [`Profile`] and is registered by name in a
//! [`PotentialRegistry`]; [`make_potential`] resolves a textual spec such as
//! `box:A=2,Q=1` through the built-in registry.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quadrature::integrate_pieces;

/// Tail mass below which a semi-infinite integral is truncated.
pub const TAIL_CUTOFF: f64 = 1e-14;
const QUAD_TOL: f64 = 1e-10;
/// Spacing of the grid on which truncation points are chosen.
const TRUNCATION_GRID: f64 = 0.25;

/// One family of background potentials.
pub trait Profile: Send + Sync + fmt::Debug {
    fn family(&self) -> &'static str;

    /// `q(x)` for `x ≥ 0`.
    fn eval(&self, x: f64) -> f64;

    /// `Q` with `supp q ⊂ [0, Q]`, when the potential is compactly supported.
    fn support_bound(&self) -> Option<f64>;

    /// `k` with `|q(x)| ≤ A e^{-kx}`.
    fn decay_rate(&self) -> Option<f64>;

    /// Pointwise upper bound for `|q|`.
    fn envelope(&self, x: f64) -> f64;

    /// `∫_x^∞ e^{eps t} envelope(t) dt`; `∞` if it diverges.
    fn weighted_tail(&self, eps: f64, x: f64) -> f64;

    /// Points where `q` is not smooth (jumps or kinks).
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }

    /// Points where `q` jumps.
    fn jumps(&self) -> Vec<f64> {
        Vec::new()
    }

    /// Named parameters, for reports.
    fn parameters(&self) -> Vec<(&'static str, f64)>;
}

/// An immutable, cheaply clonable background potential.
#[derive(Clone, Debug)]
pub struct Potential {
    profile: Arc<dyn Profile>,
}

impl Potential {
    pub fn from_profile(profile: Arc<dyn Profile>) -> Self {
        Self { profile }
    }

    pub fn zero() -> Self {
        Self::from_profile(Arc::new(Zero))
    }

    pub fn family(&self) -> &'static str {
        self.profile.family()
    }

    pub fn profile(&self) -> &dyn Profile {
        self.profile.as_ref()
    }

    /// Unchecked pointwise value, for hot loops with `x ≥ 0` known.
    #[inline]
    pub fn value(&self, x: f64) -> f64 {
        self.profile.eval(x)
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(Error::Domain(format!("q evaluated at x = {x} < 0")));
        }
        Ok(self.profile.eval(x))
    }

    pub fn support_bound(&self) -> Option<f64> {
        self.profile.support_bound()
    }

    pub fn decay_rate(&self) -> Option<f64> {
        self.profile.decay_rate()
    }

    pub fn is_zero(&self) -> bool {
        self.support_bound() == Some(0.0)
    }

    pub fn envelope(&self, x: f64) -> f64 {
        self.profile.envelope(x)
    }

    pub fn envelope_tail(&self, x: f64) -> f64 {
        self.profile.weighted_tail(0.0, x)
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        self.profile.breakpoints()
    }

    /// Smallest point on a fixed grid beyond which `∫ e^{eps t} envelope`
    /// is below `tail_tol`. Compactly supported potentials truncate at `Q`.
    pub fn truncation_point(&self, eps: f64, tail_tol: f64) -> Result<f64> {
        if let Some(q) = self.support_bound() {
            return Ok(q);
        }
        if !self.profile.weighted_tail(eps, 0.0).is_finite() {
            return Err(Error::Divergence(format!(
                "∫ e^({eps} t)|q(t)| dt diverges for the {} potential",
                self.family()
            )));
        }
        let mut hi = TRUNCATION_GRID;
        while self.profile.weighted_tail(eps, hi) >= tail_tol {
            hi *= 2.0;
            if hi > 1e7 {
                return Err(Error::Divergence("envelope tail never drops below tolerance".into()));
            }
        }
        // smallest grid multiple in (hi/2, hi] with the tail below tolerance
        let mut lo_k = ((hi * 0.5) / TRUNCATION_GRID).floor() as u64;
        let mut hi_k = (hi / TRUNCATION_GRID).round() as u64;
        while hi_k - lo_k > 1 {
            let mid = (lo_k + hi_k) / 2;
            if self.profile.weighted_tail(eps, mid as f64 * TRUNCATION_GRID) < tail_tol {
                hi_k = mid;
            } else {
                lo_k = mid;
            }
        }
        Ok(hi_k as f64 * TRUNCATION_GRID)
    }

    /// Mean of `q` over the cell `[a, b]`; point value at the midpoint
    /// unless the cell straddles a jump.
    pub fn cell_mean(&self, a: f64, b: f64) -> f64 {
        let a = a.max(0.0);
        let jumps = self.profile.jumps();
        if jumps.iter().any(|&j| j > a && j < b) {
            let f = |x: f64| self.profile.eval(x);
            integrate_pieces(&f, a, b, &jumps, 1e-14 * (b - a)) / (b - a)
        } else {
            self.profile.eval(0.5 * (a + b))
        }
    }

    /// `∫_0^x w(t) |q(t)| dt` by adaptive quadrature.
    pub fn weighted_integral<W: Fn(f64) -> f64>(&self, w: W, x: f64, tol: f64) -> f64 {
        let end = match self.support_bound() {
            Some(q) => x.min(q),
            None => x,
        };
        if end <= 0.0 {
            return 0.0;
        }
        let f = |t: f64| w(t) * self.profile.eval(t).abs();
        integrate_pieces(&f, 0.0, end, &self.breakpoints(), tol)
    }

    pub fn describe(&self) -> String {
        let params = self.profile.parameters();
        if params.is_empty() {
            return self.family().to_string();
        }
        let body: Vec<String> = params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!("{}:{}", self.family(), body.join(","))
    }
}

/// `‖q‖_{L¹}`.
pub fn l1_norm(q: &Potential) -> Result<f64> {
    exp_weighted_integral(q, 0.0)
}

/// `∫_0^∞ e^{eps t} |q(t)| dt`.
pub fn exp_weighted_norm(q: &Potential, eps: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::validation("eps", "must be > 0"));
    }
    if q.support_bound().is_none() {
        match q.decay_rate() {
            Some(k) if eps < k => {}
            _ => {
                return Err(Error::Divergence(format!(
                    "eps = {eps} is not below the decay rate of the {} potential",
                    q.family()
                )))
            }
        }
    }
    exp_weighted_integral(q, eps)
}

fn exp_weighted_integral(q: &Potential, eps: f64) -> Result<f64> {
    if q.is_zero() {
        return Ok(0.0);
    }
    let end = q.truncation_point(eps, TAIL_CUTOFF)?;
    Ok(q.weighted_integral(|t| (eps * t).exp(), end, QUAD_TOL))
}

pub fn eval_q(q: &Potential, x: f64) -> Result<f64> {
    q.eval(x)
}

// ---------------------------------------------------------------------------
// families

#[derive(Debug, Clone, Copy)]
pub struct Zero;

impl Profile for Zero {
    fn family(&self) -> &'static str {
        "zero"
    }
    fn eval(&self, _x: f64) -> f64 {
        0.0
    }
    fn support_bound(&self) -> Option<f64> {
        Some(0.0)
    }
    fn decay_rate(&self) -> Option<f64> {
        None
    }
    fn envelope(&self, _x: f64) -> f64 {
        0.0
    }
    fn weighted_tail(&self, _eps: f64, _x: f64) -> f64 {
        0.0
    }
    fn parameters(&self) -> Vec<(&'static str, f64)> {
        Vec::new()
    }
}

/// `A` on `[0, Q]`, zero afterwards.
#[derive(Debug, Clone, Copy)]
pub struct BoxWell {
    pub amplitude: f64,
    pub width: f64,
}

impl Profile for BoxWell {
    fn family(&self) -> &'static str {
        "box"
    }
    fn eval(&self, x: f64) -> f64 {
        if x <= self.width {
            self.amplitude
        } else {
            0.0
        }
    }
    fn support_bound(&self) -> Option<f64> {
        Some(self.width)
    }
    fn decay_rate(&self) -> Option<f64> {
        None
    }
    fn envelope(&self, x: f64) -> f64 {
        self.eval(x).abs()
    }
    fn weighted_tail(&self, eps: f64, x: f64) -> f64 {
        compact_weighted_tail(self.amplitude.abs(), self.width, eps, x)
    }
    fn breakpoints(&self) -> Vec<f64> {
        vec![self.width]
    }
    fn jumps(&self) -> Vec<f64> {
        vec![self.width]
    }
    fn parameters(&self) -> Vec<(&'static str, f64)> {
        vec![("A", self.amplitude), ("Q", self.width)]
    }
}

/// Smooth bump on `[0, Q]` with peak `A` at `Q/2`.
#[derive(Debug, Clone, Copy)]
pub struct Bump {
    pub amplitude: f64,
    pub width: f64,
}

impl Profile for Bump {
    fn family(&self) -> &'static str {
        "bump"
    }
    fn eval(&self, x: f64) -> f64 {
        let t = 2.0 * x / self.width - 1.0;
        if t.abs() >= 1.0 {
            return 0.0;
        }
        self.amplitude * (1.0 - 1.0 / (1.0 - t * t)).exp()
    }
    fn support_bound(&self) -> Option<f64> {
        Some(self.width)
    }
    fn decay_rate(&self) -> Option<f64> {
        None
    }
    fn envelope(&self, x: f64) -> f64 {
        if x <= self.width {
            self.amplitude.abs()
        } else {
            0.0
        }
    }
    fn weighted_tail(&self, eps: f64, x: f64) -> f64 {
        compact_weighted_tail(self.amplitude.abs(), self.width, eps, x)
    }
    fn parameters(&self) -> Vec<(&'static str, f64)> {
        vec![("A", self.amplitude), ("Q", self.width)]
    }
}

/// `A e^{-kx}`.
#[derive(Debug, Clone, Copy)]
pub struct ExpDecay {
    pub amplitude: f64,
    pub rate: f64,
}

impl Profile for ExpDecay {
    fn family(&self) -> &'static str {
        "expdecay"
    }
    fn eval(&self, x: f64) -> f64 {
        self.amplitude * (-self.rate * x).exp()
    }
    fn support_bound(&self) -> Option<f64> {
        None
    }
    fn decay_rate(&self) -> Option<f64> {
        Some(self.rate)
    }
    fn envelope(&self, x: f64) -> f64 {
        self.eval(x).abs()
    }
    fn weighted_tail(&self, eps: f64, x: f64) -> f64 {
        let k = self.rate - eps;
        if k <= 0.0 {
            return f64::INFINITY;
        }
        self.amplitude.abs() * (-k * x).exp() / k
    }
    fn parameters(&self) -> Vec<(&'static str, f64)> {
        vec![("A", self.amplitude), ("k", self.rate)]
    }
}

/// Piecewise-linear interpolation of tabulated values, zero past the last
/// abscissa and constant before the first.
#[derive(Debug, Clone)]
pub struct Samples {
    xs: Vec<f64>,
    ys: Vec<f64>,
    peak: f64,
}

impl Samples {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() || xs.len() < 2 {
            return Err(Error::validation("samples", "need at least two (x, q) rows"));
        }
        if xs[0] < 0.0 {
            return Err(Error::validation("samples", "abscissae must be ≥ 0"));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::validation("samples", "abscissae must be strictly increasing"));
        }
        if xs.iter().chain(ys.iter()).any(|v| !v.is_finite()) {
            return Err(Error::validation("samples", "values must be finite"));
        }
        let peak = ys.iter().fold(0.0f64, |m, y| m.max(y.abs()));
        Ok(Self { xs, ys, peak })
    }

    /// Reads whitespace-separated `x q(x)` rows; `#` starts a comment.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split_whitespace().collect();
            if cols.len() != 2 {
                return Err(Error::validation("samples", format!("line {}: expected two columns", lineno + 1)));
            }
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| Error::validation("samples", format!("line {}: bad number `{s}`", lineno + 1)))
            };
            xs.push(parse(cols[0])?);
            ys.push(parse(cols[1])?);
        }
        Self::new(xs, ys)
    }

    fn last(&self) -> f64 {
        *self.xs.last().expect("validated non-empty")
    }
}

impl Profile for Samples {
    fn family(&self) -> &'static str {
        "samples"
    }
    fn eval(&self, x: f64) -> f64 {
        if x > self.last() {
            return 0.0;
        }
        if x <= self.xs[0] {
            return self.ys[0];
        }
        let i = self.xs.partition_point(|&xi| xi <= x).min(self.xs.len() - 1);
        let (x0, x1) = (self.xs[i - 1], self.xs[i]);
        let (y0, y1) = (self.ys[i - 1], self.ys[i]);
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }
    fn support_bound(&self) -> Option<f64> {
        Some(self.last())
    }
    fn decay_rate(&self) -> Option<f64> {
        None
    }
    fn envelope(&self, x: f64) -> f64 {
        if x <= self.last() {
            self.peak
        } else {
            0.0
        }
    }
    fn weighted_tail(&self, eps: f64, x: f64) -> f64 {
        compact_weighted_tail(self.peak, self.last(), eps, x)
    }
    fn breakpoints(&self) -> Vec<f64> {
        self.xs.clone()
    }
    fn jumps(&self) -> Vec<f64> {
        vec![self.last()]
    }
    fn parameters(&self) -> Vec<(&'static str, f64)> {
        vec![("points", self.xs.len() as f64), ("Q", self.last())]
    }
}

fn compact_weighted_tail(peak: f64, width: f64, eps: f64, x: f64) -> f64 {
    if x >= width || peak == 0.0 {
        return 0.0;
    }
    if eps == 0.0 {
        return peak * (width - x);
    }
    peak * ((eps * width).exp() - (eps * x).exp()) / eps
}

// ---------------------------------------------------------------------------
// registry

/// Family name plus its textual parameters, e.g. `box:A=2,Q=1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSpec {
    pub family: String,
    pub params: BTreeMap<String, String>,
}

impl PotentialSpec {
    /// Parses `family`, `family:key=value,...` or `family(v1,v2)`.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        let (family, body) = if let Some(open) = text.find('(') {
            let close = text
                .rfind(')')
                .ok_or_else(|| Error::validation("potential", format!("unbalanced parentheses in `{text}`")))?;
            (&text[..open], Some(&text[open + 1..close]))
        } else if let Some((f, rest)) = text.split_once(':') {
            (f, Some(rest))
        } else {
            (text, None)
        };
        let family = family.trim().to_ascii_lowercase();
        if family.is_empty() {
            return Err(Error::validation("potential", "empty family name"));
        }
        let mut params = BTreeMap::new();
        if let Some(body) = body {
            for (i, item) in body.split(',').map(str::trim).filter(|s| !s.is_empty()).enumerate() {
                match item.split_once('=') {
                    Some((k, v)) => params.insert(k.trim().to_string(), v.trim().to_string()),
                    None => params.insert(format!("#{i}"), item.to_string()),
                };
            }
        }
        Ok(Self { family, params })
    }

    /// Looks up a keyed parameter, falling back to its positional slot.
    pub fn get(&self, key: &str, position: usize) -> Option<&str> {
        self.params.get(key).or_else(|| self.params.get(&format!("#{position}"))).map(String::as_str)
    }

    pub fn number(&self, key: &str, position: usize) -> Result<f64> {
        let raw = self
            .get(key, position)
            .ok_or_else(|| Error::validation(key, format!("missing for the {} family", self.family)))?;
        let v: f64 = raw.parse().map_err(|_| Error::validation(key, format!("`{raw}` is not a number")))?;
        if !v.is_finite() {
            return Err(Error::validation(key, "must be finite"));
        }
        Ok(v)
    }

    fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        for k in self.params.keys() {
            let positional =
                k.strip_prefix('#').and_then(|i| i.parse::<usize>().ok()).is_some_and(|i| i < allowed.len());
            if !positional && !allowed.contains(&k.as_str()) {
                return Err(Error::validation(k.clone(), format!("unknown parameter for the {} family", self.family)));
            }
        }
        Ok(())
    }
}

type Constructor = fn(&PotentialSpec) -> Result<Arc<dyn Profile>>;

/// Name → constructor table for potential families.
pub struct PotentialRegistry {
    entries: BTreeMap<&'static str, Constructor>,
}

impl PotentialRegistry {
    pub fn empty() -> Self {
        Self { entries: BTreeMap::new() }
    }

    pub fn builtin() -> Self {
        let mut r = Self::empty();
        r.register("zero", build_zero);
        r.register("box", build_box);
        r.register("bump", build_bump);
        r.register("expdecay", build_expdecay);
        r.register("samples", build_samples);
        r
    }

    pub fn register(&mut self, name: &'static str, ctor: Constructor) {
        self.entries.insert(name, ctor);
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.keys().copied()
    }

    pub fn build(&self, spec: &PotentialSpec) -> Result<Potential> {
        let ctor = self.entries.get(spec.family.as_str()).ok_or_else(|| {
            let known: Vec<&str> = self.names().collect();
            Error::validation("potential", format!("unknown family `{}` (known: {})", spec.family, known.join(", ")))
        })?;
        Ok(Potential::from_profile(ctor(spec)?))
    }
}

impl Default for PotentialRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}

/// Builds a potential from its textual spec using the built-in families.
pub fn make_potential(spec: &str) -> Result<Potential> {
    PotentialRegistry::builtin().build(&PotentialSpec::parse(spec)?)
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 {
        Ok(v)
    } else {
        Err(Error::validation(name, "must be > 0"))
    }
}

fn build_zero(spec: &PotentialSpec) -> Result<Arc<dyn Profile>> {
    spec.check_keys(&[])?;
    Ok(Arc::new(Zero))
}

fn build_box(spec: &PotentialSpec) -> Result<Arc<dyn Profile>> {
    spec.check_keys(&["A", "Q"])?;
    let amplitude = spec.number("A", 0)?;
    let width = positive("Q", spec.number("Q", 1)?)?;
    Ok(Arc::new(BoxWell { amplitude, width }))
}

fn build_bump(spec: &PotentialSpec) -> Result<Arc<dyn Profile>> {
    spec.check_keys(&["A", "Q"])?;
    let amplitude = spec.number("A", 0)?;
    let width = positive("Q", spec.number("Q", 1)?)?;
    Ok(Arc::new(Bump { amplitude, width }))
}

fn build_expdecay(spec: &PotentialSpec) -> Result<Arc<dyn Profile>> {
    spec.check_keys(&["A", "k"])?;
    let amplitude = spec.number("A", 0)?;
    let rate = positive("k", spec.number("k", 1)?)?;
    Ok(Arc::new(ExpDecay { amplitude, rate }))
}

fn build_samples(spec: &PotentialSpec) -> Result<Arc<dyn Profile>> {
    spec.check_keys(&["path"])?;
    let path = spec.get("path", 0).ok_or_else(|| Error::validation("path", "samples family needs a file path"))?;
    Ok(Arc::new(Samples::from_file(Path::new(path))?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_family() {
        let q = make_potential("zero").unwrap();
        assert_eq!(q.eval(3.0).unwrap(), 0.0);
        assert_eq!(l1_norm(&q).unwrap(), 0.0);
        assert_eq!(exp_weighted_norm(&q, 3.0).unwrap(), 0.0);
        assert!(q.is_zero());
    }

    #[test]
    fn box_family() {
        let q = make_potential("box:A=2,Q=1").unwrap();
        assert_eq!(q.eval(0.5).unwrap(), 2.0);
        assert_eq!(q.eval(1.5).unwrap(), 0.0);
        assert_eq!(q.support_bound(), Some(1.0));
        assert!((l1_norm(&q).unwrap() - 2.0).abs() < 1e-10);
        let expected = 2.0 * (std::f64::consts::E - 1.0);
        assert!((exp_weighted_norm(&q, 1.0).unwrap() - expected).abs() < 1e-10);
        // positional form
        let p = make_potential("box(2,1)").unwrap();
        assert_eq!(p.describe(), q.describe());
    }

    #[test]
    fn bump_peaks_at_midpoint() {
        let q = make_potential("bump:A=3,Q=2").unwrap();
        assert!((q.eval(1.0).unwrap() - 3.0).abs() < 1e-15);
        assert_eq!(q.eval(2.0).unwrap(), 0.0);
        assert_eq!(q.eval(0.0).unwrap(), 0.0);
    }

    #[test]
    fn expdecay_family() {
        let q = make_potential("expdecay:A=1,k=5").unwrap();
        assert_eq!(q.decay_rate(), Some(5.0));
        assert_eq!(q.support_bound(), None);
        assert!((l1_norm(&q).unwrap() - 0.2).abs() < 1e-10);
        assert!((exp_weighted_norm(&q, 1.0).unwrap() - 0.25).abs() < 1e-10);
        assert!(matches!(exp_weighted_norm(&q, 5.0), Err(Error::Divergence(_))));
        assert!(matches!(exp_weighted_norm(&q, 6.0), Err(Error::Divergence(_))));
    }

    #[test]
    fn l1_is_small_eps_limit() {
        for spec in ["box:A=2,Q=1", "bump:A=-1.5,Q=3", "expdecay:A=2,k=0.7"] {
            let q = make_potential(spec).unwrap();
            let a = l1_norm(&q).unwrap();
            let b = exp_weighted_norm(&q, 1e-8).unwrap();
            assert!((a - b).abs() <= 1e-6 * a, "{spec}: {a} vs {b}");
        }
    }

    #[test]
    fn validation_errors_name_the_parameter() {
        match make_potential("box:A=2,Q=-1") {
            Err(Error::Validation { param, .. }) => assert_eq!(param, "Q"),
            other => panic!("unexpected {other:?}"),
        }
        match make_potential("expdecay:A=1,k=0") {
            Err(Error::Validation { param, .. }) => assert_eq!(param, "k"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(make_potential("box:A=1,Q=1,Z=3").is_err());
        assert!(make_potential("wobble:A=1").is_err());
        assert!(make_potential("box:A=nan,Q=1").is_err());
        assert!(Samples::parse("0 1\n0 2\n").is_err());
    }

    #[test]
    fn negative_abscissa_rejected() {
        let q = make_potential("box:A=2,Q=1").unwrap();
        assert!(matches!(q.eval(-0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn samples_interpolate_and_vanish_after_last_point() {
        let s = Samples::parse("# x q\n0 1\n1 3\n2 -1\n").unwrap();
        let q = Potential::from_profile(Arc::new(s));
        assert!((q.eval(0.5).unwrap() - 2.0).abs() < 1e-15);
        assert!((q.eval(1.5).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(q.eval(2.5).unwrap(), 0.0);
        assert_eq!(q.support_bound(), Some(2.0));
        // |q| integrates to 2 + (0.75*1.5 + 0.25*0.5)... computed piecewise
        let expected = 2.0 + 3.0 * 0.75 / 2.0 + 1.0 * 0.25 / 2.0;
        assert!((l1_norm(&q).unwrap() - expected).abs() < 1e-10);
    }

    #[test]
    fn samples_file_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("q.txt");
        std::fs::write(&path, "0.0 0.5\n1.0 0.25\n2.0 0.0\n").unwrap();
        let q = make_potential(&format!("samples:path={}", path.display())).unwrap();
        assert!((q.eval(0.5).unwrap() - 0.375).abs() < 1e-15);
    }

    #[test]
    fn compact_families_vanish_past_support() {
        for spec in ["box:A=2,Q=1", "bump:A=1,Q=0.7"] {
            let q = make_potential(spec).unwrap();
            let qb = q.support_bound().unwrap();
            for i in 1..=10_000 {
                let x = qb + 1e-3 * i as f64;
                assert_eq!(q.eval(x).unwrap(), 0.0, "{spec} at {x}");
            }
        }
    }

    #[test]
    fn envelope_dominates_on_audit_grid() {
        let s = Samples::parse("0 1\n1 -3\n2 0.5\n").unwrap();
        let pots = vec![
            make_potential("box:A=-2,Q=1").unwrap(),
            make_potential("bump:A=1,Q=2").unwrap(),
            make_potential("expdecay:A=3,k=2").unwrap(),
            Potential::from_profile(Arc::new(s)),
        ];
        for q in &pots {
            for i in 0..10_000 {
                let x = 5e-4 * i as f64;
                assert!(q.value(x).abs() <= q.envelope(x) + 1e-15, "{} at {x}", q.describe());
            }
        }
    }

    #[test]
    fn truncation_point_respects_tolerance() {
        let q = make_potential("expdecay:A=1,k=5").unwrap();
        let t = q.truncation_point(0.0, 1e-12).unwrap();
        assert!(q.envelope_tail(t) < 1e-12);
        assert!(q.envelope_tail(t - 0.25) >= 1e-12);
    }

    #[test]
    fn cell_mean_splits_jumps() {
        let q = make_potential("box:A=1,Q=1").unwrap();
        assert!((q.cell_mean(0.9, 1.1) - 0.5).abs() < 1e-12);
        assert_eq!(q.cell_mean(0.2, 0.4), 1.0);
    }
}
