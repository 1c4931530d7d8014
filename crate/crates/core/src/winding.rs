//! Zero counting by the argument principle on axis-aligned rectangles.
//!
//! Box corners and boundary samples live on a dyadic integer lattice over
//! the root rectangle, so neighbouring boxes and parent/child boxes reuse
//! the same sample points through a shared cache.

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::Scaled;

/// Maximum number of fresh evaluations a single count may spend.
pub const MAX_SAMPLES: usize = 1 << 20;
const LATTICE_BITS: u32 = 52;
const LATTICE: u64 = 1 << LATTICE_BITS;
const MIN_SEGMENTS: u64 = 8;
/// Local modulus drop that signals a zero sitting on the contour.
const BOUNDARY_DROP: f64 = 1e-13;

/// A function analytic on a neighbourhood of the rectangles it is used on.
pub trait AnalyticFn: Sync {
    fn eval(&self, z: Complex64) -> Result<Scaled>;

    /// Largest sample spacing near `z` that still resolves the phase of
    /// `f` (infinite if unknown).
    fn max_spacing(&self, _z: Complex64) -> f64 {
        f64::INFINITY
    }

    /// `ln` of the natural size of `f` near `z`; residuals are reported
    /// relative to it.
    fn ln_scale(&self, _z: Complex64) -> f64 {
        0.0
    }
}

/// Adapts a plain closure.
pub struct Plain<F>(pub F);

impl<F: Fn(Complex64) -> Complex64 + Sync> AnalyticFn for Plain<F> {
    fn eval(&self, z: Complex64) -> Result<Scaled> {
        Ok(Scaled::from_complex((self.0)(z)))
    }
}

/// Attaches a phase-resolution hint to another function.
pub struct WithSpacing<F> {
    pub inner: F,
    pub spacing: f64,
}

impl<F: AnalyticFn> AnalyticFn for WithSpacing<F> {
    fn eval(&self, z: Complex64) -> Result<Scaled> {
        self.inner.eval(z)
    }

    fn max_spacing(&self, _z: Complex64) -> f64 {
        self.spacing
    }
}

/// An axis-aligned rectangle `[re_min, re_max] × [im_min, im_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

/// Rectangle in the `z = √λ` plane.
pub type ZRegion = Rect;

impl Rect {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self> {
        let all_finite = [re_min, re_max, im_min, im_max].iter().all(|v| v.is_finite());
        if !all_finite || !(re_min < re_max) || !(im_min < im_max) {
            return Err(Error::validation(
                "region",
                format!("[{re_min}, {re_max}] × [{im_min}, {im_max}] is not a proper rectangle"),
            ));
        }
        Ok(Self { re_min, re_max, im_min, im_max })
    }

    pub fn width(&self) -> f64 {
        self.re_max - self.re_min
    }

    pub fn height(&self) -> f64 {
        self.im_max - self.im_min
    }

    pub fn diameter(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn center(&self) -> Complex64 {
        Complex64::new(0.5 * (self.re_min + self.re_max), 0.5 * (self.im_min + self.im_max))
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.re >= self.re_min && z.re <= self.re_max && z.im >= self.im_min && z.im <= self.im_max
    }

    /// Grows the rectangle about its centre by `factor`, keeping a positive
    /// lower edge positive.
    pub fn dilated(&self, factor: f64) -> Rect {
        let c = self.center();
        let hw = 0.5 * self.width() * factor;
        let hh = 0.5 * self.height() * factor;
        let im_min = if self.im_min > 0.0 { (c.im - hh).max(self.im_min / factor) } else { c.im - hh };
        Rect { re_min: c.re - hw, re_max: c.re + hw, im_min, im_max: c.im + hh }
    }
}

/// Integer corners of a sub-box of the root lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LatticeBox {
    pub x0: u64,
    pub x1: u64,
    pub y0: u64,
    pub y1: u64,
}

/// Boundary sampler with a cache shared by all boxes of one root region.
pub struct Contour<'f, F: AnalyticFn + ?Sized> {
    f: &'f F,
    root: Rect,
    cache: HashMap<(u64, u64), Scaled>,
    evaluations: usize,
}

impl<'f, F: AnalyticFn + ?Sized> Contour<'f, F> {
    pub fn new(f: &'f F, root: Rect) -> Self {
        Self { f, root, cache: HashMap::new(), evaluations: 0 }
    }

    pub fn root(&self) -> Rect {
        self.root
    }

    pub fn root_box(&self) -> LatticeBox {
        LatticeBox { x0: 0, x1: LATTICE, y0: 0, y1: LATTICE }
    }

    /// Total fresh evaluations so far.
    pub fn evaluations(&self) -> usize {
        self.evaluations
    }

    pub fn point(&self, ix: u64, iy: u64) -> Complex64 {
        let tx = ix as f64 / LATTICE as f64;
        let ty = iy as f64 / LATTICE as f64;
        Complex64::new(self.root.re_min + self.root.width() * tx, self.root.im_min + self.root.height() * ty)
    }

    pub fn rect_of(&self, b: &LatticeBox) -> Rect {
        let lo = self.point(b.x0, b.y0);
        let hi = self.point(b.x1, b.y1);
        Rect { re_min: lo.re, re_max: hi.re, im_min: lo.im, im_max: hi.im }
    }

    pub fn eval(&mut self, z: Complex64) -> Result<Scaled> {
        self.f.eval(z)
    }

    fn value(&mut self, ix: u64, iy: u64) -> Result<Scaled> {
        if let Some(v) = self.cache.get(&(ix, iy)) {
            return Ok(*v);
        }
        let z = self.point(ix, iy);
        let v = self.f.eval(z)?;
        if v.is_zero() || !v.mant.re.is_finite() || !v.mant.im.is_finite() {
            if v.is_zero() {
                return Err(Error::BoundaryZero { at: z });
            }
            return Err(Error::Overflow(format!("non-finite function value at {z}")));
        }
        self.evaluations += 1;
        self.cache.insert((ix, iy), v);
        Ok(v)
    }

    /// Samples the segment between two lattice points on a horizontal or
    /// vertical line; returns values in order from `a` to `b`.
    fn edge(&mut self, a: (u64, u64), b: (u64, u64), budget_start: usize) -> Result<Vec<Scaled>> {
        let horizontal = a.1 == b.1;
        let (lo, hi, fixed) =
            if horizontal { (a.0.min(b.0), a.0.max(b.0), a.1) } else { (a.1.min(b.1), a.1.max(b.1), a.0) };
        let reversed = if horizontal { a.0 > b.0 } else { a.1 > b.1 };
        let len = hi - lo;
        let segments = MIN_SEGMENTS.min(len.max(1));
        let coord = |t: u64| if horizontal { (t, fixed) } else { (fixed, t) };
        let mut positions: Vec<u64> =
            (0..=segments).map(|j| lo + (len as u128 * j as u128 / segments as u128) as u64).collect();
        positions.dedup();
        let mut out_pos = vec![positions[0]];
        let mut out_val = vec![self.value(coord(positions[0]).0, coord(positions[0]).1)?];
        for w in positions.windows(2) {
            let va = *out_val.last().expect("non-empty");
            let vb = self.value(coord(w[1]).0, coord(w[1]).1)?;
            self.refine(w[0], va, w[1], vb, &coord, &mut out_pos, &mut out_val, budget_start)?;
        }
        // a zero on the boundary shows up as a sharp local dip in modulus
        for k in 1..out_val.len().saturating_sub(1) {
            let here = out_val[k].ln_abs();
            let nb = out_val[k - 1].ln_abs().max(out_val[k + 1].ln_abs());
            if here < nb + BOUNDARY_DROP.ln() {
                let (x, y) = coord(out_pos[k]);
                return Err(Error::BoundaryZero { at: self.point(x, y) });
            }
        }
        if reversed {
            out_val.reverse();
        }
        Ok(out_val)
    }

    #[allow(clippy::too_many_arguments)]
    fn refine(
        &mut self,
        pa: u64,
        va: Scaled,
        pb: u64,
        vb: Scaled,
        coord: &dyn Fn(u64) -> (u64, u64),
        out_pos: &mut Vec<u64>,
        out_val: &mut Vec<Scaled>,
        budget_start: usize,
    ) -> Result<()> {
        let jump = phase_step(&va, &vb);
        let (xa, ya) = coord(pa);
        let (xb, yb) = coord(pb);
        let (za, zb) = (self.point(xa, ya), self.point(xb, yb));
        let resolved = (zb - za).norm() <= self.f.max_spacing(za).min(self.f.max_spacing(zb));
        if jump.abs() < FRAC_PI_2 && resolved {
            out_pos.push(pb);
            out_val.push(vb);
            return Ok(());
        }
        if pb - pa < 2 {
            if jump.abs() < FRAC_PI_2 {
                out_pos.push(pb);
                out_val.push(vb);
                return Ok(());
            }
            return Err(Error::BoundaryZero { at: za });
        }
        if self.evaluations - budget_start > MAX_SAMPLES {
            return Err(Error::SampleBudget { limit: MAX_SAMPLES });
        }
        let pm = pa + (pb - pa) / 2;
        let (x, y) = coord(pm);
        let vm = self.value(x, y)?;
        self.refine(pa, va, pm, vm, coord, out_pos, out_val, budget_start)?;
        self.refine(pm, vm, pb, vb, coord, out_pos, out_val, budget_start)
    }

    /// Number of zeros inside a lattice box, with multiplicity.
    pub fn winding(&mut self, b: &LatticeBox) -> Result<i64> {
        let start = self.evaluations;
        let corners = [(b.x0, b.y0), (b.x1, b.y0), (b.x1, b.y1), (b.x0, b.y1)];
        let mut total = 0.0;
        for k in 0..4 {
            let vals = self.edge(corners[k], corners[(k + 1) % 4], start)?;
            total += vals.windows(2).map(|w| phase_step(&w[0], &w[1])).sum::<f64>();
        }
        let winding = total / (2.0 * PI);
        let rounded = winding.round();
        if (winding - rounded).abs() >= 0.2 {
            return Err(Error::NonIntegerWinding { winding });
        }
        Ok(rounded as i64)
    }
}

/// Phase increment from `a` to `b`, in `(-π, π]`.
fn phase_step(a: &Scaled, b: &Scaled) -> f64 {
    (b.mant / a.mant).arg()
}

/// Zeros of `f` inside `region`, counted with multiplicity.
pub fn winding_count<F: AnalyticFn + ?Sized>(f: &F, region: &Rect) -> Result<i64> {
    let mut contour = Contour::new(f, *region);
    let root = contour.root_box();
    let n = contour.winding(&root)?;
    if n < 0 {
        return Err(Error::NonIntegerWinding { winding: n as f64 });
    }
    Ok(n)
}

/// [`winding_count`] with the boundary-zero retry: the rectangle is dilated
/// by `1 + 1e-3` (up to five times) when a zero sits on its boundary.
pub fn winding_count_dilating<F: AnalyticFn + ?Sized>(f: &F, region: &Rect) -> Result<(i64, Rect)> {
    let mut rect = *region;
    let mut last = None;
    for _ in 0..=5 {
        match winding_count(f, &rect) {
            Ok(n) => return Ok((n, rect)),
            Err(e @ Error::BoundaryZero { .. }) => {
                last = Some(e);
                rect = rect.dilated(1.0 + 1e-3);
            }
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn square2() -> Rect {
        Rect::new(0.0, 2.0, 0.0, 2.0).unwrap()
    }

    #[test]
    fn single_linear_zero() {
        let f = Plain(|z: Complex64| z - c(1.0, 1.0));
        assert_eq!(winding_count(&f, &square2()).unwrap(), 1);
    }

    #[test]
    fn multiplicity_is_counted() {
        let f = Plain(|z: Complex64| (z - c(1.0, 1.0)).powu(2) * (z - c(5.0, 1.0)));
        assert_eq!(winding_count(&f, &square2()).unwrap(), 2);
    }

    #[test]
    fn zero_on_boundary_is_detected_and_dilation_recovers() {
        let f = Plain(|z: Complex64| z - c(1.0, 0.0));
        let r = square2();
        assert!(matches!(winding_count(&f, &r), Err(Error::BoundaryZero { .. })));
        let (n, grown) = winding_count_dilating(&f, &Rect::new(0.0, 2.0, -1.0, 1.0 + 1e-9).unwrap()).unwrap();
        assert_eq!(n, 1);
        assert!(grown.contains(c(1.0, 0.0)));
    }

    #[test]
    fn exponential_factor_does_not_change_count() {
        let r = Rect::new(-3.0, 3.0, 0.1, 2.0).unwrap();
        let p = |z: Complex64| (z - c(1.0, 1.0)) * (z - c(-2.0, 0.5)) * (z - c(0.3, 1.9));
        let plain = winding_count(&Plain(p), &r).unwrap();
        let g = Plain(|z: Complex64| p(z) * (-c(0.0, 1.0) * z * 20.0).exp());
        let with_exp = winding_count(&WithSpacing { inner: g, spacing: 0.05 }, &r).unwrap();
        assert_eq!(plain, 3);
        assert_eq!(with_exp, 3);
    }

    #[test]
    fn dilation_keeps_positive_lower_edge() {
        let r = Rect::new(0.0, 10.0, 1e-4, 5.0).unwrap().dilated(1.001);
        assert!(r.im_min > 0.0);
    }
}
