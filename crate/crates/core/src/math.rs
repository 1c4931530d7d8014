//! Branch-consistent complex helpers shared by the rest of the crate.
//!
//! The square root used throughout has its cut along `[0, ∞)` so that
//! `Im √w ≥ 0` everywhere; positive reals map to the positive root.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Square root on the upper sheet: `Im(result) ≥ 0`, and positive reals
/// map to the positive real root.
pub fn sqrt_upper(w: Complex64) -> Complex64 {
    let (a, b) = (w.re, w.im);
    if a == 0.0 && b == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    // principal root, computed without cancellation
    let t = ((a.abs() + w.norm()) * 0.5).sqrt();
    let principal =
        if a >= 0.0 { Complex64::new(t, b / (2.0 * t)) } else { Complex64::new(b.abs() / (2.0 * t), t.copysign(b)) };
    let root = if principal.im < 0.0 { -principal } else { principal };
    // strip negative zeros so the tie rule is visible in the output
    Complex64::new(root.re + 0.0, root.im.abs())
}

const LAMBERT_RESIDUAL: f64 = 1e-13;
const LAMBERT_MAX_ITER: usize = 100;

/// Principal branch of the Lambert W function on `(0, ∞)`.
pub fn lambert_w(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("lambert_w requires a finite x > 0, got {x}")));
    }
    let mut w = (1.0 + x).ln();
    for _ in 0..LAMBERT_MAX_ITER {
        let ew = w.exp();
        let f = w * ew - x;
        if (f / x).abs() <= LAMBERT_RESIDUAL {
            return Ok(w);
        }
        let wp1 = w + 1.0;
        let step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        let next = w - step;
        if next == w {
            return Ok(w);
        }
        w = next;
    }
    Ok(w)
}

/// Modulus of the Blaschke factor `(z - conj(zj)) / (z - zj)`.
pub fn blaschke_modulus(z: Complex64, zj: Complex64) -> Result<f64> {
    let den = z - zj;
    if den.norm() == 0.0 {
        return Err(Error::Singular(format!("Blaschke factor evaluated at its pole {zj}")));
    }
    Ok((z - zj.conj()).norm() / den.norm())
}

/// Same quantity through `sqrt(1 + 4 Im z Im zj / |z - zj|²)`.
pub fn blaschke_modulus_closed(z: Complex64, zj: Complex64) -> Result<f64> {
    let d2 = (z - zj).norm_sqr();
    if d2 == 0.0 {
        return Err(Error::Singular(format!("Blaschke factor evaluated at its pole {zj}")));
    }
    Ok((1.0 + 4.0 * z.im * zj.im / d2).sqrt())
}

/// The open strip `(0, ∞) × i(0, γ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaStrip {
    gamma: f64,
}

impl GammaStrip {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::validation("gamma", "must be finite and > 0"));
        }
        Ok(Self { gamma })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn contains(&self, lambda: Complex64) -> bool {
        lambda.re > 0.0 && lambda.im > 0.0 && lambda.im < self.gamma
    }
}

pub fn in_gamma_strip(lambda: Complex64, strip: &GammaStrip) -> bool {
    strip.contains(lambda)
}

/// `B_X(0) ∪ Γ_γ`, the uniform eigenvalue enclosure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Enclosure {
    pub strip: GammaStrip,
    x_radius: f64,
}

impl Enclosure {
    pub fn new(gamma: f64, x_radius: f64) -> Result<Self> {
        if !(x_radius > 0.0) {
            return Err(Error::validation("x_radius", "must be > 0"));
        }
        Ok(Self { strip: GammaStrip::new(gamma)?, x_radius })
    }

    pub fn x_radius(&self) -> f64 {
        self.x_radius
    }

    pub fn contains(&self, lambda: Complex64) -> bool {
        lambda.norm() < self.x_radius || self.strip.contains(lambda)
    }
}

/// A complex number stored as `mant · e^{ln_scale}`.
///
/// Solutions of the shifted Schrödinger equation grow like `e^{|Im μ| x}`;
/// carrying the exponent separately keeps contour phases and log-moduli
/// meaningful far past the range of `f64`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaled {
    pub mant: Complex64,
    pub ln_scale: f64,
}

impl Scaled {
    pub fn new(mant: Complex64, ln_scale: f64) -> Self {
        Self { mant, ln_scale }
    }

    pub fn from_complex(c: Complex64) -> Self {
        Self { mant: c, ln_scale: 0.0 }
    }

    /// `e^{w}` without overflow.
    pub fn exp(w: Complex64) -> Self {
        Self { mant: Complex64::from_polar(1.0, w.im), ln_scale: w.re }
    }

    pub fn is_zero(&self) -> bool {
        self.mant.re == 0.0 && self.mant.im == 0.0
    }

    /// `ln |value|`; `-∞` for zero.
    pub fn ln_abs(&self) -> f64 {
        self.mant.norm().ln() + self.ln_scale
    }

    pub fn arg(&self) -> f64 {
        self.mant.arg()
    }

    pub fn abs(&self) -> f64 {
        self.mant.norm() * self.ln_scale.exp()
    }

    /// The plain complex value; may be infinite if the scale is huge.
    pub fn to_complex(&self) -> Complex64 {
        self.mant * self.ln_scale.exp()
    }

    pub fn mul(&self, other: &Scaled) -> Scaled {
        Scaled { mant: self.mant * other.mant, ln_scale: self.ln_scale + other.ln_scale }.normalized()
    }

    pub fn scale_by(&self, c: Complex64) -> Scaled {
        Scaled { mant: self.mant * c, ln_scale: self.ln_scale }.normalized()
    }

    /// `self / other` as a plain complex number (finite when the two are
    /// of comparable size).
    pub fn ratio(&self, other: &Scaled) -> Complex64 {
        (self.mant / other.mant) * (self.ln_scale - other.ln_scale).exp()
    }

    /// Sum of two scaled numbers.
    pub fn add(&self, other: &Scaled) -> Scaled {
        let ln = self.ln_scale.max(other.ln_scale);
        let a = self.mant * (self.ln_scale - ln).exp();
        let b = other.mant * (other.ln_scale - ln).exp();
        Scaled { mant: a + b, ln_scale: ln }.normalized()
    }

    pub fn sub(&self, other: &Scaled) -> Scaled {
        self.add(&Scaled { mant: -other.mant, ln_scale: other.ln_scale })
    }

    /// Folds the mantissa magnitude into the exponent.
    pub fn normalized(self) -> Scaled {
        let m = self.mant.norm();
        if m == 0.0 || !m.is_finite() {
            return self;
        }
        let k = m.ln();
        Scaled { mant: self.mant / m, ln_scale: self.ln_scale + k }
    }
}
