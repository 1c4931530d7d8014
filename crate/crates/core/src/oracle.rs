//! Finite-difference oracle: the three-point discretisation of `H_R` on
//! `[0, L]` with Dirichlet conditions at both ends, studied through the
//! determinant `det(A − λI)` of its tridiagonal matrix.
//!
//! Nothing here touches the shooting code, so agreement between the two is
//! meaningful evidence.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::math::Scaled;
use crate::schrodinger::Problem;
use crate::winding::{AnalyticFn, Rect};

pub const MIN_INTERIOR_POINTS: usize = 16;

/// Tridiagonal `A` with diagonal `2/h² + q + iγχ` and off-diagonal `−1/h²`.
///
/// Diagonal entries use the mean of `q` and of the barrier indicator over
/// the cell `[x_j − h/2, x_j + h/2]`. Away from jumps this is the point
/// value; a jump that falls on a node contributes half of each side.
#[derive(Debug, Clone)]
pub struct FdSystem {
    pub problem: Problem,
    pub l: f64,
    pub n: usize,
    pub h: f64,
    pub diag: Vec<Complex64>,
}

impl FdSystem {
    pub fn off_diagonal(&self) -> f64 {
        -1.0 / (self.h * self.h)
    }

    pub fn node(&self, j: usize) -> f64 {
        (j + 1) as f64 * self.h
    }
}

pub fn fd_build(problem: &Problem, l: f64, n: usize) -> Result<FdSystem> {
    if !(l > problem.r()) || !l.is_finite() {
        return Err(Error::Precondition(format!("truncation length L = {l} must exceed R = {}", problem.r())));
    }
    if n < MIN_INTERIOR_POINTS {
        return Err(Error::Precondition(format!("need at least {MIN_INTERIOR_POINTS} interior points, got {n}")));
    }
    let h = l / (n + 1) as f64;
    let r = problem.r();
    let diag = (1..=n)
        .map(|j| {
            let x = j as f64 * h;
            let (a, b) = (x - 0.5 * h, x + 0.5 * h);
            let inside = ((r.min(b) - a) / h).clamp(0.0, 1.0);
            Complex64::new(2.0 / (h * h) + problem.q.cell_mean(a, b), problem.gamma() * inside)
        })
        .collect();
    Ok(FdSystem { problem: problem.clone(), l, n, h, diag })
}

/// Default truncation length `R + max(20, 10/Im z_min)`.
pub fn default_truncation(problem: &Problem, im_z_min: f64) -> f64 {
    problem.r() + 20f64.max(10.0 / im_z_min)
}

/// Smallest `L ≥ l_min` for which `h = L/(n+1)` puts `R` and the jumps of
/// `q` on grid nodes, so the discretisation error keeps a clean `h²`
/// expansion; falls back to `l_min` when no such `L` is near.
pub fn aligned_truncation(problem: &Problem, l_min: f64, n: usize) -> f64 {
    let mut marks = vec![problem.r()];
    marks.extend(problem.q.profile().jumps());
    let cells = (n + 1) as f64;
    let mut m = (cells / l_min).floor();
    while m >= 1.0 {
        let on_grid = marks.iter().all(|&x| {
            let k = x * m;
            (k - k.round()).abs() < 1e-9 * k.max(1.0)
        });
        if on_grid {
            return cells / m;
        }
        m -= 1.0;
        if cells / m > 2.0 * l_min {
            break;
        }
    }
    l_min
}

/// `(log|det(A − λI)|, arg det(A − λI))`.
///
/// Runs the three-term recurrence `d_k = (a_k − λ)d_{k−1} − b²d_{k−2}`,
/// dividing the pair by `d_k` after each step and accumulating the log-modulus
/// and argument of the divisors. The phase is the sum of the per-step
/// arguments, continuous in `λ` away from eigenvalues.
pub fn fd_logdet_phase(sys: &FdSystem, lambda: Complex64) -> (f64, f64) {
    let b2 = sys.off_diagonal() * sys.off_diagonal();
    let (mut prev, mut cur) = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
    let (mut ln, mut arg) = (0.0, 0.0);
    for &a in &sys.diag {
        let next = (a - lambda) * cur - b2 * prev;
        prev = cur;
        cur = next;
        let m = cur.norm();
        if m > 0.0 && m.is_finite() {
            ln += m.ln();
            arg += cur.arg();
            prev /= cur;
            cur = Complex64::new(1.0, 0.0);
        }
    }
    if cur.norm() == 0.0 {
        return (f64::NEG_INFINITY, arg);
    }
    (ln + cur.norm().ln(), arg + cur.arg())
}

/// `det(A − λI)` and its λ-derivative, scaled by a common factor.
fn det_and_derivative(sys: &FdSystem, lambda: Complex64) -> (Complex64, Complex64) {
    let b2 = sys.off_diagonal() * sys.off_diagonal();
    let zero = Complex64::new(0.0, 0.0);
    let (mut p0, mut p1) = (zero, Complex64::new(1.0, 0.0));
    let (mut d0, mut d1) = (zero, zero);
    for &a in &sys.diag {
        let p2 = (a - lambda) * p1 - b2 * p0;
        let d2 = -p1 + (a - lambda) * d1 - b2 * d0;
        let s = p2.norm().max(d2.norm());
        p0 = p1 / s;
        d0 = d1 / s;
        p1 = p2 / s;
        d1 = d2 / s;
    }
    (p1, d1)
}

/// `det(A − λI)` as an analytic function of `λ` for contour counting.
pub struct FdDeterminant<'a> {
    pub sys: &'a FdSystem,
}

impl AnalyticFn for FdDeterminant<'_> {
    fn eval(&self, lambda: Complex64) -> Result<Scaled> {
        let (ln, arg) = fd_logdet_phase(self.sys, lambda);
        if ln == f64::NEG_INFINITY {
            return Ok(Scaled::new(Complex64::new(0.0, 0.0), 0.0));
        }
        Ok(Scaled::exp(Complex64::new(ln, arg)))
    }

    /// Discretised continuum modes of the truncated interval crowd the real
    /// axis with density about `L/(2π√λ)`; each turns the phase by up to π.
    fn max_spacing(&self, lambda: Complex64) -> f64 {
        let density = self.sys.l / (2.0 * lambda.norm().max(1e-2).sqrt());
        0.25 / (1.0 + density)
    }
}

/// Number of eigenvalues of the discrete system inside a rectangle of the
/// λ-plane, with multiplicity.
pub fn fd_count(sys: &FdSystem, lambda_rect: &Rect) -> Result<i64> {
    let delta = 0.01 * sys.problem.gamma();
    if !(lambda_rect.im_min > 0.0) || lambda_rect.im_min < delta {
        return Err(Error::Precondition(format!(
            "oracle rectangles need Im λ ≥ {delta} (and > 0), got {}",
            lambda_rect.im_min
        )));
    }
    crate::winding::winding_count(&FdDeterminant { sys }, lambda_rect)
}

/// Newton's method on `det(A − λI)`; `None` if it does not converge.
pub fn fd_newton(sys: &FdSystem, lambda0: Complex64, tol: f64) -> Option<Complex64> {
    let mut lambda = lambda0;
    for _ in 0..60 {
        let (p, d) = det_and_derivative(sys, lambda);
        let step = p / d;
        if !(step.re.is_finite() && step.im.is_finite()) {
            return None;
        }
        lambda -= step;
        if step.norm() < tol * (1.0 + lambda.norm()) {
            return Some(lambda);
        }
    }
    None
}

/// Number of eigenvalues below `x` of a real symmetric system, from the
/// signs of the `LDLᵀ` pivots.
pub fn sturm_count(sys: &FdSystem, x: f64) -> Result<usize> {
    if sys.diag.iter().any(|a| a.im != 0.0) {
        return Err(Error::Precondition("Sturm counting needs a real diagonal (γ = 0)".into()));
    }
    let b2 = sys.off_diagonal() * sys.off_diagonal();
    let mut count = 0;
    let mut pivot = f64::INFINITY;
    for a in &sys.diag {
        pivot = (a.re - x) - b2 / pivot;
        if pivot == 0.0 {
            pivot = -f64::EPSILON * (a.re.abs() + x.abs() + 1.0);
        }
        if pivot < 0.0 {
            count += 1;
        }
    }
    Ok(count)
}

/// The `k`-th smallest (from 0) eigenvalue of a real symmetric system by
/// bisection on [`sturm_count`].
pub fn sturm_eigenvalue(sys: &FdSystem, k: usize) -> Result<f64> {
    if k >= sys.n {
        return Err(Error::validation("k", format!("index {k} out of range for n = {}", sys.n)));
    }
    // Gershgorin bounds
    let reach = 2.0 * sys.off_diagonal().abs();
    let lo0 = sys.diag.iter().map(|a| a.re).fold(f64::INFINITY, f64::min) - reach;
    let hi0 = sys.diag.iter().map(|a| a.re).fold(f64::NEG_INFINITY, f64::max) + reach;
    let (mut lo, mut hi) = (lo0, hi0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(sys, mid)? > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// One eigenvalue followed through the grid sequence `n, 2n+1, 4n+3`, each
/// halving `h` on the same interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Richardson {
    pub values: [Complex64; 3],
    /// `h²`-extrapolated value from the two finest grids.
    pub extrapolated: Complex64,
    /// Difference between the extrapolants of the coarse and fine pairs.
    pub error: f64,
    /// `|λ_n − λ_2n| / |λ_2n − λ_4n|`, close to 4 for clean `h²` behaviour.
    pub ratio: f64,
}

/// Follows the discrete eigenvalue nearest `seed` on three nested grids.
pub fn fd_richardson(problem: &Problem, l: f64, n: usize, seed: Complex64) -> Result<Richardson> {
    let mut values = [Complex64::new(0.0, 0.0); 3];
    let mut guess = seed;
    for (k, size) in [n, 2 * n + 1, 4 * n + 3].into_iter().enumerate() {
        let sys = fd_build(problem, l, size)?;
        let lambda = fd_newton(&sys, guess, 1e-12)
            .ok_or_else(|| Error::Divergence(format!("oracle Newton iteration from {guess} did not converge")))?;
        values[k] = lambda;
        guess = lambda;
    }
    let coarse = values[1] + (values[1] - values[0]) / 3.0;
    let extrapolated = values[2] + (values[2] - values[1]) / 3.0;
    let ratio = (values[0] - values[1]).norm() / (values[1] - values[2]).norm();
    Ok(Richardson { values, extrapolated, error: (extrapolated - coarse).norm(), ratio })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::{make_potential, Potential};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn problem(spec: &str, gamma: f64, r: f64) -> Problem {
        Problem::new(make_potential(spec).unwrap(), gamma, r).unwrap()
    }

    fn laplacian_eigenvalue(k: usize, n: usize, h: f64) -> f64 {
        2.0 * (1.0 - (k as f64 * PI / (n + 1) as f64).cos()) / (h * h)
    }

    #[test]
    fn build_rejects_bad_sizes() {
        let p = problem("zero", 1.0, 5.0);
        assert!(matches!(fd_build(&p, 5.0, 100), Err(Error::Precondition(_))));
        assert!(matches!(fd_build(&p, 10.0, 8), Err(Error::Precondition(_))));
    }

    #[test]
    fn barrier_covers_first_half() {
        let p = problem("zero", 1.0, 5.0);
        let sys = fd_build(&p, 10.0, 99).unwrap();
        // node 50 sits exactly on R and sees half of the barrier
        for (j, a) in sys.diag.iter().enumerate() {
            let want = match (j + 1).cmp(&50) {
                std::cmp::Ordering::Less => 1.0,
                std::cmp::Ordering::Equal => 0.5,
                std::cmp::Ordering::Greater => 0.0,
            };
            assert!((a.im - want).abs() < 1e-12, "node {j}");
            assert!((a.re - 2.0 / (sys.h * sys.h)).abs() < 1e-9);
        }
    }

    #[test]
    fn box_adds_to_diagonal_inside() {
        let p = problem("box:A=1,Q=1", 0.5, 5.0);
        let sys = fd_build(&p, 10.0, 199).unwrap();
        let base = 2.0 / (sys.h * sys.h);
        for (j, a) in sys.diag.iter().enumerate() {
            let x = sys.node(j);
            let want = if x < 1.0 - 1e-9 {
                1.0
            } else if x > 1.0 + 1e-9 {
                0.0
            } else {
                0.5
            };
            assert!((a.re - base - want).abs() < 1e-9, "x = {x}");
        }
    }

    #[test]
    fn single_entry_determinant() {
        let p = problem("zero", 1.0, 1.0);
        let mut sys = fd_build(&p, 2.0, 16).unwrap();
        sys.diag.truncate(1);
        sys.n = 1;
        let lambda = c(0.3, -0.7);
        let (ln, arg) = fd_logdet_phase(&sys, lambda);
        let want = sys.diag[0] - lambda;
        assert!((ln - want.norm().ln()).abs() < 1e-14);
        assert!((Complex64::from_polar(1.0, arg) - want / want.norm()).norm() < 1e-14);
    }

    fn cofactor_det(m: &[Vec<Complex64>]) -> Complex64 {
        let n = m.len();
        if n == 1 {
            return m[0][0];
        }
        (0..n)
            .map(|col| {
                let minor: Vec<Vec<Complex64>> = m[1..]
                    .iter()
                    .map(|row| row.iter().enumerate().filter(|(k, _)| *k != col).map(|(_, v)| *v).collect())
                    .collect();
                let sign = if col % 2 == 0 { 1.0 } else { -1.0 };
                m[0][col] * sign * cofactor_det(&minor)
            })
            .sum()
    }

    #[test]
    fn recurrence_matches_cofactor_expansion() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let p = problem("zero", 1.0, 1.0);
        for _ in 0..20 {
            let mut sys = fd_build(&p, 2.0, 16).unwrap();
            sys.n = 8;
            sys.h = 1.0 / rng.gen_range(0.5..2.0);
            sys.diag = (0..8).map(|_| c(rng.gen_range(-3.0..3.0), rng.gen_range(0.0..2.0))).collect();
            let lambda = c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let b = sys.off_diagonal();
            let m: Vec<Vec<Complex64>> = (0..8)
                .map(|i| {
                    (0..8)
                        .map(|j| {
                            if i == j {
                                sys.diag[i] - lambda
                            } else if i.abs_diff(j) == 1 {
                                c(b, 0.0)
                            } else {
                                c(0.0, 0.0)
                            }
                        })
                        .collect()
                })
                .collect();
            let want = cofactor_det(&m);
            let (ln, arg) = fd_logdet_phase(&sys, lambda);
            assert!(((ln - want.norm().ln()).exp() - 1.0).abs() < 1e-10);
            let dphase = (Complex64::from_polar(1.0, arg) / (want / want.norm())).arg();
            assert!(dphase.abs() < 1e-10);
        }
    }

    #[test]
    fn laplacian_determinant_vanishes_at_eigenvalues() {
        let p = Problem::new(Potential::zero(), 0.0, 1.0).unwrap();
        let sys = fd_build(&p, 4.0, 200).unwrap();
        for k in [1, 7, 100] {
            let lambda = laplacian_eigenvalue(k, sys.n, sys.h);
            let (at, _) = fd_logdet_phase(&sys, c(lambda + 1e-12, 0.0));
            let (away, _) =
                fd_logdet_phase(&sys, c(lambda + 0.3 * (laplacian_eigenvalue(k + 1, sys.n, sys.h) - lambda), 0.0));
            // an offset of 1e-12 costs about ln(1e-12) ≈ -27.6
            assert!(at < away - 25.0, "k = {k}: {at} vs {away}");
        }
    }

    #[test]
    fn sturm_recovers_laplacian_spectrum() {
        let p = Problem::new(Potential::zero(), 0.0, 1.0).unwrap();
        let sys = fd_build(&p, 3.0, 300).unwrap();
        for k in [0, 1, 50, 299] {
            let want = laplacian_eigenvalue(k + 1, sys.n, sys.h);
            let got = sturm_eigenvalue(&sys, k).unwrap();
            assert!((got - want).abs() <= 1e-10 * want, "k = {k}: {got} vs {want}");
        }
        let barrier = fd_build(&problem("zero", 1.0, 1.0), 3.0, 300).unwrap();
        assert!(sturm_count(&barrier, 1.0).is_err());
    }

    #[test]
    fn self_adjoint_system_has_nothing_above_axis() {
        let p = Problem::new(make_potential("box:A=-3,Q=1").unwrap(), 0.0, 2.0).unwrap();
        let sys = fd_build(&p, 12.0, 400).unwrap();
        let rect = Rect::new(-5.0, 10.0, 0.01, 1.0).unwrap();
        assert_eq!(fd_count(&sys, &rect).unwrap(), 0);
    }

    #[test]
    fn count_rejects_low_strip() {
        let p = problem("zero", 1.0, 5.0);
        let sys = fd_build(&p, 30.0, 400).unwrap();
        assert!(fd_count(&sys, &Rect::new(0.1, 5.0, 0.001, 0.9).unwrap()).is_err());
    }

    #[test]
    fn alignment_puts_jumps_on_nodes() {
        let p = problem("box:A=1,Q=1", 1.0, 20.0);
        let l = aligned_truncation(&p, 233.0, 6000);
        let h = l / 6001.0;
        assert!(l >= 233.0);
        for x in [1.0, 20.0] {
            assert!(((x / h) - (x / h).round()).abs() < 1e-6);
        }
    }

    #[test]
    fn richardson_ratio_near_four() {
        let p = problem("box:A=1,Q=1", 1.0, 8.0);
        let l = aligned_truncation(&p, 40.0, 800);
        let region = Rect::new(0.5, 3.0, 0.05, 1.0).unwrap();
        let set = crate::eigen::locate_eigenvalues(&p, &region, 1e-10).unwrap();
        let seed = set.entries.iter().map(|e| e.lambda).find(|l| l.im > 0.2).expect("a strip eigenvalue");
        let rich = fd_richardson(&p, l, 600, seed).unwrap();
        assert!((rich.ratio - 4.0).abs() < 0.8, "{rich:?}");
        assert!(rich.error < (rich.values[0] - rich.values[2]).norm());
    }
}
