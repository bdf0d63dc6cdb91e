//! Characteristic polynomials of the Y walk and their roots.
//!
//! `p(beta, alpha) = lambda1/beta + mu1 beta + lambda2 alpha/beta + mu2 beta/alpha`
//! is the one-step generating function of the interior Y increments evaluated
//! on the log-linear function `[(beta, alpha), y]`; `p1` replaces the last term
//! by `mu2` to account for the constraint on `y2 = 0`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::QueueParams;

/// `|p - 1|` below which a point counts as lying on a characteristic surface.
pub const SURFACE_TOL: f64 = 1e-10;

/// Square root with `Re >= 0`; on the imaginary axis the root with `Im >= 0`.
pub fn branch_sqrt(z: Complex64) -> Complex64 {
    let s = z.sqrt();
    if s.re < 0.0 || (s.re == 0.0 && s.im < 0.0) {
        -s
    } else {
        s
    }
}

/// `z^e` for an integer exponent by repeated squaring.
///
/// Negative exponents invert first; `0^e` with `e < 0` is an error.
pub fn ipow(z: Complex64, e: i64) -> Result<Complex64> {
    if e < 0 {
        if z == Complex64::new(0.0, 0.0) {
            return Err(Error::Domain(format!("0 raised to negative power {e}")));
        }
        return Ok(ipow_unsigned(z.inv(), e.unsigned_abs()));
    }
    Ok(ipow_unsigned(z, e as u64))
}

pub(crate) fn ipow_unsigned(mut base: Complex64, mut e: u64) -> Complex64 {
    let mut acc = Complex64::new(1.0, 0.0);
    while e > 0 {
        if e & 1 == 1 {
            acc *= base;
        }
        e >>= 1;
        if e > 0 {
            base *= base;
        }
    }
    acc
}

fn nonzero(name: &str, z: Complex64) -> Result<()> {
    if z.norm() == 0.0 || !z.is_finite() {
        Err(Error::Domain(format!("{name} must be finite and nonzero, got {z}")))
    } else {
        Ok(())
    }
}

pub fn char_poly(p: &QueueParams, beta: Complex64, alpha: Complex64) -> Result<Complex64> {
    nonzero("beta", beta)?;
    nonzero("alpha", alpha)?;
    Ok(p.lambda1() / beta + p.mu1() * beta + p.lambda2() * alpha / beta + p.mu2() * beta / alpha)
}

pub fn char_poly_boundary(p: &QueueParams, beta: Complex64, alpha: Complex64) -> Result<Complex64> {
    nonzero("beta", beta)?;
    Ok(p.lambda1() / beta + p.mu1() * beta + p.lambda2() * alpha / beta + p.mu2())
}

/// A point `(beta, alpha)` with its distance from the surface `p = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacePoint {
    pub beta: Complex64,
    pub alpha: Complex64,
    pub residual: f64,
}

impl SurfacePoint {
    pub fn new(p: &QueueParams, beta: Complex64, alpha: Complex64) -> Result<Self> {
        let residual = (char_poly(p, beta, alpha)? - 1.0).norm();
        Ok(Self { beta, alpha, residual })
    }

    pub fn on_surface(&self) -> bool {
        self.residual <= SURFACE_TOL
    }
}

/// The two roots in `beta` of `p(., alpha) = 1` for fixed `alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootPair {
    pub beta1: Complex64,
    pub beta2: Complex64,
    pub discriminant: Complex64,
}

/// Roots of `(mu1 + mu2/alpha) beta^2 - beta + lambda1 + lambda2 alpha = 0`.
///
/// `beta1` always takes the minus sign in front of the square root, whatever
/// the relative size of the two roots.
pub fn betas_of_alpha(p: &QueueParams, alpha: Complex64) -> Result<RootPair> {
    nonzero("alpha", alpha)?;
    let lead = p.mu2() / alpha + p.mu1();
    if lead.norm() <= f64::EPSILON {
        return Err(Error::Domain(format!("mu2/alpha + mu1 vanishes at alpha = {alpha}")));
    }
    let constant = p.lambda1() + p.lambda2() * alpha;
    let discriminant = 1.0 - 4.0 * lead * constant;
    let s = branch_sqrt(discriminant);
    let two_lead = 2.0 * lead;
    Ok(RootPair {
        beta1: (1.0 - s) / two_lead,
        beta2: (1.0 + s) / two_lead,
        discriminant,
    })
}

/// The conjugator `beta^2 / (alpha rho2)`: the other root in `alpha` of
/// `p(beta, .) = 1`.
pub fn conjugate_alpha(p: &QueueParams, beta: Complex64, alpha: Complex64) -> Result<Complex64> {
    nonzero("alpha", alpha)?;
    let rho2 = p.rates().rho2;
    Ok(beta * beta / (alpha * rho2))
}

/// Roots in `alpha` of `lambda2 alpha^2/beta + alpha (lambda1/beta + mu1 beta - 1) + mu2 beta = 0`,
/// larger modulus first.
pub fn alphas_of_beta(p: &QueueParams, beta: Complex64) -> Result<(Complex64, Complex64)> {
    nonzero("beta", beta)?;
    let a = p.lambda2() / beta;
    let b = p.lambda1() / beta + p.mu1() * beta - 1.0;
    let c = p.mu2() * beta;
    let mut s = (b * b - 4.0 * a * c).sqrt();
    // Pick the sign that avoids cancellation in b + s.
    if (b.conj() * s).re < 0.0 {
        s = -s;
    }
    // q = 0 would need b = 0 and b^2 = 4ac, impossible with a, c != 0.
    let q = -(b + s) / 2.0;
    let (x1, x2) = (q / a, c / q);
    Ok(if x1.norm() >= x2.norm() { (x1, x2) } else { (x2, x1) })
}
