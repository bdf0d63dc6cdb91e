//! Y-harmonic functions built from points of the characteristic surface.
//!
//! A point `(beta, alpha)` defines the log-linear function
//! `[(beta, alpha), y] = beta^(y1 - y2) alpha^y2`. It is harmonic for the Y walk
//! away from `y2 = 0` whenever `p(beta, alpha) = 1`. Two ways of fixing the
//! boundary are used here: points on both surfaces (only `(rho1, rho1)` is
//! nontrivial) and conjugate pairs whose boundary defects cancel.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{LatticePoint, QueueParams};
use crate::surface::{
    char_poly, char_poly_boundary, conjugate_alpha, ipow, ipow_unsigned, SURFACE_TOL,
};

/// Slack on the modulus tests of boundary-determinedness.
pub const MODULUS_SLACK: f64 = 1e-12;

/// Constructors reject a basis function whose spot-check residual exceeds this.
pub const SPOT_CHECK_TOL: f64 = 1e-9;

const SPOT_CHECK_POINTS: [(i64, i64); 5] = [(0, 0), (1, 0), (3, 0), (5, 2), (4, 4)];

/// A complex-valued function on `Z x Z+`.
pub trait YFunction {
    fn eval(&self, y1: i64, y2: i64) -> Complex64;
}

/// `[(beta, alpha), .]` with `beta != 0`, so every integer power is defined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub beta: Complex64,
    pub alpha: Complex64,
}

impl Bracket {
    pub fn new(beta: Complex64, alpha: Complex64) -> Result<Self> {
        if beta.norm() == 0.0 || !beta.is_finite() || !alpha.is_finite() {
            return Err(Error::Domain(format!("bracket needs finite nonzero beta, got ({beta}, {alpha})")));
        }
        Ok(Self { beta, alpha })
    }
}

impl YFunction for Bracket {
    fn eval(&self, y1: i64, y2: i64) -> Complex64 {
        let e1 = y1 - y2;
        let b = if e1 >= 0 {
            ipow_unsigned(self.beta, e1 as u64)
        } else {
            ipow_unsigned(self.beta.inv(), e1.unsigned_abs())
        };
        b * ipow_unsigned(self.alpha, y2.max(0) as u64)
    }
}

/// `beta^(y1 - y2) alpha^y2`.
pub fn eval_bracket(beta: Complex64, alpha: Complex64, y: LatticePoint) -> Result<Complex64> {
    if y.c2 < 0 {
        return Err(Error::Domain(format!("bracket evaluated at {y} with c2 < 0")));
    }
    Ok(ipow(beta, y.c1 - y.c2)? * ipow(alpha, y.c2)?)
}

/// `C(beta, alpha) = 1 - beta / alpha`.
pub fn c_coef(beta: Complex64, alpha: Complex64) -> Complex64 {
    1.0 - beta / alpha
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BasisFunction {
    /// `[(beta, alpha), .]` for a point on both characteristic surfaces.
    SinglePoint { beta: Complex64, alpha: Complex64 },
    /// `h_beta = C(beta, alpha2) [(beta, alpha1), .] - C(beta, alpha1) [(beta, alpha2), .]`
    /// with `alpha2` the conjugate of `alpha1`.
    ConjugatePair {
        beta: Complex64,
        alpha1: Complex64,
        alpha2: Complex64,
        c_alpha2: Complex64,
        c_alpha1: Complex64,
    },
}

impl BasisFunction {
    pub fn single_point(p: &QueueParams, beta: Complex64, alpha: Complex64) -> Result<Self> {
        let interior = (char_poly(p, beta, alpha)? - 1.0).norm();
        let boundary = (char_poly_boundary(p, beta, alpha)? - 1.0).norm();
        if interior > SURFACE_TOL || boundary > SURFACE_TOL {
            return Err(Error::Domain(format!(
                "({beta}, {alpha}) is not on both characteristic surfaces \
                 (residuals {interior:e}, {boundary:e})"
            )));
        }
        let basis = BasisFunction::SinglePoint { beta, alpha };
        basis.spot_check(p)?;
        Ok(basis)
    }

    /// `h_rho1 = [(rho1, rho1), .]`.
    pub fn rho1(p: &QueueParams) -> Result<Self> {
        let rho1 = Complex64::new(p.rates().rho1, 0.0);
        Self::single_point(p, rho1, rho1)
    }

    pub fn conjugate_pair(p: &QueueParams, beta: Complex64, alpha1: Complex64) -> Result<Self> {
        let residual = (char_poly(p, beta, alpha1)? - 1.0).norm();
        if residual > SURFACE_TOL {
            return Err(Error::Domain(format!(
                "({beta}, {alpha1}) is off the characteristic surface (residual {residual:e})"
            )));
        }
        let alpha2 = conjugate_alpha(p, beta, alpha1)?;
        if (alpha2 - alpha1).norm() <= 1e-12 * alpha1.norm().max(1.0) {
            return Err(Error::DegeneratePair { beta: beta.to_string() });
        }
        if alpha2.norm() == 0.0 {
            return Err(Error::Domain(format!("conjugate of ({beta}, {alpha1}) is zero")));
        }
        let basis = BasisFunction::ConjugatePair {
            beta,
            alpha1,
            alpha2,
            c_alpha2: c_coef(beta, alpha2),
            c_alpha1: c_coef(beta, alpha1),
        };
        basis.spot_check(p)?;
        Ok(basis)
    }

    /// The log-linear pieces with their weights.
    pub fn brackets(&self) -> Vec<(Complex64, Bracket)> {
        match *self {
            BasisFunction::SinglePoint { beta, alpha } => {
                vec![(Complex64::new(1.0, 0.0), Bracket { beta, alpha })]
            }
            BasisFunction::ConjugatePair { beta, alpha1, alpha2, c_alpha2, c_alpha1 } => vec![
                (c_alpha2, Bracket { beta, alpha: alpha1 }),
                (-c_alpha1, Bracket { beta, alpha: alpha2 }),
            ],
        }
    }

    fn spot_check(&self, p: &QueueParams) -> Result<()> {
        let scale: f64 = self.brackets().iter().map(|(w, _)| w.norm()).sum::<f64>().max(1.0);
        for (y1, y2) in SPOT_CHECK_POINTS {
            let residual = check_harmonicity(p, self, y1, y2);
            if residual > SPOT_CHECK_TOL * scale {
                return Err(Error::NotHarmonic { residual, y1, y2 });
            }
        }
        Ok(())
    }
}

impl YFunction for BasisFunction {
    fn eval(&self, y1: i64, y2: i64) -> Complex64 {
        self.brackets().iter().map(|(w, b)| w * b.eval(y1, y2)).sum()
    }
}

/// `h_beta` at `y` for the conjugate pair through `(beta, alpha1)`.
pub fn h_conjugate_pair(
    p: &QueueParams,
    beta: Complex64,
    alpha1: Complex64,
    y: LatticePoint,
) -> Result<Complex64> {
    let basis = BasisFunction::conjugate_pair(p, beta, alpha1)?;
    if y.c2 < 0 {
        return Err(Error::Domain(format!("h_beta evaluated at {y} with c2 < 0")));
    }
    Ok(basis.eval(y.c1, y.c2))
}

/// Linear combination of basis functions; optionally reports only the real part.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Superposition {
    terms: Vec<(Complex64, BasisFunction)>,
    take_real_part: bool,
}

impl Superposition {
    pub fn new(take_real_part: bool) -> Self {
        Self { terms: Vec::new(), take_real_part }
    }

    pub fn push(&mut self, coefficient: Complex64, basis: BasisFunction) {
        self.terms.push((coefficient, basis));
    }

    pub fn with_term(mut self, coefficient: Complex64, basis: BasisFunction) -> Self {
        self.push(coefficient, basis);
        self
    }

    pub fn terms(&self) -> &[(Complex64, BasisFunction)] {
        &self.terms
    }

    pub fn take_real_part(&self) -> bool {
        self.take_real_part
    }

    /// The complex sum, ignoring `take_real_part`.
    pub fn eval_complex(&self, y1: i64, y2: i64) -> Complex64 {
        self.terms.iter().map(|(c, b)| c * b.eval(y1, y2)).sum()
    }

    /// Real value of the superposition (its real part when `take_real_part`).
    pub fn value(&self, y1: i64, y2: i64) -> f64 {
        self.eval_complex(y1, y2).re
    }

    /// Every log-linear piece with its total weight `coefficient * basis weight`.
    pub fn brackets(&self) -> Vec<(Complex64, Bracket)> {
        self.terms
            .iter()
            .flat_map(|(c, b)| b.brackets().into_iter().map(move |(w, br)| (c * w, br)))
            .collect()
    }
}

impl YFunction for Superposition {
    fn eval(&self, y1: i64, y2: i64) -> Complex64 {
        let z = self.eval_complex(y1, y2);
        if self.take_real_part {
            Complex64::new(z.re, 0.0)
        } else {
            z
        }
    }
}

/// `bold h_r = [(r, 1), .] - (1 - r)/(1 - rho2/r) [(r, r^2/rho2), .]`, stored as
/// `h_r / (1 - rho2/r)`.
pub fn bold_h_r(p: &QueueParams) -> Result<Superposition> {
    p.validate().require_harmonic()?;
    let d = p.rates();
    let scale = 1.0 - d.rho2 / d.r;
    if scale.abs() <= f64::EPSILON {
        return Err(Error::Domain("rho2 = r makes bold h_r undefined".into()));
    }
    let h_r = BasisFunction::conjugate_pair(p, Complex64::new(d.r, 0.0), Complex64::new(1.0, 0.0))?;
    Ok(Superposition::new(false).with_term(Complex64::new(1.0 / scale, 0.0), h_r))
}

pub fn bold_h_r_value(p: &QueueParams, y: LatticePoint) -> Result<f64> {
    if y.c2 < 0 {
        return Err(Error::Domain(format!("bold h_r evaluated at {y} with c2 < 0")));
    }
    Ok(bold_h_r(p)?.value(y.c1, y.c2))
}

/// `|E_y[h(Y_1)] - h(y)|` for one step of the constrained Y walk.
pub fn check_harmonicity<F: YFunction + ?Sized>(p: &QueueParams, h: &F, y1: i64, y2: i64) -> f64 {
    let here = h.eval(y1, y2);
    let down = if y2 > 0 { h.eval(y1, y2 - 1) } else { here };
    let mean = p.lambda1() * h.eval(y1 - 1, y2)
        + p.mu1() * h.eval(y1 + 1, y2)
        + p.lambda2() * h.eval(y1, y2 + 1)
        + p.mu2() * down;
    (mean - here).norm()
}

/// Sufficient condition for a superposition to be determined by its values on
/// the diagonal: every piece has `|beta| < 1` and `|alpha| <= 1`.
pub fn is_pb_determined(h: &Superposition) -> bool {
    h.brackets().iter().all(|(_, b)| bracket_pb_determined(b))
}

pub(crate) fn bracket_pb_determined(b: &Bracket) -> bool {
    b.beta.norm() < 1.0 - MODULUS_SLACK && b.alpha.norm() <= 1.0 + MODULUS_SLACK
}
