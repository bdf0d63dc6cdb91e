//! Approximations of `P_y(tau < inf)` by boundary-determined Y-harmonic
//! superpositions, with a relative-error certificate.
//!
//! Every superposition here is harmonic for the Y walk and determined by its
//! values on the diagonal `y1 = y2`. If it stays within `c*` of 1 there, it is
//! within relative error `c*` of the hitting probability everywhere.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::harmonic::{bold_h_r, is_pb_determined, BasisFunction, Superposition, YFunction};
use crate::linalg::{solve_refined, CMatrix};
use crate::model::{LatticePoint, QueueParams, EQUALITY_TOL};
use crate::surface::betas_of_alpha;

/// Default radius of the circle carrying the extra alpha points.
pub const DEFAULT_ALPHA_RADIUS: f64 = 0.7;

/// Fit residual above which the projection system is reported as ill-conditioned.
pub const CONDITION_WARNING_RESIDUAL: f64 = 1e-8;

const MAX_SCAN: i64 = 10_000_000;

/// A fitted approximation together with its certificate.
#[derive(Debug, Clone)]
pub struct ApproximationResult {
    pub superposition: Superposition,
    /// `c_0` multiplies `h_rho1`; `c_j`, `j >= 1`, multiply `h_{beta1(alpha_j)}`.
    pub coefficients: Vec<Complex64>,
    /// The alpha points `alpha_j`, `j = 1..K` (empty for `h^{a,0}`).
    pub alphas: Vec<Complex64>,
    pub cstar: f64,
    pub argmax_diagonal: i64,
    pub tail_bound_used: f64,
    /// Relative residual of the anchor equations after refinement.
    pub fit_residual: f64,
    pub condition_warning: bool,
}

impl ApproximationResult {
    /// `h^{a,K}(y)`, the real part of the superposition.
    pub fn value(&self, y: LatticePoint) -> f64 {
        self.superposition.value(y.c1, y.c2)
    }

    /// `|h^{a*,K}(k,k) - 1|` for `k = 0..=k_max`.
    pub fn diagonal_profile(&self, k_max: i64) -> Vec<f64> {
        (0..=k_max)
            .map(|k| (self.superposition.eval_complex(k, k) - 1.0).norm())
            .collect()
    }
}

/// `P_y(tau < inf)` in closed form when `r^2 = rho1 rho2`:
/// `bold h_r(y) + (1 - r)/(1 - rho2/r) rho1^y1`.
pub fn exact_geometric_formula(p: &QueueParams, y: LatticePoint) -> Result<f64> {
    let report = p.validate();
    report.require_harmonic()?;
    if !report.geometric_case {
        return Err(Error::Assumption { flag: "geometric_case" });
    }
    if !(y.c1 >= y.c2 && y.c2 >= 0) {
        return Err(Error::Domain(format!("closed form needs c1 >= c2 >= 0, got {y}")));
    }
    let d = p.rates();
    let factor = (1.0 - d.r) / (1.0 - d.rho2 / d.r);
    Ok(bold_h_r(p)?.value(y.c1, y.c2) + factor * d.rho1.powi(y.c1 as i32))
}

/// Result of the diagonal scan behind `c*`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Certificate {
    pub cstar: f64,
    pub argmax: i64,
    /// Geometric majorant of `|h(k,k) - 1|` beyond the last scanned `k`.
    pub tail_bound: f64,
    /// Last diagonal index evaluated.
    pub scanned: i64,
}

/// `c* = max_k |h*(k,k) - 1|` over the whole diagonal.
///
/// On the diagonal every piece `[(beta, alpha), (k,k)] = alpha^k`. Pieces with
/// `alpha = 1` add a constant; all others must contract (`|alpha| < 1`). After
/// step `k` the remaining terms are bounded by
/// `|const - 1| + sum_i |w_i| q_i^(k+1) / (1 - q_max)`, and the scan stops once
/// that bound drops below the running maximum.
pub fn certify_cstar(h: &Superposition) -> Result<Certificate> {
    if !is_pb_determined(h) {
        return Err(Error::NotBoundaryDetermined(
            "superposition has a piece with |beta| >= 1 or |alpha| > 1".into(),
        ));
    }
    let mut constant = Complex64::new(0.0, 0.0);
    let mut modes: Vec<(Complex64, Complex64)> = Vec::new();
    for (w, b) in h.brackets() {
        if (b.alpha - 1.0).norm() <= 1e-12 {
            constant += w;
        } else if b.alpha.norm() >= 1.0 - 1e-12 {
            return Err(Error::NoCertificate { modulus: b.alpha.norm() });
        } else {
            modes.push((w, b.alpha));
        }
    }
    let offset = constant - 1.0;
    let limit = offset.norm();
    let q_max = modes.iter().map(|(_, a)| a.norm()).fold(0.0, f64::max);
    let denom = 1.0 - q_max;

    let mut powers: Vec<Complex64> = vec![Complex64::new(1.0, 0.0); modes.len()];
    let mut tails: Vec<f64> = modes.iter().map(|(w, _)| w.norm()).collect();
    let mut best = -1.0;
    let mut argmax = 0;
    let mut k = 0;
    loop {
        let value: Complex64 = offset + modes.iter().zip(&powers).map(|((w, _), z)| w * z).sum::<Complex64>();
        let m = value.norm();
        if m > best {
            best = m;
            argmax = k;
        }
        for ((p, t), (_, a)) in powers.iter_mut().zip(tails.iter_mut()).zip(&modes) {
            *p *= a;
            *t *= a.norm();
        }
        let transient = tails.iter().sum::<f64>() / denom;
        let tail = limit + transient;
        if tail <= best {
            return Ok(Certificate { cstar: best, argmax, tail_bound: tail, scanned: k });
        }
        // The supremum is the limit itself, approached but never attained.
        if transient <= f64::EPSILON * limit.max(f64::MIN_POSITIVE) || k >= MAX_SCAN {
            return Ok(Certificate { cstar: best.max(limit), argmax: k + 1, tail_bound: tail, scanned: k });
        }
        k += 1;
    }
}

/// Which construction `h^{a,0}` used.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum A0Case {
    /// `rho1 >= r^2/rho2`: `bold h_r + (1 - r)/(1 - rho2/r) h_rho1`.
    RhoDominates,
    /// `rho1 < r^2/rho2`: `2 bold h_r + 2 C0 h_rho1`.
    ConjugateDominates,
}

#[derive(Debug, Clone)]
pub struct HA0 {
    pub approximation: ApproximationResult,
    /// Upper sandwich constant: `P <= h^{a,0} <= C8 P`.
    pub c8: f64,
    /// Maximizer of the exponential difference defining `C8`.
    pub x_star: f64,
    pub case: A0Case,
    /// `C0` of the second construction, zero otherwise.
    pub c0: f64,
    /// Set when `rho1` and `r^2/rho2` agree to within `EQUALITY_TOL`.
    pub boundary_case: bool,
}

/// `sup_{x >= 0} (a p^x - b q^x)` for `a, b >= 0`, `p, q in (0, 1)`, with its
/// maximizer (`f64::INFINITY` when the supremum is the limit 0).
fn sup_exp_difference(a: f64, p: f64, b: f64, q: f64) -> (f64, f64) {
    let f = |x: f64| a * p.powf(x) - b * q.powf(x);
    let mut best = (f(0.0), 0.0);
    if best.0 < 0.0 {
        best = (0.0, f64::INFINITY);
    }
    if (p - q).abs() > EQUALITY_TOL && a > 0.0 && b > 0.0 {
        // a ln p p^x = b ln q q^x  <=>  (p/q)^x = b ln q / (a ln p)
        let ratio = (b * q.ln()) / (a * p.ln());
        if ratio > 0.0 {
            let x = ratio.ln() / (p / q).ln();
            if x > 0.0 && f(x) > best.0 {
                best = (f(x), x);
            }
        }
    }
    best
}

/// Smallest `C0 >= 0` with `1 + min_{x >= 0} (C0 rho1^x - K alpha2^x) >= 1/2`,
/// i.e. `C0 = sup_x (K u^x - v^x / 2)` for `u = alpha2/rho1`, `v = 1/rho1`.
fn half_floor_c0(k: f64, rho1: f64, alpha2: f64) -> f64 {
    let (u, v) = (alpha2 / rho1, 1.0 / rho1);
    let g = |x: f64| k * u.powf(x) - 0.5 * v.powf(x);
    let mut best = g(0.0);
    let arg = 2.0 * k * u.ln() / v.ln();
    if arg > 0.0 {
        let x = arg.ln() / (v / u).ln();
        if x > 0.0 {
            best = best.max(g(x));
        }
    }
    best.max(0.0)
}

/// `h^{a,0}`: the two-function approximation with bounded relative error.
pub fn build_h_a0(p: &QueueParams) -> Result<HA0> {
    p.validate().require_harmonic()?;
    let d = p.rates();
    let factor = (1.0 - d.r) / (1.0 - d.rho2 / d.r);
    let alpha2 = d.r * d.r / d.rho2;
    let boundary_case = (d.rho1 - alpha2).abs() <= EQUALITY_TOL;

    let bold = bold_h_r(p)?;
    let h_rho1 = BasisFunction::rho1(p)?;
    let (case, scale, c1, c0, c8, x_star) = if d.rho1 >= alpha2 || boundary_case {
        let (gap, x_star) = if boundary_case {
            (0.0, f64::INFINITY)
        } else {
            sup_exp_difference(1.0, d.rho1, 1.0, alpha2)
        };
        (A0Case::RhoDominates, 1.0, factor, 0.0, 1.0 + factor * gap, x_star)
    } else {
        let c0 = half_floor_c0(factor, d.rho1, alpha2);
        let (gap, x_star) = sup_exp_difference(c0, d.rho1, factor, alpha2);
        (A0Case::ConjugateDominates, 2.0, 2.0 * c0, c0, 2.0 * (1.0 + gap), x_star)
    };

    let mut superposition = Superposition::new(true);
    for (coef, basis) in bold.terms() {
        superposition.push(coef * scale, *basis);
    }
    superposition.push(Complex64::new(c1, 0.0), h_rho1);
    let cert = certify_cstar(&superposition)?;
    Ok(HA0 {
        approximation: ApproximationResult {
            superposition,
            coefficients: vec![Complex64::new(c1, 0.0)],
            alphas: Vec::new(),
            cstar: cert.cstar,
            argmax_diagonal: cert.argmax,
            tail_bound_used: cert.tail_bound,
            fit_residual: 0.0,
            condition_warning: false,
        },
        c8,
        x_star,
        case,
        c0,
        boundary_case,
    })
}

/// `alpha_j = radius e^{2 pi i j/(K+1)}`, `j = 1..K`.
pub fn anchor_alphas(k: usize, radius: f64) -> Vec<Complex64> {
    (1..=k)
        .map(|j| Complex64::from_polar(radius, 2.0 * PI * j as f64 / (k + 1) as f64))
        .collect()
}

/// `h^{a,K} = Re(bold h_r + c_0 h_rho1 + sum_j c_j h_{beta1(alpha_j)})` with
/// the coefficients fixed by `h^{a,K}(k,k) = 1` for `k = 0..=K`.
pub fn build_h_ak(p: &QueueParams, k: usize, alpha_radius: f64) -> Result<ApproximationResult> {
    p.validate().require_harmonic()?;
    if k == 0 {
        return Err(Error::InvalidArgument("K must be at least 1".into()));
    }
    if !(alpha_radius > 0.0 && alpha_radius <= 1.0) {
        return Err(Error::InvalidArgument(format!("alpha radius must lie in (0, 1], got {alpha_radius}")));
    }
    let alphas = anchor_alphas(k, alpha_radius);
    let mut bases = vec![BasisFunction::rho1(p)?];
    for &alpha in &alphas {
        let beta = betas_of_alpha(p, alpha)?.beta1;
        let basis = BasisFunction::conjugate_pair(p, beta, alpha)?;
        if !is_pb_determined(&Superposition::new(false).with_term(Complex64::new(1.0, 0.0), basis)) {
            return Err(Error::NotBoundaryDetermined(format!(
                "h_beta1(alpha) at alpha = {alpha} (beta1 = {beta})"
            )));
        }
        bases.push(basis);
    }
    let bold = bold_h_r(p)?;

    let n = k + 1;
    let mut a = CMatrix::zeros(n);
    let mut rhs = vec![Complex64::new(0.0, 0.0); n];
    for (row, target) in rhs.iter_mut().enumerate() {
        let kk = row as i64;
        for (col, basis) in bases.iter().enumerate() {
            a.set(row, col, basis.eval(kk, kk));
        }
        *target = 1.0 - bold.eval_complex(kk, kk);
    }
    let (coefficients, fit_residual) = solve_refined(&a, &rhs).ok_or_else(|| Error::Singular {
        anchors: format!("(k,k) for k = 0..={k}, alphas on radius {alpha_radius}"),
    })?;

    let mut superposition = Superposition::new(true);
    for (coef, basis) in bold.terms() {
        superposition.push(*coef, *basis);
    }
    for (coef, basis) in coefficients.iter().zip(&bases) {
        superposition.push(*coef, *basis);
    }
    let cert = certify_cstar(&superposition)?;
    Ok(ApproximationResult {
        superposition,
        coefficients,
        alphas,
        cstar: cert.cstar,
        argmax_diagonal: cert.argmax,
        tail_bound_used: cert.tail_bound,
        fit_residual,
        condition_warning: fit_residual > CONDITION_WARNING_RESIDUAL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example() -> QueueParams {
        QueueParams::worked_example()
    }

    fn y(a: i64, b: i64) -> LatticePoint {
        LatticePoint::y(a, b).unwrap()
    }

    #[test]
    fn geometric_formula_on_diagonal_is_one() {
        let p = QueueParams::with_geometric_r(0.5, 0.2).unwrap();
        for k in 0..40 {
            assert!((exact_geometric_formula(&p, y(k, k)).unwrap() - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn geometric_formula_matches_closed_form() {
        let p = QueueParams::with_geometric_r(0.5, 0.2).unwrap();
        let d = p.rates();
        let kappa = d.r * (1.0 - d.r) / (d.r - d.rho2);
        for a in 0..30i32 {
            for b in 0..=a {
                let closed = d.r.powi(a - b)
                    + kappa * (d.rho1.powi(a) - d.r.powi(a - b) * d.rho1.powi(b));
                let got = exact_geometric_formula(&p, y(a as i64, b as i64)).unwrap();
                assert!((got - closed).abs() < 1e-13, "({a},{b})");
                if a > b {
                    assert!(got > 0.0 && got <= 1.0);
                }
            }
        }
    }

    #[test]
    fn geometric_formula_preconditions() {
        assert!(matches!(
            exact_geometric_formula(&example(), y(3, 1)),
            Err(Error::Assumption { flag: "geometric_case" })
        ));
        let p = QueueParams::with_geometric_r(0.5, 0.2).unwrap();
        assert!(exact_geometric_formula(&p, y(1, 3)).is_err());
    }

    #[test]
    fn sup_helper_against_grid() {
        for &(a, p, b, q) in &[(1.0, 0.5, 1.0, 0.459), (2.0, 0.3, 1.0, 0.7), (0.5, 0.8, 3.0, 0.4)] {
            let (v, _) = sup_exp_difference(a, p, b, q);
            let grid = (0..200_000)
                .map(|i| i as f64 * 1e-4)
                .map(|x: f64| a * p.powf(x) - b * q.powf(x))
                .fold(0.0f64, f64::max);
            assert!((v - grid).abs() < 1e-8, "{v} vs {grid}");
        }
    }

    #[test]
    fn c8_worked_example() {
        let h = build_h_a0(&example()).unwrap();
        assert_eq!(h.case, A0Case::RhoDominates);
        assert!((h.x_star - 1.3607).abs() < 1e-4);
        // Independent maximization on a fine grid.
        let d = example().rates();
        let a2 = d.r * d.r / d.rho2;
        let factor = (1.0 - d.r) / (1.0 - d.rho2 / d.r);
        let grid = (0..100_000)
            .map(|i| i as f64 * 1e-4)
            .map(|x: f64| d.rho1.powf(x) - a2.powf(x))
            .fold(0.0f64, f64::max);
        assert!((h.c8 - 1.0 - factor * grid).abs() < 1e-9);
        assert!(h.c8 - 1.0 > 0.35 && h.c8 - 1.0 < 0.37);
    }

    #[test]
    fn h_a0_sandwich_on_diagonal() {
        let h = build_h_a0(&example()).unwrap();
        for k in 0..=200 {
            let v = h.approximation.value(y(k, k));
            assert!(v >= 1.0 - 1e-12 && v <= h.c8 + 1e-12, "k = {k}: {v}");
        }
    }

    #[test]
    fn h_a0_geometric_case_is_exact() {
        let p = QueueParams::with_geometric_r(0.5, 0.2).unwrap();
        let h = build_h_a0(&p).unwrap();
        assert!(h.boundary_case);
        assert_eq!(h.c8, 1.0);
        for a in 0..20 {
            for b in 0..=a {
                let exact = exact_geometric_formula(&p, y(a, b)).unwrap();
                assert!((h.approximation.value(y(a, b)) - exact).abs() < 1e-13);
            }
        }
        assert!(h.approximation.cstar < 1e-12);
    }

    #[test]
    fn h_a0_second_case_bounds() {
        // rho1 < r^2/rho2 needs rho2 small relative to r^2.
        let p = QueueParams::normalize(0.3, 0.1, 0.45, 0.3).unwrap();
        let d = p.rates();
        let rep = p.validate();
        assert!(rep.stable && rep.ordered && rep.conjugate_inside, "{rep:?} {d:?}");
        assert!(d.rho1 < d.r * d.r / d.rho2);
        let h = build_h_a0(&p).unwrap();
        assert_eq!(h.case, A0Case::ConjugateDominates);
        let factor = (1.0 - d.r) / (1.0 - d.rho2 / d.r);
        let a2 = d.r * d.r / d.rho2;
        // Brute-force check of the half floor.
        let floor = (0..100_000)
            .map(|i| i as f64 * 1e-3)
            .map(|x: f64| h.c0 * d.rho1.powf(x) - factor * a2.powf(x))
            .fold(f64::INFINITY, f64::min);
        assert!(1.0 + floor >= 0.5 - 1e-9);
        for k in 0..=300 {
            let v = h.approximation.value(y(k, k));
            assert!(v >= 1.0 - 1e-9 && v <= h.c8 + 1e-9, "k = {k}: {v}");
        }
    }

    #[test]
    fn anchors_reproduce_one() {
        for k in [1usize, 3, 8, 20] {
            let fit = build_h_ak(&example(), k, DEFAULT_ALPHA_RADIUS).unwrap();
            assert_eq!(fit.coefficients.len(), k + 1);
            assert!(!fit.condition_warning);
            for kk in 0..=k as i64 {
                let v = fit.superposition.eval_complex(kk, kk);
                assert!((v - 1.0).norm() < 1e-10, "K={k}, k={kk}: {v}");
            }
        }
    }

    #[test]
    fn anchor_alpha_spacing() {
        let a = anchor_alphas(3, 0.7);
        assert!((a[0] - Complex64::new(0.0, 0.7)).norm() < 1e-15);
        assert!((a[1] - Complex64::new(-0.7, 0.0)).norm() < 1e-15);
        assert!((a[2] - Complex64::new(0.0, -0.7)).norm() < 1e-15);
    }

    #[test]
    fn cstar_matches_brute_force_scan() {
        for k in [3usize, 20] {
            let fit = build_h_ak(&example(), k, DEFAULT_ALPHA_RADIUS).unwrap();
            let profile = fit.diagonal_profile(2000);
            let (arg, max) = profile
                .iter()
                .enumerate()
                .fold((0, -1.0), |b, (i, &v)| if v > b.1 { (i, v) } else { b });
            assert!((fit.cstar - max).abs() < 1e-15);
            assert_eq!(fit.argmax_diagonal, arg as i64);
            assert!(fit.tail_bound_used <= fit.cstar);
        }
    }

    #[test]
    fn argmax_one_past_anchors() {
        assert_eq!(build_h_ak(&example(), 3, 0.7).unwrap().argmax_diagonal, 4);
        assert_eq!(build_h_ak(&example(), 20, 0.7).unwrap().argmax_diagonal, 21);
    }

    #[test]
    fn refinement_improves_certificate() {
        let p = example();
        let c8 = build_h_a0(&p).unwrap().c8;
        let c3 = build_h_ak(&p, 3, 0.7).unwrap().cstar;
        let c20 = build_h_ak(&p, 20, 0.7).unwrap().cstar;
        assert!(c20 < c3 && c3 < c8 - 1.0, "{c20} {c3} {c8}");
    }

    #[test]
    fn cstar_of_exact_superposition_vanishes() {
        let p = QueueParams::with_geometric_r(0.6, 0.3).unwrap();
        let cert = certify_cstar(&build_h_a0(&p).unwrap().approximation.superposition).unwrap();
        assert!(cert.cstar <= 1e-12);
    }

    #[test]
    fn certificate_rejects_noncontracting() {
        let p = example();
        let unit = BasisFunction::SinglePoint {
            beta: Complex64::new(0.5, 0.0),
            alpha: Complex64::new(-1.0, 0.0),
        };
        let h = Superposition::new(false).with_term(Complex64::new(1.0, 0.0), unit);
        assert!(matches!(certify_cstar(&h), Err(Error::NoCertificate { .. })));
        let _ = p;
    }

    #[test]
    fn build_rejects_bad_arguments() {
        let p = example();
        assert!(build_h_ak(&p, 0, 0.7).is_err());
        assert!(build_h_ak(&p, 3, 1.5).is_err());
        let sym = QueueParams::normalize(0.1, 0.1, 0.4, 0.4).unwrap();
        assert!(matches!(build_h_ak(&sym, 3, 0.7), Err(Error::Assumption { .. })));
    }
}
