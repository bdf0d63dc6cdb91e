//! Queue parameters, the assumptions the harmonic construction relies on, and
//! lattice points in the two coordinate systems.
//!
//! The X-picture is the queue-length process on the quadrant. The Y-picture
//! is the same walk seen from the corner `(n, 0)` through `T_n(x) = (n - x1, x2)`;
//! it lives on `Z x Z+` and is only constrained on the second axis.

use std::fmt;

use crate::error::{Error, Result};

/// Absolute tolerance for the algebraic equalities `rho1 = rho2` and `r^2 = rho1 rho2`.
pub const EQUALITY_TOL: f64 = 1e-12;

/// Jump probabilities of the embedded chain of two parallel M/M/1 queues.
///
/// `lambda_i` is the arrival probability and `mu_i` the service probability of
/// node `i`; the four values are positive and sum to one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueueParams {
    lambda1: f64,
    lambda2: f64,
    mu1: f64,
    mu2: f64,
}

/// Utilizations and the ratio of total arrival to total service rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedRates {
    pub rho1: f64,
    pub rho2: f64,
    pub r: f64,
}

/// Which modelling assumptions hold for a parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AssumptionReport {
    /// `rho1 < 1` and `rho2 < 1`.
    pub stable: bool,
    /// `rho2 <= r <= rho1`.
    pub ordered: bool,
    /// `rho1 != rho2`.
    pub distinct_utilizations: bool,
    /// `r^2 / rho2 < 1`.
    pub conjugate_inside: bool,
    /// `r^2 == rho1 rho2`; the case with a closed form for `P_y(tau < inf)`.
    pub geometric_case: bool,
}

impl AssumptionReport {
    /// Flag names and values in a fixed order.
    pub fn flags(&self) -> [(&'static str, bool); 5] {
        [
            ("stable", self.stable),
            ("ordered", self.ordered),
            ("distinct_utilizations", self.distinct_utilizations),
            ("conjugate_inside", self.conjugate_inside),
            ("geometric_case", self.geometric_case),
        ]
    }

    /// First flag required by the harmonic construction that does not hold.
    pub fn first_failure(&self) -> Option<&'static str> {
        self.flags()
            .into_iter()
            .take(4)
            .find(|(_, ok)| !ok)
            .map(|(name, _)| name)
    }

    pub fn require_harmonic(&self) -> Result<()> {
        match self.first_failure() {
            Some(flag) => Err(Error::Assumption { flag }),
            None => Ok(()),
        }
    }
}

fn check_rate(field: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidRate { field, value })
    }
}

impl QueueParams {
    /// Builds parameters from probabilities that already sum to one (within 1e-9).
    pub fn new(lambda1: f64, lambda2: f64, mu1: f64, mu2: f64) -> Result<Self> {
        check_rate("lambda1", lambda1)?;
        check_rate("lambda2", lambda2)?;
        check_rate("mu1", mu1)?;
        check_rate("mu2", mu2)?;
        let sum = lambda1 + lambda2 + mu1 + mu2;
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::NotNormalized { sum });
        }
        Ok(Self { lambda1, lambda2, mu1, mu2 })
    }

    /// Scales four positive rates into jump probabilities.
    pub fn normalize(lambda1: f64, lambda2: f64, mu1: f64, mu2: f64) -> Result<Self> {
        check_rate("lambda1", lambda1)?;
        check_rate("lambda2", lambda2)?;
        check_rate("mu1", mu1)?;
        check_rate("mu2", mu2)?;
        let total = lambda1 + lambda2 + mu1 + mu2;
        Ok(Self {
            lambda1: lambda1 / total,
            lambda2: lambda2 / total,
            mu1: mu1 / total,
            mu2: mu2 / total,
        })
    }

    /// Parameters with prescribed utilizations and `r = sqrt(rho1 rho2)`.
    ///
    /// Service probabilities are split `w : 1 - w` with
    /// `w = (sqrt(rho1 rho2) - rho2) / (rho1 - rho2)`, which makes `r` the
    /// `w`-weighted mean of the utilizations.
    pub fn with_geometric_r(rho1: f64, rho2: f64) -> Result<Self> {
        if !(rho1.is_finite() && rho2.is_finite() && 0.0 < rho2 && rho2 < rho1 && rho1 < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "need 0 < rho2 < rho1 < 1, got rho1 = {rho1}, rho2 = {rho2}"
            )));
        }
        if rho1 - rho2 <= EQUALITY_TOL {
            return Err(Error::Assumption { flag: "distinct_utilizations" });
        }
        let g = (rho1 * rho2).sqrt();
        let w = (g - rho2) / (rho1 - rho2);
        let params = Self::normalize(rho1 * w, rho2 * (1.0 - w), w, 1.0 - w)?;
        params.validate().require_harmonic()?;
        Ok(params)
    }

    /// The worked example with `lambda = (0.1, 0.2)`, `mu = (0.2, 0.5)`.
    pub fn worked_example() -> Self {
        Self { lambda1: 0.1, lambda2: 0.2, mu1: 0.2, mu2: 0.5 }
    }

    pub fn lambda1(&self) -> f64 {
        self.lambda1
    }
    pub fn lambda2(&self) -> f64 {
        self.lambda2
    }
    pub fn mu1(&self) -> f64 {
        self.mu1
    }
    pub fn mu2(&self) -> f64 {
        self.mu2
    }

    pub fn rates(&self) -> DerivedRates {
        DerivedRates {
            rho1: self.lambda1 / self.mu1,
            rho2: self.lambda2 / self.mu2,
            r: (self.lambda1 + self.lambda2) / (self.mu1 + self.mu2),
        }
    }

    pub fn validate(&self) -> AssumptionReport {
        let DerivedRates { rho1, rho2, r } = self.rates();
        AssumptionReport {
            stable: rho1 < 1.0 && rho2 < 1.0,
            ordered: rho2 <= r && r <= rho1,
            distinct_utilizations: (rho1 - rho2).abs() > EQUALITY_TOL,
            conjugate_inside: r * r / rho2 < 1.0,
            geometric_case: (r * r - rho1 * rho2).abs() <= EQUALITY_TOL,
        }
    }
}

impl fmt::Display for QueueParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "lambda1={} lambda2={} mu1={} mu2={}",
            self.lambda1, self.lambda2, self.mu1, self.mu2
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Picture {
    /// Queue lengths, both coordinates nonnegative.
    X,
    /// Seen from the corner `(n, 0)`; only the second coordinate is constrained.
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LatticePoint {
    pub c1: i64,
    pub c2: i64,
    pub picture: Picture,
}

impl LatticePoint {
    pub fn x(c1: i64, c2: i64) -> Result<Self> {
        if c1 < 0 || c2 < 0 {
            return Err(Error::Domain(format!("X-picture point ({c1}, {c2}) leaves the quadrant")));
        }
        Ok(Self { c1, c2, picture: Picture::X })
    }

    pub fn y(c1: i64, c2: i64) -> Result<Self> {
        if c2 < 0 {
            return Err(Error::Domain(format!("Y-picture point ({c1}, {c2}) has c2 < 0")));
        }
        Ok(Self { c1, c2, picture: Picture::Y })
    }

    /// `T_n = n e1 + I`, mapping between the two pictures.
    ///
    /// X points map to Y points; a Y point maps back to the X picture only
    /// when `c1 <= n`.
    pub fn transform_tn(self, n: i64) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidArgument(format!("T_n needs n >= 1, got {n}")));
        }
        match self.picture {
            Picture::X => Self::y(n - self.c1, self.c2),
            Picture::Y => Self::x(n - self.c1, self.c2),
        }
    }

    pub fn coords(&self) -> (i64, i64) {
        (self.c1, self.c2)
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.c1, self.c2)
    }
}
