//! Exact lattice solvers.
//!
//! `solve_pn` computes `P_x(tau_n < tau_0)` on the triangle `A_n`;
//! `solve_py_inf` computes `P_y(tau < inf)` for the Y walk on a truncated
//! wedge, doubling the truncation until the value settles. The far boundary
//! carries the value 0, so every truncated solution is a lower bound.

use crate::error::{Error, Result};
use crate::linalg::BandMatrix;
use crate::model::{LatticePoint, Picture, QueueParams};

/// Stopping threshold on the max relative change between sweeps.
pub const GS_TOLERANCE: f64 = 1e-13;
pub const GS_MAX_SWEEPS: u64 = 1_000_000;

/// Upper limit on band storage for a direct solve.
pub const DIRECT_MEMORY_LIMIT: usize = 2 << 30;

pub const WEDGE_START: usize = 64;
pub const WEDGE_MAX: usize = 1 << 16;
pub const DEFAULT_RTOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    /// Direct when the band fits in `DIRECT_MEMORY_LIMIT`, Gauss-Seidel otherwise.
    #[default]
    Auto,
    GaussSeidel,
    Direct,
}

/// `P_x(tau_n < tau_0)` for every `x` in `A_n`.
#[derive(Debug, Clone)]
pub struct GridSolution {
    pub n: usize,
    /// Row `x1 = a` holds `x2 = 0..n-a-1`; the line `x1 + x2 = n` is implicit.
    values: Vec<f64>,
    pub iterations: u64,
    pub final_relative_change: f64,
    pub method: Method,
}

fn row_start(n: usize, a: usize) -> usize {
    // sum_{k < a} (n - k)
    a * n - a * (a.saturating_sub(1)) / 2
}

impl GridSolution {
    /// Value at `(x1, x2)`; `None` outside `A_n`.
    pub fn value(&self, x1: i64, x2: i64) -> Option<f64> {
        if x1 < 0 || x2 < 0 {
            return None;
        }
        let (a, b) = (x1 as usize, x2 as usize);
        match (a + b).cmp(&self.n) {
            std::cmp::Ordering::Greater => None,
            std::cmp::Ordering::Equal => Some(1.0),
            std::cmp::Ordering::Less => Some(self.values[row_start(self.n, a) + b]),
        }
    }

    pub fn value_at(&self, x: LatticePoint) -> Result<f64> {
        if x.picture != Picture::X {
            return Err(Error::Domain(format!("{x} is not an X-picture point")));
        }
        self.value(x.c1, x.c2)
            .ok_or_else(|| Error::Domain(format!("{x} lies outside A_{}", self.n)))
    }

    /// Rows `(x1, x2, value)` over all of `A_n`, boundary included.
    pub fn rows(&self) -> impl Iterator<Item = (i64, i64, f64)> + '_ {
        let n = self.n as i64;
        (0..=n).flat_map(move |a| (0..=n - a).map(move |b| (a, b, self.value(a, b).unwrap())))
    }

    /// Max over interior points of `|P - E P(next)| / P`.
    pub fn balance_residual(&self, p: &QueueParams) -> f64 {
        let n = self.n as i64;
        let mut worst: f64 = 0.0;
        for a in 0..n {
            for b in 0..n - a {
                if a == 0 && b == 0 {
                    continue;
                }
                let v = self.value(a, b).unwrap();
                let expect = x_step_targets(a, b)
                    .iter()
                    .zip(x_probs(p))
                    .map(|(&(c, d), pr)| pr * self.value(c, d).unwrap())
                    .sum::<f64>();
                worst = worst.max((v - expect).abs() / v);
            }
        }
        worst
    }
}

fn x_probs(p: &QueueParams) -> [f64; 4] {
    [p.lambda1(), p.lambda2(), p.mu1(), p.mu2()]
}

/// Targets of the four constrained X increments, in `x_probs` order.
fn x_step_targets(a: i64, b: i64) -> [(i64, i64); 4] {
    [
        (a + 1, b),
        (a, b + 1),
        (if a > 0 { a - 1 } else { a }, b),
        (a, if b > 0 { b - 1 } else { b }),
    ]
}

/// Solves for `P_x(tau_n < tau_0)` on `A_n`.
pub fn solve_pn(p: &QueueParams, n: usize, method: Method) -> Result<GridSolution> {
    if !p.validate().stable {
        return Err(Error::Assumption { flag: "stable" });
    }
    if n < 2 {
        return Err(Error::InvalidArgument(format!("n must be at least 2, got {n}")));
    }
    let method = match method {
        Method::Auto if BandMatrix::storage_bytes(n * (n + 1) / 2, n + 1, n) <= DIRECT_MEMORY_LIMIT => {
            Method::Direct
        }
        Method::Auto => Method::GaussSeidel,
        m => m,
    };
    match method {
        Method::Direct => solve_pn_direct(p, n),
        _ => solve_pn_gauss_seidel(p, n),
    }
}

fn solve_pn_direct(p: &QueueParams, n: usize) -> Result<GridSolution> {
    let size = n * (n + 1) / 2;
    if BandMatrix::storage_bytes(size, n + 1, n) > DIRECT_MEMORY_LIMIT {
        return Err(Error::InvalidArgument(format!("n = {n} is too large for the direct solver")));
    }
    let probs = x_probs(p);
    let mut m = BandMatrix::zeros(size, n + 1, n);
    let mut rhs = vec![0.0; size];
    let ni = n as i64;
    for a in 0..ni {
        for b in 0..ni - a {
            let i = row_start(n, a as usize) + b as usize;
            m.add(i, i, 1.0);
            if a == 0 && b == 0 {
                continue;
            }
            for (&(c, d), pr) in x_step_targets(a, b).iter().zip(probs) {
                if c + d >= ni {
                    rhs[i] += pr;
                } else {
                    m.add(i, row_start(n, c as usize) + d as usize, -pr);
                }
            }
        }
    }
    m.solve_in_place(&mut rhs)
        .ok_or_else(|| Error::InvalidArgument("zero pivot in the lattice system".into()))?;
    Ok(GridSolution { n, values: rhs, iterations: 1, final_relative_change: 0.0, method: Method::Direct })
}

fn solve_pn_gauss_seidel(p: &QueueParams, n: usize) -> Result<GridSolution> {
    let probs = x_probs(p);
    let ni = n as i64;
    let mut values = vec![0.0; n * (n + 1) / 2];
    let get = |v: &[f64], a: i64, b: i64| -> f64 {
        if a + b >= ni {
            1.0
        } else {
            v[row_start(n, a as usize) + b as usize]
        }
    };
    let mut change = f64::INFINITY;
    for sweep in 1..=GS_MAX_SWEEPS {
        change = 0.0;
        for s in (1..ni).rev() {
            for a in 0..=s {
                let b = s - a;
                let mut stay = 0.0;
                let mut acc = 0.0;
                for (&(c, d), pr) in x_step_targets(a, b).iter().zip(probs) {
                    if (c, d) == (a, b) {
                        stay += pr;
                    } else {
                        acc += pr * get(&values, c, d);
                    }
                }
                let new = acc / (1.0 - stay);
                let slot = &mut values[row_start(n, a as usize) + b as usize];
                if new > 0.0 {
                    change = change.max((new - *slot).abs() / new);
                }
                *slot = new;
            }
        }
        if change <= GS_TOLERANCE {
            return Ok(GridSolution { n, values, iterations: sweep, final_relative_change: change, method: Method::GaussSeidel });
        }
    }
    Err(Error::NotConverged { sweeps: GS_MAX_SWEEPS, change })
}

/// `f_n(x) - f_n(0)` for the subharmonic function
/// `f_n(x) = max(rho1^(n-x1), r^(n-x1-x2), rho1^(n-1))`.
pub fn f_n_lower_bound(p: &QueueParams, x: LatticePoint, n: usize) -> Result<f64> {
    let (x1, x2) = (x.c1, x.c2);
    let ni = n as i64;
    if x.picture != Picture::X || x1 < 0 || x2 < 0 || x1 + x2 > ni {
        return Err(Error::Domain(format!("{x} is not in A_{n}")));
    }
    let d = p.rates();
    let f = |a: i64, b: i64| {
        d.rho1
            .powi((ni - a) as i32)
            .max(d.r.powi((ni - a - b) as i32))
            .max(d.rho1.powi((ni - 1) as i32))
    };
    Ok(f(x1, x2) - f(0, 0))
}

/// `P_y(tau < inf)` on a truncated wedge.
///
/// Stored in gap coordinates `g = y1 - y2`, `g = 1..m1-1`, `y2 = 0..m2-1`.
/// The value is 1 at `g = 0` and 0 once `g >= m1` or `y2 >= m2`.
#[derive(Debug, Clone)]
pub struct WedgeSolution {
    pub m1: usize,
    pub m2: usize,
    values: Vec<f64>,
    pub converged: bool,
}

impl WedgeSolution {
    /// Value at `(y1, y2)`; `None` below the first axis or above the diagonal.
    pub fn value(&self, y1: i64, y2: i64) -> Option<f64> {
        if y2 < 0 || y1 < y2 {
            return None;
        }
        let g = (y1 - y2) as usize;
        if g == 0 {
            return Some(1.0);
        }
        if g >= self.m1 || y2 as usize >= self.m2 {
            return Some(0.0);
        }
        Some(self.values[y2 as usize * (self.m1 - 1) + g - 1])
    }
}

fn wedge_bands(m1: usize) -> usize {
    (m1 - 1).saturating_sub(1).max(1)
}

/// Bytes needed for the band of an `(m1, m2)` wedge.
pub fn wedge_storage_bytes(m1: usize, m2: usize) -> usize {
    let bw = wedge_bands(m1);
    BandMatrix::storage_bytes((m1 - 1) * m2, bw, bw)
}

/// Solves the Y-walk balance on the wedge truncated at `(m1, m2)`.
pub fn solve_wedge(p: &QueueParams, m1: usize, m2: usize) -> Result<WedgeSolution> {
    if m1 < 2 || m2 < 1 {
        return Err(Error::InvalidArgument(format!("wedge truncation ({m1}, {m2}) too small")));
    }
    let w = m1 - 1;
    let size = w * m2;
    let bw = wedge_bands(m1);
    if wedge_storage_bytes(m1, m2) > DIRECT_MEMORY_LIMIT {
        return Err(Error::TruncationLimit { m: m1.max(m2), change: f64::NAN });
    }
    // Y increments as (gap, y2) moves: (-1,0) lambda1, (+1,0) mu1,
    // (0,+1) lambda2, (0,-1) mu2 (held at y2 = 0).
    let moves = [((-1i64, 0i64), p.lambda1()), ((1, 0), p.mu1()), ((-1, 1), p.lambda2()), ((1, -1), p.mu2())];
    let mut m = BandMatrix::zeros(size, bw, bw);
    let mut rhs = vec![0.0; size];
    for y2 in 0..m2 as i64 {
        for g in 1..m1 as i64 {
            let i = y2 as usize * w + g as usize - 1;
            m.add(i, i, 1.0);
            for ((dg, dy), pr) in moves {
                let (ng, ny) = if y2 + dy < 0 { (g, y2) } else { (g + dg, y2 + dy) };
                if ng == 0 {
                    rhs[i] += pr;
                } else if ng as usize >= m1 || ny as usize >= m2 {
                    continue;
                } else {
                    m.add(i, ny as usize * w + ng as usize - 1, -pr);
                }
            }
        }
    }
    m.solve_in_place(&mut rhs)
        .ok_or_else(|| Error::InvalidArgument("zero pivot in the wedge system".into()))?;
    Ok(WedgeSolution { m1, m2, values: rhs, converged: false })
}

/// Oracle values of `P_y(tau < inf)` with the truncation that produced them.
#[derive(Debug, Clone)]
pub struct LimitValues {
    pub values: Vec<f64>,
    pub m1: usize,
    pub m2: usize,
    /// Max relative change over the points at the last doubling.
    pub relative_change: f64,
}

/// `P_y(tau < inf)` at a single point.
pub fn solve_py_inf(p: &QueueParams, y: LatticePoint, rtol: f64) -> Result<LimitValues> {
    solve_py_inf_many(p, &[y], rtol)
}

/// `P_y(tau < inf)` at several points from one sequence of truncations.
pub fn solve_py_inf_many(p: &QueueParams, ys: &[LatticePoint], rtol: f64) -> Result<LimitValues> {
    let report = p.validate();
    if let Some(flag) = report.first_failure() {
        return Err(Error::Assumption { flag });
    }
    if rtol.is_nan() || rtol <= 0.0 {
        return Err(Error::InvalidArgument(format!("rtol must be positive, got {rtol}")));
    }
    for y in ys {
        if y.picture != Picture::Y || y.c2 < 0 || y.c1 < y.c2 {
            return Err(Error::Domain(format!("{y} is not a Y-picture point with y1 >= y2 >= 0")));
        }
    }
    let reach = ys.iter().map(|y| (y.c1 - y.c2).max(y.c2) as usize + 2).max().unwrap_or(0);
    let mut m = WEDGE_START;
    while m < reach {
        m *= 2;
    }
    let eval = |s: &WedgeSolution| -> Vec<f64> { ys.iter().map(|y| s.value(y.c1, y.c2).unwrap()).collect() };
    let mut prev = eval(&solve_wedge(p, m, m)?);
    let mut change = f64::INFINITY;
    loop {
        let next_m = m * 2;
        if next_m > WEDGE_MAX || wedge_storage_bytes(next_m, next_m) > DIRECT_MEMORY_LIMIT {
            return Err(Error::TruncationLimit { m, change });
        }
        let cur = eval(&solve_wedge(p, next_m, next_m)?);
        change = prev
            .iter()
            .zip(&cur)
            .map(|(a, b)| if *b > 0.0 { (b - a).abs() / b } else { 0.0 })
            .fold(0.0, f64::max);
        m = next_m;
        if change <= rtol {
            return Ok(LimitValues { values: cur, m1: m, m2: m, relative_change: change });
        }
        prev = cur;
    }
}
