//! Seeded Monte Carlo estimators for `p_n` and `P_y(tau < inf)`.
//!
//! Trials are split into fixed blocks of `BLOCK_TRIALS`. Block `b` draws from
//! ChaCha8 seeded with `seed` on stream `b`, so the tally does not depend on
//! how many threads run the blocks. Each step draws one uniform `u` in `[0, 1)`
//! and picks the increment from the ladder `lambda1, mu1, lambda2, mu2`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::approx::build_h_a0;
use crate::error::{Error, Result};
use crate::model::{LatticePoint, Picture, QueueParams};

pub const BLOCK_TRIALS: u64 = 1 << 16;

/// Environment variable capping the worker count (0 or unset: all cores).
pub const THREADS_ENV: &str = "OVERFLOW_THREADS";

/// Bound on `P(tau < inf)` from the escape level used by `mc_py_inf`.
pub const ESCAPE_EPSILON: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub half_width_95: f64,
    pub trials: u64,
    pub hits: u64,
    pub seed: u64,
    pub truncated_paths: u64,
}

impl McEstimate {
    fn from_tally(hits: u64, trials: u64, seed: u64, truncated_paths: u64) -> Self {
        let mean = hits as f64 / trials as f64;
        let half_width_95 = 1.96 * (mean * (1.0 - mean) / trials as f64).sqrt();
        Self { mean, half_width_95, trials, hits, seed, truncated_paths }
    }

    /// Whether `value` lies within `k` half-widths of the mean.
    pub fn covers(&self, value: f64, k: f64) -> bool {
        (self.mean - value).abs() <= k * self.half_width_95
    }
}

/// Cumulative thresholds of the ladder `lambda1, mu1, lambda2`.
fn ladder(p: &QueueParams) -> [f64; 3] {
    let a = p.lambda1();
    let b = a + p.mu1();
    [a, b, b + p.lambda2()]
}

#[inline]
fn rung(u: f64, cut: &[f64; 3]) -> u8 {
    if u < cut[0] {
        0
    } else if u < cut[1] {
        1
    } else if u < cut[2] {
        2
    } else {
        3
    }
}

fn worker_count() -> usize {
    std::env::var(THREADS_ENV).ok().and_then(|s| s.trim().parse().ok()).unwrap_or(0)
}

/// Runs `trial` over all blocks and sums `(hits, truncated)`.
fn run_blocks<F>(trials: u64, seed: u64, trial: F) -> Result<(u64, u64)>
where
    F: Fn(&mut ChaCha8Rng) -> (bool, bool) + Sync,
{
    let blocks = trials.div_ceil(BLOCK_TRIALS);
    let work = || {
        (0..blocks)
            .into_par_iter()
            .map(|b| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(b);
                let count = BLOCK_TRIALS.min(trials - b * BLOCK_TRIALS);
                let mut tally = (0u64, 0u64);
                for _ in 0..count {
                    let (hit, truncated) = trial(&mut rng);
                    tally.0 += hit as u64;
                    tally.1 += truncated as u64;
                }
                tally
            })
            .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1))
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count())
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    Ok(pool.install(work))
}

/// Estimates `P_x(tau_n < tau_0)` by simulating the constrained X walk.
pub fn mc_pn(p: &QueueParams, x: LatticePoint, n: i64, trials: u64, seed: u64) -> Result<McEstimate> {
    if x.picture != Picture::X || x.c1 < 0 || x.c2 < 0 || x.c1 + x.c2 > n {
        return Err(Error::Domain(format!("{x} is not in A_{n}")));
    }
    if x.c1 == 0 && x.c2 == 0 {
        return Err(Error::Domain("the origin is absorbing".into()));
    }
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    if x.c1 + x.c2 == n {
        return Ok(McEstimate::from_tally(trials, trials, seed, 0));
    }
    let cut = ladder(p);
    let (hits, _) = run_blocks(trials, seed, |rng| {
        let (mut a, mut b) = (x.c1, x.c2);
        loop {
            match rung(rng.random::<f64>(), &cut) {
                0 => a += 1,
                1 => a = (a - 1).max(0),
                2 => b += 1,
                _ => b = (b - 1).max(0),
            }
            if a + b == n {
                return (true, false);
            }
            if a == 0 && b == 0 {
                return (false, false);
            }
        }
    })?;
    Ok(McEstimate::from_tally(hits, trials, seed, 0))
}

/// Gap `y1 - y2` beyond which `P(tau < inf) <= ESCAPE_EPSILON`.
///
/// Uses the upper bound `h^{a,0}`: every bracket satisfies
/// `|beta^g alpha^y2| <= |beta|^g`, so `P <= sum |w| max|beta|^g`. Returns
/// `None` when the bound is unavailable for these parameters.
pub fn escape_level(p: &QueueParams) -> Option<i64> {
    let h = build_h_a0(p).ok()?;
    let brackets = h.approximation.superposition.brackets();
    let total: f64 = brackets.iter().map(|(w, _)| w.norm()).sum();
    let beta = brackets.iter().map(|(_, b)| b.beta.norm()).fold(0.0, f64::max);
    if beta.is_nan() || beta >= 1.0 || total <= 0.0 {
        return None;
    }
    let g = ((ESCAPE_EPSILON / total).ln() / beta.ln()).ceil();
    Some(g.max(1.0) as i64)
}

/// Estimates `P_y(tau < inf)` by simulating the Y walk.
///
/// A path is a miss once its gap reaches the escape level, and is counted
/// in `truncated_paths` if it survives `max_steps` steps without resolving.
pub fn mc_py_inf(p: &QueueParams, y: LatticePoint, trials: u64, max_steps: u64, seed: u64) -> Result<McEstimate> {
    if y.picture != Picture::Y || y.c2 < 0 || y.c1 < y.c2 {
        return Err(Error::Domain(format!("{y} is not a Y-picture point with y1 >= y2 >= 0")));
    }
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    if y.c1 == y.c2 {
        return Ok(McEstimate::from_tally(trials, trials, seed, 0));
    }
    let escape = escape_level(p).unwrap_or(i64::MAX);
    let cut = ladder(p);
    let (hits, truncated) = run_blocks(trials, seed, |rng| {
        let (mut g, mut b) = (y.c1 - y.c2, y.c2);
        for _ in 0..max_steps {
            match rung(rng.random::<f64>(), &cut) {
                0 => g -= 1,
                1 => g += 1,
                2 => {
                    g -= 1;
                    b += 1;
                }
                _ => {
                    if b > 0 {
                        g += 1;
                        b -= 1;
                    }
                }
            }
            if g == 0 {
                return (true, false);
            }
            if g >= escape {
                return (false, false);
            }
        }
        (false, true)
    })?;
    Ok(McEstimate::from_tally(hits, trials, seed, truncated))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example() -> QueueParams {
        QueueParams::worked_example()
    }

    #[test]
    fn ladder_order() {
        let cut = ladder(&example());
        assert_eq!(rung(0.05, &cut), 0);
        assert_eq!(rung(0.25, &cut), 1);
        assert_eq!(rung(0.45, &cut), 2);
        assert_eq!(rung(0.99, &cut), 3);
    }

    #[test]
    fn boundary_start_is_certain() {
        let e = mc_pn(&example(), LatticePoint::x(3, 5).unwrap(), 8, 10, 1).unwrap();
        assert_eq!(e.mean, 1.0);
        assert_eq!(e.half_width_95, 0.0);
        let e = mc_py_inf(&example(), LatticePoint::y(4, 4).unwrap(), 10, 10, 1).unwrap();
        assert_eq!(e.mean, 1.0);
    }

    #[test]
    fn deterministic_given_seed() {
        let p = example();
        let x = LatticePoint::x(2, 1).unwrap();
        let a = mc_pn(&p, x, 8, 200_000, 42).unwrap();
        let b = mc_pn(&p, x, 8, 200_000, 42).unwrap();
        let c = mc_pn(&p, x, 8, 200_000, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.hits, c.hits);
        assert_eq!(a.mean, a.hits as f64 / a.trials as f64);
    }

    #[test]
    fn block_split_is_prefix_stable() {
        // The first block is the same whether or not later blocks run.
        let p = example();
        let x = LatticePoint::x(2, 1).unwrap();
        let one = mc_pn(&p, x, 8, BLOCK_TRIALS, 7).unwrap();
        let two = mc_pn(&p, x, 8, 2 * BLOCK_TRIALS, 7).unwrap();
        assert!(two.hits >= one.hits);
    }

    #[test]
    fn escape_level_bounds_tail() {
        let p = example();
        let g = escape_level(&p).unwrap();
        let d = p.rates();
        assert!(g > 40 && g < 80, "{g}");
        assert!(d.rho1.powi(g as i32) < 1e-15);
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = example();
        assert!(mc_pn(&p, LatticePoint::x(0, 0).unwrap(), 8, 10, 1).is_err());
        assert!(mc_pn(&p, LatticePoint::x(9, 0).unwrap(), 8, 10, 1).is_err());
        assert!(mc_pn(&p, LatticePoint::x(1, 0).unwrap(), 8, 0, 1).is_err());
        assert!(mc_py_inf(&p, LatticePoint::y(1, 3).unwrap(), 10, 10, 1).is_err());
    }
}
