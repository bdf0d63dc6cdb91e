//! Large-deviations diagnostics: Hamiltonians, their roots, and the rate
//! functions `V` and `V_sigma`.

use crate::model::QueueParams;

/// Coordinates whose negative increments are suppressed in a Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constraint {
    None,
    First,
    Second,
    Both,
}

impl Constraint {
    fn blocks(self, v: [i64; 2]) -> bool {
        let neg1 = v[0] < 0 && matches!(self, Constraint::First | Constraint::Both);
        let neg2 = v[1] < 0 && matches!(self, Constraint::Second | Constraint::Both);
        neg1 || neg2
    }
}

/// The four X increments with their probabilities.
pub fn increments(p: &QueueParams) -> [([i64; 2], f64); 4] {
    [
        ([1, 0], p.lambda1()),
        ([-1, 0], p.mu1()),
        ([0, 1], p.lambda2()),
        ([0, -1], p.mu2()),
    ]
}

/// `H_a(q) = -log( sum_{v allowed} p(v) e^{-<q,v>} + sum_{v blocked} p(v) )`.
pub fn hamiltonian(p: &QueueParams, q: [f64; 2], a: Constraint) -> f64 {
    let s: f64 = increments(p)
        .iter()
        .map(|&(v, pr)| {
            if a.blocks(v) {
                pr
            } else {
                pr * (-(q[0] * v[0] as f64 + q[1] * v[1] as f64)).exp()
            }
        })
        .sum();
    -s.ln()
}

/// The gradients `r_0..r_4`.
pub fn gradients(p: &QueueParams) -> [[f64; 2]; 5] {
    let d = p.rates();
    let (lr, l1) = (d.r.ln(), d.rho1.ln());
    [[0.0, 0.0], [l1, 0.0], [0.0, lr], [lr, lr], [l1 - lr, lr]]
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// `V(x) = min( log(r)(x1 + x2 - 1), log(rho1)(x1 - 1) )` on the unit simplex.
pub fn rate_v(p: &QueueParams, x: [f64; 2]) -> f64 {
    let d = p.rates();
    (d.r.ln() * (x[0] + x[1] - 1.0)).min(d.rho1.ln() * (x[0] - 1.0))
}

/// Two-stage rate: stage 0 before the walk visits the first axis, stage 1 after.
pub fn rate_vsigma(p: &QueueParams, stage: u8, x: [f64; 2]) -> f64 {
    let d = p.rates();
    let r = gradients(p);
    let (lr, l1) = (d.r.ln(), d.rho1.ln());
    if stage == 0 {
        (-l1).min(-lr + dot(r[4], x))
    } else {
        (-l1 + dot(r[1], x)).min(-lr + dot(r[3], x))
    }
}
