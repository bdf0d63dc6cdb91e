//! Small linear solvers: dense complex systems for the coefficient fit and
//! banded real systems for the lattice problems.

use num_complex::Complex64;

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![Complex64::new(0.0, 0.0); n * n] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.n + j] = v;
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j) * x[j]).sum())
            .collect()
    }
}

/// LU factors with the row permutation from partial pivoting.
#[derive(Debug, Clone)]
pub struct ComplexLu {
    lu: CMatrix,
    perm: Vec<usize>,
}

impl ComplexLu {
    /// Returns `None` when a pivot vanishes relative to the matrix scale.
    pub fn factor(a: &CMatrix) -> Option<Self> {
        let n = a.dim();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = a.data.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if scale == 0.0 {
            return None;
        }
        for k in 0..n {
            let (piv, piv_abs) = (k..n)
                .map(|i| (i, lu.get(i, k).norm()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if piv_abs <= scale * 1e-14 * n as f64 {
                return None;
            }
            if piv != k {
                for j in 0..n {
                    lu.data.swap(k * n + j, piv * n + j);
                }
                perm.swap(k, piv);
            }
            let pivot = lu.get(k, k);
            for i in k + 1..n {
                let factor = lu.get(i, k) / pivot;
                lu.set(i, k, factor);
                for j in k + 1..n {
                    let v = lu.get(i, j) - factor * lu.get(k, j);
                    lu.set(i, j, v);
                }
            }
        }
        Some(Self { lu, perm })
    }

    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.lu.dim();
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                let t = self.lu.get(i, j) * x[j];
                x[i] -= t;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let t = self.lu.get(i, j) * x[j];
                x[i] -= t;
            }
            x[i] /= self.lu.get(i, i);
        }
        x
    }
}

/// Solves `a x = b` with one step of iterative refinement.
///
/// Returns the solution and the relative residual `|a x - b|_inf / |b|_inf`.
pub fn solve_refined(a: &CMatrix, b: &[Complex64]) -> Option<(Vec<Complex64>, f64)> {
    let lu = ComplexLu::factor(a)?;
    let mut x = lu.solve(b);
    let residual = |x: &[Complex64]| -> Vec<Complex64> {
        a.mul_vec(x).iter().zip(b).map(|(ax, bi)| bi - ax).collect()
    };
    let r = residual(&x);
    let dx = lu.solve(&r);
    for (xi, di) in x.iter_mut().zip(&dx) {
        *xi += di;
    }
    let bnorm = b.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let rel = residual(&x).iter().map(|z| z.norm()).fold(0.0, f64::max) / bnorm;
    Some((x, rel))
}

/// Square banded matrix with `lower` sub- and `upper` super-diagonals.
///
/// Factored in place without pivoting, which is stable for the
/// diagonally dominant M-matrices `I - P` produced by the lattice problems:
/// every Schur complement stays an M-matrix, so no cancellation occurs.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    lower: usize,
    upper: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, lower: usize, upper: usize) -> Self {
        let width = lower + upper + 1;
        Self { n, lower, upper, width, data: vec![0.0; n * width] }
    }

    /// Bytes needed to store an `n x n` matrix with the given bandwidths.
    pub fn storage_bytes(n: usize, lower: usize, upper: usize) -> usize {
        n.saturating_mul(lower + upper + 1).saturating_mul(std::mem::size_of::<f64>())
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.lower >= i && j <= i + self.upper);
        i * self.width + (j + self.lower - i)
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.lower < i || j > i + self.upper {
            0.0
        } else {
            self.data[self.idx(i, j)]
        }
    }

    /// `y = A x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.lower);
                let hi = (i + self.upper).min(self.n - 1);
                (lo..=hi).map(|j| self.data[self.idx(i, j)] * x[j]).sum()
            })
            .collect()
    }

    /// Factors in place into unit-lower `L` and upper `U`, then solves.
    pub fn solve_in_place(mut self, b: &mut [f64]) -> Option<()> {
        let n = self.n;
        for k in 0..n {
            let pivot = self.data[self.idx(k, k)];
            if pivot == 0.0 || !pivot.is_finite() {
                return None;
            }
            let row_end = (k + self.upper).min(n - 1);
            let col_end = (k + self.lower).min(n - 1);
            for i in k + 1..=col_end {
                let ik = self.idx(i, k);
                let factor = self.data[ik] / pivot;
                if factor == 0.0 {
                    continue;
                }
                self.data[ik] = factor;
                let base_i = self.idx(i, k + 1);
                let base_k = self.idx(k, k + 1);
                for off in 0..row_end - k {
                    self.data[base_i + off] -= factor * self.data[base_k + off];
                }
            }
        }
        // Forward substitution with unit L.
        for i in 0..n {
            let lo = i.saturating_sub(self.lower);
            let s: f64 = (lo..i).map(|j| self.data[self.idx(i, j)] * b[j]).sum();
            b[i] -= s;
        }
        for i in (0..n).rev() {
            let hi = (i + self.upper).min(n - 1);
            let s: f64 = (i + 1..=hi).map(|j| self.data[self.idx(i, j)] * b[j]).sum();
            b[i] = (b[i] - s) / self.data[self.idx(i, i)];
        }
        Some(())
    }
}
