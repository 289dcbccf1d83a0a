use num_complex::Complex64;

use super::matrix::{CMatrix, ONE, ZERO};
use super::svd::singular_values;
use crate::error::{Error, Result};

/// Pivots at or below this fraction of the max-abs entry are treated as singular.
const PIVOT_TOL: f64 = 1e-14;

/// LU factorization with partial pivoting, `P A = L U`.
#[derive(Clone, Debug)]
pub struct Lu {
    n: usize,
    // L (unit diagonal, strictly lower part) and U packed together.
    lu: CMatrix,
    perm: Vec<usize>,
    sign: f64,
    singular: bool,
}

impl Lu {
    pub fn new(a: &CMatrix) -> Result<Self> {
        let n = a.ensure_square()?;
        a.ensure_finite()?;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        let scale = a.max_abs();
        let mut singular = scale == 0.0 && n > 0;
        for k in 0..n {
            let mut p = k;
            let mut best = lu[(k, k)].norm();
            for i in k + 1..n {
                let v = lu[(i, k)].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best <= PIVOT_TOL * scale {
                singular = true;
            }
            if p != k {
                perm.swap(p, k);
                sign = -sign;
                let (lo, hi) = lu.data_mut().split_at_mut(p * n);
                lo[k * n..(k + 1) * n].swap_with_slice(&mut hi[..n]);
            }
            let pivot = lu[(k, k)];
            if pivot == ZERO {
                continue;
            }
            let inv = ONE / pivot;
            for i in k + 1..n {
                let f = lu[(i, k)] * inv;
                lu[(i, k)] = f;
                if f == ZERO {
                    continue;
                }
                let data = lu.data_mut();
                let (top, bottom) = data.split_at_mut(i * n);
                let prow = &top[k * n + k + 1..(k + 1) * n];
                let irow = &mut bottom[k + 1..n];
                for (x, &y) in irow.iter_mut().zip(prow) {
                    *x -= f * y;
                }
            }
        }
        Ok(Self { n, lu, perm, sign, singular })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    pub fn det(&self) -> Complex64 {
        let mut d = Complex64::new(self.sign, 0.0);
        for i in 0..self.n {
            d *= self.lu[(i, i)];
        }
        d
    }

    /// Complex logarithm of the determinant, accumulated factor by factor
    /// (the imaginary part is not reduced to the principal branch).
    pub fn log_det(&self) -> Complex64 {
        let mut acc = if self.sign < 0.0 { Complex64::new(0.0, std::f64::consts::PI) } else { ZERO };
        for i in 0..self.n {
            acc += self.lu[(i, i)].ln();
        }
        acc
    }

    /// Solves `A x = y`; fails with the smallest singular value when `A` is singular.
    pub fn solve(&self, y: &[Complex64]) -> Result<Vec<Complex64>> {
        if y.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "right-hand side of length {} for a {}x{} system",
                y.len(),
                self.n,
                self.n
            )));
        }
        if self.singular {
            return Err(self.singular_error());
        }
        let n = self.n;
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| y[p]).collect();
        for i in 0..n {
            let row = self.lu.row(i);
            let mut s = x[i];
            for j in 0..i {
                s -= row[j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let row = self.lu.row(i);
            let mut s = x[i];
            for j in i + 1..n {
                s -= row[j] * x[j];
            }
            x[i] = s / row[i];
        }
        Ok(x)
    }

    pub fn inverse(&self) -> Result<CMatrix> {
        if self.singular {
            return Err(self.singular_error());
        }
        let n = self.n;
        let mut inv = CMatrix::zeros(n, n);
        let mut e = vec![ZERO; n];
        for j in 0..n {
            e.iter_mut().for_each(|z| *z = ZERO);
            e[j] = ONE;
            let col = self.solve(&e)?;
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        Ok(inv)
    }

    fn singular_error(&self) -> Error {
        // Reconstruct A = P^T L U only on the error path.
        let n = self.n;
        let l = CMatrix::from_fn(n, n, |i, j| match i.cmp(&j) {
            std::cmp::Ordering::Greater => self.lu[(i, j)],
            std::cmp::Ordering::Equal => ONE,
            std::cmp::Ordering::Less => ZERO,
        });
        let u = CMatrix::from_fn(n, n, |i, j| if i <= j { self.lu[(i, j)] } else { ZERO });
        let pa = &l * &u;
        let sigma_min = singular_values(&pa).last().copied().unwrap_or(0.0);
        Error::Singular { sigma_min }
    }
}

/// Solves `A x = y` for square invertible `A`.
pub fn solve_dense(a: &CMatrix, y: &[Complex64]) -> Result<Vec<Complex64>> {
    Lu::new(a)?.solve(y)
}

pub fn inverse(a: &CMatrix) -> Result<CMatrix> {
    Lu::new(a)?.inverse()
}
