//! Dense complex eigensolver: Householder reduction to upper Hessenberg form,
//! then single-shift complex QR (Wilkinson shift, Givens sweeps) to Schur form.

use num_complex::Complex64;

use super::matrix::{vec_norm, CMatrix, ONE, ZERO};
use crate::error::{Error, Result};

/// Subdiagonal entries below this fraction of the matrix norm are deflated.
pub const DEFLATION_TOL: f64 = 1e-12;
/// Eigenvalues closer than this (relative to `1 + |λ|`) are merged into one cluster.
pub const CLUSTER_TOL: f64 = 1e-8;
/// Sweeps allowed per eigenvalue before giving up.
pub const MAX_SWEEPS_PER_EIGENVALUE: usize = 60;

/// Eigenvalues with algebraic multiplicity plus a residual of the computed pairs.
#[derive(Clone, Debug)]
pub struct EigenResult {
    /// One entry per eigenvalue counted with multiplicity (length = dimension).
    pub eigenvalues: Vec<Complex64>,
    /// `max ‖A v − λ v‖` over the computed unit eigenvectors.
    pub residual: f64,
}

impl EigenResult {
    /// Merges eigenvalues within `CLUSTER_TOL` into `(centroid, multiplicity)` pairs.
    pub fn clustered(&self) -> Vec<(Complex64, usize)> {
        cluster_eigenvalues(&self.eigenvalues, CLUSTER_TOL)
    }
}

/// Single-linkage clustering at relative distance `tol`; centroids are reported.
pub fn cluster_eigenvalues(values: &[Complex64], tol: f64) -> Vec<(Complex64, usize)> {
    let n = values.len();
    let mut label: Vec<usize> = (0..n).collect();
    fn find(label: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while label[r] != r {
            r = label[r];
        }
        let mut j = i;
        while label[j] != r {
            let next = label[j];
            label[j] = r;
            j = next;
        }
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            let scale = 1.0 + values[i].norm().max(values[j].norm());
            if (values[i] - values[j]).norm() <= tol * scale {
                let (a, b) = (find(&mut label, i), find(&mut label, j));
                if a != b {
                    label[b.max(a)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<(usize, Complex64, usize)> = Vec::new();
    for i in 0..n {
        let root = find(&mut label, i);
        match groups.iter_mut().find(|g| g.0 == root) {
            Some(g) => {
                g.1 += values[i];
                g.2 += 1;
            }
            None => groups.push((root, values[i], 1)),
        }
    }
    groups.into_iter().map(|(_, sum, count)| (sum / count as f64, count)).collect()
}

/// Eigenvalues and the eigenpair residual of a square matrix.
pub fn eig_dense(a: &CMatrix) -> Result<EigenResult> {
    let n = a.ensure_square()?;
    a.ensure_finite()?;
    if n == 0 {
        return Ok(EigenResult { eigenvalues: Vec::new(), residual: 0.0 });
    }
    let mut schur = Schur::compute(a, true)?;
    let values = schur.t.diagonal();
    let z = schur.z.take().expect("schur vectors requested");
    let y = triangular_eigenvectors(&schur.t);
    let v = &z * &y;
    let mut residual: f64 = 0.0;
    let av = a * &v;
    for k in 0..n {
        let col: Vec<Complex64> = (0..n).map(|i| v[(i, k)]).collect();
        let norm = vec_norm(&col);
        if norm == 0.0 {
            continue;
        }
        let r: f64 = (0..n)
            .map(|i| ((av[(i, k)] - values[k] * v[(i, k)]) / norm).norm_sqr())
            .sum::<f64>()
            .sqrt();
        residual = residual.max(r);
    }
    Ok(EigenResult { eigenvalues: values, residual })
}

/// Eigenvalues only (no Schur vectors), for inner loops.
pub fn eigenvalues(a: &CMatrix) -> Result<Vec<Complex64>> {
    let n = a.ensure_square()?;
    a.ensure_finite()?;
    if n == 0 {
        return Ok(Vec::new());
    }
    Ok(Schur::compute(a, false)?.t.diagonal())
}

struct Schur {
    t: CMatrix,
    z: Option<CMatrix>,
}

impl Schur {
    fn compute(a: &CMatrix, want_z: bool) -> Result<Self> {
        let n = a.rows();
        let mut h = a.clone();
        let mut z = want_z.then(|| CMatrix::identity(n));
        hessenberg(&mut h, z.as_mut());
        let norm = a.frobenius_norm();
        qr_iterate(&mut h, z.as_mut(), norm)?;
        Ok(Self { t: h, z })
    }
}

fn hessenberg(h: &mut CMatrix, mut z: Option<&mut CMatrix>) {
    let n = h.rows();
    if n < 3 {
        return;
    }
    for k in 0..n - 2 {
        let x: Vec<Complex64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let norm = vec_norm(&x);
        if norm == 0.0 {
            continue;
        }
        let phase = if x[0].norm() == 0.0 { ONE } else { x[0] / x[0].norm() };
        let beta = -phase * norm;
        let mut v = x;
        v[0] -= beta;
        let vn = vec_norm(&v);
        if vn == 0.0 {
            continue;
        }
        v.iter_mut().for_each(|c| *c /= vn);
        // Left: rows k+1..n, columns k..n.
        for j in k..n {
            let mut w = ZERO;
            for (t, i) in (k + 1..n).enumerate() {
                w += v[t].conj() * h[(i, j)];
            }
            let w2 = w * 2.0;
            for (t, i) in (k + 1..n).enumerate() {
                h[(i, j)] -= v[t] * w2;
            }
        }
        // Right: all rows, columns k+1..n.
        for i in 0..n {
            let row = h.row_mut(i);
            let mut w = ZERO;
            for (t, j) in (k + 1..n).enumerate() {
                w += row[j] * v[t];
            }
            let w2 = w * 2.0;
            for (t, j) in (k + 1..n).enumerate() {
                row[j] -= w2 * v[t].conj();
            }
        }
        for i in k + 2..n {
            h[(i, k)] = ZERO;
        }
        if let Some(z) = z.as_deref_mut() {
            for i in 0..n {
                let row = z.row_mut(i);
                let mut w = ZERO;
                for (t, j) in (k + 1..n).enumerate() {
                    w += row[j] * v[t];
                }
                let w2 = w * 2.0;
                for (t, j) in (k + 1..n).enumerate() {
                    row[j] -= w2 * v[t].conj();
                }
            }
        }
    }
}

/// Givens rotation `[[c, s], [-conj(s), c]]` with real `c` mapping `(a, b)` to `(r, 0)`.
#[inline]
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    if b == ZERO {
        return (1.0, ZERO);
    }
    if a == ZERO {
        return (0.0, b.conj() / b.norm());
    }
    let an = a.norm();
    let norm = an.hypot(b.norm());
    let phase = a / an;
    (an / norm, phase * b.conj() / norm)
}

fn qr_iterate(h: &mut CMatrix, mut z: Option<&mut CMatrix>, norm: f64) -> Result<()> {
    let n = h.rows();
    let small = DEFLATION_TOL * norm;
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    let mut rot: Vec<(f64, Complex64)> = Vec::with_capacity(n);
    loop {
        // Locate the start of the active unreduced block ending at `hi`.
        let mut lo = hi;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            let local = h[(lo, lo)].norm() + h[(lo - 1, lo - 1)].norm();
            if sub <= small || sub <= f64::EPSILON * local {
                h[(lo, lo - 1)] = ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            if hi == 0 {
                break;
            }
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if iter > MAX_SWEEPS_PER_EIGENVALUE {
            return Err(Error::NoConvergence { what: "complex QR iteration", iterations: total });
        }

        let shift = if iter % 11 == 0 {
            // Exceptional shift to break cycles.
            h[(hi, hi)] + Complex64::new(0.75 * h[(hi, hi - 1)].norm(), 0.0)
        } else {
            wilkinson_shift(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };

        for k in lo..=hi {
            h[(k, k)] -= shift;
        }
        rot.clear();
        // Left rotations: columns k..n keep the full Schur form consistent.
        for k in lo..hi {
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            rot.push((c, s));
            for j in k..n {
                let x = h[(k, j)];
                let y = h[(k + 1, j)];
                h[(k, j)] = x * c + s * y;
                h[(k + 1, j)] = -s.conj() * x + y * c;
            }
        }
        // Right rotations: rows 0..=k+1.
        for (idx, k) in (lo..hi).enumerate() {
            let (c, s) = rot[idx];
            let sc = s.conj();
            for i in 0..=(k + 1) {
                let x = h[(i, k)];
                let y = h[(i, k + 1)];
                h[(i, k)] = x * c + y * sc;
                h[(i, k + 1)] = -x * s + y * c;
            }
            if let Some(z) = z.as_deref_mut() {
                for i in 0..n {
                    let x = z[(i, k)];
                    let y = z[(i, k + 1)];
                    z[(i, k)] = x * c + y * sc;
                    z[(i, k + 1)] = -x * s + y * c;
                }
            }
        }
        for k in lo..=hi {
            h[(k, k)] += shift;
        }
    }
    // Clean the strictly lower part.
    for i in 1..n {
        for j in 0..i {
            h[(i, j)] = ZERO;
        }
    }
    Ok(())
}

/// Eigenvalue of `[[a, b], [c, d]]` closer to `d`.
fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let tr_half = (a + d) * 0.5;
    let det = a * d - b * c;
    let disc = (tr_half * tr_half - det).sqrt();
    let l1 = tr_half + disc;
    let l2 = tr_half - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Columns are eigenvectors of the upper-triangular `t` (unnormalized).
fn triangular_eigenvectors(t: &CMatrix) -> CMatrix {
    let n = t.rows();
    let smin = (f64::EPSILON * t.frobenius_norm()).max(f64::MIN_POSITIVE);
    let mut y = CMatrix::zeros(n, n);
    let mut x = vec![ZERO; n];
    for k in 0..n {
        let lambda = t[(k, k)];
        x.iter_mut().for_each(|c| *c = ZERO);
        x[k] = ONE;
        for j in (0..k).rev() {
            let mut s = ZERO;
            let row = t.row(j);
            for i in j + 1..=k {
                s += row[i] * x[i];
            }
            let mut d = row[j] - lambda;
            if d.norm() < smin {
                d = Complex64::new(smin, 0.0);
            }
            x[j] = -s / d;
            // Rescale to avoid overflow on nearly defective blocks.
            let big = x[j].norm();
            if big > 1e100 {
                for c in x.iter_mut().take(k + 1) {
                    *c /= big;
                }
            }
        }
        let norm = vec_norm(&x[..=k]);
        for i in 0..=k {
            y[(i, k)] = x[i] / norm;
        }
    }
    y
}
