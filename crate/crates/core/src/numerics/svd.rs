//! Singular values through Householder bidiagonalization followed by the
//! implicitly shifted Golub-Kahan QR sweep on the (real) bidiagonal.

use num_complex::Complex64;

use super::matrix::{CMatrix, ZERO};

/// Singular values in nonincreasing order; `min(rows, cols)` of them.
///
/// Non-finite input yields NaN entries rather than an error; callers that need
/// a hard failure check `CMatrix::all_finite` first.
pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    if a.rows() == 0 || a.cols() == 0 {
        return Vec::new();
    }
    if !a.all_finite() {
        return vec![f64::NAN; a.rows().min(a.cols())];
    }
    let work = if a.rows() >= a.cols() { a.clone() } else { a.adjoint() };
    let (diag, sup) = bidiagonalize(work);
    let mut s: Vec<f64> = diag.iter().map(|z| z.norm()).collect();
    let mut e: Vec<f64> = sup.iter().map(|z| z.norm()).collect();
    bidiagonal_qr(&mut s, &mut e);
    s.sort_by(|x, y| y.partial_cmp(x).unwrap_or(std::cmp::Ordering::Equal));
    s
}

pub fn operator_norm(a: &CMatrix) -> f64 {
    singular_values(a).first().copied().unwrap_or(0.0)
}

/// Householder vector for `x`: returns `(v, beta)` with `(I - 2 v v^H) x = beta e_1`, `|v| = 1`.
fn householder(x: &[Complex64]) -> Option<(Vec<Complex64>, Complex64)> {
    let norm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return None;
    }
    let phase = if x[0].norm() == 0.0 { Complex64::new(1.0, 0.0) } else { x[0] / x[0].norm() };
    let beta = -phase * norm;
    let mut v = x.to_vec();
    v[0] -= beta;
    let vn = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if vn == 0.0 {
        return None;
    }
    v.iter_mut().for_each(|z| *z /= vn);
    Some((v, beta))
}

/// Reduces an m x n matrix (m >= n) to upper bidiagonal form; returns the
/// diagonal and superdiagonal (the latter padded with a trailing zero).
fn bidiagonalize(mut a: CMatrix) -> (Vec<Complex64>, Vec<Complex64>) {
    let (m, n) = (a.rows(), a.cols());
    let mut diag = vec![ZERO; n];
    let mut sup = vec![ZERO; n];
    for k in 0..n {
        // Left reflector on column k, rows k..m.
        let col: Vec<Complex64> = (k..m).map(|i| a[(i, k)]).collect();
        if let Some((v, beta)) = householder(&col) {
            for j in k..n {
                let mut w = ZERO;
                for (t, i) in (k..m).enumerate() {
                    w += v[t].conj() * a[(i, j)];
                }
                let w2 = w * 2.0;
                for (t, i) in (k..m).enumerate() {
                    a[(i, j)] -= v[t] * w2;
                }
            }
            diag[k] = beta;
        } else {
            diag[k] = a[(k, k)];
        }
        if k + 1 < n {
            // Right reflector on row k, columns k+1..n.
            let row: Vec<Complex64> = (k + 1..n).map(|j| a[(k, j)].conj()).collect();
            if let Some((v, beta)) = householder(&row) {
                // A <- A (I - 2 v v^H)^H restricted; since the reflector is Hermitian,
                // A <- A - 2 (A v) v^H on columns k+1..n.
                for i in k..m {
                    let mut w = ZERO;
                    for (t, j) in (k + 1..n).enumerate() {
                        w += a[(i, j)] * v[t];
                    }
                    let w2 = w * 2.0;
                    for (t, j) in (k + 1..n).enumerate() {
                        a[(i, j)] -= w2 * v[t].conj();
                    }
                }
                sup[k] = beta.conj();
            } else {
                sup[k] = a[(k, k + 1)];
            }
        }
    }
    (diag, sup)
}

/// Golub-Kahan implicit-shift QR on a real nonnegative bidiagonal matrix.
/// `s` holds the diagonal, `e[k]` the entry at (k, k+1); `e.len() == s.len()`.
fn bidiagonal_qr(s: &mut [f64], e: &mut [f64]) {
    let n = s.len() as isize;
    let mut p = n;
    let eps = f64::EPSILON;
    let tiny = 2f64.powi(-966);
    let mut iter = 0usize;
    let max_iter = 75 * s.len().max(1);
    let at = |i: isize| i as usize;

    while p > 0 {
        if iter > max_iter {
            break;
        }
        let mut k = p - 2;
        while k >= 0 {
            if e[at(k)].abs() <= tiny + eps * (s[at(k)].abs() + s[at(k + 1)].abs()) {
                e[at(k)] = 0.0;
                break;
            }
            k -= 1;
        }
        let kase;
        if k == p - 2 {
            kase = 4;
        } else {
            let mut ks = p - 1;
            while ks > k {
                let t = (if ks != p { e[at(ks)].abs() } else { 0.0 })
                    + (if ks != k + 1 { e[at(ks - 1)].abs() } else { 0.0 });
                if s[at(ks)].abs() <= tiny + eps * t {
                    s[at(ks)] = 0.0;
                    break;
                }
                ks -= 1;
            }
            if ks == k {
                kase = 3;
            } else if ks == p - 1 {
                kase = 1;
            } else {
                kase = 2;
                k = ks;
            }
        }
        k += 1;

        match kase {
            // Deflate negligible s[p-1].
            1 => {
                let mut f = e[at(p - 2)];
                e[at(p - 2)] = 0.0;
                let mut j = p - 2;
                while j >= k {
                    let t = s[at(j)].hypot(f);
                    let cs = s[at(j)] / t;
                    let sn = f / t;
                    s[at(j)] = t;
                    if j != k {
                        f = -sn * e[at(j - 1)];
                        e[at(j - 1)] *= cs;
                    }
                    j -= 1;
                }
            }
            // Split at negligible s[k-1].
            2 => {
                let mut f = e[at(k - 1)];
                e[at(k - 1)] = 0.0;
                for j in k..p {
                    let t = s[at(j)].hypot(f);
                    let cs = s[at(j)] / t;
                    let sn = f / t;
                    s[at(j)] = t;
                    f = -sn * e[at(j)];
                    e[at(j)] *= cs;
                }
            }
            // One QR step.
            3 => {
                let scale = s[at(p - 1)]
                    .abs()
                    .max(s[at(p - 2)].abs())
                    .max(e[at(p - 2)].abs())
                    .max(s[at(k)].abs())
                    .max(e[at(k)].abs());
                let sp = s[at(p - 1)] / scale;
                let spm1 = s[at(p - 2)] / scale;
                let epm1 = e[at(p - 2)] / scale;
                let sk = s[at(k)] / scale;
                let ek = e[at(k)] / scale;
                let b = ((spm1 + sp) * (spm1 - sp) + epm1 * epm1) / 2.0;
                let c = (sp * epm1) * (sp * epm1);
                let mut shift = 0.0;
                if b != 0.0 || c != 0.0 {
                    shift = (b * b + c).sqrt();
                    if b < 0.0 {
                        shift = -shift;
                    }
                    shift = c / (b + shift);
                }
                let mut f = (sk + sp) * (sk - sp) + shift;
                let mut g = sk * ek;
                for j in k..p - 1 {
                    let ju = at(j);
                    let mut t = f.hypot(g);
                    let mut cs = f / t;
                    let mut sn = g / t;
                    if j != k {
                        e[ju - 1] = t;
                    }
                    f = cs * s[ju] + sn * e[ju];
                    e[ju] = cs * e[ju] - sn * s[ju];
                    g = sn * s[ju + 1];
                    s[ju + 1] *= cs;
                    t = f.hypot(g);
                    cs = f / t;
                    sn = g / t;
                    s[ju] = t;
                    f = cs * e[ju] + sn * s[ju + 1];
                    s[ju + 1] = -sn * e[ju] + cs * s[ju + 1];
                    g = sn * e[ju + 1];
                    e[ju + 1] *= cs;
                }
                e[at(p - 2)] = f;
                iter += 1;
            }
            // Converged singular value.
            _ => {
                if s[at(k)] <= 0.0 {
                    s[at(k)] = -s[at(k)];
                }
                iter = 0;
                p -= 1;
            }
        }
    }
}
