//! Schatten norms and regularized determinants det_k(Id − A).

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{eigenvalues, singular_values, CMatrix, Lu};

/// Schatten exponent p ∈ [1, ∞] and the determinant order k = ⌈p⌉.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SchattenIndex {
    pub p: f64,
    pub k: usize,
}

impl SchattenIndex {
    pub fn new(p: f64) -> Result<Self> {
        if !(p >= 1.0) {
            return Err(Error::InvalidParameter(format!("Schatten exponent must be >= 1, got {p}")));
        }
        let k = if p.is_infinite() { usize::MAX } else { p.ceil() as usize };
        Ok(Self { p, k })
    }
}

/// (Σ s_j^p)^{1/p}; the operator norm for p = ∞.
pub fn schatten_norm(a: &CMatrix, p: f64) -> Result<f64> {
    let idx = SchattenIndex::new(p)?;
    a.ensure_finite()?;
    let s = singular_values(a);
    Ok(schatten_from_singular_values(&s, idx.p))
}

pub fn schatten_from_singular_values(s: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        return s.iter().copied().fold(0.0, f64::max);
    }
    let top = s.iter().copied().fold(0.0, f64::max);
    if top == 0.0 {
        return 0.0;
    }
    // Scale by the largest value to keep s^p in range.
    top * s.iter().map(|&x| (x / top).powf(p)).sum::<f64>().powf(1.0 / p)
}

/// Π_j (1−λ_j) exp(Σ_{i<k} λ_j^i / i) for a list of eigenvalues.
pub fn reg_det_from_eigenvalues(eigs: &[Complex64], k: usize) -> Complex64 {
    let mut det = Complex64::new(1.0, 0.0);
    for &l in eigs {
        let mut s = Complex64::new(0.0, 0.0);
        let mut pow = Complex64::new(1.0, 0.0);
        for i in 1..k {
            pow *= l;
            s += pow / i as f64;
        }
        det *= (1.0 - l) * s.exp();
    }
    det
}

/// det_k(Id − A) from the eigenvalues of A.
pub fn reg_det(a: &CMatrix, k: usize) -> Result<Complex64> {
    if k == 0 {
        return Err(Error::InvalidParameter("regularization order must be >= 1".into()));
    }
    Ok(reg_det_from_eigenvalues(&eigenvalues(a)?, k))
}

/// log det_k(Id − A) via det(Id − A)·exp(Σ_{j<k} tr(A^j)/j); no eigensolve.
/// The imaginary part is not reduced to a principal branch.
pub fn log_reg_det_lu(a: &CMatrix, k: usize) -> Result<Complex64> {
    if k == 0 {
        return Err(Error::InvalidParameter("regularization order must be >= 1".into()));
    }
    let n = a.ensure_square()?;
    let lu = Lu::new(&(&CMatrix::identity(n) - a))?;
    let mut acc = lu.log_det();
    let mut pow = a.clone();
    for j in 1..k {
        if j > 1 {
            pow = &pow * a;
        }
        acc += pow.trace() / j as f64;
    }
    Ok(acc)
}

/// Γ̂ = log|det_⌈p⌉(Id − A)| / ‖A‖_{S_p}^p; 0 for A = 0.
pub fn det_growth_check(a: &CMatrix, p: f64) -> Result<f64> {
    let idx = SchattenIndex::new(p)?;
    if p.is_infinite() {
        return Err(Error::InvalidParameter("growth ratio needs finite p".into()));
    }
    let norm = schatten_norm(a, p)?;
    if norm == 0.0 {
        return Ok(0.0);
    }
    let det = reg_det(a, idx.k)?;
    Ok(det.norm().ln() / norm.powf(p))
}

/// |det_k(Id − AB) − det_k(Id − BA)| relative to max(1, |det_k(Id − AB)|).
pub fn cyclic_check(a: &CMatrix, b: &CMatrix, k: usize) -> Result<f64> {
    if a.cols() != b.rows() || b.cols() != a.rows() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} and {}x{} do not form square products",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let ab = reg_det(&a.matmul(b)?, k)?;
    let ba = reg_det(&b.matmul(a)?, k)?;
    Ok((ab - ba).norm() / ab.norm().max(1.0))
}

/// Least-squares slope of y against x.
pub fn fit_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::EmptyData(format!("need at least two points, got {}", x.len().min(y.len()))));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::EmptyData("abscissae are all equal".into()));
    }
    Ok(sxy / sxx)
}

/// Slope of log|log|det_⌈p⌉(Id − tA)|| against log t over the given t values.
pub fn det_growth_slope(a: &CMatrix, p: f64, ts: &[f64]) -> Result<f64> {
    let k = SchattenIndex::new(p)?.k;
    let mut x = Vec::new();
    let mut y = Vec::new();
    for &t in ts {
        let v = reg_det(&a.scale_real(t), k)?.norm().ln().abs();
        if v > 0.0 && v.is_finite() {
            x.push(t.ln());
            y.push(v.ln());
        }
    }
    fit_slope(&x, &y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn norms_of_diag() {
        let a = CMatrix::from_real(&[&[3.0, 0.0], &[0.0, 4.0]]).unwrap();
        assert!((schatten_norm(&a, 2.0).unwrap() - 5.0).abs() < 1e-14);
        assert!((schatten_norm(&a, f64::INFINITY).unwrap() - 4.0).abs() < 1e-14);
        assert!(schatten_norm(&a, 0.5).is_err());
    }

    #[test]
    fn rank_one_norm_is_top_singular_value() {
        let a = CMatrix::from_fn(3, 3, |i, j| c((i + 1) as f64, 0.0) * c(1.0, (j as f64) - 1.0));
        let s1 = singular_values(&a)[0];
        for p in [1.0, 1.5, 2.0, 7.0] {
            assert!((schatten_norm(&a, p).unwrap() - s1).abs() < 1e-12 * s1);
        }
    }

    #[test]
    fn index_ceiling() {
        assert_eq!(SchattenIndex::new(2.0).unwrap().k, 2);
        assert_eq!(SchattenIndex::new(2.5).unwrap().k, 3);
        assert_eq!(SchattenIndex::new(1.0).unwrap().k, 1);
    }

    #[test]
    fn reg_det_examples() {
        let a = CMatrix::from_real(&[&[0.5, 0.0], &[0.0, 1.0 / 3.0]]).unwrap();
        assert!((reg_det(&a, 1).unwrap() - c(1.0 / 3.0, 0.0)).norm() < 1e-15);
        let nil = CMatrix::from_real(&[&[0.0, 5.0], &[0.0, 0.0]]).unwrap();
        for k in 1..5 {
            assert!((reg_det(&nil, k).unwrap() - c(1.0, 0.0)).norm() < 1e-14);
        }
        let sing = CMatrix::from_real(&[&[1.0, 0.0], &[0.0, 0.2]]).unwrap();
        assert!(reg_det(&sing, 2).unwrap().norm() < 1e-15);
        assert_eq!(reg_det(&CMatrix::zeros(4, 4), 3).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn lu_route_matches_eigenvalue_route() {
        let a = CMatrix::from_fn(5, 5, |i, j| c(((i * 7 + j * 3) % 5) as f64 * 0.05, ((i + 2 * j) % 3) as f64 * 0.04));
        for k in 1..=4 {
            let e = reg_det(&a, k).unwrap();
            let l = log_reg_det_lu(&a, k).unwrap().exp();
            assert!((e - l).norm() < 1e-12 * e.norm().max(1.0), "k={k}: {e} vs {l}");
        }
    }

    #[test]
    fn cyclic_rank_one() {
        // column x row versus the 1x1 product row x column.
        let col = CMatrix::from_fn(3, 1, |i, _| c(0.1 * (i as f64 + 1.0), 0.05));
        let row = CMatrix::from_fn(1, 3, |_, j| c(0.2, -0.1 * j as f64));
        for k in 1..=3 {
            assert!(cyclic_check(&col, &row, k).unwrap() < 1e-13);
        }
        let scalar = row.matmul(&col).unwrap()[(0, 0)];
        let expected = reg_det_from_eigenvalues(&[scalar], 2);
        assert!((reg_det(&col.matmul(&row).unwrap(), 2).unwrap() - expected).norm() < 1e-13);
    }

    #[test]
    fn growth_ratio_zero_matrix() {
        assert_eq!(det_growth_check(&CMatrix::zeros(3, 3), 2.0).unwrap(), 0.0);
    }
}
