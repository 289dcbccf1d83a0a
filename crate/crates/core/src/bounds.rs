//! Resolvent L^p integrals, Schatten bounds for V(λ − D_m)^{-1} on the
//! lattice, and the choice of the normalization height b.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{singular_values, CMatrix};
use crate::operators::{
    lp_norm, mul_block_diag_right, potential_dense, resolvent_blocks, Basis, FreeOperatorModel, PotentialField,
};
use crate::quadrature::integrate;
use crate::schatten::{schatten_from_singular_values, schatten_norm};
use crate::spectra::SpectrumModel;

/// Which branch of √(r²+m²) ∓ λ enters the radial integral.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// √(r²+m²) − λ, for Re λ ≥ 0.
    Minus,
    /// √(r²+m²) + λ, for Re λ ≤ 0.
    Plus,
}

impl Side {
    pub fn for_point(lambda: Complex64) -> Self {
        if lambda.re >= 0.0 {
            Side::Minus
        } else {
            Side::Plus
        }
    }

    fn sign(self) -> f64 {
        match self {
            Side::Minus => -1.0,
            Side::Plus => 1.0,
        }
    }
}

/// r^{d−1} / |√(r²+m²) ∓ λ|^p.
pub fn radial_integrand(r: f64, lambda: Complex64, m: f64, d: usize, p: f64, side: Side) -> f64 {
    let q = Complex64::new((r * r + m * m).sqrt(), 0.0) + side.sign() * lambda;
    r.powi(d as i32 - 1) / q.norm().powf(p)
}

/// ∫_0^∞ r^{d−1}/|√(r²+m²) ∓ λ|^p dr to relative accuracy 1e-8 or better.
pub fn resolvent_lp_radial(lambda: Complex64, m: f64, d: usize, p: f64, side: Side) -> Result<f64> {
    if d == 0 {
        return Err(Error::UnsupportedDimension(d));
    }
    if !(p > d as f64) {
        return Err(Error::Divergent(format!("radial integral needs p > d (p = {p}, d = {d})")));
    }
    if !(m >= 0.0) {
        return Err(Error::InvalidParameter(format!("mass must be >= 0, got {m}")));
    }
    if SpectrumModel::dirac(m).distance(lambda) <= 0.0 {
        return Err(Error::OnSpectrum(lambda));
    }
    if (lambda.re > 0.0 && side == Side::Plus) || (lambda.re < 0.0 && side == Side::Minus) {
        return Err(Error::InvalidParameter(format!("side {side:?} does not match Re λ = {}", lambda.re)));
    }
    let big_r = 10.0 * (lambda.norm() + m + 1.0);
    let mut breaks = vec![0.0];
    let re = lambda.re.abs();
    if re > m {
        let r0 = (re * re - m * m).sqrt();
        let w = lambda.im.abs().max(1e-12);
        for b in [r0 - w, r0, r0 + w] {
            if b > 0.0 && b < big_r {
                breaks.push(b);
            }
        }
    }
    breaks.push(big_r);
    let f = |r: f64| radial_integrand(r, lambda, m, d, p, side);
    let head = integrate(f, &breaks, 1e-11, 0.0, 20_000)?;

    // Tail: r = R w^{−γ}, γ = 1/(p−d), maps [R, ∞) onto (0, 1] with a bounded integrand.
    let excess = p - d as f64;
    let gamma = 1.0 / excess;
    let h = |w: f64| {
        let r = big_r * w.powf(-gamma);
        if !r.is_finite() {
            return 1.0;
        }
        let q = Complex64::new((r * r + m * m).sqrt(), 0.0) + side.sign() * lambda;
        (r / q.norm()).powf(p)
    };
    let tail = big_r.powf(-excess) / excess * integrate(h, &[0.0, 1.0], 1e-11, 0.0, 20_000)?;
    Ok(head + tail)
}

/// (1 + |λ∓m|^{d−1}) / d(λ, σ(D_m))^{p−1}; |λ|^{d−1}/d^{p−1} when m = 0.
pub fn det_br_core(lambda: Complex64, m: f64, d: usize, p: f64) -> Result<f64> {
    let dist = SpectrumModel::dirac(m).distance(lambda);
    if dist <= 0.0 {
        return Err(Error::OnSpectrum(lambda));
    }
    let e = d as i32 - 1;
    let num = if m == 0.0 {
        lambda.norm().powi(e)
    } else {
        let near = if lambda.re >= 0.0 { lambda - m } else { lambda + m };
        1.0 + near.norm().powi(e)
    };
    Ok(num / dist.powf(p - 1.0))
}

#[derive(Clone, Copy, Debug)]
pub struct ResolventBoundReport {
    pub lambda: Complex64,
    pub integral_value: f64,
    pub paper_bound_core: f64,
    pub ratio: f64,
}

pub fn resolvent_bound_report(lambda: Complex64, m: f64, d: usize, p: f64) -> Result<ResolventBoundReport> {
    let integral_value = resolvent_lp_radial(lambda, m, d, p, Side::for_point(lambda))?;
    let paper_bound_core = det_br_core(lambda, m, d, p)?;
    Ok(ResolventBoundReport { lambda, integral_value, paper_bound_core, ratio: integral_value / paper_bound_core })
}

/// Largest ratio over a rectangular grid (inclusive corners); the empirical K̂.
pub fn det_br_constant(m: f64, d: usize, p: f64, re: (f64, f64), im: (f64, f64), steps: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for i in 0..steps {
        for j in 0..steps {
            let t = |a: (f64, f64), k: usize| a.0 + (a.1 - a.0) * k as f64 / (steps - 1).max(1) as f64;
            let lam = Complex64::new(t(re, i), t(im, j));
            worst = worst.max(resolvent_bound_report(lam, m, d, p)?.ratio);
        }
    }
    Ok(worst)
}

#[derive(Clone, Copy, Debug)]
pub struct DetRsReport {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

/// V_f · diag((λ − S_k)^{-1}) in the Fourier basis; unitarily equivalent to V(λ − D_m)^{-1}.
pub fn weighted_resolvent(model: &FreeOperatorModel, v: &PotentialField, lambda: Complex64) -> Result<CMatrix> {
    check_pair(model, v)?;
    let vf = potential_dense(v, Basis::Fourier)?;
    Ok(mul_block_diag_right(&vf, &resolvent_blocks(model, lambda)?))
}

fn check_pair(model: &FreeOperatorModel, v: &PotentialField) -> Result<()> {
    if v.grid != model.grid || v.n != model.internal_dim() {
        return Err(Error::DimensionMismatch("potential and operator live on different spaces".into()));
    }
    Ok(())
}

/// Lattice form of the Schatten bound: lhs = ‖V(λ−D_m)^{-1}‖_{S_p}^p against
/// (2π)^{−d} ‖V‖_p^p ‖(λ∓μ)^{-1} Id_n‖_p^p with the frequency measure (2π/L)^d.
pub fn det_rs_check(model: &FreeOperatorModel, v: &PotentialField, lambda: Complex64, p: f64) -> Result<DetRsReport> {
    if !(p > model.grid.d as f64) {
        return Err(Error::InvalidParameter(format!("need p > d, got p = {p}")));
    }
    let a = weighted_resolvent(model, v, lambda)?;
    let lhs = schatten_norm(&a, p)?.powf(p);
    let g = model.grid;
    let sign = if lambda.re >= 0.0 { -1.0 } else { 1.0 };
    let sym: f64 = (0..g.size()).map(|s| (lambda + sign * model.mu(s)).norm().powf(-p)).sum();
    let n = model.internal_dim() as f64;
    let rhs = (2.0 * PI).powi(-(g.d as i32)) * lp_norm(v, p)?.powf(p) * n.powf(p / 2.0) * sym * g.frequency_cell();
    let ratio = if rhs == 0.0 { 0.0 } else { lhs / rhs };
    Ok(DetRsReport { lhs, rhs, ratio })
}

/// Σ_{j,l} ‖V(x_j) R(x_j, x_l)‖_F² with the position kernel
/// R(x_j, x_l) = N^{−d} Σ_k e^{iξ_k·(x_j − x_l)} (λ − S_k)^{-1}.
pub fn hilbert_schmidt_kernel_sum(model: &FreeOperatorModel, v: &PotentialField, lambda: Complex64) -> Result<f64> {
    check_pair(model, v)?;
    let g = model.grid;
    let n = model.internal_dim();
    let npts = g.size();
    let blocks = resolvent_blocks(model, lambda)?;
    let big_n = g.n_points as i64;
    let inv = 1.0 / npts as f64;
    let ks: Vec<Vec<i64>> = (0..npts).map(|s| g.wave_number(s)).collect();
    let kernel: Vec<CMatrix> = (0..npts)
        .map(|diff| {
            let dm = g.multi_index(diff);
            let mut acc = CMatrix::zeros(n, n);
            for (k, b) in ks.iter().zip(&blocks) {
                let dot: i64 = k.iter().zip(&dm).map(|(a, &x)| a * x as i64).sum();
                let phase = Complex64::from_polar(inv, 2.0 * PI * dot.rem_euclid(big_n) as f64 / big_n as f64);
                acc = &acc + &b.scale(phase);
            }
            acc
        })
        .collect();
    let js: Vec<Vec<usize>> = (0..npts).map(|j| g.multi_index(j)).collect();
    let mut total = 0.0;
    for j in 0..npts {
        let vj = v.sample(j);
        for l in 0..npts {
            let diff: Vec<usize> = js[j].iter().zip(&js[l]).map(|(&a, &b)| (a + g.n_points - b) % g.n_points).collect();
            total += (&vj * &kernel[g.flat_index(&diff)]).frobenius_norm().powi(2);
        }
    }
    Ok(total)
}

#[derive(Clone, Copy, Debug)]
pub struct BStar {
    pub b: f64,
    /// ‖V(ib − D_m)^{-1}‖_{S_p} at b.
    pub s_b: f64,
    /// Same at 2b.
    pub s_2b: f64,
    /// ‖(−ib + D)^{-1}‖ from the dense matrix.
    pub norm_check: f64,
    /// 1/(√(b²+m²)(1 − s_b)), the bound that certifies norm_check ≤ 1.
    pub certified_bound: f64,
}

pub const B_START: f64 = 0.5;
pub const B_CAP: f64 = 1e9;

/// Smallest b in {B_START·2^j} with s(b) < 1 and 1/(√(b²+m²)(1 − s(b))) ≤ 1.
pub fn find_b_star(model: &FreeOperatorModel, v: &PotentialField, p: f64) -> Result<BStar> {
    if !(p > model.grid.d as f64) {
        return Err(Error::InvalidParameter(format!("need p > d, got p = {p}")));
    }
    check_pair(model, v)?;
    let vf = potential_dense(v, Basis::Fourier)?;
    let s_at = |b: f64| -> Result<f64> {
        let blocks = resolvent_blocks(model, Complex64::new(0.0, b))?;
        Ok(schatten_from_singular_values(&singular_values(&mul_block_diag_right(&vf, &blocks)), p))
    };
    let m = model.m;
    let mut b = B_START;
    while b <= B_CAP {
        let s_b = s_at(b)?;
        let certified_bound = if s_b < 1.0 { 1.0 / ((b * b + m * m).sqrt() * (1.0 - s_b)) } else { f64::INFINITY };
        if certified_bound <= 1.0 {
            let free = crate::operators::free_dense(model, Basis::Fourier)?;
            let shifted = (&free + &vf).shift(Complex64::new(0.0, -b));
            let smin = singular_values(&shifted).last().copied().unwrap_or(0.0);
            let norm_check = if smin > 0.0 { 1.0 / smin } else { f64::INFINITY };
            return Ok(BStar { b, s_b, s_2b: s_at(2.0 * b)?, norm_check, certified_bound });
        }
        b *= 2.0;
    }
    Err(Error::SearchExhausted(format!("no admissible b up to {B_CAP:e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{Grid, PotentialGenerator};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn arctan_case() {
        let v = resolvent_lp_radial(c(0.0, 1.0), 0.0, 1, 2.0, Side::Minus).unwrap();
        assert!((v - PI / 2.0).abs() < 1e-10);
    }

    #[test]
    fn divergence_and_side_errors() {
        assert!(matches!(resolvent_lp_radial(c(0.0, 1.0), 1.0, 2, 2.0, Side::Minus), Err(Error::Divergent(_))));
        assert!(resolvent_lp_radial(c(1.0, 1.0), 1.0, 1, 2.0, Side::Plus).is_err());
        assert!(matches!(resolvent_lp_radial(c(2.0, 0.0), 1.0, 1, 2.0, Side::Minus), Err(Error::OnSpectrum(_))));
    }

    #[test]
    fn conjugation_symmetry() {
        for lam in [c(0.3, 0.8), c(2.5, 0.1), c(-1.7, 0.4)] {
            let s = Side::for_point(lam);
            let a = resolvent_lp_radial(lam, 1.0, 2, 3.0, s).unwrap();
            let b = resolvent_lp_radial(lam.conj(), 1.0, 2, 3.0, s).unwrap();
            assert!((a - b).abs() < 1e-12 * a);
        }
    }

    #[test]
    fn core_example() {
        assert!((det_br_core(c(0.0, 2.0), 1.0, 1, 2.0).unwrap() - 2.0 / 5f64.sqrt()).abs() < 1e-15);
        assert!(det_br_core(c(1.5, 0.0), 1.0, 1, 2.0).is_err());
    }

    #[test]
    fn zero_potential_gives_zero_lhs() {
        let g = Grid::new(1, 8, 5.0).unwrap();
        let model = FreeOperatorModel::dirac(g, 1.0).unwrap();
        let r = det_rs_check(&model, &PotentialField::zero(g, 2), c(0.0, 2.0), 2.0).unwrap();
        assert_eq!((r.lhs, r.ratio), (0.0, 0.0));
    }

    #[test]
    fn b_star_for_zero_potential() {
        let g = Grid::new(1, 8, 5.0).unwrap();
        let model = FreeOperatorModel::dirac(g, 0.5).unwrap();
        let r = find_b_star(&model, &PotentialField::zero(g, 2), 2.0).unwrap();
        assert!(r.b * r.b + 0.25 >= 1.0);
        assert!((r.norm_check - 1.0 / (r.b * r.b + 0.25).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn b_star_gamma_shift_closed_form() {
        let g = Grid::new(1, 16, 6.0).unwrap();
        let model = FreeOperatorModel::dirac(g, 1.0).unwrap();
        let gamma = 0.4;
        let v = PotentialGenerator::ConstantAntiHermitian { gamma }.generate(g, 2).unwrap();
        let r = find_b_star(&model, &v, 2.0).unwrap();
        let closed = 1.0 / (1.0 + (r.b + gamma).powi(2)).sqrt();
        assert!((r.norm_check - closed).abs() < 1e-9);
        assert!(r.norm_check <= 1.0 && r.s_2b < r.s_b);
    }
}
