//! Perturbation determinant f(λ) = det_k(Id − F(λ)) with
//! F(λ) = (λ − ib)(−ib + D)^{-1} V (λ − D_m)^{-1}, assembled in the Fourier basis.

use num_complex::Complex64;

use crate::bounds::find_b_star;
use crate::conformal::DiracDiscMap;
use crate::contour::{find_zeros, ContourOptions, Rect};
use crate::error::{Error, Result};
use crate::numerics::{inverse, CMatrix, Lu};
use crate::operators::{
    assemble, lp_norm, mul_block_diag_right, resolvent_blocks, Basis, FreeOperatorModel, OperatorKind, PotentialField,
};
use crate::schatten::{log_reg_det_lu, reg_det, schatten_norm, SchattenIndex};
use crate::spectra::SpectrumModel;

#[derive(Clone, Debug)]
pub struct DetSetup {
    pub model: FreeOperatorModel,
    pub potential: PotentialField,
    pub free: CMatrix,
    pub pot: CMatrix,
    pub perturbed: CMatrix,
    pub b: f64,
    pub p: f64,
    pub k: usize,
    /// (−ib + D)^{-1} V.
    left: CMatrix,
}

impl DetSetup {
    /// `b = None` selects the height with [`find_b_star`].
    pub fn new(model: FreeOperatorModel, potential: PotentialField, p: f64, b: Option<f64>) -> Result<Self> {
        let d = model.grid.d as f64;
        if !(p > d) {
            return Err(Error::InvalidParameter(format!("need p > d, got p = {p}, d = {d}")));
        }
        let k = SchattenIndex::new(p)?.k;
        let b = match b {
            Some(b) if b > 0.0 && b.is_finite() => b,
            Some(b) => return Err(Error::InvalidParameter(format!("height b must be positive, got {b}"))),
            None => find_b_star(&model, &potential, p)?.b,
        };
        let (free, pot, perturbed) = assemble(&model, &potential, Basis::Fourier)?;
        let shifted = perturbed.shift(Complex64::new(0.0, -b));
        let resolvent = inverse(&shifted)?;
        let left = &resolvent * &pot;
        Ok(Self { model, potential, free, pot, perturbed, b, p, k, left })
    }

    pub fn ib(&self) -> Complex64 {
        Complex64::new(0.0, self.b)
    }

    pub fn spectrum_model(&self) -> SpectrumModel {
        self.model.spectrum_model()
    }

    fn parts(&self, lambda: Complex64) -> Result<(CMatrix, Vec<CMatrix>)> {
        let blocks = resolvent_blocks(&self.model, lambda)?;
        let f = mul_block_diag_right(&self.left, &blocks).scale(lambda - self.ib());
        Ok((f, blocks))
    }

    pub fn f_matrix(&self, lambda: Complex64) -> Result<CMatrix> {
        Ok(self.parts(lambda)?.0)
    }

    /// det_k(Id − F(λ)) from the eigenvalues of F(λ).
    pub fn f_value(&self, lambda: Complex64) -> Result<Complex64> {
        reg_det(&self.f_matrix(lambda)?, self.k)
    }

    /// Same value through LU and traces; no eigensolve.
    pub fn f_value_lu(&self, lambda: Complex64) -> Result<Complex64> {
        match log_reg_det_lu(&self.f_matrix(lambda)?, self.k) {
            Ok(l) => Ok(l.exp()),
            Err(Error::Singular { .. }) => Ok(Complex64::new(0.0, 0.0)),
            Err(e) => Err(e),
        }
    }

    /// (log f)'(λ) = tr W − tr((Id − F)^{-1} W) + Σ_{j=1}^{k−1} tr(F^j W), where
    /// W = (λ − ib)^{-1} Id − diag((λ − S_k)^{-1}) satisfies F' = F W.
    pub fn log_derivative(&self, lambda: Complex64) -> Result<Complex64> {
        let (f, blocks) = self.parts(lambda)?;
        let n = self.model.internal_dim();
        let dim = f.rows();
        let inv_shift = 1.0 / (lambda - self.ib());
        let w: Vec<CMatrix> = blocks.iter().map(|g| g.scale_real(-1.0).shift(inv_shift)).collect();
        // tr(X W) for block-diagonal W reads only the diagonal blocks of X.
        let trace_with_w = |x: &CMatrix| -> Complex64 {
            let mut acc = Complex64::new(0.0, 0.0);
            for (s, ws) in w.iter().enumerate() {
                for a in 0..n {
                    for c in 0..n {
                        acc += x[(s * n + a, s * n + c)] * ws[(c, a)];
                    }
                }
            }
            acc
        };
        let tr_w: Complex64 = w.iter().map(|b| b.trace()).sum();
        let id_minus_f = &CMatrix::identity(dim) - &f;
        let inv = Lu::new(&id_minus_f)?.inverse()?;
        let mut total = tr_w - trace_with_w(&inv);
        let mut pow = f.clone();
        for j in 1..self.k {
            if j > 1 {
                pow = &pow * &f;
            }
            total += trace_with_w(&pow);
        }
        Ok(total)
    }

    /// Zeros of f in `rect` with multiplicities.
    pub fn zeros_in_region(&self, rect: &Rect, opts: &ContourOptions) -> Result<Vec<(Complex64, usize)>> {
        check_window(rect, &self.spectrum_model())?;
        let h = |z: Complex64| self.log_derivative(z);
        find_zeros(&h, rect, opts)
    }

    /// Disc map with φ(0) = ib, so g = f∘φ has g(0) = 1.
    pub fn disc_map(&self) -> Result<DiracDiscMap> {
        match self.model.kind {
            OperatorKind::Dirac(_) => DiracDiscMap::new(self.model.m, self.b),
            OperatorKind::KleinGordon(_) => {
                Err(Error::InvalidParameter("the disc map is defined for the Dirac model".into()))
            }
        }
    }

    /// g'/g(u) = (f'/f)(φ(u))·φ'(u).
    pub fn disc_log_derivative(&self, map: &DiracDiscMap, u: Complex64) -> Result<Complex64> {
        Ok(self.log_derivative(map.from_disc(u)?)? * map.from_disc_derivative(u)?)
    }

    /// Zeros of g = f∘φ in the polar box r ∈ [r0, r1], arg u ∈ [θ0, θ1], searched
    /// in w = log u. Returns (u, multiplicity).
    pub fn zeros_in_disc_sector(
        &self,
        map: &DiracDiscMap,
        sector: &Rect,
        opts: &ContourOptions,
    ) -> Result<Vec<(Complex64, usize)>> {
        if !(sector.re1 < 0.0) {
            return Err(Error::InvalidParameter(format!("sector {sector:?} reaches the unit circle (need log r < 0)")));
        }
        if sector.im1 - sector.im0 > 2.0 * std::f64::consts::PI {
            return Err(Error::InvalidParameter("sector spans more than one turn".into()));
        }
        let h = |w: Complex64| {
            let u = w.exp();
            Ok(self.disc_log_derivative(map, u)? * u)
        };
        Ok(find_zeros(&h, sector, opts)?.into_iter().map(|(w, k)| (w.exp(), k)).collect())
    }

    /// sup over the points of log|f(λ)| d(λ,σ)^{p−1} / (‖V‖_p^p (1+|λ|)^{p+d−1}).
    pub fn growth_ratio(&self, points: &[Complex64]) -> Result<f64> {
        let norm = lp_norm(&self.potential, self.p)?.powf(self.p);
        if norm == 0.0 {
            return Ok(0.0);
        }
        let model = self.spectrum_model();
        let d = self.model.grid.d as f64;
        let mut worst = f64::NEG_INFINITY;
        for &l in points {
            let dist = model.distance(l);
            if dist <= 0.0 {
                return Err(Error::OnSpectrum(l));
            }
            let log_f = self.f_value_lu(l)?.norm().ln();
            let r = log_f * dist.powf(self.p - 1.0) / (norm * (1.0 + l.norm()).powf(self.p + d - 1.0));
            worst = worst.max(r);
        }
        Ok(worst)
    }

    /// ‖F(λ)‖_{S_p}.
    pub fn f_schatten(&self, lambda: Complex64) -> Result<f64> {
        schatten_norm(&self.f_matrix(lambda)?, self.p)
    }
}

/// Rejects windows that meet the essential spectrum.
pub fn check_window(rect: &Rect, model: &SpectrumModel) -> Result<()> {
    if rect.im0 <= 0.0 && rect.im1 >= 0.0 {
        let meets = match model.kind {
            crate::spectra::SpectrumKind::Dirac => rect.re1 >= model.m || rect.re0 <= -model.m,
            crate::spectra::SpectrumKind::KleinGordon => rect.re1 >= model.m,
        };
        if meets {
            return Err(Error::InvalidParameter(format!("window {rect:?} meets the essential spectrum")));
        }
    }
    Ok(())
}

/// Moves each edge of `rect` by at most `slack` (absolute) to maximize its
/// distance from `points`, so the contour stays clear of known zeros.
pub fn nudge_window(rect: &Rect, points: &[Complex64], slack: f64) -> Result<Rect> {
    const STEPS: usize = 40;
    let clearance = |horizontal: bool, at: f64, lo: f64, hi: f64| -> f64 {
        points
            .iter()
            .map(|z| {
                let (along, across) = if horizontal { (z.re, z.im) } else { (z.im, z.re) };
                let off = if along < lo { lo - along } else if along > hi { along - hi } else { 0.0 };
                off.hypot(across - at)
            })
            .fold(f64::INFINITY, f64::min)
    };
    let best = |horizontal: bool, base: f64, lo: f64, hi: f64| -> f64 {
        (0..=STEPS)
            .map(|i| base - slack + 2.0 * slack * i as f64 / STEPS as f64)
            .map(|x| (x, clearance(horizontal, x, lo - slack, hi + slack)))
            .fold((base, f64::NEG_INFINITY), |acc, c| if c.1 > acc.1 { c } else { acc })
            .0
    };
    let re0 = best(false, rect.re0, rect.im0, rect.im1);
    let re1 = best(false, rect.re1, rect.im0, rect.im1);
    let im0 = best(true, rect.im0, rect.re0, rect.re1);
    let im1 = best(true, rect.im1, rect.re0, rect.re1);
    Rect::new(re0, re1, im0, im1)
}

/// Central-difference derivative of f with one Richardson step, h = 1e-5(1+|λ|).
pub fn f_derivative_fd(setup: &DetSetup, lambda: Complex64) -> Result<Complex64> {
    let h = 1e-5 * (1.0 + lambda.norm());
    let cd = |h: f64| -> Result<Complex64> {
        Ok((setup.f_value_lu(lambda + h)? - setup.f_value_lu(lambda - h)?) / (2.0 * h))
    };
    let d1 = cd(h)?;
    let d2 = cd(0.5 * h)?;
    Ok((4.0 * d2 - d1) / 3.0)
}
