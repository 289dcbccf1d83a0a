//! Conformal maps between the resolvent set of the free Dirac operator and
//! the unit disc, plus the massless Cayley variant.
//!
//! Chain for m > 0: z1 = (λ−m)/(λ+m), z2 = √z1 with Im z2 > 0,
//! z3 = (z2−i)/(z2+i), u = (z3−z_b)/(1−conj(z_b) z3). The inverse of the
//! first three maps is ψ(z3) = −2m z3/(1+z3²).

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectra::SpectrumModel;

const I: Complex64 = Complex64::new(0.0, 1.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn default_height(m: f64) -> f64 {
    2.0 * m.max(1.0)
}

fn check_disc(u: Complex64) -> Result<()> {
    if !(u.norm() < 1.0) {
        return Err(Error::OutsideDisc(u));
    }
    Ok(())
}

/// z3 = (z2 − i)/(z2 + i) after z1, z2.
pub fn chain_z3(lambda: Complex64, m: f64) -> Complex64 {
    let z1 = (lambda - m) / (lambda + m);
    let z2 = I * (-z1).sqrt();
    (z2 - I) / (z2 + I)
}

pub fn psi(z3: Complex64, m: f64) -> Complex64 {
    -2.0 * m * z3 / (ONE + z3 * z3)
}

/// ψ'(z3).
pub fn psi_derivative(z3: Complex64, m: f64) -> Complex64 {
    let q = ONE + z3 * z3;
    -2.0 * m * (ONE - z3 * z3) / (q * q)
}

#[derive(Clone, Copy, Debug)]
pub struct DiracDiscMap {
    pub m: f64,
    pub b: f64,
    /// Rotation of the normalization; always 0.
    pub theta: f64,
    pub z_b: Complex64,
    /// Boundary image of λ = +m (z3 = −1).
    pub u_plus: Complex64,
    /// Boundary image of λ = −m (z3 = 1).
    pub u_minus: Complex64,
    /// Boundary image of z3 = i (λ = ∞).
    pub u_i: Complex64,
    /// Boundary image of z3 = −i (λ = ∞).
    pub u_mi: Complex64,
}

impl DiracDiscMap {
    pub fn new(m: f64, b: f64) -> Result<Self> {
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::InvalidParameter(format!("mass must be positive, got {m}")));
        }
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::InvalidParameter(format!("height b must be positive, got {b}")));
        }
        let z_b = -I * b / (Complex64::new(m, b).norm() + m);
        let mut map = Self { m, b, theta: 0.0, z_b, u_plus: ONE, u_minus: ONE, u_i: ONE, u_mi: ONE };
        map.u_plus = map.normalize(-ONE);
        map.u_minus = map.normalize(ONE);
        map.u_i = map.normalize(I);
        map.u_mi = map.normalize(-I);
        Ok(map)
    }

    pub fn with_default_height(m: f64) -> Result<Self> {
        Self::new(m, default_height(m))
    }

    pub fn model(&self) -> SpectrumModel {
        SpectrumModel::dirac(self.m)
    }

    /// z3 ↦ u.
    pub fn normalize(&self, z3: Complex64) -> Complex64 {
        (z3 - self.z_b) / (ONE - self.z_b.conj() * z3)
    }

    /// u ↦ z3.
    pub fn denormalize(&self, u: Complex64) -> Complex64 {
        (u + self.z_b) / (ONE + u * self.z_b.conj())
    }

    pub fn to_z3(&self, lambda: Complex64) -> Result<Complex64> {
        if !self.model().in_resolvent(lambda) {
            return Err(Error::OnSpectrum(lambda));
        }
        Ok(chain_z3(lambda, self.m))
    }

    pub fn to_disc(&self, lambda: Complex64) -> Result<Complex64> {
        Ok(self.normalize(self.to_z3(lambda)?))
    }

    pub fn from_disc(&self, u: Complex64) -> Result<Complex64> {
        check_disc(u)?;
        Ok(psi(self.denormalize(u), self.m))
    }

    /// dλ/du of `from_disc`.
    pub fn from_disc_derivative(&self, u: Complex64) -> Result<Complex64> {
        check_disc(u)?;
        let q = ONE + u * self.z_b.conj();
        let dz3 = (1.0 - self.z_b.norm_sqr()) / (q * q);
        Ok(psi_derivative(self.denormalize(u), self.m) * dz3)
    }

    /// d(λ, σ) / ((|λ+m||λ−m|)^{1/2} (1+|λ|)), comparable to 1 − |u|.
    pub fn cm2_comparator(&self, lambda: Complex64) -> Result<f64> {
        let model = self.model();
        let dist = model.distance(lambda);
        if dist <= 0.0 {
            return Err(Error::OnSpectrum(lambda));
        }
        let m = self.m;
        let prod = ((lambda + m).norm() * (lambda - m).norm()).sqrt();
        Ok(dist / (prod * (1.0 + lambda.norm())))
    }

    /// |u−u₊||u−u₋| / (|u−u(i)|²|u−u(−i)|²) · (1−|u|), comparable to d(λ, σ).
    pub fn cm1_comparator(&self, u: Complex64) -> Result<f64> {
        check_disc(u)?;
        let num = (u - self.u_plus).norm() * (u - self.u_minus).norm();
        let den = (u - self.u_i).norm_sqr() * (u - self.u_mi).norm_sqr();
        Ok(num / den * (1.0 - u.norm()))
    }
}

/// Two-sided Koebe bound on d(ψ(z3), σ(D_m)): returns (lower, upper) with upper = 4·lower.
pub fn koebe_bracket(z3: Complex64, m: f64) -> Result<(f64, f64)> {
    check_disc(z3)?;
    let q = (ONE + z3 * z3).norm();
    if q == 0.0 {
        return Err(Error::InvalidParameter(format!("z3 = {z3} is a pole of ψ")));
    }
    let r = z3.norm();
    let core = (ONE - z3 * z3).norm() / (q * q) * (1.0 + r) * (1.0 - r);
    Ok((0.5 * m * core, 2.0 * m * core))
}

/// Massless variant: u = (λ−ib)/(λ+ib) on the upper half-plane.
#[derive(Clone, Copy, Debug)]
pub struct CayleyMap {
    pub b: f64,
}

impl CayleyMap {
    pub fn new(b: f64) -> Result<Self> {
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::InvalidParameter(format!("height b must be positive, got {b}")));
        }
        Ok(Self { b })
    }

    /// Requires Im λ > 0; see [`CayleyMap::to_disc_either`] for the lower half-plane.
    pub fn to_disc(&self, lambda: Complex64) -> Result<Complex64> {
        if lambda.im <= 0.0 {
            return Err(if lambda.im == 0.0 {
                Error::OnSpectrum(lambda)
            } else {
                Error::InvalidParameter(format!("{lambda} is in the lower half-plane"))
            });
        }
        let ib = I * self.b;
        Ok((lambda - ib) / (lambda + ib))
    }

    pub fn from_disc(&self, u: Complex64) -> Result<Complex64> {
        check_disc(u)?;
        Ok(I * self.b * (ONE + u) / (ONE - u))
    }

    /// Lower half-plane handled by conjugation; the flag records it.
    pub fn to_disc_either(&self, lambda: Complex64) -> Result<(Complex64, bool)> {
        let lower = lambda.im < 0.0;
        let u = self.to_disc(if lower { lambda.conj() } else { lambda })?;
        Ok((u, lower))
    }

    pub fn from_disc_either(&self, u: Complex64, lower: bool) -> Result<Complex64> {
        let z = self.from_disc(u)?;
        Ok(if lower { z.conj() } else { z })
    }

    /// d(λ, ℝ) / ((1−|u|)/|u−1|²); equals b(1+|u|) exactly.
    pub fn distortion_ratio(&self, u: Complex64) -> Result<f64> {
        let lambda = self.from_disc(u)?;
        Ok(lambda.im.abs() * (u - ONE).norm_sqr() / (1.0 - u.norm()))
    }
}
