//! Eigenvalue weights of the Lieb–Thirring type bounds, their sums, the
//! classification of accumulation regimes and the scaling-law fit.

use std::fmt;
use std::str::FromStr;

use crate::numerics::eig_dense;
use crate::operators::{assemble, default_margin, discrete_spectrum, Basis, FreeOperatorModel, PotentialField};
use crate::schatten::fit_slope;
use crate::spectra::{SpectrumKind, SpectrumModel};
use crate::{Complex64, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum WeightId {
    Eq01,
    Eq02,
    Eq03,
    Eq030,
    Eq040,
    KGbyH,
    Eq011,
    Eq021,
}

impl WeightId {
    pub const ALL: [WeightId; 8] = [
        WeightId::Eq01,
        WeightId::Eq02,
        WeightId::Eq03,
        WeightId::Eq030,
        WeightId::Eq040,
        WeightId::KGbyH,
        WeightId::Eq011,
        WeightId::Eq021,
    ];

    pub fn name(self) -> &'static str {
        match self {
            WeightId::Eq01 => "Eq01",
            WeightId::Eq02 => "Eq02",
            WeightId::Eq03 => "Eq03",
            WeightId::Eq030 => "Eq030",
            WeightId::Eq040 => "Eq040",
            WeightId::KGbyH => "KGbyH",
            WeightId::Eq011 => "Eq011",
            WeightId::Eq021 => "Eq021",
        }
    }

    /// Operator family whose spectrum the weight is measured against.
    pub fn kind(self) -> SpectrumKind {
        match self {
            WeightId::Eq030 | WeightId::Eq040 | WeightId::KGbyH => SpectrumKind::KleinGordon,
            _ => SpectrumKind::Dirac,
        }
    }
}

impl fmt::Display for WeightId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for WeightId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        WeightId::ALL
            .into_iter()
            .find(|w| w.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown weight id {s:?}")))
    }
}

/// Default τ = min{p − d, 1}/4.
pub fn default_tau(p: f64, d: usize) -> f64 {
    (p - d as f64).min(1.0) / 4.0
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TheoremWeight {
    pub id: WeightId,
    pub m: f64,
    pub p: f64,
    pub tau: f64,
    pub d: usize,
}

impl TheoremWeight {
    pub fn new(id: WeightId, m: f64, p: f64, tau: f64, d: usize) -> Result<Self> {
        if !(1..=3).contains(&d) {
            return Err(Error::UnsupportedDimension(d));
        }
        let df = d as f64;
        if !(p > df && p.is_finite()) {
            return Err(Error::InvalidParameter(format!("need p > d, got p={p}, d={d}")));
        }
        if !(m >= 0.0 && m.is_finite()) {
            return Err(Error::InvalidParameter(format!("mass must be >= 0, got {m}")));
        }
        match id {
            WeightId::Eq01 | WeightId::Eq02 | WeightId::Eq030 | WeightId::Eq011 | WeightId::Eq021 if m == 0.0 => {
                return Err(Error::InvalidParameter(format!("{id} needs m > 0")));
            }
            WeightId::Eq03 | WeightId::Eq040 if m != 0.0 => {
                return Err(Error::InvalidParameter(format!("{id} is the m = 0 weight")));
            }
            _ => {}
        }
        if matches!(id, WeightId::Eq02 | WeightId::Eq021) && !(d == 1 && p < 2.0) {
            return Err(Error::InvalidParameter(format!("{id} applies to d = 1, 1 < p < 2")));
        }
        match id {
            WeightId::KGbyH => {}
            WeightId::Eq030 | WeightId::Eq040 => {
                if !(tau > 0.0 && tau.is_finite()) {
                    return Err(Error::InvalidParameter(format!("need tau > 0, got {tau}")));
                }
            }
            _ => {
                let cap = (p - df).min(1.0);
                if !(tau > 0.0 && tau < cap) {
                    return Err(Error::InvalidParameter(format!("need 0 < tau < {cap}, got {tau}")));
                }
            }
        }
        Ok(Self { id, m, p, tau, d })
    }

    pub fn with_default_tau(id: WeightId, m: f64, p: f64, d: usize) -> Result<Self> {
        Self::new(id, m, p, default_tau(p, d), d)
    }

    pub fn model(&self) -> SpectrumModel {
        SpectrumModel { kind: self.id.kind(), m: self.m }
    }

    /// Weight of one eigenvalue. Points on the essential spectrum are rejected
    /// (the weight extends by 0 there).
    pub fn weight(&self, l: Complex64) -> Result<f64> {
        if !(l.re.is_finite() && l.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let dist = self.model().distance(l);
        if dist <= 0.0 {
            return Err(Error::OnSpectrum(l));
        }
        let (m, p, t, d) = (self.m, self.p, self.tau, self.d as f64);
        let a = l.norm();
        let lm = (l - m).norm();
        let lp = (l + m).norm();
        let em = lm.min(lp);
        let w = match self.id {
            WeightId::Eq01 => dist.powf(p + t) / (lm * lp * (1.0 + a).powf(2.0 * p - 2.0 + 2.0 * t)),
            WeightId::Eq02 => dist.powf(p + t) / ((lm * lp).powf((p + t) / 2.0) * (1.0 + a).powf(p + t)),
            WeightId::Eq03 => dist.powf(p + t) / (1.0 + a).powf(2.0 * (p + t)),
            WeightId::Eq030 => dist.powf(p + t) / (lm * (1.0 + a).powf(p + (p / 2.0).max(d) + 2.0 * t - 1.0)),
            WeightId::Eq040 => {
                dist.powf(p + t)
                    / (a.powf(((p + t) / 2.0).min(d)) * (1.0 + a).powf(p / 2.0 + p.max(2.0 * d) - d + 2.0 * t))
            }
            WeightId::KGbyH => dist.powf(p) / (1.0 + a).powf(2.0 * p),
            WeightId::Eq011 => em.powf(p - 1.0 + t),
            WeightId::Eq021 => em.powf((p + t) / 2.0),
        };
        Ok(w)
    }
}

/// Σ mult · weight(λ).
pub fn lt_sum(eigs: &[(Complex64, usize)], w: &TheoremWeight) -> Result<f64> {
    eigs.iter().try_fold(0.0, |acc, &(l, k)| Ok(acc + k as f64 * w.weight(l)?))
}

/// Bracket of Eq011/Eq01 on the real gap (−m, m): the ratio equals
/// max(|λ−m|, |λ+m|)·(1+|λ|)^{2p−2+2τ} there.
pub fn eq011_bracket(m: f64, p: f64, tau: f64) -> (f64, f64) {
    (m, 2.0 * m * (1.0 + m).powf(2.0 * p - 2.0 + 2.0 * tau))
}

/// Slope cap on |Re(λ_n ∓ m)| / Im λ_n for the approach to ±m.
pub const REGIME_SLOPE: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    /// λ_n → ±m non-tangentially.
    Threshold,
    /// λ_n → ∞ with bounded imaginary part.
    Infinity,
    /// λ_n → x₀ with |x₀| > m.
    Interior,
}

impl Regime {
    pub fn number(self) -> u8 {
        match self {
            Regime::Threshold => 1,
            Regime::Infinity => 2,
            Regime::Interior => 3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegimeReport {
    pub regime: Regime,
    /// Exponent of the sum that the bound makes convergent.
    pub exponent: f64,
    /// That sum over the given sequence.
    pub sum: f64,
    /// Limit point (±m, or x₀); infinite for regime 2.
    pub limit: f64,
}

/// Classifies the tail of a sequence in the upper half-plane. The tail is the
/// second half of the sequence.
pub fn regime_classify(seq: &[Complex64], m: f64, p: f64, tau: f64) -> Result<RegimeReport> {
    if seq.len() < 4 {
        return Err(Error::EmptyData("regime classification needs at least 4 terms".into()));
    }
    let model = SpectrumModel::dirac(m);
    for &l in seq {
        if !(l.im > 0.0) || !l.re.is_finite() || !l.im.is_finite() {
            return Err(Error::InvalidParameter(format!("{l} is not in the open upper half-plane")));
        }
        if !model.in_resolvent(l) {
            return Err(Error::OnSpectrum(l));
        }
    }
    let tail = &seq[seq.len() / 2..];
    let first = seq[0];
    let last = *seq.last().unwrap();
    let im_max_head = seq[..seq.len() / 2].iter().map(|l| l.im).fold(0.0, f64::max);
    let im_max_tail = tail.iter().map(|l| l.im).fold(0.0, f64::max);
    let im_max = im_max_head.max(im_max_tail);

    if last.norm() >= 10.0 * first.norm().max(1.0) && im_max_tail <= 2.0 * im_max_head {
        let e = 2.0 * (p + tau);
        let sum = seq.iter().map(|l| l.im.powf(p + tau) / l.norm().powf(e)).sum();
        return Ok(RegimeReport { regime: Regime::Infinity, exponent: p + tau, sum, limit: f64::INFINITY });
    }
    if last.im <= 0.1 * im_max {
        let x0 = last.re;
        let edge = if x0 >= 0.0 { m } else { -m };
        let non_tangential = tail.iter().all(|l| (l.re - edge).abs() <= REGIME_SLOPE * l.im);
        if non_tangential && (last - edge).norm() <= 0.1 * (first - edge).norm() {
            let sum = seq.iter().map(|l| (l - edge).norm().powf(p - 1.0 + tau)).sum();
            return Ok(RegimeReport { regime: Regime::Threshold, exponent: p - 1.0 + tau, sum, limit: edge });
        }
        if x0.abs() > m {
            let sum = seq.iter().map(|l| l.im.powf(p + tau)).sum();
            return Ok(RegimeReport { regime: Regime::Interior, exponent: p + tau, sum, limit: x0 });
        }
    }
    Err(Error::NoRegime(format!("tail ends at {last} without a recognised limit")))
}

/// Scaling experiment result: the points kept and the fitted slope.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalingFit {
    pub slope: f64,
    /// (s, lt_sum) pairs with a nonempty discrete spectrum.
    pub points: Vec<(f64, f64)>,
    /// s values dropped for an empty discrete spectrum.
    pub dropped: Vec<f64>,
}

/// Discrete spectrum of D_m + V in the Fourier basis with the default margin.
pub fn discrete_eigenvalues(model: &FreeOperatorModel, v: &PotentialField) -> Result<Vec<(Complex64, usize)>> {
    let (_, _, d) = assemble(model, v, Basis::Fourier)?;
    let residual = eig_dense(&d)?.residual;
    discrete_spectrum(&d, &model.spectrum_model(), default_margin(residual))
}

/// Least-squares slope of log lt_sum(σ_d(D_m + sV)) against log s.
pub fn scaling_exponent(
    model: &FreeOperatorModel,
    v: &PotentialField,
    w: &TheoremWeight,
    s_values: &[f64],
) -> Result<ScalingFit> {
    if w.model() != model.spectrum_model() {
        return Err(Error::InvalidParameter(format!("weight {} does not match the operator", w.id)));
    }
    let mut points = Vec::new();
    let mut dropped = Vec::new();
    for &s in s_values {
        if !(s > 0.0 && s <= 1.0) {
            return Err(Error::InvalidParameter(format!("s must lie in (0, 1], got {s}")));
        }
        let eigs = discrete_eigenvalues(model, &v.scaled(s))?;
        let sum = lt_sum(&eigs, w)?;
        if eigs.is_empty() || sum <= 0.0 {
            dropped.push(s);
        } else {
            points.push((s, sum));
        }
    }
    if points.len() < 2 {
        return Err(Error::EmptyData(format!("{} of {} scales had a discrete spectrum", points.len(), s_values.len())));
    }
    let (x, y): (Vec<f64>, Vec<f64>) = points.iter().map(|&(s, v)| (s.ln(), v.ln())).unzip();
    Ok(ScalingFit { slope: fit_slope(&x, &y)?, points, dropped })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn eq01_worked_value() {
        let w = TheoremWeight::new(WeightId::Eq01, 1.0, 2.0, 0.5, 1).unwrap();
        let got = w.weight(c(0.0, 2.0)).unwrap();
        assert!((got - 5f64.powf(1.25) / 135.0).abs() < 1e-14);
    }

    #[test]
    fn parameter_domains() {
        assert!(TheoremWeight::new(WeightId::Eq01, 1.0, 2.0, 1.0, 1).is_err());
        assert!(TheoremWeight::new(WeightId::Eq02, 1.0, 2.5, 0.1, 1).is_err());
        assert!(TheoremWeight::new(WeightId::Eq03, 1.0, 2.0, 0.1, 1).is_err());
        assert!(TheoremWeight::new(WeightId::Eq01, 1.0, 1.0, 0.1, 1).is_err());
        assert!(TheoremWeight::new(WeightId::KGbyH, 0.0, 2.0, 0.0, 1).is_ok());
        assert!(TheoremWeight::new(WeightId::Eq040, 0.0, 2.0, 3.0, 1).is_ok());
    }

    #[test]
    fn on_spectrum_rejected() {
        let w = TheoremWeight::with_default_tau(WeightId::KGbyH, 1.0, 2.0, 1).unwrap();
        assert!(matches!(w.weight(c(2.0, 0.0)), Err(Error::OnSpectrum(_))));
        assert!(w.weight(c(-2.0, 0.0)).unwrap() > 0.0);
    }

    #[test]
    fn parse_ids() {
        for id in WeightId::ALL {
            assert_eq!(id.name().parse::<WeightId>().unwrap(), id);
        }
        assert!("eq99".parse::<WeightId>().is_err());
    }

    #[test]
    fn regimes_of_model_sequences() {
        let m = 1.0;
        let s1: Vec<_> = (1..=200).map(|n| c(m, 1.0 / n as f64)).collect();
        assert_eq!(regime_classify(&s1, m, 2.0, 0.25).unwrap().regime, Regime::Threshold);
        let s2: Vec<_> = (1..=200).map(|n| c(n as f64, 1.0)).collect();
        assert_eq!(regime_classify(&s2, m, 2.0, 0.25).unwrap().regime, Regime::Infinity);
        let s3: Vec<_> = (1..=200).map(|n| c(2.0 * m, 1.0 / n as f64)).collect();
        let r3 = regime_classify(&s3, m, 2.0, 0.25).unwrap();
        assert_eq!(r3.regime, Regime::Interior);
        assert!(r3.exponent > 1.0);
        let gap: Vec<_> = (1..=200).map(|n| c(0.3, 1.0 / n as f64)).collect();
        assert!(matches!(regime_classify(&gap, m, 2.0, 0.25), Err(Error::NoRegime(_))));
    }
}
