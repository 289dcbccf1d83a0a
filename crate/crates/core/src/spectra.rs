//! Essential spectra of the free operators and exact distances to them.

use num_complex::Complex64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpectrumKind {
    /// (−∞, −m] ∪ [m, ∞); the whole line when m = 0.
    Dirac,
    /// [m, ∞).
    KleinGordon,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectrumModel {
    pub kind: SpectrumKind,
    pub m: f64,
}

impl SpectrumModel {
    pub fn dirac(m: f64) -> Self {
        Self { kind: SpectrumKind::Dirac, m }
    }

    pub fn klein_gordon(m: f64) -> Self {
        Self { kind: SpectrumKind::KleinGordon, m }
    }

    pub fn distance(&self, lambda: Complex64) -> f64 {
        distance(lambda, self)
    }

    pub fn in_resolvent(&self, lambda: Complex64) -> bool {
        in_resolvent(lambda, self)
    }
}

pub fn distance(lambda: Complex64, model: &SpectrumModel) -> f64 {
    let m = model.m;
    let mc = Complex64::new(m, 0.0);
    match model.kind {
        SpectrumKind::Dirac => {
            if lambda.re.abs() >= m {
                lambda.im.abs()
            } else {
                (lambda - mc).norm().min((lambda + mc).norm())
            }
        }
        SpectrumKind::KleinGordon => {
            if lambda.re >= m {
                lambda.im.abs()
            } else {
                (lambda - mc).norm()
            }
        }
    }
}

pub fn in_resolvent(lambda: Complex64, model: &SpectrumModel) -> bool {
    distance(lambda, model) > 0.0
}
