//! Zero sums of holomorphic functions on the unit disc against a growth
//! envelope log|h(z)| ≤ K (1−|z|)^{−α} Π |z−ζ_j|^{−β_j}.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::quadrature::integrate;
use crate::{Complex64, Error, Result};

/// Tolerance on |ζ_j| = 1 and on h(0) = 1.
pub const UNIT_TOL: f64 = 1e-12;
/// Floor on K̂ in ratios.
pub const RATIO_FLOOR: f64 = 1e-12;
/// Radial sampling depth: radii 1 − 2^{−k}, k = 1..=RADIAL_LEVELS.
pub const RADIAL_LEVELS: u32 = 12;
/// Angular samples per radius in `fit_envelope`.
pub const ANGULAR_SAMPLES: usize = 720;

#[derive(Clone, Debug, PartialEq)]
pub struct GrowthEnvelope {
    pub k: f64,
    pub alpha: f64,
    pub pairs: Vec<(Complex64, f64)>,
}

impl GrowthEnvelope {
    pub fn new(k: f64, alpha: f64, pairs: Vec<(Complex64, f64)>) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::InvalidParameter(format!("K must be positive, got {k}")));
        }
        check_exponents(alpha, &pairs)?;
        Ok(Self { k, alpha, pairs })
    }

    /// Right-hand side K (1−|z|)^{−α} Π |z−ζ_j|^{−β_j}.
    pub fn bound(&self, z: Complex64) -> f64 {
        self.k / envelope_factor(z, self.alpha, &self.pairs)
    }
}

fn check_exponents(alpha: f64, pairs: &[(Complex64, f64)]) -> Result<()> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter(format!("alpha must be >= 0, got {alpha}")));
    }
    for &(zeta, beta) in pairs {
        if (zeta.norm() - 1.0).abs() > UNIT_TOL {
            return Err(Error::InvalidParameter(format!("{zeta} is not on the unit circle")));
        }
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(Error::InvalidParameter(format!("beta must be >= 0, got {beta}")));
        }
    }
    Ok(())
}

/// (1−|z|)^α Π |z−ζ_j|^{β_j}.
fn envelope_factor(z: Complex64, alpha: f64, pairs: &[(Complex64, f64)]) -> f64 {
    pairs.iter().fold((1.0 - z.norm()).powf(alpha), |acc, &(zeta, beta)| acc * (z - zeta).norm().powf(beta))
}

type Evaluator = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;

/// Holomorphic function on the disc with h(0) = 1.
#[derive(Clone)]
pub struct DiscFunction {
    evaluator: Evaluator,
    log_derivative: Option<Evaluator>,
    pub known_zeros: Option<Vec<(Complex64, usize)>>,
}

impl fmt::Debug for DiscFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DiscFunction").field("known_zeros", &self.known_zeros).finish_non_exhaustive()
    }
}

impl DiscFunction {
    pub fn new<F>(evaluator: F, known_zeros: Option<Vec<(Complex64, usize)>>) -> Result<Self>
    where
        F: Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    {
        let h0 = evaluator(Complex64::new(0.0, 0.0));
        if !((h0 - 1.0).norm() <= UNIT_TOL) {
            return Err(Error::InvalidParameter(format!("h(0) = {h0}, expected 1")));
        }
        if let Some(zs) = &known_zeros {
            for &(z, _) in zs {
                if !(z.norm() < 1.0) {
                    return Err(Error::OutsideDisc(z));
                }
            }
        }
        Ok(Self { evaluator: Arc::new(evaluator), log_derivative: None, known_zeros })
    }

    /// Attaches h'/h, used by `count_zeros` in place of phase tracking.
    pub fn with_log_derivative<G>(mut self, g: G) -> Self
    where
        G: Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    {
        self.log_derivative = Some(Arc::new(g));
        self
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        (self.evaluator)(z)
    }

    pub fn log_derivative(&self, z: Complex64) -> Option<Complex64> {
        self.log_derivative.as_ref().map(|g| g(z))
    }

    /// Zeros (with multiplicity) inside |z − c| < r by the argument principle.
    pub fn count_zeros(&self, center: Complex64, radius: f64) -> Result<i64> {
        match &self.log_derivative {
            Some(g) => winding_by_log_derivative(|z| g(z), center, radius),
            None => winding_on_circle(|z| self.eval(z), center, radius),
        }
    }
}

/// Σ mult·(1−|z|)^{α+1+τ} Π_j |z−ζ_j|^{(β_j−1+τ)_+}.
pub fn zero_sum(zeros: &[(Complex64, usize)], alpha: f64, tau: f64, pairs: &[(Complex64, f64)]) -> Result<f64> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::InvalidParameter(format!("tau must be positive, got {tau}")));
    }
    check_exponents(alpha, pairs)?;
    let mut sum = 0.0;
    for &(z, mult) in zeros {
        if !(z.norm() < 1.0) {
            return Err(Error::OutsideDisc(z));
        }
        let term = pairs.iter().fold((1.0 - z.norm()).powf(alpha + 1.0 + tau), |acc, &(zeta, beta)| {
            acc * (z - zeta).norm().powf((beta - 1.0 + tau).max(0.0))
        });
        sum += mult as f64 * term;
    }
    Ok(sum)
}

/// Sample radii 1 − 2^{−k} below `rho_max`, plus `rho_max` itself.
pub fn sample_radii(rho_max: f64) -> Vec<f64> {
    let mut radii: Vec<f64> = (1..=RADIAL_LEVELS).map(|k| 1.0 - 0.5f64.powi(k as i32)).filter(|&r| r < rho_max).collect();
    radii.push(rho_max);
    radii
}

/// K̂ = sup log|h(z)|·(1−|z|)^α Π|z−ζ_j|^{β_j} over the sample grid, clipped at 0.
pub fn fit_envelope(h: &DiscFunction, alpha: f64, pairs: &[(Complex64, f64)], rho_max: f64) -> Result<f64> {
    if !(rho_max > 0.0 && rho_max < 1.0) {
        return Err(Error::InvalidParameter(format!("rho_max must lie in (0, 1), got {rho_max}")));
    }
    check_exponents(alpha, pairs)?;
    let mut best: f64 = 0.0;
    for r in sample_radii(rho_max) {
        // Angles through the marked boundary points are always included.
        let marked = pairs.iter().map(|(zeta, _)| zeta.arg());
        let uniform = (0..ANGULAR_SAMPLES).map(|i| 2.0 * PI * i as f64 / ANGULAR_SAMPLES as f64);
        for theta in uniform.chain(marked) {
            let z = Complex64::from_polar(r, theta);
            let v = h.eval(z);
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::NonFinite);
            }
            if v.norm() == 0.0 {
                continue;
            }
            best = best.max(v.norm().ln() * envelope_factor(z, alpha, pairs));
        }
    }
    Ok(best)
}

/// Finite Blaschke product with the given zeros, divided by its value at 0.
pub fn synth_blaschke(zeros: &[(Complex64, usize)]) -> Result<DiscFunction> {
    for &(a, _) in zeros {
        if a.norm() == 0.0 {
            return Err(Error::InvalidParameter("a zero at the origin cannot be normalized".into()));
        }
        if !(a.norm() < 1.0) {
            return Err(Error::OutsideDisc(a));
        }
    }
    let data: Vec<(Complex64, i32)> = zeros.iter().map(|&(a, k)| (a, k as i32)).collect();
    let ld_data = data.clone();
    let h = DiscFunction::new(
        move |z| data.iter().fold(Complex64::new(1.0, 0.0), |acc, &(a, k)| acc * ((a - z) / ((1.0 - a.conj() * z) * a)).powi(k)),
        Some(zeros.to_vec()),
    )?;
    // d/dz log((a−z)/(1−āz)) = 1/(z−a) + ā/(1−āz)
    Ok(h.with_log_derivative(move |z| {
        ld_data.iter().map(|&(a, k)| k as f64 * (1.0 / (z - a) + a.conj() / (1.0 - a.conj() * z))).sum()
    }))
}

/// Result of `check`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CheckReport {
    pub zero_sum: f64,
    pub k_hat: f64,
    pub ratio: f64,
}

/// zero_sum / max(K̂, 1e-12) for a function with known zeros.
pub fn check(h: &DiscFunction, alpha: f64, pairs: &[(Complex64, f64)], tau: f64, rho_max: f64) -> Result<CheckReport> {
    let zeros = h
        .known_zeros
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("check needs the zeros of h".into()))?;
    let s = zero_sum(zeros, alpha, tau, pairs)?;
    let k_hat = fit_envelope(h, alpha, pairs, rho_max)?;
    Ok(CheckReport { zero_sum: s, k_hat, ratio: s / k_hat.max(RATIO_FLOOR) })
}

/// Winding number (1/2πi)∮ h'/h dz over |z − c| = r, by adaptive quadrature
/// of the real part (the imaginary part integrates to 0 on a closed loop).
pub fn winding_by_log_derivative<G: Fn(Complex64) -> Complex64>(g: G, center: Complex64, radius: f64) -> Result<i64> {
    const PIECES: usize = 64;
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidParameter(format!("radius must be positive, got {radius}")));
    }
    let integrand = |t: f64| {
        let e = Complex64::from_polar(radius, t);
        (g(center + e) * e).re / (2.0 * PI)
    };
    let breaks: Vec<f64> = (0..=PIECES).map(|i| 2.0 * PI * i as f64 / PIECES as f64).collect();
    let n = integrate(integrand, &breaks, 0.0, 1e-8, 200_000)?;
    if (n - n.round()).abs() > 1e-4 {
        return Err(Error::NonIntegerWinding(n));
    }
    Ok(n.round() as i64)
}

/// Winding number of h around the circle |z − c| = r, by phase tracking with
/// adaptive arc refinement. Turns completed between two samples that agree at
/// the midpoint go unseen; prefer `winding_by_log_derivative` when h'/h is known.
pub fn winding_on_circle<F: Fn(Complex64) -> Complex64>(h: F, center: Complex64, radius: f64) -> Result<i64> {
    const START: usize = 64;
    const MAX_STEP: f64 = PI / 4.0;
    const MAX_DEPTH: u32 = 40;
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidParameter(format!("radius must be positive, got {radius}")));
    }
    let at = |t: f64| -> Result<Complex64> {
        let v = h(center + Complex64::from_polar(radius, t));
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        if v.norm() == 0.0 {
            return Err(Error::ContourThroughZero(0.0));
        }
        Ok(v)
    };
    fn arc<G: Fn(f64) -> Result<Complex64>>(
        at: &G,
        t0: f64,
        v0: Complex64,
        t1: f64,
        v1: Complex64,
        depth: u32,
    ) -> Result<f64> {
        let step = (v1 / v0).arg();
        let tm = 0.5 * (t0 + t1);
        let vm = at(tm)?;
        let halves = (vm / v0).arg() + (v1 / vm).arg();
        // Accept when the step is small and the midpoint agrees with it.
        if step.abs() <= MAX_STEP && (halves - step).abs() <= 1e-9 {
            return Ok(step);
        }
        if depth >= MAX_DEPTH {
            return Err(Error::ContourThroughZero(v0.norm().min(v1.norm())));
        }
        Ok(arc(at, t0, v0, tm, vm, depth + 1)? + arc(at, tm, vm, t1, v1, depth + 1)?)
    }
    let ts: Vec<f64> = (0..=START).map(|i| 2.0 * PI * i as f64 / START as f64).collect();
    let vs: Vec<Complex64> = ts.iter().map(|&t| at(t)).collect::<Result<_>>()?;
    let mut total = 0.0;
    for i in 0..START {
        total += arc(&at, ts[i], vs[i], ts[i + 1], vs[i + 1], 0)?;
    }
    let n = total / (2.0 * PI);
    if (n - n.round()).abs() > 1e-6 {
        return Err(Error::NonIntegerWinding(n));
    }
    Ok(n.round() as i64)
}
