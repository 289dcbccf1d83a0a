//! Adaptive Gauss-Kronrod (7/15) integration and Gauss-Legendre panel rules.

use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// 8-point Gauss-Legendre nodes and weights on [−1, 1].
pub const GL8_NODES: [f64; 8] = [
    -0.960_289_856_497_536_3,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329_0,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329_0,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
pub const GL8_WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_3,
    0.222_381_034_453_374_5,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362_0,
    0.362_683_783_378_362_0,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// One 15-point Kronrod panel: (estimate, error estimate).
pub fn gk15(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for i in 0..7 {
        let x = h * XGK[i];
        let s = f(c - x) + f(c + x);
        kron += WGK[i] * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Globally adaptive integration of `f` over consecutive breakpoints.
/// Stops when the summed error estimate is below `rel_tol·|I| + abs_tol`.
pub fn integrate(
    mut f: impl FnMut(f64) -> f64,
    breakpoints: &[f64],
    rel_tol: f64,
    abs_tol: f64,
    max_panels: usize,
) -> Result<f64> {
    if breakpoints.len() < 2 {
        return Err(Error::Quadrature("need at least two breakpoints".into()));
    }
    let mut heap = BinaryHeap::new();
    for w in breakpoints.windows(2) {
        if w[1] > w[0] {
            let (value, err) = gk15(&mut f, w[0], w[1]);
            heap.push(Panel { a: w[0], b: w[1], value, err });
        }
    }
    loop {
        let total: f64 = heap.iter().map(|p| p.value).sum();
        let err: f64 = heap.iter().map(|p| p.err).sum();
        if !total.is_finite() {
            return Err(Error::Quadrature("integrand produced a non-finite value".into()));
        }
        if err <= rel_tol * total.abs() + abs_tol {
            return Ok(total);
        }
        if heap.len() >= max_panels {
            return Err(Error::Quadrature(format!(
                "no convergence with {} panels (estimate {total:e}, error {err:e})",
                heap.len()
            )));
        }
        let worst = heap.pop().expect("nonempty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            return Err(Error::Quadrature("panel width underflow".into()));
        }
        for (a, b) in [(worst.a, mid), (mid, worst.b)] {
            let (value, err) = gk15(&mut f, a, b);
            heap.push(Panel { a, b, value, err });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let v = integrate(|x| x.powi(5) - 3.0 * x * x, &[0.0, 2.0], 1e-14, 0.0, 10).unwrap();
        assert!((v - (64.0 / 6.0 - 8.0)).abs() < 1e-13);
    }

    #[test]
    fn peaked_integrand() {
        // ∫_{-1}^{1} ε/(x²+ε²) = 2 arctan(1/ε)
        let eps = 1e-4;
        let v = integrate(|x| eps / (x * x + eps * eps), &[-1.0, 0.0, 1.0], 1e-12, 0.0, 5000).unwrap();
        assert!((v - 2.0 * (1.0 / eps).atan()).abs() < 1e-10);
    }

    #[test]
    fn gauss_legendre_weights_sum_to_two() {
        let s: f64 = GL8_WEIGHTS.iter().sum();
        assert!((s - 2.0).abs() < 1e-15);
        let x7: f64 = GL8_NODES.iter().zip(&GL8_WEIGHTS).map(|(x, w)| w * x.powi(14)).sum();
        assert!((x7 - 2.0 / 15.0).abs() < 1e-15);
    }
}
