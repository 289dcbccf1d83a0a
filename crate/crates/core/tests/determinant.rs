use std::f64::consts::PI;

use proptest::prelude::*;

use speclab_core::bounds::find_b_star;
use speclab_core::contour::{ContourOptions, Rect};
use speclab_core::detfun::{f_derivative_fd, DetSetup};
use speclab_core::numerics::{eig_dense, operator_norm, singular_values};
use speclab_core::operators::{
    assemble, lp_norm, Basis, FreeOperatorModel, Grid, PotentialField, PotentialGenerator,
};
use speclab_core::schatten::{det_growth_check, schatten_norm};
use speclab_core::Complex64;

/// growth_ratio of the seed-1, amplitude-2 reference potential at b*, on the
/// sample grid below.
const GROWTH_REFERENCE: f64 = 0.0013452564626005763;
/// Largest Γ̂ at p = 2.5 over random contractions (see the numerics tests).
const GAMMA_HAT_2_5: f64 = 0.02111628794951483;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn grid() -> Grid {
    Grid::new(1, 32, 2.0 * PI).unwrap()
}

fn dirac() -> FreeOperatorModel {
    FreeOperatorModel::dirac(grid(), 1.0).unwrap()
}

fn sample_points() -> Vec<Complex64> {
    (0..21)
        .flat_map(|i| [0.5, 1.0, 2.0, -0.7, -1.5].map(|im| c(-5.0 + 0.5 * i as f64, im)))
        .collect()
}

fn reference_potential() -> PotentialField {
    PotentialGenerator::RandomComplex { seed: 1, amp: 2.0 }.generate(grid(), 2).unwrap()
}

#[test]
fn lp_norm_of_constants_and_homogeneity() {
    let g = Grid::new(2, 8, 3.0).unwrap();
    let v = PotentialGenerator::ConstantAntiHermitian { gamma: 0.7 }.generate(g, 2).unwrap();
    for p in [1.0, 2.0, 3.5] {
        let want = 0.7 * 2f64.sqrt() * 9f64.powf(1.0 / p);
        assert!((lp_norm(&v, p).unwrap() - want).abs() <= 1e-12 * want);
    }
    let r = PotentialGenerator::RandomComplex { seed: 2, amp: 1.0 }.generate(g, 2).unwrap();
    let base = lp_norm(&r, 2.5).unwrap();
    assert!((lp_norm(&r.scaled(0.3), 2.5).unwrap() - 0.3 * base).abs() <= 1e-12 * base);
    assert_eq!(lp_norm(&PotentialField::zero(g, 2), 2.0).unwrap(), 0.0);
}

#[test]
fn shift_potential_moves_every_eigenvalue_down() {
    let model = dirac();
    let v = PotentialGenerator::ConstantAntiHermitian { gamma: 0.3 }.generate(grid(), 2).unwrap();
    let (_, _, d) = assemble(&model, &v, Basis::Fourier).unwrap();
    let mut got: Vec<Complex64> = eig_dense(&d).unwrap().eigenvalues;
    let mut want: Vec<Complex64> = model.free_eigenvalues().iter().map(|&e| c(e, -0.3)).collect();
    let key = |z: &Complex64, w: &Complex64| z.re.total_cmp(&w.re);
    got.sort_by(key);
    want.sort_by(key);
    for (a, b) in got.iter().zip(&want) {
        assert!((a - b).norm() <= 1e-10, "{a} vs {b}");
    }
}

#[test]
fn b_star_for_the_shift_matches_the_dense_norm() {
    let model = dirac();
    let v = PotentialGenerator::ConstantAntiHermitian { gamma: 0.3 }.generate(grid(), 2).unwrap();
    let r = find_b_star(&model, &v, 2.0).unwrap();
    // ‖(−ib + D)^{-1}‖ = 1/min_k |±μ_k − i(b + γ)| = 1/√(m² + (b + γ)²)
    let want = 1.0 / (1.0 + (r.b + 0.3) * (r.b + 0.3)).sqrt();
    assert!((r.norm_check - want).abs() <= 1e-9);
}

#[test]
fn f_vanishes_at_ib_and_is_trivial_without_potential() {
    let s = DetSetup::new(dirac(), reference_potential(), 2.0, None).unwrap();
    assert_eq!(s.f_matrix(s.ib()).unwrap().max_abs(), 0.0);
    let free = DetSetup::new(dirac(), PotentialField::zero(grid(), 2), 2.0, Some(1.0)).unwrap();
    for l in [c(0.2, 0.4), c(-3.0, -1.0)] {
        assert_eq!(free.f_matrix(l).unwrap().max_abs(), 0.0);
        assert!((free.f_value(l).unwrap() - 1.0).norm() <= 1e-15);
    }
    let zeros = free.zeros_in_region(&Rect::new(-4.0, 4.0, -2.0, -0.2).unwrap(), &ContourOptions::default()).unwrap();
    assert!(zeros.is_empty());
    assert_eq!(free.growth_ratio(&sample_points()).unwrap(), 0.0);
}

#[test]
fn schatten_norm_of_f_is_submultiplicative() {
    let model = dirac();
    let v = reference_potential();
    let s = DetSetup::new(model.clone(), v.clone(), 2.0, None).unwrap();
    let resolvent_norm = 1.0 / singular_values(&s.perturbed.shift(-s.ib())).last().unwrap();
    for l in [c(0.3, 0.5), c(-2.5, -1.0), c(4.0, 0.2)] {
        let lhs = s.f_schatten(l).unwrap();
        let weighted = speclab_core::bounds::weighted_resolvent(&model, &v, l).unwrap();
        let rhs = (l - s.ib()).norm() * resolvent_norm * schatten_norm(&weighted, 2.0).unwrap();
        assert!(lhs <= rhs * (1.0 + 1e-9), "{l}: {lhs} > {rhs}");
    }
}

#[test]
fn cauchy_riemann_residual_is_small() {
    let s = DetSetup::new(dirac(), reference_potential().scaled(0.5), 2.0, None).unwrap();
    let h = 1e-5;
    for l in [c(0.3, 0.8), c(-1.2, -0.9), c(2.5, 1.4)] {
        let dx = (s.f_value_lu(l + h).unwrap() - s.f_value_lu(l - h).unwrap()) / (2.0 * h);
        let dy = (s.f_value_lu(l + c(0.0, h)).unwrap() - s.f_value_lu(l - c(0.0, h)).unwrap()) / (2.0 * h);
        let scale = s.f_value_lu(l).unwrap().norm().max(1.0);
        assert!((dx - dy / c(0.0, 1.0)).norm() <= 1e-6 * scale, "{l}");
        assert!((dx - f_derivative_fd(&s, l).unwrap()).norm() <= 1e-6 * scale);
    }
}

#[test]
fn f_is_bounded_by_the_fitted_growth_constant() {
    let s = DetSetup::new(dirac(), reference_potential().scaled(0.25), 2.5, None).unwrap();
    for l in sample_points() {
        let ratio = det_growth_check(&s.f_matrix(l).unwrap(), 2.5).unwrap();
        assert!(ratio <= GAMMA_HAT_2_5, "{l}: {ratio}");
    }
}

#[test]
fn growth_ratio_is_pinned_and_stable_under_scaling() {
    let v = reference_potential();
    let pts = sample_points();
    let ratios: Vec<f64> = [0.25, 0.5, 0.75, 1.0]
        .iter()
        .map(|&s| DetSetup::new(dirac(), v.scaled(s), 2.0, None).unwrap().growth_ratio(&pts).unwrap())
        .collect();
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |a, &r| (a.0.min(r), a.1.max(r)));
    assert!(lo > 0.0 && hi <= 2.0 * lo, "{ratios:?}");
    assert!((ratios[3] - GROWTH_REFERENCE).abs() <= 1e-8 * GROWTH_REFERENCE, "{:?}", ratios[3]);
}

#[test]
fn paired_eigenvalues_give_winding_two() {
    let v = PotentialGenerator::ConstantAntiHermitian { gamma: 0.3 }.generate(grid(), 2).unwrap();
    let s = DetSetup::new(dirac(), v, 2.0, None).unwrap();
    let target = c(2f64.sqrt(), -0.3);
    assert!(s.f_value(target).unwrap().norm() <= 1e-6);
    let rect = Rect::new(target.re - 0.1, target.re + 0.1, target.im - 0.1, target.im + 0.1).unwrap();
    let zeros = s.zeros_in_region(&rect, &ContourOptions::default()).unwrap();
    assert_eq!(zeros.len(), 1);
    assert_eq!(zeros[0].1, 2);
    assert!((zeros[0].0 - target).norm() <= 1e-8);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn eigenvalues_stay_within_the_potential_norm(seed in 0u64..1000, amp in 0.05f64..3.0) {
        let model = dirac();
        let v = PotentialGenerator::RandomComplex { seed, amp }.generate(grid(), 2).unwrap();
        let (_, pot, d) = assemble(&model, &v, Basis::Fourier).unwrap();
        let eig = eig_dense(&d).unwrap();
        let free = model.free_eigenvalues();
        let bound = operator_norm(&pot) * (1.0 + 1e-9) + eig.residual + 1e-12;
        for l in eig.eigenvalues {
            let dist = free.iter().map(|&f| (l - f).norm()).fold(f64::INFINITY, f64::min);
            prop_assert!(dist <= bound, "{} > {}", dist, bound);
        }
    }

    #[test]
    fn position_and_fourier_spectra_agree(seed in 0u64..1000) {
        let g = Grid::new(1, 8, 5.0).unwrap();
        let model = FreeOperatorModel::dirac(g, 0.7).unwrap();
        let v = PotentialGenerator::RandomComplex { seed, amp: 0.8 }.generate(g, 2).unwrap();
        let key = |z: &Complex64, w: &Complex64| z.re.total_cmp(&w.re).then(z.im.total_cmp(&w.im));
        let mut a = eig_dense(&assemble(&model, &v, Basis::Fourier).unwrap().2).unwrap().eigenvalues;
        let mut b = eig_dense(&assemble(&model, &v, Basis::Position).unwrap().2).unwrap().eigenvalues;
        a.sort_by(key);
        b.sort_by(key);
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).norm() <= 1e-9);
        }
    }
}
