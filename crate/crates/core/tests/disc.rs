use std::f64::consts::PI;

use proptest::prelude::*;

use speclab_core::bgk::{check, fit_envelope, synth_blaschke, zero_sum, DiscFunction};
use speclab_core::conformal::{koebe_bracket, psi, CayleyMap, DiracDiscMap};
use speclab_core::spectra::SpectrumModel;
use speclab_core::Complex64;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn polar_samples(rho: f64) -> impl Iterator<Item = Complex64> {
    (1..=20).flat_map(move |i| (0..90).map(move |j| Complex64::from_polar(rho * i as f64 / 20.0, 2.0 * PI * j as f64 / 90.0)))
}

#[test]
fn blaschke_modulus_is_bounded_by_the_normalization() {
    let zeros = [(c(0.5, 0.2), 1), (c(-0.3, 0.6), 2), (c(0.1, -0.8), 1)];
    let h = synth_blaschke(&zeros).unwrap();
    let bound: f64 = zeros.iter().map(|&(a, k)| a.norm().powi(-(k as i32))).product();
    for z in polar_samples(0.999) {
        assert!(h.eval(z).norm() <= bound * (1.0 + 1e-12));
    }
    for &(a, _) in &zeros {
        assert!(h.eval(a).norm() <= 1e-14);
    }
}

#[test]
fn single_factor_envelope_bound() {
    let a = c(0.6, 0.0);
    let h = synth_blaschke(&[(a, 1)]).unwrap();
    let pairs = [(c(1.0, 0.0), 1.0)];
    let k = fit_envelope(&h, 1.0, &pairs, 0.999).unwrap();
    // (1 − |z|)|z − 1| ≤ 2 on the disc, so K̂ ≤ 2 log(1/|a|).
    assert!(k > 0.0 && k <= 2.0 * (1.0 / a.norm()).ln(), "{k}");
}

#[test]
fn boundary_singularity_has_finite_envelope() {
    // ρ stays at 0.99 so that c/(1 − ρ) does not overflow exp.
    for cc in [0.5, 2.0, 5.0] {
        let h = DiscFunction::new(move |z| (cc / (1.0 - z) - cc).exp(), Some(vec![])).unwrap();
        let k = fit_envelope(&h, 1.0, &[(c(1.0, 0.0), 1.0)], 0.99).unwrap();
        // log|h| = c(Re 1/(1−z) − 1) and (1−|z|)|1−z| Re 1/(1−z) ≤ 2.
        assert!(k.is_finite() && k > 0.1 * cc && k <= 2.0 * cc, "c={cc}: {k}");
        assert_eq!(check(&h, 1.0, &[(c(1.0, 0.0), 1.0)], 0.1, 0.99).unwrap().zero_sum, 0.0);
    }
}

#[test]
fn comparator_spread_over_a_lambda_grid() {
    let map = DiracDiscMap::new(1.0, 1.0).unwrap();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for i in 0..200 {
        for j in 0..200 {
            let l = c(-4.0 + 8.0 * (i as f64 + 0.5) / 200.0, -4.0 + 8.0 * (j as f64 + 0.5) / 200.0);
            let u = map.to_disc(l).unwrap();
            let r = map.cm2_comparator(l).unwrap() / (1.0 - u.norm());
            lo = lo.min(r);
            hi = hi.max(r);
        }
    }
    assert!(lo > 0.0 && hi / lo <= 50.0, "[{lo}, {hi}]");
    let at_center = map.cm2_comparator(c(0.0, 1.0)).unwrap();
    assert!(at_center.is_finite() && at_center > 0.0);
}

#[test]
fn disc_comparator_tracks_the_distance() {
    let map = DiracDiscMap::new(1.0, 2.0).unwrap();
    let model = SpectrumModel::dirac(1.0);
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for u in polar_samples(0.99).filter(|u| u.norm() > 0.0) {
        let r = map.cm1_comparator(u).unwrap() / model.distance(map.from_disc(u).unwrap());
        lo = lo.min(r);
        hi = hi.max(r);
    }
    assert!(lo > 0.0 && hi.is_finite(), "[{lo}, {hi}]");
    assert!(hi / lo <= 1e3, "[{lo}, {hi}]");
}

#[test]
fn massless_distortion_is_two_sided() {
    let map = CayleyMap::new(1.0).unwrap();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for u in polar_samples(0.99) {
        let r = map.distortion_ratio(u).unwrap();
        lo = lo.min(r);
        hi = hi.max(r);
    }
    assert!(lo > 0.0 && hi / lo <= 2.0 + 1e-12, "[{lo}, {hi}]");
}

fn zero_list() -> impl Strategy<Value = Vec<(Complex64, usize)>> {
    prop::collection::vec((0.05f64..0.95, -PI..PI, 1usize..4), 1..8)
        .prop_map(|v| v.into_iter().map(|(r, t, k)| (Complex64::from_polar(r, t), k)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn zero_sum_grows_with_zeros_and_shrinks_outward(
        zeros in zero_list(),
        extra in (0.05f64..0.95, -PI..PI),
        alpha in 0.0f64..2.0,
        tau in 0.01f64..1.0,
        t in 0.0f64..1.0,
    ) {
        let pairs = [(c(1.0, 0.0), 1.5), (c(-1.0, 0.0), 0.5)];
        let base = zero_sum(&zeros, alpha, tau, &pairs).unwrap();
        let mut more = zeros.clone();
        more.push((Complex64::from_polar(extra.0, extra.1), 1));
        prop_assert!(zero_sum(&more, alpha, tau, &pairs).unwrap() >= base);

        // Without pairs each term is (1 − |z|)^{α+1+τ}: moving a zero outward shrinks it.
        let (z, k) = zeros[0];
        let outward = Complex64::from_polar(z.norm() + t * (1.0 - z.norm()) * 0.99, z.arg());
        let a = zero_sum(&[(z, k)], alpha, tau, &[]).unwrap();
        let b = zero_sum(&[(outward, k)], alpha, tau, &[]).unwrap();
        prop_assert!(b <= a * (1.0 + 1e-15));
    }

    #[test]
    fn argument_principle_counts_blaschke_zeros(zeros in zero_list()) {
        let h = synth_blaschke(&zeros).unwrap();
        let total: usize = zeros.iter().map(|z| z.1).sum();
        prop_assert_eq!(h.count_zeros(c(0.0, 0.0), 0.975).unwrap(), total as i64);
        prop_assert!((h.eval(c(0.0, 0.0)) - 1.0).norm() <= 1e-12);
    }

    #[test]
    fn disc_round_trip(re in -10.0f64..10.0, e in -6.0f64..1.0, upper: bool, m in 0.3f64..3.0, b in 0.2f64..5.0) {
        let l = c(re, if upper { 10f64.powf(e) } else { -(10f64.powf(e)) });
        let map = DiracDiscMap::new(m, b).unwrap();
        let u = map.to_disc(l).unwrap();
        prop_assert!(u.norm() < 1.0);
        let back = map.from_disc(u).unwrap();
        prop_assert!((back - l).norm() <= 1e-9 * (1.0 + l.norm()));
    }

    #[test]
    fn koebe_bracket_contains_the_distance(r in 0.0f64..0.999999, t in -PI..PI, m in 0.3f64..3.0) {
        let z3 = Complex64::from_polar(r, t);
        prop_assume!((1.0 + z3 * z3).norm() > 1e-9);
        let (lo, hi) = koebe_bracket(z3, m).unwrap();
        let d = SpectrumModel::dirac(m).distance(psi(z3, m));
        prop_assert!(lo <= d && d <= hi);
        prop_assert!((hi / lo - 4.0).abs() <= 1e-12);
    }
}
