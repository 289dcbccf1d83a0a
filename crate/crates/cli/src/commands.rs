use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use speclab_core::bgk::{check, synth_blaschke};
use speclab_core::bounds::{det_rs_check, find_b_star, resolvent_bound_report};
use speclab_core::clifford::{anticommutation_residual, build_clifford};
use speclab_core::conformal::{default_height, koebe_bracket, psi, CayleyMap, DiracDiscMap};
use speclab_core::contour::ContourOptions;
use speclab_core::detfun::{nudge_window, DetSetup};
use speclab_core::ltsum::{eq011_bracket, lt_sum, TheoremWeight, WeightId};
use speclab_core::numerics::{eig_dense, operator_norm, CMatrix};
use speclab_core::operators::{
    assemble, default_margin, discrete_spectrum, Basis, FreeOperatorModel, Grid, PotentialField,
};
use speclab_core::schatten::fit_slope;
use speclab_core::spectra::{SpectrumKind, SpectrumModel};

use crate::config::{ExperimentConfig, PotentialSource};
use crate::potential;
use crate::report::{num, re_im, Report, Table};

#[derive(Debug)]
pub enum Failure {
    /// Bad input: exit 2.
    Config(String),
    /// A numerical kernel failed: exit 1.
    Numerical(String),
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "configuration error: {m}"),
            Failure::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

type Run = Result<Report, Failure>;

fn numerical<E: std::fmt::Display>(context: &str) -> impl Fn(E) -> Failure + '_ {
    move |e| Failure::Numerical(format!("{context}: {e}"))
}

fn config<E: std::fmt::Display>(context: &str) -> impl Fn(E) -> Failure + '_ {
    move |e| Failure::Config(format!("{context}: {e}"))
}

pub struct Context<'a> {
    pub cfg: &'a ExperimentConfig,
    /// Directory that relative potential paths resolve against.
    pub base: &'a Path,
    pub threads: usize,
}

impl Context<'_> {
    fn model(&self) -> Result<FreeOperatorModel, Failure> {
        let c = self.cfg;
        let grid = Grid::new(c.d, c.n_points, c.length).map_err(config("operator"))?;
        match c.kind {
            SpectrumKind::Dirac => FreeOperatorModel::dirac(grid, c.m),
            SpectrumKind::KleinGordon => FreeOperatorModel::klein_gordon(grid, c.m, c.l),
        }
        .map_err(config("operator"))
    }

    fn potential(&self, model: &FreeOperatorModel) -> Result<PotentialField, Failure> {
        let n = model.internal_dim();
        let grid = model.grid;
        match &self.cfg.potential {
            PotentialSource::Zero => Ok(PotentialField::zero(grid, n)),
            PotentialSource::Generator(g) => g.generate(grid, n).map_err(config("potential generator")),
            PotentialSource::File(path) => {
                let path = self.base.join(path);
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| Failure::Config(format!("potential file {}: {e}", path.display())))?;
                let v = potential::from_text(&text)
                    .map_err(|e| Failure::Config(format!("potential file {}: {e}", path.display())))?;
                if v.grid != grid || v.n != n {
                    return Err(Failure::Config(format!(
                        "potential file {} has d={} N={} L={} n={}, operator needs d={} N={} L={} n={n}",
                        path.display(),
                        v.grid.d,
                        v.grid.n_points,
                        v.grid.length,
                        v.n,
                        grid.d,
                        grid.n_points,
                        grid.length
                    )));
                }
                Ok(v)
            }
        }
    }

    fn weights(&self) -> Result<Vec<TheoremWeight>, Failure> {
        let c = self.cfg;
        c.weights
            .iter()
            .map(|&id| TheoremWeight::new(id, c.m, c.p, c.tau_for(), c.d).map_err(config("theorem.weights")))
            .collect()
    }
}

/// Discrete spectrum with the default margin, plus the full eigenvalue list
/// and the eigensolver residual.
struct Spectrum {
    discrete: Vec<(Complex64, usize)>,
    all: Vec<Complex64>,
    residual: f64,
    pot_norm: f64,
}

fn spectrum_of(model: &FreeOperatorModel, v: &PotentialField) -> Result<Spectrum, Failure> {
    let (_, pot, d) = assemble(model, v, Basis::Fourier).map_err(numerical("assembly"))?;
    let eig = eig_dense(&d).map_err(numerical("eigensolver"))?;
    let discrete =
        discrete_spectrum(&d, &model.spectrum_model(), default_margin(eig.residual)).map_err(numerical("discrete spectrum"))?;
    Ok(Spectrum { discrete, all: eig.eigenvalues, residual: eig.residual, pot_norm: operator_norm(&pot) })
}

fn spectrum_table(name: &str, eigs: &[(Complex64, usize)], model: &SpectrumModel, weights: &[TheoremWeight]) -> Result<Table, Failure> {
    let mut header = vec!["re", "im", "multiplicity", "distance"];
    let names: Vec<String> = weights.iter().map(|w| format!("w_{}", w.id)).collect();
    header.extend(names.iter().map(String::as_str));
    let mut t = Table::new(name, &header);
    for &(l, k) in eigs {
        let mut row: Vec<String> = re_im(l).into();
        row.push(k.to_string());
        row.push(num(model.distance(l)));
        for w in weights {
            row.push(num(w.weight(l).map_err(numerical("weight"))?));
        }
        t.push(row);
    }
    Ok(t)
}

/// Greedy nearest matching; worst distance, or None if the sizes differ.
pub fn match_multisets(found: &[(Complex64, usize)], expected: &[Complex64]) -> Option<f64> {
    let mut pool: Vec<Complex64> = found.iter().flat_map(|&(z, k)| std::iter::repeat(z).take(k)).collect();
    if pool.len() != expected.len() {
        return None;
    }
    let mut worst: f64 = 0.0;
    for &ev in expected {
        let (i, d) = pool
            .iter()
            .enumerate()
            .map(|(i, z)| (i, (z - ev).norm()))
            .fold((usize::MAX, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
        worst = worst.max(d);
        pool.swap_remove(i);
    }
    Some(worst)
}

pub fn clifford_check(_: &Context) -> Run {
    let mut r = Report::new();
    let mut t = Table::new("clifford", &["d", "n", "residual", "hermitian_defect", "trace", "square_defect"]);
    let mut ok = true;
    for d in 1..=3 {
        let rep = build_clifford(d).map_err(numerical("clifford"))?;
        let res = anticommutation_residual(&rep).map_err(numerical("clifford"))?.abs();
        let id = CMatrix::identity(rep.n);
        let (mut herm, mut tr, mut sq) = (0.0f64, 0.0f64, 0.0f64);
        for g in rep.generators() {
            herm = herm.max(g.hermitian_defect());
            tr = tr.max(g.trace().norm());
            let s = g.matmul(g).and_then(|s| s.try_sub(&id)).map_err(numerical("clifford"))?;
            sq = sq.max(s.max_abs());
        }
        ok &= res <= 1e-13 && herm <= 1e-15 && tr <= 1e-15 && sq <= 1e-15;
        t.push(vec![d.to_string(), rep.n.to_string(), num(res), num(herm), num(tr), num(sq)]);
    }
    r.tables.push(t);
    r.check("clifford_relations", ok);
    Ok(r)
}

pub fn spectrum(ctx: &Context) -> Run {
    let model = ctx.model()?;
    let v = ctx.potential(&model)?;
    let weights = ctx.weights()?;
    let s = spectrum_of(&model, &v)?;
    let free = model.free_eigenvalues();
    // Every eigenvalue lies within ‖V‖ of the Hermitian free spectrum.
    let slack = s.pot_norm + 1e-9 * (1.0 + s.pot_norm) + s.residual;
    let worst = s
        .all
        .iter()
        .map(|l| free.iter().map(|&f| (l - f).norm()).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max);
    let mut r = Report::new();
    r.tables.push(spectrum_table("spectrum", &s.discrete, &model.spectrum_model(), &weights)?);
    r.files.push(("potential.txt".into(), potential::to_text(&v)));
    r.note("dimension", s.all.len());
    r.note("discrete_count", s.discrete.iter().map(|e| e.1).sum::<usize>());
    r.note("eigen_residual", num(s.residual));
    r.note("potential_norm", num(s.pot_norm));
    r.note("max_distance_to_free", num(worst));
    r.check("perturbation_containment", worst <= slack);
    Ok(r)
}

pub fn lt_sum_cmd(ctx: &Context) -> Run {
    let model = ctx.model()?;
    let v = ctx.potential(&model)?;
    let weights = ctx.weights()?;
    let s = spectrum_of(&model, &v)?;
    let mut r = Report::new();
    let mut t = Table::new("lt_sum", &["weight", "p", "tau", "eigenvalues", "sum"]);
    for w in &weights {
        let sum = lt_sum(&s.discrete, w).map_err(numerical("lt_sum"))?;
        let count: usize = s.discrete.iter().map(|e| e.1).sum();
        t.push(vec![w.id.to_string(), num(w.p), num(w.tau), count.to_string(), num(sum)]);
        r.note(&format!("sum_{}", w.id), num(sum));
    }
    r.tables.push(t);
    r.tables.push(spectrum_table("spectrum", &s.discrete, &model.spectrum_model(), &weights)?);
    r.files.push(("potential.txt".into(), potential::to_text(&v)));

    // Self-adjoint Dirac case: the Eq011/Eq01 ratio is bracketed on the gap.
    let c = ctx.cfg;
    if c.kind == SpectrumKind::Dirac && c.m > 0.0 && v.is_hermitian(1e-14) && !s.discrete.is_empty() {
        let tau = c.tau_for();
        let w01 = TheoremWeight::new(WeightId::Eq01, c.m, c.p, tau, c.d).map_err(config("theorem"))?;
        let w011 = TheoremWeight::new(WeightId::Eq011, c.m, c.p, tau, c.d).map_err(config("theorem"))?;
        let (lo, hi) = eq011_bracket(c.m, c.p, tau);
        let mut ok = true;
        for &(l, _) in &s.discrete {
            let q = w011.weight(l).map_err(numerical("weight"))? / w01.weight(l).map_err(numerical("weight"))?;
            ok &= lo * (1.0 - 1e-9) <= q && q <= hi * (1.0 + 1e-9);
        }
        r.note("eq011_bracket", format!("[{}, {}]", num(lo), num(hi)));
        r.check("eq011_bracket_holds", ok);
    }
    Ok(r)
}

pub fn conformal_check(ctx: &Context) -> Run {
    let c = ctx.cfg;
    if c.kind != SpectrumKind::Dirac {
        return Err(Failure::Config("conformal-check needs operator.kind = dirac".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
    let mut r = Report::new();
    let mut t = Table::new("conformal", &["check", "samples", "worst", "violations"]);
    let sample = |rng: &mut ChaCha8Rng| {
        let mag = 10f64.powf(rng.gen_range(-6.0..1.0));
        let im = if rng.gen_bool(0.5) { mag } else { -mag };
        let re = rng.gen_range(-10.0..10.0) * c.m.max(1.0);
        if c.m > 0.0 && rng.gen_bool(0.1) {
            Complex64::new(rng.gen_range(-0.999..0.999) * c.m, 0.0)
        } else {
            Complex64::new(re, im)
        }
    };
    let mut worst: f64 = 0.0;
    let mut bad = 0usize;
    if c.m > 0.0 {
        let map = DiracDiscMap::new(c.m, c.b.unwrap_or_else(|| default_height(c.m))).map_err(config("conformal map"))?;
        for _ in 0..c.samples {
            let l = sample(&mut rng);
            let back = map.to_disc(l).and_then(|u| map.from_disc(u)).map_err(numerical("round trip"))?;
            let e = (back - l).norm() / (1.0 + l.norm());
            worst = worst.max(e);
            bad += usize::from(!(e <= 1e-9));
        }
        t.push(vec!["round_trip".into(), c.samples.to_string(), num(worst), bad.to_string()]);
        r.check("round_trip", bad == 0);

        let mut closest = f64::INFINITY;
        let mut koebe_bad = 0usize;
        let mut n = 0;
        while n < c.samples {
            let rad = 1.0 - 10f64.powf(rng.gen_range(-6.0..0.0));
            let z3 = Complex64::from_polar(rad, rng.gen_range(-PI..PI));
            if (1.0 + z3 * z3).norm() < 1e-9 {
                continue;
            }
            let (lo, hi) = koebe_bracket(z3, c.m).map_err(numerical("koebe bracket"))?;
            let dist = SpectrumModel::dirac(c.m).distance(psi(z3, c.m));
            koebe_bad += usize::from(!(lo <= dist && dist <= hi));
            closest = closest.min((dist / lo).min(hi / dist));
            n += 1;
        }
        t.push(vec!["koebe".into(), c.samples.to_string(), num(closest), koebe_bad.to_string()]);
        r.note("koebe_closest_factor", num(closest));
        r.check("koebe_bracket", koebe_bad == 0);
    } else {
        let map = CayleyMap::new(c.b.unwrap_or(1.0)).map_err(config("cayley map"))?;
        for _ in 0..c.samples {
            let l = sample(&mut rng);
            let back = map
                .to_disc_either(l)
                .and_then(|(u, lower)| map.from_disc_either(u, lower))
                .map_err(numerical("round trip"))?;
            let e = (back - l).norm() / (1.0 + l.norm());
            worst = worst.max(e);
            bad += usize::from(!(e <= 1e-9));
        }
        t.push(vec!["cayley_round_trip".into(), c.samples.to_string(), num(worst), bad.to_string()]);
        r.check("round_trip", bad == 0);
    }
    r.note("worst_round_trip", num(worst));
    r.tables.push(t);
    Ok(r)
}

pub fn resolvent_bound(ctx: &Context) -> Run {
    let c = ctx.cfg;
    let model = ctx.model()?;
    let v = ctx.potential(&model)?;
    let mut r = Report::new();
    let mut t = Table::new("resolvent", &["re", "im", "integral", "core", "ratio"]);
    let mut rs = Table::new("det_rs", &["re", "im", "lhs", "rhs", "ratio"]);
    let mut finite = true;
    let mut rs_ok = true;
    for &l in &c.lambdas {
        let rep = resolvent_bound_report(l, c.m, c.d, c.p).map_err(numerical("radial integral"))?;
        finite &= rep.integral_value.is_finite() && rep.integral_value > 0.0;
        let mut row: Vec<String> = re_im(l).into();
        row.extend([num(rep.integral_value), num(rep.paper_bound_core), num(rep.ratio)]);
        t.push(row);
        let d = det_rs_check(&model, &v, l, c.p).map_err(numerical("schatten bound"))?;
        rs_ok &= d.ratio <= c.rs_ratio_max;
        let mut row: Vec<String> = re_im(l).into();
        row.extend([num(d.lhs), num(d.rhs), num(d.ratio)]);
        rs.push(row);
    }
    r.tables.push(t);
    r.tables.push(rs);
    r.check("integrals_finite", finite);
    r.note("det_rs_ratio_max", num(c.rs_ratio_max));
    r.check("det_rs_bound", rs_ok);

    let bs = find_b_star(&model, &v, c.p).map_err(numerical("b* search"))?;
    r.note("b_star", num(bs.b));
    r.note("s_b", num(bs.s_b));
    r.note("s_2b", num(bs.s_2b));
    r.note("resolvent_norm_at_b_star", num(bs.norm_check));
    r.check("b_star_norm", bs.norm_check <= 1.0 + 1e-9);
    if bs.s_b > 0.0 {
        r.check("b_star_monotone", bs.s_2b < bs.s_b);
    }
    r.files.push(("potential.txt".into(), potential::to_text(&v)));
    Ok(r)
}

pub fn det_zeros(ctx: &Context) -> Run {
    let c = ctx.cfg;
    let model = ctx.model()?;
    let v = ctx.potential(&model)?;
    let setup = DetSetup::new(model, v, c.p, c.b).map_err(numerical("determinant setup"))?;
    let mut r = Report::new();
    r.note("b", num(setup.b));
    let f_ib = setup.f_value(setup.ib()).map_err(numerical("f(ib)"))?;
    r.note("f_ib_error", num((f_ib - 1.0).norm()));
    r.check("normalization", (f_ib - 1.0).norm() <= 1e-9);

    let eigs = eig_dense(&setup.perturbed).map_err(numerical("eigensolver"))?.eigenvalues;
    let rect = if c.nudge > 0.0 {
        nudge_window(&c.window, &eigs, c.nudge).map_err(config("window"))?
    } else {
        c.window
    };
    r.note("window", format!("[{}, {}] x [{}, {}]", num(rect.re0), num(rect.re1), num(rect.im0), num(rect.im1)));
    let inside: Vec<Complex64> = eigs.iter().copied().filter(|&l| rect.contains(l)).collect();
    let zeros = setup.zeros_in_region(&rect, &ContourOptions::default()).map_err(numerical("zero search"))?;

    let mut zt = Table::new("zeros", &["re", "im", "multiplicity", "nearest_eigenvalue"]);
    for &(z, k) in &zeros {
        let near = inside.iter().map(|l| (l - z).norm()).fold(f64::INFINITY, f64::min);
        let mut row: Vec<String> = re_im(z).into();
        row.extend([k.to_string(), num(near)]);
        zt.push(row);
    }
    let mut et = Table::new("eigenvalues", &["re", "im"]);
    for &l in &inside {
        et.push(re_im(l).into());
    }
    r.tables.push(zt);
    r.tables.push(et);
    r.note("zero_count", zeros.iter().map(|z| z.1).sum::<usize>());
    r.note("eigenvalue_count", inside.len());
    match match_multisets(&zeros, &inside) {
        Some(w) => {
            r.note("worst_distance", num(w));
            r.check("multiset_match", w <= c.match_tol);
        }
        None => r.check("multiset_match", false),
    }
    r.files.push(("potential.txt".into(), potential::to_text(&setup.potential)));
    Ok(r)
}

pub fn bgk_check(ctx: &Context) -> Run {
    let b = &ctx.cfg.bgk;
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.cfg.seed);
    let zeros: Vec<(Complex64, usize)> = (0..b.zeros)
        .map(|_| {
            let rad = rng.gen_range(b.min_radius..=b.max_radius);
            let z = Complex64::from_polar(rad, rng.gen_range(-PI..PI));
            (z, rng.gen_range(1..=b.max_multiplicity))
        })
        .collect();
    let h = synth_blaschke(&zeros).map_err(config("bgk"))?;
    let declared: usize = zeros.iter().map(|z| z.1).sum();
    let radius = 0.5 * (1.0 + b.max_radius);
    let counted = h.count_zeros(Complex64::new(0.0, 0.0), radius).map_err(numerical("zero count"))?;
    let rep = check(&h, b.alpha, &b.pairs, b.tau, b.rho_max).map_err(numerical("bgk check"))?;

    let mut r = Report::new();
    let mut t = Table::new("bgk_zeros", &["re", "im", "multiplicity"]);
    for &(z, k) in &zeros {
        let mut row: Vec<String> = re_im(z).into();
        row.push(k.to_string());
        t.push(row);
    }
    r.tables.push(t);
    r.note("declared", declared);
    r.note("counted", counted);
    r.note("zero_sum", num(rep.zero_sum));
    r.note("k_hat", num(rep.k_hat));
    r.note("ratio", num(rep.ratio));
    r.check("count", counted == declared as i64);
    r.check("ratio_finite", rep.ratio.is_finite());
    Ok(r)
}

pub fn sweep(ctx: &Context) -> Run {
    let c = ctx.cfg;
    let model = ctx.model()?;
    let v = ctx.potential(&model)?;
    let weights = ctx.weights()?;

    // Independent scales run on up to `threads` workers; results keep the input order.
    let workers = ctx.threads.clamp(1, c.s_values.len());
    let chunk = c.s_values.len().div_ceil(workers);
    let spectra: Vec<Result<Vec<(Complex64, usize)>, Failure>> = std::thread::scope(|scope| {
        let handles: Vec<_> = c
            .s_values
            .chunks(chunk)
            .map(|ss| {
                let (model, v) = (&model, &v);
                scope.spawn(move || {
                    ss.iter().map(|&s| spectrum_of(model, &v.scaled(s)).map(|sp| sp.discrete)).collect::<Vec<_>>()
                })
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("sweep worker panicked")).collect()
    });
    let spectra: Vec<Vec<(Complex64, usize)>> = spectra.into_iter().collect::<Result<_, _>>()?;

    let mut r = Report::new();
    let mut pts = Table::new("sweep", &["weight", "s", "eigenvalues", "sum"]);
    let mut slopes = Table::new("slopes", &["weight", "slope", "bound", "points", "status"]);
    for w in &weights {
        let (mut x, mut y) = (Vec::new(), Vec::new());
        for (&s, eigs) in c.s_values.iter().zip(&spectra) {
            let sum = lt_sum(eigs, w).map_err(numerical("lt_sum"))?;
            let count: usize = eigs.iter().map(|e| e.1).sum();
            pts.push(vec![w.id.to_string(), num(s), count.to_string(), num(sum)]);
            if sum > 0.0 {
                x.push(s.ln());
                y.push(sum.ln());
            }
        }
        let bound = c.p + c.slope_margin;
        if x.len() < 2 {
            slopes.push(vec![w.id.to_string(), String::new(), num(bound), x.len().to_string(), "no-data".into()]);
            r.check(&format!("slope_{}", w.id), false);
            continue;
        }
        let slope = fit_slope(&x, &y).map_err(numerical("slope fit"))?;
        let ok = slope <= bound;
        slopes.push(vec![
            w.id.to_string(),
            num(slope),
            num(bound),
            x.len().to_string(),
            if ok { "pass" } else { "fail" }.into(),
        ]);
        r.note(&format!("slope_{}_value", w.id), num(slope));
        r.check(&format!("slope_{}", w.id), ok);
    }
    r.tables.push(pts);
    r.tables.push(slopes);
    r.files.push(("potential.txt".into(), potential::to_text(&v)));
    Ok(r)
}
