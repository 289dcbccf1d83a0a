//! Periodic-grid discretization of the free Dirac / Klein-Gordon operators and
//! of matrix potentials.
//!
//! Layout: grid multi-indices are flattened with the first axis slowest, and a
//! full basis index is `point * n + component`. Frequencies are
//! ξ_k = 2πk/L with k ∈ {−N/2, …, N/2−1}^d; frequency slot t holds k = t − N/2.
//! The Fourier basis is related to the position basis by the unitary DFT
//! (U)_{k,j} = N^{−d/2} exp(−i ξ_k·x_j).

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::clifford::{build_clifford, CliffordRep};
use crate::error::{Error, Result};
use crate::numerics::{eig_dense, CMatrix};
use crate::spectra::SpectrumModel;

/// Largest dense dimension assembled unless the caller raises it.
pub const DEFAULT_DENSE_CAP: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub d: usize,
    pub n_points: usize,
    pub length: f64,
}

impl Grid {
    pub fn new(d: usize, n_points: usize, length: f64) -> Result<Self> {
        if !(1..=3).contains(&d) {
            return Err(Error::UnsupportedDimension(d));
        }
        if n_points == 0 || n_points % 2 != 0 {
            return Err(Error::InvalidParameter(format!("points per axis must be even and positive, got {n_points}")));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidParameter(format!("period must be positive, got {length}")));
        }
        Ok(Self { d, n_points, length })
    }

    /// N^d.
    pub fn size(&self) -> usize {
        self.n_points.pow(self.d as u32)
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n_points as f64
    }

    /// Δx^d.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.d as i32)
    }

    /// (2π/L)^d.
    pub fn frequency_cell(&self) -> f64 {
        (2.0 * PI / self.length).powi(self.d as i32)
    }

    /// Flat index → per-axis indices (first axis slowest).
    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut out = vec![0; self.d];
        for axis in (0..self.d).rev() {
            out[axis] = flat % self.n_points;
            flat /= self.n_points;
        }
        out
    }

    pub fn flat_index(&self, multi: &[usize]) -> usize {
        multi.iter().fold(0, |acc, &i| acc * self.n_points + i)
    }

    pub fn position(&self, flat: usize) -> Vec<f64> {
        let h = self.spacing();
        self.multi_index(flat).into_iter().map(|j| j as f64 * h).collect()
    }

    /// Integer wave vector k of frequency slot `flat`.
    pub fn wave_number(&self, flat: usize) -> Vec<i64> {
        let half = (self.n_points / 2) as i64;
        self.multi_index(flat).into_iter().map(|t| t as i64 - half).collect()
    }

    pub fn frequency(&self, flat: usize) -> Vec<f64> {
        let s = 2.0 * PI / self.length;
        self.wave_number(flat).into_iter().map(|k| k as f64 * s).collect()
    }
}

/// An n×n complex matrix per grid point, stored point-major then row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialField {
    pub grid: Grid,
    pub n: usize,
    samples: Vec<Complex64>,
}

impl PotentialField {
    pub fn new(grid: Grid, n: usize, samples: Vec<Complex64>) -> Result<Self> {
        let expected = grid.size() * n * n;
        if samples.len() != expected {
            return Err(Error::DimensionMismatch(format!(
                "{} potential entries, expected {expected}",
                samples.len()
            )));
        }
        if samples.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite);
        }
        Ok(Self { grid, n, samples })
    }

    pub fn zero(grid: Grid, n: usize) -> Self {
        Self { grid, n, samples: vec![Complex64::new(0.0, 0.0); grid.size() * n * n] }
    }

    pub fn from_fn(grid: Grid, n: usize, mut f: impl FnMut(&[f64]) -> CMatrix) -> Result<Self> {
        let mut samples = Vec::with_capacity(grid.size() * n * n);
        for j in 0..grid.size() {
            let v = f(&grid.position(j));
            if v.rows() != n || v.cols() != n {
                return Err(Error::DimensionMismatch(format!("sample of size {}x{}, expected {n}x{n}", v.rows(), v.cols())));
            }
            samples.extend_from_slice(v.data());
        }
        Self::new(grid, n, samples)
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn sample(&self, point: usize) -> CMatrix {
        let nn = self.n * self.n;
        CMatrix::from_vec(self.n, self.n, self.samples[point * nn..(point + 1) * nn].to_vec()).unwrap()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { grid: self.grid, n: self.n, samples: self.samples.iter().map(|z| z * s).collect() }
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (0..self.grid.size()).all(|j| self.sample(j).is_hermitian(tol))
    }

    /// Discrete Fourier coefficients V̂(q) = N^{−d} Σ_j V_j e^{−2πi q·j/N}, q in slot order 0..N per axis.
    pub fn fourier_coefficients(&self) -> Vec<CMatrix> {
        let g = self.grid;
        let npts = g.size();
        let nn = self.n * self.n;
        let big_n = g.n_points as f64;
        let inv = 1.0 / npts as f64;
        let js: Vec<Vec<usize>> = (0..npts).map(|j| g.multi_index(j)).collect();
        (0..npts)
            .map(|q| {
                let qm = g.multi_index(q);
                let mut acc = vec![Complex64::new(0.0, 0.0); nn];
                for (j, jm) in js.iter().enumerate() {
                    let dot: usize = qm.iter().zip(jm).map(|(a, b)| a * b).sum();
                    let phase = Complex64::from_polar(inv, -2.0 * PI * (dot % g.n_points) as f64 / big_n);
                    for (a, &v) in acc.iter_mut().zip(&self.samples[j * nn..(j + 1) * nn]) {
                        *a += v * phase;
                    }
                }
                CMatrix::from_vec(self.n, self.n, acc).unwrap()
            })
            .collect()
    }
}

/// (Σ_j ‖V(x_j)‖_F^p Δx^d)^{1/p}.
pub fn lp_norm(v: &PotentialField, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::InvalidParameter(format!("L^p exponent must be >= 1, got {p}")));
    }
    let norms: Vec<f64> = (0..v.grid.size()).map(|j| v.sample(j).frobenius_norm()).collect();
    if p.is_infinite() {
        return Ok(norms.into_iter().fold(0.0, f64::max));
    }
    let s: f64 = norms.iter().map(|x| x.powf(p)).sum();
    Ok((s * v.grid.cell_volume()).powf(1.0 / p))
}

#[derive(Clone, Debug)]
pub enum OperatorKind {
    Dirac(CliffordRep),
    /// Internal dimension l.
    KleinGordon(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Basis {
    Fourier,
    Position,
}

#[derive(Clone, Debug)]
pub struct FreeOperatorModel {
    pub kind: OperatorKind,
    pub m: f64,
    pub grid: Grid,
    pub dense_cap: usize,
}

impl FreeOperatorModel {
    pub fn dirac(grid: Grid, m: f64) -> Result<Self> {
        let rep = build_clifford(grid.d)?;
        Self::check_mass(m)?;
        Ok(Self { kind: OperatorKind::Dirac(rep), m, grid, dense_cap: DEFAULT_DENSE_CAP })
    }

    pub fn klein_gordon(grid: Grid, m: f64, l: usize) -> Result<Self> {
        Self::check_mass(m)?;
        if l == 0 {
            return Err(Error::InvalidParameter("internal dimension must be positive".into()));
        }
        Ok(Self { kind: OperatorKind::KleinGordon(l), m, grid, dense_cap: DEFAULT_DENSE_CAP })
    }

    fn check_mass(m: f64) -> Result<()> {
        if !(m >= 0.0 && m.is_finite()) {
            return Err(Error::InvalidParameter(format!("mass must be >= 0, got {m}")));
        }
        Ok(())
    }

    /// Internal dimension n (Dirac) or l (Klein-Gordon).
    pub fn internal_dim(&self) -> usize {
        match &self.kind {
            OperatorKind::Dirac(rep) => rep.n,
            OperatorKind::KleinGordon(l) => *l,
        }
    }

    pub fn dim(&self) -> usize {
        self.grid.size() * self.internal_dim()
    }

    pub fn spectrum_model(&self) -> SpectrumModel {
        match self.kind {
            OperatorKind::Dirac(_) => SpectrumModel::dirac(self.m),
            OperatorKind::KleinGordon(_) => SpectrumModel::klein_gordon(self.m),
        }
    }

    /// μ(ξ_k) = √(|ξ_k|² + m²).
    pub fn mu(&self, slot: usize) -> f64 {
        let xi = self.grid.frequency(slot);
        (xi.iter().map(|x| x * x).sum::<f64>() + self.m * self.m).sqrt()
    }

    pub fn symbol_block(&self, slot: usize) -> CMatrix {
        match &self.kind {
            OperatorKind::Dirac(rep) => rep.symbol(&self.grid.frequency(slot), self.m),
            OperatorKind::KleinGordon(l) => CMatrix::identity(*l).scale_real(self.mu(slot)),
        }
    }

    pub fn symbol_blocks(&self) -> Vec<CMatrix> {
        (0..self.grid.size()).map(|s| self.symbol_block(s)).collect()
    }

    fn check_cap(&self) -> Result<usize> {
        let dim = self.dim();
        if dim > self.dense_cap {
            return Err(Error::TooLarge { dim, cap: self.dense_cap });
        }
        Ok(dim)
    }

    /// Exact eigenvalues of the free operator (with multiplicity).
    pub fn free_eigenvalues(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dim());
        for s in 0..self.grid.size() {
            let mu = self.mu(s);
            match &self.kind {
                OperatorKind::Dirac(rep) => {
                    out.extend(std::iter::repeat(mu).take(rep.n / 2));
                    out.extend(std::iter::repeat(-mu).take(rep.n / 2));
                }
                OperatorKind::KleinGordon(l) => out.extend(std::iter::repeat(mu).take(*l)),
            }
        }
        out
    }
}

/// Block-diagonal `rows` of n×n blocks placed along the diagonal.
fn block_diagonal(blocks: &[CMatrix], n: usize) -> CMatrix {
    let dim = blocks.len() * n;
    let mut out = CMatrix::zeros(dim, dim);
    for (s, b) in blocks.iter().enumerate() {
        for a in 0..n {
            for c in 0..n {
                out[(s * n + a, s * n + c)] = b[(a, c)];
            }
        }
    }
    out
}

/// Dense free operator in the requested basis.
pub fn free_dense(model: &FreeOperatorModel, basis: Basis) -> Result<CMatrix> {
    model.check_cap()?;
    let n = model.internal_dim();
    let blocks = model.symbol_blocks();
    match basis {
        Basis::Fourier => Ok(block_diagonal(&blocks, n)),
        Basis::Position => {
            // H_{(j,a),(j',b)} = N^{−d} Σ_k e^{i ξ_k·(x_j − x_j')} S_k[a][b].
            let g = model.grid;
            let npts = g.size();
            let inv = 1.0 / npts as f64;
            let big_n = g.n_points as i64;
            let ks: Vec<Vec<i64>> = (0..npts).map(|s| g.wave_number(s)).collect();
            let js: Vec<Vec<usize>> = (0..npts).map(|j| g.multi_index(j)).collect();
            // Kernel depends only on the index difference mod N.
            let kernel: Vec<CMatrix> = (0..npts)
                .map(|diff| {
                    let dm = &js[diff];
                    let mut acc = CMatrix::zeros(n, n);
                    for (k, s) in ks.iter().zip(&blocks) {
                        let dot: i64 = k.iter().zip(dm).map(|(a, &b)| a * b as i64).sum();
                        let phase = Complex64::from_polar(inv, 2.0 * PI * (dot.rem_euclid(big_n)) as f64 / big_n as f64);
                        acc = &acc + &s.scale(phase);
                    }
                    acc
                })
                .collect();
            let dim = npts * n;
            let mut out = CMatrix::zeros(dim, dim);
            for j in 0..npts {
                for jp in 0..npts {
                    let diff: Vec<usize> =
                        js[j].iter().zip(&js[jp]).map(|(&a, &b)| (a + g.n_points - b) % g.n_points).collect();
                    let kb = &kernel[g.flat_index(&diff)];
                    for a in 0..n {
                        for c in 0..n {
                            out[(j * n + a, jp * n + c)] = kb[(a, c)];
                        }
                    }
                }
            }
            Ok(out)
        }
    }
}

/// Multiplication by V in the requested basis; in the Fourier basis this is
/// the convolution (V_f)_{k,k'} = V̂(k − k').
pub fn potential_dense(v: &PotentialField, basis: Basis) -> Result<CMatrix> {
    let n = v.n;
    let npts = v.grid.size();
    match basis {
        Basis::Position => {
            let blocks: Vec<CMatrix> = (0..npts).map(|j| v.sample(j)).collect();
            Ok(block_diagonal(&blocks, n))
        }
        Basis::Fourier => {
            let g = v.grid;
            let coeffs = v.fourier_coefficients();
            let slots: Vec<Vec<usize>> = (0..npts).map(|s| g.multi_index(s)).collect();
            let dim = npts * n;
            let mut out = CMatrix::zeros(dim, dim);
            for t in 0..npts {
                for tp in 0..npts {
                    let q: Vec<usize> =
                        slots[t].iter().zip(&slots[tp]).map(|(&a, &b)| (a + g.n_points - b) % g.n_points).collect();
                    let vq = &coeffs[g.flat_index(&q)];
                    for a in 0..n {
                        for c in 0..n {
                            out[(t * n + a, tp * n + c)] = vq[(a, c)];
                        }
                    }
                }
            }
            Ok(out)
        }
    }
}

/// D = free + potential (same basis).
pub fn perturbed(free: &CMatrix, pot: &CMatrix) -> Result<CMatrix> {
    free.try_add(pot)
}

/// Free, potential and perturbed operators in one basis, checked for consistency.
pub fn assemble(model: &FreeOperatorModel, v: &PotentialField, basis: Basis) -> Result<(CMatrix, CMatrix, CMatrix)> {
    if v.grid != model.grid || v.n != model.internal_dim() {
        return Err(Error::DimensionMismatch(format!(
            "potential on {:?} with n={} against operator on {:?} with n={}",
            v.grid,
            v.n,
            model.grid,
            model.internal_dim()
        )));
    }
    let free = free_dense(model, basis)?;
    let pot = potential_dense(v, basis)?;
    let d = perturbed(&free, &pot)?;
    Ok((free, pot, d))
}

/// Resolvent blocks (λ − S_k)^{-1} of the free symbol, one per frequency slot.
pub fn resolvent_blocks(model: &FreeOperatorModel, lambda: Complex64) -> Result<Vec<CMatrix>> {
    (0..model.grid.size())
        .map(|s| {
            let shifted = model.symbol_block(s).scale_real(-1.0).shift(lambda);
            crate::numerics::inverse(&shifted).map_err(|e| match e {
                Error::Singular { .. } => Error::OnSpectrum(lambda),
                other => other,
            })
        })
        .collect()
}

/// `m · diag(blocks)` with n×n blocks.
pub fn mul_block_diag_right(m: &CMatrix, blocks: &[CMatrix]) -> CMatrix {
    let n = blocks.first().map_or(1, |b| b.rows());
    let mut out = CMatrix::zeros(m.rows(), m.cols());
    for i in 0..m.rows() {
        let src = m.row(i);
        let dst = out.row_mut(i);
        for (s, b) in blocks.iter().enumerate() {
            for c in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for a in 0..n {
                    acc += src[s * n + a] * b[(a, c)];
                }
                dst[s * n + c] = acc;
            }
        }
    }
    out
}

/// `diag(blocks) · m` with n×n blocks.
pub fn mul_block_diag_left(blocks: &[CMatrix], m: &CMatrix) -> CMatrix {
    let n = blocks.first().map_or(1, |b| b.rows());
    let mut out = CMatrix::zeros(m.rows(), m.cols());
    for (s, b) in blocks.iter().enumerate() {
        for a in 0..n {
            let dst = s * n + a;
            for c in 0..n {
                let f = b[(a, c)];
                if f == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let src: Vec<Complex64> = m.row(s * n + c).to_vec();
                for (o, v) in out.row_mut(dst).iter_mut().zip(&src) {
                    *o += f * v;
                }
            }
        }
    }
    out
}

/// Eigenvalues of D farther than `margin` from the model spectrum, clustered with multiplicity.
pub fn discrete_spectrum(d: &CMatrix, model: &SpectrumModel, margin: f64) -> Result<Vec<(Complex64, usize)>> {
    if !(margin >= 0.0) {
        return Err(Error::InvalidParameter(format!("margin must be >= 0, got {margin}")));
    }
    let eig = eig_dense(d)?;
    let mut out: Vec<(Complex64, usize)> =
        eig.clustered().into_iter().filter(|(l, _)| model.distance(*l) > margin).collect();
    out.sort_by(|a, b| a.0.re.total_cmp(&b.0.re).then(a.0.im.total_cmp(&b.0.im)));
    Ok(out)
}

/// Default classification margin: 1e-6 plus the eigensolver residual.
pub fn default_margin(residual: f64) -> f64 {
    1e-6 + residual
}

/// Built-in potential generators.
#[derive(Clone, Debug, PartialEq)]
pub enum PotentialGenerator {
    /// V ≡ −iγ Id.
    ConstantAntiHermitian { gamma: f64 },
    /// V(x) = amp · exp(−|x − c|²/(2σ²)) Id with the periodic distance.
    GaussianBump { amp: Complex64, sigma: f64, center: Vec<f64> },
    /// Entries amp·(a + ib), a, b uniform in [−1, 1], from a seeded ChaCha8 stream.
    RandomComplex { seed: u64, amp: f64 },
}

impl PotentialGenerator {
    pub fn generate(&self, grid: Grid, n: usize) -> Result<PotentialField> {
        match self {
            Self::ConstantAntiHermitian { gamma } => {
                let v = CMatrix::identity(n).scale(Complex64::new(0.0, -gamma));
                PotentialField::from_fn(grid, n, |_| v.clone())
            }
            Self::GaussianBump { amp, sigma, center } => {
                if center.len() != grid.d {
                    return Err(Error::DimensionMismatch(format!(
                        "bump center has {} coordinates, grid has d={}",
                        center.len(),
                        grid.d
                    )));
                }
                if !(*sigma > 0.0) {
                    return Err(Error::InvalidParameter(format!("bump width must be positive, got {sigma}")));
                }
                let id = CMatrix::identity(n);
                let l = grid.length;
                PotentialField::from_fn(grid, n, |x| {
                    let r2: f64 = x
                        .iter()
                        .zip(center)
                        .map(|(a, c)| {
                            let t = (a - c).rem_euclid(l);
                            let t = t.min(l - t);
                            t * t
                        })
                        .sum();
                    id.scale(amp * (-r2 / (2.0 * sigma * sigma)).exp())
                })
            }
            Self::RandomComplex { seed, amp } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let samples = (0..grid.size() * n * n)
                    .map(|_| Complex64::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0)) * *amp)
                    .collect();
                PotentialField::new(grid, n, samples)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sorted_re(v: impl IntoIterator<Item = f64>) -> Vec<f64> {
        let mut v: Vec<f64> = v.into_iter().collect();
        v.sort_by(f64::total_cmp);
        v
    }

    #[test]
    fn free_dirac_small_grid() {
        let g = Grid::new(1, 4, 2.0 * PI).unwrap();
        let model = FreeOperatorModel::dirac(g, 1.0).unwrap();
        let h = free_dense(&model, Basis::Fourier).unwrap();
        assert!(h.is_hermitian(0.0));
        let eig = eig_dense(&h).unwrap();
        let got = sorted_re(eig.eigenvalues.iter().map(|z| z.re));
        let (s5, s2) = (5f64.sqrt(), 2f64.sqrt());
        let want = sorted_re([s5, -s5, s2, -s2, s2, -s2, 1.0, -1.0]);
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).abs() < 1e-12, "{got:?} vs {want:?}");
        }
        assert_eq!(sorted_re(model.free_eigenvalues()), want);
    }

    #[test]
    fn zero_mode_blocks() {
        let g = Grid::new(2, 4, 3.0).unwrap();
        let dirac = FreeOperatorModel::dirac(g, 0.0).unwrap();
        let zero_slot = g.flat_index(&[2, 2]);
        assert_eq!(dirac.symbol_block(zero_slot).max_abs(), 0.0);
        let kg = FreeOperatorModel::klein_gordon(g, 1.0, 1).unwrap();
        assert_eq!(kg.symbol_block(zero_slot)[(0, 0)], c(1.0, 0.0));
    }

    #[test]
    fn symbol_squares_to_mu_squared() {
        let g = Grid::new(3, 4, 5.0).unwrap();
        let model = FreeOperatorModel::dirac(g, 0.7).unwrap();
        for s in 0..g.size() {
            let b = model.symbol_block(s);
            let sq = &b * &b;
            let mu2 = model.mu(s).powi(2);
            assert!((&sq - &CMatrix::identity(4).scale_real(mu2)).max_abs() < 1e-12);
        }
    }

    #[test]
    fn bases_agree() {
        let g = Grid::new(1, 8, 4.0).unwrap();
        let model = FreeOperatorModel::dirac(g, 1.0).unwrap();
        let v = PotentialGenerator::RandomComplex { seed: 3, amp: 0.5 }.generate(g, 2).unwrap();
        let (_, _, df) = assemble(&model, &v, Basis::Fourier).unwrap();
        let (fp, _, dp) = assemble(&model, &v, Basis::Position).unwrap();
        assert!(fp.is_hermitian(1e-12));
        let mut a = eig_dense(&df).unwrap().eigenvalues;
        let mut b = eig_dense(&dp).unwrap().eigenvalues;
        let key = |z: &Complex64| (z.re, z.im);
        a.sort_by(|x, y| key(x).partial_cmp(&key(y)).unwrap());
        b.sort_by(|x, y| key(x).partial_cmp(&key(y)).unwrap());
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-9, "{x} vs {y}");
        }
    }

    #[test]
    fn constant_potential() {
        let g = Grid::new(2, 4, 3.0).unwrap();
        let v = PotentialGenerator::ConstantAntiHermitian { gamma: 0.5 }.generate(g, 2).unwrap();
        let pf = potential_dense(&v, Basis::Fourier).unwrap();
        assert!((&pf - &CMatrix::identity(32).scale(c(0.0, -0.5))).max_abs() < 1e-14);
        let want = 0.5 * 2f64.sqrt() * 3.0f64.powf(2.0 / 2.5);
        assert!((lp_norm(&v, 2.5).unwrap() - want).abs() < 1e-12);
        assert!((lp_norm(&v.scaled(3.0), 2.5).unwrap() - 3.0 * want).abs() < 1e-12);
        assert_eq!(lp_norm(&PotentialField::zero(g, 2), 2.0).unwrap(), 0.0);
    }

    #[test]
    fn single_site_rank() {
        let g = Grid::new(1, 6, 1.0).unwrap();
        let mut samples = vec![c(0.0, 0.0); 6 * 4];
        samples[8..12].copy_from_slice(&[c(1.0, 0.0), c(2.0, 0.0), c(0.0, 1.0), c(1.0, 1.0)]);
        let v = PotentialField::new(g, 2, samples).unwrap();
        let p = potential_dense(&v, Basis::Position).unwrap();
        let nonzero_rows = (0..12).filter(|&i| p.row(i).iter().any(|z| z.norm() > 0.0)).count();
        assert!(nonzero_rows <= 2);
    }

    #[test]
    fn gamma_shift_discrete_spectrum() {
        let g = Grid::new(1, 8, 2.0 * PI).unwrap();
        let model = FreeOperatorModel::dirac(g, 1.0).unwrap();
        let v = PotentialGenerator::ConstantAntiHermitian { gamma: 0.3 }.generate(g, 2).unwrap();
        let (_, _, d) = assemble(&model, &v, Basis::Fourier).unwrap();
        let spec = discrete_spectrum(&d, &model.spectrum_model(), 0.1).unwrap();
        let total: usize = spec.iter().map(|x| x.1).sum();
        assert_eq!(total, 16);
        for (l, _) in spec {
            assert!((model.spectrum_model().distance(l) - 0.3).abs() < 1e-12);
        }
        let (free, _, _) = assemble(&model, &PotentialField::zero(g, 2), Basis::Fourier).unwrap();
        assert!(discrete_spectrum(&free, &model.spectrum_model(), 1e-6).unwrap().is_empty());
    }

    #[test]
    fn hermitian_potential_gives_gap_eigenvalues_only() {
        let g = Grid::new(1, 16, 8.0).unwrap();
        let model = FreeOperatorModel::dirac(g, 1.0).unwrap();
        let v = PotentialGenerator::GaussianBump { amp: c(-2.0, 0.0), sigma: 0.7, center: vec![4.0] }
            .generate(g, 2)
            .unwrap();
        let (_, _, d) = assemble(&model, &v, Basis::Fourier).unwrap();
        let spec = discrete_spectrum(&d, &model.spectrum_model(), 1e-6).unwrap();
        assert!(!spec.is_empty());
        for (l, _) in spec {
            assert!(l.im.abs() < 1e-8 && l.re.abs() < 1.0, "{l}");
        }
    }

    #[test]
    fn random_generator_is_seeded() {
        let g = Grid::new(1, 4, 1.0).unwrap();
        let a = PotentialGenerator::RandomComplex { seed: 9, amp: 1.0 }.generate(g, 2).unwrap();
        let b = PotentialGenerator::RandomComplex { seed: 9, amp: 1.0 }.generate(g, 2).unwrap();
        let c2 = PotentialGenerator::RandomComplex { seed: 10, amp: 1.0 }.generate(g, 2).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c2);
    }

    #[test]
    fn block_products_match_dense() {
        let g = Grid::new(1, 4, 3.0).unwrap();
        let model = FreeOperatorModel::dirac(g, 1.0).unwrap();
        let lam = c(0.2, 0.9);
        let blocks = resolvent_blocks(&model, lam).unwrap();
        let dense = block_diagonal(&blocks, 2);
        let m = CMatrix::from_fn(8, 8, |i, j| c((i * 3 + j) as f64 * 0.1, (i as f64 - j as f64) * 0.2));
        assert!((&mul_block_diag_right(&m, &blocks) - &(&m * &dense)).max_abs() < 1e-13);
        assert!((&mul_block_diag_left(&blocks, &m) - &(&dense * &m)).max_abs() < 1e-13);
        let free = free_dense(&model, Basis::Fourier).unwrap();
        let check = &(&CMatrix::identity(8).scale(lam) - &free) * &dense;
        assert!((&check - &CMatrix::identity(8)).max_abs() < 1e-13);
    }

    #[test]
    fn invalid_grids() {
        assert!(Grid::new(1, 5, 1.0).is_err());
        assert!(Grid::new(4, 4, 1.0).is_err());
        assert!(Grid::new(1, 4, 0.0).is_err());
    }
}
