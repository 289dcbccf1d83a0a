//! Argument-principle zero location for meromorphic functions given through
//! their logarithmic derivative h'/h.
//!
//! A rectangle's moments (1/2πi)∮ ζ^j h'/h dz, with ζ = (z − c)/s in the
//! rectangle's own frame, are computed by adaptive Gauss-Kronrod panels along
//! each edge. m_0 counts zeros minus poles; m_1/m_0 is their centroid. Cells
//! holding several distinct zeros are bisected; single clusters are polished
//! by multiplicity-aware Newton steps.

use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub trait LogDerivative {
    fn log_derivative(&self, z: Complex64) -> Result<Complex64>;
}

impl<F> LogDerivative for F
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    fn log_derivative(&self, z: Complex64) -> Result<Complex64> {
        self(z)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect {
    pub re0: f64,
    pub re1: f64,
    pub im0: f64,
    pub im1: f64,
}

impl Rect {
    pub fn new(re0: f64, re1: f64, im0: f64, im1: f64) -> Result<Self> {
        if !(re0 < re1 && im0 < im1) || ![re0, re1, im0, im1].iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidParameter(format!("degenerate rectangle [{re0}, {re1}] x [{im0}, {im1}]")));
        }
        Ok(Self { re0, re1, im0, im1 })
    }

    pub fn center(&self) -> Complex64 {
        Complex64::new(0.5 * (self.re0 + self.re1), 0.5 * (self.im0 + self.im1))
    }

    pub fn half_diagonal(&self) -> f64 {
        0.5 * (self.re1 - self.re0).hypot(self.im1 - self.im0)
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.re >= self.re0 && z.re <= self.re1 && z.im >= self.im0 && z.im <= self.im1
    }

    pub fn expanded(&self, by: f64) -> Self {
        Self { re0: self.re0 - by, re1: self.re1 + by, im0: self.im0 - by, im1: self.im1 + by }
    }

    /// Counter-clockwise corners starting at the bottom-left.
    fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.re0, self.im0),
            Complex64::new(self.re1, self.im0),
            Complex64::new(self.re1, self.im1),
            Complex64::new(self.re0, self.im1),
        ]
    }

    /// Splits the longer side at fraction `t`.
    fn split(&self, t: f64) -> (Rect, Rect) {
        if self.re1 - self.re0 >= self.im1 - self.im0 {
            let x = self.re0 + t * (self.re1 - self.re0);
            (Rect { re1: x, ..*self }, Rect { re0: x, ..*self })
        } else {
            let y = self.im0 + t * (self.im1 - self.im0);
            (Rect { im1: y, ..*self }, Rect { im0: y, ..*self })
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ContourOptions {
    /// Accepted distance of m_0 from an integer.
    pub integer_tol: f64,
    /// Target absolute error of each moment.
    pub moment_tol: f64,
    /// Bisection depth per edge before the edge is declared too close to a zero.
    pub max_edge_depth: usize,
    /// Cluster test: |p_j|^{1/j} ≤ cluster_tol for the centered power sums (cell units).
    pub cluster_tol: f64,
    /// Largest count for which the cluster test is attempted.
    pub max_cluster: usize,
    /// Absolute cluster radius, relative to 1 + |center|, below which zeros merge.
    pub cluster_abs: f64,
    pub newton_max_steps: usize,
    pub newton_tol: f64,
    /// Cells smaller than this (relative to 1 + |center|) are reported as one cluster.
    pub min_cell: f64,
    pub max_retries: usize,
}

impl Default for ContourOptions {
    fn default() -> Self {
        Self {
            integer_tol: 1e-4,
            moment_tol: 1e-7,
            max_edge_depth: 18,
            cluster_tol: 1e-3,
            max_cluster: 4,
            cluster_abs: 1e-7,
            newton_max_steps: 50,
            newton_tol: 1e-10,
            min_cell: 1e-9,
            max_retries: 6,
        }
    }
}

const NMOM: usize = 5;
type Moments = [Complex64; NMOM];

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

struct Frame {
    c: Complex64,
    s: f64,
}

/// Evaluator with a cache keyed on exact node coordinates. Bisection at exact
/// midpoints makes child cells reuse the parent's edge nodes, and the shared
/// interior edge of two siblings is evaluated once.
struct Ctx<'a, H: ?Sized> {
    h: &'a H,
    opts: ContourOptions,
    cache: RefCell<HashMap<(u64, u64), Complex64>>,
}

impl<'a, H: LogDerivative + ?Sized> Ctx<'a, H> {
    fn new(h: &'a H, opts: &ContourOptions) -> Self {
        Self { h, opts: *opts, cache: RefCell::new(HashMap::new()) }
    }

    fn eval(&self, z: Complex64) -> Result<Complex64> {
        let key = (z.re.to_bits(), z.im.to_bits());
        if let Some(v) = self.cache.borrow().get(&key) {
            return Ok(*v);
        }
        let v = self.h.log_derivative(z)?;
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::ContourThroughZero(f64::INFINITY));
        }
        self.cache.borrow_mut().insert(key, v);
        Ok(v)
    }

    /// One Kronrod panel a→b: (moments, error estimate, max |φ| on the nodes).
    fn panel(&self, frame: &Frame, a: Complex64, b: Complex64) -> Result<(Moments, f64, f64)> {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let zero = Complex64::new(0.0, 0.0);
        let mut kron = [zero; NMOM];
        let mut gauss = [zero; NMOM];
        let mut peak: f64 = 0.0;
        let mut add = |z: Complex64, wk: f64, wg: Option<f64>| -> Result<()> {
            let phi = self.eval(z)?;
            peak = peak.max(phi.norm());
            let zeta = (z - frame.c) / frame.s;
            let mut pw = phi;
            for j in 0..NMOM {
                kron[j] += pw * wk;
                if let Some(g) = wg {
                    gauss[j] += pw * g;
                }
                pw *= zeta;
            }
            Ok(())
        };
        add(mid, WGK[7], Some(WG[3]))?;
        for i in 0..7 {
            let wg = if i % 2 == 1 { Some(WG[i / 2]) } else { None };
            add(mid - half * XGK[i], WGK[i], wg)?;
            add(mid + half * XGK[i], WGK[i], wg)?;
        }
        let mut err: f64 = 0.0;
        for j in 0..NMOM {
            kron[j] *= half;
            gauss[j] *= half;
            err = err.max((kron[j] - gauss[j]).norm());
        }
        Ok((kron, err, peak))
    }

    /// Recursive bisection of the segment until each piece meets its share of `tol`.
    fn segment(&self, frame: &Frame, a: Complex64, b: Complex64, tol: f64, depth: usize) -> Result<Moments> {
        let (m, err, peak) = self.panel(frame, a, b)?;
        // A zero right at the edge shows up as a node value far above 1/length.
        if peak * (b - a).norm() > 1e6 {
            return Err(Error::ContourThroughZero(peak));
        }
        // Below ~1e3 ulp of the panel's magnitude bisection only chases roundoff.
        if err <= tol.max(1e3 * f64::EPSILON * peak * (b - a).norm()) {
            return Ok(m);
        }
        if depth >= self.opts.max_edge_depth {
            return Err(Error::ContourThroughZero(err));
        }
        let mid = 0.5 * (a + b);
        let left = self.segment(frame, a, mid, 0.5 * tol, depth + 1)?;
        let right = self.segment(frame, mid, b, 0.5 * tol, depth + 1)?;
        let mut out = left;
        for j in 0..NMOM {
            out[j] += right[j];
        }
        Ok(out)
    }

    /// Normalized moments (1/2πi)∮ ζ^j h'/h dz, ζ = (z − center)/half_diagonal.
    fn moments(&self, rect: &Rect) -> Result<Moments> {
        let frame = Frame { c: rect.center(), s: rect.half_diagonal() };
        let cs = rect.corners();
        let mut total = [Complex64::new(0.0, 0.0); NMOM];
        for i in 0..4 {
            let m = self.segment(&frame, cs[i], cs[(i + 1) % 4], self.opts.moment_tol * 2.0 * PI, 0)?;
            for j in 0..NMOM {
                total[j] += m[j];
            }
        }
        let scale = Complex64::new(0.0, 2.0 * PI);
        Ok(total.map(|x| x / scale))
    }

    fn evaluations(&self) -> usize {
        self.cache.borrow().len()
    }
}

/// Winding number of h around the rectangle (zeros minus poles inside).
pub fn winding_number<H: LogDerivative + ?Sized>(h: &H, rect: &Rect, opts: &ContourOptions) -> Result<i64> {
    let m0 = Ctx::new(h, opts).moments(rect)?[0];
    let n = m0.re.round();
    if (m0 - n).norm() > opts.integer_tol {
        return Err(Error::NonIntegerWinding(m0.re));
    }
    Ok(n as i64)
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Multiplicity-aware Newton: z ← z − k h/h'.
pub fn newton_refine<H: LogDerivative + ?Sized>(
    h: &H,
    start: Complex64,
    multiplicity: usize,
    opts: &ContourOptions,
) -> Result<Complex64> {
    let mut z = start;
    for _ in 0..opts.newton_max_steps {
        let phi = h.log_derivative(z)?;
        if phi.norm() == 0.0 || !phi.re.is_finite() || !phi.im.is_finite() {
            return Ok(z);
        }
        let step = multiplicity as f64 / phi;
        z -= step;
        if step.norm() <= opts.newton_tol * (1.0 + z.norm()) {
            return Ok(z);
        }
    }
    Err(Error::NoConvergence { what: "Newton refinement", iterations: opts.newton_max_steps })
}

/// Result of a zero search: zeros with multiplicities and the number of
/// distinct h'/h evaluations spent.
#[derive(Clone, Debug)]
pub struct ZeroSearch {
    pub zeros: Vec<(Complex64, usize)>,
    pub evaluations: usize,
    /// The contour actually used (the input, possibly nudged outward).
    pub region: Rect,
}

/// Zeros of h inside `rect` with multiplicities. Poles inside the rectangle are
/// not supported (the winding number must equal the zero count).
pub fn find_zeros<H: LogDerivative + ?Sized>(
    h: &H,
    rect: &Rect,
    opts: &ContourOptions,
) -> Result<Vec<(Complex64, usize)>> {
    Ok(search_zeros(h, rect, opts)?.zeros)
}

pub fn search_zeros<H: LogDerivative + ?Sized>(h: &H, rect: &Rect, opts: &ContourOptions) -> Result<ZeroSearch> {
    let ctx = Ctx::new(h, opts);
    // Nudge the root contour outward if it passes too close to a zero.
    let mut last_err = None;
    for attempt in 0..=opts.max_retries {
        let grow = if attempt == 0 { 0.0 } else { rect.half_diagonal() * 1e-3 * (1 << attempt) as f64 * 0.37 };
        let root = rect.expanded(grow);
        match ctx.moments(&root) {
            Ok(m) => {
                let mut out = Vec::new();
                search(&ctx, root, m, 0, &mut out)?;
                out.sort_by(|a, b| a.0.re.total_cmp(&b.0.re).then(a.0.im.total_cmp(&b.0.im)));
                return Ok(ZeroSearch { zeros: out, evaluations: ctx.evaluations(), region: root });
            }
            Err(e @ (Error::ContourThroughZero(_) | Error::NonIntegerWinding(_))) => last_err = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last_err.unwrap_or_else(|| Error::SearchExhausted("root contour".into())))
}

/// Exact midpoint first (cache reuse), then off-center fallbacks.
const SPLITS: [f64; 7] = [0.5, 0.4432, 0.5619, 0.3917, 0.6143, 0.3378, 0.6611];

fn count_of(m: &Moments, opts: &ContourOptions) -> Result<usize> {
    let n = m[0].re.round();
    if (m[0] - n).norm() > opts.integer_tol {
        return Err(Error::NonIntegerWinding(m[0].re));
    }
    if n < 0.0 {
        return Err(Error::InvalidParameter(format!("negative winding {n}: the region contains poles")));
    }
    Ok(n as usize)
}

fn search<H: LogDerivative + ?Sized>(
    ctx: &Ctx<'_, H>,
    rect: Rect,
    m: Moments,
    depth: usize,
    out: &mut Vec<(Complex64, usize)>,
) -> Result<()> {
    let opts = &ctx.opts;
    let count = count_of(&m, opts)?;
    if count == 0 {
        return Ok(());
    }
    let c = rect.center();
    let s = rect.half_diagonal();
    if count <= opts.max_cluster {
        let zc = m[1] / count as f64;
        // Largest |p_j|^{1/j} of the centered power sums: the cluster's spread in units of s.
        let spread = (2..=count)
            .map(|j| {
                let p: Complex64 = (0..=j).map(|l| binomial(j, l) * m[l] * (-zc).powu((j - l) as u32)).sum();
                p.norm().powf(1.0 / j as f64)
            })
            .fold(0.0, f64::max);
        // Roundoff splits an exact multiple zero by ~sqrt(eps); such pairs are one cluster.
        let tight = spread <= opts.cluster_tol || spread * s <= opts.cluster_abs * (1.0 + c.norm());
        let guess = c + zc * s;
        if s <= opts.min_cell * (1.0 + c.norm()) {
            out.push((guess, count));
            return Ok(());
        }
        if tight {
            if let Ok(z) = newton_refine(ctx.h, guess, count, opts) {
                if rect.expanded(1e-6 * s).contains(z) && (z - guess).norm() <= 0.1 * s {
                    out.push((z, count));
                    return Ok(());
                }
            }
            // Newton stalls inside a roundoff-split cluster; the centroid is already accurate.
            if spread * s <= opts.cluster_abs * (1.0 + c.norm()) {
                out.push((guess, count));
                return Ok(());
            }
        }
    }
    if depth > 200 {
        return Err(Error::SearchExhausted("subdivision depth".into()));
    }
    let mut last_err = None;
    for &t in SPLITS.iter() {
        let (a, b) = rect.split(t);
        let moments = ctx.moments(&a).and_then(|ma| Ok((ma, ctx.moments(&b)?)));
        let (ma, mb) = match moments {
            Ok(v) => v,
            Err(e @ (Error::ContourThroughZero(_) | Error::NonIntegerWinding(_))) => {
                last_err = Some(e);
                continue;
            }
            Err(e) => return Err(e),
        };
        let (ca, cb) = (count_of(&ma, opts)?, count_of(&mb, opts)?);
        if ca + cb != count {
            last_err = Some(Error::NonIntegerWinding((ca + cb) as f64));
            continue;
        }
        search(ctx, a, ma, depth + 1, out)?;
        search(ctx, b, mb, depth + 1, out)?;
        return Ok(());
    }
    Err(last_err.unwrap_or_else(|| Error::SearchExhausted("no admissible split".into())))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn poly(roots: Vec<(Complex64, usize)>) -> impl Fn(Complex64) -> Result<Complex64> {
        move |z| Ok(roots.iter().map(|&(r, k)| k as f64 / (z - r)).sum())
    }

    #[test]
    fn counts_and_locates_simple_roots() {
        let roots = vec![(c(0.3, 0.2), 1), (c(-0.5, -0.1), 1), (c(2.0, 2.0), 1)];
        let h = poly(roots);
        let rect = Rect::new(-1.0, 1.0, -1.0, 1.0).unwrap();
        let opts = ContourOptions::default();
        assert_eq!(winding_number(&h, &rect, &opts).unwrap(), 2);
        let z = find_zeros(&h, &rect, &opts).unwrap();
        assert_eq!(z.len(), 2);
        assert!((z[0].0 - c(-0.5, -0.1)).norm() < 1e-10 && z[0].1 == 1);
        assert!((z[1].0 - c(0.3, 0.2)).norm() < 1e-10 && z[1].1 == 1);
    }

    #[test]
    fn multiplicity_and_near_pairs() {
        let roots = vec![(c(0.1, 0.1), 3), (c(0.5, -0.5), 1), (c(0.5 + 1e-3, -0.5), 1)];
        let h = poly(roots);
        let rect = Rect::new(-1.0, 1.0, -1.0, 1.0).unwrap();
        let z = find_zeros(&h, &rect, &ContourOptions::default()).unwrap();
        let total: usize = z.iter().map(|x| x.1).sum();
        assert_eq!(total, 5);
        assert!(z.iter().any(|&(r, k)| k == 3 && (r - c(0.1, 0.1)).norm() < 1e-9));
        assert!(z.iter().any(|&(r, _)| (r - c(0.5 + 1e-3, -0.5)).norm() < 1e-9));
    }

    #[test]
    fn root_on_the_split_line_is_found() {
        // A row of zeros on the horizontal midline of a long window.
        let roots: Vec<(Complex64, usize)> = (0..12).map(|k| (c(-5.5 + k as f64, -0.3), 1 + k % 2)).collect();
        let h = poly(roots.clone());
        let rect = Rect::new(-6.0, 6.0, -0.5, -0.1).unwrap();
        let z = find_zeros(&h, &rect, &ContourOptions::default()).unwrap();
        assert_eq!(z.len(), 12);
        for (got, want) in z.iter().zip(&roots) {
            assert!((got.0 - want.0).norm() < 1e-9 && got.1 == want.1);
        }
    }

    #[test]
    fn root_on_the_contour_is_retried() {
        let h = poly(vec![(c(1.0, 0.0), 1)]);
        let rect = Rect::new(-1.0, 1.0, -1.0, 1.0).unwrap();
        let z = find_zeros(&h, &rect, &ContourOptions::default()).unwrap();
        assert_eq!(z.len(), 1);
    }

    #[test]
    fn no_zeros() {
        let h = |_z: Complex64| Ok(c(0.0, 0.0));
        let rect = Rect::new(0.0, 1.0, 0.0, 1.0).unwrap();
        assert!(find_zeros(&h, &rect, &ContourOptions::default()).unwrap().is_empty());
    }
}
