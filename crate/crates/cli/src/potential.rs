//! Potential files: a header line
//! `dirac-lt-potential v1 d=<d> N=<N> L=<float> n=<n>` followed by N^d·n²
//! lines `re im`, grid point outer, then matrix row, then matrix column.

use std::fmt::Write as _;

use num_complex::Complex64;
use speclab_core::operators::{Grid, PotentialField};

const MAGIC: &str = "dirac-lt-potential";
const VERSION: &str = "v1";

/// Serialize with shortest round-trip float formatting.
pub fn to_text(v: &PotentialField) -> String {
    let g = v.grid;
    let mut out = format!("{MAGIC} {VERSION} d={} N={} L={:?} n={}\n", g.d, g.n_points, g.length, v.n);
    for z in v.samples() {
        writeln!(out, "{:?} {:?}", z.re, z.im).expect("write to string");
    }
    out
}

/// Parse a potential file. Errors name the offending line.
pub fn from_text(text: &str) -> Result<PotentialField, String> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or("empty potential file")?;
    let mut tokens = header.split_whitespace();
    if tokens.next() != Some(MAGIC) || tokens.next() != Some(VERSION) {
        return Err(format!("line 1: expected header `{MAGIC} {VERSION} d=.. N=.. L=.. n=..`"));
    }
    let (mut d, mut n_points, mut length, mut n) = (None, None, None, None);
    for t in tokens {
        let (k, v) = t.split_once('=').ok_or_else(|| format!("line 1: malformed header field {t:?}"))?;
        let bad = || format!("line 1: cannot parse {k}={v}");
        match k {
            "d" => d = Some(v.parse::<usize>().map_err(|_| bad())?),
            "N" => n_points = Some(v.parse::<usize>().map_err(|_| bad())?),
            "L" => length = Some(v.parse::<f64>().map_err(|_| bad())?),
            "n" => n = Some(v.parse::<usize>().map_err(|_| bad())?),
            _ => return Err(format!("line 1: unknown header field {k:?}")),
        }
    }
    let (d, n_points, length, n) = match (d, n_points, length, n) {
        (Some(d), Some(np), Some(l), Some(n)) => (d, np, l, n),
        _ => return Err("line 1: header needs d, N, L and n".into()),
    };
    let grid = Grid::new(d, n_points, length).map_err(|e| format!("line 1: {e}"))?;
    let expected = grid.size() * n * n;
    let mut samples = Vec::with_capacity(expected);
    for (i, line) in lines {
        let mut parts = line.split_whitespace();
        let (re, im) = match (parts.next(), parts.next(), parts.next()) {
            (Some(a), Some(b), None) => (a, b),
            _ => return Err(format!("line {}: expected `re im`", i + 1)),
        };
        let parse = |s: &str| s.parse::<f64>().map_err(|_| format!("line {}: cannot parse {s:?}", i + 1));
        samples.push(Complex64::new(parse(re)?, parse(im)?));
    }
    if samples.len() != expected {
        return Err(format!("{} entries, header announces N^d·n² = {expected}", samples.len()));
    }
    PotentialField::new(grid, n, samples).map_err(|e| e.to_string())
}
