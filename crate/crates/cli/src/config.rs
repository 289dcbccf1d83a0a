//! Flat `key = value` configuration with `[section]` headers.
//!
//! Every key is looked up by its dotted name (`operator.N`); keys that are
//! never read are reported as unknown so typos do not pass silently.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use num_complex::Complex64;
use speclab_core::contour::Rect;
use speclab_core::ltsum::{default_tau, WeightId};
use speclab_core::operators::PotentialGenerator;
use speclab_core::spectra::SpectrumKind;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub field: String,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "config error at line {l}, field `{}`: {}", self.field, self.message),
            None => write!(f, "config error, field `{}`: {}", self.field, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn err(field: &str, line: Option<usize>, message: impl Into<String>) -> ConfigError {
    ConfigError { field: field.to_string(), line, message: message.into() }
}

const SECTIONS: [&str; 9] =
    ["experiment", "operator", "potential", "theorem", "window", "sweep", "resolvent", "conformal", "bgk"];

/// Raw entries keyed by `section.key`, with the line each came from.
#[derive(Debug, Default)]
pub struct RawConfig {
    entries: BTreeMap<String, (String, usize)>,
    read: RefCell<BTreeSet<String>>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        let mut section = String::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            if let Some(rest) = body.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| err(body, Some(line), "unterminated section header"))?
                    .trim();
                if !SECTIONS.contains(&name) {
                    return Err(err(name, Some(line), format!("unknown section (expected one of {})", SECTIONS.join(", "))));
                }
                section = name.to_string();
                continue;
            }
            let (k, v) = body.split_once('=').ok_or_else(|| err(body, Some(line), "expected `key = value`"))?;
            let k = k.trim();
            if k.is_empty() {
                return Err(err("", Some(line), "empty key"));
            }
            if section.is_empty() {
                return Err(err(k, Some(line), "key outside of any section"));
            }
            let full = format!("{section}.{k}");
            if let Some((_, first)) = entries.get(&full) {
                return Err(err(&full, Some(line), format!("duplicate key (first set at line {first})")));
            }
            entries.insert(full, (v.trim().to_string(), line));
        }
        Ok(Self { entries, read: RefCell::new(BTreeSet::new()) })
    }

    fn raw(&self, key: &str) -> Option<(&str, usize)> {
        self.read.borrow_mut().insert(key.to_string());
        self.entries.get(key).map(|(v, l)| (v.as_str(), *l))
    }

    pub fn line(&self, key: &str) -> Option<usize> {
        self.entries.get(key).map(|(_, l)| *l)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: fmt::Display,
    {
        match self.raw(key) {
            None => Ok(None),
            Some((v, l)) => v.parse().map(Some).map_err(|e| err(key, Some(l), format!("cannot parse {v:?}: {e}"))),
        }
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T, ConfigError>
    where
        T::Err: fmt::Display,
    {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn get_list<T, F>(&self, key: &str, parse: F) -> Result<Option<Vec<T>>, ConfigError>
    where
        F: Fn(&str) -> Result<T, String>,
    {
        match self.raw(key) {
            None => Ok(None),
            Some((v, l)) => v
                .split(',')
                .map(|s| s.trim())
                .filter(|s| !s.is_empty())
                .map(|s| parse(s).map_err(|e| err(key, Some(l), e)))
                .collect::<Result<Vec<T>, _>>()
                .map(Some),
        }
    }

    pub fn complex(&self, key: &str) -> Result<Option<Complex64>, ConfigError> {
        match self.raw(key) {
            None => Ok(None),
            Some((v, l)) => parse_complex(v).map(Some).map_err(|e| err(key, Some(l), e)),
        }
    }

    /// Fails on the first entry that no accessor asked for.
    pub fn reject_unknown(&self) -> Result<(), ConfigError> {
        let read = self.read.borrow();
        match self.entries.iter().find(|(k, _)| !read.contains(*k)) {
            Some((k, (_, l))) => Err(err(k, Some(*l), "unknown key")),
            None => Ok(()),
        }
    }
}

/// `1.5`, `-2i`, `i`, `0.5+2i`, `1e-3-4.5e-2i`.
pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || format!("cannot parse {s:?} as a complex number");
    if t.is_empty() {
        return Err(bad());
    }
    let Some(body) = t.strip_suffix('i') else {
        return t.parse::<f64>().map(|re| Complex64::new(re, 0.0)).map_err(|_| bad());
    };
    // split at the last sign that is not the leading one and not an exponent sign
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let imag = |x: &str| -> Result<f64, String> {
        match x {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => x.parse::<f64>().map_err(|_| bad()),
        }
    };
    match split {
        Some(k) => Ok(Complex64::new(body[..k].parse::<f64>().map_err(|_| bad())?, imag(&body[k..])?)),
        None => Ok(Complex64::new(0.0, imag(body)?)),
    }
}

fn parse_f64(s: &str) -> Result<f64, String> {
    s.parse::<f64>().map_err(|_| format!("cannot parse {s:?} as a number"))
}

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSource {
    Zero,
    Generator(PotentialGenerator),
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BgkConfig {
    pub zeros: usize,
    pub max_multiplicity: usize,
    pub min_radius: f64,
    pub max_radius: f64,
    pub alpha: f64,
    pub tau: f64,
    pub rho_max: f64,
    pub pairs: Vec<(Complex64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub seed: u64,
    pub kind: SpectrumKind,
    pub d: usize,
    pub n_points: usize,
    pub length: f64,
    pub m: f64,
    /// Internal dimension of the Klein-Gordon model.
    pub l: usize,
    pub potential: PotentialSource,
    pub p: f64,
    pub tau: Option<f64>,
    pub b: Option<f64>,
    pub weights: Vec<WeightId>,
    pub window: Rect,
    pub nudge: f64,
    pub match_tol: f64,
    pub s_values: Vec<f64>,
    pub slope_margin: f64,
    pub lambdas: Vec<Complex64>,
    pub rs_ratio_max: f64,
    pub samples: usize,
    pub bgk: BgkConfig,
}

/// Dense dimension cap per spatial dimension (grid points).
fn max_points(d: usize) -> usize {
    match d {
        1 => 256,
        2 => 32,
        _ => 8,
    }
}

impl ExperimentConfig {
    /// Parse `text`; `seed` from the command line overrides `experiment.seed`.
    pub fn from_text(text: &str, seed: Option<u64>) -> Result<Self, ConfigError> {
        let raw = RawConfig::parse(text)?;
        let cfg = Self::from_raw(&raw, seed)?;
        raw.reject_unknown()?;
        Ok(cfg)
    }

    fn from_raw(c: &RawConfig, seed: Option<u64>) -> Result<Self, ConfigError> {
        let name: String = c.get_or("experiment.name", "experiment".to_string())?;
        let file_seed: u64 = c.get_or("experiment.seed", 0)?;
        let seed = seed.unwrap_or(file_seed);

        let kind = match c.get_or("operator.kind", "dirac".to_string())?.to_ascii_lowercase().as_str() {
            "dirac" => SpectrumKind::Dirac,
            "kg" | "klein-gordon" => SpectrumKind::KleinGordon,
            other => return Err(err("operator.kind", c.line("operator.kind"), format!("expected dirac or kg, got {other:?}"))),
        };
        let d: usize = c.get_or("operator.d", 1)?;
        if !(1..=3).contains(&d) {
            return Err(err("operator.d", c.line("operator.d"), format!("d must be 1, 2 or 3, got {d}")));
        }
        let n_points: usize = c.get_or("operator.N", 32)?;
        if n_points < 2 || n_points % 2 != 0 {
            return Err(err("operator.N", c.line("operator.N"), format!("N must be even and at least 2, got {n_points}")));
        }
        if n_points > max_points(d) {
            return Err(err(
                "operator.N",
                c.line("operator.N"),
                format!("N = {n_points} exceeds the dense cap {} for d = {d}", max_points(d)),
            ));
        }
        let length: f64 = c.get_or("operator.L", 2.0 * std::f64::consts::PI)?;
        if !(length > 0.0 && length.is_finite()) {
            return Err(err("operator.L", c.line("operator.L"), "L must be positive"));
        }
        let m: f64 = c.get_or("operator.m", 1.0)?;
        if !(m >= 0.0 && m.is_finite()) {
            return Err(err("operator.m", c.line("operator.m"), "m must be >= 0"));
        }
        let l: usize = c.get_or("operator.l", 2)?;
        if l == 0 {
            return Err(err("operator.l", c.line("operator.l"), "l must be positive"));
        }

        let potential = Self::potential(c, d, seed)?;

        let p: f64 = c.get_or("theorem.p", 2.0)?;
        if !(p > d as f64 && p.is_finite()) {
            return Err(err("theorem.p", c.line("theorem.p"), format!("need p > d = {d}, got {p}")));
        }
        let tau: Option<f64> = c.get("theorem.tau")?;
        let b: Option<f64> = c.get("theorem.b")?;
        if let Some(b) = b {
            if !(b > 0.0 && b.is_finite()) {
                return Err(err("theorem.b", c.line("theorem.b"), "b must be positive"));
            }
        }
        let weights = match c.get_list("theorem.weights", |s| s.parse::<WeightId>().map_err(|e| e.to_string()))? {
            Some(w) if !w.is_empty() => w,
            Some(_) => return Err(err("theorem.weights", c.line("theorem.weights"), "empty weight list")),
            None => vec![match (kind, m > 0.0) {
                (SpectrumKind::Dirac, true) => WeightId::Eq01,
                (SpectrumKind::Dirac, false) => WeightId::Eq03,
                (SpectrumKind::KleinGordon, _) => WeightId::KGbyH,
            }],
        };
        for w in &weights {
            if w.kind() != kind {
                return Err(err(
                    "theorem.weights",
                    c.line("theorem.weights"),
                    format!("weight {w} belongs to the other operator family"),
                ));
            }
        }

        let scale = m.max(1.0);
        let window = Rect::new(
            c.get_or("window.re_min", -6.5 * scale)?,
            c.get_or("window.re_max", 6.5 * scale)?,
            c.get_or("window.im_min", -2.0 * scale)?,
            c.get_or("window.im_max", -0.15)?,
        )
        .map_err(|e| err("window", c.line("window.re_min"), e.to_string()))?;
        let nudge: f64 = c.get_or("window.nudge", 0.1)?;
        let match_tol: f64 = c.get_or("window.match_tol", 1e-6)?;

        let s_values = c
            .get_list("sweep.s", parse_f64)?
            .unwrap_or_else(|| (1..=10).map(|i| i as f64 / 10.0).collect());
        if s_values.len() < 2 || s_values.iter().any(|&s| !(s > 0.0 && s <= 1.0)) {
            return Err(err("sweep.s", c.line("sweep.s"), "need at least two scales in (0, 1]"));
        }
        let slope_margin: f64 = c.get_or("sweep.slope_margin", 0.3)?;

        let lambdas = c.get_list("resolvent.lambda", parse_complex)?.unwrap_or_else(|| {
            vec![Complex64::new(0.0, 1.0), Complex64::new(0.5, 0.5), Complex64::new(2.0, 0.25), Complex64::new(-3.0, 1.0)]
        });
        let rs_ratio_max: f64 = c.get_or("resolvent.ratio_max", if p == 2.0 { 1.0 + 1e-9 } else { 1.05 })?;

        let samples: usize = c.get_or("conformal.samples", 10_000)?;
        if samples == 0 {
            return Err(err("conformal.samples", c.line("conformal.samples"), "need at least one sample"));
        }

        let bgk = Self::bgk(c)?;

        Ok(Self {
            name,
            seed,
            kind,
            d,
            n_points,
            length,
            m,
            l,
            potential,
            p,
            tau,
            b,
            weights,
            window,
            nudge,
            match_tol,
            s_values,
            slope_margin,
            lambdas,
            rs_ratio_max,
            samples,
            bgk,
        })
    }

    fn potential(c: &RawConfig, d: usize, seed: u64) -> Result<PotentialSource, ConfigError> {
        let source = c.get_or("potential.source", "zero".to_string())?;
        let line = c.line("potential.source");
        match source.as_str() {
            "zero" => Ok(PotentialSource::Zero),
            "file" => {
                let path: Option<String> = c.get("potential.file")?;
                path.map(|p| PotentialSource::File(PathBuf::from(p)))
                    .ok_or_else(|| err("potential.file", line, "source = file needs a path"))
            }
            "generator" => {
                let name: String =
                    c.get("potential.generator")?.ok_or_else(|| err("potential.generator", line, "missing generator name"))?;
                let gl = c.line("potential.generator");
                let gen = match name.as_str() {
                    "constant-antiherm" => PotentialGenerator::ConstantAntiHermitian { gamma: c.get_or("potential.gamma", 0.3)? },
                    "gaussian-bump" => {
                        let center =
                            c.get_list("potential.center", parse_f64)?.unwrap_or_else(|| vec![std::f64::consts::PI; d]);
                        if center.len() != d {
                            return Err(err(
                                "potential.center",
                                c.line("potential.center"),
                                format!("{} coordinates for d = {d}", center.len()),
                            ));
                        }
                        let sigma: f64 = c.get_or("potential.sigma", 1.0)?;
                        if !(sigma > 0.0) {
                            return Err(err("potential.sigma", c.line("potential.sigma"), "sigma must be positive"));
                        }
                        let amp = c.complex("potential.amp")?.unwrap_or(Complex64::new(1.0, 0.0));
                        PotentialGenerator::GaussianBump { amp, sigma, center }
                    }
                    "random-complex" => PotentialGenerator::RandomComplex {
                        seed: c.get_or("potential.seed", seed)?,
                        amp: c.get_or("potential.amp", 1.0)?,
                    },
                    other => {
                        return Err(err(
                            "potential.generator",
                            gl,
                            format!("unknown generator {other:?} (constant-antiherm, gaussian-bump, random-complex)"),
                        ))
                    }
                };
                Ok(PotentialSource::Generator(gen))
            }
            other => Err(err("potential.source", line, format!("expected zero, generator or file, got {other:?}"))),
        }
    }

    fn bgk(c: &RawConfig) -> Result<BgkConfig, ConfigError> {
        let zeros: usize = c.get_or("bgk.zeros", 20)?;
        let max_multiplicity: usize = c.get_or("bgk.max_multiplicity", 3)?;
        let min_radius: f64 = c.get_or("bgk.min_radius", 0.3)?;
        let max_radius: f64 = c.get_or("bgk.max_radius", 0.95)?;
        if !(0.0 < min_radius && min_radius <= max_radius && max_radius < 1.0) {
            return Err(err("bgk.min_radius", c.line("bgk.min_radius"), "need 0 < min_radius <= max_radius < 1"));
        }
        if max_multiplicity == 0 {
            return Err(err("bgk.max_multiplicity", c.line("bgk.max_multiplicity"), "must be positive"));
        }
        let points = c
            .get_list("bgk.points", parse_complex)?
            .unwrap_or_else(|| vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)]);
        let betas = c.get_list("bgk.betas", parse_f64)?.unwrap_or_else(|| vec![1.0; points.len()]);
        if betas.len() != points.len() {
            return Err(err("bgk.betas", c.line("bgk.betas"), format!("{} betas for {} points", betas.len(), points.len())));
        }
        Ok(BgkConfig {
            zeros,
            max_multiplicity,
            min_radius,
            max_radius,
            alpha: c.get_or("bgk.alpha", 1.0)?,
            tau: c.get_or("bgk.tau", 0.25)?,
            rho_max: c.get_or("bgk.rho_max", 0.999)?,
            pairs: points.into_iter().zip(betas).collect(),
        })
    }

    /// τ for one weight: the configured value or min{p − d, 1}/4.
    pub fn tau_for(&self) -> f64 {
        self.tau.unwrap_or_else(|| default_tau(self.p, self.d))
    }
}
