//! Flat `key = value` settings shared by config files, command-line flags and
//! run manifests.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use dfsphere::dfs::SphereFunction;
use dfsphere::problems::{builtin, harmonic_function, ProblemSpec, Reference, BUILTIN_NAMES};
use dfsphere::{Scheme, SchemeConfig, C64};

use crate::expr::Expr;

pub const KEYS: [&str; 19] = [
    "problem",
    "l",
    "alpha",
    "nonlinearity",
    "initial",
    "m",
    "n",
    "h",
    "tspan",
    "scheme",
    "snapshots",
    "out",
    "formats",
    "cf_poles",
    "contour_points",
    "schemes",
    "hs",
    "reference",
    "exact_rate",
];

/// Raw settings, later keys overriding earlier ones.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings(BTreeMap<String, String>);

impl Settings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut s = Self::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected key = value", no + 1))?;
            s.set(k.trim(), v.trim())
                .with_context(|| format!("line {}", no + 1))?;
        }
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<()> {
        if !KEYS.contains(&key) {
            bail!("unknown setting '{key}'");
        }
        self.0.insert(key.to_string(), value.into());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    pub fn merge(&mut self, other: &Settings) {
        for (k, v) in &other.0 {
            self.0.insert(k.clone(), v.clone());
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// One `key = value` line per setting, sorted by key.
    pub fn to_text(&self) -> String {
        self.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| anyhow!("invalid {key} '{v}': {e}"))
            })
            .transpose()
    }

    fn list(&self, key: &str) -> Option<Vec<&str>> {
        self.get(key).map(|v| {
            v.split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .collect()
        })
    }

    fn numbers(&self, key: &str) -> Result<Option<Vec<f64>>> {
        self.list(key)
            .map(|items| {
                items
                    .iter()
                    .map(|s| parse_number(s).with_context(|| format!("in {key}")))
                    .collect()
            })
            .transpose()
    }
}

/// Plain decimals or a ratio such as `1/25`.
fn parse_number(s: &str) -> Result<f64> {
    let v = match s.split_once('/') {
        Some((a, b)) => a.trim().parse::<f64>()? / b.trim().parse::<f64>()?,
        None => s.parse::<f64>()?,
    };
    if !v.is_finite() {
        bail!("'{s}' is not a finite number");
    }
    Ok(v)
}

fn parse_constant(key: &str, s: &str) -> Result<C64> {
    let e = Expr::parse(s).with_context(|| format!("invalid {key}"))?;
    if e.mentions_u() {
        bail!("{key} must be a constant, got '{s}'");
    }
    Ok(e.eval(C64::new(0.0, 0.0)))
}

/// A problem as named in the settings: a built-in, optionally with any of
/// its parts replaced.
pub fn problem_from(settings: &Settings) -> Result<ProblemSpec> {
    let name = settings.get("problem").unwrap_or("custom");
    let l: Option<usize> = settings.parsed("l")?;
    let mut problem = if name == "custom" {
        if settings.get("alpha").is_none() || settings.get("initial").is_none() {
            bail!("a custom problem needs alpha and initial");
        }
        ProblemSpec {
            name: "custom".into(),
            alpha: C64::new(0.0, 0.0),
            nonlinearity: None,
            initial: SphereFunction::from_fn(|_, _| C64::new(0.0, 0.0)),
            exact_rate: None,
        }
    } else if BUILTIN_NAMES.contains(&name) {
        builtin(name, l)?
    } else {
        bail!(
            "unknown problem '{name}' (expected one of {} or custom)",
            BUILTIN_NAMES.join(", ")
        );
    };
    let mut modified = false;
    if let Some(a) = settings.get("alpha") {
        problem.alpha = parse_constant("alpha", a)?;
        modified = true;
    }
    if let Some(src) = settings.get("nonlinearity") {
        let e = Expr::parse(src).context("invalid nonlinearity")?;
        problem.nonlinearity = if e.is_zero() {
            None
        } else {
            Some(Arc::new(move |u| e.eval(u)))
        };
        modified = true;
    }
    if let Some(init) = settings.get("initial") {
        problem.initial = initial_from(init)?;
        modified = true;
    }
    if modified {
        // the built-in exact solution no longer applies
        problem.exact_rate = None;
    }
    if let Some(r) = settings.get("exact_rate") {
        problem.exact_rate = Some(parse_constant("exact_rate", r)?);
    }
    Ok(problem)
}

/// `harmonic(l, order)`, `constant(c)` or a built-in problem name.
fn initial_from(s: &str) -> Result<SphereFunction> {
    let s = s.trim();
    if let Some(args) = s
        .strip_prefix("harmonic(")
        .and_then(|r| r.strip_suffix(')'))
    {
        let (l, order) = args
            .split_once(',')
            .ok_or_else(|| anyhow!("harmonic needs (l, order)"))?;
        let l: usize = l.trim().parse().context("harmonic degree")?;
        let order: i64 = order.trim().parse().context("harmonic order")?;
        if order.unsigned_abs() as usize > l {
            bail!("harmonic order {order} exceeds degree {l}");
        }
        return Ok(harmonic_function(l, order));
    }
    if let Some(arg) = s
        .strip_prefix("constant(")
        .and_then(|r| r.strip_suffix(')'))
    {
        let v = parse_constant("constant", arg)?;
        return Ok(SphereFunction::from_fn(move |_, _| v));
    }
    if BUILTIN_NAMES.contains(&s) {
        return Ok(builtin(s, None)?.initial);
    }
    bail!("unknown initial condition '{s}' (expected harmonic(l, order), constant(c) or a built-in problem)")
}

/// FNV-1a over the settings that define the problem.
pub fn problem_hash(settings: &Settings) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for key in [
        "problem",
        "l",
        "alpha",
        "nonlinearity",
        "initial",
        "exact_rate",
    ] {
        let part = format!("{key}={};", settings.get(key).unwrap_or(""));
        for b in part.bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    h
}

/// Everything `run` needs.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub settings: Settings,
    pub problem: ProblemSpec,
    pub m: usize,
    pub n: usize,
    pub scheme: SchemeConfig,
    pub out: PathBuf,
    pub write_binary: bool,
    pub write_ppm: bool,
}

pub fn grid_size(settings: &Settings) -> Result<(usize, usize)> {
    let m: Option<usize> = settings.parsed("m")?;
    let n: Option<usize> = settings.parsed("n")?;
    match (m, n) {
        (Some(m), Some(n)) => Ok((m, n)),
        (Some(s), None) | (None, Some(s)) => Ok((s, s)),
        (None, None) => bail!("grid size missing: set n (and optionally m)"),
    }
}

fn t_span(settings: &Settings) -> Result<(f64, f64)> {
    match settings.numbers("tspan")?.as_deref() {
        Some([a, b]) => Ok((*a, *b)),
        Some(_) => bail!("tspan needs two values"),
        None => bail!("tspan missing"),
    }
}

fn check_scheme(problem: &ProblemSpec, scheme: Scheme) -> Result<()> {
    if problem.alpha.im != 0.0 && !scheme.supports_dispersive() {
        bail!(
            "scheme {scheme} is incompatible with the dispersive problem '{}' (alpha = {}): \
             it is unstable for imaginary spectra; use etdrk4-eig or lirk4",
            problem.name,
            problem.alpha
        );
    }
    Ok(())
}

fn scheme_config(
    settings: &Settings,
    scheme: Scheme,
    h: f64,
    span: (f64, f64),
) -> Result<SchemeConfig> {
    let mut config = SchemeConfig::new(scheme, h, span);
    if let Some(p) = settings.parsed("cf_poles")? {
        config.cf_poles = p;
    }
    if let Some(p) = settings.parsed("contour_points")? {
        config.contour_points = p;
    }
    Ok(config)
}

impl RunConfig {
    pub fn from_settings(settings: &Settings) -> Result<Self> {
        let problem = problem_from(settings)?;
        let (m, n) = grid_size(settings)?;
        let h = settings
            .get("h")
            .map(parse_number)
            .transpose()?
            .ok_or_else(|| anyhow!("h missing"))?;
        let span = t_span(settings)?;
        let scheme: Scheme = settings
            .parsed("scheme")?
            .ok_or_else(|| anyhow!("scheme missing"))?;
        check_scheme(&problem, scheme)?;
        let snapshots = settings
            .numbers("snapshots")?
            .unwrap_or_else(|| vec![span.1]);
        let mut formats = settings.list("formats").unwrap_or_else(|| vec!["bin"]);
        formats.sort();
        for f in &formats {
            if !["bin", "ppm"].contains(f) {
                bail!("unknown output format '{f}' (expected bin or ppm)");
            }
        }
        Ok(Self {
            settings: settings.clone(),
            problem,
            m,
            n,
            scheme: scheme_config(settings, scheme, h, span)?.with_snapshots(snapshots),
            out: PathBuf::from(settings.get("out").unwrap_or("out")),
            write_binary: formats.contains(&"bin"),
            write_ppm: formats.contains(&"ppm"),
        })
    }
}

/// Everything `converge` needs.
#[derive(Debug, Clone)]
pub struct ConvergeConfig {
    pub problem: ProblemSpec,
    pub m: usize,
    pub n: usize,
    pub schemes: Vec<Scheme>,
    pub hs: Vec<f64>,
    pub t_span: (f64, f64),
    pub reference: Reference,
}

impl ConvergeConfig {
    pub fn from_settings(settings: &Settings) -> Result<Self> {
        let problem = problem_from(settings)?;
        let (m, n) = grid_size(settings)?;
        let schemes: Vec<Scheme> = match settings.list("schemes") {
            Some(items) => items
                .iter()
                .map(|s| s.parse::<Scheme>())
                .collect::<Result<_, _>>()?,
            None => match settings.parsed::<Scheme>("scheme")? {
                Some(s) => vec![s],
                None => bail!("schemes missing"),
            },
        };
        for &s in &schemes {
            check_scheme(&problem, s)?;
        }
        let hs = settings
            .numbers("hs")?
            .ok_or_else(|| anyhow!("hs missing"))?;
        if hs.is_empty() {
            bail!("hs is empty");
        }
        let reference = match settings.get("reference").unwrap_or("auto") {
            "auto" => Reference::Auto,
            "exact" => Reference::Exact,
            "eig-half-step" => Reference::EigHalfStep,
            other => bail!("unknown reference '{other}' (expected auto, exact or eig-half-step)"),
        };
        Ok(Self {
            problem,
            m,
            n,
            schemes,
            hs,
            t_span: t_span(settings)?,
            reference,
        })
    }
}
