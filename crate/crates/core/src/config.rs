//! Run configuration: flat `key = value` text plus command-line overrides.
//!
//! Real-valued keys accept plain decimals and the shorthands `2^-5`,
//! `1/3`, `pi` and `2pi`. Later assignments of the same key win.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::initial::IcKind;
use crate::params::{from_dimensionless, DimensionlessParams, ModelParams, Overrides};
use crate::stepper::Scheme;

/// Relative tolerance for `T / τ` to count as an integer.
const STEP_TOL: f64 = 1e-9;

const KEYS: &[&str] = &[
    "n",
    "lx",
    "ly",
    "lz",
    "domain",
    "scheme",
    "tau",
    "t_final",
    "L1",
    "L4",
    "alpha",
    "beta",
    "gamma",
    "tau_c",
    "kappa",
    "kappa1",
    "kappa2",
    "force",
    "ic",
    "c",
    "diag_every",
    "snapshot_every",
    "output",
    "dealias",
    "structure_factor",
    "scalar_fields",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamSpec {
    Model(ModelParams),
    Dimensionless(DimensionlessParams),
}

impl ParamSpec {
    pub fn model(&self) -> Result<ModelParams> {
        match self {
            ParamSpec::Model(p) => {
                p.validate()?;
                Ok(*p)
            }
            ParamSpec::Dimensionless(d) => from_dimensionless(d).map(|(p, _)| p),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n: [usize; 3],
    pub lengths: [f64; 3],
    pub scheme: Scheme,
    pub tau: f64,
    pub t_final: f64,
    pub params: ParamSpec,
    pub overrides: Overrides,
    pub ic: IcKind,
    pub amplitude: f64,
    /// Write a time-series row every this many steps.
    pub diag_every: u64,
    /// Write a snapshot every this many steps; 0 writes only the final state.
    pub snapshot_every: u64,
    /// Artifacts are written here; `None` runs in memory only.
    pub output: Option<PathBuf>,
    pub dealias: bool,
    pub structure_factor: bool,
    pub scalar_fields: bool,
}

fn cfg_err(key: &str, reason: impl Into<String>) -> Error {
    Error::Config { key: key.into(), reason: reason.into() }
}

/// Parses a real number with the shorthands described in the module docs.
pub fn parse_real(s: &str) -> Option<f64> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    if let Some((a, b)) = s.split_once('/') {
        return Some(parse_real(a)? / parse_real(b)?);
    }
    if let Some((a, b)) = s.split_once('^') {
        return Some(parse_real(a)?.powf(parse_real(b)?));
    }
    if let Some(pre) = s.strip_suffix("pi") {
        let pre = pre.trim().trim_end_matches('*');
        return Some(if pre.is_empty() { PI } else { parse_real(pre)? * PI });
    }
    s.parse::<f64>().ok()
}

fn parse_bool(key: &str, s: &str) -> Result<bool> {
    match s.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "on" => Ok(true),
        "0" | "false" | "no" | "off" => Ok(false),
        other => Err(cfg_err(key, format!("expected a boolean, got `{other}`"))),
    }
}

/// Splits `key = value` text; blank lines and `#` comments are skipped.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        out.push(parse_assignment(line).map_err(|e| match e {
            Error::Config { key, reason } => cfg_err(&key, format!("line {}: {reason}", no + 1)),
            e => e,
        })?);
    }
    Ok(out)
}

/// Parses one `key=value` assignment.
pub fn parse_assignment(s: &str) -> Result<(String, String)> {
    let (k, v) = s.split_once('=').ok_or_else(|| cfg_err(s.trim(), "expected `key = value`"))?;
    let (k, v) = (k.trim(), v.trim());
    if !KEYS.contains(&k) {
        return Err(cfg_err(k, "unknown key"));
    }
    Ok((k.to_string(), v.to_string()))
}

struct Table(BTreeMap<String, String>);

impl Table {
    fn raw(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn has(&self, key: &str) -> bool {
        self.0.contains_key(key)
    }

    fn real(&self, key: &str) -> Result<Option<f64>> {
        self.raw(key)
            .map(|v| {
                parse_real(v).filter(|x| x.is_finite()).ok_or_else(|| cfg_err(key, format!("not a number: `{v}`")))
            })
            .transpose()
    }

    fn required(&self, key: &str) -> Result<f64> {
        self.real(key)?.ok_or_else(|| cfg_err(key, "required"))
    }

    fn count(&self, key: &str, default: u64) -> Result<u64> {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => v.parse::<u64>().map_err(|_| cfg_err(key, format!("not a non-negative integer: `{v}`"))),
        }
    }

    fn flag(&self, key: &str) -> Result<bool> {
        self.raw(key).map(|v| parse_bool(key, v)).transpose().map(|b| b.unwrap_or(false))
    }
}

fn parse_dims(v: &str) -> Result<[usize; 3]> {
    let parts: Vec<&str> = v.split(',').map(str::trim).collect();
    let nums = parts
        .iter()
        .map(|p| p.parse::<usize>().map_err(|_| cfg_err("n", format!("not a positive integer: `{p}`"))))
        .collect::<Result<Vec<_>>>()?;
    match nums.as_slice() {
        [n] => Ok([*n; 3]),
        [a, b, c] => Ok([*a, *b, *c]),
        _ => Err(cfg_err("n", "give one size or three comma-separated sizes")),
    }
}

fn parse_params(t: &Table) -> Result<ParamSpec> {
    let dimensionless = t.has("tau_c") || t.has("kappa");
    if dimensionless {
        for k in ["alpha", "L4"] {
            if t.has(k) {
                return Err(cfg_err(k, "cannot be combined with tau_c/kappa"));
            }
        }
        Ok(ParamSpec::Dimensionless(DimensionlessParams {
            tau_c: t.required("tau_c")?,
            kappa_chir: t.required("kappa")?,
            l1: t.required("L1")?,
            beta: t.required("beta")?,
            gamma: t.required("gamma")?,
        }))
    } else {
        Ok(ParamSpec::Model(ModelParams {
            l1: t.required("L1")?,
            l4: t.required("L4")?,
            alpha: t.required("alpha")?,
            beta: t.required("beta")?,
            gamma: t.required("gamma")?,
        }))
    }
}

impl RunConfig {
    /// Builds and validates a configuration from assignments in order.
    pub fn from_pairs<I>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, String)>,
    {
        let mut map = BTreeMap::new();
        for (k, v) in pairs {
            if !KEYS.contains(&k.as_str()) {
                return Err(cfg_err(&k, "unknown key"));
            }
            map.insert(k, v);
        }
        let t = Table(map);

        let n = parse_dims(t.raw("n").ok_or_else(|| cfg_err("n", "required"))?)?;
        let mut lengths = [2.0 * PI; 3];
        if let Some(d) = t.real("domain")? {
            lengths = [d; 3];
        }
        for (i, key) in ["lx", "ly", "lz"].iter().enumerate() {
            if let Some(l) = t.real(key)? {
                lengths[i] = l;
            }
        }
        let scheme = t.raw("scheme").map(str::parse).transpose()?.unwrap_or(Scheme::Etdrk2);
        let ic = t.raw("ic").map(str::parse).transpose()?.unwrap_or(IcKind::A);
        let overrides = Overrides { kappa1: t.real("kappa1")?, kappa2: t.real("kappa2")?, force: t.flag("force")? };
        let cfg = RunConfig {
            n,
            lengths,
            scheme,
            tau: t.required("tau")?,
            t_final: t.required("t_final")?,
            params: parse_params(&t)?,
            overrides,
            ic,
            amplitude: t.real("c")?.unwrap_or(ic.default_amplitude()),
            diag_every: t.count("diag_every", 1)?,
            snapshot_every: t.count("snapshot_every", 0)?,
            output: t.raw("output").map(PathBuf::from),
            dealias: t.flag("dealias")?,
            structure_factor: t.flag("structure_factor")?,
            scalar_fields: t.flag("scalar_fields")?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file and applies `key=value` overrides after it.
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut pairs = parse_pairs(&text)?;
        for o in overrides {
            pairs.push(parse_assignment(o)?);
        }
        Self::from_pairs(pairs)
    }

    pub fn validate(&self) -> Result<()> {
        self.grid()?;
        if self.n.iter().any(|n| n % 2 != 0) {
            return Err(cfg_err("n", format!("sizes must be even, got {:?}", self.n)));
        }
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return Err(cfg_err("tau", format!("must be positive, got {}", self.tau)));
        }
        if !(self.t_final.is_finite() && self.t_final >= 0.0) {
            return Err(cfg_err("t_final", format!("must be non-negative, got {}", self.t_final)));
        }
        self.steps()?;
        if !self.amplitude.is_finite() {
            return Err(cfg_err("c", "must be finite"));
        }
        if self.diag_every == 0 {
            return Err(cfg_err("diag_every", "must be at least 1"));
        }
        self.params.model().map_err(|e| cfg_err("params", e.to_string()))?;
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.n, self.lengths).map_err(|e| cfg_err("n", e.to_string()))
    }

    /// Number of steps `T / τ`, which must be an integer.
    pub fn steps(&self) -> Result<u64> {
        steps_for(self.t_final, self.tau)
    }

    /// Serializes back to the file format; reparsing yields an equal config.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "n = {},{},{}", self.n[0], self.n[1], self.n[2]);
        for (k, l) in ["lx", "ly", "lz"].iter().zip(self.lengths) {
            let _ = writeln!(s, "{k} = {l:e}");
        }
        let _ = writeln!(s, "scheme = {}", self.scheme);
        let _ = writeln!(s, "tau = {:e}", self.tau);
        let _ = writeln!(s, "t_final = {:e}", self.t_final);
        match self.params {
            ParamSpec::Model(p) => {
                for (k, v) in [("L1", p.l1), ("L4", p.l4), ("alpha", p.alpha), ("beta", p.beta), ("gamma", p.gamma)] {
                    let _ = writeln!(s, "{k} = {v:e}");
                }
            }
            ParamSpec::Dimensionless(d) => {
                for (k, v) in
                    [("tau_c", d.tau_c), ("kappa", d.kappa_chir), ("L1", d.l1), ("beta", d.beta), ("gamma", d.gamma)]
                {
                    let _ = writeln!(s, "{k} = {v:e}");
                }
            }
        }
        if let Some(k1) = self.overrides.kappa1 {
            let _ = writeln!(s, "kappa1 = {k1:e}");
        }
        if let Some(k2) = self.overrides.kappa2 {
            let _ = writeln!(s, "kappa2 = {k2:e}");
        }
        let _ = writeln!(s, "force = {}", self.overrides.force);
        let _ = writeln!(s, "ic = {}", self.ic);
        let _ = writeln!(s, "c = {:e}", self.amplitude);
        let _ = writeln!(s, "diag_every = {}", self.diag_every);
        let _ = writeln!(s, "snapshot_every = {}", self.snapshot_every);
        if let Some(o) = &self.output {
            let _ = writeln!(s, "output = {}", o.display());
        }
        let _ = writeln!(s, "dealias = {}", self.dealias);
        let _ = writeln!(s, "structure_factor = {}", self.structure_factor);
        let _ = writeln!(s, "scalar_fields = {}", self.scalar_fields);
        s
    }
}

/// `T / τ` as an integer step count.
pub fn steps_for(t_final: f64, tau: f64) -> Result<u64> {
    let ratio = t_final / tau;
    let m = ratio.round();
    if (ratio - m).abs() > STEP_TOL * m.max(1.0) {
        return Err(cfg_err("t_final", format!("T = {t_final} is not an integer multiple of tau = {tau}")));
    }
    Ok(m as u64)
}
