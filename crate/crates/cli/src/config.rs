//! Run configuration: a flat, INI-style file.
//!
//! ```text
//! # comment
//! [market]
//! r = 0.02
//! mu = 0.1
//! sigma = 0.3
//!
//! [preferences]
//! p = 0.55
//! terminal = true
//!
//! [discount]
//! kind = type1        # exponential | type1 | type2
//! lambda = 0.998
//! rho1 = 0.088901
//! rho2 = 0.068901
//!
//! [finite]            # optional
//! T = 1
//! steps = 200
//! demo_times = 0, 0.25, 0.5
//!
//! [simulation]        # optional, defaults shown by `to_ini`
//! x0 = 1
//! n_paths = 100000
//! n_steps = 1000
//! horizon = 100
//! seed = 0
//!
//! [output]
//! dir = out
//! ```
//!
//! Unknown sections and keys are rejected, as are keys that do not belong to
//! the chosen discount kind.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use merton_equilibrium::{
    CrraPreferencesF64, DiscountError, DiscountSpecF64, MarketError, MarketParamsF64, PreferenceError,
    SimConfigF64, VerificationError,
};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{}: {message}", if *line == 0 { "override".to_string() } else { format!("line {line}") })]
pub struct ParseError {
    /// 1-based line in the config text; 0 for command-line overrides.
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidationError {
    #[error("missing required key {section}.{key}")]
    Missing { section: &'static str, key: &'static str },
    #[error("[market] {0}")]
    Market(#[from] MarketError),
    #[error("[preferences] {0}")]
    Preferences(#[from] PreferenceError),
    #[error("[discount] {0}")]
    Discount(#[from] DiscountError),
    #[error("[simulation] {0}")]
    Simulation(#[from] VerificationError),
    #[error("[finite] {0}")]
    Finite(&'static str),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Validation(#[from] ValidationError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FiniteSettings {
    pub horizon: f64,
    pub steps: usize,
    /// Start times for `demo-inconsistency`; `None` means `{0, T/4, T/2}`.
    pub demo_times: Option<Vec<f64>>,
}

impl FiniteSettings {
    pub fn demo_times(&self) -> Vec<f64> {
        self.demo_times
            .clone()
            .unwrap_or_else(|| vec![0.0, 0.25 * self.horizon, 0.5 * self.horizon])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub market: MarketParamsF64,
    pub preferences: CrraPreferencesF64,
    pub discount: DiscountSpecF64,
    pub finite: Option<FiniteSettings>,
    pub simulation: SimConfigF64,
    pub output_dir: PathBuf,
}

pub const DEFAULT_STEPS: usize = 200;
pub const DEFAULT_OUTPUT_DIR: &str = "out";

pub fn default_simulation() -> SimConfigF64 {
    SimConfigF64 {
        x0: 1.0,
        n_paths: 100_000,
        n_steps: 1_000,
        horizon: 100.0,
        seed: 0,
    }
}

const SECTIONS: &[(&str, &[&str])] = &[
    ("market", &["r", "mu", "sigma"]),
    ("preferences", &["p", "terminal"]),
    ("discount", &["kind", "delta", "lambda", "rho1", "rho2", "rho"]),
    ("finite", &["T", "steps", "demo_times"]),
    ("simulation", &["x0", "n_paths", "n_steps", "horizon", "seed"]),
    ("output", &["dir"]),
];

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    line: usize,
}

/// Section name to key to value, as read from text plus overrides.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    sections: BTreeMap<String, BTreeMap<String, Entry>>,
}

fn known_key(section: &str, key: &str) -> bool {
    SECTIONS
        .iter()
        .any(|(s, keys)| *s == section && keys.contains(&key))
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let mut raw = RawConfig::default();
        let mut current: Option<String> = None;
        for (i, full) in text.lines().enumerate() {
            let line = i + 1;
            let err = |message: String| ParseError { line, message };
            let content = full.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| err(format!("malformed section header `{content}`")))?
                    .trim();
                if !SECTIONS.iter().any(|(s, _)| *s == name) {
                    return Err(err(format!("unknown section [{name}]")));
                }
                raw.sections.entry(name.to_string()).or_default();
                current = Some(name.to_string());
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| err(format!("expected key=value, found `{content}`")))?;
            let (key, value) = (key.trim(), value.trim());
            let section = current
                .as_deref()
                .ok_or_else(|| err(format!("key `{key}` outside any section")))?;
            raw.insert(section, key, value, line)?;
        }
        Ok(raw)
    }

    fn insert(&mut self, section: &str, key: &str, value: &str, line: usize) -> Result<(), ParseError> {
        if !known_key(section, key) {
            return Err(ParseError {
                line,
                message: format!("unknown key `{key}` in [{section}]"),
            });
        }
        let entries = self.sections.entry(section.to_string()).or_default();
        if let Some(prev) = entries.get(key) {
            if line != 0 {
                return Err(ParseError {
                    line,
                    message: format!("duplicate key `{key}` in [{section}] (first set on line {})", prev.line),
                });
            }
        }
        entries.insert(
            key.to_string(),
            Entry {
                value: value.to_string(),
                line,
            },
        );
        Ok(())
    }

    /// Applies a `section.key=value` override.
    pub fn set(&mut self, assignment: &str) -> Result<(), ParseError> {
        let err = |message: String| ParseError { line: 0, message };
        let (path, value) = assignment
            .split_once('=')
            .ok_or_else(|| err(format!("override `{assignment}` is not section.key=value")))?;
        let (section, key) = path
            .trim()
            .split_once('.')
            .ok_or_else(|| err(format!("override `{assignment}` is not section.key=value")))?;
        if !SECTIONS.iter().any(|(s, _)| *s == section) {
            return Err(err(format!("unknown section [{section}]")));
        }
        self.insert(section, key, value.trim(), 0)
    }

    fn get(&self, section: &str, key: &str) -> Option<&Entry> {
        self.sections.get(section)?.get(key)
    }

    fn has_section(&self, section: &str) -> bool {
        self.sections.contains_key(section)
    }

    fn number(&self, section: &'static str, key: &'static str) -> Result<Option<f64>, ConfigError> {
        let Some(e) = self.get(section, key) else {
            return Ok(None);
        };
        let v: f64 = e.value.parse().map_err(|_| ParseError {
            line: e.line,
            message: format!("{section}.{key}: `{}` is not a number", e.value),
        })?;
        if !v.is_finite() {
            return Err(ParseError {
                line: e.line,
                message: format!("{section}.{key}: `{}` is not finite", e.value),
            }
            .into());
        }
        Ok(Some(v))
    }

    fn required(&self, section: &'static str, key: &'static str) -> Result<f64, ConfigError> {
        self.number(section, key)?
            .ok_or(ValidationError::Missing { section, key }.into())
    }

    fn integer<I: std::str::FromStr>(&self, section: &'static str, key: &'static str) -> Result<Option<I>, ConfigError> {
        let Some(e) = self.get(section, key) else {
            return Ok(None);
        };
        e.value.parse().map(Some).map_err(|_| {
            ParseError {
                line: e.line,
                message: format!("{section}.{key}: `{}` is not a non-negative integer", e.value),
            }
            .into()
        })
    }

    fn flag(&self, section: &'static str, key: &'static str) -> Result<Option<bool>, ConfigError> {
        let Some(e) = self.get(section, key) else {
            return Ok(None);
        };
        match e.value.as_str() {
            "true" => Ok(Some(true)),
            "false" => Ok(Some(false)),
            other => Err(ParseError {
                line: e.line,
                message: format!("{section}.{key}: `{other}` is not true or false"),
            }
            .into()),
        }
    }

    fn discount(&self) -> Result<DiscountSpecF64, ConfigError> {
        let kind = self
            .get("discount", "kind")
            .ok_or(ValidationError::Missing {
                section: "discount",
                key: "kind",
            })?;
        let allowed: &[&str] = match kind.value.as_str() {
            "exponential" => &["kind", "delta"],
            "type1" => &["kind", "lambda", "rho1", "rho2"],
            "type2" => &["kind", "lambda", "rho"],
            other => {
                return Err(ParseError {
                    line: kind.line,
                    message: format!("unknown discount kind `{other}` (expected exponential, type1 or type2)"),
                }
                .into())
            }
        };
        for (key, e) in self.sections.get("discount").into_iter().flatten() {
            if !allowed.contains(&key.as_str()) {
                return Err(ParseError {
                    line: e.line,
                    message: format!("key `{key}` does not apply to discount kind `{}`", kind.value),
                }
                .into());
            }
        }
        let spec = match kind.value.as_str() {
            "exponential" => DiscountSpecF64::Exponential {
                delta: self.required("discount", "delta")?,
            },
            "type1" => DiscountSpecF64::TypeI {
                lambda: self.required("discount", "lambda")?,
                rho1: self.required("discount", "rho1")?,
                rho2: self.required("discount", "rho2")?,
            },
            _ => DiscountSpecF64::TypeII {
                lambda: self.required("discount", "lambda")?,
                rho: self.required("discount", "rho")?,
            },
        };
        spec.validate().map_err(ValidationError::from)?;
        Ok(spec)
    }

    fn finite(&self) -> Result<Option<FiniteSettings>, ConfigError> {
        if !self.has_section("finite") {
            return Ok(None);
        }
        let horizon = self.required("finite", "T")?;
        if !(horizon > 0.0) {
            return Err(ValidationError::Finite("T must be positive").into());
        }
        let steps = self.integer("finite", "steps")?.unwrap_or(DEFAULT_STEPS);
        if steps < merton_equilibrium::finite_horizon::MIN_STEPS {
            return Err(ValidationError::Finite("steps must be at least 10").into());
        }
        let demo_times = match self.get("finite", "demo_times") {
            None => None,
            Some(e) => {
                let mut times = Vec::new();
                for item in e.value.split(',') {
                    let t: f64 = item.trim().parse().map_err(|_| ParseError {
                        line: e.line,
                        message: format!("finite.demo_times: `{}` is not a number", item.trim()),
                    })?;
                    if !(t >= 0.0 && t < horizon) {
                        return Err(ValidationError::Finite("demo_times must lie in [0, T)").into());
                    }
                    times.push(t);
                }
                Some(times)
            }
        };
        Ok(Some(FiniteSettings {
            horizon,
            steps,
            demo_times,
        }))
    }

    fn simulation(&self) -> Result<SimConfigF64, ConfigError> {
        let d = default_simulation();
        let sim = SimConfigF64 {
            x0: self.number("simulation", "x0")?.unwrap_or(d.x0),
            n_paths: self.integer("simulation", "n_paths")?.unwrap_or(d.n_paths),
            n_steps: self.integer("simulation", "n_steps")?.unwrap_or(d.n_steps),
            horizon: self.number("simulation", "horizon")?.unwrap_or(d.horizon),
            seed: self.integer("simulation", "seed")?.unwrap_or(d.seed),
        };
        sim.validate().map_err(ValidationError::from)?;
        Ok(sim)
    }

    pub fn build(&self) -> Result<RunConfig, ConfigError> {
        let market = MarketParamsF64 {
            r: self.required("market", "r")?,
            mu: self.required("market", "mu")?,
            sigma: self.required("market", "sigma")?,
        };
        let preferences = CrraPreferencesF64 {
            p: self.required("preferences", "p")?,
            include_terminal: self.flag("preferences", "terminal")?.unwrap_or(true),
        };
        let discount = self.discount()?;
        market.validate().map_err(ValidationError::from)?;
        preferences.validate().map_err(ValidationError::from)?;
        Ok(RunConfig {
            market,
            preferences,
            discount,
            finite: self.finite()?,
            simulation: self.simulation()?,
            output_dir: self
                .get("output", "dir")
                .map(|e| PathBuf::from(&e.value))
                .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR)),
        })
    }
}

/// Parses and validates a config text.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    RawConfig::parse(text)?.build()
}

/// Parses, applies `section.key=value` overrides in order, then validates.
pub fn parse_with_overrides<S: AsRef<str>>(text: &str, overrides: &[S]) -> Result<RunConfig, ConfigError> {
    let mut raw = RawConfig::parse(text)?;
    for o in overrides {
        raw.set(o.as_ref())?;
    }
    raw.build()
}

impl RunConfig {
    /// Serializes every field; `parse_config(&c.to_ini()) == Ok(c)`.
    pub fn to_ini(&self) -> String {
        let mut s = String::new();
        let m = &self.market;
        let _ = writeln!(s, "[market]\nr = {}\nmu = {}\nsigma = {}\n", m.r, m.mu, m.sigma);
        let p = &self.preferences;
        let _ = writeln!(s, "[preferences]\np = {}\nterminal = {}\n", p.p, p.include_terminal);
        let _ = match self.discount {
            DiscountSpecF64::Exponential { delta } => {
                writeln!(s, "[discount]\nkind = exponential\ndelta = {delta}\n")
            }
            DiscountSpecF64::TypeI { lambda, rho1, rho2 } => writeln!(
                s,
                "[discount]\nkind = type1\nlambda = {lambda}\nrho1 = {rho1}\nrho2 = {rho2}\n"
            ),
            DiscountSpecF64::TypeII { lambda, rho } => {
                writeln!(s, "[discount]\nkind = type2\nlambda = {lambda}\nrho = {rho}\n")
            }
        };
        if let Some(f) = &self.finite {
            let _ = writeln!(s, "[finite]\nT = {}\nsteps = {}", f.horizon, f.steps);
            if let Some(times) = &f.demo_times {
                let list: Vec<String> = times.iter().map(|t| t.to_string()).collect();
                let _ = writeln!(s, "demo_times = {}", list.join(", "));
            }
            s.push('\n');
        }
        let sim = &self.simulation;
        let _ = writeln!(
            s,
            "[simulation]\nx0 = {}\nn_paths = {}\nn_steps = {}\nhorizon = {}\nseed = {}\n",
            sim.x0, sim.n_paths, sim.n_steps, sim.horizon, sim.seed
        );
        let _ = writeln!(s, "[output]\ndir = {}", self.output_dir.display());
        s
    }
}
