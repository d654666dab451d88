//! Flat `key = value` run configuration with one optional section per
//! subcommand. Unknown keys are rejected with the offending line number.
//!
//! ```text
//! # global keys apply to every subcommand
//! problem = example51
//! omega = 1.0
//!
//! [solve]
//! tol = 1e-10
//! max_iter = 50
//! ```

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::manufactured::{ModeTone, Recipe};
use crate::periodic::{InterpRule, SourceModel};
use crate::spectral::Convention;

/// Configuration error with the 1-based source line.
#[derive(Debug)]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(line: usize, message: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError {
        line,
        message: message.into(),
    })
}

const SECTIONS: &[&str] = &["check", "solve", "simulate", "compare", "manufacture"];

const GLOBAL_KEYS: &[&str] = &[
    "problem", "omega", "tau", "xi", "alpha", "n_modes", "m_t", "m_x", "convention",
    "source_model", "delay_interp", "seed", "a0", "a1", "k", "l", "l1", "mu1", "l2", "mu2",
    "gamma", "f_lipschitz", "recipe", "g_amp", "bundle",
];

const SOLVE_KEYS: &[&str] = &["tol", "max_iter", "damping", "initial"];
const SIMULATE_KEYS: &[&str] = &["horizon", "dt", "history"];
const COMPARE_KEYS: &[&str] = &["horizon", "dt", "history", "threshold", "solution"];
const MANUFACTURE_KEYS: &[&str] = &["verify"];

fn keys_for(section: &str) -> &'static [&'static str] {
    match section {
        "solve" => SOLVE_KEYS,
        "simulate" => SIMULATE_KEYS,
        "compare" => COMPARE_KEYS,
        "manufacture" => MANUFACTURE_KEYS,
        _ => &[],
    }
}

/// Parsed but untyped configuration: (section, key) -> (line, value).
#[derive(Debug, Default, Clone)]
pub struct RawConfig {
    entries: BTreeMap<(String, String), (usize, String)>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        let mut section = String::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw_line.find('#') {
                Some(p) => &raw_line[..p],
                None => raw_line,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = match name.strip_suffix(']') {
                    Some(n) => n.trim(),
                    None => return err(line_no, "unterminated section header"),
                };
                if !SECTIONS.contains(&name) {
                    return err(line_no, format!("unknown section [{name}]"));
                }
                section = name.to_string();
                continue;
            }
            let (key, value) = match line.split_once('=') {
                Some((k, v)) => (k.trim(), v.trim()),
                None => return err(line_no, format!("expected key = value, got {line:?}")),
            };
            // Subcommand keys are accepted at global scope as well (sections
            // only control which subcommand an entry binds to).
            let known = if section.is_empty() {
                GLOBAL_KEYS.contains(&key)
                    || SECTIONS.iter().any(|s| keys_for(s).contains(&key))
            } else {
                GLOBAL_KEYS.contains(&key) || keys_for(&section).contains(&key)
            };
            if !known {
                return err(
                    line_no,
                    format!(
                        "unknown key {key:?}{}",
                        if section.is_empty() {
                            String::new()
                        } else {
                            format!(" in section [{section}]")
                        }
                    ),
                );
            }
            if entries
                .insert(
                    (section.clone(), key.to_string()),
                    (line_no, value.to_string()),
                )
                .is_some()
            {
                return err(line_no, format!("duplicate key {key:?}"));
            }
        }
        Ok(Self { entries })
    }

    /// Effective value of a key for the given subcommand: the section entry
    /// wins over the global one.
    fn get(&self, section: &str, key: &str) -> Option<(usize, &str)> {
        self.entries
            .get(&(section.to_string(), key.to_string()))
            .or_else(|| self.entries.get(&(String::new(), key.to_string())))
            .map(|(l, v)| (*l, v.as_str()))
    }

    /// Insert an override (used for CLI flags and bundle files). Line 0
    /// marks non-file origins.
    pub fn set(&mut self, section: &str, key: &str, value: &str) {
        self.entries.insert(
            (section.to_string(), key.to_string()),
            (0, value.to_string()),
        );
    }

    /// Global (sectionless) value of a key, if present.
    pub fn global_value(&self, key: &str) -> Option<&str> {
        self.entries
            .get(&(String::new(), key.to_string()))
            .map(|(_, v)| v.as_str())
    }

    /// Fill in entries from `other` that are absent here (layering a bundle
    /// underneath the explicit configuration).
    pub fn merge_defaults(&mut self, other: &RawConfig) {
        for (key, val) in &other.entries {
            self.entries.entry(key.clone()).or_insert_with(|| val.clone());
        }
    }
}

fn parse_as<T: FromStr>(line: usize, key: &str, v: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    v.parse::<T>()
        .map_err(|e| ConfigError {
            line,
            message: format!("key {key:?}: cannot parse {v:?}: {e}"),
        })
}

/// Fully resolved run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub problem: String,
    pub omega: f64,
    pub tau: f64,
    pub xi: f64,
    pub alpha: f64,
    pub n_modes: usize,
    pub m_t: usize,
    pub m_x: usize,
    pub convention: Convention,
    pub source_model: SourceModel,
    pub delay_interp: InterpRule,
    pub seed: u64,
    pub a0: f64,
    pub a1: f64,
    pub big_k: f64,
    pub lip_g: f64,
    pub l1: Option<f64>,
    pub mu1: Option<f64>,
    pub l2: Option<f64>,
    pub mu2: Option<f64>,
    pub gamma: Option<f64>,
    pub f_lipschitz: Option<bool>,
    pub recipe: Option<Recipe>,
    pub g_amp: f64,
    // solve
    pub tol: f64,
    pub max_iter: usize,
    pub damping: f64,
    pub initial: InitialGuess,
    // simulate / compare
    pub horizon: Option<f64>,
    pub dt: Option<f64>,
    pub history: HistorySource,
    pub threshold: f64,
    pub solution_csv: Option<String>,
    // manufacture
    pub verify: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitialGuess {
    #[default]
    Zero,
    Random,
}

impl FromStr for InitialGuess {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "zero" => Ok(Self::Zero),
            "random" => Ok(Self::Random),
            other => Err(format!("expected zero|random, got {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HistorySource {
    #[default]
    Zero,
    Periodic,
    /// Constant history equal to the basis element e_n.
    Basis(usize),
}

impl FromStr for HistorySource {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "zero" => Ok(Self::Zero),
            "periodic" => Ok(Self::Periodic),
            other => {
                if let Some(n) = other.strip_prefix('e').and_then(|d| d.parse::<usize>().ok()) {
                    if n >= 1 {
                        return Ok(Self::Basis(n));
                    }
                }
                Err(format!("expected zero|periodic|e<n>, got {other:?}"))
            }
        }
    }
}

/// Parse the recipe mini-language: tones separated by `;`, each tone a list
/// of `field:value` pairs, e.g. `mode:1 mean:0.5 sin:0.25 cos:0 harm:1`.
pub fn parse_recipe(line: usize, text: &str) -> Result<Recipe, ConfigError> {
    let mut tones = Vec::new();
    for part in text.split(';') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let mut tone = ModeTone {
            mode: 0,
            mean: 0.0,
            sin_amp: 0.0,
            cos_amp: 0.0,
            harmonic: 1,
        };
        for item in part.split_whitespace() {
            let (k, v) = match item.split_once(':') {
                Some(kv) => kv,
                None => return err(line, format!("recipe item {item:?} is not field:value")),
            };
            match k {
                "mode" => tone.mode = parse_as(line, "recipe.mode", v)?,
                "mean" => tone.mean = parse_as(line, "recipe.mean", v)?,
                "sin" => tone.sin_amp = parse_as(line, "recipe.sin", v)?,
                "cos" => tone.cos_amp = parse_as(line, "recipe.cos", v)?,
                "harm" => tone.harmonic = parse_as(line, "recipe.harm", v)?,
                other => return err(line, format!("unknown recipe field {other:?}")),
            }
        }
        if tone.mode == 0 {
            return err(line, "recipe tone needs a mode:<n> field");
        }
        tones.push(tone);
    }
    if tones.is_empty() {
        return err(line, "recipe is empty");
    }
    Ok(Recipe { tones })
}

impl RunConfig {
    /// Resolve the configuration as seen by one subcommand.
    pub fn resolve(raw: &RawConfig, section: &str) -> Result<Self, ConfigError> {
        macro_rules! get {
            ($key:literal, $default:expr) => {
                match raw.get(section, $key) {
                    Some((l, v)) => parse_as(l, $key, v)?,
                    None => $default,
                }
            };
        }
        macro_rules! get_opt {
            ($key:literal) => {
                match raw.get(section, $key) {
                    Some((l, v)) => Some(parse_as(l, $key, v)?),
                    None => None,
                }
            };
        }
        let recipe = match raw.get(section, "recipe") {
            Some((l, v)) => Some(parse_recipe(l, v)?),
            None => None,
        };
        Ok(Self {
            problem: get!("problem", "example51".to_string()),
            omega: get!("omega", 1.0),
            tau: get!("tau", 0.3),
            xi: get!("xi", 0.2),
            alpha: get!("alpha", 0.5),
            n_modes: get!("n_modes", 64),
            m_t: get!("m_t", 256),
            m_x: get!("m_x", 257),
            convention: get!("convention", Convention::default()),
            source_model: get!("source_model", SourceModel::default()),
            delay_interp: get!("delay_interp", InterpRule::default()),
            seed: get!("seed", 0),
            a0: get!("a0", 0.01),
            a1: get!("a1", 0.01),
            big_k: get!("k", 0.25),
            lip_g: get!("l", 0.01),
            l1: get_opt!("l1"),
            mu1: get_opt!("mu1"),
            l2: get_opt!("l2"),
            mu2: get_opt!("mu2"),
            gamma: get_opt!("gamma"),
            f_lipschitz: get_opt!("f_lipschitz"),
            recipe,
            g_amp: get!("g_amp", 0.01),
            tol: get!("tol", 1e-10),
            max_iter: get!("max_iter", 100),
            damping: get!("damping", 1.0),
            initial: get!("initial", InitialGuess::Zero),
            horizon: get_opt!("horizon"),
            dt: get_opt!("dt"),
            history: get!("history", HistorySource::default()),
            threshold: get!("threshold", 1e-4),
            solution_csv: get_opt!("solution"),
            verify: get!("verify", true),
        })
    }

    /// The flat key = value lines that reproduce this configuration.
    pub fn echo(&self, section: &str) -> Vec<(String, String)> {
        use crate::report::format_float as ff;
        let mut out: Vec<(String, String)> = vec![
            ("problem".into(), self.problem.clone()),
            ("omega".into(), ff(self.omega)),
            ("tau".into(), ff(self.tau)),
            ("xi".into(), ff(self.xi)),
            ("alpha".into(), ff(self.alpha)),
            ("n_modes".into(), self.n_modes.to_string()),
            ("m_t".into(), self.m_t.to_string()),
            ("m_x".into(), self.m_x.to_string()),
            ("convention".into(), self.convention.name().into()),
            (
                "source_model".into(),
                match self.source_model {
                    SourceModel::Spectral => "spectral".into(),
                    SourceModel::PiecewiseLinear => "linear".into(),
                },
            ),
            (
                "delay_interp".into(),
                match self.delay_interp {
                    InterpRule::Spectral => "spectral".into(),
                    InterpRule::Linear => "linear".into(),
                    InterpRule::GridAligned => "strict".into(),
                },
            ),
            ("seed".into(), self.seed.to_string()),
            ("a0".into(), ff(self.a0)),
            ("a1".into(), ff(self.a1)),
            ("k".into(), ff(self.big_k)),
            ("l".into(), ff(self.lip_g)),
            ("g_amp".into(), ff(self.g_amp)),
        ];
        for (k, v) in [
            ("l1", self.l1),
            ("mu1", self.mu1),
            ("l2", self.l2),
            ("mu2", self.mu2),
            ("gamma", self.gamma),
        ] {
            if let Some(v) = v {
                out.push((k.into(), ff(v)));
            }
        }
        if let Some(b) = self.f_lipschitz {
            out.push(("f_lipschitz".into(), b.to_string()));
        }
        if let Some(r) = &self.recipe {
            out.push(("recipe".into(), render_recipe(r)));
        }
        match section {
            "solve" => {
                out.push(("tol".into(), ff(self.tol)));
                out.push(("max_iter".into(), self.max_iter.to_string()));
                out.push(("damping".into(), ff(self.damping)));
                out.push((
                    "initial".into(),
                    match self.initial {
                        InitialGuess::Zero => "zero".into(),
                        InitialGuess::Random => "random".into(),
                    },
                ));
            }
            "simulate" | "compare" => {
                if let Some(h) = self.horizon {
                    out.push(("horizon".into(), ff(h)));
                }
                if let Some(dt) = self.dt {
                    out.push(("dt".into(), ff(dt)));
                }
                out.push((
                    "history".into(),
                    match self.history {
                        HistorySource::Zero => "zero".into(),
                        HistorySource::Periodic => "periodic".into(),
                        HistorySource::Basis(n) => format!("e{n}"),
                    },
                ));
                if section == "compare" {
                    out.push(("threshold".into(), ff(self.threshold)));
                }
            }
            _ => {}
        }
        out
    }
}

pub fn render_recipe(r: &Recipe) -> String {
    use crate::report::format_float as ff;
    r.tones
        .iter()
        .map(|t| {
            format!(
                "mode:{} mean:{} sin:{} cos:{} harm:{}",
                t.mode,
                ff(t.mean),
                ff(t.sin_amp),
                ff(t.cos_amp),
                t.harmonic
            )
        })
        .collect::<Vec<_>>()
        .join("; ")
}
