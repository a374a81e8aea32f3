//! Problem definition files.
//!
//! A config is a JSON document with sections
//!
//! ```json
//! {
//!   "problem":  { "f": "-u^3 + cos(t) + cos(t)^3", "M": 5.0 },
//!   "bracket":  { "alpha": "-2 - 0.5*exp(-t)", "beta": "2 + 0.5*exp(-t)" },
//!   "numerics": { "n": 2048, "abs_tol": 1e-10, "rel_tol": 1e-8, "max_iter": 600 }
//! }
//! ```
//!
//! or, for the linear problem, a `linear` section
//! `{ "sigma": "sin(t)", "M": 1.0, "mu": 0.0, "lambda": 0.0 }` instead of
//! `problem`. Exactly one of the two must be present; `bracket` is required
//! for iteration and optional otherwise. Parsing is strict: unknown keys
//! are rejected so that a typo like `lamda` cannot silently change a run.

use crate::error::{Error, Result};
use crate::expr::{Field1, Field2};
use crate::grid::Grid;
use crate::linsolve::validate_m;
use serde_json::Value;
use std::path::Path;

#[derive(Clone, Debug)]
pub struct ProblemSection {
    pub f: Field2,
    pub m: f64,
}

#[derive(Clone, Debug)]
pub struct LinearSection {
    pub sigma: Field1,
    pub m: f64,
    pub mu: f64,
    pub lambda: f64,
}

#[derive(Clone, Debug)]
pub struct BracketSection {
    pub alpha: Field1,
    pub beta: Field1,
}

#[derive(Clone, Debug)]
pub struct NumericsSection {
    pub n: Option<usize>,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl Default for NumericsSection {
    fn default() -> Self {
        Self {
            n: None,
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            max_iter: 200,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ProblemConfig {
    pub problem: Option<ProblemSection>,
    pub linear: Option<LinearSection>,
    pub bracket: Option<BracketSection>,
    pub numerics: NumericsSection,
}

impl ProblemConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_str(&text)
    }

    pub fn from_str(text: &str) -> Result<Self> {
        let root: Value = serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("invalid JSON: {e}")))?;
        let obj = root
            .as_object()
            .ok_or_else(|| Error::Config("top level must be an object".into()))?;

        for key in obj.keys() {
            if !matches!(key.as_str(), "problem" | "linear" | "bracket" | "numerics") {
                return Err(Error::Config(format!("{key}: unknown section")));
            }
        }

        let problem = match obj.get("problem") {
            Some(v) => Some(parse_problem(section(v, "problem")?)?),
            None => None,
        };
        let linear = match obj.get("linear") {
            Some(v) => Some(parse_linear(section(v, "linear")?)?),
            None => None,
        };
        let bracket = match obj.get("bracket") {
            Some(v) => Some(parse_bracket(section(v, "bracket")?)?),
            None => None,
        };
        let numerics = match obj.get("numerics") {
            Some(v) => parse_numerics(section(v, "numerics")?)?,
            None => NumericsSection::default(),
        };

        if problem.is_some() == linear.is_some() {
            return Err(Error::Config(
                "exactly one of `problem` or `linear` must be present".into(),
            ));
        }
        Ok(Self {
            problem,
            linear,
            bracket,
            numerics,
        })
    }

    /// The `M` of whichever section is present.
    pub fn m(&self) -> f64 {
        match (&self.problem, &self.linear) {
            (Some(p), _) => p.m,
            (_, Some(l)) => l.m,
            _ => unreachable!("validated at construction"),
        }
    }

    /// Resolve the grid: explicit flag, then the config, then the
    /// `PBVP_DEFAULT_N` environment variable, then the built-in default.
    pub fn resolve_grid(&self, flag_n: Option<usize>) -> Result<Grid> {
        let n = if let Some(n) = flag_n {
            n
        } else if let Some(n) = self.numerics.n {
            n
        } else if let Ok(s) = std::env::var("PBVP_DEFAULT_N") {
            s.parse::<usize>().map_err(|_| {
                Error::Config(format!("PBVP_DEFAULT_N: expected an integer, got `{s}`"))
            })?
        } else {
            crate::grid::DEFAULT_SOLVE_N
        };
        Grid::new(n)
    }
}

type Section<'a> = &'a serde_json::Map<String, Value>;

fn section<'a>(v: &'a Value, name: &str) -> Result<Section<'a>> {
    v.as_object()
        .ok_or_else(|| Error::Config(format!("{name}: expected an object")))
}

fn check_keys(map: Section, section: &str, allowed: &[&str]) -> Result<()> {
    for key in map.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(Error::Config(format!("{section}.{key}: unknown key")));
        }
    }
    Ok(())
}

fn required<'a>(map: Section<'a>, section: &str, key: &str) -> Result<&'a Value> {
    map.get(key)
        .ok_or_else(|| Error::Config(format!("{section}.{key}: required")))
}

fn number(v: &Value, what: &str) -> Result<f64> {
    v.as_f64()
        .ok_or_else(|| Error::Config(format!("{what}: expected a number")))
}

fn text<'a>(v: &'a Value, what: &str) -> Result<&'a str> {
    v.as_str()
        .ok_or_else(|| Error::Config(format!("{what}: expected a string")))
}

fn m_value(map: Section, section: &str) -> Result<f64> {
    let m = number(required(map, section, "M")?, &format!("{section}.M"))?;
    validate_m(m).map_err(|e| Error::Config(format!("{section}.M: {e}")))?;
    Ok(m)
}

fn field1(map: Section, section: &str, key: &str) -> Result<Field1> {
    let src = text(required(map, section, key)?, &format!("{section}.{key}"))?;
    Field1::parse(src).map_err(|e| Error::Config(format!("{section}.{key}: {e}")))
}

fn parse_problem(map: Section) -> Result<ProblemSection> {
    check_keys(map, "problem", &["f", "M"])?;
    let src = text(required(map, "problem", "f")?, "problem.f")?;
    let f = Field2::parse(src).map_err(|e| Error::Config(format!("problem.f: {e}")))?;
    Ok(ProblemSection {
        f,
        m: m_value(map, "problem")?,
    })
}

fn parse_linear(map: Section) -> Result<LinearSection> {
    check_keys(map, "linear", &["sigma", "M", "mu", "lambda"])?;
    let sigma = field1(map, "linear", "sigma")?;
    let m = m_value(map, "linear")?;
    let mu = match map.get("mu") {
        Some(v) => number(v, "linear.mu")?,
        None => 0.0,
    };
    let lambda = match map.get("lambda") {
        Some(v) => number(v, "linear.lambda")?,
        None => 0.0,
    };
    Ok(LinearSection {
        sigma,
        m,
        mu,
        lambda,
    })
}

fn parse_bracket(map: Section) -> Result<BracketSection> {
    check_keys(map, "bracket", &["alpha", "beta"])?;
    Ok(BracketSection {
        alpha: field1(map, "bracket", "alpha")?,
        beta: field1(map, "bracket", "beta")?,
    })
}

fn parse_numerics(map: Section) -> Result<NumericsSection> {
    check_keys(map, "numerics", &["n", "abs_tol", "rel_tol", "max_iter"])?;
    let mut out = NumericsSection::default();
    if let Some(v) = map.get("n") {
        let n = v
            .as_u64()
            .ok_or_else(|| Error::Config("numerics.n: expected a positive integer".into()))?
            as usize;
        Grid::new(n).map_err(|e| Error::Config(format!("numerics.n: {e}")))?;
        out.n = Some(n);
    }
    if let Some(v) = map.get("abs_tol") {
        out.abs_tol = number(v, "numerics.abs_tol")?;
    }
    if let Some(v) = map.get("rel_tol") {
        out.rel_tol = number(v, "numerics.rel_tol")?;
    }
    if let Some(v) = map.get("max_iter") {
        out.max_iter = v
            .as_u64()
            .ok_or_else(|| Error::Config("numerics.max_iter: expected a positive integer".into()))?
            as usize;
        if out.max_iter == 0 {
            return Err(Error::Config("numerics.max_iter: must be at least 1".into()));
        }
    }
    if !(out.abs_tol > 0.0 && out.rel_tol > 0.0) {
        return Err(Error::Config(
            "numerics: tolerances must be strictly positive".into(),
        ));
    }
    Ok(out)
}
