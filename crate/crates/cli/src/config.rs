//! Problem configuration: a flat `key = value` file, overridden by flags.
//!
//! ```text
//! # comment
//! function = x*(1-x)
//! interval = 0, 1
//! n = 1
//! m = 1
//! degree = 2
//! ```
//!
//! | key               | default    |
//! |-------------------|------------|
//! | `precision`       | 50 digits  |
//! | `tol`             | 1e-12      |
//! | `grid_multiplier` | 64         |
//! | `margin`          | 1.000001   |
//! | `max_iterations`  | 50         |
//! | `n`, `m`          | 0          |
//! | `degree`          | 1          |
//!
//! Quadrature keys: `quad_nodes_per_panel`, `quad_series_halfwidth`,
//! `quad_tail_cutoff`, `quad_node_budget`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use ineqcert::certify::ProofSettings;
use ineqcert::expr::Expression;
use ineqcert::precision::{parse_rational, Precision};
use ineqcert::quad::QuadConfig;
use ineqcert::remez::RemezConfig;
use rug::{Float, Rational};

const KEYS: &[&str] = &[
    "function",
    "interval",
    "n",
    "m",
    "degree",
    "precision",
    "tol",
    "grid_multiplier",
    "max_iterations",
    "margin",
    "alpha",
    "beta",
    "out",
    "quad_nodes_per_panel",
    "quad_series_halfwidth",
    "quad_tail_cutoff",
    "quad_node_budget",
];

/// Raw key/value text, before any numeric parsing.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    values: BTreeMap<String, String>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<RawConfig> {
        let mut values = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected `key = value`", i + 1))?;
            let key = key.trim().to_string();
            if !KEYS.contains(&key.as_str()) {
                bail!("line {}: unknown key {key:?}", i + 1);
            }
            if values
                .insert(key.clone(), value.trim().to_string())
                .is_some()
            {
                bail!("line {}: duplicate key {key:?}", i + 1);
            }
        }
        Ok(RawConfig { values })
    }

    pub fn load(path: &Path) -> Result<RawConfig> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        RawConfig::parse(&text).with_context(|| format!("in {}", path.display()))
    }

    /// Flag values win over file values.
    pub fn set(&mut self, key: &str, value: Option<String>) {
        debug_assert!(KEYS.contains(&key));
        if let Some(v) = value {
            self.values.insert(key.to_string(), v);
        }
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn require(&self, key: &str) -> Result<&str> {
        self.get(key)
            .ok_or_else(|| anyhow!("missing required key {key:?}"))
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)
            .map(|v| v.parse::<T>().map_err(|e| anyhow!("{key} = {v:?}: {e}")))
            .transpose()
    }

    pub fn precision(&self) -> Result<Precision> {
        match self.parsed::<u32>("precision")? {
            Some(d) => Ok(Precision::new(d)?),
            None => Ok(Precision::default()),
        }
    }

    pub fn function(&self) -> Result<Expression> {
        let text = self.require("function")?;
        Expression::parse(text).map_err(|e| anyhow!("function {text:?}: {e}"))
    }

    pub fn interval(&self, precision: Precision) -> Result<(Float, Float)> {
        let text = self.require("interval")?;
        let (a, b) = text
            .split_once(',')
            .ok_or_else(|| anyhow!("interval {text:?}: expected `a,b`"))?;
        let a = precision.parse_decimal(a.trim())?;
        let b = precision.parse_decimal(b.trim())?;
        if a >= b {
            bail!("interval {text:?}: need a < b");
        }
        Ok((a, b))
    }

    pub fn exponent(&self, key: &str) -> Result<Rational> {
        match self.get(key) {
            None => Ok(Rational::new()),
            Some(v) => {
                let r = parse_rational(v).map_err(|e| anyhow!("{key}: {e}"))?;
                if r < 0 {
                    bail!("{key} = {v} must be non-negative");
                }
                Ok(r)
            }
        }
    }

    pub fn degree(&self) -> Result<usize> {
        Ok(self.parsed("degree")?.unwrap_or(1))
    }

    pub fn remez(&self) -> Result<RemezConfig> {
        let mut c = RemezConfig::default();
        if let Some(t) = self.parsed::<f64>("tol")? {
            if !(t > 0.0 && t.is_finite()) {
                bail!("tol must be positive");
            }
            c.tol = t;
        }
        if let Some(g) = self.parsed("grid_multiplier")? {
            c.grid_multiplier = g;
        }
        if let Some(i) = self.parsed("max_iterations")? {
            c.max_iterations = i;
        }
        Ok(c)
    }

    pub fn quad(&self) -> Result<QuadConfig> {
        let mut q = QuadConfig::default();
        if let Some(v) = self.parsed("quad_nodes_per_panel")? {
            q.nodes_per_panel = v;
        }
        if let Some(v) = self.parsed("quad_series_halfwidth")? {
            q.series_halfwidth = v;
        }
        if let Some(v) = self.parsed::<f64>("quad_tail_cutoff")? {
            q.tail_cutoff = Some(v);
        }
        if let Some(v) = self.parsed("quad_node_budget")? {
            q.node_budget = v;
        }
        Ok(q)
    }

    pub fn settings(&self) -> Result<ProofSettings> {
        let precision = self.precision()?;
        let mut s = ProofSettings::new(precision);
        s.remez = self.remez()?;
        s.quad = self.quad()?;
        if let Some(m) = self.get("margin") {
            s.margin_factor = precision.parse_decimal(m)?;
        }
        s.alpha_override = self
            .get("alpha")
            .map(|v| precision.parse_decimal(v))
            .transpose()?;
        s.beta_override = self
            .get("beta")
            .map(|v| precision.parse_decimal(v))
            .transpose()?;
        Ok(s)
    }

    pub fn out(&self) -> Option<PathBuf> {
        self.get("out").map(PathBuf::from)
    }
}
