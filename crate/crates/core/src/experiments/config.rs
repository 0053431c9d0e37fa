//! TOML experiment configuration and the builtin presets.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::DomainMap;
use crate::potential::{Potential, PotentialKind};
use crate::walsh::Mode;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    /// `cos`, `eckart`, `gauss3`, `free`, or `table`.
    pub name: String,
    /// Two-column `x V` file, used when `name = "table"`.
    pub table: Option<PathBuf>,
    pub gamma: Option<f64>,
    pub nu: Option<f64>,
    /// Physical interval; defaults to the potential's own.
    pub a: Option<f64>,
    pub b: Option<f64>,
    /// Extra factor on `V` (the experiment 1 target is `scale * V`).
    #[serde(default = "one")]
    pub scale: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Partitioning {
    Adaptive,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeSelection {
    AncillaFree,
    AncillaAssisted,
    Both,
}

impl ModeSelection {
    pub fn modes(self) -> Vec<Mode> {
        match self {
            ModeSelection::AncillaFree => vec![Mode::AncillaFree],
            ModeSelection::AncillaAssisted => vec![Mode::AncillaAssisted],
            ModeSelection::Both => vec![Mode::AncillaFree, Mode::AncillaAssisted],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    #[serde(default = "two")]
    pub alpha: usize,
    pub epsilon: Vec<f64>,
    #[serde(default = "zero_ladder")]
    pub tau: Vec<f64>,
    #[serde(default = "adaptive")]
    pub partition: Partitioning,
    /// Defaults to `n`.
    pub max_depth: Option<u32>,
    #[serde(default = "free_mode")]
    pub mode: ModeSelection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsConfig {
    pub dt: f64,
    pub steps: usize,
    #[serde(default = "one_usize")]
    pub snapshot_every: usize,
    pub x0: f64,
    pub p0: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountsConfig {
    /// Main-register size of every row.
    pub n: u32,
    /// `(l, m)` pairs. When empty the potential is fitted at each epsilon.
    #[serde(default)]
    pub cells: Vec<(u32, u32)>,
    /// Rows with `n` at most this are also synthesized and tallied.
    #[serde(default = "twelve")]
    pub synth_max_n: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "out_dir")]
    pub dir: PathBuf,
    #[serde(default)]
    pub gnuplot: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: out_dir(), gnuplot: false }
    }
}

/// A full experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub potential: PotentialConfig,
    pub n: u32,
    pub fit: FitConfig,
    pub dynamics: Option<DynamicsConfig>,
    pub counts: Option<CountsConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

fn one() -> f64 {
    1.0
}
fn two() -> usize {
    2
}
fn one_usize() -> usize {
    1
}
fn twelve() -> u32 {
    12
}
fn zero_ladder() -> Vec<f64> {
    vec![0.0]
}
fn adaptive() -> Partitioning {
    Partitioning::Adaptive
}
fn free_mode() -> ModeSelection {
    ModeSelection::AncillaFree
}
fn out_dir() -> PathBuf {
    PathBuf::from("out")
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| config_err(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        // table paths are relative to the config file
        if let (Some(table), Some(dir)) = (cfg.potential.table.as_mut(), path.parent()) {
            if table.is_relative() {
                *table = dir.join(&*table);
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Builtin presets: `cos-ne1`, `eckart-ne2`, `gauss3-ne2`.
    pub fn preset(name: &str) -> Result<Self> {
        let text = match name {
            "cos-ne1" => COS_NE1,
            "eckart-ne2" => ECKART_NE2,
            "gauss3-ne2" => GAUSS3_NE2,
            other => return Err(config_err(format!("unknown preset `{other}`"))),
        };
        Self::from_toml(text)
    }

    /// Checks every field before anything runs.
    pub fn validate(&self) -> Result<()> {
        let p = &self.potential;
        if !(1..=24).contains(&self.n) {
            return Err(config_err(format!("n = {} outside 1..=24", self.n)));
        }
        if p.name == "table" && p.table.is_none() {
            return Err(config_err("potential `table` needs a `table` path"));
        }
        if p.name != "table" {
            Potential::builtin(&p.name)?;
        }
        if !p.scale.is_finite() || p.scale == 0.0 {
            return Err(config_err("potential scale must be finite and non-zero"));
        }
        if let (Some(a), Some(b)) = (p.a, p.b) {
            DomainMap::new(a, b, self.n).map_err(|e| config_err(e.to_string()))?;
        } else if p.a.is_some() != p.b.is_some() {
            return Err(config_err("give both `a` and `b` or neither"));
        }
        let f = &self.fit;
        if f.alpha > 2 {
            return Err(config_err(format!("alpha = {} unsupported (at most 2)", f.alpha)));
        }
        if f.epsilon.is_empty() || f.epsilon.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
            return Err(config_err("epsilon ladder must be non-empty and positive"));
        }
        if f.tau.is_empty() || f.tau.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
            return Err(config_err("tau ladder must be non-empty and non-negative"));
        }
        if f.max_depth.is_some_and(|d| d > self.n) {
            return Err(config_err("max_depth exceeds n"));
        }
        if let Some(d) = &self.dynamics {
            if !(d.dt > 0.0 && d.dt.is_finite()) || d.snapshot_every == 0 || !(d.sigma > 0.0) {
                return Err(config_err("dynamics needs dt > 0, sigma > 0, snapshot_every >= 1"));
            }
        }
        if let Some(c) = &self.counts {
            if c.n == 0 || c.n > 40 {
                return Err(config_err("counts.n outside 1..=40"));
            }
            if let Some(&(l, m)) = c.cells.iter().find(|&&(l, m)| !(c.n >= l && l >= m && m >= 1)) {
                return Err(config_err(format!("counts row (l={l}, m={m}) violates n >= l >= m >= 1")));
            }
        }
        Ok(())
    }

    /// The configured potential, before any time-step scaling.
    pub fn potential(&self) -> Result<Potential> {
        let p = &self.potential;
        let mut pot = match p.name.as_str() {
            "table" => Potential::from_table_file(p.table.as_deref().expect("validated"))?,
            name => Potential::builtin(name)?,
        };
        if let PotentialKind::Eckart { gamma, nu } = pot.kind() {
            pot = Potential::eckart(p.gamma.unwrap_or(*gamma), p.nu.unwrap_or(*nu));
        } else if p.gamma.is_some() || p.nu.is_some() {
            return Err(config_err("gamma/nu only apply to the eckart potential"));
        }
        Ok(pot)
    }

    pub fn domain(&self) -> Result<DomainMap> {
        let (a, b) = match (self.potential.a, self.potential.b) {
            (Some(a), Some(b)) => (a, b),
            _ => self
                .potential()?
                .default_interval()
                .ok_or_else(|| config_err("tabulated potentials need an explicit interval `a`, `b`"))?,
        };
        DomainMap::new(a, b, self.n).map_err(|e| config_err(e.to_string()))
    }

    pub fn max_depth(&self) -> u32 {
        self.fit.max_depth.unwrap_or(self.n)
    }
}

const COS_NE1: &str = r#"
n = 7

[potential]
name = "cos"

[fit]
epsilon = [1e-1, 1e-2, 1e-3, 1e-4]
tau = [0.0, 1e-6, 1e-5, 1e-4, 1e-3]
partition = "uniform"
mode = "ancilla-free"

[output]
dir = "out/cos-ne1"
"#;

const ECKART_NE2: &str = r#"
n = 10

[potential]
name = "eckart"
gamma = 100.0
nu = 0.05

[fit]
epsilon = [1e-2]
partition = "adaptive"
mode = "both"

[dynamics]
dt = 0.006
steps = 100
x0 = -3.0
p0 = 10.0
sigma = 0.5

[output]
dir = "out/eckart-ne2"
"#;

const GAUSS3_NE2: &str = r#"
n = 10

[potential]
name = "gauss3"

[fit]
epsilon = [1e-2]
partition = "adaptive"
mode = "both"

[dynamics]
dt = 0.006
steps = 100
x0 = -3.0
p0 = 10.0
sigma = 0.5

[output]
dir = "out/gauss3-ne2"
"#;
