//! Potential energy functions on physical coordinates.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::DomainMap;

/// One Gaussian bump `gamma * exp(-(x - nu)^2 / (2 kappa^2))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gaussian {
    pub gamma: f64,
    pub nu: f64,
    pub kappa: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PotentialKind {
    Cos,
    /// `gamma * sech^2(x / nu)`
    Eckart {
        gamma: f64,
        nu: f64,
    },
    Gaussians(Vec<Gaussian>),
    /// Ascending monomial coefficients in the physical coordinate.
    Polynomial(Vec<f64>),
    /// Piecewise linear interpolation through sorted samples; constant
    /// extrapolation outside the table.
    Tabulated {
        xs: Vec<f64>,
        vs: Vec<f64>,
    },
}

/// A named potential `V(x)` multiplied by a constant `scale` (the time step
/// when building `V Δt`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Potential {
    name: String,
    kind: PotentialKind,
    scale: f64,
}

impl Potential {
    pub fn new(name: impl Into<String>, kind: PotentialKind) -> Self {
        Potential { name: name.into(), kind, scale: 1.0 }
    }

    pub fn cos() -> Self {
        Self::new("cos", PotentialKind::Cos)
    }

    pub fn eckart(gamma: f64, nu: f64) -> Self {
        Self::new("eckart", PotentialKind::Eckart { gamma, nu })
    }

    pub fn triple_gaussian() -> Self {
        let g = |gamma, nu, kappa| Gaussian { gamma, nu, kappa };
        Self::new(
            "gauss3",
            PotentialKind::Gaussians(vec![
                g(100.0, -2.0, 1.0 / 30.0),
                g(200.0 / 3.0, 0.0, 1.0 / 3.0),
                g(25.0 / 3.0, 3.0, 0.5),
            ]),
        )
    }

    pub fn polynomial(coeffs: Vec<f64>) -> Self {
        Self::new("polynomial", PotentialKind::Polynomial(coeffs))
    }

    pub fn constant(c: f64) -> Self {
        Self::polynomial(vec![c])
    }

    /// Builtin catalog: `cos`, `eckart`, `gauss3`, `free`.
    pub fn builtin(name: &str) -> Result<Self> {
        match name {
            "cos" => Ok(Self::cos()),
            "eckart" => Ok(Self::eckart(100.0, 0.05)),
            "gauss3" => Ok(Self::triple_gaussian()),
            "free" => Ok(Self { name: "free".into(), ..Self::constant(0.0) }),
            other => Err(Error::Config(format!("unknown potential `{other}`"))),
        }
    }

    /// Physical interval the builtin potentials are defined on.
    pub fn default_interval(&self) -> Option<(f64, f64)> {
        match (self.name.as_str(), &self.kind) {
            (_, PotentialKind::Cos) => Some((-std::f64::consts::PI, std::f64::consts::PI)),
            (_, PotentialKind::Eckart { .. }) | (_, PotentialKind::Gaussians(_)) => Some((-5.0, 5.0)),
            ("free", _) => Some((-5.0, 5.0)),
            _ => None,
        }
    }

    /// Loads a two-column `x V` table (whitespace or comma separated, `#`
    /// comments allowed).
    pub fn from_table_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut rows: Vec<(f64, f64)> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> =
                line.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).collect();
            let parse = |s: &str| {
                s.parse::<f64>().map_err(|_| Error::Format(format!("line {}: bad number `{s}`", lineno + 1)))
            };
            match fields.as_slice() {
                [x, v] => rows.push((parse(x)?, parse(v)?)),
                _ => return Err(Error::Format(format!("line {}: expected two columns", lineno + 1))),
            }
        }
        if rows.len() < 2 {
            return Err(Error::Format("a table needs at least two rows".into()));
        }
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        if rows.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Format("duplicate x in table".into()));
        }
        let (xs, vs) = rows.into_iter().unzip();
        let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("table").to_string();
        Ok(Self::new(name, PotentialKind::Tabulated { xs, vs }))
    }

    /// The same potential multiplied by `factor`.
    pub fn scaled(mut self, factor: f64) -> Self {
        self.scale *= factor;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> &PotentialKind {
        &self.kind
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn params(&self) -> Vec<(String, f64)> {
        let mut out = match &self.kind {
            PotentialKind::Cos => vec![],
            PotentialKind::Eckart { gamma, nu } => vec![("gamma".into(), *gamma), ("nu".into(), *nu)],
            PotentialKind::Gaussians(gs) => gs
                .iter()
                .enumerate()
                .flat_map(|(i, g)| {
                    let i = i + 1;
                    [(format!("gamma{i}"), g.gamma), (format!("nu{i}"), g.nu), (format!("kappa{i}"), g.kappa)]
                })
                .collect(),
            PotentialKind::Polynomial(cs) => {
                cs.iter().enumerate().map(|(i, c)| (format!("c{i}"), *c)).collect()
            }
            PotentialKind::Tabulated { xs, .. } => vec![("samples".into(), xs.len() as f64)],
        };
        out.push(("scale".into(), self.scale));
        out
    }

    /// `scale * V(x)` at a physical coordinate.
    pub fn evaluate(&self, x: f64) -> f64 {
        let v = match &self.kind {
            PotentialKind::Cos => x.cos(),
            PotentialKind::Eckart { gamma, nu } => {
                let s = 1.0 / (x / nu).cosh();
                gamma * s * s
            }
            PotentialKind::Gaussians(gs) => {
                gs.iter().map(|g| g.gamma * (-(x - g.nu).powi(2) / (2.0 * g.kappa * g.kappa)).exp()).sum()
            }
            PotentialKind::Polynomial(cs) => cs.iter().rev().fold(0.0, |acc, c| acc * x + c),
            PotentialKind::Tabulated { xs, vs } => interpolate(xs, vs, x),
        };
        self.scale * v
    }

    /// `scale * V` pulled back to the unit coordinate of `domain`.
    pub fn on_unit<'a>(&'a self, domain: &'a DomainMap) -> impl Fn(f64) -> f64 + 'a {
        move |u| self.evaluate(domain.to_physical(u))
    }
}

fn interpolate(xs: &[f64], vs: &[f64], x: f64) -> f64 {
    if x <= xs[0] {
        return vs[0];
    }
    if x >= xs[xs.len() - 1] {
        return vs[vs.len() - 1];
    }
    let i = xs.partition_point(|&p| p <= x) - 1;
    let t = (x - xs[i]) / (xs[i + 1] - xs[i]);
    vs[i] + t * (vs[i + 1] - vs[i])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_values() {
        let e = Potential::builtin("eckart").unwrap();
        assert!((e.evaluate(0.0) - 100.0).abs() < 1e-12);
        assert!(e.evaluate(1.0) < 1e-10);
        let g = Potential::builtin("gauss3").unwrap();
        assert!((g.evaluate(-2.0) - 100.0).abs() < 1e-5);
        assert!((g.evaluate(3.0) - 25.0 / 3.0).abs() < 1e-3);
        let c = Potential::cos().scaled(2.0);
        assert!((c.evaluate(0.0) - 2.0).abs() < 1e-15);
        assert!(Potential::builtin("nope").is_err());
    }

    #[test]
    fn table_interpolation() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.txt");
        std::fs::write(&path, "# x V\n0 0\n1, 2\n3 2\n").unwrap();
        let p = Potential::from_table_file(&path).unwrap();
        assert_eq!(p.evaluate(0.5), 1.0);
        assert_eq!(p.evaluate(2.0), 2.0);
        assert_eq!(p.evaluate(-1.0), 0.0);
        std::fs::write(&path, "0 0 1\n").unwrap();
        assert!(matches!(Potential::from_table_file(&path), Err(Error::Format(_))));
    }
}
