//! Piecewise polynomial ε-approximation on dyadic leaves.
//!
//! Each leaf is fit by interpolation at the α + 1 Chebyshev extreme points
//! of the leaf, and certified by the maximum deviation over a uniform probe grid.
//! The probe grid always contains the mesh points of the leaf, so a passing
//! fit bounds `|Ṽ(x_k) − f(x_k)|` at every mesh point.

use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};
use crate::grid::{partition_from_leaves, CellPartition, DomainMap, DyadicInterval};
use crate::potential::Potential;

/// Minimum probe count per leaf.
pub const MIN_PROBES: usize = 257;

/// One leaf of a piecewise polynomial: ascending monomial coefficients in the
/// unit coordinate `u`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Leaf {
    pub interval: DyadicInterval,
    pub coeffs: Vec<f64>,
    pub error: f64,
}

/// Piecewise degree-α polynomial on `[0, 1)` with dyadic knots.
///
/// Each leaf carries the label of its subdomain. Leaves built by the fitters
/// are labeled left to right, one subdomain per leaf; [`PiecewisePoly::from_partition`]
/// instead gives every cell of an arbitrary partition its own leaf.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewisePoly {
    alpha: usize,
    domain: DomainMap,
    leaves: Vec<Leaf>,
    labels: Vec<u32>,
    epsilon: f64,
}

impl PiecewisePoly {
    /// Assembles a piecewise polynomial from leaves; they are sorted left to
    /// right and must tile `[0, 1)`.
    pub fn new(alpha: usize, domain: DomainMap, mut leaves: Vec<Leaf>) -> Result<Self> {
        leaves.sort_by_key(|leaf| leaf.interval.index << (62 - leaf.interval.depth));
        let intervals: Vec<DyadicInterval> = leaves.iter().map(|lf| lf.interval).collect();
        partition_from_leaves(&intervals)?;
        for leaf in &mut leaves {
            if leaf.coeffs.len() > alpha + 1 || leaf.coeffs.iter().any(|c| !c.is_finite()) {
                return arg("leaf coefficients must be finite with at most alpha + 1 entries");
            }
            leaf.coeffs.resize(alpha + 1, 0.0);
        }
        let epsilon = leaves.iter().map(|lf| lf.error).fold(0.0, f64::max);
        let labels = (0..leaves.len() as u32).collect();
        Ok(PiecewisePoly { alpha, domain, leaves, labels, epsilon })
    }

    /// One sub-function per subdomain of `partition`, in label order.
    pub fn from_partition(
        alpha: usize,
        domain: DomainMap,
        partition: &CellPartition,
        subfunctions: &[Vec<f64>],
    ) -> Result<Self> {
        if subfunctions.len() != partition.k() {
            return arg(format!("{} sub-functions for K = {}", subfunctions.len(), partition.k()));
        }
        let l = partition.l();
        let leaves = partition
            .labels()
            .iter()
            .enumerate()
            .map(|(r, &s)| {
                Ok(Leaf {
                    interval: DyadicInterval::new(l, r as u64)?,
                    coeffs: subfunctions[s as usize].clone(),
                    error: 0.0,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut f = PiecewisePoly::new(alpha, domain, leaves)?;
        f.labels = partition.labels().to_vec();
        Ok(f)
    }

    pub fn alpha(&self) -> usize {
        self.alpha
    }

    pub fn domain(&self) -> &DomainMap {
        &self.domain
    }

    pub fn leaves(&self) -> &[Leaf] {
        &self.leaves
    }

    /// Largest certified leaf error.
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Subdomain label of each leaf.
    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    /// Sub-function coefficients in label order.
    pub fn subfunctions(&self) -> Vec<Vec<f64>> {
        let k = self.labels.iter().max().map_or(0, |&s| s as usize + 1);
        let mut out = vec![Vec::new(); k];
        for (leaf, &s) in self.leaves.iter().zip(&self.labels) {
            if out[s as usize].is_empty() {
                out[s as usize] = leaf.coeffs.clone();
            }
        }
        out
    }

    /// Cells at the depth of the deepest leaf, labeled by subdomain.
    pub fn partition(&self) -> CellPartition {
        let l = self.leaves.iter().map(|lf| lf.interval.depth).max().unwrap_or(0);
        let mut labels = Vec::with_capacity(1 << l);
        for (leaf, &s) in self.leaves.iter().zip(&self.labels) {
            labels.extend(std::iter::repeat_n(s, 1 << (l - leaf.interval.depth)));
        }
        CellPartition::new(l, labels).expect("leaves validated on construction")
    }

    /// `f(u)` using the leaf whose half-open interval contains `u`.
    pub fn eval(&self, u: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&u) {
            return arg(format!("unit coordinate {u} outside [0, 1)"));
        }
        let i = self.leaves.partition_point(|lf| lf.interval.left() <= u) - 1;
        Ok(poly_eval(&self.leaves[i].coeffs, u))
    }

    /// `f(x_k)` on the mesh of the domain.
    pub fn mesh_values(&self) -> Vec<f64> {
        (0..self.domain.points())
            .map(|k| self.eval(self.domain.unit_point(k)).expect("mesh point inside [0, 1)"))
            .collect()
    }
}

/// `f(u)` for a piecewise polynomial.
pub fn eval_piecewise(f: &PiecewisePoly, u: f64) -> Result<f64> {
    f.eval(u)
}

pub(crate) fn poly_eval(coeffs: &[f64], u: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * u + c)
}

/// `p(s)` with `s = (u - center) / half`, re-expanded in `u`.
fn rescale_to_global(local: &[f64], center: f64, half: f64) -> Vec<f64> {
    // Horner on polynomials: acc = acc * ((u - center)/half) + a_i
    let lin = [-center / half, 1.0 / half];
    let mut acc: Vec<f64> = vec![0.0; local.len()];
    for &a in local.iter().rev() {
        let mut next = vec![0.0; local.len()];
        for (i, &c) in acc.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            next[i] += c * lin[0];
            if i + 1 < next.len() {
                next[i + 1] += c * lin[1];
            }
        }
        next[0] += a;
        acc = next;
    }
    acc
}

/// Monomial coefficients of the interpolant through `(nodes, values)`.
fn interpolate_monomial(nodes: &[f64], values: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    // Newton divided differences
    let mut dd = values.to_vec();
    for j in 1..n {
        for i in (j..n).rev() {
            dd[i] = (dd[i] - dd[i - 1]) / (nodes[i] - nodes[i - j]);
        }
    }
    // expand Newton form from the innermost term outward
    let mut coeffs = vec![0.0; n];
    for i in (0..n).rev() {
        // coeffs = coeffs * (s - nodes[i]) + dd[i]
        let mut next = vec![0.0; n];
        for (d, &c) in coeffs.iter().enumerate() {
            next[d] -= c * nodes[i];
            if d + 1 < n {
                next[d + 1] += c;
            }
        }
        next[0] += dd[i];
        coeffs = next;
    }
    coeffs
}

fn check_finite(target: &impl Fn(f64) -> f64, u: f64) -> Result<f64> {
    let v = target(u);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Numeric { x: u, value: v })
    }
}

/// Fits one leaf with the default probe count.
pub fn fit_cell(
    target: impl Fn(f64) -> f64,
    interval: DyadicInterval,
    alpha: usize,
) -> Result<(Vec<f64>, f64)> {
    fit_cell_with_probes(target, interval, alpha, MIN_PROBES)
}

/// Interpolates `target` (a function of the unit coordinate) at the α + 1
/// Chebyshev extreme points of `interval` and returns the coefficients together with
/// the max deviation over `probes` evenly spaced points spanning the closed
/// interval.
pub fn fit_cell_with_probes(
    target: impl Fn(f64) -> f64,
    interval: DyadicInterval,
    alpha: usize,
    probes: usize,
) -> Result<(Vec<f64>, f64)> {
    let probes = probes.max(2);
    let center = 0.5 * (interval.left() + interval.right());
    let half = 0.5 * interval.width();
    let count = alpha + 1;
    // Chebyshev extrema, endpoints included; a constant takes the midpoint
    let nodes: Vec<f64> = match alpha {
        0 => vec![0.0],
        _ => (0..count).map(|j| (j as f64 * std::f64::consts::PI / alpha as f64).cos()).collect(),
    };
    let values =
        nodes.iter().map(|&s| check_finite(&target, center + half * s)).collect::<Result<Vec<_>>>()?;
    let coeffs = rescale_to_global(&interpolate_monomial(&nodes, &values), center, half);

    let mut error: f64 = 0.0;
    let step = interval.width() / (probes - 1) as f64;
    for i in 0..probes {
        let u = interval.left() + step * i as f64;
        let v = check_finite(&target, u)?;
        error = error.max((v - poly_eval(&coeffs, u)).abs());
    }
    Ok((coeffs, error))
}

fn probes_for(depth: u32, n: u32) -> usize {
    if n > depth && n - depth < 40 {
        MIN_PROBES.max((1usize << (n - depth)) + 1)
    } else {
        MIN_PROBES
    }
}

fn validate(epsilon: f64, max_depth: u32, domain: &DomainMap) -> Result<()> {
    if !(epsilon > 0.0) {
        return arg(format!("epsilon must be positive, got {epsilon}"));
    }
    if max_depth > domain.n() {
        return arg(format!("max_depth {max_depth} exceeds qubit count {}", domain.n()));
    }
    Ok(())
}

/// Adaptive dyadic bisection: any leaf whose fit error exceeds `epsilon` is
/// split until every leaf passes.
pub fn approximate_adaptive(
    potential: &Potential,
    domain: &DomainMap,
    epsilon: f64,
    alpha: usize,
    max_depth: u32,
) -> Result<(PiecewisePoly, CellPartition)> {
    validate(epsilon, max_depth, domain)?;
    let target = potential.on_unit(domain);
    let mut leaves = Vec::new();
    let mut stack = vec![DyadicInterval::UNIT];
    let mut worst: Option<(DyadicInterval, f64)> = None;
    while let Some(iv) = stack.pop() {
        let (coeffs, error) = fit_cell_with_probes(&target, iv, alpha, probes_for(iv.depth, domain.n()))?;
        if error <= epsilon {
            leaves.push(Leaf { interval: iv, coeffs, error });
        } else if iv.depth < max_depth {
            let (left, right) = iv.children();
            stack.push(right);
            stack.push(left);
        } else if worst.is_none_or(|(_, e)| error > e) {
            worst = Some((iv, error));
        }
    }
    if let Some((iv, error)) = worst {
        return Err(Error::Tolerance { epsilon, max_depth, left: iv.left(), right: iv.right(), error });
    }
    let poly = PiecewisePoly::new(alpha, *domain, leaves)?;
    let partition = poly.partition();
    Ok((poly, partition))
}

/// Uniform refinement: `L` doubles until every cell passes; `K = L`.
pub fn approximate_uniform(
    potential: &Potential,
    domain: &DomainMap,
    epsilon: f64,
    alpha: usize,
    max_depth: u32,
) -> Result<(PiecewisePoly, CellPartition)> {
    validate(epsilon, max_depth, domain)?;
    let target = potential.on_unit(domain);
    let mut worst = (DyadicInterval::UNIT, f64::INFINITY);
    for depth in 0..=max_depth {
        let probes = probes_for(depth, domain.n());
        let mut leaves = Vec::with_capacity(1 << depth);
        worst = (DyadicInterval::UNIT, 0.0);
        for index in 0..1u64 << depth {
            let iv = DyadicInterval::new(depth, index)?;
            let (coeffs, error) = fit_cell_with_probes(&target, iv, alpha, probes)?;
            if error > worst.1 {
                worst = (iv, error);
            }
            leaves.push(Leaf { interval: iv, coeffs, error });
        }
        if worst.1 <= epsilon {
            let poly = PiecewisePoly::new(alpha, *domain, leaves)?;
            return Ok((poly, CellPartition::uniform(depth)));
        }
    }
    Err(Error::Tolerance { epsilon, max_depth, left: worst.0.left(), right: worst.0.right(), error: worst.1 })
}
