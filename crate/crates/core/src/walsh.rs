//! Walsh transform over subdomain labels and the Pauli-Z expansion of the
//! resulting phase polynomials.
//!
//! A piecewise function `f = Σ_s f_s 𝟙_{A_s}` is rewritten as
//! `f(x_k) = Σ_t g_t(x_k) (-1)^{popcount(t & S(k))}` with
//! `g_t = (1/M) Σ_s (-1)^{popcount(s & t)} f_s`. Replacing each sign by a
//! Pauli Z on the register holding `S(k)` turns `f` into a sum of commuting
//! Z-strings.
//!
//! Z-strings are stored as bit masks: bit `q - 1` set means `Z_q` is present,
//! with qubits numbered from 1. Term coefficients are RZ angles, i.e. twice
//! the coefficient of the string in the Hamiltonian, so that `e^{-iμ P / 2}`
//! is realized by a single `RZ(μ)` inside a staircase.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::approx::{poly_eval, PiecewisePoly};
use crate::error::{arg, Error, Result};
use crate::grid::{cell_index, CellPartition};

/// How the subdomain label reaches the circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// The label is the top `l` bits of the main register.
    AncillaFree,
    /// The label is computed into an `m`-qubit ancilla register.
    AncillaAssisted,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::AncillaFree => "ancilla-free",
            Mode::AncillaAssisted => "ancilla-assisted",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ancilla-free" | "free" => Ok(Mode::AncillaFree),
            "ancilla-assisted" | "assisted" => Ok(Mode::AncillaAssisted),
            other => Err(Error::Config(format!("unknown mode `{other}`"))),
        }
    }
}

/// Walsh coefficients `g_t`, one polynomial per `t < M`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalshPolySet {
    pub m: u32,
    pub alpha: usize,
    pub g: Vec<Vec<f64>>,
}

impl WalshPolySet {
    pub fn big_m(&self) -> usize {
        self.g.len()
    }
}

/// In-place unnormalized Walsh-Hadamard transform.
pub(crate) fn fwht(a: &mut [f64]) {
    let n = a.len();
    debug_assert!(n.is_power_of_two());
    let mut h = 1;
    while h < n {
        for block in (0..n).step_by(2 * h) {
            for i in block..block + h {
                let (x, y) = (a[i], a[i + h]);
                a[i] = x + y;
                a[i + h] = x - y;
            }
        }
        h *= 2;
    }
}

/// `g_t = (1/M) Σ_{s<K} (-1)^{s·t} f_s`, coefficient-wise, with zero padding
/// for `K ≤ s < M`.
pub fn walsh_transform(subfunctions: &[Vec<f64>], m: u32) -> Result<WalshPolySet> {
    let k = subfunctions.len();
    if m > 30 || k > 1usize << m {
        return arg(format!("{k} sub-functions do not fit in {m} label bits"));
    }
    if k == 0 {
        return arg("no sub-functions");
    }
    let len = subfunctions[0].len();
    if len == 0 || subfunctions.iter().any(|f| f.len() != len) {
        return arg("sub-functions must share a non-empty coefficient length");
    }
    let big_m = 1usize << m;
    let mut g = vec![vec![0.0; len]; big_m];
    let mut column = vec![0.0; big_m];
    for d in 0..len {
        column.iter_mut().for_each(|c| *c = 0.0);
        for (s, f) in subfunctions.iter().enumerate() {
            column[s] = f[d];
        }
        fwht(&mut column);
        for t in 0..big_m {
            g[t][d] = column[t] / big_m as f64;
        }
    }
    Ok(WalshPolySet { m, alpha: len - 1, g })
}

/// `Σ_t g_t(x_k) (-1)^{popcount(t & S(k))}` with `x_k = k / 2^n`.
pub fn reconstruct(fset: &WalshPolySet, partition: &CellPartition, k: usize, n: u32) -> Result<f64> {
    let s = partition.label(k, n)? as usize;
    let x = k as f64 / (1u64 << n) as f64;
    Ok(fset
        .g
        .iter()
        .enumerate()
        .map(|(t, g)| {
            let v = poly_eval(g, x);
            if (t & s).count_ones() % 2 == 1 {
                -v
            } else {
                v
            }
        })
        .sum())
}

/// Real polynomial in commuting Pauli-Z operators, keyed by Z mask.
#[derive(Debug, Clone, Default, PartialEq)]
pub(crate) struct ZPoly(pub BTreeMap<u64, f64>);

impl ZPoly {
    fn constant(c: f64) -> Self {
        ZPoly(BTreeMap::from([(0, c)]))
    }

    fn add_scaled(&mut self, other: &ZPoly, s: f64) {
        for (&mask, &c) in &other.0 {
            *self.0.entry(mask).or_insert(0.0) += s * c;
        }
    }

    fn mul(&self, other: &ZPoly) -> ZPoly {
        let mut out = BTreeMap::new();
        for (&a, &x) in &self.0 {
            for (&b, &y) in &other.0 {
                *out.entry(a ^ b).or_insert(0.0) += x * y;
            }
        }
        ZPoly(out)
    }

    /// `x = Σ_{a in qubits} 2^{-a} (1 - Z_a) / 2`.
    fn position(qubits: std::ops::RangeInclusive<u32>) -> ZPoly {
        let mut p = BTreeMap::new();
        for a in qubits {
            let w = 0.5f64.powi(a as i32);
            *p.entry(0).or_insert(0.0) += 0.5 * w;
            p.insert(1u64 << (a - 1), -0.5 * w);
        }
        ZPoly(p)
    }
}

/// One Z-string term: `coeff` is the RZ angle realizing it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZTerm {
    pub zmask: u64,
    pub coeff: f64,
}

fn expand(g: &[f64], qubits: std::ops::RangeInclusive<u32>) -> Result<ZPoly> {
    if g.len() > 3 {
        return Err(Error::UnsupportedDegree(g.len() - 1));
    }
    let x = ZPoly::position(qubits);
    let mut out = ZPoly::default();
    let mut power = ZPoly::constant(1.0);
    for (d, &c) in g.iter().enumerate() {
        if d > 0 {
            power = power.mul(&x);
        }
        out.add_scaled(&power, c);
    }
    Ok(out)
}

/// Expands `c0 + c1 x + c2 x^2` with `x = Σ_{a in qubit_range} 2^{-a} k_a`
/// into identity, `Z_b` and `Z_b Z_c` terms. The coefficients are RZ angles.
pub fn quadratic_to_zstrings(
    g: &[f64],
    qubit_range: std::ops::RangeInclusive<u32>,
    n: u32,
) -> Result<Vec<ZTerm>> {
    if *qubit_range.start() < 1 || *qubit_range.end() > n || n > 63 {
        return arg(format!("qubit range {qubit_range:?} not inside 1..={n}"));
    }
    let poly = expand(g, qubit_range)?;
    Ok(poly
        .0
        .into_iter()
        .filter(|&(_, h)| h != 0.0)
        .map(|(zmask, h)| ZTerm { zmask, coeff: 2.0 * h })
        .collect())
}

/// One term of a [`HamiltonianRep`]: Z-string `zmask` tagged with the
/// subdomain string `t` it belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub t: u32,
    pub zmask: u64,
    pub coeff: f64,
}

/// Diagonal Hamiltonian as a list of Z-string terms.
///
/// For [`Mode::AncillaFree`] the `t`-string sits on qubits `1..=m` and the
/// polynomial part on `m+1..=n`. For [`Mode::AncillaAssisted`] the polynomial
/// part uses `1..=n` and the `t`-string the ancillas `n+1..=n+m`. Bit `a` of
/// the string (counted from 1, most significant first) lives on the `a`-th
/// qubit of its register. Every `(t, structure)` slot is present, including
/// zero coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianRep {
    pub mode: Mode,
    pub n: u32,
    pub m: u32,
    pub terms: Vec<Term>,
    pub partition: CellPartition,
}

impl HamiltonianRep {
    /// Total qubit count including ancillas.
    pub fn width(&self) -> u32 {
        match self.mode {
            Mode::AncillaFree => self.n,
            Mode::AncillaAssisted => self.n + self.m,
        }
    }

    /// First qubit of the register carrying `t`.
    pub fn t_offset(&self) -> u32 {
        match self.mode {
            Mode::AncillaFree => 0,
            Mode::AncillaAssisted => self.n,
        }
    }

    /// Qubits the polynomial part ranges over.
    pub fn poly_qubits(&self) -> std::ops::RangeInclusive<u32> {
        match self.mode {
            Mode::AncillaFree => self.m + 1..=self.n,
            Mode::AncillaAssisted => 1..=self.n,
        }
    }

    /// Z mask of the `t`-string.
    pub fn t_mask(&self, t: u32) -> u64 {
        t_mask(t, self.m, self.t_offset())
    }

    /// Number of terms with `t` (structural, zero coefficients included).
    pub fn terms_for(&self, t: u32) -> impl Iterator<Item = &Term> {
        self.terms.iter().filter(move |term| term.t == t)
    }
}

pub(crate) fn t_mask(t: u32, m: u32, offset: u32) -> u64 {
    (1..=m).filter(|a| (t >> (m - a)) & 1 == 1).fold(0u64, |acc, a| acc | 1u64 << (offset + a - 1))
}

fn structural_masks(qubits: std::ops::RangeInclusive<u32>) -> Vec<u64> {
    let qs: Vec<u32> = qubits.collect();
    let mut out = vec![0u64];
    for (i, &b) in qs.iter().enumerate() {
        out.push(1u64 << (b - 1));
        for &c in &qs[i + 1..] {
            out.push(1u64 << (b - 1) | 1u64 << (c - 1));
        }
    }
    out
}

/// Builds the Z-string Hamiltonian of `f` for the given mode.
///
/// In ancilla-free mode every cell of the partition is treated as its own
/// subdomain, so `m = l`.
pub fn build_hamiltonian(
    f: &PiecewisePoly,
    partition: &CellPartition,
    n: u32,
    mode: Mode,
) -> Result<HamiltonianRep> {
    if n < partition.l() {
        return arg(format!("n = {n} is smaller than the cell depth l = {}", partition.l()));
    }
    let subs = f.subfunctions();
    if subs.len() != partition.k() {
        return arg(format!("{} sub-functions for K = {}", subs.len(), partition.k()));
    }
    if f.alpha() > 2 {
        return Err(Error::UnsupportedDegree(f.alpha()));
    }
    let (cells, m) = match mode {
        Mode::AncillaFree => {
            let per_cell: Vec<Vec<f64>> =
                partition.labels().iter().map(|&s| subs[s as usize].clone()).collect();
            (per_cell, partition.l())
        }
        Mode::AncillaAssisted => (subs, partition.m()),
    };
    if n + if mode == Mode::AncillaAssisted { m } else { 0 } > 63 {
        return arg("too many qubits for 64-bit Z masks");
    }
    let fset = walsh_transform(&cells, m)?;
    let (offset, poly_qubits) = match mode {
        Mode::AncillaFree => (0, m + 1..=n),
        Mode::AncillaAssisted => (n, 1..=n),
    };
    let t_qubits: u64 = (1u64 << (offset + m)) - (1u64 << offset);

    let mut merged: BTreeMap<u64, f64> = BTreeMap::new();
    for (t, g) in fset.g.iter().enumerate() {
        let tm = t_mask(t as u32, m, offset);
        for (mask, h) in expand(g, 1..=n)?.0 {
            *merged.entry(mask ^ tm).or_insert(0.0) += 2.0 * h;
        }
    }
    let structure = structural_masks(poly_qubits);
    let mut terms = Vec::with_capacity(structure.len() << m);
    for t in 0..1u32 << m {
        let tm = t_mask(t, m, offset);
        for &pm in &structure {
            let coeff = merged.remove(&(pm | tm)).unwrap_or(0.0);
            terms.push(Term { t, zmask: pm | tm, coeff });
        }
    }
    debug_assert!(merged.is_empty(), "terms outside the expected structure");
    debug_assert!(terms.iter().all(|term| term.zmask & t_qubits == t_mask(term.t, m, offset)));

    let partition = match mode {
        Mode::AncillaFree => CellPartition::uniform(m),
        Mode::AncillaAssisted => partition.clone(),
    };
    Ok(HamiltonianRep { mode, n, m, terms, partition })
}

/// Diagonal entry `Σ (coeff/2) Π_q z_q` of the Hamiltonian at mesh point `k`.
/// In ancilla-assisted mode the ancilla register holds `S(k)` unless
/// `s_override` is given.
pub fn eval_hamiltonian_diagonal(h: &HamiltonianRep, k: usize, s_override: Option<u32>) -> Result<f64> {
    if h.n >= 64 || k >= 1usize << h.n {
        return arg(format!("mesh index {k} out of range for n = {}", h.n));
    }
    // bit q-1 set <=> qubit q reads 1
    let mut ones: u64 = (0..h.n).filter(|i| (k >> (h.n - 1 - i)) & 1 == 1).fold(0, |a, i| a | 1 << i);
    if h.mode == Mode::AncillaAssisted {
        let s = match s_override {
            Some(s) => s,
            None => h.partition.label(k, h.n)?,
        };
        ones |= t_mask(s, h.m, h.n);
    } else {
        cell_index(k, h.n, h.m)?;
    }
    Ok(h.terms
        .iter()
        .map(|term| {
            let v = 0.5 * term.coeff;
            if (term.zmask & ones).count_ones() % 2 == 1 {
                -v
            } else {
                v
            }
        })
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::approx::{approximate_uniform, Leaf};
    use crate::grid::{DomainMap, DyadicInterval};
    use crate::potential::Potential;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn diag(terms: &[ZTerm], n: u32, k: usize) -> f64 {
        terms
            .iter()
            .map(|t| {
                let sign: i32 = (1..=n)
                    .filter(|q| t.zmask >> (q - 1) & 1 == 1)
                    .map(|q| if (k >> (n - q)) & 1 == 1 { -1 } else { 1 })
                    .product();
                0.5 * t.coeff * sign as f64
            })
            .sum()
    }

    #[test]
    fn two_point_transform() {
        let w = walsh_transform(&[vec![0.0], vec![1.0]], 1).unwrap();
        assert_eq!(w.g, vec![vec![0.5], vec![-0.5]]);
        let w = walsh_transform(&[vec![3.0, 1.0]], 0).unwrap();
        assert_eq!(w.g, vec![vec![3.0, 1.0]]);
        assert!(walsh_transform(&vec![vec![0.0]; 3], 1).is_err());
    }

    #[test]
    fn involution() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for m in 0..6u32 {
            let big_m = 1usize << m;
            let f: Vec<Vec<f64>> = (0..big_m).map(|_| vec![rng.gen_range(-1.0..1.0); 3]).collect();
            let g = walsh_transform(&f, m).unwrap();
            let back = walsh_transform(&g.g, m).unwrap();
            for (a, b) in f.iter().zip(&back.g) {
                for (x, y) in a.iter().zip(b) {
                    assert!((x - y * big_m as f64).abs() <= 1e-13 * x.abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn zstrings_position_and_square() {
        let t = quadratic_to_zstrings(&[2.5, 0.0, 0.0], 1..=3, 3).unwrap();
        assert_eq!(t, vec![ZTerm { zmask: 0, coeff: 5.0 }]);
        let t = quadratic_to_zstrings(&[0.0, 1.0, 0.0], 1..=2, 2).unwrap();
        for k in 0..4 {
            assert!((diag(&t, 2, k) - k as f64 / 4.0).abs() < 1e-15);
        }
        let t = quadratic_to_zstrings(&[0.0, 0.0, 1.0], 1..=3, 3).unwrap();
        for k in 0..8 {
            assert!((diag(&t, 3, k) - (k as f64 / 8.0).powi(2)).abs() < 1e-15);
        }
        assert!(matches!(
            quadratic_to_zstrings(&[0.0, 0.0, 0.0, 1.0], 1..=3, 3),
            Err(Error::UnsupportedDegree(3))
        ));
    }

    fn cos_fit(n: u32, eps: f64) -> (PiecewisePoly, CellPartition) {
        let d = DomainMap::new(-std::f64::consts::PI, std::f64::consts::PI, n).unwrap();
        approximate_uniform(&Potential::cos(), &d, eps, 2, n).unwrap()
    }

    #[test]
    fn diagonal_matches_piecewise_both_modes() {
        let (f, p) = cos_fit(7, 1e-1);
        let vals = f.mesh_values();
        for mode in [Mode::AncillaFree, Mode::AncillaAssisted] {
            let h = build_hamiltonian(&f, &p, 7, mode).unwrap();
            for k in 0..128 {
                let d = eval_hamiltonian_diagonal(&h, k, None).unwrap();
                assert!((d - vals[k]).abs() < 1e-10, "{mode:?} k={k}: {d} vs {}", vals[k]);
            }
        }
    }

    #[test]
    fn term_counts() {
        let (f, p) = cos_fit(9, 1e-2);
        let m = p.l();
        let h = build_hamiltonian(&f, &p, 9, Mode::AncillaFree).unwrap();
        let r = (9 - m) as usize;
        for t in 0..1u32 << m {
            let ts: Vec<&Term> = h.terms_for(t).collect();
            let weights: Vec<u32> = ts.iter().map(|x| (x.zmask & !h.t_mask(t)).count_ones()).collect();
            assert_eq!(weights.iter().filter(|&&w| w == 2).count(), r * (r - 1) / 2);
            assert_eq!(weights.iter().filter(|&&w| w == 1).count(), r);
            assert_eq!(weights.iter().filter(|&&w| w == 0).count(), 1);
        }
        let h = build_hamiltonian(&f, &p, 9, Mode::AncillaAssisted).unwrap();
        assert_eq!(h.terms.len(), (1usize << h.m) * (9 * 8 / 2 + 9 + 1));
    }

    #[test]
    fn constant_is_identity_term() {
        let d = DomainMap::unit(4).unwrap();
        let f = PiecewisePoly::new(
            2,
            d,
            vec![Leaf { interval: DyadicInterval::UNIT, coeffs: vec![0.7], error: 0.0 }],
        )
        .unwrap();
        let h = build_hamiltonian(&f, &f.partition(), 4, Mode::AncillaFree).unwrap();
        let nonzero: Vec<&Term> = h.terms.iter().filter(|t| t.coeff != 0.0).collect();
        assert_eq!(nonzero.len(), 1);
        assert_eq!((nonzero[0].zmask, nonzero[0].coeff), (0, 1.4));
    }

    #[test]
    fn appendix_partition_reconstruction() {
        let p = CellPartition::new(3, vec![0, 0, 0, 1, 1, 1, 1, 2]).unwrap();
        let f = vec![vec![1.5], vec![-2.0], vec![0.25]];
        let w = walsh_transform(&f, 2).unwrap();
        for k in 0..32 {
            let s = p.label(k, 5).unwrap() as usize;
            assert!((reconstruct(&w, &p, k, 5).unwrap() - f[s][0]).abs() < 1e-15);
        }
    }

    #[test]
    fn assisted_wrong_label_is_off_subspace() {
        let p = CellPartition::new(1, vec![0, 1]).unwrap();
        let d = DomainMap::unit(3).unwrap();
        let f = PiecewisePoly::new(
            2,
            d,
            vec![
                Leaf { interval: DyadicInterval::new(1, 0).unwrap(), coeffs: vec![1.0], error: 0.0 },
                Leaf { interval: DyadicInterval::new(1, 1).unwrap(), coeffs: vec![5.0], error: 0.0 },
            ],
        )
        .unwrap();
        let h = build_hamiltonian(&f, &p, 3, Mode::AncillaAssisted).unwrap();
        assert!((eval_hamiltonian_diagonal(&h, 0, None).unwrap() - 1.0).abs() < 1e-14);
        assert!((eval_hamiltonian_diagonal(&h, 0, Some(1)).unwrap() - 5.0).abs() < 1e-14);
    }
}
