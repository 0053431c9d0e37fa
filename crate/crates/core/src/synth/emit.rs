//! Diagonal-unitary emission from Z-string Hamiltonians.
//!
//! Terms sharing a subdomain string `t` form a block. The parity of the
//! `t`-string is held on its highest qubit `p` while the block runs; each
//! polynomial qubit `b` is then folded into `p` once, and every pair term
//! `(b, c)` costs one more CNOT pair on top of that.
//!
//! Blocks are visited layer by layer. Layer `q` collects the strings whose
//! highest qubit is `q`; inside a layer the lower qubits of the string follow
//! a reflected Gray sequence, so consecutive blocks differ by one CNOT and
//! closing the layer costs one more. Summed over layers this leaves exactly
//! `2^m - 2` CNOTs between blocks.

use std::collections::{BTreeMap, HashMap};

use crate::error::Result;
use crate::synth::circuit::Circuit;
use crate::walsh::{HamiltonianRep, Mode};

/// Binary-reflected Gray sequence of length `2^m`.
pub fn gray_order(m: u32) -> Vec<u32> {
    (0..1u32 << m).map(|i| i ^ (i >> 1)).collect()
}

/// Order in which nonzero strings are emitted: layers by highest qubit from
/// the last string position down to the first, Gray order inside a layer.
/// `t = 0` comes first. Bit `m - a` of `t` belongs to string position `a`.
pub fn block_order(m: u32) -> Vec<u32> {
    let mut out = vec![0];
    for a in (1..=m).rev() {
        let base = 1u32 << (m - a);
        for g in gray_order(a - 1) {
            out.push(base | g << (m - a + 1));
        }
    }
    out
}

/// Qubits of the string `t` whose position `a` maps to qubit `offset + a`.
pub(crate) fn string_qubits(t: u32, m: u32, offset: u32) -> Vec<u32> {
    (1..=m).filter(|a| (t >> (m - a)) & 1 == 1).map(|a| offset + a).collect()
}

/// Keeps at most one qubit holding a parity of other qubits, and reports the
/// CNOTs needed to move between parities.
#[derive(Default)]
pub(crate) struct ParityTracker {
    current: Option<(u32, Vec<u32>)>,
}

impl ParityTracker {
    /// Makes `target` hold `target ⊕ controls`.
    pub fn goto(&mut self, c: &mut Circuit, target: u32, controls: &[u32]) {
        let mut held = match self.current.take() {
            Some((q, held)) if q == target => held,
            Some((q, held)) => {
                for &ctl in &held {
                    c.cx(ctl, q);
                }
                Vec::new()
            }
            None => Vec::new(),
        };
        let mut toggles: Vec<u32> = held
            .iter()
            .filter(|x| !controls.contains(x))
            .chain(controls.iter().filter(|x| !held.contains(x)))
            .copied()
            .collect();
        toggles.sort_unstable();
        for ctl in toggles {
            c.cx(ctl, target);
        }
        held = controls.to_vec();
        self.current = Some((target, held));
    }

    /// Restores the tracked qubit.
    pub fn finish(&mut self, c: &mut Circuit) {
        if let Some((q, held)) = self.current.take() {
            for ctl in held {
                c.cx(ctl, q);
            }
        }
    }
}

/// `e^{-iθ/2 Z⊗…⊗Z}` on the qubits of `mask` as a CNOT staircase. Bit `q-1`
/// of `mask` selects qubit `q`.
pub fn staircase(c: &mut Circuit, mask: u64, theta: f64) {
    let qs: Vec<u32> = (1..=64).filter(|q| mask >> (q - 1) & 1 == 1).collect();
    let Some(&last) = qs.last() else {
        c.global_phase -= theta / 2.0;
        return;
    };
    for w in qs.windows(2) {
        c.cx(w[0], w[1]);
    }
    c.rz(last, theta);
    for w in qs.windows(2).rev() {
        c.cx(w[0], w[1]);
    }
}

struct Block {
    lambda: f64,
    phi: BTreeMap<u32, f64>,
    theta: BTreeMap<(u32, u32), f64>,
}

fn blocks(h: &HamiltonianRep) -> HashMap<u32, Block> {
    let poly_bits: u64 = h.poly_qubits().fold(0, |acc, q| acc | 1u64 << (q - 1));
    let mut out: HashMap<u32, Block> = HashMap::new();
    for term in &h.terms {
        let b = out.entry(term.t).or_insert_with(|| Block {
            lambda: 0.0,
            phi: BTreeMap::new(),
            theta: BTreeMap::new(),
        });
        let pm = term.zmask & poly_bits;
        let qs: Vec<u32> = (1..=64).filter(|q| pm >> (q - 1) & 1 == 1).collect();
        match qs.as_slice() {
            [] => b.lambda += term.coeff,
            [x] => *b.phi.entry(*x).or_insert(0.0) += term.coeff,
            [x, y] => *b.theta.entry((*x, *y)).or_insert(0.0) += term.coeff,
            _ => unreachable!("quadratic terms touch at most two polynomial qubits"),
        }
    }
    out
}

/// Circuit for `e^{-iH}`, dropping every rotation with `|angle| < tau`
/// together with the CNOTs that only serve it.
///
/// At `tau = 0` zero angles still get their gates so the structure does not
/// depend on the data, except when `H` is a multiple of the identity: that
/// is a bare global phase.
pub fn emit_diagonal(h: &HamiltonianRep, tau: f64) -> Circuit {
    let mut c = match h.mode {
        Mode::AncillaFree => Circuit::new(h.n, 0),
        Mode::AncillaAssisted => Circuit::new(h.n, h.m),
    };
    let scalar = h.terms.iter().all(|t| t.coeff == 0.0 || (t.t == 0 && t.zmask == 0));
    let keep = |x: f64| !scalar && x.abs() >= tau;
    let poly: Vec<u32> = h.poly_qubits().collect();
    let blocks = blocks(h);

    if let Some(b0) = blocks.get(&0) {
        c.global_phase -= b0.lambda / 2.0;
        for &b in &poly {
            if let Some(&phi) = b0.phi.get(&b) {
                if keep(phi) {
                    c.rz(b, phi);
                }
            }
            for (&(_, cq), &theta) in b0.theta.range((b, 0)..(b + 1, 0)) {
                if keep(theta) {
                    c.cx(cq, b);
                    c.rz(b, theta);
                    c.cx(cq, b);
                }
            }
        }
    }

    let mut tracker = ParityTracker::default();
    for t in block_order(h.m).into_iter().skip(1) {
        let Some(block) = blocks.get(&t) else { continue };
        let groups: Vec<(u32, Option<f64>, Vec<(u32, f64)>)> = poly
            .iter()
            .map(|&b| {
                let phi = block.phi.get(&b).copied().filter(|&x| keep(x));
                let pairs: Vec<(u32, f64)> = block
                    .theta
                    .range((b, 0)..(b + 1, 0))
                    .filter(|(_, &x)| keep(x))
                    .map(|(&(_, cq), &x)| (cq, x))
                    .collect();
                (b, phi, pairs)
            })
            .filter(|(_, phi, pairs)| phi.is_some() || !pairs.is_empty())
            .collect();
        if !keep(block.lambda) && groups.is_empty() {
            continue;
        }
        let qs = string_qubits(t, h.m, h.t_offset());
        let (&p, controls) = qs.split_last().expect("nonzero string");
        tracker.goto(&mut c, p, controls);
        if keep(block.lambda) {
            c.rz(p, block.lambda);
        }
        for (b, phi, pairs) in groups {
            c.cx(b, p);
            if let Some(phi) = phi {
                c.rz(p, phi);
            }
            for (cq, theta) in pairs {
                c.cx(cq, p);
                c.rz(p, theta);
                c.cx(cq, p);
            }
            c.cx(b, p);
        }
    }
    tracker.finish(&mut c);
    c
}

/// Convenience wrapper returning the circuit for a single Z-string.
pub fn zstring_circuit(width: u32, mask: u64, theta: f64) -> Result<Circuit> {
    if width > 64 || (width < 64 && mask >> width != 0) {
        return crate::error::arg(format!("mask {mask:#b} wider than {width} qubits"));
    }
    let mut c = Circuit::new(width, 0);
    staircase(&mut c, mask, theta);
    Ok(c)
}
