//! The labeling unitary `U_S |k⟩|u⟩ = |k⟩|u ⊕ S(k)⟩`.
//!
//! `U_S` is written as `D W` with `W = Π_b (-iX_b)^{S_b(k)}` and the phase
//! correction `D = i^{popcount S(k)}`. Both factors are Walsh series over
//! the cell index `r`, so they become Z-strings on the top `l` main qubits:
//! one RZ per nonzero string for `D`, and one CZ-conjugated RX per label bit
//! for `W`.

use crate::error::{Error, Result};
use crate::grid::CellPartition;
use crate::synth::circuit::Circuit;
use crate::synth::emit::{block_order, string_qubits, ParityTracker};
use crate::walsh::fwht;

/// The pieces of `U_S`, in emission order per string.
pub(crate) struct Labeling {
    pub circuit: Circuit,
    /// Gate indices of the `D` rotations.
    pub chi_gates: Vec<usize>,
    /// Global phase contributed by `D`.
    pub chi_phase: f64,
}

pub(crate) fn labeling_parts(partition: &CellPartition, n: u32) -> Result<Labeling> {
    let k = partition.k();
    if k < 2 {
        return Err(Error::DegeneratePartition(k));
    }
    let l = partition.l();
    let m = partition.m();
    if n < l {
        return crate::error::arg(format!("n = {n} is smaller than l = {l}"));
    }
    let cells = partition.cells();
    let scale = std::f64::consts::PI / cells as f64;

    let mut chi: Vec<f64> = partition.labels().iter().map(|&s| s.count_ones() as f64).collect();
    fwht(&mut chi);
    chi.iter_mut().for_each(|x| *x *= -scale);
    // xi[b - 1][t] for label bit b (most significant first)
    let xi: Vec<Vec<f64>> = (1..=m)
        .map(|b| {
            let mut v: Vec<f64> = partition.labels().iter().map(|&s| ((s >> (m - b)) & 1) as f64).collect();
            fwht(&mut v);
            v.iter_mut().for_each(|x| *x *= scale);
            v
        })
        .collect();

    let mut c = Circuit::new(n, m);
    let mut chi_gates = Vec::new();
    let chi_phase = -chi[0] / 2.0;
    c.global_phase += chi_phase;
    for b in 1..=m {
        c.rx(n + b, xi[b as usize - 1][0]);
    }
    let mut tracker = ParityTracker::default();
    for t in block_order(l).into_iter().skip(1) {
        let qs = string_qubits(t, l, 0);
        let (&p, controls) = qs.split_last().expect("nonzero string");
        tracker.goto(&mut c, p, controls);
        chi_gates.push(c.len());
        c.rz(p, chi[t as usize]);
        for b in 1..=m {
            c.cz(p, n + b);
            c.rx(n + b, xi[b as usize - 1][t as usize]);
            c.cz(p, n + b);
        }
    }
    tracker.finish(&mut c);
    Ok(Labeling { circuit: c, chi_gates, chi_phase })
}

/// `U_S` on an `l`-qubit main register plus `m` ancillas.
pub fn emit_labeling(partition: &CellPartition) -> Result<Circuit> {
    emit_labeling_on(partition, partition.l())
}

/// `U_S` on an `n`-qubit main register plus `m` ancillas.
pub fn emit_labeling_on(partition: &CellPartition, n: u32) -> Result<Circuit> {
    Ok(labeling_parts(partition, n)?.circuit)
}

/// `U_S^†` as the structural reverse of [`emit_labeling_on`].
pub fn emit_labeling_inverse(partition: &CellPartition, n: u32) -> Result<Circuit> {
    Ok(emit_labeling_on(partition, n)?.inverse())
}

/// `W^†`: the inverse of `U_S` without its diagonal phase correction.
pub(crate) fn emit_unlabel(parts: &Labeling) -> Circuit {
    let mut w = parts.circuit.clone();
    let mut skip = parts.chi_gates.iter().copied().peekable();
    w.gates = parts
        .circuit
        .gates
        .iter()
        .enumerate()
        .filter(|(i, _)| {
            if skip.peek() == Some(i) {
                skip.next();
                false
            } else {
                true
            }
        })
        .map(|(_, g)| *g)
        .collect();
    w.global_phase -= parts.chi_phase;
    w.inverse()
}
