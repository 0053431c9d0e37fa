//! Circuit synthesis for diagonal unitaries.

mod circuit;
mod counts;
mod emit;
mod labeling;

pub use circuit::{count_gates, Circuit, Gate, GateCountReport};
pub use counts::{
    crossover_n_star, predict_counts, predict_labeling_counts, predict_polynomial_counts,
    predict_unlabel_counts,
};
pub use emit::{block_order, emit_diagonal, gray_order, staircase, zstring_circuit};
pub use labeling::{emit_labeling, emit_labeling_inverse, emit_labeling_on};

use serde::{Deserialize, Serialize};

use crate::approx::PiecewisePoly;
use crate::error::{Error, Result};
use crate::grid::CellPartition;
use crate::walsh::{build_hamiltonian, HamiltonianRep, Mode, Term};

/// An ancilla-assisted circuit split into its three stages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssistedParts {
    /// `U_S`
    pub labeling: Circuit,
    /// Diagonal part, including the phase correction that lets the uncompute
    /// stage skip its rotations.
    pub polynomial: Circuit,
    /// Uncompute stage.
    pub uncompute: Circuit,
}

impl AssistedParts {
    pub fn concat(&self) -> Circuit {
        let mut c = self.labeling.clone();
        c.append(&self.polynomial).expect("same register");
        c.append(&self.uncompute).expect("same register");
        c
    }
}

/// Moves the labeling phase correction `i^{-popcount(u)}` on the ancilla
/// register into the single-ancilla and identity terms of `h`.
fn fold_label_phase(h: &mut HamiltonianRep) {
    let m = h.m;
    for term in h.terms.iter_mut().filter(|t| t.zmask & ((1u64 << h.n) - 1) == 0) {
        if term.t.count_ones() == 1 {
            term.coeff -= std::f64::consts::FRAC_PI_2;
        }
    }
    // the identity term of t = 0 carries (π/4)·m as a Hamiltonian coefficient
    if let Some(Term { coeff, .. }) = h.terms.iter_mut().find(|t| t.t == 0 && t.zmask == 0) {
        *coeff += std::f64::consts::FRAC_PI_2 * m as f64;
    }
}

/// The three stages of an ancilla-assisted circuit.
pub fn build_assisted_parts(
    f: &PiecewisePoly,
    partition: &CellPartition,
    n: u32,
    tau: f64,
) -> Result<AssistedParts> {
    if partition.k() < 2 {
        return Err(Error::DegeneratePartition(partition.k()));
    }
    let parts = labeling::labeling_parts(partition, n)?;
    let mut h = build_hamiltonian(f, partition, n, Mode::AncillaAssisted)?;
    fold_label_phase(&mut h);
    let polynomial = emit_diagonal(&h, tau);
    let uncompute = labeling::emit_unlabel(&parts);
    Ok(AssistedParts { labeling: parts.circuit, polynomial, uncompute })
}

/// Circuit implementing `e^{-i f(x_k)}` on the main register.
///
/// Ancilla-assisted circuits expect the ancillas in `|0⟩` and return them
/// there.
pub fn build_circuit(
    f: &PiecewisePoly,
    partition: &CellPartition,
    n: u32,
    mode: Mode,
    tau: f64,
) -> Result<Circuit> {
    if !(tau >= 0.0) {
        return crate::error::arg(format!("tau must be non-negative, got {tau}"));
    }
    match mode {
        Mode::AncillaFree => Ok(emit_diagonal(&build_hamiltonian(f, partition, n, mode)?, tau)),
        Mode::AncillaAssisted if partition.k() < 2 => {
            // nothing to label: a single polynomial on the main register
            let h = build_hamiltonian(f, partition, n, Mode::AncillaFree)?;
            Ok(emit_diagonal(&h, tau))
        }
        Mode::AncillaAssisted => Ok(build_assisted_parts(f, partition, n, tau)?.concat()),
    }
}
