#![allow(dead_code)]

use num_complex::Complex64;
use pwdiag::approx::PiecewisePoly;
use pwdiag::grid::{CellPartition, DomainMap};
use pwdiag::statevector::{apply_circuit, StateVector};
use pwdiag::synth::Circuit;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Labels for `2^l` cells that use every value in `0..k`.
pub fn surjective_labels(rng: &mut impl Rng, l: u32, k: usize) -> Vec<u32> {
    let cells = 1usize << l;
    assert!(k >= 1 && k <= cells);
    let mut labels: Vec<u32> = (0..k as u32).collect();
    labels.extend((k..cells).map(|_| rng.gen_range(0..k as u32)));
    labels.shuffle(rng);
    labels
}

pub fn random_partition(rng: &mut impl Rng, l: u32, k: usize) -> CellPartition {
    CellPartition::new(l, surjective_labels(rng, l, k)).unwrap()
}

/// Sub-functions with coefficients drawn away from zero, so no rotation
/// angle vanishes by accident.
pub fn random_subfunctions(rng: &mut impl Rng, k: usize, alpha: usize) -> Vec<Vec<f64>> {
    (0..k)
        .map(|_| {
            (0..=alpha)
                .map(|_| {
                    let mag = rng.gen_range(0.2..2.0);
                    if rng.gen_bool(0.5) {
                        mag
                    } else {
                        -mag
                    }
                })
                .collect()
        })
        .collect()
}

pub fn random_poly(rng: &mut impl Rng, n: u32, partition: &CellPartition) -> (PiecewisePoly, Vec<Vec<f64>>) {
    let subs = random_subfunctions(rng, partition.k(), 2);
    let f = PiecewisePoly::from_partition(2, DomainMap::unit(n).unwrap(), partition, &subs).unwrap();
    (f, subs)
}

/// `Σ_s 1[S(k) = s] f_s(x_k)` at every mesh point of an `n`-qubit register.
pub fn indicator_sum(partition: &CellPartition, subs: &[Vec<f64>], n: u32) -> Vec<f64> {
    let l = partition.l();
    (0..1usize << n)
        .map(|k| {
            let x = k as f64 / (1u64 << n) as f64;
            let cell = k >> (n - l);
            (0..subs.len())
                .map(|s| if partition.labels()[cell] as usize == s { horner(&subs[s], x) } else { 0.0 })
                .sum()
        })
        .collect()
}

/// Plain Horner evaluation, independent of the library's evaluator.
pub fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// Largest entrywise deviation of `circuit` from `diag(e^{-i phases[k]}) ⊗ I`
/// restricted to ancillas in `|0⟩`. Small registers are checked on every
/// basis state; larger ones on random superpositions, which a non-diagonal
/// or leaking circuit cannot pass.
pub fn diagonal_deviation(circuit: &Circuit, phases: &[f64], rng: &mut impl Rng) -> f64 {
    let n = circuit.n_main;
    let m = circuit.m_anc;
    let len = 1usize << n;
    assert_eq!(phases.len(), len);
    let stride = 1usize << m;
    let inputs: Vec<Vec<Complex64>> = if n + m <= 8 {
        (0..len)
            .map(|k| {
                let mut v = vec![Complex64::new(0.0, 0.0); len];
                v[k] = Complex64::new(1.0, 0.0);
                v
            })
            .collect()
    } else {
        (0..3)
            .map(|_| {
                let v: Vec<Complex64> = (0..len)
                    .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                    .collect();
                let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
                v.into_iter().map(|a| a / norm).collect()
            })
            .collect()
    };
    let mut worst: f64 = 0.0;
    for v in inputs {
        let mut full = vec![Complex64::new(0.0, 0.0); len * stride];
        for (k, a) in v.iter().enumerate() {
            full[k * stride] = *a;
        }
        let mut state = StateVector::from_amplitudes(full).unwrap();
        apply_circuit(&mut state, circuit).unwrap();
        for (i, a) in state.amplitudes().iter().enumerate() {
            let want = if i % stride == 0 {
                v[i / stride] * Complex64::from_polar(1.0, -phases[i / stride])
            } else {
                Complex64::new(0.0, 0.0)
            };
            worst = worst.max((a - want).norm());
        }
    }
    worst
}
