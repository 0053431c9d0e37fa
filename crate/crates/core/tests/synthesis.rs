mod common;

use num_complex::Complex64;
use proptest::prelude::*;
use pwdiag::approx::PiecewisePoly;
use pwdiag::experiments::{ne1_rows, ExperimentConfig};
use pwdiag::grid::{CellPartition, DomainMap};
use pwdiag::statevector::{apply_circuit, StateVector};
use pwdiag::synth::*;
use pwdiag::walsh::Mode;
use pwdiag::Error;

use common::*;

#[test]
fn gray_order_adjacency() {
    assert_eq!(gray_order(0), vec![0]);
    assert_eq!(gray_order(3), vec![0, 1, 3, 2, 6, 7, 5, 4]);
    for m in 1..=10 {
        let g = gray_order(m);
        assert_eq!(g.len(), 1 << m);
        assert!(g.windows(2).all(|w| (w[0] ^ w[1]).count_ones() == 1));
        let mut sorted = g.clone();
        sorted.sort_unstable();
        assert!(sorted.iter().enumerate().all(|(i, &v)| v as usize == i));
    }
}

#[test]
fn labeling_example_encodes_labels() {
    let p = CellPartition::new(3, vec![0, 0, 0, 1, 1, 1, 1, 2]).unwrap();
    let c = emit_labeling(&p).unwrap();
    let (l, m) = (3u64, 2u64);
    assert_eq!(count_gates(&c).total, 3 * (1 << l) * m + (1 << (l + 1)) - 2 * m - 3);
    for k in 0..8usize {
        let mut amps = vec![Complex64::new(0.0, 0.0); 32];
        amps[k * 4] = 1.0.into();
        let mut s = StateVector::from_amplitudes(amps).unwrap();
        apply_circuit(&mut s, &c).unwrap();
        let want = k * 4 + p.labels()[k] as usize;
        assert!((s.amplitudes()[want] - 1.0).norm() < 1e-9);
    }
}

#[test]
fn labeling_inverse_undoes_labeling() {
    let mut rng = rng(21);
    for _ in 0..10 {
        let p = random_partition(&mut rng, 4, 5);
        let mut c = emit_labeling_on(&p, 5).unwrap();
        c.append(&emit_labeling_inverse(&p, 5).unwrap()).unwrap();
        let input = {
            let mut amps = vec![Complex64::new(0.0, 0.0); 1 << (5 + p.m())];
            for (i, a) in amps.iter_mut().enumerate() {
                *a = Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos());
            }
            StateVector::from_amplitudes(amps).unwrap()
        };
        let mut s = input.clone();
        apply_circuit(&mut s, &c).unwrap();
        for (a, b) in s.amplitudes().iter().zip(input.amplitudes()) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}

#[test]
fn single_subdomain_is_a_pure_phase() {
    let p = CellPartition::uniform(0);
    let f =
        PiecewisePoly::from_partition(2, DomainMap::unit(4).unwrap(), &p, &[vec![0.8, 0.0, 0.0]]).unwrap();
    for mode in [Mode::AncillaFree, Mode::AncillaAssisted] {
        let c = build_circuit(&f, &p, 4, mode, 0.0).unwrap();
        assert!(c.is_empty());
        assert!((c.global_phase + 0.8).abs() < 1e-15);
    }
}

#[test]
fn single_z_term_is_one_rotation() {
    let c = zstring_circuit(3, 0b010, 0.3).unwrap();
    assert_eq!(c.gates, vec![Gate::Rz { q: 2, theta: 0.3 }]);
    assert_eq!(c.global_phase, 0.0);
    let c = zstring_circuit(3, 0b111, 0.3).unwrap();
    assert_eq!(count_gates(&c), GateCountReport::new(1, 0, 4, 0));
}

#[test]
fn thirteen_qubit_ancilla_free_counts() {
    let mut rng = rng(22);
    let p = CellPartition::uniform(8);
    let (f, _) = random_poly(&mut rng, 13, &p);
    let c = build_circuit(&f, &p, 13, Mode::AncillaFree, 0.0).unwrap();
    let r = count_gates(&c);
    assert_eq!((r.rz, r.cnot), (4095, 7924));
}

#[test]
fn assisted_polynomial_stage_counts() {
    let mut rng = rng(23);
    let p = random_partition(&mut rng, 8, 16);
    let (f, _) = random_poly(&mut rng, 10, &p);
    let parts = build_assisted_parts(&f, &p, 10, 0.0).unwrap();
    let r = count_gates(&parts.polynomial);
    assert_eq!((r.rz, r.cnot), (895, 1754));
    assert_eq!(count_gates(&parts.labeling), predict_labeling_counts(8, 4));
    assert_eq!(count_gates(&parts.uncompute), predict_unlabel_counts(8, 4));
    assert_eq!(count_gates(&parts.concat()), predict_counts(10, 8, 4, Mode::AncillaAssisted).unwrap());
}

#[test]
fn reference_table_rows() {
    let free = [(6, 20257), (8, 60389), (10, 170985), (11, 280555)];
    for (l, total) in free {
        assert_eq!(predict_counts(20, l, l, Mode::AncillaFree).unwrap().total, total);
    }
    assert_eq!(predict_counts(20, 8, 4, Mode::AncillaAssisted).unwrap().total, 16960);
    assert!(predict_counts(5, 6, 2, Mode::AncillaFree).is_err());
    assert!(crossover_n_star(4, 2).is_err());
}

#[test]
fn crossover_roots() {
    for ((m, l), want) in [((4, 6), 13.70), ((4, 8), 12.78), ((6, 11), 16.31)] {
        let (_, high) = crossover_n_star(m, l).unwrap();
        assert!((high - want).abs() < 0.01, "({m}, {l}): {high}");
    }
}

#[test]
fn pruned_cosine_counts() {
    let cfg = ExperimentConfig::preset("cos-ne1").unwrap();
    let rows = ne1_rows(&cfg).unwrap();
    let at = |eps: f64, tau: f64| rows.iter().find(|r| r.epsilon == eps && r.tau == tau).unwrap();
    let (exact, pruned) = (at(1e-1, 0.0), at(1e-1, 1e-3));
    assert!((pruned.rz as f64 - 21.0).abs() <= 0.15 * 21.0);
    assert!((pruned.cnot as f64 - 40.0).abs() <= 0.15 * 40.0);
    assert!(pruned.rz <= exact.rz && pruned.cnot <= exact.cnot);
    assert!((exact.delta - 0.02343).abs() <= 0.2 * 0.02343);
    assert!((pruned.delta - 0.02382).abs() <= 0.2 * 0.02382);
    for r in rows.iter().filter(|r| r.tau == 0.0) {
        assert!(r.delta_tilde <= 1e-9);
        assert!(r.delta <= r.epsilon + 1e-9);
        let want = predict_counts(cfg.n, r.l, r.l, Mode::AncillaFree).unwrap();
        assert_eq!((r.rz, r.cnot), (want.rz, want.cnot));
    }
}

#[test]
fn text_export_format() {
    let mut rng = rng(24);
    let p = random_partition(&mut rng, 3, 3);
    let (f, _) = random_poly(&mut rng, 4, &p);
    let c = build_circuit(&f, &p, 4, Mode::AncillaAssisted, 0.0).unwrap();
    let text = c.to_text();
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("# n=4 m=2 global_phase="));
    let angle = lines.find(|l| l.starts_with("RZ ")).unwrap().split(' ').nth(2).unwrap();
    assert_eq!(angle, format!("{:.16e}", angle.parse::<f64>().unwrap()));
    assert_eq!(Circuit::from_text(&text).unwrap(), c);

    for bad in ["", "# n=2 m=0\n", "# n=2 m=0 global_phase=0\nRZ 3 0.1\n", "# n=2 m=0 global_phase=0\nXX 1\n"]
    {
        assert!(matches!(Circuit::from_text(bad), Err(Error::Format(_))), "{bad:?}");
    }
}

#[test]
fn negative_tau_rejected() {
    let p = CellPartition::uniform(1);
    let f = PiecewisePoly::from_partition(2, DomainMap::unit(2).unwrap(), &p, &[vec![1.0; 3], vec![2.0; 3]])
        .unwrap();
    assert!(build_circuit(&f, &p, 2, Mode::AncillaFree, -1.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn pruning_never_adds_gates(seed in any::<u64>(), n in 2u32..7, l in 1u32..4, t1 in 0.0f64..0.5, t2 in 0.0f64..0.5) {
        let l = l.min(n);
        let mut rng = rng(seed);
        let k = 2 + (seed as usize % ((1usize << l) - 1));
        let p = random_partition(&mut rng, l, k);
        let (mut f, _) = random_poly(&mut rng, n, &p);
        // mix of tiny and large coefficients so thresholds bite
        let subs: Vec<Vec<f64>> = f.subfunctions().iter().map(|c| c.iter().map(|x| x * x * x * 0.1).collect()).collect();
        f = PiecewisePoly::from_partition(2, *f.domain(), &p, &subs).unwrap();
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        for mode in [Mode::AncillaFree, Mode::AncillaAssisted] {
            let a = count_gates(&build_circuit(&f, &p, n, mode, lo).unwrap());
            let b = count_gates(&build_circuit(&f, &p, n, mode, hi).unwrap());
            prop_assert!(b.rz <= a.rz && b.cnot <= a.cnot && b.total <= a.total);
        }
    }

    #[test]
    fn circuit_then_inverse_is_identity(seed in any::<u64>(), n in 1u32..6) {
        let mut rng = rng(seed);
        let l = 1 + (seed as u32 % n);
        let p = random_partition(&mut rng, l, 2);
        let (f, _) = random_poly(&mut rng, n, &p);
        let c = build_circuit(&f, &p, n, Mode::AncillaAssisted, 0.0).unwrap();
        let mut both = c.clone();
        both.append(&c.inverse()).unwrap();
        let zeros = vec![0.0; 1 << n];
        prop_assert!(diagonal_deviation(&both, &zeros, &mut rng) < 1e-10);
    }
}
