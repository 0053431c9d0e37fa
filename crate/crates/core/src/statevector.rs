//! Dense statevector simulation, Fourier transforms and split-step dynamics.
//!
//! Qubit `q` (1-based) is bit `n_total - q` of the amplitude index, so the
//! main register forms the high bits and the ancillas the low bits.

use std::fmt::Write as _;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::approx::{Leaf, PiecewisePoly};
use crate::error::{arg, Error, Result};
use crate::grid::{DomainMap, DyadicInterval};
use crate::synth::{build_circuit, Circuit, Gate};
use crate::walsh::Mode;

/// `2^n_total` complex amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_total: u32,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩`
    pub fn zero(n_total: u32) -> Result<Self> {
        if n_total > 30 {
            return arg(format!("{n_total} qubits is too many to simulate"));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_total];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(StateVector { n_total, amps })
    }

    /// Normalizes and wraps the given amplitudes.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        if !amps.len().is_power_of_two() {
            return arg(format!("{} amplitudes is not a power of two", amps.len()));
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return arg("amplitudes must have a finite non-zero norm");
        }
        let n_total = amps.len().trailing_zeros();
        Ok(StateVector { n_total, amps: amps.into_iter().map(|a| a / norm).collect() })
    }

    pub fn n_total(&self) -> u32 {
        self.n_total
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Appends `m` ancillas in `|0⟩`.
    pub fn with_ancillas(&self, m: u32) -> Result<Self> {
        let mut out = StateVector::zero(self.n_total + m)?;
        out.amps.iter_mut().for_each(|a| *a = Complex64::new(0.0, 0.0));
        for (k, a) in self.amps.iter().enumerate() {
            out.amps[k << m] = *a;
        }
        Ok(out)
    }

    /// Probability of each main-register value, summed over the last `m`
    /// qubits.
    pub fn marginal(&self, m: u32) -> Vec<f64> {
        let mut p = vec![0.0; self.amps.len() >> m];
        for (i, a) in self.amps.iter().enumerate() {
            p[i >> m] += a.norm_sqr();
        }
        p
    }

    /// Amplitudes of the main register with the last `m` qubits in `|0⟩`.
    pub fn main_amplitudes(&self, m: u32) -> Vec<Complex64> {
        self.amps.iter().step_by(1 << m).copied().collect()
    }

    /// Probability that the last `m` qubits are not all zero.
    pub fn ancilla_leakage(&self, m: u32) -> f64 {
        let mask = (1usize << m) - 1;
        self.amps.iter().enumerate().filter(|(i, _)| i & mask != 0).map(|(_, a)| a.norm_sqr()).sum()
    }

    fn bit(&self, q: u32) -> usize {
        1usize << (self.n_total - q)
    }

    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        if gate.max_qubit() > self.n_total {
            return arg(format!("{gate:?} does not fit {} qubits", self.n_total));
        }
        match *gate {
            Gate::Rz { q, theta } => {
                let b = self.bit(q);
                let (lo, hi) =
                    (Complex64::from_polar(1.0, -theta / 2.0), Complex64::from_polar(1.0, theta / 2.0));
                for (i, a) in self.amps.iter_mut().enumerate() {
                    *a *= if i & b == 0 { lo } else { hi };
                }
            }
            Gate::Rx { q, theta } => {
                let b = self.bit(q);
                let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
                let ms = Complex64::new(0.0, -s);
                for i in (0..self.amps.len()).filter(|i| i & b == 0) {
                    let (x, y) = (self.amps[i], self.amps[i | b]);
                    self.amps[i] = x * c + y * ms;
                    self.amps[i | b] = x * ms + y * c;
                }
            }
            Gate::Cx { c, t } => {
                let (cb, tb) = (self.bit(c), self.bit(t));
                for i in 0..self.amps.len() {
                    if i & cb != 0 && i & tb == 0 {
                        self.amps.swap(i, i | tb);
                    }
                }
            }
            Gate::Cz { a, b } => {
                let mask = self.bit(a) | self.bit(b);
                for (i, x) in self.amps.iter_mut().enumerate() {
                    if i & mask == mask {
                        *x = -*x;
                    }
                }
            }
            Gate::H { q } => {
                let b = self.bit(q);
                let r = std::f64::consts::FRAC_1_SQRT_2;
                for i in (0..self.amps.len()).filter(|i| i & b == 0) {
                    let (x, y) = (self.amps[i], self.amps[i | b]);
                    self.amps[i] = (x + y) * r;
                    self.amps[i | b] = (x - y) * r;
                }
            }
        }
        Ok(())
    }

    fn scale(&mut self, phase: f64) {
        if phase != 0.0 {
            let z = Complex64::from_polar(1.0, phase);
            self.amps.iter_mut().for_each(|a| *a *= z);
        }
    }
}

/// Applies the gates in order, then the global phase.
pub fn apply_circuit(state: &mut StateVector, circuit: &Circuit) -> Result<()> {
    if circuit.width() > state.n_total {
        return arg(format!("{}-qubit circuit on a {}-qubit state", circuit.width(), state.n_total));
    }
    for g in &circuit.gates {
        state.apply_gate(g)?;
    }
    state.scale(circuit.global_phase);
    Ok(())
}

/// Gate-level Fourier transform `|j⟩ → N^{-1/2} Σ_k e^{2πi jk/N} |k⟩` on the
/// `width` qubits starting at `first`, with indices read most significant
/// qubit first. Controlled phases are built from RZ and CNOT; the final bit
/// reversal uses three CNOTs per swap.
pub fn qft_circuit(first: u32, width: u32, circuit_width: u32) -> Result<Circuit> {
    if first == 0 || first + width - 1 > circuit_width {
        return arg(format!("register {first}..{} outside {circuit_width} qubits", first + width));
    }
    let mut c = Circuit::new(circuit_width, 0);
    let last = first + width - 1;
    for q in first..=last {
        c.h(q);
        for r in q + 1..=last {
            let phi = std::f64::consts::TAU / (1u64 << (r - q + 1)) as f64;
            // diag(1, 1, 1, e^{iφ}) on (r, q)
            c.rz(r, phi / 2.0);
            c.rz(q, phi / 2.0);
            c.cx(r, q);
            c.rz(q, -phi / 2.0);
            c.cx(r, q);
            c.global_phase += phi / 4.0;
        }
    }
    for i in 0..width / 2 {
        let (a, b) = (first + i, last - i);
        c.cx(a, b);
        c.cx(b, a);
        c.cx(a, b);
    }
    Ok(c)
}

/// Forward transform on a contiguous register.
pub fn qft(state: &mut StateVector, first: u32, width: u32) -> Result<()> {
    apply_circuit(state, &qft_circuit(first, width, state.n_total)?)
}

/// Inverse transform on a contiguous register.
pub fn iqft(state: &mut StateVector, first: u32, width: u32) -> Result<()> {
    apply_circuit(state, &qft_circuit(first, width, state.n_total)?.inverse())
}

/// `(δ, δ̃)`: largest deviation of the circuit's action on `|+⟩^n` from
/// `e^{-iV}` and from `e^{-if}`, rescaled by `2^{n/2}`.
pub fn delta_errors(circuit: &Circuit, v_samples: &[f64], f_samples: &[f64]) -> Result<(f64, f64)> {
    let len = v_samples.len();
    if !len.is_power_of_two() || f_samples.len() != len || 1usize << circuit.n_main != len {
        return arg(format!(
            "sample arrays of length {len}/{} do not match a {}-qubit register",
            f_samples.len(),
            circuit.n_main
        ));
    }
    let n = circuit.n_main;
    let m = circuit.m_anc;
    let mut state = StateVector::zero(n + m)?;
    for q in 1..=n {
        state.apply_gate(&Gate::H { q })?;
    }
    apply_circuit(&mut state, circuit)?;
    let leak = state.ancilla_leakage(m);
    if leak.sqrt() > 1e-9 {
        return Err(Error::Uncompute(leak));
    }
    let root = (len as f64).sqrt();
    let main = state.main_amplitudes(m);
    let dev = |samples: &[f64]| {
        main.iter()
            .zip(samples)
            .map(|(a, &v)| (a * root - Complex64::from_polar(1.0, -v)).norm())
            .fold(0.0, f64::max)
    };
    Ok((dev(v_samples), dev(f_samples)))
}

/// Normalized `exp(-(x - x̄)²/2σ² + i p̄ (x - x̄))` on the mesh of `domain`.
pub fn init_gaussian(domain: &DomainMap, x0: f64, p0: f64, sigma: f64) -> Result<StateVector> {
    if !(sigma > 0.0) {
        return arg(format!("packet width must be positive, got {sigma}"));
    }
    let amps = (0..domain.points())
        .map(|k| {
            let d = domain.mesh_point(k) - x0;
            Complex64::from_polar((-d * d / (2.0 * sigma * sigma)).exp(), p0 * d)
        })
        .collect();
    StateVector::from_amplitudes(amps)
}

/// Kinetic step data: domain length, qubit count, time step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KineticSpec {
    pub length: f64,
    pub n: u32,
    pub dt: f64,
}

impl KineticSpec {
    /// Signed momentum `2π j̃ / D` of Fourier index `j`.
    pub fn momentum(&self, j: usize) -> f64 {
        let big_n = 1i64 << self.n;
        let j = j as i64;
        let signed = if j < big_n / 2 { j } else { j - big_n };
        std::f64::consts::TAU * signed as f64 / self.length
    }

    /// Phase `p_j² Δt / 2` at every Fourier index.
    pub fn phases(&self) -> Vec<f64> {
        (0..1usize << self.n).map(|j| 0.5 * self.dt * self.momentum(j).powi(2)).collect()
    }

    /// The kinetic phase as a two-piece quadratic in the unit index
    /// coordinate: `C u²` on `[0, ½)` and `C (u - 1)²` on `[½, 1)`.
    pub fn piecewise(&self) -> Result<PiecewisePoly> {
        let big_n = (1u64 << self.n) as f64;
        let c = 0.5 * self.dt * (std::f64::consts::TAU * big_n / self.length).powi(2);
        let domain = DomainMap::unit(self.n)?;
        PiecewisePoly::new(
            2,
            domain,
            vec![
                Leaf { interval: DyadicInterval::new(1, 0)?, coeffs: vec![0.0, 0.0, c], error: 0.0 },
                Leaf { interval: DyadicInterval::new(1, 1)?, coeffs: vec![c, -2.0 * c, c], error: 0.0 },
            ],
        )
    }

    /// Ancilla-free circuit for `e^{-i p² Δt / 2}` in the Fourier basis.
    pub fn circuit(&self) -> Result<Circuit> {
        let f = self.piecewise()?;
        build_circuit(&f, &f.partition(), self.n, Mode::AncillaFree, 0.0)
    }
}

/// Snapshots of a time evolution.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub domain: DomainMap,
    pub times: Vec<f64>,
    /// Main-register probabilities per snapshot.
    pub probs: Vec<Vec<f64>>,
    /// Main-register amplitudes (ancillas in `|0⟩`) per snapshot, if kept.
    pub amplitudes: Option<Vec<Vec<Complex64>>>,
    /// Largest norm drift seen in any single step.
    pub max_norm_drift: f64,
}

impl Trajectory {
    fn new(domain: DomainMap, keep_amplitudes: bool) -> Self {
        Trajectory {
            domain,
            times: Vec::new(),
            probs: Vec::new(),
            amplitudes: keep_amplitudes.then(Vec::new),
            max_norm_drift: 0.0,
        }
    }

    fn record(&mut self, t: f64, probs: Vec<f64>, amps: impl FnOnce() -> Vec<Complex64>) {
        self.times.push(t);
        self.probs.push(probs);
        if let Some(a) = self.amplitudes.as_mut() {
            a.push(amps());
        }
    }

    /// CSV with header `t,x,prob`, one row per snapshot and mesh point.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,x,prob\n");
        for (t, probs) in self.times.iter().zip(&self.probs) {
            for (k, p) in probs.iter().enumerate() {
                writeln!(s, "{t},{},{p:.16e}", self.domain.mesh_point(k)).unwrap();
            }
        }
        s
    }

    /// Largest amplitude difference between matching snapshots.
    pub fn max_amplitude_diff(&self, other: &Trajectory) -> Option<f64> {
        let (a, b) = (self.amplitudes.as_ref()?, other.amplitudes.as_ref()?);
        if a.len() != b.len() {
            return None;
        }
        Some(
            a.iter()
                .zip(b)
                .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).norm()))
                .fold(0.0, f64::max),
        )
    }
}

/// Options for [`zalka_wiesner_run`] and [`split_step_oracle`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub steps: usize,
    pub snapshot_every: usize,
    pub keep_amplitudes: bool,
}

fn check_run(opts: &RunOptions) -> Result<()> {
    if opts.snapshot_every == 0 {
        return arg("snapshot_every must be at least 1");
    }
    Ok(())
}

/// Gate-level split-step evolution: each step applies the potential circuit,
/// the Fourier transform, the kinetic circuit and the inverse transform.
/// Snapshots are taken at `t = 0` and after every `snapshot_every` steps.
pub fn zalka_wiesner_run(
    initial: &StateVector,
    potential_circuit: &Circuit,
    kinetic: &KineticSpec,
    domain: &DomainMap,
    opts: RunOptions,
) -> Result<Trajectory> {
    check_run(&opts)?;
    let n = kinetic.n;
    if domain.n() != n || potential_circuit.n_main != n {
        return arg("potential circuit, kinetic spec and domain disagree on n");
    }
    let m = potential_circuit.m_anc;
    let mut state = if initial.n_total == n { initial.with_ancillas(m)? } else { initial.clone() };
    if state.n_total != n + m {
        return arg(format!("initial state has {} qubits, expected {n}", initial.n_total));
    }
    let mut step = potential_circuit.clone();
    step.m_anc = m;
    let width = n + m;
    let fwd = qft_circuit(1, n, width)?;
    step.append(&fwd)?;
    step.append(&kinetic.circuit()?)?;
    step.append(&fwd.inverse())?;

    let mut traj = Trajectory::new(*domain, opts.keep_amplitudes);
    traj.record(0.0, state.marginal(m), || state.main_amplitudes(m));
    for s in 1..=opts.steps {
        let before = state.norm();
        apply_circuit(&mut state, &step)?;
        traj.max_norm_drift = traj.max_norm_drift.max((state.norm() - before).abs());
        if s % opts.snapshot_every == 0 {
            traj.record(s as f64 * kinetic.dt, state.marginal(m), || state.main_amplitudes(m));
        }
    }
    Ok(traj)
}

/// The same split-step update with array phases and FFTs.
pub fn split_step_oracle(
    f_samples: &[f64],
    kinetic: &KineticSpec,
    initial_amplitudes: &[Complex64],
    domain: &DomainMap,
    opts: RunOptions,
) -> Result<Trajectory> {
    check_run(&opts)?;
    let len = 1usize << kinetic.n;
    if f_samples.len() != len || initial_amplitudes.len() != len || domain.points() != len {
        return arg("sample arrays do not match the kinetic grid");
    }
    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(len);
    let inverse = planner.plan_fft_inverse(len);
    let root = (len as f64).sqrt();
    let vphase: Vec<Complex64> = f_samples.iter().map(|&v| Complex64::from_polar(1.0, -v)).collect();
    let kphase: Vec<Complex64> =
        kinetic.phases().into_iter().map(|k| Complex64::from_polar(1.0, -k)).collect();
    let mut psi = initial_amplitudes.to_vec();
    let prob = |psi: &[Complex64]| psi.iter().map(|a| a.norm_sqr()).collect::<Vec<_>>();
    let norm = |psi: &[Complex64]| psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();

    let mut traj = Trajectory::new(*domain, opts.keep_amplitudes);
    traj.record(0.0, prob(&psi), || psi.clone());
    for s in 1..=opts.steps {
        let before = norm(&psi);
        psi.iter_mut().zip(&vphase).for_each(|(a, p)| *a *= p);
        // the transform with e^{+2πi jk/N} is rustfft's inverse
        inverse.process(&mut psi);
        psi.iter_mut().zip(&kphase).for_each(|(a, p)| *a *= p / root);
        forward.process(&mut psi);
        psi.iter_mut().for_each(|a| *a /= root);
        traj.max_norm_drift = traj.max_norm_drift.max((norm(&psi) - before).abs());
        if s % opts.snapshot_every == 0 {
            traj.record(s as f64 * kinetic.dt, prob(&psi), || psi.clone());
        }
    }
    Ok(traj)
}
