//! Gates, circuits, and the line-oriented text format.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};

/// A gate on 1-based qubit indices: main register `1..=n`, ancillas after.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Gate {
    /// `diag(e^{-iθ/2}, e^{iθ/2})`
    Rz {
        q: u32,
        theta: f64,
    },
    /// `e^{-iθX/2}`
    Rx {
        q: u32,
        theta: f64,
    },
    Cx {
        c: u32,
        t: u32,
    },
    Cz {
        a: u32,
        b: u32,
    },
    H {
        q: u32,
    },
}

impl Gate {
    fn qubits(&self) -> (u32, Option<u32>) {
        match *self {
            Gate::Rz { q, .. } | Gate::Rx { q, .. } | Gate::H { q } => (q, None),
            Gate::Cx { c, t } => (c, Some(t)),
            Gate::Cz { a, b } => (a, Some(b)),
        }
    }

    pub fn max_qubit(&self) -> u32 {
        let (a, b) = self.qubits();
        a.max(b.unwrap_or(0))
    }

    /// The inverse gate.
    pub fn inverse(&self) -> Gate {
        match *self {
            Gate::Rz { q, theta } => Gate::Rz { q, theta: -theta },
            Gate::Rx { q, theta } => Gate::Rx { q, theta: -theta },
            g => g,
        }
    }
}

/// Tallies by gate kind.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateCountReport {
    pub rz: u64,
    pub rx: u64,
    pub cnot: u64,
    pub cz: u64,
    /// Hadamards; only the Fourier transform circuits contain them.
    pub h: u64,
    pub total: u64,
}

impl GateCountReport {
    pub fn new(rz: u64, rx: u64, cnot: u64, cz: u64) -> Self {
        GateCountReport { rz, rx, cnot, cz, h: 0, total: rz + rx + cnot + cz }
    }
}

impl std::ops::Add for GateCountReport {
    type Output = GateCountReport;

    fn add(self, o: GateCountReport) -> GateCountReport {
        GateCountReport {
            rz: self.rz + o.rz,
            rx: self.rx + o.rx,
            cnot: self.cnot + o.cnot,
            cz: self.cz + o.cz,
            h: self.h + o.h,
            total: self.total + o.total,
        }
    }
}

/// Ordered gate list over `n_main + m_anc` qubits. The implemented operator
/// is `e^{i global_phase} · g_last ⋯ g_first`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    pub n_main: u32,
    pub m_anc: u32,
    pub gates: Vec<Gate>,
    pub global_phase: f64,
}

impl Circuit {
    pub fn new(n_main: u32, m_anc: u32) -> Self {
        Circuit { n_main, m_anc, gates: Vec::new(), global_phase: 0.0 }
    }

    pub fn width(&self) -> u32 {
        self.n_main + self.m_anc
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Appends a gate after checking indices and angles.
    pub fn push(&mut self, gate: Gate) -> Result<()> {
        let (a, b) = gate.qubits();
        let w = self.width();
        if a == 0 || a > w || b.is_some_and(|b| b == 0 || b > w) {
            return arg(format!("{gate:?} out of range for {w} qubits"));
        }
        if b == Some(a) {
            return arg(format!("{gate:?} uses the same qubit twice"));
        }
        if let Gate::Rz { theta, .. } | Gate::Rx { theta, .. } = gate {
            if !theta.is_finite() {
                return arg(format!("{gate:?} has a non-finite angle"));
            }
        }
        self.gates.push(gate);
        Ok(())
    }

    pub(crate) fn rz(&mut self, q: u32, theta: f64) {
        self.push(Gate::Rz { q, theta }).expect("synthesized gate in range");
    }

    pub(crate) fn rx(&mut self, q: u32, theta: f64) {
        self.push(Gate::Rx { q, theta }).expect("synthesized gate in range");
    }

    pub(crate) fn cx(&mut self, c: u32, t: u32) {
        self.push(Gate::Cx { c, t }).expect("synthesized gate in range");
    }

    pub(crate) fn cz(&mut self, a: u32, b: u32) {
        self.push(Gate::Cz { a, b }).expect("synthesized gate in range");
    }

    pub(crate) fn h(&mut self, q: u32) {
        self.push(Gate::H { q }).expect("synthesized gate in range");
    }

    /// Appends `other` (applied after `self`). Registers must match.
    pub fn append(&mut self, other: &Circuit) -> Result<()> {
        if other.width() > self.width() {
            return arg(format!(
                "cannot append a {}-qubit circuit to a {}-qubit one",
                other.width(),
                self.width()
            ));
        }
        self.gates.extend_from_slice(&other.gates);
        self.global_phase += other.global_phase;
        Ok(())
    }

    /// Reversed gate order, inverted gates, negated phase.
    pub fn inverse(&self) -> Circuit {
        Circuit {
            n_main: self.n_main,
            m_anc: self.m_anc,
            gates: self.gates.iter().rev().map(Gate::inverse).collect(),
            global_phase: -self.global_phase,
        }
    }

    pub fn counts(&self) -> GateCountReport {
        count_gates(self)
    }

    /// Text export: a `# n=.. m=.. global_phase=..` header, then one gate per line.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "# n={} m={} global_phase={:.16e}", self.n_main, self.m_anc, self.global_phase).unwrap();
        for g in &self.gates {
            match *g {
                Gate::Rz { q, theta } => writeln!(s, "RZ {q} {theta:.16e}"),
                Gate::Rx { q, theta } => writeln!(s, "RX {q} {theta:.16e}"),
                Gate::Cx { c, t } => writeln!(s, "CX {c} {t}"),
                Gate::Cz { a, b } => writeln!(s, "CZ {a} {b}"),
                Gate::H { q } => writeln!(s, "H {q}"),
            }
            .unwrap();
        }
        s
    }

    /// Parses the format written by [`Circuit::to_text`].
    pub fn from_text(text: &str) -> Result<Circuit> {
        let bad = |line: usize, msg: &str| Error::Format(format!("line {line}: {msg}"));
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or_else(|| bad(1, "empty circuit file"))?;
        let mut n = None;
        let mut m = None;
        let mut phase = None;
        for field in header.trim_start_matches('#').split_whitespace() {
            match field.split_once('=') {
                Some(("n", v)) => n = v.parse::<u32>().ok(),
                Some(("m", v)) => m = v.parse::<u32>().ok(),
                Some(("global_phase", v)) => phase = v.parse::<f64>().ok(),
                _ => return Err(bad(1, "malformed header")),
            }
        }
        let (Some(n), Some(m), Some(phase)) = (n, m, phase) else {
            return Err(bad(1, "header needs n, m and global_phase"));
        };
        let mut c = Circuit::new(n, m);
        c.global_phase = phase;
        for (i, line) in lines {
            let lineno = i + 1;
            let f: Vec<&str> = line.split_whitespace().collect();
            let q = |s: &str| s.parse::<u32>().map_err(|_| bad(lineno, "bad qubit index"));
            let a = |s: &str| s.parse::<f64>().map_err(|_| bad(lineno, "bad angle"));
            let gate = match f.as_slice() {
                ["RZ", x, th] => Gate::Rz { q: q(x)?, theta: a(th)? },
                ["RX", x, th] => Gate::Rx { q: q(x)?, theta: a(th)? },
                ["CX", x, y] => Gate::Cx { c: q(x)?, t: q(y)? },
                ["CZ", x, y] => Gate::Cz { a: q(x)?, b: q(y)? },
                ["H", x] => Gate::H { q: q(x)? },
                _ => return Err(bad(lineno, "unknown gate line")),
            };
            c.push(gate).map_err(|e| bad(lineno, &e.to_string()))?;
        }
        Ok(c)
    }
}

/// Tallies the gates of a circuit by kind.
pub fn count_gates(circuit: &Circuit) -> GateCountReport {
    let mut r = GateCountReport::default();
    for g in &circuit.gates {
        match g {
            Gate::Rz { .. } => r.rz += 1,
            Gate::Rx { .. } => r.rx += 1,
            Gate::Cx { .. } => r.cnot += 1,
            Gate::Cz { .. } => r.cz += 1,
            Gate::H { .. } => r.h += 1,
        }
    }
    r.total = r.rz + r.rx + r.cnot + r.cz + r.h;
    r
}
