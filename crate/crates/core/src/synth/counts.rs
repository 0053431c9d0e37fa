//! Closed-form gate counts and the crossover between the two modes.

use crate::error::{arg, Error, Result};
use crate::synth::circuit::GateCountReport;
use crate::walsh::Mode;

/// Gate totals at `τ = 0` for `n` main qubits, cell depth `l` and label width
/// `m`. Ancilla-free circuits treat every cell as a subdomain, so only `l`
/// enters their count.
pub fn predict_counts(n: u32, l: u32, m: u32, mode: Mode) -> Result<GateCountReport> {
    if !(n >= l && l >= m && m >= 1) {
        return arg(format!("need n >= l >= m >= 1, got n={n}, l={l}, m={m}"));
    }
    if n > 40 {
        return arg(format!("n = {n} too large"));
    }
    let (n, l, m) = (n as u64, l as u64, m as u64);
    let p = |e: u64| 1u64 << e;
    Ok(match mode {
        Mode::AncillaFree => {
            let (m, r) = (l, n - l);
            let rz = p(m) * r * r.saturating_sub(1) / 2 + p(m) * r + p(m) - 1;
            let cx = p(m) * r * r.saturating_sub(1) + 2 * (p(m) - 1) * r + p(m) - 2;
            GateCountReport::new(rz, 0, cx, 0)
        }
        Mode::AncillaAssisted => {
            let rz = p(m) * n * (n - 1) / 2 + p(m) * n + p(m) + p(l) - 2;
            let rx = p(l + 1) * m;
            let cz = 4 * (p(l) - 1) * m;
            let cx = p(m) * n * (n - 1) + 2 * (p(m) - 1) * n + p(m) + p(l + 1) - 6;
            GateCountReport::new(rz, rx, cx, cz)
        }
    })
}

/// Counts of the polynomial part of an ancilla-assisted circuit alone.
pub fn predict_polynomial_counts(n: u32, m: u32) -> GateCountReport {
    let (n, m) = (n as u64, m as u64);
    let big = 1u64 << m;
    GateCountReport::new(
        big * n * (n - 1) / 2 + big * n + big - 1,
        0,
        big * n * (n - 1) + 2 * (big - 1) * n + big - 2,
        0,
    )
}

/// Counts of the labeling circuit alone.
pub fn predict_labeling_counts(l: u32, m: u32) -> GateCountReport {
    let (big_l, m) = (1u64 << l, m as u64);
    GateCountReport::new(big_l - 1, big_l * m, big_l - 2, 2 * (big_l - 1) * m)
}

/// Counts of the uncompute circuit, which omits the diagonal phase
/// correction of the labeling circuit.
pub fn predict_unlabel_counts(l: u32, m: u32) -> GateCountReport {
    let (big_l, m) = (1u64 << l, m as u64);
    GateCountReport::new(0, big_l * m, big_l - 2, 2 * (big_l - 1) * m)
}

/// `(A, B, C)` with `A n² + B n + C` = ancilla-assisted minus ancilla-free total.
fn quadratic(m: u32, l: u32) -> (f64, f64, f64) {
    let (mf, lf) = (m as f64, l as f64);
    let pm = |e: f64| e.exp2();
    let a = 3.0 * (pm(mf - 1.0) - pm(lf - 1.0));
    let b = 3.0 * (pm(mf - 1.0) - pm(lf - 1.0) + pm(lf) * lf);
    let c = -3.0 * pm(lf - 1.0) * lf * lf + 3.0 * pm(lf + 1.0) * mf + 3.0 * pm(lf - 1.0) * lf + pm(lf)
        - 2.0 * lf
        + pm(mf + 1.0)
        - 4.0 * mf
        - 5.0;
    (a, b, c)
}

/// Roots `(low, high)` of the quadratic in `n` giving the total-gate
/// difference between ancilla-free (depth `l`) and ancilla-assisted (width
/// `m`) circuits. Above `high` the ancilla-assisted circuit is smaller.
pub fn crossover_n_star(m: u32, l: u32) -> Result<(f64, f64)> {
    if !(l > m && m >= 1) || l > 40 {
        return arg(format!("need l > m >= 1, got m={m}, l={l}"));
    }
    let (a, b, c) = quadratic(m, l);
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return Err(Error::NoCrossover { m, l, discriminant: disc });
    }
    let s = disc.sqrt();
    let (r1, r2) = ((-b - s) / (2.0 * a), (-b + s) / (2.0 * a));
    Ok((r1.min(r2), r1.max(r2)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crossover_difference_matches_counts() {
        // the quadratic is the assisted-minus-free total difference
        for (m, l) in [(4, 6), (4, 8), (5, 10), (6, 11)] {
            let (lo, hi) = crossover_n_star(m, l).unwrap();
            assert!(lo < hi);
            let (a, b, c) = quadratic(m, l);
            assert!(a < 0.0);
            for n in l..30 {
                let free = predict_counts(n, l, l, Mode::AncillaFree).unwrap().total as f64;
                let anc = predict_counts(n, l, m, Mode::AncillaAssisted).unwrap().total as f64;
                let nf = n as f64;
                assert_eq!(anc - free, a * nf * nf + b * nf + c, "m={m} l={l} n={n}");
                if nf > hi {
                    assert!(anc < free);
                }
            }
        }
        assert!(crossover_n_star(4, 4).is_err());
    }

    #[test]
    fn parts_add_up() {
        for (n, l, m) in [(10, 8, 4), (12, 5, 3), (7, 2, 1)] {
            let sum = predict_polynomial_counts(n, m)
                + predict_labeling_counts(l, m)
                + predict_unlabel_counts(l, m);
            assert_eq!(sum, predict_counts(n, l, m, Mode::AncillaAssisted).unwrap());
        }
        assert_eq!(predict_polynomial_counts(10, 4), GateCountReport::new(895, 0, 1754, 0));
    }
}
