//! Experiment drivers behind the command-line tool.
//!
//! Every driver writes plain data files into the configured output
//! directory. Apart from `timing.json`, identical configurations produce
//! byte-identical files.

mod config;

pub use config::{
    CountsConfig, DynamicsConfig, ExperimentConfig, FitConfig, ModeSelection, OutputConfig, Partitioning,
    PotentialConfig,
};

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::approx::{approximate_adaptive, approximate_uniform, PiecewisePoly};
use crate::error::{Error, Result};
use crate::grid::{CellPartition, DomainMap};
use crate::potential::Potential;
use crate::statevector::{
    delta_errors, init_gaussian, split_step_oracle, zalka_wiesner_run, KineticSpec, RunOptions,
};
use crate::synth::{
    build_assisted_parts, build_circuit, count_gates, crossover_n_star, predict_counts,
    predict_labeling_counts, predict_polynomial_counts, predict_unlabel_counts, Circuit, GateCountReport,
};
use crate::walsh::Mode;

/// Environment variable holding the worker thread count for sweeps.
pub const THREADS_ENV: &str = "PWDIAG_THREADS";

/// Threshold on `δ̃(0)` above which a run counts as a verification failure.
pub const EXACTNESS_TOL: f64 = 1e-9;

/// Threshold on the gate-versus-array trajectory difference.
pub const EQUIVALENCE_TOL: f64 = 1e-8;

/// Runs `f` on a pool sized by [`THREADS_ENV`] (all cores when unset).
pub fn with_thread_pool<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T> {
    let threads =
        match std::env::var(THREADS_ENV) {
            Ok(v) => v.parse::<usize>().ok().filter(|&t| t > 0).ok_or_else(|| {
                Error::Config(format!("{THREADS_ENV} must be a positive integer, got `{v}`"))
            })?,
            Err(_) => 0,
        };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    Ok(pool.install(f))
}

/// A fitted potential ready for synthesis.
#[derive(Debug, Clone)]
pub struct Fit {
    pub epsilon: f64,
    pub poly: PiecewisePoly,
    pub partition: CellPartition,
    /// `scale * V` at every mesh point.
    pub target: Vec<f64>,
}

/// Fits `scale * V` on `domain` at tolerance `epsilon`.
pub fn fit(cfg: &ExperimentConfig, potential: &Potential, domain: &DomainMap, epsilon: f64) -> Result<Fit> {
    let depth = cfg.max_depth();
    let (poly, partition) = match cfg.fit.partition {
        Partitioning::Adaptive => approximate_adaptive(potential, domain, epsilon, cfg.fit.alpha, depth)?,
        Partitioning::Uniform => approximate_uniform(potential, domain, epsilon, cfg.fit.alpha, depth)?,
    };
    let target = (0..domain.points()).map(|k| potential.evaluate(domain.mesh_point(k))).collect();
    Ok(Fit { epsilon, poly, partition, target })
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, contents)?;
    Ok(path)
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn predicted(n: u32, partition: &CellPartition, mode: Mode) -> Option<GateCountReport> {
    let l = partition.l();
    match mode {
        Mode::AncillaFree => predict_counts(n, l, l, mode).ok(),
        Mode::AncillaAssisted => predict_counts(n, l, partition.m(), mode).ok(),
    }
}

/// One row of the experiment 1 table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ne1Row {
    pub epsilon: f64,
    pub tau: f64,
    pub delta: f64,
    pub delta_tilde: f64,
    pub rz: u64,
    pub cnot: u64,
    pub k: usize,
    pub l: u32,
    pub achieved_epsilon: f64,
}

/// Experiment 1: fit, synthesize ancilla-free at every `(ε, τ)`, and measure
/// `δ` and `δ̃`. Rows come back in config order.
pub fn ne1_rows(cfg: &ExperimentConfig) -> Result<Vec<Ne1Row>> {
    if cfg.fit.mode != ModeSelection::AncillaFree {
        return Err(Error::Config("experiment 1 is ancilla-free only".into()));
    }
    let domain = cfg.domain()?;
    let potential = cfg.potential()?.scaled(cfg.potential.scale);
    let fits: Vec<Fit> =
        cfg.fit.epsilon.par_iter().map(|&eps| fit(cfg, &potential, &domain, eps)).collect::<Result<_>>()?;
    let jobs: Vec<(&Fit, f64)> = fits.iter().flat_map(|f| cfg.fit.tau.iter().map(move |&t| (f, t))).collect();
    jobs.par_iter()
        .map(|&(f, tau)| {
            let c = build_circuit(&f.poly, &f.partition, cfg.n, Mode::AncillaFree, tau)?;
            let (delta, delta_tilde) = delta_errors(&c, &f.target, &f.poly.mesh_values())?;
            let counts = count_gates(&c);
            Ok(Ne1Row {
                epsilon: f.epsilon,
                tau,
                delta,
                delta_tilde,
                rz: counts.rz,
                cnot: counts.cnot,
                k: f.partition.k(),
                l: f.partition.l(),
                achieved_epsilon: f.poly.epsilon(),
            })
        })
        .collect()
}

/// Writes `ne1.csv` and fails with a verification error if any `τ = 0` row
/// is not exact.
pub fn run_ne1(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let start = Instant::now();
    let rows = ne1_rows(cfg)?;
    let mut csv = String::from("eps,tau,delta,delta_tilde,rz,cnot\n");
    for r in &rows {
        writeln!(
            csv,
            "{:e},{:e},{:.16e},{:.16e},{},{}",
            r.epsilon, r.tau, r.delta, r.delta_tilde, r.rz, r.cnot
        )
        .unwrap();
    }
    let mut files = vec![write(out, "ne1.csv", &csv)?];
    let manifest: Vec<serde_json::Value> = rows
        .iter()
        .filter(|r| r.tau == 0.0)
        .map(|r| {
            let part = CellPartition::uniform(r.l);
            serde_json::json!({
                "epsilon": r.epsilon,
                "achieved_epsilon": r.achieved_epsilon,
                "K": r.k,
                "L": 1u64 << r.l,
                "l": r.l,
                "m": r.l,
                "M": 1u64 << r.l,
                "predicted": predicted(cfg.n, &part, Mode::AncillaFree),
            })
        })
        .collect();
    files.push(write(out, "manifest.json", &json(&manifest))?);
    files.push(write_timing(out, start)?);
    if cfg.output.gnuplot {
        files.push(write(out, "ne1.gp", NE1_GNUPLOT)?);
    }
    if let Some(bad) = rows.iter().find(|r| r.tau == 0.0 && !(r.delta_tilde <= EXACTNESS_TOL)) {
        return Err(Error::Verification(format!(
            "delta_tilde = {:e} at eps = {:e}, tau = 0",
            bad.delta_tilde, bad.epsilon
        )));
    }
    Ok(files)
}

fn write_timing(out: &Path, start: Instant) -> Result<PathBuf> {
    write(out, "timing.json", &json(&serde_json::json!({ "wall_seconds": start.elapsed().as_secs_f64() })))
}

/// Summary of one experiment 2 mode.
#[derive(Debug, Clone, Serialize)]
pub struct Ne2Mode {
    pub mode: Mode,
    pub counts: GateCountReport,
    pub predicted: Option<GateCountReport>,
    /// Labeling / polynomial / uncompute counts for ancilla-assisted runs.
    pub stages: Option<[GateCountReport; 3]>,
    pub oracle_diff: f64,
    pub max_norm_drift: f64,
    pub final_reflected: f64,
    pub final_transmitted: f64,
    pub trajectory: String,
}

/// Experiment 2 result.
#[derive(Debug, Clone, Serialize)]
pub struct Ne2Report {
    pub potential: String,
    pub epsilon: f64,
    pub achieved_epsilon: f64,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "L")]
    pub big_l: usize,
    pub l: u32,
    pub m: u32,
    #[serde(rename = "M")]
    pub big_m: usize,
    pub tau: f64,
    pub n: u32,
    pub dt: f64,
    pub steps: usize,
    pub modes: Vec<Ne2Mode>,
    /// Largest amplitude difference between the two modes, when both ran.
    pub mode_diff: Option<f64>,
}

/// Probability left and right of the domain midpoint.
fn split_mass(domain: &DomainMap, probs: &[f64]) -> (f64, f64) {
    let mid = 0.5 * (domain.a() + domain.b());
    let mut left = 0.0;
    let mut right = 0.0;
    for (k, p) in probs.iter().enumerate() {
        if domain.mesh_point(k) < mid {
            left += p;
        } else {
            right += p;
        }
    }
    (left, right)
}

/// Runs experiment 2 in memory; trajectories are returned as CSV text.
pub fn ne2_report(cfg: &ExperimentConfig) -> Result<Ne2Report> {
    let dyn_cfg = cfg
        .dynamics
        .as_ref()
        .ok_or_else(|| Error::Config("experiment 2 needs a [dynamics] section".into()))?;
    if cfg.fit.tau.iter().any(|&t| t != 0.0) {
        return Err(Error::Config("experiment 2 runs at tau = 0 only".into()));
    }
    let [epsilon] = cfg.fit.epsilon[..] else {
        return Err(Error::Config("experiment 2 takes a single epsilon".into()));
    };
    let domain = cfg.domain()?;
    let potential = cfg.potential()?.scaled(cfg.potential.scale * dyn_cfg.dt);
    let fitted = fit(cfg, &potential, &domain, epsilon)?;
    let modes = cfg.fit.mode.modes();
    if modes.contains(&Mode::AncillaAssisted) && fitted.partition.k() < 2 {
        return Err(Error::DegeneratePartition(fitted.partition.k()));
    }
    let kinetic = KineticSpec { length: domain.length(), n: cfg.n, dt: dyn_cfg.dt };
    let initial = init_gaussian(&domain, dyn_cfg.x0, dyn_cfg.p0, dyn_cfg.sigma)?;
    let opts =
        RunOptions { steps: dyn_cfg.steps, snapshot_every: dyn_cfg.snapshot_every, keep_amplitudes: true };
    let f_samples = fitted.poly.mesh_values();
    let oracle = split_step_oracle(&f_samples, &kinetic, initial.amplitudes(), &domain, opts)?;

    let runs: Vec<(Ne2Mode, crate::statevector::Trajectory)> = modes
        .par_iter()
        .map(|&mode| {
            let (circuit, stages): (Circuit, Option<[GateCountReport; 3]>) = match mode {
                Mode::AncillaFree => {
                    (build_circuit(&fitted.poly, &fitted.partition, cfg.n, mode, 0.0)?, None)
                }
                Mode::AncillaAssisted => {
                    let parts = build_assisted_parts(&fitted.poly, &fitted.partition, cfg.n, 0.0)?;
                    let stages = [
                        count_gates(&parts.labeling),
                        count_gates(&parts.polynomial),
                        count_gates(&parts.uncompute),
                    ];
                    (parts.concat(), Some(stages))
                }
            };
            let traj = zalka_wiesner_run(&initial, &circuit, &kinetic, &domain, opts)?;
            let oracle_diff = traj.max_amplitude_diff(&oracle).expect("amplitudes kept");
            let (left, right) = split_mass(&domain, traj.probs.last().expect("t = 0 snapshot"));
            Ok((
                Ne2Mode {
                    mode,
                    counts: count_gates(&circuit),
                    predicted: predicted(cfg.n, &fitted.partition, mode),
                    stages,
                    oracle_diff,
                    max_norm_drift: traj.max_norm_drift,
                    final_reflected: left,
                    final_transmitted: right,
                    trajectory: traj.to_csv(),
                },
                traj,
            ))
        })
        .collect::<Result<_>>()?;
    let mode_diff = match runs.as_slice() {
        [(_, a), (_, b)] => a.max_amplitude_diff(b),
        _ => None,
    };
    let p = &fitted.partition;
    Ok(Ne2Report {
        potential: potential.name().to_string(),
        epsilon,
        achieved_epsilon: fitted.poly.epsilon(),
        k: p.k(),
        big_l: p.cells(),
        l: p.l(),
        m: p.m(),
        big_m: p.big_m(),
        tau: 0.0,
        n: cfg.n,
        dt: dyn_cfg.dt,
        steps: dyn_cfg.steps,
        modes: runs.into_iter().map(|(m, _)| m).collect(),
        mode_diff,
    })
}

/// Writes one trajectory CSV per mode plus `manifest.json`, and fails with a
/// verification error if a gate-level run strays from the array oracle.
pub fn run_ne2(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let start = Instant::now();
    let report = ne2_report(cfg)?;
    let mut files = Vec::new();
    for m in &report.modes {
        files.push(write(out, &format!("trajectory_{}.csv", m.mode.name()), &m.trajectory)?);
    }
    let mut manifest = serde_json::to_value(&report).expect("serializable");
    for m in manifest["modes"].as_array_mut().expect("array") {
        m.as_object_mut().expect("object").remove("trajectory");
    }
    files.push(write(out, "manifest.json", &json(&manifest))?);
    files.push(write_timing(out, start)?);
    if cfg.output.gnuplot {
        for m in &report.modes {
            let script = NE2_GNUPLOT.replace("{mode}", m.mode.name());
            files.push(write(out, &format!("trajectory_{}.gp", m.mode.name()), &script)?);
        }
    }
    if let Some(bad) = report.modes.iter().find(|m| !(m.oracle_diff <= EQUIVALENCE_TOL)) {
        return Err(Error::Verification(format!(
            "{} trajectory differs from the array oracle by {:e}",
            bad.mode.name(),
            bad.oracle_diff
        )));
    }
    Ok(files)
}

/// One row of the gate-count table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountRow {
    pub n: u32,
    pub l: u32,
    pub m: u32,
    pub free: GateCountReport,
    pub assisted: GateCountReport,
    pub free_synth: Option<GateCountReport>,
    pub assisted_synth: Option<GateCountReport>,
    pub n_star: Option<f64>,
}

/// Predicted (and for small `n`, synthesized) counts for each `(n, l, m)`.
pub fn count_rows(cfg: &ExperimentConfig) -> Result<Vec<CountRow>> {
    let counts = cfg.counts.clone().unwrap_or(CountsConfig { n: cfg.n, cells: Vec::new(), synth_max_n: 12 });
    let cells: Vec<(u32, u32, Option<Fit>)> = if counts.cells.is_empty() {
        let domain = cfg.domain()?.with_qubits(counts.n)?;
        let potential = cfg.potential()?.scaled(cfg.potential.scale);
        let depth = cfg.fit.max_depth.unwrap_or(counts.n).min(counts.n);
        let cfg =
            ExperimentConfig { fit: FitConfig { max_depth: Some(depth), ..cfg.fit.clone() }, ..cfg.clone() };
        cfg.fit
            .epsilon
            .par_iter()
            .map(|&eps| {
                let f = fit(&cfg, &potential, &domain, eps)?;
                Ok((f.partition.l(), f.partition.m(), Some(f)))
            })
            .collect::<Result<_>>()?
    } else {
        counts.cells.iter().map(|&(l, m)| (l, m, None)).collect()
    };
    cells
        .par_iter()
        .map(|(l, m, fitted)| {
            let (n, l, m) = (counts.n, *l, (*m).max(1));
            let l = l.max(m);
            let free = predict_counts(n, l, l, Mode::AncillaFree)?;
            let assisted = predict_counts(n, l, m, Mode::AncillaAssisted)?;
            let (free_synth, assisted_synth) = match fitted {
                Some(f) if n <= counts.synth_max_n && f.partition.k() >= 2 => (
                    Some(count_gates(&build_circuit(&f.poly, &f.partition, n, Mode::AncillaFree, 0.0)?)),
                    Some(count_gates(&build_circuit(&f.poly, &f.partition, n, Mode::AncillaAssisted, 0.0)?)),
                ),
                _ => (None, None),
            };
            Ok(CountRow {
                n,
                l,
                m,
                free,
                assisted,
                free_synth,
                assisted_synth,
                n_star: crossover_n_star(m, l).ok().map(|r| r.1),
            })
        })
        .collect()
}

fn opt<T: std::fmt::Display>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Writes `counts.csv`.
pub fn run_gatecount(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let rows = count_rows(cfg)?;
    let mut csv = String::from(
        "n,l,m,free_rz,free_cnot,free_total,assisted_rz,assisted_rx,assisted_cnot,assisted_cz,assisted_total,free_synth_total,assisted_synth_total,n_star\n",
    );
    for r in &rows {
        writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.n,
            r.l,
            r.m,
            r.free.rz,
            r.free.cnot,
            r.free.total,
            r.assisted.rz,
            r.assisted.rx,
            r.assisted.cnot,
            r.assisted.cz,
            r.assisted.total,
            opt(r.free_synth.map(|c| c.total)),
            opt(r.assisted_synth.map(|c| c.total)),
            opt(r.n_star.map(|x| format!("{x:.4}"))),
        )
        .unwrap();
    }
    Ok(vec![write(out, "counts.csv", &csv)?])
}

/// The gate-count table of the reference study: `n = 20`, cells of depth
/// 6, 8, 10, 11 with label widths 4, 4, 5, 6.
pub fn reference_counts_config() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::preset("cos-ne1").expect("builtin preset");
    cfg.counts = Some(CountsConfig { n: 20, cells: vec![(6, 4), (8, 4), (10, 5), (11, 6)], synth_max_n: 12 });
    cfg.output.dir = PathBuf::from("out/counts");
    cfg
}

/// Writes one circuit file per configured mode, for the first `ε` and `τ`.
pub fn export_circuit(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let domain = cfg.domain()?;
    let scale = cfg.potential.scale * cfg.dynamics.as_ref().map_or(1.0, |d| d.dt);
    let potential = cfg.potential()?.scaled(scale);
    let f = fit(cfg, &potential, &domain, cfg.fit.epsilon[0])?;
    let tau = cfg.fit.tau[0];
    let mut files = Vec::new();
    for mode in cfg.fit.mode.modes() {
        if mode == Mode::AncillaAssisted && f.partition.k() < 2 {
            return Err(Error::DegeneratePartition(f.partition.k()));
        }
        let c = build_circuit(&f.poly, &f.partition, cfg.n, mode, tau)?;
        files.push(write(out, &format!("circuit_{}.txt", mode.name()), &c.to_text())?);
    }
    Ok(files)
}

/// Splits an ancilla-assisted count into labeling, polynomial and uncompute
/// stages as predicted by the closed forms.
pub fn predicted_stages(n: u32, l: u32, m: u32) -> [GateCountReport; 3] {
    [predict_labeling_counts(l, m), predict_polynomial_counts(n, m), predict_unlabel_counts(l, m)]
}

const NE1_GNUPLOT: &str = "\
set datafile separator ','
set key autotitle columnhead
set logscale y
set xlabel 'tau'
plot for [e in '1e-1 1e-2 1e-3 1e-4'] 'ne1.csv' using (strcol(1) eq e ? $2 : 1/0):4 with linespoints title 'delta_tilde '.e
";

const NE2_GNUPLOT: &str = "\
set datafile separator ','
set xlabel 'x'
set ylabel 't'
set view map
splot 'trajectory_{mode}.csv' using 2:1:3 every ::1 with points pointtype 5 pointsize 0.3 palette notitle
";
