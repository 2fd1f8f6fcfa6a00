//! Experiment reports: per-repetition records, decade histograms, embedded
//! certificates and a plain-text rendering.
//!
//! Reports hold nothing but values computed from the configuration and the
//! seed, so rerunning an experiment reproduces its report byte for byte.
//! Wall-clock timings are printed by the caller instead.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::driver::{ShiftConfig, TrajectoryPoint};
use crate::harness::instance::InstanceSpec;
use crate::harness::verify::Certificate;

/// Exponent of the lowest decade edge.
pub const LOWEST_DECADE: i32 = -15;
/// Exponent of the highest decade edge.
pub const HIGHEST_DECADE: i32 = -7;

/// `10^e`, correctly rounded.
fn decade_edge(e: i32) -> f64 {
    format!("1e{e}").parse().expect("decimal literal")
}

/// Counts over `[1e-15, 1e-14), ..., [1e-8, 1e-7)` plus underflow (below
/// `1e-15`, including zero) and overflow (at least `1e-7`, or missing).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub label: String,
    /// Lower edge exponents of the decade bins.
    pub decades: Vec<i32>,
    pub counts: Vec<usize>,
    pub underflow: usize,
    pub overflow: usize,
}

impl Histogram {
    pub fn decades(label: impl Into<String>, values: impl IntoIterator<Item = Option<f64>>) -> Self {
        let decades: Vec<i32> = (LOWEST_DECADE..HIGHEST_DECADE).collect();
        let mut h =
            Histogram { label: label.into(), counts: vec![0; decades.len()], decades, underflow: 0, overflow: 0 };
        for v in values {
            h.insert(v);
        }
        h
    }

    fn insert(&mut self, value: Option<f64>) {
        let v = match value {
            Some(v) if v.is_finite() && v >= 0.0 => v,
            _ => {
                self.overflow += 1;
                return;
            }
        };
        if v < decade_edge(LOWEST_DECADE) {
            self.underflow += 1;
            return;
        }
        for (i, &e) in self.decades.iter().enumerate() {
            if v < decade_edge(e + 1) {
                self.counts[i] += 1;
                return;
            }
        }
        self.overflow += 1;
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum::<usize>() + self.underflow + self.overflow
    }

    /// Count of values inside the decade bins.
    pub fn in_range(&self) -> usize {
        self.counts.iter().sum()
    }
}

/// Histograms side by side, one column each.
fn render_histograms(out: &mut String, title: &str, hs: &[&Histogram]) {
    let _ = writeln!(out, "{title}");
    let _ = write!(out, "  {:<18}", "interval");
    for h in hs {
        let _ = write!(out, "{:>14}", h.label);
    }
    out.push('\n');
    let mut row = |name: String, f: &dyn Fn(&Histogram) -> usize| {
        let _ = write!(out, "  {name:<18}");
        for h in hs {
            let _ = write!(out, "{:>14}", f(h));
        }
        out.push('\n');
    };
    row("< 1e-15".into(), &|h| h.underflow);
    if let Some(first) = hs.first() {
        for (i, e) in first.decades.iter().enumerate() {
            row(format!("1e{} to 1e{}", e, e + 1), &|h| h.counts[i]);
        }
    }
    row(">= 1e-7 / failed".into(), &|h| h.overflow);
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub iteration: usize,
    /// `||d - b|| / ||b||`.
    pub relative_distance: f64,
    /// `||(A + B K_final C) - (A + B K C)|| / ||A||` (Frobenius).
    pub k_recovery: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlantedRecord {
    pub rep: usize,
    pub instance_seed: u64,
    pub solver_seed: u64,
    pub snapshots: Vec<Snapshot>,
    pub iterations_used: usize,
    pub stalled: bool,
    pub verification_mismatch: Option<f64>,
    pub error: Option<String>,
}

impl PlantedRecord {
    pub fn final_snapshot(&self) -> Option<&Snapshot> {
        self.snapshots.last()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlantedRecoveryReport {
    pub seed: u64,
    pub spec: InstanceSpec,
    pub reps: usize,
    pub snapshot_iters: Vec<usize>,
    pub combinations_per_iter: usize,
    pub epsilon: f64,
    pub records: Vec<PlantedRecord>,
    /// One per snapshot iteration.
    pub distance_histograms: Vec<Histogram>,
    pub recovery_histograms: Vec<Histogram>,
    pub certificates: Vec<Certificate>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnreachableRecord {
    pub rep: usize,
    pub instance_seed: u64,
    /// `||b - d_0|| / ||b||`.
    pub initial_relative_distance: Option<f64>,
    /// `||b - d|| / ||b||` after the first phase.
    pub plateau_relative_distance: Option<f64>,
    /// `||b - d|| / ||b - d_0||` after the first phase.
    pub plateau_relative_residual: Option<f64>,
    pub phase_one_stalled: bool,
    /// `||d - d_new|| / ||d_new||` after the second phase.
    pub phase_two_relative_distance: Option<f64>,
    pub phase_two_iterations: usize,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnreachableSummary {
    pub plateau_threshold: f64,
    pub plateau_above_threshold: usize,
    pub phase_two_below_1e_10: usize,
    pub phase_two_below_1e_11: usize,
    pub phase_two_min: Option<f64>,
    pub phase_two_max: Option<f64>,
    /// `(min, max)` over fifty baseline repetitions, for comparison.
    pub baseline_min_max: (f64, f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnreachableReport {
    pub seed: u64,
    pub spec: InstanceSpec,
    pub reps: usize,
    pub iters: usize,
    pub eps_range: f64,
    pub combinations_per_iter: usize,
    pub records: Vec<UnreachableRecord>,
    pub phase_two_histogram: Histogram,
    pub summary: UnreachableSummary,
    pub certificates: Vec<Certificate>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilizationRecord {
    pub instance: usize,
    pub instance_seed: u64,
    pub bootstrap_iterations: usize,
    pub initial_rightmost: Option<f64>,
    pub success: bool,
    pub iterations_used: usize,
    pub final_rightmost: Option<f64>,
    pub rhp_increases: usize,
    /// Root multisets, one per accepted step, after the starting one.
    pub trajectory: Vec<TrajectoryPoint>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilizationReport {
    pub seed: u64,
    pub spec: InstanceSpec,
    pub instances: usize,
    pub shift: ShiftConfig,
    pub combinations_per_iter: usize,
    pub records: Vec<StabilizationRecord>,
    pub stabilized: usize,
    pub certificates: Vec<Certificate>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "experiment", rename_all = "snake_case")]
pub enum ExperimentReport {
    PlantedRecovery(PlantedRecoveryReport),
    Unreachable(UnreachableReport),
    Stabilization(StabilizationReport),
}

impl ExperimentReport {
    pub fn certificates(&self) -> &[Certificate] {
        match self {
            ExperimentReport::PlantedRecovery(r) => &r.certificates,
            ExperimentReport::Unreachable(r) => &r.certificates,
            ExperimentReport::Stabilization(r) => &r.certificates,
        }
    }

    pub fn render(&self) -> String {
        match self {
            ExperimentReport::PlantedRecovery(r) => r.render(),
            ExperimentReport::Unreachable(r) => r.render(),
            ExperimentReport::Stabilization(r) => r.render(),
        }
    }
}

fn sci(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.3e}")).unwrap_or_else(|| "-".into())
}

fn header(out: &mut String, title: &str, seed: u64, spec: &InstanceSpec) {
    let _ = writeln!(out, "{title}");
    let _ = writeln!(
        out,
        "seed {seed}, n={} m={} p={}, coefficients in [-{}, {}], B/C entries in [-{}, {}], K entries in [-{}, {}]",
        spec.n,
        spec.m,
        spec.p,
        spec.coeff_range,
        spec.coeff_range,
        spec.bc_entry_range,
        spec.bc_entry_range,
        spec.k_entry_range,
        spec.k_entry_range
    );
}

impl PlantedRecoveryReport {
    pub fn render(&self) -> String {
        let mut out = String::new();
        header(&mut out, "Planted gain recovery", self.seed, &self.spec);
        let _ = writeln!(
            out,
            "{} repetitions, {} random combinations per iteration\n",
            self.reps, self.combinations_per_iter
        );
        render_histograms(&mut out, "||d_final - b|| / ||b||", &self.distance_histograms.iter().collect::<Vec<_>>());
        out.push('\n');
        render_histograms(
            &mut out,
            "||(A + B K_final C) - (A + B K C)|| / ||A||",
            &self.recovery_histograms.iter().collect::<Vec<_>>(),
        );
        let stalled = self.records.iter().filter(|r| r.stalled).count();
        let errors = self.records.iter().filter(|r| r.error.is_some()).count();
        let _ = writeln!(out, "\nstalled runs: {stalled}, failed runs: {errors}");
        out
    }
}

impl UnreachableReport {
    pub fn render(&self) -> String {
        let mut out = String::new();
        header(&mut out, "Reachable versus unreachable targets", self.seed, &self.spec);
        let s = &self.summary;
        let _ = writeln!(
            out,
            "{} repetitions, {} iterations per phase, perturbation range {}\n",
            self.reps, self.iters, self.eps_range
        );
        let _ = writeln!(
            out,
            "  {:>4} {:>12} {:>12} {:>12} {:>12}",
            "rep", "initial", "plateau", "plateau/init", "reachable"
        );
        for r in &self.records {
            let _ = writeln!(
                out,
                "  {:>4} {:>12} {:>12} {:>12} {:>12}",
                r.rep,
                sci(r.initial_relative_distance),
                sci(r.plateau_relative_distance),
                sci(r.plateau_relative_residual),
                sci(r.phase_two_relative_distance)
            );
        }
        let _ = writeln!(
            out,
            "\nplateau ||b - d|| / ||b - d_0|| above {}: {}/{}",
            s.plateau_threshold, s.plateau_above_threshold, self.reps
        );
        let _ = writeln!(
            out,
            "reachable phase below 1e-10: {}/{}, below 1e-11: {}/{}",
            s.phase_two_below_1e_10, self.reps, s.phase_two_below_1e_11, self.reps
        );
        let _ = writeln!(
            out,
            "reachable phase (min, max): ({}, {}), baseline ({:.3e}, {:.3e})\n",
            sci(s.phase_two_min),
            sci(s.phase_two_max),
            s.baseline_min_max.0,
            s.baseline_min_max.1
        );
        render_histograms(&mut out, "||d_final - d_new|| / ||d_new||", &[&self.phase_two_histogram]);
        out
    }
}

impl StabilizationReport {
    pub fn render(&self) -> String {
        let mut out = String::new();
        header(&mut out, "Stabilization by output feedback", self.seed, &self.spec);
        let _ = writeln!(
            out,
            "{} instances, at most {} iterations, {} random combinations per iteration\n",
            self.instances, self.shift.max_total_iters, self.combinations_per_iter
        );
        let _ = writeln!(
            out,
            "  {:>4} {:>10} {:>12} {:>8} {:>10} {:>12}",
            "inst", "bootstrap", "rightmost", "stable", "iters", "final"
        );
        for r in &self.records {
            let _ = writeln!(
                out,
                "  {:>4} {:>10} {:>12} {:>8} {:>10} {:>12}",
                r.instance,
                r.bootstrap_iterations,
                sci(r.initial_rightmost),
                if r.success { "yes" } else { "no" },
                r.iterations_used,
                sci(r.final_rightmost)
            );
        }
        let _ = writeln!(out, "\nstabilized: {}/{}", self.stabilized, self.instances);
        out
    }
}
