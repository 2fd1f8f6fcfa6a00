//! The randomized experiments.
//!
//! Repetitions run in parallel. Each draws its instance and solver seeds from
//! its own stream of the master seed, and records are collected in
//! repetition order, so results do not depend on scheduling.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::driver::{
    stabilize_from, AlgorithmOne, AlgorithmOneConfig, CandidateMode, ShiftConfig, StabilizationOutcome,
};
use crate::error::{Error, Result};
use crate::harness::instance::{gen_destabilized_instance, gen_instance, gen_unreachable_target, InstanceSpec};
use crate::harness::report::{
    ExperimentReport, Histogram, PlantedRecord, PlantedRecoveryReport, Snapshot, StabilizationRecord,
    StabilizationReport, UnreachableRecord, UnreachableReport, UnreachableSummary,
};
use crate::harness::verify::Certificate;
use crate::numerics::{poly_roots, DenseMatrix, MonicPoly, Tolerance};
use crate::rng::substream;

/// Plateau level separating unreachable targets, relative to the initial
/// distance.
pub const PLATEAU_THRESHOLD: f64 = 0.02;
/// `(min, max)` of the reachable phase over fifty baseline repetitions.
pub const BASELINE_REACHABLE_MIN_MAX: (f64, f64) = (6.737e-22, 1.057e-12);
/// Algorithm I iterations allowed when pushing a stable system's roots
/// across the imaginary axis.
pub const BOOTSTRAP_ITERATIONS: usize = 500;

/// `(instance seed, solver seed)` of repetition `rep`.
pub fn repetition_seeds(master: u64, rep: usize) -> (u64, u64) {
    let mut rng = substream(master, rep as u64);
    (rng.random(), rng.random())
}

// Runs to the iteration bound unless the distance becomes exactly zero.
const RUN_FULL: f64 = f64::MIN_POSITIVE;

fn solver_config(seed: u64, max_iters: usize, combinations: Option<usize>) -> AlgorithmOneConfig {
    AlgorithmOneConfig {
        epsilon: RUN_FULL,
        max_iters,
        mode: CandidateMode::RandomCombinations,
        seed,
        combinations_per_iter: combinations,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOneConfig {
    /// Template; the seed of each repetition replaces `spec.seed`.
    pub spec: InstanceSpec,
    pub seed: u64,
    pub reps: usize,
    /// Iteration counts at which distances are recorded; the run stops at the
    /// largest.
    pub snapshot_iters: Vec<usize>,
    pub combinations_per_iter: Option<usize>,
}

impl ExperimentOneConfig {
    /// Fifty repetitions with `n = 20`, `m = p = 3`, recorded after 1000 and
    /// 1500 iterations.
    pub fn baseline(seed: u64) -> Self {
        ExperimentOneConfig {
            spec: InstanceSpec::new(20, 3, 3, seed),
            seed,
            reps: 50,
            snapshot_iters: vec![1000, 1500],
            combinations_per_iter: None,
        }
    }
}

fn k_recovery(inst_a: &DenseMatrix, b: &DenseMatrix, c: &DenseMatrix, k: &DenseMatrix, planted: &DenseMatrix) -> f64 {
    (b * (k - planted) * c).norm() / inst_a.norm()
}

fn planted_repetition(cfg: &ExperimentOneConfig, rep: usize, tol: &Tolerance) -> (PlantedRecord, Option<Certificate>) {
    let (instance_seed, solver_seed) = repetition_seeds(cfg.seed, rep);
    let mut record = PlantedRecord {
        rep,
        instance_seed,
        solver_seed,
        snapshots: Vec::new(),
        iterations_used: 0,
        stalled: false,
        verification_mismatch: None,
        error: None,
    };
    let inst = match gen_instance(&cfg.spec.with_seed(instance_seed), tol) {
        Ok(i) => i,
        Err(e) => {
            record.error = Some(e.to_string());
            return (record, None);
        }
    };
    let mut snaps = cfg.snapshot_iters.clone();
    snaps.sort_unstable();
    let last = snaps.last().copied().unwrap_or(0).max(1);
    let scfg = solver_config(solver_seed, last, cfg.combinations_per_iter);
    let run = || -> Result<Certificate> {
        let sys = &inst.system;
        let mut alg = AlgorithmOne::with_initial_poly(sys, inst.d.clone(), inst.target.clone(), scfg, *tol)?;
        for &it in &snaps {
            while alg.iteration() < it && !alg.finished() {
                alg.step()?;
            }
            record.snapshots.push(Snapshot {
                iteration: it,
                relative_distance: alg.distance() / inst.target.norm(),
                k_recovery: k_recovery(sys.a(), sys.b(), sys.c(), alg.accumulated_gain(), &inst.planted_k),
            });
        }
        record.iterations_used = alg.iteration();
        record.stalled = alg.stalled();
        let cert = Certificate::new(
            format!("planted recovery rep {rep}"),
            sys,
            alg.accumulated_gain(),
            alg.current_poly(),
            solver_seed,
        )
        .with_target(&inst.target);
        match alg.outcome() {
            Ok(o) => record.verification_mismatch = Some(o.verification_mismatch),
            Err(e) => record.error = Some(e.to_string()),
        }
        Ok(cert)
    };
    match run() {
        Ok(cert) => (record, Some(cert)),
        Err(e) => {
            record.error = Some(e.to_string());
            (record, None)
        }
    }
}

/// Algorithm I against targets planted through a random gain: relative
/// polynomial distance and gain recovery after each snapshot iteration.
pub fn run_experiment_one(cfg: &ExperimentOneConfig, tol: &Tolerance) -> Result<ExperimentReport> {
    cfg.spec.validate()?;
    if cfg.snapshot_iters.is_empty() {
        return Err(Error::Domain("at least one snapshot iteration is needed".into()));
    }
    let results: Vec<_> = (0..cfg.reps).into_par_iter().map(|rep| planted_repetition(cfg, rep, tol)).collect();
    let (records, certs): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    let mut snaps = cfg.snapshot_iters.clone();
    snaps.sort_unstable();
    let column = |i: usize, f: fn(&Snapshot) -> f64| {
        records.iter().map(move |r| if r.error.is_some() { None } else { r.snapshots.get(i).map(f) })
    };
    let distance_histograms = snaps
        .iter()
        .enumerate()
        .map(|(i, it)| Histogram::decades(format!("{it} iter"), column(i, |s| s.relative_distance)))
        .collect();
    let recovery_histograms = snaps
        .iter()
        .enumerate()
        .map(|(i, it)| Histogram::decades(format!("{it} iter"), column(i, |s| s.k_recovery)))
        .collect();
    Ok(ExperimentReport::PlantedRecovery(PlantedRecoveryReport {
        seed: cfg.seed,
        spec: cfg.spec.clone(),
        reps: cfg.reps,
        snapshot_iters: snaps,
        combinations_per_iter: cfg.combinations_per_iter.unwrap_or(cfg.spec.m),
        epsilon: RUN_FULL,
        records,
        distance_histograms,
        recovery_histograms,
        certificates: certs.into_iter().flatten().collect(),
    }))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnreachableConfig {
    pub spec: InstanceSpec,
    pub seed: u64,
    pub reps: usize,
    /// Iterations in each phase.
    pub iters: usize,
    pub eps_range: f64,
    pub combinations_per_iter: Option<usize>,
}

impl UnreachableConfig {
    /// Fifty repetitions with `n = 20`, `m = p = 3`, 1000 iterations per
    /// phase and perturbations in `[-0.01, 0.01]`.
    pub fn baseline(seed: u64) -> Self {
        UnreachableConfig {
            spec: InstanceSpec::new(20, 3, 3, seed),
            seed,
            reps: 50,
            iters: 1000,
            eps_range: 0.01,
            combinations_per_iter: None,
        }
    }
}

fn unreachable_repetition(
    cfg: &UnreachableConfig,
    rep: usize,
    tol: &Tolerance,
) -> (UnreachableRecord, Vec<Certificate>) {
    let (instance_seed, solver_seed) = repetition_seeds(cfg.seed, rep);
    let mut record = UnreachableRecord {
        rep,
        instance_seed,
        initial_relative_distance: None,
        plateau_relative_distance: None,
        plateau_relative_residual: None,
        phase_one_stalled: false,
        phase_two_relative_distance: None,
        phase_two_iterations: 0,
        error: None,
    };
    let mut certs = Vec::new();
    let mut run = || -> Result<()> {
        let inst = gen_unreachable_target(&cfg.spec.with_seed(instance_seed), cfg.eps_range, tol)?;
        let sys = &inst.system;
        let b = &inst.target;
        let initial = b.distance(&inst.d);
        record.initial_relative_distance = Some(initial / b.norm());

        let one = solver_config(solver_seed, cfg.iters, cfg.combinations_per_iter);
        let mut alg = AlgorithmOne::with_initial_poly(sys, inst.d.clone(), b.clone(), one, *tol)?;
        alg.run_to_end()?;
        record.plateau_relative_distance = Some(alg.distance() / b.norm());
        record.plateau_relative_residual = Some(alg.distance() / initial);
        record.phase_one_stalled = alg.stalled();
        let d_new = alg.current_poly().clone();
        certs.push(
            Certificate::new(
                format!("unreachable rep {rep} phase 1"),
                sys,
                alg.accumulated_gain(),
                &d_new,
                solver_seed,
            )
            .with_target(b),
        );
        alg.outcome()?;

        let two_seed = solver_seed.wrapping_add(1);
        let two = solver_config(two_seed, cfg.iters, cfg.combinations_per_iter);
        let mut alg = AlgorithmOne::with_initial_poly(sys, inst.d.clone(), d_new.clone(), two, *tol)?;
        alg.run_to_end()?;
        record.phase_two_relative_distance = Some(alg.distance() / d_new.norm());
        record.phase_two_iterations = alg.iteration();
        certs.push(
            Certificate::new(
                format!("unreachable rep {rep} phase 2"),
                sys,
                alg.accumulated_gain(),
                alg.current_poly(),
                two_seed,
            )
            .with_target(&d_new),
        );
        alg.outcome()?;
        Ok(())
    };
    if let Err(e) = run() {
        record.error = Some(e.to_string());
    }
    (record, certs)
}

/// First phase: Algorithm I towards a randomly perturbed, generically
/// unreachable target, recording where the distance levels off. Second
/// phase: from the same start, towards the polynomial the first phase
/// reached, which is reachable by construction.
pub fn run_unreachable_experiment(cfg: &UnreachableConfig, tol: &Tolerance) -> Result<ExperimentReport> {
    cfg.spec.validate()?;
    let results: Vec<_> = (0..cfg.reps).into_par_iter().map(|rep| unreachable_repetition(cfg, rep, tol)).collect();
    let (records, certs): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    let two: Vec<f64> =
        records.iter().filter(|r| r.error.is_none()).filter_map(|r| r.phase_two_relative_distance).collect();
    let summary = UnreachableSummary {
        plateau_threshold: PLATEAU_THRESHOLD,
        plateau_above_threshold: records
            .iter()
            .filter(|r| r.error.is_none() && r.plateau_relative_residual.is_some_and(|x| x > PLATEAU_THRESHOLD))
            .count(),
        phase_two_below_1e_10: two.iter().filter(|&&x| x < 1e-10).count(),
        phase_two_below_1e_11: two.iter().filter(|&&x| x < 1e-11).count(),
        phase_two_min: two.iter().copied().reduce(f64::min),
        phase_two_max: two.iter().copied().reduce(f64::max),
        baseline_min_max: BASELINE_REACHABLE_MIN_MAX,
    };
    let phase_two_histogram = Histogram::decades(
        format!("{} iter", cfg.iters),
        records.iter().map(|r| if r.error.is_some() { None } else { r.phase_two_relative_distance }),
    );
    Ok(ExperimentReport::Unreachable(UnreachableReport {
        seed: cfg.seed,
        spec: cfg.spec.clone(),
        reps: cfg.reps,
        iters: cfg.iters,
        eps_range: cfg.eps_range,
        combinations_per_iter: cfg.combinations_per_iter.unwrap_or(cfg.spec.m),
        records,
        phase_two_histogram,
        summary,
        certificates: certs.into_iter().flatten().collect(),
    }))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentTwoConfig {
    pub spec: InstanceSpec,
    pub seed: u64,
    pub instances: usize,
    pub shift: ShiftConfig,
    pub combinations_per_iter: Option<usize>,
}

impl ExperimentTwoConfig {
    /// Ten instances with `n = 10`, `m = 2`, `p = 3` and at most 200
    /// iterations each.
    pub fn baseline(seed: u64) -> Self {
        ExperimentTwoConfig {
            spec: InstanceSpec::new(10, 2, 3, seed),
            seed,
            instances: 10,
            shift: ShiftConfig::default(),
            combinations_per_iter: None,
        }
    }
}

fn rightmost(d: &MonicPoly) -> Option<f64> {
    poly_roots(d).ok().map(|r| r.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max))
}

fn stabilization_instance(
    cfg: &ExperimentTwoConfig,
    index: usize,
    tol: &Tolerance,
) -> (StabilizationRecord, Option<Certificate>) {
    let (instance_seed, solver_seed) = repetition_seeds(cfg.seed, index);
    let mut record = StabilizationRecord {
        instance: index,
        instance_seed,
        bootstrap_iterations: 0,
        initial_rightmost: None,
        success: false,
        iterations_used: 0,
        final_rightmost: None,
        rhp_increases: 0,
        trajectory: Vec::new(),
        error: None,
    };
    let mut run = || -> Result<Certificate> {
        let inst = gen_destabilized_instance(&cfg.spec.with_seed(instance_seed), BOOTSTRAP_ITERATIONS, tol)?;
        record.bootstrap_iterations = inst.bootstrap_iterations;
        record.initial_rightmost = rightmost(&inst.d);
        let one = AlgorithmOneConfig {
            combinations_per_iter: cfg.combinations_per_iter,
            ..solver_config(solver_seed, 1, None)
        };
        let out: StabilizationOutcome = stabilize_from(&inst.system, inst.d.clone(), &cfg.shift, &one, tol)?;
        record.success = out.success;
        record.iterations_used = out.iterations_used;
        record.final_rightmost = rightmost(&out.d_final);
        record.rhp_increases = out.rhp_increases;
        record.trajectory = out.trajectory;
        let cert = Certificate::new(
            format!("stabilization instance {index}"),
            &inst.system,
            &out.k_final,
            &out.d_final,
            solver_seed,
        );
        Ok(if out.success { cert.with_hurwitz_claim() } else { cert })
    };
    match run() {
        Ok(cert) => (record, Some(cert)),
        Err(e) => {
            record.error = Some(e.to_string());
            (record, None)
        }
    }
}

/// Builds destabilized instances from stable ones and steers them back into
/// the left half plane by output feedback.
pub fn run_experiment_two(cfg: &ExperimentTwoConfig, tol: &Tolerance) -> Result<ExperimentReport> {
    cfg.spec.validate()?;
    cfg.shift.validate()?;
    let results: Vec<_> = (0..cfg.instances).into_par_iter().map(|i| stabilization_instance(cfg, i, tol)).collect();
    let (records, certs): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    Ok(ExperimentReport::Stabilization(StabilizationReport {
        seed: cfg.seed,
        spec: cfg.spec.clone(),
        instances: cfg.instances,
        shift: cfg.shift.clone(),
        combinations_per_iter: cfg.combinations_per_iter.unwrap_or(cfg.spec.m),
        stabilized: records.iter().filter(|r| r.success && r.error.is_none()).count(),
        records,
        certificates: certs.into_iter().flatten().collect(),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_planted_run_is_deterministic() {
        let cfg = ExperimentOneConfig {
            spec: InstanceSpec::new(6, 2, 2, 0),
            seed: 5,
            reps: 3,
            snapshot_iters: vec![20, 40],
            combinations_per_iter: None,
        };
        let tol = Tolerance::for_dim(6);
        let a = run_experiment_one(&cfg, &tol).unwrap();
        let b = run_experiment_one(&cfg, &tol).unwrap();
        assert_eq!(a, b);
        match a {
            ExperimentReport::PlantedRecovery(r) => {
                assert_eq!(r.records.len(), 3);
                assert!(r.distance_histograms.iter().all(|h| h.total() == 3));
                assert!(r.recovery_histograms.iter().all(|h| h.total() == 3));
            }
            _ => panic!("wrong report"),
        }
    }

    #[test]
    fn seeds_differ_per_repetition() {
        assert_ne!(repetition_seeds(1, 0), repetition_seeds(1, 1));
        assert_eq!(repetition_seeds(1, 4), repetition_seeds(1, 4));
    }
}
