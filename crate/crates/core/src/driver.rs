//! Iterative procedures built from rank-one updates.
//!
//! [`AlgorithmOne`] drives the annihilating polynomial of `A + B K C`
//! towards a target by greedily applying the best of several rank-one
//! updates per iteration and accumulating `K`. Its convergence rests on the
//! unproven assumption that whenever some `K` gets closer to the target, a
//! `K` with a single nonzero row does too; the outcome reports whether
//! progress stalled so runs can be read as evidence for or against it.
//!
//! [`stabilize_by_output_feedback`] repeatedly retargets the iteration at a
//! copy of the current roots nudged towards the left half plane.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feedback::{rank_one_update_from, verify_feedback, FeedbackSystem, RankOneResult};
use crate::krylov::{annihilating_polynomial, full_krylov};
use crate::numerics::{poly_from_roots, poly_roots, DenseMatrix, MonicPoly, Tolerance, Vector};
use crate::rng::{seeded, substream, unit_vector, ExperimentRng};

/// Consecutive iterations without strict improvement before giving up.
pub const MAX_STAGNANT_ITERATIONS: usize = 10;
/// A root counts as stable when its real part is below `-HURWITZ_MARGIN`.
pub const HURWITZ_MARGIN: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateMode {
    /// One candidate per column of `B`.
    ColumnsOfB,
    /// `combinations_per_iter` random unit combinations of the columns.
    RandomCombinations,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmOneConfig {
    /// Stop once `||b - d|| < epsilon`.
    pub epsilon: f64,
    /// Bound on outer iterations.
    pub max_iters: usize,
    pub mode: CandidateMode,
    pub seed: u64,
    /// Candidates per iteration in random mode; `None` means `m`.
    pub combinations_per_iter: Option<usize>,
}

impl Default for AlgorithmOneConfig {
    fn default() -> Self {
        AlgorithmOneConfig {
            epsilon: 1e-10,
            max_iters: 1000,
            mode: CandidateMode::RandomCombinations,
            seed: 0,
            combinations_per_iter: None,
        }
    }
}

impl AlgorithmOneConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::Domain(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if self.max_iters == 0 {
            return Err(Error::Domain("max_iters must be at least 1".into()));
        }
        if self.combinations_per_iter == Some(0) {
            return Err(Error::Domain("combinations_per_iter must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub iteration: usize,
    /// `||b - d||` after the iteration.
    pub distance: f64,
    /// Index of the applied candidate, `None` if nothing was applied.
    pub chosen: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct AlgorithmOneOutcome {
    pub success: bool,
    pub k_final: DenseMatrix,
    pub d_final: MonicPoly,
    pub history: Vec<HistoryEntry>,
    pub iterations_used: usize,
    /// `||b - d^0||`.
    pub initial_distance: f64,
    /// Terminated because no candidate improved for
    /// [`MAX_STAGNANT_ITERATIONS`] iterations.
    pub stalled: bool,
    /// Relative mismatch of the independent re-extraction of the final
    /// polynomial.
    pub verification_mismatch: f64,
}

impl AlgorithmOneOutcome {
    pub fn final_distance(&self) -> f64 {
        self.history.last().map(|h| h.distance).unwrap_or(self.initial_distance)
    }
}

/// What a single outer iteration did.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepStatus {
    /// A candidate was applied and the distance strictly decreased.
    Improved,
    /// No candidate improved the distance.
    Stagnant,
    /// Every candidate's Krylov prefix was degenerate.
    Degenerate,
}

/// Ranks a candidate polynomial against the target; `None` rejects it.
pub type ScoreFn<'f> = dyn FnMut(&MonicPoly, &MonicPoly) -> Result<Option<f64>> + 'f;

/// Resumable state of Algorithm I.
pub struct AlgorithmOne<'a> {
    sys: &'a FeedbackSystem,
    target: MonicPoly,
    cfg: AlgorithmOneConfig,
    tol: Tolerance,
    rng: ExperimentRng,
    k: DenseMatrix,
    current: DenseMatrix,
    d: MonicPoly,
    distance: f64,
    initial_distance: f64,
    iteration: usize,
    stagnant_run: usize,
    history: Vec<HistoryEntry>,
}

impl<'a> AlgorithmOne<'a> {
    /// Starts from the annihilating polynomial of `sys.a()`, extracted from a
    /// random Krylov sequence.
    pub fn new(sys: &'a FeedbackSystem, target: MonicPoly, cfg: AlgorithmOneConfig, tol: Tolerance) -> Result<Self> {
        let mut rng = substream(cfg.seed, 1);
        let d0 = annihilating_polynomial(sys.a(), &mut rng, &tol, 8)?;
        Self::with_initial_poly(sys, d0, target, cfg, tol)
    }

    /// Starts from a known annihilating polynomial `d0` of `sys.a()`.
    pub fn with_initial_poly(
        sys: &'a FeedbackSystem,
        d0: MonicPoly,
        target: MonicPoly,
        cfg: AlgorithmOneConfig,
        tol: Tolerance,
    ) -> Result<Self> {
        cfg.validate()?;
        for (p, what) in [(&d0, "initial polynomial"), (&target, "target")] {
            if p.degree() != sys.n() {
                return Err(Error::Shape(format!("{what} has degree {}, system has n = {}", p.degree(), sys.n())));
            }
        }
        let distance = target.distance(&d0);
        Ok(AlgorithmOne {
            sys,
            rng: seeded(cfg.seed),
            cfg,
            tol,
            k: DenseMatrix::zeros(sys.m(), sys.p()),
            current: sys.a().clone(),
            d: d0,
            distance,
            initial_distance: distance,
            target,
            iteration: 0,
            stagnant_run: 0,
            history: Vec::new(),
        })
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn distance(&self) -> f64 {
        self.distance
    }

    pub fn current_poly(&self) -> &MonicPoly {
        &self.d
    }

    pub fn accumulated_gain(&self) -> &DenseMatrix {
        &self.k
    }

    /// `A_0 + B K C` for the accumulated `K`.
    pub fn current_matrix(&self) -> &DenseMatrix {
        &self.current
    }

    pub fn history(&self) -> &[HistoryEntry] {
        &self.history
    }

    pub fn target(&self) -> &MonicPoly {
        &self.target
    }

    pub fn converged(&self) -> bool {
        self.distance < self.cfg.epsilon
    }

    pub fn stalled(&self) -> bool {
        self.stagnant_run >= MAX_STAGNANT_ITERATIONS
    }

    pub fn finished(&self) -> bool {
        self.converged() || self.stalled() || self.iteration >= self.cfg.max_iters
    }

    /// Replaces the target polynomial, keeping the accumulated feedback.
    pub fn retarget(&mut self, target: MonicPoly) -> Result<()> {
        if target.degree() != self.sys.n() {
            return Err(Error::Shape("target degree differs from system dimension".into()));
        }
        self.distance = target.distance(&self.d);
        self.target = target;
        self.stagnant_run = 0;
        Ok(())
    }

    fn draw_candidates(&mut self, mode: CandidateMode) -> Vec<Vector> {
        let m = self.sys.m();
        match mode {
            CandidateMode::ColumnsOfB => (0..m)
                .map(|j| {
                    let mut e = Vector::zeros(m);
                    e[j] = 1.0;
                    e
                })
                .collect(),
            CandidateMode::RandomCombinations => {
                let count = self.cfg.combinations_per_iter.unwrap_or(m);
                (0..count).map(|_| unit_vector(&mut self.rng, m)).collect()
            }
        }
    }

    /// Evaluates candidates against the current matrix and returns the
    /// admissible one with the lowest score, lowest index winning ties, and
    /// whether any candidate had an independent Krylov prefix.
    fn best_candidate(
        &self,
        candidates: &[Vector],
        score: &mut ScoreFn<'_>,
    ) -> Result<(Option<(usize, RankOneResult)>, bool)> {
        let working = self.sys.with_feedback(&self.k)?;
        let mut best: Option<(usize, RankOneResult, f64)> = None;
        let mut evaluated = false;
        for (j, mu) in candidates.iter().enumerate() {
            let w0 = self.sys.b() * mu;
            let krylov = match full_krylov(&self.current, &w0, &self.tol) {
                Ok(k) => k,
                Err(Error::DependentPrefix { .. }) => continue,
                Err(e) => return Err(e),
            };
            evaluated = true;
            let r = rank_one_update_from(&working, &krylov, mu, &self.d, &self.target, &self.tol)?;
            if r.d_new.distance(&self.target) >= self.distance {
                continue;
            }
            if let Some(s) = score(&r.d_new, &self.target)? {
                if best.as_ref().is_none_or(|(_, _, bs)| s < *bs) {
                    best = Some((j, r, s));
                }
            }
        }
        Ok((best.map(|(j, r, _)| (j, r)), evaluated))
    }

    /// One outer iteration: evaluate all candidates against the same current
    /// matrix and apply the one closest to the target if it strictly improves
    /// the distance. In column mode a non-improving round is retried with
    /// random combinations within the same iteration.
    pub fn step(&mut self) -> Result<StepStatus> {
        self.step_scored(&mut |d, b| Ok(Some(d.distance(b))))
    }

    /// As [`step`](Self::step), but among the improving candidates the one
    /// with the lowest `score(d_new, target)` is applied; candidates scored
    /// `None` are skipped.
    pub fn step_scored(&mut self, score: &mut ScoreFn<'_>) -> Result<StepStatus> {
        self.iteration += 1;
        let mut modes = vec![self.cfg.mode];
        if self.cfg.mode == CandidateMode::ColumnsOfB {
            modes.push(CandidateMode::RandomCombinations);
        }
        let mut status = StepStatus::Degenerate;
        for mode in modes {
            let candidates = self.draw_candidates(mode);
            let (best, evaluated) = self.best_candidate(&candidates, score)?;
            if evaluated {
                status = StepStatus::Stagnant;
            }
            if let Some((j, r)) = best {
                let dist = r.d_new.distance(&self.target);
                self.k += &r.k;
                self.current = self.sys.closed_loop(&self.k)?;
                self.d = r.d_new;
                self.distance = dist;
                self.stagnant_run = 0;
                self.history.push(HistoryEntry { iteration: self.iteration, distance: dist, chosen: Some(j) });
                return Ok(StepStatus::Improved);
            }
        }
        self.stagnant_run += 1;
        self.history.push(HistoryEntry { iteration: self.iteration, distance: self.distance, chosen: None });
        Ok(status)
    }

    /// Steps until converged, stalled or out of iterations.
    pub fn run_to_end(&mut self) -> Result<()> {
        while !self.finished() {
            self.step()?;
        }
        Ok(())
    }

    /// Re-verifies the accumulated feedback and packages the outcome.
    pub fn outcome(&self) -> Result<AlgorithmOneOutcome> {
        let mut vrng = substream(self.cfg.seed, 2);
        let verification_mismatch = verify_feedback(self.sys, &self.k, &self.d, &mut vrng, &self.tol)?;
        Ok(AlgorithmOneOutcome {
            success: self.converged(),
            k_final: self.k.clone(),
            d_final: self.d.clone(),
            history: self.history.clone(),
            iterations_used: self.iteration,
            initial_distance: self.initial_distance,
            stalled: self.stalled(),
            verification_mismatch,
        })
    }
}

/// Runs Algorithm I to completion from the annihilating polynomial of
/// `sys.a()`.
pub fn algorithm_one(
    sys: &FeedbackSystem,
    b: &MonicPoly,
    cfg: &AlgorithmOneConfig,
    tol: &Tolerance,
) -> Result<AlgorithmOneOutcome> {
    let mut alg = AlgorithmOne::new(sys, b.clone(), cfg.clone(), *tol)?;
    alg.run_to_end()?;
    alg.outcome()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShiftConfig {
    /// Multiplier of `|z|` in the shift.
    pub a: f64,
    /// Multiplier of the root-vector norm in the shift.
    pub b_coef: f64,
    /// `(min, max)` range the schedule keeps `a` in.
    pub a_range: (f64, f64),
    /// `(min, max)` range the schedule keeps `b_coef` in.
    pub b_range: (f64, f64),
    pub max_total_iters: usize,
    /// Shift every root, not only those in the right half plane.
    pub shift_all_roots: bool,
    /// When the guarded rule yields no admissible step, retry the same
    /// iteration with every root shifted.
    pub unguarded_fallback: bool,
}

impl Default for ShiftConfig {
    fn default() -> Self {
        ShiftConfig {
            a: 0.1,
            b_coef: 1e-3,
            a_range: (1e-4, 0.1),
            b_range: (1e-6, 1e-3),
            max_total_iters: 200,
            shift_all_roots: false,
            unguarded_fallback: true,
        }
    }
}

impl ShiftConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = |x: f64| x > 0.0 && x.is_finite();
        if !(ok(self.a) && ok(self.b_coef) && ok(self.a_range.0) && ok(self.b_range.0))
            || self.a_range.0 > self.a_range.1
            || self.b_range.0 > self.b_range.1
        {
            return Err(Error::Domain("shift parameters must be positive with min <= max".into()));
        }
        Ok(())
    }
}

/// Moves roots by `z -> z - a |z| - b_coef ||roots||`; in guarded mode only
/// roots with positive real part move. Returns the real monic polynomial
/// with the moved roots.
pub fn shift_roots(d: &MonicPoly, cfg: &ShiftConfig) -> Result<MonicPoly> {
    let roots = poly_roots(d)?;
    let shifted = shift_root_set(&roots, cfg.a, cfg.b_coef, cfg.shift_all_roots);
    poly_from_roots(&shifted, &Tolerance::for_dim(d.degree()))
}

fn shift_root_set(roots: &[Complex64], a: f64, b_coef: f64, all: bool) -> Vec<Complex64> {
    let norm = roots.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    roots.iter().map(|&z| if all || z.re > 0.0 { z - a * z.norm() - b_coef * norm } else { z }).collect()
}

fn rightmost(roots: &[Complex64]) -> f64 {
    roots.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
}

fn rhp_count(roots: &[Complex64]) -> usize {
    roots.iter().filter(|z| z.re >= 0.0).count()
}

pub fn is_hurwitz(roots: &[Complex64]) -> bool {
    rightmost(roots) < -HURWITZ_MARGIN
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub iteration: usize,
    /// Roots as `[re, im]` pairs.
    pub roots: Vec<[f64; 2]>,
    pub a: f64,
    pub b_coef: f64,
}

#[derive(Clone, Debug)]
pub struct StabilizationOutcome {
    pub success: bool,
    pub k_final: DenseMatrix,
    pub d_final: MonicPoly,
    pub iterations_used: usize,
    /// One entry per accepted step, preceded by the starting roots.
    pub trajectory: Vec<TrajectoryPoint>,
    /// Accepted steps that increased the number of closed right-half-plane
    /// roots.
    pub rhp_increases: usize,
    pub verification_mismatch: f64,
}

/// Steers the roots of the annihilating polynomial of `A + B K C` into the
/// open left half plane. Each outer step targets the shifted roots of the
/// current polynomial and performs one iteration of Algorithm I, accepting
/// only candidates that neither move the rightmost root right nor add a
/// right-half-plane root. The shift parameters start at `cfg.a`,
/// `cfg.b_coef`; both are doubled after a step that lowers the rightmost
/// real part and halved after three consecutive steps that do not, within
/// their ranges.
pub fn stabilize_by_output_feedback(
    sys: &FeedbackSystem,
    cfg: &ShiftConfig,
    one_cfg: &AlgorithmOneConfig,
    tol: &Tolerance,
) -> Result<StabilizationOutcome> {
    cfg.validate()?;
    let mut extraction_rng = substream(one_cfg.seed, 1);
    let d0 = annihilating_polynomial(sys.a(), &mut extraction_rng, tol, 8)?;
    stabilize_from(sys, d0, cfg, one_cfg, tol)
}

/// As [`stabilize_by_output_feedback`] with a known starting polynomial.
pub fn stabilize_from(
    sys: &FeedbackSystem,
    d0: MonicPoly,
    cfg: &ShiftConfig,
    one_cfg: &AlgorithmOneConfig,
    tol: &Tolerance,
) -> Result<StabilizationOutcome> {
    cfg.validate()?;
    let inner =
        AlgorithmOneConfig { mode: CandidateMode::RandomCombinations, max_iters: usize::MAX, ..one_cfg.clone() };
    let mut alg = AlgorithmOne::with_initial_poly(sys, d0.clone(), d0, inner, *tol)?;
    let (mut a, mut b_coef) = (cfg.a.min(cfg.a_range.1), cfg.b_coef.min(cfg.b_range.1));
    let mut roots = poly_roots(alg.current_poly())?;
    let mut trajectory = vec![point(0, &roots, a, b_coef)];
    let mut best_rightmost = rightmost(&roots);
    let mut no_progress = 0;
    let mut rhp_increases = 0;
    let mut iterations = 0;

    while !is_hurwitz(&roots) && iterations < cfg.max_total_iters {
        iterations += 1;
        let shifted = shift_root_set(&roots, a, b_coef, cfg.shift_all_roots);
        alg.retarget(poly_from_roots(&shifted, tol)?)?;
        let (limit, count) = (rightmost(&roots), rhp_count(&roots));
        // A step may not move the rightmost root right or add unstable roots.
        let mut admissible = |d: &MonicPoly, b: &MonicPoly| -> Result<Option<f64>> {
            let next = poly_roots(d)?;
            Ok((rightmost(&next) <= limit && rhp_count(&next) <= count).then(|| d.distance(b)))
        };
        let mut status = alg.step_scored(&mut admissible)?;
        if status != StepStatus::Improved && cfg.unguarded_fallback && !cfg.shift_all_roots {
            alg.retarget(poly_from_roots(&shift_root_set(&roots, a, b_coef, true), tol)?)?;
            status = alg.step_scored(&mut admissible)?;
        }
        if status == StepStatus::Improved {
            let next = poly_roots(alg.current_poly())?;
            if rhp_count(&next) > rhp_count(&roots) {
                rhp_increases += 1;
            }
            roots = next;
            trajectory.push(point(iterations, &roots, a, b_coef));
        }
        let r = rightmost(&roots);
        if r < best_rightmost {
            best_rightmost = r;
            no_progress = 0;
            a = (a * 2.0).min(cfg.a_range.1);
            b_coef = (b_coef * 2.0).min(cfg.b_range.1);
        } else {
            no_progress += 1;
            if no_progress >= 3 {
                a = (a * 0.5).max(cfg.a_range.0);
                b_coef = (b_coef * 0.5).max(cfg.b_range.0);
                no_progress = 0;
            }
        }
    }

    let outcome = alg.outcome()?;
    Ok(StabilizationOutcome {
        success: is_hurwitz(&roots),
        k_final: outcome.k_final,
        d_final: outcome.d_final,
        iterations_used: iterations,
        trajectory,
        rhp_increases,
        verification_mismatch: outcome.verification_mismatch,
    })
}

fn point(iteration: usize, roots: &[Complex64], a: f64, b_coef: f64) -> TrajectoryPoint {
    TrajectoryPoint { iteration, roots: roots.iter().map(|z| [z.re, z.im]).collect(), a, b_coef }
}
