//! Random problem instances.
//!
//! `A` is the companion matrix of a random integer polynomial whose constant
//! term is `+1` or `-1`; `B` and `C` have random integer entries. Generation
//! is retried a bounded number of times when the drawn triple fails the
//! system invariants.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::driver::{AlgorithmOne, AlgorithmOneConfig, CandidateMode, StepStatus};
use crate::error::{Error, Result};
use crate::feedback::FeedbackSystem;
pub use crate::krylov::reference_polynomial;
use crate::numerics::{companion_matrix, poly_from_roots, poly_roots, DenseMatrix, MonicPoly, Tolerance};
use crate::rng::{integer_matrix, substream, uniform_matrix, ExperimentRng};

/// Attempts before a generator reports failure.
pub const GENERATION_ATTEMPTS: usize = 25;

/// Distance of the mirrored root from the imaginary axis, relative to the
/// original, when destabilized instances are built.
pub const MIRROR_FACTOR: f64 = 0.2;

// Stream of the instance seed reserved for generation, so that solvers seeded
// with the same value draw independent numbers.
const GENERATION_STREAM: u64 = 16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub n: usize,
    pub m: usize,
    pub p: usize,
    /// Coefficients of the open-loop polynomial lie in `[-coeff_range, coeff_range]`.
    pub coeff_range: i64,
    /// Entries of `B` and `C` lie in `[-bc_entry_range, bc_entry_range]`.
    pub bc_entry_range: i64,
    /// Entries of the planted gain lie in `[-k_entry_range, k_entry_range]`.
    pub k_entry_range: f64,
    pub seed: u64,
}

impl InstanceSpec {
    pub fn new(n: usize, m: usize, p: usize, seed: u64) -> Self {
        InstanceSpec { n, m, p, coeff_range: 2, bc_entry_range: 10, k_entry_range: 0.001, seed }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        InstanceSpec { seed, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m == 0 || self.p == 0 || self.p > self.n {
            return Err(Error::Domain(format!(
                "need n >= 1, m >= 1 and 1 <= p <= n, got n={} m={} p={}",
                self.n, self.m, self.p
            )));
        }
        if self.coeff_range < 0 || self.bc_entry_range < 1 || !(self.k_entry_range >= 0.0) {
            return Err(Error::Domain("entry ranges must be nonnegative (B, C range at least 1)".into()));
        }
        Ok(())
    }

    fn rng(&self) -> ExperimentRng {
        substream(self.seed, GENERATION_STREAM)
    }
}

/// A system together with a gain that is known to reach the target.
#[derive(Clone, Debug, PartialEq)]
pub struct PlantedInstance {
    pub system: FeedbackSystem,
    /// Annihilating polynomial of `A`.
    pub d: MonicPoly,
    pub planted_k: DenseMatrix,
    /// Annihilating polynomial of `A + B K C`.
    pub target: MonicPoly,
}

#[derive(Clone, Debug, PartialEq)]
pub struct UnreachableInstance {
    pub system: FeedbackSystem,
    pub d: MonicPoly,
    /// `d` plus a small random perturbation of the inner coefficients.
    pub target: MonicPoly,
}

/// A system whose `A` has right-half-plane roots but is known to be
/// stabilizable: `A = A' + B K' C` with `A'` stable.
#[derive(Clone, Debug, PartialEq)]
pub struct DestabilizedInstance {
    pub system: FeedbackSystem,
    pub d: MonicPoly,
    pub stable_origin: DenseMatrix,
    pub push_gain: DenseMatrix,
    pub bootstrap_iterations: usize,
}

fn random_open_loop<R: Rng + ?Sized>(rng: &mut R, n: usize, range: i64) -> MonicPoly {
    let mut tail: Vec<f64> = (0..n - 1).map(|_| rng.random_range(-range..=range) as f64).collect();
    tail.push(if rng.random::<bool>() { 1.0 } else { -1.0 });
    MonicPoly::from_tail(&tail).expect("integer coefficients are finite")
}

fn random_system<R: Rng + ?Sized>(
    rng: &mut R,
    spec: &InstanceSpec,
    a: DenseMatrix,
    tol: &Tolerance,
) -> Result<FeedbackSystem> {
    let b = integer_matrix(rng, spec.n, spec.m, spec.bc_entry_range);
    let c = integer_matrix(rng, spec.p, spec.n, spec.bc_entry_range);
    FeedbackSystem::new(a, b, c, tol)
}

fn exhausted(last: Option<Error>) -> Error {
    Error::Generation {
        attempts: GENERATION_ATTEMPTS,
        reason: last.map(|e| e.to_string()).unwrap_or_else(|| "no attempt made".into()),
    }
}

/// Companion `A` of a random integer polynomial, integer `B`, `C`, a random
/// gain `K` and the annihilating polynomial of `A + B K C` as target.
pub fn gen_instance(spec: &InstanceSpec, tol: &Tolerance) -> Result<PlantedInstance> {
    spec.validate()?;
    let mut rng = spec.rng();
    let mut last = None;
    for _ in 0..GENERATION_ATTEMPTS {
        let d = random_open_loop(&mut rng, spec.n, spec.coeff_range);
        let a = companion_matrix(&d)?;
        let system = match random_system(&mut rng, spec, a, tol) {
            Ok(s) => s,
            Err(e) => {
                last = Some(e);
                continue;
            }
        };
        let planted_k = uniform_matrix(&mut rng, spec.m, spec.p, spec.k_entry_range);
        let closed = system.closed_loop(&planted_k)?;
        match reference_polynomial(&closed, &mut rng, tol) {
            Ok(target) => return Ok(PlantedInstance { system, d, planted_k, target }),
            Err(e) => last = Some(e),
        }
    }
    Err(exhausted(last))
}

/// Companion `A` of a random integer polynomial `d`, integer `B`, `C`, and
/// the target `d + eps` where the inner coefficients of `eps` are uniform on
/// `[-eps_range, eps_range]` and its leading and constant terms are zero.
pub fn gen_unreachable_target(spec: &InstanceSpec, eps_range: f64, tol: &Tolerance) -> Result<UnreachableInstance> {
    spec.validate()?;
    if !(eps_range >= 0.0) || !eps_range.is_finite() {
        return Err(Error::Domain(format!("perturbation range must be nonnegative, got {eps_range}")));
    }
    let mut rng = spec.rng();
    let mut last = None;
    for _ in 0..GENERATION_ATTEMPTS {
        let d = random_open_loop(&mut rng, spec.n, spec.coeff_range);
        let system = match random_system(&mut rng, spec, companion_matrix(&d)?, tol) {
            Ok(s) => s,
            Err(e) => {
                last = Some(e);
                continue;
            }
        };
        let mut tail = d.tail().to_vec();
        let n = tail.len();
        for t in tail.iter_mut().take(n - 1) {
            *t += rng.random_range(-eps_range..=eps_range);
        }
        let target = MonicPoly::from_tail(&tail)?;
        return Ok(UnreachableInstance { system, d, target });
    }
    Err(exhausted(last))
}

/// Random roots in the open left half plane: conjugate pairs with real part
/// in `[-1, -0.05]` and imaginary part in `[0.1, 1.5]`, padded with real
/// roots in `[-1, -0.05]`.
fn stable_roots<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<Complex64> {
    let pairs = rng.random_range(0..=n / 2);
    let mut roots = Vec::with_capacity(n);
    for _ in 0..pairs {
        let z = Complex64::new(rng.random_range(-1.0..=-0.05), rng.random_range(0.1..=1.5));
        roots.push(z);
        roots.push(z.conj());
    }
    while roots.len() < n {
        roots.push(Complex64::new(rng.random_range(-1.0..=-0.05), 0.0));
    }
    roots
}

/// Mirrors the rightmost root (or conjugate pair) into the right half plane,
/// scaling its distance to the imaginary axis by `MIRROR_FACTOR`.
fn mirror_rightmost(roots: &[Complex64]) -> Vec<Complex64> {
    let right = roots.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    roots.iter().map(|&z| if z.re == right { Complex64::new(-MIRROR_FACTOR * z.re, z.im) } else { z }).collect()
}

/// Starts from a stable companion `A'`, targets the same roots with the
/// rightmost one mirrored into the right half plane, and runs Algorithm I
/// until the current polynomial acquires a root with positive real part;
/// the resulting `A' + B K' C` becomes `A`. Steps that would move a root
/// further right than the mirrored one are not taken, so roots cross the
/// axis gradually.
pub fn gen_destabilized_instance(
    spec: &InstanceSpec,
    max_push_iters: usize,
    tol: &Tolerance,
) -> Result<DestabilizedInstance> {
    spec.validate()?;
    let mut rng = spec.rng();
    let mut last = None;
    let root_tol = Tolerance::new(tol.rank_tol, 1e-6)?;
    for attempt in 0..GENERATION_ATTEMPTS {
        let roots = stable_roots(&mut rng, spec.n);
        let d_stable = poly_from_roots(&roots, &root_tol)?;
        let origin = match random_system(&mut rng, spec, companion_matrix(&d_stable)?, tol) {
            Ok(s) => s,
            Err(e) => {
                last = Some(e);
                continue;
            }
        };
        let mirrored = mirror_rightmost(&roots);
        let ceiling = mirrored.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
        let desired = poly_from_roots(&mirrored, &root_tol)?;
        let cfg = AlgorithmOneConfig {
            epsilon: f64::MIN_POSITIVE,
            max_iters: max_push_iters,
            mode: CandidateMode::RandomCombinations,
            seed: substream(spec.seed, GENERATION_STREAM + 1 + attempt as u64).random(),
            combinations_per_iter: None,
        };
        let mut alg = AlgorithmOne::with_initial_poly(&origin, d_stable.clone(), desired, cfg, *tol)?;
        let mut pushed = false;
        while !alg.finished() {
            let mut below_ceiling = |d: &MonicPoly, b: &MonicPoly| -> Result<Option<f64>> {
                Ok(poly_roots(d)?.iter().all(|z| z.re <= ceiling).then(|| d.distance(b)))
            };
            if alg.step_scored(&mut below_ceiling)? == StepStatus::Improved
                && poly_roots(alg.current_poly())?.iter().any(|z| z.re > 0.0)
            {
                pushed = true;
                break;
            }
        }
        if !pushed {
            last = Some(Error::Domain("no root crossed into the right half plane".into()));
            continue;
        }
        let push_gain = alg.accumulated_gain().clone();
        let a = alg.current_matrix().clone();
        let bootstrap_iterations = alg.iteration();
        let system = match FeedbackSystem::new(a, origin.b().clone(), origin.c().clone(), tol) {
            Ok(s) => s,
            Err(e) => {
                last = Some(e);
                continue;
            }
        };
        let d = match reference_polynomial(system.a(), &mut rng, tol) {
            Ok(d) if poly_roots(&d)?.iter().any(|z| z.re > 0.0) => d,
            Ok(_) => {
                last = Some(Error::Domain("re-extracted polynomial is stable".into()));
                continue;
            }
            Err(e) => {
                last = Some(e);
                continue;
            }
        };
        return Ok(DestabilizedInstance {
            system,
            d,
            stable_origin: origin.a().clone(),
            push_gain,
            bootstrap_iterations,
        });
    }
    Err(exhausted(last))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planted_instance_recipe() {
        let spec = InstanceSpec::new(8, 2, 2, 11);
        let tol = Tolerance::for_dim(8);
        let inst = gen_instance(&spec, &tol).unwrap();
        assert_eq!(inst.d.coeffs()[0], 1.0);
        assert_eq!(inst.d.coeffs()[8].abs(), 1.0);
        assert!(inst.d.tail().iter().all(|c| c.fract() == 0.0 && c.abs() <= 2.0));
        assert!(inst.planted_k.iter().all(|k| k.abs() <= 0.001));
        assert!(inst.system.b().iter().all(|x| x.fract() == 0.0 && x.abs() <= 10.0));
        assert_eq!(gen_instance(&spec, &tol).unwrap(), inst);
        assert_ne!(gen_instance(&spec.with_seed(12), &tol).unwrap(), inst);
    }

    #[test]
    fn unreachable_perturbation() {
        let spec = InstanceSpec::new(10, 2, 2, 5);
        let tol = Tolerance::for_dim(10);
        let inst = gen_unreachable_target(&spec, 0.01, &tol).unwrap();
        let diff: Vec<f64> = inst.target.coeffs().iter().zip(inst.d.coeffs()).map(|(b, d)| b - d).collect();
        assert_eq!(diff[0], 0.0);
        assert_eq!(diff[10], 0.0);
        assert!(inst.target.distance(&inst.d) <= 0.01 * 9f64.sqrt());
        assert_eq!(gen_unreachable_target(&spec, 0.01, &tol).unwrap(), inst);
    }

    #[test]
    fn invalid_spec() {
        let tol = Tolerance::for_dim(3);
        assert!(gen_instance(&InstanceSpec::new(3, 1, 4, 0), &tol).is_err());
        assert!(gen_instance(&InstanceSpec::new(0, 1, 1, 0), &tol).is_err());
    }
}
