//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

mod common;

use std::time::{Duration, Instant};

use rand::Rng;

use krylov_feedback::feedback::{bkc_reachability_check, rank_one_update};
use krylov_feedback::harness::experiments::{
    run_experiment_one, run_experiment_two, run_unreachable_experiment, ExperimentOneConfig, ExperimentTwoConfig,
    UnreachableConfig,
};
use krylov_feedback::harness::report::ExperimentReport;
use krylov_feedback::harness::verify::{verify_certificate, Certificate};
use krylov_feedback::krylov::{annihilating_polynomial, full_krylov, matrix_from_krylov};
use krylov_feedback::numerics::{eigenvalues, poly_roots, Tolerance, Vector};
use krylov_feedback::rng::{seeded, uniform_matrix, uniform_vector, unit_vector};
use krylov_feedback::sigma::{sigma_inv, sigma_mul, SigmaSeq};

// Tolerances and budgets, as stated in the criteria.
const SIGMA_TOL: f64 = 1e-10;
const SIGMA_BUDGET: Duration = Duration::from_secs(5);
const ORACLE_TOL: f64 = 1e-7;
const ROUND_TRIP_TOL: f64 = 1e-8;
const KRYLOV_BUDGET: Duration = Duration::from_secs(30);
const LSE_SLACK: f64 = 1e-12;
const RECOVERY_LEVEL: f64 = 1e-7;
const EXP1_BUDGET: Duration = Duration::from_secs(600);
const PLATEAU_LEVEL: f64 = 0.02;
const REACHABLE_LEVEL: f64 = 1e-10;
const BKC_NOISE: f64 = 1e-10;
const VERIFY_TOL: f64 = 1e-6;

struct Outcome {
    passed: bool,
    detail: String,
}

fn report(id: usize, name: &str, o: &Outcome) {
    println!("{} criterion {id} ({name}): {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
}

fn random_sigma<R: Rng>(rng: &mut R, len: usize) -> SigmaSeq {
    let mut c: Vec<f64> = (0..len).map(|_| rng.random_range(-1.0..=1.0)).collect();
    c[0] = 1.0;
    SigmaSeq::new(c).unwrap()
}

fn coeff_gap(x: &SigmaSeq, y: &SigmaSeq) -> f64 {
    common::max_abs_diff(x.coeffs(), y.coeffs())
}

fn sigma_group_laws() -> Outcome {
    let start = Instant::now();
    let mut rng = seeded(101);
    // associativity, commutativity, identity, inverse
    let mut worst = [0.0f64; 4];
    let mut inverse_failures = 0;
    // inverse residual divided by the largest inverse coefficient
    let mut worst_scaled: f64 = 0.0;
    for _ in 0..1000 {
        let len = rng.random_range(1..=51);
        let (a, b, c) = (random_sigma(&mut rng, len), random_sigma(&mut rng, len), random_sigma(&mut rng, len));
        let ab = sigma_mul(&a, &b).unwrap();
        let inv = sigma_inv(&a);
        let errs = [
            coeff_gap(&sigma_mul(&ab, &c).unwrap(), &sigma_mul(&a, &sigma_mul(&b, &c).unwrap()).unwrap()),
            coeff_gap(&ab, &sigma_mul(&b, &a).unwrap()),
            coeff_gap(&sigma_mul(&a, &SigmaSeq::identity(len)).unwrap(), &a),
            coeff_gap(&sigma_mul(&a, &inv).unwrap(), &SigmaSeq::identity(len)),
        ];
        for (w, e) in worst.iter_mut().zip(errs) {
            *w = w.max(e);
        }
        if errs[3] > SIGMA_TOL {
            inverse_failures += 1;
        }
        let scale = inv.coeffs().iter().fold(1.0f64, |x, y| x.max(y.abs()));
        worst_scaled = worst_scaled.max(errs[3] / scale);
    }
    let elapsed = start.elapsed();
    Outcome {
        passed: worst.iter().all(|&w| w <= SIGMA_TOL) && elapsed < SIGMA_BUDGET,
        detail: format!(
            "1000 triples, k <= 50, worst coefficient error: associativity {:.2e}, commutativity {:.2e}, \
             identity {:.2e}, inverse {:.2e} (tol {SIGMA_TOL:.0e}; {inverse_failures} triples over, \
             worst inverse error relative to max |inverse coefficient| {worst_scaled:.2e}), {elapsed:.2?}",
            worst[0], worst[1], worst[2], worst[3]
        ),
    }
}

fn krylov_round_trips() -> Outcome {
    let start = Instant::now();
    let mut rng = seeded(202);
    let (mut worst_poly, mut worst_matrix): (f64, f64) = (0.0, 0.0);
    let mut failures = 0;
    for _ in 0..200 {
        let n = rng.random_range(1..=12);
        let tol = Tolerance::for_dim(n);
        let a = uniform_matrix(&mut rng, n, n, 1.0);
        let oracle = common::charpoly(&a);
        match annihilating_polynomial(&a, &mut rng, &tol, 8) {
            Ok(d) => worst_poly = worst_poly.max(common::rel_l2(d.coeffs(), &oracle)),
            Err(_) => failures += 1,
        }
        let w0 = uniform_vector(&mut rng, n, 1.0);
        match full_krylov(&a, &w0, &tol).and_then(|k| matrix_from_krylov(&k, &tol)) {
            Ok(back) => worst_matrix = worst_matrix.max((&back - &a).norm() / a.norm()),
            Err(_) => failures += 1,
        }
    }
    let elapsed = start.elapsed();
    Outcome {
        passed: failures == 0 && worst_poly <= ORACLE_TOL && worst_matrix <= ROUND_TRIP_TOL && elapsed < KRYLOV_BUDGET,
        detail: format!(
            "200 matrices, n <= 12: worst relative gap to the Faddeev-LeVerrier oracle {worst_poly:.2e} (tol {ORACLE_TOL:.0e}), \
             worst matrix round trip {worst_matrix:.2e} (tol {ROUND_TRIP_TOL:.0e}), {failures} errors, {elapsed:.2?}"
        ),
    }
}

/// Half of the trials use a target whose gap is orthogonal to every row the
/// update can reach, so the least-squares solution is zero.
fn lse_monotonicity() -> Outcome {
    let mut rng = seeded(303);
    let mut violations = 0;
    let mut zero_cases = 0;
    let mut worst: f64 = 0.0;
    for trial in 0..500 {
        let n = rng.random_range(4..=10);
        let (m, p) = (rng.random_range(1..=3), rng.random_range(1..=3.min(n - 1)));
        let sys = common::random_system(n, m, p, 10_000 + trial);
        let tol = Tolerance::for_dim(n);
        let mu = unit_vector(&mut rng, m);
        let Ok(probe) = rank_one_update(&sys, &mu, &sys_poly(&sys, &mu, &tol), &tol) else {
            violations += 1;
            continue;
        };
        let d = probe.d_new.clone();
        let want_zero = trial % 2 == 1;
        let gap = if want_zero {
            // Rows reachable from mu are the rows of C W D; the gap lies in
            // their orthogonal complement.
            let w0 = sys.b() * &mu;
            let k = full_krylov(sys.a(), &w0, &tol).unwrap();
            let cw = sys.c() * k.prefix();
            let lead = leading_toeplitz(d.coeffs());
            let q = &cw * lead;
            let raw = uniform_vector(&mut rng, n, 1e-2);
            let basis = q.transpose().qr().q();
            let once = &raw - &basis * (basis.transpose() * &raw);
            &once - &basis * (basis.transpose() * &once)
        } else {
            uniform_vector(&mut rng, n, 1e-2)
        };
        let tail: Vec<f64> = d.tail().iter().zip(gap.iter()).map(|(x, g)| x + g).collect();
        let b = krylov_feedback::MonicPoly::from_tail(&tail).unwrap();
        let r = rank_one_update(&sys, &mu, &b, &tol).unwrap();
        let before = b.distance(&d);
        let after = b.distance(&r.d_new);
        let moved = r.d_new.distance(&d);
        let slack = LSE_SLACK * before.max(1.0);
        // Pythagoras: the step is the orthogonal projection of the gap.
        let pyth = (before * before - after * after - moved * moved).abs() / (before * before);
        worst = worst.max(pyth);
        let zero = r.rho.norm() <= LSE_SLACK * before.max(1.0) / sys.c().norm().max(1.0);
        let equal = (before - after).abs() <= slack;
        if want_zero {
            zero_cases += 1;
        }
        if after > before + slack || equal != zero || (want_zero && !zero) || pyth > 1e-9 {
            violations += 1;
        }
    }
    Outcome {
        passed: violations == 0,
        detail: format!(
            "500 updates ({zero_cases} with zero solution): {violations} violations of monotonicity or equality-iff-zero \
             at slack {LSE_SLACK:.0e}, worst Pythagoras defect {worst:.2e}"
        ),
    }
}

fn sys_poly(
    sys: &krylov_feedback::feedback::FeedbackSystem,
    mu: &Vector,
    tol: &Tolerance,
) -> krylov_feedback::MonicPoly {
    let w0 = sys.b() * mu;
    let k = full_krylov(sys.a(), &w0, tol).unwrap();
    krylov_feedback::krylov::annihilating_from_krylov(&k, tol).unwrap()
}

fn leading_toeplitz(coeffs: &[f64]) -> krylov_feedback::DenseMatrix {
    let n = coeffs.len() - 1;
    krylov_feedback::DenseMatrix::from_fn(n, n, |i, j| if j >= i { coeffs[j - i] } else { 0.0 })
}

fn planted_recovery(report: &ExperimentReport, elapsed: Duration) -> Outcome {
    let ExperimentReport::PlantedRecovery(r) = report else { unreachable!() };
    let finals: Vec<_> = r.records.iter().map(|x| if x.error.is_some() { None } else { x.final_snapshot() }).collect();
    let dist = finals.iter().filter(|s| s.is_some_and(|s| s.relative_distance <= RECOVERY_LEVEL)).count();
    let rec = finals.iter().filter(|s| s.is_some_and(|s| s.k_recovery <= RECOVERY_LEVEL)).count();
    let reps = r.reps;
    Outcome {
        passed: dist * 10 >= reps * 9 && rec * 10 >= reps * 8 && elapsed < EXP1_BUDGET,
        detail: format!(
            "n=20 m=p=3, {reps} reps, {} iterations: distance <= 1e-7 in {dist}/{reps} (need 90%), \
             K recovery <= 1e-7 in {rec}/{reps} (need 80%), {elapsed:.1?}",
            r.snapshot_iters.last().unwrap()
        ),
    }
}

fn separation(report: &ExperimentReport) -> Outcome {
    let ExperimentReport::Unreachable(r) = report else { unreachable!() };
    let ok = |x: &&krylov_feedback::harness::report::UnreachableRecord| x.error.is_none();
    let plateau =
        r.records.iter().filter(ok).filter(|x| x.plateau_relative_residual.is_some_and(|v| v > PLATEAU_LEVEL)).count();
    let reach = r
        .records
        .iter()
        .filter(ok)
        .filter(|x| x.phase_two_relative_distance.is_some_and(|v| v < REACHABLE_LEVEL))
        .count();
    let reps = r.reps;
    let median_b = {
        let mut v: Vec<f64> = r.records.iter().filter_map(|x| x.plateau_relative_distance).collect();
        v.sort_by(f64::total_cmp);
        v.get(v.len() / 2).copied().unwrap_or(f64::NAN)
    };
    Outcome {
        passed: plateau * 10 >= reps * 9 && reach * 10 >= reps * 9,
        detail: format!(
            "plateau ||b - d|| / ||b - d_0|| > {PLATEAU_LEVEL} in {plateau}/{reps}, re-targeted phase < 1e-10 in \
             {reach}/{reps} (need 90% each); median plateau ||b - d|| / ||b|| {median_b:.2e}"
        ),
    }
}

fn stabilization(report: &ExperimentReport) -> Outcome {
    let ExperimentReport::Stabilization(r) = report else { unreachable!() };
    let mut stabilized = 0;
    let mut bad_claims = 0;
    for (rec, cert) in r.records.iter().zip(certificates_by_instance(r)) {
        if !(rec.success && rec.error.is_none() && rec.iterations_used <= 200) {
            continue;
        }
        // Direct check of the final closed loop, independent of the solver.
        let max_re = cert
            .and_then(|c| c.system.closed_loop(&c.k).ok())
            .and_then(|m| eigenvalues(&m).ok())
            .map(|ev| ev.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max));
        let roots_ok = cert.is_some_and(|c| poly_roots(&c.claimed).is_ok_and(|r| r.iter().all(|z| z.re < -1e-9)));
        if max_re.is_some_and(|x| x < 0.0) && roots_ok {
            stabilized += 1;
        } else {
            bad_claims += 1;
        }
    }
    Outcome {
        passed: stabilized >= 8 && bad_claims == 0,
        detail: format!(
            "n=10 m=2 p=3: {stabilized}/{} stabilized within 200 iterations (need 8), {bad_claims} success claims \
             contradicted by eigenvalues",
            r.instances
        ),
    }
}

fn certificates_by_instance(r: &krylov_feedback::harness::report::StabilizationReport) -> Vec<Option<&Certificate>> {
    r.records
        .iter()
        .map(|rec| r.certificates.iter().find(|c| c.label == format!("stabilization instance {}", rec.instance)))
        .collect()
}

fn bkc_check() -> Outcome {
    let (n, m, p) = (8, 2, 2);
    let tol = Tolerance::new(n as f64 * f64::EPSILON, 1e-8).unwrap();
    let mut rng = seeded(707);
    let (mut false_neg, mut false_pos) = (0, 0);
    for _ in 0..200 {
        let a = uniform_matrix(&mut rng, n, n, 1.0);
        let b = uniform_matrix(&mut rng, n, m, 1.0);
        let c = uniform_matrix(&mut rng, p, n, 1.0);
        let k = uniform_matrix(&mut rng, m, p, 1.0);
        let planted = &a + &b * &k * &c + uniform_matrix(&mut rng, n, n, BKC_NOISE);
        if !bkc_reachability_check(&a, &planted, &b, &c, &tol).unwrap().is_reachable() {
            false_neg += 1;
        }
        let generic = &a + uniform_matrix(&mut rng, n, n, 1.0);
        if bkc_reachability_check(&a, &generic, &b, &c, &tol).unwrap().is_reachable() {
            false_pos += 1;
        }
    }
    Outcome {
        passed: false_neg == 0 && false_pos == 0,
        detail: format!(
            "200 trials, n=8 m=p=2: {false_neg} false negatives at noise {BKC_NOISE:.0e}, {false_pos} false positives"
        ),
    }
}

fn successful(report: &ExperimentReport) -> Vec<&Certificate> {
    match report {
        ExperimentReport::PlantedRecovery(r) => r
            .records
            .iter()
            .filter(|x| x.error.is_none() && x.final_snapshot().is_some_and(|s| s.relative_distance <= RECOVERY_LEVEL))
            .filter_map(|x| r.certificates.iter().find(|c| c.label == format!("planted recovery rep {}", x.rep)))
            .collect(),
        ExperimentReport::Unreachable(r) => r
            .records
            .iter()
            .filter(|x| x.error.is_none())
            .flat_map(|x| {
                r.certificates.iter().filter(move |c| c.label.starts_with(&format!("unreachable rep {} ", x.rep)))
            })
            .collect(),
        ExperimentReport::Stabilization(r) => r
            .records
            .iter()
            .zip(certificates_by_instance(r))
            .filter(|(x, _)| x.success && x.error.is_none())
            .filter_map(|(_, c)| c)
            .collect(),
    }
}

fn certificates(reports: &[&ExperimentReport]) -> Outcome {
    let mut total = 0;
    let mut failed = Vec::new();
    let mut worst: f64 = 0.0;
    for r in reports {
        for cert in successful(r) {
            total += 1;
            let check = verify_certificate(cert, &Tolerance::for_dim(cert.system.n()));
            worst = worst.max(check.mismatch);
            if !check.passed || check.mismatch > VERIFY_TOL {
                failed.push(cert.label.clone());
            }
        }
    }
    Outcome {
        passed: total > 0 && failed.is_empty(),
        detail: format!(
            "{}/{total} certificates of successful runs re-verified from the serialized system, worst mismatch \
             {worst:.2e} (tol {VERIFY_TOL:.0e}){}",
            total - failed.len(),
            if failed.is_empty() { String::new() } else { format!("; failed: {}", failed.join(", ")) }
        ),
    }
}

fn main() {
    let mut all = true;
    let mut record = |id: usize, name: &str, o: Outcome| {
        report(id, name, &o);
        all &= o.passed;
    };

    record(1, "sigma group laws", sigma_group_laws());
    record(2, "Krylov round trips", krylov_round_trips());
    record(3, "least-squares monotonicity", lse_monotonicity());

    let seed = 0;
    let start = Instant::now();
    let one = run_experiment_one(&ExperimentOneConfig::baseline(seed), &Tolerance::for_dim(20)).unwrap();
    let one_elapsed = start.elapsed();
    record(4, "planted recovery", planted_recovery(&one, one_elapsed));

    let unreachable = run_unreachable_experiment(&UnreachableConfig::baseline(seed), &Tolerance::for_dim(20)).unwrap();
    record(5, "reachable/unreachable separation", separation(&unreachable));

    let two = run_experiment_two(&ExperimentTwoConfig::baseline(seed), &Tolerance::for_dim(10)).unwrap();
    record(6, "stabilization", stabilization(&two));

    record(7, "BKC factorization check", bkc_check());
    record(8, "certificate verification", certificates(&[&one, &unreachable, &two]));

    if !all {
        std::process::exit(1);
    }
}
