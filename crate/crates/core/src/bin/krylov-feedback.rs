use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use krylov_feedback::driver::{stabilize_from, AlgorithmOne, AlgorithmOneConfig, CandidateMode, ShiftConfig};
use krylov_feedback::error::{Error, Result};
use krylov_feedback::feedback::{bkc_reachability_check, rank_one_update, Reachability};
use krylov_feedback::harness::experiments::{
    run_experiment_one, run_experiment_two, run_unreachable_experiment, ExperimentOneConfig, ExperimentTwoConfig,
    UnreachableConfig, BOOTSTRAP_ITERATIONS,
};
use krylov_feedback::harness::instance::{
    gen_destabilized_instance, gen_instance, gen_unreachable_target, reference_polynomial, InstanceSpec,
};
use krylov_feedback::harness::io::{load, load_instance, load_matrix, load_poly, save, Document, InstanceDoc};
use krylov_feedback::harness::report::ExperimentReport;
use krylov_feedback::harness::verify::{verify_certificate, Certificate, CertificateCheck};
use krylov_feedback::numerics::{poly_roots, MonicPoly, Tolerance};
use krylov_feedback::rng::{substream, unit_vector};

#[derive(Parser)]
#[command(name = "krylov-feedback", version, about = "Annihilating polynomials reachable by static output feedback")]
struct Cli {
    /// Rank tolerance (default: n times machine epsilon).
    #[arg(long, global = true)]
    tol_rank: Option<f64>,
    /// Residual tolerance (default: 1e-9).
    #[arg(long, global = true)]
    tol_res: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Dims {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    p: Option<usize>,
}

impl Dims {
    fn spec(&self, default: (usize, usize, usize), seed: u64) -> InstanceSpec {
        InstanceSpec::new(self.n.unwrap_or(default.0), self.m.unwrap_or(default.1), self.p.unwrap_or(default.2), seed)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Columns,
    Random,
}

impl From<Mode> for CandidateMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Columns => CandidateMode::ColumnsOfB,
            Mode::Random => CandidateMode::RandomCombinations,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum InstanceKind {
    /// Target reached by a random planted gain.
    Planted,
    /// Target perturbed off the reachable set.
    Unreachable,
    /// Unstable `A` known to be stabilizable.
    Destabilized,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance.
    Gen {
        #[arg(long, value_enum, default_value = "planted")]
        kind: InstanceKind,
        #[command(flatten)]
        dims: Dims,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Perturbation range of unreachable targets.
        #[arg(long, default_value_t = 0.01)]
        eps: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// One least-squares rank-one update towards a target.
    SolveRank1 {
        /// Instance file; a planted instance is generated when absent.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Target polynomial file, overriding the instance target.
        #[arg(long)]
        target: Option<PathBuf>,
        #[command(flatten)]
        dims: Dims,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Iterate rank-one updates towards a target.
    Algorithm1 {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        target: Option<PathBuf>,
        #[command(flatten)]
        dims: Dims,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        iters: usize,
        /// Stop once the distance to the target drops below this.
        #[arg(long, default_value_t = 1e-10)]
        eps: f64,
        #[arg(long, value_enum, default_value = "random")]
        mode: Mode,
        /// Random combinations per iteration (default: m).
        #[arg(long)]
        combos: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Test whether a matrix equals A + B K C for some K.
    CheckReach {
        #[arg(long)]
        input: Option<PathBuf>,
        /// Matrix file; defaults to A + B K C with the planted gain.
        #[arg(long)]
        matrix: Option<PathBuf>,
        #[command(flatten)]
        dims: Dims,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Move all roots into the open left half plane.
    Stabilize {
        #[arg(long)]
        input: Option<PathBuf>,
        #[command(flatten)]
        dims: Dims,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        iters: usize,
        #[arg(long)]
        combos: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Planted gain recovery experiment.
    Exp1 {
        #[command(flatten)]
        dims: Dims,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        reps: usize,
        /// Snapshot iteration counts.
        #[arg(long, value_delimiter = ',', default_value = "1000,1500")]
        iters: Vec<usize>,
        #[arg(long)]
        combos: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Unreachable targets followed by re-targeting the reached polynomial.
    Exp1Unreach {
        #[command(flatten)]
        dims: Dims,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        reps: usize,
        #[arg(long, default_value_t = 1000)]
        iters: usize,
        /// Perturbation range of the targets.
        #[arg(long, default_value_t = 0.01)]
        eps: f64,
        #[arg(long)]
        combos: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Stabilization of destabilized instances.
    Exp2 {
        #[command(flatten)]
        dims: Dims,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        reps: usize,
        #[arg(long, default_value_t = 200)]
        iters: usize,
        #[arg(long)]
        combos: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-check the certificates in a certificate or report file.
    Verify {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
}

fn tolerance(cli: &Cli, n: usize) -> Result<Tolerance> {
    let base = Tolerance::for_dim(n);
    Tolerance::new(cli.tol_rank.unwrap_or(base.rank_tol), cli.tol_res.unwrap_or(base.residual_tol))
}

fn instance_or_planted(
    input: &Option<PathBuf>,
    dims: &Dims,
    seed: u64,
    tol: impl Fn(usize) -> Result<Tolerance>,
) -> Result<InstanceDoc> {
    if let Some(path) = input {
        return load_instance(path);
    }
    let spec = dims.spec((20, 3, 3), seed);
    let inst = gen_instance(&spec, &tol(spec.n)?)?;
    Ok(InstanceDoc {
        spec: Some(spec),
        system: inst.system,
        d: Some(inst.d),
        target: Some(inst.target),
        planted_k: Some(inst.planted_k),
    })
}

fn target_of(doc: &InstanceDoc, file: &Option<PathBuf>) -> Result<MonicPoly> {
    match file {
        Some(path) => load_poly(path),
        None => doc.target.clone().ok_or_else(|| Error::Parse {
            location: "instance".into(),
            message: "no target polynomial; pass --target".into(),
        }),
    }
}

fn write_out(out: &Option<PathBuf>, doc: &Document) -> Result<()> {
    if let Some(path) = out {
        save(path, doc)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn print_checks(checks: &[CertificateCheck]) {
    println!("  {:<34} {:>11} {:>11} {:>11}  verdict", "certificate", "mismatch", "distance", "max re");
    let sci = |v: Option<f64>| v.map(|x| format!("{x:.3e}")).unwrap_or_else(|| "-".into());
    for c in checks {
        println!(
            "  {:<34} {:>11} {:>11} {:>11}  {}",
            c.label,
            sci(Some(c.mismatch)),
            sci(c.recomputed_relative_distance),
            sci(c.max_real_part),
            if c.passed { "pass".to_string() } else { format!("FAIL: {}", c.reason.as_deref().unwrap_or("")) }
        );
    }
}

fn check_all(certs: &[Certificate], tol: impl Fn(usize) -> Result<Tolerance>) -> Result<()> {
    let mut checks = Vec::new();
    for c in certs {
        checks.push(verify_certificate(c, &tol(c.system.n())?));
    }
    print_checks(&checks);
    let failed = checks.iter().filter(|c| !c.passed).count();
    println!("{}/{} certificates verified", checks.len() - failed, checks.len());
    if failed > 0 {
        return Err(Error::Verification(format!("{failed} certificate(s) failed")));
    }
    Ok(())
}

fn finish_experiment(report: ExperimentReport, started: Instant, out: &Option<PathBuf>, cli: &Cli) -> Result<()> {
    print!("{}", report.render());
    println!("elapsed {:.1} s\n", started.elapsed().as_secs_f64());
    write_out(out, &Document::Report(report.clone()))?;
    check_all(report.certificates(), |n| tolerance(cli, n))
}

fn rightmost(d: &MonicPoly) -> Result<f64> {
    Ok(poly_roots(d)?.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max))
}

fn run(cli: &Cli) -> Result<()> {
    let tol = |n: usize| tolerance(cli, n);
    let started = Instant::now();
    match &cli.command {
        Command::Gen { kind, dims, seed, eps, out } => {
            let doc = match kind {
                InstanceKind::Planted => instance_or_planted(&None, dims, *seed, tol)?,
                InstanceKind::Unreachable => {
                    let spec = dims.spec((20, 3, 3), *seed);
                    let inst = gen_unreachable_target(&spec, *eps, &tol(spec.n)?)?;
                    InstanceDoc {
                        spec: Some(spec),
                        system: inst.system,
                        d: Some(inst.d),
                        target: Some(inst.target),
                        planted_k: None,
                    }
                }
                InstanceKind::Destabilized => {
                    let spec = dims.spec((10, 2, 3), *seed);
                    let inst = gen_destabilized_instance(&spec, BOOTSTRAP_ITERATIONS, &tol(spec.n)?)?;
                    println!("bootstrap iterations: {}", inst.bootstrap_iterations);
                    InstanceDoc {
                        spec: Some(spec),
                        system: inst.system,
                        d: Some(inst.d),
                        target: None,
                        planted_k: None,
                    }
                }
            };
            let sys = &doc.system;
            println!("system n={} m={} p={}", sys.n(), sys.m(), sys.p());
            if let Some(d) = &doc.d {
                println!("d = {d}");
                println!("rightmost root real part {:.6e}", rightmost(d)?);
            }
            if let Some(b) = &doc.target {
                println!("b = {b}");
            }
            write_out(out, &Document::Instance(doc))
        }
        Command::SolveRank1 { input, target, dims, seed, out } => {
            let doc = instance_or_planted(input, dims, *seed, tol)?;
            let sys = &doc.system;
            let t = tol(sys.n())?;
            let b = target_of(&doc, target)?;
            let mu = unit_vector(&mut substream(*seed, 0), sys.m());
            let res = rank_one_update(sys, &mu, &b, &t)?;
            println!("mu = {:?}", mu.as_slice());
            println!("residual ||b - d_new|| = {:.6e}", res.residual);
            println!(
                "relative residual = {:.6e} ({})",
                res.relative_residual,
                match res.reachability() {
                    Reachability::Reachable => "reachable in one step",
                    Reachability::Unreachable => "not reachable in one step",
                    Reachability::Indeterminate => "indeterminate",
                }
            );
            println!("d_new = {}", res.d_new);
            let cert = Certificate::new("rank-one update", sys, &res.k, &res.d_new, *seed).with_target(&b);
            write_out(out, &Document::Certificate(cert.clone()))?;
            check_all(&[cert], tol)
        }
        Command::Algorithm1 { input, target, dims, seed, iters, eps, mode, combos, out } => {
            let doc = instance_or_planted(input, dims, *seed, tol)?;
            let sys = &doc.system;
            let t = tol(sys.n())?;
            let b = target_of(&doc, target)?;
            let cfg = AlgorithmOneConfig {
                epsilon: *eps,
                max_iters: *iters,
                mode: (*mode).into(),
                seed: *seed,
                combinations_per_iter: *combos,
            };
            let mut alg = match &doc.d {
                Some(d) => AlgorithmOne::with_initial_poly(sys, d.clone(), b.clone(), cfg, t)?,
                None => AlgorithmOne::new(sys, b.clone(), cfg, t)?,
            };
            let initial = alg.distance();
            println!("  {:>6} {:>14}", "iter", "||b - d||/||b||");
            println!("  {:>6} {:>14.6e}", 0, initial / b.norm());
            while !alg.finished() {
                alg.step()?;
                let i = alg.iteration();
                if i.is_power_of_two() || i % 100 == 0 || alg.finished() {
                    println!("  {:>6} {:>14.6e}", i, alg.distance() / b.norm());
                }
            }
            let status = if alg.converged() {
                "converged"
            } else if alg.stalled() {
                "stalled"
            } else {
                "iteration bound reached"
            };
            println!("{status} after {} iterations, elapsed {:.2} s", alg.iteration(), started.elapsed().as_secs_f64());
            if let Some(k) = &doc.planted_k {
                let gap = (sys.b() * (alg.accumulated_gain() - k) * sys.c()).norm() / sys.a().norm();
                println!("||B (K_final - K) C|| / ||A|| = {gap:.6e}");
            }
            let cert = Certificate::new("algorithm one", sys, alg.accumulated_gain(), alg.current_poly(), *seed)
                .with_target(&b);
            write_out(out, &Document::Certificate(cert.clone()))?;
            check_all(&[cert], tol)
        }
        Command::CheckReach { input, matrix, dims, seed } => {
            let doc = instance_or_planted(input, dims, *seed, tol)?;
            let sys = &doc.system;
            let a_hat = match (matrix, &doc.planted_k) {
                (Some(path), _) => load_matrix(path)?,
                (None, Some(k)) => sys.closed_loop(k)?,
                (None, None) => {
                    return Err(Error::Parse {
                        location: "instance".into(),
                        message: "no planted gain; pass --matrix".into(),
                    })
                }
            };
            let v = bkc_reachability_check(sys.a(), &a_hat, sys.b(), sys.c(), &tol(sys.n())?)?;
            println!("columns in col(B): {}", v.column_condition);
            println!("vanishes on ker(C): {}", v.kernel_condition);
            println!("largest violation: {:.3e}", v.max_violation);
            if let Some(r) = v.factorization_residual {
                println!("factorization residual: {r:.3e}");
            }
            println!("{}", if v.is_reachable() { "reachable: A_hat = A + B K C" } else { "not of the form A + B K C" });
            Ok(())
        }
        Command::Stabilize { input, dims, seed, iters, combos, out } => {
            let (sys, d) = match input {
                Some(path) => {
                    let doc = load_instance(path)?;
                    let t = tol(doc.system.n())?;
                    let d = match doc.d {
                        Some(d) => d,
                        None => reference_polynomial(doc.system.a(), &mut substream(*seed, 1), &t)?,
                    };
                    (doc.system, d)
                }
                None => {
                    let spec = dims.spec((10, 2, 3), *seed);
                    let inst = gen_destabilized_instance(&spec, BOOTSTRAP_ITERATIONS, &tol(spec.n)?)?;
                    (inst.system, inst.d)
                }
            };
            println!("initial rightmost real part {:.6e}", rightmost(&d)?);
            let shift = ShiftConfig { max_total_iters: *iters, ..ShiftConfig::default() };
            let one =
                AlgorithmOneConfig { seed: *seed, combinations_per_iter: *combos, ..AlgorithmOneConfig::default() };
            let o = stabilize_from(&sys, d, &shift, &one, &tol(sys.n())?)?;
            println!("  {:>6} {:>14} {:>10} {:>10}", "iter", "rightmost", "a", "b");
            for p in &o.trajectory {
                let r = p.roots.iter().map(|z| z[0]).fold(f64::NEG_INFINITY, f64::max);
                println!("  {:>6} {:>14.6e} {:>10.3e} {:>10.3e}", p.iteration, r, p.a, p.b_coef);
            }
            println!(
                "{} after {} iterations, elapsed {:.2} s",
                if o.success { "stabilized" } else { "not stabilized" },
                o.iterations_used,
                started.elapsed().as_secs_f64()
            );
            let cert = Certificate::new("stabilization", &sys, &o.k_final, &o.d_final, *seed);
            let cert = if o.success { cert.with_hurwitz_claim() } else { cert };
            write_out(out, &Document::Certificate(cert.clone()))?;
            check_all(&[cert], tol)
        }
        Command::Exp1 { dims, seed, reps, iters, combos, out } => {
            let cfg = ExperimentOneConfig {
                spec: dims.spec((20, 3, 3), *seed),
                reps: *reps,
                snapshot_iters: iters.clone(),
                combinations_per_iter: *combos,
                ..ExperimentOneConfig::baseline(*seed)
            };
            let report = run_experiment_one(&cfg, &tol(cfg.spec.n)?)?;
            finish_experiment(report, started, out, cli)
        }
        Command::Exp1Unreach { dims, seed, reps, iters, eps, combos, out } => {
            let cfg = UnreachableConfig {
                spec: dims.spec((20, 3, 3), *seed),
                seed: *seed,
                reps: *reps,
                iters: *iters,
                eps_range: *eps,
                combinations_per_iter: *combos,
            };
            let report = run_unreachable_experiment(&cfg, &tol(cfg.spec.n)?)?;
            finish_experiment(report, started, out, cli)
        }
        Command::Exp2 { dims, seed, reps, iters, combos, out } => {
            let cfg = ExperimentTwoConfig {
                spec: dims.spec((10, 2, 3), *seed),
                seed: *seed,
                instances: *reps,
                shift: ShiftConfig { max_total_iters: *iters, ..ShiftConfig::default() },
                combinations_per_iter: *combos,
            };
            let report = run_experiment_two(&cfg, &tol(cfg.spec.n)?)?;
            finish_experiment(report, started, out, cli)
        }
        Command::Verify { files } => {
            let mut certs = Vec::new();
            for f in files {
                certs.extend(certificates_in(f)?);
            }
            check_all(&certs, tol)
        }
    }
}

fn certificates_in(path: &Path) -> Result<Vec<Certificate>> {
    match load(path)? {
        Document::Certificate(c) => Ok(vec![c]),
        Document::Report(r) => Ok(r.certificates().to_vec()),
        other => Err(Error::Parse {
            location: format!("{}: field `kind`", path.display()),
            message: format!("expected a certificate or report, found {}", other.kind()),
        }),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Parse { .. } | Error::Shape(_) | Error::Domain(_) | Error::Io(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
