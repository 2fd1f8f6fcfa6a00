//! Small versions of the three randomized experiments, written to JSON and
//! re-verified from the files.

use krylov_feedback::harness::experiments::{
    run_experiment_one, run_experiment_two, run_unreachable_experiment, ExperimentOneConfig, ExperimentTwoConfig,
    UnreachableConfig,
};
use krylov_feedback::harness::instance::InstanceSpec;
use krylov_feedback::harness::io::{load, save, Document};
use krylov_feedback::harness::verify::verify_certificate;
use krylov_feedback::numerics::Tolerance;

fn main() -> krylov_feedback::error::Result<()> {
    let dir = std::env::temp_dir().join("krylov-feedback-examples");
    std::fs::create_dir_all(&dir)?;

    let one = ExperimentOneConfig {
        spec: InstanceSpec::new(10, 2, 2, 0),
        reps: 8,
        snapshot_iters: vec![200, 400],
        ..ExperimentOneConfig::baseline(1)
    };
    let unreachable = UnreachableConfig {
        spec: InstanceSpec::new(10, 2, 2, 0),
        reps: 8,
        iters: 300,
        ..UnreachableConfig::baseline(1)
    };
    let two = ExperimentTwoConfig { instances: 5, ..ExperimentTwoConfig::baseline(1) };

    let reports = [
        ("planted.json", run_experiment_one(&one, &Tolerance::for_dim(10))?),
        ("unreachable.json", run_unreachable_experiment(&unreachable, &Tolerance::for_dim(10))?),
        ("stabilization.json", run_experiment_two(&two, &Tolerance::for_dim(10))?),
    ];
    for (name, report) in reports {
        println!("{}", report.render());
        let path = dir.join(name);
        save(&path, &Document::Report(report))?;

        let Document::Report(back) = load(&path)? else { unreachable!("saved a report") };
        let passed = back
            .certificates()
            .iter()
            .filter(|c| verify_certificate(c, &Tolerance::for_dim(c.system.n())).passed)
            .count();
        println!("{}: {passed}/{} certificates verified\n", path.display(), back.certificates().len());
    }
    Ok(())
}
