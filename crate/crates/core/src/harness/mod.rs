//! Instance generation, experiment orchestration, persistence and reports.

pub mod experiments;
pub mod instance;
pub mod io;
pub mod report;
pub mod verify;

pub use experiments::{
    run_experiment_one, run_experiment_two, run_unreachable_experiment, ExperimentOneConfig, ExperimentTwoConfig,
    UnreachableConfig,
};
pub use instance::{
    gen_destabilized_instance, gen_instance, gen_unreachable_target, reference_polynomial, DestabilizedInstance,
    InstanceSpec, PlantedInstance, UnreachableInstance,
};
pub use io::{Document, InstanceDoc};
pub use report::{ExperimentReport, Histogram};
pub use verify::{verify_certificate, Certificate, CertificateCheck};
