pub mod closed_form;
pub mod flow;
pub mod report;
pub mod residuals;
pub mod spectral;

pub use closed_form::{closed_form_residual, closed_form_weyl, closed_form_weyl_at, cumulative_simpson};
pub use flow::{block_rhs, evolve_blocks, evolve_lattice, FlowConfig, Trajectory, DEFAULT_GUARD};
pub use report::{verify, verify_trajectory, FlowResiduals, VerificationReport};
pub use residuals::{
    block_system_residual, circle, corner_power_residual, functional_flow_residual,
    matrix_poly_residual, measure_flow_residual, moment_flow_residual, substitution_residual,
    vector_poly_residual, weyl_flow_residual, weyl_markov_identity, Residual, SampleGrid,
};
pub use spectral::{isospectrality_report, matched_distance, spectral_cross_check, CrossCheck, DriftTable};
