//! Ground-truth Markov mesh models, exact window laws, kernel estimators and
//! the replicated experiments that compare synthesized fields with the truth.

pub mod cdf;
pub mod estimators;
pub mod experiment;
pub mod info;
pub mod law;
pub mod mmm;

pub use cdf::{empirical_window_cdf, empirical_window_cdf_excluding, sup_distance, EmpiricalCdf, Grid};
pub use estimators::{kernel_conditional_cdf, kernel_marginal_density};
pub use experiment::{
    consistency_experiment, counterexample_experiment, ExperimentConfig, ExperimentReport, ReportRow, SummaryRow,
    TrendVerdict,
};
pub use info::conditional_mutual_information;
pub use law::{exact_region_law, exact_window_law, WindowKind, WindowLaw};
pub use mmm::{gen_mmm_field, MmmSpec};
