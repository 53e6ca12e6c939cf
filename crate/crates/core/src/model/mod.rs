//! The generative matching model: component densities, emission
//! configurations and the complete-data likelihood.
//!
//! An observed spectrum `O` (m peaks) is explained by a theoretical spectrum
//! `T` (n peaks) through a latent injective partial map from theoretical to
//! observed peaks. Each theoretical peak emits with a logistic probability in
//! its intensity; emitted peaks land within `w` of their source under a
//! truncated normal and draw their intensity from `f1`; the remaining
//! `m - k` observed peaks are noise, uniform over a range of length `r` with
//! intensities from `f0`.

mod components;
mod config;
mod density;
mod likelihood;
mod logistic;
mod params;
mod truncnorm;

pub use components::{
    build_components, build_components_bounded, count_configurations, enumerate_configurations,
    Component, ComponentPartition, DroppedEdge, DEFAULT_ENUMERATION_BUDGET,
};
pub use config::EmissionConfiguration;
pub use density::{PiecewiseDensity, BIN_COUNT};
pub use likelihood::{
    complete_data_loglik, complete_data_loglik_peaks, complete_data_terms, full_loglik_bruteforce,
    BRUTEFORCE_BUDGET,
};
pub use logistic::{log_emission_prob, log_no_emission_prob, logistic_emission_prob};
pub use params::GlobalParams;
pub use truncnorm::{sample_truncated_normal, truncated_normal_logpdf};
