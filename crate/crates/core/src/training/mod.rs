//! Supervised estimation of the shared parameters from spectrum pairs with
//! known theoretical spectra.

pub mod densities;
mod fit;
pub mod init;
pub mod logistic;
pub mod sigma;

pub use densities::{density_edges, estimate_densities};
pub use fit::{fit, FitOptions, InnerSearch, TrainingPair, TrainingState, TrainingWarning};
pub use init::init_configuration;
pub use logistic::{estimate_logistic, optimize_intercept, LabelGroup, LogisticFit, MU_BOUND};
pub use sigma::{estimate_sigma, SigmaEstimate, SigmaWarning};
