//! Likelihood-based scoring of peptide-spectrum matches.
//!
//! An observed tandem mass spectrum is modelled as a noisy realization of a
//! theoretical spectrum: each theoretical peak may emit an observed peak near
//! its location, and the rest of the observed peaks are noise. Parameters
//! are estimated from known spectrum pairs by coordinate ascent over the
//! latent emission configuration, candidates are scored by their maximized
//! complete-data likelihood, and scores convert to posterior probabilities
//! over a candidate list.
//!
//! Module map:
//! - [`spectra_io`]: MGF / TSV readers and writers, naive b/y ladder
//! - [`preprocess`]: pooling, normalization, intensity stabilization
//! - [`model`]: densities, configurations, likelihoods, parameters
//! - [`training`]: supervised estimation of the shared parameters
//! - [`scoring`]: candidate scores and posteriors
//! - [`simulator`]: sampling from the model and recovery experiments
//! - [`baselines`]: similarity index and cross-correlation scores
//! - [`evaluation`]: accuracy, FDR curves and calibration tables

pub mod baselines;
pub mod error;
pub mod evaluation;
pub mod model;
pub mod numeric;
pub mod preprocess;
pub mod scoring;
mod search;
pub mod simulator;
pub mod spectra_io;
pub mod spectrum;
pub mod training;

pub use error::{Error, Result};
pub use model::{EmissionConfiguration, GlobalParams, PiecewiseDensity};
pub use spectrum::{Peak, Spectrum, SpectrumKind};
