//! Reading, writing and synthesizing peak lists.
//!
//! Observed spectra arrive as MGF-style text, theoretical spectra as a small
//! TSV format. Both readers validate with [`Spectrum::new`](crate::Spectrum::new)
//! and report failures with the offending line number.

mod mgf;
mod naive;
mod tsv;

pub use mgf::{parse_observed, write_observed};
pub use naive::{generate_naive_theoretical, residue_mass, PROTON, WATER};
pub use tsv::{parse_theoretical, write_theoretical};
