//! Peak lists shared by every stage of the pipeline.

use crate::error::{Error, Result};

/// A single (m/z, intensity) point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub mz: f64,
    pub intensity: f64,
}

impl Peak {
    pub fn new(mz: f64, intensity: f64) -> Self {
        Self { mz, intensity }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpectrumKind {
    Observed,
    Theoretical,
}

/// An observed or theoretical peak list.
///
/// Peaks are kept sorted by ascending m/z and every m/z value is distinct.
/// Constructors that take raw peaks go through [`Spectrum::new`], which
/// enforces both.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub id: String,
    pub charge: u32,
    pub kind: SpectrumKind,
    pub precursor_mz: Option<f64>,
    peaks: Vec<Peak>,
}

impl Spectrum {
    /// Validates and sorts `peaks`.
    ///
    /// Rejects non-positive or non-finite m/z, negative or non-finite
    /// intensity, zero charge and duplicate m/z values. An empty peak list is
    /// accepted here; scoring entry points reject it separately.
    pub fn new(
        id: impl Into<String>,
        charge: u32,
        kind: SpectrumKind,
        mut peaks: Vec<Peak>,
    ) -> Result<Self> {
        let id = id.into();
        let invalid = |message: String| Error::InvalidSpectrum {
            id: id.clone(),
            message,
        };
        if charge == 0 {
            return Err(invalid("charge must be positive".into()));
        }
        for p in &peaks {
            if !(p.mz.is_finite() && p.mz > 0.0) {
                return Err(invalid(format!("m/z {} is not positive", p.mz)));
            }
            if !(p.intensity.is_finite() && p.intensity >= 0.0) {
                return Err(invalid(format!(
                    "intensity {} at m/z {} is negative",
                    p.intensity, p.mz
                )));
            }
        }
        peaks.sort_by(|a, b| a.mz.total_cmp(&b.mz));
        if let Some(w) = peaks.windows(2).find(|w| w[0].mz == w[1].mz) {
            return Err(invalid(format!("duplicate m/z {}", w[0].mz)));
        }
        Ok(Self {
            id,
            charge,
            kind,
            precursor_mz: None,
            peaks,
        })
    }

    pub fn with_precursor_mz(mut self, mz: Option<f64>) -> Self {
        self.precursor_mz = mz;
        self
    }

    pub fn peaks(&self) -> &[Peak] {
        &self.peaks
    }

    pub fn len(&self) -> usize {
        self.peaks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.peaks.is_empty()
    }

    pub fn mzs(&self) -> impl Iterator<Item = f64> + '_ {
        self.peaks.iter().map(|p| p.mz)
    }

    pub fn intensities(&self) -> impl Iterator<Item = f64> + '_ {
        self.peaks.iter().map(|p| p.intensity)
    }

    /// Returns a copy with every intensity replaced by `f(intensity)`.
    ///
    /// Locations are untouched, so ordering and distinctness carry over.
    pub fn map_intensities(&self, f: impl Fn(f64) -> f64) -> Self {
        let mut out = self.clone();
        for p in &mut out.peaks {
            p.intensity = f(p.intensity);
        }
        out
    }

    /// Errors unless the spectrum has at least one peak.
    pub fn require_nonempty(&self) -> Result<()> {
        if self.peaks.is_empty() {
            Err(Error::InvalidSpectrum {
                id: self.id.clone(),
                message: "peak list is empty".into(),
            })
        } else {
            Ok(())
        }
    }

    /// Difference between the largest and smallest m/z.
    pub fn mz_span(&self) -> f64 {
        match (self.peaks.first(), self.peaks.last()) {
            (Some(a), Some(b)) => b.mz - a.mz,
            _ => 0.0,
        }
    }
}
