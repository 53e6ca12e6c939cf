//! Peak pooling, percentile normalization and fourth-root stabilization.
//!
//! The same pipeline is applied to observed and theoretical spectra.

use crate::error::{Error, Result};
use crate::numeric::nearest_rank;
use crate::spectrum::{Peak, Spectrum};

/// Default pooling tolerance in Daltons; equal to the instrument window.
pub const DEFAULT_TOLERANCE: f64 = 2.0;

/// Single-linkage pooling along m/z.
///
/// Scanning in ascending m/z, a peak within `tol` of the previous peak joins
/// its cluster. Each cluster becomes one peak at the m/z of its most intense
/// member (lowest m/z on ties) carrying the summed intensity.
pub fn cluster_peaks(s: &Spectrum, tol: f64) -> Spectrum {
    assert!(tol > 0.0, "clustering tolerance must be positive");
    let mut pooled: Vec<Peak> = Vec::with_capacity(s.len());
    let mut apex = Peak::new(0.0, f64::NEG_INFINITY);
    let mut total = 0.0;
    let mut last_mz = f64::NEG_INFINITY;

    for &p in s.peaks() {
        if p.mz - last_mz > tol && apex.intensity > f64::NEG_INFINITY {
            pooled.push(Peak::new(apex.mz, total));
            apex = Peak::new(0.0, f64::NEG_INFINITY);
            total = 0.0;
        }
        if p.intensity > apex.intensity {
            apex = p;
        }
        total += p.intensity;
        last_mz = p.mz;
    }
    if apex.intensity > f64::NEG_INFINITY {
        pooled.push(Peak::new(apex.mz, total));
    }
    rebuild(s, pooled)
}

/// Divides every intensity by the nearest-rank 90th percentile intensity.
pub fn normalize(s: &Spectrum) -> Result<Spectrum> {
    let mut sorted: Vec<f64> = s.intensities().collect();
    if !sorted.iter().any(|&y| y > 0.0) {
        return Err(Error::DegenerateSpectrum { id: s.id.clone() });
    }
    sorted.sort_by(f64::total_cmp);
    let mut divisor = nearest_rank(&sorted, 0.9);
    if divisor <= 0.0 {
        // more than 90% zeros: fall back to the smallest positive intensity
        divisor = sorted.iter().copied().find(|&y| y > 0.0).expect("checked above");
    }
    Ok(s.map_intensities(|y| y / divisor))
}

/// Replaces each intensity `y` by `y^(1/4)`.
pub fn stabilize(s: &Spectrum) -> Spectrum {
    s.map_intensities(|y| y.sqrt().sqrt())
}

/// `cluster_peaks`, then `normalize`, then `stabilize`.
pub fn preprocess(s: &Spectrum, tol: f64) -> Result<Spectrum> {
    if s.is_empty() {
        return Err(Error::DegenerateSpectrum { id: s.id.clone() });
    }
    let clustered = cluster_peaks(s, tol);
    Ok(stabilize(&normalize(&clustered)?))
}

fn rebuild(template: &Spectrum, peaks: Vec<Peak>) -> Spectrum {
    Spectrum::new(template.id.clone(), template.charge, template.kind, peaks)
        .expect("pooled peaks keep distinct positive m/z")
        .with_precursor_mz(template.precursor_mz)
}
