use crate::error::{Error, Result};
use crate::spectrum::{Peak, Spectrum, SpectrumKind};

pub const PROTON: f64 = 1.007_276_466_8;
pub const WATER: f64 = 18.010_564_684;

/// Monoisotopic residue mass for one of the 20 standard amino acids.
pub fn residue_mass(residue: char) -> Option<f64> {
    Some(match residue {
        'G' => 57.021_463_72,
        'A' => 71.037_113_79,
        'S' => 87.032_028_41,
        'P' => 97.052_763_85,
        'V' => 99.068_413_91,
        'T' => 101.047_678_47,
        'C' => 103.009_184_48,
        'L' | 'I' => 113.084_063_98,
        'N' => 114.042_927_44,
        'D' => 115.026_943_03,
        'Q' => 128.058_577_51,
        'K' => 128.094_963_01,
        'E' => 129.042_593_10,
        'M' => 131.040_484_64,
        'H' => 137.058_911_86,
        'F' => 147.068_413_91,
        'R' => 156.101_111_05,
        'Y' => 163.063_328_53,
        'W' => 186.079_312_98,
        _ => return None,
    })
}

/// Singly charged b and y ladder with unit intensities.
///
/// This is plumbing so that the pipeline can run without an external
/// fragmentation predictor; it knows nothing about relative peak heights.
/// Coinciding b/y m/z values are merged into one peak with summed intensity.
/// The spectrum carries `charge` and the precursor m/z at that charge.
pub fn generate_naive_theoretical(sequence: &str, charge: u32) -> Result<Spectrum> {
    let masses = sequence
        .chars()
        .map(|c| {
            residue_mass(c).ok_or_else(|| Error::UnknownResidue {
                residue: c,
                sequence: sequence.to_string(),
            })
        })
        .collect::<Result<Vec<f64>>>()?;
    if masses.is_empty() {
        return Err(Error::InvalidInput("empty peptide sequence".into()));
    }
    if charge == 0 {
        return Err(Error::InvalidInput("charge must be positive".into()));
    }

    let len = masses.len();
    let mut mzs = Vec::with_capacity(2 * len.saturating_sub(1));
    let mut prefix = 0.0;
    for &m in &masses[..len - 1] {
        prefix += m;
        mzs.push(prefix + PROTON);
    }
    let mut suffix = 0.0;
    for &m in masses[1..].iter().rev() {
        suffix += m;
        mzs.push(suffix + WATER + PROTON);
    }
    mzs.sort_by(f64::total_cmp);

    let mut peaks: Vec<Peak> = Vec::with_capacity(mzs.len());
    for mz in mzs {
        match peaks.last_mut() {
            Some(last) if last.mz == mz => last.intensity += 1.0,
            _ => peaks.push(Peak::new(mz, 1.0)),
        }
    }

    let neutral: f64 = masses.iter().sum::<f64>() + WATER;
    let precursor = (neutral + f64::from(charge) * PROTON) / f64::from(charge);
    Ok(Spectrum::new(sequence, charge, SpectrumKind::Theoretical, peaks)?
        .with_precursor_mz(Some(precursor)))
}
