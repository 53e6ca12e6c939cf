//! Reference scores: the binned similarity index and a cross-correlation
//! score with a +-75 bin lag window.
//!
//! The cross-correlation here works on whatever spectra it is given; it does
//! not reproduce the windowed re-normalization of search-engine
//! implementations and is meant for synthetic benchmarks.

use std::collections::BTreeMap;
use std::io::Write;

use crate::error::{Error, Result};
use crate::numeric::format_f64;
use crate::spectrum::Spectrum;

pub const SIMILARITY_BINWIDTH: f64 = 2.0;
pub const XCORR_BINWIDTH: f64 = 1.0;
/// Lags considered on each side of zero.
pub const XCORR_MAX_LAG: i64 = 75;

fn binned(s: &Spectrum, binwidth: f64) -> BTreeMap<i64, f64> {
    let mut bins = BTreeMap::new();
    for p in s.peaks() {
        *bins.entry((p.mz / binwidth).floor() as i64).or_insert(0.0) += p.intensity;
    }
    bins
}

fn check_binwidth(binwidth: f64) -> Result<()> {
    if binwidth > 0.0 && binwidth.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("bin width must be positive, got {binwidth}")))
    }
}

/// `sum_b sqrt(o_b t_b) / (sqrt(sum o) sqrt(sum t))` over m/z bins.
///
/// Returns exactly 1 when the binned spectra are proportional (to within a
/// relative `1e-14`), which the floating-point formula would otherwise only
/// approach.
pub fn similarity_index(observed: &Spectrum, theoretical: &Spectrum, binwidth: f64) -> Result<f64> {
    check_binwidth(binwidth)?;
    let (o, t) = (binned(observed, binwidth), binned(theoretical, binwidth));
    let (so, st): (f64, f64) = (o.values().sum(), t.values().sum());
    if so <= 0.0 || st <= 0.0 {
        return Err(Error::UndefinedScore(format!(
            "similarity of {} and {} is undefined for an all-zero spectrum",
            observed.id, theoretical.id
        )));
    }
    let proportional = o.keys().chain(t.keys()).all(|b| {
        let (yo, yt) = (o.get(b).copied().unwrap_or(0.0), t.get(b).copied().unwrap_or(0.0));
        (yo * st - yt * so).abs() <= 1e-14 * (yo * st + yt * so)
    });
    if proportional {
        return Ok(1.0);
    }
    let overlap: f64 = o
        .iter()
        .filter_map(|(b, &yo)| t.get(b).map(|&yt| (yo * yt).sqrt()))
        .sum();
    Ok((overlap / (so.sqrt() * st.sqrt())).clamp(0.0, 1.0))
}

/// `R_0 - sum_{i=-75}^{75} R_i / 151` with `R_i = sum_j o_j t_{j+i}` over
/// zero-padded m/z bins.
pub fn xcorr(observed: &Spectrum, theoretical: &Spectrum, binwidth: f64) -> Result<f64> {
    check_binwidth(binwidth)?;
    let (o, t) = (binned(observed, binwidth), binned(theoretical, binwidth));
    let lag = |i: i64| -> f64 { o.iter().filter_map(|(b, &yo)| t.get(&(b + i)).map(|&yt| yo * yt)).sum() };
    let lags: Vec<f64> = (-XCORR_MAX_LAG..=XCORR_MAX_LAG).map(lag).collect();
    let r0 = lags[XCORR_MAX_LAG as usize];
    Ok(r0 - lags.iter().sum::<f64>() / lags.len() as f64)
}

/// Rows of the ranked score table for a baseline method: scores sorted
/// descending (ties keep input order), the gap to the next row, and `NA`
/// for the likelihood-only columns.
pub fn write_baseline_rows<W: Write>(
    out: &mut W,
    spectrum_id: &str,
    method: &str,
    scores: &[(String, f64)],
) -> std::io::Result<()> {
    let mut ranked: Vec<&(String, f64)> = scores.iter().collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
    for (rank, (id, s)) in ranked.iter().enumerate() {
        let gap = ranked
            .get(rank + 1)
            .map_or_else(|| "NA".to_string(), |next| format_f64(s - next.1));
        writeln!(
            out,
            "{spectrum_id}\t{id}\t{method}\t{}\tNA\tNA\tNA\t{gap}\t{}",
            format_f64(*s),
            rank + 1
        )?;
    }
    Ok(())
}
