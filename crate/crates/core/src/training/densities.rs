use crate::error::{Error, Result};
use crate::model::{PiecewiseDensity, BIN_COUNT};
use crate::numeric::nearest_rank;

/// Histogram edges from every observed training intensity.
///
/// The top 1% of intensities gets the last bin on its own; the remaining
/// values are split into nine equal-count bins starting at zero.
pub fn density_edges(intensities: &[f64]) -> Result<[f64; BIN_COUNT + 1]> {
    if intensities.is_empty() {
        return Err(Error::InvalidInput("no observed intensities to place bin edges".into()));
    }
    let mut sorted = intensities.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let rank99 = ((0.99 * n as f64 - 1e-9).ceil() as usize).clamp(1, n);
    let lower = &sorted[..rank99 - 1];

    let mut edges = [0.0; BIN_COUNT + 1];
    edges[BIN_COUNT] = sorted[n - 1];
    edges[BIN_COUNT - 1] = sorted[rank99 - 1];
    if lower.is_empty() {
        return Err(Error::DuplicateEdges(format!(
            "only {n} intensities; the lower 99% is empty"
        )));
    }
    for (b, edge) in edges.iter_mut().enumerate().take(BIN_COUNT - 1).skip(1) {
        *edge = nearest_rank(lower, b as f64 / (BIN_COUNT - 1) as f64);
    }
    if edges.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::DuplicateEdges(format!(
            "intensity quantiles do not give strictly increasing edges: {edges:?}"
        )));
    }
    Ok(edges)
}

/// Per-bin counts plus one, normalized.
pub fn smoothed_density(edges: [f64; BIN_COUNT + 1], values: &[f64]) -> Result<PiecewiseDensity> {
    let template = PiecewiseDensity::from_weights(edges, [1.0; BIN_COUNT])?;
    let mut counts = [1.0; BIN_COUNT];
    for &y in values {
        counts[template.bin(y)] += 1.0;
    }
    PiecewiseDensity::from_weights(edges, counts)
}

/// Noise and emitted intensity densities on shared edges.
pub fn estimate_densities(
    edges: [f64; BIN_COUNT + 1],
    noise: &[f64],
    emitted: &[f64],
) -> Result<(PiecewiseDensity, PiecewiseDensity)> {
    Ok((smoothed_density(edges, noise)?, smoothed_density(edges, emitted)?))
}
