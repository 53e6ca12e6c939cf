use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const BIN_COUNT: usize = 10;

/// Histogram density over transformed intensity.
///
/// Bins are left-closed and right-open except the last, which is closed.
/// Values outside `[edges[0], edges[10]]` are scored in the nearest boundary
/// bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseDensity {
    edges: [f64; BIN_COUNT + 1],
    masses: [f64; BIN_COUNT],
}

impl PiecewiseDensity {
    pub fn new(edges: [f64; BIN_COUNT + 1], masses: [f64; BIN_COUNT]) -> Result<Self> {
        if edges.iter().any(|e| !e.is_finite()) || edges.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParams(format!(
                "density edges must be finite and strictly increasing: {edges:?}"
            )));
        }
        if masses.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
            return Err(Error::InvalidParams(format!("density masses must be nonnegative: {masses:?}")));
        }
        let total: f64 = masses.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParams(format!("density masses sum to {total}, not 1")));
        }
        Ok(Self { edges, masses })
    }

    /// Builds a density from nonnegative per-bin weights, normalizing them.
    pub fn from_weights(edges: [f64; BIN_COUNT + 1], weights: [f64; BIN_COUNT]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::InvalidParams("density weights must have a positive sum".into()));
        }
        let mut masses = weights.map(|w| w / total);
        // push the rounding residue into the largest bin so the sum is 1 to the ulp
        let residue = 1.0 - masses.iter().sum::<f64>();
        let largest = (0..BIN_COUNT)
            .max_by(|&a, &b| masses[a].total_cmp(&masses[b]))
            .expect("nonempty");
        masses[largest] += residue;
        Self::new(edges, masses)
    }

    /// Ten equal-width bins of equal mass on `[lo, hi]`.
    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        let width = (hi - lo) / BIN_COUNT as f64;
        let mut edges = [0.0; BIN_COUNT + 1];
        for (b, e) in edges.iter_mut().enumerate() {
            *e = lo + width * b as f64;
        }
        edges[BIN_COUNT] = hi;
        Self::from_weights(edges, [1.0; BIN_COUNT])
    }

    pub fn edges(&self) -> &[f64; BIN_COUNT + 1] {
        &self.edges
    }

    pub fn masses(&self) -> &[f64; BIN_COUNT] {
        &self.masses
    }

    pub fn same_edges(&self, other: &Self) -> bool {
        self.edges == other.edges
    }

    /// Bin index for `y`, clamped into the boundary bins.
    pub fn bin(&self, y: f64) -> usize {
        self.edges[1..BIN_COUNT].partition_point(|&e| e <= y)
    }

    pub fn width(&self, bin: usize) -> f64 {
        self.edges[bin + 1] - self.edges[bin]
    }

    /// `log(mass / width)` of the bin holding `y`; `-inf` for an empty bin.
    pub fn logpdf(&self, y: f64) -> f64 {
        let b = self.bin(y);
        (self.masses[b] / self.width(b)).ln()
    }

    /// Draws a bin by mass, then a point uniformly inside it.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut bin = BIN_COUNT - 1;
        for (b, &m) in self.masses.iter().enumerate() {
            acc += m;
            if u < acc && m > 0.0 {
                bin = b;
                break;
            }
        }
        while self.masses[bin] == 0.0 && bin > 0 {
            bin -= 1;
        }
        let (lo, hi) = (self.edges[bin], self.edges[bin + 1]);
        lo + (hi - lo) * rng.random::<f64>()
    }
}


#[cfg(test)]
mod tests {
    use super::*;

    fn ladder() -> PiecewiseDensity {
        let edges: [f64; 11] = std::array::from_fn(|i| i as f64);
        let mut masses = [0.5 / 9.0; 10];
        masses[0] = 0.5;
        PiecewiseDensity::from_weights(edges, masses).unwrap()
    }

    #[test]
    fn uniform_unit_interval() {
        let d = PiecewiseDensity::uniform(0.0, 1.0).unwrap();
        assert!(d.logpdf(0.37).abs() < 1e-12);
    }

    #[test]
    fn lookup_and_boundaries() {
        let d = ladder();
        assert!((d.logpdf(0.2) - 0.5f64.ln()).abs() < 1e-15);
        assert_eq!(d.bin(1.0), 1);
        assert_eq!(d.bin(10.0), 9);
        assert_eq!(d.bin(42.0), 9);
        assert_eq!(d.bin(-3.0), 0);
        assert_eq!(d.bin(9.999), 9);
    }

    #[test]
    fn empty_bin_is_neg_infinity() {
        let edges: [f64; 11] = std::array::from_fn(|i| i as f64);
        let mut w = [1.0; 10];
        w[3] = 0.0;
        let d = PiecewiseDensity::from_weights(edges, w).unwrap();
        assert_eq!(d.logpdf(3.5), f64::NEG_INFINITY);
    }

    #[test]
    fn validation() {
        let mut edges: [f64; 11] = std::array::from_fn(|i| i as f64);
        assert!(PiecewiseDensity::new(edges, [0.2; 10]).is_err());
        edges[4] = edges[3];
        assert!(PiecewiseDensity::new(edges, [0.1; 10]).is_err());
    }

    #[test]
    fn integrates_to_one() {
        let d = ladder();
        assert!((d.masses().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        // midpoint rule is exact on each constant piece
        let mut total = 0.0;
        let per_bin = 1000;
        for b in 0..BIN_COUNT {
            let (lo, hi) = (d.edges()[b], d.edges()[b + 1]);
            let h = (hi - lo) / per_bin as f64;
            for i in 0..per_bin {
                total += d.logpdf(lo + (i as f64 + 0.5) * h).exp() * h;
            }
        }
        assert!((total - 1.0).abs() < 1e-8, "{total}");
    }
}
