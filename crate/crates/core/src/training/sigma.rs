use std::f64::consts::{FRAC_2_SQRT_PI, SQRT_2};

use statrs::function::erf::erf;

use crate::error::{Error, Result};

/// Lower end of the scale search interval.
pub const SIGMA_FLOOR: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SigmaWarning {
    /// Residuals are (numerically) all zero.
    Floored,
    /// Residuals are too spread for any scale inside the window.
    AtUpperBound,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaEstimate {
    pub sigma: f64,
    pub warning: Option<SigmaWarning>,
}

/// Second moment of a zero-centred normal of scale `sigma` truncated to
/// `[-w, w]`.
fn truncated_second_moment(sigma: f64, w: f64) -> f64 {
    let a = w / (sigma * SQRT_2);
    let mass = erf(a);
    // 2 c phi(c) / (2 Phi(c) - 1) with c = w / sigma, written through a
    let tail = FRAC_2_SQRT_PI * a * (-a * a).exp() / mass;
    sigma * sigma * (1.0 - tail)
}

/// Maximum-likelihood scale of a zero-centred truncated normal.
///
/// The score equation reduces to matching the truncated second moment to
/// the mean squared residual; that moment is increasing in `sigma`, so the
/// root is bracketed on `[SIGMA_FLOOR, w]` and found by bisection on
/// `log sigma` to `1e-10`.
pub fn estimate_sigma(residuals: &[f64], w: f64) -> Result<SigmaEstimate> {
    if residuals.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "scale estimation needs at least 2 matched residuals, got {}",
            residuals.len()
        )));
    }
    if let Some(r) = residuals.iter().find(|r| r.is_nan() || r.abs() > w) {
        return Err(Error::InvalidInput(format!("residual {r} lies outside the window {w}")));
    }
    let mean_sq = residuals.iter().map(|r| r * r).sum::<f64>() / residuals.len() as f64;

    if mean_sq <= truncated_second_moment(SIGMA_FLOOR, w) {
        return Ok(SigmaEstimate {
            sigma: SIGMA_FLOOR,
            warning: Some(SigmaWarning::Floored),
        });
    }
    if mean_sq >= truncated_second_moment(w, w) {
        return Ok(SigmaEstimate {
            sigma: w,
            warning: Some(SigmaWarning::AtUpperBound),
        });
    }
    let (mut lo, mut hi) = (SIGMA_FLOOR.ln(), w.ln());
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if truncated_second_moment(mid.exp(), w) < mean_sq {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(SigmaEstimate {
        sigma: (0.5 * (lo + hi)).exp(),
        warning: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{sample_truncated_normal, truncated_normal_logpdf};
    use rand::SeedableRng;

    fn grid_mle(residuals: &[f64], w: f64) -> f64 {
        let mut best = (f64::NEG_INFINITY, 0.0);
        let mut s = 0.01;
        while s <= w {
            let ll: f64 = residuals.iter().map(|&r| truncated_normal_logpdf(r, 0.0, s, w)).sum();
            if ll > best.0 {
                best = (ll, s);
            }
            s += 1e-5;
        }
        best.1
    }

    #[test]
    fn symmetric_pair() {
        let est = estimate_sigma(&[-0.1, 0.1], 2.0).unwrap();
        assert!(est.warning.is_none());
        assert!((est.sigma - 0.1).abs() < 1e-6);
        assert!((est.sigma - grid_mle(&[-0.1, 0.1], 2.0)).abs() < 2e-5);
    }

    #[test]
    fn matches_grid_when_truncation_matters() {
        let res = [-1.5, -0.9, 0.4, 1.1, 1.9, -0.2, 0.7];
        let est = estimate_sigma(&res, 2.0).unwrap();
        assert!((est.sigma - grid_mle(&res, 2.0)).abs() < 2e-5, "{}", est.sigma);
    }

    #[test]
    fn recovers_simulated_scale() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let res: Vec<f64> = (0..100_000).map(|_| sample_truncated_normal(&mut rng, 0.0, 0.16, 2.0)).collect();
        let est = estimate_sigma(&res, 2.0).unwrap();
        assert!((est.sigma / 0.16 - 1.0).abs() < 0.01, "{}", est.sigma);
        let rms = (res.iter().map(|r| r * r).sum::<f64>() / res.len() as f64).sqrt();
        assert!((est.sigma - rms).abs() < 1e-3);
    }

    #[test]
    fn boundaries() {
        let zero = estimate_sigma(&[0.0, 0.0, 0.0], 2.0).unwrap();
        assert_eq!(zero.sigma, SIGMA_FLOOR);
        assert_eq!(zero.warning, Some(SigmaWarning::Floored));
        let edge = estimate_sigma(&[2.0, -2.0, 2.0], 2.0).unwrap();
        assert_eq!(edge.sigma, 2.0);
        assert_eq!(edge.warning, Some(SigmaWarning::AtUpperBound));
        assert!(estimate_sigma(&[0.1], 2.0).is_err());
        assert!(estimate_sigma(&[0.1, 2.5], 2.0).is_err());
    }
}
