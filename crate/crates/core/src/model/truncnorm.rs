use rand::Rng;
use rand_distr::{Distribution, Normal};
use statrs::function::erf::erf;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Log density of a normal with mean `center` and scale `sigma`, truncated
/// to `[center - w, center + w]`. Returns `-inf` outside the support.
pub fn truncated_normal_logpdf(x: f64, center: f64, sigma: f64, w: f64) -> f64 {
    debug_assert!(sigma > 0.0 && w > 0.0);
    let d = x - center;
    if d.abs() > w {
        return f64::NEG_INFINITY;
    }
    let z = d / sigma;
    -0.5 * z * z - LN_SQRT_2PI - sigma.ln() - log_mass(sigma, w)
}

/// `log(Phi(w / sigma) - Phi(-w / sigma))`.
pub(crate) fn log_mass(sigma: f64, w: f64) -> f64 {
    erf(w / (sigma * std::f64::consts::SQRT_2)).ln()
}

/// Rejection sampler for the truncated normal above.
pub fn sample_truncated_normal<R: Rng + ?Sized>(rng: &mut R, center: f64, sigma: f64, w: f64) -> f64 {
    let normal = Normal::new(0.0, sigma).expect("sigma is positive and finite");
    loop {
        let d: f64 = normal.sample(rng);
        if d.abs() <= w {
            return center + d;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Composite Simpson over `[a, b]` with `n` (even) panels.
    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            let x = a + i as f64 * h;
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
        }
        s * h / 3.0
    }

    #[test]
    fn integrates_to_one() {
        for sigma in [0.05, 0.39, 1.0] {
            let total = simpson(|x| truncated_normal_logpdf(x, 500.0, sigma, 2.0).exp(), 498.0, 502.0, 20_000);
            assert!((total - 1.0).abs() < 1e-8, "sigma {sigma}: {total}");
        }
    }

    #[test]
    fn outside_support_and_symmetry() {
        assert_eq!(truncated_normal_logpdf(102.0 + 1e-9, 100.0, 0.4, 2.0), f64::NEG_INFINITY);
        let a = truncated_normal_logpdf(100.7, 100.0, 0.4, 2.0);
        let b = truncated_normal_logpdf(99.3, 100.0, 0.4, 2.0);
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn center_value() {
        // 1 / (sigma sqrt(2 pi) Z) with Z = Phi(5.128) - Phi(-5.128) ~ 1 - 2.9e-7
        let v = truncated_normal_logpdf(100.0, 100.0, 0.39, 2.0);
        let expect = -(0.39 * (2.0 * std::f64::consts::PI).sqrt()).ln();
        assert!((v - expect).abs() < 1e-6);
        assert!((v - 0.02274).abs() < 1e-4);
    }

    #[test]
    fn sampler_stays_inside() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10_000 {
            let x = sample_truncated_normal(&mut rng, 10.0, 3.0, 2.0);
            assert!((x - 10.0).abs() <= 2.0);
        }
    }
}
