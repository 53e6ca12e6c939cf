//! Grouped logistic regression: one shared slope, one intercept per spectrum.

use crate::numeric::{log1pexp, sigmoid};

/// Intercepts are confined to `[-MU_BOUND, MU_BOUND]`, which is where they
/// end up under complete separation.
pub const MU_BOUND: f64 = 15.0;

const GRADIENT_TOL: f64 = 1e-8;
const MAX_ITERATIONS: usize = 500;

/// Emission labels and theoretical intensities of one spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelGroup {
    pub intensities: Vec<f64>,
    pub emitted: Vec<bool>,
}

impl LabelGroup {
    pub fn new(intensities: Vec<f64>, emitted: Vec<bool>) -> Self {
        assert_eq!(intensities.len(), emitted.len());
        Self {
            intensities,
            emitted,
        }
    }

    pub fn emitted_count(&self) -> usize {
        self.emitted.iter().filter(|&&z| z).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticFit {
    pub beta: f64,
    pub mus: Vec<f64>,
    /// Groups whose intercept sits on a clamp bound.
    pub separated: Vec<usize>,
    pub iterations: usize,
    pub converged: bool,
}

/// Log-likelihood of the labels under `(beta, mus)`.
pub fn grouped_loglik(groups: &[LabelGroup], beta: f64, mus: &[f64]) -> f64 {
    groups
        .iter()
        .zip(mus)
        .map(|(g, &mu)| {
            g.intensities
                .iter()
                .zip(&g.emitted)
                .map(|(&y, &z)| {
                    let eta = mu + beta * y;
                    if z {
                        eta - log1pexp(eta)
                    } else {
                        -log1pexp(eta)
                    }
                })
                .sum::<f64>()
        })
        .sum()
}

/// Maximizes the grouped logistic likelihood over `beta` and every
/// intercept, starting from `(beta, mus)`.
///
/// Each iteration takes a full Newton step; the Hessian is an arrow matrix
/// (slope row/column plus a diagonal over intercepts) so the step is solved
/// through the Schur complement of the intercept block. Intercepts are
/// projected onto `[-MU_BOUND, MU_BOUND]` and steps are halved until the
/// likelihood does not decrease. Stops once the projected gradient norm
/// drops below `1e-8`.
pub fn estimate_logistic(groups: &[LabelGroup], beta: f64, mus: &[f64]) -> LogisticFit {
    assert_eq!(groups.len(), mus.len());
    let mut beta = beta;
    let mut mus: Vec<f64> = mus.iter().map(|m| m.clamp(-MU_BOUND, MU_BOUND)).collect();
    let mut current = grouped_loglik(groups, beta, &mus);
    let mut converged = false;
    let mut iterations = 0;

    let s = groups.len();
    let mut grad_mu = vec![0.0; s];
    let mut h_beta_mu = vec![0.0; s];
    let mut h_mu = vec![0.0; s];

    while iterations < MAX_ITERATIONS {
        let mut grad_beta = 0.0;
        let mut h_beta = 0.0;
        for (idx, g) in groups.iter().enumerate() {
            let (mut gm, mut hbm, mut hm) = (0.0, 0.0, 0.0);
            for (&y, &z) in g.intensities.iter().zip(&g.emitted) {
                let p = sigmoid(mus[idx] + beta * y);
                let resid = f64::from(u8::from(z)) - p;
                let curv = p * (1.0 - p);
                gm += resid;
                grad_beta += resid * y;
                hm += curv;
                hbm += curv * y;
                h_beta += curv * y * y;
            }
            grad_mu[idx] = gm;
            h_beta_mu[idx] = hbm;
            h_mu[idx] = hm;
        }

        // intercepts pinned at a bound with the gradient pointing outward stay put
        let free: Vec<bool> = (0..s)
            .map(|i| {
                let at_hi = mus[i] >= MU_BOUND && grad_mu[i] > 0.0;
                let at_lo = mus[i] <= -MU_BOUND && grad_mu[i] < 0.0;
                !(at_hi || at_lo) && h_mu[i] > 1e-300
            })
            .collect();
        let norm2 = grad_beta * grad_beta
            + (0..s)
                .filter(|&i| free[i])
                .map(|i| grad_mu[i] * grad_mu[i])
                .sum::<f64>();
        if norm2.sqrt() < GRADIENT_TOL {
            converged = true;
            break;
        }
        iterations += 1;

        let mut schur = h_beta;
        let mut rhs = grad_beta;
        for i in (0..s).filter(|&i| free[i]) {
            schur -= h_beta_mu[i] * h_beta_mu[i] / h_mu[i];
            rhs -= h_beta_mu[i] * grad_mu[i] / h_mu[i];
        }
        let d_beta = if schur > 1e-12 * h_beta.max(1e-300) {
            rhs / schur
        } else {
            0.0
        };
        let d_mu: Vec<f64> = (0..s)
            .map(|i| {
                if free[i] {
                    (grad_mu[i] - h_beta_mu[i] * d_beta) / h_mu[i]
                } else {
                    0.0
                }
            })
            .collect();

        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let cand_beta = beta + step * d_beta;
            let cand_mus: Vec<f64> = mus
                .iter()
                .zip(&d_mu)
                .map(|(m, d)| (m + step * d).clamp(-MU_BOUND, MU_BOUND))
                .collect();
            let value = grouped_loglik(groups, cand_beta, &cand_mus);
            if value >= current {
                let stalled = cand_beta == beta && cand_mus == mus;
                beta = cand_beta;
                mus = cand_mus;
                current = value;
                accepted = !stalled;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            // no representable ascent step remains
            converged = norm2.sqrt() < 1e-6;
            break;
        }
    }

    let separated = (0..s)
        .filter(|&i| mus[i].abs() >= MU_BOUND)
        .collect();
    LogisticFit {
        beta,
        mus,
        separated,
        iterations,
        converged,
    }
}

/// Intercept maximizing `k * mu - sum_i log(1 + exp(mu + beta * y_i))` on
/// `[-MU_BOUND, MU_BOUND]`, i.e. the root of `sum_i g(y_i) = k`.
///
/// Safeguarded Newton: a bisection bracket is maintained and any Newton
/// iterate leaving it is replaced by the midpoint.
pub fn optimize_intercept(intensities: &[f64], beta: f64, emitted: usize) -> f64 {
    let k = emitted as f64;
    let excess = |mu: f64| -> (f64, f64) {
        let mut sum = 0.0;
        let mut slope = 0.0;
        for &y in intensities {
            let p = sigmoid(mu + beta * y);
            sum += p;
            slope += p * (1.0 - p);
        }
        (k - sum, slope)
    };
    let (mut lo, mut hi) = (-MU_BOUND, MU_BOUND);
    if excess(lo).0 <= 0.0 {
        return lo;
    }
    if excess(hi).0 >= 0.0 {
        return hi;
    }
    let n = intensities.len().max(1) as f64;
    let mean_y = intensities.iter().sum::<f64>() / n;
    let frac = (k / n).clamp(1e-6, 1.0 - 1e-6);
    let mut mu = ((frac / (1.0 - frac)).ln() - beta * mean_y).clamp(lo, hi);
    for _ in 0..200 {
        let (f, slope) = excess(mu);
        if f.abs() <= 1e-13 * n {
            break;
        }
        if f > 0.0 {
            lo = mu;
        } else {
            hi = mu;
        }
        let newton = mu + f / slope;
        let next = if slope > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if next == mu || hi - lo < 1e-15 {
            break;
        }
        mu = next;
    }
    mu
}

/// Value of the intercept-profiled logistic term at [`optimize_intercept`]'s
/// solution, together with that intercept.
pub(crate) fn profile_intercept(intensities: &[f64], beta: f64, emitted: usize) -> (f64, f64) {
    let mu = optimize_intercept(intensities, beta, emitted);
    let value = emitted as f64 * mu
        - intensities
            .iter()
            .map(|&y| log1pexp(mu + beta * y))
            .sum::<f64>();
    (mu, value)
}
