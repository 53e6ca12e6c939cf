//! Maximization of the complete-data likelihood over configurations and the
//! intercept, with the shared parameters held fixed.
//!
//! Writing `k` for the emitted count, the log-likelihood splits as
//!
//! ```text
//! L(e, mu) = C0 + sum_pairs w_ij + [k mu - sum_i log(1 + exp(mu + beta y_i))]
//!                                 - [ln m! - ln (m - k)!]
//! ```
//!
//! with `C0` the all-noise observed terms and `w_ij` the gain of explaining
//! observed peak `j` by theoretical peak `i`. The intercept enters only
//! through `k`, so it is profiled out once per `k` and the configuration
//! search works on the pair weights alone.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::Result;
use crate::model::{
    build_components_bounded, truncated_normal_logpdf, ComponentPartition, EmissionConfiguration,
    GlobalParams,
};
use crate::numeric::ln_factorial;
use crate::spectrum::Peak;
use crate::training::logistic::profile_intercept;

/// Switches smaller than this are ignored so the ascent terminates.
const IMPROVEMENT_TOL: f64 = 1e-10;
const MAX_SWEEPS: usize = 1000;

/// Configuration search space of one (theoretical, observed) pair.
#[derive(Debug, Clone)]
pub(crate) struct PairStructure {
    pub partition: ComponentPartition,
}

impl PairStructure {
    pub fn new(theoretical: &[Peak], observed: &[Peak], w: f64, budget: usize) -> Result<Self> {
        Ok(Self {
            partition: build_components_bounded(theoretical, observed, w, budget, true)?,
        })
    }

    /// Index of every component's configuration in `e`, or `None` if `e`
    /// uses an edge outside the structure.
    pub fn choice_of(&self, e: &EmissionConfiguration) -> Option<Vec<usize>> {
        self.partition
            .components
            .iter()
            .map(|c| {
                let pairs: Vec<(usize, usize)> = c
                    .theoretical
                    .iter()
                    .filter_map(|&t| e.get(t).map(|o| (t, o)))
                    .collect();
                c.configurations.iter().position(|cfg| *cfg == pairs)
            })
            .collect()
    }

    pub fn configuration(&self, choice: &[usize]) -> EmissionConfiguration {
        let pairs = self
            .partition
            .components
            .iter()
            .zip(choice)
            .flat_map(|(c, &i)| c.configurations[i].iter().copied());
        EmissionConfiguration::from_pairs(self.partition.n, pairs)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct SearchResult {
    pub choice: Vec<usize>,
    pub k: usize,
    pub mu: f64,
    /// Objective value from the decomposition; callers recompute the
    /// canonical likelihood from the configuration.
    pub value: f64,
}

/// Weights of one pair under fixed parameters.
pub(crate) struct MatchProblem {
    /// Per component, per configuration: (weight sum, emitted count).
    stats: Vec<Vec<(f64, usize)>>,
    /// Per emitted count: (profiled intercept, profiled value).
    profile: Vec<(f64, f64)>,
    /// Observed terms with every peak treated as noise.
    c0: f64,
}

impl MatchProblem {
    pub fn new(
        structure: &PairStructure,
        theoretical: &[Peak],
        observed: &[Peak],
        params: &GlobalParams,
    ) -> Self {
        let ln_r = params.r.ln();
        let weight = |t: usize, o: usize| {
            let (tp, op) = (theoretical[t], observed[o]);
            params.beta * tp.intensity
                + truncated_normal_logpdf(op.mz, tp.mz, params.sigma, params.w)
                + params.f1.logpdf(op.intensity)
                - params.f0.logpdf(op.intensity)
                + ln_r
        };
        let stats: Vec<Vec<(f64, usize)>> = structure
            .partition
            .components
            .iter()
            .map(|c| {
                c.configurations
                    .iter()
                    .map(|cfg| (cfg.iter().map(|&(t, o)| weight(t, o)).sum(), cfg.len()))
                    .collect()
            })
            .collect();
        let k_max: usize = stats
            .iter()
            .map(|s| s.iter().map(|x| x.1).max().unwrap_or(0))
            .sum();
        let m = observed.len();
        let ys: Vec<f64> = theoretical.iter().map(|p| p.intensity).collect();
        let profile = (0..=k_max)
            .map(|k| {
                let (mu, value) = profile_intercept(&ys, params.beta, k);
                (mu, value - (ln_factorial(m) - ln_factorial(m - k)))
            })
            .collect();
        let c0 = observed.iter().map(|p| params.f0.logpdf(p.intensity) - ln_r).sum();
        Self { stats, profile, c0 }
    }

    fn objective(&self, weight: f64, k: usize) -> f64 {
        weight + self.profile[k].1
    }

    fn result(&self, choice: Vec<usize>) -> SearchResult {
        let (weight, k) = self.totals(&choice);
        SearchResult {
            value: self.c0 + self.objective(weight, k),
            mu: self.profile[k].0,
            choice,
            k,
        }
    }

    fn totals(&self, choice: &[usize]) -> (f64, usize) {
        self.stats
            .iter()
            .zip(choice)
            .fold((0.0, 0), |(w, k), (s, &i)| (w + s[i].0, k + s[i].1))
    }

    /// Component-wise coordinate ascent from `start`: components are visited
    /// in a fresh random order each sweep and switched to their best
    /// configuration, with the intercept re-profiled for every candidate.
    pub fn coordinate_ascent<R: Rng + ?Sized>(&self, start: Vec<usize>, rng: &mut R) -> SearchResult {
        let mut choice = start;
        let mut order: Vec<usize> = (0..self.stats.len()).collect();
        for _ in 0..MAX_SWEEPS {
            let (mut weight, mut k) = self.totals(&choice);
            let mut current = self.objective(weight, k);
            let mut changed = false;
            order.shuffle(rng);
            for &g in &order {
                let (cur_w, cur_k) = self.stats[g][choice[g]];
                let base_w = weight - cur_w;
                let base_k = k - cur_k;
                let mut best = (current, choice[g]);
                for (i, &(w_i, k_i)) in self.stats[g].iter().enumerate() {
                    let v = self.objective(base_w + w_i, base_k + k_i);
                    if v > best.0 + IMPROVEMENT_TOL {
                        best = (v, i);
                    }
                }
                if best.1 != choice[g] {
                    choice[g] = best.1;
                    let (w_new, k_new) = self.stats[g][best.1];
                    weight = base_w + w_new;
                    k = base_k + k_new;
                    current = best.0;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        self.result(choice)
    }

    /// Global maximizer: best weight per emitted count within each
    /// component, max-plus convolution across components, then the best
    /// emitted count. Ties go to the smaller count and to earlier
    /// configurations.
    pub fn exact(&self) -> SearchResult {
        // per component: best (weight, configuration) for each local k
        let local: Vec<Vec<Option<(f64, usize)>>> = self
            .stats
            .iter()
            .map(|s| {
                let kmax = s.iter().map(|x| x.1).max().unwrap_or(0);
                let mut best: Vec<Option<(f64, usize)>> = vec![None; kmax + 1];
                for (i, &(w, k)) in s.iter().enumerate() {
                    if best[k].is_none_or(|(bw, _)| w > bw) {
                        best[k] = Some((w, i));
                    }
                }
                best
            })
            .collect();

        // table[g][k]: best total over components < g with k emitted,
        // with the local k of component g-1 used to reach it
        let mut table: Vec<Vec<Option<(f64, usize)>>> = vec![vec![Some((0.0, 0))]];
        for comp in &local {
            let prev = table.last().expect("seeded");
            let mut next: Vec<Option<(f64, usize)>> = vec![None; prev.len() + comp.len() - 1];
            for (k0, entry) in prev.iter().enumerate() {
                let Some((w0, _)) = *entry else { continue };
                for (k1, cand) in comp.iter().enumerate() {
                    let Some((w1, _)) = *cand else { continue };
                    let total = w0 + w1;
                    if next[k0 + k1].is_none_or(|(bw, _)| total > bw) {
                        next[k0 + k1] = Some((total, k1));
                    }
                }
            }
            table.push(next);
        }

        let last = table.last().expect("seeded");
        let mut best: Option<(f64, usize)> = None;
        for (k, entry) in last.iter().enumerate() {
            if let Some((w, _)) = *entry {
                let v = self.objective(w, k);
                if best.is_none_or(|(bv, _)| v > bv) {
                    best = Some((v, k));
                }
            }
        }
        let (_, mut k) = best.expect("the empty configuration is always feasible");

        let mut choice = vec![0; local.len()];
        for g in (0..local.len()).rev() {
            let (_, k_local) = table[g + 1][k].expect("reachable");
            choice[g] = local[g][k_local].expect("reachable").1;
            k -= k_local;
        }
        self.result(choice)
    }
}
