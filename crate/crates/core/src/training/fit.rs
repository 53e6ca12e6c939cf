use log::{info, warn};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::densities::{density_edges, estimate_densities};
use super::init::init_configuration;
use super::logistic::{estimate_logistic, LabelGroup, MU_BOUND};
use super::sigma::{estimate_sigma, SigmaWarning};
use crate::error::{Error, Result};
use crate::model::{
    complete_data_loglik, EmissionConfiguration, GlobalParams, PiecewiseDensity, BIN_COUNT,
    DEFAULT_ENUMERATION_BUDGET,
};
use crate::search::{MatchProblem, PairStructure};
use crate::spectrum::Spectrum;

/// A preprocessed observed spectrum with its known theoretical spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingPair {
    pub observed: Spectrum,
    pub theoretical: Spectrum,
}

impl TrainingPair {
    pub fn new(observed: Spectrum, theoretical: Spectrum) -> Result<Self> {
        if observed.charge != theoretical.charge {
            return Err(Error::ChargeMismatch {
                expected: observed.charge,
                found: theoretical.charge,
                id: theoretical.id.clone(),
            });
        }
        observed.require_nonempty()?;
        theoretical.require_nonempty()?;
        Ok(Self {
            observed,
            theoretical,
        })
    }
}

/// How step (b) searches configurations for each spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InnerSearch {
    /// Randomized component-wise coordinate ascent.
    #[default]
    CoordinateAscent,
    /// Global maximization over configurations.
    Exact,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    /// Location window half-width, Daltons.
    pub w: f64,
    /// Noise m/z range length; defaults to the widest observed spectrum.
    pub r: Option<f64>,
    pub seed: u64,
    pub max_outer_iterations: usize,
    /// Relative improvement of the total log-likelihood below which the
    /// outer loop stops.
    pub rel_tol: f64,
    pub inner_search: InnerSearch,
    pub enumeration_budget: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            w: 2.0,
            r: None,
            seed: 0,
            max_outer_iterations: 100,
            rel_tol: 1e-6,
            inner_search: InnerSearch::default(),
            enumeration_budget: DEFAULT_ENUMERATION_BUDGET,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrainingWarning {
    /// More theoretical than observed peaks.
    MoreTheoretical { id: String, n: usize, m: usize },
    Sigma(SigmaWarning),
    /// Intercept on a clamp bound (separated labels).
    ClampedIntercept { id: String, mu: f64 },
    /// Edges dropped to keep a component enumerable.
    PrunedEdges { id: String, count: usize },
    NotConverged,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingState {
    pub theta0: GlobalParams,
    pub mus: Vec<f64>,
    pub configs: Vec<EmissionConfiguration>,
    /// Total log-likelihood after initialization and after every outer
    /// iteration.
    pub loglik_trace: Vec<f64>,
    pub per_pair_loglik: Vec<f64>,
    pub seed: u64,
    pub iterations: usize,
    pub converged: bool,
    pub warnings: Vec<TrainingWarning>,
}

struct Fitter<'a> {
    pairs: &'a [TrainingPair],
    structures: Vec<PairStructure>,
    edges: [f64; BIN_COUNT + 1],
    w: f64,
    r: f64,
    charge: u32,
    warnings: Vec<TrainingWarning>,
}

impl Fitter<'_> {
    fn note(&mut self, w: TrainingWarning) {
        if !self.warnings.contains(&w) {
            warn!("{w:?}");
            self.warnings.push(w);
        }
    }

    fn per_pair(&self, params: &GlobalParams, mus: &[f64], configs: &[EmissionConfiguration]) -> Result<Vec<f64>> {
        self.pairs
            .par_iter()
            .zip(mus.par_iter().zip(configs))
            .map(|(p, (&mu, e))| {
                let v = complete_data_loglik(&p.observed, &p.theoretical, e, params, mu)?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::NonFiniteLikelihood {
                        id: p.observed.id.clone(),
                    })
                }
            })
            .collect()
    }

    fn total(&self, params: &GlobalParams, mus: &[f64], configs: &[EmissionConfiguration]) -> Result<f64> {
        // summed in pair order so the value does not depend on scheduling
        Ok(self.per_pair(params, mus, configs)?.into_iter().sum())
    }

    fn residuals(&self, configs: &[EmissionConfiguration]) -> Vec<f64> {
        self.pairs
            .iter()
            .zip(configs)
            .flat_map(|(p, e)| {
                let (t, o) = (p.theoretical.peaks(), p.observed.peaks());
                e.pairs().map(move |(i, j)| o[j].mz - t[i].mz)
            })
            .collect()
    }

    fn label_groups(&self, configs: &[EmissionConfiguration]) -> Vec<LabelGroup> {
        self.pairs
            .iter()
            .zip(configs)
            .map(|(p, e)| LabelGroup::new(p.theoretical.intensities().collect(), e.theoretical_indicators()))
            .collect()
    }

    fn split_intensities(&self, configs: &[EmissionConfiguration]) -> (Vec<f64>, Vec<f64>) {
        let (mut noise, mut emitted) = (Vec::new(), Vec::new());
        for (p, e) in self.pairs.iter().zip(configs) {
            let o = p.observed.peaks();
            for (j, src) in e.observed_map(o.len()).into_iter().enumerate() {
                match src {
                    Some(_) => emitted.push(o[j].intensity),
                    None => noise.push(o[j].intensity),
                }
            }
        }
        (noise, emitted)
    }

    fn sigma(&mut self, configs: &[EmissionConfiguration]) -> Result<f64> {
        let est = estimate_sigma(&self.residuals(configs), self.w)?;
        if let Some(w) = est.warning {
            self.note(TrainingWarning::Sigma(w));
        }
        Ok(est.sigma)
    }

    fn densities(&self, configs: &[EmissionConfiguration]) -> Result<(PiecewiseDensity, PiecewiseDensity)> {
        let (noise, emitted) = self.split_intensities(configs);
        estimate_densities(self.edges, &noise, &emitted)
    }

    /// Every shared parameter estimated from scratch, used at start-up.
    fn initial_params(&mut self, configs: &[EmissionConfiguration]) -> Result<(GlobalParams, Vec<f64>)> {
        let sigma = self.sigma(configs)?;
        let fit = estimate_logistic(&self.label_groups(configs), 0.0, &vec![0.0; self.pairs.len()]);
        let (f0, f1) = self.densities(configs)?;
        let params = GlobalParams::new(self.charge, sigma, fit.beta, f0, f1, self.w, self.r)?;
        Ok((params, fit.mus))
    }

    /// Step (a): each block of the shared parameters is replaced by its
    /// estimate given the configurations, and kept only if the total
    /// log-likelihood does not drop.
    fn update_params(
        &mut self,
        params: &mut GlobalParams,
        mus: &mut Vec<f64>,
        configs: &[EmissionConfiguration],
        total: &mut f64,
    ) -> Result<()> {
        let mut cand = params.clone();
        cand.sigma = self.sigma(configs)?;
        let v = self.total(&cand, mus, configs)?;
        if v >= *total {
            *params = cand;
            *total = v;
        }

        let fit = estimate_logistic(&self.label_groups(configs), params.beta, mus);
        let mut cand = params.clone();
        cand.beta = fit.beta;
        let v = self.total(&cand, &fit.mus, configs)?;
        if v >= *total {
            *params = cand;
            *mus = fit.mus;
            *total = v;
        }

        let (f0, f1) = self.densities(configs)?;
        let mut cand = params.clone();
        cand.f0 = f0;
        cand.f1 = f1;
        let v = self.total(&cand, mus, configs)?;
        if v >= *total {
            *params = cand;
            *total = v;
        }
        Ok(())
    }

    /// Step (b): configurations and intercepts per spectrum, in parallel.
    fn update_configs(
        &self,
        params: &GlobalParams,
        mus: &mut [f64],
        configs: &mut [EmissionConfiguration],
        search: InnerSearch,
        seed: u64,
        iteration: usize,
    ) -> Result<()> {
        let updates: Vec<Option<(f64, EmissionConfiguration)>> = self
            .pairs
            .par_iter()
            .enumerate()
            .map(|(s, p)| {
                let (t, o) = (p.theoretical.peaks(), p.observed.peaks());
                let structure = &self.structures[s];
                let problem = MatchProblem::new(structure, t, o, params);
                let result = match search {
                    InnerSearch::Exact => problem.exact(),
                    InnerSearch::CoordinateAscent => {
                        let mut rng = ChaCha8Rng::seed_from_u64(seed);
                        rng.set_stream(((iteration as u64) << 32) | s as u64);
                        let start = structure
                            .choice_of(&configs[s])
                            .expect("configurations stay within the search structure");
                        problem.coordinate_ascent(start, &mut rng)
                    }
                };
                let e = structure.configuration(&result.choice);
                let old = complete_data_loglik(&p.observed, &p.theoretical, &configs[s], params, mus[s])?;
                let new = complete_data_loglik(&p.observed, &p.theoretical, &e, params, result.mu)?;
                Ok((new >= old).then_some((result.mu, e)))
            })
            .collect::<Result<_>>()?;
        for (s, u) in updates.into_iter().enumerate() {
            if let Some((mu, e)) = u {
                mus[s] = mu;
                configs[s] = e;
            }
        }
        Ok(())
    }
}

/// Supervised estimation of the shared parameters and per-spectrum
/// intercepts.
///
/// Configurations start from greedy nearest-pair matching. Each outer
/// iteration re-estimates `(sigma, beta, f0, f1)` given the configurations,
/// then re-optimizes every spectrum's configuration and intercept given the
/// shared parameters. Updates that would lower the likelihood are rejected,
/// so `loglik_trace` never decreases.
pub fn fit(pairs: &[TrainingPair], options: &FitOptions) -> Result<TrainingState> {
    if pairs.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "training needs at least 2 spectrum pairs, got {}",
            pairs.len()
        )));
    }
    let charge = pairs[0].observed.charge;
    if let Some(p) = pairs.iter().find(|p| p.observed.charge != charge) {
        return Err(Error::ChargeMismatch {
            expected: charge,
            found: p.observed.charge,
            id: p.observed.id.clone(),
        });
    }
    if !(options.w > 0.0 && options.w.is_finite()) {
        return Err(Error::InvalidParams(format!("window must be positive, got {}", options.w)));
    }
    let r = match options.r {
        Some(r) => r,
        None => pairs.iter().map(|p| p.observed.mz_span()).fold(0.0, f64::max),
    };
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidParams(format!("noise m/z range must be positive, got {r}")));
    }

    let all: Vec<f64> = pairs.iter().flat_map(|p| p.observed.intensities()).collect();
    let edges = density_edges(&all)?;
    let structures = pairs
        .par_iter()
        .map(|p| PairStructure::new(p.theoretical.peaks(), p.observed.peaks(), options.w, options.enumeration_budget))
        .collect::<Result<Vec<_>>>()?;

    let mut fitter = Fitter {
        pairs,
        structures,
        edges,
        w: options.w,
        r,
        charge,
        warnings: Vec::new(),
    };
    for (p, s) in pairs.iter().zip(&fitter.structures.clone()) {
        let (n, m) = (p.theoretical.len(), p.observed.len());
        if n > m {
            fitter.note(TrainingWarning::MoreTheoretical {
                id: p.observed.id.clone(),
                n,
                m,
            });
        }
        if !s.partition.dropped.is_empty() {
            fitter.note(TrainingWarning::PrunedEdges {
                id: p.observed.id.clone(),
                count: s.partition.dropped.len(),
            });
        }
    }

    let mut configs: Vec<EmissionConfiguration> = pairs
        .iter()
        .zip(&fitter.structures)
        .map(|(p, s)| init_configuration(&s.partition, p.theoretical.peaks(), p.observed.peaks()))
        .collect();
    let (mut params, mut mus) = fitter.initial_params(&configs)?;
    let mut total = fitter.total(&params, &mus, &configs)?;
    let mut trace = vec![total];
    let mut converged = false;
    let mut iterations = 0;

    while iterations < options.max_outer_iterations {
        iterations += 1;
        let before = total;
        fitter.update_params(&mut params, &mut mus, &configs, &mut total)?;
        fitter.update_configs(&params, &mut mus, &mut configs, options.inner_search, options.seed, iterations)?;
        total = fitter.total(&params, &mus, &configs)?;
        trace.push(total);
        info!("outer iteration {iterations}: log-likelihood {total:.6}");
        if total - before < options.rel_tol * before.abs() {
            converged = true;
            break;
        }
    }
    if !converged {
        fitter.note(TrainingWarning::NotConverged);
    }
    for (p, &mu) in pairs.iter().zip(&mus) {
        if mu.abs() >= MU_BOUND {
            fitter.note(TrainingWarning::ClampedIntercept {
                id: p.observed.id.clone(),
                mu,
            });
        }
    }
    let per_pair_loglik = fitter.per_pair(&params, &mus, &configs)?;
    Ok(TrainingState {
        theta0: params,
        mus,
        configs,
        loglik_trace: trace,
        per_pair_loglik,
        seed: options.seed,
        iterations,
        converged,
        warnings: fitter.warnings,
    })
}
