use super::components::build_components_bounded;
use super::config::EmissionConfiguration;
use super::logistic::{log_emission_prob, log_no_emission_prob};
use super::params::GlobalParams;
use super::truncnorm::truncated_normal_logpdf;
use crate::error::{Error, Result};
use crate::numeric::{ln_factorial, log_sum_exp};
use crate::spectrum::{Peak, Spectrum};

/// Joint configuration count accepted by [`full_loglik_bruteforce`].
pub const BRUTEFORCE_BUDGET: usize = 100_000;

/// The individual log terms of the complete-data likelihood, in a fixed
/// order: the `(m-k)!/m!` factor, one emission term per theoretical peak,
/// one term per observed peak (noise location and `f0`, or emitted location
/// and `f1`).
pub fn complete_data_terms(
    theoretical: &[Peak],
    observed: &[Peak],
    e: &EmissionConfiguration,
    params: &GlobalParams,
    mu: f64,
) -> Result<Vec<f64>> {
    e.validate(theoretical, observed, params.w)?;
    let m = observed.len();
    let k = e.emitted_count();
    let mut terms = Vec::with_capacity(1 + theoretical.len() + m);
    terms.push(ln_factorial(m - k) - ln_factorial(m));
    for (t, peak) in theoretical.iter().enumerate() {
        terms.push(match e.get(t) {
            Some(_) => log_emission_prob(peak.intensity, mu, params.beta),
            None => log_no_emission_prob(peak.intensity, mu, params.beta),
        });
    }
    let log_uniform = -params.r.ln();
    for (o, source) in e.observed_map(m).into_iter().enumerate() {
        let peak = observed[o];
        terms.push(match source {
            None => log_uniform + params.f0.logpdf(peak.intensity),
            Some(t) => {
                truncated_normal_logpdf(peak.mz, theoretical[t].mz, params.sigma, params.w)
                    + params.f1.logpdf(peak.intensity)
            }
        });
    }
    Ok(terms)
}

/// `log[p(O | T, e) p(e | T)]` over raw peak slices.
pub fn complete_data_loglik_peaks(
    theoretical: &[Peak],
    observed: &[Peak],
    e: &EmissionConfiguration,
    params: &GlobalParams,
    mu: f64,
) -> Result<f64> {
    Ok(complete_data_terms(theoretical, observed, e, params, mu)?
        .into_iter()
        .sum())
}

/// Complete-data log-likelihood of one configuration at intercept `mu`.
pub fn complete_data_loglik(
    observed: &Spectrum,
    theoretical: &Spectrum,
    e: &EmissionConfiguration,
    params: &GlobalParams,
    mu: f64,
) -> Result<f64> {
    complete_data_loglik_peaks(theoretical.peaks(), observed.peaks(), e, params, mu)
}

/// `log p(O | T)`: log-sum-exp of the complete-data likelihood over every
/// joint configuration.
///
/// The `(m-k)!/m!` factor depends on the total emitted count, so the sum does
/// not factor over components; the full cross product is walked instead.
pub fn full_loglik_bruteforce(
    observed: &Spectrum,
    theoretical: &Spectrum,
    params: &GlobalParams,
    mu: f64,
) -> Result<f64> {
    let (t, o) = (theoretical.peaks(), observed.peaks());
    let partition = build_components_bounded(t, o, params.w, BRUTEFORCE_BUDGET, false)?;
    let total = partition.total_configurations();
    if total > BRUTEFORCE_BUDGET {
        return Err(Error::EnumerationOverflow {
            theoretical: t.len(),
            observed: o.len(),
            budget: BRUTEFORCE_BUDGET,
        });
    }
    let comps = &partition.components;
    let mut choice = vec![0usize; comps.len()];
    let mut values = Vec::with_capacity(total);
    loop {
        let pairs = comps
            .iter()
            .zip(&choice)
            .flat_map(|(c, &i)| c.configurations[i].iter().copied());
        let e = EmissionConfiguration::from_pairs(t.len(), pairs);
        values.push(complete_data_loglik_peaks(t, o, &e, params, mu)?);

        // odometer increment
        let mut g = 0;
        loop {
            if g == comps.len() {
                return Ok(log_sum_exp(&values));
            }
            choice[g] += 1;
            if choice[g] < comps[g].configurations.len() {
                break;
            }
            choice[g] = 0;
            g += 1;
        }
    }
}
