//! Candidate scores (maximized complete-data likelihood) and posterior
//! identification probabilities over a candidate list.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{complete_data_loglik, EmissionConfiguration, GlobalParams, DEFAULT_ENUMERATION_BUDGET};
use crate::numeric::{format_f64, log_sum_exp};
use crate::search::{MatchProblem, PairStructure};
use crate::spectrum::Spectrum;

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredMatch {
    pub candidate_id: String,
    /// `max over (e, mu)` of the complete-data log-likelihood.
    pub log_score: f64,
    pub mu_hat: f64,
    pub best_config: EmissionConfiguration,
    /// Emitted peak count of `best_config`.
    pub k: usize,
    pub n: usize,
    pub m: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScoreStrategy {
    /// Global maximum over configurations.
    Exact,
    /// Randomized component-wise ascent from the empty configuration.
    CoordinateAscent { seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScoreOptions {
    pub strategy: ScoreStrategy,
    pub enumeration_budget: usize,
}

impl Default for ScoreOptions {
    fn default() -> Self {
        Self {
            strategy: ScoreStrategy::Exact,
            enumeration_budget: DEFAULT_ENUMERATION_BUDGET,
        }
    }
}

/// Scores `theoretical` against `observed` with default options.
pub fn score(observed: &Spectrum, theoretical: &Spectrum, params: &GlobalParams) -> Result<ScoredMatch> {
    score_with(observed, theoretical, params, &ScoreOptions::default())
}

pub fn score_with(
    observed: &Spectrum,
    theoretical: &Spectrum,
    params: &GlobalParams,
    options: &ScoreOptions,
) -> Result<ScoredMatch> {
    params.check_charge(observed.charge, &observed.id)?;
    params.check_charge(theoretical.charge, &theoretical.id)?;
    observed.require_nonempty()?;
    theoretical.require_nonempty()?;
    let (t, o) = (theoretical.peaks(), observed.peaks());
    let structure = PairStructure::new(t, o, params.w, options.enumeration_budget)?;
    let problem = MatchProblem::new(&structure, t, o, params);
    let result = match options.strategy {
        ScoreStrategy::Exact => problem.exact(),
        ScoreStrategy::CoordinateAscent { seed } => {
            let start = vec![0; structure.partition.components.len()];
            problem.coordinate_ascent(start, &mut ChaCha8Rng::seed_from_u64(seed))
        }
    };
    let best_config = structure.configuration(&result.choice);
    let log_score = complete_data_loglik(observed, theoretical, &best_config, params, result.mu)?;
    if !log_score.is_finite() {
        return Err(Error::NonFiniteLikelihood {
            id: format!("{} vs {}", observed.id, theoretical.id),
        });
    }
    Ok(ScoredMatch {
        candidate_id: theoretical.id.clone(),
        log_score,
        mu_hat: result.mu,
        best_config,
        k: result.k,
        n: t.len(),
        m: o.len(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorEntry {
    /// Position of the candidate in the scored input.
    pub index: usize,
    pub candidate_id: String,
    pub probability: f64,
    pub log_score: f64,
}

/// Candidates ordered by descending posterior; equal posteriors keep their
/// input order.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorSet {
    pub entries: Vec<PosteriorEntry>,
}

/// Posterior probabilities under equal priors: a softmax of the log-scores.
pub fn posteriors(scored: &[ScoredMatch]) -> Result<PosteriorSet> {
    if scored.is_empty() {
        return Err(Error::InvalidInput("posteriors need at least one candidate".into()));
    }
    let logs: Vec<f64> = scored.iter().map(|s| s.log_score).collect();
    let norm = log_sum_exp(&logs);
    let mut entries: Vec<PosteriorEntry> = scored
        .iter()
        .enumerate()
        .map(|(index, s)| PosteriorEntry {
            index,
            candidate_id: s.candidate_id.clone(),
            probability: (s.log_score - norm).exp(),
            log_score: s.log_score,
        })
        .collect();
    entries.sort_by(|a, b| b.log_score.total_cmp(&a.log_score));
    Ok(PosteriorSet { entries })
}

pub const SCORE_TSV_HEADER: &str = "spectrum_id\tcandidate_id\tmethod\tscore\tmu_hat\tk\tposterior\tgap\trank";

/// One ranked block of the score table for `spectrum_id`. `gap` is the
/// row's score minus the next row's score (`NA` on the last row).
pub fn write_score_rows<W: Write>(
    out: &mut W,
    spectrum_id: &str,
    scored: &[ScoredMatch],
) -> Result<()> {
    let set = posteriors(scored)?;
    for (rank, e) in set.entries.iter().enumerate() {
        let s = &scored[e.index];
        let gap = set
            .entries
            .get(rank + 1)
            .map_or_else(|| "NA".to_string(), |next| format_f64(e.log_score - next.log_score));
        writeln!(
            out,
            "{spectrum_id}\t{}\tlikelihood\t{}\t{}\t{}\t{}\t{gap}\t{}",
            e.candidate_id,
            format_f64(s.log_score),
            format_f64(s.mu_hat),
            s.k,
            format_f64(e.probability),
            rank + 1
        )
        .map_err(|err| Error::InvalidInput(format!("writing scores: {err}")))?;
    }
    Ok(())
}
