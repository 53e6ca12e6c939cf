//! Sampling observed spectra from the generative model, a synthetic
//! theoretical corpus, and the parameter-recovery experiment.

use std::collections::HashSet;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{logistic_emission_prob, sample_truncated_normal, EmissionConfiguration, GlobalParams, PiecewiseDensity};
use crate::numeric::format_f64;
use crate::preprocess::{preprocess, DEFAULT_TOLERANCE};
use crate::spectrum::{Peak, Spectrum, SpectrumKind};
use crate::training::{fit, FitOptions, TrainingPair};

/// A simulated observed spectrum and everything used to draw it.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationTruth {
    pub observed: Spectrum,
    pub true_config: EmissionConfiguration,
    pub params: GlobalParams,
    pub mu: f64,
    pub noise_count: usize,
    pub mz_range: (f64, f64),
}

/// Default noise peak count for `n` theoretical peaks.
pub fn default_noise_count(n: usize) -> usize {
    (0.9 * n as f64).floor() as usize
}

/// Draws an observed spectrum from `theoretical` with a seeded generator.
pub fn sample_observed(
    theoretical: &Spectrum,
    params: &GlobalParams,
    mu: f64,
    noise_count: Option<usize>,
    mz_range: (f64, f64),
    seed: u64,
) -> Result<SimulationTruth> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_observed_with(theoretical, params, mu, noise_count, mz_range, &mut rng)
}

/// Each theoretical peak emits with probability `g(y; mu, beta)` at a
/// truncated-normal offset and an `f1` intensity; `noise_count` noise peaks
/// follow with uniform locations over `mz_range` and `f0` intensities.
/// Peaks are labelled in m/z order. A location that collides with an
/// existing peak, or is not positive, is redrawn.
pub fn sample_observed_with<R: Rng + ?Sized>(
    theoretical: &Spectrum,
    params: &GlobalParams,
    mu: f64,
    noise_count: Option<usize>,
    mz_range: (f64, f64),
    rng: &mut R,
) -> Result<SimulationTruth> {
    let (lo, hi) = mz_range;
    if hi <= lo || hi.is_nan() || lo.is_nan() || ((hi - lo) - params.r).abs() > 1e-9 * params.r.max(1.0) {
        return Err(Error::InvalidParams(format!(
            "m/z range ({lo}, {hi}) does not have length r = {}",
            params.r
        )));
    }
    let noise_count = noise_count.unwrap_or_else(|| default_noise_count(theoretical.len()));
    let mut taken: HashSet<u64> = HashSet::new();
    let mut draw_unique = |rng: &mut R, draw: &mut dyn FnMut(&mut R) -> f64| loop {
        let mz = draw(rng);
        if mz > 0.0 && taken.insert(mz.to_bits()) {
            return mz;
        }
    };

    // (mz, intensity, source theoretical index)
    let mut drawn: Vec<(f64, f64, Option<usize>)> = Vec::new();
    for (i, peak) in theoretical.peaks().iter().enumerate() {
        let g = logistic_emission_prob(peak.intensity, mu, params.beta);
        if rng.random::<f64>() < g {
            let mz = draw_unique(rng, &mut |r| sample_truncated_normal(r, peak.mz, params.sigma, params.w));
            drawn.push((mz, params.f1.sample(rng), Some(i)));
        }
    }
    for _ in 0..noise_count {
        let mz = draw_unique(rng, &mut |r| r.random_range(lo..hi));
        drawn.push((mz, params.f0.sample(rng), None));
    }
    drawn.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut map = vec![None; theoretical.len()];
    for (j, d) in drawn.iter().enumerate() {
        if let Some(i) = d.2 {
            map[i] = Some(j);
        }
    }
    let peaks = drawn.iter().map(|d| Peak::new(d.0, d.1)).collect();
    let observed = Spectrum::new(theoretical.id.clone(), theoretical.charge, SpectrumKind::Observed, peaks)?;
    Ok(SimulationTruth {
        observed,
        true_config: EmissionConfiguration::from_map(map),
        params: params.clone(),
        mu,
        noise_count,
        mz_range,
    })
}

/// m/z span of the synthetic corpus.
pub const CORPUS_MZ_RANGE: (f64, f64) = (200.0, 1800.0);

/// Synthetic theoretical spectra: 20 to 60 peaks with locations uniform on
/// [`CORPUS_MZ_RANGE`] and log-normal raw intensities, passed through the
/// standard preprocessing (2 Da pooling, 90th-percentile normalization,
/// fourth-root transform).
pub fn synthetic_corpus(count: usize, charge: u32, seed: u64) -> Result<Vec<Spectrum>> {
    let raw = LogNormal::new(0.0, 1.0).expect("valid log-normal");
    (0..count)
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(s as u64);
            let n = rng.random_range(20..=60);
            let mut peaks: Vec<Peak> = Vec::with_capacity(n);
            let mut seen = HashSet::new();
            while peaks.len() < n {
                let mz = rng.random_range(CORPUS_MZ_RANGE.0..CORPUS_MZ_RANGE.1);
                if seen.insert(mz.to_bits()) {
                    peaks.push(Peak::new(mz, raw.sample(&mut rng)));
                }
            }
            let spectrum = Spectrum::new(format!("synthetic-{s:04}"), charge, SpectrumKind::Theoretical, peaks)?;
            preprocess(&spectrum, DEFAULT_TOLERANCE)
        })
        .collect()
}

/// Shared truth densities for simulation: noise intensities skew low and
/// emitted intensities skew high.
pub fn default_truth_densities() -> (PiecewiseDensity, PiecewiseDensity) {
    let edges = [0.0, 0.35, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.1, 1.25, 1.6];
    let f0 = [0.10, 0.16, 0.16, 0.14, 0.12, 0.10, 0.08, 0.06, 0.05, 0.03];
    let f1 = [0.02, 0.04, 0.06, 0.08, 0.10, 0.12, 0.14, 0.15, 0.16, 0.13];
    (
        PiecewiseDensity::from_weights(edges, f0).expect("valid density"),
        PiecewiseDensity::from_weights(edges, f1).expect("valid density"),
    )
}

/// Reference truth `(params, mu)` for charges 1 and 2.
pub fn default_truth(charge: u32) -> Result<(GlobalParams, f64)> {
    let (mu, beta, sigma) = match charge {
        1 => (-1.240, 2.970, 0.390),
        2 => (-5.060, 4.740, 0.160),
        _ => return Err(Error::InvalidInput(format!("no reference truth for charge {charge}"))),
    };
    let (f0, f1) = default_truth_densities();
    let r = CORPUS_MZ_RANGE.1 - CORPUS_MZ_RANGE.0;
    Ok((GlobalParams::new(charge, sigma, beta, f0, f1, 2.0, r)?, mu))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateResult {
    pub replicate: usize,
    /// Mean of the per-spectrum intercepts.
    pub mu_mean: f64,
    pub beta: f64,
    pub sigma: f64,
    /// Misclassified theoretical emission labels, pooled over spectra.
    pub ce_t: f64,
    /// Misclassified observed emitted/noise labels, pooled over spectra.
    pub ce_o: f64,
    pub iterations: usize,
    pub converged: bool,
    pub monotone: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryReport {
    pub rows: Vec<ReplicateResult>,
}

/// Mean and sample standard deviation.
fn mean_sd(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = xs.clone().count() as f64;
    let mean = xs.clone().sum::<f64>() / n;
    let var = if n > 1.0 {
        xs.map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

impl RecoveryReport {
    /// `(mean, sd)` of `(mu_mean, beta, sigma, ce_t, ce_o)` over replicates.
    pub fn summary(&self) -> [(f64, f64); 5] {
        let rows = &self.rows;
        [
            mean_sd(rows.iter().map(|r| r.mu_mean)),
            mean_sd(rows.iter().map(|r| r.beta)),
            mean_sd(rows.iter().map(|r| r.sigma)),
            mean_sd(rows.iter().map(|r| r.ce_t)),
            mean_sd(rows.iter().map(|r| r.ce_o)),
        ]
    }

    pub fn write_tsv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "replicate\tmu\tbeta\tsigma\tce_t\tce_o")?;
        for r in &self.rows {
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}",
                r.replicate,
                format_f64(r.mu_mean),
                format_f64(r.beta),
                format_f64(r.sigma),
                format_f64(r.ce_t),
                format_f64(r.ce_o)
            )?;
        }
        let s = self.summary();
        for (label, pick) in [("mean", 0usize), ("sd", 1)] {
            let v = |i: usize| format_f64(if pick == 0 { s[i].0 } else { s[i].1 });
            writeln!(out, "{label}\t{}\t{}\t{}\t{}\t{}", v(0), v(1), v(2), v(3), v(4))?;
        }
        Ok(())
    }
}

/// Simulates one observed spectrum per theoretical spectrum, trains on the
/// pairs, and compares the estimates and configurations with the truth; once
/// per replicate. Replicate `i` draws from stream `i` of a generator seeded
/// with `seed`.
pub fn run_recovery_experiment(
    corpus: &[Spectrum],
    truth: &GlobalParams,
    mu: f64,
    noise_fraction: f64,
    replicates: usize,
    seed: u64,
    options: &FitOptions,
) -> Result<RecoveryReport> {
    if corpus.is_empty() || replicates == 0 {
        return Err(Error::InvalidInput("recovery needs a corpus and at least one replicate".into()));
    }
    let lo = corpus
        .iter()
        .flat_map(|s| s.mzs())
        .fold(f64::INFINITY, f64::min)
        .min(CORPUS_MZ_RANGE.0);
    let range = (lo, lo + truth.r);
    let rows = (0..replicates)
        .into_par_iter()
        .map(|rep| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(rep as u64);
            let truths = corpus
                .iter()
                .map(|t| {
                    let noise = (noise_fraction * t.len() as f64).floor() as usize;
                    sample_observed_with(t, truth, mu, Some(noise), range, &mut rng)
                })
                .collect::<Result<Vec<_>>>()?;
            let pairs = truths
                .iter()
                .zip(corpus)
                .map(|(tr, t)| TrainingPair::new(tr.observed.clone(), t.clone()))
                .collect::<Result<Vec<_>>>()?;
            let opts = FitOptions {
                w: truth.w,
                r: Some(truth.r),
                seed: options.seed.wrapping_add(rep as u64),
                ..options.clone()
            };
            let state = fit(&pairs, &opts)?;
            let (mut wrong_t, mut total_t, mut wrong_o, mut total_o) = (0usize, 0usize, 0usize, 0usize);
            for (tr, est) in truths.iter().zip(&state.configs) {
                let m = tr.observed.len();
                let (a, b) = (tr.true_config.theoretical_indicators(), est.theoretical_indicators());
                wrong_t += a.iter().zip(&b).filter(|(x, y)| x != y).count();
                total_t += a.len();
                let (a, b) = (tr.true_config.observed_map(m), est.observed_map(m));
                wrong_o += a.iter().zip(&b).filter(|(x, y)| x.is_some() != y.is_some()).count();
                total_o += m;
            }
            Ok(ReplicateResult {
                replicate: rep,
                mu_mean: state.mus.iter().sum::<f64>() / state.mus.len() as f64,
                beta: state.theta0.beta,
                sigma: state.theta0.sigma,
                ce_t: wrong_t as f64 / total_t as f64,
                ce_o: wrong_o as f64 / total_o.max(1) as f64,
                iterations: state.iterations,
                converged: state.converged,
                monotone: state.loglik_trace.windows(2).all(|w| w[1] >= w[0]),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RecoveryReport { rows })
}
