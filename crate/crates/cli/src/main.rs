//! `psmlik`: preprocess spectra, train parameters, score candidates,
//! simulate spectra and evaluate identifications.

mod files;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::json;

use files::{
    load_candidate, load_observed, load_theoretical, manifest_dir, manifest_rows, maybe_preprocess, read_text,
    resolve, sibling, write_atomic, CliError, CliResult,
};
use psm_likelihood::baselines::{similarity_index, write_baseline_rows, xcorr, SIMILARITY_BINWIDTH, XCORR_BINWIDTH};
use psm_likelihood::evaluation::{
    calibration_bins, calibration_pairs, fdr_vs_undetermined, read_score_table, read_truth_table,
    records_from_scores, write_calibration_tsv, write_fdr_tsv,
};
use psm_likelihood::numeric::format_f64;
use psm_likelihood::preprocess::preprocess;
use psm_likelihood::scoring::{score_with, write_score_rows, ScoreOptions, ScoreStrategy, SCORE_TSV_HEADER};
use psm_likelihood::simulator::{
    default_truth, run_recovery_experiment, sample_observed_with, synthetic_corpus, CORPUS_MZ_RANGE,
};
use psm_likelihood::spectra_io::{write_observed, write_theoretical};
use psm_likelihood::training::{fit, FitOptions, InnerSearch, TrainingPair};
use psm_likelihood::{GlobalParams, Spectrum};

#[derive(Parser)]
#[command(name = "psmlik", version, about = "Likelihood-based peptide-spectrum match scoring")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "PSMLIK_THREADS")]
    threads: Option<usize>,
    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Pool, normalize and transform every spectrum in a file.
    Preprocess {
        /// MGF file of observed spectra, or a theoretical TSV file.
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Pooling tolerance, Daltons.
        #[arg(long, default_value_t = files::TOLERANCE)]
        tol: f64,
    },
    /// Estimate shared parameters from known spectrum pairs.
    Train {
        /// TSV manifest: observed MGF path, theoretical TSV path (or
        /// `naive:SEQUENCE`), relative to the manifest.
        #[arg(long)]
        pairs: PathBuf,
        #[arg(long)]
        charge: u32,
        /// Parameter document; `<stem>.mu.tsv` and `<stem>.report.json` are
        /// written next to it.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        max_iter: usize,
        /// Relative log-likelihood improvement that ends training.
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        /// Location window half-width, Daltons.
        #[arg(long, default_value_t = 2.0)]
        window: f64,
        /// Noise m/z range length (default: widest observed spectrum).
        #[arg(long)]
        mz_range: Option<f64>,
        /// Use the global configuration search instead of coordinate ascent.
        #[arg(long)]
        exact: bool,
        /// Inputs are already preprocessed.
        #[arg(long)]
        skip_preprocess: bool,
    },
    /// Rank candidate theoretical spectra for each observed spectrum.
    Score {
        /// MGF file of observed spectra.
        #[arg(long)]
        observed: PathBuf,
        /// Directory of theoretical TSV files (scored against every
        /// spectrum), or a TSV manifest: observed id, theoretical path or
        /// `naive:SEQUENCE`.
        #[arg(long)]
        candidates: PathBuf,
        /// Parameter document (likelihood method only).
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Method::Likelihood)]
        method: Method,
        #[arg(long)]
        out: PathBuf,
        /// Bin width for the baseline methods, Daltons.
        #[arg(long)]
        binwidth: Option<f64>,
        /// Use seeded coordinate ascent instead of the global search.
        #[arg(long)]
        ascent_seed: Option<u64>,
        #[arg(long)]
        skip_preprocess: bool,
    },
    /// Draw observed spectra from theoretical spectra, or run a
    /// parameter-recovery experiment.
    Simulate {
        /// Theoretical TSV file or directory (default: synthetic corpus).
        #[arg(long)]
        theoretical: Option<PathBuf>,
        /// Parameter document (default: reference truth for `--charge`).
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long, default_value_t = 2)]
        charge: u32,
        /// Emission intercept (default: reference value for `--charge`).
        #[arg(long, allow_hyphen_values = true)]
        mu: Option<f64>,
        #[arg(long, default_value_t = 0.9)]
        noise_frac: f64,
        #[arg(long, default_value_t = 1)]
        replicates: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Synthetic corpus size when no theoretical input is given.
        #[arg(long, default_value_t = 50)]
        count: usize,
        /// Train on each replicate and report recovered parameters instead
        /// of writing spectra.
        #[arg(long)]
        recovery: bool,
        /// Spectra: MGF (plus `<stem>.truth.tsv` and, for a synthetic corpus,
        /// a `<stem>.theoretical` directory). Recovery: report TSV.
        #[arg(long)]
        out: PathBuf,
    },
    /// Summarize a score table against known identities.
    Evaluate {
        #[arg(long)]
        results: PathBuf,
        /// TSV: spectrum id, correct sequence.
        #[arg(long)]
        truth: PathBuf,
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long)]
        out: PathBuf,
        /// Calibration bin count.
        #[arg(long, default_value_t = 10)]
        bins: usize,
        /// Comma-separated confidence thresholds (default: every observed
        /// top-candidate confidence).
        #[arg(long, value_delimiter = ',')]
        thresholds: Vec<f64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Likelihood,
    Similarity,
    Xcorr,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Fdr,
    Calibration,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new()
        .filter_level(if cli.verbose { log::LevelFilter::Info } else { log::LevelFilter::Warn })
        .format_timestamp(None)
        .init();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("psmlik: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("psmlik: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(command: Command) -> CliResult<()> {
    match command {
        Command::Preprocess { input, out, tol } => cmd_preprocess(&input, &out, tol),
        Command::Train {
            pairs,
            charge,
            out,
            seed,
            max_iter,
            tol,
            window,
            mz_range,
            exact,
            skip_preprocess,
        } => {
            let options = FitOptions {
                w: window,
                r: mz_range,
                seed,
                max_outer_iterations: max_iter,
                rel_tol: tol,
                inner_search: if exact { InnerSearch::Exact } else { InnerSearch::CoordinateAscent },
                ..FitOptions::default()
            };
            cmd_train(&pairs, charge, &out, &options, skip_preprocess)
        }
        Command::Score {
            observed,
            candidates,
            params,
            method,
            out,
            binwidth,
            ascent_seed,
            skip_preprocess,
        } => cmd_score(&observed, &candidates, params.as_deref(), method, &out, binwidth, ascent_seed, skip_preprocess),
        Command::Simulate {
            theoretical,
            params,
            charge,
            mu,
            noise_frac,
            replicates,
            seed,
            count,
            recovery,
            out,
        } => {
            let sim = Simulation {
                theoretical,
                params,
                charge,
                mu,
                noise_frac,
                replicates,
                seed,
                count,
            };
            cmd_simulate(&sim, recovery, &out)
        }
        Command::Evaluate {
            results,
            truth,
            mode,
            out,
            bins,
            thresholds,
        } => cmd_evaluate(&results, &truth, mode, &out, bins, &thresholds),
    }
}

fn is_mgf(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("mgf"))
}

fn cmd_preprocess(input: &Path, out: &Path, tol: f64) -> CliResult<()> {
    if !(tol >= 0.0 && tol.is_finite()) {
        return Err(CliError::Usage(format!("--tol must be nonnegative, got {tol}")));
    }
    let text = if is_mgf(input) {
        let spectra = load_observed(input)?;
        let cleaned = spectra.iter().map(|s| preprocess(s, tol)).collect::<Result<Vec<_>, _>>()?;
        write_observed(&cleaned)
    } else {
        write_theoretical(&preprocess(&load_theoretical(input)?, tol)?)
    };
    write_atomic(out, text.as_bytes())
}

/// The observed block titled `id`, or the only block in the file.
fn pick_observed(spectra: Vec<Spectrum>, id: &str, path: &Path) -> CliResult<Spectrum> {
    if spectra.len() == 1 {
        return Ok(spectra.into_iter().next().expect("one spectrum"));
    }
    spectra
        .into_iter()
        .find(|s| s.id == id)
        .ok_or_else(|| CliError::Data(format!("{}: no spectrum titled {id:?}", path.display())))
}

fn cmd_train(manifest: &Path, charge: u32, out: &Path, options: &FitOptions, skip: bool) -> CliResult<()> {
    let base = manifest_dir(manifest);
    let mut pairs = Vec::new();
    for (line, row) in manifest_rows(manifest, 2)? {
        let obs_path = resolve(&base, &row[0]);
        let theoretical = load_candidate(&row[1], &base, charge)?;
        let observed = pick_observed(load_observed(&obs_path)?, &theoretical.id, &obs_path)?;
        for s in [&observed, &theoretical] {
            if s.charge != charge {
                return Err(CliError::Data(format!(
                    "{} line {line}: spectrum {} has charge {}, training charge is {charge}",
                    manifest.display(),
                    s.id,
                    s.charge
                )));
            }
        }
        let observed = maybe_preprocess(observed, skip, files::TOLERANCE)?;
        let theoretical = maybe_preprocess(theoretical, skip, files::TOLERANCE)?;
        pairs.push(TrainingPair::new(observed, theoretical)?);
    }
    let state = fit(&pairs, options)?;

    write_atomic(out, state.theta0.to_json().as_bytes())?;
    let mut mu_table = String::from("id\tmu\tloglik\n");
    for ((p, mu), ll) in pairs.iter().zip(&state.mus).zip(&state.per_pair_loglik) {
        mu_table.push_str(&format!("{}\t{}\t{}\n", p.observed.id, format_f64(*mu), format_f64(*ll)));
    }
    write_atomic(&sibling(out, "mu.tsv"), mu_table.as_bytes())?;
    let report = json!({
        "charge": charge,
        "pairs": pairs.len(),
        "seed": state.seed,
        "iterations": state.iterations,
        "converged": state.converged,
        "loglik_trace": state.loglik_trace,
        "warnings": state.warnings.iter().map(|w| format!("{w:?}")).collect::<Vec<_>>(),
    });
    let mut text = serde_json::to_string_pretty(&report).map_err(psm_likelihood::Error::from)?;
    text.push('\n');
    write_atomic(&sibling(out, "report.json"), text.as_bytes())
}

fn load_params(path: &Path) -> CliResult<GlobalParams> {
    GlobalParams::from_json(&read_text(path)?).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

/// Candidate spectra per observed spectrum, in observed order.
fn candidate_lists(observed: &[Spectrum], candidates: &Path) -> CliResult<Vec<Vec<Spectrum>>> {
    if candidates.is_dir() {
        let mut paths: Vec<PathBuf> = std::fs::read_dir(candidates)
            .map_err(|e| CliError::Data(format!("{}: {e}", candidates.display())))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file())
            .collect();
        paths.sort();
        let all = paths.iter().map(|p| load_theoretical(p)).collect::<CliResult<Vec<_>>>()?;
        return Ok(observed.iter().map(|_| all.clone()).collect());
    }
    let base = manifest_dir(candidates);
    let rows = manifest_rows(candidates, 2)?;
    observed
        .iter()
        .map(|o| {
            rows.iter()
                .filter(|(_, r)| r[0] == o.id)
                .map(|(_, r)| load_candidate(&r[1], &base, o.charge))
                .collect()
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn cmd_score(
    observed_path: &Path,
    candidates: &Path,
    params_path: Option<&Path>,
    method: Method,
    out: &Path,
    binwidth: Option<f64>,
    ascent_seed: Option<u64>,
    skip: bool,
) -> CliResult<()> {
    let params = match (method, params_path) {
        (Method::Likelihood, Some(p)) => Some(load_params(p)?),
        (Method::Likelihood, None) => return Err(CliError::Usage("--params is required for the likelihood method".into())),
        _ => None,
    };
    let observed = load_observed(observed_path)?;
    if !candidates.exists() {
        return Err(CliError::Usage(format!("{}: file not found", candidates.display())));
    }
    let lists = candidate_lists(&observed, candidates)?;
    let options = ScoreOptions {
        strategy: ascent_seed.map_or(ScoreStrategy::Exact, |seed| ScoreStrategy::CoordinateAscent { seed }),
        ..ScoreOptions::default()
    };

    let blocks: Vec<Vec<u8>> = observed
        .into_par_iter()
        .zip(lists)
        .map(|(o, cands)| -> CliResult<Vec<u8>> {
            let mut buf = Vec::new();
            if cands.is_empty() {
                log::warn!("spectrum {} has no candidates", o.id);
                return Ok(buf);
            }
            let o = maybe_preprocess(o, skip, files::TOLERANCE)?;
            let cands = cands
                .into_iter()
                .map(|c| maybe_preprocess(c, skip, files::TOLERANCE))
                .collect::<CliResult<Vec<_>>>()?;
            match method {
                Method::Likelihood => {
                    let p = params.as_ref().expect("checked above");
                    let scored = cands
                        .iter()
                        .map(|c| score_with(&o, c, p, &options))
                        .collect::<Result<Vec<_>, _>>()?;
                    write_score_rows(&mut buf, &o.id, &scored)?;
                }
                Method::Similarity | Method::Xcorr => {
                    let (name, width) = match method {
                        Method::Similarity => ("similarity", binwidth.unwrap_or(SIMILARITY_BINWIDTH)),
                        _ => ("xcorr", binwidth.unwrap_or(XCORR_BINWIDTH)),
                    };
                    let scores = cands
                        .iter()
                        .map(|c| {
                            let s = match method {
                                Method::Similarity => similarity_index(&o, c, width),
                                _ => xcorr(&o, c, width),
                            }?;
                            Ok((c.id.clone(), s))
                        })
                        .collect::<CliResult<Vec<_>>>()?;
                    write_baseline_rows(&mut buf, &o.id, name, &scores)
                        .map_err(|e| CliError::Data(e.to_string()))?;
                }
            }
            Ok(buf)
        })
        .collect::<CliResult<_>>()?;

    let mut text = format!("{SCORE_TSV_HEADER}\n").into_bytes();
    for b in blocks {
        text.extend(b);
    }
    write_atomic(out, &text)
}

struct Simulation {
    theoretical: Option<PathBuf>,
    params: Option<PathBuf>,
    charge: u32,
    mu: Option<f64>,
    noise_frac: f64,
    replicates: usize,
    seed: u64,
    count: usize,
}

fn cmd_simulate(sim: &Simulation, recovery: bool, out: &Path) -> CliResult<()> {
    if !(sim.noise_frac >= 0.0 && sim.noise_frac.is_finite()) {
        return Err(CliError::Usage(format!("--noise-frac must be nonnegative, got {}", sim.noise_frac)));
    }
    let (reference, reference_mu) = default_truth(sim.charge)
        .map(|(p, mu)| (Some(p), Some(mu)))
        .unwrap_or((None, None));
    let params = match &sim.params {
        Some(p) => load_params(p)?,
        None => reference.ok_or_else(|| CliError::Usage(format!("--params is required for charge {}", sim.charge)))?,
    };
    let mu = sim
        .mu
        .or(reference_mu)
        .ok_or_else(|| CliError::Usage("--mu is required for this charge".into()))?;
    let synthetic = sim.theoretical.is_none();
    let corpus = match &sim.theoretical {
        None => synthetic_corpus(sim.count, params.charge, sim.seed)?,
        Some(p) if p.is_dir() => {
            let mut paths: Vec<PathBuf> = std::fs::read_dir(p)
                .map_err(|e| CliError::Data(format!("{}: {e}", p.display())))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.is_file())
                .collect();
            paths.sort();
            paths.iter().map(|p| load_theoretical(p)).collect::<CliResult<_>>()?
        }
        Some(p) => vec![load_theoretical(p)?],
    };
    if let Some(s) = corpus.iter().find(|s| s.charge != params.charge) {
        return Err(CliError::Data(format!(
            "theoretical spectrum {} has charge {}, parameters are for charge {}",
            s.id, s.charge, params.charge
        )));
    }

    if recovery {
        let options = FitOptions {
            seed: sim.seed,
            ..FitOptions::default()
        };
        let report = run_recovery_experiment(&corpus, &params, mu, sim.noise_frac, sim.replicates, sim.seed, &options)?;
        let mut buf = Vec::new();
        report.write_tsv(&mut buf).map_err(|e| CliError::Data(e.to_string()))?;
        return write_atomic(out, &buf);
    }

    let lo = corpus
        .iter()
        .flat_map(|s| s.mzs())
        .fold(f64::INFINITY, f64::min)
        .min(CORPUS_MZ_RANGE.0);
    let range = (lo, lo + params.r);
    let mut spectra = Vec::new();
    let mut truth = String::from("spectrum_id\ttheoretical_id\n");
    for rep in 0..sim.replicates {
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(sim.seed);
        rng.set_stream(rep as u64);
        for t in &corpus {
            let noise = (sim.noise_frac * t.len() as f64).floor() as usize;
            let drawn = sample_observed_with(t, &params, mu, Some(noise), range, &mut rng)?;
            let id = if sim.replicates == 1 {
                t.id.clone()
            } else {
                format!("{}.r{rep}", t.id)
            };
            truth.push_str(&format!("{id}\t{}\n", t.id));
            let mut s = drawn.observed;
            s.id = id;
            spectra.push(s);
        }
    }
    write_atomic(out, write_observed(&spectra).as_bytes())?;
    write_atomic(&sibling(out, "truth.tsv"), truth.as_bytes())?;
    if synthetic {
        let dir = sibling(out, "theoretical");
        std::fs::create_dir_all(&dir).map_err(|e| CliError::Data(format!("{}: {e}", dir.display())))?;
        for t in &corpus {
            write_atomic(&dir.join(format!("{}.tsv", t.id)), write_theoretical(t).as_bytes())?;
        }
    }
    Ok(())
}

fn cmd_evaluate(results: &Path, truth: &Path, mode: Mode, out: &Path, bins: usize, thresholds: &[f64]) -> CliResult<()> {
    let rows = read_score_table(&read_text(results)?)?;
    let truth = read_truth_table(&read_text(truth)?)?;
    let mut buf = Vec::new();
    let io = |e: std::io::Error| CliError::Data(e.to_string());
    match mode {
        Mode::Fdr => {
            let records = records_from_scores(&rows, &truth)?;
            let ts: Vec<f64> = if thresholds.is_empty() {
                let mut ts: Vec<f64> = records.iter().map(|r| r.confidence).collect();
                ts.sort_by(f64::total_cmp);
                ts.dedup();
                ts
            } else {
                thresholds.to_vec()
            };
            write_fdr_tsv(&mut buf, &fdr_vs_undetermined(&records, &ts)?).map_err(io)?;
        }
        Mode::Calibration => {
            let pairs = calibration_pairs(&rows, &truth)?;
            if pairs.is_empty() {
                return Err(CliError::Data("calibration needs posterior columns (likelihood scores)".into()));
            }
            write_calibration_tsv(&mut buf, &calibration_bins(&pairs, bins)?).map_err(io)?;
        }
    }
    write_atomic(out, &buf)
}
