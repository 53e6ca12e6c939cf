//! End-to-end acceptance checks, one pass/fail line per criterion.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use psm_likelihood::baselines::{similarity_index, xcorr};
use psm_likelihood::model::{
    complete_data_loglik, full_loglik_bruteforce, log_emission_prob, log_no_emission_prob, truncated_normal_logpdf,
};
use psm_likelihood::evaluation::calibration_bins;
use psm_likelihood::scoring::{posteriors, score};
use psm_likelihood::simulator::{
    default_truth, default_truth_densities, run_recovery_experiment, sample_observed, synthetic_corpus,
    CORPUS_MZ_RANGE,
};
use psm_likelihood::training::{fit, FitOptions, TrainingPair};
use psm_likelihood::{EmissionConfiguration, GlobalParams, Peak, Spectrum, SpectrumKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// Every partial injection of `t` into `o` within `w`, built directly.
fn all_configurations(t: &[Peak], o: &[Peak], w: f64) -> Vec<Vec<Option<usize>>> {
    fn go(t: &[Peak], o: &[Peak], w: f64, i: usize, cur: &mut Vec<Option<usize>>, out: &mut Vec<Vec<Option<usize>>>) {
        if i == t.len() {
            out.push(cur.clone());
            return;
        }
        cur.push(None);
        go(t, o, w, i + 1, cur, out);
        cur.pop();
        for (j, q) in o.iter().enumerate() {
            if (q.mz - t[i].mz).abs() <= w && !cur.contains(&Some(j)) {
                cur.push(Some(j));
                go(t, o, w, i + 1, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(t, o, w, 0, &mut Vec::new(), &mut out);
    out
}

fn random_spectrum(rng: &mut ChaCha8Rng, id: &str, kind: SpectrumKind, charge: u32, count: usize) -> Spectrum {
    let peaks = (0..count)
        .map(|_| Peak::new(rng.random_range(500.0..507.0), rng.random_range(0.05..1.7)))
        .collect();
    Spectrum::new(id, charge, kind, peaks).expect("distinct continuous draws")
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let instances = 240;
    let results: Vec<Result<(), String>> = (0..instances)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(2024);
            rng.set_stream(i as u64);
            let charge = 1 + (i % 2) as u32;
            let (mut params, _) = default_truth(charge).unwrap();
            params.sigma = rng.random_range(0.1..1.0);
            params.beta = rng.random_range(-2.0..6.0);
            let n = rng.random_range(1..=3);
            let m = rng.random_range(1..=5);
            let t = random_spectrum(&mut rng, "t", SpectrumKind::Theoretical, charge, n);
            let o = random_spectrum(&mut rng, "o", SpectrumKind::Observed, charge, m);

            let got = score(&o, &t, &params).map_err(|e| e.to_string())?;
            let configs = all_configurations(t.peaks(), o.peaks(), params.w);
            if configs.len() > 10_000 {
                return Err(format!("instance {i} has {} configurations", configs.len()));
            }
            // complete-data value on a 1e-3 intercept grid, per configuration
            let grid: Vec<f64> = (0..=30_000).map(|g| -15.0 + g as f64 * 1e-3).collect();
            let mut best = f64::NEG_INFINITY;
            for map in &configs {
                let e = EmissionConfiguration::from_map(map.clone());
                let at_zero = complete_data_loglik(&o, &t, &e, &params, 0.0).map_err(|e| e.to_string())?;
                let emission = |mu: f64| -> f64 {
                    t.peaks()
                        .iter()
                        .zip(map)
                        .map(|(p, z)| match z {
                            Some(_) => log_emission_prob(p.intensity, mu, params.beta),
                            None => log_no_emission_prob(p.intensity, mu, params.beta),
                        })
                        .sum()
                };
                let base = at_zero - emission(0.0);
                for &mu in &grid {
                    best = best.max(base + emission(mu));
                }
            }
            if (got.log_score - best).abs() > 1e-6 {
                return Err(format!("instance {i}: score {} vs oracle {best}", got.log_score));
            }
            let full = full_loglik_bruteforce(&o, &t, &params, got.mu_hat).map_err(|e| e.to_string())?;
            if got.log_score > full {
                return Err(format!("instance {i}: score {} exceeds full likelihood {full}", got.log_score));
            }
            Ok(())
        })
        .collect();
    let failures: Vec<&String> = results.iter().filter_map(|r| r.as_ref().err()).collect();
    let elapsed = start.elapsed();
    outcome(
        failures.is_empty() && elapsed.as_secs() < 60,
        format!(
            "{instances} instances, {} mismatches{}, {:.1}s",
            failures.len(),
            failures.first().map(|f| format!(" (first: {f})")).unwrap_or_default(),
            elapsed.as_secs_f64()
        ),
    )
}

struct RecoveryRuns {
    monotone: usize,
    runs: usize,
    max_iterations: usize,
    all_converged: bool,
}

fn parameter_recovery(runs: &mut RecoveryRuns) -> Outcome {
    let start = Instant::now();
    let mut pass = true;
    let mut details = Vec::new();
    for charge in [1u32, 2] {
        let corpus = synthetic_corpus(50, charge, 500 + charge as u64).unwrap();
        let (truth, mu) = default_truth(charge).unwrap();
        let report = run_recovery_experiment(&corpus, &truth, mu, 0.9, 20, 31 + charge as u64, &FitOptions::default())
            .expect("recovery runs");
        for r in &report.rows {
            runs.runs += 1;
            runs.monotone += usize::from(r.monotone);
            runs.max_iterations = runs.max_iterations.max(r.iterations);
            runs.all_converged &= r.converged;
        }
        let [m, b, s, ct, co] = report.summary();
        let ok = (m.0 - mu).abs() <= 0.5
            && (b.0 - truth.beta).abs() <= 0.6
            && (s.0 - truth.sigma).abs() <= 0.03
            && ct.0 < 0.10
            && co.0 < 0.10;
        pass &= ok;
        details.push(format!(
            "+{charge}: mu {:.3} ({:.3}) beta {:.3} ({:.3}) sigma {:.3} ({:.3}) CE_T {:.3} CE_O {:.3}",
            m.0, m.1, b.0, b.1, s.0, s.1, ct.0, co.0
        ));
    }
    let elapsed = start.elapsed();
    pass &= elapsed.as_secs() < 600;
    details.push(format!("{:.1}s", elapsed.as_secs_f64()));
    outcome(pass, details.join("; "))
}

/// Per spectrum: true candidate ranked first, (posterior, is true) for
/// every candidate, posterior total.
type SpectrumOutcome = (bool, Vec<(f64, bool)>, f64);

struct Discrimination {
    posterior_pairs: Vec<(f64, bool)>,
    posterior_sums: Vec<f64>,
    trained_params: GlobalParams,
    training_monotone: bool,
    training_iterations: usize,
}

fn discrimination() -> (Outcome, Discrimination) {
    let (truth, mu) = default_truth(2).unwrap();
    let train_corpus = synthetic_corpus(50, 2, 71).unwrap();
    let pairs: Vec<TrainingPair> = train_corpus
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let s = sample_observed(t, &truth, mu, None, CORPUS_MZ_RANGE, 9000 + i as u64).unwrap();
            TrainingPair::new(s.observed, t.clone()).unwrap()
        })
        .collect();
    let state = fit(&pairs, &FitOptions::default()).expect("training");
    let params = state.theta0.clone();

    let corpus = synthetic_corpus(5000, 2, 72).unwrap();
    let per_spectrum: Vec<SpectrumOutcome> = (0..500)
        .into_par_iter()
        .map(|s| {
            let cands = &corpus[s * 10..s * 10 + 10];
            let observed = sample_observed(&cands[0], &truth, mu, None, CORPUS_MZ_RANGE, 70_000 + s as u64)
                .unwrap()
                .observed;
            let scored: Vec<_> = cands.iter().map(|c| score(&observed, c, &params).unwrap()).collect();
            let post = posteriors(&scored).unwrap();
            let top = post.entries[0].candidate_id == cands[0].id;
            let pairs = post
                .entries
                .iter()
                .map(|e| (e.probability, e.candidate_id == cands[0].id))
                .collect();
            (top, pairs, post.entries.iter().map(|e| e.probability).sum())
        })
        .collect();
    let first = per_spectrum.iter().filter(|x| x.0).count();
    let rate = first as f64 / 500.0;
    (
        outcome(rate >= 0.9, format!("true candidate ranked first in {first}/500 ({:.1}%)", 100.0 * rate)),
        Discrimination {
            posterior_pairs: per_spectrum.iter().flat_map(|x| x.1.clone()).collect(),
            posterior_sums: per_spectrum.iter().map(|x| x.2).collect(),
            trained_params: params,
            training_monotone: state.loglik_trace.windows(2).all(|w| w[1] >= w[0]),
            training_iterations: state.iterations,
        },
    )
}

fn calibration(d: &Discrimination) -> Outcome {
    let bins = calibration_bins(&d.posterior_pairs, 10).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for b in bins.iter().filter(|b| b.count >= 200) {
        let (a, e) = (b.mean_assigned.unwrap(), b.empirical.unwrap());
        pass &= (e - a).abs() < 0.1;
        parts.push(format!("[{:.1},{:.1}) n={} assigned {a:.3} empirical {e:.3}", b.lo, b.hi, b.count));
    }
    outcome(pass, parts.join("; "))
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    let h = (b - a) / intervals as f64;
    let mut s = f(a) + f(b);
    for i in 1..intervals {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

fn unit_checks(d: &Discrimination) -> Outcome {
    let mut fails = Vec::new();
    for sigma in [0.05, 0.39, 1.0] {
        let total = simpson(|x| truncated_normal_logpdf(x, 0.0, sigma, 2.0).exp(), -2.0, 2.0, 400_000);
        if (total - 1.0).abs() > 1e-8 {
            fails.push(format!("truncated normal sigma {sigma} integrates to {total}"));
        }
    }
    let (f0, f1) = default_truth_densities();
    for dens in [&f0, &f1, &d.trained_params.f0, &d.trained_params.f1] {
        let e = dens.edges();
        // piecewise-constant: exact per-bin midpoint rule
        let total: f64 = (0..10).map(|b| dens.logpdf(0.5 * (e[b] + e[b + 1])).exp() * (e[b + 1] - e[b])).sum();
        if (total - 1.0).abs() > 1e-8 {
            fails.push(format!("piecewise density integrates to {total}"));
        }
    }
    let worst = d.posterior_sums.iter().map(|s| (s - 1.0).abs()).fold(0.0, f64::max);
    if worst > 1e-12 {
        fails.push(format!("posterior set sums off by {worst:e}"));
    }
    let s = synthetic_corpus(1, 2, 5).unwrap().remove(0);
    let sim = similarity_index(&s, &s, 2.0).unwrap();
    if sim != 1.0 {
        fails.push(format!("self similarity {sim}"));
    }
    let unit = Spectrum::new("u", 1, SpectrumKind::Observed, vec![Peak::new(700.5, 1.0)]).unwrap();
    let x = xcorr(&unit, &unit, 1.0).unwrap();
    if (x - (1.0 - 1.0 / 151.0)).abs() > 1e-12 {
        fails.push(format!("unit self xcorr {x}"));
    }
    let pass = fails.is_empty();
    outcome(
        pass,
        if pass {
            format!("densities integrate to 1, max posterior-sum error {worst:.1e}, I(self) = 1, Xcorr(unit) = {x}")
        } else {
            fails.join("; ")
        },
    )
}

fn psmlik(dir: &Path, threads: usize, args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_psmlik"))
        .current_dir(dir)
        .arg("--threads")
        .arg(threads.to_string())
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!("psmlik {args:?}: {}", String::from_utf8_lossy(&out.stderr)))
    }
}

fn pipeline(dir: &Path, threads: usize) -> Result<(), String> {
    psmlik(dir, threads, &["simulate", "--charge", "2", "--count", "25", "--seed", "11", "--out", "train.mgf"])?;
    let truth = std::fs::read_to_string(dir.join("train.truth.tsv")).map_err(|e| e.to_string())?;
    let manifest: String = truth
        .lines()
        .skip(1)
        .map(|l| {
            let t = l.split('\t').nth(1).unwrap();
            format!("train.mgf\ttrain.theoretical/{t}.tsv\n")
        })
        .collect();
    std::fs::write(dir.join("pairs.tsv"), manifest).map_err(|e| e.to_string())?;
    psmlik(dir, threads, &["train", "--pairs", "pairs.tsv", "--charge", "2", "--out", "params.json", "--seed", "5", "--skip-preprocess"])?;
    psmlik(dir, threads, &["simulate", "--params", "params.json", "--theoretical", "train.theoretical", "--replicates", "2", "--seed", "12", "--out", "test.mgf"])?;
    psmlik(dir, threads, &["score", "--observed", "test.mgf", "--candidates", "train.theoretical", "--params", "params.json", "--out", "scores.tsv", "--skip-preprocess"])?;
    psmlik(dir, threads, &["score", "--observed", "test.mgf", "--candidates", "train.theoretical", "--params", "params.json", "--ascent-seed", "3", "--out", "scores_ascent.tsv", "--skip-preprocess"])?;
    psmlik(dir, threads, &["simulate", "--recovery", "--count", "50", "--replicates", "2", "--seed", "13", "--out", "recovery.tsv"])
}

fn files_under(dir: &Path, prefix: &Path, out: &mut Vec<std::path::PathBuf>) {
    let mut entries: Vec<_> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    entries.sort();
    for p in entries {
        if p.is_dir() {
            files_under(&p, prefix, out);
        } else {
            out.push(p.strip_prefix(prefix).unwrap().to_path_buf());
        }
    }
}

fn determinism() -> Outcome {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    if let Err(e) = pipeline(a.path(), 4).and_then(|_| pipeline(b.path(), 1)) {
        return outcome(false, e);
    }
    let (mut fa, mut fb) = (Vec::new(), Vec::new());
    files_under(a.path(), a.path(), &mut fa);
    files_under(b.path(), b.path(), &mut fb);
    if fa != fb {
        return outcome(false, format!("different file sets: {fa:?} vs {fb:?}"));
    }
    let differing: Vec<String> = fa
        .iter()
        .filter(|p| std::fs::read(a.path().join(p)).unwrap() != std::fs::read(b.path().join(p)).unwrap())
        .map(|p| p.display().to_string())
        .collect();
    outcome(
        differing.is_empty(),
        if differing.is_empty() {
            format!("{} output files byte-identical across two runs (4 vs 1 threads)", fa.len())
        } else {
            format!("differing: {}", differing.join(", "))
        },
    )
}

fn main() {
    let mut results: Vec<(&str, Outcome)> = Vec::new();
    results.push(("1 oracle equivalence", oracle_equivalence()));

    let mut runs = RecoveryRuns {
        monotone: 0,
        runs: 0,
        max_iterations: 0,
        all_converged: true,
    };
    results.push(("2 parameter recovery", parameter_recovery(&mut runs)));
    let (disc, d) = discrimination();
    runs.runs += 1;
    runs.monotone += usize::from(d.training_monotone);
    runs.max_iterations = runs.max_iterations.max(d.training_iterations);
    results.push((
        "3 monotone training",
        outcome(
            runs.monotone == runs.runs && runs.all_converged && runs.max_iterations <= 100,
            format!(
                "{}/{} runs nondecreasing, all converged: {}, max {} outer iterations",
                runs.monotone, runs.runs, runs.all_converged, runs.max_iterations
            ),
        ),
    ));
    results.push(("4 discrimination", disc));
    results.push(("5 calibration", calibration(&d)));
    results.push(("6 density and distribution checks", unit_checks(&d)));
    results.push(("7 determinism", determinism()));

    let mut failed = 0;
    for (name, o) in &results {
        println!("criterion {name}: {} ({})", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {}/{} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
