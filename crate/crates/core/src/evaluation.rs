//! Identification accuracy: correctness up to indistinguishable residues,
//! FDR against undetermined rate, posterior calibration, score gaps.

use std::collections::BTreeMap;
use std::io::Write;

use crate::error::{Error, Result};
use crate::numeric::format_f64;

/// Same-mass residues are not told apart: I/L and K/Q.
fn canonical(residue: char) -> char {
    match residue {
        'L' => 'I',
        'Q' => 'K',
        c => c,
    }
}

/// Equality after mapping L to I and Q to K position by position.
pub fn is_correct(top: &str, truth: &str) -> bool {
    top.chars().count() == truth.chars().count()
        && top.chars().zip(truth.chars()).all(|(a, b)| canonical(a) == canonical(b))
}

/// Top-ranked call for one spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentificationRecord {
    pub spectrum_id: String,
    pub top_candidate: String,
    /// Posterior of the top candidate, or a score gap for baselines.
    pub confidence: f64,
    pub truth: String,
}

impl IdentificationRecord {
    pub fn correct(&self) -> bool {
        is_correct(&self.top_candidate, &self.truth)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FdrRow {
    pub threshold: f64,
    pub undetermined_rate: f64,
    /// `None` when no record reaches the threshold.
    pub fdr: Option<f64>,
    pub determined: usize,
}

/// One row per threshold, sorted by threshold: records with confidence
/// below it are undetermined, the rest are calls.
pub fn fdr_vs_undetermined(records: &[IdentificationRecord], thresholds: &[f64]) -> Result<Vec<FdrRow>> {
    if records.is_empty() {
        return Err(Error::InvalidInput("no identification records".into()));
    }
    if let Some(r) = records.iter().find(|r| r.confidence.is_nan()) {
        return Err(Error::InvalidInput(format!("confidence of {} is not a number", r.spectrum_id)));
    }
    let mut ts = thresholds.to_vec();
    ts.sort_by(f64::total_cmp);
    let total = records.len() as f64;
    Ok(ts
        .into_iter()
        .map(|threshold| {
            let called: Vec<&IdentificationRecord> = records.iter().filter(|r| r.confidence >= threshold).collect();
            let wrong = called.iter().filter(|r| !r.correct()).count();
            FdrRow {
                threshold,
                undetermined_rate: (records.len() - called.len()) as f64 / total,
                fdr: (!called.is_empty()).then(|| wrong as f64 / called.len() as f64),
                determined: called.len(),
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    /// `None` for empty bins.
    pub mean_assigned: Option<f64>,
    pub empirical: Option<f64>,
}

/// Equal-width bins over `[0, 1]`; probability 1 falls in the last bin.
/// Empty bins are kept.
pub fn calibration_bins(pairs: &[(f64, bool)], bins: usize) -> Result<Vec<CalibrationBin>> {
    if pairs.is_empty() || bins == 0 {
        return Err(Error::InvalidInput("calibration needs observations and at least one bin".into()));
    }
    if let Some((p, _)) = pairs.iter().find(|(p, _)| !(0.0..=1.0).contains(p)) {
        return Err(Error::InvalidInput(format!("probability {p} outside [0, 1]")));
    }
    let mut acc = vec![(0.0, 0usize, 0usize); bins];
    for &(p, correct) in pairs {
        let b = ((p * bins as f64) as usize).min(bins - 1);
        acc[b].0 += p;
        acc[b].1 += usize::from(correct);
        acc[b].2 += 1;
    }
    Ok(acc
        .into_iter()
        .enumerate()
        .map(|(b, (sum, hits, count))| CalibrationBin {
            lo: b as f64 / bins as f64,
            hi: (b + 1) as f64 / bins as f64,
            count,
            mean_assigned: (count > 0).then(|| sum / count as f64),
            empirical: (count > 0).then(|| hits as f64 / count as f64),
        })
        .collect())
}

fn top_two(scores: &[f64]) -> Result<(f64, Option<f64>)> {
    let mut sorted = scores.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    match sorted.as_slice() {
        [] => Err(Error::InvalidInput("no scores".into())),
        [best] => Ok((*best, None)),
        [best, second, ..] => Ok((*best, Some(*second))),
    }
}

/// Best minus second-best score; infinite for a single candidate.
pub fn confidence_gap(scores: &[f64]) -> Result<f64> {
    let (best, second) = top_two(scores)?;
    Ok(second.map_or(f64::INFINITY, |s| best - s))
}

/// `(best - second) / best`; `None` unless the best score is positive and a
/// second candidate exists.
pub fn delta_cn(scores: &[f64]) -> Result<Option<f64>> {
    let (best, second) = top_two(scores)?;
    Ok(second.filter(|_| best > 0.0).map(|s| (best - s) / best))
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".to_string(), format_f64)
}

pub fn write_fdr_tsv<W: Write>(out: &mut W, rows: &[FdrRow]) -> std::io::Result<()> {
    writeln!(out, "threshold\tundetermined_rate\tfdr\tdetermined")?;
    for r in rows {
        writeln!(
            out,
            "{}\t{}\t{}\t{}",
            format_f64(r.threshold),
            format_f64(r.undetermined_rate),
            opt(r.fdr),
            r.determined
        )?;
    }
    Ok(())
}

pub fn write_calibration_tsv<W: Write>(out: &mut W, bins: &[CalibrationBin]) -> std::io::Result<()> {
    writeln!(out, "bin_lo\tbin_hi\tcount\tmean_assigned\tempirical")?;
    for b in bins {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}",
            format_f64(b.lo),
            format_f64(b.hi),
            b.count,
            opt(b.mean_assigned),
            opt(b.empirical)
        )?;
    }
    Ok(())
}

/// One row of a ranked score table.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRow {
    pub spectrum_id: String,
    pub candidate_id: String,
    pub method: String,
    pub score: f64,
    pub posterior: Option<f64>,
    pub gap: Option<f64>,
    pub rank: usize,
}

/// Reads a ranked score table (header line plus rows) as written by the
/// scoring and baseline writers.
pub fn read_score_table(text: &str) -> Result<Vec<ScoreRow>> {
    let parse_err = |line: usize, message: String| Error::Parse {
        block: "score table".into(),
        line,
        message,
    };
    let num = |s: &str, line: usize| -> Result<Option<f64>> {
        if s == "NA" {
            Ok(None)
        } else {
            s.parse().map(Some).map_err(|_| parse_err(line, format!("not a number: {s:?}")))
        }
    };
    let mut rows = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() || raw.starts_with("spectrum_id\t") {
            continue;
        }
        let f: Vec<&str> = raw.split('\t').collect();
        if f.len() != 9 {
            return Err(parse_err(line, format!("expected 9 columns, found {}", f.len())));
        }
        rows.push(ScoreRow {
            spectrum_id: f[0].to_string(),
            candidate_id: f[1].to_string(),
            method: f[2].to_string(),
            score: num(f[3], line)?.ok_or_else(|| parse_err(line, "missing score".into()))?,
            posterior: num(f[6], line)?,
            gap: num(f[7], line)?,
            rank: f[8].parse().map_err(|_| parse_err(line, format!("bad rank {:?}", f[8])))?,
        });
    }
    Ok(rows)
}

/// Reads `spectrum_id<TAB>sequence` lines; `#` lines are comments.
pub fn read_truth_table(text: &str) -> Result<BTreeMap<String, String>> {
    let mut truth = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut f = line.split('\t');
        match (f.next(), f.next(), f.next()) {
            (Some(id), Some(seq), None) if !seq.is_empty() => {
                truth.insert(id.to_string(), seq.trim().to_string());
            }
            _ => {
                return Err(Error::Parse {
                    block: "truth table".into(),
                    line: i + 1,
                    message: "expected spectrum_id<TAB>sequence".into(),
                })
            }
        }
    }
    Ok(truth)
}

/// Identification records from the rank-1 rows of a score table. The
/// confidence is the posterior when present and the score gap otherwise
/// (infinite for a single candidate).
pub fn records_from_scores(rows: &[ScoreRow], truth: &BTreeMap<String, String>) -> Result<Vec<IdentificationRecord>> {
    rows.iter()
        .filter(|r| r.rank == 1)
        .map(|r| {
            let t = truth
                .get(&r.spectrum_id)
                .ok_or_else(|| Error::InvalidInput(format!("no truth for spectrum {}", r.spectrum_id)))?;
            Ok(IdentificationRecord {
                spectrum_id: r.spectrum_id.clone(),
                top_candidate: r.candidate_id.clone(),
                confidence: r.posterior.or(r.gap).unwrap_or(f64::INFINITY),
                truth: t.clone(),
            })
        })
        .collect()
}

/// `(posterior, correct)` over every candidate row with a posterior.
pub fn calibration_pairs(rows: &[ScoreRow], truth: &BTreeMap<String, String>) -> Result<Vec<(f64, bool)>> {
    rows.iter()
        .filter_map(|r| r.posterior.map(|p| (r, p)))
        .map(|(r, p)| {
            let t = truth
                .get(&r.spectrum_id)
                .ok_or_else(|| Error::InvalidInput(format!("no truth for spectrum {}", r.spectrum_id)))?;
            Ok((p, is_correct(&r.candidate_id, t)))
        })
        .collect()
}
