use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::numeric::format_f64;
use crate::spectrum::{Peak, Spectrum, SpectrumKind};

struct Block {
    title: Option<String>,
    charge: Option<u32>,
    pepmass: Option<f64>,
    peaks: Vec<(Peak, usize)>,
    start_line: usize,
    ordinal: usize,
}

impl Block {
    fn name(&self) -> String {
        match &self.title {
            Some(t) => format!("block {} ({t})", self.ordinal),
            None => format!("block {}", self.ordinal),
        }
    }
}

/// Parses every `BEGIN IONS` ... `END IONS` block of an MGF-style document.
///
/// Any defect aborts the whole parse; the error names the block and line.
pub fn parse_observed(text: &str) -> Result<Vec<Spectrum>> {
    let mut spectra = Vec::new();
    let mut current: Option<Block> = None;
    let mut ordinal = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some(block) = current.as_mut() else {
            if line.eq_ignore_ascii_case("BEGIN IONS") {
                ordinal += 1;
                current = Some(Block {
                    title: None,
                    charge: None,
                    pepmass: None,
                    peaks: Vec::new(),
                    start_line: line_no,
                    ordinal,
                });
                continue;
            }
            if line.contains('=') {
                // global parameters such as MASS=Monoisotopic
                continue;
            }
            return Err(Error::Parse {
                block: format!("outside block (after block {ordinal})"),
                line: line_no,
                message: format!("unexpected content {line:?}"),
            });
        };

        let err = |block: &Block, message: String| Error::Parse {
            block: block.name(),
            line: line_no,
            message,
        };

        if line.eq_ignore_ascii_case("END IONS") {
            let block = current.take().expect("inside a block");
            spectra.push(finish_block(block, line_no)?);
            continue;
        }
        if line.eq_ignore_ascii_case("BEGIN IONS") {
            return Err(err(block, "nested BEGIN IONS".into()));
        }
        if let Some((key, value)) = line.split_once('=') {
            match key.trim().to_ascii_uppercase().as_str() {
                "TITLE" => block.title = Some(value.trim().to_string()),
                "CHARGE" => {
                    let charge = parse_charge(value)
                        .ok_or_else(|| err(block, format!("malformed CHARGE {value:?}")))?;
                    block.charge = Some(charge);
                }
                "PEPMASS" => {
                    let first = value.split_whitespace().next().unwrap_or("");
                    let mz: f64 = first
                        .parse()
                        .ok()
                        .filter(|v: &f64| v.is_finite() && *v > 0.0)
                        .ok_or_else(|| err(block, format!("malformed PEPMASS {value:?}")))?;
                    block.pepmass = Some(mz);
                }
                _ => {}
            }
            continue;
        }

        let mut fields = line.split_whitespace();
        let (Some(mz), Some(intensity)) = (fields.next(), fields.next()) else {
            return Err(err(block, format!("expected `<mz> <intensity>`, got {line:?}")));
        };
        let parse = |s: &str| s.parse::<f64>().ok().filter(|v| v.is_finite());
        match (parse(mz), parse(intensity)) {
            (Some(mz), Some(intensity)) => block.peaks.push((Peak::new(mz, intensity), line_no)),
            _ => {
                return Err(err(block, format!("non-numeric peak line {line:?}")));
            }
        }
    }

    if let Some(block) = current {
        return Err(Error::Parse {
            block: block.name(),
            line: block.start_line,
            message: "missing END IONS".into(),
        });
    }
    Ok(spectra)
}

fn parse_charge(value: &str) -> Option<u32> {
    let v = value.trim();
    // first listed charge only, e.g. "2+ and 3+"
    let v = v.split([' ', ',']).next()?;
    let digits = v.trim_end_matches(['+', '-']);
    if v.ends_with('-') {
        return None;
    }
    digits.parse::<u32>().ok().filter(|&c| c > 0)
}

fn finish_block(block: Block, end_line: usize) -> Result<Spectrum> {
    let name = block.name();
    let err = |line: usize, message: String| Error::Parse {
        block: name.clone(),
        line,
        message,
    };
    let title = block
        .title
        .clone()
        .ok_or_else(|| err(block.start_line, "missing TITLE".into()))?;
    let charge = block
        .charge
        .ok_or_else(|| err(block.start_line, "missing CHARGE".into()))?;
    if block.peaks.is_empty() {
        return Err(err(end_line, "empty block".into()));
    }

    let mut sorted: Vec<&(Peak, usize)> = block.peaks.iter().collect();
    sorted.sort_by(|a, b| a.0.mz.total_cmp(&b.0.mz));
    for w in sorted.windows(2) {
        if w[0].0.mz == w[1].0.mz {
            let line = w[0].1.max(w[1].1);
            return Err(err(line, format!("duplicate m/z {}", w[0].0.mz)));
        }
    }
    for (p, line) in &block.peaks {
        if p.mz <= 0.0 {
            return Err(err(*line, format!("m/z {} is not positive", p.mz)));
        }
        if p.intensity < 0.0 {
            return Err(err(*line, format!("negative intensity {}", p.intensity)));
        }
    }

    let peaks = block.peaks.iter().map(|(p, _)| *p).collect();
    Ok(Spectrum::new(title, charge, SpectrumKind::Observed, peaks)?.with_precursor_mz(block.pepmass))
}

/// Serializes spectra as MGF-style text readable by [`parse_observed`].
pub fn write_observed(spectra: &[Spectrum]) -> String {
    let mut out = String::new();
    for s in spectra {
        out.push_str("BEGIN IONS\n");
        let _ = writeln!(out, "TITLE={}", s.id);
        let _ = writeln!(out, "CHARGE={}+", s.charge);
        if let Some(mz) = s.precursor_mz {
            let _ = writeln!(out, "PEPMASS={}", format_f64(mz));
        }
        for p in s.peaks() {
            let _ = writeln!(out, "{} {}", format_f64(p.mz), format_f64(p.intensity));
        }
        out.push_str("END IONS\n\n");
    }
    out
}
