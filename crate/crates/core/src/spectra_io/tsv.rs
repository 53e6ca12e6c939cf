use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::numeric::format_f64;
use crate::spectrum::{Peak, Spectrum, SpectrumKind};

/// Parses a theoretical spectrum.
///
/// ```text
/// # id=LVTDLTK
/// # charge=1
/// 114.091340<TAB>0.25
/// ...
/// ```
///
/// Header keys may share one comment line (`# id=LVTDLTK charge=1`). A bare
/// `mz<TAB>intensity` column header is skipped.
pub fn parse_theoretical(text: &str) -> Result<Spectrum> {
    let mut id: Option<String> = None;
    let mut charge: Option<u32> = None;
    let mut precursor: Option<f64> = None;
    let mut peaks: Vec<(Peak, usize)> = Vec::new();

    let block_name = |id: &Option<String>| id.clone().unwrap_or_else(|| "theoretical".into());

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let current = block_name(&id);
        let err = |message: String| Error::Parse {
            block: current.clone(),
            line: line_no,
            message,
        };
        if let Some(comment) = line.strip_prefix('#') {
            for token in comment.split_whitespace() {
                let Some((key, value)) = token.split_once('=') else {
                    continue;
                };
                match key {
                    "id" => id = Some(value.to_string()),
                    "charge" => {
                        let c = value
                            .trim_end_matches('+')
                            .parse::<u32>()
                            .ok()
                            .filter(|&c| c > 0)
                            .ok_or_else(|| err(format!("malformed charge {value:?}")))?;
                        charge = Some(c);
                    }
                    "precursor_mz" => {
                        let mz = value
                            .parse::<f64>()
                            .ok()
                            .filter(|v| v.is_finite() && *v > 0.0)
                            .ok_or_else(|| err(format!("malformed precursor_mz {value:?}")))?;
                        precursor = Some(mz);
                    }
                    _ => {}
                }
            }
            continue;
        }
        let mut fields = line.split_whitespace();
        let (Some(a), Some(b)) = (fields.next(), fields.next()) else {
            return Err(err(format!("expected `mz<TAB>intensity`, got {line:?}")));
        };
        if a.eq_ignore_ascii_case("mz") && b.eq_ignore_ascii_case("intensity") {
            continue;
        }
        let parse = |s: &str| s.parse::<f64>().ok().filter(|v| v.is_finite());
        let (Some(mz), Some(intensity)) = (parse(a), parse(b)) else {
            return Err(err(format!("non-numeric peak line {line:?}")));
        };
        if mz <= 0.0 {
            return Err(err(format!("m/z {mz} is not positive")));
        }
        if intensity < 0.0 {
            return Err(err(format!("negative intensity {intensity}")));
        }
        peaks.push((Peak::new(mz, intensity), line_no));
    }

    let name = block_name(&id);
    let header_err = |message: &str| Error::Parse {
        block: name.clone(),
        line: 1,
        message: message.into(),
    };
    let id = id.clone().ok_or_else(|| header_err("missing `# id=` header"))?;
    let charge = charge.ok_or_else(|| header_err("missing `# charge=` header"))?;
    if peaks.is_empty() {
        return Err(header_err("no peaks"));
    }
    let mut by_mz: Vec<&(Peak, usize)> = peaks.iter().collect();
    by_mz.sort_by(|a, b| a.0.mz.total_cmp(&b.0.mz));
    if let Some(w) = by_mz.windows(2).find(|w| w[0].0.mz == w[1].0.mz) {
        return Err(Error::Parse {
            block: id,
            line: w[0].1.max(w[1].1),
            message: format!("duplicate m/z {}", w[0].0.mz),
        });
    }
    let peaks = peaks.into_iter().map(|(p, _)| p).collect();
    Ok(Spectrum::new(id, charge, SpectrumKind::Theoretical, peaks)?.with_precursor_mz(precursor))
}

/// Serializes a spectrum in the format read by [`parse_theoretical`].
pub fn write_theoretical(s: &Spectrum) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# id={}", s.id);
    let _ = writeln!(out, "# charge={}", s.charge);
    if let Some(mz) = s.precursor_mz {
        let _ = writeln!(out, "# precursor_mz={}", format_f64(mz));
    }
    for p in s.peaks() {
        let _ = writeln!(out, "{}\t{}", format_f64(p.mz), format_f64(p.intensity));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const LVTDLTK: &str = "# id=LVTDLTK charge=1\n\
        114.09\t1.0\n213.16\t0.5\n314.21\t0.25\n429.23\t2.0\n542.32\t0.75\n";

    #[test]
    fn parses_combined_header() {
        let s = parse_theoretical(LVTDLTK).unwrap();
        assert_eq!(s.id, "LVTDLTK");
        assert_eq!(s.charge, 1);
        assert_eq!(s.len(), 5);
        assert_eq!(s.kind, SpectrumKind::Theoretical);
    }

    #[test]
    fn negative_intensity_is_an_error() {
        let text = "# id=x\n# charge=2\nmz\tintensity\n100\t1\n200\t-1\n";
        let e = parse_theoretical(text).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 5, .. }), "{e}");
    }

    #[test]
    fn missing_header_and_duplicates() {
        assert!(parse_theoretical("100\t1\n").is_err());
        let dup = "# id=x\n# charge=2\n100\t1\n100\t2\n";
        assert!(parse_theoretical(dup).unwrap_err().to_string().contains("duplicate"));
    }

    #[test]
    fn round_trip_is_identical() {
        let s = parse_theoretical(LVTDLTK).unwrap().with_precursor_mz(Some(789.4743));
        let text = write_theoretical(&s);
        assert_eq!(parse_theoretical(&text).unwrap(), s);
    }
}
