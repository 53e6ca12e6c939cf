use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use psm_likelihood::preprocess::{preprocess, DEFAULT_TOLERANCE};
use psm_likelihood::spectra_io::{generate_naive_theoretical, parse_observed, parse_theoretical};
use psm_likelihood::{Error, Spectrum};

/// Failure of a command, carrying its exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags or a missing input file: exit 2.
    Usage(String),
    /// Unreadable, malformed or inconsistent data: exit 1.
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Data(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => CliError::Usage(format!("{}: file not found", path.display())),
        _ => CliError::Data(format!("{}: {e}", path.display())),
    })
}

fn with_path(path: &Path, e: Error) -> CliError {
    CliError::Data(format!("{}: {e}", path.display()))
}

pub fn load_observed(path: &Path) -> CliResult<Vec<Spectrum>> {
    parse_observed(&read_text(path)?).map_err(|e| with_path(path, e))
}

pub fn load_theoretical(path: &Path) -> CliResult<Spectrum> {
    parse_theoretical(&read_text(path)?).map_err(|e| with_path(path, e))
}

/// A theoretical spectrum given as a file path or `naive:SEQUENCE`.
pub fn load_candidate(spec: &str, base: &Path, charge: u32) -> CliResult<Spectrum> {
    match spec.strip_prefix("naive:") {
        Some(seq) => Ok(generate_naive_theoretical(seq, charge)?),
        None => load_theoretical(&resolve(base, spec)),
    }
}

pub fn resolve(base: &Path, entry: &str) -> PathBuf {
    let p = Path::new(entry);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

pub fn manifest_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

/// Non-comment lines of a tab-separated manifest, with line numbers.
pub fn manifest_rows(path: &Path, columns: usize) -> CliResult<Vec<(usize, Vec<String>)>> {
    let text = read_text(path)?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end();
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<String> = line.split('\t').map(str::to_string).collect();
        if fields.len() != columns {
            return Err(CliError::Data(format!(
                "{} line {}: expected {columns} tab-separated columns, found {}",
                path.display(),
                i + 1,
                fields.len()
            )));
        }
        rows.push((i + 1, fields));
    }
    Ok(rows)
}

pub fn maybe_preprocess(s: Spectrum, skip: bool, tol: f64) -> CliResult<Spectrum> {
    if skip {
        Ok(s)
    } else {
        Ok(preprocess(&s, tol)?)
    }
}

pub const TOLERANCE: f64 = DEFAULT_TOLERANCE;

/// Writes through a temporary file in the target directory and renames it
/// into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> CliResult<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let fail = |e: &dyn std::fmt::Display| CliError::Data(format!("{}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| fail(&e))?;
    tmp.write_all(contents).map_err(|e| fail(&e))?;
    tmp.flush().map_err(|e| fail(&e))?;
    tmp.persist(path).map_err(|e| fail(&e.error))?;
    Ok(())
}

/// `dir/stem.suffix` next to `path`.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}"))
}
