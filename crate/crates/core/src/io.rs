//! File helpers shared by the command-line tool and the C interface.

use std::io::Write;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::corpus::{parse_corpus, parse_released, Corpus, CorpusError, Format, ReleasedOptions, SplitTag};

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Corpus {
        path: PathBuf,
        #[source]
        source: CorpusError,
    },
}

pub fn read_file(path: &Path) -> Result<Vec<u8>, LoadError> {
    std::fs::read(path).map_err(|e| LoadError::Io { path: path.to_path_buf(), message: e.to_string() })
}

/// Writes `bytes` to a temporary file next to `path`, then renames it over
/// `path`, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn is_released(bytes: &[u8], format: Format) -> bool {
    match format {
        Format::Released => true,
        Format::Canonical => false,
        Format::Auto => bytes.iter().find(|b| !b.is_ascii_whitespace()) == Some(&b'['),
    }
}

/// Loads a corpus file. Released-layout files get dialogue ids
/// `{stem}-{position}` and, when the stem is `train`, `dev` or `test`, that
/// split tag.
pub fn load_corpus(path: &Path, format: Format) -> Result<Corpus, LoadError> {
    let bytes = read_file(path)?;
    let parsed = if is_released(&bytes, format) {
        let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let opts = ReleasedOptions { id_prefix: format!("{stem}-"), split: stem.parse::<SplitTag>().ok() };
        parse_released(&bytes, &opts)
    } else {
        parse_corpus(&bytes, Format::Canonical)
    };
    parsed.map_err(|source| LoadError::Corpus { path: path.to_path_buf(), source })
}
