//! Reading MovieLens-format files from disk.

use std::fs;
use std::path::{Path, PathBuf};

use platoon_cache_core::catalog::{Dataset, DatasetError};
use platoon_cache_core::config::SimConfig;

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

/// The files are Latin-1 in the original release; invalid UTF-8 is
/// replaced rather than rejected since only titles are affected.
fn read_lossy(path: &Path) -> Result<String, LoadError> {
    let bytes = fs::read(path).map_err(|source| LoadError::Io { path: path.to_owned(), source })?;
    Ok(String::from_utf8_lossy(&bytes).into_owned())
}

/// Loads the three files named in `config`, without truncation.
pub fn load_dataset(config: &SimConfig) -> Result<Dataset, LoadError> {
    let users = read_lossy(Path::new(&config.users_path))?;
    let movies = read_lossy(Path::new(&config.movies_path))?;
    let ratings = read_lossy(Path::new(&config.ratings_path))?;
    Ok(Dataset::parse(&users, &movies, &ratings, config.s_bytes)?)
}
