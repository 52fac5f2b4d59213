//! One module per subcommand, plus shared file helpers.

pub mod benchmark;
pub mod build_graph;
pub mod estimate;
pub mod matching;
pub mod simulate;
pub mod stats;
pub mod toy;

use crate::error::{Classify, CliError};
use roadmarkov::estimate::corpus::{read_corpus, Corpus};
use roadmarkov::road_graph::text::read_graph;
use roadmarkov::road_graph::RoadNetwork;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

pub(crate) fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path).map(BufReader::new).input_at(path)
}

pub(crate) fn load_graph(path: &Path) -> Result<RoadNetwork, CliError> {
    read_graph(open(path)?).input_at(path)
}

pub(crate) fn load_corpus(path: &Path, g: &RoadNetwork) -> Result<Corpus, CliError> {
    read_corpus(open(path)?, g).input_at(path)
}

/// Creates `dir` if needed and returns it.
pub(crate) fn out_dir(dir: &Path) -> Result<&Path, CliError> {
    std::fs::create_dir_all(dir).input_at(dir)?;
    Ok(dir)
}

pub(crate) fn write(path: PathBuf, contents: impl AsRef<[u8]>) -> Result<PathBuf, CliError> {
    std::fs::write(&path, contents).input_at(&path)?;
    Ok(path)
}

pub(crate) fn display(paths: &[PathBuf]) -> Vec<String> {
    paths.iter().map(|p| p.display().to_string()).collect()
}
