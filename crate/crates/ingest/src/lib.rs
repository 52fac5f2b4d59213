//! Ingestion for `roadmarkov`: road networks from OpenStreetMap XML and
//! vertex-level trajectories from GPS traces.
//!
//! The pipeline is [`osm::parse_osm`] for the graph, [`ttp::parse_ttp`] for
//! the raw traces, then [`matching::Matcher`] to snap each trace to its
//! nearest vertices and fill gaps with shortest paths. Traces whose gaps
//! cannot be routed are cut into pieces.

pub mod geo;
pub mod matching;
pub mod osm;
pub mod stats;
pub mod ttp;

pub use geo::{haversine, BBox};
pub use matching::{MatchOptions, MatchedTrajectory, Matcher, WeightMode};
pub use osm::{parse_osm, OsmGraphBundle, OsmOptions};
pub use stats::{corpus_stats, CorpusStats};
pub use ttp::{parse_ttp, RawTrajectory, TimeWindow, TtpOptions};

use roadmarkov::road_graph::GraphError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("malformed XML near byte {position}: {msg}")]
    MalformedXml { position: u64, msg: String },
    #[error("no road edges left after filtering")]
    EmptyResult,
    #[error("missing column {0}")]
    MissingColumn(&'static str),
    #[error("no GPS point lies within the snap radius of a vertex")]
    NoUsablePoints,
    #[error("graph has no coordinates or edge lengths")]
    MissingGeometry,
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
