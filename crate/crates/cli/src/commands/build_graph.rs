use super::{display, load_graph, open, out_dir, write};
use crate::error::{usage, Classify, CliError};
use crate::Outcome;
use clap::{ArgGroup, Args};
use roadmarkov::road_graph::text::graph_to_string;
use roadmarkov::road_graph::{degree_histograms, is_strongly_connected, largest_strong_component, Digraph};
use roadmarkov_ingest::osm::{read_way_names, way_names_csv, DEFAULT_HIGHWAYS};
use roadmarkov_ingest::{parse_osm, BBox, IngestError, OsmOptions};
use serde_json::json;
use std::path::PathBuf;

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("source").required(true).args(["osm", "graph"])))]
pub struct BuildGraphArgs {
    /// OpenStreetMap XML extract.
    #[arg(long, value_name = "FILE")]
    pub osm: Option<PathBuf>,
    /// Existing graph file (skips OSM parsing).
    #[arg(long, value_name = "FILE")]
    pub graph: Option<PathBuf>,
    /// `min_lon,min_lat,max_lon,max_lat`; OSM input only.
    #[arg(long, requires = "osm", allow_hyphen_values = true)]
    pub bbox: Option<BBox>,
    /// Highway classes to keep (comma separated); OSM input only.
    #[arg(long, value_delimiter = ',', requires = "osm")]
    pub highways: Vec<String>,
    /// Keep only the largest strongly connected component.
    #[arg(long)]
    pub scc: bool,
    #[arg(long, default_value = ".", value_name = "DIR")]
    pub out: PathBuf,
}

pub fn run(a: &BuildGraphArgs) -> Result<Outcome, CliError> {
    let (mut g, names_csv, osm_summary) = match (&a.osm, &a.graph) {
        (Some(path), None) => {
            let highways = if a.highways.is_empty() {
                DEFAULT_HIGHWAYS.iter().map(|s| s.to_string()).collect()
            } else {
                a.highways.iter().cloned().collect()
            };
            let opts = OsmOptions { bbox: a.bbox, highways };
            let b = match parse_osm(open(path)?, &opts) {
                Ok(b) => b,
                Err(IngestError::EmptyResult) => {
                    return Err(CliError::Input(format!("{}: no road edges left after filtering", path.display())))
                }
                Err(e) => return Err(e).input_at(path),
            };
            let csv = way_names_csv(&b.network, &b.way_names);
            (b.network, Some(csv), Some(b.summary))
        }
        (None, Some(path)) => (load_graph(path)?, None, None),
        _ => return Err(usage("give exactly one of --osm and --graph")),
    };
    let full = (g.vertex_count(), g.edge_count());
    if a.scc {
        g = largest_strong_component(&g).input()?;
    }

    let dir = out_dir(&a.out)?;
    let mut files = vec![write(dir.join("graph.txt"), graph_to_string(&g))?];
    let hist = degree_histograms(&g);
    for h in hist.all() {
        files.push(write(dir.join(format!("degree-{}.csv", h.kind.name())), h.to_csv())?);
    }
    if let Some(csv) = names_csv {
        // realign with the kept edges
        let names = read_way_names(csv.as_bytes(), &g).internal()?;
        files.push(write(dir.join("way_names.csv"), way_names_csv(&g, &names))?);
    }

    let sc = is_strongly_connected(&g);
    let summary = json!({
        "vertices": g.vertex_count(),
        "edges": g.edge_count(),
        "strongly_connected": sc,
        "before_scc": a.scc.then(|| json!({ "vertices": full.0, "edges": full.1 })),
        "osm": osm_summary,
        "degree_histograms": hist,
        "files": display(&files),
    });
    let mut text = format!("{} vertices, {} edges", g.vertex_count(), g.edge_count());
    if a.scc {
        text += &format!(" (largest strong component of {} / {})", full.0, full.1);
    }
    text += if sc { ", strongly connected\n" } else { ", not strongly connected\n" };
    for f in &files {
        text += &format!("wrote {}\n", f.display());
    }
    Ok(Outcome::ok(summary, text))
}
