//! Road networks from OpenStreetMap XML extracts.
//!
//! Only `node`, `way`, `nd` and `tag` elements are read. Consecutive nodes
//! of a retained way become directed edges in both directions, or one
//! direction when the way is tagged `oneway`. Vertices are the nodes that
//! end up incident to an edge, indexed in ascending OSM id order, so the
//! same input always yields the same graph.

use crate::geo::{haversine, BBox};
use crate::IngestError;
use quick_xml::events::{BytesStart, Event};
use quick_xml::{Reader, XmlVersion};
use roadmarkov::road_graph::{Digraph, RoadNetwork, RoadNetworkBuilder};
use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::BufRead;

/// Highway classes open to general motor traffic.
pub const DEFAULT_HIGHWAYS: [&str; 14] = [
    "motorway",
    "trunk",
    "primary",
    "secondary",
    "tertiary",
    "residential",
    "unclassified",
    "living_street",
    "service",
    "motorway_link",
    "trunk_link",
    "primary_link",
    "secondary_link",
    "tertiary_link",
];

#[derive(Clone, Debug)]
pub struct OsmOptions {
    pub bbox: Option<BBox>,
    pub highways: BTreeSet<String>,
}

impl Default for OsmOptions {
    fn default() -> Self {
        Self { bbox: None, highways: DEFAULT_HIGHWAYS.iter().map(|s| s.to_string()).collect() }
    }
}

/// Counts of what was read and what was left out.
#[derive(Clone, Debug, Default, PartialEq, Eq, serde::Serialize)]
pub struct OsmSummary {
    pub nodes_read: usize,
    pub ways_read: usize,
    pub ways_kept: usize,
    /// Consecutive pairs naming a node absent from the file.
    pub missing_node_refs: usize,
    /// Consecutive pairs with an endpoint outside the bounding box.
    pub outside_bbox_pairs: usize,
    /// Directed pairs already produced by an earlier way.
    pub duplicate_edges: usize,
}

/// A parsed road network with the street name of every edge.
#[derive(Clone, Debug)]
pub struct OsmGraphBundle {
    /// External ids are OSM node ids; coordinates and lengths in meters
    /// are always present.
    pub network: RoadNetwork,
    /// Indexed like `network.edges()`.
    pub way_names: Vec<Option<String>>,
    pub summary: OsmSummary,
}

impl OsmGraphBundle {
    pub fn osm_id(&self, v: usize) -> u64 {
        self.network.external_id(v)
    }

    pub fn vertex_of(&self, osm_id: u64) -> Option<usize> {
        self.network.index_of(osm_id)
    }

    /// Squared great-circle length of edge `e`, the routing weight.
    pub fn squared_weight(&self, e: usize) -> f64 {
        let l = self.network.lengths().expect("OSM graphs carry lengths")[e];
        l * l
    }
}

enum Direction {
    Both,
    Forward,
    Reverse,
}

#[derive(Default)]
struct Way {
    refs: Vec<u64>,
    highway: Option<String>,
    oneway: Option<String>,
    name: Option<String>,
}

fn attr(e: &BytesStart, key: &str) -> Result<Option<String>, String> {
    for a in e.attributes() {
        let a = a.map_err(|err| err.to_string())?;
        if a.key.as_ref() == key {
            let v = a.normalized_value(XmlVersion::Implicit1_0).map_err(|err| err.to_string())?;
            return Ok(Some(v.into_owned()));
        }
    }
    Ok(None)
}

fn required<T: std::str::FromStr>(e: &BytesStart, key: &str) -> Result<T, String> {
    let raw = attr(e, key)?.ok_or_else(|| format!("missing attribute {key}"))?;
    raw.parse().map_err(|_| format!("bad {key} value {raw:?}"))
}

pub fn parse_osm<R: BufRead>(source: R, opts: &OsmOptions) -> Result<OsmGraphBundle, IngestError> {
    let mut reader = Reader::from_reader(source);
    reader.config_mut().trim_text(true);
    let mut buf = Vec::new();
    let mut nodes: HashMap<u64, (f64, f64)> = HashMap::new();
    let mut ways: Vec<Way> = Vec::new();
    let mut current: Option<Way> = None;
    let mut depth = 0usize;
    let mut summary = OsmSummary::default();
    loop {
        let pos = reader.buffer_position();
        let malformed = |msg: String| IngestError::MalformedXml { position: pos, msg };
        let event = reader.read_event_into(&mut buf).map_err(|e| malformed(e.to_string()))?;
        let (e, empty) = match &event {
            Event::Start(e) => (e, false),
            Event::Empty(e) => (e, true),
            Event::End(e) => {
                depth -= 1;
                if e.name().as_ref() == "way" {
                    ways.extend(current.take());
                }
                buf.clear();
                continue;
            }
            Event::Eof => break,
            _ => {
                buf.clear();
                continue;
            }
        };
        if !empty {
            depth += 1;
        }
        match e.name().as_ref() {
            "node" => {
                let id: u64 = required(e, "id").map_err(malformed)?;
                let lat: f64 = required(e, "lat").map_err(malformed)?;
                let lon: f64 = required(e, "lon").map_err(malformed)?;
                summary.nodes_read += 1;
                nodes.entry(id).or_insert((lat, lon));
            }
            "way" => {
                summary.ways_read += 1;
                let way = Way::default();
                if empty {
                    ways.push(way);
                } else {
                    current = Some(way);
                }
            }
            "nd" => {
                if let Some(w) = current.as_mut() {
                    w.refs.push(required(e, "ref").map_err(malformed)?);
                }
            }
            "tag" => {
                if let Some(w) = current.as_mut() {
                    let k = attr(e, "k").map_err(malformed)?;
                    let v = attr(e, "v").map_err(malformed)?;
                    match (k.as_deref(), v) {
                        (Some("highway"), v) => w.highway = v,
                        (Some("oneway"), v) => w.oneway = v,
                        (Some("name"), v) => w.name = v,
                        _ => {}
                    }
                }
            }
            _ => {}
        }
        buf.clear();
    }
    if depth != 0 {
        return Err(IngestError::MalformedXml { position: reader.buffer_position(), msg: "unexpected end of document".into() });
    }

    let mut edges: BTreeMap<(u64, u64), Option<String>> = BTreeMap::new();
    for w in &ways {
        let keep = w.highway.as_ref().is_some_and(|h| opts.highways.contains(h));
        if !keep {
            continue;
        }
        summary.ways_kept += 1;
        let dir = match w.oneway.as_deref() {
            Some("yes" | "true" | "1") => Direction::Forward,
            Some("-1" | "reverse") => Direction::Reverse,
            _ => Direction::Both,
        };
        for pair in w.refs.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            if a == b {
                continue;
            }
            let (Some(pa), Some(pb)) = (nodes.get(&a), nodes.get(&b)) else {
                summary.missing_node_refs += 1;
                continue;
            };
            if let Some(bb) = &opts.bbox {
                if !bb.contains(pa.0, pa.1) || !bb.contains(pb.0, pb.1) {
                    summary.outside_bbox_pairs += 1;
                    continue;
                }
            }
            let arcs: &[(u64, u64)] = match dir {
                Direction::Both => &[(a, b), (b, a)],
                Direction::Forward => &[(a, b)],
                Direction::Reverse => &[(b, a)],
            };
            for &arc in arcs {
                match edges.entry(arc) {
                    Entry::Occupied(_) => summary.duplicate_edges += 1,
                    Entry::Vacant(slot) => {
                        slot.insert(w.name.clone());
                    }
                }
            }
        }
    }
    if edges.is_empty() {
        return Err(IngestError::EmptyResult);
    }

    let ids: BTreeSet<u64> = edges.keys().flat_map(|&(a, b)| [a, b]).collect();
    let mut builder = RoadNetworkBuilder::new();
    for &id in &ids {
        let (lat, lon) = nodes[&id];
        builder.vertex_at(id, lat, lon)?;
    }
    for &(a, b) in edges.keys() {
        builder.edge_with_length(a, b, haversine(nodes[&a], nodes[&b]))?;
    }
    let network = builder.build()?;
    let mut way_names = vec![None; network.edge_count()];
    for ((a, b), name) in edges {
        let (u, v) = (network.index_of(a).unwrap(), network.index_of(b).unwrap());
        way_names[network.edge_index(u, v).unwrap()] = name;
    }
    debug_assert_eq!(network.vertex_count(), ids.len());
    Ok(OsmGraphBundle { network, way_names, summary })
}

pub fn parse_osm_str(xml: &str, opts: &OsmOptions) -> Result<OsmGraphBundle, IngestError> {
    parse_osm(xml.as_bytes(), opts)
}

/// `u,v,name` with OSM ids; unnamed edges get an empty name.
pub fn way_names_csv(g: &RoadNetwork, names: &[Option<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["u", "v", "name"]).unwrap();
    for (i, &(u, v)) in g.edges().iter().enumerate() {
        let name = names[i].as_deref().unwrap_or("");
        w.write_record([g.external_id(u).to_string(), g.external_id(v).to_string(), name.to_string()]).unwrap();
    }
    String::from_utf8(w.into_inner().unwrap()).unwrap()
}

/// Reads the table written by [`way_names_csv`], aligned with `g.edges()`.
/// Rows for edges missing from `g` are ignored.
pub fn read_way_names<R: std::io::Read>(r: R, g: &RoadNetwork) -> Result<Vec<Option<String>>, IngestError> {
    let mut names = vec![None; g.edge_count()];
    let mut rd = csv::Reader::from_reader(r);
    for rec in rd.records() {
        let rec = rec?;
        let parse = |i: usize| rec.get(i).and_then(|s| s.parse::<u64>().ok());
        let (Some(a), Some(b)) = (parse(0), parse(1)) else {
            return Err(IngestError::MissingColumn("u,v"));
        };
        let name = rec.get(2).filter(|s| !s.is_empty()).map(str::to_string);
        if let (Some(u), Some(v)) = (g.index_of(a), g.index_of(b)) {
            if let Some(e) = g.edge_index(u, v) {
                names[e] = name;
            }
        }
    }
    Ok(names)
}

/// Street groups for per-street counting: each vertex takes the name of
/// its first named outgoing edge, then of its first named incoming edge;
/// vertices with neither share the unnamed group `""`. Returns the group
/// labels and the group index of every vertex.
pub fn street_groups(g: &RoadNetwork, names: &[Option<String>]) -> (Vec<String>, Vec<usize>) {
    let mut incoming: Vec<Option<&str>> = vec![None; g.vertex_count()];
    for (i, &(_, v)) in g.edges().iter().enumerate() {
        if incoming[v].is_none() {
            incoming[v] = names[i].as_deref();
        }
    }
    let mut labels: BTreeMap<&str, usize> = BTreeMap::new();
    let chosen: Vec<&str> = (0..g.vertex_count())
        .map(|v| g.out_edge_range(v).find_map(|e| names[e].as_deref()).or(incoming[v]).unwrap_or(""))
        .collect();
    for &c in &chosen {
        labels.entry(c).or_insert(0);
    }
    for (i, slot) in labels.values_mut().enumerate() {
        *slot = i;
    }
    let group = chosen.iter().map(|c| labels[c]).collect();
    (labels.keys().map(|s| s.to_string()).collect(), group)
}
