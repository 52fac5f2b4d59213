//! Great-circle distances, bounding boxes and a grid index for nearest-node
//! lookup.

use std::collections::HashMap;

/// Mean Earth radius in meters.
pub const EARTH_RADIUS_M: f64 = 6_371_008.8;

/// Meters per degree of latitude on the mean sphere.
const M_PER_DEG: f64 = EARTH_RADIUS_M * std::f64::consts::PI / 180.0;

/// Haversine distance in meters between two `(lat, lon)` points in degrees.
pub fn haversine(a: (f64, f64), b: (f64, f64)) -> f64 {
    let (lat1, lat2) = (a.0.to_radians(), b.0.to_radians());
    let dlat = lat2 - lat1;
    let dlon = (b.1 - a.1).to_radians();
    let h = (dlat / 2.0).sin().powi(2) + lat1.cos() * lat2.cos() * (dlon / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_M * h.sqrt().min(1.0).asin()
}

/// Longitude/latitude rectangle, bounds inclusive.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BBox {
    pub min_lon: f64,
    pub min_lat: f64,
    pub max_lon: f64,
    pub max_lat: f64,
}

impl BBox {
    pub fn new(min_lon: f64, min_lat: f64, max_lon: f64, max_lat: f64) -> Self {
        Self { min_lon, min_lat, max_lon, max_lat }
    }

    /// The Porto window used for the taxi study.
    pub fn porto() -> Self {
        Self::new(-8.6518, 41.1129, -8.5771, 41.1756)
    }

    pub fn contains(&self, lat: f64, lon: f64) -> bool {
        (self.min_lat..=self.max_lat).contains(&lat) && (self.min_lon..=self.max_lon).contains(&lon)
    }
}

impl std::str::FromStr for BBox {
    type Err = String;

    /// `min_lon,min_lat,max_lon,max_lat`.
    fn from_str(s: &str) -> Result<Self, String> {
        let v: Vec<f64> = s
            .split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|e| format!("bad bbox value {t:?}: {e}")))
            .collect::<Result<_, _>>()?;
        match v[..] {
            [a, b, c, d] if a <= c && b <= d => Ok(Self::new(a, b, c, d)),
            [_, _, _, _] => Err("bbox minimum exceeds maximum".into()),
            _ => Err("bbox needs four comma-separated numbers".into()),
        }
    }
}

/// Uniform lat/lon grid over a point set.
#[derive(Clone, Debug)]
pub struct GridIndex {
    cell_deg: f64,
    cells: HashMap<(i64, i64), Vec<usize>>,
    points: Vec<(f64, f64)>,
    keys: Vec<u64>,
}

impl GridIndex {
    /// `points` are `(lat, lon)`; `keys` break distance ties (lowest wins).
    pub fn new(points: Vec<(f64, f64)>, keys: Vec<u64>, cell_m: f64) -> Self {
        assert_eq!(points.len(), keys.len());
        let cell_deg = cell_m / M_PER_DEG;
        let mut cells: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        for (i, &(lat, lon)) in points.iter().enumerate() {
            cells.entry(Self::cell(cell_deg, lat, lon)).or_default().push(i);
        }
        Self { cell_deg, cells, points, keys }
    }

    fn cell(size: f64, lat: f64, lon: f64) -> (i64, i64) {
        ((lat / size).floor() as i64, (lon / size).floor() as i64)
    }

    /// Closest point within `radius_m`, as `(index, meters)`.
    pub fn nearest(&self, lat: f64, lon: f64, radius_m: f64) -> Option<(usize, f64)> {
        let dlat = radius_m / M_PER_DEG;
        // longitude degrees shrink with cos(lat); guard the poles
        let dlon = dlat / lat.to_radians().cos().max(1e-6);
        let (r0, c0) = Self::cell(self.cell_deg, lat - dlat, lon - dlon);
        let (r1, c1) = Self::cell(self.cell_deg, lat + dlat, lon + dlon);
        let mut best: Option<(usize, f64)> = None;
        for r in r0..=r1 {
            for c in c0..=c1 {
                for &i in self.cells.get(&(r, c)).into_iter().flatten() {
                    let d = haversine((lat, lon), self.points[i]);
                    if d > radius_m {
                        continue;
                    }
                    let better = match best {
                        None => true,
                        Some((j, bd)) => d < bd || (d == bd && self.keys[i] < self.keys[j]),
                    };
                    if better {
                        best = Some((i, d));
                    }
                }
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn haversine_known_distances() {
        // one degree of latitude
        assert!((haversine((41.0, -8.6), (42.0, -8.6)) - 111_195.08).abs() < 0.1);
        assert_eq!(haversine((41.1, -8.6), (41.1, -8.6)), 0.0);
        let (a, b) = ((41.1496, -8.6109), (41.1579, -8.6291));
        let d = haversine(a, b);
        assert_eq!(d, haversine(b, a));
        // equirectangular approximation is good to well under 0.1% at city scale
        let x = (b.1 - a.1) * (41.15f64).to_radians().cos() * M_PER_DEG;
        let y = (b.0 - a.0) * M_PER_DEG;
        assert!((d - x.hypot(y)).abs() / d < 1e-3);
    }

    #[test]
    fn bbox_parse_and_contains() {
        let b: BBox = "-8.6518,41.1129,-8.5771,41.1756".parse().unwrap();
        assert_eq!(b, BBox::porto());
        assert!(b.contains(41.15, -8.6));
        assert!(!b.contains(41.2, -8.6));
        assert!("1,2,3".parse::<BBox>().is_err());
        assert!("3,2,1,4".parse::<BBox>().is_err());
    }

    #[test]
    fn nearest_with_ties_and_radius() {
        let pts = vec![(41.0, -8.0), (41.0, -8.002), (41.0, -7.998)];
        let idx = GridIndex::new(pts, vec![30, 20, 10], 100.0);
        assert_eq!(idx.nearest(41.0, -8.0015, 500.0).map(|x| x.0), Some(1));
        let mid = idx.nearest(41.0, -8.0, 0.0).unwrap();
        assert_eq!(mid, (0, 0.0));
        assert!(idx.nearest(41.01, -8.0, 200.0).is_none());
    }

    #[test]
    fn equal_distance_goes_to_lower_key() {
        let idx = GridIndex::new(vec![(0.0, 0.001), (0.0, -0.001)], vec![9, 4], 50.0);
        assert_eq!(idx.nearest(0.0, 0.0, 1000.0).unwrap().0, 1);
    }
}
