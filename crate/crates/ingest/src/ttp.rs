//! Taxi trajectories in the Porto TTP CSV layout.
//!
//! Each row has a `TIMESTAMP` (departure, Unix seconds), a `MISSING_DATA`
//! flag and a `POLYLINE` holding `[[lon,lat],...]` sampled every 15 s.
//! Rows that are incomplete, depart outside the time window, leave the
//! bounding box or have fewer than two points are skipped with a
//! diagnostic.

use crate::geo::BBox;
use crate::IngestError;
use chrono::{DateTime, Datelike, NaiveDate, Timelike, Utc, Weekday};
use std::io::Read;

/// Daily window `[start, end)` in minutes after local midnight. A window
/// with `start > end` wraps past midnight.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TimeWindow {
    pub start_min: u32,
    pub end_min: u32,
}

impl TimeWindow {
    pub fn contains(&self, minute: u32) -> bool {
        if self.start_min <= self.end_min {
            (self.start_min..self.end_min).contains(&minute)
        } else {
            minute >= self.start_min || minute < self.end_min
        }
    }
}

fn parse_hhmm(s: &str) -> Result<u32, String> {
    let (h, m) = s.trim().split_once(':').ok_or_else(|| format!("expected hh:mm, found {s:?}"))?;
    let h: u32 = h.parse().map_err(|_| format!("bad hour in {s:?}"))?;
    let m: u32 = m.parse().map_err(|_| format!("bad minute in {s:?}"))?;
    if h > 24 || m > 59 || (h == 24 && m > 0) {
        return Err(format!("time out of range: {s:?}"));
    }
    Ok(h * 60 + m)
}

impl std::str::FromStr for TimeWindow {
    type Err = String;

    /// `hh:mm-hh:mm`.
    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s.split_once('-').ok_or_else(|| format!("expected hh:mm-hh:mm, found {s:?}"))?;
        Ok(Self { start_min: parse_hhmm(a)?, end_min: parse_hhmm(b)? })
    }
}

/// How departure timestamps are turned into local clock time.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Clock {
    /// Portugal mainland: UTC in winter, UTC+1 from the last Sunday of March
    /// to the last Sunday of October (switching at 01:00 UTC).
    #[default]
    Lisbon,
    Utc,
}

fn last_sunday(year: i32, month: u32) -> NaiveDate {
    let next = if month == 12 { NaiveDate::from_ymd_opt(year + 1, 1, 1) } else { NaiveDate::from_ymd_opt(year, month + 1, 1) };
    let mut d = next.unwrap().pred_opt().unwrap();
    while d.weekday() != Weekday::Sun {
        d = d.pred_opt().unwrap();
    }
    d
}

impl Clock {
    /// Offset from UTC in seconds at the instant `epoch`.
    pub fn offset(self, epoch: i64) -> i64 {
        match self {
            Clock::Utc => 0,
            Clock::Lisbon => {
                let Some(t) = DateTime::<Utc>::from_timestamp(epoch, 0) else { return 0 };
                let y = t.year();
                let switch = |m| last_sunday(y, m).and_hms_opt(1, 0, 0).unwrap().and_utc();
                if t >= switch(3) && t < switch(10) {
                    3600
                } else {
                    0
                }
            }
        }
    }

    /// Minutes after local midnight.
    pub fn minute_of_day(self, epoch: i64) -> Option<u32> {
        let t = DateTime::<Utc>::from_timestamp(epoch + self.offset(epoch), 0)?;
        Some(t.hour() * 60 + t.minute())
    }
}

#[derive(Clone, Debug, Default)]
pub struct TtpOptions {
    pub bbox: Option<BBox>,
    pub window: Option<TimeWindow>,
    pub clock: Clock,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RawTrajectory {
    pub trip_id: String,
    /// `(lon, lat)` in degrees.
    pub points: Vec<(f64, f64)>,
    /// Unix seconds.
    pub departure: i64,
    pub complete: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DropReason {
    MissingData,
    OutsideWindow,
    OutsideBbox,
    TooFewPoints,
    Malformed,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct RowDiagnostic {
    /// 1-based data row (the header is row 0).
    pub row: usize,
    pub reason: DropReason,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Clone, Debug, Default)]
pub struct TtpResult {
    pub trajectories: Vec<RawTrajectory>,
    pub diagnostics: Vec<RowDiagnostic>,
    pub rows: usize,
}

impl TtpResult {
    pub fn dropped(&self, reason: DropReason) -> usize {
        self.diagnostics.iter().filter(|d| d.reason == reason).count()
    }
}

fn column(headers: &csv::StringRecord, name: &'static str) -> Result<usize, IngestError> {
    headers.iter().position(|h| h.trim() == name).ok_or(IngestError::MissingColumn(name))
}

pub fn parse_ttp<R: Read>(source: R, opts: &TtpOptions) -> Result<TtpResult, IngestError> {
    let mut rd = csv::ReaderBuilder::new().flexible(true).from_reader(source);
    let headers = rd.headers()?.clone();
    let trip_col = column(&headers, "TRIP_ID")?;
    let time_col = column(&headers, "TIMESTAMP")?;
    let missing_col = column(&headers, "MISSING_DATA")?;
    let poly_col = column(&headers, "POLYLINE")?;
    let mut out = TtpResult::default();
    for (i, rec) in rd.records().enumerate() {
        let row = i + 1;
        out.rows += 1;
        let mut drop = |reason, detail: Option<String>| out.diagnostics.push(RowDiagnostic { row, reason, detail });
        let rec = match rec {
            Ok(r) => r,
            Err(e) => {
                drop(DropReason::Malformed, Some(e.to_string()));
                continue;
            }
        };
        let field = |c: usize| rec.get(c).unwrap_or("").trim();
        let complete = match field(missing_col).to_ascii_lowercase().as_str() {
            "false" | "0" => true,
            "true" | "1" => false,
            other => {
                drop(DropReason::Malformed, Some(format!("MISSING_DATA = {other:?}")));
                continue;
            }
        };
        if !complete {
            drop(DropReason::MissingData, None);
            continue;
        }
        let departure: i64 = match field(time_col).parse() {
            Ok(t) => t,
            Err(_) => {
                drop(DropReason::Malformed, Some(format!("TIMESTAMP = {:?}", field(time_col))));
                continue;
            }
        };
        if let Some(w) = &opts.window {
            if !opts.clock.minute_of_day(departure).is_some_and(|m| w.contains(m)) {
                drop(DropReason::OutsideWindow, None);
                continue;
            }
        }
        let points: Vec<[f64; 2]> = match serde_json::from_str(field(poly_col)) {
            Ok(p) => p,
            Err(e) => {
                drop(DropReason::Malformed, Some(format!("POLYLINE: {e}")));
                continue;
            }
        };
        if points.len() < 2 {
            drop(DropReason::TooFewPoints, None);
            continue;
        }
        if let Some(b) = &opts.bbox {
            if points.iter().any(|&[lon, lat]| !b.contains(lat, lon)) {
                drop(DropReason::OutsideBbox, None);
                continue;
            }
        }
        out.trajectories.push(RawTrajectory {
            trip_id: field(trip_col).to_string(),
            points: points.into_iter().map(|[lon, lat]| (lon, lat)).collect(),
            departure,
            complete,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "\"TRIP_ID\",\"CALL_TYPE\",\"ORIGIN_CALL\",\"ORIGIN_STAND\",\"TAXI_ID\",\"TIMESTAMP\",\"DAY_TYPE\",\"MISSING_DATA\",\"POLYLINE\"\n";

    fn row(id: &str, ts: i64, missing: &str, poly: &str) -> String {
        format!("\"{id}\",\"C\",\"\",\"\",\"20000589\",\"{ts}\",\"A\",\"{missing}\",\"{poly}\"\n")
    }

    // 2013-07-01 07:30:00 UTC = 08:30 in Lisbon (summer time)
    const SUMMER_0830: i64 = 1_372_663_800;
    // 2014-01-15 08:30:00 UTC = 08:30 in Lisbon (winter time)
    const WINTER_0830: i64 = 1_389_774_600;

    fn opts() -> TtpOptions {
        TtpOptions { bbox: Some(BBox::porto()), window: Some("08:00-09:00".parse().unwrap()), clock: Clock::Lisbon }
    }

    const FIVE: &str = "[[-8.61,41.14],[-8.611,41.141],[-8.612,41.142],[-8.613,41.143],[-8.614,41.144]]";

    #[test]
    fn lisbon_clock() {
        assert_eq!(Clock::Lisbon.minute_of_day(SUMMER_0830), Some(510));
        assert_eq!(Clock::Lisbon.minute_of_day(WINTER_0830), Some(510));
        assert_eq!(Clock::Utc.minute_of_day(SUMMER_0830), Some(450));
        // 2013 switches: 31 March and 27 October at 01:00 UTC
        assert_eq!(last_sunday(2013, 3), NaiveDate::from_ymd_opt(2013, 3, 31).unwrap());
        assert_eq!(last_sunday(2013, 10), NaiveDate::from_ymd_opt(2013, 10, 27).unwrap());
        let switch = 1_364_691_600; // 2013-03-31 01:00 UTC
        assert_eq!(Clock::Lisbon.offset(switch - 1), 0);
        assert_eq!(Clock::Lisbon.offset(switch), 3600);
    }

    #[test]
    fn filters() {
        let csv = [
            HEADER.to_string(),
            row("keep", SUMMER_0830, "False", FIVE),
            row("incomplete", SUMMER_0830, "True", FIVE),
            row("late", SUMMER_0830 + 3600, "False", FIVE),
            row("away", WINTER_0830, "False", "[[-8.61,41.14],[-8.0,41.14]]"),
            row("short", WINTER_0830, "False", "[]"),
            row("broken", WINTER_0830, "False", "[[-8.61,41.14"),
        ]
        .concat();
        let r = parse_ttp(csv.as_bytes(), &opts()).unwrap();
        assert_eq!(r.rows, 6);
        assert_eq!(r.trajectories.len(), 1);
        let t = &r.trajectories[0];
        assert_eq!((t.trip_id.as_str(), t.points.len(), t.departure), ("keep", 5, SUMMER_0830));
        assert_eq!(t.points[0], (-8.61, 41.14));
        for reason in [DropReason::MissingData, DropReason::OutsideWindow, DropReason::OutsideBbox, DropReason::TooFewPoints, DropReason::Malformed] {
            assert_eq!(r.dropped(reason), 1, "{reason:?}");
        }
    }

    #[test]
    fn missing_column() {
        let r = parse_ttp("TRIP_ID,TIMESTAMP\n1,2\n".as_bytes(), &TtpOptions::default());
        assert!(matches!(r, Err(IngestError::MissingColumn("MISSING_DATA"))));
    }

    #[test]
    fn window_parsing_and_wrap() {
        let w: TimeWindow = "22:30-01:00".parse().unwrap();
        assert!(w.contains(23 * 60) && w.contains(30) && !w.contains(60) && !w.contains(600));
        assert!("8-9".parse::<TimeWindow>().is_err());
        assert!("08:00-25:00".parse::<TimeWindow>().is_err());
    }
}
