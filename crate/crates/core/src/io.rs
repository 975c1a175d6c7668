//! Travel-record CSV ingestion, tumbling-window grouping, a synthetic
//! LPR-style data generator and atomic file output.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{NaiveDateTime, TimeDelta};
use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::distributions::{solve_params, Family};
use crate::error::{Error, Result};
use crate::lmoments::SampleSet;

const TIMESTAMP_FORMATS: [&str; 4] = [
    "%Y-%m-%dT%H:%M:%S%.f",
    "%Y-%m-%d %H:%M:%S%.f",
    "%Y-%m-%dT%H:%M",
    "%Y-%m-%d %H:%M",
];
const OUTPUT_TIMESTAMP_FORMAT: &str = "%Y-%m-%dT%H:%M:%S";

#[derive(Debug, Clone, PartialEq)]
pub struct TravelRecord {
    pub link_id: String,
    /// Local time, no zone.
    pub timestamp: NaiveDateTime,
    /// Seconds, > 0.
    pub travel_time: f64,
}

/// Column names and delimiter of the input CSV.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchemaOptions {
    pub link_column: String,
    pub timestamp_column: String,
    pub travel_time_column: String,
    pub delimiter: char,
}

impl Default for SchemaOptions {
    fn default() -> Self {
        Self {
            link_column: "link_id".into(),
            timestamp_column: "timestamp".into(),
            travel_time_column: "travel_time_seconds".into(),
            delimiter: ',',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reject {
    /// 1-based line number in the file (the header is line 1).
    pub line: u64,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct IngestReport {
    pub records: Vec<TravelRecord>,
    pub rejects: Vec<Reject>,
}

impl IngestReport {
    pub fn rows(&self) -> usize {
        self.records.len() + self.rejects.len()
    }
}

pub fn parse_timestamp(s: &str) -> Option<NaiveDateTime> {
    let s = s.trim();
    TIMESTAMP_FORMATS
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(s, f).ok())
}

/// Reads travel records. Malformed rows are collected as rejects with
/// their line numbers; a missing file or column is a configuration error.
pub fn ingest_csv(path: &Path, schema: &SchemaOptions) -> Result<IngestReport> {
    if !schema.delimiter.is_ascii() {
        return Err(Error::Config(format!(
            "delimiter {:?} must be a single ASCII character",
            schema.delimiter
        )));
    }
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(schema.delimiter as u8)
        .flexible(true)
        .from_path(path)
        .map_err(|e| Error::Config(format!("cannot open {}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| Error::Config(format!("cannot read header of {}: {e}", path.display())))?
        .clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::Config(format!("{} has no column {name:?}", path.display())))
    };
    let link_idx = column(&schema.link_column)?;
    let ts_idx = column(&schema.timestamp_column)?;
    let tt_idx = column(&schema.travel_time_column)?;

    let mut report = IngestReport::default();
    for row in reader.records() {
        let row = match row {
            Ok(r) => r,
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                report.rejects.push(Reject {
                    line,
                    reason: format!("malformed row: {e}"),
                });
                continue;
            }
        };
        let line = row.position().map_or(0, |p| p.line());
        match parse_row(&row, link_idx, ts_idx, tt_idx) {
            Ok(rec) => report.records.push(rec),
            Err(reason) => report.rejects.push(Reject { line, reason }),
        }
    }
    Ok(report)
}

fn parse_row(
    row: &csv::StringRecord,
    link_idx: usize,
    ts_idx: usize,
    tt_idx: usize,
) -> std::result::Result<TravelRecord, String> {
    let field = |i: usize, name: &str| row.get(i).ok_or_else(|| format!("missing {name}"));
    let link_id = field(link_idx, "link id")?.trim();
    if link_id.is_empty() {
        return Err("empty link id".into());
    }
    let raw_ts = field(ts_idx, "timestamp")?;
    let timestamp =
        parse_timestamp(raw_ts).ok_or_else(|| format!("unparseable timestamp {raw_ts:?}"))?;
    let raw_tt = field(tt_idx, "travel time")?;
    let travel_time: f64 = raw_tt
        .trim()
        .parse()
        .map_err(|_| format!("unparseable travel time {raw_tt:?}"))?;
    if !travel_time.is_finite() {
        return Err("non-finite travel time".into());
    }
    if travel_time <= 0.0 {
        return Err("non-positive travel time".into());
    }
    Ok(TravelRecord {
        link_id: link_id.to_string(),
        timestamp,
        travel_time,
    })
}

#[derive(Debug, Clone)]
pub struct WindowedSamples {
    pub link_id: String,
    /// Inclusive.
    pub window_start: NaiveDateTime,
    /// Exclusive.
    pub window_end: NaiveDateTime,
    pub sample: SampleSet,
}

#[derive(Debug, Clone, Default)]
pub struct WindowingReport {
    /// Ordered by link id, then window start.
    pub windows: Vec<WindowedSamples>,
    pub dropped_windows: usize,
    pub dropped_records: usize,
}

impl WindowingReport {
    pub fn windowed_records(&self) -> usize {
        self.windows.iter().map(|w| w.sample.len()).sum()
    }
}

/// Groups records into fixed-width tumbling windows per link, aligned to
/// midnight of 1970-01-01. Windows holding fewer than `min_samples`
/// records are dropped and counted.
pub fn window_group(
    records: &[TravelRecord],
    window_minutes: u32,
    min_samples: usize,
) -> Result<WindowingReport> {
    if window_minutes == 0 {
        return Err(Error::Config("window_minutes must be positive".into()));
    }
    let width = i64::from(window_minutes) * 60;
    let mut groups: BTreeMap<(&str, i64), Vec<f64>> = BTreeMap::new();
    for r in records {
        let slot = r.timestamp.and_utc().timestamp().div_euclid(width);
        groups
            .entry((r.link_id.as_str(), slot))
            .or_default()
            .push(r.travel_time);
    }
    let mut report = WindowingReport::default();
    for ((link, slot), values) in groups {
        if values.len() < min_samples {
            report.dropped_windows += 1;
            report.dropped_records += values.len();
            continue;
        }
        let start = chrono::DateTime::from_timestamp(slot * width, 0)
            .ok_or_else(|| Error::Config(format!("window start out of range for {link}")))?
            .naive_utc();
        report.windows.push(WindowedSamples {
            link_id: link.to_string(),
            window_start: start,
            window_end: start + TimeDelta::seconds(width),
            sample: SampleSet::new(values)?,
        });
    }
    Ok(report)
}

/// Parameters of the synthetic LPR-style dataset. Each window's travel
/// times are lognormal with a window-specific mean following a smooth
/// daily profile and a fixed CoV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticOptions {
    pub links: usize,
    pub windows_per_link: usize,
    pub records_per_window: usize,
    pub window_minutes: u32,
    pub base_mean: f64,
    /// Relative amplitude of the mean's daily swing.
    pub peak_amplitude: f64,
    pub cov: f64,
    pub start: String,
    pub seed: u64,
}

impl Default for SyntheticOptions {
    fn default() -> Self {
        Self {
            links: 4,
            windows_per_link: 40,
            records_per_window: 100,
            window_minutes: 15,
            base_mean: 167.0,
            peak_amplitude: 0.3,
            cov: 0.07,
            start: "2024-03-04T06:00:00".into(),
            seed: 20_240_304,
        }
    }
}

/// Writes a synthetic CSV with the default schema and returns the row count.
pub fn write_synthetic_lpr_csv(path: &Path, opts: &SyntheticOptions) -> Result<usize> {
    let start = parse_timestamp(&opts.start)
        .ok_or_else(|| Error::Config(format!("unparseable start {:?}", opts.start)))?;
    if opts.window_minutes == 0 || opts.records_per_window == 0 {
        return Err(Error::Config(
            "window_minutes and records_per_window must be positive".into(),
        ));
    }
    let width = f64::from(opts.window_minutes) * 60.0;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut wtr = csv::WriterBuilder::new().from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Csv {
        path: path.to_path_buf(),
        source: e,
    };
    wtr.write_record(["link_id", "timestamp", "travel_time_seconds"])
        .map_err(csv_err)?;
    let mut rows = 0;
    for link in 0..opts.links {
        let link_id = format!("L{:03}", link + 1);
        let link_scale = 1.0 + 0.1 * link as f64;
        for w in 0..opts.windows_per_link {
            let phase = 2.0 * std::f64::consts::PI * w as f64 / opts.windows_per_link as f64;
            let mean =
                opts.base_mean * link_scale * (1.0 + opts.peak_amplitude * phase.sin().powi(2));
            let spec = solve_params(Family::Lognormal, mean, opts.cov)?;
            let window_start = start + TimeDelta::seconds((w as f64 * width) as i64);
            let mut offsets: Vec<f64> = (0..opts.records_per_window)
                .map(|_| rng.sample::<f64, _>(Open01) * width)
                .collect();
            offsets.sort_by(f64::total_cmp);
            for offset in offsets {
                let u: f64 = rng.sample(Open01);
                let tt = spec.true_quantile(u)?;
                let ts = window_start + TimeDelta::milliseconds((offset * 1000.0) as i64);
                wtr.write_record([
                    link_id.clone(),
                    ts.format(OUTPUT_TIMESTAMP_FORMAT).to_string(),
                    format!("{tt:.3}"),
                ])
                .map_err(csv_err)?;
                rows += 1;
            }
        }
    }
    let bytes = wtr
        .into_inner()
        .map_err(|e| Error::Config(format!("csv buffer: {e}")))?;
    write_atomic(path, &bytes)?;
    Ok(rows)
}

/// Writes `bytes` to a temporary sibling file and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let name = path
        .file_name()
        .ok_or_else(|| Error::Config(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(
        ".{}.{}.tmp",
        name.to_string_lossy(),
        std::process::id()
    ));
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::io(path, e)
    })
}

/// Serializes rows to CSV bytes.
pub fn csv_bytes<S: Serialize>(rows: &[S], path: &Path) -> Result<Vec<u8>> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    for row in rows {
        wtr.serialize(row).map_err(|e| Error::Csv {
            path: path.to_path_buf(),
            source: e,
        })?;
    }
    wtr.into_inner()
        .map_err(|e| Error::Config(format!("csv buffer: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
        let p = dir.join(name);
        fs::write(&p, text).unwrap();
        p
    }

    fn ts(s: &str) -> NaiveDateTime {
        parse_timestamp(s).unwrap()
    }

    fn rec(link: &str, t: &str, v: f64) -> TravelRecord {
        TravelRecord {
            link_id: link.into(),
            timestamp: ts(t),
            travel_time: v,
        }
    }

    #[test]
    fn well_formed_rows() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            dir.path(),
            "a.csv",
            "link_id,timestamp,travel_time_seconds\n\
             A,2024-01-01T08:00:00,120.5\n\
             A,2024-01-01 08:01:00,130\n\
             B,2024-01-01T08:02:30.250,99\n",
        );
        let r = ingest_csv(&p, &SchemaOptions::default()).unwrap();
        assert_eq!(r.records.len(), 3);
        assert!(r.rejects.is_empty());
        assert_eq!(r.records[2].link_id, "B");
        assert_eq!(r.records[0].travel_time, 120.5);
    }

    #[test]
    fn bad_rows_are_rejected_with_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            dir.path(),
            "b.csv",
            "link_id,timestamp,travel_time_seconds\n\
             A,2024-01-01T08:00:00,-5\n\
             A,yesterday,10\n\
             ,2024-01-01T08:00:00,10\n\
             A,2024-01-01T08:00:00,abc\n\
             A,2024-01-01T08:00:00\n\
             A,2024-01-01T08:00:00,NaN\n\
             A,2024-01-01T08:00:00,0\n\
             A,2024-01-01T08:00:00,42\n",
        );
        let r = ingest_csv(&p, &SchemaOptions::default()).unwrap();
        assert_eq!(r.records.len(), 1);
        let lines: Vec<u64> = r.rejects.iter().map(|x| x.line).collect();
        assert_eq!(lines, vec![2, 3, 4, 5, 6, 7, 8]);
        assert_eq!(r.rejects[0].reason, "non-positive travel time");
        assert_eq!(r.rejects[6].reason, "non-positive travel time");
        assert!(r.rejects[1].reason.contains("timestamp"));
        assert_eq!(r.rejects[2].reason, "empty link id");
        assert_eq!(r.rejects[4].reason, "missing travel time");
        assert_eq!(r.rejects[5].reason, "non-finite travel time");
        assert_eq!(r.rows(), 8);
    }

    #[test]
    fn header_only_file_is_empty_success() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            dir.path(),
            "c.csv",
            "link_id,timestamp,travel_time_seconds\n",
        );
        let r = ingest_csv(&p, &SchemaOptions::default()).unwrap();
        assert_eq!(r.rows(), 0);
    }

    #[test]
    fn missing_file_or_column_is_config_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            ingest_csv(&dir.path().join("none.csv"), &SchemaOptions::default()),
            Err(Error::Config(_))
        ));
        let p = write(dir.path(), "d.csv", "link,timestamp,travel_time_seconds\n");
        assert!(matches!(
            ingest_csv(&p, &SchemaOptions::default()),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn custom_schema() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "e.csv", "tt;when;seg\n55;2024-05-05 10:00;X\n");
        let schema = SchemaOptions {
            link_column: "seg".into(),
            timestamp_column: "when".into(),
            travel_time_column: "tt".into(),
            delimiter: ';',
        };
        let r = ingest_csv(&p, &schema).unwrap();
        assert_eq!(r.records, vec![rec("X", "2024-05-05T10:00:00", 55.0)]);
    }

    #[test]
    fn one_window_of_ten() {
        let records: Vec<_> = (0..10)
            .map(|i| rec("A", &format!("2024-01-01T08:{:02}:00", i), 100.0 + i as f64))
            .collect();
        let w = window_group(&records, 15, 5).unwrap();
        assert_eq!(w.windows.len(), 1);
        assert_eq!(w.windows[0].sample.len(), 10);
        assert_eq!(w.windows[0].window_start, ts("2024-01-01T08:00:00"));
        assert_eq!(w.windows[0].window_end, ts("2024-01-01T08:15:00"));
        let dropped = window_group(&records, 15, 20).unwrap();
        assert!(dropped.windows.is_empty());
        assert_eq!((dropped.dropped_windows, dropped.dropped_records), (1, 10));
    }

    #[test]
    fn half_open_windows_and_links() {
        let records = vec![
            rec("A", "2024-01-01T08:14:59", 1.0),
            rec("A", "2024-01-01T08:15:00", 2.0),
            rec("B", "2024-01-01T08:14:00", 3.0),
        ];
        let w = window_group(&records, 15, 1).unwrap();
        assert_eq!(w.windows.len(), 3);
        assert_eq!(w.windowed_records(), 3);
        assert_eq!(w.windows[0].sample.values(), &[1.0]);
        assert_eq!(w.windows[1].sample.values(), &[2.0]);
        assert_eq!(w.windows[1].window_start, ts("2024-01-01T08:15:00"));
        assert_eq!(w.windows[2].link_id, "B");
        assert!(window_group(&records, 0, 1).is_err());
    }

    #[test]
    fn synthetic_round_trip_reconciles() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("syn.csv");
        let opts = SyntheticOptions {
            links: 2,
            windows_per_link: 3,
            records_per_window: 25,
            ..SyntheticOptions::default()
        };
        assert_eq!(write_synthetic_lpr_csv(&p, &opts).unwrap(), 150);
        let first = fs::read(&p).unwrap();
        write_synthetic_lpr_csv(&p, &opts).unwrap();
        assert_eq!(first, fs::read(&p).unwrap());
        let r = ingest_csv(&p, &SchemaOptions::default()).unwrap();
        assert_eq!((r.records.len(), r.rejects.len()), (150, 0));
        let w = window_group(&r.records, 15, 20).unwrap();
        assert_eq!(w.windows.len(), 6);
        assert!(w.windows.iter().all(|x| x.sample.len() == 25));
    }

    #[test]
    fn atomic_write_replaces_contents() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("nested").join("out.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(fs::read(&p).unwrap(), b"two");
        let leftovers = fs::read_dir(p.parent().unwrap()).unwrap().count();
        assert_eq!(leftovers, 1);
    }
}
