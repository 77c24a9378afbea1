//! SCADA traffic CSV ingest.
//!
//! Expects per-flow rows with the six numeric columns named in
//! `COLUMN_NAMES` (matched case-insensitively; any other columns, such as a
//! leading frame index, are ignored). Values are non-negative integers;
//! source ports must fit a u16. Rows whose total packet count disagrees with
//! src + dst are loaded anyway but counted as warnings, since captures in
//! the wild contain such rows.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use crate::encoding::{FeatureVector, FEATURE_COUNT};
use crate::error::{Error, Result};

/// Canonical column spellings, in feature order.
pub const COLUMN_NAMES: [&str; FEATURE_COUNT] = [
    "Sport", "TotPkts", "TotBytes", "SrcPkts", "DstPkts", "SrcBytes",
];

/// One traffic flow. Field order matches `COLUMN_NAMES`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrafficRow {
    pub sport: u64,
    pub tot_pkts: u64,
    pub tot_bytes: u64,
    pub src_pkts: u64,
    pub dst_pkts: u64,
    pub src_bytes: u64,
}

impl TrafficRow {
    pub fn packet_sum_consistent(&self) -> bool {
        self.tot_pkts == self.src_pkts + self.dst_pkts
    }

    /// Raw feature values as f64, in `COLUMN_NAMES` order.
    pub fn features(&self) -> [f64; FEATURE_COUNT] {
        [
            self.sport as f64,
            self.tot_pkts as f64,
            self.tot_bytes as f64,
            self.src_pkts as f64,
            self.dst_pkts as f64,
            self.src_bytes as f64,
        ]
    }
}

#[derive(Debug, Clone, Default)]
pub struct Dataset {
    pub rows: Vec<TrafficRow>,
    /// Rows where tot_pkts != src_pkts + dst_pkts.
    pub packet_sum_warnings: usize,
}

/// Per-column min and max over a loaded dataset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColumnStats {
    pub min: [f64; FEATURE_COUNT],
    pub max: [f64; FEATURE_COUNT],
}

fn open_named(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })
}

fn csv_error(err: csv::Error) -> Error {
    let line = err
        .position()
        .map(|p| p.line() as usize)
        .unwrap_or_default();
    match err.kind() {
        csv::ErrorKind::Io(_) => match err.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            _ => unreachable!(),
        },
        _ => Error::parse(line, err.to_string()),
    }
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    let file = open_named(path.as_ref())?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(file);

    let headers = reader.headers().map_err(csv_error)?.clone();
    let mut column_index = [usize::MAX; FEATURE_COUNT];
    for (want, slot) in COLUMN_NAMES.iter().zip(column_index.iter_mut()) {
        for (i, have) in headers.iter().enumerate() {
            if have.trim().eq_ignore_ascii_case(want) {
                *slot = i;
                break;
            }
        }
    }
    let missing: Vec<&str> = COLUMN_NAMES
        .iter()
        .zip(column_index.iter())
        .filter(|(_, &i)| i == usize::MAX)
        .map(|(&name, _)| name)
        .collect();
    if !missing.is_empty() {
        return Err(Error::schema(format!(
            "missing columns: {}",
            missing.join(", ")
        )));
    }

    let mut dataset = Dataset::default();
    for record in reader.records() {
        let record = record.map_err(csv_error)?;
        let line = record
            .position()
            .map(|p| p.line() as usize)
            .unwrap_or_default();
        let mut values = [0u64; FEATURE_COUNT];
        for (k, &col) in column_index.iter().enumerate() {
            let cell = record.get(col).unwrap_or("");
            values[k] = cell.parse().map_err(|_| {
                Error::parse(
                    line,
                    format!("column {}: invalid integer `{cell}`", COLUMN_NAMES[k]),
                )
            })?;
        }
        if values[0] > u16::MAX as u64 {
            return Err(Error::parse(
                line,
                format!("column Sport: {} outside 0..=65535", values[0]),
            ));
        }
        let row = TrafficRow {
            sport: values[0],
            tot_pkts: values[1],
            tot_bytes: values[2],
            src_pkts: values[3],
            dst_pkts: values[4],
            src_bytes: values[5],
        };
        if !row.packet_sum_consistent() {
            dataset.packet_sum_warnings += 1;
        }
        dataset.rows.push(row);
    }
    Ok(dataset)
}

/// Writes rows back out with canonical headers. `load_dataset` on the result
/// returns the same rows.
pub fn write_dataset(path: impl AsRef<Path>, rows: &[TrafficRow]) -> Result<()> {
    let mut out = String::new();
    out.push_str(&COLUMN_NAMES.join(","));
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.sport, r.tot_pkts, r.tot_bytes, r.src_pkts, r.dst_pkts, r.src_bytes
        ));
    }
    let mut file = File::create(path.as_ref())?;
    file.write_all(out.as_bytes())?;
    Ok(())
}

/// Column-wise min/max. Errors on an empty dataset: there is nothing to
/// normalize against.
pub fn column_stats(rows: &[TrafficRow]) -> Result<ColumnStats> {
    let first = rows
        .first()
        .ok_or_else(|| Error::usage("cannot compute column stats of an empty dataset"))?;
    let mut stats = ColumnStats {
        min: first.features(),
        max: first.features(),
    };
    for row in &rows[1..] {
        for (k, v) in row.features().iter().enumerate() {
            stats.min[k] = stats.min[k].min(*v);
            stats.max[k] = stats.max[k].max(*v);
        }
    }
    Ok(stats)
}

/// Min-max normalization of one row against dataset stats. Constant columns
/// map to 0; values are clamped so rows from outside the stats' dataset
/// still produce a valid feature vector.
pub fn normalize_row(row: &TrafficRow, stats: &ColumnStats) -> FeatureVector {
    let mut values = [0.0; FEATURE_COUNT];
    for (k, v) in row.features().iter().enumerate() {
        let span = stats.max[k] - stats.min[k];
        if span > 0.0 {
            values[k] = ((v - stats.min[k]) / span).clamp(0.0, 1.0);
        }
    }
    FeatureVector::new(values).expect("clamped values are in range")
}
