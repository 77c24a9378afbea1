//! Session analytics and the run report artifact.
//!
//! A report bundles what an operator would audit after a run: the per-session
//! error-rate series, the correlation matrix between original and processed
//! feature columns, the key match rate, and the outcome histogram of the
//! encoded state. Reports serialize to JSON or a sectioned CSV; both formats
//! round-trip exactly (f64 values are written shortest-round-trip) and
//! serialization is byte-deterministic, which the CLI leans on for
//! reproducible artifacts.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qkd::QkdSessionResult;
use crate::sim::Statevector;

/// Labeled square Pearson matrix, `values[i][j]` pairing column i with j.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub labels: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

/// Pearson correlation over centered sums. Constant columns have no linear
/// relationship to anything, so pairs involving one correlate to 0.
fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (a, b) in x.iter().zip(y.iter()) {
        let dx = a - mx;
        let dy = b - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return 0.0;
    }
    (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0)
}

/// Pearson matrix over equally long columns (at least 2 samples each).
/// Symmetric by construction with an exact unit diagonal.
pub fn correlation_matrix(labels: &[String], columns: &[Vec<f64>]) -> Result<CorrelationMatrix> {
    if labels.len() != columns.len() {
        return Err(Error::usage(format!(
            "{} labels for {} columns",
            labels.len(),
            columns.len()
        )));
    }
    if let Some(first) = columns.first() {
        if first.len() < 2 {
            return Err(Error::usage("correlation needs at least 2 samples"));
        }
        if columns.iter().any(|c| c.len() != first.len()) {
            return Err(Error::usage("columns differ in length"));
        }
    }
    let k = columns.len();
    let mut values = vec![vec![0.0; k]; k];
    for i in 0..k {
        values[i][i] = 1.0;
        for j in (i + 1)..k {
            let r = pearson(&columns[i], &columns[j]);
            values[i][j] = r;
            values[j][i] = r;
        }
    }
    Ok(CorrelationMatrix {
        labels: labels.to_vec(),
        values,
    })
}

/// Fraction of sessions whose corrected key equals Alice's exactly.
pub fn key_match_rate(sessions: &[QkdSessionResult]) -> Result<f64> {
    if sessions.is_empty() {
        return Err(Error::usage("no sessions to rate"));
    }
    let matches = sessions
        .iter()
        .filter(|s| s.alice_key == s.bob_key_corrected)
        .count();
    Ok(matches as f64 / sessions.len() as f64)
}

/// One histogram bin of a full-register measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutcomeBin {
    pub index: usize,
    pub frequency: f64,
    /// Whether `index` is a prime number; prime-indexed outcomes are the
    /// marker set used when eyeballing histograms for drift.
    pub prime: bool,
}

pub(crate) fn is_prime(n: usize) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Empirical distribution of full-register Z measurements over fresh copies
/// of `state`. Returns one bin per basis index, including empty ones.
pub fn outcome_distribution(
    state: &Statevector,
    shots: usize,
    rng: &mut impl Rng,
) -> Result<Vec<OutcomeBin>> {
    if shots == 0 {
        return Err(Error::usage("outcome distribution needs at least one shot"));
    }
    let mut counts = vec![0usize; state.amplitudes().len()];
    for _ in 0..shots {
        counts[state.sample_index(rng)] += 1;
    }
    Ok(counts
        .iter()
        .enumerate()
        .map(|(index, &c)| OutcomeBin {
            index,
            frequency: c as f64 / shots as f64,
            prime: is_prime(index),
        })
        .collect())
}

/// Per-session point of the error-rate series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QberPoint {
    pub session: usize,
    pub qber: f64,
    pub flagged: bool,
    pub eve_active: bool,
    pub key_len: usize,
    pub leaked_bits: usize,
}

pub fn qber_series(sessions: &[QkdSessionResult]) -> Vec<QberPoint> {
    sessions
        .iter()
        .enumerate()
        .map(|(session, s)| QberPoint {
            session,
            qber: s.qber,
            flagged: s.flagged,
            eve_active: s.eve_active,
            key_len: s.bob_key_corrected.len(),
            leaked_bits: s.leaked_bits,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ReportMeta {
    pub seed: u64,
    /// Resolved run configuration, echoed key by key.
    pub config: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Report {
    pub meta: ReportMeta,
    pub qber_series: Vec<QberPoint>,
    pub correlation: CorrelationMatrix,
    pub key_match_rate: f64,
    pub outcomes: Vec<OutcomeBin>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

impl ReportFormat {
    pub fn file_name(&self) -> &'static str {
        match self {
            ReportFormat::Json => "report.json",
            ReportFormat::Csv => "report.csv",
        }
    }

    /// Infers the format from a file extension.
    pub fn from_path(path: &Path) -> Result<Self> {
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Ok(ReportFormat::Json),
            Some("csv") => Ok(ReportFormat::Csv),
            _ => Err(Error::usage(format!(
                "cannot infer report format of {}",
                path.display()
            ))),
        }
    }
}

impl std::fmt::Display for ReportFormat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ReportFormat::Json => "json",
            ReportFormat::Csv => "csv",
        })
    }
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(Error::usage(format!(
                "unknown format `{other}`, want json or csv"
            ))),
        }
    }
}

impl Report {
    /// Structural checks shared by export and import: a square, symmetric
    /// correlation with unit diagonal, and all rates in [0, 1].
    pub fn validate(&self) -> Result<()> {
        let k = self.correlation.labels.len();
        if self.correlation.values.len() != k
            || self.correlation.values.iter().any(|row| row.len() != k)
        {
            return Err(Error::usage("correlation matrix is not square"));
        }
        for i in 0..k {
            if (self.correlation.values[i][i] - 1.0).abs() > 1e-12 {
                return Err(Error::usage(format!("correlation diagonal {i} is not 1")));
            }
            for j in 0..k {
                let v = self.correlation.values[i][j];
                if (v - self.correlation.values[j][i]).abs() > 1e-12 {
                    return Err(Error::usage(format!(
                        "correlation not symmetric at ({i}, {j})"
                    )));
                }
                if !(-1.0 - 1e-12..=1.0 + 1e-12).contains(&v) {
                    return Err(Error::usage(format!("correlation {v} outside [-1, 1]")));
                }
            }
        }
        if !(0.0..=1.0).contains(&self.key_match_rate) {
            return Err(Error::usage(format!(
                "key match rate {} outside [0, 1]",
                self.key_match_rate
            )));
        }
        for bin in &self.outcomes {
            if !(0.0..=1.0).contains(&bin.frequency) {
                return Err(Error::usage(format!(
                    "outcome frequency {} outside [0, 1]",
                    bin.frequency
                )));
            }
        }
        for point in &self.qber_series {
            if !(0.0..=1.0).contains(&point.qber) {
                return Err(Error::usage(format!("qber {} outside [0, 1]", point.qber)));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        self.validate()?;
        let mut s = serde_json::to_string_pretty(self)
            .map_err(|e| Error::usage(format!("report not serializable: {e}")))?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Report> {
        let report: Report = serde_json::from_str(text)
            .map_err(|e| Error::parse(e.line(), format!("bad report json: {e}")))?;
        report.validate()?;
        Ok(report)
    }

    /// Sectioned CSV: every row starts with a record kind. Rows appear in a
    /// fixed order, so equal reports serialize to identical bytes.
    pub fn to_csv(&self) -> Result<String> {
        self.validate()?;
        let mut w = csv::WriterBuilder::new()
            .flexible(true)
            .from_writer(Vec::new());
        let write = |w: &mut csv::Writer<Vec<u8>>, row: &[String]| -> Result<()> {
            w.write_record(row)
                .map_err(|e| Error::usage(format!("csv write failed: {e}")))
        };
        write(&mut w, &["meta_seed".into(), self.meta.seed.to_string()])?;
        for (k, v) in &self.meta.config {
            write(&mut w, &["meta_config".into(), k.clone(), v.clone()])?;
        }
        for p in &self.qber_series {
            write(
                &mut w,
                &[
                    "qber_point".into(),
                    p.session.to_string(),
                    p.qber.to_string(),
                    p.flagged.to_string(),
                    p.eve_active.to_string(),
                    p.key_len.to_string(),
                    p.leaked_bits.to_string(),
                ],
            )?;
        }
        if !self.correlation.labels.is_empty() {
            let mut row = vec!["corr_labels".to_string()];
            row.extend(self.correlation.labels.iter().cloned());
            write(&mut w, &row)?;
            for (i, values) in self.correlation.values.iter().enumerate() {
                let mut row = vec!["corr_row".to_string(), i.to_string()];
                row.extend(values.iter().map(|v| v.to_string()));
                write(&mut w, &row)?;
            }
        }
        write(
            &mut w,
            &["key_match_rate".into(), self.key_match_rate.to_string()],
        )?;
        for b in &self.outcomes {
            write(
                &mut w,
                &[
                    "outcome".into(),
                    b.index.to_string(),
                    b.frequency.to_string(),
                    b.prime.to_string(),
                ],
            )?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::usage(format!("csv write failed: {e}")))?;
        String::from_utf8(bytes).map_err(|e| Error::usage(format!("csv not utf-8: {e}")))
    }

    pub fn from_csv(text: &str) -> Result<Report> {
        fn field(row: &csv::StringRecord, i: usize, line: usize) -> Result<&str> {
            row.get(i)
                .ok_or_else(|| Error::parse(line, format!("missing field {i}")))
        }
        fn parse<T: std::str::FromStr>(s: &str, line: usize, what: &str) -> Result<T> {
            s.parse()
                .map_err(|_| Error::parse(line, format!("bad {what} `{s}`")))
        }

        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_reader(text.as_bytes());
        let mut report = Report::default();
        for row in reader.records() {
            let row = row.map_err(|e| {
                Error::parse(
                    e.position().map(|p| p.line() as usize).unwrap_or_default(),
                    e.to_string(),
                )
            })?;
            let line = row
                .position()
                .map(|p| p.line() as usize)
                .unwrap_or_default();
            match field(&row, 0, line)? {
                "meta_seed" => report.meta.seed = parse(field(&row, 1, line)?, line, "seed")?,
                "meta_config" => {
                    let key = field(&row, 1, line)?.to_string();
                    let value = field(&row, 2, line)?.to_string();
                    report.meta.config.insert(key, value);
                }
                "qber_point" => report.qber_series.push(QberPoint {
                    session: parse(field(&row, 1, line)?, line, "session")?,
                    qber: parse(field(&row, 2, line)?, line, "qber")?,
                    flagged: parse(field(&row, 3, line)?, line, "flag")?,
                    eve_active: parse(field(&row, 4, line)?, line, "flag")?,
                    key_len: parse(field(&row, 5, line)?, line, "key_len")?,
                    leaked_bits: parse(field(&row, 6, line)?, line, "leaked_bits")?,
                }),
                "corr_labels" => {
                    report.correlation.labels = row.iter().skip(1).map(str::to_string).collect();
                }
                "corr_row" => {
                    let values = row
                        .iter()
                        .skip(2)
                        .map(|v| parse(v, line, "correlation value"))
                        .collect::<Result<Vec<f64>>>()?;
                    report.correlation.values.push(values);
                }
                "key_match_rate" => {
                    report.key_match_rate = parse(field(&row, 1, line)?, line, "rate")?;
                }
                "outcome" => report.outcomes.push(OutcomeBin {
                    index: parse(field(&row, 1, line)?, line, "index")?,
                    frequency: parse(field(&row, 2, line)?, line, "frequency")?,
                    prime: parse(field(&row, 3, line)?, line, "flag")?,
                }),
                other => return Err(Error::parse(line, format!("unknown record `{other}`"))),
            }
        }
        report.validate()?;
        Ok(report)
    }
}

pub fn export_report(report: &Report, format: ReportFormat, path: impl AsRef<Path>) -> Result<()> {
    let text = match format {
        ReportFormat::Json => report.to_json()?,
        ReportFormat::Csv => report.to_csv()?,
    };
    fs::write(path.as_ref(), text)?;
    Ok(())
}

pub fn import_report(path: impl AsRef<Path>, format: ReportFormat) -> Result<Report> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })?;
    match format {
        ReportFormat::Json => Report::from_json(&text),
        ReportFormat::Csv => Report::from_csv(&text),
    }
}

/// `qber_series.csv` artifact body.
pub fn qber_series_csv(points: &[QberPoint]) -> String {
    let mut out = String::from("session,qber,flagged,eve_active,key_len,leaked_bits\n");
    for p in points {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            p.session, p.qber, p.flagged, p.eve_active, p.key_len, p.leaked_bits
        );
    }
    out
}

/// `correlation.csv` artifact body: header of labels, then one labeled row
/// per column.
pub fn correlation_csv(matrix: &CorrelationMatrix) -> String {
    let mut out = String::from("label");
    for l in &matrix.labels {
        let _ = write!(out, ",{l}");
    }
    out.push('\n');
    for (label, row) in matrix.labels.iter().zip(matrix.values.iter()) {
        let _ = write!(out, "{label}");
        for v in row {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qkd::{run_sessions, SeriesConfig};
    use crate::rng::seeded_rng;
    use crate::sim::GateOp;

    fn labels(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn self_correlation_is_exactly_one() {
        let x = vec![1.0, 2.0, 5.0, 3.0];
        let m = correlation_matrix(&labels(&["x", "x2"]), &[x.clone(), x]).unwrap();
        assert_eq!(m.values[0][1], 1.0);
        assert_eq!(m.values[0][0], 1.0);
    }

    #[test]
    fn complement_correlates_to_minus_one() {
        let x = vec![0.1, 0.7, 0.3, 0.9];
        let y: Vec<f64> = x.iter().map(|v| 1.0 - v).collect();
        let m = correlation_matrix(&labels(&["x", "y"]), &[x, y]).unwrap();
        assert!((m.values[0][1] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn proportional_columns_correlate_to_one() {
        let m = correlation_matrix(
            &labels(&["x", "y"]),
            &[vec![1.0, 2.0, 3.0], vec![2.0, 4.0, 6.0]],
        )
        .unwrap();
        assert_eq!(m.values[0][1], 1.0);
    }

    #[test]
    fn constant_column_correlates_to_zero_off_diagonal() {
        let m = correlation_matrix(
            &labels(&["c", "x"]),
            &[vec![4.0, 4.0, 4.0], vec![1.0, 2.0, 3.0]],
        )
        .unwrap();
        assert_eq!(m.values[0][1], 0.0);
        assert_eq!(m.values[1][0], 0.0);
        assert_eq!(m.values[0][0], 1.0);
    }

    #[test]
    fn correlation_rejects_bad_shapes() {
        assert!(correlation_matrix(&labels(&["a"]), &[]).is_err());
        assert!(correlation_matrix(&labels(&["a"]), &[vec![1.0]]).is_err());
        assert!(correlation_matrix(&labels(&["a", "b"]), &[vec![1.0, 2.0], vec![1.0]]).is_err());
    }

    #[test]
    fn match_rate_over_clean_series_is_one() {
        let sessions = run_sessions(
            &SeriesConfig {
                sessions: 5,
                ..Default::default()
            },
            3,
        )
        .unwrap();
        assert_eq!(key_match_rate(&sessions).unwrap(), 1.0);
        assert!(key_match_rate(&[]).is_err());
    }

    #[test]
    fn prime_flags_match_known_set_up_to_63() {
        let known = [
            2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61,
        ];
        let state = {
            let mut s = Statevector::new(6).unwrap();
            for q in 0..6 {
                s.apply(&GateOp::H { qubit: q }).unwrap();
            }
            s
        };
        let bins = outcome_distribution(&state, 1, &mut seeded_rng(1)).unwrap();
        let flagged: Vec<usize> = bins.iter().filter(|b| b.prime).map(|b| b.index).collect();
        assert_eq!(flagged, known);
    }

    #[test]
    fn basis_state_distribution_concentrates() {
        let mut state = Statevector::new(6).unwrap();
        // |000101> is index 5.
        state.apply(&GateOp::X { qubit: 0 }).unwrap();
        state.apply(&GateOp::X { qubit: 2 }).unwrap();
        let bins = outcome_distribution(&state, 100, &mut seeded_rng(2)).unwrap();
        assert_eq!(bins[5].frequency, 1.0);
        assert!(bins[5].prime);
        assert!(bins
            .iter()
            .filter(|b| b.index != 5)
            .all(|b| b.frequency == 0.0));
    }

    #[test]
    fn uniform_distribution_is_roughly_flat() {
        let mut state = Statevector::new(6).unwrap();
        for q in 0..6 {
            state.apply(&GateOp::H { qubit: q }).unwrap();
        }
        let bins = outcome_distribution(&state, 64_000, &mut seeded_rng(3)).unwrap();
        let total: f64 = bins.iter().map(|b| b.frequency).sum();
        assert!((total - 1.0).abs() < 1e-12);
        for b in &bins {
            assert!(
                (b.frequency - 1.0 / 64.0).abs() < 0.01,
                "bin {} at {}",
                b.index,
                b.frequency
            );
        }
    }

    #[test]
    fn zero_shots_is_usage_error() {
        let state = Statevector::new(2).unwrap();
        assert!(outcome_distribution(&state, 0, &mut seeded_rng(4)).is_err());
    }

    fn sample_report() -> Report {
        let sessions = run_sessions(
            &SeriesConfig {
                sessions: 3,
                ..Default::default()
            },
            11,
        )
        .unwrap();
        let mut config = BTreeMap::new();
        config.insert("sessions".to_string(), "3".to_string());
        config.insert("out".to_string(), "run,dir".to_string());
        let x = vec![0.1, 0.5, 0.9];
        let y: Vec<f64> = x.iter().map(|v| 1.0 - v).collect();
        let mut state = Statevector::new(3).unwrap();
        state.apply(&GateOp::H { qubit: 0 }).unwrap();
        Report {
            meta: ReportMeta { seed: 11, config },
            qber_series: qber_series(&sessions),
            correlation: correlation_matrix(&labels(&["x", "y"]), &[x, y]).unwrap(),
            key_match_rate: key_match_rate(&sessions).unwrap(),
            outcomes: outcome_distribution(&state, 500, &mut seeded_rng(5)).unwrap(),
        }
    }

    #[test]
    fn json_round_trip_is_exact() {
        let report = sample_report();
        let text = report.to_json().unwrap();
        let back = Report::from_json(&text).unwrap();
        assert_eq!(back, report);
        // Top-level key order is part of the format.
        let meta_pos = text.find("\"meta\"").unwrap();
        let qber_pos = text.find("\"qber_series\"").unwrap();
        let corr_pos = text.find("\"correlation\"").unwrap();
        let rate_pos = text.find("\"key_match_rate\"").unwrap();
        let out_pos = text.find("\"outcomes\"").unwrap();
        assert!(meta_pos < qber_pos && qber_pos < corr_pos);
        assert!(corr_pos < rate_pos && rate_pos < out_pos);
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let report = sample_report();
        let text = report.to_csv().unwrap();
        let back = Report::from_csv(&text).unwrap();
        assert_eq!(back, report);
    }

    #[test]
    fn serialization_is_byte_deterministic() {
        let a = sample_report();
        let b = sample_report();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        assert_eq!(a.to_csv().unwrap(), b.to_csv().unwrap());
    }

    #[test]
    fn empty_series_report_is_valid() {
        let report = Report {
            key_match_rate: 1.0,
            ..Default::default()
        };
        let text = report.to_json().unwrap();
        let back = Report::from_json(&text).unwrap();
        assert_eq!(back, report);
        let csv_text = report.to_csv().unwrap();
        assert_eq!(Report::from_csv(&csv_text).unwrap(), report);
    }

    #[test]
    fn validate_rejects_asymmetry_and_bad_rates() {
        let mut report = sample_report();
        report.correlation.values[0][1] = 0.5;
        assert!(report.validate().is_err());

        let mut report = sample_report();
        report.key_match_rate = 1.5;
        assert!(report.validate().is_err());
    }

    #[test]
    fn export_import_files_round_trip() {
        let report = sample_report();
        let dir = tempfile::tempdir().unwrap();
        for format in [ReportFormat::Json, ReportFormat::Csv] {
            let path = dir.path().join(format.file_name());
            export_report(&report, format, &path).unwrap();
            assert_eq!(import_report(&path, format).unwrap(), report);
        }
    }

    #[test]
    fn artifact_csv_bodies_are_stable() {
        let report = sample_report();
        let series = qber_series_csv(&report.qber_series);
        assert!(series.starts_with("session,qber,flagged,eve_active,key_len,leaked_bits\n"));
        assert_eq!(series.lines().count(), 1 + report.qber_series.len());
        let corr = correlation_csv(&report.correlation);
        assert!(corr.starts_with("label,x,y\n"));
        assert_eq!(corr.lines().count(), 3);
    }
}
