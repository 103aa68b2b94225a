//! Trials CSV persistence.
//!
//! A file starts with one `#` metadata line carrying the schema version and
//! the solver setup as JSON, then a header row and one row per trial.

use std::collections::HashSet;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::classify::TrialStatus;
use super::runner::SolveMode;
use crate::error::{Error, Result};
use crate::solver::SolverConfig;

pub const TRIALS_SCHEMA: u32 = 1;
const MAGIC: &str = "# phaselab-trials ";

pub const TRIAL_COLUMNS: [&str; 13] = [
    "ensemble", "N", "delta", "rho", "n", "k", "trial", "seed", "status", "rrmse", "l1_ratio", "outer_iters",
    "runtime_ms",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub ensemble: String,
    #[serde(rename = "N")]
    pub signal_len: usize,
    pub delta: f64,
    pub rho: f64,
    pub n: usize,
    pub k: usize,
    pub trial: usize,
    pub seed: u64,
    pub status: TrialStatus,
    pub rrmse: f64,
    pub l1_ratio: f64,
    pub outer_iters: usize,
    pub runtime_ms: f64,
}

/// Identity of a trial for resumption.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TrialKey {
    pub ensemble: String,
    pub signal_len: usize,
    pub delta_bits: u64,
    pub rho_bits: u64,
    pub trial: usize,
}

impl TrialRecord {
    pub fn key(&self) -> TrialKey {
        TrialKey {
            ensemble: self.ensemble.clone(),
            signal_len: self.signal_len,
            delta_bits: self.delta.to_bits(),
            rho_bits: self.rho.to_bits(),
            trial: self.trial,
        }
    }

    /// The record with timing removed, the only field that varies between
    /// otherwise identical runs.
    pub fn canonical(&self) -> Self {
        Self { runtime_ms: 0.0, ..self.clone() }
    }
}

/// Sorts into canonical order: ensemble, N, δ, ρ, trial.
pub fn sort_canonical(records: &mut [TrialRecord]) {
    records.sort_by(|a, b| {
        a.ensemble
            .cmp(&b.ensemble)
            .then(a.signal_len.cmp(&b.signal_len))
            .then(a.delta.total_cmp(&b.delta))
            .then(a.rho.total_cmp(&b.rho))
            .then(a.trial.cmp(&b.trial))
    });
}

/// Provenance stored in the metadata line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrialsHeader {
    pub schema: u32,
    pub mode: SolveMode,
    pub solver: SolverConfig,
}

impl TrialsHeader {
    pub fn new(mode: SolveMode, solver: SolverConfig) -> Self {
        Self { schema: TRIALS_SCHEMA, mode, solver }
    }

    pub fn line(&self) -> String {
        let json = serde_json::to_string(self).expect("header serializes");
        format!("{MAGIC}{json}")
    }

    fn parse(line: &str) -> Result<Self> {
        let json = line.strip_prefix(MAGIC).ok_or_else(|| Error::Malformed {
            row: 1,
            reason: "missing phaselab-trials metadata line".into(),
        })?;
        let header: Self = serde_json::from_str(json.trim()).map_err(|e| Error::Malformed {
            row: 1,
            reason: format!("bad metadata: {e}"),
        })?;
        if header.schema != TRIALS_SCHEMA {
            return Err(Error::Malformed {
                row: 1,
                reason: format!("unsupported schema {} (expected {TRIALS_SCHEMA})", header.schema),
            });
        }
        Ok(header)
    }
}

pub fn write_trials<W: Write>(mut out: W, header: &TrialsHeader, records: &[TrialRecord]) -> Result<()> {
    writeln!(out, "{}", header.line())?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(TRIAL_COLUMNS)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a trials CSV; errors carry the 1-based line number.
pub fn read_trials<R: Read>(input: R) -> Result<(TrialsHeader, Vec<TrialRecord>)> {
    let mut input = BufReader::new(input);
    let mut first = String::new();
    input.read_line(&mut first)?;
    let header = TrialsHeader::parse(first.trim_end())?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let columns = reader.headers()?.clone();
    if columns.iter().ne(TRIAL_COLUMNS) {
        return Err(Error::Malformed {
            row: 2,
            reason: format!("unexpected columns {:?}", columns.iter().collect::<Vec<_>>()),
        });
    }
    let mut records = Vec::new();
    for row in reader.deserialize() {
        match row {
            Ok(r) => records.push(r),
            Err(e) => {
                // The csv reader counts lines after the metadata line.
                let line = e.position().map_or(0, |p| p.line() as usize + 1);
                return Err(Error::Malformed { row: line, reason: e.to_string() });
            }
        }
    }
    Ok((header, records))
}

pub fn read_trials_file(path: &Path) -> Result<(TrialsHeader, Vec<TrialRecord>)> {
    read_trials(File::open(path)?)
}

/// Destination of trial records during a run.
pub trait RecordSink: Send {
    /// Records already present; the runner skips their keys.
    fn existing(&self) -> &[TrialRecord];
    fn append(&mut self, record: TrialRecord) -> Result<()>;
    /// Called once after all trials; puts the store in canonical order.
    fn finish(&mut self) -> Result<()>;
    fn records(&self) -> &[TrialRecord];
}

#[derive(Debug, Default)]
pub struct MemorySink {
    records: Vec<TrialRecord>,
    preexisting: usize,
}

impl MemorySink {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_records(records: Vec<TrialRecord>) -> Self {
        let preexisting = records.len();
        Self { records, preexisting }
    }

    pub fn into_records(self) -> Vec<TrialRecord> {
        self.records
    }
}

impl RecordSink for MemorySink {
    fn existing(&self) -> &[TrialRecord] {
        &self.records[..self.preexisting]
    }

    fn append(&mut self, record: TrialRecord) -> Result<()> {
        self.records.push(record);
        Ok(())
    }

    fn finish(&mut self) -> Result<()> {
        sort_canonical(&mut self.records);
        self.preexisting = self.records.len();
        Ok(())
    }

    fn records(&self) -> &[TrialRecord] {
        &self.records
    }
}

/// Append-only CSV file, rewritten in canonical order by `finish`.
pub struct CsvSink {
    path: PathBuf,
    header: TrialsHeader,
    file: File,
    records: Vec<TrialRecord>,
    preexisting: usize,
    canonical: bool,
}

impl CsvSink {
    /// Starts a fresh file, replacing any existing one.
    pub fn create(path: impl Into<PathBuf>, header: TrialsHeader) -> Result<Self> {
        let path = path.into();
        let mut file = File::create(&path)?;
        write_trials(&mut file, &header, &[])?;
        Ok(Self { path, header, file, records: Vec::new(), preexisting: 0, canonical: false })
    }

    /// Continues an existing file written with the same solver setup, or
    /// creates it if missing.
    pub fn resume(path: impl Into<PathBuf>, header: TrialsHeader) -> Result<Self> {
        let path = path.into();
        if !path.exists() {
            return Self::create(path, header);
        }
        let (found, records) = read_trials_file(&path)?;
        if found != header {
            return Err(Error::InvalidInput(format!(
                "{} was written with a different solver setup; refusing to resume",
                path.display()
            )));
        }
        let file = OpenOptions::new().append(true).open(&path)?;
        let preexisting = records.len();
        Ok(Self { path, header, file, records, preexisting, canonical: false })
    }

    /// Write `runtime_ms` as 0 so that repeated runs give identical bytes.
    pub fn without_timing(mut self) -> Self {
        self.canonical = true;
        self
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

impl RecordSink for CsvSink {
    fn existing(&self) -> &[TrialRecord] {
        &self.records[..self.preexisting]
    }

    fn append(&mut self, record: TrialRecord) -> Result<()> {
        let record = if self.canonical { record.canonical() } else { record };
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(&mut self.file);
        w.serialize(&record)?;
        w.flush()?;
        drop(w);
        self.records.push(record);
        Ok(())
    }

    fn finish(&mut self) -> Result<()> {
        sort_canonical(&mut self.records);
        let tmp = self.path.with_extension("csv.partial");
        {
            let mut out = std::io::BufWriter::new(File::create(&tmp)?);
            write_trials(&mut out, &self.header, &self.records)?;
            out.flush()?;
        }
        fs::rename(&tmp, &self.path)?;
        self.file = OpenOptions::new().append(true).open(&self.path)?;
        self.preexisting = self.records.len();
        Ok(())
    }

    fn records(&self) -> &[TrialRecord] {
        &self.records
    }
}

pub(crate) fn key_set(records: &[TrialRecord]) -> HashSet<TrialKey> {
    records.iter().map(TrialRecord::key).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(rho: f64, trial: usize) -> TrialRecord {
        TrialRecord {
            ensemble: "fourier".into(),
            signal_len: 64,
            delta: 0.5,
            rho,
            n: 32,
            k: 4,
            trial,
            seed: 99,
            status: TrialStatus::Success,
            rrmse: 1.25e-9,
            l1_ratio: 1.0000000001,
            outer_iters: 40,
            runtime_ms: 0.5,
        }
    }

    fn header() -> TrialsHeader {
        TrialsHeader::new(SolveMode::Complex, SolverConfig::relaxed())
    }

    #[test]
    fn round_trip() {
        let recs = vec![record(0.1, 0), record(0.1 + 0.2, 1)];
        let mut buf = Vec::new();
        write_trials(&mut buf, &header(), &recs).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# phaselab-trials {"));
        assert_eq!(text.lines().nth(1).unwrap(), TRIAL_COLUMNS.join(","));
        let (h, back) = read_trials(&buf[..]).unwrap();
        assert_eq!(h, header());
        assert_eq!(back, recs);
    }

    #[test]
    fn malformed_row_reports_line() {
        let mut buf = Vec::new();
        write_trials(&mut buf, &header(), &[record(0.1, 0)]).unwrap();
        buf.extend_from_slice(b"fourier,64,0.5,0.2,32,oops,0,1,success,0,1,3,0\n");
        match read_trials(&buf[..]) {
            Err(Error::Malformed { row, .. }) => assert_eq!(row, 4),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_metadata_rejected() {
        let text = format!("{}\n", TRIAL_COLUMNS.join(","));
        assert!(matches!(read_trials(text.as_bytes()), Err(Error::Malformed { row: 1, .. })));
    }

    #[test]
    fn canonical_order() {
        let mut recs = vec![record(0.3, 1), record(0.2, 5), record(0.3, 0)];
        sort_canonical(&mut recs);
        let order: Vec<_> = recs.iter().map(|r| (r.rho, r.trial)).collect();
        assert_eq!(order, vec![(0.2, 5), (0.3, 0), (0.3, 1)]);
    }

    #[test]
    fn csv_sink_appends_and_resumes() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let mut sink = CsvSink::create(&path, header()).unwrap();
        sink.append(record(0.3, 0)).unwrap();
        sink.append(record(0.2, 0)).unwrap();
        // Appended rows are readable before finish.
        assert_eq!(read_trials_file(&path).unwrap().1.len(), 2);
        sink.finish().unwrap();
        let (_, recs) = read_trials_file(&path).unwrap();
        assert_eq!(recs[0].rho, 0.2);

        let resumed = CsvSink::resume(&path, header()).unwrap();
        assert_eq!(resumed.existing().len(), 2);
        let other = TrialsHeader::new(SolveMode::Indirect, SolverConfig::relaxed());
        assert!(CsvSink::resume(&path, other).is_err());
    }
}
