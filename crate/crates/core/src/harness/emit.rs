use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::transcript::SearchTranscript;

use super::config::OutputFormat;
use super::stats::SummaryStats;

/// CSV header, in column order.
pub const COLUMNS: [&str; 15] = [
    "scenario",
    "n",
    "p",
    "delta",
    "trials",
    "seed",
    "mean_queries",
    "std_queries",
    "max_queries",
    "error_rate",
    "error_ci_low",
    "error_ci_high",
    "theoretical_bound",
    "bound_satisfied",
    "flagged_trials",
];

/// A results row plus, in JSON, an optional sample of transcripts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    #[serde(flatten)]
    pub summary: SummaryStats,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transcript_sample: Option<Vec<SearchTranscript>>,
}

impl ResultRecord {
    pub fn new(summary: SummaryStats, transcript_sample: Option<Vec<SearchTranscript>>) -> Self {
        ResultRecord {
            summary,
            transcript_sample,
        }
    }
}

/// Header plus one line per record. Transcripts are not written to CSV.
pub fn write_csv<W: Write>(out: W, records: &[ResultRecord]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(COLUMNS)?;
    for r in records {
        w.serialize(&r.summary)?;
    }
    w.flush().map_err(|e| Error::io("<csv output>", e))?;
    Ok(())
}

/// A JSON array of records.
pub fn write_json<W: Write>(mut out: W, records: &[ResultRecord]) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, records)?;
    out.write_all(b"\n").map_err(|e| Error::io("<json output>", e))?;
    Ok(())
}

pub fn emit<W: Write>(out: W, format: OutputFormat, records: &[ResultRecord]) -> Result<()> {
    match format {
        OutputFormat::Csv => write_csv(out, records),
        OutputFormat::Json => write_json(out, records),
    }
}

pub fn write_file(path: &Path, format: OutputFormat, records: &[ResultRecord]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    emit(&mut w, format, records)?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_csv(path: &Path) -> Result<Vec<SummaryStats>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    csv::Reader::from_reader(file)
        .deserialize()
        .map(|r| r.map_err(Error::from))
        .collect()
}

pub fn read_json(path: &Path) -> Result<Vec<ResultRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::Scenario;

    fn row(n: usize, ok: bool) -> SummaryStats {
        SummaryStats {
            scenario: Scenario::GraphLvDistr,
            n,
            p: 0.25,
            delta: 0.1,
            trials: 100,
            seed: 7,
            mean_queries: 41.5,
            std_queries: 3.25,
            max_queries: 60,
            error_rate: 0.02,
            error_ci_low: 0.005,
            error_ci_high: 0.07,
            theoretical_bound: 65.29,
            bound_satisfied: ok,
            flagged_trials: 0,
        }
    }

    #[test]
    fn empty_csv_is_header_only() {
        let mut buf = Vec::new();
        write_csv(&mut buf, &[]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), format!("{}\n", COLUMNS.join(",")));
    }

    #[test]
    fn csv_rows_have_constant_width() {
        let mut buf = Vec::new();
        let recs = vec![ResultRecord::new(row(8, true), None), ResultRecord::new(row(1024, false), None)];
        write_csv(&mut buf, &recs).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let widths: Vec<usize> = text.lines().map(|l| l.split(',').count()).collect();
        assert_eq!(widths, vec![15, 15, 15]);
        assert!(text.lines().nth(1).unwrap().starts_with("graph-lv-distr,8,0.25,"));
    }

    #[test]
    fn json_round_trip() {
        let recs = vec![ResultRecord::new(row(8, true), None)];
        let mut buf = Vec::new();
        write_json(&mut buf, &recs).unwrap();
        let back: Vec<ResultRecord> = serde_json::from_slice(&buf).unwrap();
        assert_eq!(back, recs);
        let value: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        let keys: Vec<&str> = value[0].as_object().unwrap().keys().map(|k| k.as_str()).collect();
        for c in COLUMNS {
            assert!(keys.contains(&c), "missing {c}");
        }
    }
}
