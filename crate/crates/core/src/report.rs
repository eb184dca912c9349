//! JSON and CSV serialisation of trial records.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use crate::error::{Result, WalshError};
use crate::harness::TrialRecord;

/// Column order of the CSV report.
pub const CSV_HEADER: [&str; 14] = [
    "seed", "p", "K", "M", "lhs", "rhs", "ratio", "A", "B", "C1", "C2", "D1", "D2", "E",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    Json,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "json" => Ok(Self::Json),
            "csv" => Ok(Self::Csv),
            other => Err(format!("unknown report format `{other}` (expected json or csv)")),
        }
    }
}

impl fmt::Display for ReportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Json => "json",
            Self::Csv => "csv",
        })
    }
}

/// Writes the records to `writer`. JSON is an array of objects with keys
/// `seed, p, K, M, lhs, rhs, ratio, chain{A, B, C1, C2, D1, D2, E}`; CSV has
/// the columns of [`CSV_HEADER`], LF line endings.
pub fn write_report<W: Write>(records: &[TrialRecord], format: ReportFormat, writer: W) -> std::io::Result<()> {
    match format {
        ReportFormat::Json => {
            let mut writer = writer;
            serde_json::to_writer_pretty(&mut writer, records)?;
            writer.write_all(b"\n")
        }
        ReportFormat::Csv => {
            let mut csv = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(writer);
            csv.write_record(CSV_HEADER)?;
            for r in records {
                let c = &r.chain;
                let fields = [
                    r.seed.to_string(),
                    r.p.to_string(),
                    r.resolution.to_string(),
                    r.intervals.to_string(),
                    r.lhs.to_string(),
                    r.rhs.to_string(),
                    r.ratio.to_string(),
                    c.a.to_string(),
                    c.b.to_string(),
                    c.c1.to_string(),
                    c.c2.to_string(),
                    c.d1.to_string(),
                    c.d2.to_string(),
                    c.e.to_string(),
                ];
                csv.write_record(&fields)?;
            }
            csv.flush()
        }
    }
}

/// Writes the report to `destination`.
pub fn emit_report(records: &[TrialRecord], format: ReportFormat, destination: &Path) -> Result<()> {
    let io_err = |source| WalshError::Io {
        path: destination.to_path_buf(),
        source,
    };
    let file = File::create(destination).map_err(io_err)?;
    let mut writer = BufWriter::new(file);
    write_report(records, format, &mut writer).map_err(io_err)?;
    writer.flush().map_err(io_err)
}
