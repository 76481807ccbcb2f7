use std::io::Write;

use serde::Serialize;

use super::{CondRow, OcpRow, OutputFormat, SolveRow, StatusRow};
use crate::error::{Error, Result};

/// Rows produced by one experiment.
#[derive(Clone, Debug, PartialEq)]
pub enum Table {
    Cond(Vec<CondRow>),
    Solve(Vec<SolveRow>),
    Ocp(Vec<OcpRow>),
}

impl Table {
    pub fn len(&self) -> usize {
        match self {
            Table::Cond(r) => r.len(),
            Table::Solve(r) => r.len(),
            Table::Ocp(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn failures(&self) -> usize {
        fn count<R: StatusRow>(rows: &[R]) -> usize {
            rows.iter().filter(|r| r.failed()).count()
        }
        match self {
            Table::Cond(r) => count(r),
            Table::Solve(r) => count(r),
            Table::Ocp(r) => count(r),
        }
    }

    pub fn write(&self, out: impl Write, format: OutputFormat) -> Result<()> {
        match self {
            Table::Cond(r) => write_rows(r, out, format),
            Table::Solve(r) => write_rows(r, out, format),
            Table::Ocp(r) => write_rows(r, out, format),
        }
    }
}

/// Writes rows as CSV with a header line, or as a JSON array of objects
/// keyed by column name. Missing values are empty CSV fields or `null`.
pub fn write_rows<R: Serialize>(rows: &[R], mut out: impl Write, format: OutputFormat) -> Result<()> {
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(&mut out);
            for r in rows {
                w.serialize(r).map_err(csv_err)?;
            }
            w.flush()?;
        }
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut out, rows).map_err(|e| Error::Config(e.to_string()))?;
            writeln!(out)?;
        }
    }
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Config(format!("csv: {other:?}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows() -> Vec<CondRow> {
        vec![
            CondRow {
                h: 0.5,
                dofs: 3,
                target: "H".into(),
                kappa2: Some(2.0),
                lambda_width: None,
                method: Some("dense".into()),
                status: "ok".into(),
            },
            CondRow {
                h: 0.25,
                dofs: 7,
                target: "S".into(),
                kappa2: None,
                lambda_width: None,
                method: None,
                status: "error: singular".into(),
            },
        ]
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        write_rows(&rows(), &mut buf, OutputFormat::Csv).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "h,dofs,target,kappa2,lambda_width,method,status");
        assert_eq!(lines[1], "0.5,3,H,2.0,,dense,ok");
        assert_eq!(lines[2], "0.25,7,S,,,,error: singular");
    }

    #[test]
    fn json_keys() {
        let mut buf = Vec::new();
        write_rows(&rows(), &mut buf, OutputFormat::Json).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v[0]["kappa2"], 2.0);
        assert!(v[1]["kappa2"].is_null());
        assert_eq!(Table::Cond(rows()).failures(), 1);
    }
}
