//! Machine-readable reports: one row per check, emitted as JSON (stable
//! key order) and CSV (the plot-data interface). Byte-identical output for
//! identical inputs: rationals print canonically and floats always carry
//! twelve significant digits.

use serde::Serialize;
use std::io::Write;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

impl Status {
    pub fn from_bool(ok: bool) -> Status {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Error => "error",
        }
    }
}

/// One check: an id unique within the run, the stable name of the property
/// being checked, the outcome, and the numbers behind it.
#[derive(Debug, Clone, Serialize)]
pub struct CheckRow {
    pub id: String,
    pub property: String,
    pub status: Status,
    pub value: String,
    pub tolerance: String,
    pub residual: String,
}

#[derive(Debug, Clone, Default)]
pub struct Report {
    pub rows: Vec<CheckRow>,
}

#[derive(Debug, Clone, Serialize)]
struct Summary {
    total: usize,
    passed: usize,
    failed: usize,
    errors: usize,
}

#[derive(Debug, Clone, Serialize)]
struct ReportDoc<'a> {
    checks: &'a [CheckRow],
    summary: Summary,
}

impl Report {
    pub fn new() -> Report {
        Report::default()
    }

    pub fn push(
        &mut self,
        id: impl Into<String>,
        property: impl Into<String>,
        status: Status,
        value: impl Into<String>,
        tolerance: impl Into<String>,
        residual: impl Into<String>,
    ) {
        self.rows.push(CheckRow {
            id: id.into(),
            property: property.into(),
            status,
            value: value.into(),
            tolerance: tolerance.into(),
            residual: residual.into(),
        });
    }

    pub fn all_passed(&self) -> bool {
        self.rows.iter().all(|r| r.status == Status::Pass)
    }

    pub fn failed_count(&self) -> usize {
        self.rows.iter().filter(|r| r.status != Status::Pass).count()
    }

    fn summary(&self) -> Summary {
        Summary {
            total: self.rows.len(),
            passed: self.rows.iter().filter(|r| r.status == Status::Pass).count(),
            failed: self.rows.iter().filter(|r| r.status == Status::Fail).count(),
            errors: self.rows.iter().filter(|r| r.status == Status::Error).count(),
        }
    }

    pub fn to_json_string(&self) -> String {
        let doc = ReportDoc {
            checks: &self.rows,
            summary: self.summary(),
        };
        serde_json::to_string_pretty(&doc).expect("report serialization is infallible")
    }

    /// Writes `report.json` and `report.csv` into the output directory.
    pub fn write(&self, out_dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(out_dir)?;
        let mut json = std::fs::File::create(out_dir.join("report.json"))?;
        json.write_all(self.to_json_string().as_bytes())?;
        json.write_all(b"\n")?;

        let mut csv = csv::Writer::from_path(out_dir.join("report.csv"))?;
        csv.write_record(["id", "property", "status", "value", "tolerance", "residual"])?;
        for row in &self.rows {
            csv.write_record([
                row.id.as_str(),
                row.property.as_str(),
                row.status.as_str(),
                row.value.as_str(),
                row.tolerance.as_str(),
                row.residual.as_str(),
            ])?;
        }
        csv.flush()?;
        Ok(())
    }
}
